//! Curve experiments: exceptional-set membership via the dual lattice flow,
//! Monte Carlo measure estimates, the shifted-rational approximation search,
//! the nested-set sandwich, and the fiber map with its exact inverse.

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use crate::arith::{cmp_pow_rat, dist_to_z, Rect, Weight};
use crate::dynamics::{make_g_ck, make_g_t, make_u1_star, CurveFrame};
use crate::error::{with_widening, Error, Result, PREC_START};
use crate::interval::{format_rat, rat, rat_int, Rat};
use crate::lattice::{in_k_eps, successive_minima, LatticeBasis};
use crate::mat::dual_star;

/// Sparse multivariate polynomial with rational coefficients, used for the
/// curve coordinate functions so evaluation and differentiation stay exact.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiPoly {
    /// (coefficient, exponent per variable).
    terms: Vec<(Rat, Vec<u32>)>,
    vars: usize,
}

impl MultiPoly {
    pub fn new(vars: usize, terms: Vec<(Rat, Vec<u32>)>) -> Result<Self> {
        if terms.iter().any(|(_, e)| e.len() != vars) {
            return Err(Error::DimensionMismatch("polynomial exponent arity".into()));
        }
        Ok(MultiPoly { terms, vars })
    }

    /// Univariate monomial `c x^e`.
    pub fn monomial(c: Rat, e: u32) -> Self {
        MultiPoly {
            terms: vec![(c, vec![e])],
            vars: 1,
        }
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn eval(&self, x: &[Rat]) -> Result<Rat> {
        if x.len() != self.vars {
            return Err(Error::DimensionMismatch("polynomial evaluation arity".into()));
        }
        let mut acc = Rat::zero();
        for (c, exps) in &self.terms {
            let mut term = c.clone();
            for (xi, &e) in x.iter().zip(exps) {
                for _ in 0..e {
                    term *= xi;
                }
            }
            acc += term;
        }
        Ok(acc)
    }

    /// Partial derivative with respect to variable `i`.
    pub fn partial(&self, i: usize) -> MultiPoly {
        let mut terms = Vec::new();
        for (c, exps) in &self.terms {
            let e = exps[i];
            if e == 0 {
                continue;
            }
            let mut ne = exps.clone();
            ne[i] = e - 1;
            terms.push((c * rat_int(e as i64), ne));
        }
        MultiPoly {
            terms,
            vars: self.vars,
        }
    }
}

/// A nondegenerate curve `x -> (x, f_1(x), ..., f_m(x))` over a rational box.
#[derive(Clone, Debug)]
pub struct Curve {
    pub d: usize,
    pub fs: Vec<MultiPoly>,
    pub domain: Rect,
    /// Uniform bound on first and second partials over the domain.
    pub m_bound: Rat,
    /// Nondegeneracy order l; enters only reported exponents.
    pub l_order: u32,
}

impl Curve {
    pub fn new(d: usize, fs: Vec<MultiPoly>, domain: Rect, m_bound: Rat, l_order: u32) -> Result<Self> {
        if fs.is_empty() || fs.iter().any(|f| f.vars() != d) || domain.dim() != d {
            return Err(Error::DimensionMismatch("curve definition".into()));
        }
        Ok(Curve {
            d,
            fs,
            domain,
            m_bound,
            l_order,
        })
    }

    /// The parabola `(x, x^2)` on `[-1, 1]`, with derivative bound 2 and
    /// nondegeneracy order 2.
    pub fn parabola() -> Self {
        Curve {
            d: 1,
            fs: vec![MultiPoly::monomial(Rat::one(), 2)],
            domain: Rect::centered(&[Rat::zero()], &[rat_int(1)]).expect("unit box"),
            m_bound: rat_int(2),
            l_order: 2,
        }
    }

    pub fn m(&self) -> usize {
        self.fs.len()
    }

    pub fn n(&self) -> usize {
        self.d + self.fs.len()
    }

    /// Evaluates values and the Jacobian at a domain point.
    pub fn frame_at(&self, x: &[Rat]) -> Result<CurveFrame> {
        let f_values: Vec<Rat> = self
            .fs
            .iter()
            .map(|f| f.eval(x))
            .collect::<Result<_>>()?;
        let jacobian: Vec<Vec<Rat>> = self
            .fs
            .iter()
            .map(|f| (0..self.d).map(|j| f.partial(j).eval(x)).collect::<Result<_>>())
            .collect::<Result<_>>()?;
        CurveFrame::new(x.to_vec(), f_values, jacobian)
    }

    /// Curve point `(x, f(x))` in R^n.
    pub fn point_at(&self, x: &[Rat]) -> Result<Vec<Rat>> {
        let mut out = x.to_vec();
        for f in &self.fs {
            out.push(f.eval(x)?);
        }
        Ok(out)
    }

    /// Verifies the derivative bound `|df|, |d2f| <= M` on sampled points.
    pub fn validate_derivative_bound(&self, samples: usize, seed: u64) -> Result<()> {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        for _ in 0..samples {
            let x = random_point_in(&self.domain, &mut rng);
            for f in &self.fs {
                for i in 0..self.d {
                    let fi = f.partial(i);
                    if fi.eval(&x)?.abs() > self.m_bound {
                        return Err(Error::PreconditionViolated(
                            "first derivative exceeds the declared bound".into(),
                        ));
                    }
                    for j in 0..self.d {
                        if fi.partial(j).eval(&x)?.abs() > self.m_bound {
                            return Err(Error::PreconditionViolated(
                                "second derivative exceeds the declared bound".into(),
                            ));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Uniform random dyadic point in a rectangle (resolution 2^-32).
fn random_point_in(rect: &Rect, rng: &mut ChaCha20Rng) -> Vec<Rat> {
    let den: i64 = 1 << 32;
    (0..rect.dim())
        .map(|i| {
            let t = rat(rng.gen_range(0..=den), den);
            &rect.lo()[i] + t * rect.side(i)
        })
        .collect()
}

/// The E-set weight condition: the first d sorted weights are all equal to
/// the maximum.
pub fn check_weight_condition(w: &Weight, d: usize) -> Result<()> {
    let mut sorted: Vec<Rat> = w.entries().to_vec();
    sorted.sort_by(|a, b| b.cmp(a));
    let max = sorted[0].clone();
    if sorted.iter().take(d).any(|v| *v != max) {
        return Err(Error::PreconditionViolated(
            "weight condition requires w_1 = ... = w_d = max w_i".into(),
        ));
    }
    Ok(())
}

/// Membership in the exceptional set: `lambda_1(g*_{c,k} g*_t u_1(x)* Z^{n+1}) < c`,
/// decided with certified interval comparisons at widening precision.
pub fn in_e(curve: &Curve, x: &[Rat], t: &Rat, k: u64, c: &Rat) -> Result<bool> {
    let frame = curve.frame_at(x)?;
    with_widening(|prec| {
        let flow = EFlow::new(curve, t, k, c, prec)?;
        flow.contains(&frame)
    })
}

/// The x-independent part of the E-set test: `g*_{c,k} g*_t`, precomputed
/// once per (c, k, t) so membership scans pay only the per-point product.
pub struct EFlow {
    product: crate::mat::Mat,
    product_f: Vec<Vec<f64>>,
    c: Rat,
    c_f: f64,
}

impl EFlow {
    pub fn new(curve: &Curve, t: &Rat, k: u64, c: &Rat, prec: u32) -> Result<Self> {
        let n = curve.n();
        let g_ck = dual_star(&make_g_ck(c, k, curve.d, curve.m(), prec)?)?;
        let g_t = dual_star(&make_g_t(t, &uniform_stub_weight(n)?, prec)?)?;
        let product = g_ck.mul(&g_t)?;
        let nn = product.rows();
        let product_f = (0..nn)
            .map(|r| (0..nn).map(|cc| product.get(r, cc).to_f64()).collect())
            .collect();
        Ok(EFlow {
            product,
            product_f,
            c: c.clone(),
            c_f: crate::interval::rat_to_f64(c),
        })
    }

    /// `Some(in_E)` when decidable at this precision, `None` to widen.
    pub fn contains(&self, frame: &CurveFrame) -> Result<Option<bool>> {
        let u1s = make_u1_star(frame);
        let nn = self.product_f.len();
        // f64 product for the prescreen; only definite answers well away
        // from the threshold are accepted.
        let u1s_f: Vec<Vec<f64>> = (0..nn)
            .map(|r| (0..nn).map(|c| u1s.get(r, c).to_f64()).collect())
            .collect();
        let mut prod_f = vec![vec![0.0; nn]; nn];
        for r in 0..nn {
            for c in 0..nn {
                prod_f[r][c] = (0..nn).map(|m| self.product_f[r][m] * u1s_f[m][c]).sum();
            }
        }
        if let Some(in_k) = crate::strategy::f64_in_k_eps_raw(prod_f, self.c_f) {
            return Ok(Some(!in_k));
        }
        let basis = LatticeBasis::new(self.product.mul(&u1s)?)?;
        match in_k_eps(&basis, &self.c)? {
            Some(in_k) => Ok(Some(!in_k)), // in E iff lambda_1 < c iff not in K_c
            None => Ok(None),
        }
    }
}

/// `in_e` is defined for a fixed ambient weight; the flow direction here uses
/// the uniform weight on n coordinates (the E-set runs require the first d
/// weights to be maximal, and the uniform choice satisfies that).
fn uniform_stub_weight(n: usize) -> Result<Weight> {
    Weight::new(vec![rat(1, n as i64); n])
}

/// Independent oracle for `in_e`: certified first minimum via the
/// successive-minima machinery rather than the K_eps decision procedure.
pub fn in_e_oracle(curve: &Curve, x: &[Rat], t: &Rat, k: u64, c: &Rat) -> Result<Option<bool>> {
    let frame = curve.frame_at(x)?;
    let n = curve.n();
    let prec = PREC_START;
    let g_ck = dual_star(&make_g_ck(c, k, curve.d, curve.m(), prec)?)?;
    let g_t = dual_star(&make_g_t(t, &uniform_stub_weight(n)?, prec)?)?;
    let u1s = make_u1_star(&frame);
    let basis = LatticeBasis::new(g_ck.mul(&g_t)?.mul(&u1s)?)?;
    let minima = successive_minima(&basis)?;
    let lam1 = &minima.lambda[0];
    if lam1.hi() < c {
        Ok(Some(true))
    } else if lam1.lo() >= c {
        Ok(Some(false))
    } else {
        Ok(None)
    }
}

/// Monte Carlo estimate of the E-set fraction over the curve's domain box.
#[derive(Clone, Debug, Serialize)]
pub struct EMeasureEstimate {
    pub fraction: f64,
    /// 95% normal-approximation half-width.
    pub ci_half_width: f64,
    pub samples: usize,
    pub hits: usize,
    pub undecided: usize,
    pub c: String,
    pub k: u64,
    pub t: String,
    /// The lemma's predicted scaling exponent in c: alpha/(d) with
    /// alpha = 1/(d(2l-1)), reported for the slope check.
    pub predicted_c_exponent: f64,
}

pub fn estimate_e_measure(
    curve: &Curve,
    k: u64,
    c: &Rat,
    t: &Rat,
    sample_count: usize,
    seed: u64,
) -> Result<EMeasureEstimate> {
    if sample_count < 100 {
        return Err(Error::PreconditionViolated(
            "estimate_e_measure needs sample_count >= 100".into(),
        ));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut hits = 0usize;
    let mut undecided = 0usize;
    let flow = EFlow::new(curve, t, k, c, PREC_START)?;
    for _ in 0..sample_count {
        let x = random_point_in(&curve.domain, &mut rng);
        let frame = curve.frame_at(&x)?;
        match flow.contains(&frame)? {
            Some(true) => hits += 1,
            Some(false) => {}
            // Fall back to the widening path before giving up on a point.
            None => match in_e(curve, &x, t, k, c) {
                Ok(true) => hits += 1,
                Ok(false) => {}
                Err(Error::PrecisionExhausted(_)) => undecided += 1,
                Err(e) => return Err(e),
            },
        }
    }
    let n = sample_count as f64;
    let p = hits as f64 / n;
    let alpha = 1.0 / (curve.d as f64 * (2.0 * curve.l_order as f64 - 1.0));
    Ok(EMeasureEstimate {
        fraction: p,
        ci_half_width: 1.96 * (p * (1.0 - p) / n).sqrt(),
        samples: sample_count,
        hits,
        undecided,
        c: format_rat(c),
        k,
        t: format_rat(t),
        predicted_c_exponent: alpha / curve.d as f64,
    })
}

/// One approximation found by the exhaustive search: the denominator, the
/// full numerator vector, and the exact residual margins for both groups.
#[derive(Clone, Debug, Serialize)]
pub struct ApproximationHit {
    pub q: u64,
    pub p: Vec<String>,
    /// `|x_i - (p_i+theta_i)/q|` for i <= d, as exact strings.
    pub group1_residuals: Vec<String>,
    /// `|f_j(y) - (p_{d+j}+theta_{d+j})/q|` at the shifted rational y.
    pub group2_residuals: Vec<String>,
}

/// Exhaustive search for the proposition's approximations:
/// `|x_i - (p_i+theta_i)/q| <= delta1/q^{w_i+1}` and, at the shifted rational
/// `y = ((p+theta)/q)`, `|f_j(y) - (p_{d+j}+theta_{d+j})/q| <= delta2/q^{w_{d+j}+1}`,
/// with `y` required to stay in the curve's domain.
pub fn search_hits(
    curve: &Curve,
    x: &[Rat],
    theta: &[Rat],
    w: &Weight,
    delta1: &Rat,
    delta2: &Rat,
    q_max: u64,
) -> Result<Vec<ApproximationHit>> {
    search_hits_impl(curve, x, theta, w, delta1, delta2, q_max, true)
}

/// Same search, but optionally accepting witnesses whose shifted rational
/// falls outside the curve's domain (the polynomials extend globally; the
/// sandwich's outer set must not lose witnesses near the boundary).
#[allow(clippy::too_many_arguments)]
fn search_hits_impl(
    curve: &Curve,
    x: &[Rat],
    theta: &[Rat],
    w: &Weight,
    delta1: &Rat,
    delta2: &Rat,
    q_max: u64,
    require_domain: bool,
) -> Result<Vec<ApproximationHit>> {
    let d = curve.d;
    let n = curve.n();
    if x.len() != d || theta.len() != n || w.dim() != n {
        return Err(Error::DimensionMismatch("search_hits inputs".into()));
    }
    if !delta1.is_positive() || !delta2.is_positive() {
        return Err(Error::PreconditionViolated("deltas must be positive".into()));
    }
    let mut hits = Vec::new();
    'q: for q in 1..=q_max {
        let qr = rat_int(q as i64);
        let mut p = Vec::with_capacity(n);
        let mut y = Vec::with_capacity(d);
        let mut g1 = Vec::with_capacity(d);
        for i in 0..d {
            let target = &qr * &x[i] - &theta[i];
            let pi = (&target + rat(1, 2)).floor().to_integer();
            let yi = (Rat::from_integer(pi.clone()) + &theta[i]) / &qr;
            let diff = (&x[i] - &yi).abs();
            // diff <= delta1 / q^{w_i+1}  <=>  q^{w_i+1} <= delta1/diff.
            if !diff.is_zero() {
                let e = w.get(i) + Rat::one();
                if cmp_pow_rat(&qr, &e, &(delta1 / &diff))? == std::cmp::Ordering::Greater {
                    continue 'q;
                }
            }
            p.push(pi);
            y.push(yi);
            g1.push(diff);
        }
        if require_domain && !curve.domain.contains_point(&y) {
            continue;
        }
        let mut g2 = Vec::with_capacity(curve.m());
        for (j, f) in curve.fs.iter().enumerate() {
            let fy = f.eval(&y)?;
            let target = &qr * &fy - &theta[d + j];
            let pj = (&target + rat(1, 2)).floor().to_integer();
            let diff = (&fy - (Rat::from_integer(pj.clone()) + &theta[d + j]) / &qr).abs();
            if !diff.is_zero() {
                let e = w.get(d + j) + Rat::one();
                if cmp_pow_rat(&qr, &e, &(delta2 / &diff))? == std::cmp::Ordering::Greater {
                    continue 'q;
                }
            }
            p.push(pj);
            g2.push(diff);
        }
        hits.push(ApproximationHit {
            q,
            p: p.iter().map(|v| v.to_string()).collect(),
            group1_residuals: g1.iter().map(format_rat).collect(),
            group2_residuals: g2.iter().map(format_rat).collect(),
        });
    }
    Ok(hits)
}

/// Deepest nested set with a witness at resolution `q_max`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SandwichVerdict {
    Inner,
    Middle,
    Outer,
    None,
}

/// The nesting constant `C = max{2(Mm+1)+1, Md(1+d)+1}`.
pub fn nesting_constant(curve: &Curve) -> Rat {
    let m = rat_int(curve.m() as i64);
    let d = rat_int(curve.d as i64);
    let a = rat_int(2) * (&curve.m_bound * &m + Rat::one()) + Rat::one();
    let b = &curve.m_bound * &d * (Rat::one() + &d) + Rat::one();
    a.max(b)
}

/// Does some `(p, q)` with this exact q witness `f(x) in W_delta`:
/// `|q F_i - p_i - theta_i| < (delta/q)^{w_i}` for every coordinate of the
/// curve point F = (x, f(x)).
fn middle_hit(
    point: &[Rat],
    theta: &[Rat],
    w: &Weight,
    delta: &Rat,
    q: u64,
) -> Result<bool> {
    let qr = rat_int(q as i64);
    let ratio = delta / &qr;
    for (i, (fi, ti)) in point.iter().zip(theta).enumerate() {
        let dist = dist_to_z(&(&qr * fi - ti));
        // need dist < ratio^{w_i}  <=>  ratio^{w_i} > dist.
        if dist.is_zero() {
            continue;
        }
        if cmp_pow_rat(&ratio, &w.get(i), &dist)? != std::cmp::Ordering::Greater {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Checks the sandwich `S(delta/C) subset f^{-1} W_delta subset S(C delta)`
/// instance-by-instance over `q <= q_max`, returning the deepest set hit.
pub fn sandwich_check(
    curve: &Curve,
    x: &[Rat],
    theta: &[Rat],
    w: &Weight,
    delta: &Rat,
    q_max: u64,
) -> Result<SandwichVerdict> {
    let c = nesting_constant(curve);
    let inner_d = delta / &c;
    let outer_d = delta * &c;
    let point = curve.point_at(x)?;
    let inner = search_hits(curve, x, theta, w, &inner_d, &inner_d, q_max)?;
    let outer = search_hits_impl(curve, x, theta, w, &outer_d, &outer_d, q_max, false)?;
    let mut middle_any = false;
    for q in 1..=q_max {
        let mid = middle_hit(&point, theta, w, delta, q)?;
        middle_any |= mid;
        let inner_q = inner.iter().any(|h| h.q == q);
        let outer_q = outer.iter().any(|h| h.q == q);
        if inner_q && !mid {
            return Err(Error::SandwichViolated(q as i64));
        }
        if mid && !outer_q {
            return Err(Error::SandwichViolated(q as i64));
        }
    }
    Ok(if !inner.is_empty() {
        SandwichVerdict::Inner
    } else if middle_any {
        SandwichVerdict::Middle
    } else if !outer.is_empty() {
        SandwichVerdict::Outer
    } else {
        SandwichVerdict::None
    })
}

/// Exponent of `t` in fiber coordinate `j` (1-based): `1 + s^d` for j = 1,
/// `s^{j-1} + s^d` for j >= 2.
fn fiber_exponent(s: u64, d: u32, j: u32) -> Result<u64> {
    let sd = s
        .checked_pow(d)
        .ok_or_else(|| Error::PreconditionViolated("fiber exponent overflow".into()))?;
    let lead = if j == 1 {
        1
    } else {
        s.checked_pow(j - 1)
            .ok_or_else(|| Error::PreconditionViolated("fiber exponent overflow".into()))?
    };
    lead.checked_add(sd)
        .ok_or_else(|| Error::PreconditionViolated("fiber exponent overflow".into()))
}

/// `phi(t, u) = (t^{1+s^d}, u_2 t^{s+s^d}, ..., u_d t^{s^{d-1}+s^d})`.
pub fn fiber_map(t: &Rat, u: &[Rat], s: u64, d: u32) -> Result<Vec<Rat>> {
    if u.len() + 1 != d as usize {
        return Err(Error::DimensionMismatch("fiber map needs d-1 auxiliary coordinates".into()));
    }
    if t.is_zero() {
        return Err(Error::ZeroFiberCoordinate);
    }
    let mut out = Vec::with_capacity(d as usize);
    out.push(rat_pow_u(t, fiber_exponent(s, d, 1)?));
    for (idx, uj) in u.iter().enumerate() {
        let e = fiber_exponent(s, d, idx as u32 + 2)?;
        out.push(uj * rat_pow_u(t, e));
    }
    Ok(out)
}

fn rat_pow_u(x: &Rat, e: u64) -> Rat {
    let mut acc = Rat::one();
    let mut base = x.clone();
    let mut e = e;
    while e > 0 {
        if e & 1 == 1 {
            acc *= &base;
        }
        base = &base * &base;
        e >>= 1;
    }
    acc
}

/// Exact n-th root of a rational, if one exists (sign handled for odd n).
fn exact_nth_root(x: &Rat, n: u64) -> Option<Rat> {
    if n == 0 {
        return None;
    }
    if x.is_negative() {
        if n % 2 == 0 {
            return None;
        }
        return exact_nth_root(&-x.clone(), n).map(|r| -r);
    }
    let num = x.numer().nth_root(n as u32);
    let den = x.denom().nth_root(n as u32);
    let cand = Rat::new(num, den);
    if &rat_pow_u(&cand, n) == x {
        Some(cand)
    } else {
        None
    }
}

/// Exact inverse of the fiber map on `B* = {x : x_1 ... x_d != 0}`.
pub fn fiber_inverse(x: &[Rat], s: u64, d: u32) -> Result<(Rat, Vec<Rat>)> {
    if x.len() != d as usize {
        return Err(Error::DimensionMismatch("fiber inverse arity".into()));
    }
    if x.iter().any(|v| v.is_zero()) {
        return Err(Error::ZeroFiberCoordinate);
    }
    let e1 = fiber_exponent(s, d, 1)?;
    let t = exact_nth_root(&x[0], e1)
        .ok_or_else(|| Error::InexactRoot(format!("{} has no exact {}-th root", format_rat(&x[0]), e1)))?;
    if t.is_zero() {
        return Err(Error::ZeroFiberCoordinate);
    }
    let mut u = Vec::with_capacity(d as usize - 1);
    for j in 2..=d {
        let e = fiber_exponent(s, d, j)?;
        u.push(&x[j as usize - 1] / rat_pow_u(&t, e));
    }
    Ok((t, u))
}
