//! Alice's side of the potential game: the constants ledger, rational shells,
//! dangerous rectangles (function-theta and frozen-theta forms), homogeneous
//! lattice-test removals, the inhomogeneous cover, and the move policy.
//!
//! All ledger constants that are irrational in closed form (q, xi, c) are
//! stored as dyadic rational lower bounds; rounding down only shrinks the
//! removal sets, so every emitted move stays legal, and the rounding is
//! recorded in the ledger notes.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{cmp_pow, cmp_pow_rat, Ball, Rect};
use crate::dynamics::{make_a, make_d, make_u, FlowParams3};
use crate::error::{Error, Result};
use crate::game::{AliceMove, GameState};
use crate::interval::{
    exp_enclosure, format_rat, ln_enclosure, rat, rat_int, rat_pow_i64, rational_pow, round_down,
    round_up, Interval, Rat,
};
use crate::lattice::{in_k_eps, LatticeBasis};
use crate::measures::{Support, SupportConstants};

/// Cap on the number of denominators materialized per shell.
const SHELL_BUDGET: u64 = 200_000;
/// Cap on the search for the index `i_0`.
const I0_CAP: u64 = 100_000;

/// Per-coordinate cap on removal-net density. The grid pitch the covering
/// lemma asks for grows like `beta^{-(i+1)}` points per coordinate, which is
/// infeasible at depth; coarsening the net only shrinks the posted removal
/// set, which stays legal, and is always logged as an event.
fn net_cap(d: usize) -> usize {
    match d {
        1 => 4096,
        2 => 32,
        _ => 16,
    }
}

/// Caps a grid level so the per-coordinate point count over a window of the
/// given width stays near `cap` before the grid is materialized. The coarser
/// grid is a subset of the finer one (digits are prefixes), so this is the
/// same legal coarsening as `subsample`, applied pre-allocation.
fn capped_level(support: &Support, level: u32, width: &Rat, cap: usize) -> (u32, bool) {
    // A window of width w pins down the first m ~ log_base(1/w) digits, so a
    // level-l grid has about k^(l-m) points inside it (k branching digits per
    // level; k = base for the uniform cube grid). Cap the level at m + e with
    // k^e <= cap. The uniform-density estimate w * k^l undercounts badly for
    // sparse digit sets, whose points cluster inside few cylinders.
    let base = rat_int(support.grid_base().max(2));
    let branch = match support.digits() {
        Some(ds) => ds.k().max(2),
        None => support.grid_base().max(2),
    };
    let mut m: u32 = 0;
    let mut scale = Rat::one();
    while &scale > width && m < level {
        scale /= &base;
        m += 1;
    }
    let mut e: u32 = 0;
    let mut count: i64 = 1;
    while count.saturating_mul(branch) <= cap as i64 {
        count *= branch;
        e += 1;
    }
    let l = level.min(m + e);
    (l, l < level)
}

/// Evenly subsamples `coords` down to `cap` entries; true when coarsened.
fn subsample(coords: Vec<Rat>, cap: usize) -> (Vec<Rat>, bool) {
    if coords.len() <= cap {
        (coords, false)
    } else {
        let step = coords.len().div_ceil(cap);
        (coords.into_iter().step_by(step).collect(), true)
    }
}

/// Floating-point prescreen of the `K_eps` membership test on a ready-made
/// f64 matrix (rows are basis coordinates).
/// `Some(true)`: clearly inside (no short vector), `Some(false)`: clearly
/// escapes, `None`: near the boundary or enumeration too large — the caller
/// must fall back to the certified test.
pub(crate) fn f64_in_k_eps_raw(mut a: Vec<Vec<f64>>, eps: f64) -> Option<bool> {
    let n = a.len();
    reduce_columns_f64(&mut a);
    let a = a;
    let inv = f64_inverse(&a)?;
    // Shortest column is an upper bound on the first minimum.
    let mut len2 = f64::INFINITY;
    for j in 0..n {
        let c2: f64 = (0..n).map(|i| a[i][j] * a[i][j]).sum();
        len2 = len2.min(c2);
    }
    let escape2 = (0.8 * eps) * (0.8 * eps);
    if len2 < escape2 {
        return Some(false);
    }
    // Lower bound without enumeration: |Az| >= |z| / ||A^{-1}||_op and the
    // operator norm is at most the Frobenius norm.
    let frob2: f64 = inv.iter().flatten().map(|v| v * v).sum();
    if frob2 > 0.0 && 1.0 / frob2.sqrt() > 1.25 * eps {
        return Some(true);
    }
    let mut bounds = Vec::with_capacity(n);
    let mut total = 1usize;
    for row in &inv {
        let r2: f64 = row.iter().map(|v| v * v).sum();
        let b = (r2 * len2).sqrt().floor() as i64 + 1;
        let b = b.clamp(1, 1_000_000);
        total = total.saturating_mul(2 * b as usize + 1);
        bounds.push(b);
    }
    if total > 200_000 {
        return None;
    }
    let mut best = f64::INFINITY;
    let mut z: Vec<i64> = bounds.iter().map(|b| -b).collect();
    loop {
        if z.iter().any(|&c| c != 0) {
            let mut n2 = 0.0;
            for i in 0..n {
                let mut acc = 0.0;
                for (j, &zj) in z.iter().enumerate() {
                    acc += a[i][j] * zj as f64;
                }
                n2 += acc * acc;
            }
            best = best.min(n2);
            if best < escape2 {
                return Some(false);
            }
        }
        let mut k = 0;
        loop {
            if k == n {
                let min = best.sqrt();
                return if min < 0.8 * eps {
                    Some(false)
                } else if min > 1.25 * eps {
                    Some(true)
                } else {
                    None
                };
            }
            z[k] += 1;
            if z[k] <= bounds[k] {
                break;
            }
            z[k] = -bounds[k];
            k += 1;
        }
    }
}

/// Greedy pairwise (Lagrange-style) column reduction in f64: subtracts
/// rounded projections until stable. Changes the basis, not the lattice.
fn reduce_columns_f64(a: &mut [Vec<f64>]) {
    let n = a.len();
    let dot = |a: &[Vec<f64>], i: usize, j: usize| -> f64 {
        (0..a.len()).map(|r| a[r][i] * a[r][j]).sum()
    };
    for _ in 0..64 {
        let mut changed = false;
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let den = dot(a, j, j);
                if den <= 0.0 {
                    continue;
                }
                let mu = (dot(a, i, j) / den).round();
                if mu != 0.0 && mu.is_finite() {
                    for r in 0..n {
                        a[r][i] -= mu * a[r][j];
                    }
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
}

fn f64_inverse(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut inv: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for col in 0..n {
        let p = (col..n).max_by(|&r, &s| {
            m[r][col].abs().partial_cmp(&m[s][col].abs()).unwrap()
        })?;
        if m[p][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, p);
        inv.swap(col, p);
        let piv = m[col][col];
        for j in 0..n {
            m[col][j] /= piv;
            inv[col][j] /= piv;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = m[r][col];
            if f == 0.0 {
                continue;
            }
            for j in 0..n {
                m[r][j] -= f * m[col][j];
                inv[r][j] -= f * inv[col][j];
            }
        }
    }
    Some(inv)
}

/// Componentwise affine shift: `theta_i(x) = offset_i + slope_i * x`, each
/// coordinate depending only on its own variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Theta {
    offsets: Vec<Rat>,
    slopes: Vec<Rat>,
}

impl Theta {
    pub fn zero(d: usize) -> Self {
        Theta {
            offsets: vec![Rat::zero(); d],
            slopes: vec![Rat::zero(); d],
        }
    }

    pub fn constant(offsets: Vec<Rat>) -> Self {
        let d = offsets.len();
        Theta {
            offsets,
            slopes: vec![Rat::zero(); d],
        }
    }

    pub fn affine(offsets: Vec<Rat>, slopes: Vec<Rat>) -> Result<Self> {
        if offsets.len() != slopes.len() {
            return Err(Error::DimensionMismatch("theta offsets vs slopes".into()));
        }
        Ok(Theta { offsets, slopes })
    }

    pub fn dim(&self) -> usize {
        self.offsets.len()
    }

    pub fn eval(&self, i: usize, x: &Rat) -> Rat {
        &self.offsets[i] + &self.slopes[i] * x
    }

    pub fn slope(&self, i: usize) -> &Rat {
        &self.slopes[i]
    }

    /// The best Lipschitz constant of this map (max slope magnitude).
    pub fn lipschitz(&self) -> Rat {
        self.slopes
            .iter()
            .map(|s| s.abs())
            .max()
            .unwrap_or_else(Rat::zero)
    }
}

/// All constants of the strategy, computed once per (weights, support, flow
/// base, Lipschitz bound) and immutable afterwards.
#[derive(Clone, Debug)]
pub struct ConstantsLedger {
    pub params: FlowParams3,
    pub support: SupportConstants,
    /// Positive Lipschitz bound for theta (any upper bound works).
    pub m_lip: Rat,
    /// Exact: `beta = b^{-(1+w_1)}` must be rational.
    pub beta: Rat,
    pub s: u64,
    pub eta: Rat,
    pub i0: u64,
    /// Dyadic lower bound of the exact `q`.
    pub q: Rat,
    /// Dyadic lower bound of `beta^{eta + s/(1+w_1) + (d+1-t)/(d+1)}`, capped.
    pub xi: Rat,
    pub lambda1: u64,
    /// Exact: `k_1 = (xi/(d+1)) b^{-lambda_1}`.
    pub k1: Rat,
    /// Dyadic lower bound of `k_1^{1+w_1} beta^4 / (200 d)`.
    pub c: Rat,
    /// Human-readable notes about rounding decisions.
    pub notes: Vec<String>,
}

/// Ceiling of a positive rational as u64.
fn ceil_u64(x: &Rat) -> Result<u64> {
    x.ceil()
        .to_integer()
        .to_u64()
        .ok_or_else(|| Error::PreconditionViolated("ceiling out of range".into()))
}

/// Enclosure of `exp` over an interval exponent, endpoints pre-rounded.
fn exp_iv(e: &Interval, prec: u32) -> Interval {
    let lo = exp_enclosure(&round_down(e.lo(), prec), prec);
    let hi = exp_enclosure(&round_up(e.hi(), prec), prec);
    Interval::new(lo.lo().clone(), hi.hi().clone())
}

/// Enclosure of `ln` over a positive interval.
fn ln_iv(x: &Interval, prec: u32) -> Result<Interval> {
    let lo = ln_enclosure(&round_down(x.lo(), prec), prec)?;
    let hi = ln_enclosure(&round_up(x.hi(), prec), prec)?;
    Ok(Interval::new(lo.lo().clone(), hi.hi().clone()))
}

/// `base^e` for rational base > 0 and interval exponent.
fn pow_iv(base: &Rat, e: &Interval, prec: u32) -> Result<Interval> {
    let lnb = ln_enclosure(base, prec)?;
    Ok(exp_iv(&e.mul(&lnb), prec))
}

impl ConstantsLedger {
    /// Populates the ledger from the weight flow, the support's regularity
    /// constants, and a positive Lipschitz bound for theta.
    pub fn compute(
        params: FlowParams3,
        support: SupportConstants,
        m_lip: Rat,
        prec: u32,
    ) -> Result<Self> {
        if !m_lip.is_positive() {
            return Err(Error::Config(
                "the ledger needs a positive Lipschitz bound (any upper bound works)".into(),
            ));
        }
        let d = params.d();
        let t = params.t();
        let sorted = params.sorted().clone();
        let w1 = sorted.max().clone();
        let wd = sorted.min().clone();
        let one_w1 = Rat::one() + &w1;

        // beta must come out exactly rational from the chosen base b.
        let beta_enc = params.beta(prec)?;
        let beta = beta_enc
            .as_rat()
            .cloned()
            .ok_or_else(|| {
                Error::Config("choose the flow base b so that b^(1+w_1) is rational".into())
            })?;
        let r0_cap = support.r0.clone().min((Rat::one() + &m_lip).recip());
        if beta >= r0_cap {
            return Err(Error::BetaTooLarge(format!(
                "beta = {} must be below min(r0, 1/(1+Lip)) = {}",
                format_rat(&beta),
                format_rat(&r0_cap)
            )));
        }

        // s = max{5, ceil((1+w1)/(w1-w_{t+1})), ceil((2(1+w1)+1)/w1)}.
        let wt1 = sorted.get(t + 1);
        let s_a = ceil_u64(&(&one_w1 / (&w1 - &wt1)))?;
        let s_b = ceil_u64(&((rat_int(2) * &one_w1 + Rat::one()) / &w1))?;
        let s = 5u64.max(s_a).max(s_b);

        // eta = min of the three displayed rationals; positive by choice of s.
        let s_rat = rat_int(s as i64);
        let denom = rat_int(2 * d as i64) * &one_w1;
        let eta = rat(1, 4 * (d as i64 + 1))
            .min(&wd * &s_rat / &denom)
            .min((&w1 * &s_rat - rat_int(2) * &one_w1) / &denom);
        if !eta.is_positive() {
            return Err(Error::LedgerInconsistent("eta must be positive".into()));
        }

        // i_0: smallest index with beta^{(i+1)/2} <= (A^2 D 6^{2delta+alpha})^{-1/delta}
        // certified, and s-1 not dividing i.
        let two_delta = rat_int(2) * &support.delta;
        let expo = support.alpha.add(&Interval::point(two_delta.clone()));
        let pow6 = pow_iv(&rat_int(6), &expo, prec)?;
        let a2d = &support.big_a * &support.big_a * &support.big_d;
        let base = pow6.scale(&a2d);
        let neg_inv_delta = -support.delta.recip();
        let rhs = exp_iv(&ln_iv(&base, prec)?.scale(&neg_inv_delta), prec);
        let mut i0 = None;
        for i in 1..=I0_CAP {
            let lhs = params.beta_pow(&rat(i as i64 + 1, 2), prec)?;
            if lhs.hi() <= rhs.lo() && i % (s - 1) != 0 {
                i0 = Some(i);
                break;
            }
        }
        let i0 = i0.ok_or_else(|| Error::LedgerInconsistent("no admissible i_0 found".into()))?;

        // q = beta^{(i_0+1)/2} (A^2 D 2^{2delta+alpha+d} 3^alpha)^{-1/delta}.
        let expo2 = support
            .alpha
            .add(&Interval::point(&two_delta + rat_int(d as i64)));
        let pow2 = pow_iv(&rat_int(2), &expo2, prec)?;
        let pow3 = pow_iv(&rat_int(3), &support.alpha, prec)?;
        let base_q = pow2.mul(&pow3).scale(&a2d);
        let factor = exp_iv(&ln_iv(&base_q, prec)?.scale(&neg_inv_delta), prec);
        let q_enc = params
            .beta_pow(&rat(i0 as i64 + 1, 2), prec)?
            .mul(&factor);
        if q_enc.hi() >= &Rat::one() {
            return Err(Error::LedgerInconsistent("q must be < 1".into()));
        }
        let q = round_down(q_enc.lo(), 96);
        if !q.is_positive() {
            return Err(Error::LedgerInconsistent("q rounded to zero".into()));
        }

        // xi = beta^{eta + s/(1+w1) + (d+1-t)/(d+1)}, capped below (d+1)/(b(1+Lip)).
        let xi_expo =
            &eta + &s_rat / &one_w1 + rat(d as i64 + 1 - t as i64, d as i64 + 1);
        let xi_enc = params.beta_pow(&xi_expo, prec)?;
        let mut xi = round_down(xi_enc.lo(), 96);
        let mut notes = vec![
            "q, xi, c stored as dyadic lower bounds of their closed forms; \
             rounding down only shrinks removal sets"
                .to_string(),
        ];
        let xi_cap = rat_int(d as i64 + 1) / (params.b() * (Rat::one() + &m_lip));
        if xi >= xi_cap {
            xi = &xi_cap * rat(255, 256);
            notes.push("xi capped just below (d+1)/(b(1+Lip))".to_string());
        }
        if !xi.is_positive() {
            return Err(Error::LedgerInconsistent("xi rounded to zero".into()));
        }

        // lambda_1 = ceil((1/w_d) log_b((d+1)/xi)), computed exactly as the
        // smallest integer with b^{lambda w_d} >= (d+1)/xi.
        let target = rat_int(d as i64 + 1) / &xi;
        let wd_n: i64 = (*wd.numer()).clone().try_into().map_err(|_| {
            Error::PreconditionViolated("weight numerator too large".into())
        })?;
        let wd_d: i64 = (*wd.denom()).clone().try_into().map_err(|_| {
            Error::PreconditionViolated("weight denominator too large".into())
        })?;
        let mut lambda1 = 0u64;
        while cmp_pow(params.b(), lambda1 as i64 * wd_n, wd_d, &target)?
            == std::cmp::Ordering::Less
        {
            lambda1 += 1;
            if lambda1 > 10_000 {
                return Err(Error::LedgerInconsistent("lambda_1 search diverged".into()));
            }
        }

        // k_1 exact, c as a dyadic lower bound.
        let k1 = &xi / rat_int(d as i64 + 1) * rat_pow_i64(params.b(), -(lambda1 as i64));
        let k1_pow = rational_pow(&k1, &one_w1, prec)?;
        let c_enc = k1_pow.scale(&(rat_pow_i64(&beta, 4) / rat_int(200 * d as i64)));
        let c = round_down(c_enc.lo(), 96);
        if !c.is_positive() {
            return Err(Error::LedgerInconsistent("c rounded to zero".into()));
        }
        let beta3 = rat_pow_i64(&beta, 3);
        if c_enc.hi() >= &beta3 {
            return Err(Error::LedgerInconsistent("c < beta^3 fails".into()));
        }

        let ledger = ConstantsLedger {
            params,
            support,
            m_lip,
            beta,
            s,
            eta,
            i0,
            q,
            xi,
            lambda1,
            k1,
            c,
            notes,
        };
        ledger.verify()?;
        Ok(ledger)
    }

    /// Re-verifies every derived inequality; failure is a bug, not user error.
    pub fn verify(&self) -> Result<()> {
        let d = self.params.d();
        let one_w1 = Rat::one() + self.params.sorted().max();
        // k_1^{1+w_1} < beta^{lambda_1}, exactly.
        let blam = rat_pow_i64(&self.beta, self.lambda1 as i64);
        if cmp_pow_rat(&self.k1, &one_w1, &blam)? != std::cmp::Ordering::Less {
            return Err(Error::LedgerInconsistent(
                "k_1^(1+w_1) < beta^lambda_1 fails".into(),
            ));
        }
        // b^{-lambda_1 w_i} < xi/(d+1) for every weight, exactly.
        let bound = &self.xi / rat_int(d as i64 + 1);
        for wi in self.params.sorted().entries() {
            let e = -rat_int(self.lambda1 as i64) * wi;
            if cmp_pow_rat(self.params.b(), &e, &bound)? != std::cmp::Ordering::Less {
                return Err(Error::LedgerInconsistent(
                    "b^(-lambda_1 w_i) < xi/(d+1) fails".into(),
                ));
            }
        }
        // c < beta^3 on the stored value.
        if self.c >= rat_pow_i64(&self.beta, 3) {
            return Err(Error::LedgerInconsistent("stored c < beta^3 fails".into()));
        }
        // Shells below lambda_1 + 1 are empty.
        for n in 0..=(self.lambda1 + 1) {
            if !self.shell_denominators(n)?.is_empty() {
                return Err(Error::LedgerInconsistent(format!(
                    "V_{n} should be empty below lambda_1 + 2"
                )));
            }
        }
        Ok(())
    }

    /// The removal-budget exponent the ledger certifies: `max(0, alpha - delta/2)`,
    /// reported as a rational lower bound with a tiny denominator.
    pub fn game_gamma(&self) -> Rat {
        let raw = self.support.alpha.lo() - &self.support.delta / rat_int(2);
        if !raw.is_positive() {
            return Rat::zero();
        }
        (raw * rat_int(64)).floor() / rat_int(64)
    }

    /// Denominators m admitted into the shell `V_n`:
    /// `c r0^{-1} beta^{-(n+1)} <= m^{1+w_1} < c r0^{-1} beta^{-(n+2)}` and
    /// `m >= 3 c^{-1} beta^{-1} r0^{-1}`, decided exactly.
    pub fn shell_denominators(&self, n: u64) -> Result<Vec<BigInt>> {
        let one_w1 = Rat::one() + self.params.sorted().max();
        let p: i64 = (*one_w1.numer()).clone().try_into().map_err(|_| {
            Error::PreconditionViolated("weight numerator too large".into())
        })?;
        let qd: i64 = (*one_w1.denom()).clone().try_into().map_err(|_| {
            Error::PreconditionViolated("weight denominator too large".into())
        })?;
        let scale = &self.c / &self.support.r0;
        let lower = &scale * rat_pow_i64(&self.beta, -(n as i64 + 1));
        let upper = &scale * rat_pow_i64(&self.beta, -(n as i64 + 2));
        // m^{p/qd} >= L  <=>  m^p >= L^qd.
        let lower_q = rat_pow_i64(&lower, qd);
        let upper_q = rat_pow_i64(&upper, qd);
        let pow_ge = |m: &BigInt, bound: &Rat| -> bool {
            let mp = Rat::from_integer(m.pow(p as u32));
            &mp >= bound
        };
        // Smallest m with m^p >= lower_q, by doubling then bisection.
        let mut hi = BigInt::one();
        while !pow_ge(&hi, &lower_q) {
            hi *= 2;
        }
        let mut lo = &hi / 2;
        while &hi - &lo > BigInt::one() {
            let mid = (&lo + &hi) / 2;
            if pow_ge(&mid, &lower_q) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let mut m_min = hi;
        // Floor constraint m >= 3 c^{-1} beta^{-1} r0^{-1}.
        let floor_c = rat_int(3) / (&self.c * &self.beta * &self.support.r0);
        let floor_int = floor_c.ceil().to_integer();
        if m_min < floor_int {
            m_min = floor_int;
        }
        let mut out = Vec::new();
        let mut m = m_min;
        let mut count = 0u64;
        // Collect while m^p < upper_q.
        loop {
            let mp = Rat::from_integer(m.pow(p as u32));
            if mp >= upper_q {
                break;
            }
            out.push(m.clone());
            m += 1;
            count += 1;
            if count > SHELL_BUDGET {
                return Err(Error::SearchBudgetExceeded(count, SHELL_BUDGET));
            }
        }
        Ok(out)
    }
}

/// A dangerous rectangle around `v = p/m` at inflation `k`: the set
/// `{x : |x_i - (p_i + theta_i(x_i))/m| < k q c / m^{1+w_i}}`, solved in
/// closed form for affine theta. `outer`/`inner` bracket the exact set when
/// the half-widths are irrational.
#[derive(Clone, Debug)]
pub struct DangerousRect {
    pub p: Vec<BigInt>,
    pub m: BigInt,
    pub outer: Rect,
    pub inner: Rect,
}

/// Half-width enclosures `k q c / m^{1+w_i}` per coordinate.
fn half_widths(
    ledger: &ConstantsLedger,
    m: &BigInt,
    k: i64,
    prec: u32,
) -> Result<Vec<Interval>> {
    let d = ledger.params.d();
    let m_rat = Rat::from_integer(m.clone());
    let kqc = rat_int(k) * &ledger.q * &ledger.c;
    let mut out = Vec::with_capacity(d);
    for i in 0..d {
        let e = Rat::one() + ledger.params.weight().get(i);
        let denom = rational_pow(&m_rat, &e, prec)?;
        out.push(denom.recip()?.scale(&kqc));
    }
    Ok(out)
}

/// Function-theta dangerous rectangle `k Delta_theta(v)` for affine theta.
pub fn dangerous_rect(
    ledger: &ConstantsLedger,
    theta: &Theta,
    p: &[BigInt],
    m: &BigInt,
    k: i64,
    prec: u32,
) -> Result<DangerousRect> {
    let d = ledger.params.d();
    if p.len() != d || theta.dim() != d {
        return Err(Error::DimensionMismatch("dangerous rectangle inputs".into()));
    }
    let widths = half_widths(ledger, m, k, prec)?;
    let m_rat = Rat::from_integer(m.clone());
    let mut lo_out = Vec::with_capacity(d);
    let mut hi_out = Vec::with_capacity(d);
    let mut lo_in = Vec::with_capacity(d);
    let mut hi_in = Vec::with_capacity(d);
    for i in 0..d {
        // |x (1 - a_i/m) - (p_i + o_i)/m| < w, with 1 - a_i/m > 0.
        let scale = Rat::one() - theta.slope(i) / &m_rat;
        if !scale.is_positive() {
            return Err(Error::PreconditionViolated(
                "theta slope too large for this denominator".into(),
            ));
        }
        let center = (Rat::from_integer(p[i].clone()) + &theta.offsets[i]) / &m_rat / &scale;
        let w_out = widths[i].hi() / &scale;
        let w_in = widths[i].lo() / &scale;
        lo_out.push(&center - &w_out);
        hi_out.push(&center + &w_out);
        lo_in.push(&center - &w_in);
        hi_in.push(&center + &w_in);
    }
    Ok(DangerousRect {
        p: p.to_vec(),
        m: m.clone(),
        outer: Rect::new(lo_out, hi_out)?,
        inner: Rect::new(lo_in, hi_in)?,
    })
}

/// Frozen-theta rectangle `k tilde-Delta^{j,n}(v)` inside a cell: theta is
/// evaluated at the cell's anchor, giving an exact rational center.
pub fn frozen_rect(
    ledger: &ConstantsLedger,
    theta: &Theta,
    anchor: &[Rat],
    cell: &Rect,
    p: &[BigInt],
    m: &BigInt,
    k: i64,
    prec: u32,
) -> Result<Option<DangerousRect>> {
    let d = ledger.params.d();
    let widths = half_widths(ledger, m, k, prec)?;
    let m_rat = Rat::from_integer(m.clone());
    let mut lo_out = Vec::with_capacity(d);
    let mut hi_out = Vec::with_capacity(d);
    let mut lo_in = Vec::with_capacity(d);
    let mut hi_in = Vec::with_capacity(d);
    for i in 0..d {
        let center = (Rat::from_integer(p[i].clone()) + theta.eval(i, &anchor[i])) / &m_rat;
        lo_out.push(&center - widths[i].hi());
        hi_out.push(&center + widths[i].hi());
        lo_in.push(&center - widths[i].lo());
        hi_in.push(&center + widths[i].lo());
    }
    let outer = Rect::new(lo_out, hi_out)?;
    let Some(outer) = cell.intersection(&outer) else {
        return Ok(None);
    };
    let inner = Rect::new(lo_in, hi_in)?;
    let inner = match cell.intersection(&inner) {
        Some(r) => r,
        None => outer.clone(),
    };
    Ok(Some(DangerousRect {
        p: p.to_vec(),
        m: m.clone(),
        outer,
        inner,
    }))
}

/// Outcome of the sandwich test `tilde ⊂ 2Delta ⊂ 4 tilde` on one cell.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SandwichVerdict {
    Certified,
    Undecided,
}

/// Checks the sandwich on corners in exact arithmetic: the frozen rectangle
/// sits inside the doubled function-theta rectangle, which sits inside the
/// quadrupled frozen rectangle (all intersected with the cell).
pub fn sandwich_check(
    ledger: &ConstantsLedger,
    theta: &Theta,
    anchor: &[Rat],
    cell: &Rect,
    p: &[BigInt],
    m: &BigInt,
    prec: u32,
) -> Result<SandwichVerdict> {
    let Some(tilde1) = frozen_rect(ledger, theta, anchor, cell, p, m, 1, prec)? else {
        return Ok(SandwichVerdict::Certified);
    };
    let Some(tilde4) = frozen_rect(ledger, theta, anchor, cell, p, m, 4, prec)? else {
        return Err(Error::SandwichViolated(0));
    };
    let delta2 = dangerous_rect(ledger, theta, p, m, 2, prec)?;
    let delta2_cell = match cell.intersection(&delta2.outer) {
        Some(r) => r,
        None => return Err(Error::SandwichViolated(1)),
    };
    let delta2_inner = cell
        .intersection(&delta2.inner)
        .unwrap_or_else(|| delta2_cell.clone());
    // First inclusion, certified with the conservative sides.
    let first_ok = delta2_inner.contains_rect(&tilde1.outer);
    let first_bad = !delta2_cell.contains_rect(&tilde1.inner);
    // Second inclusion.
    let second_ok = tilde4.inner.contains_rect(&delta2_cell);
    let second_bad = !tilde4.outer.contains_rect(&delta2_inner);
    if first_bad {
        return Err(Error::SandwichViolated(1));
    }
    if second_bad {
        return Err(Error::SandwichViolated(2));
    }
    if first_ok && second_ok {
        Ok(SandwichVerdict::Certified)
    } else {
        Ok(SandwichVerdict::Undecided)
    }
}

/// The cell partition of the bounding cube of `B_0` at level n: rectangles of
/// side `r0 c q / (Lip * beta^{-(n+2) w_i/(1+w_1)})` in direction i.
#[derive(Clone, Debug)]
pub struct CellGrid {
    pub lo: Vec<Rat>,
    pub sides: Vec<Rat>,
    pub dim: usize,
}

impl CellGrid {
    pub fn new(ledger: &ConstantsLedger, b0: &Ball, n: u64, prec: u32) -> Result<Self> {
        let d = ledger.params.d();
        let lo: Vec<Rat> = b0.center.iter().map(|c| c - &b0.radius).collect();
        let mut sides = Vec::with_capacity(d);
        let top = &ledger.support.r0 * &ledger.c * &ledger.q / &ledger.m_lip;
        for i in 0..d {
            // beta^{-(n+2) w_i/(1+w_1)} = b^{(n+2) w_i}.
            let e = rat_int(n as i64 + 2) * ledger.params.weight().get(i);
            let denom = ledger.params.b_pow(&e, prec)?;
            // Round the side down (more, smaller cells) to stay conservative.
            let side = round_down(&(&top / denom.hi()), 96);
            if !side.is_positive() {
                return Err(Error::PreconditionViolated("cell side rounded to zero".into()));
            }
            sides.push(side);
        }
        Ok(CellGrid { lo, sides, dim: d })
    }

    /// Index of the cell containing `x` (componentwise floor).
    pub fn index_of(&self, x: &[Rat]) -> Vec<BigInt> {
        (0..self.dim)
            .map(|i| ((&x[i] - &self.lo[i]) / &self.sides[i]).floor().to_integer())
            .collect()
    }

    pub fn cell_rect(&self, j: &[BigInt]) -> Rect {
        let lo: Vec<Rat> = (0..self.dim)
            .map(|i| &self.lo[i] + Rat::from_integer(j[i].clone()) * &self.sides[i])
            .collect();
        let hi: Vec<Rat> = (0..self.dim).map(|i| &lo[i] + &self.sides[i]).collect();
        Rect::new(lo, hi).expect("cell rect well formed")
    }

    /// Anchor = cell center (the canonical choice of the fixed point).
    pub fn anchor(&self, j: &[BigInt]) -> Vec<Rat> {
        let r = self.cell_rect(j);
        r.center()
    }

    /// All cell indices whose cells meet the rectangle.
    pub fn indices_meeting(&self, rect: &Rect) -> Vec<Vec<BigInt>> {
        let mut ranges: Vec<Vec<BigInt>> = Vec::with_capacity(self.dim);
        for i in 0..self.dim {
            let first = ((&rect.lo()[i] - &self.lo[i]) / &self.sides[i])
                .floor()
                .to_integer();
            let last = ((&rect.hi()[i] - &self.lo[i]) / &self.sides[i])
                .floor()
                .to_integer();
            let mut axis = Vec::new();
            let mut v = first;
            while v <= last {
                axis.push(v.clone());
                v += 1;
                if axis.len() > 64 {
                    break;
                }
            }
            ranges.push(axis);
        }
        let mut out: Vec<Vec<BigInt>> = vec![Vec::new()];
        for axis in &ranges {
            let mut next = Vec::with_capacity(out.len() * axis.len());
            for prefix in &out {
                for v in axis {
                    let mut p = prefix.clone();
                    p.push(v.clone());
                    next.push(p);
                }
            }
            out = next;
        }
        out
    }
}

/// A removal computation's output: cover balls plus any experimental events
/// (budget overruns, undecided lattice tests) that were observed.
#[derive(Clone, Debug, Default)]
pub struct RemovalReport {
    pub balls: Vec<Ball>,
    pub events: Vec<String>,
}

/// The homogeneous removal sets: at `n >= 1`, `A_{n+1,i}` is nonempty only
/// for `i = (s-1)l` with `0 < l < (n+1)/s` and removes the points where
/// `d_l a_{n+1+sl} u_x Z^{d+1}` leaves `K_{beta^{eta l}}`; at `n = 0`,
/// `A_{1,i}` unions the pairs `(n', l)` with `l >= (n'+1)/s` and
/// `n' + (s-1)l = i`. Prior removal balls are subtracted (the tilde form).
pub fn homogeneous_removal(
    ledger: &ConstantsLedger,
    support: &Support,
    b_n: &Ball,
    n: u64,
    i: u64,
    prior: &[Ball],
    prec: u32,
) -> Result<RemovalReport> {
    let mut pairs: Vec<(u64, u64)> = Vec::new(); // (n', l) with test at a_{n'+1+sl}
    if n == 0 {
        // l >= (n'+1)/s and n' + (s-1)l = i.
        for l in 1..=(i / (ledger.s - 1)).max(1) {
            if (ledger.s - 1) * l > i {
                break;
            }
            let np = i - (ledger.s - 1) * l;
            if l * ledger.s >= np + 1 {
                pairs.push((np, l));
            }
        }
    } else if i > 0 && i % (ledger.s - 1) == 0 {
        let l = i / (ledger.s - 1);
        if l * ledger.s < n + 1 {
            pairs.push((n, l));
        }
    }
    if pairs.is_empty() {
        return Ok(RemovalReport::default());
    }

    let radius = ledger.beta_pow_int(n + 1 + i) * &ledger.support.r0;
    let pitch = &radius / rat_int(3);
    let level = support.level_for_pitch(&pitch)?;
    let d = ledger.params.d();
    let mut report = RemovalReport::default();
    let cap = net_cap(d);
    let width = &b_n.radius * rat_int(2);
    let (level, level_capped) = capped_level(support, level, &width, cap);
    if level_capped {
        report.events.push(format!(
            "removal net level capped at {level} for (n={n}, i={i})"
        ));
    }
    // Grid coordinates paired with their offset from the center of `b_n` as
    // f64. The exact subtraction happens once per grid coordinate; offsets
    // retain full relative precision at any depth, unlike absolute f64
    // coordinates whose spacing collapses below one ulp of the center.
    let mut per_coord: Vec<Vec<(Rat, f64)>> = Vec::with_capacity(d);
    for k in 0..d {
        let lo = &b_n.center[k] - &b_n.radius;
        let hi = &b_n.center[k] + &b_n.radius;
        let coords = support.grid_coords_in_window(level, &lo, &hi);
        if coords.is_empty() {
            return Ok(report);
        }
        let (coords, coarsened) = subsample(coords, cap);
        if coarsened {
            report.events.push(format!(
                "removal net coarsened to {cap} points per coordinate at (n={n}, i={i})"
            ));
        }
        // `b_n` is a sup-norm box, so containment factorizes: decide it
        // exactly per grid coordinate instead of per product point.
        let kept: Vec<(Rat, f64)> = coords
            .into_iter()
            .filter(|v| (v - &b_n.center[k]).abs() <= b_n.radius)
            .map(|v| {
                let off = crate::interval::rat_to_f64(&(&v - &b_n.center[k]));
                (v, off)
            })
            .collect();
        if kept.is_empty() {
            return Ok(report);
        }
        per_coord.push(kept);
    }
    let mut centers: Vec<(Vec<Rat>, Vec<f64>)> = vec![(Vec::new(), Vec::new())];
    for coords in &per_coord {
        let mut next = Vec::with_capacity(centers.len() * coords.len());
        for (c, o) in &centers {
            for (v, vo) in coords {
                let mut c2 = c.clone();
                c2.push(v.clone());
                let mut o2 = o.clone();
                o2.push(*vo);
                next.push((c2, o2));
            }
        }
        centers = next;
    }
    // Prior removal balls as offsets from the same center. Point-vs-ball
    // tests then run in f64 with relative slack; the exact test only fires
    // on boundary cases. Either f64 verdict is legal when wrong: trusting
    // "inside" skips a removal, trusting "outside" posts a duplicate.
    let prior_f: Vec<(Vec<f64>, f64)> = prior
        .iter()
        .map(|b| {
            let off: Vec<f64> = (0..d)
                .map(|k| crate::interval::rat_to_f64(&(&b.center[k] - &b_n.center[k])))
                .collect();
            (off, crate::interval::rat_to_f64(&b.radius))
        })
        .collect();

    // Precompute per (n', l): the flow matrix product (also as f64 for the
    // prescreen) and the K_eps radius.
    let mut pair_data = Vec::with_capacity(pairs.len());
    for &(np, l) in &pairs {
        let a = make_a(&rat_int((np + 1 + ledger.s * l) as i64), &ledger.params, prec)?;
        let dl = make_d(&rat_int(l as i64), &ledger.params, prec)?;
        let da = dl.mul(&a)?;
        let nn = da.rows();
        let da_f: Vec<Vec<f64>> = (0..nn)
            .map(|r| (0..nn).map(|c| da.get(r, c).to_f64()).collect())
            .collect();
        let eps = round_down(
            ledger
                .params
                .beta_pow(&(rat_int(l as i64) * &ledger.eta), prec)?
                .lo(),
            96,
        );
        let eps_f = crate::interval::rat_to_f64(&eps);
        pair_data.push((da_f, eps_f));
    }

    let mut trusted_removals = 0usize;
    let mut undecided_removals = 0usize;
    'point: for (x, xo) in centers {
        for (bi, (off, r_f)) in prior_f.iter().enumerate() {
            let mut clearly_out = false;
            let mut borderline = false;
            for k in 0..d {
                let df = (xo[k] - off[k]).abs();
                let slack = 1e-12 * (xo[k].abs() + off[k].abs()) + f64::MIN_POSITIVE;
                if df > r_f + slack {
                    clearly_out = true;
                    break;
                }
                if df > (r_f - slack).max(0.0) {
                    borderline = true;
                }
            }
            if clearly_out {
                continue;
            }
            if !borderline || prior[bi].contains_point(&x) {
                continue 'point;
            }
        }
        let x_f: Vec<f64> = x.iter().map(crate::interval::rat_to_f64).collect();
        for (da_f, eps_f) in &pair_data {
            // Cheap prescreen on the f64 product `da u_x` (u_x is the
            // identity with x in row 0, columns 1..). A clear escape posts
            // the removal directly: extra removals only shrink Alice's sets
            // (always legal) and the outcome is certified independently.
            // Only boundary cases build the exact product.
            let nn = da_f.len();
            let prod: Vec<Vec<f64>> = (0..nn)
                .map(|r| {
                    (0..nn)
                        .map(|c| {
                            if c >= 1 {
                                da_f[r][c] + da_f[r][0] * x_f[c - 1]
                            } else {
                                da_f[r][c]
                            }
                        })
                        .collect()
                })
                .collect();
            match f64_in_k_eps_raw(prod, *eps_f) {
                Some(true) => continue,
                Some(false) => {
                    trusted_removals += 1;
                    report.balls.push(Ball::new(x.clone(), radius.clone())?);
                    continue 'point;
                }
                None => {
                    // Near the K_eps boundary at f64 precision. Remove the
                    // point conservatively: extra removals only shrink
                    // Alice's sets (always legal), while the certified test
                    // on these matrix magnitudes is prohibitively slow.
                    undecided_removals += 1;
                    report.balls.push(Ball::new(x.clone(), radius.clone())?);
                    continue 'point;
                }
            }
        }
    }
    if trusted_removals > 0 {
        report.events.push(format!(
            "{trusted_removals} removals posted on float prescreen evidence at (n={n}, i={i})"
        ));
    }
    if undecided_removals > 0 {
        report.events.push(format!(
            "{undecided_removals} near-boundary points removed conservatively at (n={n}, i={i})"
        ));
    }
    Ok(report)
}

impl ConstantsLedger {
    /// Exact `beta^e r0`-free power for integer exponents.
    pub fn beta_pow_int(&self, e: u64) -> Rat {
        rat_pow_i64(&self.beta, e as i64)
    }
}

/// The inhomogeneous removal at level n: enumerate shell elements whose
/// dangerous rectangle meets `B_n` minus prior removals, assert the
/// at-most-one-denominator and at-most-`2^d`-cells properties, verify the
/// sandwich per cell, and cover the surviving set with balls of radius
/// `beta^{n+1+i_0} r0`.
pub fn inhomogeneous_removal(
    ledger: &ConstantsLedger,
    support: &Support,
    theta: &Theta,
    b0: &Ball,
    b_n: &Ball,
    n: u64,
    prior: &[Ball],
    prec: u32,
) -> Result<RemovalReport> {
    if n <= ledger.lambda1 + 1 {
        return Ok(RemovalReport::default());
    }
    let ms = ledger.shell_denominators(n)?;
    if ms.is_empty() {
        return Ok(RemovalReport::default());
    }
    let d = ledger.params.d();
    let b_rect = b_n.to_rect();
    let mut survivors: Vec<DangerousRect> = Vec::new();
    let mut events = Vec::new();
    for m in &ms {
        // p_i range: m x_i - theta_i in roughly [m lo - ..., m hi + ...].
        let m_rat = Rat::from_integer(m.clone());
        let mut p_ranges: Vec<Vec<BigInt>> = Vec::with_capacity(d);
        for i in 0..d {
            let t_lo = theta
                .eval(i, &b_rect.lo()[i])
                .min(theta.eval(i, &b_rect.hi()[i]));
            let t_hi = theta
                .eval(i, &b_rect.lo()[i])
                .max(theta.eval(i, &b_rect.hi()[i]));
            let first = (&m_rat * &b_rect.lo()[i] - t_hi - Rat::one())
                .ceil()
                .to_integer();
            let last = (&m_rat * &b_rect.hi()[i] - t_lo + Rat::one())
                .floor()
                .to_integer();
            let mut axis = Vec::new();
            let mut v = first;
            while v <= last {
                axis.push(v.clone());
                v += 1;
            }
            p_ranges.push(axis);
        }
        let mut ps: Vec<Vec<BigInt>> = vec![Vec::new()];
        for axis in &p_ranges {
            let mut next = Vec::with_capacity(ps.len() * axis.len());
            for prefix in &ps {
                for v in axis {
                    let mut p = prefix.clone();
                    p.push(v.clone());
                    next.push(p);
                }
            }
            ps = next;
        }
        for p in ps {
            let dr = dangerous_rect(ledger, theta, &p, m, 1, prec)?;
            let Some(ix) = b_rect.intersection(&dr.outer) else {
                continue;
            };
            // Needs a support point in the intersection not already removed.
            let ball_of_rect = rect_to_ball(&ix)?;
            let Some(witness) = support.witness_point(&ball_of_rect) else {
                continue;
            };
            if prior.iter().any(|b| b.contains_point(&witness)) {
                continue;
            }
            survivors.push(dr);
        }
    }
    // Proposition-level uniqueness: at most one denominator v survives.
    let distinct: BTreeSet<(Vec<BigInt>, BigInt)> = survivors
        .iter()
        .map(|s| (s.p.clone(), s.m.clone()))
        .collect();
    if distinct.len() > 1 {
        return Err(Error::UniquenessViolated(distinct.len()));
    }
    let Some(v) = survivors.into_iter().next() else {
        return Ok(RemovalReport { balls: Vec::new(), events });
    };

    // Cells meeting the surviving rectangle, capped at 2^d.
    let grid = CellGrid::new(ledger, b0, n, prec)?;
    let target = match b_rect.intersection(&v.outer) {
        Some(r) => r,
        None => return Ok(RemovalReport { balls: Vec::new(), events }),
    };
    let cells = grid.indices_meeting(&target);
    let mut live_cells = Vec::new();
    for j in cells {
        let cell = grid.cell_rect(&j);
        let anchor = grid.anchor(&j);
        let Some(frozen) = frozen_rect(ledger, theta, &anchor, &cell, &v.p, &v.m, 1, prec)? else {
            continue;
        };
        if target.intersection(&frozen.outer).is_none() {
            continue;
        }
        match sandwich_check(ledger, theta, &anchor, &cell, &v.p, &v.m, prec)? {
            SandwichVerdict::Certified => {}
            SandwichVerdict::Undecided => {
                events.push(format!("sandwich undecided at level {n}"));
            }
        }
        live_cells.push(j);
    }
    if live_cells.len() > (1usize << d) {
        return Err(Error::CellBudgetViolated(live_cells.len(), 1usize << d));
    }

    // Cover the surviving intersection by support-grid balls of the removal
    // radius (net pitch radius/3 per the covering construction).
    let radius = ledger.beta_pow_int(n + 1 + ledger.i0) * &ledger.support.r0;
    let pitch = &radius / rat_int(3);
    let level = support.level_for_pitch(&pitch)?;
    let max_width = (0..d).map(|i| target.side(i)).max().unwrap_or_else(Rat::zero);
    let (level, level_capped) = capped_level(support, level, &max_width, net_cap(d));
    if level_capped {
        events.push(format!("inhomogeneous cover net level capped at {level} (n={n})"));
    }
    let mut balls = Vec::new();
    let mut per_coord: Vec<Vec<Rat>> = Vec::with_capacity(d);
    for i in 0..d {
        let coords = support.grid_coords_in_window(level, &target.lo()[i], &target.hi()[i]);
        let (coords, coarsened) = subsample(coords, net_cap(d));
        if coarsened {
            events.push(format!("inhomogeneous cover net coarsened at level {n}"));
        }
        per_coord.push(coords);
    }
    if per_coord.iter().all(|c| !c.is_empty()) {
        let mut centers: Vec<Vec<Rat>> = vec![Vec::new()];
        for coords in &per_coord {
            let mut next = Vec::with_capacity(centers.len() * coords.len());
            for c in &centers {
                for vv in coords {
                    let mut c2 = c.clone();
                    c2.push(vv.clone());
                    next.push(c2);
                }
            }
            centers = next;
        }
        for c in centers {
            balls.push(Ball::new(c, radius.clone())?);
        }
    }
    Ok(RemovalReport { balls, events })
}

fn rect_to_ball(rect: &Rect) -> Result<Ball> {
    let center = rect.center();
    let radius = (0..rect.dim())
        .map(|i| rect.side(i) / rat_int(2))
        .max()
        .unwrap_or_else(Rat::zero);
    Ball::new(center, radius)
}

/// A policy move plus its experimental events.
#[derive(Clone, Debug)]
pub struct PolicyMove {
    pub mv: AliceMove,
    pub events: Vec<String>,
}

/// Alice's dispatch: homogeneous collections at `n = 0` (all admissible i up
/// to the game depth), the inhomogeneous cover at `i = i_0` for `n >= 1`,
/// homogeneous collections at `i = (s-1)l` otherwise, empty elsewhere.
/// Over-budget collections are truncated with an event, never silently.
pub fn alice_policy(
    ledger: &ConstantsLedger,
    support: &Support,
    theta: &Theta,
    state: &GameState,
    prec: u32,
) -> Result<PolicyMove> {
    let n = state.round() as u64;
    let cfg = state.config();
    let b_n = state.current_ball().clone();
    let b0 = cfg.b0.clone();
    let max_i = cfg.max_depth as u64;
    let mut prior: Vec<Ball> = Vec::new();
    for mv in state.alice_moves() {
        for balls in mv.collections.values() {
            prior.extend(balls.iter().cloned());
        }
    }
    let gamma = &cfg.gamma;
    let mut events = Vec::new();
    let mut collections = std::collections::BTreeMap::new();
    for i in 0..=max_i.saturating_sub(n) {
        let mut report = if n >= 1 && i == ledger.i0 {
            inhomogeneous_removal(ledger, support, theta, &b0, &b_n, n, &prior, prec)?
        } else {
            homogeneous_removal(ledger, support, &b_n, n, i, &prior, prec)?
        };
        events.append(&mut report.events);
        if report.balls.is_empty() {
            continue;
        }
        // Budget beta^{-gamma(i+1)}; truncate with an event if exceeded.
        let expo = gamma * rat_int(i as i64 + 1);
        let pn: i64 = (*expo.numer()).clone().try_into().unwrap_or(i64::MAX);
        let pd: i64 = (*expo.denom()).clone().try_into().unwrap_or(1);
        let count = Rat::from_integer((report.balls.len() as u64).into());
        if cmp_pow(&cfg.beta, -pn, pd, &count)? == std::cmp::Ordering::Less {
            // Find the largest admissible count.
            let mut keep = report.balls.len();
            while keep > 0 {
                let kr = Rat::from_integer((keep as u64).into());
                if cmp_pow(&cfg.beta, -pn, pd, &kr)? != std::cmp::Ordering::Less {
                    break;
                }
                keep -= 1;
            }
            events.push(format!(
                "collection (n={n}, i={i}) truncated from {} to {keep} balls (budget)",
                report.balls.len()
            ));
            report.balls.truncate(keep);
        }
        if !report.balls.is_empty() {
            collections.insert(i, report.balls);
        }
    }
    Ok(PolicyMove {
        mv: AliceMove { collections },
        events,
    })
}

/// Exhaustive check that the dual system
/// `|z_0 + sum z_i x_i| <= k_1 / H`, `|z_i| <= H^{w_i}` has no nonzero
/// integer solution; returns the first solution found, if any.
pub fn dual_solution(
    ledger: &ConstantsLedger,
    x: &[Rat],
    h: u64,
) -> Result<Option<Vec<BigInt>>> {
    let d = ledger.params.d();
    if x.len() != d || h == 0 {
        return Err(Error::DimensionMismatch("dual system inputs".into()));
    }
    // |z_i| <= H^{w_i}: largest integer with z^q <= H^p for w_i = p/q.
    let mut bounds = Vec::with_capacity(d);
    for i in 0..d {
        let wi = ledger.params.weight().get(i);
        let p: u32 = (*wi.numer())
            .clone()
            .try_into()
            .map_err(|_| Error::PreconditionViolated("weight too large".into()))?;
        let q: u32 = (*wi.denom())
            .clone()
            .try_into()
            .map_err(|_| Error::PreconditionViolated("weight too large".into()))?;
        let hp = BigInt::from(h).pow(p);
        let bound = hp.nth_root(q);
        bounds.push(bound);
    }
    let tol = &ledger.k1 / rat_int(h as i64);
    let mut z = vec![-bounds[0].clone(); d];
    loop {
        // Determine admissible z_0 range from the linear form.
        let s: Rat = z
            .iter()
            .zip(x)
            .map(|(zi, xi)| Rat::from_integer(zi.clone()) * xi)
            .sum();
        let z0_lo = (-&s - &tol).ceil().to_integer();
        let z0_hi = (-&s + &tol).floor().to_integer();
        let mut z0 = z0_lo;
        while z0 <= z0_hi {
            if !z0.is_zero() || z.iter().any(|v| !v.is_zero()) {
                let lin = (Rat::from_integer(z0.clone()) + &s).abs();
                if lin <= tol {
                    let mut sol = vec![z0];
                    sol.extend(z.iter().cloned());
                    return Ok(Some(sol));
                }
            }
            z0 += 1;
        }
        // Odometer over z_1..z_d.
        let mut k = 0;
        loop {
            if k == d {
                return Ok(None);
            }
            z[k] += 1;
            if z[k] <= bounds[k] {
                break;
            }
            z[k] = -bounds[k].clone();
            k += 1;
        }
    }
}

/// Exhaustive check that the simultaneous system
/// `|m x_i - p_i| < (k_1/d) Q^{-w_i}`, `1 <= m <= Q` has no solution;
/// returns the first `(m, p)` found, if any.
pub fn simul_solution(
    ledger: &ConstantsLedger,
    x: &[Rat],
    q_cap: u64,
) -> Result<Option<(BigInt, Vec<BigInt>)>> {
    let d = ledger.params.d();
    if x.len() != d || q_cap == 0 {
        return Err(Error::DimensionMismatch("simultaneous system inputs".into()));
    }
    let k1d = &ledger.k1 / rat_int(d as i64);
    for m in 1..=q_cap {
        let m_rat = rat_int(m as i64);
        let mut p = Vec::with_capacity(d);
        let mut ok = true;
        for i in 0..d {
            let wi = ledger.params.weight().get(i);
            let target = &m_rat * &x[i];
            let pi = (&target + rat(1, 2)).floor().to_integer();
            let err = (&target - Rat::from_integer(pi.clone())).abs();
            // err < (k_1/d) Q^{-w_i}  <=>  (err d/k_1)^1 < Q^{-w_i}:
            // compare exactly by clearing the rational power of Q.
            let ratio = &err / &k1d;
            if !ratio.is_positive() {
                p.push(pi);
                continue;
            }
            let cmp = cmp_pow_rat(&rat_int(q_cap as i64), &-wi.clone(), &ratio)?;
            if cmp != std::cmp::Ordering::Greater {
                ok = false;
                break;
            }
            p.push(pi);
        }
        if ok {
            return Ok(Some((BigInt::from(m), p)));
        }
    }
    Ok(None)
}

/// Direct membership test `x in D_n`: the truncated orbit
/// `d_1 a_{n'+s} u_x Z^{d+1}` stays in `K_{beta^eta}` for all `n' < n`.
pub fn in_d_n(
    ledger: &ConstantsLedger,
    x: &[Rat],
    n: u64,
    prec: u32,
) -> Result<Option<bool>> {
    let eps = round_down(ledger.params.beta_pow(&ledger.eta, prec)?.lo(), 96);
    for np in 1..n {
        let a = make_a(&rat_int((np + ledger.s) as i64), &ledger.params, prec)?;
        let dl = make_d(&Rat::one(), &ledger.params, prec)?;
        let basis = LatticeBasis::new(dl.mul(&a)?.mul(&make_u(x))?)?;
        match in_k_eps(&basis, &eps)? {
            Some(true) => {}
            other => return Ok(other),
        }
    }
    Ok(Some(true))
}

/// Cross-validation oracle for d = 1: decides `d_l a_y u_x Z^2 in K_eps`
/// exhaustively and exactly. The matrix is `diag(B, C) u_x` with rational
/// B, C, so lattice vectors are `(B(z_0 + x z_1), C z_1)`; for each
/// admissible `|z_1| <= eps/C` the best `z_0` is the nearest integer to
/// `-x z_1`, making the scan complete. Independent of the enumeration
/// machinery under test.
pub fn svp_oracle_d1(
    ledger: &ConstantsLedger,
    x: &Rat,
    y: u64,
    l: u64,
    eps: &Rat,
    prec: u32,
) -> Result<bool> {
    if ledger.params.d() != 1 {
        return Err(Error::PreconditionViolated("oracle is for d = 1 only".into()));
    }
    let a = make_a(&rat_int(y as i64), &ledger.params, prec)?;
    let dl = make_d(&rat_int(l as i64), &ledger.params, prec)?;
    let da = dl.mul(&a)?;
    let rows = da
        .to_rational()
        .ok_or_else(|| Error::PreconditionViolated("oracle needs exact flow entries".into()))?;
    let (b_scale, c_scale) = (rows[0][0].clone(), rows[1][1].clone());
    let eps2 = eps * eps;
    let q_cap = (eps / &c_scale).floor().to_integer();
    let q_cap: u64 = q_cap.max(BigInt::zero()).try_into().unwrap_or(u64::MAX);
    if q_cap > 100_000 {
        return Err(Error::SearchBudgetExceeded(q_cap, 100_000));
    }
    // z_1 = 0 forces |B z_0| with z_0 != 0.
    if &b_scale * &b_scale < eps2 {
        return Ok(false);
    }
    for z1 in 1..=q_cap {
        let z1r = rat_int(z1 as i64);
        let target = x * &z1r;
        let z0 = -(&target + rat(1, 2)).floor();
        let first = &b_scale * (Rat::from_integer(z0.to_integer()) + &target);
        let second = &c_scale * &z1r;
        if &first * &first + &second * &second < eps2 {
            return Ok(false); // a short vector exists: not in K_eps
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::Weight;
    use crate::measures::Support;

    fn cube_ledger_d1() -> ConstantsLedger {
        let params = FlowParams3::new(rat_int(2), Weight::new(vec![rat_int(1)]).unwrap()).unwrap();
        let sc = Support::full_cube(1).unwrap().builtin_constants(128).unwrap();
        ConstantsLedger::compute(params, sc, rat(1, 10), 192).unwrap()
    }

    fn cube_ledger_d2() -> ConstantsLedger {
        let params = FlowParams3::new(
            rat_int(8),
            Weight::new(vec![rat(2, 3), rat(1, 3)]).unwrap(),
        )
        .unwrap();
        let sc = Support::full_cube(2).unwrap().builtin_constants(128).unwrap();
        ConstantsLedger::compute(params, sc, rat(1, 10), 192).unwrap()
    }

    /// Hand ledger with a large `c` so shells become nonempty at small n.
    /// Only the fields the shell/rectangle machinery reads are meaningful.
    fn relaxed_ledger() -> ConstantsLedger {
        let mut led = cube_ledger_d1();
        led.c = rat(1, 2);
        led.q = rat(1, 2);
        // Scale the indices down with c so shells and covers live at
        // desk-sized depths.
        led.lambda1 = 2;
        led.i0 = 2;
        led.notes.push("relaxed test ledger".into());
        led
    }

    #[test]
    fn constants_anchor_d1() {
        let led = cube_ledger_d1();
        assert_eq!(led.s, 5);
        assert_eq!(led.eta, rat(1, 8));
        assert_eq!(led.beta, rat(1, 4));
        assert_eq!(led.i0, 10);
        assert_eq!(led.lambda1, 8);
        assert!(led.q.is_positive() && led.q < Rat::one());
        // xi approx 2^{-25/4}; check bracket.
        assert!(led.xi > rat(1, 128) && led.xi < rat(1, 64));
        assert!(led.c < rat_pow_i64(&led.beta, 3));
        assert_eq!(led.game_gamma(), rat(1, 2));
    }

    #[test]
    fn constants_anchor_d2() {
        let led = cube_ledger_d2();
        assert_eq!(led.s, 7);
        assert_eq!(led.eta, rat(1, 12));
        assert_eq!(led.beta, rat(1, 32)); // 8^{-5/3}
        assert!(led.lambda1 >= 1);
        assert_eq!(led.game_gamma(), rat(3, 2));
    }

    #[test]
    fn beta_too_large_detected() {
        // b close to 1 gives beta near 1 > r0.
        let params =
            FlowParams3::new(rat(5, 4), Weight::new(vec![rat_int(1)]).unwrap()).unwrap();
        let sc = Support::full_cube(1).unwrap().builtin_constants(128).unwrap();
        let err = ConstantsLedger::compute(params, sc, rat(1, 10), 128);
        assert!(matches!(err, Err(Error::BetaTooLarge(_))));
    }

    #[test]
    fn shells_empty_below_lambda1() {
        let led = cube_ledger_d1();
        for n in 0..=(led.lambda1 + 1) {
            assert!(led.shell_denominators(n).unwrap().is_empty());
        }
    }

    #[test]
    fn relaxed_shell_contents() {
        let led = relaxed_ledger();
        // c = 1/2, beta = 1/4, r0 = 1/2: m^2 in [4^{n+1}, 4^{n+2}), m >= 48.
        assert!(led.shell_denominators(3).unwrap().is_empty()); // m in [16,32) < 48
        let v5: Vec<BigInt> = led.shell_denominators(5).unwrap();
        assert_eq!(v5.first().unwrap(), &BigInt::from(64));
        assert_eq!(v5.last().unwrap(), &BigInt::from(127));
    }

    #[test]
    fn dangerous_rect_zero_and_half_shift() {
        let led = relaxed_ledger();
        let m = BigInt::from(64);
        let p = vec![BigInt::from(32)];
        // theta = 0: center 1/2, half width q c / m^2 = (1/4)/4096.
        let dr = dangerous_rect(&led, &Theta::zero(1), &p, &m, 1, 128).unwrap();
        assert_eq!(dr.outer, dr.inner);
        assert_eq!(dr.outer.center(), vec![rat(1, 2)]);
        assert_eq!(dr.outer.side(0), rat(2, 16384));
        // theta = 1/2 constant: center shifts to (32 + 1/2)/64 = 65/128.
        let th = Theta::constant(vec![rat(1, 2)]);
        let dr = dangerous_rect(&led, &th, &p, &m, 1, 128).unwrap();
        assert_eq!(dr.outer.center(), vec![rat(65, 128)]);
        // Inflation doubles the side.
        let dr2 = dangerous_rect(&led, &th, &p, &m, 2, 128).unwrap();
        assert_eq!(dr2.outer.side(0), dr.outer.side(0) * rat_int(2));
    }

    #[test]
    fn dangerous_rect_affine_theta() {
        let led = relaxed_ledger();
        let m = BigInt::from(100);
        let p = vec![BigInt::from(50)];
        let th = Theta::affine(vec![Rat::zero()], vec![rat(1, 10)]).unwrap();
        let dr = dangerous_rect(&led, &th, &p, &m, 1, 128).unwrap();
        // Solve |x(1 - 1/1000) - 1/2| < w: center = (1/2)/(999/1000).
        assert_eq!(dr.outer.center(), vec![rat(500, 999)]);
        // Membership sanity: the center satisfies the defining inequality.
        let x = rat(500, 999);
        let lhs = (&x - (Rat::from_integer(p[0].clone()) + th.eval(0, &x)) / rat_int(100)).abs();
        assert!(lhs < &led.q * &led.c / rat_int(10_000));
    }

    #[test]
    fn frozen_rect_and_sandwich() {
        let led = relaxed_ledger();
        let b0 = Ball::new(vec![rat(1, 2)], rat(1, 2)).unwrap();
        let grid = CellGrid::new(&led, &b0, 5, 128).unwrap();
        let m = BigInt::from(64);
        let p = vec![BigInt::from(32)];
        let th = Theta::affine(vec![Rat::zero()], vec![rat(1, 10)]).unwrap();
        // The function-theta rectangle around 1/2-ish.
        let dr = dangerous_rect(&led, &th, &p, &m, 1, 128).unwrap();
        let j = grid.index_of(&dr.outer.center());
        let cell = grid.cell_rect(&j);
        let anchor = grid.anchor(&j);
        let frozen = frozen_rect(&led, &th, &anchor, &cell, &p, &m, 1, 128).unwrap();
        if frozen.is_some() {
            let verdict = sandwich_check(&led, &th, &anchor, &cell, &p, &m, 128).unwrap();
            assert_eq!(verdict, SandwichVerdict::Certified);
        }
    }

    #[test]
    fn shell_enumeration_matches_brute_force() {
        // theta = 1/2: survivors of the rectangle scan near a point agree
        // with a direct scan over all (p, m) in the shell box.
        let led = relaxed_ledger();
        let th = Theta::constant(vec![rat(1, 2)]);
        let n = 5u64;
        let center = rat(65, 128); // = (32 + 1/2)/64
        let b = Ball::new(vec![center.clone()], rat(1, 1_000_000)).unwrap();
        let rect = b.to_rect();
        let mut hits = Vec::new();
        for m in led.shell_denominators(n).unwrap() {
            let m_rat = Rat::from_integer(m.clone());
            let lo = (&m_rat * &rect.lo()[0] - rat_int(1)).floor().to_integer();
            let hi = (&m_rat * &rect.hi()[0] + rat_int(1)).ceil().to_integer();
            let mut p = lo;
            while p <= hi {
                let dr = dangerous_rect(&led, &th, &[p.clone()], &m, 1, 128).unwrap();
                if rect.intersects(&dr.outer) {
                    hits.push((p.clone(), m.clone()));
                }
                p += 1;
            }
        }
        assert!(hits.contains(&(BigInt::from(32), BigInt::from(64))));
        // Every hit's rectangle genuinely meets the ball.
        for (p, m) in &hits {
            let dr = dangerous_rect(&led, &th, &[p.clone()], m, 1, 128).unwrap();
            assert!(rect.intersects(&dr.outer));
        }
    }

    #[test]
    fn inhomogeneous_removal_empty_below_lambda1() {
        let led = cube_ledger_d1();
        let supp = Support::full_cube(1).unwrap();
        let b0 = Ball::new(vec![rat(1, 2)], rat(1, 2)).unwrap();
        let rep = inhomogeneous_removal(
            &led,
            &supp,
            &Theta::zero(1),
            &b0,
            &b0,
            led.lambda1,
            &[],
            128,
        )
        .unwrap();
        assert!(rep.balls.is_empty());
    }

    #[test]
    fn inhomogeneous_removal_unique_survivor() {
        let led = relaxed_ledger();
        let supp = Support::full_cube(1).unwrap();
        let b0 = Ball::new(vec![rat(1, 2)], rat(1, 2)).unwrap();
        let th = Theta::constant(vec![rat(1, 2)]);
        // Tiny B_n around the single shifted rational (32+1/2)/64.
        let b_n = Ball::new(vec![rat(65, 128)], rat(1, 1_000_000)).unwrap();
        let rep =
            inhomogeneous_removal(&led, &supp, &th, &b0, &b_n, 5, &[], 128).unwrap();
        assert!(!rep.balls.is_empty());
        // A B_n in between shifted rationals yields nothing.
        let quiet = Ball::new(
            vec![rat(65, 128) + rat(1, 997)],
            rat(1, 100_000_000),
        )
        .unwrap();
        let rep = inhomogeneous_removal(&led, &supp, &th, &b0, &quiet, 5, &[], 128).unwrap();
        assert!(rep.balls.is_empty());
    }

    #[test]
    fn homogeneous_removal_shapes() {
        let led = cube_ledger_d1();
        let supp = Support::full_cube(1).unwrap();
        let b = Ball::new(vec![rat(1, 2)], rat(1, 2)).unwrap();
        // n >= 1, i not of the form (s-1)l: empty.
        let rep = homogeneous_removal(&led, &supp, &b, 6, 3, &[], 160).unwrap();
        assert!(rep.balls.is_empty());
        // n = 0, i = 1 < s-1: no valid pair.
        let rep = homogeneous_removal(&led, &supp, &b, 0, 1, &[], 160).unwrap();
        assert!(rep.balls.is_empty());
        // Tight window around 1/2 so the scan reaches it within budget.
        let small = Ball::new(vec![rat(1, 2)], rat(1, 1 << 20)).unwrap();
        let rep = homogeneous_removal(&led, &supp, &small, 5, 4, &[], 160).unwrap();
        // The removal set contains the small-denominator rationals: 1/2 is
        // one, so the report should flag it.
        assert!(
            rep.balls.iter().any(|bl| bl.contains_point(&[rat(1, 2)])),
            "1/2 should be removed at this level"
        );
    }

    #[test]
    fn homogeneous_removal_cross_validated() {
        let led = cube_ledger_d1();
        let supp = Support::full_cube(1).unwrap();
        let small = Ball::new(vec![rat(1, 2)], rat(1, 1 << 20)).unwrap();
        let n = 5u64;
        let i = led.s - 1; // l = 1
        let rep = homogeneous_removal(&led, &supp, &small, n, i, &[], 160).unwrap();
        let eps = round_down(
            led.params.beta_pow(&led.eta, 160).unwrap().lo(),
            96,
        );
        // Every removed center fails the independent SVP oracle too.
        for ball in rep.balls.iter().take(8) {
            let oracle = svp_oracle_d1(&led, &ball.center[0], n + 1 + led.s, 1, &eps, 160).unwrap();
            assert!(!oracle, "oracle disagrees at a removed center");
        }
    }

    #[test]
    fn dual_and_simul_solutions() {
        let led = cube_ledger_d1();
        // x = 1/2 has the solution z = (1, -2) to z_0 + z_1 x = 0 as soon as
        // H^{w} >= 2 — but |z_1| <= H here, so H = 2 suffices.
        let sol = dual_solution(&led, &[rat(1, 2)], 2).unwrap();
        assert!(sol.is_some());
        let (z0, z1) = (&sol.as_ref().unwrap()[0], &sol.as_ref().unwrap()[1]);
        assert!((Rat::from_integer(z0.clone()) + Rat::from_integer(z1.clone()) * rat(1, 2))
            .abs()
            <= &led.k1 / rat_int(2));
        // A generic dyadic with large denominator admits none at small H.
        let x = rat(1_234_577, 1 << 21);
        assert!(dual_solution(&led, &[x.clone()], 8).unwrap().is_none());
        // Simultaneous: x = 1/2 is hit at m = 2 only if the tolerance allows
        // exact zero error — it does (strict inequality with err = 0 < tol).
        let sol = simul_solution(&led, &[rat(1, 2)], 4).unwrap();
        assert_eq!(sol.unwrap().0, BigInt::from(2));
        assert!(simul_solution(&led, &[x], 16).unwrap().is_none());
    }

    #[test]
    fn policy_dispatch_shape() {
        use crate::game::GameConfig;
        let led = cube_ledger_d1();
        let supp = Support::full_cube(1).unwrap();
        let cfg = GameConfig::new(
            led.game_gamma(),
            led.beta.clone(),
            Ball::new(vec![rat(1, 2)], rat(1, 2)).unwrap(),
            supp.clone(),
            6,
        )
        .unwrap();
        let state = GameState::new(cfg).unwrap();
        let pm = alice_policy(&led, &supp, &Theta::zero(1), &state, 160).unwrap();
        // Round 0: only homogeneous collections, at indices of the form
        // n' + (s-1)l with l >= (n'+1)/s; the smallest is i = s-1 = 4.
        for (&i, balls) in &pm.mv.collections {
            assert!(!balls.is_empty());
            assert!(i >= led.s - 1, "unexpected collection index {i}");
        }
        // All balls have the radius the engine demands.
        let st = GameState::new(state.config().clone()).unwrap();
        st.check_alice(&pm.mv).unwrap();
    }
}
