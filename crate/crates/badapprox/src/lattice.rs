//! Lattice bases, certified shortest vectors, successive minima, and the
//! K_eps membership test.
//!
//! Bases are columns of a square matrix over certified intervals; exact
//! rational bases (the common case) enumerate with no slack at all. The
//! enumeration is Fincke–Pohst on the Gram matrix after a cheap pairwise
//! size reduction — dimensions are small, so exactness beats asymptotics.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::interval::{rat_int, Interval, Rat};
use crate::mat::Mat;

pub use crate::mat::dual_star;

pub const MAX_DIM_SHORTEST: usize = 12;
pub const MAX_DIM_MINIMA: usize = 8;

#[derive(Clone, Debug)]
pub struct LatticeBasis {
    /// Columns are the basis vectors.
    columns: Mat,
}

impl LatticeBasis {
    pub fn new(columns: Mat) -> Result<Self> {
        if columns.rows() != columns.cols() {
            return Err(Error::DimensionMismatch("lattice basis must be square".into()));
        }
        if columns.det()?.contains_zero() {
            return Err(Error::SingularMatrix);
        }
        Ok(LatticeBasis { columns })
    }

    pub fn from_rational_rows(rows: &[Vec<Rat>]) -> Result<Self> {
        Self::new(Mat::from_rational_rows(rows)?)
    }

    pub fn dim(&self) -> usize {
        self.columns.rows()
    }

    pub fn columns(&self) -> &Mat {
        &self.columns
    }

    pub fn det_abs(&self) -> Result<Interval> {
        Ok(self.columns.det()?.abs())
    }

    /// The lattice vector with integer coefficients `z`.
    pub fn vector(&self, z: &[BigInt]) -> Result<Vec<Interval>> {
        let v: Vec<Interval> = z
            .iter()
            .map(|c| Interval::point(Rat::from_integer(c.clone())))
            .collect();
        self.columns.mul_vec(&v)
    }

    /// Squared Euclidean norm of the lattice vector with coefficients `z`.
    pub fn norm2(&self, z: &[BigInt]) -> Result<Interval> {
        let v = self.vector(z)?;
        let mut acc = Interval::zero();
        for e in &v {
            acc = acc.add(&e.square());
        }
        Ok(acc)
    }
}

#[derive(Clone, Debug)]
pub struct ShortestVector {
    /// Enclosure of the minimal Euclidean norm over nonzero lattice vectors.
    pub length: Interval,
    /// Integer coefficient vector achieving (an upper endpoint of) the minimum.
    pub witness: Vec<BigInt>,
}

#[derive(Clone, Debug)]
pub struct MinimaProfile {
    /// `lambda[i]` encloses the (i+1)-th successive minimum.
    pub lambda: Vec<Interval>,
    /// Coefficient vectors of an independent chain achieving the minima.
    pub witnesses: Vec<Vec<BigInt>>,
}

/// Pairwise size reduction: repeatedly subtracts integer multiples of one
/// column from another when that shortens it. Preconditioning only; the
/// enumeration that follows is exhaustive regardless.
fn size_reduce(b: &Mat) -> Mat {
    let n = b.cols();
    let mut m = b.clone();
    for _sweep in 0..64 {
        let mut changed = false;
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                // t = round(<b_i, b_j> / <b_i, b_i>) from midpoints.
                let mut dot = 0f64;
                let mut nrm = 0f64;
                for r in 0..m.rows() {
                    let bi = m.get(r, i).to_f64();
                    let bj = m.get(r, j).to_f64();
                    dot += bi * bj;
                    nrm += bi * bi;
                }
                if nrm == 0.0 || !dot.is_finite() || !nrm.is_finite() {
                    continue;
                }
                let t = (dot / nrm).round();
                if t == 0.0 || t.abs() > 1e15 {
                    continue;
                }
                let tr = Interval::point(Rat::from_integer(BigInt::from(t as i64)));
                for r in 0..m.rows() {
                    let v = m.get(r, j).sub(&tr.mul(m.get(r, i)));
                    m.set(r, j, v);
                }
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    m
}

/// LDL^T decomposition of a symmetric positive matrix of intervals.
/// Returns (mu, diag) with G = mu^T D mu, mu unit upper triangular by rows.
fn ldl(g: &Mat) -> Result<(Vec<Vec<Interval>>, Vec<Interval>)> {
    let n = g.rows();
    let mut mu = vec![vec![Interval::zero(); n]; n];
    let mut d = vec![Interval::zero(); n];
    for i in 0..n {
        mu[i][i] = Interval::one();
        let mut di = g.get(i, i).clone();
        for k in 0..i {
            di = di.sub(&d[k].mul(&mu[k][i].square()));
        }
        if di.contains_zero() || di.lo().is_negative() {
            return Err(Error::SingularMatrix);
        }
        d[i] = di;
        for j in i + 1..n {
            let mut v = g.get(i, j).clone();
            for k in 0..i {
                v = v.sub(&d[k].mul(&mu[k][i].mul(&mu[k][j])));
            }
            mu[i][j] = v.div(&d[i])?;
        }
    }
    Ok((mu, d))
}

struct Enumerator<'a> {
    basis: &'a LatticeBasis,
    mu: Vec<Vec<Interval>>,
    d: Vec<Interval>,
    n: usize,
    /// Current pruning bound: upper endpoint of the best norm^2 seen so far.
    bound_hi: Rat,
    best: Option<(Interval, Vec<BigInt>)>,
    /// All candidates surviving the bound, for successive minima extraction.
    collect: Option<Vec<(Interval, Vec<BigInt>)>>,
    node_budget: u64,
}

impl<'a> Enumerator<'a> {
    /// Depth-first over coordinates n-1 .. 0. `partial_lo` is a certified
    /// lower bound on the norm^2 contribution of coordinates > level.
    fn descend(&mut self, level: usize, z: &mut Vec<BigInt>, partial_lo: &Rat) -> Result<()> {
        if self.node_budget == 0 {
            return Err(Error::SearchBudgetExceeded(0, 0));
        }
        self.node_budget -= 1;
        // Center of the allowed z[level] range: -sum_{j>level} mu[level][j] z_j.
        let mut center = Interval::zero();
        for j in level + 1..self.n {
            let zj = Interval::point(Rat::from_integer(z[j].clone()));
            center = center.sub(&self.mu[level][j].mul(&zj));
        }
        // (z + c)^2 * d <= bound - partial  =>  |z + c| <= sqrt(T).
        let slack = &self.bound_hi - partial_lo;
        if slack.is_negative() {
            return Ok(());
        }
        let t = Interval::new(Rat::zero(), slack).div(&self.d[level])?;
        let half_width = t.sqrt(64)?.hi().clone();
        let lo_f = (center.lo() - &half_width).floor();
        let hi_f = (center.hi() + &half_width).ceil();
        let lo_i: BigInt = lo_f.to_integer();
        let hi_i: BigInt = hi_f.to_integer();
        let mut zi = lo_i.clone();
        while zi <= hi_i {
            z[level] = zi.clone();
            // Contribution is d * (z - center)^2: center = -S, so z - center
            // is the inner sum z + S of the quadratic form.
            let zc = Interval::point(Rat::from_integer(zi.clone())).sub(&center);
            let contrib = zc.square().mul(&self.d[level]);
            let new_partial = partial_lo + contrib.lo();
            if &new_partial <= &self.bound_hi {
                if level == 0 {
                    self.visit(z)?;
                } else {
                    self.descend(level - 1, z, &new_partial)?;
                }
            }
            zi += 1;
        }
        z[level] = BigInt::zero();
        Ok(())
    }

    fn visit(&mut self, z: &[BigInt]) -> Result<()> {
        if z.iter().all(|c| c.is_zero()) {
            return Ok(());
        }
        let n2 = self.basis.norm2(z)?;
        if n2.lo() > &self.bound_hi {
            return Ok(());
        }
        if let Some(collect) = &mut self.collect {
            collect.push((n2.clone(), z.to_vec()));
        } else {
            // Shortest-vector mode: shrink the bound as better vectors appear.
            let better = match &self.best {
                None => true,
                Some((best, _)) => n2.hi() < best.hi(),
            };
            if better {
                if n2.hi() < &self.bound_hi {
                    self.bound_hi = n2.hi().clone();
                }
                self.best = Some((n2, z.to_vec()));
            }
        }
        Ok(())
    }
}

fn min_column_norm2_hi(b: &LatticeBasis) -> Interval {
    let m = b.columns();
    let mut best: Option<Interval> = None;
    for j in 0..m.cols() {
        let mut acc = Interval::zero();
        for i in 0..m.rows() {
            acc = acc.add(&m.get(i, j).square());
        }
        best = match best {
            None => Some(acc),
            Some(cur) => Some(if acc.hi() < cur.hi() { acc } else { cur }),
        };
    }
    best.expect("nonempty basis")
}

fn max_column_norm2_hi(b: &LatticeBasis) -> Interval {
    let m = b.columns();
    let mut worst: Option<Interval> = None;
    for j in 0..m.cols() {
        let mut acc = Interval::zero();
        for i in 0..m.rows() {
            acc = acc.add(&m.get(i, j).square());
        }
        worst = match worst {
            None => Some(acc),
            Some(cur) => Some(if acc.hi() > cur.hi() { acc } else { cur }),
        };
    }
    worst.expect("nonempty basis")
}

const NODE_BUDGET: u64 = 50_000_000;

/// Minimal Euclidean norm over nonzero lattice vectors, with witness.
///
/// The returned interval contains the true minimum: every pruned branch is
/// certified to exceed the final upper endpoint.
pub fn shortest_vector(basis: &LatticeBasis) -> Result<ShortestVector> {
    let n = basis.dim();
    if n > MAX_DIM_SHORTEST {
        return Err(Error::DimensionTooLarge(n, MAX_DIM_SHORTEST));
    }
    let reduced = LatticeBasis::new(size_reduce(basis.columns()))?;
    let gram = reduced.columns().transpose().mul(reduced.columns())?;
    let (mu, d) = ldl(&gram)?;
    let bound = min_column_norm2_hi(&reduced);
    let mut en = Enumerator {
        basis: &reduced,
        mu,
        d,
        n,
        bound_hi: bound.hi().clone(),
        best: None,
        collect: None,
        node_budget: NODE_BUDGET,
    };
    let mut z = vec![BigInt::zero(); n];
    en.descend(n - 1, &mut z, &Rat::zero())?;
    let (n2, witness) = en.best.ok_or_else(|| {
        Error::PreconditionViolated("no nonzero vector found within the initial bound".into())
    })?;
    // True min is >= the least lower bound among survivors, <= best upper.
    let lo = n2.lo().clone().min(en.bound_hi.clone());
    let len2 = Interval::new(lo.max(Rat::zero()), en.bound_hi);
    // Coefficients refer to the size-reduced basis; translate back.
    let original = translate_coefficients(basis, &reduced, &witness)?;
    Ok(ShortestVector {
        length: len2.sqrt(192)?,
        witness: original,
    })
}

/// Express a vector of `reduced` in coefficients of `basis` (both generate
/// the same lattice, so the translation is integral).
fn translate_coefficients(
    basis: &LatticeBasis,
    reduced: &LatticeBasis,
    z: &[BigInt],
) -> Result<Vec<BigInt>> {
    let v = reduced.vector(z)?;
    let inv = basis.columns().inverse()?;
    let coeffs = inv.mul_vec(&v)?;
    let mut out = Vec::with_capacity(coeffs.len());
    for c in coeffs {
        let mid = c.midpoint();
        let rounded = (&mid + crate::interval::rat(1, 2)).floor().to_integer();
        // The coefficient is an exact integer; the enclosure just needs to pin it.
        let r = Rat::from_integer(rounded.clone());
        if (&mid - &r).abs() > crate::interval::rat(1, 4) {
            return Err(Error::PrecisionExhausted(0));
        }
        out.push(rounded);
    }
    Ok(out)
}

/// True iff the shortest nonzero vector has Euclidean norm >= eps.
/// Returns `None` when the enclosures cannot decide at current precision.
pub fn in_k_eps(basis: &LatticeBasis, eps: &Rat) -> Result<Option<bool>> {
    if !eps.is_positive() {
        return Err(Error::PreconditionViolated("K_eps needs eps > 0".into()));
    }
    let sv = shortest_vector(basis)?;
    let e = Interval::point(eps.clone());
    match sv.length.cmp_certified(&e) {
        Some(std::cmp::Ordering::Less) => Ok(Some(false)),
        Some(_) => Ok(Some(true)),
        None => {
            if sv.length.lo() >= e.lo() {
                Ok(Some(true))
            } else if sv.length.hi() < e.lo() {
                Ok(Some(false))
            } else {
                Ok(None)
            }
        }
    }
}

/// Successive minima with an independent witness chain, by exhausting all
/// vectors up to the largest column norm and greedily extracting a chain.
pub fn successive_minima(basis: &LatticeBasis) -> Result<MinimaProfile> {
    let n = basis.dim();
    if n > MAX_DIM_MINIMA {
        return Err(Error::DimensionTooLarge(n, MAX_DIM_MINIMA));
    }
    let reduced = LatticeBasis::new(size_reduce(basis.columns()))?;
    let gram = reduced.columns().transpose().mul(reduced.columns())?;
    let (mu, d) = ldl(&gram)?;
    // The reduced columns are n independent vectors, so every minimum is at
    // most the largest column norm.
    let bound = max_column_norm2_hi(&reduced);
    let mut en = Enumerator {
        basis: &reduced,
        mu,
        d,
        n,
        bound_hi: bound.hi().clone(),
        best: None,
        collect: Some(Vec::new()),
        node_budget: NODE_BUDGET,
    };
    let mut z = vec![BigInt::zero(); n];
    en.descend(n - 1, &mut z, &Rat::zero())?;
    let mut cands = en.collect.unwrap();
    cands.sort_by(|a, b| a.0.hi().cmp(b.0.hi()).then_with(|| a.0.lo().cmp(b.0.lo())));

    let mut lambda = Vec::with_capacity(n);
    let mut witnesses: Vec<Vec<BigInt>> = Vec::with_capacity(n);
    for (n2, zc) in cands {
        if independent_with(&witnesses, &zc) {
            // Independence of the lattice vectors equals independence of the
            // integer coefficient vectors, since the basis is invertible.
            lambda.push(n2.sqrt(192)?);
            witnesses.push(zc);
            if lambda.len() == n {
                break;
            }
        }
    }
    if lambda.len() < n {
        return Err(Error::PreconditionViolated(
            "successive minima chain incomplete within the enumeration bound".into(),
        ));
    }
    let witnesses = witnesses
        .iter()
        .map(|z| translate_coefficients(basis, &reduced, z))
        .collect::<Result<Vec<_>>>()?;
    Ok(MinimaProfile { lambda, witnesses })
}

/// Rank test over Q by exact Gaussian elimination on coefficient vectors.
fn independent_with(chain: &[Vec<BigInt>], cand: &[BigInt]) -> bool {
    let mut rows: Vec<Vec<Rat>> = chain
        .iter()
        .chain(std::iter::once(&cand.to_vec()))
        .map(|v| v.iter().map(|c| Rat::from_integer(c.clone())).collect())
        .collect();
    let nrows = rows.len();
    let ncols = cand.len();
    let mut rank = 0;
    for col in 0..ncols {
        if rank == nrows {
            break;
        }
        let pivot = (rank..nrows).find(|&r| !rows[r][col].is_zero());
        let Some(p) = pivot else { continue };
        rows.swap(rank, p);
        for r in rank + 1..nrows {
            if !rows[r][col].is_zero() {
                let f = &rows[r][col] / &rows[rank][col];
                for c in col..ncols {
                    let v = &rows[r][c] - &f * &rows[rank][c];
                    rows[r][c] = v;
                }
            }
        }
        rank += 1;
    }
    rank == nrows
}

/// Brute-force shortest vector over a coefficient box `|z_i| <= r_i`,
/// `r_i <= radius_cap`. Independent oracle used by the test suite.
///
/// Any optimal `z` satisfies `z = B^{-1}(Bz)`, so `|z_i|` is at most the
/// Euclidean norm of row i of `B^{-1}` times any upper bound on the minimal
/// vector length (here: the shortest basis column). That elementary bound
/// trims the box without consulting the enumeration under test.
pub fn brute_force_shortest(
    basis: &LatticeBasis,
    radius_cap: i64,
) -> Result<(Interval, Vec<BigInt>)> {
    let n = basis.dim();
    let inv = basis.columns().inverse()?;
    let len_hi2 = min_column_norm2_hi(basis).hi().clone();
    let mut radii = Vec::with_capacity(n);
    for i in 0..n {
        let mut row2 = Interval::zero();
        for j in 0..n {
            row2 = row2.add(&inv.get(i, j).square());
        }
        // |z_i|^2 <= ||row_i||^2 * len^2
        let bound2 = row2.hi() * &len_hi2;
        let r = nth_root_upper_int(&bound2, radius_cap);
        radii.push(r);
    }
    // Fast exact path for small integer bases: i64 arithmetic is exact here.
    if let Some(int_rows) = small_integer_rows(basis) {
        return brute_force_integer(&int_rows, &radii);
    }
    let mut best: Option<(Interval, Vec<BigInt>)> = None;
    let mut z: Vec<i64> = radii.iter().map(|r| -r).collect();
    loop {
        if z.iter().any(|&c| c != 0) {
            let zb: Vec<BigInt> = z.iter().map(|&c| BigInt::from(c)).collect();
            let n2 = basis.norm2(&zb)?;
            let better = match &best {
                None => true,
                Some((b, _)) => n2.hi() < b.hi(),
            };
            if better {
                best = Some((n2, zb));
            }
        }
        // Odometer increment.
        let mut i = 0;
        loop {
            if i == n {
                let (n2, w) = best.expect("box nonempty");
                return Ok((n2.sqrt(192)?, w));
            }
            z[i] += 1;
            if z[i] <= radii[i] {
                break;
            }
            z[i] = -radii[i];
            i += 1;
        }
    }
}

/// Row-major i64 entries when every entry is an integer below 10^6.
fn small_integer_rows(basis: &LatticeBasis) -> Option<Vec<Vec<i64>>> {
    let rows = basis.columns().to_rational()?;
    let cap = BigInt::from(1_000_000i64);
    let mut out = Vec::with_capacity(rows.len());
    for row in &rows {
        let mut r = Vec::with_capacity(row.len());
        for x in row {
            if !x.is_integer() {
                return None;
            }
            let n = x.numer();
            if n.abs() > cap {
                return None;
            }
            r.push(i64::try_from(n).ok()?);
        }
        out.push(r);
    }
    Some(out)
}

/// Exact i64 brute force with incremental vector updates: when coordinate i
/// of the odometer advances, the lattice vector changes by column i.
fn brute_force_integer(rows: &[Vec<i64>], radii: &[i64]) -> Result<(Interval, Vec<BigInt>)> {
    let n = rows.len();
    let col = |j: usize| -> Vec<i64> { (0..n).map(|i| rows[i][j]).collect() };
    let cols: Vec<Vec<i64>> = (0..n).map(col).collect();
    let mut z: Vec<i64> = radii.iter().map(|r| -r).collect();
    // v = B z for the starting corner.
    let mut v: Vec<i64> = (0..n)
        .map(|i| (0..n).map(|j| rows[i][j] * z[j]).sum())
        .collect();
    let mut best_n2: Option<i64> = None;
    let mut best_z: Vec<i64> = vec![0; n];
    loop {
        if z.iter().any(|&c| c != 0) {
            let n2: i64 = v.iter().map(|&x| x * x).sum();
            if best_n2.map_or(true, |b| n2 < b) {
                best_n2 = Some(n2);
                best_z.copy_from_slice(&z);
            }
        }
        let mut i = 0;
        loop {
            if i == n {
                let n2 = best_n2.ok_or_else(|| {
                    Error::PreconditionViolated("empty brute-force box".into())
                })?;
                let len = Interval::point(Rat::from_integer(BigInt::from(n2))).sqrt(192)?;
                return Ok((len, best_z.iter().map(|&c| BigInt::from(c)).collect()));
            }
            if z[i] < radii[i] {
                z[i] += 1;
                for (vk, ck) in v.iter_mut().zip(&cols[i]) {
                    *vk += ck;
                }
                break;
            }
            // Reset coordinate i to -radius: subtract 2*radius*col_i.
            z[i] = -radii[i];
            for (vk, ck) in v.iter_mut().zip(&cols[i]) {
                *vk -= 2 * radii[i] * ck;
            }
            i += 1;
        }
    }
}

/// Smallest integer `r` with `r^2 >= x`, capped at `cap`.
fn nth_root_upper_int(x: &Rat, cap: i64) -> i64 {
    let mut r: i64 = 0;
    while r < cap {
        let r2 = Rat::from_integer(BigInt::from(r) * BigInt::from(r));
        if &r2 >= x {
            break;
        }
        r += 1;
    }
    r
}

/// Minkowski-style sanity bound lambda_1...lambda_n <= 2^n/vol(B_2^n) * |det|,
/// checked with outer enclosures. Returns the two sides for reporting.
pub fn minkowski_product_check(basis: &LatticeBasis, profile: &MinimaProfile) -> Result<(Interval, Interval)> {
    let n = basis.dim();
    let mut prod = Interval::one();
    for l in &profile.lambda {
        prod = prod.mul(l);
    }
    // vol(B_2^n) >= (2/sqrt(n))^n (inscribed cube), so 2^n/vol <= sqrt(n)^n.
    let sqrt_n = Interval::point(rat_int(n as i64)).sqrt(96)?;
    let bound = sqrt_n.pow_i64(n as i64)?.mul(&basis.det_abs()?);
    Ok((prod, bound))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::rat;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ident(n: usize) -> LatticeBasis {
        LatticeBasis::new(Mat::identity(n)).unwrap()
    }

    #[test]
    fn identity_shortest() {
        let sv = shortest_vector(&ident(2)).unwrap();
        assert_eq!(sv.length.as_rat(), None); // sqrt(1) via enclosure
        assert!(sv.length.lo() <= &rat_int(1) && &rat_int(1) <= sv.length.hi());
        let nonzero = sv.witness.iter().filter(|c| !c.is_zero()).count();
        assert_eq!(nonzero, 1);
    }

    #[test]
    fn diag_shortest() {
        let b = LatticeBasis::from_rational_rows(&[
            vec![rat_int(2), rat_int(0)],
            vec![rat_int(0), rat(1, 2)],
        ])
        .unwrap();
        let sv = shortest_vector(&b).unwrap();
        assert!(sv.length.lo() <= &rat(1, 2) && &rat(1, 2) <= sv.length.hi());
        assert_eq!(sv.witness[0], BigInt::zero());
        assert_eq!(sv.witness[1].abs(), BigInt::from(1));
    }

    #[test]
    fn k_eps_examples() {
        assert_eq!(in_k_eps(&ident(2), &rat_int(1)).unwrap(), Some(true));
        assert_eq!(in_k_eps(&ident(2), &rat(101, 100)).unwrap(), Some(false));
        let b = LatticeBasis::from_rational_rows(&[
            vec![rat_int(2), rat_int(0)],
            vec![rat_int(0), rat(1, 2)],
        ])
        .unwrap();
        assert_eq!(in_k_eps(&b, &rat(3, 5)).unwrap(), Some(false));
    }

    #[test]
    fn minima_diagonal() {
        let b = LatticeBasis::from_rational_rows(&[
            vec![rat(1, 2), rat_int(0), rat_int(0)],
            vec![rat_int(0), rat_int(1), rat_int(0)],
            vec![rat_int(0), rat_int(0), rat_int(2)],
        ])
        .unwrap();
        let p = successive_minima(&b).unwrap();
        let expect = [rat(1, 2), rat_int(1), rat_int(2)];
        for (l, e) in p.lambda.iter().zip(&expect) {
            assert!(l.lo() <= e && e <= l.hi(), "minimum {e} not enclosed");
        }
    }

    #[test]
    fn minima_z3_all_one() {
        let p = successive_minima(&ident(3)).unwrap();
        for l in &p.lambda {
            assert!(l.lo() <= &rat_int(1) && &rat_int(1) <= l.hi());
        }
    }

    fn random_unimodular(rng: &mut ChaCha8Rng, n: usize, steps: usize, cap: i64) -> LatticeBasis {
        // Product of random elementary matrices keeps det = +-1.
        let mut m = Mat::identity(n);
        for _ in 0..steps {
            let i = rng.gen_range(0..n);
            let mut j = rng.gen_range(0..n);
            while j == i {
                j = rng.gen_range(0..n);
            }
            let t = rng.gen_range(-2i64..=2);
            if t == 0 {
                continue;
            }
            let tr = Interval::from_i64(t);
            for r in 0..n {
                let v = m.get(r, j).add(&tr.mul(m.get(r, i)));
                m.set(r, j, v);
            }
            // Keep entries within the advertised box.
            if (0..n).any(|r| (0..n).any(|c| m.get(r, c).lo().abs() > Rat::from_integer(BigInt::from(cap)))) {
                for r in 0..n {
                    let v = m.get(r, j).sub(&tr.mul(m.get(r, i)));
                    m.set(r, j, v);
                }
            }
        }
        LatticeBasis::new(m).unwrap()
    }

    #[test]
    fn shortest_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..25 {
            let n = rng.gen_range(2..=4);
            let b = random_unimodular(&mut rng, n, 12, 5);
            let sv = shortest_vector(&b).unwrap();
            let (oracle, _) = brute_force_shortest(&b, 25).unwrap();
            // Compare the squared norms of the two witnesses exactly.
            assert!(
                sv.length.lo() <= oracle.hi() && oracle.lo() <= sv.length.hi(),
                "shortest vector disagrees with brute force"
            );
        }
    }

    #[test]
    fn minima_are_sorted_and_minkowski_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let n = rng.gen_range(2..=4);
            let b = random_unimodular(&mut rng, n, 10, 5);
            let p = successive_minima(&b).unwrap();
            for w in p.lambda.windows(2) {
                assert!(w[0].lo() <= w[1].hi(), "minima out of order");
            }
            let (prod, bound) = minkowski_product_check(&b, &p).unwrap();
            assert!(prod.lo() <= bound.hi(), "Minkowski bound violated");
        }
    }

    #[test]
    fn minima_transference_sanity() {
        // lambda_i(L) * lambda_{n+1-i}(L*) in [1, n!] for small unimodular L.
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..8 {
            let n = rng.gen_range(2..=4);
            let b = random_unimodular(&mut rng, n, 10, 5);
            let star = LatticeBasis::new(dual_star(b.columns()).unwrap()).unwrap();
            let p = successive_minima(&b).unwrap();
            let q = successive_minima(&star).unwrap();
            let fact: i64 = (1..=n as i64).product();
            for i in 0..n {
                let prod = p.lambda[i].mul(&q.lambda[n - 1 - i]);
                assert!(
                    prod.hi() >= &rat_int(1) && prod.lo() <= &rat_int(fact * 2),
                    "transference product out of expected range"
                );
            }
        }
    }

    #[test]
    fn dimension_guards() {
        assert!(matches!(
            shortest_vector(&ident(13)),
            Err(Error::DimensionTooLarge(13, MAX_DIM_SHORTEST))
        ));
        assert!(matches!(
            successive_minima(&ident(9)),
            Err(Error::DimensionTooLarge(9, MAX_DIM_MINIMA))
        ));
    }
}
