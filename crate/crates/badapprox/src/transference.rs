//! Mahler's transference lemma as an executable check: given a solution of
//! the primal system of linear forms, find (by certified finite search) a
//! solution of the transposed system.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::interval::{nth_root_upper, rat_int, rat_pow_i64, Rat};
use crate::mat::Mat;

/// A positive bound of the form `base^(1/root)`, kept symbolic so that
/// comparisons against rationals are exact: `|v| <= base^(1/root)` iff
/// `|v|^root <= base`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bound {
    base: Rat,
    root: u32,
}

impl Bound {
    pub fn new(base: Rat, root: u32) -> Result<Self> {
        if !base.is_positive() || root == 0 {
            return Err(Error::PreconditionViolated(
                "bound needs positive base and root >= 1".into(),
            ));
        }
        Ok(Bound { base, root })
    }

    pub fn rational(value: Rat) -> Result<Self> {
        Bound::new(value, 1)
    }

    pub fn base(&self) -> &Rat {
        &self.base
    }

    pub fn root(&self) -> u32 {
        self.root
    }

    /// Exact test `|x| <= base^(1/root)`.
    pub fn admits(&self, x: &Rat) -> bool {
        rat_pow_i64(&x.abs(), self.root as i64) <= self.base
    }

    /// `self * other`, lifting to the lcm of the roots.
    pub fn mul(&self, other: &Bound) -> Bound {
        let l = (self.root as u64).lcm(&(other.root as u64)) as u32;
        Bound {
            base: rat_pow_i64(&self.base, (l / self.root) as i64)
                * rat_pow_i64(&other.base, (l / other.root) as i64),
            root: l,
        }
    }

    pub fn div(&self, other: &Bound) -> Bound {
        let l = (self.root as u64).lcm(&(other.root as u64)) as u32;
        Bound {
            base: rat_pow_i64(&self.base, (l / self.root) as i64)
                / rat_pow_i64(&other.base, (l / other.root) as i64),
            root: l,
        }
    }

    pub fn scale(&self, c: &Rat) -> Result<Bound> {
        if !c.is_positive() {
            return Err(Error::PreconditionViolated("bound scale must be positive".into()));
        }
        Ok(Bound {
            base: &self.base * rat_pow_i64(c, self.root as i64),
            root: self.root,
        })
    }

    /// `self^(1/k)`.
    pub fn nth_root(&self, k: u32) -> Result<Bound> {
        if k == 0 {
            return Err(Error::PreconditionViolated("zero root".into()));
        }
        Bound::new(self.base.clone(), self.root.checked_mul(k).ok_or_else(|| {
            Error::PreconditionViolated("bound root overflow".into())
        })?)
    }

    /// A rational upper bound on the value, for sizing search boxes.
    pub fn upper(&self) -> Rat {
        if self.root == 1 {
            self.base.clone()
        } else {
            nth_root_upper(&self.base, self.root, 32)
        }
    }

    pub fn to_f64(&self) -> f64 {
        crate::interval::rat_to_f64(&self.upper())
    }
}

/// A system of n+1 linear forms `L_i(u) = (M u)_i` with bounds `T_i`.
#[derive(Clone, Debug)]
pub struct LinearSystem {
    /// Row i holds the coefficients of `L_i`.
    matrix: Mat,
    bounds: Vec<Bound>,
}

impl LinearSystem {
    pub fn new(matrix: Mat, bounds: Vec<Bound>) -> Result<Self> {
        if matrix.rows() != matrix.cols() {
            return Err(Error::DimensionMismatch("coefficient matrix must be square".into()));
        }
        if matrix.rows() != bounds.len() {
            return Err(Error::DimensionMismatch("one bound per form required".into()));
        }
        if matrix.to_rational().is_none() {
            return Err(Error::PreconditionViolated(
                "linear systems require exact rational coefficients".into(),
            ));
        }
        if matrix.det()?.contains_zero() {
            return Err(Error::SingularMatrix);
        }
        Ok(LinearSystem { matrix, bounds })
    }

    pub fn from_rows(rows: &[Vec<Rat>], bounds: Vec<Bound>) -> Result<Self> {
        LinearSystem::new(Mat::from_rational_rows(rows)?, bounds)
    }

    /// n, where the system has n+1 forms.
    pub fn n(&self) -> usize {
        self.matrix.rows() - 1
    }

    pub fn matrix(&self) -> &Mat {
        &self.matrix
    }

    pub fn bounds(&self) -> &[Bound] {
        &self.bounds
    }

    pub fn det_abs(&self) -> Rat {
        self.matrix
            .det()
            .expect("checked nonsingular at construction")
            .as_rat()
            .expect("rational matrix")
            .abs()
    }

    /// `iota = (prod T_i / |d|)^{1/n}`.
    pub fn iota(&self) -> Result<Bound> {
        let mut prod = Bound::rational(Rat::one())?;
        for b in &self.bounds {
            prod = prod.mul(b);
        }
        let d = self.det_abs();
        prod = prod.div(&Bound::rational(d)?);
        prod.nth_root(self.n() as u32)
    }

    /// Evaluates all forms at an integer point.
    pub fn eval(&self, u: &[BigInt]) -> Result<Vec<Rat>> {
        let v: Vec<Rat> = u.iter().map(|c| Rat::from_integer(c.clone())).collect();
        self.matrix.mul_rat_vec(&v)
    }

    /// True iff `u` is nonzero and satisfies every `|L_i(u)| <= T_i`.
    pub fn satisfied_by(&self, u: &[BigInt]) -> Result<bool> {
        if u.iter().all(|c| c.is_zero()) {
            return Ok(false);
        }
        let vals = self.eval(u)?;
        Ok(vals.iter().zip(&self.bounds).all(|(v, b)| b.admits(v)))
    }

    /// The transposed system: coefficient matrix `M' = M^{-T}` (so that
    /// `sum_i L_i L_i' = sum_i u_i v_i`), bounds `T_0' = n iota / T_0` and
    /// `T_i' = iota / T_i` for `i >= 1`.
    pub fn transpose_system(&self) -> Result<LinearSystem> {
        let n = self.n();
        let mprime = self.matrix.transpose().inverse()?;
        let iota = self.iota()?;
        let mut bounds = Vec::with_capacity(n + 1);
        bounds.push(iota.div(&self.bounds[0]).scale(&rat_int(n as i64))?);
        for b in &self.bounds[1..] {
            bounds.push(iota.div(b));
        }
        LinearSystem::new(mprime, bounds)
    }
}

/// Outcome of the transference search.
#[derive(Clone, Debug)]
pub enum TransferOutcome {
    /// A nonzero integer solution of the transposed system.
    Witness(Vec<BigInt>),
    /// The box the lemma confines witnesses to was exhausted with no
    /// solution: a bug-level counterexample report, not a search failure.
    Counterexample { radii: Vec<i64> },
}

/// Cap on the number of points the witness search may visit.
pub const TRANSFER_BUDGET: u64 = 50_000_000;

/// Checks `u` against the primal system, then searches the transposed system
/// for a witness inside the box the lemma confines solutions to.
///
/// Any `v` with `|L_i'(v)| <= T_i'` satisfies `v = M^T L'(v)`, so
/// `|v_j| <= sum_i |M_{ij}| T_i'`; the search box doubles that for slack.
pub fn verify_transference(system: &LinearSystem, u: &[BigInt]) -> Result<TransferOutcome> {
    if !system.satisfied_by(u)? {
        return Err(Error::PreconditionViolated(
            "u does not satisfy the primal system".into(),
        ));
    }
    let transposed = system.transpose_system()?;
    let n1 = system.n() + 1;
    let m = system
        .matrix
        .to_rational()
        .expect("rational coefficients checked at construction");
    let uppers: Vec<Rat> = transposed.bounds.iter().map(|b| b.upper()).collect();
    let mut radii = Vec::with_capacity(n1);
    let mut volume: u64 = 1;
    for j in 0..n1 {
        let mut r = Rat::zero();
        for i in 0..n1 {
            r += m[i][j].abs() * &uppers[i];
        }
        let r = (r * rat_int(2)).ceil().to_integer();
        let r: i64 = i64::try_from(&r)
            .map_err(|_| Error::SearchBudgetExceeded(u64::MAX, TRANSFER_BUDGET))?;
        volume = volume.saturating_mul((2 * r + 1) as u64);
        radii.push(r);
    }
    if volume > TRANSFER_BUDGET {
        return Err(Error::SearchBudgetExceeded(volume, TRANSFER_BUDGET));
    }
    // Odometer over the box; prefer small max-norm witnesses by scanning
    // increasing shells.
    let max_r = radii.iter().copied().max().unwrap_or(0);
    for shell in 1..=max_r {
        let shell_radii: Vec<i64> = radii.iter().map(|&r| r.min(shell)).collect();
        if let Some(v) = scan_shell(&transposed, &shell_radii, shell)? {
            return Ok(TransferOutcome::Witness(v));
        }
    }
    Ok(TransferOutcome::Counterexample { radii })
}

/// Scans points with `||v||_inf == shell` inside the per-coordinate box.
fn scan_shell(system: &LinearSystem, radii: &[i64], shell: i64) -> Result<Option<Vec<BigInt>>> {
    let n = radii.len();
    let mut v = vec![0i64; n];
    for (i, &r) in radii.iter().enumerate() {
        v[i] = -r;
    }
    loop {
        if v.iter().map(|c| c.abs()).max() == Some(shell) {
            let vb: Vec<BigInt> = v.iter().map(|&c| BigInt::from(c)).collect();
            if system.satisfied_by(&vb)? {
                return Ok(Some(vb));
            }
        }
        let mut i = 0;
        loop {
            if i == n {
                return Ok(None);
            }
            if v[i] < radii[i] {
                v[i] += 1;
                break;
            }
            v[i] = -radii[i];
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::rat;

    fn ident_system(n1: usize, t: Rat) -> LinearSystem {
        let bounds = (0..n1).map(|_| Bound::rational(t.clone()).unwrap()).collect();
        LinearSystem::new(Mat::identity(n1), bounds).unwrap()
    }

    #[test]
    fn identity_iota_and_bounds() {
        let s = ident_system(3, rat_int(1));
        let n = s.n();
        assert_eq!(n, 2);
        let t = s.transpose_system().unwrap();
        // iota = 1; bounds (n, 1, 1).
        assert!(t.bounds()[0].admits(&rat_int(2)));
        assert!(!t.bounds()[0].admits(&rat(21, 10)));
        assert!(t.bounds()[1].admits(&rat_int(1)));
        assert!(!t.bounds()[1].admits(&rat(11, 10)));
    }

    #[test]
    fn identity_witness() {
        let s = ident_system(3, rat_int(1));
        let u = vec![BigInt::from(1), BigInt::zero(), BigInt::zero()];
        match verify_transference(&s, &u).unwrap() {
            TransferOutcome::Witness(v) => {
                assert!(s.transpose_system().unwrap().satisfied_by(&v).unwrap());
            }
            TransferOutcome::Counterexample { .. } => panic!("lemma violated on identity"),
        }
    }

    #[test]
    fn double_transpose_restores_matrix() {
        let rows = vec![
            vec![rat_int(5), rat_int(0)],
            vec![rat(7, 1), rat_int(-5)],
        ];
        let bounds = vec![
            Bound::rational(rat_int(5)).unwrap(),
            Bound::rational(rat(1, 5)).unwrap(),
        ];
        let s = LinearSystem::from_rows(&rows, bounds).unwrap();
        let tt = s.transpose_system().unwrap().transpose_system().unwrap();
        assert!(tt.matrix().eq_exact(s.matrix()));
    }

    #[test]
    fn sqrt2_approximant_system() {
        // L0 = u0, L1 = u0 x - u1 with x = 7/5; T0 = 5, T1 = 1/5.
        let x = rat(7, 5);
        let rows = vec![
            vec![rat_int(1), rat_int(0)],
            vec![x.clone(), rat_int(-1)],
        ];
        let bounds = vec![
            Bound::rational(rat_int(5)).unwrap(),
            Bound::rational(rat(1, 5)).unwrap(),
        ];
        let s = LinearSystem::from_rows(&rows, bounds).unwrap();
        // iota^1 = (5 * 1/5)/1 = 1.
        assert!(s.iota().unwrap().admits(&rat_int(1)));
        let t = s.transpose_system().unwrap();
        // Dual forms: v0 + x v1 and -v1 (matrix M^{-T}).
        let tm = t.matrix().to_rational().unwrap();
        assert_eq!(tm[0], vec![rat_int(1), x.clone()]);
        assert_eq!(tm[1], vec![rat_int(0), rat_int(-1)]);
        let u = vec![BigInt::from(5), BigInt::from(7)];
        assert!(s.satisfied_by(&u).unwrap());
        match verify_transference(&s, &u).unwrap() {
            TransferOutcome::Witness(v) => {
                assert!(t.satisfied_by(&v).unwrap());
            }
            TransferOutcome::Counterexample { .. } => panic!("lemma violated"),
        }
    }

    #[test]
    fn golden_ratio_convergent() {
        // phi-hat = (sqrt 5 - 1)/2 ~ 0.618; use the rational stand-in 0.618.
        let phi = rat(618, 1000);
        let t1 = (rat_int(5) * &phi - rat_int(3)).abs();
        let rows = vec![
            vec![rat_int(1), rat_int(0)],
            vec![phi.clone(), rat_int(-1)],
        ];
        let bounds = vec![
            Bound::rational(rat_int(5)).unwrap(),
            Bound::rational(t1).unwrap(),
        ];
        let s = LinearSystem::from_rows(&rows, bounds).unwrap();
        let u = vec![BigInt::from(5), BigInt::from(3)];
        assert!(s.satisfied_by(&u).unwrap());
        match verify_transference(&s, &u).unwrap() {
            TransferOutcome::Witness(v) => {
                let t = s.transpose_system().unwrap();
                assert!(t.satisfied_by(&v).unwrap());
                assert!(v.iter().any(|c| !c.is_zero()));
            }
            TransferOutcome::Counterexample { .. } => panic!("lemma violated"),
        }
    }

    #[test]
    fn rejects_bad_precondition() {
        let s = ident_system(2, rat(1, 10));
        let u = vec![BigInt::from(3), BigInt::zero()];
        assert!(matches!(
            verify_transference(&s, &u),
            Err(Error::PreconditionViolated(_))
        ));
        let zero = vec![BigInt::zero(), BigInt::zero()];
        assert!(matches!(
            verify_transference(&s, &zero),
            Err(Error::PreconditionViolated(_))
        ));
    }

    #[test]
    fn bound_algebra() {
        // (2)^(1/2) * (2)^(1/2) = 2.
        let b = Bound::new(rat_int(2), 2).unwrap();
        let p = b.mul(&b);
        assert!(p.admits(&rat_int(2)));
        assert!(!p.admits(&rat(201, 100)));
        // upper() really is an upper bound.
        assert!(b.upper() >= rat(141421, 100000));
    }
}
