//! Constructors for the diagonal flows and unipotent matrices the strategy
//! and the curve experiments act with: `a_y`, `d_y`, `u_x` for the game
//! analysis, and `g_t`, `g_{c,k}`, `u_1(x)`, `~u_1(x)` for the curve side.

use crate::arith::{SortedWeight, Weight};
use crate::error::{Error, Result};
use crate::interval::{exp_enclosure, rat_int, rational_pow, Interval, Rat};
use crate::mat::Mat;
use num_traits::{One, Signed};

/// Parameters of the base-`b` diagonal flow: `beta = b^{-(1+w_1)}`.
#[derive(Clone, Debug)]
pub struct FlowParams3 {
    b: Rat,
    weight: Weight,
    sorted: SortedWeight,
}

impl FlowParams3 {
    pub fn new(b: Rat, weight: Weight) -> Result<Self> {
        if b <= Rat::one() {
            return Err(Error::PreconditionViolated("flow base b must exceed 1".into()));
        }
        weight.require_positive()?;
        let sorted = weight.sorted();
        Ok(FlowParams3 { b, weight, sorted })
    }

    pub fn b(&self) -> &Rat {
        &self.b
    }

    pub fn weight(&self) -> &Weight {
        &self.weight
    }

    pub fn sorted(&self) -> &SortedWeight {
        &self.sorted
    }

    pub fn d(&self) -> usize {
        self.weight.dim()
    }

    /// Multiplicity of the maximal weight.
    pub fn t(&self) -> usize {
        self.sorted.t()
    }

    /// Exponent translation: `beta^e = b^{-(1+w_1) e}`.
    pub fn beta_exponent_to_b(&self, e: &Rat) -> Rat {
        -(Rat::one() + self.sorted.max()) * e
    }

    /// Enclosure of `b^e` for rational `e`.
    pub fn b_pow(&self, e: &Rat, prec: u32) -> Result<Interval> {
        rational_pow(&self.b, e, prec)
    }

    /// Enclosure of `beta^e` for rational `e`.
    pub fn beta_pow(&self, e: &Rat, prec: u32) -> Result<Interval> {
        let be = self.beta_exponent_to_b(e);
        rational_pow(&self.b, &be, prec)
    }

    /// Enclosure of `beta` itself.
    pub fn beta(&self, prec: u32) -> Result<Interval> {
        self.beta_pow(&Rat::one(), prec)
    }
}

/// `a_y = diag{b^y, b^{-w_1 y}, ..., b^{-w_d y}}` (sorted weights).
pub fn make_a(y: &Rat, params: &FlowParams3, prec: u32) -> Result<Mat> {
    let d = params.d();
    let mut entries = Vec::with_capacity(d + 1);
    entries.push(params.b_pow(y, prec)?);
    for i in 1..=d {
        let e = -params.sorted().get(i) * y;
        entries.push(params.b_pow(&e, prec)?);
    }
    Ok(Mat::diag(entries))
}

/// `d_y = diag{beta^{ty/(d+1)}, beta^{-(d+1-t)y/(d+1)} (t times), beta^{ty/(d+1)} (d-t times)}`.
pub fn make_d(y: &Rat, params: &FlowParams3, prec: u32) -> Result<Mat> {
    let d = params.d();
    let t = params.t();
    let dp1 = rat_int(d as i64 + 1);
    let contract = rat_int(t as i64) * y / &dp1;
    let expand = -rat_int((d + 1 - t) as i64) * y / &dp1;
    let mut entries = Vec::with_capacity(d + 1);
    entries.push(params.beta_pow(&contract, prec)?);
    for _ in 0..t {
        entries.push(params.beta_pow(&expand, prec)?);
    }
    for _ in 0..(d - t) {
        entries.push(params.beta_pow(&contract, prec)?);
    }
    Ok(Mat::diag(entries))
}

/// `u_x = [[1, x^T], [0, I_d]]`; exact.
pub fn make_u(x: &[Rat]) -> Mat {
    let d = x.len();
    let mut m = Mat::identity(d + 1);
    for (j, xi) in x.iter().enumerate() {
        m.set(0, j + 1, Interval::point(xi.clone()));
    }
    m
}

/// `g_t = diag{e^{w_n t}, ..., e^{w_1 t}, e^{-t}}` for a weight of dim n.
pub fn make_g_t(t: &Rat, w: &Weight, prec: u32) -> Result<Mat> {
    if t.is_negative() {
        return Err(Error::PreconditionViolated("g_t needs t >= 0".into()));
    }
    let n = w.dim();
    let mut entries = Vec::with_capacity(n + 1);
    for i in (0..n).rev() {
        entries.push(exp_enclosure(&(w.get(i) * t), prec));
    }
    entries.push(exp_enclosure(&(-t), prec));
    Ok(Mat::diag(entries))
}

/// `g_{c,k} = diag{c^{-1}k (m times), c^{(m+1)/d} k^{-m/d} (d times), c^{-1}}`.
pub fn make_g_ck(c: &Rat, k: u64, d: usize, m: usize, prec: u32) -> Result<Mat> {
    if !c.is_positive() || c >= &Rat::one() {
        return Err(Error::PreconditionViolated("g_{c,k} needs 0 < c < 1".into()));
    }
    if k == 0 || m == 0 || d == 0 {
        return Err(Error::PreconditionViolated("g_{c,k} needs k >= 1, d >= 1, m >= 1".into()));
    }
    let kq = rat_int(k as i64);
    let lead = Interval::point(c.recip() * &kq);
    let mid = rational_pow(c, &Rat::new((m as i64 + 1).into(), (d as i64).into()), prec)?
        .mul(&rational_pow(&kq, &Rat::new((-(m as i64)).into(), (d as i64).into()), prec)?);
    let last = Interval::point(c.recip());
    let mut entries = Vec::with_capacity(m + d + 1);
    for _ in 0..m {
        entries.push(lead.clone());
    }
    for _ in 0..d {
        entries.push(mid.clone());
    }
    entries.push(last);
    Ok(Mat::diag(entries))
}

/// Evaluation data of the curve `x -> (x, f_1(x), ..., f_m(x))` at a point.
#[derive(Clone, Debug)]
pub struct CurveFrame {
    pub x: Vec<Rat>,
    pub f_values: Vec<Rat>,
    /// `J[i][j] = d f_{i+1} / d x_{j+1}` at `x` (m rows, d columns).
    pub jacobian: Vec<Vec<Rat>>,
}

impl CurveFrame {
    pub fn new(x: Vec<Rat>, f_values: Vec<Rat>, jacobian: Vec<Vec<Rat>>) -> Result<Self> {
        let d = x.len();
        let m = f_values.len();
        if jacobian.len() != m || jacobian.iter().any(|row| row.len() != d) {
            return Err(Error::DimensionMismatch("jacobian must be m x d".into()));
        }
        if d == 0 || m == 0 {
            return Err(Error::DimensionMismatch("curve frame needs d >= 1, m >= 1".into()));
        }
        Ok(CurveFrame { x, f_values, jacobian })
    }

    pub fn d(&self) -> usize {
        self.x.len()
    }

    pub fn m(&self) -> usize {
        self.f_values.len()
    }

    pub fn n(&self) -> usize {
        self.d() + self.m()
    }

    /// `h(x) = f(x) - J(x) x^T`.
    pub fn h(&self) -> Vec<Rat> {
        self.jacobian
            .iter()
            .zip(&self.f_values)
            .map(|(row, f)| f - row.iter().zip(&self.x).map(|(a, b)| a * b).sum::<Rat>())
            .collect()
    }
}

fn set_block(m: &mut Mat, r0: usize, c0: usize, rows: &[Vec<Rat>]) {
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            m.set(r0 + i, c0 + j, Interval::point(v.clone()));
        }
    }
}

/// Reverses rows (left multiplication by the antidiagonal permutation).
fn rev_rows(rows: &[Vec<Rat>]) -> Vec<Vec<Rat>> {
    rows.iter().rev().cloned().collect()
}

/// Reverses columns (right multiplication by the antidiagonal permutation).
fn rev_cols(rows: &[Vec<Rat>]) -> Vec<Vec<Rat>> {
    rows.iter()
        .map(|r| r.iter().rev().cloned().collect())
        .collect()
}

/// `u_1(x) = [[I_m, -s_m J(x) s_d, s_m h(x)^T], [0, I_d, s_d x^T], [0, 0, 1]]`
/// with `s_k` the antidiagonal permutation (self-inverse).
pub fn make_u1(frame: &CurveFrame) -> Mat {
    let (d, m, n) = (frame.d(), frame.m(), frame.n());
    let mut out = Mat::identity(n + 1);
    let neg_j: Vec<Vec<Rat>> = frame
        .jacobian
        .iter()
        .map(|row| row.iter().map(|v| -v.clone()).collect())
        .collect();
    set_block(&mut out, 0, m, &rev_cols(&rev_rows(&neg_j)));
    let h = frame.h();
    let h_col: Vec<Vec<Rat>> = h.iter().rev().map(|v| vec![v.clone()]).collect();
    set_block(&mut out, 0, m + d, &h_col);
    let x_col: Vec<Vec<Rat>> = frame.x.iter().rev().map(|v| vec![v.clone()]).collect();
    set_block(&mut out, m, m + d, &x_col);
    out
}

/// `~u_1(x)`: same as `u_1(x)` with the top-right and middle-right blocks zeroed.
pub fn make_u1_tilde(frame: &CurveFrame) -> Mat {
    let (m, n) = (frame.m(), frame.n());
    let mut out = Mat::identity(n + 1);
    let neg_j: Vec<Vec<Rat>> = frame
        .jacobian
        .iter()
        .map(|row| row.iter().map(|v| -v.clone()).collect())
        .collect();
    set_block(&mut out, 0, m, &rev_cols(&rev_rows(&neg_j)));
    out
}

/// The dual `u_1*(x) = [[1, -x, -f(x)], [0, I_d, J(x)], [0, 0, I_m]]`,
/// written out directly from its closed form.
pub fn make_u1_star(frame: &CurveFrame) -> Mat {
    let (d, m, n) = (frame.d(), frame.m(), frame.n());
    let mut out = Mat::identity(n + 1);
    for (j, xi) in frame.x.iter().enumerate() {
        out.set(0, 1 + j, Interval::point(-xi.clone()));
    }
    for (j, fi) in frame.f_values.iter().enumerate() {
        out.set(0, 1 + d + j, Interval::point(-fi.clone()));
    }
    let jac: Vec<Vec<Rat>> = (0..d)
        .map(|r| (0..m).map(|c| frame.jacobian[c][r].clone()).collect())
        .collect();
    set_block(&mut out, 1, 1 + d, &jac);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::rat;
    use crate::mat::dual_star;
    use num_traits::Zero;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params_d1() -> FlowParams3 {
        FlowParams3::new(rat_int(2), Weight::new(vec![rat_int(1)]).unwrap()).unwrap()
    }

    fn params_d2() -> FlowParams3 {
        FlowParams3::new(rat_int(2), Weight::new(vec![rat(2, 3), rat(1, 3)]).unwrap()).unwrap()
    }

    fn assert_close_to_one(v: &Interval) {
        assert!(v.lo() <= &rat_int(1) && &rat_int(1) <= v.hi(), "det should enclose 1");
        assert!(v.width() < rat(1, 1_000_000), "det enclosure too wide");
    }

    #[test]
    fn make_a_examples() {
        let p = params_d1();
        let id = make_a(&Rat::zero(), &p, 64).unwrap();
        assert!(id.eq_exact(&Mat::identity(2)));
        let a1 = make_a(&Rat::one(), &p, 64).unwrap();
        assert_eq!(a1.get(0, 0).as_rat().unwrap(), &rat_int(2));
        assert_eq!(a1.get(1, 1).as_rat().unwrap(), &rat(1, 2));

        let p = FlowParams3::new(rat_int(4), Weight::new(vec![rat(1, 2), rat(1, 2)]).unwrap()).unwrap();
        let a = make_a(&Rat::one(), &p, 64).unwrap();
        assert_eq!(a.get(0, 0).as_rat().unwrap(), &rat_int(4));
        assert_eq!(a.get(1, 1).as_rat().unwrap(), &rat(1, 2));
        assert_eq!(a.get(2, 2).as_rat().unwrap(), &rat(1, 2));
    }

    #[test]
    fn make_d_structure() {
        // d=2, t=1, w=(2/3,1/3): diag(beta^{1/3}, beta^{-2/3}, beta^{1/3}).
        let p = params_d2();
        let dm = make_d(&Rat::one(), &p, 96).unwrap();
        let b13 = p.beta_pow(&rat(1, 3), 96).unwrap();
        let bm23 = p.beta_pow(&rat(-2, 3), 96).unwrap();
        assert!(dm.get(0, 0).lo() <= b13.hi() && b13.lo() <= dm.get(0, 0).hi());
        assert!(dm.get(1, 1).lo() <= bm23.hi() && bm23.lo() <= dm.get(1, 1).hi());
        assert!(dm.get(2, 2).lo() <= b13.hi() && b13.lo() <= dm.get(2, 2).hi());
        assert_close_to_one(&dm.det().unwrap());
        let id = make_d(&Rat::zero(), &p, 64).unwrap();
        assert!(id.eq_exact(&Mat::identity(3)));
    }

    #[test]
    fn u_x_group_law() {
        let x = vec![rat(1, 3)];
        let u = make_u(&x);
        assert_eq!(u.get(0, 1).as_rat().unwrap(), &rat(1, 3));
        let y = vec![rat(1, 6)];
        let sum = vec![rat(1, 2)];
        assert!(make_u(&x).mul(&make_u(&y)).unwrap().eq_exact(&make_u(&sum)));
        assert!(make_u(&[Rat::zero(), Rat::zero()]).eq_exact(&Mat::identity(3)));
    }

    #[test]
    fn g_t_structure_and_composition() {
        let w = Weight::new(vec![rat(1, 2), rat(1, 2)]).unwrap();
        let g2 = make_g_t(&rat_int(2), &w, 96).unwrap();
        let e1 = exp_enclosure(&rat_int(1), 96);
        assert!(g2.get(0, 0).lo() <= e1.hi() && e1.lo() <= g2.get(0, 0).hi());
        assert!(g2.get(1, 1).lo() <= e1.hi() && e1.lo() <= g2.get(1, 1).hi());
        assert_close_to_one(&g2.det().unwrap());
        // Flow composition g_{t1+t2} = g_{t1} g_{t2} within enclosures.
        let a = make_g_t(&rat(1, 2), &w, 96).unwrap();
        let b = make_g_t(&rat(3, 2), &w, 96).unwrap();
        let prod = a.mul(&b).unwrap();
        for i in 0..3 {
            let lhs = g2.get(i, i);
            let rhs = prod.get(i, i);
            assert!(lhs.lo() <= rhs.hi() && rhs.lo() <= lhs.hi());
        }
    }

    #[test]
    fn g_ck_example_and_determinant() {
        let g = make_g_ck(&rat(1, 2), 2, 1, 1, 64).unwrap();
        assert_eq!(g.get(0, 0).as_rat().unwrap(), &rat_int(4));
        assert_eq!(g.get(1, 1).as_rat().unwrap(), &rat(1, 8));
        assert_eq!(g.get(2, 2).as_rat().unwrap(), &rat_int(2));
        assert_eq!(g.det().unwrap().as_rat().unwrap(), &rat_int(1));
        assert!(make_g_ck(&rat(1, 2), 2, 1, 0, 64).is_err());
    }

    #[test]
    fn g_ck_det_is_one_randomized() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let num = rng.gen_range(1i64..50);
            let den = rng.gen_range(50i64..200);
            let c = rat(num, den);
            let k = rng.gen_range(1u64..20);
            let d = rng.gen_range(1usize..4);
            let m = rng.gen_range(1usize..4);
            let g = make_g_ck(&c, k, d, m, 128).unwrap();
            assert_close_to_one(&g.det().unwrap());
        }
    }

    fn parabola_frame(x: Rat) -> CurveFrame {
        // d=1, m=1, f(x) = x^2, J = 2x, h = x^2 - 2x*x = -x^2.
        let f = &x * &x;
        let j = rat_int(2) * &x;
        CurveFrame::new(vec![x], vec![f], vec![vec![j]]).unwrap()
    }

    #[test]
    fn u1_star_matches_display() {
        let fr = parabola_frame(rat(1, 2));
        let star = make_u1_star(&fr);
        let expect = Mat::from_rational_rows(&[
            vec![rat_int(1), rat(-1, 2), rat(-1, 4)],
            vec![rat_int(0), rat_int(1), rat_int(1)],
            vec![rat_int(0), rat_int(0), rat_int(1)],
        ])
        .unwrap();
        assert!(star.eq_exact(&expect));
        // And it agrees with dual_star of the constructed u_1.
        let u1 = make_u1(&fr);
        assert!(dual_star(&u1).unwrap().eq_exact(&expect));

        let at0 = make_u1_star(&parabola_frame(Rat::zero()));
        assert!(at0.eq_exact(&Mat::identity(3)));
    }

    #[test]
    fn dual_identity_random_frames() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let d = rng.gen_range(1usize..3);
            let m = rng.gen_range(1usize..3);
            let r = |rng: &mut ChaCha8Rng| rat(rng.gen_range(-9i64..=9), rng.gen_range(1i64..=9));
            let x: Vec<Rat> = (0..d).map(|_| r(&mut rng)).collect();
            let f: Vec<Rat> = (0..m).map(|_| r(&mut rng)).collect();
            let jac: Vec<Vec<Rat>> = (0..m).map(|_| (0..d).map(|_| r(&mut rng)).collect()).collect();
            let fr = CurveFrame::new(x, f, jac).unwrap();
            let u1 = make_u1(&fr);
            assert_eq!(u1.det().unwrap().as_rat().unwrap(), &rat_int(1));
            assert!(dual_star(&u1).unwrap().eq_exact(&make_u1_star(&fr)));
        }
    }

    #[test]
    fn dual_star_of_a_flow() {
        let p = params_d2();
        let a = make_a(&rat_int(3), &p, 128).unwrap();
        let s = dual_star(&a).unwrap();
        // Diagonal case: reversed order, inverted entries.
        for i in 0..3 {
            let expect = a.get(2 - i, 2 - i).recip().unwrap();
            let got = s.get(i, i);
            assert!(got.lo() <= expect.hi() && expect.lo() <= got.hi());
        }
    }
}
