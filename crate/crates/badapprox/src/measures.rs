//! Supports of Ahlfors-regular, absolutely decaying measures: the full cube
//! and products of missing-digit sets (middle-third Cantor included), with
//! exact membership and intersection decisions via digit reasoning.

use std::collections::HashSet;

use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::arith::Ball;
use crate::error::{Error, Result};
use crate::interval::{ln_enclosure, rat, rat_int, rat_pow_i64, Interval, Rat};

/// One coordinate factor: reals in [0,1] whose base-`g` digits all lie in `keep`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DigitSet {
    g: i64,
    keep: Vec<i64>,
}

impl DigitSet {
    pub fn new(g: i64, mut keep: Vec<i64>) -> Result<Self> {
        keep.sort_unstable();
        keep.dedup();
        if g < 2 || keep.len() < 2 || keep.len() as i64 >= g {
            return Err(Error::UnsupportedKind(
                "missing-digit set needs base >= 2 and 2 <= #digits < base".into(),
            ));
        }
        if keep.iter().any(|&c| c < 0 || c >= g) {
            return Err(Error::UnsupportedKind("digit out of range".into()));
        }
        Ok(DigitSet { g, keep })
    }

    pub fn middle_third_cantor() -> Self {
        DigitSet { g: 3, keep: vec![0, 2] }
    }

    pub fn base(&self) -> i64 {
        self.g
    }

    pub fn keep(&self) -> &[i64] {
        &self.keep
    }

    pub fn k(&self) -> i64 {
        self.keep.len() as i64
    }

    fn d_min(&self) -> i64 {
        self.keep[0]
    }

    fn d_max(&self) -> i64 {
        *self.keep.last().unwrap()
    }

    /// Smallest element: all digits d_min.
    pub fn min_val(&self) -> Rat {
        rat(self.d_min(), self.g - 1)
    }

    /// Largest element: all digits d_max.
    pub fn max_val(&self) -> Rat {
        rat(self.d_max(), self.g - 1)
    }

    /// The smallest set element `>= lo`, or None when `lo > max_val`.
    ///
    /// Greedy digit search with backtracking. The "tight" state at depth j is
    /// `(lo - prefix) * g^j`, a rational whose denominator divides that of
    /// `lo`; a repeated tight state means the expansion of `lo` is eventually
    /// periodic within the digit set, i.e. `lo` itself belongs to the set.
    pub fn min_point_at_least(&self, lo: &Rat) -> Option<Rat> {
        let g = rat_int(self.g);
        let tail_max = self.max_val();
        let tail_min = self.min_val();
        if *lo <= tail_min {
            return Some(tail_min);
        }
        if *lo > tail_max {
            return None;
        }
        // Chosen digit indices so far (all "tight": digit value below target).
        let mut stack: Vec<usize> = Vec::new();
        let mut seen: HashSet<Rat> = HashSet::new();
        // rem = (lo - prefix) * g^depth; the next digit must cover rem * g.
        let mut rem = lo.clone();
        loop {
            let target = &rem * &g;
            // Smallest digit whose subtree can reach the target. A feasible
            // subtree always contains its supremum (all digits d_max), so it
            // contains an element >= lo and no backtracking is ever needed.
            let mut chosen = None;
            for (ci, &c) in self.keep.iter().enumerate() {
                let cr = rat_int(c);
                if &cr + &tail_max >= target {
                    chosen = Some((ci, cr));
                    break;
                }
            }
            let Some((ci, cr)) = chosen else {
                // Only possible when lo > max_val, which was handled above.
                unreachable!("feasible subtrees contain their supremum");
            };
            if cr >= target {
                // Digit strictly above the target: the tail below it is free.
                return Some(self.assemble(&stack, Some(cr), &tail_min));
            }
            // Tight descent; cycle detection on the remainder state. A repeat
            // means lo has an eventually periodic expansion inside the digit
            // set, i.e. lo itself is a set element.
            if !seen.insert(rem.clone()) {
                return Some(lo.clone());
            }
            stack.push(ci);
            rem = target - cr;
        }
    }

    /// Value of the chosen digit prefix plus `extra` at the next position and
    /// the minimal tail below that.
    fn assemble(&self, stack: &[usize], extra: Option<Rat>, tail_min: &Rat) -> Rat {
        let g = rat_int(self.g);
        let mut val = Rat::zero();
        let mut scale = Rat::one();
        for ci in stack {
            scale /= &g;
            val += rat_int(self.keep[*ci]) * &scale;
        }
        if let Some(c) = extra {
            scale /= &g;
            val += c * &scale;
        }
        val + tail_min * &scale
    }

    /// Exact membership via the successor query.
    pub fn contains(&self, x: &Rat) -> bool {
        if x.is_negative() || x > &Rat::one() {
            return false;
        }
        self.min_point_at_least(x).as_ref() == Some(x)
    }

    /// Bounds on the natural self-similar measure of `[lo, hi]`, refined to
    /// cylinders of depth `depth` (each carrying mass `k^{-depth}`).
    pub fn measure_interval(&self, lo: &Rat, hi: &Rat, depth: u32) -> (Rat, Rat) {
        if lo > hi {
            return (Rat::zero(), Rat::zero());
        }
        let mut out = (Rat::zero(), Rat::zero());
        self.measure_rec(lo, hi, &Rat::zero(), 0, depth, &mut out);
        out
    }

    fn measure_rec(
        &self,
        lo: &Rat,
        hi: &Rat,
        cyl_lo: &Rat,
        j: u32,
        depth: u32,
        acc: &mut (Rat, Rat),
    ) {
        let scale = rat_pow_i64(&rat(1, self.g), j as i64);
        // Extremes of the set portion inside this cylinder.
        let set_lo = cyl_lo + self.min_val() * &scale;
        let set_hi = cyl_lo + self.max_val() * &scale;
        if &set_lo > hi || &set_hi < lo {
            return;
        }
        let mass = rat_pow_i64(&rat(1, self.k()), j as i64);
        if lo <= &set_lo && &set_hi <= hi {
            acc.0 += &mass;
            acc.1 += &mass;
            return;
        }
        if j == depth {
            acc.1 += &mass;
            return;
        }
        let child_scale = &scale / rat_int(self.g);
        for &c in &self.keep {
            let child_lo = cyl_lo + rat_int(c) * &child_scale;
            self.measure_rec(lo, hi, &child_lo, j + 1, depth, acc);
        }
    }

    /// A uniformly random set element with `depth` random digits and the
    /// minimal tail; exact rational.
    pub fn random_point<R: Rng>(&self, rng: &mut R, depth: u32) -> Rat {
        let g = rat_int(self.g);
        let mut val = Rat::zero();
        let mut scale = Rat::one();
        for _ in 0..depth {
            scale /= &g;
            let c = self.keep[rng.gen_range(0..self.keep.len())];
            val += rat_int(c) * &scale;
        }
        val + self.min_val() * &scale
    }

    /// Depth-`level` grid points (cylinder minima) lying in `[lo, hi]`,
    /// enumerated by digit DFS with interval pruning.
    pub fn grid_in_window(&self, level: u32, lo: &Rat, hi: &Rat) -> Vec<Rat> {
        let mut out = Vec::new();
        let tail = self.min_val() * rat_pow_i64(&rat(1, self.g), level as i64);
        // Points are anchor + tail; shift the window onto anchors.
        let alo = lo - &tail;
        let ahi = hi - &tail;
        self.grid_window_rec(level, 0, &Rat::zero(), &alo, &ahi, &mut out);
        for p in &mut out {
            *p += &tail;
        }
        out
    }

    fn grid_window_rec(
        &self,
        level: u32,
        j: u32,
        anchor: &Rat,
        alo: &Rat,
        ahi: &Rat,
        out: &mut Vec<Rat>,
    ) {
        // Remaining digits can add at most tail_max * g^{-j}.
        let scale = rat_pow_i64(&rat(1, self.g), j as i64);
        let reach = anchor + self.max_val() * &scale;
        if anchor > ahi || &reach < alo {
            return;
        }
        if j == level {
            if anchor >= alo && anchor <= ahi {
                out.push(anchor.clone());
            }
            return;
        }
        let child_scale = &scale / rat_int(self.g);
        for &c in &self.keep {
            let child = anchor + rat_int(c) * &child_scale;
            self.grid_window_rec(level, j + 1, &child, alo, ahi, out);
        }
    }

    /// Anchors of all depth-`level` cylinders, shifted to their set minimum.
    pub fn grid(&self, level: u32) -> Vec<Rat> {
        let g = rat_int(self.g);
        let mut anchors = vec![Rat::zero()];
        let mut scale = Rat::one();
        for _ in 0..level {
            scale /= &g;
            let mut next = Vec::with_capacity(anchors.len() * self.keep.len());
            for a in &anchors {
                for &c in &self.keep {
                    next.push(a + rat_int(c) * &scale);
                }
            }
            anchors = next;
        }
        let tail = self.min_val() * &scale;
        anchors.into_iter().map(|a| a + &tail).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SupportKind {
    FullCube,
    MissingDigitProduct(DigitSet),
}

/// Certified regularity/decay data: the measure is alpha-Ahlfors regular
/// with constant A and absolutely (delta, D)-decaying below scale r0.
#[derive(Clone, Debug)]
pub struct SupportConstants {
    pub alpha: Interval,
    pub big_a: Rat,
    pub delta: Rat,
    pub big_d: Rat,
    pub r0: Rat,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Support {
    d: usize,
    kind: SupportKind,
}

impl Support {
    pub fn full_cube(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::UnsupportedKind("dimension must be positive".into()));
        }
        Ok(Support { d, kind: SupportKind::FullCube })
    }

    pub fn missing_digit_product(d: usize, digits: DigitSet) -> Result<Self> {
        if d == 0 {
            return Err(Error::UnsupportedKind("dimension must be positive".into()));
        }
        Ok(Support {
            d,
            kind: SupportKind::MissingDigitProduct(digits),
        })
    }

    pub fn cantor_product(d: usize) -> Result<Self> {
        Self::missing_digit_product(d, DigitSet::middle_third_cantor())
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn kind(&self) -> &SupportKind {
        &self.kind
    }

    pub fn digits(&self) -> Option<&DigitSet> {
        match &self.kind {
            SupportKind::FullCube => None,
            SupportKind::MissingDigitProduct(ds) => Some(ds),
        }
    }

    /// Regularity and decay constants valid for the natural measure.
    ///
    /// Full cube (Lebesgue on [0,1]^d, max-norm balls): alpha = d, A = 2^d,
    /// delta = 1, D = 2^d. Missing-digit product with k of g digits kept:
    /// alpha = d ln k / ln g, A = (3k)^d, D = 3^d k^{2d}, and delta any
    /// rational lower bound of ln k / ln g (shrinking delta only weakens
    /// the decay inequality since r'/r <= 1).
    pub fn builtin_constants(&self, prec: u32) -> Result<SupportConstants> {
        let d = self.d as i64;
        match &self.kind {
            SupportKind::FullCube => Ok(SupportConstants {
                alpha: Interval::from_i64(d),
                big_a: rat_pow_i64(&rat_int(2), d),
                delta: Rat::one(),
                big_d: rat_pow_i64(&rat_int(2), d),
                r0: rat(1, 2),
            }),
            SupportKind::MissingDigitProduct(ds) => {
                let lnk = ln_enclosure(&rat_int(ds.k()), prec)?;
                let lng = ln_enclosure(&rat_int(ds.base()), prec)?;
                let ratio = lnk.div(&lng)?;
                let alpha = ratio.scale(&rat_int(d));
                // Keep the denominator tiny: comparisons clear this root by
                // raising to its denominator, so delta = floor(64 x)/64.
                let delta = (ratio.lo() * rat_int(64)).floor() / rat_int(64);
                if !delta.is_positive() {
                    return Err(Error::UnsupportedKind("degenerate digit set".into()));
                }
                let k = rat_int(ds.k());
                Ok(SupportConstants {
                    alpha,
                    big_a: rat_pow_i64(&(rat_int(3) * &k), d),
                    delta,
                    big_d: rat_pow_i64(&rat_int(3), d) * rat_pow_i64(&k, 2 * d),
                    r0: rat(1, 2),
                })
            }
        }
    }

    pub fn contains_point(&self, x: &[Rat]) -> bool {
        if x.len() != self.d {
            return false;
        }
        match &self.kind {
            SupportKind::FullCube => x
                .iter()
                .all(|v| !v.is_negative() && v <= &Rat::one()),
            SupportKind::MissingDigitProduct(ds) => x.iter().all(|v| ds.contains(v)),
        }
    }

    /// A support point inside the closed ball, or None when disjoint.
    pub fn witness_point(&self, ball: &Ball) -> Option<Vec<Rat>> {
        if ball.dim() != self.d {
            return None;
        }
        let mut out = Vec::with_capacity(self.d);
        for i in 0..self.d {
            let lo = (&ball.center[i] - &ball.radius).max(Rat::zero());
            let hi = (&ball.center[i] + &ball.radius).min(Rat::one());
            if lo > hi {
                return None;
            }
            match &self.kind {
                SupportKind::FullCube => out.push(lo),
                SupportKind::MissingDigitProduct(ds) => {
                    let p = ds.min_point_at_least(&lo)?;
                    if p > hi {
                        return None;
                    }
                    out.push(p);
                }
            }
        }
        Some(out)
    }

    pub fn intersects_ball(&self, ball: &Ball) -> bool {
        self.witness_point(ball).is_some()
    }

    /// Bounds on the natural product measure of the max-norm ball.
    pub fn measure_ball(&self, ball: &Ball, depth: u32) -> Result<(Rat, Rat)> {
        if ball.dim() != self.d {
            return Err(Error::DimensionMismatch("ball dimension".into()));
        }
        let mut lo_prod = Rat::one();
        let mut hi_prod = Rat::one();
        for i in 0..self.d {
            let lo = (&ball.center[i] - &ball.radius).max(Rat::zero());
            let hi = (&ball.center[i] + &ball.radius).min(Rat::one());
            let (l, h) = self.measure_coord(&lo, &hi, depth);
            lo_prod *= l;
            hi_prod *= h;
        }
        Ok((lo_prod, hi_prod))
    }

    /// Measure of a slab `{x : x_axis in [lo, hi]}` intersected with a ball.
    pub fn measure_slab_in_ball(
        &self,
        ball: &Ball,
        axis: usize,
        slab_lo: &Rat,
        slab_hi: &Rat,
        depth: u32,
    ) -> Result<(Rat, Rat)> {
        if axis >= self.d || ball.dim() != self.d {
            return Err(Error::DimensionMismatch("slab axis".into()));
        }
        let mut lo_prod = Rat::one();
        let mut hi_prod = Rat::one();
        for i in 0..self.d {
            let mut lo = (&ball.center[i] - &ball.radius).max(Rat::zero());
            let mut hi = (&ball.center[i] + &ball.radius).min(Rat::one());
            if i == axis {
                lo = lo.max(slab_lo.clone());
                hi = hi.min(slab_hi.clone());
            }
            if lo > hi {
                return Ok((Rat::zero(), Rat::zero()));
            }
            let (l, h) = self.measure_coord(&lo, &hi, depth);
            lo_prod *= l;
            hi_prod *= h;
        }
        Ok((lo_prod, hi_prod))
    }

    fn measure_coord(&self, lo: &Rat, hi: &Rat, depth: u32) -> (Rat, Rat) {
        if lo > hi {
            return (Rat::zero(), Rat::zero());
        }
        match &self.kind {
            SupportKind::FullCube => {
                let len = hi - lo;
                (len.clone(), len)
            }
            SupportKind::MissingDigitProduct(ds) => ds.measure_interval(lo, hi, depth),
        }
    }

    pub fn random_point<R: Rng>(&self, rng: &mut R, depth: u32) -> Vec<Rat> {
        (0..self.d)
            .map(|_| match &self.kind {
                SupportKind::FullCube => {
                    let num = rng.gen_range(0..=(1i64 << depth.min(40)));
                    rat(num, 1i64 << depth.min(40))
                }
                SupportKind::MissingDigitProduct(ds) => ds.random_point(rng, depth),
            })
            .collect()
    }

    /// Base of the self-similar refinement (2 for the cube, g for digit sets).
    pub fn grid_base(&self) -> i64 {
        match &self.kind {
            SupportKind::FullCube => 2,
            SupportKind::MissingDigitProduct(ds) => ds.base(),
        }
    }

    /// Smallest refinement level whose grid pitch `base^{-level}` is <= `pitch`.
    pub fn level_for_pitch(&self, pitch: &Rat) -> Result<u32> {
        if !pitch.is_positive() {
            return Err(Error::PreconditionViolated("grid pitch must be positive".into()));
        }
        let base = rat_int(self.grid_base());
        let mut level = 0u32;
        let mut p = Rat::one();
        while &p > pitch {
            p /= &base;
            level += 1;
            if level > 200 {
                return Err(Error::PreconditionViolated("grid pitch too small".into()));
            }
        }
        Ok(level)
    }

    /// One-coordinate support grid points at `level` lying in `[lo, hi]`.
    pub fn grid_coords_in_window(&self, level: u32, lo: &Rat, hi: &Rat) -> Vec<Rat> {
        let lo = lo.clone().max(Rat::zero());
        let hi = hi.clone().min(Rat::one());
        if lo > hi {
            return Vec::new();
        }
        match &self.kind {
            SupportKind::FullCube => {
                let n = 1i64 << level.min(40);
                let nr = rat_int(n);
                let first = (&lo * &nr).ceil().to_integer();
                let last = (&hi * &nr).floor().to_integer();
                let mut out = Vec::new();
                let mut i = first;
                while i <= last {
                    out.push(Rat::new(i.clone(), n.into()));
                    i += 1;
                }
                out
            }
            SupportKind::MissingDigitProduct(ds) => ds.grid_in_window(level, &lo, &hi),
        }
    }

    /// One-coordinate grid of support points at the given refinement level.
    pub fn grid_coords(&self, level: u32) -> Vec<Rat> {
        match &self.kind {
            SupportKind::FullCube => {
                let n = 1i64 << level.min(20);
                (0..=n).map(|i| rat(i, n)).collect()
            }
            SupportKind::MissingDigitProduct(ds) => ds.grid(level),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::{exp_enclosure, rat_to_f64, round_down};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cantor() -> DigitSet {
        DigitSet::middle_third_cantor()
    }

    #[test]
    fn cantor_membership() {
        let c = cantor();
        assert!(c.contains(&Rat::zero()));
        assert!(c.contains(&Rat::one()));
        assert!(c.contains(&rat(1, 3)));
        assert!(c.contains(&rat(2, 3)));
        assert!(c.contains(&rat(1, 4))); // 0.020202..._3
        assert!(c.contains(&rat(3, 4))); // 0.202020..._3
        assert!(!c.contains(&rat(1, 2)));
        assert!(!c.contains(&rat(2, 5)));
        assert!(!c.contains(&rat(5, 12)));
    }

    #[test]
    fn cantor_successor_queries() {
        let c = cantor();
        // Just above 1/3 the next point is 2/3.
        assert_eq!(c.min_point_at_least(&rat(2, 5)).unwrap(), rat(2, 3));
        // Successor of a point in the middle gap.
        assert_eq!(c.min_point_at_least(&rat(1, 2)).unwrap(), rat(2, 3));
        // Above the maximum: none.
        assert!(c.min_point_at_least(&rat(11, 10)).is_none());
        // At a set point, returns the point itself.
        assert_eq!(c.min_point_at_least(&rat(1, 4)).unwrap(), rat(1, 4));
        // 3/10 = 0.0220 0220..._3 is itself a Cantor point.
        assert_eq!(c.min_point_at_least(&rat(3, 10)).unwrap(), rat(3, 10));
        // 7/20 = 0.1..._3 starts in the middle gap of [0, 1]: next point 2/3.
        assert_eq!(c.min_point_at_least(&rat(7, 20)).unwrap(), rat(2, 3));
    }

    #[test]
    fn cantor_ball_intersections() {
        let s = Support::cantor_product(1).unwrap();
        // Middle gap: (4/10, 6/10) inside (1/3, 2/3).
        let b = Ball::new(vec![rat(1, 2)], rat(1, 10)).unwrap();
        assert!(!s.intersects_ball(&b));
        let b = Ball::new(vec![Rat::zero()], rat(1, 100)).unwrap();
        let w = s.witness_point(&b).unwrap();
        assert_eq!(w, vec![Rat::zero()]);

        let s2 = Support::cantor_product(2).unwrap();
        let b = Ball::new(vec![Rat::zero(), Rat::zero()], rat(1, 100)).unwrap();
        assert_eq!(s2.witness_point(&b).unwrap(), vec![Rat::zero(), Rat::zero()]);
    }

    #[test]
    fn full_cube_intersections() {
        let s = Support::full_cube(2).unwrap();
        let b = Ball::new(vec![rat(1, 2), rat(1, 2)], rat(1, 10)).unwrap();
        assert!(s.intersects_ball(&b));
        let outside = Ball::new(vec![rat_int(3), rat(1, 2)], rat(1, 2)).unwrap();
        assert!(!s.intersects_ball(&outside));
        let c = s.builtin_constants(64).unwrap();
        assert_eq!(c.alpha.as_rat().unwrap(), &rat_int(2));
        assert_eq!(c.big_a, rat_int(4));
    }

    #[test]
    fn cantor_alpha_value() {
        let s = Support::cantor_product(1).unwrap();
        let c = s.builtin_constants(96).unwrap();
        let a = c.alpha.to_f64();
        assert!((a - 0.6309297535714574).abs() < 1e-9);
        assert!(c.delta.is_positive() && rat_to_f64(&c.delta) <= a);
        // Base-5 keep {0,2,4}: alpha = ln 3 / ln 5.
        let s5 = Support::missing_digit_product(1, DigitSet::new(5, vec![0, 2, 4]).unwrap()).unwrap();
        let c5 = s5.builtin_constants(96).unwrap();
        assert!((c5.alpha.to_f64() - (3f64).ln() / (5f64).ln()).abs() < 1e-9);
    }

    #[test]
    fn cantor_measure_exact_cases() {
        let c = cantor();
        let (lo, hi) = c.measure_interval(&Rat::zero(), &rat(1, 3), 8);
        assert_eq!(lo, rat(1, 2));
        assert_eq!(hi, rat(1, 2));
        let (lo, hi) = c.measure_interval(&rat(2, 5), &rat(3, 5), 8);
        assert_eq!(lo, Rat::zero());
        assert_eq!(hi, Rat::zero());
        let (lo, hi) = c.measure_interval(&Rat::zero(), &Rat::one(), 4);
        assert_eq!(lo, Rat::one());
        assert_eq!(hi, Rat::one());
    }

    /// Monte Carlo Ahlfors-regularity check with the shipped constants.
    #[test]
    fn ahlfors_regularity_spot_check() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for support in [
            Support::cantor_product(1).unwrap(),
            Support::cantor_product(2).unwrap(),
            Support::missing_digit_product(1, DigitSet::new(5, vec![0, 2, 4]).unwrap()).unwrap(),
        ] {
            let c = support.builtin_constants(128).unwrap();
            for _ in 0..60 {
                let x = support.random_point(&mut rng, 12);
                let rho = rat(1, rng.gen_range(3i64..700));
                if rho > c.r0 {
                    continue;
                }
                let ball = Ball::new(x, rho.clone()).unwrap();
                let (mlo, mhi) = support.measure_ball(&ball, 18).unwrap();
                // rho^alpha as an enclosure: exp(alpha ln rho).
                let lnr = ln_enclosure(&rho, 128).unwrap();
                let expo = c.alpha.mul(&lnr);
                let lo_pow = exp_enclosure(&round_down(expo.lo(), 64), 96);
                let hi_pow = exp_enclosure(&crate::interval::round_up(expo.hi(), 64), 96);
                // A^{-1} rho^alpha <= mu(B) <= A rho^alpha.
                assert!(
                    &mhi * &c.big_a >= lo_pow.lo().clone() || mhi >= lo_pow.lo() / &c.big_a,
                    "lower regularity failed"
                );
                assert!(
                    mlo <= hi_pow.hi() * &c.big_a,
                    "upper regularity failed"
                );
            }
        }
    }

    /// Monte Carlo absolute-decay check at axis hyperplanes.
    #[test]
    fn absolute_decay_spot_check() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for support in [
            Support::cantor_product(1).unwrap(),
            Support::cantor_product(2).unwrap(),
        ] {
            let c = support.builtin_constants(128).unwrap();
            for _ in 0..40 {
                let x = support.random_point(&mut rng, 10);
                let r = rat(1, rng.gen_range(4i64..200));
                if r > c.r0 {
                    continue;
                }
                let rp = &r / rat_int(rng.gen_range(2i64..20));
                let axis = rng.gen_range(0..support.dim());
                // Hyperplane through a nearby support coordinate.
                let h = x[axis].clone();
                let ball = Ball::new(x.clone(), r.clone()).unwrap();
                let (_, slab_hi) = support
                    .measure_slab_in_ball(&ball, axis, &(&h - &rp), &(&h + &rp), 16)
                    .unwrap();
                let (ball_lo, _) = support.measure_ball(&ball, 16).unwrap();
                if ball_lo.is_zero() {
                    continue;
                }
                // mu(slab cap ball) <= D (r'/r)^delta mu(ball).
                // Compare exactly after clearing the rational power delta.
                let ratio = &slab_hi / &ball_lo;
                let rr = &rp / &r;
                let lhs_ok = crate::arith::cmp_pow_rat(
                    &rr,
                    &c.delta,
                    &(&ratio / &c.big_d),
                )
                .map(|o| o != std::cmp::Ordering::Less)
                .unwrap_or(true);
                assert!(lhs_ok, "decay inequality failed");
            }
        }
    }

    #[test]
    fn grids_are_support_points() {
        let s = Support::cantor_product(1).unwrap();
        let g = s.grid_coords(3);
        assert_eq!(g.len(), 8);
        for p in &g {
            assert!(s.contains_point(&[p.clone()]));
        }
    }
}
