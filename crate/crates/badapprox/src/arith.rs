//! Nearest-integer distance, weight vectors, and exact rectangle/ball
//! geometry in the max norm.

use std::cmp::Ordering;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::{format_rat, parse_rat, rat, rat_pow_i64, Rat};

/// Distance from `x` to the nearest integer, in `[0, 1/2]`.
pub fn dist_to_z(x: &Rat) -> Rat {
    let frac = x - x.floor();
    let other = Rat::one() - &frac;
    frac.min(other)
}

/// Compares `x^(a/b)` with `y` exactly for positive rationals `x`, `y` and `b > 0`.
///
/// Clears the root: `x^(a/b) <=> y` iff `x^a <=> y^b` (the map `z -> z^b` is
/// increasing on positives).
pub fn cmp_pow(x: &Rat, a: i64, b: i64, y: &Rat) -> Result<Ordering> {
    if !x.is_positive() || !y.is_positive() || b <= 0 {
        return Err(Error::PreconditionViolated(
            "cmp_pow needs positive base, target, and root".into(),
        ));
    }
    Ok(rat_pow_i64(x, a).cmp(&rat_pow_i64(y, b)))
}

/// Compares `x^e` with `y` exactly for a rational exponent `e`.
pub fn cmp_pow_rat(x: &Rat, e: &Rat, y: &Rat) -> Result<Ordering> {
    let a: i64 = e
        .numer()
        .try_into()
        .map_err(|_| Error::PreconditionViolated("exponent numerator too large".into()))?;
    let b: i64 = e
        .denom()
        .try_into()
        .map_err(|_| Error::PreconditionViolated("exponent denominator too large".into()))?;
    cmp_pow(x, a, b, y)
}

/// A weight vector: `d` nonnegative rationals summing to one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Weight {
    entries: Vec<Rat>,
}

impl Weight {
    pub fn new(entries: Vec<Rat>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Config("weight vector must be nonempty".into()));
        }
        if entries.iter().any(|w| w.is_negative()) {
            return Err(Error::Config("weights must be nonnegative".into()));
        }
        let sum: Rat = entries.iter().sum();
        if !sum.is_one() {
            return Err(Error::Config(format!(
                "weights must sum to 1, got {}",
                format_rat(&sum)
            )));
        }
        Ok(Weight { entries })
    }

    /// Equal weights `(1/d, ..., 1/d)`.
    pub fn uniform(d: usize) -> Self {
        Weight {
            entries: vec![rat(1, d as i64); d],
        }
    }

    pub fn parse(parts: &[&str]) -> Result<Self> {
        let entries = parts.iter().map(|s| parse_rat(s)).collect::<Result<Vec<_>>>()?;
        Weight::new(entries)
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Rat] {
        &self.entries
    }

    pub fn get(&self, i: usize) -> &Rat {
        &self.entries[i]
    }

    /// Requires every weight strictly positive (needed whenever `1/w_i` appears).
    pub fn require_positive(&self) -> Result<()> {
        if self.entries.iter().any(|w| !w.is_positive()) {
            return Err(Error::PreconditionViolated(
                "all weights must be strictly positive".into(),
            ));
        }
        Ok(())
    }

    /// Nonincreasing rearrangement with the permutation applied and the
    /// multiplicity `t` of the maximum weight.
    pub fn sorted(&self) -> SortedWeight {
        let mut idx: Vec<usize> = (0..self.entries.len()).collect();
        idx.sort_by(|&a, &b| self.entries[b].cmp(&self.entries[a]).then(a.cmp(&b)));
        let entries: Vec<Rat> = idx.iter().map(|&i| self.entries[i].clone()).collect();
        let t = entries.iter().take_while(|w| **w == entries[0]).count();
        SortedWeight {
            entries,
            perm: idx,
            t,
        }
    }
}

/// Sorted view of a weight vector: `w_1 >= ... >= w_d`, with `t` the number
/// of entries equal to the maximum. `w_{d+1} := 0` is the formal sentinel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SortedWeight {
    entries: Vec<Rat>,
    /// `perm[k]` is the original index of the k-th largest weight.
    perm: Vec<usize>,
    t: usize,
}

impl SortedWeight {
    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Rat] {
        &self.entries
    }

    /// 1-based access matching the usual subscripts; `get(d+1)` returns 0.
    pub fn get(&self, i: usize) -> Rat {
        if i >= 1 && i <= self.entries.len() {
            self.entries[i - 1].clone()
        } else if i == self.entries.len() + 1 {
            Rat::zero()
        } else {
            panic!("weight index {i} out of range");
        }
    }

    pub fn max(&self) -> &Rat {
        &self.entries[0]
    }

    pub fn min(&self) -> &Rat {
        self.entries.last().unwrap()
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn t(&self) -> usize {
        self.t
    }
}

/// Axis-aligned closed rectangle with exact rational corners.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rect {
    lo: Vec<Rat>,
    hi: Vec<Rat>,
}

impl Rect {
    pub fn new(lo: Vec<Rat>, hi: Vec<Rat>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch("rectangle corner lengths differ".into()));
        }
        if lo.iter().zip(&hi).any(|(a, b)| a > b) {
            return Err(Error::PreconditionViolated("rectangle with lo > hi".into()));
        }
        Ok(Rect { lo, hi })
    }

    /// Rectangle `{x : |x_i - c_i| <= h_i}`.
    pub fn centered(center: &[Rat], half_sides: &[Rat]) -> Result<Self> {
        if center.len() != half_sides.len() {
            return Err(Error::DimensionMismatch("center/half-side lengths differ".into()));
        }
        if half_sides.iter().any(|h| h.is_negative()) {
            return Err(Error::PreconditionViolated("negative half side".into()));
        }
        let lo = center.iter().zip(half_sides).map(|(c, h)| c - h).collect();
        let hi = center.iter().zip(half_sides).map(|(c, h)| c + h).collect();
        Ok(Rect { lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[Rat] {
        &self.lo
    }

    pub fn hi(&self) -> &[Rat] {
        &self.hi
    }

    pub fn center(&self) -> Vec<Rat> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(a, b)| (a + b) / rat(2, 1))
            .collect()
    }

    pub fn side(&self, i: usize) -> Rat {
        &self.hi[i] - &self.lo[i]
    }

    /// Scales every side by `c` about the center.
    pub fn scale(&self, c: &Rat) -> Rect {
        let center = self.center();
        let lo = center
            .iter()
            .zip(&self.lo)
            .map(|(m, a)| m + (a - m) * c)
            .collect();
        let hi = center
            .iter()
            .zip(&self.hi)
            .map(|(m, b)| m + (b - m) * c)
            .collect();
        Rect { lo, hi }
    }

    pub fn contains_point(&self, x: &[Rat]) -> bool {
        self.lo.iter().zip(x).all(|(a, v)| a <= v)
            && self.hi.iter().zip(x).all(|(b, v)| v <= b)
    }

    pub fn contains_rect(&self, other: &Rect) -> bool {
        self.lo.iter().zip(&other.lo).all(|(a, b)| a <= b)
            && self.hi.iter().zip(&other.hi).all(|(a, b)| b <= a)
    }

    /// Closed rectangles intersect iff every axis interval overlaps.
    pub fn intersects(&self, other: &Rect) -> bool {
        self.lo.iter().zip(&other.hi).all(|(a, b)| a <= b)
            && other.lo.iter().zip(&self.hi).all(|(a, b)| a <= b)
    }

    pub fn intersection(&self, other: &Rect) -> Option<Rect> {
        if !self.intersects(other) {
            return None;
        }
        let lo = self
            .lo
            .iter()
            .zip(&other.lo)
            .map(|(a, b)| a.clone().max(b.clone()))
            .collect();
        let hi = self
            .hi
            .iter()
            .zip(&other.hi)
            .map(|(a, b)| a.clone().min(b.clone()))
            .collect();
        Some(Rect { lo, hi })
    }
}

/// Closed max-norm ball with exact rational center and radius.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Vec<Rat>,
    pub radius: Rat,
}

impl Ball {
    pub fn new(center: Vec<Rat>, radius: Rat) -> Result<Self> {
        if radius.is_negative() {
            return Err(Error::PreconditionViolated("negative ball radius".into()));
        }
        Ok(Ball { center, radius })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn to_rect(&self) -> Rect {
        let half = vec![self.radius.clone(); self.center.len()];
        Rect::centered(&self.center, &half).expect("valid ball")
    }

    pub fn contains_point(&self, x: &[Rat]) -> bool {
        self.center
            .iter()
            .zip(x)
            .all(|(c, v)| (c - v).abs() <= self.radius)
    }

    pub fn contains_ball(&self, other: &Ball) -> bool {
        self.center
            .iter()
            .zip(&other.center)
            .all(|(a, b)| (a - b).abs() + &other.radius <= self.radius)
    }

    /// Closed balls are disjoint iff some coordinate gap exceeds the radius sum.
    pub fn disjoint(&self, other: &Ball) -> bool {
        let sum = &self.radius + &other.radius;
        self.center
            .iter()
            .zip(&other.center)
            .any(|(a, b)| (a - b).abs() > sum)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::rat_int;
    use proptest::prelude::*;

    #[test]
    fn dist_to_z_examples() {
        assert_eq!(dist_to_z(&rat(23, 10)), rat(3, 10));
        assert_eq!(dist_to_z(&rat_int(7)), Rat::zero());
        assert_eq!(dist_to_z(&rat(-1, 2)), rat(1, 2));
    }

    #[test]
    fn sort_weight_examples() {
        let w = Weight::new(vec![rat(1, 3), rat(2, 3)]).unwrap();
        let s = w.sorted();
        assert_eq!(s.entries(), &[rat(2, 3), rat(1, 3)]);
        assert_eq!(s.perm(), &[1, 0]);
        assert_eq!(s.t(), 1);

        let w = Weight::new(vec![rat(1, 2), rat(1, 2)]).unwrap();
        let s = w.sorted();
        assert_eq!(s.perm(), &[0, 1]);
        assert_eq!(s.t(), 2);

        let w = Weight::new(vec![rat(1, 5), rat(1, 2), rat(3, 10)]).unwrap();
        let s = w.sorted();
        assert_eq!(s.entries(), &[rat(1, 2), rat(3, 10), rat(1, 5)]);
        assert_eq!(s.t(), 1);
        // Sentinel w_{d+1} = 0.
        assert_eq!(s.get(4), Rat::zero());
    }

    #[test]
    fn weight_rejects_bad_input() {
        assert!(Weight::new(vec![rat(1, 2), rat(1, 3)]).is_err());
        assert!(Weight::new(vec![rat(3, 2), rat(-1, 2)]).is_err());
        assert!(Weight::new(vec![]).is_err());
    }

    #[test]
    fn cmp_pow_clears_roots() {
        // 2^(3/2) vs 3: 8 vs 9 -> less.
        assert_eq!(cmp_pow(&rat_int(2), 3, 2, &rat_int(3)).unwrap(), Ordering::Less);
        // 4^(1/2) = 2.
        assert_eq!(cmp_pow(&rat_int(4), 1, 2, &rat_int(2)).unwrap(), Ordering::Equal);
        // (1/2)^(-2/3) vs 3/2: 4 vs 27/8 -> greater.
        assert_eq!(
            cmp_pow(&rat(1, 2), -2, 3, &rat(3, 2)).unwrap(),
            Ordering::Greater
        );
    }

    #[test]
    fn rect_scaling_about_center() {
        let r = Rect::new(vec![rat_int(0), rat_int(1)], vec![rat_int(2), rat_int(5)]).unwrap();
        let s = r.scale(&rat(1, 2));
        assert_eq!(s.lo(), &[rat(1, 2), rat_int(2)]);
        assert_eq!(s.hi(), &[rat(3, 2), rat_int(4)]);
        assert_eq!(s.center(), r.center());
    }

    #[test]
    fn ball_geometry() {
        let a = Ball::new(vec![rat_int(0)], rat_int(1)).unwrap();
        let b = Ball::new(vec![rat(5, 2)], rat_int(1)).unwrap();
        assert!(a.disjoint(&b));
        let c = Ball::new(vec![rat_int(2)], rat_int(1)).unwrap();
        assert!(!a.disjoint(&c)); // closed balls touching at x = 1
        let inner = Ball::new(vec![rat(1, 2)], rat(1, 2)).unwrap();
        assert!(a.contains_ball(&inner));
        assert!(!inner.contains_ball(&a));
    }

    proptest! {
        #[test]
        fn dist_to_z_shift_and_reflect(n in -500i64..500, d in 1i64..60, k in -5i64..5) {
            let x = rat(n, d);
            let shifted = &x + rat_int(k);
            prop_assert_eq!(dist_to_z(&x), dist_to_z(&shifted));
            prop_assert_eq!(dist_to_z(&x), dist_to_z(&(-&x)));
            let v = dist_to_z(&x);
            prop_assert!(v >= Rat::zero() && v <= rat(1, 2));
        }

        #[test]
        fn rect_intersection_is_symmetric_and_contained(
            a in -10i64..10, b in -10i64..10, c in -10i64..10, e in -10i64..10,
            w1 in 1i64..8, w2 in 1i64..8, w3 in 1i64..8, w4 in 1i64..8,
        ) {
            let r1 = Rect::new(vec![rat_int(a), rat_int(b)], vec![rat_int(a + w1), rat_int(b + w2)]).unwrap();
            let r2 = Rect::new(vec![rat_int(c), rat_int(e)], vec![rat_int(c + w3), rat_int(e + w4)]).unwrap();
            prop_assert_eq!(r1.intersects(&r2), r2.intersects(&r1));
            if let Some(ix) = r1.intersection(&r2) {
                prop_assert!(r1.contains_rect(&ix));
                prop_assert!(r2.contains_rect(&ix));
            }
        }
    }
}
