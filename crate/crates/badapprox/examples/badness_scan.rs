//! Scans approximation quality: the golden ratio (the canonical badly
//! approximable number), a rational point (quality collapses to zero), and a
//! dual-form instance, printing the running-infimum curves.

use badapprox::arith::Weight;
use badapprox::badeval::{curve_to_csv, dual_quality, simul_quality};
use badapprox::interval::{rat, rat_int, Rat};
use num_traits::One;

fn dyadic(v: f64) -> Rat {
    let den: i64 = 1 << 40;
    rat((v * den as f64) as i64, den)
}

fn main() -> badapprox::Result<()> {
    let w1 = Weight::new(vec![rat_int(1)])?;

    // Golden ratio minus one: tail infimum approaches 1/sqrt(5).
    let phi = dyadic((5f64.sqrt() - 1.0) / 2.0);
    let report = simul_quality(&[phi], &[Rat::one() - Rat::one()], &w1, 2000)?;
    println!(
        "golden ratio: tail infimum {:.6} over q in ({}, {}]",
        report.tail_infimum, report.tail_window.0, report.tail_window.1
    );

    // A rational point: an exact zero appears at its denominator.
    let report = simul_quality(&[rat(1, 2)], &[rat(0, 1)], &w1, 50)?;
    let zero_at = report.records.iter().find(|r| r.exact_zero).map(|r| r.q);
    println!("x = 1/2: exact zero at q = {zero_at:?}");

    // Dual form with weights (2/3, 1/3) at a quadratic pair.
    let w2 = Weight::new(vec![rat(2, 3), rat(1, 3)])?;
    let x = vec![dyadic(2f64.sqrt() - 1.0), dyadic(3f64.sqrt() - 1.0)];
    let report = dual_quality(&x, &rat(1, 3), &w2, 200)?;
    println!(
        "dual (sqrt2-1, sqrt3-1), theta=1/3: tail infimum {:.6}",
        report.tail_infimum
    );
    print!("{}", curve_to_csv(&report));
    Ok(())
}
