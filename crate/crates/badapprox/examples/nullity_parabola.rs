//! Curve experiments on the parabola (x, x^2): shifted-rational hit rates
//! growing with the search resolution, and the Monte Carlo E-set measure
//! shrinking as the cusp parameter c shrinks.

use badapprox::interval::{rat, Rat};
use badapprox::nullity::{estimate_e_measure, search_hits, Curve};
use badapprox::arith::Weight;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn main() -> badapprox::Result<()> {
    let curve = Curve::parabola();
    let w = Weight::new(vec![rat(1, 2), rat(1, 2)])?;
    let theta = vec![rat(1, 3), rat(1, 7)];

    // Hit rate over 50 random points at three resolutions.
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    let den: i64 = 1 << 32;
    let xs: Vec<Vec<Rat>> = (0..50)
        .map(|_| vec![rat(rng.gen_range(-den..=den), den)])
        .collect();
    for q_max in [500u64, 1000, 2000] {
        let mut nonempty = 0;
        for x in &xs {
            if !search_hits(&curve, x, &theta, &w, &Rat::one(), &Rat::one(), q_max)?.is_empty() {
                nonempty += 1;
            }
        }
        println!("Q_max = {q_max}: {nonempty}/50 points have approximations");
    }

    // E-set measure estimate at flow time t = 2: monotone nonincreasing in c.
    let t = rat(2, 1);
    for (num, den) in [(7i64, 8i64), (3, 4), (1, 2), (1, 4)] {
        let c = rat(num, den);
        let est = estimate_e_measure(&curve, 1, &c, &t, 100, 9)?;
        println!(
            "c = {num}/{den}: fraction {:.3} +/- {:.3} ({} undecided)",
            est.fraction, est.ci_half_width, est.undecided
        );
    }
    Ok(())
}
