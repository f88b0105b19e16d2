//! Exact lattice computations: shortest vectors and successive minima for a
//! skewed basis, and the K_eps (Mahler compact set) membership test.

use badapprox::interval::{rat, rat_int};
use badapprox::lattice::{in_k_eps, successive_minima, LatticeBasis};

fn main() -> badapprox::Result<()> {
    // A deliberately skewed 3-dimensional basis.
    let rows = vec![
        vec![rat_int(1), rat_int(7), rat_int(3)],
        vec![rat_int(0), rat_int(1), rat_int(5)],
        vec![rat_int(0), rat_int(0), rat_int(1)],
    ];
    let basis = LatticeBasis::from_rational_rows(&rows)?;
    let profile = successive_minima(&basis)?;
    for (i, lam) in profile.lambda.iter().enumerate() {
        println!("lambda_{} ~ {:.6}", i + 1, lam.to_f64());
    }

    // K_eps membership: certified three-way answer.
    for eps in [rat(1, 2), rat_int(1), rat_int(2)] {
        match in_k_eps(&basis, &eps)? {
            Some(true) => println!("lattice is in K_{}", eps),
            Some(false) => println!("lattice escapes K_{}", eps),
            None => println!("K_{} membership undecided at this precision", eps),
        }
    }
    Ok(())
}
