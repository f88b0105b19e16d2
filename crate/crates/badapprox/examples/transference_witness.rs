//! Transference in action: plants a solution of a linear-form system and
//! recovers a witness for the transposed system inside the predicted box.

use badapprox::interval::{rat, rat_int};
use badapprox::transference::{verify_transference, Bound, LinearSystem, TransferOutcome};
use num_bigint::BigInt;

fn main() -> badapprox::Result<()> {
    // System: L_1(u) = u_1 + (1/3)u_2, L_2(u) = u_2, with bounds (1/2, 2).
    let rows = vec![
        vec![rat_int(1), rat(1, 3)],
        vec![rat_int(0), rat_int(1)],
    ];
    let bounds = vec![Bound::rational(rat(1, 2))?, Bound::rational(rat_int(2))?];
    let system = LinearSystem::from_rows(&rows, bounds)?;

    // u = (-1, 2) satisfies |L_1| = 1/3 <= 1/2, |L_2| = 2 <= 2.
    let planted = vec![BigInt::from(-1), BigInt::from(2)];
    match verify_transference(&system, &planted)? {
        TransferOutcome::Witness(v) => {
            println!(
                "transposed-system witness: ({})",
                v.iter()
                    .map(|c| c.to_string())
                    .collect::<Vec<_>>()
                    .join(", ")
            );
        }
        TransferOutcome::Counterexample { radii } => {
            println!("no witness in the box {radii:?} — lemma violation");
        }
    }
    Ok(())
}
