//! Plays a full game on the unit interval: Alice runs the removal strategy,
//! Bob plays random-legal moves, and the outcome point is certified against
//! every reachable dangerous rectangle.

use badapprox::adversary::{play_game, BobPolicy};
use badapprox::arith::{Ball, Weight};
use badapprox::badeval::certify_outcome;
use badapprox::dynamics::FlowParams3;
use badapprox::error::PREC_START;
use badapprox::game::{GameConfig, GameState, Outcome};
use badapprox::interval::{format_rat, rat, rat_int};
use badapprox::measures::Support;
use badapprox::strategy::{alice_policy, ConstantsLedger, Theta};

fn main() -> badapprox::Result<()> {
    let params = FlowParams3::new(rat_int(2), Weight::new(vec![rat_int(1)])?)?;
    let support = Support::full_cube(1)?;
    let ledger = ConstantsLedger::compute(
        params,
        support.builtin_constants(PREC_START)?,
        rat(1, 10),
        PREC_START,
    )?;
    ledger.verify()?;
    let theta = Theta::constant(vec![rat(1, 2)]);

    let cfg = GameConfig::new(
        ledger.game_gamma(),
        ledger.beta.clone(),
        Ball::new(vec![rat(1, 2)], rat(1, 2))?,
        support.clone(),
        12,
    )?;
    let mut state = GameState::new(cfg)?;
    let mut bob = BobPolicy::random_legal(1);
    let events = play_game(&mut state, &mut bob, |s| {
        let pm = alice_policy(&ledger, &support, &theta, s, PREC_START)?;
        Ok((pm.mv, pm.events))
    })?;

    match state.outcome()? {
        Outcome::Point {
            center,
            error_radius,
        } => {
            println!(
                "outcome point: {} (radius {})",
                format_rat(&center[0]),
                format_rat(&error_radius)
            );
        }
        Outcome::AliceDefaultWin { round } => println!("Alice default win at round {round}"),
    }
    for ev in &events {
        println!("event: {ev}");
    }

    let report = certify_outcome(&ledger, &theta, state.bob_balls(), 256, PREC_START)?;
    println!("levels checked: {:?}", report.levels_checked);
    println!("shifted-rational hit: {:?}", report.shifted_rational_hit);
    println!("tail infimum (lower): {}", report.tail_infimum_lower);
    Ok(())
}
