//! Plays a game restricted to the middle-third Cantor set: every ball Bob
//! picks stays on the fractal support, and Alice's removal nets are drawn
//! from the Cantor grid.

use badapprox::adversary::{play_game, BobPolicy};
use badapprox::arith::{Ball, Weight};
use badapprox::dynamics::FlowParams3;
use badapprox::error::PREC_START;
use badapprox::game::{GameConfig, GameState, Outcome};
use badapprox::interval::{format_rat, rat, rat_int};
use badapprox::measures::Support;
use badapprox::strategy::{alice_policy, ConstantsLedger, Theta};

fn main() -> badapprox::Result<()> {
    // Base 3 keeps beta = 3^{-2} = 1/9 aligned with the Cantor grid.
    let params = FlowParams3::new(rat_int(3), Weight::new(vec![rat_int(1)])?)?;
    let support = Support::cantor_product(1)?;
    let ledger = ConstantsLedger::compute(
        params,
        support.builtin_constants(PREC_START)?,
        rat(1, 10),
        PREC_START,
    )?;
    ledger.verify()?;
    let theta = Theta::zero(1);

    // Initial ball centered on a Cantor point (1/4 = 0.020202..._3); its
    // radius must be the ledger's r0, the unit of Alice's removal radii.
    let cfg = GameConfig::new(
        ledger.game_gamma(),
        ledger.beta.clone(),
        Ball::new(vec![rat(1, 4)], ledger.support.r0.clone())?,
        support.clone(),
        10,
    )?;
    let mut state = GameState::new(cfg)?;
    let mut bob = BobPolicy::random_legal(5);
    play_game(&mut state, &mut bob, |s| {
        let pm = alice_policy(&ledger, &support, &theta, s, PREC_START)?;
        Ok((pm.mv, pm.events))
    })?;

    match state.outcome()? {
        Outcome::Point {
            center,
            error_radius,
        } => {
            println!(
                "outcome point on the Cantor set: {} (radius {})",
                format_rat(&center[0]),
                format_rat(&error_radius)
            );
            println!(
                "support contains the center: {}",
                support.contains_point(&center)
            );
        }
        Outcome::AliceDefaultWin { round } => println!("Alice default win at round {round}"),
    }
    Ok(())
}
