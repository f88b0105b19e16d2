use badapprox::adversary::{play_game, BobPolicy};
use badapprox::arith::{Ball, Weight};
use badapprox::badeval::certify_outcome;
use badapprox::dynamics::FlowParams3;
use badapprox::error::PREC_START;
use badapprox::game::{GameConfig, GameState};
use badapprox::interval::{rat, rat_int};
use badapprox::measures::Support;
use badapprox::strategy::{alice_policy, ConstantsLedger, Theta};
use std::time::Instant;

fn main() {
    let d = 2;
    let params = FlowParams3::new(rat_int(8), Weight::new(vec![rat(2,3), rat(1,3)]).unwrap()).unwrap();
    let sup = Support::cantor_product(d).unwrap();
    let ledger = ConstantsLedger::compute(params, sup.builtin_constants(PREC_START).unwrap(), rat(1,100), PREC_START).unwrap();
    ledger.verify().unwrap();
    println!("ledger ok: lambda1={} gamma={}", ledger.lambda1, ledger.game_gamma());
    for kind in 0..2 {
        let t0 = Instant::now();
        let cfg = GameConfig::new(ledger.game_gamma(), ledger.beta.clone(),
            Ball::new(vec![rat(1,4); d], ledger.support.r0.clone()).unwrap(),
            sup.clone(), 14).unwrap();
        let mut state = GameState::new(cfg).unwrap();
        let mut bob = if kind == 0 { BobPolicy::random_legal(7) } else { BobPolicy::rational_seeker(7, vec![rat(1,4); d]) };
        play_game(&mut state, &mut bob, |s| {
            let pm = alice_policy(&ledger, &sup, &Theta::zero(d), s, PREC_START)?;
            Ok((pm.mv, pm.events))
        }).unwrap();
        let tg = t0.elapsed();
        let rep = certify_outcome(&ledger, &Theta::zero(d), state.bob_balls(), 4096, PREC_START).unwrap();
        println!("kind {kind}: game {tg:.2?} tail {}", rep.tail_infimum_lower);
    }
}
