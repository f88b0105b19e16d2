use badapprox::adversary::{play_game, BobPolicy};
use badapprox::arith::{Ball, Weight};
use badapprox::dynamics::FlowParams3;
use badapprox::error::PREC_START;
use badapprox::game::{GameConfig, GameState};
use badapprox::interval::{rat, rat_int};
use badapprox::measures::Support;
use badapprox::strategy::{alice_policy, ConstantsLedger, Theta};

fn main() {
    let d = 2;
    let params = FlowParams3::new(rat_int(8), Weight::new(vec![rat(2,3), rat(1,3)]).unwrap()).unwrap();
    let sup = Support::cantor_product(d).unwrap();
    let ledger = ConstantsLedger::compute(params, sup.builtin_constants(PREC_START).unwrap(), rat(1,100), PREC_START).unwrap();
    let cfg = GameConfig::new(ledger.game_gamma(), ledger.beta.clone(),
        Ball::new(vec![rat(1,4); d], ledger.support.r0.clone()).unwrap(),
        sup.clone(), 14).unwrap();
    let mut state = GameState::new(cfg).unwrap();
    let mut bob = BobPolicy::random_legal(7);
    let mut n = 0;
    play_game(&mut state, &mut bob, |s| {
        let t0 = std::time::Instant::now();
        let net = s.candidate_net().unwrap();
        let tn = t0.elapsed();
        let t1 = std::time::Instant::now();
        let pm = alice_policy(&ledger, &sup, &Theta::zero(d), s, PREC_START)?;
        eprintln!("round {n}: net {} in {tn:.2?}, alice {:.2?}", net.len(), t1.elapsed());
        n += 1;
        Ok((pm.mv, pm.events))
    }).unwrap();
}
