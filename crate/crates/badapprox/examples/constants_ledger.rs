//! Computes the full strategy constants ledger for two standard parameter
//! sets and prints every derived constant with its rounding notes.

use badapprox::dynamics::FlowParams3;
use badapprox::error::PREC_START;
use badapprox::interval::{format_rat, rat, rat_int};
use badapprox::measures::Support;
use badapprox::strategy::ConstantsLedger;

fn show(label: &str, ledger: &ConstantsLedger) {
    println!("== {label} ==");
    println!("beta      = {}", format_rat(&ledger.beta));
    println!("s         = {}", ledger.s);
    println!("eta       = {}", format_rat(&ledger.eta));
    println!("i0        = {}", ledger.i0);
    println!("q         = {}", format_rat(&ledger.q));
    println!("xi        = {}", format_rat(&ledger.xi));
    println!("lambda1   = {}", ledger.lambda1);
    println!("k1        = {}", format_rat(&ledger.k1));
    println!("c         = {}", format_rat(&ledger.c));
    println!("gamma     = {}", format_rat(&ledger.game_gamma()));
    for note in &ledger.notes {
        println!("note: {note}");
    }
    println!();
}

fn main() -> badapprox::Result<()> {
    // d = 1, w = (1), flow base 2: the classical unweighted line.
    let params = FlowParams3::new(rat_int(2), badapprox::arith::Weight::new(vec![rat_int(1)])?)?;
    let support = Support::full_cube(1)?;
    let ledger = ConstantsLedger::compute(
        params,
        support.builtin_constants(PREC_START)?,
        rat(1, 10),
        PREC_START,
    )?;
    ledger.verify()?;
    show("d=1, w=(1), b=2", &ledger);

    // d = 2, w = (2/3, 1/3), flow base 8: beta = 8^{-5/3} = 1/32.
    let params = FlowParams3::new(
        rat_int(8),
        badapprox::arith::Weight::new(vec![rat(2, 3), rat(1, 3)])?,
    )?;
    let support = Support::full_cube(2)?;
    let ledger = ConstantsLedger::compute(
        params,
        support.builtin_constants(PREC_START)?,
        rat(1, 10),
        PREC_START,
    )?;
    ledger.verify()?;
    show("d=2, w=(2/3,1/3), b=8", &ledger);
    Ok(())
}
