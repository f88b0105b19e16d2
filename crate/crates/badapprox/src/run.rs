//! Command drivers: each builds its pipeline from a `RunConfig`, writes the
//! output files, and reports a process exit code.
//!
//! Exit codes: 0 success, 2 configuration error, 3 certification failure,
//! 4 internal invariant violation.

use std::path::Path;

use num_bigint::BigInt;
use num_traits::Zero;
use serde_json::json;

use crate::adversary::{play_game, BobPolicy};
use crate::arith::Ball;
use crate::badeval::{certify_outcome, curve_to_csv, dual_quality, simul_quality};
use crate::config::{
    parse_rat_cfg, parse_rat_vec, parse_weight, BobSpec, ConstantsSpec, EvalMode, EvalSpec,
    GameSpec, NullitySpec, RunConfig, SupportSpec, TransferSpec,
};
use crate::dynamics::FlowParams3;
use crate::error::{Error, Result, PREC_START};
use crate::game::{GameConfig, GameState, Outcome};
use crate::interval::{format_rat, rat, rat_to_f64, Rat};
use crate::measures::Support;
use crate::nullity::{estimate_e_measure, search_hits, Curve};
use crate::strategy::{alice_policy, ConstantsLedger};
use crate::transference::{verify_transference, Bound, LinearSystem, TransferOutcome};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_CERTIFICATION: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

/// Maps an error to the documented process exit code.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Config(_)
        | Error::UnsupportedKind(_)
        | Error::Io(_)
        | Error::Json(_)
        | Error::BetaTooLarge(_) => EXIT_CONFIG,
        Error::RectangleHit { .. }
        | Error::UniquenessViolated(_)
        | Error::CellBudgetViolated(_, _)
        | Error::SandwichViolated(_) => EXIT_CERTIFICATION,
        _ => EXIT_INTERNAL,
    }
}

fn write_out(out_dir: &Path, name: &str, contents: &str) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    std::fs::write(out_dir.join(name), contents)?;
    Ok(())
}

fn require<'a, T>(block: &'a Option<T>, name: &str) -> Result<&'a T> {
    block
        .as_ref()
        .ok_or_else(|| Error::Config(format!("config is missing the {name:?} block")))
}

/// Shared ledger construction from (b, w, support, Lipschitz bound).
fn build_ledger(
    b: &Rat,
    w_spec: &[String],
    support_spec: &SupportSpec,
    m_lip: Rat,
) -> Result<(ConstantsLedger, Support)> {
    let w = parse_weight(w_spec)?;
    let d = w.dim();
    let support = support_spec.to_support(d)?;
    let params = FlowParams3::new(b.clone(), w).map_err(|e| Error::Config(e.to_string()))?;
    let sc = support.builtin_constants(PREC_START)?;
    let ledger = ConstantsLedger::compute(params, sc, m_lip, PREC_START)?;
    ledger.verify()?;
    Ok((ledger, support))
}

/// Initial ball: radius is the ledger's r0 (the strategy's removal radii are
/// expressed in it), centered on a point of the support.
fn default_b0(support: &Support, ledger: &ConstantsLedger) -> Result<Ball> {
    let d = support.dim();
    let center = if support.contains_point(&vec![rat(1, 2); d]) {
        vec![rat(1, 2); d]
    } else {
        // Digit-set supports: 1/4 in base 3 is 0.0202..., on the Cantor set;
        // fall back to the coordinate-wise minimum of the digit set.
        let quarter = vec![rat(1, 4); d];
        if support.contains_point(&quarter) {
            quarter
        } else {
            let v = support
                .digits()
                .map(|ds| ds.min_val())
                .unwrap_or_else(Rat::zero);
            vec![v; d]
        }
    };
    Ball::new(center, ledger.support.r0.clone())
}

fn ledger_json(ledger: &ConstantsLedger) -> serde_json::Value {
    json!({
        "b": format_rat(ledger.params.b()),
        "w": ledger.params.weight().entries().iter().map(format_rat).collect::<Vec<_>>(),
        "beta": format_rat(&ledger.beta),
        "m_lip": format_rat(&ledger.m_lip),
        "s": ledger.s,
        "eta": format_rat(&ledger.eta),
        "i0": ledger.i0,
        "q": format_rat(&ledger.q),
        "xi": format_rat(&ledger.xi),
        "lambda1": ledger.lambda1,
        "k1": format_rat(&ledger.k1),
        "c": format_rat(&ledger.c),
        "game_gamma": format_rat(&ledger.game_gamma()),
        "alpha": [ledger.support.alpha.lo().to_string(), ledger.support.alpha.hi().to_string()],
        "r0": format_rat(&ledger.support.r0),
        "notes": ledger.notes,
    })
}

/// A depth-matched certification resolution: `b^(depth - lambda1)` clamped to
/// a desk-scale range, per the "Q_max matched to level reach" convention.
fn default_q_max(ledger: &ConstantsLedger, depth: usize) -> u64 {
    let b = rat_to_f64(ledger.params.b());
    let reach = (depth as i64 - ledger.lambda1 as i64).max(1) as f64;
    let q = b.powf(reach);
    q.clamp(100.0, 10_000.0) as u64
}

/// Runs the game and certifies the outcome; returns the JSON report and
/// whether certification passed.
pub fn cmd_play(cfg: &RunConfig, seed: u64, out_dir: &Path) -> Result<i32> {
    let spec: &GameSpec = require(&cfg.game, "game")?;
    let b = parse_rat_cfg(&spec.b)?;
    let w = parse_weight(&spec.w)?;
    let d = w.dim();
    let (theta, m_lip) = spec.theta.to_theta(d)?;
    let (ledger, support) = build_ledger(&b, &spec.w, &spec.support, m_lip)?;

    let gamma = ledger.game_gamma();
    let mut game_cfg = GameConfig::new(
        gamma.clone(),
        ledger.beta.clone(),
        default_b0(&support, &ledger)?,
        support.clone(),
        spec.depth,
    )
    .map_err(|e| Error::Config(e.to_string()))?;
    if let Some(m) = spec.step_multiple {
        game_cfg = game_cfg
            .with_step_multiple(m)
            .map_err(|e| Error::Config(e.to_string()))?;
    }

    let mut state = GameState::new(game_cfg)?;
    let mut bob = match &spec.bob {
        BobSpec::RandomLegal => BobPolicy::random_legal(seed),
        BobSpec::RationalSeeker { target } => {
            let t = parse_rat_vec(target)?;
            if t.len() != d {
                return Err(Error::Config("seeker target arity mismatch".into()));
            }
            BobPolicy::rational_seeker(seed, t)
        }
    };
    let ledger_ref = &ledger;
    let support_ref = &support;
    let theta_ref = &theta;
    let events = play_game(&mut state, &mut bob, |s| {
        let pm = alice_policy(ledger_ref, support_ref, theta_ref, s, PREC_START)?;
        Ok((pm.mv, pm.events))
    })?;

    let mut trace = state.to_ndjson(Some(seed))?;
    for ev in &events {
        trace.push_str(&serde_json::to_string(&json!({"event": ev}))?);
        trace.push('\n');
    }
    write_out(out_dir, "trace.ndjson", &trace)?;

    let q_max = spec.q_max.unwrap_or_else(|| default_q_max(&ledger, spec.depth));
    let cert = certify_outcome(&ledger, &theta, state.bob_balls(), q_max, PREC_START);
    let (cert_value, pass, cert_err) = match cert {
        Ok(report) => {
            let pass = report.shifted_rational_hit.is_none();
            (serde_json::to_value(&report)?, pass, None)
        }
        Err(e) => {
            let code = exit_code_for(&e);
            if code == EXIT_CERTIFICATION {
                (json!(null), false, Some(e.to_string()))
            } else {
                return Err(e);
            }
        }
    };
    let outcome_json = match state.outcome()? {
        Outcome::Point {
            center,
            error_radius,
        } => json!({
            "kind": "point",
            "center": center.iter().map(format_rat).collect::<Vec<_>>(),
            "error_radius": format_rat(&error_radius),
        }),
        Outcome::AliceDefaultWin { round } => json!({
            "kind": "alice_default_win",
            "round": round,
        }),
    };
    let report = json!({
        "command": "play",
        "seed": seed,
        "depth": spec.depth,
        "gamma": format_rat(&gamma),
        "q_max": q_max,
        "ledger": ledger_json(&ledger),
        "outcome": outcome_json,
        "events": events,
        "certification": cert_value,
        "certification_error": cert_err,
        "pass": pass,
    });
    write_out(out_dir, "report.json", &serde_json::to_string_pretty(&report)?)?;
    if let Some(curve) = report["certification"]["badness"]["infimum_curve"].as_array() {
        let mut csv = String::from("q,running_infimum\n");
        for pair in curve {
            if let (Some(q), Some(v)) = (pair[0].as_u64(), pair[1].as_f64()) {
                csv.push_str(&format!("{q},{v}\n"));
            }
        }
        write_out(out_dir, "curves.csv", &csv)?;
    }
    Ok(if pass { EXIT_OK } else { EXIT_CERTIFICATION })
}

pub fn cmd_eval(cfg: &RunConfig, seed: u64, out_dir: &Path) -> Result<i32> {
    let spec: &EvalSpec = require(&cfg.eval, "eval")?;
    let x = parse_rat_vec(&spec.x)?;
    let theta = parse_rat_vec(&spec.theta)?;
    let w = parse_weight(&spec.w)?;
    let report = match spec.mode {
        EvalMode::Simul => simul_quality(&x, &theta, &w, spec.q_max)?,
        EvalMode::Dual => {
            let t = theta
                .first()
                .ok_or_else(|| Error::Config("dual mode needs one theta entry".into()))?;
            dual_quality(&x, t, &w, spec.q_max)?
        }
    };
    let verdict = if report.records.iter().any(|r| r.exact_zero) {
        "not bad: an exactly solvable instance was found"
    } else if report.tail_infimum > 0.0 {
        "badness evidence: positive tail infimum at this resolution"
    } else {
        "inconclusive: tail infimum not bounded away from zero"
    };
    let out = json!({
        "command": "eval",
        "seed": seed,
        "report": serde_json::to_value(&report)?,
        "verdict": verdict,
    });
    write_out(out_dir, "report.json", &serde_json::to_string_pretty(&out)?)?;
    write_out(out_dir, "curves.csv", &curve_to_csv(&report))?;
    Ok(EXIT_OK)
}

pub fn cmd_nullity(cfg: &RunConfig, seed: u64, out_dir: &Path) -> Result<i32> {
    let spec: &NullitySpec = require(&cfg.nullity, "nullity")?;
    if spec.curve != "parabola" {
        return Err(Error::Config(format!(
            "unknown curve {:?}; \"parabola\" is the shipped built-in",
            spec.curve
        )));
    }
    let curve = Curve::parabola();
    let theta = parse_rat_vec(&spec.theta)?;
    let w = parse_weight(&spec.w)?;
    let delta1 = parse_rat_cfg(&spec.delta1)?;
    let delta2 = parse_rat_cfg(&spec.delta2)?;
    if spec.samples == 0 || spec.q_max_grid.is_empty() {
        return Err(Error::Config("nullity needs samples >= 1 and a q_max grid".into()));
    }

    // Hit-rate scan: fraction of sampled x with nonempty search_hits, per
    // resolution, on a fixed sample set so rates are comparable.
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed);
    let den: i64 = 1 << 32;
    let xs: Vec<Vec<Rat>> = (0..spec.samples)
        .map(|_| vec![rat(rng.gen_range(-den..=den), den)])
        .collect();
    let mut scan = Vec::new();
    let mut csv = String::from("q_max,hit_rate,mean_hits\n");
    for &q_max in &spec.q_max_grid {
        let mut nonempty = 0usize;
        let mut total_hits = 0usize;
        for x in &xs {
            let hits = search_hits(&curve, x, &theta, &w, &delta1, &delta2, q_max)?;
            if !hits.is_empty() {
                nonempty += 1;
            }
            total_hits += hits.len();
        }
        let rate = nonempty as f64 / spec.samples as f64;
        let mean = total_hits as f64 / spec.samples as f64;
        csv.push_str(&format!("{q_max},{rate},{mean}\n"));
        scan.push(json!({
            "q_max": q_max,
            "hit_rate": rate,
            "mean_hits": mean,
        }));
    }

    let mut e_runs = Vec::new();
    if let Some(em) = &spec.e_measure {
        let t = parse_rat_cfg(&em.t)?;
        for c_str in &em.c_grid {
            let c = parse_rat_cfg(c_str)?;
            let est = estimate_e_measure(&curve, em.k, &c, &t, em.samples, seed)?;
            e_runs.push(serde_json::to_value(&est)?);
        }
    }

    let out = json!({
        "command": "nullity",
        "seed": seed,
        "curve": "parabola",
        "theta": spec.theta,
        "w": spec.w,
        "hit_rate_scan": scan,
        "e_measure": e_runs,
    });
    write_out(out_dir, "report.json", &serde_json::to_string_pretty(&out)?)?;
    write_out(out_dir, "curves.csv", &csv)?;
    Ok(EXIT_OK)
}

pub fn cmd_transfer(cfg: &RunConfig, seed: u64, out_dir: &Path) -> Result<i32> {
    let spec: &TransferSpec = require(&cfg.transfer, "transfer")?;
    let rows: Vec<Vec<Rat>> = spec
        .rows
        .iter()
        .map(|r| parse_rat_vec(r))
        .collect::<Result<_>>()?;
    let bounds: Vec<Bound> = parse_rat_vec(&spec.bounds)?
        .into_iter()
        .map(Bound::rational)
        .collect::<Result<_>>()?;
    let system =
        LinearSystem::from_rows(&rows, bounds).map_err(|e| Error::Config(e.to_string()))?;
    let planted: Vec<BigInt> = spec.planted.iter().map(|&v| BigInt::from(v)).collect();
    let outcome = verify_transference(&system, &planted)?;
    let (kind, payload) = match &outcome {
        TransferOutcome::Witness(v) => (
            "witness",
            json!(v.iter().map(|c| c.to_string()).collect::<Vec<_>>()),
        ),
        TransferOutcome::Counterexample { radii } => ("counterexample", json!(radii)),
    };
    let out = json!({
        "command": "transfer",
        "seed": seed,
        "outcome": kind,
        "value": payload,
    });
    write_out(out_dir, "report.json", &serde_json::to_string_pretty(&out)?)?;
    Ok(if kind == "witness" {
        EXIT_OK
    } else {
        EXIT_CERTIFICATION
    })
}

pub fn cmd_constants(cfg: &RunConfig, seed: u64, out_dir: &Path) -> Result<i32> {
    let spec: &ConstantsSpec = require(&cfg.constants, "constants")?;
    let b = parse_rat_cfg(&spec.b)?;
    let m_lip = parse_rat_cfg(&spec.m_lip)?;
    let (ledger, _) = build_ledger(&b, &spec.w, &spec.support, m_lip)?;
    let out = json!({
        "command": "constants",
        "seed": seed,
        "ledger": ledger_json(&ledger),
    });
    write_out(out_dir, "report.json", &serde_json::to_string_pretty(&out)?)?;
    Ok(EXIT_OK)
}

/// Dispatches a command by name, translating every error into its exit code.
pub fn run_command(command: &str, cfg: &RunConfig, seed: u64, out_dir: &Path) -> i32 {
    let result = match command {
        "play" => cmd_play(cfg, seed, out_dir),
        "eval" => cmd_eval(cfg, seed, out_dir),
        "nullity" => cmd_nullity(cfg, seed, out_dir),
        "transfer" => cmd_transfer(cfg, seed, out_dir),
        "constants" => cmd_constants(cfg, seed, out_dir),
        other => Err(Error::Config(format!("unknown command {other:?}"))),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmp_dir(tag: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join(format!("badapprox-run-{tag}-{}", std::process::id()));
        let _ = std::fs::remove_dir_all(&dir);
        dir
    }

    fn game_config_json(depth: usize) -> RunConfig {
        serde_json::from_str(&format!(
            r#"{{
                "game": {{
                    "b": "2",
                    "w": ["1"],
                    "theta": {{"kind": "zero"}},
                    "support": {{"kind": "full_cube"}},
                    "depth": {depth},
                    "bob": {{"policy": "random_legal"}},
                    "q_max": 256
                }}
            }}"#
        ))
        .unwrap()
    }

    #[test]
    fn play_fixture_d1_zero_theta_exits_zero() {
        let out = tmp_dir("play");
        let code = cmd_play(&game_config_json(12), 1, &out).unwrap();
        assert_eq!(code, EXIT_OK);
        assert!(out.join("trace.ndjson").exists());
        assert!(out.join("report.json").exists());
        let report: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap())
                .unwrap();
        assert_eq!(report["pass"], json!(true));
        let _ = std::fs::remove_dir_all(&out);
    }

    #[test]
    fn play_is_byte_deterministic() {
        let (o1, o2) = (tmp_dir("det1"), tmp_dir("det2"));
        cmd_play(&game_config_json(10), 7, &o1).unwrap();
        cmd_play(&game_config_json(10), 7, &o2).unwrap();
        for name in ["trace.ndjson", "report.json"] {
            let a = std::fs::read(o1.join(name)).unwrap();
            let b = std::fs::read(o2.join(name)).unwrap();
            assert_eq!(a, b, "{name} differs between identical runs");
        }
        let _ = std::fs::remove_dir_all(&o1);
        let _ = std::fs::remove_dir_all(&o2);
    }

    #[test]
    fn malformed_weight_maps_to_exit_two() {
        let cfg: RunConfig = serde_json::from_str(
            r#"{
                "game": {
                    "b": "2", "w": ["1/2", "1/3"],
                    "theta": {"kind": "zero"},
                    "support": {"kind": "full_cube"},
                    "depth": 10,
                    "bob": {"policy": "random_legal"}
                }
            }"#,
        )
        .unwrap();
        let out = tmp_dir("badw");
        assert_eq!(run_command("play", &cfg, 1, &out), EXIT_CONFIG);
        let _ = std::fs::remove_dir_all(&out);
    }

    #[test]
    fn eval_half_with_zero_theta_is_not_bad() {
        let cfg: RunConfig = serde_json::from_str(
            r#"{
                "eval": {
                    "mode": "simul",
                    "x": ["1/2"], "theta": ["0"], "w": ["1"],
                    "q_max": 50
                }
            }"#,
        )
        .unwrap();
        let out = tmp_dir("eval");
        assert_eq!(cmd_eval(&cfg, 1, &out).unwrap(), EXIT_OK);
        let report: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap())
                .unwrap();
        assert!(report["verdict"].as_str().unwrap().starts_with("not bad"));
        assert!(out.join("curves.csv").exists());
        let _ = std::fs::remove_dir_all(&out);
    }

    #[test]
    fn transfer_identity_system_finds_witness() {
        let cfg: RunConfig = serde_json::from_str(
            r#"{
                "transfer": {
                    "rows": [["1", "0"], ["0", "1"]],
                    "bounds": ["1", "1"],
                    "planted": [1, 0]
                }
            }"#,
        )
        .unwrap();
        let out = tmp_dir("transfer");
        assert_eq!(cmd_transfer(&cfg, 1, &out).unwrap(), EXIT_OK);
        let _ = std::fs::remove_dir_all(&out);
    }

    #[test]
    fn nullity_smoke_run_reports_hit_rate() {
        let cfg: RunConfig = serde_json::from_str(
            r#"{
                "nullity": {
                    "curve": "parabola",
                    "theta": ["1/3", "1/7"],
                    "w": ["1/2", "1/2"],
                    "delta1": "1", "delta2": "1",
                    "q_max_grid": [200, 400],
                    "samples": 20
                }
            }"#,
        )
        .unwrap();
        let out = tmp_dir("nullity");
        assert_eq!(cmd_nullity(&cfg, 3, &out).unwrap(), EXIT_OK);
        let report: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap())
                .unwrap();
        let scan = report["hit_rate_scan"].as_array().unwrap();
        assert_eq!(scan.len(), 2);
        assert!(scan[0]["hit_rate"].as_f64().unwrap() >= 0.0);
        let _ = std::fs::remove_dir_all(&out);
    }

    #[test]
    fn constants_dump_matches_ledger_anchor() {
        let cfg: RunConfig = serde_json::from_str(
            r#"{
                "constants": {
                    "b": "2", "w": ["1"],
                    "support": {"kind": "full_cube"},
                    "m_lip": "1/10"
                }
            }"#,
        )
        .unwrap();
        let out = tmp_dir("constants");
        assert_eq!(cmd_constants(&cfg, 1, &out).unwrap(), EXIT_OK);
        let report: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap())
                .unwrap();
        assert_eq!(report["ledger"]["s"], json!(5));
        assert_eq!(report["ledger"]["beta"], json!("1/4"));
        assert_eq!(report["ledger"]["lambda1"], json!(8));
        let _ = std::fs::remove_dir_all(&out);
    }

    #[test]
    fn unknown_command_is_config_error() {
        let out = tmp_dir("unknown");
        assert_eq!(run_command("bogus", &RunConfig::default(), 1, &out), EXIT_CONFIG);
        let _ = std::fs::remove_dir_all(&out);
    }
}
