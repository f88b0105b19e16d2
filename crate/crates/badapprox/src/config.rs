//! Run configuration: JSON files with rationals written as "p/q" strings and
//! the target function theta chosen from named built-ins.

use serde::Deserialize;

use crate::arith::Weight;
use crate::error::{Error, Result};
use crate::interval::{parse_rat, Rat};
use crate::measures::{DigitSet, Support};
use crate::strategy::Theta;

/// Top-level run configuration; each command reads its own block.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub game: Option<GameSpec>,
    pub eval: Option<EvalSpec>,
    pub nullity: Option<NullitySpec>,
    pub transfer: Option<TransferSpec>,
    pub constants: Option<ConstantsSpec>,
}

impl RunConfig {
    pub fn from_path(path: &std::path::Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{path:?}: {e}")))
    }
}

/// Parses a "p/q" rational string, mapping failures to config errors.
pub fn parse_rat_cfg(s: &str) -> Result<Rat> {
    parse_rat(s).map_err(|e| Error::Config(format!("bad rational {s:?}: {e}")))
}

pub fn parse_rat_vec(v: &[String]) -> Result<Vec<Rat>> {
    v.iter().map(|s| parse_rat_cfg(s)).collect()
}

/// Builds a weight vector, surfacing violations as config errors (exit 2).
pub fn parse_weight(v: &[String]) -> Result<Weight> {
    let entries = parse_rat_vec(v)?;
    Weight::new(entries).map_err(|e| Error::Config(format!("bad weight: {e}")))
}

/// Named theta built-ins. The strategy works with affine functions; the
/// sinusoid form parses but is rejected at dispatch with `UnsupportedKind`.
#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ThetaSpec {
    Zero,
    Constant {
        values: Vec<String>,
    },
    Affine {
        offsets: Vec<String>,
        slopes: Vec<String>,
        /// Declared Lipschitz bound; must dominate max |slope|.
        lipschitz: String,
    },
    Sinusoid {
        amplitudes: Vec<String>,
        bound: String,
    },
}

impl ThetaSpec {
    /// The affine realization used by the strategy, plus a positive Lipschitz
    /// bound for the ledger.
    pub fn to_theta(&self, d: usize) -> Result<(Theta, Rat)> {
        let default_lip = crate::interval::rat(1, 100);
        match self {
            ThetaSpec::Zero => Ok((Theta::zero(d), default_lip)),
            ThetaSpec::Constant { values } => {
                let v = parse_rat_vec(values)?;
                if v.len() != d {
                    return Err(Error::Config("theta arity mismatch".into()));
                }
                Ok((Theta::constant(v), default_lip))
            }
            ThetaSpec::Affine {
                offsets,
                slopes,
                lipschitz,
            } => {
                let o = parse_rat_vec(offsets)?;
                let s = parse_rat_vec(slopes)?;
                if o.len() != d || s.len() != d {
                    return Err(Error::Config("theta arity mismatch".into()));
                }
                let theta =
                    Theta::affine(o, s).map_err(|e| Error::Config(format!("bad theta: {e}")))?;
                let lip = parse_rat_cfg(lipschitz)?;
                if lip < theta.lipschitz() {
                    return Err(Error::Config(
                        "declared Lipschitz bound is below max |slope|".into(),
                    ));
                }
                Ok((theta, lip.max(default_lip)))
            }
            ThetaSpec::Sinusoid { .. } => Err(Error::UnsupportedKind(
                "sinusoid theta: the removal geometry is implemented for affine targets only"
                    .into(),
            )),
        }
    }
}

/// Support built-ins.
#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SupportSpec {
    FullCube,
    CantorProduct,
    MissingDigitProduct { base: i64, keep: Vec<i64> },
}

impl SupportSpec {
    pub fn to_support(&self, d: usize) -> Result<Support> {
        let built = match self {
            SupportSpec::FullCube => Support::full_cube(d),
            SupportSpec::CantorProduct => Support::cantor_product(d),
            SupportSpec::MissingDigitProduct { base, keep } => DigitSet::new(*base, keep.clone())
                .and_then(|ds| Support::missing_digit_product(d, ds)),
        };
        built.map_err(|e| Error::Config(format!("bad support: {e}")))
    }
}

/// Bob's policy for `play`.
#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case", deny_unknown_fields)]
pub enum BobSpec {
    RandomLegal,
    RationalSeeker { target: Vec<String> },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameSpec {
    /// Flow base b > 1 as a "p/q" string; beta = b^{-(1+w_1)}.
    pub b: String,
    pub w: Vec<String>,
    pub theta: ThetaSpec,
    pub support: SupportSpec,
    pub depth: usize,
    pub bob: BobSpec,
    #[serde(default)]
    pub step_multiple: Option<u64>,
    /// Resolution for the certification scan; defaults to a depth-matched value.
    #[serde(default)]
    pub q_max: Option<u64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalMode {
    Simul,
    Dual,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalSpec {
    pub mode: EvalMode,
    pub x: Vec<String>,
    /// Per-coordinate shifts for simul; for dual only the first entry is used.
    pub theta: Vec<String>,
    pub w: Vec<String>,
    pub q_max: u64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NullitySpec {
    /// Curve built-in; "parabola" is the only one shipped.
    pub curve: String,
    pub theta: Vec<String>,
    pub w: Vec<String>,
    pub delta1: String,
    pub delta2: String,
    /// Hit-rate scan resolutions, e.g. [2500, 5000, 10000].
    pub q_max_grid: Vec<u64>,
    pub samples: usize,
    #[serde(default)]
    pub e_measure: Option<EMeasureSpec>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EMeasureSpec {
    pub k: u64,
    pub t: String,
    pub c_grid: Vec<String>,
    pub samples: usize,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransferSpec {
    pub rows: Vec<Vec<String>>,
    pub bounds: Vec<String>,
    /// Planted solution of the primal system.
    pub planted: Vec<i64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsSpec {
    pub b: String,
    pub w: Vec<String>,
    pub support: SupportSpec,
    /// Lipschitz bound for the target function.
    pub m_lip: String,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::rat;

    #[test]
    fn parses_a_full_game_block() {
        let text = r#"{
            "game": {
                "b": "2",
                "w": ["1"],
                "theta": {"kind": "zero"},
                "support": {"kind": "full_cube"},
                "depth": 12,
                "bob": {"policy": "random_legal"}
            }
        }"#;
        let cfg: RunConfig = serde_json::from_str(text).unwrap();
        let g = cfg.game.unwrap();
        assert_eq!(parse_rat_cfg(&g.b).unwrap(), rat(2, 1));
        let (theta, lip) = g.theta.to_theta(1).unwrap();
        assert_eq!(theta.dim(), 1);
        assert!(lip.numer().sign() != num_bigint::Sign::Minus);
        g.support.to_support(1).unwrap();
    }

    #[test]
    fn malformed_weight_is_a_config_error() {
        let w = vec!["1/2".to_string(), "1/3".to_string()];
        assert!(matches!(parse_weight(&w), Err(Error::Config(_))));
    }

    #[test]
    fn sinusoid_theta_is_rejected_at_use() {
        let spec = ThetaSpec::Sinusoid {
            amplitudes: vec!["1/10".into()],
            bound: "1/10".into(),
        };
        assert!(matches!(spec.to_theta(1), Err(Error::UnsupportedKind(_))));
    }

    #[test]
    fn affine_theta_checks_the_declared_bound() {
        let spec = ThetaSpec::Affine {
            offsets: vec!["0".into()],
            slopes: vec!["1/2".into()],
            lipschitz: "1/10".into(),
        };
        assert!(matches!(spec.to_theta(1), Err(Error::Config(_))));
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = r#"{"game": {"b": "2", "unknown_field": 1}}"#;
        assert!(serde_json::from_str::<RunConfig>(text).is_err());
    }
}
