//! Run-configuration schema: a single versioned JSON document with all
//! numerics as decimal strings, parsed to exact rationals. Unknown fields
//! are rejected so typos surface as config errors instead of silent
//! defaults.

use participation::game::{validate_game, Action, Game, GameSpec, Selection, StrategyProfile};
use participation::numeric::{NumericMode, Rational};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub game: GameConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<ModeConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub enumerate: Option<EnumerateConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibrate: Option<CalibrateConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulate: Option<SimulateConfig>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameConfig {
    pub n: usize,
    pub k: usize,
    /// Scalar ("0.3") or one entry per player.
    pub q: SelectionConfig,
    pub alpha: String,
    /// Task-completion cost; required for retraction variants, forbidden
    /// to be nonzero otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<String>,
    pub r: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<String>,
    pub variant: participation::game::Variant,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SelectionConfig {
    Scalar(String),
    PerPlayer(Vec<String>),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, tag = "mode", rename_all = "lowercase")]
pub enum ModeConfig {
    Exact,
    Float { epsilon: String },
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnumerateConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub guard: Option<usize>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub check_lattice: bool,
    /// Also check strong equilibria up to this coalition size.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strong_coalitions: Option<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrateConfig {
    pub target: TargetConfig,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub compare_universal: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetConfig {
    AllIn,
    Mixed { lambda: usize },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub parameter: SweepParameter,
    pub start: String,
    pub stop: String,
    pub step: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParameter {
    R,
    Alpha,
    Beta,
    Q,
    K,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub profile: ProfileConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dynamics: Option<DynamicsConfig>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProfileConfig {
    Named(NamedProfile),
    Actions(Vec<Action>),
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedProfile {
    AllIn,
    AllOut,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<ProfileConfig>,
    #[serde(default)]
    pub order: OrderConfig,
    #[serde(default = "default_max_rounds")]
    pub max_rounds: usize,
}

fn default_max_rounds() -> usize {
    100
}

#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderConfig {
    #[default]
    RoundRobin,
    RandomPermutation,
}

/// A configuration problem: maps to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut deserializer = serde_json::Deserializer::from_str(text);
    let config: RunConfig = serde_path_to_error::deserialize(&mut deserializer)
        .map_err(|e| ConfigError(format!("at {}: {}", e.path(), e.inner())))?;
    if config.schema_version != SCHEMA_VERSION {
        return Err(ConfigError(format!(
            "unsupported schema_version {} (this build reads {})",
            config.schema_version, SCHEMA_VERSION
        )));
    }
    Ok(config)
}

fn parse_rational(field: &str, text: &str) -> Result<Rational, ConfigError> {
    text.parse().map_err(|e| ConfigError(format!("field {field}: {e}")))
}

impl RunConfig {
    /// Builds the validated game, applying command-line mode overrides.
    pub fn build_game(&self, mode_override: Option<NumericMode>) -> Result<Game, ConfigError> {
        let g = &self.game;
        let selection = match &g.q {
            SelectionConfig::Scalar(text) => Selection::Uniform(parse_rational("game.q", text)?),
            SelectionConfig::PerPlayer(entries) => Selection::PerPlayer(
                entries
                    .iter()
                    .map(|text| parse_rational("game.q", text))
                    .collect::<Result<_, _>>()?,
            ),
        };
        let beta = match (&g.beta, g.variant.allows_retraction()) {
            (Some(text), _) => parse_rational("game.beta", text)?,
            (None, false) => Rational::zero(),
            (None, true) => {
                return Err(ConfigError(format!(
                    "field game.beta: required for the {} variant",
                    g.variant
                )))
            }
        };
        let numeric = match (mode_override, &self.mode) {
            (Some(mode), _) => mode,
            (None, Some(ModeConfig::Exact)) | (None, None) => NumericMode::Exact,
            (None, Some(ModeConfig::Float { epsilon })) => NumericMode::Float {
                epsilon: parse_rational("mode.epsilon", epsilon)?.to_f64(),
            },
        };
        let spec = GameSpec {
            n: g.n,
            k: g.k,
            selection,
            alpha: parse_rational("game.alpha", &g.alpha)?,
            beta,
            r: parse_rational("game.r", &g.r)?,
            v: match &g.v {
                Some(text) => parse_rational("game.v", text)?,
                None => Rational::zero(),
            },
            variant: g.variant,
            numeric,
        };
        validate_game(spec).map_err(|e| ConfigError(e.to_string()))
    }
}

pub fn build_profile(config: &ProfileConfig, n: usize) -> Result<StrategyProfile, ConfigError> {
    match config {
        ProfileConfig::Named(NamedProfile::AllIn) => Ok(StrategyProfile::all_in(n)),
        ProfileConfig::Named(NamedProfile::AllOut) => Ok(StrategyProfile::all_out(n)),
        ProfileConfig::Actions(actions) => {
            if actions.len() != n {
                return Err(ConfigError(format!(
                    "profile lists {} actions for population {n}",
                    actions.len()
                )));
            }
            Ok(StrategyProfile::new(actions.clone()))
        }
    }
}
