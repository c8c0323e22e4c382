//! Machine-readable reports. Every report embeds the input config and the
//! tool version, serializes exact rationals as `p/q` strings, and
//! re-parses under the same schema.

use crate::config::RunConfig;
use participation::calibration::{CalibrationReport, ExpenditureComparison};
use participation::equilibrium::{
    deviation_margins, DeviationMargin, EquilibriumRecord, LatticeReport, VerificationMethod,
};
use participation::error::Error;
use participation::game::{
    Action, Composition, CompositionCounts, Game, StrategyProfile, Variant,
};
use participation::numeric::{NumericMode, Rational};
use participation::simulation::{DynamicsTerminal, SimulationReport, UpdateOrder};
use participation::structure::{
    asymmetric_threshold_scan, retraction_lambda_scan, symmetric_basic_equilibria,
    universal_basic_characterize, universal_retraction_scan, AsymmetricScanReport,
    LambdaScanReport, SymmetricBasicReport,
};
use serde::{Deserialize, Serialize};

pub fn tool_version() -> &'static str {
    env!("CARGO_PKG_VERSION")
}

/// Decimal rendering with 12 significant digits.
pub fn sig12(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let formatted = format!("{:.11e}", x);
    let (mantissa, exponent) = formatted.split_once('e').expect("scientific notation");
    let exponent: i32 = exponent.parse().expect("integer exponent");
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    if exponent >= digits.len() as i32 - 1 {
        out.push_str(&digits);
        out.extend(std::iter::repeat_n('0', (exponent - digits.len() as i32 + 1) as usize));
    } else if exponent >= 0 {
        let point = (exponent + 1) as usize;
        out.push_str(&digits[..point]);
        out.push('.');
        out.push_str(&digits[point..]);
    } else {
        out.push_str("0.");
        out.extend(std::iter::repeat_n('0', (-exponent - 1) as usize));
        out.push_str(&digits);
    }
    if out.contains('.') {
        out.truncate(out.trim_end_matches('0').trim_end_matches('.').len());
    }
    out
}

#[derive(Serialize, Deserialize)]
pub struct ReportHeader {
    pub tool: String,
    pub tool_version: String,
    pub command: String,
    pub mode: NumericMode,
    pub config: RunConfig,
}

impl ReportHeader {
    pub fn new(command: &str, game: &Game, config: &RunConfig) -> Self {
        ReportHeader {
            tool: "participation".to_string(),
            tool_version: tool_version().to_string(),
            command: command.to_string(),
            mode: game.mode(),
            config: config.clone(),
        }
    }
}

#[derive(Serialize, Deserialize)]
pub struct EquilibriumEntry {
    pub profile: StrategyProfile,
    pub composition: Composition,
    pub class: CompositionCounts,
    pub margins: Vec<DeviationMargin>,
    pub verified_by: VerificationMethod,
}

/// Output of the structured finder that applies to the game, if any.
#[derive(Serialize, Deserialize)]
#[serde(tag = "finder", rename_all = "snake_case")]
pub enum StructureSection {
    SymmetricBasic(SymmetricBasicReport),
    AsymmetricThreshold(AsymmetricScanReport),
    UniversalBasic(SymmetricBasicReport),
    RetractionLambda(LambdaScanReport),
    UniversalRetractionLambda(LambdaScanReport),
}

#[derive(Serialize, Deserialize)]
pub struct EnumerateReport {
    #[serde(flatten)]
    pub header: ReportHeader,
    pub equilibria: Vec<EquilibriumEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub structure: Option<StructureSection>,
    /// "completed", or an explanation of why exhaustive search was skipped.
    pub brute_force: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lattice: Option<LatticeReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strong_equilibria: Option<Vec<StrongCheck>>,
    pub notes: Vec<String>,
}

#[derive(Serialize, Deserialize)]
pub struct StrongCheck {
    pub profile: StrategyProfile,
    pub max_coalition: usize,
    pub strong: bool,
}

/// Runs the structured finder matching the game's shape.
pub fn run_structure(game: &Game) -> Result<Option<StructureSection>, Error> {
    let section = match game.variant() {
        Variant::Basic => {
            if game.uniform_q().is_some() {
                Some(StructureSection::SymmetricBasic(symmetric_basic_equilibria(game)?))
            } else if game.value().is_zero() {
                Some(StructureSection::AsymmetricThreshold(asymmetric_threshold_scan(game)?))
            } else {
                None
            }
        }
        Variant::UniversalBasic if game.value().is_zero() => {
            Some(StructureSection::UniversalBasic(universal_basic_characterize(game)?))
        }
        Variant::Retraction if scannable(game) => {
            Some(StructureSection::RetractionLambda(retraction_lambda_scan(game)?))
        }
        Variant::UniversalRetraction if scannable(game) => {
            Some(StructureSection::UniversalRetractionLambda(universal_retraction_scan(game)?))
        }
        _ => None,
    };
    Ok(section)
}

fn scannable(game: &Game) -> bool {
    game.value().is_zero()
        && game.reward().is_positive()
        && game.uniform_q().is_some_and(|q| q < &Rational::one())
}

/// Profiles the structured finder vouches for, as canonical
/// representatives.
pub fn structure_profiles(game: &Game, section: &StructureSection) -> Vec<StrategyProfile> {
    let n = game.n();
    let mut profiles = Vec::new();
    match section {
        StructureSection::SymmetricBasic(report) | StructureSection::UniversalBasic(report) => {
            for lambda in report.lambdas(n) {
                profiles.push(StrategyProfile::split(n, lambda, Action::Abstain));
            }
        }
        StructureSection::AsymmetricThreshold(report) => {
            if report.all_out {
                profiles.push(StrategyProfile::all_out(n));
            }
            for set in report.equilibrium_contributor_sets() {
                let mut profile = StrategyProfile::all_out(n);
                for player in set {
                    profile.set_action(player, Action::Contribute);
                }
                profiles.push(profile);
            }
        }
        StructureSection::RetractionLambda(report)
        | StructureSection::UniversalRetractionLambda(report) => {
            if report.all_out {
                profiles.push(StrategyProfile::all_out(n));
            }
            for lambda in report.mixed_lambdas() {
                profiles.push(StrategyProfile::split(n, lambda, Action::Retract));
            }
            if report.all_in {
                profiles.push(StrategyProfile::all_in(n));
            }
        }
    }
    profiles
}

/// Builds a margin-certified equilibrium entry.
pub fn entry_for(
    game: &Game,
    profile: StrategyProfile,
    verified_by: VerificationMethod,
) -> EquilibriumEntry {
    let margins = deviation_margins(game, &profile).expect("profile admissible");
    let composition = profile.composition();
    EquilibriumEntry {
        class: composition.counts(),
        composition,
        profile,
        margins,
        verified_by,
    }
}

pub fn entry_from_record(record: EquilibriumRecord) -> EquilibriumEntry {
    EquilibriumEntry {
        class: record.composition.counts(),
        composition: record.composition,
        profile: record.profile,
        margins: record.margins,
        verified_by: record.verified_by,
    }
}

#[derive(Serialize, Deserialize)]
pub struct RationalValue {
    pub exact: Rational,
    pub decimal: String,
}

impl From<&Rational> for RationalValue {
    fn from(value: &Rational) -> Self {
        RationalValue { exact: value.clone(), decimal: sig12(value.to_f64()) }
    }
}

#[derive(Serialize, Deserialize)]
pub struct CalibrateReportDoc {
    #[serde(flatten)]
    pub header: ReportHeader,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub calibration: Option<CalibrationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_min: Option<RationalValue>,
    pub feasible: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub infeasible_reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comparison: Option<ComparisonDoc>,
}

#[derive(Serialize, Deserialize)]
pub struct ComparisonDoc {
    #[serde(flatten)]
    pub inner: ExpenditureComparison,
    pub tracked_expected_expenditure: RationalValue,
    pub universal_expenditure: RationalValue,
    pub verdict: String,
}

impl ComparisonDoc {
    pub fn new(inner: ExpenditureComparison) -> Self {
        let tracked_expected_expenditure = RationalValue::from(&inner.tracked.expenditure);
        let universal_expenditure = RationalValue::from(&inner.universal.expenditure);
        let verdict = if inner.strictly_higher {
            "universal expenditure strictly higher".to_string()
        } else if inner.universal_at_least_tracked {
            "universal expenditure at least tracked".to_string()
        } else {
            "universal expenditure lower".to_string()
        };
        ComparisonDoc { inner, tracked_expected_expenditure, universal_expenditure, verdict }
    }
}

#[derive(Serialize, Deserialize)]
pub struct SimulateReportDoc {
    #[serde(flatten)]
    pub header: ReportHeader,
    pub profile: StrategyProfile,
    pub simulation: SimulationReport,
    pub analytic_progress_probability: RationalValue,
    pub analytic_expected_utilities: Vec<RationalValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dynamics: Option<DynamicsDoc>,
}

#[derive(Serialize, Deserialize)]
pub struct DynamicsDoc {
    pub update_order: UpdateOrder,
    pub terminal: DynamicsTerminal,
    pub rounds: Vec<StrategyProfile>,
    pub final_profile_is_equilibrium: bool,
}

/// One sweep row: the swept value exactly and as a 12-digit decimal, plus
/// the equilibrium classes the finders report at that point.
pub struct SweepRow {
    pub parameter: String,
    pub value: Rational,
    pub all_out: bool,
    pub all_in: bool,
    pub window_lambdas: Vec<usize>,
    pub mixed_lambdas: Vec<usize>,
    pub classes: Vec<String>,
}

pub fn csv_header() -> Vec<&'static str> {
    vec![
        "parameter",
        "value_exact",
        "value_decimal",
        "equilibria",
        "all_out",
        "all_in",
        "window_lambdas",
        "mixed_lambdas",
    ]
}

impl SweepRow {
    pub fn to_record(&self) -> Vec<String> {
        let join = |xs: &[usize]| {
            xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(";")
        };
        vec![
            self.parameter.clone(),
            self.value.to_string(),
            sig12(self.value.to_f64()),
            self.classes.join(";"),
            self.all_out.to_string(),
            self.all_in.to_string(),
            join(&self.window_lambdas),
            join(&self.mixed_lambdas),
        ]
    }
}

/// Summarizes a structure section into sweep-row flags and class names.
pub fn summarize_structure(game: &Game, section: &StructureSection) -> SweepRow {
    let n = game.n();
    let mut row = SweepRow {
        parameter: String::new(),
        value: Rational::zero(),
        all_out: false,
        all_in: false,
        window_lambdas: Vec::new(),
        mixed_lambdas: Vec::new(),
        classes: Vec::new(),
    };
    match section {
        StructureSection::SymmetricBasic(report) | StructureSection::UniversalBasic(report) => {
            row.all_out = report.all_out;
            row.all_in = report.all_in;
            row.mixed_lambdas = report.interior.clone();
            for lambda in report.lambdas(n) {
                row.classes.push(class_name(lambda, n, false));
            }
        }
        StructureSection::AsymmetricThreshold(report) => {
            row.all_out = report.all_out;
            if report.all_out {
                row.classes.push("all_out".to_string());
            }
            for set in report.equilibrium_contributor_sets() {
                if set.len() == n {
                    row.all_in = true;
                    row.classes.push("all_in".to_string());
                } else {
                    row.mixed_lambdas.push(set.len());
                    let members: Vec<String> = set.iter().map(ToString::to_string).collect();
                    row.classes.push(format!("contributors({})", members.join(",")));
                }
            }
        }
        StructureSection::RetractionLambda(report)
        | StructureSection::UniversalRetractionLambda(report) => {
            row.all_out = report.all_out;
            row.all_in = report.all_in;
            row.window_lambdas = report.window.iter().map(|e| e.lambda).collect();
            row.mixed_lambdas = report.mixed_lambdas();
            if report.all_out {
                row.classes.push("all_out".to_string());
            }
            for lambda in &row.mixed_lambdas {
                row.classes.push(class_name(*lambda, n, true));
            }
            if report.all_in {
                row.classes.push("all_in".to_string());
            }
        }
    }
    row
}

fn class_name(lambda: usize, n: usize, free_riders: bool) -> String {
    if lambda == 0 {
        "all_out".to_string()
    } else if lambda == n {
        "all_in".to_string()
    } else if free_riders {
        format!("mixed(lambda={lambda})")
    } else {
        format!("interior(lambda={lambda})")
    }
}
