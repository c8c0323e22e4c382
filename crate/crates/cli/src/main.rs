//! Command-line front end: parse a game configuration, dispatch analyses,
//! emit machine-readable reports and sweep tables.
//!
//! Exit codes: 0 success, 2 config error, 3 enumeration guard exceeded.

mod config;
mod reports;

use clap::{Args, Parser, Subcommand, ValueEnum};
use config::{
    build_profile, parse_config, ConfigError, OrderConfig, RunConfig, SweepParameter,
    TargetConfig,
};
use participation::calibration::{
    expenditure_compare, r_min_all_in, r_min_mixed, CalibrationTarget,
};
use participation::equilibrium::{
    check_lattice_closure, composition_classes, contributor_sets, default_guard,
    enumerate_equilibria, is_equilibrium, is_strong_equilibrium, VerificationMethod,
};
use participation::error::Error;
use participation::game::{validate_game, Game, GameSpec, Selection};
use participation::numeric::{NumericMode, Rational};
use participation::prob::poisson_binomial_tail;
use participation::simulation::{
    best_response_dynamics, simulate_epochs, DynamicsTerminal, UpdateOrder,
};
use reports::{
    entry_for, entry_from_record, run_structure, structure_profiles, summarize_structure,
    CalibrateReportDoc, ComparisonDoc, DynamicsDoc, EnumerateReport, RationalValue,
    ReportHeader, SimulateReportDoc, StrongCheck, SweepRow,
};
use std::collections::BTreeSet;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "participation", version, about = "Equilibrium analysis for threshold participation games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List pure Nash equilibria with margins and verification evidence
    Enumerate(CommonArgs),
    /// Compute the minimum reward sustaining a target profile
    Calibrate(CommonArgs),
    /// Sweep one parameter and tabulate equilibrium classes as CSV
    Sweep(CommonArgs),
    /// Run seeded Monte Carlo epochs and optional best-response dynamics
    Simulate(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// JSON run configuration
    #[arg(long)]
    config: PathBuf,
    /// Output path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the numeric mode from the config
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Equality tolerance when --mode float
    #[arg(long)]
    epsilon: Option<String>,
    /// Seed override for simulation
    #[arg(long)]
    seed: Option<u64>,
    /// Trial-count override for simulation
    #[arg(long)]
    trials: Option<u64>,
    /// Population cap for exhaustive enumeration
    #[arg(long)]
    guard: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Float,
}

enum CliError {
    Config(String),
    Guard(String),
    Other(String),
}

impl From<ConfigError> for CliError {
    fn from(error: ConfigError) -> Self {
        CliError::Config(error.to_string())
    }
}

impl From<Error> for CliError {
    fn from(error: Error) -> Self {
        match error {
            Error::GuardExceeded { .. } => CliError::Guard(error.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(error: std::io::Error) -> Self {
        CliError::Other(error.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Enumerate(args) => run_enumerate(args),
        Command::Calibrate(args) => run_calibrate(args),
        Command::Sweep(args) => run_sweep(args),
        Command::Simulate(args) => run_simulate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
        Err(CliError::Guard(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(3)
        }
        Err(CliError::Other(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}

fn load(args: &CommonArgs) -> Result<(RunConfig, Game), CliError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", args.config.display())))?;
    let config = parse_config(&text)?;
    let mode_override = match (args.mode, &args.epsilon) {
        (Some(ModeArg::Exact), _) => Some(NumericMode::Exact),
        (Some(ModeArg::Float), epsilon) => {
            let epsilon = match epsilon {
                Some(text) => text
                    .parse::<Rational>()
                    .map_err(|e| CliError::Config(format!("--epsilon: {e}")))?
                    .to_f64(),
                None => 1e-9,
            };
            Some(NumericMode::Float { epsilon })
        }
        (None, Some(_)) => {
            return Err(CliError::Config("--epsilon requires --mode float".to_string()))
        }
        (None, None) => None,
    };
    let game = config.build_game(mode_override)?;
    Ok((config, game))
}

fn write_output(args: &CommonArgs, contents: &str) -> Result<(), CliError> {
    match &args.out {
        Some(path) => std::fs::write(path, contents)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(contents.as_bytes())?;
        }
    }
    Ok(())
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<String, CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Other(format!("serialization failed: {e}")))?;
    text.push('\n');
    Ok(text)
}

fn run_enumerate(args: &CommonArgs) -> Result<(), CliError> {
    let (config, game) = load(args)?;
    let options = config.enumerate.clone().unwrap_or_default();
    let guard = args.guard.or(options.guard).unwrap_or_else(|| default_guard(&game));
    let mut notes = Vec::new();

    let structure = run_structure(&game)?;
    if structure.is_none() {
        notes.push(
            "no structured finder covers this game shape; relying on exhaustive search"
                .to_string(),
        );
    }

    let brute = if game.n() <= guard {
        Some(enumerate_equilibria(&game, Some(guard))?)
    } else {
        None
    };
    if brute.is_none() && structure.is_none() {
        return Err(Error::GuardExceeded { n: game.n(), guard }.into());
    }

    let equilibria: Vec<reports::EquilibriumEntry> = match (&brute, &structure) {
        (Some(records), _) => {
            let class_set: Option<BTreeSet<_>> = structure
                .as_ref()
                .map(|s| structure_profiles(&game, s).iter().map(|p| p.composition().counts()).collect());
            let set_set: Option<BTreeSet<_>> = structure
                .as_ref()
                .map(|s| {
                    structure_profiles(&game, s)
                        .iter()
                        .map(|p| p.composition().contributors)
                        .collect()
                });
            records
                .iter()
                .cloned()
                .map(|mut record| {
                    let vouched = match (&class_set, &set_set) {
                        (Some(classes), Some(sets)) => {
                            classes.contains(&record.composition.counts())
                                && (game.uniform_q().is_some()
                                    || sets.contains(&record.composition.contributors))
                        }
                        _ => false,
                    };
                    if vouched {
                        record.verified_by = VerificationMethod::Both;
                    }
                    entry_from_record(record)
                })
                .collect()
        }
        (None, Some(section)) => {
            notes.push(format!(
                "brute force skipped: guard exceeded (population {} > guard {guard})",
                game.n()
            ));
            structure_profiles(&game, section)
                .into_iter()
                .map(|profile| entry_for(&game, profile, VerificationMethod::Structure))
                .collect()
        }
        (None, None) => unreachable!(),
    };

    if let Some(records) = &brute {
        if let Some(section) = &structure {
            let brute_classes = composition_classes(records);
            let brute_sets = contributor_sets(records);
            let structure_profiles = structure_profiles(&game, section);
            let scan_classes: BTreeSet<_> =
                structure_profiles.iter().map(|p| p.composition().counts()).collect();
            let scan_sets: BTreeSet<_> =
                structure_profiles.iter().map(|p| p.composition().contributors).collect();
            let agree = if game.uniform_q().is_some() {
                brute_classes == scan_classes
            } else {
                brute_sets == scan_sets
            };
            if !agree {
                notes.push("structured finder and exhaustive search disagree".to_string());
            }
        }
    }

    let lattice = if options.check_lattice {
        Some(check_lattice_closure(&game, Some(guard))?)
    } else {
        None
    };
    let strong_equilibria = match options.strong_coalitions {
        Some(max_coalition) => Some(
            equilibria
                .iter()
                .map(|entry| {
                    is_strong_equilibrium(&game, &entry.profile, max_coalition).map(|strong| {
                        StrongCheck { profile: entry.profile.clone(), max_coalition, strong }
                    })
                })
                .collect::<Result<Vec<_>, _>>()?,
        ),
        None => None,
    };

    let report = EnumerateReport {
        header: ReportHeader::new("enumerate", &game, &config),
        equilibria,
        structure,
        brute_force: match brute {
            Some(_) => "completed".to_string(),
            None => format!("skipped: guard exceeded (population {} > guard {guard})", game.n()),
        },
        lattice,
        strong_equilibria,
        notes,
    };
    write_output(args, &to_json(&report)?)
}

fn run_calibrate(args: &CommonArgs) -> Result<(), CliError> {
    let (config, game) = load(args)?;
    let section = config
        .calibrate
        .clone()
        .ok_or_else(|| CliError::Config("missing \"calibrate\" section".to_string()))?;
    let target = match section.target {
        TargetConfig::AllIn => CalibrationTarget::AllIn,
        TargetConfig::Mixed { lambda } => CalibrationTarget::Mixed { lambda },
    };

    let calibration = match target {
        CalibrationTarget::AllIn => r_min_all_in(&game),
        CalibrationTarget::Mixed { lambda } => r_min_mixed(&game, lambda),
    };
    let (calibration, feasible, infeasible_reason) = match calibration {
        Ok(report) => (Some(report), true, None),
        Err(Error::InfeasibleTarget { reason, .. }) => (None, false, Some(reason)),
        Err(other) => return Err(other.into()),
    };

    let comparison = if section.compare_universal {
        if game.variant().universal_payments() {
            return Err(CliError::Config(
                "compare_universal requires a tracked (non-universal) scheme as the base game"
                    .to_string(),
            ));
        }
        let mut universal_spec = game.spec().clone();
        universal_spec.variant = game.variant().universal_counterpart();
        let universal = validate_game(universal_spec)?;
        Some(ComparisonDoc::new(expenditure_compare(&game, &universal, target)?))
    } else {
        None
    };

    let r_min = calibration.as_ref().map(|c| RationalValue::from(&c.r_min));
    let report = CalibrateReportDoc {
        header: ReportHeader::new("calibrate", &game, &config),
        calibration,
        r_min,
        feasible,
        infeasible_reason,
        comparison,
    };
    write_output(args, &to_json(&report)?)
}

fn sweep_grid(start: &Rational, stop: &Rational, step: &Rational) -> Result<Vec<Rational>, CliError> {
    if !step.is_positive() || start > stop {
        return Err(CliError::Config("sweep range is empty or inverted".to_string()));
    }
    let mut values = Vec::new();
    let mut current = start.clone();
    while &current <= stop {
        values.push(current.clone());
        current = &current + step;
    }
    Ok(values)
}

fn apply_sweep_value(
    base: &GameSpec,
    parameter: SweepParameter,
    value: &Rational,
) -> Result<Game, CliError> {
    let mut spec = base.clone();
    match parameter {
        SweepParameter::R => spec.r = value.clone(),
        SweepParameter::Alpha => spec.alpha = value.clone(),
        SweepParameter::Beta => spec.beta = value.clone(),
        SweepParameter::Q => match &spec.selection {
            Selection::Uniform(_) => spec.selection = Selection::Uniform(value.clone()),
            Selection::PerPlayer(_) => {
                return Err(CliError::Config(
                    "sweeping q requires a scalar selection probability".to_string(),
                ))
            }
        },
        SweepParameter::K => {
            let k = value
                .ceil_to_usize()
                .filter(|k| &Rational::from_int(*k as i64) == value)
                .ok_or_else(|| {
                    CliError::Config(format!("swept k value {value} is not a nonnegative integer"))
                })?;
            spec.k = k;
        }
    }
    validate_game(spec)
        .map_err(|e| CliError::Config(format!("at swept value {value}: {e}")))
}

fn run_sweep(args: &CommonArgs) -> Result<(), CliError> {
    let (config, game) = load(args)?;
    let section = config
        .sweep
        .clone()
        .ok_or_else(|| CliError::Config("missing \"sweep\" section".to_string()))?;
    let parse = |field: &str, text: &str| -> Result<Rational, CliError> {
        text.parse().map_err(|e| CliError::Config(format!("sweep.{field}: {e}")))
    };
    let start = parse("start", &section.start)?;
    let stop = parse("stop", &section.stop)?;
    let step = parse("step", &section.step)?;
    let guard = args.guard.unwrap_or_else(|| default_guard(&game));
    let parameter_name = format!("{:?}", section.parameter).to_lowercase();

    let mut rows = Vec::new();
    for value in sweep_grid(&start, &stop, &step)? {
        let point = apply_sweep_value(game.spec(), section.parameter, &value)?;
        let mut row = match run_structure(&point)? {
            Some(section) => summarize_structure(&point, &section),
            None => {
                // No structural characterization: fall back to exhaustive
                // search (guard permitting) and classify its records.
                let records = enumerate_equilibria(&point, Some(guard))?;
                let mut row = SweepRow {
                    parameter: String::new(),
                    value: Rational::zero(),
                    all_out: false,
                    all_in: false,
                    window_lambdas: Vec::new(),
                    mixed_lambdas: Vec::new(),
                    classes: Vec::new(),
                };
                for class in composition_classes(&records) {
                    if class.contributors == point.n() {
                        row.all_in = true;
                        row.classes.push("all_in".to_string());
                    } else if class.contributors == 0 && class.free_riders == 0 {
                        row.all_out = true;
                        row.classes.push("all_out".to_string());
                    } else {
                        row.mixed_lambdas.push(class.contributors);
                        row.classes.push(format!(
                            "mixed(contributors={},free_riders={},abstainers={})",
                            class.contributors, class.free_riders, class.abstainers
                        ));
                    }
                }
                row
            }
        };
        row.parameter = parameter_name.clone();
        row.value = value;
        rows.push(row);
    }

    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(reports::csv_header())
        .and_then(|()| rows.iter().try_for_each(|row| writer.write_record(row.to_record())))
        .map_err(|e| CliError::Other(format!("csv: {e}")))?;
    let bytes = writer.into_inner().map_err(|e| CliError::Other(format!("csv: {e}")))?;
    let text = String::from_utf8(bytes).map_err(|e| CliError::Other(format!("csv: {e}")))?;
    write_output(args, &text)
}

fn run_simulate(args: &CommonArgs) -> Result<(), CliError> {
    let (config, game) = load(args)?;
    let section = config
        .simulate
        .clone()
        .ok_or_else(|| CliError::Config("missing \"simulate\" section".to_string()))?;
    let trials = args
        .trials
        .or(section.trials)
        .ok_or_else(|| CliError::Config("trials missing (config simulate.trials or --trials)".to_string()))?;
    let seed = args
        .seed
        .or(section.seed)
        .ok_or_else(|| CliError::Config("seed missing (config simulate.seed or --seed)".to_string()))?;
    let profile = build_profile(&section.profile, game.n())?;
    game.validate_profile(&profile)?;

    let simulation = simulate_epochs(&game, &profile, trials, seed)?;
    let contributor_probs: Vec<Rational> = (0..game.n())
        .filter(|&i| profile.action(i) == participation::game::Action::Contribute)
        .map(|i| game.q_of(i).clone())
        .collect();
    let analytic_progress = poisson_binomial_tail(&contributor_probs, game.k() as i64)?;
    let analytic_utilities: Vec<RationalValue> = (0..game.n())
        .map(|i| game.expected_utility(&profile, i).map(|u| RationalValue::from(&u)))
        .collect::<Result<_, _>>()?;

    let dynamics = match &section.dynamics {
        Some(dynamics_config) => {
            let initial = match &dynamics_config.initial {
                Some(p) => build_profile(p, game.n())?,
                None => profile.clone(),
            };
            let order = match dynamics_config.order {
                OrderConfig::RoundRobin => UpdateOrder::RoundRobin,
                OrderConfig::RandomPermutation => UpdateOrder::RandomPermutationPerRound,
            };
            let trace =
                best_response_dynamics(&game, &initial, order, dynamics_config.max_rounds, seed)?;
            let final_profile = trace.rounds.last().expect("trace holds the initial profile");
            let final_is_equilibrium = trace.terminal == DynamicsTerminal::FixedPoint
                && is_equilibrium(&game, final_profile)?;
            Some(DynamicsDoc {
                update_order: trace.update_order,
                terminal: trace.terminal,
                rounds: trace.rounds,
                final_profile_is_equilibrium: final_is_equilibrium,
            })
        }
        None => None,
    };

    let report = SimulateReportDoc {
        header: ReportHeader::new("simulate", &game, &config),
        profile,
        simulation,
        analytic_progress_probability: RationalValue::from(&analytic_progress),
        analytic_expected_utilities: analytic_utilities,
        dynamics,
    };
    write_output(args, &to_json(&report)?)
}
