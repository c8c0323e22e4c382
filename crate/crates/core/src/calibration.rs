//! Reward design: the smallest reward sustaining a target equilibrium, per
//! scheme, and expenditure comparisons between tracked and universal
//! payments.
//!
//! Every bound is solved in closed form from the corresponding equilibrium
//! constraint; the self-referential participation bound (beta/r appears
//! inside it) is resolved algebraically to `(alpha + q*beta) / denominator`
//! rather than iterated numerically.

use crate::equilibrium::is_equilibrium;
use crate::error::Error;
use crate::game::{Action, Game, StrategyProfile, Variant};
use crate::numeric::Rational;
use crate::prob::{binomial_tail, f_or_zero};
use serde::{Deserialize, Serialize};

/// The profile class a reward is calibrated for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CalibrationTarget {
    AllIn,
    Mixed { lambda: usize },
}

/// Which lower bound on the reward binds at the minimum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BindingConstraint {
    /// Contributors must prefer working over retracting: r >= beta / f.
    BetaWindow,
    /// Participants must prefer joining over abstaining.
    Participation,
    /// Free riders must prefer staying over abstaining.
    FreeRider,
}

/// The three reward lower bounds behind a calibration; the vacuous ones
/// are zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RewardBounds {
    pub beta_window: Rational,
    pub participation: Rational,
    pub free_rider: Rational,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub variant: Variant,
    pub target: CalibrationTarget,
    pub r_min: Rational,
    pub binding_constraint: BindingConstraint,
    pub bounds: RewardBounds,
    /// Expected total payout per epoch at `r_min`: `n * r_min` under
    /// universal payments, `q * n * r_min` under eligibility-gated ones.
    pub expenditure: Rational,
    /// Whether the target profile is an equilibrium at exactly `r_min`
    /// (weak constraints make the bound attained).
    pub attained: bool,
}

fn pick_binding(bounds: &RewardBounds) -> (Rational, BindingConstraint) {
    let mut best = (bounds.beta_window.clone(), BindingConstraint::BetaWindow);
    for (value, which) in [
        (&bounds.participation, BindingConstraint::Participation),
        (&bounds.free_rider, BindingConstraint::FreeRider),
    ] {
        if *value > best.0 {
            best = (value.clone(), which);
        }
    }
    best
}

fn expenditure_at(game: &Game, r_min: &Rational) -> Rational {
    let n = Rational::from_int(game.n() as i64);
    if game.variant().universal_payments() {
        n * r_min
    } else {
        game.uniform_q().expect("calibration requires scalar q") * n * r_min
    }
}

fn finish(
    game: &Game,
    target: CalibrationTarget,
    bounds: RewardBounds,
    profile: &StrategyProfile,
) -> CalibrationReport {
    let (r_min, binding_constraint) = pick_binding(&bounds);
    let attained = is_equilibrium(&game.with_reward(r_min.clone()), profile)
        .expect("profile admissible for this variant");
    CalibrationReport {
        variant: game.variant(),
        target,
        expenditure: expenditure_at(game, &r_min),
        r_min,
        binding_constraint,
        bounds,
        attained,
    }
}

/// Smallest reward making the all-in profile an equilibrium.
pub fn r_min_all_in(game: &Game) -> Result<CalibrationReport, Error> {
    let op = "r_min_all_in";
    let q = game
        .uniform_q()
        .ok_or(Error::Unsupported { op, requirement: "a scalar selection probability" })?
        .clone();
    let (n, k) = (game.n(), game.k());
    let (alpha, beta, v) = (game.alpha(), game.beta(), game.value());
    let zero = Rational::zero();

    let bounds = match game.variant() {
        Variant::Basic => {
            // q[(r+v) tail(n-1,k-1,q) - v tail(n-1,k,q)] >= alpha, solved
            // for r; r = 0 already suffices when v carries the incentive.
            let t_given = binomial_tail(n as u64 - 1, k as i64 - 1, &q)?;
            let numer = alpha / &q - v * f_or_zero(n as u64, k as u64, &q);
            let participation = (numer / &t_given).max(zero.clone());
            RewardBounds { beta_window: zero.clone(), participation, free_rider: zero }
        }
        Variant::UniversalBasic => {
            if !v.is_zero() {
                return Err(Error::Unsupported { op, requirement: "v = 0 for universal payments" });
            }
            let t_all = binomial_tail(n as u64, k as i64, &q)?;
            RewardBounds {
                beta_window: zero.clone(),
                participation: alpha / &t_all,
                free_rider: zero,
            }
        }
        Variant::Retraction | Variant::UniversalRetraction => {
            if !v.is_zero() {
                return Err(Error::Unsupported { op, requirement: "v = 0 for retraction schemes" });
            }
            let f_all = f_or_zero(n as u64, k as u64, &q);
            let beta_window = if beta.is_zero() {
                zero.clone()
            } else if f_all.is_zero() {
                return Err(Error::InfeasibleTarget {
                    target: "all_in".to_string(),
                    reason: format!(
                        "f(n,k,q) = 0 with beta = {beta}: no reward keeps contributors working"
                    ),
                });
            } else {
                beta / &f_all
            };
            let denom = if game.variant() == Variant::Retraction {
                &q * binomial_tail(n as u64 - 1, k as i64 - 1, &q)?
            } else {
                &q * &f_all + binomial_tail(n as u64 - 1, k as i64, &q)?
            };
            let participation = (alpha + &q * beta) / denom;
            RewardBounds { beta_window, participation, free_rider: zero }
        }
    };
    Ok(finish(game, CalibrationTarget::AllIn, bounds, &StrategyProfile::all_in(n)))
}

/// Smallest reward making the profile with `lambda` contributors and
/// `n - lambda` free riders an equilibrium, under a retraction scheme.
///
/// Errors when no reward admits the window: the smallest reward satisfying
/// the three lower bounds may already push `beta/r` below
/// `f(lambda+1,k,q)`, at which point free riders prefer to contribute.
pub fn r_min_mixed(game: &Game, lambda: usize) -> Result<CalibrationReport, Error> {
    let op = "r_min_mixed";
    if !game.variant().allows_retraction() {
        return Err(Error::Unsupported { op, requirement: "a retraction variant" });
    }
    if !game.value().is_zero() {
        return Err(Error::Unsupported { op, requirement: "v = 0" });
    }
    let q = game
        .uniform_q()
        .ok_or(Error::Unsupported { op, requirement: "a scalar selection probability" })?
        .clone();
    if q >= Rational::one() {
        return Err(Error::Unsupported { op, requirement: "q strictly below 1" });
    }
    let (n, k) = (game.n(), game.k());
    let (alpha, beta) = (game.alpha(), game.beta());
    let floor = {
        let bound = Rational::from_int(k as i64 - 1) / &q;
        bound.ceil_to_usize().unwrap_or(usize::MAX).max(1)
    };
    if lambda < floor || lambda + 1 > n {
        return Err(Error::InfeasibleTarget {
            target: format!("mixed(lambda={lambda})"),
            reason: format!("lambda must lie in [{floor}, {}]", n - 1),
        });
    }

    let f_high = f_or_zero(lambda as u64, k as u64, &q);
    let f_low = f_or_zero(lambda as u64 + 1, k as u64, &q);
    let beta_window = if beta.is_zero() { Rational::zero() } else { beta / &f_high };
    let (participation, free_rider) = if game.variant() == Variant::Retraction {
        let t_given = binomial_tail(lambda as u64 - 1, k as i64 - 1, &q)?;
        let t_free = binomial_tail(lambda as u64, k as i64, &q)?;
        ((alpha + &q * beta) / (&q * t_given), alpha / (&q * t_free))
    } else {
        let t_excl = binomial_tail(lambda as u64 - 1, k as i64, &q)?;
        let t_free = binomial_tail(lambda as u64, k as i64, &q)?;
        ((alpha + &q * beta) / (&q * &f_high + t_excl), alpha / t_free)
    };
    let bounds = RewardBounds { beta_window, participation, free_rider };
    let (r_min, _) = pick_binding(&bounds);

    // Upper side of the window at the candidate minimum: free riders stay
    // free riders only while beta/r >= f(lambda+1,k,q).
    if !game.mode().ge(beta, &(&r_min * &f_low)) {
        return Err(Error::InfeasibleTarget {
            target: format!("mixed(lambda={lambda})"),
            reason: format!(
                "at the smallest reward satisfying the lower bounds ({r_min}), beta/r falls \
                 below f(lambda+1,k,q); no reward admits this contributor count"
            ),
        });
    }
    let profile = StrategyProfile::split(n, lambda, Action::Retract);
    Ok(finish(game, CalibrationTarget::Mixed { lambda }, bounds, &profile))
}

/// Calibrates the same target under a tracked scheme and its universal
/// counterpart and compares total expenditures.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpenditureComparison {
    pub tracked: CalibrationReport,
    pub universal: CalibrationReport,
    /// `n * r'_min >= q * n * r_min` (the universal corollaries).
    pub universal_at_least_tracked: bool,
    pub strictly_higher: bool,
}

pub fn expenditure_compare(
    tracked: &Game,
    universal: &Game,
    target: CalibrationTarget,
) -> Result<ExpenditureComparison, Error> {
    let mut mismatches = Vec::new();
    if tracked.variant().universal_payments() {
        mismatches.push(format!("first game must be tracked, got {}", tracked.variant()));
    }
    if universal.variant() != tracked.variant().universal_counterpart() {
        mismatches.push(format!(
            "second game must be the universal counterpart {}, got {}",
            tracked.variant().universal_counterpart(),
            universal.variant()
        ));
    }
    let t = tracked.spec();
    let u = universal.spec();
    if (t.n, t.k) != (u.n, u.k) {
        mismatches.push("population or threshold differ".to_string());
    }
    if t.selection != u.selection {
        mismatches.push("selection probabilities differ".to_string());
    }
    if t.alpha != u.alpha || t.beta != u.beta || t.v != u.v {
        mismatches.push("cost or value parameters differ".to_string());
    }
    if !mismatches.is_empty() {
        return Err(Error::MismatchedPair { reason: mismatches.join("; ") });
    }

    let calibrate = |game: &Game| match target {
        CalibrationTarget::AllIn => r_min_all_in(game),
        CalibrationTarget::Mixed { lambda } => r_min_mixed(game, lambda),
    };
    let tracked_report = calibrate(tracked)?;
    let universal_report = calibrate(universal)?;
    let mode = tracked.mode();
    let universal_at_least_tracked =
        mode.ge(&universal_report.expenditure, &tracked_report.expenditure);
    let strictly_higher = mode.gt(&universal_report.expenditure, &tracked_report.expenditure);
    Ok(ExpenditureComparison {
        tracked: tracked_report,
        universal: universal_report,
        universal_at_least_tracked,
        strictly_higher,
    })
}
