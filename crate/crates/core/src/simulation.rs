//! Monte Carlo validation of the analytic quantities, and best-response
//! dynamics over repeated play.
//!
//! Reproducibility: trials draw from ChaCha12 with the report seed as key
//! and the trial index as stream, so runs are bit-identical per seed and
//! trials stay independent of execution order.

use crate::error::Error;
use crate::game::{Action, Game, StrategyProfile, Variant};
use crate::numeric::Rational;
use num::bigint::BigInt;
use num::ToPrimitive;
use rand::seq::SliceRandom;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub trials: u64,
    pub seed: u64,
    pub empirical_progress_rate: f64,
    pub per_player_mean_utility: Vec<f64>,
    /// Sample standard deviation of each player's payoff over sqrt(trials).
    pub standard_errors: Vec<f64>,
}

/// Eligibility threshold on a uniform u64 draw: `floor(q * 2^64)`, so
/// `q = 1` is always eligible and the bias for non-dyadic `q` is below
/// 2^-64.
fn eligibility_threshold(q: &Rational) -> u128 {
    let scaled: BigInt = (q.numer() << 64u32) / q.denom();
    scaled.to_u128().expect("q <= 1 so the threshold fits in u128")
}

/// Samples `trials` epochs of the profile and reports empirical progress
/// rate and per-player mean payoffs with standard errors.
pub fn simulate_epochs(
    game: &Game,
    profile: &StrategyProfile,
    trials: u64,
    seed: u64,
) -> Result<SimulationReport, Error> {
    game.validate_profile(profile)?;
    if trials == 0 {
        return Err(Error::Unsupported { op: "simulate_epochs", requirement: "at least one trial" });
    }
    let n = game.n();
    let k = game.k();
    let variant = game.variant();
    let alpha = game.alpha().to_f64();
    let beta = game.beta().to_f64();
    let reward_value = (game.reward() + game.value()).to_f64();
    let value = game.value().to_f64();

    // Participants check eligibility each epoch; only contributors push
    // progress.
    let participants: Vec<(usize, bool, u128)> = (0..n)
        .filter(|&i| profile.action(i) != Action::Abstain)
        .map(|i| {
            (i, profile.action(i) == Action::Contribute, eligibility_threshold(game.q_of(i)))
        })
        .collect();

    let mut progress_count = 0u64;
    let mut sums = vec![0.0f64; n];
    let mut squares = vec![0.0f64; n];
    let mut eligible = vec![false; n];
    for trial in 0..trials {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(trial);
        let mut eligible_contributors = 0usize;
        for &(i, contributes, threshold) in &participants {
            let draw = rng.next_u64() as u128;
            eligible[i] = draw < threshold;
            if eligible[i] && contributes {
                eligible_contributors += 1;
            }
        }
        let progress = eligible_contributors >= k;
        if progress {
            progress_count += 1;
        }
        for i in 0..n {
            let payoff = payoff_for(
                variant,
                profile.action(i),
                eligible[i],
                progress,
                alpha,
                beta,
                reward_value,
                value,
            );
            sums[i] += payoff;
            squares[i] += payoff * payoff;
        }
    }

    let t = trials as f64;
    let per_player_mean_utility: Vec<f64> = sums.iter().map(|s| s / t).collect();
    let standard_errors: Vec<f64> = per_player_mean_utility
        .iter()
        .zip(&squares)
        .map(|(mean, sq)| {
            if trials < 2 {
                0.0
            } else {
                let var = ((sq - t * mean * mean) / (t - 1.0)).max(0.0);
                (var / t).sqrt()
            }
        })
        .collect();
    Ok(SimulationReport {
        trials,
        seed,
        empirical_progress_rate: progress_count as f64 / t,
        per_player_mean_utility,
        standard_errors,
    })
}

/// Event tables: one epoch's payoff given eligibility and progress.
#[allow(clippy::too_many_arguments)]
fn payoff_for(
    variant: Variant,
    action: Action,
    eligible: bool,
    progress: bool,
    alpha: f64,
    beta: f64,
    reward_value: f64,
    value: f64,
) -> f64 {
    let progress_part = match (variant, action, eligible) {
        (_, Action::Abstain, _) => return if progress { value } else { 0.0 },
        (Variant::Basic, Action::Contribute, true) => reward_value,
        (Variant::Basic, Action::Contribute, false) => value,
        (Variant::Retraction, Action::Contribute, true) => reward_value,
        (Variant::Retraction, Action::Contribute, false) => value,
        (Variant::Retraction, Action::Retract, true) => reward_value,
        (Variant::Retraction, Action::Retract, false) => value,
        (Variant::UniversalBasic, Action::Contribute, _) => reward_value,
        (Variant::UniversalRetraction, Action::Contribute, _) => reward_value,
        (Variant::UniversalRetraction, Action::Retract, _) => reward_value,
        (Variant::Basic | Variant::UniversalBasic, Action::Retract, _) => {
            unreachable!("profile validated against variant")
        }
    };
    let task_cost = if eligible && action == Action::Contribute { beta } else { 0.0 };
    let base = -alpha - task_cost;
    if progress {
        progress_part + base
    } else {
        base
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateOrder {
    RoundRobin,
    RandomPermutationPerRound,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DynamicsTerminal {
    FixedPoint,
    CycleDetected { period: usize },
    Truncated,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DynamicsTrace {
    /// Profile after each completed round; the initial profile first.
    pub rounds: Vec<StrategyProfile>,
    pub terminal: DynamicsTerminal,
    pub update_order: UpdateOrder,
}

/// Sequential best-response dynamics. Each player moves only to a strictly
/// better action; ties break toward the current action, then contribute,
/// then retract, then abstain. Terminates at a fixed point (which is then
/// a Nash equilibrium by construction), a detected profile cycle, or
/// `max_rounds`.
pub fn best_response_dynamics(
    game: &Game,
    initial: &StrategyProfile,
    order: UpdateOrder,
    max_rounds: usize,
    seed: u64,
) -> Result<DynamicsTrace, Error> {
    game.validate_profile(initial)?;
    let n = game.n();
    let mode = game.mode();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut current = initial.clone();
    let mut rounds = vec![current.clone()];
    let mut seen: HashMap<StrategyProfile, usize> = HashMap::from([(current.clone(), 0)]);

    // Preference order among equally good improvements.
    let preference = [Action::Contribute, Action::Retract, Action::Abstain];
    for round in 1..=max_rounds {
        let mut schedule: Vec<usize> = (0..n).collect();
        if order == UpdateOrder::RandomPermutationPerRound {
            schedule.shuffle(&mut rng);
        }
        let mut changed = false;
        for &player in &schedule {
            let mut best_action = current.action(player);
            let mut best_utility = game
                .expected_utility_of(&current, player, best_action)
                .expect("profile stays admissible");
            for candidate in preference {
                if candidate == current.action(player)
                    || !game.admissible_actions().contains(&candidate)
                {
                    continue;
                }
                let utility = game
                    .expected_utility_of(&current, player, candidate)
                    .expect("candidate is admissible");
                if mode.gt(&utility, &best_utility) {
                    best_action = candidate;
                    best_utility = utility;
                }
            }
            if best_action != current.action(player) {
                current.set_action(player, best_action);
                changed = true;
            }
        }
        if !changed {
            debug_assert!(crate::equilibrium::is_equilibrium(game, &current)
                .expect("profile admissible"));
            return Ok(DynamicsTrace {
                rounds,
                terminal: DynamicsTerminal::FixedPoint,
                update_order: order,
            });
        }
        rounds.push(current.clone());
        if let Some(&previous) = seen.get(&current) {
            return Ok(DynamicsTrace {
                rounds,
                terminal: DynamicsTerminal::CycleDetected { period: round - previous },
                update_order: order,
            });
        }
        seen.insert(current.clone(), round);
    }
    Ok(DynamicsTrace { rounds, terminal: DynamicsTerminal::Truncated, update_order: order })
}
