//! Fast equilibrium finders: lambda scans for symmetric games, threshold
//! scans over distinct selection probabilities, and feasibility ranges for
//! beta/r.
//!
//! Every check here is written in multiplied-out form (`alpha + q*beta <=
//! q*r*tail` rather than a ratio), so the inequalities evaluated are
//! literally the same rationals as the utility margins in
//! [`crate::equilibrium`] and the two routes agree even on boundary ties.
//! The scans characterize games with a positive participation cost; with
//! `alpha = 0` every indifferent profile is an equilibrium and no finite
//! scan is exhaustive.

use crate::error::Error;
use crate::game::{Game, Variant};
use crate::numeric::Rational;
use crate::prob::{binomial_tail, f_or_zero, poisson_binomial_tail};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

fn require(cond: bool, op: &'static str, requirement: &'static str) -> Result<(), Error> {
    if cond {
        Ok(())
    } else {
        Err(Error::Unsupported { op, requirement })
    }
}

fn uniform_q<'g>(game: &'g Game, op: &'static str) -> Result<&'g Rational, Error> {
    game.uniform_q()
        .ok_or(Error::Unsupported { op, requirement: "a scalar selection probability" })
}

/// Smallest contributor count admitted by the retraction window:
/// `max(1, ceil((k-1)/q))`.
fn lambda_floor(k: usize, q: &Rational) -> usize {
    let bound = Rational::from_int(k as i64 - 1) / q;
    bound.ceil_to_usize().unwrap_or(usize::MAX).max(1)
}

/// Equilibrium classes of a symmetric game that only admits all-in or
/// all-out (plus, for v > 0 in the basic scheme, interior candidates).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetricBasicReport {
    pub all_out: bool,
    pub all_in: bool,
    /// Interior contributor counts passing both constraints; empty for v=0.
    pub interior: Vec<usize>,
}

impl SymmetricBasicReport {
    /// Contributor counts of all reported equilibria.
    pub fn lambdas(&self, n: usize) -> BTreeSet<usize> {
        let mut set = BTreeSet::new();
        if self.all_out {
            set.insert(0);
        }
        set.extend(self.interior.iter().copied());
        if self.all_in {
            set.insert(n);
        }
        set
    }
}

/// Characterizes the symmetric basic game.
///
/// For v = 0 the answer is a subset of {all-out, all-in}: all-in holds iff
/// `q * r * tail(n-1, k-1, q) >= alpha`, all-out iff `k > 1` or the lone
/// deviator cannot profit. For v > 0 every interior lambda is checked
/// against both constraints directly.
pub fn symmetric_basic_equilibria(game: &Game) -> Result<SymmetricBasicReport, Error> {
    require(game.variant() == Variant::Basic, "symmetric_basic_equilibria", "the basic variant")?;
    let q = uniform_q(game, "symmetric_basic_equilibria")?;
    let (n, k) = (game.n(), game.k());
    let mode = game.mode();
    let (alpha, r, v) = (game.alpha(), game.reward(), game.value());
    let reward_value = r + v;

    // Contributor-side LHS of the equilibrium condition with lambda
    // contributors, seen from inside: q[(r+v) tail(l-1,k-1,q) - v tail(l-1,k,q)].
    let contributor_lhs = |lambda: usize| -> Rational {
        let t_given = binomial_tail(lambda as u64 - 1, k as i64 - 1, q).expect("validated");
        let t_excl = binomial_tail(lambda as u64 - 1, k as i64, q).expect("validated");
        q * (&reward_value * t_given - v * t_excl)
    };
    // Abstainer-side LHS with lambda contributors, seen from outside.
    let abstainer_lhs = |lambda: usize| -> Rational {
        let t_given = binomial_tail(lambda as u64, k as i64 - 1, q).expect("validated");
        let t_excl = binomial_tail(lambda as u64, k as i64, q).expect("validated");
        q * (&reward_value * t_given - v * t_excl)
    };

    let all_out = if k > 1 { true } else { mode.le(&(q * &reward_value), alpha) };
    let all_in = mode.ge(&contributor_lhs(n), alpha);
    let mut interior = Vec::new();
    if !v.is_zero() {
        for lambda in 1..n {
            if mode.ge(&contributor_lhs(lambda), alpha) && mode.le(&abstainer_lhs(lambda), alpha) {
                interior.push(lambda);
            }
        }
    }
    Ok(SymmetricBasicReport { all_out, all_in, interior })
}

/// Lower bound `(2-q)(k-1)/q` on the contributor count of any non-trivial
/// equilibrium of the basic game, valid when `v <= r`.
pub fn min_contributors_bound(game: &Game) -> Result<Rational, Error> {
    require(game.variant() == Variant::Basic, "min_contributors_bound", "the basic variant")?;
    require(game.value() <= game.reward(), "min_contributors_bound", "v <= r")?;
    let q = uniform_q(game, "min_contributors_bound")?;
    let k_minus_1 = Rational::from_int(game.k() as i64 - 1);
    Ok((Rational::from_int(2) - q) * k_minus_1 / q)
}

/// One candidate threshold profile of the asymmetric scan, with the
/// evidence values that were compared against alpha/r.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdCandidate {
    /// Lowest selection probability among the contributors (q_e).
    pub q_threshold: Rational,
    pub contributors: BTreeSet<usize>,
    /// `q_e * P(at least k-1 of the other contributors selected)`.
    pub contributor_lhs: Rational,
    /// `q_a+1 * P(at least k-1 of the contributors selected)`, absent for
    /// the all-in level.
    pub abstainer_lhs: Option<Rational>,
    pub equilibrium: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymmetricScanReport {
    pub all_out: bool,
    /// One candidate per distinct probability level, richest first.
    pub levels: Vec<ThresholdCandidate>,
}

impl AsymmetricScanReport {
    /// Contributor sets of the non-trivial equilibria found.
    pub fn equilibrium_contributor_sets(&self) -> BTreeSet<BTreeSet<usize>> {
        self.levels
            .iter()
            .filter(|c| c.equilibrium)
            .map(|c| c.contributors.clone())
            .collect()
    }
}

/// Scans the distinct selection-probability levels of an asymmetric basic
/// game with v = 0. Non-trivial equilibria are exactly the threshold
/// profiles whose boundary players satisfy both constraints, so checking
/// one contributor at the threshold level and one abstainer just below is
/// exhaustive (for positive alpha).
pub fn asymmetric_threshold_scan(game: &Game) -> Result<AsymmetricScanReport, Error> {
    require(game.variant() == Variant::Basic, "asymmetric_threshold_scan", "the basic variant")?;
    require(game.value().is_zero(), "asymmetric_threshold_scan", "v = 0")?;
    let n = game.n();
    let k = game.k() as i64;
    let mode = game.mode();
    let (alpha, r) = (game.alpha(), game.reward());

    // Players sorted by selection probability, richest first; group into
    // distinct levels (exact equality in exact mode, within epsilon in
    // float mode).
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| game.q_of(b).cmp(game.q_of(a)).then(a.cmp(&b)));
    let mut levels: Vec<Vec<usize>> = Vec::new();
    for &player in &order {
        match levels.last_mut() {
            Some(level) if mode.eq(game.q_of(level[0]), game.q_of(player)) => level.push(player),
            _ => levels.push(vec![player]),
        }
    }

    let tail_over = |players: &[usize], skip: Option<usize>, t: i64| -> Rational {
        let probs: Vec<Rational> = players
            .iter()
            .filter(|&&i| Some(i) != skip)
            .map(|&i| game.q_of(i).clone())
            .collect();
        poisson_binomial_tail(&probs, t).expect("validated")
    };

    let mut candidates = Vec::new();
    let mut contributors: Vec<usize> = Vec::new();
    for (idx, level) in levels.iter().enumerate() {
        contributors.extend(level.iter().copied());
        let threshold_player = level[0];
        let q_threshold = game.q_of(threshold_player).clone();
        let contributor_lhs =
            &q_threshold * tail_over(&contributors, Some(threshold_player), k - 1);
        let contributor_ok = mode.ge(&(r * &contributor_lhs), alpha);
        let abstainer_lhs = levels.get(idx + 1).map(|next| {
            game.q_of(next[0]) * tail_over(&contributors, None, k - 1)
        });
        let abstainer_ok = abstainer_lhs
            .as_ref()
            .map(|lhs| mode.le(&(r * lhs), alpha))
            .unwrap_or(true);
        candidates.push(ThresholdCandidate {
            q_threshold,
            contributors: contributors.iter().copied().collect(),
            contributor_lhs,
            abstainer_lhs,
            equilibrium: contributor_ok && abstainer_ok,
        });
    }

    let all_out = if game.k() > 1 {
        true
    } else {
        // A lone deviator succeeds with probability q_i, so all-out needs
        // r * q_i <= alpha for everyone; the richest player decides.
        let q_max = game.q_of(order[0]);
        mode.le(&(r * q_max), alpha)
    };
    Ok(AsymmetricScanReport { all_out, levels: candidates })
}

/// One contributor count inside the retraction window, with the ratio
/// evidence behind it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaWindowEntry {
    pub lambda: usize,
    /// `f(lambda+1, k, q)`: beta/r must be at least this for free riders
    /// to stay out of the task work.
    pub beta_ratio_low: Rational,
    /// `f(lambda, k, q)`: beta/r must be at most this for contributors to
    /// keep working.
    pub beta_ratio_high: Rational,
    /// Largest alpha/r admitting the mixed equilibrium at this lambda.
    pub alpha_ratio_upper: Rational,
    /// Whether the game's actual alpha satisfies the bound.
    pub equilibrium: bool,
}

/// Result of a lambda scan for the retraction schemes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaScanReport {
    /// Contributor counts whose beta/r window contains the game's ratio;
    /// at most two values, and two only when consecutive.
    pub window: Vec<LambdaWindowEntry>,
    pub all_in: bool,
    pub all_out: bool,
}

impl LambdaScanReport {
    /// Contributor counts of mixed equilibria (window entries whose alpha
    /// bound holds).
    pub fn mixed_lambdas(&self) -> Vec<usize> {
        self.window.iter().filter(|e| e.equilibrium).map(|e| e.lambda).collect()
    }
}

fn lambda_scan_common(
    game: &Game,
    op: &'static str,
    // alpha bound for a window entry, multiplied out: alpha <= bound_times_r
    // evidence ratio returned alongside.
    alpha_bound: impl Fn(usize, &Rational) -> (Rational, Rational),
    all_in_participation: impl Fn(&Rational) -> Rational,
) -> Result<LambdaScanReport, Error> {
    require(game.value().is_zero(), op, "v = 0")?;
    let q = uniform_q(game, op)?.clone();
    require(q < Rational::one(), op, "q strictly below 1")?;
    require(game.reward().is_positive(), op, "a positive reward")?;
    let (n, k) = (game.n(), game.k());
    let mode = game.mode();
    let (alpha, beta, r) = (game.alpha(), game.beta(), game.reward());

    let mut window = Vec::new();
    let floor = lambda_floor(k, &q);
    for lambda in floor..n {
        let f_high = f_or_zero(lambda as u64, k as u64, &q);
        let f_low = f_or_zero(lambda as u64 + 1, k as u64, &q);
        let in_window =
            mode.ge(&(r * &f_high), beta) && mode.le(&(r * &f_low), beta);
        if !in_window {
            continue;
        }
        let (bound_times_r, ratio) = alpha_bound(lambda, &q);
        window.push(LambdaWindowEntry {
            lambda,
            beta_ratio_low: f_low,
            beta_ratio_high: f_high,
            alpha_ratio_upper: ratio,
            equilibrium: mode.le(alpha, &bound_times_r),
        });
    }

    let f_all_in = f_or_zero(n as u64, k as u64, &q);
    let all_in = mode.ge(&(r * &f_all_in), beta)
        && mode.le(&(alpha + &q * beta), &all_in_participation(&q));
    let all_out = k > 1 || mode.le(&(&q * r), &(alpha + &q * beta));
    Ok(LambdaScanReport { window, all_in, all_out })
}

/// Scans contributor counts for the retraction game with v = 0.
///
/// A mixed profile with `lambda` contributors and `n - lambda` free riders
/// is an equilibrium iff `lambda` is in `[max(1, ceil((k-1)/q)), n-1]`,
/// `beta/r` lies in `[f(lambda+1,k,q), f(lambda,k,q)]`, and
/// `alpha/r <= min{q*tail(lambda-1,k-1,q) - q*beta/r, q*tail(lambda,k,q)}`.
pub fn retraction_lambda_scan(game: &Game) -> Result<LambdaScanReport, Error> {
    let op = "retraction_lambda_scan";
    require(game.variant() == Variant::Retraction, op, "the retraction variant")?;
    let (beta, r) = (game.beta(), game.reward());
    let k = game.k();
    lambda_scan_common(
        game,
        op,
        |lambda, q| {
            let t_given =
                binomial_tail(lambda as u64 - 1, k as i64 - 1, q).expect("validated");
            let t_free = binomial_tail(lambda as u64, k as i64, q).expect("validated");
            let participation = q * r * &t_given - q * beta;
            let free_rider = q * r * &t_free;
            let bound_times_r = participation.clone().min(free_rider);
            let ratio = (q * &t_given - q * (beta / r)).min(q * &t_free);
            (bound_times_r, ratio)
        },
        |q| {
            let t_given =
                binomial_tail(game.n() as u64 - 1, k as i64 - 1, q).expect("validated");
            q * r * t_given
        },
    )
}

/// Scans contributor counts for the universal-payments game with
/// retraction and v = 0. The beta/r window is the same as in the tracked
/// scheme; the alpha bound is the relaxed universal one.
pub fn universal_retraction_scan(game: &Game) -> Result<LambdaScanReport, Error> {
    let op = "universal_retraction_scan";
    require(game.variant() == Variant::UniversalRetraction, op, "the universal retraction variant")?;
    let (beta, r) = (game.beta(), game.reward());
    let k = game.k();
    lambda_scan_common(
        game,
        op,
        |lambda, q| {
            let f_high = f_or_zero(lambda as u64, k as u64, q);
            let t_excl = binomial_tail(lambda as u64 - 1, k as i64, q).expect("validated");
            let t_free = binomial_tail(lambda as u64, k as i64, q).expect("validated");
            let participation = r * (q * &f_high + &t_excl) - q * beta;
            let free_rider = r * &t_free;
            let bound_times_r = participation.clone().min(free_rider);
            let ratio = (q * (&f_high - beta / r) + t_excl).min(t_free);
            (bound_times_r, ratio)
        },
        |q| {
            let f_all = f_or_zero(game.n() as u64, k as u64, q);
            let t_excl =
                binomial_tail(game.n() as u64 - 1, k as i64, q).expect("validated");
            r * (q * f_all + t_excl)
        },
    )
}

/// The range of `beta/r` for which some contributor count satisfies the
/// free-rider window: `[f(n-1,k,q), f(max(1,ceil((k-1)/q)),k,q)]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaRatioRange {
    pub low: Rational,
    pub high: Rational,
    /// Set when no contributor count fits below n, i.e. ceil((k-1)/q) > n-1.
    pub empty: bool,
}

pub fn beta_ratio_feasible_range(game: &Game) -> Result<BetaRatioRange, Error> {
    let op = "beta_ratio_feasible_range";
    require(game.variant().allows_retraction(), op, "a retraction variant")?;
    let q = uniform_q(game, op)?;
    require(q < &Rational::one(), op, "q strictly below 1")?;
    let (n, k) = (game.n(), game.k());
    let floor = lambda_floor(k, q);
    Ok(BetaRatioRange {
        low: f_or_zero(n as u64 - 1, k as u64, q),
        high: f_or_zero(floor as u64, k as u64, q),
        empty: floor + 1 > n,
    })
}

/// Characterizes the universal-payments game without retraction (v = 0):
/// all-in iff `r * tail(n, k, q) >= alpha`; never an interior equilibrium.
pub fn universal_basic_characterize(game: &Game) -> Result<SymmetricBasicReport, Error> {
    let op = "universal_basic_characterize";
    require(game.variant() == Variant::UniversalBasic, op, "the universal basic variant")?;
    require(game.value().is_zero(), op, "v = 0")?;
    let q = uniform_q(game, op)?;
    let (n, k) = (game.n(), game.k());
    let mode = game.mode();
    let (alpha, r) = (game.alpha(), game.reward());
    let all_in_tail = binomial_tail(n as u64, k as i64, q).expect("validated");
    let all_in = mode.ge(&(r * &all_in_tail), alpha);
    let all_out = k > 1 || mode.le(&(q * r), alpha);
    Ok(SymmetricBasicReport { all_out, all_in, interior: Vec::new() })
}
