//! Shared test support: an event-table utility oracle that is independent
//! of the library's analytic formulas, and seeded random game generators.
#![allow(dead_code)]

use participation::game::{
    validate_game, Action, Game, GameSpec, Selection, StrategyProfile, Variant,
};
use participation::numeric::{NumericMode, Rational};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

pub fn rat(s: &str) -> Rational {
    s.parse().unwrap()
}

/// Payoff of one player in one fully resolved epoch, read directly off the
/// reward tables of each scheme.
fn table_payoff(
    game: &Game,
    action: Action,
    eligible: bool,
    progress: bool,
) -> Rational {
    let spec = game.spec();
    let (alpha, beta, r, v) = (&spec.alpha, &spec.beta, &spec.r, &spec.v);
    let zero = Rational::zero();
    match (spec.variant, action, eligible, progress) {
        (_, Action::Abstain, _, true) => v.clone(),
        (_, Action::Abstain, _, false) => zero,

        (Variant::Basic, Action::Contribute, true, true) => r + v - alpha,
        (Variant::Basic, Action::Contribute, true, false) => -alpha.clone(),
        (Variant::Basic, Action::Contribute, false, true) => v - alpha,
        (Variant::Basic, Action::Contribute, false, false) => -alpha.clone(),

        (Variant::Retraction, Action::Contribute, true, true) => r + v - alpha - beta,
        (Variant::Retraction, Action::Contribute, true, false) => -(alpha + beta),
        (Variant::Retraction, Action::Contribute, false, true) => v - alpha,
        (Variant::Retraction, Action::Contribute, false, false) => -alpha.clone(),
        (Variant::Retraction, Action::Retract, true, true) => r + v - alpha,
        (Variant::Retraction, Action::Retract, true, false) => -alpha.clone(),
        (Variant::Retraction, Action::Retract, false, true) => v - alpha,
        (Variant::Retraction, Action::Retract, false, false) => -alpha.clone(),

        (Variant::UniversalBasic, Action::Contribute, _, true) => r + v - alpha,
        (Variant::UniversalBasic, Action::Contribute, _, false) => -alpha.clone(),

        (Variant::UniversalRetraction, Action::Contribute, true, true) => r + v - alpha - beta,
        (Variant::UniversalRetraction, Action::Contribute, true, false) => -(alpha + beta),
        (Variant::UniversalRetraction, Action::Contribute, false, true) => r + v - alpha,
        (Variant::UniversalRetraction, Action::Contribute, false, false) => -alpha.clone(),
        (Variant::UniversalRetraction, Action::Retract, _, true) => r + v - alpha,
        (Variant::UniversalRetraction, Action::Retract, _, false) => -alpha.clone(),

        (Variant::Basic | Variant::UniversalBasic, Action::Retract, _, _) => {
            panic!("retract not admissible under {}", spec.variant)
        }
    }
}

/// Brute-force expected utility: enumerate every eligibility outcome of the
/// declared participants, weight it by the product of selection
/// probabilities, decide progress by counting eligible contributors, and
/// apply the reward tables row by row.
pub fn oracle_expected_utility(
    game: &Game,
    profile: &StrategyProfile,
    player: usize,
) -> Rational {
    let participants: Vec<usize> =
        (0..game.n()).filter(|&i| profile.action(i) != Action::Abstain).collect();
    let m = participants.len();
    assert!(m <= 20, "oracle enumerates 2^m outcomes");
    let mut total = Rational::zero();
    for mask in 0u64..(1 << m) {
        let mut weight = Rational::one();
        let mut eligible_contributors = 0usize;
        let mut player_eligible = false;
        for (slot, &i) in participants.iter().enumerate() {
            let eligible = mask & (1 << slot) != 0;
            let q = game.q_of(i);
            weight = if eligible { weight * q } else { weight * (Rational::one() - q) };
            if eligible {
                if profile.action(i) == Action::Contribute {
                    eligible_contributors += 1;
                }
                if i == player {
                    player_eligible = true;
                }
            }
        }
        let progress = eligible_contributors >= game.k();
        total = total
            + weight * table_payoff(game, profile.action(player), player_eligible, progress);
    }
    total
}

/// Uniform rational in the open interval (0, 1): numerator in 1..den.
pub fn random_prob(rng: &mut ChaCha12Rng) -> Rational {
    let den = rng.random_range(2i64..=12);
    let num = rng.random_range(1i64..den);
    Rational::ratio(num, den)
}

/// Positive rational with a small denominator.
pub fn random_positive(rng: &mut ChaCha12Rng, max_num: i64) -> Rational {
    let den = rng.random_range(1i64..=8);
    let num = rng.random_range(1i64..=max_num);
    Rational::ratio(num, den)
}

pub struct GameDraw {
    pub variant: Variant,
    pub n_max: usize,
    pub asymmetric: bool,
    pub with_value: bool,
}

/// Draws a validated random game.
///
/// The draws stay inside the regime the characterization theorems cover:
/// selection probabilities strictly inside (0,1), positive participation
/// cost and reward. For k = 1 any game with a player exactly on the
/// boundary tie `q_i (r - beta) = alpha` is rejected: with a threshold of
/// one, the constraints no longer depend on who else contributes, a
/// boundary player is indifferent between joining and abstaining, and
/// profiles putting her on either side are all equilibria - a degenerate
/// family outside every characterization.
pub fn random_game(rng: &mut ChaCha12Rng, draw: &GameDraw) -> Game {
    loop {
        let n = rng.random_range(2..=draw.n_max);
        let k = rng.random_range(1..=n);
        let selection = if draw.asymmetric {
            Selection::PerPlayer((0..n).map(|_| random_prob(rng)).collect())
        } else {
            Selection::Uniform(random_prob(rng))
        };
        let alpha = random_positive(rng, 6);
        let r = random_positive(rng, 12);
        let beta = if draw.variant.allows_retraction() {
            random_positive(rng, 4)
        } else {
            Rational::zero()
        };
        let v = if draw.with_value { random_positive(rng, 4).min(r.clone()) } else { Rational::zero() };
        if k == 1 {
            let on_boundary = |q: &Rational| q * &r == &alpha + q * &beta;
            let tie = match &selection {
                Selection::Uniform(q) => on_boundary(q),
                Selection::PerPlayer(qs) => qs.iter().any(on_boundary),
            };
            if tie {
                continue;
            }
        }
        let spec = GameSpec {
            n,
            k,
            selection,
            alpha,
            beta,
            r,
            v,
            variant: draw.variant,
            numeric: NumericMode::Exact,
        };
        if let Ok(game) = validate_game(spec) {
            return game;
        }
    }
}

pub fn seeded(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

/// All profiles of a game, lexicographically.
pub fn all_profiles(game: &Game) -> Vec<StrategyProfile> {
    let actions = game.admissible_actions();
    let n = game.n();
    let mut out = Vec::new();
    let mut indices = vec![0usize; n];
    loop {
        out.push(StrategyProfile::new(indices.iter().map(|&i| actions[i]).collect::<Vec<_>>()));
        let mut pos = n;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            indices[pos] += 1;
            if indices[pos] < actions.len() {
                break;
            }
            indices[pos] = 0;
        }
    }
}
