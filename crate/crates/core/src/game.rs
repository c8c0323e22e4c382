//! Game specification, strategy profiles and exact expected utilities for
//! the four participation-game variants.
//!
//! Progress in an epoch requires at least `k` eligible *contributors*;
//! players who declared participation but retract never help progress,
//! though the retraction reward schemes may still pay them.

use crate::error::Error;
use crate::numeric::{NumericMode, Rational};
use crate::prob::{binomial_tail, poisson_binomial_tail};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;

/// Reward scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Basic,
    Retraction,
    UniversalBasic,
    UniversalRetraction,
}

impl Variant {
    /// Whether "declare, then skip the tasks" is an admissible action.
    pub fn allows_retraction(self) -> bool {
        matches!(self, Variant::Retraction | Variant::UniversalRetraction)
    }

    /// Whether declared participants are paid regardless of eligibility.
    pub fn universal_payments(self) -> bool {
        matches!(self, Variant::UniversalBasic | Variant::UniversalRetraction)
    }

    pub fn action_count(self) -> usize {
        if self.allows_retraction() {
            3
        } else {
            2
        }
    }

    /// The universal-payment scheme with the same strategy space.
    pub fn universal_counterpart(self) -> Variant {
        match self {
            Variant::Basic | Variant::UniversalBasic => Variant::UniversalBasic,
            Variant::Retraction | Variant::UniversalRetraction => Variant::UniversalRetraction,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Variant::Basic => "basic",
            Variant::Retraction => "retraction",
            Variant::UniversalBasic => "universal_basic",
            Variant::UniversalRetraction => "universal_retraction",
        };
        f.write_str(s)
    }
}

/// Per-epoch selection probabilities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Selection {
    Uniform(Rational),
    PerPlayer(Vec<Rational>),
}

impl Selection {
    pub fn is_uniform(&self) -> bool {
        match self {
            Selection::Uniform(_) => true,
            Selection::PerPlayer(v) => v.windows(2).all(|w| w[0] == w[1]),
        }
    }
}

/// All parameters of one participation game.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameSpec {
    /// Population size.
    pub n: usize,
    /// Progress threshold: eligible contributors needed per epoch.
    pub k: usize,
    pub selection: Selection,
    /// Per-epoch participation cost.
    pub alpha: Rational,
    /// Task-completion cost; must be 0 unless the variant allows retraction.
    pub beta: Rational,
    /// Reward.
    pub r: Rational,
    /// Inherent value of progress, enjoyed even by abstainers.
    pub v: Rational,
    pub variant: Variant,
    #[serde(default)]
    pub numeric: NumericMode,
}

/// A [`GameSpec`] that passed [`validate_game`].
#[derive(Clone, Debug, PartialEq)]
pub struct Game {
    spec: GameSpec,
}

/// Checks every structural invariant of the spec and returns the validated
/// game, or a report listing all violations.
pub fn validate_game(spec: GameSpec) -> Result<Game, Error> {
    let mut violations = Vec::new();
    if spec.n == 0 {
        violations.push("population must be positive".to_string());
    }
    if spec.k == 0 {
        violations.push("threshold k must be positive".to_string());
    }
    if spec.k > spec.n {
        violations.push(format!("threshold exceeds population (k={} > n={})", spec.k, spec.n));
    }
    let check_q = |q: &Rational, label: &str, violations: &mut Vec<String>| {
        if !q.is_positive() || q > &Rational::one() {
            violations.push(format!("{label} = {q} outside (0,1]"));
        }
    };
    match &spec.selection {
        Selection::Uniform(q) => check_q(q, "selection probability", &mut violations),
        Selection::PerPlayer(qs) => {
            if qs.len() != spec.n {
                violations.push(format!(
                    "selection vector has {} entries for population {}",
                    qs.len(),
                    spec.n
                ));
            }
            for (i, q) in qs.iter().enumerate() {
                check_q(q, &format!("selection probability of player {i}"), &mut violations);
            }
            if spec.variant != Variant::Basic {
                violations.push(format!(
                    "per-player selection probabilities are only supported for the basic \
                     variant, not {}",
                    spec.variant
                ));
            }
        }
    }
    for (value, label) in [
        (&spec.alpha, "alpha"),
        (&spec.beta, "beta"),
        (&spec.r, "r"),
        (&spec.v, "v"),
    ] {
        if value.is_negative() {
            violations.push(format!("{label} = {value} must be nonnegative"));
        }
    }
    if !spec.variant.allows_retraction() && !spec.beta.is_zero() {
        violations.push(format!(
            "beta = {} must be 0 under the {} variant (no retraction, no task-skipping cost)",
            spec.beta, spec.variant
        ));
    }
    if let NumericMode::Float { epsilon } = spec.numeric {
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            violations.push(format!("epsilon = {epsilon} must be finite and nonnegative"));
        }
    }
    if violations.is_empty() {
        Ok(Game { spec })
    } else {
        Err(Error::InvalidGame { violations })
    }
}

impl Game {
    pub fn spec(&self) -> &GameSpec {
        &self.spec
    }

    pub fn n(&self) -> usize {
        self.spec.n
    }

    pub fn k(&self) -> usize {
        self.spec.k
    }

    pub fn variant(&self) -> Variant {
        self.spec.variant
    }

    pub fn mode(&self) -> NumericMode {
        self.spec.numeric
    }

    pub fn alpha(&self) -> &Rational {
        &self.spec.alpha
    }

    pub fn beta(&self) -> &Rational {
        &self.spec.beta
    }

    pub fn reward(&self) -> &Rational {
        &self.spec.r
    }

    pub fn value(&self) -> &Rational {
        &self.spec.v
    }

    /// Selection probability of one player.
    pub fn q_of(&self, player: usize) -> &Rational {
        match &self.spec.selection {
            Selection::Uniform(q) => q,
            Selection::PerPlayer(qs) => &qs[player],
        }
    }

    /// The shared selection probability, when the game is symmetric.
    pub fn uniform_q(&self) -> Option<&Rational> {
        match &self.spec.selection {
            Selection::Uniform(q) => Some(q),
            Selection::PerPlayer(qs) if self.spec.selection.is_uniform() => qs.first(),
            _ => None,
        }
    }

    /// Same game with a different reward; used by calibration.
    pub fn with_reward(&self, r: Rational) -> Game {
        let mut spec = self.spec.clone();
        spec.r = r;
        Game { spec }
    }

    pub fn validate_profile(&self, profile: &StrategyProfile) -> Result<(), Error> {
        if profile.len() != self.spec.n {
            return Err(Error::ProfileLength { len: profile.len(), n: self.spec.n });
        }
        if !self.spec.variant.allows_retraction()
            && profile.actions().contains(&Action::Retract)
        {
            return Err(Error::RetractNotAllowed { variant: self.spec.variant.to_string() });
        }
        Ok(())
    }

    fn check_player(&self, player: usize) -> Result<(), Error> {
        if player >= self.spec.n {
            return Err(Error::PlayerRange { player, n: self.spec.n });
        }
        Ok(())
    }

    /// Tail probability that at least `t` of the contributors other than
    /// `player` are selected.
    fn contributor_tail_excluding(
        &self,
        profile: &StrategyProfile,
        player: usize,
        t: i64,
    ) -> Rational {
        match &self.spec.selection {
            Selection::Uniform(q) => {
                let m = profile
                    .actions()
                    .iter()
                    .enumerate()
                    .filter(|(i, a)| *i != player && **a == Action::Contribute)
                    .count();
                binomial_tail(m as u64, t, q).expect("validated probability")
            }
            Selection::PerPlayer(qs) => {
                let probs: Vec<Rational> = profile
                    .actions()
                    .iter()
                    .enumerate()
                    .filter(|(i, a)| *i != player && **a == Action::Contribute)
                    .map(|(i, _)| qs[i].clone())
                    .collect();
                poisson_binomial_tail(&probs, t).expect("validated probabilities")
            }
        }
    }

    /// `p(s_-i)`: probability that progress is made by the other players
    /// alone, i.e. at least `k` of the contributors excluding `player` are
    /// selected.
    pub fn progress_prob_excluding(
        &self,
        profile: &StrategyProfile,
        player: usize,
    ) -> Result<Rational, Error> {
        self.validate_profile(profile)?;
        self.check_player(player)?;
        Ok(self.contributor_tail_excluding(profile, player, self.spec.k as i64))
    }

    /// `p(i, s_-i)`: probability that progress is made given that `player`
    /// participates, is eligible and completes her task, i.e. at least
    /// `k - 1` of the remaining contributors are selected.
    pub fn progress_prob_given_i(
        &self,
        profile: &StrategyProfile,
        player: usize,
    ) -> Result<Rational, Error> {
        self.validate_profile(profile)?;
        self.check_player(player)?;
        Ok(self.contributor_tail_excluding(profile, player, self.spec.k as i64 - 1))
    }

    /// Expected utility of `player` under the profile.
    pub fn expected_utility(
        &self,
        profile: &StrategyProfile,
        player: usize,
    ) -> Result<Rational, Error> {
        self.expected_utility_of(profile, player, profile.action(player))
    }

    /// Expected utility of `player` when she plays `action` against the
    /// rest of the profile.
    pub fn expected_utility_of(
        &self,
        profile: &StrategyProfile,
        player: usize,
        action: Action,
    ) -> Result<Rational, Error> {
        self.validate_profile(profile)?;
        self.check_player(player)?;
        if action == Action::Retract && !self.spec.variant.allows_retraction() {
            return Err(Error::RetractNotAllowed { variant: self.spec.variant.to_string() });
        }
        let p_excl = self.contributor_tail_excluding(profile, player, self.spec.k as i64);
        let p_given = self.contributor_tail_excluding(profile, player, self.spec.k as i64 - 1);
        Ok(self.utility_from_tails(action, player, &p_excl, &p_given))
    }

    /// Expected-utility tables for all four variants, written against the
    /// two progress probabilities. `p_excl` is `p(s_-i)`, `p_given` is
    /// `p(i, s_-i)`.
    pub(crate) fn utility_from_tails(
        &self,
        action: Action,
        player: usize,
        p_excl: &Rational,
        p_given: &Rational,
    ) -> Rational {
        let GameSpec { alpha, beta, r, v, .. } = &self.spec;
        let q = self.q_of(player);
        let one_minus_q = Rational::one() - q;
        let reward_value = r + v;
        match (self.spec.variant, action) {
            (_, Action::Abstain) => p_excl * v,
            (Variant::Basic, Action::Contribute) => {
                &one_minus_q * p_excl * v + q * p_given * &reward_value - alpha
            }
            (Variant::Retraction, Action::Contribute) => {
                &one_minus_q * p_excl * v + q * (p_given * &reward_value - beta) - alpha
            }
            (Variant::Retraction, Action::Retract) => {
                &one_minus_q * p_excl * v + q * p_excl * &reward_value - alpha
            }
            (Variant::UniversalBasic, Action::Contribute) => {
                (q * p_given + &one_minus_q * p_excl) * &reward_value - alpha
            }
            (Variant::UniversalRetraction, Action::Contribute) => {
                &one_minus_q * p_excl * &reward_value + q * (p_given * &reward_value - beta)
                    - alpha
            }
            (Variant::UniversalRetraction, Action::Retract) => p_excl * &reward_value - alpha,
            (Variant::Basic | Variant::UniversalBasic, Action::Retract) => {
                unreachable!("retract rejected for non-retraction variants")
            }
        }
    }

    /// Actions admissible under this game's variant, in enumeration order.
    pub fn admissible_actions(&self) -> &'static [Action] {
        if self.spec.variant.allows_retraction() {
            &[Action::Abstain, Action::Contribute, Action::Retract]
        } else {
            &[Action::Abstain, Action::Contribute]
        }
    }
}

/// One player's choice. `Contribute` means "declare participation and, when
/// eligible, complete all assigned tasks"; `Retract` means "declare, then
/// skip every avoidable task".
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Abstain,
    Contribute,
    Retract,
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Action::Abstain => "abstain",
            Action::Contribute => "contribute",
            Action::Retract => "retract",
        };
        f.write_str(s)
    }
}

/// An action for every player.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StrategyProfile(Vec<Action>);

impl StrategyProfile {
    pub fn new(actions: Vec<Action>) -> Self {
        StrategyProfile(actions)
    }

    pub fn all_in(n: usize) -> Self {
        StrategyProfile(vec![Action::Contribute; n])
    }

    pub fn all_out(n: usize) -> Self {
        StrategyProfile(vec![Action::Abstain; n])
    }

    /// First `lambda` players contribute, the rest play `rest`.
    pub fn split(n: usize, lambda: usize, rest: Action) -> Self {
        let mut actions = vec![rest; n];
        for a in actions.iter_mut().take(lambda) {
            *a = Action::Contribute;
        }
        StrategyProfile(actions)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn actions(&self) -> &[Action] {
        &self.0
    }

    pub fn action(&self, player: usize) -> Action {
        self.0[player]
    }

    pub fn with_action(&self, player: usize, action: Action) -> Self {
        let mut actions = self.0.clone();
        actions[player] = action;
        StrategyProfile(actions)
    }

    pub fn set_action(&mut self, player: usize, action: Action) {
        self.0[player] = action;
    }

    pub fn composition(&self) -> Composition {
        let mut composition = Composition::default();
        for (i, action) in self.0.iter().enumerate() {
            match action {
                Action::Contribute => composition.contributors.insert(i),
                Action::Retract => composition.free_riders.insert(i),
                Action::Abstain => composition.abstainers.insert(i),
            };
        }
        composition
    }
}

impl fmt::Debug for StrategyProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let letters: String = self
            .0
            .iter()
            .map(|a| match a {
                Action::Abstain => 'A',
                Action::Contribute => 'C',
                Action::Retract => 'F',
            })
            .collect();
        write!(f, "{letters}")
    }
}

/// Partition of the players induced by a profile: contributors `C`,
/// free riders `F`, abstainers `A`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Composition {
    pub contributors: BTreeSet<usize>,
    pub free_riders: BTreeSet<usize>,
    pub abstainers: BTreeSet<usize>,
}

impl Composition {
    /// Number of contributors, written lambda throughout.
    pub fn lambda(&self) -> usize {
        self.contributors.len()
    }

    pub fn counts(&self) -> CompositionCounts {
        CompositionCounts {
            contributors: self.contributors.len(),
            free_riders: self.free_riders.len(),
            abstainers: self.abstainers.len(),
        }
    }
}

/// Composition class of a profile in a symmetric game.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CompositionCounts {
    pub contributors: usize,
    pub free_riders: usize,
    pub abstainers: usize,
}

impl CompositionCounts {
    pub fn new(contributors: usize, free_riders: usize, abstainers: usize) -> Self {
        CompositionCounts { contributors, free_riders, abstainers }
    }

    pub fn all_in(n: usize) -> Self {
        CompositionCounts::new(n, 0, 0)
    }

    pub fn all_out(n: usize) -> Self {
        CompositionCounts::new(0, 0, n)
    }
}

impl fmt::Display for CompositionCounts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(C={}, F={}, A={})", self.contributors, self.free_riders, self.abstainers)
    }
}
