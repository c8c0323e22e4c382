//! Ground-truth equilibrium machinery: unilateral-deviation checks,
//! exhaustive enumeration, strong-equilibrium and lattice-closure checks.
//!
//! Enumeration is the oracle every structural finder is tested against, so
//! it works purely from expected utilities and never consults the
//! characterization theorems.

use crate::error::Error;
use crate::game::{Action, CompositionCounts, Composition, Game, StrategyProfile};
use crate::numeric::Rational;
use crate::prob::{binomial_tail, poisson_binomial_tail};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap, HashSet};

/// Default population guard for exhaustive scans over two-action variants.
pub const DEFAULT_GUARD_TWO_ACTION: usize = 12;
/// Default population guard for exhaustive scans over three-action variants.
pub const DEFAULT_GUARD_THREE_ACTION: usize = 9;

/// Default enumeration guard for a game's variant.
pub fn default_guard(game: &Game) -> usize {
    if game.variant().allows_retraction() {
        DEFAULT_GUARD_THREE_ACTION
    } else {
        DEFAULT_GUARD_TWO_ACTION
    }
}

/// How an equilibrium record was established.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerificationMethod {
    BruteForce,
    Structure,
    Both,
}

/// Utility a player keeps by not switching to `to`:
/// `margin = u_i(s) - u_i(to, s_-i)`. Nonnegative margins certify an
/// equilibrium; zero means indifference.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviationMargin {
    pub player: usize,
    pub from: Action,
    pub to: Action,
    pub margin: Rational,
}

/// An equilibrium with its self-certifying evidence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumRecord {
    pub profile: StrategyProfile,
    pub composition: Composition,
    pub margins: Vec<DeviationMargin>,
    pub verified_by: VerificationMethod,
}

/// Memoized progress-probability tails, keyed by the contributor set
/// (count for symmetric games, bitmask otherwise). Each entry holds
/// `(tail at k, tail at k-1)`.
struct TailCache<'g> {
    game: &'g Game,
    symmetric: bool,
    by_count: Vec<Option<(Rational, Rational)>>,
    by_mask: HashMap<u64, (Rational, Rational)>,
}

impl<'g> TailCache<'g> {
    fn new(game: &'g Game) -> Self {
        TailCache {
            game,
            symmetric: game.uniform_q().is_some(),
            by_count: vec![None; game.n() + 1],
            by_mask: HashMap::new(),
        }
    }

    /// Tails over the contributors of `profile`, excluding `player`.
    /// Symmetric games cache by contributor count, asymmetric ones by
    /// bitmask while the population fits in one; beyond 64 players the
    /// tails are computed directly.
    fn tails_excluding(&mut self, profile: &StrategyProfile, player: usize) -> (Rational, Rational) {
        let k = self.game.k() as i64;
        let others_contributing = |i: &usize| {
            *i != player && profile.action(*i) == Action::Contribute
        };
        if self.symmetric {
            let count = (0..self.game.n()).filter(others_contributing).count();
            if let Some(t) = &self.by_count[count] {
                return t.clone();
            }
            let q = self.game.uniform_q().expect("symmetric");
            let tails = (
                binomial_tail(count as u64, k, q).expect("validated"),
                binomial_tail(count as u64, k - 1, q).expect("validated"),
            );
            self.by_count[count] = Some(tails.clone());
            return tails;
        }
        let mask = if self.game.n() <= 64 {
            let mut mask = 0u64;
            for i in (0..self.game.n()).filter(others_contributing) {
                mask |= 1 << i;
            }
            if let Some(t) = self.by_mask.get(&mask) {
                return t.clone();
            }
            Some(mask)
        } else {
            None
        };
        let probs: Vec<Rational> = (0..self.game.n())
            .filter(others_contributing)
            .map(|i| self.game.q_of(i).clone())
            .collect();
        let tails = (
            poisson_binomial_tail(&probs, k).expect("validated"),
            poisson_binomial_tail(&probs, k - 1).expect("validated"),
        );
        if let Some(mask) = mask {
            self.by_mask.insert(mask, tails.clone());
        }
        tails
    }
}

/// Margins of every unilateral deviation from the profile.
pub fn deviation_margins(
    game: &Game,
    profile: &StrategyProfile,
) -> Result<Vec<DeviationMargin>, Error> {
    game.validate_profile(profile)?;
    let mut cache = TailCache::new(game);
    Ok(margins_cached(game, profile, &mut cache))
}

fn margins_cached(
    game: &Game,
    profile: &StrategyProfile,
    cache: &mut TailCache<'_>,
) -> Vec<DeviationMargin> {
    let mut margins = Vec::new();
    for player in 0..game.n() {
        let (p_excl, p_given) = cache.tails_excluding(profile, player);
        let current = profile.action(player);
        let u_current = game.utility_from_tails(current, player, &p_excl, &p_given);
        for &alt in game.admissible_actions() {
            if alt == current {
                continue;
            }
            let u_alt = game.utility_from_tails(alt, player, &p_excl, &p_given);
            margins.push(DeviationMargin {
                player,
                from: current,
                to: alt,
                margin: &u_current - &u_alt,
            });
        }
    }
    margins
}

/// Whether no player can strictly improve through a unilateral deviation.
/// Indifference does not break an equilibrium, and in `Float` mode a gain
/// within epsilon counts as indifference.
pub fn is_equilibrium(game: &Game, profile: &StrategyProfile) -> Result<bool, Error> {
    game.validate_profile(profile)?;
    let mut cache = TailCache::new(game);
    Ok(is_equilibrium_cached(game, profile, &mut cache))
}

fn is_equilibrium_cached(
    game: &Game,
    profile: &StrategyProfile,
    cache: &mut TailCache<'_>,
) -> bool {
    let mode = game.mode();
    let zero = Rational::zero();
    for player in 0..game.n() {
        let (p_excl, p_given) = cache.tails_excluding(profile, player);
        let current = profile.action(player);
        let u_current = game.utility_from_tails(current, player, &p_excl, &p_given);
        for &alt in game.admissible_actions() {
            if alt == current {
                continue;
            }
            let u_alt = game.utility_from_tails(alt, player, &p_excl, &p_given);
            if mode.lt(&(&u_current - &u_alt), &zero) {
                return false;
            }
        }
    }
    true
}

/// Exhaustively enumerates all pure Nash equilibria, in lexicographic
/// order over action sequences (abstain < contribute < retract).
///
/// `guard` caps the population; `None` uses the variant default. Exceeding
/// the guard is an error rather than a long wait.
pub fn enumerate_equilibria(
    game: &Game,
    guard: Option<usize>,
) -> Result<Vec<EquilibriumRecord>, Error> {
    let guard = guard.unwrap_or_else(|| default_guard(game));
    if game.n() > guard {
        return Err(Error::GuardExceeded { n: game.n(), guard });
    }
    let actions = game.admissible_actions();
    let n = game.n();
    let mut cache = TailCache::new(game);
    let mut records = Vec::new();
    let mut indices = vec![0usize; n];
    loop {
        let profile =
            StrategyProfile::new(indices.iter().map(|&i| actions[i]).collect::<Vec<_>>());
        if is_equilibrium_cached(game, &profile, &mut cache) {
            let margins = margins_cached(game, &profile, &mut cache);
            records.push(EquilibriumRecord {
                composition: profile.composition(),
                profile,
                margins,
                verified_by: VerificationMethod::BruteForce,
            });
        }
        // Odometer increment from the last player, so the order is
        // lexicographic on action sequences.
        let mut pos = n;
        loop {
            if pos == 0 {
                return Ok(records);
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

/// Composition classes of a set of records (for symmetric games).
pub fn composition_classes(records: &[EquilibriumRecord]) -> BTreeSet<CompositionCounts> {
    records.iter().map(|r| r.composition.counts()).collect()
}

/// Contributor sets of a set of records (for asymmetric games).
pub fn contributor_sets(records: &[EquilibriumRecord]) -> BTreeSet<BTreeSet<usize>> {
    records.iter().map(|r| r.composition.contributors.clone()).collect()
}

/// Whether no coalition of size `<= max_coalition` has a joint deviation
/// that makes every member strictly better off.
///
/// Only deviations where every member changes action are scanned; a
/// profitable deviation in which some member stands still is caught at the
/// smaller coalition of players who actually move.
pub fn is_strong_equilibrium(
    game: &Game,
    profile: &StrategyProfile,
    max_coalition: usize,
) -> Result<bool, Error> {
    game.validate_profile(profile)?;
    if game.n() > DEFAULT_GUARD_TWO_ACTION {
        return Err(Error::GuardExceeded { n: game.n(), guard: DEFAULT_GUARD_TWO_ACTION });
    }
    let n = game.n();
    let mode = game.mode();
    let actions = game.admissible_actions();
    let mut cache = TailCache::new(game);

    let base_utilities: Vec<Rational> = (0..n)
        .map(|player| {
            let (p_excl, p_given) = cache.tails_excluding(profile, player);
            game.utility_from_tails(profile.action(player), player, &p_excl, &p_given)
        })
        .collect();

    for coalition in 1u64..(1 << n) {
        let size = coalition.count_ones() as usize;
        if size > max_coalition {
            continue;
        }
        let members: Vec<usize> = (0..n).filter(|i| coalition & (1 << i) != 0).collect();
        let alternatives: Vec<Vec<Action>> = members
            .iter()
            .map(|&i| {
                actions.iter().copied().filter(|a| *a != profile.action(i)).collect::<Vec<_>>()
            })
            .collect();
        let mut choice = vec![0usize; size];
        'assignments: loop {
            let mut deviated = profile.clone();
            for (slot, &player) in members.iter().enumerate() {
                deviated.set_action(player, alternatives[slot][choice[slot]]);
            }
            let mut everyone_gains = true;
            for &player in &members {
                let (p_excl, p_given) = cache.tails_excluding(&deviated, player);
                let u_new =
                    game.utility_from_tails(deviated.action(player), player, &p_excl, &p_given);
                if !mode.gt(&u_new, &base_utilities[player]) {
                    everyone_gains = false;
                    break;
                }
            }
            if everyone_gains {
                return Ok(false);
            }
            let mut pos = 0;
            loop {
                if pos == size {
                    break 'assignments;
                }
                choice[pos] += 1;
                if choice[pos] < alternatives[pos].len() {
                    break;
                }
                choice[pos] = 0;
                pos += 1;
            }
        }
    }
    Ok(true)
}

/// A pair of equilibria whose join or meet fails to be an equilibrium.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeCounterexample {
    pub first: StrategyProfile,
    pub second: StrategyProfile,
    pub operation: String,
    pub combined: StrategyProfile,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeReport {
    pub closed: bool,
    pub counterexample: Option<LatticeCounterexample>,
}

/// Checks that the enumerated equilibrium set is closed under componentwise
/// join and meet (ordering contribute > abstain). Only meaningful for the
/// basic variant with v = 0, where the game has strategic complements.
pub fn check_lattice_closure(game: &Game, guard: Option<usize>) -> Result<LatticeReport, Error> {
    if game.variant() != crate::game::Variant::Basic {
        return Err(Error::Unsupported {
            op: "check_lattice_closure",
            requirement: "the basic variant",
        });
    }
    if !game.value().is_zero() {
        return Err(Error::Unsupported { op: "check_lattice_closure", requirement: "v = 0" });
    }
    let records = enumerate_equilibria(game, guard)?;
    let set: HashSet<&StrategyProfile> = records.iter().map(|r| &r.profile).collect();
    let combine = |a: &StrategyProfile, b: &StrategyProfile, join: bool| {
        StrategyProfile::new(
            a.actions()
                .iter()
                .zip(b.actions())
                .map(|(x, y)| if join { (*x).max(*y) } else { (*x).min(*y) })
                .collect::<Vec<_>>(),
        )
    };
    for (idx, a) in records.iter().enumerate() {
        for b in &records[idx + 1..] {
            for (join, name) in [(true, "join"), (false, "meet")] {
                let combined = combine(&a.profile, &b.profile, join);
                if !set.contains(&combined) {
                    return Ok(LatticeReport {
                        closed: false,
                        counterexample: Some(LatticeCounterexample {
                            first: a.profile.clone(),
                            second: b.profile.clone(),
                            operation: name.to_string(),
                            combined,
                        }),
                    });
                }
            }
        }
    }
    Ok(LatticeReport { closed: true, counterexample: None })
}
