//! Pure Nash equilibria of the ordered-protocol games on series-parallel
//! networks, and their price of anarchy.
//!
//! Under an ordered protocol a player's charge depends only on the players
//! ahead of her in the priority order. Two consequences drive this module:
//! letting players best-respond once in priority order always yields an
//! equilibrium, and the full equilibrium set is exactly the set of profiles
//! in which every player best-responds to her predecessors.

use rayon::prelude::*;
use thiserror::Error;

use crate::costfn::CostValue;
use crate::eps::EpsCost;
use crate::mechanism::{PenaltyWeights, Priority};
use crate::rational;
use crate::spg::{ComponentId, LoadProfile, Network, Path};

/// Default ceiling on `|paths|^n` for exhaustive enumeration.
pub const DEFAULT_PROFILE_CAP: u128 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EquilibriumError {
    #[error("at least one player is required")]
    NoPlayers,
    #[error("{profiles} profiles exceed the enumeration cap {cap}; use the sequential engine instead")]
    TooLarge { profiles: u128, cap: u128 },
    #[error("{n} players exceed the instance horizon {horizon}")]
    BeyondHorizon { n: usize, horizon: usize },
    #[error("sequential best responses did not produce an equilibrium")]
    NotAnEquilibrium,
}

/// Path index (into [`SpgGame::paths`]) chosen by each player.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PathProfile(pub Vec<usize>);

/// A strictly improving unilateral deviation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Deviation {
    pub path: usize,
    pub charge: EpsCost,
    pub gain: EpsCost,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquilibriumReport {
    pub profile: PathProfile,
    pub loads: LoadProfile,
    pub charges: Vec<EpsCost>,
    pub social_cost_modified: EpsCost,
    pub social_cost_original: CostValue,
    pub is_pne: bool,
    /// Best strictly improving deviation per player, if any.
    pub best_deviation: Vec<Option<Deviation>>,
}

/// The game induced by the mechanism on a network for a fixed `n̂`.
#[derive(Debug, Clone)]
pub struct SpgGame {
    net: Network,
    weights: PenaltyWeights,
    paths: Vec<Path>,
}

impl SpgGame {
    pub fn new(net: &Network, weights: PenaltyWeights) -> Self {
        SpgGame {
            paths: net.tree().enumerate_paths(),
            net: net.clone(),
            weights,
        }
    }

    pub fn network(&self) -> &Network {
        &self.net
    }

    pub fn weights(&self) -> &PenaltyWeights {
        &self.weights
    }

    pub fn paths(&self) -> &[Path] {
        &self.paths
    }

    fn num_edges(&self) -> usize {
        self.net.tree().num_edges()
    }

    fn check_players(&self, n: usize) -> Result<(), EquilibriumError> {
        if n == 0 {
            return Err(EquilibriumError::NoPlayers);
        }
        if n > self.net.horizon() {
            return Err(EquilibriumError::BeyondHorizon {
                n,
                horizon: self.net.horizon(),
            });
        }
        Ok(())
    }

    fn profile_paths(&self, profile: &PathProfile) -> Vec<Path> {
        profile.0.iter().map(|&p| self.paths[p].clone()).collect()
    }

    /// Charges of all alternatives for a player whose predecessors induce `prefix`.
    fn alternatives(&self, prefix: &[usize]) -> Vec<EpsCost> {
        self.paths
            .iter()
            .map(|p| self.weights.path_charge(p, prefix))
            .collect()
    }

    /// Evaluates every player's charge and best unilateral deviation.
    pub fn check_pne(&self, profile: &PathProfile, priority: &Priority) -> EquilibriumReport {
        let paths = self.profile_paths(profile);
        let loads = LoadProfile::from_paths(self.num_edges(), &paths);
        let mut charges = vec![EpsCost::zero(); paths.len()];
        let mut best_deviation = vec![None; paths.len()];
        let mut prefix = vec![0usize; self.num_edges()];
        for &player in priority.order() {
            let options = self.alternatives(&prefix);
            let current = options[profile.0[player]].clone();
            let (best_idx, best) = options
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.cmp(b.1).then(a.0.cmp(&b.0)))
                .expect("a series-parallel graph has at least one path");
            if *best < current {
                best_deviation[player] = Some(Deviation {
                    path: best_idx,
                    charge: best.clone(),
                    gain: current.marginal_over(best),
                });
            }
            charges[player] = current;
            for &e in paths[player].edges() {
                prefix[e] += 1;
            }
        }
        EquilibriumReport {
            is_pne: best_deviation.iter().all(Option::is_none),
            social_cost_modified: self.weights.modified_social_cost(&loads),
            social_cost_original: self.net.cost(&loads),
            profile: profile.clone(),
            loads,
            charges,
            best_deviation,
        }
    }

    /// Players pick, in priority order, the cheapest path given their
    /// predecessors (ties to the leftmost path).
    pub fn sequential_pne(&self, n: usize, priority: &Priority) -> Result<EquilibriumReport, EquilibriumError> {
        self.check_players(n)?;
        let mut choice = vec![0usize; n];
        let mut prefix = vec![0usize; self.num_edges()];
        for &player in priority.order() {
            let options = self.alternatives(&prefix);
            let best = argmin_first(&options);
            choice[player] = best;
            for &e in self.paths[best].edges() {
                prefix[e] += 1;
            }
        }
        let report = self.check_pne(&PathProfile(choice), priority);
        if !report.is_pne {
            return Err(EquilibriumError::NotAnEquilibrium);
        }
        Ok(report)
    }

    fn check_cap(&self, n: usize, cap: u128) -> Result<(), EquilibriumError> {
        let profiles = (self.paths.len() as u128).saturating_pow(n as u32);
        if profiles > cap {
            return Err(EquilibriumError::TooLarge { profiles, cap });
        }
        Ok(())
    }

    /// All pure Nash equilibria for `n` players, sorted by modified social
    /// cost, worst first.
    ///
    /// Searches the profile tree in priority order and only descends into
    /// best responses, which is exact for ordered protocols.
    pub fn enumerate_pne(
        &self,
        n: usize,
        priority: &Priority,
        cap: u128,
    ) -> Result<Vec<EquilibriumReport>, EquilibriumError> {
        self.check_players(n)?;
        self.check_cap(n, cap)?;
        let mut found = Vec::new();
        let mut choice = vec![0usize; n];
        let mut prefix = vec![0usize; self.num_edges()];
        self.descend(0, priority, &mut choice, &mut prefix, &mut found);
        let mut reports: Vec<EquilibriumReport> = found
            .into_iter()
            .map(|profile| self.check_pne(&profile, priority))
            .collect();
        debug_assert!(reports.iter().all(|r| r.is_pne));
        sort_worst_first(&mut reports);
        Ok(reports)
    }

    fn descend(
        &self,
        rank: usize,
        priority: &Priority,
        choice: &mut Vec<usize>,
        prefix: &mut Vec<usize>,
        found: &mut Vec<PathProfile>,
    ) {
        if rank == priority.len() {
            found.push(PathProfile(choice.clone()));
            return;
        }
        let player = priority.order()[rank];
        let options = self.alternatives(prefix);
        let best = options.iter().min().expect("non-empty").clone();
        for (idx, charge) in options.iter().enumerate() {
            if *charge != best {
                continue;
            }
            choice[player] = idx;
            for &e in self.paths[idx].edges() {
                prefix[e] += 1;
            }
            self.descend(rank + 1, priority, choice, prefix, found);
            for &e in self.paths[idx].edges() {
                prefix[e] -= 1;
            }
        }
    }

    /// Same result as [`enumerate_pne`](Self::enumerate_pne), by running
    /// [`check_pne`](Self::check_pne) on every one of the `|paths|^n`
    /// profiles. Index ranges are checked in parallel.
    pub fn enumerate_pne_bruteforce(
        &self,
        n: usize,
        priority: &Priority,
        cap: u128,
    ) -> Result<Vec<EquilibriumReport>, EquilibriumError> {
        self.check_players(n)?;
        self.check_cap(n, cap)?;
        let base = self.paths.len() as u64;
        let total = base.pow(n as u32);
        let mut reports: Vec<EquilibriumReport> = (0..total)
            .into_par_iter()
            .filter_map(|index| {
                let mut rest = index;
                let profile = PathProfile(
                    (0..n)
                        .map(|_| {
                            let digit = (rest % base) as usize;
                            rest /= base;
                            digit
                        })
                        .collect(),
                );
                let report = self.check_pne(&profile, priority);
                report.is_pne.then_some(report)
            })
            .collect();
        sort_worst_first(&mut reports);
        Ok(reports)
    }

    /// Worst equilibrium cost against `OPT(n)`.
    pub fn poa(&self, n: usize, priority: &Priority, cap: u128) -> Result<PoaReport, EquilibriumError> {
        let equilibria = self.enumerate_pne(n, priority, cap)?;
        let worst = equilibria
            .first()
            .expect("ordered protocols always admit an equilibrium")
            .social_cost_modified
            .clone();
        let opt = crate::opt::solve(&self.net, n)
            .expect("n is within the horizon")
            .cost[n]
            .clone();
        let ratio = match (&opt, worst.finite_part()) {
            (CostValue::Finite(o), _) if *o == rational::zero() => None,
            (CostValue::Unbounded, _) => None,
            (CostValue::Finite(o), CostValue::Finite(w)) => Some(CostValue::Finite(w / o)),
            (CostValue::Finite(_), CostValue::Unbounded) => Some(CostValue::Unbounded),
        };
        Ok(PoaReport {
            worst,
            opt,
            ratio,
            equilibria: equilibria.len(),
        })
    }

    /// Checks the load structure and penalty pattern every equilibrium must
    /// show for the prediction `n̂` behind this game.
    pub fn structure_violations(&self, report: &EquilibriumReport, priority: &Priority) -> Vec<StructureViolation> {
        let tree = self.net.tree();
        let n = report.profile.0.len();
        let n_hat = self.weights.n_hat();
        let actual = tree
            .component_loads(&report.loads)
            .expect("profiles of s-t paths are consistent");
        let target = self.weights.component_thresholds();
        let mut out = Vec::new();
        for c in 0..tree.num_components() {
            if n_hat >= n && actual[c] > target[c] {
                out.push(StructureViolation::OverpredictionExcess {
                    component: c,
                    load: actual[c],
                    target: target[c],
                });
            }
            if n_hat < n && actual[c] < target[c] {
                out.push(StructureViolation::UnderpredictionShortfall {
                    component: c,
                    load: actual[c],
                    target: target[c],
                });
            }
        }

        let paths = self.profile_paths(&report.profile);
        let edge_charges = self.weights.edge_charges(&paths, priority);
        for c in 0..tree.num_components() {
            if actual[c] <= target[c] {
                continue;
            }
            let edges = tree.edges_of(c);
            let users: Vec<usize> = priority
                .order()
                .iter()
                .copied()
                .filter(|&p| paths[p].edges().iter().any(|e| edges.contains(e)))
                .collect();
            let excess = actual[c] - target[c];
            for &player in &users[users.len() - excess..] {
                for (e, charge) in &edge_charges[player] {
                    if edges.contains(e) && charge < self.weights.weight(tree.edge_component(*e)) {
                        out.push(StructureViolation::PenaltyMissing {
                            component: c,
                            player,
                            edge: *e,
                        });
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StructureViolation {
    /// `n̂ >= n` but the equilibrium overloads a component.
    OverpredictionExcess { component: ComponentId, load: usize, target: usize },
    /// `n̂ < n` but the equilibrium leaves part of `A(n̂)` unused.
    UnderpredictionShortfall { component: ComponentId, load: usize, target: usize },
    /// A low-priority excess user of a component is charged less than `W_e`.
    PenaltyMissing { component: ComponentId, player: usize, edge: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoaReport {
    /// Modified cost of the worst equilibrium, ε-part included.
    pub worst: EpsCost,
    pub opt: CostValue,
    /// Finite part of `worst` over `OPT(n)`; `None` when `OPT(n)` is zero.
    pub ratio: Option<CostValue>,
    pub equilibria: usize,
}

/// `min{4(δ+1), 4n}` with `δ = |n - n̂|`.
pub fn poa_bound(n: usize, n_hat: usize) -> usize {
    let delta = n.abs_diff(n_hat);
    (4 * (delta + 1)).min(4 * n)
}

fn argmin_first(options: &[EpsCost]) -> usize {
    let mut best = 0;
    for (idx, charge) in options.iter().enumerate().skip(1) {
        if *charge < options[best] {
            best = idx;
        }
    }
    best
}

fn sort_worst_first(reports: &mut [EquilibriumReport]) {
    reports.sort_by(|a, b| {
        b.social_cost_modified
            .cmp(&a.social_cost_modified)
            .then_with(|| a.profile.cmp(&b.profile))
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costfn::CostTable;
    use crate::mechanism::weights_for;
    use crate::spg::SpgTree;

    fn cheap_then_steep() -> Network {
        Network::new(
            SpgTree::parse("P(e(top),e(bottom))").unwrap(),
            vec![
                CostTable::from_ints(&[0, 1, 1, 1, 1, 100]).unwrap(),
                CostTable::from_ints(&[0, 10, 10, 10, 10, 10]).unwrap(),
            ],
        )
    }

    fn game(net: &Network, n_hat: usize) -> SpgGame {
        let (_, w) = weights_for(net, n_hat).unwrap();
        SpgGame::new(net, w)
    }

    #[test]
    fn two_edges_sequential_equilibrium_uses_top_edge() {
        let g = game(&cheap_then_steep(), 5);
        let report = g.sequential_pne(3, &Priority::identity(3)).unwrap();
        assert_eq!(report.profile, PathProfile(vec![0, 0, 0]));
        assert_eq!(
            report.charges,
            vec![EpsCost::ints(1, 0), EpsCost::ints(0, 0), EpsCost::ints(0, 0)]
        );
        assert_eq!(report.social_cost_original, CostValue::int(1));
        assert_eq!(report.social_cost_modified, EpsCost::ints(1, 0));
    }

    #[test]
    fn single_edge_equilibrium_pays_modified_cost() {
        let net = Network::new(
            SpgTree::parse("e(x)").unwrap(),
            vec![CostTable::from_ints(&[0, 2, 5, 9]).unwrap()],
        );
        let g = game(&net, 1);
        let report = g.sequential_pne(3, &Priority::identity(3)).unwrap();
        let total: EpsCost = report.charges.iter().sum();
        assert_eq!(&total, g.weights().modified_cost(0, 3).unwrap());
        let poa = g.poa(3, &Priority::identity(3), DEFAULT_PROFILE_CAP).unwrap();
        assert_eq!(poa.equilibria, 1);
    }

    #[test]
    fn one_player_takes_an_optimal_path() {
        let net = cheap_then_steep();
        for n_hat in 1..=5 {
            let g = game(&net, n_hat);
            let report = g.sequential_pne(1, &Priority::identity(1)).unwrap();
            assert_eq!(report.social_cost_original, CostValue::int(1));
        }
    }

    #[test]
    fn two_edges_all_on_top_is_not_an_equilibrium() {
        let g = game(&cheap_then_steep(), 5);
        let report = g.check_pne(&PathProfile(vec![0; 5]), &Priority::identity(5));
        assert!(!report.is_pne);
        assert_eq!(report.charges[4], EpsCost::ints(99, 0));
        let dev = report.best_deviation[4].as_ref().unwrap();
        assert_eq!(dev.path, 1);
        assert_eq!(dev.charge, EpsCost::ints(10, 0));
        assert_eq!(dev.gain, EpsCost::ints(89, 0));
        assert!(report.best_deviation[..4].iter().all(Option::is_none));
    }

    #[test]
    fn single_player_on_cheapest_path_is_stable() {
        let g = game(&cheap_then_steep(), 5);
        assert!(g.check_pne(&PathProfile(vec![0]), &Priority::identity(1)).is_pne);
    }

    #[test]
    fn two_edges_worst_equilibrium_and_poa() {
        let g = game(&cheap_then_steep(), 5);
        let all = g.enumerate_pne(3, &Priority::identity(3), DEFAULT_PROFILE_CAP).unwrap();
        assert_eq!(all[0].profile, PathProfile(vec![0, 0, 0]));
        assert_eq!(all[0].social_cost_original, CostValue::int(1));
        let poa = g.poa(3, &Priority::identity(3), DEFAULT_PROFILE_CAP).unwrap();
        assert_eq!(poa.ratio, Some(CostValue::int(1)));

        let four = g.poa(4, &Priority::identity(4), DEFAULT_PROFILE_CAP).unwrap();
        assert_eq!(four.ratio, Some(CostValue::int(1)));
        let five = g.poa(5, &Priority::identity(5), DEFAULT_PROFILE_CAP).unwrap();
        assert_eq!(five.ratio, Some(CostValue::Finite(rational::ratio(11, 10))));
    }

    #[test]
    fn pruned_and_bruteforce_enumeration_agree() {
        let net = Network::new(
            SpgTree::parse("P(S(e(a),e(b)),P(e(c),e(d)))").unwrap(),
            vec![
                CostTable::from_ints(&[0, 2, 3, 7, 9]).unwrap(),
                CostTable::from_ints(&[0, 1, 5, 5, 5]).unwrap(),
                CostTable::from_ints(&[0, 4, 4, 4, 4]).unwrap(),
                CostTable::parse(&["0", "3", "6", "inf", "inf"]).unwrap(),
            ],
        );
        for n_hat in 1..=4 {
            let g = game(&net, n_hat);
            for n in 1..=4 {
                let pr = Priority::from_order((0..n).rev().collect());
                let fast = g.enumerate_pne(n, &pr, DEFAULT_PROFILE_CAP).unwrap();
                let slow = g.enumerate_pne_bruteforce(n, &pr, DEFAULT_PROFILE_CAP).unwrap();
                assert_eq!(fast, slow, "n̂={n_hat} n={n}");
                assert!(!fast.is_empty());
            }
        }
    }

    #[test]
    fn identical_edges_give_relabeling_closed_equilibria() {
        let table = CostTable::from_ints(&[0, 3, 5, 8]).unwrap();
        let net = Network::new(SpgTree::parse("P(e(a),e(b))").unwrap(), vec![table.clone(), table]);
        // With no predicted players both edges get the same penalty.
        let g = game(&net, 0);
        let all = g.enumerate_pne(3, &Priority::identity(3), DEFAULT_PROFILE_CAP).unwrap();
        let set: std::collections::BTreeSet<_> = all.iter().map(|r| r.profile.clone()).collect();
        for profile in &set {
            let swapped = PathProfile(profile.0.iter().map(|&p| 1 - p).collect());
            assert!(set.contains(&swapped));
        }
    }

    #[test]
    fn cap_is_enforced() {
        let g = game(&cheap_then_steep(), 5);
        assert_eq!(
            g.enumerate_pne(5, &Priority::identity(5), 31),
            Err(EquilibriumError::TooLarge { profiles: 32, cap: 31 })
        );
        assert_eq!(g.sequential_pne(0, &Priority::identity(0)).unwrap_err(), EquilibriumError::NoPlayers);
    }

    #[test]
    fn bound_formula() {
        assert_eq!(poa_bound(3, 3), 4);
        assert_eq!(poa_bound(3, 5), 12);
        assert_eq!(poa_bound(1, 4), 4);
        assert_eq!(poa_bound(5, 2), 16);
    }
}
