//! The GoWithTheFlow online allocation.
//!
//! Players arrive one at a time and are routed irrevocably. Player `q` gets
//! the smallest cost scale `k` for which some path still has residual
//! capacity under the optimal loads for `n_k` players, and takes the first
//! such path.

use thiserror::Error;

use crate::costfn::CostValue;
use crate::opt::{self, OptError, OptProfile, ThresholdSeq};
use crate::rational::{self, Rational};
use crate::spg::{LoadProfile, Network, Path};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GwtfError {
    #[error(transparent)]
    Opt(#[from] OptError),
    #[error("no cost scale admits a residual path for player {player}")]
    CapacityExhausted { player: usize },
    #[error("{requested} players exceed the instance horizon {horizon}")]
    BeyondHorizon { requested: usize, horizon: usize },
}

/// Allocation after some number of arrivals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OnlineState {
    pub loads: LoadProfile,
    pub paths: Vec<Path>,
    pub k_history: Vec<usize>,
}

impl OnlineState {
    pub fn empty(edges: usize) -> Self {
        OnlineState {
            loads: LoadProfile::zeros(edges),
            paths: Vec::new(),
            k_history: Vec::new(),
        }
    }

    /// Players assigned so far.
    pub fn q(&self) -> usize {
        self.paths.len()
    }
}

/// Precomputed optimum, thresholds and per-scale capacities for one network.
#[derive(Debug, Clone)]
pub struct GoWithTheFlow {
    net: Network,
    opt: OptProfile,
    thresholds: ThresholdSeq,
    capacities: Vec<LoadProfile>,
}

impl GoWithTheFlow {
    /// Solves the optimum up to the network horizon and derives the
    /// thresholds from the normalized costs.
    pub fn new(net: &Network) -> Result<Self, GwtfError> {
        let opt = opt::solve(net, net.horizon())?;
        let (_, normalized, _) = opt::normalize(net, &opt)?;
        let thresholds = opt::thresholds(&normalized);
        let capacities = thresholds
            .as_slice()
            .iter()
            .map(|&nk| opt.loads[nk].clone())
            .collect();
        Ok(GoWithTheFlow {
            net: net.clone(),
            opt,
            thresholds,
            capacities,
        })
    }

    pub fn network(&self) -> &Network {
        &self.net
    }

    /// Optimum in the network's original units.
    pub fn opt(&self) -> &OptProfile {
        &self.opt
    }

    pub fn thresholds(&self) -> &ThresholdSeq {
        &self.thresholds
    }

    /// Optimal loads for `n_k` players, used as the capacities at scale `k`.
    pub fn capacity(&self, k: usize) -> &LoadProfile {
        &self.capacities[k]
    }

    /// Routes one more player.
    pub fn step(&self, state: &mut OnlineState) -> Result<(), GwtfError> {
        let tree = self.net.tree();
        // k_q never decreases, so the scan resumes at the previous player's scale.
        let start = state.k_history.last().copied().unwrap_or(0);
        for k in start..self.capacities.len() {
            if let Some(path) = tree.find_residual_path(&state.loads, &self.capacities[k]) {
                state.loads.add_path(&path);
                state.paths.push(path);
                state.k_history.push(k);
                return Ok(());
            }
        }
        Err(GwtfError::CapacityExhausted {
            player: state.q() + 1,
        })
    }

    /// Allocation after `n` arrivals, starting from nothing.
    pub fn run(&self, n: usize) -> Result<OnlineState, GwtfError> {
        if n > self.net.horizon() {
            return Err(GwtfError::BeyondHorizon {
                requested: n,
                horizon: self.net.horizon(),
            });
        }
        let mut state = OnlineState::empty(self.net.tree().num_edges());
        for _ in 0..n {
            self.step(&mut state)?;
        }
        Ok(state)
    }

    /// Compares `c(A(n))` with `OPT(n)`.
    pub fn competitive_check(&self, n: usize) -> Result<CompetitiveCheck, GwtfError> {
        let state = self.run(n)?;
        let alg = self.net.cost(&state.loads);
        let opt = self.opt.cost[n].clone();
        Ok(CompetitiveCheck::evaluate(alg, opt))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CompetitiveCheck {
    Ratio {
        alg_cost: CostValue,
        opt_cost: Rational,
        ratio: CostValue,
        ok: bool,
    },
    /// `OPT(n) = 0`; the ratio is undefined.
    Degenerate { alg_cost: CostValue },
}

impl CompetitiveCheck {
    fn evaluate(alg_cost: CostValue, opt: CostValue) -> Self {
        match opt {
            CostValue::Finite(o) if o > rational::zero() => {
                let ratio = match &alg_cost {
                    CostValue::Finite(a) => CostValue::Finite(a / &o),
                    CostValue::Unbounded => CostValue::Unbounded,
                };
                let ok = ratio <= CostValue::int(4);
                CompetitiveCheck::Ratio {
                    alg_cost,
                    opt_cost: o,
                    ratio,
                    ok,
                }
            }
            _ => CompetitiveCheck::Degenerate { alg_cost },
        }
    }

    pub fn ok(&self) -> bool {
        match self {
            CompetitiveCheck::Ratio { ok, .. } => *ok,
            CompetitiveCheck::Degenerate { .. } => true,
        }
    }
}
