//! Multicast network formation games with predicted terminals.
//!
//! Players share a source and each connects her own terminal. Edge costs are
//! constant and every edge is paid in full by its first user in a priority
//! order built from the predicted terminals.

mod bounds;
mod game;
mod graph;
mod order;
mod steiner;

use thiserror::Error;

pub use bounds::{
    assignment_frontier, best_error, bound_check, error_of, logterm, AssignmentFrontier, BestError, BoundCheck,
    BoundReport, PredictionAssignment, PredictionError, EXACT_ASSIGNMENT_CAP,
};
pub use game::{
    check_pne, enumerate_tie_variants, greedy_pne, ordered_shares, player_order, simple_paths, social_cost,
    MulticastDeviation, MulticastOutcome, MulticastProfile,
};
pub use graph::{EdgeId, MetricClosure, MulticastInstance, VertexId, WeightedEdge};
pub use order::{closure_mst, prediction_order, PriorityOrder};
pub use steiner::{game_opt, mst_approximation, steiner_opt, steiner_or_approx, SteinerValue, STEINER_TERMINAL_CAP};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MulticastError {
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("vertex `{0}` is listed twice")]
    DuplicateVertex(String),
    #[error("self-loop at `{0}`")]
    SelfLoop(String),
    #[error("edge {u}-{v} is listed twice")]
    DuplicateEdge { u: String, v: String },
    #[error("edge {u}-{v} must have a positive weight")]
    NonPositiveWeight { u: String, v: String },
    #[error("vertex `{0}` is not reachable from the source")]
    Disconnected(String),
    #[error("{count} terminals exceed the exact-solver limit of {cap}")]
    TooManyTerminals { count: usize, cap: usize },
    #[error("profile has {found} paths, expected {expected}")]
    ProfileLength { expected: usize, found: usize },
    #[error("path for terminal `{0}` does not reach the source")]
    PathDoesNotConnect(String),
    #[error("`{0}` is not an actual terminal")]
    NotATerminal(String),
    #[error("`{0}` is not a predicted terminal")]
    NotAPrediction(String),
}
