use thiserror::Error;

/// Errors surfaced by instance validation, solvers, and baselines.
///
/// Agent and good indices embedded in messages are 1-based, matching the
/// file formats and CLI diagnostics.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("instance must have at least one agent")]
    NoAgents,

    #[error("valuation row {row} has {got} entries, expected {expected}")]
    RaggedRow {
        row: usize,
        got: usize,
        expected: usize,
    },

    #[error("value mass overflow: n * m * max_value = {product} must stay below 2^63")]
    OverflowGuard { product: u128 },

    #[error("allocation covers {got} goods, instance has {expected}")]
    GoodCountMismatch { got: usize, expected: usize },

    #[error("allocation names {got} agents, instance has {expected}")]
    AgentCountMismatch { got: usize, expected: usize },

    #[error("owner of good {good} is agent {agent}, outside 1..={agents}")]
    OwnerOutOfRange {
        good: usize,
        agent: usize,
        agents: usize,
    },

    #[error("good {good} has zero value; strict descent requires positive common values")]
    ZeroValueGood { good: usize },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("search space of {states} allocations exceeds the cap of {cap}")]
    SearchSpaceTooLarge { states: u128, cap: u128 },

    #[error("pick order has {got} entries, expected one per good ({expected})")]
    PickOrderLengthMismatch { got: usize, expected: usize },

    #[error("pick order entry {position} names agent {agent}, outside 1..={agents}")]
    PickOrderAgentOutOfRange {
        position: usize,
        agent: usize,
        agents: usize,
    },

    #[error("picking sequence 1..n,n requires m = n + 1 (n = {agents}, m = {goods})")]
    GoodCountNotNPlusOne { agents: usize, goods: usize },

    #[error("descent trace invalid at move {step}: {detail}")]
    InvalidTrace { step: usize, detail: String },
}
