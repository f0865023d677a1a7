use thiserror::Error;

/// Errors surfaced by the aggregation, inference and simulation layers.
///
/// Anything recoverable by the caller (cap exceeded, infeasible grid) carries
/// enough context to pick a different configuration.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("invalid model index: {0}")]
    InvalidModel(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Exact enumeration would visit more models than the configured cap.
    #[error("enumeration of {models} models of size {model_size} from {columns} columns exceeds the cap of {cap}; use the chain sampler instead")]
    EnumerationTooLarge {
        columns: usize,
        model_size: usize,
        /// Total model count, saturated at `u128::MAX` on overflow.
        models: u128,
        cap: u64,
    },

    /// The neighbor graph has no edges (model size equals column count).
    #[error("no neighboring models exist for model size {model_size} with {columns} columns")]
    NoNeighbors { columns: usize, model_size: usize },

    /// Cross-product matrix of the residualized design is numerically singular.
    #[error("degenerate residualized design: cross-product condition number {cond:.3e} exceeds {limit:.1e}")]
    DegenerateDesign { cond: f64, limit: f64 },

    #[error("tuning grid infeasible: model sizes {offending:?} exceed the limit {limit} implied by the training folds")]
    InfeasibleGrid { offending: Vec<usize>, limit: usize },

    #[error("weak-sparsity target infeasible: tail variance {achieved:.6e} exceeds the bound {bound:.6e}")]
    WeakSparsityInfeasible { achieved: f64, bound: f64 },

    /// Periodic audit of the incremental residual sum of squares failed.
    #[error("incremental rss audit failed at step {step}: incremental {incremental:.12e} vs fresh {fresh:.12e}")]
    RssAuditFailed {
        step: u64,
        incremental: f64,
        fresh: f64,
    },

    /// The three variance estimates left their guaranteed ordering by more
    /// than the allowed sampling slack.
    #[error("variance estimates violate the S <= M <= L ordering beyond tolerance: S={s:.6e} M={m:.6e} L={l:.6e} (allowed {allowed:.3e})")]
    JensenViolation { s: f64, m: f64, l: f64, allowed: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    /// Short machine-readable tag, used by the CLI error envelope.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Dimension(_) => "dimension",
            Error::NonFinite(_) => "non_finite",
            Error::InvalidModel(_) => "invalid_model",
            Error::InvalidConfig(_) => "invalid_config",
            Error::EnumerationTooLarge { .. } => "enumeration_too_large",
            Error::NoNeighbors { .. } => "no_neighbors",
            Error::DegenerateDesign { .. } => "degenerate_design",
            Error::InfeasibleGrid { .. } => "infeasible_grid",
            Error::WeakSparsityInfeasible { .. } => "weak_sparsity_infeasible",
            Error::RssAuditFailed { .. } => "rss_audit_failed",
            Error::JensenViolation { .. } => "jensen_violation",
            Error::Numerical(_) => "numerical",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
