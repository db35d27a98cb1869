use thiserror::Error;

#[derive(Error, Debug)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("integration failure at step {step}: {reason}")]
    Integration { step: usize, reason: String },

    #[error("ground state failed to converge after {0} iterations")]
    GroundStateNonConvergence(usize),

    #[error("trajectory {index} failed: {source}")]
    Trajectory {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("need at least {needed} trajectories, got {got}")]
    InsufficientTrajectories { needed: usize, got: usize },

    #[error("observable undefined: {0}")]
    UndefinedObservable(String),

    #[error("Fock truncation insufficient: tail weight {tail:.3e} exceeds {tol:.3e}")]
    FockTruncation { tail: f64, tol: f64 },

    #[error("optimizer failed to converge: {0}")]
    OptimizerNonConvergence(String),

    #[error("chi trace does not cover integration window [{t0}, {t1}] s")]
    WindowCoverage { t0: f64, t1: f64 },

    #[error("no overlap revival found in search window")]
    NoRevival,

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
