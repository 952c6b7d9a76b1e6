use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    Lattice(String),

    #[error("invalid couplings: {0}")]
    Coupling(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("outside ferromagnetic regime: {0}")]
    Regime(String),

    #[error("spectrum undefined at vanishing magnetization")]
    VanishingMagnetization,

    #[error("no self-consistent magnetization: {0}")]
    NoRoot(String),

    #[error("dimension cap exceeded: {what} has size {size}, limit {limit}")]
    DimensionCap {
        what: &'static str,
        size: u128,
        limit: u128,
    },

    #[error("invalid state: {0}")]
    State(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
