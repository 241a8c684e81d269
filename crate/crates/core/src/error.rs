use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} must be finite")]
    NonFinite { name: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("time ordering violated: correlation requires t >= t' (got t = {t}, t' = {t_prime})")]
    Ordering { t: f64, t_prime: f64 },

    #[error("undamped resonance: Gamma = 0 with omega_d = nu has no steady state")]
    UndampedResonance,

    #[error("strong coupling g = {g} >= kappa = {kappa}: the cavity spectrum is only defined for g < kappa")]
    StrongCoupling { g: f64, kappa: f64 },

    #[error("averaging window covers {periods:.3} drive periods, at least one is required")]
    WindowTooShort { periods: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("Fock truncation too small: {0}")]
    Truncation(String),

    #[error("integration accuracy lost: {detail}; retry with dt <= {suggested_dt:e}")]
    Integration { detail: String, suggested_dt: f64 },

    #[error("not converged: {0}")]
    NotConverged(String),
}
