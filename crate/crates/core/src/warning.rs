use std::fmt;

/// Validity-regime flags attached to results. None of these abort a
/// computation; they record where an approximation behind a closed form is
/// being stretched.
#[derive(Debug, Clone, PartialEq)]
pub enum Warning {
    /// Probe amplitude not small against the radiative rate.
    StrongProbe { eta_p: f64, gamma: f64 },
    /// Radiative rate not small against the drive frequency.
    SlowDrive { gamma: f64, omega_d: f64 },
    /// Drive detuned from the vibration; resonant formulas use |beta| only.
    DetunedBeta { delta_d: f64 },
    /// Off-resonant spectrum evaluated with a non-negligible occupation.
    OccupiedVibron { occupation: f64 },
    /// Resonant-drive closed forms evaluated with omega_d != nu.
    NotResonant { omega_d: f64, nu: f64 },
    /// Vibrational damping not small against the vibrational frequency.
    StrongDamping { big_gamma: f64, nu: f64 },
    /// Zero-phonon linewidth not small against the vibrational relaxation.
    BroadZeroPhononLine { gamma_tilde: f64, big_gamma: f64 },
    /// Cavity coupling not weak.
    NotWeakCoupling { g: f64, kappa: f64 },
    /// A series cutoff hit its hard cap; the tail bound may not hold.
    CutoffCapped {
        series: &'static str,
        wanted: usize,
        cap: usize,
    },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::StrongProbe { eta_p, gamma } => write!(
                f,
                "probe amplitude eta_p = {eta_p} is not below gamma = {gamma}; weak-probe results may not apply"
            ),
            Warning::SlowDrive { gamma, omega_d } => write!(
                f,
                "gamma = {gamma} is not small against omega_d = {omega_d}; stationary spectrum assumes gamma << omega_d"
            ),
            Warning::DetunedBeta { delta_d } => write!(
                f,
                "drive detuning omega_d - nu = {delta_d} != 0; the occupation sidebands use |beta| and ignore its phase"
            ),
            Warning::OccupiedVibron { occupation } => write!(
                f,
                "vibrational occupation |beta|^2 = {occupation} exceeds 0.01; the off-resonant spectrum neglects it"
            ),
            Warning::NotResonant { omega_d, nu } => write!(
                f,
                "omega_d = {omega_d} differs from nu = {nu}; the sideband coherence formulas assume resonant driving"
            ),
            Warning::StrongDamping { big_gamma, nu } => write!(
                f,
                "Gamma = {big_gamma} is not small against nu = {nu}; momentum correlations assume Gamma << nu"
            ),
            Warning::BroadZeroPhononLine { gamma_tilde, big_gamma } => write!(
                f,
                "gamma_tilde = {gamma_tilde} is not small against Gamma = {big_gamma}; the sideband ratio estimate assumes gamma_tilde << Gamma"
            ),
            Warning::NotWeakCoupling { g, kappa } => {
                write!(f, "g = {g} is not below kappa = {kappa}; weak-coupling forms may not apply")
            }
            Warning::CutoffCapped { series, wanted, cap } => write!(
                f,
                "{series} cutoff {wanted} capped at {cap}; truncation error may exceed the requested tolerance"
            ),
        }
    }
}

/// A value together with the validity flags raised while computing it.
#[derive(Debug, Clone, PartialEq)]
pub struct Flagged<V> {
    pub value: V,
    pub warnings: Vec<Warning>,
}

impl<V> Flagged<V> {
    pub fn new(value: V, warnings: Vec<Warning>) -> Self {
        Self { value, warnings }
    }

    pub fn clean(value: V) -> Self {
        Self {
            value,
            warnings: Vec::new(),
        }
    }
}
