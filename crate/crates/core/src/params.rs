//! Physical parameters of the driven molecule, the probe and the cavity.
//!
//! The library is unit-agnostic: every rate and frequency shares one unit
//! and only ratios enter the formulas. The electronic transition frequency is
//! never stored; all spectra are functions of the probe detuning
//! `delta_p = omega_p - omega_0`.

use crate::scalar::{ensure_finite, Real};
use crate::warning::Warning;
use crate::{Error, Result};

fn require(cond: bool, msg: impl Into<String>) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Domain(msg.into()))
    }
}

/// Vibronic constants of a single molecule with one vibrational mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoleculeParams<T> {
    lambda: T,
    nu: T,
    gamma: T,
    gamma_phi: T,
    big_gamma: T,
}

impl<T: Real> MoleculeParams<T> {
    /// `lambda`: vibronic coupling, `nu`: vibrational frequency, `gamma`:
    /// radiative rate, `gamma_phi`: pure dephasing, `big_gamma`: vibrational
    /// relaxation rate.
    pub fn new(lambda: T, nu: T, gamma: T, gamma_phi: T, big_gamma: T) -> Result<Self> {
        ensure_finite("lambda", lambda)?;
        ensure_finite("nu", nu)?;
        ensure_finite("gamma", gamma)?;
        ensure_finite("gamma_phi", gamma_phi)?;
        ensure_finite("Gamma", big_gamma)?;
        require(lambda >= T::zero(), "lambda must be >= 0")?;
        require(nu > T::zero(), "nu must be > 0")?;
        require(gamma > T::zero(), "gamma must be > 0")?;
        require(gamma_phi >= T::zero(), "gamma_phi must be >= 0")?;
        require(big_gamma >= T::zero(), "Gamma must be >= 0")?;
        Ok(Self {
            lambda,
            nu,
            gamma,
            gamma_phi,
            big_gamma,
        })
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn nu(&self) -> T {
        self.nu
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn gamma_phi(&self) -> T {
        self.gamma_phi
    }

    /// Vibrational relaxation rate.
    pub fn big_gamma(&self) -> T {
        self.big_gamma
    }

    /// Zero-phonon linewidth `gamma + gamma_phi`.
    pub fn gamma_tilde(&self) -> T {
        self.gamma + self.gamma_phi
    }

    /// Huang-Rhys factor `lambda^2`.
    pub fn huang_rhys(&self) -> T {
        self.lambda * self.lambda
    }

    pub fn with_lambda(&self, lambda: T) -> Result<Self> {
        Self::new(lambda, self.nu, self.gamma, self.gamma_phi, self.big_gamma)
    }

    pub fn with_gamma_phi(&self, gamma_phi: T) -> Result<Self> {
        Self::new(self.lambda, self.nu, self.gamma, gamma_phi, self.big_gamma)
    }

    pub fn with_big_gamma(&self, big_gamma: T) -> Result<Self> {
        Self::new(self.lambda, self.nu, self.gamma, self.gamma_phi, big_gamma)
    }
}

/// Classical infrared drive `eta_d cos(omega_d t) (b + b^dagger)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveParams<T> {
    eta_d: T,
    omega_d: T,
}

impl<T: Real> DriveParams<T> {
    pub fn new(eta_d: T, omega_d: T) -> Result<Self> {
        ensure_finite("eta_d", eta_d)?;
        ensure_finite("omega_d", omega_d)?;
        require(eta_d >= T::zero(), "eta_d must be >= 0")?;
        require(omega_d > T::zero(), "omega_d must be > 0")?;
        Ok(Self { eta_d, omega_d })
    }

    /// No drive. `omega_d` is still required to be positive because it
    /// sets the Floquet period.
    pub fn undriven(omega_d: T) -> Result<Self> {
        Self::new(T::zero(), omega_d)
    }

    pub fn eta_d(&self) -> T {
        self.eta_d
    }

    pub fn omega_d(&self) -> T {
        self.omega_d
    }

    pub fn period(&self) -> T {
        T::TAU() / self.omega_d
    }

    /// Drive detuning from the vibration, `omega_d - nu`.
    pub fn detuning(&self, mol: &MoleculeParams<T>) -> T {
        self.omega_d - mol.nu()
    }

    /// Bessel argument of the frequency-modulation sidebands, `2 lambda eta_d / omega_d`.
    pub fn modulation_index(&self, mol: &MoleculeParams<T>) -> T {
        T::lit(2.0) * mol.lambda() * self.eta_d / self.omega_d
    }

    pub fn with_eta_d(&self, eta_d: T) -> Result<Self> {
        Self::new(eta_d, self.omega_d)
    }
}

/// Weak optical probe on the electronic transition.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeParams<T> {
    eta_p: T,
    detunings: Vec<T>,
}

impl<T: Real> ProbeParams<T> {
    /// `detunings` must be strictly increasing. A single point is allowed.
    pub fn new(eta_p: T, detunings: Vec<T>) -> Result<Self> {
        ensure_finite("eta_p", eta_p)?;
        require(eta_p >= T::zero(), "eta_p must be >= 0")?;
        for &d in &detunings {
            ensure_finite("detuning", d)?;
        }
        require(
            detunings.windows(2).all(|w| w[1] > w[0]),
            "detuning grid must be strictly increasing",
        )?;
        Ok(Self { eta_p, detunings })
    }

    /// Probe with a single detuning.
    pub fn at(eta_p: T, delta_p: T) -> Result<Self> {
        Self::new(eta_p, vec![delta_p])
    }

    /// Uniform grid of `points` detunings from `start` to `stop` inclusive.
    pub fn linspace(eta_p: T, start: T, stop: T, points: usize) -> Result<Self> {
        Self::new(eta_p, linspace(start, stop, points))
    }

    pub fn eta_p(&self) -> T {
        self.eta_p
    }

    pub fn detunings(&self) -> &[T] {
        &self.detunings
    }

    /// Flag raised when the probe is not weak against the radiative rate.
    pub fn strong_probe_warning(&self, mol: &MoleculeParams<T>) -> Option<Warning> {
        (self.eta_p >= mol.gamma()).then(|| Warning::StrongProbe {
            eta_p: self.eta_p.to_f64_lossy(),
            gamma: mol.gamma().to_f64_lossy(),
        })
    }
}

/// Uniform grid with both endpoints included.
pub fn linspace<T: Real>(start: T, stop: T, points: usize) -> Vec<T> {
    match points {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (stop - start) / T::from_usize_lossy(points - 1);
            (0..points)
                .map(|i| {
                    if i == points - 1 {
                        stop
                    } else {
                        start + step * T::from_usize_lossy(i)
                    }
                })
                .collect()
        }
    }
}

/// Infrared cavity mode coupled to the vibration through `g (a + a^dagger)(b + b^dagger)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityParams<T> {
    g: T,
    kappa: T,
    omega_c: T,
    eta_d_c: T,
}

impl<T: Real> CavityParams<T> {
    /// `kappa` is the cavity amplitude decay rate, `eta_d_c` the amplitude of
    /// the laser feeding the cavity.
    pub fn new(g: T, kappa: T, omega_c: T, eta_d_c: T) -> Result<Self> {
        ensure_finite("g", g)?;
        ensure_finite("kappa", kappa)?;
        ensure_finite("omega_c", omega_c)?;
        ensure_finite("eta_d_c", eta_d_c)?;
        require(g >= T::zero(), "g must be >= 0")?;
        require(kappa > T::zero(), "kappa must be > 0")?;
        require(omega_c > T::zero(), "omega_c must be > 0")?;
        require(eta_d_c >= T::zero(), "eta_d_c must be >= 0")?;
        Ok(Self {
            g,
            kappa,
            omega_c,
            eta_d_c,
        })
    }

    pub fn g(&self) -> T {
        self.g
    }

    pub fn kappa(&self) -> T {
        self.kappa
    }

    pub fn omega_c(&self) -> T {
        self.omega_c
    }

    pub fn eta_d_c(&self) -> T {
        self.eta_d_c
    }

    pub fn with_g(&self, g: T) -> Result<Self> {
        Self::new(g, self.kappa, self.omega_c, self.eta_d_c)
    }
}

/// Controls every truncated infinite sum in the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationPolicy<T> {
    eps_series: T,
    n_max_cap: usize,
    m_max_cap: usize,
}

impl<T: Real> TruncationPolicy<T> {
    pub fn new(eps_series: T, n_max_cap: usize, m_max_cap: usize) -> Result<Self> {
        ensure_finite("eps_series", eps_series)?;
        require(eps_series > T::zero(), "eps_series must be > 0")?;
        require(n_max_cap >= 1, "n_max_cap must be >= 1")?;
        require(m_max_cap >= 1, "m_max_cap must be >= 1")?;
        Ok(Self {
            eps_series,
            n_max_cap,
            m_max_cap,
        })
    }

    pub fn eps_series(&self) -> T {
        self.eps_series
    }

    pub fn n_max_cap(&self) -> usize {
        self.n_max_cap
    }

    pub fn m_max_cap(&self) -> usize {
        self.m_max_cap
    }
}

impl<T: Real> Default for TruncationPolicy<T> {
    fn default() -> Self {
        Self {
            eps_series: T::default_series_eps(),
            n_max_cap: 64,
            m_max_cap: 128,
        }
    }
}

/// Zero-point scales of the vibrational coordinate and the resulting
/// dimensionless coupling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroPointScales<T> {
    pub lambda: T,
    pub q_zpm: T,
    pub p_zpm: T,
}

/// Vibronic coupling from the reduced mass `mu`, the vibrational frequency
/// `nu` and the displacement `r_ge` between the ground and excited
/// equilibria (hbar = 1).
pub fn derive_lambda<T: Real>(mu: T, nu: T, r_ge: T) -> Result<ZeroPointScales<T>> {
    ensure_finite("mu", mu)?;
    ensure_finite("nu", nu)?;
    ensure_finite("R_ge", r_ge)?;
    require(mu > T::zero(), "reduced mass must be > 0")?;
    require(nu > T::zero(), "nu must be > 0")?;
    let two = T::lit(2.0);
    let q_zpm = (two * mu * nu).sqrt().recip();
    let p_zpm = (mu * nu / two).sqrt();
    Ok(ZeroPointScales {
        lambda: mu * nu * r_ge * q_zpm,
        q_zpm,
        p_zpm,
    })
}

/// Gain of cavity-mediated over direct driving, `sqrt(F / 2 pi)`, for a
/// resonator of finesse `F`.
pub fn finesse_enhancement<T: Real>(finesse: T) -> Result<T> {
    ensure_finite("finesse", finesse)?;
    require(finesse > T::zero(), "finesse must be > 0")?;
    Ok((finesse / T::TAU()).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gamma_tilde_is_sum() {
        let m = MoleculeParams::new(0.2, 1.0, 0.01, 0.03, 0.1).unwrap();
        assert_eq!(m.gamma_tilde(), 0.01 + 0.03);
    }

    #[test]
    fn rejects_invalid_molecules() {
        assert!(MoleculeParams::new(-0.1, 1.0, 0.01, 0.0, 0.1).is_err());
        assert!(MoleculeParams::new(0.1, 0.0, 0.01, 0.0, 0.1).is_err());
        assert!(MoleculeParams::new(0.1, 1.0, 0.0, 0.0, 0.1).is_err());
        assert!(MoleculeParams::new(0.1, 1.0, 0.01, -1.0, 0.1).is_err());
        assert!(MoleculeParams::new(0.1, 1.0, 0.01, 0.0, -0.1).is_err());
        assert!(MoleculeParams::new(f64::NAN, 1.0, 0.01, 0.0, 0.1).is_err());
        assert!(MoleculeParams::new(0.1, f64::INFINITY, 0.01, 0.0, 0.1).is_err());
    }

    #[test]
    fn rejects_non_finite_everywhere() {
        assert!(DriveParams::new(f64::NAN, 1.0).is_err());
        assert!(DriveParams::new(0.1, 0.0).is_err());
        assert!(ProbeParams::new(f64::INFINITY, vec![0.0]).is_err());
        assert!(ProbeParams::new(0.1, vec![0.0, f64::NAN]).is_err());
        assert!(CavityParams::new(0.1, f64::NAN, 1.0, 0.0).is_err());
        assert!(CavityParams::new(0.1, 0.0, 1.0, 0.0).is_err());
        assert!(TruncationPolicy::new(f64::NAN, 4, 4).is_err());
    }

    #[test]
    fn probe_grid_must_increase() {
        assert!(ProbeParams::new(0.1, vec![0.0, 0.0]).is_err());
        assert!(ProbeParams::new(0.1, vec![1.0, 0.5]).is_err());
        assert!(ProbeParams::new(0.1, vec![-1.0, 0.5, 2.0]).is_ok());
    }

    #[test]
    fn strong_probe_is_flagged_not_rejected() {
        let m = MoleculeParams::new(0.2, 1.0, 0.01, 0.0, 0.1).unwrap();
        let p = ProbeParams::at(0.02, 0.0).unwrap();
        assert!(p.strong_probe_warning(&m).is_some());
        let p = ProbeParams::at(0.001, 0.0).unwrap();
        assert!(p.strong_probe_warning(&m).is_none());
    }

    #[test]
    fn linspace_hits_endpoints() {
        let g = linspace(-1.0, 2.0, 7);
        assert_eq!(g.len(), 7);
        assert_eq!(g[0], -1.0);
        assert_eq!(g[6], 2.0);
        assert_relative_eq!(g[3], 0.5);
    }

    #[test]
    fn derive_lambda_examples() {
        assert_eq!(derive_lambda(2.0, 2.0, 0.0).unwrap().lambda, 0.0);
        let z = derive_lambda(1.0, 2.0, 1.0).unwrap();
        assert_relative_eq!(z.lambda, 1.0, epsilon = 1e-15);
        assert_relative_eq!(z.p_zpm, 1.0, epsilon = 1e-15);
        assert_relative_eq!(z.q_zpm, 0.5, epsilon = 1e-15);
        assert!(derive_lambda(0.0, 1.0, 1.0).is_err());
        assert!(derive_lambda(1.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn finesse_examples() {
        assert_relative_eq!(finesse_enhancement(std::f64::consts::TAU).unwrap(), 1.0);
        assert_relative_eq!(
            finesse_enhancement(200.0 * std::f64::consts::PI).unwrap(),
            10.0,
            epsilon = 1e-14
        );
        assert!(finesse_enhancement(0.0).is_err());
        assert!(finesse_enhancement(-3.0).is_err());
    }

    #[test]
    fn finesse_matches_cavity_estimate() {
        // Direct Rabi frequency eta_d = mu E / hbar with P = eps0 c E^2 S / 2,
        // cavity: kappa = pi c / (L F), g = mu/hbar sqrt(hbar omega_c / (2 eps0 L S)),
        // eta_d^c = sqrt(2 P kappa / (hbar omega_d)), omega_c = omega_d.
        // Arbitrary (unit-consistent) numbers, hbar = 1.
        let (mu, e_field, area, eps0, c, length, omega) = (0.7, 2.3, 5.0, 0.9, 11.0, 3.0, 4.0);
        let finesse = 1000.0_f64;
        let power = eps0 * c * e_field * e_field * area / 2.0;
        let eta_d = mu * e_field;
        let kappa = std::f64::consts::PI * c / (length * finesse);
        let g = mu * (omega / (2.0 * eps0 * length * area)).sqrt();
        let eta_c = (2.0 * power * kappa / omega).sqrt();
        let ratio = g * eta_c / (kappa * eta_d);
        assert_relative_eq!(
            ratio,
            finesse_enhancement(finesse).unwrap(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn generic_over_f32() {
        let m = MoleculeParams::<f32>::new(0.2, 1.0, 0.01, 0.02, 0.1).unwrap();
        assert_eq!(m.gamma_tilde(), 0.01f32 + 0.02f32);
        let p = TruncationPolicy::<f32>::default();
        assert_eq!(p.eps_series(), 1e-6);
    }
}
