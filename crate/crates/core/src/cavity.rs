//! Vibration coupled to a driven infrared cavity: susceptibilities, the
//! Purcell-enhanced vibrational damping, the cavity-induced occupation and
//! the resulting absorption spectrum.

use num_complex::Complex;

use crate::fit::local_maxima;
use crate::params::{linspace, CavityParams, MoleculeParams, ProbeParams, TruncationPolicy};
use crate::scalar::{ensure_finite, Real};
use crate::spectra::{common_warnings, CombInputs, Spectrum, SpectrumModel};
use crate::warning::{Flagged, Warning};
use crate::{Error, Result};

fn nonzero_frequency<T: Real>(omega: T) -> Result<T> {
    ensure_finite("omega", omega)?;
    if omega == T::zero() {
        return Err(Error::Domain("susceptibility needs omega != 0".into()));
    }
    Ok(omega)
}

/// Bare mechanical susceptibility `i w / (w^2 + 2 i Gamma w - nu^2)`.
pub fn eps_m<T: Real>(omega: T, mol: &MoleculeParams<T>) -> Result<Complex<T>> {
    ensure_finite("omega", omega)?;
    let denom = Complex::new(
        omega * omega - mol.nu() * mol.nu(),
        T::lit(2.0) * mol.big_gamma() * omega,
    );
    if denom == Complex::new(T::zero(), T::zero()) {
        return Err(Error::Domain(format!(
            "undamped mechanical pole at omega = {omega}"
        )));
    }
    Ok(Complex::new(T::zero(), omega) / denom)
}

/// Cavity susceptibility `1 / (i (omega_c - w) + kappa)`.
pub fn eps_c<T: Real>(omega: T, cav: &CavityParams<T>) -> Complex<T> {
    Complex::new(cav.kappa(), cav.omega_c() - omega).inv()
}

/// `2 g^2 (nu / w) (eps_c(w) - eps_c^*(-w))`, the cavity back-action on the
/// inverse mechanical susceptibility.
fn back_action<T: Real>(omega: T, mol: &MoleculeParams<T>, cav: &CavityParams<T>) -> Complex<T> {
    let g = cav.g();
    (eps_c(omega, cav) - eps_c(-omega, cav).conj()) * (T::lit(2.0) * g * g * mol.nu() / omega)
}

/// Cavity-modified mechanical susceptibility.
pub fn eps_m_eff<T: Real>(
    omega: T,
    mol: &MoleculeParams<T>,
    cav: &CavityParams<T>,
) -> Result<Complex<T>> {
    nonzero_frequency(omega)?;
    if cav.g() == T::zero() {
        return eps_m(omega, mol);
    }
    let bare_inv = Complex::new(
        T::lit(2.0) * mol.big_gamma(),
        (mol.nu() * mol.nu() - omega * omega) / omega,
    );
    let inv = bare_inv + back_action(omega, mol, cav);
    if inv == Complex::new(T::zero(), T::zero()) {
        return Err(Error::Domain(format!(
            "undamped effective pole at omega = {omega}"
        )));
    }
    Ok(inv.inv())
}

/// Frequency-dependent vibrational damping including the cavity bath.
pub fn gamma_tilde_of_omega<T: Real>(
    omega: T,
    mol: &MoleculeParams<T>,
    cav: &CavityParams<T>,
) -> Result<T> {
    nonzero_frequency(omega)?;
    let (g, kappa) = (cav.g(), cav.kappa());
    let lower = kappa * kappa + (cav.omega_c() - omega).powi(2);
    let upper = kappa * kappa + (cav.omega_c() + omega).powi(2);
    Ok(mol.big_gamma() + g * g * mol.nu() / omega * (kappa / lower - kappa / upper))
}

/// Squared, cavity-shifted vibrational frequency.
pub fn nu_tilde_sq<T: Real>(omega: T, mol: &MoleculeParams<T>, cav: &CavityParams<T>) -> Result<T> {
    nonzero_frequency(omega)?;
    let (g, kappa, wc) = (cav.g(), cav.kappa(), cav.omega_c());
    let lower = kappa * kappa + (wc - omega).powi(2);
    let upper = kappa * kappa + (wc + omega).powi(2);
    let shift = (omega - wc) / lower - (omega + wc) / upper;
    Ok(mol.nu() * (mol.nu() + T::lit(2.0) * g * g * shift))
}

/// Optically induced damping at the vibrational frequency for a cavity
/// driven at `omega_d`.
pub fn gamma_ir<T: Real>(mol: &MoleculeParams<T>, cav: &CavityParams<T>, omega_d: T) -> Result<T> {
    ensure_finite("omega_d", omega_d)?;
    let (g, kappa) = (cav.g(), cav.kappa());
    let lorentz = |d: T| g * g * kappa / (kappa * kappa + d * d);
    Ok(lorentz(omega_d - mol.nu()) - lorentz(omega_d + mol.nu()))
}

/// Cooperativity `g^2 / (kappa Gamma)`.
pub fn cooperativity<T: Real>(mol: &MoleculeParams<T>, cav: &CavityParams<T>) -> Result<T> {
    if mol.big_gamma() == T::zero() {
        return Err(Error::Domain("cooperativity needs Gamma > 0".into()));
    }
    Ok(cav.g() * cav.g() / (cav.kappa() * mol.big_gamma()))
}

/// Purcell-enhanced vibrational damping `Gamma + g^2 / kappa`.
pub fn gamma_eff<T: Real>(mol: &MoleculeParams<T>, cav: &CavityParams<T>) -> T {
    mol.big_gamma() + cav.g() * cav.g() / cav.kappa()
}

/// Vibrational occupation induced through the driven cavity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityOccupation<T> {
    /// `g^2 (eta_d^c)^2 |eps_m_eff(w_d)|^2 |eps_c(w_d)|^2`.
    pub occupation: T,
    /// `(g / kappa)^2 (eta_d^c / 2)^2 / (Gamma_eff^2 + (w_d - nu)^2)`.
    pub purcell_estimate: T,
    /// `[g eta_d^c / (2 kappa Gamma)]^2`, only for `w_d = w_c = nu`.
    pub resonant_estimate: Option<T>,
}

impl<T: Real> CavityOccupation<T> {
    pub fn magnitude(&self) -> T {
        self.occupation.sqrt()
    }
}

pub fn beta_c<T: Real>(
    mol: &MoleculeParams<T>,
    cav: &CavityParams<T>,
    omega_d: T,
) -> Result<Flagged<CavityOccupation<T>>> {
    let chi = eps_m_eff(omega_d, mol, cav)?;
    let drive = cav.g() * cav.eta_d_c();
    let occupation = drive * drive * chi.norm_sqr() * eps_c(omega_d, cav).norm_sqr();
    let half = cav.eta_d_c() * T::lit(0.5);
    let ratio = cav.g() / cav.kappa();
    let damping = gamma_eff(mol, cav);
    let detuning = omega_d - mol.nu();
    let purcell_estimate = ratio * ratio * half * half / (damping * damping + detuning * detuning);
    let resonant_estimate = (omega_d == cav.omega_c()
        && omega_d == mol.nu()
        && mol.big_gamma() > T::zero())
    .then(|| {
        let a = drive / (T::lit(2.0) * cav.kappa() * mol.big_gamma());
        a * a
    });
    Ok(Flagged::new(
        CavityOccupation {
            occupation,
            purcell_estimate,
            resonant_estimate,
        },
        weak_coupling_warning(cav).into_iter().collect(),
    ))
}

fn weak_coupling_warning<T: Real>(cav: &CavityParams<T>) -> Option<Warning> {
    (cav.g() >= cav.kappa()).then(|| Warning::NotWeakCoupling {
        g: cav.g().to_f64_lossy(),
        kappa: cav.kappa().to_f64_lossy(),
    })
}

/// Frequency-modulation index `2 lambda g eta_d^c / (kappa omega_d)` of the
/// cavity-driven transition.
pub fn effective_drive_z<T: Real>(
    mol: &MoleculeParams<T>,
    cav: &CavityParams<T>,
    omega_d: T,
) -> Result<T> {
    ensure_finite("omega_d", omega_d)?;
    if omega_d <= T::zero() {
        return Err(Error::Domain("omega_d must be > 0".into()));
    }
    Ok(T::lit(2.0) * mol.lambda() * cav.g() * cav.eta_d_c() / (cav.kappa() * omega_d))
}

impl<T: Real> SpectrumModel<T> {
    /// Absorption of a molecule driven through a weakly coupled cavity.
    pub fn cavity(
        mol: &MoleculeParams<T>,
        cav: &CavityParams<T>,
        omega_d: T,
        eta_p: T,
        policy: &TruncationPolicy<T>,
    ) -> Result<Self> {
        if cav.g() >= cav.kappa() {
            return Err(Error::StrongCoupling {
                g: cav.g().to_f64_lossy(),
                kappa: cav.kappa().to_f64_lossy(),
            });
        }
        let z = effective_drive_z(mol, cav, omega_d)?;
        let occ = beta_c(mol, cav, omega_d)?;
        let mut warnings = common_warnings(mol, omega_d, eta_p);
        warnings.extend(occ.warnings);
        Self::build(
            CombInputs {
                eta_p,
                lambda: mol.lambda(),
                gamma: mol.gamma(),
                gamma_tilde: mol.gamma_tilde(),
                sideband_damping: gamma_eff(mol, cav),
                nu: mol.nu(),
                omega_d,
                drive_index: z,
                occupation_index: T::lit(2.0) * mol.lambda() * occ.value.magnitude(),
                occupation: occ.value.occupation,
            },
            policy,
            warnings,
        )
    }
}

/// Absorption spectrum with cavity-mediated drive at `omega_d`. Refused for
/// `g >= kappa`.
pub fn spectrum_cavity<T: Real>(
    mol: &MoleculeParams<T>,
    cav: &CavityParams<T>,
    probe: &ProbeParams<T>,
    omega_d: T,
    policy: &TruncationPolicy<T>,
) -> Result<Spectrum<T>> {
    Ok(SpectrumModel::cavity(mol, cav, omega_d, probe.eta_p(), policy)?.sample(probe.detunings()))
}

/// `|eps_m_eff|^2` sampled on a frequency grid, with its local maxima.
#[derive(Debug, Clone, PartialEq)]
pub struct SusceptibilityScan<T> {
    pub omegas: Vec<T>,
    pub values: Vec<T>,
    pub peak_positions: Vec<T>,
}

/// Default scan grid: `[lo, hi]` with spacing `kappa / 200`.
pub fn scan_grid<T: Real>(cav: &CavityParams<T>, lo: T, hi: T) -> Vec<T> {
    let step = cav.kappa() / T::lit(200.0);
    let points = ((hi - lo) / step).ceil().to_usize().unwrap_or(1) + 1;
    linspace(lo, hi, points.max(2))
}

pub fn susceptibility_scan<T: Real>(
    mol: &MoleculeParams<T>,
    cav: &CavityParams<T>,
    omegas: &[T],
) -> Result<SusceptibilityScan<T>> {
    let values = omegas
        .iter()
        .map(|&w| eps_m_eff(w, mol, cav).map(|c| c.norm_sqr()))
        .collect::<Result<Vec<_>>>()?;
    let peak_positions = local_maxima(omegas, &values)
        .into_iter()
        .map(|p| p.position)
        .collect();
    Ok(SusceptibilityScan {
        omegas: omegas.to_vec(),
        values,
        peak_positions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn mol(big_gamma: f64) -> MoleculeParams<f64> {
        MoleculeParams::new(0.2, 1.0, 1e-4, 0.0, big_gamma).unwrap()
    }

    fn cav(g: f64, kappa: f64) -> CavityParams<f64> {
        CavityParams::new(g, kappa, 1.0, 0.8 * kappa).unwrap()
    }

    #[test]
    fn bare_susceptibility() {
        let m = mol(0.02);
        assert_eq!(eps_m(0.0, &m).unwrap(), Complex::new(0.0, 0.0));
        let on = eps_m(1.0, &m).unwrap();
        assert_relative_eq!(on.re, 1.0 / (2.0 * 0.02), max_relative = 1e-14);
        assert!(on.im.abs() < 1e-12);
        assert!(eps_m(1.0, &mol(0.0)).is_err());
    }

    #[test]
    fn cavity_susceptibility() {
        let c = cav(0.01, 0.05);
        let on = eps_c(1.0, &c);
        assert_relative_eq!(on.re, 20.0, max_relative = 1e-14);
        assert_eq!(on.im, 0.0);
        assert!(eps_c(1e12, &c).norm() < 1e-11);
        let peak = eps_c(1.0, &c).norm_sqr();
        assert_relative_eq!(eps_c(1.05, &c).norm_sqr(), 0.5 * peak, max_relative = 1e-12);
    }

    #[test]
    fn uncoupled_effective_susceptibility_is_bare() {
        let m = mol(0.02);
        let c = cav(0.0, 0.05);
        for &w in &[0.3, 0.99, 1.0, 1.7] {
            assert_eq!(eps_m_eff(w, &m, &c).unwrap(), eps_m(w, &m).unwrap());
        }
        assert_eq!(gamma_tilde_of_omega(0.7, &m, &c).unwrap(), 0.02);
        assert_eq!(nu_tilde_sq(0.7, &m, &c).unwrap(), 1.0);
        assert!(eps_m_eff(0.0, &m, &c).is_err());
    }

    #[test]
    fn decomposition_matches_inverse() {
        let m = mol(0.03);
        let c = CavityParams::new(0.02, 0.07, 0.93, 0.0).unwrap();
        for &w in &[0.2, 0.8, 1.0, 1.3] {
            let inv = eps_m_eff(w, &m, &c).unwrap().inv();
            let gt = gamma_tilde_of_omega(w, &m, &c).unwrap();
            let nt = nu_tilde_sq(w, &m, &c).unwrap();
            assert_relative_eq!(inv.re, 2.0 * gt, max_relative = 1e-12);
            assert_relative_eq!(
                inv.im,
                (nt - w * w) / w,
                max_relative = 1e-12,
                epsilon = 1e-13
            );
            let mag = w * w / ((nt - w * w).powi(2) + 4.0 * gt * gt * w * w);
            assert_relative_eq!(
                eps_m_eff(w, &m, &c).unwrap().norm_sqr(),
                mag,
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn induced_damping() {
        let m = mol(0.001);
        let c = cav(0.002, 0.01);
        assert_eq!(gamma_ir(&m, &cav(0.0, 0.01), 1.0).unwrap(), 0.0);
        assert_relative_eq!(
            gamma_ir(&m, &c, 1.0).unwrap(),
            0.002 * 0.002 / 0.01,
            max_relative = 1e-4
        );
        let c2 = CavityParams::new(0.03, 0.2, 0.8, 0.0).unwrap();
        assert_relative_eq!(
            gamma_ir(&m, &c2, 0.8).unwrap(),
            gamma_tilde_of_omega(1.0, &m, &c2).unwrap() - m.big_gamma(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn cooperativity_and_purcell_rate() {
        let m = mol(0.01);
        assert_eq!(cooperativity(&m, &cav(0.0, 0.06)).unwrap(), 0.0);
        assert_eq!(gamma_eff(&m, &cav(0.0, 0.06)), 0.01);
        let g = (0.06 * 0.01_f64).sqrt();
        assert_relative_eq!(
            cooperativity(&m, &cav(g, 0.06)).unwrap(),
            1.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(gamma_eff(&m, &cav(g, 0.06)), 0.02, max_relative = 1e-14);
        assert!(cooperativity(&mol(0.0), &cav(g, 0.06)).is_err());
    }

    #[test]
    fn occupation_forms() {
        let m = mol(0.01);
        let undriven = CavityParams::new(0.005, 0.06, 1.0, 0.0).unwrap();
        assert_eq!(beta_c(&m, &undriven, 1.0).unwrap().value.occupation, 0.0);

        // C = 0.02: the susceptibility form tracks Gamma_eff, the resonant
        // estimate uses the bare Gamma, so they differ by ~(1 + C)^2.
        let g = (0.02 * 0.06 * 0.01_f64).sqrt();
        let c = CavityParams::new(g, 0.06, 1.0, 0.048).unwrap();
        let b = beta_c(&m, &c, 1.0).unwrap().value;
        let coop = 0.02;
        let resonant = b.resonant_estimate.unwrap();
        assert!(((b.occupation - resonant) / resonant).abs() < 3.0 * coop);
        assert_relative_eq!(b.occupation, b.purcell_estimate, max_relative = 1e-2);
        assert!(beta_c(&m, &c, 0.9)
            .unwrap()
            .value
            .resonant_estimate
            .is_none());
    }

    #[test]
    fn modulation_index() {
        let m = mol(0.01);
        assert_eq!(effective_drive_z(&m, &cav(0.0, 0.06), 1.0).unwrap(), 0.0);
        let c = CavityParams::new(0.01, 0.05, 1.0, 0.3).unwrap();
        let free = crate::params::DriveParams::new(0.01 * 0.3 / 0.05, 1.0).unwrap();
        assert_relative_eq!(
            effective_drive_z(&m, &c, 1.0).unwrap(),
            free.modulation_index(&m),
            max_relative = 1e-15
        );
        assert!(effective_drive_z(&m, &c, 0.0).is_err());
    }

    #[test]
    fn strong_coupling_spectrum_refused() {
        let m = mol(0.01);
        let probe = ProbeParams::at(1e-5, 1.0).unwrap();
        let c = CavityParams::new(0.07, 0.06, 1.0, 0.048).unwrap();
        assert!(matches!(
            spectrum_cavity(&m, &c, &probe, 1.0, &TruncationPolicy::default()),
            Err(Error::StrongCoupling { .. })
        ));
    }

    #[test]
    fn uncoupled_spectrum_is_franck_condon_comb() {
        let m = mol(0.01);
        let c = CavityParams::new(0.0, 0.06, 1.0, 0.048).unwrap();
        let probe = ProbeParams::linspace(1e-5, -0.5, 2.5, 31).unwrap();
        let policy = TruncationPolicy::default();
        let s = spectrum_cavity(&m, &c, &probe, 1.0, &policy).unwrap();
        let undriven = crate::params::DriveParams::undriven(1.0).unwrap();
        let free = crate::spectra::spectrum_resonant(&m, &undriven, &probe, &policy).unwrap();
        for (a, b) in s.values.iter().zip(&free.values) {
            assert_relative_eq!(a, b, max_relative = 1e-14);
        }
    }

    #[test]
    fn splitting_appears_above_threshold() {
        let m = mol(0.01);
        let count = |g: f64| {
            let c = CavityParams::new(g, 0.01, 1.0, 0.0).unwrap();
            let grid = scan_grid(&c, 0.8, 1.2);
            susceptibility_scan(&m, &c, &grid)
                .unwrap()
                .peak_positions
                .len()
        };
        // With Gamma = kappa the doublet resolves just below g = kappa / 2.
        let counts: Vec<usize> = [0.0025, 0.005, 0.01, 0.02, 0.04]
            .iter()
            .map(|&g| count(g))
            .collect();
        assert_eq!(counts[0], 1);
        assert!(counts.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(counts[2..], [2, 2, 2]);
    }

    proptest! {
        #[test]
        fn damping_never_below_bare(w in 0.01f64..3.0, wc in 0.01f64..3.0, g in 0.0f64..0.1, kappa in 0.001f64..0.5) {
            let m = mol(0.01);
            let c = CavityParams::new(g, kappa, wc, 0.0).unwrap();
            prop_assert!(gamma_tilde_of_omega(w, &m, &c).unwrap() >= 0.01);
            prop_assert!(gamma_ir(&m, &c, wc).unwrap() >= 0.0);
        }
    }
}
