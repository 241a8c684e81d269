//! Free-space absorption: Franck-Condon and Floquet transition weights, the
//! steady-state absorption spectrum as a comb of Lorentzians, its sum rule
//! and the zero-phonon-line intensity.

use crate::dynamics::steady_beta;
use crate::params::{DriveParams, MoleculeParams, ProbeParams, TruncationPolicy};
use crate::scalar::{ensure_finite, Real};
use crate::specfun::{bessel_cutoff, fc_weight, series_cutoffs, BesselOrders, SeriesCutoffs};
use crate::warning::{Flagged, Warning};
use crate::{Error, Result};

/// Absorption probability of the `n`-th vibronic line without drive.
pub fn p_abs_bare<T: Real>(n: i64, lambda: T) -> Result<T> {
    fc_weight(n, lambda)
}

/// Absorption probability of the line `n nu` when the transition is
/// frequency-modulated by the drive: Franck-Condon weights redistributed by
/// `J_m(2 lambda eta_d / omega_d)^2` over `m <= n`.
pub fn p_abs_driven<T: Real>(
    n: i64,
    lambda: T,
    drive: &DriveParams<T>,
    policy: &TruncationPolicy<T>,
) -> Result<T> {
    if n < 0 {
        return Err(Error::Domain(format!(
            "vibrational index n = {n} must be >= 0"
        )));
    }
    ensure_finite("lambda", lambda)?;
    let x = T::lit(2.0) * lambda * drive.eta_d() / drive.omega_d();
    let m_cut = bessel_cutoff(x, policy.eps_series())?;
    let j = BesselOrders::new(m_cut, x)?;
    let mut total = T::zero();
    for m in -(m_cut as i64)..=n.min(m_cut as i64) {
        let jm = j.get(m);
        total += fc_weight(n - m, lambda)? * jm * jm;
    }
    Ok(total)
}

/// One Floquet sideband of the excited state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quasienergy<T> {
    pub m: i64,
    /// Energy offset `m omega_d` from the electronic transition.
    pub offset: T,
    /// `J_m(2 lambda eta_d / omega_d)^2`.
    pub weight: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuasienergyTable<T> {
    pub rows: Vec<Quasienergy<T>>,
}

impl<T: Real> QuasienergyTable<T> {
    pub fn total_weight(&self) -> T {
        self.rows.iter().fold(T::zero(), |acc, r| acc + r.weight)
    }
}

/// Floquet quasienergies `m omega_d` for `|m| <= m_max`. Without modulation
/// only the `m = 0` row is returned.
pub fn floquet_quasienergies<T: Real>(
    lambda: T,
    drive: &DriveParams<T>,
    m_max: usize,
) -> Result<QuasienergyTable<T>> {
    ensure_finite("lambda", lambda)?;
    let x = T::lit(2.0) * lambda * drive.eta_d() / drive.omega_d();
    let m_max = if x == T::zero() { 0 } else { m_max };
    let j = BesselOrders::new(m_max, x)?;
    let rows = j
        .iter()
        .map(|(m, v)| Quasienergy {
            m,
            offset: T::from_i64(m).unwrap() * drive.omega_d(),
            weight: v * v,
        })
        .collect();
    Ok(QuasienergyTable { rows })
}

/// Provenance of a computed spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumMeta<T> {
    pub cutoffs: SeriesCutoffs,
    /// Argument of the drive (frequency-modulation) Bessel weights.
    pub drive_index: T,
    /// Argument of the vibrational-occupation Bessel weights, `2 lambda |beta|`.
    pub occupation_index: T,
    /// `|beta|^2` used for the occupation sidebands (or its free-space value
    /// when they are neglected).
    pub occupation: T,
    /// Linewidth added per vibrational quantum.
    pub sideband_damping: T,
    pub warnings: Vec<Warning>,
}

/// Steady-state absorption as a sum of Lorentzians
/// `(eta_p^2 / gamma) sum_{n,k} w_{n,k} g_n / (g_n^2 + (Delta - n nu - k omega_d)^2)`
/// with `g_n = gamma~ + n Gamma`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumModel<T> {
    prefactor: T,
    nu: T,
    omega_d: T,
    widths: Vec<T>,
    k_max: i64,
    /// `weights[n][k + k_max]`.
    weights: Vec<Vec<T>>,
    meta: SpectrumMeta<T>,
}

/// Inputs of the Lorentzian comb shared by the free-space and cavity spectra.
pub(crate) struct CombInputs<T> {
    pub eta_p: T,
    pub lambda: T,
    pub gamma: T,
    pub gamma_tilde: T,
    pub sideband_damping: T,
    pub nu: T,
    pub omega_d: T,
    pub drive_index: T,
    pub occupation_index: T,
    pub occupation: T,
}

impl<T: Real> SpectrumModel<T> {
    pub(crate) fn build(
        c: CombInputs<T>,
        policy: &TruncationPolicy<T>,
        mut warnings: Vec<Warning>,
    ) -> Result<Self> {
        let cut = series_cutoffs(c.lambda, c.drive_index, c.occupation_index, policy)?;
        warnings.extend(cut.warnings);
        let cutoffs = cut.value;
        let jm = BesselOrders::new(cutoffs.m_cut, c.drive_index)?;
        let jl = BesselOrders::new(cutoffs.l_cut, c.occupation_index)?;
        let k_max = (cutoffs.m_cut + cutoffs.l_cut) as i64;
        let mut harmonic = vec![T::zero(); (2 * k_max + 1) as usize];
        for (m, a) in jm.iter() {
            for (l, b) in jl.iter() {
                harmonic[(m + l + k_max) as usize] += a * a * b * b;
            }
        }
        let mut widths = Vec::with_capacity(cutoffs.n_cut + 1);
        let mut weights = Vec::with_capacity(cutoffs.n_cut + 1);
        for n in 0..=cutoffs.n_cut {
            let s = fc_weight(n as i64, c.lambda)?;
            widths.push(c.gamma_tilde + T::from_usize_lossy(n) * c.sideband_damping);
            weights.push(harmonic.iter().map(|&h| s * h).collect());
        }
        Ok(Self {
            prefactor: c.eta_p * c.eta_p / c.gamma,
            nu: c.nu,
            omega_d: c.omega_d,
            widths,
            k_max,
            weights,
            meta: SpectrumMeta {
                cutoffs,
                drive_index: c.drive_index,
                occupation_index: c.occupation_index,
                occupation: c.occupation,
                sideband_damping: c.sideband_damping,
                warnings,
            },
        })
    }

    /// Resonant-drive spectrum: frequency-modulation sidebands and the
    /// sidebands of the coherent vibrational occupation.
    pub fn resonant(
        mol: &MoleculeParams<T>,
        drive: &DriveParams<T>,
        eta_p: T,
        policy: &TruncationPolicy<T>,
    ) -> Result<Self> {
        let amp = steady_beta(mol, drive)?;
        let mut warnings = common_warnings(mol, drive.omega_d(), eta_p);
        if drive.eta_d() > T::zero() && drive.detuning(mol) != T::zero() {
            warnings.push(Warning::DetunedBeta {
                delta_d: drive.detuning(mol).to_f64_lossy(),
            });
        }
        Self::build(
            CombInputs {
                eta_p,
                lambda: mol.lambda(),
                gamma: mol.gamma(),
                gamma_tilde: mol.gamma_tilde(),
                sideband_damping: mol.big_gamma(),
                nu: mol.nu(),
                omega_d: drive.omega_d(),
                drive_index: drive.modulation_index(mol),
                occupation_index: T::lit(2.0) * mol.lambda() * amp.magnitude(),
                occupation: amp.occupation,
            },
            policy,
            warnings,
        )
    }

    /// Spectrum with only the frequency-modulation sidebands; the vibration
    /// is assumed to stay in its ground state.
    pub fn off_resonant(
        mol: &MoleculeParams<T>,
        drive: &DriveParams<T>,
        eta_p: T,
        policy: &TruncationPolicy<T>,
    ) -> Result<Self> {
        let mut warnings = common_warnings(mol, drive.omega_d(), eta_p);
        let occupation = match steady_beta(mol, drive) {
            Ok(a) => a.occupation,
            Err(Error::UndampedResonance) => T::infinity(),
            Err(e) => return Err(e),
        };
        if occupation > T::lit(0.01) {
            warnings.push(Warning::OccupiedVibron {
                occupation: occupation.to_f64_lossy(),
            });
        }
        Self::build(
            CombInputs {
                eta_p,
                lambda: mol.lambda(),
                gamma: mol.gamma(),
                gamma_tilde: mol.gamma_tilde(),
                sideband_damping: mol.big_gamma(),
                nu: mol.nu(),
                omega_d: drive.omega_d(),
                drive_index: drive.modulation_index(mol),
                occupation_index: T::zero(),
                occupation,
            },
            policy,
            warnings,
        )
    }

    pub fn meta(&self) -> &SpectrumMeta<T> {
        &self.meta
    }

    /// `S(Delta_p)`. Terms are added in a fixed `(n, k)` order.
    pub fn evaluate(&self, delta_p: T) -> T {
        let mut total = T::zero();
        for (n, (&width, row)) in self.widths.iter().zip(&self.weights).enumerate() {
            let base = delta_p - T::from_usize_lossy(n) * self.nu;
            let w2 = width * width;
            for (idx, &w) in row.iter().enumerate() {
                let k = T::from_i64(idx as i64 - self.k_max).unwrap();
                let d = base - k * self.omega_d;
                total += w * width / (w2 + d * d);
            }
        }
        self.prefactor * total
    }

    /// Total oscillator strength kept by the truncation; one up to the tail
    /// tolerance.
    pub fn total_weight(&self) -> T {
        self.weights
            .iter()
            .flatten()
            .fold(T::zero(), |acc, &w| acc + w)
    }

    pub fn sample(&self, detunings: &[T]) -> Spectrum<T> {
        Spectrum {
            detunings: detunings.to_vec(),
            values: detunings.iter().map(|&d| self.evaluate(d)).collect(),
            meta: self.meta.clone(),
        }
    }
}

pub(crate) fn common_warnings<T: Real>(
    mol: &MoleculeParams<T>,
    omega_d: T,
    eta_p: T,
) -> Vec<Warning> {
    let mut warnings = Vec::new();
    if eta_p >= mol.gamma() {
        warnings.push(Warning::StrongProbe {
            eta_p: eta_p.to_f64_lossy(),
            gamma: mol.gamma().to_f64_lossy(),
        });
    }
    if mol.gamma() > T::lit(0.1) * omega_d {
        warnings.push(Warning::SlowDrive {
            gamma: mol.gamma().to_f64_lossy(),
            omega_d: omega_d.to_f64_lossy(),
        });
    }
    warnings
}

/// Sampled absorption spectrum `S(Delta_p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<T> {
    pub detunings: Vec<T>,
    pub values: Vec<T>,
    pub meta: SpectrumMeta<T>,
}

/// Absorption spectrum under near-resonant vibrational drive.
pub fn spectrum_resonant<T: Real>(
    mol: &MoleculeParams<T>,
    drive: &DriveParams<T>,
    probe: &ProbeParams<T>,
    policy: &TruncationPolicy<T>,
) -> Result<Spectrum<T>> {
    Ok(SpectrumModel::resonant(mol, drive, probe.eta_p(), policy)?.sample(probe.detunings()))
}

/// Absorption spectrum under off-resonant drive (`|beta|^2` neglected).
pub fn spectrum_off_resonant<T: Real>(
    mol: &MoleculeParams<T>,
    drive: &DriveParams<T>,
    probe: &ProbeParams<T>,
    policy: &TruncationPolicy<T>,
) -> Result<Spectrum<T>> {
    Ok(SpectrumModel::off_resonant(mol, drive, probe.eta_p(), policy)?.sample(probe.detunings()))
}

/// `|1 - sum_{n,m,l} s_n J_m(x)^2 J_l(y)^2|` at the cutoffs the spectrum uses.
pub fn sum_rule_residual<T: Real>(
    lambda: T,
    drive: &DriveParams<T>,
    beta_mag: T,
    policy: &TruncationPolicy<T>,
) -> Result<T> {
    ensure_finite("lambda", lambda)?;
    ensure_finite("|beta|", beta_mag)?;
    let two = T::lit(2.0);
    let x = two * lambda * drive.eta_d() / drive.omega_d();
    let y = two * lambda * beta_mag.abs();
    let cut = series_cutoffs(lambda, x, y, policy)?.value;
    let mut poisson = T::zero();
    for n in 0..=cut.n_cut {
        poisson += fc_weight(n as i64, lambda)?;
    }
    let squares = |j: BesselOrders<T>| j.iter().fold(T::zero(), |acc, (_, v)| acc + v * v);
    let fm = squares(BesselOrders::new(cut.m_cut, x)?);
    let occ = squares(BesselOrders::new(cut.l_cut, y)?);
    Ok((T::one() - poisson * fm * occ).abs())
}

/// Zero-phonon-line peak intensity and its effective Franck-Condon factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZplIntensity<T> {
    /// `S(0)` restricted to the `n = m = l = 0` term.
    pub intensity: T,
    /// `e^{-lambda^2} J_0(x)^2 J_0(y)^2`.
    pub fc_factor: T,
    /// Small-argument estimate `exp[-lambda^2 (1 + 2|beta|^2 + 2 eta_d^2 / omega_d^2)]`.
    pub fc_factor_estimate: T,
}

impl<T: Real> ZplIntensity<T> {
    /// Intensity implied by the small-argument Franck-Condon estimate.
    pub fn intensity_estimate(&self) -> T {
        self.intensity / self.fc_factor * self.fc_factor_estimate
    }
}

pub fn zpl_intensity<T: Real>(
    mol: &MoleculeParams<T>,
    drive: &DriveParams<T>,
    eta_p: T,
    beta_mag: T,
) -> Result<ZplIntensity<T>> {
    ensure_finite("eta_p", eta_p)?;
    ensure_finite("|beta|", beta_mag)?;
    let two = T::lit(2.0);
    let l2 = mol.huang_rhys();
    let x = drive.modulation_index(mol);
    let y = two * mol.lambda() * beta_mag.abs();
    let j0x = BesselOrders::new(0, x)?.get(0);
    let j0y = BesselOrders::new(0, y)?.get(0);
    let fc_factor = (-l2).exp() * j0x * j0x * j0y * j0y;
    let ratio = drive.eta_d() / drive.omega_d();
    let fc_factor_estimate =
        (-l2 * (T::one() + two * beta_mag * beta_mag + two * ratio * ratio)).exp();
    Ok(ZplIntensity {
        intensity: eta_p * eta_p / (mol.gamma() * mol.gamma_tilde()) * fc_factor,
        fc_factor,
        fc_factor_estimate,
    })
}

/// Estimated height of the drive-induced narrow peak at `Delta_p = nu`
/// relative to the bare vibronic sideband, `eta_d^2 / (4 gamma~ Gamma)`.
/// Meaningful for `gamma~ << Gamma` and weak drive.
pub fn sideband_ratio_estimate<T: Real>(
    mol: &MoleculeParams<T>,
    drive: &DriveParams<T>,
) -> Result<Flagged<T>> {
    if mol.big_gamma() == T::zero() {
        return Err(Error::Domain("sideband ratio needs Gamma > 0".into()));
    }
    let mut warnings = Vec::new();
    if mol.gamma_tilde() > T::lit(0.1) * mol.big_gamma() {
        warnings.push(Warning::BroadZeroPhononLine {
            gamma_tilde: mol.gamma_tilde().to_f64_lossy(),
            big_gamma: mol.big_gamma().to_f64_lossy(),
        });
    }
    let eta = drive.eta_d();
    Ok(Flagged::new(
        eta * eta / (T::lit(4.0) * mol.gamma_tilde() * mol.big_gamma()),
        warnings,
    ))
}
