//! Closed-form time-domain results: the driven vibrational amplitude, momentum
//! and displacement correlations, dipole coherence trajectories and the
//! thermal noise spectrum.
//!
//! Sign convention: with the drive `eta_d cos(omega_d t) (b + b^dagger)` and
//! `p = i (b^dagger - b) / sqrt 2`, the driven steady state has
//! `<b> = -i beta e^{-i omega_d t}` and therefore
//! `<p(t)> = -(beta^* e^{i omega_d t} + beta e^{-i omega_d t}) / sqrt 2`.
//! The Lindblad oracle reproduces this sign; everything below uses it.

use num_complex::Complex;

use crate::params::{DriveParams, MoleculeParams, TruncationPolicy};
use crate::scalar::{ensure_finite, Real};
use crate::specfun::{amplitude_cutoffs, fc_weight, BesselOrders};
use crate::warning::{Flagged, Warning};
use crate::{Error, Result};

/// Coherent amplitude of the driven, damped vibration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentAmplitude<T> {
    pub beta: Complex<T>,
    /// `|beta|^2`, the mean vibron number.
    pub occupation: T,
}

impl<T: Real> CoherentAmplitude<T> {
    pub fn magnitude(&self) -> T {
        self.occupation.sqrt()
    }
}

/// `beta = (eta_d / 2) / (Gamma - i (omega_d - nu))`.
pub fn steady_beta<T: Real>(
    mol: &MoleculeParams<T>,
    drive: &DriveParams<T>,
) -> Result<CoherentAmplitude<T>> {
    let detuning = drive.detuning(mol);
    let damping = mol.big_gamma();
    if damping == T::zero() && detuning == T::zero() {
        return Err(Error::UndampedResonance);
    }
    let half = drive.eta_d() * T::lit(0.5);
    let beta = Complex::new(half, T::zero()) / Complex::new(damping, -detuning);
    let occupation = half * half / (damping * damping + detuning * detuning);
    Ok(CoherentAmplitude { beta, occupation })
}

/// Two-time value `f(t, t')` for `t >= t'`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationSample<T> {
    pub t: T,
    pub t_prime: T,
    pub value: Complex<T>,
}

fn check_order<T: Real>(t: T, t_prime: T) -> Result<()> {
    ensure_finite("t", t)?;
    ensure_finite("t'", t_prime)?;
    if t < t_prime {
        return Err(Error::Ordering {
            t: t.to_f64_lossy(),
            t_prime: t_prime.to_f64_lossy(),
        });
    }
    Ok(())
}

/// `e^{-(Gamma + i nu) tau}`.
fn free_propagator<T: Real>(mol: &MoleculeParams<T>, tau: T) -> Complex<T> {
    Complex::from_polar((-mol.big_gamma() * tau).exp(), -mol.nu() * tau)
}

/// Full non-stationary `<p(t) p(t')>` for the driven vibration, valid for
/// `Gamma << nu`.
pub fn momentum_corr_full<T: Real>(
    t: T,
    t_prime: T,
    mol: &MoleculeParams<T>,
    drive: &DriveParams<T>,
) -> Result<Flagged<CorrelationSample<T>>> {
    check_order(t, t_prime)?;
    let amp = steady_beta(mol, drive)?;
    let w = drive.omega_d();
    let tau = t - t_prime;
    let sum_phase = Complex::from_polar(T::one(), -w * (t + t_prime));
    let driven = amp.beta * amp.beta * sum_phase;
    let value = (free_propagator(mol, tau)
        + Complex::from(T::lit(2.0) * amp.occupation * (w * tau).cos())
        + driven
        + driven.conj())
        * T::lit(0.5);
    let mut warnings = Vec::new();
    if mol.big_gamma() > T::lit(0.1) * mol.nu() {
        warnings.push(Warning::StrongDamping {
            big_gamma: mol.big_gamma().to_f64_lossy(),
            nu: mol.nu().to_f64_lossy(),
        });
    }
    Ok(Flagged::new(
        CorrelationSample { t, t_prime, value },
        warnings,
    ))
}

/// Steady-state `<p(t)>` of the driven vibration.
pub fn momentum_mean<T: Real>(t: T, mol: &MoleculeParams<T>, drive: &DriveParams<T>) -> Result<T> {
    ensure_finite("t", t)?;
    let amp = steady_beta(mol, drive)?;
    let rotating = amp.beta * Complex::from_polar(T::one(), -drive.omega_d() * t);
    Ok(-T::SQRT_2() * rotating.re)
}

/// `<D(t) D^dagger(t')>` with `D = exp(-i sqrt2 lambda p)`, `t >= t'`.
pub fn displacement_corr<T: Real>(
    t: T,
    t_prime: T,
    mol: &MoleculeParams<T>,
    drive: &DriveParams<T>,
) -> Result<CorrelationSample<T>> {
    check_order(t, t_prime)?;
    let l2 = mol.huang_rhys();
    let tau = t - t_prime;
    let exponent = (free_propagator(mol, tau) - T::one()) * l2;
    let shift = if drive.eta_d() == T::zero() {
        T::zero()
    } else {
        momentum_mean(t, mol, drive)? - momentum_mean(t_prime, mol, drive)?
    };
    let phase = Complex::new(T::zero(), -T::SQRT_2() * mol.lambda() * shift);
    Ok(CorrelationSample {
        t,
        t_prime,
        value: (exponent + phase).exp(),
    })
}

/// Which closed form of the dipole trajectory to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DriveRegime {
    /// Vibration left in its ground state; only frequency modulation.
    OffResonant,
    /// Vibration driven into a coherent state of amplitude `|beta|`.
    Resonant,
}

/// Sampled long-time dipole coherence.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceTrace<T> {
    pub times: Vec<T>,
    pub sigma_expect: Vec<Complex<T>>,
    /// `C(t) = 2 |<sigma(t)>|`.
    pub coherence: Vec<T>,
}

/// Long-time `<sigma(t)>` written as a phase times a Fourier series in the
/// drive harmonics.
struct SigmaHarmonics<T> {
    omega: T,
    fm_index: T,
    occupation_index: T,
    resonant: bool,
    /// Coefficient of `e^{i k omega t}`, `k = -k_max ..= k_max`.
    coeffs: Vec<Complex<T>>,
}

impl<T: Real> SigmaHarmonics<T> {
    fn k_max(&self) -> i64 {
        (self.coeffs.len() as i64 - 1) / 2
    }

    fn phase(&self, t: T) -> Complex<T> {
        let wt = self.omega * t;
        let mut arg = -self.fm_index * wt.sin();
        if self.resonant {
            arg += self.occupation_index * wt.cos();
        }
        Complex::from_polar(T::one(), arg)
    }

    /// `sum_k A_k e^{i k omega t}`, whose modulus is `|<sigma(t)>|`.
    fn envelope(&self, t: T) -> Complex<T> {
        let k_max = self.k_max();
        let step = Complex::from_polar(T::one(), self.omega * t);
        let mut rot = Complex::from_polar(T::one(), -self.omega * t * T::from_i64(k_max).unwrap());
        let mut acc = Complex::new(T::zero(), T::zero());
        for &c in &self.coeffs {
            acc += c * rot;
            rot *= step;
        }
        acc
    }

    fn sigma(&self, t: T) -> Complex<T> {
        self.phase(t) * self.envelope(t)
    }
}

fn sigma_harmonics<T: Real>(
    mol: &MoleculeParams<T>,
    drive: &DriveParams<T>,
    eta_p: T,
    delta_p: T,
    regime: DriveRegime,
    policy: &TruncationPolicy<T>,
) -> Result<Flagged<SigmaHarmonics<T>>> {
    ensure_finite("eta_p", eta_p)?;
    ensure_finite("delta_p", delta_p)?;
    let mut warnings = Vec::new();
    let fm_index = drive.modulation_index(mol);
    let occupation_index = match regime {
        DriveRegime::OffResonant => T::zero(),
        DriveRegime::Resonant => {
            let amp = steady_beta(mol, drive)?;
            if drive.detuning(mol) != T::zero() {
                warnings.push(Warning::DetunedBeta {
                    delta_d: drive.detuning(mol).to_f64_lossy(),
                });
            }
            T::lit(2.0) * mol.lambda() * amp.magnitude()
        }
    };
    let cut = amplitude_cutoffs(mol.lambda(), fm_index, occupation_index, policy)?;
    warnings.extend(cut.warnings);
    let cutoffs = cut.value;
    let jm = BesselOrders::new(cutoffs.m_cut, fm_index)?;
    let jl = BesselOrders::new(cutoffs.l_cut, occupation_index)?;

    // (-i)^l J_l(y) grouped by total harmonic k = m + l.
    let k_max = (cutoffs.m_cut + cutoffs.l_cut) as i64;
    let mut mixed = vec![Complex::new(T::zero(), T::zero()); (2 * k_max + 1) as usize];
    for (m, a) in jm.iter() {
        for (l, b) in jl.iter() {
            let quarter = match l.rem_euclid(4) {
                0 => Complex::new(b, T::zero()),
                1 => Complex::new(T::zero(), -b),
                2 => Complex::new(-b, T::zero()),
                _ => Complex::new(T::zero(), b),
            };
            mixed[(m + l + k_max) as usize] += quarter * a;
        }
    }

    let omega = drive.omega_d();
    let mut coeffs = vec![Complex::new(T::zero(), T::zero()); mixed.len()];
    for n in 0..=cutoffs.n_cut {
        let weight = fc_weight(n as i64, mol.lambda())? * eta_p;
        let nf = T::from_usize_lossy(n);
        let width = mol.gamma_tilde() + nf * mol.big_gamma();
        for (idx, slot) in coeffs.iter_mut().enumerate() {
            let k = T::from_i64(idx as i64 - k_max).unwrap();
            let denom = Complex::new(width, -(delta_p - nf * mol.nu() - k * omega));
            *slot += mixed[idx] * weight / denom;
        }
    }

    Ok(Flagged::new(
        SigmaHarmonics {
            omega,
            fm_index,
            occupation_index,
            resonant: regime == DriveRegime::Resonant,
            coeffs,
        },
        warnings,
    ))
}

/// Long-time `<sigma(t)>` and `C(t)` on a caller-supplied time grid, in the
/// frame rotating at the probe frequency.
pub fn sigma_trajectory<T: Real>(
    times: &[T],
    mol: &MoleculeParams<T>,
    drive: &DriveParams<T>,
    eta_p: T,
    delta_p: T,
    regime: DriveRegime,
    policy: &TruncationPolicy<T>,
) -> Result<Flagged<CoherenceTrace<T>>> {
    for &t in times {
        ensure_finite("time", t)?;
    }
    let h = sigma_harmonics(mol, drive, eta_p, delta_p, regime, policy)?;
    let sigma_expect: Vec<_> = times.iter().map(|&t| h.value.sigma(t)).collect();
    let coherence = sigma_expect
        .iter()
        .map(|s| T::lit(2.0) * s.norm())
        .collect();
    Ok(Flagged::new(
        CoherenceTrace {
            times: times.to_vec(),
            sigma_expect,
            coherence,
        },
        h.warnings,
    ))
}

/// Start of the stationary regime: both electronic and vibrational
/// transients have decayed by `e^{-10}`.
pub fn transient_time<T: Real>(mol: &MoleculeParams<T>) -> T {
    let ten = T::lit(10.0);
    let electronic = ten / mol.gamma_tilde();
    if mol.big_gamma() > T::zero() {
        electronic.max(ten / mol.big_gamma())
    } else {
        electronic
    }
}

fn interpolate<T: Real>(times: &[T], values: &[T], t: T) -> T {
    let i = times.partition_point(|&s| s <= t).clamp(1, times.len() - 1);
    let (t0, t1) = (times[i - 1], times[i]);
    let w = (t - t0) / (t1 - t0);
    values[i - 1] + (values[i] - values[i - 1]) * w
}

/// Mean of `C(t)` over the largest whole number of drive periods that fits
/// in the trace after the transient time.
pub fn avg_coherence<T: Real>(
    trace: &CoherenceTrace<T>,
    mol: &MoleculeParams<T>,
    drive: &DriveParams<T>,
) -> Result<T> {
    let times = &trace.times;
    if times.len() < 2 || trace.coherence.len() != times.len() {
        return Err(Error::WindowTooShort { periods: 0.0 });
    }
    let period = drive.period();
    let start = transient_time(mol).max(times[0]);
    let last = times[times.len() - 1];
    let span = (last - start) / period;
    // Absorb rounding when the trace ends exactly on a period boundary.
    let periods = (span + T::lit(1e-9)).floor();
    if periods < T::one() {
        return Err(Error::WindowTooShort {
            periods: span.max(T::zero()).to_f64_lossy(),
        });
    }
    let end = (start + periods * period).min(last);

    let values = &trace.coherence;
    let mut prev_t = start;
    let mut prev_v = interpolate(times, values, start);
    let mut integral = T::zero();
    for (&t, &v) in times.iter().zip(values) {
        if t <= start {
            continue;
        }
        if t >= end {
            break;
        }
        integral += (t - prev_t) * (v + prev_v) * T::lit(0.5);
        prev_t = t;
        prev_v = v;
    }
    let end_v = interpolate(times, values, end);
    integral += (end - prev_t) * (end_v + prev_v) * T::lit(0.5);
    Ok(integral / (end - start))
}

/// Number of drive periods averaged by [`steady_mean_coherence`].
pub const COHERENCE_WINDOW_PERIODS: usize = 20;

/// Long-time average coherence `C-bar` at a single probe detuning.
///
/// Samples the trajectory over a window of whole drive periods after the
/// transient time and confirms the result by doubling the window.
pub fn steady_mean_coherence<T: Real>(
    mol: &MoleculeParams<T>,
    drive: &DriveParams<T>,
    eta_p: T,
    delta_p: T,
    regime: DriveRegime,
    policy: &TruncationPolicy<T>,
) -> Result<Flagged<T>> {
    let h = sigma_harmonics(mol, drive, eta_p, delta_p, regime, policy)?;
    let per_period = (8 * h.value.k_max() as usize + 8).max(64);
    let start = transient_time(mol);
    let period = drive.period();

    let mean_over = |periods: usize| -> Result<T> {
        let samples = periods * per_period;
        let dt = period / T::from_usize_lossy(per_period);
        let times: Vec<T> = (0..=samples)
            .map(|i| start + dt * T::from_usize_lossy(i))
            .collect();
        let coherence = times
            .iter()
            .map(|&t| T::lit(2.0) * h.value.envelope(t).norm())
            .collect();
        let trace = CoherenceTrace {
            times,
            sigma_expect: Vec::new(),
            coherence,
        };
        avg_coherence(&trace, mol, drive)
    };

    let single = mean_over(COHERENCE_WINDOW_PERIODS)?;
    let double = mean_over(2 * COHERENCE_WINDOW_PERIODS)?;
    let scale = single.abs().max(T::min_positive_value());
    if (double - single).abs() > T::lit(1e-6).max(T::epsilon() * T::lit(100.0)) * scale {
        return Err(Error::NotConverged(format!(
            "time-averaged coherence changed from {single} to {double} when doubling the window"
        )));
    }
    Ok(Flagged::new(single, h.warnings))
}

/// Closed-form coherence amplitudes at `Delta_p = nu` under resonant drive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SidebandCoherence<T> {
    /// Amplitude of the drive-induced term oscillating at `e^{i nu t}`.
    pub driven: T,
    /// Bare vibronic contribution.
    pub bare: T,
}

/// Leading drive-induced and bare contributions to `<sigma>` on the first
/// vibronic sideband.
///
/// The two one-photon paths (one drive quantum from the frequency
/// modulation, one from the coherent occupation) enter with a relative
/// phase of `i`, so their Bessel products add in quadrature.
pub fn sigma_sideband_contributions<T: Real>(
    mol: &MoleculeParams<T>,
    drive: &DriveParams<T>,
    eta_p: T,
) -> Result<Flagged<SidebandCoherence<T>>> {
    ensure_finite("eta_p", eta_p)?;
    let mut warnings = Vec::new();
    if drive.omega_d() != mol.nu() {
        warnings.push(Warning::NotResonant {
            omega_d: drive.omega_d().to_f64_lossy(),
            nu: mol.nu().to_f64_lossy(),
        });
    }
    let amp = steady_beta(mol, drive)?;
    let x = drive.modulation_index(mol);
    let y = T::lit(2.0) * mol.lambda() * amp.magnitude();
    let jx = BesselOrders::new(1, x)?;
    let jy = BesselOrders::new(1, y)?;
    let fc = (-mol.huang_rhys()).exp();
    let driven =
        eta_p / mol.gamma_tilde() * fc * (jx.get(1) * jy.get(0)).hypot(jx.get(0) * jy.get(1));
    let bare = eta_p * fc * mol.huang_rhys() / (mol.gamma_tilde() + mol.big_gamma())
        * jx.get(0)
        * jy.get(0);
    Ok(Flagged::new(SidebandCoherence { driven, bare }, warnings))
}

/// Colored thermal noise spectrum `2 Gamma omega [coth(omega / T) + 1] / nu`
/// of the vibrational bath, `T` in frequency units. At `T = 0` this is the
/// one-sided `4 Gamma omega theta(omega) / nu` with `theta(0) = 1/2`.
pub fn thermal_spectrum<T: Real>(omega: T, mol: &MoleculeParams<T>, temperature: T) -> Result<T> {
    ensure_finite("omega", omega)?;
    ensure_finite("temperature", temperature)?;
    if temperature < T::zero() {
        return Err(Error::Domain("temperature must be >= 0".into()));
    }
    let two = T::lit(2.0);
    let scale = two * mol.big_gamma() / mol.nu();
    if temperature == T::zero() {
        let step = if omega > T::zero() {
            T::one()
        } else if omega == T::zero() {
            T::lit(0.5)
        } else {
            T::zero()
        };
        return Ok(two * scale * omega * step);
    }
    if omega == T::zero() {
        return Ok(scale * temperature);
    }
    // coth(x) + 1 = -2 / expm1(-2x), without cancellation for x < 0.
    let x = omega / temperature;
    Ok(scale * omega * (-two / (-two * x).exp_m1()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn mol(lambda: f64, gamma_phi: f64, big_gamma: f64) -> MoleculeParams<f64> {
        MoleculeParams::new(lambda, 1.0, 0.01, gamma_phi, big_gamma).unwrap()
    }

    #[test]
    fn beta_values() {
        let m = mol(0.2, 0.0, 0.1);
        let a = steady_beta(&m, &DriveParams::undriven(1.0).unwrap()).unwrap();
        assert_eq!(a.occupation, 0.0);
        assert_eq!(a.beta, Complex::new(0.0, 0.0));
        let a = steady_beta(&m, &DriveParams::new(0.1, 1.0).unwrap()).unwrap();
        assert_relative_eq!(a.occupation, 0.25, max_relative = 1e-15);
        assert_relative_eq!(a.beta.norm_sqr(), a.occupation, max_relative = 1e-15);
        let undamped = mol(0.2, 0.0, 0.0);
        assert_eq!(
            steady_beta(&undamped, &DriveParams::new(0.1, 1.0).unwrap()),
            Err(Error::UndampedResonance)
        );
        assert!(steady_beta(&undamped, &DriveParams::new(0.1, 1.2).unwrap()).is_ok());
    }

    #[test]
    fn vacuum_momentum_variance() {
        let m = mol(0.2, 0.0, 0.05);
        let d = DriveParams::undriven(1.0).unwrap();
        let c = momentum_corr_full(3.0, 3.0, &m, &d).unwrap().value.value;
        assert_relative_eq!(c.re, 0.5, epsilon = 1e-15);
        assert_relative_eq!(c.im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn equal_time_driven_momentum() {
        let m = mol(0.2, 0.0, 0.05);
        let d = DriveParams::new(0.1, 1.0).unwrap();
        let t = 2.7;
        let amp = steady_beta(&m, &d).unwrap();
        let c = momentum_corr_full(t, t, &m, &d).unwrap().value.value;
        let want =
            0.5 + amp.occupation + (amp.beta * amp.beta * Complex::from_polar(1.0, -2.0 * t)).re;
        assert_relative_eq!(c.re, want, epsilon = 1e-15);
        assert!(c.im.abs() < 1e-15);
        // Equal-time second moment equals variance plus squared mean.
        let p = momentum_mean(t, &m, &d).unwrap();
        assert_relative_eq!(c.re, 0.5 + p * p, epsilon = 1e-14);
    }

    #[test]
    fn stationary_part_of_momentum_correlation() {
        let m = mol(0.2, 0.0, 0.05);
        let d = DriveParams::new(0.1, 1.0).unwrap();
        let amp = steady_beta(&m, &d).unwrap();
        let (t, tp) = (5.3, 1.1);
        let full = momentum_corr_full(t, tp, &m, &d).unwrap().value.value;
        let tau: f64 = t - tp;
        let driven = amp.beta * amp.beta * Complex::from_polar(1.0, -(t + tp));
        let stationary =
            Complex::from_polar((-0.05 * tau).exp(), -tau) * 0.5 + amp.occupation * tau.cos();
        assert!((full - stationary - driven.re).norm() < 1e-15);
    }

    #[test]
    fn ordering_is_enforced() {
        let m = mol(0.2, 0.0, 0.05);
        let d = DriveParams::new(0.1, 1.0).unwrap();
        assert!(matches!(
            momentum_corr_full(1.0, 2.0, &m, &d),
            Err(Error::Ordering { .. })
        ));
        assert!(matches!(
            displacement_corr(1.0, 2.0, &m, &d),
            Err(Error::Ordering { .. })
        ));
    }

    #[test]
    fn strong_damping_is_flagged() {
        let m = mol(0.2, 0.0, 0.3);
        let d = DriveParams::new(0.1, 1.0).unwrap();
        assert_eq!(
            momentum_corr_full(1.0, 0.0, &m, &d).unwrap().warnings.len(),
            1
        );
    }

    #[test]
    fn resonant_momentum_mean_is_cosine() {
        let m = mol(0.2, 0.0, 0.05);
        let d = DriveParams::new(0.1, 1.0).unwrap();
        let beta = steady_beta(&m, &d).unwrap().beta.re;
        for &t in &[0.0, 0.4, 2.0, 7.9] {
            assert_relative_eq!(
                momentum_mean(t, &m, &d).unwrap(),
                -std::f64::consts::SQRT_2 * beta * t.cos(),
                epsilon = 1e-15
            );
        }
        let d0 = DriveParams::undriven(1.0).unwrap();
        assert_eq!(momentum_mean(3.0, &m, &d0).unwrap(), 0.0);
    }

    #[test]
    fn displacement_limits() {
        let m = mol(0.7, 0.0, 0.05);
        let d = DriveParams::new(0.1, 0.9).unwrap();
        assert_eq!(
            displacement_corr(4.2, 4.2, &m, &d).unwrap().value,
            Complex::new(1.0, 0.0)
        );
        let d0 = DriveParams::undriven(1.0).unwrap();
        let far = displacement_corr(2000.0, 0.0, &m, &d0).unwrap().value;
        assert_relative_eq!(far.re, (-0.49_f64).exp(), epsilon = 1e-14);
        assert!(far.im.abs() < 1e-14);
    }

    #[test]
    fn two_level_trajectory_is_constant() {
        let m = mol(0.0, 0.02, 0.1);
        let d = DriveParams::undriven(1.0).unwrap();
        let policy = TruncationPolicy::default();
        let times = [0.0, 1.0, 2.5, 10.0];
        for regime in [DriveRegime::OffResonant, DriveRegime::Resonant] {
            let tr = sigma_trajectory(&times, &m, &d, 1e-4, 0.0, regime, &policy)
                .unwrap()
                .value;
            for s in &tr.sigma_expect {
                assert_relative_eq!(s.re, 1e-4 / 0.03, max_relative = 1e-14);
                assert!(s.im.abs() < 1e-18);
            }
        }
    }

    #[test]
    fn bare_sideband_coherence() {
        let m = MoleculeParams::new(0.2, 1.0, 1e-4, 1e-4, 2e-3).unwrap();
        let d = DriveParams::undriven(1.0).unwrap();
        let policy = TruncationPolicy::default();
        let tr = sigma_trajectory(&[0.0], &m, &d, 1e-5, 1.0, DriveRegime::OffResonant, &policy)
            .unwrap()
            .value;
        let bare = 1e-5 * (-0.04_f64).exp() * 0.04 / (2e-4 + 2e-3);
        // The detuned zero-phonon term is twenty times weaker here.
        assert_relative_eq!(tr.sigma_expect[0].norm(), bare, max_relative = 0.01);
        let side = sigma_sideband_contributions(&m, &d, 1e-5).unwrap().value;
        assert_eq!(side.driven, 0.0);
        assert_relative_eq!(side.bare, bare, max_relative = 1e-14);
    }

    #[test]
    fn trajectory_is_periodic() {
        let m = mol(0.3, 0.0, 0.05);
        let d = DriveParams::new(0.05, 1.0).unwrap();
        let policy = TruncationPolicy::default();
        let period = d.period();
        let times: Vec<f64> = (0..50).map(|i| 100.0 + 0.13 * i as f64).collect();
        let shifted: Vec<f64> = times.iter().map(|t| t + 7.0 * period).collect();
        let a =
            sigma_trajectory(&times, &m, &d, 1e-3, 1.0, DriveRegime::Resonant, &policy).unwrap();
        let b =
            sigma_trajectory(&shifted, &m, &d, 1e-3, 1.0, DriveRegime::Resonant, &policy).unwrap();
        for (x, y) in a.value.coherence.iter().zip(&b.value.coherence) {
            assert_relative_eq!(x, y, max_relative = 1e-9);
        }
        for (x, s) in a.value.coherence.iter().zip(&a.value.sigma_expect) {
            assert_eq!(*x, 2.0 * s.norm());
        }
    }

    #[test]
    fn average_of_constant_trace() {
        let m = mol(0.2, 0.0, 0.1);
        let d = DriveParams::new(0.1, 1.0).unwrap();
        let times: Vec<f64> = (0..=12_000).map(|i| i as f64 * 0.1).collect();
        let trace = CoherenceTrace {
            coherence: vec![0.37; times.len()],
            sigma_expect: Vec::new(),
            times,
        };
        assert_relative_eq!(
            avg_coherence(&trace, &m, &d).unwrap(),
            0.37,
            max_relative = 1e-13
        );
    }

    #[test]
    fn short_window_is_rejected() {
        let m = mol(0.2, 0.0, 0.1);
        let d = DriveParams::new(0.1, 1.0).unwrap();
        let times: Vec<f64> = (0..=100).map(|i| i as f64 * 1.03).collect();
        let trace = CoherenceTrace {
            coherence: vec![1.0; times.len()],
            sigma_expect: Vec::new(),
            times,
        };
        assert!(matches!(
            avg_coherence(&trace, &m, &d),
            Err(Error::WindowTooShort { .. })
        ));
    }

    #[test]
    fn undriven_mean_coherence_is_bare_value() {
        let m = MoleculeParams::new(0.2, 1.0, 1e-4, 1e-4, 2e-3).unwrap();
        let d = DriveParams::undriven(1.0).unwrap();
        let policy = TruncationPolicy::default();
        let c = steady_mean_coherence(&m, &d, 1e-5, 1.0, DriveRegime::Resonant, &policy)
            .unwrap()
            .value;
        let bare = sigma_sideband_contributions(&m, &d, 1e-5)
            .unwrap()
            .value
            .bare;
        assert_relative_eq!(c, 2.0 * bare, max_relative = 0.01);
    }

    #[test]
    fn driven_amplitude_is_linear_for_weak_drive() {
        let m = MoleculeParams::new(0.2, 1.0, 0.002, 0.004, 0.1).unwrap();
        let a =
            sigma_sideband_contributions(&m, &DriveParams::new(1e-4, 1.0).unwrap(), 1e-4).unwrap();
        let b =
            sigma_sideband_contributions(&m, &DriveParams::new(2e-4, 1.0).unwrap(), 1e-4).unwrap();
        assert_relative_eq!(b.value.driven / a.value.driven, 2.0, max_relative = 1e-6);
        let off =
            sigma_sideband_contributions(&m, &DriveParams::new(2e-4, 0.8).unwrap(), 1e-4).unwrap();
        assert_eq!(off.warnings.len(), 1);
    }

    #[test]
    fn thermal_spectrum_values() {
        let m = mol(0.2, 0.0, 0.1);
        assert_eq!(thermal_spectrum(-0.5, &m, 0.0).unwrap(), 0.0);
        assert_relative_eq!(
            thermal_spectrum(1.0, &m, 0.0).unwrap(),
            0.4,
            epsilon = 1e-15
        );
        assert_eq!(thermal_spectrum(0.0, &m, 0.0).unwrap(), 0.0);
        assert_relative_eq!(thermal_spectrum(0.0, &m, 0.3).unwrap(), 2.0 * 0.1 * 0.3);
        assert_relative_eq!(
            thermal_spectrum(1e-9, &m, 0.3).unwrap(),
            thermal_spectrum(0.0, &m, 0.3).unwrap(),
            max_relative = 1e-8
        );
        assert!(thermal_spectrum(1.0, &m, -1.0).is_err());
    }

    proptest! {
        #[test]
        fn thermal_asymmetry(w in -5.0f64..5.0, temp in 0.01f64..10.0) {
            let m = mol(0.2, 0.0, 0.1);
            let d = thermal_spectrum(w, &m, temp).unwrap() - thermal_spectrum(-w, &m, temp).unwrap();
            prop_assert!((d - 0.4 * w).abs() < 1e-12 * (1.0 + w.abs()));
        }

        #[test]
        fn displacement_modulus_bounded(
            lambda in 0.0f64..1.5, big_gamma in 0.0f64..0.3, eta in 0.0f64..0.3,
            wd in 0.5f64..1.5, tp in 0.0f64..50.0, tau in 0.0f64..50.0,
        ) {
            let m = MoleculeParams::new(lambda, 1.0, 0.01, 0.0, big_gamma.max(1e-3)).unwrap();
            let d = DriveParams::new(eta, wd).unwrap();
            let c = displacement_corr(tp + tau, tp, &m, &d).unwrap().value;
            prop_assert!(c.norm() <= 1.0 + 1e-14);
            prop_assert_eq!(displacement_corr(tp, tp, &m, &d).unwrap().value, Complex::new(1.0, 0.0));
        }

        #[test]
        fn undriven_correlation_is_stationary(tp in 0.0f64..100.0, shift in 0.0f64..100.0, tau in 0.0f64..20.0) {
            let m = mol(0.2, 0.0, 0.05);
            let d = DriveParams::undriven(1.0).unwrap();
            let a = momentum_corr_full(tp + tau, tp, &m, &d).unwrap().value.value;
            let b = momentum_corr_full(tp + shift + tau, tp + shift, &m, &d).unwrap().value.value;
            prop_assert!((a - b).norm() < 1e-12);
        }

        #[test]
        fn occupation_monotone(eta in 0.0f64..1.0, extra in 0.0f64..1.0, det in 0.0f64..0.4, more in 0.0f64..0.4) {
            let m = mol(0.2, 0.0, 0.05);
            let base = steady_beta(&m, &DriveParams::new(eta, 1.0 + det).unwrap()).unwrap().occupation;
            let stronger = steady_beta(&m, &DriveParams::new(eta + extra, 1.0 + det).unwrap()).unwrap().occupation;
            let detuned = steady_beta(&m, &DriveParams::new(eta, 1.0 + det + more).unwrap()).unwrap().occupation;
            let detuned_below = steady_beta(&m, &DriveParams::new(eta, 1.0 - det - more).unwrap()).unwrap().occupation;
            prop_assert!(stronger >= base);
            prop_assert!(detuned <= base);
            prop_assert!(detuned_below <= base);
        }
    }
}
