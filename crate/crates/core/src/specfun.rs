//! Bessel functions of the first kind, Poissonian Franck-Condon weights and
//! the truncation bounds used by every series in the crate.

use crate::params::TruncationPolicy;
use crate::scalar::{ensure_finite, Real};
use crate::warning::{Flagged, Warning};
use crate::{Error, Result};

const MAX_BESSEL_ARG: f64 = 1e6;

fn check_bessel_arg<T: Real>(x: T) -> Result<T> {
    let ax = ensure_finite("Bessel argument", x)?.abs();
    if ax.to_f64_lossy() >= MAX_BESSEL_ARG {
        return Err(Error::Domain(format!(
            "Bessel argument |x| = {ax} outside the supported range |x| < 1e6"
        )));
    }
    Ok(x)
}

/// `J_0(x) ..= J_{m_max}(x)` for a single argument.
///
/// Miller's backward recurrence normalised with `J_0 + 2 sum J_2k = 1`. The
/// start order sits past the turning point `|x|` by several Airy widths so
/// the dominant solution has decayed below rounding before order `m_max`.
pub fn bessel_j_orders<T: Real>(m_max: usize, x: T) -> Result<Vec<T>> {
    let x = check_bessel_arg(x)?;
    let ax = x.abs();
    let mut out = vec![T::zero(); m_max + 1];

    if ax < T::epsilon() {
        // Leading two terms of the power series; exact to rounding here.
        let half = ax * T::lit(0.5);
        let mut lead = T::one();
        for (m, slot) in out.iter_mut().enumerate() {
            let mf = T::from_usize_lossy(m);
            *slot = lead * (T::one() - half * half / (mf + T::one()));
            lead = lead * half / (mf + T::one());
        }
    } else {
        let axf = ax.to_f64_lossy();
        let start = m_max.max(axf.ceil() as usize) + 30 + 10 * (axf.cbrt().ceil() as usize);
        let start = start + start % 2;
        let big = T::max_value().sqrt();
        let two_over_x = T::lit(2.0) / ax;

        let mut above = T::zero();
        let mut current = T::min_positive_value().sqrt();
        let mut norm = T::zero();
        for k in (1..=start).rev() {
            if k <= m_max {
                out[k] = current;
            }
            if k % 2 == 0 {
                norm += current + current;
            }
            let below = T::from_usize_lossy(k) * two_over_x * current - above;
            above = current;
            current = below;
            if current.abs() > big {
                let s = big.recip();
                current *= s;
                above *= s;
                norm *= s;
                for v in out.iter_mut().skip(k) {
                    *v *= s;
                }
            }
        }
        out[0] = current;
        norm += current;
        let inv = norm.recip();
        for v in out.iter_mut() {
            *v *= inv;
        }
    }

    if x < T::zero() {
        for v in out.iter_mut().skip(1).step_by(2) {
            *v = -*v;
        }
    }
    Ok(out)
}

/// Integer-order Bessel function of the first kind `J_m(x)`, `|x| < 1e6`.
pub fn bessel_j<T: Real>(m: i32, x: T) -> Result<T> {
    let order = m.unsigned_abs() as usize;
    let value = bessel_j_orders(order, x)?[order];
    Ok(if m < 0 && order % 2 == 1 {
        -value
    } else {
        value
    })
}

/// Table of `J_m(x)` for `|m| <= cutoff` with parity applied on lookup.
#[derive(Debug, Clone, PartialEq)]
pub struct BesselOrders<T> {
    nonneg: Vec<T>,
}

impl<T: Real> BesselOrders<T> {
    pub fn new(cutoff: usize, x: T) -> Result<Self> {
        Ok(Self {
            nonneg: bessel_j_orders(cutoff, x)?,
        })
    }

    pub fn cutoff(&self) -> usize {
        self.nonneg.len() - 1
    }

    /// `J_m(x)`; zero outside the table.
    pub fn get(&self, m: i64) -> T {
        let order = m.unsigned_abs() as usize;
        match self.nonneg.get(order) {
            Some(&v) if m < 0 && order % 2 == 1 => -v,
            Some(&v) => v,
            None => T::zero(),
        }
    }

    /// `(m, J_m(x))` for `m = -cutoff ..= cutoff` in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = (i64, T)> + '_ {
        let c = self.cutoff() as i64;
        (-c..=c).map(move |m| (m, self.get(m)))
    }
}

/// `ln n!`: direct sum below 256, Stirling series above.
pub(crate) fn ln_factorial<T: Real>(n: u64) -> T {
    if n < 256 {
        (2..=n).fold(T::zero(), |acc, k| acc + T::from_u64(k).unwrap().ln())
    } else {
        let x = T::from_u64(n).unwrap();
        let inv = x.recip();
        let inv2 = inv * inv;
        let series =
            inv * (T::lit(1.0 / 12.0) - inv2 * (T::lit(1.0 / 360.0) - inv2 * T::lit(1.0 / 1260.0)));
        x * x.ln() - x + T::lit(0.5) * (T::TAU() * x).ln() + series
    }
}

/// Poissonian Franck-Condon weight `exp(-lambda^2) lambda^(2n) / n!`.
pub fn fc_weight<T: Real>(n: i64, lambda: T) -> Result<T> {
    ensure_finite("lambda", lambda)?;
    if n < 0 {
        return Err(Error::Domain(format!(
            "vibrational index n = {n} must be >= 0"
        )));
    }
    let l2 = lambda * lambda;
    if l2 == T::zero() {
        return Ok(if n == 0 { T::one() } else { T::zero() });
    }
    let nf = T::from_i64(n).unwrap();
    Ok((nf * l2.ln() - l2 - ln_factorial::<T>(n as u64)).exp())
}

/// Smallest `M` with `sum_{|m| > M} J_m(x)^2 < eps`.
pub fn bessel_cutoff<T: Real>(x: T, eps: T) -> Result<usize> {
    let ax = check_bessel_arg(x)?.abs();
    if eps.is_nan() || eps <= T::zero() {
        return Err(Error::Domain("tail tolerance must be > 0".into()));
    }
    if ax == T::zero() {
        return Ok(0);
    }
    let axf = ax.to_f64_lossy();
    let mut top = axf.ceil() as usize + 20 + 8 * (axf.cbrt().ceil() as usize);
    loop {
        let j = bessel_j_orders(top, ax)?;
        let last = j[top] * j[top] + j[top - 1] * j[top - 1];
        if last < eps * T::lit(1e-6) || last == T::zero() {
            let mut tail = T::zero();
            let mut m = top;
            while m > 0 {
                let next = tail + T::lit(2.0) * j[m] * j[m];
                if next >= eps {
                    break;
                }
                tail = next;
                m -= 1;
            }
            return Ok(m);
        }
        top *= 2;
    }
}

/// Smallest `N` with `sum_{n > N} fc_weight(n, lambda) < eps`, from the
/// geometric bound `s_{N+1} / (1 - lambda^2 / (N + 2))`.
pub fn poisson_cutoff<T: Real>(lambda: T, eps: T) -> Result<usize> {
    ensure_finite("lambda", lambda)?;
    if eps.is_nan() || eps <= T::zero() {
        return Err(Error::Domain("tail tolerance must be > 0".into()));
    }
    let l2 = lambda * lambda;
    if l2 == T::zero() {
        return Ok(0);
    }
    let mut n = 0usize;
    loop {
        let ratio = l2 / T::from_usize_lossy(n + 2);
        if ratio < T::one() {
            let bound = fc_weight(n as i64 + 1, lambda)? / (T::one() - ratio);
            if bound < eps {
                return Ok(n);
            }
        }
        n += 1;
    }
}

/// Cutoffs for the vibrational index `n` and the two Bessel series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeriesCutoffs {
    pub n_cut: usize,
    /// Drive sidebands `|m| <= m_cut`.
    pub m_cut: usize,
    /// Occupation sidebands `|l| <= l_cut`.
    pub l_cut: usize,
}

impl SeriesCutoffs {
    /// Every cutoff doubled (used to check truncation convergence).
    pub fn doubled(self) -> Self {
        Self {
            n_cut: 2 * self.n_cut + 1,
            m_cut: 2 * self.m_cut + 1,
            l_cut: 2 * self.l_cut + 1,
        }
    }
}

/// Cutoffs for a triple series in `n`, `J_m(x)^2` and `J_l(y)^2`.
///
/// The tolerance is split evenly across the three series and each cutoff is
/// clamped to the policy caps, with a warning when a clamp is applied.
pub fn series_cutoffs<T: Real>(
    lambda: T,
    x: T,
    y: T,
    policy: &TruncationPolicy<T>,
) -> Result<Flagged<SeriesCutoffs>> {
    let eps = policy.eps_series() / T::lit(3.0);
    cutoffs_with(lambda, x, y, eps, eps, policy)
}

/// Cutoffs for series linear in `J_m(x)` and `J_l(y)` (coherence
/// amplitudes). Omitted Bessel orders satisfy `|J| < eps / 3` rather than
/// `J^2 < eps / 3`.
pub fn amplitude_cutoffs<T: Real>(
    lambda: T,
    x: T,
    y: T,
    policy: &TruncationPolicy<T>,
) -> Result<Flagged<SeriesCutoffs>> {
    let eps = policy.eps_series() / T::lit(3.0);
    cutoffs_with(lambda, x, y, eps, eps * eps, policy)
}

fn cutoffs_with<T: Real>(
    lambda: T,
    x: T,
    y: T,
    eps_n: T,
    eps_bessel: T,
    policy: &TruncationPolicy<T>,
) -> Result<Flagged<SeriesCutoffs>> {
    let mut warnings = Vec::new();
    let mut clamp = |series: &'static str, wanted: usize, cap: usize| {
        if wanted > cap {
            warnings.push(Warning::CutoffCapped {
                series,
                wanted,
                cap,
            });
            cap
        } else {
            wanted
        }
    };
    let n_cut = clamp("n", poisson_cutoff(lambda, eps_n)?, policy.n_max_cap());
    let m_cut = clamp("m", bessel_cutoff(x, eps_bessel)?, policy.m_max_cap());
    let l_cut = clamp("l", bessel_cutoff(y, eps_bessel)?, policy.m_max_cap());
    Ok(Flagged::new(
        SeriesCutoffs {
            n_cut,
            m_cut,
            l_cut,
        },
        warnings,
    ))
}
