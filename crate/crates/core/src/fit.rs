//! Peak location and linewidth extraction on sampled curves.

use crate::scalar::Real;
use crate::{Error, Result};

/// A local maximum refined by a parabola through the three nearest samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak<T> {
    pub index: usize,
    pub position: T,
    pub height: T,
}

/// Interior local maxima (strictly greater than the left neighbour, not
/// smaller than the right one), in increasing `x`.
pub fn local_maxima<T: Real>(xs: &[T], ys: &[T]) -> Vec<Peak<T>> {
    let mut peaks = Vec::new();
    for i in 1..ys.len().saturating_sub(1) {
        if ys[i] > ys[i - 1] && ys[i] >= ys[i + 1] {
            peaks.push(refine(xs, ys, i));
        }
    }
    peaks
}

fn refine<T: Real>(xs: &[T], ys: &[T], i: usize) -> Peak<T> {
    let (x0, x1, x2) = (xs[i - 1], xs[i], xs[i + 1]);
    let (y0, y1, y2) = (ys[i - 1], ys[i], ys[i + 1]);
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let curvature = (d12 - d01) / (x2 - x0);
    if curvature >= T::zero() {
        return Peak {
            index: i,
            position: x1,
            height: y1,
        };
    }
    // Vertex of y = y1 + b (x - x1) + c (x - x1)^2.
    let slope = d01 + curvature * (x1 - x0);
    let shift = -slope / (T::lit(2.0) * curvature);
    Peak {
        index: i,
        position: x1 + shift,
        height: y1 + slope * shift * T::lit(0.5),
    }
}

/// Half width at half maximum above `baseline` around sample `index`,
/// averaged over both flanks with linear interpolation between samples.
pub fn half_width<T: Real>(xs: &[T], ys: &[T], index: usize, baseline: T) -> Option<T> {
    let half = baseline + (ys[index] - baseline) * T::lit(0.5);
    let cross = |a: usize, b: usize| xs[a] + (xs[b] - xs[a]) * (half - ys[a]) / (ys[b] - ys[a]);
    let right = (index + 1..ys.len())
        .find(|&j| ys[j] <= half)
        .map(|j| cross(j - 1, j))?;
    let left = (0..index)
        .rev()
        .find(|&j| ys[j] <= half)
        .map(|j| cross(j + 1, j))?;
    Some((right - left) * T::lit(0.5))
}

/// Lorentzian `height g^2 / (g^2 + (x - centre)^2)` fitted with a known
/// centre by linear regression of `1 / y` on `(x - centre)^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzianFit<T> {
    pub centre: T,
    pub height: T,
    pub hwhm: T,
}

/// Fits samples with `|x - centre| <= reach`, skipping those with
/// `|x - centre| < exclude` (to step over a narrow feature on top of the
/// line). Each point is weighted by `y^2`, which undoes the amplification of
/// the wings by the reciprocal.
pub fn fit_lorentzian<T: Real>(
    xs: &[T],
    ys: &[T],
    centre: T,
    reach: T,
    exclude: T,
) -> Result<LorentzianFit<T>> {
    let (mut sw, mut su, mut sv, mut suu, mut suv) =
        (T::zero(), T::zero(), T::zero(), T::zero(), T::zero());
    let mut used = 0usize;
    for (&x, &y) in xs.iter().zip(ys) {
        let d = (x - centre).abs();
        if d > reach || d < exclude || y <= T::zero() {
            continue;
        }
        let w = y * y;
        let u = d * d;
        let v = y.recip();
        sw += w;
        su += w * u;
        sv += w * v;
        suu += w * u * u;
        suv += w * u * v;
        used += 1;
    }
    if used < 3 {
        return Err(Error::Domain(
            "Lorentzian fit needs at least three samples".into(),
        ));
    }
    let det = sw * suu - su * su;
    let slope = (sw * suv - su * sv) / det;
    let intercept = (sv - slope * su) / sw;
    if !(slope > T::zero() && intercept > T::zero()) {
        return Err(Error::Domain(
            "samples are not Lorentzian around the centre".into(),
        ));
    }
    Ok(LorentzianFit {
        centre,
        height: intercept.recip(),
        hwhm: (intercept / slope).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::linspace;
    use approx::assert_relative_eq;

    fn lorentz(x: f64, c: f64, g: f64, h: f64) -> f64 {
        h * g * g / (g * g + (x - c) * (x - c))
    }

    #[test]
    fn refines_off_grid_peak() {
        let xs = linspace(-1.0, 1.0, 201);
        let ys: Vec<f64> = xs.iter().map(|&x| lorentz(x, 0.1234, 0.05, 2.0)).collect();
        let p = local_maxima(&xs, &ys);
        assert_eq!(p.len(), 1);
        assert!((p[0].position - 0.1234).abs() < 1e-3);
        assert_relative_eq!(p[0].height, 2.0, max_relative = 1e-2);
    }

    #[test]
    fn two_peaks() {
        let xs = linspace(0.0, 2.0, 2001);
        let ys: Vec<f64> = xs
            .iter()
            .map(|&x| lorentz(x, 0.8, 0.02, 1.0) + lorentz(x, 1.2, 0.02, 1.0))
            .collect();
        let p = local_maxima(&xs, &ys);
        assert_eq!(p.len(), 2);
        assert_relative_eq!(p[1].position - p[0].position, 0.4, max_relative = 1e-3);
    }

    #[test]
    fn half_width_of_lorentzian() {
        let xs = linspace(-1.0, 1.0, 4001);
        let ys: Vec<f64> = xs.iter().map(|&x| lorentz(x, 0.0, 0.03, 1.0)).collect();
        let hw = half_width(&xs, &ys, 2000, 0.0).unwrap();
        assert_relative_eq!(hw, 0.03, max_relative = 1e-3);
    }

    #[test]
    fn fit_recovers_width_under_spike() {
        let xs = linspace(0.5, 1.5, 2001);
        let ys: Vec<f64> = xs
            .iter()
            .map(|&x| lorentz(x, 1.0, 0.1, 1.0) + lorentz(x, 1.0, 0.001, 5.0))
            .collect();
        let f = fit_lorentzian(&xs, &ys, 1.0, 0.3, 0.05).unwrap();
        assert_relative_eq!(f.hwhm, 0.1, max_relative = 2e-3);
        assert!(fit_lorentzian(&xs, &ys, 1.0, 0.3, 0.4).is_err());
    }
}
