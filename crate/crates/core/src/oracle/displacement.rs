use nalgebra::DMatrix;

use crate::scalar::ensure_finite;
use crate::{Error, Result};

/// `exp(lambda (b^dag - b))` on `n_fock` levels, by scaling and squaring a
/// Taylor series. The generator is real antisymmetric, so is the result up
/// to truncation.
pub fn displacement_operator(lambda: f64, n_fock: usize) -> Result<DMatrix<f64>> {
    ensure_finite("lambda", lambda)?;
    if n_fock == 0 {
        return Err(Error::Dimension(
            "Fock space needs at least one level".into(),
        ));
    }
    let generator = DMatrix::from_fn(n_fock, n_fock, |i, j| {
        if i == j + 1 {
            lambda * (i as f64).sqrt()
        } else if j == i + 1 {
            -lambda * (j as f64).sqrt()
        } else {
            0.0
        }
    });
    let norm = generator
        .column_iter()
        .map(|c| c.abs().sum())
        .fold(0.0, f64::max);
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scaled = generator / 2f64.powi(squarings as i32);
    let mut result = DMatrix::identity(n_fock, n_fock);
    let mut term = DMatrix::identity(n_fock, n_fock);
    for k in 1..60 {
        term = &term * &scaled / k as f64;
        result += &term;
        if term.abs().max() < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    Ok(result)
}

/// `|<n| D^dag |0>|^2`, the Franck-Condon weight of the `n`-th vibronic line,
/// from the truncated displacement operator.
pub fn displacement_overlap_oracle(lambda: f64, n: usize, n_fock: usize) -> Result<f64> {
    ensure_finite("lambda", lambda)?;
    let needed = n as f64 + 10.0 * lambda * lambda + 10.0;
    if (n_fock as f64) < needed {
        return Err(Error::Truncation(format!(
            "n_fock = {n_fock}, need at least {}",
            needed.ceil()
        )));
    }
    let d = displacement_operator(lambda, n_fock)?;
    for j in 0..=n {
        let defect = (d.column(j).norm() - 1.0).abs();
        if defect > 1e-8 {
            return Err(Error::Truncation(format!(
                "column {j} of D has norm defect {defect:e}"
            )));
        }
    }
    // <n| D^dag |0> = conj(<0| D |n>), real here.
    Ok(d[(0, n)].powi(2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_cases() {
        assert_eq!(displacement_overlap_oracle(0.0, 0, 10).unwrap(), 1.0);
        assert_eq!(displacement_overlap_oracle(0.0, 3, 13).unwrap(), 0.0);
        assert!(displacement_overlap_oracle(1.0, 2, 15).is_err());
    }

    #[test]
    fn unitary_on_low_states() {
        let d = displacement_operator(0.7, 40).unwrap();
        assert!((d.column(0).norm() - 1.0).abs() < 1e-10);
        let inverse = displacement_operator(-0.7, 40).unwrap();
        let product = &d * &inverse;
        for i in 0..10 {
            for j in 0..10 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((product[(i, j)] - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn coherent_state_statistics() {
        // D|0> is a coherent state with mean occupation lambda^2.
        let lambda = 1.3;
        let d = displacement_operator(lambda, 60).unwrap();
        let mean: f64 = (0..60).map(|n| n as f64 * d[(n, 0)].powi(2)).sum();
        assert!((mean - lambda * lambda).abs() < 1e-12);
    }
}
