use num_complex::Complex64;

use super::displacement::displacement_operator;
use super::hilbert::HilbertConfig;
use super::integrate::{Diagnostics, IntegrationConfig, Propagator};
use super::model::{MasterEquation, Probe};
use super::state::DensityMatrix;
use super::steady::RELAX_TIMES;
use super::CMatrix;
use crate::params::{DriveParams, MoleculeParams};
use crate::{Error, Result};

/// `<D(t) D^dag(t')>` of the driven, damped vibration in its periodic steady
/// state, by the quantum regression theorem: `D^dag rho(t')` is propagated
/// with the master equation for `t - t'` and traced against `D`.
///
/// The run starts in the vacuum and settles for whole drive periods before
/// `t'`, so only `t' mod period` matters.
pub fn displacement_correlation_oracle(
    t: f64,
    t_prime: f64,
    mol: &MoleculeParams<f64>,
    drive: &DriveParams<f64>,
    n_vib: usize,
    cfg: &IntegrationConfig,
) -> Result<Complex64> {
    if t < t_prime {
        return Err(Error::Ordering { t, t_prime });
    }
    if mol.big_gamma() <= 0.0 {
        return Err(Error::Domain(
            "regression needs a damped vibration (Gamma > 0)".into(),
        ));
    }
    let hilbert = HilbertConfig::new(n_vib, 0)?;
    let model = MasterEquation::new(mol, drive, Probe::off(), None, &hilbert)?;
    let period = model.period();
    let settle =
        t_prime.rem_euclid(period) + (RELAX_TIMES / mol.big_gamma() / period).ceil() * period;

    let d_vib = displacement_operator(mol.lambda(), n_vib)?.map(|x| Complex64::new(x, 0.0));
    let d = CMatrix::identity(2, 2).kronecker(&d_vib);

    let mut prop = Propagator::new(&model, cfg);
    let mut diag = Diagnostics::default();
    let mut rho = DensityMatrix::ground(&hilbert).into_matrix();
    prop.advance(&mut rho, 0.0, settle, true, &mut diag)?;
    let mut x = d.adjoint() * rho;
    prop.advance(&mut x, settle, settle + (t - t_prime), false, &mut diag)?;
    Ok((d * x).trace())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_times_and_ordering() {
        let mol = MoleculeParams::new(0.2, 1.0, 0.01, 0.0, 0.1).unwrap();
        let drive = DriveParams::new(0.05, 1.0).unwrap();
        let cfg = IntegrationConfig::new(0.05, 1.0).unwrap();
        let c = displacement_correlation_oracle(3.0, 3.0, &mol, &drive, 12, &cfg).unwrap();
        assert!((c - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(matches!(
            displacement_correlation_oracle(1.0, 2.0, &mol, &drive, 12, &cfg),
            Err(Error::Ordering { .. })
        ));
    }
}
