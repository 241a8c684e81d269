use super::hilbert::HilbertConfig;
use super::integrate::{mean, Diagnostics, IntegrationConfig, Observables, Propagator};
use super::model::{MasterEquation, Probe};
use super::state::DensityMatrix;
use crate::params::{CavityParams, DriveParams, MoleculeParams, ProbeParams};
use crate::{Error, Result};

/// Relative change allowed between the last two period averages.
const PERIOD_TOLERANCE: f64 = 1e-4;
/// Absolute floor below which changes are ignored.
const ABSOLUTE_FLOOR: f64 = 1e-14;
/// Run length of automatically configured runs, in slowest relaxation times.
pub(crate) const RELAX_TIMES: f64 = 14.0;

/// Drive-period averages of a long run started in the ground state.
#[derive(Debug, Clone)]
pub struct SteadyState {
    pub averages: Observables,
    /// Largest relative change of the tracked averages over the last period.
    pub period_change: f64,
    pub periods: usize,
    pub final_state: DensityMatrix,
    pub diagnostics: Diagnostics,
}

fn relative_change(a: f64, b: f64) -> f64 {
    let diff = (a - b).abs();
    if diff <= ABSOLUTE_FLOOR {
        0.0
    } else {
        diff / a.abs().max(b.abs())
    }
}

/// Integrates whole drive periods up to `cfg.t_end` and compares the mean
/// observables of the last two periods.
pub fn steady_state(model: &MasterEquation, cfg: &IntegrationConfig) -> Result<SteadyState> {
    let period = model.period();
    let periods = (cfg.t_end() / period).floor() as usize;
    if periods < 2 {
        return Err(Error::WindowTooShort {
            periods: cfg.t_end() / period,
        });
    }
    let nodes = (period / cfg.dt()).ceil().max(8.0) as usize;
    let h = period / nodes as f64;
    let ops = model.operators();
    let mut prop = Propagator::new(model, cfg);
    let mut diag = Diagnostics::default();
    let mut rho = DensityMatrix::ground(model.hilbert()).into_matrix();

    prop.advance(
        &mut rho,
        0.0,
        (periods - 2) as f64 * period,
        true,
        &mut diag,
    )?;
    let mut means = Vec::with_capacity(2);
    for p in periods - 2..periods {
        let start = p as f64 * period;
        let mut acc = Vec::with_capacity(nodes);
        for k in 0..nodes {
            let t = start + k as f64 * h;
            acc.push(Observables::measure(&rho, ops));
            prop.advance(&mut rho, t, t + h, true, &mut diag)?;
        }
        means.push(mean(&acc));
    }
    let (prev, last) = (means[0], means[1]);
    let mut change = relative_change(prev.population, last.population)
        .max(relative_change(prev.vib_occupation, last.vib_occupation))
        .max(relative_change(prev.sigma.norm(), last.sigma.norm()));
    if let (Some(a), Some(b)) = (prev.cav_occupation, last.cav_occupation) {
        change = change.max(relative_change(a, b));
    }
    if change > PERIOD_TOLERANCE {
        return Err(Error::NotConverged(format!(
            "period averages still change by {change:.2e} at t = {}; increase t_end",
            cfg.t_end()
        )));
    }
    let final_state = DensityMatrix::from_raw(rho);
    diag.min_eigenvalue = diag.min_eigenvalue.min(final_state.min_eigenvalue());
    Ok(SteadyState {
        averages: last,
        period_change: change,
        periods,
        final_state,
        diagnostics: diag,
    })
}

/// Period-averaged steady excited population on a probe grid.
#[derive(Debug, Clone)]
pub struct OracleSpectrum {
    pub detunings: Vec<f64>,
    pub values: Vec<f64>,
    pub vib_occupations: Vec<f64>,
    pub cav_occupations: Option<Vec<f64>>,
    /// Worst case over all grid points.
    pub diagnostics: Diagnostics,
}

/// One steady-state run per probe detuning. `cfg = None` configures each
/// run automatically from the model's frequencies and rates.
pub fn spectrum_oracle(
    mol: &MoleculeParams<f64>,
    drive: &DriveParams<f64>,
    probe: &ProbeParams<f64>,
    cav: Option<&CavityParams<f64>>,
    hilbert: &HilbertConfig,
    cfg: Option<&IntegrationConfig>,
) -> Result<OracleSpectrum> {
    let mut diagnostics = Diagnostics::default();
    let mut values = Vec::with_capacity(probe.detunings().len());
    let mut vib = Vec::with_capacity(values.capacity());
    let mut cav_occ = Vec::new();
    for &delta in probe.detunings() {
        let model =
            MasterEquation::new(mol, drive, Probe::new(probe.eta_p(), delta)?, cav, hilbert)?;
        let cfg = match cfg {
            Some(c) => *c,
            None => IntegrationConfig::auto(&model, RELAX_TIMES)?,
        };
        let steady = steady_state(&model, &cfg)?;
        diagnostics.merge(&steady.diagnostics);
        values.push(steady.averages.population);
        vib.push(steady.averages.vib_occupation);
        cav_occ.extend(steady.averages.cav_occupation);
    }
    Ok(OracleSpectrum {
        detunings: probe.detunings().to_vec(),
        values,
        vib_occupations: vib,
        cav_occupations: hilbert.has_cavity().then_some(cav_occ),
        diagnostics,
    })
}
