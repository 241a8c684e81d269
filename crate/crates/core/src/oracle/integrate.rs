use num_complex::Complex64;

use super::hilbert::Operators;
use super::model::MasterEquation;
use super::state::DensityMatrix;
use super::CMatrix;
use crate::{Error, Result};

const TRACE_DRIFT_LIMIT: f64 = 1e-6;
/// Steps per shortest oscillation period required by `auto`.
const STEPS_PER_CYCLE: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    /// Classical fourth-order Runge-Kutta with the configured step.
    Rk4,
    /// Dormand-Prince 5(4) with step control; the configured step is the
    /// initial and largest step.
    Adaptive { rtol: f64, atol: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationConfig {
    dt: f64,
    t_end: f64,
    method: Method,
    period_average: bool,
}

impl IntegrationConfig {
    pub fn new(dt: f64, t_end: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Domain(format!("dt must be > 0, got {dt}")));
        }
        if !(t_end > 0.0 && t_end.is_finite()) {
            return Err(Error::Domain(format!("t_end must be > 0, got {t_end}")));
        }
        Ok(Self {
            dt,
            t_end,
            method: Method::Rk4,
            period_average: false,
        })
    }

    /// Step resolving the fastest frequency and the generator's spectral
    /// bound, run long enough (`relax_times / slowest rate`, whole drive
    /// periods) for transients to decay, with final-period averaging on.
    pub fn auto(model: &MasterEquation, relax_times: f64) -> Result<Self> {
        let rate = model.slowest_rate();
        if !rate.is_finite() {
            return Err(Error::Domain(
                "no damping: the model has no steady state".into(),
            ));
        }
        let period = model.period();
        let dt = (std::f64::consts::TAU / model.max_frequency() / STEPS_PER_CYCLE)
            .min(0.25 / model.stiffness());
        let periods = (relax_times / rate / period).ceil().max(2.0);
        Ok(Self::new(dt, periods * period)?.with_period_average(true))
    }

    pub fn with_method(self, method: Method) -> Self {
        Self { method, ..self }
    }

    pub fn with_period_average(self, period_average: bool) -> Self {
        Self {
            period_average,
            ..self
        }
    }

    pub fn with_dt(self, dt: f64) -> Result<Self> {
        Self::new(dt, self.t_end).map(|c| Self {
            method: self.method,
            period_average: self.period_average,
            ..c
        })
    }

    pub fn with_t_end(self, t_end: f64) -> Result<Self> {
        Self::new(self.dt, t_end).map(|c| Self {
            method: self.method,
            period_average: self.period_average,
            ..c
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn period_average(&self) -> bool {
        self.period_average
    }
}

/// Expectation values recorded along a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observables {
    /// `<sigma^dag sigma>`.
    pub population: f64,
    /// `<sigma>`.
    pub sigma: Complex64,
    /// `<b^dag b>`.
    pub vib_occupation: f64,
    /// `<i (b^dag - b)> / sqrt 2`.
    pub momentum: f64,
    /// `<a^dag a>` with a cavity.
    pub cav_occupation: Option<f64>,
}

impl Observables {
    pub fn measure(rho: &CMatrix, ops: &Operators) -> Self {
        let state = DensityMatrix::from_raw(rho.clone());
        let number = |c: &CMatrix| state.expect(&(c.adjoint() * c)).re;
        Self {
            population: state.expect(&ops.excited).re,
            sigma: state.expect(&ops.sigma),
            vib_occupation: number(&ops.b),
            momentum: state.expect(&ops.momentum()).re,
            cav_occupation: ops.a.as_ref().map(number),
        }
    }
}

/// Component-wise mean of a nonempty sample.
pub(crate) fn mean(samples: &[Observables]) -> Observables {
    let w = 1.0 / samples.len() as f64;
    let mut acc = samples[0];
    acc.population = samples.iter().map(|o| o.population).sum::<f64>() * w;
    acc.sigma = samples.iter().map(|o| o.sigma).sum::<Complex64>() * w;
    acc.vib_occupation = samples.iter().map(|o| o.vib_occupation).sum::<f64>() * w;
    acc.momentum = samples.iter().map(|o| o.momentum).sum::<f64>() * w;
    acc.cav_occupation = acc
        .cav_occupation
        .map(|_| samples.iter().filter_map(|o| o.cav_occupation).sum::<f64>() * w);
    acc
}

/// Health of a run: worst trace drift, Hermiticity defect removed by the
/// per-step symmetrisation, and the smallest eigenvalue seen at samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    pub max_trace_drift: f64,
    pub max_hermiticity_defect: f64,
    pub min_eigenvalue: f64,
    pub steps: usize,
}

impl Default for Diagnostics {
    fn default() -> Self {
        Self {
            max_trace_drift: 0.0,
            max_hermiticity_defect: 0.0,
            min_eigenvalue: f64::INFINITY,
            steps: 0,
        }
    }
}

impl Diagnostics {
    pub fn merge(&mut self, other: &Self) {
        self.max_trace_drift = self.max_trace_drift.max(other.max_trace_drift);
        self.max_hermiticity_defect = self
            .max_hermiticity_defect
            .max(other.max_hermiticity_defect);
        self.min_eigenvalue = self.min_eigenvalue.min(other.min_eigenvalue);
        self.steps += other.steps;
    }

    fn record_eigen(&mut self, rho: &CMatrix) {
        self.min_eigenvalue = self
            .min_eigenvalue
            .min(DensityMatrix::from_raw(rho.clone()).min_eigenvalue());
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub observables: Vec<Observables>,
    /// Mean over the final drive period, when requested.
    pub period_average: Option<Observables>,
    pub final_state: DensityMatrix,
    pub diagnostics: Diagnostics,
}

/// `dst += scale * src`.
fn add_scaled(dst: &mut CMatrix, scale: f64, src: &CMatrix) {
    dst.zip_apply(src, |d, s| *d += s * scale);
}

// Dormand-Prince 5(4) tableau.
const DP_C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const DP_ERR: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Steps an operator through the generator. Density matrices are
/// re-symmetrised and trace-checked after every step; other operators (used
/// for two-time correlations) are propagated as they are.
pub(crate) struct Propagator<'a> {
    model: &'a MasterEquation,
    method: Method,
    dt: f64,
    stages: Vec<CMatrix>,
    tmp: CMatrix,
}

impl<'a> Propagator<'a> {
    pub(crate) fn new(model: &'a MasterEquation, cfg: &IntegrationConfig) -> Self {
        let dim = model.hilbert().dim();
        let count = match cfg.method {
            Method::Rk4 => 4,
            Method::Adaptive { .. } => 7,
        };
        Self {
            model,
            method: cfg.method,
            dt: cfg.dt,
            stages: vec![CMatrix::zeros(dim, dim); count],
            tmp: CMatrix::zeros(dim, dim),
        }
    }

    /// Advances `x` from `t0` to `t1`.
    pub(crate) fn advance(
        &mut self,
        x: &mut CMatrix,
        t0: f64,
        t1: f64,
        density: bool,
        diag: &mut Diagnostics,
    ) -> Result<()> {
        if t1 <= t0 {
            return Ok(());
        }
        match self.method {
            Method::Rk4 => {
                let n = ((t1 - t0) / self.dt * (1.0 - 1e-12)).ceil().max(1.0) as usize;
                let h = (t1 - t0) / n as f64;
                for k in 0..n {
                    self.rk4_step(x, t0 + k as f64 * h, h, density);
                    self.after_step(x, density, diag)?;
                }
            }
            Method::Adaptive { rtol, atol } => {
                let mut t = t0;
                let mut h = self.dt.min(t1 - t0);
                let mut rejected = 0usize;
                while t < t1 {
                    h = h.min(t1 - t);
                    let err = self.dp_step(x, t, h, (rtol, atol), density);
                    if err <= 1.0 {
                        std::mem::swap(x, &mut self.tmp);
                        t += h;
                        self.after_step(x, density, diag)?;
                        rejected = 0;
                    } else {
                        rejected += 1;
                        if rejected > 50 || h < 1e-14 * t1.abs().max(1.0) {
                            return Err(Error::Integration {
                                detail: format!("adaptive step collapsed at t = {t}"),
                                suggested_dt: h * 0.5,
                            });
                        }
                    }
                    let factor = if err == 0.0 {
                        5.0
                    } else {
                        0.9 * err.powf(-0.2)
                    };
                    h = (h * factor.clamp(0.2, 5.0)).min(self.dt);
                }
            }
        }
        Ok(())
    }

    fn after_step(&self, x: &mut CMatrix, density: bool, diag: &mut Diagnostics) -> Result<()> {
        diag.steps += 1;
        if !density {
            return Ok(());
        }
        let defect = DensityMatrix::symmetrize(x);
        diag.max_hermiticity_defect = diag.max_hermiticity_defect.max(defect);
        let drift = (x.trace().re - 1.0).abs();
        diag.max_trace_drift = diag.max_trace_drift.max(drift);
        if drift.is_nan() || drift > TRACE_DRIFT_LIMIT {
            return Err(Error::Integration {
                detail: format!("trace drifted by {drift:e}"),
                suggested_dt: self.dt * 0.5,
            });
        }
        Ok(())
    }

    fn rk4_step(&mut self, x: &mut CMatrix, t: f64, h: f64, hermitian: bool) {
        let [k1, k2, k3, k4] = &mut self.stages[..] else {
            unreachable!("RK4 keeps four stages")
        };
        let model = self.model;
        model.rhs_into(t, x, k1, hermitian);
        self.tmp.copy_from(x);
        add_scaled(&mut self.tmp, 0.5 * h, k1);
        model.rhs_into(t + 0.5 * h, &self.tmp, k2, hermitian);
        self.tmp.copy_from(x);
        add_scaled(&mut self.tmp, 0.5 * h, k2);
        model.rhs_into(t + 0.5 * h, &self.tmp, k3, hermitian);
        self.tmp.copy_from(x);
        add_scaled(&mut self.tmp, h, k3);
        model.rhs_into(t + h, &self.tmp, k4, hermitian);
        add_scaled(x, h / 6.0, k1);
        add_scaled(x, h / 3.0, k2);
        add_scaled(x, h / 3.0, k3);
        add_scaled(x, h / 6.0, k4);
    }

    /// Writes the fifth-order solution into `tmp` and returns the scaled
    /// error norm.
    fn dp_step(&mut self, x: &CMatrix, t: f64, h: f64, tol: (f64, f64), hermitian: bool) -> f64 {
        let (rtol, atol) = tol;
        for s in 0..7 {
            self.tmp.copy_from(x);
            for (j, &a) in DP_A[s].iter().enumerate().take(s) {
                if a != 0.0 {
                    add_scaled(&mut self.tmp, h * a, &self.stages[j]);
                }
            }
            self.model
                .rhs_into(t + DP_C[s] * h, &self.tmp, &mut self.stages[s], hermitian);
        }
        // Stage 7 was evaluated at the fifth-order solution, still in `tmp`.
        let mut err: f64 = 0.0;
        for idx in 0..x.len() {
            let e: Complex64 = DP_ERR
                .iter()
                .zip(&self.stages)
                .map(|(&w, k)| k[idx] * w)
                .sum::<Complex64>()
                * h;
            let scale = atol + rtol * x[idx].norm().max(self.tmp[idx].norm());
            err = err.max(e.norm() / scale);
        }
        err
    }
}

/// Integrates `rho0` from `t = 0` to `t_end`, recording observables at
/// `sample_times` (sorted, within `[0, t_end]`).
pub fn integrate(
    rho0: &DensityMatrix,
    model: &MasterEquation,
    cfg: &IntegrationConfig,
    sample_times: &[f64],
) -> Result<Trajectory> {
    let dim = model.hilbert().dim();
    if rho0.dim() != dim {
        return Err(Error::Dimension(format!(
            "initial state has dimension {}, model {dim}",
            rho0.dim()
        )));
    }
    if sample_times.windows(2).any(|w| w[1] < w[0])
        || sample_times
            .iter()
            .any(|&t| !(0.0..=cfg.t_end).contains(&t))
    {
        return Err(Error::Domain(
            "sample times must be sorted and inside [0, t_end]".into(),
        ));
    }
    let max_dt = std::f64::consts::TAU / model.max_frequency() / STEPS_PER_CYCLE;
    if cfg.method == Method::Rk4 && cfg.dt > max_dt * (1.0 + 1e-9) {
        return Err(Error::Integration {
            detail: format!(
                "dt = {} does not resolve frequency {}",
                cfg.dt,
                model.max_frequency()
            ),
            suggested_dt: max_dt,
        });
    }

    // Nodes of the final-period average: whole steps per period.
    let period = model.period();
    let average_nodes: Vec<f64> = if cfg.period_average {
        if cfg.t_end < period {
            return Err(Error::WindowTooShort {
                periods: cfg.t_end / period,
            });
        }
        let n = (period / cfg.dt).ceil().max(8.0) as usize;
        (0..n)
            .map(|k| cfg.t_end - period + k as f64 * period / n as f64)
            .collect()
    } else {
        Vec::new()
    };

    let ops = model.operators();
    let mut prop = Propagator::new(model, cfg);
    let mut diag = Diagnostics::default();
    let mut rho = rho0.matrix().clone();
    diag.record_eigen(&rho);
    let mut t = 0.0;
    let mut observables = Vec::with_capacity(sample_times.len());
    let mut averaged = Vec::with_capacity(average_nodes.len());
    let (mut si, mut ai) = (0, 0);
    loop {
        while si < sample_times.len() && sample_times[si] <= t {
            observables.push(Observables::measure(&rho, ops));
            diag.record_eigen(&rho);
            si += 1;
        }
        while ai < average_nodes.len() && average_nodes[ai] <= t {
            averaged.push(Observables::measure(&rho, ops));
            ai += 1;
        }
        let next = [
            sample_times.get(si),
            average_nodes.get(ai),
            Some(&cfg.t_end),
        ]
        .into_iter()
        .flatten()
        .copied()
        .fold(f64::INFINITY, f64::min);
        if next <= t || t >= cfg.t_end {
            break;
        }
        prop.advance(&mut rho, t, next, true, &mut diag)?;
        t = next;
    }
    diag.record_eigen(&rho);
    let period_average = (!averaged.is_empty()).then(|| mean(&averaged));
    Ok(Trajectory {
        times: sample_times.to_vec(),
        observables,
        period_average,
        final_state: DensityMatrix::from_raw(rho),
        diagnostics: diag,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{HilbertConfig, Probe};
    use crate::params::{DriveParams, MoleculeParams};

    fn vibron(big_gamma: f64) -> MasterEquation {
        let mol = MoleculeParams::new(0.0, 1.0, 0.01, 0.0, big_gamma).unwrap();
        let drive = DriveParams::undriven(1.0).unwrap();
        MasterEquation::new(
            &mol,
            &drive,
            Probe::off(),
            None,
            &HilbertConfig::new(4, 0).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(IntegrationConfig::new(0.0, 1.0).is_err());
        assert!(IntegrationConfig::new(0.1, -1.0).is_err());
        let c = IntegrationConfig::new(0.1, 10.0)
            .unwrap()
            .with_period_average(true);
        assert!(c.with_dt(0.05).unwrap().period_average());
        let auto = IntegrationConfig::auto(&vibron(0.1), 10.0).unwrap();
        assert!(auto.dt() <= std::f64::consts::TAU / 50.0);
        assert!(auto.t_end() >= 100.0);
    }

    #[test]
    fn excited_vibron_decays() {
        let model = vibron(0.05);
        let h = *model.hilbert();
        let rho0 = DensityMatrix::basis_state(&h, false, 1, 0).unwrap();
        let times: Vec<f64> = (0..=10).map(|k| k as f64 * 3.0).collect();
        for method in [
            Method::Rk4,
            Method::Adaptive {
                rtol: 1e-10,
                atol: 1e-12,
            },
        ] {
            let cfg = IntegrationConfig::new(0.02, 30.0)
                .unwrap()
                .with_method(method);
            let traj = integrate(&rho0, &model, &cfg, &times).unwrap();
            for (t, o) in traj.times.iter().zip(&traj.observables) {
                assert!(
                    (o.vib_occupation - (-0.1 * t).exp()).abs() < 1e-8,
                    "{method:?} t = {t}"
                );
            }
            assert!(traj.diagnostics.max_trace_drift < 1e-12);
            assert!(traj.diagnostics.min_eigenvalue > -1e-12);
        }
    }

    #[test]
    fn underresolved_step_rejected() {
        let model = vibron(0.05);
        let rho0 = DensityMatrix::ground(model.hilbert());
        let cfg = IntegrationConfig::new(0.5, 10.0).unwrap();
        assert!(matches!(
            integrate(&rho0, &model, &cfg, &[]),
            Err(Error::Integration { .. })
        ));
        let cfg = IntegrationConfig::new(0.01, 1.0).unwrap();
        assert!(integrate(&rho0, &model, &cfg, &[2.0]).is_err());
        let cfg = cfg.with_period_average(true);
        assert!(matches!(
            integrate(&rho0, &model, &cfg, &[]),
            Err(Error::WindowTooShort { .. })
        ));
    }
}
