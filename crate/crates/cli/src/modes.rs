//! One function per mode: evaluate the configured quantity on its grid and
//! describe how it was computed.

use rayon::prelude::*;
use serde_json::{json, Map, Value};

use irfloquet_core::cavity::{
    beta_c, cooperativity, effective_drive_z, eps_m_eff, gamma_eff, scan_grid,
};
use irfloquet_core::dynamics::{
    avg_coherence, sigma_trajectory, steady_beta, steady_mean_coherence,
};
use irfloquet_core::fit::local_maxima;
use irfloquet_core::oracle::{steady_state, Diagnostics, MasterEquation, Probe, SteadyState};
use irfloquet_core::specfun::series_cutoffs;
use irfloquet_core::spectra::{
    floquet_quasienergies, sum_rule_residual, SpectrumMeta, SpectrumModel,
};
use irfloquet_core::Warning;

use crate::config::{self, Mode, RunConfig};
use crate::table::{Cell, Table};
use crate::CliError;

/// Hygiene bounds every oracle run must meet.
pub const MAX_TRACE_DRIFT: f64 = 1e-8;
pub const MAX_HERMITICITY_DEFECT: f64 = 1e-10;
pub const MIN_EIGENVALUE: f64 = -1e-6;

#[derive(Debug, Clone)]
pub struct ModeOutput {
    pub table: Table,
    /// Cutoffs, warnings and diagnostics for the sidecar.
    pub meta: Map<String, Value>,
    /// False only when `validate` breaches its tolerance or hygiene bounds.
    pub passed: bool,
}

impl ModeOutput {
    fn new(table: Table, meta: Map<String, Value>) -> Self {
        Self {
            table,
            meta,
            passed: true,
        }
    }
}

pub fn run(cfg: &RunConfig) -> Result<ModeOutput, CliError> {
    let mode = cfg.mode()?;
    if cfg.scan.is_some() && !matches!(mode, Mode::Coherence | Mode::Quasienergies | Mode::Sumrule)
    {
        return Err(CliError::Config(format!(
            "mode `{}` does not support `scan`",
            mode.name()
        )));
    }
    match mode {
        Mode::Spectrum | Mode::SpectrumOffres | Mode::CavitySpectrum => spectrum(cfg, mode),
        Mode::Coherence => coherence(cfg),
        Mode::Susceptibility => susceptibility(cfg),
        Mode::Quasienergies => quasienergies(cfg),
        Mode::Sumrule => sumrule(cfg),
        Mode::Oracle => oracle(cfg),
        Mode::Validate => validate(cfg),
    }
}

fn warnings_json(warnings: &[Warning]) -> Value {
    Value::Array(
        warnings
            .iter()
            .map(|w| Value::String(w.to_string()))
            .collect(),
    )
}

fn log_warnings(warnings: &[Warning]) {
    for w in warnings {
        log::warn!("{w}");
    }
}

fn spectrum_meta(meta: &SpectrumMeta<f64>, total_weight: f64) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert(
        "cutoffs".into(),
        json!({"n_cut": meta.cutoffs.n_cut, "m_cut": meta.cutoffs.m_cut, "l_cut": meta.cutoffs.l_cut}),
    );
    m.insert("drive_index".into(), json!(meta.drive_index));
    m.insert("occupation_index".into(), json!(meta.occupation_index));
    m.insert("occupation".into(), json!(meta.occupation));
    m.insert("sideband_damping".into(), json!(meta.sideband_damping));
    m.insert("total_weight".into(), json!(total_weight));
    m.insert("warnings".into(), warnings_json(&meta.warnings));
    m
}

/// Closed-form model behind the three spectrum modes.
fn analytic_model(
    cfg: &RunConfig,
    mode: Mode,
) -> Result<(SpectrumModel<f64>, Map<String, Value>), CliError> {
    let mol = cfg.molecule()?;
    let policy = cfg.policy()?;
    let eta_p = cfg.eta_p()?;
    let drive = cfg.drive()?;
    let mut extra = Map::new();
    let model = match mode {
        Mode::Spectrum => SpectrumModel::resonant(&mol, &drive, eta_p, &policy)?,
        Mode::SpectrumOffres => SpectrumModel::off_resonant(&mol, &drive, eta_p, &policy)?,
        Mode::CavitySpectrum => {
            let cav = cfg.require_cavity()?;
            if drive.eta_d() != 0.0 {
                return Err(CliError::Config(
                    "cavity-spectrum drives through the cavity; set drive.eta_d to 0 and use cavity.eta_d_c".into(),
                ));
            }
            let occ = beta_c(&mol, &cav, drive.omega_d())?.value;
            extra.insert("cooperativity".into(), json!(cooperativity(&mol, &cav)?));
            extra.insert("gamma_eff".into(), json!(gamma_eff(&mol, &cav)));
            extra.insert(
                "drive_index_z".into(),
                json!(effective_drive_z(&mol, &cav, drive.omega_d())?),
            );
            extra.insert("purcell_estimate".into(), json!(occ.purcell_estimate));
            extra.insert("resonant_estimate".into(), json!(occ.resonant_estimate));
            SpectrumModel::cavity(&mol, &cav, drive.omega_d(), eta_p, &policy)?
        }
        _ => unreachable!("not a spectrum mode"),
    };
    Ok((model, extra))
}

fn spectrum(cfg: &RunConfig, mode: Mode) -> Result<ModeOutput, CliError> {
    let probe = cfg.probe()?;
    let (model, extra) = analytic_model(cfg, mode)?;
    log_warnings(&model.meta().warnings);
    let values: Vec<f64> = probe
        .detunings()
        .par_iter()
        .map(|&d| model.evaluate(d))
        .collect();
    let mut table = Table::new(["delta_p", "S_analytic"]);
    for (&d, &s) in probe.detunings().iter().zip(&values) {
        table.push(vec![d.into(), s.into()]);
    }
    let mut meta = spectrum_meta(model.meta(), model.total_weight());
    meta.extend(extra);
    Ok(ModeOutput::new(table, meta))
}

/// Scan key and one config per grid value.
type ScanPoints = (String, Vec<(f64, RunConfig)>);

/// Copies of the config with the scan key set to each grid value.
fn scan_points(cfg: &RunConfig) -> Result<Option<ScanPoints>, CliError> {
    let Some(scan) = &cfg.scan else {
        return Ok(None);
    };
    let mut base = cfg.clone();
    base.scan = None;
    let base = base.to_value();
    let points = scan
        .grid
        .values()?
        .into_iter()
        .map(|v| {
            let mut value = base.clone();
            config::set_path(&mut value, &scan.key, json!(v))?;
            let point = RunConfig::from_value(value)
                .map_err(|e| CliError::Config(format!("scan key `{}`: {e}", scan.key)))?;
            Ok((v, point))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(Some((scan.key.clone(), points)))
}

fn coherence(cfg: &RunConfig) -> Result<ModeOutput, CliError> {
    let policy = cfg.policy()?;
    let eta_p = cfg.eta_p()?;
    if let Some((key, points)) = scan_points(cfg)? {
        let rows = points
            .par_iter()
            .map(|(v, point)| {
                let mol = point.molecule()?;
                let drive = point.drive()?;
                let (section, regime) = point.coherence()?;
                let driven =
                    steady_mean_coherence(&mol, &drive, eta_p, section.delta_p, regime, &policy)?;
                let bare = steady_mean_coherence(
                    &mol,
                    &drive.with_eta_d(0.0)?,
                    eta_p,
                    section.delta_p,
                    regime,
                    &policy,
                )?;
                Ok((*v, driven, bare.value))
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        let mut table = Table::new([key.as_str(), "c_bar", "c_bar_bare", "ratio"]);
        let mut warnings = Vec::new();
        for (v, driven, bare) in rows {
            table.push(vec![
                v.into(),
                driven.value.into(),
                bare.into(),
                (driven.value / bare).into(),
            ]);
            for w in driven.warnings {
                if !warnings.contains(&w) {
                    warnings.push(w);
                }
            }
        }
        log_warnings(&warnings);
        let mut meta = Map::new();
        meta.insert("warnings".into(), warnings_json(&warnings));
        return Ok(ModeOutput::new(table, meta));
    }

    let mol = cfg.molecule()?;
    let drive = cfg.drive()?;
    let (section, regime) = cfg.coherence()?;
    let times = section
        .times
        .as_ref()
        .ok_or_else(|| {
            CliError::Config("coherence needs `coherence.times` unless a scan is given".into())
        })?
        .values()?;
    let trace = sigma_trajectory(
        &times,
        &mol,
        &drive,
        eta_p,
        section.delta_p,
        regime,
        &policy,
    )?;
    log_warnings(&trace.warnings);
    let mut table = Table::new(["t", "re_sigma", "im_sigma", "coherence"]);
    for ((t, s), c) in trace
        .value
        .times
        .iter()
        .zip(&trace.value.sigma_expect)
        .zip(&trace.value.coherence)
    {
        table.push(vec![(*t).into(), s.re.into(), s.im.into(), (*c).into()]);
    }
    let mut meta = Map::new();
    meta.insert(
        "c_bar".into(),
        json!(avg_coherence(&trace.value, &mol, &drive).ok()),
    );
    meta.insert("warnings".into(), warnings_json(&trace.warnings));
    Ok(ModeOutput::new(table, meta))
}

fn susceptibility(cfg: &RunConfig) -> Result<ModeOutput, CliError> {
    let mol = cfg.molecule()?;
    let cav = cfg.require_cavity()?;
    let omegas = match &cfg.susceptibility {
        Some(grid) => grid.values()?,
        None => {
            let reach = 4.0 * (cav.g() + cav.kappa() + mol.big_gamma());
            let lo = (cav.omega_c() - reach).max(0.01 * cav.omega_c());
            scan_grid(&cav, lo, cav.omega_c() + reach)
        }
    };
    let values = omegas
        .par_iter()
        .map(|&w| Ok(eps_m_eff(w, &mol, &cav)?.norm_sqr()))
        .collect::<Result<Vec<f64>, CliError>>()?;
    let peaks: Vec<f64> = local_maxima(&omegas, &values)
        .into_iter()
        .map(|p| p.position)
        .collect();
    let mut table = Table::new(["omega", "abs_eps_m_eff_sq"]);
    for (&w, &v) in omegas.iter().zip(&values) {
        table.push(vec![w.into(), v.into()]);
    }
    let mut meta = Map::new();
    meta.insert("peaks".into(), json!(peaks));
    let splitting = (peaks.len() == 2).then(|| peaks[1] - peaks[0]);
    meta.insert("splitting".into(), json!(splitting));
    meta.insert(
        "cooperativity".into(),
        json!(cooperativity(&mol, &cav).ok()),
    );
    Ok(ModeOutput::new(table, meta))
}

fn quasienergies(cfg: &RunConfig) -> Result<ModeOutput, CliError> {
    let m_max = cfg.m_max();
    // (x, [(m, offset, weight)]) for one config.
    type Rows = (f64, Vec<(i64, f64, f64)>);
    let rows_for = |point: &RunConfig| -> Result<Rows, CliError> {
        let mol = point.molecule()?;
        let drive = point.drive()?;
        let table = floquet_quasienergies(mol.lambda(), &drive, m_max)?;
        let rows = table
            .rows
            .iter()
            .map(|q| (q.m, q.offset, q.weight))
            .collect();
        Ok((drive.modulation_index(&mol), rows))
    };
    let mut meta = Map::new();
    meta.insert("m_max".into(), json!(m_max));
    if let Some((key, points)) = scan_points(cfg)? {
        let results = points
            .par_iter()
            .map(|(v, point)| rows_for(point).map(|r| (*v, r)))
            .collect::<Result<Vec<_>, CliError>>()?;
        let mut table = Table::new([key.as_str(), "x", "m", "offset", "weight"]);
        for (v, (x, rows)) in results {
            for (m, offset, weight) in rows {
                table.push(vec![
                    v.into(),
                    x.into(),
                    m.into(),
                    offset.into(),
                    weight.into(),
                ]);
            }
        }
        return Ok(ModeOutput::new(table, meta));
    }
    let (x, rows) = rows_for(cfg)?;
    let mut table = Table::new(["m", "offset", "weight"]);
    for (m, offset, weight) in rows {
        table.push(vec![m.into(), offset.into(), weight.into()]);
    }
    meta.insert("x".into(), json!(x));
    Ok(ModeOutput::new(table, meta))
}

fn sumrule(cfg: &RunConfig) -> Result<ModeOutput, CliError> {
    let policy = cfg.policy()?;
    let row_for = |point: &RunConfig| -> Result<(Vec<Cell>, Vec<Warning>), CliError> {
        let mol = point.molecule()?;
        let drive = point.drive()?;
        let beta = steady_beta(&mol, &drive)?.magnitude();
        let x = drive.modulation_index(&mol);
        let y = 2.0 * mol.lambda() * beta;
        let cut = series_cutoffs(mol.lambda(), x, y, &policy)?;
        let residual = sum_rule_residual(mol.lambda(), &drive, beta, &policy)?;
        let c = cut.value;
        Ok((
            vec![
                x.into(),
                y.into(),
                c.n_cut.into(),
                c.m_cut.into(),
                c.l_cut.into(),
                residual.into(),
            ],
            cut.warnings,
        ))
    };
    let columns = ["x", "y", "n_cut", "m_cut", "l_cut", "residual"];
    let mut warnings = Vec::new();
    let table = if let Some((key, points)) = scan_points(cfg)? {
        let rows = points
            .par_iter()
            .map(|(v, point)| row_for(point).map(|r| (*v, r)))
            .collect::<Result<Vec<_>, CliError>>()?;
        let mut table = Table::new(std::iter::once(key.as_str()).chain(columns));
        for (v, (row, w)) in rows {
            table.push(std::iter::once(Cell::from(v)).chain(row).collect());
            warnings.extend(
                w.into_iter()
                    .filter(|w| !warnings.contains(w))
                    .collect::<Vec<_>>(),
            );
        }
        table
    } else {
        let (row, w) = row_for(cfg)?;
        warnings = w;
        let mut table = Table::new(columns);
        table.push(row);
        table
    };
    log_warnings(&warnings);
    let mut meta = Map::new();
    meta.insert("eps_series".into(), json!(policy.eps_series()));
    meta.insert("warnings".into(), warnings_json(&warnings));
    Ok(ModeOutput::new(table, meta))
}

struct OracleRuns {
    detunings: Vec<f64>,
    states: Vec<SteadyState>,
    meta: Map<String, Value>,
}

/// Oracle steady states on the probe grid, one independent run per point.
fn oracle_runs(cfg: &RunConfig) -> Result<OracleRuns, CliError> {
    let mol = cfg.molecule()?;
    let drive = cfg.drive()?;
    let probe = cfg.probe()?;
    let cav = cfg.cavity()?;
    let hilbert = cfg.hilbert()?;
    let runs = probe
        .detunings()
        .par_iter()
        .map(|&delta| {
            let model = MasterEquation::new(
                &mol,
                &drive,
                Probe::new(probe.eta_p(), delta)?,
                cav.as_ref(),
                &hilbert,
            )?;
            let integration = cfg.integration(&model)?;
            Ok((steady_state(&model, &integration)?, integration))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut diag = Diagnostics::default();
    for (s, _) in &runs {
        diag.merge(&s.diagnostics);
    }
    let mut meta = Map::new();
    meta.insert(
        "hilbert".into(),
        json!({"n_vib": hilbert.n_vib(), "n_cav": hilbert.n_cav(), "dim": hilbert.dim(), "rotating_frame": hilbert.rotating_frame()}),
    );
    if let Some((_, first)) = runs.first() {
        meta.insert("dt".into(), json!(first.dt()));
        meta.insert("t_end".into(), json!(first.t_end()));
    }
    meta.insert("diagnostics".into(), diagnostics_json(&diag));
    let states = runs.into_iter().map(|(s, _)| s).collect();
    Ok(OracleRuns {
        detunings: probe.detunings().to_vec(),
        states,
        meta,
    })
}

pub fn hygiene_ok(diag: &Diagnostics) -> bool {
    diag.max_trace_drift < MAX_TRACE_DRIFT
        && diag.max_hermiticity_defect < MAX_HERMITICITY_DEFECT
        && diag.min_eigenvalue > MIN_EIGENVALUE
}

fn diagnostics_json(diag: &Diagnostics) -> Value {
    json!({
        "max_trace_drift": diag.max_trace_drift,
        "max_hermiticity_defect": diag.max_hermiticity_defect,
        "min_eigenvalue": diag.min_eigenvalue,
        "steps": diag.steps,
        "hygiene_ok": hygiene_ok(diag),
    })
}

fn oracle(cfg: &RunConfig) -> Result<ModeOutput, CliError> {
    let OracleRuns {
        detunings,
        states,
        meta,
    } = oracle_runs(cfg)?;
    let with_cavity = states
        .first()
        .is_some_and(|s| s.averages.cav_occupation.is_some());
    let mut columns = vec!["delta_p", "S_oracle", "vib_occupation"];
    if with_cavity {
        columns.push("cav_occupation");
    }
    let mut table = Table::new(columns);
    for (&d, s) in detunings.iter().zip(&states) {
        let mut row = vec![
            d.into(),
            s.averages.population.into(),
            s.averages.vib_occupation.into(),
        ];
        row.extend(s.averages.cav_occupation.map(Cell::from));
        table.push(row);
    }
    Ok(ModeOutput::new(table, meta))
}

/// Oracle against the closed form on the same grid: the resonant spectrum,
/// or the cavity spectrum when a cavity section is present.
fn validate(cfg: &RunConfig) -> Result<ModeOutput, CliError> {
    let analytic_mode = if cfg.cavity.is_some() {
        Mode::CavitySpectrum
    } else {
        Mode::Spectrum
    };
    let (model, _) = analytic_model(cfg, analytic_mode)?;
    let OracleRuns {
        detunings,
        states,
        mut meta,
    } = oracle_runs(cfg)?;
    let mut table = Table::new(["delta_p", "S_analytic", "S_oracle", "rel_err"]);
    let mut max_rel = 0.0f64;
    for (&d, s) in detunings.iter().zip(&states) {
        let analytic = model.evaluate(d);
        let oracle = s.averages.population;
        let rel = ((oracle - analytic) / analytic).abs();
        max_rel = max_rel.max(rel);
        table.push(vec![d.into(), analytic.into(), oracle.into(), rel.into()]);
    }
    let tolerance = cfg.tolerance();
    let hygiene = meta["diagnostics"]["hygiene_ok"].as_bool().unwrap_or(false);
    let passed = max_rel < tolerance && hygiene;
    if !passed {
        log::warn!("validation failed: max rel_err {max_rel:.3e} (tolerance {tolerance}), hygiene ok: {hygiene}");
    }
    meta.insert("analytic".into(), json!(analytic_mode.name()));
    meta.insert("max_rel_err".into(), json!(max_rel));
    meta.insert("tolerance".into(), json!(tolerance));
    meta.insert("passed".into(), json!(passed));
    meta.insert("warnings".into(), warnings_json(&model.meta().warnings));
    Ok(ModeOutput {
        table,
        meta,
        passed,
    })
}
