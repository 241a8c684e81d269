//! Batch front end for `irfloquet-core`: a JSON run configuration in, a CSV
//! table and a JSON metadata sidecar out.

pub mod config;
pub mod modes;
pub mod presets;
pub mod table;

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

pub use config::{Mode, RunConfig};
pub use modes::ModeOutput;
pub use table::Table;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] irfloquet_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// Outcome of a run that produced its artifacts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// `validate` found a tolerance or hygiene breach.
    ValidationFailed,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::ValidationFailed => 2,
        }
    }
}

/// One table of a run; `label` is set for configs with variants.
#[derive(Debug, Clone)]
pub struct LabelledOutput {
    pub label: Option<String>,
    pub mode: Mode,
    pub output: ModeOutput,
}

#[derive(Debug, Clone)]
pub struct Bundle {
    pub config: RunConfig,
    pub outputs: Vec<LabelledOutput>,
}

impl Bundle {
    pub fn status(&self) -> Status {
        if self.outputs.iter().all(|o| o.output.passed) {
            Status::Ok
        } else {
            Status::ValidationFailed
        }
    }
}

/// Reads a config file; syntax errors and unknown keys are reported with
/// the file name, line and column.
pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    RunConfig::from_json(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Applies `key=value` overrides and an explicit mode to a config.
pub fn resolve(
    config: RunConfig,
    mode: Option<Mode>,
    overrides: &[String],
) -> Result<RunConfig, CliError> {
    let mut value = config.to_value();
    for text in overrides {
        let (key, v) = config::parse_override(text)?;
        config::set_path(&mut value, &key, v)?;
    }
    if let Some(mode) = mode {
        config::set_path(
            &mut value,
            "mode",
            serde_json::to_value(mode).expect("mode serialises"),
        )?;
    }
    let resolved = RunConfig::from_value(value)?;
    resolved.mode()?;
    Ok(resolved)
}

/// Runs every variant of a resolved config.
pub fn execute(config: &RunConfig) -> Result<Bundle, CliError> {
    let mut outputs = Vec::new();
    if config.variants.is_empty() {
        let mode = config.mode()?;
        outputs.push(LabelledOutput {
            label: None,
            mode,
            output: modes::run(config)?,
        });
    } else {
        let mut base = config.clone();
        base.variants.clear();
        let base = base.to_value();
        for variant in &config.variants {
            let mut value = base.clone();
            for (key, v) in &variant.set {
                config::set_path(&mut value, key, v.clone())?;
            }
            let cfg = RunConfig::from_value(value)
                .map_err(|e| CliError::Config(format!("variant `{}`: {e}", variant.label)))?;
            let mode = cfg.mode()?;
            let output = modes::run(&cfg)
                .map_err(|e| CliError::Config(format!("variant `{}`: {e}", variant.label)))?;
            outputs.push(LabelledOutput {
                label: Some(variant.label.clone()),
                mode,
                output,
            });
        }
    }
    Ok(Bundle {
        config: config.clone(),
        outputs,
    })
}

/// CSV path of one output: the base path itself, or `<stem>_<label>.csv`
/// next to it for variants.
pub fn table_path(base: &Path, label: Option<&str>) -> PathBuf {
    match label {
        None => base.to_path_buf(),
        Some(label) => {
            let stem = base
                .file_stem()
                .map_or_else(|| "out".into(), |s| s.to_string_lossy().into_owned());
            let safe: String = label
                .chars()
                .map(|c| {
                    if c.is_ascii_alphanumeric() || c == '-' || c == '.' {
                        c
                    } else {
                        '_'
                    }
                })
                .collect();
            base.with_file_name(format!("{stem}_{safe}.csv"))
        }
    }
}

/// Default CSV path: `--out`, then the config's `output`, then `<mode>.csv`.
pub fn output_path(config: &RunConfig, out: Option<&Path>) -> Result<PathBuf, CliError> {
    if let Some(p) = out {
        return Ok(p.to_path_buf());
    }
    if let Some(p) = &config.output {
        return Ok(PathBuf::from(p));
    }
    Ok(PathBuf::from(format!("{}.csv", config.mode()?.name())))
}

/// Metadata sidecar: tool version, the resolved config (which re-parses and
/// reproduces the run), and per-table cutoffs, warnings and diagnostics.
pub fn sidecar(bundle: &Bundle, files: &[PathBuf]) -> Value {
    let runs: Vec<Value> = bundle
        .outputs
        .iter()
        .zip(files)
        .map(|(o, file)| {
            let mut run = Map::new();
            if let Some(label) = &o.label {
                run.insert("label".into(), json!(label));
            }
            run.insert("mode".into(), json!(o.mode.name()));
            run.insert(
                "file".into(),
                json!(file.file_name().map(|f| f.to_string_lossy().into_owned())),
            );
            run.insert("columns".into(), json!(o.output.table.columns));
            run.insert("rows".into(), json!(o.output.table.rows.len()));
            run.extend(o.output.meta.clone());
            Value::Object(run)
        })
        .collect();
    json!({
        "tool": {"name": "irfloquet", "version": env!("CARGO_PKG_VERSION")},
        "status": match bundle.status() {
            Status::Ok => "ok",
            Status::ValidationFailed => "validation-failed",
        },
        "config": bundle.config.to_value(),
        "runs": runs,
    })
}

/// Writes every table and the sidecar (`<base>.json`). Returns the files
/// written, sidecar last.
pub fn write_bundle(bundle: &Bundle, base: &Path) -> Result<Vec<PathBuf>, CliError> {
    let io = |path: &Path| {
        let path = path.display().to_string();
        move |source| CliError::Io { path, source }
    };
    if let Some(dir) = base.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io(dir))?;
    }
    let mut files = Vec::new();
    for o in &bundle.outputs {
        let path = table_path(base, o.label.as_deref());
        fs::write(&path, o.output.table.to_csv()).map_err(io(&path))?;
        files.push(path);
    }
    let meta = sidecar(bundle, &files);
    let side = base.with_extension("json");
    let mut text = serde_json::to_string_pretty(&meta).expect("metadata serialises");
    text.push('\n');
    fs::write(&side, text).map_err(io(&side))?;
    files.push(side);
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variant_paths() {
        let base = Path::new("out/fig3a.csv");
        assert_eq!(table_path(base, None), PathBuf::from("out/fig3a.csv"));
        assert_eq!(
            table_path(base, Some("omega_d=0.5")),
            PathBuf::from("out/fig3a_omega_d_0.5.csv")
        );
    }

    #[test]
    fn resolve_requires_mode() {
        let cfg = RunConfig::from_json("{}").unwrap();
        assert!(resolve(cfg.clone(), None, &[]).is_err());
        let cfg = resolve(cfg, Some(Mode::Sumrule), &["output=\"x.csv\"".into()]).unwrap();
        assert_eq!(cfg.mode, Some(Mode::Sumrule));
        assert_eq!(cfg.output.as_deref(), Some("x.csv"));
    }
}
