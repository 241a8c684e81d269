use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use irfloquet_cli::{
    execute, load_config, output_path, presets, resolve, write_bundle, CliError, Mode, Status,
};

/// Floquet-dressed vibronic spectra, coherence and cavity scans.
///
/// `irfloquet <mode> --config run.json` runs a configuration;
/// `irfloquet preset <name>` runs a named preset.
#[derive(Parser)]
#[command(name = "irfloquet", version)]
struct Args {
    /// spectrum, spectrum-offres, cavity-spectrum, coherence, susceptibility,
    /// quasienergies, oracle, validate, sumrule, or `preset`
    mode: String,
    /// Preset name (fig2c, fig3a, fig3b, fig4b, fig4d, fig5a, fig5b)
    preset: Option<String>,
    /// JSON run configuration
    #[arg(long)]
    config: Option<PathBuf>,
    /// Worker threads (default: available cores)
    #[arg(long)]
    threads: Option<usize>,
    /// CSV output path; the metadata sidecar gets the `.json` extension
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override a config value by dotted path, e.g. molecule.lambda=0.3
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Print the resolved configuration instead of running it
    #[arg(long)]
    print_config: bool,
}

fn run(args: Args) -> Result<Status, CliError> {
    let (config, mode) = if args.mode == "preset" {
        let name = args
            .preset
            .as_deref()
            .ok_or_else(|| CliError::Config("`preset` needs a preset name".into()))?;
        if args.config.is_some() {
            return Err(CliError::Config(
                "`--config` cannot be combined with a preset".into(),
            ));
        }
        (presets::preset(name)?, None)
    } else {
        let mode: Mode = args.mode.parse()?;
        if let Some(extra) = &args.preset {
            return Err(CliError::Config(format!("unexpected argument `{extra}`")));
        }
        let path = args
            .config
            .as_deref()
            .ok_or_else(|| CliError::Config(format!("mode `{}` needs --config", mode.name())))?;
        (load_config(path)?, Some(mode))
    };
    let config = resolve(config, mode, &args.overrides)?;
    if args.print_config {
        println!(
            "{}",
            serde_json::to_string_pretty(&config.to_value()).expect("config serialises")
        );
        return Ok(Status::Ok);
    }

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Config(format!("cannot start worker threads: {e}")))?;
    let bundle = pool.install(|| execute(&config))?;
    let base = output_path(&config, args.out.as_deref())?;
    for file in write_bundle(&bundle, &base)? {
        println!("{}", file.display());
    }
    Ok(bundle.status())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = match Args::try_parse() {
        Ok(args) => args,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    match run(args) {
        Ok(status) => ExitCode::from(status.exit_code() as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
