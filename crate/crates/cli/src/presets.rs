//! Named parameter presets. Frequencies are in units of `nu`.

use serde_json::{json, Value};

use crate::{CliError, RunConfig};

pub const PRESETS: [&str; 7] = [
    "fig2c", "fig3a", "fig3b", "fig4b", "fig4d", "fig5a", "fig5b",
];

/// Radiative rate of the fig3* and fig4* presets: `Gamma = 0.1 = 50 gamma`.
const GAMMA_FIG3: f64 = 0.1 / 50.0;
const BIG_GAMMA_FIG3: f64 = 0.1;
/// Radiative rate of the fig5* presets: `Gamma = 100 gamma`, `kappa = 600 gamma`.
const GAMMA_FIG5: f64 = 1e-4;

fn fig3(gamma_phi: f64) -> Value {
    json!({
        "mode": "spectrum",
        "molecule": {"lambda": 0.2, "nu": 1.0, "gamma": GAMMA_FIG3, "gamma_phi": gamma_phi, "big_gamma": BIG_GAMMA_FIG3},
        // |beta|^2 = 1/4 on resonance.
        "drive": {"eta_d": BIG_GAMMA_FIG3, "omega_d": 1.0},
        "probe": {"eta_p": 1e-2 * GAMMA_FIG3, "grid": {"start": -0.5, "stop": 3.5, "points": 8001}},
        "variants": [
            {"label": "omega_d=0.5", "set": {"mode": "spectrum-offres", "drive.omega_d": 0.5}},
            {"label": "omega_d=1", "set": {"drive.omega_d": 1.0}}
        ]
    })
}

fn fig4(scan: Value, variants: Value) -> Value {
    json!({
        "mode": "coherence",
        "molecule": {"lambda": 0.2, "nu": 1.0, "gamma": GAMMA_FIG3, "gamma_phi": 2.0 * GAMMA_FIG3, "big_gamma": BIG_GAMMA_FIG3},
        "drive": {"eta_d": BIG_GAMMA_FIG3, "omega_d": 1.0},
        "probe": {"eta_p": 0.1 * GAMMA_FIG3},
        "coherence": {"delta_p": 1.0, "regime": "resonant"},
        "scan": scan,
        "variants": variants
    })
}

fn fig5_molecule(big_gamma: f64) -> Value {
    json!({"lambda": 0.2, "nu": 1.0, "gamma": GAMMA_FIG5, "gamma_phi": 0.0, "big_gamma": big_gamma})
}

/// A preset as a runnable config.
pub fn preset(name: &str) -> Result<RunConfig, CliError> {
    let value = match name {
        "fig2c" => json!({
            "mode": "quasienergies",
            // x = 2 lambda eta_d / omega_d = eta_d.
            "molecule": {"lambda": 0.5, "nu": 1.0, "gamma": GAMMA_FIG3, "big_gamma": BIG_GAMMA_FIG3},
            "drive": {"eta_d": 0.0, "omega_d": 1.0},
            "quasienergies": {"m_max": 3},
            "scan": {"key": "drive.eta_d", "grid": {"start": 0.0, "stop": 10.0, "points": 201}}
        }),
        "fig3a" => fig3(0.0),
        "fig3b" => fig3(5.0 * GAMMA_FIG3),
        "fig4b" => fig4(
            json!({"key": "molecule.gamma_phi", "grid": {"start": 1e-4, "stop": 1.0, "points": 41, "spacing": "log"}}),
            json!(
                ([0.25, 0.5, 1.0].map(|f| json!({
                    "label": format!("eta_d={}", f * BIG_GAMMA_FIG3),
                    "set": {"drive.eta_d": f * BIG_GAMMA_FIG3}
                })))
            ),
        ),
        "fig4d" => fig4(
            // 2 lambda eta_d / omega_d from 0 to 0.5.
            json!({"key": "drive.eta_d", "grid": {"start": 0.0, "stop": 1.25, "points": 26}}),
            json!(
                ([0.0, 2.0, 10.0, 50.0].map(|f| json!({
                    "label": format!("gamma_phi={}", f * GAMMA_FIG3),
                    "set": {"molecule.gamma_phi": f * GAMMA_FIG3}
                })))
            ),
        ),
        "fig5a" => {
            let kappa = 0.01;
            json!({
                "mode": "susceptibility",
                "molecule": fig5_molecule(kappa),
                "cavity": {"g": kappa, "kappa": kappa, "omega_c": 1.0, "eta_d_c": 0.0},
                "variants": ([0.5, 1.0, 2.0, 4.0].map(|f| json!({
                    "label": format!("g={}", f * kappa),
                    "set": {"cavity.g": f * kappa}
                })))
            })
        }
        "fig5b" => {
            let big_gamma = 0.01;
            let kappa = 0.06;
            json!({
                "mode": "cavity-spectrum",
                "molecule": fig5_molecule(big_gamma),
                "drive": {"eta_d": 0.0, "omega_d": 1.0},
                "probe": {"eta_p": 0.1 * GAMMA_FIG5, "grid": {"start": -0.2, "stop": 1.5, "points": 6801}},
                "cavity": {"g": (kappa * big_gamma).sqrt(), "kappa": kappa, "omega_c": 1.0, "eta_d_c": 0.8 * kappa},
                // Weak coupling: g = sqrt(C kappa Gamma) stays below kappa.
                "variants": ([0.5, 2.0, 5.0].map(|c: f64| json!({
                    "label": format!("C={c}"),
                    "set": {"cavity.g": (c * kappa * big_gamma).sqrt()}
                })))
            })
        }
        _ => {
            return Err(CliError::Config(format!(
                "unknown preset `{name}` (expected one of {})",
                PRESETS.join(", ")
            )))
        }
    };
    RunConfig::from_value(value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_presets_parse() {
        for name in PRESETS {
            let cfg = preset(name).unwrap();
            assert!(cfg.mode.is_some(), "{name}");
        }
        assert!(preset("fig6").is_err());
    }

    #[test]
    fn preset_ratios() {
        let cfg = preset("fig3a").unwrap();
        let m = cfg.molecule().unwrap();
        assert!((m.big_gamma() / m.gamma() - 50.0).abs() < 1e-12);
        assert!((cfg.eta_p().unwrap() / m.gamma() - 1e-2).abs() < 1e-12);
        assert!((m.lambda() - 0.2).abs() < 1e-15);

        let cfg = preset("fig4b").unwrap();
        let m = cfg.molecule().unwrap();
        assert!((m.gamma_phi() / m.gamma() - 2.0).abs() < 1e-12);
        assert!((cfg.eta_p().unwrap() / m.gamma() - 0.1).abs() < 1e-12);

        let cfg = preset("fig5b").unwrap();
        let (m, c) = (cfg.molecule().unwrap(), cfg.require_cavity().unwrap());
        assert!((m.big_gamma() / m.gamma() - 100.0).abs() < 1e-9);
        assert!((c.kappa() / m.gamma() - 600.0).abs() < 1e-9);
        assert!((c.eta_d_c() / c.kappa() - 0.8).abs() < 1e-12);
        assert!(cfg
            .variants
            .iter()
            .all(|v| v.set["cavity.g"].as_f64().unwrap() < c.kappa()));
    }
}
