//! Built-in scenario presets and the listing table.
//!
//! Shared baseline: counter-accelerating passive modes of a mass `0.1`
//! field, envelope width `L = 2`, central frequency `Omega0 ~ 5`
//! (`sqrt(25.01)`), vacuum input, zero wedge separation, natural logs. Each
//! preset overrides the pieces its dataset sweeps.

use crate::config::{
    AxisName, AxisScale, BaseChoice, GeometryConfig, InputStateConfig, OrientationChoice, Preset,
    ScenarioConfig, SweepAxis,
};

fn baseline(scenario: Preset) -> ScenarioConfig {
    ScenarioConfig {
        scenario,
        mass: 0.1,
        a_conv: 1.0,
        mbar: 1.0,
        log_base: BaseChoice::Natural,
        mode_kind: Default::default(),
        fixed_span: None,
        output_path: None,
        cache_dir: None,
        geometry: GeometryConfig {
            orientation: OrientationChoice::Counter,
            separation: 0.0,
            accel_i: 0.1,
            accel_ii: 0.1,
        },
        input_state: InputStateConfig::Vacuum,
        modes: Default::default(),
        sweep: Vec::new(),
        tolerances: Default::default(),
    }
}

fn lin(name: AxisName, min: f64, max: f64, points: usize) -> SweepAxis {
    SweepAxis {
        name,
        min,
        max,
        points,
        scale: AxisScale::Lin,
    }
}

/// The built-in preset configurations.
pub fn preset_config(preset: Preset) -> Option<ScenarioConfig> {
    let mut cfg = baseline(preset);
    match preset {
        Preset::Fig4 => {
            cfg.sweep = vec![
                lin(AxisName::AccelI, 0.02, 0.1, 6),
                lin(AxisName::AccelII, 0.02, 0.1, 6),
            ];
        }
        Preset::Fig5 => {
            cfg.sweep = vec![
                lin(AxisName::Length, 1.0, 4.0, 6),
                lin(AxisName::Omega0, 2.0, 8.0, 6),
            ];
        }
        Preset::Fig6 => {
            cfg.sweep = vec![lin(AxisName::Separation, -2.0, 28.0, 16)];
        }
        Preset::Fig7 => {
            cfg.fixed_span = Some(20.0);
            cfg.sweep = vec![lin(AxisName::Accel, 0.08, 0.24, 9)];
        }
        Preset::Fig8 => {
            cfg.input_state = InputStateConfig::SqueezedThermal { r: 0.0, n: 0.0 };
            cfg.sweep = vec![lin(AxisName::R, 0.0, 2.0, 5), lin(AxisName::N, 0.0, 2.0, 5)];
        }
        Preset::Fig9 => {
            cfg.input_state = InputStateConfig::SqueezedThermal { r: 0.0, n: 0.2 };
            cfg.sweep = vec![
                lin(AxisName::R, 0.0, 1.5, 4),
                lin(AxisName::Accel, 0.02, 0.2, 7),
            ];
        }
        Preset::Fig10 => {
            cfg.sweep = vec![lin(AxisName::Accel, 0.02, 0.2, 10)];
        }
        Preset::Fig12 => {
            cfg.log_base = BaseChoice::Two;
            cfg.sweep = vec![lin(AxisName::Accel, 0.02, 0.2, 10)];
        }
        Preset::Custom => return None,
    }
    Some(cfg)
}

/// All built-in presets in listing order.
pub fn all_presets() -> [Preset; 8] {
    [
        Preset::Fig4,
        Preset::Fig5,
        Preset::Fig6,
        Preset::Fig7,
        Preset::Fig8,
        Preset::Fig9,
        Preset::Fig10,
        Preset::Fig12,
    ]
}

fn describe(preset: Preset) -> &'static str {
    match preset {
        Preset::Fig4 => {
            "log negativity of the vacuum over both proper accelerations at D = 0; \
             L = 2, Omega0 ~ 5, m = 0.1"
        }
        Preset::Fig5 => {
            "log negativity of the vacuum over envelope width L and central frequency \
             Omega0 at accel 0.1, D = 0 (axis bounds approximate, bracketing L = 2 and \
             Omega0 ~ 5)"
        }
        Preset::Fig6 => {
            "log negativity of the vacuum versus wedge separation D at accel 0.1; \
             covers the entanglement sudden death at finite D > 0"
        }
        Preset::Fig7 => {
            "log negativity of the vacuum versus acceleration with the center-to-center \
             span pinned to 20 (D = 20 - 2/accel)"
        }
        Preset::Fig8 => {
            "fidelity of squeezed thermal states over (r, n) at accel 0.1, D = 0; \
             overlap alpha target 0.985 with beta ~ 4.5e-11 for both wedges"
        }
        Preset::Fig9 => {
            "fidelity of squeezed thermal states versus acceleration for several \
             squeezing values at n = 0.2, D = 0"
        }
        Preset::Fig10 => {
            "single-mode reduction invariants: transmissivity tau and noise \
             coefficient (1 - tau)(2 nbar + 1) versus acceleration"
        }
        Preset::Fig12 => {
            "classical (mbar = 1) and quantum capacity lower bounds versus \
             acceleration, base-2 logs"
        }
        Preset::Custom => "user-supplied configuration",
    }
}

fn sweep_summary(cfg: &ScenarioConfig) -> String {
    if cfg.sweep.is_empty() {
        return "single point".to_string();
    }
    cfg.sweep
        .iter()
        .map(|axis| {
            format!(
                "{} {:?} {}..{} x{}",
                axis.name.name(),
                axis.scale,
                axis.min,
                axis.max,
                axis.points
            )
        })
        .collect::<Vec<_>>()
        .join("; ")
        .to_lowercase()
}

/// Tab-separated preset listing; appends the custom scenario only when a
/// loaded config is supplied.
pub fn listing(custom: Option<&ScenarioConfig>) -> String {
    let mut out = String::from("name\tsweep\tdescription\n");
    for preset in all_presets() {
        let cfg = preset_config(preset).expect("built-in presets always resolve");
        out.push_str(&format!(
            "{}\t{}\t{}\n",
            preset.name(),
            sweep_summary(&cfg),
            describe(preset)
        ));
    }
    if let Some(cfg) = custom {
        out.push_str(&format!(
            "{}\t{}\tuser-supplied config: {:?} geometry, {} output modes\n",
            cfg.scenario.name(),
            sweep_summary(cfg),
            cfg.geometry.orientation,
            cfg.mode_kind,
        ));
    }
    out
}
