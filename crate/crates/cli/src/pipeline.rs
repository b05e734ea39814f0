//! From resolved sweep-point parameters to the Gaussian channel and its
//! per-point measures.
//!
//! One sweep point proceeds as: build the inertial input packets, build (or
//! project) the accelerated output modes, take their wedge spectra, form the
//! mode overlaps and the transfer matrix `M`, evaluate the thermal and
//! cross noise integrals into `N`, validate `(M, N)` as a channel, apply it
//! to the configured input state, and evaluate negativity, fidelity, the
//! single-mode invariants, and the capacity bounds.

use nalgebra::Vector4;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use rindler_core::bogoliubov::{mode_overlaps, transfer_matrix, MinkRindCoeff, OverlapCoeffs};
use rindler_core::channel::{
    canonical_form, classical_capacity_lb, quantum_capacity_lb, ChannelError, ChannelMatrices,
    GaussianState,
};
use rindler_core::measures::{log_negativity, uhlmann_fidelity, MeasureError};
use rindler_core::modes::{
    build_active_output_mode, build_input_mode, build_passive_output_mode, rindler_spectrum,
    ModeError, ModeKind, ModeParams, Region, RindlerSpectrum, WavePacket,
};
use rindler_core::noise::{
    build_noise_matrix, cross_counter, cross_parallel, unruh_diagonal, CrossNoise, Geometry,
    NoiseError,
};

use crate::config::{InputStateConfig, ModeSlot, OutputModeKind, ScenarioConfig};

/// Failures while evaluating one sweep point.
#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("mode construction: {0}")]
    Mode(#[from] ModeError),
    #[error("noise assembly: {0}")]
    Noise(#[from] NoiseError),
    #[error("channel validation: {0}")]
    Channel(#[from] ChannelError),
    #[error("measure evaluation: {0}")]
    Measure(#[from] MeasureError),
    #[error("cached payload does not reproduce a valid channel")]
    StaleCache,
}

/// Fully resolved physical parameters of one sweep point.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct GridPoint {
    pub index: usize,
    pub accel_i: f64,
    pub accel_ii: f64,
    pub separation: f64,
    /// `(length, omega0)` per packet slot.
    pub in_i: (f64, f64),
    pub in_ii: (f64, f64),
    pub out_i: (f64, f64),
    pub out_ii: (f64, f64),
    /// Input-state squeezing and occupation; NaN when not applicable.
    pub r: f64,
    pub n: f64,
}

impl GridPoint {
    /// Base point of a config before any sweep axis is applied.
    pub fn base(cfg: &ScenarioConfig) -> Self {
        let (r, n) = match cfg.input_state {
            InputStateConfig::Vacuum => (0.0, 0.0),
            InputStateConfig::SqueezedThermal { r, n } => (r, n),
            InputStateConfig::Coherent { .. } => (f64::NAN, f64::NAN),
        };
        GridPoint {
            index: 0,
            accel_i: cfg.geometry.accel_i,
            accel_ii: cfg.geometry.accel_ii,
            separation: cfg.geometry.separation,
            in_i: cfg.modes.resolve(ModeSlot::InputI),
            in_ii: cfg.modes.resolve(ModeSlot::InputII),
            out_i: cfg.modes.resolve(ModeSlot::OutputI),
            out_ii: cfg.modes.resolve(ModeSlot::OutputII),
            r,
            n,
        }
    }

    /// Re-derives the separation from a fixed center-to-center span.
    pub fn apply_fixed_span(&mut self, span: f64) {
        self.separation = span - 1.0 / self.accel_i - 1.0 / self.accel_ii;
    }
}

/// The four mode descriptors of a point: inputs first, outputs second.
pub fn mode_descriptors(cfg: &ScenarioConfig, p: &GridPoint) -> [ModeParams; 4] {
    let orientation = cfg.geometry.orientation.to_core();
    let region_ii = orientation.second_region();
    let input = |region: Region, accel: f64, (length, omega0): (f64, f64)| ModeParams {
        region,
        x0: 1.0 / accel,
        length,
        omega0,
        mass: cfg.mass,
        accel: 0.0,
        kind: ModeKind::Inertial,
    };
    let output_kind = match cfg.mode_kind {
        OutputModeKind::Passive => ModeKind::PassiveOutput,
        OutputModeKind::Active => ModeKind::ActiveOutput,
    };
    // Active outputs inherit the input envelope and frequency: they are
    // projections of the input packet, not independently shaped modes.
    let (out_i, out_ii) = match cfg.mode_kind {
        OutputModeKind::Passive => (p.out_i, p.out_ii),
        OutputModeKind::Active => (p.in_i, p.in_ii),
    };
    let output = |region: Region, accel: f64, (length, omega0): (f64, f64)| ModeParams {
        region,
        x0: 1.0 / accel,
        length,
        omega0,
        mass: cfg.mass,
        accel,
        kind: output_kind,
    };
    [
        input(Region::I, p.accel_i, p.in_i),
        input(region_ii, p.accel_ii, p.in_ii),
        output(Region::I, p.accel_i, out_i),
        output(region_ii, p.accel_ii, out_ii),
    ]
}

/// Channel assembled for one sweep point, with its provenance scalars.
#[derive(Clone, Debug)]
pub struct ChannelOutcome {
    pub channel: ChannelMatrices,
    pub overlaps: OverlapCoeffs,
    pub n_i: f64,
    pub n_ii: f64,
    pub cross: CrossNoise,
    pub warnings: Vec<String>,
}

fn wedge_spectrum(
    cfg: &ScenarioConfig,
    input: &WavePacket,
    params: &ModeParams,
) -> Result<RindlerSpectrum, PipelineError> {
    match cfg.mode_kind {
        OutputModeKind::Passive => {
            let packet = build_passive_output_mode(params)?;
            Ok(rindler_spectrum(&packet, cfg.a_conv)?)
        }
        OutputModeKind::Active => {
            let (_, spectrum) = build_active_output_mode(input, params.accel, cfg.a_conv)?;
            Ok(spectrum)
        }
    }
}

/// Builds the channel for one sweep point from scratch.
pub fn compute_channel(
    cfg: &ScenarioConfig,
    p: &GridPoint,
) -> Result<ChannelOutcome, PipelineError> {
    let orientation = cfg.geometry.orientation.to_core();
    let geometry = Geometry::new(orientation, p.separation, p.accel_i, p.accel_ii)?;
    let modes = mode_descriptors(cfg, p);
    let mut warnings = Vec::new();
    for params in &modes {
        for w in params.validate()? {
            let text = w.to_string();
            if !warnings.contains(&text) {
                warnings.push(text);
            }
        }
    }
    geometry.check_mode_clearance(&modes[2], &modes[3])?;

    let phi_i = build_input_mode(&modes[0])?;
    let phi_ii = build_input_mode(&modes[1])?;
    let spec_i = wedge_spectrum(cfg, &phi_i, &modes[2])?;
    let spec_ii = wedge_spectrum(cfg, &phi_ii, &modes[3])?;

    let coeff = MinkRindCoeff::new(Region::I, orientation, cfg.a_conv, p.separation, cfg.mass)?;
    let overlaps = mode_overlaps(&phi_i, &phi_ii, &spec_i, &spec_ii, &coeff)?;
    let transfer = transfer_matrix(&overlaps);

    let n_i = unruh_diagonal(&spec_i);
    let n_ii = unruh_diagonal(&spec_ii);
    let cross = match orientation {
        rindler_core::bogoliubov::Orientation::Counter => {
            cross_counter(&spec_i, &spec_ii, &geometry)?
        }
        rindler_core::bogoliubov::Orientation::Parallel => {
            cross_parallel(&spec_i, &spec_ii, &geometry)?
        }
    };
    let noise = build_noise_matrix(n_i, n_ii, cross.plus, cross.minus, &transfer)?;
    let channel = ChannelMatrices::new(transfer, noise.matrix, geometry, modes)?;
    Ok(ChannelOutcome {
        channel,
        overlaps,
        n_i,
        n_ii,
        cross,
        warnings,
    })
}

/// Cache payload: the scalar outputs of the expensive stage. Matrices are
/// rebuilt from these deterministically, so storing them would be
/// redundant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CachedChannel {
    /// Hash the payload was stored under, for corruption checks.
    pub key: String,
    pub alpha_i: [f64; 2],
    pub beta_i: [f64; 2],
    pub alpha_ii: [f64; 2],
    pub beta_ii: [f64; 2],
    pub n_i: f64,
    pub n_ii: f64,
    pub cross_plus: [f64; 2],
    pub cross_minus: [f64; 2],
    pub cross_error: f64,
    pub cross_converged: bool,
    pub warnings: Vec<String>,
}

fn pack(c: Complex64) -> [f64; 2] {
    [c.re, c.im]
}

fn unpack(v: [f64; 2]) -> Complex64 {
    Complex64::new(v[0], v[1])
}

impl CachedChannel {
    pub fn from_outcome(outcome: &ChannelOutcome, key: &str) -> Self {
        CachedChannel {
            key: key.to_string(),
            alpha_i: pack(outcome.overlaps.alpha_i),
            beta_i: pack(outcome.overlaps.beta_i),
            alpha_ii: pack(outcome.overlaps.alpha_ii),
            beta_ii: pack(outcome.overlaps.beta_ii),
            n_i: outcome.n_i,
            n_ii: outcome.n_ii,
            cross_plus: pack(outcome.cross.plus),
            cross_minus: pack(outcome.cross.minus),
            cross_error: outcome.cross_error(),
            cross_converged: outcome.cross.converged,
            warnings: outcome.warnings.clone(),
        }
    }
}

impl ChannelOutcome {
    fn cross_error(&self) -> f64 {
        self.cross.error
    }

    /// Rebuilds a channel from a cached payload; any inconsistency is an
    /// error so the caller can fall back to recomputing.
    pub fn from_cached(
        cfg: &ScenarioConfig,
        p: &GridPoint,
        payload: &CachedChannel,
    ) -> Result<Self, PipelineError> {
        let overlaps = OverlapCoeffs {
            alpha_i: unpack(payload.alpha_i),
            beta_i: unpack(payload.beta_i),
            alpha_ii: unpack(payload.alpha_ii),
            beta_ii: unpack(payload.beta_ii),
        };
        let cross = CrossNoise {
            plus: unpack(payload.cross_plus),
            minus: unpack(payload.cross_minus),
            error: payload.cross_error,
            converged: payload.cross_converged,
        };
        let orientation = cfg.geometry.orientation.to_core();
        let geometry = Geometry::new(orientation, p.separation, p.accel_i, p.accel_ii)?;
        let modes = mode_descriptors(cfg, p);
        let transfer = transfer_matrix(&overlaps);
        let noise = build_noise_matrix(payload.n_i, payload.n_ii, cross.plus, cross.minus, &transfer)
            .map_err(|_| PipelineError::StaleCache)?;
        let channel = ChannelMatrices::new(transfer, noise.matrix, geometry, modes)
            .map_err(|_| PipelineError::StaleCache)?;
        Ok(ChannelOutcome {
            channel,
            overlaps,
            n_i: payload.n_i,
            n_ii: payload.n_ii,
            cross,
            warnings: payload.warnings.clone(),
        })
    }
}

/// All scalars of one finished sweep point.
#[derive(Clone, Debug)]
pub struct PointRecord {
    pub point: GridPoint,
    pub alpha_i: Complex64,
    pub beta_i: Complex64,
    pub alpha_ii: Complex64,
    pub beta_ii: Complex64,
    pub n_i: f64,
    pub n_ii: f64,
    pub cross_plus: Complex64,
    pub cross_minus: Complex64,
    pub cross_error: f64,
    pub converged: bool,
    pub cp_min_eig: f64,
    pub log_negativity: f64,
    pub pt_symplectic_eig: f64,
    pub fidelity: f64,
    pub tau: f64,
    pub nbar: f64,
    pub rank: u8,
    pub noise_coefficient: f64,
    pub c_lb: f64,
    pub q_lb: f64,
    pub mbar_clamped: bool,
    pub status: String,
    pub warnings: Vec<String>,
}

impl PointRecord {
    /// Placeholder row for a failed point: NaN scalars plus the error text.
    pub fn failed(point: GridPoint, message: String) -> Self {
        let nan = f64::NAN;
        let cnan = Complex64::new(nan, nan);
        PointRecord {
            point,
            alpha_i: cnan,
            beta_i: cnan,
            alpha_ii: cnan,
            beta_ii: cnan,
            n_i: nan,
            n_ii: nan,
            cross_plus: cnan,
            cross_minus: cnan,
            cross_error: nan,
            converged: false,
            cp_min_eig: nan,
            log_negativity: nan,
            pt_symplectic_eig: nan,
            fidelity: nan,
            tau: nan,
            nbar: nan,
            rank: 0,
            noise_coefficient: nan,
            c_lb: nan,
            q_lb: nan,
            mbar_clamped: false,
            status: message,
            warnings: Vec::new(),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

/// Builds the input state of one point.
pub fn input_state(
    cfg: &ScenarioConfig,
    p: &GridPoint,
) -> Result<GaussianState, PipelineError> {
    Ok(match cfg.input_state {
        InputStateConfig::Vacuum => GaussianState::vacuum(),
        InputStateConfig::SqueezedThermal { .. } => GaussianState::squeezed_thermal(p.r, p.n)?,
        InputStateConfig::Coherent { d } => GaussianState::coherent(Vector4::from(d))?,
    })
}

/// Applies the channel to the configured input state and evaluates every
/// per-point measure.
pub fn evaluate_point(
    cfg: &ScenarioConfig,
    p: &GridPoint,
    outcome: &ChannelOutcome,
) -> Result<PointRecord, PipelineError> {
    let base = cfg.log_base.to_core();
    let input = input_state(cfg, p)?;
    let output = outcome.channel.apply(&input)?;

    let negativity = log_negativity(&output, base)?;
    let mut warnings = outcome.warnings.clone();
    let fidelity = if matches!(cfg.input_state, InputStateConfig::Coherent { .. }) {
        // The closed fidelity formula covers zero-mean states only.
        warnings.push("fidelity skipped: coherent input has nonzero first moments".into());
        f64::NAN
    } else {
        uhlmann_fidelity(&input, &output)?
    };

    let single_mode = outcome.channel.reduce();
    let canonical = canonical_form(&single_mode)?;
    let classical = classical_capacity_lb(&canonical, cfg.mbar, base)?;
    let quantum = quantum_capacity_lb(&canonical, base);

    let tol = &cfg.tolerances;
    let cross_scale = outcome.cross.plus.norm().max(outcome.cross.minus.norm());
    let converged = outcome.cross.converged
        && outcome.cross.error <= tol.cross_abs + tol.cross_rel * cross_scale;

    Ok(PointRecord {
        point: *p,
        alpha_i: outcome.overlaps.alpha_i,
        beta_i: outcome.overlaps.beta_i,
        alpha_ii: outcome.overlaps.alpha_ii,
        beta_ii: outcome.overlaps.beta_ii,
        n_i: outcome.n_i,
        n_ii: outcome.n_ii,
        cross_plus: outcome.cross.plus,
        cross_minus: outcome.cross.minus,
        cross_error: outcome.cross.error,
        converged,
        cp_min_eig: outcome.channel.cp_min_eigenvalue(),
        log_negativity: negativity.value,
        pt_symplectic_eig: negativity.min_pt_symplectic_eig,
        fidelity,
        tau: canonical.tau,
        nbar: canonical.nbar,
        rank: canonical.rank,
        noise_coefficient: canonical.noise_coefficient(),
        c_lb: classical.value,
        q_lb: quantum,
        mbar_clamped: classical.mbar_clamped,
        status: "ok".to_string(),
        warnings,
    })
}
