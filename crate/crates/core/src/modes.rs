//! Wave packets on the `t = 0` slice, the Klein-Gordon product, and their
//! frequency-space representations for inertial and uniformly accelerated
//! observers.
//!
//! # Coordinates and conventions
//!
//! A packet lives in one of the two Rindler wedges of 1+1 Minkowski space.
//! Internally every packet is stored on a *positive* coordinate grid: region
//! II packets are mirrored through the origin, so a stored sample at `x`
//! represents the field at Minkowski coordinate `-x`. The `t = 0` slice
//! coincides with the `tau = 0` Rindler slice, and on it `x = |chi|`, so one
//! grid serves both frames.
//!
//! Rindler time `tau` is normalized to the proper time of the observer at
//! the packet center `x0 = 1/accel`. On the slice the two time derivatives
//! are related by `d/dt = (1 / (accel * chi)) d/dtau` with *signed* `chi`,
//! which is how region II acquires its relative sign. The Klein-Gordon
//! product is always evaluated in the Minkowski view,
//!
//! ```text
//! (f, g) = i INT dx ( conj(f) dg/dt - g conj(df/dt) ),
//! ```
//!
//! with each packet supplying its own Minkowski-view time derivative. For
//! two region I Rindler packets this reduces to the familiar wedge form
//! `i INT dchi/(accel chi) (conj(f) dg/dtau - ...)`, and for region II it
//! reproduces the product oriented along the future-directed normal, under
//! which region II Rindler modes have positive norm.
//!
//! Spectra are stored in the boost-invariant variable `nu = Omega / a`: the
//! amplitude `F(nu) = sqrt(a) * (psi, w_{a nu})` does not depend on the
//! convention parameter `a`, which only rescales the frequency axis.

use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::interp::CubicSpline;
use crate::quadrature::{integrate_1d, Axis, Quadrature, QuadratureError, Tolerance};
use crate::specfun::{bessel_k_imag_scaled, mode_profile_kernel, SpecFunError};

/// Envelope half-width in scaled log units; `exp(-2 u^2)` is about `5.6e-12`
/// at `|u| = EDGE_U`, comfortably under the `1e-10` edge-decay requirement.
const EDGE_U: f64 = 3.6;
/// Samples per local oscillation wavelength on packet grids.
const PTS_PER_WAVELENGTH: f64 = 40.0;
/// Denser sampling for synthesized (active) packets, whose norm check rides
/// on the interpolation quality of the stored samples.
const ACTIVE_PTS_PER_WAVELENGTH: f64 = 80.0;
/// Center separations beyond this many envelope widths count as exact zero
/// overlap; closer non-overlapping grids are a hard error.
pub(crate) const SEPARATION_WIDTHS: f64 = 5.0;
/// Maximum admissible normalization weight near the top of the frequency
/// grid; more than this means the grid was truncated too early.
const TAIL_LIMIT: f64 = 1e-6;
/// Below this squared norm a projection is considered vanishing.
const PROJECTION_FLOOR: f64 = 1e-8;

/// Hard upper bound on `accel * length`; the log-Gaussian envelope stops
/// resembling a localized Gaussian packet well before 1.
pub const ACCEL_LENGTH_LIMIT: f64 = 0.5;
/// Soft localization bound; a warning is issued above it.
pub const ACCEL_LENGTH_SOFT: f64 = 0.2;
/// Soft lower bound on `omega0 * length`; packets with fewer oscillations
/// under the envelope carry noticeable negative-frequency content.
pub const OSCILLATION_COUNT_SOFT: f64 = 5.0;

/// Rindler wedge containing a packet.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    I,
    II,
}

impl Region {
    /// Sign of the Minkowski coordinates covered by the wedge.
    pub fn coordinate_sign(self) -> f64 {
        match self {
            Region::I => 1.0,
            Region::II => -1.0,
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Region::I => write!(f, "I"),
            Region::II => write!(f, "II"),
        }
    }
}

/// What a packet represents in the channel pipeline.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModeKind {
    /// Input mode defined by an inertial observer.
    Inertial,
    /// Output mode whose shape is fixed a priori (log-Gaussian times a
    /// Macdonald-function profile).
    PassiveOutput,
    /// Output mode obtained by projecting the input onto the wedge modes.
    ActiveOutput,
}

impl fmt::Display for ModeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModeKind::Inertial => write!(f, "inertial"),
            ModeKind::PassiveOutput => write!(f, "passive output"),
            ModeKind::ActiveOutput => write!(f, "active output"),
        }
    }
}

/// Coordinate frame whose time derivative a packet stores.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Frame {
    Minkowski,
    Rindler,
}

/// Non-fatal observations about marginal parameter choices.
#[derive(Clone, Debug, PartialEq)]
pub enum ModeWarning {
    /// `accel * length` is above the soft localization bound; the envelope
    /// is noticeably skewed by the log coordinate.
    MarginalLocalization { accel_length: f64 },
    /// `omega0 * length` is small; the packet holds few oscillations and
    /// carries appreciable negative-frequency weight.
    FewOscillations { omega0_length: f64 },
}

impl fmt::Display for ModeWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModeWarning::MarginalLocalization { accel_length } => write!(
                f,
                "accel * length = {accel_length:.3} exceeds {ACCEL_LENGTH_SOFT}; \
                 the packet is only marginally localized within the wedge"
            ),
            ModeWarning::FewOscillations { omega0_length } => write!(
                f,
                "omega0 * length = {omega0_length:.3} is below {OSCILLATION_COUNT_SOFT}; \
                 expect noticeable negative-frequency content"
            ),
        }
    }
}

/// Errors from packet construction and slice geometry.
#[derive(Debug, thiserror::Error)]
pub enum ModeError {
    #[error("{name} must be positive and finite, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("central frequency {omega0} does not exceed the mass {mass}; the packet cannot propagate")]
    FrequencyBelowMass { omega0: f64, mass: f64 },
    #[error(
        "accel * length = {accel_length:.3} is at or above {ACCEL_LENGTH_LIMIT}; \
         the packet is not localized within the wedge"
    )]
    DelocalizedPacket { accel_length: f64 },
    #[error("{kind} modes require a positive proper acceleration")]
    KindRequiresAcceleration { kind: ModeKind },
    #[error("output modes are centered at x0 = 1/accel; got x0 = {x0} with 1/accel = {expected}")]
    CenterAccelMismatch { x0: f64, expected: f64 },
    #[error("expected an {expected} packet, got {found}")]
    WrongKind { expected: ModeKind, found: ModeKind },
    #[error("expected a region {expected} mode for this role, got region {found}")]
    RegionExpected { expected: Region, found: Region },
    #[error("operation requires a packet in the {expected:?} frame")]
    FrameExpected { expected: Frame },
    #[error(
        "mode centers are {separation:.3e} apart but the channel construction \
         assumes non-overlapping packets (at least {required:.3e})"
    )]
    OverlappingModes { separation: f64, required: f64 },
    #[error("mass mismatch: coefficient set built for m = {expected}, packets have m = {found}")]
    MassMismatch { expected: f64, found: f64 },
    #[error(
        "packet supports are separated by a gap of {gap:.3e}, close enough that their \
         overlap is real but entirely outside the sampled grids"
    )]
    GridDisjoint { gap: f64 },
    #[error("sample grid must be strictly increasing and finite, with matching value and derivative lengths")]
    InvalidSamples,
    #[error("projection norm {norm:.3e} is below {PROJECTION_FLOOR:.0e}; the mode content vanishes")]
    VanishingProjection { norm: f64 },
    #[error(
        "frequency grid truncated at nu = {nu_max} still holds a normalization tail \
         of {tail:.3e} (limit {TAIL_LIMIT:.0e})"
    )]
    SpectrumTail { nu_max: f64, tail: f64 },
    #[error("quadrature failed to converge while {context}")]
    NoConvergence { context: &'static str },
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
}

/// Physical parameters of a mode.
///
/// `x0` is the magnitude of the packet center; the actual Minkowski
/// coordinate of the center is `region.coordinate_sign() * x0`.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeParams {
    pub region: Region,
    pub x0: f64,
    /// Envelope width `L`.
    pub length: f64,
    /// Central frequency as measured by the observer at the packet center.
    pub omega0: f64,
    pub mass: f64,
    /// Proper acceleration of the observer at the center; `0` means inertial.
    pub accel: f64,
    pub kind: ModeKind,
}

impl ModeParams {
    /// Checks the parameter invariants, returning advisory warnings.
    pub fn validate(&self) -> Result<Vec<ModeWarning>, ModeError> {
        for (name, value) in [
            ("x0", self.x0),
            ("length", self.length),
            ("omega0", self.omega0),
            ("mass", self.mass),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(ModeError::NonPositive { name, value });
            }
        }
        if !(self.accel >= 0.0 && self.accel.is_finite()) {
            return Err(ModeError::NonPositive {
                name: "accel",
                value: self.accel,
            });
        }
        if self.omega0 <= self.mass {
            return Err(ModeError::FrequencyBelowMass {
                omega0: self.omega0,
                mass: self.mass,
            });
        }
        let accel_length = self.accel * self.length;
        if accel_length >= ACCEL_LENGTH_LIMIT {
            return Err(ModeError::DelocalizedPacket { accel_length });
        }
        if self.kind != ModeKind::Inertial {
            if self.accel == 0.0 {
                return Err(ModeError::KindRequiresAcceleration { kind: self.kind });
            }
            let expected = 1.0 / self.accel;
            if (self.x0 - expected).abs() > 1e-9 * expected {
                return Err(ModeError::CenterAccelMismatch {
                    x0: self.x0,
                    expected,
                });
            }
        }
        let mut warnings = Vec::new();
        if accel_length > ACCEL_LENGTH_SOFT {
            warnings.push(ModeWarning::MarginalLocalization { accel_length });
        }
        let omega0_length = self.omega0 * self.length;
        if omega0_length < OSCILLATION_COUNT_SOFT {
            warnings.push(ModeWarning::FewOscillations { omega0_length });
        }
        Ok(warnings)
    }

    /// Propagating wavenumber `sqrt(omega0^2 - mass^2)`.
    pub fn wavenumber(&self) -> f64 {
        (self.omega0 * self.omega0 - self.mass * self.mass).sqrt()
    }

    /// Central boost frequency in invariant units, `omega0 / accel`.
    pub(crate) fn nu0(&self) -> f64 {
        self.omega0 / self.accel
    }
}

/// Log-Gaussian envelope `exp(-2 ((x0/L) ln(x/x0))^2)`.
pub(crate) fn log_gauss_envelope(x0: f64, length: f64, x: f64) -> f64 {
    let u = (x0 / length) * (x / x0).ln();
    (-2.0 * u * u).exp()
}

/// Closed-form or sampled representation of the packet values.
#[derive(Clone, Debug)]
enum Profile {
    /// `amp * envelope(x) * sin(kappa (x - x0))`.
    LogGaussSine { amp: f64 },
    /// `amp * envelope(chi) * Im[ exp(i nu0 ln(chi/x0)) conj(S(m x0)) S(m chi) ]`,
    /// the regularized `Im[I_{-i nu0}(m x0) I_{i nu0}(m chi)]` profile.
    LogGaussKernel { amp: f64 },
    /// Values known only through samples; evaluated by cubic splines.
    Sampled {
        val_re: CubicSpline,
        val_im: CubicSpline,
        td_re: CubicSpline,
        td_im: CubicSpline,
    },
}

fn sampled_profile(
    grid: &[f64],
    values: &[Complex64],
    tderivs: &[Complex64],
) -> Result<Profile, ModeError> {
    let build = |ys: Vec<f64>| {
        CubicSpline::new(grid.to_vec(), ys).map_err(|_| ModeError::InvalidSamples)
    };
    Ok(Profile::Sampled {
        val_re: build(values.iter().map(|v| v.re).collect())?,
        val_im: build(values.iter().map(|v| v.im).collect())?,
        td_re: build(tderivs.iter().map(|v| v.re).collect())?,
        td_im: build(tderivs.iter().map(|v| v.im).collect())?,
    })
}

/// A localized mode sampled on the `t = 0` slice.
///
/// Immutable after construction; safe to share across worker threads.
#[derive(Clone, Debug)]
pub struct WavePacket {
    params: ModeParams,
    frame: Frame,
    profile: Profile,
    /// Signed own-frame frequency for closed-form profiles: the stored time
    /// derivative is `-i * slice_freq * value`. Unused for sampled profiles.
    slice_freq: f64,
    grid: Vec<f64>,
    values: Vec<Complex64>,
    tderivs: Vec<Complex64>,
}

impl WavePacket {
    /// Wraps externally produced samples (no normalization is applied, and
    /// the caller owns the edge-decay invariant). `tderivs` are derivatives
    /// with respect to the `frame` time coordinate.
    pub fn from_samples(
        params: ModeParams,
        frame: Frame,
        grid: Vec<f64>,
        values: Vec<Complex64>,
        tderivs: Vec<Complex64>,
    ) -> Result<Self, ModeError> {
        params.validate()?;
        if frame == Frame::Rindler && params.accel == 0.0 {
            return Err(ModeError::KindRequiresAcceleration { kind: params.kind });
        }
        let n = grid.len();
        if n < 4 || values.len() != n || tderivs.len() != n {
            return Err(ModeError::InvalidSamples);
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) || grid[0] <= 0.0 {
            return Err(ModeError::InvalidSamples);
        }
        if grid.iter().any(|x| !x.is_finite())
            || values.iter().chain(tderivs.iter()).any(|v| !v.is_finite())
        {
            return Err(ModeError::InvalidSamples);
        }
        let profile = sampled_profile(&grid, &values, &tderivs)?;
        Ok(WavePacket {
            params,
            frame,
            profile,
            slice_freq: 0.0,
            grid,
            values,
            tderivs,
        })
    }

    /// Reconstructs the slice samples of a packet from its Minkowski
    /// spectrum: `phi(x) = INT dk [pos_k u_k + neg_k conj(u_k)]`.
    pub fn from_minkowski_spectrum(spec: &MinkowskiSpectrum) -> Result<Self, ModeError> {
        let params = spec.params;
        params.validate()?;
        let grid = minkowski_grid(&params);
        let sign = params.region.coordinate_sign();
        let ks = &spec.k_grid;
        let dk = ks[1] - ks[0];
        let mut omegas = Vec::with_capacity(ks.len());
        for &k in ks {
            omegas.push((k * k + params.mass * params.mass).sqrt());
        }
        let mut values = Vec::with_capacity(grid.len());
        let mut tderivs = Vec::with_capacity(grid.len());
        let mut val_row = vec![Complex64::new(0.0, 0.0); ks.len()];
        let mut td_row = vec![Complex64::new(0.0, 0.0); ks.len()];
        for &x in &grid {
            for (i, &k) in ks.iter().enumerate() {
                let omega = omegas[i];
                let phase = Complex64::from_polar(1.0, sign * k * x);
                let mode = phase / (4.0 * std::f64::consts::PI * omega).sqrt();
                // Stored amplitudes are the overlaps (phi, u_k), antilinear
                // in phi; the expansion coefficients of phi itself are
                // a_k = conj(amps_pos), b_k = -conj(amps_neg).
                let pos = spec.amps_pos[i].conj() * mode;
                let neg = -spec.amps_neg[i].conj() * mode.conj();
                val_row[i] = pos + neg;
                td_row[i] = Complex64::new(0.0, -omega) * pos + Complex64::new(0.0, omega) * neg;
            }
            values.push(simpson_uniform(dk, &val_row));
            tderivs.push(simpson_uniform(dk, &td_row));
        }
        let profile = sampled_profile(&grid, &values, &tderivs)?;
        Ok(WavePacket {
            params,
            frame: Frame::Minkowski,
            profile,
            slice_freq: 0.0,
            grid,
            values,
            tderivs,
        })
    }

    pub fn params(&self) -> &ModeParams {
        &self.params
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn region(&self) -> Region {
        self.params.region
    }

    /// Sample positions (positive internal coordinates, strictly increasing).
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Derivatives with respect to the packet's own frame time.
    pub fn tderivs(&self) -> &[Complex64] {
        &self.tderivs
    }

    /// Support interval of the sampled grid.
    pub fn support(&self) -> (f64, f64) {
        (self.grid[0], *self.grid.last().expect("non-empty grid"))
    }

    /// Field value at `x` (internal coordinates); zero outside the support,
    /// where the envelope has decayed below the edge threshold.
    pub fn value_at(&self, x: f64) -> Complex64 {
        let (lo, hi) = self.support();
        if !(lo..=hi).contains(&x) {
            return Complex64::new(0.0, 0.0);
        }
        match &self.profile {
            Profile::LogGaussSine { amp } => {
                let p = &self.params;
                let v = amp
                    * log_gauss_envelope(p.x0, p.length, x)
                    * (p.wavenumber() * (x - p.x0)).sin();
                Complex64::new(v, 0.0)
            }
            Profile::LogGaussKernel { amp } => {
                let p = &self.params;
                let kernel = mode_profile_kernel(p.nu0(), p.mass * p.x0, p.mass * x)
                    .expect("kernel domain verified at construction");
                Complex64::new(amp * log_gauss_envelope(p.x0, p.length, x) * kernel, 0.0)
            }
            Profile::Sampled { val_re, val_im, .. } => {
                Complex64::new(val_re.eval(x), val_im.eval(x))
            }
        }
    }

    /// Own-frame time derivative at `x`; zero outside the support.
    pub fn tderiv_at(&self, x: f64) -> Complex64 {
        match &self.profile {
            Profile::Sampled { td_re, td_im, .. } => {
                let (lo, hi) = self.support();
                if !(lo..=hi).contains(&x) {
                    return Complex64::new(0.0, 0.0);
                }
                Complex64::new(td_re.eval(x), td_im.eval(x))
            }
            _ => Complex64::new(0.0, -self.slice_freq) * self.value_at(x),
        }
    }

    /// Minkowski-view time derivative on the slice. For Rindler packets this
    /// is `d/dt = (1/(accel chi)) d/dtau` with signed `chi`, i.e. the region
    /// II derivative picks up a sign through the mirrored coordinate.
    pub fn minkowski_tderiv_at(&self, x: f64) -> Complex64 {
        match self.frame {
            Frame::Minkowski => self.tderiv_at(x),
            Frame::Rindler => {
                let sign = self.params.region.coordinate_sign();
                self.tderiv_at(x) * (sign / (self.params.accel * x))
            }
        }
    }

    /// Complex conjugate of the packet (values and derivatives conjugated).
    pub fn conjugate(&self) -> Self {
        let values: Vec<_> = self.values.iter().map(|v| v.conj()).collect();
        let tderivs: Vec<_> = self.tderivs.iter().map(|v| v.conj()).collect();
        let profile = match &self.profile {
            Profile::Sampled { .. } => sampled_profile(&self.grid, &values, &tderivs)
                .expect("conjugated samples stay valid"),
            other => other.clone(),
        };
        WavePacket {
            params: self.params,
            frame: self.frame,
            profile,
            slice_freq: -self.slice_freq,
            grid: self.grid.clone(),
            values,
            tderivs,
        }
    }

    /// Shortest oscillation wavelength across the support, used to seed
    /// quadrature panels.
    fn wavelength_hint(&self) -> f64 {
        match &self.profile {
            Profile::LogGaussSine { .. } => {
                2.0 * std::f64::consts::PI / self.params.wavenumber()
            }
            Profile::LogGaussKernel { .. } => {
                2.0 * std::f64::consts::PI * self.grid[0] / self.params.nu0()
            }
            Profile::Sampled { .. } => {
                let min_dx = self
                    .grid
                    .windows(2)
                    .map(|w| w[1] - w[0])
                    .fold(f64::INFINITY, f64::min);
                // Grids are built with at least PTS_PER_WAVELENGTH samples
                // per wavelength, so this reconstructs a safe lower bound.
                min_dx * PTS_PER_WAVELENGTH * 0.75
            }
        }
    }

    /// Peak magnitude over the stored samples.
    pub fn peak_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Columnar text dump: `x  re(value)  im(value)  re(tderiv)  im(tderiv)`.
    pub fn to_columns(&self) -> String {
        let mut out = String::with_capacity(self.grid.len() * 100);
        out.push_str("# x re_value im_value re_tderiv im_tderiv\n");
        for (i, &x) in self.grid.iter().enumerate() {
            let v = self.values[i];
            let d = self.tderivs[i];
            out.push_str(&format!(
                "{:.16e} {:.16e} {:.16e} {:.16e} {:.16e}\n",
                x, v.re, v.im, d.re, d.im
            ));
        }
        out
    }

    /// Rescales the packet to unit Klein-Gordon norm.
    fn normalized(mut self) -> Result<Self, ModeError> {
        let n2 = kg_inner(&self, &self)?;
        if !(n2.re > PROJECTION_FLOOR * PROJECTION_FLOOR) {
            return Err(ModeError::VanishingProjection { norm: n2.re });
        }
        let scale = 1.0 / n2.re.sqrt();
        for v in &mut self.values {
            *v *= scale;
        }
        for d in &mut self.tderivs {
            *d *= scale;
        }
        self.profile = match self.profile {
            Profile::LogGaussSine { amp } => Profile::LogGaussSine { amp: amp * scale },
            Profile::LogGaussKernel { amp } => Profile::LogGaussKernel { amp: amp * scale },
            Profile::Sampled { .. } => sampled_profile(&self.grid, &self.values, &self.tderivs)?,
        };
        Ok(self)
    }
}

/// Composite Simpson rule on a uniform grid with an odd number of samples.
fn simpson_uniform(h: f64, ys: &[Complex64]) -> Complex64 {
    debug_assert!(ys.len() >= 3 && ys.len() % 2 == 1);
    let mut acc = ys[0] + ys[ys.len() - 1];
    for (i, y) in ys.iter().enumerate().skip(1).take(ys.len() - 2) {
        acc += *y * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * (h / 3.0)
}

/// Support window: the union of the `x0 +- 6 L` window and the log-envelope
/// decay window, clipped to the wedge interior.
fn support_window(params: &ModeParams) -> (f64, f64) {
    let s = params.length / params.x0;
    let lo_env = params.x0 * (-EDGE_U * s).exp();
    let hi_env = params.x0 * (EDGE_U * s).exp();
    let lo_lin = params.x0 - 6.0 * params.length;
    let hi_lin = params.x0 + 6.0 * params.length;
    let lo = if lo_lin > 0.0 { lo_lin.min(lo_env) } else { lo_env };
    (lo, hi_lin.max(hi_env))
}

/// Uniform slice grid for Minkowski-frame packets.
fn minkowski_grid(params: &ModeParams) -> Vec<f64> {
    let (lo, hi) = support_window(params);
    let wavelength = 2.0 * std::f64::consts::PI / params.wavenumber();
    let dx = (wavelength / PTS_PER_WAVELENGTH).min(params.length / 10.0);
    let n = ((hi - lo) / dx).ceil() as usize + 1;
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Log-uniform slice grid for Rindler-frame packets: the profile oscillates
/// with period `2 pi / nu0` in `ln chi`, so uniform log spacing refines the
/// grid toward the horizon exactly as the oscillation demands.
fn rindler_grid(params: &ModeParams, pts_per_wavelength: f64) -> Vec<f64> {
    let (lo, hi) = support_window(params);
    let s = params.length / params.x0;
    let du = (2.0 * std::f64::consts::PI / params.nu0() / pts_per_wavelength).min(s / 20.0);
    let (ulo, uhi) = (lo.ln(), hi.ln());
    let n = ((uhi - ulo) / du).ceil() as usize + 1;
    (0..n)
        .map(|i| (ulo + (uhi - ulo) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Builds the inertial input packet
/// `phi(x, 0) = C exp(-2 (x0/L ln(x/x0))^2) sin(kappa (x - x0))` with
/// `dphi/dt = -i omega0 phi`, normalized to unit Klein-Gordon norm.
/// Region II packets are the mirror image `phi(-x)`.
pub fn build_input_mode(params: &ModeParams) -> Result<WavePacket, ModeError> {
    params.validate()?;
    if params.kind != ModeKind::Inertial {
        return Err(ModeError::WrongKind {
            expected: ModeKind::Inertial,
            found: params.kind,
        });
    }
    let grid = minkowski_grid(params);
    let packet = WavePacket {
        params: *params,
        frame: Frame::Minkowski,
        profile: Profile::LogGaussSine { amp: 1.0 },
        slice_freq: params.omega0,
        grid,
        values: Vec::new(),
        tderivs: Vec::new(),
    };
    fill_analytic_samples(packet)?.normalized()
}

/// Builds the passive output packet
/// `psi(chi, 0) = C' exp(-2 (x0/L ln(chi/x0))^2) f(chi)` with
/// `f(chi) ~ Im[I_{-i omega0/accel}(m x0) I_{i omega0/accel}(m chi)]` and
/// `dpsi/dtau = -+ i omega0 psi` (upper sign region I), normalized to unit
/// Klein-Gordon norm. The positive regularizing factor of the profile
/// kernel is absorbed into the normalization constant.
pub fn build_passive_output_mode(params: &ModeParams) -> Result<WavePacket, ModeError> {
    params.validate()?;
    if params.kind != ModeKind::PassiveOutput {
        return Err(ModeError::WrongKind {
            expected: ModeKind::PassiveOutput,
            found: params.kind,
        });
    }
    let grid = rindler_grid(params, PTS_PER_WAVELENGTH);
    // Verify the profile kernel is evaluable across the whole support before
    // sampling (its argument is capped upstream).
    mode_profile_kernel(
        params.nu0(),
        params.mass * params.x0,
        params.mass * *grid.last().expect("non-empty grid"),
    )?;
    let slice_freq = params.region.coordinate_sign() * params.omega0;
    let packet = WavePacket {
        params: *params,
        frame: Frame::Rindler,
        profile: Profile::LogGaussKernel { amp: 1.0 },
        slice_freq,
        grid,
        values: Vec::new(),
        tderivs: Vec::new(),
    };
    fill_analytic_samples(packet)?.normalized()
}

/// Populates the sample arrays of a closed-form packet from its profile.
fn fill_analytic_samples(mut packet: WavePacket) -> Result<WavePacket, ModeError> {
    let mut values = Vec::with_capacity(packet.grid.len());
    for &x in &packet.grid {
        // Evaluate through the profile directly (support checks would return
        // zero at the exact endpoints otherwise).
        let p = &packet.params;
        let v = match &packet.profile {
            Profile::LogGaussSine { amp } => {
                amp * log_gauss_envelope(p.x0, p.length, x) * (p.wavenumber() * (x - p.x0)).sin()
            }
            Profile::LogGaussKernel { amp } => {
                amp * log_gauss_envelope(p.x0, p.length, x)
                    * mode_profile_kernel(p.nu0(), p.mass * p.x0, p.mass * x)?
            }
            Profile::Sampled { .. } => unreachable!("analytic builders only"),
        };
        values.push(Complex64::new(v, 0.0));
    }
    packet.tderivs = values
        .iter()
        .map(|&v| Complex64::new(0.0, -packet.slice_freq) * v)
        .collect();
    packet.values = values;
    Ok(packet)
}

/// Klein-Gordon product `(f, g) = i INT dx (conj(f) dg/dt - g conj(df/dt))`
/// evaluated in the Minkowski view of the shared `t = 0` slice.
///
/// For Rindler packets the Minkowski-view derivative carries the wedge
/// measure and orientation, so same-wedge products reduce to
/// `+-i INT dchi/(accel |chi|)(conj(f) dg/dtau - g conj(df/dtau))` with the
/// future-directed-normal sign in region II. Packets in different wedges
/// have disjoint supports and yield exactly zero. Non-overlapping grids in
/// the same wedge yield zero when the centers are separated by more than
/// five envelope widths and an error otherwise (the tails would matter but
/// are not sampled).
pub fn kg_inner(f: &WavePacket, g: &WavePacket) -> Result<Complex64, ModeError> {
    kg_inner_with(f, g, &Tolerance::ONE_D)
}

pub(crate) fn kg_inner_with(
    f: &WavePacket,
    g: &WavePacket,
    tol: &Tolerance,
) -> Result<Complex64, ModeError> {
    if f.region() != g.region() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let (flo, fhi) = f.support();
    let (glo, ghi) = g.support();
    let lo = flo.max(glo);
    let hi = fhi.min(ghi);
    if lo >= hi {
        let gap = (glo - fhi).max(flo - ghi);
        let widths = SEPARATION_WIDTHS * f.params.length.max(g.params.length);
        return if (f.params.x0 - g.params.x0).abs() > widths {
            Ok(Complex64::new(0.0, 0.0))
        } else {
            Err(ModeError::GridDisjoint { gap })
        };
    }
    let mut req = Quadrature::with_tol(*tol);
    req.osc_period = Some(f.wavelength_hint().min(g.wavelength_hint()));
    let out = integrate_1d(
        |x| {
            let fv = f.value_at(x);
            let gv = g.value_at(x);
            let fd = f.minkowski_tderiv_at(x);
            let gd = g.minkowski_tderiv_at(x);
            Complex64::new(0.0, 1.0) * (fv.conj() * gd - gv * fd.conj())
        },
        Axis::Finite { lo, hi },
        &req,
    )?;
    if !out.converged {
        return Err(ModeError::NoConvergence {
            context: "evaluating a Klein-Gordon product",
        });
    }
    Ok(out.value)
}

/// Invariant wedge-mode amplitudes `F(nu) = sqrt(a) (pkt, w_{a nu})` for a
/// packet in its own wedge, evaluated at the given `nu > 0` nodes:
///
/// ```text
/// F(nu) = (1/pi) sqrt((1 - e^{-2 pi nu}) / 2)
///         INT dx K-hat_nu(m x) [ (nu / x) conj(value) - i conj(d/dt value) ]
/// ```
///
/// with the Minkowski-view time derivative, which makes the same expression
/// valid for inertial packets, passive packets, and synthesized packets in
/// either wedge (the region II orientation enters through the mirrored
/// derivative).
pub(crate) fn wedge_amps_at(pkt: &WavePacket, nus: &[f64]) -> Result<Vec<Complex64>, ModeError> {
    let (lo, hi) = pkt.support();
    let mass = pkt.params.mass;
    let nu0 = if pkt.params.accel > 0.0 {
        pkt.params.nu0()
    } else {
        // Inertial packets oscillate at omega0 in x; near the center that is
        // nu ~ omega0 * x0 in the log variable.
        pkt.params.omega0 * pkt.params.x0
    };
    nus.par_iter()
        .map(|&nu| -> Result<Complex64, ModeError> {
            let mut kernel_err: Option<SpecFunError> = None;
            let mut req = Quadrature::with_tol(Tolerance::ONE_D);
            // Far-tail amplitudes cancel to below the Kronrod error floor;
            // 1e-12 absolute is far below any weight the spectra resolve.
            req.tol.abs = 1e-12;
            req.osc_period = Some(2.0 * std::f64::consts::PI / (nu + nu0 + 1.0));
            let out = integrate_1d(
                |u: f64| {
                    let x = u.exp();
                    let khat = match bessel_k_imag_scaled(nu, mass * x) {
                        Ok(v) => v,
                        Err(e) => {
                            kernel_err.get_or_insert(e);
                            return Complex64::new(0.0, 0.0);
                        }
                    };
                    let val = pkt.value_at(x);
                    let td = pkt.minkowski_tderiv_at(x);
                    // d x = x d u; the 1/x of the nu-term cancels against it.
                    (val.conj() * nu - Complex64::new(0.0, 1.0) * td.conj() * x) * khat
                },
                Axis::Finite {
                    lo: lo.ln(),
                    hi: hi.ln(),
                },
                &req,
            )?;
            if let Some(e) = kernel_err {
                return Err(e.into());
            }
            if !out.converged {
                return Err(ModeError::NoConvergence {
                    context: "evaluating a wedge-mode amplitude",
                });
            }
            let damp = -(-2.0 * std::f64::consts::PI * nu).exp_m1();
            Ok(out.value * ((damp / 2.0).sqrt() / std::f64::consts::PI))
        })
        .collect()
}

/// Boost-frequency spectrum of an accelerated output packet.
///
/// Amplitudes are stored in invariant units (`F(nu)`, `nu = Omega / a`) and
/// are the bare overlaps `(psi, w_Omega)`: for a packet defined with an
/// exact slice frequency the norm `INT dnu |F|^2` exceeds 1 by the packet's
/// negative-boost-frequency weight (about 5e-3 at `omega0 L = 10`), exactly
/// as the plane-wave spectrum of the inertial packet does.
#[derive(Clone, Debug)]
pub struct RindlerSpectrum {
    a_conv: f64,
    region: Region,
    kind: ModeKind,
    mass: f64,
    nus: Vec<f64>,
    nu_weights: Vec<f64>,
    amps_inv: Vec<Complex64>,
    raw_norm: f64,
    nu0: f64,
}

impl RindlerSpectrum {
    pub fn a_conv(&self) -> f64 {
        self.a_conv
    }

    pub fn region(&self) -> Region {
        self.region
    }

    /// Field mass of the underlying packet.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Kind of the packet the spectrum was built from.
    pub fn kind(&self) -> ModeKind {
        self.kind
    }

    /// Invariant frequency nodes `nu = Omega / a`.
    pub fn invariant_nus(&self) -> &[f64] {
        &self.nus
    }

    /// Quadrature weights matching `invariant_nus`, so that
    /// `sum w_i |F_i|^2 = INT dnu |F|^2`.
    pub fn invariant_weights(&self) -> &[f64] {
        &self.nu_weights
    }

    /// Invariant amplitudes `F(nu)`.
    pub fn invariant_amps(&self) -> &[Complex64] {
        &self.amps_inv
    }

    /// Construction-time norm record: the bare transform norm for spectra
    /// measured from a packet, or the squared projection coefficient for
    /// spectra built by projecting an input mode.
    pub fn raw_norm(&self) -> f64 {
        self.raw_norm
    }

    /// Central boost frequency `omega0 / accel` of the underlying packet.
    pub fn peak_nu(&self) -> f64 {
        self.nu0
    }

    /// Frequency grid in `Omega = a nu` units.
    pub fn omega_grid(&self) -> Vec<f64> {
        self.nus.iter().map(|nu| nu * self.a_conv).collect()
    }

    /// Amplitudes in `Omega` units, `(psi, w_Omega) = F(nu) / sqrt(a)`.
    pub fn amps(&self) -> Vec<Complex64> {
        let scale = 1.0 / self.a_conv.sqrt();
        self.amps_inv.iter().map(|&f| f * scale).collect()
    }

    /// Norm `INT dOmega |amps|^2` on the stored grid.
    pub fn norm(&self) -> f64 {
        self.nu_weights
            .iter()
            .zip(&self.amps_inv)
            .map(|(w, f)| w * f.norm_sqr())
            .sum()
    }

    /// Drops the packet's negative-boost-frequency content and renormalizes.
    ///
    /// No negative-frequency amplitudes are stored (the grid covers
    /// `Omega > 0` only); the negative content shows up as `norm() > 1`
    /// through the Klein-Gordon balance `1 = norm - (negative weight)`.
    /// Cutting it therefore rescales the amplitudes by `1/sqrt(norm)`,
    /// which is idempotent and leaves an already-unit spectrum unchanged.
    pub fn apply_zero_frequency_cutoff(&self) -> Self {
        let scale = 1.0 / self.norm().sqrt();
        let mut out = self.clone();
        for f in &mut out.amps_inv {
            *f *= scale;
        }
        out
    }

    /// Builds a spectrum directly from grid data, for controlled-oracle tests.
    #[cfg(test)]
    pub(crate) fn from_raw_parts(
        region: Region,
        kind: ModeKind,
        a_conv: f64,
        mass: f64,
        nus: Vec<f64>,
        nu_weights: Vec<f64>,
        amps_inv: Vec<Complex64>,
    ) -> Self {
        let raw_norm = nu_weights
            .iter()
            .zip(&amps_inv)
            .map(|(w, f)| w * f.norm_sqr())
            .sum();
        let nu0 = nus
            .iter()
            .zip(&amps_inv)
            .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
            .map(|(nu, _)| *nu)
            .unwrap_or(0.0);
        Self {
            a_conv,
            region,
            kind,
            mass,
            nus,
            nu_weights,
            amps_inv,
            raw_norm,
            nu0,
        }
    }

    /// Columnar text dump: `omega  re(amp)  im(amp)`.
    pub fn to_columns(&self) -> String {
        let mut out = String::with_capacity(self.nus.len() * 60);
        out.push_str("# omega re_amp im_amp\n");
        let scale = 1.0 / self.a_conv.sqrt();
        for (nu, f) in self.nus.iter().zip(&self.amps_inv) {
            out.push_str(&format!(
                "{:.16e} {:.16e} {:.16e}\n",
                nu * self.a_conv,
                f.re * scale,
                f.im * scale
            ));
        }
        out
    }
}

/// Composite Gauss-Legendre panels covering `(0, nu_max]`, with panel widths
/// tied to the local oscillation rate of the transform in `nu` (roughly
/// `|ln(m chi / 2)| + ln nu` radians per unit `nu`).
fn nu_panels(pkt: &WavePacket, nu_max: f64) -> (Vec<f64>, Vec<f64>) {
    use crate::quadrature::{GL6_NODES, GL6_WEIGHTS};
    let (lo, hi) = pkt.support();
    let m = pkt.params.mass;
    let lambda = 2.0
        + (m * lo / 2.0)
            .ln()
            .abs()
            .max((m * hi / 2.0).ln().abs());
    let mut nus = Vec::new();
    let mut weights = Vec::new();
    let mut t = 0.0;
    while t < nu_max {
        let width = (std::f64::consts::PI / (3.0 * (lambda + (1.0 + t).ln()))).min(nu_max - t);
        // Map the standard (-1, 1) nodes onto (t, t + width).
        for (node, weight) in GL6_NODES.iter().zip(GL6_WEIGHTS) {
            nus.push(t + 0.5 * width * (node + 1.0));
            weights.push(0.5 * width * weight);
        }
        t += width;
    }
    (nus, weights)
}

/// Frequency cap for wedge spectra. The spectrum peaks at `nu0 = omega0 / accel`
/// and its spread tracks the packet's wavenumber spread mapped through the
/// boost, `dnu ~ x0 (kappa / omega0) dk`, with the same spectral reach
/// `dk = 14 / length` the Minkowski grid uses. Short packets (small
/// `omega0 * length`) therefore need caps well above a fixed multiple of the
/// peak.
fn spectrum_nu_max(params: &ModeParams) -> f64 {
    let nu0 = params.nu0();
    let reach = params.x0 * (params.wavenumber() / params.omega0) * 14.0 / params.length;
    (nu0 + reach).max(2.5 * nu0).max(40.0)
}

/// Computes the boost-frequency spectrum of an output packet.
///
/// The grid extends to the cap from [`spectrum_nu_max`]: the spectrum peaks
/// at `nu = omega0 / accel`, so a cap at a fixed multiple of `a` alone would
/// truncate below the peak. The remaining tail is estimated from the top
/// decade of the grid and must stay below `1e-6`.
pub fn rindler_spectrum(psi: &WavePacket, a_conv: f64) -> Result<RindlerSpectrum, ModeError> {
    if !(a_conv > 0.0 && a_conv.is_finite()) {
        return Err(ModeError::NonPositive {
            name: "a_conv",
            value: a_conv,
        });
    }
    if psi.params.kind == ModeKind::Inertial {
        return Err(ModeError::WrongKind {
            expected: ModeKind::PassiveOutput,
            found: ModeKind::Inertial,
        });
    }
    let nu0 = psi.params.nu0();
    let nu_max = spectrum_nu_max(&psi.params);
    let (nus, weights) = nu_panels(psi, nu_max);
    let amps = wedge_amps_at(psi, &nus)?;
    let raw_norm: f64 = weights
        .iter()
        .zip(&amps)
        .map(|(w, f)| w * f.norm_sqr())
        .sum();
    if raw_norm < PROJECTION_FLOOR {
        return Err(ModeError::VanishingProjection { norm: raw_norm });
    }
    let tail: f64 = nus
        .iter()
        .zip(weights.iter().zip(&amps))
        .filter(|(nu, _)| **nu > 0.9 * nu_max)
        .map(|(_, (w, f))| w * f.norm_sqr())
        .sum::<f64>()
        / raw_norm;
    if tail > TAIL_LIMIT {
        return Err(ModeError::SpectrumTail { nu_max, tail });
    }
    Ok(RindlerSpectrum {
        a_conv,
        region: psi.region(),
        kind: psi.params().kind,
        mass: psi.params.mass,
        nus,
        nu_weights: weights,
        amps_inv: amps,
        raw_norm,
        nu0,
    })
}

/// Builds the active output mode by projecting the input onto the wedge
/// modes: `psi = [INT dOmega (w_Omega, phi) w_Omega] / alpha` with
/// `alpha = sqrt(INT dOmega |(phi, w_Omega)|^2)`.
///
/// The input is first passed through the zero-frequency cutoff (negative
/// Minkowski frequencies projected out and the packet renormalized), which
/// keeps the wedge projection norm at unity instead of
/// `1 + (negative-frequency weight)`.
pub fn build_active_output_mode(
    input: &WavePacket,
    accel: f64,
    a_conv: f64,
) -> Result<(WavePacket, RindlerSpectrum), ModeError> {
    if input.params.kind != ModeKind::Inertial {
        return Err(ModeError::WrongKind {
            expected: ModeKind::Inertial,
            found: input.params.kind,
        });
    }
    if input.frame != Frame::Minkowski {
        return Err(ModeError::FrameExpected {
            expected: Frame::Minkowski,
        });
    }
    if !(accel > 0.0 && accel.is_finite()) {
        return Err(ModeError::NonPositive {
            name: "accel",
            value: accel,
        });
    }
    if !(a_conv > 0.0 && a_conv.is_finite()) {
        return Err(ModeError::NonPositive {
            name: "a_conv",
            value: a_conv,
        });
    }
    let out_params = ModeParams {
        region: input.params.region,
        x0: 1.0 / accel,
        length: input.params.length,
        omega0: input.params.omega0,
        mass: input.params.mass,
        accel,
        kind: ModeKind::ActiveOutput,
    };
    out_params.validate()?;

    let projected = WavePacket::from_minkowski_spectrum(
        &minkowski_spectrum(input)?.apply_zero_frequency_cutoff(),
    )?;

    let nu0 = out_params.nu0();
    let nu_max = spectrum_nu_max(&out_params);
    let (nus, weights) = nu_panels(&projected, nu_max);
    let overlaps = wedge_amps_at(&projected, &nus)?;
    let norm2: f64 = weights
        .iter()
        .zip(&overlaps)
        .map(|(w, c)| w * c.norm_sqr())
        .sum();
    if norm2 < PROJECTION_FLOOR {
        return Err(ModeError::VanishingProjection { norm: norm2 });
    }
    let tail: f64 = nus
        .iter()
        .zip(weights.iter().zip(&overlaps))
        .filter(|(nu, _)| **nu > 0.9 * nu_max)
        .map(|(_, (w, c))| w * c.norm_sqr())
        .sum::<f64>()
        / norm2;
    if tail > TAIL_LIMIT {
        return Err(ModeError::SpectrumTail { nu_max, tail });
    }
    let alpha = norm2.sqrt();
    let amps: Vec<Complex64> = overlaps.iter().map(|&c| c / alpha).collect();

    // Synthesize the slice samples: psi(chi) = INT dnu F(nu) pref(nu)
    // K-hat_nu(m chi), dpsi/dtau = -i sign * accel INT dnu nu F(nu) ... .
    let grid = rindler_grid(&out_params, ACTIVE_PTS_PER_WAVELENGTH);
    let mass = out_params.mass;
    let sign = out_params.region.coordinate_sign();
    let pref: Vec<f64> = nus
        .iter()
        .zip(&weights)
        .map(|(&nu, &w)| {
            let damp = -(-2.0 * std::f64::consts::PI * nu).exp_m1();
            w * (damp / 2.0).sqrt() / std::f64::consts::PI
        })
        .collect();
    let samples: Result<Vec<(Complex64, Complex64)>, ModeError> = grid
        .par_iter()
        .map(|&chi| -> Result<(Complex64, Complex64), ModeError> {
            let mut value = Complex64::new(0.0, 0.0);
            let mut slope = Complex64::new(0.0, 0.0);
            for ((&nu, &p), &f) in nus.iter().zip(&pref).zip(&amps) {
                let khat = bessel_k_imag_scaled(nu, mass * chi)?;
                let term = f * (p * khat);
                value += term;
                slope += term * nu;
            }
            let tderiv = Complex64::new(0.0, -sign * accel) * slope;
            Ok((value, tderiv))
        })
        .collect();
    let samples = samples?;
    let values: Vec<Complex64> = samples.iter().map(|s| s.0).collect();
    let tderivs: Vec<Complex64> = samples.iter().map(|s| s.1).collect();
    let profile = sampled_profile(&grid, &values, &tderivs)?;
    let packet = WavePacket {
        params: out_params,
        frame: Frame::Rindler,
        profile,
        slice_freq: 0.0,
        grid,
        values,
        tderivs,
    };
    let spectrum = RindlerSpectrum {
        a_conv,
        region: out_params.region,
        kind: ModeKind::ActiveOutput,
        mass,
        nus,
        nu_weights: weights,
        amps_inv: amps,
        raw_norm: norm2,
        nu0,
    };
    Ok((packet, spectrum))
}

/// Plane-wave decomposition of a Minkowski-slice packet.
///
/// `amps_pos(k) = (phi, u_k)` and `amps_neg(k) = (phi, conj(u_k))` on a
/// symmetric uniform `k` grid, with `u_k = e^{i(kx - omega t)} / sqrt(4 pi
/// omega)`.
#[derive(Clone, Debug)]
pub struct MinkowskiSpectrum {
    params: ModeParams,
    k_grid: Vec<f64>,
    amps_pos: Vec<Complex64>,
    amps_neg: Vec<Complex64>,
    pos_re: CubicSpline,
    pos_im: CubicSpline,
    neg_re: CubicSpline,
    neg_im: CubicSpline,
}

impl MinkowskiSpectrum {
    fn assemble(
        params: ModeParams,
        k_grid: Vec<f64>,
        amps_pos: Vec<Complex64>,
        amps_neg: Vec<Complex64>,
    ) -> Result<Self, ModeError> {
        let build = |ys: Vec<f64>| {
            CubicSpline::new(k_grid.clone(), ys).map_err(|_| ModeError::InvalidSamples)
        };
        Ok(MinkowskiSpectrum {
            params,
            pos_re: build(amps_pos.iter().map(|v| v.re).collect())?,
            pos_im: build(amps_pos.iter().map(|v| v.im).collect())?,
            neg_re: build(amps_neg.iter().map(|v| v.re).collect())?,
            neg_im: build(amps_neg.iter().map(|v| v.im).collect())?,
            k_grid,
            amps_pos,
            amps_neg,
        })
    }

    pub fn params(&self) -> &ModeParams {
        &self.params
    }

    pub fn k_grid(&self) -> &[f64] {
        &self.k_grid
    }

    pub fn amps_pos(&self) -> &[Complex64] {
        &self.amps_pos
    }

    pub fn amps_neg(&self) -> &[Complex64] {
        &self.amps_neg
    }

    /// Interpolated `(phi, u_k)`; zero outside the stored grid.
    pub fn amps_pos_at(&self, k: f64) -> Complex64 {
        if k < self.k_grid[0] || k > *self.k_grid.last().expect("non-empty") {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::new(self.pos_re.eval(k), self.pos_im.eval(k))
    }

    /// Interpolated `(phi, conj(u_k))`; zero outside the stored grid.
    pub fn amps_neg_at(&self, k: f64) -> Complex64 {
        if k < self.k_grid[0] || k > *self.k_grid.last().expect("non-empty") {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::new(self.neg_re.eval(k), self.neg_im.eval(k))
    }

    fn weight_of(&self, amps: &[Complex64]) -> f64 {
        let ys: Vec<Complex64> = amps
            .iter()
            .map(|a| Complex64::new(a.norm_sqr(), 0.0))
            .collect();
        simpson_uniform(self.k_grid[1] - self.k_grid[0], &ys).re
    }

    /// `INT dk |amps_pos|^2`.
    pub fn positive_weight(&self) -> f64 {
        self.weight_of(&self.amps_pos)
    }

    /// `INT dk |amps_neg|^2`.
    pub fn negative_weight(&self) -> f64 {
        self.weight_of(&self.amps_neg)
    }

    /// Klein-Gordon norm `INT dk (|amps_pos|^2 - |amps_neg|^2)`.
    pub fn kg_norm(&self) -> f64 {
        self.positive_weight() - self.negative_weight()
    }

    /// Projects out the negative-frequency amplitudes and renormalizes to
    /// unit Klein-Gordon norm. A spectrum with negative-frequency KG weight
    /// `w` (i.e. KG norm `1 = P - (-w)` with `P = INT |pos|^2`) is rescaled
    /// by `1 / sqrt(P)`; the positive-frequency shape is unchanged.
    pub fn apply_zero_frequency_cutoff(&self) -> Self {
        let p = self.positive_weight();
        let scale = 1.0 / p.sqrt();
        let amps_pos: Vec<Complex64> = self.amps_pos.iter().map(|&a| a * scale).collect();
        let amps_neg = vec![Complex64::new(0.0, 0.0); self.amps_neg.len()];
        Self::assemble(self.params, self.k_grid.clone(), amps_pos, amps_neg)
            .expect("rescaled spectrum stays valid")
    }

    /// Columnar text dump: `k  re(pos)  im(pos)  re(neg)  im(neg)`.
    pub fn to_columns(&self) -> String {
        let mut out = String::with_capacity(self.k_grid.len() * 100);
        out.push_str("# k re_pos im_pos re_neg im_neg\n");
        for (i, &k) in self.k_grid.iter().enumerate() {
            let p = self.amps_pos[i];
            let n = self.amps_neg[i];
            out.push_str(&format!(
                "{:.16e} {:.16e} {:.16e} {:.16e} {:.16e}\n",
                k, p.re, p.im, n.re, n.im
            ));
        }
        out
    }
}

/// Decomposes a Minkowski-frame packet into plane waves.
///
/// The grid spans `|k| <= kappa + 14 / L` (the envelope transform decays
/// like `exp(-(k - kappa)^2 L^2 / 4)`, so the discarded weight is far below
/// `1e-8`) with spacing resolving the `e^{i k x0}` phase of the transform.
pub fn minkowski_spectrum(phi: &WavePacket) -> Result<MinkowskiSpectrum, ModeError> {
    if phi.frame != Frame::Minkowski {
        return Err(ModeError::FrameExpected {
            expected: Frame::Minkowski,
        });
    }
    let params = phi.params;
    let kappa = params.wavenumber();
    let k_max = kappa + 14.0 / params.length;
    let (_, hi) = phi.support();
    // Resolve the fastest transform phase e^{ikx} at x = hi with
    // ACTIVE_PTS_PER_WAVELENGTH points per period (the Simpson error of the
    // synthesis integral is what limits reconstruction accuracy).
    let dk_target = 2.0 * std::f64::consts::PI / (ACTIVE_PTS_PER_WAVELENGTH * hi);
    let half = (k_max / dk_target).ceil() as usize;
    let n = 2 * half + 1;
    let k_grid: Vec<f64> = (0..n)
        .map(|i| k_max * (i as f64 - half as f64) / half as f64)
        .collect();
    let sigma = params.region.coordinate_sign();
    let (lo, hi) = phi.support();
    let hint = phi.wavelength_hint();

    // A(k) = INT conj(phi) e^{ikx} dx, B(k) = INT conj(dphi/dt) e^{ikx} dx
    // evaluated on the internal (mirrored) coordinates. The absolute
    // tolerance sits above the Kronrod error-estimate floor (~1e-13 for
    // integrands of this magnitude): far-tail amplitudes cancel to below
    // that floor and only need to come out numerically negligible.
    let fourier = |k: f64| -> Result<(Complex64, Complex64), ModeError> {
        let mut req = Quadrature::with_tol(Tolerance::ONE_D);
        req.tol.abs = 1e-12;
        let k_period = 2.0 * std::f64::consts::PI / k.abs().max(1e-300);
        req.osc_period = Some(k_period.min(hint));
        let a = integrate_1d(
            |x| phi.value_at(x).conj() * Complex64::from_polar(1.0, k * x),
            Axis::Finite { lo, hi },
            &req,
        )?;
        let b = integrate_1d(
            |x| phi.tderiv_at(x).conj() * Complex64::from_polar(1.0, k * x),
            Axis::Finite { lo, hi },
            &req,
        )?;
        if !(a.converged && b.converged) {
            return Err(ModeError::NoConvergence {
                context: "computing a plane-wave overlap",
            });
        }
        Ok((a.value, b.value))
    };

    let rows: Result<Vec<(Complex64, Complex64)>, ModeError> = k_grid
        .par_iter()
        .map(|&k| -> Result<(Complex64, Complex64), ModeError> {
            let omega = (k * k + params.mass * params.mass).sqrt();
            let root = (4.0 * std::f64::consts::PI * omega).sqrt();
            let (a_pos, b_pos) = fourier(sigma * k)?;
            let (a_neg, b_neg) = fourier(-sigma * k)?;
            let pos = (a_pos * omega - Complex64::new(0.0, 1.0) * b_pos) / root;
            let neg = (-a_neg * omega - Complex64::new(0.0, 1.0) * b_neg) / root;
            Ok((pos, neg))
        })
        .collect();
    let rows = rows?;
    let amps_pos: Vec<Complex64> = rows.iter().map(|r| r.0).collect();
    let amps_neg: Vec<Complex64> = rows.iter().map(|r| r.1).collect();
    MinkowskiSpectrum::assemble(params, k_grid, amps_pos, amps_neg)
}
