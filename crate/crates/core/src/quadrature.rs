//! Adaptive Gauss-Kronrod integration over finite and semi-infinite axes.
//!
//! The integrands produced elsewhere in this crate are oscillatory with a
//! phase scale known to the caller, and several have integrable endpoint
//! singularities of the form `x^{-1} * (rapidly decaying)`. Semi-infinite
//! axes are therefore mapped to `(0, 1)` with an exp-sinh double-exponential
//! substitution, which clusters nodes at the finite endpoint and compresses
//! the tail, and finite oscillatory axes can be pre-split into half-period
//! panels before adaptive refinement.
//!
//! Evaluation is strictly serial and deterministic: repeated calls with the
//! same request produce bit-identical results. Parallelism belongs to the
//! caller (independent integrals are embarrassingly parallel).

use std::collections::BinaryHeap;

use num_complex::Complex64;
use thiserror::Error;

/// 15-point Kronrod abscissae on [-1, 1] (nonnegative half), QUADPACK dqk15.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_7,
    0.949_107_912_342_758_524_526_189_7,
    0.864_864_423_359_769_072_789_712_8,
    0.741_531_185_599_394_439_863_864_8,
    0.586_087_235_467_691_130_294_144_8,
    0.405_845_151_377_397_166_906_606_4,
    0.207_784_955_007_898_467_600_689_4,
    0.0,
];
/// Kronrod weights matching `XGK`.
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_0,
    0.063_092_092_629_978_553_290_700_7,
    0.104_790_010_322_250_183_839_876_3,
    0.140_653_259_715_525_918_745_189_6,
    0.169_004_726_639_267_902_826_583_4,
    0.190_350_578_064_785_409_913_256_4,
    0.204_432_940_075_298_892_414_162_0,
    0.209_482_141_084_727_828_012_999_2,
];
/// Embedded 7-point Gauss weights (nodes are XGK[1], XGK[3], XGK[5], XGK[7]).
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_4,
    0.279_705_391_489_276_667_901_467_8,
    0.381_830_050_505_118_944_950_369_8,
    0.417_959_183_673_469_387_755_102_0,
];

/// 6-point Gauss-Legendre rule on [-1, 1]; used by fixed panel grids in the
/// mode-spectrum builders.
pub(crate) const GL6_NODES: [f64; 6] = [
    -0.932_469_514_203_152_1,
    -0.661_209_386_466_264_5,
    -0.238_619_186_083_196_9,
    0.238_619_186_083_196_9,
    0.661_209_386_466_264_5,
    0.932_469_514_203_152_1,
];
pub(crate) const GL6_WEIGHTS: [f64; 6] = [
    0.171_324_492_379_170_3,
    0.360_761_573_048_138_6,
    0.467_913_934_572_691_0,
    0.467_913_934_572_691_0,
    0.360_761_573_048_138_6,
    0.171_324_492_379_170_3,
];

/// Steepness of the exp-sinh map for semi-infinite axes.
const EXP_SINH_C: f64 = std::f64::consts::FRAC_PI_2;
/// Largest exponent fed to `exp` inside the semi-infinite map; beyond this the
/// image point is clamped (any integrand admissible under the module contract
/// has no mass there).
const EXP_CLAMP: f64 = 700.0;

/// Sample location reported by a non-finite-integrand error. `y` is set for
/// two-dimensional requests.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Abscissa {
    pub x: f64,
    pub y: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadratureError {
    #[error("integrand returned a non-finite value at x = {:?}{}", .0.x, match .0.y { Some(y) => format!(", y = {y:?}"), None => String::new() })]
    NonFiniteSample(Abscissa),
    #[error("invalid integration axis: lo = {lo}, hi = {hi}")]
    InvalidAxis { lo: f64, hi: f64 },
    #[error("invalid tolerances: rel = {rel}, abs = {abs}, max_subdivisions = {max_subdivisions}")]
    InvalidTolerance {
        rel: f64,
        abs: f64,
        max_subdivisions: usize,
    },
}

/// One integration axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Axis {
    Finite { lo: f64, hi: f64 },
    /// `[lo, +inf)`.
    SemiInfinite { lo: f64 },
}

impl Axis {
    fn validate(&self) -> Result<(), QuadratureError> {
        match *self {
            Axis::Finite { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return Err(QuadratureError::InvalidAxis { lo, hi });
                }
            }
            Axis::SemiInfinite { lo } => {
                if !lo.is_finite() {
                    return Err(QuadratureError::InvalidAxis { lo, hi: f64::INFINITY });
                }
            }
        }
        Ok(())
    }
}

/// Accuracy request. Convergence means the accumulated error estimate drops
/// below `max(abs, rel * |value|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
    /// Budget of panel bisections before giving up (the best estimate is
    /// still returned, flagged unconverged).
    pub max_subdivisions: usize,
}

impl Tolerance {
    /// Default for one-dimensional requests.
    pub const ONE_D: Tolerance = Tolerance {
        rel: 1e-8,
        abs: 1e-14,
        max_subdivisions: 4000,
    };
    /// Default for two-dimensional requests (outer axis; the inner axis is
    /// automatically run 10x tighter).
    pub const TWO_D: Tolerance = Tolerance {
        rel: 1e-5,
        abs: 1e-14,
        max_subdivisions: 2000,
    };

    fn validate(&self) -> Result<(), QuadratureError> {
        if self.rel > 0.0 && self.abs > 0.0 && self.max_subdivisions >= 1 {
            Ok(())
        } else {
            Err(QuadratureError::InvalidTolerance {
                rel: self.rel,
                abs: self.abs,
                max_subdivisions: self.max_subdivisions,
            })
        }
    }
}

/// Full request configuration shared by `integrate_1d` / `integrate_2d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub tol: Tolerance,
    /// Oscillation period of the integrand along the (outer) axis, if known.
    /// Finite axes are pre-split into half-period panels.
    pub osc_period: Option<f64>,
    /// Oscillation period along the inner axis of a 2D request.
    pub osc_period_inner: Option<f64>,
}

impl Quadrature {
    pub fn with_tol(tol: Tolerance) -> Self {
        Quadrature {
            tol,
            osc_period: None,
            osc_period_inner: None,
        }
    }
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature::with_tol(Tolerance::ONE_D)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOutcome<V> {
    pub value: V,
    pub error_estimate: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Scalar types an integrand may return.
pub trait IntegrandValue: Copy {
    fn zero() -> Self;
    fn add(self, other: Self) -> Self;
    fn sub(self, other: Self) -> Self;
    fn scale(self, s: f64) -> Self;
    fn norm(self) -> f64;
    fn is_finite(self) -> bool;
}

impl IntegrandValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn sub(self, other: Self) -> Self {
        self - other
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn norm(self) -> f64 {
        self.abs()
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
}

impl IntegrandValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn sub(self, other: Self) -> Self {
        self - other
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn norm(self) -> f64 {
        Complex64::norm(self)
    }
    fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

struct Panel<V> {
    lo: f64,
    hi: f64,
    value: V,
    error: f64,
    seq: u64,
}

impl<V> PartialEq for Panel<V> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error && self.seq == other.seq
    }
}
impl<V> Eq for Panel<V> {}
impl<V> PartialOrd for Panel<V> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl<V> Ord for Panel<V> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // Worst error first; sequence number breaks ties deterministically.
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Evaluates the 15-point Gauss-Kronrod rule on `[lo, hi]`.
fn gk15<V, F>(f: &mut F, lo: f64, hi: f64, evaluations: &mut usize) -> Result<(V, f64), f64>
where
    V: IntegrandValue,
    F: FnMut(f64) -> V,
{
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);

    let mut samples = [V::zero(); 15];
    for j in 0..7 {
        let x1 = center - half * XGK[j];
        let x2 = center + half * XGK[j];
        samples[j] = f(x1);
        samples[7 + j] = f(x2);
        *evaluations += 2;
        if !samples[j].is_finite() {
            return Err(x1);
        }
        if !samples[7 + j].is_finite() {
            return Err(x2);
        }
    }
    samples[14] = f(center);
    *evaluations += 1;
    if !samples[14].is_finite() {
        return Err(center);
    }

    let mut resk = samples[14].scale(WGK[7]);
    let mut resabs = samples[14].norm() * WGK[7];
    for j in 0..7 {
        let pair = samples[j].add(samples[7 + j]);
        resk = resk.add(pair.scale(WGK[j]));
        resabs += WGK[j] * (samples[j].norm() + samples[7 + j].norm());
    }
    let mut resg = samples[14].scale(WG[3]);
    for m in 0..3 {
        let j = 2 * m + 1;
        resg = resg.add(samples[j].add(samples[7 + j]).scale(WG[m]));
    }

    let reskh = resk.scale(0.5);
    let mut resasc = WGK[7] * samples[14].sub(reskh).norm();
    for j in 0..7 {
        resasc += WGK[j] * (samples[j].sub(reskh).norm() + samples[7 + j].sub(reskh).norm());
    }

    let value = resk.scale(half);
    resabs *= half.abs();
    resasc *= half.abs();
    let mut err = resk.sub(resg).norm() * half.abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    let tiny = f64::MIN_POSITIVE / (50.0 * f64::EPSILON);
    if resabs > tiny {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    Ok((value, err))
}

struct AdaptState<V> {
    heap: BinaryHeap<Panel<V>>,
    frozen_value: V,
    frozen_error: f64,
    value: V,
    error: f64,
    seq: u64,
    evaluations: usize,
}

fn adapt<V, F>(
    f: &mut F,
    initial: &[(f64, f64)],
    tol: &Tolerance,
) -> Result<QuadOutcome<V>, f64>
where
    V: IntegrandValue,
    F: FnMut(f64) -> V,
{
    let mut st = AdaptState {
        heap: BinaryHeap::new(),
        frozen_value: V::zero(),
        frozen_error: 0.0,
        value: V::zero(),
        error: 0.0,
        seq: 0,
        evaluations: 0,
    };

    for &(lo, hi) in initial {
        let (value, error) = gk15(f, lo, hi, &mut st.evaluations)?;
        st.value = st.value.add(value);
        st.error += error;
        st.heap.push(Panel {
            lo,
            hi,
            value,
            error,
            seq: st.seq,
        });
        st.seq += 1;
    }

    let tolerance_met =
        |value: &V, error: f64| error <= tol.abs.max(tol.rel * value.norm());

    let mut subdivisions = 0usize;
    while !tolerance_met(&st.value, st.error + st.frozen_error) {
        if subdivisions >= tol.max_subdivisions {
            break;
        }
        let Some(worst) = st.heap.pop() else { break };
        let mid = 0.5 * (worst.lo + worst.hi);
        if !(mid > worst.lo && mid < worst.hi) {
            // Panel is at floating-point resolution; retire it.
            st.frozen_value = st.frozen_value.add(worst.value);
            st.frozen_error += worst.error;
            st.value = st.value.sub(worst.value);
            st.error -= worst.error;
            continue;
        }
        subdivisions += 1;
        let (lv, le) = gk15(f, worst.lo, mid, &mut st.evaluations)?;
        let (rv, re) = gk15(f, mid, worst.hi, &mut st.evaluations)?;
        st.value = st.value.sub(worst.value).add(lv).add(rv);
        st.error += le + re - worst.error;
        st.heap.push(Panel {
            lo: worst.lo,
            hi: mid,
            value: lv,
            error: le,
            seq: st.seq,
        });
        st.seq += 1;
        st.heap.push(Panel {
            lo: mid,
            hi: worst.hi,
            value: rv,
            error: re,
            seq: st.seq,
        });
        st.seq += 1;
    }

    // Re-sum in coordinate order: removes the drift the incremental updates
    // accumulate and keeps the result independent of heap internals.
    let mut panels = st.heap.into_vec();
    panels.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    let mut value = st.frozen_value;
    let mut error = st.frozen_error;
    for p in &panels {
        value = value.add(p.value);
        error += p.error;
    }

    let converged = tolerance_met(&value, error);
    Ok(QuadOutcome {
        value,
        error_estimate: error,
        evaluations: st.evaluations,
        converged,
    })
}

fn initial_panels(lo: f64, hi: f64, osc_period: Option<f64>, default_n: usize) -> Vec<(f64, f64)> {
    let n = match osc_period {
        Some(p) if p > 0.0 && p.is_finite() => {
            let half_periods = (hi - lo) / (0.5 * p);
            (half_periods.ceil() as usize).clamp(default_n, 100_000)
        }
        _ => default_n,
    };
    let h = (hi - lo) / n as f64;
    (0..n)
        .map(|i| {
            let a = lo + h * i as f64;
            let b = if i + 1 == n { hi } else { lo + h * (i + 1) as f64 };
            (a, b)
        })
        .collect()
}

/// Integrates over caller-supplied initial panels. Used where the caller
/// knows the integrand's phase structure better than a uniform pre-split
/// can express (e.g. specfun's stationary-phase contour integrals).
pub(crate) fn integrate_panels<V, F>(
    mut f: F,
    panels: &[(f64, f64)],
    tol: &Tolerance,
) -> Result<QuadOutcome<V>, QuadratureError>
where
    V: IntegrandValue,
    F: FnMut(f64) -> V,
{
    tol.validate()?;
    adapt(&mut f, panels, tol)
        .map_err(|x| QuadratureError::NonFiniteSample(Abscissa { x, y: None }))
}

/// Integrates `f` along `axis`.
///
/// Semi-infinite axes are transformed with `x = lo + exp(c sinh w)`,
/// `w = ln(t / (1 - t))`, `t in (0, 1)`; the integrand is evaluated at the
/// image points, so endpoint behavior like `x^{-1} * (decaying)` is resolved
/// without the caller doing anything special.
pub fn integrate_1d<V, F>(
    mut f: F,
    axis: Axis,
    req: &Quadrature,
) -> Result<QuadOutcome<V>, QuadratureError>
where
    V: IntegrandValue,
    F: FnMut(f64) -> V,
{
    axis.validate()?;
    req.tol.validate()?;
    match axis {
        Axis::Finite { lo, hi } => {
            let panels = initial_panels(lo, hi, req.osc_period, 4);
            adapt(&mut f, &panels, &req.tol)
                .map_err(|x| QuadratureError::NonFiniteSample(Abscissa { x, y: None }))
        }
        Axis::SemiInfinite { lo } => {
            let mut last_x = lo;
            let mut g = |t: f64| {
                let w = (t / (1.0 - t)).ln();
                let expo = EXP_SINH_C * w.sinh();
                let expo_clamped = expo.clamp(-EXP_CLAMP, EXP_CLAMP);
                let offset = expo_clamped.exp();
                let x = lo + offset;
                last_x = x;
                let fx = f(x);
                if fx.norm() == 0.0 {
                    return V::zero();
                }
                // dx/dt = offset * c * cosh(w) / (t (1 - t))
                let jac = offset * EXP_SINH_C * w.cosh() / (t * (1.0 - t));
                fx.scale(jac)
            };
            let panels = initial_panels(0.0, 1.0, None, 8);
            let out = adapt(&mut g, &panels, &req.tol);
            drop(g);
            out.map_err(|_t| QuadratureError::NonFiniteSample(Abscissa { x: last_x, y: None }))
        }
    }
}

/// Integrates `f(x, y)` over `axes.0` (outer, `x`) and `axes.1` (inner, `y`)
/// as an iterated integral. The inner axis runs at 10x tighter tolerance per
/// the module contract; `converged` requires every inner integral and the
/// outer one to converge.
pub fn integrate_2d<V, F>(
    mut f: F,
    axes: (Axis, Axis),
    req: &Quadrature,
) -> Result<QuadOutcome<V>, QuadratureError>
where
    V: IntegrandValue,
    F: FnMut(f64, f64) -> V,
{
    axes.0.validate()?;
    axes.1.validate()?;
    req.tol.validate()?;

    let inner_req = Quadrature {
        tol: Tolerance {
            rel: req.tol.rel / 10.0,
            abs: req.tol.abs / 10.0,
            max_subdivisions: req.tol.max_subdivisions,
        },
        osc_period: req.osc_period_inner,
        osc_period_inner: None,
    };

    let mut inner_evals = 0usize;
    let mut inner_converged = true;
    let mut inner_worst_rel = 0.0f64;
    let mut failure: Option<Abscissa> = None;

    let outer = integrate_1d(
        |x| {
            if failure.is_some() {
                return V::zero();
            }
            match integrate_1d(|y| f(x, y), axes.1, &inner_req) {
                Ok(r) => {
                    inner_evals += r.evaluations;
                    inner_converged &= r.converged;
                    let denom = r.value.norm().max(inner_req.tol.abs);
                    inner_worst_rel = inner_worst_rel.max(r.error_estimate / denom);
                    r.value
                }
                Err(QuadratureError::NonFiniteSample(a)) => {
                    failure = Some(Abscissa { x, y: Some(a.x) });
                    V::zero()
                }
                // Axis and tolerance were validated above.
                Err(_) => unreachable!("inner request validated"),
            }
        },
        axes.0,
        &Quadrature {
            tol: req.tol,
            osc_period: req.osc_period,
            osc_period_inner: None,
        },
    )?;

    if let Some(a) = failure {
        return Err(QuadratureError::NonFiniteSample(a));
    }
    let error_estimate = outer.error_estimate + inner_worst_rel * outer.value.norm();
    let converged = outer.converged
        && inner_converged
        && error_estimate <= req.tol.abs.max(req.tol.rel * outer.value.norm());
    Ok(QuadOutcome {
        value: outer.value,
        error_estimate,
        evaluations: outer.evaluations + inner_evals,
        converged,
    })
}
