//! Two-mode Gaussian states, the wedge channel `(M, N)`, and its reductions.
//!
//! Quadrature ordering is `(q_I, p_I, q_II, p_II)` throughout, covariance
//! normalized so the vacuum is the identity matrix. The commutation relations
//! are encoded by the block-diagonal symplectic form [`symplectic_form`]; a
//! covariance matrix is physical iff `sigma + i Sigma >= 0`, and a channel
//! `(M, N)` is completely positive iff `N + i Sigma - i M Sigma M^T >= 0`.
//! Both conditions are checked through [`hermitian_min_eigenvalue`], which
//! embeds the Hermitian test matrix `A + iB` into the real symmetric
//! `[[A, -B], [B, A]]` whose spectrum is that of `A + iB` doubled.
//!
//! The channel acts as `X -> M X`, `sigma -> M sigma M^T + N`. Tracing out
//! the second mode leaves a single-mode channel whose invariants — rank,
//! transmissivity `tau = det M_sm`, thermal number `nbar` — identify it as a
//! lossy channel with canonical form `M_c = sqrt(tau) 1`,
//! `N_c = (1 - tau)(2 nbar + 1) 1`; the capacity bounds below are functions
//! of those invariants alone.

use nalgebra::{Matrix2, Matrix4, SMatrix, Vector2, Vector4};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::modes::{ModeParams, Region};
use crate::noise::Geometry;

/// Eigenvalue floor below which a positivity check counts as violated;
/// tolerates accumulated f64 rounding in the channel assembly.
pub const PHYSICALITY_TOL: f64 = 1e-8;

/// Switch width for the degenerate `tau = 1` branch of the thermal number.
const UNIT_TAU_TOL: f64 = 1e-12;

/// Errors from state construction, channel assembly, and reductions.
#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("covariance matrix violates the uncertainty relation (min eigenvalue {min_eig:.3e})")]
    UnphysicalState { min_eig: f64 },
    #[error("covariance matrix is not symmetric (asymmetry {asym:.3e})")]
    AsymmetricCovariance { asym: f64 },
    #[error("matrix entries must be finite")]
    NonFinite,
    #[error("channel is not completely positive (min eigenvalue {min_eig:.3e})")]
    NotCompletelyPositive { min_eig: f64 },
    #[error(
        "channel output violates the uncertainty relation (min eigenvalue {min_eig:.3e}); \
         the channel matrices are inconsistent"
    )]
    InconsistentOutput { min_eig: f64 },
    #[error("single-mode noise block has determinant {det:.3e} < 0")]
    NegativeNoiseDeterminant { det: f64 },
    #[error("transmissivity {tau} outside [-1, 1]")]
    TransmissivityRange { tau: f64 },
    #[error("{name} = {value} outside its domain ({domain})")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },
}

/// Logarithm base used by entropic quantities; entanglement defaults to
/// nats and capacities to bits by convention, both selectable at every
/// call site (the command line threads one configured base through both).
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    /// Base-2 logarithms (bits).
    Two,
    /// Natural logarithms (nats).
    Natural,
}

impl LogBase {
    /// Logarithm of `x` in this base.
    pub fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Two => x.log2(),
            LogBase::Natural => x.ln(),
        }
    }
}

/// Two-mode symplectic form `Sigma`: `[[0, 1], [-1, 0]]` per mode in
/// `(q_I, p_I, q_II, p_II)` ordering.
pub fn symplectic_form() -> Matrix4<f64> {
    let mut s = Matrix4::zeros();
    s[(0, 1)] = 1.0;
    s[(1, 0)] = -1.0;
    s[(2, 3)] = 1.0;
    s[(3, 2)] = -1.0;
    s
}

/// Smallest eigenvalue of the Hermitian matrix `A + iB`, with `A` real
/// symmetric and `B` real antisymmetric.
pub fn hermitian_min_eigenvalue(a: &Matrix4<f64>, b: &Matrix4<f64>) -> f64 {
    let mut m = SMatrix::<f64, 8, 8>::zeros();
    m.fixed_view_mut::<4, 4>(0, 0).copy_from(a);
    m.fixed_view_mut::<4, 4>(4, 4).copy_from(a);
    m.fixed_view_mut::<4, 4>(0, 4).copy_from(&(-b));
    m.fixed_view_mut::<4, 4>(4, 0).copy_from(b);
    // Guard the eigensolver against f64-level asymmetry in the inputs.
    m = (m + m.transpose()) * 0.5;
    m.symmetric_eigen().eigenvalues.min()
}

/// Smallest eigenvalue of `sigma + i Sigma`; non-negative (within
/// [`PHYSICALITY_TOL`]) exactly when `sigma` is a physical covariance matrix.
pub fn uncertainty_min_eigenvalue(cov: &Matrix4<f64>) -> f64 {
    hermitian_min_eigenvalue(cov, &symplectic_form())
}

fn check_symmetric(m: &Matrix4<f64>) -> Result<Matrix4<f64>, ChannelError> {
    if !m.iter().all(|v| v.is_finite()) {
        return Err(ChannelError::NonFinite);
    }
    let scale = m.abs().max().max(1.0);
    let asym = (m - m.transpose()).abs().max();
    if asym > 1e-12 * scale {
        return Err(ChannelError::AsymmetricCovariance { asym });
    }
    Ok((m + m.transpose()) * 0.5)
}

/// A two-mode Gaussian state: first moments and covariance matrix.
///
/// Construction validates symmetry and the uncertainty relation, so every
/// value of this type is a physical state.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianState {
    first_moments: Vector4<f64>,
    cov: Matrix4<f64>,
}

impl GaussianState {
    /// Builds a state from raw moments, enforcing symmetry of `cov` (to
    /// 1e-12 relative) and `cov + i Sigma >= -`[`PHYSICALITY_TOL`].
    pub fn new(first_moments: Vector4<f64>, cov: Matrix4<f64>) -> Result<Self, ChannelError> {
        if !first_moments.iter().all(|v| v.is_finite()) {
            return Err(ChannelError::NonFinite);
        }
        let cov = check_symmetric(&cov)?;
        let min_eig = uncertainty_min_eigenvalue(&cov);
        if min_eig < -PHYSICALITY_TOL {
            return Err(ChannelError::UnphysicalState { min_eig });
        }
        Ok(Self { first_moments, cov })
    }

    /// The two-mode vacuum: zero moments, identity covariance.
    pub fn vacuum() -> Self {
        Self {
            first_moments: Vector4::zeros(),
            cov: Matrix4::identity(),
        }
    }

    /// Coherent state: vacuum covariance displaced to `first_moments`.
    pub fn coherent(first_moments: Vector4<f64>) -> Result<Self, ChannelError> {
        Self::new(first_moments, Matrix4::identity())
    }

    /// Two-mode squeezed thermal state with squeezing `r` and symmetric
    /// thermal occupation `n >= 0` in both modes:
    ///
    /// ```text
    /// sigma = (1 + 2n) [ cosh2r I_2      sinh2r diag(1,-1) ]
    ///                  [ sinh2r diag(1,-1)      cosh2r I_2 ]
    /// ```
    ///
    /// `n = 0` gives the two-mode squeezed vacuum; `r = 0, n = 0` the vacuum.
    pub fn squeezed_thermal(r: f64, n: f64) -> Result<Self, ChannelError> {
        if !(n >= 0.0 && n.is_finite()) {
            return Err(ChannelError::Domain {
                name: "n",
                value: n,
                domain: "n >= 0",
            });
        }
        if !r.is_finite() {
            return Err(ChannelError::Domain {
                name: "r",
                value: r,
                domain: "finite",
            });
        }
        let (c, s) = ((2.0 * r).cosh(), (2.0 * r).sinh());
        let w = 1.0 + 2.0 * n;
        let cov = Matrix4::new(
            w * c,
            0.0,
            w * s,
            0.0, //
            0.0,
            w * c,
            0.0,
            -w * s, //
            w * s,
            0.0,
            w * c,
            0.0, //
            0.0,
            -w * s,
            0.0,
            w * c,
        );
        Self::new(Vector4::zeros(), cov)
    }

    /// First statistical moments `(q_I, p_I, q_II, p_II)`.
    pub fn first_moments(&self) -> &Vector4<f64> {
        &self.first_moments
    }

    /// Covariance matrix (vacuum = identity).
    pub fn cov(&self) -> &Matrix4<f64> {
        &self.cov
    }

    /// Moments of one mode: the marginal state after tracing out the other.
    pub fn marginal(&self, region: Region) -> (Vector2<f64>, Matrix2<f64>) {
        let off = match region {
            Region::I => 0,
            Region::II => 2,
        };
        (
            self.first_moments.fixed_rows::<2>(off).into(),
            self.cov.fixed_view::<2, 2>(off, off).into(),
        )
    }
}

/// The assembled two-mode Gaussian channel `(M, N)` together with the
/// geometry and the four mode descriptors (inputs I, II then outputs I, II)
/// that produced it.
///
/// Construction verifies complete positivity, `N + i Sigma - i M Sigma M^T
/// >= -`[`PHYSICALITY_TOL`], so every value of this type maps physical
/// states to physical states.
#[derive(Clone, Debug)]
pub struct ChannelMatrices {
    m: Matrix4<f64>,
    n: Matrix4<f64>,
    geometry: Geometry,
    modes: [ModeParams; 4],
}

impl ChannelMatrices {
    /// Builds and validates a channel from its transfer and noise blocks.
    pub fn new(
        m: Matrix4<f64>,
        n: Matrix4<f64>,
        geometry: Geometry,
        modes: [ModeParams; 4],
    ) -> Result<Self, ChannelError> {
        if !m.iter().all(|v| v.is_finite()) {
            return Err(ChannelError::NonFinite);
        }
        let n = check_symmetric(&n)?;
        let ch = Self {
            m,
            n,
            geometry,
            modes,
        };
        let min_eig = ch.cp_min_eigenvalue();
        if min_eig < -PHYSICALITY_TOL {
            return Err(ChannelError::NotCompletelyPositive { min_eig });
        }
        Ok(ch)
    }

    /// Transfer matrix `M`.
    pub fn transfer(&self) -> &Matrix4<f64> {
        &self.m
    }

    /// Noise matrix `N`.
    pub fn noise(&self) -> &Matrix4<f64> {
        &self.n
    }

    /// Wedge geometry the channel was built for.
    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    /// The four mode descriptors: inputs (I, II), then outputs (I, II).
    pub fn mode_descriptors(&self) -> &[ModeParams; 4] {
        &self.modes
    }

    /// Smallest eigenvalue of the complete-positivity matrix
    /// `N + i(Sigma - M Sigma M^T)`; the channel is CP iff this is
    /// non-negative (within tolerance).
    pub fn cp_min_eigenvalue(&self) -> f64 {
        let sig = symplectic_form();
        let b = sig - self.m * sig * self.m.transpose();
        hermitian_min_eigenvalue(&self.n, &b)
    }

    /// Exact channel action `X -> M X`, `sigma -> M sigma M^T + N`.
    ///
    /// A completely positive channel cannot turn a physical input
    /// unphysical, so a failed output check is reported as
    /// [`ChannelError::InconsistentOutput`].
    pub fn apply(&self, state: &GaussianState) -> Result<GaussianState, ChannelError> {
        let moments = self.m * state.first_moments;
        let cov = self.m * state.cov * self.m.transpose() + self.n;
        GaussianState::new(moments, cov).map_err(|e| match e {
            ChannelError::UnphysicalState { min_eig } => {
                ChannelError::InconsistentOutput { min_eig }
            }
            other => other,
        })
    }

    /// Noise-free approximation `sigma - 1 -> M (sigma - 1) M^T`,
    /// `X -> M X`: exact on the vacuum, and differing from [`Self::apply`]
    /// by `N - (1 - M M^T)` entrywise. Valid when the noise block is
    /// negligible against the input's distance from the vacuum.
    ///
    /// The output skips the uncertainty check: the approximation may leave
    /// an output marginally unphysical at the size of the dropped noise.
    pub fn apply_approx(&self, state: &GaussianState) -> GaussianState {
        let cov = Matrix4::identity()
            + self.m * (state.cov - Matrix4::identity()) * self.m.transpose();
        GaussianState {
            first_moments: self.m * state.first_moments,
            cov: (cov + cov.transpose()) * 0.5,
        }
    }

    /// Single-mode channel left on mode I after tracing out mode II: the
    /// upper-left blocks of `M` and `N`. For the block-diagonal transfer
    /// matrices built here, the noise block equals
    /// `(1 + N_I) 1 - M_sm M_sm^T`.
    pub fn reduce(&self) -> SingleModeChannel {
        SingleModeChannel {
            transfer: self.m.fixed_view::<2, 2>(0, 0).into(),
            noise: self.n.fixed_view::<2, 2>(0, 0).into(),
        }
    }
}

/// A single-mode Gaussian channel `X -> M X`, `sigma -> M sigma M^T + N`
/// obtained by reduction of the two-mode channel.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct SingleModeChannel {
    pub transfer: Matrix2<f64>,
    pub noise: Matrix2<f64>,
}

impl SingleModeChannel {
    /// Applies the reduced channel to single-mode moments.
    pub fn apply(&self, moments: &Vector2<f64>, cov: &Matrix2<f64>) -> (Vector2<f64>, Matrix2<f64>) {
        (
            self.transfer * moments,
            self.transfer * cov * self.transfer.transpose() + self.noise,
        )
    }
}

/// The invariants of a single-mode channel under symplectic pre/post
/// processing: rank, transmissivity, and thermal number. They identify the
/// reduced wedge channel as a lossy channel with canonical matrices
/// `M_c = sqrt(tau) 1` and `N_c = (1 - tau)(2 nbar + 1) 1`.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingleModeCanonical {
    /// Transmissivity `tau = det M_sm`, in `[-1, 1]`.
    pub tau: f64,
    /// Thermal number `nbar >= 0`.
    pub nbar: f64,
    /// Channel rank `min(rank M_sm, rank N_sm)`.
    pub rank: u8,
}

impl SingleModeCanonical {
    /// Added-noise coefficient `(1 - tau)(2 nbar + 1)` of the canonical
    /// form's noise block.
    pub fn noise_coefficient(&self) -> f64 {
        (1.0 - self.tau) * (2.0 * self.nbar + 1.0)
    }

    /// Canonical matrices `(M_c, N_c) = (sqrt(tau) 1, (1-tau)(2 nbar+1) 1)`.
    /// Defined for lossy channels, `tau >= 0`.
    pub fn canonical_matrices(&self) -> Result<(Matrix2<f64>, Matrix2<f64>), ChannelError> {
        if self.tau < 0.0 {
            return Err(ChannelError::Domain {
                name: "tau",
                value: self.tau,
                domain: "tau >= 0 for the lossy canonical form",
            });
        }
        Ok((
            Matrix2::identity() * self.tau.sqrt(),
            Matrix2::identity() * self.noise_coefficient(),
        ))
    }
}

fn rank2(m: &Matrix2<f64>) -> u8 {
    let svals = m.svd(false, false).singular_values;
    let tol = 1e-12 * svals.max().max(1.0);
    svals.iter().filter(|&&s| s > tol).count() as u8
}

/// Extracts the symplectic invariants of a single-mode channel.
///
/// `tau = det M_sm`; `nbar = sqrt(det N_sm)` when `tau = 1` (within 1e-12),
/// else `sqrt(det N_sm) / (2 |1 - tau|) - 1/2`. A noise determinant below
/// `-1e-12` marks inconsistent inputs; tiny negative values from rounding
/// are clamped to zero.
pub fn canonical_form(sm: &SingleModeChannel) -> Result<SingleModeCanonical, ChannelError> {
    let tau = sm.transfer.determinant();
    if !(tau.is_finite() && tau.abs() <= 1.0 + 1e-9) {
        return Err(ChannelError::TransmissivityRange { tau });
    }
    let tau = tau.clamp(-1.0, 1.0);
    let det_n = sm.noise.determinant();
    if det_n < -1e-12 {
        return Err(ChannelError::NegativeNoiseDeterminant { det: det_n });
    }
    let root = det_n.max(0.0).sqrt();
    let nbar = if (tau - 1.0).abs() < UNIT_TAU_TOL {
        root
    } else {
        (root / (2.0 * (1.0 - tau).abs()) - 0.5).max(0.0)
    };
    Ok(SingleModeCanonical {
        tau,
        nbar,
        rank: rank2(&sm.transfer).min(rank2(&sm.noise)),
    })
}

/// The bosonic entropy function
/// `g(x) = ((x+1)/2) log((x+1)/2) - ((x-1)/2) log((x-1)/2)` for `x >= 1`,
/// with `g(1) = 0` by continuity.
pub fn entropy_g(x: f64, base: LogBase) -> Result<f64, ChannelError> {
    if !(x >= 1.0 - 1e-12 && x.is_finite()) {
        return Err(ChannelError::Domain {
            name: "x",
            value: x,
            domain: "x >= 1",
        });
    }
    Ok(entropy_g_ext(x, base))
}

/// `g` extended by the convention `g(x) = 0` for `x <= 1`, used by the
/// capacity bounds whose arguments can leave the natural domain.
fn entropy_g_ext(x: f64, base: LogBase) -> f64 {
    if x <= 1.0 {
        return 0.0;
    }
    let xlx = |t: f64| if t > 0.0 { t * base.log(t) } else { 0.0 };
    xlx((x + 1.0) / 2.0) - xlx((x - 1.0) / 2.0)
}

/// Lower bound on the classical capacity of a lossy channel, together with
/// a flag recording whether the input energy had to be clamped.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct ClassicalCapacityBound {
    /// The bound `g(2 tau (mbar - nbar) + 2 nbar + 1) - g(2 nbar (1 - tau))`.
    pub value: f64,
    /// Set when `mbar < nbar` forced clamping `mbar` up to `nbar`.
    pub mbar_clamped: bool,
}

/// Classical-capacity lower bound at mean input photon number `mbar`.
///
/// Arguments of `g` at or below 1 contribute zero (the second argument
/// always leaves `g`'s natural domain when `nbar (1 - tau) < 1/2`).
/// `mbar < nbar` is clamped to `mbar = nbar` and flagged.
pub fn classical_capacity_lb(
    c: &SingleModeCanonical,
    mbar: f64,
    base: LogBase,
) -> Result<ClassicalCapacityBound, ChannelError> {
    if !(mbar >= 0.0 && mbar.is_finite()) {
        return Err(ChannelError::Domain {
            name: "mbar",
            value: mbar,
            domain: "mbar >= 0",
        });
    }
    let mbar_clamped = mbar < c.nbar;
    let m_eff = mbar.max(c.nbar);
    let value = entropy_g_ext(2.0 * c.tau * (m_eff - c.nbar) + 2.0 * c.nbar + 1.0, base)
        - entropy_g_ext(2.0 * c.nbar * (1.0 - c.tau), base);
    Ok(ClassicalCapacityBound {
        value,
        mbar_clamped,
    })
}

/// Quantum-capacity lower bound `max[0, log|tau/(1-tau)| - g(2 nbar + 1)]`.
///
/// Diverges as `tau -> 1`; at `tau = 1` (within 1e-12) returns positive
/// infinity as a sentinel.
pub fn quantum_capacity_lb(c: &SingleModeCanonical, base: LogBase) -> f64 {
    if (1.0 - c.tau).abs() < UNIT_TAU_TOL {
        return f64::INFINITY;
    }
    let raw = base.log((c.tau / (1.0 - c.tau)).abs()) - entropy_g_ext(2.0 * c.nbar + 1.0, base);
    raw.max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bogoliubov::{transfer_matrix, Orientation, OverlapCoeffs};
    use crate::noise::build_noise_matrix;
    use approx::assert_relative_eq;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn test_geometry() -> Geometry {
        Geometry::new(Orientation::Counter, 0.0, 0.1, 0.1).unwrap()
    }

    fn test_modes() -> [ModeParams; 4] {
        let base = ModeParams {
            region: Region::I,
            x0: 10.0,
            length: 2.0,
            omega0: 5.0,
            mass: 0.1,
            accel: 0.0,
            kind: crate::modes::ModeKind::Inertial,
        };
        [base; 4]
    }

    /// Channel from overlap coefficients and scalar noise data, the same
    /// assembly path the production pipeline uses.
    fn assemble(
        alpha: Complex64,
        beta: Complex64,
        n_diag: f64,
        plus: Complex64,
        minus: Complex64,
    ) -> ChannelMatrices {
        let o = OverlapCoeffs {
            alpha_i: alpha,
            beta_i: beta,
            alpha_ii: alpha,
            beta_ii: beta,
        };
        let m = transfer_matrix(&o);
        let n = build_noise_matrix(n_diag, n_diag, plus, minus, &m).unwrap();
        ChannelMatrices::new(m, n.matrix, test_geometry(), test_modes()).unwrap()
    }

    #[test]
    fn symplectic_form_squares_to_minus_identity() {
        let s = symplectic_form();
        assert_eq!(s * s, -Matrix4::identity());
        assert_eq!(s.transpose(), -s);
    }

    #[test]
    fn uncertainty_eigenvalue_reference_states() {
        // Vacuum saturates the uncertainty relation: min eig exactly 0.
        let vac = Matrix4::identity();
        assert!(uncertainty_min_eigenvalue(&vac).abs() < 1e-12);

        // Thermal state sigma = (2 nbar + 1) I: min eig 2 nbar.
        let nbar = 0.7;
        let thermal = Matrix4::identity() * (2.0 * nbar + 1.0);
        assert!((uncertainty_min_eigenvalue(&thermal) - 2.0 * nbar).abs() < 1e-12);

        // Two-mode squeezed vacuum is pure: saturates the relation again.
        let r: f64 = 0.9;
        let (c, s) = ((2.0 * r).cosh(), (2.0 * r).sinh());
        let tmsv = Matrix4::new(
            c, 0.0, s, 0.0, //
            0.0, c, 0.0, -s, //
            s, 0.0, c, 0.0, //
            0.0, -s, 0.0, c,
        );
        assert!(uncertainty_min_eigenvalue(&tmsv).abs() < 1e-9);

        // Sub-vacuum noise in every quadrature is unphysical.
        let squeezed_all = Matrix4::identity() * 0.5;
        assert!((uncertainty_min_eigenvalue(&squeezed_all) + 0.5).abs() < 1e-12);
    }

    #[test]
    fn state_constructors_match_their_definitions() {
        let vac = GaussianState::vacuum();
        assert_eq!(vac.first_moments(), &Vector4::zeros());
        assert_eq!(vac.cov(), &Matrix4::identity());
        assert_relative_eq!(vac.cov().determinant(), 1.0, max_relative = 1e-12);

        // Degenerate squeezed-thermal cases.
        assert_eq!(GaussianState::squeezed_thermal(0.0, 0.0).unwrap(), vac);
        assert_eq!(
            GaussianState::squeezed_thermal(0.0, 1.0).unwrap().cov(),
            &(Matrix4::identity() * 3.0)
        );

        // Pure for n = 0 at any squeezing: det sigma = 1.
        let tmsv = GaussianState::squeezed_thermal(0.5, 0.0).unwrap();
        assert_relative_eq!(tmsv.cov().determinant(), 1.0, max_relative = 1e-12);
        assert!(uncertainty_min_eigenvalue(tmsv.cov()).abs() < 1e-9);

        let d = Vector4::new(1.0, 0.0, -2.0, 0.5);
        let coh = GaussianState::coherent(d).unwrap();
        assert_eq!(coh.first_moments(), &d);
        assert_eq!(coh.cov(), &Matrix4::identity());

        assert!(matches!(
            GaussianState::squeezed_thermal(0.1, -0.5),
            Err(ChannelError::Domain { name: "n", .. })
        ));
        assert!(matches!(
            GaussianState::new(Vector4::zeros(), Matrix4::identity() * 0.5),
            Err(ChannelError::UnphysicalState { .. })
        ));
        let mut lopsided = Matrix4::identity();
        lopsided[(0, 1)] = 0.3;
        assert!(matches!(
            GaussianState::new(Vector4::zeros(), lopsided),
            Err(ChannelError::AsymmetricCovariance { .. })
        ));
    }

    #[test]
    fn identity_channel_is_the_identity_map() {
        let ch = ChannelMatrices::new(
            Matrix4::identity(),
            Matrix4::zeros(),
            test_geometry(),
            test_modes(),
        )
        .unwrap();
        assert!(ch.cp_min_eigenvalue().abs() < 1e-12);

        let input = GaussianState::squeezed_thermal(0.4, 0.2).unwrap();
        let out = ch.apply(&input).unwrap();
        assert_eq!(out, input);
        let approx_out = ch.apply_approx(&input);
        assert_eq!(approx_out, input);
    }

    #[test]
    fn attenuator_channel_acts_as_expected_and_bad_channels_are_rejected() {
        // Pure loss: M = sqrt(eta) I with matching vacuum-mixing noise.
        let eta: f64 = 0.25;
        let m = Matrix4::identity() * eta.sqrt();
        let n = Matrix4::identity() * (1.0 - eta);
        let ch = ChannelMatrices::new(m, n, test_geometry(), test_modes()).unwrap();
        assert!(ch.cp_min_eigenvalue() > -1e-12);

        // Vacuum is a fixed point of pure loss.
        let out = ch.apply(&GaussianState::vacuum()).unwrap();
        assert_relative_eq!(*out.cov(), Matrix4::identity(), epsilon = 1e-14);

        // Moments attenuate by sqrt(eta).
        let coh = GaussianState::coherent(Vector4::new(2.0, 0.0, 0.0, 0.0)).unwrap();
        let out = ch.apply(&coh).unwrap();
        assert_relative_eq!(
            *out.first_moments(),
            Vector4::new(1.0, 0.0, 0.0, 0.0),
            epsilon = 1e-14
        );

        // The same M without its noise is not completely positive.
        assert!(matches!(
            ChannelMatrices::new(m, Matrix4::zeros(), test_geometry(), test_modes()),
            Err(ChannelError::NotCompletelyPositive { .. })
        ));
    }

    #[test]
    fn vacuum_output_reproduces_the_noise_assembly() {
        // apply(vacuum) must return exactly the vacuum-throughput matrix the
        // noise block was assembled from: M M^T + (vac - M M^T) = vac.
        let alpha = Complex64::new(0.97, 0.02);
        let beta = Complex64::new(3e-4, -1e-4);
        let (plus, minus) = (Complex64::new(2e-3, 1e-3), Complex64::new(-1e-3, 4e-4));
        let ch = assemble(alpha, beta, 5e-3, plus, minus);
        let out = ch.apply(&GaussianState::vacuum()).unwrap();
        let expected = crate::noise::vacuum_throughput(5e-3, 5e-3, plus, minus);
        assert_relative_eq!(*out.cov(), expected, epsilon = 1e-15);

        // The approximate action differs from the exact one by
        // N - (1 - M M^T) entrywise; on near-vacuum inputs both stay within
        // the noise scale of each other.
        let input = GaussianState::squeezed_thermal(0.3, 0.1).unwrap();
        let exact = ch.apply(&input).unwrap();
        let approx_out = ch.apply_approx(&input);
        let drift = ch.noise()
            - (Matrix4::identity() - ch.transfer() * ch.transfer().transpose());
        let diff = exact.cov() - approx_out.cov();
        for i in 0..4 {
            for j in 0..4 {
                assert!((diff[(i, j)] - drift[(i, j)]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn reduction_matches_partial_trace_and_commutes_with_marginals() {
        // Complete positivity with beta != 0 needs N_I >~ 2|alpha||beta|,
        // so the synthetic coefficients keep beta well under the diagonal
        // noise (as the physical pipeline does by a huge margin).
        let alpha = Complex64::new(0.92, 0.05);
        let beta = Complex64::new(1e-3, -5e-4);
        let ch = assemble(
            alpha,
            beta,
            6e-3,
            Complex64::new(5e-4, -5e-4),
            Complex64::new(2e-4, 3e-4),
        );
        let sm = ch.reduce();

        // N_sm = (1 + N_I) 1 - M_sm M_sm^T for the block-diagonal assembly.
        let expected_noise =
            Matrix2::identity() * (1.0 + 6e-3) - sm.transfer * sm.transfer.transpose();
        assert_relative_eq!(sm.noise, expected_noise, epsilon = 1e-14);

        // Reduction commutes with taking marginals.
        let input = GaussianState::squeezed_thermal(0.6, 0.4).unwrap();
        let (mom_in, cov_in) = input.marginal(Region::I);
        let (mom_sm, cov_sm) = sm.apply(&mom_in, &cov_in);
        let full = ch.apply(&input).unwrap();
        let (mom_full, cov_full) = full.marginal(Region::I);
        assert_relative_eq!(mom_sm, mom_full, epsilon = 1e-12);
        assert_relative_eq!(cov_sm, cov_full, epsilon = 1e-12);
    }

    #[test]
    fn canonical_invariants_reference_values_and_branches() {
        // Identity channel: tau = 1, nbar = 0.
        let ident = SingleModeChannel {
            transfer: Matrix2::identity(),
            noise: Matrix2::zeros(),
        };
        let c = canonical_form(&ident).unwrap();
        assert_eq!((c.tau, c.nbar, c.rank), (1.0, 0.0, 0));
        assert_eq!(c.noise_coefficient(), 0.0);

        // tau = 1 degenerate branch: nbar = sqrt(det N_sm) directly.
        let unit_noisy = SingleModeChannel {
            transfer: Matrix2::identity(),
            noise: Matrix2::identity() * 0.2,
        };
        let c = canonical_form(&unit_noisy).unwrap();
        assert_relative_eq!(c.nbar, 0.2, max_relative = 1e-12);
        assert_eq!(c.rank, 2);

        // Generic lossy channel from the full assembly: tau = |a|^2 - |b|^2
        // and det N_sm matches the closed form.
        let (alpha, beta, n_i) = (Complex64::new(0.9, 0.1), Complex64::new(2e-3, -1e-3), 8e-3);
        let ch = assemble(
            alpha,
            beta,
            n_i,
            Complex64::new(5e-4, 0.0),
            Complex64::new(0.0, 5e-4),
        );
        let sm = ch.reduce();
        let c = canonical_form(&sm).unwrap();
        let (a2, b2) = (alpha.norm_sqr(), beta.norm_sqr());
        assert_relative_eq!(c.tau, a2 - b2, max_relative = 1e-12);
        let det_closed = (a2 + b2 - (1.0 + n_i)).powi(2) - 4.0 * a2 * b2;
        assert_relative_eq!(sm.noise.determinant(), det_closed, max_relative = 1e-9);
        assert_relative_eq!(
            c.nbar,
            det_closed.sqrt() / (2.0 * (1.0 - c.tau).abs()) - 0.5,
            epsilon = 1e-12
        );
        assert_eq!(c.rank, 2);
        let (mc, nc) = c.canonical_matrices().unwrap();
        assert_relative_eq!(mc, Matrix2::identity() * c.tau.sqrt(), epsilon = 1e-14);
        assert_relative_eq!(
            nc,
            Matrix2::identity() * (1.0 - c.tau) * (2.0 * c.nbar + 1.0),
            epsilon = 1e-14
        );

        // Inconsistent noise block is rejected.
        let bad = SingleModeChannel {
            transfer: Matrix2::identity() * 0.5,
            noise: Matrix2::new(1.0, 0.0, 0.0, -1e-3),
        };
        assert!(matches!(
            canonical_form(&bad),
            Err(ChannelError::NegativeNoiseDeterminant { .. })
        ));
    }

    #[test]
    fn canonical_invariants_survive_symplectic_pre_and_post_processing() {
        // tau and nbar are invariant under M -> S_out M S_in,
        // N -> S_out N S_out^T with S in Sp(2, R) = SL(2, R).
        let base = SingleModeChannel {
            transfer: Matrix2::new(0.9, 0.1, -0.05, 0.85),
            noise: Matrix2::new(0.4, 0.02, 0.02, 0.3),
        };
        let reference = canonical_form(&base).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let random_symplectic = |rng: &mut ChaCha8Rng| {
            let (t1, t2, z) = (
                rng.gen_range(0.0..std::f64::consts::TAU),
                rng.gen_range(0.0..std::f64::consts::TAU),
                rng.gen_range(-0.5..0.5f64),
            );
            let rot = |t: f64| Matrix2::new(t.cos(), -t.sin(), t.sin(), t.cos());
            rot(t1) * Matrix2::new(z.exp(), 0.0, 0.0, (-z).exp()) * rot(t2)
        };
        for _ in 0..20 {
            let s_in = random_symplectic(&mut rng);
            let s_out = random_symplectic(&mut rng);
            let conjugated = SingleModeChannel {
                transfer: s_out * base.transfer * s_in,
                noise: s_out * base.noise * s_out.transpose(),
            };
            let c = canonical_form(&conjugated).unwrap();
            assert_relative_eq!(c.tau, reference.tau, max_relative = 1e-9);
            assert_relative_eq!(c.nbar, reference.nbar, max_relative = 1e-9);
            assert_eq!(c.rank, reference.rank);
        }
    }

    #[test]
    fn entropy_function_reference_values_and_monotonicity() {
        assert_eq!(entropy_g(1.0, LogBase::Two).unwrap(), 0.0);
        assert_relative_eq!(entropy_g(3.0, LogBase::Two).unwrap(), 2.0, epsilon = 1e-15);
        assert_relative_eq!(
            entropy_g(3.0, LogBase::Natural).unwrap(),
            2.0 * std::f64::consts::LN_2,
            epsilon = 1e-15
        );
        assert!(matches!(
            entropy_g(0.5, LogBase::Two),
            Err(ChannelError::Domain { name: "x", .. })
        ));

        let mut prev = 0.0;
        for i in 1..=100 {
            let x = 1.0 + (i as f64) * 0.99;
            let g = entropy_g(x, LogBase::Two).unwrap();
            assert!(g > prev, "g must increase: g({x}) = {g} vs {prev}");
            prev = g;
        }
    }

    #[test]
    fn capacity_bounds_reference_values() {
        let ideal = SingleModeCanonical {
            tau: 1.0,
            nbar: 0.0,
            rank: 2,
        };
        let c = classical_capacity_lb(&ideal, 1.0, LogBase::Two).unwrap();
        assert_relative_eq!(c.value, 2.0, epsilon = 1e-14);
        assert!(!c.mbar_clamped);
        assert_eq!(quantum_capacity_lb(&ideal, LogBase::Two), f64::INFINITY);

        let depolarized = SingleModeCanonical {
            tau: 0.0,
            nbar: 0.0,
            rank: 2,
        };
        assert_eq!(
            classical_capacity_lb(&depolarized, 1.0, LogBase::Two)
                .unwrap()
                .value,
            0.0
        );

        let threshold = SingleModeCanonical {
            tau: 0.5,
            nbar: 0.0,
            rank: 2,
        };
        assert_eq!(quantum_capacity_lb(&threshold, LogBase::Two), 0.0);

        let lossy = SingleModeCanonical {
            tau: 0.9,
            nbar: 0.0,
            rank: 2,
        };
        assert_relative_eq!(
            quantum_capacity_lb(&lossy, LogBase::Two),
            9.0f64.log2(),
            epsilon = 1e-14
        );
        // Natural-log variant scales by ln 2.
        assert_relative_eq!(
            quantum_capacity_lb(&lossy, LogBase::Natural),
            9.0f64.ln(),
            epsilon = 1e-14
        );

        // mbar below nbar clamps and flags.
        let noisy = SingleModeCanonical {
            tau: 0.7,
            nbar: 0.5,
            rank: 2,
        };
        let clamped = classical_capacity_lb(&noisy, 0.1, LogBase::Two).unwrap();
        assert!(clamped.mbar_clamped);
        let at_floor = classical_capacity_lb(&noisy, 0.5, LogBase::Two).unwrap();
        assert_eq!(clamped.value, at_floor.value);
        assert!(matches!(
            classical_capacity_lb(&noisy, -1.0, LogBase::Two),
            Err(ChannelError::Domain { name: "mbar", .. })
        ));
    }

    #[test]
    fn random_physical_states_stay_physical_through_a_cp_channel() {
        // Random covariance matrices S S^T + (2n+1-1) corrections built from
        // symplectics are physical; a CP channel must keep them physical.
        let eta: f64 = 0.6;
        let ch = ChannelMatrices::new(
            Matrix4::identity() * eta.sqrt(),
            Matrix4::identity() * (1.0 - eta),
            test_geometry(),
            test_modes(),
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            // sigma = L L^T + I stays comfortably physical for random L.
            let l = Matrix4::from_fn(|_, _| rng.gen_range(-0.8..0.8));
            let cov = l * l.transpose() + Matrix4::identity();
            let moments = Vector4::from_fn(|_, _| rng.gen_range(-1.0..1.0));
            let state = GaussianState::new(moments, cov).unwrap();
            let out = ch.apply(&state).unwrap();
            assert!(uncertainty_min_eigenvalue(out.cov()) > -PHYSICALITY_TOL);
        }
    }
}
