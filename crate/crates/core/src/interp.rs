//! Natural cubic spline on a strictly increasing grid. Used to resample
//! once-computed Rindler spectra onto integration grids whose spacing is
//! dictated by the noise-kernel oscillation scale.

/// Natural cubic spline through `(xs[i], ys[i])`.
#[derive(Debug, Clone)]
pub(crate) struct CubicSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// Second derivatives at the knots (zero at both ends).
    y2: Vec<f64>,
}

impl CubicSpline {
    /// `xs` must be strictly increasing with at least two points.
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self, &'static str> {
        let n = xs.len();
        if n < 2 || ys.len() != n {
            return Err("spline needs at least two matching knots");
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err("spline knots must be strictly increasing");
        }
        if xs.iter().chain(ys.iter()).any(|v| !v.is_finite()) {
            return Err("spline knots must be finite");
        }

        // Tridiagonal solve for the second derivatives, natural boundary
        // conditions y2[0] = y2[n-1] = 0.
        let mut y2 = vec![0.0; n];
        let mut u = vec![0.0; n];
        for i in 1..n - 1 {
            let sig = (xs[i] - xs[i - 1]) / (xs[i + 1] - xs[i - 1]);
            let p = sig * y2[i - 1] + 2.0;
            y2[i] = (sig - 1.0) / p;
            let d = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i])
                - (ys[i] - ys[i - 1]) / (xs[i] - xs[i - 1]);
            u[i] = (6.0 * d / (xs[i + 1] - xs[i - 1]) - sig * u[i - 1]) / p;
        }
        for i in (0..n - 1).rev() {
            y2[i] = y2[i] * y2[i + 1] + u[i];
        }
        Ok(CubicSpline { xs, ys, y2 })
    }

    /// Evaluates the spline; arguments outside the knot range use the
    /// boundary segment polynomial (callers are expected to stay in range).
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        let i = match self.xs.binary_search_by(|k| k.total_cmp(&x)) {
            Ok(i) => i.min(n - 2),
            Err(i) => i.clamp(1, n - 1) - 1,
        };
        let h = self.xs[i + 1] - self.xs[i];
        let a = (self.xs[i + 1] - x) / h;
        let b = (x - self.xs[i]) / h;
        a * self.ys[i]
            + b * self.ys[i + 1]
            + ((a * a * a - a) * self.y2[i] + (b * b * b - b) * self.y2[i + 1]) * (h * h) / 6.0
    }

    pub fn min_x(&self) -> f64 {
        self.xs[0]
    }

    pub fn max_x(&self) -> f64 {
        *self.xs.last().expect("non-empty by construction")
    }
}
