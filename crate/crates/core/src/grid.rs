//! Uniformly sampled functions on `[0, 1]`.
//!
//! Every functional quantity in the crate (predictors, SRVFs, coefficient
//! functions, warping derivatives) is carried as a [`DiscretizedFunction`]
//! on a shared [`Grid`]. Integrals use the composite trapezoidal rule and
//! derivatives use second-order finite differences, so both are accurate to
//! `O(spacing²)`.

use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};

/// Grid size used by the simulation studies unless configured otherwise.
pub const DEFAULT_GRID_SIZE: usize = 100;

/// Uniform grid `t_k = k / (n - 1)` on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Grid {
    n_points: usize,
}

impl Grid {
    pub fn new(n_points: usize) -> Result<Self> {
        if n_points < 3 {
            return Err(invalid("grid requires at least 3 points"));
        }
        Ok(Grid { n_points })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n_points
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        1.0 / (self.n_points - 1) as f64
    }

    /// The `k`-th grid point.
    #[inline]
    pub fn point(&self, k: usize) -> f64 {
        if k + 1 == self.n_points {
            1.0
        } else {
            k as f64 / (self.n_points - 1) as f64
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|k| self.point(k)).collect()
    }

    pub(crate) fn check(&self, other: &Grid) -> Result<()> {
        if self.n_points == other.n_points {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                expected: self.n_points,
                found: other.n_points,
            })
        }
    }

    /// Trapezoidal weights; they sum to one.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let h = self.spacing();
        let mut w = alloc::vec![h; self.n_points];
        w[0] = 0.5 * h;
        w[self.n_points - 1] = 0.5 * h;
        w
    }
}

/// A real-valued function sampled on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizedFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl DiscretizedFunction {
    /// Wraps sampled values, rejecting wrong lengths and non-finite entries.
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch {
                expected: grid.len(),
                found: values.len(),
            });
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(k));
        }
        Ok(DiscretizedFunction { grid, values })
    }

    /// Samples `f` at every grid point.
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = (0..grid.len()).map(|k| f(grid.point(k))).collect();
        Self::new(grid, values)
    }

    pub fn zeros(grid: Grid) -> Self {
        DiscretizedFunction {
            grid,
            values: alloc::vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        DiscretizedFunction {
            grid,
            values: alloc::vec![c; grid.len()],
        }
    }

    /// Internal constructor for values produced by finite arithmetic on
    /// already-validated inputs.
    pub(crate) fn from_parts(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        DiscretizedFunction { grid, values }
    }

    #[inline]
    pub fn grid(&self) -> Grid {
        self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self::from_parts(self.grid, self.values.iter().map(|v| a * v).collect())
    }

    /// Pointwise `self + a * other`.
    pub fn add_scaled(&self, a: f64, other: &DiscretizedFunction) -> Result<Self> {
        self.grid.check(&other.grid)?;
        Ok(Self::from_parts(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| x + a * y)
                .collect(),
        ))
    }

    pub fn sub(&self, other: &DiscretizedFunction) -> Result<Self> {
        self.add_scaled(-1.0, other)
    }

    /// `∫₀¹ f(t) dt` by the trapezoidal rule.
    pub fn integral(&self) -> f64 {
        let v = &self.values;
        let n = v.len();
        let interior: f64 = v[1..n - 1].iter().sum();
        self.grid.spacing() * (interior + 0.5 * (v[0] + v[n - 1]))
    }

    /// Running trapezoidal integral `F(t_k) = ∫₀^{t_k} f`.
    pub fn cumulative_integral(&self) -> Self {
        let h = self.grid.spacing();
        let mut out = Vec::with_capacity(self.values.len());
        let mut acc = 0.0;
        out.push(0.0);
        for w in self.values.windows(2) {
            acc += 0.5 * h * (w[0] + w[1]);
            out.push(acc);
        }
        Self::from_parts(self.grid, out)
    }
}

/// Trapezoidal approximation of `∫₀¹ f(t) g(t) dt`.
pub fn inner_product(f: &DiscretizedFunction, g: &DiscretizedFunction) -> Result<f64> {
    f.grid.check(&g.grid)?;
    Ok(dot_trapezoid(&f.values, &g.values, f.grid.spacing()))
}

#[inline]
pub(crate) fn dot_trapezoid(a: &[f64], b: &[f64], h: f64) -> f64 {
    let n = a.len();
    let mut acc = 0.5 * (a[0] * b[0] + a[n - 1] * b[n - 1]);
    for k in 1..n - 1 {
        acc += a[k] * b[k];
    }
    h * acc
}

pub fn l2_norm(f: &DiscretizedFunction) -> f64 {
    libm::sqrt(dot_trapezoid(&f.values, &f.values, f.grid.spacing()))
}

/// Second-order finite-difference derivative: central differences inside,
/// one-sided three-point stencils at both ends.
pub fn derivative(f: &DiscretizedFunction) -> DiscretizedFunction {
    DiscretizedFunction::from_parts(f.grid, derivative_values(&f.values, f.grid.spacing()))
}

pub(crate) fn derivative_values(v: &[f64], h: f64) -> Vec<f64> {
    let n = v.len();
    let mut d = Vec::with_capacity(n);
    d.push((-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h));
    for k in 1..n - 1 {
        d.push((v[k + 1] - v[k - 1]) / (2.0 * h));
    }
    d.push((3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h));
    d
}

/// Piecewise-linear interpolation of `f` at arbitrary points of `[0, 1]`.
pub fn resample(f: &DiscretizedFunction, at: &[f64]) -> Result<Vec<f64>> {
    at.iter().map(|&t| interpolate(&f.values, t)).collect()
}

#[inline]
pub(crate) fn interpolate(values: &[f64], t: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Domain(t));
    }
    Ok(interpolate_unchecked(values, t))
}

#[inline]
pub(crate) fn interpolate_unchecked(values: &[f64], t: f64) -> f64 {
    let last = values.len() - 1;
    let x = t * last as f64;
    // snap queries that are grid nodes up to rounding so nodes reproduce exactly
    let r = libm::round(x);
    if (x - r).abs() <= 4.0 * f64::EPSILON * last as f64 {
        return values[r as usize];
    }
    let k = (libm::floor(x) as usize).min(last - 1);
    let frac = x - k as f64;
    values[k] + frac * (values[k + 1] - values[k])
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;
    use proptest::prelude::*;

    fn grid(n: usize) -> Grid {
        Grid::new(n).unwrap()
    }

    #[test]
    fn grid_rejects_small_sizes() {
        assert!(Grid::new(2).is_err());
        assert_eq!(grid(3).points(), [0.0, 0.5, 1.0]);
    }

    #[test]
    fn constant_inner_product_is_one() {
        for n in [3, 10, 101] {
            let one = DiscretizedFunction::constant(grid(n), 1.0);
            assert!((inner_product(&one, &one).unwrap() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn fourier_modes_are_orthonormal() {
        let g = grid(1024);
        let s = DiscretizedFunction::from_fn(g, |t| 2f64.sqrt() * libm::sin(2.0 * PI * t)).unwrap();
        let c = DiscretizedFunction::from_fn(g, |t| 2f64.sqrt() * libm::cos(2.0 * PI * t)).unwrap();
        assert!(inner_product(&s, &c).unwrap().abs() < 1e-6);
        assert!((inner_product(&s, &s).unwrap() - 1.0).abs() < 1e-4);
    }

    #[test]
    fn grid_mismatch_is_reported() {
        let a = DiscretizedFunction::zeros(grid(5));
        let b = DiscretizedFunction::zeros(grid(6));
        assert_eq!(
            inner_product(&a, &b),
            Err(Error::GridMismatch {
                expected: 5,
                found: 6
            })
        );
    }

    #[test]
    fn norms() {
        let g = grid(1024);
        assert_eq!(l2_norm(&DiscretizedFunction::zeros(g)), 0.0);
        assert!((l2_norm(&DiscretizedFunction::constant(g, 2.0)) - 2.0).abs() < 1e-12);
        let t = DiscretizedFunction::from_fn(g, |t| t).unwrap();
        assert!((l2_norm(&t) - 1.0 / 3f64.sqrt()).abs() < 1e-4);
    }

    #[test]
    fn rejects_non_finite() {
        assert_eq!(
            DiscretizedFunction::new(grid(3), alloc::vec![0.0, f64::NAN, 1.0]),
            Err(Error::NonFinite(1))
        );
    }

    #[test]
    fn derivative_exact_cases() {
        let g = grid(101);
        let lin = DiscretizedFunction::from_fn(g, |t| t).unwrap();
        for d in derivative(&lin).values() {
            assert!((d - 1.0).abs() < 1e-12);
        }
        let c = DiscretizedFunction::constant(g, 3.5);
        assert!(derivative(&c).values().iter().all(|d| *d == 0.0));
        let sq = DiscretizedFunction::from_fn(g, |t| t * t).unwrap();
        let d = derivative(&sq);
        for k in 1..100 {
            assert!((d.values()[k] - 2.0 * g.point(k)).abs() < 1e-10);
        }
        // the one-sided stencil is also exact for quadratics
        assert!(d.values()[0].abs() < 1e-10);
        assert!((d.values()[100] - 2.0).abs() < 1e-10);
    }

    #[test]
    fn integrating_the_derivative_recovers_the_function() {
        // the error constant for sin(2πt) tends to π² from above, so the 10·h² bound
        // only holds once the grid is fine enough
        for n in [1000, 2000] {
            let g = grid(n);
            let h = g.spacing();
            for f in [
                DiscretizedFunction::from_fn(g, |t| libm::sin(2.0 * PI * t)).unwrap(),
                DiscretizedFunction::from_fn(g, |t| t * t * t).unwrap(),
            ] {
                let rec = derivative(&f).cumulative_integral();
                let f0 = f.values()[0];
                let err = rec
                    .values()
                    .iter()
                    .zip(f.values())
                    .fold(0.0f64, |m, (r, v)| m.max((r - (v - f0)).abs()));
                assert!(err < 10.0 * h * h, "n={n} err={err}");
            }
        }
    }

    #[test]
    fn resample_cases() {
        let g = grid(7);
        let f = DiscretizedFunction::from_fn(g, libm::exp).unwrap();
        assert_eq!(resample(&f, &g.points()).unwrap(), f.values());
        let lin = DiscretizedFunction::from_fn(g, |t| t).unwrap();
        assert!((resample(&lin, &[0.5]).unwrap()[0] - 0.5).abs() < 1e-15);
        let hat = DiscretizedFunction::new(grid(3), alloc::vec![0.0, 1.0, 0.0]).unwrap();
        assert_eq!(resample(&hat, &[0.25, 0.75]).unwrap(), [0.5, 0.5]);
        assert_eq!(resample(&hat, &[1.5]), Err(Error::Domain(1.5)));
        assert!(resample(&hat, &[-0.1]).is_err());
    }

    fn values(n: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(-10.0f64..10.0, n)
    }

    proptest! {
        #[test]
        fn inner_product_is_symmetric_bilinear(a in values(40), b in values(40), c in values(40), s in -3.0f64..3.0) {
            let g = grid(40);
            let f = DiscretizedFunction::new(g, a).unwrap();
            let h = DiscretizedFunction::new(g, b).unwrap();
            let k = DiscretizedFunction::new(g, c).unwrap();
            let fh = inner_product(&f, &h).unwrap();
            prop_assert!((fh - inner_product(&h, &f).unwrap()).abs() <= 1e-12 * (1.0 + fh.abs()));
            let lhs = inner_product(&f.add_scaled(s, &h).unwrap(), &k).unwrap();
            let rhs = inner_product(&f, &k).unwrap() + s * inner_product(&h, &k).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs() + rhs.abs()) * 10.0);
        }

        #[test]
        fn cauchy_schwarz(a in values(25), b in values(25)) {
            let g = grid(25);
            let f = DiscretizedFunction::new(g, a).unwrap();
            let h = DiscretizedFunction::new(g, b).unwrap();
            prop_assert!(inner_product(&f, &h).unwrap().abs() <= l2_norm(&f) * l2_norm(&h) + 1e-10);
            prop_assert_eq!(l2_norm(&f), libm::sqrt(inner_product(&f, &f).unwrap()));
        }
    }
}
