//! The warping group of `[0, 1]` and its actions on sampled functions.
//!
//! Three actions are provided: value-preserving `f ∘ γ`, area-preserving
//! `(f ∘ γ) γ̇` and norm-preserving `(f ∘ γ) √γ̇`. The norm-preserving action
//! is an isometry of L², which is what makes the supremum over warpings in
//! the elastic model well posed.

mod dp;

pub use dp::{
    dp_align, dp_align_with, path_objective, step_set, Alignment, DpConfig, DEFAULT_MAX_STEP,
};

use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::grid::{derivative_values, interpolate_unchecked, l2_norm, DiscretizedFunction, Grid};

/// Lower clamp applied to finite-difference slopes before taking roots.
pub const MIN_SLOPE: f64 = 1e-8;

/// A boundary-preserving, strictly increasing map of `[0, 1]` onto itself,
/// stored by its values at the grid points.
#[derive(Debug, Clone, PartialEq)]
pub struct Warping {
    grid: Grid,
    values: Vec<f64>,
}

impl Warping {
    /// Validates sampled warping values.
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch {
                expected: grid.len(),
                found: values.len(),
            });
        }
        if values[0] != 0.0 || values[values.len() - 1] != 1.0 {
            return Err(invalid("warping must satisfy γ(0) = 0 and γ(1) = 1"));
        }
        if let Some(k) = values.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(invalid(alloc::format!(
                "warping is not strictly increasing at index {k}"
            )));
        }
        Ok(Warping { grid, values })
    }

    /// Samples `gamma` on the grid and pins the endpoints to 0 and 1.
    pub fn from_fn(grid: Grid, gamma: impl Fn(f64) -> f64) -> Result<Self> {
        let mut values: Vec<f64> = (0..grid.len()).map(|k| gamma(grid.point(k))).collect();
        values[0] = 0.0;
        *values.last_mut().unwrap() = 1.0;
        Self::new(grid, values)
    }

    pub fn identity(grid: Grid) -> Self {
        Warping {
            grid,
            values: grid.points(),
        }
    }

    pub(crate) fn from_parts(grid: Grid, mut values: Vec<f64>) -> Self {
        values[0] = 0.0;
        *values.last_mut().unwrap() = 1.0;
        Warping { grid, values }
    }

    #[inline]
    pub fn grid(&self) -> Grid {
        self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Finite-difference `γ̇`, clamped below at [`MIN_SLOPE`].
    pub fn slope(&self) -> Vec<f64> {
        let mut d = derivative_values(&self.values, self.grid.spacing());
        for v in &mut d {
            *v = v.max(MIN_SLOPE);
        }
        d
    }

    /// `sup_t |γ(t) − t|`.
    pub fn distance_to_identity(&self) -> f64 {
        (0..self.grid.len()).fold(0.0, |m, k| {
            m.max((self.values[k] - self.grid.point(k)).abs())
        })
    }

    /// `sup_t |γ₁(t) − γ₂(t)|`.
    pub fn sup_distance(&self, other: &Warping) -> Result<f64> {
        self.grid.check(&other.grid)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    pub fn as_function(&self) -> DiscretizedFunction {
        DiscretizedFunction::from_parts(self.grid, self.values.clone())
    }
}

pub fn identity_warping(grid: Grid) -> Warping {
    Warping::identity(grid)
}

/// Square-root velocity function `sign(ḟ) √|ḟ|`.
pub fn srvf(f: &DiscretizedFunction) -> DiscretizedFunction {
    let d = derivative_values(f.values(), f.grid().spacing());
    let q = d
        .into_iter()
        .map(|v| libm::copysign(libm::sqrt(v.abs()), v))
        .collect();
    DiscretizedFunction::from_parts(f.grid(), q)
}

fn composed(f: &DiscretizedFunction, g: &Warping) -> Result<Vec<f64>> {
    f.grid().check(&g.grid)?;
    Ok(g.values
        .iter()
        .map(|&t| interpolate_unchecked(f.values(), t))
        .collect())
}

/// `f ∘ γ`.
pub fn value_action(f: &DiscretizedFunction, g: &Warping) -> Result<DiscretizedFunction> {
    Ok(DiscretizedFunction::from_parts(f.grid(), composed(f, g)?))
}

/// `(f ∘ γ) √γ̇`, the L²-isometric action.
pub fn norm_action(f: &DiscretizedFunction, g: &Warping) -> Result<DiscretizedFunction> {
    let mut v = composed(f, g)?;
    for (x, s) in v.iter_mut().zip(g.slope()) {
        *x *= libm::sqrt(s);
    }
    Ok(DiscretizedFunction::from_parts(f.grid(), v))
}

/// `(f ∘ γ) γ̇`, which preserves `∫ f`.
pub fn area_action(f: &DiscretizedFunction, g: &Warping) -> Result<DiscretizedFunction> {
    let mut v = composed(f, g)?;
    for (x, s) in v.iter_mut().zip(g.slope()) {
        *x *= s;
    }
    Ok(DiscretizedFunction::from_parts(f.grid(), v))
}

/// `γ₁ ∘ γ₂`.
pub fn compose(g1: &Warping, g2: &Warping) -> Result<Warping> {
    g1.grid.check(&g2.grid)?;
    let v = g2
        .values
        .iter()
        .map(|&t| interpolate_unchecked(&g1.values, t))
        .collect();
    Ok(Warping::from_parts(g1.grid, v))
}

/// Numerical inverse: the piecewise-linear interpolant through the swapped
/// pairs `(γ(t_k), t_k)`, sampled back on the grid.
pub fn invert(g: &Warping) -> Warping {
    let grid = g.grid;
    let n = grid.len();
    let h = grid.spacing();
    let mut out = Vec::with_capacity(n);
    let mut m = 0;
    for k in 0..n {
        let t = grid.point(k);
        while m + 2 < n && g.values[m + 1] < t {
            m += 1;
        }
        let (lo, hi) = (g.values[m], g.values[m + 1]);
        let frac = ((t - lo) / (hi - lo)).clamp(0.0, 1.0);
        out.push((m as f64 + frac) * h);
    }
    Warping::from_parts(grid, out)
}

/// Pointwise average of warpings with the endpoints re-pinned.
pub fn mean_warping(gs: &[Warping]) -> Result<Warping> {
    let first = gs.first().ok_or(Error::EmptyList)?;
    let grid = first.grid;
    let mut acc = alloc::vec![0.0; grid.len()];
    for g in gs {
        grid.check(&g.grid)?;
        for (a, v) in acc.iter_mut().zip(&g.values) {
            *a += v;
        }
    }
    let inv = 1.0 / gs.len() as f64;
    for a in &mut acc {
        *a *= inv;
    }
    Ok(Warping::from_parts(grid, acc))
}

/// `‖√γ̇ − 1‖`.
pub fn phase_distance(g: &Warping) -> f64 {
    let d = derivative_values(&g.values, g.grid.spacing());
    let v = d
        .into_iter()
        .map(|s| libm::sqrt(s.max(0.0)) - 1.0)
        .collect();
    l2_norm(&DiscretizedFunction::from_parts(g.grid, v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::inner_product;
    use core::f64::consts::PI;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid(n: usize) -> Grid {
        Grid::new(n).unwrap()
    }

    fn parametric(grid: Grid, a: f64) -> Warping {
        Warping::from_fn(grid, |t| t + a * t * (1.0 - t)).unwrap()
    }

    /// Smooth random warping `t + Σ a_k sin(kπt)/(kπ)` with `Σ|a_k| < 0.8`.
    fn random_warp(grid: Grid, rng: &mut impl Rng) -> Warping {
        let a: [f64; 3] = core::array::from_fn(|_| rng.random_range(-0.8 / 3.0..0.8 / 3.0));
        Warping::from_fn(grid, |t| {
            t + (1..=3)
                .map(|k| {
                    let w = k as f64 * PI;
                    a[k - 1] * libm::sin(w * t) / w
                })
                .sum::<f64>()
        })
        .unwrap()
    }

    fn random_smooth(grid: Grid, rng: &mut impl Rng) -> DiscretizedFunction {
        let c: [f64; 7] = core::array::from_fn(|_| rng.random_range(-1.0..1.0));
        DiscretizedFunction::from_fn(grid, |t| {
            c[0] + (1..=3)
                .map(|k| {
                    let w = 2.0 * PI * k as f64;
                    c[2 * k - 1] * libm::sin(w * t) + c[2 * k] * libm::cos(w * t)
                })
                .sum::<f64>()
        })
        .unwrap()
    }

    #[test]
    fn validation() {
        let g = grid(4);
        assert!(Warping::new(g, alloc::vec![0.0, 0.5, 0.4, 1.0]).is_err());
        assert!(Warping::new(g, alloc::vec![0.1, 0.2, 0.4, 1.0]).is_err());
        assert!(Warping::new(g, alloc::vec![0.0, 0.2, 0.4]).is_err());
        assert_eq!(identity_warping(grid(3)).values(), [0.0, 0.5, 1.0]);
    }

    #[test]
    fn identity_leaves_everything_unchanged() {
        let g = grid(50);
        let id = Warping::identity(g);
        let f = DiscretizedFunction::from_fn(g, |t| libm::sin(5.0 * t) + t * t).unwrap();
        let gam = parametric(g, 0.3);
        assert_eq!(compose(&gam, &id).unwrap(), gam);
        assert_eq!(value_action(&f, &id).unwrap(), f);
        for action in [norm_action, area_action] {
            let r = action(&f, &id).unwrap();
            for (a, b) in r.values().iter().zip(f.values()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn srvf_cases() {
        let g = grid(1001);
        let lin = DiscretizedFunction::from_fn(g, |t| t).unwrap();
        assert!(srvf(&lin).values().iter().all(|q| (q - 1.0).abs() < 1e-10));
        let c = DiscretizedFunction::constant(g, -2.0);
        assert!(srvf(&c).values().iter().all(|q| *q == 0.0));
        let sq = DiscretizedFunction::from_fn(g, |t| t * t).unwrap();
        let q = srvf(&sq);
        for k in 1..1000 {
            let want = libm::sqrt(2.0 * g.point(k));
            assert!((q.values()[k] - want).abs() < 1e-6);
        }
        let neg = DiscretizedFunction::from_fn(g, |t| -t).unwrap();
        assert!(srvf(&neg).values().iter().all(|q| (q + 1.0).abs() < 1e-10));
    }

    #[test]
    fn value_action_cases() {
        let g = grid(60);
        let t = DiscretizedFunction::from_fn(g, |t| t).unwrap();
        let gam = parametric(g, -0.6);
        let r = value_action(&t, &gam).unwrap();
        for (a, b) in r.values().iter().zip(gam.values()) {
            assert!((a - b).abs() < 1e-15);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let f = random_smooth(g, &mut rng);
            let w = random_warp(g, &mut rng);
            assert!(value_action(&f, &w).unwrap().max_abs() <= f.max_abs() + 1e-15);
        }
    }

    #[test]
    fn squared_warp_examples() {
        let g = grid(2001);
        let one = DiscretizedFunction::constant(g, 1.0);
        let gam = Warping::from_fn(g, |t| t * t).unwrap();
        let n = norm_action(&one, &gam).unwrap();
        for k in 1..2000 {
            assert!((n.values()[k] - libm::sqrt(2.0 * g.point(k))).abs() < 1e-8);
        }
        assert!((inner_product(&n, &n).unwrap() - 1.0).abs() < 1e-6);
        let a = area_action(&one, &gam).unwrap();
        for k in 0..2001 {
            assert!((a.values()[k] - 2.0 * g.point(k)).abs() < 1e-7);
        }
        assert!((a.integral() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn actions_preserve_norm_and_area() {
        let g = grid(100);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let f = random_smooth(g, &mut rng);
            let w = random_warp(g, &mut rng);
            let nf = l2_norm(&f);
            let rel = (l2_norm(&norm_action(&f, &w).unwrap()) - nf).abs() / nf;
            assert!(rel <= 5e-3, "norm deviation {rel}");
            let area = f.integral();
            let dev = (area_action(&f, &w).unwrap().integral() - area).abs();
            assert!(dev <= 5e-3 * area.abs().max(nf), "area deviation {dev}");
        }
    }

    #[test]
    fn norm_action_is_isometric() {
        let g = grid(100);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let q1 = random_smooth(g, &mut rng);
            let q2 = random_smooth(g, &mut rng);
            let w = random_warp(g, &mut rng);
            let d0 = l2_norm(&q1.sub(&q2).unwrap());
            let a = norm_action(&q1, &w).unwrap();
            let b = norm_action(&q2, &w).unwrap();
            let d1 = l2_norm(&a.sub(&b).unwrap());
            assert!((d1 - d0).abs() <= 1e-2 * d0);
        }
    }

    #[test]
    fn inversion_and_composition() {
        let g = grid(101);
        let tol = 2.0 / 100.0;
        let id = Warping::identity(g);
        assert!(invert(&id).sup_distance(&id).unwrap() < 1e-15);
        let sq = Warping::from_fn(g, |t| t * t).unwrap();
        let inv = invert(&sq);
        for k in 0..101 {
            assert!((inv.values()[k] - libm::sqrt(g.point(k))).abs() <= tol);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..100 {
            let w = random_warp(g, &mut rng);
            let v = random_warp(g, &mut rng);
            let inv = invert(&w);
            assert!(Warping::new(g, inv.values().to_vec()).is_ok());
            assert!(compose(&w, &inv).unwrap().distance_to_identity() <= tol);
            assert!(invert(&inv).sup_distance(&w).unwrap() <= 2.0 * tol);
            let c = compose(&w, &v).unwrap();
            assert!(Warping::new(g, c.values().to_vec()).is_ok());
        }
    }

    #[test]
    fn mean_warping_cases() {
        let g = grid(40);
        assert_eq!(mean_warping(&[]), Err(Error::EmptyList));
        let id = Warping::identity(g);
        assert_eq!(mean_warping(&[id.clone(), id.clone()]).unwrap(), id);
        let p = parametric(g, 0.4);
        assert_eq!(mean_warping(core::slice::from_ref(&p)).unwrap(), p);
        let m = mean_warping(&[p, parametric(g, -0.4)]).unwrap();
        assert!(m.distance_to_identity() < 1e-15);
    }

    #[test]
    fn phase_distance_cases() {
        let g = grid(1001);
        assert!(phase_distance(&Warping::identity(g)) < 1e-12);
        let w = parametric(g, 0.5);
        // oracle: ‖√(1.5 − t) − 1‖ by composite Simpson on 20001 nodes
        let m = 20000;
        let hs = 1.0 / m as f64;
        let integrand = |t: f64| {
            let r = libm::sqrt(1.5 - t) - 1.0;
            r * r
        };
        let mut s = integrand(0.0) + integrand(1.0);
        for k in 1..m {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            s += w * integrand(k as f64 * hs);
        }
        let want = libm::sqrt(s * hs / 3.0);
        assert!((phase_distance(&w) - want).abs() < 1e-4);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            assert!(phase_distance(&random_warp(grid(50), &mut rng)) >= 0.0);
        }
    }
}
