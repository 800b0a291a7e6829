//! Orthonormal basis systems for the coefficient function.

use alloc::vec::Vec;
use core::f64::consts::{PI, SQRT_2};

use crate::error::{invalid, Result};
use crate::grid::{dot_trapezoid, DiscretizedFunction, Grid};

pub const DEFAULT_BSPLINE_ORDER: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BasisKind {
    Fourier,
    /// Orthonormalised B-splines of the given order (4 = cubic).
    BSpline {
        order: usize,
    },
}

/// What is needed to rebuild a basis on a grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasisSpec {
    pub kind: BasisKind,
    pub size: usize,
}

impl BasisSpec {
    pub fn fourier(size: usize) -> Self {
        BasisSpec {
            kind: BasisKind::Fourier,
            size,
        }
    }

    pub fn bspline(size: usize) -> Self {
        BasisSpec {
            kind: BasisKind::BSpline {
                order: DEFAULT_BSPLINE_ORDER,
            },
            size,
        }
    }

    pub fn build(&self, grid: Grid) -> Result<BasisSystem> {
        match self.kind {
            BasisKind::Fourier => fourier_basis(self.size, grid),
            BasisKind::BSpline { order } => bspline_basis(self.size, grid, order),
        }
    }
}

/// `J` functions on a grid that are orthonormal under the trapezoidal inner
/// product (exactly for B-splines, to quadrature accuracy for Fourier).
#[derive(Debug, Clone, PartialEq)]
pub struct BasisSystem {
    spec: BasisSpec,
    grid: Grid,
    elements: Vec<DiscretizedFunction>,
}

impl BasisSystem {
    pub fn spec(&self) -> BasisSpec {
        self.spec
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[DiscretizedFunction] {
        &self.elements
    }

    /// `Σ_j c_j b_j` on the grid.
    pub fn expand(&self, coeffs: &[f64]) -> Result<DiscretizedFunction> {
        if coeffs.len() != self.elements.len() {
            return Err(invalid(alloc::format!(
                "expected {} coefficients, found {}",
                self.elements.len(),
                coeffs.len()
            )));
        }
        let mut v = alloc::vec![0.0; self.grid.len()];
        for (c, b) in coeffs.iter().zip(&self.elements) {
            for (x, y) in v.iter_mut().zip(b.values()) {
                *x += c * y;
            }
        }
        DiscretizedFunction::new(self.grid, v)
    }

    /// Coefficients `⟨f, b_j⟩`.
    pub fn project(&self, f: &DiscretizedFunction) -> Result<Vec<f64>> {
        self.grid.check(&f.grid())?;
        let h = self.grid.spacing();
        Ok(self
            .elements
            .iter()
            .map(|b| dot_trapezoid(f.values(), b.values(), h))
            .collect())
    }

    /// Gram matrix of the elements, row-major.
    pub fn gram(&self) -> Vec<Vec<f64>> {
        let h = self.grid.spacing();
        self.elements
            .iter()
            .map(|a| {
                self.elements
                    .iter()
                    .map(|b| dot_trapezoid(a.values(), b.values(), h))
                    .collect()
            })
            .collect()
    }
}

/// `√2 sin(2πt), √2 cos(2πt), √2 sin(4πt), …` truncated to `size` elements.
pub fn fourier_basis(size: usize, grid: Grid) -> Result<BasisSystem> {
    if size < 1 {
        return Err(invalid("basis needs at least one element"));
    }
    let elements = (0..size)
        .map(|j| {
            let w = 2.0 * PI * (j / 2 + 1) as f64;
            if j % 2 == 0 {
                DiscretizedFunction::from_fn(grid, |t| SQRT_2 * libm::sin(w * t))
            } else {
                DiscretizedFunction::from_fn(grid, |t| SQRT_2 * libm::cos(w * t))
            }
        })
        .collect::<Result<_>>()?;
    Ok(BasisSystem {
        spec: BasisSpec::fourier(size),
        grid,
        elements,
    })
}

/// Raw B-splines of the given order on a uniform open knot vector, before
/// orthonormalisation. They form a partition of unity on `[0, 1]`.
pub fn raw_bsplines(size: usize, grid: Grid, order: usize) -> Result<Vec<DiscretizedFunction>> {
    if order < 1 {
        return Err(invalid("B-spline order must be at least 1"));
    }
    if size < order {
        return Err(invalid(alloc::format!(
            "B-spline basis needs at least order = {order} elements, got {size}"
        )));
    }
    let knots = open_uniform_knots(size, order);
    let mut columns = alloc::vec![Vec::with_capacity(grid.len()); size];
    let mut scratch = alloc::vec![0.0; size + order];
    for k in 0..grid.len() {
        cox_de_boor(&knots, order, grid.point(k), &mut scratch);
        for (col, v) in columns.iter_mut().zip(&scratch) {
            col.push(*v);
        }
    }
    columns
        .into_iter()
        .map(|v| DiscretizedFunction::new(grid, v))
        .collect()
}

fn open_uniform_knots(size: usize, order: usize) -> Vec<f64> {
    let interior = size - order;
    let mut knots = Vec::with_capacity(size + order);
    knots.extend(core::iter::repeat_n(0.0, order));
    for i in 1..=interior {
        knots.push(i as f64 / (interior + 1) as f64);
    }
    knots.extend(core::iter::repeat_n(1.0, order));
    knots
}

/// Evaluates every B-spline of `order` at `x`; `out[i]` receives `N_i(x)`.
fn cox_de_boor(knots: &[f64], order: usize, x: f64, out: &mut [f64]) {
    let m = knots.len() - 1;
    // order-1 indicators; the last non-degenerate interval is closed on the right
    let last_span = (0..m).rev().find(|&i| knots[i] < knots[i + 1]).unwrap_or(0);
    for i in 0..m {
        let inside = knots[i] <= x && x < knots[i + 1];
        out[i] = if inside || (i == last_span && x == knots[i + 1]) {
            1.0
        } else {
            0.0
        };
    }
    for p in 2..=order {
        for i in 0..=m - p {
            let left = {
                let d = knots[i + p - 1] - knots[i];
                if d > 0.0 {
                    (x - knots[i]) / d * out[i]
                } else {
                    0.0
                }
            };
            let right = {
                let d = knots[i + p] - knots[i + 1];
                if d > 0.0 {
                    (knots[i + p] - x) / d * out[i + 1]
                } else {
                    0.0
                }
            };
            out[i] = left + right;
        }
    }
}

/// Cubic (or other order) B-splines orthonormalised by modified Gram–Schmidt
/// under the trapezoidal inner product, in knot order.
pub fn bspline_basis(size: usize, grid: Grid, order: usize) -> Result<BasisSystem> {
    let raw = raw_bsplines(size, grid, order)?;
    let h = grid.spacing();
    let mut elements: Vec<Vec<f64>> = raw
        .into_iter()
        .map(DiscretizedFunction::into_values)
        .collect();
    for j in 0..elements.len() {
        let (done, rest) = elements.split_at_mut(j);
        let v = &mut rest[0];
        for q in done.iter() {
            let r = dot_trapezoid(v, q, h);
            for (a, b) in v.iter_mut().zip(q) {
                *a -= r * b;
            }
        }
        let norm = libm::sqrt(dot_trapezoid(v, v, h));
        if !(norm > 1e-12) {
            return Err(invalid(
                "B-spline elements are linearly dependent on this grid",
            ));
        }
        for a in v.iter_mut() {
            *a /= norm;
        }
    }
    Ok(BasisSystem {
        spec: BasisSpec {
            kind: BasisKind::BSpline { order },
            size,
        },
        grid,
        elements: elements
            .into_iter()
            .map(|v| DiscretizedFunction::new(grid, v))
            .collect::<Result<_>>()?,
    })
}
