//! Nyström discretization of `(I + K)g = 1` on `[−σ, σ]`.
//!
//! The operator `K g(x) = ∫ m(x − y) g(y) dy` is replaced by the composite
//! trapezoid rule on a uniform grid (half weights at the two endpoints), and
//! the resulting dense system is solved by LU with partial pivoting. No
//! special treatment is given to the kink of `m` at `|x − y| = 1`; accuracy
//! comes from refining the grid and is certified by [`residual_report`].

use faer::prelude::*;
use faer::Mat;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::symmetry::{kernel_spec, SymmetryGroup};

/// Uniform grid of `n + 1` nodes on `[−σ, σ]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid {
    sigma: f64,
    n: usize,
    nodes: Vec<f64>,
}

impl Grid {
    pub fn new(sigma: f64, n: usize) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::invalid(
                "sigma",
                format!("must be positive, got {sigma}"),
            ));
        }
        if n < 2 {
            return Err(Error::invalid(
                "n",
                format!("need at least 2 subintervals, got {n}"),
            ));
        }
        let nodes = (0..=n)
            .map(|j| -sigma + 2.0 * sigma * j as f64 / n as f64)
            .collect();
        Ok(Grid { sigma, n, nodes })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Number of subintervals; there are `n + 1` nodes.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn step(&self) -> f64 {
        2.0 * self.sigma / self.n as f64
    }

    /// Trapezoid weights: `h/2` at the endpoints, `h` elsewhere.
    pub fn weights(&self) -> Vec<f64> {
        let h = self.step();
        (0..=self.n)
            .map(|j| if j == 0 || j == self.n { 0.5 * h } else { h })
            .collect()
    }

    /// `|x_i − x_j|` computed from the index gap, so that separations which
    /// are exactly 1 in exact arithmetic stay exactly 1.
    #[inline]
    fn separation(&self, i: usize, j: usize) -> f64 {
        (i.abs_diff(j) as f64 * 2.0 * self.sigma) / self.n as f64
    }
}

/// Samples of a function at the nodes of a [`Grid`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n + 1 {
            return Err(Error::invalid(
                "values",
                format!("expected {} samples, got {}", grid.n + 1, values.len()),
            ));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid("values", format!("non-finite sample {bad}")));
        }
        Ok(GridFunction { grid, values })
    }

    /// Samples `f` at every node.
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.nodes.iter().map(|&x| f(x)).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sigma(&self) -> f64 {
        self.grid.sigma
    }

    pub fn scaled(&self, factor: f64) -> Self {
        GridFunction {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest `|g(x_j) − g(x_{n−j})|`.
    pub fn symmetric_defect(&self) -> f64 {
        let n = self.grid.n;
        (0..=n / 2)
            .map(|j| (self.values[j] - self.values[n - j]).abs())
            .fold(0.0, f64::max)
    }

    /// Writes `x,g` rows at 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,g\n");
        for (x, g) in self.grid.nodes.iter().zip(&self.values) {
            out.push_str(&format!("{x:.16e},{g:.16e}\n"));
        }
        out
    }
}

/// Certification data for a discrete solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualReport {
    pub sup_residual: f64,
    pub integral: f64,
    pub symmetric_defect: f64,
}

/// The matrix of `I + K_h`: entry `(i, j)` is `w_j·m(x_i − x_j) + [i = j]`.
pub fn nystrom_matrix(group: SymmetryGroup, grid: &Grid) -> Mat<f64> {
    let kernel = kernel_spec(group);
    let weights = grid.weights();
    let size = grid.n + 1;
    Mat::from_fn(size, size, |i, j| {
        let k = weights[j] * kernel.eval(grid.separation(i, j));
        if i == j {
            k + 1.0
        } else {
            k
        }
    })
}

/// Solves `(I + K_h)g = 1` on the `n`-subinterval grid over `[−σ, σ]`.
pub fn nystrom_solve(group: SymmetryGroup, sigma: f64, n: usize) -> Result<GridFunction> {
    let grid = Grid::new(sigma, n)?;
    let matrix = nystrom_matrix(group, &grid);
    let lu = matrix.partial_piv_lu();

    let diag = lu.U().diagonal().column_vector();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for i in 0..=n {
        let u = diag[i].abs();
        lo = lo.min(u);
        hi = hi.max(u);
    }
    if !(lo > 1e-12 * hi) {
        return Err(Error::Singular {
            sigma,
            detail: format!(
                "Nyström matrix for {group} with n = {n} is numerically singular \
                 (pivot ratio {:.3e})",
                lo / hi
            ),
        });
    }

    let rhs = Mat::<f64>::from_fn(n + 1, 1, |_, _| 1.0);
    let sol = lu.solve(&rhs);
    let values: Vec<f64> = (0..=n).map(|i| sol[(i, 0)]).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular {
            sigma,
            detail: "solution has non-finite entries".into(),
        });
    }
    GridFunction::new(grid, values)
}

/// Applies `I + K_h` with the same weights as [`nystrom_matrix`].
pub fn apply_operator(group: SymmetryGroup, g: &GridFunction) -> GridFunction {
    let kernel = kernel_spec(group);
    let grid = &g.grid;
    let weights = grid.weights();
    let weighted: Vec<f64> = weights.iter().zip(&g.values).map(|(w, v)| w * v).collect();
    let total: f64 = weighted.iter().sum();
    let n = grid.n;
    // m(x_i − x_j) is α everywhere plus β on the band |i − j| ≤ reach.
    let reach = (0..=n)
        .take_while(|&d| grid.separation(0, d) <= 1.0)
        .last()
        .unwrap_or(0);

    let values = (0..=n)
        .map(|i| {
            let lo = i.saturating_sub(reach);
            let hi = (i + reach).min(n);
            let band: f64 = if kernel.beta != 0.0 {
                weighted[lo..=hi].iter().sum()
            } else {
                0.0
            };
            g.values[i] + kernel.alpha * total + kernel.beta * band
        })
        .collect();
    GridFunction {
        grid: grid.clone(),
        values,
    }
}

/// Trapezoid value of `∫_{−σ}^{σ} g`.
pub fn integral(g: &GridFunction) -> f64 {
    g.grid
        .weights()
        .iter()
        .zip(&g.values)
        .map(|(w, v)| w * v)
        .sum()
}

pub fn residual_report(group: SymmetryGroup, g: &GridFunction) -> ResidualReport {
    let applied = apply_operator(group, g);
    let sup_residual = applied
        .values
        .iter()
        .map(|v| (v - 1.0).abs())
        .fold(0.0, f64::max);
    ResidualReport {
        sup_residual,
        integral: integral(g),
        symmetric_defect: g.symmetric_defect(),
    }
}
