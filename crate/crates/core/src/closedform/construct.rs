//! Constructions of the optimal `g` for each support band.
//!
//! Every construction first builds an unscaled solution `g̃` from the
//! trigonometric families valid on each sub-interval, with coefficients fixed
//! by a small linear system, and then normalizes so that `(I + K)g(0) = 1`.
//! The normalizing constant is always computed by exact integration.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use faer::prelude::*;
use faer::Mat;
use serde::Serialize;

use super::trig::{apply_operator_exact, PiecewiseTrig, Segment, TrigTerm};
use crate::error::{Error, Result};
use crate::symmetry::{kernel_spec, SymmetryGroup};

/// A solved square system `A c = b`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientSolve {
    pub matrix: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
    pub solution: Vec<f64>,
    pub determinant: f64,
}

impl CoefficientSolve {
    /// Solves by LU with partial pivoting; `|det A| < 1e−12` is an error.
    pub fn solve(matrix: Vec<Vec<f64>>, rhs: Vec<f64>, sigma: f64) -> Result<Self> {
        let n = rhs.len();
        if matrix.len() != n || matrix.iter().any(|row| row.len() != n) {
            return Err(Error::Internal(format!(
                "coefficient system is not {n}×{n}"
            )));
        }
        let a = Mat::from_fn(n, n, |i, j| matrix[i][j]);
        let determinant = a.determinant();
        if !(determinant.abs() >= 1e-12) {
            return Err(Error::Singular {
                sigma,
                detail: format!("coefficient determinant {determinant:.3e}"),
            });
        }
        let b = Mat::from_fn(n, 1, |i, _| rhs[i]);
        let x = a.partial_piv_lu().solve(&b);
        let solution: Vec<f64> = (0..n).map(|i| x[(i, 0)]).collect();
        if solution.iter().any(|v| !v.is_finite()) {
            return Err(Error::Singular {
                sigma,
                detail: "non-finite coefficients".into(),
            });
        }
        Ok(CoefficientSolve {
            matrix,
            rhs,
            solution,
            determinant,
        })
    }

    /// `max_i |(A c − b)_i|`.
    pub fn residual(&self) -> f64 {
        self.matrix
            .iter()
            .zip(&self.rhs)
            .map(|(row, b)| {
                let ax: f64 = row.iter().zip(&self.solution).map(|(a, c)| a * c).sum();
                (ax - b).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Frequencies of the four-term family on the outermost interval for
/// `1.5 < σ < 2`: the roots of `ω⁴ − ¾ω² + 1/16`.
pub fn band2_frequencies() -> (f64, f64) {
    let r5 = 5f64.sqrt();
    ((1.0 + r5) / 4.0, (r5 - 1.0) / 4.0)
}

fn require_non_orthogonal(group: SymmetryGroup, what: &str) -> Result<()> {
    if group == SymmetryGroup::O {
        Err(Error::invalid(
            "group",
            format!("{what} is defined for SO(even), SO(odd) and Sp; use orthogonal_g for O"),
        ))
    } else {
        Ok(())
    }
}

fn require_range(sigma: f64, ok: bool, range: &str) -> Result<()> {
    if sigma.is_finite() && ok {
        Ok(())
    } else {
        Err(Error::UnsupportedRange(format!(
            "sigma = {sigma} is outside {range}"
        )))
    }
}

/// `cos(β|x| − (π + 2β)/4)`, the solution family on the band where
/// `g″ + β²g = 0`, written with a nonnegative frequency.
pub fn unit_band_cosine(beta: f64) -> TrigTerm {
    let phase = (PI + 2.0 * beta) / 4.0;
    if beta >= 0.0 {
        TrigTerm::new(1.0, beta, -phase)
    } else {
        TrigTerm::new(1.0, -beta, phase)
    }
}

/// Scales `g̃` so that `(I + K)g(0) = 1`.
fn normalize(group: SymmetryGroup, sigma: f64, segments: Vec<Segment>) -> Result<PiecewiseTrig> {
    let raw = PiecewiseTrig::new(group, sigma, segments)?;
    let gamma = apply_operator_exact(group, &raw, 0.0)?;
    if !(gamma.is_finite() && gamma.abs() > 1e-14) {
        return Err(Error::Internal(format!(
            "normalizing constant {gamma} for {group} at sigma = {sigma}"
        )));
    }
    Ok(raw.scaled(1.0 / gamma))
}

/// `g = 1/(1 + σ)` on `[−σ, σ]`, valid for every σ.
pub fn orthogonal_g(sigma: f64) -> Result<PiecewiseTrig> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::invalid(
            "sigma",
            format!("must be positive, got {sigma}"),
        ));
    }
    PiecewiseTrig::new(
        SymmetryGroup::O,
        sigma,
        vec![Segment::new(
            0.0,
            sigma,
            vec![TrigTerm::constant(1.0 / (1.0 + sigma))],
        )],
    )
}

/// For `σ ≤ ½` every pair of points is within distance 1, so the kernel is
/// the constant `α + β` and `g` is constant.
pub fn tiny_g(group: SymmetryGroup, sigma: f64) -> Result<PiecewiseTrig> {
    require_range(sigma, sigma > 0.0 && sigma <= 0.5, "(0, 0.5]")?;
    let k = kernel_spec(group);
    let value = 1.0 / (1.0 + 2.0 * sigma * (k.alpha + k.beta));
    PiecewiseTrig::new(
        group,
        sigma,
        vec![Segment::new(0.0, sigma, vec![TrigTerm::constant(value)])],
    )
}

/// `½ < σ < 1`: constant on `[0, 1−σ]`, unit-band cosine on `[1−σ, σ]`.
pub fn medium_g(group: SymmetryGroup, sigma: f64) -> Result<PiecewiseTrig> {
    require_non_orthogonal(group, "medium_g")?;
    require_range(sigma, sigma > 0.5 && sigma < 1.0, "(0.5, 1)")?;
    let f = unit_band_cosine(kernel_spec(group).beta);
    let c = f.eval(1.0 - sigma);
    normalize(
        group,
        sigma,
        vec![
            Segment::new(0.0, 1.0 - sigma, vec![TrigTerm::constant(c)]),
            Segment::new(1.0 - sigma, sigma, vec![f]),
        ],
    )
}

/// `σ = 1`: a single normalized cosine.
pub fn unit_g(group: SymmetryGroup) -> Result<PiecewiseTrig> {
    require_non_orthogonal(group, "unit_g")?;
    let (term, denom) = match group {
        SymmetryGroup::SoEven => (
            TrigTerm::new(1.0, 0.5, -(PI + 1.0) / 4.0),
            SQRT_2 * 0.25f64.sin() + ((PI + 1.0) / 4.0).sin(),
        ),
        SymmetryGroup::SoOdd => (
            TrigTerm::new(1.0, 0.5, (PI - 1.0) / 4.0),
            3.0 * ((PI + 1.0) / 4.0).sin() - 2.0 * ((PI - 1.0) / 4.0).sin(),
        ),
        SymmetryGroup::Sp => (
            TrigTerm::new(1.0, 0.5, (PI - 1.0) / 4.0),
            2.0 * ((PI - 1.0) / 4.0).sin() - ((PI - 1.0) / 4.0).cos(),
        ),
        SymmetryGroup::O => unreachable!("rejected above"),
    };
    PiecewiseTrig::new(
        group,
        1.0,
        vec![Segment::new(0.0, 1.0, vec![term.scaled(1.0 / denom)])],
    )
}

/// Unscaled `1 < σ ≤ 1.5` family for coefficients `(c₁, c₂, c₃)`.
fn band15_segments(group: SymmetryGroup, sigma: f64, c: &[f64]) -> Vec<Segment> {
    let beta = kernel_spec(group).beta;
    let f = unit_band_cosine(beta);
    let b = beta * SQRT_2;
    let w = FRAC_1_SQRT_2;
    let mut segments = vec![Segment::new(
        0.0,
        sigma - 1.0,
        vec![TrigTerm::new(c[0], w, 0.0), TrigTerm::sine(c[1], w, 0.0)],
    )];
    if 2.0 - sigma > sigma - 1.0 {
        segments.push(Segment::new(sigma - 1.0, 2.0 - sigma, vec![f]));
    }
    segments.push(Segment::new(
        (2.0 - sigma).max(sigma - 1.0),
        sigma,
        vec![
            TrigTerm::sine(b * c[0], w, -w),
            TrigTerm::new(-b * c[1], w, -w),
            TrigTerm::constant(c[2]),
        ],
    ));
    segments
}

/// The 3×3 system fixing `(c₁, c₂, c₃)` for `1 < σ ≤ 1.5`.
pub fn band15_coefficients(group: SymmetryGroup, sigma: f64) -> Result<CoefficientSolve> {
    require_non_orthogonal(group, "band15_g")?;
    require_range(sigma, sigma > 1.0 && sigma <= 1.5, "(1, 1.5]")?;
    let beta = kernel_spec(group).beta;
    let f = unit_band_cosine(beta);
    let a = (sigma - 1.0) / SQRT_2;
    let (ca, sa) = (a.cos(), a.sin());
    let sign = beta.signum();
    let matrix = vec![
        vec![ca, sa, 0.0],
        vec![ca, 0.0, 0.0],
        vec![sign * sa / SQRT_2 + ca, sign * (SQRT_2 - ca / SQRT_2), -1.0],
    ];
    let f_lo = f.eval(sigma - 1.0);
    let rhs = vec![f_lo, f_lo, f_lo - f.eval(2.0 - sigma)];
    CoefficientSolve::solve(matrix, rhs, sigma)
}

/// `1 < σ ≤ 1.5` (the endpoint 1.5 is the closure of the band, where the
/// middle piece has zero length).
pub fn band15_g(group: SymmetryGroup, sigma: f64) -> Result<PiecewiseTrig> {
    let solve = band15_coefficients(group, sigma)?;
    normalize(group, sigma, band15_segments(group, sigma, &solve.solution))
}

fn band2_rho(beta: f64, alpha: f64) -> f64 {
    (-alpha * alpha / beta + beta - alpha * alpha.sin()) / (alpha * alpha.cos())
}

/// Unnormalized `1.5 < σ < 2` family for `(c₁, c₃, c₄, c₆)`.
fn band2_segments(group: SymmetryGroup, sigma: f64, u: &[f64]) -> Vec<Segment> {
    let beta = kernel_spec(group).beta;
    let (a1, a2) = band2_frequencies();
    let (c1, c3, c4, c6) = (u[0], u[1], u[2], u[3]);
    let c5 = band2_rho(beta, a1) * c4;
    let c7 = band2_rho(beta, a2) * c6;
    let w = FRAC_1_SQRT_2;
    vec![
        Segment::new(
            0.0,
            2.0 - sigma,
            vec![TrigTerm::new(c1 / (2.0 * beta), w, 0.0)],
        ),
        Segment::new(
            2.0 - sigma,
            sigma - 1.0,
            vec![
                TrigTerm::new(a1 * c4 / beta, a1, 0.0),
                TrigTerm::sine(-a1 * c5 / beta, a1, 0.0),
                TrigTerm::new(a2 * c6 / beta, a2, 0.0),
                TrigTerm::sine(-a2 * c7 / beta, a2, 0.0),
            ],
        ),
        Segment::new(
            sigma - 1.0,
            3.0 - sigma,
            vec![TrigTerm::sine(c1 * w, w, -w), TrigTerm::constant(c3)],
        ),
        Segment::new(
            3.0 - sigma,
            sigma,
            vec![
                TrigTerm::sine(c4, a1, -a1),
                TrigTerm::new(c5, a1, -a1),
                TrigTerm::sine(c6, a2, -a2),
                TrigTerm::new(c7, a2, -a2),
            ],
        ),
    ]
}

/// The 4×4 system for `(c₁, c₃, c₄, c₆)`: continuity at the three interior
/// breakpoints and `(I + K)g(0) = 1`.
pub fn band2_coefficients(group: SymmetryGroup, sigma: f64) -> Result<CoefficientSolve> {
    require_non_orthogonal(group, "band2_g")?;
    require_range(sigma, sigma > 1.5 && sigma < 2.0, "(1.5, 2)")?;
    let mut columns = Vec::with_capacity(4);
    for j in 0..4 {
        let mut u = [0.0; 4];
        u[j] = 1.0;
        let segs = band2_segments(group, sigma, &u);
        let jumps: Vec<f64> = segs
            .windows(2)
            .map(|w| w[0].eval(w[0].hi) - w[1].eval(w[1].lo))
            .collect();
        let basis = PiecewiseTrig::new(group, sigma, segs)?;
        let at_zero = apply_operator_exact(group, &basis, 0.0)?;
        columns.push([jumps[0], jumps[1], jumps[2], at_zero]);
    }
    let matrix = (0..4)
        .map(|i| (0..4).map(|j| columns[j][i]).collect())
        .collect();
    CoefficientSolve::solve(matrix, vec![0.0, 0.0, 0.0, 1.0], sigma)
}

/// `1.5 < σ < 2`.
pub fn band2_g(group: SymmetryGroup, sigma: f64) -> Result<PiecewiseTrig> {
    let solve = band2_coefficients(group, sigma)?;
    PiecewiseTrig::new(group, sigma, band2_segments(group, sigma, &solve.solution))
}

/// Dispatches to the construction covering `(group, σ)`.
pub fn closed_form_g(group: SymmetryGroup, sigma: f64) -> Result<PiecewiseTrig> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::invalid(
            "sigma",
            format!("must be positive, got {sigma}"),
        ));
    }
    if group == SymmetryGroup::O {
        return orthogonal_g(sigma);
    }
    if sigma <= 0.5 {
        tiny_g(group, sigma)
    } else if sigma < 1.0 {
        medium_g(group, sigma)
    } else if sigma == 1.0 {
        unit_g(group)
    } else if sigma <= 1.5 {
        band15_g(group, sigma)
    } else if sigma < 2.0 {
        band2_g(group, sigma)
    } else {
        Err(Error::UnsupportedRange(format!(
            "unsupported range: no closed form for {group} at sigma = {sigma} \
             (closed forms cover sigma < 2), use nystrom_solve"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use SymmetryGroup::*;

    fn sec(x: f64) -> f64 {
        1.0 / x.cos()
    }

    #[test]
    fn coefficient_solve_basics() {
        let s = CoefficientSolve::solve(vec![vec![2.0, 1.0], vec![1.0, 3.0]], vec![3.0, 5.0], 1.0)
            .unwrap();
        assert!((s.determinant - 5.0).abs() < 1e-14);
        assert!((s.solution[0] - 0.8).abs() < 1e-14 && (s.solution[1] - 1.4).abs() < 1e-14);
        assert!(s.residual() < 1e-14);
        let singular =
            CoefficientSolve::solve(vec![vec![1.0, 2.0], vec![2.0, 4.0]], vec![1.0, 1.0], 1.0);
        assert!(matches!(singular, Err(Error::Singular { .. })));
    }

    #[test]
    fn orthogonal_and_tiny_constants() {
        for (sigma, expected) in [(1.0, 0.5), (3.0, 0.25), (0.25, 0.8)] {
            assert!((orthogonal_g(sigma).unwrap().eval(0.1) - expected).abs() < 1e-15);
        }
        assert!((tiny_g(Sp, 0.4).unwrap().eval(0.0) - 5.0 / 3.0).abs() < 1e-15);
        assert!((tiny_g(SoEven, 0.5).unwrap().eval(0.2) - 2.0 / 3.0).abs() < 1e-15);
        assert!((tiny_g(SoOdd, 0.4).unwrap().eval(0.0) - 1.0 / 1.4).abs() < 1e-15);
        assert!(tiny_g(Sp, 0.6).is_err());
        assert!(orthogonal_g(-1.0).is_err());
    }

    #[test]
    fn medium_pieces_and_residual() {
        let g = medium_g(SoEven, 0.75).unwrap();
        assert_eq!(g.breakpoints(), vec![0.25]);
        for x in [0.0, 0.4, 0.74] {
            assert!((apply_operator_exact(SoEven, &g, x).unwrap() - 1.0).abs() < 1e-10);
        }
        let sp = medium_g(Sp, 0.6).unwrap();
        let seg = &sp.segments()[1];
        let ratio = seg.eval(0.5) / (0.25 + (PI - 1.0) / 4.0).cos();
        for x in [0.41, 0.5, 0.59] {
            let shape = (x / 2.0 + (PI - 1.0) / 4.0).cos();
            assert!((seg.eval(x) - ratio * shape).abs() < 1e-14);
        }
        assert!(medium_g(O, 0.7).is_err());
        assert!(medium_g(Sp, 1.0).is_err());
    }

    /// The scale applied to the raw family is `c₁/g(0)`; compare it with the
    /// explicit expressions, reading the stray `s` in the SO(even) one as σ.
    #[test]
    fn band15_scalings_match_explicit_expressions() {
        for sigma in [1.05f64, 1.2, 1.35, 1.45] {
            let r2 = SQRT_2;
            let a = ((3.0 - 2.0 * sigma) / 4.0).sin();
            let b = ((-2.0 * sigma + PI + 3.0) / 4.0).sin();
            let c = ((2.0 * sigma + PI - 3.0) / 4.0).sin();
            let t = ((sigma - 1.0) / r2).tan();
            let scale = |group| {
                let c1 = band15_coefficients(group, sigma).unwrap().solution[0];
                c1 / band15_g(group, sigma).unwrap().eval(0.0)
            };
            let even = 2.0 * r2 * a + (sigma - 1.0) * b + 0.5 * c * (r2 * (sigma + 1.0) * t + 2.0);
            let sp = -2.0 * r2 * a
                + (sigma - 1.0) * ((2.0 * sigma + 3.0 * PI - 3.0) / 4.0).cos()
                + 0.5 * b * (r2 * (sigma - 3.0) * t + 2.0);
            let odd =
                sp + 4.0 * (sigma - 1.0) * c + 4.0 * r2 * a - 2.0 * r2 * (sigma - 2.0) * b * t;
            assert!((scale(SoEven) - even).abs() < 1e-9, "{sigma}");
            assert!((scale(Sp) - sp).abs() < 1e-9, "{sigma}");
            assert!((scale(SoOdd) - odd).abs() < 1e-9, "{sigma}");
        }
    }

    #[test]
    fn band15_coefficients_match_explicit_values() {
        for sigma in [1.05, 1.2, 1.35, 1.45] {
            let a = (sigma - 1.0) / SQRT_2;
            let even = band15_coefficients(SoEven, sigma).unwrap();
            let c1 = ((sigma - 1.0) / 2.0 - (1.0 + PI) / 4.0).cos() * sec(a);
            let c3 = ((2.0 * sigma + 3.0 * PI - 3.0) / 4.0).sin()
                + ((-2.0 * sigma + 3.0 * PI + 3.0) / 4.0).sin() * a.tan() / SQRT_2;
            assert!((even.solution[0] - c1).abs() < 1e-9);
            assert!(even.solution[1].abs() < 1e-10);
            assert!((even.solution[2] - c3).abs() < 1e-9);
            assert!((even.determinant.abs() - (a.cos() * a.sin()).abs()).abs() < 1e-12);

            for group in [SoOdd, Sp] {
                let s = band15_coefficients(group, sigma).unwrap();
                let c1 = ((1.0 - sigma) / 2.0 + (1.0 - PI) / 4.0).cos() * sec(a);
                let c3 = ((-2.0 * sigma + 3.0 * PI + 3.0) / 4.0).sin()
                    - ((2.0 * sigma + 3.0 * PI - 3.0) / 4.0).sin() * a.tan() / SQRT_2;
                assert!((s.solution[0] - c1).abs() < 1e-9);
                assert!(s.solution[1].abs() < 1e-10);
                assert!((s.solution[2] - c3).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn band_residuals() {
        for group in [SoEven, SoOdd, Sp] {
            for sigma in [1.001, 1.2, 1.3, 1.5, 1.55, 1.7, 1.9] {
                let g = closed_form_g(group, sigma).unwrap();
                assert!(
                    g.max_jump() < 1e-10,
                    "{group} {sigma}: jump {}",
                    g.max_jump()
                );
                let r = g.sup_residual(101);
                assert!(r < 1e-8, "{group} {sigma}: residual {r}");
            }
        }
    }

    #[test]
    fn band2_shape() {
        let g = band2_g(SoEven, 1.7).unwrap();
        assert_eq!(g.segments().len(), 4);
        assert!(g.nonsmooth_points().len() <= 7);
        let s = band2_coefficients(Sp, 1.7).unwrap();
        assert!(s.determinant.abs() > 1e-12);
        assert!(s.residual() < 1e-12);
        let (a1, a2) = band2_frequencies();
        assert!((a1 - 0.5 * ((3.0 + 5f64.sqrt()) / 2.0).sqrt()).abs() < 1e-15);
        assert!((a2 - 0.5 * ((3.0 - 5f64.sqrt()) / 2.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn dispatch() {
        assert!((closed_form_g(O, 7.3).unwrap().eval(1.0) - 1.0 / 8.3).abs() < 1e-15);
        assert_eq!(closed_form_g(SoEven, 1.0).unwrap(), unit_g(SoEven).unwrap());
        let err = closed_form_g(Sp, 2.0).unwrap_err();
        assert!(err.is_validation());
        assert!(err.to_string().contains("unsupported range"));
        assert!(closed_form_g(Sp, 0.0).is_err());
        let near = closed_form_g(Sp, 1.99).unwrap();
        assert!(near.sup_residual(101) < 1e-6);
    }

    #[test]
    fn unit_inner_products() {
        // g = cos(t/2 + c)/N on [0, 1], so ⟨1, g⟩ = 4(sin(1/2 + c) − sin c)/N
        let q = (PI + 1.0) / 4.0;
        let r = (PI - 1.0) / 4.0;
        let cases = [
            (SoEven, -q, 2f64.sqrt() * 0.25f64.sin() + q.sin()),
            (SoOdd, r, 3.0 * q.sin() - 2.0 * r.sin()),
            (Sp, r, 2.0 * r.sin() - r.cos()),
        ];
        for (group, c, norm) in cases {
            let g = unit_g(group).unwrap();
            let expected = 4.0 * ((0.5 + c).sin() - c.sin()) / norm;
            assert!((g.inner_product() - expected).abs() < 1e-12, "{group}");
            assert!(g.sup_residual(101) < 1e-9);
        }
        // the Sp and SO(odd) infima differ by exactly one
        let sp = 1.0 / unit_g(Sp).unwrap().inner_product();
        let odd = 1.0 / unit_g(SoOdd).unwrap().inner_product();
        assert!((odd - sp - 1.0).abs() < 1e-12);
        assert!(unit_g(O).is_err());
    }
}
