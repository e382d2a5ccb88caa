//! Infima, naive-pair comparisons, rank bounds, σ-sweeps and the
//! reconstruction of `φ` and `φ̂` from `g`.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Serialize, Serializer};

use crate::closedform::{closed_form_g, cos_integral, sinc, PiecewiseTrig};
use crate::error::{Error, Result};
use crate::fredholm::{nystrom_solve, residual_report, GridFunction};
use crate::symmetry::{kernel_spec, SymmetryGroup};

/// Number of points at which closed-form residuals are certified.
pub const RESIDUAL_POINTS: usize = 101;

/// How `g` is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ClosedForm,
    /// Nyström with the given number of subintervals.
    Nystrom(usize),
}

impl Method {
    pub fn label(&self) -> &'static str {
        match self {
            Method::ClosedForm => "closed",
            Method::Nystrom(_) => "nystrom",
        }
    }

    /// Tolerance for monotonicity verdicts: Nyström noise at moderate `n`
    /// can exceed the true decrement over a small σ step.
    pub fn monotone_tolerance(&self) -> f64 {
        match self {
            Method::ClosedForm => 1e-6,
            Method::Nystrom(_) => 1e-3,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl Serialize for Method {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.label())
    }
}

/// Full-precision (17 significant digit) rendering used in every CSV.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InfimumResult {
    pub group: SymmetryGroup,
    pub sigma: f64,
    pub method: Method,
    pub value: f64,
    pub inner_product: f64,
    pub residual: f64,
}

impl InfimumResult {
    pub const CSV_HEADER: &'static str = "group,sigma,method,value,inner_product,residual";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.group,
            fmt_f64(self.sigma),
            self.method,
            fmt_f64(self.value),
            fmt_f64(self.inner_product),
            fmt_f64(self.residual)
        )
    }
}

/// Optimal `g` in either representation.
#[derive(Debug, Clone, PartialEq)]
pub enum Solution {
    Closed(PiecewiseTrig),
    Grid(GridFunction),
}

pub fn solve(group: SymmetryGroup, sigma: f64, method: Method) -> Result<Solution> {
    match method {
        Method::ClosedForm => closed_form_g(group, sigma).map(Solution::Closed),
        Method::Nystrom(n) => nystrom_solve(group, sigma, n).map(Solution::Grid),
    }
}

/// `𝕴_G(σ) = 1/⟨1, g⟩`, with the residual of `g` attached.
pub fn infimum(group: SymmetryGroup, sigma: f64, method: Method) -> Result<InfimumResult> {
    let (inner_product, residual) = match solve(group, sigma, method)? {
        Solution::Closed(g) => (g.inner_product(), g.sup_residual(RESIDUAL_POINTS)),
        Solution::Grid(g) => {
            let rep = residual_report(group, &g);
            (rep.integral, rep.sup_residual)
        }
    };
    if !(inner_product > 0.0 && inner_product.is_finite()) {
        return Err(Error::Internal(format!(
            "⟨1, g⟩ = {inner_product} for {group} at sigma = {sigma}"
        )));
    }
    Ok(InfimumResult {
        group,
        sigma,
        method,
        value: 1.0 / inner_product,
        inner_product,
        residual,
    })
}

/// Value of the functional at the naive pair `φ = (sin(2πσx)/(2πσx))²`.
///
/// With `s = 2σ`, `φ̂` is the triangle `(1 − |y|/s)/s` on `[−s, s]`, so the
/// functional is `φ̂(0) + α·∫φ̂ + β·∫_{−1}^{1}φ̂` with `∫φ̂ = 1`. For `s ≥ 1`
/// this gives `2/s − 1/(2s²)`, `1 + 1/(2s²)` and `1/(2s²)` for SO(even),
/// SO(odd) and Sp.
pub fn naive_bound(group: SymmetryGroup, sigma: f64) -> f64 {
    let s = 2.0 * sigma;
    let k = kernel_spec(group);
    let central = if s <= 1.0 {
        1.0
    } else {
        2.0 / s - 1.0 / (s * s)
    };
    1.0 / s + k.alpha + k.beta * central
}

/// Average-rank consequences of the optimal test function.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankBoundReport {
    pub group: SymmetryGroup,
    pub sigma: f64,
    /// Upper bound on the average rank.
    pub g_bound: f64,
    /// Lower bound on the proportion of rank-zero members, `1 − g`.
    pub p0_lower: f64,
    /// Upper bounds `g/m` on the proportion of rank at least `m`, `m = 1..=5`.
    pub pm_upper: Vec<(u32, f64)>,
}

pub fn rank_bounds(group: SymmetryGroup, sigma: f64, method: Method) -> Result<RankBoundReport> {
    let g_bound = infimum(group, sigma, method)?.value;
    Ok(RankBoundReport {
        group,
        sigma,
        g_bound,
        p0_lower: 1.0 - g_bound,
        pm_upper: (1..=5).map(|m| (m, g_bound / m as f64)).collect(),
    })
}

/// Explicit average-rank bound for `1 < σ < 1.5` (any σ for O), kept as a
/// regression cross-check of [`rank_bounds`].
pub fn rank_bound_formula(group: SymmetryGroup, sigma: f64) -> Option<f64> {
    if group == SymmetryGroup::O {
        return Some(1.0 / (2.0 * sigma) + 0.5);
    }
    if !(sigma > 1.0 && sigma < 1.5) {
        return None;
    }
    let r2 = 2f64.sqrt();
    let s = sigma;
    let a = ((3.0 - 2.0 * s) / 4.0).sin();
    let b = ((-2.0 * s + PI + 3.0) / 4.0).sin();
    let c = ((2.0 * s + PI - 3.0) / 4.0).sin();
    let t = ((s - 1.0) / r2).tan();
    let value = match group {
        SymmetryGroup::SoEven => {
            (4.0 * r2 * a + 2.0 * (s - 1.0) * b + c * (r2 * (s + 1.0) * t + 2.0))
                / (8.0 * r2 * a + 8.0 * (s - 1.0) * b + 4.0 * r2 * s * c * t)
        }
        SymmetryGroup::Sp => {
            (-2.0 * (s - 1.0) * c - 4.0 * r2 * a + b * (r2 * (s - 3.0) * t + 2.0))
                / (8.0 * (s - 1.0) * c + 8.0 * r2 * a - 4.0 * r2 * (s - 2.0) * b * t)
        }
        SymmetryGroup::SoOdd => {
            (6.0 * (s - 1.0) * c + 4.0 * r2 * a + b * (r2 * (5.0 - 3.0 * s) * t + 2.0))
                / (8.0 * (s - 1.0) * c + 8.0 * r2 * a - 4.0 * r2 * (s - 2.0) * b * t)
        }
        SymmetryGroup::O => unreachable!(),
    };
    Some(value)
}

/// Operations shared by the exact and the sampled representation of `g`.
pub trait SupportFunction: Sized {
    fn support(&self) -> f64;
    /// `⟨1, g⟩`.
    fn total_integral(&self) -> f64;
    fn rescaled(&self, factor: f64) -> Self;
    /// The group the function was solved for, when recorded.
    fn solved_for(&self) -> Option<SymmetryGroup>;
    fn relabeled(self, group: SymmetryGroup) -> Self;
    /// `h(x) = ∫ g(ξ) e^{2πixξ} dξ`.
    fn inverse_transform(&self, x: f64) -> Complex64;
}

/// `∫_lo^hi e^{iκt} dt`.
fn exp_integral(kappa: f64, lo: f64, hi: f64) -> Complex64 {
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    Complex64::from_polar((hi - lo) * sinc(kappa * half), kappa * mid)
}

impl SupportFunction for PiecewiseTrig {
    fn support(&self) -> f64 {
        self.sigma()
    }

    fn total_integral(&self) -> f64 {
        self.inner_product()
    }

    fn rescaled(&self, factor: f64) -> Self {
        self.scaled(factor)
    }

    fn solved_for(&self) -> Option<SymmetryGroup> {
        Some(self.group())
    }

    fn relabeled(self, group: SymmetryGroup) -> Self {
        self.with_group(group)
    }

    fn inverse_transform(&self, x: f64) -> Complex64 {
        let k = 2.0 * PI * x;
        self.signed_pieces()
            .iter()
            .map(|p| {
                let plus =
                    Complex64::from_polar(1.0, p.phase) * exp_integral(k + p.omega, p.lo, p.hi);
                let minus =
                    Complex64::from_polar(1.0, -p.phase) * exp_integral(k - p.omega, p.lo, p.hi);
                0.5 * p.amplitude * (plus + minus)
            })
            .sum()
    }
}

impl SupportFunction for GridFunction {
    fn support(&self) -> f64 {
        self.sigma()
    }

    fn total_integral(&self) -> f64 {
        crate::fredholm::integral(self)
    }

    fn rescaled(&self, factor: f64) -> Self {
        self.scaled(factor)
    }

    fn solved_for(&self) -> Option<SymmetryGroup> {
        None
    }

    fn relabeled(self, _group: SymmetryGroup) -> Self {
        self
    }

    fn inverse_transform(&self, x: f64) -> Complex64 {
        let k = 2.0 * PI * x;
        let grid = self.grid();
        grid.weights()
            .iter()
            .zip(grid.nodes())
            .zip(self.values())
            .map(|((w, &t), v)| Complex64::from_polar(w * v, k * t))
            .sum()
    }
}

/// `g_SO(odd) = g_Sp / (1 + ⟨1, g_Sp⟩)`.
pub fn soodd_from_sp<T: SupportFunction>(g_sp: T) -> Result<T> {
    if let Some(group) = g_sp.solved_for() {
        if group != SymmetryGroup::Sp {
            return Err(Error::invalid(
                "g_sp",
                format!("expected a symplectic solution, got one for {group}"),
            ));
        }
    }
    let denom = 1.0 + g_sp.total_integral();
    if denom.abs() < 1e-12 {
        return Err(Error::Internal("⟨1, g_Sp⟩ = −1".into()));
    }
    Ok(g_sp.rescaled(1.0 / denom).relabeled(SymmetryGroup::SoOdd))
}

/// `φ(x) = h(x)²` at each `x`; fails if `h` is not real to 1e−10.
pub fn phi_from_g<T: SupportFunction>(g: &T, xs: &[f64]) -> Result<Vec<(f64, f64)>> {
    xs.iter()
        .map(|&x| {
            let h = g.inverse_transform(x);
            if h.im.abs() > 1e-10 * h.re.abs().max(1.0) {
                return Err(Error::Internal(format!(
                    "inverse transform not real at x = {x}: imaginary part {:.3e}",
                    h.im
                )));
            }
            Ok((x, h.re * h.re))
        })
        .collect()
}

/// `φ̂(y) = ∫ g(t) g(t − y) dt`, exactly; zero for `|y| ≥ 2σ`.
pub fn phi_hat_from_g(g: &PiecewiseTrig, ys: &[f64]) -> Vec<(f64, f64)> {
    let pieces = g.signed_pieces();
    let sigma = g.sigma();
    ys.iter()
        .map(|&y| {
            if y.abs() >= 2.0 * sigma {
                return (y, 0.0);
            }
            let mut total = 0.0;
            for p in &pieces {
                for q in &pieces {
                    let lo = p.lo.max(q.lo + y);
                    let hi = p.hi.min(q.hi + y);
                    if lo >= hi {
                        continue;
                    }
                    let sum =
                        cos_integral(p.omega + q.omega, p.phase + q.phase - q.omega * y, lo, hi);
                    let diff =
                        cos_integral(p.omega - q.omega, p.phase - q.phase + q.omega * y, lo, hi);
                    total += 0.5 * p.amplitude * q.amplitude * (sum + diff);
                }
            }
            (y, total)
        })
        .collect()
}

/// `count` equally spaced points on `[−half_width, half_width]`.
pub fn sample_points(count: usize, half_width: f64) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..count)
            .map(|i| -half_width + 2.0 * half_width * i as f64 / (count - 1) as f64)
            .collect(),
    }
}

pub fn samples_csv(samples: &[(f64, f64)]) -> String {
    let mut out = String::from("x,value\n");
    for (x, v) in samples {
        out.push_str(&format!("{},{}\n", fmt_f64(*x), fmt_f64(*v)));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub sigma: f64,
    pub optimal_inf: f64,
    pub naive_bound: f64,
    pub improvement: f64,
    pub residual: f64,
    pub method: Method,
}

impl SweepRow {
    pub const CSV_HEADER: &'static str =
        "sigma,optimal_inf,naive_bound,improvement,residual,method";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            fmt_f64(self.sigma),
            fmt_f64(self.optimal_inf),
            fmt_f64(self.naive_bound),
            fmt_f64(self.improvement),
            fmt_f64(self.residual),
            self.method
        )
    }
}

/// A σ-sweep with its monotonicity verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sweep {
    pub group: SymmetryGroup,
    pub rows: Vec<SweepRow>,
    /// Every step decreases in exact floating-point comparison.
    pub strictly_decreasing: bool,
    /// Every step satisfies `inf(σ_{i+1}) < inf(σ_i) + tolerance`.
    pub decreasing_within_tolerance: bool,
    pub tolerance: f64,
    /// Largest `inf(σ_{i+1}) − inf(σ_i)` (negative when decreasing).
    pub max_step_change: f64,
}

impl Sweep {
    pub fn to_csv(&self) -> String {
        let mut out = format!("{}\n", SweepRow::CSV_HEADER);
        for r in &self.rows {
            out.push_str(&r.csv_row());
            out.push('\n');
        }
        out
    }
}

/// The σ values `lo, lo + step, …, ≤ hi`, rounded to 12 decimals so that
/// lattice points such as 1.0 are hit exactly.
pub fn sigma_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(lo.is_finite() && lo > 0.0) {
        return Err(Error::invalid(
            "from",
            format!("must be positive, got {lo}"),
        ));
    }
    if !(hi.is_finite() && hi > lo) {
        return Err(Error::invalid(
            "to",
            format!("must exceed from = {lo}, got {hi}"),
        ));
    }
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::invalid(
            "step",
            format!("must be positive, got {step}"),
        ));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    Ok((0..count)
        .map(|i| ((lo + i as f64 * step) * 1e12).round() / 1e12)
        .collect())
}

pub fn sweep(
    group: SymmetryGroup,
    sigma_lo: f64,
    sigma_hi: f64,
    step: f64,
    method: Method,
) -> Result<Sweep> {
    let sigmas = sigma_grid(sigma_lo, sigma_hi, step)?;
    let rows = sigmas
        .iter()
        .map(|&sigma| {
            let inf = infimum(group, sigma, method)?;
            let naive = naive_bound(group, sigma);
            Ok(SweepRow {
                sigma,
                optimal_inf: inf.value,
                naive_bound: naive,
                improvement: naive - inf.value,
                residual: inf.residual,
                method,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let tolerance = method.monotone_tolerance();
    let changes: Vec<f64> = rows
        .windows(2)
        .map(|w| w[1].optimal_inf - w[0].optimal_inf)
        .collect();
    Ok(Sweep {
        group,
        strictly_decreasing: changes.iter().all(|&d| d < 0.0),
        decreasing_within_tolerance: changes.iter().all(|&d| d < tolerance),
        tolerance,
        max_step_change: changes.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        rows,
    })
}

/// One row of the naive-versus-optimal comparison table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    pub sigma: f64,
    pub group: SymmetryGroup,
    pub optimal_inf: f64,
    pub naive_bound: f64,
    pub improvement: f64,
    pub method: Method,
}

impl CompareRow {
    pub const CSV_HEADER: &'static str = "sigma,group,optimal_inf,naive_bound,improvement,method";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            fmt_f64(self.sigma),
            self.group,
            fmt_f64(self.optimal_inf),
            fmt_f64(self.naive_bound),
            fmt_f64(self.improvement),
            self.method
        )
    }
}

pub fn compare(
    groups: &[SymmetryGroup],
    sigmas: &[f64],
    method: Method,
) -> Result<Vec<CompareRow>> {
    let mut out = Vec::with_capacity(groups.len() * sigmas.len());
    for &sigma in sigmas {
        for &group in groups {
            let inf = infimum(group, sigma, method)?.value;
            let naive = naive_bound(group, sigma);
            out.push(CompareRow {
                sigma,
                group,
                optimal_inf: inf,
                naive_bound: naive,
                improvement: naive - inf,
                method,
            });
        }
    }
    Ok(out)
}
