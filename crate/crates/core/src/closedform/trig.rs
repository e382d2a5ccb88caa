//! Piecewise trigonometric functions on `[0, σ]`, evenly extended to
//! `[−σ, σ]`, with exact evaluation, integration and application of `I + K`.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symmetry::{kernel_spec, SymmetryGroup};

/// Tolerance used when checking that segments abut.
const TILING_TOL: f64 = 1e-12;

/// `sin(t)/t`, accurate through the removable singularity.
pub(crate) fn sinc(t: f64) -> f64 {
    if t.abs() < 1e-4 {
        let t2 = t * t;
        1.0 - t2 / 6.0 + t2 * t2 / 120.0
    } else {
        t.sin() / t
    }
}

/// `∫_a^b cos(ν t + q) dt` for any real `ν`, including `ν = 0`.
pub(crate) fn cos_integral(nu: f64, q: f64, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    (b - a) * (nu * mid + q).cos() * sinc(nu * half)
}

/// `amplitude · cos(omega · x + phase)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrigTerm {
    pub amplitude: f64,
    pub omega: f64,
    pub phase: f64,
}

impl TrigTerm {
    /// Builds a term, folding a negative frequency into the phase and
    /// storing constants with zero phase.
    pub fn new(amplitude: f64, omega: f64, phase: f64) -> Self {
        if omega == 0.0 {
            TrigTerm::constant(amplitude * phase.cos())
        } else if omega < 0.0 {
            TrigTerm {
                amplitude,
                omega: -omega,
                phase: -phase,
            }
        } else {
            TrigTerm {
                amplitude,
                omega,
                phase,
            }
        }
    }

    pub fn constant(value: f64) -> Self {
        TrigTerm {
            amplitude: value,
            omega: 0.0,
            phase: 0.0,
        }
    }

    /// `amplitude · sin(omega · x + phase)`, stored as a shifted cosine.
    pub fn sine(amplitude: f64, omega: f64, phase: f64) -> Self {
        TrigTerm::new(amplitude, omega, phase - FRAC_PI_2)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.amplitude * (self.omega * x + self.phase).cos()
    }

    pub fn derivative(&self) -> Self {
        if self.omega == 0.0 {
            TrigTerm::constant(0.0)
        } else {
            TrigTerm {
                amplitude: self.amplitude * self.omega,
                omega: self.omega,
                phase: self.phase + FRAC_PI_2,
            }
        }
    }

    /// `∫_a^b` of the term.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        self.amplitude * cos_integral(self.omega, self.phase, a, b)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        TrigTerm {
            amplitude: self.amplitude * factor,
            ..*self
        }
    }
}

/// A sum of [`TrigTerm`]s on `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub lo: f64,
    pub hi: f64,
    pub terms: Vec<TrigTerm>,
}

impl Segment {
    pub fn new(lo: f64, hi: f64, terms: Vec<TrigTerm>) -> Self {
        Segment { lo, hi, terms }
    }

    /// Value of the segment's formula at `x` (not restricted to `[lo, hi]`).
    pub fn eval(&self, x: f64) -> f64 {
        self.terms.iter().map(|t| t.eval(x)).sum()
    }

    pub fn derivative(&self) -> Segment {
        Segment {
            lo: self.lo,
            hi: self.hi,
            terms: self
                .terms
                .iter()
                .map(TrigTerm::derivative)
                .filter(|t| t.amplitude != 0.0)
                .collect(),
        }
    }

    /// `∫` of the formula over `[a, b] ∩ [lo, hi]`.
    pub fn integral_clipped(&self, a: f64, b: f64) -> f64 {
        let (a, b) = (a.max(self.lo), b.min(self.hi));
        if a >= b {
            return 0.0;
        }
        self.terms.iter().map(|t| t.integral(a, b)).sum()
    }

    pub fn scaled(&self, factor: f64) -> Segment {
        Segment {
            lo: self.lo,
            hi: self.hi,
            terms: self.terms.iter().map(|t| t.scaled(factor)).collect(),
        }
    }
}

/// An even function supported on `[−σ, σ]`, stored on `[0, σ]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PiecewiseTrig {
    group: SymmetryGroup,
    sigma: f64,
    segments: Vec<Segment>,
}

/// A piece of the full (two-sided) function: `amplitude · cos(omega·t + phase)`
/// on `[lo, hi]` with `omega` of either sign.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct SignedPiece {
    pub lo: f64,
    pub hi: f64,
    pub amplitude: f64,
    pub omega: f64,
    pub phase: f64,
}

impl PiecewiseTrig {
    /// Validates that `segments` tile `[0, σ]` in order.
    pub fn new(group: SymmetryGroup, sigma: f64, segments: Vec<Segment>) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::invalid(
                "sigma",
                format!("must be positive, got {sigma}"),
            ));
        }
        let (first, last) = match (segments.first(), segments.last()) {
            (Some(f), Some(l)) => (f, l),
            _ => {
                return Err(Error::invalid(
                    "segments",
                    "at least one segment is required",
                ))
            }
        };
        if first.lo.abs() > TILING_TOL || (last.hi - sigma).abs() > TILING_TOL {
            return Err(Error::invalid(
                "segments",
                format!("must cover [0, {sigma}], got [{}, {}]", first.lo, last.hi),
            ));
        }
        for s in &segments {
            if !(s.lo < s.hi) {
                return Err(Error::invalid(
                    "segments",
                    format!("empty segment [{}, {}]", s.lo, s.hi),
                ));
            }
            let finite = s
                .terms
                .iter()
                .all(|t| t.amplitude.is_finite() && t.omega.is_finite() && t.phase.is_finite());
            if !finite {
                return Err(Error::invalid("segments", "non-finite term"));
            }
            if s.terms.iter().any(|t| t.omega < 0.0) {
                return Err(Error::invalid("segments", "negative frequency"));
            }
        }
        for w in segments.windows(2) {
            if (w[0].hi - w[1].lo).abs() > TILING_TOL {
                return Err(Error::invalid(
                    "segments",
                    format!("gap or overlap between {} and {}", w[0].hi, w[1].lo),
                ));
            }
        }
        Ok(PiecewiseTrig {
            group,
            sigma,
            segments,
        })
    }

    /// Parses the JSON layout produced by `serde_json::to_string`, re-running
    /// the tiling checks.
    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Raw {
            group: SymmetryGroup,
            sigma: f64,
            segments: Vec<Segment>,
        }
        let raw: Raw =
            serde_json::from_str(text).map_err(|e| Error::invalid("json", e.to_string()))?;
        PiecewiseTrig::new(raw.group, raw.sigma, raw.segments)
    }

    pub fn group(&self) -> SymmetryGroup {
        self.group
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Breakpoints strictly inside `(0, σ)`.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.segments[1..].iter().map(|s| s.lo).collect()
    }

    /// Points in `(−σ, σ)` where the even extension may fail to be
    /// differentiable: mirrored breakpoints, plus the origin when the
    /// one-sided slope there is nonzero.
    pub fn nonsmooth_points(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = self.breakpoints();
        let slope = self.segments[0].derivative().eval(0.0);
        let mut out: Vec<f64> = pts.iter().rev().map(|b| -b).collect();
        if slope.abs() > 1e-9 {
            out.push(0.0);
        }
        out.append(&mut pts);
        out
    }

    pub fn eval(&self, x: f64) -> f64 {
        let t = x.abs();
        if t > self.sigma {
            return 0.0;
        }
        let seg = self
            .segments
            .iter()
            .find(|s| t <= s.hi)
            .unwrap_or_else(|| self.segments.last().expect("nonempty"));
        seg.eval(t)
    }

    /// Largest disagreement between neighbouring formulas at a breakpoint.
    pub fn max_jump(&self) -> f64 {
        self.segments
            .windows(2)
            .map(|w| (w[0].eval(w[0].hi) - w[1].eval(w[1].lo)).abs())
            .fold(0.0, f64::max)
    }

    fn integral_nonneg(&self, a: f64, b: f64) -> f64 {
        self.segments.iter().map(|s| s.integral_clipped(a, b)).sum()
    }

    /// Exact `∫_a^b g`, with `g` taken as zero outside `[−σ, σ]`.
    pub fn exact_integral(&self, a: f64, b: f64) -> f64 {
        if a > b {
            return -self.exact_integral(b, a);
        }
        let (a, b) = (a.max(-self.sigma), b.min(self.sigma));
        if a >= b {
            return 0.0;
        }
        let mut total = 0.0;
        if a < 0.0 {
            let top = b.min(0.0);
            total += self.integral_nonneg(-top, -a);
        }
        if b > 0.0 {
            total += self.integral_nonneg(a.max(0.0), b);
        }
        total
    }

    /// `⟨1, g⟩ = ∫_{−σ}^{σ} g`.
    pub fn inner_product(&self) -> f64 {
        2.0 * self.integral_nonneg(0.0, self.sigma)
    }

    pub fn scaled(&self, factor: f64) -> PiecewiseTrig {
        PiecewiseTrig {
            group: self.group,
            sigma: self.sigma,
            segments: self.segments.iter().map(|s| s.scaled(factor)).collect(),
        }
    }

    pub fn with_group(&self, group: SymmetryGroup) -> PiecewiseTrig {
        PiecewiseTrig {
            group,
            ..self.clone()
        }
    }

    /// All pieces of the two-sided function; the mirrored copy of a term
    /// `cos(ω|t| + p)` on negative `t` is `cos(−ω t + p)`.
    pub(crate) fn signed_pieces(&self) -> Vec<SignedPiece> {
        let mut out = Vec::new();
        for s in self.segments.iter().rev() {
            for t in &s.terms {
                out.push(SignedPiece {
                    lo: -s.hi,
                    hi: -s.lo,
                    amplitude: t.amplitude,
                    omega: -t.omega,
                    phase: t.phase,
                });
            }
        }
        for s in &self.segments {
            for t in &s.terms {
                out.push(SignedPiece {
                    lo: s.lo,
                    hi: s.hi,
                    amplitude: t.amplitude,
                    omega: t.omega,
                    phase: t.phase,
                });
            }
        }
        out
    }

    /// Largest `|(I + K)g − 1|` over `points` equally spaced nodes of `[−σ, σ]`.
    pub fn sup_residual(&self, points: usize) -> f64 {
        let points = points.max(2);
        (0..points)
            .map(|i| -self.sigma + 2.0 * self.sigma * i as f64 / (points - 1) as f64)
            .map(|x| {
                let x = x.clamp(-self.sigma, self.sigma);
                (apply_operator_exact(self.group, self, x).expect("node inside support") - 1.0)
                    .abs()
            })
            .fold(0.0, f64::max)
    }
}

/// `(I + K)g(x) = g(x) + α∫_{−σ}^{σ} g + β∫_{x−1}^{x+1} g`, evaluated exactly.
pub fn apply_operator_exact(group: SymmetryGroup, g: &PiecewiseTrig, x: f64) -> Result<f64> {
    let sigma = g.sigma();
    if !x.is_finite() || x.abs() > sigma * (1.0 + 1e-14) {
        return Err(Error::invalid(
            "x",
            format!("{x} lies outside the support [−{sigma}, {sigma}]"),
        ));
    }
    let k = kernel_spec(group);
    let mut out = g.eval(x);
    if k.alpha != 0.0 {
        out += k.alpha * g.inner_product();
    }
    if k.beta != 0.0 {
        out += k.beta * g.exact_integral((x - 1.0).max(-sigma), (x + 1.0).min(sigma));
    }
    Ok(out)
}
