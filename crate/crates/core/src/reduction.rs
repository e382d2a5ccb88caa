//! Reduction of the delay relations satisfied by the optimal `g` to linear
//! ODEs on the two outermost intervals.
//!
//! Differentiating `(I + K)g = 1` gives `g′(x) = β(g(x − 1) − g(x + 1))`
//! wherever both shifts stay inside the support. Chaining these relations
//! from the outermost interval inwards and back (the "U-path") produces a
//! constant-coefficient ODE for `g` on each outer interval; the values on the
//! inner intervals follow from derivatives of the outer ones.

use std::collections::BTreeMap;

use faer::Mat;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::closedform::TrigTerm;
use crate::error::{Error, Result};
use crate::symmetry::{kernel_spec, SymmetryGroup};

/// Tolerance for recognizing integer and half-integer σ.
const SNAP_TOL: f64 = 1e-12;

/// Which half of `[k, k + 1)` contains σ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SystemCase {
    /// `k ≤ σ < k + ½`.
    HalfLow,
    /// `k + ½ ≤ σ < k + 1`.
    HalfHigh,
}

/// The two interval families partitioning `[−σ, σ]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Which {
    First,
    Second,
}

/// A closed interval, serialized as `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn is_degenerate(&self) -> bool {
        (self.hi - self.lo).abs() <= SNAP_TOL
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo - SNAP_TOL && x <= self.hi + SNAP_TOL
    }

    /// The copy shifted left by `by`, with endpoints rounded to 12 decimals
    /// so that `0.7 − 1` reports as `−0.3`.
    fn shifted(&self, by: f64) -> Interval {
        let round = |x: f64| (x * 1e12).round() / 1e12;
        Interval {
            lo: round(self.lo - by),
            hi: round(self.hi - by),
        }
    }
}

impl Serialize for Interval {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [self.lo, self.hi].serialize(s)
    }
}

/// Unit-shifted copies of the two outermost intervals.
///
/// For `HalfLow` the first list is `I₀ = [2k − σ, σ]` and its shifts
/// `I_j = I₀ − j`, `j = 0..=2k`, and the second is `J₀ = [σ − 1, 2k − σ]`
/// with `j = 0..2k`. For `HalfHigh` the first list is
/// `I₀′ = [σ − 1, 2k + 1 − σ]`, `j = 0..=2k`, and the second is
/// `J₀′ = [2k + 1 − σ, σ]`, `j = 0..=2k + 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntervalSystem {
    pub sigma: f64,
    pub k: usize,
    pub case: SystemCase,
    pub first: Vec<Interval>,
    pub second: Vec<Interval>,
    pub first_degenerate: bool,
    pub second_degenerate: bool,
}

impl IntervalSystem {
    pub fn intervals(&self, which: Which) -> &[Interval] {
        match which {
            Which::First => &self.first,
            Which::Second => &self.second,
        }
    }

    pub fn is_degenerate(&self, which: Which) -> bool {
        match which {
            Which::First => self.first_degenerate,
            Which::Second => self.second_degenerate,
        }
    }

    /// Largest unit shift in the list, i.e. the number of intervals minus one.
    pub fn max_shift(&self, which: Which) -> usize {
        self.intervals(which).len() - 1
    }

    /// Which family contains `x` (interior points of non-degenerate intervals).
    pub fn classify(&self, x: f64) -> Option<Which> {
        let hit = |list: &[Interval]| {
            list.iter()
                .any(|iv| !iv.is_degenerate() && x > iv.lo + SNAP_TOL && x < iv.hi - SNAP_TOL)
        };
        if hit(&self.first) {
            Some(Which::First)
        } else if hit(&self.second) {
            Some(Which::Second)
        } else {
            None
        }
    }
}

/// `σ` snapped onto the half-integer lattice when within rounding distance.
fn snapped(sigma: f64) -> f64 {
    let twice = (2.0 * sigma).round();
    if (2.0 * sigma - twice).abs() <= 2.0 * SNAP_TOL {
        twice / 2.0
    } else {
        sigma
    }
}

pub fn interval_systems(sigma: f64) -> Result<IntervalSystem> {
    if !(sigma.is_finite() && sigma >= 0.5) {
        return Err(Error::invalid(
            "sigma",
            format!("interval systems need sigma >= 0.5, got {sigma}"),
        ));
    }
    let s = snapped(sigma);
    let k = s.floor() as usize;
    let kf = k as f64;
    let is_integer = s == s.floor();
    let is_half = !is_integer && (2.0 * s) == (2.0 * s).floor();
    let shifts = |base: Interval, count: usize| -> Vec<Interval> {
        (0..count).map(|j| base.shifted(j as f64)).collect()
    };
    let system = if s - kf < 0.5 {
        let i0 = Interval {
            lo: 2.0 * kf - s,
            hi: s,
        };
        let j0 = Interval {
            lo: s - 1.0,
            hi: 2.0 * kf - s,
        };
        IntervalSystem {
            sigma,
            k,
            case: SystemCase::HalfLow,
            first: shifts(i0, 2 * k + 1),
            second: shifts(j0, 2 * k),
            first_degenerate: is_integer,
            second_degenerate: false,
        }
    } else {
        let i0 = Interval {
            lo: s - 1.0,
            hi: 2.0 * kf + 1.0 - s,
        };
        let j0 = Interval {
            lo: 2.0 * kf + 1.0 - s,
            hi: s,
        };
        IntervalSystem {
            sigma,
            k,
            case: SystemCase::HalfHigh,
            first: shifts(i0, 2 * k + 1),
            second: shifts(j0, 2 * k + 2),
            first_degenerate: false,
            second_degenerate: is_half,
        }
    };
    Ok(system)
}

/// `coefficient · g^{(derivative_order)}(x − shift)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DelayTerm {
    pub coefficient: BigRational,
    pub derivative_order: u32,
    pub shift: i64,
}

impl DelayTerm {
    fn new(coefficient: BigRational, derivative_order: u32, shift: i64) -> Self {
        DelayTerm {
            coefficient,
            derivative_order,
            shift,
        }
    }

    /// `derivative_order + shift`.
    pub fn full_degree(&self) -> i64 {
        self.derivative_order as i64 + self.shift
    }

    pub fn coefficient_f64(&self) -> f64 {
        self.coefficient.to_f64().unwrap_or(f64::NAN)
    }
}

fn exact_beta(beta: f64) -> Result<BigRational> {
    if !beta.is_finite() || beta == 0.0 {
        return Err(Error::invalid(
            "beta",
            format!("the reduction needs a nonzero indicator coefficient, got {beta}"),
        ));
    }
    BigRational::from_float(beta)
        .ok_or_else(|| Error::invalid("beta", format!("cannot represent {beta}")))
}

fn binomial(n: u64, k: u64) -> BigInt {
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

fn rpow(b: &BigRational, e: i64) -> BigRational {
    if e >= 0 {
        num_traits::pow(b.clone(), e as usize)
    } else {
        num_traits::pow(b.recip(), (-e) as usize)
    }
}

/// The relation reached after the turn of the U-path at maximal shift `K`:
/// `g^{(K+1)}(x) + Σ_{m=0}^{K−1} β^{m+2} g^{(K−1−m)}(x − m) = 0`.
pub fn u_path_after_turn(k_max: usize, beta: f64) -> Result<Vec<DelayTerm>> {
    if k_max == 0 {
        return Err(Error::invalid("k_max", "must be at least 1"));
    }
    let b = exact_beta(beta)?;
    let mut out = vec![DelayTerm::new(BigRational::one(), k_max as u32 + 1, 0)];
    for m in 0..k_max {
        out.push(DelayTerm::new(
            rpow(&b, m as i64 + 2),
            (k_max - 1 - m) as u32,
            m as i64,
        ));
    }
    Ok(out)
}

/// Rewrites `g^{(r)}(x − m)` in terms of derivatives of `g` at `x`:
/// `Σ_{n+j=m, j≤n} C(n, j) β^{j−n} g^{(r+n−j)}(x)`.
pub fn reduce_term(r: u32, m: u32, beta: f64) -> Result<Vec<DelayTerm>> {
    let b = exact_beta(beta)?;
    let m = m as u64;
    let mut out = Vec::new();
    // j counts the two-unit steps, n − j the one-unit steps.
    for j in 0..=m / 2 {
        let n = m - j;
        let coeff = BigRational::from_integer(binomial(n, j)) * rpow(&b, j as i64 - n as i64);
        if !coeff.is_zero() {
            out.push(DelayTerm::new(coeff, r + (n - j) as u32, 0));
        }
    }
    Ok(out)
}

/// A monic linear ODE `Σ_j c_j g^{(j)} = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OdeSpec {
    pub order: usize,
    /// `c₀ … c_order`, with `c_order = 1`.
    pub coeffs: Vec<f64>,
    #[serde(skip)]
    exact: Vec<BigRational>,
}

impl OdeSpec {
    pub fn exact_coeffs(&self) -> &[BigRational] {
        &self.exact
    }

    /// `P(z) = Σ c_j z^j`.
    pub fn characteristic(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// `|amplitude| · |P(iω)|`: zero iff the term solves the ODE.
    pub fn annihilation_defect(&self, term: &TrigTerm) -> f64 {
        term.amplitude.abs() * self.characteristic(Complex64::new(0.0, term.omega)).norm()
    }

    /// Roots of the characteristic polynomial, from the companion matrix
    /// and refined by Newton's method.
    pub fn characteristic_roots(&self) -> Result<Vec<Complex64>> {
        let n = self.order;
        let companion = Mat::<f64>::from_fn(n, n, |i, j| {
            if i == 0 {
                -self.coeffs[n - 1 - j]
            } else if i == j + 1 {
                1.0
            } else {
                0.0
            }
        });
        let eig = companion
            .eigenvalues()
            .map_err(|e| Error::Internal(format!("companion eigenvalues: {e:?}")))?;
        let deriv: Vec<f64> = (1..=n).map(|j| j as f64 * self.coeffs[j]).collect();
        let dp = |z: Complex64| {
            deriv
                .iter()
                .rev()
                .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
        };
        let mut roots: Vec<Complex64> = eig
            .into_iter()
            .map(|mut z| {
                for _ in 0..3 {
                    let d = dp(z);
                    if d.norm() == 0.0 {
                        break;
                    }
                    let step = self.characteristic(z) / d;
                    if !step.is_finite() {
                        break;
                    }
                    z -= step;
                }
                z
            })
            .collect();
        roots.sort_by(|a, b| a.im.total_cmp(&b.im).then(a.re.total_cmp(&b.re)));
        Ok(roots)
    }
}

/// Composes the U-path with the term reduction for maximal shift `k_max`.
fn ode_for_shift(k_max: usize, beta: f64) -> Result<OdeSpec> {
    let mut acc: BTreeMap<u32, BigRational> = BTreeMap::new();
    for term in u_path_after_turn(k_max, beta)? {
        for piece in reduce_term(term.derivative_order, term.shift as u32, beta)? {
            *acc.entry(piece.derivative_order)
                .or_insert_with(BigRational::zero) += &term.coefficient * &piece.coefficient;
        }
    }
    acc.retain(|_, c| !c.is_zero());
    let (&order, lead) = acc
        .iter()
        .next_back()
        .ok_or_else(|| Error::Internal("U-path produced no terms".into()))?;
    if order as usize != k_max + 1 {
        return Err(Error::Internal(format!(
            "leading order {order} differs from expected {}",
            k_max + 1
        )));
    }
    let lead = lead.clone();
    let exact: Vec<BigRational> = (0..=order)
        .map(|j| acc.get(&j).cloned().unwrap_or_else(BigRational::zero) / &lead)
        .collect();
    let coeffs = exact
        .iter()
        .map(|c| c.to_f64().unwrap_or(f64::NAN))
        .collect();
    Ok(OdeSpec {
        order: order as usize,
        coeffs,
        exact,
    })
}

/// ODEs on the outermost interval of each family; `None` marks a family
/// that has degenerated to points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutsideOdes {
    pub sigma: f64,
    pub case: SystemCase,
    pub k: usize,
    pub first: Option<OdeSpec>,
    pub second: Option<OdeSpec>,
}

impl OutsideOdes {
    pub fn get(&self, which: Which) -> Option<&OdeSpec> {
        match which {
            Which::First => self.first.as_ref(),
            Which::Second => self.second.as_ref(),
        }
    }
}

fn require_reduction_range(sigma: f64) -> Result<()> {
    if sigma.is_finite() && sigma >= 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(
            "sigma",
            format!("the reduction applies for sigma >= 1, got {sigma}"),
        ))
    }
}

pub fn outside_odes(sigma: f64, group: SymmetryGroup) -> Result<OutsideOdes> {
    require_reduction_range(sigma)?;
    let beta = kernel_spec(group).beta;
    if beta == 0.0 {
        return Err(Error::invalid(
            "group",
            "O has no indicator part; its optimal g is constant and needs no reduction",
        ));
    }
    let sys = interval_systems(sigma)?;
    let build = |which| -> Result<Option<OdeSpec>> {
        if sys.is_degenerate(which) {
            Ok(None)
        } else {
            ode_for_shift(sys.max_shift(which), beta).map(Some)
        }
    };
    Ok(OutsideOdes {
        sigma,
        case: sys.case,
        k: sys.k,
        first: build(Which::First)?,
        second: build(Which::Second)?,
    })
}

/// Number of free parameters left after the reduction.
pub fn dimension(sigma: f64) -> Result<usize> {
    require_reduction_range(sigma)?;
    let sys = interval_systems(sigma)?;
    let k = sys.k;
    Ok(
        match (sys.case, sys.first_degenerate, sys.second_degenerate) {
            (SystemCase::HalfLow, true, _) => 2 * k,
            (SystemCase::HalfLow, false, _) => 4 * k + 1,
            (SystemCase::HalfHigh, _, true) => 2 * k + 1,
            (SystemCase::HalfHigh, _, false) => 4 * k + 3,
        },
    )
}

/// Upper bound on the number of points of non-differentiability of `g`.
pub fn breakpoint_count(sigma: f64) -> Result<usize> {
    require_reduction_range(sigma)?;
    let sys = interval_systems(sigma)?;
    let k = sys.k;
    Ok(
        match (sys.case, sys.first_degenerate, sys.second_degenerate) {
            (SystemCase::HalfLow, true, _) => 2 * k - 1,
            (SystemCase::HalfLow, false, _) => 4 * k + 1,
            (SystemCase::HalfHigh, _, true) => 2 * k + 1,
            (SystemCase::HalfHigh, _, false) => 4 * k + 3,
        },
    )
}

/// How `g` on an inner interval is obtained from the outermost one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum InnerExpansion {
    /// `g|_j(x) = Σ coefficient · g|₀^{(order)}(|x| + j)`, as `(coefficient, order)`.
    Expansion(Vec<(f64, u32)>),
    /// The interval mirrors the one with this index (`g` is even).
    Reflection { index: usize },
}

pub fn inner_expansion(j: usize, which: Which, sigma: f64, beta: f64) -> Result<InnerExpansion> {
    let sys = interval_systems(sigma)?;
    let k = sys.k;
    let count = sys.intervals(which).len();
    if j >= count {
        return Err(Error::invalid(
            "j",
            format!("index {j} out of range: the family has {count} intervals"),
        ));
    }
    // Intervals up to `last_expanded` reach the origin from the right; the
    // rest are mirror images.
    let last_expanded = match (sys.case, which) {
        (SystemCase::HalfLow, Which::Second) => k.checked_sub(1),
        _ => Some(k),
    };
    match last_expanded {
        Some(limit) if j <= limit => {
            let pairs = reduce_term(0, j as u32, beta)?
                .into_iter()
                .map(|t| (t.coefficient_f64(), t.derivative_order))
                .collect();
            Ok(InnerExpansion::Expansion(pairs))
        }
        _ => Ok(InnerExpansion::Reflection {
            index: count - 1 - j,
        }),
    }
}

/// Everything the reduction says about a given σ, in one record.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReductionReport {
    pub sigma: f64,
    pub case: SystemCase,
    pub k: usize,
    pub intervals: ReportIntervals,
    pub odes: ReportOdes,
    pub dimension: usize,
    pub breakpoints: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportIntervals {
    pub first: Vec<Interval>,
    pub second: Vec<Interval>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportOdes {
    pub first: Option<Vec<f64>>,
    pub second: Option<Vec<f64>>,
}

pub fn reduction_report(sigma: f64, group: SymmetryGroup) -> Result<ReductionReport> {
    let odes = outside_odes(sigma, group)?;
    let sys = interval_systems(sigma)?;
    Ok(ReductionReport {
        sigma,
        case: sys.case,
        k: sys.k,
        intervals: ReportIntervals {
            first: sys.first,
            second: sys.second,
        },
        odes: ReportOdes {
            first: odes.first.map(|o| o.coeffs),
            second: odes.second.map(|o| o.coeffs),
        },
        dimension: dimension(sigma)?,
        breakpoints: breakpoint_count(sigma)?,
    })
}

/// Whether an exact coefficient is a nonnegative power-of-two fraction.
#[cfg(test)]
fn is_dyadic(c: &BigRational) -> bool {
    let d = c.denom().clone();
    (&d & (&d - BigInt::one())).is_zero()
}
