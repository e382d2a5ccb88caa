//! The four classical compact groups, their weight functions and the
//! Fourier-side kernels `m(ξ) = α + β·𝟙[−1,1](ξ)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// Symmetry type of a family, read off from the one-level density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SymmetryGroup {
    O,
    SoEven,
    SoOdd,
    Sp,
}

impl SymmetryGroup {
    pub const ALL: [SymmetryGroup; 4] = [
        SymmetryGroup::O,
        SymmetryGroup::SoEven,
        SymmetryGroup::SoOdd,
        SymmetryGroup::Sp,
    ];

    /// The groups whose kernels carry an indicator part.
    pub const NON_ORTHOGONAL: [SymmetryGroup; 3] = [
        SymmetryGroup::SoEven,
        SymmetryGroup::SoOdd,
        SymmetryGroup::Sp,
    ];

    pub fn label(self) -> &'static str {
        match self {
            SymmetryGroup::O => "O",
            SymmetryGroup::SoEven => "SO(even)",
            SymmetryGroup::SoOdd => "SO(odd)",
            SymmetryGroup::Sp => "Sp",
        }
    }

    pub fn kernel(self) -> KernelSpec {
        kernel_spec(self)
    }
}

impl fmt::Display for SymmetryGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for SymmetryGroup {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "o" => Ok(SymmetryGroup::O),
            "so(even)" | "so-even" | "so_even" | "soeven" => Ok(SymmetryGroup::SoEven),
            "so(odd)" | "so-odd" | "so_odd" | "soodd" => Ok(SymmetryGroup::SoOdd),
            "sp" => Ok(SymmetryGroup::Sp),
            _ => Err(Error::invalid(
                "group",
                format!("unknown group `{s}` (expected O, SO(even), SO(odd) or Sp)"),
            )),
        }
    }
}

impl Serialize for SymmetryGroup {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.label())
    }
}

impl<'de> Deserialize<'de> for SymmetryGroup {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Coefficients of `m(ξ) = α + β·𝟙[−1,1](ξ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub alpha: f64,
    pub beta: f64,
}

impl KernelSpec {
    /// Evaluates `m` at `xi`; the indicator is closed at ±1.
    #[inline]
    pub fn eval(&self, xi: f64) -> f64 {
        if xi.abs() <= 1.0 {
            self.alpha + self.beta
        } else {
            self.alpha
        }
    }
}

pub fn kernel_spec(group: SymmetryGroup) -> KernelSpec {
    let (alpha, beta) = match group {
        SymmetryGroup::O => (0.5, 0.0),
        SymmetryGroup::SoEven => (0.0, 0.5),
        SymmetryGroup::SoOdd => (1.0, -0.5),
        SymmetryGroup::Sp => (0.0, -0.5),
    };
    KernelSpec { alpha, beta }
}

pub fn m_value(group: SymmetryGroup, xi: f64) -> f64 {
    kernel_spec(group).eval(xi)
}

/// `sin(2πx)/(2πx)` with the removable singularity filled in.
fn sinc_2pi(x: f64) -> f64 {
    let t = 2.0 * std::f64::consts::PI * x;
    if t.abs() < 1e-8 {
        1.0 - t * t / 6.0
    } else {
        t.sin() / t
    }
}

/// Non-atomic part of the weight function `W_G`.
///
/// Only used for plotting; the solvers work with the kernel directly.
pub fn weight_smooth_part(group: SymmetryGroup, x: f64) -> f64 {
    match group {
        SymmetryGroup::O => 1.0,
        SymmetryGroup::SoEven => 1.0 + sinc_2pi(x),
        SymmetryGroup::SoOdd | SymmetryGroup::Sp => 1.0 - sinc_2pi(x),
    }
}

/// Mass of the Dirac atom at the origin in `W_G`.
pub fn delta_mass(group: SymmetryGroup) -> f64 {
    match group {
        SymmetryGroup::O => 0.5,
        SymmetryGroup::SoOdd => 1.0,
        SymmetryGroup::SoEven | SymmetryGroup::Sp => 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use SymmetryGroup::*;

    #[test]
    fn kernel_pairs() {
        assert_eq!(
            kernel_spec(Sp),
            KernelSpec {
                alpha: 0.0,
                beta: -0.5
            }
        );
        assert_eq!(
            kernel_spec(SoOdd),
            KernelSpec {
                alpha: 1.0,
                beta: -0.5
            }
        );
        assert_eq!(
            kernel_spec(O),
            KernelSpec {
                alpha: 0.5,
                beta: 0.0
            }
        );
        assert_eq!(
            kernel_spec(SoEven),
            KernelSpec {
                alpha: 0.0,
                beta: 0.5
            }
        );
    }

    #[test]
    fn m_values() {
        assert_eq!(m_value(Sp, 0.3), -0.5);
        assert_eq!(m_value(SoOdd, 1.5), 1.0);
        assert_eq!(m_value(SoEven, 1.0), 0.5);
        assert_eq!(m_value(SoEven, -1.0), 0.5);
        assert_eq!(m_value(SoEven, 1.0 + 1e-12), 0.0);
    }

    #[test]
    fn weights() {
        assert_eq!(weight_smooth_part(Sp, 0.0), 0.0);
        assert_eq!(delta_mass(Sp), 0.0);
        assert_eq!(weight_smooth_part(SoOdd, 0.0), 0.0);
        assert_eq!(delta_mass(SoOdd), 1.0);
        assert_eq!(weight_smooth_part(O, 3.7), 1.0);
        assert_eq!(delta_mass(O), 0.5);
        assert!(
            (weight_smooth_part(SoEven, 0.25) - (1.0 + 2.0 / std::f64::consts::PI)).abs() < 1e-15
        );
    }

    #[test]
    fn parsing() {
        for g in SymmetryGroup::ALL {
            assert_eq!(g.label().parse::<SymmetryGroup>().unwrap(), g);
            assert_eq!(
                g.label().to_uppercase().parse::<SymmetryGroup>().unwrap(),
                g
            );
        }
        assert_eq!("so-even".parse::<SymmetryGroup>().unwrap(), SoEven);
        assert_eq!("SO-ODD".parse::<SymmetryGroup>().unwrap(), SoOdd);
        assert_eq!("sp".parse::<SymmetryGroup>().unwrap(), Sp);
        assert_eq!("o".parse::<SymmetryGroup>().unwrap(), O);
        assert!("U".parse::<SymmetryGroup>().is_err());
        assert!("SO(2)".parse::<SymmetryGroup>().is_err());
    }

    #[test]
    fn kernel_identities_on_grid() {
        for i in -400..=400 {
            let xi = i as f64 * 0.01;
            for g in SymmetryGroup::ALL {
                let k = kernel_spec(g);
                let ind = if xi.abs() <= 1.0 { 1.0 } else { 0.0 };
                assert_eq!(m_value(g, xi), k.alpha + k.beta * ind);
                assert_eq!(m_value(g, xi), m_value(g, -xi));
            }
            assert_eq!(m_value(SoEven, xi) + m_value(Sp, xi), 0.0);
            assert_eq!(m_value(SoOdd, xi), 1.0 + m_value(Sp, xi));
        }
    }

    #[test]
    fn serde_uses_labels() {
        let s = serde_json::to_string(&SoEven).unwrap();
        assert_eq!(s, "\"SO(even)\"");
        let g: SymmetryGroup = serde_json::from_str("\"Sp\"").unwrap();
        assert_eq!(g, Sp);
    }
}
