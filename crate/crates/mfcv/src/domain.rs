//! Input domains and fidelity spaces.
//!
//! All inputs live in an axis-aligned box; fidelities live either in the
//! continuous interval [0, 1] or in an explicit finite subset of it that
//! always contains the target fidelity 1.0.

use crate::error::{MfcvError, Result};

/// Axis-aligned box describing the input domain of a problem.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainBox {
    lows: Vec<f64>,
    highs: Vec<f64>,
}

impl DomainBox {
    pub fn new(lows: Vec<f64>, highs: Vec<f64>) -> Result<Self> {
        if lows.len() != highs.len() {
            return Err(MfcvError::DimensionMismatch {
                expected: lows.len(),
                got: highs.len(),
                context: "domain bounds",
            });
        }
        if lows.is_empty() {
            return Err(MfcvError::InvalidParameter {
                name: "domain",
                reason: "must have at least one dimension".into(),
            });
        }
        for (i, (lo, hi)) in lows.iter().zip(&highs).enumerate() {
            if !lo.is_finite() || !hi.is_finite() || hi <= lo {
                return Err(MfcvError::InvalidParameter {
                    name: "domain",
                    reason: format!("dimension {i} has empty or non-finite extent [{lo}, {hi}]"),
                });
            }
        }
        Ok(Self { lows, highs })
    }

    /// Hypercube [0,1]^d.
    pub fn unit(dim: usize) -> Self {
        Self {
            lows: vec![0.0; dim],
            highs: vec![1.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.lows.len()
    }

    pub fn lows(&self) -> &[f64] {
        &self.lows
    }

    pub fn highs(&self) -> &[f64] {
        &self.highs
    }

    pub fn width(&self, i: usize) -> f64 {
        self.highs[i] - self.lows[i]
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lows.iter().zip(&self.highs))
                .all(|(v, (lo, hi))| v.is_finite() && *v >= *lo && *v <= *hi)
    }

    /// Map a point into the unit hypercube.
    pub fn normalize(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(MfcvError::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
                context: "normalize",
            });
        }
        Ok(x.iter()
            .enumerate()
            .map(|(i, v)| (v - self.lows[i]) / self.width(i))
            .collect())
    }

    /// Map a unit-hypercube point back to the box.
    pub fn denormalize(&self, u: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.dim() {
            return Err(MfcvError::DimensionMismatch {
                expected: self.dim(),
                got: u.len(),
                context: "denormalize",
            });
        }
        Ok(u.iter()
            .enumerate()
            .map(|(i, v)| self.lows[i] + v * self.width(i))
            .collect())
    }

    pub fn clamp(&self, x: &mut [f64]) {
        for (i, v) in x.iter_mut().enumerate() {
            *v = v.clamp(self.lows[i], self.highs[i]);
        }
    }
}

/// Fidelity space of a problem: the full interval or a finite level set.
#[derive(Debug, Clone, PartialEq)]
pub enum FidelitySpace {
    Continuous,
    Discrete(Vec<f64>),
}

impl FidelitySpace {
    /// Validated discrete space; levels are sorted, deduplicated and must
    /// include the target fidelity 1.0.
    pub fn discrete(mut levels: Vec<f64>) -> Result<Self> {
        if levels.is_empty() {
            return Err(MfcvError::InvalidParameter {
                name: "levels",
                reason: "must not be empty".into(),
            });
        }
        for &s in &levels {
            if !(0.0..=1.0).contains(&s) {
                return Err(MfcvError::InvalidParameter {
                    name: "levels",
                    reason: format!("fidelity {s} outside [0, 1]"),
                });
            }
        }
        levels.sort_by(|a, b| a.partial_cmp(b).unwrap());
        levels.dedup();
        if !levels.contains(&1.0) {
            return Err(MfcvError::InvalidParameter {
                name: "levels",
                reason: "finite fidelity set must contain 1.0".into(),
            });
        }
        Ok(Self::Discrete(levels))
    }

    pub fn contains(&self, s: f64) -> bool {
        match self {
            Self::Continuous => (0.0..=1.0).contains(&s),
            Self::Discrete(levels) => levels.iter().any(|&l| l == s),
        }
    }

    pub fn levels(&self) -> Option<&[f64]> {
        match self {
            Self::Continuous => None,
            Self::Discrete(levels) => Some(levels),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_round_trips() {
        let b = DomainBox::new(vec![-4.0, -3.0], vec![7.0, 8.0]).unwrap();
        let x = vec![1.5, 2.0];
        let u = b.normalize(&x).unwrap();
        assert!(u.iter().all(|v| (0.0..=1.0).contains(v)));
        let back = b.denormalize(&u).unwrap();
        for (a, c) in x.iter().zip(&back) {
            assert!((a - c).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_empty_extent() {
        assert!(DomainBox::new(vec![0.0], vec![0.0]).is_err());
        assert!(DomainBox::new(vec![0.0], vec![f64::NAN]).is_err());
    }

    #[test]
    fn discrete_space_requires_target_fidelity() {
        assert!(FidelitySpace::discrete(vec![0.0, 0.5]).is_err());
        let s = FidelitySpace::discrete(vec![1.0, 0.5, 0.0, 0.5]).unwrap();
        assert_eq!(s.levels().unwrap(), &[0.0, 0.5, 1.0]);
        assert!(s.contains(0.5));
        assert!(!s.contains(0.25));
    }
}
