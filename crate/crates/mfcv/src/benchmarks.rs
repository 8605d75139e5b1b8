//! Synthetic multifidelity test functions.
//!
//! Each function takes inputs from its own box and a fidelity s in [0, 1];
//! evaluation at s = 1 is the ground truth. A benchmark can be restricted to
//! a finite fidelity level set, in which case the acquisition enumerates the
//! levels instead of optimizing s continuously.

use crate::domain::{DomainBox, FidelitySpace};
use crate::error::{MfcvError, Result};

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Hartmann-6 exponent weights.
const HARTMANN_A: [[f64; 6]; 4] = [
    [10.0, 3.0, 17.0, 3.5, 1.7, 8.0],
    [0.05, 10.0, 17.0, 0.1, 8.0, 14.0],
    [3.0, 3.5, 1.7, 10.0, 17.0, 8.0],
    [17.0, 8.0, 0.05, 10.0, 0.1, 14.0],
];

/// Hartmann-6 centers (the classic integer table scaled by 1e-4).
const HARTMANN_P: [[f64; 6]; 4] = [
    [0.1312, 0.1696, 0.5569, 0.0124, 0.8283, 0.5886],
    [0.2329, 0.4135, 0.8307, 0.3736, 0.1004, 0.9991],
    [0.2348, 0.1451, 0.3522, 0.2883, 0.3047, 0.665],
    [0.4047, 0.8828, 0.8732, 0.5743, 0.1091, 0.0381],
];

const HARTMANN_BETA: [f64; 4] = [1.0, 1.2, 3.0, 3.2];

fn check_domain(x: &[f64], s: f64, domain: &DomainBox, name: &str) -> Result<()> {
    if x.len() != domain.dim() {
        return Err(MfcvError::DimensionMismatch {
            expected: domain.dim(),
            got: x.len(),
            context: "benchmark input",
        });
    }
    if !domain.contains(x) {
        return Err(MfcvError::OutOfDomain(format!("{name}: input {x:?}")));
    }
    if !(0.0..=1.0).contains(&s) {
        return Err(MfcvError::OutOfDomain(format!("{name}: fidelity {s}")));
    }
    Ok(())
}

/// 2D multimodal function on [-4,7] x [-3,8]; the sine term scales with s.
pub fn multimodal(x: &[f64], s: f64) -> Result<f64> {
    check_domain(x, s, &multimodal_domain(), "multimodal")?;
    Ok((x[0] * x[0] + 4.0) * (x[1] - 1.0) / 20.0 - s * (5.0 * x[0] / 2.0).sin() - 2.0)
}

pub fn multimodal_domain() -> DomainBox {
    DomainBox::new(vec![-4.0, -3.0], vec![7.0, 8.0]).unwrap()
}

/// 2D four-branches minimum on [-8,8]^2; fidelity translates the level sets.
pub fn four_branches(x: &[f64], s: f64) -> Result<f64> {
    check_domain(x, s, &four_branches_domain(), "four_branches")?;
    let x1 = x[0] - 5.0 * s;
    let x2 = x[1] - 5.0 * s;
    let diff2 = 0.1 * (x1 - x2) * (x1 - x2);
    let b1 = 3.0 + diff2 - (x1 + x2) / SQRT2;
    let b2 = 3.0 + diff2 + (x1 + x2) / SQRT2;
    let b3 = x1 - x2 + 7.0 / SQRT2;
    let b4 = x2 - x1 + 7.0 / SQRT2;
    Ok(b1.min(b2).min(b3).min(b4))
}

pub fn four_branches_domain() -> DomainBox {
    DomainBox::new(vec![-8.0, -8.0], vec![8.0, 8.0]).unwrap()
}

/// 3D Ishigami variant on [-pi,pi]^3 with an s-dependent phase shift.
pub fn ishigami(x: &[f64], s: f64) -> Result<f64> {
    check_domain(x, s, &ishigami_domain(), "ishigami")?;
    let sin1 = (x[0] - s).sin();
    Ok(sin1 + 7.0 * (x[1] - s).sin().powi(2) + 0.1 * x[2].powi(4) * sin1)
}

pub fn ishigami_domain() -> DomainBox {
    use std::f64::consts::PI;
    DomainBox::new(vec![-PI; 3], vec![PI; 3]).unwrap()
}

/// Augmented 6D Hartmann on [0,1]^6; the first basin's weight shrinks by
/// 0.1*(1-s), so s = 1 recovers the classic function.
pub fn hartmann6(x: &[f64], s: f64) -> Result<f64> {
    check_domain(x, s, &hartmann6_domain(), "hartmann6")?;
    let mut total = 0.0;
    for i in 0..4 {
        let mut expo = 0.0;
        for j in 0..6 {
            let d = x[j] - HARTMANN_P[i][j];
            expo += HARTMANN_A[i][j] * d * d;
        }
        let beta = if i == 0 {
            HARTMANN_BETA[0] - 0.1 * (1.0 - s)
        } else {
            HARTMANN_BETA[i]
        };
        total -= beta * (-expo).exp();
    }
    Ok(total)
}

pub fn hartmann6_domain() -> DomainBox {
    DomainBox::unit(6)
}

/// A named multifidelity benchmark with its fidelity space.
#[derive(Debug, Clone, PartialEq)]
pub struct Benchmark {
    kind: BenchmarkKind,
    fidelity_space: FidelitySpace,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BenchmarkKind {
    Multimodal,
    FourBranches,
    Ishigami,
    Hartmann6,
}

impl Benchmark {
    /// Look up a benchmark by its CLI name.
    pub fn by_name(name: &str) -> Result<Self> {
        let kind = match name {
            "multimodal" => BenchmarkKind::Multimodal,
            "four_branches" => BenchmarkKind::FourBranches,
            "ishigami" => BenchmarkKind::Ishigami,
            "hartmann6" => BenchmarkKind::Hartmann6,
            other => {
                return Err(MfcvError::InvalidConfig(format!(
                    "unknown benchmark '{other}' (expected multimodal, four_branches, ishigami or hartmann6)"
                )))
            }
        };
        Ok(Self {
            kind,
            fidelity_space: FidelitySpace::Continuous,
        })
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            BenchmarkKind::Multimodal => "multimodal",
            BenchmarkKind::FourBranches => "four_branches",
            BenchmarkKind::Ishigami => "ishigami",
            BenchmarkKind::Hartmann6 => "hartmann6",
        }
    }

    pub fn input_dim(&self) -> usize {
        match self.kind {
            BenchmarkKind::Multimodal | BenchmarkKind::FourBranches => 2,
            BenchmarkKind::Ishigami => 3,
            BenchmarkKind::Hartmann6 => 6,
        }
    }

    pub fn domain(&self) -> DomainBox {
        match self.kind {
            BenchmarkKind::Multimodal => multimodal_domain(),
            BenchmarkKind::FourBranches => four_branches_domain(),
            BenchmarkKind::Ishigami => ishigami_domain(),
            BenchmarkKind::Hartmann6 => hartmann6_domain(),
        }
    }

    pub fn fidelity_space(&self) -> &FidelitySpace {
        &self.fidelity_space
    }

    pub fn evaluate(&self, x: &[f64], s: f64) -> Result<f64> {
        match self.kind {
            BenchmarkKind::Multimodal => multimodal(x, s),
            BenchmarkKind::FourBranches => four_branches(x, s),
            BenchmarkKind::Ishigami => ishigami(x, s),
            BenchmarkKind::Hartmann6 => hartmann6(x, s),
        }
    }

    /// Restrict the fidelity space to a finite level set containing 1.0.
    /// Evaluation is unchanged; only the acquisition's search space shrinks.
    pub fn discretize_fidelity(self, levels: Vec<f64>) -> Result<Self> {
        Ok(Self {
            kind: self.kind,
            fidelity_space: FidelitySpace::discrete(levels)?,
        })
    }
}
