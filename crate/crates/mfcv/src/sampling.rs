//! Deterministic point generation: seed datasets, test sets, restart starts
//! and the quasi-random baseline stream.
//!
//! Every generator is a pure function of (seed, count, box). Independent
//! streams are derived by mixing the master seed with a label so that, for
//! example, changing the number of optimizer restarts never perturbs the
//! seed dataset.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::domain::{DomainBox, FidelitySpace};
use crate::error::{MfcvError, Result};
use crate::sobol::SobolSequence;

/// Derive an independent stream seed from a master seed, a label and an index.
///
/// SplitMix64 finalization over the FNV-1a hash of the label; stable across
/// platforms and releases of this crate.
pub fn mix_seed(master: u64, label: &str, index: u64) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    let mut z = master
        .wrapping_add(h)
        .wrapping_add(index.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seeded generator for a named stream.
pub fn stream_rng(master: u64, label: &str, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix_seed(master, label, index))
}

/// `count` i.i.d. uniform points over the box.
pub fn uniform_points(count: usize, domain: &DomainBox, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<f64>>> {
    for i in 0..domain.dim() {
        if domain.width(i) <= 0.0 {
            return Err(MfcvError::InvalidParameter {
                name: "domain",
                reason: format!("dimension {i} has zero width"),
            });
        }
    }
    Ok((0..count)
        .map(|_| {
            (0..domain.dim())
                .map(|i| rng.random_range(domain.lows()[i]..domain.highs()[i]))
                .collect()
        })
        .collect())
}

/// First `count` points of a scrambled Sobol sequence mapped to the box.
pub fn sobol_points(count: usize, domain: &DomainBox, seed: u64) -> Result<Vec<Vec<f64>>> {
    let mut seq = SobolSequence::scrambled(domain.dim(), seed)?;
    (0..count)
        .map(|_| domain.denormalize(&seq.next_point()))
        .collect()
}

/// Uniform fidelity draw: U(0,1) on the continuous space, uniform over the
/// level set on a discrete space.
pub fn random_fidelity(space: &FidelitySpace, rng: &mut ChaCha8Rng) -> f64 {
    match space {
        FidelitySpace::Continuous => rng.random_range(0.0..=1.0),
        FidelitySpace::Discrete(levels) => levels[rng.random_range(0..levels.len())],
    }
}

/// Assign a unit-interval draw to a discrete level by equal-mass binning, so
/// each of the m levels is selected with probability 1/m.
pub fn snap_fidelity(u: f64, space: &FidelitySpace) -> f64 {
    match space {
        FidelitySpace::Continuous => u,
        FidelitySpace::Discrete(levels) => {
            let m = levels.len();
            let idx = ((u * m as f64) as usize).min(m - 1);
            levels[idx]
        }
    }
}

/// Seed-phase plan for one experiment repetition: how many seed observations
/// and test points to generate, and from which spaces.
#[derive(Debug, Clone)]
pub struct SeedPlan {
    pub seed: u64,
    pub n_seed: usize,
    pub n_test: usize,
    pub domain: DomainBox,
    pub fidelity_space: FidelitySpace,
}

impl SeedPlan {
    /// Default sizes: 10d seed observations, 30d test points.
    pub fn with_defaults(seed: u64, domain: DomainBox, fidelity_space: FidelitySpace) -> Self {
        let d = domain.dim();
        Self {
            seed,
            n_seed: 10 * d,
            n_test: 30 * d,
            domain,
            fidelity_space,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_seed < 2 {
            return Err(MfcvError::InvalidConfig(format!(
                "n_seed must be at least 2, got {}",
                self.n_seed
            )));
        }
        if self.n_test < 1 {
            return Err(MfcvError::InvalidConfig("n_test must be at least 1".into()));
        }
        Ok(())
    }

    /// Seed input-fidelity pairs, uniform over the joint space.
    pub fn seed_points(&self) -> Result<Vec<(Vec<f64>, f64)>> {
        self.validate()?;
        let mut rng = stream_rng(self.seed, "seed-points", 0);
        let xs = uniform_points(self.n_seed, &self.domain, &mut rng)?;
        Ok(xs
            .into_iter()
            .map(|x| {
                let s = random_fidelity(&self.fidelity_space, &mut rng);
                (x, s)
            })
            .collect())
    }

    /// Fixed test inputs, always evaluated at the target fidelity s = 1.
    pub fn test_points(&self) -> Result<Vec<Vec<f64>>> {
        self.validate()?;
        let mut rng = stream_rng(self.seed, "test-points", 0);
        uniform_points(self.n_test, &self.domain, &mut rng)
    }
}
