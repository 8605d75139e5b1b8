//! Sobol low-discrepancy sequence, dimensions 1..=21.
//!
//! Direction numbers follow the Joe–Kuo construction (new-joe-kuo-6 table,
//! first 21 dimensions). Points are generated in Gray-code order with 32
//! output bits; dimension 1 is the plain van der Corput sequence in base 2.
//! Optional scrambling is a seeded per-dimension digital (XOR) shift, which
//! preserves the net structure of the sequence.

use crate::error::{MfcvError, Result};
use crate::sampling::mix_seed;

pub const MAX_DIMENSION: usize = 21;

/// (s, a, m) rows for dimensions 2..=21: polynomial degree, polynomial
/// coefficient bits, initial direction integers.
const JOE_KUO: [(u32, u32, &[u32]); 20] = [
    (1, 0, &[1]),
    (2, 1, &[1, 3]),
    (3, 1, &[1, 3, 1]),
    (3, 2, &[1, 1, 1]),
    (4, 1, &[1, 1, 3, 3]),
    (4, 4, &[1, 3, 5, 13]),
    (5, 2, &[1, 1, 5, 5, 17]),
    (5, 4, &[1, 1, 5, 5, 5]),
    (5, 7, &[1, 1, 7, 11, 19]),
    (5, 11, &[1, 1, 5, 1, 1]),
    (5, 13, &[1, 1, 1, 3, 11]),
    (5, 14, &[1, 3, 5, 5, 31]),
    (6, 1, &[1, 3, 3, 9, 7, 49]),
    (6, 13, &[1, 1, 1, 15, 21, 21]),
    (6, 16, &[1, 3, 1, 13, 27, 49]),
    (6, 19, &[1, 1, 1, 15, 7, 5]),
    (6, 22, &[1, 3, 1, 15, 13, 25]),
    (6, 25, &[1, 1, 5, 5, 19, 61]),
    (7, 1, &[1, 3, 7, 11, 23, 15, 103]),
    (7, 4, &[1, 3, 7, 13, 13, 15, 69]),
];

const BITS: u32 = 32;

fn direction_numbers(dim_index: usize) -> [u32; BITS as usize] {
    let mut v = [0u32; BITS as usize];
    if dim_index == 0 {
        for (k, slot) in v.iter_mut().enumerate() {
            *slot = 1 << (BITS - 1 - k as u32);
        }
        return v;
    }
    let (s, a, m) = JOE_KUO[dim_index - 1];
    let s = s as usize;
    let mut mk = vec![0u32; BITS as usize];
    mk[..s].copy_from_slice(&m[..s]);
    for k in s..BITS as usize {
        let mut value = mk[k - s] ^ (mk[k - s] << s);
        for j in 1..s {
            if (a >> (s - 1 - j)) & 1 == 1 {
                value ^= mk[k - j] << j;
            }
        }
        mk[k] = value;
    }
    for (k, slot) in v.iter_mut().enumerate() {
        *slot = mk[k] << (BITS - 1 - k as u32);
    }
    v
}

/// Stateful Sobol generator emitting points in [0,1)^dim.
#[derive(Debug, Clone)]
pub struct SobolSequence {
    directions: Vec<[u32; BITS as usize]>,
    state: Vec<u32>,
    shift: Vec<u32>,
    index: u64,
}

impl SobolSequence {
    /// Unscrambled base sequence; the first emitted point is the origin.
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 || dim > MAX_DIMENSION {
            return Err(MfcvError::InvalidParameter {
                name: "dim",
                reason: format!("Sobol dimension must be in 1..={MAX_DIMENSION}, got {dim}"),
            });
        }
        Ok(Self {
            directions: (0..dim).map(direction_numbers).collect(),
            state: vec![0; dim],
            shift: vec![0; dim],
            index: 0,
        })
    }

    /// Seeded digital-shift scramble of the base sequence.
    pub fn scrambled(dim: usize, seed: u64) -> Result<Self> {
        let mut seq = Self::new(dim)?;
        for (j, shift) in seq.shift.iter_mut().enumerate() {
            *shift = (mix_seed(seed, "sobol-shift", j as u64) >> 32) as u32;
        }
        Ok(seq)
    }

    pub fn dim(&self) -> usize {
        self.state.len()
    }

    /// Next point of the sequence.
    pub fn next_point(&mut self) -> Vec<f64> {
        let out = self
            .state
            .iter()
            .zip(&self.shift)
            .map(|(x, sh)| f64::from(x ^ sh) / 4294967296.0)
            .collect();
        let c = self.index.trailing_ones() as usize;
        for (j, x) in self.state.iter_mut().enumerate() {
            *x ^= self.directions[j][c];
        }
        self.index += 1;
        out
    }

    /// Generate `count` consecutive points.
    pub fn take_points(&mut self, count: usize) -> Vec<Vec<f64>> {
        (0..count).map(|_| self.next_point()).collect()
    }

    /// Skip the next `count` points.
    pub fn skip(&mut self, count: usize) {
        for _ in 0..count {
            self.next_point();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_sequence_dimension_one() {
        // Radical-inverse construction in Gray-code order: after the origin
        // the sequence visits 0.5, 0.75, 0.25.
        let mut seq = SobolSequence::new(1).unwrap();
        let pts: Vec<f64> = seq.take_points(4).into_iter().map(|p| p[0]).collect();
        assert_eq!(pts, vec![0.0, 0.5, 0.75, 0.25]);
    }

    #[test]
    fn base_sequence_dimension_two() {
        let mut seq = SobolSequence::new(2).unwrap();
        let pts = seq.take_points(4);
        assert_eq!(pts[0], vec![0.0, 0.0]);
        assert_eq!(pts[1], vec![0.5, 0.5]);
        assert_eq!(pts[2], vec![0.75, 0.25]);
        assert_eq!(pts[3], vec![0.25, 0.75]);
    }

    #[test]
    fn rejects_unsupported_dimension() {
        assert!(SobolSequence::new(0).is_err());
        assert!(SobolSequence::new(22).is_err());
        assert!(SobolSequence::new(21).is_ok());
    }

    #[test]
    fn scramble_is_deterministic_and_in_unit_cube() {
        let a = SobolSequence::scrambled(5, 42).unwrap().take_points(100);
        let b = SobolSequence::scrambled(5, 42).unwrap().take_points(100);
        assert_eq!(a, b);
        let c = SobolSequence::scrambled(5, 43).unwrap().take_points(100);
        assert_ne!(a, c);
        for p in &a {
            assert!(p.iter().all(|v| (0.0..1.0).contains(v)));
        }
    }
}
