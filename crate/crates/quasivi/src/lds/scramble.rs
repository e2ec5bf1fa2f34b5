//! Digital randomizations of base-2 point sets.
//!
//! Two modes are provided. A digital (XOR) shift flips each point's digits
//! by a per-dimension random word; it makes every coordinate marginally
//! uniform while preserving digital-net structure exactly. The linear
//! matrix scramble (Matousek) additionally multiplies the digit vector by a
//! random lower-triangular bit matrix with unit diagonal before shifting,
//! which decorrelates digits across randomizations and attains the
//! O(N^-2) variance rate on smooth integrands.

use super::direction::SOBOL_BITS;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Per-dimension digital shift words.
pub(super) fn shift_words(d: usize, seed: u64) -> Vec<u32> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..d).map(|_| rng.next_u32()).collect()
}

/// Per-dimension scramble matrices (column form) plus shift words.
///
/// Column `k` of a matrix carries the unit diagonal bit for digit `k`
/// (weight 2^-(k+1), stored MSB-first) and random entries in the strictly
/// less significant digits.
pub(super) struct LinearScramble {
    pub columns: Vec<[u32; SOBOL_BITS]>,
    pub shifts: Vec<u32>,
}

pub(super) fn linear_scramble(d: usize, seed: u64) -> LinearScramble {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut columns = Vec::with_capacity(d);
    let mut shifts = Vec::with_capacity(d);
    for _ in 0..d {
        let mut cols = [0u32; SOBOL_BITS];
        for (k, col) in cols.iter_mut().enumerate() {
            let diag = 1u32 << (31 - k);
            *col = diag | (rng.next_u32() & (diag - 1));
        }
        columns.push(cols);
        shifts.push(rng.next_u32());
    }
    LinearScramble { columns, shifts }
}

/// Applies the lower-triangular bit matrix to one digit word.
pub(super) fn apply_columns(cols: &[u32; SOBOL_BITS], x: u32) -> u32 {
    let mut y = 0u32;
    let mut bits = x;
    while bits != 0 {
        let b = bits.trailing_zeros() as usize; // digit 31 - b
        y ^= cols[31 - b];
        bits &= bits - 1;
    }
    y
}
