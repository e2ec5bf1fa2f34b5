//! Gray-code Sobol point generation on 32-bit fixed point.

use super::direction::{DirectionTable, SOBOL_BITS};

/// Raw Sobol words for points `skip .. skip + n`, row major (`n` rows of
/// `d` words each). Point `i` of dimension `j` is the XOR of the direction
/// words selected by the bits of the Gray code of `i`, which the loop below
/// maintains incrementally: advancing from `i` to `i+1` flips exactly the
/// direction word indexed by the number of trailing ones of `i`.
pub(super) fn sobol_words(table: &DirectionTable, d: usize, skip: usize, n: usize) -> Vec<u32> {
    assert!(
        (skip as u64 + n as u64) < (1u64 << SOBOL_BITS),
        "Sobol index space exhausted"
    );
    let mut out = Vec::with_capacity(n * d);
    let mut state = vec![0u32; d];

    // Seek to the starting index: XOR of v[b] over set bits b of gray(skip).
    let gray = (skip as u32) ^ ((skip as u32) >> 1);
    for (j, s) in state.iter_mut().enumerate() {
        let v = table.directions(j);
        let mut bits = gray;
        while bits != 0 {
            let b = bits.trailing_zeros() as usize;
            *s ^= v[b];
            bits &= bits - 1;
        }
    }

    for i in skip..skip + n {
        out.extend_from_slice(&state);
        let flip = (i as u32).trailing_ones() as usize;
        if flip < SOBOL_BITS {
            for (j, s) in state.iter_mut().enumerate() {
                *s ^= table.directions(j)[flip];
            }
        }
    }
    out
}

/// Converts a 32-bit fraction word to a float in `[0, 1)`.
///
/// No half-ulp offset is added; index 0 therefore maps to exactly 0.0.
pub(super) fn word_to_unit(w: u32) -> f64 {
    f64::from(w) / 4_294_967_296.0
}

/// Recovers the 32-bit fraction word from a point previously produced by
/// `word_to_unit`. Exact for multiples of 2^-32.
pub(super) fn unit_to_word(x: f64) -> u32 {
    debug_assert!((0.0..1.0).contains(&x));
    let w = (x * 4_294_967_296.0) as u64;
    debug_assert_eq!(word_to_unit(w as u32), x, "point is not a 32-bit fraction");
    w as u32
}
