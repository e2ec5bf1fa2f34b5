//! Sobol direction numbers.
//!
//! The bundled asset lists, for every dimension `d >= 2`, the degree `s` of
//! a primitive polynomial over GF(2), its inner coefficient bits `a`, and
//! the initial direction integers `m_1 .. m_s` (one line per dimension,
//! space separated: `d s a m_1 ... m_s`). Dimension 1 is the van der Corput
//! base-2 sequence and carries no line.

use crate::{Error, Result};
use std::sync::OnceLock;

/// Number of output fraction bits per coordinate.
pub const SOBOL_BITS: usize = 32;

const BUNDLED: &str = include_str!("../../assets/joe-kuo-d2048.txt");

/// Expanded direction numbers for a set of dimensions.
///
/// `directions(j)` holds the 32 direction words of dimension `j` (0-based),
/// each word a fixed-point fraction with the most significant bit worth 1/2.
#[derive(Debug)]
pub struct DirectionTable {
    dirs: Vec<[u32; SOBOL_BITS]>,
}

impl DirectionTable {
    /// Parses a table in the `d s a m_1 ... m_s` line format.
    ///
    /// Lines starting with `#` and the customary header line are ignored.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut dirs = vec![van_der_corput()];
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields[0] == "d" {
                continue; // header
            }
            let bad = |reason: &str| Error::BadDirectionTable {
                line: line_no,
                reason: reason.to_string(),
            };
            let parse = |s: &str| s.parse::<u64>().map_err(|_| bad("not an integer"));

            if fields.len() < 3 {
                return Err(bad("expected at least `d s a`"));
            }
            let d = parse(fields[0])? as usize;
            let s = parse(fields[1])? as usize;
            let a = parse(fields[2])? as u32;
            if d != dirs.len() + 1 {
                return Err(bad("dimensions must be contiguous starting at 2"));
            }
            if s == 0 || s > 32 {
                return Err(bad("polynomial degree out of range"));
            }
            if fields.len() != 3 + s {
                return Err(bad("wrong number of initial direction integers"));
            }
            let mut m = Vec::with_capacity(s);
            for (k, f) in fields[3..].iter().enumerate() {
                let mk = parse(f)? as u32;
                if mk % 2 == 0 {
                    return Err(bad("direction integers must be odd"));
                }
                if u64::from(mk) >= 1u64 << (k + 1) {
                    return Err(bad("direction integer m_k must be < 2^k"));
                }
                m.push(mk);
            }
            dirs.push(expand(s, a, &m));
        }
        Ok(DirectionTable { dirs })
    }

    /// The table compiled into the crate (2048 dimensions).
    pub fn bundled() -> &'static DirectionTable {
        static TABLE: OnceLock<DirectionTable> = OnceLock::new();
        TABLE.get_or_init(|| {
            DirectionTable::from_text(BUNDLED).expect("bundled direction table is valid")
        })
    }

    /// Highest supported dimension.
    pub fn max_dim(&self) -> usize {
        self.dirs.len()
    }

    /// Direction words of dimension `j` (0-based).
    pub fn directions(&self, j: usize) -> &[u32; SOBOL_BITS] {
        &self.dirs[j]
    }
}

/// Dimension 1: all m_k = 1, i.e. v_k = 2^(32-k).
fn van_der_corput() -> [u32; SOBOL_BITS] {
    let mut v = [0u32; SOBOL_BITS];
    for (k, vk) in v.iter_mut().enumerate() {
        *vk = 1u32 << (31 - k);
    }
    v
}

/// Expands initial direction integers through the standard recurrence
/// v_k = v_{k-s} ^ (v_{k-s} >> s) ^ sum_{i<s, a_i set} v_{k-i}.
fn expand(s: usize, a: u32, m: &[u32]) -> [u32; SOBOL_BITS] {
    let mut v = [0u32; SOBOL_BITS];
    for k in 0..s.min(SOBOL_BITS) {
        v[k] = m[k] << (31 - k);
    }
    for k in s..SOBOL_BITS {
        let mut vk = v[k - s] ^ (v[k - s] >> s);
        for i in 1..s {
            if (a >> (s - 1 - i)) & 1 == 1 {
                vk ^= v[k - i];
            }
        }
        v[k] = vk;
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_table_covers_2048_dimensions() {
        let t = DirectionTable::bundled();
        assert_eq!(t.max_dim(), 2048);
    }

    #[test]
    fn dimension_one_is_van_der_corput() {
        let t = DirectionTable::bundled();
        for k in 0..SOBOL_BITS {
            assert_eq!(t.directions(0)[k], 1u32 << (31 - k));
        }
    }

    #[test]
    fn rejects_even_direction_integers() {
        let err = DirectionTable::from_text("2 1 0 2").unwrap_err();
        assert!(matches!(err, Error::BadDirectionTable { .. }));
    }

    #[test]
    fn rejects_oversized_direction_integers() {
        // m_2 must be < 4
        let err = DirectionTable::from_text("2 2 1 1 5").unwrap_err();
        assert!(matches!(err, Error::BadDirectionTable { .. }));
    }

    #[test]
    fn rejects_dimension_gaps() {
        let err = DirectionTable::from_text("3 1 0 1").unwrap_err();
        assert!(matches!(err, Error::BadDirectionTable { .. }));
    }

    #[test]
    fn known_second_dimension_expansion() {
        // Dimension 2: s=1, a=0, m=[1] gives v_k with a two-bit recurrence:
        // v_1 = 0x80000000, v_2 = v_1 ^ (v_1 >> 1) = 0xC0000000.
        let t = DirectionTable::from_text("2 1 0 1").unwrap();
        assert_eq!(t.directions(1)[0], 0x8000_0000);
        assert_eq!(t.directions(1)[1], 0xC000_0000);
        assert_eq!(t.directions(1)[2], 0xA000_0000);
    }
}
