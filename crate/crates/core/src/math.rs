//! Integer logarithms and seed mixing shared by every module.
//!
//! Logarithms are base 2 and rounded up unless the name says otherwise.

/// `⌈log₂ x⌉`, with `ceil_log2(0) = ceil_log2(1) = 0`.
pub fn ceil_log2(x: u64) -> u32 {
    if x <= 1 {
        0
    } else {
        64 - (x - 1).leading_zeros()
    }
}

/// `⌊log₂ x⌋` for `x ≥ 1`.
pub fn floor_log2(x: u64) -> u32 {
    assert!(x > 0, "floor_log2(0)");
    63 - x.leading_zeros()
}

/// Bits needed to name one of `n` nodes: `max(1, ⌈log₂ n⌉)`.
pub fn id_bits(n: usize) -> usize {
    (ceil_log2(n as u64) as usize).max(1)
}

/// `⌈log₂ ⌈log₂ n⌉⌉`, at least 1.
pub fn log_log(n: usize) -> usize {
    (ceil_log2(id_bits(n) as u64) as usize).max(1)
}

/// `⌈x^{1/3}⌉` computed exactly on integers.
pub fn ceil_cbrt(x: u64) -> u64 {
    let mut c = (x as f64).cbrt().round() as u64;
    while c.saturating_mul(c).saturating_mul(c) < x {
        c += 1;
    }
    while c > 0 && (c - 1).pow(3) >= x {
        c -= 1;
    }
    c
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Hashes a sequence of words into one, order-sensitively.
pub fn mix_all(words: &[u64]) -> u64 {
    words.iter().fold(0x243f_6a88_85a3_08d3, |acc, &w| mix64(acc ^ mix64(w)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logs_on_small_values() {
        let table = [(1, 0), (2, 1), (3, 2), (4, 2), (5, 3), (1024, 10), (1025, 11)];
        for (x, want) in table {
            assert_eq!(ceil_log2(x), want, "x = {x}");
        }
        assert_eq!(floor_log2(1), 0);
        assert_eq!(floor_log2(17), 4);
        assert_eq!(id_bits(1), 1);
        assert_eq!(id_bits(2), 1);
        assert_eq!(id_bits(4096), 12);
    }

    #[test]
    fn cube_roots() {
        assert_eq!(ceil_cbrt(1), 1);
        assert_eq!(ceil_cbrt(8), 2);
        assert_eq!(ceil_cbrt(9), 3);
        assert_eq!(ceil_cbrt(4096), 16);
        assert_eq!(ceil_cbrt(4097), 17);
    }

    #[test]
    fn mixing_separates_order() {
        assert_ne!(mix_all(&[1, 2]), mix_all(&[2, 1]));
    }
}
