//! Systematic CRC over words of up to 128 bits, most significant bit first.
//!
//! Every generator is a primitive polynomial of degree `h`, so all single-
//! and double-bit errors within `2^h - 1` bits are detected.

use crate::error::{domain, Result};
use crate::gf::primitive_polynomial;

/// Primitive generators for `h = 17..=32`, leading term included.
const WIDE: [u64; 16] = [
    0x2_0009,
    0x4_0081,
    0x8_0027,
    0x10_0009,
    0x20_0005,
    0x40_0003,
    0x80_0021,
    0x100_0087,
    0x200_0009,
    0x400_0047,
    0x800_0027,
    0x1000_0009,
    0x2000_0005,
    0x4080_0007,
    0x8000_0009,
    0x1_0040_0007,
];

/// Generator polynomial of degree `h` (bit `h` set), `1 <= h <= 32`.
pub fn crc_polynomial(h: u32) -> Result<u64> {
    match h {
        1..=16 => Ok(primitive_polynomial(h).expect("table covers 1..=16") as u64),
        17..=32 => Ok(WIDE[h as usize - 17]),
        _ => Err(domain(alloc::format!("CRC length {h} outside 1..=32"))),
    }
}

/// `word(x) x^h mod g(x)` for the low `len` bits of `word`.
pub fn crc_remainder(word: u128, len: u32, h: u32) -> Result<u64> {
    let g = crc_polynomial(h)?;
    if len > 128 {
        return Err(domain("words are limited to 128 bits"));
    }
    let low = g & ((1u64 << h) - 1);
    let top = 1u64 << (h - 1);
    let mut r = 0u64;
    for i in (0..len).rev() {
        let bit = (word >> i & 1) as u64;
        let feedback = (r & top != 0) as u64 ^ bit;
        r = (r << 1) & ((1u64 << h) - 1);
        if feedback == 1 {
            r ^= low;
        }
    }
    Ok(r)
}

/// `payload || crc(payload)`, `k + h` bits.
pub fn crc_attach(payload: u128, k: u32, h: u32) -> Result<u128> {
    if k + h > 128 || (k < 128 && payload >> k != 0) {
        return Err(domain(alloc::format!("payload does not fit in k = {k} bits with h = {h}")));
    }
    Ok(payload << h | crc_remainder(payload, k, h)? as u128)
}

/// Whether a `len`-bit word is a valid codeword.
pub fn crc_check(word: u128, len: u32, h: u32) -> Result<bool> {
    Ok(crc_remainder(word, len, h)? == 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{domain::TEST, stream};
    use rand::Rng;

    /// Order of `x` modulo `g` equals `2^h - 1`.
    fn is_primitive(g: u64, h: u32) -> bool {
        let mulmod = |mut a: u64, mut b: u64| {
            let mut r = 0u64;
            while b != 0 {
                if b & 1 == 1 {
                    r ^= a;
                }
                b >>= 1;
                a <<= 1;
                if a >> h & 1 == 1 {
                    a ^= g;
                }
            }
            r
        };
        let powx = |mut e: u64| {
            let (mut r, mut base) = (1u64, 2u64);
            while e != 0 {
                if e & 1 == 1 {
                    r = mulmod(r, base);
                }
                base = mulmod(base, base);
                e >>= 1;
            }
            r
        };
        let n = (1u64 << h) - 1;
        let mut primes = alloc::vec::Vec::new();
        let (mut rest, mut p) = (n, 2u64);
        while p * p <= rest {
            if rest % p == 0 {
                primes.push(p);
                while rest % p == 0 {
                    rest /= p;
                }
            }
            p += 1;
        }
        if rest > 1 {
            primes.push(rest);
        }
        powx(n) == 1 && primes.iter().all(|&p| powx(n / p) != 1)
    }

    #[test]
    fn generators_are_primitive() {
        for h in 2..=32 {
            assert!(is_primitive(crc_polynomial(h).unwrap(), h), "h = {h}");
        }
        assert!(crc_polynomial(0).is_err() && crc_polynomial(33).is_err());
    }

    #[test]
    fn attach_then_check_and_single_flips() {
        let mut rng = stream(8, TEST, 0);
        for h in [8u32, 14, 15, 16, 24, 32] {
            for _ in 0..50 {
                let k = 96;
                let p = rng.random::<u128>() >> 32;
                let w = crc_attach(p, k, h).unwrap();
                assert!(crc_check(w, k + h, h).unwrap());
                assert_eq!(w >> h, p);
                for bit in 0..k + h {
                    assert!(!crc_check(w ^ (1 << bit), k + h, h).unwrap());
                }
            }
        }
        assert!(crc_attach(1 << 100, 100, 32).is_err());
    }

    #[test]
    fn random_words_pass_at_two_to_minus_h() {
        let mut rng = stream(9, TEST, 0);
        let h = 6;
        let n = 200_000;
        let hits = (0..n).filter(|_| crc_check(rng.random::<u128>() >> 28, 100, h).unwrap()).count();
        let p = 1.0 / 64.0;
        assert!((hits as f64 - n as f64 * p).abs() < 3.0 * libm::sqrt(n as f64 * p * (1.0 - p)));
    }
}
