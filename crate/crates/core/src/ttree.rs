//! t-tree outer code.
//!
//! A `k`-bit message is split into chunks `u_1..u_L` of `b_1..b_L` bits
//! (most significant chunk first). Slot symbol `X_i` is the `c`-bit value
//! `sum_{j<=i} u_j G_{j,i}` over GF(2), so `X_i` only depends on the first `i`
//! chunks and the decoder can grow message prefixes slot by slot, keeping the
//! ones that miss at most `t` slot lists.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::achannel::ReceivedLists;
use crate::error::{check_len, domain, Result};
use crate::rng::{domain as stream_domain, stream};

/// Largest chunk for which per-block lookup tables are built.
const TABLE_MAX_BITS: u32 = 16;
/// Largest symbol size for which the diagonal blocks get an inverse map.
const INVERSE_MAX_BITS: u32 = 20;

fn mask(bits: u32) -> u128 {
    if bits == 0 {
        0
    } else {
        u128::MAX >> (128 - bits)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Block {
    /// Row `r` multiplies bit `r` of the chunk, counted from its MSB.
    rows: Vec<u32>,
    /// `table[v] = v G` for every chunk value `v`, when small enough.
    table: Option<Vec<u32>>,
}

impl Block {
    fn new(rows: Vec<u32>) -> Self {
        let b = rows.len() as u32;
        let table = (b <= TABLE_MAX_BITS).then(|| {
            let mut t = vec![0u32; 1 << b];
            for v in 1..t.len() {
                // Lowest set bit of v is row b - 1 - tz.
                let tz = v.trailing_zeros();
                t[v] = t[v & (v - 1)] ^ rows[(b - 1 - tz) as usize];
            }
            t
        });
        Block { rows, table }
    }

    fn apply(&self, v: u32) -> u32 {
        match &self.table {
            Some(t) => t[v as usize],
            None => {
                let b = self.rows.len();
                (0..b).filter(|r| v >> (b - 1 - r) & 1 == 1).fold(0, |acc, r| acc ^ self.rows[r])
            }
        }
    }
}

/// Preimages of a diagonal block: one representative per image plus the
/// kernel.
#[derive(Debug, Clone, PartialEq, Eq)]
struct DiagInverse {
    first: Vec<u32>,
    kernel: Vec<u32>,
}

const NO_PREIMAGE: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeCodeSpec {
    allocation: Vec<u32>,
    c: u32,
    seed: u64,
    /// Blocks `G_{j,i}` for `j <= i`, ordered by `j` then `i`.
    blocks: Vec<Block>,
    inverses: Vec<Option<DiagInverse>>,
}

fn validate_shape(allocation: &[u32], c: u32) -> Result<()> {
    if allocation.is_empty() {
        return Err(domain("allocation needs at least one slot"));
    }
    if c == 0 || c > 32 {
        return Err(domain("symbol size c must be in 1..=32"));
    }
    if let Some(b) = allocation.iter().find(|&&b| b > c) {
        return Err(domain(alloc::format!("slot carries {b} bits, more than c = {c}")));
    }
    let k: u32 = allocation.iter().sum();
    if k == 0 || k > 128 {
        return Err(domain(alloc::format!("message length {k} outside 1..=128")));
    }
    Ok(())
}

fn block_index(l: usize, j: usize, i: usize) -> usize {
    // Rows before j hold l, l-1, ..., l-j+1 blocks.
    j * l - j * (j.saturating_sub(1)) / 2 + (i - j)
}

/// Sample a generator from the ensemble with i.i.d. fair bits in every
/// admissible block.
pub fn build_generator(allocation: &[u32], c: u32, seed: u64) -> Result<TreeCodeSpec> {
    validate_shape(allocation, c)?;
    let mut rng = stream(seed, stream_domain::GENERATOR, 0);
    let sym_mask = mask(c) as u32;
    let l = allocation.len();
    let mut rows = Vec::new();
    for (j, &b) in allocation.iter().enumerate() {
        for _i in j..l {
            rows.push((0..b).map(|_| rng.random::<u32>() & sym_mask).collect::<Vec<_>>());
        }
    }
    from_blocks(allocation.to_vec(), c, seed, rows)
}

fn from_blocks(allocation: Vec<u32>, c: u32, seed: u64, rows: Vec<Vec<u32>>) -> Result<TreeCodeSpec> {
    let blocks: Vec<Block> = rows.into_iter().map(Block::new).collect();
    let l = allocation.len();
    let inverses = (0..l)
        .map(|j| {
            let blk = &blocks[block_index(l, j, j)];
            (c <= INVERSE_MAX_BITS && allocation[j] <= TABLE_MAX_BITS).then(|| {
                let mut first = vec![NO_PREIMAGE; 1 << c];
                let mut kernel = Vec::new();
                for v in 0..(1u32 << allocation[j]) {
                    let x = blk.apply(v);
                    if x == 0 {
                        kernel.push(v);
                    }
                    if first[x as usize] == NO_PREIMAGE {
                        first[x as usize] = v;
                    }
                }
                DiagInverse { first, kernel }
            })
        })
        .collect();
    Ok(TreeCodeSpec { allocation, c, seed, blocks, inverses })
}

impl TreeCodeSpec {
    pub fn allocation(&self) -> &[u32] {
        &self.allocation
    }

    pub fn c(&self) -> u32 {
        self.c
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.allocation.len()
    }

    pub fn is_empty(&self) -> bool {
        self.allocation.is_empty()
    }

    pub fn k(&self) -> u32 {
        self.allocation.iter().sum()
    }

    /// Rows of `G_{j,i}` (0-based, `j <= i`), each a `c`-bit value.
    pub fn block(&self, j: usize, i: usize) -> Result<&[u32]> {
        if j > i || i >= self.len() {
            return Err(domain(alloc::format!("no block G[{j}][{i}] for L = {}", self.len())));
        }
        Ok(&self.blocks[block_index(self.len(), j, i)].rows)
    }

    fn blk(&self, j: usize, i: usize) -> &Block {
        &self.blocks[block_index(self.len(), j, i)]
    }

    /// Chunks `u_1..u_L` of a message, MSB first.
    pub fn chunks(&self, u: u128) -> Vec<u32> {
        let k = self.k();
        let mut used = 0;
        self.allocation
            .iter()
            .map(|&b| {
                used += b;
                ((u >> (k - used)) & mask(b)) as u32
            })
            .collect()
    }

    /// Deterministic binary layout: `L`, `c` (u32 LE), seed (u64 LE),
    /// `b_1..b_L` (u32 LE), then the rows of `G_{j,i}` for `j <= i` in
    /// `(j, i)` order, each row's `c` bits MSB first, packed into bytes MSB
    /// first with the last byte zero-padded.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&(self.len() as u32).to_le_bytes());
        out.extend_from_slice(&self.c.to_le_bytes());
        out.extend_from_slice(&self.seed.to_le_bytes());
        for &b in &self.allocation {
            out.extend_from_slice(&b.to_le_bytes());
        }
        let mut acc = 0u8;
        let mut filled = 0;
        for blk in &self.blocks {
            for &row in &blk.rows {
                for bit in (0..self.c).rev() {
                    acc = acc << 1 | (row >> bit & 1) as u8;
                    filled += 1;
                    if filled == 8 {
                        out.push(acc);
                        acc = 0;
                        filled = 0;
                    }
                }
            }
        }
        if filled > 0 {
            out.push(acc << (8 - filled));
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let u32_at = |off: usize| -> Result<u32> {
            bytes
                .get(off..off + 4)
                .map(|s| u32::from_le_bytes([s[0], s[1], s[2], s[3]]))
                .ok_or_else(|| domain("truncated tree code header"))
        };
        let l = u32_at(0)? as usize;
        let c = u32_at(4)?;
        let seed_bytes = bytes.get(8..16).ok_or_else(|| domain("truncated tree code header"))?;
        let mut seed = [0u8; 8];
        seed.copy_from_slice(seed_bytes);
        let seed = u64::from_le_bytes(seed);
        if l == 0 || l > 1 << 16 {
            return Err(domain("implausible slot count in header"));
        }
        let allocation = (0..l).map(|j| u32_at(16 + 4 * j)).collect::<Result<Vec<_>>>()?;
        validate_shape(&allocation, c)?;
        let mut pos = (16 + 4 * l) * 8;
        let total_bits: usize = allocation.iter().enumerate().map(|(j, &b)| (l - j) * b as usize * c as usize).sum();
        check_len((16 + 4 * l) + total_bits.div_ceil(8), bytes.len())?;
        let mut rows = Vec::new();
        for (j, &b) in allocation.iter().enumerate() {
            for _ in j..l {
                let mut blk = Vec::with_capacity(b as usize);
                for _ in 0..b {
                    let mut row = 0u32;
                    for _ in 0..c {
                        row = row << 1 | (bytes[pos / 8] >> (7 - pos % 8) & 1) as u32;
                        pos += 1;
                    }
                    blk.push(row);
                }
                rows.push(blk);
            }
        }
        from_blocks(allocation, c, seed, rows)
    }
}

/// Outer codeword `X_1..X_L` of message `u` (its low `k` bits).
pub fn encode(spec: &TreeCodeSpec, u: u128) -> Result<Vec<u32>> {
    let k = spec.k();
    if k < 128 && u >> k != 0 {
        return Err(domain(alloc::format!("message does not fit in k = {k} bits")));
    }
    let chunks = spec.chunks(u);
    let l = spec.len();
    Ok((0..l).map(|i| (0..=i).fold(0u32, |acc, j| acc ^ spec.blk(j, i).apply(chunks[j]))).collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeOutput {
    /// Surviving messages with their list-cover distance, ascending by message.
    pub messages: Vec<(u128, u32)>,
    /// Set when a level held more than `path_cap` survivors and was pruned.
    pub overflow: bool,
    /// `|V_l|` before pruning, for `l = 1..=L`.
    pub level_sizes: Vec<usize>,
}

impl DecodeOutput {
    pub fn message_set(&self) -> Vec<u128> {
        self.messages.iter().map(|m| m.0).collect()
    }
}

#[derive(Clone)]
struct Survivor {
    prefix: u128,
    dist: u32,
    /// Running sums `sum_{j<=l} u_j G_{j,i}` for slots `i` not yet decoded.
    partial: Vec<u32>,
}

/// Sequential list decoder. Without a cap the output is exactly the set of
/// messages whose codeword misses at most `t` slot lists. With a cap, any
/// level with more survivors keeps the `path_cap` smallest by
/// `(distance, prefix)` and the overflow flag is raised.
pub fn decode(spec: &TreeCodeSpec, y: &ReceivedLists, t: u32, path_cap: Option<usize>) -> Result<DecodeOutput> {
    let l = spec.len();
    check_len(l, y.len())?;
    if path_cap == Some(0) {
        return Err(domain("path cap must be at least 1"));
    }
    let mut survivors = vec![Survivor { prefix: 0, dist: 0, partial: vec![0; l] }];
    let mut level_sizes = Vec::with_capacity(l);
    let mut overflow = false;
    let mut next: Vec<Survivor> = Vec::new();
    for level in 0..l {
        let b = spec.allocation[level];
        let list = y.slot(level);
        let diag = spec.blk(level, level);
        next.clear();
        let push = |s: &Survivor, v: u32, dist: u32, next: &mut Vec<Survivor>| {
            let mut partial = s.partial.clone();
            for (i, p) in partial.iter_mut().enumerate().skip(level + 1) {
                *p ^= spec.blk(level, i).apply(v);
            }
            next.push(Survivor { prefix: s.prefix << b | v as u128, dist, partial });
        };
        for s in &survivors {
            let base = s.partial[level];
            match &spec.inverses[level] {
                Some(inv) if s.dist == t => {
                    // Only extensions landing in the list survive.
                    for x in list.iter() {
                        let Some(&v0) = inv.first.get((x ^ base) as usize) else { continue };
                        if v0 == NO_PREIMAGE {
                            continue;
                        }
                        for &kv in &inv.kernel {
                            push(s, v0 ^ kv, s.dist, &mut next);
                        }
                    }
                }
                _ => {
                    for v in 0..(1u64 << b) {
                        let v = v as u32;
                        let hit = list.contains(base ^ diag.apply(v));
                        let dist = s.dist + (!hit) as u32;
                        if dist <= t {
                            push(s, v, dist, &mut next);
                        }
                    }
                }
            }
        }
        level_sizes.push(next.len());
        if let Some(cap) = path_cap {
            if next.len() > cap {
                next.sort_unstable_by_key(|a| (a.dist, a.prefix));
                next.truncate(cap);
                overflow = true;
            }
        }
        core::mem::swap(&mut survivors, &mut next);
    }
    let mut messages: Vec<(u128, u32)> = survivors.iter().map(|s| (s.prefix, s.dist)).collect();
    messages.sort_unstable();
    Ok(DecodeOutput { messages, overflow, level_sizes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::achannel::{list_cover_distance, SlotSymbolSet};
    use crate::rng::domain::TEST;
    use proptest::prelude::{prop_assert, prop_assert_eq, proptest, ProptestConfig};

    fn random_lists<R: Rng>(rng: &mut R, l: usize, c: u32, fill: f64) -> ReceivedLists {
        let q = 1u64 << c;
        let slots = (0..l)
            .map(|_| SlotSymbolSet::from_symbols((0..q as u32).filter(|_| rng.random_bool(fill)), q).unwrap())
            .collect();
        ReceivedLists::new(slots).unwrap()
    }

    fn brute_force(spec: &TreeCodeSpec, y: &ReceivedLists, t: u32) -> Vec<u128> {
        (0..1u128 << spec.k())
            .filter(|&u| list_cover_distance(y, &encode(spec, u).unwrap()).unwrap() as u32 <= t)
            .collect()
    }

    #[test]
    fn generator_is_deterministic_with_expected_shapes() {
        let a = build_generator(&[3, 2, 4, 0], 5, 17).unwrap();
        assert_eq!(a, build_generator(&[3, 2, 4, 0], 5, 17).unwrap());
        assert_ne!(a, build_generator(&[3, 2, 4, 0], 5, 18).unwrap());
        for j in 0..4 {
            for i in j..4 {
                let blk = a.block(j, i).unwrap();
                assert_eq!(blk.len(), a.allocation()[j] as usize);
                assert!(blk.iter().all(|&r| r < 32));
            }
        }
        assert!(a.block(2, 1).is_err());
        assert!(build_generator(&[6], 5, 0).is_err());
    }

    #[test]
    fn generator_bits_are_fair() {
        let spec = build_generator(&[10; 12], 15, 5).unwrap();
        let mut ones = 0u64;
        let mut total = 0u64;
        for j in 0..12 {
            for i in j..12 {
                for &row in spec.block(j, i).unwrap() {
                    ones += row.count_ones() as u64;
                    total += 15;
                }
            }
        }
        assert!(total >= 10_000);
        let sd = libm::sqrt(total as f64 / 4.0);
        assert!((ones as f64 - total as f64 / 2.0).abs() < 4.0 * sd);
    }

    #[test]
    fn encode_is_linear_and_causal() {
        let spec = build_generator(&[4, 3, 3, 2], 4, 3).unwrap();
        assert_eq!(encode(&spec, 0).unwrap(), vec![0; 4]);
        assert!(encode(&spec, 1 << 12).is_err());
        let mut rng = stream(1, TEST, 0);
        for _ in 0..200 {
            let u = rng.random_range(0..1u128 << 12);
            let v = rng.random_range(0..1u128 << 12);
            let (eu, ev, euv) = (encode(&spec, u).unwrap(), encode(&spec, v).unwrap(), encode(&spec, u ^ v).unwrap());
            for i in 0..4 {
                assert_eq!(euv[i], eu[i] ^ ev[i]);
            }
        }
        // The low 8 bits belong to chunks 2..4 and cannot reach X_1.
        for bit in 0..8 {
            let u = rng.random_range(0..1u128 << 12);
            let flipped = u ^ (1 << bit);
            assert_eq!(encode(&spec, u).unwrap()[0], encode(&spec, flipped).unwrap()[0]);
        }
        let u = 0b1010_1010_1011_u128;
        let a = encode(&spec, u).unwrap();
        let b = encode(&spec, u ^ 1).unwrap();
        assert_eq!(&a[..3], &b[..3]);
    }

    #[test]
    fn decode_recovers_transmitted_with_t_erasures() {
        let spec = build_generator(&[5, 4, 4, 3, 0, 0], 5, 8).unwrap();
        let mut rng = stream(2, TEST, 0);
        for t in 0..3u32 {
            for _ in 0..50 {
                let u = rng.random_range(0..1u128 << spec.k());
                let x = encode(&spec, u).unwrap();
                let mut erased = vec![false; 6];
                for _ in 0..t {
                    erased[rng.random_range(0..6)] = true;
                }
                let slots = x
                    .iter()
                    .zip(&erased)
                    .map(|(&s, &e)| SlotSymbolSet::from_symbols(if e { vec![] } else { vec![s] }, 32).unwrap())
                    .collect();
                let out = decode(&spec, &ReceivedLists::new(slots).unwrap(), t, None).unwrap();
                assert!(out.message_set().contains(&u));
            }
        }
    }

    #[test]
    fn decode_matches_brute_force_k12() {
        let mut rng = stream(3, TEST, 0);
        for trial in 0..20 {
            let spec = build_generator(&[2, 2, 2, 2, 2, 2], 4, trial).unwrap();
            let y = random_lists(&mut rng, 6, 4, 0.35);
            for t in 0..3 {
                let out = decode(&spec, &y, t, None).unwrap();
                assert_eq!(out.message_set(), brute_force(&spec, &y, t));
                assert!(!out.overflow);
            }
        }
    }

    #[test]
    fn cap_prunes_and_flags() {
        let spec = build_generator(&[3, 3, 3], 3, 1).unwrap();
        let full: Vec<SlotSymbolSet> = (0..3).map(|_| SlotSymbolSet::from_symbols(0..8u32, 8).unwrap()).collect();
        let y = ReceivedLists::new(full).unwrap();
        let out = decode(&spec, &y, 0, Some(5)).unwrap();
        assert!(out.overflow);
        assert_eq!(out.messages.len(), 5);
        assert_eq!(out.level_sizes[0], 8);
        assert!(decode(&spec, &y, 0, Some(0)).is_err());
        let bad = ReceivedLists::new(vec![SlotSymbolSet::empty()]).unwrap();
        assert!(decode(&spec, &bad, 0, None).is_err());
    }

    #[test]
    fn serialization_round_trip() {
        let spec = build_generator(&[7, 5, 0, 3], 7, 99).unwrap();
        let bytes = spec.to_bytes();
        assert_eq!(TreeCodeSpec::from_bytes(&bytes).unwrap(), spec);
        // 4 + 4 + 8 + 16 header bytes; rows: (7*4 + 5*3 + 0 + 3*1) * 7 bits.
        assert_eq!(bytes.len(), 32 + (46usize * 7).div_ceil(8));
        assert!(TreeCodeSpec::from_bytes(&bytes[..bytes.len() - 1]).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn decode_sound_complete_monotone(seed in 0u64..10_000, fill in 0.05f64..0.6) {
            let mut rng = stream(seed, TEST, 1);
            let l = rng.random_range(1..=6usize);
            let c = rng.random_range(1..=4u32);
            let alloc: Vec<u32> = (0..l).map(|_| rng.random_range(0..=c.min(2))).collect();
            if alloc.iter().sum::<u32>() == 0 {
                return Ok(());
            }
            let spec = build_generator(&alloc, c, seed).unwrap();
            let y = random_lists(&mut rng, l, c, fill);
            let mut prev: Vec<u128> = Vec::new();
            for t in 0..3u32 {
                let out = decode(&spec, &y, t, None).unwrap();
                for &(u, d) in &out.messages {
                    let dist = list_cover_distance(&y, &encode(&spec, u).unwrap()).unwrap() as u32;
                    prop_assert_eq!(dist, d);
                    prop_assert!(d <= t);
                }
                let set = out.message_set();
                prop_assert_eq!(&set, &brute_force(&spec, &y, t));
                prop_assert!(prev.iter().all(|u| set.contains(u)));
                prev = set;
            }
        }
    }
}
