//! Coset/prefix scheme: each user picks a random `x_p`-bit prefix and sends
//! it in the top bits of every slot, followed by a symbol of an RS code over
//! `GF(q)`, `q = 2^(c - x_p)`. The receiver splits every slot list by
//! prefix and list-recovers each coset separately.

use alloc::vec::Vec;

use crate::achannel::{ReceivedLists, SlotSymbolSet};
use crate::error::{check_len, domain, Result};
use crate::gf::{Gf, GaloisField};

use super::{crc_attach, crc_check, list_recover, rs_encode, RsCodeSpec};

/// How the CRC enters the RS payload.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PayloadMode {
    /// Only the `k` payload bits are sent. The CRC is charged to the energy
    /// budget (see [`CosetSchemeConfig::ebno_correction_db`]) but not
    /// transmitted, so decoded candidates are not CRC-filtered.
    Charged,
    /// `k + h` bits including the CRC are sent and every candidate is checked.
    Carried,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CosetSchemeConfig {
    /// Slot alphabet `Q = 2^c`.
    pub c: u32,
    pub x_p: u32,
    pub k: u32,
    pub h: u32,
    pub k_o: usize,
    pub l: usize,
    pub mode: PayloadMode,
}

impl CosetSchemeConfig {
    pub fn field_bits(&self) -> u32 {
        self.c - self.x_p
    }

    pub fn q(&self) -> usize {
        1 << self.field_bits()
    }

    /// Bits packed into the RS message.
    pub fn carried_bits(&self) -> u32 {
        match self.mode {
            PayloadMode::Charged => self.k,
            PayloadMode::Carried => self.k + self.h,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.x_p >= self.c || self.field_bits() > 16 {
            return Err(domain("need 1 <= c - x_p <= 16"));
        }
        if self.c > 32 {
            return Err(domain("slot symbols are limited to 32 bits"));
        }
        if self.l > self.q() || self.k_o < 2 || self.k_o > self.l {
            return Err(domain(alloc::format!("need 2 <= k_O <= L <= q = {}", self.q())));
        }
        if self.k == 0 || self.h > 32 || self.carried_bits() > 128 {
            return Err(domain("payload must be 1..=128 bits including the CRC, h <= 32"));
        }
        if self.mode == PayloadMode::Carried && self.h == 0 {
            return Err(domain("carried mode needs h >= 1"));
        }
        if (self.carried_bits() as usize) > self.k_o * self.field_bits() as usize {
            return Err(domain(alloc::format!(
                "{} payload bits exceed k_O log2 q = {}",
                self.carried_bits(),
                self.k_o * self.field_bits() as usize
            )));
        }
        Ok(())
    }

    /// Penalty in dB added to the simulated `E_b/N_0` for CRC bits that are
    /// charged but not sent.
    pub fn ebno_correction_db(&self) -> f64 {
        match self.mode {
            PayloadMode::Charged => 10.0 * libm::log10((self.k + self.h) as f64 / self.k as f64),
            PayloadMode::Carried => 0.0,
        }
    }
}

/// A validated configuration with its RS code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CosetScheme {
    cfg: CosetSchemeConfig,
    rs: RsCodeSpec,
}

impl CosetScheme {
    pub fn new(cfg: CosetSchemeConfig) -> Result<Self> {
        cfg.validate()?;
        let field = GaloisField::new(cfg.field_bits())?;
        let rs = RsCodeSpec::new(field, cfg.l, cfg.k_o)?;
        Ok(CosetScheme { cfg, rs })
    }

    pub fn config(&self) -> &CosetSchemeConfig {
        &self.cfg
    }

    pub fn code(&self) -> &RsCodeSpec {
        &self.rs
    }

    fn total_bits(&self) -> u32 {
        (self.cfg.k_o as u32) * self.cfg.field_bits()
    }

    /// Left-align the carried word in `k_O` symbols, zero padding at the end.
    fn pack(&self, word: u128) -> Vec<Gf> {
        let m = self.cfg.field_bits();
        let pad = self.total_bits() - self.cfg.carried_bits();
        (0..self.cfg.k_o as u32)
            .map(|i| {
                // Symbol i covers bits [i m, (i + 1) m) of the padded word from the MSB.
                let hi = self.total_bits() - i * m;
                let shift = hi as i64 - m as i64 - pad as i64;
                let mask = (1u128 << m) - 1;
                let v = if shift >= 0 { word >> shift } else { word << (-shift) };
                Gf((v & mask) as u16)
            })
            .collect()
    }

    fn unpack(&self, symbols: &[Gf]) -> Option<u128> {
        let m = self.cfg.field_bits();
        let pad = self.total_bits() - self.cfg.carried_bits();
        let mut acc: Vec<u8> = Vec::with_capacity(self.total_bits() as usize);
        for s in symbols {
            for b in (0..m).rev() {
                acc.push((s.value() >> b & 1) as u8);
            }
        }
        if acc[acc.len() - pad as usize..].iter().any(|&b| b != 0) {
            return None;
        }
        Some(acc[..self.cfg.carried_bits() as usize].iter().fold(0u128, |w, &b| w << 1 | b as u128))
    }
}

/// Slot symbols `X_j = p_u q + s_j` for one user.
pub fn coset_encode(scheme: &CosetScheme, payload: u128, prefix: u32) -> Result<Vec<u32>> {
    let cfg = &scheme.cfg;
    if cfg.k < 128 && payload >> cfg.k != 0 {
        return Err(domain(alloc::format!("payload does not fit in k = {} bits", cfg.k)));
    }
    if prefix >> cfg.x_p != 0 {
        return Err(domain(alloc::format!("prefix {prefix} needs more than x_p = {} bits", cfg.x_p)));
    }
    let word = match cfg.mode {
        PayloadMode::Charged => payload,
        PayloadMode::Carried => crc_attach(payload, cfg.k, cfg.h)?,
    };
    let s = rs_encode(&scheme.rs, &scheme.pack(word))?;
    let base = prefix << cfg.field_bits();
    Ok(s.iter().map(|v| base | v.value() as u32).collect())
}

/// Decode every coset present in the lists; returns sorted distinct payloads.
pub fn coset_decode(scheme: &CosetScheme, y: &ReceivedLists, m: u32) -> Result<Vec<u128>> {
    let cfg = &scheme.cfg;
    check_len(cfg.l, y.len())?;
    let fb = cfg.field_bits();
    let mut prefixes: Vec<u32> = y.slots().iter().flat_map(|s| s.iter().map(|v| v >> fb)).collect();
    prefixes.sort_unstable();
    prefixes.dedup();
    let mut out = Vec::new();
    for p in prefixes {
        if p >> cfg.x_p != 0 {
            continue;
        }
        let slots = y
            .slots()
            .iter()
            .map(|s| SlotSymbolSet::from_symbols(s.iter().filter(|v| v >> fb == p).map(|v| v & ((1 << fb) - 1)), cfg.q() as u64))
            .collect::<Result<Vec<_>>>()?;
        let lists = ReceivedLists::new(slots)?;
        for r in list_recover(&scheme.rs, &lists, m)? {
            let Some(word) = scheme.unpack(&r.message) else { continue };
            let payload = match cfg.mode {
                PayloadMode::Charged => word,
                PayloadMode::Carried => {
                    if !crc_check(word, cfg.k + cfg.h, cfg.h)? {
                        continue;
                    }
                    word >> cfg.h
                }
            };
            out.push(payload);
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}
