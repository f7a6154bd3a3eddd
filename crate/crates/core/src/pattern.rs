//! Key-derived carrier locations and the slot layout shared by both channels.
//!
//! The public key is hashed with SHA-256; the first eight bytes (big-endian)
//! seed a SplitMix64 stream that drives a top-down Fisher–Yates shuffle of an
//! inclusive bin range. The magnitude channel XORs the seed with `0x4D41`.
//! These rules are part of the on-air format.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const HEADER_BITS: usize = 32;
pub const MAGNITUDE_SEED_TWEAK: u64 = 0x4D41;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    Phase,
    Magnitude,
}

impl std::fmt::Display for Channel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Channel::Phase => "phase",
            Channel::Magnitude => "magnitude",
        })
    }
}

pub fn derive_seed(public_key: &[u8; 32], channel: Channel) -> u64 {
    let digest = Sha256::digest(public_key);
    let seed = u64::from_be_bytes(digest[..8].try_into().expect("digest is 32 bytes"));
    match channel {
        Channel::Phase => seed,
        Channel::Magnitude => seed ^ MAGNITUDE_SEED_TWEAK,
    }
}

/// SplitMix64, the normative pattern generator.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform-ish integer in `0..bound` by Lemire's multiply-shift.
    pub fn next_below(&mut self, bound: u64) -> u64 {
        ((self.next_u64() as u128 * bound as u128) >> 64) as u64
    }

    /// Uniform real in [0, 1) from the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

fn shuffled_range(seed: u64, min: usize, max: usize) -> Result<Vec<usize>> {
    if min > max {
        return Err(Error::InvalidRange { min, max });
    }
    let mut v: Vec<usize> = (min..=max).collect();
    let mut rng = SplitMix64::new(seed);
    for i in (1..v.len()).rev() {
        let j = rng.next_below(i as u64 + 1) as usize;
        v.swap(i, j);
    }
    Ok(v)
}

/// Phase-channel bin set: a permutation of `[min, max]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinPattern {
    pub bins: Vec<usize>,
}

impl BinPattern {
    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }
}

/// Magnitude-channel bin pairs, disjoint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairPattern {
    pub pairs: Vec<(usize, usize)>,
}

impl PairPattern {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

pub fn phase_pattern(seed: u64, min: usize, max: usize) -> Result<BinPattern> {
    Ok(BinPattern {
        bins: shuffled_range(seed, min, max)?,
    })
}

/// Shuffles `[min, max]` and pairs consecutive elements; an odd leftover is dropped.
pub fn mag_pair_pattern(seed: u64, min: usize, max: usize) -> Result<PairPattern> {
    if max <= min {
        return Err(Error::InvalidRange { min, max });
    }
    let bins = shuffled_range(seed, min, max)?;
    Ok(PairPattern {
        pairs: bins.chunks_exact(2).map(|p| (p[0], p[1])).collect(),
    })
}

/// Where each header and body bit lives.
///
/// Slot `s` maps to group `s / slots_per_group` and pattern entry
/// `s % slots_per_group`. The header copies come first, then the body copies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SlotLayout {
    pub group_size: usize,
    pub num_groups: usize,
    pub slots_per_group: usize,
    pub header_copies: usize,
    pub body_bits: usize,
    pub replicas: usize,
}

impl SlotLayout {
    pub fn total_slots(&self) -> usize {
        self.num_groups * self.slots_per_group
    }

    pub fn header_slots(&self) -> usize {
        self.header_copies * HEADER_BITS
    }

    pub fn used_slots(&self) -> usize {
        self.header_slots() + self.replicas * self.body_bits
    }

    /// (group, pattern index) of a slot.
    #[inline]
    pub fn position(&self, slot: usize) -> (usize, usize) {
        (slot / self.slots_per_group, slot % self.slots_per_group)
    }

    pub fn header_slot(&self, copy: usize, bit: usize) -> usize {
        copy * HEADER_BITS + bit
    }

    pub fn body_slot(&self, replica: usize, bit: usize) -> usize {
        self.header_slots() + replica * self.body_bits + bit
    }

    /// Frame range covered by a group.
    pub fn frames(&self, group: usize) -> std::ops::Range<usize> {
        group * self.group_size..(group + 1) * self.group_size
    }

    /// Channel bitstream in slot order: header copies, then body copies.
    pub fn bitstream(&self, header: u32, body: &[u8]) -> Vec<u8> {
        debug_assert_eq!(body.len(), self.body_bits);
        let header_bits = crate::bits::u32_to_bits(header);
        let mut out = Vec::with_capacity(self.used_slots());
        for _ in 0..self.header_copies {
            out.extend_from_slice(&header_bits);
        }
        for _ in 0..self.replicas {
            out.extend_from_slice(body);
        }
        out
    }
}

/// Header-only layout used to read the length field before the body size is known.
pub fn header_layout(
    num_frames: usize,
    group_size: usize,
    pattern_size: usize,
    header_copies: usize,
) -> SlotLayout {
    SlotLayout {
        group_size,
        num_groups: if group_size == 0 { 0 } else { num_frames / group_size },
        slots_per_group: pattern_size,
        header_copies,
        body_bits: 0,
        replicas: 0,
    }
}

pub fn plan_layout(
    channel: Channel,
    num_frames: usize,
    group_size: usize,
    pattern_size: usize,
    body_bits: usize,
    max_replicas: usize,
    header_copies: usize,
) -> Result<SlotLayout> {
    if group_size == 0 || pattern_size == 0 || body_bits == 0 || max_replicas == 0 {
        return Err(Error::InvalidConfig(
            "group size, pattern size, body bits and replica cap must be positive".into(),
        ));
    }
    let num_groups = num_frames / group_size;
    let total = num_groups * pattern_size;
    let header = header_copies * HEADER_BITS;
    let fit = total.saturating_sub(header) / body_bits;
    if total < header || fit == 0 {
        return Err(Error::HostTooShort {
            channel,
            needed: header + body_bits,
            available: total,
        });
    }
    Ok(SlotLayout {
        group_size,
        num_groups,
        slots_per_group: pattern_size,
        header_copies,
        body_bits,
        replicas: fit.min(max_replicas),
    })
}
