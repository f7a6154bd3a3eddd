//! Magnitude channel: parity QIM on the group-mean log-magnitude difference
//! of a bin pair.
//!
//! For a pair `(k₁, k₂)` over the frames of a group, `d = ℓ₁ − ℓ₂` where
//! `ℓⱼ` is the mean of `ln(A + ε)`. A bit snaps `d` to the nearest multiple of
//! `Δ` whose cell index has that parity; the difference is realised by scaling
//! `k₁` up and `k₂` down by the same factor, so `ℓ₁ + ℓ₂` is unchanged. The
//! soft read-out is `−cos(π d / Δ)`.

use std::f64::consts::PI;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::bits::hard;
use crate::pattern::{PairPattern, SlotLayout, HEADER_BITS};
use crate::spectral::SpectralFrames;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QimParams {
    /// Quantizer step in nats.
    pub delta: f64,
    /// Floor added to magnitudes before the log.
    pub epsilon: f64,
}

impl Default for QimParams {
    fn default() -> Self {
        QimParams {
            delta: 1.0,
            epsilon: 1e-10,
        }
    }
}

pub fn pair_log_diff(frames: &SpectralFrames, pair: (usize, usize), group: Range<usize>, epsilon: f64) -> f64 {
    let n = group.len() as f64;
    let (mut l1, mut l2) = (0.0, 0.0);
    for i in group {
        l1 += (frames.magnitude(i, pair.0) + epsilon).ln();
        l2 += (frames.magnitude(i, pair.1) + epsilon).ln();
    }
    (l1 - l2) / n
}

/// Nearest quantizer level `c′Δ` with `c′ mod 2 == bit`.
pub fn qim_target(d: f64, bit: u8, delta: f64) -> f64 {
    let c = (d / delta).round();
    let parity = (c as i64).rem_euclid(2) as u8;
    let cell = if parity == bit & 1 {
        c
    } else if d - c * delta >= 0.0 {
        c + 1.0
    } else {
        c - 1.0
    };
    cell * delta
}

#[inline]
pub fn soft_value(d: f64, delta: f64) -> f64 {
    -(PI * d / delta).cos()
}

pub fn embed_mag(frames: &mut SpectralFrames, bits: &[u8], pairs: &PairPattern, layout: &SlotLayout, params: &QimParams) {
    assert!(bits.len() <= layout.total_slots(), "bitstream exceeds layout");
    for (slot, &bit) in bits.iter().enumerate() {
        let (group, idx) = layout.position(slot);
        let pair = pairs.pairs[idx];
        let range = layout.frames(group);
        let d = pair_log_diff(frames, pair, range.clone(), params.epsilon);
        let target = qim_target(d, bit, params.delta);
        let shift = (target - d) / 2.0;
        let (up, down) = (shift.exp(), (-shift).exp());
        for i in range {
            *frames.bin_mut(i, pair.0) *= up;
            *frames.bin_mut(i, pair.1) *= down;
        }
    }
}

/// Per-slot soft values for the first `count` slots the frames can hold.
pub fn extract_mag_soft(frames: &SpectralFrames, pairs: &PairPattern, layout: &SlotLayout, params: &QimParams, count: usize) -> Vec<f64> {
    let available = layout.num_groups.min(frames.num_frames() / layout.group_size.max(1)) * layout.slots_per_group;
    (0..count.min(available))
        .map(|slot| {
            let (group, idx) = layout.position(slot);
            let d = pair_log_diff(frames, pairs.pairs[idx], layout.frames(group), params.epsilon);
            soft_value(d, params.delta)
        })
        .collect()
}

/// Sums header copies into a hard header and body replicas into soft values.
///
/// `soft` must cover at least `layout.used_slots()` entries.
pub fn combine_replicas(soft: &[f64], layout: &SlotLayout) -> (Vec<u8>, Vec<f64>) {
    let header = (0..HEADER_BITS)
        .map(|b| {
            let sum: f64 = (0..layout.header_copies).map(|c| soft[layout.header_slot(c, b)]).sum();
            hard(sum)
        })
        .collect();
    let body = (0..layout.body_bits)
        .map(|b| (0..layout.replicas).map(|r| soft[layout.body_slot(r, b)]).sum())
        .collect();
    (header, body)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audio::AudioClip;
    use crate::pattern::{mag_pair_pattern, plan_layout, Channel};
    use crate::spectral::{istft, stft};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Scans every cell near `d` for the closest one with the right parity;
    /// equidistant cells resolve upward.
    fn brute_force_target(d: f64, bit: u8, delta: f64) -> f64 {
        let base = (d / delta).floor() as i64;
        let mut best: Option<(f64, i64)> = None;
        for c in base - 3..=base + 3 {
            if c.rem_euclid(2) as u8 != bit {
                continue;
            }
            let dist = (d - c as f64 * delta).abs();
            if best.is_none_or(|(bd, _)| dist <= bd) {
                best = Some((dist, c));
            }
        }
        best.unwrap().1 as f64 * delta
    }

    #[test]
    fn worked_examples() {
        assert_eq!(qim_target(0.3, 0, 1.0), 0.0);
        assert_eq!(qim_target(0.3, 1, 1.0), 1.0);
        assert_eq!(qim_target(-1.4, 0, 1.0), -2.0);
        assert_eq!(brute_force_target(-1.4, 0, 1.0), -2.0);
        // exact cell boundary: sgn(0) = +1
        assert_eq!(qim_target(2.0, 1, 1.0), 3.0);
    }

    #[test]
    fn matches_brute_force_on_grid() {
        for i in 0..=6000 {
            let d = -3.0 + i as f64 * 1e-3;
            for bit in 0..2 {
                let t = qim_target(d, bit, 1.0);
                assert_eq!(t, brute_force_target(d, bit, 1.0), "d={d} bit={bit}");
            }
        }
    }

    #[test]
    fn parity_and_distance_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..10_000 {
            let delta = rng.random_range(0.1..3.0);
            let d = rng.random_range(-10.0..10.0) * delta;
            for bit in 0..2u8 {
                let t = qim_target(d, bit, delta);
                assert_eq!(((t / delta).round() as i64).rem_euclid(2) as u8, bit);
                assert!((t - d).abs() <= delta + 1e-12);
            }
        }
    }

    #[test]
    fn soft_examples() {
        assert!((soft_value(1.0, 1.0) - 1.0).abs() < 1e-15);
        assert!((soft_value(0.0, 1.0) + 1.0).abs() < 1e-15);
        assert!(soft_value(0.5, 1.0).abs() < 1e-15);
        assert_eq!(hard(soft_value(0.5, 1.0).min(0.0)), 0);
    }

    #[test]
    fn combine_examples() {
        let layout = SlotLayout {
            group_size: 8,
            num_groups: 1,
            slots_per_group: 34,
            header_copies: 1,
            body_bits: 1,
            replicas: 2,
        };
        let mut soft = vec![-1.0; 34];
        soft[32] = 0.9;
        soft[33] = -0.2;
        assert_eq!(combine_replicas(&soft, &layout).1, vec![0.7]);
        soft[32] = -0.5;
        soft[33] = -0.5;
        assert_eq!(hard(combine_replicas(&soft, &layout).1[0]), 0);

        let single = SlotLayout { replicas: 1, slots_per_group: 33, ..layout };
        let (header, body) = combine_replicas(&soft[..33], &single);
        assert_eq!(header, vec![0; 32]);
        assert_eq!(body, vec![-0.5]);
    }

    fn frames_with(a1: f64, a2: f64) -> SpectralFrames {
        let n = 64;
        let samples: Vec<f64> = (0..n * 8)
            .map(|t| {
                let t = t as f64;
                a1 * 2.0 / n as f64 * (2.0 * PI * 5.0 * t / n as f64).cos()
                    + a2 * 2.0 / n as f64 * (2.0 * PI * 9.0 * t / n as f64).cos()
            })
            .collect();
        stft(&AudioClip::new(samples, 8000).unwrap(), n).unwrap()
    }

    #[test]
    fn log_diff_examples() {
        let f = frames_with(std::f64::consts::E, 1.0);
        assert!((pair_log_diff(&f, (5, 9), 0..8, 1e-10) - 1.0).abs() < 1e-9);
        let f = frames_with(0.5, 0.5);
        assert!(pair_log_diff(&f, (5, 9), 0..8, 1e-10).abs() < 1e-9);
        let f = frames_with(0.0, 0.0);
        assert_eq!(pair_log_diff(&f, (20, 21), 0..8, 1e-10), 0.0);
    }

    fn host(frames: usize) -> SpectralFrames {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let clip = AudioClip::new((0..frames * 2048).map(|_| rng.random_range(-0.5..0.5)).collect(), 44_100).unwrap();
        stft(&clip, 2048).unwrap()
    }

    #[test]
    fn embedding_hits_targets_and_keeps_sums() {
        let mut f = host(32);
        let pairs = mag_pair_pattern(3, 100, 340).unwrap();
        let layout = plan_layout(Channel::Magnitude, 32, 8, pairs.len(), 100, 5, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let bits: Vec<u8> = (0..layout.used_slots()).map(|_| rng.random_range(0..2)).collect();
        let before = f.clone();
        let p = QimParams::default();
        embed_mag(&mut f, &bits, &pairs, &layout, &p);
        for (slot, &b) in bits.iter().enumerate() {
            let (g, idx) = layout.position(slot);
            let pair = pairs.pairs[idx];
            let range = layout.frames(g);
            let d = pair_log_diff(&f, pair, range.clone(), p.epsilon);
            assert!((d - qim_target(pair_log_diff(&before, pair, range.clone(), p.epsilon), b, 1.0)).abs() < 1e-9);
            let sum = |fr: &SpectralFrames| {
                range.clone().map(|i| (fr.magnitude(i, pair.0) + p.epsilon).ln() + (fr.magnitude(i, pair.1) + p.epsilon).ln()).sum::<f64>()
            };
            assert!((sum(&f) - sum(&before)).abs() / 8.0 < 1e-9);
        }
        for i in 0..f.num_frames() {
            for k in 1..f.num_bins() - 1 {
                assert!((f.phase(i, k) - before.phase(i, k)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn no_attack_round_trip() {
        let mut f = host(88);
        let pairs = mag_pair_pattern(4, 100, 340).unwrap();
        let layout = plan_layout(Channel::Magnitude, 88, 8, pairs.len(), 600, 5, 3).unwrap();
        assert_eq!(layout.replicas, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let body: Vec<u8> = (0..600).map(|_| rng.random_range(0..2)).collect();
        let stream = layout.bitstream(145, &body);
        let p = QimParams::default();
        embed_mag(&mut f, &stream, &pairs, &layout, &p);
        let again = stft(&istft(&f), 2048).unwrap();
        let soft = extract_mag_soft(&again, &pairs, &layout, &p, layout.used_slots());
        let (header, body_soft) = combine_replicas(&soft, &layout);
        assert_eq!(crate::bits::bits_to_u32(&header), 145);
        assert_eq!(body_soft.iter().map(|&s| hard(s)).collect::<Vec<_>>(), body);
    }
}
