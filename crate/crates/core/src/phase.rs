//! Phase channel: each bit becomes a ±π/2 anchor phase at one pattern bin,
//! with the same rotation applied to every frame of the group.

use std::f64::consts::FRAC_PI_2;

use realfft::num_complex::Complex64;

use crate::pattern::{BinPattern, SlotLayout};
use crate::spectral::{wrap_phase, SpectralFrames};

/// Magnitude written at an anchor whose host bin is exactly zero, so the
/// embedded phase is defined.
pub const ZERO_BIN_FLOOR: f64 = 1e-12;

#[inline]
fn target_phase(bit: u8) -> f64 {
    if bit & 1 == 1 {
        FRAC_PI_2
    } else {
        -FRAC_PI_2
    }
}

/// Writes `bits` (already in slot order) into consecutive slots.
pub fn embed_phase(frames: &mut SpectralFrames, bits: &[u8], pattern: &BinPattern, layout: &SlotLayout) {
    assert!(bits.len() <= layout.total_slots(), "bitstream exceeds layout");
    for (slot, &bit) in bits.iter().enumerate() {
        let (group, idx) = layout.position(slot);
        let bin = pattern.bins[idx];
        let mut range = layout.frames(group);
        let anchor = range.next().expect("group holds at least one frame");
        let target = target_phase(bit);

        let a0 = frames.bin(anchor, bin);
        let (anchor_mag, anchor_phase) = if a0.norm() == 0.0 {
            (ZERO_BIN_FLOOR, 0.0)
        } else {
            (a0.norm(), frames.phase(anchor, bin))
        };
        let delta = target - anchor_phase;
        *frames.bin_mut(anchor, bin) = Complex64::from_polar(anchor_mag, target);
        for i in range {
            let c = frames.bin(i, bin);
            let mag = c.norm();
            if mag > 0.0 {
                *frames.bin_mut(i, bin) = Complex64::from_polar(mag, wrap_phase(c.arg() + delta));
            }
        }
    }
}

/// `sin` of the anchor phase for the first `count` slots (or as many as the
/// frames hold).
pub fn extract_phase_soft(frames: &SpectralFrames, pattern: &BinPattern, layout: &SlotLayout, count: usize) -> Vec<f64> {
    let available = layout.num_groups.min(frames.num_frames() / layout.group_size.max(1)) * layout.slots_per_group;
    (0..count.min(available))
        .map(|slot| {
            let (group, idx) = layout.position(slot);
            let bin = pattern.bins[idx];
            frames.phase(group * layout.group_size, bin).sin()
        })
        .collect()
}
