//! Seeded synthetic host signals: Gaussian noise with a pink (1/f power) tilt.

use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use realfft::RealFftPlanner;

use crate::audio::AudioClip;
use crate::error::{Error, Result};

/// Frequency below which the tilt stops rising.
const TILT_FLOOR_HZ: f64 = 50.0;
const PEAK: f64 = 0.5;

/// One host clip, deterministic in `(seed, index)`.
pub fn synthetic_host(seconds: f64, sample_rate: u32, seed: u64, index: u64) -> AudioClip {
    let len = (seconds * sample_rate as f64).round() as usize;
    if len == 0 {
        return AudioClip::from_parts(Vec::new(), sample_rate);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let mut samples: Vec<f64> = (0..len).map(|_| StandardNormal.sample(&mut rng)).collect();

    let mut planner = RealFftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(len);
    let inv = planner.plan_fft_inverse(len);
    let mut spectrum = fwd.make_output_vec();
    fwd.process(&mut samples, &mut spectrum).expect("sizes from plan");
    let hz_per_bin = sample_rate as f64 / len as f64;
    for (k, c) in spectrum.iter_mut().enumerate() {
        let f = (k as f64 * hz_per_bin).max(TILT_FLOOR_HZ);
        *c *= (TILT_FLOOR_HZ / f).sqrt();
    }
    spectrum[0].im = 0.0;
    if len.is_multiple_of(2) {
        let last = spectrum.len() - 1;
        spectrum[last].im = 0.0;
    }
    inv.process(&mut spectrum, &mut samples).expect("sizes from plan");

    let peak = samples.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    let scale = if peak > 0.0 { PEAK / peak } else { 0.0 };
    samples.iter_mut().for_each(|s| *s *= scale);
    AudioClip::from_parts(samples, sample_rate)
}

/// Writes `count` hosts as `host_0000.wav`, ... and returns their paths.
pub fn generate_synthetic_hosts(dir: &Path, count: usize, seconds: f64, sample_rate: u32, seed: u64) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    (0..count)
        .map(|i| {
            let path = dir.join(format!("host_{i:04}.wav"));
            synthetic_host(seconds, sample_rate, seed, i as u64).write_wav(&path)?;
            Ok(path)
        })
        .collect()
}
