//! Signal and bit metrics on length-aligned pairs.
//!
//! Pairs of unequal length are truncated to the shorter one.

use std::f64::consts::PI;

use realfft::RealFftPlanner;
use serde::{Deserialize, Serialize};

use crate::audio::AudioClip;
use crate::codec::{FailureStage, VerifiedChannel, VerifyOutcome};

/// Cap for SNR/PSNR when the residual is exactly zero.
pub const DB_SENTINEL: f64 = 200.0;
pub const LSD_FLOOR: f64 = 1e-10;

fn aligned<'a>(a: &'a [f64], b: &'a [f64]) -> (&'a [f64], &'a [f64]) {
    let n = a.len().min(b.len());
    (&a[..n], &b[..n])
}

fn clamp_db(v: f64) -> f64 {
    if v.is_nan() {
        -DB_SENTINEL
    } else {
        v.clamp(-DB_SENTINEL, DB_SENTINEL)
    }
}

pub fn snr(reference: &[f64], degraded: &[f64]) -> f64 {
    let (r, d) = aligned(reference, degraded);
    let signal: f64 = r.iter().map(|x| x * x).sum();
    let noise: f64 = r.iter().zip(d).map(|(x, y)| (x - y) * (x - y)).sum();
    if noise == 0.0 {
        return DB_SENTINEL;
    }
    clamp_db(10.0 * (signal / noise).log10())
}

pub fn psnr(reference: &[f64], degraded: &[f64]) -> f64 {
    let (r, d) = aligned(reference, degraded);
    if r.is_empty() {
        return DB_SENTINEL;
    }
    let mse = r.iter().zip(d).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / r.len() as f64;
    if mse == 0.0 {
        return DB_SENTINEL;
    }
    let peak = r.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    clamp_db(20.0 * (peak / mse.sqrt()).log10())
}

/// Periodic Hann window.
fn hann(n: usize) -> Vec<f64> {
    (0..n).map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos()).collect()
}

/// Frame start offsets: hop-spaced, at least one frame (zero-padded).
fn frame_starts(len: usize, n_fft: usize, hop: usize) -> Vec<usize> {
    if len <= n_fft {
        return vec![0];
    }
    (0..=(len - n_fft) / hop).map(|i| i * hop).collect()
}

/// Log-spectral distance in dB over a Hann-windowed STFT with `n_fft / 4` hop.
///
/// Overlapping tapered frames see phase discontinuities as magnitude changes,
/// which an aligned rectangular analysis would not.
pub fn lsd(reference: &[f64], degraded: &[f64], n_fft: usize) -> f64 {
    let (r, d) = aligned(reference, degraded);
    if r.is_empty() {
        return 0.0;
    }
    let hop = (n_fft / 4).max(1);
    let window = hann(n_fft);
    let fft = RealFftPlanner::<f64>::new().plan_fft_forward(n_fft);
    let mut buf_r = fft.make_input_vec();
    let mut buf_d = fft.make_input_vec();
    let mut spec_r = fft.make_output_vec();
    let mut spec_d = fft.make_output_vec();
    let starts = frame_starts(r.len(), n_fft, hop);
    let mut total = 0.0;
    for &start in &starts {
        for i in 0..n_fft {
            let (x, y) = match (r.get(start + i), d.get(start + i)) {
                (Some(&x), Some(&y)) => (x, y),
                _ => (0.0, 0.0),
            };
            buf_r[i] = x * window[i];
            buf_d[i] = y * window[i];
        }
        fft.process(&mut buf_r, &mut spec_r).expect("sizes from plan");
        fft.process(&mut buf_d, &mut spec_d).expect("sizes from plan");
        let mean_sq = spec_r
            .iter()
            .zip(&spec_d)
            .map(|(a, b)| {
                let diff = 20.0 * a.norm().max(LSD_FLOOR).log10() - 20.0 * b.norm().max(LSD_FLOOR).log10();
                diff * diff
            })
            .sum::<f64>()
            / spec_r.len() as f64;
        total += mean_sq.sqrt();
    }
    total / starts.len() as f64
}

/// Fraction of differing bits over the common prefix; 1.0 when nothing overlaps.
pub fn ber(original: &[u8], extracted: &[u8]) -> f64 {
    let n = original.len().min(extracted.len());
    if n == 0 {
        return 1.0;
    }
    let errors = original.iter().zip(extracted).filter(|(a, b)| (*a & 1) != (*b & 1)).count();
    errors as f64 / n as f64
}

/// Cosine similarity of the bipolar codes over the common prefix.
pub fn nc(original: &[u8], extracted: &[u8]) -> f64 {
    let n = original.len().min(extracted.len());
    if n == 0 {
        return 0.0;
    }
    let dot: f64 = original
        .iter()
        .zip(extracted)
        .map(|(&a, &b)| (2.0 * (a & 1) as f64 - 1.0) * (2.0 * (b & 1) as f64 - 1.0))
        .sum();
    dot / n as f64
}

/// Signal-side metrics of one clip pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignalMetrics {
    pub snr: f64,
    pub psnr: f64,
    pub lsd: f64,
}

impl SignalMetrics {
    pub fn compute(reference: &[f64], degraded: &[f64], n_fft: usize) -> Self {
        SignalMetrics {
            snr: snr(reference, degraded),
            psnr: psnr(reference, degraded),
            lsd: lsd(reference, degraded, n_fft),
        }
    }
}

/// Everything recorded for one (clip, attack) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClipMetrics {
    pub snr: f64,
    pub psnr: f64,
    pub lsd: f64,
    /// Bit error rate of the deciding channel; 1 when its header failed.
    pub ber: f64,
    /// Normalised correlation of the deciding channel; −1 when its header failed.
    pub nc: f64,
    pub ber_phase: Option<f64>,
    pub ber_mag: Option<f64>,
    pub verified: bool,
    pub channel: VerifiedChannel,
    pub failure_stage: FailureStage,
    /// Perceptual scores from external tools, passed through when supplied.
    pub pesq: Option<f64>,
    pub stoi: Option<f64>,
}

impl ClipMetrics {
    /// `reference` is the watermarked clip, `degraded` the attacked one and
    /// `outcome` its verification against `truth_bits`.
    pub fn evaluate(
        reference: &AudioClip,
        degraded: &AudioClip,
        outcome: &VerifyOutcome,
        truth_bits: &[u8],
        n_fft: usize,
    ) -> Self {
        let signal = SignalMetrics::compute(reference.samples(), degraded.samples(), n_fft);
        let bits = outcome.deciding_report().and_then(|r| r.body_bits.as_deref());
        let (ber_v, nc_v) = match bits {
            Some(b) => (ber(truth_bits, b), nc(truth_bits, b)),
            None => (1.0, -1.0),
        };
        ClipMetrics {
            snr: signal.snr,
            psnr: signal.psnr,
            lsd: signal.lsd,
            ber: ber_v,
            nc: nc_v,
            ber_phase: outcome.ber_phase,
            ber_mag: outcome.ber_mag,
            verified: outcome.verified,
            channel: outcome.channel,
            failure_stage: outcome.failure_stage,
            pesq: None,
            stoi: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn noise(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    #[test]
    fn snr_examples() {
        let s = noise(10_000, 1);
        assert_eq!(snr(&s, &s), DB_SENTINEL);
        let half: Vec<f64> = s.iter().map(|x| 0.5 * x).collect();
        assert!((snr(&s, &half) - 10.0 * 4.0f64.log10()).abs() < 1e-9);
        let neg: Vec<f64> = s.iter().map(|x| -x).collect();
        assert!((snr(&s, &neg) + 10.0 * 4.0f64.log10()).abs() < 1e-9);
    }

    #[test]
    fn psnr_examples() {
        let r = vec![1.0, 0.0, 0.0, 0.0];
        assert_eq!(psnr(&r, &r), DB_SENTINEL);
        // MSE 0.01 with a unit peak
        let d = vec![1.2, 0.0, 0.0, 0.0];
        assert!((psnr(&r, &d) - 20.0).abs() < 1e-9);
        let r = vec![0.5, 0.0, 0.0, 0.0];
        let d = vec![0.7, 0.0, 0.0, 0.0];
        assert!((psnr(&r, &d) - 20.0 * (0.5f64 / 0.1).log10()).abs() < 1e-9);
        assert!((psnr(&r, &d) - 13.979).abs() < 1e-3);
    }

    #[test]
    fn lsd_examples() {
        let s = noise(8192, 2);
        assert_eq!(lsd(&s, &s, 2048), 0.0);
        let loud: Vec<f64> = s.iter().map(|x| 10.0 * x).collect();
        assert!((lsd(&s, &loud, 2048) - 20.0).abs() < 1e-9);
    }

    /// Direct O(N²) DFT with explicit loops over frames and bins.
    fn lsd_oracle(r: &[f64], d: &[f64], n: usize) -> f64 {
        let hop = n / 4;
        let mut frames = 0;
        let mut total = 0.0;
        let mut start = 0;
        while start + n <= r.len() {
            let mut acc = 0.0;
            for k in 0..=n / 2 {
                let (mut ar, mut ai, mut br, mut bi) = (0.0, 0.0, 0.0, 0.0);
                for t in 0..n {
                    let w = 0.5 - 0.5 * (2.0 * PI * t as f64 / n as f64).cos();
                    let ang = -2.0 * PI * (k * t) as f64 / n as f64;
                    ar += w * r[start + t] * ang.cos();
                    ai += w * r[start + t] * ang.sin();
                    br += w * d[start + t] * ang.cos();
                    bi += w * d[start + t] * ang.sin();
                }
                let pa = 10.0 * (ar * ar + ai * ai).max(LSD_FLOOR * LSD_FLOOR).log10();
                let pb = 10.0 * (br * br + bi * bi).max(LSD_FLOOR * LSD_FLOOR).log10();
                acc += (pa - pb).powi(2);
            }
            total += (acc / (n / 2 + 1) as f64).sqrt();
            frames += 1;
            start += hop;
        }
        total / frames as f64
    }

    #[test]
    fn lsd_matches_direct_dft() {
        let r = noise(640, 3);
        let d: Vec<f64> = noise(640, 4).iter().zip(&r).map(|(a, b)| b + 0.3 * a).collect();
        let fast = lsd(&r, &d, 64);
        let slow = lsd_oracle(&r, &d, 64);
        assert!((fast - slow).abs() < 1e-9, "{fast} vs {slow}");
    }

    #[test]
    fn ber_nc_examples() {
        let a = [1, 0, 1, 1, 0, 0, 1, 0];
        assert_eq!(ber(&a, &a), 0.0);
        let mut b = a;
        b[3] ^= 1;
        assert_eq!(ber(&a, &b), 0.125);
        assert_eq!(ber(&a, &[]), 1.0);
        assert_eq!(nc(&a, &a), 1.0);
        let c: Vec<u8> = a.iter().map(|x| x ^ 1).collect();
        assert_eq!(nc(&a, &c), -1.0);
        let half = [1, 0, 1, 1, 1, 1, 0, 1];
        assert_eq!(nc(&a, &half), 0.0);
    }

    #[test]
    fn nc_is_one_minus_twice_ber() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let n = rng.random_range(1..300);
            let a: Vec<u8> = (0..n).map(|_| rng.random_range(0..2)).collect();
            let b: Vec<u8> = (0..n).map(|_| rng.random_range(0..2)).collect();
            let (e, c) = (ber(&a, &b), nc(&a, &b));
            assert!((0.0..=1.0).contains(&e) && (-1.0..=1.0).contains(&c));
            assert!((c - (1.0 - 2.0 * e)).abs() < 1e-12);
        }
    }

    #[test]
    fn unequal_lengths_truncate() {
        let s = noise(5000, 6);
        assert_eq!(snr(&s, &s[..4000]), DB_SENTINEL);
        assert!(lsd(&s[..100], &s, 2048) >= 0.0);
    }
}
