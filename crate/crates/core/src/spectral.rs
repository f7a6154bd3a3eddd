//! Rectangular-window, non-overlapping STFT with exact reconstruction.
//!
//! A clip of `L` samples becomes `⌊L / n_fft⌋` half-spectrum frames of
//! `n_fft / 2 + 1` bins; the remaining samples ride along untouched in `tail`.
//! Because the frames neither overlap nor taper, the transform is orthogonal
//! per frame and `istft(stft(x)) == x` up to rounding.

use std::f64::consts::PI;

use realfft::num_complex::Complex64;
use realfft::RealFftPlanner;

use crate::audio::AudioClip;
use crate::error::{Error, Result};

pub const DEFAULT_N_FFT: usize = 2048;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFrames {
    data: Vec<Complex64>,
    num_frames: usize,
    n_fft: usize,
    tail: Vec<f64>,
    original_length: usize,
    sample_rate: u32,
}

impl SpectralFrames {
    pub fn num_frames(&self) -> usize {
        self.num_frames
    }

    pub fn n_fft(&self) -> usize {
        self.n_fft
    }

    pub fn num_bins(&self) -> usize {
        self.n_fft / 2 + 1
    }

    pub fn tail(&self) -> &[f64] {
        &self.tail
    }

    pub fn original_length(&self) -> usize {
        self.original_length
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn frame(&self, i: usize) -> &[Complex64] {
        let b = self.num_bins();
        &self.data[i * b..(i + 1) * b]
    }

    pub fn frame_mut(&mut self, i: usize) -> &mut [Complex64] {
        let b = self.num_bins();
        &mut self.data[i * b..(i + 1) * b]
    }

    #[inline]
    pub fn bin(&self, frame: usize, bin: usize) -> Complex64 {
        self.data[frame * self.num_bins() + bin]
    }

    #[inline]
    pub fn bin_mut(&mut self, frame: usize, bin: usize) -> &mut Complex64 {
        let b = self.num_bins();
        &mut self.data[frame * b + bin]
    }

    #[inline]
    pub fn magnitude(&self, frame: usize, bin: usize) -> f64 {
        self.bin(frame, bin).norm()
    }

    /// Phase in (−π, π].
    #[inline]
    pub fn phase(&self, frame: usize, bin: usize) -> f64 {
        wrap_phase(self.bin(frame, bin).arg())
    }
}

/// Folds an angle into (−π, π].
pub fn wrap_phase(angle: f64) -> f64 {
    let mut a = angle % (2.0 * PI);
    if a <= -PI {
        a += 2.0 * PI;
    } else if a > PI {
        a -= 2.0 * PI;
    }
    a
}

pub fn stft(clip: &AudioClip, n_fft: usize) -> Result<SpectralFrames> {
    if n_fft < 2 || !n_fft.is_multiple_of(2) {
        return Err(Error::InvalidConfig(format!("n_fft must be even and >= 2, got {n_fft}")));
    }
    if clip.is_empty() {
        return Err(Error::InvalidAudio("empty clip".into()));
    }
    let samples = clip.samples();
    let num_frames = samples.len() / n_fft;
    let bins = n_fft / 2 + 1;
    let fft = RealFftPlanner::<f64>::new().plan_fft_forward(n_fft);
    let mut input = fft.make_input_vec();
    let mut scratch = fft.make_scratch_vec();
    let mut data = vec![Complex64::new(0.0, 0.0); num_frames * bins];
    for (frame, out) in samples.chunks_exact(n_fft).zip(data.chunks_exact_mut(bins)) {
        input.copy_from_slice(frame);
        fft.process_with_scratch(&mut input, out, &mut scratch)
            .expect("buffer sizes come from the plan");
    }
    Ok(SpectralFrames {
        data,
        num_frames,
        n_fft,
        tail: samples[num_frames * n_fft..].to_vec(),
        original_length: samples.len(),
        sample_rate: clip.sample_rate(),
    })
}

pub fn istft(frames: &SpectralFrames) -> AudioClip {
    let n_fft = frames.n_fft;
    let bins = frames.num_bins();
    let ifft = RealFftPlanner::<f64>::new().plan_fft_inverse(n_fft);
    let mut spectrum = ifft.make_input_vec();
    let mut scratch = ifft.make_scratch_vec();
    let mut frame_out = ifft.make_output_vec();
    let scale = 1.0 / n_fft as f64;
    let mut samples = Vec::with_capacity(frames.original_length);
    for frame in frames.data.chunks_exact(bins) {
        spectrum.copy_from_slice(frame);
        // A real signal has purely real DC and Nyquist bins.
        spectrum[0].im = 0.0;
        spectrum[bins - 1].im = 0.0;
        ifft.process_with_scratch(&mut spectrum, &mut frame_out, &mut scratch)
            .expect("buffer sizes come from the plan");
        samples.extend(frame_out.iter().map(|v| v * scale));
    }
    samples.extend_from_slice(&frames.tail);
    AudioClip::from_parts(samples, frames.sample_rate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn noise(len: usize, seed: u64) -> AudioClip {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        AudioClip::new((0..len).map(|_| rng.random_range(-1.0..1.0)).collect(), 44_100).unwrap()
    }

    #[test]
    fn frame_count_and_tail() {
        let f = stft(&noise(441_000, 1), 2048).unwrap();
        assert_eq!(f.num_frames(), 215);
        assert_eq!(f.tail().len(), 680);
        assert_eq!(f.num_bins(), 1025);
    }

    #[test]
    fn short_clip_is_all_tail() {
        let clip = noise(100, 2);
        let f = stft(&clip, 2048).unwrap();
        assert_eq!(f.num_frames(), 0);
        assert_eq!(istft(&f), clip);
    }

    #[test]
    fn cosine_lands_in_its_bin() {
        let n = 256;
        let k = 17;
        let samples = (0..n)
            .map(|t| (2.0 * PI * k as f64 * t as f64 / n as f64).cos())
            .collect();
        let f = stft(&AudioClip::new(samples, 8000).unwrap(), n).unwrap();
        for bin in 0..f.num_bins() {
            let m = f.magnitude(0, bin);
            if bin == k {
                assert!((m - n as f64 / 2.0).abs() < 1e-9);
            } else {
                assert!(m < 1e-9, "bin {bin}: {m}");
            }
        }
    }

    #[test]
    fn zeros_stay_zero() {
        let f = stft(&AudioClip::new(vec![0.0; 4096], 8000).unwrap(), 1024).unwrap();
        assert!(f.data.iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn perfect_reconstruction_random_lengths() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for trial in 0..100 {
            let len = rng.random_range(1..20_000);
            let clip = noise(len, 100 + trial);
            let back = istft(&stft(&clip, 2048).unwrap());
            assert_eq!(back.len(), len);
            let err = clip
                .samples()
                .iter()
                .zip(back.samples())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(err <= 1e-9, "len {len}: {err}");
        }
    }

    #[test]
    fn linearity() {
        let clip = noise(8192, 4);
        let scaled = AudioClip::new(clip.samples().iter().map(|s| 0.3 * s).collect(), 44_100).unwrap();
        let a = stft(&clip, 2048).unwrap();
        let b = stft(&scaled, 2048).unwrap();
        for (x, y) in a.data.iter().zip(&b.data) {
            assert!((x * 0.3 - y).norm() < 1e-9);
        }
    }

    #[test]
    fn parseval() {
        let n = 2048;
        let clip = noise(n * 3, 5);
        let f = stft(&clip, n).unwrap();
        for i in 0..3 {
            let time: f64 = clip.samples()[i * n..(i + 1) * n].iter().map(|s| s * s).sum();
            let fr = f.frame(i);
            let last = fr.len() - 1;
            let spec: f64 = fr
                .iter()
                .enumerate()
                .map(|(k, c)| if k == 0 || k == last { c.norm_sqr() } else { 2.0 * c.norm_sqr() })
                .sum();
            assert!(((spec / n as f64) - time).abs() / time < 1e-6);
        }
    }

    #[test]
    fn phase_edit_preserves_magnitudes_on_reanalysis() {
        let clip = noise(4096, 6);
        let mut f = stft(&clip, 2048).unwrap();
        let before = f.clone();
        let c = f.bin(1, 100);
        *f.bin_mut(1, 100) = Complex64::from_polar(c.norm(), 0.7);
        let again = stft(&istft(&f), 2048).unwrap();
        for i in 0..2 {
            for k in 0..again.num_bins() {
                assert!((again.magnitude(i, k) - before.magnitude(i, k)).abs() < 1e-9);
            }
        }
        assert!((again.phase(1, 100) - 0.7).abs() < 1e-9);
    }

    #[test]
    fn wrap_range() {
        assert_eq!(wrap_phase(PI), PI);
        assert!((wrap_phase(-PI) - PI).abs() < 1e-15);
        assert!((wrap_phase(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_phase(0.5 + 4.0 * PI) - 0.5).abs() < 1e-12);
    }
}
