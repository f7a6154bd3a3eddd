//! Rational-ratio resampling with a Kaiser-windowed sinc kernel.
//!
//! The kernel spans 64 zero crossings of the lower of the two rates, so a
//! downsampler evaluates proportionally more input taps per output sample.
//! Each polyphase branch is normalised to unity DC gain, and the kernel is
//! centred on the output instant (zero phase, no delay).

use std::f64::consts::PI;

pub const TAPS: usize = 64;
pub const KAISER_BETA: f64 = 8.6;
/// Passband edge as a fraction of the lower Nyquist frequency.
pub const ROLLOFF: f64 = 0.91;

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Zeroth-order modified Bessel function of the first kind.
pub(crate) fn bessel_i0(x: f64) -> f64 {
    let mut sum = 1.0;
    let mut term = 1.0;
    let half = x / 2.0;
    for k in 1..200 {
        term *= (half / k as f64) * (half / k as f64);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// Continuous kernel at offset `t` input samples.
pub(crate) fn kernel(t: f64, cutoff: f64, half_width: f64) -> f64 {
    let r = t / half_width;
    // The window edge itself is excluded; the tolerance keeps taps that land
    // on it (up to rounding) out of the support in every evaluation order.
    if r.abs() >= 1.0 - 1e-12 {
        return 0.0;
    }
    let w = bessel_i0(KAISER_BETA * (1.0 - r * r).sqrt()) / bessel_i0(KAISER_BETA);
    2.0 * cutoff * sinc(2.0 * cutoff * t) * w
}

#[derive(Debug, Clone)]
pub struct SincResampler {
    from: u32,
    to: u32,
    up: usize,
    down: usize,
    half: usize,
    // up × (2·half) taps, branch p for fractional position p/up
    table: Vec<f64>,
}

impl SincResampler {
    pub fn new(from: u32, to: u32) -> Self {
        assert!(from > 0 && to > 0, "rates must be positive");
        let g = gcd(from as u64, to as u64);
        let up = (to as u64 / g) as usize;
        let down = (from as u64 / g) as usize;
        let scale = (to as f64 / from as f64).min(1.0);
        let half_width = TAPS as f64 / 2.0 / scale;
        let half = half_width.ceil() as usize;
        let cutoff = 0.5 * scale * ROLLOFF;
        let width = 2 * half;
        let mut table = vec![0.0; up * width];
        for p in 0..up {
            let frac = p as f64 / up as f64;
            let row = &mut table[p * width..(p + 1) * width];
            for (j, tap) in row.iter_mut().enumerate() {
                let offset = j as f64 - (half as f64 - 1.0);
                *tap = kernel(offset - frac, cutoff, half_width);
            }
            let sum: f64 = row.iter().sum();
            row.iter_mut().for_each(|t| *t /= sum);
        }
        SincResampler {
            from,
            to,
            up,
            down,
            half,
            table,
        }
    }

    pub fn output_len(&self, input_len: usize) -> usize {
        (input_len * self.up).div_ceil(self.down)
    }

    pub fn process(&self, input: &[f64]) -> Vec<f64> {
        if self.from == self.to {
            return input.to_vec();
        }
        let width = 2 * self.half;
        let n_out = self.output_len(input.len());
        let len = input.len() as isize;
        (0..n_out)
            .map(|n| {
                let pos = n * self.down;
                let idx = (pos / self.up) as isize;
                let p = pos % self.up;
                let taps = &self.table[p * width..(p + 1) * width];
                let first = idx - (self.half as isize - 1);
                if first >= 0 && first + width as isize <= len {
                    let s = &input[first as usize..first as usize + width];
                    s.iter().zip(taps).map(|(a, b)| a * b).sum()
                } else {
                    taps.iter()
                        .enumerate()
                        .filter_map(|(j, &t)| {
                            let i = first + j as isize;
                            (0..len).contains(&i).then(|| input[i as usize] * t)
                        })
                        .sum()
                }
            })
            .collect()
    }
}

/// `from → intermediate → from`, trimmed or zero-padded to the input length.
pub fn round_trip(samples: &[f64], from: u32, intermediate: u32) -> Vec<f64> {
    let down = SincResampler::new(from, intermediate).process(samples);
    let mut back = SincResampler::new(intermediate, from).process(&down);
    back.resize(samples.len(), 0.0);
    back
}
