//! Signal-processing attacks used to probe robustness.
//!
//! Every attack maps a clip to a clip of the same length and sample rate.
//! [`AttackSpec`] is the serialisable description used by benchmark
//! configurations; [`apply`] dispatches it.

mod butterworth;
mod external;
mod resample;

use std::f64::consts::PI;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use realfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::audio::AudioClip;
use crate::codec::{Carriers, CodecConfig};
use crate::error::{Error, Result};
use crate::spectral::{istft, stft, wrap_phase};

pub use butterworth::{design_lowpass, lowpass, Biquad};
pub use external::{codec_round_trip, default_tool, tool_available, ExternalCodec, DEFAULT_TOOL};
pub use resample::{round_trip as resample_round_trip_samples, SincResampler};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AttackSpec {
    Identity,
    /// Zero the final `fraction` of the samples.
    CropTail { fraction: f64 },
    /// Causal Butterworth low-pass.
    Lowpass { cutoff_hz: f64, order: usize },
    /// Resample to `intermediate_hz` and back.
    ResampleRoundTrip { intermediate_hz: u32 },
    /// Encode and decode with an external tool.
    ExternalCodec(ExternalCodec),
    /// Blend the phase of the carrier bins towards uniform noise.
    ErasurePhase { alpha: f64, seed: u64 },
}

impl AttackSpec {
    /// Stable label used in tables and file names.
    pub fn name(&self) -> String {
        match self {
            AttackSpec::Identity => "identity".into(),
            AttackSpec::CropTail { fraction } => format!("crop_tail_{}", fmt_num(fraction * 100.0)),
            AttackSpec::Lowpass { cutoff_hz, order } => format!("lowpass_{}hz_o{order}", fmt_num(*cutoff_hz)),
            AttackSpec::ResampleRoundTrip { intermediate_hz } => format!("resample_{intermediate_hz}hz"),
            AttackSpec::ExternalCodec(c) => c.name.clone(),
            AttackSpec::ErasurePhase { alpha, .. } => format!("erasure_phase_a{alpha:.2}"),
        }
    }

    pub fn is_external(&self) -> bool {
        matches!(self, AttackSpec::ExternalCodec(_))
    }

    /// The default robustness suite: crops, low-pass, resampling, and the
    /// three external codecs.
    pub fn default_suite() -> Vec<AttackSpec> {
        vec![
            AttackSpec::Identity,
            AttackSpec::CropTail { fraction: 0.10 },
            AttackSpec::CropTail { fraction: 0.20 },
            AttackSpec::Lowpass { cutoff_hz: 8000.0, order: 4 },
            AttackSpec::ResampleRoundTrip { intermediate_hz: 16_000 },
            AttackSpec::ExternalCodec(ExternalCodec::flac()),
            AttackSpec::ExternalCodec(ExternalCodec::mp3(128)),
            AttackSpec::ExternalCodec(ExternalCodec::ogg(128)),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        match self {
            AttackSpec::CropTail { fraction } if !(0.0..=1.0).contains(fraction) => {
                bad(format!("crop fraction {fraction} outside [0, 1]"))
            }
            AttackSpec::Lowpass { cutoff_hz, order } if *order == 0 || !(*cutoff_hz > 0.0) => {
                bad(format!("invalid low-pass cutoff {cutoff_hz} / order {order}"))
            }
            AttackSpec::ResampleRoundTrip { intermediate_hz: 0 } => bad("intermediate rate must be positive".into()),
            AttackSpec::ErasurePhase { alpha, .. } if !(0.0..=1.0).contains(alpha) => {
                bad(format!("erasure alpha {alpha} outside [0, 1]"))
            }
            _ => Ok(()),
        }
    }
}

fn fmt_num(x: f64) -> String {
    if x.fract() == 0.0 {
        format!("{x:.0}")
    } else {
        format!("{x}")
    }
}

/// What some attacks need beyond the clip itself.
#[derive(Debug, Clone)]
pub struct AttackEnv {
    /// Key whose phase carriers the erasure attack targets.
    pub public_key: Option<[u8; 32]>,
    pub codec: CodecConfig,
    /// External encoder executable.
    pub tool: PathBuf,
}

impl Default for AttackEnv {
    fn default() -> Self {
        AttackEnv {
            public_key: None,
            codec: CodecConfig::default(),
            tool: default_tool(),
        }
    }
}

pub fn apply(clip: &AudioClip, spec: &AttackSpec, env: &AttackEnv) -> Result<AudioClip> {
    spec.validate()?;
    match spec {
        AttackSpec::Identity => Ok(clip.clone()),
        AttackSpec::CropTail { fraction } => Ok(crop_tail_zero(clip, *fraction)),
        AttackSpec::Lowpass { cutoff_hz, order } => lowpass_butterworth(clip, *cutoff_hz, *order),
        AttackSpec::ResampleRoundTrip { intermediate_hz } => Ok(resample_round_trip(clip, *intermediate_hz)),
        AttackSpec::ExternalCodec(codec) => codec_round_trip(clip, codec, &env.tool),
        AttackSpec::ErasurePhase { alpha, seed } => {
            let pk = env
                .public_key
                .ok_or_else(|| Error::InvalidConfig("phase erasure needs a public key".into()))?;
            erasure_phase_randomize(clip, &pk, &env.codec, *alpha, *seed)
        }
    }
}

/// Zeroes the last `⌈fraction · len⌉` samples; the length is unchanged.
pub fn crop_tail_zero(clip: &AudioClip, fraction: f64) -> AudioClip {
    let mut samples = clip.samples().to_vec();
    let n = ((fraction.clamp(0.0, 1.0) * samples.len() as f64).ceil() as usize).min(samples.len());
    let start = samples.len() - n;
    samples[start..].iter_mut().for_each(|s| *s = 0.0);
    AudioClip::from_parts(samples, clip.sample_rate())
}

pub fn lowpass_butterworth(clip: &AudioClip, cutoff_hz: f64, order: usize) -> Result<AudioClip> {
    let nyquist = clip.sample_rate() as f64 / 2.0;
    if !(cutoff_hz > 0.0 && cutoff_hz < nyquist) || order == 0 {
        return Err(Error::InvalidConfig(format!(
            "low-pass cutoff {cutoff_hz} Hz must lie in (0, {nyquist}) with positive order"
        )));
    }
    let y = lowpass(clip.samples(), order, cutoff_hz, clip.sample_rate() as f64);
    Ok(AudioClip::from_parts(y, clip.sample_rate()))
}

pub fn resample_round_trip(clip: &AudioClip, intermediate_hz: u32) -> AudioClip {
    let y = resample_round_trip_samples(clip.samples(), clip.sample_rate(), intermediate_hz);
    AudioClip::from_parts(y, clip.sample_rate())
}

/// Replaces the phase of every carrier bin in every frame with
/// `wrap((1 − α)·φ + α·u)`, `u` uniform on (−π, π] and drawn independently
/// per (frame, bin) from a generator seeded with `seed`. Magnitudes are kept.
pub fn erasure_phase_randomize(
    clip: &AudioClip,
    public_key: &[u8; 32],
    config: &CodecConfig,
    alpha: f64,
    seed: u64,
) -> Result<AudioClip> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidConfig(format!("erasure alpha {alpha} outside [0, 1]")));
    }
    config.validate()?;
    let carriers = Carriers::derive(public_key, config)?;
    let mut frames = stft(clip, config.n_fft)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for f in 0..frames.num_frames() {
        for &k in &carriers.phase.bins {
            let u = PI - 2.0 * PI * rng.random::<f64>();
            let c = frames.bin(f, k);
            let phi = wrap_phase((1.0 - alpha) * c.arg() + alpha * u);
            *frames.bin_mut(f, k) = Complex64::from_polar(c.norm(), phi);
        }
    }
    Ok(istft(&frames))
}
