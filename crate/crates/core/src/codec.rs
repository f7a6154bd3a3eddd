//! End-to-end embed and blind verification for the hybrid and phase-only modes.
//!
//! Both channels carry the same stream: a 32-bit big-endian header holding the
//! codeword length in bytes, followed by the codeword bits (MSB first). The
//! verifier reads the phase channel first and falls back to the magnitude
//! channel; either success authenticates the clip.

use serde::{Deserialize, Serialize};

use crate::audio::AudioClip;
use crate::bits::{bits_to_bytes, bits_to_u32, hard};
use crate::error::{Error, Result};
use crate::metrics;
use crate::payload::{self, KeyPair, Message};
use crate::pattern::{
    derive_seed, header_layout, mag_pair_pattern, phase_pattern, plan_layout, BinPattern, Channel, PairPattern,
    SlotLayout, HEADER_BITS,
};
use crate::phase::{embed_phase, extract_phase_soft};
use crate::qim::{combine_replicas, embed_mag, extract_mag_soft, QimParams};
use crate::spectral::{istft, stft, SpectralFrames};

/// Smallest plausible codeword: a one-byte message with its frame overhead.
pub const MIN_DECLARED_LEN: usize = 1 + payload::FRAME_OVERHEAD;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Hybrid,
    PhaseOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CodecConfig {
    pub n_fft: usize,
    pub group_size: usize,
    pub phase_band: (usize, usize),
    pub mag_band: (usize, usize),
    pub delta: f64,
    pub epsilon: f64,
    pub max_mag_replicas: usize,
    pub header_copies_phase: usize,
    pub header_copies_mag: usize,
    pub rs_parity: usize,
    pub mode: Mode,
}

impl Default for CodecConfig {
    fn default() -> Self {
        CodecConfig {
            n_fft: 2048,
            group_size: 8,
            phase_band: (60, 300),
            mag_band: (100, 340),
            delta: 1.0,
            epsilon: 1e-10,
            max_mag_replicas: 5,
            header_copies_phase: 1,
            header_copies_mag: 3,
            rs_parity: 30,
            mode: Mode::Hybrid,
        }
    }
}

impl CodecConfig {
    pub fn phase_only() -> Self {
        CodecConfig {
            mode: Mode::PhaseOnly,
            ..Self::default()
        }
    }

    pub fn qim(&self) -> QimParams {
        QimParams {
            delta: self.delta,
            epsilon: self.epsilon,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.n_fft < 4 || !self.n_fft.is_multiple_of(2) {
            return bad("n_fft must be even and at least 4");
        }
        // DC and Nyquist bins are real-valued and cannot carry a phase.
        let top = self.n_fft / 2 - 1;
        for (name, (lo, hi)) in [("phase_band", self.phase_band), ("mag_band", self.mag_band)] {
            if lo < 1 || hi > top || lo >= hi {
                return Err(Error::InvalidConfig(format!("{name} must satisfy 1 <= lo < hi <= {top}")));
            }
        }
        if self.group_size == 0 || self.max_mag_replicas == 0 || self.header_copies_phase == 0 || self.header_copies_mag == 0 {
            return bad("group size, replica cap and header copies must be positive");
        }
        if !(self.delta > 0.0) || !(self.epsilon > 0.0) {
            return bad("delta and epsilon must be positive");
        }
        if self.rs_parity >= 255 - payload::FRAME_OVERHEAD {
            return bad("rs_parity leaves no room for a message");
        }
        Ok(())
    }
}

/// Carrier patterns regenerated from a public key.
#[derive(Debug, Clone)]
pub struct Carriers {
    pub phase: BinPattern,
    pub magnitude: PairPattern,
}

impl Carriers {
    pub fn derive(public_key: &[u8; 32], config: &CodecConfig) -> Result<Self> {
        Ok(Carriers {
            phase: phase_pattern(
                derive_seed(public_key, Channel::Phase),
                config.phase_band.0,
                config.phase_band.1,
            )?,
            magnitude: mag_pair_pattern(
                derive_seed(public_key, Channel::Magnitude),
                config.mag_band.0,
                config.mag_band.1,
            )?,
        })
    }
}

fn layout_for(channel: Channel, num_frames: usize, body_bits: usize, carriers: &Carriers, config: &CodecConfig) -> Result<SlotLayout> {
    match channel {
        Channel::Phase => plan_layout(
            channel,
            num_frames,
            config.group_size,
            carriers.phase.len(),
            body_bits,
            1,
            config.header_copies_phase,
        ),
        Channel::Magnitude => plan_layout(
            channel,
            num_frames,
            config.group_size,
            carriers.magnitude.len(),
            body_bits,
            config.max_mag_replicas,
            config.header_copies_mag,
        ),
    }
}

/// Signs `message`, Reed–Solomon encodes it and embeds the codeword.
pub fn embed(clip: &AudioClip, message: &Message, keypair: &KeyPair, config: &CodecConfig) -> Result<AudioClip> {
    config.validate()?;
    let signed = payload::sign_for_codeword(message, keypair, config.rs_parity)?;
    let codeword = payload::rs_encode(&signed, config.rs_parity)?;
    embed_codeword(clip, codeword.as_bytes(), &keypair.public_key(), config)
}

/// Embeds arbitrary codeword bytes at the carriers of `public_key`.
///
/// This is the raw channel writer: nothing here needs the private key, which
/// is what makes it useful for forgery experiments.
pub fn embed_codeword(clip: &AudioClip, codeword: &[u8], public_key: &[u8; 32], config: &CodecConfig) -> Result<AudioClip> {
    config.validate()?;
    if codeword.is_empty() || codeword.len() > 255 {
        return Err(Error::InvalidConfig(format!("codeword length {} outside 1..=255", codeword.len())));
    }
    let carriers = Carriers::derive(public_key, config)?;
    let mut frames = stft(clip, config.n_fft)?;
    let body = crate::bits::bytes_to_bits(codeword);
    let header = codeword.len() as u32;

    let phase_layout = layout_for(Channel::Phase, frames.num_frames(), body.len(), &carriers, config)?;
    let mag_layout = match config.mode {
        Mode::Hybrid => Some(layout_for(Channel::Magnitude, frames.num_frames(), body.len(), &carriers, config)?),
        Mode::PhaseOnly => None,
    };

    embed_phase(&mut frames, &phase_layout.bitstream(header, &body), &carriers.phase, &phase_layout);
    if let Some(layout) = mag_layout {
        embed_mag(&mut frames, &layout.bitstream(header, &body), &carriers.magnitude, &layout, &config.qim());
    }
    Ok(istft(&frames))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerifiedChannel {
    Phase,
    Magnitude,
    None,
}

impl From<Channel> for VerifiedChannel {
    fn from(c: Channel) -> Self {
        match c {
            Channel::Phase => VerifiedChannel::Phase,
            Channel::Magnitude => VerifiedChannel::Magnitude,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailureStage {
    None,
    Extract,
    RsDecode,
    SigVerify,
}

/// What one channel produced.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelReport {
    pub channel: Channel,
    pub stage: FailureStage,
    /// Hard body bits after replica combining; `None` when the header failed.
    pub body_bits: Option<Vec<u8>>,
    pub message: Option<Vec<u8>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyOutcome {
    pub verified: bool,
    pub channel: VerifiedChannel,
    pub failure_stage: FailureStage,
    #[serde(serialize_with = "ser_hex_opt", deserialize_with = "de_hex_opt")]
    pub message: Option<Vec<u8>>,
    /// Only populated when ground truth was supplied.
    pub ber_phase: Option<f64>,
    pub ber_mag: Option<f64>,
    #[serde(skip)]
    pub reports: Vec<ChannelReport>,
}

fn ser_hex_opt<S: serde::Serializer>(v: &Option<Vec<u8>>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(bytes) => s.serialize_some(&hex::encode(bytes)),
        None => s.serialize_none(),
    }
}

fn de_hex_opt<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Option<Vec<u8>>, D::Error> {
    Option::<String>::deserialize(d)?
        .map(|h| hex::decode(h).map_err(serde::de::Error::custom))
        .transpose()
}

impl VerifyOutcome {
    /// Bits of the channel that decided the outcome: the verifying channel, or
    /// the last one tried.
    pub fn deciding_report(&self) -> Option<&ChannelReport> {
        self.reports.last()
    }

    pub fn message_text(&self) -> Option<String> {
        self.message.as_ref().map(|m| String::from_utf8_lossy(m).into_owned())
    }
}

/// Reusable verifier for one public key; cheap to share across threads.
#[derive(Debug, Clone)]
pub struct Verifier {
    public_key: [u8; 32],
    config: CodecConfig,
    carriers: Carriers,
}

impl Verifier {
    pub fn new(public_key: [u8; 32], config: CodecConfig) -> Result<Self> {
        config.validate()?;
        let carriers = Carriers::derive(&public_key, &config)?;
        Ok(Verifier {
            public_key,
            config,
            carriers,
        })
    }

    pub fn config(&self) -> &CodecConfig {
        &self.config
    }

    pub fn verify(&self, clip: &AudioClip) -> VerifyOutcome {
        self.verify_inner(clip, None)
    }

    /// As [`Verifier::verify`], also scoring each tried channel's body bits
    /// against the embedded codeword bits.
    pub fn verify_with_truth(&self, clip: &AudioClip, truth_bits: &[u8]) -> VerifyOutcome {
        self.verify_inner(clip, Some(truth_bits))
    }

    fn verify_inner(&self, clip: &AudioClip, truth: Option<&[u8]>) -> VerifyOutcome {
        let frames = match stft(clip, self.config.n_fft) {
            Ok(f) => f,
            Err(_) => {
                return VerifyOutcome {
                    verified: false,
                    channel: VerifiedChannel::None,
                    failure_stage: FailureStage::Extract,
                    message: None,
                    ber_phase: truth.map(|_| 1.0),
                    ber_mag: None,
                    reports: Vec::new(),
                }
            }
        };
        let mut channels = vec![Channel::Phase];
        if self.config.mode == Mode::Hybrid {
            channels.push(Channel::Magnitude);
        }

        let mut reports = Vec::new();
        for channel in channels {
            let report = self.decode_channel(&frames, channel);
            let done = report.stage == FailureStage::None;
            reports.push(report);
            if done {
                break;
            }
        }

        let ber_of = |c: Channel| {
            let truth = truth?;
            let r = reports.iter().find(|r| r.channel == c)?;
            Some(match &r.body_bits {
                Some(bits) => metrics::ber(truth, bits),
                None => 1.0,
            })
        };
        let ber_phase = ber_of(Channel::Phase);
        let ber_mag = ber_of(Channel::Magnitude);
        let last = reports.last().expect("phase channel always tried");
        VerifyOutcome {
            verified: last.stage == FailureStage::None,
            channel: if last.stage == FailureStage::None {
                last.channel.into()
            } else {
                VerifiedChannel::None
            },
            failure_stage: last.stage,
            message: last.message.clone(),
            ber_phase,
            ber_mag,
            reports,
        }
    }

    fn soft(&self, frames: &SpectralFrames, channel: Channel, layout: &SlotLayout, count: usize) -> Vec<f64> {
        match channel {
            Channel::Phase => extract_phase_soft(frames, &self.carriers.phase, layout, count),
            Channel::Magnitude => extract_mag_soft(frames, &self.carriers.magnitude, layout, &self.config.qim(), count),
        }
    }

    /// Header, then body, then Reed–Solomon, then signature.
    pub fn decode_channel(&self, frames: &SpectralFrames, channel: Channel) -> ChannelReport {
        let fail = |stage, body_bits| ChannelReport {
            channel,
            stage,
            body_bits,
            message: None,
        };
        let (pattern_len, copies) = match channel {
            Channel::Phase => (self.carriers.phase.len(), self.config.header_copies_phase),
            Channel::Magnitude => (self.carriers.magnitude.len(), self.config.header_copies_mag),
        };
        let hl = header_layout(frames.num_frames(), self.config.group_size, pattern_len, copies);
        let header_soft = self.soft(frames, channel, &hl, hl.header_slots());
        if header_soft.len() < hl.header_slots() {
            return fail(FailureStage::Extract, None);
        }
        let header: Vec<u8> = (0..HEADER_BITS)
            .map(|b| hard((0..copies).map(|c| header_soft[hl.header_slot(c, b)]).sum()))
            .collect();
        let declared = bits_to_u32(&header) as usize;
        if !(MIN_DECLARED_LEN..=255).contains(&declared) {
            return fail(FailureStage::Extract, None);
        }
        let layout = match layout_for(channel, frames.num_frames(), declared * 8, &self.carriers, &self.config) {
            Ok(l) => l,
            Err(_) => return fail(FailureStage::Extract, None),
        };
        let soft = self.soft(frames, channel, &layout, layout.used_slots());
        let (_, body_soft) = combine_replicas(&soft, &layout);
        let body_bits: Vec<u8> = body_soft.iter().map(|&s| hard(s)).collect();
        let codeword = bits_to_bytes(&body_bits);

        let signed = match payload::rs_decode(&codeword, self.config.rs_parity) {
            Ok(p) => p,
            Err(_) => return fail(FailureStage::RsDecode, Some(body_bits)),
        };
        match payload::parse_and_verify(&signed, &self.public_key) {
            Ok(m) => ChannelReport {
                channel,
                stage: FailureStage::None,
                body_bits: Some(body_bits),
                message: Some(m.as_bytes().to_vec()),
            },
            Err(_) => fail(FailureStage::SigVerify, Some(body_bits)),
        }
    }
}

/// Blind verification from audio and public key alone.
pub fn extract_verify(clip: &AudioClip, public_key: &[u8; 32], config: &CodecConfig) -> Result<VerifyOutcome> {
    Ok(Verifier::new(*public_key, config.clone())?.verify(clip))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelCapacity {
    pub slots: usize,
    pub header_slots: usize,
    /// Replicas for the reference message, when it fits.
    pub replicas: Option<usize>,
    pub max_message_bytes: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacityReport {
    pub samples: usize,
    pub frames: usize,
    pub message_bytes: usize,
    pub codeword_bytes: usize,
    pub phase: ChannelCapacity,
    pub magnitude: Option<ChannelCapacity>,
    /// Largest message every active channel can carry.
    pub max_message_bytes: Option<usize>,
    /// Signed-payload rate before Reed–Solomon parity, for the reference message.
    pub payload_bps: f64,
}

/// Slot arithmetic for a clip length, without touching audio.
pub fn capacity_report(clip_length: usize, sample_rate: u32, message_bytes: usize, config: &CodecConfig) -> Result<CapacityReport> {
    config.validate()?;
    let frames = clip_length / config.n_fft;
    let groups = frames / config.group_size;
    let codeword_bytes = message_bytes + payload::FRAME_OVERHEAD + config.rs_parity;
    let phase_pattern = config.phase_band.1 - config.phase_band.0 + 1;
    let mag_pairs = (config.mag_band.1 - config.mag_band.0).div_ceil(2);
    let max_msg = payload::max_message_len(config.rs_parity);

    let channel = |channel: Channel, pattern: usize, copies: usize, cap: usize| {
        let slots = groups * pattern;
        let header_slots = copies * HEADER_BITS;
        let replicas = plan_layout(channel, frames, config.group_size, pattern, codeword_bytes * 8, cap, copies)
            .ok()
            .map(|l| l.replicas);
        let room = slots.saturating_sub(header_slots) / 8;
        let max_message_bytes = room
            .checked_sub(payload::FRAME_OVERHEAD + config.rs_parity)
            .filter(|&m| m >= 1)
            .map(|m| m.min(max_msg));
        ChannelCapacity {
            slots,
            header_slots,
            replicas,
            max_message_bytes,
        }
    };
    let phase = channel(Channel::Phase, phase_pattern, config.header_copies_phase, 1);
    let magnitude = (config.mode == Mode::Hybrid)
        .then(|| channel(Channel::Magnitude, mag_pairs, config.header_copies_mag, config.max_mag_replicas));
    let max_message_bytes = match &magnitude {
        Some(m) => phase.max_message_bytes.zip(m.max_message_bytes).map(|(a, b)| a.min(b)),
        None => phase.max_message_bytes,
    };
    let seconds = clip_length as f64 / sample_rate as f64;
    Ok(CapacityReport {
        samples: clip_length,
        frames,
        message_bytes,
        codeword_bytes,
        phase,
        magnitude,
        max_message_bytes,
        payload_bps: (message_bytes + payload::FRAME_OVERHEAD) as f64 * 8.0 / seconds,
    })
}
