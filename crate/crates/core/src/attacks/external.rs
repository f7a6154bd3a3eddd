//! Lossy/lossless codec round trips through an external encoder process.
//!
//! Argument lists are fixed templates so that results are reproducible and
//! can be recorded alongside benchmark output. `{input}`, `{output}` and
//! `{rate}` are substituted at run time.

use std::io::ErrorKind;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde::{Deserialize, Serialize};

use crate::audio::AudioClip;
use crate::error::{Error, Result};

pub const DEFAULT_TOOL: &str = "ffmpeg";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExternalCodec {
    /// Short label, e.g. `mp3_128k`.
    pub name: String,
    /// Extension of the intermediate compressed file.
    pub extension: String,
    pub encode_args: Vec<String>,
    pub decode_args: Vec<String>,
}

fn args(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

fn encode_with(codec_args: &[&str]) -> Vec<String> {
    let mut v = args(&["-hide_banner", "-loglevel", "error", "-nostdin", "-y", "-i", "{input}"]);
    v.extend(args(codec_args));
    v.push("{output}".into());
    v
}

fn decode_to_pcm() -> Vec<String> {
    args(&[
        "-hide_banner", "-loglevel", "error", "-nostdin", "-y", "-i", "{input}", "-ac", "1", "-ar", "{rate}",
        "-c:a", "pcm_s16le", "{output}",
    ])
}

impl ExternalCodec {
    pub fn mp3(kbps: u32) -> Self {
        ExternalCodec {
            name: format!("mp3_{kbps}k"),
            extension: "mp3".into(),
            encode_args: encode_with(&["-c:a", "libmp3lame", "-b:a", &format!("{kbps}k")]),
            decode_args: decode_to_pcm(),
        }
    }

    pub fn ogg(kbps: u32) -> Self {
        ExternalCodec {
            name: format!("ogg_{kbps}k"),
            extension: "ogg".into(),
            encode_args: encode_with(&["-c:a", "libvorbis", "-b:a", &format!("{kbps}k")]),
            decode_args: decode_to_pcm(),
        }
    }

    pub fn flac() -> Self {
        ExternalCodec {
            name: "flac".into(),
            extension: "flac".into(),
            encode_args: encode_with(&["-c:a", "flac"]),
            decode_args: decode_to_pcm(),
        }
    }
}

fn substitute(template: &[String], input: &Path, output: &Path, rate: u32) -> Vec<String> {
    template
        .iter()
        .map(|a| {
            a.replace("{input}", &input.to_string_lossy())
                .replace("{output}", &output.to_string_lossy())
                .replace("{rate}", &rate.to_string())
        })
        .collect()
}

fn run(tool: &Path, argv: &[String]) -> Result<()> {
    let out = Command::new(tool).args(argv).output().map_err(|e| match e.kind() {
        ErrorKind::NotFound | ErrorKind::PermissionDenied => Error::ExternalToolUnavailable(tool.display().to_string()),
        _ => Error::io(tool, e),
    })?;
    if !out.status.success() {
        return Err(Error::ExternalToolFailed {
            tool: tool.display().to_string(),
            status: out.status.to_string(),
            stderr: String::from_utf8_lossy(&out.stderr).trim().to_string(),
        });
    }
    Ok(())
}

/// Whether `tool` can be spawned at all.
pub fn tool_available(tool: &Path) -> bool {
    Command::new(tool)
        .arg("-version")
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

pub fn default_tool() -> PathBuf {
    PathBuf::from(DEFAULT_TOOL)
}

/// Encodes `clip` as 16-bit WAV, round-trips it through `codec`, and reads
/// the result back, trimmed or zero-padded to the original length.
pub fn codec_round_trip(clip: &AudioClip, codec: &ExternalCodec, tool: &Path) -> Result<AudioClip> {
    let dir = tempfile::tempdir().map_err(|e| Error::io(std::env::temp_dir(), e))?;
    let src = dir.path().join("input.wav");
    let enc = dir.path().join(format!("encoded.{}", codec.extension));
    let dst = dir.path().join("decoded.wav");
    clip.write_wav(&src)?;
    run(tool, &substitute(&codec.encode_args, &src, &enc, clip.sample_rate()))?;
    run(tool, &substitute(&codec.decode_args, &enc, &dst, clip.sample_rate()))?;
    let decoded = AudioClip::read_wav(&dst)?;
    if decoded.sample_rate() != clip.sample_rate() {
        return Err(Error::InvalidAudio(format!(
            "decoder produced {} Hz, expected {} Hz",
            decoded.sample_rate(),
            clip.sample_rate()
        )));
    }
    let mut samples = decoded.into_samples();
    samples.resize(clip.len(), 0.0);
    AudioClip::new(samples, clip.sample_rate())
}
