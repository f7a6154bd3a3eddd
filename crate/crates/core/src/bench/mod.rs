//! Clip × attack robustness sweeps.
//!
//! [`run_benchmark`] embeds a fixed signed message once per host, applies
//! every configured attack to the watermarked clip, verifies, and scores the
//! result. Cells run on a work-stealing pool but are gathered in
//! (clip, attack) order, so the results envelope is byte-identical across
//! runs and worker counts. Anything run-specific (timestamps, worker count)
//! lives only in the meta envelope.

mod erasure;
mod export;
mod stats;

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attacks::{self, tool_available, AttackEnv, AttackSpec, ExternalCodec};
use crate::audio::AudioClip;
use crate::codec::{self, Carriers, CodecConfig, VerifiedChannel, Verifier};
use crate::error::{Error, Result};
use crate::hosts::synthetic_host;
use crate::metrics::ClipMetrics;
use crate::payload::{self, KeyPair, Message};

pub use erasure::{erasure_sweep, write_erasure_table, ErasureRow, ErasureTable, DEFAULT_ALPHAS};
pub use export::{write_atomic, write_json};
pub use stats::{bootstrap_ci, mean, median, std_dev, Stat, DEFAULT_RESAMPLES};

pub const META_ENVELOPE: &str = "benchmark_meta_envelope.json";
pub const RESULTS_ENVELOPE: &str = "benchmark_results_envelope.json";
pub const META_SCHEMA: &str = "sigmark.bench.meta/1";
pub const RESULTS_SCHEMA: &str = "sigmark.bench.results/1";

/// The fixed 49-byte benchmark message.
pub const DEFAULT_MESSAGE: &str = "sigmark benchmark payload : fixed 49-byte message";
pub const DEFAULT_SAMPLE_SEED: u64 = 42;
pub const DEFAULT_KEY_SEED: &str = "2a2a2a2a2a2a2a2a2a2a2a2a2a2a2a2a2a2a2a2a2a2a2a2a2a2a2a2a2a2a2a2a";

/// Where host clips come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum HostSource {
    /// 16-bit mono WAV files in a directory; `clips` of them are sampled
    /// with `sample_seed` when there are more.
    Directory { path: PathBuf },
    /// Generated noise hosts, index `0..clips`.
    Synthetic { seconds: f64, sample_rate: u32, seed: u64 },
}

impl Default for HostSource {
    fn default() -> Self {
        HostSource::Synthetic {
            seconds: 10.0,
            sample_rate: crate::audio::DEFAULT_SAMPLE_RATE,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    pub hosts: HostSource,
    /// Number of clips N.
    pub clips: usize,
    pub sample_seed: u64,
    pub attacks: Vec<AttackSpec>,
    pub codec: CodecConfig,
    /// Hex Ed25519 seed; ignored when `private_key` is set.
    pub key_seed: String,
    /// Raw 32-byte private key file.
    pub private_key: Option<PathBuf>,
    pub message: String,
    /// Worker threads; 0 uses every available core.
    pub workers: usize,
    pub output_dir: Option<PathBuf>,
    /// External codec executable.
    pub tool: PathBuf,
    pub bootstrap_resamples: usize,
    pub bootstrap_seed: u64,
    pub erasure_alphas: Vec<f64>,
    pub erasure_clips: usize,
    pub erasure_seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            hosts: HostSource::default(),
            clips: 100,
            sample_seed: DEFAULT_SAMPLE_SEED,
            attacks: AttackSpec::default_suite(),
            codec: CodecConfig::default(),
            key_seed: DEFAULT_KEY_SEED.into(),
            private_key: None,
            message: DEFAULT_MESSAGE.into(),
            workers: 0,
            output_dir: None,
            tool: attacks::default_tool(),
            bootstrap_resamples: DEFAULT_RESAMPLES,
            bootstrap_seed: 1,
            erasure_alphas: DEFAULT_ALPHAS.to_vec(),
            erasure_clips: 100,
            erasure_seed: 2,
        }
    }
}

impl BenchConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let config: BenchConfig = serde_json::from_str(&text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.into()));
        if self.clips == 0 {
            return bad("clips must be at least 1");
        }
        if self.bootstrap_resamples == 0 {
            return bad("bootstrap_resamples must be at least 1");
        }
        if self.attacks.is_empty() {
            return bad("at least one attack is required");
        }
        if let HostSource::Synthetic { seconds, sample_rate, .. } = &self.hosts {
            if !(*seconds > 0.0) || *sample_rate == 0 {
                return bad("synthetic hosts need positive duration and sample rate");
            }
        }
        if self.erasure_alphas.iter().any(|a| !(0.0..=1.0).contains(a)) {
            return bad("erasure alphas must lie in [0, 1]");
        }
        self.codec.validate()?;
        self.attacks.iter().try_for_each(AttackSpec::validate)?;
        Message::new(self.message.as_bytes().to_vec())?;
        if self.message.len() > payload::max_message_len(self.codec.rs_parity) {
            return Err(Error::MessageLength {
                len: self.message.len(),
                max: payload::max_message_len(self.codec.rs_parity),
            });
        }
        Ok(())
    }

    pub fn keypair(&self) -> Result<KeyPair> {
        match &self.private_key {
            Some(path) => KeyPair::read_private(path),
            None => {
                let seed = hex::decode(self.key_seed.trim())
                    .map_err(|e| Error::InvalidConfig(format!("key_seed is not hex: {e}")))?;
                KeyPair::generate(Some(&seed))
            }
        }
    }
}

/// One selected host.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HostRef {
    pub id: String,
    /// File path, or a `synthetic:<seed>:<index>` descriptor.
    pub source: String,
    path: Option<PathBuf>,
    index: u64,
}

impl HostRef {
    fn load(&self, hosts: &HostSource) -> Result<AudioClip> {
        match (hosts, &self.path) {
            (_, Some(path)) => AudioClip::read_wav(path),
            (HostSource::Synthetic { seconds, sample_rate, seed }, None) => {
                Ok(synthetic_host(*seconds, *sample_rate, *seed, self.index))
            }
            (HostSource::Directory { .. }, None) => unreachable!("directory hosts always have a path"),
        }
    }
}

/// The `count` hosts a run will use, in evaluation order.
pub fn select_hosts(hosts: &HostSource, count: usize, sample_seed: u64) -> Result<Vec<HostRef>> {
    match hosts {
        HostSource::Synthetic { seed, .. } => Ok((0..count as u64)
            .map(|i| HostRef {
                id: format!("synthetic_{i:04}"),
                source: format!("synthetic:{seed}:{i}"),
                path: None,
                index: i,
            })
            .collect()),
        HostSource::Directory { path } => {
            let entries = std::fs::read_dir(path).map_err(|e| Error::io(path, e))?;
            let mut files = Vec::new();
            for entry in entries {
                let p = entry.map_err(|e| Error::io(path, e))?.path();
                let is_wav = p.extension().is_some_and(|e| e.eq_ignore_ascii_case("wav"));
                if is_wav && p.is_file() {
                    files.push(p);
                }
            }
            if files.is_empty() {
                return Err(Error::InvalidConfig(format!("no .wav files in {}", path.display())));
            }
            files.sort();
            let chosen: Vec<usize> = if files.len() > count {
                let mut rng = ChaCha8Rng::seed_from_u64(sample_seed);
                let mut idx = rand::seq::index::sample(&mut rng, files.len(), count).into_vec();
                idx.sort_unstable();
                idx
            } else {
                (0..files.len()).collect()
            };
            Ok(chosen
                .into_iter()
                .map(|i| {
                    let p = &files[i];
                    HostRef {
                        id: p.file_stem().unwrap_or_default().to_string_lossy().into_owned(),
                        source: p.display().to_string(),
                        path: Some(p.clone()),
                        index: i as u64,
                    }
                })
                .collect())
        }
    }
}

/// Outcome of one (clip, attack) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub clip_id: String,
    pub attack: String,
    /// Why the cell was not evaluated (for example a missing codec tool).
    pub skipped: Option<String>,
    pub metrics: Option<ClipMetrics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackSummary {
    pub attack: String,
    /// Evaluated cells.
    pub clips: usize,
    pub skipped: usize,
    pub verified: usize,
    pub verified_phase: usize,
    pub verified_magnitude: usize,
    pub verify_pct: Option<f64>,
    pub phase_pct: Option<f64>,
    pub magnitude_pct: Option<f64>,
    pub ber: Option<Stat>,
    pub nc: Option<Stat>,
    pub lsd_mean: Option<f64>,
    pub snr_mean: Option<f64>,
}

impl AttackSummary {
    fn from_records(attack: &str, records: &[&CellRecord], resamples: usize, seed: u64) -> Self {
        let done: Vec<&ClipMetrics> = records.iter().filter_map(|r| r.metrics.as_ref()).collect();
        let n = done.len();
        let count = |c: VerifiedChannel| done.iter().filter(|m| m.verified && m.channel == c).count();
        let verified = done.iter().filter(|m| m.verified).count();
        let pct = |k: usize| (n > 0).then(|| 100.0 * k as f64 / n as f64);
        let col = |f: fn(&ClipMetrics) -> f64| done.iter().map(|m| f(m)).collect::<Vec<f64>>();
        let (ber, nc, lsd, snr) = (col(|m| m.ber), col(|m| m.nc), col(|m| m.lsd), col(|m| m.snr));
        AttackSummary {
            attack: attack.to_string(),
            clips: n,
            skipped: records.len() - n,
            verified,
            verified_phase: count(VerifiedChannel::Phase),
            verified_magnitude: count(VerifiedChannel::Magnitude),
            verify_pct: pct(verified),
            phase_pct: pct(count(VerifiedChannel::Phase)),
            magnitude_pct: pct(count(VerifiedChannel::Magnitude)),
            ber: Stat::of(&ber, resamples, seed),
            nc: Stat::of(&nc, resamples, seed),
            lsd_mean: (n > 0).then(|| mean(&lsd)),
            snr_mean: (n > 0).then(|| mean(&snr)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsEnvelope {
    pub schema: String,
    pub public_key: String,
    pub attacks: Vec<String>,
    /// Evaluated clips, in record order.
    pub clips: Vec<String>,
    pub skipped_clips: Vec<String>,
    pub records: Vec<CellRecord>,
    pub summaries: Vec<AttackSummary>,
}

impl ResultsEnvelope {
    pub fn summary(&self, attack: &str) -> Option<&AttackSummary> {
        self.summaries.iter().find(|s| s.attack == attack)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn to_json_bytes(&self) -> Result<Vec<u8>> {
        export::json_bytes(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExternalToolInfo {
    pub tool: String,
    pub available: bool,
    /// Argument templates of every external-codec attack.
    pub codecs: Vec<ExternalCodec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivedParameters {
    pub phase_bins: usize,
    pub magnitude_pairs: usize,
    pub message_bytes: usize,
    pub codeword_bytes: usize,
    pub codeword_bits: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaEnvelope {
    pub schema: String,
    pub created_unix_secs: u64,
    pub library: String,
    pub library_version: String,
    pub workers: usize,
    pub config: BenchConfig,
    pub public_key: String,
    pub message_hex: String,
    pub parameters: DerivedParameters,
    pub external: ExternalToolInfo,
    pub clip_sources: Vec<String>,
    pub skipped_clip_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchOutput {
    pub meta: MetaEnvelope,
    pub results: ResultsEnvelope,
}

pub(crate) fn thread_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start worker pool: {e}")))
}

/// A host after embedding, or the reason it was skipped.
pub(crate) enum Prepared {
    Marked { original: AudioClip, marked: AudioClip },
    TooShort,
}

/// Embeds `codeword` and quantises to 16-bit PCM, as a release pipeline
/// would before distribution.
pub(crate) fn prepare_host(
    host: &HostRef,
    source: &HostSource,
    codeword: &[u8],
    public_key: &[u8; 32],
    config: &CodecConfig,
) -> Result<Prepared> {
    let original = host.load(source)?;
    match codec::embed_codeword(&original, codeword, public_key, config) {
        Ok(marked) => Ok(Prepared::Marked {
            marked: marked.quantize_pcm16(),
            original,
        }),
        Err(Error::HostTooShort { .. }) => Ok(Prepared::TooShort),
        Err(e) => Err(e),
    }
}

/// Runs the sweep, writes envelopes and CSV tables into `output_dir` when
/// configured, and returns both envelopes.
pub fn run_benchmark(config: &BenchConfig) -> Result<BenchOutput> {
    config.validate()?;
    let key = config.keypair()?;
    let pk = key.public_key();
    let message = Message::new(config.message.as_bytes().to_vec())?;
    let signed = payload::sign_for_codeword(&message, &key, config.codec.rs_parity)?;
    let codeword = payload::rs_encode(&signed, config.codec.rs_parity)?;
    let truth = codeword.bits();
    let verifier = Verifier::new(pk, config.codec.clone())?;

    let hosts = select_hosts(&config.hosts, config.clips, config.sample_seed)?;
    let external: Vec<ExternalCodec> = config
        .attacks
        .iter()
        .filter_map(|a| match a {
            AttackSpec::ExternalCodec(c) => Some(c.clone()),
            _ => None,
        })
        .collect();
    let tool_ok = !external.is_empty() && tool_available(&config.tool);
    let env = AttackEnv {
        public_key: Some(pk),
        codec: config.codec.clone(),
        tool: config.tool.clone(),
    };

    let pool = thread_pool(config.workers)?;
    let workers = pool.current_num_threads();
    let (prepared, records) = pool.install(|| -> Result<_> {
        let prepared: Vec<Prepared> = hosts
            .par_iter()
            .map(|h| prepare_host(h, &config.hosts, codeword.as_bytes(), &pk, &config.codec))
            .collect::<Result<_>>()?;
        let cells: Vec<(usize, usize)> = prepared
            .iter()
            .enumerate()
            .filter(|(_, p)| matches!(p, Prepared::Marked { .. }))
            .flat_map(|(c, _)| (0..config.attacks.len()).map(move |a| (c, a)))
            .collect();
        let records: Vec<CellRecord> = cells
            .par_iter()
            .map(|&(c, a)| {
                let Prepared::Marked { marked, .. } = &prepared[c] else {
                    unreachable!("cells are built from marked hosts")
                };
                let spec = &config.attacks[a];
                let record = |skipped, metrics| CellRecord {
                    clip_id: hosts[c].id.clone(),
                    attack: spec.name(),
                    skipped,
                    metrics,
                };
                if spec.is_external() && !tool_ok {
                    return Ok(record(Some(format!("{} unavailable", config.tool.display())), None));
                }
                let attacked = match attacks::apply(marked, spec, &env) {
                    Ok(a) => a,
                    Err(e @ (Error::ExternalToolUnavailable(_) | Error::ExternalToolFailed { .. })) => {
                        return Ok(record(Some(e.to_string()), None))
                    }
                    Err(e) => return Err(e),
                };
                let outcome = verifier.verify_with_truth(&attacked, &truth);
                let m = ClipMetrics::evaluate(marked, &attacked, &outcome, &truth, config.codec.n_fft);
                Ok(record(None, Some(m)))
            })
            .collect::<Result<_>>()?;
        Ok((prepared, records))
    })?;

    let (evaluated, skipped): (Vec<_>, Vec<_>) =
        hosts.iter().zip(&prepared).partition(|(_, p)| matches!(p, Prepared::Marked { .. }));
    let names: Vec<String> = config.attacks.iter().map(AttackSpec::name).collect();
    let summaries = names
        .iter()
        .map(|name| {
            let rs: Vec<&CellRecord> = records.iter().filter(|r| &r.attack == name).collect();
            AttackSummary::from_records(name, &rs, config.bootstrap_resamples, config.bootstrap_seed)
        })
        .collect();
    let results = ResultsEnvelope {
        schema: RESULTS_SCHEMA.into(),
        public_key: hex::encode(pk),
        attacks: names,
        clips: evaluated.iter().map(|(h, _)| h.id.clone()).collect(),
        skipped_clips: skipped.iter().map(|(h, _)| h.id.clone()).collect(),
        records,
        summaries,
    };

    let carriers = Carriers::derive(&pk, &config.codec)?;
    let meta = MetaEnvelope {
        schema: META_SCHEMA.into(),
        created_unix_secs: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        library: env!("CARGO_PKG_NAME").into(),
        library_version: env!("CARGO_PKG_VERSION").into(),
        workers,
        config: config.clone(),
        public_key: hex::encode(pk),
        message_hex: hex::encode(message.as_bytes()),
        parameters: DerivedParameters {
            phase_bins: carriers.phase.len(),
            magnitude_pairs: carriers.magnitude.len(),
            message_bytes: message.len(),
            codeword_bytes: codeword.len(),
            codeword_bits: truth.len(),
        },
        external: ExternalToolInfo {
            tool: config.tool.display().to_string(),
            available: tool_ok,
            codecs: external,
        },
        clip_sources: hosts.iter().map(|h| h.source.clone()).collect(),
        skipped_clip_count: results.skipped_clips.len(),
    };

    let out = BenchOutput { meta, results };
    if let Some(dir) = &config.output_dir {
        write_outputs(dir, &out)?;
    }
    Ok(out)
}

/// Envelopes plus the CSV tables behind the usual figures.
pub fn write_outputs(dir: &Path, out: &BenchOutput) -> Result<()> {
    use export::{opt, write_csv};
    let r = &out.results;
    write_json(&dir.join(META_ENVELOPE), &out.meta)?;
    write_json(&dir.join(RESULTS_ENVELOPE), r)?;

    let header = |cols: &[&str]| cols.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    let rows = r
        .summaries
        .iter()
        .map(|s| {
            vec![
                s.attack.clone(),
                s.clips.to_string(),
                s.skipped.to_string(),
                s.verified.to_string(),
                opt(s.verify_pct),
                opt(s.phase_pct),
                opt(s.magnitude_pct),
            ]
        })
        .collect::<Vec<_>>();
    write_csv(
        &dir.join("verify_rate.csv"),
        &header(&["attack", "clips", "skipped", "verified", "verify_pct", "phase_pct", "magnitude_pct"]),
        &rows,
    )?;

    let rows = r
        .summaries
        .iter()
        .map(|s| vec![s.attack.clone(), opt(s.lsd_mean), opt(s.snr_mean)])
        .collect::<Vec<_>>();
    write_csv(&dir.join("lsd_per_attack.csv"), &header(&["attack", "lsd_mean", "snr_mean"]), &rows)?;

    let rows = r
        .summaries
        .iter()
        .map(|s| {
            let nc = s.nc.as_ref();
            vec![
                s.attack.clone(),
                opt(nc.map(|n| n.mean)),
                opt(nc.map(|n| n.ci_low)),
                opt(nc.map(|n| n.ci_high)),
            ]
        })
        .collect::<Vec<_>>();
    write_csv(&dir.join("nc_radar.csv"), &header(&["attack", "nc_mean", "nc_ci_low", "nc_ci_high"]), &rows)?;

    let mut cols = vec!["clip_id".to_string()];
    cols.extend(r.attacks.iter().cloned());
    let rows = r
        .clips
        .iter()
        .map(|clip| {
            let mut row = vec![clip.clone()];
            row.extend(r.attacks.iter().map(|a| {
                let m = r.records.iter().find(|x| &x.clip_id == clip && &x.attack == a);
                opt(m.and_then(|x| x.metrics.as_ref()).map(|m| m.ber))
            }));
            row
        })
        .collect::<Vec<_>>();
    write_csv(&dir.join("ber_heatmap.csv"), &cols, &rows)
}
