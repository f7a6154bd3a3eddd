//! `sigmark` command-line tool.
//!
//! Exit codes form the machine interface: 0 success (for `verify` and
//! `extract`: verified), 1 verification failed, 2 usage or invalid input,
//! 3 I/O, 4 host too short (including `capacity` when the message does not
//! fit), 5 external tool unavailable, 6 other failures.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sigmark::attacks::{self, AttackEnv, AttackSpec, ExternalCodec};
use sigmark::bench::{self, BenchConfig};
use sigmark::payload::read_public_key;
use sigmark::{AudioClip, CodecConfig, Error, KeyPair, Message};

mod exit {
    pub const VERIFY_FAILED: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const IO: u8 = 3;
    pub const HOST_TOO_SHORT: u8 = 4;
    pub const TOOL_UNAVAILABLE: u8 = 5;
    pub const OTHER: u8 = 6;
}

#[derive(Parser)]
#[command(name = "sigmark", version, about = "Signed, keyed audio watermarking")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an Ed25519 key pair (PREFIX.sk, PREFIX.pk and hex copies).
    Keygen {
        #[arg(long)]
        out_prefix: PathBuf,
        /// 32-byte seed as 64 hex characters, for reproducible keys.
        #[arg(long)]
        seed: Option<String>,
    },
    /// Sign a message and embed it into a 16-bit mono WAV file.
    Embed {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long = "out")]
        output: PathBuf,
        /// Private key file (.sk).
        #[arg(long)]
        key: PathBuf,
        #[command(flatten)]
        message: MessageArgs,
        #[arg(long, value_enum, default_value_t = ModeArg::Hybrid)]
        mode: ModeArg,
    },
    /// Verify a watermark; exits 0 only when it verifies.
    Verify(VerifyArgs),
    /// Verify and write the recovered message.
    Extract {
        #[command(flatten)]
        verify: VerifyArgs,
        /// Write the message here instead of standard output.
        #[arg(long)]
        message_out: Option<PathBuf>,
    },
    /// Apply one attack to a WAV file.
    Attack(AttackArgs),
    /// Run a clip × attack benchmark described by a JSON config.
    Bench {
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        overrides: BenchOverrides,
    },
    /// Phase-erasure strength sweep with the phase-only codec.
    ErasureSweep {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Comma-separated strengths in [0, 1].
        #[arg(long, value_delimiter = ',')]
        alphas: Option<Vec<f64>>,
        #[command(flatten)]
        overrides: BenchOverrides,
    },
    /// Report embedding capacity for a clip length.
    Capacity {
        #[arg(long)]
        seconds: f64,
        #[arg(long, default_value_t = 44_100)]
        rate: u32,
        #[arg(long, default_value_t = 49)]
        message_bytes: usize,
        #[arg(long, value_enum, default_value_t = ModeArg::Hybrid)]
        mode: ModeArg,
    },
    /// Write seeded synthetic noise hosts.
    GenHosts {
        #[arg(long)]
        count: usize,
        #[arg(long = "out")]
        output: PathBuf,
        #[arg(long, default_value_t = 10.0)]
        seconds: f64,
        #[arg(long, default_value_t = 44_100)]
        rate: u32,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Hybrid,
    PhaseOnly,
}

impl ModeArg {
    fn config(self) -> CodecConfig {
        match self {
            ModeArg::Hybrid => CodecConfig::default(),
            ModeArg::PhaseOnly => CodecConfig::phase_only(),
        }
    }
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct MessageArgs {
    /// File whose bytes are the message.
    #[arg(long)]
    message_file: Option<PathBuf>,
    /// Message given inline as UTF-8 text.
    #[arg(long)]
    message: Option<String>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Public key file (.pk).
    #[arg(long)]
    pubkey: PathBuf,
    /// Print the outcome as JSON on standard output.
    #[arg(long)]
    json: bool,
    #[arg(long, value_enum, default_value_t = ModeArg::Hybrid)]
    mode: ModeArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum AttackKind {
    Identity,
    CropTail,
    Lowpass,
    Resample,
    Mp3,
    Ogg,
    Flac,
    ErasurePhase,
}

#[derive(Args)]
struct AttackArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long = "out")]
    output: PathBuf,
    #[arg(long = "type", value_enum)]
    kind: AttackKind,
    /// Fraction of samples zeroed at the end (crop-tail).
    #[arg(long, default_value_t = 0.1)]
    fraction: f64,
    /// Cutoff in Hz (lowpass).
    #[arg(long, default_value_t = 8000.0)]
    cutoff: f64,
    /// Filter order (lowpass).
    #[arg(long, default_value_t = 4)]
    order: usize,
    /// Intermediate rate in Hz (resample).
    #[arg(long, default_value_t = 16_000)]
    rate: u32,
    /// Bit rate in kbit/s (mp3, ogg).
    #[arg(long, default_value_t = 128)]
    bitrate: u32,
    /// External encoder executable (mp3, ogg, flac).
    #[arg(long, default_value = attacks::DEFAULT_TOOL)]
    tool: PathBuf,
    /// Erasure strength in [0, 1] (erasure-phase).
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    /// Generator seed (erasure-phase).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Public key whose carriers are erased (erasure-phase).
    #[arg(long)]
    pubkey: Option<PathBuf>,
}

impl AttackArgs {
    fn spec(&self) -> AttackSpec {
        match self.kind {
            AttackKind::Identity => AttackSpec::Identity,
            AttackKind::CropTail => AttackSpec::CropTail { fraction: self.fraction },
            AttackKind::Lowpass => AttackSpec::Lowpass {
                cutoff_hz: self.cutoff,
                order: self.order,
            },
            AttackKind::Resample => AttackSpec::ResampleRoundTrip { intermediate_hz: self.rate },
            AttackKind::Mp3 => AttackSpec::ExternalCodec(ExternalCodec::mp3(self.bitrate)),
            AttackKind::Ogg => AttackSpec::ExternalCodec(ExternalCodec::ogg(self.bitrate)),
            AttackKind::Flac => AttackSpec::ExternalCodec(ExternalCodec::flac()),
            AttackKind::ErasurePhase => AttackSpec::ErasurePhase {
                alpha: self.alpha,
                seed: self.seed,
            },
        }
    }
}

/// Flags that override values from a benchmark config file.
#[derive(Args)]
struct BenchOverrides {
    #[arg(long)]
    clips: Option<usize>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Directory of WAV hosts instead of the configured source.
    #[arg(long)]
    input_dir: Option<PathBuf>,
    #[arg(long)]
    tool: Option<PathBuf>,
}

impl BenchOverrides {
    fn load(&self, path: Option<&Path>) -> sigmark::Result<BenchConfig> {
        let mut c = match path {
            Some(p) => BenchConfig::load(p)?,
            None => BenchConfig::default(),
        };
        if let Some(v) = self.clips {
            c.clips = v;
        }
        if let Some(v) = self.workers {
            c.workers = v;
        }
        if let Some(v) = &self.output_dir {
            c.output_dir = Some(v.clone());
        }
        if let Some(v) = &self.input_dir {
            c.hosts = bench::HostSource::Directory { path: v.clone() };
        }
        if let Some(v) = &self.tool {
            c.tool = v.clone();
        }
        c.validate()?;
        Ok(c)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io { .. } | Error::Wav(_) => exit::IO,
        Error::HostTooShort { .. } => exit::HOST_TOO_SHORT,
        Error::ExternalToolUnavailable(_) => exit::TOOL_UNAVAILABLE,
        Error::SeedLength(_)
        | Error::PublicKeyLength(_)
        | Error::InvalidPublicKey
        | Error::MessageLength { .. }
        | Error::PayloadTooLong { .. }
        | Error::InvalidRange { .. }
        | Error::InvalidConfig(_)
        | Error::InvalidAudio(_)
        | Error::Json(_) => exit::USAGE,
        _ => exit::OTHER,
    }
}

fn distinct_output(input: &Path, output: &Path) -> sigmark::Result<()> {
    let same = match (input.canonicalize(), output.canonicalize()) {
        (Ok(a), Ok(b)) => a == b,
        _ => input == output,
    };
    if same {
        return Err(Error::InvalidConfig("output must differ from input; inputs are never modified".into()));
    }
    Ok(())
}

fn print_json<T: serde::Serialize>(value: &T) -> sigmark::Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn verify(args: &VerifyArgs) -> sigmark::Result<sigmark::VerifyOutcome> {
    let pk = read_public_key(&args.pubkey)?;
    let clip = AudioClip::read_wav(&args.input)?;
    let outcome = sigmark::extract_verify(&clip, &pk, &args.mode.config())?;
    if args.json {
        print_json(&outcome)?;
    } else if outcome.verified {
        eprintln!("verified via {:?} channel", outcome.channel);
    } else {
        eprintln!("not verified (failed at {:?})", outcome.failure_stage);
    }
    Ok(outcome)
}

fn run(cli: Cli) -> sigmark::Result<u8> {
    match cli.command {
        Command::Keygen { out_prefix, seed } => {
            let seed = seed
                .map(|s| hex::decode(s.trim()).map_err(|e| Error::InvalidConfig(format!("--seed is not hex: {e}"))))
                .transpose()?;
            let key = KeyPair::generate(seed.as_deref())?;
            let (sk, pk) = key.write_files(&out_prefix)?;
            eprintln!("wrote {} and {}", sk.display(), pk.display());
            println!("{}", hex::encode(key.public_key()));
        }
        Command::Embed {
            input,
            output,
            key,
            message,
            mode,
        } => {
            distinct_output(&input, &output)?;
            let bytes = match (&message.message_file, &message.message) {
                (Some(p), _) => std::fs::read(p).map_err(|e| Error::Io {
                    path: p.clone(),
                    source: e,
                })?,
                (None, Some(text)) => text.as_bytes().to_vec(),
                (None, None) => unreachable!("clap requires one message source"),
            };
            let message = Message::new(bytes)?;
            let key = KeyPair::read_private(&key)?;
            let clip = AudioClip::read_wav(&input)?;
            let marked = sigmark::embed(&clip, &message, &key, &mode.config())?;
            marked.write_wav(&output)?;
            eprintln!("embedded {} bytes into {}", message.len(), output.display());
        }
        Command::Verify(args) => {
            return Ok(if verify(&args)?.verified { 0 } else { exit::VERIFY_FAILED });
        }
        Command::Extract { verify: args, message_out } => {
            let outcome = verify(&args)?;
            let Some(message) = outcome.message.as_deref().filter(|_| outcome.verified) else {
                return Ok(exit::VERIFY_FAILED);
            };
            match message_out {
                Some(p) => std::fs::write(&p, message).map_err(|e| Error::Io { path: p, source: e })?,
                None if !args.json => {
                    use std::io::Write;
                    let mut out = std::io::stdout();
                    out.write_all(message).and_then(|_| out.flush()).map_err(|e| Error::Io {
                        path: "<stdout>".into(),
                        source: e,
                    })?;
                }
                None => {}
            }
        }
        Command::Attack(args) => {
            distinct_output(&args.input, &args.output)?;
            let spec = args.spec();
            spec.validate()?;
            let public_key = args.pubkey.as_deref().map(read_public_key).transpose()?;
            let env = AttackEnv {
                public_key,
                tool: args.tool.clone(),
                ..AttackEnv::default()
            };
            let clip = AudioClip::read_wav(&args.input)?;
            let attacked = attacks::apply(&clip, &spec, &env)?;
            attacked.write_wav(&args.output)?;
            eprintln!("applied {} to {}", spec.name(), args.output.display());
        }
        Command::Bench { config, overrides } => {
            let c = overrides.load(config.as_deref())?;
            let out = bench::run_benchmark(&c)?;
            print_json(&out.results.summaries)?;
        }
        Command::ErasureSweep {
            config,
            alphas,
            overrides,
        } => {
            let mut c = overrides.load(config.as_deref())?;
            if let Some(a) = alphas {
                c.erasure_alphas = a;
            }
            let subset = overrides.clips.unwrap_or(c.erasure_clips);
            c.validate()?;
            let table = bench::erasure_sweep(&c, &c.erasure_alphas, subset)?;
            if let Some(dir) = &c.output_dir {
                bench::write_erasure_table(dir, &table)?;
            }
            print_json(&table)?;
        }
        Command::Capacity {
            seconds,
            rate,
            message_bytes,
            mode,
        } => {
            if !(seconds > 0.0) || rate == 0 {
                return Err(Error::InvalidConfig("--seconds and --rate must be positive".into()));
            }
            let samples = (seconds * rate as f64).round() as usize;
            let report = sigmark::capacity_report(samples, rate, message_bytes, &mode.config())?;
            print_json(&report)?;
            let fits = report.phase.replicas.is_some() && report.magnitude.as_ref().is_none_or(|m| m.replicas.is_some());
            if !fits {
                eprintln!("a {message_bytes}-byte message does not fit in {seconds} s");
                return Ok(exit::HOST_TOO_SHORT);
            }
        }
        Command::GenHosts {
            count,
            output,
            seconds,
            rate,
            seed,
        } => {
            if count == 0 || !(seconds > 0.0) || rate == 0 {
                return Err(Error::InvalidConfig("--count, --seconds and --rate must be positive".into()));
            }
            let paths = sigmark::hosts::generate_synthetic_hosts(&output, count, seconds, rate, seed)?;
            for p in paths {
                println!("{}", p.display());
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
