use std::path::{Path, PathBuf};

use sigmark::attacks::{apply, AttackEnv, AttackSpec, ExternalCodec};
use sigmark::bench::{run_benchmark, BenchConfig, HostSource};
use sigmark::hosts::generate_synthetic_hosts;
use sigmark::{capacity_report, embed, extract_verify, AudioClip, CodecConfig, KeyPair, Message, VerifiedChannel};

fn fixture() -> (AudioClip, KeyPair, Message) {
    (
        sigmark::hosts::synthetic_host(10.0, 44_100, 21, 0),
        KeyPair::generate(Some(&[5; 32])).unwrap(),
        Message::new(b"take 12, room B".to_vec()).unwrap(),
    )
}

/// A stand-in codec tool that copies its `-i` input to its final argument.
fn fake_tool(dir: &Path) -> PathBuf {
    use std::os::unix::fs::PermissionsExt;
    let path = dir.join("fake-codec");
    std::fs::write(
        &path,
        "#!/bin/sh\n\
         if [ \"$1\" = \"-version\" ]; then echo fake; exit 0; fi\n\
         prev=\"\"; for a in \"$@\"; do if [ \"$prev\" = \"-i\" ]; then in=\"$a\"; fi; prev=\"$a\"; last=\"$a\"; done\n\
         cp \"$in\" \"$last\"\n",
    )
    .unwrap();
    std::fs::set_permissions(&path, std::fs::Permissions::from_mode(0o755)).unwrap();
    path
}

#[test]
fn survives_wav_file_round_trip() {
    let (host, key, msg) = fixture();
    let marked = embed(&host, &msg, &key, &CodecConfig::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("marked.wav");
    marked.write_wav(&path).unwrap();
    let loaded = AudioClip::read_wav(&path).unwrap();
    assert_eq!(loaded.len(), host.len());
    let out = extract_verify(&loaded, &key.public_key(), &CodecConfig::default()).unwrap();
    assert!(out.verified);
    assert_eq!(out.message.as_deref(), Some(msg.as_bytes()));
}

#[test]
fn phase_only_mode_round_trip() {
    let (host, key, msg) = fixture();
    let cfg = CodecConfig::phase_only();
    let marked = embed(&host, &msg, &key, &cfg).unwrap();
    let out = extract_verify(&marked, &key.public_key(), &cfg).unwrap();
    assert!(out.verified);
    assert_eq!(out.channel, VerifiedChannel::Phase);
    assert_eq!(out.reports.len(), 1);
}

#[test]
fn magnitude_channel_rescues_lowpass() {
    let (host, key, msg) = fixture();
    let cfg = CodecConfig::default();
    let marked = embed(&host, &msg, &key, &cfg).unwrap();
    let attacked = apply(&marked, &AttackSpec::Lowpass { cutoff_hz: 8000.0, order: 4 }, &AttackEnv::default()).unwrap();
    let out = extract_verify(&attacked, &key.public_key(), &cfg).unwrap();
    assert!(out.verified);
    assert_eq!(out.channel, VerifiedChannel::Magnitude);
    assert_ne!(out.reports[0].stage, sigmark::FailureStage::None);
}

#[test]
fn external_codec_through_subprocess() {
    let (host, key, msg) = fixture();
    let dir = tempfile::tempdir().unwrap();
    let env = AttackEnv {
        tool: fake_tool(dir.path()),
        ..AttackEnv::default()
    };
    let marked = embed(&host, &msg, &key, &CodecConfig::default()).unwrap().quantize_pcm16();
    let out = apply(&marked, &AttackSpec::ExternalCodec(ExternalCodec::flac()), &env).unwrap();
    assert_eq!(out, marked);
    assert!(extract_verify(&out, &key.public_key(), &CodecConfig::default()).unwrap().verified);
}

#[test]
fn benchmark_with_lossless_tool_matches_identity() {
    let dir = tempfile::tempdir().unwrap();
    let config = BenchConfig {
        hosts: HostSource::Synthetic {
            seconds: 8.0,
            sample_rate: 44_100,
            seed: 4,
        },
        clips: 3,
        attacks: vec![AttackSpec::Identity, AttackSpec::ExternalCodec(ExternalCodec::flac())],
        tool: fake_tool(dir.path()),
        bootstrap_resamples: 100,
        ..BenchConfig::default()
    };
    let out = run_benchmark(&config).unwrap();
    assert!(out.meta.external.available);
    let id = out.results.summary("identity").unwrap();
    let flac = out.results.summary("flac").unwrap();
    assert_eq!(flac.skipped, 0);
    assert_eq!(flac.verify_pct, id.verify_pct);
    for (a, b) in out.results.records.chunks(2).map(|c| (&c[0], &c[1])) {
        assert_eq!(a.metrics.as_ref().unwrap().ber, b.metrics.as_ref().unwrap().ber);
    }
}

#[test]
fn directory_hosts_benchmark() {
    let dir = tempfile::tempdir().unwrap();
    let paths = generate_synthetic_hosts(dir.path(), 4, 8.0, 44_100, 9).unwrap();
    assert_eq!(paths.len(), 4);
    let config = BenchConfig {
        hosts: HostSource::Directory { path: dir.path().into() },
        clips: 2,
        attacks: vec![AttackSpec::Identity],
        bootstrap_resamples: 50,
        ..BenchConfig::default()
    };
    let out = run_benchmark(&config).unwrap();
    assert_eq!(out.results.clips.len(), 2);
    assert_eq!(out.results.summary("identity").unwrap().verified, 2);
    assert!(out.meta.clip_sources.iter().all(|s| s.ends_with(".wav")));
}

#[test]
fn generated_hosts_are_reproducible_and_large_enough() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let pa = generate_synthetic_hosts(a.path(), 10, 10.0, 44_100, 7).unwrap();
    let pb = generate_synthetic_hosts(b.path(), 10, 10.0, 44_100, 7).unwrap();
    for (x, y) in pa.iter().zip(&pb) {
        assert_eq!(std::fs::read(x).unwrap(), std::fs::read(y).unwrap());
        let clip = AudioClip::read_wav(x).unwrap();
        assert_eq!(clip.len(), 441_000);
        capacity_report(clip.len(), clip.sample_rate(), 49, &CodecConfig::default()).unwrap();
    }
}
