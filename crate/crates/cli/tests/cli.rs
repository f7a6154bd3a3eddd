use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn sigmark(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sigmark")).args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// A directory with a key pair and one 10 s synthetic host.
fn workspace() -> (tempfile::TempDir, PathBuf, PathBuf, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("studio");
    let seed = "11".repeat(32);
    assert!(sigmark(&["keygen", "--out-prefix", s(&prefix), "--seed", &seed]).status.success());
    let hosts = dir.path().join("hosts");
    let out = sigmark(&["gen-hosts", "--count", "1", "--out", s(&hosts), "--seed", "3"]);
    assert!(out.status.success());
    let host = hosts.join("host_0000.wav");
    (dir, prefix.with_extension("sk"), prefix.with_extension("pk"), host)
}

#[test]
fn keygen_is_reproducible_with_seed() {
    let dir = tempfile::tempdir().unwrap();
    let seed = "00".repeat(32);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let out_a = sigmark(&["keygen", "--out-prefix", s(&a), "--seed", &seed]);
    sigmark(&["keygen", "--out-prefix", s(&b), "--seed", &seed]);
    assert_eq!(
        String::from_utf8(out_a.stdout).unwrap().trim(),
        "3b6a27bcceb6a42d62a3a8d02a6f0d73653215771de243a63ac048a18b59da29"
    );
    for ext in ["sk", "pk", "sk.hex", "pk.hex"] {
        let fa = std::fs::read(dir.path().join(format!("a.{ext}"))).unwrap();
        let fb = std::fs::read(dir.path().join(format!("b.{ext}"))).unwrap();
        assert_eq!(fa, fb, "{ext}");
    }
}

#[test]
fn embed_verify_extract() {
    let (dir, sk, pk, host) = workspace();
    let marked = dir.path().join("marked.wav");
    let before = std::fs::read(&host).unwrap();
    let out = sigmark(&["embed", "--in", s(&host), "--out", s(&marked), "--key", s(&sk), "--message", "take 7"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(std::fs::read(&host).unwrap(), before, "input must be untouched");

    let out = sigmark(&["verify", "--in", s(&marked), "--pubkey", s(&pk), "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["verified"], true);
    assert_eq!(json["channel"], "phase");
    let parsed: sigmark::VerifyOutcome = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(parsed.message.as_deref(), Some(&b"take 7"[..]));

    let out = sigmark(&["extract", "--in", s(&marked), "--pubkey", s(&pk)]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(out.stdout, b"take 7");
}

#[test]
fn unmarked_audio_fails_verification() {
    let (_dir, _sk, pk, host) = workspace();
    let out = sigmark(&["verify", "--in", s(&host), "--pubkey", s(&pk), "--json"]);
    assert_eq!(out.status.code(), Some(1));
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["verified"], false);
    assert_ne!(json["failure_stage"], "none");
}

#[test]
fn message_file_and_phase_only_mode() {
    let (dir, sk, pk, host) = workspace();
    let msg = dir.path().join("msg.bin");
    std::fs::write(&msg, [0u8, 159, 255, 7]).unwrap();
    let marked = dir.path().join("m.wav");
    let out = sigmark(&[
        "embed", "--in", s(&host), "--out", s(&marked), "--key", s(&sk), "--message-file", s(&msg), "--mode", "phase-only",
    ]);
    assert!(out.status.success());
    let got = dir.path().join("got.bin");
    let out = sigmark(&["extract", "--in", s(&marked), "--pubkey", s(&pk), "--mode", "phase-only", "--message-out", s(&got)]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(std::fs::read(&got).unwrap(), [0u8, 159, 255, 7]);
}

#[test]
fn attacks_from_the_command_line() {
    let (dir, sk, pk, host) = workspace();
    let marked = dir.path().join("marked.wav");
    sigmark(&["embed", "--in", s(&host), "--out", s(&marked), "--key", s(&sk), "--message", "x"]);
    let attacked = dir.path().join("lp.wav");
    let out = sigmark(&["attack", "--in", s(&marked), "--out", s(&attacked), "--type", "lowpass", "--cutoff", "8000"]);
    assert!(out.status.success());
    let out = sigmark(&["verify", "--in", s(&attacked), "--pubkey", s(&pk), "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["channel"], "magnitude");

    let erased = dir.path().join("erased.wav");
    let out = sigmark(&[
        "attack", "--in", s(&marked), "--out", s(&erased), "--type", "erasure-phase", "--alpha", "1", "--pubkey", s(&pk),
    ]);
    assert!(out.status.success());
    let out = sigmark(&["verify", "--in", s(&erased), "--pubkey", s(&pk), "--mode", "phase-only"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn distinct_exit_codes() {
    let (dir, sk, _pk, host) = workspace();
    // usage
    assert_eq!(sigmark(&["embed", "--in", s(&host)]).status.code(), Some(2));
    assert_eq!(
        sigmark(&["embed", "--in", s(&host), "--out", s(&host), "--key", s(&sk), "--message", "x"]).status.code(),
        Some(2)
    );
    // I/O
    let missing = dir.path().join("missing.wav");
    let out = dir.path().join("o.wav");
    assert_eq!(
        sigmark(&["embed", "--in", s(&missing), "--out", s(&out), "--key", s(&sk), "--message", "x"]).status.code(),
        Some(3)
    );
    // host too short
    let short = dir.path().join("short");
    sigmark(&["gen-hosts", "--count", "1", "--out", s(&short), "--seconds", "0.5"]);
    assert_eq!(
        sigmark(&["embed", "--in", s(&short.join("host_0000.wav")), "--out", s(&out), "--key", s(&sk), "--message", "x"])
            .status
            .code(),
        Some(4)
    );
    assert!(!out.exists(), "nothing written on failure");
    // external tool
    let codec_out = dir.path().join("c.wav");
    assert_eq!(
        sigmark(&["attack", "--in", s(&host), "--out", s(&codec_out), "--type", "mp3", "--tool", "/nonexistent/tool"])
            .status
            .code(),
        Some(5)
    );
}

#[test]
fn capacity_report_json() {
    let out = sigmark(&["capacity", "--seconds", "10", "--rate", "44100"]);
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["phase"]["slots"], 6266);
    assert_eq!(json["codeword_bytes"], 145);
    assert_eq!(sigmark(&["capacity", "--seconds", "1"]).status.code(), Some(4));
    assert_eq!(sigmark(&["capacity", "--seconds", "3", "--mode", "phase-only"]).status.code(), Some(0));
    assert_eq!(sigmark(&["capacity", "--seconds", "3"]).status.code(), Some(4));
}

#[test]
fn bench_and_erasure_sweep_write_envelopes() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bench.json");
    std::fs::write(
        &config,
        r#"{
            "hosts": {"type": "synthetic", "seconds": 6.0, "sample_rate": 44100, "seed": 1},
            "clips": 2,
            "attacks": [{"kind": "identity"}, {"kind": "crop_tail", "fraction": 0.2}],
            "bootstrap_resamples": 50
        }"#,
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = sigmark(&["bench", "--config", s(&config), "--output-dir", s(&out_dir), "--workers", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let results = sigmark::bench::ResultsEnvelope::read(&out_dir.join(sigmark::bench::RESULTS_ENVELOPE)).unwrap();
    assert_eq!(results.summary("identity").unwrap().verified, 2);
    assert!(out_dir.join(sigmark::bench::META_ENVELOPE).is_file());

    let out = sigmark(&[
        "erasure-sweep", "--config", s(&config), "--alphas", "0,1", "--clips", "2", "--output-dir", s(&out_dir),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(table["rows"][0]["verified"], 2);
    assert_eq!(table["rows"][1]["verified"], 0);
    assert!(out_dir.join("erasure_sweep.csv").is_file());

    std::fs::write(&config, r#"{"clips": 0}"#).unwrap();
    assert_eq!(sigmark(&["bench", "--config", s(&config)]).status.code(), Some(2));
}
