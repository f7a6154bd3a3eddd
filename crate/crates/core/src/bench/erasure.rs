//! Strength sweep of the phase-erasure attack against the phase-only codec.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::export::{opt, write_csv, write_json};
use super::{prepare_host, select_hosts, thread_pool, BenchConfig, Prepared};
use crate::attacks::erasure_phase_randomize;
use crate::codec::{Mode, Verifier};
use crate::error::Result;
use crate::metrics::{lsd, snr};
use crate::payload::{self, Message};

pub const DEFAULT_ALPHAS: [f64; 5] = [0.0, 0.1, 0.3, 0.5, 1.0];
pub const ERASURE_SCHEMA: &str = "sigmark.bench.erasure/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErasureRow {
    pub alpha: f64,
    pub clips: usize,
    pub verified: usize,
    pub verify_pct: Option<f64>,
    pub ber_mean: Option<f64>,
    /// Against the watermarked clip the attack was applied to.
    pub lsd_mean: Option<f64>,
    pub snr_mean: Option<f64>,
    /// Against the unmarked host, i.e. the total cost of mark plus attack.
    pub lsd_host_mean: Option<f64>,
    pub snr_host_mean: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErasureTable {
    pub schema: String,
    pub clips: Vec<String>,
    pub skipped_clips: Vec<String>,
    pub rows: Vec<ErasureRow>,
}

struct Cell {
    verified: bool,
    ber: f64,
    lsd: f64,
    snr: f64,
    lsd_host: f64,
    snr_host: f64,
}

/// Embeds with the phase channel only, then applies phase erasure at each
/// `alpha` to the first `subset` selected hosts. The attack seed of each
/// clip is `erasure_seed + position`, shared across alphas.
pub fn erasure_sweep(config: &BenchConfig, alphas: &[f64], subset: usize) -> Result<ErasureTable> {
    let mut config = config.clone();
    config.codec.mode = Mode::PhaseOnly;
    config.clips = subset.max(1);
    config.validate()?;
    let key = config.keypair()?;
    let pk = key.public_key();
    let message = Message::new(config.message.as_bytes().to_vec())?;
    let signed = payload::sign_for_codeword(&message, &key, config.codec.rs_parity)?;
    let codeword = payload::rs_encode(&signed, config.codec.rs_parity)?;
    let truth = codeword.bits();
    let verifier = Verifier::new(pk, config.codec.clone())?;
    let hosts = select_hosts(&config.hosts, config.clips, config.sample_seed)?;
    let n_fft = config.codec.n_fft;

    let pool = thread_pool(config.workers)?;
    let (prepared, cells) = pool.install(|| -> Result<_> {
        let prepared: Vec<Prepared> = hosts
            .par_iter()
            .map(|h| prepare_host(h, &config.hosts, codeword.as_bytes(), &pk, &config.codec))
            .collect::<Result<_>>()?;
        let jobs: Vec<(usize, usize)> = (0..alphas.len())
            .flat_map(|a| {
                prepared
                    .iter()
                    .enumerate()
                    .filter(|(_, p)| matches!(p, Prepared::Marked { .. }))
                    .map(move |(c, _)| (a, c))
            })
            .collect();
        let cells: Vec<(usize, Cell)> = jobs
            .par_iter()
            .map(|&(a, c)| {
                let Prepared::Marked { original, marked } = &prepared[c] else {
                    unreachable!("jobs are built from marked hosts")
                };
                let seed = config.erasure_seed.wrapping_add(c as u64);
                let attacked = erasure_phase_randomize(marked, &pk, &config.codec, alphas[a], seed)?;
                let outcome = verifier.verify_with_truth(&attacked, &truth);
                Ok((
                    a,
                    Cell {
                        verified: outcome.verified,
                        ber: outcome.ber_phase.unwrap_or(1.0),
                        lsd: lsd(marked.samples(), attacked.samples(), n_fft),
                        snr: snr(marked.samples(), attacked.samples()),
                        lsd_host: lsd(original.samples(), attacked.samples(), n_fft),
                        snr_host: snr(original.samples(), attacked.samples()),
                    },
                ))
            })
            .collect::<Result<_>>()?;
        Ok((prepared, cells))
    })?;

    let rows = alphas
        .iter()
        .enumerate()
        .map(|(a, &alpha)| {
            let cs: Vec<&Cell> = cells.iter().filter(|(i, _)| *i == a).map(|(_, c)| c).collect();
            let n = cs.len();
            let avg = |f: fn(&Cell) -> f64| (n > 0).then(|| cs.iter().map(|c| f(c)).sum::<f64>() / n as f64);
            let verified = cs.iter().filter(|c| c.verified).count();
            ErasureRow {
                alpha,
                clips: n,
                verified,
                verify_pct: (n > 0).then(|| 100.0 * verified as f64 / n as f64),
                ber_mean: avg(|c| c.ber),
                lsd_mean: avg(|c| c.lsd),
                snr_mean: avg(|c| c.snr),
                lsd_host_mean: avg(|c| c.lsd_host),
                snr_host_mean: avg(|c| c.snr_host),
            }
        })
        .collect();

    let marked = |want: bool| {
        hosts
            .iter()
            .zip(&prepared)
            .filter(|(_, p)| matches!(p, Prepared::Marked { .. }) == want)
            .map(|(h, _)| h.id.clone())
            .collect()
    };
    Ok(ErasureTable {
        schema: ERASURE_SCHEMA.into(),
        clips: marked(true),
        skipped_clips: marked(false),
        rows,
    })
}

/// `erasure_sweep.json` and `erasure_sweep.csv` in `dir`.
pub fn write_erasure_table(dir: &Path, table: &ErasureTable) -> Result<()> {
    write_json(&dir.join("erasure_sweep.json"), table)?;
    let header: Vec<String> = [
        "alpha", "clips", "verified", "verify_pct", "ber_mean", "lsd_mean", "snr_mean", "lsd_host_mean", "snr_host_mean",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let rows: Vec<Vec<String>> = table
        .rows
        .iter()
        .map(|r| {
            vec![
                r.alpha.to_string(),
                r.clips.to_string(),
                r.verified.to_string(),
                opt(r.verify_pct),
                opt(r.ber_mean),
                opt(r.lsd_mean),
                opt(r.snr_mean),
                opt(r.lsd_host_mean),
                opt(r.snr_host_mean),
            ]
        })
        .collect();
    write_csv(&dir.join("erasure_sweep.csv"), &header, &rows)
}
