// Copyright 2026 The ceremony-sim Authors
// SPDX-License-Identifier: Apache-2.0

//! Experiment tables and numeric plot data.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::attack::{run_batch, AttackOutcome};
use crate::audio::AudioClip;
use crate::cepstral::{CepstralParams, MelCepstrum};
use crate::code::{SecurityCode, CODE_LEN};
use crate::corpus::{load_fsdd_corpus, Corpus};
use crate::error::{Error, Result};
use crate::scenario::{ChannelKind, MitigationMode, ScenarioConfig};

pub const REPORT_CSV: &str = "report.csv";
pub const REPORT_TXT: &str = "report.txt";

const HEADER: [&str; 8] = [
    "speaker_id",
    "speaker_language_or_accent",
    "original_code",
    "reordered_code",
    "code_size",
    "recording_tool",
    "mcd",
    "outcome",
];

/// One speaker × channel run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow {
    pub speaker_id: String,
    pub speaker_language_or_accent: String,
    pub original_code: SecurityCode,
    pub reordered_code: SecurityCode,
    pub code_size: usize,
    pub recording_tool: ChannelKind,
    /// Unrounded mean MCD; `None` when nothing was announced.
    pub mcd: Option<f64>,
    /// `success` or the failure reason.
    pub outcome: String,
}

impl ReportRow {
    pub fn from_outcome(outcome: &AttackOutcome, accent: &str, channel: ChannelKind) -> Self {
        ReportRow {
            speaker_id: outcome.victim_speaker.clone(),
            speaker_language_or_accent: accent.to_string(),
            original_code: outcome.victim_code,
            reordered_code: outcome.injected_code,
            code_size: CODE_LEN,
            recording_tool: channel,
            mcd: outcome.mean_mcd,
            outcome: match outcome.failure_reason {
                Some(r) => r.to_string(),
                None if outcome.success => "success".into(),
                None => "rejected".into(),
            },
        }
    }

    /// Two decimals, or `NA`.
    pub fn mcd_text(&self) -> String {
        match self.mcd {
            Some(m) => format!("{m:.2}"),
            None => "NA".into(),
        }
    }

    fn cells(&self) -> [String; 8] {
        [
            self.speaker_id.clone(),
            self.speaker_language_or_accent.clone(),
            self.original_code.format(),
            self.reordered_code.format(),
            self.code_size.to_string(),
            self.recording_tool.label().to_string(),
            self.mcd_text(),
            self.outcome.clone(),
        ]
    }
}

/// Completed experiment: rows sorted by speaker, then channel.
#[derive(Clone, Debug)]
pub struct Report {
    pub rows: Vec<ReportRow>,
    pub outcomes: Vec<AttackOutcome>,
}

impl Report {
    pub fn to_csv(&self) -> String {
        let mut out = HEADER.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells = row.cells().map(|c| csv_field(&c));
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_text(&self) -> String {
        let table: Vec<[String; 8]> = std::iter::once(HEADER.map(String::from))
            .chain(self.rows.iter().map(ReportRow::cells))
            .collect();
        let mut widths = [0usize; 8];
        for r in &table {
            for (w, c) in widths.iter_mut().zip(r) {
                *w = (*w).max(c.chars().count());
            }
        }
        let mut out = String::new();
        for (i, r) in table.iter().enumerate() {
            let line: Vec<String> = r
                .iter()
                .zip(widths)
                .map(|(c, w)| format!("{c:<w$}"))
                .collect();
            out.push_str(line.join(" | ").trim_end());
            out.push('\n');
            if i == 0 {
                let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
                out.push_str(&rule.join("-+-"));
                out.push('\n');
            }
        }
        out
    }

    /// One JSON outcome per line, in row order.
    pub fn outcomes_jsonl(&self) -> String {
        self.outcomes.iter().map(|o| o.to_json() + "\n").collect()
    }

    pub fn write(&self, out_dir: impl AsRef<Path>) -> Result<(PathBuf, PathBuf)> {
        let dir = out_dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let csv = dir.join(REPORT_CSV);
        let txt = dir.join(REPORT_TXT);
        fs::write(&csv, self.to_csv()).map_err(|e| Error::io(&csv, e))?;
        fs::write(&txt, self.to_text()).map_err(|e| Error::io(&txt, e))?;
        Ok((csv, txt))
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Baseline attack for every selected speaker × channel cell.
///
/// A missing speaker digit is a row annotation, not an error.
pub fn run_experiment(config: &ScenarioConfig, corpus: &Corpus) -> Result<Report> {
    let selection = config.corpus.clone().unwrap_or_default();
    let mut speakers: Vec<String> = if selection.speakers.is_empty() {
        corpus.speakers().map(String::from).collect()
    } else {
        selection.speakers.clone()
    };
    speakers.sort();
    speakers.dedup();
    let mut channels = selection.channels.clone();
    channels.sort();
    channels.dedup();

    let mut cells = Vec::new();
    for speaker in &speakers {
        corpus.library(speaker)?;
        for &channel in &channels {
            let mut c = config.with_mitigation(MitigationMode::None);
            c.victim.speaker = speaker.clone();
            c.attacker.channel = channel;
            cells.push((speaker.clone(), channel, c));
        }
    }
    let configs: Vec<ScenarioConfig> = cells.iter().map(|(_, _, c)| c.clone()).collect();
    let results = run_batch(&configs, corpus);

    let mut rows = Vec::with_capacity(cells.len());
    let mut outcomes = Vec::with_capacity(cells.len());
    for ((speaker, channel, _), result) in cells.iter().zip(results) {
        let outcome = result?;
        rows.push(ReportRow::from_outcome(
            &outcome,
            corpus.label(speaker),
            *channel,
        ));
        outcomes.push(outcome);
    }
    Ok(Report { rows, outcomes })
}

/// Loads the config and its `[corpus]` directory, runs, and writes the report files.
pub fn run_experiment_from_path(
    config_path: impl AsRef<Path>,
    out_dir: impl AsRef<Path>,
) -> Result<Report> {
    let config = ScenarioConfig::load(config_path)?;
    let dir = config
        .corpus
        .as_ref()
        .map(|c| c.dir.clone())
        .ok_or_else(|| Error::Config("a [corpus] section with dir is required".into()))?;
    let corpus = load_fsdd_corpus(&dir)?;
    let report = run_experiment(&config, &corpus)?;
    report.write(out_dir)?;
    Ok(report)
}

/// Writes `<prefix>.time.csv` and `<prefix>.freq.csv` for `clip`.
pub fn emit_plot_data(
    clip: &AudioClip,
    params: &CepstralParams,
    out_prefix: impl AsRef<Path>,
) -> Result<(PathBuf, PathBuf)> {
    let prefix = out_prefix.as_ref().as_os_str().to_owned();
    let with_suffix = |s: &str| {
        let mut p = prefix.clone();
        p.push(s);
        PathBuf::from(p)
    };
    let time_path = with_suffix(".time.csv");
    let freq_path = with_suffix(".freq.csv");

    let (time, freq) = plot_tables(clip, params)?;
    fs::write(&time_path, time).map_err(|e| Error::io(&time_path, e))?;
    fs::write(&freq_path, freq).map_err(|e| Error::io(&freq_path, e))?;
    Ok((time_path, freq_path))
}

/// The time-domain and frequency-domain tables as CSV text.
pub fn plot_tables(clip: &AudioClip, params: &CepstralParams) -> Result<(String, String)> {
    let rate = f64::from(clip.sample_rate());
    let mut time = String::from("sample_index,time_s,amplitude\n");
    for (i, x) in clip.samples().iter().enumerate() {
        time.push_str(&format!("{i},{:.6},{x:.9}\n", i as f64 / rate));
    }
    let analyzer = MelCepstrum::new(*params, clip.sample_rate())?;
    let mut freq = String::from("frame_index,bin_hz,magnitude\n");
    for (f, spectrum) in analyzer.magnitude_frames(clip)?.iter().enumerate() {
        for (k, m) in spectrum.iter().enumerate() {
            freq.push_str(&format!("{f},{:.3},{m:.9}\n", analyzer.bin_hz(k)));
        }
    }
    Ok((time, freq))
}
