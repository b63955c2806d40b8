// Copyright 2026 The ceremony-sim Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use ceremony_sim::attack::{execute_attack, run_mitigation_matrix};
use ceremony_sim::audio::{read_wav, write_wav};
use ceremony_sim::cepstral::{mcd_spliced_vs_original, CepstralParams};
use ceremony_sim::code::{derive_security_code, IdentityKey, SecurityCode};
use ceremony_sim::corpus::{load_fsdd_corpus, synthesize_corpus, Corpus, SyntheticCorpus};
use ceremony_sim::report::{emit_plot_data, run_experiment};
use ceremony_sim::rng::labeled_rng;
use ceremony_sim::scenario::{MitigationMode, ScenarioConfig};
use ceremony_sim::segment::{detect_regions, SegmentationParams};
use ceremony_sim::splice::{
    format_spans, read_spans, synthesize_code_audio, write_spans, LabeledSpan, DEFAULT_GAP_MS,
};
use ceremony_sim::{Error, Result};

/// Security-code ceremony simulator and splicing attack harness.
#[derive(Parser)]
#[command(name = "ceremony-sim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the 40-digit security code of an identity key.
    DeriveCode {
        /// 32-byte key as 64 hex characters.
        #[arg(long, conflicts_with = "seed")]
        key_hex: Option<String>,
        /// Draw the key from this seed instead.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Find digit utterances in a recording and print their spans.
    Segment {
        wav: PathBuf,
        /// Number of utterances expected.
        #[arg(long)]
        expected: usize,
        /// Digits spoken, in order; labels the spans when given.
        #[arg(long)]
        digits: Option<String>,
        /// Write `start,end,digit` spans here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 0.1)]
        threshold_ratio: f64,
        #[arg(long, default_value_t = 100.0)]
        min_gap_ms: f64,
    },
    /// Splice a code announcement from a speaker's digit recordings.
    SynthesizeCode {
        /// Directory of `<digit>_<speaker>_<index>.wav` files.
        #[arg(long)]
        library: PathBuf,
        /// Code in display form or as 40 bare digits.
        #[arg(long)]
        code: String,
        /// Speaker to use; the first one in the directory when omitted.
        #[arg(long)]
        speaker: Option<String>,
        #[arg(long, default_value_t = DEFAULT_GAP_MS)]
        gap_ms: f64,
        /// Output WAV file.
        #[arg(long)]
        out: PathBuf,
        /// Output span file; `<out>.spans` when omitted.
        #[arg(long)]
        spans: Option<PathBuf>,
    },
    /// Mel-cepstral distortion between an original and a spliced recording.
    Mcd {
        original_wav: PathBuf,
        original_spans: PathBuf,
        spliced_wav: PathBuf,
        spliced_spans: PathBuf,
    },
    /// Run one attack scenario and print its outcome record.
    Simulate {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the config's mitigation.
        #[arg(long, value_enum)]
        mitigation: Option<MitigationArg>,
        /// Run the scenario under every mitigation.
        #[arg(long, conflicts_with = "mitigation")]
        matrix: bool,
        /// Print JSON instead of the text record.
        #[arg(long)]
        json: bool,
        /// Write the session event log here.
        #[arg(long)]
        events: Option<PathBuf>,
    },
    /// Run every speaker × channel cell and write report.csv and report.txt.
    Report {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Also write outcomes.jsonl.
        #[arg(long)]
        outcomes: bool,
    },
    /// Write time- and frequency-domain plot data for a recording.
    PlotData {
        wav: PathBuf,
        /// Writes `<prefix>.time.csv` and `<prefix>.freq.csv`.
        #[arg(long)]
        out_prefix: PathBuf,
    },
    /// Generate the synthetic spoken-digit corpus.
    SynthCorpus {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 2)]
        takes: u32,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MitigationArg {
    None,
    Deferred,
    Oob,
}

impl From<MitigationArg> for MitigationMode {
    fn from(m: MitigationArg) -> Self {
        match m {
            MitigationArg::None => MitigationMode::None,
            MitigationArg::Deferred => MitigationMode::Deferred,
            MitigationArg::Oob => MitigationMode::Oob,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let rendered = e.render().to_string();
            let line = rendered.lines().next().unwrap_or("error: invalid usage");
            eprintln!("{line}");
            return ExitCode::from(2);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let message: Vec<String> = e
                .to_string()
                .lines()
                .map(|l| l.trim().to_string())
                .filter(|l| !l.is_empty())
                .collect();
            eprintln!("error: {}", message.join(" "));
            ExitCode::FAILURE
        }
    }
}

fn parse_code_arg(text: &str) -> Result<SecurityCode> {
    let bare: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if bare.len() == 40 && bare.chars().all(|c| c.is_ascii_digit()) {
        SecurityCode::from_digits(&bare.bytes().map(|b| b - b'0').collect::<Vec<_>>())
    } else {
        text.parse()
    }
}

/// The config's corpus directory, or the built-in synthetic corpus.
fn load_scenario(path: Option<&Path>, seed: Option<u64>) -> Result<(ScenarioConfig, Corpus)> {
    let mut config = match path {
        Some(p) => ScenarioConfig::load(p)?,
        None => ScenarioConfig::default(),
    };
    if let Some(seed) = seed {
        config.seed = seed;
    }
    let corpus = match config
        .corpus
        .as_ref()
        .filter(|c| !c.dir.as_os_str().is_empty())
    {
        Some(c) => load_fsdd_corpus(&c.dir)?,
        None => SyntheticCorpus::default().build(),
    };
    Ok((config, corpus))
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::DeriveCode { key_hex, seed } => {
            let key = match (key_hex, seed) {
                (Some(hex), _) => IdentityKey::from_hex(&hex)?,
                (None, Some(seed)) => IdentityKey::random(&mut labeled_rng(seed, "cli/key")),
                (None, None) => {
                    return Err(Error::Config(
                        "one of --key-hex or --seed is required".into(),
                    ))
                }
            };
            println!("{}", derive_security_code(&key));
        }
        Command::Segment {
            wav,
            expected,
            digits,
            out,
            threshold_ratio,
            min_gap_ms,
        } => {
            let clip = read_wav(&wav)?;
            let params = SegmentationParams {
                threshold_ratio,
                min_gap_ms,
                ..SegmentationParams::default()
            };
            let regions = detect_regions(&clip, &params)?;
            if regions.len() != expected {
                return Err(Error::SegmentationCount {
                    found: regions.len(),
                    expected,
                });
            }
            let text = match digits {
                Some(d) => {
                    let digits: Vec<u8> = d
                        .bytes()
                        .filter(u8::is_ascii_digit)
                        .map(|b| b - b'0')
                        .collect();
                    if digits.len() != regions.len() {
                        return Err(Error::LabelCount {
                            clips: regions.len(),
                            digits: digits.len(),
                        });
                    }
                    let spans: Vec<LabeledSpan> = regions
                        .iter()
                        .zip(digits)
                        .map(|(r, digit)| LabeledSpan {
                            start: r.start,
                            end: r.end,
                            digit,
                        })
                        .collect();
                    format_spans(&spans)
                }
                None => regions
                    .iter()
                    .map(|r| format!("{},{}\n", r.start, r.end))
                    .collect(),
            };
            match out {
                Some(out) => std::fs::write(&out, text).map_err(|e| Error::Io {
                    path: out,
                    source: e,
                })?,
                None => print!("{text}"),
            }
        }
        Command::SynthesizeCode {
            library,
            code,
            speaker,
            gap_ms,
            out,
            spans,
        } => {
            let code = parse_code_arg(&code)?;
            let corpus = load_fsdd_corpus(&library)?;
            let speaker = match speaker {
                Some(s) => s,
                None => corpus
                    .speakers()
                    .next()
                    .map(String::from)
                    .unwrap_or_default(),
            };
            let (clip, labeled) = synthesize_code_audio(corpus.library(&speaker)?, &code, gap_ms)?;
            write_wav(&clip, &out)?;
            let spans_path = spans.unwrap_or_else(|| {
                let mut p = out.clone().into_os_string();
                p.push(".spans");
                PathBuf::from(p)
            });
            write_spans(&labeled, &spans_path)?;
        }
        Command::Mcd {
            original_wav,
            original_spans,
            spliced_wav,
            spliced_spans,
        } => {
            let result = mcd_spliced_vs_original(
                &read_wav(&original_wav)?,
                &read_spans(&original_spans)?,
                &read_wav(&spliced_wav)?,
                &read_spans(&spliced_spans)?,
                &CepstralParams::default(),
            )?;
            for d in &result.per_digit {
                println!("position={} digit={} mcd={:.2}", d.position, d.digit, d.mcd);
            }
            println!("mean_mcd={:.2}", result.mean);
        }
        Command::Simulate {
            config,
            seed,
            mitigation,
            matrix,
            json,
            events,
        } => {
            let (mut config, corpus) = load_scenario(config.as_deref(), seed)?;
            if let Some(m) = mitigation {
                config = config.with_mitigation(m.into());
            }
            let outcomes = if matrix {
                run_mitigation_matrix(&config, &corpus)?
            } else {
                vec![execute_attack(&config, &corpus)?]
            };
            for o in &outcomes {
                if json {
                    println!("{}", o.to_json());
                } else {
                    print!("{}", o.to_record());
                }
            }
            if let Some(path) = events {
                let log: String = outcomes
                    .iter()
                    .map(|o| ceremony_sim::meeting::export_event_log(&o.timeline))
                    .collect();
                std::fs::write(&path, log).map_err(|e| Error::Io { path, source: e })?;
            }
        }
        Command::Report {
            config,
            seed,
            out,
            outcomes,
        } => {
            let (config, corpus) = load_scenario(config.as_deref(), seed)?;
            let report = run_experiment(&config, &corpus)?;
            report.write(&out)?;
            if outcomes {
                let path = out.join("outcomes.jsonl");
                std::fs::write(&path, report.outcomes_jsonl())
                    .map_err(|e| Error::Io { path, source: e })?;
            }
            print!("{}", report.to_text());
        }
        Command::PlotData { wav, out_prefix } => {
            let clip = read_wav(&wav)?;
            let (time, freq) = emit_plot_data(&clip, &CepstralParams::default(), &out_prefix)?;
            println!("{}", time.display());
            println!("{}", freq.display());
        }
        Command::SynthCorpus { out, seed, takes } => {
            let synth = SyntheticCorpus {
                seed,
                takes_per_digit: takes,
                ..SyntheticCorpus::default()
            };
            let corpus = synthesize_corpus(&synth, &out)?;
            for s in corpus.speakers() {
                println!("{s},{}", corpus.label(s));
            }
        }
    }
    Ok(())
}
