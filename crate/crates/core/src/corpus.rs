// Copyright 2026 The ceremony-sim Authors
// SPDX-License-Identifier: Apache-2.0

//! Spoken-digit corpora in the FSDD layout (`<digit>_<speaker>_<index>.wav`,
//! mono PCM16) and a deterministic synthetic generator producing one.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::audio::{read_wav, write_wav, AudioClip};
use crate::error::{Error, Result};
use crate::rng::sub_seed;
use crate::splice::{DigitSnippet, Provenance, ProvenanceKind, SnippetLibrary};

/// Optional per-speaker metadata file inside a corpus directory (`speaker,label`).
pub const SPEAKER_LABELS_FILE: &str = "speakers.csv";

/// One snippet library per speaker, plus free-text speaker labels.
#[derive(Clone, Debug, Default)]
pub struct Corpus {
    libraries: BTreeMap<String, SnippetLibrary>,
    labels: BTreeMap<String, String>,
}

impl Corpus {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, library: SnippetLibrary, label: impl Into<String>) {
        self.labels
            .insert(library.speaker_id().to_string(), label.into());
        self.libraries
            .insert(library.speaker_id().to_string(), library);
    }

    pub fn speakers(&self) -> impl Iterator<Item = &str> {
        self.libraries.keys().map(String::as_str)
    }

    pub fn library(&self, speaker: &str) -> Result<&SnippetLibrary> {
        self.libraries
            .get(speaker)
            .ok_or_else(|| Error::Corpus(format!("unknown speaker {speaker:?}")))
    }

    pub fn library_mut(&mut self, speaker: &str) -> Option<&mut SnippetLibrary> {
        self.libraries.get_mut(speaker)
    }

    pub fn label(&self, speaker: &str) -> &str {
        self.labels.get(speaker).map(String::as_str).unwrap_or("")
    }

    pub fn len(&self) -> usize {
        self.libraries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.libraries.is_empty()
    }
}

/// Splits `<digit>_<speaker>_<index>.wav`.
pub fn parse_fsdd_name(name: &str) -> Option<(u8, String, u32)> {
    let stem = name.strip_suffix(".wav")?;
    let (digit, rest) = stem.split_once('_')?;
    let (speaker, index) = rest.rsplit_once('_')?;
    let digit: u8 = digit.parse().ok().filter(|d| *d <= 9)?;
    if speaker.is_empty() {
        return None;
    }
    Some((digit, speaker.to_string(), index.parse().ok()?))
}

/// Loads every FSDD-named file; for each speaker and digit the lowest index wins.
pub fn load_fsdd_corpus(dir: impl AsRef<Path>) -> Result<Corpus> {
    let dir = dir.as_ref();
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut files: Vec<(String, u8, u32, PathBuf)> = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if let Some((digit, speaker, index)) = parse_fsdd_name(&name) {
            files.push((speaker, digit, index, entry.path()));
        }
    }
    if files.is_empty() {
        return Err(Error::Corpus(format!(
            "no <digit>_<speaker>_<index>.wav files in {}",
            dir.display()
        )));
    }
    files.sort();

    let labels = read_labels(dir)?;
    let mut corpus = Corpus::new();
    for (speaker, digit, _, path) in files {
        let clip = read_wav(&path)?;
        let source = format!(
            "corpus:{}",
            path.file_name().unwrap_or_default().to_string_lossy()
        );
        let snippet = DigitSnippet::new(
            digit,
            clip,
            speaker.clone(),
            Provenance::new(ProvenanceKind::ConversationCapture, source),
        )?;
        if corpus.library_mut(&speaker).is_none() {
            let label = labels.get(&speaker).cloned().unwrap_or_default();
            corpus.insert(SnippetLibrary::new(speaker.clone()), label);
        }
        let library = corpus.library_mut(&speaker).expect("inserted above");
        library.merge([&snippet])?;
    }
    Ok(corpus)
}

fn read_labels(dir: &Path) -> Result<BTreeMap<String, String>> {
    let path = dir.join(SPEAKER_LABELS_FILE);
    if !path.exists() {
        return Ok(BTreeMap::new());
    }
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    Ok(text
        .lines()
        .filter_map(|line| line.split_once(','))
        .map(|(s, l)| (s.trim().to_string(), l.trim().to_string()))
        .collect())
}

/// Vocal characteristics of one synthetic speaker.
#[derive(Clone, Debug, PartialEq)]
pub struct Voice {
    pub id: String,
    pub label: String,
    /// Mean pitch in Hz.
    pub f0: f64,
    /// Multiplier on every formant frequency (vocal tract length).
    pub formant_scale: f64,
    /// Aspiration noise relative to the pulse source.
    pub breathiness: f64,
    /// One-pole lowpass coefficient on the glottal source.
    pub tilt: f64,
    /// Multiplier on segment durations.
    pub tempo: f64,
}

impl Voice {
    fn new(
        id: &str,
        label: &str,
        f0: f64,
        formant_scale: f64,
        breathiness: f64,
        tilt: f64,
        tempo: f64,
    ) -> Self {
        Voice {
            id: id.into(),
            label: label.into(),
            f0,
            formant_scale,
            breathiness,
            tilt,
            tempo,
        }
    }
}

/// Six voices, two per accent label.
pub fn default_voices() -> Vec<Voice> {
    vec![
        Voice::new("adam", "US English", 110.0, 1.00, 0.05, 0.55, 1.00),
        Voice::new("beth", "US English", 215.0, 1.18, 0.12, 0.35, 0.92),
        Voice::new("carl", "British English", 92.0, 0.90, 0.03, 0.70, 1.08),
        Voice::new("dana", "British English", 190.0, 1.12, 0.15, 0.45, 1.05),
        Voice::new("evan", "Australian English", 130.0, 1.05, 0.08, 0.62, 0.95),
        Voice::new("fern", "Australian English", 240.0, 1.24, 0.10, 0.30, 1.12),
    ]
}

/// Parameters for [`synthesize_corpus`].
#[derive(Clone, Debug)]
pub struct SyntheticCorpus {
    pub voices: Vec<Voice>,
    pub takes_per_digit: u32,
    pub sample_rate: u32,
    pub seed: u64,
}

impl Default for SyntheticCorpus {
    fn default() -> Self {
        SyntheticCorpus {
            voices: default_voices(),
            takes_per_digit: 2,
            sample_rate: 8000,
            seed: 0,
        }
    }
}

impl SyntheticCorpus {
    /// Every take of every digit, in (speaker, digit, index) order.
    pub fn takes(&self) -> Vec<(String, u8, u32, AudioClip)> {
        let mut out = Vec::new();
        for voice in &self.voices {
            for digit in 0..10u8 {
                for index in 0..self.takes_per_digit {
                    let seed = sub_seed(self.seed, &format!("corpus/{}/{digit}/{index}", voice.id));
                    let clip = synthesize_digit(voice, digit, self.sample_rate, seed);
                    out.push((voice.id.clone(), digit, index, clip));
                }
            }
        }
        out
    }

    /// The corpus as [`load_fsdd_corpus`] would read it back, without touching disk.
    pub fn build(&self) -> Corpus {
        let mut corpus = Corpus::new();
        for voice in &self.voices {
            corpus.insert(SnippetLibrary::new(voice.id.clone()), voice.label.clone());
        }
        for (speaker, digit, index, clip) in self.takes() {
            let source = format!("corpus:{digit}_{speaker}_{index}.wav");
            let snippet = DigitSnippet::new(
                digit,
                clip,
                speaker.clone(),
                Provenance::new(ProvenanceKind::ConversationCapture, source),
            )
            .expect("synthesized digits are nonempty");
            corpus
                .library_mut(&speaker)
                .expect("voice registered")
                .merge([&snippet])
                .expect("single speaker");
        }
        corpus
    }

    /// Writes the FSDD files and `speakers.csv` into `dir`.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (speaker, digit, index, clip) in self.takes() {
            write_wav(&clip, dir.join(format!("{digit}_{speaker}_{index}.wav")))?;
        }
        let labels: String = self
            .voices
            .iter()
            .map(|v| format!("{},{}\n", v.id, v.label))
            .collect();
        let path = dir.join(SPEAKER_LABELS_FILE);
        fs::write(&path, labels).map_err(|e| Error::io(&path, e))
    }
}

pub fn synthesize_corpus(synth: &SyntheticCorpus, dir: impl AsRef<Path>) -> Result<Corpus> {
    synth.write(&dir)?;
    load_fsdd_corpus(dir)
}

type Formants = [f64; 3];

/// One articulatory segment: formant glide, voicing and frication levels.
#[derive(Clone, Copy)]
struct Segment {
    ms: f64,
    from: Formants,
    to: Formants,
    voice: (f64, f64),
    noise: f64,
    noise_hz: f64,
}

const I: Formants = [270.0, 2290.0, 3010.0];
const IH: Formants = [390.0, 1990.0, 2550.0];
const EH: Formants = [530.0, 1840.0, 2480.0];
const AA: Formants = [730.0, 1090.0, 2440.0];
const AH: Formants = [640.0, 1190.0, 2390.0];
const AO: Formants = [570.0, 840.0, 2410.0];
const UW: Formants = [300.0, 870.0, 2240.0];
const ER: Formants = [490.0, 1350.0, 1690.0];
const OW: Formants = [450.0, 880.0, 2350.0];
const EY: Formants = [480.0, 1900.0, 2500.0];
const SCHWA: Formants = [500.0, 1500.0, 2500.0];
const W: Formants = [300.0, 610.0, 2150.0];
const N: Formants = [250.0, 1450.0, 2400.0];
const V: Formants = [250.0, 1200.0, 2300.0];

fn vowel(ms: f64, from: Formants, to: Formants, amp: (f64, f64)) -> Segment {
    Segment {
        ms,
        from,
        to,
        voice: amp,
        noise: 0.0,
        noise_hz: 0.0,
    }
}

fn fricative(ms: f64, at: Formants, voice: f64, noise: f64, noise_hz: f64) -> Segment {
    Segment {
        ms,
        from: at,
        to: at,
        voice: (voice, voice),
        noise,
        noise_hz,
    }
}

fn digit_plan(digit: u8) -> Vec<Segment> {
    match digit {
        0 => vec![
            fricative(70.0, IH, 0.3, 0.35, 3300.0),
            vowel(90.0, IH, IH, (0.8, 1.0)),
            vowel(80.0, IH, ER, (1.0, 1.0)),
            vowel(150.0, ER, OW, (1.0, 0.6)),
        ],
        1 => vec![
            vowel(80.0, W, AH, (0.6, 1.0)),
            vowel(170.0, AH, AH, (1.0, 0.9)),
            vowel(90.0, AH, N, (0.6, 0.4)),
        ],
        2 => vec![
            fricative(25.0, UW, 0.0, 0.5, 3000.0),
            vowel(230.0, UW, UW, (1.0, 0.5)),
        ],
        3 => vec![
            fricative(90.0, ER, 0.0, 0.3, 2700.0),
            vowel(80.0, ER, I, (0.8, 1.0)),
            vowel(170.0, I, I, (1.0, 0.6)),
        ],
        4 => vec![
            fricative(90.0, AO, 0.0, 0.3, 2500.0),
            vowel(150.0, AO, AO, (1.0, 1.0)),
            vowel(110.0, AO, ER, (0.9, 0.6)),
        ],
        5 => vec![
            fricative(80.0, AA, 0.0, 0.3, 2500.0),
            vowel(130.0, AA, AA, (1.0, 1.0)),
            vowel(110.0, AA, IH, (1.0, 0.7)),
            fricative(60.0, V, 0.4, 0.2, 2500.0),
        ],
        6 => vec![
            fricative(100.0, IH, 0.0, 0.45, 3400.0),
            vowel(140.0, IH, IH, (1.0, 0.8)),
            fricative(110.0, IH, 0.0, 0.45, 3400.0),
        ],
        7 => vec![
            fricative(90.0, EH, 0.0, 0.45, 3400.0),
            vowel(120.0, EH, EH, (1.0, 1.0)),
            fricative(50.0, V, 0.45, 0.15, 2500.0),
            vowel(70.0, SCHWA, SCHWA, (0.8, 0.8)),
            vowel(80.0, SCHWA, N, (0.6, 0.45)),
        ],
        8 => vec![
            vowel(220.0, EY, [350.0, 2250.0, 2800.0], (1.0, 0.8)),
            fricative(40.0, EY, 0.0, 0.35, 3000.0),
        ],
        _ => vec![
            vowel(70.0, N, N, (0.5, 0.6)),
            vowel(140.0, AA, AA, (1.0, 1.0)),
            vowel(110.0, AA, IH, (1.0, 0.8)),
            vowel(80.0, IH, N, (0.6, 0.5)),
        ],
    }
}

/// Two-pole resonator with unity gain at DC.
#[derive(Default, Clone, Copy)]
struct Resonator {
    y1: f64,
    y2: f64,
}

impl Resonator {
    fn step(&mut self, x: f64, freq: f64, bandwidth: f64, rate: f64) -> f64 {
        let r = (-PI * bandwidth / rate).exp();
        let c = -r * r;
        let b = 2.0 * r * (2.0 * PI * freq / rate).cos();
        let a = 1.0 - b - c;
        let y = a * x + b * self.y1 + c * self.y2;
        self.y2 = self.y1;
        self.y1 = y;
        y
    }
}

const TARGET_RMS: f64 = 0.15;
const EDGE_MS: f64 = 3.0;
const LEVEL_WINDOW_MS: f64 = 20.0;

/// Renders one spoken digit.
///
/// A pulse-train source drives a cascade of three formant resonators; a
/// separate noise source drives one broad resonator for frication. Each path
/// is flattened to unit level with a sliding RMS and then shaped by the
/// segment amplitudes, so loudness follows the plan and not filter gain.
pub fn synthesize_digit(voice: &Voice, digit: u8, sample_rate: u32, seed: u64) -> AudioClip {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rate = f64::from(sample_rate);
    let nyquist = rate / 2.0;
    let f0 = voice.f0 * (1.0 + rng.gen_range(-0.03..0.03));
    let tempo = voice.tempo * (1.0 + rng.gen_range(-0.05..0.05));
    let bandwidths = [80.0, 110.0, 160.0];

    let mut voiced = Vec::new();
    let mut noise = Vec::new();
    let mut voice_env = Vec::new();
    let mut noise_env = Vec::new();
    let mut phase: f64 = 1.0;
    let mut source_lp = 0.0;
    let mut formant_bank = [Resonator::default(); 3];
    let mut frication = Resonator::default();
    for seg in digit_plan(digit) {
        let len = ((seg.ms * tempo / 1000.0) * rate).round() as usize;
        let noise_hz = (seg.noise_hz * voice.formant_scale.sqrt()).min(0.9 * nyquist);
        for n in 0..len {
            let u = n as f64 / len as f64;
            let t = voiced.len() as f64 / rate;
            // Slow declination plus light vibrato.
            let pitch = f0 * (1.0 - 0.15 * t) * (1.0 + 0.01 * (2.0 * PI * 5.0 * t).sin());
            let pulse = if phase >= 1.0 {
                phase -= 1.0;
                1.0
            } else {
                0.0
            };
            phase += pitch / rate;
            let aspiration: f64 = StandardNormal.sample(&mut rng);
            source_lp = voice.tilt * source_lp + (1.0 - voice.tilt) * pulse;
            let mut y = source_lp + voice.breathiness * 0.05 * aspiration;
            for (k, res) in formant_bank.iter_mut().enumerate() {
                let f = (seg.from[k] + (seg.to[k] - seg.from[k]) * u) * voice.formant_scale;
                y = res.step(y, f.min(0.9 * nyquist), bandwidths[k], rate);
            }
            voiced.push(y);
            voice_env.push(seg.voice.0 + (seg.voice.1 - seg.voice.0) * u);

            let hiss: f64 = StandardNormal.sample(&mut rng);
            noise.push(frication.step(hiss, noise_hz.max(1.0), 900.0, rate));
            noise_env.push(seg.noise);
        }
    }

    let window = ((LEVEL_WINDOW_MS / 1000.0) * rate).round() as usize;
    flatten_level(&mut voiced, window);
    flatten_level(&mut noise, window);
    let mut out: Vec<f64> = (0..voiced.len())
        .map(|i| voiced[i] * voice_env[i] + noise[i] * noise_env[i])
        .collect();

    let edge = ((EDGE_MS / 1000.0) * rate).round() as usize;
    let len = out.len();
    for i in 0..edge.min(len / 2) {
        let g = 0.5 - 0.5 * (PI * i as f64 / edge as f64).cos();
        out[i] *= g;
        out[len - 1 - i] *= g;
    }

    let rms = (out.iter().map(|s| s * s).sum::<f64>() / len as f64).sqrt();
    let mut gain = if rms > 0.0 { TARGET_RMS / rms } else { 0.0 };
    let peak = out.iter().fold(0.0f64, |m, s| m.max(s.abs())) * gain;
    if peak > 0.95 {
        gain *= 0.95 / peak;
    }
    // Quantized to the PCM16 grid so a WAV round trip is lossless.
    AudioClip::new(
        out.into_iter()
            .map(|s| (s * gain * 32768.0).round() / 32768.0)
            .collect(),
        sample_rate,
    )
    .expect("normalized samples stay in range")
}

/// Divides by a centred sliding RMS so the signal has roughly unit level.
fn flatten_level(x: &mut [f64], window: usize) {
    let half = window.max(2) / 2;
    let mut prefix = Vec::with_capacity(x.len() + 1);
    prefix.push(0.0);
    for v in x.iter() {
        prefix.push(prefix.last().unwrap() + v * v);
    }
    let level: Vec<f64> = (0..x.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half).min(x.len());
            ((prefix[hi] - prefix[lo]) / (hi - lo) as f64).sqrt()
        })
        .collect();
    for (v, l) in x.iter_mut().zip(level) {
        *v = if l > 1e-9 { *v / l } else { 0.0 };
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fsdd_names() {
        assert_eq!(
            parse_fsdd_name("7_jackson_32.wav"),
            Some((7, "jackson".into(), 32))
        );
        assert_eq!(
            parse_fsdd_name("7_two_part_1.wav"),
            Some((7, "two_part".into(), 1))
        );
        assert_eq!(parse_fsdd_name("12_x_1.wav"), None);
        assert_eq!(parse_fsdd_name("7_x_1.flac"), None);
        assert_eq!(parse_fsdd_name("7__1.wav"), None);
    }

    #[test]
    fn synthetic_digits_are_deterministic_and_plausible() {
        let voice = &default_voices()[0];
        for digit in 0..10 {
            let a = synthesize_digit(voice, digit, 8000, 3);
            assert_eq!(a, synthesize_digit(voice, digit, 8000, 3));
            assert!(
                a.duration_seconds() > 0.2 && a.duration_seconds() < 0.6,
                "{digit}: {}",
                a.duration_seconds()
            );
            assert!(a.samples().iter().all(|s| s.abs() <= 0.95 + 1.0 / 32768.0));
        }
    }

    #[test]
    fn build_matches_disk_round_trip() {
        let synth = SyntheticCorpus {
            voices: default_voices()[..2].to_vec(),
            takes_per_digit: 1,
            ..SyntheticCorpus::default()
        };
        let dir = tempfile::tempdir().unwrap();
        let loaded = synthesize_corpus(&synth, dir.path()).unwrap();
        let built = synth.build();
        assert_eq!(loaded.len(), 2);
        for speaker in built.speakers() {
            let a = loaded.library(speaker).unwrap();
            let b = built.library(speaker).unwrap();
            assert!(a.is_complete() && b.is_complete());
            assert_eq!(loaded.label(speaker), built.label(speaker));
            for d in 0..10 {
                assert_eq!(a.get(d).unwrap().clip(), b.get(d).unwrap().clip());
            }
        }
    }

    #[test]
    fn missing_corpus_dir() {
        assert!(matches!(
            load_fsdd_corpus("/nonexistent/corpus"),
            Err(Error::Io { .. })
        ));
        let empty = tempfile::tempdir().unwrap();
        assert!(matches!(
            load_fsdd_corpus(empty.path()),
            Err(Error::Corpus(_))
        ));
    }
}
