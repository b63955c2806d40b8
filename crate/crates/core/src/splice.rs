// Copyright 2026 The ceremony-sim Authors
// SPDX-License-Identifier: Apache-2.0

//! Digit snippets, the attacker's snippet library, and cut-and-paste
//! synthesis of an announcement for an arbitrary code.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::audio::{concat_clips, ms_to_samples, AudioClip};
use crate::code::SecurityCode;
use crate::error::{Error, Result};

/// Default silence between pasted digits.
pub const DEFAULT_GAP_MS: f64 = 150.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProvenanceKind {
    CeremonyCapture,
    CloudRecording,
    ConversationCapture,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub kind: ProvenanceKind,
    pub source: String,
}

impl Provenance {
    pub fn new(kind: ProvenanceKind, source: impl Into<String>) -> Self {
        Provenance {
            kind,
            source: source.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DigitSnippet {
    digit: u8,
    clip: AudioClip,
    speaker_id: String,
    provenance: Provenance,
}

impl DigitSnippet {
    pub fn new(
        digit: u8,
        clip: AudioClip,
        speaker_id: impl Into<String>,
        provenance: Provenance,
    ) -> Result<Self> {
        if digit > 9 {
            return Err(Error::CodeParse(format!("{digit} is not a decimal digit")));
        }
        if clip.is_empty() {
            return Err(Error::EmptyInput("digit snippet clip"));
        }
        Ok(DigitSnippet {
            digit,
            clip,
            speaker_id: speaker_id.into(),
            provenance,
        })
    }

    pub fn digit(&self) -> u8 {
        self.digit
    }

    pub fn clip(&self) -> &AudioClip {
        &self.clip
    }

    pub fn speaker_id(&self) -> &str {
        &self.speaker_id
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }
}

/// One speaker's recorded digits, at most one snippet per digit.
#[derive(Clone, Debug, PartialEq)]
pub struct SnippetLibrary {
    speaker_id: String,
    entries: BTreeMap<u8, DigitSnippet>,
}

impl SnippetLibrary {
    pub fn new(speaker_id: impl Into<String>) -> Self {
        SnippetLibrary {
            speaker_id: speaker_id.into(),
            entries: BTreeMap::new(),
        }
    }

    pub fn speaker_id(&self) -> &str {
        &self.speaker_id
    }

    pub fn get(&self, digit: u8) -> Option<&DigitSnippet> {
        self.entries.get(&digit)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_complete(&self) -> bool {
        (0..10).all(|d| self.entries.contains_key(&d))
    }

    pub fn digits(&self) -> Vec<u8> {
        self.entries.keys().copied().collect()
    }

    pub fn snippets(&self) -> impl Iterator<Item = &DigitSnippet> {
        self.entries.values()
    }

    pub fn sample_rate(&self) -> Option<u32> {
        self.entries.values().next().map(|s| s.clip.sample_rate())
    }

    /// Adds snippets, keeping any digit already present.
    pub fn merge<'a>(
        &mut self,
        snippets: impl IntoIterator<Item = &'a DigitSnippet>,
    ) -> Result<()> {
        for snippet in snippets {
            if snippet.speaker_id != self.speaker_id {
                return Err(Error::SpeakerMix(
                    self.speaker_id.clone(),
                    snippet.speaker_id.clone(),
                ));
            }
            self.entries
                .entry(snippet.digit)
                .or_insert_with(|| snippet.clone());
        }
        Ok(())
    }

    pub fn remove(&mut self, digit: u8) -> Option<DigitSnippet> {
        self.entries.remove(&digit)
    }
}

/// Library from a single speaker's snippets; the earliest snippet of each digit wins.
pub fn build_library(snippets: &[DigitSnippet]) -> Result<SnippetLibrary> {
    let first = snippets
        .first()
        .ok_or(Error::EmptyInput("no snippets to build a library from"))?;
    let mut library = SnippetLibrary::new(first.speaker_id.clone());
    library.merge(snippets)?;
    Ok(library)
}

/// A digit's position within a recording, `start..end` in samples.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledSpan {
    pub start: usize,
    pub end: usize,
    pub digit: u8,
}

impl LabeledSpan {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }
}

impl fmt::Display for LabeledSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.start, self.end, self.digit)
    }
}

/// Checks ordering, bounds and digit range of a recording's spans.
pub fn validate_spans(spans: &[LabeledSpan], clip_len: usize) -> Result<()> {
    let mut prev_end = 0;
    for span in spans {
        if span.start >= span.end || span.end > clip_len || span.start < prev_end || span.digit > 9
        {
            return Err(Error::Span {
                start: span.start,
                end: span.end,
                len: clip_len,
            });
        }
        prev_end = span.end;
    }
    Ok(())
}

pub fn span_digits(spans: &[LabeledSpan]) -> Vec<u8> {
    spans.iter().map(|s| s.digit).collect()
}

/// Labels the i-th clip with the i-th digit of the announced code.
pub fn label_snippets(
    clips: &[AudioClip],
    code: &SecurityCode,
    speaker_id: &str,
    provenance: &Provenance,
) -> Result<Vec<DigitSnippet>> {
    if clips.len() != code.digits().len() {
        return Err(Error::LabelCount {
            clips: clips.len(),
            digits: code.digits().len(),
        });
    }
    clips
        .iter()
        .zip(code.digits())
        .map(|(clip, &digit)| {
            DigitSnippet::new(digit, clip.clone(), speaker_id, provenance.clone())
        })
        .collect()
}

/// Pastes library snippets in `digits` order with `gap_ms` of silence between them.
pub fn splice_digits(
    library: &SnippetLibrary,
    digits: &[u8],
    gap_ms: f64,
) -> Result<(AudioClip, Vec<LabeledSpan>)> {
    let clips = digits
        .iter()
        .map(|&d| {
            library
                .get(d)
                .map(|s| s.clip.clone())
                .ok_or(Error::MissingDigit(d))
        })
        .collect::<Result<Vec<_>>>()?;
    let audio = concat_clips(&clips, gap_ms)?;
    let gap = ms_to_samples(gap_ms.max(0.0), audio.sample_rate());

    let mut spans = Vec::with_capacity(digits.len());
    let mut pos = 0;
    for (clip, &digit) in clips.iter().zip(digits) {
        spans.push(LabeledSpan {
            start: pos,
            end: pos + clip.len(),
            digit,
        });
        pos += clip.len() + gap;
    }
    Ok((audio, spans))
}

pub fn synthesize_code_audio(
    library: &SnippetLibrary,
    code: &SecurityCode,
    gap_ms: f64,
) -> Result<(AudioClip, Vec<LabeledSpan>)> {
    splice_digits(library, code.digits(), gap_ms)
}

/// Cuts every labeled span out of a stored recording.
pub fn harvest_labeled_recording(
    clip: &AudioClip,
    spans: &[LabeledSpan],
    speaker_id: &str,
    provenance: &Provenance,
) -> Result<Vec<DigitSnippet>> {
    validate_spans(spans, clip.len())?;
    spans
        .iter()
        .map(|span| {
            DigitSnippet::new(
                span.digit,
                clip.slice(span.start, span.end)?,
                speaker_id,
                provenance.clone(),
            )
        })
        .collect()
}

pub fn format_spans(spans: &[LabeledSpan]) -> String {
    spans.iter().map(|s| format!("{s}\n")).collect()
}

/// Parses `start_sample,end_sample,digit` records, one per line.
pub fn parse_spans(text: &str) -> Result<Vec<LabeledSpan>> {
    text.lines()
        .enumerate()
        .filter(|(_, line)| !line.trim().is_empty())
        .map(|(n, line)| {
            let bad = || Error::Config(format!("span line {}: {line:?}", n + 1));
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(bad());
            }
            let start = fields[0].parse().map_err(|_| bad())?;
            let end = fields[1].parse().map_err(|_| bad())?;
            let digit: u8 = fields[2].parse().map_err(|_| bad())?;
            if digit > 9 {
                return Err(bad());
            }
            Ok(LabeledSpan { start, end, digit })
        })
        .collect()
}

pub fn read_spans(path: impl AsRef<Path>) -> Result<Vec<LabeledSpan>> {
    let path = path.as_ref();
    parse_spans(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
}

pub fn write_spans(spans: &[LabeledSpan], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_spans(spans)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn snippet(digit: u8, len: usize, speaker: &str) -> DigitSnippet {
        let level = 0.05 * f64::from(digit + 1);
        DigitSnippet::new(
            digit,
            AudioClip::new(vec![level; len], 8000).unwrap(),
            speaker,
            Provenance::new(ProvenanceKind::CeremonyCapture, "s1"),
        )
        .unwrap()
    }

    fn full_library() -> SnippetLibrary {
        let snippets: Vec<_> = (0..10)
            .map(|d| snippet(d, 100 + usize::from(d), "alice"))
            .collect();
        build_library(&snippets).unwrap()
    }

    #[test]
    fn label_count_must_match() {
        let clips = vec![AudioClip::new(vec![0.1; 10], 8000).unwrap(); 39];
        let code = SecurityCode::from_digits(&[0; 40]).unwrap();
        let prov = Provenance::new(ProvenanceKind::CeremonyCapture, "s");
        assert!(matches!(
            label_snippets(&clips, &code, "a", &prov),
            Err(Error::LabelCount {
                clips: 39,
                digits: 40
            })
        ));
        let clips = vec![AudioClip::new(vec![0.1; 10], 8000).unwrap(); 40];
        let labeled = label_snippets(&clips, &code, "a", &prov).unwrap();
        assert!(labeled.iter().all(|s| s.digit() == 0));
    }

    #[test]
    fn library_keeps_first_and_rejects_speaker_mix() {
        let lib =
            build_library(&[snippet(5, 10, "a"), snippet(5, 20, "a"), snippet(1, 5, "a")]).unwrap();
        assert_eq!(lib.get(5).unwrap().clip().len(), 10);
        assert_eq!(lib.len(), 2);
        assert!(!lib.is_complete());
        assert!(matches!(
            build_library(&[snippet(1, 5, "a"), snippet(2, 5, "b")]),
            Err(Error::SpeakerMix(_, _))
        ));
        let partial =
            build_library(&[snippet(1, 5, "a"), snippet(2, 5, "a"), snippet(3, 5, "a")]).unwrap();
        assert_eq!(partial.digits(), vec![1, 2, 3]);
    }

    #[test]
    fn rebuild_from_own_snippets_is_identity() {
        let lib = full_library();
        let snippets: Vec<_> = lib.snippets().cloned().collect();
        assert_eq!(build_library(&snippets).unwrap(), lib);
    }

    #[test]
    fn splice_repeated_digit() {
        let lib = full_library();
        let code = SecurityCode::from_digits(&[5; 40]).unwrap();
        let (audio, spans) = synthesize_code_audio(&lib, &code, 150.0).unwrap();
        let len = lib.get(5).unwrap().clip().len();
        assert_eq!(audio.len(), 40 * len + 39 * 1200);
        assert_eq!(spans.len(), 40);
        for span in &spans {
            assert_eq!(
                &audio.samples()[span.start..span.end],
                lib.get(5).unwrap().clip().samples()
            );
        }
    }

    #[test]
    fn splice_reports_missing_digit() {
        let mut lib = full_library();
        lib.remove(9);
        let code = SecurityCode::parse("15496 82758 80794 35046 66332 13296 70910 85912").unwrap();
        assert!(matches!(
            synthesize_code_audio(&lib, &code, 150.0),
            Err(Error::MissingDigit(9))
        ));
    }

    #[test]
    fn harvest_extracts_and_checks_bounds() {
        let clip = AudioClip::new((0..100).map(|i| f64::from(i) / 200.0).collect(), 8000).unwrap();
        let prov = Provenance::new(ProvenanceKind::CloudRecording, "rec");
        let spans = [
            LabeledSpan {
                start: 0,
                end: 10,
                digit: 0,
            },
            LabeledSpan {
                start: 20,
                end: 30,
                digit: 1,
            },
        ];
        let got = harvest_labeled_recording(&clip, &spans, "bob", &prov).unwrap();
        assert_eq!(got.len(), 2);
        assert_eq!(got[1].clip().samples(), &clip.samples()[20..30]);
        assert_eq!(got[1].provenance().kind, ProvenanceKind::CloudRecording);

        let lib = build_library(&got).unwrap();
        let code = SecurityCode::from_digits(&[7; 40]).unwrap();
        assert!(matches!(
            synthesize_code_audio(&lib, &code, 0.0),
            Err(Error::MissingDigit(7))
        ));

        let beyond = [LabeledSpan {
            start: 90,
            end: 101,
            digit: 2,
        }];
        assert!(matches!(
            harvest_labeled_recording(&clip, &beyond, "bob", &prov),
            Err(Error::Span { .. })
        ));
    }

    #[test]
    fn span_text_round_trip() {
        let spans = vec![
            LabeledSpan {
                start: 0,
                end: 10,
                digit: 4,
            },
            LabeledSpan {
                start: 15,
                end: 40,
                digit: 0,
            },
        ];
        assert_eq!(format_spans(&spans), "0,10,4\n15,40,0\n");
        assert_eq!(parse_spans(&format_spans(&spans)).unwrap(), spans);
        assert!(parse_spans("1,2").is_err());
        assert!(parse_spans("1,2,10").is_err());
    }
}
