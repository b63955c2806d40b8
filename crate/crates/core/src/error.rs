// Copyright 2026 The ceremony-sim Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("identity key must be exactly 32 bytes, got {0}")]
    KeyFormat(usize),
    #[error("identity key is not valid hex: {0}")]
    KeyHex(String),
    #[error("cannot parse security code: {0}")]
    CodeParse(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("unsupported or malformed WAV: {0}")]
    WavFormat(String),
    #[error("sample rate mismatch: {expected} Hz vs {found} Hz")]
    RateMismatch { expected: u32, found: u32 },
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("segmentation found {found} utterances, expected {expected}")]
    SegmentationCount { found: usize, expected: usize },
    #[error("no utterances found (input is silent)")]
    NoUtterances,
    #[error("{clips} clips cannot be labeled with a {digits}-digit code")]
    LabelCount { clips: usize, digits: usize },
    #[error("snippets from different speakers: {0} and {1}")]
    SpeakerMix(String, String),
    #[error("MissingDigit({0})")]
    MissingDigit(u8),
    #[error("span {start}..{end} invalid for clip of {len} samples")]
    Span {
        start: usize,
        end: usize,
        len: usize,
    },

    #[error("clip of {samples} samples is shorter than one {frame_len}-sample frame")]
    TooShort { samples: usize, frame_len: usize },
    #[error("invalid cepstral parameters: {0}")]
    CepstralParams(String),
    #[error("cepstral frames cannot be aligned: {0}")]
    Alignment(String),
    #[error("digit {0} has no source span in the original capture")]
    Pairing(u8),

    #[error("participant {0} cannot join after the ceremony started")]
    LateJoin(String),
    #[error("participant {0} is not invited to this E2EE session")]
    AccessDenied(String),
    #[error("announcement does not spell the session's security code")]
    AnnouncementIntegrity,
    #[error("security code is not available yet")]
    CodeNotReady,
    #[error("operation {op} not allowed in state {state}")]
    State { op: &'static str, state: String },

    #[error("capability violation: {0}")]
    Capability(String),
    #[error("attacker snippet library is empty")]
    EmptyLibrary,

    #[error("config: {0}")]
    Config(String),
    #[error("corpus: {0}")]
    Corpus(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
