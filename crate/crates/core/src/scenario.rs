// Copyright 2026 The ceremony-sim Authors
// SPDX-License-Identifier: Apache-2.0

//! Scenario configuration files.
//!
//! A scenario is a TOML document with the sections `[victim]`, `[attacker]`,
//! `[mitigation]`, `[verifier]` and `[audio]` (plus `[corpus]` for experiment
//! runs). Every key has a default and unknown keys are rejected.
//!
//! ```toml
//! seed = 7
//!
//! [victim]
//! speaker = "adam"
//! name = "Prof. Adams"
//!
//! [attacker]
//! kind = "participant"
//! channel = "phone"
//! prep_time_s = 30
//!
//! [mitigation]
//! mode = "deferred"
//! max_ceremony_delay_s = 10
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::audio::ChannelModel;
use crate::cepstral::CepstralParams;
use crate::code::IdentityKey;
use crate::error::{Error, Result};
use crate::meeting::{Mitigation, DEFAULT_MCD_THRESHOLD};
use crate::rng::sub_seed;
use crate::segment::SegmentationParams;
use crate::splice::DEFAULT_GAP_MS;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Master seed; every random draw uses a labelled sub-seed of it.
    pub seed: u64,
    pub victim: VictimConfig,
    pub attacker: AttackerConfig,
    pub mitigation: MitigationConfig,
    pub verifier: VerifierConfig,
    pub audio: AudioConfig,
    pub corpus: Option<CorpusConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VictimConfig {
    /// Corpus speaker whose voice the victim host uses.
    pub speaker: String,
    /// Display name the host is known by; the attacker claims it.
    pub name: String,
    /// Whether the victim's own meeting (the capture opportunity) is E2EE.
    pub e2ee: bool,
    pub key_hex: Option<String>,
    /// Redraw the seeded key until its code contains every digit.
    pub require_all_digits: bool,
    /// Digit strings the victim spoke in cloud-recorded default meetings.
    pub cloud_recordings: Vec<String>,
}

impl Default for VictimConfig {
    fn default() -> Self {
        VictimConfig {
            speaker: String::new(),
            name: "host".into(),
            e2ee: true,
            key_hex: None,
            require_all_digits: false,
            cloud_recordings: Vec::new(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackerKind {
    Participant,
    Server,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    Lossless,
    Phone,
}

impl ChannelKind {
    pub fn label(&self) -> &'static str {
        match self {
            ChannelKind::Lossless => "Lossless",
            ChannelKind::Phone => "Phone",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AttackerConfig {
    pub kind: AttackerKind,
    pub channel: ChannelKind,
    /// Phone capture rate; the source rate when absent.
    pub phone_rate: Option<u32>,
    pub phone_snr_db: f64,
    /// Seconds needed to splice an announcement once the code is known.
    pub prep_time_s: u64,
    pub key_hex: Option<String>,
    /// Digits discarded from the stolen library after capture.
    pub drop_digits: Vec<u8>,
    /// Announce in this corpus speaker's own voice instead of splicing.
    pub impostor_speaker: Option<String>,
}

impl Default for AttackerConfig {
    fn default() -> Self {
        AttackerConfig {
            kind: AttackerKind::Participant,
            channel: ChannelKind::Lossless,
            phone_rate: None,
            phone_snr_db: 30.0,
            prep_time_s: 30,
            key_hex: None,
            drop_digits: Vec::new(),
            impostor_speaker: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MitigationMode {
    None,
    Deferred,
    Oob,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MitigationConfig {
    pub mode: MitigationMode,
    pub max_ceremony_delay_s: u64,
}

impl Default for MitigationConfig {
    fn default() -> Self {
        MitigationConfig {
            mode: MitigationMode::None,
            max_ceremony_delay_s: 10,
        }
    }
}

impl MitigationConfig {
    pub fn to_mitigation(&self) -> Mitigation {
        match self.mode {
            MitigationMode::None => Mitigation::None,
            MitigationMode::Deferred => Mitigation::DeferredCodeGeneration {
                max_ceremony_delay_s: self.max_ceremony_delay_s,
            },
            MitigationMode::Oob => Mitigation::OobVerification,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifierConfig {
    pub participants: Vec<String>,
    pub threshold_db: f64,
    /// Verifiers hold the host's voice from the earlier captured session.
    pub use_reference: bool,
    /// When invitees join the injected session, in seconds after creation.
    pub join_after_s: u64,
}

impl Default for VerifierConfig {
    fn default() -> Self {
        VerifierConfig {
            participants: vec!["bob".into(), "carol".into(), "dave".into()],
            threshold_db: DEFAULT_MCD_THRESHOLD,
            use_reference: true,
            join_after_s: 60,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AudioConfig {
    pub gap_ms: f64,
    pub segmentation: SegmentationParams,
    pub cepstral: CepstralParams,
}

impl Default for AudioConfig {
    fn default() -> Self {
        AudioConfig {
            gap_ms: DEFAULT_GAP_MS,
            segmentation: SegmentationParams::default(),
            cepstral: CepstralParams::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusConfig {
    pub dir: PathBuf,
    pub naming: String,
    /// Speakers to run; every corpus speaker when empty.
    pub speakers: Vec<String>,
    pub channels: Vec<ChannelKind>,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            dir: PathBuf::new(),
            naming: "fsdd".into(),
            speakers: Vec::new(),
            channels: vec![ChannelKind::Lossless, ChannelKind::Phone],
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: ScenarioConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Reads a config file; a relative corpus dir is resolved against the file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config = Self::from_toml_str(&text)?;
        if let (Some(corpus), Some(base)) = (config.corpus.as_mut(), path.parent()) {
            if corpus.dir.is_relative() {
                corpus.dir = base.join(&corpus.dir);
            }
        }
        Ok(config)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if let Some(key) = &self.victim.key_hex {
            IdentityKey::from_hex(key)?;
        }
        if let Some(key) = &self.attacker.key_hex {
            IdentityKey::from_hex(key)?;
        }
        for rec in &self.victim.cloud_recordings {
            if rec.is_empty() || !rec.chars().all(|c| c.is_ascii_digit()) {
                return bad("cloud_recordings entries must be nonempty digit strings");
            }
        }
        if self.attacker.drop_digits.iter().any(|&d| d > 9) {
            return bad("drop_digits entries must be 0..=9");
        }
        if self.attacker.phone_rate == Some(0) {
            return bad("phone_rate must be positive");
        }
        if self.attacker.phone_snr_db.is_nan() {
            return bad("phone_snr_db must be a number");
        }
        self.mitigation.to_mitigation().validate()?;
        if self.verifier.participants.is_empty() {
            return bad("at least one verifier participant is required");
        }
        if self.verifier.threshold_db.is_nan() || self.verifier.threshold_db <= 0.0 {
            return bad("threshold_db must be positive");
        }
        if self.audio.gap_ms.is_nan() || self.audio.gap_ms < 0.0 {
            return bad("gap_ms must be nonnegative");
        }
        if let Some(corpus) = &self.corpus {
            if corpus.naming != "fsdd" {
                return bad("only naming = \"fsdd\" is supported");
            }
        }
        Ok(())
    }

    /// The capture channel for this scenario at the given source rate.
    pub fn channel_model(&self, source_rate: u32) -> ChannelModel {
        match self.attacker.channel {
            ChannelKind::Lossless => ChannelModel::Lossless,
            ChannelKind::Phone => ChannelModel::Phone {
                target_rate: self.attacker.phone_rate.unwrap_or(source_rate),
                snr_db: self.attacker.phone_snr_db,
                seed: sub_seed(self.seed, &format!("channel/{}", self.victim.speaker)),
            },
        }
    }

    pub fn with_mitigation(&self, mode: MitigationMode) -> Self {
        let mut next = self.clone();
        next.mitigation.mode = mode;
        next
    }
}
