// Copyright 2026 The ceremony-sim Authors
// SPDX-License-Identifier: Apache-2.0

//! End-to-end session-injection attack.
//!
//! 1. Capture: a malicious participant records the victim announcing a code
//!    in a legitimate E2EE meeting; a malicious server instead harvests
//!    labelled digits from cloud recordings of default meetings.
//! 2. Inject: the attacker opens a fresh E2EE meeting under the victim's
//!    name but with its own key, and invites the victim's contacts.
//! 3. Splice: once the injected meeting's code exists the attacker spends
//!    `prep_time_s` pasting stolen digits into an announcement of it.
//! 4. Announce, and let every participant verify.
//! 5. On success, chat and share the screen as the victim.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::audio::{apply_channel, concat_clips, AudioClip, ChannelModel};
use crate::cepstral::{mcd_spliced_vs_original, DigitMcd};
use crate::code::{derive_security_code, IdentityKey, SecurityCode};
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::meeting::{
    Action, CeremonyAnnouncement, Event, MeetingSession, Mitigation, OobChannel, RejectReason,
    SessionState, Verdict, VerifierProfile,
};
use crate::rng::labeled_rng;
use crate::scenario::{AttackerKind, MitigationMode, ScenarioConfig};
use crate::splice::{
    harvest_labeled_recording, splice_digits, synthesize_code_audio, LabeledSpan, Provenance,
    ProvenanceKind, SnippetLibrary,
};

/// Participant id the attacker uses when it attends the victim's meeting.
pub const ATTACKER_ID: &str = "attacker";
const VICTIM_SESSION: &str = "victim-session";
const INJECTED_SESSION: &str = "injected-session";

/// A stored recording with digit labels.
#[derive(Clone, Debug)]
pub struct CloudRecording {
    pub source: String,
    pub speaker: String,
    pub clip: AudioClip,
    pub spans: Vec<LabeledSpan>,
}

#[derive(Clone, Debug)]
pub struct AttackerModel {
    kind: AttackerKind,
    capture_channel: ChannelModel,
    prep_time_s: u64,
    key: IdentityKey,
    library: SnippetLibrary,
    captures: Vec<(AudioClip, Vec<LabeledSpan>)>,
}

impl AttackerModel {
    /// An attacker targeting `victim_name`, with an empty library.
    pub fn new(
        kind: AttackerKind,
        capture_channel: ChannelModel,
        prep_time_s: u64,
        key: IdentityKey,
        victim_name: &str,
    ) -> Self {
        AttackerModel {
            kind,
            capture_channel,
            prep_time_s,
            key,
            library: SnippetLibrary::new(victim_name),
            captures: Vec::new(),
        }
    }

    pub fn kind(&self) -> AttackerKind {
        self.kind
    }

    pub fn library(&self) -> &SnippetLibrary {
        &self.library
    }

    pub fn library_mut(&mut self) -> &mut SnippetLibrary {
        &mut self.library
    }

    pub fn key(&self) -> &IdentityKey {
        &self.key
    }

    pub fn prep_time_s(&self) -> u64 {
        self.prep_time_s
    }

    /// Everything recorded so far, in capture order, with digit spans.
    pub fn captures(&self) -> &[(AudioClip, Vec<LabeledSpan>)] {
        &self.captures
    }

    /// Records the announcement of an E2EE meeting the attacker legitimately joined.
    pub fn observe_ceremony(&mut self, session: &MeetingSession) -> Result<()> {
        if self.kind != AttackerKind::Participant {
            return Err(Error::Capability(
                "a server cannot hear E2EE meeting audio".into(),
            ));
        }
        if !session.is_e2ee() || !session.participants().contains(ATTACKER_ID) {
            return Err(Error::Capability(format!(
                "attacker is not a participant of E2EE session {}",
                session.session_id()
            )));
        }
        let announcement = session.announcement().ok_or(Error::State {
            op: "observe_ceremony",
            state: session.state().to_string(),
        })?;

        let source = announcement.audio();
        let captured = apply_channel(source, &self.capture_channel);
        let spans = rescale_spans(announcement.spans(), source.len(), captured.len());
        let snippets = harvest_labeled_recording(
            &captured,
            &spans,
            session.claimed_host_name(),
            &Provenance::new(ProvenanceKind::CeremonyCapture, session.session_id()),
        )?;
        self.library.merge(&snippets)?;
        self.captures.push((captured, spans));
        Ok(())
    }

    pub fn raid_cloud_recordings(&mut self, store: &[CloudRecording]) -> Result<()> {
        if self.kind != AttackerKind::Server {
            return Err(Error::Capability(
                "a participant cannot read the cloud store".into(),
            ));
        }
        for rec in store {
            let snippets = harvest_labeled_recording(
                &rec.clip,
                &rec.spans,
                &rec.speaker,
                &Provenance::new(ProvenanceKind::CloudRecording, rec.source.clone()),
            )?;
            self.library.merge(&snippets)?;
            self.captures.push((rec.clip.clone(), rec.spans.clone()));
        }
        Ok(())
    }

    /// Opens an E2EE meeting that claims `victim_name` as host but uses the
    /// attacker's key, and sends the invitations.
    pub fn inject_session(
        &self,
        victim_name: &str,
        invitees: &[String],
        mitigation: Mitigation,
    ) -> Result<MeetingSession> {
        if self.library.is_empty() {
            return Err(Error::EmptyLibrary);
        }
        let mut session =
            MeetingSession::create(INJECTED_SESSION, victim_name, self.key, true, mitigation)?;
        for p in invitees {
            session.invite(p)?;
        }
        Ok(session)
    }

    /// All captures joined end to end, spans shifted accordingly.
    fn composite_capture(&self) -> Option<(AudioClip, Vec<LabeledSpan>)> {
        let clips: Vec<AudioClip> = self.captures.iter().map(|(c, _)| c.clone()).collect();
        let audio = concat_clips(&clips, 0.0).ok()?;
        let mut spans = Vec::new();
        let mut offset = 0;
        for (clip, s) in &self.captures {
            spans.extend(s.iter().map(|span| LabeledSpan {
                start: span.start + offset,
                end: span.end + offset,
                digit: span.digit,
            }));
            offset += clip.len();
        }
        Some((audio, spans))
    }
}

fn rescale_spans(spans: &[LabeledSpan], from_len: usize, to_len: usize) -> Vec<LabeledSpan> {
    if from_len == to_len || from_len == 0 {
        return spans.to_vec();
    }
    let scale = |i: usize| {
        ((i as u128 * to_len as u128 + from_len as u128 / 2) / from_len as u128) as usize
    };
    spans
        .iter()
        .map(|s| LabeledSpan {
            start: scale(s.start),
            end: scale(s.end).min(to_len),
            digit: s.digit,
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FailureReason {
    MissingDigit(u8),
    Timeout,
    OobMismatch,
    VoiceMismatch,
    CodeMismatch,
}

impl std::fmt::Display for FailureReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FailureReason::MissingDigit(d) => write!(f, "MissingDigit({d})"),
            other => write!(f, "{other:?}"),
        }
    }
}

impl FailureReason {
    fn from_reject(reason: RejectReason) -> Option<Self> {
        match reason {
            RejectReason::None => None,
            RejectReason::CodeMismatch => Some(FailureReason::CodeMismatch),
            RejectReason::VoiceMismatch { .. } => Some(FailureReason::VoiceMismatch),
            RejectReason::Timeout => Some(FailureReason::Timeout),
            RejectReason::OobMismatch => Some(FailureReason::OobMismatch),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParticipantVerdict {
    pub participant: String,
    pub verdict: Verdict,
}

/// Result of one scenario run, serialized with a fixed field order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AttackOutcome {
    pub victim_speaker: String,
    pub attacker_kind: AttackerKind,
    pub capture_channel: &'static str,
    pub mitigation: &'static str,
    pub victim_code: SecurityCode,
    pub injected_code: SecurityCode,
    pub library_digits: Vec<u8>,
    pub announced: bool,
    pub success: bool,
    pub failure_reason: Option<FailureReason>,
    pub verdicts: Vec<ParticipantVerdict>,
    pub mean_mcd: Option<f64>,
    pub per_digit_mcd: Vec<DigitMcd>,
    pub timeline: Vec<Event>,
}

impl AttackOutcome {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("outcome serializes")
    }

    /// Text record with one line per verdict and MCD value.
    pub fn to_record(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("victim_speaker={}\n", self.victim_speaker));
        out.push_str(&format!("attacker_kind={:?}\n", self.attacker_kind));
        out.push_str(&format!("capture_channel={}\n", self.capture_channel));
        out.push_str(&format!("mitigation={}\n", self.mitigation));
        out.push_str(&format!("victim_code={}\n", self.victim_code));
        out.push_str(&format!("injected_code={}\n", self.injected_code));
        out.push_str(&format!("announced={}\n", self.announced));
        out.push_str(&format!("success={}\n", self.success));
        match self.failure_reason {
            Some(r) => out.push_str(&format!("failure_reason={r}\n")),
            None => out.push_str("failure_reason=None\n"),
        }
        for v in &self.verdicts {
            out.push_str(&format!("verdict {}={}\n", v.participant, v.verdict));
        }
        match self.mean_mcd {
            Some(m) => out.push_str(&format!("mean_mcd={m:.2}\n")),
            None => out.push_str("mean_mcd=NA\n"),
        }
        out
    }
}

/// Keys drawn for a scenario: the victim's and the attacker's.
pub fn scenario_keys(config: &ScenarioConfig) -> Result<(IdentityKey, IdentityKey)> {
    let speaker = &config.victim.speaker;
    let victim = match &config.victim.key_hex {
        Some(hex) => IdentityKey::from_hex(hex)?,
        None => {
            let mut attempt = 0u32;
            loop {
                let mut rng = labeled_rng(config.seed, &format!("victim-key/{speaker}/{attempt}"));
                let key = IdentityKey::random(&mut rng);
                if !config.victim.require_all_digits
                    || derive_security_code(&key).contains_all_digits()
                {
                    break key;
                }
                attempt += 1;
            }
        }
    };
    let attacker = match &config.attacker.key_hex {
        Some(hex) => IdentityKey::from_hex(hex)?,
        None => IdentityKey::random(&mut labeled_rng(
            config.seed,
            &format!("attacker-key/{speaker}"),
        )),
    };
    Ok((victim, attacker))
}

fn first_missing(library: &SnippetLibrary, code: &SecurityCode) -> Option<u8> {
    code.digits()
        .iter()
        .copied()
        .find(|&d| library.get(d).is_none())
}

struct Run {
    victim_code: SecurityCode,
    injected_code: SecurityCode,
    library_digits: Vec<u8>,
    announced: bool,
    failure: Option<FailureReason>,
    verdicts: Vec<ParticipantVerdict>,
    mcd: Option<(f64, Vec<DigitMcd>)>,
    timeline: Vec<Event>,
}

impl Run {
    fn new(victim_code: SecurityCode, injected_code: SecurityCode) -> Self {
        Run {
            victim_code,
            injected_code,
            library_digits: Vec::new(),
            announced: false,
            failure: None,
            verdicts: Vec::new(),
            mcd: None,
            timeline: Vec::new(),
        }
    }
}

/// Runs the whole attack for one scenario against voices from `corpus`.
///
/// Configuration problems are errors; an attack that fails inside the
/// model (missing digits, timeouts, rejections) is a normal outcome.
/// An empty `victim.speaker` selects the first corpus speaker.
pub fn execute_attack(config: &ScenarioConfig, corpus: &Corpus) -> Result<AttackOutcome> {
    config.validate()?;
    let resolved;
    let config = if config.victim.speaker.is_empty() {
        let mut c = config.clone();
        c.victim.speaker = corpus
            .speakers()
            .next()
            .ok_or_else(|| Error::Corpus("corpus has no speakers".into()))?
            .to_string();
        resolved = c;
        &resolved
    } else {
        config
    };
    let victim_voice = corpus.library(&config.victim.speaker)?;
    let source_rate = victim_voice.sample_rate().ok_or_else(|| {
        Error::Corpus(format!(
            "speaker {} has no recordings",
            config.victim.speaker
        ))
    })?;
    let (victim_key, attacker_key) = scenario_keys(config)?;
    let mut run = Run::new(
        derive_security_code(&victim_key),
        derive_security_code(&attacker_key),
    );
    let mitigation = config.mitigation.to_mitigation();

    let outcome = |run: Run| {
        let success = run.failure.is_none()
            && !run.verdicts.is_empty()
            && run.verdicts.iter().all(|v| v.verdict.is_accept());
        AttackOutcome {
            victim_speaker: config.victim.speaker.clone(),
            attacker_kind: config.attacker.kind,
            capture_channel: config.attacker.channel.label(),
            mitigation: mitigation.label(),
            victim_code: run.victim_code,
            injected_code: run.injected_code,
            library_digits: run.library_digits,
            announced: run.announced,
            success,
            failure_reason: run.failure,
            verdicts: run.verdicts,
            mean_mcd: run.mcd.as_ref().map(|m| m.0),
            per_digit_mcd: run.mcd.map(|m| m.1).unwrap_or_default(),
            timeline: run.timeline,
        }
    };

    // 1. Capture.
    let mut attacker = AttackerModel::new(
        config.attacker.kind,
        config.channel_model(source_rate),
        config.attacker.prep_time_s,
        attacker_key,
        &config.victim.name,
    );
    match config.attacker.kind {
        AttackerKind::Participant => {
            if config.victim.e2ee {
                let mut victim_session = MeetingSession::create(
                    VICTIM_SESSION,
                    &config.victim.name,
                    victim_key,
                    true,
                    Mitigation::None,
                )?;
                let mut attendees = vec![ATTACKER_ID.to_string()];
                attendees.extend(config.verifier.participants.iter().cloned());
                for p in &attendees {
                    victim_session.invite(p)?;
                    victim_session.join(p)?;
                }
                let (audio, spans) = match splice_digits(
                    victim_voice,
                    run.victim_code.digits(),
                    config.audio.gap_ms,
                ) {
                    Ok(rendered) => rendered,
                    Err(Error::MissingDigit(d)) => {
                        run.failure = Some(FailureReason::MissingDigit(d));
                        return Ok(outcome(run));
                    }
                    Err(e) => return Err(e),
                };
                let announcement =
                    CeremonyAnnouncement::new(audio, spans, run.victim_code, VICTIM_SESSION)?;
                victim_session.announce_code(announcement, 1)?;
                attacker.observe_ceremony(&victim_session)?;
                victim_session.end();
            }
        }
        AttackerKind::Server => {
            let mut store = Vec::new();
            for (i, digits) in config.victim.cloud_recordings.iter().enumerate() {
                let digits: Vec<u8> = digits.bytes().map(|b| b - b'0').collect();
                match splice_digits(victim_voice, &digits, config.audio.gap_ms) {
                    Ok((clip, spans)) => store.push(CloudRecording {
                        source: format!("cloud-recording-{i}"),
                        speaker: config.victim.name.clone(),
                        clip,
                        spans,
                    }),
                    Err(Error::MissingDigit(d)) => {
                        run.failure = Some(FailureReason::MissingDigit(d));
                        return Ok(outcome(run));
                    }
                    Err(e) => return Err(e),
                }
            }
            attacker.raid_cloud_recordings(&store)?;
        }
    }
    // Verifiers remember the host's voice as it was captured.
    let reference = attacker.library().clone();
    for &d in &config.attacker.drop_digits {
        attacker.library_mut().remove(d);
    }
    run.library_digits = attacker.library().digits();

    // 2. Inject.
    let mut session = match attacker.inject_session(
        &config.victim.name,
        &config.verifier.participants,
        mitigation,
    ) {
        Ok(s) => s,
        Err(Error::EmptyLibrary) => {
            run.failure = Some(FailureReason::MissingDigit(run.injected_code.digits()[0]));
            return Ok(outcome(run));
        }
        Err(e) => return Err(e),
    };

    let voice: &SnippetLibrary = match &config.attacker.impostor_speaker {
        Some(speaker) => corpus.library(speaker)?,
        None => attacker.library(),
    };
    if let Some(d) = first_missing(voice, &run.injected_code) {
        run.failure = Some(FailureReason::MissingDigit(d));
        run.timeline = session.event_log().to_vec();
        return Ok(outcome(run));
    }

    // 3. Wait for the code, then splice.
    session.advance_to(config.verifier.join_after_s)?;
    for p in &config.verifier.participants {
        session.join(p)?;
    }
    let code_at = session
        .code_generated_at()
        .expect("code exists once every invitee has joined");
    let ready_at = code_at + attacker.prep_time_s();
    if let Mitigation::DeferredCodeGeneration {
        max_ceremony_delay_s,
    } = mitigation
    {
        if attacker.prep_time_s() > max_ceremony_delay_s {
            session.expire_ceremony(code_at + max_ceremony_delay_s)?;
            run.verdicts = config
                .verifier
                .participants
                .iter()
                .map(|p| ParticipantVerdict {
                    participant: p.clone(),
                    verdict: Verdict::reject(RejectReason::Timeout),
                })
                .collect();
            run.failure = Some(FailureReason::Timeout);
            run.timeline = session.event_log().to_vec();
            return Ok(outcome(run));
        }
    }
    let (audio, spans) = synthesize_code_audio(voice, &run.injected_code, config.audio.gap_ms)?;

    // 4. Announce and verify.
    let announcement =
        CeremonyAnnouncement::new(audio, spans, run.injected_code, INJECTED_SESSION)?;
    session.announce_code(announcement.clone(), ready_at.max(session.clock()))?;
    run.announced = true;

    let oob = OobChannel::new([(config.victim.name.clone(), victim_key)]);
    let mut verdicts = Vec::with_capacity(config.verifier.participants.len());
    for p in &config.verifier.participants {
        let mut profile =
            VerifierProfile::new(p.clone()).with_threshold(config.verifier.threshold_db);
        profile.params = config.audio.cepstral;
        if config.verifier.use_reference {
            profile.trusted_reference = Some(reference.clone());
        }
        verdicts.push((p.clone(), session.verify_ceremony(&profile, Some(&oob))?));
    }
    let state = session.conclude_ceremony(&verdicts)?;
    run.failure = verdicts
        .iter()
        .find_map(|(_, v)| FailureReason::from_reject(v.reason));
    run.verdicts = verdicts
        .into_iter()
        .map(|(participant, verdict)| ParticipantVerdict {
            participant,
            verdict,
        })
        .collect();

    // 5. Exploit.
    if state == SessionState::Verified {
        let host = session.claimed_host_name().to_string();
        session.post_ceremony_action(&Action::Chat("message from the host".into()), &host)?;
        session.post_ceremony_action(&Action::ScreenShare("host screen".into()), &host)?;
    }

    if let Some((original, original_spans)) = attacker.composite_capture() {
        match mcd_spliced_vs_original(
            &original,
            &original_spans,
            announcement.audio(),
            announcement.spans(),
            &config.audio.cepstral,
        ) {
            Ok(r) => run.mcd = Some((r.mean, r.per_digit)),
            Err(Error::Pairing(_) | Error::RateMismatch { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    run.timeline = session.event_log().to_vec();
    Ok(outcome(run))
}

/// The same scenario under no mitigation, deferred code generation, and
/// out-of-band verification, in that order.
pub fn run_mitigation_matrix(base: &ScenarioConfig, corpus: &Corpus) -> Result<Vec<AttackOutcome>> {
    [
        MitigationMode::None,
        MitigationMode::Deferred,
        MitigationMode::Oob,
    ]
    .iter()
    .map(|&mode| execute_attack(&base.with_mitigation(mode), corpus))
    .collect()
}

/// Independent scenarios in parallel; results keep the input order.
pub fn run_batch(configs: &[ScenarioConfig], corpus: &Corpus) -> Vec<Result<AttackOutcome>> {
    configs
        .par_iter()
        .map(|c| execute_attack(c, corpus))
        .collect()
}

/// Per-digit counts of a library, for reporting.
pub fn library_coverage(library: &SnippetLibrary) -> BTreeMap<u8, bool> {
    (0..10).map(|d| (d, library.get(d).is_some())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::SyntheticCorpus;

    fn corpus() -> Corpus {
        SyntheticCorpus {
            voices: crate::corpus::default_voices()[..2].to_vec(),
            takes_per_digit: 1,
            ..SyntheticCorpus::default()
        }
        .build()
    }

    fn base() -> ScenarioConfig {
        let mut c = ScenarioConfig::default();
        c.victim.speaker = "adam".into();
        c.victim.name = "Adam".into();
        c.victim.require_all_digits = true;
        c
    }

    #[test]
    fn server_cannot_observe_e2ee_and_participant_cannot_raid() {
        let key = IdentityKey::from_bytes(&[3; 32]).unwrap();
        let mut server = AttackerModel::new(
            AttackerKind::Server,
            ChannelModel::Lossless,
            30,
            key,
            "Adam",
        );
        let mut s = MeetingSession::create("v", "Adam", key, true, Mitigation::None).unwrap();
        s.invite(ATTACKER_ID).unwrap();
        s.join(ATTACKER_ID).unwrap();
        assert!(matches!(
            server.observe_ceremony(&s),
            Err(Error::Capability(_))
        ));

        let mut participant = AttackerModel::new(
            AttackerKind::Participant,
            ChannelModel::Lossless,
            30,
            key,
            "Adam",
        );
        assert!(matches!(
            participant.raid_cloud_recordings(&[]),
            Err(Error::Capability(_))
        ));
        server.raid_cloud_recordings(&[]).unwrap();
        assert!(server.library().is_empty());
        assert!(matches!(
            server.inject_session("Adam", &[], Mitigation::None),
            Err(Error::EmptyLibrary)
        ));
    }

    #[test]
    fn participant_must_have_joined() {
        let key = IdentityKey::from_bytes(&[3; 32]).unwrap();
        let mut attacker = AttackerModel::new(
            AttackerKind::Participant,
            ChannelModel::Lossless,
            30,
            key,
            "Adam",
        );
        let s = MeetingSession::create("v", "Adam", key, true, Mitigation::None).unwrap();
        assert!(matches!(
            attacker.observe_ceremony(&s),
            Err(Error::Capability(_))
        ));
    }

    #[test]
    fn server_attack_from_cloud_recordings() {
        let mut c = base();
        c.attacker.kind = AttackerKind::Server;
        c.victim.e2ee = false;
        c.victim.cloud_recordings = vec!["01234".into(), "56789".into()];
        let out = execute_attack(&c, &corpus()).unwrap();
        assert_eq!(out.library_digits, (0..10).collect::<Vec<_>>());
        assert!(out.success, "{}", out.to_record());
        assert_eq!(out.mean_mcd, Some(0.0));
    }

    #[test]
    fn non_e2ee_victim_gives_participant_nothing() {
        let mut c = base();
        c.victim.e2ee = false;
        for out in run_mitigation_matrix(&c, &corpus()).unwrap() {
            assert!(!out.success);
            assert!(matches!(
                out.failure_reason,
                Some(FailureReason::MissingDigit(_))
            ));
            assert!(!out.announced);
        }
    }

    #[test]
    fn rescale_keeps_spans_in_range() {
        let spans = [LabeledSpan {
            start: 10,
            end: 100,
            digit: 1,
        }];
        let r = rescale_spans(&spans, 100, 200);
        assert_eq!(
            r[0],
            LabeledSpan {
                start: 20,
                end: 200,
                digit: 1
            }
        );
    }
}
