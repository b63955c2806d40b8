// Copyright 2026 The ceremony-sim Authors
// SPDX-License-Identifier: Apache-2.0

//! Simulated E2EE meetings and their spoken-code authentication ceremony.
//!
//! A [`MeetingSession`] moves through
//! `Created -> Gathering -> CeremonyAnnounced -> Verified | Rejected`, and
//! only a verified session may become `Active` (chat, screen share). Any
//! state may be `Ended`. Illegal calls return an error and leave the
//! session untouched. Time is a virtual clock in whole seconds.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::audio::AudioClip;
use crate::cepstral::{mcd_prefix, CepstralParams, MelCepstrum};
use crate::code::{derive_security_code, IdentityKey, SecurityCode};
use crate::error::{Error, Result};
use crate::splice::{span_digits, validate_spans, LabeledSpan, SnippetLibrary};

/// Default voice-check threshold in dB.
pub const DEFAULT_MCD_THRESHOLD: f64 = 4.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Mitigation {
    None,
    /// The code is derived only once every invitee has joined; participants
    /// give up if no announcement arrives within the delay.
    DeferredCodeGeneration {
        max_ceremony_delay_s: u64,
    },
    /// Verifiers also compare against a code delivered out of band.
    OobVerification,
}

impl Mitigation {
    pub fn validate(&self) -> Result<()> {
        match self {
            Mitigation::DeferredCodeGeneration {
                max_ceremony_delay_s: 0,
            } => Err(Error::Config(
                "max_ceremony_delay_s must be positive".into(),
            )),
            _ => Ok(()),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Mitigation::None => "None",
            Mitigation::DeferredCodeGeneration { .. } => "DeferredCodeGeneration",
            Mitigation::OobVerification => "OobVerification",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SessionState {
    Created,
    Gathering,
    CeremonyAnnounced,
    Verified,
    Rejected,
    Active,
    Ended,
}

impl fmt::Display for SessionState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventKind {
    SessionCreated,
    Invite,
    Join,
    CodeGenerated,
    CeremonyAnnounced,
    Verdict,
    Verified,
    Rejected,
    CeremonyTimeout,
    Chat,
    ScreenShare,
    Ended,
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub time: u64,
    pub actor: String,
    pub kind: EventKind,
    pub detail: String,
}

impl Event {
    /// `time,actor,event_kind,detail` with field separators scrubbed from text.
    pub fn to_line(&self) -> String {
        let clean = |s: &str| s.replace([',', '\n', '\r'], " ");
        format!(
            "{},{},{},{}",
            self.time,
            clean(&self.actor),
            self.kind,
            clean(&self.detail)
        )
    }
}

pub fn export_event_log(events: &[Event]) -> String {
    events.iter().map(|e| e.to_line() + "\n").collect()
}

/// Spoken code plus the ground-truth position of every digit in the audio.
#[derive(Clone, Debug, PartialEq)]
pub struct CeremonyAnnouncement {
    audio: AudioClip,
    spans: Vec<LabeledSpan>,
    announced_code: SecurityCode,
    announcing_session: String,
}

impl CeremonyAnnouncement {
    /// Fails with `AnnouncementIntegrity` unless the spans spell the code.
    pub fn new(
        audio: AudioClip,
        spans: Vec<LabeledSpan>,
        announced_code: SecurityCode,
        announcing_session: impl Into<String>,
    ) -> Result<Self> {
        validate_spans(&spans, audio.len())?;
        if span_digits(&spans) != announced_code.digits() {
            return Err(Error::AnnouncementIntegrity);
        }
        Ok(CeremonyAnnouncement {
            audio,
            spans,
            announced_code,
            announcing_session: announcing_session.into(),
        })
    }

    pub fn audio(&self) -> &AudioClip {
        &self.audio
    }

    pub fn spans(&self) -> &[LabeledSpan] {
        &self.spans
    }

    pub fn announced_code(&self) -> &SecurityCode {
        &self.announced_code
    }

    pub fn announcing_session(&self) -> &str {
        &self.announcing_session
    }
}

/// How one participant judges the ceremony.
#[derive(Clone, Debug)]
pub struct VerifierProfile {
    pub participant_id: String,
    /// The host's voice as this participant heard it in an earlier session.
    pub trusted_reference: Option<SnippetLibrary>,
    pub mcd_threshold: f64,
    pub params: CepstralParams,
}

impl VerifierProfile {
    pub fn new(participant_id: impl Into<String>) -> Self {
        VerifierProfile {
            participant_id: participant_id.into(),
            trusted_reference: None,
            mcd_threshold: DEFAULT_MCD_THRESHOLD,
            params: CepstralParams::default(),
        }
    }

    pub fn with_reference(mut self, reference: SnippetLibrary) -> Self {
        self.trusted_reference = Some(reference);
        self
    }

    pub fn with_threshold(mut self, threshold_db: f64) -> Self {
        self.mcd_threshold = threshold_db;
        self
    }
}

/// Trusted name-to-key directory that feeds the out-of-band code.
/// It is fixed at construction.
#[derive(Clone, Debug, Default)]
pub struct OobChannel {
    binding: BTreeMap<String, IdentityKey>,
}

impl OobChannel {
    pub fn new(binding: impl IntoIterator<Item = (String, IdentityKey)>) -> Self {
        OobChannel {
            binding: binding.into_iter().collect(),
        }
    }

    pub fn code_for(&self, name: &str) -> Option<SecurityCode> {
        self.binding.get(name).map(derive_security_code)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    Accept,
    Reject,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum RejectReason {
    None,
    CodeMismatch,
    VoiceMismatch { max_digit_mcd: f64 },
    Timeout,
    OobMismatch,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub decision: Decision,
    pub reason: RejectReason,
}

impl Verdict {
    pub fn accept() -> Self {
        Verdict {
            decision: Decision::Accept,
            reason: RejectReason::None,
        }
    }

    pub fn reject(reason: RejectReason) -> Self {
        Verdict {
            decision: Decision::Reject,
            reason,
        }
    }

    pub fn is_accept(&self) -> bool {
        self.decision == Decision::Accept
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.reason {
            RejectReason::None => write!(f, "{:?}", self.decision),
            RejectReason::VoiceMismatch { max_digit_mcd } => {
                write!(f, "{:?}(VoiceMismatch({max_digit_mcd:.2}))", self.decision)
            }
            reason => write!(f, "{:?}({reason:?})", self.decision),
        }
    }
}

/// Largest per-digit MCD between the announcement and the verifier's reference.
///
/// Digits missing from the reference are skipped; `None` means nothing could
/// be compared.
pub fn voice_distance(
    announcement: &CeremonyAnnouncement,
    reference: &SnippetLibrary,
    params: &CepstralParams,
) -> Result<Option<f64>> {
    let analyzer = MelCepstrum::new(*params, announcement.audio.sample_rate())?;
    let mut cached = BTreeMap::new();
    let mut worst: Option<f64> = None;
    for span in &announcement.spans {
        let Some(snippet) = reference.get(span.digit) else {
            continue;
        };
        let expected = match cached.entry(span.digit) {
            Entry::Occupied(e) => e.into_mut(),
            Entry::Vacant(e) => e.insert(analyzer.extract(snippet.clip())?),
        };
        let heard = analyzer.extract(&announcement.audio.slice(span.start, span.end)?)?;
        let mcd = mcd_prefix(&heard, expected)?;
        worst = Some(worst.map_or(mcd, |w: f64| w.max(mcd)));
    }
    Ok(worst)
}

/// A participant's judgement of an announcement made on behalf of `claimed_host_name`.
///
/// Checks in order: the digits against the code computed locally from
/// `host_key`, the voice against the verifier's reference, and, when `oob`
/// is given, the digits against the out-of-band code for the claimed name.
pub fn verify_announcement(
    host_key: &IdentityKey,
    claimed_host_name: &str,
    announcement: &CeremonyAnnouncement,
    verifier: &VerifierProfile,
    oob: Option<&OobChannel>,
) -> Result<Verdict> {
    if verifier.mcd_threshold.is_nan() || verifier.mcd_threshold <= 0.0 {
        return Err(Error::Config(
            "verifier mcd_threshold must be positive".into(),
        ));
    }
    let local = derive_security_code(host_key);
    if announcement.announced_code != local {
        return Ok(Verdict::reject(RejectReason::CodeMismatch));
    }
    if let Some(reference) = &verifier.trusted_reference {
        if let Some(max) = voice_distance(announcement, reference, &verifier.params)? {
            if max > verifier.mcd_threshold {
                return Ok(Verdict::reject(RejectReason::VoiceMismatch {
                    max_digit_mcd: max,
                }));
            }
        }
    }
    if let Some(oob) = oob {
        if oob.code_for(claimed_host_name) != Some(local) {
            return Ok(Verdict::reject(RejectReason::OobMismatch));
        }
    }
    Ok(Verdict::accept())
}

#[derive(Clone, Debug)]
pub struct MeetingSession {
    session_id: String,
    claimed_host_name: String,
    host_key: IdentityKey,
    e2ee: bool,
    mitigation: Mitigation,
    security_code: Option<SecurityCode>,
    code_generated_at: Option<u64>,
    invited: BTreeSet<String>,
    participants: BTreeSet<String>,
    state: SessionState,
    clock: u64,
    announcement: Option<CeremonyAnnouncement>,
    event_log: Vec<Event>,
}

impl MeetingSession {
    /// Opens a session at virtual time 0. Without a deferral mitigation an
    /// E2EE session has its code from this moment on.
    pub fn create(
        session_id: impl Into<String>,
        claimed_host_name: impl Into<String>,
        host_key: IdentityKey,
        e2ee: bool,
        mitigation: Mitigation,
    ) -> Result<Self> {
        mitigation.validate()?;
        let mut session = MeetingSession {
            session_id: session_id.into(),
            claimed_host_name: claimed_host_name.into(),
            host_key,
            e2ee,
            mitigation,
            security_code: None,
            code_generated_at: None,
            invited: BTreeSet::new(),
            participants: BTreeSet::new(),
            state: SessionState::Created,
            clock: 0,
            announcement: None,
            event_log: Vec::new(),
        };
        let detail = format!("e2ee={e2ee} mitigation={}", mitigation.label());
        session.log_host(EventKind::SessionCreated, detail);
        if e2ee && !session.is_deferred() {
            session.generate_code();
        }
        Ok(session)
    }

    pub fn session_id(&self) -> &str {
        &self.session_id
    }

    pub fn claimed_host_name(&self) -> &str {
        &self.claimed_host_name
    }

    pub fn host_key(&self) -> &IdentityKey {
        &self.host_key
    }

    pub fn is_e2ee(&self) -> bool {
        self.e2ee
    }

    pub fn mitigation(&self) -> Mitigation {
        self.mitigation
    }

    pub fn security_code(&self) -> Option<&SecurityCode> {
        self.security_code.as_ref()
    }

    pub fn code_generated_at(&self) -> Option<u64> {
        self.code_generated_at
    }

    pub fn participants(&self) -> &BTreeSet<String> {
        &self.participants
    }

    pub fn invited(&self) -> &BTreeSet<String> {
        &self.invited
    }

    pub fn state(&self) -> SessionState {
        self.state
    }

    pub fn clock(&self) -> u64 {
        self.clock
    }

    pub fn announcement(&self) -> Option<&CeremonyAnnouncement> {
        self.announcement.as_ref()
    }

    pub fn event_log(&self) -> &[Event] {
        &self.event_log
    }

    pub fn export_event_log(&self) -> String {
        export_event_log(&self.event_log)
    }

    fn is_deferred(&self) -> bool {
        matches!(self.mitigation, Mitigation::DeferredCodeGeneration { .. })
    }

    fn state_error(&self, op: &'static str) -> Error {
        Error::State {
            op,
            state: self.state.to_string(),
        }
    }

    fn log(&mut self, actor: &str, kind: EventKind, detail: impl Into<String>) {
        self.event_log.push(Event {
            time: self.clock,
            actor: actor.to_string(),
            kind,
            detail: detail.into(),
        });
    }

    fn log_host(&mut self, kind: EventKind, detail: impl Into<String>) {
        let host = self.claimed_host_name.clone();
        self.log(&host, kind, detail);
    }

    fn generate_code(&mut self) {
        let code = derive_security_code(&self.host_key);
        self.security_code = Some(code);
        self.code_generated_at = Some(self.clock);
        self.log("system", EventKind::CodeGenerated, code.format());
    }

    /// Moves the virtual clock forward; it never runs backwards.
    pub fn advance_to(&mut self, time: u64) -> Result<()> {
        if time < self.clock {
            return Err(Error::Config(format!(
                "clock cannot move back from {} to {time}",
                self.clock
            )));
        }
        self.clock = time;
        Ok(())
    }

    pub fn advance(&mut self, seconds: u64) {
        self.clock += seconds;
    }

    /// Records an invitation; the delivery itself always succeeds.
    pub fn invite(&mut self, participant_id: &str) -> Result<()> {
        if !matches!(self.state, SessionState::Created | SessionState::Gathering) {
            return Err(self.state_error("invite"));
        }
        if self.invited.insert(participant_id.to_string()) {
            self.log_host(EventKind::Invite, participant_id);
        }
        Ok(())
    }

    pub fn join(&mut self, participant_id: &str) -> Result<()> {
        if !matches!(self.state, SessionState::Created | SessionState::Gathering) {
            return Err(Error::LateJoin(participant_id.to_string()));
        }
        if self.e2ee && !self.invited.contains(participant_id) {
            return Err(Error::AccessDenied(participant_id.to_string()));
        }
        if !self.participants.insert(participant_id.to_string()) {
            return Ok(());
        }
        self.state = SessionState::Gathering;
        self.log(participant_id, EventKind::Join, "");
        if self.e2ee
            && self.is_deferred()
            && self.security_code.is_none()
            && self.invited.is_subset(&self.participants)
        {
            self.generate_code();
        }
        Ok(())
    }

    pub fn announce_code(
        &mut self,
        announcement: CeremonyAnnouncement,
        at_time: u64,
    ) -> Result<()> {
        if !self.e2ee {
            return Err(self.state_error("announce_code on a non-E2EE session"));
        }
        let code = self.security_code.ok_or(Error::CodeNotReady)?;
        if self.state != SessionState::Gathering {
            return Err(self.state_error("announce_code"));
        }
        if announcement.announced_code != code || announcement.announcing_session != self.session_id
        {
            return Err(Error::AnnouncementIntegrity);
        }
        self.advance_to(at_time)?;
        self.state = SessionState::CeremonyAnnounced;
        self.log_host(EventKind::CeremonyAnnounced, code.format());
        self.announcement = Some(announcement);
        Ok(())
    }

    /// One participant's verdict; does not change the session.
    pub fn verify_ceremony(
        &self,
        verifier: &VerifierProfile,
        oob: Option<&OobChannel>,
    ) -> Result<Verdict> {
        if self.state != SessionState::CeremonyAnnounced {
            return Err(self.state_error("verify_ceremony"));
        }
        let announcement = self
            .announcement
            .as_ref()
            .expect("announced state holds an announcement");
        let oob = match self.mitigation {
            Mitigation::OobVerification => Some(oob.unwrap_or(&EMPTY_OOB)),
            _ => None,
        };
        verify_announcement(
            &self.host_key,
            &self.claimed_host_name,
            announcement,
            verifier,
            oob,
        )
    }

    /// Logs every verdict and moves to `Verified` when all of them accept.
    pub fn conclude_ceremony(&mut self, verdicts: &[(String, Verdict)]) -> Result<SessionState> {
        if self.state != SessionState::CeremonyAnnounced {
            return Err(self.state_error("conclude_ceremony"));
        }
        for (participant, verdict) in verdicts {
            self.log(participant, EventKind::Verdict, verdict.to_string());
        }
        let all_accept = !verdicts.is_empty() && verdicts.iter().all(|(_, v)| v.is_accept());
        if all_accept {
            self.state = SessionState::Verified;
            self.log("system", EventKind::Verified, "");
        } else {
            self.state = SessionState::Rejected;
            self.log("system", EventKind::Rejected, "");
        }
        Ok(self.state)
    }

    /// Participants gave up waiting for the ceremony.
    pub fn expire_ceremony(&mut self, at_time: u64) -> Result<()> {
        if !matches!(self.state, SessionState::Created | SessionState::Gathering) {
            return Err(self.state_error("expire_ceremony"));
        }
        self.advance_to(at_time)?;
        self.log("system", EventKind::CeremonyTimeout, "");
        self.state = SessionState::Ended;
        self.log("system", EventKind::Ended, "");
        Ok(())
    }

    pub fn post_ceremony_action(&mut self, action: &Action, actor: &str) -> Result<()> {
        if !matches!(self.state, SessionState::Verified | SessionState::Active) {
            return Err(self.state_error("post_ceremony_action"));
        }
        self.state = SessionState::Active;
        let (kind, label) = match action {
            Action::Chat(text) => (EventKind::Chat, text),
            Action::ScreenShare(label) => (EventKind::ScreenShare, label),
        };
        self.log(actor, kind, label.clone());
        Ok(())
    }

    pub fn end(&mut self) {
        if self.state != SessionState::Ended {
            self.state = SessionState::Ended;
            self.log("system", EventKind::Ended, "");
        }
    }
}

static EMPTY_OOB: OobChannel = OobChannel {
    binding: BTreeMap::new(),
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Action {
    Chat(String),
    ScreenShare(String),
}

/// True when the log only contains transitions the state machine allows.
pub fn log_respects_transitions(events: &[Event]) -> bool {
    use EventKind::*;
    let mut state = SessionState::Created;
    for e in events {
        state = match (state, e.kind) {
            (SessionState::Created, SessionCreated | Invite | CodeGenerated) => state,
            (SessionState::Created | SessionState::Gathering, Join) => SessionState::Gathering,
            (SessionState::Gathering, Invite | CodeGenerated) => state,
            (SessionState::Gathering, CeremonyAnnounced) => SessionState::CeremonyAnnounced,
            (SessionState::CeremonyAnnounced, Verdict) => state,
            (SessionState::CeremonyAnnounced, Verified) => SessionState::Verified,
            (SessionState::CeremonyAnnounced, Rejected) => SessionState::Rejected,
            (SessionState::Verified | SessionState::Active, Chat | ScreenShare) => {
                SessionState::Active
            }
            (SessionState::Created | SessionState::Gathering, CeremonyTimeout) => state,
            (SessionState::Ended, _) => return false,
            (_, Ended) => SessionState::Ended,
            _ => return false,
        };
    }
    true
}
