// Copyright 2026 The ceremony-sim Authors
// SPDX-License-Identifier: Apache-2.0

//! Mono PCM clips, 16-bit WAV I/O and capture-channel models.

use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mono audio with samples in [-1, 1].
#[derive(Clone, Debug, PartialEq)]
pub struct AudioClip {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl AudioClip {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::WavFormat("sample rate must be positive".into()));
        }
        if let Some(s) = samples.iter().find(|s| !(-1.0..=1.0).contains(*s)) {
            return Err(Error::WavFormat(format!("sample {s} outside [-1, 1]")));
        }
        Ok(AudioClip {
            samples,
            sample_rate,
        })
    }

    pub fn silence(len: usize, sample_rate: u32) -> Result<Self> {
        Self::new(vec![0.0; len], sample_rate)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_seconds(&self) -> f64 {
        self.samples.len() as f64 / f64::from(self.sample_rate)
    }

    /// Copy of `start..end`; the range must lie within the clip.
    pub fn slice(&self, start: usize, end: usize) -> Result<AudioClip> {
        if start >= end || end > self.samples.len() {
            return Err(Error::Span {
                start,
                end,
                len: self.samples.len(),
            });
        }
        Ok(AudioClip {
            samples: self.samples[start..end].to_vec(),
            sample_rate: self.sample_rate,
        })
    }

    pub fn ms_to_samples(&self, ms: f64) -> usize {
        ms_to_samples(ms, self.sample_rate)
    }
}

pub(crate) fn ms_to_samples(ms: f64, sample_rate: u32) -> usize {
    (ms * f64::from(sample_rate) / 1000.0).round() as usize
}

const WAV_HEADER_LEN: usize = 44;

pub fn read_wav(path: impl AsRef<Path>) -> Result<AudioClip> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_wav(&bytes)
}

pub fn write_wav(clip: &AudioClip, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_wav(clip)).map_err(|e| Error::io(path, e))
}

/// Canonical 44-byte-header PCM16 mono encoding.
pub fn encode_wav(clip: &AudioClip) -> Vec<u8> {
    let data_len = (clip.len() * 2) as u32;
    let rate = clip.sample_rate;
    let mut out = Vec::with_capacity(WAV_HEADER_LEN + data_len as usize);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes()); // PCM
    out.extend_from_slice(&1u16.to_le_bytes()); // mono
    out.extend_from_slice(&rate.to_le_bytes());
    out.extend_from_slice(&(rate * 2).to_le_bytes());
    out.extend_from_slice(&2u16.to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_len.to_le_bytes());
    for &s in &clip.samples {
        out.extend_from_slice(&quantize(s).to_le_bytes());
    }
    out
}

fn quantize(sample: f64) -> i16 {
    (sample * 32768.0).round().clamp(-32768.0, 32767.0) as i16
}

pub fn decode_wav(bytes: &[u8]) -> Result<AudioClip> {
    let bad = |msg: &str| Error::WavFormat(msg.to_string());
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(bad("missing RIFF/WAVE header"));
    }

    let mut fmt: Option<(u16, u16, u32, u16)> = None;
    let mut data: Option<&[u8]> = None;
    let mut pos = 12;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = u32::from_le_bytes(bytes[pos + 4..pos + 8].try_into().unwrap()) as usize;
        let body_start = pos + 8;
        let body_end = body_start
            .checked_add(size)
            .filter(|&end| end <= bytes.len())
            .ok_or_else(|| bad("chunk extends past end of file"))?;
        let body = &bytes[body_start..body_end];
        match id {
            b"fmt " => {
                if fmt.is_some() {
                    return Err(bad("duplicate fmt chunk"));
                }
                if body.len() < 16 {
                    return Err(bad("fmt chunk too short"));
                }
                let le16 = |o: usize| u16::from_le_bytes([body[o], body[o + 1]]);
                let rate = u32::from_le_bytes(body[4..8].try_into().unwrap());
                fmt = Some((le16(0), le16(2), rate, le16(14)));
            }
            b"data" => {
                if data.is_some() {
                    return Err(bad("more than one data chunk"));
                }
                if fmt.is_none() {
                    return Err(bad("data chunk before fmt chunk"));
                }
                data = Some(body);
            }
            _ => {}
        }
        // Chunks are word aligned.
        pos = body_end + (size & 1);
    }

    let (format_tag, channels, rate, bits) = fmt.ok_or_else(|| bad("missing fmt chunk"))?;
    if format_tag != 1 {
        return Err(Error::WavFormat(format!(
            "format tag {format_tag} is not PCM"
        )));
    }
    if channels != 1 {
        return Err(Error::WavFormat(format!(
            "{channels} channels, expected mono"
        )));
    }
    if bits != 16 {
        return Err(Error::WavFormat(format!(
            "{bits} bits per sample, expected 16"
        )));
    }
    if rate == 0 {
        return Err(bad("zero sample rate"));
    }
    let data = data.ok_or_else(|| bad("missing data chunk"))?;
    if data.len() % 2 != 0 {
        return Err(bad("odd data chunk length"));
    }
    let samples = data
        .chunks_exact(2)
        .map(|b| f64::from(i16::from_le_bytes([b[0], b[1]])) / 32768.0)
        .collect();
    Ok(AudioClip {
        samples,
        sample_rate: rate,
    })
}

/// Joins clips in order with `gap_ms` of digital silence between neighbours.
pub fn concat_clips(clips: &[AudioClip], gap_ms: f64) -> Result<AudioClip> {
    let first = clips
        .first()
        .ok_or(Error::EmptyInput("no clips to concatenate"))?;
    let rate = first.sample_rate;
    if let Some(other) = clips.iter().find(|c| c.sample_rate != rate) {
        return Err(Error::RateMismatch {
            expected: rate,
            found: other.sample_rate,
        });
    }
    let gap = ms_to_samples(gap_ms.max(0.0), rate);
    let total = clips.iter().map(AudioClip::len).sum::<usize>() + gap * (clips.len() - 1);
    let mut samples = Vec::with_capacity(total);
    for (i, clip) in clips.iter().enumerate() {
        if i > 0 {
            samples.resize(samples.len() + gap, 0.0);
        }
        samples.extend_from_slice(&clip.samples);
    }
    Ok(AudioClip {
        samples,
        sample_rate: rate,
    })
}

pub fn rms(clip: &AudioClip) -> Result<f64> {
    if clip.is_empty() {
        return Err(Error::EmptyInput("rms of an empty clip"));
    }
    Ok(rms_of(&clip.samples))
}

pub(crate) fn rms_of(samples: &[f64]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    (samples.iter().map(|s| s * s).sum::<f64>() / samples.len() as f64).sqrt()
}

/// How the attacker's recording of the victim was made.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ChannelModel {
    /// Direct capture of the meeting audio stream.
    Lossless,
    /// An external recorder: resampled to `target_rate`, plus white noise at `snr_db`.
    /// An infinite SNR adds no noise.
    Phone {
        target_rate: u32,
        snr_db: f64,
        seed: u64,
    },
}

impl ChannelModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ChannelModel::Lossless => Ok(()),
            ChannelModel::Phone {
                target_rate,
                snr_db,
                ..
            } => {
                if target_rate == 0 {
                    return Err(Error::Config("phone target_rate must be positive".into()));
                }
                if snr_db.is_nan() || snr_db == f64::NEG_INFINITY {
                    return Err(Error::Config(format!("invalid phone snr_db {snr_db}")));
                }
                Ok(())
            }
        }
    }

    pub fn output_rate(&self, input_rate: u32) -> u32 {
        match *self {
            ChannelModel::Lossless => input_rate,
            ChannelModel::Phone { target_rate, .. } => target_rate,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            ChannelModel::Lossless => "Lossless",
            ChannelModel::Phone { .. } => "Phone",
        }
    }
}

pub fn apply_channel(clip: &AudioClip, model: &ChannelModel) -> AudioClip {
    match *model {
        ChannelModel::Lossless => clip.clone(),
        ChannelModel::Phone {
            target_rate,
            snr_db,
            seed,
        } => {
            let mut samples = resample_linear(&clip.samples, clip.sample_rate, target_rate);
            let signal_power =
                samples.iter().map(|s| s * s).sum::<f64>() / samples.len().max(1) as f64;
            if snr_db.is_finite() && signal_power > 0.0 {
                let noise_std = (signal_power / 10f64.powf(snr_db / 10.0)).sqrt();
                let normal = Normal::new(0.0, noise_std).expect("finite noise level");
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                for s in samples.iter_mut() {
                    *s = (*s + normal.sample(&mut rng)).clamp(-1.0, 1.0);
                }
            }
            AudioClip {
                samples,
                sample_rate: target_rate,
            }
        }
    }
}

fn resample_linear(samples: &[f64], from: u32, to: u32) -> Vec<f64> {
    if from == to || samples.is_empty() {
        return samples.to_vec();
    }
    let out_len =
        ((samples.len() as u64 * u64::from(to) + u64::from(from) / 2) / u64::from(from)) as usize;
    let step = f64::from(from) / f64::from(to);
    let last = samples.len() - 1;
    (0..out_len)
        .map(|i| {
            let t = i as f64 * step;
            let idx = (t.floor() as usize).min(last);
            let frac = t - idx as f64;
            let next = samples[(idx + 1).min(last)];
            samples[idx] + (next - samples[idx]) * frac
        })
        .collect()
}
