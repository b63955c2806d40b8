// Copyright 2026 The ceremony-sim Authors
// SPDX-License-Identifier: Apache-2.0

//! Mel-cepstral features and mel-cepstral distortion (MCD).
//!
//! Each frame goes through pre-emphasis, a Hamming window, an `fft_size`
//! point magnitude spectrum, a triangular mel filterbank, a natural log
//! (energies floored at [`LOG_FLOOR`]) and an orthonormal DCT-II, keeping
//! coefficients 0..=24. MCD between two frames is
//!
//! ```text
//! (10 / ln 10) * sqrt(2 * sum_{d=1..24} (a[d] - b[d])^2)
//! ```
//!
//! so coefficient 0, which tracks loudness, never contributes. An utterance
//! level MCD is the mean over positionally paired frames.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::f64::consts::{LN_10, PI};
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::audio::{ms_to_samples, AudioClip};
use crate::error::{Error, Result};
use crate::splice::LabeledSpan;

pub const NUM_COEFFS: usize = 25;
pub const LOG_FLOOR: f64 = 1e-10;

pub type CepstralVector = [f64; NUM_COEFFS];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CepstralParams {
    pub frame_ms: f64,
    pub hop_ms: f64,
    pub fft_size: usize,
    pub mel_filters: usize,
    pub preemphasis: f64,
}

impl Default for CepstralParams {
    fn default() -> Self {
        CepstralParams {
            frame_ms: 25.0,
            hop_ms: 10.0,
            fft_size: 512,
            mel_filters: 26,
            preemphasis: 0.97,
        }
    }
}

impl CepstralParams {
    pub fn frame_len(&self, sample_rate: u32) -> usize {
        ms_to_samples(self.frame_ms, sample_rate)
    }

    pub fn hop_len(&self, sample_rate: u32) -> usize {
        ms_to_samples(self.hop_ms, sample_rate)
    }

    pub fn validate(&self, sample_rate: u32) -> Result<()> {
        let frame = self.frame_len(sample_rate);
        let bad = |m: String| Err(Error::CepstralParams(m));
        if frame == 0 || self.hop_len(sample_rate) == 0 {
            return bad(format!(
                "frame/hop round to zero samples at {sample_rate} Hz"
            ));
        }
        if self.fft_size < frame {
            return bad(format!("fft_size {} < frame length {frame}", self.fft_size));
        }
        if self.mel_filters < NUM_COEFFS {
            return bad(format!(
                "{} mel filters < {NUM_COEFFS} coefficients",
                self.mel_filters
            ));
        }
        if !self.preemphasis.is_finite() {
            return bad("preemphasis must be finite".into());
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CepstralFrames {
    pub frames: Vec<CepstralVector>,
    pub params: CepstralParams,
    pub sample_rate: u32,
}

impl CepstralFrames {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// The first `n` frames.
    pub fn prefix(&self, n: usize) -> CepstralFrames {
        CepstralFrames {
            frames: self.frames[..n.min(self.frames.len())].to_vec(),
            params: self.params,
            sample_rate: self.sample_rate,
        }
    }
}

/// Precomputed window, filterbank and transform for one rate/params pair.
pub struct MelCepstrum {
    params: CepstralParams,
    sample_rate: u32,
    frame_len: usize,
    hop_len: usize,
    window: Vec<f64>,
    filterbank: Vec<Vec<(usize, f64)>>,
    dct: Vec<Vec<f64>>,
    fft: Arc<dyn Fft<f64>>,
}

impl MelCepstrum {
    pub fn new(params: CepstralParams, sample_rate: u32) -> Result<Self> {
        params.validate(sample_rate)?;
        let frame_len = params.frame_len(sample_rate);
        let window = (0..frame_len)
            .map(|n| {
                if frame_len == 1 {
                    1.0
                } else {
                    0.54 - 0.46 * (2.0 * PI * n as f64 / (frame_len - 1) as f64).cos()
                }
            })
            .collect();
        Ok(MelCepstrum {
            params,
            sample_rate,
            frame_len,
            hop_len: params.hop_len(sample_rate),
            window,
            filterbank: mel_filterbank(params.mel_filters, params.fft_size, sample_rate),
            dct: dct_matrix(params.mel_filters),
            fft: FftPlanner::new().plan_fft_forward(params.fft_size),
        })
    }

    pub fn frame_count(&self, samples: usize) -> usize {
        if samples < self.frame_len {
            0
        } else {
            (samples - self.frame_len) / self.hop_len + 1
        }
    }

    fn check_clip(&self, clip: &AudioClip) -> Result<()> {
        if clip.sample_rate() != self.sample_rate {
            return Err(Error::RateMismatch {
                expected: self.sample_rate,
                found: clip.sample_rate(),
            });
        }
        if clip.len() < self.frame_len {
            return Err(Error::TooShort {
                samples: clip.len(),
                frame_len: self.frame_len,
            });
        }
        Ok(())
    }

    /// `|X_k|` for k in `0..=fft_size/2`, one row per frame.
    pub fn magnitude_frames(&self, clip: &AudioClip) -> Result<Vec<Vec<f64>>> {
        self.check_clip(clip)?;
        let x = clip.samples();
        let bins = self.params.fft_size / 2 + 1;
        let mut buf = vec![Complex::new(0.0, 0.0); self.params.fft_size];
        let mut out = Vec::with_capacity(self.frame_count(x.len()));
        for f in 0..self.frame_count(x.len()) {
            let frame = &x[f * self.hop_len..f * self.hop_len + self.frame_len];
            buf.iter_mut().for_each(|c| *c = Complex::new(0.0, 0.0));
            for (n, slot) in buf.iter_mut().take(self.frame_len).enumerate() {
                let prev = if n == 0 { 0.0 } else { frame[n - 1] };
                let emphasized = frame[n] - self.params.preemphasis * prev;
                *slot = Complex::new(emphasized * self.window[n], 0.0);
            }
            self.fft.process(&mut buf);
            out.push(buf[..bins].iter().map(|c| c.norm()).collect());
        }
        Ok(out)
    }

    pub fn extract(&self, clip: &AudioClip) -> Result<CepstralFrames> {
        let frames = self
            .magnitude_frames(clip)?
            .iter()
            .map(|spectrum| {
                let log_energies: Vec<f64> = self
                    .filterbank
                    .iter()
                    .map(|filter| {
                        let e: f64 = filter.iter().map(|&(k, w)| w * spectrum[k]).sum();
                        e.max(LOG_FLOOR).ln()
                    })
                    .collect();
                let mut v = [0.0; NUM_COEFFS];
                for (d, row) in self.dct.iter().take(NUM_COEFFS).enumerate() {
                    v[d] = row.iter().zip(&log_energies).map(|(c, e)| c * e).sum();
                }
                v
            })
            .collect();
        Ok(CepstralFrames {
            frames,
            params: self.params,
            sample_rate: self.sample_rate,
        })
    }

    pub fn bin_hz(&self, bin: usize) -> f64 {
        bin as f64 * f64::from(self.sample_rate) / self.params.fft_size as f64
    }
}

fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// Sparse triangular filters spanning 0 Hz to Nyquist, equally spaced in mel.
fn mel_filterbank(count: usize, fft_size: usize, sample_rate: u32) -> Vec<Vec<(usize, f64)>> {
    let nyquist = f64::from(sample_rate) / 2.0;
    let top = hz_to_mel(nyquist);
    let edges: Vec<f64> = (0..count + 2)
        .map(|i| mel_to_hz(top * i as f64 / (count + 1) as f64))
        .collect();
    let bin_hz = f64::from(sample_rate) / fft_size as f64;
    (0..count)
        .map(|m| {
            let (lo, mid, hi) = (edges[m], edges[m + 1], edges[m + 2]);
            (0..=fft_size / 2)
                .filter_map(|k| {
                    let f = k as f64 * bin_hz;
                    let w = if f > lo && f <= mid {
                        (f - lo) / (mid - lo)
                    } else if f > mid && f < hi {
                        (hi - f) / (hi - mid)
                    } else {
                        0.0
                    };
                    (w > 0.0).then_some((k, w))
                })
                .collect()
        })
        .collect()
}

/// Orthonormal DCT-II basis rows.
fn dct_matrix(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|k| {
            let scale = if k == 0 {
                (1.0 / n as f64).sqrt()
            } else {
                (2.0 / n as f64).sqrt()
            };
            (0..n)
                .map(|i| scale * (PI * k as f64 * (i as f64 + 0.5) / n as f64).cos())
                .collect()
        })
        .collect()
}

pub fn extract_mcep(clip: &AudioClip, params: &CepstralParams) -> Result<CepstralFrames> {
    MelCepstrum::new(*params, clip.sample_rate())?.extract(clip)
}

const MCD_SCALE: f64 = 10.0 / LN_10;

/// Distortion between two cepstral vectors over dimensions 1..=24, in dB.
pub fn mcd_vector(a: &CepstralVector, b: &CepstralVector) -> f64 {
    let sum: f64 = a[1..]
        .iter()
        .zip(&b[1..])
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    MCD_SCALE * (2.0 * sum).sqrt()
}

/// Mean per-frame MCD over positionally paired frames.
pub fn mcd_frames(a: &CepstralFrames, b: &CepstralFrames) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Alignment(format!(
            "{} vs {} frames",
            a.len(),
            b.len()
        )));
    }
    if a.params != b.params || a.sample_rate != b.sample_rate {
        return Err(Error::Alignment("different analysis parameters".into()));
    }
    if a.is_empty() {
        return Err(Error::Alignment("no frames".into()));
    }
    let total: f64 = a
        .frames
        .iter()
        .zip(&b.frames)
        .map(|(x, y)| mcd_vector(x, y))
        .sum();
    Ok(total / a.len() as f64)
}

/// MCD over the common prefix when the frame counts differ.
pub fn mcd_prefix(a: &CepstralFrames, b: &CepstralFrames) -> Result<f64> {
    let n = a.len().min(b.len());
    mcd_frames(&a.prefix(n), &b.prefix(n))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DigitMcd {
    pub position: usize,
    pub digit: u8,
    pub mcd: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpliceMcd {
    pub per_digit: Vec<DigitMcd>,
    pub mean: f64,
}

/// Compares every spliced digit with the first span of the same digit in the
/// original capture.
pub fn mcd_spliced_vs_original(
    original: &AudioClip,
    original_spans: &[LabeledSpan],
    spliced: &AudioClip,
    spliced_spans: &[LabeledSpan],
    params: &CepstralParams,
) -> Result<SpliceMcd> {
    if original.sample_rate() != spliced.sample_rate() {
        return Err(Error::RateMismatch {
            expected: original.sample_rate(),
            found: spliced.sample_rate(),
        });
    }
    if spliced_spans.is_empty() {
        return Err(Error::EmptyInput("no spliced spans"));
    }
    let analyzer = MelCepstrum::new(*params, original.sample_rate())?;

    let mut sources: BTreeMap<u8, CepstralFrames> = BTreeMap::new();
    let mut per_digit = Vec::with_capacity(spliced_spans.len());
    for (position, span) in spliced_spans.iter().enumerate() {
        let source = match sources.entry(span.digit) {
            Entry::Occupied(e) => e.into_mut(),
            Entry::Vacant(e) => {
                let src = original_spans
                    .iter()
                    .find(|s| s.digit == span.digit)
                    .ok_or(Error::Pairing(span.digit))?;
                e.insert(analyzer.extract(&original.slice(src.start, src.end)?)?)
            }
        };
        let reordered = analyzer.extract(&spliced.slice(span.start, span.end)?)?;
        let mcd = mcd_prefix(&reordered, source)?;
        per_digit.push(DigitMcd {
            position,
            digit: span.digit,
            mcd,
        });
    }
    let mean = per_digit.iter().map(|d| d.mcd).sum::<f64>() / per_digit.len() as f64;
    Ok(SpliceMcd { per_digit, mean })
}
