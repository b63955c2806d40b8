// Copyright 2026 The ceremony-sim Authors
// SPDX-License-Identifier: Apache-2.0

//! Energy-based endpointing of a spoken digit sequence.
//!
//! Frames are marked voiced when their RMS reaches `threshold_ratio` of the
//! loudest frame. Each voiced run is then tightened to sample resolution with
//! a short sliding window at the same absolute threshold, runs closer than
//! `min_gap_ms` are merged, and runs shorter than `min_utterance_ms` dropped.

use serde::{Deserialize, Serialize};

use crate::audio::{ms_to_samples, rms_of, AudioClip};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SegmentationParams {
    pub frame_ms: f64,
    pub hop_ms: f64,
    pub threshold_ratio: f64,
    pub min_gap_ms: f64,
    pub min_utterance_ms: f64,
}

impl Default for SegmentationParams {
    fn default() -> Self {
        SegmentationParams {
            frame_ms: 25.0,
            hop_ms: 10.0,
            threshold_ratio: 0.1,
            min_gap_ms: 100.0,
            min_utterance_ms: 80.0,
        }
    }
}

/// Sample range `start..end` of one detected utterance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Region {
    pub start: usize,
    pub end: usize,
}

pub fn segment_utterances(
    clip: &AudioClip,
    expected_count: usize,
    params: &SegmentationParams,
) -> Result<Vec<AudioClip>> {
    let regions = detect_regions(clip, params)?;
    if regions.len() != expected_count {
        return Err(Error::SegmentationCount {
            found: regions.len(),
            expected: expected_count,
        });
    }
    regions.iter().map(|r| clip.slice(r.start, r.end)).collect()
}

/// Voiced regions in temporal order, without the count check.
pub fn detect_regions(clip: &AudioClip, params: &SegmentationParams) -> Result<Vec<Region>> {
    if clip.is_empty() {
        return Err(Error::EmptyInput("segmentation input"));
    }
    let x = clip.samples();
    let frame = ms_to_samples(params.frame_ms, clip.sample_rate()).max(1);
    let hop = ms_to_samples(params.hop_ms, clip.sample_rate()).max(1);
    let fine = (hop / 4).max(1);

    // The last frame may be partial so the tail of the clip is covered.
    let frames = if x.len() <= frame {
        1
    } else {
        (x.len() - frame).div_ceil(hop) + 1
    };
    let frame_rms: Vec<f64> = (0..frames)
        .map(|i| rms_of(&x[i * hop..(i * hop + frame).min(x.len())]))
        .collect();
    let peak = frame_rms.iter().cloned().fold(0.0, f64::max);
    if peak <= 0.0 {
        return Err(Error::NoUtterances);
    }
    let threshold = params.threshold_ratio * peak;

    let mut coarse = Vec::new();
    let mut run_start = None;
    for (i, &r) in frame_rms.iter().enumerate() {
        match (r >= threshold, run_start) {
            (true, None) => run_start = Some(i),
            (false, Some(s)) => {
                coarse.push((s, i - 1));
                run_start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = run_start {
        coarse.push((s, frame_rms.len() - 1));
    }

    let mut refined: Vec<Region> = Vec::with_capacity(coarse.len());
    for (first, last) in coarse {
        let lo = first * hop;
        let hi = (last * hop + frame).min(x.len());
        if let Some(region) = refine(x, lo, hi, fine, threshold) {
            refined.push(region);
        }
    }

    let min_gap = ms_to_samples(params.min_gap_ms, clip.sample_rate());
    let mut merged: Vec<Region> = Vec::with_capacity(refined.len());
    for region in refined {
        match merged.last_mut() {
            Some(prev) if region.start < prev.end + min_gap => prev.end = prev.end.max(region.end),
            _ => merged.push(region),
        }
    }

    let min_len = ms_to_samples(params.min_utterance_ms, clip.sample_rate());
    merged.retain(|r| r.end - r.start >= min_len);
    if merged.is_empty() {
        return Err(Error::NoUtterances);
    }
    Ok(merged)
}

/// Tightens `lo..hi` to the first and last `win`-sample windows at or above
/// `threshold`, then to the outermost samples inside them that reach it.
fn refine(x: &[f64], lo: usize, hi: usize, win: usize, threshold: f64) -> Option<Region> {
    let loud = |a: usize, b: usize| rms_of(&x[a..b]) >= threshold;
    let first = (lo..hi).find(|&p| loud(p, (p + win).min(hi)))?;
    let last = (first + 1..=hi)
        .rev()
        .find(|&q| loud(q.saturating_sub(win).max(first), q))?;
    let start = (first..(first + win).min(hi))
        .find(|&i| x[i].abs() >= threshold)
        .unwrap_or(first);
    let end = (last.saturating_sub(win).max(start)..last)
        .rev()
        .find(|&i| x[i].abs() >= threshold)
        .map_or(last, |i| i + 1);
    Some(Region { start, end })
}
