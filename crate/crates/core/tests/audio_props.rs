// Copyright 2026 The ceremony-sim Authors
// SPDX-License-Identifier: Apache-2.0

use ceremony_sim::audio::{
    apply_channel, concat_clips, decode_wav, encode_wav, AudioClip, ChannelModel,
};
use proptest::prelude::*;

fn clip_strategy() -> impl Strategy<Value = AudioClip> {
    proptest::collection::vec(-1.0f64..=1.0, 1..400).prop_map(|s| AudioClip::new(s, 8000).unwrap())
}

proptest! {
    #[test]
    fn concat_length(clips in proptest::collection::vec(clip_strategy(), 1..6), gap_ms in 0.0f64..300.0) {
        let gap = (gap_ms * 8000.0 / 1000.0).round() as usize;
        let total: usize = clips.iter().map(AudioClip::len).sum();
        let joined = concat_clips(&clips, gap_ms).unwrap();
        prop_assert_eq!(joined.len(), total + gap * (clips.len() - 1));
    }

    #[test]
    fn wav_round_trip(clip in clip_strategy()) {
        let back = decode_wav(&encode_wav(&clip)).unwrap();
        prop_assert_eq!(back.len(), clip.len());
        prop_assert_eq!(back.sample_rate(), clip.sample_rate());
        for (a, b) in clip.samples().iter().zip(back.samples()) {
            prop_assert!((a - b).abs() <= 1.0 / 32768.0);
        }
    }

    #[test]
    fn lossless_channel_is_identity(clip in clip_strategy()) {
        prop_assert_eq!(apply_channel(&clip, &ChannelModel::Lossless), clip);
    }
}

#[test]
fn phone_snr_within_one_db() {
    let clean = AudioClip::new(
        (0..16000)
            .map(|i| 0.3 * (2.0 * std::f64::consts::PI * 440.0 * i as f64 / 8000.0).sin())
            .collect(),
        8000,
    )
    .unwrap();
    for snr_db in [10.0, 20.0, 30.0] {
        let noisy = apply_channel(
            &clean,
            &ChannelModel::Phone {
                target_rate: 8000,
                snr_db,
                seed: 5,
            },
        );
        let signal: f64 = clean.samples().iter().map(|x| x * x).sum();
        let noise: f64 = clean
            .samples()
            .iter()
            .zip(noisy.samples())
            .map(|(a, b)| (a - b).powi(2))
            .sum();
        let measured = 10.0 * (signal / noise).log10();
        assert!(
            (measured - snr_db).abs() <= 1.0,
            "requested {snr_db}, measured {measured}"
        );
    }
}

#[test]
fn phone_resamples() {
    let clip = AudioClip::silence(8000, 8000).unwrap();
    let out = apply_channel(
        &clip,
        &ChannelModel::Phone {
            target_rate: 16000,
            snr_db: f64::INFINITY,
            seed: 0,
        },
    );
    assert_eq!(out.sample_rate(), 16000);
    assert_eq!(out.len(), 16000);
}
