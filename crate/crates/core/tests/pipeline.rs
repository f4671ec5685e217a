use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stegowave_core::pipeline::{self, error_dispersion, max_blob_len, EmbedParams, TestPayload};
use stegowave_core::{embed, extract, Error, GrayImage, SecretKey};

/// Smooth textured cover kept away from the clamp limits.
fn synthetic_cover(side: usize, seed: u64) -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    GrayImage::from_fn(side, |r, c| {
        let (x, y) = (r as f64, c as f64);
        let base = 128.0 + 45.0 * (x * 0.09).sin() * (y * 0.13).cos() + 0.4 * (x - y);
        (base + rng.random_range(-2.0..2.0))
            .round()
            .clamp(30.0, 225.0) as u8
    })
    .unwrap()
}

fn key(seed: u8) -> SecretKey {
    SecretKey::new([seed; 16])
}

#[test]
fn round_trip_each_bps() {
    let cover = synthetic_cover(64, 1);
    for bps in 1..=3u8 {
        let max = stegowave_core::CodingScheme::new(bps).unwrap().max_level();
        let params = EmbedParams::new(max + 3.5, bps);
        let payload: Vec<u8> = (0..40u8).collect();
        let out = embed(&cover, &payload, &key(9), &params, &[5; 16]).unwrap();
        assert_eq!(out.stego.side(), cover.side());
        assert_eq!(extract(&out.stego, &key(9), &params).unwrap(), payload);
        assert!(out.stats.used_bits <= out.stats.slot_count * usize::from(bps));
    }
}

#[test]
fn empty_payload_round_trips() {
    let cover = synthetic_cover(64, 2);
    let params = EmbedParams::new(20.0, 2);
    let out = embed(&cover, &[], &key(1), &params, &[0; 16]).unwrap();
    assert_eq!(
        extract(&out.stego, &key(1), &params).unwrap(),
        Vec::<u8>::new()
    );
    // 14-byte header + IV + one padded block of the 9-byte raw blob
    assert_eq!(out.stats.used_bits, 46 * 8);
}

#[test]
fn capacity_boundary() {
    let cover = synthetic_cover(64, 3);
    let params = EmbedParams::new(20.0, 2);
    let probe = embed(&cover, &[], &key(2), &params, &[0; 16]).unwrap();
    let max_raw = pipeline::max_raw_payload_len(probe.stats.capacity_bytes).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut payload = vec![0u8; max_raw];
    rng.fill_bytes(&mut payload);
    let out = embed(&cover, &payload, &key(2), &params, &[1; 16]).unwrap();
    assert_eq!(extract(&out.stego, &key(2), &params).unwrap(), payload);

    // One more byte than the largest blob that fits needs another cipher block.
    let blob_max = max_blob_len(probe.stats.capacity_bytes).unwrap();
    let mut too_big = vec![0u8; blob_max + 1 - stegowave_core::codec::HEADER_LEN];
    rng.fill_bytes(&mut too_big);
    match embed(&cover, &too_big, &key(2), &params, &[1; 16]) {
        Err(Error::CapacityExceeded {
            required,
            available,
        }) => {
            assert!(required > available);
            assert_eq!(available, probe.stats.slot_count * 2);
        }
        other => panic!("expected capacity error, got {other:?}"),
    }
}

#[test]
fn strict_mode_rejects_small_k() {
    let cover = synthetic_cover(32, 4);
    let err = embed(&cover, b"x", &key(0), &EmbedParams::new(5.0, 2), &[0; 16]).unwrap_err();
    assert!(matches!(err, Error::InvalidParams(_)));
}

#[test]
fn strict_self_check_rejects_clamped_cover() {
    // Saturated checkerboard: inverse values land far outside [0, 255].
    let cover = GrayImage::from_fn(32, |r, c| if (r + c) % 2 == 0 { 0 } else { 255 }).unwrap();
    let payload = vec![0xa5u8; 20];
    let params = EmbedParams::new(30.0, 3);
    let strict = embed(&cover, &payload, &key(5), &params, &[0; 16]);
    let loose = embed(
        &cover,
        &payload,
        &key(5),
        &EmbedParams {
            strict: false,
            ..params
        },
        &[0; 16],
    );
    match strict {
        Err(Error::SelfCheckFailed) => {
            let stego = loose.unwrap().stego;
            assert!(extract(&stego, &key(5), &params).is_err());
        }
        Ok(out) => assert_eq!(extract(&out.stego, &key(5), &params).unwrap(), payload),
        Err(e) => panic!("unexpected {e:?}"),
    }
}

#[test]
fn plain_cover_has_no_frame() {
    for seed in 0..10 {
        let cover = synthetic_cover(64, 100 + seed);
        for bps in 1..=3 {
            let params = EmbedParams::new(20.0, bps);
            assert_eq!(extract(&cover, &key(0), &params), Err(Error::NoFrame));
        }
    }
}

#[test]
fn wrong_key_is_detected() {
    let cover = synthetic_cover(64, 7);
    let params = EmbedParams::new(20.0, 2);
    let payload = b"attack at dawn".to_vec();
    let out = embed(&cover, &payload, &key(1), &params, &[2; 16]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let mut wrong = [0u8; 16];
        rng.fill_bytes(&mut wrong);
        if wrong == [1; 16] {
            continue;
        }
        match extract(&out.stego, &SecretKey::new(wrong), &params) {
            Err(Error::Padding) | Err(Error::CrcMismatch) => {}
            other => panic!("wrong key gave {other:?}"),
        }
    }
}

#[test]
fn mismatched_params_fail_loudly() {
    let cover = synthetic_cover(64, 8);
    let params = EmbedParams::new(20.0, 2);
    let out = embed(&cover, b"payload", &key(3), &params, &[2; 16]).unwrap();
    let wrong_bps = EmbedParams::new(20.0, 1);
    assert!(extract(&out.stego, &key(3), &wrong_bps).is_err());
}

#[test]
fn separation_holds_at_boundaries() {
    // Any perturbation within epsilon keeps symbols below and preserved
    // coefficients at or above the detection cutoff when k >= max + 2 epsilon.
    for bps in 1..=3u8 {
        let scheme = stegowave_core::CodingScheme::new(bps).unwrap();
        let max = scheme.max_level();
        for extra in [0.0, 0.25, 3.0, 17.0] {
            let params = EmbedParams::new(max + 2.0 * 1.5 + extra, bps);
            let cutoff = params.detect_threshold().unwrap();
            let eps = params.epsilon * (1.0 - 1e-12);
            for m in 0..scheme.level_count() {
                for e in [-eps, 0.0, eps] {
                    let v = scheme.level(m) + e;
                    assert!(v.abs() < cutoff, "symbol {v} vs {cutoff}");
                    assert_eq!(scheme.slice(v), m);
                }
            }
            for s in [params.k, -params.k, params.k + 50.0] {
                for e in [-eps, eps] {
                    let v: f64 = s + e;
                    assert!(v.abs() >= cutoff, "preserved {v} vs {cutoff}");
                }
            }
        }
    }
}

#[test]
fn constant_cover_has_zero_dispersion() {
    for side in [8, 64, 256] {
        let cover = GrayImage::filled(side, 137).unwrap();
        let params = EmbedParams::new(5.0, 2);
        let r = error_dispersion(&cover, &params, 1, TestPayload::Silent).unwrap();
        assert_eq!(r.max_abs, 0.0, "side {side}");
        assert_eq!(r.within_epsilon, 1.0);
    }
}

#[test]
fn random_dispersion_report_is_consistent() {
    let cover = synthetic_cover(64, 9);
    let params = EmbedParams::new(20.0, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let r = error_dispersion(&cover, &params, 3, TestPayload::Random(&mut rng)).unwrap();
    assert_eq!(r.samples, 3 * 64 * 64);
    assert!(r.max_abs >= r.p99_abs);
    assert!(r.within_epsilon > 0.99);
    assert_eq!(r.histogram.counts.iter().sum::<u64>() as usize, r.samples);
    assert!(error_dispersion(&cover, &params, 0, TestPayload::Silent).is_err());
}

#[test]
fn embedding_is_deterministic() {
    let cover = synthetic_cover(64, 10);
    let params = EmbedParams::new(14.0, 3);
    let a = embed(&cover, b"same", &key(4), &params, &[8; 16]).unwrap();
    let b = embed(&cover, b"same", &key(4), &params, &[8; 16]).unwrap();
    assert_eq!(a, b);
}
