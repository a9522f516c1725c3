use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::frame::{make_tight_frame, Coefficients};

fn normalized(x: Vec<f64>) -> Vec<f64> {
    let m = peak(&x);
    x.into_iter().map(|v| v / m).collect()
}

fn tones(len: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let parts: Vec<(f64, f64, f64)> = (0..3)
        .map(|_| {
            (
                rng.random_range(0.02..0.3),
                rng.random_range(0.0..std::f64::consts::TAU),
                rng.random_range(0.3..1.0),
            )
        })
        .collect();
    normalized(
        (0..len)
            .map(|n| {
                parts
                    .iter()
                    .map(|(f, ph, a)| a * (2.0 * std::f64::consts::PI * f * n as f64 + ph).sin())
                    .sum()
            })
            .collect(),
    )
}

fn spec(frame: &FrameSpec, p_t: f64, p_tf: f64, b_t: u32, b_tf: u32, seed: u64) -> EncodeSpec {
    EncodeSpec {
        p_t,
        p_tf,
        b_t,
        b_tf,
        seed,
        frame: frame.clone(),
    }
}

fn reference_config() -> SolverConfig {
    SolverConfig::tight_default()
}

#[test]
fn sdr_examples() {
    let y = [0.3, -0.2, 0.9];
    assert_eq!(sdr(&y, &y).unwrap(), SDR_CAP_DB);
    assert_eq!(sdr(&[1.0, 0.0], &[0.0, 0.0]).unwrap(), 0.0);
    let half: Vec<f64> = y.iter().map(|v| v / 2.0).collect();
    assert!((sdr(&y, &half).unwrap() - 10.0 * 4f64.log10()).abs() < 1e-12);
    assert!(matches!(
        sdr(&[0.0, 0.0], &[1.0, 0.0]),
        Err(Error::ZeroReference)
    ));
    assert!(matches!(
        sdr(&[1.0], &[1.0, 0.0]),
        Err(Error::LengthMismatch { .. })
    ));
}

#[test]
fn time_only_limit() {
    let frame = make_tight_frame(16, 8, 16, 100).unwrap();
    let y = tones(100, 1);
    let payload = encode(&y, &spec(&frame, 1.0, 0.0, 16, 16, 0)).unwrap();
    assert!(payload.time_records.iter().all(|r| r.tag == Tag::Quantized));
    assert!(payload.tf_records.iter().all(|r| r.is_missing()));
    let (box_t, box_tf) = feasible_sets(&payload, &frame).unwrap();
    assert!(box_tf.re().lower().iter().all(|v| *v == f64::NEG_INFINITY));
    // padding is pinned at zero
    assert!(box_t.lower()[100..]
        .iter()
        .chain(&box_t.upper()[100..])
        .all(|v| *v == 0.0));
    assert_eq!(payload.bit_cost(), 100 * 16);
}

#[test]
fn tf_only_limit() {
    let frame = make_tight_frame(16, 8, 16, 96).unwrap();
    let y = tones(96, 2);
    let payload = encode(&y, &spec(&frame, 0.0, 1.0, 16, 16, 0)).unwrap();
    assert!(payload.time_records.iter().all(|r| r.tag == Tag::Missing));
    assert!(payload.tf_records.iter().all(|r| !r.is_missing()));
    assert_eq!(payload.bit_cost(), frame.coefficient_count() as u64 * 16);
}

#[test]
fn bit_cost_matches_the_budget_formula() {
    // P = 32, Q = 64: three groups per frame costing 1 + 2 + 1 reals
    let frame = make_tight_frame(4, 2, 4, 32).unwrap();
    assert_eq!((frame.signal_length(), frame.coefficient_count()), (32, 64));
    let y = tones(32, 3);
    for p_t in [0.0, 0.25, 0.5, 0.75, 1.0] {
        for p_tf in [0.0, 0.25, 0.5, 0.75, 1.0] {
            for (b_t, b_tf) in [(2, 2), (4, 8), (16, 32), (32, 4)] {
                let payload = encode(&y, &spec(&frame, p_t, p_tf, b_t, b_tf, 9)).unwrap();
                let expected = p_t * 32.0 * b_t as f64 + p_tf * 64.0 * b_tf as f64;
                assert_eq!(payload.bit_cost() as f64, expected, "p_t={p_t} p_tf={p_tf}");
            }
        }
    }
}

#[test]
fn largest_coefficients_are_kept() {
    let frame = make_tight_frame(16, 8, 16, 128).unwrap();
    let y = tones(128, 4);
    let payload = encode(&y, &spec(&frame, 0.0, 0.2, 16, 16, 0)).unwrap();
    let coeffs = frame
        .analyze(&frame.pad(&y).unwrap())
        .unwrap()
        .into_values();
    let kept_min = coeffs
        .iter()
        .zip(&payload.tf_records)
        .filter(|(_, r)| !r.is_missing())
        .map(|(c, _)| c.norm())
        .fold(f64::INFINITY, f64::min);
    let dropped_max = coeffs
        .iter()
        .zip(&payload.tf_records)
        .filter(|(_, r)| r.is_missing())
        .map(|(c, _)| c.norm())
        .fold(0.0, f64::max);
    assert!(kept_min >= dropped_max);
    // scale is the largest kept real or imaginary magnitude
    let scale = coeffs
        .iter()
        .zip(&payload.tf_records)
        .filter(|(_, r)| !r.is_missing())
        .map(|(c, _)| c.re.abs().max(c.im.abs()))
        .fold(0.0, f64::max);
    assert!((payload.tf_scale - scale).abs() <= 1e-15 * scale);
}

#[test]
fn tf_records_are_conjugate_mirrored() {
    let frame = make_tight_frame(16, 8, 16, 128).unwrap();
    let y = tones(128, 5);
    let payload = encode(&y, &spec(&frame, 0.3, 0.4, 4, 4, 11)).unwrap();
    payload.validate().unwrap();
    let observed = Coefficients::new(&frame, payload.tf_observation()).unwrap();
    assert!(observed.conjugate_asymmetry(&frame) <= 1e-10);
}

#[test]
fn near_lossless_time_payload() {
    let frame = make_tight_frame(32, 16, 32, 256).unwrap();
    let y = tones(256, 6);
    let payload = encode(&y, &spec(&frame, 1.0, 0.0, 32, 32, 0)).unwrap();
    let out = decode(&payload, Model::Analysis, Algorithm::Tight, &reference_config()).unwrap();
    assert!(sdr(&y, &out.signal).unwrap() >= 90.0);
}

#[test]
fn empty_payload_decodes_to_silence() {
    let frame = make_tight_frame(32, 16, 32, 256).unwrap();
    let y = tones(256, 7);
    let payload = encode(&y, &spec(&frame, 0.0, 0.0, 8, 8, 0)).unwrap();
    assert_eq!(payload.bit_cost(), 0);
    for model in [Model::Analysis, Model::Synthesis] {
        let out = decode(&payload, model, Algorithm::Tight, &reference_config()).unwrap();
        assert!(out.signal.iter().all(|v| *v == 0.0));
    }
}

#[test]
fn decoded_samples_stay_in_their_cells() {
    let frame = make_tight_frame(32, 16, 32, 256).unwrap();
    let y = tones(256, 8);
    let payload = encode(&y, &spec(&frame, 0.5, 0.2, 4, 4, 3)).unwrap();
    for model in [Model::Analysis, Model::Synthesis] {
        for algorithm in [Algorithm::Tight, Algorithm::General] {
            // the two-block iteration keeps the time box exactly; the
            // three-block one only in the limit
            let config = match algorithm {
                Algorithm::Tight => reference_config(),
                Algorithm::General => SolverConfig::general_default()
                    .with_iterations(20_000)
                    .with_tolerance(1e-9),
            };
            let out = decode(&payload, model, algorithm, &config).unwrap();
            for (r, s) in payload.time_records.iter().zip(&out.signal) {
                assert!(
                    *s >= r.lower - 1e-4 && *s <= r.upper + 1e-4,
                    "{model:?} {algorithm:?}"
                );
            }
        }
    }
}

#[test]
fn direct_synthesis_baseline() {
    let frame = make_tight_frame(32, 16, 32, 256).unwrap();
    let y = tones(256, 9);
    let full = encode(&y, &spec(&frame, 0.0, 1.0, 32, 32, 0)).unwrap();
    assert!(sdr(&y, &tf_direct_baseline(&full).unwrap()).unwrap() >= 90.0);
    let none = encode(&y, &spec(&frame, 0.0, 0.0, 32, 32, 0)).unwrap();
    assert!(tf_direct_baseline(&none).unwrap().iter().all(|v| *v == 0.0));
}

#[test]
fn one_atom_baseline_error_is_the_quantization_error() {
    let frame = make_tight_frame(32, 16, 32, 256).unwrap();
    let m = frame.channels();
    let mut z = vec![Complex64::default(); frame.coefficient_count()];
    z[3 * m + 4] = Complex64::new(0.6, -0.35);
    z[3 * m + m - 4] = z[3 * m + 4].conj();
    let y = normalized(frame.synthesize_slice(&z).unwrap());
    let coeffs = frame.analyze(&y).unwrap().into_values();
    let b = 6;
    let payload = encode(&y, &spec(&frame, 0.0, 0.05, b, b, 0)).unwrap();
    let observed = payload.tf_observation();
    // ||A*(c_hat - c)|| <= ||c_hat - c|| with c restricted to the kept set
    let kept_err: f64 = coeffs
        .iter()
        .zip(&observed)
        .zip(&payload.tf_records)
        .filter(|(_, r)| !r.is_missing())
        .map(|((c, o), _)| (c - o).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let dropped: f64 = coeffs
        .iter()
        .zip(&payload.tf_records)
        .filter(|(_, r)| r.is_missing())
        .map(|(c, _)| c.norm_sqr())
        .sum::<f64>()
        .sqrt();
    let out = tf_direct_baseline(&payload).unwrap();
    let err: f64 = out
        .iter()
        .zip(&y)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    let n_kept = payload.kept_tf_reals() as f64;
    let half_step = QuantizerSpec::new(b, payload.tf_scale)
        .unwrap()
        .scaled_step()
        / 2.0;
    assert!(kept_err <= n_kept.sqrt() * half_step);
    assert!(err <= kept_err + dropped + 1e-12);
}

#[test]
fn encoding_and_decoding_are_deterministic() {
    let frame = make_tight_frame(32, 16, 32, 256).unwrap();
    let y = tones(256, 10);
    let s = spec(&frame, 0.4, 0.1, 8, 8, 77);
    let (a, b) = (encode(&y, &s).unwrap(), encode(&y, &s).unwrap());
    assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
    let da = decode(&a, Model::Analysis, Algorithm::Tight, &reference_config()).unwrap();
    let db = decode(&b, Model::Analysis, Algorithm::Tight, &reference_config()).unwrap();
    assert!(da
        .signal
        .iter()
        .zip(&db.signal)
        .all(|(x, y)| x.to_bits() == y.to_bits()));
    let other = encode(&y, &spec(&frame, 0.4, 0.1, 8, 8, 78)).unwrap();
    assert_ne!(a.time_records, other.time_records);
}

#[test]
fn json_round_trip() {
    let frame = make_tight_frame(8, 4, 8, 40).unwrap();
    let y = tones(40, 12);
    let payload = encode(&y, &spec(&frame, 0.5, 0.3, 3, 5, 1)).unwrap();
    let text = payload.to_json().unwrap();
    assert!(text.contains("\"inf\"") && text.contains("\"-inf\""));
    let back = EncodedPayload::from_json(&text).unwrap();
    assert_eq!(back, payload);

    let broken = text.replacen("\"inf\"", "\"huge\"", 1);
    assert!(matches!(
        EncodedPayload::from_json(&broken),
        Err(Error::Payload(_))
    ));
    let mut tampered = payload.clone();
    tampered.tf_records.pop();
    assert!(tampered.validate().is_err());
}

#[test]
fn encoder_rejects_bad_input() {
    let frame = make_tight_frame(8, 4, 8, 16).unwrap();
    let y = tones(16, 13);
    let halved: Vec<f64> = y.iter().map(|v| v / 2.0).collect();
    assert!(matches!(
        encode(&halved, &spec(&frame, 0.5, 0.5, 4, 4, 0)),
        Err(Error::NotNormalized { .. })
    ));
    assert!(encode(&y, &spec(&frame, 1.5, 0.5, 4, 4, 0)).is_err());
    assert!(encode(&y, &spec(&frame, 0.5, -0.1, 4, 4, 0)).is_err());
    assert!(encode(&y, &spec(&frame, 0.5, 0.5, 0, 4, 0)).is_err());
    assert!(encode(&y, &spec(&frame, 0.5, 0.5, 4, 64, 0)).is_err());
}

#[test]
fn finer_quantization_helps_on_average() {
    let frame = make_tight_frame(32, 16, 32, 256).unwrap();
    let mean_sdr = |p_t: f64, p_tf: f64, b: u32| -> f64 {
        (0..10)
            .map(|seed| {
                let y = tones(256, 100 + seed);
                let payload = encode(&y, &spec(&frame, p_t, p_tf, b, b, seed)).unwrap();
                let out =
                    decode(&payload, Model::Analysis, Algorithm::Tight, &reference_config()).unwrap();
                sdr(&y, &out.signal).unwrap()
            })
            .sum::<f64>()
            / 10.0
    };
    // time domain only, then TF domain only
    assert!(mean_sdr(0.6, 0.0, 16) > mean_sdr(0.6, 0.0, 4));
    assert!(mean_sdr(0.0, 0.3, 16) > mean_sdr(0.0, 0.3, 4));
}
