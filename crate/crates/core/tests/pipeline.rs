use dualdomain::degradation::Degradation;
use dualdomain::solver::{
    cv_generic, BoxIndicator, CvProblem, CvTerm, GaborAnalysisOperator, IdentityOperator,
    MagnitudeL1,
};
use dualdomain::{
    make_tight_frame, sdr, solve_general, solve_tight, BoxConstraint, ComplexBox, Model, Primal,
    ProblemSpec, QuantizerSpec, SolverConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn test_signal(len: usize) -> Vec<f64> {
    let x: Vec<f64> = (0..len)
        .map(|n| {
            let t = n as f64;
            (0.11 * t).sin() + 0.5 * (0.37 * t + 1.0).sin()
        })
        .collect();
    let peak = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    x.into_iter().map(|v| v / peak).collect()
}

#[test]
fn generic_iteration_reproduces_the_three_block_solver() {
    let frame = make_tight_frame(16, 8, 16, 64).unwrap();
    let y = test_signal(frame.signal_length());
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let keep: Vec<bool> = (0..y.len()).map(|_| rng.random_bool(0.6)).collect();
    let (obs, t_records) = Degradation {
        keep: Some(keep),
        quantizer: Some(QuantizerSpec::new(6, 1.0).unwrap()),
        ..Default::default()
    }
    .apply(&y)
    .unwrap();
    let coeffs = frame.analyze(&y).unwrap().into_values();
    let pairs = frame.conjugate_pairs();
    let tf_keep: Vec<bool> = (0..pairs.len()).map(|i| i % 5 == 0).collect();
    let tf_records = Degradation {
        keep: Some(tf_keep),
        quantizer: Some(QuantizerSpec::for_batch(5, &coeffs).unwrap()),
        ..Default::default()
    }
    .apply_conjugate(&coeffs, &pairs)
    .unwrap();
    let box_t = BoxConstraint::from_records(&t_records).unwrap();
    let box_tf = ComplexBox::from_records(&tf_records).unwrap();

    let problem = ProblemSpec::new(
        frame.clone(),
        Model::Analysis,
        box_t.clone(),
        box_tf.clone(),
    )
    .unwrap();
    let config = SolverConfig::general_default().with_iterations(200);
    let (reference, _) = solve_general(&problem, &config, Primal::Time(obs.clone())).unwrap();

    // the same problem spelled out term by term on R^P
    let interleave = |a: &[f64], b: &[f64]| {
        a.iter()
            .zip(b)
            .flat_map(|(x, y)| [*x, *y])
            .collect::<Vec<_>>()
    };
    let tf_flat = BoxConstraint::new(
        interleave(box_tf.re().lower(), box_tf.im().lower()),
        interleave(box_tf.re().upper(), box_tf.im().upper()),
    )
    .unwrap();
    let analysis = GaborAnalysisOperator(&frame);
    let identity = IdentityOperator(frame.signal_length());
    let l1 = MagnitudeL1 {
        group: 2,
        weights: None,
    };
    let tf_set = BoxIndicator(&tf_flat);
    let t_set = BoxIndicator(&box_t);
    let generic = CvProblem {
        smooth: None,
        prox_g: None,
        terms: vec![
            CvTerm {
                function: &l1,
                operator: &analysis,
            },
            CvTerm {
                function: &t_set,
                operator: &identity,
            },
            CvTerm {
                function: &tf_set,
                operator: &analysis,
            },
        ],
    };
    let out = cv_generic(&generic, &config, &obs, None).unwrap();
    let diff = out
        .primal
        .iter()
        .zip(&reference.signal)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(diff < 1e-10, "{diff}");
}

/// Two tones at 440 Hz and 1230 Hz for a 44.1 kHz rate.
fn two_tones(len: usize) -> Vec<f64> {
    let w = 2.0 * std::f64::consts::PI / 44100.0;
    let x: Vec<f64> = (0..len)
        .map(|n| (w * 440.0 * n as f64).sin() + 0.6 * (w * 1230.0 * n as f64 + 1.0).sin())
        .collect();
    let peak = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    x.into_iter().map(|v| v / peak).collect()
}

#[test]
fn declipping_improves_sdr_in_both_models() {
    let frame = make_tight_frame(1024, 512, 1024, 8192).unwrap();
    let y = two_tones(frame.signal_length());
    let (obs, records) = Degradation {
        clip_theta: Some(0.5),
        ..Default::default()
    }
    .apply(&y)
    .unwrap();
    let before = sdr(&y, &obs).unwrap();
    for model in [Model::Analysis, Model::Synthesis] {
        let problem = ProblemSpec::new(
            frame.clone(),
            model,
            BoxConstraint::from_records(&records).unwrap(),
            ComplexBox::unbounded(frame.coefficient_count()),
        )
        .unwrap();
        let init = Primal::from_observation(model, &frame, &obs).unwrap();
        let (sol, report) = solve_tight(&problem, &SolverConfig::tight_default(), init).unwrap();
        assert!(report.dist_t <= 1e-9);
        let after = sdr(&y, &sol.signal).unwrap();
        assert!(after > before + 3.0, "{model:?}: {before} -> {after}");
    }
}
