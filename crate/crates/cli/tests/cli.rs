use std::path::Path;
use std::process::{Command, Output};

use dualdomain_cli::experiment::CSV_HEADER;
use dualdomain_cli::signals::{multitone, two_tone};
use dualdomain_cli::wav::{load_wav, save_wav};
use serde_json::Value;

fn dualdomain(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dualdomain"))
        .args(args)
        .env_remove("DUALDOMAIN_JOBS")
        .output()
        .expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn small_frame() -> [&'static str; 6] {
    [
        "--window-length",
        "256",
        "--hop",
        "128",
        "--channels",
        "256",
    ]
}

#[test]
fn missing_input_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.wav");
    let result = dualdomain(&["reconstruct", "--clip-theta", "0.5", "--output", path(&out)]);
    assert_eq!(result.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&result.stderr).contains("--input"));
}

#[test]
fn unreadable_input_fails_with_status_one() {
    let dir = tempfile::tempdir().unwrap();
    let result = dualdomain(&[
        "reconstruct",
        "--input",
        path(&dir.path().join("absent.wav")),
        "--output",
        path(&dir.path().join("out.wav")),
    ]);
    assert_eq!(result.status.code(), Some(1));
}

#[test]
fn declipping_run_writes_a_feasible_reconstruction() {
    let dir = tempfile::tempdir().unwrap();
    let clean = dir.path().join("clean.wav");
    let out = dir.path().join("out.wav");
    let report = dir.path().join("report.json");
    save_wav(&clean, &two_tone(4096, 44100, 440.0, 1230.0), 44100).unwrap();
    let mut args = vec![
        "reconstruct",
        "--input",
        path(&clean),
        "--clip-theta",
        "0.5",
        "--model",
        "analysis",
        "--iterations",
        "300",
        "--output",
        path(&out),
        "--report",
        path(&report),
        "--reference",
        path(&clean),
    ];
    args.extend(small_frame());
    let result = dualdomain(&args);
    assert!(
        result.status.success(),
        "{}",
        String::from_utf8_lossy(&result.stderr)
    );
    let json: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert!(json["dist_t"].as_f64().unwrap() <= 1e-4);
    assert_eq!(json["iterations_run"].as_u64(), Some(300));
    assert!(json["sdr_db"].as_f64().unwrap() > json["degraded_sdr_db"].as_f64().unwrap());
    let audio = load_wav(&out).unwrap();
    assert_eq!((audio.samples.len(), audio.sample_rate), (4096, 44100));
}

#[test]
fn encoded_payload_can_be_reconstructed() {
    let dir = tempfile::tempdir().unwrap();
    let clean = dir.path().join("clean.wav");
    let payload = dir.path().join("payload.json");
    let out = dir.path().join("out.wav");
    save_wav(&clean, &multitone(2, 2048, 44100, 3, 60.0), 44100).unwrap();
    let mut args = vec![
        "encode",
        "--input",
        path(&clean),
        "--output",
        path(&payload),
        "--p-t",
        "0.5",
        "--p-tf",
        "0.1",
        "--b-t",
        "16",
        "--b-tf",
        "16",
    ];
    args.extend(small_frame());
    let result = dualdomain(&args);
    assert!(
        result.status.success(),
        "{}",
        String::from_utf8_lossy(&result.stderr)
    );
    assert!(String::from_utf8_lossy(&result.stdout).contains("bits"));

    let result = dualdomain(&[
        "reconstruct",
        "--payload",
        path(&payload),
        "--iterations",
        "50",
        "--sample-rate",
        "22050",
        "--output",
        path(&out),
    ]);
    assert!(
        result.status.success(),
        "{}",
        String::from_utf8_lossy(&result.stderr)
    );
    let report: Value = serde_json::from_slice(&result.stdout).unwrap();
    assert!(report["dist_t"].as_f64().unwrap() <= 1e-3);
    let audio = load_wav(&out).unwrap();
    assert_eq!((audio.samples.len(), audio.sample_rate), (2048, 22050));
}

#[test]
fn empty_grid_writes_a_header_only_csv() {
    let dir = tempfile::tempdir().unwrap();
    let wav = dir.path().join("a.wav");
    let config = dir.path().join("grid.json");
    let csv = dir.path().join("out.csv");
    save_wav(&wav, &multitone(1, 4410, 44100, 3, 60.0), 44100).unwrap();
    std::fs::write(&config, "{}").unwrap();
    let result = dualdomain(&[
        "experiment",
        path(&config),
        path(&wav),
        "--output",
        path(&csv),
    ]);
    assert!(
        result.status.success(),
        "{}",
        String::from_utf8_lossy(&result.stderr)
    );
    assert_eq!(
        std::fs::read_to_string(&csv).unwrap(),
        CSV_HEADER.join(",") + "\n"
    );
}

#[test]
fn experiment_rows_follow_the_grid_and_bit_budget() {
    let dir = tempfile::tempdir().unwrap();
    let wav = dir.path().join("tones.wav");
    let config = dir.path().join("grid.json");
    let csv = dir.path().join("out.csv");
    save_wav(&wav, &multitone(1, 4410, 44100, 3, 60.0), 44100).unwrap();
    std::fs::write(
        &config,
        r#"{"p_t": [0.2, 0.5], "p_tf": [0.0], "bits": [4, 8], "iterations": 20,
            "excerpt_seconds": 0.05, "frame": {"window_length": 64, "hop": 32, "channels": 64}}"#,
    )
    .unwrap();
    let result = dualdomain(&[
        "experiment",
        path(&config),
        path(&wav),
        "--output",
        path(&csv),
        "--jobs",
        "2",
    ]);
    assert!(
        result.status.success(),
        "{}",
        String::from_utf8_lossy(&result.stderr)
    );
    let mut reader = csv::Reader::from_path(&csv).unwrap();
    assert_eq!(
        reader.headers().unwrap().iter().collect::<Vec<_>>(),
        CSV_HEADER.to_vec()
    );
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 4);
    for row in &rows {
        assert_eq!(&row[0], "tones");
        let p_t: f64 = row[1].parse().unwrap();
        let b_t: f64 = row[3].parse().unwrap();
        let bitrate: f64 = row[7].parse().unwrap();
        assert_eq!(bitrate, (p_t * 2205.0).round() * b_t / 0.05);
    }
}

#[test]
fn bad_grid_config_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("grid.json");
    std::fs::write(&config, r#"{"p_t": [2.0]}"#).unwrap();
    let result = dualdomain(&[
        "experiment",
        path(&config),
        "--output",
        path(&dir.path().join("o.csv")),
    ]);
    assert_eq!(result.status.code(), Some(1));
}

#[test]
fn generated_signals_are_written_at_the_requested_length() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.wav");
    let result = dualdomain(&[
        "generate",
        "--kind",
        "two-tone",
        "--seconds",
        "0.5",
        "--sample-rate",
        "8000",
        "--output",
        path(&out),
    ]);
    assert!(result.status.success());
    let audio = load_wav(&out).unwrap();
    assert_eq!(audio.samples.len(), 4000);
    let peak = audio.samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!((peak - 0.9).abs() < 1e-3);
}
