use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rotoblur::blur::{blur_reference_2d, ImageBuffer};
use rotoblur::image_io;
use tempfile::TempDir;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

fn rotoblur(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rotoblur"))
        .args(args)
        .env_remove("ROTOBLUR_CONFIG")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn ssq_row(id: &str, session: &str, items: [u8; 16]) -> String {
    let cols: Vec<String> = items.iter().map(u8::to_string).collect();
    format!("{id},{session},{}\n", cols.join(","))
}

fn ssq_header() -> String {
    let items: Vec<String> = (1..=16).map(|i| format!("item_{i}")).collect();
    format!("participant_id,session,{}\n", items.join(","))
}

// ---- replay ----

#[test]
fn replay_matches_golden_and_is_deterministic() {
    let first = rotoblur(&["replay", "--trace", s(&data("flick.trace.csv"))]);
    assert_eq!(first.status.code(), Some(0), "{}", stderr(&first));
    assert_eq!(
        stdout(&first),
        fs::read_to_string(data("flick.sigma.csv")).unwrap()
    );

    let dir = TempDir::new().unwrap();
    let out = dir.path().join("sigma.csv");
    let second = rotoblur(&[
        "replay",
        "--trace",
        s(&data("flick.trace.csv")),
        "--out",
        s(&out),
    ]);
    assert_eq!(second.status.code(), Some(0));
    assert_eq!(fs::read(&out).unwrap(), first.stdout);
}

#[test]
fn replay_rejects_time_going_backwards() {
    let dir = TempDir::new().unwrap();
    let trace = dir.path().join("bad.csv");
    fs::write(
        &trace,
        "t_us,ctrl_yaw_delta_deg,ctrl_pitch_delta_deg,head_yaw_delta_deg,head_pitch_delta_deg,head_roll_delta_deg\n\
         10000,0.1,0,0,0,0\n\
         20000,0.1,0,0,0,0\n\
         15000,0.1,0,0,0,0\n",
    )
    .unwrap();
    let o = rotoblur(&["replay", "--trace", s(&trace)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 4"), "{}", stderr(&o));
    assert!(stdout(&o).is_empty());
}

#[test]
fn replay_missing_trace_is_usage_error() {
    let o = rotoblur(&["replay", "--trace", "/nonexistent/trace.csv"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn replay_picks_up_config_from_environment() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("strict.toml");
    fs::write(&cfg, "a_min_deg_s2 = 100000.0\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_rotoblur"))
        .args(["replay", "--trace", s(&data("flick.trace.csv"))])
        .env("ROTOBLUR_CONFIG", &cfg)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert_ne!(text, fs::read_to_string(data("flick.sigma.csv")).unwrap());
    assert!(text
        .lines()
        .skip(2)
        .all(|l| l.split(',').nth(1) == Some("0")));

    // An explicit flag wins over the environment.
    let defaults = dir.path().join("defaults.toml");
    fs::write(&defaults, "").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_rotoblur"))
        .args([
            "replay",
            "--trace",
            s(&data("flick.trace.csv")),
            "--config",
            s(&defaults),
        ])
        .env("ROTOBLUR_CONFIG", &cfg)
        .output()
        .unwrap();
    assert_eq!(
        stdout(&o),
        fs::read_to_string(data("flick.sigma.csv")).unwrap()
    );
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("typo.toml");
    fs::write(&cfg, "a_min = 150.0\n").unwrap();
    let o = rotoblur(&[
        "replay",
        "--trace",
        s(&data("flick.trace.csv")),
        "--config",
        s(&cfg),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("a_min"), "{}", stderr(&o));
}

#[test]
fn invalid_config_value_is_rejected() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("alpha.toml");
    fs::write(&cfg, "ema_alpha = 1.5\n").unwrap();
    let o = rotoblur(&[
        "replay",
        "--trace",
        s(&data("flick.trace.csv")),
        "--config",
        s(&cfg),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

// ---- blur / kernel ----

#[test]
fn zero_sigma_blur_is_byte_identical() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("in.ppm");
    let pixels = (0..9 * 7 * 3).map(|i| (i % 251) as f64 / 255.0).collect();
    let img = ImageBuffer::new(9, 7, 3, pixels).unwrap();
    fs::write(&input, image_io::encode(&img)).unwrap();
    let out = dir.path().join("out.ppm");
    let o = rotoblur(&["blur", "--in", s(&input), "--sigma", "0", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(fs::read(&out).unwrap(), fs::read(&input).unwrap());
}

#[test]
fn impulse_blur_matches_direct_gaussian() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out.pgm");
    let o = rotoblur(&[
        "blur",
        "--in",
        s(&data("impulse.pgm")),
        "--sigma",
        "2",
        "--out",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let produced = fs::read(&out).unwrap();
    let golden = fs::read(data("impulse_sigma2.pgm")).unwrap();
    assert_eq!(produced.len(), golden.len());
    assert!(produced
        .iter()
        .zip(&golden)
        .all(|(a, b)| a.abs_diff(*b) <= 1));

    // Compare against a float reference as well, before quantization.
    let impulse = image_io::decode(&fs::read(data("impulse.pgm")).unwrap()).unwrap();
    let reference = blur_reference_2d(&impulse, 2.0, 3.0).unwrap();
    let decoded = image_io::decode(&produced).unwrap();
    for (a, b) in decoded.data().iter().zip(reference.data()) {
        assert!((a - b).abs() <= 0.5 / 255.0 + 1e-9);
    }
}

#[test]
fn bad_sigma_values_are_usage_errors() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out.pgm");
    for sigma in ["-1", "abc", "NaN", "inf"] {
        let o = rotoblur(&[
            "blur",
            "--in",
            s(&data("impulse.pgm")),
            &format!("--sigma={sigma}"),
            "--out",
            s(&out),
        ]);
        assert_eq!(o.status.code(), Some(2), "sigma {sigma}");
    }
    assert!(!out.exists());
}

#[test]
fn corrupt_image_is_domain_error() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("junk.pgm");
    fs::write(&input, b"P5\n4 4\n255\nxx").unwrap();
    let o = rotoblur(&[
        "blur",
        "--in",
        s(&input),
        "--sigma",
        "1",
        "--out",
        s(&dir.path().join("o.pgm")),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn kernel_verify_reports_agreement() {
    let o = rotoblur(&["kernel", "--sigma", "1.7", "--verify"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let weights: Vec<f64> = stdout(&o).lines().map(|l| l.parse().unwrap()).collect();
    assert_eq!(weights.len(), 2 * 6 + 1);
    assert!((weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert!(stderr(&o).contains("rms"));
}

// ---- ssq ----

#[test]
fn ssq_score_and_prescreen() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("ssq.csv");
    let mut text = ssq_header();
    text.push_str(&ssq_row("p1", "NRB", [0; 16]));
    text.push_str(&ssq_row("p1", "RB", [3; 16]));
    // item 1 alone loads N and O: raw 1/1/0, TS 7.48 sits exactly on the cutoff
    let mut one = [0u8; 16];
    one[0] = 1;
    text.push_str(&ssq_row("p2", "NRB", one));
    // item 6 alone loads only N: TS 3.74
    let mut six = [0u8; 16];
    six[5] = 1;
    text.push_str(&ssq_row("p3", "NRB", six));
    // items 1 and 6: raw 2/1/0, TS 11.22
    let mut both = one;
    both[5] = 1;
    text.push_str(&ssq_row("p4", "NRB", both));
    fs::write(&input, &text).unwrap();

    let o = rotoblur(&["ssq", "score", "--in", s(&input)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(
        lines[0],
        "participant_id,session,raw_n,raw_o,raw_d,n_score,o_score,d_score,ts"
    );
    assert_eq!(lines.len(), 6);
    let ts = |line: &str| line.rsplit(',').next().unwrap().parse::<f64>().unwrap();
    assert_eq!(ts(lines[1]), 0.0);
    assert!((ts(lines[2]) - 235.62).abs() < 1e-9);
    assert!((ts(lines[3]) - 7.48).abs() < 1e-12);

    let o = rotoblur(&["ssq", "prescreen", "--in", s(&input)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let decisions: Vec<String> = stdout(&o)
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().to_string())
        .collect();
    assert_eq!(
        decisions,
        ["accept", "reject", "accept", "accept", "reject"]
    );

    let o = rotoblur(&["ssq", "prescreen", "--in", s(&input), "--cutoff", "3"]);
    let rejects = stdout(&o).lines().filter(|l| l.ends_with("reject")).count();
    assert_eq!(rejects, 4);
}

#[test]
fn ssq_item_out_of_range_cites_row() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("ssq.csv");
    let mut bad = [0u8; 16];
    bad[6] = 4;
    let text = ssq_header() + &ssq_row("p1", "NRB", [1; 16]) + &ssq_row("p2", "RB", bad);
    fs::write(&input, text).unwrap();
    for sub in ["score", "prescreen"] {
        let o = rotoblur(&["ssq", sub, "--in", s(&input)]);
        assert_eq!(o.status.code(), Some(1));
        let err = stderr(&o);
        assert!(err.contains("line 3"), "{err}");
        assert!(err.contains("item 7") || err.contains("item_7"), "{err}");
    }
}

// ---- analyze ----

fn pairs_file(dir: &Path, rows: &[(f64, f64)]) -> PathBuf {
    let mut text = String::from("participant_id,ts_nrb,ts_rb\n");
    for (i, (nrb, rb)) in rows.iter().enumerate() {
        text.push_str(&format!("p{:02},{nrb},{rb}\n", i + 1));
    }
    let path = dir.join("pairs.csv");
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn analyze_partitions_synthetic_study() {
    let dir = TempDir::new().unwrap();
    let mut rows = Vec::new();
    for k in 0..8 {
        rows.push((3.74 * (10 + k) as f64, 3.74 * (4 + k / 2) as f64));
    }
    for k in 0..3 {
        rows.push((3.74 * (2 + k) as f64, 3.74 * (2 + k) as f64));
    }
    for k in 0..4 {
        rows.push((3.74 * (1 + k) as f64, 3.74 * (3 + 2 * k) as f64));
    }
    let pairs = pairs_file(dir.path(), &rows);
    let o = rotoblur(&["analyze", "--pairs", s(&pairs)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["n_pairs"], 15);
    assert_eq!(report["partition"]["declined"], 8);
    assert_eq!(report["partition"]["unchanged"], 3);
    assert_eq!(report["partition"]["increased"], 4);
    assert_eq!(
        report["partition"]["declined_ids"]
            .as_array()
            .unwrap()
            .len(),
        8
    );
    let w = &report["wilcoxon"]["result"];
    assert_eq!(w["n_eff"], 12);
    assert_eq!(w["method"], "exact");
    assert!(report.get("fms").is_none());
}

#[test]
fn analyze_with_fms_curves() {
    let dir = TempDir::new().unwrap();
    let pairs = pairs_file(dir.path(), &[(20.0, 10.0), (15.0, 15.0), (5.0, 8.0)]);
    let fms = dir.path().join("fms.csv");
    fs::write(
        &fms,
        "participant_id,session,t_min,rating\n\
         p01,NRB,2,1\np02,NRB,2,3\np01,RB,2,0\np02,RB,2,1\np01,NRB,4,2\n",
    )
    .unwrap();
    let out = dir.path().join("report.json");
    let o = rotoblur(&[
        "analyze",
        "--pairs",
        s(&pairs),
        "--fms",
        s(&fms),
        "--out",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out).unwrap()).unwrap();
    let nrb = report["fms"]["NRB"].as_array().unwrap();
    assert_eq!(nrb.len(), 2);
    assert_eq!(nrb[0]["mean_rating"], 2.0);
    assert_eq!(report["fms"]["RB"][0]["mean_rating"], 0.5);
}

#[test]
fn analyze_identical_sessions_reports_undefined_test() {
    let dir = TempDir::new().unwrap();
    let pairs = pairs_file(dir.path(), &[(7.48, 7.48), (0.0, 0.0), (11.22, 11.22)]);
    let o = rotoblur(&["analyze", "--pairs", s(&pairs)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(
        report["wilcoxon"]["undefined"]["reason"],
        "AllZeroDifferences"
    );
    assert_eq!(report["partition"]["unchanged"], 3);
}

#[test]
fn analyze_input_errors() {
    let o = rotoblur(&["analyze", "--pairs", "/nonexistent/pairs.csv"]);
    assert_eq!(o.status.code(), Some(2));

    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("pairs.csv");
    fs::write(&bad, "participant_id,ts_nrb,ts_rb\np1,-3,4\n").unwrap();
    let o = rotoblur(&["analyze", "--pairs", s(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
}

#[test]
fn unknown_subcommand_is_usage_error() {
    assert_eq!(rotoblur(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(rotoblur(&[]).status.code(), Some(2));
}
