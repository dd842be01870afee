//! Black-box tests of the `vidframing` binary: config handling, exit
//! codes, and the shape of each report file.

use std::path::{Path, PathBuf};
use std::process::Command;

fn run_cli(args: &[&str]) -> (i32, String, String) {
    let output = Command::new(env!("CARGO_BIN_EXE_vidframing"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        output.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&output.stdout).into_owned(),
        String::from_utf8_lossy(&output.stderr).into_owned(),
    )
}

fn write_ppm(path: &Path, gray: u8) {
    let mut bytes = b"P6\n8 8\n255\n".to_vec();
    bytes.extend(std::iter::repeat([gray, gray, gray]).take(64).flatten());
    std::fs::write(path, bytes).unwrap();
}

/// Frame directory with one 8x8 gray frame per entry of `grays`.
fn gray_video(dir: &Path, id: &str, grays: &[u8]) -> PathBuf {
    let vdir = dir.join("frames").join(id);
    std::fs::create_dir_all(&vdir).unwrap();
    for (i, &g) in grays.iter().enumerate() {
        write_ppm(&vdir.join(format!("{i:03}.ppm")), g);
    }
    vdir
}

fn manifest_line(id: &str, label: &str, frames_dir: &Path) -> String {
    format!(
        "{{\"id\":\"{id}\",\"label\":\"{label}\",\"frames_dir\":\"{}\"}}\n",
        frames_dir.display()
    )
}

/// Write manifest + config; `extra` is appended verbatim to the TOML.
fn write_config(dir: &Path, manifest: &str, extra: &str) -> String {
    let manifest_path = dir.join("manifest.jsonl");
    std::fs::write(&manifest_path, manifest).unwrap();
    let config_path = dir.join("pipeline.toml");
    std::fs::write(
        &config_path,
        format!(
            "manifest = \"{}\"\nout_dir = \"{}\"\n{extra}",
            manifest_path.display(),
            dir.join("out").display()
        ),
    )
    .unwrap();
    config_path.to_str().unwrap().to_string()
}

fn data_file(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
        .canonicalize()
        .unwrap()
        .display()
        .to_string()
}

fn read_out(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join("out").join(name)).unwrap()
}

#[test]
fn features_one_row_per_video_segment() {
    let dir = tempfile::tempdir().unwrap();
    let mut manifest = String::new();
    for (id, label) in [("vid_a", "conspiracy"), ("vid_b", "debunking")] {
        let frames = gray_video(dir.path(), id, &[60, 90, 120, 150]);
        manifest.push_str(&manifest_line(id, label, &frames));
    }
    let config = write_config(
        dir.path(),
        &manifest,
        "seed = 1\nsegments = [\"all\", \"first2s\", \"middle1s\"]\n",
    );
    let (code, _, err) = run_cli(&["--config", &config, "features"]);
    assert_eq!(code, 0, "{err}");

    let csv = read_out(dir.path(), "features.csv");
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 1 + 6, "2 videos x 3 segments");
    assert!(lines[0].starts_with("id,segment,n_frames,"));
    let tags: Vec<String> = lines[1..]
        .iter()
        .map(|l| l.splitn(3, ',').take(2).collect::<Vec<_>>().join("/"))
        .collect();
    assert_eq!(
        tags,
        [
            "vid_a/all",
            "vid_a/first2s",
            "vid_a/middle1s",
            "vid_b/all",
            "vid_b/first2s",
            "vid_b/middle1s"
        ]
    );
    // all four frames vs the first two: medians 105 vs 75
    let cell = |line: &str, col: usize| line.split(',').nth(col).unwrap().to_string();
    let header: Vec<&str> = lines[0].split(',').collect();
    let bcol = header.iter().position(|c| *c == "median_brightness").unwrap();
    assert_eq!(cell(lines[1], 2), "4");
    let all: f64 = cell(lines[1], bcol).parse().unwrap();
    assert!((all - 105.0).abs() < 1e-3, "all-frames median {all}");
    assert_eq!(cell(lines[2], 2), "2");
    let first: f64 = cell(lines[2], bcol).parse().unwrap();
    assert!((first - 75.0).abs() < 1e-3, "first2s median {first}");
}

#[test]
fn transcript_only_video_gets_empty_visual_cells() {
    let dir = tempfile::tempdir().unwrap();
    let transcript = dir.path().join("talk.txt");
    // words must recur: the embedding vocabulary drops hapaxes
    std::fs::write(
        &transcript,
        "they attack and alarm everyone attack alarm attack alarm calm calm",
    )
    .unwrap();
    let frames = gray_video(dir.path(), "vis", &[100, 100]);
    let manifest = format!(
        "{}{{\"id\":\"talk\",\"label\":\"normal\",\"transcript_path\":\"{}\"}}\n",
        manifest_line("vis", "normal", &frames),
        transcript.display()
    );
    let config = write_config(
        dir.path(),
        &manifest,
        &format!(
            "seed = 1\nlexicon = \"{}\"\nstopwords = \"{}\"\n\n[text]\nembedding_dim = 4\n",
            data_file("lexicon.tsv"),
            data_file("stopwords.txt")
        ),
    );
    let (code, _, err) = run_cli(&["--config", &config, "features"]);
    assert_eq!(code, 0, "{err}");

    let csv = read_out(dir.path(), "features.csv");
    let header: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
    let row: Vec<&str> = csv
        .lines()
        .find(|l| l.starts_with("talk,"))
        .expect("transcript-only row present")
        .split(',')
        .collect();
    assert_eq!(row.len(), header.len());
    let col = |name: &str| header.iter().position(|c| *c == name).unwrap();
    assert_eq!(row[col("n_frames")], "", "no frames analyzed");
    assert_eq!(row[col("median_brightness")], "", "visual cell empty");
    // "attack" carries fear in the demo lexicon; the cell must be filled
    let fear: f64 = row[col("emo_fear")].parse().unwrap();
    assert!(fear > 0.0, "fear = {fear}");
    assert!(!row[col("emb_0")].is_empty(), "embedding cell filled");
}

#[test]
fn identical_groups_show_nothing_significant() {
    let dir = tempfile::tempdir().unwrap();
    let mut manifest = String::new();
    for i in 0..12 {
        let grays: &[u8] = if i % 2 == 0 { &[90, 90] } else { &[120, 120] };
        let (id, label) = if i < 6 {
            (format!("con{i}"), "conspiracy")
        } else {
            (format!("deb{i}"), "debunking")
        };
        let frames = gray_video(dir.path(), &id, grays);
        manifest.push_str(&manifest_line(&id, label, &frames));
    }
    let config = write_config(dir.path(), &manifest, "seed = 1\n");
    for args in [vec!["features"], vec!["compare", "conspiracy", "debunking"]] {
        let mut full = vec!["--config", &config];
        full.extend(args);
        let (code, _, err) = run_cli(&full);
        assert_eq!(code, 0, "{err}");
    }
    let report = read_out(dir.path(), "compare_conspiracy_vs_debunking_all.csv");
    for line in report.lines().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells[5], "false", "unexpected significance: {line}");
    }
}

#[test]
fn unknown_group_label_exits_2_listing_labels() {
    let dir = tempfile::tempdir().unwrap();
    let frames = gray_video(dir.path(), "v0", &[100]);
    let config = write_config(dir.path(), &manifest_line("v0", "normal", &frames), "seed = 1\n");
    let (code, _, err) = run_cli(&["--config", &config, "compare", "conspiracy", "nosuch"]);
    assert_eq!(code, 2, "{err}");
    assert!(err.contains("unknown label"), "{err}");
    assert!(err.contains("normal"), "should list corpus labels: {err}");
}

#[test]
fn unknown_feature_set_exits_2_listing_valid_sets() {
    let dir = tempfile::tempdir().unwrap();
    let mut manifest = String::new();
    for (i, label) in [("0", "conspiracy"), ("1", "debunking")] {
        let id = format!("v{i}");
        let frames = gray_video(dir.path(), &id, &[100]);
        manifest.push_str(&manifest_line(&id, label, &frames));
    }
    let config = write_config(dir.path(), &manifest, "seed = 1\n");
    let (code, _, err) = run_cli(&["--config", &config, "features"]);
    assert_eq!(code, 0, "{err}");
    let (code, _, err) = run_cli(&["--config", &config, "cv", "bogus17"]);
    assert_eq!(code, 2, "{err}");
    assert!(err.contains("unknown feature set"), "{err}");
    assert!(err.contains("visual20"), "should list valid sets: {err}");
}

#[test]
fn missing_seed_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let frames = gray_video(dir.path(), "v0", &[100]);
    let config = write_config(dir.path(), &manifest_line("v0", "normal", &frames), "");
    let (code, _, err) = run_cli(&["--config", &config, "features"]);
    assert_eq!(code, 2, "{err}");
    assert!(err.contains("seed"), "{err}");
}

#[test]
fn extremes_ranks_videos_and_clamps_k() {
    let dir = tempfile::tempdir().unwrap();
    let mut manifest = String::new();
    for (id, gray) in [("dark", 50u8), ("dim", 100), ("lit", 150), ("bright", 200)] {
        let frames = gray_video(dir.path(), id, &[gray]);
        manifest.push_str(&manifest_line(id, "normal", &frames));
    }
    let config = write_config(dir.path(), &manifest, "seed = 1\n");
    let (code, _, err) = run_cli(&["--config", &config, "features"]);
    assert_eq!(code, 0, "{err}");

    let (code, _, err) = run_cli(&["--config", &config, "extremes", "median_brightness", "-k", "1"]);
    assert_eq!(code, 0, "{err}");
    let report = read_out(dir.path(), "extremes_median_brightness_all.csv");
    let lines: Vec<&str> = report.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("bottom,1,dark,"), "{report}");
    assert!(lines[2].starts_with("top,1,bright,"), "{report}");
    let value: f64 = lines[1].split(',').nth(3).unwrap().parse().unwrap();
    assert!((value - 50.0).abs() < 1e-3, "bottom value {value}");

    let (code, _, _) = run_cli(&["--config", &config, "extremes", "median_brightness", "-k", "0"]);
    assert_eq!(code, 0);
    assert_eq!(read_out(dir.path(), "extremes_median_brightness_all.csv").lines().count(), 1);

    let (code, _, err) = run_cli(&["--config", &config, "extremes", "median_brightness", "-k", "99"]);
    assert_eq!(code, 0);
    assert!(err.contains("clamping"), "{err}");
    assert_eq!(
        read_out(dir.path(), "extremes_median_brightness_all.csv").lines().count(),
        1 + 2 * 4
    );
}

fn density_rows(report: &str) -> Vec<(String, f64, f64)> {
    report
        .lines()
        .skip(1)
        .map(|l| {
            let c: Vec<&str> = l.split(',').collect();
            (c[0].to_string(), c[1].parse().unwrap(), c[2].parse().unwrap())
        })
        .collect()
}

#[test]
fn plot_data_densities_integrate_to_one() {
    let dir = tempfile::tempdir().unwrap();
    let mut manifest = String::new();
    for i in 0..12u8 {
        let (id, label) = if i < 6 {
            (format!("con{i}"), "conspiracy")
        } else {
            (format!("deb{i}"), "debunking")
        };
        let frames = gray_video(dir.path(), &id, &[40 + i * 16]);
        manifest.push_str(&manifest_line(&id, label, &frames));
    }
    let config = write_config(dir.path(), &manifest, "seed = 1\n");
    let (code, _, err) = run_cli(&["--config", &config, "features"]);
    assert_eq!(code, 0, "{err}");
    let (code, _, err) = run_cli(&["--config", &config, "plot-data", "median_brightness"]);
    assert_eq!(code, 0, "{err}");

    let rows = density_rows(&read_out(dir.path(), "plot_median_brightness_all.csv"));
    let centers: Vec<f64> = rows
        .iter()
        .filter(|(g, _, _)| g == "conspiracy")
        .map(|(_, c, _)| *c)
        .collect();
    assert!(centers.len() >= 2, "expected multiple bins: {rows:?}");
    let width = centers[1] - centers[0];
    for group in ["conspiracy", "debunking"] {
        let integral: f64 = rows
            .iter()
            .filter(|(g, _, _)| g == group)
            .map(|(_, _, d)| d * width)
            .sum();
        // centers and densities are rounded to 6 significant digits
        assert!((integral - 1.0).abs() < 1e-4, "{group} integral = {integral}");
    }
}

#[test]
fn plot_data_single_video_per_group_has_one_bin() {
    let dir = tempfile::tempdir().unwrap();
    let mut manifest = String::new();
    for (id, label, gray) in [("con0", "conspiracy", 100u8), ("deb0", "debunking", 150)] {
        let frames = gray_video(dir.path(), id, &[gray]);
        manifest.push_str(&manifest_line(id, label, &frames));
    }
    let config = write_config(dir.path(), &manifest, "seed = 1\n");
    let (code, _, err) = run_cli(&["--config", &config, "features"]);
    assert_eq!(code, 0, "{err}");
    let (code, _, err) = run_cli(&["--config", &config, "plot-data", "median_brightness"]);
    assert_eq!(code, 0, "{err}");

    let rows = density_rows(&read_out(dir.path(), "plot_median_brightness_all.csv"));
    for group in ["conspiracy", "debunking"] {
        let nonzero = rows
            .iter()
            .filter(|(g, _, d)| g == group && *d > 0.0)
            .count();
        assert_eq!(nonzero, 1, "{group}: {rows:?}");
    }
}

#[test]
fn missing_config_flag_exits_2() {
    let (code, _, err) = run_cli(&["features"]);
    assert_eq!(code, 2, "{err}");
    assert!(err.contains("--config"), "{err}");
}

#[test]
fn cv_and_importance_reports_have_expected_shape() {
    let dir = tempfile::tempdir().unwrap();
    let mut manifest = String::new();
    for i in 0..20u8 {
        let (id, label, base) = if i < 10 {
            (format!("con{i}"), "conspiracy", 60)
        } else {
            (format!("deb{i}"), "debunking", 160)
        };
        let frames = gray_video(dir.path(), &id, &[base + (i % 10) * 4, base + (i % 10) * 6]);
        manifest.push_str(&manifest_line(&id, label, &frames));
    }
    let config = write_config(
        dir.path(),
        &manifest,
        "seed = 1\n\n[model]\nn_trees = 20\nfolds = 5\nimportance_repeats = 3\n",
    );
    let (code, _, err) = run_cli(&["--config", &config, "features"]);
    assert_eq!(code, 0, "{err}");

    let (code, _, err) = run_cli(&["--config", &config, "cv", "visual20"]);
    assert_eq!(code, 0, "{err}");
    let report = read_out(dir.path(), "cv_rf_visual20.csv");
    let lines: Vec<&str> = report.lines().collect();
    assert_eq!(lines[0], "model,features,precision_mean,precision_ci,recall_mean,recall_ci");
    let cells: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(cells[0], "rf");
    assert_eq!(cells[1], "visual20");
    let precision: f64 = cells[2].parse().unwrap();
    assert!(precision > 0.9, "separable corpus, precision = {precision}");

    let (code, _, err) = run_cli(&["--config", &config, "importance", "visual20"]);
    assert_eq!(code, 0, "{err}");
    let report = read_out(dir.path(), "importance_rf_visual20.csv");
    assert!(report.starts_with("feature,mean_drop,sd,baseline\n"));
    assert_eq!(report.lines().count(), 1 + 20, "one row per visual feature");
}
