//! Command-level behavior: determinism, purity, coverage checks, refusal
//! rules, and process exit codes.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use posebench_cli::{commands, CliError, ExperimentConfig, Overrides};

fn write_config(dir: &Path, out_dir: &Path, runs: usize) -> PathBuf {
    let path = dir.join("bench.toml");
    let content = format!(
        r#"
[experiment]
runs = {runs}
seed_base = 1
output_dir = "{}"

[pose]
alpha = 2.0
delta = 0.0

[[problems]]
id = "dtlz2"
m = 2

[[algorithms]]
id = "nsga2"
mu = 10
lambda = 10
fe_max = 800

[[criteria]]
kind = "isc"
patience = 8

[[criteria]]
kind = "mgbm"
"#,
        out_dir.display()
    );
    fs::write(&path, content).unwrap();
    path
}

fn load(path: &Path) -> ExperimentConfig {
    ExperimentConfig::load(path, &Overrides::default()).unwrap()
}

fn archive_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    for entry in walk(dir) {
        files.push((
            entry
                .strip_prefix(dir)
                .unwrap()
                .to_string_lossy()
                .into_owned(),
            fs::read(&entry).unwrap(),
        ));
    }
    files.sort();
    files
}

fn walk(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(current) = stack.pop() {
        for entry in fs::read_dir(&current).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.push(path);
            }
        }
    }
    out.sort();
    out
}

#[test]
fn generate_is_deterministic_across_reruns() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = write_config(dir.path(), &dir.path().join("out"), 2);
    let config = load(&config_path);

    commands::generate(&config, Some(2)).unwrap();
    let first = archive_files(&config.archives_dir());
    fs::remove_dir_all(&config.output_dir).unwrap();
    commands::generate(&config, Some(1)).unwrap();
    let second = archive_files(&config.archives_dir());
    assert_eq!(first.len(), second.len());
    for ((name_a, bytes_a), (name_b, bytes_b)) in first.iter().zip(&second) {
        assert_eq!(name_a, name_b);
        assert_eq!(bytes_a, bytes_b, "{name_a} differs between reruns");
    }
}

#[test]
fn seed_base_shifts_every_seed() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = write_config(dir.path(), &dir.path().join("out"), 2);
    let shifted = ExperimentConfig::load(
        &config_path,
        &Overrides {
            seed_base: Some(100),
            ..Overrides::default()
        },
    )
    .unwrap();
    let report = commands::generate(&shifted, None).unwrap();
    assert_eq!(
        report.archive_names,
        vec![
            "dtlz2_m2_nsga2_s100".to_string(),
            "dtlz2_m2_nsga2_s101".to_string()
        ]
    );
}

#[test]
fn replay_is_deterministic_and_leaves_archives_untouched() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = write_config(dir.path(), &dir.path().join("out"), 2);
    let config = load(&config_path);
    commands::generate(&config, None).unwrap();

    let before = archive_files(&config.archives_dir());
    let decisions_path = commands::replay(&config, Some(2)).unwrap();
    let first = fs::read(&decisions_path).unwrap();
    let decisions_path = commands::replay(&config, Some(1)).unwrap();
    let second = fs::read(&decisions_path).unwrap();
    let after = archive_files(&config.archives_dir());

    assert_eq!(first, second, "decisions differ between replays");
    assert_eq!(before, after, "replay modified the archives");
}

#[test]
fn evaluate_counts_rows_and_scores_unstopped_at_budget() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = write_config(dir.path(), &dir.path().join("out"), 3);
    let config = load(&config_path);
    commands::generate(&config, None).unwrap();
    commands::replay(&config, None).unwrap();
    let report = commands::evaluate(&config, None).unwrap();
    // 1 problem x 1 algorithm x 3 seeds x 2 criteria.
    assert_eq!(report.result_rows, 6);
    assert_eq!(report.average_rows, 2);

    let results = fs::read_to_string(&report.results_path).unwrap();
    let provenance = results.lines().next().unwrap();
    assert!(
        provenance.starts_with("# posebench ") && provenance.contains("config=sha256:"),
        "missing provenance line: {provenance}"
    );
    for line in results.lines().filter(|l| !l.starts_with('#')).skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        let fe_stop: u64 = fields[9].parse().unwrap();
        let fe_max: u64 = fields[10].parse().unwrap();
        let stopped: bool = fields[11].parse().unwrap();
        assert_eq!(fe_max, 800);
        if !stopped {
            assert_eq!(
                fe_stop, fe_max,
                "unstopped run must score at the full budget"
            );
        }
    }
}

#[test]
fn evaluate_requires_full_decision_coverage() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = write_config(dir.path(), &dir.path().join("out"), 1);
    let config = load(&config_path);
    commands::generate(&config, None).unwrap();
    let decisions_path = commands::replay(&config, None).unwrap();

    // Drop the mgbm row: evaluate must refuse to score a partial table.
    let pruned: Vec<String> = fs::read_to_string(&decisions_path)
        .unwrap()
        .lines()
        .filter(|line| !line.contains("mgbm"))
        .map(str::to_string)
        .collect();
    fs::write(&decisions_path, pruned.join("\n") + "\n").unwrap();
    match commands::evaluate(&config, None) {
        Err(CliError::Data(message)) => assert!(message.contains("mgbm"), "{message}"),
        other => panic!("expected a data error, got {other:?}"),
    }
}

#[test]
fn report_refuses_mixed_score_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = write_config(dir.path(), &dir.path().join("out"), 2);
    let config = load(&config_path);
    commands::generate(&config, None).unwrap();
    commands::replay(&config, None).unwrap();
    let report = commands::evaluate(&config, None).unwrap();

    // Tamper one row's alpha column.
    let text = fs::read_to_string(&report.results_path).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    let last = lines.last().unwrap().clone();
    let fields: Vec<&str> = last.split(',').collect();
    let mut tampered: Vec<String> = fields.iter().map(|s| s.to_string()).collect();
    tampered[6] = "9".into();
    lines.push(tampered.join(","));
    fs::write(&report.results_path, lines.join("\n") + "\n").unwrap();

    match commands::report(&config, None, None) {
        Err(CliError::Config(message)) => {
            assert!(message.contains("mix"), "{message}");
        }
        other => panic!("expected a config error, got {other:?}"),
    }
}

#[test]
fn inflate_expands_to_matching_snapshots() {
    // A steady-state archive: survivors repeat across iterations, so the
    // naive expansion is much larger than the compact pair.
    let dir = tempfile::tempdir().unwrap();
    let config_path = write_config(dir.path(), &dir.path().join("out"), 1);
    let steady = fs::read_to_string(&config_path)
        .unwrap()
        .replace("lambda = 10", "lambda = 1")
        .replace("fe_max = 800", "fe_max = 200");
    fs::write(&config_path, steady).unwrap();
    let config = load(&config_path);
    let generated = commands::generate(&config, None).unwrap();
    let archive_dir = config.archives_dir().join(&generated.archive_names[0]);

    let report = commands::inflate(&archive_dir, None).unwrap();
    assert_eq!(report.file_count, 191); // t_max = 1 + (200 - 10) / 1
    assert!(report.naive_bytes > 2 * report.compact_bytes);
    assert!(report.naive_dir.join("fP_1.csv").is_file());
    assert!(report.naive_dir.join("fP_191.csv").is_file());
}

#[test]
fn single_problem_ranks_follow_average_scores() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = write_config(dir.path(), &dir.path().join("out"), 3);
    let config = load(&config_path);
    commands::generate(&config, None).unwrap();
    commands::replay(&config, None).unwrap();
    let evaluated = commands::evaluate(&config, None).unwrap();
    let paths = commands::report(&config, None, None).unwrap();

    // Mean score per criterion from averages.csv.
    let mut means: Vec<(String, f64)> = fs::read_to_string(&evaluated.averages_path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|line| {
            let fields: Vec<&str> = line.split(',').collect();
            (fields[3].to_string(), fields[7].parse::<f64>().unwrap())
        })
        .collect();
    means.sort_by(|a, b| a.1.total_cmp(&b.1));

    // With a single problem column, the rank order is the score order.
    let rankings = fs::read_to_string(&paths.rankings[0]).unwrap();
    for line in rankings.lines().filter(|l| !l.starts_with('#')).skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        let criterion = fields[0];
        let rank: f64 = fields[1].parse().unwrap();
        let position = means
            .iter()
            .position(|(name, _)| name == criterion)
            .unwrap();
        // Ties share means, so the rank can only deviate from the sorted
        // position when neighbours carry equal scores.
        let expected = (position + 1) as f64;
        if (rank - expected).abs() > 1e-9 {
            let tied = means
                .iter()
                .filter(|(_, v)| *v == means[position].1)
                .count();
            assert!(
                tied > 1,
                "criterion {criterion}: rank {rank}, expected {expected}"
            );
        }
    }
}

#[test]
fn pipeline_runs_twice_to_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = write_config(dir.path(), &dir.path().join("out"), 2);
    let config = load(&config_path);

    let run_all = || {
        commands::generate(&config, None).unwrap();
        commands::replay(&config, None).unwrap();
        commands::evaluate(&config, None).unwrap();
        commands::report(&config, Some(&[2.0, 3.0]), Some(&[0.0, 0.1])).unwrap();
        archive_files(&config.output_dir)
    };
    let first = run_all();
    fs::remove_dir_all(&config.output_dir).unwrap();
    let second = run_all();
    assert_eq!(first.len(), second.len());
    for ((name_a, bytes_a), (name_b, bytes_b)) in first.iter().zip(&second) {
        assert_eq!(name_a, name_b);
        assert_eq!(bytes_a, bytes_b, "{name_a} differs between pipeline runs");
    }
}

#[test]
fn exit_codes_follow_the_contract() {
    let binary = env!("CARGO_BIN_EXE_posebench");
    let dir = tempfile::tempdir().unwrap();

    // Config error: missing file.
    let status = Command::new(binary)
        .args(["generate", "--config", "/nonexistent/bench.toml"])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(1));

    // Config error: invalid content.
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "[experiment]\nruns = 0\n").unwrap();
    let status = Command::new(binary)
        .args(["generate", "--config"])
        .arg(&bad)
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(1));

    // Usage error.
    let status = Command::new(binary).args(["frobnicate"]).output().unwrap();
    assert_eq!(status.status.code(), Some(1));

    // Success path.
    let out = dir.path().join("out");
    let config_path = write_config(dir.path(), &out, 1);
    let status = Command::new(binary)
        .args(["generate", "--config"])
        .arg(&config_path)
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(0), "{:?}", status);

    // Data error: replay over an empty archives directory.
    fs::remove_dir_all(out.join("archives")).unwrap();
    fs::create_dir_all(out.join("archives")).unwrap();
    let status = Command::new(binary)
        .args(["replay", "--config"])
        .arg(&config_path)
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(2));
}
