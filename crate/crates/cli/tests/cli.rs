use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cockpit_sim::task::load_configuration;
use tempfile::TempDir;

fn data(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data").join(rel)
}

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cockpit-sim"))
        .args(args)
        .env_remove("COCKPIT_SIM_OUT")
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn demo_args(sub: &str) -> Vec<String> {
    vec![
        sub.into(),
        "--tasks".into(),
        s(&data("demo/base_tasks.csv")).into(),
        "--elements".into(),
        s(&data("demo/elements.toml")).into(),
        "--scenario".into(),
        s(&data("demo/scenario.toml")).into(),
    ]
}

fn run_with(args: Vec<String>, extra: &[&str]) -> Output {
    let mut all: Vec<&str> = args.iter().map(String::as_str).collect();
    all.extend_from_slice(extra);
    cli(&all)
}

/// The demo task list with one edit to its text.
fn edited_tasks(dir: &Path, edit: impl Fn(String) -> String) -> PathBuf {
    let path = dir.join("tasks.csv");
    fs::write(&path, edit(fs::read_to_string(data("demo/base_tasks.csv")).unwrap())).unwrap();
    path
}

#[test]
fn validate_accepts_the_demo() {
    let o = run_with(demo_args("validate"), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("valid: 18 task(s)"));
}

#[test]
fn validate_names_a_missing_column() {
    let dir = TempDir::new().unwrap();
    let tasks = edited_tasks(dir.path(), |text| text.replacen(",Priority,", ",Urgency,", 1));
    let o = cli(&[
        "validate",
        "--tasks",
        s(&tasks),
        "--elements",
        s(&data("demo/elements.toml")),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("Priority"), "{}", stderr(&o));
}

#[test]
fn validate_names_cycle_members() {
    let dir = TempDir::new().unwrap();
    let tasks = edited_tasks(dir.path(), |text| {
        text.lines()
            .map(|line| {
                let mut cells: Vec<String> = line.split(',').map(String::from).collect();
                match cells[0].as_str() {
                    "tor60-text" => cells[12] = "tor60-chime".into(),
                    "tor60-chime" => cells[12] = "tor60-text".into(),
                    _ => {}
                }
                cells.join(",") + "\n"
            })
            .collect()
    });
    let o = cli(&[
        "validate",
        "--tasks",
        s(&tasks),
        "--elements",
        s(&data("demo/elements.toml")),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(
        err.contains("cycle") && err.contains("tor60-text") && err.contains("tor60-chime"),
        "{err}"
    );
}

#[test]
fn run_writes_identical_files_on_rerun() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    for dir in [&a, &b] {
        let o = run_with(
            demo_args("run"),
            &["--seed", "1", "--length", "3000", "--out", s(dir.path())],
        );
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    for file in ["metrics.csv", "trace.jsonl", "task_counts.csv", "levels.csv"] {
        let (x, y) = (
            fs::read(a.path().join(file)).unwrap(),
            fs::read(b.path().join(file)).unwrap(),
        );
        assert!(!x.is_empty(), "{file} empty");
        assert_eq!(x, y, "{file} differs");
    }
}

#[test]
fn output_directory_from_environment() {
    let dir = TempDir::new().unwrap();
    let mut args = demo_args("run");
    args.extend(["--length".into(), "500".into()]);
    let o = Command::new(env!("CARGO_BIN_EXE_cockpit-sim"))
        .args(&args)
        .env("COCKPIT_SIM_OUT", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(dir.path().join("metrics.csv").exists());
}

#[test]
fn scripted_run_matches_hand_computed_indicators() {
    let dir = TempDir::new().unwrap();
    let o = cli(&[
        "run",
        "--tasks",
        s(&data("scripted/tasks.csv")),
        "--elements",
        s(&data("scripted/elements.toml")),
        "--scenario",
        s(&data("scripted/scenario.toml")),
        "--length",
        "100",
        "--out",
        s(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("metrics.csv")).unwrap();
    let row: Vec<f64> = text
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    let expected = [1.0, 8.4, 2.0, 0.9, 280.0 / 3.0];
    for (got, want) in row.iter().zip(expected) {
        assert!((got - want).abs() <= 1e-9 * want.abs().max(1.0), "{row:?}");
    }
}

#[test]
fn missing_scenario_fails() {
    let mut args = demo_args("run");
    args[6] = "/definitely/not/here.toml".into();
    let o = run_with(args, &["--length", "10"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("not/here.toml"));
}

#[test]
fn invalid_length_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let o = run_with(demo_args("run"), &["--length", "-5", "--out", s(dir.path())]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

fn compare_two(a: &Path, b: &Path, out: &Path) -> Output {
    cli(&[
        "compare",
        "--tasks",
        s(a),
        "--tasks",
        s(b),
        "--elements",
        s(&data("demo/elements.toml")),
        "--scenario",
        s(&data("demo/scenario.toml")),
        "--trials",
        "3",
        "--length",
        "2000",
        "--out",
        s(out),
    ])
}

#[test]
fn compare_writes_a_four_by_two_summary() {
    let dir = TempDir::new().unwrap();
    let o = compare_two(
        &data("demo/base_tasks.csv"),
        &data("demo/optimized_tasks.csv"),
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    let rows: Vec<Vec<&str>> = summary.lines().map(|l| l.split(',').collect()).collect();
    assert_eq!(rows[0], ["indicator", "base_tasks", "optimized_tasks"]);
    let names: Vec<&str> = rows[1..].iter().map(|r| r[0]).collect();
    assert_eq!(
        names,
        ["eyes_off_pct", "cog_overload_pct", "perc_overload_pct", "sa_avg_pct"]
    );
    assert!(rows.iter().all(|r| r.len() == 3));
    let scatter = fs::read_to_string(dir.path().join("scatter.csv")).unwrap();
    assert_eq!(scatter.lines().count(), 1 + 6);
}

#[test]
fn comparing_a_configuration_with_itself_gives_zero_deltas() {
    let dir = TempDir::new().unwrap();
    let base = data("demo/base_tasks.csv");
    let o = compare_two(&base, &base, dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let paired = fs::read_to_string(dir.path().join("paired.csv")).unwrap();
    let mut lines = paired.lines();
    lines.next();
    let mut n = 0;
    for line in lines {
        n += 1;
        for v in line.split(',').skip(1) {
            assert_eq!(v.parse::<f64>().unwrap(), 0.0, "{line}");
        }
    }
    assert_eq!(n, 3);
}

#[test]
fn compare_needs_two_task_files() {
    let dir = TempDir::new().unwrap();
    let o = run_with(demo_args("compare"), &["--out", s(dir.path())]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn compare_from_plan_with_seeds_file() {
    let dir = TempDir::new().unwrap();
    let seeds = dir.path().join("seeds.txt");
    fs::write(&seeds, "# paired seeds\n11, 12\n13\n").unwrap();
    let out = dir.path().join("out");
    let o = cli(&[
        "compare",
        "--plan",
        s(&data("demo/plan.toml")),
        "--trials",
        "2",
        "--length",
        "1000",
        "--seeds-file",
        s(&seeds),
        "--out",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let scatter = fs::read_to_string(out.join("scatter.csv")).unwrap();
    let seeds_used: Vec<&str> = scatter.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(seeds_used, ["11", "12", "11", "12"]);
    assert!(out.join("paired.csv").exists());

    fs::write(&seeds, "5\n").unwrap();
    let o = cli(&[
        "compare",
        "--plan",
        s(&data("demo/plan.toml")),
        "--seeds-file",
        s(&seeds),
        "--out",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn optimize_with_zero_budget_returns_the_input() {
    let dir = TempDir::new().unwrap();
    let o = run_with(
        demo_args("optimize"),
        &[
            "--sa-floor",
            "50",
            "--budget",
            "0",
            "--trials",
            "2",
            "--length",
            "500",
            "--out",
            s(dir.path()),
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let elements = data("demo/elements.toml");
    let load = |p: &Path| load_configuration(p, &elements, None).unwrap().config;
    assert_eq!(
        load(&dir.path().join("base_tasks_optimized.csv")),
        load(&data("demo/base_tasks.csv"))
    );
    assert_eq!(fs::read_to_string(dir.path().join("moves.json")).unwrap().trim(), "[]");
}

#[test]
fn optimize_rejects_bad_weights_and_floor() {
    let dir = TempDir::new().unwrap();
    let o = run_with(
        demo_args("optimize"),
        &["--sa-floor", "50", "--weights", "1,1", "--out", s(dir.path())],
    );
    assert_eq!(o.status.code(), Some(1));
    let o = run_with(
        demo_args("optimize"),
        &[
            "--sa-floor",
            "150",
            "--trials",
            "1",
            "--length",
            "100",
            "--out",
            s(dir.path()),
        ],
    );
    assert_eq!(o.status.code(), Some(1));
    let o = run_with(demo_args("optimize"), &["--out", s(dir.path())]);
    assert_eq!(o.status.code(), Some(1), "--sa-floor is required");
}

#[test]
fn export_trace_writes_plot_files() {
    let dir = TempDir::new().unwrap();
    let o = run_with(demo_args("export-trace"), &["--length", "2000", "--out", s(dir.path())]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let timeline = fs::read_to_string(dir.path().join("timeline.csv")).unwrap();
    let trace = fs::read_to_string(dir.path().join("trace.jsonl")).unwrap();
    assert_eq!(timeline.lines().count(), trace.lines().count() + 1);
    let road = fs::read_to_string(dir.path().join("road.csv")).unwrap();
    assert!(road.starts_with("start,end,max_level\n0,"));
    let executions = fs::read_to_string(dir.path().join("executions.csv")).unwrap();
    for line in executions.lines().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        assert!(cells[2].parse::<f64>().unwrap() <= cells[3].parse::<f64>().unwrap());
    }
    assert!(executions.lines().count() > 10);
}
