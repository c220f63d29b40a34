//! End-to-end tests of the `rotopt` binary: one battery per subcommand
//! exercising the documented behavior, plus the exit-code contract
//! (0 success, 2 usage, 3 infeasible, 4 numerical failure) and the
//! exactness of matrix round trips through the CSV and JSON writers.

use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use tempfile::TempDir;

// ── Harness ──────────────────────────────────────────────────────────────────

struct Workspace {
    dir: TempDir,
}

impl Workspace {
    fn new() -> Self {
        Workspace {
            dir: TempDir::new().expect("temp dir"),
        }
    }

    fn file(&self, name: &str, text: &str) -> String {
        std::fs::write(self.dir.path().join(name), text).expect("write input");
        name.to_string()
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn run(&self, args: &[&str]) -> Run {
        let output = Command::new(env!("CARGO_BIN_EXE_rotopt"))
            .args(args)
            .current_dir(self.dir.path())
            .output()
            .expect("binary runs");
        Run { output }
    }
}

struct Run {
    output: Output,
}

impl Run {
    fn code(&self) -> i32 {
        self.output.status.code().expect("exit code")
    }

    fn stdout(&self) -> String {
        String::from_utf8(self.output.stdout.clone()).expect("utf8 stdout")
    }

    fn stderr(&self) -> String {
        String::from_utf8(self.output.stderr.clone()).expect("utf8 stderr")
    }

    /// Parse stdout as the JSON run report, panicking with context on
    /// failure so broken runs are easy to diagnose.
    fn report(&self) -> Value {
        assert_eq!(
            self.code(),
            0,
            "expected success, stderr: {}",
            self.stderr()
        );
        serde_json::from_str(&self.stdout()).expect("stdout is a JSON report")
    }

    /// Parse stdout as a JSON report for a run expected to exit with
    /// `code` (infeasible outcomes still report).
    fn report_with_code(&self, code: i32) -> Value {
        assert_eq!(self.code(), code, "stderr: {}", self.stderr());
        serde_json::from_str(&self.stdout()).expect("stdout is a JSON report")
    }
}

fn matrix_field(report: &Value) -> Vec<Vec<f64>> {
    report["matrix"]
        .as_array()
        .expect("matrix rows")
        .iter()
        .map(|row| {
            row.as_array()
                .expect("matrix row")
                .iter()
                .map(|v| v.as_f64().expect("matrix entry"))
                .collect()
        })
        .collect()
}

fn parse_csv(path: &Path) -> Vec<Vec<f64>> {
    std::fs::read_to_string(path)
        .expect("read csv")
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.split(',').map(|f| f.trim().parse().expect("f64")).collect())
        .collect()
}

// ── wahba ────────────────────────────────────────────────────────────────────

#[test]
fn wahba_recovers_a_rotated_frame() {
    let ws = Workspace::new();
    let obs = ws.file("obs.csv", "1,0,0\n0,1,0\n0,0,1\n");
    // Rows of an exactly orthogonal rational rotation (multiples of 1/25).
    let reference = ws.file(
        "ref.csv",
        "0.36,0.48,-0.8\n-0.8,0.6,0\n0.48,0.64,0.6\n",
    );
    let report = ws.run(&["wahba", &obs, &reference]).report();

    assert!(report["fit_after"].as_f64().unwrap() <= 1e-8);
    assert!(report["fit_before"].as_f64().unwrap() > 1.0);
    assert!(report["residuals"]["orth"].as_f64().unwrap() <= 1e-9);
    // With uᵢ = eᵢ the aligning rotation's columns are the references.
    let x = matrix_field(&report);
    let want = [
        [0.36, -0.8, 0.48],
        [0.48, 0.6, 0.64],
        [-0.8, 0.0, 0.6],
    ];
    for i in 0..3 {
        for j in 0..3 {
            assert!((x[i][j] - want[i][j]).abs() <= 1e-8, "entry ({i}, {j})");
        }
    }
}

#[test]
fn wahba_identical_frames_give_the_identity() {
    let ws = Workspace::new();
    let frame = "1,0,0\n0,1,0\n0,0,1\n";
    let obs = ws.file("obs.csv", frame);
    let reference = ws.file("ref.csv", frame);
    let report = ws.run(&["wahba", &obs, &reference]).report();

    assert!((report["value"].as_f64().unwrap() - 3.0).abs() <= 1e-12);
    let x = matrix_field(&report);
    for (i, row) in x.iter().enumerate() {
        for (j, &entry) in row.iter().enumerate() {
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((entry - want).abs() <= 1e-12);
        }
    }
}

#[test]
fn wahba_rejects_empty_and_mismatched_inputs() {
    let ws = Workspace::new();
    let empty = ws.file("empty.csv", "");
    let one = ws.file("one.csv", "1,0,0\n");
    let two = ws.file("two.csv", "1,0,0\n0,1,0\n");
    assert_eq!(ws.run(&["wahba", &empty, &one]).code(), 2);
    assert_eq!(ws.run(&["wahba", &one, &two]).code(), 2);
}

// ── opt1 ─────────────────────────────────────────────────────────────────────

fn identity3() -> &'static str {
    "1,0,0\n0,1,0\n0,0,1\n"
}

#[test]
fn opt1_constrained_trace_matches_the_closed_form() {
    let ws = Workspace::new();
    let a = ws.file("a.csv", identity3());
    let b = ws.file("b.csv", "0,1,0\n0,0,0\n0,0,0\n");
    let report = ws
        .run(&["opt1", &a, &b, "--lo", "0.4", "--hi", "0.6", "--eps", "1e-5"])
        .report();

    // max tr(X) over X ∈ SO(3) with X₁₂ ∈ [0.4, 0.6] is attained at the
    // planar rotation with X₁₂ = 0.4: value 1 + 2·√(1 − 0.16).
    let want = 1.0 + 2.0 * (1.0 - 0.16f64).sqrt();
    assert!((report["value"].as_f64().unwrap() - want).abs() <= 2e-4);
    assert!(report["certificate"]["slack"].as_f64().unwrap() <= 2e-5);
    assert!(report["residuals"]["orth"].as_f64().unwrap() <= 1e-9);
    assert!(report["residuals"]["constraint"].as_f64().unwrap() <= 1e-4);
    let point = report["point"].as_array().unwrap();
    assert!((point[1].as_f64().unwrap() - 0.4).abs() <= 1e-3);
}

#[test]
fn opt1_angle_preset_leaves_a_wide_cone_unconstrained() {
    let ws = Workspace::new();
    let a = ws.file("a.csv", identity3());
    let x0 = ws.file("x0.csv", identity3());
    let report = ws
        .run(&[
            "opt1",
            &a,
            "--angle",
            "3.141592653589793",
            "--x0",
            &x0,
            "--eps",
            "1e-4",
        ])
        .report();

    // At angle π the preset interval [−1, 3] never binds, so the optimum
    // is the unconstrained trace maximum, 3 at the identity.
    assert!((report["value"].as_f64().unwrap() - 3.0).abs() <= 2e-3);
}

#[test]
fn opt1_reversed_interval_is_a_usage_error() {
    let ws = Workspace::new();
    let a = ws.file("a.csv", identity3());
    let b = ws.file("b.csv", "0,1,0\n0,0,0\n0,0,0\n");
    let run = ws.run(&["opt1", &a, &b, "--lo", "0.6", "--hi", "0.4"]);
    assert_eq!(run.code(), 2);
    assert!(run.stderr().contains("lo ≤ hi"));
}

#[test]
fn opt1_unreachable_interval_exits_infeasible() {
    let ws = Workspace::new();
    let a = ws.file("a.csv", identity3());
    let b = ws.file("b.csv", "0,1,0\n0,0,0\n0,0,0\n");
    // |⟨E₁₂, X⟩| ≤ 1 on rotations, so [5, 6] is unreachable.
    let run = ws.run(&["opt1", &a, &b, "--lo", "5", "--hi", "6"]);
    let report = run.report_with_code(3);
    assert_eq!(report["infeasible"], Value::Bool(true));
}

// ── diag ─────────────────────────────────────────────────────────────────────

#[test]
fn diag_rejects_targets_outside_the_attainable_set() {
    let ws = Workspace::new();
    let target = ws.file("d.csv", "1,1,0\n");
    let run = ws.run(&["diag", "--target", &target]);
    let report = run.report_with_code(3);

    assert_eq!(report["infeasible"], Value::Bool(true));
    // The violated odd-set facet is d₁ + d₂ − d₃ ≤ 1, missed by 1.
    let normal: Vec<f64> = report["cut"]["normal"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert_eq!(normal, vec![1.0, 1.0, -1.0]);
    assert_eq!(report["cut"]["rhs"].as_f64().unwrap(), 1.0);
    assert!((report["cut"]["violation"].as_f64().unwrap() - 1.0).abs() <= 1e-12);
}

#[test]
fn diag_constructs_the_requested_diagonal() {
    let ws = Workspace::new();
    let target = ws.file("d.csv", "0,0,1\n");
    let report = ws.run(&["diag", "--target", &target]).report();

    assert!(report["residuals"]["orth"].as_f64().unwrap() <= 1e-9);
    assert!(report["residuals"]["constraint"].as_f64().unwrap() <= 1e-9);
    let x = matrix_field(&report);
    for (i, want) in [0.0, 0.0, 1.0].iter().enumerate() {
        assert!((x[i][i] - want).abs() <= 1e-9);
    }
}

#[test]
fn diag_inequalities_find_a_witness_or_prove_infeasibility() {
    let ws = Workspace::new();
    // Feasible: d₁ ≤ −0.2 and −d₂ ≤ −0.1 (d₂ ≥ 0.1) admit rotation diagonals.
    let feasible = ws.file("rows.csv", "1,0,0,-0.2\n0,-1,0,-0.1\n");
    let report = ws.run(&["diag", "--ineq", &feasible]).report();
    assert!(report["residuals"]["orth"].as_f64().unwrap() <= 1e-9);
    assert!(report["residuals"]["constraint"].as_f64().unwrap() <= 1e-5);
    let x = matrix_field(&report);
    assert!(x[0][0] <= -0.2 + 1e-5);
    assert!(x[1][1] >= 0.1 - 1e-5);

    // Infeasible: diagonal sums of rotations never exceed n.
    let impossible = ws.file("deep.csv", "-1,-1,-1,-3.5\n");
    let run = ws.run(&["diag", "--ineq", &impossible]);
    let report = run.report_with_code(3);
    assert_eq!(report["infeasible"], Value::Bool(true));
}

// ── sut ──────────────────────────────────────────────────────────────────────

#[test]
fn sut_optimizers_match_the_known_anchors() {
    let ws = Workspace::new();
    let sigma = ws.file("sigma.csv", "0.5,0.3,0.2\n");
    let objective = ws.file("a.csv", "1,1,-1\n");

    let special = ws
        .run(&["sut", "--sigma", &sigma, "--opt", &objective, "--group", "so"])
        .report();
    assert!((special["value"].as_f64().unwrap() - 0.921).abs() <= 1e-3);
    assert!(special["gap_bound"].as_f64().unwrap() >= 0.0);
    assert!(special["residuals"]["orth"].as_f64().unwrap() <= 1e-9);
    assert!(special["residuals"]["constraint"].as_f64().unwrap() <= 1e-9);

    let orthogonal = ws
        .run(&["sut", "--sigma", &sigma, "--opt", &objective, "--group", "o"])
        .report();
    assert!(orthogonal["value"].as_f64().unwrap() >= 1.0 - 1e-6);
    assert_eq!(orthogonal["gap_bound"].as_f64().unwrap(), 0.0);
}

#[test]
fn sut_construction_follows_the_sign_pattern() {
    let ws = Workspace::new();
    let sigma = ws.file("sigma.csv", "0.5,0.3,0.2\n");
    let report = ws
        .run(&["sut", "--sigma", &sigma, "--rho", "+-+"])
        .report();

    let x = matrix_field(&report);
    let alpha: Vec<f64> = report["diag_alpha"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    let beta: Vec<f64> = report["diag_beta"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    // '+' picks the larger diagonal value, '-' the smaller.
    assert!((x[0][0] - beta[0]).abs() <= 1e-12);
    assert!((x[1][1] - alpha[1]).abs() <= 1e-12);
    assert!((x[2][2] - beta[2]).abs() <= 1e-12);
    assert!(report["residuals"]["constraint"].as_f64().unwrap() <= 1e-12);
    assert!(report["residuals"]["orth"].as_f64().unwrap() <= 1e-9);
}

#[test]
fn sut_boundary_sigma_is_a_numerical_failure() {
    let ws = Workspace::new();
    // First row (0.8, 0.6) has unit norm: σ sits on the boundary of the
    // projected ball, so no two-valued completion exists.
    let sigma = ws.file("sigma.csv", "0.8,0.6,0.2\n");
    let run = ws.run(&["sut", "--sigma", &sigma, "--rho", "+++"]);
    assert_eq!(run.code(), 4, "stderr: {}", run.stderr());
}

#[test]
fn sut_usage_errors_exit_with_code_two() {
    let ws = Workspace::new();
    let bad_len = ws.file("bad.csv", "0.1,0.2,0.3,0.4\n");
    assert_eq!(ws.run(&["sut", "--sigma", &bad_len, "--rho", "+++"]).code(), 2);

    let sigma = ws.file("sigma.csv", "0.5,0.3,0.2\n");
    // Neither --rho nor --opt.
    assert_eq!(ws.run(&["sut", "--sigma", &sigma]).code(), 2);
    // Malformed pattern.
    assert_eq!(
        ws.run(&["sut", "--sigma", &sigma, "--rho", "+0+"]).code(),
        2
    );
}

// ── image ────────────────────────────────────────────────────────────────────

#[test]
fn image_of_two_entries_is_the_unit_circle() {
    let ws = Workspace::new();
    let a = ws.file("a.csv", "1,0,0\n0,0,0\n0,0,0\n");
    let b = ws.file("b.csv", "0,1,0\n0,0,0\n0,0,0\n");
    let run = ws.run(&["image", &a, &b, "--k", "4"]);
    assert_eq!(run.code(), 0);

    let stdout = run.stdout();
    let lines: Vec<&str> = stdout.lines().map(str::trim).collect();
    assert_eq!(lines.len(), 4);
    let points: Vec<Vec<f64>> = lines
        .iter()
        .map(|l| l.split(',').map(|f| f.parse().unwrap()).collect())
        .collect();
    let want = [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]];
    for (point, want) in points.iter().zip(want.iter()) {
        assert!((point[0] - want[0]).abs() <= 1e-9);
        assert!((point[1] - want[1]).abs() <= 1e-9);
    }
}

#[test]
fn image_svg_output_is_a_single_polygon() {
    let ws = Workspace::new();
    let a = ws.file("a.csv", "1,0,0\n0,0,0\n0,0,0\n");
    let b = ws.file("b.csv", "0,1,0\n0,0,0\n0,0,0\n");
    let report = ws
        .run(&["image", &a, &b, "--k", "64", "--out", "plot.svg"])
        .report();
    assert_eq!(report["command"], Value::String("image".into()));

    let svg = std::fs::read_to_string(ws.path("plot.svg")).expect("svg written");
    assert_eq!(svg.matches("<polygon").count(), 1);
    assert!(svg.contains("viewBox=\"0 0 512 512\""));
}

// ── Round trips and formats ──────────────────────────────────────────────────

#[test]
fn csv_matrix_output_round_trips_exactly() {
    let ws = Workspace::new();
    let target = ws.file("d.csv", "0.1,0.2,0.3\n");
    let report = ws
        .run(&["diag", "--target", &target, "--out", "x.csv"])
        .report();

    let reported = matrix_field(&report);
    let written = parse_csv(&ws.path("x.csv"));
    assert_eq!(reported.len(), written.len());
    for (report_row, file_row) in reported.iter().zip(written.iter()) {
        for (a, b) in report_row.iter().zip(file_row.iter()) {
            // 17 significant digits reproduce the f64 bit pattern.
            assert_eq!(a, b);
        }
    }
}

#[test]
fn json_matrix_files_are_read_and_written() {
    let ws = Workspace::new();
    let obs = ws.file(
        "obs.json",
        r#"{"n": 3, "rows": [[1,0,0],[0,1,0],[0,0,1]]}"#,
    );
    let reference = ws.file("ref.csv", "0,1,0\n-1,0,0\n0,0,1\n");
    let report = ws
        .run(&["wahba", &obs, &reference, "--out", "x.json"])
        .report();

    let written: Value =
        serde_json::from_str(&std::fs::read_to_string(ws.path("x.json")).unwrap())
            .expect("json matrix");
    assert_eq!(written["n"].as_u64().unwrap(), 3);
    let reported = matrix_field(&report);
    let rows = written["rows"].as_array().unwrap();
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row.as_array().unwrap().iter().enumerate() {
            assert_eq!(v.as_f64().unwrap(), reported[i][j]);
        }
    }
}

#[test]
fn reports_carry_digests_and_wall_time() {
    let ws = Workspace::new();
    let target = ws.file("d.csv", "0,0,1\n");
    let report = ws.run(&["diag", "--target", &target]).report();

    let digest = report["inputs_digest"].as_str().unwrap();
    assert_eq!(digest.len(), 64);
    assert!(digest.chars().all(|c| c.is_ascii_hexdigit()));
    assert!(report["wall_ms"].as_f64().unwrap() >= 0.0);

    // The digest is a function of input bytes: same content, same digest.
    let copy = ws.file("copy.csv", "0,0,1\n");
    let second = ws.run(&["diag", "--target", &copy]).report();
    assert_eq!(second["inputs_digest"].as_str().unwrap(), digest);
}

#[test]
fn unparseable_input_is_a_usage_error() {
    let ws = Workspace::new();
    let garbage = ws.file("bad.csv", "1,two,3\n");
    let run = ws.run(&["diag", "--target", &garbage]);
    assert_eq!(run.code(), 2);
    assert!(run.stderr().contains("cannot parse"));

    let ragged = ws.file("ragged.csv", "1,0\n1\n");
    assert_eq!(ws.run(&["wahba", &ragged, &ragged]).code(), 2);

    let nonfinite = ws.file("inf.csv", "inf,0,0\n");
    assert_eq!(ws.run(&["diag", "--target", &nonfinite]).code(), 2);
}
