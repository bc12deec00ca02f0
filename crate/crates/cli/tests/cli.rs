use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

fn sfp(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_sfp"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn sfp");
    {
        let mut pipe = child.stdin.take().unwrap();
        if let Some(text) = stdin {
            pipe.write_all(text.as_bytes()).unwrap();
        }
    }
    child.wait_with_output().unwrap()
}

fn preset(name: &str, extra: &[&str]) -> String {
    let mut args = vec!["preset", name];
    args.extend_from_slice(extra);
    let out = sfp(&args, None);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Pulls `<label>: <number>` from command output.
fn field(text: &str, label: &str) -> f64 {
    let line = text
        .lines()
        .find(|l| l.starts_with(label))
        .unwrap_or_else(|| panic!("no `{label}` in:\n{text}"));
    line[label.len()..]
        .trim_start_matches(':')
        .split_whitespace()
        .next()
        .unwrap()
        .parse()
        .unwrap()
}

const EIGENSTATE_TARGET: &str = r#"
cycles = 2000
tau = 1.0

[measurement]
kind = "sigma_z"
p0 = 0.45

[target]
kind = "static"
state = { kind = "basis", index = 1 }

[initial]
kind = "basis"
index = 0
"#;

#[test]
fn preset_piped_into_run_converges() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig2");
    let cfg = preset("fig2", &[]);
    let o = sfp(
        &["run", "--out", out.to_str().unwrap(), "--runs", "40"],
        Some(&cfg),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    for f in [
        "header.json",
        "fidelity_trace.csv",
        "runs.csv",
        "mean_trace.csv",
    ] {
        assert!(out.join(f).exists(), "{f} missing");
    }
    let trace = fs::read_to_string(out.join("fidelity_trace.csv")).unwrap();
    let mut lines = trace.lines();
    assert_eq!(lines.next(), Some("# schema: sfp.fidelity_trace/1"));
    assert_eq!(lines.next(), Some("run,cycle,t,outcome,fidelity,p_up"));

    let a = sfp(
        &[
            "analyze",
            "--kind",
            "asymptotic",
            "--input",
            out.to_str().unwrap(),
            "--burn-in",
            "0.8333333333333334",
        ],
        None,
    );
    assert!(a.status.success(), "{}", stderr(&a));
    assert!(
        field(&stdout(&a), "asymptotic fidelity") >= 0.99,
        "{}",
        stdout(&a)
    );
}

#[test]
fn out_of_range_strength_is_a_config_error() {
    let cfg = preset("fig2", &[]).replace("p0 = 0.45", "p0 = 1.5");
    let o = sfp(&["run", "--out", "/nonexistent/never"], Some(&cfg));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("measurement.p0"), "{}", stderr(&o));

    let o = sfp(&["preset", "fig2", "--set", "measurement.p0=1.5"], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("measurement.p0"));
}

#[test]
fn unknown_keys_are_rejected() {
    let cfg = preset("fig2", &[]) + "bogus = 1\n";
    let o = sfp(&["check"], Some(&cfg));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bogus"), "{}", stderr(&o));

    let o = sfp(
        &["preset", "fig2", "--set", "measurement.strength=0.4"],
        None,
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn same_seed_gives_byte_identical_data_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = preset("fig3", &["--cycles", "400", "--runs", "3"]);
    let mut outs = Vec::new();
    for (name, format) in [("a", "csv"), ("b", "csv"), ("c", "jsonl"), ("d", "jsonl")] {
        let out = dir.path().join(name);
        let o = sfp(
            &[
                "run",
                "--out",
                out.to_str().unwrap(),
                "--format",
                format,
                "--seed",
                "9",
            ],
            Some(&cfg),
        );
        assert!(o.status.success(), "{}", stderr(&o));
        outs.push(out);
    }
    for (x, y, ext) in [(0, 1, "csv"), (2, 3, "jsonl")] {
        for f in ["fidelity_trace", "runs", "mean_trace"] {
            let name = format!("{f}.{ext}");
            assert_eq!(
                fs::read(outs[x].join(&name)).unwrap(),
                fs::read(outs[y].join(&name)).unwrap(),
                "{name} differs"
            );
        }
    }
    let other = dir.path().join("e");
    sfp(
        &["run", "--out", other.to_str().unwrap(), "--seed", "10"],
        Some(&cfg),
    );
    assert_ne!(
        fs::read(outs[0].join("fidelity_trace.csv")).unwrap(),
        fs::read(other.join("fidelity_trace.csv")).unwrap()
    );
}

#[test]
fn header_config_reparses_to_the_same_run() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    let second = dir.path().join("second");
    let cfg = preset("fig2", &["--cycles", "300", "--runs", "2", "--seed", "4"]);
    assert!(sfp(&["run", "--out", first.to_str().unwrap()], Some(&cfg))
        .status
        .success());
    let header: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(first.join("header.json")).unwrap()).unwrap();
    assert_eq!(header["schema"], "sfp.header/1");
    assert_eq!(header["master_seed"], 4);
    assert!(header["reversal_angles"].as_array().unwrap().len() == 2);
    let echoed = header["config"].as_str().unwrap();
    assert_eq!(echoed, cfg);
    assert!(
        sfp(&["run", "--out", second.to_str().unwrap()], Some(echoed))
            .status
            .success()
    );
    assert_eq!(
        fs::read(first.join("fidelity_trace.csv")).unwrap(),
        fs::read(second.join("fidelity_trace.csv")).unwrap()
    );
}

fn abs_det(text: &str, label: &str) -> f64 {
    let line = text.lines().find(|l| l.starts_with(label)).unwrap();
    let tail = &line[line.find("|det| = ").unwrap() + 8..];
    tail.trim_end_matches(')').parse().unwrap()
}

#[test]
fn check_reports_reachability() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("eigen.toml");
    fs::write(&path, EIGENSTATE_TARGET).unwrap();

    let o = sfp(&["check", "--config", path.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    assert!(stdout(&o).contains("spans hilbert space: false"));
    assert_eq!(abs_det(&stdout(&o), "det psi"), 0.0);

    let o = sfp(&["check"], Some(&preset("fig2", &[])));
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    // target cos(π/8)|↓⟩ − i sin(π/8)|↑⟩: |det ψ| = sin(π/4)/2
    let det = abs_det(&stdout(&o), "det psi");
    assert!(
        (det - 0.5 * std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-6,
        "{det}"
    );
    // mixing matrix [[1-p0, p0], [p0, 1-p0]]: det = 1 - 2 p0
    assert!((abs_det(&stdout(&o), "det lambda") - 0.1).abs() < 1e-6);

    let o = sfp(
        &["check", "--set", "measurement.p0=0.5"],
        Some(&preset("fig2", &[])),
    );
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    assert!(stdout(&o).contains("rank of {E_i |target>}: 1 of 2"));
}

#[test]
fn eigenstate_target_run_never_moves() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("eigen");
    let o = sfp(
        &["run", "--out", out.to_str().unwrap()],
        Some(EIGENSTATE_TARGET),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let trace = fs::read_to_string(out.join("fidelity_trace.csv")).unwrap();
    for line in trace.lines().skip(2) {
        let fidelity: f64 = line.split(',').nth(4).unwrap().parse().unwrap();
        assert!(fidelity.abs() <= 1e-9, "{line}");
    }
}

#[test]
fn constant_trace_has_zero_spread() {
    let dir = tempfile::tempdir().unwrap();
    let mut text =
        String::from("# schema: sfp.fidelity_trace/1\nrun,cycle,t,outcome,fidelity,p_up\n");
    for run in 0..2 {
        for k in 0..=300 {
            let outcome = if k == 0 { String::new() } else { "1".into() };
            text += &format!("{run},{k},{k}.0,{outcome},0.75,0.5\n");
        }
    }
    fs::write(dir.path().join("fidelity_trace.csv"), text).unwrap();
    let o = sfp(
        &[
            "analyze",
            "--kind",
            "asymptotic",
            "--input",
            dir.path().to_str().unwrap(),
        ],
        None,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let line = stdout(&o);
    assert!(
        line.contains("asymptotic fidelity: 0.750000 ± 0.000000"),
        "{line}"
    );
}

#[test]
fn analyze_rejects_schema_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("fidelity_trace.csv"),
        "# schema: sfp.fidelity_trace/99\nrun,cycle,t,outcome,fidelity,p_up\n0,0,0,,1,1\n",
    )
    .unwrap();
    let o = sfp(
        &[
            "analyze",
            "--kind",
            "asymptotic",
            "--input",
            dir.path().to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("schema"), "{}", stderr(&o));

    fs::write(
        dir.path().join("fidelity_trace.csv"),
        "# schema: sfp.fidelity_trace/1\nrun,cycle,t,fidelity\n0,0,0,1\n",
    )
    .unwrap();
    let o = sfp(
        &[
            "analyze",
            "--kind",
            "asymptotic",
            "--input",
            dir.path().to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("missing column"), "{}", stderr(&o));
}

fn run_dir(dir: &Path, name: &str, cfg: &str, extra: &[&str]) -> String {
    let out = dir.join(name);
    let mut args = vec!["run", "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    let o = sfp(&args, Some(cfg));
    assert!(o.status.success(), "{}", stderr(&o));
    out.to_str().unwrap().to_owned()
}

#[test]
fn spectrum_of_reduced_frequency_shift_run() {
    // one-tenth of the detuning study: δ = 0.1 still resolved by 6·2π/δ
    let dir = tempfile::tempdir().unwrap();
    let cfg = preset(
        "fig4",
        &[
            "--set",
            "target.omega=1.1",
            "--cycles",
            "3800",
            "--runs",
            "8",
        ],
    );
    let out = run_dir(dir.path(), "shift", &cfg, &["--format", "jsonl"]);
    let o = sfp(&["analyze", "--kind", "spectrum", "--input", &out], None);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let (peak, res) = (field(&text, "peak"), field(&text, "resolution"));
    assert!((peak - 1.1).abs() <= res, "{text}");
    assert!(Path::new(&out).join("spectrum.csv").exists());
}

#[test]
fn bloch_table_follows_figure_eight() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = preset("fig6", &["--cycles", "3000"]);
    let out = run_dir(dir.path(), "eight", &cfg, &[]);
    let o = sfp(&["analyze", "--kind", "bloch", "--input", &out], None);
    assert!(o.status.success(), "{}", stderr(&o));
    let m = field(&stdout(&o), "mean fidelity to target after first third");
    assert!(m > 0.95, "{}", stdout(&o));
    let table = fs::read_to_string(Path::new(&out).join("bloch_target.csv")).unwrap();
    assert!(table.starts_with("# schema: sfp.bloch_target/1\n"));
}
