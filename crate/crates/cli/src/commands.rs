use std::collections::BTreeMap;
use std::fs;
use std::io::Read;
use std::path::Path;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sfp_core::dynamics::target_at;
use sfp_core::harness::{asymptotic_statistics, run_ensemble, AsymptoticStats};
use sfp_core::noise::NoiseKind;
use sfp_core::protocol::check_convergence_criterion;
use sfp_core::qubit::bloch_vector;
use sfp_core::spectrum::ensemble_spectrum;
use sfp_core::{presets, Experiment, SfpConfig, Spectrum, SpectrumEstimator};

use crate::error::CliError;
use crate::io::{locate, read_table, schema_tag, Cell, Format, TableWriter};
use crate::{AnalysisKind, Overrides};

const TRACE_COLUMNS: &[&str] = &["run", "cycle", "t", "outcome", "fidelity", "p_up"];
const RUNS_COLUMNS: &[&str] = &[
    "run",
    "seed",
    "cycles",
    "final_fidelity",
    "asymptotic_mean",
    "asymptotic_rms",
];
const MEAN_COLUMNS: &[&str] = &["cycle", "t", "mean_fidelity", "std_fidelity", "mean_p_up"];
const BLOCH_COLUMNS: &[&str] = &["run", "cycle", "t", "x", "y", "z"];
const BLOCH_TARGET_COLUMNS: &[&str] = &[
    "run", "cycle", "t", "x", "y", "z", "target_x", "target_y", "target_z", "fidelity",
];
const SPECTRUM_COLUMNS: &[&str] = &["omega", "magnitude"];
const ASYMPTOTIC_COLUMNS: &[&str] = &["run", "samples", "mean", "rms"];

const DEFAULT_BURN_IN: f64 = 1.0 / 3.0;

#[derive(Serialize)]
struct Header {
    schema: String,
    tool: &'static str,
    version: &'static str,
    timestamp_unix: u64,
    master_seed: u64,
    runs: usize,
    cycles: usize,
    tau: f64,
    gamma: Option<f64>,
    gamma_per_drive_period: Option<f64>,
    reversal_angles: Option<Vec<f64>>,
    max_reversal_angle: Option<f64>,
    noise_kind: Option<NoiseKind>,
    noise_rms: Option<f64>,
    files: Vec<String>,
    config: String,
}

fn read_config_text(path: Option<&Path>) -> Result<String, CliError> {
    match path {
        Some(p) if p != Path::new("-") => fs::read_to_string(p).map_err(|e| CliError::io(p, e)),
        _ => {
            let mut s = String::new();
            std::io::stdin()
                .read_to_string(&mut s)
                .map_err(|e| CliError::Io(format!("stdin: {e}")))?;
            Ok(s)
        }
    }
}

fn load_config(path: Option<&Path>, overrides: &Overrides) -> Result<SfpConfig, CliError> {
    let text = read_config_text(path)?;
    Ok(SfpConfig::from_toml_str(&text, &overrides.assignments())?)
}

fn float(x: f64) -> Cell {
    Cell::Float(x)
}

fn tail_stats(series: &[f64], burn_in: f64) -> Option<AsymptoticStats> {
    asymptotic_statistics(&[series], burn_in).ok()
}

pub fn preset(name: &str, overrides: &Overrides) -> Result<ExitCode, CliError> {
    let cfg = presets::preset_with_overrides(name, &overrides.assignments())?;
    // validate before printing so a bad override fails here, not in `run`
    Experiment::new(cfg.clone())?;
    print!("{}", cfg.to_toml_string()?);
    Ok(ExitCode::SUCCESS)
}

pub fn run(
    config: Option<&Path>,
    out: &Path,
    format: Format,
    overrides: &Overrides,
) -> Result<ExitCode, CliError> {
    let cfg = load_config(config, overrides)?;
    let exp = Experiment::new(cfg)?;
    let cfg = &exp.config;
    let ens = run_ensemble(&exp)?;
    let spectrum = cfg
        .spectrum
        .map(|est| ens.spectrum(cfg.tau, est))
        .transpose()?;

    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let mut files = Vec::new();

    let mut w = TableWriter::create(out, "fidelity_trace", TRACE_COLUMNS, format)?;
    for rec in &ens.records {
        for k in 0..rec.len() {
            w.row(&[
                Cell::Int(rec.run as u64),
                Cell::Int(k as u64),
                float(rec.time[k]),
                rec.outcome[k].map_or(Cell::Empty, |o| Cell::Int(o as u64)),
                float(rec.fidelity[k]),
                float(rec.p_up[k]),
            ])?;
        }
    }
    files.push(w.finish()?);

    let mut w = TableWriter::create(out, "runs", RUNS_COLUMNS, format)?;
    for rec in &ens.records {
        let stats = tail_stats(rec.fidelity_series(), cfg.burn_in);
        w.row(&[
            Cell::Int(rec.run as u64),
            Cell::Int(rec.seed),
            Cell::Int(rec.cycles() as u64),
            float(*rec.fidelity.last().unwrap_or(&f64::NAN)),
            stats.map_or(Cell::Empty, |s| float(s.mean)),
            stats.map_or(Cell::Empty, |s| float(s.rms)),
        ])?;
    }
    files.push(w.finish()?);

    let mut w = TableWriter::create(out, "mean_trace", MEAN_COLUMNS, format)?;
    for (k, t) in ens.records[0].time.iter().enumerate() {
        w.row(&[
            Cell::Int(k as u64),
            float(*t),
            float(ens.mean_fidelity[k]),
            float(ens.std_fidelity[k]),
            float(ens.mean_p_up[k]),
        ])?;
    }
    files.push(w.finish()?);

    if cfg.record_bloch {
        let mut w = TableWriter::create(out, "bloch", BLOCH_COLUMNS, format)?;
        for rec in &ens.records {
            if let Some(points) = &rec.bloch {
                for (k, b) in points.iter().enumerate() {
                    w.row(&[
                        Cell::Int(rec.run as u64),
                        Cell::Int(k as u64),
                        float(rec.time[k]),
                        float(b[0]),
                        float(b[1]),
                        float(b[2]),
                    ])?;
                }
            }
        }
        files.push(w.finish()?);
    }

    if let Some(s) = &spectrum {
        files.push(write_spectrum(out, s, format)?);
    }

    let header = Header {
        schema: schema_tag("header"),
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        timestamp_unix: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs()),
        master_seed: cfg.master_seed,
        runs: cfg.runs,
        cycles: cfg.cycles,
        tau: cfg.tau,
        gamma: exp.gamma(),
        gamma_per_drive_period: exp.gamma_per_drive_period(),
        reversal_angles: exp
            .reference_feedback
            .as_ref()
            .map(|f| f.reversal_angles().to_vec()),
        max_reversal_angle: exp
            .reference_feedback
            .as_ref()
            .map(|f| f.max_reversal_angle()),
        noise_kind: exp.noise.map(|n| n.kind),
        noise_rms: exp.noise.map(|n| n.rms),
        files: files
            .iter()
            .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
            .collect(),
        config: cfg.to_toml_string()?,
    };
    let header_path = out.join("header.json");
    let text = serde_json::to_string_pretty(&header).expect("header serializes");
    fs::write(&header_path, text + "\n").map_err(|e| CliError::io(&header_path, e))?;

    println!("runs: {}  cycles: {}", cfg.runs, cfg.cycles);
    if let Some(g) = exp.gamma() {
        println!("gamma: {g:.6}");
    }
    if let Some(f) = &exp.reference_feedback {
        println!("max reversal angle: {:.6}", f.max_reversal_angle());
    }
    println!(
        "final mean fidelity: {:.6}",
        ens.mean_fidelity.last().copied().unwrap_or(f64::NAN)
    );
    let series: Vec<&[f64]> = ens.records.iter().map(|r| r.fidelity_series()).collect();
    if let Ok(s) = asymptotic_statistics(&series, cfg.burn_in) {
        println!("asymptotic fidelity: {:.6} ± {:.6}", s.mean, s.rms);
    }
    if let Some(s) = &spectrum {
        println!(
            "spectrum peak: {:.6} (resolution {:.3e})",
            s.peak, s.resolution
        );
    }
    println!("wrote {}", out.display());
    Ok(ExitCode::SUCCESS)
}

fn write_spectrum(
    out: &Path,
    s: &Spectrum,
    format: Format,
) -> Result<std::path::PathBuf, CliError> {
    let mut w = TableWriter::create(out, "spectrum", SPECTRUM_COLUMNS, format)?;
    for (o, m) in s.omega.iter().zip(&s.magnitude) {
        w.row(&[float(*o), float(*m)])?;
    }
    w.finish()
}

pub fn check(config: Option<&Path>, overrides: &Overrides) -> Result<ExitCode, CliError> {
    let cfg = load_config(config, overrides)?;
    let exp = Experiment::new(cfg)?;
    let target = target_at(&exp.trajectory, 0.0);
    let report = check_convergence_criterion(&exp.povm, &target)?;

    if !exp.is_static_target() {
        println!("target evaluated at t = 0");
    }
    println!("dimension: {}", report.dimension);
    println!(
        "rank of {{E_i |target>}}: {} of {}",
        report.rank, report.dimension
    );
    println!("spans hilbert space: {}", report.spans_hilbert_space);
    if let Some(d) = report.det_psi {
        println!("det psi: {:.6e} (|det| = {:.6e})", d, d.norm());
    }
    if let Some(d) = report.det_lambda {
        println!("det lambda: {:.6e} (|det| = {:.6e})", d, d.norm());
    }
    println!(
        "informationally complete: {} (operator rank {})",
        report.informationally_complete, report.operator_rank
    );
    if let Some(dir) = &report.failing_direction {
        let amps: Vec<String> = dir
            .amplitudes()
            .iter()
            .map(|a| format!("{:.6}{:+.6}i", a.re, a.im))
            .collect();
        println!("unreachable direction: [{}]", amps.join(", "));
    }
    if report.satisfied() {
        println!("criterion satisfied");
        Ok(ExitCode::SUCCESS)
    } else {
        println!("criterion FAILED: the target cannot be reached from every initial state");
        Ok(ExitCode::from(1))
    }
}

/// Header written by `run`, if present.
fn read_header(dir: &Path) -> Result<Option<SfpConfig>, CliError> {
    let path = dir.join("header.json");
    if !path.exists() {
        return Ok(None);
    }
    let text = fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Schema(format!("{}: {e}", path.display())))?;
    let schema = value.get("schema").and_then(|s| s.as_str());
    if schema != Some(schema_tag("header").as_str()) {
        return Err(CliError::Schema(format!(
            "{}: expected schema {}, found {}",
            path.display(),
            schema_tag("header"),
            schema.unwrap_or("none")
        )));
    }
    let config = value
        .get("config")
        .and_then(|c| c.as_str())
        .ok_or_else(|| CliError::Schema(format!("{}: missing `config`", path.display())))?;
    Ok(Some(SfpConfig::from_toml_str(config, &[])?))
}

/// Per-run columns of the fidelity trace, in cycle order.
struct Traces {
    time: BTreeMap<u64, Vec<f64>>,
    fidelity: BTreeMap<u64, Vec<f64>>,
    p_up: BTreeMap<u64, Vec<f64>>,
}

fn read_traces(dir: &Path) -> Result<Traces, CliError> {
    let path = locate(dir, "fidelity_trace")?;
    let table = read_table(&path, "fidelity_trace", TRACE_COLUMNS)?;
    let [run, cycle, t, fid, p] =
        ["run", "cycle", "t", "fidelity", "p_up"].map(|c| table.column(c));
    let (run, cycle, t, fid, p) = (run?, cycle?, t?, fid?, p?);
    let mut traces = Traces {
        time: BTreeMap::new(),
        fidelity: BTreeMap::new(),
        p_up: BTreeMap::new(),
    };
    for (n, row) in table.rows.iter().enumerate() {
        let get = |i: usize| {
            row[i].ok_or_else(|| {
                CliError::Schema(format!(
                    "{}: row {} has an empty `{}`",
                    path.display(),
                    n + 1,
                    table.columns[i]
                ))
            })
        };
        let r = get(run)? as u64;
        let k = get(cycle)? as usize;
        let times = traces.time.entry(r).or_default();
        if k != times.len() {
            return Err(CliError::Schema(format!(
                "{}: run {r} skips from cycle {} to {k}",
                path.display(),
                times.len()
            )));
        }
        times.push(get(t)?);
        traces.fidelity.entry(r).or_default().push(get(fid)?);
        traces.p_up.entry(r).or_default().push(get(p)?);
    }
    if traces.time.is_empty() {
        return Err(CliError::Schema(format!("{}: no rows", path.display())));
    }
    Ok(traces)
}

pub fn analyze(
    kind: AnalysisKind,
    input: &Path,
    out: &Path,
    estimator: Option<&str>,
    burn_in: Option<f64>,
    format: Format,
) -> Result<ExitCode, CliError> {
    let config = read_header(input)?;
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    match kind {
        AnalysisKind::Spectrum => {
            let traces = read_traces(input)?;
            let estimator: SpectrumEstimator = match estimator {
                Some(name) => name.parse()?,
                None => config
                    .as_ref()
                    .and_then(|c| c.spectrum)
                    .unwrap_or(SpectrumEstimator::AveragedPower),
            };
            let tau = match &config {
                Some(c) => c.tau,
                None => {
                    let t = traces.time.values().next().expect("non-empty");
                    if t.len() < 2 {
                        return Err(CliError::Schema("trace too short to infer tau".into()));
                    }
                    t[1] - t[0]
                }
            };
            let series: Vec<&[f64]> = traces.p_up.values().map(|s| &s[1..]).collect();
            let s = ensemble_spectrum(&series, tau, estimator)?;
            let path = write_spectrum(out, &s, format)?;
            println!("estimator: {}", estimator.name());
            println!("peak: {:.6}", s.peak);
            println!("argmax: {:.6}", s.argmax);
            println!("width: {:.6}", s.width);
            println!("resolution: {:.6e}", s.resolution);
            println!("wrote {}", path.display());
        }
        AnalysisKind::Asymptotic => {
            let traces = read_traces(input)?;
            let burn_in = burn_in
                .or(config.as_ref().map(|c| c.burn_in))
                .unwrap_or(DEFAULT_BURN_IN);
            if !(0.0..1.0).contains(&burn_in) {
                return Err(CliError::Config(format!(
                    "burn_in: must lie in [0, 1), got {burn_in}"
                )));
            }
            let series: Vec<&[f64]> = traces.fidelity.values().map(|s| &s[1..]).collect();
            let pooled = asymptotic_statistics(&series, burn_in)?;
            let mut w = TableWriter::create(out, "asymptotic", ASYMPTOTIC_COLUMNS, format)?;
            for (run, s) in traces.fidelity.keys().zip(&series) {
                let st = asymptotic_statistics(&[s], burn_in)?;
                w.row(&[
                    Cell::Int(*run),
                    Cell::Int(st.samples as u64),
                    float(st.mean),
                    float(st.rms),
                ])?;
            }
            let path = w.finish()?;
            println!(
                "asymptotic fidelity: {:.6} ± {:.6} ({} samples, burn-in {:.3})",
                pooled.mean, pooled.rms, pooled.samples, burn_in
            );
            println!("wrote {}", path.display());
        }
        AnalysisKind::Bloch => {
            let config = config.ok_or_else(|| {
                CliError::Schema(format!(
                    "{}: bloch analysis needs header.json for the target",
                    input.display()
                ))
            })?;
            let exp = Experiment::new(config)?;
            let path = locate(input, "bloch")?;
            let table = read_table(&path, "bloch", BLOCH_COLUMNS)?;
            let idx = BLOCH_COLUMNS
                .iter()
                .map(|c| table.column(c))
                .collect::<Result<Vec<_>, _>>()?;
            let mut w = TableWriter::create(out, "bloch_target", BLOCH_TARGET_COLUMNS, format)?;
            let mut tail_fidelity = Vec::new();
            for row in &table.rows {
                let v: Vec<f64> = idx
                    .iter()
                    .map(|&i| {
                        row[i].ok_or_else(|| {
                            CliError::Schema(format!("{}: empty cell", path.display()))
                        })
                    })
                    .collect::<Result<_, _>>()?;
                let target = bloch_vector(&target_at(&exp.trajectory, v[2]))?;
                let dot: f64 = (0..3).map(|j| v[3 + j] * target[j]).sum();
                // pure-state fidelity from Bloch vectors
                let fidelity = 0.5 * (1.0 + dot);
                if v[1] as usize * 3 >= exp.config.cycles {
                    tail_fidelity.push(fidelity);
                }
                w.row(&[
                    Cell::Int(v[0] as u64),
                    Cell::Int(v[1] as u64),
                    float(v[2]),
                    float(v[3]),
                    float(v[4]),
                    float(v[5]),
                    float(target[0]),
                    float(target[1]),
                    float(target[2]),
                    float(fidelity),
                ])?;
            }
            let path = w.finish()?;
            if !tail_fidelity.is_empty() {
                let m = tail_fidelity.iter().sum::<f64>() / tail_fidelity.len() as f64;
                println!("mean fidelity to target after first third: {m:.6}");
            }
            println!("wrote {}", path.display());
        }
    }
    Ok(ExitCode::SUCCESS)
}
