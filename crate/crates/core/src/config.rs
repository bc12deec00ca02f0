//! Experiment configuration: a TOML schema, dotted-path overrides, and
//! validation into a ready-to-run [`Experiment`].
//!
//! Complex numbers are written as `[re, im]`. Every table rejects unknown
//! keys.

use serde::{Deserialize, Serialize};

use crate::dynamics::{
    target_at, RabiDrive, TargetTrajectory, DEFAULT_AZIMUTH_AMPLITUDE, DEFAULT_POLAR_AMPLITUDE,
};
use crate::error::{Result, SfpError};
use crate::linalg::{c, CVector};
use crate::measurement::{
    make_unsharp_observable, make_unsharp_sigma_z, MeasurementStrength, Povm, UnsharpObservable,
};
use crate::noise::{NoiseChannel, NoiseKind};
use crate::protocol::{build_reversal, ReversalFeedback};
use crate::qubit;
use crate::rng::RandomStream;
use crate::spectrum::SpectrumEstimator;
use crate::state::PureState;

/// Tolerance for user-supplied amplitudes before they are renormalized.
pub const INPUT_NORM_TOL: f64 = 1e-9;

fn default_dimension() -> usize {
    2
}
fn default_runs() -> usize {
    1
}
fn default_burn_in() -> f64 {
    1.0 / 3.0
}
fn yes() -> bool {
    true
}
fn x_axis() -> [f64; 3] {
    [1.0, 0.0, 0.0]
}
fn default_azimuth() -> f64 {
    DEFAULT_AZIMUTH_AMPLITUDE
}
fn default_polar() -> f64 {
    DEFAULT_POLAR_AMPLITUDE
}

/// Order of operations inside one cycle.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CycleOrder {
    /// drive, dephasing, measurement, reversal
    #[default]
    EvolveFirst,
    /// measurement, reversal, drive, dephasing
    MeasureFirst,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SfpConfig {
    #[serde(default = "default_dimension")]
    pub dimension: usize,
    pub cycles: usize,
    #[serde(default = "default_runs")]
    pub runs: usize,
    /// Cycle period τ.
    pub tau: f64,
    #[serde(default)]
    pub master_seed: u64,
    /// Fraction of each run discarded before asymptotic statistics.
    #[serde(default = "default_burn_in")]
    pub burn_in: f64,
    /// Perform the measurement each cycle.
    #[serde(default = "yes")]
    pub measure: bool,
    /// Apply the reversal after each measurement.
    #[serde(default = "yes")]
    pub feedback: bool,
    #[serde(default)]
    pub order: CycleOrder,
    #[serde(default)]
    pub record_bloch: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumEstimator>,
    pub measurement: MeasurementSpec,
    pub target: TargetSpec,
    pub initial: StateSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drive: Option<DriveSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasurementSpec {
    /// Unsharp σ_z with reliability `p0`.
    SigmaZ { p0: f64 },
    /// Effects Σ_j λ_ij |o_j⟩⟨o_j| over an orthonormal basis.
    Unsharp {
        basis: Vec<Vec<[f64; 2]>>,
        eigenvalues: Vec<f64>,
        lambda: Vec<Vec<f64>>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    Vector {
        amplitudes: Vec<[f64; 2]>,
    },
    Basis {
        index: usize,
    },
    /// Qubit state at polar angle `theta` from |↑⟩ and azimuth `phi`.
    Bloch {
        theta: f64,
        phi: f64,
    },
    /// exp(−i angle/2 n·σ) applied to basis state `from`.
    Rotated {
        axis: [f64; 3],
        angle: f64,
        #[serde(default)]
        from: usize,
    },
    OrthogonalToTarget {},
    /// Haar-random state, drawn per run.
    Random {},
    /// Run r starts from `states[r % len]`.
    List {
        states: Vec<StateSpec>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetSpec {
    Static {
        state: StateSpec,
    },
    Rabi {
        initial: StateSpec,
        omega: f64,
        #[serde(default = "x_axis")]
        axis: [f64; 3],
    },
    FigureEight {
        period: f64,
        #[serde(default = "default_azimuth")]
        azimuth_amplitude: f64,
        #[serde(default = "default_polar")]
        polar_amplitude: f64,
    },
    Custom {
        times: Vec<f64>,
        states: Vec<StateSpec>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSpec {
    pub omega: f64,
    #[serde(default = "x_axis")]
    pub axis: [f64; 3],
    pub dt: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    /// Absolute RMS amplitude.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rms: Option<f64>,
    /// RMS angle as a multiple of the reversal angle at t = 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relative_rms: Option<f64>,
}

fn err(key: &str, msg: impl std::fmt::Display) -> SfpError {
    SfpError::Config(format!("{key}: {msg}"))
}

/// Parses a `--set key.path=value` override into `table`. The value is read
/// as a TOML value, falling back to a bare string.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| SfpError::Config(format!("override `{assignment}` is not key=value")))?;
    let path = path.trim();
    let raw = raw.trim();
    let value = match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(SfpError::Config(format!(
            "override key `{path}` is malformed"
        )));
    }
    let mut node = table;
    for (depth, key) in keys[..keys.len() - 1].iter().enumerate() {
        let entry = node
            .entry(key.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        node = entry.as_table_mut().ok_or_else(|| {
            SfpError::Config(format!(
                "override `{path}`: `{}` is not a table",
                keys[..=depth].join(".")
            ))
        })?;
    }
    node.insert(keys[keys.len() - 1].to_string(), value);
    Ok(())
}

impl SfpConfig {
    /// Parses TOML text, applying dotted overrides before deserialization.
    pub fn from_toml_str(text: &str, overrides: &[String]) -> Result<SfpConfig> {
        if overrides.is_empty() {
            return toml::from_str(text).map_err(|e| SfpError::Config(e.to_string()));
        }
        let mut table: toml::Table =
            toml::from_str(text).map_err(|e| SfpError::Config(e.to_string()))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let merged = toml::to_string(&table).map_err(|e| SfpError::Config(e.to_string()))?;
        toml::from_str(&merged).map_err(|e| SfpError::Config(format!("after overrides: {e}")))
    }

    pub fn with_overrides(&self, overrides: &[String]) -> Result<SfpConfig> {
        SfpConfig::from_toml_str(&self.to_toml_string()?, overrides)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| SfpError::Config(e.to_string()))
    }

    /// Measurement reliability p₀ when the measurement is unsharp σ_z.
    pub fn p0(&self) -> Option<f64> {
        match self.measurement {
            MeasurementSpec::SigmaZ { p0 } => Some(p0),
            MeasurementSpec::Unsharp { .. } => None,
        }
    }
}

/// A starting state, resolved except for parts that depend on the run.
#[derive(Clone, Debug)]
pub enum InitialState {
    Fixed(PureState),
    Random,
}

/// A validated configuration with all derived objects built.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub config: SfpConfig,
    pub povm: Povm,
    pub observable: Option<UnsharpObservable>,
    pub trajectory: TargetTrajectory,
    pub initial: Vec<InitialState>,
    pub drive: Option<RabiDrive>,
    pub noise: Option<NoiseChannel>,
    /// Reversal built against the target at t = 0, when it exists.
    pub reference_feedback: Option<ReversalFeedback>,
}

fn resolve_state(spec: &StateSpec, dim: usize, key: &str) -> Result<PureState> {
    match spec {
        StateSpec::Vector { amplitudes } => {
            if amplitudes.len() != dim {
                return Err(err(
                    key,
                    format!("{} amplitudes for dimension {dim}", amplitudes.len()),
                ));
            }
            let v = CVector(amplitudes.iter().map(|[re, im]| c(*re, *im)).collect());
            let n2 = v.norm_sqr();
            if !n2.is_finite() || (n2 - 1.0).abs() > INPUT_NORM_TOL {
                return Err(err(
                    key,
                    format!("amplitudes not normalized (norm² = {n2})"),
                ));
            }
            PureState::normalize(v).map_err(|e| err(key, e))
        }
        StateSpec::Basis { index } => {
            if *index >= dim {
                return Err(err(key, format!("basis index {index} >= dimension {dim}")));
            }
            Ok(PureState::basis(dim, *index))
        }
        StateSpec::Bloch { theta, phi } => {
            require_qubit(dim, key)?;
            Ok(qubit::from_bloch_angles(*theta, *phi))
        }
        StateSpec::Rotated { axis, angle, from } => {
            require_qubit(dim, key)?;
            if *from >= 2 {
                return Err(err(key, format!("basis index {from} >= dimension 2")));
            }
            if qubit::norm3(*axis) == 0.0 {
                return Err(err(key, "rotation axis is zero"));
            }
            Ok(PureState::basis(2, *from).evolve(&qubit::rotation(*axis, *angle)))
        }
        StateSpec::OrthogonalToTarget {} | StateSpec::Random {} | StateSpec::List { .. } => {
            Err(err(key, "only an explicit state is allowed here"))
        }
    }
}

fn require_qubit(dim: usize, key: &str) -> Result<()> {
    if dim != 2 {
        return Err(err(key, format!("requires dimension 2, got {dim}")));
    }
    Ok(())
}

fn positive(value: f64, key: &str) -> Result<()> {
    if !(value.is_finite() && value > 0.0) {
        return Err(err(key, format!("must be positive, got {value}")));
    }
    Ok(())
}

impl Experiment {
    pub fn new(config: SfpConfig) -> Result<Experiment> {
        let dim = config.dimension;
        if dim < 2 {
            return Err(err("dimension", format!("must be at least 2, got {dim}")));
        }
        if config.runs == 0 {
            return Err(err("runs", "must be at least 1"));
        }
        positive(config.tau, "tau")?;
        if !(0.0..1.0).contains(&config.burn_in) {
            return Err(err(
                "burn_in",
                format!("must lie in [0, 1), got {}", config.burn_in),
            ));
        }
        if config.feedback && !config.measure {
            return Err(err("feedback", "requires measure = true"));
        }

        let observable = match &config.measurement {
            MeasurementSpec::SigmaZ { p0 } => {
                require_qubit(dim, "measurement.kind")?;
                if !(0.0..=1.0).contains(p0) {
                    return Err(err(
                        "measurement.p0",
                        format!("must lie in [0, 1], got {p0}"),
                    ));
                }
                make_unsharp_sigma_z(*p0).map_err(|e| err("measurement", e))?
            }
            MeasurementSpec::Unsharp {
                basis,
                eigenvalues,
                lambda,
            } => {
                if basis.len() != dim {
                    return Err(err(
                        "measurement.basis",
                        format!("{} vectors for dimension {dim}", basis.len()),
                    ));
                }
                let vectors = basis
                    .iter()
                    .map(|v| CVector(v.iter().map(|[re, im]| c(*re, *im)).collect()))
                    .collect();
                make_unsharp_observable(vectors, eigenvalues.clone(), lambda.clone())
                    .map_err(|e| err("measurement", e))?
            }
        };
        let povm = observable.povm().clone();

        let trajectory = match &config.target {
            TargetSpec::Static { state } => {
                TargetTrajectory::Static(resolve_state(state, dim, "target.state")?)
            }
            TargetSpec::Rabi {
                initial,
                omega,
                axis,
            } => {
                require_qubit(dim, "target.kind")?;
                if !omega.is_finite() {
                    return Err(err("target.omega", "must be finite"));
                }
                if qubit::norm3(*axis) == 0.0 {
                    return Err(err("target.axis", "rotation axis is zero"));
                }
                TargetTrajectory::Rabi {
                    initial: resolve_state(initial, dim, "target.initial")?,
                    omega: *omega,
                    axis: *axis,
                }
            }
            TargetSpec::FigureEight {
                period,
                azimuth_amplitude,
                polar_amplitude,
            } => {
                require_qubit(dim, "target.kind")?;
                positive(*period, "target.period")?;
                TargetTrajectory::FigureEight {
                    period: *period,
                    azimuth_amplitude: *azimuth_amplitude,
                    polar_amplitude: *polar_amplitude,
                }
            }
            TargetSpec::Custom { times, states } => {
                if times.is_empty() || times.len() != states.len() {
                    return Err(err(
                        "target.times",
                        "needs one time per state and at least one state",
                    ));
                }
                if times.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(err("target.times", "must be strictly increasing"));
                }
                let states = states
                    .iter()
                    .enumerate()
                    .map(|(i, s)| resolve_state(s, dim, &format!("target.states[{i}]")))
                    .collect::<Result<Vec<_>>>()?;
                TargetTrajectory::Custom {
                    times: times.clone(),
                    states,
                }
            }
        };
        let target0 = target_at(&trajectory, 0.0);

        let initial = resolve_initial(&config.initial, dim, &target0, "initial")?;

        let drive = match &config.drive {
            Some(d) => {
                require_qubit(dim, "drive")?;
                positive(d.dt, "drive.dt")?;
                if !d.omega.is_finite() {
                    return Err(err("drive.omega", "must be finite"));
                }
                if qubit::norm3(d.axis) == 0.0 {
                    return Err(err("drive.axis", "rotation axis is zero"));
                }
                let drive = RabiDrive {
                    omega: d.omega,
                    axis: d.axis,
                    dt: d.dt,
                };
                drive
                    .steps(config.tau)
                    .map_err(|_| err("drive.dt", "tau must be a whole number of drive steps"))?;
                Some(drive)
            }
            None => None,
        };

        let reference_feedback = build_reversal(&povm, &target0).ok();

        let noise = match &config.noise {
            Some(n) => {
                if n.kind != NoiseKind::DriveAmplitude {
                    require_qubit(dim, "noise.kind")?;
                } else if drive.is_none() {
                    return Err(err(
                        "noise.kind",
                        "drive_amplitude noise needs a [drive] table",
                    ));
                }
                let rms = match (n.rms, n.relative_rms) {
                    (Some(r), None) => r,
                    (None, Some(rel)) => {
                        let fb = reference_feedback.as_ref().ok_or_else(|| {
                            err(
                                "noise.relative_rms",
                                "the target has no reversal to scale by",
                            )
                        })?;
                        rel * fb.max_reversal_angle()
                    }
                    _ => return Err(err("noise", "set exactly one of `rms` and `relative_rms`")),
                };
                if !(rms.is_finite() && rms >= 0.0) {
                    return Err(err("noise.rms", format!("must be non-negative, got {rms}")));
                }
                Some(NoiseChannel { kind: n.kind, rms })
            }
            None => None,
        };

        Ok(Experiment {
            config,
            povm,
            observable: Some(observable),
            trajectory,
            initial,
            drive,
            noise,
            reference_feedback,
        })
    }

    pub fn from_toml_str(text: &str, overrides: &[String]) -> Result<Experiment> {
        Experiment::new(SfpConfig::from_toml_str(text, overrides)?)
    }

    /// γ = Δp²/τ for unsharp σ_z measurements.
    pub fn gamma(&self) -> Option<f64> {
        let p0 = self.config.p0()?;
        MeasurementStrength::from_p0(p0)
            .ok()
            .map(|s| s.gamma(self.config.tau))
    }

    /// γ expressed per drive period 2π/Ω.
    pub fn gamma_per_drive_period(&self) -> Option<f64> {
        let drive = self.drive?;
        if drive.omega == 0.0 {
            return None;
        }
        Some(self.gamma()? * 2.0 * std::f64::consts::PI / drive.omega.abs())
    }

    pub fn is_static_target(&self) -> bool {
        self.trajectory.is_static()
    }

    /// Starting state for a given run.
    pub fn initial_state(&self, run: usize, rng: &mut RandomStream) -> PureState {
        match &self.initial[run % self.initial.len()] {
            InitialState::Fixed(s) => s.clone(),
            InitialState::Random => random_state(self.config.dimension, rng),
        }
    }
}

fn resolve_initial(
    spec: &StateSpec,
    dim: usize,
    target0: &PureState,
    key: &str,
) -> Result<Vec<InitialState>> {
    match spec {
        StateSpec::OrthogonalToTarget {} => {
            require_qubit(dim, key)?;
            Ok(vec![InitialState::Fixed(target0.qubit_orthogonal()?)])
        }
        StateSpec::Random {} => Ok(vec![InitialState::Random]),
        StateSpec::List { states } => {
            if states.is_empty() {
                return Err(err(key, "list is empty"));
            }
            let mut out = Vec::with_capacity(states.len());
            for (i, s) in states.iter().enumerate() {
                let k = format!("{key}.states[{i}]");
                if matches!(s, StateSpec::List { .. }) {
                    return Err(err(&k, "lists cannot be nested"));
                }
                out.extend(resolve_initial(s, dim, target0, &k)?);
            }
            Ok(out)
        }
        other => Ok(vec![InitialState::Fixed(resolve_state(other, dim, key)?)]),
    }
}

/// Haar-random pure state from complex Gaussian amplitudes.
pub fn random_state(dim: usize, rng: &mut RandomStream) -> PureState {
    loop {
        let v = CVector(
            (0..dim)
                .map(|_| c(rng.gaussian(), rng.gaussian()))
                .collect(),
        );
        if let Ok(s) = PureState::normalize(v) {
            return s;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
cycles = 10
tau = 1.0

[measurement]
kind = "sigma_z"
p0 = 0.45

[target]
kind = "static"
state = { kind = "rotated", axis = [1.0, 0.0, 0.0], angle = 0.7853981633974483 }

[initial]
kind = "orthogonal_to_target"
"#;

    #[test]
    fn parses_with_defaults() {
        let cfg = SfpConfig::from_toml_str(BASE, &[]).unwrap();
        assert_eq!(cfg.dimension, 2);
        assert_eq!(cfg.runs, 1);
        assert!(cfg.measure && cfg.feedback);
        assert_eq!(cfg.order, CycleOrder::EvolveFirst);
        let exp = Experiment::new(cfg).unwrap();
        assert!((exp.gamma().unwrap() - 0.01).abs() < 1e-15);
    }

    #[test]
    fn round_trip() {
        let cfg = SfpConfig::from_toml_str(
            BASE,
            &["noise.kind=dephasing".into(), "noise.rms=0.1".into()],
        )
        .unwrap();
        let text = cfg.to_toml_string().unwrap();
        assert_eq!(SfpConfig::from_toml_str(&text, &[]).unwrap(), cfg);
    }

    #[test]
    fn unknown_keys_rejected() {
        let bad = BASE.replace("p0 = 0.45", "p0 = 0.45\np1 = 0.2");
        let e = SfpConfig::from_toml_str(&bad, &[]).unwrap_err();
        assert!(e.to_string().contains("p1"), "{e}");
        let e = SfpConfig::from_toml_str(BASE, &["bogus=1".into()]).unwrap_err();
        assert!(e.to_string().contains("bogus"), "{e}");
        let e = SfpConfig::from_toml_str(BASE, &["initial={kind=\"random\", seed=3}".into()])
            .unwrap_err();
        assert!(e.to_string().contains("seed"), "{e}");
    }

    #[test]
    fn bad_p0_names_key() {
        let e = Experiment::from_toml_str(BASE, &["measurement.p0=1.5".into()]).unwrap_err();
        assert!(e.is_config());
        assert!(e.to_string().contains("measurement.p0"), "{e}");
    }

    #[test]
    fn override_parses_values() {
        let mut t = toml::Table::new();
        apply_override(&mut t, "a.b=3").unwrap();
        apply_override(&mut t, "a.c=[1.0, 2.0]").unwrap();
        apply_override(&mut t, "d=hello").unwrap();
        assert_eq!(t["a"]["b"].as_integer(), Some(3));
        assert_eq!(t["a"]["c"].as_array().unwrap().len(), 2);
        assert_eq!(t["d"].as_str(), Some("hello"));
        assert!(apply_override(&mut t, "nokey").is_err());
        assert!(apply_override(&mut t, "d.x=1").is_err());
    }

    #[test]
    fn validation_errors() {
        for (set, key) in [
            ("runs=0", "runs"),
            ("tau=-1.0", "tau"),
            ("burn_in=1.0", "burn_in"),
            ("dimension=3", "measurement.kind"),
            ("measure=false", "feedback"),
            ("drive.omega=1.0", "drive"),
        ] {
            let e = Experiment::from_toml_str(BASE, &[set.into()]).unwrap_err();
            assert!(e.to_string().contains(key), "{set}: {e}");
        }
    }

    #[test]
    fn drive_commensurability() {
        let e = Experiment::from_toml_str(BASE, &["drive.omega=1.0".into(), "drive.dt=0.3".into()])
            .unwrap_err();
        assert!(e.to_string().contains("drive.dt"), "{e}");
        let ok =
            Experiment::from_toml_str(BASE, &["drive.omega=1.0".into(), "drive.dt=0.25".into()])
                .unwrap();
        assert!((ok.gamma_per_drive_period().unwrap() - 0.02 * std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn relative_noise_scales_by_reversal_angle() {
        let exp = Experiment::from_toml_str(
            BASE,
            &[
                "noise.kind=reversal_angle".into(),
                "noise.relative_rms=0.5".into(),
            ],
        )
        .unwrap();
        let theta = exp
            .reference_feedback
            .as_ref()
            .unwrap()
            .max_reversal_angle();
        assert!((exp.noise.unwrap().rms - 0.5 * theta).abs() < 1e-15);
        let e = Experiment::from_toml_str(
            BASE,
            &[
                "noise.kind=dephasing".into(),
                "noise.relative_rms=0.5".into(),
                "noise.rms=0.1".into(),
            ],
        )
        .unwrap_err();
        assert!(e.to_string().contains("exactly one"), "{e}");
    }

    #[test]
    fn unsharp_qutrit_config() {
        let text = r#"
dimension = 3
cycles = 5
tau = 1.0
[measurement]
kind = "unsharp"
basis = [[[1.0, 0.0], [0.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]]]
eigenvalues = [-1.0, 0.0, 1.0]
lambda = [[0.7, 0.15, 0.15], [0.15, 0.7, 0.15], [0.15, 0.15, 0.7]]
[target]
kind = "static"
state = { kind = "vector", amplitudes = [[0.6, 0.0], [0.0, 0.48], [0.64, 0.0]] }
[initial]
kind = "random"
"#;
        let exp = Experiment::from_toml_str(text, &[]).unwrap();
        assert_eq!(exp.povm.len(), 3);
        assert!(exp.gamma().is_none());
        let mut rng = RandomStream::new(1, 1);
        let s = exp.initial_state(0, &mut rng);
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        let e = Experiment::from_toml_str(text, &["initial.kind=orthogonal_to_target".into()])
            .unwrap_err();
        assert!(e.to_string().contains("initial"), "{e}");
    }

    #[test]
    fn initial_list_cycles_over_runs() {
        let exp = Experiment::from_toml_str(
            BASE,
            &[
                "initial={kind=\"list\", states=[{kind=\"basis\", index=0}, {kind=\"basis\", index=1}]}"
                    .into(),
            ],
        )
        .unwrap();
        let mut rng = RandomStream::new(0, 0);
        assert_eq!(exp.initial_state(0, &mut rng), qubit::down());
        assert_eq!(exp.initial_state(3, &mut rng), qubit::up());
    }
}
