//! Monte Carlo runs of the measurement-feedback loop interleaved with drive
//! and noise.

use rayon::prelude::*;

use crate::config::{CycleOrder, Experiment, SfpConfig};
use crate::dynamics::{evolve_drive, target_at};
use crate::error::{Result, SfpError};
use crate::measurement::{apply_measurement, sample_outcome};
use crate::noise::{apply_dephasing, perturb_reversal, NoiseKind};
use crate::protocol::{build_reversal, fidelity, ReversalFeedback};
use crate::qubit;
use crate::rng::RunStreams;
use crate::spectrum::{ensemble_spectrum, Spectrum, SpectrumEstimator};
use crate::state::PureState;

/// Fewest post-burn-in samples per run for asymptotic statistics.
pub const MIN_ASYMPTOTIC_SAMPLES: usize = 100;

/// Noise levels, in units of the reversal angle, for noise sweeps.
pub const SWEEP_GRID: [f64; 17] = [
    0.0, 0.125, 0.25, 0.375, 0.5, 0.625, 0.75, 0.875, 1.0, 1.125, 1.25, 1.375, 1.5, 1.625, 1.75,
    1.875, 2.0,
];

/// Per-cycle log of one run. Index 0 is the initial state.
#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub run: usize,
    pub seed: u64,
    pub time: Vec<f64>,
    pub outcome: Vec<Option<usize>>,
    pub fidelity: Vec<f64>,
    pub p_up: Vec<f64>,
    pub bloch: Option<Vec<[f64; 3]>>,
}

impl RunRecord {
    fn with_capacity(run: usize, seed: u64, n: usize, bloch: bool) -> Self {
        RunRecord {
            run,
            seed,
            time: Vec::with_capacity(n),
            outcome: Vec::with_capacity(n),
            fidelity: Vec::with_capacity(n),
            p_up: Vec::with_capacity(n),
            bloch: bloch.then(|| Vec::with_capacity(n)),
        }
    }

    fn log(
        &mut self,
        t: f64,
        outcome: Option<usize>,
        state: &PureState,
        target: &PureState,
    ) -> Result<()> {
        self.time.push(t);
        self.outcome.push(outcome);
        self.fidelity.push(fidelity(state, target)?);
        self.p_up.push(state.upper_population());
        if let Some(b) = self.bloch.as_mut() {
            b.push(qubit::bloch_vector(state)?);
        }
        Ok(())
    }

    /// Number of logged points, including the initial one.
    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    /// Cycles after the initial point.
    pub fn cycles(&self) -> usize {
        self.len().saturating_sub(1)
    }

    /// P_up after each completed cycle.
    pub fn p_up_series(&self) -> &[f64] {
        self.p_up.get(1..).unwrap_or(&[])
    }

    pub fn fidelity_series(&self) -> &[f64] {
        self.fidelity.get(1..).unwrap_or(&[])
    }
}

/// Reversal cached for static targets, rebuilt every cycle otherwise.
struct Feedback<'a> {
    cached: Option<&'a ReversalFeedback>,
}

fn measure_and_reverse(
    exp: &Experiment,
    state: &PureState,
    target: &PureState,
    feedback: &Feedback,
    streams: &mut RunStreams,
) -> Result<(PureState, usize)> {
    let outcome = sample_outcome(&exp.povm, state, &mut streams.measurement)?;
    let measured = apply_measurement(&exp.povm, state, outcome)?;
    if !exp.config.feedback {
        return Ok((measured, outcome));
    }
    let rebuilt;
    let fb = match feedback.cached {
        Some(fb) => fb,
        None => {
            rebuilt = build_reversal(&exp.povm, target)?;
            &rebuilt
        }
    };
    let next = match exp.noise {
        Some(ch) if ch.kind == NoiseKind::ReversalAngle => {
            measured.evolve(&perturb_reversal(fb, &ch, outcome, &mut streams.noise)?)
        }
        _ => measured.evolve(fb.unitary(outcome)),
    };
    Ok((next, outcome))
}

fn evolve(exp: &Experiment, state: PureState, streams: &mut RunStreams) -> Result<PureState> {
    let mut state = state;
    if let Some(drive) = exp.drive.as_ref() {
        let noise = exp
            .noise
            .as_ref()
            .filter(|n| n.kind == NoiseKind::DriveAmplitude);
        state = evolve_drive(&state, drive, exp.config.tau, noise, &mut streams.noise)?;
    }
    if let Some(ch) = exp
        .noise
        .as_ref()
        .filter(|n| n.kind == NoiseKind::Dephasing)
    {
        state = apply_dephasing(&state, ch, &mut streams.noise)?;
    }
    Ok(state)
}

/// Runs one trajectory. Deterministic in (master_seed, run).
pub fn run_single(exp: &Experiment, run: usize) -> Result<RunRecord> {
    let cfg = &exp.config;
    let mut streams = RunStreams::for_run(cfg.master_seed, run);
    let mut state = exp.initial_state(run, &mut streams.noise);
    let record_bloch = cfg.record_bloch && cfg.dimension == 2;
    let mut record = RunRecord::with_capacity(run, cfg.master_seed, cfg.cycles + 1, record_bloch);

    let fixed_target = exp
        .is_static_target()
        .then(|| target_at(&exp.trajectory, 0.0));
    let target_for = |t: f64| match &fixed_target {
        Some(s) => s.clone(),
        None => target_at(&exp.trajectory, t),
    };
    let cached = if exp.is_static_target() && cfg.measure && cfg.feedback {
        Some(match &exp.reference_feedback {
            Some(fb) => fb,
            None => {
                // reproduce the construction error with context
                let target = target_for(0.0);
                return Err(build_reversal(&exp.povm, &target)
                    .err()
                    .unwrap_or_else(|| SfpError::Numerical("reversal unavailable".into()))
                    .at_cycle(run, 1));
            }
        })
    } else {
        None
    };
    let feedback = Feedback { cached };

    let target0 = target_for(0.0);
    record.log(0.0, None, &state, &target0)?;

    for k in 1..=cfg.cycles {
        let t = k as f64 * cfg.tau;
        let step = |state: PureState,
                    streams: &mut RunStreams|
         -> Result<(PureState, Option<usize>, PureState)> {
            match cfg.order {
                CycleOrder::EvolveFirst => {
                    let state = evolve(exp, state, streams)?;
                    let target = target_for(t);
                    if !cfg.measure {
                        return Ok((state, None, target));
                    }
                    let (state, outcome) =
                        measure_and_reverse(exp, &state, &target, &feedback, streams)?;
                    Ok((state, Some(outcome), target))
                }
                CycleOrder::MeasureFirst => {
                    let mut outcome = None;
                    let mut state = state;
                    if cfg.measure {
                        let before = target_for(t - cfg.tau);
                        let (s, o) = measure_and_reverse(exp, &state, &before, &feedback, streams)?;
                        state = s;
                        outcome = Some(o);
                    }
                    let state = evolve(exp, state, streams)?;
                    Ok((state, outcome, target_for(t)))
                }
            }
        };
        let (next, outcome, target) = step(state, &mut streams).map_err(|e| e.at_cycle(run, k))?;
        state = next;
        record
            .log(t, outcome, &state, &target)
            .map_err(|e| e.at_cycle(run, k))?;
    }
    Ok(record)
}

/// All runs of an experiment plus pointwise ensemble statistics.
#[derive(Clone, Debug)]
pub struct Ensemble {
    pub records: Vec<RunRecord>,
    pub mean_fidelity: Vec<f64>,
    pub std_fidelity: Vec<f64>,
    pub mean_p_up: Vec<f64>,
}

impl Ensemble {
    pub fn from_records(records: Vec<RunRecord>) -> Ensemble {
        let n = records.first().map_or(0, RunRecord::len);
        let r = records.len().max(1) as f64;
        let mut mean_fidelity = vec![0.0; n];
        let mut mean_p_up = vec![0.0; n];
        for rec in &records {
            for k in 0..n {
                mean_fidelity[k] += rec.fidelity[k];
                mean_p_up[k] += rec.p_up[k];
            }
        }
        mean_fidelity.iter_mut().for_each(|x| *x /= r);
        mean_p_up.iter_mut().for_each(|x| *x /= r);
        let mut std_fidelity = vec![0.0; n];
        for rec in &records {
            for k in 0..n {
                std_fidelity[k] += (rec.fidelity[k] - mean_fidelity[k]).powi(2);
            }
        }
        std_fidelity.iter_mut().for_each(|x| *x = (*x / r).sqrt());
        Ensemble {
            records,
            mean_fidelity,
            std_fidelity,
            mean_p_up,
        }
    }

    /// Spectrum of the P_up traces (initial point excluded).
    pub fn spectrum(&self, tau: f64, estimator: SpectrumEstimator) -> Result<Spectrum> {
        let series: Vec<&[f64]> = self.records.iter().map(RunRecord::p_up_series).collect();
        ensemble_spectrum(&series, tau, estimator)
    }
}

/// Runs every trajectory of the experiment, in parallel.
pub fn run_ensemble(exp: &Experiment) -> Result<Ensemble> {
    let records = (0..exp.config.runs)
        .into_par_iter()
        .map(|r| run_single(exp, r))
        .collect::<Result<Vec<_>>>()?;
    Ok(Ensemble::from_records(records))
}

/// Mean and RMS deviation of pooled post-burn-in samples.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AsymptoticStats {
    pub mean: f64,
    pub rms: f64,
    pub samples: usize,
}

/// Pools the fidelity of every run after discarding `burn_in` of each.
pub fn asymptotic_fidelity(records: &[RunRecord], burn_in: f64) -> Result<AsymptoticStats> {
    let series: Vec<&[f64]> = records.iter().map(RunRecord::fidelity_series).collect();
    asymptotic_statistics(&series, burn_in)
}

pub fn asymptotic_statistics(series: &[&[f64]], burn_in: f64) -> Result<AsymptoticStats> {
    let mut pooled = Vec::new();
    for s in series {
        let skip = (s.len() as f64 * burn_in).ceil() as usize;
        let tail = &s[skip.min(s.len())..];
        if tail.len() < MIN_ASYMPTOTIC_SAMPLES {
            return Err(SfpError::InsufficientSamples {
                needed: MIN_ASYMPTOTIC_SAMPLES,
                have: tail.len(),
            });
        }
        pooled.extend_from_slice(tail);
    }
    if pooled.is_empty() {
        return Err(SfpError::InsufficientSamples {
            needed: MIN_ASYMPTOTIC_SAMPLES,
            have: 0,
        });
    }
    let n = pooled.len() as f64;
    let mean = pooled.iter().sum::<f64>() / n;
    let rms = (pooled.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
    Ok(AsymptoticStats {
        mean,
        rms,
        samples: pooled.len(),
    })
}

#[derive(Clone, Copy, Debug)]
pub struct SweepPoint {
    pub relative_rms: f64,
    pub rms: f64,
    pub stats: AsymptoticStats,
}

/// Asymptotic fidelity at each noise level (multiples of the reversal angle)
/// for one noise kind.
pub fn noise_sweep(base: &SfpConfig, kind: NoiseKind, grid: &[f64]) -> Result<Vec<SweepPoint>> {
    let kind_name = match kind {
        NoiseKind::Dephasing => "dephasing",
        NoiseKind::ReversalAngle => "reversal_angle",
        NoiseKind::DriveAmplitude => "drive_amplitude",
    };
    grid.iter()
        .map(|&rel| {
            let mut cfg = base.clone();
            cfg.noise = None;
            let cfg = cfg.with_overrides(&[
                format!("noise.kind={kind_name}"),
                format!("noise.relative_rms={rel:?}"),
            ])?;
            let exp = Experiment::new(cfg)?;
            let ens = run_ensemble(&exp)?;
            let stats = asymptotic_fidelity(&ens.records, exp.config.burn_in)?;
            Ok(SweepPoint {
                relative_rms: rel,
                rms: exp.noise.map_or(0.0, |n| n.rms),
                stats,
            })
        })
        .collect()
}
