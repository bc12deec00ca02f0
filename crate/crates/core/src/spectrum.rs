//! Magnitude spectra of uniformly sampled real series.

use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SfpError};

pub const MIN_SAMPLES: usize = 64;

/// How an ensemble of traces is reduced to one spectrum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumEstimator {
    /// Spectrum of the first run alone.
    SingleRun,
    /// Spectrum of the ensemble-mean trace.
    MeanTrace,
    /// RMS of the per-run magnitudes.
    AveragedPower,
}

impl SpectrumEstimator {
    pub fn name(self) -> &'static str {
        match self {
            SpectrumEstimator::SingleRun => "single_run",
            SpectrumEstimator::MeanTrace => "mean_trace",
            SpectrumEstimator::AveragedPower => "averaged_power",
        }
    }
}

impl std::str::FromStr for SpectrumEstimator {
    type Err = SfpError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single_run" => Ok(SpectrumEstimator::SingleRun),
            "mean_trace" => Ok(SpectrumEstimator::MeanTrace),
            "averaged_power" => Ok(SpectrumEstimator::AveragedPower),
            other => Err(SfpError::Config(format!(
                "unknown spectrum estimator '{other}' (single_run, mean_trace, averaged_power)"
            ))),
        }
    }
}

/// One-sided magnitude spectrum on the grid ω_k = 2πk/(Nτ), k = 0..=N/2.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub omega: Vec<f64>,
    /// |X_k| / N of the mean-subtracted series.
    pub magnitude: Vec<f64>,
    pub resolution: f64,
    /// Grid point nearest the power centroid of the half-maximum main lobe.
    pub peak: f64,
    /// Grid point of the largest magnitude.
    pub argmax: f64,
    /// Power-weighted RMS distance of the spectrum from `peak`.
    pub width: f64,
}

impl Spectrum {
    fn from_power(power: Vec<f64>, n: usize, tau: f64) -> Spectrum {
        let resolution = 2.0 * PI / (n as f64 * tau);
        let omega: Vec<f64> = (0..power.len()).map(|k| k as f64 * resolution).collect();
        let magnitude = power.iter().map(|p| p.sqrt()).collect();
        let total: f64 = power.iter().sum();
        if total <= 0.0 {
            return Spectrum {
                omega,
                magnitude,
                resolution,
                peak: 0.0,
                argmax: 0.0,
                width: 0.0,
            };
        }
        let top = (0..power.len())
            .max_by(|&a, &b| power[a].total_cmp(&power[b]))
            .unwrap_or(0);
        let half = power[top] / 2.0;
        let mut lo = top;
        while lo > 0 && power[lo - 1] >= half {
            lo -= 1;
        }
        let mut hi = top;
        while hi + 1 < power.len() && power[hi + 1] >= half {
            hi += 1;
        }
        let lobe: f64 = power[lo..=hi].iter().sum();
        let centroid: f64 = (lo..=hi).map(|k| omega[k] * power[k]).sum::<f64>() / lobe;
        let peak_index = ((centroid / resolution).round() as usize).min(power.len() - 1);
        let peak = omega[peak_index];
        let second: f64 = omega
            .iter()
            .zip(&power)
            .map(|(w, p)| (w - peak).powi(2) * p)
            .sum();
        Spectrum {
            omega,
            magnitude,
            resolution,
            peak,
            argmax: top as f64 * resolution,
            width: (second / total).sqrt(),
        }
    }

    /// Frequencies of the `count` strongest local maxima, strongest first.
    pub fn peaks(&self, count: usize) -> Vec<f64> {
        let m = &self.magnitude;
        let mut local: Vec<usize> = (1..m.len())
            .filter(|&k| m[k] > m[k - 1] && (k + 1 == m.len() || m[k] >= m[k + 1]))
            .collect();
        local.sort_by(|&a, &b| m[b].total_cmp(&m[a]));
        local
            .into_iter()
            .take(count)
            .map(|k| self.omega[k])
            .collect()
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }
}

fn centered(series: &[f64]) -> Vec<Complex<f64>> {
    let mean = series.iter().sum::<f64>() / series.len() as f64;
    series.iter().map(|x| Complex::new(x - mean, 0.0)).collect()
}

/// One-sided |X_k|/N of the mean-subtracted series.
pub fn magnitude_spectrum(series: &[f64]) -> Result<Vec<f64>> {
    let n = series.len();
    if n < MIN_SAMPLES {
        return Err(SfpError::TooShort {
            needed: MIN_SAMPLES,
            have: n,
        });
    }
    let mut buf = centered(series);
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    Ok(buf[..=n / 2].iter().map(|z| z.norm() / n as f64).collect())
}

/// The O(N²) transform, kept as a reference implementation.
pub fn direct_magnitude_spectrum(series: &[f64]) -> Vec<f64> {
    let n = series.len();
    let x = centered(series);
    (0..=n / 2)
        .map(|k| {
            let mut acc = Complex::new(0.0, 0.0);
            for (j, v) in x.iter().enumerate() {
                // reduce the phase index first so large N keeps full precision
                let idx = (k * j) % n;
                acc += v * Complex::from_polar(1.0, -2.0 * PI * idx as f64 / n as f64);
            }
            acc.norm() / n as f64
        })
        .collect()
}

pub fn compute_spectrum(series: &[f64], tau: f64) -> Result<Spectrum> {
    let mag = magnitude_spectrum(series)?;
    let power = mag.iter().map(|m| m * m).collect();
    Ok(Spectrum::from_power(power, series.len(), tau))
}

/// Spectrum whose power is the mean of the per-series powers.
pub fn averaged_power_spectrum(series: &[&[f64]], tau: f64) -> Result<Spectrum> {
    let first = series.first().ok_or(SfpError::TooShort {
        needed: MIN_SAMPLES,
        have: 0,
    })?;
    let n = first.len();
    if n < MIN_SAMPLES {
        return Err(SfpError::TooShort {
            needed: MIN_SAMPLES,
            have: n,
        });
    }
    let fft = FftPlanner::new().plan_fft_forward(n);
    let mut power = vec![0.0; n / 2 + 1];
    for s in series {
        if s.len() != n {
            return Err(SfpError::DimensionMismatch {
                expected: n,
                got: s.len(),
            });
        }
        let mut buf = centered(s);
        fft.process(&mut buf);
        for (p, z) in power.iter_mut().zip(&buf) {
            *p += z.norm_sqr() / (n * n) as f64;
        }
    }
    for p in power.iter_mut() {
        *p /= series.len() as f64;
    }
    Ok(Spectrum::from_power(power, n, tau))
}

/// Reduces an ensemble of equally long traces with the chosen estimator.
pub fn ensemble_spectrum(
    series: &[&[f64]],
    tau: f64,
    estimator: SpectrumEstimator,
) -> Result<Spectrum> {
    match estimator {
        SpectrumEstimator::SingleRun => match series.first() {
            Some(s) => compute_spectrum(s, tau),
            None => Err(SfpError::TooShort {
                needed: MIN_SAMPLES,
                have: 0,
            }),
        },
        SpectrumEstimator::MeanTrace => {
            let n = series.first().map_or(0, |s| s.len());
            let mut mean = vec![0.0; n];
            for s in series {
                if s.len() != n {
                    return Err(SfpError::DimensionMismatch {
                        expected: n,
                        got: s.len(),
                    });
                }
                for (m, x) in mean.iter_mut().zip(s.iter()) {
                    *m += x;
                }
            }
            let r = series.len().max(1) as f64;
            mean.iter_mut().for_each(|m| *m /= r);
            compute_spectrum(&mean, tau)
        }
        SpectrumEstimator::AveragedPower => averaged_power_spectrum(series, tau),
    }
}
