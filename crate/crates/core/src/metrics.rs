//! Telemetry container and effort/convergence metrics.

use crate::error::{Error, Result};
use crate::reference::FlightMode;
use crate::so3::{Rotation, Vec3};

/// Debounce window for [`reaching_time`] (s).
pub const REACHING_WINDOW: f64 = 0.2;

/// Everything recorded at one grid time. Control values are the ones held
/// over the following step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TelemetrySample {
    pub t: f64,
    pub phase: usize,
    pub mode: FlightMode,
    pub x: Vec3,
    pub v: Vec3,
    pub r: Rotation,
    pub w: Vec3,
    pub xd: Vec3,
    pub vd: Vec3,
    /// Tracked attitude: `R_d` (attitude mode) or `R_x` (position mode).
    pub target: Rotation,
    pub psi: f64,
    pub e_r: Vec3,
    pub e_omega: Vec3,
    pub e_x: Vec3,
    pub e_v: Vec3,
    pub s_r: Vec3,
    pub s_x: Vec3,
    pub thrust_cmd: f64,
    pub moment_cmd: Vec3,
    /// Applied wrench after actuator limits.
    pub thrust: f64,
    pub moment: Vec3,
    pub motors: [f64; 4],
    pub saturated: [bool; 4],
    pub v_lyap: f64,
    pub v_psi: f64,
    pub v_x: f64,
    pub v_g: f64,
}

/// Uniform-grid record of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Telemetry {
    pub dt: f64,
    pub samples: Vec<TelemetrySample>,
}

impl Telemetry {
    pub fn new(dt: f64) -> Self {
        Telemetry { dt, samples: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn start(&self) -> f64 {
        self.samples.first().map_or(0.0, |s| s.t)
    }

    pub fn end(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.t)
    }

    pub fn times(&self) -> Vec<f64> {
        self.column(|s| s.t)
    }

    pub fn column<F: Fn(&TelemetrySample) -> f64>(&self, f: F) -> Vec<f64> {
        self.samples.iter().map(f).collect()
    }

    /// Sample nearest to `t`.
    pub fn at(&self, t: f64) -> Option<&TelemetrySample> {
        if self.samples.is_empty() {
            return None;
        }
        let k = ((t - self.start()) / self.dt).round();
        if k < 0.0 {
            return None;
        }
        self.samples.get(k as usize)
    }

    pub fn max_psi(&self) -> f64 {
        self.samples.iter().map(|s| s.psi).fold(0.0, f64::max)
    }

    pub fn saturated_steps(&self) -> usize {
        self.samples.iter().filter(|s| s.saturated.iter().any(|&b| b)).count()
    }

    /// Same start, spacing and length.
    pub fn check_aligned(&self, other: &Telemetry) -> Result<()> {
        let tol = 1e-12 * self.dt.abs().max(other.dt.abs());
        if (self.dt - other.dt).abs() > tol {
            return Err(Error::GridMismatch(format!("dt {} vs {}", self.dt, other.dt)));
        }
        if self.len() != other.len() {
            return Err(Error::GridMismatch(format!("{} vs {} samples", self.len(), other.len())));
        }
        if (self.start() - other.start()).abs() > tol {
            return Err(Error::GridMismatch(format!("start {} vs {}", self.start(), other.start())));
        }
        Ok(())
    }
}

fn sum_sq(f: &[f64; 4]) -> f64 {
    f.iter().map(|x| x * x).sum()
}

/// `√((1/t) ∫ Σᵢ fᵢ² dτ)` from the first sample to `t`, trapezoidal on the grid.
///
/// A `t` between grid points integrates a linearly interpolated last panel.
pub fn f_rms(tel: &Telemetry, t: f64) -> Result<f64> {
    let (start, end) = (tel.start(), tel.end());
    if tel.is_empty() || !(t > start) || t > end + 1e-9 * tel.dt {
        return Err(Error::Range { t, start, end });
    }
    let s = &tel.samples;
    // Accumulate deviations from the first value so a constant signal is exact.
    let base = sum_sq(&s[0].motors);
    let (mut dev, mut width) = (0.0, 0.0);
    for k in 1..s.len() {
        let (t0, t1) = (s[k - 1].t, s[k].t);
        if t0 >= t {
            break;
        }
        let (y0, y1) = (sum_sq(&s[k - 1].motors) - base, sum_sq(&s[k].motors) - base);
        let (y1, h) = if t1 <= t { (y1, t1 - t0) } else { (y0 + (y1 - y0) * (t - t0) / (t1 - t0), t - t0) };
        dev += 0.5 * (y0 + y1) * h;
        width += h;
    }
    Ok((base + dev / width).max(0.0).sqrt())
}

/// Running `f_RMS` at every sample; the first entry is the instantaneous value.
pub fn f_rms_series(tel: &Telemetry) -> Vec<f64> {
    let s = &tel.samples;
    let mut out = Vec::with_capacity(s.len());
    let Some(first) = s.first() else {
        return out;
    };
    let base = sum_sq(&first.motors);
    out.push(base.sqrt());
    let (mut dev, mut width) = (0.0, 0.0);
    for k in 1..s.len() {
        let h = s[k].t - s[k - 1].t;
        dev += 0.5 * (sum_sq(&s[k - 1].motors) - base + sum_sq(&s[k].motors) - base) * h;
        width += h;
        out.push((base + dev / width).max(0.0).sqrt());
    }
    out
}

pub fn delta_f_rms(proposed: &Telemetry, benchmark: &Telemetry, t: f64) -> Result<f64> {
    proposed.check_aligned(benchmark)?;
    Ok(f_rms(proposed, t)? - f_rms(benchmark, t)?)
}

/// Per-sample `Δf_RMS` on aligned grids.
pub fn delta_f_rms_series(proposed: &Telemetry, benchmark: &Telemetry) -> Result<Vec<f64>> {
    proposed.check_aligned(benchmark)?;
    Ok(f_rms_series(proposed).into_iter().zip(f_rms_series(benchmark)).map(|(a, b)| a - b).collect())
}

/// First time with `s ≤ eps` that stays `≤ 2 eps` for the next
/// [`REACHING_WINDOW`] seconds. The window is truncated at the end of the series.
pub fn reaching_time(t: &[f64], s: &[f64], eps: f64) -> Option<f64> {
    let n = t.len().min(s.len());
    let mut k = 0;
    while k < n {
        if s[k] <= eps {
            let limit = t[k] + REACHING_WINDOW;
            match (k..n).take_while(|&j| t[j] <= limit + 1e-12).find(|&j| s[j] > 2.0 * eps) {
                None => return Some(t[k]),
                Some(j) => {
                    k = j + 1;
                    continue;
                }
            }
        }
        k += 1;
    }
    None
}
