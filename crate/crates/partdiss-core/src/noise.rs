//! Two-sided spectral Wiener paths and covariance admissibility checks.
//!
//! A path realizes two independent channels of cylindrical noise
//! `W_c(t) = sum_k sqrt(delta_k) beta_k(t) e_k` on a fixed step grid
//! `t_j = j * h_noise`, `j_min <= j <= j_max`, `j_min <= 0 <= j_max`. Increments are never
//! stored: `increment(channel, k, j)` is a pure function of `(seed, channel, mode key, j)`,
//! so the measure-preserving time shift is literally an offset added to `j`, and two shifted
//! copies of a path agree bit-for-bit wherever their windows overlap.
//!
//! The validator checks the two summability conditions the solver theory needs: the channel-2
//! covariance must have finite trace (Hilbert-Schmidt factor), and the channel-1 intensities
//! must satisfy `sum_k delta_k lambda_k^{2 alpha + 1} < infinity` for the regularity index
//! `alpha` in (0, 1/2). For power-law intensities both reduce to a lattice p-series test.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
#[allow(unused_imports)] // f64 inherent methods shadow these under std; no_std needs the trait
use num_traits::Float;

use crate::error::{Error, Result};
use crate::rng;
use crate::spectral::Basis;

/// Noise channel: drives the diffusive component (`One`) or the pointwise component (`Two`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    One,
    Two,
}

impl Channel {
    pub(crate) fn tag(self) -> u64 {
        match self {
            Channel::One => 1,
            Channel::Two => 2,
        }
    }
}

/// Per-mode intensity rule for one channel.
#[derive(Debug, Clone, PartialEq)]
pub enum CovKind {
    /// `delta_k = lambda_k^{-gamma}`.
    InversePower { gamma: f64 },
    /// One intensity per basis mode, flat mode order.
    Explicit(Vec<f64>),
    /// `delta_k = c` for every mode (`c = 0` switches the channel off).
    ScaledIdentity(f64),
}

/// Diagonal covariance of one noise channel in the sine basis.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceSpec {
    pub kind: CovKind,
    pub channel: Channel,
}

impl CovarianceSpec {
    pub fn inverse_power(channel: Channel, gamma: f64) -> CovarianceSpec {
        CovarianceSpec { kind: CovKind::InversePower { gamma }, channel }
    }

    pub fn explicit(channel: Channel, intensities: Vec<f64>) -> CovarianceSpec {
        CovarianceSpec { kind: CovKind::Explicit(intensities), channel }
    }

    pub fn scaled_identity(channel: Channel, c: f64) -> CovarianceSpec {
        CovarianceSpec { kind: CovKind::ScaledIdentity(c), channel }
    }

    /// Realized per-mode intensities for `basis`. Explicit lists must cover every retained
    /// mode; all intensities must be nonnegative and finite.
    pub fn intensities(&self, basis: &Basis) -> Result<Vec<f64>> {
        let n = basis.mode_count();
        let out: Vec<f64> = match &self.kind {
            CovKind::InversePower { gamma } => {
                basis.lambda().iter().map(|l| l.powf(-gamma)).collect()
            }
            CovKind::ScaledIdentity(c) => alloc::vec![*c; n],
            CovKind::Explicit(list) => {
                if list.len() != n {
                    return Err(Error::CovarianceLength { expected: n, got: list.len() });
                }
                list.clone()
            }
        };
        for (i, d) in out.iter().enumerate() {
            if !(d.is_finite() && *d >= 0.0) {
                return Err(Error::InvalidParam {
                    name: "delta_k",
                    value: *d,
                    expected: "finite and >= 0",
                });
            }
            let _ = i;
        }
        Ok(out)
    }
}

/// Uniform two-sided time grid carrying the noise realization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseGrid {
    h: f64,
    j_min: i64,
    j_max: i64,
    seed: u64,
}

impl NoiseGrid {
    /// `h_noise > 0`, `t_min <= 0 <= t_max`, both multiples of `h_noise`.
    pub fn new(h_noise: f64, t_min: f64, t_max: f64, seed: u64) -> Result<NoiseGrid> {
        if !(h_noise > 0.0 && h_noise.is_finite()) {
            return Err(Error::InvalidParam { name: "h_noise", value: h_noise, expected: "> 0" });
        }
        if !(t_min <= 0.0 && t_max >= 0.0 && t_min < t_max) {
            return Err(Error::InvalidParam {
                name: "t_min/t_max",
                value: t_min,
                expected: "t_min <= 0 <= t_max, t_min < t_max",
            });
        }
        let j_min = steps_of(t_min, h_noise)?;
        let j_max = steps_of(t_max, h_noise)?;
        Ok(NoiseGrid { h: h_noise, j_min, j_max, seed })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn t_min(&self) -> f64 {
        self.j_min as f64 * self.h
    }

    pub fn t_max(&self) -> f64 {
        self.j_max as f64 * self.h
    }

    pub(crate) fn j_min(&self) -> i64 {
        self.j_min
    }

    pub(crate) fn j_max(&self) -> i64 {
        self.j_max
    }
}

/// Number of noise steps in `t`, failing unless `t` is a multiple of `h` to relative
/// tolerance 1e-9.
pub fn steps_of(t: f64, h: f64) -> Result<i64> {
    let r = t / h;
    let j = r.round();
    if (r - j).abs() > 1e-9 * (1.0 + r.abs()) {
        return Err(Error::NonCommensurate { t, h });
    }
    Ok(j as i64)
}

/// One realization of the two spectral noise channels, plus a shift offset.
///
/// All times accepted by path methods are relative: relative step `j` addresses absolute grid
/// index `j + offset`, and `shift` composes by plain addition of offsets.
#[derive(Debug, Clone, PartialEq)]
pub struct WienerPath {
    basis: Basis,
    grid: NoiseGrid,
    cov1: CovarianceSpec,
    cov2: CovarianceSpec,
    delta1: Vec<f64>,
    delta2: Vec<f64>,
    /// `sqrt(delta_k * h)` per mode and channel: increment standard deviations.
    amp1: Vec<f64>,
    amp2: Vec<f64>,
    keys: Vec<u64>,
    offset: i64,
}

impl WienerPath {
    pub fn new(
        basis: &Basis,
        grid: NoiseGrid,
        cov1: CovarianceSpec,
        cov2: CovarianceSpec,
    ) -> Result<WienerPath> {
        if cov1.channel != Channel::One || cov2.channel != Channel::Two {
            return Err(Error::InvalidParam {
                name: "covariance channel",
                value: 0.0,
                expected: "cov1 on channel One, cov2 on channel Two",
            });
        }
        let delta1 = cov1.intensities(basis)?;
        let delta2 = cov2.intensities(basis)?;
        let amp1 = delta1.iter().map(|d| (d * grid.h).sqrt()).collect();
        let amp2 = delta2.iter().map(|d| (d * grid.h).sqrt()).collect();
        let keys = (0..basis.mode_count()).map(|i| basis.mode_key(i)).collect();
        Ok(WienerPath {
            basis: basis.clone(),
            grid,
            cov1,
            cov2,
            delta1,
            delta2,
            amp1,
            amp2,
            keys,
            offset: 0,
        })
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn grid(&self) -> &NoiseGrid {
        &self.grid
    }

    pub fn covariance(&self, channel: Channel) -> &CovarianceSpec {
        match channel {
            Channel::One => &self.cov1,
            Channel::Two => &self.cov2,
        }
    }

    /// Accumulated shift in noise steps.
    pub fn offset(&self) -> i64 {
        self.offset
    }

    /// Per-mode intensities of a channel.
    pub fn delta(&self, channel: Channel) -> &[f64] {
        match channel {
            Channel::One => &self.delta1,
            Channel::Two => &self.delta2,
        }
    }

    /// Earliest relative step with realized data.
    pub fn rel_min(&self) -> i64 {
        self.grid.j_min() - self.offset
    }

    /// Latest relative step with realized data.
    pub fn rel_max(&self) -> i64 {
        self.grid.j_max() - self.offset
    }

    pub(crate) fn check_window(&self, j: i64) -> Result<i64> {
        let abs = j + self.offset;
        if abs < self.grid.j_min() || abs >= self.grid.j_max() {
            return Err(Error::OutOfHorizon {
                t: j as f64 * self.grid.h,
                t_min: self.rel_min() as f64 * self.grid.h,
                t_max: self.rel_max() as f64 * self.grid.h,
            });
        }
        Ok(abs)
    }

    #[inline]
    pub(crate) fn increment_abs(&self, channel: Channel, mode: usize, abs_j: i64) -> f64 {
        let amp = match channel {
            Channel::One => self.amp1[mode],
            Channel::Two => self.amp2[mode],
        };
        if amp == 0.0 {
            return 0.0;
        }
        amp * rng::gauss(self.grid.seed, rng::domain::INCREMENT, channel.tag(), self.keys[mode], abs_j)
    }

    /// Gaussian increment of mode `mode` over `[t_j, t_{j+1}]` (relative step `j`), variance
    /// `delta_k * h_noise`. Identical for every evaluation order and thread count.
    pub fn increment(&self, channel: Channel, mode: usize, j: i64) -> Result<f64> {
        if mode >= self.keys.len() {
            return Err(Error::BasisMismatch);
        }
        let abs = self.check_window(j)?;
        Ok(self.increment_abs(channel, mode, abs))
    }

    /// Stationary-initialization draw for a mode: standard normal from the reserved counter
    /// one step before the realized window, never reused by increments.
    pub(crate) fn init_gauss(&self, channel: Channel, mode: usize) -> f64 {
        rng::gauss(
            self.grid.seed,
            rng::domain::INIT,
            channel.tag(),
            self.keys[mode],
            self.grid.j_min() - 1,
        )
    }

    /// Wiener shift by `s` (a multiple of `h_noise`): the shifted path at relative step `j`
    /// reads the original path at `j + s/h_noise`. The new origin must stay inside the grid.
    pub fn shift(&self, s: f64) -> Result<WienerPath> {
        let ds = steps_of(s, self.grid.h)?;
        let offset = self.offset + ds;
        if offset < self.grid.j_min() || offset > self.grid.j_max() {
            return Err(Error::OutOfHorizon {
                t: s,
                t_min: self.grid.t_min(),
                t_max: self.grid.t_max(),
            });
        }
        let mut out = self.clone();
        out.offset = offset;
        Ok(out)
    }

    /// Path value `omega(t) - omega(0)` of one mode at a relative grid time (sum of
    /// increments; O(steps), intended for diagnostics and tests).
    pub fn value(&self, channel: Channel, mode: usize, t: f64) -> Result<f64> {
        let j = steps_of(t, self.grid.h)?;
        let mut acc = 0.0;
        if j >= 0 {
            for step in 0..j {
                acc += self.increment(channel, mode, step)?;
            }
        } else {
            for step in j..0 {
                acc -= self.increment(channel, mode, step)?;
            }
        }
        Ok(acc)
    }
}

/// Verdict of a summability or growth check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

/// One series test: terms, decay diagnostics, and the verdict against the lattice threshold.
#[derive(Debug, Clone)]
pub struct SeriesCheck {
    pub label: &'static str,
    /// Partial sum over the inspected modes.
    pub partial_sum: f64,
    /// Decay exponent of the terms in `|k|` known in closed form (power-law kinds).
    pub analytic_exponent: Option<f64>,
    /// Least-squares decay exponent with standard error (explicit lists).
    pub fitted_exponent: Option<(f64, f64)>,
    /// Summability threshold for the exponent: strictly below `-n` converges.
    pub threshold: f64,
    pub verdict: Verdict,
    pub note: Option<String>,
}

/// Combined admissibility report for the two channels.
#[derive(Debug, Clone)]
pub struct NoiseReport {
    pub alpha: f64,
    /// Trace/Hilbert-Schmidt test for channel 2: `sum delta'_k`.
    pub channel2_trace: SeriesCheck,
    /// Weighted test for channel 1: `sum delta_k lambda_k^{2 alpha + 1}`.
    pub channel1_weighted: SeriesCheck,
    pub verdict: Verdict,
}

/// Modes of the idealized (untruncated) spectrum in `lambda`-ascending order:
/// `(|k|^2, lambda)` pairs.
fn ideal_modes(dim: usize, diffusion: f64, count: usize) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(count);
    if dim == 1 {
        for k in 1..=count {
            let m = (k * k) as f64;
            out.push((m, diffusion * m));
        }
    } else {
        let cap = ((4.0 * count as f64 / core::f64::consts::PI).sqrt() as usize) + 3;
        for k1 in 1..=cap {
            for k2 in 1..=cap {
                let m = (k1 * k1 + k2 * k2) as f64;
                out.push((m, diffusion * m));
            }
        }
        out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        out.truncate(count);
    }
    out
}

fn fit_log_slope(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let n = xs.len();
    if n < 4 {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let resid: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let e = y - my - slope * (x - mx);
            e * e
        })
        .sum();
    let se = (resid / (nf - 2.0) / sxx).sqrt();
    Some((slope, se))
}

fn check_series(
    label: &'static str,
    dim: usize,
    diffusion: f64,
    kind: &CovKind,
    weight_exp: f64, // terms are delta_k * lambda_k^{weight_exp}
    basis_lambda: Option<&[f64]>,
    tail_modes: usize,
) -> SeriesCheck {
    let threshold = -(dim as f64);
    match kind {
        CovKind::InversePower { gamma } => {
            // term = lambda^{weight_exp - gamma} ~ |k|^{2 (weight_exp - gamma)}
            let e = 2.0 * (weight_exp - gamma);
            let modes = ideal_modes(dim, diffusion, tail_modes);
            let partial: f64 = modes.iter().map(|(_, l)| l.powf(weight_exp - gamma)).sum();
            let verdict = if e < threshold { Verdict::Pass } else { Verdict::Fail };
            let mut note = None;
            if verdict == Verdict::Fail && e >= 0.0 {
                note = Some(String::from("terms do not vanish"));
            }
            SeriesCheck {
                label,
                partial_sum: partial,
                analytic_exponent: Some(e),
                fitted_exponent: None,
                threshold,
                verdict,
                note,
            }
        }
        CovKind::ScaledIdentity(c) => {
            if *c == 0.0 {
                SeriesCheck {
                    label,
                    partial_sum: 0.0,
                    analytic_exponent: None,
                    fitted_exponent: None,
                    threshold,
                    verdict: Verdict::Pass,
                    note: Some(String::from("channel is off (zero intensity)")),
                }
            } else {
                let e = 2.0 * weight_exp; // term = c * lambda^{weight_exp}
                let modes = ideal_modes(dim, diffusion, tail_modes);
                let partial: f64 = modes.iter().map(|(_, l)| c * l.powf(weight_exp)).sum();
                SeriesCheck {
                    label,
                    partial_sum: partial,
                    analytic_exponent: Some(e),
                    fitted_exponent: None,
                    threshold,
                    verdict: Verdict::Fail,
                    note: Some(String::from("terms do not vanish")),
                }
            }
        }
        CovKind::Explicit(list) => {
            let lambda = basis_lambda.expect("explicit list requires basis eigenvalues");
            let m = list.len().min(lambda.len());
            let mut idx: Vec<usize> = (0..m).collect();
            idx.sort_by(|&a, &b| lambda[a].partial_cmp(&lambda[b]).unwrap());
            let terms: Vec<f64> =
                idx.iter().map(|&i| list[i] * lambda[i].powf(weight_exp)).collect();
            let partial: f64 = terms.iter().sum();
            let positive: Vec<(f64, f64)> = idx
                .iter()
                .zip(terms.iter())
                .filter(|(_, t)| **t > 0.0)
                .map(|(&i, &t)| (lambda[i], t))
                .collect();
            if positive.len() <= 8 {
                return SeriesCheck {
                    label,
                    partial_sum: partial,
                    analytic_exponent: None,
                    fitted_exponent: None,
                    threshold,
                    verdict: Verdict::Pass,
                    note: Some(String::from("finite support")),
                };
            }
            // Fit the tail half in log-log, |k| = sqrt(lambda / d).
            let tail = &positive[positive.len() / 2..];
            let xs: Vec<f64> = tail.iter().map(|(l, _)| 0.5 * (l / diffusion).ln()).collect();
            let ys: Vec<f64> = tail.iter().map(|(_, t)| t.ln()).collect();
            let fit = fit_log_slope(&xs, &ys);
            let (verdict, note) = match fit {
                Some((slope, se)) => {
                    if slope + 2.0 * se < threshold {
                        (Verdict::Pass, None)
                    } else if slope - 2.0 * se > threshold {
                        (Verdict::Fail, None)
                    } else {
                        (
                            Verdict::Inconclusive,
                            Some(format!(
                                "fitted exponent {slope:.3} +- {:.3} straddles the threshold {threshold}",
                                2.0 * se
                            )),
                        )
                    }
                }
                None => (Verdict::Inconclusive, Some(String::from("tail too short to fit"))),
            };
            SeriesCheck {
                label,
                partial_sum: partial,
                analytic_exponent: None,
                fitted_exponent: fit,
                threshold,
                verdict,
                note,
            }
        }
    }
}

fn combine(a: Verdict, b: Verdict) -> Verdict {
    use Verdict::*;
    match (a, b) {
        (Fail, _) | (_, Fail) => Fail,
        (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
        _ => Pass,
    }
}

/// Checks both covariance conditions at regularity index `alpha` in (0, 1/2), inspecting
/// `tail_modes >= 64` modes of the idealized spectrum.
pub fn validate(
    basis: &Basis,
    cov1: &CovarianceSpec,
    cov2: &CovarianceSpec,
    alpha: f64,
    tail_modes: usize,
) -> Result<NoiseReport> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(Error::InvalidParam { name: "alpha", value: alpha, expected: "in (0, 1/2)" });
    }
    if tail_modes < 64 {
        return Err(Error::InvalidParam {
            name: "tail_modes",
            value: tail_modes as f64,
            expected: ">= 64",
        });
    }
    // Surface length errors for explicit lists up front.
    cov1.intensities(basis)?;
    cov2.intensities(basis)?;

    let dim = basis.dim();
    let d = basis.diffusion();
    let ch2 = check_series("channel-2 trace", dim, d, &cov2.kind, 0.0, Some(basis.lambda()), tail_modes);
    let mut ch1 = check_series(
        "channel-1 weighted sum",
        dim,
        d,
        &cov1.kind,
        2.0 * alpha + 1.0,
        Some(basis.lambda()),
        tail_modes,
    );
    // Power-law channel 1: flag the gap between the operator-smoothing heuristic and the
    // mode-sum test when a configuration sits between the two thresholds.
    if let CovKind::InversePower { gamma } = cov1.kind {
        let strict = 2.0 * alpha + 1.0 + dim as f64 / 2.0;
        let heuristic = 2.0 * alpha + dim as f64 / 2.0 - 1.0;
        if ch1.verdict == Verdict::Fail && gamma > heuristic && ch1.note.is_none() {
            ch1.note = Some(format!(
                "gamma = {gamma} satisfies the operator-smoothing heuristic (gamma > {heuristic}) \
                 but not the mode-sum test (needs gamma > {strict}); the mode-sum test governs"
            ));
        }
    }
    let verdict = combine(ch1.verdict, ch2.verdict);
    Ok(NoiseReport { alpha, channel2_trace: ch2, channel1_weighted: ch1, verdict })
}
