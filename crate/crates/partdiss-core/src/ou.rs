//! Stationary Ornstein-Uhlenbeck convolutions driving the pathwise solver.
//!
//! Two processes ride on one [`WienerPath`]: `z1` solves `dz1 = -A z1 dt + dW1` mode by mode
//! (A is diagonal in the sine basis) and `z2` solves `dz2 = -sigma(x) z2 dt + dW2` pointwise
//! on the grid. Everything is advanced by one canonical substep of length `h_noise`; a caller
//! step of `h = n * h_noise` is exactly `n` substeps. Because each substep reads increments at
//! an absolute grid index and states are anchored at the window's left edge, the process
//! along a shifted path agrees bit-for-bit with the unshifted one at matching times, which is
//! what the cocycle and pullback machinery relies on.
//!
//! The `z1` substep uses the exact transition law: `z <- e^{-lambda h0} z + g * dw` with the
//! gain chosen so the update variance equals `delta (1 - e^{-2 lambda h0}) / (2 lambda)`.
//! The `z2` substep with spatially varying damping has no closed diagonal form; it uses the
//! midpoint-weighted exponential update `z2 <- e^{-sigma h0} z2 + e^{-sigma h0 / 2} dw2`,
//! weak order 1, whose stationary variance is off the exact one by a factor
//! `sigma h0 / sinh(sigma h0)` (about `(sigma h0)^2 / 6`).

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // f64 inherent methods shadow these under std; no_std needs the trait
use num_traits::Float;

use crate::error::{Error, Result};
use crate::noise::{steps_of, Channel, WienerPath};
use crate::spectral::{GridField, SpectralField};

/// Joint OU state at one relative grid time of the underlying path.
#[derive(Debug, Clone, PartialEq)]
pub struct OuState {
    pub z1: SpectralField,
    pub z2: GridField,
    step: i64,
    t: f64,
}

impl OuState {
    /// Relative time on the path (a multiple of `h_noise`).
    pub fn t(&self) -> f64 {
        self.t
    }

    /// Relative time in noise steps.
    pub fn rel_step(&self) -> i64 {
        self.step
    }
}

/// Initialization of the stationary law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitMode {
    /// Draw every mode of both processes from the exact stationary normal law. Requires
    /// constant damping (the `z2` law is diagonal only then).
    ExactDiagonal,
    /// `z2` starts at zero and relaxes over the given burn-in time (a multiple of `h_noise`);
    /// `z1` is still drawn exactly. Works for any damping field.
    BurnIn(f64),
}

/// Per-step gain turning a raw Wiener increment of variance `delta * h` into the exact OU
/// update noise: `gain^2 * h = (1 - e^{-2 lambda h}) / (2 lambda)`.
pub fn ou_gain(lambda: f64, h: f64) -> f64 {
    (-(-2.0 * lambda * h).exp_m1() / (2.0 * lambda * h)).sqrt()
}

/// Steps both OU components along a fixed path with precomputed per-substep tables.
#[derive(Debug, Clone)]
pub struct OuEvolver {
    path: WienerPath,
    sigma: GridField,
    h0: f64,
    dec1: Vec<f64>,
    gain1: Vec<f64>,
    dec2: Vec<f64>,
    half2: Vec<f64>,
    inc: Vec<f64>,
    inc_grid: Vec<f64>,
    scratch: Vec<f64>,
}

impl OuEvolver {
    /// Damping must be strictly positive on the grid and live on the path's basis.
    pub fn new(path: &WienerPath, sigma: &GridField) -> Result<OuEvolver> {
        if sigma.basis() != path.basis() {
            return Err(Error::BasisMismatch);
        }
        let min = sigma.values.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(min > 0.0) {
            return Err(Error::DampingNotPositive { min });
        }
        let h0 = path.grid().h();
        let basis = path.basis();
        let dec1: Vec<f64> = basis.lambda().iter().map(|l| (-l * h0).exp()).collect();
        let gain1: Vec<f64> = basis.lambda().iter().map(|l| ou_gain(*l, h0)).collect();
        let dec2: Vec<f64> = sigma.values.iter().map(|s| (-s * h0).exp()).collect();
        let half2: Vec<f64> = sigma.values.iter().map(|s| (-s * h0 / 2.0).exp()).collect();
        Ok(OuEvolver {
            path: path.clone(),
            sigma: sigma.clone(),
            h0,
            dec1,
            gain1,
            dec2,
            half2,
            inc: vec![0.0; basis.mode_count()],
            inc_grid: vec![0.0; basis.point_count()],
            scratch: Vec::new(),
        })
    }

    pub fn path(&self) -> &WienerPath {
        &self.path
    }

    pub fn sigma(&self) -> &GridField {
        &self.sigma
    }

    /// Stationary state at the left edge of the path's window (plus the burn-in time in
    /// `BurnIn` mode). The draws come from the path's reserved initialization counters, so
    /// they never collide with increment counters and are shift-invariant.
    pub fn init_stationary(&self, mode: InitMode) -> Result<OuState> {
        let basis = self.path.basis();
        let d1 = self.path.delta(Channel::One);
        let mut z1 = basis.zero_spectral();
        for (k, c) in z1.coeffs.iter_mut().enumerate() {
            let v = d1[k] / (2.0 * basis.lambda()[k]);
            *c = v.sqrt() * self.path.init_gauss(Channel::One, k);
        }
        let step = self.path.rel_min();
        let t = step as f64 * self.h0;
        match mode {
            InitMode::ExactDiagonal => {
                let smin = self.sigma.values.iter().cloned().fold(f64::INFINITY, f64::min);
                let smax = self.sigma.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                if smax - smin >= 1e-12 {
                    return Err(Error::NonConstantDamping);
                }
                let s0 = self.sigma.values[0];
                let d2 = self.path.delta(Channel::Two);
                let mut c2 = vec![0.0; basis.mode_count()];
                for (k, c) in c2.iter_mut().enumerate() {
                    *c = (d2[k] / (2.0 * s0)).sqrt() * self.path.init_gauss(Channel::Two, k);
                }
                let mut z2 = basis.zero_grid();
                let mut scratch = Vec::new();
                basis.inverse_into(&c2, &mut z2.values, &mut scratch);
                Ok(OuState { z1, z2, step, t })
            }
            InitMode::BurnIn(t_burn) => {
                let n = steps_of(t_burn, self.h0)?;
                if !(t_burn > 0.0) || n <= 0 {
                    return Err(Error::InvalidParam {
                        name: "t_burn",
                        value: t_burn,
                        expected: "> 0, multiple of h_noise",
                    });
                }
                if step + n > self.path.rel_max() {
                    return Err(Error::BurnInTooLong {
                        burn_in: t_burn,
                        span: (self.path.rel_max() - step) as f64 * self.h0,
                    });
                }
                let mut state = OuState { z1, z2: basis.zero_grid(), step, t };
                let mut this = self.clone();
                this.advance(&mut state, t_burn)?;
                Ok(state)
            }
        }
    }

    fn substep(&mut self, state: &mut OuState) -> Result<()> {
        let abs = self.path.check_window(state.step)?;
        for (k, z) in state.z1.coeffs.iter_mut().enumerate() {
            *z = self.dec1[k] * *z
                + self.gain1[k] * self.path.increment_abs(Channel::One, k, abs);
        }
        for (k, c) in self.inc.iter_mut().enumerate() {
            *c = self.path.increment_abs(Channel::Two, k, abs);
        }
        self.path.basis().inverse_into(&self.inc, &mut self.inc_grid, &mut self.scratch);
        for (j, z) in state.z2.values.iter_mut().enumerate() {
            *z = self.dec2[j] * *z + self.half2[j] * self.inc_grid[j];
        }
        state.step += 1;
        state.t = state.step as f64 * self.h0;
        Ok(())
    }

    /// Advances both components by `h >= 0`, a multiple of `h_noise`, consuming one path
    /// increment per component per substep.
    pub fn advance(&mut self, state: &mut OuState, h: f64) -> Result<()> {
        let n = steps_of(h, self.h0)?;
        if n < 0 {
            return Err(Error::InvalidParam { name: "h", value: h, expected: ">= 0" });
        }
        for _ in 0..n {
            self.substep(state)?;
        }
        Ok(())
    }

    /// Stationary state advanced to relative time `t`.
    pub fn state_at(&mut self, t: f64, mode: InitMode) -> Result<OuState> {
        let mut state = self.init_stationary(mode)?;
        let dt = t - state.t;
        self.advance(&mut state, dt)?;
        Ok(state)
    }

    /// States at several ascending times from a single forward sweep.
    pub fn states_at(&mut self, times: &[f64], mode: InitMode) -> Result<Vec<OuState>> {
        let mut out = Vec::with_capacity(times.len());
        let mut state = self.init_stationary(mode)?;
        let mut prev = state.t;
        for &t in times {
            if t < prev {
                return Err(Error::InvalidParam {
                    name: "times",
                    value: t,
                    expected: "ascending, >= window start",
                });
            }
            let dt = t - state.t;
            self.advance(&mut state, dt)?;
            out.push(state.clone());
            prev = t;
        }
        Ok(out)
    }
}

/// Spec-shaped single-component stepper: advances the clock and `z1` exactly; `z2` is
/// carried frozen. For the joint process use [`OuEvolver::advance`].
pub fn step_z1(state: &OuState, path: &WienerPath, h: f64) -> Result<OuState> {
    let h0 = path.grid().h();
    let n = steps_of(h, h0)?;
    if n < 0 {
        return Err(Error::InvalidParam { name: "h", value: h, expected: ">= 0" });
    }
    let basis = path.basis();
    if state.z1.basis() != basis {
        return Err(Error::BasisMismatch);
    }
    let mut out = state.clone();
    for _ in 0..n {
        let abs = path.check_window(out.step)?;
        for (k, z) in out.z1.coeffs.iter_mut().enumerate() {
            let l = basis.lambda()[k];
            *z = (-l * h0).exp() * *z
                + ou_gain(l, h0) * path.increment_abs(Channel::One, k, abs);
        }
        out.step += 1;
        out.t = out.step as f64 * h0;
    }
    Ok(out)
}

/// Single-component stepper for `z2` (midpoint-weighted exponential update); `z1` is carried
/// frozen. Damping must be strictly positive.
pub fn step_z2(state: &OuState, path: &WienerPath, sigma: &GridField, h: f64) -> Result<OuState> {
    let h0 = path.grid().h();
    let n = steps_of(h, h0)?;
    if n < 0 {
        return Err(Error::InvalidParam { name: "h", value: h, expected: ">= 0" });
    }
    let basis = path.basis();
    if sigma.basis() != basis || state.z2.basis() != basis {
        return Err(Error::BasisMismatch);
    }
    let min = sigma.values.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(min > 0.0) {
        return Err(Error::DampingNotPositive { min });
    }
    let mut out = state.clone();
    let mut inc = vec![0.0; basis.mode_count()];
    let mut grid = vec![0.0; basis.point_count()];
    let mut scratch = Vec::new();
    for _ in 0..n {
        let abs = path.check_window(out.step)?;
        for (k, c) in inc.iter_mut().enumerate() {
            *c = path.increment_abs(Channel::Two, k, abs);
        }
        basis.inverse_into(&inc, &mut grid, &mut scratch);
        for (j, z) in out.z2.values.iter_mut().enumerate() {
            let s = sigma.values[j];
            *z = (-s * h0).exp() * *z + (-s * h0 / 2.0).exp() * grid[j];
        }
        out.step += 1;
        out.t = out.step as f64 * h0;
    }
    Ok(out)
}

/// Builds a state by hand, for calibration tests. Time must be grid-aligned.
pub fn state_from(z1: SpectralField, z2: GridField, path: &WienerPath, t: f64) -> Result<OuState> {
    if z1.basis() != path.basis() || z2.basis() != path.basis() {
        return Err(Error::BasisMismatch);
    }
    let step = steps_of(t, path.grid().h())?;
    Ok(OuState { z1, z2, step, t: step as f64 * path.grid().h() })
}

/// Sampled norm functionals of the stationary pair, for growth diagnostics:
/// `||z1||_4^4`, `||z2||_2^2` and `||grad z1||_2^2` on `[0, t_end]`.
#[derive(Debug, Clone)]
pub struct ZSeries {
    pub times: Vec<f64>,
    pub z1_l4_pow4: Vec<f64>,
    pub z2_l2_sq: Vec<f64>,
    pub z1_grad_sq: Vec<f64>,
}

pub fn z_norm_series(
    path: &WienerPath,
    sigma: &GridField,
    t_end: f64,
    sample_dt: f64,
    mode: InitMode,
) -> Result<ZSeries> {
    if !(t_end > 0.0 && sample_dt > 0.0) {
        return Err(Error::InvalidParam {
            name: "t_end/sample_dt",
            value: t_end,
            expected: "> 0",
        });
    }
    let mut ev = OuEvolver::new(path, sigma)?;
    let mut state = ev.state_at(0.0, mode)?;
    let n = steps_of(t_end, sample_dt)?;
    let mut out = ZSeries {
        times: Vec::with_capacity(n as usize + 1),
        z1_l4_pow4: Vec::new(),
        z2_l2_sq: Vec::new(),
        z1_grad_sq: Vec::new(),
    };
    let basis = path.basis();
    for i in 0..=n {
        let t = i as f64 * sample_dt;
        let dt = t - state.t();
        ev.advance(&mut state, dt)?;
        let g1 = basis.inverse_transform(&state.z1)?;
        let l4 = g1.lp_norm(4.0)?;
        out.times.push(t);
        out.z1_l4_pow4.push(l4.powi(4));
        out.z2_l2_sq.push(state.z2.l2_norm().powi(2));
        out.z1_grad_sq.push(state.z1.h1_seminorm().powi(2));
    }
    Ok(out)
}

/// Finite-horizon growth diagnostic for a positive scalar series `X(t)`.
#[derive(Debug, Clone)]
pub struct TemperednessReport {
    /// `(T', g(T'))` with `g(T') = max over t in [T'/2, T'] of log X(t) / t`, for
    /// `T' = T/8, T/4, T/2, T`.
    pub ladder: Vec<(f64, f64)>,
    /// Time-average over unit windows of the in-window maximum of `X`.
    pub sup_window_mean: f64,
    pub threshold: f64,
    /// Ladder non-increasing rung to rung.
    pub monotone: bool,
    pub final_g: f64,
    pub consistent: bool,
}

/// Sub-exponential growth check on a dyadic ladder. The verdict is consistent when the
/// top-rung exponent is below `threshold` and the ladder either decreases or sits entirely
/// below the threshold (a series bounded below 1 has negative exponents creeping up to zero,
/// which is still sub-exponential).
pub fn temperedness_diagnostic(
    times: &[f64],
    values: &[f64],
    horizon: f64,
    threshold: f64,
) -> Result<TemperednessReport> {
    if times.len() != values.len() || times.len() < 2 {
        return Err(Error::BadSeries("need matching times/values with at least 2 points"));
    }
    if !(horizon > 0.0) {
        return Err(Error::InvalidParam { name: "horizon", value: horizon, expected: "> 0" });
    }
    for w in times.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::BadSeries("times must be strictly increasing"));
        }
    }
    if values.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::BadSeries("series must be positive and finite"));
    }
    if *times.last().unwrap() < horizon {
        return Err(Error::BadSeries("series does not cover the horizon"));
    }

    let mut ladder = Vec::with_capacity(4);
    for div in [8.0, 4.0, 2.0, 1.0] {
        let tp = horizon / div;
        let mut g = f64::NEG_INFINITY;
        for (t, v) in times.iter().zip(values) {
            if *t >= tp / 2.0 && *t <= tp && *t > 0.0 {
                g = g.max(v.ln() / t);
            }
        }
        if g == f64::NEG_INFINITY {
            return Err(Error::BadSeries("a ladder window contains no samples"));
        }
        ladder.push((tp, g));
    }
    let monotone = ladder.windows(2).all(|w| w[1].1 <= w[0].1);
    let final_g = ladder[3].1;
    let all_below = ladder.iter().all(|(_, g)| *g < threshold);
    let consistent = final_g < threshold && (monotone || all_below);

    let mut sup_sum = 0.0;
    let mut nwin = 0usize;
    let mut w_end = 1.0;
    let mut cur = f64::NEG_INFINITY;
    let mut any = false;
    for (t, v) in times.iter().zip(values) {
        if *t > horizon {
            break;
        }
        while *t >= w_end {
            if any {
                sup_sum += cur;
                nwin += 1;
            }
            cur = f64::NEG_INFINITY;
            any = false;
            w_end += 1.0;
        }
        cur = cur.max(*v);
        any = true;
    }
    if any {
        sup_sum += cur;
        nwin += 1;
    }
    let sup_window_mean = sup_sum / nwin as f64;

    Ok(TemperednessReport { ladder, sup_window_mean, threshold, monotone, final_g, consistent })
}
