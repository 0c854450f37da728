//! Pullback experiments: contraction of initial sets evolved from the past, empirical
//! absorbing radii, the two-part splitting of the damped component, and H1 boundedness
//! diagnostics.
//!
//! All experiments integrate under one driving path and vary only the starting time, so
//! "evolving from further in the past" is literal: the state at time `-t` sees exactly the
//! increments the state at time `-2t` saw after its first `t` time units. Initial ensembles
//! are drawn by a counter-based sampler keyed separately from the path, so the same ball of
//! initial data can be replayed against any noise realization.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // f64 inherent methods shadow these under std; no_std needs the trait
use num_traits::Float;

use crate::error::{Error, Result};
use crate::integrate::{
    default_init_mode, h_dist, h_norm_sq, integrate_from, Recorder, Snapshot, SolverConfig,
    Stepper, SystemState, TrajectoryRecord,
};
use crate::models::ReactionModel;
use crate::noise::{steps_of, WienerPath};
use crate::ou::{OuEvolver, OuState};
use crate::rng::{self, domain};
use crate::spectral::{Basis, GridField};

/// Spectral shape of sampled initial data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleProfile {
    /// Gaussian coefficients damped by `1/(1+|k|^2)`: smooth fields exciting every mode.
    SmoothDecay,
    /// All energy in the lowest mode: bounded pointwise amplitude even at large radius.
    FirstMode,
}

/// Draws `m` random states on the sphere of radius `radius` in the product norm
/// `(||u1||_2^2 + ||u2||_2^2)^{1/2}`. Deterministic in `(seed, profile, index)` and
/// independent of any noise path.
pub fn sphere_states(
    basis: &Basis,
    radius: f64,
    m: usize,
    seed: u64,
    profile: SampleProfile,
) -> Result<Vec<(GridField, GridField)>> {
    if !(radius >= 0.0) || !radius.is_finite() {
        return Err(Error::InvalidParam { name: "radius", value: radius, expected: ">= 0, finite" });
    }
    if m == 0 {
        return Err(Error::InvalidParam { name: "m", value: 0.0, expected: ">= 1" });
    }
    let nm = basis.mode_count();
    let mut out = Vec::with_capacity(m);
    for i in 0..m {
        let mut c1 = vec![0.0; nm];
        let mut c2 = vec![0.0; nm];
        let active = match profile {
            SampleProfile::SmoothDecay => nm,
            SampleProfile::FirstMode => 1,
        };
        for k in 0..active {
            let damp = match profile {
                SampleProfile::SmoothDecay => 1.0 / (1.0 + basis.mu()[k]),
                SampleProfile::FirstMode => 1.0,
            };
            let key = basis.mode_key(k);
            c1[k] = damp * rng::gauss(seed, domain::SAMPLER, 1, key, i as i64);
            c2[k] = damp * rng::gauss(seed, domain::SAMPLER, 2, key, i as i64);
        }
        let norm_sq: f64 = c1.iter().chain(c2.iter()).map(|c| c * c).sum();
        if norm_sq == 0.0 {
            c1[0] = 1.0;
        }
        let scale = radius / norm_sq.max(f64::MIN_POSITIVE).sqrt();
        for c in c1.iter_mut().chain(c2.iter_mut()) {
            *c *= scale;
        }
        // discrete Parseval is exact here, so the grid product norm equals `radius`
        let u1 = basis.inverse_transform(&basis.spectral_from(c1)?)?;
        let u2 = basis.inverse_transform(&basis.spectral_from(c2)?)?;
        out.push((u1, u2));
    }
    Ok(out)
}

/// One pullback horizon: endpoints at time zero of trajectories started at `-t`.
#[derive(Debug, Clone)]
pub struct PullbackRung {
    pub t: f64,
    /// Symmetric pairwise endpoint distance matrix in the product norm.
    pub distances: Vec<Vec<f64>>,
    /// Largest pairwise distance.
    pub diam: f64,
    pub endpoint_norms: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct PullbackOutput {
    pub rungs: Vec<PullbackRung>,
    /// Endpoint states of the deepest horizon; the attractor-fiber estimate.
    pub endpoints: Vec<(GridField, GridField)>,
}

/// Evolves every initial state from time `-t` to time `0` under the same path, for each
/// horizon `t` in `times` (strictly increasing, nonnegative, `h_noise`-aligned). All runs
/// share one stationary-pair sweep anchored at the window edge.
pub fn pullback_run(
    model: &ReactionModel,
    path: &WienerPath,
    states: &[(GridField, GridField)],
    times: &[f64],
    cfg: &SolverConfig,
) -> Result<PullbackOutput> {
    if states.len() < 2 {
        return Err(Error::InvalidParam {
            name: "states.len",
            value: states.len() as f64,
            expected: ">= 2 (diameter needs at least two trajectories)",
        });
    }
    if times.is_empty() {
        return Err(Error::BadSeries("no pullback times"));
    }
    let h0 = path.grid().h();
    for w in times.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::BadSeries("pullback times must be strictly increasing"));
        }
    }
    let deepest = *times.last().expect("nonempty");
    if times[0] < 0.0 || steps_of(deepest, h0)? > -path.rel_min() {
        return Err(Error::OutOfHorizon {
            t: -deepest,
            t_min: path.rel_min() as f64 * h0,
            t_max: path.rel_max() as f64 * h0,
        });
    }

    // one sweep over start times, earliest first
    let starts: Vec<f64> = times.iter().rev().map(|t| -t).collect();
    let mut ev = OuEvolver::new(path, &model.sigma)?;
    let mode = default_init_mode(&model.sigma, path, starts[0])?;
    let ou_states = ev.states_at(&starts, mode)?;

    let mut rungs = Vec::with_capacity(times.len());
    let mut deepest_endpoints = Vec::new();
    for (idx, &t) in times.iter().enumerate() {
        let ou = &ou_states[times.len() - 1 - idx];
        let mut endpoints = Vec::with_capacity(states.len());
        for (u1, u2) in states {
            let out = integrate_from((u1, u2), path, -t, 0.0, model, cfg, ou)?;
            endpoints.push((out.u1, out.u2));
        }
        let mut distances = vec![vec![0.0; endpoints.len()]; endpoints.len()];
        let mut diam: f64 = 0.0;
        for i in 0..endpoints.len() {
            for j in (i + 1)..endpoints.len() {
                let d = h_dist(
                    (&endpoints[i].0, &endpoints[i].1),
                    (&endpoints[j].0, &endpoints[j].1),
                )?;
                distances[i][j] = d;
                distances[j][i] = d;
                diam = diam.max(d);
            }
        }
        let endpoint_norms =
            endpoints.iter().map(|(a, b)| h_norm_sq(a, b).sqrt()).collect();
        if idx + 1 == times.len() {
            deepest_endpoints = endpoints;
        }
        rungs.push(PullbackRung { t, distances, diam, endpoint_norms });
    }
    Ok(PullbackOutput { rungs, endpoints: deepest_endpoints })
}

/// Largest terminal product-norm square over a ball of initial data.
#[derive(Debug, Clone, Copy)]
pub struct AbsorbProfile {
    pub radius: f64,
    pub max_norm_sq: f64,
}

#[derive(Debug, Clone)]
pub struct AbsorbOutput {
    pub t_max: f64,
    pub profile: Vec<AbsorbProfile>,
    /// Empirical absorbing radius square: the profile maximum.
    pub rho_hat: f64,
    /// Relative spread of the profile across the radius ladder.
    pub spread: f64,
    /// True when the terminal norm is radius-independent (spread below 10%).
    pub consistent: bool,
}

/// Pullback-evolves balls `B(R)` for each `R` in the increasing `ladder` over `[-t_max, 0]`
/// and records the largest terminal norm per radius. Radius-independence of the result is
/// the absorbing-set signature; saturation in `t_max` is the caller's check (run twice).
pub fn absorbing_radius(
    model: &ReactionModel,
    path: &WienerPath,
    ladder: &[f64],
    m: usize,
    seed: u64,
    profile: SampleProfile,
    t_max: f64,
    cfg: &SolverConfig,
) -> Result<AbsorbOutput> {
    if ladder.is_empty() {
        return Err(Error::BadSeries("empty radius ladder"));
    }
    for w in ladder.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::BadSeries("radius ladder must be strictly increasing"));
        }
    }
    if !(t_max > 0.0) {
        return Err(Error::InvalidParam { name: "t_max", value: t_max, expected: "> 0" });
    }
    let mut ev = OuEvolver::new(path, &model.sigma)?;
    let mode = default_init_mode(&model.sigma, path, -t_max)?;
    let ou = ev.state_at(-t_max, mode)?;

    let basis = path.basis();
    let mut out_profile = Vec::with_capacity(ladder.len());
    let mut rho_hat: f64 = 0.0;
    for (idx, &radius) in ladder.iter().enumerate() {
        let states = sphere_states(basis, radius, m, seed.wrapping_add(idx as u64), profile)?;
        let mut max_norm_sq: f64 = 0.0;
        for (u1, u2) in &states {
            let run = integrate_from((u1, u2), path, -t_max, 0.0, model, cfg, &ou)?;
            max_norm_sq = max_norm_sq.max(h_norm_sq(&run.u1, &run.u2));
        }
        rho_hat = rho_hat.max(max_norm_sq);
        out_profile.push(AbsorbProfile { radius, max_norm_sq });
    }
    let lo = out_profile.iter().map(|p| p.max_norm_sq).fold(f64::INFINITY, f64::min);
    let spread = if rho_hat > 0.0 { (rho_hat - lo) / rho_hat } else { 0.0 };
    Ok(AbsorbOutput { t_max, profile: out_profile, rho_hat, spread, consistent: spread < 0.10 })
}

/// The damped component split at one record time: `v2_1` (zero initial data, carries all
/// coupling) plus `v2_2` (free decay of the initial data, known in closed form).
#[derive(Debug, Clone)]
pub struct SplitState {
    pub v2_1: GridField,
    pub v2_2: GridField,
}

#[derive(Debug, Clone)]
pub struct SplitPoint {
    pub t: f64,
    pub split: SplitState,
    /// The coupled solve's damped component at the same time.
    pub v2: GridField,
    /// `||v2_1 + v2_2 - v2|| / (1 + ||v2||)`.
    pub residual: f64,
    pub norm_v2_2: f64,
    /// `e^{-delta (t - t0)} ||v2(t0)||` with `delta = min sigma`.
    pub bound: f64,
}

#[derive(Debug, Clone)]
pub struct SplitOutput {
    pub points: Vec<SplitPoint>,
    pub record: TrajectoryRecord,
    pub max_residual: f64,
    /// `norm_v2_2 <= bound` at every record time (up to fp slack).
    pub bound_ok: bool,
}

/// Integrates the coupled system while stepping the zero-initial-data part `v2_1` with the
/// identical damped-update recursion and evaluating the decaying part `v2_2` in closed form
/// `v2(t0) * exp(-sigma(x)(t - t0))`. Their sum reproduces `v2` up to roundoff.
pub fn splitting_run(
    u0: (&GridField, &GridField),
    path: &WienerPath,
    t0: f64,
    t1: f64,
    model: &ReactionModel,
    cfg: &SolverConfig,
) -> Result<SplitOutput> {
    let basis = path.basis();
    if u0.0.basis() != basis || u0.1.basis() != basis || model.basis() != basis {
        return Err(Error::BasisMismatch);
    }
    let n_steps = steps_of(t1 - t0, cfg.h_step)?;
    if n_steps < 0 {
        return Err(Error::InvalidParam { name: "t1", value: t1, expected: ">= t0" });
    }
    let mut stepper = Stepper::new(model, path, cfg)?;
    let mut ou = stepper.ev.init_stationary(default_init_mode(&model.sigma, path, t0)?)?;
    let dt = t0 - ou.t();
    stepper.ev.advance(&mut ou, dt)?;

    let v1 = basis.sine_transform(u0.0)?.sub(&ou.z1)?;
    let v2 = u0.1.sub(&ou.z2)?;
    let v2_0 = v2.clone();
    let norm_v2_0 = v2_0.l2_norm();
    let delta = model.sigma.values.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut state = SystemState { v1, v2, t: t0 };
    let mut v2_1 = basis.zero_grid();

    let mut run = SplitRun {
        t0,
        delta,
        norm_v2_0,
        v2_0,
        sigma: &model.sigma,
        rec: Recorder::new(cfg, model.constants.p),
        points: Vec::new(),
        max_residual: 0.0,
        bound_ok: true,
    };
    run.push(&state, &ou, &v2_1)?;
    for i in 0..n_steps {
        stepper.step(&mut state, &mut ou)?;
        stepper.relax_grid(&mut v2_1.values);
        if (i + 1) % cfg.record_every as i64 == 0 || i + 1 == n_steps {
            run.push(&state, &ou, &v2_1)?;
        }
    }
    Ok(SplitOutput {
        points: run.points,
        record: run.rec.rec,
        max_residual: run.max_residual,
        bound_ok: run.bound_ok,
    })
}

struct SplitRun<'a> {
    t0: f64,
    delta: f64,
    norm_v2_0: f64,
    v2_0: GridField,
    sigma: &'a GridField,
    rec: Recorder,
    points: Vec<SplitPoint>,
    max_residual: f64,
    bound_ok: bool,
}

impl SplitRun<'_> {
    fn push(&mut self, state: &SystemState, ou: &OuState, v2_1: &GridField) -> Result<()> {
        self.rec.push(state.t, &state.v1, &state.v2, &ou.z1, &ou.z2)?;
        let dt = state.t - self.t0;
        let values: Vec<f64> = self
            .v2_0
            .values
            .iter()
            .zip(&self.sigma.values)
            .map(|(v, s)| v * (-s * dt).exp())
            .collect();
        let v2_2 = self.v2_0.basis().grid_from(values)?;
        let sum = v2_1.add(&v2_2)?;
        let residual = sum.sub(&state.v2)?.l2_norm() / (1.0 + state.v2.l2_norm());
        let norm_v2_2 = v2_2.l2_norm();
        let bound = (-self.delta * dt).exp() * self.norm_v2_0;
        self.max_residual = self.max_residual.max(residual);
        if norm_v2_2 > bound * (1.0 + 1e-12) + 1e-300 {
            self.bound_ok = false;
        }
        self.points.push(SplitPoint {
            t: state.t,
            split: SplitState { v2_1: v2_1.clone(), v2_2 },
            v2: state.v2.clone(),
            residual,
            norm_v2_2,
            bound,
        });
        Ok(())
    }
}

/// H1 and integral diagnostics of a splitting trajectory.
#[derive(Debug, Clone)]
pub struct H1Report {
    pub times: Vec<f64>,
    /// `||grad v1||_2^2` per record time.
    pub grad_v1_sq: Vec<f64>,
    /// `||grad v2_1||_2^2` per record time.
    pub grad_v21_sq: Vec<f64>,
    /// Start times of the sliding windows below.
    pub window_times: Vec<f64>,
    /// `(1/r) int_t^{t+r} ||u1||_p^p`.
    pub window_u1_lp: Vec<f64>,
    /// `(1/r) int_t^{t+r} ||grad v1||_2^2`.
    pub window_grad_v1: Vec<f64>,
    /// Post-transient maximum of `grad_v1_sq`.
    pub rho1_hat: f64,
    /// Post-transient maximum of `grad_v21_sq`.
    pub rho2_hat: f64,
}

fn trapezoid(times: &[f64], values: &[f64], a: usize, b: usize) -> f64 {
    let mut acc = 0.0;
    for i in a..b {
        acc += 0.5 * (values[i] + values[i + 1]) * (times[i + 1] - times[i]);
    }
    acc
}

/// Gradient and windowed-integral series from a recorded trajectory and its splitting.
/// `transient` discards the initial segment before taking maxima; `r` is the averaging
/// window length; `p` the power in the `||u1||_p^p` integrand.
pub fn h1_diagnostics(
    record: &TrajectoryRecord,
    split: &[SplitPoint],
    transient: f64,
    r: f64,
    p: f64,
) -> Result<H1Report> {
    if record.snapshots.is_empty() {
        return Err(Error::MissingSnapshots);
    }
    if !(r > 0.0) {
        return Err(Error::InvalidParam { name: "r", value: r, expected: "> 0" });
    }
    let snaps: &[Snapshot] = &record.snapshots;
    let times: Vec<f64> = snaps.iter().map(|s| s.t).collect();
    for w in times.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::BadSeries("snapshot times must be strictly increasing"));
        }
    }
    let t_end = *times.last().expect("nonempty");
    if !(transient < t_end) {
        return Err(Error::BadSeries("transient must end before the horizon"));
    }

    let mut grad_v1_sq = Vec::with_capacity(snaps.len());
    let mut u1_lp_p = Vec::with_capacity(snaps.len());
    for s in snaps {
        let g = s.v1.h1_seminorm();
        grad_v1_sq.push(g * g);
        let u1 = s.v1.add(&s.z1)?;
        let lp = s.v1.basis().inverse_transform(&u1)?.lp_norm(p)?;
        u1_lp_p.push(lp.powf(p));
    }
    let mut grad_v21_sq = Vec::with_capacity(split.len());
    for pt in split {
        let g = pt.split.v2_1.basis().sine_transform(&pt.split.v2_1)?.h1_seminorm();
        grad_v21_sq.push(g * g);
    }

    let mut window_times = Vec::new();
    let mut window_u1_lp = Vec::new();
    let mut window_grad_v1 = Vec::new();
    for a in 0..times.len() {
        let target = times[a] + r;
        if target > t_end + 1e-9 {
            break;
        }
        let mut b = a;
        while times[b] < target - 1e-9 {
            b += 1;
        }
        if b == a {
            continue;
        }
        window_times.push(times[a]);
        window_u1_lp.push(trapezoid(&times, &u1_lp_p, a, b) / (times[b] - times[a]));
        window_grad_v1.push(trapezoid(&times, &grad_v1_sq, a, b) / (times[b] - times[a]));
    }

    let mut rho1_hat: f64 = 0.0;
    let mut any = false;
    for (t, g) in times.iter().zip(&grad_v1_sq) {
        if *t >= transient {
            rho1_hat = rho1_hat.max(*g);
            any = true;
        }
    }
    let mut rho2_hat: f64 = 0.0;
    for (pt, g) in split.iter().zip(&grad_v21_sq) {
        if pt.t >= transient {
            rho2_hat = rho2_hat.max(*g);
        }
    }
    if !any {
        return Err(Error::BadSeries("no record times after the transient"));
    }
    Ok(H1Report {
        times,
        grad_v1_sq,
        grad_v21_sq,
        window_times,
        window_u1_lp,
        window_grad_v1,
        rho1_hat,
        rho2_hat,
    })
}
