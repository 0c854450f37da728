//! Pathwise integration of the transformed system and a direct stochastic reference.
//!
//! The primary route substitutes `v = u - z` and integrates the random PDE
//!
//! ```text
//! dv1/dt = d Laplace v1 - h(x, v1 + z1) - f(x, v1 + z1, v2 + z2)
//! dv2/dt = -sigma(x) v2 - g(x, v1 + z1)
//! ```
//!
//! with no stochastic term: all noise lives in the Ornstein-Uhlenbeck pair `z`, advanced in
//! lockstep. Exponential one-step schemes keep the stiff linear parts exact; the nonlinearity
//! is evaluated pseudospectrally on the (padded) grid. `em_reference` steps the original
//! system directly with exponential Euler-Maruyama and raw Wiener increments; it shares no
//! noise processing with the transformed route, which is what makes cross-checking the two
//! meaningful.
//!
//! Solutions are cocycles over the Wiener shift: `solve(t+s, w) = solve(t, shift_s w) o
//! solve(s, w)`. Because increments are functions of absolute grid indices, both sides of
//! that identity consume identical noise and the discrepancy is pure floating-point noise;
//! `cocycle_check` measures it.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // f64 inherent methods shadow these under std; no_std needs the trait
use num_traits::Float;

use crate::error::{Error, Result};
use crate::models::ReactionModel;
use crate::noise::{steps_of, Channel, WienerPath};
use crate::ou::{state_from, InitMode, OuEvolver, OuState};
use crate::spectral::{GridField, SpectralField};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Exponential time differencing, order 1: exact linear flow, explicit nonlinearity.
    Etd1,
    /// Implicit linear solve `(1 + lambda h)^{-1}`, explicit nonlinearity.
    SemiImplicitEuler,
}

/// Which norms land in the record (per component, where defined).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NormSet {
    pub l2: bool,
    pub lp: bool,
    pub h1: bool,
}

impl Default for NormSet {
    fn default() -> NormSet {
        NormSet { l2: true, lp: true, h1: true }
    }
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Solver step; must be a positive multiple of the path's noise step.
    pub h_step: f64,
    pub scheme: Scheme,
    /// Record cadence in solver steps (>= 1). The initial and final times always record.
    pub record_every: usize,
    pub norms: NormSet,
    pub snapshots: bool,
}

impl SolverConfig {
    pub fn new(h_step: f64, scheme: Scheme) -> SolverConfig {
        SolverConfig { h_step, scheme, record_every: 1, norms: NormSet::default(), snapshots: false }
    }
}

/// Transformed state: spectral diffusive part, pointwise damped part.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemState {
    pub v1: SpectralField,
    pub v2: GridField,
    pub t: f64,
}

/// Full solver state at one record time.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub t: f64,
    pub v1: SpectralField,
    pub v2: GridField,
    pub z1: SpectralField,
    pub z2: GridField,
}

/// Norm time series (`columns[0] == "t"`) plus optional full snapshots.
#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub snapshots: Vec<Snapshot>,
    /// Exponent behind the `_lp` columns (the model's dissipation power).
    pub lp_exponent: f64,
}

impl TrajectoryRecord {
    pub fn column_series(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r[0]).collect()
    }
}

/// Terminal data of one integration.
#[derive(Debug, Clone)]
pub struct FlowOutput {
    pub record: TrajectoryRecord,
    pub state: SystemState,
    pub ou: OuState,
    /// Reconstructed solution at the final time.
    pub u1: GridField,
    pub u2: GridField,
    pub u1_spec: SpectralField,
}

/// Squared product-space norm `||u1||_2^2 + ||u2||_2^2` by grid quadrature.
pub fn h_norm_sq(u1: &GridField, u2: &GridField) -> f64 {
    let a = u1.l2_norm();
    let b = u2.l2_norm();
    a * a + b * b
}

/// Product-space distance between two grid pairs.
pub fn h_dist(a: (&GridField, &GridField), b: (&GridField, &GridField)) -> Result<f64> {
    let d1 = a.0.sub(b.0)?;
    let d2 = a.1.sub(b.1)?;
    Ok(h_norm_sq(&d1, &d2).sqrt())
}

fn columns(norms: &NormSet) -> Vec<String> {
    let mut cols = vec![String::from("t")];
    for field in ["v1", "v2", "u1", "u2", "z1", "z2"] {
        if norms.l2 {
            cols.push(format!("{field}_l2"));
        }
        if norms.lp {
            cols.push(format!("{field}_lp"));
        }
        if norms.h1 {
            cols.push(format!("{field}_h1"));
        }
    }
    cols
}

pub(crate) struct Recorder {
    pub(crate) rec: TrajectoryRecord,
    norms: NormSet,
    snapshots: bool,
    p: f64,
}

impl Recorder {
    pub(crate) fn new(cfg: &SolverConfig, p: f64) -> Recorder {
        Recorder {
            rec: TrajectoryRecord {
                columns: columns(&cfg.norms),
                rows: Vec::new(),
                snapshots: Vec::new(),
                lp_exponent: p,
            },
            norms: cfg.norms,
            snapshots: cfg.snapshots,
            p,
        }
    }

    fn spectral_norms(&self, row: &mut Vec<f64>, c: &SpectralField) -> Result<()> {
        if self.norms.l2 {
            row.push(c.l2_norm());
        }
        if self.norms.lp {
            row.push(c.basis().inverse_transform(c)?.lp_norm(self.p)?);
        }
        if self.norms.h1 {
            row.push(c.h1_seminorm());
        }
        Ok(())
    }

    fn grid_norms(&self, row: &mut Vec<f64>, gf: &GridField) -> Result<()> {
        if self.norms.l2 {
            row.push(gf.l2_norm());
        }
        if self.norms.lp {
            row.push(gf.lp_norm(self.p)?);
        }
        if self.norms.h1 {
            row.push(gf.basis().sine_transform(gf)?.h1_seminorm());
        }
        Ok(())
    }

    pub(crate) fn push(&mut self, t: f64, v1: &SpectralField, v2: &GridField, z1: &SpectralField, z2: &GridField) -> Result<()> {
        let mut row = Vec::with_capacity(self.rec.columns.len());
        row.push(t);
        let u1 = v1.add(z1)?;
        let u2 = v2.add(z2)?;
        self.spectral_norms(&mut row, v1)?;
        self.grid_norms(&mut row, v2)?;
        self.spectral_norms(&mut row, &u1)?;
        self.grid_norms(&mut row, &u2)?;
        self.spectral_norms(&mut row, z1)?;
        self.grid_norms(&mut row, z2)?;
        self.rec.rows.push(row);
        if self.snapshots {
            self.rec.snapshots.push(Snapshot {
                t,
                v1: v1.clone(),
                v2: v2.clone(),
                z1: z1.clone(),
                z2: z2.clone(),
            });
        }
        Ok(())
    }
}

fn guard_finite(coeffs: &[f64], values: &[f64], t: f64) -> Result<()> {
    let bad = coeffs.iter().chain(values).any(|x| !x.is_finite() || x.abs() > 1e150);
    if bad {
        Err(Error::BlowUp { t })
    } else {
        Ok(())
    }
}

fn check_cfg(path: &WienerPath, cfg: &SolverConfig) -> Result<i64> {
    let h0 = path.grid().h();
    if !(cfg.h_step > 0.0) {
        return Err(Error::InvalidParam { name: "h_step", value: cfg.h_step, expected: "> 0" });
    }
    let n0 = steps_of(cfg.h_step, h0).map_err(|_| Error::StepMismatch {
        h_step: cfg.h_step,
        h_noise: h0,
    })?;
    if n0 < 1 {
        return Err(Error::StepMismatch { h_step: cfg.h_step, h_noise: h0 });
    }
    if cfg.record_every == 0 {
        return Err(Error::InvalidParam { name: "record_every", value: 0.0, expected: ">= 1" });
    }
    Ok(n0)
}

fn check_window(path: &WienerPath, t0: f64, t1: f64, h: f64) -> Result<i64> {
    let h0 = path.grid().h();
    let j0 = steps_of(t0, h0)?;
    let j1 = steps_of(t1, h0)?;
    if j0 < path.rel_min() || j1 > path.rel_max() || j0 > j1 {
        return Err(Error::OutOfHorizon {
            t: t0,
            t_min: path.rel_min() as f64 * h0,
            t_max: path.rel_max() as f64 * h0,
        });
    }
    steps_of(t1 - t0, h) // number of solver steps must be whole
}

/// Default stationary initialization at the left edge of the noise window: exact diagonal
/// draw when the damping is constant, otherwise a burn-in over the margin left of `t0`
/// (capped at 20 slowest-damping time units).
pub(crate) fn default_init_mode(sigma: &GridField, path: &WienerPath, t0: f64) -> Result<InitMode> {
    let smin = sigma.values.iter().cloned().fold(f64::INFINITY, f64::min);
    let smax = sigma.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if smax - smin < 1e-12 {
        return Ok(InitMode::ExactDiagonal);
    }
    let h0 = path.grid().h();
    let margin = t0 - path.rel_min() as f64 * h0;
    let steps = ((margin.min(20.0 / smin)) / h0).floor();
    if steps < 1.0 {
        return Err(Error::BurnInTooLong { burn_in: h0, span: margin });
    }
    Ok(InitMode::BurnIn(steps * h0))
}

fn default_init(ev: &OuEvolver, path: &WienerPath, t0: f64) -> Result<OuState> {
    ev.init_stationary(default_init_mode(ev.sigma(), path, t0)?)
}

pub(crate) struct Stepper<'a> {
    m: &'a ReactionModel,
    pub(crate) ev: OuEvolver,
    h: f64,
    dec1: Vec<f64>,
    fac1: Vec<f64>,
    dec2: Vec<f64>,
    fac2: Vec<f64>,
    u1g: Vec<f64>,
    u2g: Vec<f64>,
    n1: Vec<f64>,
    n1hat: Vec<f64>,
    n2: Vec<f64>,
    scratch: Vec<f64>,
}

impl<'a> Stepper<'a> {
    pub(crate) fn new(m: &'a ReactionModel, path: &WienerPath, cfg: &SolverConfig) -> Result<Stepper<'a>> {
        if m.basis() != path.basis() {
            return Err(Error::BasisMismatch);
        }
        check_cfg(path, cfg)?;
        let ev = OuEvolver::new(path, &m.sigma)?;
        let basis = path.basis();
        let h = cfg.h_step;
        let (dec1, fac1): (Vec<f64>, Vec<f64>) = match cfg.scheme {
            Scheme::Etd1 => basis
                .lambda()
                .iter()
                .map(|l| {
                    let d = (-l * h).exp();
                    (d, (1.0 - d) / l)
                })
                .unzip(),
            Scheme::SemiImplicitEuler => basis
                .lambda()
                .iter()
                .map(|l| {
                    let inv = 1.0 / (1.0 + l * h);
                    (inv, h * inv)
                })
                .unzip(),
        };
        let (dec2, fac2): (Vec<f64>, Vec<f64>) = match cfg.scheme {
            Scheme::Etd1 => m
                .sigma
                .values
                .iter()
                .map(|s| {
                    let d = (-s * h).exp();
                    (d, (1.0 - d) / s)
                })
                .unzip(),
            Scheme::SemiImplicitEuler => m
                .sigma
                .values
                .iter()
                .map(|s| {
                    let inv = 1.0 / (1.0 + s * h);
                    (inv, h * inv)
                })
                .unzip(),
        };
        let np = basis.point_count();
        let nm = basis.mode_count();
        Ok(Stepper {
            m,
            ev,
            h,
            dec1,
            fac1,
            dec2,
            fac2,
            u1g: vec![0.0; np],
            u2g: vec![0.0; np],
            n1: vec![0.0; np],
            n1hat: vec![0.0; nm],
            n2: vec![0.0; np],
            scratch: Vec::new(),
        })
    }

    /// One solver step of the transformed system; `ou` advances by the same span.
    pub(crate) fn step(&mut self, state: &mut SystemState, ou: &mut OuState) -> Result<()> {
        let basis = self.ev.path().basis().clone();
        // u = v + z on the grid
        for (k, c) in self.n1hat.iter_mut().enumerate() {
            *c = state.v1.coeffs[k] + ou.z1.coeffs[k];
        }
        basis.inverse_into(&self.n1hat, &mut self.u1g, &mut self.scratch);
        for j in 0..self.u2g.len() {
            self.u2g[j] = state.v2.values[j] + ou.z2.values[j];
        }
        self.m.reaction1_into(&self.u1g, &self.u2g, &mut self.n1);
        basis.forward_into(&self.n1, &mut self.n1hat, &mut self.scratch);
        for (k, v) in state.v1.coeffs.iter_mut().enumerate() {
            *v = self.dec1[k] * *v + self.fac1[k] * self.n1hat[k];
        }
        self.m.reaction2_into(&self.u1g, &mut self.n2);
        for (j, v) in state.v2.values.iter_mut().enumerate() {
            *v = self.dec2[j] * *v + self.fac2[j] * self.n2[j];
        }
        self.ev.advance(ou, self.h)?;
        state.t = ou.t();
        guard_finite(&state.v1.coeffs, &state.v2.values, state.t)?;
        Ok(())
    }

    /// Applies the damped-component update `w <- dec * w + fac * n2` with the reaction source
    /// computed by the most recent [`Stepper::step`]. Stepping an auxiliary field this way
    /// reproduces the coupled component's recursion exactly.
    pub(crate) fn relax_grid(&self, w: &mut [f64]) {
        for (j, wj) in w.iter_mut().enumerate() {
            *wj = self.dec2[j] * *wj + self.fac2[j] * self.n2[j];
        }
    }
}

fn trivial_output(
    u0: (&GridField, &GridField),
    path: &WienerPath,
    t0: f64,
    m: &ReactionModel,
    cfg: &SolverConfig,
    ou: OuState,
) -> Result<FlowOutput> {
    let basis = path.basis();
    let u1_spec = basis.sine_transform(u0.0)?;
    let v1 = u1_spec.sub(&ou.z1)?;
    let v2 = u0.1.sub(&ou.z2)?;
    let mut rec = Recorder::new(cfg, m.constants.p);
    rec.push(t0, &v1, &v2, &ou.z1, &ou.z2)?;
    Ok(FlowOutput {
        record: rec.rec,
        state: SystemState { v1, v2, t: t0 },
        ou,
        u1: u0.0.clone(),
        u2: u0.1.clone(),
        u1_spec,
    })
}

/// Integrates the transformed system from `u0` at `t0` to `t1` (relative path times), with
/// the stationary pair initialized at the window edge. The result at `t1` is the cocycle
/// applied to `u0`.
pub fn integrate_pathwise(
    u0: (&GridField, &GridField),
    path: &WienerPath,
    t0: f64,
    t1: f64,
    m: &ReactionModel,
    cfg: &SolverConfig,
) -> Result<FlowOutput> {
    let mut stepper = Stepper::new(m, path, cfg)?;
    let ou0 = default_init(&stepper.ev, path, t0)?;
    integrate_inner(&mut stepper, u0, path, t0, t1, m, cfg, ou0)
}

/// Same as [`integrate_pathwise`] but starting from a precomputed stationary state with
/// `ou0.t() <= t0` (it is advanced to `t0` first). Lets ensembles share one noise sweep.
pub fn integrate_from(
    u0: (&GridField, &GridField),
    path: &WienerPath,
    t0: f64,
    t1: f64,
    m: &ReactionModel,
    cfg: &SolverConfig,
    ou0: &OuState,
) -> Result<FlowOutput> {
    let mut stepper = Stepper::new(m, path, cfg)?;
    integrate_inner(&mut stepper, u0, path, t0, t1, m, cfg, ou0.clone())
}

fn integrate_inner(
    stepper: &mut Stepper<'_>,
    u0: (&GridField, &GridField),
    path: &WienerPath,
    t0: f64,
    t1: f64,
    m: &ReactionModel,
    cfg: &SolverConfig,
    mut ou: OuState,
) -> Result<FlowOutput> {
    let basis = path.basis();
    if u0.0.basis() != basis || u0.1.basis() != basis {
        return Err(Error::BasisMismatch);
    }
    let n_steps = check_window(path, t0, t1, cfg.h_step)?;
    if ou.t() > t0 + 1e-12 {
        return Err(Error::InvalidParam {
            name: "ou0.t",
            value: ou.t(),
            expected: "<= t0",
        });
    }
    let dt = t0 - ou.t();
    stepper.ev.advance(&mut ou, dt)?;
    if n_steps == 0 {
        return trivial_output(u0, path, t0, m, cfg, ou);
    }

    let u1_spec = basis.sine_transform(u0.0)?;
    let v1 = u1_spec.sub(&ou.z1)?;
    let v2 = u0.1.sub(&ou.z2)?;
    let mut state = SystemState { v1, v2, t: t0 };
    let mut rec = Recorder::new(cfg, m.constants.p);
    rec.push(t0, &state.v1, &state.v2, &ou.z1, &ou.z2)?;

    for i in 0..n_steps {
        stepper.step(&mut state, &mut ou)?;
        let last = i + 1 == n_steps;
        if (i + 1) % cfg.record_every as i64 == 0 || last {
            rec.push(state.t, &state.v1, &state.v2, &ou.z1, &ou.z2)?;
        }
    }

    let u1_spec = state.v1.add(&ou.z1)?;
    let u1 = basis.inverse_transform(&u1_spec)?;
    let u2 = state.v2.add(&ou.z2)?;
    Ok(FlowOutput { record: rec.rec, state, ou, u1, u2, u1_spec })
}

/// Direct exponential Euler-Maruyama on the untransformed pair, consuming raw Wiener
/// increments. Deliberately independent of the transformed route; record columns keep the
/// same layout with `v := u` and `z := 0`.
pub fn em_reference(
    u0: (&GridField, &GridField),
    path: &WienerPath,
    t0: f64,
    t1: f64,
    m: &ReactionModel,
    h: f64,
) -> Result<FlowOutput> {
    let basis = path.basis();
    if m.basis() != basis || u0.0.basis() != basis || u0.1.basis() != basis {
        return Err(Error::BasisMismatch);
    }
    // oracle runs only need endpoints; callers read terminal fields, not the record
    let mut cfg = SolverConfig::new(h, Scheme::Etd1);
    cfg.record_every = i64::MAX as usize;
    let n0 = check_cfg(path, &cfg)?;
    let n_steps = check_window(path, t0, t1, h)?;
    let h0 = path.grid().h();
    let j0 = steps_of(t0, h0)?;

    let smin = m.sigma.values.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(smin > 0.0) {
        return Err(Error::DampingNotPositive { min: smin });
    }

    let dec1: Vec<f64> = basis.lambda().iter().map(|l| (-l * h).exp()).collect();
    let dec2: Vec<f64> = m.sigma.values.iter().map(|s| (-s * h).exp()).collect();
    let nm = basis.mode_count();
    let np = basis.point_count();
    let mut u1hat = basis.sine_transform(u0.0)?.coeffs;
    let mut u2 = u0.1.values.clone();
    let mut u1g = vec![0.0; np];
    let mut n1 = vec![0.0; np];
    let mut n1hat = vec![0.0; nm];
    let mut n2 = vec![0.0; np];
    let mut dw1 = vec![0.0; nm];
    let mut dw2 = vec![0.0; nm];
    let mut dw2g = vec![0.0; np];
    let mut scratch = Vec::new();

    let mut rec = Recorder::new(&cfg, m.constants.p);
    let z1 = basis.zero_spectral();
    let z2 = basis.zero_grid();
    let v1f = basis.spectral_from(u1hat.clone())?;
    let v2f = basis.grid_from(u2.clone())?;
    rec.push(t0, &v1f, &v2f, &z1, &z2)?;

    for i in 0..n_steps {
        basis.inverse_into(&u1hat, &mut u1g, &mut scratch);
        m.reaction1_into(&u1g, &u2, &mut n1);
        basis.forward_into(&n1, &mut n1hat, &mut scratch);
        m.reaction2_into(&u1g, &mut n2);
        for k in 0..nm {
            dw1[k] = 0.0;
            dw2[k] = 0.0;
        }
        for s in 0..n0 {
            let j = j0 + i * n0 + s;
            for k in 0..nm {
                dw1[k] += path.increment(Channel::One, k, j)?;
                dw2[k] += path.increment(Channel::Two, k, j)?;
            }
        }
        basis.inverse_into(&dw2, &mut dw2g, &mut scratch);
        for k in 0..nm {
            u1hat[k] = dec1[k] * (u1hat[k] + h * n1hat[k] + dw1[k]);
        }
        for j in 0..np {
            u2[j] = dec2[j] * (u2[j] + h * n2[j] + dw2g[j]);
        }
        let t = (j0 + (i + 1) * n0) as f64 * h0;
        guard_finite(&u1hat, &u2, t)?;
        let last = i + 1 == n_steps;
        if (i + 1) % cfg.record_every as i64 == 0 || last {
            let v1f = basis.spectral_from(u1hat.clone())?;
            let v2f = basis.grid_from(u2.clone())?;
            rec.push(t, &v1f, &v2f, &z1, &z2)?;
        }
    }

    let t_end = (j0 + n_steps * n0) as f64 * h0;
    let u1_spec = basis.spectral_from(u1hat)?;
    let u1 = basis.inverse_transform(&u1_spec)?;
    let u2f = basis.grid_from(u2)?;
    let ou = state_from(z1, z2, path, t_end)?;
    Ok(FlowOutput {
        record: rec.rec,
        state: SystemState { v1: u1_spec.clone(), v2: u2f.clone(), t: t_end },
        ou,
        u1,
        u2: u2f,
        u1_spec,
    })
}

/// Relative splice error of the cocycle identity at `(s, t)`: compares integrating over
/// `[0, s+t]` against stopping at `s`, shifting the path, and continuing for `t`.
/// Exact zero when `s == 0` or `t == 0`.
pub fn cocycle_check(
    u0: (&GridField, &GridField),
    path: &WienerPath,
    s: f64,
    t: f64,
    m: &ReactionModel,
    cfg: &SolverConfig,
) -> Result<f64> {
    let whole = integrate_pathwise(u0, path, 0.0, s + t, m, cfg)?;
    let first = integrate_pathwise(u0, path, 0.0, s, m, cfg)?;
    let shifted = path.shift(s)?;
    let second = integrate_pathwise((&first.u1, &first.u2), &shifted, 0.0, t, m, cfg)?;
    let d = h_dist((&whole.u1, &whole.u2), (&second.u1, &second.u2))?;
    Ok(d / (1.0 + h_norm_sq(&whole.u1, &whole.u2).sqrt()))
}
