//! One runner per experiment kind. Every runner is deterministic: ensemble jobs are
//! indexed, run on a pool of any size, and merged back in index order, so the output
//! bytes depend on the config alone.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde_json::json;

use partdiss_core::attractor::{
    absorbing_radius, pullback_run, sphere_states, splitting_run, SampleProfile,
};
use partdiss_core::integrate::{h_norm_sq, integrate_pathwise};
use partdiss_core::models::validate_growth;
use partdiss_core::noise::{Channel, NoiseGrid, Verdict, WienerPath};
use partdiss_core::ou::{temperedness_diagnostic, z_norm_series, InitMode, TemperednessReport};
use partdiss_core::spectral::GridField;

use crate::config::{ExperimentConfig, ProfileName, Resolved, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::{csv_bytes, csv_numeric, snapshot_bytes, Cell};

pub struct RunOutput {
    pub files: Vec<(String, Vec<u8>)>,
    pub summary: serde_json::Value,
    /// Names of failed validator conditions; non-empty means exit code 2 after writing.
    pub failures: Vec<String>,
}

/// Index-ordered parallel map. Workers pull the next job off a shared counter; results
/// land in their job's slot, so the merged order never depends on scheduling.
pub fn par_map<T, R, F>(items: Vec<T>, threads: usize, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(usize, T) -> R + Sync,
{
    let n = items.len();
    if n == 0 {
        return Vec::new();
    }
    let threads = threads.clamp(1, n);
    let jobs: Vec<Mutex<Option<T>>> = items.into_iter().map(|t| Mutex::new(Some(t))).collect();
    let slots: Vec<Mutex<Option<R>>> = (0..n).map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|s| {
        for _ in 0..threads {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= n {
                    break;
                }
                let item = jobs[i].lock().expect("job mutex").take().expect("job taken once");
                let r = f(i, item);
                *slots[i].lock().expect("slot mutex") = Some(r);
            });
        }
    });
    slots
        .into_iter()
        .map(|m| m.into_inner().expect("slot mutex").expect("worker filled slot"))
        .collect()
}

fn profile_of(p: ProfileName) -> SampleProfile {
    match p {
        ProfileName::SmoothDecay => SampleProfile::SmoothDecay,
        ProfileName::FirstMode => SampleProfile::FirstMode,
    }
}

/// Stationary-pair initialization matching the solver's convention: exact sampling for
/// constant damping, otherwise a burn-in capped by the window margin and 20 relaxation
/// times of the slowest point.
fn init_mode_for(path: &WienerPath, sigma: &GridField, t0: f64) -> CliResult<InitMode> {
    let lo = sigma.values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = sigma.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if hi - lo < 1e-12 {
        return Ok(InitMode::ExactDiagonal);
    }
    let h0 = path.grid().h();
    let margin = t0 - path.grid().t_min();
    let burn = margin.min(20.0 / lo);
    let steps = (burn / h0).floor();
    if steps < 1.0 {
        return Err(CliError::config(format!(
            "window leaves no room to equilibrate the damped component before t = {t0} \
             (margin {margin}, step {h0})"
        )));
    }
    Ok(InitMode::BurnIn(steps * h0))
}

pub fn run_simulate(cfg: &RunConfig, r: &Resolved) -> CliResult<RunOutput> {
    let ExperimentConfig::Simulate { t0, t1, u1_0, u2_0 } = &cfg.experiment else {
        unreachable!("dispatch checked the kind");
    };
    let u1 = u1_0.build(&r.basis)?;
    let u2 = u2_0.build(&r.basis)?;
    let out = integrate_pathwise((&u1, &u2), &r.path, *t0, *t1, &r.model, &r.solver)?;
    let mut files =
        vec![(String::from("trajectory.csv"), csv_numeric(&out.record.columns, &out.record.rows))];
    let mut summary = json!({
        "t0": t0,
        "t1": t1,
        "rows": out.record.rows.len(),
        "lp_exponent": out.record.lp_exponent,
        "final_norm_sq": h_norm_sq(&out.u1, &out.u2),
    });
    if r.solver.snapshots {
        let (bytes, layout) = snapshot_bytes(&out.record.snapshots);
        files.push((String::from("snapshots.bin"), bytes));
        summary["snapshot_layout"] = layout;
    }
    Ok(RunOutput { files, summary, failures: Vec::new() })
}

pub fn run_pullback(cfg: &RunConfig, r: &Resolved) -> CliResult<RunOutput> {
    let ExperimentConfig::Pullback { times, radius, samples, sample_seed, profile } =
        &cfg.experiment
    else {
        unreachable!("dispatch checked the kind");
    };
    let states = sphere_states(&r.basis, *radius, *samples, *sample_seed, profile_of(*profile))?;
    let pb = pullback_run(&r.model, &r.path, &states, times, &r.solver)?;

    let mut rows = Vec::new();
    for rung in &pb.rungs {
        let m = rung.endpoint_norms.len();
        for i in 0..m {
            for j in (i + 1)..m {
                rows.push(vec![
                    Cell::Num(rung.t),
                    Cell::Int(i as i64),
                    Cell::Int(j as i64),
                    Cell::Num(rung.distances[i][j]),
                    Cell::Num(rung.endpoint_norms[i]),
                ]);
            }
        }
    }
    let table = csv_bytes(&["t_pullback", "i", "j", "distance_H", "norm_i_H"], &rows);
    let diam: Vec<serde_json::Value> =
        pb.rungs.iter().map(|rg| json!([rg.t, rg.diam])).collect();
    let summary = json!({
        "radius": radius,
        "samples": samples,
        "diam": diam,
        "deepest_endpoint_norms": pb.rungs.last().map(|rg| rg.endpoint_norms.clone()),
    });
    Ok(RunOutput {
        files: vec![(String::from("pullback.csv"), table)],
        summary,
        failures: Vec::new(),
    })
}

pub fn run_absorb(cfg: &RunConfig, r: &Resolved) -> CliResult<RunOutput> {
    let ExperimentConfig::Absorb { ladder, samples, sample_seed, profile, t_max, check_doubling } =
        &cfg.experiment
    else {
        unreachable!("dispatch checked the kind");
    };
    let mut horizons = vec![*t_max];
    if *check_doubling {
        horizons.push(2.0 * t_max);
    }
    let mut rows = Vec::new();
    let mut blocks = Vec::new();
    for &tm in &horizons {
        let out = absorbing_radius(
            &r.model,
            &r.path,
            ladder,
            *samples,
            *sample_seed,
            profile_of(*profile),
            tm,
            &r.solver,
        )?;
        for p in &out.profile {
            rows.push(vec![Cell::Num(p.radius), Cell::Num(tm), Cell::Num(p.max_norm_sq)]);
        }
        blocks.push(json!({
            "t_max": tm,
            "rho_hat": out.rho_hat,
            "spread": out.spread,
            "consistent": out.consistent,
        }));
    }
    let doubling_change = if blocks.len() == 2 {
        let a = blocks[0]["rho_hat"].as_f64().unwrap_or(0.0);
        let b = blocks[1]["rho_hat"].as_f64().unwrap_or(0.0);
        if a > 0.0 {
            Some((b - a).abs() / a)
        } else {
            None
        }
    } else {
        None
    };
    let table = csv_bytes(&["R", "t_max", "max_norm_sq"], &rows);
    let summary = json!({ "blocks": blocks, "doubling_change": doubling_change });
    Ok(RunOutput {
        files: vec![(String::from("absorption.csv"), table)],
        summary,
        failures: Vec::new(),
    })
}

pub fn run_splitting(cfg: &RunConfig, r: &Resolved) -> CliResult<RunOutput> {
    let ExperimentConfig::Splitting { t0, t1, u1_0, u2_0 } = &cfg.experiment else {
        unreachable!("dispatch checked the kind");
    };
    let u1 = u1_0.build(&r.basis)?;
    let u2 = u2_0.build(&r.basis)?;
    let sp = splitting_run((&u1, &u2), &r.path, *t0, *t1, &r.model, &r.solver)?;

    let mut rows = Vec::with_capacity(sp.points.len());
    for p in &sp.points {
        let h1 = r.basis.sine_transform(&p.split.v2_1)?.h1_seminorm();
        rows.push(vec![
            Cell::Num(p.t),
            Cell::Num(p.norm_v2_2),
            Cell::Num(p.bound),
            Cell::Num(h1),
        ]);
    }
    let table = csv_bytes(&["t", "norm_v2_2", "bound", "norm_v2_1_h1"], &rows);
    let mut files = vec![
        (String::from("splitting.csv"), table),
        (String::from("trajectory.csv"), csv_numeric(&sp.record.columns, &sp.record.rows)),
    ];
    let mut summary = json!({
        "max_residual": sp.max_residual,
        "bound_ok": sp.bound_ok,
        "points": sp.points.len(),
    });
    if r.solver.snapshots {
        let (bytes, layout) = snapshot_bytes(&sp.record.snapshots);
        files.push((String::from("snapshots.bin"), bytes));
        summary["snapshot_layout"] = layout;
    }
    Ok(RunOutput { files, summary, failures: Vec::new() })
}

const OU_FUNCTIONALS: [&str; 3] = ["z1_l4_pow4", "z2_l2_sq", "z1_grad_sq"];

pub fn run_ou_stats(cfg: &RunConfig, r: &Resolved, threads: usize) -> CliResult<RunOutput> {
    let ExperimentConfig::OuStats { t_end, sample_dt, seed_count, threshold } = &cfg.experiment
    else {
        unreachable!("dispatch checked the kind");
    };
    if *seed_count == 0 {
        return Err(CliError::config("seed_count must be at least 1"));
    }
    let seeds: Vec<u64> = (0..*seed_count).map(|i| cfg.noise.seed.wrapping_add(i as u64)).collect();
    let mode = init_mode_for(&r.path, &r.model.sigma, 0.0)?;

    let results: Vec<CliResult<[TemperednessReport; 3]>> = par_map(seeds.clone(), threads, |_, seed| {
        let grid = NoiseGrid::new(cfg.noise.h_noise, cfg.noise.t_min, cfg.noise.t_max, seed)?;
        let path = WienerPath::new(
            &r.basis,
            grid,
            cfg.noise.cov1.build(Channel::One),
            cfg.noise.cov2.build(Channel::Two),
        )?;
        let series = z_norm_series(&path, &r.model.sigma, *t_end, *sample_dt, mode)?;
        let rep = |vals: &[f64]| temperedness_diagnostic(&series.times, vals, *t_end, *threshold);
        Ok([rep(&series.z1_l4_pow4)?, rep(&series.z2_l2_sq)?, rep(&series.z1_grad_sq)?])
    });

    let mut rows = Vec::new();
    let mut consistent = [0usize; 3];
    for (seed, res) in seeds.iter().zip(results) {
        let reports = res?;
        for (fi, rep) in reports.iter().enumerate() {
            if rep.consistent {
                consistent[fi] += 1;
            }
            rows.push(vec![
                Cell::Int(*seed as i64),
                Cell::Text(OU_FUNCTIONALS[fi].to_string()),
                Cell::Num(rep.ladder[0].1),
                Cell::Num(rep.ladder[1].1),
                Cell::Num(rep.ladder[2].1),
                Cell::Num(rep.ladder[3].1),
                Cell::Int(rep.monotone as i64),
                Cell::Int(rep.consistent as i64),
                Cell::Num(rep.sup_window_mean),
            ]);
        }
    }
    let table = csv_bytes(
        &[
            "seed",
            "functional",
            "g_eighth",
            "g_quarter",
            "g_half",
            "g_final",
            "monotone",
            "consistent",
            "sup_window_mean",
        ],
        &rows,
    );
    let summary = json!({
        "horizon": t_end,
        "threshold": threshold,
        "seed_count": seed_count,
        "consistent_counts": {
            OU_FUNCTIONALS[0]: consistent[0],
            OU_FUNCTIONALS[1]: consistent[1],
            OU_FUNCTIONALS[2]: consistent[2],
        },
    });
    Ok(RunOutput {
        files: vec![(String::from("ou_stats.csv"), table)],
        summary,
        failures: Vec::new(),
    })
}

fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "PASS",
        Verdict::Fail => "FAIL",
        Verdict::Inconclusive => "INCONCLUSIVE",
    }
}

pub fn run_validate(cfg: &RunConfig, r: &Resolved) -> CliResult<RunOutput> {
    let ExperimentConfig::Validate { u_box, u_samples, tail_modes } = &cfg.experiment else {
        unreachable!("dispatch checked the kind");
    };
    let nrep = partdiss_core::noise::validate(
        &r.basis,
        r.path.covariance(Channel::One),
        r.path.covariance(Channel::Two),
        cfg.noise.alpha,
        *tail_modes,
    )?;
    let mrep = validate_growth(&r.model, *u_box, *u_samples)?;

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for check in [&nrep.channel2_trace, &nrep.channel1_weighted] {
        if check.verdict == Verdict::Fail {
            failures.push(check.label.to_string());
        }
        let detail = match (&check.note, check.analytic_exponent) {
            (Some(n), _) => n.clone(),
            (None, Some(e)) => format!("term decay exponent {e}, threshold {}", check.threshold),
            (None, None) => String::new(),
        };
        rows.push(vec![
            Cell::Text(String::from("noise")),
            Cell::Text(check.label.to_string()),
            Cell::Text(verdict_str(check.verdict).to_string()),
            Cell::Num(check.partial_sum),
            Cell::Text(detail),
        ]);
    }
    for c in &mrep.conditions {
        if !c.pass {
            failures.push(c.name.to_string());
        }
        rows.push(vec![
            Cell::Text(String::from("model")),
            Cell::Text(c.name.to_string()),
            Cell::Text(if c.pass { "PASS" } else { "FAIL" }.to_string()),
            Cell::Num(c.worst_margin),
            Cell::Text(c.detail.clone()),
        ]);
    }
    let table = csv_bytes(&["section", "condition", "verdict", "value", "detail"], &rows);
    let summary = json!({
        "model": r.model.name.clone(),
        "box_radius": mrep.box_radius,
        "noise_verdict": verdict_str(nrep.verdict),
        "model_pass": mrep.pass,
        "failures": failures,
    });
    Ok(RunOutput {
        files: vec![(String::from("validation.csv"), table)],
        summary,
        failures,
    })
}
