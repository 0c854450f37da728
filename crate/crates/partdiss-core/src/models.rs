//! Reaction terms of the coupled system and their growth certificates.
//!
//! A model carries the four nonlinearities of
//!
//! ```text
//! du1 = (d Laplace u1 - h(x, u1) - f(x, u1, u2)) dt + dW1
//! du2 = (-sigma(x) u2 - g(x, u1)) dt + dW2
//! ```
//!
//! together with constants certifying polynomial growth bounds on a box. The bounds are
//! global statements in the theory; numerically they are checked by dense sampling over
//! `|u| <= U` at every grid point, and the report says exactly what box was verified.
//! Constant fitting finds witnesses with a 10% safety margin so that re-validating on fresh
//! samples of the same box passes.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
#[allow(unused_imports)] // f64 inherent methods shadow these under std; no_std needs the trait
use num_traits::Float;

use crate::error::{Error, Result};
use crate::spectral::{Basis, GridField};

/// Growth-bound certificate.
///
/// The named inequalities, with `U = (u1, u2)` ranging over the verified box:
/// - `dissipation_lower * |u|^p - dissipation_offset <= h(x,u) u <= dissipation_upper * |u|^p + dissipation_offset`, `p > 2`
/// - `|f(x,u1,u2)| <= coupling_bound * (1 + |u1|^p1 + |u2|)`, `0 < p1 < p - 1`
/// - `damping_min <= sigma(x) <= damping_max`, `damping_min > 0`
/// - `|d g / d u| <= feedback_lipschitz` and `|d g / d x_i| <= feedback_lipschitz * (1 + |u|)`
/// - `|g(x,u)| <= feedback_affine * (1 + |u|)`
/// - `|h(x,u)| <= reaction_affine * (1 + |u|^{p-1})`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthConstants {
    pub p: f64,
    pub p1: f64,
    pub dissipation_lower: f64,
    pub dissipation_upper: f64,
    pub dissipation_offset: f64,
    pub coupling_bound: f64,
    pub feedback_lipschitz: f64,
    pub feedback_affine: f64,
    pub reaction_affine: f64,
    pub damping_min: f64,
    pub damping_max: f64,
}

type Fn1 = Box<dyn Fn(usize, f64) -> f64 + Send + Sync>;
type Fn2 = Box<dyn Fn(usize, f64, f64) -> f64 + Send + Sync>;

/// Nonlinearities evaluated pointwise on the basis grid (Nemytskii style: the first argument
/// is the flat grid point index).
pub struct ReactionModel {
    pub name: String,
    h: Fn1,
    f: Fn2,
    g: Fn1,
    pub sigma: GridField,
    pub constants: GrowthConstants,
}

impl core::fmt::Debug for ReactionModel {
    fn fmt(&self, fm: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        fm.debug_struct("ReactionModel")
            .field("name", &self.name)
            .field("constants", &self.constants)
            .finish()
    }
}

impl ReactionModel {
    /// Wires arbitrary per-point closures. No growth checks are run here; pair with
    /// [`validate_growth`] (invalid models are constructible on purpose, as negative
    /// controls).
    pub fn custom(
        name: &str,
        sigma: GridField,
        constants: GrowthConstants,
        h: Fn1,
        f: Fn2,
        g: Fn1,
    ) -> ReactionModel {
        ReactionModel { name: String::from(name), h, f, g, sigma, constants }
    }

    /// FitzHugh-Nagumo reaction pair:
    /// `h(x,u) = p(x) u + u (u - 1) (u - alpha1)`, `f = u2`, `sigma = alpha3`,
    /// `g(x,u1) = -alpha2 u1`. Constants are fitted on the `|u| <= 10` box.
    pub fn fhn(p_profile: GridField, alpha1: f64, alpha2: f64, alpha3: f64) -> Result<ReactionModel> {
        if !(alpha3 > 0.0) {
            return Err(Error::InvalidParam {
                name: "alpha3",
                value: alpha3,
                expected: "> 0 (damping must be positive)",
            });
        }
        let basis = p_profile.basis().clone();
        let p_values = p_profile.values.clone();
        let mut m = ReactionModel {
            name: String::from("fhn"),
            h: Box::new(move |j, u| p_values[j] * u + u * (u - 1.0) * (u - alpha1)),
            f: Box::new(|_, _, u2| u2),
            g: Box::new(move |_, u1| -alpha2 * u1),
            sigma: basis.constant_grid(alpha3),
            constants: placeholder(4.0, 1.0),
        };
        m.constants = suggest_constants(&m, FIT_BOX, FIT_SAMPLES)?;
        Ok(m)
    }

    /// Cubic-quintic Allen-Cahn with slow linear feedback:
    /// `h(x,u) = -p1 u - u^3 + u^5`, `f = u2`, `sigma = -eps * p2`, `g = eps * q2 * u1`.
    /// Requires `p2 < 0` and `eps > 0` so the damping is positive.
    pub fn allen_cahn_cq(basis: &Basis, p1: f64, p2: f64, q2: f64, eps: f64) -> Result<ReactionModel> {
        if !(p2 < 0.0) {
            return Err(Error::InvalidParam {
                name: "p2",
                value: p2,
                expected: "< 0 (damping must be positive)",
            });
        }
        if !(eps > 0.0) {
            return Err(Error::InvalidParam { name: "eps", value: eps, expected: "> 0" });
        }
        let mut m = ReactionModel {
            name: String::from("allen_cahn_cq"),
            h: Box::new(move |_, u| -p1 * u - u * u * u + u * u * u * u * u),
            f: Box::new(|_, _, u2| u2),
            g: Box::new(move |_, u1| eps * q2 * u1),
            sigma: basis.constant_grid(-eps * p2),
            constants: placeholder(6.0, 1.0),
        };
        m.constants = suggest_constants(&m, FIT_BOX, FIT_SAMPLES)?;
        Ok(m)
    }

    pub fn basis(&self) -> &Basis {
        self.sigma.basis()
    }

    pub fn h(&self, point: usize, u1: f64) -> f64 {
        (self.h)(point, u1)
    }

    pub fn f(&self, point: usize, u1: f64, u2: f64) -> f64 {
        (self.f)(point, u1, u2)
    }

    pub fn g(&self, point: usize, u1: f64) -> f64 {
        (self.g)(point, u1)
    }

    /// Drift of the diffusive component, `-h(x,u1) - f(x,u1,u2)`, written into `dst`.
    pub fn reaction1_into(&self, u1: &[f64], u2: &[f64], dst: &mut [f64]) {
        for j in 0..dst.len() {
            dst[j] = -(self.h)(j, u1[j]) - (self.f)(j, u1[j], u2[j]);
        }
    }

    /// Drift forcing of the damped component, `-g(x,u1)`, written into `dst`.
    pub fn reaction2_into(&self, u1: &[f64], dst: &mut [f64]) {
        for j in 0..dst.len() {
            dst[j] = -(self.g)(j, u1[j]);
        }
    }
}

const FIT_BOX: f64 = 10.0;
const FIT_SAMPLES: usize = 801;
const MARGIN: f64 = 1.1;

fn placeholder(p: f64, p1: f64) -> GrowthConstants {
    GrowthConstants {
        p,
        p1,
        dissipation_lower: 1.0,
        dissipation_upper: 1.0,
        dissipation_offset: 1.0,
        coupling_bound: 1.0,
        feedback_lipschitz: 1.0,
        feedback_affine: 1.0,
        reaction_affine: 1.0,
        damping_min: 1.0,
        damping_max: 1.0,
    }
}

/// One sampled inequality: `pass` iff the worst signed slack is nonnegative (up to roundoff).
#[derive(Debug, Clone)]
pub struct ConditionCheck {
    pub name: &'static str,
    pub pass: bool,
    /// Smallest slack seen; negative means the inequality failed by that much.
    pub worst_margin: f64,
    /// Grid point and state components realizing the worst slack.
    pub at_point: usize,
    pub at_u1: f64,
    pub at_u2: f64,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub box_radius: f64,
    pub u_samples: usize,
    pub conditions: Vec<ConditionCheck>,
    pub pass: bool,
}

impl ValidationReport {
    pub fn condition(&self, name: &str) -> Option<&ConditionCheck> {
        self.conditions.iter().find(|c| c.name == name)
    }
}

fn linspace(u: f64, n: usize) -> Vec<f64> {
    let n = n.max(3) | 1; // odd, so 0 and the endpoints are included
    (0..n).map(|i| -u + 2.0 * u * i as f64 / (n - 1) as f64).collect()
}

struct Tracker {
    margin: f64,
    point: usize,
    u1: f64,
    u2: f64,
}

impl Tracker {
    fn new() -> Tracker {
        Tracker { margin: f64::INFINITY, point: 0, u1: 0.0, u2: 0.0 }
    }

    fn see(&mut self, margin: f64, point: usize, u1: f64, u2: f64) {
        if margin < self.margin {
            self.margin = margin;
            self.point = point;
            self.u1 = u1;
            self.u2 = u2;
        }
    }

    fn into_check(self, name: &'static str, detail: String) -> ConditionCheck {
        let pass = self.margin >= -1e-9;
        ConditionCheck {
            name,
            pass,
            worst_margin: self.margin,
            at_point: self.point,
            at_u1: self.u1,
            at_u2: self.u2,
            detail,
        }
    }
}

fn finite(v: f64, what: &'static str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidParam { name: what, value: v, expected: "finite on the sample box" })
    }
}

/// Checks every growth inequality of `m.constants` by sampling the box `|u1|, |u2| <= u_box`
/// on the full spatial grid. `u_samples` controls the scalar sample axis (coupling uses a
/// coarser two-axis product). `g_u` is taken by central differences with step `1e-5 * u_box`.
pub fn validate_growth(m: &ReactionModel, u_box: f64, u_samples: usize) -> Result<ValidationReport> {
    if !(u_box > 0.0) {
        return Err(Error::InvalidParam { name: "u_box", value: u_box, expected: "> 0" });
    }
    let c = &m.constants;
    let basis = m.basis();
    let npts = basis.point_count();
    let us = linspace(u_box, u_samples);
    let us2 = linspace(u_box, u_samples.min(41));
    let mut conditions = Vec::new();

    // structural consistency of the certificate itself
    {
        let mut t = Tracker::new();
        t.see(c.p - 2.0, 0, 0.0, 0.0);
        t.see(c.p1, 0, 0.0, 0.0);
        t.see(c.p - 1.0 - c.p1, 0, 0.0, 0.0);
        t.see(c.dissipation_upper - c.dissipation_lower, 0, 0.0, 0.0);
        for (v, _) in [
            (c.dissipation_lower, "lower"),
            (c.dissipation_upper, "upper"),
            (c.dissipation_offset, "offset"),
            (c.coupling_bound, "coupling"),
            (c.feedback_lipschitz, "lipschitz"),
            (c.feedback_affine, "affine"),
            (c.reaction_affine, "reaction"),
        ] {
            t.see(v, 0, 0.0, 0.0);
        }
        conditions.push(t.into_check(
            "constants-structure",
            String::from("p > 2, 0 < p1 < p-1, positive constants, lower <= upper"),
        ));
    }

    // dissipation-growth and reaction-affine share the h sweep
    {
        let mut lo = Tracker::new();
        let mut aff = Tracker::new();
        for j in 0..npts {
            for &u in &us {
                let h = finite(m.h(j, u), "h(x,u)")?;
                let hu = h * u;
                let pw = u.abs().powf(c.p);
                lo.see(hu - (c.dissipation_lower * pw - c.dissipation_offset), j, u, 0.0);
                lo.see((c.dissipation_upper * pw + c.dissipation_offset) - hu, j, u, 0.0);
                aff.see(
                    c.reaction_affine * (1.0 + u.abs().powf(c.p - 1.0)) - h.abs(),
                    j,
                    u,
                    0.0,
                );
            }
        }
        conditions.push(lo.into_check(
            "dissipation-growth",
            format!(
                "{:.4}|u|^{} - {:.4} <= h u <= {:.4}|u|^{} + {:.4}",
                c.dissipation_lower,
                c.p,
                c.dissipation_offset,
                c.dissipation_upper,
                c.p,
                c.dissipation_offset
            ),
        ));
        conditions.push(aff.into_check(
            "reaction-affine",
            format!("|h| <= {:.4} (1 + |u|^{})", c.reaction_affine, c.p - 1.0),
        ));
    }

    // coupling-growth over the (u1, u2) product box
    {
        let mut t = Tracker::new();
        for j in 0..npts {
            for &u1 in &us2 {
                for &u2 in &us2 {
                    let f = finite(m.f(j, u1, u2), "f(x,u1,u2)")?;
                    let bound = c.coupling_bound * (1.0 + u1.abs().powf(c.p1) + u2.abs());
                    t.see(bound - f.abs(), j, u1, u2);
                }
            }
        }
        conditions.push(t.into_check(
            "coupling-growth",
            format!("|f| <= {:.4} (1 + |u1|^{} + |u2|)", c.coupling_bound, c.p1),
        ));
    }

    // damping-range on the grid
    {
        let mut t = Tracker::new();
        for (j, s) in m.sigma.values.iter().enumerate() {
            finite(*s, "sigma(x)")?;
            t.see(s - c.damping_min, j, 0.0, 0.0);
            t.see(c.damping_max - s, j, 0.0, 0.0);
        }
        t.see(c.damping_min, 0, 0.0, 0.0); // > 0 required
        conditions.push(t.into_check(
            "damping-range",
            format!("{:.4} <= sigma(x) <= {:.4}, min > 0", c.damping_min, c.damping_max),
        ));
    }

    // feedback: u-Lipschitz (finite differences), x-growth (grid differences), affine bound
    {
        let fd = 1e-5 * u_box;
        let mut lip = Tracker::new();
        let mut xg = Tracker::new();
        let mut aff = Tracker::new();
        let mg = basis.grid_per_axis();
        let dx = core::f64::consts::PI / (mg + 1) as f64;
        for j in 0..npts {
            for &u in &us {
                let g = finite(m.g(j, u), "g(x,u)")?;
                let gu = (m.g(j, u + fd) - m.g(j, u - fd)) / (2.0 * fd);
                lip.see(c.feedback_lipschitz - gu.abs(), j, u, 0.0);
                aff.see(c.feedback_affine * (1.0 + u.abs()) - g.abs(), j, u, 0.0);
                // interior central differences along each axis
                for axis in 0..basis.dim() {
                    let stride = if axis == 0 { basis.point_count() / mg } else { 1 };
                    let a = if axis == 0 { j / stride } else { j % mg };
                    if a == 0 || a + 1 >= mg {
                        continue;
                    }
                    let gx = (m.g(j + stride, u) - m.g(j - stride, u)) / (2.0 * dx);
                    xg.see(c.feedback_lipschitz * (1.0 + u.abs()) - gx.abs(), j, u, 0.0);
                }
            }
        }
        conditions.push(lip.into_check(
            "feedback-lipschitz",
            format!("|dg/du| <= {:.4}", c.feedback_lipschitz),
        ));
        conditions.push(xg.into_check(
            "feedback-x-growth",
            format!("|dg/dx_i| <= {:.4} (1 + |u|)", c.feedback_lipschitz),
        ));
        conditions.push(aff.into_check(
            "feedback-affine",
            format!("|g| <= {:.4} (1 + |u|)", c.feedback_affine),
        ));
    }

    let pass = conditions.iter().all(|c| c.pass);
    Ok(ValidationReport { box_radius: u_box, u_samples: us.len(), conditions, pass })
}

/// Fits the smallest certificate consistent with samples on the box, padded by 10%.
/// The dissipation exponent pair `(p, p1)` is taken from the model as structural data; the
/// lower dissipation ratio is read off the outer shell `|u| in [0.75 U, U]`, and its
/// nonpositivity there is reported as infeasible (no positive lower constant can exist).
pub fn suggest_constants(m: &ReactionModel, u_box: f64, u_samples: usize) -> Result<GrowthConstants> {
    if !(u_box > 0.0) {
        return Err(Error::InvalidParam { name: "u_box", value: u_box, expected: "> 0" });
    }
    let p = m.constants.p;
    let p1 = m.constants.p1;
    let basis = m.basis();
    let npts = basis.point_count();
    let us = linspace(u_box, u_samples);
    let us2 = linspace(u_box, u_samples.min(41));

    let mut shell_min = f64::INFINITY;
    let mut shell_max = f64::NEG_INFINITY;
    let mut shell_at = (0usize, 0.0f64);
    for j in 0..npts {
        for &u in &us {
            if u.abs() < 0.75 * u_box {
                continue;
            }
            let r = finite(m.h(j, u), "h(x,u)")? * u / u.abs().powf(p);
            if r < shell_min {
                shell_min = r;
                shell_at = (j, u);
            }
            shell_max = shell_max.max(r);
        }
    }
    if !(shell_min > 0.0) {
        return Err(Error::Infeasible {
            condition: "dissipation-growth",
            detail: format!(
                "h(x,u) u / |u|^{} = {:.4} at u = {:.4} on the outer shell; no positive lower \
                 constant exists",
                p, shell_min, shell_at.1
            ),
        });
    }
    let lower = shell_min / MARGIN;
    let upper = shell_max * MARGIN;

    let mut offset_need: f64 = 0.0;
    let mut reaction: f64 = 0.0;
    for j in 0..npts {
        for &u in &us {
            let h = m.h(j, u);
            let hu = h * u;
            let pw = u.abs().powf(p);
            offset_need = offset_need.max(lower * pw - hu).max(hu - upper * pw);
            reaction = reaction.max(h.abs() / (1.0 + u.abs().powf(p - 1.0)));
        }
    }
    let offset = offset_need.max(0.0) * MARGIN + 1e-9;

    let mut coupling: f64 = 0.0;
    for j in 0..npts {
        for &u1 in &us2 {
            for &u2 in &us2 {
                let f = finite(m.f(j, u1, u2), "f(x,u1,u2)")?;
                coupling = coupling.max(f.abs() / (1.0 + u1.abs().powf(p1) + u2.abs()));
            }
        }
    }

    let fd = 1e-5 * u_box;
    let mg = basis.grid_per_axis();
    let dx = core::f64::consts::PI / (mg + 1) as f64;
    let mut lip: f64 = 0.0;
    let mut affine: f64 = 0.0;
    for j in 0..npts {
        for &u in &us {
            let g = finite(m.g(j, u), "g(x,u)")?;
            let gu = (m.g(j, u + fd) - m.g(j, u - fd)) / (2.0 * fd);
            lip = lip.max(gu.abs());
            affine = affine.max(g.abs() / (1.0 + u.abs()));
            for axis in 0..basis.dim() {
                let stride = if axis == 0 { basis.point_count() / mg } else { 1 };
                let a = if axis == 0 { j / stride } else { j % mg };
                if a == 0 || a + 1 >= mg {
                    continue;
                }
                let gx = (m.g(j + stride, u) - m.g(j - stride, u)) / (2.0 * dx);
                lip = lip.max(gx.abs() / (1.0 + u.abs()));
            }
        }
    }

    let smin = m.sigma.values.iter().cloned().fold(f64::INFINITY, f64::min);
    let smax = m.sigma.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);

    Ok(GrowthConstants {
        p,
        p1,
        dissipation_lower: lower,
        dissipation_upper: upper,
        dissipation_offset: offset,
        coupling_bound: coupling * MARGIN + 1e-9,
        feedback_lipschitz: lip * MARGIN + 1e-9,
        feedback_affine: affine * MARGIN + 1e-9,
        reaction_affine: reaction * MARGIN + 1e-9,
        damping_min: smin,
        damping_max: smax,
    })
}
