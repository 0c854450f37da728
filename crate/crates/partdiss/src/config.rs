//! Versioned JSON experiment configuration and its resolution into solver objects.
//!
//! The schema is strict: unknown fields are rejected so a typo cannot silently fall back
//! to a default. Everything wrong at this layer exits with the config code.

use serde::{Deserialize, Serialize};

use partdiss_core::integrate::{NormSet, Scheme, SolverConfig};
use partdiss_core::models::{GrowthConstants, ReactionModel};
use partdiss_core::noise::{Channel, CovarianceSpec, NoiseGrid, WienerPath};
use partdiss_core::spectral::{Basis, GridField};

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: u32,
    pub basis: BasisConfig,
    pub noise: NoiseConfig,
    pub model: ModelConfig,
    pub solver: SolverSection,
    pub experiment: ExperimentConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisConfig {
    pub dim: usize,
    pub modes: usize,
    pub grid: usize,
    pub diffusion: f64,
    #[serde(default = "default_padding")]
    pub padding: f64,
}

fn default_padding() -> f64 {
    3.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    pub h_noise: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub seed: u64,
    pub alpha: f64,
    pub cov1: CovConfig,
    pub cov2: CovConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CovConfig {
    /// Per-mode intensity `lambda_k^{-gamma}`.
    InversePower { gamma: f64 },
    /// Constant intensity `scale` on every mode (`scale = 0` switches the channel off).
    ScaledIdentity { scale: f64 },
    /// One intensity per retained mode, lambda-ascending order.
    Explicit { intensities: Vec<f64> },
}

impl CovConfig {
    pub fn build(&self, channel: Channel) -> CovarianceSpec {
        match self {
            CovConfig::InversePower { gamma } => CovarianceSpec::inverse_power(channel, *gamma),
            CovConfig::ScaledIdentity { scale } => CovarianceSpec::scaled_identity(channel, *scale),
            CovConfig::Explicit { intensities } => {
                CovarianceSpec::explicit(channel, intensities.clone())
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    Fhn {
        alpha1: f64,
        alpha2: f64,
        alpha3: f64,
        #[serde(default = "default_p_const")]
        p_const: f64,
    },
    AllenCahnCq {
        p1: f64,
        p2: f64,
        q2: f64,
        eps: f64,
    },
    /// A model from the built-in registry, by id. The registry carries deliberately
    /// broken entries used as negative controls for the validators.
    Registered { id: String },
}

fn default_p_const() -> f64 {
    1.0
}

impl ModelConfig {
    pub fn build(&self, basis: &Basis) -> CliResult<ReactionModel> {
        match self {
            ModelConfig::Fhn { alpha1, alpha2, alpha3, p_const } => {
                let p = basis.constant_grid(*p_const);
                Ok(ReactionModel::fhn(p, *alpha1, *alpha2, *alpha3)?)
            }
            ModelConfig::AllenCahnCq { p1, p2, q2, eps } => {
                Ok(ReactionModel::allen_cahn_cq(basis, *p1, *p2, *q2, *eps)?)
            }
            ModelConfig::Registered { id } => registered_model(id, basis)
                .ok_or_else(|| CliError::config(format!("unknown registered model id '{id}'"))),
        }
    }
}

fn control_claims(p: f64, sigma_window: (f64, f64)) -> GrowthConstants {
    GrowthConstants {
        p,
        p1: 1.0,
        dissipation_lower: 0.5,
        dissipation_upper: 2.0,
        dissipation_offset: 1.0,
        coupling_bound: 1.0,
        feedback_lipschitz: 1.0,
        feedback_affine: 1.0,
        reaction_affine: 2.0,
        damping_min: sigma_window.0,
        damping_max: sigma_window.1,
    }
}

/// Built-in registry. The three entries each claim a growth certificate their reaction
/// terms cannot honor, so the validator must fail them on one specific condition:
/// `linear_reaction` on dissipation-growth (a linear term cannot produce quartic
/// dissipation), `undamped_coupling` on damping-range (sigma vanishes), and
/// `inverted_quintic` on dissipation-growth (the quintic pushes energy outward).
pub fn registered_model(id: &str, basis: &Basis) -> Option<ReactionModel> {
    match id {
        "linear_reaction" => Some(ReactionModel::custom(
            "linear_reaction",
            basis.constant_grid(1.0),
            control_claims(4.0, (0.5, 1.5)),
            Box::new(|_, u| u),
            Box::new(|_, _, _| 0.0),
            Box::new(|_, _| 0.0),
        )),
        "undamped_coupling" => Some(ReactionModel::custom(
            "undamped_coupling",
            basis.constant_grid(0.0),
            control_claims(4.0, (0.5, 1.5)),
            Box::new(|_, u| u * u * u - u),
            Box::new(|_, _, _| 0.0),
            Box::new(|_, _| 0.0),
        )),
        "inverted_quintic" => Some(ReactionModel::custom(
            "inverted_quintic",
            basis.constant_grid(1.0),
            control_claims(6.0, (0.5, 1.5)),
            Box::new(|_, u| -u * u * u * u * u),
            Box::new(|_, _, _| 0.0),
            Box::new(|_, _| 0.0),
        )),
        _ => None,
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeName {
    Etd1,
    SemiImplicitEuler,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum NormName {
    L2,
    Lp,
    H1,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub h_step: f64,
    pub scheme: SchemeName,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    #[serde(default = "default_norms")]
    pub norms: Vec<NormName>,
}

fn default_record_every() -> usize {
    1
}

fn default_norms() -> Vec<NormName> {
    vec![NormName::L2, NormName::Lp, NormName::H1]
}

impl SolverSection {
    pub fn build(&self, snapshots: bool) -> SolverConfig {
        let mut cfg = SolverConfig::new(
            self.h_step,
            match self.scheme {
                SchemeName::Etd1 => Scheme::Etd1,
                SchemeName::SemiImplicitEuler => Scheme::SemiImplicitEuler,
            },
        );
        cfg.record_every = self.record_every.max(1);
        cfg.norms = NormSet {
            l2: self.norms.contains(&NormName::L2),
            lp: self.norms.contains(&NormName::Lp),
            h1: self.norms.contains(&NormName::H1),
        };
        cfg.snapshots = snapshots;
        cfg
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitFieldConfig {
    Constant { value: f64 },
    /// Leading sine coefficients; unlisted modes are zero.
    Modes { coeffs: Vec<f64> },
}

impl InitFieldConfig {
    pub fn build(&self, basis: &Basis) -> CliResult<GridField> {
        match self {
            InitFieldConfig::Constant { value } => Ok(basis.constant_grid(*value)),
            InitFieldConfig::Modes { coeffs } => {
                if coeffs.len() > basis.mode_count() {
                    return Err(CliError::config(format!(
                        "initial field lists {} coefficients, basis has {} modes",
                        coeffs.len(),
                        basis.mode_count()
                    )));
                }
                let mut full = vec![0.0; basis.mode_count()];
                full[..coeffs.len()].copy_from_slice(coeffs);
                Ok(basis.inverse_transform(&basis.spectral_from(full)?)?)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileName {
    SmoothDecay,
    FirstMode,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ExperimentConfig {
    Simulate {
        t0: f64,
        t1: f64,
        u1_0: InitFieldConfig,
        u2_0: InitFieldConfig,
    },
    Pullback {
        /// Pullback horizons, strictly increasing.
        times: Vec<f64>,
        radius: f64,
        samples: usize,
        sample_seed: u64,
        profile: ProfileName,
    },
    Absorb {
        ladder: Vec<f64>,
        samples: usize,
        sample_seed: u64,
        profile: ProfileName,
        t_max: f64,
        /// Re-run at 2 t_max and report the change of the radius estimate.
        #[serde(default)]
        check_doubling: bool,
    },
    Splitting {
        t0: f64,
        t1: f64,
        u1_0: InitFieldConfig,
        u2_0: InitFieldConfig,
    },
    OuStats {
        t_end: f64,
        sample_dt: f64,
        /// Ensemble size; job `i` uses `noise.seed + i`.
        seed_count: usize,
        /// Growth-exponent threshold for the consistency verdict.
        threshold: f64,
    },
    Validate {
        u_box: f64,
        u_samples: usize,
        tail_modes: usize,
    },
}

impl ExperimentConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            ExperimentConfig::Simulate { .. } => "simulate",
            ExperimentConfig::Pullback { .. } => "pullback",
            ExperimentConfig::Absorb { .. } => "absorb",
            ExperimentConfig::Splitting { .. } => "splitting",
            ExperimentConfig::OuStats { .. } => "ou-stats",
            ExperimentConfig::Validate { .. } => "validate",
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub directory: Option<String>,
    #[serde(default)]
    pub snapshots: bool,
}

/// Config resolved into live solver objects.
pub struct Resolved {
    pub basis: Basis,
    pub path: WienerPath,
    pub model: ReactionModel,
    pub solver: SolverConfig,
}

impl RunConfig {
    pub fn from_json(bytes: &[u8]) -> CliResult<RunConfig> {
        let cfg: RunConfig = serde_json::from_slice(bytes)
            .map_err(|e| CliError::config(format!("config parse: {e}")))?;
        if cfg.schema != SCHEMA_VERSION {
            return Err(CliError::config(format!(
                "config schema {} unsupported (this build reads schema {SCHEMA_VERSION})",
                cfg.schema
            )));
        }
        Ok(cfg)
    }

    pub fn resolve(&self) -> CliResult<Resolved> {
        let b = &self.basis;
        let basis = Basis::new(b.dim, b.modes, b.grid, b.diffusion, b.padding)?;
        let grid = NoiseGrid::new(self.noise.h_noise, self.noise.t_min, self.noise.t_max, self.noise.seed)?;
        let cov1 = self.noise.cov1.build(Channel::One);
        let cov2 = self.noise.cov2.build(Channel::Two);
        // surfaces explicit-list length mismatches before any file is written
        cov1.intensities(&basis)?;
        cov2.intensities(&basis)?;
        let path = WienerPath::new(&basis, grid, cov1, cov2)?;
        let model = self.model.build(&basis)?;
        let solver = self.solver.build(self.output.snapshots);
        if partdiss_core::noise::steps_of(solver.h_step, self.noise.h_noise).is_err() {
            return Err(CliError::config(format!(
                "solver h_step {} is not a multiple of h_noise {}",
                solver.h_step, self.noise.h_noise
            )));
        }
        Ok(Resolved { basis, path, model, solver })
    }
}
