//! JSON run and sweep configurations with exhaustive validation: every
//! problem found is reported, each as one machine-parsable line.

use std::path::PathBuf;

use serde::Deserialize;

use nlcl::harness::{LimitPath, StudySpec, TargetField, DEFAULT_H_LIST};
use nlcl::initial::InitialData;
use nlcl::kernels::Kernel;
use nlcl::quadrature::{QuadratureWeights, WeightFamily, DEFAULT_TAIL_TOL};
use nlcl::scheme::{CflVariant, GridSpec, SchemeConfig, VelocityFamily, VelocityModel};

/// One validation failure: a stable code plus a human-readable detail.
#[derive(Debug)]
pub struct Problem {
    pub code: String,
    pub detail: String,
}

impl Problem {
    fn new(code: impl Into<String>, detail: impl Into<String>) -> Self {
        Problem {
            code: code.into(),
            detail: detail.into(),
        }
    }

    fn missing(field: &str) -> Self {
        Problem {
            code: format!("missing-field:{field}"),
            detail: format!("config section `{field}` is required"),
        }
    }

    fn from_error(err: nlcl::Error) -> Self {
        Problem {
            code: err.code().to_string(),
            detail: err.to_string(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub x_min: f64,
    pub x_max: f64,
    pub h: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSection {
    pub family: String,
    #[serde(default)]
    pub csv_path: Option<PathBuf>,
}

impl KernelSection {
    pub fn build(&self) -> Result<Kernel<f64>, Problem> {
        match self.family.as_str() {
            "exponential" => Ok(Kernel::exponential()),
            "linear" => Ok(Kernel::linear()),
            "constant" => Ok(Kernel::constant()),
            "custom-table" => {
                let path = self.csv_path.as_ref().ok_or_else(|| {
                    Problem::missing("kernel.csv_path")
                })?;
                let text = std::fs::read_to_string(path).map_err(|e| {
                    Problem::new("kernel-table", format!("cannot read {}: {e}", path.display()))
                })?;
                Kernel::custom_from_csv(&text).map_err(Problem::from_error)
            }
            other => Err(Problem::new(
                "out-of-range:kernel.family",
                format!("unknown kernel family `{other}`"),
            )),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsSection {
    pub family: WeightFamily,
    #[serde(default)]
    pub tail_tol: Option<f64>,
    #[serde(default)]
    pub gamma0: Option<f64>,
}

impl WeightsSection {
    pub fn tail_tol(&self) -> f64 {
        self.tail_tol.unwrap_or(DEFAULT_TAIL_TOL)
    }

    pub fn build(
        &self,
        kernel: &Kernel<f64>,
        epsilon: f64,
        h: f64,
    ) -> Result<QuadratureWeights<f64>, Problem> {
        let tol = self.tail_tol();
        match self.family {
            WeightFamily::Exact => {
                QuadratureWeights::exact(kernel, epsilon, h, tol).map_err(Problem::from_error)
            }
            WeightFamily::Riemann => {
                QuadratureWeights::riemann(kernel, epsilon, h, tol).map_err(Problem::from_error)
            }
            WeightFamily::NormalizedRiemann => {
                QuadratureWeights::normalized_riemann(kernel, epsilon, h, tol)
                    .map_err(Problem::from_error)
            }
            WeightFamily::Geometric => {
                let gamma0 = self.gamma0.ok_or_else(|| Problem::missing("weights.gamma0"))?;
                QuadratureWeights::geometric_scaled(gamma0, epsilon, h, tol)
                    .map_err(Problem::from_error)
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VelocitySection {
    pub family: VelocityFamily,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsSection {
    #[serde(default = "default_true")]
    pub enabled: bool,
    #[serde(default = "default_entropy_c")]
    pub entropy_c: f64,
}

fn default_true() -> bool {
    true
}

fn default_entropy_c() -> f64 {
    0.5
}

impl Default for DiagnosticsSection {
    fn default() -> Self {
        DiagnosticsSection {
            enabled: true,
            entropy_c: 0.5,
        }
    }
}

/// Single-run configuration file. Unknown keys are rejected by serde.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfigFile {
    pub grid: Option<GridSection>,
    pub kernel: Option<KernelSection>,
    pub weights: Option<WeightsSection>,
    pub velocity: Option<VelocitySection>,
    pub lambda: Option<f64>,
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub cfl_variant: Option<CflVariant>,
    pub initial_data: Option<InitialData<f64>>,
    #[serde(rename = "T")]
    pub t_final: Option<f64>,
    #[serde(default)]
    pub snapshots: Option<Vec<f64>>,
    #[serde(default)]
    pub diagnostics: Option<DiagnosticsSection>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

/// Everything needed to execute a validated run.
pub struct ValidatedRun {
    pub config: SchemeConfig<f64>,
    pub kernel: Kernel<f64>,
    pub initial_data: InitialData<f64>,
    pub initial: Vec<f64>,
    pub t_final: f64,
    pub snapshots: Vec<f64>,
    pub diagnostics: DiagnosticsSection,
    pub output_dir: Option<PathBuf>,
}

impl RunConfigFile {
    /// Validate every section, reporting all problems at once.
    pub fn validate(self) -> Result<ValidatedRun, Vec<Problem>> {
        let mut problems = Vec::new();

        macro_rules! require {
            ($field:ident) => {
                match &self.$field {
                    Some(v) => Some(v.clone()),
                    None => {
                        problems.push(Problem::missing(stringify!($field)));
                        None
                    }
                }
            };
        }

        let grid_section = require!(grid);
        let kernel_section = require!(kernel);
        let weights_section = require!(weights);
        let velocity_section = require!(velocity);
        let lambda = require!(lambda);
        let epsilon = require!(epsilon);
        let initial_data = require!(initial_data);
        let t_final = match &self.t_final {
            Some(v) => Some(*v),
            None => {
                problems.push(Problem::missing("T"));
                None
            }
        };

        let grid = grid_section.as_ref().and_then(|g| {
            GridSpec::new(g.x_min, g.x_max, g.h)
                .map_err(|e| problems.push(Problem::from_error(e)))
                .ok()
        });
        let kernel = kernel_section
            .as_ref()
            .and_then(|k| k.build().map_err(|p| problems.push(p)).ok());
        let weights = match (&kernel, &weights_section, &grid, epsilon) {
            (Some(k), Some(ws), Some(g), Some(eps)) => ws
                .build(k, eps, g.h())
                .map_err(|p| problems.push(p))
                .ok(),
            _ => None,
        };
        if let Some(t) = t_final {
            #[allow(clippy::neg_cmp_op_on_partial_ord)] // rejects NaN too
            if !(t > 0.0) {
                problems.push(Problem::new(
                    "out-of-range:T",
                    format!("T must be positive, got {t}"),
                ));
            }
        }
        if let Some(data) = &initial_data {
            if !data.in_unit_interval() {
                problems.push(Problem::new(
                    "data-out-of-range",
                    "initial data must take values in [0, 1]",
                ));
            }
        }

        let scheme_config = match (grid, weights, &velocity_section, lambda, epsilon) {
            (Some(g), Some(w), Some(v), Some(l), Some(eps)) => SchemeConfig::new(
                g,
                w,
                VelocityModel::from_family(v.family),
                l,
                eps,
                self.cfl_variant.unwrap_or(CflVariant::Main),
            )
            .map_err(|e| problems.push(Problem::from_error(e)))
            .ok(),
            _ => None,
        };

        let initial = match (&scheme_config, &initial_data) {
            (Some(cfg), Some(data)) => {
                nlcl::scheme::discretize_initial(data, &cfg.grid)
                    .map_err(|e| problems.push(Problem::from_error(e)))
                    .ok()
            }
            _ => None,
        };

        match (scheme_config, initial, initial_data, t_final) {
            (Some(config), Some(initial), Some(data), Some(t)) if problems.is_empty() => {
                let snapshots = self.snapshots.unwrap_or_else(|| vec![t]);
                Ok(ValidatedRun {
                    kernel: kernel.expect("kernel built"),
                    config,
                    initial_data: data,
                    initial,
                    t_final: t,
                    snapshots,
                    diagnostics: self.diagnostics.unwrap_or_default(),
                    output_dir: self.output_dir,
                })
            }
            _ => Err(problems),
        }
    }
}

// No deny_unknown_fields here: the struct is flattened into the sweep enum,
// which serde cannot combine with strict key checking.
#[derive(Debug, Deserialize)]
pub struct ConvergenceSection {
    pub data: InitialData<f64>,
    pub kernel: KernelSection,
    #[serde(default = "default_weight_family")]
    pub weights_family: WeightFamily,
    pub velocity: VelocitySection,
    pub path: LimitPath<f64>,
    #[serde(default)]
    pub h_list: Option<Vec<f64>>,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(rename = "T", default = "default_t")]
    pub t_final: f64,
    #[serde(default)]
    pub domain: Option<[f64; 2]>,
    #[serde(default)]
    pub target_field: Option<TargetField>,
    #[serde(default)]
    pub cfl_variant: Option<CflVariant>,
    #[serde(default = "default_refine")]
    pub refine: usize,
    #[serde(default)]
    pub fit_points: Option<usize>,
    #[serde(default)]
    pub tail_tol: Option<f64>,
}

fn default_weight_family() -> WeightFamily {
    WeightFamily::Exact
}

fn default_lambda() -> f64 {
    0.25
}

fn default_t() -> f64 {
    1.0
}

fn default_refine() -> usize {
    8
}

impl ConvergenceSection {
    pub fn to_spec(&self) -> Result<StudySpec<f64>, Vec<Problem>> {
        let kernel = self.kernel.build().map_err(|p| vec![p])?;
        let mut spec = StudySpec::new(
            self.data.clone(),
            kernel,
            VelocityModel::from_family(self.velocity.family),
            self.path,
        );
        spec.weight_family = self.weights_family;
        if let Some(h_list) = &self.h_list {
            spec.h_list = h_list.clone();
        } else {
            spec.h_list = DEFAULT_H_LIST.to_vec();
        }
        spec.lambda = self.lambda;
        spec.t_final = self.t_final;
        if let Some([a, b]) = self.domain {
            spec.domain = (a, b);
        }
        if let Some(target) = self.target_field {
            spec.target_field = target;
        }
        if let Some(variant) = self.cfl_variant {
            spec.cfl_variant = variant;
        }
        spec.refine = self.refine;
        spec.fit_points = self.fit_points;
        if let Some(tol) = self.tail_tol {
            spec.tail_tol = tol;
        }
        Ok(spec)
    }
}

/// Sweep configuration, dispatched on the `study` tag.
#[derive(Debug, Deserialize)]
#[serde(tag = "study", rename_all = "kebab-case")]
pub enum SweepConfigFile {
    Convergence(ConvergenceSection),
    QuadratureComparison {
        families: Vec<WeightFamily>,
        #[serde(flatten)]
        base: ConvergenceSection,
    },
    TvStudy {
        epsilons: Vec<f64>,
        h: f64,
        kernel: KernelSection,
        #[serde(rename = "T")]
        t_final: f64,
    },
    EntropyTable {
        epsilons: Vec<f64>,
        h: f64,
        kernels: Vec<KernelSection>,
        data_list: Vec<InitialData<f64>>,
        #[serde(default = "default_entropy_c")]
        c: f64,
        #[serde(rename = "T")]
        t_final: f64,
    },
}
