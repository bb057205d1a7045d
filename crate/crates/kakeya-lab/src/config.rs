//! Experiment configuration: one JSON file, validated on load.

use crate::HarnessError;
use kakeya::axiomlab::Axiom4Options;
use kakeya::carnot::GroupSpec;
use kakeya::geometry::LayerSpec;
use kakeya::settings::{CantorSet, Setting};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Cantor set parameters as written in the config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CantorConfig {
    pub ratio: f64,
    pub depth: u32,
}

impl CantorConfig {
    fn build(&self) -> kakeya::Result<CantorSet> {
        CantorSet::new(self.ratio, self.depth)
    }
}

/// A setting by its constructor arguments; derived constants are computed,
/// never read from the file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum SettingConfig {
    EuclideanKakeya {
        n: usize,
    },
    RestrictedKakeya {
        n: usize,
        directions: CantorConfig,
        width: f64,
    },
    NikodymHyperplane {
        n: usize,
        sigma: f64,
        c_sigma: f64,
    },
    FurstenbergK {
        n: usize,
        fiber: CantorConfig,
    },
    HomogeneousKakeya {
        layers: LayerSpec,
    },
    CarnotLT {
        spec: GroupSpec,
        #[serde(rename = "R")]
        r: f64,
    },
    CarnotKakeya {
        spec: GroupSpec,
        #[serde(rename = "R")]
        r: f64,
    },
}

impl SettingConfig {
    pub fn build(&self) -> kakeya::Result<Setting> {
        match self {
            SettingConfig::EuclideanKakeya { n } => Setting::euclidean(*n),
            SettingConfig::RestrictedKakeya { n, directions, width } => Setting::restricted(*n, directions.build()?, *width),
            SettingConfig::NikodymHyperplane { n, sigma, c_sigma } => Setting::nikodym(*n, *sigma, *c_sigma),
            SettingConfig::FurstenbergK { n, fiber } => Setting::furstenberg(*n, fiber.build()?),
            SettingConfig::HomogeneousKakeya { layers } => Setting::homogeneous(layers.clone()),
            SettingConfig::CarnotLT { spec, r } => Setting::carnot_lt(spec.clone(), *r),
            SettingConfig::CarnotKakeya { spec, r } => Setting::carnot_kakeya(spec.clone(), *r),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Allowed |estimate − nominal| on fitted exponents.
    pub exponent: f64,
    /// Allowed |dimension − expected| in the dimension pipeline.
    pub dimension: f64,
    /// Bound on the bush chain constants.
    pub bush_constant: f64,
    /// Optional bound on the fitted weak-type constant; none by default.
    pub weak_type_constant: Option<f64>,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { exponent: kakeya::axiomlab::EXPONENT_TOL, dimension: 0.15, bush_constant: 10.0, weak_type_constant: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AxiomsSection {
    /// Which axioms to run, from 1..=5.
    pub run: Vec<u8>,
    pub volume_samples: usize,
    pub axiom2_samples: usize,
    pub axiom3_pairs: usize,
    pub axiom4: Axiom4Options,
}

impl Default for AxiomsSection {
    fn default() -> Self {
        AxiomsSection {
            run: vec![1, 2, 3, 4],
            volume_samples: 20_000,
            axiom2_samples: 20_000,
            axiom3_pairs: 50,
            axiom4: Axiom4Options::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaximalSection {
    pub lambda_grid: Vec<f64>,
    pub param_samples: usize,
    /// E is the Euclidean ball of this radius about the origin.
    pub e_radius: f64,
    /// Grid cells per unit length for E.
    pub resolution: f64,
}

impl Default for MaximalSection {
    fn default() -> Self {
        MaximalSection { lambda_grid: vec![0.1, 0.2, 0.4], param_samples: 64, e_radius: 0.25, resolution: 32.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum DimensionTarget {
    /// [0, 1]^n with the Euclidean grid.
    UnitCube {
        n: usize,
        delta_list: Option<Vec<f64>>,
    },
    /// The unit x_n-segment under a layered grid.
    Segment {
        layers: LayerSpec,
        delta_list: Option<Vec<f64>>,
    },
    Cantor {
        ratio: f64,
        depth: u32,
        delta_list: Option<Vec<f64>>,
    },
    /// B_d(0, 1) for the homogeneous norm of `layers`.
    Ball {
        layers: LayerSpec,
        delta_list: Option<Vec<f64>>,
    },
    /// Perron tree areas for depths 1..=depth.
    Perron {
        depth: u32,
    },
}

impl DimensionTarget {
    pub fn name(&self) -> &'static str {
        match self {
            DimensionTarget::UnitCube { .. } => "unit_cube",
            DimensionTarget::Segment { .. } => "segment",
            DimensionTarget::Cantor { .. } => "cantor",
            DimensionTarget::Ball { .. } => "ball",
            DimensionTarget::Perron { .. } => "perron",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DimensionSection {
    pub targets: Vec<DimensionTarget>,
}

impl Default for DimensionSection {
    fn default() -> Self {
        let l11 = LayerSpec::new(vec![1, 1]).expect("valid layers");
        let l21 = LayerSpec::new(vec![2, 1]).expect("valid layers");
        DimensionSection {
            targets: vec![
                DimensionTarget::UnitCube { n: 2, delta_list: None },
                DimensionTarget::Segment { layers: l11, delta_list: None },
                DimensionTarget::Cantor { ratio: 0.25, depth: 8, delta_list: Some((4..=12).map(|k| 2f64.powi(-k)).collect()) },
                DimensionTarget::Ball { layers: l21, delta_list: Some(vec![0.25, 0.125, 0.0625]) },
                DimensionTarget::Perron { depth: 8 },
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BushSection {
    pub lambda: f64,
    pub points_per_tube: usize,
    pub volume_samples: usize,
    pub e_samples: usize,
}

impl Default for BushSection {
    fn default() -> Self {
        BushSection { lambda: 0.5, points_per_tube: 2000, volume_samples: 20_000, e_samples: 400_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArithSection {
    pub universe_size: usize,
    pub n_max: usize,
    /// Layers of the tube family fed to the Minkowski pipeline.
    pub layers: LayerSpec,
    pub c: f64,
    /// Slice levels are k / levels, k = 0..=levels.
    pub levels: usize,
}

impl Default for ArithSection {
    fn default() -> Self {
        ArithSection { universe_size: 4, n_max: 2, layers: LayerSpec::new(vec![1, 1]).expect("valid layers"), c: 0.1, levels: 4 }
    }
}

fn default_trials() -> usize {
    16
}

/// Top-level experiment file. `seed` has no default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub setting: Option<SettingConfig>,
    #[serde(default)]
    pub settings: Vec<SettingConfig>,
    pub delta_list: Vec<f64>,
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub tolerance: Tolerances,
    /// Output directory; overridden by `--out`. Left out of the report echo
    /// so reruns into another directory stay byte-identical.
    #[serde(default, skip_serializing)]
    pub out_dir: Option<PathBuf>,
    /// Adds wall time to the JSON report, which breaks byte-identity.
    #[serde(default)]
    pub record_timing: bool,
    #[serde(default)]
    pub axioms: AxiomsSection,
    #[serde(default)]
    pub maximal: MaximalSection,
    #[serde(default)]
    pub dimension: DimensionSection,
    #[serde(default)]
    pub bush: BushSection,
    #[serde(default)]
    pub arith: ArithSection,
}

fn usage(key: &str, msg: impl std::fmt::Display) -> HarnessError {
    HarnessError::Usage(format!("{key}: {msg}"))
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| HarnessError::Usage(format!("malformed config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// `setting` followed by `settings`.
    pub fn all_settings(&self) -> Vec<SettingConfig> {
        self.setting.iter().chain(&self.settings).cloned().collect()
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.delta_list.is_empty() {
            return Err(usage("delta_list", "must not be empty"));
        }
        if self.delta_list.iter().any(|d| !(*d > 0.0 && *d < 1.0)) {
            return Err(usage("delta_list", "entries must lie in (0, 1)"));
        }
        if self.delta_list.windows(2).any(|w| w[1] >= w[0]) {
            return Err(usage("delta_list", "must be strictly decreasing"));
        }
        if self.trials == 0 {
            return Err(usage("trials", "must be positive"));
        }
        for (i, s) in self.all_settings().iter().enumerate() {
            s.build().map_err(|e| usage(&format!("settings[{i}]"), e))?;
        }
        if self.axioms.run.iter().any(|a| !(1..=5).contains(a)) {
            return Err(usage("axioms.run", "axiom ids lie in 1..=5"));
        }
        if self.maximal.lambda_grid.is_empty() {
            return Err(usage("maximal.lambda_grid", "must not be empty"));
        }
        if !(self.tolerance.exponent > 0.0) || !(self.tolerance.dimension > 0.0) {
            return Err(usage("tolerance", "tolerances must be positive"));
        }
        Ok(())
    }
}
