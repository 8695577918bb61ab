//! Experiment configuration: JSON schema, defaults and fail-fast
//! validation against the engine's preconditions.

use serde::{Deserialize, Serialize};

use pathint_core::{PhysicalConstants, PotentialModel, SlitGeometry, SpatialGrid, TimeSlicing};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Propagate,
    Doubleslit,
    Validate,
    ClassicalLimit,
    ActionCheck,
}

impl std::fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Self::Propagate => "propagate",
            Self::Doubleslit => "doubleslit",
            Self::Validate => "validate",
            Self::ClassicalLimit => "classical-limit",
            Self::ActionCheck => "action-check",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsConfig {
    pub hbar: f64,
    pub mass: f64,
}

impl Default for ConstantsConfig {
    fn default() -> Self {
        Self {
            hbar: 1.0,
            mass: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

impl GridConfig {
    pub fn build(&self) -> Result<SpatialGrid, CliError> {
        SpatialGrid::new(self.x_min, self.x_max, self.n_points).map_err(CliError::guard)
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlicingConfig {
    pub t_a: f64,
    pub t_b: f64,
    pub n_slices: usize,
}

impl SlicingConfig {
    pub fn build(&self) -> Result<TimeSlicing, CliError> {
        TimeSlicing::new(self.t_a, self.t_b, self.n_slices).map_err(CliError::guard)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialConfig {
    Free,
    Harmonic {
        omega: f64,
    },
    Tabulated {
        x_min: f64,
        x_max: f64,
        samples: Vec<f64>,
    },
    MaskedFree {
        apertures: Vec<(f64, f64)>,
        barrier_height: f64,
    },
}

impl PotentialConfig {
    pub fn build(&self) -> Result<PotentialModel, CliError> {
        match self {
            Self::Free => Ok(PotentialModel::Free),
            Self::Harmonic { omega } => PotentialModel::harmonic(*omega).map_err(CliError::guard),
            Self::Tabulated {
                x_min,
                x_max,
                samples,
            } => {
                let grid =
                    SpatialGrid::new(*x_min, *x_max, samples.len()).map_err(CliError::guard)?;
                PotentialModel::tabulated(grid, samples.clone()).map_err(CliError::guard)
            }
            Self::MaskedFree {
                apertures,
                barrier_height,
            } => PotentialModel::masked_free(apertures.clone(), *barrier_height)
                .map_err(CliError::guard),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateConfig {
    Gaussian {
        center: f64,
        width: f64,
        momentum: f64,
    },
    Delta {
        node: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Kernel,
    Cn,
    #[default]
    Both,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropagateConfig {
    pub grid: GridConfig,
    pub slicing: SlicingConfig,
    pub cn_steps: usize,
    pub potential: PotentialConfig,
    pub initial_state: StateConfig,
    #[serde(default)]
    pub method: Method,
    #[serde(default)]
    pub emit_propagator: bool,
    /// Record every n-th Crank-Nicolson state into a trajectory file;
    /// 0 disables recording.
    #[serde(default)]
    pub record_every: usize,
}

impl Default for PropagateConfig {
    fn default() -> Self {
        Self {
            grid: GridConfig {
                x_min: -20.0,
                x_max: 20.0,
                n_points: 801,
            },
            slicing: SlicingConfig {
                t_a: 0.0,
                t_b: 1.0,
                n_slices: 1000,
            },
            cn_steps: 10_000,
            potential: PotentialConfig::Free,
            initial_state: StateConfig::Gaussian {
                center: 0.0,
                width: 1.0,
                momentum: 0.0,
            },
            method: Method::Both,
            emit_propagator: false,
            record_every: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeConfig {
    Coherent,
    Measured,
    Hole1,
    Hole2,
    Mixed(f64),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DoubleSlitConfig {
    pub source_x: f64,
    pub screen_b_time: f64,
    pub slit1: (f64, f64),
    pub slit2: (f64, f64),
    pub screen_c_time: f64,
    pub detector: GridConfig,
    pub slit_quadrature_points: usize,
    pub mode: ModeConfig,
    /// Window for the visibility metric in the manifest.
    pub window: (f64, f64),
}

impl Default for DoubleSlitConfig {
    fn default() -> Self {
        Self {
            source_x: 0.0,
            screen_b_time: 1.0,
            slit1: (-1.1, -0.9),
            slit2: (0.9, 1.1),
            screen_c_time: 1.0,
            detector: GridConfig {
                x_min: -10.0,
                x_max: 10.0,
                n_points: 2001,
            },
            slit_quadrature_points: 129,
            mode: ModeConfig::Coherent,
            window: pathint_core::doubleslit::REFERENCE_WINDOW,
        }
    }
}

impl DoubleSlitConfig {
    pub fn geometry(&self) -> Result<SlitGeometry, CliError> {
        SlitGeometry::new(
            self.source_x,
            self.screen_b_time,
            self.slit1,
            self.slit2,
            self.screen_c_time,
            self.detector.build()?,
            self.slit_quadrature_points,
        )
        .map_err(CliError::guard)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassicalLimitConfig {
    pub potential: PotentialConfig,
    pub x_a: f64,
    pub x_b: f64,
    pub slicing: SlicingConfig,
    pub amplitudes: Vec<f64>,
    pub phase_slices: usize,
    pub phase_grid: GridConfig,
}

impl Default for ClassicalLimitConfig {
    fn default() -> Self {
        Self {
            potential: PotentialConfig::Free,
            x_a: 0.0,
            x_b: 1.0,
            slicing: SlicingConfig {
                t_a: 0.0,
                t_b: 1.0,
                n_slices: 1000,
            },
            amplitudes: vec![1e-1, 1e-2, 1e-3],
            phase_slices: 200,
            phase_grid: GridConfig {
                x_min: -40.0,
                x_max: 40.0,
                n_points: 801,
            },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionCheckConfig {
    pub potential: PotentialConfig,
    pub x_a: f64,
    pub x_b: f64,
    pub slicing: SlicingConfig,
    /// Slice counts for the Euler-Lagrange residual refinement table.
    pub residual_levels: Vec<usize>,
}

impl Default for ActionCheckConfig {
    fn default() -> Self {
        Self {
            potential: PotentialConfig::Harmonic { omega: 1.0 },
            x_a: 1.0,
            x_b: 1.0f64.cos(),
            slicing: SlicingConfig {
                t_a: 0.0,
                t_b: 1.0,
                n_slices: 10_000,
            },
            // fine enough to show the O(eps^2) decay, coarse enough that
            // the 1e-16/eps^2 rounding floor of the second difference
            // stays far below the truncation term
            residual_levels: vec![250, 500, 1000, 2000],
        }
    }
}

/// One experiment per invocation; the section matching `experiment` must
/// be present or defaultable.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub constants: ConstantsConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub propagate: Option<PropagateConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub doubleslit: Option<DoubleSlitConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classical_limit: Option<ClassicalLimitConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action_check: Option<ActionCheckConfig>,
}

impl ExperimentConfig {
    pub fn defaults_for(kind: ExperimentKind) -> Self {
        let mut config = Self {
            experiment: kind,
            constants: ConstantsConfig::default(),
            output: OutputConfig::default(),
            propagate: None,
            doubleslit: None,
            classical_limit: None,
            action_check: None,
        };
        match kind {
            ExperimentKind::Propagate => config.propagate = Some(PropagateConfig::default()),
            ExperimentKind::Doubleslit => config.doubleslit = Some(DoubleSlitConfig::default()),
            ExperimentKind::ClassicalLimit => {
                config.classical_limit = Some(ClassicalLimitConfig::default())
            }
            ExperimentKind::ActionCheck => config.action_check = Some(ActionCheckConfig::default()),
            ExperimentKind::Validate => {}
        }
        config
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text)
            .map_err(|e| CliError::Config(format!("config does not match the schema: {e}")))
    }

    pub fn constants(&self) -> Result<PhysicalConstants, CliError> {
        PhysicalConstants::new(self.constants.hbar, self.constants.mass).map_err(CliError::guard)
    }

    /// Canonical JSON form of the effective configuration; hashed into the
    /// run manifest.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

/// FNV-1a 64-bit over the canonical config bytes; a stable fingerprint for
/// the manifest, not a cryptographic digest.
pub fn fingerprint(bytes: &[u8]) -> String {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("fnv1a64:{hash:016x}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_doubleslit_matches_reference_geometry() {
        let config = DoubleSlitConfig::default();
        assert_eq!(config.geometry().unwrap(), SlitGeometry::reference());
    }

    #[test]
    fn missing_field_is_named() {
        let err = ExperimentConfig::from_json(
            r#"{"experiment":"propagate","propagate":{"grid":{"x_min":-20.0,"x_max":20.0,"n_points":801},
                "slicing":{"t_a":0.0,"t_b":1.0,"n_slices":100},
                "potential":{"kind":"free"},
                "initial_state":{"kind":"gaussian","center":0.0,"width":1.0,"momentum":0.0}}}"#,
        )
        .unwrap_err();
        let message = format!("{err}");
        assert!(message.contains("cn_steps"), "{message}");
    }

    #[test]
    fn unknown_field_is_rejected() {
        let err =
            ExperimentConfig::from_json(r#"{"experiment":"validate","nonsense":1}"#).unwrap_err();
        assert!(format!("{err}").contains("nonsense"));
    }

    #[test]
    fn fingerprint_is_stable() {
        assert_eq!(fingerprint(b""), "fnv1a64:cbf29ce484222325");
        assert_eq!(fingerprint(b"abc"), fingerprint(b"abc"));
        assert_ne!(fingerprint(b"abc"), fingerprint(b"abd"));
    }
}
