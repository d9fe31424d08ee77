//! Experiment configuration: a single versioned JSON document describing the
//! scene, an optional deformation, the coding, and run parameters.
//!
//! Obstacle numbers are 1-based everywhere in the file (coding symbols and
//! deformation targets alike).

use billiards::{
    DeformationFamily, DeformationRule, Matrix, Obstacle, RuleKind, Scene, Vector,
};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: String,
    pub dimension: usize,
    pub obstacles: Vec<ObstacleConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub deformation: Vec<DeformationConfig>,
    pub coding: Vec<usize>,
    pub bounces: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_grid: Option<Vec<f64>>,
    pub seed: u64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputPaths,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ObstacleConfig {
    pub kind: String,
    pub center: Vec<f64>,
    pub radii: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orientation: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DeformationConfig {
    /// 1-based obstacle number the rule applies to.
    pub target: usize,
    /// One of "translate", "scale", "rotate".
    pub rule: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vector: Option<Vec<f64>>,
    /// Coordinate plane (pair of 1-based axis numbers) for "rotate".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle_plane: Option<[usize; 2]>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub orbit_residual: f64,
    pub grazing: f64,
    pub boundary: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            orbit_residual: billiards::tol::ORBIT_RESIDUAL,
            grazing: billiards::tol::GRAZING,
            boundary: billiards::tol::BOUNDARY,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub svg: Option<String>,
}

impl ExperimentConfig {
    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        let config: ExperimentConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema_version != "1" {
            return Err(CliError::config(format!(
                "unsupported schema_version {:?}, expected \"1\"",
                self.schema_version
            )));
        }
        if !(2..=8).contains(&self.dimension) {
            return Err(CliError::config("dimension must lie in 2..=8"));
        }
        if self.obstacles.len() < 2 {
            return Err(CliError::config("at least two obstacles are required"));
        }
        if self.bounces == 0 {
            return Err(CliError::config("bounces must be positive"));
        }
        for (i, o) in self.obstacles.iter().enumerate() {
            if o.center.len() != self.dimension {
                return Err(CliError::config(format!(
                    "obstacle {}: center has {} coordinates, expected {}",
                    i + 1,
                    o.center.len(),
                    self.dimension
                )));
            }
            match o.kind.as_str() {
                "sphere" => {
                    if o.radii.len() != 1 && o.radii.len() != self.dimension {
                        return Err(CliError::config(format!(
                            "obstacle {}: sphere radii must be a single value (or n equal values)",
                            i + 1
                        )));
                    }
                    if o.radii.windows(2).any(|w| w[0] != w[1]) {
                        return Err(CliError::config(format!(
                            "obstacle {}: sphere radii must all be equal",
                            i + 1
                        )));
                    }
                }
                "ellipsoid" => {
                    if o.radii.len() != self.dimension {
                        return Err(CliError::config(format!(
                            "obstacle {}: ellipsoid needs {} radii",
                            i + 1,
                            self.dimension
                        )));
                    }
                }
                other => {
                    return Err(CliError::config(format!(
                        "obstacle {}: unknown kind {other:?}",
                        i + 1
                    )))
                }
            }
        }
        for (j, &symbol) in self.coding.iter().enumerate() {
            if symbol == 0 || symbol > self.obstacles.len() {
                return Err(CliError::config(format!(
                    "coding position {j}: obstacle number {symbol} out of range 1..={}",
                    self.obstacles.len()
                )));
            }
        }
        for (i, d) in self.deformation.iter().enumerate() {
            if d.target == 0 || d.target > self.obstacles.len() {
                return Err(CliError::config(format!(
                    "deformation rule {i}: target {} out of range 1..={}",
                    d.target,
                    self.obstacles.len()
                )));
            }
            match d.rule.as_str() {
                "translate" => {
                    let Some(v) = &d.vector else {
                        return Err(CliError::config(format!(
                            "deformation rule {i}: translate needs a vector"
                        )));
                    };
                    if v.len() != self.dimension {
                        return Err(CliError::config(format!(
                            "deformation rule {i}: vector has wrong dimension"
                        )));
                    }
                }
                "scale" => {}
                "rotate" => {
                    let Some([a, b]) = d.angle_plane else {
                        return Err(CliError::config(format!(
                            "deformation rule {i}: rotate needs angle_plane"
                        )));
                    };
                    if a == 0 || b == 0 || a > self.dimension || b > self.dimension || a == b {
                        return Err(CliError::config(format!(
                            "deformation rule {i}: angle_plane axes out of range or equal"
                        )));
                    }
                }
                other => {
                    return Err(CliError::config(format!(
                        "deformation rule {i}: unknown rule {other:?}"
                    )))
                }
            }
        }
        for (name, grid) in [("alpha_grid", &self.alpha_grid), ("h_grid", &self.h_grid)] {
            if let Some(g) = grid {
                if g.is_empty() {
                    return Err(CliError::config(format!("{name} must not be empty")));
                }
                if g.iter().any(|x| !x.is_finite() || *x < 0.0) {
                    return Err(CliError::config(format!("{name} entries must be finite and >= 0")));
                }
            }
        }
        let t = &self.tolerances;
        if t.orbit_residual <= 0.0 || t.grazing <= 0.0 || t.boundary <= 0.0 {
            return Err(CliError::config("tolerances must be positive"));
        }
        Ok(())
    }

    pub fn scene(&self) -> Result<Scene, CliError> {
        let obstacles = self
            .obstacles
            .iter()
            .map(|o| self.build_obstacle(o))
            .collect::<Result<Vec<_>, _>>()?;
        Scene::new(obstacles).map_err(CliError::from)
    }

    fn build_obstacle(&self, o: &ObstacleConfig) -> Result<Obstacle, CliError> {
        let center = Vector::from_vec(o.center.clone());
        match o.kind.as_str() {
            "sphere" => Obstacle::sphere(center, o.radii[0]).map_err(CliError::from),
            _ => {
                let radii = Vector::from_vec(o.radii.clone());
                let orientation = match &o.orientation {
                    None => Matrix::identity(self.dimension, self.dimension),
                    Some(rows) => {
                        if rows.len() != self.dimension
                            || rows.iter().any(|r| r.len() != self.dimension)
                        {
                            return Err(CliError::config("orientation must be an n x n matrix"));
                        }
                        Matrix::from_fn(self.dimension, self.dimension, |i, j| rows[i][j])
                    }
                };
                Obstacle::ellipsoid(center, radii, orientation).map_err(CliError::from)
            }
        }
    }

    /// The coding with 0-based obstacle indices.
    pub fn coding(&self) -> Result<billiards::orbits::Coding, CliError> {
        billiards::orbits::Coding::new(self.coding.iter().map(|&s| s - 1).collect())
            .map_err(CliError::from)
    }

    /// Deformation family over [0, b], with b taken from the grids.
    pub fn family(&self) -> Result<DeformationFamily, CliError> {
        let scene = self.scene()?;
        let rules = self
            .deformation
            .iter()
            .map(|d| {
                let kind = match d.rule.as_str() {
                    "translate" => {
                        RuleKind::Translate(Vector::from_vec(d.vector.clone().unwrap()))
                    }
                    "scale" => RuleKind::Scale,
                    _ => {
                        let [a, b] = d.angle_plane.unwrap();
                        RuleKind::RotateInPlane { axes: (a - 1, b - 1) }
                    }
                };
                DeformationRule { target: d.target - 1, kind }
            })
            .collect();
        let mut alpha_max: f64 = 0.0;
        if let Some(g) = &self.alpha_grid {
            alpha_max = alpha_max.max(g.iter().cloned().fold(0.0, f64::max));
        }
        if let Some(g) = &self.h_grid {
            // room for the per-bounce stencils above the largest step
            alpha_max = alpha_max.max(2.0 * g.iter().cloned().fold(0.0, f64::max));
        }
        if alpha_max == 0.0 {
            alpha_max = 0.1;
        }
        DeformationFamily::new(scene, rules, alpha_max).map_err(CliError::from)
    }
}
