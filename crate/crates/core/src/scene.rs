//! Scene files: the JSON description of one verification run.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ambient::ProductSpace;
use crate::gallery::{GalleryError, GallerySpec};
use crate::immersion::{default_var_names, Chart, ChartError};

pub const CHECKS: [&str; 19] = [
    "membership",
    "frame",
    "t_eta_unit",
    "h_eta",
    "pmc",
    "biconservative",
    "biconservative_full",
    "biharmonic",
    "biharmonic_predicate",
    "class_a",
    "gauss",
    "codazzi",
    "ricci",
    "vector_t",
    "vector_eta",
    "e0",
    "splitting",
    "circle",
    "mean_curvature_const",
];

pub const GLOBAL_TOLERANCES: [&str; 3] = ["tol_jet", "tol_fd", "tol_fd2"];

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("cannot read scene: {0}")]
    Io(#[from] std::io::Error),
    #[error("scene does not match the schema: {0}")]
    Schema(#[from] serde_json::Error),
    #[error("invalid scene: {0}")]
    Invalid(String),
    #[error("gallery construction failed: {0}")]
    Gallery(#[from] GalleryError),
    #[error("chart construction failed: {0}")]
    Chart(#[from] ChartError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmbientSpec {
    pub epsilon: i32,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpressionImmersion {
    pub m: usize,
    #[serde(default)]
    pub vars: Option<Vec<String>>,
    pub coords: Vec<String>,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    pub domain: Vec<[f64; 2]>,
    #[serde(default)]
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ImmersionSpec {
    Gallery(GallerySpec),
    Expressions(ExpressionImmersion),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMode {
    #[default]
    Grid,
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sampling {
    #[serde(default)]
    pub mode: SamplingMode,
    /// Grid cells per variable.
    #[serde(default)]
    pub counts: Option<Vec<usize>>,
    /// Number of random samples.
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default)]
    pub seed: u64,
}

impl Default for Sampling {
    fn default() -> Self {
        Sampling {
            mode: SamplingMode::Grid,
            counts: None,
            samples: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scene {
    pub ambient: AmbientSpec,
    pub immersion: ImmersionSpec,
    #[serde(default)]
    pub sampling: Sampling,
    #[serde(default)]
    pub checks: Vec<String>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
}

pub fn is_known_tolerance(name: &str) -> bool {
    GLOBAL_TOLERANCES.contains(&name) || CHECKS.contains(&name)
}

impl Scene {
    pub fn from_json(text: &str) -> Result<Scene, SceneError> {
        let scene: Scene = serde_json::from_str(text)?;
        scene.validate()?;
        Ok(scene)
    }

    pub fn load(path: &Path) -> Result<Scene, SceneError> {
        Scene::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn space(&self) -> Result<ProductSpace, SceneError> {
        ProductSpace::new(self.ambient.epsilon, self.ambient.n)
            .map_err(|e| SceneError::Invalid(e.to_string()))
    }

    /// Structural checks that need no geometry.
    pub fn validate(&self) -> Result<(), SceneError> {
        self.space()?;
        for c in &self.checks {
            if !CHECKS.contains(&c.as_str()) {
                return Err(SceneError::Invalid(format!("unknown check `{c}`")));
            }
        }
        for (name, v) in &self.tolerances {
            if !is_known_tolerance(name) {
                return Err(SceneError::Invalid(format!("unknown tolerance `{name}`")));
            }
            if !(v.is_finite() && *v >= 0.0) {
                return Err(SceneError::Invalid(format!(
                    "tolerance `{name}` must be a non-negative number"
                )));
            }
        }
        if let ImmersionSpec::Expressions(e) = &self.immersion {
            if e.domain.len() != e.m {
                return Err(SceneError::Invalid(format!(
                    "expression immersion has m={} but {} domain intervals",
                    e.m,
                    e.domain.len()
                )));
            }
            if let Some(v) = &e.vars {
                if v.len() != e.m {
                    return Err(SceneError::Invalid(format!(
                        "expression immersion has m={} but {} variable names",
                        e.m,
                        v.len()
                    )));
                }
            }
        }
        if let Some(counts) = &self.sampling.counts {
            if counts.contains(&0) {
                return Err(SceneError::Invalid("grid counts must be positive".into()));
            }
        }
        if self.sampling.samples == Some(0) {
            return Err(SceneError::Invalid("sample count must be positive".into()));
        }
        Ok(())
    }

    pub fn build_chart(&self) -> Result<Chart, SceneError> {
        let space = self.space()?;
        match &self.immersion {
            ImmersionSpec::Gallery(g) => Ok(g.build(space)?),
            ImmersionSpec::Expressions(e) => {
                let vars = e.vars.clone().unwrap_or_else(|| default_var_names(e.m));
                let domain = e.domain.iter().map(|d| (d[0], d[1])).collect();
                Ok(Chart::from_expressions(
                    space,
                    vars,
                    &e.coords,
                    e.params.clone(),
                    domain,
                    e.label.clone().unwrap_or_else(|| "expressions".into()),
                )?)
            }
        }
    }

    /// Sets a numeric parameter of the immersion (gallery parameter or expression parameter).
    pub fn set_param(&mut self, name: &str, value: f64) -> Result<(), SceneError> {
        match &mut self.immersion {
            ImmersionSpec::Gallery(g) => {
                if g.set_numeric_param(name, value) {
                    Ok(())
                } else {
                    Err(SceneError::Invalid(format!(
                        "gallery kind `{}` has no scannable parameter `{name}`",
                        g.kind()
                    )))
                }
            }
            ImmersionSpec::Expressions(e) => match e.params.get_mut(name) {
                Some(v) => {
                    *v = value;
                    Ok(())
                }
                None => Err(SceneError::Invalid(format!("no parameter `{name}`"))),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_gallery_scene() {
        let s = Scene::from_json(
            r#"{
                "ambient": {"epsilon": 1, "n": 4},
                "immersion": {"gallery": {"kind": "theorem1", "a": 0.8, "phi": {"type": "geodesic_cylinder"}}},
                "sampling": {"mode": "grid", "counts": [2, 2, 2]},
                "checks": ["pmc", "class_a"]
            }"#,
        )
        .unwrap();
        assert_eq!(s.build_chart().unwrap().dim(), 3);
    }

    #[test]
    fn rejects_schema_violations() {
        let bad = r#"{"ambient": {"epsilon": 1, "n": 4, "x": 1}, "immersion": {"gallery": {"kind": "slice"}}}"#;
        assert!(matches!(Scene::from_json(bad), Err(SceneError::Schema(_))));
        let bad =
            r#"{"ambient": {"epsilon": 2, "n": 4}, "immersion": {"gallery": {"kind": "slice"}}}"#;
        assert!(matches!(Scene::from_json(bad), Err(SceneError::Invalid(_))));
        let bad = r#"{"ambient": {"epsilon": 1, "n": 4}, "immersion": {"gallery": {"kind": "slice"}}, "checks": ["nope"]}"#;
        assert!(matches!(Scene::from_json(bad), Err(SceneError::Invalid(_))));
    }
}
