use serde::{Deserialize, Serialize};

use crate::coarse::{ColumnSolver, CoarseVariant};
use crate::elliptic::CoefficientModel;
use crate::error::{Error, Result};
use crate::pwls::{Multipliers, WaveSpeedModel};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    Elliptic3d,
    Elliptic2d,
    Helmholtz2d,
}

impl ProblemKind {
    pub fn dim(self) -> usize {
        match self {
            ProblemKind::Elliptic3d => 3,
            _ => 2,
        }
    }

    pub fn is_elliptic(self) -> bool {
        !matches!(self, ProblemKind::Helmholtz2d)
    }

    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::Elliptic3d => "elliptic3d",
            ProblemKind::Elliptic2d => "elliptic2d",
            ProblemKind::Helmholtz2d => "helmholtz2d",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelId {
    Model1,
    Model2,
    Model3,
    Model4,
    Model41,
    Model42,
    Model43,
}

impl ModelId {
    pub fn name(self) -> &'static str {
        match self {
            ModelId::Model1 => "model1",
            ModelId::Model2 => "model2",
            ModelId::Model3 => "model3",
            ModelId::Model4 => "model4",
            ModelId::Model41 => "model41",
            ModelId::Model42 => "model42",
            ModelId::Model43 => "model43",
        }
    }

    pub fn coefficient(self) -> Option<CoefficientModel> {
        match self {
            ModelId::Model1 => Some(CoefficientModel::Model1),
            ModelId::Model2 => Some(CoefficientModel::Model2),
            ModelId::Model3 => Some(CoefficientModel::Model3),
            ModelId::Model4 => Some(CoefficientModel::Model4),
            _ => None,
        }
    }

    pub fn wavespeed(self) -> Option<WaveSpeedModel> {
        match self {
            ModelId::Model41 => Some(WaveSpeedModel::Model41),
            ModelId::Model42 => Some(WaveSpeedModel::Model42),
            ModelId::Model43 => Some(WaveSpeedModel::Model43),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    OneLevel,
    PsiGlobal,
    PsibarGlobal,
    PsiEcon,
    PsibarEcon,
}

impl Variant {
    pub fn coarse(self) -> Option<CoarseVariant> {
        match self {
            Variant::OneLevel => None,
            Variant::PsiGlobal => Some(CoarseVariant::PsiGlobal),
            Variant::PsibarGlobal => Some(CoarseVariant::PsibarGlobal),
            Variant::PsiEcon => Some(CoarseVariant::PsiEcon),
            Variant::PsibarEcon => Some(CoarseVariant::PsibarEcon),
        }
    }

    pub fn name(self) -> &'static str {
        self.coarse().map_or("one_level", CoarseVariant::name)
    }
}

fn default_overlap() -> usize {
    1
}

/// One experiment, read from a flat JSON object.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemKind,
    pub model: ModelId,
    pub n: usize,
    pub m: usize,
    #[serde(default = "default_overlap")]
    pub l: usize,
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default)]
    pub dim: Option<usize>,
    #[serde(default)]
    pub mu: Option<f64>,
    #[serde(default)]
    pub mu1: Option<f64>,
    #[serde(default)]
    pub mu2: Option<f64>,
    #[serde(default)]
    pub omega: Option<f64>,
    #[serde(default)]
    pub p: Option<usize>,
    #[serde(default)]
    pub wavespeed: Option<WaveSpeedModel>,
    #[serde(default, rename = "Lambda")]
    pub lambda: Option<f64>,
    pub variant: Variant,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default, rename = "tol_A")]
    pub tol_a: Option<f64>,
    #[serde(default)]
    pub max_it: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<String>,
    #[serde(default)]
    pub column_solver: ColumnSolver,
    /// Scale factors on the default least-squares multipliers.
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub nu: Option<f64>,
}

/// Largest `n * m` accepted per axis; guards against configs that would
/// exhaust memory before any work starts.
pub const MAX_ELEMENTS_PER_AXIS: usize = 4096;

fn positive(name: &str, v: Option<f64>) -> Result<()> {
    match v {
        Some(x) if !(x > 0.0 && x.is_finite()) => Err(Error::invalid(format!("{name} must be positive and finite"))),
        _ => Ok(()),
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 {
            return Err(Error::invalid("n and m must be at least 1"));
        }
        if self.n.saturating_mul(self.m) > MAX_ELEMENTS_PER_AXIS {
            return Err(Error::invalid("mesh too large"));
        }
        if self.l == 0 {
            return Err(Error::invalid("overlap l must be at least 1"));
        }
        if let Some(d) = self.dim {
            if d != self.problem.dim() {
                return Err(Error::invalid(format!("dim {d} does not match problem {}", self.problem.name())));
            }
        }
        if self.k == Some(0) {
            return Err(Error::invalid("k must be at least 1"));
        }
        if matches!(self.variant, Variant::PsiEcon | Variant::PsibarEcon) && self.k.is_none() {
            return Err(Error::invalid("economical variants need k"));
        }
        for (name, v) in [
            ("Lambda", self.lambda),
            ("tol", self.tol),
            ("tol_A", self.tol_a),
            ("omega", self.omega),
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("nu", self.nu),
        ] {
            positive(name, v)?;
        }
        if self.tol.is_some_and(|t| t >= 1.0) {
            return Err(Error::invalid("tol must be below 1"));
        }
        if self.max_it == Some(0) {
            return Err(Error::invalid("max_it must be at least 1"));
        }
        for (name, v) in [("mu", self.mu), ("mu1", self.mu1), ("mu2", self.mu2)] {
            if v.is_some_and(|x| !x.is_finite() || x.abs() > 300.0) {
                return Err(Error::invalid(format!("{name} out of range")));
            }
        }
        if self.problem.is_elliptic() {
            let model = self
                .model
                .coefficient()
                .ok_or_else(|| Error::invalid("elliptic problems take model1..model4"))?;
            if self.omega.is_some() || self.p.is_some() || self.wavespeed.is_some() {
                return Err(Error::invalid("omega, p and wavespeed apply to helmholtz2d only"));
            }
            if self.alpha.is_some() || self.beta.is_some() || self.nu.is_some() {
                return Err(Error::invalid("multiplier scales apply to helmholtz2d only"));
            }
            let split = self.mu1.is_some() || self.mu2.is_some();
            if split && self.mu.is_some() {
                return Err(Error::invalid("give either mu or mu1/mu2"));
            }
            if split && !matches!(model, CoefficientModel::Model2 | CoefficientModel::Model3) {
                return Err(Error::invalid("mu1/mu2 apply to model2 and model3"));
            }
            if !split && self.mu.is_none() && model != CoefficientModel::Model1 {
                return Err(Error::invalid("this model needs mu"));
            }
        } else {
            let model = self
                .model
                .wavespeed()
                .ok_or_else(|| Error::invalid("helmholtz2d takes model41..model43"))?;
            if self.wavespeed.is_some_and(|w| w != model) {
                return Err(Error::invalid("wavespeed disagrees with model"));
            }
            if self.omega.is_none() {
                return Err(Error::invalid("helmholtz2d needs omega"));
            }
            match self.p {
                Some(p) if (3..=256).contains(&p) => {}
                _ => return Err(Error::invalid("helmholtz2d needs p in 3..=256")),
            }
            if self.mu.is_some() || self.mu1.is_some() || self.mu2.is_some() {
                return Err(Error::invalid("mu applies to elliptic problems only"));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.problem.dim()
    }

    pub fn resolved_tol(&self) -> f64 {
        self.tol
            .unwrap_or(if self.problem.is_elliptic() { 1e-6 } else { 1e-5 })
    }

    pub fn resolved_tol_a(&self) -> f64 {
        self.tol_a.unwrap_or(0.1)
    }

    pub fn resolved_max_it(&self) -> usize {
        self.max_it.unwrap_or(1000)
    }

    /// Exponents of the two coefficient regions.
    pub fn resolved_mu(&self) -> (f64, f64) {
        let mu = self.mu.unwrap_or(0.0);
        if self.mu1.is_some() || self.mu2.is_some() {
            return (self.mu1.unwrap_or(0.0), self.mu2.unwrap_or(0.0));
        }
        match self.model {
            ModelId::Model2 | ModelId::Model4 => (mu, 0.0),
            ModelId::Model3 => (0.0, mu),
            _ => (0.0, 0.0),
        }
    }

    pub fn multipliers(&self) -> Multipliers {
        Multipliers {
            alpha: self.alpha.unwrap_or(1.0),
            beta: self.beta.unwrap_or(1.0),
            nu: self.nu.unwrap_or(1.0),
        }
    }

    /// Replaces one field by name. The value is read as JSON when possible
    /// and as a bare string otherwise.
    pub fn with_field(&self, key: &str, value: &str) -> Result<Self> {
        let mut obj = serde_json::to_value(self)?;
        let map = obj.as_object_mut().expect("config serializes to an object");
        if !map.contains_key(key) {
            return Err(Error::invalid(format!("unknown config key {key:?}")));
        }
        let v = serde_json::from_str::<serde_json::Value>(value)
            .unwrap_or_else(|_| serde_json::Value::String(value.to_string()));
        map.insert(key.to_string(), v);
        let cfg: Self = serde_json::from_value(obj)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Parses `key=v1,v2,...`.
pub fn parse_vary(arg: &str) -> Result<(String, Vec<String>)> {
    let (key, values) = arg
        .split_once('=')
        .ok_or_else(|| Error::invalid(format!("expected key=v1,v2,... in {arg:?}")))?;
    let key = key.trim();
    if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return Err(Error::invalid(format!("bad key {key:?}")));
    }
    let values: Vec<String> = values.split(',').map(|v| v.trim().to_string()).collect();
    if values.iter().any(String::is_empty) {
        return Err(Error::invalid("empty value in list"));
    }
    Ok((key.to_string(), values))
}
