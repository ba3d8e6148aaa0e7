//! Experiment configuration: a flat key-value text format with section
//! headers, documented in the README. No nesting; every value is a scalar
//! or a space-separated list, which keeps configs diffable.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use fracwr::{FracError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Dnwr,
    Nnwr,
    Nnwr2d,
}

impl Algorithm {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "dnwr" => Ok(Algorithm::Dnwr),
            "nnwr" => Ok(Algorithm::Nnwr),
            "nnwr2d" => Ok(Algorithm::Nnwr2d),
            _ => Err(FracError::InvalidParameter(format!("unknown algorithm `{s}`"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Dnwr => "dnwr",
            Algorithm::Nnwr => "nnwr",
            Algorithm::Nnwr2d => "nnwr2d",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ThetaPolicy {
    /// The closed-form optimum per interface.
    Optimal,
    /// One value per interface (or one value broadcast to all).
    Fixed(Vec<f64>),
    /// A grid of `count` values including theta*; every interface uses the
    /// same swept value.
    Sweep { count: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Grading {
    /// (2 - alpha)/alpha for the L1 scheme, uniform for order >= 1.
    Auto,
    Fixed(f64),
}

/// Everything needed to run one experiment family (a sweep over theta and
/// fractional order cells).
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub algorithm: Algorithm,
    pub label: String,
    /// Fractional orders 2*nu to sweep.
    pub orders: Vec<f64>,
    pub t_end: f64,
    pub domain: (f64, f64),
    pub forcing: String,
    pub initial: String,
    /// 2D only.
    pub domain_y: (f64, f64),
    pub split: f64,
    pub dy: f64,
    pub breakpoints: Vec<f64>,
    pub kappa: Vec<f64>,
    pub dx: Vec<f64>,
    pub theta: ThetaPolicy,
    pub steps: usize,
    pub grading: Grading,
    pub k_max: usize,
    pub tol: f64,
    pub bound_overlay: bool,
    pub workers: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            algorithm: Algorithm::Dnwr,
            label: "run".into(),
            orders: vec![0.5],
            t_end: 1.0,
            domain: (0.0, 2.0),
            forcing: "sin_pi_x_over_2".into(),
            initial: "zero".into(),
            domain_y: (-5.0, 5.0),
            split: 0.5,
            dy: 0.1,
            breakpoints: vec![0.0, 1.0, 2.0],
            kappa: vec![1.0, 1.0],
            dx: vec![0.01, 0.01],
            theta: ThetaPolicy::Optimal,
            steps: 64,
            grading: Grading::Auto,
            k_max: 40,
            tol: 1e-6,
            bound_overlay: false,
            workers: 0,
        }
    }
}

fn parse_f64(v: &str, key: &str) -> Result<f64> {
    v.parse()
        .map_err(|_| FracError::InvalidParameter(format!("bad number for {key}: `{v}`")))
}

fn parse_list(v: &str, key: &str) -> Result<Vec<f64>> {
    v.split_whitespace().map(|t| parse_f64(t, key)).collect()
}

impl ExperimentConfig {
    /// Parse the flat config format; unknown keys are an error so typos
    /// never silently fall back to defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        let mut section = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if line.starts_with('[') && line.ends_with(']') {
                section = line[1..line.len() - 1].trim().to_string();
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                FracError::InvalidParameter(format!("line {}: expected key = value", lineno + 1))
            })?;
            let key = key.trim();
            let value = value.trim();
            cfg.apply(&section, key, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply(&mut self, section: &str, key: &str, value: &str) -> Result<()> {
        let full = if section.is_empty() {
            key.to_string()
        } else {
            format!("{section}.{key}")
        };
        match full.as_str() {
            "experiment.algorithm" => self.algorithm = Algorithm::parse(value)?,
            "experiment.label" => self.label = value.to_string(),
            "problem.order" | "run.orders" => self.orders = parse_list(value, &full)?,
            "problem.t_end" => self.t_end = parse_f64(value, &full)?,
            "problem.domain" => {
                let v = parse_list(value, &full)?;
                if v.len() != 2 {
                    return Err(FracError::InvalidParameter("domain needs two numbers".into()));
                }
                self.domain = (v[0], v[1]);
            }
            "problem.forcing" => self.forcing = value.to_string(),
            "problem.initial" => self.initial = value.to_string(),
            "problem.domain_y" => {
                let v = parse_list(value, &full)?;
                if v.len() != 2 {
                    return Err(FracError::InvalidParameter("domain_y needs two numbers".into()));
                }
                self.domain_y = (v[0], v[1]);
            }
            "problem.split" => self.split = parse_f64(value, &full)?,
            "problem.dy" => self.dy = parse_f64(value, &full)?,
            "decomposition.breakpoints" => self.breakpoints = parse_list(value, &full)?,
            "decomposition.kappa" => self.kappa = parse_list(value, &full)?,
            "decomposition.dx" => self.dx = parse_list(value, &full)?,
            "theta.policy" => match value {
                "optimal" => self.theta = ThetaPolicy::Optimal,
                "fixed" => {
                    if !matches!(self.theta, ThetaPolicy::Fixed(_)) {
                        self.theta = ThetaPolicy::Fixed(Vec::new());
                    }
                }
                "sweep" => {
                    if !matches!(self.theta, ThetaPolicy::Sweep { .. }) {
                        self.theta = ThetaPolicy::Sweep { count: 9 };
                    }
                }
                _ => {
                    return Err(FracError::InvalidParameter(format!(
                        "unknown theta policy `{value}`"
                    )))
                }
            },
            "theta.values" => self.theta = ThetaPolicy::Fixed(parse_list(value, &full)?),
            "theta.sweep_count" => {
                let count = value.parse().map_err(|_| {
                    FracError::InvalidParameter("sweep_count must be an integer".into())
                })?;
                self.theta = ThetaPolicy::Sweep { count };
            }
            "mesh.steps" => {
                self.steps = value.parse().map_err(|_| {
                    FracError::InvalidParameter("steps must be an integer".into())
                })?;
            }
            "mesh.grading" => {
                self.grading = if value == "auto" {
                    Grading::Auto
                } else {
                    Grading::Fixed(parse_f64(value, &full)?)
                };
            }
            "run.k_max" => {
                self.k_max = value.parse().map_err(|_| {
                    FracError::InvalidParameter("k_max must be an integer".into())
                })?;
            }
            "run.tol" => self.tol = parse_f64(value, &full)?,
            "run.bound_overlay" => {
                self.bound_overlay = value == "true" || value == "1" || value == "on";
            }
            "run.workers" => {
                self.workers = value.parse().map_err(|_| {
                    FracError::InvalidParameter("workers must be an integer".into())
                })?;
            }
            _ => {
                return Err(FracError::InvalidParameter(format!("unknown config key `{full}`")));
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.orders.is_empty() {
            return Err(FracError::InvalidParameter("empty fractional-order sweep".into()));
        }
        for o in &self.orders {
            if !(*o > 0.0 && *o < 2.0) {
                return Err(FracError::InvalidParameter(format!(
                    "order 2nu must lie in (0,2), got {o}"
                )));
            }
        }
        if let ThetaPolicy::Sweep { count } = self.theta {
            if count == 0 {
                return Err(FracError::InvalidParameter("empty theta sweep".into()));
            }
        }
        if let ThetaPolicy::Fixed(v) = &self.theta {
            if v.is_empty() {
                return Err(FracError::InvalidParameter("theta.values missing".into()));
            }
            if v.iter().any(|t| !(*t > 0.0 && *t <= 1.0)) {
                return Err(FracError::InvalidParameter("theta must lie in (0,1]".into()));
            }
        }
        if self.algorithm != Algorithm::Nnwr2d {
            let n = self.breakpoints.len().saturating_sub(1);
            if n < 2 || self.kappa.len() != n || self.dx.len() != n {
                return Err(FracError::InvalidParameter(
                    "breakpoints/kappa/dx lists are inconsistent".into(),
                ));
            }
        } else if !(self.split > self.domain.0 && self.split < self.domain.1) {
            return Err(FracError::InvalidParameter("split outside the domain".into()));
        }
        if !(self.t_end > 0.0) || self.steps == 0 || !(self.tol > 0.0) || self.k_max == 0 {
            return Err(FracError::InvalidParameter("bad mesh/run parameters".into()));
        }
        Ok(())
    }

    /// Serialize back to the flat format; `parse(render())` round-trips.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "[experiment]");
        let _ = writeln!(s, "algorithm = {}", self.algorithm.name());
        let _ = writeln!(s, "label = {}", self.label);
        let _ = writeln!(s, "[problem]");
        let list = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        let _ = writeln!(s, "t_end = {}", self.t_end);
        let _ = writeln!(s, "domain = {} {}", self.domain.0, self.domain.1);
        let _ = writeln!(s, "forcing = {}", self.forcing);
        let _ = writeln!(s, "initial = {}", self.initial);
        if self.algorithm == Algorithm::Nnwr2d {
            let _ = writeln!(s, "domain_y = {} {}", self.domain_y.0, self.domain_y.1);
            let _ = writeln!(s, "split = {}", self.split);
            let _ = writeln!(s, "dy = {}", self.dy);
        }
        let _ = writeln!(s, "[decomposition]");
        let _ = writeln!(s, "breakpoints = {}", list(&self.breakpoints));
        let _ = writeln!(s, "kappa = {}", list(&self.kappa));
        let _ = writeln!(s, "dx = {}", list(&self.dx));
        let _ = writeln!(s, "[theta]");
        match &self.theta {
            ThetaPolicy::Optimal => {
                let _ = writeln!(s, "policy = optimal");
            }
            ThetaPolicy::Fixed(v) => {
                let _ = writeln!(s, "policy = fixed");
                let _ = writeln!(s, "values = {}", list(v));
            }
            ThetaPolicy::Sweep { count } => {
                let _ = writeln!(s, "policy = sweep");
                let _ = writeln!(s, "sweep_count = {count}");
            }
        }
        let _ = writeln!(s, "[mesh]");
        let _ = writeln!(s, "steps = {}", self.steps);
        match self.grading {
            Grading::Auto => {
                let _ = writeln!(s, "grading = auto");
            }
            Grading::Fixed(r) => {
                let _ = writeln!(s, "grading = {r}");
            }
        }
        let _ = writeln!(s, "[run]");
        let _ = writeln!(s, "orders = {}", list(&self.orders));
        let _ = writeln!(s, "k_max = {}", self.k_max);
        let _ = writeln!(s, "tol = {}", self.tol);
        let _ = writeln!(s, "bound_overlay = {}", self.bound_overlay);
        let _ = writeln!(s, "workers = {}", self.workers);
        s
    }

    /// Flat echo of every key for the run manifest.
    pub fn manifest_entries(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        for line in self.render().lines() {
            if let Some((k, v)) = line.split_once('=') {
                m.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
        m
    }
}
