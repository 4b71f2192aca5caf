use anyhow::{bail, Context};
use bifurcata::nonlinearity::{GKernel, Nonlinearity};
use bifurcata::quadrature::PhaseIntegrator;
use bifurcata::shooting::ShootingContext;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum NonlinearityName {
    Cubic,
    Sine,
    Custom,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Problem {
    pub nonlinearity: NonlinearityName,
    /// monomial coefficients c₀, c₁, … of a custom odd polynomial
    pub coefficients: Vec<f64>,
    pub a: f64,
    pub k_max: usize,
    pub lambda_max: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grids {
    /// amplitude samples per primary branch
    pub beta_points: usize,
    /// samples of the Q_β sign scan on each odd branch
    pub scan_points: usize,
    /// intervals per outer subinterval for spectra
    pub spectrum_nodes: usize,
    /// the same for Morse indices along diagram branches
    pub diagram_spectrum_nodes: usize,
    /// nodes per half-interval for profiles
    pub profile_nodes: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub quadrature_rel: f64,
    pub quadrature_abs: f64,
    /// initial continuation step in units of β₀
    pub secondary_step: f64,
    pub secondary_steps: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Output {
    pub dir: PathBuf,
    pub json: bool,
    pub svg: bool,
    /// Morse indices along the diagram branches
    pub morse: bool,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub problem: Problem,
    pub grids: Grids,
    pub tolerances: Tolerances,
    pub output: Output,
}

impl Default for Problem {
    fn default() -> Self {
        Problem {
            nonlinearity: NonlinearityName::Cubic,
            coefficients: Vec::new(),
            a: 1.0,
            k_max: 2,
            lambda_max: 15.0,
        }
    }
}

impl Default for Grids {
    fn default() -> Self {
        Grids {
            beta_points: 200,
            scan_points: 400,
            spectrum_nodes: 2000,
            diagram_spectrum_nodes: 400,
            profile_nodes: 201,
        }
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            quadrature_rel: 1e-11,
            quadrature_abs: 1e-14,
            secondary_step: 1e-3,
            secondary_steps: 400,
        }
    }
}

impl Default for Output {
    fn default() -> Self {
        Output {
            dir: PathBuf::from("out"),
            json: true,
            svg: true,
            morse: false,
        }
    }
}

impl Config {
    pub fn load(path: &Path) -> anyhow::Result<Config> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        let p = &self.problem;
        if !(p.a > 0.0 && p.a.is_finite()) {
            bail!("problem.a must be positive, got {}", p.a);
        }
        if !(p.lambda_max > 0.0 && p.lambda_max.is_finite()) {
            bail!("problem.lambda_max must be positive, got {}", p.lambda_max);
        }
        if p.k_max == 0 {
            bail!("problem.k_max must be at least 1");
        }
        if p.nonlinearity == NonlinearityName::Custom && p.coefficients.is_empty() {
            bail!("custom nonlinearity needs problem.coefficients");
        }
        let g = &self.grids;
        if g.beta_points < 2 || g.scan_points < 10 || g.spectrum_nodes < 10 || g.diagram_spectrum_nodes < 10 || g.profile_nodes < 2 {
            bail!("grid sizes too small: {g:?}");
        }
        let t = &self.tolerances;
        if !(t.quadrature_rel > 0.0 && t.quadrature_abs >= 0.0 && t.secondary_step > 0.0) {
            bail!("tolerances must be positive: {t:?}");
        }
        Ok(())
    }

    /// The configured nonlinearity, shape-checked.
    pub fn nonlinearity(&self) -> anyhow::Result<Nonlinearity> {
        Ok(match self.problem.nonlinearity {
            NonlinearityName::Cubic => Nonlinearity::cubic(),
            NonlinearityName::Sine => Nonlinearity::sine(),
            NonlinearityName::Custom => Nonlinearity::polynomial(&self.problem.coefficients)?,
        })
    }

    pub fn context(&self) -> anyhow::Result<ShootingContext> {
        let gk = GKernel::new(self.nonlinearity()?)?;
        let pi = PhaseIntegrator::new(gk).with_tolerances(self.tolerances.quadrature_rel, self.tolerances.quadrature_abs);
        Ok(ShootingContext::with_integrator(pi, self.problem.a)?)
    }
}
