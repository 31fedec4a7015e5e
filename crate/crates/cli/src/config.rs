//! TOML configuration files. Unknown keys are rejected everywhere.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Deserialize;
use wedgedg::mesh::generate::{hybrid_layered_box, DiagonalSplit, LayerSpec};
use wedgedg::mesh::{
    extrude_layer, family_mesh, load_mesh, load_surface, sixteen_wedge_mesh, structured_hybrid_box, HybridMesh,
    Medium, MeshFamily,
};
use wedgedg::operators::QuadratureMode;
use wedgedg::reference::MAX_DEGREE;
use wedgedg::solver::{FluxConfig, FluxMode, Integrator};
use wedgedg::{Error, Result};

/// Read and parse a config file. Parse failures carry the line and column.
pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MediumConfig {
    pub rho: f64,
    pub kappa: f64,
}

impl MediumConfig {
    fn to_medium(self, what: &str) -> Result<Medium> {
        if !(self.rho > 0.0 && self.kappa > 0.0 && self.rho.is_finite() && self.kappa.is_finite()) {
            return Err(Error::Config(format!(
                "{what}: rho and kappa must be positive and finite (got {} and {})",
                self.rho, self.kappa
            )));
        }
        Ok(Medium::new(self.rho, self.kappa))
    }
}

#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    #[default]
    Main,
    Anti,
}

impl From<Split> for DiagonalSplit {
    fn from(s: Split) -> Self {
        match s {
            Split::Main => DiagonalSplit::Main,
            Split::Anti => DiagonalSplit::Anti,
        }
    }
}

/// Layer interface `z + amplitude · sin(kx x) sin(ky y)`.
#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SurfaceConfig {
    pub z: f64,
    #[serde(default)]
    pub amplitude: f64,
    #[serde(default = "default_wavenumber")]
    pub wavenumber: [f64; 2],
}

fn default_wavenumber() -> [f64; 2] {
    [std::f64::consts::PI; 2]
}

impl SurfaceConfig {
    fn height(self) -> impl Fn(f64, f64) -> f64 {
        move |x, y| self.z + self.amplitude * (self.wavenumber[0] * x).sin() * (self.wavenumber[1] * y).sin()
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LayerConfig {
    pub bottom: SurfaceConfig,
    pub top: SurfaceConfig,
    #[serde(default = "one")]
    pub sublayers: usize,
    pub rho: f64,
    pub kappa: f64,
}

fn one() -> usize {
    1
}

/// Where the mesh comes from.
#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeshSpec {
    /// Built-in refinement family on `[-1, 1]^3`.
    Family {
        family: String,
        h: f64,
        seed: Option<u64>,
    },
    /// Mesh file in the native ASCII format.
    File { path: PathBuf },
    /// Surface file extruded into wedge sublayers.
    Surface {
        path: PathBuf,
        sublayers: usize,
        #[serde(default = "unit_medium")]
        medium: MediumConfig,
    },
    /// `[-1, 1]^3` with tet layers below wedge layers.
    HybridBox {
        nx: usize,
        ny: usize,
        wedge_layers: usize,
        tet_layers: usize,
        #[serde(default)]
        split: Split,
    },
    /// Layered wedge stack over an optional tet region.
    Layered {
        nx: usize,
        ny: usize,
        #[serde(default)]
        tet_layers: usize,
        #[serde(default)]
        split: Split,
        #[serde(default = "unit_medium")]
        tet_medium: MediumConfig,
        layers: Vec<LayerConfig>,
    },
    /// Randomly perturbed 16-wedge box used for spectra.
    SixteenWedge {
        #[serde(default = "default_amplitude")]
        amplitude: f64,
        #[serde(default = "default_spectrum_seed")]
        seed: u64,
    },
}

fn unit_medium() -> MediumConfig {
    MediumConfig { rho: 1.0, kappa: 1.0 }
}

fn default_amplitude() -> f64 {
    0.3
}

fn default_spectrum_seed() -> u64 {
    7
}

impl MeshSpec {
    /// Build the mesh; relative paths resolve against `base`.
    pub fn build(&self, base: &Path, default_seed: u64) -> Result<HybridMesh> {
        match self {
            MeshSpec::Family { family, h, seed } => {
                let family: MeshFamily = family.parse()?;
                family_mesh(family, *h, seed.unwrap_or(default_seed))
            }
            MeshSpec::File { path } => load_mesh(&existing(base, path)?),
            MeshSpec::Surface { path, sublayers, medium } => {
                let surface = load_surface(&existing(base, path)?)?;
                extrude_layer(&surface, *sublayers, medium.to_medium("mesh.medium")?)
            }
            MeshSpec::HybridBox { nx, ny, wedge_layers, tet_layers, split } => {
                structured_hybrid_box(*nx, *ny, *wedge_layers, *tet_layers, (*split).into())
            }
            MeshSpec::Layered { nx, ny, tet_layers, split, tet_medium, layers } => {
                let specs = layers
                    .iter()
                    .enumerate()
                    .map(|(k, l)| {
                        let medium = MediumConfig { rho: l.rho, kappa: l.kappa }.to_medium(&format!("mesh.layers[{k}]"))?;
                        Ok(LayerSpec {
                            bottom: Box::new(l.bottom.height()),
                            top: Box::new(l.top.height()),
                            layers: l.sublayers,
                            medium,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                hybrid_layered_box(*nx, *ny, *tet_layers, (*split).into(), tet_medium.to_medium("mesh.tet_medium")?, &specs)
            }
            MeshSpec::SixteenWedge { amplitude, seed } => sixteen_wedge_mesh(*amplitude, *seed),
        }
    }
}

fn existing(base: &Path, path: &Path) -> Result<PathBuf> {
    let p = if path.is_absolute() { path.to_path_buf() } else { base.join(path) };
    if p.exists() {
        Ok(p)
    } else {
        Err(Error::Config(format!("file {} does not exist", p.display())))
    }
}

/// Build the mesh and apply the optional uniform medium override.
pub fn build_mesh(spec: &MeshSpec, medium: Option<MediumConfig>, base: &Path, seed: u64) -> Result<HybridMesh> {
    let mut mesh = spec.build(base, seed)?;
    if let Some(m) = medium {
        let m = m.to_medium("medium")?;
        mesh.media.iter_mut().for_each(|x| *x = m);
    }
    Ok(mesh)
}

fn check_degree(field: &str, n: usize) -> Result<()> {
    if (1..=MAX_DEGREE).contains(&n) {
        Ok(())
    } else {
        Err(Error::Config(format!("{field} = {n} is outside the supported range 1..={MAX_DEGREE}")))
    }
}

fn check_positive(field: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("{field} must be positive and finite, got {x}")))
    }
}

/// `flux = "upwind" | "central" | "custom"`; custom needs `tau_p`, `tau_u`.
fn flux_config(flux: &str, tau_p: Option<f64>, tau_u: Option<f64>) -> Result<FluxConfig> {
    let mode = match (flux, tau_p, tau_u) {
        ("custom", Some(tau_p), Some(tau_u)) => FluxMode::Custom { tau_p, tau_u },
        ("custom", _, _) => return Err(Error::Config("flux = \"custom\" needs tau_p and tau_u".into())),
        (other, None, None) => other.parse()?,
        _ => return Err(Error::Config("tau_p and tau_u are only valid with flux = \"custom\"".into())),
    };
    FluxConfig::new(mode)
}

fn default_flux() -> String {
    "upwind".into()
}

fn default_quadrature() -> String {
    "exact".into()
}

fn default_integrator() -> String {
    "lserk4".into()
}

fn default_cfl() -> f64 {
    0.5
}

fn default_seed() -> u64 {
    1
}

fn default_output() -> PathBuf {
    PathBuf::from("output")
}

/// Initial condition of a `run`.
#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialCondition {
    /// Cosine standing wave; the run also reports its L² pressure error.
    StandingWave,
    /// Gaussian pressure pulse at rest.
    Gaussian { center: [f64; 3], width: f64 },
}

impl Default for InitialCondition {
    fn default() -> Self {
        InitialCondition::StandingWave
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mesh: MeshSpec,
    pub degree: usize,
    pub final_time: f64,
    #[serde(default = "default_flux")]
    pub flux: String,
    pub tau_p: Option<f64>,
    pub tau_u: Option<f64>,
    #[serde(default = "default_quadrature")]
    pub quadrature: String,
    #[serde(default = "default_integrator")]
    pub integrator: String,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    /// Fixed step; overrides `cfl`.
    pub dt: Option<f64>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    /// Write a VTK snapshot every this many steps (0: none).
    #[serde(default)]
    pub snapshot_every: usize,
    /// Log the energy every this many steps (0: first and last only).
    #[serde(default = "one")]
    pub energy_every: usize,
    #[serde(default)]
    pub initial: InitialCondition,
    pub medium: Option<MediumConfig>,
}

/// Validated run settings.
pub struct RunSettings {
    pub flux: FluxConfig,
    pub quadrature: QuadratureMode,
    pub integrator: Integrator,
}

impl RunConfig {
    pub fn validate(&self) -> Result<RunSettings> {
        check_degree("degree", self.degree)?;
        check_positive("final_time", self.final_time)?;
        check_positive("cfl", self.cfl)?;
        if let Some(dt) = self.dt {
            check_positive("dt", dt)?;
        }
        if let InitialCondition::Gaussian { width, .. } = self.initial {
            check_positive("initial.width", width)?;
        }
        Ok(RunSettings {
            flux: flux_config(&self.flux, self.tau_p, self.tau_u)?,
            quadrature: self.quadrature.parse()?,
            integrator: self.integrator.parse()?,
        })
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ConvergeConfig {
    pub families: Vec<String>,
    pub degrees: Vec<usize>,
    pub h: Vec<f64>,
    #[serde(default = "default_final_time")]
    pub final_time: f64,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(default = "default_flux")]
    pub flux: String,
    #[serde(default = "default_integrator")]
    pub integrator: String,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output: PathBuf,
}

fn default_final_time() -> f64 {
    1.0
}

impl ConvergeConfig {
    pub fn validate(&self) -> Result<(Vec<MeshFamily>, FluxConfig, Integrator)> {
        if self.families.is_empty() || self.degrees.is_empty() {
            return Err(Error::Config("families and degrees must not be empty".into()));
        }
        for &n in &self.degrees {
            check_degree("degrees", n)?;
        }
        if self.h.len() < 3 {
            return Err(Error::Config(format!("h needs at least 3 levels, got {}", self.h.len())));
        }
        check_positive("final_time", self.final_time)?;
        check_positive("cfl", self.cfl)?;
        let families = self.families.iter().map(|f| f.parse()).collect::<Result<Vec<MeshFamily>>>()?;
        Ok((families, flux_config(&self.flux, None, None)?, self.integrator.parse()?))
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SpectrumConfig {
    pub mesh: MeshSpec,
    pub degree: usize,
    #[serde(default = "default_flux")]
    pub flux: String,
    pub tau_p: Option<f64>,
    pub tau_u: Option<f64>,
    #[serde(default = "default_quadrature")]
    pub quadrature: String,
    /// Stability threshold on `max Re λ / max |λ|`.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    pub medium: Option<MediumConfig>,
}

fn default_tolerance() -> f64 {
    1e-10
}

impl SpectrumConfig {
    pub fn validate(&self) -> Result<(FluxConfig, QuadratureMode)> {
        check_degree("degree", self.degree)?;
        if !(self.tolerance >= 0.0) {
            return Err(Error::Config(format!("tolerance must be non-negative, got {}", self.tolerance)));
        }
        Ok((flux_config(&self.flux, self.tau_p, self.tau_u)?, self.quadrature.parse()?))
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    pub mesh: MeshSpec,
    pub output: PathBuf,
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub medium: Option<MediumConfig>,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub mesh: MeshSpec,
    pub degrees: Vec<usize>,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output: PathBuf,
}

fn default_steps() -> usize {
    200
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.degrees.is_empty() {
            return Err(Error::Config("degrees must not be empty".into()));
        }
        for &n in &self.degrees {
            check_degree("degrees", n)?;
        }
        if self.steps < 100 {
            return Err(Error::Config(format!("steps must be at least 100, got {}", self.steps)));
        }
        Ok(())
    }
}
