//! Experiment configuration: a sectioned TOML file whose unset entries fall
//! back to the per-test defaults of the one-dimensional suite.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::basis::{BasisFamily, BasisSpec};
use crate::dec::DecVariant;
use crate::error::{Error, Result};
use crate::physics::{Bathymetry, PhysParams, DEFAULT_ENTROPY_FIX, GRAVITY};
use crate::simulation::SteadyStop;
use crate::space::SpaceScheme;
use crate::stabilization::{default_deltas, StabParams, StabScheme};
use crate::steady::SteadyData;

pub const DOMAIN: (f64, f64) = (0.0, 25.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestCase {
    Lake,
    Super,
    Sub,
    Trans,
    PerturbLake,
    PerturbSuper,
    PerturbSub,
    PerturbTrans,
}

impl TestCase {
    pub const ALL: [TestCase; 8] = [
        TestCase::Lake,
        TestCase::Super,
        TestCase::Sub,
        TestCase::Trans,
        TestCase::PerturbLake,
        TestCase::PerturbSuper,
        TestCase::PerturbSub,
        TestCase::PerturbTrans,
    ];

    pub fn parse(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace('_', "-");
        TestCase::ALL
            .into_iter()
            .find(|t| t.name() == key)
            .ok_or_else(|| Error::Config(format!("unknown test '{s}'")))
    }

    pub fn name(self) -> &'static str {
        match self {
            TestCase::Lake => "lake",
            TestCase::Super => "super",
            TestCase::Sub => "sub",
            TestCase::Trans => "trans",
            TestCase::PerturbLake => "perturb-lake",
            TestCase::PerturbSuper => "perturb-super",
            TestCase::PerturbSub => "perturb-sub",
            TestCase::PerturbTrans => "perturb-trans",
        }
    }

    pub fn is_perturbation(self) -> bool {
        matches!(
            self,
            TestCase::PerturbLake | TestCase::PerturbSuper | TestCase::PerturbSub | TestCase::PerturbTrans
        )
    }

    /// Steady state underlying the test.
    pub fn steady_data(self, eta: f64) -> SteadyData {
        match self {
            TestCase::Lake | TestCase::PerturbLake => SteadyData::LakeAtRest { eta },
            TestCase::Super | TestCase::PerturbSuper => SteadyData::Supercritical { q: 24.0, h_left: 2.0 },
            TestCase::Sub | TestCase::PerturbSub => SteadyData::Subcritical { q: 4.42, h_right: 2.0 },
            TestCase::Trans | TestCase::PerturbTrans => SteadyData::Transcritical { q: 1.53 },
        }
    }

    /// Smooth bottom for the convergence tests, the C⁰ one elsewhere.
    pub fn default_bathymetry(self) -> Bathymetry {
        match self {
            TestCase::Super | TestCase::Sub | TestCase::Trans => Bathymetry::SmoothBump,
            _ => Bathymetry::C0Parabola,
        }
    }

    pub fn default_t_final(self) -> f64 {
        match self {
            TestCase::Lake => 10.0,
            TestCase::Super | TestCase::Sub | TestCase::Trans => 100.0,
            TestCase::PerturbSuper => 1.0,
            TestCase::PerturbLake | TestCase::PerturbSub | TestCase::PerturbTrans => 1.5,
        }
    }

    pub fn default_amplitude(self) -> f64 {
        match self {
            TestCase::PerturbSub | TestCase::PerturbTrans => 5e-4,
            _ => 5e-5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseSection {
    pub test: TestCase,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bathymetry: Option<Bathymetry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_final: Option<f64>,
    #[serde(default = "default_gravity")]
    pub gravity: f64,
    /// Manning coefficient `n_M`.
    #[serde(default)]
    pub friction: f64,
    /// Lake-at-rest level `η̄`.
    #[serde(default = "default_eta")]
    pub eta: f64,
    /// Early stop once the solution stops changing.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steady_stop: Option<SteadyStop>,
}

fn default_gravity() -> f64 {
    GRAVITY
}

fn default_eta() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscretizationSection {
    pub basis: BasisFamily,
    pub degree: usize,
    /// One mesh, or a refinement list for convergence studies.
    pub elems: Vec<usize>,
    pub scheme: SpaceScheme,
    pub stab: StabScheme,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cfl: Option<f64>,
    #[serde(default = "default_variant")]
    pub variant: DecVariant,
    /// DeC iteration count; `degree + 1` when unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
}

fn default_variant() -> DecVariant {
    DecVariant::BDeCu
}

impl Default for TimeSection {
    fn default() -> Self {
        TimeSection { cfl: None, variant: default_variant(), iterations: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(default = "default_center")]
    pub center: f64,
    #[serde(default = "default_half_width")]
    pub half_width: f64,
    /// Number of η snapshots written over the run.
    #[serde(default = "default_snapshots")]
    pub snapshots: usize,
}

fn default_center() -> f64 {
    6.0
}

fn default_half_width() -> f64 {
    0.5
}

fn default_snapshots() -> usize {
    10
}

impl Default for PerturbationSection {
    fn default() -> Self {
        PerturbationSection {
            amplitude: None,
            center: default_center(),
            half_width: default_half_width(),
            snapshots: default_snapshots(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub case: CaseSection,
    pub discretization: DiscretizationSection,
    #[serde(default)]
    pub time: TimeSection,
    #[serde(default)]
    pub perturbation: PerturbationSection,
    #[serde(default)]
    pub output: OutputSection,
}

impl ExperimentConfig {
    /// Paper-default configuration for `test` on one mesh.
    pub fn new(
        test: TestCase,
        basis: BasisFamily,
        degree: usize,
        n_elem: usize,
        scheme: SpaceScheme,
        stab: StabScheme,
    ) -> Self {
        ExperimentConfig {
            case: CaseSection {
                test,
                bathymetry: None,
                t_final: None,
                gravity: GRAVITY,
                friction: 0.0,
                eta: default_eta(),
                steady_stop: None,
            },
            discretization: DiscretizationSection {
                basis,
                degree,
                elems: vec![n_elem],
                scheme,
                stab,
                delta1: None,
                delta2: None,
            },
            time: TimeSection::default(),
            perturbation: PerturbationSection::default(),
            output: OutputSection::default(),
        }
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Internal(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.spec()?;
        self.phys()?;
        self.stab_params().validate()?;
        self.bathymetry().validate()?;
        let d = &self.discretization;
        if d.elems.is_empty() || d.elems.iter().any(|&n| n < 2) {
            return Err(Error::Config("every mesh needs at least two elements".into()));
        }
        if !(self.t_final() > 0.0) {
            return Err(Error::Config(format!("final time must be positive, got {}", self.t_final())));
        }
        if !(self.cfl() > 0.0) {
            return Err(Error::Config(format!("CFL must be positive, got {}", self.cfl())));
        }
        if self.iterations() == 0 {
            return Err(Error::Config("at least one DeC iteration is required".into()));
        }
        if !(self.case.eta > 0.0) {
            return Err(Error::Config(format!("lake level must be positive, got {}", self.case.eta)));
        }
        if self.perturbation.half_width <= 0.0 {
            return Err(Error::Config("perturbation half width must be positive".into()));
        }
        if let Some(s) = self.case.steady_stop {
            if !(s.tol > 0.0 && s.window >= 0.0) {
                return Err(Error::Config("steady stop needs tol > 0 and window ≥ 0".into()));
            }
        }
        Ok(())
    }

    pub fn spec(&self) -> Result<BasisSpec> {
        BasisSpec::new(self.discretization.basis, self.discretization.degree)
    }

    pub fn phys(&self) -> Result<PhysParams> {
        PhysParams::new(self.case.gravity, self.case.friction)
    }

    pub fn bathymetry(&self) -> Bathymetry {
        self.case.bathymetry.clone().unwrap_or_else(|| self.case.test.default_bathymetry())
    }

    pub fn t_final(&self) -> f64 {
        self.case.t_final.unwrap_or_else(|| self.case.test.default_t_final())
    }

    /// 0.1, or 0.05 for degree-4 bases, unless set.
    pub fn cfl(&self) -> f64 {
        self.time.cfl.unwrap_or(if self.discretization.degree == 4 { 0.05 } else { 0.1 })
    }

    pub fn iterations(&self) -> usize {
        self.time.iterations.unwrap_or(self.discretization.degree + 1)
    }

    pub fn amplitude(&self) -> f64 {
        self.perturbation.amplitude.unwrap_or_else(|| self.case.test.default_amplitude())
    }

    pub fn stab_params(&self) -> StabParams {
        let d = &self.discretization;
        let (d1, d2) = default_deltas(d.degree);
        StabParams {
            scheme: d.stab,
            delta1: d.delta1.unwrap_or(d1),
            delta2: d.delta2.unwrap_or(d2),
            entropy_fix: DEFAULT_ENTROPY_FIX,
        }
    }

    pub fn steady_data(&self) -> SteadyData {
        self.case.test.steady_data(self.case.eta)
    }
}
