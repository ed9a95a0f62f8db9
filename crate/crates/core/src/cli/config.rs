//! TOML experiment configuration.
//!
//! Every section is decoded on its own so that a failure names the section
//! (and, through the decoder message, the key) that caused it.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::cone::{ConeKind, ConvexCone};
use crate::error::{Error, Result};
use crate::gauge::Gauge;
use crate::isoperimetry::PerturbationSpec;
use crate::measure::{Polytope, QuadratureMethod, QuadratureSpec, RegionRep};
use crate::weights::lookup;
use crate::weights::{Weight, WeightSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Identity,
    Quotient,
    Search,
    Abp,
    Wirtinger,
    Lift,
    Catalog,
}

impl Scenario {
    pub const ALL: [Scenario; 7] = [
        Scenario::Identity,
        Scenario::Quotient,
        Scenario::Search,
        Scenario::Abp,
        Scenario::Wirtinger,
        Scenario::Lift,
        Scenario::Catalog,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Identity => "identity",
            Scenario::Quotient => "quotient",
            Scenario::Search => "search",
            Scenario::Abp => "abp",
            Scenario::Wirtinger => "wirtinger",
            Scenario::Lift => "lift",
            Scenario::Catalog => "catalog",
        }
    }

    /// Whether the scenario draws random numbers regardless of quadrature.
    pub fn is_stochastic(&self) -> bool {
        matches!(
            self,
            Scenario::Search | Scenario::Lift | Scenario::Abp | Scenario::Catalog
        )
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::config("scenario", format!("unknown scenario '{s}'")))
    }
}

/// `[cone]`: `kind = "orthant"` with `dim`, or any [`ConeKind`] plus an
/// optional `dim` for `full_space`.
fn cone_from(v: &toml::Value) -> Result<ConvexCone> {
    let mut t = v
        .as_table()
        .cloned()
        .ok_or_else(|| Error::config("cone", "must be a table"))?;
    let dim = match t.remove("dim") {
        None => None,
        Some(d) => Some(
            d.as_integer()
                .filter(|d| *d >= 1)
                .ok_or_else(|| Error::config("cone.dim", "must be a positive integer"))?
                as usize,
        ),
    };
    let built = if t.get("kind").and_then(|k| k.as_str()) == Some("orthant") {
        if t.len() != 1 {
            return Err(Error::config("cone", "an orthant takes only `dim`"));
        }
        ConvexCone::orthant(dim.unwrap_or(2))
    } else {
        let kind: ConeKind = toml::Value::Table(t)
            .try_into()
            .map_err(|e: toml::de::Error| {
                Error::config("cone", e.to_string().trim_end().to_string())
            })?;
        ConvexCone::from_kind(kind, dim)
    };
    built.map_err(|e| Error::config("cone", e.to_string()))
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GaugeSpec {
    Euclidean,
    PNorm { p: f64 },
    Ellipsoidal { rows: Vec<Vec<f64>> },
    Support { points: Vec<Vec<f64>> },
}

impl GaugeSpec {
    pub fn build(&self, n: usize) -> Result<Gauge> {
        match self {
            GaugeSpec::Euclidean => Ok(Gauge::euclidean(n)),
            GaugeSpec::PNorm { p } => Gauge::p_norm(n, *p),
            GaugeSpec::Ellipsoidal { rows } => Gauge::ellipsoidal(rows),
            GaugeSpec::Support { points } => Gauge::support(points.clone()),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RegionSpec {
    /// `r W ∩ Σ` for the configured gauge.
    Wulff {
        #[serde(default = "one")]
        scale: f64,
    },
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    Polygon {
        vertices: Vec<Vec<f64>>,
    },
    Cuboid {
        lo: [f64; 3],
        hi: [f64; 3],
    },
    Polytope {
        vertices: Vec<Vec<f64>>,
        facets: Vec<Vec<usize>>,
    },
}

fn one() -> f64 {
    1.0
}

impl RegionSpec {
    pub fn build(&self, gauge: &Gauge) -> Result<RegionRep> {
        match self {
            RegionSpec::Wulff { scale } => RegionRep::wulff(gauge.clone(), *scale),
            RegionSpec::Ball { center, radius } => RegionRep::ball(center.clone(), *radius),
            RegionSpec::Polygon { vertices } => {
                Ok(RegionRep::Polytope(Polytope::polygon(vertices.clone())?))
            }
            RegionSpec::Cuboid { lo, hi } => Ok(RegionRep::Polytope(Polytope::cuboid(*lo, *hi)?)),
            RegionSpec::Polytope { vertices, facets } => Ok(RegionRep::Polytope(Polytope::new(
                vertices.clone(),
                facets.clone(),
            )?)),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentitySection {
    #[serde(default = "identity_tol")]
    pub tolerance: f64,
}

fn identity_tol() -> f64 {
    1e-6
}

impl Default for IdentitySection {
    fn default() -> Self {
        IdentitySection {
            tolerance: identity_tol(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SearchSection {
    pub trials: usize,
    pub perturbation: PerturbationSpec,
}

/// `[search]`: `trials` plus the keys of [`PerturbationSpec`].
fn search_from(v: &toml::Value) -> Result<SearchSection> {
    let mut t = v
        .as_table()
        .cloned()
        .ok_or_else(|| Error::config("search", "must be a table"))?;
    let trials = match t.remove("trials") {
        None => default_trials(),
        Some(n) => n
            .as_integer()
            .filter(|n| *n >= 1)
            .ok_or_else(|| Error::config("search.trials", "must be a positive integer"))?
            as usize,
    };
    let perturbation = toml::Value::Table(t)
        .try_into()
        .map_err(|e: toml::de::Error| {
            Error::config("search", e.to_string().trim_end().to_string())
        })?;
    Ok(SearchSection {
        trials,
        perturbation,
    })
}

fn default_trials() -> usize {
    200
}

impl Default for SearchSection {
    fn default() -> Self {
        SearchSection {
            trials: default_trials(),
            perturbation: PerturbationSpec::default(),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AbpSection {
    /// Grid spacings, one solve each.
    pub spacings: Vec<f64>,
    #[serde(default = "inclusion_samples")]
    pub inclusion_samples: usize,
    /// Compare against `|x|²/2` (the solution when `E` is a Wulff sector of
    /// the Euclidean gauge).
    #[serde(default)]
    pub reference_parabola: bool,
}

fn inclusion_samples() -> usize {
    400
}

impl Default for AbpSection {
    fn default() -> Self {
        AbpSection {
            spacings: vec![1.0 / 32.0],
            inclusion_samples: inclusion_samples(),
            reference_parabola: false,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "density", rename_all = "snake_case", deny_unknown_fields)]
pub enum WirtingerCase {
    /// `B ≡ 1` on `(0, β)`, `α = 0`.
    Constant {
        beta: f64,
        #[serde(default = "nodes")]
        nodes: usize,
    },
    /// `sin^α θ` on `(0, π)`.
    SinPower {
        alpha: f64,
        #[serde(default = "nodes")]
        nodes: usize,
    },
    /// Angular profile of the configured weight on a planar cone.
    Weight {
        #[serde(default = "nodes")]
        nodes: usize,
    },
}

fn nodes() -> usize {
    crate::wirtinger::DEFAULT_NODES
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WirtingerSection {
    pub cases: Vec<WirtingerCase>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LiftSection {
    pub epsilons: Vec<f64>,
    #[serde(default = "lift_samples")]
    pub samples: usize,
    /// Allowed relative gap of the normalized quotient at the last `ε`.
    #[serde(default = "lift_tol")]
    pub tolerance: f64,
}

fn lift_samples() -> usize {
    1_000_000
}

fn lift_tol() -> f64 {
    0.02
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalogSection {
    #[serde(default = "catalog_samples")]
    pub samples: usize,
}

fn catalog_samples() -> usize {
    2000
}

impl Default for CatalogSection {
    fn default() -> Self {
        CatalogSection {
            samples: catalog_samples(),
        }
    }
}

/// Decoded configuration. Optional parts are checked against the scenario
/// by [`ExperimentConfig::require_*`] accessors.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub scenario: Option<Scenario>,
    pub case_id: Option<String>,
    pub seed: Option<u64>,
    pub cone: Option<ConvexCone>,
    pub weight: Option<Weight>,
    pub gauge: Option<GaugeSpec>,
    pub region: Option<RegionSpec>,
    pub quadrature: QuadratureSpec,
    pub identity: IdentitySection,
    pub search: SearchSection,
    pub abp: AbpSection,
    pub wirtinger: Option<WirtingerSection>,
    pub lift: Option<LiftSection>,
    pub catalog: CatalogSection,
}

const SECTIONS: [&str; 14] = [
    "scenario",
    "case_id",
    "seed",
    "cone",
    "weight",
    "gauge",
    "region",
    "quadrature",
    "identity",
    "search",
    "abp",
    "wirtinger",
    "lift",
    "catalog",
];

fn section<T: DeserializeOwned>(table: &toml::Table, key: &str) -> Result<Option<T>> {
    match table.get(key) {
        None => Ok(None),
        Some(v) => v
            .clone()
            .try_into::<T>()
            .map(Some)
            .map_err(|e| Error::config(key, e.to_string().trim_end().to_string())),
    }
}

impl ExperimentConfig {
    /// Configuration with no sections, as used by `catalog` without a file.
    pub fn empty() -> Self {
        ExperimentConfig {
            scenario: None,
            case_id: None,
            seed: None,
            cone: None,
            weight: None,
            gauge: None,
            region: None,
            quadrature: QuadratureSpec::deterministic(1e-10),
            identity: IdentitySection::default(),
            search: SearchSection::default(),
            abp: AbpSection::default(),
            wirtinger: None,
            lift: None,
            catalog: CatalogSection::default(),
        }
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::config("--config", format!("cannot read {}: {e}", path.display()))
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| {
            Error::config("<file>", e.to_string().trim_end().to_string())
        })?;
        if let Some(k) = table.keys().find(|k| !SECTIONS.contains(&k.as_str())) {
            return Err(Error::config(k.clone(), "unknown key"));
        }
        let scenario = section::<String>(&table, "scenario")?
            .map(|s| s.parse::<Scenario>())
            .transpose()?;
        let seed = section::<i64>(&table, "seed")?
            .map(|s| {
                u64::try_from(s).map_err(|_| Error::config("seed", "must be a nonnegative integer"))
            })
            .transpose()?;
        let mut cone = table.get("cone").map(cone_from).transpose()?;
        let weight = match table.get("weight") {
            None => None,
            Some(v) => Some(Self::weight(v, &mut cone)?),
        };
        let quadrature = section::<QuadratureSpec>(&table, "quadrature")?
            .unwrap_or(QuadratureSpec::deterministic(1e-10));
        let cfg = ExperimentConfig {
            scenario,
            case_id: section(&table, "case_id")?,
            seed,
            cone,
            weight,
            gauge: section(&table, "gauge")?,
            region: section(&table, "region")?,
            quadrature,
            identity: section(&table, "identity")?.unwrap_or_default(),
            search: table
                .get("search")
                .map(search_from)
                .transpose()?
                .unwrap_or_default(),
            abp: section(&table, "abp")?.unwrap_or_default(),
            wirtinger: section(&table, "wirtinger")?,
            lift: section(&table, "lift")?,
            catalog: section(&table, "catalog")?.unwrap_or_default(),
        };
        Ok(cfg)
    }

    /// `[weight]` holds either `catalog = "<tag>"` or an inline spec.
    fn weight(v: &toml::Value, cone: &mut Option<ConvexCone>) -> Result<Weight> {
        if let Some(tag) = v.get("catalog") {
            let tag = tag
                .as_str()
                .ok_or_else(|| Error::config("weight.catalog", "must be a string"))?;
            if v.as_table().map_or(0, |t| t.len()) != 1 {
                return Err(Error::config(
                    "weight",
                    "`catalog` cannot be combined with other keys",
                ));
            }
            let entry = lookup(tag).map_err(|e| Error::config("weight.catalog", e.to_string()))?;
            return match cone {
                None => {
                    *cone = Some(entry.weight.cone().clone());
                    Ok(entry.weight)
                }
                Some(c) => entry
                    .spec
                    .build(c)
                    .map(|w| w.with_tag(tag))
                    .map_err(|e| Error::config("weight", e.to_string())),
            };
        }
        let spec: WeightSpec = v.clone().try_into().map_err(|e: toml::de::Error| {
            Error::config("weight", e.to_string().trim_end().to_string())
        })?;
        let c = cone
            .as_ref()
            .ok_or_else(|| Error::config("cone", "an inline weight needs a [cone] section"))?;
        spec.build(c)
            .map_err(|e| Error::config("weight", e.to_string()))
    }

    /// Apply `--seed` and check that stochastic runs have a seed.
    pub fn finalize(&mut self, scenario: Scenario, seed: Option<u64>) -> Result<()> {
        if let Some(s) = self.scenario {
            if s != scenario {
                return Err(Error::config(
                    "scenario",
                    format!("file is for '{s}', command line asks for '{scenario}'"),
                ));
            }
        }
        if seed.is_some() {
            self.seed = seed;
        }
        if let QuadratureMethod::MonteCarlo { seed: qs, .. } = &mut self.quadrature.method {
            if let Some(s) = self.seed {
                *qs = s;
            }
        }
        let mc = matches!(self.quadrature.method, QuadratureMethod::MonteCarlo { .. });
        if self.seed.is_none()
            && (mc || (scenario.is_stochastic() && scenario != Scenario::Catalog))
        {
            return Err(Error::config(
                "seed",
                format!("the '{scenario}' scenario is stochastic and needs a seed"),
            ));
        }
        Ok(())
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn case_id(&self, scenario: Scenario) -> String {
        self.case_id
            .clone()
            .unwrap_or_else(|| scenario.name().to_string())
    }

    pub fn require_cone(&self) -> Result<&ConvexCone> {
        self.cone
            .as_ref()
            .ok_or_else(|| Error::config("cone", "missing section"))
    }

    pub fn require_weight(&self) -> Result<&Weight> {
        let w = self
            .weight
            .as_ref()
            .ok_or_else(|| Error::config("weight", "missing section"))?;
        if w.dim() != self.require_cone()?.dim() {
            return Err(Error::config("weight", "dimension differs from the cone"));
        }
        Ok(w)
    }

    pub fn gauge(&self) -> Result<Gauge> {
        let n = self.require_cone()?.dim();
        let g = self
            .gauge
            .clone()
            .unwrap_or(GaugeSpec::Euclidean)
            .build(n)
            .map_err(|e| Error::config("gauge", e.to_string()))?;
        if g.dim() != n {
            return Err(Error::config("gauge", "dimension differs from the cone"));
        }
        Ok(g)
    }

    pub fn region(&self, gauge: &Gauge) -> Result<RegionRep> {
        let r = self
            .region
            .as_ref()
            .ok_or_else(|| Error::config("region", "missing section"))?
            .build(gauge)
            .map_err(|e| Error::config("region", e.to_string()))?;
        if r.dim() != self.require_cone()?.dim() {
            return Err(Error::config("region", "dimension differs from the cone"));
        }
        Ok(r)
    }
}
