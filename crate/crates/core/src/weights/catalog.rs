//! Named weight constructors, as used by the configuration files, and the
//! reference catalog of admissible weights plus inadmissible controls.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{Weight, WeightKind};
use crate::cone::ConvexCone;
use crate::error::{Error, Result};

/// Serializable description of a weight; `tag` selects the family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightSpec {
    Constant,
    Monomial {
        exponents: Vec<f64>,
    },
    Distance {
        alpha: f64,
    },
    PMean {
        p: f64,
        coeffs: Vec<f64>,
        alpha: f64,
    },
    HarmonicMean {
        r: f64,
        coeffs: Vec<f64>,
        alpha: f64,
    },
    MinCoordinate {
        coeffs: Vec<f64>,
        alpha: f64,
    },
    Lorentz {
        lambdas: Vec<f64>,
        alpha: f64,
    },
    SigmaK {
        k: usize,
        alpha: f64,
    },
    SigmaRatio {
        k: usize,
        l: usize,
        alpha: f64,
    },
    SubsetSums {
        r: usize,
        alpha: f64,
    },
    LogarithmicMean {
        alpha: f64,
    },
    IdentricMean {
        alpha: f64,
    },
    PlanarProduct {
        a: f64,
        b: f64,
        p: f64,
    },
    Radial {
        alpha: f64,
    },
    Product {
        factors: Vec<ProductFactor>,
    },
    PowerMean {
        first: Box<WeightSpec>,
        second: Box<WeightSpec>,
        r: f64,
        alpha: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProductFactor {
    pub weight: WeightSpec,
    pub exponent: f64,
}

impl WeightSpec {
    pub fn tag(&self) -> &'static str {
        match self {
            WeightSpec::Constant => "constant",
            WeightSpec::Monomial { .. } => "monomial",
            WeightSpec::Distance { .. } => "distance",
            WeightSpec::PMean { .. } => "p_mean",
            WeightSpec::HarmonicMean { .. } => "harmonic_mean",
            WeightSpec::MinCoordinate { .. } => "min_coordinate",
            WeightSpec::Lorentz { .. } => "lorentz",
            WeightSpec::SigmaK { .. } => "sigma_k",
            WeightSpec::SigmaRatio { .. } => "sigma_ratio",
            WeightSpec::SubsetSums { .. } => "subset_sums",
            WeightSpec::LogarithmicMean { .. } => "logarithmic_mean",
            WeightSpec::IdentricMean { .. } => "identric_mean",
            WeightSpec::PlanarProduct { .. } => "planar_product",
            WeightSpec::Radial { .. } => "radial",
            WeightSpec::Product { .. } => "product",
            WeightSpec::PowerMean { .. } => "power_mean",
        }
    }

    /// Build the weight on `cone`.
    pub fn build(&self, cone: &ConvexCone) -> Result<Weight> {
        let c = cone.clone();
        let tag = self.tag();
        match self {
            WeightSpec::Constant => Ok(Weight::constant(c)),
            WeightSpec::Monomial { exponents } => Weight::monomial(exponents.clone(), c),
            WeightSpec::Distance { alpha } => {
                Weight::new(WeightKind::DistancePower, *alpha, c, tag)
            }
            WeightSpec::PMean { p, coeffs, alpha } => Weight::new(
                WeightKind::PMean {
                    p: *p,
                    coeffs: coeffs.clone(),
                },
                *alpha,
                c,
                tag,
            ),
            WeightSpec::HarmonicMean { r, coeffs, alpha } => Weight::new(
                WeightKind::HarmonicMean {
                    r: *r,
                    coeffs: coeffs.clone(),
                },
                *alpha,
                c,
                tag,
            ),
            WeightSpec::MinCoordinate { coeffs, alpha } => Weight::new(
                WeightKind::MinCoordinate {
                    coeffs: coeffs.clone(),
                },
                *alpha,
                c,
                tag,
            ),
            WeightSpec::Lorentz { lambdas, alpha } => Weight::new(
                WeightKind::Lorentz {
                    lambdas: lambdas.clone(),
                },
                *alpha,
                c,
                tag,
            ),
            WeightSpec::SigmaK { k, alpha } => {
                Weight::new(WeightKind::SigmaK { k: *k }, *alpha, c, tag)
            }
            WeightSpec::SigmaRatio { k, l, alpha } => {
                Weight::new(WeightKind::SigmaRatio { k: *k, l: *l }, *alpha, c, tag)
            }
            WeightSpec::SubsetSums { r, alpha } => {
                Weight::new(WeightKind::SubsetSums { r: *r }, *alpha, c, tag)
            }
            WeightSpec::LogarithmicMean { alpha } => {
                Weight::new(WeightKind::LogarithmicMean, *alpha, c, tag)
            }
            WeightSpec::IdentricMean { alpha } => {
                Weight::new(WeightKind::IdentricMean, *alpha, c, tag)
            }
            WeightSpec::PlanarProduct { a, b, p } => Weight::new(
                WeightKind::PlanarProduct {
                    a: *a,
                    b: *b,
                    p: *p,
                },
                0.0,
                c,
                tag,
            ),
            WeightSpec::Radial { alpha } => Weight::new(WeightKind::Radial, *alpha, c, tag),
            WeightSpec::Product { factors } => {
                let built = factors
                    .iter()
                    .map(|f| Ok((f.weight.build(cone)?, f.exponent)))
                    .collect::<Result<Vec<_>>>()?;
                Weight::new(WeightKind::Product { factors: built }, 0.0, c, tag)
            }
            WeightSpec::PowerMean {
                first,
                second,
                r,
                alpha,
            } => Weight::new(
                WeightKind::PowerMean {
                    first: Box::new(first.build(cone)?),
                    second: Box::new(second.build(cone)?),
                    r: *r,
                },
                *alpha,
                c,
                tag,
            ),
        }
    }
}

/// A catalog weight with its reference cone and expected verdict.
#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub tag: String,
    pub spec: WeightSpec,
    pub weight: Weight,
    pub admissible: bool,
}

fn entry(tag: &str, spec: WeightSpec, cone: ConvexCone, admissible: bool) -> CatalogEntry {
    let weight = spec
        .build(&cone)
        .unwrap_or_else(|e| panic!("catalog entry {tag} is invalid: {e}"))
        .with_tag(tag);
    CatalogEntry {
        tag: tag.to_string(),
        spec,
        weight,
        admissible,
    }
}

/// Reference admissible weights in dimensions 2 and 3.
pub fn catalog() -> Vec<CatalogEntry> {
    let q2 = || ConvexCone::orthant(2).expect("orthant");
    let q3 = || ConvexCone::orthant(3).expect("orthant");
    let upper = || ConvexCone::half_space(&[0.0, 1.0]).expect("half-plane");
    let light = || ConvexCone::sector(0.5 * PI, 0.0).expect("sector");
    let wedge = || ConvexCone::sector(PI / 3.0, PI / 3.0).expect("sector");
    use WeightSpec as S;
    vec![
        entry(
            "constant_plane",
            S::Constant,
            ConvexCone::full_space(2).expect("R^2"),
            true,
        ),
        entry("constant_wedge", S::Constant, wedge(), true),
        entry(
            "monomial_11",
            S::Monomial {
                exponents: vec![1.0, 1.0],
            },
            q2(),
            true,
        ),
        entry(
            "monomial_05_2",
            S::Monomial {
                exponents: vec![0.5, 2.0],
            },
            q2(),
            true,
        ),
        entry(
            "monomial_111",
            S::Monomial {
                exponents: vec![1.0, 1.0, 1.0],
            },
            q3(),
            true,
        ),
        entry(
            "distance_half_plane",
            S::Distance { alpha: 1.0 },
            upper(),
            true,
        ),
        entry(
            "distance_half_plane_sqrt",
            S::Distance { alpha: 0.5 },
            upper(),
            true,
        ),
        entry("distance_octant", S::Distance { alpha: 2.0 }, q3(), true),
        entry("distance_wedge", S::Distance { alpha: 1.5 }, wedge(), true),
        entry(
            "p_mean",
            S::PMean {
                p: 2.0,
                coeffs: vec![1.0, 1.0],
                alpha: 1.5,
            },
            q2(),
            true,
        ),
        entry(
            "harmonic_mean",
            S::HarmonicMean {
                r: 1.0,
                coeffs: vec![1.0, 2.0, 1.0],
                alpha: 1.0,
            },
            q3(),
            true,
        ),
        entry(
            "min_coordinate",
            S::MinCoordinate {
                coeffs: vec![1.0, 2.0],
                alpha: 1.0,
            },
            q2(),
            true,
        ),
        entry(
            "lorentz",
            S::Lorentz {
                lambdas: vec![1.0],
                alpha: 1.0,
            },
            light(),
            true,
        ),
        entry("sigma_2", S::SigmaK { k: 2, alpha: 2.0 }, q3(), true),
        entry(
            "sigma_ratio_12",
            S::SigmaRatio {
                k: 1,
                l: 2,
                alpha: 1.0,
            },
            q3(),
            true,
        ),
        entry(
            "sigma_ratio_13",
            S::SigmaRatio {
                k: 1,
                l: 3,
                alpha: 2.0,
            },
            q3(),
            true,
        ),
        entry(
            "subset_sums",
            S::SubsetSums { r: 2, alpha: 1.0 },
            q3(),
            true,
        ),
        entry(
            "logarithmic_mean",
            S::LogarithmicMean { alpha: 1.0 },
            q2(),
            true,
        ),
        entry("identric_mean", S::IdentricMean { alpha: 2.0 }, q2(), true),
        entry(
            "planar_product",
            S::PlanarProduct {
                a: 0.0,
                b: 1.0,
                p: 2.0,
            },
            q2(),
            true,
        ),
        entry(
            "planar_product_neg",
            S::PlanarProduct {
                a: 0.5,
                b: 0.0,
                p: -0.5,
            },
            q2(),
            true,
        ),
        entry(
            "product",
            S::Product {
                factors: vec![
                    ProductFactor {
                        weight: S::Distance { alpha: 1.0 },
                        exponent: 1.0,
                    },
                    ProductFactor {
                        weight: S::LogarithmicMean { alpha: 1.0 },
                        exponent: 0.5,
                    },
                ],
            },
            q2(),
            true,
        ),
        entry(
            "power_mean",
            S::PowerMean {
                first: Box::new(S::Monomial {
                    exponents: vec![1.0, 1.0],
                }),
                second: Box::new(S::PMean {
                    p: 2.0,
                    coeffs: vec![1.0, 0.5],
                    alpha: 1.0,
                }),
                r: 0.5,
                alpha: 1.0,
            },
            q2(),
            true,
        ),
    ]
}

/// Weights whose `w^{1/α}` is not concave on the given cone.
pub fn controls() -> Vec<CatalogEntry> {
    let plane = || ConvexCone::full_space(2).expect("R^2");
    vec![
        entry(
            "radial_2",
            WeightSpec::Radial { alpha: 2.0 },
            plane(),
            false,
        ),
        entry(
            "radial_1",
            WeightSpec::Radial { alpha: 1.0 },
            plane(),
            false,
        ),
    ]
}

/// Look up a catalog or control entry by tag.
pub fn lookup(tag: &str) -> Result<CatalogEntry> {
    catalog()
        .into_iter()
        .chain(controls())
        .find(|e| e.tag == tag)
        .ok_or_else(|| Error::InvalidParameters(format!("unknown catalog tag '{tag}'")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_round_trips_through_toml() {
        for e in catalog() {
            let s = toml::to_string(&e.spec).unwrap();
            let back: WeightSpec = toml::from_str(&s).unwrap();
            assert_eq!(back, e.spec);
        }
    }

    #[test]
    fn degrees_are_as_declared() {
        let e = lookup("planar_product").unwrap();
        assert_eq!(e.weight.alpha(), 2.0);
        let e = lookup("product").unwrap();
        assert_eq!(e.weight.alpha(), 1.5);
        assert!(lookup("nope").is_err());
    }
}
