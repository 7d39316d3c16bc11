//! Building blocks shared by the subcommands and the pipeline.

use num_traits::Zero;
use okbody_core::degen::{build_family, build_family_from_sections, DegenerationFamily};
use okbody_core::exact::LatticeVector;
use okbody_core::linsys::{
    choose_gamma_for_basis, power_value_set, triangularize, GammaCertificate, ValuedBasis,
    ValuedSection,
};
use okbody_core::polytope::{delta_k, volume_gap, Polytope};
use okbody_core::scalar::{format_rat, rat, rat_pair};
use okbody_core::{Error, QPolytope, Rat};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::variety::{SeriesBundle, VarietySpec};

/// Independent seed for a named stage, derived from the config seed.
pub fn sub_seed(seed: u64, stream: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.next_u64()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValuationEntry {
    pub id: String,
    pub value: Vec<i64>,
    pub lead_coeff: String,
}

pub fn valuations(bundle: &SeriesBundle) -> CliResult<Vec<ValuationEntry>> {
    bundle
        .sections
        .iter()
        .map(|e| {
            let s = ValuedSection::new(e.id.clone(), e.series.clone())?;
            Ok(ValuationEntry {
                id: e.id.clone(),
                value: s.beta.0,
                lead_coeff: format_rat(&s.lead_coeff),
            })
        })
        .collect()
}

/// Sections as given, with their values (which may repeat).
pub fn raw_basis(bundle: &SeriesBundle) -> CliResult<ValuedBasis> {
    let sections = bundle
        .sections
        .iter()
        .map(|e| ValuedSection::new(e.id.clone(), e.series.clone()))
        .collect::<okbody_core::Result<Vec<_>>>()?;
    let values = sections.iter().map(|s| s.beta.clone()).collect();
    Ok(ValuedBasis { sections, values })
}

/// A basis with distinct values, produced at the spec's truncation order or
/// once more at twice that order when elimination cancels a member.
pub struct Reduced {
    pub bundle: SeriesBundle,
    pub basis: ValuedBasis,
    pub retried: bool,
}

pub fn reduce(spec: &VarietySpec, trunc: Option<u32>) -> CliResult<Reduced> {
    let d = trunc.unwrap_or(spec.trunc);
    let bundle = spec.expand(Some(d))?;
    match triangularize(&bundle.pairs()) {
        Ok(basis) => Ok(Reduced {
            bundle,
            basis,
            retried: false,
        }),
        Err(Error::LinearlyDependent { .. }) => {
            let bundle = spec.expand(Some(2 * d))?;
            let basis = triangularize(&bundle.pairs())?;
            Ok(Reduced {
                bundle,
                basis,
                retried: true,
            })
        }
        Err(e) => Err(e.into()),
    }
}

/// Gamma certificate together with the basis it was checked against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaFile {
    pub kind: String,
    #[serde(flatten)]
    pub certificate: GammaCertificate,
    pub basis: ValuedBasis,
}

pub fn gamma_file(basis: &ValuedBasis, bound: u32) -> CliResult<GammaFile> {
    Ok(GammaFile {
        kind: "gamma".into(),
        certificate: choose_gamma_for_basis(basis, bound)?,
        basis: basis.clone(),
    })
}

/// Family from a distinct-valued basis, or from raw sections when `raw`.
pub fn family(basis: &ValuedBasis, gamma: &[i64], raw: bool) -> CliResult<DegenerationFamily> {
    let g = LatticeVector(gamma.to_vec());
    let fam = if raw {
        let s: Vec<_> = basis
            .sections
            .iter()
            .map(|s| (s.id.clone(), s.series.clone()))
            .collect();
        build_family_from_sections(&s, &g)?
    } else {
        build_family(basis, &g)?
    };
    Ok(fam)
}

/// Basis for `spec`: reduced, or as given when `raw`.
pub fn basis_for(spec: &VarietySpec, trunc: Option<u32>, raw: bool) -> CliResult<ValuedBasis> {
    if raw {
        raw_basis(&spec.expand(trunc)?)
    } else {
        Ok(reduce(spec, trunc)?.basis)
    }
}

pub fn family_for(
    spec: &VarietySpec,
    trunc: Option<u32>,
    bound: u32,
    raw: bool,
) -> CliResult<DegenerationFamily> {
    let b = basis_for(spec, trunc, raw)?;
    let g = choose_gamma_for_basis(&b, bound)?;
    family(&b, &g.gamma, raw)
}

/// Random points of the torus with small nonzero rational coordinates.
pub fn torus_points(n: usize, count: usize, seed: u64) -> Vec<Vec<Rat>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            (0..n)
                .map(|_| {
                    let mut p = 0;
                    while p == 0 {
                        p = rng.gen_range(-9i64..=9);
                    }
                    rat(p, rng.gen_range(1i64..=9))
                })
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NobodyEntry {
    pub k: u32,
    pub values: Vec<Vec<i64>>,
    pub products: usize,
    pub dependent: usize,
    pub delta: QPolytope,
    /// `n!·vol(Δ_k)`.
    pub normalized_volume: String,
    /// `vol(Δ) − vol(Δ_k)` against a detected simplicial body.
    pub volume_gap: Option<String>,
}

pub fn nobody_entry(b: &ValuedBasis, k: u32) -> CliResult<(NobodyEntry, Rat)> {
    let pv = power_value_set(b, k)?;
    let delta = delta_k(&pv.values, i64::from(k))?;
    let vol = if delta.is_full_dimensional() {
        delta.normalized_volume()?
    } else {
        Rat::zero()
    };
    Ok((
        NobodyEntry {
            k,
            values: pv.values.iter().map(|v| v.0.clone()).collect(),
            products: pv.products,
            dependent: pv.dependent,
            delta,
            normalized_volume: format_rat(&vol),
            volume_gap: None,
        },
        vol,
    ))
}

/// `d` when `p = conv{0, e_1, …, e_{n−1}, d e_n}` for a positive integer `d`.
pub fn simplicial_shape(p: &QPolytope) -> Option<i64> {
    let n = p.ambient_dim();
    if n == 0 || !p.is_full_dimensional() {
        return None;
    }
    let d = p.normalized_volume().ok()?;
    if !d.is_integer() {
        return None;
    }
    let s = okbody_core::gromov::simplicial_nobody(n, &d).ok()?;
    s.same_set(p)
        .then(|| d.to_integer().try_into().ok())
        .flatten()
}

pub fn gap_string(outer: &QPolytope, inner: &QPolytope) -> CliResult<String> {
    Ok(format_rat(&volume_gap(outer, inner)?))
}

/// Parses `"0,1,3"` (one-dimensional) or `"0,0;1,0;0,2"`.
pub fn parse_points(s: &str) -> CliResult<Vec<Vec<i64>>> {
    let groups: Vec<&str> = if s.contains(';') {
        s.split(';').collect()
    } else {
        s.split(',').collect()
    };
    let per_point_sep = s.contains(';');
    groups
        .iter()
        .filter(|g| !g.trim().is_empty())
        .map(|g| {
            let parts: Vec<&str> = if per_point_sep {
                g.split(',').collect()
            } else {
                vec![g]
            };
            parts
                .iter()
                .map(|x| {
                    x.trim()
                        .parse::<i64>()
                        .map_err(|e| CliError::Usage(format!("bad coordinate {x:?}: {e}")))
                })
                .collect()
        })
        .collect()
}

pub fn polytope_from_points(pts: &[Vec<i64>]) -> CliResult<QPolytope> {
    Ok(Polytope::from_integer_points(pts)?)
}

pub fn rat_strings(v: &[Rat]) -> Vec<[String; 2]> {
    v.iter().map(rat_pair).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::fixture_spec;

    #[test]
    fn reduction_of_elliptic_sections() {
        let r = reduce(&fixture_spec("elliptic").unwrap(), None).unwrap();
        assert!(!r.retried);
        let vals: Vec<Vec<i64>> = r.basis.value_set().into_iter().map(|v| v.0).collect();
        assert_eq!(vals, vec![vec![0], vec![1], vec![3]]);
    }

    #[test]
    fn dependent_sections_are_rejected_after_retry() {
        let mut spec = fixture_spec("linear").unwrap();
        spec.sections.push(crate::variety::SectionSpec {
            id: "x".into(),
            numerator: "x".into(),
        });
        let e = reduce(&spec, None).err().unwrap();
        assert_eq!(e.exit_code(), 3);
    }

    #[test]
    fn shape_detection() {
        let p = polytope_from_points(&[vec![0, 0], vec![1, 0], vec![0, 4]]).unwrap();
        assert_eq!(simplicial_shape(&p), Some(4));
        let q = polytope_from_points(&[vec![0, 0], vec![2, 0], vec![0, 1]]).unwrap();
        assert_eq!(simplicial_shape(&q), None);
        assert_eq!(
            simplicial_shape(&polytope_from_points(&[vec![0], vec![3]]).unwrap()),
            Some(3)
        );
    }

    #[test]
    fn point_lists() {
        assert_eq!(
            parse_points("0,1,3").unwrap(),
            vec![vec![0], vec![1], vec![3]]
        );
        assert_eq!(
            parse_points("0,0; 1,0;0,2").unwrap(),
            vec![vec![0, 0], vec![1, 0], vec![0, 2]]
        );
        assert!(parse_points("0,x").is_err());
    }

    #[test]
    fn torus_points_are_nonzero_and_seeded() {
        let p = torus_points(2, 50, 4);
        assert!(p.iter().flatten().all(|x| !x.is_zero()));
        assert_eq!(p, torus_points(2, 50, 4));
        assert_ne!(sub_seed(1, 0), sub_seed(1, 1));
    }
}
