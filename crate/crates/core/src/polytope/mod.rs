//! Exact polytopes: convex hulls, lattice-normalized volumes, containment
//! and the approximants `Δ_k = conv(A_k) / k`.

mod hull;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::matrix::determinant;
use crate::exact::{LatticeVector, UnimodularAffineMap};
use crate::scalar::{format_rat, rat_from_pair, rat_int, rat_pair, OrderedField};
use crate::Rat;

/// `normal · x <= offset`, with the indices of the vertices on the boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpace<F> {
    pub normal: Vec<F>,
    pub offset: F,
    pub vertices: Vec<usize>,
}

impl<F: OrderedField> HalfSpace<F> {
    /// `offset - normal · x`; positive strictly inside.
    pub fn slack(&self, x: &[F]) -> F {
        self.offset.clone()
            - self
                .normal
                .iter()
                .zip(x)
                .fold(F::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
    }
}

/// Convex polytope with both vertex and half-space descriptions.
#[derive(Debug, Clone, PartialEq)]
pub struct Polytope<F> {
    ambient: usize,
    dim: usize,
    vertices: Vec<Vec<F>>,
    facets: Vec<HalfSpace<F>>,
    equalities: Vec<(Vec<F>, F)>,
}

impl<F: OrderedField> Polytope<F> {
    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_full_dimensional(&self) -> bool {
        self.dim == self.ambient
    }

    /// Extreme points, sorted lexicographically.
    pub fn vertices(&self) -> &[Vec<F>] {
        &self.vertices
    }

    pub fn facets(&self) -> &[HalfSpace<F>] {
        &self.facets
    }

    pub fn equalities(&self) -> &[(Vec<F>, F)] {
        &self.equalities
    }

    fn on_affine_hull(&self, x: &[F]) -> bool {
        self.equalities.iter().all(|(nrm, off)| {
            nrm.iter()
                .zip(x)
                .fold(F::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
                == *off
        })
    }

    pub fn contains_point(&self, x: &[F]) -> bool {
        x.len() == self.ambient
            && self.on_affine_hull(x)
            && self.facets.iter().all(|h| h.slack(x) >= F::zero())
    }

    /// Strictly inside every facet (relative interior for lower dimensions).
    pub fn contains_point_strictly(&self, x: &[F]) -> bool {
        x.len() == self.ambient
            && self.on_affine_hull(x)
            && self.facets.iter().all(|h| h.slack(x) > F::zero())
    }

    /// First vertex of `other` outside `self`, if any.
    pub fn first_vertex_outside<'a>(&self, other: &'a Self) -> Option<&'a [F]> {
        other
            .vertices
            .iter()
            .find(|v| !self.contains_point(v))
            .map(|v| v.as_slice())
    }

    pub fn contains_polytope(&self, other: &Self) -> bool {
        self.ambient == other.ambient && self.first_vertex_outside(other).is_none()
    }

    /// Simplices (as vertex lists) of a deterministic fan triangulation: each
    /// face is coned from its lexicographically smallest vertex over the
    /// triangulations of its facets not containing that vertex.
    pub fn triangulation(&self) -> Vec<Vec<Vec<F>>> {
        if self.dim == 0 {
            return vec![vec![self.vertices[0].clone()]];
        }
        let apex = 0;
        let mut out = Vec::new();
        for f in &self.facets {
            if f.vertices.contains(&apex) {
                continue;
            }
            let pts: Vec<Vec<F>> = f
                .vertices
                .iter()
                .map(|&i| self.vertices[i].clone())
                .collect();
            let face = Polytope::hull_unchecked(&pts);
            for mut s in face.triangulation() {
                s.insert(0, self.vertices[apex].clone());
                out.push(s);
            }
        }
        out
    }

    /// `n!` times the Euclidean volume.
    pub fn normalized_volume(&self) -> Result<F> {
        if !self.is_full_dimensional() {
            return Err(Error::DegeneratePolytope {
                dim: self.dim,
                ambient: self.ambient,
            });
        }
        Ok(self
            .triangulation()
            .iter()
            .map(|s| {
                let m: Vec<Vec<F>> = s[1..]
                    .iter()
                    .map(|p| {
                        p.iter()
                            .zip(&s[0])
                            .map(|(a, b)| a.clone() - b.clone())
                            .collect()
                    })
                    .collect();
                determinant(&m).abs()
            })
            .fold(F::zero(), |acc, x| acc + x))
    }

    pub fn euclidean_volume(&self) -> Result<F> {
        let mut fact = F::one();
        let mut k = F::one();
        for _ in 1..=self.ambient {
            fact = fact * k.clone();
            k = k + F::one();
        }
        Ok(self.normalized_volume()? / fact)
    }

    fn hull_unchecked(points: &[Vec<F>]) -> Self {
        let raw = hull::hull(points);
        Self {
            ambient: points[0].len(),
            dim: raw.dim,
            vertices: raw.vertices,
            facets: raw.facets,
            equalities: raw.equalities,
        }
    }
}

/// Exact convex hull of a nonempty point set of common arity.
pub fn convex_hull<F: OrderedField>(points: &[Vec<F>]) -> Result<Polytope<F>> {
    let first = points.first().ok_or(Error::EmptyInput("point set"))?;
    let n = first.len();
    if let Some(p) = points.iter().find(|p| p.len() != n) {
        return Err(Error::ArityMismatch {
            expected: n,
            found: p.len(),
        });
    }
    if n == 0 {
        return Err(Error::InvalidArgument(
            "ambient dimension must be at least 1".into(),
        ));
    }
    Ok(Polytope::hull_unchecked(points))
}

pub fn normalized_volume<F: OrderedField>(p: &Polytope<F>) -> Result<F> {
    p.normalized_volume()
}

/// Whether every vertex of `inner` lies strictly inside every facet of
/// `outer`.
pub fn contains_in_interior<F: OrderedField>(outer: &Polytope<F>, inner: &Polytope<F>) -> bool {
    outer.is_full_dimensional()
        && outer.ambient == inner.ambient
        && inner
            .vertices
            .iter()
            .all(|v| outer.contains_point_strictly(v))
}

/// `Δ_k = conv(A_k) / k`.
pub fn delta_k(values: &[LatticeVector], k: i64) -> Result<Polytope<Rat>> {
    if k <= 0 {
        return Err(Error::InvalidArgument(format!(
            "k must be positive, got {k}"
        )));
    }
    if values.is_empty() {
        return Err(Error::EmptyInput("value set A_k"));
    }
    let kk = rat_int(k);
    let pts: Vec<Vec<Rat>> = values
        .iter()
        .map(|a| {
            a.coords()
                .iter()
                .map(|&x| rat_int(x) / kk.clone())
                .collect()
        })
        .collect();
    convex_hull(&pts)
}

/// `vol(outer) - vol(inner)` (Euclidean) for `inner ⊆ outer`.
pub fn volume_gap(outer: &Polytope<Rat>, inner: &Polytope<Rat>) -> Result<Rat> {
    if outer.ambient != inner.ambient {
        return Err(Error::ArityMismatch {
            expected: outer.ambient,
            found: inner.ambient,
        });
    }
    if let Some(v) = outer.first_vertex_outside(inner) {
        return Err(Error::NotContained {
            vertex: v.iter().map(format_rat).collect(),
        });
    }
    Ok(outer.euclidean_volume()? - inner.euclidean_volume()?)
}

impl Polytope<Rat> {
    pub fn from_integer_points(points: &[Vec<i64>]) -> Result<Self> {
        let pts: Vec<Vec<Rat>> = points
            .iter()
            .map(|p| p.iter().map(|&x| rat_int(x)).collect())
            .collect();
        convex_hull(&pts)
    }

    pub fn map(&self, t: &UnimodularAffineMap) -> Self {
        let pts: Vec<Vec<Rat>> = self.vertices.iter().map(|v| t.apply(v)).collect();
        Polytope::hull_unchecked(&pts)
    }

    pub fn scaled(&self, s: &Rat) -> Self {
        let pts: Vec<Vec<Rat>> = self
            .vertices
            .iter()
            .map(|v| v.iter().map(|x| x * s).collect())
            .collect();
        Polytope::hull_unchecked(&pts)
    }

    /// Whether all vertices are integral.
    pub fn is_lattice_polytope(&self) -> bool {
        self.vertices.iter().flatten().all(|x| x.is_integer())
    }

    /// Integer points of the bounding box lying strictly inside.
    pub fn interior_lattice_points(&self) -> Vec<Vec<i64>> {
        let n = self.ambient;
        let lo: Vec<i64> = (0..n)
            .map(|i| {
                let m = self.vertices.iter().map(|v| v[i].clone()).min().unwrap();
                m.floor().to_integer().try_into().unwrap()
            })
            .collect();
        let hi: Vec<i64> = (0..n)
            .map(|i| {
                let m = self.vertices.iter().map(|v| v[i].clone()).max().unwrap();
                m.ceil().to_integer().try_into().unwrap()
            })
            .collect();
        let mut out = Vec::new();
        let mut cur = lo.clone();
        loop {
            let q: Vec<Rat> = cur.iter().map(|&x| rat_int(x)).collect();
            if self.contains_point_strictly(&q) {
                out.push(cur.clone());
            }
            let mut i = 0;
            loop {
                if i == n {
                    return out;
                }
                if cur[i] < hi[i] {
                    cur[i] += 1;
                    break;
                }
                cur[i] = lo[i];
                i += 1;
            }
        }
    }

    /// The same set as `other`.
    pub fn same_set(&self, other: &Self) -> bool {
        self.vertices == other.vertices
    }

    pub fn to_json(&self) -> PolytopeJson {
        PolytopeJson {
            vertices: self
                .vertices
                .iter()
                .map(|v| v.iter().map(rat_pair).collect())
                .collect(),
            dim: self.dim,
            ambient: self.ambient,
        }
    }

    pub fn from_json(j: &PolytopeJson) -> Result<Self> {
        let pts: Vec<Vec<Rat>> = j
            .vertices
            .iter()
            .map(|v| v.iter().map(rat_from_pair).collect::<Result<Vec<_>>>())
            .collect::<Result<_>>()?;
        let p = convex_hull(&pts)?;
        if p.dim != j.dim || p.ambient != j.ambient || p.vertices.len() != pts.len() {
            return Err(Error::Parse(format!(
                "polytope record inconsistent: recorded dim {} / {} vertices, hull has dim {} / {} vertices",
                j.dim,
                pts.len(),
                p.dim,
                p.vertices.len()
            )));
        }
        Ok(p)
    }
}

/// Serialized form: each vertex is a list of `[numerator, denominator]`
/// decimal-string pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolytopeJson {
    pub vertices: Vec<Vec<[String; 2]>>,
    pub dim: usize,
    pub ambient: usize,
}

impl Serialize for Polytope<Rat> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Polytope<Rat> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = PolytopeJson::deserialize(d)?;
        Polytope::from_json(&j).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn q1(xs: &[i64]) -> Vec<Vec<Rat>> {
        xs.iter().map(|&x| vec![rat_int(x)]).collect()
    }

    fn ip(pts: &[&[i64]]) -> Polytope<Rat> {
        Polytope::from_integer_points(&pts.iter().map(|p| p.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn hull_examples() {
        let p = convex_hull(&q1(&[0, 1, 3])).unwrap();
        assert_eq!(p.vertices(), &q1(&[0, 3])[..]);
        assert_eq!(p.dim(), 1);

        let p = convex_hull(&[vec![rat_int(0), rat_int(0)]]).unwrap();
        assert_eq!(p.dim(), 0);
        assert_eq!(p.vertices().len(), 1);

        let p = convex_hull(&[
            vec![rat_int(0), rat_int(0)],
            vec![rat_int(1), rat_int(0)],
            vec![rat_int(0), rat_int(1)],
            vec![rat(1, 4), rat(1, 4)],
        ])
        .unwrap();
        assert_eq!(p.vertices().len(), 3);
        assert_eq!(p.facets().len(), 3);
        assert!(convex_hull::<Rat>(&[]).is_err());
    }

    #[test]
    fn volume_examples() {
        assert_eq!(
            convex_hull(&q1(&[0, 3]))
                .unwrap()
                .normalized_volume()
                .unwrap(),
            rat_int(3)
        );
        assert_eq!(
            ip(&[&[0, 0, 0], &[1, 0, 0], &[0, 1, 0], &[0, 0, 1]])
                .normalized_volume()
                .unwrap(),
            rat_int(1)
        );
        assert_eq!(
            ip(&[&[0, 0], &[1, 0], &[0, 5]])
                .normalized_volume()
                .unwrap(),
            rat_int(5)
        );
        // unit square: normalized volume 2
        assert_eq!(
            ip(&[&[0, 0], &[1, 0], &[0, 1], &[1, 1]])
                .normalized_volume()
                .unwrap(),
            rat_int(2)
        );
        let seg = ip(&[&[0, 0], &[2, 2]]);
        assert!(matches!(
            seg.normalized_volume(),
            Err(Error::DegeneratePolytope { dim: 1, ambient: 2 })
        ));
    }

    #[test]
    fn interior_containment_examples() {
        let p = convex_hull(&q1(&[0, 3])).unwrap();
        let q = convex_hull(&q1(&[1, 2])).unwrap();
        assert!(contains_in_interior(&p, &q));

        let tri = ip(&[&[0, 0], &[1, 0], &[0, 2]]);
        let small = convex_hull(&[
            vec![rat(1, 100), rat(1, 100)],
            vec![rat(91, 100), rat(1, 100)],
            vec![rat(1, 100), rat(91, 100)],
        ])
        .unwrap();
        assert!(contains_in_interior(&tri, &small));

        let unit = ip(&[&[0, 0], &[1, 0], &[0, 1]]);
        assert!(!contains_in_interior(&unit, &unit));
    }

    #[test]
    fn delta_k_examples() {
        let lv = |xs: &[i64]| {
            xs.iter()
                .map(|&x| LatticeVector(vec![x]))
                .collect::<Vec<_>>()
        };
        let seg = convex_hull(&q1(&[0, 3])).unwrap();
        assert!(delta_k(&lv(&[0, 1, 3]), 1).unwrap().same_set(&seg));
        assert!(delta_k(&lv(&[0, 2, 6]), 2).unwrap().same_set(&seg));
        assert!(delta_k(&lv(&[0, 1, 2, 3, 4, 5, 6]), 2)
            .unwrap()
            .same_set(&seg));
        assert!(delta_k(&lv(&[0]), 0).is_err());
        assert!(delta_k(&[], 1).is_err());
    }

    #[test]
    fn volume_gap_examples() {
        let s03 = convex_hull(&q1(&[0, 3])).unwrap();
        let s02 = convex_hull(&q1(&[0, 2])).unwrap();
        assert_eq!(volume_gap(&s03, &s03).unwrap(), rat_int(0));
        assert_eq!(volume_gap(&s03, &s02).unwrap(), rat_int(1));
        let outer = ip(&[&[0, 0], &[1, 0], &[0, 3]]);
        let inner = ip(&[&[0, 0], &[1, 0], &[0, 2]]);
        assert_eq!(volume_gap(&outer, &inner).unwrap(), rat(1, 2));
        match volume_gap(&inner, &outer) {
            Err(Error::NotContained { vertex }) => assert_eq!(vertex, vec!["0", "3"]),
            other => panic!("expected NotContained, got {other:?}"),
        }
    }

    #[test]
    fn lower_dimensional_facets_live_on_affine_hull() {
        let seg = ip(&[&[0, 0], &[2, 2], &[1, 1]]);
        assert_eq!(seg.dim(), 1);
        assert_eq!(seg.vertices().len(), 2);
        assert!(seg.contains_point(&[rat_int(1), rat_int(1)]));
        assert!(!seg.contains_point(&[rat_int(1), rat_int(0)]));
        assert!(seg.contains_point_strictly(&[rat(1, 2), rat(1, 2)]));
        assert!(!seg.contains_point_strictly(&[rat_int(2), rat_int(2)]));
    }

    #[test]
    fn json_round_trip() {
        let p = ip(&[&[0, 0], &[1, 0], &[0, 5]]);
        let s = serde_json::to_string(&p).unwrap();
        let back: Polytope<Rat> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
        let bad = r#"{"vertices": [[["0","1"]],[["1","1"]],[["2","1"]]], "dim": 1, "ambient": 1}"#;
        assert!(serde_json::from_str::<Polytope<Rat>>(bad).is_err());
    }

    #[test]
    fn interior_lattice_points_of_dilated_simplex() {
        let p = ip(&[&[0, 0], &[3, 0], &[0, 3]]);
        assert_eq!(p.interior_lattice_points(), vec![vec![1, 1]]);
        assert!(ip(&[&[0, 0], &[1, 0], &[0, 1]])
            .interior_lattice_points()
            .is_empty());
    }

    #[test]
    fn generic_over_f64() {
        let p = convex_hull::<f64>(&[
            vec![0.0, 0.0],
            vec![2.0, 0.0],
            vec![0.0, 2.0],
            vec![0.5, 0.5],
        ])
        .unwrap();
        assert_eq!(p.vertices().len(), 3, "{p:?}");
        assert!((p.normalized_volume().unwrap() - 4.0).abs() < 1e-12);
    }
}
