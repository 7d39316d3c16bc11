//! Exact convex hull by facet enumeration over affinely independent subsets.
//!
//! Points are first reduced to coordinates on their affine hull, so lower
//! dimensional inputs (a segment in the plane, a single point) are handled by
//! the same full-dimensional routine.

use std::cmp::Ordering;

use crate::exact::matrix::{affine_hull, nullspace};
use crate::scalar::OrderedField;

use super::HalfSpace;

pub(super) struct RawHull<F> {
    pub dim: usize,
    pub vertices: Vec<Vec<F>>,
    pub facets: Vec<HalfSpace<F>>,
    pub equalities: Vec<(Vec<F>, F)>,
}

pub(super) fn cmp_vec<F: PartialOrd>(a: &[F], b: &[F]) -> Ordering {
    a.partial_cmp(b).unwrap_or(Ordering::Equal)
}

fn normalize<F: OrderedField>(normal: &mut [F], offset: &mut F) {
    if let Some(lead) = normal.iter().find(|x| !x.is_zero()).map(|x| x.abs()) {
        for x in normal.iter_mut() {
            *x = x.clone() / lead.clone();
        }
        *offset = offset.clone() / lead;
    }
}

fn combinations(m: usize, k: usize, mut visit: impl FnMut(&[usize])) {
    if k > m {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        visit(&idx);
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + m - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Facets `(normal, offset)` with `normal · y <= offset` of the convex hull of
/// full-dimensional points in `F^d`, `d >= 1`.
fn full_dim_facets<F: OrderedField>(pts: &[Vec<F>], d: usize) -> Vec<(Vec<F>, F)> {
    let mut out: Vec<(Vec<F>, F)> = Vec::new();
    if d == 1 {
        let min = pts
            .iter()
            .map(|p| p[0].clone())
            .fold(None, |m: Option<F>, x| match m {
                Some(m) if m <= x => Some(m),
                _ => Some(x),
            });
        let max = pts
            .iter()
            .map(|p| p[0].clone())
            .fold(None, |m: Option<F>, x| match m {
                Some(m) if m >= x => Some(m),
                _ => Some(x),
            });
        out.push((vec![-F::one()], -min.unwrap()));
        out.push((vec![F::one()], max.unwrap()));
        return out;
    }
    combinations(pts.len(), d, |idx| {
        let p0 = &pts[idx[0]];
        let diffs: Vec<Vec<F>> = idx[1..]
            .iter()
            .map(|&i| {
                pts[i]
                    .iter()
                    .zip(p0)
                    .map(|(a, b)| a.clone() - b.clone())
                    .collect()
            })
            .collect();
        let ns = nullspace(&diffs, d);
        if ns.len() != 1 {
            return;
        }
        let mut normal = ns.into_iter().next().unwrap();
        let mut offset = dot(&normal, p0);
        let (mut below, mut above) = (false, false);
        for p in pts {
            let s = dot(&normal, p) - offset.clone();
            if s > F::zero() {
                above = true;
            } else if s < F::zero() {
                below = true;
            }
            if above && below {
                return;
            }
        }
        if above {
            normal.iter_mut().for_each(|x| *x = -x.clone());
            offset = -offset;
        }
        normalize(&mut normal, &mut offset);
        if !out.iter().any(|(n, o)| *n == normal && *o == offset) {
            out.push((normal, offset));
        }
    });
    out
}

fn dot<F: OrderedField>(a: &[F], b: &[F]) -> F {
    a.iter()
        .zip(b)
        .fold(F::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

pub(super) fn hull<F: OrderedField>(points: &[Vec<F>]) -> RawHull<F> {
    let n = points[0].len();
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| cmp_vec(a, b));
    pts.dedup();

    let (d, base, dirs) = affine_hull(&pts);
    let pivots: Vec<usize> = dirs
        .iter()
        .map(|r| r.iter().position(|x| !x.is_zero()).unwrap())
        .collect();
    let equalities: Vec<(Vec<F>, F)> = nullspace(&dirs, n)
        .into_iter()
        .map(|mut v| {
            let mut off = dot(&v, &base);
            normalize(&mut v, &mut off);
            (v, off)
        })
        .collect();

    if d == 0 {
        return RawHull {
            dim: 0,
            vertices: pts,
            facets: Vec::new(),
            equalities,
        };
    }

    let local: Vec<Vec<F>> = pts
        .iter()
        .map(|p| {
            pivots
                .iter()
                .map(|&c| p[c].clone() - base[c].clone())
                .collect()
        })
        .collect();
    let raw = full_dim_facets(&local, d);

    // a point is a vertex iff the normals of the facets through it have rank d
    let mut is_vertex = vec![false; pts.len()];
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); raw.len()];
    for (fi, (nrm, off)) in raw.iter().enumerate() {
        for (pi, y) in local.iter().enumerate() {
            if dot(nrm, y) == *off {
                incident[fi].push(pi);
            }
        }
    }
    for pi in 0..pts.len() {
        let normals: Vec<Vec<F>> = raw
            .iter()
            .zip(&incident)
            .filter(|(_, inc)| inc.contains(&pi))
            .map(|((nrm, _), _)| nrm.clone())
            .collect();
        is_vertex[pi] = crate::exact::matrix::rank(&normals) == d;
    }
    let remap: Vec<Option<usize>> = {
        let mut k = 0;
        is_vertex
            .iter()
            .map(|&v| {
                if v {
                    k += 1;
                    Some(k - 1)
                } else {
                    None
                }
            })
            .collect()
    };
    let vertices: Vec<Vec<F>> = pts
        .iter()
        .zip(&is_vertex)
        .filter(|(_, &v)| v)
        .map(|(p, _)| p.clone())
        .collect();

    let mut facets: Vec<HalfSpace<F>> = raw
        .into_iter()
        .zip(incident)
        .map(|((alpha, b), inc)| {
            let mut normal = vec![F::zero(); n];
            let mut offset = b;
            for (k, &c) in pivots.iter().enumerate() {
                normal[c] = alpha[k].clone();
                offset = offset + alpha[k].clone() * base[c].clone();
            }
            let vertices = inc.into_iter().filter_map(|i| remap[i]).collect();
            HalfSpace {
                normal,
                offset,
                vertices,
            }
        })
        .collect();
    facets.sort_by(|a, b| {
        cmp_vec(&a.normal, &b.normal).then(cmp_vec(
            std::slice::from_ref(&a.offset),
            std::slice::from_ref(&b.offset),
        ))
    });

    RawHull {
        dim: d,
        vertices,
        facets,
        equalities,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combinations_enumerates_all() {
        let mut seen = Vec::new();
        combinations(4, 2, |c| seen.push(c.to_vec()));
        assert_eq!(seen.len(), 6);
        assert_eq!(seen[0], vec![0, 1]);
        assert_eq!(seen[5], vec![2, 3]);
        let mut count = 0;
        combinations(3, 3, |_| count += 1);
        assert_eq!(count, 1);
        combinations(2, 3, |_| count += 1);
        assert_eq!(count, 1);
    }
}
