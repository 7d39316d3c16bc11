//! Exact certificates for simplex sizes inside polytopes (Gromov width lower
//! bounds) and for the subdivision of `conv{0, e_1, …, e_{n−1}, d e_n}` into
//! unimodular simplices (full packings).

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::matrix::{inverse, solve};
use crate::exact::UnimodularAffineMap;
use crate::polytope::{contains_in_interior, convex_hull};
use crate::scalar::{rat, rat_int, serde_rat};
use crate::{QPolytope, Rat};

/// Vertices `0, R e_1, …, R e_n` of the closed standard simplex of size `R`.
pub fn standard_simplex(n: usize, r: &Rat) -> Vec<Vec<Rat>> {
    let mut vs = vec![vec![Rat::zero(); n]];
    for i in 0..n {
        let mut v = vec![Rat::zero(); n];
        v[i] = r.clone();
        vs.push(v);
    }
    vs
}

/// Witness that `W(Δ(R)) + a` lies in the interior of `target`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplexCertificate {
    pub kind: String,
    pub map: UnimodularAffineMap,
    #[serde(with = "serde_rat")]
    pub r: Rat,
    /// Size of the optimal closed simplex for this `W`; it touches the
    /// boundary, so it is approached by valid certificates but not attained.
    #[serde(with = "serde_rat")]
    pub r_sup: Rat,
    pub open_supremum: bool,
    pub target: QPolytope,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimplexVerdict {
    pub valid: bool,
    /// `(simplex vertex, target facet)` of the first violation.
    pub violated: Option<(usize, usize)>,
    pub reason: Option<String>,
}

impl SimplexVerdict {
    fn ok() -> Self {
        SimplexVerdict {
            valid: true,
            violated: None,
            reason: None,
        }
    }

    fn fail(reason: impl Into<String>, violated: Option<(usize, usize)>) -> Self {
        SimplexVerdict {
            valid: false,
            violated,
            reason: Some(reason.into()),
        }
    }
}

pub fn simplex_image(map: &UnimodularAffineMap, r: &Rat) -> Vec<Vec<Rat>> {
    standard_simplex(map.dim(), r)
        .iter()
        .map(|v| map.apply(v))
        .collect()
}

/// Checks every vertex of `W(Δ(R)) + a` strictly against every facet.
pub fn verify_simplex_certificate(cert: &SimplexCertificate) -> Result<SimplexVerdict> {
    let t = &cert.target;
    if !t.is_full_dimensional() {
        return Err(Error::DegeneratePolytope {
            dim: t.dim(),
            ambient: t.ambient_dim(),
        });
    }
    if cert.map.dim() != t.ambient_dim() {
        return Ok(SimplexVerdict::fail(
            "map and target dimensions differ",
            None,
        ));
    }
    if !cert.map.is_unimodular() {
        return Ok(SimplexVerdict::fail("W is not unimodular", None));
    }
    if !cert.r.is_positive() {
        return Ok(SimplexVerdict::fail("size must be positive", None));
    }
    for (i, v) in simplex_image(&cert.map, &cert.r).iter().enumerate() {
        for (f, h) in t.facets().iter().enumerate() {
            if !h.slack(v).is_positive() {
                return Ok(SimplexVerdict::fail(
                    "vertex not strictly inside facet",
                    Some((i, f)),
                ));
            }
        }
    }
    Ok(SimplexVerdict::ok())
}

/// Maximizes `R` over translations `a` for fixed `W`:
/// `n_f·a + R·max(0, max_i n_f·w_i) ≤ b_f`, `R ≥ 0`. Bounded because the
/// target is. Returns the optimal `(R, a)` with lex-smallest `a` among ties.
fn best_translation(target: &QPolytope, w: &[Vec<i64>]) -> Option<(Rat, Vec<Rat>)> {
    let n = w.len();
    let mut rows: Vec<Vec<Rat>> = Vec::new();
    let mut rhs: Vec<Rat> = Vec::new();
    for h in target.facets() {
        let mut m = Rat::zero();
        for i in 0..n {
            let d = (0..n).fold(Rat::zero(), |acc, k| acc + &h.normal[k] * rat_int(w[k][i]));
            if d > m {
                m = d;
            }
        }
        let mut row = h.normal.clone();
        row.push(m);
        rows.push(row);
        rhs.push(h.offset.clone());
    }
    let mut r_nonneg = vec![Rat::zero(); n + 1];
    r_nonneg[n] = -Rat::one();
    rows.push(r_nonneg);
    rhs.push(Rat::zero());

    let mut best: Option<(Rat, Vec<Rat>)> = None;
    for subset in combinations(rows.len(), n + 1) {
        let a: Vec<Vec<Rat>> = subset.iter().map(|&i| rows[i].clone()).collect();
        let b: Vec<Rat> = subset.iter().map(|&i| rhs[i].clone()).collect();
        let Some(x) = solve(&a, &b) else { continue };
        let feasible = rows.iter().zip(&rhs).all(|(row, c)| {
            row.iter()
                .zip(&x)
                .fold(Rat::zero(), |acc, (p, q)| acc + p * q)
                <= *c
        });
        if !feasible {
            continue;
        }
        let (tr, r) = (x[..n].to_vec(), x[n].clone());
        let better = match &best {
            None => true,
            Some((br, ba)) => r > *br || (r == *br && tr < *ba),
        };
        if better {
            best = Some((r, tr));
        }
    }
    best
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < n - k + i {
                cur[i] += 1;
                for j in i + 1..k {
                    cur[j] = cur[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// All `n × n` integer matrices with entries in `[−bound, bound]` and
/// `|det| = 1`, in lex order of their flattening.
pub fn unimodular_matrices(n: usize, bound: i64) -> Vec<Vec<Vec<i64>>> {
    let len = n * n;
    let mut out = Vec::new();
    let mut cur = vec![-bound; len];
    loop {
        let w: Vec<Vec<i64>> = cur.chunks(n).map(|c| c.to_vec()).collect();
        if det_i64(&w).abs() == 1 {
            out.push(w);
        }
        let mut i = len;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < bound {
                cur[i] += 1;
                for x in cur.iter_mut().skip(i + 1) {
                    *x = -bound;
                }
                break;
            }
        }
    }
}

fn det_i64(m: &[Vec<i64>]) -> i64 {
    match m.len() {
        0 => 1,
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        n => (0..n)
            .map(|j| {
                let minor: Vec<Vec<i64>> = m[1..]
                    .iter()
                    .map(|r| {
                        r.iter()
                            .enumerate()
                            .filter(|&(k, _)| k != j)
                            .map(|(_, &x)| x)
                            .collect()
                    })
                    .collect();
                let s = if j % 2 == 0 { 1 } else { -1 };
                s * m[0][j] * det_i64(&minor)
            })
            .sum(),
    }
}

/// Shrink factor applied about the barycenter to pull the optimal closed
/// simplex off the boundary.
pub fn shrink_factor() -> Rat {
    Rat::one() - rat(1, 1_000_000_000_000)
}

fn certificate_from(
    target: &QPolytope,
    w: Vec<Vec<i64>>,
    a: Vec<Rat>,
    r_sup: Rat,
) -> Result<SimplexCertificate> {
    let n = w.len();
    let lam = shrink_factor();
    let map0 = UnimodularAffineMap::new(w, a)?;
    // barycenter of W(Δ(R)) + a is a + W(R/(n+1), …)
    let bary = map0.apply_linear(&vec![r_sup.clone() / rat_int(n as i64 + 1); n]);
    let a2: Vec<Rat> = map0
        .a
        .iter()
        .zip(&bary)
        .map(|(ai, bi)| ai + (Rat::one() - &lam) * bi)
        .collect();
    let map = UnimodularAffineMap::new(map0.w, a2)?;
    Ok(SimplexCertificate {
        kind: "simplex".into(),
        map,
        r: lam * &r_sup,
        r_sup,
        open_supremum: true,
        target: target.clone(),
    })
}

/// Best verified simplex over unimodular `W` with entries bounded by
/// `bound`, each with an exactly optimal translation.
///
/// Ties prefer the lex-smallest flattened `W`, then the lex-smallest `a`.
/// Not complete over all of `GL(n, Z)`.
pub fn search_largest_simplex(target: &QPolytope, bound: u32) -> Result<SimplexCertificate> {
    if !target.is_full_dimensional() {
        return Err(Error::DegeneratePolytope {
            dim: target.dim(),
            ambient: target.ambient_dim(),
        });
    }
    let n = target.ambient_dim();
    if n == 0 || n > 3 {
        return Err(Error::InvalidArgument(format!(
            "simplex search supports 1 <= n <= 3, got {n}"
        )));
    }
    let ws = unimodular_matrices(n, i64::from(bound.max(1)));
    type Cand = (Rat, Vec<Vec<i64>>, Vec<Rat>);
    let better = |x: &Cand, y: &Cand| -> bool {
        x.0 > y.0 || (x.0 == y.0 && (x.1 < y.1 || (x.1 == y.1 && x.2 < y.2)))
    };
    let best = ws
        .into_par_iter()
        .filter_map(|w| best_translation(target, &w).map(|(r, a)| (r, w, a)))
        .reduce_with(|x, y| if better(&y, &x) { y } else { x });
    let (r, w, a) = best.ok_or(Error::DegeneratePolytope {
        dim: target.dim(),
        ambient: n,
    })?;
    if !r.is_positive() {
        return Err(Error::DegeneratePolytope {
            dim: target.dim(),
            ambient: n,
        });
    }
    let cert = certificate_from(target, w, a, r)?;
    debug_assert!(verify_simplex_certificate(&cert)?.valid);
    Ok(cert)
}

/// Size of the largest closed `W = id` simplex in an axis-aligned right
/// simplex `conv{0, a_1 e_1, …, a_n e_n}`, if `target` has that shape.
pub fn axis_simplex_size(target: &QPolytope) -> Option<Rat> {
    let n = target.ambient_dim();
    let vs = target.vertices();
    if vs.len() != n + 1 || !vs.iter().any(|v| v.iter().all(|x| x.is_zero())) {
        return None;
    }
    let mut sizes = Vec::with_capacity(n);
    for i in 0..n {
        let v = vs.iter().find(|v| {
            v[i].is_positive() && v.iter().enumerate().all(|(k, x)| k == i || x.is_zero())
        })?;
        sizes.push(v[i].clone());
    }
    sizes.into_iter().min()
}

/// `conv{0, e_1, …, e_{n−1}, d e_n}`.
pub fn simplicial_nobody(n: usize, d: &Rat) -> Result<QPolytope> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    if !d.is_positive() {
        return Err(Error::InvalidArgument(format!(
            "d must be positive, got {d}"
        )));
    }
    let mut vs = standard_simplex(n, &Rat::one());
    vs[n][n - 1] = d.clone();
    convex_hull(&vs)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubSimplex {
    pub polytope: QPolytope,
    pub contained: bool,
    pub strictly_interior: bool,
    /// Vertices of the smaller simplex on the boundary of the larger one.
    pub boundary_vertices: usize,
}

pub fn sub_simplex_dprime(n: usize, d: i64, d_prime: &Rat) -> Result<SubSimplex> {
    let dq = rat_int(d);
    if !d_prime.is_positive() || *d_prime > dq {
        return Err(Error::InvalidArgument(format!(
            "need 0 < d' <= d, got d' = {d_prime}, d = {d}"
        )));
    }
    let outer = simplicial_nobody(n, &dq)?;
    let inner = simplicial_nobody(n, d_prime)?;
    let boundary = inner
        .vertices()
        .iter()
        .filter(|v| !outer.contains_point_strictly(v))
        .count();
    Ok(SubSimplex {
        contained: outer.contains_polytope(&inner),
        strictly_interior: contains_in_interior(&outer, &inner),
        boundary_vertices: boundary,
        polytope: inner,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PackingPiece {
    pub vertices: Vec<Vec<i64>>,
    /// Sends the piece onto `conv{0, e_1, …, e_n}`.
    pub map: UnimodularAffineMap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PackingCertificate {
    pub kind: String,
    pub n: usize,
    pub d: i64,
    pub ambient: QPolytope,
    pub pieces: Vec<PackingPiece>,
}

/// Outcome of each packing invariant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PackingReport {
    pub unit_volumes: bool,
    pub volume_sum_matches: bool,
    pub maps_unimodular: bool,
    pub maps_hit_unit_simplex: bool,
    pub empty_lattice_interiors: bool,
    pub pieces_contained: bool,
    pub pairwise_disjoint_interiors: bool,
    /// For consecutive pieces, the separating hyperplane `(normal, offset)`.
    pub separators: Vec<(Vec<String>, String)>,
}

impl PackingReport {
    pub fn all_ok(&self) -> bool {
        self.unit_volumes
            && self.volume_sum_matches
            && self.maps_unimodular
            && self.maps_hit_unit_simplex
            && self.empty_lattice_interiors
            && self.pieces_contained
            && self.pairwise_disjoint_interiors
    }
}

/// Pieces `Δ_i = conv{e_1, …, e_{n−1}, (i−1) e_n, i e_n}` for `i = 1..d`.
pub fn packing_subdivision(n: usize, d: i64) -> Result<PackingCertificate> {
    if n == 0 || d < 1 {
        return Err(Error::InvalidArgument(format!(
            "need n >= 1 and d >= 1, got n = {n}, d = {d}"
        )));
    }
    let ambient = simplicial_nobody(n, &rat_int(d))?;
    let mut pieces = Vec::with_capacity(d as usize);
    for i in 1..=d {
        let mut vs: Vec<Vec<i64>> = (0..n - 1)
            .map(|k| {
                let mut e = vec![0; n];
                e[k] = 1;
                e
            })
            .collect();
        let mut p0 = vec![0; n];
        p0[n - 1] = i - 1;
        let mut p1 = vec![0; n];
        p1[n - 1] = i;
        vs.push(p0.clone());
        vs.push(p1);
        // columns: e_k − p0 for k < n, then e_n
        let edges: Vec<Vec<Rat>> = (0..n)
            .map(|row| {
                (0..n)
                    .map(|col| {
                        let target = &vs[if col < n - 1 { col } else { n }];
                        rat_int(target[row] - p0[row])
                    })
                    .collect()
            })
            .collect();
        let inv = inverse(&edges).ok_or_else(|| Error::InvalidArgument("singular piece".into()))?;
        let w: Vec<Vec<i64>> = inv
            .iter()
            .map(|r| {
                r.iter()
                    .map(|x| x.to_integer().try_into().expect("small entries"))
                    .collect()
            })
            .collect();
        let shift = UnimodularAffineMap::new(w.clone(), vec![Rat::zero(); n])?
            .apply_linear(&p0.iter().map(|&x| rat_int(x)).collect::<Vec<_>>());
        let map = UnimodularAffineMap::new(w, shift.into_iter().map(|x| -x).collect())?;
        pieces.push(PackingPiece { vertices: vs, map });
    }
    let cert = PackingCertificate {
        kind: "packing".into(),
        n,
        d,
        ambient,
        pieces,
    };
    debug_assert!(verify_packing_certificate(&cert)?.all_ok());
    Ok(cert)
}

fn separated(a: &QPolytope, b: &QPolytope) -> Option<(Vec<Rat>, Rat)> {
    for (p, q) in [(a, b), (b, a)] {
        for h in p.facets() {
            if q.vertices().iter().all(|v| !h.slack(v).is_positive()) {
                return Some((h.normal.clone(), h.offset.clone()));
            }
        }
    }
    None
}

/// Re-checks every packing invariant from the certificate alone.
pub fn verify_packing_certificate(c: &PackingCertificate) -> Result<PackingReport> {
    let n = c.n;
    let ambient = simplicial_nobody(n, &rat_int(c.d))?;
    let unit: Vec<Vec<Rat>> = standard_simplex(n, &Rat::one());
    let mut unit_sorted = unit.clone();
    unit_sorted.sort();

    let polys: Vec<QPolytope> = c
        .pieces
        .iter()
        .map(|p| QPolytope::from_integer_points(&p.vertices))
        .collect::<Result<_>>()?;
    let full = polys.iter().all(|p| p.is_full_dimensional());
    let vols: Vec<Rat> = if full {
        polys
            .iter()
            .map(|p| p.normalized_volume())
            .collect::<Result<_>>()?
    } else {
        vec![]
    };
    let unit_volumes = full && vols.iter().all(|v| v.is_one());
    let volume_sum_matches = full
        && c.ambient.same_set(&ambient)
        && vols.iter().fold(Rat::zero(), |a, b| a + b) == ambient.normalized_volume()?;
    let maps_unimodular = c
        .pieces
        .iter()
        .all(|p| p.map.dim() == n && p.map.is_unimodular());
    let maps_hit_unit_simplex = maps_unimodular
        && c.pieces.iter().all(|p| {
            let mut img: Vec<Vec<Rat>> = p
                .vertices
                .iter()
                .map(|v| {
                    p.map
                        .apply(&v.iter().map(|&x| rat_int(x)).collect::<Vec<_>>())
                })
                .collect();
            img.sort();
            img == unit_sorted
        });
    let empty_lattice_interiors = polys.iter().all(|p| p.interior_lattice_points().is_empty());
    let pieces_contained = polys.iter().all(|p| ambient.contains_polytope(p));

    let mut disjoint = full;
    let mut separators = Vec::new();
    for i in 0..polys.len() {
        for j in i + 1..polys.len() {
            match separated(&polys[i], &polys[j]) {
                Some((nrm, off)) => {
                    if j == i + 1 {
                        separators
                            .push((nrm.iter().map(|x| x.to_string()).collect(), off.to_string()));
                    }
                }
                None => disjoint = false,
            }
        }
    }
    Ok(PackingReport {
        unit_volumes,
        volume_sum_matches,
        maps_unimodular,
        maps_hit_unit_simplex,
        empty_lattice_interiors,
        pieces_contained,
        pairwise_disjoint_interiors: disjoint,
        separators,
    })
}
