//! Acceptance criteria 1–11. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::{Duration, Instant};

use num_complex::Complex;
use num_traits::{One, Zero};
use okbody_cli::bk_oracle_curve;
use okbody_cli::commands::{family_for, raw_basis, reduce, torus_points, valuations};
use okbody_cli::fixtures::{fixture_spec, parse_fixture};
use okbody_cli::flowbatch::{moment_samples, run_flow_batch, summarize_moments, FlowConfig};
use okbody_cli::pipeline::{run_pipeline, PipelineConfig};
use okbody_core::degen::{
    immersion_certificate, jacobian_at_zero_fiber, verify_immersion_certificate,
};
use okbody_core::exact::LatticeVector;
use okbody_core::gromov::{
    packing_subdivision, search_largest_simplex, simplicial_nobody, verify_packing_certificate,
    verify_simplex_certificate,
};
use okbody_core::polytope::Polytope;
use okbody_core::scalar::{rat, rat_int};
use okbody_core::{QSeries, Rat};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(elapsed: Duration, limit: f64) -> Result<(), String> {
    ensure(
        elapsed.as_secs_f64() < limit,
        format!("took {:.2}s, limit {limit}s", elapsed.as_secs_f64()),
    )
}

fn e<E: std::fmt::Display>(x: E) -> String {
    x.to_string()
}

/// `binom(1/2, k)`, the coefficients of `sqrt(1 + x)`.
fn half_binomial(k: u32) -> Rat {
    let mut c = Rat::one();
    for i in 0..k {
        c = c * (rat(1, 2) - rat_int(i.into())) / rat_int((i + 1).into());
    }
    c
}

fn golden_series() -> Check {
    let t = Instant::now();
    let b = fixture_spec("elliptic")
        .map_err(e)?
        .expand(None)
        .map_err(e)?;
    let y = b.get("y/z").ok_or("no y/z section")?;
    let golden = [
        (0u32, rat(1, 1)),
        (3, rat(1, 2)),
        (6, rat(-1, 8)),
        (9, rat(1, 16)),
    ];
    for d in 0..=9u32 {
        let want = golden
            .iter()
            .find(|(k, _)| *k == d)
            .map_or_else(Rat::zero, |(_, c)| c.clone());
        ensure(
            y.coeff(&[d]) == want,
            format!("coefficient of u^{d} is {}", y.coeff(&[d])),
        )?;
    }
    // y = sqrt(1 + u^3) through the full truncation
    for d in 0..=b.trunc {
        let want = if d % 3 == 0 {
            half_binomial(d / 3)
        } else {
            Rat::zero()
        };
        ensure(y.coeff(&[d]) == want, format!("binomial mismatch at u^{d}"))?;
    }
    within(t.elapsed(), 1.0)?;
    Ok(format!(
        "y/z = {}",
        b.sections[1]
            .display
            .split(" + 7")
            .next()
            .unwrap_or_default()
    ))
}

fn golden_valuations() -> Check {
    let a = valuations(
        &fixture_spec("elliptic")
            .map_err(e)?
            .expand(None)
            .map_err(e)?,
    )
    .map_err(e)?;
    let b = valuations(
        &fixture_spec("elliptic_basis")
            .map_err(e)?
            .expand(None)
            .map_err(e)?,
    )
    .map_err(e)?;
    let get = |v: &[okbody_cli::commands::ValuationEntry], id: &str| {
        v.iter()
            .find(|x| x.id == id)
            .map(|x| x.value.clone())
            .unwrap_or_default()
    };
    ensure(get(&a, "x/z") == vec![1], "v(x/z)")?;
    ensure(get(&a, "y/z") == vec![0], "v(y/z)")?;
    ensure(get(&b, "(y-z)/z") == vec![3], "v((y-z)/z)")?;
    Ok("v(x/z) = 1, v(y/z) = 0, v((y-z)/z) = 3".into())
}

fn immersion() -> Check {
    let fam = family_for(&fixture_spec("elliptic").map_err(e)?, None, 8, true).map_err(e)?;
    let want: Vec<Vec<Rat>> = vec![
        vec![rat_int(1), rat_int(0), rat_int(0)],
        vec![rat_int(0), rat_int(0), rat_int(1)],
    ];
    for u in [rat(1, 1), rat(-2, 3), rat(5, 1)] {
        let j = jacobian_at_zero_fiber(&fam, std::slice::from_ref(&u)).map_err(e)?;
        ensure(
            j.printed() == want,
            format!("matrix at u = {u}: {:?}", j.printed()),
        )?;
        ensure(j.rank == 2, "rank at raw elliptic fiber")?;
    }
    let fam2 =
        family_for(&fixture_spec("elliptic_basis").map_err(e)?, None, 8, false).map_err(e)?;
    let cert = immersion_certificate(&fam2, &torus_points(1, 100, 2024)).map_err(e)?;
    ensure(
        cert.samples.len() == 100 && cert.samples.iter().all(|s| s.rank == 2),
        "elliptic basis rank",
    )?;
    verify_immersion_certificate(&cert).map_err(e)?;
    Ok("[[1,0,0],[0,0,1]], rank 2; elliptic basis rank 2 at 100 points".into())
}

fn monomial_special_fiber() -> Check {
    let fam = family_for(&fixture_spec("elliptic_basis").map_err(e)?, None, 8, false).map_err(e)?;
    let d = fam.trunc();
    let sf = fam.special_fiber();
    ensure(fam.special_fiber_is_monomial(), "not monomial")?;
    ensure(sf[0] == QSeries::var(1, d, 0), "first coordinate")?;
    ensure(
        sf[1] == QSeries::monomial(1, d, vec![3], rat(1, 2)),
        format!("second coordinate {:?}", sf[1]),
    )?;
    ensure(sf[2] == QSeries::one(1, d), "third coordinate")?;
    Ok("u ↦ (u : u^3/2 : 1)".into())
}

fn degree_volume() -> Check {
    let t = Instant::now();
    let vol = |a: &[i64]| -> Result<Rat, String> {
        let pts: Vec<Vec<i64>> = a.iter().map(|&x| vec![x]).collect();
        Polytope::from_integer_points(&pts)
            .map_err(e)?
            .normalized_volume()
            .map_err(e)
    };
    let o = bk_oracle_curve(&[0, 1, 3], 7, 1).map_err(e)?;
    ensure(
        o == 3 && vol(&[0, 1, 3])? == rat_int(3),
        format!("A = {{0,1,3}}: oracle {o}"),
    )?;
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    for i in 0..50 {
        let size = rng.gen_range(2..=6);
        let mut a: Vec<i64> = Vec::new();
        while a.len() < size {
            let x = rng.gen_range(0..=20);
            if !a.contains(&x) {
                a.push(x);
            }
        }
        let o = bk_oracle_curve(&a, 5, i).map_err(e)?;
        ensure(rat_int(o) == vol(&a)?, format!("A = {a:?}: oracle {o}"))?;
    }
    within(t.elapsed(), 10.0)?;
    Ok("oracle = volume on {0,1,3} and 50 random sets".into())
}

fn approximants() -> Check {
    let dir = tempfile::tempdir().map_err(e)?;
    let cfg: PipelineConfig = parse_fixture("elliptic_pipeline").map_err(e)?;
    let rep = run_pipeline(&cfg, Path::new("elliptic_pipeline.json"), dir.path()).map_err(e)?;
    let body = simplicial_nobody(1, &rat_int(3)).map_err(e)?;
    ensure(rep.values == Some(vec![vec![0], vec![1], vec![3]]), "A")?;
    ensure(rep.nobody.len() == 2, "k range")?;
    for n in &rep.nobody {
        ensure(
            n.delta.same_set(&body),
            format!("Delta_{} = {:?}", n.k, n.delta.vertices()),
        )?;
        ensure(
            n.volume_gap.as_deref() == Some("0"),
            format!("gap at k = {}", n.k),
        )?;
    }
    ensure(rep.simplicial_degree == Some(3), "shape d = 3")?;
    Ok("Delta_1 = Delta_2 = [0,3], gap 0".into())
}

/// Integer determinant by cofactor expansion.
fn det(m: &[Vec<i64>]) -> i64 {
    if m.len() == 1 {
        return m[0][0];
    }
    (0..m.len())
        .map(|j| {
            let minor: Vec<Vec<i64>> = m[1..]
                .iter()
                .map(|r| {
                    r.iter()
                        .enumerate()
                        .filter(|(k, _)| *k != j)
                        .map(|(_, x)| *x)
                        .collect()
                })
                .collect();
            let s = if j % 2 == 0 { 1 } else { -1 };
            s * m[0][j] * det(&minor)
        })
        .sum()
}

fn packings() -> Check {
    for (n, d) in [(1usize, 3i64), (2, 2), (2, 5), (3, 4)] {
        let c = packing_subdivision(n, d).map_err(e)?;
        let r = verify_packing_certificate(&c).map_err(e)?;
        ensure(r.all_ok(), format!("({n},{d}): {r:?}"))?;
        ensure(c.pieces.len() as i64 == d, "piece count")?;
        let amb = c.ambient.normalized_volume().map_err(e)?;
        ensure(amb == rat_int(d), "ambient volume")?;
        for p in &c.pieces {
            let edges: Vec<Vec<i64>> = p.vertices[1..]
                .iter()
                .map(|v| v.iter().zip(&p.vertices[0]).map(|(a, b)| a - b).collect())
                .collect();
            ensure(
                det(&edges).abs() == 1,
                format!("piece {:?} not unimodular", p.vertices),
            )?;
            ensure(det(&p.map.w).abs() == 1, "map not unimodular")?;
        }
    }
    Ok("(1,3), (2,2), (2,5), (3,4) verified".into())
}

fn widths() -> Check {
    for d in [1i64, 2, 3, 5] {
        let target =
            Polytope::from_integer_points(&[vec![0, 0], vec![1, 0], vec![0, d]]).map_err(e)?;
        let c = search_largest_simplex(&target, 1).map_err(e)?;
        ensure(
            verify_simplex_certificate(&c).map_err(e)?.valid,
            "verifier rejects",
        )?;
        ensure(
            c.r >= rat(999_999_999, 1_000_000_000),
            format!("R = {}", c.r),
        )?;
        ensure(
            c.open_supremum && c.r_sup >= Rat::one(),
            format!("supremum {}", c.r_sup),
        )?;
    }
    Ok("R >= 1 - 1e-9 with open supremum 1 for d = 1, 2, 3, 5".into())
}

fn flow_properties() -> Check {
    let t = Instant::now();
    let cfg: FlowConfig = parse_fixture("elliptic_flow").map_err(e)?;
    let fam = cfg
        .load_family(Path::new("elliptic_flow.json"))
        .map_err(e)?;
    ensure(
        fam.ids == ["x/z", "y/z", "z/z"],
        "raw elliptic family expected",
    )?;
    ensure(
        cfg.settings.trajectories == 20
            && cfg.settings.tol == 1e-8
            && cfg.settings.duration == 0.75,
        "config",
    )?;
    let runs = run_flow_batch(&fam, &cfg.settings, cfg.seed);
    let mut worst = [0.0f64; 3];
    for r in &runs {
        let rep = &r.report;
        if let Some(err) = &rep.error {
            return Err(format!("trajectory {}: {err}", rep.index));
        }
        let dre = (rep.end_t[0] - 0.25).abs();
        let area = rep.area_drift.ok_or("no transport")?;
        worst = [
            worst[0].max(dre),
            worst[1].max(rep.max_im_drift),
            worst[2].max(area),
        ];
    }
    ensure(runs.len() == 20, "count")?;
    ensure(worst[0] <= 1e-6, format!("Re t error {:e}", worst[0]))?;
    ensure(worst[1] <= 1e-6, format!("Im t drift {:e}", worst[1]))?;
    ensure(worst[2] <= 1e-3, format!("area drift {:e}", worst[2]))?;
    within(t.elapsed(), 60.0)?;
    Ok(format!(
        "worst: Re t {:.1e}, Im t {:.1e}, area {:.1e}",
        worst[0], worst[1], worst[2]
    ))
}

fn moment_containment() -> Check {
    let t = Instant::now();
    let b = raw_basis(
        &reduce(&fixture_spec("elliptic_basis").map_err(e)?, None)
            .map_err(e)?
            .bundle,
    )
    .map_err(e)?;
    let a: Vec<LatticeVector> = b.values.clone();
    let c: Vec<Complex<f64>> = b
        .lead_coeffs()
        .iter()
        .map(|q| Complex::new(okbody_core::scalar::rat_to_f64(q), 0.0))
        .collect();
    let s = moment_samples(&a, &c, 10_000, 10).map_err(e)?;
    ensure(
        s.iter().all(|m| m[0] > 0.0 && m[0] < 3.0),
        "sample outside (0,3)",
    )?;
    let m = summarize_moments(&a, &s, 0.95).map_err(e)?;
    ensure(m.all_strictly_inside, "summary containment")?;
    ensure(
        m.extent[0][0] <= 0.15 && m.extent[0][1] >= 2.85,
        format!("extent {:?}", m.extent[0]),
    )?;
    within(t.elapsed(), 5.0)?;
    Ok(format!(
        "hull [{:.2e}, {:.6}]",
        m.extent[0][0], m.extent[0][1]
    ))
}

fn files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for ent in std::fs::read_dir(&d).unwrap() {
            let p = ent.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(
                    p.strip_prefix(dir).unwrap().display().to_string(),
                    std::fs::read(&p).unwrap(),
                );
            }
        }
    }
    out
}

fn determinism() -> Check {
    let cfg: PipelineConfig = parse_fixture("elliptic_pipeline").map_err(e)?;
    let (a, b) = (
        tempfile::tempdir().map_err(e)?,
        tempfile::tempdir().map_err(e)?,
    );
    run_pipeline(&cfg, Path::new("elliptic_pipeline.json"), a.path()).map_err(e)?;
    run_pipeline(&cfg, Path::new("elliptic_pipeline.json"), b.path()).map_err(e)?;
    let (fa, fb) = (files(a.path()), files(b.path()));
    ensure(
        fa.contains_key("report.json") && fa.keys().any(|k| k.ends_with(".cert.json")),
        "missing outputs",
    )?;
    ensure(fa.keys().eq(fb.keys()), "different file sets")?;
    for (k, v) in &fa {
        ensure(fb[k] == *v, format!("{k} differs"))?;
    }
    Ok(format!("{} files byte-identical", fa.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 11] = [
        ("golden series", golden_series),
        ("golden valuations", golden_valuations),
        ("immersion certificate", immersion),
        ("monomial special fiber", monomial_special_fiber),
        ("degree/volume identity", degree_volume),
        ("Newton-Okounkov approximants", approximants),
        ("packing certificates", packings),
        ("width certificates", widths),
        ("flow properties", flow_properties),
        ("moment-map containment", moment_containment),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let res = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        match res {
            Ok(msg) => println!("criterion {:>2} PASS  {name}: {msg} ({secs:.2}s)", i + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {msg} ({secs:.2}s)", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
