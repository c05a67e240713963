//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use ftexp::expfit::{self, estimate_exponents, evaluate_grid, solve_coefficients};
use ftexp::fixtures::{self, FixtureSet, INFLATION, PUBLISHED_CHECK_VALUES, PUBLISHED_NODES};
use ftexp::geometry::{
    classify, fermat_point, fermat_point_closed_form, stationarity_residual, weiszfeld, Point2,
    Triangle, TriangleClass, WeiszfeldOptions, DEFAULT_ANGLE_TOL,
};
use ftexp::pipeline::{self, ExponentMode, PipelineConfig, COEFFICIENT_REL_TOL, NODE_TOL};
use ftexp::series::{self, TimeSeries};
use ftexp::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn fixture_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn close(a: Point2, b: Point2, tol: f64) -> bool {
    (a.x - b.x).abs() <= tol && (a.y - b.y).abs() <= tol
}

fn inflation_series() -> TimeSeries {
    series::validate(INFLATION.to_vec()).expect("bundled series is valid")
}

fn c1_interior_nodes() -> Outcome {
    let cases = [
        (
            Triangle::new((1.0, 2.2), (2.0, 3.5), (3.0, 1.4)),
            Point2::new(1.79128927, 2.46610159),
        ),
        (
            Triangle::new((6.0, 0.6), (7.0, 2.4), (8.0, 2.0)),
            Point2::new(7.12649666, 2.10452453),
        ),
    ];
    let mut worst = 0.0f64;
    for (t, expected) in cases {
        let closed = fermat_point_closed_form(&t).map_err(|e| e.to_string())?;
        let iter = weiszfeld(&t.v, WeiszfeldOptions::default()).map_err(|e| e.to_string())?;
        for (label, p) in [("closed form", closed), ("Weiszfeld", iter)] {
            if !close(p, expected, 1e-6) {
                return Err(format!("{label} gives {p}, expected {expected}"));
            }
            worst = worst
                .max((p.x - expected.x).abs())
                .max((p.y - expected.y).abs());
        }
    }
    Ok(format!("max deviation {worst:.2e}"))
}

fn c2_obtuse_nodes() -> Outcome {
    let smoothed = series::smooth(&inflation_series()).map_err(|e| e.to_string())?;
    if smoothed.len() != 9 {
        return Err(format!("expected 9 nodes, got {}", smoothed.len()));
    }
    // 1-based node position and the raw sample it must equal.
    let expected = [
        (2, (3.0, 1.4)),
        (3, (4.0, 0.4)),
        (4, (5.0, 0.3)),
        (5, (6.0, 0.6)),
        (7, (8.0, 2.0)),
        (8, (9.0, 2.6)),
        (9, (10.0, 3.3)),
    ];
    for (pos, sample) in expected {
        let got = smoothed.nodes[pos - 1];
        let want = Point2::from(sample);
        if !close(got, want, 1e-12) {
            return Err(format!("node {pos} is {got}, expected raw sample {want}"));
        }
        let table = Point2::from(PUBLISHED_NODES[pos - 1]);
        if !close(got, table, 1e-12) {
            return Err(format!("node {pos} is {got}, published row is {table}"));
        }
    }
    Ok("7 obtuse-vertex nodes exact".into())
}

fn c3_model_reproduces_nodes() -> Outcome {
    let set = FixtureSet::bundled().map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for ((t, _), want) in PUBLISHED_NODES.iter().zip(PUBLISHED_CHECK_VALUES) {
        let (v, _) = set.eq2_model.evaluate(*t).map_err(|e| e.to_string())?;
        let err = (v - want).abs();
        if err > 1e-6 {
            return Err(format!("t = {t}: model {v}, check table {want}"));
        }
        worst = worst.max(err);
    }
    Ok(format!("max deviation {worst:.2e}"))
}

fn c4_coefficient_recovery() -> Outcome {
    let nodes: Vec<Point2> = PUBLISHED_NODES.iter().map(|&p| p.into()).collect();
    let printed = fixtures::published_coefficients();
    let model =
        solve_coefficients(&nodes, &fixtures::published_exponents()).map_err(|e| e.to_string())?;
    // Binding part: the recovered model reproduces the node values.
    for (p, want) in nodes.iter().zip(PUBLISHED_CHECK_VALUES) {
        let (v, _) = model.evaluate(p.x).map_err(|e| e.to_string())?;
        if (v - want).abs() > 1e-6 || (v - p.y).abs() > 1e-6 {
            return Err(format!(
                "recovered model at t = {}: {v}, expected {want}",
                p.x
            ));
        }
    }
    let mut worst = 0.0f64;
    let mut advisories = Vec::new();
    for (j, (got, want)) in model.coefficients().iter().zip(&printed).enumerate() {
        let scale = want.norm();
        let rel = |g: f64, w: f64| (g - w).abs() / if w != 0.0 { w.abs() } else { scale };
        let dev = rel(got.re, want.re).max(rel(got.im, want.im));
        worst = worst.max(dev);
        if dev > COEFFICIENT_REL_TOL {
            advisories.push(format!(
                "term {}: recovered {got}, printed {want} (rel {dev:.2e})",
                j + 1
            ));
        }
    }
    if advisories.is_empty() {
        Ok(format!("max relative coefficient deviation {worst:.2e}"))
    } else {
        Ok(format!("advisory mismatches: {}", advisories.join("; ")))
    }
}

fn random_point(rng: &mut ChaCha8Rng) -> Point2 {
    Point2::new(rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0))
}

fn interior_triangles(rng: &mut ChaCha8Rng, count: usize) -> Vec<Triangle> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let t = Triangle {
            v: [random_point(rng), random_point(rng), random_point(rng)],
        };
        if classify(&t, DEFAULT_ANGLE_TOL) == TriangleClass::InteriorCase {
            out.push(t);
        }
    }
    out
}

/// Triangles whose vertex 0 carries an angle in [2π/3, 0.98π].
fn obtuse_triangles(rng: &mut ChaCha8Rng, count: usize) -> Vec<Triangle> {
    (0..count)
        .map(|_| {
            let apex = random_point(rng);
            let angle = rng.gen_range(2.0 * PI / 3.0..0.98 * PI);
            let rot = rng.gen_range(0.0..2.0 * PI);
            let (a, b) = (rng.gen_range(0.5..8.0), rng.gen_range(0.5..8.0));
            let p = apex + Point2::new(rot.cos(), rot.sin()) * a;
            let q = apex + Point2::new((rot + angle).cos(), (rot + angle).sin()) * b;
            Triangle { v: [apex, p, q] }
        })
        .collect()
}

fn c5_c6_oracle_equivalence() -> (Outcome, Outcome) {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0005);
    let interior = interior_triangles(&mut rng, 1000);
    let obtuse = obtuse_triangles(&mut rng, 1000);
    let opts = WeiszfeldOptions::default();

    let mut worst_agree = 0.0f64;
    let mut worst_stationarity = 0.0f64;
    let mut c5 = Ok(());
    let mut c6 = Ok(());
    for (k, t) in interior.iter().enumerate() {
        let closed = match fermat_point_closed_form(t) {
            Ok(p) => p,
            Err(e) => {
                c5 = c5.and(Err(format!("interior triangle {k}: {e}")));
                continue;
            }
        };
        match weiszfeld(&t.v, opts) {
            Ok(w) => {
                let d = (closed.x - w.x).abs().max((closed.y - w.y).abs());
                worst_agree = worst_agree.max(d);
                if d > 1e-9 {
                    c5 = c5.and(Err(format!(
                        "interior triangle {k}: closed {closed} vs Weiszfeld {w}"
                    )));
                }
            }
            Err(e) => c5 = c5.and(Err(format!("interior triangle {k}: {e}"))),
        }
        let p = fermat_point(t);
        let r = stationarity_residual(&t.v, p);
        worst_stationarity = worst_stationarity.max(r);
        if r > 1e-7 {
            c6 = c6.and(Err(format!(
                "interior triangle {k}: unit-vector sum {r:.2e}"
            )));
        }
    }
    let mut worst_vertex = 0.0f64;
    for (k, t) in obtuse.iter().enumerate() {
        if classify(t, DEFAULT_ANGLE_TOL) != TriangleClass::ObtuseVertex(0) {
            c5 = c5.and(Err(format!(
                "obtuse triangle {k} classified as {:?}",
                classify(t, DEFAULT_ANGLE_TOL)
            )));
            continue;
        }
        if fermat_point(t) != t.v[0] {
            c5 = c5.and(Err(format!(
                "obtuse triangle {k}: fermat_point is not the obtuse vertex"
            )));
        }
        match weiszfeld(&t.v, opts) {
            Ok(w) => {
                let d = (w.x - t.v[0].x).abs().max((w.y - t.v[0].y).abs());
                worst_vertex = worst_vertex.max(d);
                if d > 1e-6 {
                    c5 = c5.and(Err(format!(
                        "obtuse triangle {k}: Weiszfeld {w} vs vertex {}",
                        t.v[0]
                    )));
                }
            }
            Err(e) => c5 = c5.and(Err(format!("obtuse triangle {k}: {e}"))),
        }
    }
    (
        c5.map(|_| {
            format!(
                "interior agreement {worst_agree:.2e}, obtuse vertex distance {worst_vertex:.2e}"
            )
        }),
        c6.map(|_| format!("max unit-vector sum {worst_stationarity:.2e}")),
    )
}

/// Conjugate-closed exponents with |Re| ≤ 0.3 and well-separated frequencies.
fn random_exponents(rng: &mut ChaCha8Rng, m: usize) -> Vec<Complex> {
    let pairs = m / 2;
    let mut out = Vec::with_capacity(m);
    for k in 0..pairs {
        let a = rng.gen_range(-0.3..0.3);
        let b = (k as f64 + rng.gen_range(0.2..0.8)) * 2.5 / pairs as f64;
        out.push(Complex::new(a, b));
        out.push(Complex::new(a, -b));
    }
    if m % 2 == 1 {
        out.push(Complex::new(rng.gen_range(-0.3..0.3), 0.0));
    }
    out
}

fn c7_exact_interpolation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0007);
    let mut worst_rel_residual = 0.0f64;
    let mut worst_rel_imag = 0.0f64;
    for instance in 0..200 {
        let n = rng.gen_range(2..=12);
        let width = 12.0 / n as f64;
        let nodes: Vec<Point2> = (0..n)
            .map(|i| {
                Point2::new(
                    (i as f64 + rng.gen_range(0.1..0.9)) * width,
                    rng.gen_range(-5.0..5.0),
                )
            })
            .collect();
        let exponents = random_exponents(&mut rng, n);
        let model = solve_coefficients(&nodes, &exponents)
            .map_err(|e| format!("instance {instance}: {e}"))?;
        let max_y = nodes.iter().map(|p| p.y.abs()).fold(0.0, f64::max);
        let bound = 1e-8 * max_y.max(1.0);
        if model.fit_residual > bound {
            return Err(format!(
                "instance {instance} (n = {n}): residual {:.2e} > {bound:.2e}",
                model.fit_residual
            ));
        }
        worst_rel_residual = worst_rel_residual.max(model.fit_residual / max_y.max(1.0));
        let (lo, hi) = (nodes[0].x, nodes[n - 1].x);
        let grid = evaluate_grid(&model, lo, hi, (hi - lo) / 200.0).map_err(|e| e.to_string())?;
        let imag = grid.iter().map(|g| g.imag_residual).fold(0.0, f64::max);
        if imag > 1e-6 * max_y {
            return Err(format!(
                "instance {instance} (n = {n}): imaginary residual {imag:.2e}"
            ));
        }
        worst_rel_imag = worst_rel_imag.max(imag / max_y);
    }
    Ok(format!(
        "200 instances, max relative residual {worst_rel_residual:.2e}, max relative imaginary part {worst_rel_imag:.2e}"
    ))
}

/// Pairs each expected exponent with its nearest unused estimate.
fn multiset_distance(expected: &[Complex], got: &[Complex]) -> f64 {
    if expected.len() != got.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; got.len()];
    let mut worst = 0.0f64;
    for e in expected {
        let (j, d) = got
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, g)| (j, (g - e).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("same length");
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

fn prony_case(rng: &mut ChaCha8Rng, m: usize) -> Vec<Complex> {
    match m {
        1 => vec![Complex::new(rng.gen_range(-0.3..0.3), 0.0)],
        2 => {
            let (a, b) = (rng.gen_range(-0.3..0.3), rng.gen_range(0.3..1.5));
            vec![Complex::new(a, b), Complex::new(a, -b)]
        }
        _ => {
            // ± conjugate quadruple.
            let (a, b) = (rng.gen_range(0.1..0.3), rng.gen_range(0.3..1.5));
            vec![
                Complex::new(a, b),
                Complex::new(a, -b),
                Complex::new(-a, b),
                Complex::new(-a, -b),
            ]
        }
    }
}

fn c8_prony_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0008);
    let mut worst = 0.0f64;
    let mut count = 0;
    for m in [1, 2, 4] {
        for instance in 0..20 {
            let exponents = prony_case(&mut rng, m);
            // Conjugate exponents get conjugate coefficients so samples are real.
            let mut coefficients = Vec::with_capacity(m);
            for l in &exponents {
                if l.im < 0.0 {
                    let partner: Complex = coefficients[coefficients.len() - 1];
                    coefficients.push(partner.conj());
                } else {
                    let c = Complex::new(
                        rng.gen_range(0.5..2.0),
                        if l.im > 0.0 {
                            rng.gen_range(-1.0..1.0)
                        } else {
                            0.0
                        },
                    );
                    coefficients.push(c);
                }
            }
            let count_samples = 4 * m;
            let span = 12.0;
            let nodes: Vec<Point2> = (0..count_samples)
                .map(|k| {
                    let t = span * k as f64 / (count_samples - 1) as f64;
                    let v: Complex = coefficients
                        .iter()
                        .zip(&exponents)
                        .map(|(c, l)| c * (l * t).exp())
                        .sum();
                    Point2::new(t, v.re)
                })
                .collect();
            let got = estimate_exponents(&nodes, m, false, count_samples)
                .map_err(|e| format!("m = {m}, instance {instance}: {e}"))?;
            let d = multiset_distance(&exponents, &got);
            if d > 1e-6 {
                return Err(format!(
                    "m = {m}, instance {instance}: expected {exponents:?}, got {got:?}"
                ));
            }
            worst = worst.max(d);
            count += 1;
        }
    }
    Ok(format!("{count} sums, max exponent error {worst:.2e}"))
}

fn c9_pipeline_smoke() -> Outcome {
    let report = pipeline::verify_paper(
        &FixtureSet::bundled().map_err(|e| e.to_string())?,
        NODE_TOL,
        COEFFICIENT_REL_TOL,
    );
    if !report.passed() {
        return Err(format!("verify-paper failed:\n{report}"));
    }
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let fx = fixture_dir();
    let mut config = PipelineConfig::new(fx.join("czech_inflation.csv"), dir.path().join("run"));
    config.nodes = Some(fx.join("table2_ten.csv"));
    config.exponent_mode = Some(ExponentMode::Given(fx.join("eq2_exponents.csv")));
    let artifacts = pipeline::run(&config).map_err(|e| e.to_string())?;
    for path in [
        &artifacts.smoothed_path,
        &artifacts.model_path,
        &artifacts.grid_path,
    ] {
        if !path.exists() {
            return Err(format!("{} was not written", path.display()));
        }
    }
    // Integer abscissae in 3..=10 that appear in the published node table.
    let mut worst = 0.0f64;
    let mut checked = 0;
    for &(t, y) in PUBLISHED_NODES
        .iter()
        .filter(|(t, _)| t.fract() == 0.0 && (3.0..=10.0).contains(t))
    {
        let g = artifacts
            .grid
            .iter()
            .find(|g| (g.t - t).abs() < 1e-9)
            .ok_or_else(|| format!("grid has no point at t = {t}"))?;
        let d = (g.value - y).abs();
        if d > 1e-6 {
            return Err(format!("grid at t = {t}: {}, expected {y}", g.value));
        }
        worst = worst.max(d);
        checked += 1;
    }
    let written = ftexp::io::read_model(&artifacts.model_path).map_err(|e| e.to_string())?;
    let expected = ftexp::io::ModelFile::from_model(&artifacts.model);
    if written != expected {
        return Err(format!(
            "model file does not round-trip: wrote {expected:?}, read {written:?}"
        ));
    }
    Ok(format!(
        "verify-paper passes; {checked} grid values within {worst:.2e}"
    ))
}

fn c10_exponent_structure() -> Outcome {
    fixtures::assert_published_exponent_structure().map_err(|e| e.to_string())?;
    let set = FixtureSet::bundled().map_err(|e| e.to_string())?;
    let exps = set.eq2_model.exponents();
    if !(expfit::is_negation_closed(&exps, 0.0) && expfit::is_conjugate_closed(&exps, 0.0)) {
        return Err("bundled model file exponents are not closed".into());
    }
    Ok("closed under negation and conjugation (exact)".into())
}

fn main() -> ExitCode {
    let start = Instant::now();
    let (c5, c6) = c5_c6_oracle_equivalence();
    let results: Vec<(&str, Outcome)> = vec![
        (
            "interior published nodes (closed form and Weiszfeld)",
            c1_interior_nodes(),
        ),
        ("obtuse-vertex published nodes", c2_obtuse_nodes()),
        (
            "published model reproduces node values",
            c3_model_reproduces_nodes(),
        ),
        ("coefficient recovery", c4_coefficient_recovery()),
        ("closed form vs Weiszfeld on 2000 random triangles", c5),
        ("stationarity of interior points", c6),
        (
            "exact interpolation on 200 random instances",
            c7_exact_interpolation(),
        ),
        ("Prony round trip", c8_prony_round_trip()),
        ("pipeline smoke", c9_pipeline_smoke()),
        ("published exponent structure", c10_exponent_structure()),
    ];
    let mut failed = 0;
    for (i, (name, outcome)) in results.iter().enumerate() {
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed in {:.1?}",
        results.len() - failed,
        results.len(),
        start.elapsed()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
