//! End-to-end acceptance checks. Runs as a plain binary and prints one
//! line per criterion; exits nonzero if any fails.

mod common;

use common::*;
use hopfseg::analytic::Polynomial;
use hopfseg::branch::{build_slit_disk, primitive};
use hopfseg::desingularize::{beta_moment, critical_zeros, excess_index, moment_c, reduce_to_simple, split_zero};
use hopfseg::diffusion::{boundary_from_state_with, interface_distance, solve};
use hopfseg::nodal::{trace, verify_index};
use hopfseg::quadrature::{integrate_real, QuadOptions};
use hopfseg::segregation::{admissibility, dirichlet_energy, energy_from_hopf, local_exponent, reconstruct};
use hopfseg::{Func, C64};
use rand::Rng;
use rayon::prelude::*;
use std::f64::consts::PI;
use std::time::{Duration, Instant};

const RESOLUTION: usize = 256;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

/// Residual `|Re F(w)|` of `f_w` with `w = 0.1 e^{iφ}`, from the simple zero.
fn rigidity_residual(phi: f64) -> Result<(f64, bool), String> {
    let f = f_w(C64::from_polar(0.1, phi));
    let rep = admissibility(&f, c(0.0, 0.0), 1e-8).map_err(|e| format!("φ={phi}: {e}"))?;
    let r = rep.residuals.iter().find(|r| r.0.norm() > 0.05).map(|r| r.1).ok_or("no residual at w")?;
    Ok((r, rep.admissible))
}

fn golden_min(mut a: f64, mut b: f64, g: impl Fn(f64) -> f64) -> f64 {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - ratio * (b - a);
    let mut x2 = a + ratio * (b - a);
    let (mut g1, mut g2) = (g(x1), g(x2));
    while b - a > 1e-12 {
        if g1 < g2 {
            b = x2;
            x2 = x1;
            g2 = g1;
            x1 = b - ratio * (b - a);
            g1 = g(x1);
        } else {
            a = x1;
            x1 = x2;
            g1 = g2;
            x2 = a + ratio * (b - a);
            g2 = g(x2);
        }
    }
    0.5 * (a + b)
}

fn criterion_1() -> Outcome {
    let steps = 6284;
    let scan: Vec<(f64, f64, bool)> = (0..steps)
        .into_par_iter()
        .map(|k| {
            let phi = k as f64 * 1e-3;
            rigidity_residual(phi).map(|(r, a)| (phi, r, a))
        })
        .collect::<Result<_, _>>()?;
    let n = scan.len();
    let minima: Vec<usize> = (0..n)
        .filter(|&i| {
            let prev = scan[(i + n - 1) % n].1;
            let next = scan[(i + 1) % n].1;
            scan[i].1 <= prev && scan[i].1 < next
        })
        .collect();
    ensure(minima.len() == 5, || format!("{} local minima in the scan", minima.len()))?;
    let mut refined = Vec::new();
    for &i in &minima {
        let phi = scan[i].0;
        let best = golden_min(phi - 1e-3, phi + 1e-3, |p| rigidity_residual(p).map(|r| r.0).unwrap_or(f64::INFINITY));
        let (res, adm) = rigidity_residual(best)?;
        ensure(adm, || format!("refined angle {best:.6} not admissible (residual {res:.2e})"))?;
        let expected = (0..5).map(|k| PI / 5.0 + 2.0 * PI * k as f64 / 5.0);
        let miss = expected.map(|e| angle_gap(best, e)).fold(f64::INFINITY, f64::min);
        ensure(miss <= 1e-3, || format!("refined angle {best:.6} is {miss:.2e} from the nearest predicted angle"))?;
        refined.push(best);
    }
    for &(phi, r, adm) in &scan {
        let near = refined.iter().any(|&a| angle_gap(phi, a) <= 1e-3);
        ensure(near || !adm, || format!("φ={phi:.3} admissible away from the predicted angles (residual {r:.2e})"))?;
    }
    let (r0, _) = rigidity_residual(0.0)?;
    let closed = 4.0 / 15.0 * 0.1f64.powf(2.5);
    let rel = (r0 - closed).abs() / closed;
    ensure(rel <= 1e-6, || format!("φ=0 residual {r0:.10e} vs {closed:.10e} (rel {rel:.1e})"))?;
    Ok(format!("5 admissible angles located, φ=0 residual rel err {rel:.1e}"))
}

fn criterion_2() -> Outcome {
    let f = monomial(3);
    let slit = build_slit_disk(&f, c(0.0, 0.0)).map_err(|e| e.to_string())?;
    let v = primitive(&f, &slit, c(1.0, 0.0), 1e-12).map_err(|e| e.to_string())?.value;
    let err = (v - c(0.4, 0.0)).norm();
    ensure(err <= 1e-9, || format!("F(1) = {v}"))?;
    Ok(format!("F(1) = {:.12}, err {err:.1e}", v.re))
}

fn index_case(name: &str, f: &Func, base: C64) -> Result<(usize, usize, usize), String> {
    let s = reconstruct(f, base, RESOLUTION).map_err(|e| format!("{name}: reconstruct: {e}"))?;
    let g = trace(&s).map_err(|e| format!("{name}: trace: {e}"))?;
    ensure(g.issues.is_empty(), || format!("{name}: trace issues {:?}", g.issues))?;
    let r = verify_index(&g);
    ensure(r.formula_check && r.euler_check && r.degree_check, || format!("{name}: {r:?}"))?;
    Ok((r.m, r.n, r.t))
}

fn criterion_3() -> Outcome {
    let mut cases: Vec<(String, Func, C64)> = Vec::new();
    let mut rng = rng();
    let mut rejected = 0;
    while cases.len() < 32 {
        let (f, base) = random_even(&mut rng);
        if resolvable(&f, base, RESOLUTION) {
            cases.push((format!("even#{}", cases.len()), f, base));
        } else {
            rejected += 1;
        }
    }
    let z3 = monomial(3);
    for eps in [0.01, 0.05] {
        for k in 0..5 {
            let res = split_zero(&z3, c(0.0, 0.0), eps, k).map_err(|e| format!("split z3 eps {eps} k {k}: {e}"))?;
            cases.push((format!("split z3 eps={eps} k={k}"), res.f_new, c(0.0, 0.0)));
        }
    }
    let z2 = monomial(2);
    for k in 0..4 {
        let res = split_zero(&z2, c(0.0, 0.0), 0.02, k).map_err(|e| format!("split z2 k {k}: {e}"))?;
        cases.push((format!("split z2 k={k}"), res.f_new, c(0.0, 0.0)));
    }
    let fw = f_w_admissible();
    let w = C64::from_polar(0.1, PI / 5.0);
    for k in 0..3 {
        let res = split_zero(&fw, w, 0.01, k).map_err(|e| format!("split f_w k {k}: {e}"))?;
        cases.push((format!("split f_w k={k}"), res.f_new, c(0.0, 0.0)));
    }
    for (name, f) in [("z3", monomial(3)), ("f_w", fw.clone()), ("two-component", two_component())] {
        let red = reduce_to_simple(&f, 1.0).map_err(|e| format!("reduce {name}: {e}"))?;
        cases.push((format!("reduced {name}"), red.f, red.base));
    }
    for i in 0..4 {
        let m = random_mobius(&mut rng, 0.4);
        let (f, base) = pushed(&z3, c(0.0, 0.0), &m);
        cases.push((format!("moved z3 #{i}"), f, base));
    }
    let fig = two_component();
    let counts = index_case("two-component", &fig, c(0.0, 0.0))?;
    ensure(counts == (7, 6, 2), || format!("two-component counts {counts:?}, expected (7, 6, 2)"))?;
    let total = cases.len() + 1;
    for (name, f, base) in &cases {
        index_case(name, f, *base)?;
    }
    Ok(format!("{total} configurations ({rejected} sub-grid draws skipped), two-component (M,N,T) = (7,6,2)"))
}

fn criterion_4() -> Outcome {
    let f = monomial(3);
    let mut thetas = Vec::new();
    for k in 0..5 {
        let r = split_zero(&f, c(0.0, 0.0), 0.01, k).map_err(|e| format!("branch {k}: {e}"))?;
        let w0 = r.new_zero();
        ensure(r.f_new.order_at(c(0.0, 0.0)) == 2, || format!("branch {k}: ord(0) = {}", r.f_new.order_at(c(0.0, 0.0))))?;
        ensure(r.f_new.order_at(w0) == 1, || format!("branch {k}: ord(ω0) = {}", r.f_new.order_at(w0)))?;
        let worst = r.admissibility.max_residual();
        ensure(worst <= 1e-8, || format!("branch {k}: residual {worst:.2e}"))?;
        thetas.push(r.theta);
    }
    for k in 0..5 {
        let gap = (thetas[(k + 1) % 5] - thetas[k]).rem_euclid(2.0 * PI);
        ensure((gap - 2.0 * PI / 5.0).abs() <= 1e-3, || format!("θ spacing {gap:.6} between branches {k},{}", (k + 1) % 5))?;
    }
    let red = reduce_to_simple(&f, 1.0).map_err(|e| format!("reduce: {e}"))?;
    let (_, crit) = critical_zeros(&red.f).map_err(|e| e.to_string())?;
    ensure(crit.len() == 3 && crit.iter().all(|c| c.1 == 1), || format!("criticals after reduction {crit:?}"))?;
    let s = reconstruct(&red.f, red.base, RESOLUTION).map_err(|e| e.to_string())?;
    let g = trace(&s).map_err(|e| e.to_string())?;
    ensure(g.issues.is_empty(), || format!("trace issues {:?}", g.issues))?;
    let interior: Vec<_> = g.interior_vertices().collect();
    ensure(
        interior.len() == 3 && interior.iter().all(|v| v.multiplicity == 3 && g.degree(v.id) == 3),
        || format!("interior vertices {:?}", interior.iter().map(|v| (v.multiplicity, g.degree(v.id))).collect::<Vec<_>>()),
    )?;
    let r = verify_index(&g);
    ensure(r.t == 1 && r.index_sum == 3 && r.formula_check && r.euler_check, || format!("{r:?}"))?;
    Ok(format!("5 branches split, reduction in {} steps to three 3-points", red.steps.len()))
}

fn criterion_5() -> Outcome {
    let mut worst: f64 = 0.0;
    for (f, target) in [(quarter(), PI / 2.0), (monomial(2), PI / 4.0), (monomial(3), PI / 5.0)] {
        let oracle = energy_from_hopf(&f);
        ensure((oracle - target).abs() <= 1e-6 * target, || format!("polar oracle {oracle} vs {target}"))?;
        let s = reconstruct(&f, c(0.0, 0.0), RESOLUTION).map_err(|e| e.to_string())?;
        let e = dirichlet_energy(&s);
        let rel = (e - target).abs() / target;
        ensure(rel <= 0.02, || format!("grid energy {e:.6} vs {target:.6} (rel {rel:.3})"))?;
        worst = worst.max(rel);
    }
    Ok(format!("worst relative gap {:.3}%", 100.0 * worst))
}

fn criterion_6() -> Outcome {
    let radii = [0.02, 0.04, 0.08, 0.16];
    let mut found = Vec::new();
    for (f, expected) in [(monomial(3), 2.5), (monomial(1), 1.5)] {
        let s = reconstruct(&f, c(0.0, 0.0), RESOLUTION).map_err(|e| e.to_string())?;
        let h = local_exponent(&s, c(0.0, 0.0), &radii).map_err(|e| e.to_string())?;
        ensure((h - expected).abs() <= 0.05, || format!("exponent {h:.4}, expected {expected}"))?;
        found.push(h);
    }
    Ok(format!("exponents {:.4} and {:.4}", found[0], found[1]))
}

fn criterion_7() -> Outcome {
    let c2 = moment_c(2);
    let c1 = moment_c(1);
    let m = beta_moment(2, 2);
    // independent check: c₁ = ∫₀¹ s^{1/2}(1−s)^{1/2} ds by adaptive quadrature
    let quad = integrate_real(|s: f64| (s * (1.0 - s)).sqrt(), 0.0, 1.0, QuadOptions::abs(1e-13)).value.re;
    for (name, got, want) in [("c2", c2, 4.0 / 15.0), ("c1", c1, PI / 8.0), ("M(2,2)", m, 1.0 / 12.0), ("c1 quadrature", quad, PI / 8.0)] {
        ensure((got - want).abs() <= 1e-10, || format!("{name} = {got:.15} vs {want:.15}"))?;
    }
    Ok(format!("c2 = {c2:.12}, c1 = {c1:.12}, M = {m:.12}"))
}

fn criterion_8(f: Func, label: &str) -> Outcome {
    let base = c(0.0, 0.0);
    let s = reconstruct(&f, base, RESOLUTION).map_err(|e| e.to_string())?;
    let g = trace(&s).map_err(|e| e.to_string())?;
    let mut defects = Vec::new();
    let mut distance = f64::NAN;
    for mu in [1e2, 1e3, 1e4] {
        let cfg = boundary_from_state_with(&s, 1024, mu, RESOLUTION).map_err(|e| e.to_string())?;
        let field = solve(&cfg).map_err(|e| format!("μ={mu}: {e}"))?;
        defects.push(field.segregation_defect);
        distance = interface_distance(&field, &s, &g).map_err(|e| e.to_string())?;
    }
    ensure(defects.windows(2).all(|d| d[1] < d[0]), || format!("{label}: defects {defects:?} not decreasing"))?;
    ensure(distance <= 2.0, || format!("{label}: interface distance {distance:.3} cells"))?;
    Ok(format!("{label}: distance {distance:.3} cells, defects {:.2e} > {:.2e} > {:.2e}", defects[0], defects[1], defects[2]))
}

fn criterion_9a() -> Outcome {
    let mut rng = rng();
    let mut circles = 0;
    for _ in 0..20 {
        let n = rng.gen_range(2..=5);
        let roots = separated_points(&mut rng, n, 0.8, 0.4);
        let mut p = Polynomial::one();
        for &r in &roots {
            p = p.mul(&Polynomial::linear(c(1.0, 0.0), -r));
        }
        let noisy = Polynomial::new(
            p.coeffs.iter().map(|&a| a + C64::from_polar(1e-3, rng.gen_range(0.0..2.0 * PI))).collect(),
        );
        for (i, &r) in roots.iter().enumerate() {
            let sep = roots.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, q)| (r - q).norm()).fold(f64::INFINITY, f64::min);
            let w = noisy.winding(r, 0.3 * sep).map_err(|e| e.to_string())?;
            ensure(w == 1, || format!("winding {w} around {r} for {} roots", roots.len()))?;
            circles += 1;
        }
    }
    Ok(format!("{circles} circles, all winding 1"))
}

fn criterion_9b() -> Outcome {
    let mut rng = rng();
    let mut inputs: Vec<(String, Func)> = vec![
        ("z3".into(), monomial(3)),
        ("z4".into(), monomial(4)),
        ("z5".into(), monomial(5)),
        ("f_w".into(), f_w_admissible()),
        ("two-component".into(), two_component()),
    ];
    for i in 0..3 {
        let m = random_mobius(&mut rng, 0.3);
        inputs.push((format!("moved z3 #{i}"), pushed(&monomial(3), c(0.0, 0.0), &m).0));
    }
    let mut steps = 0;
    for (name, f) in &inputs {
        let (_, crit) = critical_zeros(f).map_err(|e| format!("{name}: {e}"))?;
        let alpha = excess_index(&crit);
        ensure(alpha <= 4, || format!("{name}: α = {alpha}"))?;
        let red = reduce_to_simple(f, 1.0).map_err(|e| format!("{name} (α = {alpha}): {e}"))?;
        let (_, after) = critical_zeros(&red.f).map_err(|e| e.to_string())?;
        ensure(excess_index(&after) == 0, || format!("{name}: criticals left {after:?}"))?;
        steps += red.steps.len();
    }
    Ok(format!("{} inputs reduced in {steps} steps", inputs.len()))
}

fn main() {
    let crit8_quarter = || criterion_8(quarter(), "f = 1/4");
    let crit8_cubic = || criterion_8(monomial(3), "f = z³/4");
    let table: Vec<(&str, u64, Box<dyn Fn() -> Outcome>)> = vec![
        ("1", 30, Box::new(criterion_1)),
        ("2", 1, Box::new(criterion_2)),
        ("3", 300, Box::new(criterion_3)),
        ("4", 60, Box::new(criterion_4)),
        ("5", 30, Box::new(criterion_5)),
        ("6", 30, Box::new(criterion_6)),
        ("7", 1, Box::new(criterion_7)),
        ("8a", 120, Box::new(crit8_quarter)),
        ("8b", 120, Box::new(crit8_cubic)),
        ("9a", 60, Box::new(criterion_9a)),
        ("9b", 300, Box::new(criterion_9b)),
    ];
    println!("seed {}", seed());
    let mut failed = 0;
    for (id, budget, run) in &table {
        let start = Instant::now();
        let outcome = run();
        let took = start.elapsed();
        let over = took > Duration::from_secs(*budget);
        let (status, detail) = match (&outcome, over) {
            (Ok(d), false) => ("PASS", d.clone()),
            (Ok(d), true) => ("FAIL", format!("{d}; over budget")),
            (Err(e), _) => ("FAIL", e.clone()),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!("criterion {id}: {status} ({detail}; {:.2} s / {budget} s)", took.as_secs_f64());
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
