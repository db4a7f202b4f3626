//! Shared fixtures for the integration targets.
#![allow(dead_code)]

use hopfseg::analytic::Factor;
use hopfseg::mobius::{pushforward_hopf, MobiusMap};
use hopfseg::nodal::boundary_zeros;
use hopfseg::segregation::reconstruct;
use hopfseg::{Func, C64};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::f64::consts::PI;

pub const DEFAULT_SEED: u64 = 0x5eed_2024;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn seed() -> u64 {
    std::env::var("HOPFSEG_SEED")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_SEED)
}

pub fn rng() -> StdRng {
    StdRng::seed_from_u64(seed())
}

pub fn quarter() -> Func {
    Func::constant(c(0.25, 0.0)).unwrap()
}

pub fn monomial(order: u32) -> Func {
    Func::monomial(c(0.25, 0.0), c(0.0, 0.0), order).unwrap()
}

/// `z (z − w)² / 4`, admissible exactly when `cos(5 arg w / 2) = 0`.
pub fn f_w(w: C64) -> Func {
    Func::new(c(0.25, 0.0), vec![Factor::new(c(0.0, 0.0), 1), Factor::new(w, 2)], vec![], vec![]).unwrap()
}

pub fn f_w_admissible() -> Func {
    f_w(C64::from_polar(0.1, PI / 5.0))
}

/// `z³ (z − b)² / 4`: a five-point at the origin plus a second nodal
/// component through the simple zero of the primitive at `7b/5`.
pub fn two_component() -> Func {
    let b = C64::from_polar(0.45, 0.9);
    Func::new(c(0.25, 0.0), vec![Factor::new(c(0.0, 0.0), 3), Factor::new(b, 2)], vec![], vec![]).unwrap()
}

pub fn random_point<R: Rng>(rng: &mut R, max_radius: f64) -> C64 {
    let r = max_radius * rng.gen::<f64>().sqrt();
    C64::from_polar(r, rng.gen_range(0.0..2.0 * PI))
}

/// Points in the disk of radius `max_radius` that are pairwise at least
/// `gap` apart.
pub fn separated_points<R: Rng>(rng: &mut R, count: usize, max_radius: f64, gap: f64) -> Vec<C64> {
    let mut pts: Vec<C64> = Vec::with_capacity(count);
    while pts.len() < count {
        let p = random_point(rng, max_radius);
        if pts.iter().all(|q| (p - *q).norm() >= gap) {
            pts.push(p);
        }
    }
    pts
}

fn random_leading<R: Rng>(rng: &mut R) -> C64 {
    C64::from_polar(rng.gen_range(0.1..1.0), rng.gen_range(0.0..2.0 * PI))
}

/// A function with only even-order zeros, and a base point for it. Such a
/// function is admissible from any base.
pub fn random_even<R: Rng>(rng: &mut R) -> (Func, C64) {
    match rng.gen_range(0..4) {
        0 => (Func::constant(random_leading(rng)).unwrap(), random_point(rng, 0.6)),
        kind => {
            let n = rng.gen_range(1..=2);
            let roots = separated_points(rng, n, 0.6, 0.25);
            let factors: Vec<Factor<f64>> = roots
                .iter()
                .enumerate()
                .map(|(i, &z)| Factor::new(z, if i == 0 && rng.gen_bool(0.25) { 4 } else { 2 }))
                .collect();
            let f = Func::new(random_leading(rng), factors, vec![], vec![]).unwrap();
            let base = if kind == 1 { random_point(rng, 0.6) } else { roots[0] };
            (f, base)
        }
    }
}

pub fn random_mobius<R: Rng>(rng: &mut R, max_alpha: f64) -> MobiusMap<f64> {
    MobiusMap::new(random_point(rng, max_alpha), rng.gen_range(0.0..2.0 * PI)).unwrap()
}

/// `f` moved by `m` together with where its base point lands.
pub fn pushed(f: &Func, base: C64, m: &MobiusMap<f64>) -> (Func, C64) {
    (pushforward_hopf(f, m).unwrap(), m.invert().apply(base))
}

/// Smallest angular gap between consecutive boundary zeros a lattice of the
/// given resolution is expected to separate.
pub const MIN_BOUNDARY_GAP: f64 = 0.25;

/// Whether every nodal domain of the state is wide enough to be seen on the
/// lattice: a cap cut off by two boundary zeros `δ` apart is only about
/// `δ²/8` deep.
pub fn resolvable(f: &Func, base: C64, resolution: usize) -> bool {
    let Ok(state) = reconstruct(f, base, resolution) else { return false };
    let Ok(zeros) = boundary_zeros(&state, 4096) else { return false };
    let mut t: Vec<f64> = zeros.iter().map(|z| z.theta.rem_euclid(2.0 * PI)).collect();
    t.sort_by(|a, b| a.partial_cmp(b).unwrap());
    t.len() < 2 || (0..t.len()).all(|i| {
        let next = if i + 1 < t.len() { t[i + 1] } else { t[0] + 2.0 * PI };
        next - t[i] >= MIN_BOUNDARY_GAP
    })
}
