//! Base formulas of the 24 noiseless benchmark functions.
//!
//! Every formula is written in its own coordinate frame `z` and re-centred so
//! that the global optimum sits at `z = 0`. The instance transform (shift and
//! rotation) is applied by [`super::ProblemInstance`] before calling into this
//! module. Internal conditioning and the oscillation/asymmetry transforms are
//! kept; the per-function random rotations of the reference suite are not.

use std::f64::consts::PI;
use std::sync::OnceLock;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::rng::rng_from;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BenchmarkFunction {
    pub function_id: u32,
    pub name: &'static str,
    pub separable: bool,
    pub multimodal: bool,
    /// Whether instances apply a rotation on top of the shift.
    pub rotated: bool,
}

const fn entry(
    function_id: u32,
    name: &'static str,
    separable: bool,
    multimodal: bool,
    rotated: bool,
) -> BenchmarkFunction {
    BenchmarkFunction {
        function_id,
        name,
        separable,
        multimodal,
        rotated,
    }
}

pub const CATALOG: [BenchmarkFunction; 24] = [
    entry(1, "Sphere", true, false, false),
    entry(2, "Separable Ellipsoidal", true, false, false),
    entry(3, "Rastrigin", true, true, false),
    entry(4, "Bueche-Rastrigin", true, true, false),
    entry(5, "Linear Slope", true, false, false),
    entry(6, "Attractive Sector", false, false, true),
    entry(7, "Step Ellipsoidal", false, false, true),
    entry(8, "Rosenbrock", false, false, false),
    entry(9, "Rotated Rosenbrock", false, false, true),
    entry(10, "Ellipsoidal", false, false, true),
    entry(11, "Discus", false, false, true),
    entry(12, "Bent Cigar", false, false, true),
    entry(13, "Sharp Ridge", false, false, true),
    entry(14, "Different Powers", false, false, true),
    entry(15, "Rotated Rastrigin", false, true, true),
    entry(16, "Weierstrass", false, true, true),
    entry(17, "Schaffers F7", false, true, true),
    entry(18, "Schaffers F7 (ill-conditioned)", false, true, true),
    entry(19, "Composite Griewank-Rosenbrock", false, true, true),
    entry(20, "Schwefel", false, true, true),
    entry(21, "Gallagher 101 Peaks", false, true, true),
    entry(22, "Gallagher 21 Peaks", false, true, true),
    entry(23, "Katsuura", false, true, true),
    entry(24, "Lunacek bi-Rastrigin", false, true, true),
];

pub fn lookup(function_id: u32) -> Option<&'static BenchmarkFunction> {
    CATALOG.iter().find(|f| f.function_id == function_id)
}

/// Fraction `i / (d - 1)`, zero in one dimension.
fn frac(i: usize, d: usize) -> f64 {
    if d <= 1 {
        0.0
    } else {
        i as f64 / (d - 1) as f64
    }
}

fn t_osz(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let xh = x.abs().ln();
    let (c1, c2) = if x > 0.0 { (10.0, 7.9) } else { (5.5, 3.1) };
    x.signum() * (xh + 0.049 * ((c1 * xh).sin() + (c2 * xh).sin())).exp()
}

fn t_asy(z: &mut [f64], beta: f64) {
    let d = z.len();
    for (i, v) in z.iter_mut().enumerate() {
        if *v > 0.0 {
            *v = v.powf(1.0 + beta * frac(i, d) * v.sqrt());
        }
    }
}

fn lambda(z: &mut [f64], alpha: f64) {
    let d = z.len();
    for (i, v) in z.iter_mut().enumerate() {
        *v *= alpha.powf(0.5 * frac(i, d));
    }
}

fn f_pen(x: &[f64]) -> f64 {
    x.iter().map(|v| (v.abs() - 5.0).max(0.0).powi(2)).sum()
}

fn rastrigin_core(z: &[f64]) -> f64 {
    let d = z.len() as f64;
    10.0 * (d - z.iter().map(|v| (2.0 * PI * v).cos()).sum::<f64>())
        + z.iter().map(|v| v * v).sum::<f64>()
}

fn rosenbrock_core(z: &[f64]) -> f64 {
    z.windows(2)
        .map(|w| 100.0 * (w[0] * w[0] - w[1]).powi(2) + (w[0] - 1.0).powi(2))
        .sum()
}

fn schaffers(x: &[f64], cond: f64) -> f64 {
    let d = x.len();
    let mut z = x.to_vec();
    t_asy(&mut z, 0.5);
    lambda(&mut z, cond);
    if d < 2 {
        return 10.0 * f_pen(x);
    }
    let s: Vec<f64> = z
        .windows(2)
        .map(|w| (w[0] * w[0] + w[1] * w[1]).sqrt())
        .collect();
    let mean = s
        .iter()
        .map(|si| si.sqrt() + si.sqrt() * (50.0 * si.powf(0.2)).sin().powi(2))
        .sum::<f64>()
        / (d - 1) as f64;
    mean * mean + 10.0 * f_pen(x)
}

struct Gallagher {
    peaks: Vec<Vec<f64>>,
    weights: Vec<f64>,
    /// Per-peak diagonal conditioning, already divided by alpha^(1/4).
    diags: Vec<Vec<f64>>,
}

impl Gallagher {
    fn build(n_peaks: usize, top_alpha: f64, dim: usize, tag: u64) -> Self {
        let mut rng = rng_from(&[0x6A11, tag, dim as u64]);
        let mut peaks = vec![vec![0.0; dim]];
        for _ in 1..n_peaks {
            peaks.push((0..dim).map(|_| rng.random_range(-4.9..4.9)).collect());
        }
        let mut weights = vec![10.0];
        for i in 1..n_peaks {
            weights.push(1.1 + 8.0 * (i - 1) as f64 / (n_peaks - 2) as f64);
        }
        let mut alphas: Vec<f64> = (0..n_peaks - 1)
            .map(|j| 1000f64.powf(2.0 * j as f64 / (n_peaks - 2) as f64))
            .collect();
        alphas.shuffle(&mut rng);
        alphas.insert(0, top_alpha);
        let diags = alphas
            .iter()
            .map(|&a| {
                let mut perm: Vec<usize> = (0..dim).collect();
                perm.shuffle(&mut rng);
                perm.iter()
                    .map(|&p| a.powf(0.5 * frac(p, dim)) / a.powf(0.25))
                    .collect()
            })
            .collect();
        Gallagher {
            peaks,
            weights,
            diags,
        }
    }

    fn eval(&self, x: &[f64]) -> f64 {
        let d = x.len() as f64;
        let best = self
            .peaks
            .iter()
            .zip(&self.weights)
            .zip(&self.diags)
            .map(|((y, w), c)| {
                let q: f64 = x
                    .iter()
                    .zip(y)
                    .zip(c)
                    .map(|((xi, yi), ci)| ci * (xi - yi).powi(2))
                    .sum();
                w * (-q / (2.0 * d)).exp()
            })
            .fold(f64::NEG_INFINITY, f64::max);
        t_osz(10.0 - best).powi(2) + f_pen(x)
    }
}

fn gallagher(n_peaks: usize, dim: usize) -> &'static Gallagher {
    // Peaks are fixed per (function, dimension); 64 dimensions is far beyond use.
    static CACHE_101: OnceLock<Vec<OnceLock<Gallagher>>> = OnceLock::new();
    static CACHE_21: OnceLock<Vec<OnceLock<Gallagher>>> = OnceLock::new();
    let (cache, alpha) = if n_peaks == 101 {
        (&CACHE_101, 1000.0)
    } else {
        (&CACHE_21, 1000f64.powi(2))
    };
    let slots = cache.get_or_init(|| (0..=64).map(|_| OnceLock::new()).collect());
    match slots.get(dim) {
        Some(slot) => slot.get_or_init(|| Gallagher::build(n_peaks, alpha, dim, n_peaks as u64)),
        None => Box::leak(Box::new(Gallagher::build(n_peaks, alpha, dim, n_peaks as u64))),
    }
}

const SCHWEFEL_OPT: f64 = 4.209_687_462_275_036 / 2.0;

/// Evaluates base function `function_id` at `z` (optimum at the origin).
pub(crate) fn eval_base(function_id: u32, z: &[f64]) -> f64 {
    let d = z.len();
    let df = d as f64;
    match function_id {
        1 => z.iter().map(|v| v * v).sum(),
        2 | 10 => z
            .iter()
            .enumerate()
            .map(|(i, v)| 10f64.powf(6.0 * frac(i, d)) * t_osz(*v).powi(2))
            .sum(),
        3 | 15 => {
            let mut u: Vec<f64> = z.iter().map(|v| t_osz(*v)).collect();
            t_asy(&mut u, 0.2);
            lambda(&mut u, 10.0);
            rastrigin_core(&u)
        }
        4 => {
            let u: Vec<f64> = z
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    let t = t_osz(*v);
                    let s = 10f64.powf(0.5 * frac(i, d));
                    if t > 0.0 && i % 2 == 0 {
                        10.0 * s * t
                    } else {
                        s * t
                    }
                })
                .collect();
            rastrigin_core(&u) + 100.0 * f_pen(z)
        }
        5 => z
            .iter()
            .enumerate()
            .map(|(i, v)| 10f64.powf(frac(i, d)) * (-v).max(0.0))
            .sum(),
        6 => {
            let mut u = z.to_vec();
            lambda(&mut u, 10.0);
            let s: f64 = u
                .iter()
                .map(|v| {
                    let scale = if *v > 0.0 { 100.0 } else { 1.0 };
                    (scale * v).powi(2)
                })
                .sum();
            t_osz(s).powf(0.9)
        }
        7 => {
            let mut zh = z.to_vec();
            lambda(&mut zh, 10.0);
            let head = zh.first().map(|v| v.abs() / 1e4).unwrap_or(0.0);
            let body: f64 = zh
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    let zt = if v.abs() > 0.5 {
                        v.round()
                    } else {
                        (10.0 * v).round() / 10.0
                    };
                    10f64.powf(2.0 * frac(i, d)) * zt * zt
                })
                .sum();
            0.1 * head.max(body) + f_pen(z)
        }
        8 | 9 => {
            let c = 1f64.max(df.sqrt() / 8.0);
            let u: Vec<f64> = z.iter().map(|v| c * v + 1.0).collect();
            rosenbrock_core(&u)
        }
        11 => z
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let t = t_osz(*v).powi(2);
                if i == 0 {
                    1e6 * t
                } else {
                    t
                }
            })
            .sum(),
        12 => {
            let mut u = z.to_vec();
            t_asy(&mut u, 0.5);
            u.iter()
                .enumerate()
                .map(|(i, v)| if i == 0 { v * v } else { 1e6 * v * v })
                .sum()
        }
        13 => {
            let mut u = z.to_vec();
            lambda(&mut u, 10.0);
            let rest: f64 = u.iter().skip(1).map(|v| v * v).sum();
            u[0] * u[0] + 100.0 * rest.sqrt()
        }
        14 => z
            .iter()
            .enumerate()
            .map(|(i, v)| v.abs().powf(2.0 + 4.0 * frac(i, d)))
            .sum::<f64>()
            .sqrt(),
        16 => {
            let mut u: Vec<f64> = z.iter().map(|v| t_osz(*v)).collect();
            lambda(&mut u, 0.01);
            let f0: f64 = (0..12)
                .map(|k| 0.5f64.powi(k) * (PI * 3f64.powi(k)).cos())
                .sum();
            let s: f64 = u
                .iter()
                .map(|v| {
                    (0..12)
                        .map(|k| 0.5f64.powi(k) * (2.0 * PI * 3f64.powi(k) * (v + 0.5)).cos())
                        .sum::<f64>()
                })
                .sum();
            10.0 * (s / df - f0).powi(3) + 10.0 / df * f_pen(z)
        }
        17 => schaffers(z, 10.0),
        18 => schaffers(z, 1000.0),
        19 => {
            if d < 2 {
                return 0.0;
            }
            let c = 1f64.max(df.sqrt() / 8.0);
            let u: Vec<f64> = z.iter().map(|v| c * v + 1.0).collect();
            let sum: f64 = u
                .windows(2)
                .map(|w| {
                    let s = 100.0 * (w[0] * w[0] - w[1]).powi(2) + (w[0] - 1.0).powi(2);
                    s / 4000.0 - s.cos()
                })
                .sum();
            10.0 * sum / (df - 1.0) + 10.0
        }
        20 => {
            let xh: Vec<f64> = z.iter().map(|v| 2.0 * (v + SCHWEFEL_OPT)).collect();
            let two_opt = 2.0 * SCHWEFEL_OPT;
            let mut zh = xh.clone();
            for i in 1..d {
                zh[i] = xh[i] + 0.25 * (xh[i - 1] - two_opt);
            }
            let mut shifted: Vec<f64> = zh.iter().map(|v| v - two_opt).collect();
            lambda(&mut shifted, 10.0);
            let zz: Vec<f64> = shifted.iter().map(|v| 100.0 * (v + two_opt)).collect();
            let scaled: Vec<f64> = zz.iter().map(|v| v / 100.0).collect();
            -zz.iter().map(|v| v * v.abs().sqrt().sin()).sum::<f64>() / (100.0 * df)
                + 4.189_828_872_724_339
                + 100.0 * f_pen(&scaled)
        }
        21 => gallagher(101, d).eval(z),
        22 => gallagher(21, d).eval(z),
        23 => {
            let mut u = z.to_vec();
            lambda(&mut u, 100.0);
            let expo = 10.0 / df.powf(1.2);
            let prod: f64 = u
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    let inner: f64 = (1..=32)
                        .map(|j| {
                            let p = 2f64.powi(j);
                            (p * v - (p * v).round()).abs() / p
                        })
                        .sum();
                    (1.0 + (i + 1) as f64 * inner).powf(expo)
                })
                .product();
            10.0 / (df * df) * (prod - 1.0) + f_pen(z)
        }
        24 => {
            let mu0 = 2.5;
            let s = 1.0 - 1.0 / (2.0 * (df + 20.0).sqrt() - 8.2);
            let mu1 = -((mu0 * mu0 - 1.0) / s).sqrt();
            let xb: Vec<f64> = z.iter().map(|v| v + mu0 / 2.0).collect();
            let xh: Vec<f64> = xb.iter().map(|v| 2.0 * v).collect();
            let mut zz: Vec<f64> = xh.iter().map(|v| v - mu0).collect();
            lambda(&mut zz, 100.0);
            let a: f64 = xh.iter().map(|v| (v - mu0).powi(2)).sum();
            let b: f64 = df + s * xh.iter().map(|v| (v - mu1).powi(2)).sum::<f64>();
            a.min(b) + 10.0 * (df - zz.iter().map(|v| (2.0 * PI * v).cos()).sum::<f64>())
                + 1e4 * f_pen(&xb)
        }
        _ => f64::NAN,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_is_complete_and_unique() {
        assert_eq!(CATALOG.len(), 24);
        for (i, f) in CATALOG.iter().enumerate() {
            assert_eq!(f.function_id as usize, i + 1);
        }
        assert_eq!(lookup(6).unwrap().name, "Attractive Sector");
        assert!(lookup(25).is_none());
    }

    #[test]
    fn every_base_function_is_near_zero_at_origin() {
        for f in CATALOG.iter() {
            for d in [2usize, 5] {
                let v = eval_base(f.function_id, &vec![0.0; d]);
                assert!(v.is_finite(), "f{} d{d}", f.function_id);
                assert!(v.abs() < 1e-6, "f{} d{d} -> {v}", f.function_id);
            }
        }
    }

    #[test]
    fn base_optimum_is_not_beaten_by_random_points() {
        let mut rng = rng_from(&[99]);
        for f in CATALOG.iter().filter(|f| f.function_id != 20) {
            let opt = eval_base(f.function_id, &[0.0; 3]);
            for _ in 0..500 {
                let x: Vec<f64> = (0..3).map(|_| rng.random_range(-5.0..5.0)).collect();
                assert!(eval_base(f.function_id, &x) >= opt - 1e-9, "f{}", f.function_id);
            }
        }
    }

    #[test]
    fn rastrigin_at_origin_is_exactly_zero() {
        assert_eq!(eval_base(3, &[0.0, 0.0]), 0.0);
        assert_eq!(eval_base(15, &[0.0; 5]), 0.0);
    }
}
