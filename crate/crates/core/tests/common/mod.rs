//! Brute-force reference implementations shared by the integration tests. Everything
//! here is written from the formulas directly, without touching the library's kernels.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vargibbs::geometry::{Configuration, Window};

pub const SIGMA: f64 = 0.1;
pub const RANGE: f64 = 0.25;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n` uniform points in `window`, each pair at least `min_dist` apart.
pub fn random_points(rng: &mut ChaCha8Rng, window: &Window, n: usize, min_dist: f64) -> Vec<Vec<f64>> {
    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut attempts = 0;
    while pts.len() < n {
        attempts += 1;
        assert!(attempts < 1_000_000, "window too crowded for {n} points");
        let x: Vec<f64> = (0..window.dim()).map(|k| rng.random_range(window.lower()[k]..window.upper()[k])).collect();
        if pts.iter().all(|y| dist2(&x, y) >= min_dist * min_dist) {
            pts.push(x);
        }
    }
    pts
}

pub fn random_pattern(rng: &mut ChaCha8Rng, window: &Window, n: usize, min_dist: f64) -> Configuration {
    let pts = random_points(rng, window, n, min_dist);
    Configuration::from_flat(window.clone(), pts.concat()).unwrap()
}

pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum()
}

/// `(phi, phi', phi'')` for `s^-6` and `s^-3`, zero from `range^2` on.
pub fn lj_phi(s: f64, range: f64) -> [(f64, f64, f64); 2] {
    if s >= range * range {
        return [(0.0, 0.0, 0.0); 2];
    }
    [
        (s.powi(-6), -6.0 * s.powi(-7), 42.0 * s.powi(-8)),
        (s.powi(-3), -3.0 * s.powi(-4), 12.0 * s.powi(-5)),
    ]
}

/// Local quantities at `x` against `points` minus `skip`, for the LJ basis.
#[derive(Clone, Debug)]
pub struct Local {
    pub energy: [f64; 2],
    /// `grad[i][k]`
    pub grad: [Vec<f64>; 2],
    pub div: [f64; 2],
    pub div_div: [f64; 2],
    pub laplacian: [f64; 2],
}

pub fn brute_local(points: &[Vec<f64>], x: &[f64], skip: Option<usize>, range: f64) -> Local {
    let d = x.len();
    let mut out = Local {
        energy: [0.0; 2],
        grad: [vec![0.0; d], vec![0.0; d]],
        div: [0.0; 2],
        div_div: [0.0; 2],
        laplacian: [0.0; 2],
    };
    for (j, y) in points.iter().enumerate() {
        if Some(j) == skip {
            continue;
        }
        let s = dist2(x, y);
        let delta: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
        let sum: f64 = delta.iter().sum();
        for (i, (f, f1, f2)) in lj_phi(s, range).into_iter().enumerate() {
            out.energy[i] += f;
            for k in 0..d {
                out.grad[i][k] += 2.0 * delta[k] * f1;
            }
            out.div[i] += 2.0 * sum * f1;
            out.div_div[i] += 2.0 * d as f64 * f1 + 4.0 * f2 * sum * sum;
            out.laplacian[i] += 2.0 * d as f64 * f1 + 4.0 * f2 * s;
        }
    }
    out
}

/// Same as [`brute_local`] with every neighbor contribution replaced by its absolute
/// value; the scale against which rounding and truncation errors are judged.
pub fn brute_local_magnitude(points: &[Vec<f64>], x: &[f64], skip: Option<usize>, range: f64) -> Local {
    let d = x.len();
    let mut out = Local {
        energy: [0.0; 2],
        grad: [vec![0.0; d], vec![0.0; d]],
        div: [0.0; 2],
        div_div: [0.0; 2],
        laplacian: [0.0; 2],
    };
    for (j, y) in points.iter().enumerate() {
        if Some(j) == skip {
            continue;
        }
        let s = dist2(x, y);
        let delta: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
        let sum: f64 = delta.iter().sum();
        for (i, (f, f1, f2)) in lj_phi(s, range).into_iter().enumerate() {
            out.energy[i] += f.abs();
            for k in 0..d {
                out.grad[i][k] += (2.0 * delta[k] * f1).abs();
            }
            out.div[i] += (2.0 * sum * f1).abs();
            out.div_div[i] += (2.0 * d as f64 * f1).abs() + (4.0 * f2 * sum * sum).abs();
            out.laplacian[i] += (2.0 * d as f64 * f1).abs() + (4.0 * f2 * s).abs();
        }
    }
    out
}

pub fn chi(s: f64, r0: f64, r1: f64) -> f64 {
    ((s - r0 * r0) / (r1 * r1 - r0 * r0)).clamp(0.0, 1.0)
}

/// Hard-core weight `Psi = prod chi` and its gradient by the product rule.
pub fn brute_psi(points: &[Vec<f64>], x: &[f64], skip: Option<usize>, r0: f64, r1: f64) -> (f64, Vec<f64>) {
    let d = x.len();
    let others: Vec<&Vec<f64>> = points.iter().enumerate().filter(|(j, _)| Some(*j) != skip).map(|(_, y)| y).collect();
    let factors: Vec<f64> = others.iter().map(|y| chi(dist2(x, y), r0, r1)).collect();
    let psi: f64 = factors.iter().product();
    let mut grad = vec![0.0; d];
    for (j, y) in others.iter().enumerate() {
        let s = dist2(x, y);
        if s <= r0 * r0 || s >= r1 * r1 {
            continue;
        }
        let rest: f64 = factors.iter().enumerate().filter(|(l, _)| *l != j).map(|(_, f)| f).product();
        for k in 0..d {
            grad[k] += rest * 2.0 * (x[k] - y[k]) / (r1 * r1 - r0 * r0);
        }
    }
    (psi, grad)
}

/// Periodic cell taper and its gradient.
pub fn brute_cell_taper(x: &[f64], origin: &[f64], side: f64) -> (f64, Vec<f64>) {
    let d = x.len();
    let u: Vec<f64> = (0..d)
        .map(|k| {
            let t = (x[k] - origin[k]) / side;
            t - t.floor()
        })
        .collect();
    let f: Vec<f64> = u.iter().map(|v| v * (1.0 - v)).collect();
    let value = f.iter().product();
    let grad = (0..d)
        .map(|k| (1.0 - 2.0 * u[k]) / side * (0..d).filter(|l| *l != k).map(|l| f[l]).product::<f64>())
        .collect();
    (value, grad)
}

#[derive(Clone, Copy, Debug)]
pub struct BruteOptions {
    pub hard_core: Option<(f64, f64)>,
    pub cell_side: Option<f64>,
    pub raw: bool,
    pub border: Option<f64>,
}

/// `(A, b)` of the variational estimating equations by double loops.
pub fn brute_system(config: &Configuration, range: f64, opts: BruteOptions) -> ([f64; 4], [f64; 2]) {
    let points = config.to_points().into_iter().map(|p| p.0).collect::<Vec<_>>();
    let window = config.window();
    let d = config.dim();
    let mut a = [0.0; 4];
    let mut b = [0.0; 2];
    for (id, x) in points.iter().enumerate() {
        if let Some(border) = opts.border {
            let gap = (0..d).map(|k| (x[k] - window.lower()[k]).min(window.upper()[k] - x[k])).fold(f64::INFINITY, f64::min);
            if gap < border {
                continue;
            }
        }
        let l = brute_local(&points, x, Some(id), range);
        let (mut w, mut gw) = match opts.hard_core {
            Some((r0, r1)) => brute_psi(&points, x, Some(id), r0, r1),
            None => (1.0, vec![0.0; d]),
        };
        if let Some(side) = opts.cell_side {
            let (c, gc) = brute_cell_taper(x, window.lower(), side);
            gw = (0..d).map(|k| c * gw[k] + w * gc[k]).collect();
            w *= c;
        }
        let div_w: f64 = gw.iter().sum();
        for i in 0..2 {
            for j in 0..2 {
                a[i * 2 + j] += if opts.raw {
                    w * l.div[i] * l.div[j]
                } else {
                    w * (0..d).map(|k| l.grad[i][k] * l.grad[j][k]).sum::<f64>()
                };
            }
            b[i] += if opts.raw {
                w * l.div_div[i] + div_w * l.div[i]
            } else {
                w * l.laplacian[i] + (0..d).map(|k| gw[k] * l.grad[i][k]).sum::<f64>()
            };
        }
    }
    (a, b)
}

/// `sum_{i<j} theta . phi(s_ij)` by a double loop.
pub fn brute_total_energy(config: &Configuration, theta: &[f64], range: f64) -> f64 {
    let pts = config.to_points();
    let mut e = 0.0;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let phi = lj_phi(dist2(&pts[i].0, &pts[j].0), range);
            e += theta[0] * phi[0].0 + theta[1] * phi[1].0;
        }
    }
    e
}

/// `|a - b| / max(|a|, |b|, floor)`.
pub fn rel_err(a: f64, b: f64, floor: f64) -> f64 {
    let denom = a.abs().max(b.abs()).max(floor);
    if denom == 0.0 {
        0.0
    } else {
        (a - b).abs() / denom
    }
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn sd(v: &[f64]) -> f64 {
    let m = mean(v);
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}
