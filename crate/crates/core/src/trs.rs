//! Global minimization of `g . d + 1/2 d' H d` over `|d| <= radius`.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::linalg::{dot, norm, symmetric_eigen};

/// Global minimizer of the quadratic model over the Euclidean ball, from an
/// eigen-decomposition of `h` (row-major `n x n`) and a bisection on the
/// secular equation; the hard case is handled explicitly.
pub(crate) fn solve(g: &[f64], h: &[f64], radius: f64) -> Vec<f64> {
    let n = g.len();
    let eig = symmetric_eigen(h, n);
    let gh: Vec<f64> = eig.vectors.iter().map(|q| dot(q, g)).collect();
    let gnorm = norm(g);
    let scale = eig.values.iter().fold(gnorm, |m, v| m.max(v.abs())).max(1e-300);
    let lam1 = eig.values[0];

    let combine = |coef: &dyn Fn(usize) -> f64| -> Vec<f64> {
        let mut d = vec![0.0; n];
        for (i, q) in eig.vectors.iter().enumerate() {
            let c = coef(i);
            for (dk, qk) in d.iter_mut().zip(q) {
                *dk += c * qk;
            }
        }
        d
    };
    let step_norm = |lambda: f64| -> f64 {
        gh.iter()
            .zip(&eig.values)
            .map(|(gi, li)| {
                let den = li + lambda;
                if *gi == 0.0 {
                    0.0
                } else if den <= 0.0 {
                    f64::INFINITY
                } else {
                    (gi / den) * (gi / den)
                }
            })
            .sum::<f64>()
            .sqrt()
    };

    // Interior solution when H is positive definite.
    if lam1 > 0.0 && step_norm(0.0) <= radius {
        return combine(&|i| -gh[i] / eig.values[i]);
    }

    let lo = (-lam1).max(0.0);
    // Hard case: g has no component in the bottom eigenspace and the
    // remaining step is shorter than the radius.
    let tiny = 1e-14 * scale;
    let bottom: Vec<usize> = (0..n).filter(|&i| eig.values[i] + lo <= tiny).collect();
    if !bottom.is_empty()
        && bottom
            .iter()
            .all(|&i| gh[i].abs() <= 1e-14 * gnorm.max(1e-300) || gh[i] == 0.0)
    {
        let rest = combine(&|i| {
            if bottom.contains(&i) {
                0.0
            } else {
                -gh[i] / (eig.values[i] + lo)
            }
        });
        let rn = norm(&rest);
        if rn <= radius {
            let tau = (radius * radius - rn * rn).max(0.0).sqrt();
            let q = &eig.vectors[bottom[0]];
            return rest.iter().zip(q).map(|(r, v)| r + tau * v).collect();
        }
    }

    // Boundary solution: |d(lambda)| = radius with lambda > lo.
    let mut a = lo;
    let mut b = lo + gnorm / radius + scale * 1e-12 + 1e-300;
    while step_norm(b) > radius {
        b = lo + 2.0 * (b - lo);
    }
    for _ in 0..300 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if step_norm(m) > radius {
            a = m;
        } else {
            b = m;
        }
    }
    let d = combine(&|i| {
        let den = eig.values[i] + b;
        if gh[i] == 0.0 || den <= 0.0 {
            0.0
        } else {
            -gh[i] / den
        }
    });
    let nd = norm(&d);
    if nd > radius {
        d.iter().map(|v| v * radius / nd).collect()
    } else {
        d
    }
}
