//! Haar volume of operator-norm balls in SU(d) and the power-law constants
//! `k1 r^{d²−1} < V(r) < k2 r^{d²−1}`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::substream;
use crate::stats::{Accumulator, SampleStats};
use crate::su::{dist, haar_sample, MetricKind, Unitary};

const MC_CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VolumeConstants {
    pub d: usize,
    pub r0: f64,
    pub k1: f64,
    pub k2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VolumeMethod {
    /// Quadrature of the SU(2) eigenphase density. Only valid for `d = 2`.
    Analytic,
    MonteCarlo {
        samples: usize,
        seed: u64,
    },
}

/// Haar measure of `{U ∈ SU(2) : ‖U − I‖_op < r}`.
///
/// An element with eigenphases `±α` sits at operator distance `2 sin(α/2)`
/// from the identity and `α` has density `(2/π) sin²α` on `[0, π]`.
pub fn ball_volume_su2(r: f64) -> Result<f64> {
    if !(0.0..=2.0).contains(&r) {
        return Err(Error::out_of_range("radius", r));
    }
    let upper = 2.0 * (r / 2.0).asin();
    let density = |a: f64| {
        let s = a.sin();
        std::f64::consts::FRAC_2_PI * s * s
    };
    Ok(adaptive_simpson(density, 0.0, upper, 1e-14).clamp(0.0, 1.0))
}

/// Monte-Carlo estimate of the Haar measure of the operator-norm ball of
/// radius `r` about the identity in SU(d).
pub fn ball_volume_mc(d: usize, r: f64, samples: usize, seed: u64) -> SampleStats {
    ball_fractions_mc(d, &[r], samples, seed)[0]
}

fn ball_fractions_mc(d: usize, radii: &[f64], samples: usize, seed: u64) -> Vec<SampleStats> {
    let chunks = samples.div_ceil(MC_CHUNK);
    let partials: Vec<Vec<Accumulator>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = substream(seed, c as u64);
            let n = MC_CHUNK.min(samples - c * MC_CHUNK);
            let id = Unitary::identity(d);
            let mut accs = vec![Accumulator::default(); radii.len()];
            for _ in 0..n {
                let u: Unitary = haar_sample(d, &mut rng);
                let r_u = dist(&u, &id, MetricKind::Operator).expect("same dim");
                for (acc, &r) in accs.iter_mut().zip(radii) {
                    acc.push(if r_u < r { 1.0 } else { 0.0 });
                }
            }
            accs
        })
        .collect();
    let mut total = vec![Accumulator::default(); radii.len()];
    for part in &partials {
        for (t, p) in total.iter_mut().zip(part) {
            t.merge(p);
        }
    }
    total.iter().map(Accumulator::finish).collect()
}

/// `n` evenly spaced radii in `(0, r0]`.
pub fn radius_grid(r0: f64, n: usize) -> Vec<f64> {
    (1..=n).map(|i| r0 * i as f64 / n as f64).collect()
}

/// Fits `k1 = min V(r)/r^{d²−1}` and `k2 = max V(r)/r^{d²−1}` over `grid`.
pub fn volume_constants_fit(
    d: usize,
    r0: f64,
    grid: &[f64],
    method: VolumeMethod,
) -> Result<VolumeConstants> {
    if d < 2 {
        return Err(Error::out_of_range("dimension", d));
    }
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if let Some(&bad) = grid.iter().find(|&&r| !(r > 0.0 && r <= r0)) {
        return Err(Error::out_of_range("grid radius", bad));
    }
    let volumes: Vec<f64> = match method {
        VolumeMethod::Analytic => {
            if d != 2 {
                return Err(Error::out_of_range("dimension (analytic volume)", d));
            }
            grid.iter()
                .map(|&r| ball_volume_su2(r))
                .collect::<Result<_>>()?
        }
        VolumeMethod::MonteCarlo { samples, seed } => ball_fractions_mc(d, grid, samples, seed)
            .iter()
            .map(|s| s.mean)
            .collect(),
    };
    let exponent = (d * d - 1) as i32;
    let ratios: Vec<f64> = grid
        .iter()
        .zip(&volumes)
        .map(|(&r, &v)| v / r.powi(exponent))
        .collect();
    let k1 = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let k2 = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(k1 > 0.0) {
        return Err(Error::Degenerate(
            "zero ball volume on the grid; increase the sample count or the radii".into(),
        ));
    }
    Ok(VolumeConstants { d, r0, k1, k2 })
}

fn adaptive_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn step(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
    }
    if a == b {
        return 0.0;
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(&f, a, b, fa, fm, fb, whole, tol, 48)
}
