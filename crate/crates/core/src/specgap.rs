//! The mixing operator `T(𝒜) − P` restricted to the irreducible blocks of
//! SU(2), and the composition bound for the SU(d) gate family.
//!
//! On `L²(SU(2))` the operator decomposes over the spin-`j` irreps; `P` is the
//! projection onto constants, i.e. exactly the `two_j = 0` block. So `Λ(𝒜)` is
//! the supremum of the block norms over `two_j ≥ 1`, and any finite range of
//! blocks gives a lower bound.

use std::io::{self, Write};

use nalgebra::SymmetricEigen;
use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gates::GateSet;
use crate::scalar::Real;
use crate::su::{CMatrix, Unitary};

/// Largest `two_j` accepted. Beyond this the entry polynomials lose too many
/// digits to cancellation in double precision.
pub const MAX_TWO_J: usize = 60;

/// `√5/3`, the spectral parameter of the LPS generators.
pub fn lps_lambda() -> f64 {
    5f64.sqrt() / 3.0
}

/// Spin-`two_j/2` representation of `u ∈ SU(2)` in the orthonormal basis
/// `x^{n−m} y^m / √((n−m)! m!)` of degree-`n` polynomials, acting by
/// `(x, y) ↦ (x, y)·u`.
pub fn irrep_lift<T: Real>(u: &Unitary<T>, two_j: usize) -> Result<Unitary<T>> {
    if u.dim() != 2 {
        return Err(Error::DimensionMismatch {
            left: 2,
            right: u.dim(),
        });
    }
    if two_j > MAX_TWO_J {
        return Err(Error::out_of_range("two_j", two_j));
    }
    let n = two_j;
    let powers = |z: Complex<T>| {
        let mut p = Vec::with_capacity(n + 1);
        let mut acc = Complex::new(T::one(), T::zero());
        for _ in 0..=n {
            p.push(acc);
            acc *= z;
        }
        p
    };
    let (p11, p12, p21, p22) = (
        powers(u.entry(0, 0)),
        powers(u.entry(0, 1)),
        powers(u.entry(1, 0)),
        powers(u.entry(1, 1)),
    );
    let binom = pascal(n);
    let ln_fact: Vec<f64> = (0..=n)
        .scan(0.0, |acc, k| {
            if k > 0 {
                *acc += (k as f64).ln();
            }
            Some(*acc)
        })
        .collect();

    let mut m = CMatrix::<T>::zeros(n + 1, n + 1);
    for col in 0..=n {
        for row in 0..=n {
            // (u11 x + u21 y)^{n−col} (u12 x + u22 y)^{col}: collect y^{row}.
            let mut acc = Complex::new(T::zero(), T::zero());
            let s_lo = row.saturating_sub(col);
            let s_hi = row.min(n - col);
            for s in s_lo..=s_hi {
                let t = row - s;
                let w = T::of(binom[n - col][s] * binom[col][t]);
                acc += p11[n - col - s] * p21[s] * p12[col - t] * p22[t] * w;
            }
            let norm = 0.5 * (ln_fact[n - row] + ln_fact[row] - ln_fact[n - col] - ln_fact[col]);
            m[(row, col)] = acc * T::of(norm.exp());
        }
    }
    Ok(Unitary::from_matrix_unchecked(m))
}

fn pascal(n: usize) -> Vec<Vec<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let mut row = vec![1.0; i + 1];
        for k in 1..i {
            row[k] = rows[i - 1][k - 1] + rows[i - 1][k];
        }
        rows.push(row);
    }
    rows
}

/// The hermitian block `(1/2k) Σ (D(A) + D(A)†)` on one irrep.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingBlock {
    pub two_j: usize,
    pub matrix: CMatrix<f64>,
}

pub fn mixing_block(gs: &GateSet, two_j: usize) -> Result<MixingBlock> {
    if gs.dim() != 2 {
        return Err(Error::DimensionMismatch {
            left: 2,
            right: gs.dim(),
        });
    }
    let size = two_j + 1;
    let mut acc = CMatrix::<f64>::zeros(size, size);
    for g in gs.generators() {
        let lift = irrep_lift(g, two_j)?.into_matrix();
        acc += &lift + lift.adjoint();
    }
    acc /= Complex::new(2.0 * gs.len() as f64, 0.0);
    Ok(MixingBlock { two_j, matrix: acc })
}

/// Spectral radius of a hermitian block.
pub fn block_norm(b: &MixingBlock) -> f64 {
    SymmetricEigen::new(b.matrix.clone())
        .eigenvalues
        .iter()
        .fold(0.0f64, |m, l| m.max(l.abs()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapEstimate {
    pub two_j_max: usize,
    /// `(two_j, block norm)` for `two_j = 1..=two_j_max`.
    pub block_norms: Vec<(usize, f64)>,
    /// Max block norm over the computed range; a lower bound on `Λ`.
    pub lambda_hat: f64,
}

impl GapEstimate {
    /// `two_j,block_norm` rows, then a `lambda_hat` line and, when given, a
    /// `reference` line.
    pub fn write_csv<W: Write>(&self, mut out: W, reference: Option<f64>) -> io::Result<()> {
        writeln!(out, "two_j,block_norm")?;
        for (two_j, norm) in &self.block_norms {
            writeln!(out, "{two_j},{norm}")?;
        }
        writeln!(out, "lambda_hat,{}", self.lambda_hat)?;
        if let Some(r) = reference {
            writeln!(out, "reference,{r}")?;
        }
        Ok(())
    }
}

pub fn lambda_estimate(gs: &GateSet, two_j_max: usize) -> Result<GapEstimate> {
    if two_j_max < 1 {
        return Err(Error::out_of_range("two_j_max", two_j_max));
    }
    let block_norms: Vec<(usize, f64)> = (1..=two_j_max)
        .into_par_iter()
        .map(|two_j| mixing_block(gs, two_j).map(|b| (two_j, block_norm(&b))))
        .collect::<Result<_>>()?;
    let lambda_hat = block_norms.iter().map(|b| b.1).fold(0.0, f64::max);
    Ok(GapEstimate {
        two_j_max,
        block_norms,
        lambda_hat,
    })
}

fn pairs(d: usize) -> u32 {
    (d * (d - 1) / 2) as u32
}

/// Smallest `m ≥ 1` with `C(d,2)·λ^m < 1`.
pub fn minimal_m(d: usize, lambda: f64) -> Result<u32> {
    if d < 2 {
        return Err(Error::out_of_range("dimension", d));
    }
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::out_of_range("lambda", lambda));
    }
    let c = pairs(d) as f64;
    let mut m = 1;
    while c * lambda.powi(m as i32) >= 1.0 {
        m += 1;
    }
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Prop4Bound {
    /// `|R_m|/|W| = (d−1)^{−m·C(d,2)}`.
    pub fraction: f64,
    /// `|R_m|/|W|·(1 − C(d,2)λ^m)`, the gap below one. Kept separately because
    /// it underflows against 1 in double precision once `d ≥ 4`.
    pub deficit: f64,
    /// `1 − deficit`, bounding `Λ` of the length-`m·C(d,2)` words.
    pub word_block_bound: f64,
    /// `word_block_bound^{1/(m·C(d,2))}`, a bound on `Λ(𝒢_d)`.
    pub per_step_bound: f64,
}

pub fn prop4_bound(d: usize, m: u32, lambda: f64) -> Result<Prop4Bound> {
    let m_min = minimal_m(d, lambda)?;
    if m < m_min {
        return Err(Error::out_of_range("m (bound would not be below one)", m));
    }
    let c = pairs(d);
    let steps = (m * c) as f64;
    let fraction = ((d - 1) as f64).powf(-steps);
    let deficit = fraction * (1.0 - c as f64 * lambda.powi(m as i32));
    let word_block_bound = 1.0 - deficit;
    let per_step_bound = ((-deficit).ln_1p() / steps).exp();
    Ok(Prop4Bound {
        fraction,
        deficit,
        word_block_bound,
        per_step_bound,
    })
}
