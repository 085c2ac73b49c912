//! Gate sets: the LPS generators, their block embeddings into SU(d),
//! perturbation, and the JSON gate-set file format.

use std::collections::HashSet;

use nalgebra::SymmetricEigen;
use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::scalar::{cis, cplx, Real};
use crate::su::{dist, CMatrix, MetricKind, Unitary};

/// Unitarity tolerance enforced when reading gate-set files.
pub const FILE_TOL: f64 = 1e-8;

/// A finite set of SU(d) generators. Inverses are implicit.
#[derive(Debug, Clone, PartialEq)]
pub struct GateSet<T: Real = f64> {
    dim: usize,
    generators: Vec<Unitary<T>>,
    labels: Vec<String>,
}

impl<T: Real> GateSet<T> {
    pub fn new(generators: Vec<Unitary<T>>, labels: Vec<String>) -> Result<Self> {
        let Some(first) = generators.first() else {
            return Err(Error::Malformed("gate set has no generators".into()));
        };
        let dim = first.dim();
        if labels.len() != generators.len() {
            return Err(Error::LengthMismatch {
                left: generators.len(),
                right: labels.len(),
            });
        }
        if let Some(g) = generators.iter().find(|g| g.dim() != dim) {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: g.dim(),
            });
        }
        let mut seen = HashSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::DuplicateLabel(l.clone()));
            }
        }
        Ok(Self {
            dim,
            generators,
            labels,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of generators `|𝒜|`, not counting inverses.
    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn generators(&self) -> &[Unitary<T>] {
        &self.generators
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Unitary<T>)> {
        self.labels
            .iter()
            .map(String::as_str)
            .zip(self.generators.iter())
    }

    /// Hex SHA-256 over the dimension, labels and entry bit patterns.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.dim as u64).to_le_bytes());
        for (label, g) in self.iter() {
            h.update((label.len() as u64).to_le_bytes());
            h.update(label.as_bytes());
            for z in g.to_rows() {
                h.update(z.re.as_f64().to_bits().to_le_bytes());
                h.update(z.im.as_f64().to_bits().to_le_bytes());
            }
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// `V1 = (1/√5)[[1,2i],[2i,1]]`, `V2 = (1/√5)[[1,2],[−2,1]]`,
/// `V3 = (1/√5)[[1+2i,0],[0,1−2i]]`.
pub fn lps_generators<T: Real>() -> GateSet<T> {
    let s = 1.0 / 5f64.sqrt();
    let v = |e: [(f64, f64); 4]| {
        let entries: Vec<Complex<T>> = e.iter().map(|&(re, im)| cplx(re * s, im * s)).collect();
        Unitary::from_matrix_unchecked(CMatrix::from_row_slice(2, 2, &entries))
    };
    let gens = vec![
        v([(1., 0.), (0., 2.), (0., 2.), (1., 0.)]),
        v([(1., 0.), (2., 0.), (-2., 0.), (1., 0.)]),
        v([(1., 2.), (0., 0.), (0., 0.), (1., -2.)]),
    ];
    GateSet {
        dim: 2,
        generators: gens,
        labels: vec!["V1".into(), "V2".into(), "V3".into()],
    }
}

/// `I_{j−2} ⊕ u ⊕ I_{d−j}`: `u` acts on the (1-based) coordinates `j−1, j`.
pub fn beta_embed<T: Real>(u: &Unitary<T>, j: usize, d: usize) -> Result<Unitary<T>> {
    if u.dim() != 2 {
        return Err(Error::DimensionMismatch {
            left: 2,
            right: u.dim(),
        });
    }
    if !(2..=d).contains(&j) {
        return Err(Error::out_of_range("embedding index j", j));
    }
    let mut m = CMatrix::<T>::identity(d, d);
    m.view_mut((j - 2, j - 2), (2, 2)).copy_from(u.matrix());
    Ok(Unitary::from_matrix_unchecked(m))
}

/// The 3(d−1) generators `β_j(V)` for `V ∈ {V1, V2, V3}` and `j = 2..=d`.
///
/// For `d = 2` this is exactly [`lps_generators`].
pub fn gd_generators<T: Real>(d: usize) -> Result<GateSet<T>> {
    if d < 2 {
        return Err(Error::out_of_range("dimension", d));
    }
    let lps = lps_generators::<T>();
    if d == 2 {
        return Ok(lps);
    }
    let mut gens = Vec::with_capacity(3 * (d - 1));
    let mut labels = Vec::with_capacity(3 * (d - 1));
    for j in 2..=d {
        for (name, v) in lps.iter() {
            gens.push(beta_embed(v, j, d)?);
            labels.push(format!("b{j}({name})"));
        }
    }
    GateSet::new(gens, labels)
}

/// Diagonal SU(2) gates `diag(e^{iφ}, e^{−iφ})`. They commute, so they generate
/// a non-dense subgroup.
pub fn diagonal_generators<T: Real>(phases: &[f64]) -> Result<GateSet<T>> {
    let gens = phases
        .iter()
        .map(|&p| {
            let z = cis(T::of(p));
            Unitary::from_matrix_unchecked(CMatrix::from_row_slice(
                2,
                2,
                &[
                    z,
                    Complex::new(T::zero(), T::zero()),
                    Complex::new(T::zero(), T::zero()),
                    z.conj(),
                ],
            ))
        })
        .collect();
    let labels = (1..=phases.len()).map(|i| format!("D{i}")).collect();
    GateSet::new(gens, labels)
}

/// Moves every generator by at most `delta` in operator norm: `G ↦ G·exp(iθK)`
/// with `K` a uniformly random unit-Frobenius traceless hermitian direction and
/// `θ` chosen so that `‖exp(iθK) − I‖_op = delta` (clamped at the diameter 2).
pub fn perturb<T: Real, R: Rng + ?Sized>(gs: &GateSet<T>, delta: f64, rng: &mut R) -> GateSet<T> {
    assert!(delta >= 0.0, "perturbation radius must be nonnegative");
    let generators = gs
        .generators
        .iter()
        .map(|g| {
            if delta == 0.0 {
                return g.clone();
            }
            perturb_one(g, delta, rng)
        })
        .collect();
    GateSet {
        dim: gs.dim,
        generators,
        labels: gs.labels.clone(),
    }
}

fn perturb_one<T: Real, R: Rng + ?Sized>(g: &Unitary<T>, delta: f64, rng: &mut R) -> Unitary<T> {
    let d = g.dim();
    let half = std::f64::consts::FRAC_1_SQRT_2;
    let mut k = CMatrix::<f64>::zeros(d, d);
    for i in 0..d {
        k[(i, i)] = Complex::new(rng.sample(StandardNormal), 0.0);
        for j in (i + 1)..d {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let z = Complex::new(re * half, im * half);
            k[(i, j)] = z;
            k[(j, i)] = z.conj();
        }
    }
    let tr = k.trace() / d as f64;
    for i in 0..d {
        k[(i, i)] -= tr;
    }
    let norm = k.norm();
    k /= Complex::new(norm, 0.0);

    let eig = SymmetricEigen::new(k);
    let top = eig.eigenvalues.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    let mut theta = 2.0 * (delta.min(2.0) / 2.0).asin() / top;
    loop {
        let phases = CMatrix::<T>::from_diagonal(&eig.eigenvalues.map(|l| cis(T::of(theta * l))));
        let vecs = eig.eigenvectors.map(|z| cplx::<T>(z.re, z.im));
        let m = &vecs * phases * vecs.adjoint();
        let moved_gate = g * &Unitary::from_matrix_unchecked(m);
        let moved = dist(g, &moved_gate, MetricKind::Operator)
            .expect("same dim")
            .as_f64();
        if moved <= delta {
            return moved_gate;
        }
        theta *= 1.0 - 1e-9;
    }
}

#[derive(Serialize, Deserialize)]
struct GateSetFile {
    dim: usize,
    generators: Vec<GeneratorEntry>,
}

#[derive(Serialize, Deserialize)]
struct GeneratorEntry {
    label: String,
    matrix: Vec<[f64; 2]>,
}

/// Reads the JSON gate-set format:
/// `{"dim": d, "generators": [{"label": "...", "matrix": [[re, im], ...]}]}`
/// with `d·d` row-major entries per generator.
pub fn parse_gateset(text: &str) -> Result<GateSet<f64>> {
    let file: GateSetFile =
        serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
    if file.dim < 1 {
        return Err(Error::out_of_range("dimension", file.dim));
    }
    let d = file.dim;
    let mut gens = Vec::with_capacity(file.generators.len());
    let mut labels = Vec::with_capacity(file.generators.len());
    for entry in file.generators {
        if entry.matrix.len() != d * d {
            return Err(Error::DimensionMismatch {
                left: d * d,
                right: entry.matrix.len(),
            });
        }
        let m = CMatrix::from_row_iterator(
            d,
            d,
            entry.matrix.iter().map(|&[re, im]| Complex::new(re, im)),
        );
        gens.push(Unitary::with_tolerance(m, FILE_TOL, &entry.label)?);
        labels.push(entry.label);
    }
    GateSet::new(gens, labels)
}

#[derive(Deserialize)]
struct UnitaryFile {
    dim: usize,
    matrix: Vec<[f64; 2]>,
}

/// Reads a single matrix, `{"dim": d, "matrix": [[re, im], ...]}`, with the
/// same tolerance as gate-set files.
pub fn parse_unitary(text: &str) -> Result<Unitary<f64>> {
    let file: UnitaryFile =
        serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
    let d = file.dim;
    if d < 1 {
        return Err(Error::out_of_range("dimension", d));
    }
    if file.matrix.len() != d * d {
        return Err(Error::DimensionMismatch {
            left: d * d,
            right: file.matrix.len(),
        });
    }
    let m = CMatrix::from_row_iterator(
        d,
        d,
        file.matrix.iter().map(|&[re, im]| Complex::new(re, im)),
    );
    Unitary::with_tolerance(m, FILE_TOL, "target")
}

pub fn serialize_gateset<T: Real>(gs: &GateSet<T>) -> String {
    let file = GateSetFile {
        dim: gs.dim,
        generators: gs
            .iter()
            .map(|(label, g)| GeneratorEntry {
                label: label.to_owned(),
                matrix: g
                    .to_rows()
                    .iter()
                    .map(|z| [z.re.as_f64(), z.im.as_f64()])
                    .collect(),
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("gate set serializes");
    s.push('\n');
    s
}
