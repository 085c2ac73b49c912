//! The nested-product SU(d) sampler built from Haar SU(2) blocks, and
//! second-moment comparisons against the Haar oracle.
//!
//! The product is taken literally: `∏_{i=1}^{d−1} ∏_{j=i+1}^{d} β_j(G_j^i)`.
//! Adjacent factors with equal `j` merge, so for `d ≥ 3` the result is not
//! Haar distributed; e.g. at `d = 3` it collapses to `β₂(A)β₃(B)` and
//! `E|U₁₃|² = 1/4` instead of `1/3`. The moment report records this.

use std::io::{self, Write};

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gates::beta_embed;
use crate::rng::substream;
use crate::scalar::Real;
use crate::stats::{Accumulator, SampleStats};
use crate::su::{haar_sample, Unitary};

const CHUNK: usize = 4096;

pub fn ds_product_sample<T: Real, R: Rng + ?Sized>(d: usize, rng: &mut R) -> Unitary<T> {
    assert!(d >= 2, "ds_product_sample requires d >= 2");
    let mut acc = Unitary::identity(d);
    for i in 1..d {
        for j in (i + 1)..=d {
            let g: Unitary<T> = haar_sample(2, rng);
            let block = beta_embed(&g, j, d).expect("2 <= j <= d");
            acc = &acc * &block;
        }
    }
    acc
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sampler {
    /// [`ds_product_sample`].
    Ds,
    /// [`haar_sample`].
    Oracle,
}

impl Sampler {
    pub fn sample<R: Rng + ?Sized>(self, d: usize, rng: &mut R) -> Unitary {
        match self {
            Sampler::Ds => ds_product_sample(d, rng),
            Sampler::Oracle => haar_sample(d, rng),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentRow {
    /// 1-based row and column; `None` for the trace moment.
    pub entry: Option<(usize, usize)>,
    pub stats: SampleStats,
    pub haar_prediction: f64,
}

impl MomentRow {
    pub fn deviation_sigmas(&self) -> f64 {
        self.stats.sigmas_from(self.haar_prediction)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentReport {
    pub d: usize,
    pub sampler: Sampler,
    pub count: usize,
    /// `E|U_pq|²` in row-major order; Haar predicts `1/d`.
    pub entries: Vec<MomentRow>,
    /// `E|tr U|²`; Haar predicts 1.
    pub trace: MomentRow,
    /// Largest `|mean − prediction|` over all tracked moments.
    pub max_abs_deviation: f64,
}

impl MomentReport {
    pub fn entry(&self, p: usize, q: usize) -> &MomentRow {
        &self.entries[(p - 1) * self.d + (q - 1)]
    }

    pub fn rows(&self) -> impl Iterator<Item = &MomentRow> {
        self.entries.iter().chain(std::iter::once(&self.trace))
    }

    /// Moments more than `k` standard errors away from the Haar prediction.
    pub fn flagged(&self, k: f64) -> Vec<&MomentRow> {
        self.rows()
            .filter(|r| !r.stats.within_sigmas(r.haar_prediction, k))
            .collect()
    }

    /// `p,q,mean,stderr,haar_prediction,deviation_sigmas`; the trace row uses
    /// `tr,tr`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "p,q,mean,stderr,haar_prediction,deviation_sigmas")?;
        for r in self.rows() {
            let (p, q) = match r.entry {
                Some((p, q)) => (p.to_string(), q.to_string()),
                None => ("tr".into(), "tr".into()),
            };
            writeln!(
                out,
                "{p},{q},{},{},{},{}",
                r.stats.mean,
                r.stats.std_error,
                r.haar_prediction,
                r.deviation_sigmas()
            )?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("write to vec");
        String::from_utf8(buf).expect("utf8")
    }
}

/// Second moments of `count` samples; chunk `c` draws from substream `c`, so
/// the report is independent of thread scheduling.
pub fn moment_report(sampler: Sampler, d: usize, count: usize, seed: u64) -> Result<MomentReport> {
    if count < 1000 {
        return Err(Error::out_of_range("sample count (need >= 1000)", count));
    }
    if d < 2 {
        return Err(Error::out_of_range("dimension", d));
    }
    let chunks = count.div_ceil(CHUNK);
    let partials: Vec<Vec<Accumulator>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = substream(seed, c as u64);
            let mut accs = vec![Accumulator::default(); d * d + 1];
            for _ in 0..CHUNK.min(count - c * CHUNK) {
                let u = sampler.sample(d, &mut rng);
                for p in 0..d {
                    for q in 0..d {
                        accs[p * d + q].push(u.entry(p, q).norm_sqr());
                    }
                }
                accs[d * d].push(u.trace().norm_sqr());
            }
            accs
        })
        .collect();
    let mut total = vec![Accumulator::default(); d * d + 1];
    for part in &partials {
        for (t, p) in total.iter_mut().zip(part) {
            t.merge(p);
        }
    }
    let inv_d = 1.0 / d as f64;
    let entries: Vec<MomentRow> = (0..d * d)
        .map(|k| MomentRow {
            entry: Some((k / d + 1, k % d + 1)),
            stats: total[k].finish(),
            haar_prediction: inv_d,
        })
        .collect();
    let trace = MomentRow {
        entry: None,
        stats: total[d * d].finish(),
        haar_prediction: 1.0,
    };
    let max_abs_deviation = entries
        .iter()
        .chain(std::iter::once(&trace))
        .map(|r| (r.stats.mean - r.haar_prediction).abs())
        .fold(0.0, f64::max);
    Ok(MomentReport {
        d,
        sampler,
        count,
        entries,
        trace,
        max_abs_deviation,
    })
}
