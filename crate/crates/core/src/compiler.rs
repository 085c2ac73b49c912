//! Compiling targets to words, empirical covering radii, and the explicit
//! word-length bounds.
//!
//! All logarithms are natural. Search optimality is exact in the Frobenius
//! metric; operator-norm distances are what gets reported.

use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::{perturb, GateSet};
use crate::net::{
    enumerate_net_budgeted, frob_flat, matmul_flat, Net, DEFAULT_DEDUP_TOL, DEFAULT_MAX_ENTRIES,
};
use crate::rng::substream;
use crate::su::{dist, dist_both, haar_sample, MetricKind, Unitary};
use crate::words::{evaluate, letter_matrix, Letter, Word};

type C64 = Complex<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Streams every reduced word of length `≤ n`.
    Exhaustive,
    /// Meet in the middle over two half-length nets.
    Mitm,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompilationResult {
    pub word: Word,
    pub distance_op: f64,
    pub distance_frob: f64,
    pub strategy: Strategy,
    /// Candidate distances evaluated during the search.
    pub searched: u64,
}

impl CompilationResult {
    /// `{"word": "1.-2", "distance_op": …, "distance_frob": …, "searched": …}`
    pub fn to_json(&self) -> String {
        let v = serde_json::json!({
            "word": self.word.to_string(),
            "distance_op": self.distance_op,
            "distance_frob": self.distance_frob,
            "searched": self.searched,
        });
        let mut s = serde_json::to_string_pretty(&v).expect("json");
        s.push('\n');
        s
    }
}

/// Search front end that owns the half-nets used by meet-in-the-middle.
pub struct Compiler {
    gs: Arc<GateSet>,
    dedup_tol: f64,
    max_entries: usize,
    max_candidates: u64,
    cache_dir: Option<PathBuf>,
    nets: Mutex<HashMap<usize, Arc<Net>>>,
}

impl Compiler {
    pub fn new(gs: Arc<GateSet>) -> Self {
        Compiler {
            gs,
            dedup_tol: DEFAULT_DEDUP_TOL,
            max_entries: DEFAULT_MAX_ENTRIES,
            max_candidates: u64::MAX,
            cache_dir: None,
            nets: Mutex::new(HashMap::new()),
        }
    }

    /// Persist half-nets under `dir`, keyed by gate-set hash, length and tolerance.
    pub fn with_cache_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.cache_dir = Some(dir.into());
        self
    }

    pub fn with_dedup_tol(mut self, tol: f64) -> Self {
        self.dedup_tol = tol;
        self
    }

    pub fn with_net_budget(mut self, max_entries: usize) -> Self {
        self.max_entries = max_entries;
        self
    }

    /// Abort a single compilation after this many candidate evaluations.
    pub fn with_search_budget(mut self, max_candidates: u64) -> Self {
        self.max_candidates = max_candidates;
        self
    }

    pub fn gateset(&self) -> &Arc<GateSet> {
        &self.gs
    }

    fn cache_path(&self, n: usize) -> Option<PathBuf> {
        let hash = self.gs.content_hash();
        self.cache_dir.as_ref().map(|dir| {
            dir.join(format!(
                "{}-n{}-tol{:e}.gfnet",
                &hash[..16],
                n,
                self.dedup_tol
            ))
        })
    }

    /// The net of words of length `≤ n`, built once and shared.
    pub fn half_net(&self, n: usize) -> Result<Arc<Net>> {
        if let Some(net) = self.nets.lock().expect("net cache lock").get(&n) {
            return Ok(net.clone());
        }
        let path = self.cache_path(n);
        let mut net = None;
        if let Some(p) = path.as_ref().filter(|p| p.exists()) {
            // A corrupt or foreign cache file is rebuilt rather than trusted.
            if let Ok(loaded) = Net::read_binary(self.gs.clone(), BufReader::new(File::open(p)?)) {
                if loaded.max_length() == n && loaded.dedup_tol() == self.dedup_tol {
                    net = Some(loaded);
                }
            }
        }
        let net = match net {
            Some(n) => n,
            None => {
                let built =
                    enumerate_net_budgeted(self.gs.clone(), n, self.dedup_tol, self.max_entries)?;
                if let Some(p) = &path {
                    if let Some(dir) = p.parent() {
                        fs::create_dir_all(dir)?;
                    }
                    let tmp = p.with_extension("tmp");
                    built.write_binary(BufWriter::new(File::create(&tmp)?))?;
                    fs::rename(&tmp, p)?;
                }
                built
            }
        };
        let net = Arc::new(net);
        self.nets
            .lock()
            .expect("net cache lock")
            .insert(n, net.clone());
        Ok(net)
    }

    pub fn compile(
        &self,
        target: &Unitary,
        n: usize,
        strategy: Strategy,
    ) -> Result<CompilationResult> {
        if target.dim() != self.gs.dim() {
            return Err(Error::DimensionMismatch {
                left: self.gs.dim(),
                right: target.dim(),
            });
        }
        match strategy {
            Strategy::Exhaustive => self.exhaustive(target, n),
            Strategy::Mitm => self.mitm(target, n),
        }
    }

    fn finish(
        &self,
        target: &Unitary,
        word: Word,
        strategy: Strategy,
        searched: u64,
    ) -> Result<CompilationResult> {
        let m = evaluate(&word, &self.gs)?;
        let (distance_op, distance_frob) = dist_both(&m, target)?;
        Ok(CompilationResult {
            word,
            distance_op,
            distance_frob,
            strategy,
            searched,
        })
    }

    fn exhaustive(&self, target: &Unitary, n: usize) -> Result<CompilationResult> {
        let d = self.gs.dim();
        let dd = d * d;
        let alphabet: Vec<(Letter, Vec<C64>)> = Letter::alphabet(self.gs.len())
            .map(|l| (l, letter_matrix(l, &self.gs).expect("in range").to_rows()))
            .collect();
        let t = target.to_rows();
        let mut state = Dfs {
            d,
            target: &t,
            alphabet: &alphabet,
            stack: vec![C64::new(0.0, 0.0); dd * (n + 1)],
            word: Vec::with_capacity(n),
            best: (f64::INFINITY, Vec::new()),
            searched: 0,
            limit: self.max_candidates,
        };
        state.stack[..dd].copy_from_slice(&Unitary::<f64>::identity(d).to_rows());
        let completed = state.run(0, n);
        let (_, best) = state.best;
        let searched = state.searched;
        let result = self.finish(target, Word(best), Strategy::Exhaustive, searched)?;
        if completed {
            Ok(result)
        } else {
            Err(Error::SearchBudgetExceeded {
                partial: Box::new(result),
            })
        }
    }

    fn mitm(&self, target: &Unitary, n: usize) -> Result<CompilationResult> {
        let left = self.half_net(n.div_ceil(2))?;
        let right = self.half_net(n / 2)?;
        let d = self.gs.dim();
        let dd = d * d;
        let t = target.to_rows();
        let mut best: Option<(usize, usize)> = None;
        let mut best_val = f64::INFINITY;
        let mut searched = 0u64;
        let mut query = vec![C64::new(0.0, 0.0); dd];
        let mut left_adj = vec![C64::new(0.0, 0.0); dd];
        let mut completed = true;
        for i in 0..left.len() {
            let m = left.flat(i);
            for r in 0..d {
                for c in 0..d {
                    left_adj[r * d + c] = m[c * d + r].conj();
                }
            }
            // ‖w₁w₂ − U‖ = ‖w₂ − w₁†U‖
            matmul_flat(&left_adj, &t, d, &mut query);
            if let Some((j, v)) =
                right.nearest_within_counted(&query, MetricKind::Frobenius, best_val, &mut searched)
            {
                best_val = v;
                best = Some((i, j));
            }
            if searched > self.max_candidates {
                completed = false;
                break;
            }
        }
        let word = match best {
            Some((i, j)) => left.word(i).concat(&right.word(j)).reduce(),
            None => Word::empty(),
        };
        let result = self.finish(target, word, Strategy::Mitm, searched)?;
        if completed {
            Ok(result)
        } else {
            Err(Error::SearchBudgetExceeded {
                partial: Box::new(result),
            })
        }
    }
}

struct Dfs<'a> {
    d: usize,
    target: &'a [C64],
    alphabet: &'a [(Letter, Vec<C64>)],
    /// Product of the current prefix at each depth.
    stack: Vec<C64>,
    word: Vec<Letter>,
    best: (f64, Vec<Letter>),
    searched: u64,
    limit: u64,
}

impl Dfs<'_> {
    const TIE: f64 = 1e-13;

    /// Returns false when the candidate budget ran out.
    fn run(&mut self, depth: usize, n: usize) -> bool {
        let dd = self.d * self.d;
        let here = &self.stack[depth * dd..(depth + 1) * dd];
        let v = frob_flat(here, self.target);
        self.searched += 1;
        let (bv, bw) = &self.best;
        if v < bv - Self::TIE || (v <= bv + Self::TIE && self.word.len() < bw.len()) {
            self.best = (v, self.word.clone());
        }
        if self.searched >= self.limit {
            return false;
        }
        if depth == n {
            return true;
        }
        let last = self.word.last().copied();
        for (l, g) in self.alphabet {
            if last.is_some_and(|p| p.cancels(*l)) {
                continue;
            }
            let (lo, hi) = self.stack.split_at_mut((depth + 1) * dd);
            matmul_flat(&lo[depth * dd..], g, self.d, &mut hi[..dd]);
            self.word.push(*l);
            let ok = self.run(depth + 1, n);
            self.word.pop();
            if !ok {
                return false;
            }
        }
        true
    }
}

/// One-off compilation with a fresh [`Compiler`].
pub fn compile(
    target: &Unitary,
    gs: &GateSet,
    n: usize,
    strategy: Strategy,
) -> Result<CompilationResult> {
    Compiler::new(Arc::new(gs.clone())).compile(target, n, strategy)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoverRow {
    pub n: usize,
    pub mean_eps: f64,
    pub max_eps: f64,
    pub targets: usize,
}

/// Empirical covering radius per word length over a fixed set of Haar targets.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverReport {
    pub gateset_id: String,
    pub seed: u64,
    pub rows: Vec<CoverRow>,
}

impl CoverReport {
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "n,mean_eps,max_eps,targets,seed")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{}",
                r.n, r.mean_eps, r.max_eps, r.targets, self.seed
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

/// Haar targets shared across all lengths; target `i` comes from substream `i`.
pub fn cover_targets(d: usize, num_targets: usize, seed: u64) -> Vec<Unitary> {
    (0..num_targets)
        .map(|i| haar_sample(d, &mut substream(seed, i as u64)))
        .collect()
}

pub fn covering_stats(
    gs: &GateSet,
    lengths: &[usize],
    num_targets: usize,
    seed: u64,
) -> Result<CoverReport> {
    covering_stats_with(
        &Compiler::new(Arc::new(gs.clone())),
        lengths,
        num_targets,
        seed,
    )
}

/// As [`covering_stats`], reusing `compiler`'s half-nets.
pub fn covering_stats_with(
    compiler: &Compiler,
    lengths: &[usize],
    num_targets: usize,
    seed: u64,
) -> Result<CoverReport> {
    if num_targets == 0 {
        return Err(Error::out_of_range("target count", 0));
    }
    let targets = cover_targets(compiler.gs.dim(), num_targets, seed);
    let mut rows = Vec::with_capacity(lengths.len());
    for &n in lengths {
        compiler.half_net(n.div_ceil(2))?;
        compiler.half_net(n / 2)?;
        let eps: Vec<f64> = targets
            .par_iter()
            .map(|t| {
                compiler
                    .compile(t, n, Strategy::Mitm)
                    .map(|r| r.distance_op)
            })
            .collect::<Result<_>>()?;
        rows.push(CoverRow {
            n,
            mean_eps: eps.iter().sum::<f64>() / eps.len() as f64,
            max_eps: eps.iter().copied().fold(0.0, f64::max),
            targets: num_targets,
        });
    }
    Ok(CoverReport {
        gateset_id: compiler.gs.content_hash()[..16].to_owned(),
        seed,
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingFit {
    /// Change in `ln ε` per gate.
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Least squares of `ln(max ε)` against `n`, over rows with `max ε > 0`.
pub fn scaling_fit(report: &CoverReport) -> Result<ScalingFit> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = report
        .rows
        .iter()
        .filter(|r| r.max_eps > 0.0)
        .map(|r| (r.n as f64, r.max_eps.ln()))
        .unzip();
    least_squares(&xs, &ys)
}

pub fn least_squares(xs: &[f64], ys: &[f64]) -> Result<ScalingFit> {
    if xs.len() < 3 || xs.len() != ys.len() {
        return Err(Error::Degenerate(format!(
            "need at least 3 points with positive error, got {}",
            xs.len()
        )));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Degenerate("all lengths identical".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let r_squared = if ss_tot == 0.0 {
        1.0
    } else {
        1.0 - ss_res / ss_tot
    };
    Ok(ScalingFit {
        slope,
        intercept,
        r_squared,
    })
}

/// Inputs to the word-length bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundInputs {
    pub d: usize,
    /// Spectral parameter `Λ ∈ (0, 1)`.
    pub lambda: f64,
    pub k1: f64,
    pub k2: f64,
    /// Number of generators `|𝒜|`.
    pub set_size: usize,
    pub eps: f64,
}

impl BoundInputs {
    fn check_eps(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps <= 2.0) {
            return Err(Error::out_of_range("epsilon", self.eps));
        }
        if self.d < 2 {
            return Err(Error::out_of_range("dimension", self.d));
        }
        Ok(())
    }

    fn manifold_dim(&self) -> f64 {
        (self.d * self.d - 1) as f64
    }
}

/// Length past which every target is within `ε` of some word:
/// the smallest integer `n > (d²−1) ln(1/ε)/ln(1/Λ) + ln(2^{d²−1}/k1)/ln(1/Λ)`.
pub fn theorem1_length(b: &BoundInputs) -> Result<u64> {
    b.check_eps()?;
    if !(b.lambda > 0.0 && b.lambda < 1.0) {
        return Err(Error::out_of_range("lambda", b.lambda));
    }
    if !(b.k1 > 0.0) {
        return Err(Error::out_of_range("k1", b.k1));
    }
    let dim = b.manifold_dim();
    let gap = (1.0 / b.lambda).ln();
    let rhs = dim / gap * (1.0 / b.eps).ln() + (dim * 2f64.ln() - b.k1.ln()) / gap;
    Ok(if rhs < 0.0 { 0 } else { rhs.floor() as u64 + 1 })
}

/// Counting bound: the smallest integer
/// `n ≥ (d²−1) ln(1/ε)/ln(2|𝒜|) − ln k2/ln(2|𝒜|)`, floored at zero.
pub fn lower_bound_length(b: &BoundInputs) -> Result<u64> {
    b.check_eps()?;
    if b.set_size < 1 {
        return Err(Error::out_of_range("gate set size", b.set_size));
    }
    if !(b.k2 > 0.0) {
        return Err(Error::out_of_range("k2", b.k2));
    }
    let branching = (2.0 * b.set_size as f64).ln();
    let rhs = (b.manifold_dim() * (1.0 / b.eps).ln() - b.k2.ln()) / branching;
    Ok(if rhs <= 0.0 { 0 } else { rhs.ceil() as u64 })
}

/// `exp(−(n − c₀)/C)`: the precision guaranteed at length `n`, with
/// `C = (d²−1)/ln(1/Λ)` and `c₀ = ln(2^{d²−1}/k1)/ln(1/Λ)`.
pub fn theorem1_envelope(n: f64, d: usize, lambda: f64, k1: f64) -> f64 {
    let dim = (d * d - 1) as f64;
    let gap = (1.0 / lambda).ln();
    let c = dim / gap;
    let c0 = (dim * 2f64.ln() - k1.ln()) / gap;
    (-(n - c0) / c).exp()
}

/// Largest operator distance between a random reduced word of length `n`
/// evaluated over `perturb(base, delta)` and the same word over `base`.
/// Bounded by `n·delta`.
pub fn subgroup_experiment(
    base: &GateSet,
    delta: f64,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    if !(delta >= 0.0) {
        return Err(Error::out_of_range("delta", delta));
    }
    let perturbed = perturb(base, delta, &mut substream(seed, 0));
    let k = base.len();
    let devs: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(seed, i as u64 + 1);
            let w = Word::random_reduced(k, n, &mut rng);
            let a = evaluate(&w, &perturbed)?;
            let b = evaluate(&w, base)?;
            dist(&a, &b, MetricKind::Operator)
        })
        .collect::<Result<_>>()?;
    Ok(devs.into_iter().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::{diagonal_generators, gd_generators, lps_generators};
    use crate::su::su2_from_angles;
    use std::f64::consts::PI;

    #[test]
    fn net_words_compile_exactly() {
        let gs = lps_generators();
        let w = Word::from_signed(&[3, 1, -2, -2]);
        let target = evaluate(&w, &gs).unwrap();
        for s in [Strategy::Exhaustive, Strategy::Mitm] {
            let r = compile(&target, &gs, w.len(), s).unwrap();
            assert!(r.distance_op <= 1e-10, "{s:?}: {}", r.distance_op);
            assert_eq!(r.word, w);
        }
    }

    #[test]
    fn identity_compiles_to_empty_word() {
        let gs = lps_generators();
        for s in [Strategy::Exhaustive, Strategy::Mitm] {
            let r = compile(&Unitary::identity(2), &gs, 4, s).unwrap();
            assert_eq!(r.word, Word::empty());
            assert_eq!(r.distance_op, 0.0);
        }
    }

    #[test]
    fn mitm_matches_exhaustive_in_su3() {
        let gs = gd_generators(3).unwrap();
        let compiler = Compiler::new(Arc::new(gs));
        for (i, t) in cover_targets(3, 5, 17).iter().enumerate() {
            let a = compiler.compile(t, 4, Strategy::Exhaustive).unwrap();
            let b = compiler.compile(t, 4, Strategy::Mitm).unwrap();
            assert!(
                (a.distance_frob - b.distance_frob).abs() < 1e-9,
                "target {i}"
            );
        }
    }

    #[test]
    fn search_budget_carries_partial_best() {
        let gs = lps_generators();
        let t = su2_from_angles(-PI / 8.0, 0.0, 0.0);
        let compiler = Compiler::new(Arc::new(gs)).with_search_budget(50);
        for s in [Strategy::Exhaustive, Strategy::Mitm] {
            match compiler.compile(&t, 6, s) {
                Err(Error::SearchBudgetExceeded { partial }) => {
                    assert!(partial.distance_op.is_finite());
                    assert!(partial.searched >= 50);
                }
                other => panic!("expected budget error, got {other:?}"),
            }
        }
    }

    #[test]
    fn disk_cache_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let gs = Arc::new(lps_generators());
        let t = su2_from_angles(0.3, 0.1, 0.7);
        let first = Compiler::new(gs.clone()).with_cache_dir(dir.path());
        let a = first.compile(&t, 6, Strategy::Mitm).unwrap();
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
        let second = Compiler::new(gs).with_cache_dir(dir.path());
        let b = second.compile(&t, 6, Strategy::Mitm).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn compilation_json_fields() {
        let gs = lps_generators();
        let r = compile(&gs.generators()[1].clone(), &gs, 2, Strategy::Mitm).unwrap();
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["word"], "2");
        assert_eq!(v["distance_op"], 0.0);
        assert!(v["searched"].as_u64().unwrap() > 0);
    }

    #[test]
    fn cover_at_length_zero_is_distance_to_identity() {
        let gs = lps_generators();
        let report = covering_stats(&gs, &[0], 10, 3).unwrap();
        let targets = cover_targets(2, 10, 3);
        let id = Unitary::identity(2);
        let want = targets
            .iter()
            .map(|t| dist(t, &id, MetricKind::Operator).unwrap())
            .fold(0.0, f64::max);
        assert!((report.rows[0].max_eps - want).abs() < 1e-12);
        assert!(report.rows[0].max_eps <= 2.0);
        assert!(covering_stats(&gs, &[0], 0, 3).is_err());
    }

    #[test]
    fn cover_csv_header() {
        let gs = lps_generators();
        let csv = covering_stats(&gs, &[1, 2], 4, 9).unwrap().to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("n,mean_eps,max_eps,targets,seed"));
        assert!(lines.next().unwrap().starts_with("1,"));
        assert!(lines.next().unwrap().ends_with(",4,9"));
    }

    #[test]
    fn exact_log_linear_fit() {
        let rows = (1..=10)
            .map(|n| CoverRow {
                n,
                mean_eps: 0.0,
                max_eps: (-0.5 * n as f64).exp(),
                targets: 1,
            })
            .collect();
        let report = CoverReport {
            gateset_id: String::new(),
            seed: 0,
            rows,
        };
        let fit = scaling_fit(&report).unwrap();
        assert!((fit.slope + 0.5).abs() < 1e-9);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);

        let flat = least_squares(&[1., 2., 3.], &[0.3f64.ln(); 3]).unwrap();
        assert_eq!(flat.slope, 0.0);
        assert!(least_squares(&[1., 2.], &[0., 1.]).is_err());
        assert!(least_squares(&[2., 2., 2.], &[0., 1., 2.]).is_err());
    }

    fn lps_inputs(eps: f64) -> BoundInputs {
        BoundInputs {
            d: 2,
            lambda: 5f64.sqrt() / 3.0,
            k1: 2.0 / (3.0 * PI),
            k2: 0.25,
            set_size: 3,
            eps,
        }
    }

    #[test]
    fn theorem1_worked_values() {
        assert_eq!(theorem1_length(&lps_inputs(0.01)).unwrap(), 60);
        // ε = 1 leaves only the constant term.
        let b = lps_inputs(1.0);
        let c0 = (8.0 / b.k1).ln() / (1.0 / b.lambda).ln();
        assert_eq!(theorem1_length(&b).unwrap(), c0.floor() as u64 + 1);
        let mut prev = 0;
        for k in 0..40 {
            let n = theorem1_length(&lps_inputs(2.0 * 0.7f64.powi(k))).unwrap();
            assert!(n >= prev);
            prev = n;
        }
        assert!(theorem1_length(&BoundInputs {
            lambda: 1.0,
            ..lps_inputs(0.1)
        })
        .is_err());
        assert!(theorem1_length(&lps_inputs(0.0)).is_err());
    }

    #[test]
    fn lower_bound_values() {
        // RHS ≤ 0 at ε = 2 when k2 ≥ 1/8.
        assert_eq!(
            lower_bound_length(&BoundInputs {
                k2: 0.2,
                ..lps_inputs(2.0)
            })
            .unwrap(),
            0
        );
        let b = lps_inputs(0.01);
        let want = ((3.0 * 100f64.ln() - b.k2.ln()) / 6f64.ln()).ceil() as u64;
        assert_eq!(lower_bound_length(&b).unwrap(), want);
        for eps in [0.1, 0.01, 0.001] {
            assert!(
                lower_bound_length(&lps_inputs(eps)).unwrap()
                    <= theorem1_length(&lps_inputs(eps)).unwrap()
            );
        }
    }

    #[test]
    fn envelope_matches_theorem1_length() {
        // At n = theorem1_length(ε) the guaranteed precision is already below ε.
        let b = lps_inputs(0.01);
        let n = theorem1_length(&b).unwrap() as f64;
        assert!(theorem1_envelope(n, 2, b.lambda, b.k1) < 0.01);
        assert!(theorem1_envelope(n - 1.0, 2, b.lambda, b.k1) >= 0.01 * 0.9);
    }

    #[test]
    fn subgroup_deviation_bounded_by_n_delta() {
        let base = diagonal_generators(&[0.3, 1.1]).unwrap();
        assert_eq!(subgroup_experiment(&base, 0.0, 10, 50, 1).unwrap(), 0.0);
        for n in [1, 5, 20] {
            let dev = subgroup_experiment(&base, 1e-3, n, 100, 2).unwrap();
            assert!(dev <= n as f64 * 1e-3 && dev > 0.0);
        }
    }
}
