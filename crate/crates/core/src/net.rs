//! Deduplicated nets of word matrices with exact nearest-neighbour queries.

use std::collections::HashMap;
use std::io::{self, BufRead, Read, Write};
use std::sync::Arc;

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gates::GateSet;
use crate::su::{op_norm, op_norm_2x2, CMatrix, MetricKind, Unitary};
use crate::vptree::VpTree;
use crate::words::{letter_matrix, Letter, Word};

type C64 = Complex<f64>;

pub const DEFAULT_DEDUP_TOL: f64 = 1e-8;
/// Default cap on the number of stored entries.
pub const DEFAULT_MAX_ENTRIES: usize = 20_000_000;

const ROOT: u32 = u32::MAX;

/// The distinct matrices of all reduced words of length `≤ max_length`, each
/// with a shortest word, plus a vantage-point index over Frobenius distance.
pub struct Net {
    gateset: Arc<GateSet>,
    max_length: usize,
    dedup_tol: f64,
    d: usize,
    parents: Vec<u32>,
    letters: Vec<Letter>,
    lengths: Vec<u16>,
    /// Row-major `d·d` block per entry.
    mats: Vec<C64>,
    index: VpTree,
}

/// Result of a nearest-neighbour query.
#[derive(Debug, Clone, PartialEq)]
pub struct Nearest {
    pub index: usize,
    pub word: Word,
    pub distance_op: f64,
    pub distance_frob: f64,
}

impl std::fmt::Debug for Net {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Net")
            .field("dim", &self.d)
            .field("max_length", &self.max_length)
            .field("dedup_tol", &self.dedup_tol)
            .field("entries", &self.len())
            .finish()
    }
}

pub(crate) fn frob_flat(a: &[C64], b: &[C64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

pub(crate) fn op_flat(a: &[C64], b: &[C64], d: usize) -> f64 {
    if d == 2 {
        op_norm_2x2([a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]])
    } else {
        let diff = CMatrix::from_row_iterator(d, d, a.iter().zip(b).map(|(x, y)| x - y));
        op_norm(&diff)
    }
}

pub(crate) fn matmul_flat(a: &[C64], b: &[C64], d: usize, out: &mut [C64]) {
    for r in 0..d {
        for c in 0..d {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..d {
                acc += a[r * d + k] * b[k * d + c];
            }
            out[r * d + c] = acc;
        }
    }
}

/// Buckets matrices by their quantized first column. Two matrices within
/// `tol` in operator norm have first columns within `tol` coordinatewise, so
/// probing the neighbouring cells along near-boundary coordinates is exhaustive.
struct SpatialHash {
    d: usize,
    tol: f64,
    cell: f64,
    buckets: HashMap<u64, Vec<u32>>,
}

impl SpatialHash {
    fn new(d: usize, tol: f64) -> Self {
        SpatialHash {
            d,
            tol,
            cell: (16.0 * tol).max(1e-12),
            buckets: HashMap::new(),
        }
    }

    fn coords<'a>(&self, m: &'a [C64]) -> impl Iterator<Item = f64> + 'a {
        let d = self.d;
        (0..d).flat_map(move |r| [m[r * d].re, m[r * d].im])
    }

    fn key(cells: &[i64]) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for &c in cells {
            h ^= c as u64;
            h = h.wrapping_mul(0x0100_0000_01b3).rotate_left(29);
        }
        h
    }

    fn home(&self, m: &[C64]) -> Vec<i64> {
        self.coords(m)
            .map(|x| (x / self.cell).floor() as i64)
            .collect()
    }

    fn insert(&mut self, m: &[C64], id: u32) {
        let key = Self::key(&self.home(m));
        self.buckets.entry(key).or_default().push(id);
    }

    /// Calls `f` on every stored id whose cell could hold a point within
    /// `tol` of `m`; stops early when `f` returns true.
    fn any_near(&self, m: &[C64], mut f: impl FnMut(u32) -> bool) -> bool {
        let coords: Vec<f64> = self.coords(m).collect();
        let options: Vec<([i64; 3], usize)> = coords
            .iter()
            .map(|&x| {
                let q = (x / self.cell).floor();
                let mut opts = [q as i64, 0, 0];
                let mut n = 1;
                if x - self.tol < q * self.cell {
                    opts[n] = q as i64 - 1;
                    n += 1;
                }
                if x + self.tol >= (q + 1.0) * self.cell {
                    opts[n] = q as i64 + 1;
                    n += 1;
                }
                (opts, n)
            })
            .collect();
        let mut pick = vec![0usize; options.len()];
        let mut cells = vec![0i64; options.len()];
        loop {
            for (i, &(opts, _)) in options.iter().enumerate() {
                cells[i] = opts[pick[i]];
            }
            if let Some(ids) = self.buckets.get(&Self::key(&cells)) {
                if ids.iter().any(|&id| f(id)) {
                    return true;
                }
            }
            // odometer over the option lists
            let mut i = 0;
            loop {
                if i == options.len() {
                    return false;
                }
                pick[i] += 1;
                if pick[i] < options[i].1 {
                    break;
                }
                pick[i] = 0;
                i += 1;
            }
        }
    }
}

/// Enumerates the net of all reduced words of length `≤ n` with the default
/// entry budget.
pub fn enumerate_net(gs: &GateSet, n: usize, dedup_tol: f64) -> Result<Net> {
    enumerate_net_budgeted(Arc::new(gs.clone()), n, dedup_tol, DEFAULT_MAX_ENTRIES)
}

/// Breadth-first enumeration. Only newly distinct matrices are extended, and
/// never by the letter that would cancel their last letter, so each stored word
/// is a shortest word for its matrix.
pub fn enumerate_net_budgeted(
    gs: Arc<GateSet>,
    n: usize,
    dedup_tol: f64,
    max_entries: usize,
) -> Result<Net> {
    if !(dedup_tol >= 0.0) {
        return Err(Error::out_of_range("dedup tolerance", dedup_tol));
    }
    if n > u16::MAX as usize {
        return Err(Error::out_of_range("length budget", n));
    }
    let d = gs.dim();
    let dd = d * d;
    let alphabet: Vec<(Letter, Vec<C64>)> = Letter::alphabet(gs.len())
        .map(|l| {
            let m = letter_matrix(l, &gs).expect("alphabet within set");
            (l, m.to_rows())
        })
        .collect();

    let mut net = Net {
        gateset: gs,
        max_length: n,
        dedup_tol,
        d,
        parents: vec![ROOT],
        letters: vec![Letter {
            generator: 0,
            inverse: false,
        }],
        lengths: vec![0],
        mats: Unitary::<f64>::identity(d).to_rows(),
        index: VpTree::default(),
    };
    let mut hash = SpatialHash::new(d, dedup_tol);
    hash.insert(&net.mats[..dd], 0);

    let mut frontier: Vec<u32> = vec![0];
    for len in 1..=n {
        let candidates: Vec<(u32, Letter, Vec<C64>)> = frontier
            .par_iter()
            .flat_map_iter(|&parent| {
                let pm = &net.mats[parent as usize * dd..(parent as usize + 1) * dd];
                let last = (parent != 0).then(|| net.letters[parent as usize]);
                alphabet
                    .iter()
                    .filter(move |(l, _)| last.is_none_or(|p| !p.cancels(*l)))
                    .map(move |(l, g)| {
                        let mut out = vec![C64::new(0.0, 0.0); dd];
                        matmul_flat(pm, g, d, &mut out);
                        (parent, *l, out)
                    })
            })
            .collect();
        let mut next = Vec::new();
        for (parent, letter, m) in candidates {
            let dup = hash.any_near(&m, |id| {
                let other = &net.mats[id as usize * dd..(id as usize + 1) * dd];
                op_flat(&m, other, d) <= dedup_tol
            });
            if dup {
                continue;
            }
            if net.parents.len() >= max_entries {
                return Err(Error::NetBudgetExceeded {
                    reached: net.parents.len(),
                    limit: max_entries,
                });
            }
            let id = net.parents.len() as u32;
            hash.insert(&m, id);
            net.parents.push(parent);
            net.letters.push(letter);
            net.lengths.push(len as u16);
            net.mats.extend_from_slice(&m);
            next.push(id);
        }
        frontier = next;
    }
    net.build_index();
    Ok(net)
}

impl Net {
    fn build_index(&mut self) {
        let dd = self.d * self.d;
        let mats = &self.mats;
        self.index = VpTree::build(self.parents.len(), |a, b| {
            frob_flat(
                &mats[a as usize * dd..(a as usize + 1) * dd],
                &mats[b as usize * dd..(b as usize + 1) * dd],
            )
        });
    }

    pub fn len(&self) -> usize {
        self.parents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parents.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn max_length(&self) -> usize {
        self.max_length
    }

    pub fn dedup_tol(&self) -> f64 {
        self.dedup_tol
    }

    pub fn gateset(&self) -> &Arc<GateSet> {
        &self.gateset
    }

    pub fn word_length(&self, i: usize) -> usize {
        self.lengths[i] as usize
    }

    pub fn word(&self, i: usize) -> Word {
        let mut letters = Vec::with_capacity(self.lengths[i] as usize);
        let mut cur = i as u32;
        while self.parents[cur as usize] != ROOT {
            letters.push(self.letters[cur as usize]);
            cur = self.parents[cur as usize];
        }
        letters.reverse();
        Word(letters)
    }

    pub(crate) fn flat(&self, i: usize) -> &[C64] {
        let dd = self.d * self.d;
        &self.mats[i * dd..(i + 1) * dd]
    }

    pub fn matrix(&self, i: usize) -> Unitary {
        Unitary::from_matrix_unchecked(CMatrix::from_row_slice(self.d, self.d, self.flat(i)))
    }

    /// Number of entries whose shortest word has each length `0..=max_length`.
    pub fn length_histogram(&self) -> Vec<usize> {
        let mut h = vec![0; self.max_length + 1];
        for &l in &self.lengths {
            h[l as usize] += 1;
        }
        h
    }

    /// Exact nearest entry to `target` in `metric`, considering only entries
    /// strictly closer than `bound`. Ties keep the entry found first.
    pub fn nearest_within(
        &self,
        target: &[C64],
        metric: MetricKind,
        bound: f64,
    ) -> Option<(usize, f64)> {
        self.nearest_within_counted(target, metric, bound, &mut 0)
    }

    /// As [`Net::nearest_within`], adding the number of entries examined to `visits`.
    pub fn nearest_within_counted(
        &self,
        target: &[C64],
        metric: MetricKind,
        bound: f64,
        visits: &mut u64,
    ) -> Option<(usize, f64)> {
        let d = self.d;
        let sqrt_d = (d as f64).sqrt();
        let mut best: Option<(usize, f64)> = None;
        let mut best_val = bound;
        let to_query = |id: u32| frob_flat(target, self.flat(id as usize));
        match metric {
            MetricKind::Frobenius => self.index.search(
                to_query,
                |id, frob| {
                    *visits += 1;
                    if frob < best_val {
                        best_val = frob;
                        best = Some((id as usize, frob));
                    }
                    best_val
                },
                bound,
            ),
            // op ≥ frob/√d, so anything with frob > √d·best_op cannot improve.
            MetricKind::Operator => self.index.search(
                to_query,
                |id, frob| {
                    *visits += 1;
                    if frob / sqrt_d < best_val {
                        let op = op_flat(target, self.flat(id as usize), d);
                        if op < best_val {
                            best_val = op;
                            best = Some((id as usize, op));
                        }
                    }
                    best_val * sqrt_d
                },
                bound * sqrt_d,
            ),
        }
        best
    }

    /// Exhaustive scan; the reference for [`nearest`].
    pub fn nearest_scan(&self, target: &Unitary, metric: MetricKind) -> Result<Nearest> {
        self.check_target(target)?;
        let t = target.to_rows();
        let (idx, _) = (0..self.len())
            .map(|i| {
                let e = self.flat(i);
                let v = match metric {
                    MetricKind::Operator => op_flat(&t, e, self.d),
                    MetricKind::Frobenius => frob_flat(&t, e),
                };
                (i, v)
            })
            .fold(
                (0, f64::INFINITY),
                |acc, x| if x.1 < acc.1 { x } else { acc },
            );
        Ok(self.hit(idx, &t))
    }

    fn check_target(&self, target: &Unitary) -> Result<()> {
        if self.is_empty() {
            return Err(Error::EmptyNet);
        }
        if target.dim() != self.d {
            return Err(Error::DimensionMismatch {
                left: self.d,
                right: target.dim(),
            });
        }
        Ok(())
    }

    pub(crate) fn hit(&self, idx: usize, target: &[C64]) -> Nearest {
        let e = self.flat(idx);
        Nearest {
            index: idx,
            word: self.word(idx),
            distance_op: op_flat(target, e, self.d),
            distance_frob: frob_flat(target, e),
        }
    }

    /// CSV export: `word` then `re,im` pairs of the row-major entries.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        write!(out, "word")?;
        for r in 1..=self.d {
            for c in 1..=self.d {
                write!(out, ",u{r}{c}_re,u{r}{c}_im")?;
            }
        }
        writeln!(out)?;
        for i in 0..self.len() {
            write!(out, "{}", self.word(i))?;
            for z in self.flat(i) {
                write!(out, ",{},{}", z.re, z.im)?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    const MAGIC: &'static [u8; 8] = b"GFNET01\n";

    /// Little-endian binary dump used by the on-disk net cache.
    pub fn write_binary<W: Write>(&self, mut out: W) -> io::Result<()> {
        out.write_all(Self::MAGIC)?;
        out.write_all(self.gateset.content_hash().as_bytes())?;
        for v in [self.d as u64, self.max_length as u64, self.len() as u64] {
            out.write_all(&v.to_le_bytes())?;
        }
        out.write_all(&self.dedup_tol.to_le_bytes())?;
        for i in 0..self.len() {
            out.write_all(&self.parents[i].to_le_bytes())?;
            out.write_all(&self.letters[i].generator.to_le_bytes())?;
            out.write_all(&[self.letters[i].inverse as u8])?;
            out.write_all(&self.lengths[i].to_le_bytes())?;
        }
        for z in &self.mats {
            out.write_all(&z.re.to_le_bytes())?;
            out.write_all(&z.im.to_le_bytes())?;
        }
        out.flush()
    }

    /// Inverse of [`Net::write_binary`]; the gate set must hash to the stored value.
    pub fn read_binary<R: BufRead>(gs: Arc<GateSet>, mut input: R) -> Result<Net> {
        fn bytes<const N: usize>(r: &mut impl Read) -> Result<[u8; N]> {
            let mut b = [0u8; N];
            r.read_exact(&mut b)?;
            Ok(b)
        }
        let bad = |what: &str| Error::Malformed(format!("net cache: {what}"));
        if &bytes::<8>(&mut input)? != Self::MAGIC {
            return Err(bad("bad magic"));
        }
        let hash = bytes::<64>(&mut input)?;
        if hash.as_slice() != gs.content_hash().as_bytes() {
            return Err(bad("gate set hash mismatch"));
        }
        let d = u64::from_le_bytes(bytes(&mut input)?) as usize;
        let max_length = u64::from_le_bytes(bytes(&mut input)?) as usize;
        let count = u64::from_le_bytes(bytes(&mut input)?) as usize;
        let dedup_tol = f64::from_le_bytes(bytes(&mut input)?);
        if d != gs.dim() {
            return Err(bad("dimension mismatch"));
        }
        let mut parents = Vec::with_capacity(count);
        let mut letters = Vec::with_capacity(count);
        let mut lengths = Vec::with_capacity(count);
        for _ in 0..count {
            parents.push(u32::from_le_bytes(bytes(&mut input)?));
            let generator = u32::from_le_bytes(bytes(&mut input)?);
            let inverse = bytes::<1>(&mut input)?[0] != 0;
            letters.push(Letter { generator, inverse });
            lengths.push(u16::from_le_bytes(bytes(&mut input)?));
        }
        let mut mats = Vec::with_capacity(count * d * d);
        for _ in 0..count * d * d {
            let re = f64::from_le_bytes(bytes(&mut input)?);
            let im = f64::from_le_bytes(bytes(&mut input)?);
            mats.push(C64::new(re, im));
        }
        let mut net = Net {
            gateset: gs,
            max_length,
            dedup_tol,
            d,
            parents,
            letters,
            lengths,
            mats,
            index: VpTree::default(),
        };
        net.build_index();
        Ok(net)
    }
}

/// Exact nearest net entry to `target` under `metric`; both distances are
/// reported.
pub fn nearest(net: &Net, target: &Unitary, metric: MetricKind) -> Result<Nearest> {
    net.check_target(target)?;
    let t = target.to_rows();
    let (idx, _) = net
        .nearest_within(&t, metric, f64::INFINITY)
        .expect("non-empty net has a nearest entry");
    Ok(net.hit(idx, &t))
}
