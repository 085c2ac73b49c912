//! Words over a gate set and their free reduction.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::gates::GateSet;
use crate::scalar::Real;
use crate::su::Unitary;

/// A generator or its inverse. `generator` is 0-based; text forms are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub generator: u32,
    pub inverse: bool,
}

impl Letter {
    /// The 1-based generator `index` with sign `±1`.
    pub fn signed(index: i64) -> Self {
        assert!(index != 0, "generator indices are 1-based");
        Letter {
            generator: (index.unsigned_abs() - 1) as u32,
            inverse: index < 0,
        }
    }

    pub fn inv(self) -> Self {
        Letter {
            inverse: !self.inverse,
            ..self
        }
    }

    pub fn cancels(self, other: Letter) -> bool {
        self.generator == other.generator && self.inverse != other.inverse
    }

    /// Letters of a `k`-generator alphabet in a fixed order: `1, -1, 2, -2, …`.
    pub fn alphabet(k: usize) -> impl Iterator<Item = Letter> {
        (0..k as u32).flat_map(|g| {
            [false, true].into_iter().map(move |inverse| Letter {
                generator: g,
                inverse,
            })
        })
    }

    pub fn to_signed(self) -> i64 {
        let i = self.generator as i64 + 1;
        if self.inverse {
            -i
        } else {
            i
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_signed())
    }
}

/// An ordered product of letters; `evaluate` multiplies left to right.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn from_signed(indices: &[i64]) -> Self {
        Word(indices.iter().map(|&i| Letter::signed(i)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    /// No adjacent `x x⁻¹` pair.
    pub fn is_reduced(&self) -> bool {
        self.0.windows(2).all(|w| !w[0].cancels(w[1]))
    }

    /// Free reduction by repeatedly cancelling adjacent inverse pairs.
    pub fn reduce(&self) -> Word {
        let mut out: Vec<Letter> = Vec::with_capacity(self.0.len());
        for &l in &self.0 {
            match out.last() {
                Some(&top) if top.cancels(l) => {
                    out.pop();
                }
                _ => out.push(l),
            }
        }
        Word(out)
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inv()).collect())
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// Uniform reduced word of length `n` over `k` generators.
    pub fn random_reduced<R: Rng + ?Sized>(k: usize, n: usize, rng: &mut R) -> Word {
        let mut v: Vec<Letter> = Vec::with_capacity(n);
        for _ in 0..n {
            loop {
                let l = Letter {
                    generator: rng.random_range(0..k as u32),
                    inverse: rng.random(),
                };
                if v.last().is_none_or(|&p| !p.cancels(l)) {
                    v.push(l);
                    break;
                }
            }
        }
        Word(v)
    }
}

impl fmt::Display for Word {
    /// Signed 1-based indices joined by `.`, e.g. `1.-2.3`; the empty word is
    /// the empty string.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(Word::empty());
        }
        s.split('.')
            .map(|tok| match tok.trim().parse::<i64>() {
                Ok(0) | Err(_) => Err(Error::Malformed(format!("bad letter `{tok}` in word"))),
                Ok(i) => Ok(Letter::signed(i)),
            })
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }
}

/// Generator or inverse matrix for `letter`.
pub fn letter_matrix<T: Real>(letter: Letter, gs: &GateSet<T>) -> Result<Unitary<T>> {
    let g = gs
        .generators()
        .get(letter.generator as usize)
        .ok_or(Error::BadGenerator {
            index: letter.generator as usize + 1,
            size: gs.len(),
        })?;
    Ok(if letter.inverse {
        g.adjoint()
    } else {
        g.clone()
    })
}

/// Product of the letters' matrices, left to right. The empty word is `I`.
pub fn evaluate<T: Real>(w: &Word, gs: &GateSet<T>) -> Result<Unitary<T>> {
    let mut acc = Unitary::identity(gs.dim());
    for &l in w.letters() {
        acc = &acc * &letter_matrix(l, gs)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::lps_generators;
    use crate::rng::substream;
    use crate::su::{dist, MetricKind};
    use proptest::prelude::*;

    #[test]
    fn evaluate_examples() {
        let gs = lps_generators::<f64>();
        assert_eq!(evaluate(&Word::empty(), &gs).unwrap(), Unitary::identity(2));
        assert_eq!(
            evaluate(&Word::from_signed(&[1]), &gs).unwrap(),
            gs.generators()[0]
        );
        let id = evaluate(&Word::from_signed(&[1, -1]), &gs).unwrap();
        assert!(dist(&id, &Unitary::identity(2), MetricKind::Operator).unwrap() < 1e-15);
        assert!(matches!(
            evaluate(&Word::from_signed(&[4]), &gs),
            Err(Error::BadGenerator { index: 4, size: 3 })
        ));
    }

    #[test]
    fn reduce_examples() {
        assert_eq!(Word::from_signed(&[1, -1]).reduce(), Word::empty());
        assert_eq!(
            Word::from_signed(&[1, 2, -2, 1]).reduce(),
            Word::from_signed(&[1, 1])
        );
        assert_eq!(
            Word::from_signed(&[1, 2, -3, 3, 1]).reduce(),
            Word::from_signed(&[1, 2, 1])
        );
        let r = Word::from_signed(&[2, 3, -1, -1]);
        assert_eq!(r.reduce(), r);
    }

    #[test]
    fn text_form() {
        let w: Word = "1.-2.3".parse().unwrap();
        assert_eq!(w, Word::from_signed(&[1, -2, 3]));
        assert_eq!(w.to_string(), "1.-2.3");
        assert_eq!("".parse::<Word>().unwrap(), Word::empty());
        assert!("1..2".parse::<Word>().is_err());
        assert!("0".parse::<Word>().is_err());
    }

    #[test]
    fn random_reduced_words_are_reduced() {
        let mut rng = substream(4, 0);
        for n in 0..30 {
            let w = Word::random_reduced(3, n, &mut rng);
            assert_eq!(w.len(), n);
            assert!(w.is_reduced());
        }
    }

    fn arb_word() -> impl Strategy<Value = Word> {
        prop::collection::vec((1i64..=3, any::<bool>()), 0..24).prop_map(|v| {
            Word::from_signed(
                &v.iter()
                    .map(|&(i, s)| if s { -i } else { i })
                    .collect::<Vec<_>>(),
            )
        })
    }

    proptest! {
        #[test]
        fn reduce_preserves_value(w in arb_word()) {
            let gs = lps_generators::<f64>();
            let r = w.reduce();
            prop_assert!(r.is_reduced());
            prop_assert!(r.len() <= w.len());
            prop_assert_eq!(r.reduce(), r.clone());
            let a = evaluate(&w, &gs).unwrap();
            let b = evaluate(&r, &gs).unwrap();
            prop_assert!(dist(&a, &b, MetricKind::Operator).unwrap() <= 1e-12);
        }

        #[test]
        fn text_roundtrip(w in arb_word()) {
            prop_assert_eq!(w.to_string().parse::<Word>().unwrap(), w);
        }
    }
}
