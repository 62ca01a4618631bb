//! Simulated cover source (i.i.d. categorical) and hidden-bit source (fair coin).

use rand::Rng;
use sha2::{Digest, Sha256};

use crate::alphabet::{lines, Alphabet, Symbol};
use crate::error::{Error, Result};
use crate::scalar::{parse_rational, Probability};

/// An i.i.d. source over a finite alphabet.
#[derive(Clone, Debug, PartialEq)]
pub struct SourceModel<P> {
    alphabet: Alphabet,
    probs: Vec<P>,
    cdf: Vec<f64>,
}

impl<P: Probability> SourceModel<P> {
    /// `probs[i]` is the probability of the i-th symbol in canonical order.
    pub fn new(alphabet: Alphabet, probs: Vec<P>) -> Result<Self> {
        if alphabet.len() < 2 {
            return Err(Error::InvalidModel("a source needs at least two symbols".into()));
        }
        if probs.len() != alphabet.len() {
            return Err(Error::InvalidModel(format!(
                "{} probabilities for {} symbols",
                probs.len(),
                alphabet.len()
            )));
        }
        if let Some(i) = probs.iter().position(|p| !(*p > P::zero() && p.as_f64().is_finite())) {
            return Err(Error::InvalidModel(format!(
                "probability of {:?} is not positive",
                String::from_utf8_lossy(alphabet.token(Symbol(i as u32)))
            )));
        }
        let sum = probs.iter().fold(P::zero(), |acc, p| acc + p.clone());
        if (sum.clone() - P::one()).abs() > P::normalization_tolerance() {
            return Err(Error::InvalidModel(format!("probabilities sum to {}", sum.as_f64())));
        }
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = probs
            .iter()
            .map(|p| {
                acc += p.as_f64();
                acc
            })
            .collect();
        *cdf.last_mut().unwrap() = 1.0;
        Ok(SourceModel { alphabet, probs, cdf })
    }

    /// Builds from `(token, probability)` pairs in any order.
    pub fn from_pairs<T: AsRef<[u8]>>(pairs: Vec<(T, P)>) -> Result<Self> {
        let alphabet = Alphabet::new(pairs.iter().map(|(t, _)| t.as_ref()))?;
        let mut probs = vec![P::zero(); alphabet.len()];
        for (t, p) in pairs {
            probs[alphabet.symbol(t.as_ref())?.index()] = p;
        }
        Self::new(alphabet, probs)
    }

    /// Reads the model file format: `token probability` per line,
    /// whitespace-separated, probabilities as decimal strings (or `a/b`).
    pub fn parse(text: &[u8]) -> Result<Self> {
        let pairs = parse_model_lines(text)?
            .into_iter()
            .map(|(t, s)| {
                P::from_decimal(&s)
                    .map(|p| (t, p))
                    .ok_or_else(|| Error::InvalidModel(format!("bad probability {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_pairs(pairs)
    }

    pub fn uniform(alphabet: Alphabet) -> Result<Self> {
        let k = P::from_ratio(&1u32.into(), &alphabet.len().into());
        let probs = vec![k; alphabet.len()];
        Self::new(alphabet, probs)
    }

    /// `p` on `a`, `1 - p` on `b`.
    pub fn two_point(p: P) -> Result<Self> {
        let q = P::one() - p.clone();
        Self::new(Alphabet::letters(2)?, vec![p, q])
    }

    /// Zipf law with integer exponent: the i-th symbol (1-based, canonical
    /// order) has weight `1 / i^s`.
    pub fn zipf(alphabet: Alphabet, s: u32) -> Result<Self> {
        let one = num_bigint::BigUint::from(1u32);
        let weights: Vec<P> = (1..=alphabet.len())
            .map(|i| P::from_ratio(&one, &num_bigint::BigUint::from(i).pow(s)))
            .collect();
        let total = weights.iter().fold(P::zero(), |acc, w| acc + w.clone());
        let probs = weights.into_iter().map(|w| w / total.clone()).collect();
        Self::new(alphabet, probs)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn probs(&self) -> &[P] {
        &self.probs
    }

    pub fn prob(&self, symbol: Symbol) -> &P {
        &self.probs[symbol.index()]
    }

    /// `mu(u)`, the product of letter probabilities.
    pub fn block_probability(&self, block: &[Symbol]) -> P {
        block
            .iter()
            .fold(P::one(), |acc, &s| acc * self.probs[s.index()].clone())
    }

    pub fn to_f64_model(&self) -> SourceModel<f64> {
        SourceModel {
            alphabet: self.alphabet.clone(),
            probs: self.probs.iter().map(P::as_f64).collect(),
            cdf: self.cdf.clone(),
        }
    }

    /// Canonical text form: `token<TAB>probability` per line, canonical order.
    pub fn to_file_string(&self) -> String {
        self.alphabet
            .tokens()
            .zip(&self.probs)
            .map(|(t, p)| format!("{}\t{}\n", String::from_utf8_lossy(t), p))
            .collect()
    }

    /// SHA-256 of the canonical text form, hex encoded.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_file_string().as_bytes()))
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Symbol {
        let u: f64 = rng.gen();
        let i = self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1);
        Symbol(i as u32)
    }

    pub fn draw_cover<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Vec<Symbol> {
        (0..count).map(|_| self.sample(rng)).collect()
    }
}

fn parse_model_lines(text: &[u8]) -> Result<Vec<(Vec<u8>, String)>> {
    lines(text)
        .filter(|l| !l.iter().all(u8::is_ascii_whitespace))
        .map(|line| {
            let line = std::str::from_utf8(line)
                .map_err(|_| Error::InvalidModel("model file is not UTF-8".into()))?;
            let mut fields = line.split_whitespace();
            match (fields.next(), fields.next(), fields.next()) {
                (Some(t), Some(p), None) => Ok((t.as_bytes().to_vec(), p.to_string())),
                _ => Err(Error::InvalidModel(format!("expected `token probability`, got {line:?}"))),
            }
        })
        .collect()
}

/// A model file loaded in the most exact arithmetic it supports.
#[derive(Clone, Debug)]
pub enum LoadedModel {
    /// Decimal probabilities that sum to one exactly.
    Exact(SourceModel<num_rational::BigRational>),
    /// Probabilities that sum to one only within the double tolerance.
    Float(SourceModel<f64>),
}

impl LoadedModel {
    pub fn parse(text: &[u8]) -> Result<Self> {
        match SourceModel::parse(text) {
            Ok(m) => Ok(LoadedModel::Exact(m)),
            Err(Error::InvalidModel(msg)) if msg.starts_with("probabilities sum") => {
                // validate the literals exactly once more before falling back
                for (_, s) in parse_model_lines(text)? {
                    parse_rational(&s).ok_or_else(|| Error::InvalidModel(format!("bad probability {s:?}")))?;
                }
                SourceModel::<f64>::parse(text).map(LoadedModel::Float)
            }
            Err(e) => Err(e),
        }
    }

    pub fn alphabet(&self) -> &Alphabet {
        match self {
            LoadedModel::Exact(m) => m.alphabet(),
            LoadedModel::Float(m) => m.alphabet(),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, LoadedModel::Exact(_))
    }

    pub fn to_f64_model(&self) -> SourceModel<f64> {
        match self {
            LoadedModel::Exact(m) => m.to_f64_model(),
            LoadedModel::Float(m) => m.clone(),
        }
    }

    pub fn digest(&self) -> String {
        match self {
            LoadedModel::Exact(m) => m.digest(),
            LoadedModel::Float(m) => m.digest(),
        }
    }
}

/// Endless fair bits.
#[derive(Clone, Debug)]
pub struct HiddenBits<R>(pub R);

impl<R: Rng> Iterator for HiddenBits<R> {
    type Item = bool;

    #[inline]
    fn next(&mut self) -> Option<bool> {
        Some(self.0.gen())
    }
}

pub fn draw_hidden_bits<R: Rng + ?Sized>(count: usize, rng: &mut R) -> Vec<bool> {
    (0..count).map(|_| rng.gen()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use num_rational::BigRational;

    fn three_sigma(p: f64, n: usize) -> f64 {
        3.0 * (p * (1.0 - p) / n as f64).sqrt()
    }

    #[test]
    fn validation() {
        let ab = Alphabet::letters(2).unwrap();
        assert!(SourceModel::new(ab.clone(), vec![0.5, 0.5]).is_ok());
        assert!(SourceModel::new(ab.clone(), vec![0.5, 0.5 + 1e-13]).is_ok());
        assert!(SourceModel::new(ab.clone(), vec![0.5, 0.6]).is_err());
        assert!(SourceModel::new(ab.clone(), vec![1.0, 0.0]).is_err());
        assert!(SourceModel::new(ab.clone(), vec![1.5, -0.5]).is_err());
        assert!(SourceModel::new(ab, vec![1.0]).is_err());
        assert!(SourceModel::new(Alphabet::letters(1).unwrap(), vec![1.0]).is_err());
        let third = BigRational::new(1.into(), 3.into());
        assert!(SourceModel::new(Alphabet::letters(3).unwrap(), vec![third.clone(); 3]).is_ok());
        let almost = BigRational::new(333_333.into(), 1_000_000.into());
        assert!(SourceModel::new(Alphabet::letters(3).unwrap(), vec![almost; 3]).is_err());
    }

    #[test]
    fn model_file_parsing() {
        let m = SourceModel::<BigRational>::parse(b"b 0.3\na 0.7\n").unwrap();
        assert_eq!(m.probs()[0], BigRational::new(7.into(), 10.into()));
        assert_eq!(SourceModel::<BigRational>::parse(m.to_file_string().as_bytes()).unwrap(), m);
        assert!(SourceModel::<f64>::parse(b"a 0.7\nb\n").is_err());
        assert!(SourceModel::<f64>::parse(b"a 0.7\nb x\n").is_err());
        assert!(SourceModel::<f64>::parse(b"a 0.7\na 0.3\n").is_err());

        assert!(LoadedModel::parse(b"a 0.5\nb 0.3\nc 0.2\n").unwrap().is_exact());
        let thirds = b"a 0.3333333333333333\nb 0.3333333333333333\nc 0.3333333333333334\n";
        assert!(LoadedModel::parse(thirds).unwrap().is_exact());
        let close = b"a 0.33333333333333\nb 0.33333333333333\nc 0.33333333333334\n";
        assert!(LoadedModel::parse(close).unwrap().is_exact());
        let float = b"a 0.3333333333333\nb 0.3333333333333\nc 0.3333333333333334\n";
        assert!(!LoadedModel::parse(float).unwrap().is_exact());
        assert!(LoadedModel::parse(b"a 0.5\nb 0.4\n").is_err());
    }

    #[test]
    fn digest_is_order_independent() {
        let a = SourceModel::<f64>::parse(b"a 0.7\nb 0.3\n").unwrap();
        let b = SourceModel::<f64>::parse(b"b 0.3\na 0.7\n").unwrap();
        assert_eq!(a.digest(), b.digest());
        assert_eq!(a.digest().len(), 64);
    }

    #[test]
    fn presets() {
        let z = SourceModel::<BigRational>::zipf(Alphabet::letters(3).unwrap(), 1).unwrap();
        // weights 1, 1/2, 1/3 over 11/6
        assert_eq!(z.probs()[0], BigRational::new(6.into(), 11.into()));
        assert_eq!(z.probs()[2], BigRational::new(2.into(), 11.into()));
        let u = SourceModel::<f64>::uniform(Alphabet::numbered(16).unwrap()).unwrap();
        assert_eq!(u.probs()[5], 1.0 / 16.0);
        assert!(SourceModel::two_point(1.0f64).is_err());
    }

    #[test]
    fn draw_examples() {
        let u = SourceModel::<f64>::uniform(Alphabet::letters(2).unwrap()).unwrap();
        assert!(u.draw_cover(0, &mut seeded(1)).is_empty());
        let n = 1_000_000;
        let freq = |m: &SourceModel<f64>| {
            let draws = m.draw_cover(n, &mut seeded(2024));
            draws.iter().filter(|s| s.0 == 0).count() as f64 / n as f64
        };
        assert!((freq(&u) - 0.5).abs() < three_sigma(0.5, n));
        let skew = SourceModel::two_point(0.7f64).unwrap();
        assert!((freq(&skew) - 0.7).abs() < three_sigma(0.7, n));
    }

    #[test]
    fn hidden_bits() {
        assert!(draw_hidden_bits(0, &mut seeded(1)).is_empty());
        let n = 1_000_000;
        let bits = draw_hidden_bits(n, &mut seeded(77));
        let ones = bits.iter().filter(|&&b| b).count() as f64 / n as f64;
        assert!((ones - 0.5).abs() < three_sigma(0.5, n));
        assert_eq!(draw_hidden_bits(1000, &mut seeded(5)), draw_hidden_bits(1000, &mut seeded(5)));
        let streamed: Vec<bool> = HiddenBits(seeded(5)).take(1000).collect();
        assert_eq!(streamed, draw_hidden_bits(1000, &mut seeded(5)));
    }

    #[test]
    fn cover_is_reproducible() {
        let m = SourceModel::<f64>::zipf(Alphabet::numbered(50).unwrap(), 1).unwrap();
        assert_eq!(m.draw_cover(5000, &mut seeded(3)), m.draw_cover(5000, &mut seeded(3)));
    }
}
