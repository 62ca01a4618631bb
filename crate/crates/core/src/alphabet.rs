//! Symbols, the shared total order on them, and letter-count compositions.
//!
//! Tokens are opaque byte strings. An [`Alphabet`] stores them sorted by
//! lexicographic byte order, so a [`Symbol`] (an index into that order)
//! compares exactly as its token does.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

/// Position of a token in the canonical order of its alphabet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(pub u32);

impl Symbol {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct Alphabet {
    tokens: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, Symbol>,
}

impl fmt::Debug for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries(self.tokens.iter().map(|t| String::from_utf8_lossy(t)))
            .finish()
    }
}

impl Alphabet {
    /// Builds an alphabet from tokens in any order. Duplicates are rejected.
    pub fn new<I, T>(tokens: I) -> Result<Self>
    where
        I: IntoIterator<Item = T>,
        T: AsRef<[u8]>,
    {
        let mut tokens: Vec<Vec<u8>> = tokens.into_iter().map(|t| t.as_ref().to_vec()).collect();
        if tokens.is_empty() {
            return Err(Error::InvalidAlphabet("no symbols".into()));
        }
        tokens.sort();
        if let Some(w) = tokens.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidAlphabet(format!(
                "duplicate symbol {:?}",
                String::from_utf8_lossy(&w[0])
            )));
        }
        if tokens.len() > u32::MAX as usize {
            return Err(Error::InvalidAlphabet("too many symbols".into()));
        }
        let index = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), Symbol(i as u32)))
            .collect();
        Ok(Alphabet { tokens, index })
    }

    /// Reads the alphabet file format: one token per line, file order
    /// ignored. Blank lines are skipped; a trailing `\r` is stripped.
    pub fn parse(text: &[u8]) -> Result<Self> {
        Self::new(lines(text))
    }

    /// Single-letter tokens `a`, `b`, ... for up to 26 symbols.
    pub fn letters(k: usize) -> Result<Self> {
        if !(1..=26).contains(&k) {
            return Err(Error::InvalidAlphabet(format!("cannot build {k} letter symbols")));
        }
        Self::new((b'a'..).take(k).map(|c| [c]))
    }

    /// Zero-padded decimal tokens `0`..`k-1`, so byte order matches numeric order.
    pub fn numbered(k: usize) -> Result<Self> {
        let width = k.saturating_sub(1).to_string().len();
        Self::new((0..k).map(|i| format!("{i:0width$}")))
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn symbols(&self) -> impl Iterator<Item = Symbol> + '_ {
        (0..self.tokens.len() as u32).map(Symbol)
    }

    pub fn tokens(&self) -> impl Iterator<Item = &[u8]> {
        self.tokens.iter().map(Vec::as_slice)
    }

    pub fn symbol(&self, token: &[u8]) -> Result<Symbol> {
        self.index.get(token).copied().ok_or_else(|| Error::unknown_token(token))
    }

    pub fn token(&self, symbol: Symbol) -> &[u8] {
        &self.tokens[symbol.index()]
    }

    pub fn contains(&self, symbol: Symbol) -> bool {
        symbol.index() < self.tokens.len()
    }

    pub fn resolve<T: AsRef<[u8]>>(&self, tokens: &[T]) -> Result<Vec<Symbol>> {
        tokens.iter().map(|t| self.symbol(t.as_ref())).collect()
    }

    /// Treats every byte of `word` as a one-byte token.
    pub fn word(&self, word: &str) -> Result<Vec<Symbol>> {
        word.bytes().map(|b| self.symbol(&[b])).collect()
    }

    /// Concatenates the tokens of `block`, lossily decoded as UTF-8.
    pub fn spell(&self, block: &[Symbol]) -> String {
        block
            .iter()
            .map(|&s| String::from_utf8_lossy(self.token(s)))
            .collect()
    }

    /// Orders two tokens. Agrees with byte-wise comparison of the tokens.
    pub fn compare(&self, x: &[u8], y: &[u8]) -> Result<Ordering> {
        Ok(self.symbol(x)?.cmp(&self.symbol(y)?))
    }

    pub fn composition_of<T: AsRef<[u8]>>(&self, tokens: &[T]) -> Result<Composition> {
        Ok(Composition::of_trusted(&self.resolve(tokens)?))
    }

    /// Newline-delimited tokens, canonical order.
    pub fn to_file_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for t in &self.tokens {
            out.extend_from_slice(t);
            out.push(b'\n');
        }
        out
    }

    pub fn check_codec_size(&self) -> Result<()> {
        if self.len() < 2 {
            return Err(Error::InvalidAlphabet("at least two symbols are required".into()));
        }
        Ok(())
    }
}

/// Splits newline-delimited text, dropping blank lines and a trailing `\r`.
pub fn lines(text: &[u8]) -> impl Iterator<Item = &[u8]> {
    text.split(|&b| b == b'\n')
        .map(|l| l.strip_suffix(b"\r").unwrap_or(l))
        .filter(|l| !l.is_empty())
}

/// Letter counts of a block, stored sparsely as `(symbol, count)` pairs in
/// canonical symbol order with every count positive.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Composition {
    parts: Vec<(Symbol, u32)>,
    len: usize,
}

impl Composition {
    pub fn of(block: &[Symbol], alphabet: &Alphabet) -> Result<Self> {
        if let Some(s) = block.iter().find(|s| !alphabet.contains(**s)) {
            return Err(Error::UnknownSymbol(format!("#{}", s.0)));
        }
        Ok(Self::of_trusted(block))
    }

    pub(crate) fn of_trusted(block: &[Symbol]) -> Self {
        let mut comp = Composition::default();
        comp.refill(block, &mut Vec::with_capacity(block.len()));
        comp
    }

    /// Recomputes in place, reusing both allocations.
    pub(crate) fn refill(&mut self, block: &[Symbol], scratch: &mut Vec<Symbol>) {
        scratch.clear();
        scratch.extend_from_slice(block);
        scratch.sort_unstable();
        self.parts.clear();
        for &s in scratch.iter() {
            match self.parts.last_mut() {
                Some((last, c)) if *last == s => *c += 1,
                _ => self.parts.push((s, 1)),
            }
        }
        self.len = block.len();
    }

    /// Builds from a dense per-symbol count vector.
    pub fn from_counts(counts: &[u32]) -> Self {
        let parts: Vec<_> = counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, &c)| (Symbol(i as u32), c))
            .collect();
        let len = counts.iter().map(|&c| c as usize).sum();
        Composition { parts, len }
    }

    pub fn count(&self, symbol: Symbol) -> u32 {
        self.parts
            .binary_search_by_key(&symbol, |p| p.0)
            .map(|i| self.parts[i].1)
            .unwrap_or(0)
    }

    /// Dense counts over an alphabet of `alphabet_len` symbols.
    pub fn counts(&self, alphabet_len: usize) -> Vec<u32> {
        let mut out = vec![0; alphabet_len];
        for &(s, c) in &self.parts {
            out[s.index()] = c;
        }
        out
    }

    pub fn parts(&self) -> &[(Symbol, u32)] {
        &self.parts
    }

    /// Block length `n`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// The lexicographically smallest block with this composition.
    pub fn sorted_block(&self) -> Vec<Symbol> {
        self.parts
            .iter()
            .flat_map(|&(s, c)| std::iter::repeat_n(s, c as usize))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn abc() -> Alphabet {
        Alphabet::letters(3).unwrap()
    }

    #[test]
    fn composition_examples() {
        let a = abc();
        assert_eq!(a.composition_of(&["b", "a", "c"]).unwrap().counts(3), vec![1, 1, 1]);
        assert_eq!(a.composition_of(&["a", "a", "a"]).unwrap().counts(3), vec![3, 0, 0]);
        let ab = Alphabet::letters(2).unwrap();
        let comp = Composition::of(&ab.word("aabb").unwrap(), &ab).unwrap();
        assert_eq!(comp.counts(2), vec![2, 2]);
        assert_eq!(comp.len(), 4);
    }

    #[test]
    fn unknown_symbols_are_rejected() {
        let a = abc();
        assert!(matches!(a.composition_of(&["a", "z"]), Err(Error::UnknownSymbol(s)) if s == "z"));
        assert!(matches!(a.compare(b"a", b"q"), Err(Error::UnknownSymbol(_))));
        assert!(Composition::of(&[Symbol(7)], &a).is_err());
    }

    #[test]
    fn compare_examples() {
        let a = abc();
        assert_eq!(a.compare(b"a", b"b").unwrap(), Ordering::Less);
        assert_eq!(a.compare(b"b", b"b").unwrap(), Ordering::Equal);
        assert_eq!(a.compare(b"c", b"a").unwrap(), Ordering::Greater);
    }

    #[test]
    fn file_order_is_ignored_and_duplicates_fail() {
        let a = Alphabet::parse(b"zeta\nalpha\r\n\nmid\n").unwrap();
        assert_eq!(a.tokens().collect::<Vec<_>>(), vec![&b"alpha"[..], b"mid", b"zeta"]);
        assert_eq!(Alphabet::parse(&a.to_file_bytes()).unwrap(), a);
        assert!(matches!(Alphabet::parse(b"x\ny\nx\n"), Err(Error::InvalidAlphabet(_))));
        assert!(Alphabet::parse(b"\n\n").is_err());
    }

    #[test]
    fn numbered_tokens_sort_numerically() {
        let a = Alphabet::numbered(1024).unwrap();
        assert_eq!(a.token(Symbol(7)), b"0007");
        assert_eq!(a.token(Symbol(1023)), b"1023");
    }

    proptest! {
        #[test]
        fn compare_is_a_total_order(
            toks in proptest::collection::btree_set(proptest::collection::vec(any::<u8>(), 0..4), 3..8),
            i in 0usize..3, j in 0usize..3, k in 0usize..3,
        ) {
            let toks: Vec<_> = toks.into_iter().collect();
            let a = Alphabet::new(&toks).unwrap();
            let (x, y, z) = (&toks[i], &toks[j], &toks[k]);
            let xy = a.compare(x, y).unwrap();
            prop_assert_eq!(xy, x.cmp(y));
            prop_assert_eq!(a.compare(y, x).unwrap(), xy.reverse());
            if xy != Ordering::Greater && a.compare(y, z).unwrap() != Ordering::Greater {
                prop_assert_ne!(a.compare(x, z).unwrap(), Ordering::Greater);
            }
        }

        #[test]
        fn composition_is_permutation_invariant(
            block in proptest::collection::vec(0u32..5, 0..12),
            seed in any::<u64>(),
        ) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let a = Alphabet::letters(5).unwrap();
            let block: Vec<Symbol> = block.into_iter().map(Symbol).collect();
            let mut shuffled = block.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let c = Composition::of(&block, &a).unwrap();
            prop_assert_eq!(&c, &Composition::of(&shuffled, &a).unwrap());
            prop_assert_eq!(c.counts(5).iter().sum::<u32>() as usize, block.len());
        }
    }
}
