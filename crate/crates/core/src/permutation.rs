//! Lexicographic ranking and unranking of multiset permutations.
//!
//! The class `S_u` of a block `u` is the set of all rearrangements of its
//! letters. Members are ordered lexicographically under the alphabet's
//! canonical order; a member's rank is the number of members smaller than it.
//! Ranking walks the block left to right and, at each position, adds the
//! number of class members that agree on the prefix but carry a smaller
//! symbol there. That count is `remaining_size * count(s) / remaining_len`,
//! so no factorial tables are needed.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use crate::alphabet::{Alphabet, Composition, Symbol};
use crate::error::{Error, Result};
use crate::scalar::ClassInt;

/// `|S_u| = n! / prod(count(a)!)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClassSize(BigUint);

impl ClassSize {
    pub fn value(&self) -> &BigUint {
        &self.0
    }

    pub fn into_inner(self) -> BigUint {
        self.0
    }

    pub fn log2(&self) -> f64 {
        log2_biguint(&self.0)
    }
}

pub fn class_size(comp: &Composition) -> ClassSize {
    ClassSize(class_size_as::<BigUint>(comp))
}

/// Class size in a caller-chosen integer type. The caller guarantees the
/// block length is within `I::MAX_BLOCK_LEN`.
pub fn class_size_as<I: ClassInt>(comp: &Composition) -> I {
    let mut size = I::one();
    let mut placed = 0u32;
    for &(_, count) in comp.parts() {
        for i in 1..=count {
            placed += 1;
            size = size.mul_small(placed).div_small(i);
        }
    }
    size
}

/// Rank of `block` within its own class.
pub fn rank(block: &[Symbol], alphabet: &Alphabet) -> Result<BigUint> {
    let comp = Composition::of(block, alphabet)?;
    Ok(Ranker::default().rank::<BigUint>(block, &comp).0)
}

/// The class member of `comp` with the given rank.
pub fn unrank(comp: &Composition, index: &BigUint, alphabet: &Alphabet) -> Result<Vec<Symbol>> {
    if let Some(&(s, _)) = comp.parts().iter().find(|(s, _)| !alphabet.contains(*s)) {
        return Err(Error::UnknownSymbol(format!("#{}", s.0)));
    }
    let size = class_size_as::<BigUint>(comp);
    if *index >= size {
        return Err(Error::IndexOutOfRange {
            index: index.to_string(),
            size: size.to_string(),
        });
    }
    let mut out = Vec::with_capacity(comp.len());
    Ranker::default().unrank(comp, index.clone(), size, &mut out);
    Ok(out)
}

/// Arithmetic width sufficient for a given block length.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Width {
    U64,
    U128,
    Big,
}

impl Width {
    pub fn for_block_len(n: usize) -> Self {
        if n <= u64::MAX_BLOCK_LEN {
            Width::U64
        } else if n <= u128::MAX_BLOCK_LEN {
            Width::U128
        } else {
            Width::Big
        }
    }
}

/// Reusable scratch space for ranking and unranking.
#[derive(Debug, Default)]
pub struct Ranker {
    remaining: Vec<(Symbol, u32)>,
}

impl Ranker {
    /// Returns `(rank, class_size)`. `comp` must be the composition of `block`.
    pub fn rank<I: ClassInt>(&mut self, block: &[Symbol], comp: &Composition) -> (I, I) {
        let size = class_size_as::<I>(comp);
        self.remaining.clear();
        self.remaining.extend_from_slice(comp.parts());

        let mut rank = I::zero();
        let mut sub = size.clone();
        let mut len = block.len() as u32;
        for &x in block {
            let mut hit = None;
            for (j, &(s, c)) in self.remaining.iter().enumerate() {
                if s >= x {
                    debug_assert_eq!(s, x, "block does not match its composition");
                    hit = Some(j);
                    break;
                }
                if c > 0 {
                    rank = rank + sub.mul_small(c).div_small(len);
                }
            }
            let j = hit.expect("block does not match its composition");
            let c = self.remaining[j].1;
            sub = sub.mul_small(c).div_small(len);
            self.remaining[j].1 -= 1;
            len -= 1;
        }
        (rank, size)
    }

    /// Writes the member of rank `index` into `out`; `size` is the class size.
    pub fn unrank<I: ClassInt>(&mut self, comp: &Composition, mut index: I, size: I, out: &mut Vec<Symbol>) {
        debug_assert!(index < size);
        self.remaining.clear();
        self.remaining.extend_from_slice(comp.parts());

        let mut sub = size;
        let mut len = comp.len() as u32;
        for _ in 0..comp.len() {
            let mut chosen = None;
            for (j, &(_, c)) in self.remaining.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                let span = sub.mul_small(c).div_small(len);
                if index < span {
                    sub = span;
                    chosen = Some(j);
                    break;
                }
                index = index - span;
            }
            let j = chosen.expect("index within class size");
            out.push(self.remaining[j].0);
            self.remaining[j].1 -= 1;
            len -= 1;
        }
    }
}

pub(crate) fn log2_biguint(v: &BigUint) -> f64 {
    if v.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = v.bits();
    if bits <= 1000 {
        v.to_f64().unwrap_or(f64::INFINITY).log2()
    } else {
        let shift = bits - 64;
        (v >> shift).to_f64().unwrap_or(f64::INFINITY).log2() + shift as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;
    use std::collections::BTreeSet;

    fn factorial(n: u32) -> BigUint {
        (1..=n).fold(BigUint::one(), |acc, k| acc * k)
    }

    /// All distinct arrangements of `block`, sorted. Independent of the ranker.
    fn brute_class(block: &[Symbol]) -> Vec<Vec<Symbol>> {
        fn go(prefix: &mut Vec<Symbol>, rest: &mut Vec<Symbol>, out: &mut BTreeSet<Vec<Symbol>>) {
            if rest.is_empty() {
                out.insert(prefix.clone());
                return;
            }
            for i in 0..rest.len() {
                let s = rest.remove(i);
                prefix.push(s);
                go(prefix, rest, out);
                prefix.pop();
                rest.insert(i, s);
            }
        }
        let mut out = BTreeSet::new();
        go(&mut Vec::new(), &mut block.to_vec(), &mut out);
        out.into_iter().collect()
    }

    #[test]
    fn class_size_examples() {
        let abc = Alphabet::letters(3).unwrap();
        let size = |w: &str| class_size(&Composition::of(&abc.word(w).unwrap(), &abc).unwrap());
        assert_eq!(size("bac").value(), &BigUint::from(6u32));
        assert_eq!(size("aaa").value(), &BigUint::from(1u32));
        assert_eq!(size("aabb").value(), &BigUint::from(brute_class(&abc.word("aabb").unwrap()).len()));
        assert_eq!(size("aabb").value(), &BigUint::from(6u32));
    }

    #[test]
    fn rank_examples() {
        let abc = Alphabet::letters(3).unwrap();
        let r = |w: &str| rank(&abc.word(w).unwrap(), &abc).unwrap();
        assert_eq!(r("bac"), BigUint::from(2u32));
        assert_eq!(r("abc"), BigUint::zero());
        assert_eq!(r("cab"), BigUint::from(4u32));
    }

    #[test]
    fn unrank_examples() {
        let abc = Alphabet::letters(3).unwrap();
        let comp = abc.composition_of(&["a", "b", "c"]).unwrap();
        let u = |c: &Composition, i: u32| abc.spell(&unrank(c, &BigUint::from(i), &abc).unwrap());
        assert_eq!(u(&comp, 4), "cab");
        assert_eq!(u(&comp, 0), "abc");
        let aabb = Composition::from_counts(&[2, 2]);
        let arrangements = brute_class(&abc.word("aabb").unwrap());
        assert_eq!(abc.spell(arrangements.last().unwrap()), "bbaa");
        assert_eq!(u(&aabb, 5), "bbaa");
        assert!(matches!(
            unrank(&aabb, &BigUint::from(6u32), &abc),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn sixty_four_distinct_symbols_do_not_overflow() {
        let comp = Composition::from_counts(&[1; 64]);
        let size = class_size(&comp);
        assert_eq!(size.value(), &factorial(64));
        assert_eq!(size.value().bits(), 296);
    }

    fn check_all_blocks<I: ClassInt>(k: u32, n: usize) {
        let alphabet = Alphabet::letters(k as usize).unwrap();
        let mut ranker = Ranker::default();
        let mut seen = std::collections::HashMap::new();
        let total = (k as usize).pow(n as u32);
        for code in 0..total {
            let mut x = code;
            let block: Vec<Symbol> = (0..n)
                .map(|_| {
                    let s = Symbol((x % k as usize) as u32);
                    x /= k as usize;
                    s
                })
                .collect();
            let comp = Composition::of(&block, &alphabet).unwrap();
            let class = seen.entry(comp.clone()).or_insert_with(|| brute_class(&block));
            let (r, size) = ranker.rank::<I>(&block, &comp);
            assert_eq!(size.to_biguint(), BigUint::from(class.len()));
            let pos = class.binary_search(&block).unwrap();
            assert_eq!(r.to_biguint(), BigUint::from(pos));
            let mut out = Vec::new();
            ranker.unrank::<I>(&comp, r, size, &mut out);
            assert_eq!(out, block);
        }
    }

    #[test]
    fn exhaustive_round_trip_and_order() {
        for (k, n) in [(2, 8), (3, 6), (4, 5), (3, 1), (4, 4)] {
            check_all_blocks::<u64>(k, n);
        }
        check_all_blocks::<BigUint>(3, 5);
        check_all_blocks::<u128>(4, 4);
    }

    #[test]
    fn widths_agree_at_their_limits() {
        for n in [19usize, 20, 33, 34] {
            let comp = Composition::from_counts(&vec![1; n]);
            let big = class_size_as::<BigUint>(&comp);
            assert_eq!(big, factorial(n as u32));
            match Width::for_block_len(n) {
                Width::U64 => assert_eq!(class_size_as::<u64>(&comp).to_biguint(), big),
                Width::U128 => assert_eq!(class_size_as::<u128>(&comp).to_biguint(), big),
                Width::Big => {}
            }
            // last member of the class: descending order
            let block: Vec<Symbol> = (0..n as u32).rev().map(Symbol).collect();
            let (r, size) = Ranker::default().rank::<BigUint>(&block, &comp);
            assert_eq!(r + 1u32, size);
        }
    }

    #[test]
    fn log2_of_large_values() {
        assert_eq!(log2_biguint(&BigUint::from(8u32)), 3.0);
        let huge = BigUint::one() << 5000u32;
        assert!((log2_biguint(&huge) - 5000.0).abs() < 1e-9);
    }
}
