//! The two embed/extract state machines.
//!
//! [`St2Embedder`] works on pairs: a pair of equal letters passes through, a
//! pair of distinct letters `{a, b}` with `a < b` is rewritten as `ab` for a
//! hidden 0 and `ba` for a hidden 1.
//!
//! [`StnEmbedder`] works on blocks of `n` letters. Each block is replaced by a
//! member of its permutation class whose rank encodes a randomly sized run
//! of hidden bits (see [`crate::delta`]). Extraction needs only `n` and the
//! alphabet; the sender's randomness never has to be shared.
//!
//! When the hidden stream runs dry, fair padding bits from a separate random
//! source are used instead, so every block still carries uniform payload.
//! A trailing partial block (or odd symbol for pairs) passes through.

use num_bigint::BigUint;
use rand::{Rng, RngCore};
use serde::Serialize;

use crate::alphabet::{Alphabet, Composition, Symbol};
use crate::delta::BinaryExpansion;
use crate::error::{Error, Result};
use crate::permutation::{class_size_as, Ranker, Width};
use crate::scalar::ClassInt;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BlockTrace {
    #[serde(serialize_with = "ser_parts")]
    pub composition: Composition,
    #[serde(serialize_with = "ser_big")]
    pub class_size: BigUint,
    pub d: u32,
    #[serde(serialize_with = "ser_big")]
    pub r: BigUint,
    #[serde(serialize_with = "ser_big")]
    pub tau: BigUint,
    /// How many of the `d` payload bits came from the hidden stream.
    pub genuine_bits: u32,
    /// Set when `d` was imposed through [`DeltaChoice::Forced`].
    pub forced: bool,
}

fn ser_big<S: serde::Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

fn ser_parts<S: serde::Serializer>(c: &Composition, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(c.parts().len()))?;
    for &(sym, count) in c.parts() {
        seq.serialize_element(&(sym.0, count))?;
    }
    seq.end()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Pairs of symbols, one bit per pair of distinct letters.
    St2,
    /// Blocks of `n` symbols with randomized payload length.
    #[default]
    Stn,
}

impl Scheme {
    /// Block length the scheme actually uses for a configured `n`.
    pub fn block_len(self, n: usize) -> usize {
        match self {
            Scheme::St2 => 2,
            Scheme::Stn => n,
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "st2" => Ok(Scheme::St2),
            "stn" => Ok(Scheme::Stn),
            other => Err(Error::UnknownScheme(other.to_string())),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EmbedResult {
    pub scheme: Scheme,
    pub stego: Vec<Symbol>,
    /// 2 for the pair scheme.
    pub block_len: usize,
    pub bits_embedded: u64,
    pub padding_bits: u64,
    /// Padding bits in the order they were embedded; recorded with the trace.
    pub padding: Vec<bool>,
    /// One entry per complete block; empty when tracing is off.
    pub trace: Vec<BlockTrace>,
}

impl EmbedResult {
    pub fn total_bits(&self) -> u64 {
        self.bits_embedded + self.padding_bits
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BlockPayload {
    pub d: u32,
    #[serde(serialize_with = "ser_big")]
    pub r: BigUint,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExtractResult {
    pub bits: Vec<bool>,
    pub trace: Vec<BlockPayload>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DeltaChoice {
    #[default]
    Sample,
    /// Test hook: use this payload length in every block. Blocks whose class
    /// size lacks that bit fail with [`Error::InvalidDelta`].
    Forced(u32),
}

/// Hidden bits first, padding after exhaustion.
struct PayloadBits<H, R> {
    hidden: H,
    padding_rng: R,
    exhausted: bool,
    genuine: u64,
    padded: u64,
    padding_log: Option<Vec<bool>>,
}

impl<H: Iterator<Item = bool>, R: RngCore> PayloadBits<H, R> {
    fn new(hidden: H, padding_rng: R) -> Self {
        PayloadBits {
            hidden,
            padding_rng,
            exhausted: false,
            genuine: 0,
            padded: 0,
            padding_log: Some(Vec::new()),
        }
    }

    /// Returns the bit and whether it was genuine.
    #[inline]
    fn next_bit(&mut self) -> (bool, bool) {
        if !self.exhausted {
            if let Some(b) = self.hidden.next() {
                self.genuine += 1;
                return (b, true);
            }
            self.exhausted = true;
        }
        let b: bool = self.padding_rng.gen();
        self.padded += 1;
        if let Some(log) = &mut self.padding_log {
            log.push(b);
        }
        (b, false)
    }
}

/// Streaming embedder for the pair scheme.
pub struct St2Embedder<'a, H, R> {
    alphabet: &'a Alphabet,
    payload: PayloadBits<H, R>,
    trace: Option<Vec<BlockTrace>>,
}

impl<'a, H: Iterator<Item = bool>, R: RngCore> St2Embedder<'a, H, R> {
    pub fn new<I>(alphabet: &'a Alphabet, hidden: I, padding_rng: R) -> Result<Self>
    where
        I: IntoIterator<IntoIter = H>,
    {
        alphabet.check_codec_size()?;
        Ok(St2Embedder {
            alphabet,
            payload: PayloadBits::new(hidden.into_iter(), padding_rng),
            trace: Some(Vec::new()),
        })
    }

    /// Turns off the per-block trace and the padding log.
    pub fn without_trace(mut self) -> Self {
        self.trace = None;
        self.payload.padding_log = None;
        self
    }

    pub fn embed_pair(&mut self, x: Symbol, y: Symbol, out: &mut Vec<Symbol>) -> Result<()> {
        check_members(self.alphabet, &[x, y])?;
        if x == y {
            out.extend([x, y]);
            if let Some(t) = &mut self.trace {
                t.push(BlockTrace {
                    composition: Composition::of_trusted(&[x, y]),
                    class_size: BigUint::from(1u32),
                    d: 0,
                    r: BigUint::default(),
                    tau: BigUint::default(),
                    genuine_bits: 0,
                    forced: false,
                });
            }
            return Ok(());
        }
        let (lo, hi) = if x < y { (x, y) } else { (y, x) };
        let (bit, genuine) = self.payload.next_bit();
        if bit {
            out.extend([hi, lo]);
        } else {
            out.extend([lo, hi]);
        }
        if let Some(t) = &mut self.trace {
            t.push(BlockTrace {
                composition: Composition::of_trusted(&[x, y]),
                class_size: BigUint::from(2u32),
                d: 1,
                r: BigUint::from(bit as u32),
                tau: BigUint::from(bit as u32),
                genuine_bits: genuine as u32,
                forced: false,
            });
        }
        Ok(())
    }

    /// Embeds into `cover` pair by pair; an odd last symbol passes through.
    pub fn embed_stream(&mut self, cover: &[Symbol], out: &mut Vec<Symbol>) -> Result<()> {
        let mut pairs = cover.chunks_exact(2);
        for pair in &mut pairs {
            self.embed_pair(pair[0], pair[1], out)?;
        }
        check_members(self.alphabet, pairs.remainder())?;
        out.extend_from_slice(pairs.remainder());
        Ok(())
    }

    pub fn finish(self, stego: Vec<Symbol>) -> EmbedResult {
        EmbedResult {
            scheme: Scheme::St2,
            stego,
            block_len: 2,
            bits_embedded: self.payload.genuine,
            padding_bits: self.payload.padded,
            padding: self.payload.padding_log.unwrap_or_default(),
            trace: self.trace.unwrap_or_default(),
        }
    }
}

/// Streaming embedder for the block scheme.
pub struct StnEmbedder<'a, H, D, P> {
    alphabet: &'a Alphabet,
    n: usize,
    width: Width,
    delta_rng: D,
    choice: DeltaChoice,
    payload: PayloadBits<H, P>,
    trace: Option<Vec<BlockTrace>>,
    comp: Composition,
    scratch: Vec<Symbol>,
    ranker: Ranker,
}

impl<'a, H, D, P> StnEmbedder<'a, H, D, P>
where
    H: Iterator<Item = bool>,
    D: RngCore,
    P: RngCore,
{
    pub fn new<I>(alphabet: &'a Alphabet, n: usize, hidden: I, delta_rng: D, padding_rng: P) -> Result<Self>
    where
        I: IntoIterator<IntoIter = H>,
    {
        if n < 2 {
            return Err(Error::InvalidBlockLength(n));
        }
        alphabet.check_codec_size()?;
        Ok(StnEmbedder {
            alphabet,
            n,
            width: Width::for_block_len(n),
            delta_rng,
            choice: DeltaChoice::Sample,
            payload: PayloadBits::new(hidden.into_iter(), padding_rng),
            trace: Some(Vec::new()),
            comp: Composition::default(),
            scratch: Vec::with_capacity(n),
            ranker: Ranker::default(),
        })
    }

    pub fn with_delta(mut self, choice: DeltaChoice) -> Self {
        self.choice = choice;
        self
    }

    /// Turns off the per-block trace and the padding log.
    pub fn without_trace(mut self) -> Self {
        self.trace = None;
        self.payload.padding_log = None;
        self
    }

    pub fn block_len(&self) -> usize {
        self.n
    }

    /// Embeds one complete block of `n` symbols.
    pub fn embed_block(&mut self, block: &[Symbol], out: &mut Vec<Symbol>) -> Result<()> {
        if block.len() != self.n {
            return Err(Error::InvalidBlockLength(block.len()));
        }
        check_members(self.alphabet, block)?;
        match self.width {
            Width::U64 => self.embed_block_as::<u64>(block, out),
            Width::U128 => self.embed_block_as::<u128>(block, out),
            Width::Big => self.embed_block_as::<BigUint>(block, out),
        }
    }

    fn embed_block_as<I: ClassInt>(&mut self, block: &[Symbol], out: &mut Vec<Symbol>) -> Result<()> {
        self.comp.refill(block, &mut self.scratch);
        let size: I = class_size_as(&self.comp);
        let expansion = BinaryExpansion::new(size.clone())?;
        let d = match self.choice {
            DeltaChoice::Sample => expansion.sample_delta(&mut self.delta_rng),
            DeltaChoice::Forced(d) => {
                if !expansion.alpha(d) {
                    return Err(Error::InvalidDelta(d));
                }
                d
            }
        };
        let mut r = I::zero();
        let mut genuine_bits = 0;
        for _ in 0..d {
            let (bit, genuine) = self.payload.next_bit();
            genuine_bits += genuine as u32;
            r = r.push_bit(bit);
        }
        let tau = expansion.encode_index(d, r.clone())?;
        if let Some(t) = &mut self.trace {
            t.push(BlockTrace {
                composition: self.comp.clone(),
                class_size: size.to_biguint(),
                d,
                r: r.to_biguint(),
                tau: tau.to_biguint(),
                genuine_bits,
                forced: matches!(self.choice, DeltaChoice::Forced(_)),
            });
        }
        self.ranker.unrank(&self.comp, tau, size, out);
        Ok(())
    }

    /// Embeds into `cover` block by block; a short tail passes through.
    pub fn embed_stream(&mut self, cover: &[Symbol], out: &mut Vec<Symbol>) -> Result<()> {
        let mut blocks = cover.chunks_exact(self.n);
        for block in &mut blocks {
            self.embed_block(block, out)?;
        }
        check_members(self.alphabet, blocks.remainder())?;
        out.extend_from_slice(blocks.remainder());
        Ok(())
    }

    pub fn finish(self, stego: Vec<Symbol>) -> EmbedResult {
        EmbedResult {
            scheme: Scheme::Stn,
            stego,
            block_len: self.n,
            bits_embedded: self.payload.genuine,
            padding_bits: self.payload.padded,
            padding: self.payload.padding_log.unwrap_or_default(),
            trace: self.trace.unwrap_or_default(),
        }
    }
}

/// Streaming extractor for both schemes. The pair scheme is the block
/// scheme with `n = 2`: classes of size 2 carry exactly one bit and the
/// ascending member has rank 0.
pub struct Extractor<'a> {
    alphabet: &'a Alphabet,
    n: usize,
    width: Width,
    comp: Composition,
    scratch: Vec<Symbol>,
    ranker: Ranker,
    trace: Option<Vec<BlockPayload>>,
}

impl<'a> Extractor<'a> {
    pub fn new(alphabet: &'a Alphabet, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidBlockLength(n));
        }
        alphabet.check_codec_size()?;
        Ok(Extractor {
            alphabet,
            n,
            width: Width::for_block_len(n),
            comp: Composition::default(),
            scratch: Vec::with_capacity(n),
            ranker: Ranker::default(),
            trace: Some(Vec::new()),
        })
    }

    pub fn without_trace(mut self) -> Self {
        self.trace = None;
        self
    }

    pub fn extract_block(&mut self, block: &[Symbol], bits: &mut Vec<bool>) -> Result<()> {
        if block.len() != self.n {
            return Err(Error::InvalidBlockLength(block.len()));
        }
        check_members(self.alphabet, block)?;
        match self.width {
            Width::U64 => self.extract_block_as::<u64>(block, bits),
            Width::U128 => self.extract_block_as::<u128>(block, bits),
            Width::Big => self.extract_block_as::<BigUint>(block, bits),
        }
    }

    fn extract_block_as<I: ClassInt>(&mut self, block: &[Symbol], bits: &mut Vec<bool>) -> Result<()> {
        self.comp.refill(block, &mut self.scratch);
        let (tau, size) = self.ranker.rank::<I>(block, &self.comp);
        let (d, r) = BinaryExpansion::new(size)?.decode_index(&tau)?;
        bits.extend((0..d).rev().map(|i| r.test_bit(i)));
        if let Some(t) = &mut self.trace {
            t.push(BlockPayload { d, r: r.to_biguint() });
        }
        Ok(())
    }

    /// Extracts from every complete block; a short tail is checked and ignored.
    pub fn extract_stream(&mut self, stego: &[Symbol], bits: &mut Vec<bool>) -> Result<()> {
        let mut blocks = stego.chunks_exact(self.n);
        for block in &mut blocks {
            self.extract_block(block, bits)?;
        }
        check_members(self.alphabet, blocks.remainder())
    }

    pub fn finish(self, bits: Vec<bool>) -> ExtractResult {
        ExtractResult {
            bits,
            trace: self.trace.unwrap_or_default(),
        }
    }
}

/// Shared configuration of a sender/receiver pair.
#[derive(Clone, Copy, Debug)]
pub struct Session<'a> {
    pub alphabet: &'a Alphabet,
    pub scheme: Scheme,
    /// Ignored by [`Scheme::St2`].
    pub n: usize,
    pub delta: DeltaChoice,
    pub trace: bool,
}

impl<'a> Session<'a> {
    pub fn new(alphabet: &'a Alphabet, scheme: Scheme, n: usize) -> Self {
        Session {
            alphabet,
            scheme,
            n,
            delta: DeltaChoice::Sample,
            trace: true,
        }
    }

    pub fn block_len(&self) -> usize {
        self.scheme.block_len(self.n)
    }

    pub fn embed<H, D, P>(&self, cover: &[Symbol], hidden: H, delta_rng: D, padding_rng: P) -> Result<EmbedResult>
    where
        H: IntoIterator<Item = bool>,
        D: RngCore,
        P: RngCore,
    {
        let mut stego = Vec::with_capacity(cover.len());
        match self.scheme {
            Scheme::St2 => {
                if let DeltaChoice::Forced(d) = self.delta {
                    return Err(Error::InvalidDelta(d));
                }
                let mut e = St2Embedder::new(self.alphabet, hidden, padding_rng)?;
                if !self.trace {
                    e = e.without_trace();
                }
                e.embed_stream(cover, &mut stego)?;
                Ok(e.finish(stego))
            }
            Scheme::Stn => {
                let mut e = StnEmbedder::new(self.alphabet, self.n, hidden, delta_rng, padding_rng)?
                    .with_delta(self.delta);
                if !self.trace {
                    e = e.without_trace();
                }
                e.embed_stream(cover, &mut stego)?;
                Ok(e.finish(stego))
            }
        }
    }

    pub fn extract(&self, stego: &[Symbol]) -> Result<ExtractResult> {
        match self.scheme {
            Scheme::St2 => st2_extract(stego, self.alphabet),
            Scheme::Stn => {
                let mut x = Extractor::new(self.alphabet, self.n)?;
                if !self.trace {
                    x = x.without_trace();
                }
                let mut bits = Vec::new();
                x.extract_stream(stego, &mut bits)?;
                Ok(x.finish(bits))
            }
        }
    }
}

fn check_members(alphabet: &Alphabet, symbols: &[Symbol]) -> Result<()> {
    match symbols.iter().find(|s| !alphabet.contains(**s)) {
        Some(s) => Err(Error::UnknownSymbol(format!("#{}", s.0))),
        None => Ok(()),
    }
}

pub fn st2_embed<H, R>(cover: &[Symbol], hidden: H, alphabet: &Alphabet, padding_rng: R) -> Result<EmbedResult>
where
    H: IntoIterator<Item = bool>,
    R: RngCore,
{
    let mut embedder = St2Embedder::new(alphabet, hidden, padding_rng)?;
    let mut stego = Vec::with_capacity(cover.len());
    embedder.embed_stream(cover, &mut stego)?;
    Ok(embedder.finish(stego))
}

/// Pair-scheme extraction: `ab` with `a < b` reads 0, `ba` reads 1, equal pairs nothing.
pub fn st2_extract(stego: &[Symbol], alphabet: &Alphabet) -> Result<ExtractResult> {
    alphabet.check_codec_size()?;
    check_members(alphabet, stego)?;
    let mut result = ExtractResult::default();
    for pair in stego.chunks_exact(2) {
        if pair[0] != pair[1] {
            let bit = pair[0] > pair[1];
            result.bits.push(bit);
            result.trace.push(BlockPayload { d: 1, r: BigUint::from(bit as u32) });
        } else {
            result.trace.push(BlockPayload { d: 0, r: BigUint::default() });
        }
    }
    Ok(result)
}

pub fn stn_embed<H, D, P>(
    cover: &[Symbol],
    hidden: H,
    n: usize,
    alphabet: &Alphabet,
    delta_rng: D,
    padding_rng: P,
) -> Result<EmbedResult>
where
    H: IntoIterator<Item = bool>,
    D: RngCore,
    P: RngCore,
{
    let mut embedder = StnEmbedder::new(alphabet, n, hidden, delta_rng, padding_rng)?;
    let mut stego = Vec::with_capacity(cover.len());
    embedder.embed_stream(cover, &mut stego)?;
    Ok(embedder.finish(stego))
}

pub fn stn_extract(stego: &[Symbol], n: usize, alphabet: &Alphabet) -> Result<ExtractResult> {
    let mut extractor = Extractor::new(alphabet, n)?;
    let mut bits = Vec::new();
    extractor.extract_stream(stego, &mut bits)?;
    Ok(extractor.finish(bits))
}
