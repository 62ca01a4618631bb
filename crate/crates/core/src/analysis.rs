//! Checks on the stegosystems: exact output law on small instances,
//! black-box goodness-of-fit, and hiding-rate measurement against the
//! entropy-based lower bound.

use std::collections::HashMap;

use num_bigint::BigUint;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::alphabet::{Composition, Symbol};
use crate::codec::{EmbedResult, Scheme, Session};
use crate::delta::BinaryExpansion;
use crate::error::{Error, Result};
use crate::permutation::{class_size, class_size_as, Ranker};
use crate::rng::Seeds;
use crate::scalar::Probability;
use crate::sources::{HiddenBits, SourceModel};

/// Largest outcome space `|A|^n` the exact and empirical modes will index.
pub const MAX_OUTCOMES: u64 = 1_000_000;

/// Compositions enumerated before the rate bound falls back to Monte-Carlo.
pub const MAX_BOUND_COMPOSITIONS: u64 = 200_000;

/// A law on `A^n`, indexed by reading a block as a base-`|A|` number with
/// the first symbol most significant.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockDistribution<P> {
    alphabet_len: usize,
    n: usize,
    probs: Vec<P>,
}

impl<P: Probability> BlockDistribution<P> {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn probs(&self) -> &[P] {
        &self.probs
    }

    pub fn get(&self, block: &[Symbol]) -> &P {
        &self.probs[block_index(block, self.alphabet_len)]
    }

    pub fn total(&self) -> P {
        self.probs.iter().fold(P::zero(), |acc, p| acc + p.clone())
    }

    /// `max_v |self(v) - other(v)|`.
    pub fn max_abs_deviation(&self, other: &Self) -> P {
        assert_eq!(self.probs.len(), other.probs.len());
        self.probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a.clone() - b.clone()).abs())
            .fold(P::zero(), |m, d| if d > m { d } else { m })
    }
}

pub fn block_index(block: &[Symbol], alphabet_len: usize) -> usize {
    block.iter().fold(0, |acc, s| acc * alphabet_len + s.index())
}

pub fn block_at(mut index: usize, alphabet_len: usize, n: usize) -> Vec<Symbol> {
    let mut block = vec![Symbol(0); n];
    for slot in block.iter_mut().rev() {
        *slot = Symbol((index % alphabet_len) as u32);
        index /= alphabet_len;
    }
    block
}

fn outcome_count(alphabet_len: usize, n: usize) -> Result<usize> {
    let size = BigUint::from(alphabet_len).pow(n as u32);
    if size > BigUint::from(MAX_OUTCOMES) {
        return Err(Error::SpaceTooLarge {
            size: size.to_string(),
            limit: MAX_OUTCOMES,
        });
    }
    Ok(usize::try_from(&size).expect("bounded by MAX_OUTCOMES"))
}

/// `mu^n`, the law of `n` untouched cover symbols.
pub fn product_distribution<P: Probability>(model: &SourceModel<P>, n: usize) -> Result<BlockDistribution<P>> {
    let k = model.alphabet().len();
    let cells = outcome_count(k, n)?;
    let probs = (0..cells)
        .map(|i| model.block_probability(&block_at(i, k, n)))
        .collect();
    Ok(BlockDistribution { alphabet_len: k, n, probs })
}

/// Law of one output block of the block scheme, by brute force: every cover
/// block `u`, every payload length `d` with its probability, and every one of
/// the `2^d` equally likely payloads is pushed through the encoder.
pub fn exact_output_distribution<P: Probability>(
    model: &SourceModel<P>,
    n: usize,
) -> Result<BlockDistribution<P>> {
    if n < 2 {
        return Err(Error::InvalidBlockLength(n));
    }
    let k = model.alphabet().len();
    let cells = outcome_count(k, n)?;
    let mut out = vec![P::zero(); cells];
    let mut transfers: HashMap<Composition, Vec<(usize, P)>> = HashMap::new();
    let mut ranker = Ranker::default();

    for u_index in 0..cells {
        let u = block_at(u_index, k, n);
        let weight = model.block_probability(&u);
        let comp = Composition::of_trusted(&u);
        let transfer = transfers
            .entry(comp)
            .or_insert_with_key(|comp| block_transfer(comp, k, &mut ranker));
        for (v_index, t) in transfer.iter() {
            out[*v_index] = out[*v_index].clone() + weight.clone() * t.clone();
        }
    }
    Ok(BlockDistribution { alphabet_len: k, n, probs: out })
}

/// For one class: the probability of each output block given the cover
/// block is in that class.
fn block_transfer<P: Probability>(comp: &Composition, k: usize, ranker: &mut Ranker) -> Vec<(usize, P)> {
    let size: u64 = class_size_as(comp);
    let expansion = BinaryExpansion::new(size).expect("class sizes are positive");
    let mut by_tau = vec![P::zero(); size as usize];
    for (d, p_delta) in expansion.delta_probabilities::<P>() {
        if p_delta.is_zero() {
            continue;
        }
        let per_payload = p_delta * P::half_pow(d);
        for r in 0..1u64 << d {
            let tau = expansion.encode_index(d, r).expect("d is a set bit");
            by_tau[tau as usize] = by_tau[tau as usize].clone() + per_payload.clone();
        }
    }
    let mut v = Vec::with_capacity(comp.len());
    by_tau
        .into_iter()
        .enumerate()
        .map(|(tau, p)| {
            v.clear();
            ranker.unrank(comp, tau as u64, size, &mut v);
            (block_index(&v, k), p)
        })
        .collect()
}

/// Law of one output pair of the pair scheme, straight from its rule.
pub fn exact_st2_output_distribution<P: Probability>(model: &SourceModel<P>) -> Result<BlockDistribution<P>> {
    let k = model.alphabet().len();
    let cells = outcome_count(k, 2)?;
    let mut out = vec![P::zero(); cells];
    let half = P::half_pow(1);
    for x in model.alphabet().symbols() {
        for y in model.alphabet().symbols() {
            let w = model.prob(x).clone() * model.prob(y).clone();
            if x == y {
                let i = block_index(&[x, y], k);
                out[i] = out[i].clone() + w;
                continue;
            }
            let (lo, hi) = if x < y { (x, y) } else { (y, x) };
            for emitted in [[lo, hi], [hi, lo]] {
                let i = block_index(&emitted, k);
                out[i] = out[i].clone() + w.clone() * half.clone();
            }
        }
    }
    Ok(BlockDistribution { alphabet_len: k, n: 2, probs: out })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Empirical,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub p_value: f64,
    pub degrees_of_freedom: usize,
    /// Cells remaining after pooling.
    pub cells: usize,
}

/// Pearson goodness-of-fit with upper-tail p-value.
///
/// Cells whose expected count is below 5 are pooled into one cell. If the
/// pooled cell is itself below 5 it is merged into the smallest regular cell.
pub fn chi_square_gof(observed: &[u64], expected: &[f64]) -> Result<ChiSquare> {
    assert_eq!(observed.len(), expected.len(), "one expectation per cell");
    let total: u64 = observed.iter().sum();
    let mass: f64 = expected.iter().sum();
    if total == 0 || mass.is_nan() || mass <= 0.0 {
        return Err(Error::DegenerateCells);
    }
    let scale = total as f64 / mass;

    let mut cells: Vec<(f64, f64)> = Vec::new();
    let mut pooled = (0.0, 0.0);
    for (&o, &e) in observed.iter().zip(expected) {
        let e = e * scale;
        if e >= 5.0 {
            cells.push((o as f64, e));
        } else {
            pooled.0 += o as f64;
            pooled.1 += e;
        }
    }
    if pooled.1 > 0.0 || pooled.0 > 0.0 {
        if pooled.1 >= 5.0 || cells.is_empty() {
            cells.push(pooled);
        } else {
            let smallest = cells
                .iter_mut()
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("nonempty");
            smallest.0 += pooled.0;
            smallest.1 += pooled.1;
        }
    }
    if cells.len() < 2 {
        return Err(Error::DegenerateCells);
    }

    let statistic: f64 = cells.iter().map(|&(o, e)| (o - e) * (o - e) / e).sum();
    let dof = cells.len() - 1;
    let p_value = ChiSquared::new(dof as f64)
        .expect("positive degrees of freedom")
        .sf(statistic);
    Ok(ChiSquare {
        statistic,
        p_value,
        degrees_of_freedom: dof,
        cells: cells.len(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistributionReport {
    pub mode: Mode,
    pub scheme: Scheme,
    pub n: usize,
    pub model_digest: String,
    /// `rational`, `f64` or `f32`.
    pub arithmetic: &'static str,
    pub seeds: Option<Seeds>,
    /// Blocks drawn (empirical) or cover blocks enumerated (exact).
    pub sample_size: u64,
    pub cells: usize,
    pub max_abs_deviation: f64,
    /// Deviation is exactly zero; meaningful in rational arithmetic.
    pub exact_match: bool,
    pub total_probability: f64,
    pub chi_square: Option<ChiSquare>,
}

fn arithmetic_name<P: Probability>() -> &'static str {
    if P::EXACT {
        "rational"
    } else if std::mem::size_of::<P>() == 4 {
        "f32"
    } else {
        "f64"
    }
}

/// Compares the exact output law with `mu^n`.
pub fn exact_report<P: Probability>(model: &SourceModel<P>, scheme: Scheme, n: usize) -> Result<DistributionReport> {
    let n = scheme.block_len(n);
    let output = match scheme {
        Scheme::St2 => exact_st2_output_distribution(model)?,
        Scheme::Stn => exact_output_distribution(model, n)?,
    };
    let reference = product_distribution(model, n)?;
    let deviation = output.max_abs_deviation(&reference);
    Ok(DistributionReport {
        mode: Mode::Exact,
        scheme,
        n,
        model_digest: model.digest(),
        arithmetic: arithmetic_name::<P>(),
        seeds: None,
        sample_size: output.probs.len() as u64,
        cells: output.probs.len(),
        max_abs_deviation: deviation.as_f64(),
        exact_match: deviation.is_zero(),
        total_probability: output.total().as_f64(),
        chi_square: None,
    })
}

/// Embeds random bits into `blocks` simulated cover blocks and tests the
/// output blocks against `mu^n`.
pub fn empirical_report<P: Probability>(
    model: &SourceModel<P>,
    scheme: Scheme,
    n: usize,
    blocks: u64,
    seeds: Seeds,
) -> Result<DistributionReport> {
    empirical_grouped(model, scheme, n, 1, blocks, seeds)
}

/// Like [`empirical_report`], but each cell is a pair of consecutive output
/// blocks, tested against `mu^(2n)`. Detects dependence between blocks.
pub fn empirical_pair_report<P: Probability>(
    model: &SourceModel<P>,
    scheme: Scheme,
    n: usize,
    pairs: u64,
    seeds: Seeds,
) -> Result<DistributionReport> {
    empirical_grouped(model, scheme, n, 2, pairs, seeds)
}

fn empirical_grouped<P: Probability>(
    model: &SourceModel<P>,
    scheme: Scheme,
    n: usize,
    group: usize,
    samples: u64,
    seeds: Seeds,
) -> Result<DistributionReport> {
    let block_len = scheme.block_len(n);
    let cell_len = block_len * group;
    let k = model.alphabet().len();
    let cells = outcome_count(k, cell_len)?;
    if samples == 0 {
        return Err(Error::EmptyTrace);
    }

    let cover = model.draw_cover(samples as usize * cell_len, &mut seeds.cover_rng());
    let mut session = Session::new(model.alphabet(), scheme, n);
    session.trace = false;
    let result = session.embed(
        &cover,
        HiddenBits(seeds.hidden_rng()),
        seeds.delta_rng(),
        seeds.padding_rng(),
    )?;

    let mut counts = vec![0u64; cells];
    for cell in result.stego.chunks_exact(cell_len) {
        counts[block_index(cell, k)] += 1;
    }
    let reference = product_distribution(&model.to_f64_model(), cell_len)?;
    let chi = chi_square_gof(&counts, reference.probs())?;
    let deviation = counts
        .iter()
        .zip(reference.probs())
        .map(|(&c, p)| (c as f64 / samples as f64 - p).abs())
        .fold(0.0, f64::max);

    Ok(DistributionReport {
        mode: Mode::Empirical,
        scheme,
        n: cell_len,
        model_digest: model.digest(),
        arithmetic: "f64",
        seeds: Some(seeds),
        sample_size: samples,
        cells,
        max_abs_deviation: deviation,
        exact_match: false,
        total_probability: counts.iter().sum::<u64>() as f64 / samples as f64,
        chi_square: Some(chi),
    })
}

/// `h(mu) = -sum mu(a) log2 mu(a)`.
pub fn shannon_entropy<P: Probability>(model: &SourceModel<P>) -> f64 {
    model
        .probs()
        .iter()
        .map(|p| {
            let p = p.as_f64();
            -p * p.log2()
        })
        .sum()
}

/// `H_inf(mu) = min_a -log2 mu(a)`.
pub fn min_entropy<P: Probability>(model: &SourceModel<P>) -> f64 {
    let max = model.probs().iter().map(P::as_f64).fold(0.0, f64::max);
    -max.log2()
}

/// Hidden bits per cover symbol of the pair scheme: `(1 - sum mu(a)^2) / 2`.
pub fn st2_rate<P: Probability>(model: &SourceModel<P>) -> P {
    let collide = model.probs().iter().fold(P::zero(), |acc, p| acc + p.powi(2));
    (P::one() - collide) * P::half_pow(1)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundMethod {
    /// Exact expectation over all compositions.
    Exact { compositions: u64 },
    MonteCarlo { samples: u64, seed: u64 },
}

/// `(E_mu[log2 |S_u|] - 2) / n`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateBound {
    pub value: f64,
    /// Zero for the exact method.
    pub std_error: f64,
    pub method: BoundMethod,
}

fn composition_count(k: usize, n: usize) -> BigUint {
    // C(n + k - 1, k - 1)
    let top = n + k - 1;
    let choose = k - 1;
    (0..choose).fold(BigUint::from(1u32), |acc, i| acc * (top - i) / (i + 1))
}

/// Lower bound on the block scheme's hiding rate. Exact when the number of
/// compositions is at most [`MAX_BOUND_COMPOSITIONS`]; otherwise estimated
/// from `samples` random blocks drawn with `seeds.bound_rng()`.
pub fn rate_lower_bound<P: Probability>(
    model: &SourceModel<P>,
    n: usize,
    samples: u64,
    seeds: Seeds,
) -> Result<RateBound> {
    if n < 2 {
        return Err(Error::InvalidBlockLength(n));
    }
    let k = model.alphabet().len();
    let count = composition_count(k, n);
    if count <= BigUint::from(MAX_BOUND_COMPOSITIONS) {
        let log_p: Vec<f64> = model.probs().iter().map(|p| p.as_f64().log2()).collect();
        let mut counts = vec![0u32; k];
        let mut expectation = 0.0;
        visit_compositions(&mut counts, 0, n as u32, &mut |counts| {
            let size = class_size(&Composition::from_counts(counts)).log2();
            let log_prob: f64 = size
                + counts
                    .iter()
                    .zip(&log_p)
                    .filter(|(&c, _)| c > 0)
                    .map(|(&c, lp)| c as f64 * lp)
                    .sum::<f64>();
            expectation += log_prob.exp2() * size;
        });
        return Ok(RateBound {
            value: (expectation - 2.0) / n as f64,
            std_error: 0.0,
            method: BoundMethod::Exact {
                compositions: u64::try_from(&count).expect("bounded"),
            },
        });
    }

    if samples < 2 {
        return Err(Error::EmptyTrace);
    }
    let mut rng = seeds.bound_rng();
    let mut block = Vec::with_capacity(n);
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..samples {
        block.clear();
        block.extend((0..n).map(|_| model.sample(&mut rng)));
        let l = class_size(&Composition::of_trusted(&block)).log2();
        sum += l;
        sum_sq += l * l;
    }
    let m = samples as f64;
    let mean = sum / m;
    let var = ((sum_sq - m * mean * mean) / (m - 1.0)).max(0.0);
    Ok(RateBound {
        value: (mean - 2.0) / n as f64,
        std_error: (var / m).sqrt() / n as f64,
        method: BoundMethod::MonteCarlo {
            samples,
            seed: seeds.source,
        },
    })
}

fn visit_compositions(counts: &mut [u32], at: usize, left: u32, f: &mut impl FnMut(&[u32])) {
    if at + 1 == counts.len() {
        counts[at] = left;
        f(counts);
        return;
    }
    for c in 0..=left {
        counts[at] = c;
        visit_compositions(counts, at + 1, left - c, f);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateReport {
    pub scheme: Scheme,
    pub n: usize,
    pub cover_symbols: u64,
    pub blocks_measured: u64,
    pub bits_embedded: u64,
    pub padding_bits: u64,
    /// Genuine hidden bits per cover symbol.
    pub empirical_rate: f64,
    pub std_error: f64,
    /// `max log2 |S_u| / n` over the observed blocks.
    pub ceiling: f64,
    pub bound: Option<RateBound>,
    /// Closed-form rate of the pair scheme, when that scheme was run.
    pub st2_formula: Option<f64>,
    pub entropy: f64,
    pub min_entropy: f64,
    pub seeds: Option<Seeds>,
}

/// Rate statistics from a traced embedding run.
pub fn empirical_rate<P: Probability>(
    result: &EmbedResult,
    model: &SourceModel<P>,
    bound: Option<RateBound>,
) -> Result<RateReport> {
    if result.trace.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let n = result.block_len;
    let cover_symbols = result.stego.len() as u64;
    let blocks = result.trace.len() as f64;
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    let mut ceiling = 0.0f64;
    for t in &result.trace {
        let b = t.genuine_bits as f64;
        sum += b;
        sum_sq += b * b;
        ceiling = ceiling.max(crate::permutation::log2_biguint(&t.class_size) / n as f64);
    }
    let mean = sum / blocks;
    let var = if blocks > 1.0 {
        ((sum_sq - blocks * mean * mean) / (blocks - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(RateReport {
        scheme: result.scheme,
        n,
        cover_symbols,
        blocks_measured: result.trace.len() as u64,
        bits_embedded: result.bits_embedded,
        padding_bits: result.padding_bits,
        empirical_rate: result.bits_embedded as f64 / cover_symbols as f64,
        std_error: (var * blocks).sqrt() / cover_symbols as f64,
        ceiling,
        bound,
        st2_formula: (result.scheme == Scheme::St2).then(|| st2_rate(model).as_f64()),
        entropy: shannon_entropy(model),
        min_entropy: min_entropy(model),
        seeds: None,
    })
}

/// Simulates `cover_symbols` of cover, embeds an endless hidden stream, and
/// reports the achieved rate. `bound_samples` controls the Monte-Carlo
/// fallback of [`rate_lower_bound`]; `None` skips the bound.
pub fn measure_rate<P: Probability>(
    model: &SourceModel<P>,
    scheme: Scheme,
    n: usize,
    cover_symbols: usize,
    seeds: Seeds,
    bound_samples: Option<u64>,
) -> Result<RateReport> {
    let cover = model.draw_cover(cover_symbols, &mut seeds.cover_rng());
    let session = Session::new(model.alphabet(), scheme, n);
    let result = session.embed(
        &cover,
        HiddenBits(seeds.hidden_rng()),
        seeds.delta_rng(),
        seeds.padding_rng(),
    )?;
    let bound = match (scheme, bound_samples) {
        (Scheme::Stn, Some(samples)) => Some(rate_lower_bound(model, n, samples, seeds)?),
        _ => None,
    };
    let mut report = empirical_rate(&result, model, bound)?;
    report.seeds = Some(seeds);
    Ok(report)
}

/// [`measure_rate`] for each block length, block scheme.
pub fn rate_sweep<P: Probability>(
    model: &SourceModel<P>,
    block_lens: &[usize],
    cover_symbols: usize,
    seeds: Seeds,
    bound_samples: Option<u64>,
) -> Result<Vec<RateReport>> {
    block_lens
        .iter()
        .map(|&n| measure_rate(model, Scheme::Stn, n, cover_symbols, seeds, bound_samples))
        .collect()
}

/// Everything one analysis run produces, in a single machine-readable document.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub distribution: Option<DistributionReport>,
    pub rates: Vec<RateReport>,
}

impl AnalysisReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is serializable")
    }
}
