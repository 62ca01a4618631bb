//! Provably secure steganography for memoryless sources.
//!
//! A cover is a sequence of symbols drawn independently from a known law.
//! The embedders replace each block of cover symbols with another ordering
//! of the same multiset, chosen so that the output has exactly the law of
//! the cover while carrying hidden bits in the choice of ordering.
//!
//! Arithmetic is generic: probabilities implement [`Probability`] (`f64`,
//! `f32` or exact [`BigRational`]), class indices implement [`ClassInt`]
//! (`u64`, `u128` or [`BigUint`]).

pub mod alphabet;
pub mod analysis;
pub mod bits;
pub mod codec;
pub mod delta;
pub mod error;
pub mod permutation;
pub mod rng;
pub mod scalar;
pub mod sources;

pub use num_bigint::BigUint;
pub use num_rational::BigRational;

pub use alphabet::{Alphabet, Composition, Symbol};
pub use analysis::{AnalysisReport, BlockDistribution, DistributionReport, RateBound, RateReport};
pub use codec::{BlockTrace, DeltaChoice, EmbedResult, ExtractResult, Extractor, Scheme, Session, St2Embedder, StnEmbedder};
pub use delta::BinaryExpansion;
pub use error::{Error, Result};
pub use rng::{Seeds, StegoRng};
pub use scalar::{ClassInt, Probability};
pub use sources::{HiddenBits, LoadedModel, SourceModel};

/// Source model in exact rational arithmetic.
pub type ExactModel = SourceModel<BigRational>;
/// Source model in `f64`.
pub type FloatModel = SourceModel<f64>;
pub type ExactDistribution = BlockDistribution<BigRational>;
pub type FloatDistribution = BlockDistribution<f64>;
/// Binary expansion of an arbitrarily large class size.
pub type Expansion = BinaryExpansion<BigUint>;
