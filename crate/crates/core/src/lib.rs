//! Rate-adaptive information reconciliation over a binary symmetric channel.
//!
//! Alice and Bob hold correlated strings `x` and `y`. Both extend their strings
//! with `s + p` random symbols placed by a shared permutation, Alice publishes
//! the syndrome of her extended string plus the `s` shortened values, and Bob
//! recovers Alice's extended string with a syndrome-aware belief-propagation
//! decoder. The [`security`] module accounts for what that public
//! conversation costs in min-entropy.

pub mod bits;
pub mod cascade;
pub mod channel;
pub mod decoder;
pub mod error;
pub mod ldpc;
pub mod prng;
pub mod rate_adapt;
pub mod security;

pub use bits::BitString;
pub use error::{Error, Result};
pub use ldpc::ParityCheckCode;
