//! Canonical bit-level encoding of messages.
//!
//! A message is a sequence of tagged integer fields. Each field costs
//! [`TAG_BITS`] plus its payload width: `ceil(log2(n + 1))` bits for node ids
//! and counters, `ceil(log2(dist_cap + 1))` bits for distances, where
//! `dist_cap` defaults to `n * max_weight`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, Length, NodeId};

pub const TAG_BITS: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Field {
    Id(NodeId),
    Dist(Length),
    Count(u64),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WireError {
    #[error("field {field:?} does not fit in {bits} bits")]
    Unencodable { field: Field, bits: u32 },
    #[error("field sequence does not decode to a message of this protocol")]
    Undecodable,
}

/// Number of bits needed to write every integer in `0..=max`.
pub fn bits_for(max: u64) -> u32 {
    if max == 0 {
        0
    } else {
        64 - max.leading_zeros()
    }
}

/// `ceil(log2 x)` for `x >= 1`.
pub fn ceil_log2(x: u64) -> u32 {
    if x <= 1 {
        0
    } else {
        64 - (x - 1).leading_zeros()
    }
}

/// Payload widths for one network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Encoding {
    pub n: usize,
    pub dist_cap: Length,
}

impl Encoding {
    pub fn new(n: usize, dist_cap: Length) -> Self {
        Self { n, dist_cap }
    }

    pub fn for_graph(g: &Graph) -> Self {
        Self::new(g.n(), g.n() as Length * g.max_weight())
    }

    pub fn id_bits(&self) -> u32 {
        bits_for(self.n as u64)
    }

    pub fn dist_bits(&self) -> u32 {
        bits_for(self.dist_cap)
    }

    pub fn field_bits(&self, field: Field) -> Result<u64, WireError> {
        let (value, cap, bits) = match field {
            Field::Id(id) => (id as u64, self.n as u64, self.id_bits()),
            Field::Count(c) => (c, (1u64 << self.id_bits()) - 1, self.id_bits()),
            Field::Dist(d) => (d, self.dist_cap, self.dist_bits()),
        };
        if value > cap {
            return Err(WireError::Unencodable { field, bits });
        }
        Ok(TAG_BITS + bits as u64)
    }

    pub fn message_bits(&self, fields: &[Field]) -> Result<u64, WireError> {
        fields
            .iter()
            .try_fold(0, |acc, &f| Ok(acc + self.field_bits(f)?))
    }
}

/// A protocol message with a self-describing field encoding.
///
/// The engine sends `encode()` over the wire and hands the receiver
/// `decode()` of those fields, so programs can only communicate what the
/// encoding carries.
pub trait WireMessage: Sized {
    fn encode(&self) -> Vec<Field>;
    fn decode(fields: &[Field]) -> Result<Self, WireError>;
}
