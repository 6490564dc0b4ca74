//! Logistic-map orbits: the keyed source of block orderings and keystreams.

use crate::error::{FlepError, Result};

/// Number of transient iterations discarded before any values are used.
pub const DEFAULT_BURN_IN: usize = 1000;

/// A finite stretch of a logistic-map orbit, all values in open (0, 1).
#[derive(Debug, Clone, PartialEq)]
pub struct ChaoticSequence {
    values: Vec<f64>,
    pub seed: f64,
    pub param: f64,
    pub burn_in: usize,
}

impl ChaoticSequence {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Iterates x_{k+1} = r * x_k * (1 - x_k), discards `burn_in` iterates, and
/// returns the next `n`. Rejects seeds outside (0,1) and degenerate orbits.
pub fn logistic_sequence(x0: f64, r: f64, burn_in: usize, n: usize) -> Result<ChaoticSequence> {
    if !(x0 > 0.0 && x0 < 1.0) {
        return Err(FlepError::Key(format!("seed {x0} outside open (0,1)")));
    }
    if !(r >= 3.9 && r < 4.0) {
        return Err(FlepError::Key(format!("parameter {r} outside [3.9, 4.0)")));
    }
    if n == 0 {
        return Err(FlepError::Key("sequence length must be at least 1".into()));
    }

    let mut x = x0;
    let step = |x: &mut f64| -> Result<()> {
        *x = r * *x * (1.0 - *x);
        if !(*x > 0.0 && *x < 1.0) {
            return Err(FlepError::Key(format!(
                "degenerate orbit: iterate reached {x}",
                x = *x
            )));
        }
        Ok(())
    };
    for _ in 0..burn_in {
        step(&mut x)?;
    }
    let mut values = Vec::with_capacity(n);
    for _ in 0..n {
        step(&mut x)?;
        values.push(x);
    }
    Ok(ChaoticSequence {
        values,
        seed: x0,
        param: r,
        burn_in,
    })
}

/// Extracts one byte per orbit value as floor(x * 2^53) mod 256, so the
/// full mantissa participates and nearby seeds diverge in byte space.
pub fn keystream_bytes(seq: &ChaoticSequence, n: usize) -> Result<Vec<u8>> {
    if seq.len() < n {
        return Err(FlepError::Key(format!(
            "sequence of length {} cannot supply {n} keystream bytes",
            seq.len()
        )));
    }
    Ok(seq.values()[..n].iter().map(|&x| value_to_byte(x)).collect())
}

/// floor(x * 2^53) mod 256 for x in [0, 1). The product is exact because
/// scaling by a power of two only shifts the exponent.
pub fn value_to_byte(x: f64) -> u8 {
    ((x * 9007199254740992.0) as u64 & 0xff) as u8
}
