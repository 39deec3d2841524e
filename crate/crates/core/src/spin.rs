//! Spin configurations over {+1, -1} and their bitstring indices.
//!
//! Index encoding: bit k of the index is 0 when spin k is +1 and 1 when spin
//! k is -1, so the all-plus configuration is index 0.

use crate::error::{Error, Result};

/// Exact enumeration bound on the number of visible units.
pub const MAX_UNITS: usize = 24;

/// Spin value of unit `k` inside an encoded configuration index.
#[inline]
pub fn spin_at(index: usize, k: usize) -> f64 {
    if index >> k & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// One configuration of N spins, carried both as an index and a length.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpinConfig {
    index: usize,
    n: usize,
}

impl SpinConfig {
    /// Decode an index into a configuration of `n` spins.
    pub fn from_index(index: usize, n: usize) -> Result<Self> {
        check_len(n)?;
        if index >= 1 << n {
            return Err(Error::IndexOutOfRange {
                what: "spin configuration",
                index,
                size: 1 << n,
            });
        }
        Ok(SpinConfig { index, n })
    }

    /// Encode a slice of +1/-1 spins.
    pub fn from_spins(spins: &[i8]) -> Result<Self> {
        let index = encode_config(spins)?;
        Ok(SpinConfig {
            index,
            n: spins.len(),
        })
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Spin value of unit `k` as +1.0 or -1.0.
    #[inline]
    pub fn spin(&self, k: usize) -> f64 {
        debug_assert!(k < self.n);
        spin_at(self.index, k)
    }

    pub fn spins(&self) -> Vec<i8> {
        (0..self.n)
            .map(|k| if self.index >> k & 1 == 0 { 1 } else { -1 })
            .collect()
    }
}

/// Map a +1/-1 spin sequence to its configuration index.
pub fn encode_config(spins: &[i8]) -> Result<usize> {
    check_len(spins.len())?;
    let mut index = 0usize;
    for (position, &s) in spins.iter().enumerate() {
        match s {
            1 => {}
            -1 => index |= 1 << position,
            value => return Err(Error::InvalidSpin { position, value }),
        }
    }
    Ok(index)
}

fn check_len(n: usize) -> Result<()> {
    if n == 0 || n > MAX_UNITS {
        return Err(Error::LengthOutOfRange {
            len: n,
            max: MAX_UNITS,
        });
    }
    Ok(())
}
