//! Streaming summary of an SGD run: running average, per-block sums, and
//! trajectory checkpoints, in `O(blocks * dim)` memory.

use crate::error::{Error, Result};

/// What a run should record: the bootstrap block length and (optionally)
/// iteration indices at which to snapshot the running average.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceSpec {
    block_length: usize,
    checkpoints: Vec<u64>,
}

impl TraceSpec {
    pub fn blocks(block_length: usize) -> Self {
        Self { block_length, checkpoints: Vec::new() }
    }

    pub fn with_checkpoints(mut self, mut checkpoints: Vec<u64>) -> Self {
        checkpoints.sort_unstable();
        checkpoints.dedup();
        self.checkpoints = checkpoints;
        self
    }

    pub fn block_length(&self) -> usize {
        self.block_length
    }

    pub fn checkpoints(&self) -> &[u64] {
        &self.checkpoints
    }
}

/// Accumulates iterates pushed one at a time.
///
/// For a run of expected length `n` with block length `l`, the first
/// `floor(n/l) * l` iterates are summed into `floor(n/l)` consecutive
/// blocks; any trailing iterates still enter the running average (and a
/// separate tail sum) but belong to no block. The running average follows
/// the online update `mean <- ((i-1)/i) * mean + (1/i) * theta_i`.
#[derive(Debug, Clone)]
pub struct IterateTrace {
    dim: usize,
    expected_len: u64,
    block_length: usize,
    num_blocks: usize,
    block_sums: Vec<f64>,
    tail_sum: Vec<f64>,
    running_mean: Vec<f64>,
    len: u64,
    checkpoint_schedule: Vec<u64>,
    next_checkpoint: usize,
    checkpoints: Vec<(u64, Vec<f64>)>,
}

impl IterateTrace {
    pub fn new(dim: usize, expected_len: u64, spec: &TraceSpec) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("trace dimension must be at least 1".into()));
        }
        if expected_len == 0 {
            return Err(Error::InvalidParameter("trace expects at least one iterate".into()));
        }
        let l = spec.block_length();
        if l == 0 || l as u64 > expected_len {
            return Err(Error::InvalidParameter(format!(
                "block length {l} must lie in [1, n={expected_len}]"
            )));
        }
        if let Some(&last) = spec.checkpoints().last() {
            if last > expected_len {
                return Err(Error::InvalidParameter(format!(
                    "checkpoint {last} is beyond the run length {expected_len}"
                )));
            }
        }
        if spec.checkpoints().first() == Some(&0) {
            return Err(Error::InvalidParameter("checkpoint indices are 1-based".into()));
        }
        let num_blocks = (expected_len / l as u64) as usize;
        Ok(Self {
            dim,
            expected_len,
            block_length: l,
            num_blocks,
            block_sums: vec![0.0; num_blocks * dim],
            tail_sum: vec![0.0; dim],
            running_mean: vec![0.0; dim],
            len: 0,
            checkpoint_schedule: spec.checkpoints().to_vec(),
            next_checkpoint: 0,
            checkpoints: Vec::new(),
        })
    }

    pub fn push(&mut self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "iterate has dim {}, trace has dim {}",
                theta.len(),
                self.dim
            )));
        }
        if self.len == self.expected_len {
            return Err(Error::InvalidParameter(format!(
                "trace already holds all {} iterates",
                self.expected_len
            )));
        }
        let i = self.len + 1;
        // The ((i-1)/i)·mean + value/i update written in delta form, which
        // keeps a constant sequence's mean bit-exact.
        let new_weight = 1.0 / i as f64;
        for (mean, &value) in self.running_mean.iter_mut().zip(theta) {
            *mean += new_weight * (value - *mean);
        }
        let blocked = self.num_blocks as u64 * self.block_length as u64;
        if i <= blocked {
            let block = ((i - 1) / self.block_length as u64) as usize;
            let sum = &mut self.block_sums[block * self.dim..(block + 1) * self.dim];
            for (acc, &value) in sum.iter_mut().zip(theta) {
                *acc += value;
            }
        } else {
            for (acc, &value) in self.tail_sum.iter_mut().zip(theta) {
                *acc += value;
            }
        }
        self.len = i;
        if self.checkpoint_schedule.get(self.next_checkpoint) == Some(&i) {
            self.checkpoints.push((i, self.running_mean.clone()));
            self.next_checkpoint += 1;
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Iterates pushed so far.
    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn expected_len(&self) -> u64 {
        self.expected_len
    }

    /// True once all `expected_len` iterates have arrived.
    pub fn is_complete(&self) -> bool {
        self.len == self.expected_len
    }

    pub fn block_length(&self) -> usize {
        self.block_length
    }

    pub fn num_blocks(&self) -> usize {
        self.num_blocks
    }

    pub fn running_mean(&self) -> &[f64] {
        &self.running_mean
    }

    pub fn block_sum(&self, block: usize) -> &[f64] {
        &self.block_sums[block * self.dim..(block + 1) * self.dim]
    }

    /// Sum of the trailing iterates beyond the last full block.
    pub fn tail_sum(&self) -> &[f64] {
        &self.tail_sum
    }

    /// Snapshots `(iteration, running mean)` taken at the scheduled indices.
    pub fn checkpoints(&self) -> &[(u64, Vec<f64>)] {
        &self.checkpoints
    }
}

/// Geometrically spaced checkpoint indices: 10, then successive factors of
/// 1.1 (deduplicated), always ending at `n`.
pub fn geometric_checkpoints(n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut x = 10f64;
    while (x as u64) < n {
        out.push(x as u64);
        x *= 1.1;
    }
    out.dedup();
    out.push(n);
    out
}
