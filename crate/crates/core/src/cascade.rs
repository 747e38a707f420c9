//! Cascade, the interactive parity-bisection baseline.
//!
//! Canonical parameters: four passes, first block size `ceil(0.73 / p_est)`,
//! doubling every pass. Pass 1 uses the strings in order; later passes use a
//! seeded Fisher–Yates permutation. Leakage counts every parity Alice discloses.

use std::collections::BTreeSet;

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::prng::{mix, Stream};

pub const DEFAULT_PASSES: usize = 4;

pub fn initial_block_size(p_est: f64) -> Result<usize> {
    if !(p_est > 0.0 && p_est < 0.5) {
        return Err(Error::Domain(format!("p_est = {p_est} outside (0, 0.5)")));
    }
    Ok((0.73 / p_est).ceil() as usize)
}

/// A parity Alice sent: the bits at positions `start..end` of pass `pass`'s ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Disclosure {
    pub pass: usize,
    pub start: usize,
    pub end: usize,
    pub parity: bool,
}

#[derive(Debug, Clone)]
pub struct CascadeSession<'a> {
    alice: &'a BitString,
    bob: BitString,
    block_sizes: Vec<usize>,
    // order[j][t] is the string index at position t of pass j
    order: Vec<Vec<usize>>,
    position: Vec<Vec<usize>>,
    top_parity: Vec<Vec<bool>>,
    log: Vec<Disclosure>,
    seed: u64,
}

impl<'a> CascadeSession<'a> {
    pub fn new(
        x: &'a BitString,
        y: &BitString,
        initial_block: usize,
        passes: usize,
        seed: u64,
    ) -> Result<Self> {
        y.check_len(x.len())?;
        if initial_block == 0 || passes == 0 {
            return Err(Error::Domain(
                "block size and pass count must be positive".into(),
            ));
        }
        let block_sizes = (0..passes)
            .map(|i| initial_block.saturating_mul(1 << i).min(x.len().max(1)))
            .collect();
        Ok(Self {
            alice: x,
            bob: y.clone(),
            block_sizes,
            order: Vec::new(),
            position: Vec::new(),
            top_parity: Vec::new(),
            log: Vec::new(),
            seed,
        })
    }

    pub fn pass_count(&self) -> usize {
        self.block_sizes.len()
    }

    pub fn block_sizes(&self) -> &[usize] {
        &self.block_sizes
    }

    pub fn disclosed_parity_count(&self) -> usize {
        self.log.len()
    }

    pub fn disclosures(&self) -> &[Disclosure] {
        &self.log
    }

    /// Bob's current string.
    pub fn corrected(&self) -> &BitString {
        &self.bob
    }

    /// Ordering used by a completed or running pass.
    pub fn pass_order(&self, pass: usize) -> &[usize] {
        &self.order[pass]
    }

    fn parity_of(bits: &BitString, order: &[usize]) -> bool {
        order.iter().fold(false, |acc, &i| acc ^ bits.get(i))
    }

    fn alice_discloses(&mut self, pass: usize, start: usize, end: usize) -> bool {
        let parity = Self::parity_of(self.alice, &self.order[pass][start..end]);
        self.log.push(Disclosure {
            pass,
            start,
            end,
            parity,
        });
        parity
    }

    fn bob_parity(&self, pass: usize, start: usize, end: usize) -> bool {
        Self::parity_of(&self.bob, &self.order[pass][start..end])
    }

    fn block_range(&self, pass: usize, block: usize) -> (usize, usize) {
        let size = self.block_sizes[pass];
        let start = block * size;
        (start, (start + size).min(self.bob.len()))
    }

    /// BINARY: bisect a block with mismatched parity down to one bit and flip it.
    fn binary(&mut self, pass: usize, mut start: usize, mut end: usize) -> usize {
        while end - start > 1 {
            let mid = start + (end - start).div_ceil(2);
            if self.alice_discloses(pass, start, mid) != self.bob_parity(pass, start, mid) {
                end = mid;
            } else {
                start = mid;
            }
        }
        let index = self.order[pass][start];
        self.bob.flip(index);
        index
    }

    fn begin_pass(&mut self, pass: usize) {
        let len = self.bob.len();
        let order = if pass == 0 {
            (0..len).collect()
        } else {
            Stream::new(mix(self.seed, pass as u64)).permutation(len)
        };
        let mut position = vec![0; len];
        for (t, &i) in order.iter().enumerate() {
            position[i] = t;
        }
        self.order.push(order);
        self.position.push(position);
        let blocks = len.div_ceil(self.block_sizes[pass]);
        let parities = (0..blocks)
            .map(|b| {
                let (s, e) = self.block_range(pass, b);
                self.alice_discloses(pass, s, e)
            })
            .collect();
        self.top_parity.push(parities);
    }

    fn mismatched(&self, pass: usize, block: usize) -> bool {
        let (s, e) = self.block_range(pass, block);
        self.bob_parity(pass, s, e) != self.top_parity[pass][block]
    }

    /// Runs the remaining passes to completion.
    pub fn run(&mut self) {
        for pass in self.order.len()..self.pass_count() {
            self.begin_pass(pass);
            let mut pending: BTreeSet<(usize, usize)> = (0..self.top_parity[pass].len())
                .filter(|&b| self.mismatched(pass, b))
                .map(|b| (pass, b))
                .collect();
            // Earlier passes have smaller blocks and are handled first.
            while let Some((j, b)) = pending.pop_first() {
                if !self.mismatched(j, b) {
                    continue;
                }
                let (s, e) = self.block_range(j, b);
                let fixed = self.binary(j, s, e);
                for i in 0..=pass {
                    let blk = self.position[i][fixed] / self.block_sizes[i];
                    if self.mismatched(i, blk) {
                        pending.insert((i, blk));
                    }
                }
            }
        }
    }
}

/// Reconciles `y` towards `x` with the canonical parameters for `p_est`.
/// Returns Bob's corrected string and the number of disclosed parities.
pub fn cascade_reconcile(
    x: &BitString,
    y: &BitString,
    p_est: f64,
    seed: u64,
) -> Result<(BitString, usize)> {
    let k1 = initial_block_size(p_est)?;
    let mut session = CascadeSession::new(x, y, k1, DEFAULT_PASSES, seed)?;
    session.run();
    Ok((session.bob, session.log.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::BscChannel;

    #[test]
    fn identical_strings_leak_only_top_parities() {
        let x = Stream::new(1).bits(1000);
        let (y, leak) = cascade_reconcile(&x, &x, 0.05, 3).unwrap();
        assert_eq!(y, x);
        // k1 = 15: blocks of 15, 30, 60, 120
        let expected: usize = [15usize, 30, 60, 120]
            .iter()
            .map(|b| 1000usize.div_ceil(*b))
            .sum();
        assert_eq!(leak, expected);
    }

    #[test]
    fn single_error_bisection_cost() {
        let x = Stream::new(2).bits(64);
        let mut y = x.clone();
        y.flip(19);
        let mut session = CascadeSession::new(&x, &y, 8, 4, 5).unwrap();
        session.run();
        assert_eq!(session.corrected(), &x);
        let pass1: Vec<_> = session
            .disclosures()
            .iter()
            .filter(|d| d.pass == 0)
            .collect();
        // 8 block parities plus ceil(log2 8) = 3 bisection parities
        assert_eq!(pass1.len(), 8 + 3);
        let top: usize = [8usize, 16, 32, 64].iter().map(|b| 64 / b).sum();
        assert_eq!(session.disclosed_parity_count(), top + 3);
    }

    #[test]
    fn disclosed_parities_are_alice_parities_and_blocks_match() {
        let ch = BscChannel::new(0.08).unwrap();
        for seed in 0..20 {
            let x = Stream::new(seed).bits(2000);
            let y = ch.transmit(&x, seed + 100);
            let k1 = initial_block_size(0.08).unwrap();
            let mut session = CascadeSession::new(&x, &y, k1, 4, seed).unwrap();
            session.run();
            for d in session.disclosures() {
                let order = &session.pass_order(d.pass)[d.start..d.end];
                let truth = order.iter().fold(false, |a, &i| a ^ x.get(i));
                assert_eq!(d.parity, truth);
                let bob = order
                    .iter()
                    .fold(false, |a, &i| a ^ session.corrected().get(i));
                assert_eq!(bob, truth, "inspected block still mismatched");
            }
            assert!(session.disclosed_parity_count() >= 2000usize.div_ceil(k1));
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let x = BitString::zeros(10);
        assert!(cascade_reconcile(&x, &BitString::zeros(9), 0.1, 0).is_err());
        assert!(cascade_reconcile(&x, &x, 0.0, 0).is_err());
        assert!(cascade_reconcile(&x, &x, 0.5, 0).is_err());
    }
}
