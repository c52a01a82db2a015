use super::lex::{AccessIndex, AccessStats};
use super::reduce::ReducedDb;
use crate::bind::{AnswerTuple, Counters};
use crate::error::{checked_add, Error, Result};

/// One distinct assignment of the anchor atom's head variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct AnchorBlock {
    weight: i128,
    /// Where the block starts in the lex index.
    lex_start: u128,
    count: u128,
}

/// Direct access by the sum of weight variables that all live in one atom.
///
/// The nested lex index is ordered by the anchor's head variables first, so
/// each anchor row owns a contiguous block of it. Blocks are re-sorted by
/// weight; an access picks the block and then reads inside it.
#[derive(Debug, Clone)]
pub struct SumAccessIndex {
    lex: AccessIndex,
    blocks: Vec<AnchorBlock>,
    cum: Vec<u128>,
    pub preprocess: Counters,
}

impl SumAccessIndex {
    pub(crate) fn build(
        lex: AccessIndex,
        db: &ReducedDb,
        anchor: usize,
        weight_pos: &[usize],
    ) -> Result<SumAccessIndex> {
        let mut counters = lex.preprocess;
        let rel = &db.relations[anchor];
        let mut blocks = Vec::with_capacity(rel.len());
        for row in rel.table.rows() {
            let weight = weight_pos
                .iter()
                .map(|&p| row[p].as_int().map(i128::from))
                .sum::<Option<i128>>()
                .ok_or_else(|| Error::Internal("non-integer weight".into()))?;
            let (lex_start, count) = lex
                .prefix_block(row)
                .ok_or_else(|| Error::Internal("anchor row without answers".into()))?;
            blocks.push(AnchorBlock {
                weight,
                lex_start,
                count,
            });
        }
        counters.rows += rel.len() as u64;
        // Lex start order equals lex order of the anchor values.
        let mut comparisons = 0u64;
        blocks.sort_unstable_by(|a, b| {
            comparisons += 1;
            (a.weight, a.lex_start).cmp(&(b.weight, b.lex_start))
        });
        counters.comparisons += comparisons;
        counters.sorts += 1;
        let mut cum = Vec::with_capacity(blocks.len());
        let mut total = 0u128;
        for b in &blocks {
            total = checked_add(total, b.count)?;
            cum.push(total);
        }
        if total != lex.count() {
            return Err(Error::Internal("anchor blocks do not cover the answers".into()));
        }
        Ok(SumAccessIndex {
            lex,
            blocks,
            cum,
            preprocess: counters,
        })
    }

    pub fn count(&self) -> u128 {
        self.lex.count()
    }

    /// Weights of the anchor blocks in rank order.
    pub fn block_weights(&self) -> impl Iterator<Item = (i128, u128)> + '_ {
        self.blocks.iter().map(|b| (b.weight, b.count))
    }

    pub fn access(&self, k: u128) -> Result<AnswerTuple> {
        self.access_with_stats(k).map(|(a, _)| a)
    }

    pub fn access_with_stats(&self, k: u128) -> Result<(AnswerTuple, AccessStats)> {
        if k >= self.count() {
            return Err(Error::OutOfRange { k, count: self.count() });
        }
        let mut probes = 0;
        let (mut lo, mut hi) = (0, self.cum.len());
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            probes += 1;
            if self.cum[mid] > k {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        let block = self.blocks[lo];
        let before = self.cum[lo] - block.count;
        let (answer, mut stats) = self.lex.access_with_stats(block.lex_start + (k - before))?;
        stats.probes += probes;
        Ok((answer, stats))
    }

    /// Sum of the weight variables of an answer.
    pub fn weight_of(answer: &AnswerTuple, weights: &[usize]) -> Option<i128> {
        weights.iter().map(|&v| answer.values[v].as_int().map(i128::from)).sum()
    }

    pub fn lex(&self) -> &AccessIndex {
        &self.lex
    }
}
