//! Reproducible random streams and order-preserving parallel chunking.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::numeric::RunningStats;

/// Samples drawn per parallel work unit.
pub const CHUNK_SIZE: usize = 1 << 14;

// Each chunk starts this many 32-bit words into the stream.
const CHUNK_WORD_STRIDE: u32 = 40;

/// A `(seed, stream_id)` pair naming an independent ChaCha8 keystream.
///
/// Work split into chunks draws chunk `c` from word offset `c · 2⁴⁰` of the
/// stream, so results depend only on `(seed, stream_id, count)` and never on
/// the number of worker threads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeededStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl SeededStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// Generator positioned at the start of the stream.
    pub fn rng(&self) -> ChaCha8Rng {
        self.chunk_rng(0)
    }

    /// Generator positioned at the start of chunk `chunk`.
    pub fn chunk_rng(&self, chunk: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng.set_word_pos((chunk as u128) << CHUNK_WORD_STRIDE);
        rng
    }

    /// A sibling stream with a different id, same seed.
    pub fn with_stream(&self, stream_id: u64) -> Self {
        Self {
            seed: self.seed,
            stream_id,
        }
    }
}

/// Sizes of the chunks covering `count` samples.
pub fn chunk_sizes(count: usize) -> Vec<usize> {
    let full = count / CHUNK_SIZE;
    let mut sizes = vec![CHUNK_SIZE; full];
    if !count.is_multiple_of(CHUNK_SIZE) {
        sizes.push(count % CHUNK_SIZE);
    }
    sizes
}

/// Runs `work(rng, len)` for every chunk in parallel and returns the results
/// in chunk order.
pub fn map_chunks<T, F>(stream: &SeededStream, count: usize, work: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, usize) -> T + Sync,
{
    chunk_sizes(count)
        .into_par_iter()
        .enumerate()
        .map(|(c, len)| {
            let mut rng = stream.chunk_rng(c as u64);
            work(&mut rng, len)
        })
        .collect()
}

/// Chunked Monte Carlo of several scalar statistics at once. Per-chunk
/// accumulators are merged in chunk order.
pub fn mc_stats<const K: usize, F>(stream: &SeededStream, count: usize, sample: F) -> [RunningStats; K]
where
    F: Fn(&mut ChaCha8Rng) -> [f64; K] + Sync,
{
    let parts = map_chunks(stream, count, |rng, len| {
        let mut acc = [RunningStats::new(); K];
        for _ in 0..len {
            let v = sample(rng);
            for (a, x) in acc.iter_mut().zip(v) {
                a.push(x);
            }
        }
        acc
    });
    let mut total = [RunningStats::new(); K];
    for part in &parts {
        for (t, p) in total.iter_mut().zip(part) {
            t.merge(p);
        }
    }
    total
}
