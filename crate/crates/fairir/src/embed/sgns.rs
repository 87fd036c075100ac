//! Skip-gram with negative sampling, trained from scratch.
//!
//! The trainer follows the classic word2vec recipe: input vectors start
//! uniform in (−0.5/dims, 0.5/dims), context vectors at zero, negatives
//! drawn from the unigram distribution raised to 0.75, and the learning
//! rate decays linearly to 1e-4 of its initial value over all epochs.
//!
//! With `jobs > 1` weight updates are lock-free concurrent (hogwild):
//! threads share the weight arrays through relaxed atomics and races are
//! accepted. `jobs == 1` is the deterministic contract — fixed seed, fixed
//! iteration order, bit-reproducible output.

use std::sync::atomic::{AtomicU32, AtomicU64, Ordering};

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::Sequences;
use crate::error::{Error, Result};

use super::{mix_seed, EmbeddingKind, EmbeddingMatrix, SgnsConfig};

/// The learning rate never drops below this fraction of its initial value.
const LR_FLOOR: f32 = 1e-4;

/// A re-iterable source of (center, context) training pairs, grouped into
/// shards (the unit of iteration order and of hogwild parallelism).
pub trait PairStream: Sync {
    fn n_shards(&self) -> usize;
    fn for_each_in_shard(&self, shard: usize, f: &mut dyn FnMut(u32, u32));
    /// Total pairs per epoch.
    fn pair_count(&self) -> u64;
    /// Token occurrence counts feeding the negative-sampling table.
    fn token_counts(&self, vocab_size: usize) -> Vec<u64>;
}

/// Sliding-window pairs over item lists (user sequences or random walks).
/// A window of 0 treats the whole list as one context set.
pub struct WindowPairs<'a> {
    lists: &'a [Vec<u32>],
    window: usize,
}

impl<'a> WindowPairs<'a> {
    pub fn new(lists: &'a [Vec<u32>], window: usize) -> Self {
        WindowPairs { lists, window }
    }

    fn effective_window(&self, len: usize) -> usize {
        if self.window == 0 {
            len
        } else {
            self.window
        }
    }
}

impl PairStream for WindowPairs<'_> {
    fn n_shards(&self) -> usize {
        self.lists.len()
    }

    fn for_each_in_shard(&self, shard: usize, f: &mut dyn FnMut(u32, u32)) {
        let list = &self.lists[shard];
        let w = self.effective_window(list.len());
        for i in 0..list.len() {
            let lo = i.saturating_sub(w);
            let hi = (i + w).min(list.len() - 1);
            for j in lo..=hi {
                if j != i {
                    f(list[i], list[j]);
                }
            }
        }
    }

    fn pair_count(&self) -> u64 {
        let mut total = 0u64;
        for list in self.lists {
            if list.is_empty() {
                continue;
            }
            let w = self.effective_window(list.len());
            for i in 0..list.len() {
                let lo = i.saturating_sub(w);
                let hi = (i + w).min(list.len() - 1);
                total += (hi - lo) as u64;
            }
        }
        total
    }

    fn token_counts(&self, vocab_size: usize) -> Vec<u64> {
        let mut counts = vec![0u64; vocab_size];
        for list in self.lists {
            for &t in list {
                counts[t as usize] += 1;
            }
        }
        counts
    }
}

/// f32 cell supporting lock-free concurrent updates.
struct SharedF32(AtomicU32);

impl SharedF32 {
    fn new(v: f32) -> Self {
        SharedF32(AtomicU32::new(v.to_bits()))
    }

    #[inline]
    fn get(&self) -> f32 {
        f32::from_bits(self.0.load(Ordering::Relaxed))
    }

    #[inline]
    fn add(&self, x: f32) {
        // benign race under hogwild: lost updates are accepted
        self.0.store((self.get() + x).to_bits(), Ordering::Relaxed);
    }
}

/// Unigram^0.75 sampling table (binary search over the cumulative mass).
struct NegativeTable {
    cdf: Vec<f64>,
}

impl NegativeTable {
    fn new(counts: &[u64]) -> Result<Self> {
        let mut cdf = Vec::with_capacity(counts.len());
        let mut acc = 0.0f64;
        for &c in counts {
            acc += (c as f64).powf(0.75);
            cdf.push(acc);
        }
        if acc <= 0.0 {
            return Err(Error::InvalidInput(
                "cannot build negative-sampling table: no token occurrences".into(),
            ));
        }
        Ok(NegativeTable { cdf })
    }

    #[inline]
    fn sample(&self, rng: &mut ChaCha8Rng) -> u32 {
        let total = *self.cdf.last().unwrap();
        let x = rng.gen::<f64>() * total;
        self.cdf.partition_point(|&c| c <= x) as u32
    }
}

/// Training result: the input-side vectors plus per-epoch mean loss.
pub struct SgnsOutput {
    pub embedding: EmbeddingMatrix,
    /// Mean logistic loss per pair, one entry per epoch.
    pub epoch_loss: Vec<f64>,
    /// Vocabulary items that never appeared in the stream (left at their
    /// random initialization).
    pub untrained_items: usize,
}

/// Train SGNS over a pair stream.
pub fn sgns_train(
    stream: &impl PairStream,
    vocab_size: usize,
    cfg: &SgnsConfig,
    jobs: usize,
) -> Result<SgnsOutput> {
    cfg.validate()?;
    let total_pairs_per_epoch = stream.pair_count();
    if total_pairs_per_epoch == 0 {
        return Err(Error::InvalidInput(
            "pair stream is empty (no sequence or walk yields a training pair)".into(),
        ));
    }
    let counts = stream.token_counts(vocab_size);
    let untrained_items = counts.iter().filter(|&&c| c == 0).count();
    if untrained_items > 0 {
        warn!("{untrained_items} of {vocab_size} items never appear in training pairs; their vectors stay at initialization");
    }
    let table = NegativeTable::new(&counts)?;

    let dims = cfg.dims;
    let mut init_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let input: Vec<SharedF32> = (0..vocab_size * dims)
        .map(|_| SharedF32::new((init_rng.gen::<f32>() - 0.5) / dims as f32))
        .collect();
    let context: Vec<SharedF32> = (0..vocab_size * dims).map(|_| SharedF32::new(0.0)).collect();

    let jobs = jobs.max(1);
    let n_shards = stream.n_shards();
    let total_pairs = total_pairs_per_epoch * cfg.epochs as u64;
    let processed = AtomicU64::new(0);
    let lr0 = cfg.learning_rate;

    let mut epoch_loss = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let losses: Vec<f64> = std::thread::scope(|scope| {
            let mut handles = Vec::with_capacity(jobs);
            for worker in 0..jobs {
                let input = &input;
                let context = &context;
                let table = &table;
                let processed = &processed;
                handles.push(scope.spawn(move || {
                    let mut loss = 0.0f64;
                    let mut neu1e = vec![0.0f32; dims];
                    let mut shard = worker;
                    while shard < n_shards {
                        let mut rng =
                            ChaCha8Rng::seed_from_u64(mix_seed(cfg.seed, epoch as u64, shard as u64));
                        stream.for_each_in_shard(shard, &mut |center, ctx_item| {
                            let done = processed.fetch_add(1, Ordering::Relaxed);
                            let progress = done as f32 / total_pairs as f32;
                            let lr = lr0 * (1.0 - (1.0 - LR_FLOOR) * progress);
                            loss += train_pair(
                                input, context, dims, center, ctx_item, cfg.negatives, table,
                                &mut rng, lr, &mut neu1e,
                            );
                        });
                        shard += jobs;
                    }
                    loss
                }));
            }
            handles.into_iter().map(|h| h.join().expect("sgns worker")).collect()
        });
        epoch_loss.push(losses.iter().sum::<f64>() / total_pairs_per_epoch as f64);
    }

    let data: Vec<f32> = input.iter().map(SharedF32::get).collect();
    Ok(SgnsOutput {
        embedding: EmbeddingMatrix::from_rows(vocab_size, dims, data, EmbeddingKind::Item2vec, cfg.seed),
        epoch_loss,
        untrained_items,
    })
}

#[allow(clippy::too_many_arguments)]
#[inline]
fn train_pair(
    input: &[SharedF32],
    context: &[SharedF32],
    dims: usize,
    center: u32,
    ctx_item: u32,
    negatives: usize,
    table: &NegativeTable,
    rng: &mut ChaCha8Rng,
    lr: f32,
    neu1e: &mut [f32],
) -> f64 {
    let ci = center as usize * dims;
    neu1e.fill(0.0);
    let mut loss = 0.0f64;
    for t in 0..=negatives {
        let (target, label) = if t == 0 {
            (ctx_item, 1.0f32)
        } else {
            let n = table.sample(rng);
            if n == ctx_item {
                continue;
            }
            (n, 0.0)
        };
        let ti = target as usize * dims;
        let mut dot = 0.0f32;
        for d in 0..dims {
            dot += input[ci + d].get() * context[ti + d].get();
        }
        let sigma = 1.0 / (1.0 + (-dot).exp());
        loss -= if label == 1.0 {
            (sigma.max(1e-12) as f64).ln()
        } else {
            ((1.0 - sigma).max(1e-12) as f64).ln()
        };
        let g = (label - sigma) * lr;
        for d in 0..dims {
            let c = context[ti + d].get();
            neu1e[d] += g * c;
            context[ti + d].add(g * input[ci + d].get());
        }
    }
    for d in 0..dims {
        input[ci + d].add(neu1e[d]);
    }
    loss
}

/// item2vec: windowed (center, context) pairs over every user's
/// time-ordered consumption sequence, fed to [`sgns_train`].
pub fn item2vec_embed(
    sequences: &Sequences,
    n_items: usize,
    cfg: &SgnsConfig,
    jobs: usize,
) -> Result<SgnsOutput> {
    let pairs = WindowPairs::new(&sequences.per_user, cfg.window);
    let mut out = sgns_train(&pairs, n_items, cfg, jobs)?;
    out.embedding.kind = EmbeddingKind::Item2vec;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::cosine_sim;

    fn lists(v: &[&[u32]]) -> Vec<Vec<u32>> {
        v.iter().map(|s| s.to_vec()).collect()
    }

    #[test]
    fn window_pairs_enumeration() {
        // [A,B,C] with window 1 -> (A,B),(B,A),(B,C),(C,B)
        let ls = lists(&[&[0, 1, 2]]);
        let pairs = WindowPairs::new(&ls, 1);
        let mut got = Vec::new();
        pairs.for_each_in_shard(0, &mut |c, x| got.push((c, x)));
        assert_eq!(got, vec![(0, 1), (1, 0), (1, 2), (2, 1)]);
        assert_eq!(pairs.pair_count(), 4);
    }

    #[test]
    fn singleton_sequence_contributes_nothing() {
        let ls = lists(&[&[5]]);
        let pairs = WindowPairs::new(&ls, 3);
        assert_eq!(pairs.pair_count(), 0);
    }

    #[test]
    fn unbounded_window_pairs_everything() {
        let ls = lists(&[&[0, 1, 2, 3]]);
        let pairs = WindowPairs::new(&ls, 0);
        assert_eq!(pairs.pair_count(), 12); // 4 * 3 ordered pairs
    }

    #[test]
    fn empty_stream_is_an_error() {
        let ls = lists(&[&[1], &[2]]);
        let seqs = Sequences {
            per_user: ls,
        };
        let cfg = SgnsConfig {
            dims: 8,
            epochs: 1,
            ..SgnsConfig::default()
        };
        assert!(item2vec_embed(&seqs, 3, &cfg, 1).is_err());
    }

    fn planted_two_clique_sequences(seed: u64) -> Sequences {
        // items 0..5 always co-consumed, 5..10 always co-consumed, never across
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut per_user = Vec::new();
        for u in 0..120 {
            let base: u32 = if u % 2 == 0 { 0 } else { 5 };
            let mut seq: Vec<u32> = (0..8).map(|_| base + rng.gen_range(0..5)).collect();
            // make sure every clique item shows up somewhere
            seq.push(base + (u as u32 / 2) % 5);
            per_user.push(seq);
        }
        Sequences { per_user }
    }

    #[test]
    fn planted_cliques_separate_in_embedding_space() {
        let seqs = planted_two_clique_sequences(3);
        let cfg = SgnsConfig {
            dims: 16,
            negatives: 5,
            epochs: 12,
            window: 4,
            learning_rate: 0.05,
            seed: 9,
        };
        let out = item2vec_embed(&seqs, 10, &cfg, 1).unwrap();
        let emb = &out.embedding;
        let mut within = Vec::new();
        let mut across = Vec::new();
        for i in 0..10usize {
            for j in (i + 1)..10 {
                let c = cosine_sim(emb.row(i), emb.row(j));
                if (i < 5) == (j < 5) {
                    within.push(c);
                } else {
                    across.push(c);
                }
            }
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        assert!(
            mean(&within) > mean(&across),
            "within {} !> across {}",
            mean(&within),
            mean(&across)
        );
    }

    #[test]
    fn loss_non_increasing_over_first_epochs() {
        let seqs = planted_two_clique_sequences(5);
        let cfg = SgnsConfig {
            dims: 16,
            negatives: 5,
            epochs: 5,
            window: 4,
            learning_rate: 0.025,
            seed: 11,
        };
        let out = item2vec_embed(&seqs, 10, &cfg, 1).unwrap();
        for w in out.epoch_loss.windows(2) {
            assert!(
                w[1] <= w[0] + 1e-9,
                "epoch loss increased: {:?}",
                out.epoch_loss
            );
        }
    }

    #[test]
    fn repeated_pair_converges_to_high_similarity() {
        let ls = lists(&[&[0, 1]]);
        let seqs = Sequences { per_user: ls };
        let cfg = SgnsConfig {
            dims: 8,
            negatives: 2,
            epochs: 400,
            window: 1,
            learning_rate: 0.01,
            seed: 4,
        };
        let before = {
            let mut c = cfg.clone();
            c.epochs = 1;
            c.learning_rate = 1e-9; // effectively untrained
            item2vec_embed(&seqs, 2, &c, 1).unwrap()
        };
        let after = item2vec_embed(&seqs, 2, &cfg, 1).unwrap();
        let c0 = cosine_sim(before.embedding.row(0), before.embedding.row(1));
        let c1 = cosine_sim(after.embedding.row(0), after.embedding.row(1));
        assert!(c1 > c0, "cosine did not increase: {c0} -> {c1}");
        assert!(
            after.epoch_loss.last().unwrap() < after.epoch_loss.first().unwrap(),
            "loss did not decrease"
        );
    }

    #[test]
    fn fixed_seed_single_thread_is_bit_reproducible() {
        let seqs = planted_two_clique_sequences(7);
        let cfg = SgnsConfig {
            dims: 12,
            negatives: 4,
            epochs: 3,
            window: 3,
            learning_rate: 0.05,
            seed: 123,
        };
        let a = item2vec_embed(&seqs, 10, &cfg, 1).unwrap();
        let b = item2vec_embed(&seqs, 10, &cfg, 1).unwrap();
        assert_eq!(a.embedding.data(), b.embedding.data());
        assert_eq!(a.epoch_loss, b.epoch_loss);
    }

    #[test]
    fn unseen_vocab_item_keeps_initialization() {
        let ls = lists(&[&[0, 1], &[1, 0]]);
        let seqs = Sequences { per_user: ls };
        let cfg = SgnsConfig {
            dims: 4,
            negatives: 2,
            epochs: 2,
            window: 1,
            learning_rate: 0.05,
            seed: 1,
        };
        // vocab has item 2 that never appears
        let out = item2vec_embed(&seqs, 3, &cfg, 1).unwrap();
        assert_eq!(out.untrained_items, 1);
        let mut init_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let init: Vec<f32> = (0..3 * 4).map(|_| (init_rng.gen::<f32>() - 0.5) / 4.0).collect();
        assert_eq!(out.embedding.row(2), &init[8..12]);
    }
}
