//! Corpus loading and seeded batch sampling.
//!
//! A corpus is just the raw bytes of a file; the model predicts the next
//! byte from a fixed-width window, so no tokenizer is involved. The file is
//! split once into a contiguous training prefix and validation suffix, and
//! batches are drawn by sampling window start offsets uniformly inside the
//! chosen split. Sampling consumes a caller-supplied [`CounterRng`], so the
//! batch sequence of a run is a pure function of (bytes, seed, window,
//! batch size).

use std::path::Path;

use thiserror::Error;

use crate::rng::CounterRng;

/// Vocabulary is every possible byte value.
pub const VOCAB: usize = 256;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("corpus {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("corpus {0} is empty")]
    Empty(String),
    #[error("split_fraction {0} leaves an empty train or validation range")]
    BadSplit(f64),
    #[error("{split:?} range holds {available} bytes, need context_window + 1 = {needed}")]
    WindowTooLarge {
        split: Split,
        available: usize,
        needed: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Valid,
}

/// Raw bytes plus the train/validation boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub name: String,
    pub bytes: Vec<u8>,
    pub split_fraction: f64,
    boundary: usize,
}

impl Corpus {
    /// Wrap in-memory bytes; the boundary lands at
    /// `floor(split_fraction * len)` and both splits must be non-empty.
    pub fn from_bytes(
        name: impl Into<String>,
        bytes: Vec<u8>,
        split_fraction: f64,
    ) -> Result<Self, DataError> {
        let name = name.into();
        if bytes.is_empty() {
            return Err(DataError::Empty(name));
        }
        let boundary = (split_fraction * bytes.len() as f64).floor() as usize;
        if boundary == 0 || boundary >= bytes.len() {
            return Err(DataError::BadSplit(split_fraction));
        }
        Ok(Corpus {
            name,
            bytes,
            split_fraction,
            boundary,
        })
    }

    /// Byte range `[start, end)` of a split.
    pub fn range(&self, split: Split) -> (usize, usize) {
        match split {
            Split::Train => (0, self.boundary),
            Split::Valid => (self.boundary, self.bytes.len()),
        }
    }

    pub fn split_slice(&self, split: Split) -> &[u8] {
        let (lo, hi) = self.range(split);
        &self.bytes[lo..hi]
    }
}

/// Read a file and split it.
pub fn load_corpus(path: &Path, split_fraction: f64) -> Result<Corpus, DataError> {
    let bytes = std::fs::read(path).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Corpus::from_bytes(path.display().to_string(), bytes, split_fraction)
}

/// One training batch: `batch_size` windows of `context_window` input bytes,
/// each paired with the byte that follows it.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub inputs: Vec<u8>,
    pub targets: Vec<u8>,
    pub batch_size: usize,
    pub context_window: usize,
}

impl Batch {
    pub fn input_row(&self, i: usize) -> &[u8] {
        &self.inputs[i * self.context_window..(i + 1) * self.context_window]
    }
}

/// Draw a batch of windows whose start offsets are uniform over the split.
/// Every window plus its target byte lies entirely inside the split range.
pub fn sample_batch(
    corpus: &Corpus,
    split: Split,
    context_window: usize,
    batch_size: usize,
    rng: &mut CounterRng,
) -> Result<Batch, DataError> {
    let (lo, hi) = corpus.range(split);
    let len = hi - lo;
    if len < context_window + 1 {
        return Err(DataError::WindowTooLarge {
            split,
            available: len,
            needed: context_window + 1,
        });
    }
    let positions = (len - context_window) as u64;
    let mut inputs = Vec::with_capacity(batch_size * context_window);
    let mut targets = Vec::with_capacity(batch_size);
    for _ in 0..batch_size {
        let off = lo + rng.next_below(positions) as usize;
        inputs.extend_from_slice(&corpus.bytes[off..off + context_window]);
        targets.push(corpus.bytes[off + context_window]);
    }
    Ok(Batch {
        inputs,
        targets,
        batch_size,
        context_window,
    })
}

/// Deterministic pseudo-text: a seed-specific vocabulary of short "words"
/// sampled with a heavy-tailed rank distribution, grouped into sentences and
/// lines. Two different seeds give disjoint vocabularies, which is enough
/// distribution shift to stand in for a fine-tuning corpus.
pub fn synthetic_text(len: usize, seed: u64) -> Vec<u8> {
    const SYLLABLES: &[&str] = &[
        "ba", "re", "mo", "ti", "la", "ku", "son", "ver", "mi", "ta", "ne", "ol", "da", "sh",
        "qu", "en",
    ];
    let mut rng = CounterRng::from_seed_label(seed, "synthetic-text");
    let vocab: Vec<String> = (0..256)
        .map(|_| {
            let n = 1 + rng.next_below(3) as usize;
            (0..n)
                .map(|_| SYLLABLES[rng.next_below(SYLLABLES.len() as u64) as usize])
                .collect::<String>()
        })
        .collect();
    // cumulative weights for p(rank r) proportional to 1/(r+1)
    let weights: Vec<f64> = (0..vocab.len()).map(|r| 1.0 / (r as f64 + 1.0)).collect();
    let total: f64 = weights.iter().sum();

    let mut out = Vec::with_capacity(len + 16);
    let mut words_in_sentence = 0u64;
    let mut sentences_in_line = 0u64;
    while out.len() < len {
        let mut dart = rng.next_f64() * total;
        let mut idx = 0;
        for (i, w) in weights.iter().enumerate() {
            dart -= w;
            if dart <= 0.0 {
                idx = i;
                break;
            }
        }
        out.extend_from_slice(vocab[idx].as_bytes());
        words_in_sentence += 1;
        if words_in_sentence >= 4 + rng.next_below(8) {
            out.push(b'.');
            words_in_sentence = 0;
            sentences_in_line += 1;
            if sentences_in_line >= 1 + rng.next_below(5) {
                out.push(b'\n');
                sentences_in_line = 0;
            } else {
                out.push(b' ');
            }
        } else {
            out.push(b' ');
        }
    }
    out.truncate(len);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_byte_split() {
        let c = Corpus::from_bytes("t", b"abc".to_vec(), 0.67).unwrap();
        assert_eq!(c.split_slice(Split::Train), &[97, 98]);
        assert_eq!(c.split_slice(Split::Valid), &[99]);
    }

    #[test]
    fn empty_corpus_rejected() {
        assert!(matches!(
            Corpus::from_bytes("t", vec![], 0.5),
            Err(DataError::Empty(_))
        ));
    }

    #[test]
    fn full_split_rejected() {
        assert!(matches!(
            Corpus::from_bytes("t", b"abcd".to_vec(), 1.0),
            Err(DataError::BadSplit(_))
        ));
        assert!(matches!(
            Corpus::from_bytes("t", b"abcd".to_vec(), 0.0),
            Err(DataError::BadSplit(_))
        ));
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = load_corpus(Path::new("/nonexistent/corpus.txt"), 0.9);
        assert!(matches!(err, Err(DataError::Io { .. })));
    }

    #[test]
    fn window_yields_contiguous_pair() {
        let c = Corpus::from_bytes("t", vec![1, 2, 3, 4], 0.8).unwrap();
        // train range is [1,2,3]; the only window of width 2 is [1,2] -> 3
        let mut rng = CounterRng::from_seed_label(0, "b");
        let b = sample_batch(&c, Split::Train, 2, 4, &mut rng).unwrap();
        for i in 0..4 {
            assert_eq!(b.input_row(i), &[1, 2]);
            assert_eq!(b.targets[i], 3);
        }
    }

    #[test]
    fn same_seed_same_batch() {
        let c = Corpus::from_bytes("t", synthetic_text(4096, 5), 0.9).unwrap();
        let mut r1 = CounterRng::from_seed_label(42, "train");
        let mut r2 = CounterRng::from_seed_label(42, "train");
        for _ in 0..10 {
            let a = sample_batch(&c, Split::Train, 8, 4, &mut r1).unwrap();
            let b = sample_batch(&c, Split::Train, 8, 4, &mut r2).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn window_too_large() {
        let c = Corpus::from_bytes("t", vec![1, 2, 3, 4], 0.8).unwrap();
        let mut rng = CounterRng::from_seed_label(0, "b");
        assert!(matches!(
            sample_batch(&c, Split::Valid, 2, 1, &mut rng),
            Err(DataError::WindowTooLarge { .. })
        ));
    }

    #[test]
    fn validation_windows_stay_in_validation_range() {
        let c = Corpus::from_bytes("t", synthetic_text(10_000, 9), 0.9).unwrap();
        let (lo, hi) = c.range(Split::Valid);
        let mut rng = CounterRng::from_seed_label(3, "v");
        for _ in 0..200 {
            let b = sample_batch(&c, Split::Valid, 16, 4, &mut rng).unwrap();
            for i in 0..b.batch_size {
                let row = b.input_row(i);
                // locate the drawn window by matching the contiguous slice
                let found = (lo..hi - 16).any(|o| {
                    &c.bytes[o..o + 16] == row && c.bytes[o + 16] == b.targets[i]
                });
                assert!(found, "window not contiguous inside validation range");
            }
        }
    }

    /// Offsets are uniform: per-position counts over 1e5 draws on a
    /// 1000-position range stay within five binomial standard deviations.
    /// Random bytes make every sampled 9-gram unique, so each drawn window
    /// maps back to exactly one offset.
    #[test]
    fn offset_frequencies_uniform() {
        let window = 8;
        let train_len = 1008usize; // 1000 valid start offsets
        let total_len = 1108usize;
        let mut gen = CounterRng::from_seed_label(7, "uniform-corpus");
        let bytes: Vec<u8> = (0..total_len).map(|_| gen.next_u64() as u8).collect();
        let fraction = (train_len as f64 + 0.5) / total_len as f64;
        let c = Corpus::from_bytes("t", bytes, fraction).unwrap();
        let (lo, hi) = c.range(Split::Train);
        assert_eq!((lo, hi), (0, train_len));
        let n_positions = hi - lo - window;
        assert_eq!(n_positions, 1000);
        let mut counts = vec![0u64; n_positions];
        let mut rng = CounterRng::from_seed_label(11, "chi");
        let draws = 100_000usize;
        let batch = 100;
        for _ in 0..draws / batch {
            let b = sample_batch(&c, Split::Train, window, batch, &mut rng).unwrap();
            for i in 0..batch {
                let row = b.input_row(i);
                let mut matches = (lo..lo + n_positions).filter(|&o| {
                    &c.bytes[o..o + window] == row && c.bytes[o + window] == b.targets[i]
                });
                let off = matches.next().expect("offset recoverable");
                assert_eq!(matches.next(), None, "ambiguous window content");
                counts[off - lo] += 1;
            }
        }
        let n = draws as f64;
        let p = 1.0 / n_positions as f64;
        let mean = n * p;
        let sd = (n * p * (1.0 - p)).sqrt();
        for (i, &cnt) in counts.iter().enumerate() {
            assert!(
                (cnt as f64 - mean).abs() <= 5.0 * sd,
                "position {i}: count {cnt} vs mean {mean:.1} (sd {sd:.2})"
            );
        }
    }

    #[test]
    fn synthetic_text_deterministic_and_shifted() {
        let a = synthetic_text(2000, 1);
        let b = synthetic_text(2000, 1);
        let c = synthetic_text(2000, 2);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.iter().all(|&x| x.is_ascii()));
    }
}
