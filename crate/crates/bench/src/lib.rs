//! Inputs shared by the benchmarks.

use genlift::rng::{sample_word, stream};
use genlift::{Alphabet, TargetMeasure, Word};

pub const SEED: u64 = 0xD0D0;

pub fn fair() -> TargetMeasure {
    TargetMeasure::uniform(Alphabet::binary())
}

pub fn fair_word(len: usize, name: &str) -> Word {
    sample_word(&fair(), len, &mut stream(SEED, name)).expect("valid measure")
}

/// Typical blocks alternating with runs of zeros, ending on a typical block.
pub fn two_regime(lens: &[usize]) -> (Word, Vec<usize>) {
    let mut symbols = Vec::new();
    let mut checkpoints = Vec::new();
    for (i, &len) in lens.iter().enumerate() {
        if i % 2 == 0 {
            symbols.extend_from_slice(fair_word(len, &format!("bench/{i}")).symbols());
            checkpoints.push(symbols.len());
        } else {
            symbols.extend(std::iter::repeat_n(0, len));
        }
    }
    (Word::new(Alphabet::binary(), symbols).expect("binary"), checkpoints)
}
