//! Phoneme-level speech front end: word HMMs, a grammar automaton acting as
//! the language model, and Viterbi decoding over symbolic phoneme streams.

mod decode;
mod model;
mod viterbi;

pub use decode::{decode_sentence, DecodeError, Decoding};
pub use model::{
    load_models, GrammarArc, GrammarFsa, ModelError, PhonemeState, SpeechModels, WordHmm,
    MASS_TOLERANCE,
};
pub use viterbi::{viterbi_word, WordAlignment};

/// Split one line of an observation file into phoneme symbols.
pub fn parse_observations(line: &str) -> Vec<&str> {
    line.split_whitespace().collect()
}
