//! Grammar-directed decoding of a phoneme stream into a word sequence.
//!
//! The search space is the product of grammar states, word HMM states and
//! time. It is explored without materializing the product automaton: one
//! backward pass computes, for every (time, grammar arc, HMM state), the best
//! log-score of finishing the utterance from there. The answer is then read
//! forwards. First the word sequence is fixed one word at a time, always
//! taking the smallest word that still allows an optimal decoding. Then,
//! restricted to that word sequence, the state path is fixed one observation
//! at a time in the same way.

use std::collections::BTreeSet;

use thiserror::Error;

use super::model::{GrammarFsa, SpeechModels, WordHmm};
use super::viterbi::{reaches, LogHmm};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecodeError {
    #[error("empty observation sequence")]
    EmptyObservations,
    #[error("no grammatical word sequence explains the observations")]
    NoParse,
    #[error("grammar arc uses word `{0}` with no loaded model")]
    MissingWord(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decoding {
    pub words: Vec<String>,
    /// Natural-log joint probability of the best decoding.
    pub log_probability: f64,
    /// `(word, state index)` for each observation.
    pub state_path: Vec<(String, usize)>,
}

impl Decoding {
    /// Words joined by single spaces, ready for the lexer.
    pub fn text(&self) -> String {
        self.words.join(" ")
    }
}

struct ArcModel<'m> {
    from: usize,
    to: usize,
    word: &'m str,
    hmm: LogHmm,
    emit: Vec<Vec<f64>>,
}

/// Backward score tables over the grammar x HMM x time lattice.
struct Lattice<'m> {
    steps: usize,
    arcs: Vec<ArcModel<'m>>,
    accepting: Vec<bool>,
    // boundary[t][q]: best score of observations t.. starting at a word
    // boundary in grammar state q.
    boundary: Vec<Vec<f64>>,
    // onward[t][a][i]: best score after state i of arc a emitted
    // observation t (exit or transition included).
    onward: Vec<Vec<Vec<f64>>>,
}

impl<'m> Lattice<'m> {
    fn build<S: AsRef<str>>(
        observations: &[S],
        words: &'m [WordHmm],
        fsa: &'m GrammarFsa,
    ) -> Result<Self, DecodeError> {
        let steps = observations.len();
        let mut arcs = Vec::with_capacity(fsa.arcs.len());
        for arc in &fsa.arcs {
            let hmm = words
                .iter()
                .find(|w| w.word == arc.word)
                .ok_or_else(|| DecodeError::MissingWord(arc.word.clone()))?;
            arcs.push(ArcModel {
                from: arc.from,
                to: arc.to,
                word: &arc.word,
                hmm: LogHmm::new(hmm),
                emit: LogHmm::emission_table(hmm, observations),
            });
        }
        let q_count = fsa.states.len();
        let accepting: Vec<bool> = (0..q_count).map(|q| fsa.is_accepting(q)).collect();

        let mut lattice = Lattice {
            steps,
            boundary: vec![vec![f64::NEG_INFINITY; q_count]; steps + 1],
            onward: vec![
                arcs.iter()
                    .map(|a| vec![f64::NEG_INFINITY; a.hmm.n])
                    .collect();
                steps
            ],
            arcs,
            accepting,
        };
        for q in 0..q_count {
            if lattice.accepting[q] {
                lattice.boundary[steps][q] = 0.0;
            }
        }

        for t in (0..steps).rev() {
            for a in 0..lattice.arcs.len() {
                for i in 0..lattice.arcs[a].hmm.n {
                    let best = lattice.exit_score(t, a, i).max(
                        (0..lattice.arcs[a].hmm.n)
                            .map(|j| lattice.step_score(t, a, i, j))
                            .fold(f64::NEG_INFINITY, f64::max),
                    );
                    lattice.onward[t][a][i] = best;
                }
            }
            for a in 0..lattice.arcs.len() {
                let from = lattice.arcs[a].from;
                for i in 0..lattice.arcs[a].hmm.n {
                    let score = lattice.enter_score(t, a, i);
                    if score > lattice.boundary[t][from] {
                        lattice.boundary[t][from] = score;
                    }
                }
            }
        }
        Ok(lattice)
    }

    /// Emit observation `t` in state `i` of arc `a`, then continue optimally.
    fn inside(&self, t: usize, a: usize, i: usize) -> f64 {
        self.arcs[a].emit[t][i] + self.onward[t][a][i]
    }

    /// Start arc `a` in state `i` at time `t`.
    fn enter_score(&self, t: usize, a: usize, i: usize) -> f64 {
        self.arcs[a].hmm.entry[i] + self.inside(t, a, i)
    }

    /// Leave arc `a` from state `i` after observation `t`.
    fn exit_score(&self, t: usize, a: usize, i: usize) -> f64 {
        self.arcs[a].hmm.exit[i] + self.boundary[t + 1][self.arcs[a].to]
    }

    /// Move from state `i` to `j` inside arc `a` after observation `t`.
    fn step_score(&self, t: usize, a: usize, i: usize, j: usize) -> f64 {
        if t + 1 >= self.steps {
            return f64::NEG_INFINITY;
        }
        self.arcs[a].hmm.trans[i][j] + self.inside(t + 1, a, j)
    }

    fn optimal_entries(&self, t: usize, q: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let target = self.boundary[t][q];
        self.arcs
            .iter()
            .enumerate()
            .filter(move |(_, arc)| arc.from == q)
            .flat_map(move |(a, arc)| (0..arc.hmm.n).map(move |i| (a, i)))
            .filter(move |&(a, i)| reaches(self.enter_score(t, a, i), target))
    }

    fn exit_is_optimal(&self, t: usize, a: usize, i: usize) -> bool {
        reaches(self.exit_score(t, a, i), self.onward[t][a][i])
    }

    fn step_is_optimal(&self, t: usize, a: usize, i: usize, j: usize) -> bool {
        reaches(self.step_score(t, a, i, j), self.onward[t][a][i])
    }

    /// Word boundaries `(t, q)` reachable by optimally aligning arc `a`
    /// entered at time `t` in state `i`.
    fn optimal_exits(&self, t: usize, a: usize, i: usize, out: &mut BTreeSet<(usize, usize)>) {
        let n = self.arcs[a].hmm.n;
        let mut seen = BTreeSet::new();
        let mut stack = vec![(t, i)];
        while let Some((t, i)) = stack.pop() {
            if !seen.insert((t, i)) {
                continue;
            }
            if self.exit_is_optimal(t, a, i) {
                out.insert((t + 1, self.arcs[a].to));
            }
            for j in 0..n {
                if self.step_is_optimal(t, a, i, j) {
                    stack.push((t + 1, j));
                }
            }
        }
    }

    /// Smallest word sequence among optimal decodings.
    fn best_words(&self, start: usize) -> Vec<&'m str> {
        let mut words = Vec::new();
        let mut frontier: BTreeSet<(usize, usize)> = BTreeSet::from([(0, start)]);
        loop {
            if frontier
                .iter()
                .any(|&(t, q)| t == self.steps && self.accepting[q])
            {
                return words;
            }
            let mut choice: Option<&'m str> = None;
            let mut entries = Vec::new();
            for &(t, q) in frontier.iter().filter(|&&(t, _)| t < self.steps) {
                for (a, i) in self.optimal_entries(t, q) {
                    let word = self.arcs[a].word;
                    if choice.is_none_or(|c| word < c) {
                        choice = Some(word);
                    }
                    entries.push((t, a, i));
                }
            }
            let word = choice.expect("optimal decodings continue until accepted");
            let mut next = BTreeSet::new();
            for (t, a, i) in entries {
                if self.arcs[a].word == word {
                    self.optimal_exits(t, a, i, &mut next);
                }
            }
            words.push(word);
            frontier = next;
        }
    }

    /// Smallest state path among optimal decodings spelling `words`.
    fn best_path(&self, start: usize, words: &[&str]) -> Vec<(String, usize)> {
        let k_count = words.len();
        let q_count = self.accepting.len();
        let arc_count = self.arcs.len();
        let spells = |a: usize, k: usize| k < k_count && self.arcs[a].word == words[k];

        // can_finish_at[t][k][q]: from boundary (t, q) with words[k..] left.
        // can_finish_in[t][k][a][i]: inside arc a, state i at time t, word k.
        let mut can_finish_at = vec![vec![vec![false; q_count]; k_count + 1]; self.steps + 1];
        let mut can_finish_in =
            vec![vec![vec![Vec::<bool>::new(); arc_count]; k_count]; self.steps];
        can_finish_at[self.steps][k_count] = self.accepting.clone();
        for t in (0..self.steps).rev() {
            for k in 0..k_count {
                for a in 0..arc_count {
                    let n = self.arcs[a].hmm.n;
                    let mut row = vec![false; n];
                    if spells(a, k) {
                        for (i, slot) in row.iter_mut().enumerate() {
                            let by_exit = self.exit_is_optimal(t, a, i)
                                && can_finish_at[t + 1][k + 1][self.arcs[a].to];
                            let by_step = t + 1 < self.steps
                                && (0..n).any(|j| {
                                    self.step_is_optimal(t, a, i, j)
                                        && can_finish_in[t + 1][k][a][j]
                                });
                            *slot = by_exit || by_step;
                        }
                    }
                    can_finish_in[t][k][a] = row;
                }
                can_finish_at[t][k] = (0..q_count)
                    .map(|q| {
                        self.optimal_entries(t, q)
                            .any(|(a, i)| spells(a, k) && can_finish_in[t][k][a][i])
                    })
                    .collect();
            }
        }

        let enter = |t: usize, k: usize, q: usize, into: &mut BTreeSet<(usize, usize, usize)>| {
            for (a, i) in self.optimal_entries(t, q) {
                if spells(a, k) && can_finish_in[t][k][a][i] {
                    into.insert((k, a, i));
                }
            }
        };

        let mut path = Vec::with_capacity(self.steps);
        let mut live = BTreeSet::new();
        enter(0, 0, start, &mut live);
        for t in 0..self.steps {
            let key = live
                .iter()
                .map(|&(k, _, i)| (words[k], i))
                .min()
                .expect("a feasible configuration survives");
            path.push((key.0.to_string(), key.1));
            if t + 1 == self.steps {
                break;
            }
            let mut next = BTreeSet::new();
            for &(k, a, i) in live.iter().filter(|&&(k, _, i)| (words[k], i) == key) {
                for (j, &feasible) in can_finish_in[t + 1][k][a].iter().enumerate() {
                    if feasible && self.step_is_optimal(t, a, i, j) {
                        next.insert((k, a, j));
                    }
                }
                let to = self.arcs[a].to;
                if self.exit_is_optimal(t, a, i) && can_finish_at[t + 1][k + 1][to] {
                    enter(t + 1, k + 1, to, &mut next);
                }
            }
            live = next;
        }
        path
    }
}

/// Most probable grammatical word sequence for a phoneme stream. Ties go to
/// the lexicographically smallest word sequence, then the smallest state path.
pub fn decode_sentence<S: AsRef<str>>(
    observations: &[S],
    words: &[WordHmm],
    fsa: &GrammarFsa,
) -> Result<Decoding, DecodeError> {
    if observations.is_empty() {
        return Err(DecodeError::EmptyObservations);
    }
    let lattice = Lattice::build(observations, words, fsa)?;
    let log_probability = lattice.boundary[0][fsa.start];
    if !log_probability.is_finite() {
        return Err(DecodeError::NoParse);
    }
    let best_words = lattice.best_words(fsa.start);
    let state_path = lattice.best_path(fsa.start, &best_words);
    Ok(Decoding {
        words: best_words.into_iter().map(str::to_string).collect(),
        log_probability,
        state_path,
    })
}

impl SpeechModels {
    pub fn decode<S: AsRef<str>>(&self, observations: &[S]) -> Result<Decoding, DecodeError> {
        decode_sentence(observations, &self.words, &self.grammar)
    }
}
