//! Viterbi alignment of an observation sequence against one word HMM.
//!
//! Scores live in the natural-log domain. The best-score table is filled
//! backwards in time; the path is then read forwards, taking the smallest
//! state index whenever several continuations reach the optimum, so the
//! returned path is the lexicographically smallest optimal one.

use super::model::WordHmm;

/// Log-scores closer than this are treated as ties.
pub(crate) const TIE_EPSILON: f64 = 1e-12;

pub(crate) fn ln(p: f64) -> f64 {
    if p > 0.0 {
        p.ln()
    } else {
        f64::NEG_INFINITY
    }
}

/// `value` reaches `best` up to the tie tolerance and is a real score.
pub(crate) fn reaches(value: f64, best: f64) -> bool {
    value.is_finite() && value >= best - TIE_EPSILON
}

/// Dense log-domain view of a [`WordHmm`].
#[derive(Debug, Clone)]
pub(crate) struct LogHmm {
    pub n: usize,
    pub entry: Vec<f64>,
    pub exit: Vec<f64>,
    /// `trans[i][j]`, `-inf` where no arc exists.
    pub trans: Vec<Vec<f64>>,
}

impl LogHmm {
    pub fn new(hmm: &WordHmm) -> Self {
        let n = hmm.states.len();
        let mut entry = vec![f64::NEG_INFINITY; n];
        let mut exit = vec![f64::NEG_INFINITY; n];
        let mut trans = vec![vec![f64::NEG_INFINITY; n]; n];
        for &(i, p) in &hmm.entry {
            entry[i] = ln(p);
        }
        for &(i, p) in &hmm.exit {
            exit[i] = ln(p);
        }
        for (i, outgoing) in hmm.transitions.iter().enumerate() {
            for &(j, p) in outgoing {
                trans[i][j] = ln(p);
            }
        }
        LogHmm {
            n,
            entry,
            exit,
            trans,
        }
    }

    /// `table[t][i]` = log emission of observation `t` by state `i`.
    pub fn emission_table<S: AsRef<str>>(hmm: &WordHmm, observations: &[S]) -> Vec<Vec<f64>> {
        observations
            .iter()
            .map(|o| {
                hmm.states
                    .iter()
                    .map(|s| ln(s.emission(o.as_ref())))
                    .collect()
            })
            .collect()
    }
}

/// Best state path of a word for a whole observation sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct WordAlignment {
    /// Natural log; `-inf` when no path has positive probability.
    pub log_probability: f64,
    /// One state index per observation; empty when impossible.
    pub path: Vec<usize>,
}

impl WordAlignment {
    pub fn is_possible(&self) -> bool {
        self.log_probability.is_finite()
    }

    fn impossible() -> Self {
        WordAlignment {
            log_probability: f64::NEG_INFINITY,
            path: Vec::new(),
        }
    }
}

pub fn viterbi_word<S: AsRef<str>>(observations: &[S], hmm: &WordHmm) -> WordAlignment {
    let steps = observations.len();
    if steps == 0 {
        return WordAlignment::impossible();
    }
    let model = LogHmm::new(hmm);
    let emit = LogHmm::emission_table(hmm, observations);
    let n = model.n;

    // best[t][i]: best log-score of emitting observations t.. starting in
    // state i at time t, exit included.
    let mut best = vec![vec![f64::NEG_INFINITY; n]; steps];
    let continuation =
        |best: &Vec<Vec<f64>>, t: usize, i: usize, j: usize| model.trans[i][j] + best[t + 1][j];
    for t in (0..steps).rev() {
        for i in 0..n {
            let onward = if t + 1 == steps {
                model.exit[i]
            } else {
                (0..n)
                    .map(|j| continuation(&best, t, i, j))
                    .fold(f64::NEG_INFINITY, f64::max)
            };
            best[t][i] = emit[t][i] + onward;
        }
    }

    let start_scores: Vec<f64> = (0..n).map(|i| model.entry[i] + best[0][i]).collect();
    let total = start_scores
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    if !total.is_finite() {
        return WordAlignment::impossible();
    }

    let mut path = Vec::with_capacity(steps);
    let mut state = (0..n)
        .find(|&i| reaches(start_scores[i], total))
        .expect("an optimal start exists");
    path.push(state);
    for t in 0..steps - 1 {
        let scores: Vec<f64> = (0..n).map(|j| continuation(&best, t, state, j)).collect();
        let target = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        state = (0..n)
            .find(|&j| reaches(scores[j], target))
            .expect("an optimal continuation exists");
        path.push(state);
    }
    WordAlignment {
        log_probability: total,
        path,
    }
}
