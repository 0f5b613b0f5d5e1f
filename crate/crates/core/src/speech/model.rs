//! Word HMMs and the grammar automaton, plus their TOML loader.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Deserialize;
use thiserror::Error;

use crate::schema::line_col;

/// Allowed deviation of a probability mass from 1.
pub const MASS_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("model parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("duplicate word `{0}`")]
    DuplicateWord(String),
    #[error("word `{0}` has no states")]
    NoStates(String),
    #[error("word `{word}`: state {state} emissions sum to {sum}")]
    EmissionSum {
        word: String,
        state: usize,
        sum: f64,
    },
    #[error("word `{word}`: state {state} outgoing mass (transitions plus exit) sums to {sum}")]
    TransitionSum {
        word: String,
        state: usize,
        sum: f64,
    },
    #[error("word `{word}`: entry mass sums to {sum}")]
    EntrySum { word: String, sum: f64 },
    #[error("word `{word}`: probability {value} outside [0, 1]")]
    ProbabilityRange { word: String, value: f64 },
    #[error("word `{word}`: state index {index} out of range")]
    StateOutOfRange { word: String, index: usize },
    #[error("word `{word}`: transition {from} -> {to} goes backwards")]
    NotLeftToRight {
        word: String,
        from: usize,
        to: usize,
    },
    #[error("word `{word}`: duplicate {what} for state {state}")]
    DuplicateProbability {
        word: String,
        what: &'static str,
        state: usize,
    },
    #[error("word `{word}`: symbol `{symbol}` is not in the phoneme alphabet")]
    UnknownSymbol { word: String, symbol: String },
    #[error("grammar arc uses undeclared word `{0}`")]
    UnknownWord(String),
    #[error("grammar refers to undeclared state `{0}`")]
    UnknownState(String),
    #[error("grammar declares state `{0}` twice")]
    DuplicateState(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhonemeState {
    pub phoneme: String,
    /// Observation symbol -> probability; absent symbols have probability 0.
    pub emissions: BTreeMap<String, f64>,
}

impl PhonemeState {
    pub fn emission(&self, symbol: &str) -> f64 {
        self.emissions.get(symbol).copied().unwrap_or(0.0)
    }
}

/// Left-to-right phoneme HMM for one word. Every path starts with an entry
/// probability and ends with an exit probability; each visited state emits
/// one observation.
#[derive(Debug, Clone, PartialEq)]
pub struct WordHmm {
    pub word: String,
    pub states: Vec<PhonemeState>,
    /// `transitions[i]` lists `(j, p)` with `j >= i`.
    pub transitions: Vec<Vec<(usize, f64)>>,
    pub entry: Vec<(usize, f64)>,
    pub exit: Vec<(usize, f64)>,
}

fn check_prob(word: &str, value: f64) -> Result<(), ModelError> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(ModelError::ProbabilityRange {
            word: word.to_string(),
            value,
        })
    }
}

fn unit_mass(sum: f64) -> bool {
    (sum - 1.0).abs() <= MASS_TOLERANCE
}

impl WordHmm {
    pub fn new(
        word: impl Into<String>,
        states: Vec<PhonemeState>,
        transitions: Vec<Vec<(usize, f64)>>,
        entry: Vec<(usize, f64)>,
        exit: Vec<(usize, f64)>,
    ) -> Result<Self, ModelError> {
        let hmm = WordHmm {
            word: word.into(),
            states,
            transitions,
            entry,
            exit,
        };
        hmm.validate()?;
        Ok(hmm)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    fn validate(&self) -> Result<(), ModelError> {
        let word = self.word.as_str();
        let n = self.states.len();
        if n == 0 {
            return Err(ModelError::NoStates(word.to_string()));
        }
        if self.transitions.len() != n {
            return Err(ModelError::StateOutOfRange {
                word: word.to_string(),
                index: self.transitions.len().max(n),
            });
        }
        let in_range = |index: usize| {
            if index < n {
                Ok(())
            } else {
                Err(ModelError::StateOutOfRange {
                    word: word.to_string(),
                    index,
                })
            }
        };
        let no_duplicates = |list: &[(usize, f64)], what: &'static str| {
            let mut seen = BTreeSet::new();
            for &(i, _) in list {
                if !seen.insert(i) {
                    return Err(ModelError::DuplicateProbability {
                        word: word.to_string(),
                        what,
                        state: i,
                    });
                }
            }
            Ok(())
        };

        for (i, state) in self.states.iter().enumerate() {
            for &p in state.emissions.values() {
                check_prob(word, p)?;
            }
            let sum: f64 = state.emissions.values().sum();
            if !unit_mass(sum) {
                return Err(ModelError::EmissionSum {
                    word: word.to_string(),
                    state: i,
                    sum,
                });
            }
        }

        for &(i, p) in self.entry.iter().chain(&self.exit) {
            in_range(i)?;
            check_prob(word, p)?;
        }
        no_duplicates(&self.entry, "entry")?;
        no_duplicates(&self.exit, "exit")?;
        let entry_sum: f64 = self.entry.iter().map(|&(_, p)| p).sum();
        if !unit_mass(entry_sum) {
            return Err(ModelError::EntrySum {
                word: word.to_string(),
                sum: entry_sum,
            });
        }

        for (from, outgoing) in self.transitions.iter().enumerate() {
            for &(to, p) in outgoing {
                in_range(to)?;
                check_prob(word, p)?;
                if to < from {
                    return Err(ModelError::NotLeftToRight {
                        word: word.to_string(),
                        from,
                        to,
                    });
                }
            }
            no_duplicates(outgoing, "transition")?;
            let exit: f64 = self
                .exit
                .iter()
                .filter(|&&(i, _)| i == from)
                .map(|&(_, p)| p)
                .sum();
            let sum = outgoing.iter().map(|&(_, p)| p).sum::<f64>() + exit;
            if !unit_mass(sum) {
                return Err(ModelError::TransitionSum {
                    word: word.to_string(),
                    state: from,
                    sum,
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrammarArc {
    pub from: usize,
    pub word: String,
    pub to: usize,
}

/// Word-level automaton constraining which sentences may be decoded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrammarFsa {
    pub states: Vec<String>,
    pub start: usize,
    pub accepting: BTreeSet<usize>,
    pub arcs: Vec<GrammarArc>,
}

impl GrammarFsa {
    /// Build from state names; `arcs` are `(from, word, to)` name triples.
    pub fn new<S: AsRef<str>>(
        states: &[S],
        start: &str,
        accepting: &[S],
        arcs: &[(S, S, S)],
    ) -> Result<Self, ModelError> {
        let mut index = HashMap::new();
        let mut names = Vec::with_capacity(states.len());
        for s in states {
            let s = s.as_ref();
            if index.insert(s.to_string(), names.len()).is_some() {
                return Err(ModelError::DuplicateState(s.to_string()));
            }
            names.push(s.to_string());
        }
        let lookup = |s: &str| {
            index
                .get(s)
                .copied()
                .ok_or_else(|| ModelError::UnknownState(s.to_string()))
        };
        Ok(GrammarFsa {
            start: lookup(start)?,
            accepting: accepting
                .iter()
                .map(|s| lookup(s.as_ref()))
                .collect::<Result<_, _>>()?,
            arcs: arcs
                .iter()
                .map(|(f, w, t)| {
                    Ok(GrammarArc {
                        from: lookup(f.as_ref())?,
                        word: w.as_ref().to_string(),
                        to: lookup(t.as_ref())?,
                    })
                })
                .collect::<Result<_, ModelError>>()?,
            states: names,
        })
    }

    pub fn is_accepting(&self, state: usize) -> bool {
        self.accepting.contains(&state)
    }

    /// Accepts exactly the one-word sentence `word`.
    pub fn single_word(word: &str) -> Self {
        GrammarFsa::new(
            &["start", "end"],
            "start",
            &["end"],
            &[("start", word, "end")],
        )
        .expect("well-formed")
    }
}

/// Loaded acoustic and language models.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeechModels {
    pub alphabet: Vec<String>,
    pub words: Vec<WordHmm>,
    pub grammar: GrammarFsa,
}

impl SpeechModels {
    pub fn new(
        alphabet: Vec<String>,
        words: Vec<WordHmm>,
        grammar: GrammarFsa,
    ) -> Result<Self, ModelError> {
        let symbols: BTreeSet<&str> = alphabet.iter().map(String::as_str).collect();
        let mut names = BTreeSet::new();
        for hmm in &words {
            if !names.insert(hmm.word.as_str()) {
                return Err(ModelError::DuplicateWord(hmm.word.clone()));
            }
            for state in &hmm.states {
                if let Some(bad) = state
                    .emissions
                    .keys()
                    .find(|s| !symbols.contains(s.as_str()))
                {
                    return Err(ModelError::UnknownSymbol {
                        word: hmm.word.clone(),
                        symbol: bad.clone(),
                    });
                }
            }
        }
        if let Some(arc) = grammar
            .arcs
            .iter()
            .find(|a| !names.contains(a.word.as_str()))
        {
            return Err(ModelError::UnknownWord(arc.word.clone()));
        }
        Ok(SpeechModels {
            alphabet,
            words,
            grammar,
        })
    }

    pub fn word(&self, name: &str) -> Option<&WordHmm> {
        self.words.iter().find(|w| w.word == name)
    }

    pub fn knows_symbol(&self, symbol: &str) -> bool {
        self.alphabet.iter().any(|s| s == symbol)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModels {
    phoneme_alphabet: Vec<String>,
    words: Vec<RawWord>,
    grammar: RawGrammar,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWord {
    name: String,
    states: Vec<RawState>,
    entry: Vec<RawStateProb>,
    exit: Vec<RawStateProb>,
    #[serde(default)]
    transitions: Vec<RawTransition>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawState {
    phoneme: String,
    emissions: BTreeMap<String, f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStateProb {
    state: usize,
    prob: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTransition {
    from: usize,
    to: usize,
    prob: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrammar {
    states: Vec<String>,
    start: String,
    accepting: Vec<String>,
    arcs: Vec<RawArc>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawArc {
    from: String,
    word: String,
    to: String,
}

/// Parse and validate a model-config document.
pub fn load_models(model_text: &str) -> Result<SpeechModels, ModelError> {
    let raw: RawModels = toml::from_str(model_text).map_err(|e| {
        let (line, column) = e
            .span()
            .map(|span| line_col(model_text, span.start))
            .unwrap_or((0, 0));
        ModelError::Parse {
            line,
            column,
            message: e.message().trim().to_string(),
        }
    })?;

    let mut words = Vec::with_capacity(raw.words.len());
    for rw in raw.words {
        let n = rw.states.len();
        let mut transitions = vec![Vec::new(); n];
        for t in &rw.transitions {
            if t.from >= n {
                return Err(ModelError::StateOutOfRange {
                    word: rw.name,
                    index: t.from,
                });
            }
            transitions[t.from].push((t.to, t.prob));
        }
        let states = rw
            .states
            .into_iter()
            .map(|s| PhonemeState {
                phoneme: s.phoneme,
                emissions: s.emissions,
            })
            .collect();
        let pairs = |list: Vec<RawStateProb>| list.into_iter().map(|e| (e.state, e.prob)).collect();
        words.push(WordHmm::new(
            rw.name,
            states,
            transitions,
            pairs(rw.entry),
            pairs(rw.exit),
        )?);
    }

    let g = raw.grammar;
    let arcs: Vec<(String, String, String)> =
        g.arcs.into_iter().map(|a| (a.from, a.word, a.to)).collect();
    let grammar = GrammarFsa::new(&g.states, &g.start, &g.accepting, &arcs)?;
    SpeechModels::new(raw.phoneme_alphabet, words, grammar)
}
