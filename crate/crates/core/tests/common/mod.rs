//! Fixtures and brute-force oracles shared by the integration suites. The
//! oracles deliberately avoid the library's algorithms: they enumerate.
#![allow(dead_code)]

use std::path::PathBuf;

use itertools::Itertools;
use nlsql_core::exec::Dataset;
use nlsql_core::ir::{LogicalOp, Predicate};
use nlsql_core::speech::{GrammarFsa, PhonemeState, WordHmm};
use nlsql_core::{
    build_graph, join_path, load_schema, Column, ColumnRef, CompareOp, Literal, Number,
    ResolvedQuery, Schema, Table, TableKind, Value, ValueKind,
};
use rand::Rng;

pub const GOLDEN_QUERY: &str = "get customer_name whose balance is greater than 3000";
pub const GOLDEN_SQL: &str = "SELECT customer.customer_name FROM customer, depositor, account \
WHERE account.balance > 3000 AND customer.customer_name = depositor.customer_name \
AND depositor.account_number = account.account_number";
pub const GOLDEN_IR: &str = "VP[select(customer_name), where(>(balance, 3000))]";

pub fn fixtures_dir() -> PathBuf {
    let here = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let local = here.join("fixtures");
    if local.is_dir() {
        local
    } else {
        here.join("../core/fixtures")
    }
}

pub fn bank_schema_path() -> PathBuf {
    fixtures_dir().join("bank/schema.toml")
}

pub fn bank_data_dir() -> PathBuf {
    fixtures_dir().join("bank/data")
}

pub fn bank_models_path() -> PathBuf {
    fixtures_dir().join("speech/bank_models.toml")
}

pub fn bank_schema() -> Schema {
    load_schema(&std::fs::read_to_string(bank_schema_path()).unwrap()).unwrap()
}

pub fn normalize_ws(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

// ---------------------------------------------------------------------------
// Graphs
// ---------------------------------------------------------------------------

/// Schema whose shared-column graph is exactly `edges` over `n` tables
/// `t0..t{n-1}`.
pub fn schema_with_edges(n: usize, edges: &[(usize, usize)]) -> Schema {
    let tables = (0..n)
        .map(|i| {
            let mut columns = vec![Column::new(format!("own_{i}"), ValueKind::Integer)];
            for &(a, b) in edges {
                if a == i || b == i {
                    columns.push(Column::new(
                        format!("k_{}_{}", a.min(b), a.max(b)),
                        ValueKind::Integer,
                    ));
                }
            }
            Table::new(format!("t{i}"), TableKind::Entity, columns)
        })
        .collect();
    Schema::new(tables).unwrap()
}

pub fn random_edges(rng: &mut impl Rng, n: usize, density: f64) -> Vec<(usize, usize)> {
    (0..n)
        .tuple_combinations()
        .filter(|_| rng.gen_bool(density))
        .collect()
}

fn connected_within(n: usize, edges: &[(usize, usize)], members: u32) -> bool {
    let first = members.trailing_zeros() as usize;
    let mut seen = 1u32 << first;
    let mut changed = true;
    while changed {
        changed = false;
        for &(a, b) in edges {
            let (ma, mb) = (1u32 << a, 1u32 << b);
            if members & ma != 0 && members & mb != 0 && (seen & ma != 0) != (seen & mb != 0) {
                seen |= ma | mb;
                changed = true;
            }
        }
    }
    let _ = n;
    seen == members
}

/// Size of the smallest node set containing `required` whose induced
/// subgraph is connected; `None` when no such set exists.
pub fn min_connected_superset(
    n: usize,
    edges: &[(usize, usize)],
    required: &[usize],
) -> Option<usize> {
    let need: u32 = required.iter().map(|&r| 1u32 << r).sum::<u32>();
    (0u32..(1 << n))
        .filter(|s| s & need == need && *s != 0)
        .filter(|&s| connected_within(n, edges, s))
        .map(|s| s.count_ones() as usize)
        .min()
}

/// True when `tables` are connected using only the edges named by `pairs`.
pub fn connected_by(tables: &[String], pairs: &[(String, String)]) -> bool {
    if tables.is_empty() {
        return false;
    }
    let mut reached = vec![tables[0].clone()];
    loop {
        let before = reached.len();
        for (a, b) in pairs {
            if reached.contains(a) && !reached.contains(b) {
                reached.push(b.clone());
            } else if reached.contains(b) && !reached.contains(a) {
                reached.push(a.clone());
            }
        }
        if reached.len() == before {
            break;
        }
    }
    tables.iter().all(|t| reached.contains(t))
}

// ---------------------------------------------------------------------------
// HMMs
// ---------------------------------------------------------------------------

fn prob_of(list: &[(usize, f64)], state: usize) -> f64 {
    list.iter()
        .filter(|&&(s, _)| s == state)
        .map(|&(_, p)| p)
        .sum()
}

fn trans_prob(hmm: &WordHmm, from: usize, to: usize) -> f64 {
    prob_of(&hmm.transitions[from], to)
}

/// Every state sequence of `hmm` for `obs`, scored in linear space.
/// Returns (log-probability, path) of the best one, ties going to the
/// lexicographically smallest path; `-inf` and an empty path when none.
pub fn enumerate_word(hmm: &WordHmm, obs: &[&str]) -> (f64, Vec<usize>) {
    let n = hmm.states.len();
    let mut best: Option<(f64, Vec<usize>)> = None;
    for path in (0..obs.len()).map(|_| 0..n).multi_cartesian_product() {
        let mut p = prob_of(&hmm.entry, path[0]);
        for (t, &s) in path.iter().enumerate() {
            p *= hmm.states[s].emission(obs[t]);
            if t + 1 < path.len() {
                p *= trans_prob(hmm, s, path[t + 1]);
            }
        }
        p *= prob_of(&hmm.exit, *path.last().unwrap());
        if p <= 0.0 {
            continue;
        }
        let lp = p.ln();
        let better = match &best {
            None => true,
            Some((b, _)) => lp > b + 1e-12,
        };
        if better {
            best = Some((lp, path));
        }
    }
    best.unwrap_or((f64::NEG_INFINITY, Vec::new()))
}

/// Log-probability, words and `(word, state)` path of a decoding.
pub type SentenceBest = (f64, Vec<String>, Vec<(String, usize)>);

/// Best (log-probability, words, state path) over every segmentation of
/// `obs` into words along accepting grammar paths and every state sequence
/// of each word. Ties within 1e-9 go to the smallest word sequence, then
/// the smallest state path.
pub fn enumerate_sentence(
    words: &[WordHmm],
    fsa: &GrammarFsa,
    obs: &[&str],
) -> Option<SentenceBest> {
    struct Search<'a> {
        words: &'a [WordHmm],
        fsa: &'a GrammarFsa,
        obs: &'a [&'a str],
        best: Option<SentenceBest>,
    }
    impl Search<'_> {
        /// Remaining factors are at most 1, so a prefix already below the
        /// best complete score can neither win nor tie.
        fn hopeless(&self, p: f64) -> bool {
            self.best.as_ref().is_some_and(|b| p.ln() < b.0 - 1e-9)
        }

        fn at_boundary(
            &mut self,
            t: usize,
            q: usize,
            p: f64,
            ws: &mut Vec<String>,
            path: &mut Vec<(String, usize)>,
        ) {
            if self.hopeless(p) {
                return;
            }
            if t == self.obs.len() {
                if self.fsa.is_accepting(q) {
                    self.offer(p.ln(), ws, path);
                }
                return;
            }
            for arc in self.fsa.arcs.iter().filter(|a| a.from == q) {
                let hmm = self.words.iter().find(|w| w.word == arc.word).unwrap();
                ws.push(arc.word.clone());
                for s in 0..hmm.states.len() {
                    let pe = prob_of(&hmm.entry, s);
                    if pe > 0.0 {
                        self.in_word(t, s, hmm, arc.to, p * pe, ws, path);
                    }
                }
                ws.pop();
            }
        }

        fn offer(&mut self, lp: f64, ws: &[String], path: &[(String, usize)]) {
            match &mut self.best {
                Some((top, bw, bp)) if lp <= *top + 1e-9 => {
                    if lp >= *top - 1e-9 && (ws, path) < (bw.as_slice(), bp.as_slice()) {
                        (*bw, *bp) = (ws.to_vec(), path.to_vec());
                    }
                    *top = top.max(lp);
                }
                _ => self.best = Some((lp, ws.to_vec(), path.to_vec())),
            }
        }

        #[allow(clippy::too_many_arguments)]
        fn in_word(
            &mut self,
            t: usize,
            s: usize,
            hmm: &WordHmm,
            to: usize,
            p: f64,
            ws: &mut Vec<String>,
            path: &mut Vec<(String, usize)>,
        ) {
            let p = p * hmm.states[s].emission(self.obs[t]);
            if p <= 0.0 || self.hopeless(p) {
                return;
            }
            path.push((hmm.word.clone(), s));
            let px = prob_of(&hmm.exit, s);
            if px > 0.0 {
                self.at_boundary(t + 1, to, p * px, ws, path);
            }
            if t + 1 < self.obs.len() {
                for j in 0..hmm.states.len() {
                    let pt = trans_prob(hmm, s, j);
                    if pt > 0.0 {
                        self.in_word(t + 1, j, hmm, to, p * pt, ws, path);
                    }
                }
            }
            path.pop();
        }
    }
    let mut search = Search {
        words,
        fsa,
        obs,
        best: None,
    };
    search.at_boundary(0, fsa.start, 1.0, &mut Vec::new(), &mut Vec::new());
    search.best
}

/// The branching "list" model: l -> {ih | iy} -> s -> t, no skips.
pub fn list_model() -> WordHmm {
    let phones = ["l", "ih", "iy", "s", "t"];
    let states = phones
        .iter()
        .map(|&ph| {
            let mut emissions = std::collections::BTreeMap::new();
            emissions.insert(ph.to_string(), 0.85);
            for other in phones.iter().filter(|&&o| o != ph) {
                emissions.insert(other.to_string(), 0.15 / 4.0);
            }
            PhonemeState {
                phoneme: ph.to_string(),
                emissions,
            }
        })
        .collect();
    WordHmm::new(
        "list",
        states,
        vec![
            vec![(1, 0.55), (2, 0.45)],
            vec![(3, 1.0)],
            vec![(3, 1.0)],
            vec![(4, 1.0)],
            vec![],
        ],
        vec![(0, 1.0)],
        vec![(4, 1.0)],
    )
    .unwrap()
}

fn normalized(rng: &mut impl Rng, k: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
    let sum: f64 = raw.iter().sum();
    raw.iter().map(|r| r / sum).collect()
}

/// Random left-to-right word HMM over `alphabet` with `n` states. Some
/// emissions and transitions are zeroed to create impossible paths.
pub fn random_word(rng: &mut impl Rng, name: &str, n: usize, alphabet: &[&str]) -> WordHmm {
    let states = (0..n)
        .map(|i| {
            let support: Vec<&str> = alphabet
                .iter()
                .copied()
                .filter(|_| rng.gen_bool(0.7))
                .collect();
            let support = if support.is_empty() {
                vec![alphabet[i % alphabet.len()]]
            } else {
                support
            };
            let probs = normalized(rng, support.len());
            PhonemeState {
                phoneme: support[0].to_string(),
                emissions: support.iter().map(|s| s.to_string()).zip(probs).collect(),
            }
        })
        .collect();
    let mut transitions = Vec::with_capacity(n);
    let mut exit = Vec::new();
    for i in 0..n {
        // targets i..n plus the exit (index n)
        let targets: Vec<usize> = (i..=n)
            .filter(|&j| j == n || j == i + 1 || rng.gen_bool(0.6))
            .collect();
        let probs = normalized(rng, targets.len());
        let mut out = Vec::new();
        for (j, p) in targets.into_iter().zip(probs) {
            if j == n {
                exit.push((i, p));
            } else {
                out.push((j, p));
            }
        }
        transitions.push(out);
    }
    let entry_states: Vec<usize> = (0..n).filter(|&i| i == 0 || rng.gen_bool(0.3)).collect();
    let entry = entry_states
        .iter()
        .copied()
        .zip(normalized(rng, entry_states.len()))
        .collect();
    WordHmm::new(name, states, transitions, entry, exit).unwrap()
}

// ---------------------------------------------------------------------------
// Executor reference
// ---------------------------------------------------------------------------

fn ref_eq(a: &Value, b: &Value) -> bool {
    let num = |v: &Value| match v {
        Value::Integer(i) => Some(*i as f64),
        Value::Real(r) => Some(*r),
        _ => None,
    };
    match (a, b) {
        (Value::Text(x), Value::Text(y)) => x == y,
        _ => matches!((num(a), num(b)), (Some(x), Some(y)) if x == y),
    }
}

fn ref_pred(p: &Predicate<ColumnRef>, lookup: &dyn Fn(&ColumnRef) -> Value) -> bool {
    match p {
        Predicate::Comparison {
            column,
            op,
            literal,
        } => {
            let v = lookup(column);
            let ord = match (&v, literal) {
                (Value::Text(s), Literal::Text(l)) => Some(s.as_str().cmp(l.as_str())),
                (Value::Integer(i), Literal::Number(n)) => {
                    (*i as f64).partial_cmp(&n.as_str().parse::<f64>().unwrap())
                }
                (Value::Real(r), Literal::Number(n)) => {
                    r.partial_cmp(&n.as_str().parse::<f64>().unwrap())
                }
                _ => None,
            };
            match (ord, op.symbol()) {
                (None, _) => false,
                (Some(o), ">") => o.is_gt(),
                (Some(o), "<") => o.is_lt(),
                (Some(o), "=") => o.is_eq(),
                (Some(o), ">=") => o.is_ge(),
                (Some(o), "<=") => o.is_le(),
                (Some(o), "<>") => o.is_ne(),
                _ => unreachable!(),
            }
        }
        Predicate::Connective { op, left, right } => {
            let (l, r) = (ref_pred(left, lookup), ref_pred(right, lookup));
            match op {
                LogicalOp::And => l && r,
                LogicalOp::Or => l || r,
            }
        }
    }
}

/// Full cross product in plan order, filtered and projected.
pub fn reference_execute(rq: &ResolvedQuery, ds: &Dataset) -> Vec<Vec<Value>> {
    let tables: Vec<_> = rq
        .join_plan
        .tables
        .iter()
        .map(|t| ds.table(t).unwrap())
        .collect();
    let mut out = Vec::new();
    for combo in tables
        .iter()
        .map(|t| 0..t.rows.len())
        .multi_cartesian_product()
    {
        let lookup = |r: &ColumnRef| -> Value {
            let ti = rq
                .join_plan
                .tables
                .iter()
                .position(|t| *t == r.table)
                .unwrap();
            let ci = tables[ti]
                .header
                .iter()
                .position(|h| *h == r.column)
                .unwrap();
            tables[ti].rows[combo[ti]][ci].clone()
        };
        let joined = rq.join_plan.conditions.iter().all(|c| {
            ref_eq(
                &lookup(&ColumnRef::new(&c.left_table, &c.left_column)),
                &lookup(&ColumnRef::new(&c.right_table, &c.right_column)),
            )
        });
        if joined && rq.predicate.as_ref().is_none_or(|p| ref_pred(p, &lookup)) {
            out.push(rq.select_refs.iter().map(&lookup).collect());
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Query generation
// ---------------------------------------------------------------------------

pub const VERBS: &[&str] = &["get", "show", "find", "list", "display", "give"];
pub const INTROS: &[&str] = &["whose", "where", "with", "having"];
pub const COMPARATORS: &[(&str, &str)] = &[
    ("greater than", ">"),
    ("less than", "<"),
    ("equal to", "="),
    ("equals", "="),
    ("not equal to", "<>"),
    ("at least", ">="),
    ("greater than or equal to", ">="),
    ("at most", "<="),
    ("less than or equal to", "<="),
];
pub const NOISE: &[&str] = &["the", "all", "is", "are", "a", "an", "please", "me"];

/// A grammatical query as lexical units (multi-word phrases and quoted
/// literals stay whole) together with its expected IR text.
#[derive(Debug, Clone)]
pub struct GeneratedQuery {
    pub units: Vec<String>,
    pub expected_ir: String,
}

impl GeneratedQuery {
    pub fn text(&self) -> String {
        self.units.join(" ")
    }

    pub fn with_noise(&self, inserts: &[(usize, &str)]) -> String {
        let mut units = self.units.clone();
        let mut inserts = inserts.to_vec();
        inserts.sort_by_key(|&(at, _)| std::cmp::Reverse(at));
        for (at, word) in inserts {
            units.insert(at.min(units.len()), word.to_string());
        }
        units.join(" ")
    }
}

fn random_case(rng: &mut impl Rng, word: &str) -> String {
    match rng.gen_range(0..4) {
        0 => word.to_ascii_uppercase(),
        1 => {
            let mut c = word.chars();
            c.next()
                .map(|f| f.to_ascii_uppercase().to_string() + c.as_str())
                .unwrap_or_default()
        }
        _ => word.to_string(),
    }
}

/// A numeral as typed plus its canonical spelling.
fn random_number(rng: &mut impl Rng) -> (String, String) {
    let int = rng.gen_range(0..100_000u32).to_string();
    let frac = if rng.gen_bool(0.4) {
        let mut f = rng.gen_range(0..1000u32).to_string();
        while f.ends_with('0') {
            f.pop();
        }
        f
    } else {
        String::new()
    };
    let negative = rng.gen_bool(0.25);
    let magnitude = if frac.is_empty() {
        int.clone()
    } else {
        format!("{int}.{frac}")
    };
    let canonical = if negative && magnitude != "0" {
        format!("-{magnitude}")
    } else {
        magnitude
    };

    let mut typed = String::new();
    if negative {
        typed.push('-');
    } else if rng.gen_bool(0.2) {
        typed.push('+');
    }
    typed.push_str(&"0".repeat(rng.gen_range(0..3)));
    typed.push_str(&int);
    let pad = rng.gen_range(0..3);
    if !frac.is_empty() || pad > 0 {
        typed.push('.');
        typed.push_str(&frac);
        typed.push_str(&"0".repeat(pad));
        if frac.is_empty() && pad == 0 {
            typed.push('0');
        }
    }
    (typed, canonical)
}

/// Random query over `schema` from the query grammar. Column types are
/// ignored, so the result parses but need not resolve.
pub fn generate_query(rng: &mut impl Rng, schema: &Schema) -> GeneratedQuery {
    let columns = schema.column_names();
    let verb = VERBS[rng.gen_range(0..VERBS.len())];
    let mut units = vec![random_case(rng, verb)];

    let wanted = rng.gen_range(1..=3.min(columns.len()));
    let selected: Vec<&str> = rand::seq::index::sample(rng, columns.len(), wanted)
        .into_iter()
        .map(|i| columns[i])
        .collect();
    for (k, c) in selected.iter().enumerate() {
        if k > 0 {
            units.push(random_case(rng, "and"));
        }
        units.push(random_case(rng, c));
    }
    let mut ir = format!("VP[select({})", selected.join(", "));

    if rng.gen_bool(0.2) {
        let t = &schema.tables()[rng.gen_range(0..schema.tables().len())].name;
        units.push(random_case(rng, "of"));
        units.push(random_case(rng, t));
        ir.push_str(&format!(", of({t})"));
    }

    if rng.gen_bool(0.7) {
        let intro = INTROS[rng.gen_range(0..INTROS.len())];
        units.push(random_case(rng, intro));
        let mut predicate = String::new();
        for k in 0..rng.gen_range(1..=3) {
            let connective = if rng.gen_bool(0.5) { "and" } else { "or" };
            if k > 0 {
                units.push(random_case(rng, connective));
            }
            let column = &columns[rng.gen_range(0..columns.len())];
            let (phrase, symbol) = COMPARATORS[rng.gen_range(0..COMPARATORS.len())];
            units.push(random_case(rng, column));
            units.push(phrase.split(' ').map(|w| random_case(rng, w)).join(" "));
            let literal = if rng.gen_bool(0.7) {
                let (typed, canonical) = random_number(rng);
                units.push(typed);
                canonical
            } else {
                let body: String = (0..rng.gen_range(0..8))
                    .map(|_| b"aZ 7-x"[rng.gen_range(0..6)] as char)
                    .collect();
                units.push(format!("'{body}'"));
                format!("'{body}'")
            };
            let comparison = format!("{symbol}({column}, {literal})");
            predicate = if k == 0 {
                comparison
            } else {
                format!("{connective}({predicate}, {comparison})")
            };
        }
        ir.push_str(&format!(", where({predicate})"));
    }
    ir.push(']');
    GeneratedQuery {
        units,
        expected_ir: ir,
    }
}

// ---------------------------------------------------------------------------
// Random executor plans
// ---------------------------------------------------------------------------

fn random_literal(rng: &mut impl Rng, ds: &Dataset, col: &ColumnRef, kind: ValueKind) -> Literal {
    let rows = &ds.table(&col.table).unwrap().rows;
    let idx = ds
        .table(&col.table)
        .unwrap()
        .header
        .iter()
        .position(|h| *h == col.column)
        .unwrap();
    let sample = &rows[rng.gen_range(0..rows.len())][idx];
    match (kind, sample) {
        (ValueKind::Text, Value::Text(s)) if rng.gen_bool(0.8) => Literal::Text(s.clone()),
        (ValueKind::Text, _) => Literal::Text("nobody".into()),
        (_, Value::Integer(i)) if rng.gen_bool(0.7) => {
            Literal::Number(Number::parse(&i.to_string()).unwrap())
        }
        (_, Value::Real(r)) if rng.gen_bool(0.7) => {
            Literal::Number(Number::parse(&r.to_string()).unwrap())
        }
        _ => Literal::Number(Number::parse(&rng.gen_range(0..1_000_000).to_string()).unwrap()),
    }
}

fn random_comparison(
    rng: &mut impl Rng,
    ds: &Dataset,
    columns: &[(ColumnRef, ValueKind)],
) -> Predicate<ColumnRef> {
    let (col, kind) = columns[rng.gen_range(0..columns.len())].clone();
    let ops: &[CompareOp] = if kind.is_numeric() {
        &[
            CompareOp::Gt,
            CompareOp::Lt,
            CompareOp::Eq,
            CompareOp::Ne,
            CompareOp::Ge,
            CompareOp::Le,
        ]
    } else {
        &[CompareOp::Eq, CompareOp::Ne]
    };
    let op = ops[rng.gen_range(0..ops.len())];
    let literal = random_literal(rng, ds, &col, kind);
    Predicate::comparison(col, op, literal)
}

pub fn random_plan(rng: &mut impl Rng, ds: &Dataset) -> ResolvedQuery {
    let schema = bank_schema();
    let graph = build_graph(&schema);
    let names: Vec<&str> = schema.tables().iter().map(|t| t.name.as_str()).collect();
    let wanted: Vec<&str> = (0..rng.gen_range(1..=3))
        .map(|_| names[rng.gen_range(0..names.len())])
        .collect();
    let mut join_plan = join_path(&graph, &wanted).unwrap();
    if join_plan.tables.len() > 3 {
        join_plan.tables.truncate(2);
        join_plan.conditions.clear();
    }
    if rng.gen_bool(0.15) {
        join_plan.conditions.clear();
    }
    let columns: Vec<(ColumnRef, ValueKind)> = join_plan
        .tables
        .iter()
        .flat_map(|t| {
            schema
                .table(t)
                .unwrap()
                .columns
                .iter()
                .map(move |c| (ColumnRef::new(t, &c.name), c.value_kind))
        })
        .collect();
    let select_refs = (0..rng.gen_range(1..=3))
        .map(|_| columns[rng.gen_range(0..columns.len())].0.clone())
        .collect();
    let predicate = match rng.gen_range(0..4) {
        0 => None,
        1 | 2 => Some(random_comparison(rng, ds, &columns)),
        _ => {
            let op = if rng.gen_bool(0.5) {
                LogicalOp::And
            } else {
                LogicalOp::Or
            };
            let (l, r) = (
                random_comparison(rng, ds, &columns),
                random_comparison(rng, ds, &columns),
            );
            Some(Predicate::connect(op, l, r))
        }
    };
    ResolvedQuery {
        select_refs,
        predicate,
        join_plan,
    }
}

// ---------------------------------------------------------------------------
// Random grammars
// ---------------------------------------------------------------------------

pub fn small_grammar(rng: &mut impl Rng, words: &[&str]) -> GrammarFsa {
    let q = rng.gen_range(2..=4);
    let names: Vec<String> = (0..q).map(|i| format!("q{i}")).collect();
    let mut arcs: Vec<(String, String, String)> = Vec::new();
    // a guaranteed route q0 -> q{last}
    for i in 0..q - 1 {
        arcs.push((
            names[i].clone(),
            words[rng.gen_range(0..words.len())].to_string(),
            names[i + 1].clone(),
        ));
    }
    for _ in 0..rng.gen_range(0..4) {
        arcs.push((
            names[rng.gen_range(0..q)].clone(),
            words[rng.gen_range(0..words.len())].to_string(),
            names[rng.gen_range(0..q)].clone(),
        ));
    }
    let mut accepting = vec![names[q - 1].clone()];
    if rng.gen_bool(0.3) {
        accepting.push(names[rng.gen_range(0..q - 1)].clone());
    }
    GrammarFsa::new(&names, &names[0], &accepting, &arcs).unwrap()
}

/// Observations sampled by walking the grammar and the word HMMs.
pub fn sample_stream(
    rng: &mut impl Rng,
    words: &[WordHmm],
    fsa: &GrammarFsa,
    max: usize,
) -> Vec<String> {
    let pick = |rng: &mut dyn rand::RngCore, items: &[(usize, f64)]| -> Option<usize> {
        let total: f64 = items.iter().map(|i| i.1).sum();
        let mut x = rng.gen_range(0.0..total.max(1e-12));
        for &(i, p) in items {
            if x < p {
                return Some(i);
            }
            x -= p;
        }
        items.last().map(|i| i.0)
    };
    let mut out = Vec::new();
    let mut q = fsa.start;
    while out.len() < max {
        let arcs: Vec<_> = fsa.arcs.iter().filter(|a| a.from == q).collect();
        if arcs.is_empty() || (fsa.is_accepting(q) && rng.gen_bool(0.4)) {
            break;
        }
        let arc = arcs[rng.gen_range(0..arcs.len())];
        let hmm = words.iter().find(|w| w.word == arc.word).unwrap();
        let mut s = pick(rng, &hmm.entry).unwrap();
        loop {
            let emissions: Vec<(String, f64)> = hmm.states[s]
                .emissions
                .iter()
                .map(|(k, v)| (k.clone(), *v))
                .collect();
            let idx: Vec<(usize, f64)> = emissions
                .iter()
                .enumerate()
                .map(|(i, e)| (i, e.1))
                .collect();
            out.push(emissions[pick(rng, &idx).unwrap()].0.clone());
            let exit_p: f64 = hmm.exit.iter().filter(|e| e.0 == s).map(|e| e.1).sum();
            if rng.gen_bool(exit_p.clamp(0.0, 1.0)) || hmm.transitions[s].is_empty() {
                break;
            }
            s = pick(rng, &hmm.transitions[s]).unwrap();
        }
        q = arc.to;
    }
    out
}
