//! Schema graph and join-path inference.
//!
//! Tables are nodes; two tables are adjacent when they share at least one
//! column name. Join plans connect the tables a query touches, adding the
//! intermediate tables needed to make the set connected.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::schema::Schema;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum JoinError {
    #[error("no tables requested")]
    NothingRequested,
    #[error("unknown table `{0}`")]
    UnknownTable(String),
    #[error("tables `{from}` and `{to}` are not connected in the schema graph")]
    Disconnected { from: String, to: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemaGraph {
    nodes: Vec<String>,
    adjacency: Vec<Vec<usize>>,
    // keyed by (lower index, higher index)
    labels: BTreeMap<(usize, usize), Vec<String>>,
}

/// Build the undirected shared-column graph of a schema.
pub fn build_graph(schema: &Schema) -> SchemaGraph {
    let tables = schema.tables();
    let n = tables.len();
    let mut adjacency = vec![Vec::new(); n];
    let mut labels = BTreeMap::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let shared: Vec<String> = tables[i]
                .columns
                .iter()
                .filter(|c| tables[j].has_column(&c.name))
                .map(|c| c.name.clone())
                .collect();
            if !shared.is_empty() {
                adjacency[i].push(j);
                adjacency[j].push(i);
                labels.insert((i, j), shared);
            }
        }
    }
    for list in &mut adjacency {
        list.sort_unstable();
    }
    SchemaGraph {
        nodes: tables.iter().map(|t| t.name.clone()).collect(),
        adjacency,
        labels,
    }
}

impl SchemaGraph {
    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn node_index(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.eq_ignore_ascii_case(name))
    }

    /// Neighbors in declaration order.
    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    pub fn edge_count(&self) -> usize {
        self.labels.len()
    }

    /// Shared column names of an edge; `None` when the tables are not adjacent.
    pub fn edge_label(&self, a: &str, b: &str) -> Option<&[String]> {
        let (a, b) = (self.node_index(a)?, self.node_index(b)?);
        self.label(a, b)
    }

    fn label(&self, a: usize, b: usize) -> Option<&[String]> {
        self.labels.get(&(a.min(b), a.max(b))).map(Vec::as_slice)
    }

    /// All edges as `(table, table, shared columns)` with the lower-declared
    /// table first.
    pub fn edges(&self) -> impl Iterator<Item = (&str, &str, &[String])> + '_ {
        self.labels.iter().map(move |(&(a, b), label)| {
            (
                self.nodes[a].as_str(),
                self.nodes[b].as_str(),
                label.as_slice(),
            )
        })
    }

    fn bfs(&self, source: usize) -> Bfs {
        let n = self.nodes.len();
        let mut dist = vec![usize::MAX; n];
        let mut parent = vec![usize::MAX; n];
        let mut order = Vec::with_capacity(n);
        let mut queue = VecDeque::new();
        dist[source] = 0;
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for &v in &self.adjacency[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    parent[v] = u;
                    queue.push_back(v);
                }
            }
        }
        Bfs {
            source,
            dist,
            parent,
            order,
        }
    }
}

/// Breadth-first search tree. Exploring neighbors in declaration order makes
/// each tree path the lexicographically smallest shortest path from `source`.
struct Bfs {
    source: usize,
    dist: Vec<usize>,
    parent: Vec<usize>,
    order: Vec<usize>,
}

impl Bfs {
    fn reachable(&self, node: usize) -> bool {
        self.dist[node] != usize::MAX
    }

    /// Path `source ..= target`; target must be reachable.
    fn path_to(&self, target: usize) -> Vec<usize> {
        let mut path = vec![target];
        let mut cur = target;
        while cur != self.source {
            cur = self.parent[cur];
            path.push(cur);
        }
        path.reverse();
        path
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct JoinCondition {
    pub left_table: String,
    pub left_column: String,
    pub right_table: String,
    pub right_column: String,
}

impl fmt::Display for JoinCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}.{} = {}.{}",
            self.left_table, self.left_column, self.right_table, self.right_column
        )
    }
}

/// Tables for the FROM clause plus the equality conditions linking them.
/// In every condition the left table precedes the right table in `tables`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct JoinPlan {
    pub tables: Vec<String>,
    pub conditions: Vec<JoinCondition>,
}

struct PlanBuilder<'g> {
    graph: &'g SchemaGraph,
    selected: Vec<bool>,
    plan: JoinPlan,
}

impl<'g> PlanBuilder<'g> {
    fn new(graph: &'g SchemaGraph, first: usize) -> Self {
        let mut selected = vec![false; graph.nodes.len()];
        selected[first] = true;
        PlanBuilder {
            graph,
            selected,
            plan: JoinPlan {
                tables: vec![graph.nodes[first].clone()],
                conditions: Vec::new(),
            },
        }
    }

    /// Walk a path whose first node is already selected, adding every node
    /// and edge along it.
    fn extend_along(&mut self, path: &[usize]) {
        debug_assert!(self.selected[path[0]]);
        for step in path.windows(2) {
            let (from, to) = (step[0], step[1]);
            debug_assert!(!self.selected[to]);
            self.selected[to] = true;
            self.plan.tables.push(self.graph.nodes[to].clone());
            let label = self
                .graph
                .label(from, to)
                .expect("path follows graph edges");
            for column in label {
                self.plan.conditions.push(JoinCondition {
                    left_table: self.graph.nodes[from].clone(),
                    left_column: column.clone(),
                    right_table: self.graph.nodes[to].clone(),
                    right_column: column.clone(),
                });
            }
        }
    }
}

/// Connect `required` tables into a join plan.
///
/// Two tables are linked by a shortest path. Three tables are linked by a
/// minimum tree through the best meeting table (exact for unweighted
/// graphs). Any further table is attached through its shortest path to the
/// nearest already selected table. Ties go to the lexicographically smallest
/// sequence of declaration indices.
pub fn join_path<S: AsRef<str>>(
    graph: &SchemaGraph,
    required: &[S],
) -> Result<JoinPlan, JoinError> {
    let mut terminals = Vec::with_capacity(required.len());
    for name in required {
        let name = name.as_ref();
        let idx = graph
            .node_index(name)
            .ok_or_else(|| JoinError::UnknownTable(name.to_string()))?;
        terminals.push(idx);
    }
    terminals.sort_unstable();
    terminals.dedup();

    let disconnected = |a: usize, b: usize| JoinError::Disconnected {
        from: graph.nodes[a].clone(),
        to: graph.nodes[b].clone(),
    };

    let (builder, rest) = match terminals.as_slice() {
        [] => return Err(JoinError::NothingRequested),
        &[only] => (PlanBuilder::new(graph, only), &[][..]),
        &[a, b] => {
            let bfs = graph.bfs(a);
            if !bfs.reachable(b) {
                return Err(disconnected(a, b));
            }
            let mut builder = PlanBuilder::new(graph, a);
            builder.extend_along(&bfs.path_to(b));
            (builder, &[][..])
        }
        &[a, b, c, ref rest @ ..] => (steiner_three(graph, a, b, c)?, rest),
    };

    let mut builder = builder;
    for &r in rest {
        if builder.selected[r] {
            continue;
        }
        let bfs = graph.bfs(r);
        let anchor = bfs.order.iter().copied().find(|&n| builder.selected[n]);
        let Some(anchor) = anchor else {
            return Err(disconnected(terminals[0], r));
        };
        let mut path = bfs.path_to(anchor);
        path.reverse();
        builder.extend_along(&path);
    }
    Ok(builder.plan)
}

fn steiner_three(
    graph: &SchemaGraph,
    a: usize,
    b: usize,
    c: usize,
) -> Result<PlanBuilder<'_>, JoinError> {
    let searches = [graph.bfs(a), graph.bfs(b), graph.bfs(c)];
    for (x, y) in [(0, 1), (0, 2), (1, 2)] {
        let target = searches[y].source;
        if !searches[x].reachable(target) {
            return Err(JoinError::Disconnected {
                from: graph.nodes[searches[x].source].clone(),
                to: graph.nodes[target].clone(),
            });
        }
    }
    let center = (0..graph.nodes.len())
        .filter(|&v| searches.iter().all(|s| s.reachable(v)))
        .min_by_key(|&v| (searches.iter().map(|s| s.dist[v]).sum::<usize>(), v))
        .expect("terminals are mutually reachable");

    let mut builder = PlanBuilder::new(graph, a);
    builder.extend_along(&searches[0].path_to(center));
    for search in &searches[1..] {
        let mut path = search.path_to(center);
        path.reverse();
        builder.extend_along(&path);
    }
    Ok(builder)
}
