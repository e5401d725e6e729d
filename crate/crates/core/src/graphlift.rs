//! Stabilizer generators of a graph code and the lifted graph used by the
//! coloring strategy.
//!
//! Generators are products `S^y = ∏_{a ∈ supp(y)} S_a` of graph-state
//! generators, with `y` overlapping every logical vector `w` evenly. Two
//! generators are joined in the lifted graph when no single-qubit Pauli basis
//! measures both of them, so each independent set of the lifted graph can be
//! read off one local measurement setting.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use petgraph::graph::UnGraph;

use crate::bits::{self, BitVec};
use crate::codes::{Code, CodeKind, Graph, GraphCode};
use crate::pauli::Letter;
use crate::strategy::{validate_test, Setting, StrategyKind, TestOperator, VerificationStrategy, Weight, WeightedTest};
use crate::Error;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphLiftError {
    #[error("logical vector {index} has {found} bits, expected {expected}")]
    Length { index: usize, expected: usize, found: usize },
    #[error("evolution produced {found} generators of rank {rank}, expected {expected}")]
    RankMismatch { expected: usize, found: usize, rank: usize },
    #[error("generator {generator} overlaps logical vector {logical} oddly")]
    OddOverlap { generator: usize, logical: usize },
    #[error("block {block:?} needs two different letters on qubit {qubit}")]
    Conflict { block: Vec<usize>, qubit: usize },
}

/// `f(a, y)`: how many vertices of `supp(y)` are adjacent to `a`.
pub fn edge_count(a: usize, y: &BitVec, g: &Graph) -> usize {
    g.neighbors(a).overlap(y)
}

/// Runs the incremental generator evolution over the logical vectors in
/// order.
///
/// Vertices untouched by every logical vector keep singleton generators and
/// are listed first, in ascending order. A logical vector whose support meets
/// untouched vertices absorbs the smallest of them, `a`: generators with odd
/// overlap gain `S_a`, and the remaining newly touched vertices are chained to
/// their ascending neighbour in pairs. A logical vector inside already touched
/// vertices chains its odd-overlap generators pairwise instead. For a single
/// logical vector this pairs consecutive support elements in ascending order.
pub fn evolve_generators(g: &Graph, w_basis: &[BitVec]) -> Result<Vec<BitVec>, GraphLiftError> {
    let n = g.n();
    for (index, w) in w_basis.iter().enumerate() {
        if w.len() != n {
            return Err(GraphLiftError::Length { index, expected: n, found: w.len() });
        }
    }
    let mut untouched: BTreeSet<usize> = (0..n).collect();
    let mut touched: Vec<BitVec> = Vec::new();
    for w in w_basis {
        let inter: Vec<usize> = w.ones().filter(|a| untouched.contains(a)).collect();
        let (even, odd): (Vec<BitVec>, Vec<BitVec>) = touched.into_iter().partition(|y| !y.dot(w));
        let mut next = even;
        match inter.first() {
            None => {
                next.extend(odd.windows(2).map(|p| p[0].xor(&p[1])));
            }
            Some(&a) => {
                next.extend(odd.into_iter().map(|mut y| {
                    y.flip(a);
                    y
                }));
                next.extend(inter.windows(2).map(|p| BitVec::from_indices(n, [p[0], p[1]])));
                for b in &inter {
                    untouched.remove(b);
                }
            }
        }
        touched = next;
    }
    let mut ys: Vec<BitVec> = untouched.iter().map(|&a| BitVec::from_indices(n, [a])).collect();
    ys.extend(touched);

    for (generator, y) in ys.iter().enumerate() {
        for (logical, w) in w_basis.iter().enumerate() {
            if y.dot(w) {
                return Err(GraphLiftError::OddOverlap { generator, logical });
            }
        }
    }
    // The solutions of y·w_i = 0 form a space of dimension n - rank(W).
    let expected = bits::null_space(w_basis, n).len();
    let rank = bits::rank(&ys);
    if ys.len() != expected || rank != expected {
        return Err(GraphLiftError::RankMismatch { expected, found: ys.len(), rank });
    }
    Ok(ys)
}

/// Letter of `S^y` on qubit `a`, read from the graph alone.
pub fn generator_letter(a: usize, y: &BitVec, g: &Graph) -> Letter {
    let odd = edge_count(a, y, g) % 2 == 1;
    match (y.get(a), odd) {
        (true, false) => Letter::X,
        (true, true) => Letter::Y,
        (false, true) => Letter::Z,
        (false, false) => Letter::I,
    }
}

/// `S1S2`-style name, one-indexed.
pub fn y_label(y: &BitVec) -> String {
    y.ones().map(|a| format!("S{}", a + 1)).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiftedGraph {
    vertices: Vec<BitVec>,
    edges: BTreeSet<(usize, usize)>,
    adjacency: Vec<BTreeSet<usize>>,
}

impl LiftedGraph {
    fn from_edges(vertices: Vec<BitVec>, edges: BTreeSet<(usize, usize)>) -> Self {
        let mut adjacency = vec![BTreeSet::new(); vertices.len()];
        for &(i, j) in &edges {
            adjacency[i].insert(j);
            adjacency[j].insert(i);
        }
        Self { vertices, edges, adjacency }
    }

    pub fn vertices(&self) -> &[BitVec] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency[i].contains(&j)
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency[i].iter().copied()
    }

    /// DOT text; vertices are labelled by generator name and, when a cover is
    /// given, carry their block index as `xlabel`.
    pub fn to_dot(&self, cover: Option<&IndependenceCover>) -> String {
        let mut out = String::from("graph lifted {\n");
        for (i, y) in self.vertices.iter().enumerate() {
            match cover.and_then(|c| c.block_of(i)) {
                Some(b) => writeln!(out, "  {i} [label=\"{}\", xlabel=\"{b}\"];", y_label(y)),
                None => writeln!(out, "  {i} [label=\"{}\"];", y_label(y)),
            }
            .unwrap();
        }
        for (i, j) in self.edges() {
            writeln!(out, "  {i} -- {j};").unwrap();
        }
        out.push_str("}\n");
        out
    }
}

/// Joins two generators when some qubit sees two different non-identity
/// letters from them.
pub fn lifted_graph(g: &Graph, ys: &[BitVec]) -> LiftedGraph {
    let n = g.n();
    let letters: Vec<Vec<Letter>> = ys.iter().map(|y| (0..n).map(|a| generator_letter(a, y, g)).collect()).collect();
    let mut edges = BTreeSet::new();
    for i in 0..ys.len() {
        for j in i + 1..ys.len() {
            let clash = (0..n).any(|a| {
                let (p, q) = (letters[i][a], letters[j][a]);
                p != Letter::I && q != Letter::I && p != q
            });
            if clash {
                edges.insert((i, j));
            }
        }
    }
    LiftedGraph::from_edges(ys.to_vec(), edges)
}

/// The adjacency rules stated for a single logical vector, where every
/// generator is a singleton or a pair. Returns `None` if some generator has
/// a larger support.
pub fn lifted_graph_single_logical(g: &Graph, ys: &[BitVec]) -> Option<LiftedGraph> {
    let supports: Vec<Vec<usize>> = ys.iter().map(|y| y.ones().collect()).collect();
    if supports.iter().any(|s| s.is_empty() || s.len() > 2) {
        return None;
    }
    let d = |a: usize, b: usize| g.has_edge(a, b);
    let mut edges = BTreeSet::new();
    for i in 0..ys.len() {
        for j in i + 1..ys.len() {
            let (s, t) = (&supports[i], &supports[j]);
            let joined = match (s.len(), t.len()) {
                (1, 1) => d(s[0], t[0]),
                (1, 2) => d(s[0], t[0]) || d(s[0], t[1]),
                (2, 1) => d(t[0], s[0]) || d(t[0], s[1]),
                _ => {
                    let shared: Vec<usize> = s.iter().copied().filter(|a| t.contains(a)).collect();
                    let quiet = match shared.len() {
                        0 => {
                            let v = d(s[0], t[0]);
                            v == d(s[0], t[1]) && v == d(s[1], t[0]) && v == d(s[1], t[1])
                        }
                        1 => {
                            let mut all: Vec<usize> = s.iter().chain(t).copied().collect();
                            all.sort_unstable();
                            all.dedup();
                            let (a, b, c) = (all[0], all[1], all[2]);
                            d(a, b) == d(a, c) && d(a, b) == d(b, c)
                        }
                        _ => false,
                    };
                    !quiet
                }
            };
            if joined {
                edges.insert((i, j));
            }
        }
    }
    Some(LiftedGraph::from_edges(ys.to_vec(), edges))
}

/// Partition of the lifted-graph vertices into independent sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndependenceCover {
    blocks: Vec<Vec<usize>>,
}

impl IndependenceCover {
    /// Checks that the blocks partition the vertices and are independent.
    pub fn new(lg: &LiftedGraph, blocks: Vec<Vec<usize>>) -> Result<Self, String> {
        let mut seen = vec![false; lg.len()];
        for block in &blocks {
            if block.is_empty() {
                return Err("empty block".into());
            }
            for &v in block {
                if v >= lg.len() || seen[v] {
                    return Err(format!("vertex {v} missing from the graph or repeated"));
                }
                seen[v] = true;
            }
            for (x, &u) in block.iter().enumerate() {
                for &v in &block[x + 1..] {
                    if lg.has_edge(u, v) {
                        return Err(format!("block contains edge ({u}, {v})"));
                    }
                }
            }
        }
        if let Some(v) = seen.iter().position(|s| !s) {
            return Err(format!("vertex {v} is not covered"));
        }
        Ok(Self { blocks })
    }

    fn from_colors(colors: &[usize]) -> Self {
        let count = colors.iter().map(|c| c + 1).max().unwrap_or(0);
        let mut blocks = vec![Vec::new(); count];
        for (v, &c) in colors.iter().enumerate() {
            blocks[c].push(v);
        }
        blocks.retain(|b| !b.is_empty());
        Self { blocks }
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn block_of(&self, v: usize) -> Option<usize> {
        self.blocks.iter().position(|b| b.contains(&v))
    }
}

/// Greedy colouring: vertices by descending degree (ties by index), each
/// taking the lowest colour unused by its coloured neighbours.
pub fn independence_cover(lg: &LiftedGraph) -> IndependenceCover {
    let mut order: Vec<usize> = (0..lg.len()).collect();
    order.sort_by_key(|&v| (std::cmp::Reverse(lg.degree(v)), v));
    let mut colors = vec![usize::MAX; lg.len()];
    for v in order {
        let used: BTreeSet<usize> = lg.neighbors(v).map(|u| colors[u]).collect();
        colors[v] = (0..).find(|c| !used.contains(c)).unwrap();
    }
    IndependenceCover::from_colors(&colors)
}

/// DSATUR colouring via petgraph.
pub fn dsatur_cover(lg: &LiftedGraph) -> IndependenceCover {
    let mut graph = UnGraph::<(), ()>::new_undirected();
    let nodes: Vec<_> = (0..lg.len()).map(|_| graph.add_node(())).collect();
    for (i, j) in lg.edges() {
        graph.add_edge(nodes[i], nodes[j], ());
    }
    let (coloring, _) = petgraph::algo::dsatur_coloring(&graph);
    // Renumber colours by first appearance so block order is stable.
    let mut rename = std::collections::BTreeMap::new();
    let colors: Vec<usize> = nodes
        .iter()
        .map(|n| {
            let c = coloring[n];
            let next = rename.len();
            *rename.entry(c).or_insert(next)
        })
        .collect();
    IndependenceCover::from_colors(&colors)
}

/// The greedy cover, unless DSATUR needs strictly fewer blocks.
pub fn best_cover(lg: &LiftedGraph) -> IndependenceCover {
    let greedy = independence_cover(lg);
    let dsatur = dsatur_cover(lg);
    if dsatur.len() < greedy.len() {
        dsatur
    } else {
        greedy
    }
}

/// Per-qubit letters for one block: X or Y on qubits inside a generator's
/// support (by the parity of `f(a, y)`), Z elsewhere.
pub fn measurement_setting(block: &[usize], g: &Graph, ys: &[BitVec]) -> Result<Vec<Letter>, GraphLiftError> {
    let n = g.n();
    let mut letters = vec![None; n];
    for &i in block {
        let y = &ys[i];
        for (a, slot) in letters.iter_mut().enumerate() {
            let l = generator_letter(a, y, g);
            let wanted = match l {
                Letter::I => continue,
                // Z is the default for uninvolved qubits; it only clashes with
                // an X or Y chosen by another generator.
                Letter::Z => Letter::Z,
                other => other,
            };
            match slot {
                None => *slot = Some(wanted),
                Some(prev) if *prev == wanted => {}
                Some(_) => {
                    return Err(GraphLiftError::Conflict { block: block.to_vec(), qubit: a });
                }
            }
        }
    }
    Ok(letters.into_iter().map(|l| l.unwrap_or(Letter::Z)).collect())
}

/// Everything the coloring strategy is built from.
#[derive(Clone, Debug)]
pub struct ColoringPlan {
    pub ys: Vec<BitVec>,
    pub lifted: LiftedGraph,
    pub cover: IndependenceCover,
    pub settings: Vec<Vec<Letter>>,
}

impl ColoringPlan {
    pub fn m(&self) -> usize {
        self.cover.len()
    }
}

pub fn coloring_plan(gc: &GraphCode) -> Result<ColoringPlan, GraphLiftError> {
    let ys = gc.ys().to_vec();
    let lifted = lifted_graph(gc.graph(), &ys);
    let cover = best_cover(&lifted);
    let settings =
        cover.blocks().iter().map(|b| measurement_setting(b, gc.graph(), &ys)).collect::<Result<Vec<_>, _>>()?;
    Ok(ColoringPlan { ys, lifted, cover, settings })
}

/// Uniform strategy over the blocks of the cover; block `ℓ` requires every
/// `S^y` in it and measures with its setting.
pub fn coloring_strategy(gc: &GraphCode) -> Result<VerificationStrategy, Error> {
    let plan = coloring_plan(gc)?;
    let tests = coloring_tests(gc, &plan)?;
    let w = Weight::new(1, tests.len() as u64);
    let tests = tests.into_iter().map(|test| WeightedTest { weight: w, test }).collect();
    VerificationStrategy::new(StrategyKind::Coloring.name(), gc.stabilizer_code().clone(), tests)
}

fn coloring_tests(gc: &GraphCode, plan: &ColoringPlan) -> Result<Vec<TestOperator>, Error> {
    let gens = gc.stabilizer_code().generators().generators();
    plan.cover
        .blocks()
        .iter()
        .zip(&plan.settings)
        .map(|(block, letters)| {
            let required = block.iter().map(|&i| gens[i].clone()).collect();
            TestOperator::new(required, Setting::Local(letters.clone()))
        })
        .collect()
}

/// Coloring strategy for a graph code, or for a code carrying a graph form
/// (the graph code's tests conjugated by the form's Hadamards).
pub fn coloring_strategy_for(code: &Code) -> Result<VerificationStrategy, Error> {
    if let CodeKind::Graph(gc) = code.kind() {
        return coloring_strategy(gc);
    }
    let Some(form) = code.graph_form() else {
        return Err(Error::Inapplicable {
            strategy: StrategyKind::Coloring.name().into(),
            reason: "the code spec has neither a graph nor a graph form".into(),
        });
    };
    let base = coloring_strategy(&form.graph_code)?;
    let tests = base
        .tests()
        .iter()
        .map(|t| {
            let test = t.test.hadamard_conjugate(&form.hadamard)?;
            validate_test(code.stabilizer(), &test)?;
            Ok(WeightedTest { weight: t.weight, test })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    VerificationStrategy::new(StrategyKind::Coloring.name(), code.stabilizer().clone(), tests)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::fixtures;

    fn graph_code(name: &str) -> GraphCode {
        match fixtures::load(name).unwrap().kind() {
            crate::codes::CodeKind::Graph(gc) => gc.clone(),
            _ => panic!("{name} is not a graph code"),
        }
    }

    fn labels(ys: &[BitVec]) -> Vec<String> {
        ys.iter().map(y_label).collect()
    }

    fn letters(l: &[Letter]) -> String {
        l.iter().map(|l| l.as_char()).collect()
    }

    #[test]
    fn edge_count_examples() {
        let empty = Graph::new(4, &[]).unwrap();
        assert_eq!(edge_count(0, &BitVec::parse("1111").unwrap(), &empty), 0);
        let ring = Graph::new(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)]).unwrap();
        assert_eq!(edge_count(0, &BitVec::parse("11000").unwrap(), &ring), 1);
    }

    #[test]
    fn evolution_examples() {
        assert_eq!(labels(graph_code("code_6_1_3").ys()), ["S1S2", "S2S3", "S3S4", "S4S5", "S5S6"]);
        assert_eq!(labels(graph_code("code_9_1_3").ys()), ["S1", "S4", "S7", "S2S3", "S3S5", "S5S6", "S6S8", "S8S9"]);
        assert_eq!(labels(graph_code("code_7_1_3").ys()), ["S2", "S4", "S6", "S7", "S1S3", "S3S5"]);
        assert_eq!(labels(graph_code("code_4_1_2").ys()), ["S3", "S4", "S1S2"]);
        let ring = Graph::new(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let ys = evolve_generators(&ring, &[BitVec::parse("1000").unwrap()]).unwrap();
        assert_eq!(labels(&ys), ["S2", "S3", "S4"]);
    }

    #[test]
    fn multi_logical_evolution_spans_the_null_space() {
        let gc = graph_code("code_8_3_3");
        assert_eq!(gc.ys().len(), 5);
        assert_eq!(labels(gc.ys()), ["S1S8", "S4S5", "S2S3S4", "S3S5S7", "S3S6"]);
        let ns = bits::null_space(gc.w_basis(), 8);
        let mut both = ns.clone();
        both.extend_from_slice(gc.ys());
        assert_eq!(bits::rank(&both), 5);
    }

    #[test]
    fn published_covers() {
        let expected = [
            ("code_4_1_2", 2),
            ("five_qubit", 4),
            ("code_6_1_3", 4),
            ("code_7_1_3", 2),
            ("code_8_3_3", 5),
            ("code_9_1_3", 2),
        ];
        for (name, m) in expected {
            let plan = coloring_plan(&graph_code(name)).unwrap();
            assert_eq!(plan.m(), m, "{name}");
        }
        let plan = coloring_plan(&graph_code("five_qubit")).unwrap();
        let mut settings: Vec<String> = plan.settings.iter().map(|s| letters(s)).collect();
        settings.sort();
        assert_eq!(settings, ["YYZZZ", "ZYYZZ", "ZZYYZ", "ZZZYY"]);
        let plan = coloring_plan(&graph_code("code_9_1_3")).unwrap();
        let mut settings: Vec<String> = plan.settings.iter().map(|s| letters(s)).collect();
        settings.sort();
        assert_eq!(settings, ["XZZXZZXZZ", "ZXXZXXZXX"]);
        let plan = coloring_plan(&graph_code("code_4_1_2")).unwrap();
        let mut settings: Vec<String> = plan.settings.iter().map(|s| letters(s)).collect();
        settings.sort();
        assert_eq!(settings, ["XXZX", "ZZXZ"]);
    }

    #[test]
    fn general_rules_match_single_logical_rules() {
        for name in ["code_4_1_2", "five_qubit", "code_6_1_3", "code_7_1_3", "code_9_1_3"] {
            let gc = graph_code(name);
            let general = lifted_graph(gc.graph(), gc.ys());
            let special = lifted_graph_single_logical(gc.graph(), gc.ys()).unwrap();
            assert_eq!(general, special, "{name}");
        }
    }

    #[test]
    fn trivial_covers() {
        let single = LiftedGraph::from_edges(vec![BitVec::parse("1").unwrap()], BTreeSet::new());
        assert_eq!(single.edge_count(), 0);
        assert_eq!(independence_cover(&single).len(), 1);

        let vs: Vec<BitVec> = (0..4).map(|i| BitVec::from_indices(4, [i])).collect();
        let edgeless = LiftedGraph::from_edges(vs.clone(), BTreeSet::new());
        assert_eq!(independence_cover(&edgeless).blocks(), &[vec![0, 1, 2, 3]]);
        let all: BTreeSet<_> = (0..4).flat_map(|i| (i + 1..4).map(move |j| (i, j))).collect();
        let clique = LiftedGraph::from_edges(vs, all);
        assert_eq!(independence_cover(&clique).len(), 4);
        assert_eq!(dsatur_cover(&clique).len(), 4);
    }

    #[test]
    fn dot_export_names_generators() {
        let gc = graph_code("code_4_1_2");
        let plan = coloring_plan(&gc).unwrap();
        let dot = plan.lifted.to_dot(Some(&plan.cover));
        assert!(dot.contains("label=\"S1S2\""));
        assert!(dot.contains(" -- "));
    }
}
