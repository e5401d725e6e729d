//! Stabilizer, graph, CSS and toric codes, their JSON spec format, and dense
//! subspace projectors.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bits::{self, BitParseError, BitVec};
use crate::dense::{self, CMatrix};
use crate::graphlift;
use crate::pauli::{GeneratorSet, PauliError, PauliOperator};

#[derive(Debug, thiserror::Error)]
pub enum CodeError {
    #[error(transparent)]
    Pauli(#[from] PauliError),
    #[error("{field}: {source}")]
    Bits {
        field: String,
        #[source]
        source: BitParseError,
    },
    #[error("{field}: expected {expected} bits, found {found}")]
    BitLength { field: String, expected: usize, found: usize },
    #[error("self-loop at vertex {vertex}")]
    SelfLoop { vertex: usize },
    #[error("duplicate edge ({a}, {b})")]
    DuplicateEdge { a: usize, b: usize },
    #[error("vertex {vertex} out of range for {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("w[{index}] is the zero vector")]
    ZeroLogical { index: usize },
    #[error("{family} rows are dependent: GF(2) rank {rank} < {count}")]
    DependentRows { family: &'static str, rank: usize, count: usize },
    #[error("h_x row {x_row} and h_z row {z_row} overlap on an odd number of qubits")]
    NotOrthogonal { x_row: usize, z_row: usize },
    #[error("{count} stabilizer generators exceed {n} qubits")]
    TooManyGenerators { count: usize, n: usize },
    #[error("toric code needs L >= 2, got {l}")]
    ToricSize { l: usize },
    #[error("generator evolution failed: {0}")]
    Evolution(String),
    #[error("graph form does not match the code: {0}")]
    GraphForm(String),
    #[error("dense construction needs {n} qubits, above the cap of {cap}")]
    DenseCap { n: usize, cap: usize },
    #[error("invalid code spec: {0}")]
    Json(#[from] serde_json::Error),
    #[error("missing field: {0}")]
    Missing(&'static str),
}

impl CodeError {
    pub fn is_resource_limit(&self) -> bool {
        matches!(self, CodeError::DenseCap { .. } | CodeError::Pauli(PauliError::EnumerationCap { .. }))
    }
}

fn parse_rows(field: &str, rows: &[String], width: Option<usize>) -> Result<Vec<BitVec>, CodeError> {
    let mut out = Vec::with_capacity(rows.len());
    for (i, s) in rows.iter().enumerate() {
        let name = format!("{field}[{i}]");
        let v = BitVec::parse(s).map_err(|source| CodeError::Bits { field: name.clone(), source })?;
        if let Some(w) = width {
            if v.len() != w {
                return Err(CodeError::BitLength { field: name, expected: w, found: v.len() });
            }
        }
        out.push(v);
    }
    Ok(out)
}

/// Undirected simple graph on vertices `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
    adjacency: Vec<BitVec>,
}

impl Graph {
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self, CodeError> {
        let mut set = BTreeSet::new();
        let mut adjacency = vec![BitVec::zeros(n); n];
        for &(a, b) in edges {
            for v in [a, b] {
                if v >= n {
                    return Err(CodeError::VertexOutOfRange { vertex: v, n });
                }
            }
            if a == b {
                return Err(CodeError::SelfLoop { vertex: a });
            }
            if !set.insert((a.min(b), a.max(b))) {
                return Err(CodeError::DuplicateEdge { a, b });
            }
            adjacency[a].set(b, true);
            adjacency[b].set(a, true);
        }
        Ok(Self { n, edges: set, adjacency })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Edges as ordered pairs `(a, b)` with `a < b`, sorted.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn neighbors(&self, a: usize) -> &BitVec {
        &self.adjacency[a]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].get(b)
    }
}

/// `S_a = X_a ∏_{b ~ a} Z_b` for every vertex.
pub fn graph_state_generators(g: &Graph) -> GeneratorSet {
    let gens = (0..g.n())
        .map(|a| {
            PauliOperator::from_parts(BitVec::from_indices(g.n(), [a]), g.neighbors(a).clone(), 0)
                .expect("equal lengths")
        })
        .collect();
    GeneratorSet::new(g.n(), gens).expect("graph-state generators are always valid")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilizerCode {
    generators: GeneratorSet,
}

impl StabilizerCode {
    pub fn new(generators: GeneratorSet) -> Result<Self, CodeError> {
        if generators.len() > generators.n() {
            return Err(CodeError::TooManyGenerators { count: generators.len(), n: generators.n() });
        }
        // Independent Hermitian generators cannot multiply to -1: a nonempty
        // product with zero symplectic vector would be a dependency.
        Ok(Self { generators })
    }

    pub fn n(&self) -> usize {
        self.generators.n()
    }

    pub fn k(&self) -> usize {
        self.n() - self.generators.len()
    }

    /// Number of generators, `n - k`.
    pub fn r(&self) -> usize {
        self.generators.len()
    }

    pub fn generators(&self) -> &GeneratorSet {
        &self.generators
    }
}

/// Graph code `(G, W)`: basis states `Z^w |G⟩` for `w` in the span of
/// `w_basis`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphCode {
    graph: Graph,
    w_basis: Vec<BitVec>,
    ys: Vec<BitVec>,
    code: StabilizerCode,
}

impl GraphCode {
    pub fn new(graph: Graph, w_basis: Vec<BitVec>) -> Result<Self, CodeError> {
        let n = graph.n();
        for (index, w) in w_basis.iter().enumerate() {
            if w.len() != n {
                return Err(CodeError::BitLength { field: format!("w[{index}]"), expected: n, found: w.len() });
            }
            if w.is_zero() {
                return Err(CodeError::ZeroLogical { index });
            }
        }
        let rank = bits::rank(&w_basis);
        if rank < w_basis.len() {
            return Err(CodeError::DependentRows { family: "w", rank, count: w_basis.len() });
        }
        let ys = graphlift::evolve_generators(&graph, &w_basis).map_err(|e| CodeError::Evolution(e.to_string()))?;
        let gens = ys.iter().map(|y| y_operator(&graph, y)).collect();
        let code = StabilizerCode::new(GeneratorSet::new(n, gens)?)?;
        Ok(Self { graph, w_basis, ys, code })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn w_basis(&self) -> &[BitVec] {
        &self.w_basis
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn k(&self) -> usize {
        self.w_basis.len()
    }

    /// Evolved generator supports `y`, one per stabilizer generator `S^y`.
    pub fn ys(&self) -> &[BitVec] {
        &self.ys
    }

    pub fn stabilizer_code(&self) -> &StabilizerCode {
        &self.code
    }
}

/// `S^y = ∏_{a ∈ supp(y)} S_a`, multiplied in ascending vertex order.
pub fn y_operator(g: &Graph, y: &BitVec) -> PauliOperator {
    let gens = graph_state_generators(g);
    gens.product(y)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CssCode {
    n: usize,
    h_x: Vec<BitVec>,
    h_z: Vec<BitVec>,
}

impl CssCode {
    pub fn new(n: usize, h_x: Vec<BitVec>, h_z: Vec<BitVec>) -> Result<Self, CodeError> {
        for (family, rows) in [("h_x", &h_x), ("h_z", &h_z)] {
            for (i, r) in rows.iter().enumerate() {
                if r.len() != n {
                    return Err(CodeError::BitLength { field: format!("{family}[{i}]"), expected: n, found: r.len() });
                }
            }
            let rank = bits::rank(rows);
            if rank < rows.len() {
                return Err(CodeError::DependentRows { family, rank, count: rows.len() });
            }
        }
        for (x_row, a) in h_x.iter().enumerate() {
            for (z_row, b) in h_z.iter().enumerate() {
                if a.dot(b) {
                    return Err(CodeError::NotOrthogonal { x_row, z_row });
                }
            }
        }
        if h_x.len() + h_z.len() > n {
            return Err(CodeError::TooManyGenerators { count: h_x.len() + h_z.len(), n });
        }
        Ok(Self { n, h_x, h_z })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.n - self.h_x.len() - self.h_z.len()
    }

    pub fn h_x(&self) -> &[BitVec] {
        &self.h_x
    }

    pub fn h_z(&self) -> &[BitVec] {
        &self.h_z
    }

    pub fn is_dual_containing(&self) -> bool {
        self.h_x == self.h_z
    }

    pub fn x_generators(&self) -> Vec<PauliOperator> {
        self.h_x.iter().map(PauliOperator::x_type).collect()
    }

    pub fn z_generators(&self) -> Vec<PauliOperator> {
        self.h_z.iter().map(PauliOperator::z_type).collect()
    }

    /// X-type rows followed by Z-type rows.
    pub fn generators(&self) -> GeneratorSet {
        let mut gens = self.x_generators();
        gens.extend(self.z_generators());
        GeneratorSet::new(self.n, gens).expect("validated at construction")
    }

    pub fn stabilizer_code(&self) -> StabilizerCode {
        StabilizerCode::new(self.generators()).expect("validated at construction")
    }
}

/// Toric code on an `L × L` torus with one qubit per edge.
///
/// Horizontal edge `(r, c) → (r, c+1)` is qubit `r·L + c`; vertical edge
/// `(r, c) → (r+1, c)` is qubit `L² + r·L + c`. The last vertex and last
/// plaquette stabilizers are dropped to make each family independent.
pub fn toric_code(l: usize) -> Result<CssCode, CodeError> {
    if l < 2 {
        return Err(CodeError::ToricSize { l });
    }
    let (stars, plaquettes) = toric_families(l);
    CssCode::new(2 * l * l, stars[..stars.len() - 1].to_vec(), plaquettes[..plaquettes.len() - 1].to_vec())
}

/// All `L²` vertex and `L²` plaquette supports before rank reduction.
pub fn toric_families(l: usize) -> (Vec<BitVec>, Vec<BitVec>) {
    let n = 2 * l * l;
    let h = |r: usize, c: usize| (r % l) * l + (c % l);
    let v = |r: usize, c: usize| l * l + (r % l) * l + (c % l);
    let mut stars = Vec::new();
    let mut plaquettes = Vec::new();
    for r in 0..l {
        for c in 0..l {
            stars.push(BitVec::from_indices(n, [h(r, c), h(r, c + l - 1), v(r, c), v(r + l - 1, c)]));
            plaquettes.push(BitVec::from_indices(n, [h(r, c), h(r + 1, c), v(r, c), v(r, c + 1)]));
        }
    }
    (stars, plaquettes)
}

/// A graph code that becomes the target code after Hadamards on some qubits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphForm {
    pub graph_code: GraphCode,
    pub hadamard: BitVec,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CodeKind {
    Stabilizer,
    Graph(GraphCode),
    Css(CssCode),
}

/// A validated code together with whatever structure its spec carried.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Code {
    pub name: Option<String>,
    kind: CodeKind,
    stabilizer: StabilizerCode,
    graph_form: Option<GraphForm>,
}

impl Code {
    pub fn from_stabilizer(code: StabilizerCode) -> Self {
        Self { name: None, kind: CodeKind::Stabilizer, stabilizer: code, graph_form: None }
    }

    pub fn from_graph(code: GraphCode) -> Self {
        Self { name: None, stabilizer: code.stabilizer_code().clone(), kind: CodeKind::Graph(code), graph_form: None }
    }

    pub fn from_css(code: CssCode) -> Self {
        Self { name: None, stabilizer: code.stabilizer_code(), kind: CodeKind::Css(code), graph_form: None }
    }

    /// Attaches a graph form after checking that Hadamard conjugation maps the
    /// graph code's stabilizer group, signs included, onto this code's group.
    pub fn with_graph_form(mut self, form: GraphForm) -> Result<Self, CodeError> {
        let gc = form.graph_code.stabilizer_code();
        if gc.n() != self.n() || gc.r() != self.stabilizer.r() {
            return Err(CodeError::GraphForm(format!(
                "graph code has n={} with {} generators, code has n={} with {}",
                gc.n(),
                gc.r(),
                self.n(),
                self.stabilizer.r()
            )));
        }
        let expresser = self.stabilizer.generators().expresser();
        for (i, g) in gc.generators().iter().enumerate() {
            let mapped = g.hadamard_conjugate(&form.hadamard);
            match expresser.express(&mapped)? {
                Some(e) if e.sign() == Some(1) => {}
                _ => {
                    return Err(CodeError::GraphForm(format!(
                        "generator {i} maps to {mapped}, which does not stabilize the code"
                    )))
                }
            }
        }
        self.graph_form = Some(form);
        Ok(self)
    }

    pub fn kind(&self) -> &CodeKind {
        &self.kind
    }

    pub fn stabilizer(&self) -> &StabilizerCode {
        &self.stabilizer
    }

    pub fn graph_form(&self) -> Option<&GraphForm> {
        self.graph_form.as_ref()
    }

    pub fn css(&self) -> Option<&CssCode> {
        match &self.kind {
            CodeKind::Css(c) => Some(c),
            _ => None,
        }
    }

    pub fn n(&self) -> usize {
        self.stabilizer.n()
    }

    pub fn k(&self) -> usize {
        self.stabilizer.k()
    }

    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| format!("[[{},{}]]", self.n(), self.k()))
    }

    pub fn from_json(text: &str) -> Result<Self, CodeError> {
        let file: CodeFile = serde_json::from_str(text)?;
        file.build()
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} n={} k={}", self.label(), self.n(), self.k())
    }
}

/// JSON code spec.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(flatten)]
    pub spec: CodeSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph_form: Option<GraphFormSpec>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum CodeSpec {
    Stabilizer {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
        generators: Vec<String>,
    },
    Graph {
        n: usize,
        edges: Vec<[usize; 2]>,
        w: Vec<String>,
    },
    Css {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
        h_x: Vec<String>,
        h_z: Vec<String>,
    },
    Toric {
        #[serde(rename = "L")]
        l: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphFormSpec {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
    pub w: Vec<String>,
    /// Qubits carrying a Hadamard, zero-indexed.
    pub hadamard: Vec<usize>,
}

fn build_graph_code(n: usize, edges: &[[usize; 2]], w: &[String]) -> Result<GraphCode, CodeError> {
    let pairs: Vec<(usize, usize)> = edges.iter().map(|e| (e[0], e[1])).collect();
    let graph = Graph::new(n, &pairs)?;
    GraphCode::new(graph, parse_rows("w", w, Some(n))?)
}

impl CodeFile {
    pub fn build(&self) -> Result<Code, CodeError> {
        let mut code = match &self.spec {
            CodeSpec::Stabilizer { n, generators } => {
                let ops = generators.iter().map(|s| s.parse()).collect::<Result<Vec<PauliOperator>, _>>()?;
                let n = match (n, ops.first()) {
                    (Some(n), _) => *n,
                    (None, Some(p)) => p.n(),
                    (None, None) => return Err(CodeError::Missing("n")),
                };
                Code::from_stabilizer(StabilizerCode::new(GeneratorSet::new(n, ops)?)?)
            }
            CodeSpec::Graph { n, edges, w } => Code::from_graph(build_graph_code(*n, edges, w)?),
            CodeSpec::Css { n, h_x, h_z } => {
                let n = match n {
                    Some(n) => *n,
                    None => h_x.first().or(h_z.first()).map(|r| r.chars().count()).ok_or(CodeError::Missing("n"))?,
                };
                Code::from_css(CssCode::new(n, parse_rows("h_x", h_x, Some(n))?, parse_rows("h_z", h_z, Some(n))?)?)
            }
            CodeSpec::Toric { l } => Code::from_css(toric_code(*l)?),
        };
        code.name = self.name.clone();
        if let Some(form) = &self.graph_form {
            let graph_code = build_graph_code(form.n, &form.edges, &form.w)?;
            for &q in &form.hadamard {
                if q >= form.n {
                    return Err(CodeError::VertexOutOfRange { vertex: q, n: form.n });
                }
            }
            let hadamard = BitVec::from_indices(form.n, form.hadamard.iter().copied());
            code = code.with_graph_form(GraphForm { graph_code, hadamard })?;
        }
        Ok(code)
    }
}

/// `Π = ∏ (1 + g)/2` over the code generators.
pub fn subspace_projector_dense(code: &StabilizerCode, dense_cap: usize) -> Result<CMatrix, CodeError> {
    if code.n() > dense_cap {
        return Err(CodeError::DenseCap { n: code.n(), cap: dense_cap });
    }
    Ok(dense::projector_matrix(code.n(), code.generators().generators()))
}

/// The bundled worked-example codes.
pub mod fixtures {
    use super::{Code, CodeError};

    pub const NAMES: [&str; 9] = [
        "code_4_1_2",
        "five_qubit",
        "code_6_1_3",
        "code_7_1_3",
        "code_8_3_3",
        "code_9_1_3",
        "steane",
        "toric_2",
        "toric_3",
    ];

    pub fn source(name: &str) -> Option<&'static str> {
        Some(match name {
            "code_4_1_2" => include_str!("../fixtures/code_4_1_2.json"),
            "five_qubit" => include_str!("../fixtures/five_qubit.json"),
            "code_6_1_3" => include_str!("../fixtures/code_6_1_3.json"),
            "code_7_1_3" => include_str!("../fixtures/code_7_1_3.json"),
            "code_8_3_3" => include_str!("../fixtures/code_8_3_3.json"),
            "code_9_1_3" => include_str!("../fixtures/code_9_1_3.json"),
            "steane" => include_str!("../fixtures/steane.json"),
            "toric_2" => include_str!("../fixtures/toric_2.json"),
            "toric_3" => include_str!("../fixtures/toric_3.json"),
            _ => return None,
        })
    }

    /// Panics on an unknown name; fixture files are validated by the tests.
    pub fn load(name: &str) -> Result<Code, CodeError> {
        Code::from_json(source(name).unwrap_or_else(|| panic!("unknown fixture {name}")))
    }
}
