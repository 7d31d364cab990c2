//! Marked floor diagrams and the quantities derived from them.
//!
//! A diagram has three vertex groups: unordered labeled white vertices on the
//! left (`L`) and right (`R`), and a totally ordered middle part `C` made of
//! black, gray and white vertices. Every edge points rightward and joins a
//! black vertex to a white or gray one.

use std::collections::BTreeMap;
use std::fmt;

use serde::de::{MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    Black,
    Gray,
    White,
}

/// A vertex of the ordered part `C`. Attachments are positions in `C`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Node {
    Black,
    Gray { source: usize, target: usize },
    White { div: i64, black: usize },
}

impl Node {
    pub fn color(&self) -> Color {
        match self {
            Node::Black => Color::Black,
            Node::Gray { .. } => Color::Gray,
            Node::White { .. } => Color::White,
        }
    }
}

/// Vertex identifier. `L` and `R` indices are zero-based labels; `C` is a
/// position in the ordered part.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VertexId {
    L(usize),
    C(usize),
    R(usize),
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VertexId::L(i) => write!(f, "L{}", i + 1),
            VertexId::C(p) => write!(f, "{p}"),
            VertexId::R(i) => write!(f, "R{}", i + 1),
        }
    }
}

/// Which weight slot an edge reads from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum EdgeSlot {
    L(usize),
    R(usize),
    /// Index of the white vertex among the whites of `C`, left to right.
    White(usize),
    /// Index of the gray vertex among the grays of `C`; `false` is the
    /// incoming edge (from its source black), `true` the outgoing one.
    Gray(usize, bool),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub source: VertexId,
    pub target: VertexId,
    pub slot: EdgeSlot,
}

impl Edge {
    pub fn id(&self) -> String {
        format!("{}->{}", self.source, self.target)
    }

    /// Both endpoints in `C`.
    pub fn is_internal(&self) -> bool {
        matches!(self.source, VertexId::C(_)) && matches!(self.target, VertexId::C(_))
    }

    fn sort_key(&self, len: usize) -> (i64, i64, usize) {
        let pos = |v: VertexId| match v {
            VertexId::L(_) => -1,
            VertexId::C(p) => p as i64,
            VertexId::R(_) => len as i64,
        };
        let label = match (self.source, self.target) {
            (VertexId::L(i), _) | (_, VertexId::R(i)) => i,
            _ => 0,
        };
        (pos(self.source), pos(self.target), label)
    }
}

/// A floor diagram with its free weights removed.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Template {
    nodes: Vec<Node>,
    l_attach: Vec<usize>,
    r_attach: Vec<usize>,
}

impl Template {
    /// Builds a template. Only index ranges are checked here; the floor
    /// diagram conditions are checked by [`Template::check`].
    pub fn new(nodes: Vec<Node>, l_attach: Vec<usize>, r_attach: Vec<usize>) -> Result<Self> {
        let n = nodes.len();
        let in_range = |p: &usize| *p < n;
        let nodes_ok = nodes.iter().all(|node| match node {
            Node::Black => true,
            Node::Gray { source, target } => in_range(source) && in_range(target),
            Node::White { black, .. } => in_range(black),
        });
        if !nodes_ok || !l_attach.iter().all(in_range) || !r_attach.iter().all(in_range) {
            return Err(Error::InvalidQuery("attachment refers to a position outside C".into()));
        }
        Ok(Template { nodes, l_attach, r_attach })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn l_attach(&self) -> &[usize] {
        &self.l_attach
    }

    pub fn r_attach(&self) -> &[usize] {
        &self.r_attach
    }

    pub fn num_blacks(&self) -> usize {
        self.nodes.iter().filter(|n| **n == Node::Black).count()
    }

    pub fn num_grays(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Gray { .. })).count()
    }

    pub fn num_whites_c(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::White { .. })).count()
    }

    pub fn num_vertices(&self) -> usize {
        self.nodes.len() + self.l_attach.len() + self.r_attach.len()
    }

    /// Divergence tags of the whites of `C`, left to right.
    pub fn white_divs(&self) -> Vec<i64> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::White { div, .. } => Some(*div),
                _ => None,
            })
            .collect()
    }

    /// All edges in canonical order.
    pub fn edges(&self) -> Vec<Edge> {
        let mut edges = Vec::with_capacity(self.l_attach.len() + self.r_attach.len() + self.nodes.len() * 2);
        for (i, &b) in self.l_attach.iter().enumerate() {
            edges.push(Edge { source: VertexId::L(i), target: VertexId::C(b), slot: EdgeSlot::L(i) });
        }
        for (i, &b) in self.r_attach.iter().enumerate() {
            edges.push(Edge { source: VertexId::C(b), target: VertexId::R(i), slot: EdgeSlot::R(i) });
        }
        let (mut wi, mut gi) = (0, 0);
        for (p, node) in self.nodes.iter().enumerate() {
            match *node {
                Node::Black => {}
                Node::White { black, .. } => {
                    let (s, t) = if p < black { (p, black) } else { (black, p) };
                    edges.push(Edge { source: VertexId::C(s), target: VertexId::C(t), slot: EdgeSlot::White(wi) });
                    wi += 1;
                }
                Node::Gray { source, target } => {
                    edges.push(Edge { source: VertexId::C(source), target: VertexId::C(p), slot: EdgeSlot::Gray(gi, false) });
                    edges.push(Edge { source: VertexId::C(p), target: VertexId::C(target), slot: EdgeSlot::Gray(gi, true) });
                    gi += 1;
                }
            }
        }
        let len = self.nodes.len();
        edges.sort_by_key(|e| e.sort_key(len));
        edges
    }

    /// First Betti number `|E| - |V| + #components` of the underlying graph.
    pub fn betti(&self) -> i64 {
        let edges = self.edges();
        let comps = self.components(&edges);
        edges.len() as i64 - self.num_vertices() as i64 + comps as i64
    }

    /// Genus from the vertex census, `1 - v_B + v_G`.
    pub fn census_genus(&self) -> i64 {
        1 - self.num_blacks() as i64 + self.num_grays() as i64
    }

    /// Dense index: `C` positions first, then `L` labels, then `R` labels.
    pub fn vertex_index(&self, v: VertexId) -> usize {
        let n = self.nodes.len();
        match v {
            VertexId::C(p) => p,
            VertexId::L(i) => n + i,
            VertexId::R(i) => n + self.l_attach.len() + i,
        }
    }

    fn components(&self, edges: &[Edge]) -> usize {
        let mut parent: Vec<usize> = (0..self.num_vertices()).collect();
        fn find(parent: &mut [usize], mut v: usize) -> usize {
            while parent[v] != v {
                parent[v] = parent[parent[v]];
                v = parent[v];
            }
            v
        }
        let mut comps = parent.len();
        for e in edges {
            let a = find(&mut parent, self.vertex_index(e.source));
            let b = find(&mut parent, self.vertex_index(e.target));
            if a != b {
                parent[a] = b;
                comps -= 1;
            }
        }
        comps
    }

    /// Checks the weight-independent conditions: black attachments,
    /// left-to-right orientation, connectivity and the genus census.
    pub fn check(&self) -> std::result::Result<(), Violation> {
        if self.num_blacks() == 0 {
            return Err(Violation::NoBlack);
        }
        let is_black = |p: usize| self.nodes[p] == Node::Black;
        for (i, &b) in self.l_attach.iter().enumerate() {
            if !is_black(b) {
                return Err(Violation::NonBlackEndpoint(VertexId::L(i)));
            }
        }
        for (i, &b) in self.r_attach.iter().enumerate() {
            if !is_black(b) {
                return Err(Violation::NonBlackEndpoint(VertexId::R(i)));
            }
        }
        for (p, node) in self.nodes.iter().enumerate() {
            match *node {
                Node::Black => {}
                Node::Gray { source, target } => {
                    if !is_black(source) || !is_black(target) {
                        return Err(Violation::NonBlackEndpoint(VertexId::C(p)));
                    }
                    if !(source < p && p < target) {
                        return Err(Violation::Direction(VertexId::C(p)));
                    }
                }
                Node::White { div, black } => {
                    if !is_black(black) {
                        return Err(Violation::NonBlackEndpoint(VertexId::C(p)));
                    }
                    if div == 0 || (div < 0) != (p < black) {
                        return Err(Violation::Direction(VertexId::C(p)));
                    }
                }
            }
        }
        let edges = self.edges();
        if self.components(&edges) != 1 {
            return Err(Violation::Disconnected);
        }
        let betti = edges.len() as i64 - self.num_vertices() as i64 + 1;
        if betti != self.census_genus() {
            return Err(Violation::Genus { betti, census: self.census_genus() });
        }
        Ok(())
    }
}

/// Edge weights of a diagram, grouped by edge kind.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Weights {
    pub l: Vec<u64>,
    pub r: Vec<u64>,
    /// One weight per white vertex of `C`, left to right.
    pub white: Vec<u64>,
    /// Per gray vertex of `C`, left to right: `[incoming, outgoing]`.
    pub gray: Vec<[u64; 2]>,
}

impl Weights {
    pub fn get(&self, slot: EdgeSlot) -> u64 {
        match slot {
            EdgeSlot::L(i) => self.l[i],
            EdgeSlot::R(i) => self.r[i],
            EdgeSlot::White(i) => self.white[i],
            EdgeSlot::Gray(i, out) => self.gray[i][out as usize],
        }
    }
}

/// The first violated condition found by validation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    NoBlack,
    /// An edge at this vertex does not end at a black vertex.
    NonBlackEndpoint(VertexId),
    /// The vertex sits on the wrong side of a black it is joined to.
    Direction(VertexId),
    Disconnected,
    Genus { betti: i64, census: i64 },
    ZeroWeight(String),
    WhiteWeight { vertex: VertexId, weight: u64, div: i64 },
    GrayDivergence { vertex: VertexId, div: i64 },
    BlackDivergence { vertex: VertexId, div: i64, k: u64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoBlack => write!(f, "no black vertex"),
            Violation::NonBlackEndpoint(v) => write!(f, "edge census: vertex {v} is joined to a non-black vertex"),
            Violation::Direction(v) => write!(f, "direction: vertex {v} is on the wrong side of its black vertex"),
            Violation::Disconnected => write!(f, "graph is disconnected"),
            Violation::Genus { betti, census } => {
                write!(f, "first Betti number {betti} differs from 1 - v_B + v_G = {census}")
            }
            Violation::ZeroWeight(e) => write!(f, "edge {e} has weight 0"),
            Violation::WhiteWeight { vertex, weight, div } => {
                write!(f, "white vertex {vertex}: edge weight {weight} but divergence {div}")
            }
            Violation::GrayDivergence { vertex, div } => write!(f, "gray divergence {div} != 0 at {vertex}"),
            Violation::BlackDivergence { vertex, div, k } => write!(f, "black divergence {div} != k = {k} at {vertex}"),
        }
    }
}

impl std::error::Error for Violation {}

/// A template together with positive integer edge weights.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "DiagramJson", into = "DiagramJson")]
pub struct FloorDiagram {
    template: Template,
    weights: Weights,
}

impl FloorDiagram {
    pub fn new(template: Template, weights: Weights) -> Result<Self> {
        let gray_count = template.num_grays();
        if weights.l.len() != template.l_attach.len()
            || weights.r.len() != template.r_attach.len()
            || weights.white.len() != template.num_whites_c()
            || weights.gray.len() != gray_count
        {
            return Err(Error::InvalidQuery("weight vector shape does not match the template".into()));
        }
        Ok(FloorDiagram { template, weights })
    }

    pub fn template(&self) -> &Template {
        &self.template
    }

    pub fn weights(&self) -> &Weights {
        &self.weights
    }

    fn divergences_c(&self) -> Vec<i64> {
        let mut div = vec![0i64; self.template.nodes.len()];
        for e in self.template.edges() {
            let w = self.weights.get(e.slot) as i64;
            if let VertexId::C(p) = e.source {
                div[p] -= w;
            }
            if let VertexId::C(p) = e.target {
                div[p] += w;
            }
        }
        div
    }

    /// Incoming minus outgoing weight at `v`.
    pub fn divergence(&self, v: VertexId) -> Result<i64> {
        match v {
            VertexId::L(i) if i < self.weights.l.len() => Ok(-(self.weights.l[i] as i64)),
            VertexId::R(i) if i < self.weights.r.len() => Ok(self.weights.r[i] as i64),
            VertexId::C(p) if p < self.template.nodes.len() => Ok(self.divergences_c()[p]),
            _ => Err(Error::UnknownVertex(v.to_string())),
        }
    }

    pub fn validate(&self, k: u64) -> std::result::Result<(), Violation> {
        self.template.check()?;
        for e in self.template.edges() {
            if self.weights.get(e.slot) == 0 {
                return Err(Violation::ZeroWeight(e.id()));
            }
        }
        let mut wi = 0;
        for (p, node) in self.template.nodes.iter().enumerate() {
            if let Node::White { div, .. } = node {
                let w = self.weights.white[wi];
                if w != div.unsigned_abs() {
                    return Err(Violation::WhiteWeight { vertex: VertexId::C(p), weight: w, div: *div });
                }
                wi += 1;
            }
        }
        let div = self.divergences_c();
        for (p, node) in self.template.nodes.iter().enumerate() {
            if matches!(node, Node::Gray { .. }) && div[p] != 0 {
                return Err(Violation::GrayDivergence { vertex: VertexId::C(p), div: div[p] });
            }
        }
        for (p, node) in self.template.nodes.iter().enumerate() {
            if *node == Node::Black && div[p] != k as i64 {
                return Err(Violation::BlackDivergence { vertex: VertexId::C(p), div: div[p], k });
            }
        }
        Ok(())
    }

    /// Product of the weights of edges with both endpoints in `C`.
    pub fn multiplicity(&self) -> Result<u128> {
        self.template
            .edges()
            .iter()
            .filter(|e| e.is_internal())
            .try_fold(1u128, |acc, e| acc.checked_mul(self.weights.get(e.slot) as u128).ok_or(Error::Overflow))
    }

    pub fn genus(&self) -> i64 {
        self.template.betti()
    }

    pub fn derived(&self) -> DerivedData {
        let mut x: Vec<i64> = self.weights.l.iter().map(|&w| -(w as i64)).collect();
        x.extend(self.weights.r.iter().map(|&w| w as i64));
        let y = self.template.white_divs();
        let multiplicities = MultiplicityVector::from_divergences(&x, &y);
        let b = multiplicities.b();
        DerivedData {
            a: self.template.num_blacks() as u64,
            b,
            genus: self.genus(),
            x,
            y,
            multiplicities,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("diagram serialization is infallible")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivedData {
    pub x: Vec<i64>,
    pub y: Vec<i64>,
    pub multiplicities: MultiplicityVector,
    pub a: u64,
    pub b: u64,
    pub genus: i64,
}

/// A finitely supported sequence of nonnegative counts indexed by `i >= 1`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SparseSeq(BTreeMap<u64, u64>);

impl SparseSeq {
    pub fn new() -> Self {
        SparseSeq::default()
    }

    pub fn get(&self, i: u64) -> u64 {
        self.0.get(&i).copied().unwrap_or(0)
    }

    pub fn add(&mut self, i: u64, count: u64) {
        if count > 0 {
            *self.0.entry(i).or_insert(0) += count;
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.0.iter().map(|(&i, &c)| (i, c))
    }

    /// `Σ i · count_i`
    pub fn weighted_sum(&self) -> u64 {
        self.iter().map(|(i, c)| i * c).sum()
    }

    /// `Σ count_i`
    pub fn total(&self) -> u64 {
        self.0.values().sum()
    }

    /// Parses the sparse `i:count,i:count` syntax. The empty string is the
    /// zero sequence.
    pub fn parse(s: &str) -> Result<Self> {
        let mut seq = SparseSeq::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (i, c) = part
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("expected i:count, got {part:?}")))?;
            let i: u64 = i.trim().parse().map_err(|_| Error::Parse(format!("bad index in {part:?}")))?;
            let c: u64 = c.trim().parse().map_err(|_| Error::Parse(format!("bad count in {part:?}")))?;
            if i == 0 {
                return Err(Error::Parse("indices start at 1".into()));
            }
            seq.add(i, c);
        }
        Ok(seq)
    }

    /// Digit-string notation: `α = (2,0,1)` prints as `201`, the zero
    /// sequence as `0`. Falls back to a parenthesized list when a count
    /// exceeds 9.
    pub fn compact(&self) -> String {
        let Some(&max) = self.0.keys().next_back() else {
            return "0".to_string();
        };
        let counts: Vec<u64> = (1..=max).map(|i| self.get(i)).collect();
        if counts.iter().all(|&c| c < 10) {
            counts.iter().map(|c| c.to_string()).collect()
        } else {
            let inner: Vec<String> = counts.iter().map(|c| c.to_string()).collect();
            format!("({})", inner.join(","))
        }
    }

    /// Inverse of [`SparseSeq::compact`].
    pub fn from_compact(s: &str) -> Result<Self> {
        let s = s.trim();
        let counts: Vec<u64> = if let Some(inner) = s.strip_prefix('(').and_then(|r| r.strip_suffix(')')) {
            inner
                .split(',')
                .map(|c| c.trim().parse().map_err(|_| Error::Parse(format!("bad count in {s:?}"))))
                .collect::<Result<_>>()?
        } else if !s.is_empty() && s.chars().all(|c| c.is_ascii_digit()) {
            s.chars().map(|c| c as u64 - '0' as u64).collect()
        } else {
            return Err(Error::Parse(format!("bad sequence {s:?}")));
        };
        let mut seq = SparseSeq::new();
        for (i, c) in counts.into_iter().enumerate() {
            seq.add(i as u64 + 1, c);
        }
        Ok(seq)
    }
}

impl fmt::Display for SparseSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.iter().map(|(i, c)| format!("{i}:{c}")).collect();
        f.write_str(&parts.join(","))
    }
}

/// Tangency profiles `(α, β, α̃, β̃)`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct MultiplicityVector {
    pub alpha: SparseSeq,
    pub beta: SparseSeq,
    pub alpha_tilde: SparseSeq,
    pub beta_tilde: SparseSeq,
}

impl MultiplicityVector {
    pub fn from_divergences(x: &[i64], y: &[i64]) -> Self {
        let mut mv = MultiplicityVector::default();
        for &v in x {
            if v < 0 {
                mv.alpha.add(v.unsigned_abs(), 1);
            } else if v > 0 {
                mv.alpha_tilde.add(v as u64, 1);
            }
        }
        for &v in y {
            if v < 0 {
                mv.beta.add(v.unsigned_abs(), 1);
            } else if v > 0 {
                mv.beta_tilde.add(v as u64, 1);
            }
        }
        mv
    }

    /// Parses `α,β,α̃,β̃` in compact notation, e.g. `12,201,1,11`.
    pub fn from_compact(s: &str) -> Result<Self> {
        let mut parts = Vec::new();
        let (mut depth, mut start) = (0i32, 0);
        for (i, c) in s.char_indices() {
            match c {
                '(' => depth += 1,
                ')' => depth -= 1,
                ',' if depth == 0 => {
                    parts.push(&s[start..i]);
                    start = i + 1;
                }
                _ => {}
            }
        }
        parts.push(&s[start..]);
        let [alpha, beta, alpha_tilde, beta_tilde] = parts[..] else {
            return Err(Error::Parse(format!("expected four sequences in {s:?}")));
        };
        Ok(MultiplicityVector {
            alpha: SparseSeq::from_compact(alpha)?,
            beta: SparseSeq::from_compact(beta)?,
            alpha_tilde: SparseSeq::from_compact(alpha_tilde)?,
            beta_tilde: SparseSeq::from_compact(beta_tilde)?,
        })
    }

    /// `b = Σ i (α̃_i + β̃_i)`
    pub fn b(&self) -> u64 {
        self.alpha_tilde.weighted_sum() + self.beta_tilde.weighted_sum()
    }

    /// `Σ i (α_i + β_i)`, which equals `a·k + b` for consistent data.
    pub fn negative_sum(&self) -> u64 {
        self.alpha.weighted_sum() + self.beta.weighted_sum()
    }

    pub fn n1(&self) -> usize {
        (self.alpha.total() + self.alpha_tilde.total()) as usize
    }

    pub fn n2(&self) -> usize {
        (self.beta.total() + self.beta_tilde.total()) as usize
    }

    /// Left-right sequence with negative entries first, each block sorted by
    /// decreasing absolute value.
    pub fn canonical_x(&self) -> Vec<i64> {
        let mut x = Vec::with_capacity(self.n1());
        for (i, c) in self.alpha.iter().collect::<Vec<_>>().into_iter().rev() {
            x.extend(std::iter::repeat(-(i as i64)).take(c as usize));
        }
        for (i, c) in self.alpha_tilde.iter().collect::<Vec<_>>().into_iter().rev() {
            x.extend(std::iter::repeat(i as i64).take(c as usize));
        }
        x
    }

    /// The multiset of white divergences in `C`, sorted ascending.
    pub fn c_divs(&self) -> Vec<i64> {
        let mut y = Vec::with_capacity(self.n2());
        for (i, c) in self.beta.iter() {
            y.extend(std::iter::repeat(-(i as i64)).take(c as usize));
        }
        for (i, c) in self.beta_tilde.iter() {
            y.extend(std::iter::repeat(i as i64).take(c as usize));
        }
        y.sort_unstable();
        y
    }
}

impl fmt::Display for MultiplicityVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{},{},{}",
            self.alpha.compact(),
            self.beta.compact(),
            self.alpha_tilde.compact(),
            self.beta_tilde.compact()
        )
    }
}

/// A point `(x, y)` of the lattice `Σx + Σy + a·k = 0` with nonzero entries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DivergenceSpec {
    pub x: Vec<i64>,
    pub y: Vec<i64>,
    pub k: u64,
    pub a: u64,
}

impl DivergenceSpec {
    pub fn new(x: Vec<i64>, y: Vec<i64>, k: u64, a: u64) -> Result<Self> {
        if x.iter().chain(&y).any(|&v| v == 0) {
            return Err(Error::NotInLattice("entries must be nonzero".into()));
        }
        let total: i64 = x.iter().chain(&y).sum::<i64>() + (a * k) as i64;
        if total != 0 {
            return Err(Error::NotInLattice(format!("Σx + Σy + a·k = {total}, expected 0")));
        }
        Ok(DivergenceSpec { x, y, k, a })
    }

    pub fn multiplicities(&self) -> MultiplicityVector {
        MultiplicityVector::from_divergences(&self.x, &self.y)
    }
}

// JSON form: {"c":[{"color":..,"div":..}], "l_attach":[..], "r_attach":[..],
// "gray_edges":[[s,t]..], "whitec_edges":[b..], "weights":{"u->v":w}}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct CJson {
    color: Color,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    div: Option<i64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct DiagramJson {
    c: Vec<CJson>,
    l_attach: Vec<usize>,
    r_attach: Vec<usize>,
    gray_edges: Vec<[usize; 2]>,
    whitec_edges: Vec<usize>,
    weights: OrderedWeights,
}

/// Edge-id → weight map that keeps canonical edge order on output.
#[derive(Clone, Debug, Default)]
struct OrderedWeights(Vec<(String, u64)>);

impl Serialize for OrderedWeights {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for OrderedWeights {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = OrderedWeights;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a map from edge id to weight")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> std::result::Result<Self::Value, A::Error> {
                let mut out = Vec::new();
                while let Some((k, v)) = access.next_entry::<String, u64>()? {
                    out.push((k, v));
                }
                Ok(OrderedWeights(out))
            }
        }
        deserializer.deserialize_map(V)
    }
}

impl From<FloorDiagram> for DiagramJson {
    fn from(d: FloorDiagram) -> Self {
        let t = &d.template;
        let c = t
            .nodes
            .iter()
            .map(|n| CJson {
                color: n.color(),
                div: match n {
                    Node::White { div, .. } => Some(*div),
                    _ => None,
                },
            })
            .collect();
        let gray_edges = t
            .nodes
            .iter()
            .filter_map(|n| match n {
                Node::Gray { source, target } => Some([*source, *target]),
                _ => None,
            })
            .collect();
        let whitec_edges = t
            .nodes
            .iter()
            .filter_map(|n| match n {
                Node::White { black, .. } => Some(*black),
                _ => None,
            })
            .collect();
        let weights = OrderedWeights(t.edges().iter().map(|e| (e.id(), d.weights.get(e.slot))).collect());
        DiagramJson {
            c,
            l_attach: t.l_attach.clone(),
            r_attach: t.r_attach.clone(),
            gray_edges,
            whitec_edges,
            weights,
        }
    }
}

impl TryFrom<DiagramJson> for FloorDiagram {
    type Error = Error;

    fn try_from(j: DiagramJson) -> Result<Self> {
        let mut grays = j.gray_edges.iter();
        let mut whites = j.whitec_edges.iter();
        let mut nodes = Vec::with_capacity(j.c.len());
        for (p, cv) in j.c.iter().enumerate() {
            let node = match cv.color {
                Color::Black => Node::Black,
                Color::Gray => {
                    let [source, target] = *grays
                        .next()
                        .ok_or_else(|| Error::Parse(format!("missing gray edge for position {p}")))?;
                    Node::Gray { source, target }
                }
                Color::White => Node::White {
                    div: cv.div.ok_or_else(|| Error::Parse(format!("white vertex {p} lacks div")))?,
                    black: *whites
                        .next()
                        .ok_or_else(|| Error::Parse(format!("missing whitec edge for position {p}")))?,
                },
            };
            nodes.push(node);
        }
        if grays.next().is_some() || whites.next().is_some() {
            return Err(Error::Parse("more edge entries than gray/white vertices".into()));
        }
        let template = Template::new(nodes, j.l_attach, j.r_attach)?;
        let by_id: BTreeMap<String, u64> = j.weights.0.into_iter().collect();
        let mut weights = Weights {
            l: vec![0; template.l_attach.len()],
            r: vec![0; template.r_attach.len()],
            white: vec![0; template.num_whites_c()],
            gray: vec![[0, 0]; template.num_grays()],
        };
        for e in template.edges() {
            let id = e.id();
            let w = *by_id.get(&id).ok_or_else(|| Error::Parse(format!("missing weight for edge {id}")))?;
            match e.slot {
                EdgeSlot::L(i) => weights.l[i] = w,
                EdgeSlot::R(i) => weights.r[i] = w,
                EdgeSlot::White(i) => weights.white[i] = w,
                EdgeSlot::Gray(i, out) => weights.gray[i][out as usize] = w,
            }
        }
        FloorDiagram::new(template, weights)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn figure1_black_divergence_is_two() {
        let d = fixtures::figure1();
        for (p, node) in d.template().nodes().iter().enumerate() {
            match node {
                Node::Black => assert_eq!(d.divergence(VertexId::C(p)).unwrap(), 2),
                Node::Gray { .. } => assert_eq!(d.divergence(VertexId::C(p)).unwrap(), 0),
                _ => {}
            }
        }
    }

    #[test]
    fn left_vertex_divergence_is_minus_weight() {
        let d = fixtures::single_black(3);
        assert_eq!(d.divergence(VertexId::L(0)).unwrap(), -3);
        assert!(matches!(d.divergence(VertexId::L(1)), Err(Error::UnknownVertex(_))));
        assert!(matches!(d.divergence(VertexId::C(7)), Err(Error::UnknownVertex(_))));
    }

    #[test]
    fn figure1_validates_only_for_k2() {
        let d = fixtures::figure1();
        assert_eq!(d.validate(2), Ok(()));
        assert!(matches!(d.validate(1), Err(Violation::BlackDivergence { div: 2, k: 1, .. })));
    }

    #[test]
    fn unequal_gray_weights_fail_gray_divergence() {
        let d = fixtures::figure2b();
        let mut w = d.weights().clone();
        w.gray[0] = [1, 2];
        let bad = FloorDiagram::new(d.template().clone(), w).unwrap();
        assert!(matches!(bad.validate(1), Err(Violation::GrayDivergence { div: -1, .. })));
    }

    #[test]
    fn multiplicities_of_figures() {
        assert_eq!(fixtures::figure1().multiplicity().unwrap(), 6);
        assert_eq!(fixtures::figure2a().multiplicity().unwrap(), 2);
        assert_eq!(fixtures::figure2b().multiplicity().unwrap(), 1);
        assert_eq!(fixtures::figure2c().multiplicity().unwrap(), 8);
    }

    #[test]
    fn figure1_derived_data() {
        let d = fixtures::figure1().derived();
        assert_eq!(d.x, vec![-2, -2, -1, 1]);
        assert_eq!(d.y, vec![-1, 2, -3, 1, -1]);
        assert_eq!(d.multiplicities.alpha.compact(), "12");
        assert_eq!(d.multiplicities.beta.compact(), "201");
        assert_eq!(d.multiplicities.alpha_tilde.compact(), "1");
        assert_eq!(d.multiplicities.beta_tilde.compact(), "11");
        assert_eq!((d.a, d.b, d.genus), (3, 4, 1));
    }

    #[test]
    fn figure2_bidegrees() {
        let d = fixtures::figure2b().derived();
        assert_eq!((d.a, d.b, d.genus), (2, 0, 0));
        let d = fixtures::figure2c().derived();
        assert_eq!((d.a, d.b, d.genus), (2, 2, 0));
    }

    #[test]
    fn single_black_derived() {
        for k in 1..5 {
            let d = fixtures::single_black(k);
            assert_eq!(d.validate(k), Ok(()));
            let dd = d.derived();
            assert_eq!(dd.x, vec![-(k as i64)]);
            assert!(dd.y.is_empty());
            assert_eq!((dd.a, dd.b, dd.genus), (1, 0, 0));
        }
    }

    #[test]
    fn direction_and_connectivity_violations() {
        // white with negative divergence placed after its black
        let t = Template::new(vec![Node::Black, Node::White { div: -1, black: 0 }], vec![], vec![]).unwrap();
        assert_eq!(t.check(), Err(Violation::Direction(VertexId::C(1))));
        // two blacks with nothing joining them
        let t = Template::new(vec![Node::Black, Node::Black], vec![0], vec![1]).unwrap();
        assert_eq!(t.check(), Err(Violation::Disconnected));
        // gray pointing at a white
        let t = Template::new(
            vec![Node::Black, Node::Gray { source: 0, target: 2 }, Node::White { div: 1, black: 0 }],
            vec![],
            vec![],
        )
        .unwrap();
        assert_eq!(t.check(), Err(Violation::NonBlackEndpoint(VertexId::C(1))));
    }

    #[test]
    fn genus_matches_census_on_fixtures() {
        for d in [fixtures::figure1(), fixtures::figure2a(), fixtures::figure2b(), fixtures::figure2c()] {
            assert_eq!(d.template().betti(), d.template().census_genus());
        }
    }

    #[test]
    fn json_round_trip_and_shape() {
        let d = fixtures::figure2c();
        let s = d.to_json();
        assert_eq!(
            s,
            r#"{"c":[{"color":"black"},{"color":"gray"},{"color":"black"},{"color":"white","div":2}],"l_attach":[0],"r_attach":[],"gray_edges":[[0,2]],"whitec_edges":[2],"weights":{"L1->0":2,"0->1":2,"1->2":2,"2->3":2}}"#
        );
        let back: FloorDiagram = serde_json::from_str(&s).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn json_missing_weight_is_rejected() {
        let s = r#"{"c":[{"color":"black"}],"l_attach":[0],"r_attach":[],"gray_edges":[],"whitec_edges":[],"weights":{}}"#;
        assert!(serde_json::from_str::<FloorDiagram>(s).is_err());
    }

    #[test]
    fn sparse_seq_parse_and_compact() {
        let s = SparseSeq::parse("1:2, 3:1").unwrap();
        assert_eq!(s.compact(), "201");
        assert_eq!(s.weighted_sum(), 5);
        assert_eq!(SparseSeq::parse("").unwrap().compact(), "0");
        assert!(SparseSeq::parse("0:1").is_err());
        assert!(SparseSeq::parse("2").is_err());
    }

    #[test]
    fn compact_round_trip() {
        for text in ["12,201,1,11", "0,01,0,0", "(1,0,12),0,1,0"] {
            assert_eq!(MultiplicityVector::from_compact(text).unwrap().to_string(), text);
        }
        assert!(MultiplicityVector::from_compact("1,2,3").is_err());
        assert!(MultiplicityVector::from_compact("1,x,0,0").is_err());
    }

    #[test]
    fn canonical_x_order() {
        let mv = MultiplicityVector::from_divergences(&[1, -1, -2, 3, -2], &[]);
        assert_eq!(mv.canonical_x(), vec![-2, -2, -1, 3, 1]);
    }
}
