//! Lattice points of flow polytopes and vector partition functions.

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::diagram::{Node, Template, VertexId};
use crate::error::{Error, Result};
use crate::poly::{interpolate, rat, MultiPoly};
use rand::Rng;

/// Nonnegative integer flows on a directed graph with prescribed
/// divergence `d_v = inflow - outflow` at every vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlowProblem {
    n_vertices: usize,
    edges: Vec<(usize, usize)>,
    d: Vec<i64>,
}

impl FlowProblem {
    pub fn new(n_vertices: usize, edges: Vec<(usize, usize)>, d: Vec<i64>) -> Result<Self> {
        if d.len() != n_vertices {
            return Err(Error::InvalidQuery(format!("{} divergences for {} vertices", d.len(), n_vertices)));
        }
        if edges.iter().any(|&(s, t)| s >= n_vertices || t >= n_vertices || s == t) {
            return Err(Error::InvalidQuery("edge endpoint out of range or loop".into()));
        }
        if d.iter().sum::<i64>() != 0 {
            return Err(Error::InvalidQuery("divergences must sum to 0".into()));
        }
        Ok(FlowProblem { n_vertices, edges, d })
    }

    /// The flow problem underlying a template: edges in canonical order,
    /// `x` values at the labels, white divergences, `k` at blacks.
    pub fn from_template(t: &Template, l_div: &[i64], r_div: &[i64], k: i64) -> Result<Self> {
        if l_div.len() != t.l_attach().len() || r_div.len() != t.r_attach().len() {
            return Err(Error::InvalidQuery("label divergences do not match the template".into()));
        }
        let mut d = vec![0i64; t.num_vertices()];
        for (p, node) in t.nodes().iter().enumerate() {
            d[p] = match node {
                Node::Black => k,
                Node::Gray { .. } => 0,
                Node::White { div, .. } => *div,
            };
        }
        for (i, &v) in l_div.iter().enumerate() {
            d[t.vertex_index(VertexId::L(i))] = v;
        }
        for (i, &v) in r_div.iter().enumerate() {
            d[t.vertex_index(VertexId::R(i))] = v;
        }
        let edges = t
            .edges()
            .iter()
            .map(|e| (t.vertex_index(e.source), t.vertex_index(e.target)))
            .collect();
        FlowProblem::new(t.num_vertices(), edges, d)
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn d(&self) -> &[i64] {
        &self.d
    }

    /// Scales the whole divergence vector by `t`.
    pub fn dilate(&self, t: i64) -> Self {
        FlowProblem { n_vertices: self.n_vertices, edges: self.edges.clone(), d: self.d.iter().map(|v| v * t).collect() }
    }

    /// Vertex-by-edge matrix with `+1` at the head and `-1` at the tail, so
    /// that `A w = d`.
    pub fn incidence_matrix(&self) -> Vec<Vec<i64>> {
        let mut a = vec![vec![0i64; self.edges.len()]; self.n_vertices];
        for (j, &(s, t)) in self.edges.iter().enumerate() {
            a[s][j] -= 1;
            a[t][j] += 1;
        }
        a
    }

    fn components(&self) -> Vec<usize> {
        let mut comp = vec![usize::MAX; self.n_vertices];
        let adj = self.undirected_adjacency();
        let mut next = 0;
        for start in 0..self.n_vertices {
            if comp[start] != usize::MAX {
                continue;
            }
            comp[start] = next;
            let mut stack = vec![start];
            while let Some(v) = stack.pop() {
                for &(u, _) in &adj[v] {
                    if comp[u] == usize::MAX {
                        comp[u] = next;
                        stack.push(u);
                    }
                }
            }
            next += 1;
        }
        comp
    }

    fn undirected_adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.n_vertices];
        for (j, &(s, t)) in self.edges.iter().enumerate() {
            adj[s].push((t, j));
            adj[t].push((s, j));
        }
        adj
    }

    /// Affine dimension of the polytope when it has a strictly positive
    /// point: `|E| - rank(A)`.
    pub fn dimension(&self) -> usize {
        let comps = self.components().into_iter().max().map_or(0, |m| m + 1);
        self.edges.len() + comps - self.n_vertices
    }

    /// Edge indices of some directed cycle, if one exists.
    pub fn find_cycle(&self) -> Option<Vec<usize>> {
        let mut out: Vec<Vec<(usize, usize)>> = vec![Vec::new(); self.n_vertices];
        for (j, &(s, t)) in self.edges.iter().enumerate() {
            out[s].push((t, j));
        }
        // 0 = unvisited, 1 = on stack, 2 = done
        let mut state = vec![0u8; self.n_vertices];
        let mut via = vec![usize::MAX; self.n_vertices];
        for root in 0..self.n_vertices {
            if state[root] != 0 {
                continue;
            }
            let mut stack = vec![(root, 0usize)];
            state[root] = 1;
            while let Some(&mut (v, ref mut i)) = stack.last_mut() {
                if *i < out[v].len() {
                    let (u, j) = out[v][*i];
                    *i += 1;
                    match state[u] {
                        0 => {
                            state[u] = 1;
                            via[u] = j;
                            stack.push((u, 0));
                        }
                        1 => {
                            let mut cycle = vec![j];
                            let mut w = v;
                            while w != u {
                                let e = via[w];
                                cycle.push(e);
                                w = self.edges[e].0;
                            }
                            cycle.reverse();
                            return Some(cycle);
                        }
                        _ => {}
                    }
                } else {
                    state[v] = 2;
                    stack.pop();
                }
            }
        }
        None
    }

    /// Visits every integer flow with all weights `>= 1` (strict) or
    /// `>= 0`, in lexicographic order of the free-edge weights.
    pub fn for_each_point<F: FnMut(&[u64])>(&self, strict: bool, f: F) -> Result<()> {
        CompiledFlow::new(self.n_vertices, self.edges.clone())?.for_each_point(&self.d, strict, f);
        Ok(())
    }

    pub fn lattice_points(&self, strict: bool) -> Result<Vec<Vec<u64>>> {
        let mut out = Vec::new();
        self.for_each_point(strict, |w| out.push(w.to_vec()))?;
        Ok(out)
    }

    /// `Σ π_Y(w)` over the lattice points.
    pub fn weighted_count(&self, y: &WeightFunctional, strict: bool) -> Result<u128> {
        let mut acc: u128 = 0;
        let mut overflow = false;
        self.for_each_point(strict, |w| match acc.checked_add(y.eval(w)) {
            Some(v) => acc = v,
            None => overflow = true,
        })?;
        if overflow {
            return Err(Error::Overflow);
        }
        Ok(acc)
    }
}

/// A tree-edge weight as an affine function of the free-edge weights: the
/// constant is `sign · Σ_{v ∈ members} d_v`.
#[derive(Clone, Debug)]
struct TreeExpr {
    edge: usize,
    members: Vec<usize>,
    sign: i64,
    coef: Vec<i64>,
}

/// The cycle-space parametrization of the flows on a fixed acyclic graph,
/// reusable across divergence vectors.
#[derive(Clone, Debug)]
pub struct CompiledFlow {
    n_edges: usize,
    exprs: Vec<TreeExpr>,
    free: Vec<usize>,
    components: Vec<Vec<usize>>,
}

impl CompiledFlow {
    pub fn new(n_vertices: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        let shape = FlowProblem { n_vertices, edges, d: vec![0; n_vertices] };
        if let Some(ray) = shape.find_cycle() {
            return Err(Error::Unbounded { ray });
        }
        let edges = &shape.edges;
        let adj = shape.undirected_adjacency();
        let mut parent_edge = vec![usize::MAX; n_vertices];
        let mut visited = vec![false; n_vertices];
        let mut order = Vec::with_capacity(n_vertices);
        let mut in_tree = vec![false; edges.len()];
        let mut components = Vec::new();
        for root in 0..n_vertices {
            if visited[root] {
                continue;
            }
            visited[root] = true;
            let start = order.len();
            order.push(root);
            let mut head = start;
            while head < order.len() {
                let v = order[head];
                head += 1;
                for &(u, j) in &adj[v] {
                    if !visited[u] {
                        visited[u] = true;
                        parent_edge[u] = j;
                        in_tree[j] = true;
                        order.push(u);
                    }
                }
            }
            components.push(order[start..].to_vec());
        }
        let free: Vec<usize> = (0..edges.len()).filter(|&j| !in_tree[j]).collect();
        // subtrees, leaves first
        let mut sub_members: Vec<Vec<usize>> = (0..n_vertices).map(|v| vec![v]).collect();
        let mut exprs = Vec::new();
        for &c in order.iter().rev() {
            let j = parent_edge[c];
            if j == usize::MAX {
                continue;
            }
            let (s, t) = edges[j];
            let p = if s == c { t } else { s };
            // U = subtree of c; net inflow into U equals Σ_U d
            let mut inside = vec![false; n_vertices];
            for &v in &sub_members[c] {
                inside[v] = true;
            }
            let mut coef = vec![0i64; free.len()];
            for (fi, &f) in free.iter().enumerate() {
                let (fs, ft) = edges[f];
                match (inside[fs], inside[ft]) {
                    (false, true) => coef[fi] -= 1,
                    (true, false) => coef[fi] += 1,
                    _ => {}
                }
            }
            let sign = if t == c { 1 } else { -1 };
            if sign < 0 {
                coef.iter_mut().for_each(|x| *x = -*x);
            }
            exprs.push(TreeExpr { edge: j, members: sub_members[c].clone(), sign, coef });
            let moved = std::mem::take(&mut sub_members[c]);
            sub_members[p].extend(moved);
        }
        Ok(CompiledFlow { n_edges: edges.len(), exprs, free, components })
    }

    /// Number of free (non-tree) edges, i.e. the cycle rank.
    pub fn cycle_rank(&self) -> usize {
        self.free.len()
    }

    /// Visits every integer flow with divergence `d` and all weights
    /// `>= 1` (strict) or `>= 0`.
    pub fn for_each_point<F: FnMut(&[u64])>(&self, d: &[i64], strict: bool, mut f: F) {
        if self.components.iter().any(|c| c.iter().map(|&v| d[v]).sum::<i64>() != 0) {
            return;
        }
        let lb: i64 = if strict { 1 } else { 0 };
        let cap: i64 = d.iter().filter(|&&v| v < 0).map(|v| -v).sum();
        if cap < lb && self.n_edges > 0 {
            return;
        }
        let c0: Vec<i64> = self.exprs.iter().map(|e| e.sign * e.members.iter().map(|&v| d[v]).sum::<i64>()).collect();
        let mut assigned = vec![0i64; self.free.len()];
        let mut w = vec![0u64; self.n_edges];
        self.dfs(0, &c0, lb, cap, &mut assigned, &mut w, &mut f);
    }

    #[allow(clippy::too_many_arguments)]
    fn dfs<F: FnMut(&[u64])>(&self, j: usize, c0: &[i64], lb: i64, cap: i64, assigned: &mut [i64], w: &mut [u64], f: &mut F) {
        if j == self.free.len() {
            for (e, &c) in self.exprs.iter().zip(c0) {
                let v = c + e.coef.iter().zip(assigned.iter()).map(|(c, a)| c * a).sum::<i64>();
                if v < lb {
                    return;
                }
                w[e.edge] = v as u64;
            }
            for (fi, &fe) in self.free.iter().enumerate() {
                w[fe] = assigned[fi] as u64;
            }
            f(w);
            return;
        }
        let (mut lo, mut hi) = (lb, cap);
        for (e, &c) in self.exprs.iter().zip(c0) {
            let cj = e.coef[j];
            if cj == 0 {
                continue;
            }
            let mut val = c;
            let (mut rest_min, mut rest_max) = (0i64, 0i64);
            for (i, &ci) in e.coef.iter().enumerate() {
                if i < j {
                    val += ci * assigned[i];
                } else if i > j {
                    if ci > 0 {
                        rest_min += ci * lb;
                        rest_max += ci * cap;
                    } else {
                        rest_min += ci * cap;
                        rest_max += ci * lb;
                    }
                }
            }
            // lb <= val + cj*x + rest <= cap
            let need_low = lb - val - rest_max;
            let need_high = cap - val - rest_min;
            if cj > 0 {
                lo = lo.max(div_ceil(need_low, cj));
                hi = hi.min(need_high.div_euclid(cj));
            } else {
                lo = lo.max(div_ceil(-need_high, -cj));
                hi = hi.min((-need_low).div_euclid(-cj));
            }
        }
        for x in lo..=hi {
            assigned[j] = x;
            self.dfs(j + 1, c0, lb, cap, assigned, w, f);
        }
        assigned[j] = 0;
    }
}

fn div_ceil(a: i64, b: i64) -> i64 {
    -((-a).div_euclid(b))
}

/// `π_Y(z) = Π_{i ∈ Y} z_i`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct WeightFunctional {
    y: Vec<usize>,
}

impl WeightFunctional {
    pub fn new(mut y: Vec<usize>, m: usize) -> Result<Self> {
        y.sort_unstable();
        y.dedup();
        if y.iter().any(|&i| i >= m) {
            return Err(Error::InvalidQuery(format!("weight index out of range 0..{m}")));
        }
        Ok(WeightFunctional { y })
    }

    pub fn empty() -> Self {
        WeightFunctional::default()
    }

    pub fn indices(&self) -> &[usize] {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn eval(&self, z: &[u64]) -> u128 {
        self.y.iter().map(|&i| z[i] as u128).product()
    }
}

/// A pointed multiset of integer vectors with a positivity certificate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VectorConfig {
    vectors: Vec<Vec<i64>>,
    dim: usize,
    certificate: Vec<i64>,
}

impl VectorConfig {
    /// Searches small integer functionals for a certificate.
    pub fn new(vectors: Vec<Vec<i64>>) -> Result<Self> {
        let dim = vectors.first().map_or(0, Vec::len);
        if vectors.iter().any(|v| v.len() != dim) {
            return Err(Error::InvalidQuery("vectors must share one dimension".into()));
        }
        for bound in 1..=4i64 {
            let mut cand = vec![-bound; dim];
            loop {
                if vectors.iter().all(|v| dot(&cand, v) > 0) {
                    return Ok(VectorConfig { vectors, dim, certificate: cand });
                }
                if !next_in_box(&mut cand, bound) {
                    break;
                }
            }
        }
        Err(Error::NotPointed)
    }

    pub fn with_certificate(vectors: Vec<Vec<i64>>, certificate: Vec<i64>) -> Result<Self> {
        let dim = certificate.len();
        if vectors.iter().any(|v| v.len() != dim) {
            return Err(Error::InvalidQuery("vectors must share one dimension".into()));
        }
        if !vectors.iter().all(|v| dot(&certificate, v) > 0) {
            return Err(Error::NotPointed);
        }
        Ok(VectorConfig { vectors, dim, certificate })
    }

    pub fn vectors(&self) -> &[Vec<i64>] {
        &self.vectors
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn certificate(&self) -> &[i64] {
        &self.certificate
    }

    pub fn rank(&self) -> usize {
        rank(&self.vectors)
    }

    /// Appends a copy of vector `i` for every `i` in `extra`.
    pub fn extend(&self, extra: &[usize]) -> VectorConfig {
        let mut vectors = self.vectors.clone();
        vectors.extend(extra.iter().map(|&i| self.vectors[i].clone()));
        VectorConfig { vectors, dim: self.dim, certificate: self.certificate.clone() }
    }

    /// Visits every `z >= 0` with `Σ z_i x_i = c`. Coefficients outside a
    /// basis are enumerated under the certificate budget; the basis
    /// coefficients are then solved exactly.
    pub fn for_each_point<F: FnMut(&[u64])>(&self, c: &[i64], mut f: F) -> Result<()> {
        if c.len() != self.dim {
            return Err(Error::InvalidQuery("target has the wrong dimension".into()));
        }
        let budget = dot(&self.certificate, c);
        if budget < 0 {
            return Ok(());
        }
        let (basis, nonbasis) = split_basis(&self.vectors);
        let r = basis.len();
        let rows = independent_rows(&basis.iter().map(|&i| self.vectors[i].clone()).collect::<Vec<_>>());
        // square r×r block, row-major
        let block: Vec<Vec<i64>> = rows.iter().map(|&row| basis.iter().map(|&j| self.vectors[j][row]).collect()).collect();
        let det = det_i128(&block);
        let adj = adjugate(&block);
        let costs: Vec<i64> = self.vectors.iter().map(|v| dot(&self.certificate, v)).collect();
        let mut z = vec![0u64; self.vectors.len()];
        let mut rhs: Vec<i64> = c.to_vec();
        let ctx = SolveCtx { cfg: self, basis: &basis, nonbasis: &nonbasis, rows: &rows, det, adj: &adj, costs: &costs, r };
        ctx.dfs(0, budget, &mut rhs, &mut z, &mut f);
        Ok(())
    }

    pub fn partition_function(&self, c: &[i64]) -> Result<u128> {
        let mut n: u128 = 0;
        self.for_each_point(c, |_| n += 1)?;
        Ok(n)
    }

    pub fn weighted_partition_function(&self, y: &WeightFunctional, c: &[i64]) -> Result<u128> {
        if y.indices().iter().any(|&i| i >= self.vectors.len()) {
            return Err(Error::InvalidQuery("weight index out of range".into()));
        }
        let mut acc: u128 = 0;
        let mut overflow = false;
        self.for_each_point(c, |z| match acc.checked_add(y.eval(z)) {
            Some(v) => acc = v,
            None => overflow = true,
        })?;
        if overflow {
            return Err(Error::Overflow);
        }
        Ok(acc)
    }
}

struct SolveCtx<'a> {
    cfg: &'a VectorConfig,
    basis: &'a [usize],
    nonbasis: &'a [usize],
    rows: &'a [usize],
    det: i128,
    adj: &'a [Vec<i128>],
    costs: &'a [i64],
    r: usize,
}

impl SolveCtx<'_> {
    fn dfs<F: FnMut(&[u64])>(&self, j: usize, budget: i64, rhs: &mut [i64], z: &mut [u64], f: &mut F) {
        if j == self.nonbasis.len() {
            // z_B = adj · rhs_rows / det
            let mut zb = vec![0i64; self.r];
            for (i, slot) in zb.iter_mut().enumerate() {
                let num: i128 = (0..self.r).map(|k| self.adj[i][k] * rhs[self.rows[k]] as i128).sum();
                if num % self.det != 0 {
                    return;
                }
                let q = num / self.det;
                if q < 0 {
                    return;
                }
                *slot = q as i64;
            }
            for row in 0..self.cfg.dim {
                let s: i64 = self.basis.iter().zip(&zb).map(|(&b, &q)| self.cfg.vectors[b][row] * q).sum();
                if s != rhs[row] {
                    return;
                }
            }
            for (&b, &q) in self.basis.iter().zip(&zb) {
                z[b] = q as u64;
            }
            f(z);
            return;
        }
        let col = self.nonbasis[j];
        let v = &self.cfg.vectors[col];
        let cost = self.costs[col];
        let mut n = 0i64;
        loop {
            z[col] = n as u64;
            self.dfs(j + 1, budget - n * cost, rhs, z, f);
            if (n + 1) * cost > budget {
                break;
            }
            n += 1;
            for (rv, vv) in rhs.iter_mut().zip(v) {
                *rv -= vv;
            }
        }
        for (rv, vv) in rhs.iter_mut().zip(v) {
            *rv += vv * n;
        }
        z[col] = 0;
    }
}

fn dot(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn next_in_box(v: &mut [i64], bound: i64) -> bool {
    for x in v.iter_mut().rev() {
        if *x < bound {
            *x += 1;
            return true;
        }
        *x = -bound;
    }
    false
}

/// Rank of a list of column vectors.
pub fn rank(vectors: &[Vec<i64>]) -> usize {
    split_basis(vectors).0.len()
}

/// Greedy column basis: indices of a maximal independent prefix-greedy set,
/// and the remaining indices.
fn split_basis(vectors: &[Vec<i64>]) -> (Vec<usize>, Vec<usize>) {
    let mut basis = Vec::new();
    let mut rest = Vec::new();
    let mut chosen: Vec<Vec<i64>> = Vec::new();
    for (i, v) in vectors.iter().enumerate() {
        chosen.push(v.clone());
        if matrix_rank(&chosen) == chosen.len() {
            basis.push(i);
        } else {
            chosen.pop();
            rest.push(i);
        }
    }
    (basis, rest)
}

/// Indices of `r` rows making the `d × r` column block nonsingular.
fn independent_rows(cols: &[Vec<i64>]) -> Vec<usize> {
    let d = cols.first().map_or(0, Vec::len);
    let mut rows = Vec::new();
    let mut chosen: Vec<Vec<i64>> = Vec::new();
    for row in 0..d {
        chosen.push(cols.iter().map(|c| c[row]).collect());
        if matrix_rank(&chosen) == chosen.len() {
            rows.push(row);
        } else {
            chosen.pop();
        }
    }
    rows
}

/// Rank of a list of vectors (treated as rows), by exact elimination.
fn matrix_rank(rows: &[Vec<i64>]) -> usize {
    let mut m: Vec<Vec<BigRational>> = rows.iter().map(|r| r.iter().map(|&v| rat(v)).collect()).collect();
    let ncols = m.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        for i in r + 1..m.len() {
            if m[i][c].is_zero() {
                continue;
            }
            let f = &m[i][c] / &m[r][c];
            for j in c..ncols {
                let d = &f * &m[r][j];
                m[i][j] -= d;
            }
        }
        r += 1;
    }
    r
}

/// Determinant by fraction-free elimination.
pub fn det_i128(m: &[Vec<i64>]) -> i128 {
    let n = m.len();
    if n == 0 {
        return 1;
    }
    let mut a: Vec<Vec<i128>> = m.iter().map(|r| r.iter().map(|&v| v as i128).collect()).collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| a[i][c] != 0) else {
            return 0;
        };
        if p != c {
            a.swap(p, c);
            sign = -sign;
        }
        for i in c + 1..n {
            for j in c + 1..n {
                a[i][j] = (a[c][c] * a[i][j] - a[i][c] * a[c][j]) / prev;
            }
            a[i][c] = 0;
        }
        prev = a[c][c];
    }
    sign * a[n - 1][n - 1]
}

fn adjugate(m: &[Vec<i64>]) -> Vec<Vec<i128>> {
    let n = m.len();
    let mut adj = vec![vec![0i128; n]; n];
    for i in 0..n {
        for j in 0..n {
            let minor: Vec<Vec<i64>> = (0..n)
                .filter(|&r| r != j)
                .map(|r| (0..n).filter(|&c| c != i).map(|c| m[r][c]).collect())
                .collect();
            let s = if (i + j) % 2 == 0 { 1 } else { -1 };
            adj[i][j] = s * det_i128(&minor);
        }
    }
    adj
}

/// True iff every `r × r` minor of the matrix with the given columns lies in
/// `{-1, 0, 1}`, `r` being its rank.
pub fn unimodularity_check(columns: &[Vec<i64>]) -> bool {
    let r = rank(columns);
    if r == 0 {
        return true;
    }
    let d = columns[0].len();
    let m = columns.len();
    let row_sets = combinations(d, r);
    let col_sets = combinations(m, r);
    for rows in &row_sets {
        for cols in &col_sets {
            let block: Vec<Vec<i64>> = rows.iter().map(|&i| cols.iter().map(|&j| columns[j][i]).collect()).collect();
            if det_i128(&block).abs() > 1 {
                return false;
            }
        }
    }
    true
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    go(0, n, k, &mut cur, &mut out);
    out
}

/// Both sides of the inclusion-exclusion identity for `P_{X,π_Y}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InclusionExclusion {
    pub weighted: u128,
    pub alternating: i128,
}

impl InclusionExclusion {
    pub fn holds(&self) -> bool {
        i128::try_from(self.weighted).is_ok_and(|w| w == self.alternating)
    }
}

/// `P_{X,π_Y}(c)` against `Σ_{T⊆Y} (-1)^{|Y-T|} P_{X∪T}(c)`, each side
/// enumerated on its own.
pub fn inclusion_exclusion_check(x: &VectorConfig, y: &WeightFunctional, c: &[i64]) -> Result<InclusionExclusion> {
    let weighted = x.weighted_partition_function(y, c)?;
    let ys = y.indices();
    let mut alternating: i128 = 0;
    for mask in 0u32..(1 << ys.len()) {
        let t: Vec<usize> = ys.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, &v)| v).collect();
        let count = x.extend(&t).partition_function(c)? as i128;
        let sign = if (ys.len() - t.len()) % 2 == 0 { 1 } else { -1 };
        alternating += sign * count;
    }
    Ok(InclusionExclusion { weighted, alternating })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EhrhartRow {
    pub t: u64,
    pub closed: u128,
    pub interior: u128,
}

/// Weighted lattice-point counts of the dilates `t·P` and of their
/// strictly positive parts.
pub fn weighted_ehrhart_data(p: &FlowProblem, y: &WeightFunctional, t_max: u64) -> Result<Vec<EhrhartRow>> {
    if let Some(ray) = p.find_cycle() {
        return Err(Error::Unbounded { ray });
    }
    (1..=t_max)
        .map(|t| {
            let q = p.dilate(t as i64);
            Ok(EhrhartRow { t, closed: q.weighted_count(y, false)?, interior: q.weighted_count(y, true)? })
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct ReciprocityReport {
    pub dim: usize,
    pub degree: u32,
    pub closed_polynomial: MultiPoly,
    /// `(t, fitted value at -t, (-1)^degree · interior count at t)`
    pub checks: Vec<(u64, BigRational, BigRational)>,
}

impl ReciprocityReport {
    pub fn holds(&self) -> bool {
        self.checks.iter().all(|(_, a, b)| a == b)
    }
}

/// Fits the closed weighted count as a polynomial of degree `dim + |Y|`
/// through `t = 1..=degree+2` (one point more than needed) and compares its
/// values at `-t` with the signed interior counts for `t = 1..=t_check`.
pub fn reciprocity_check(p: &FlowProblem, y: &WeightFunctional, t_check: u64) -> Result<ReciprocityReport> {
    let dim = p.dimension();
    let degree = (dim + y.len()) as u32;
    let t_max = (degree as u64 + 2).max(t_check);
    let rows = weighted_ehrhart_data(p, y, t_max)?;
    let samples: Vec<(Vec<i64>, BigRational)> = rows
        .iter()
        .take(degree as usize + 2)
        .map(|r| (vec![r.t as i64], BigRational::from_integer(r.closed.into())))
        .collect();
    let closed_polynomial = interpolate(&samples, degree, &["t".to_string()])?;
    let sign = if degree % 2 == 0 { BigRational::one() } else { -BigRational::one() };
    let checks = rows
        .iter()
        .take(t_check as usize)
        .map(|r| {
            let fitted = closed_polynomial.eval_i64(&[-(r.t as i64)]);
            let interior = &sign * BigRational::from_integer(r.interior.into());
            (r.t, fitted, interior)
        })
        .collect();
    Ok(ReciprocityReport { dim, degree, closed_polynomial, checks })
}

/// A random connected acyclic flow problem with at most `max_cycle_rank`
/// independent cycles and a strictly positive solution.
pub fn random_flow_problem<R: Rng>(rng: &mut R, max_cycle_rank: usize) -> FlowProblem {
    let n = rng.gen_range(2..6);
    let mut edges = Vec::new();
    for v in 1..n {
        edges.push((rng.gen_range(0..v), v));
    }
    for _ in 0..rng.gen_range(0..=max_cycle_rank) {
        let a = rng.gen_range(0..n - 1);
        edges.push((a, rng.gen_range(a + 1..n)));
    }
    let mut d = vec![0i64; n];
    for &(s, t) in &edges {
        let w = rng.gen_range(1..4);
        d[s] -= w;
        d[t] += w;
    }
    FlowProblem::new(n, edges, d).expect("divergences of a flow sum to zero")
}

/// A random pointed configuration in dimension ≤ 3 with ≤ 5 vectors, a
/// weight on ≤ 2 of them and a right-hand side with entries in `[-6, 6]`.
pub fn random_pointed_config<R: Rng>(rng: &mut R) -> (VectorConfig, WeightFunctional, Vec<i64>) {
    loop {
        let d = rng.gen_range(1..=3);
        let m = rng.gen_range(1..=5);
        let vectors: Vec<Vec<i64>> = (0..m)
            .map(|_| loop {
                let v: Vec<i64> = (0..d).map(|_| rng.gen_range(-1..=2)).collect();
                if v.iter().any(|&x| x != 0) {
                    break v;
                }
            })
            .collect();
        let Ok(x) = VectorConfig::new(vectors.clone()) else {
            continue;
        };
        let mut c = vec![0i64; d];
        for v in &vectors {
            let z = rng.gen_range(0..=2);
            for (ci, vi) in c.iter_mut().zip(v) {
                *ci += z * vi;
            }
        }
        if c.iter().any(|v| v.abs() > 6) {
            continue;
        }
        let mut y: Vec<usize> = (0..m).filter(|_| rng.gen_bool(0.4)).collect();
        y.truncate(2);
        let y = WeightFunctional::new(y, m).expect("indices in range");
        return (x, y, c);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use proptest::prelude::*;

    #[test]
    fn path_has_single_point() {
        let p = FlowProblem::new(3, vec![(0, 1), (1, 2)], vec![-1, 0, 1]).unwrap();
        assert_eq!(p.lattice_points(false).unwrap(), vec![vec![1, 1]]);
    }

    #[test]
    fn zero_divergence_gives_origin_only() {
        let p = FlowProblem::new(3, vec![(0, 1), (1, 2), (0, 2)], vec![0, 0, 0]).unwrap();
        assert_eq!(p.lattice_points(false).unwrap(), vec![vec![0, 0, 0]]);
        assert!(p.lattice_points(true).unwrap().is_empty());
    }

    #[test]
    fn directed_cycle_is_unbounded() {
        let p = FlowProblem::new(3, vec![(0, 1), (1, 2), (2, 0)], vec![0, 0, 0]).unwrap();
        let err = p.lattice_points(false).unwrap_err();
        assert_eq!(err, Error::Unbounded { ray: vec![0, 1, 2] });
    }

    #[test]
    fn figure1_completion_is_unique() {
        let d = fixtures::figure1();
        let t = d.template();
        let x = d.derived().x;
        let (l, r) = x.split_at(t.l_attach().len());
        let p = FlowProblem::from_template(t, l, r, 2).unwrap();
        let pts = p.lattice_points(true).unwrap();
        assert_eq!(pts.len(), 1);
        let expected: Vec<u64> = t.edges().iter().map(|e| d.weights().get(e.slot)).collect();
        assert_eq!(pts[0], expected);
        // brute force over gray weights <= 10
        let mut hits = 0;
        for a in 1..=10u64 {
            for b in 1..=10u64 {
                for c in 1..=10u64 {
                    let mut w = d.weights().clone();
                    w.gray = vec![[a, a], [b, b], [c, c]];
                    let cand = crate::diagram::FloorDiagram::new(t.clone(), w).unwrap();
                    if cand.validate(2).is_ok() {
                        hits += 1;
                    }
                }
            }
        }
        assert_eq!(hits, 1);
    }

    #[test]
    fn partition_function_examples() {
        let x = VectorConfig::new(vec![vec![1, 0], vec![0, 1], vec![1, 1]]).unwrap();
        assert_eq!(x.partition_function(&[1, 1]).unwrap(), 2);
        assert_eq!(x.partition_function(&[0, 0]).unwrap(), 1);
        let e1 = VectorConfig::new(vec![vec![1, 0]]).unwrap();
        assert_eq!(e1.partition_function(&[0, 1]).unwrap(), 0);
        let one = VectorConfig::new(vec![vec![1]]).unwrap();
        let y = WeightFunctional::new(vec![0], 1).unwrap();
        assert_eq!(one.weighted_partition_function(&y, &[5]).unwrap(), 5);
        assert_eq!(
            x.weighted_partition_function(&WeightFunctional::empty(), &[3, 2]).unwrap(),
            x.partition_function(&[3, 2]).unwrap()
        );
    }

    #[test]
    fn non_pointed_is_rejected() {
        assert_eq!(VectorConfig::new(vec![vec![1], vec![-1]]), Err(Error::NotPointed));
        assert_eq!(VectorConfig::new(vec![vec![0, 0]]), Err(Error::NotPointed));
    }

    #[test]
    fn unimodularity_examples() {
        // positive roots of A_2
        assert!(unimodularity_check(&[vec![1, -1, 0], vec![1, 0, -1], vec![0, 1, -1]]));
        assert!(!unimodularity_check(&[vec![2]]));
        let d = fixtures::figure1();
        let t = d.template();
        let p = FlowProblem::from_template(t, &[-2, -2, -1], &[1], 2).unwrap();
        let a = p.incidence_matrix();
        let cols: Vec<Vec<i64>> = (0..p.edges().len()).map(|j| a.iter().map(|r| r[j]).collect()).collect();
        assert!(unimodularity_check(&cols));
    }

    #[test]
    fn segment_ehrhart() {
        // w1 + w2 = n as a flow 0 -> 1 -> 3, 0 -> 2 -> 3 is a square; use two parallel paths
        let n = 3;
        let p = FlowProblem::new(2, vec![(0, 1), (0, 1)], vec![-n, n]).unwrap();
        let rows = weighted_ehrhart_data(&p, &WeightFunctional::empty(), 4).unwrap();
        for r in rows {
            assert_eq!(r.closed, (r.t as i64 * n + 1) as u128);
            assert_eq!(r.interior, (r.t as i64 * n - 1) as u128);
        }
        let rep = reciprocity_check(&p, &WeightFunctional::new(vec![0], 2).unwrap(), 3).unwrap();
        assert!(rep.holds());
    }

    fn brute_force(vectors: &[Vec<i64>], y: &[usize], c: &[i64], bound: u64) -> u128 {
        let m = vectors.len();
        let mut z = vec![0u64; m];
        let mut total = 0u128;
        loop {
            let ok = (0..c.len()).all(|r| vectors.iter().zip(&z).map(|(v, &zi)| v[r] * zi as i64).sum::<i64>() == c[r]);
            if ok {
                total += y.iter().map(|&i| z[i] as u128).product::<u128>();
            }
            let mut i = 0;
            loop {
                if i == m {
                    return total;
                }
                if z[i] < bound {
                    z[i] += 1;
                    break;
                }
                z[i] = 0;
                i += 1;
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn weighted_partition_matches_brute_force(
            raw in proptest::collection::vec(proptest::collection::vec(0i64..3, 2), 3),
            c in proptest::collection::vec(0i64..6, 2),
            yi in 0usize..3,
        ) {
            let vectors: Vec<Vec<i64>> = raw.into_iter().filter(|v| v.iter().any(|&x| x != 0)).collect();
            prop_assume!(!vectors.is_empty());
            let yi = yi % vectors.len();
            let x = VectorConfig::new(vectors.clone()).unwrap();
            let y = WeightFunctional::new(vec![yi], vectors.len()).unwrap();
            prop_assert_eq!(x.weighted_partition_function(&y, &c).unwrap(), brute_force(&vectors, &[yi], &c, 12));
            let ie = inclusion_exclusion_check(&x, &y, &c).unwrap();
            prop_assert!(ie.holds());
        }

        #[test]
        fn strict_points_are_a_subset(seed in 0u64..200) {
            let p = random_flow(seed);
            let all = p.lattice_points(false).unwrap();
            let strict = p.lattice_points(true).unwrap();
            prop_assert!(strict.iter().all(|w| all.contains(w)));
            prop_assert!(strict.iter().all(|w| w.iter().all(|&x| x >= 1)));
        }
    }

    fn random_flow(seed: u64) -> FlowProblem {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(2..6);
        let mut edges = Vec::new();
        for v in 1..n {
            let u = rng.gen_range(0..v);
            edges.push((u, v));
        }
        for _ in 0..rng.gen_range(0..3) {
            let a = rng.gen_range(0..n - 1);
            let b = rng.gen_range(a + 1..n);
            edges.push((a, b));
        }
        let mut d = vec![0i64; n];
        for &(s, t) in &edges {
            let w = rng.gen_range(1..4);
            d[s] -= w;
            d[t] += w;
        }
        FlowProblem::new(n, edges, d).unwrap()
    }
}
