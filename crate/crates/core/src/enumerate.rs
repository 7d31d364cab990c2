//! Enumeration of templates and weighted floor diagrams for a query, and a
//! fast aggregated evaluation of the weighted count `Σ μ(D)`.

use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use rayon::prelude::*;

use crate::diagram::{Color, FloorDiagram, Node, Template, Weights, EdgeSlot};
use crate::error::{BudgetKind, Error, Result};
use crate::flow::{CompiledFlow, FlowProblem};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnumerationQuery {
    a: u64,
    g: u64,
    k: u64,
    x: Vec<i64>,
    c_divs: Vec<i64>,
}

impl EnumerationQuery {
    /// `x` holds the label divergences (negative for `L`, positive for
    /// `R`); `c_divs` the multiset of white divergences in `C`.
    pub fn new(a: u64, g: u64, k: u64, x: Vec<i64>, mut c_divs: Vec<i64>) -> Result<Self> {
        if a == 0 {
            return Err(Error::ZeroA);
        }
        if x.iter().chain(&c_divs).any(|&v| v == 0) {
            return Err(Error::NotInLattice("divergence values must be nonzero".into()));
        }
        let total: i64 = x.iter().chain(&c_divs).sum::<i64>() + (a * k) as i64;
        if total != 0 {
            return Err(Error::NotInLattice(format!("Σx + Σy + a·k = {total}, expected 0")));
        }
        c_divs.sort_unstable();
        Ok(EnumerationQuery { a, g, k, x, c_divs })
    }

    pub fn a(&self) -> u64 {
        self.a
    }

    pub fn g(&self) -> u64 {
        self.g
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn x(&self) -> &[i64] {
        &self.x
    }

    /// Sorted ascending.
    pub fn c_divs(&self) -> &[i64] {
        &self.c_divs
    }

    pub fn l_divs(&self) -> Vec<i64> {
        self.x.iter().copied().filter(|&v| v < 0).collect()
    }

    pub fn r_divs(&self) -> Vec<i64> {
        self.x.iter().copied().filter(|&v| v > 0).collect()
    }

    pub fn num_grays(&self) -> usize {
        (self.g + self.a - 1) as usize
    }

    /// Upper bound on the number of grays spanning the gap after each black
    /// (but the last): every edge points right, so the flow across that gap
    /// is at most the total supply minus what the blacks so far absorb.
    fn gap_caps(&self) -> Vec<i64> {
        let supply: i64 = self.x.iter().chain(&self.c_divs).filter(|&&v| v < 0).map(|v| -v).sum();
        let n_g = self.num_grays() as i64;
        (1..self.a as i64).map(|j| (supply - j * self.k as i64).clamp(-1, n_g)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnumerationBudget {
    pub max_templates: u64,
    pub max_lattice_points: u64,
}

impl Default for EnumerationBudget {
    fn default() -> Self {
        EnumerationBudget { max_templates: 1_000_000, max_lattice_points: 10_000_000 }
    }
}

impl EnumerationBudget {
    pub fn new(max_templates: u64, max_lattice_points: u64) -> Result<Self> {
        if max_templates == 0 || max_lattice_points == 0 {
            return Err(Error::InvalidQuery("budgets must be positive".into()));
        }
        Ok(EnumerationBudget { max_templates, max_lattice_points })
    }
}

/// A color word with white values and gray endpoints fixed; white and label
/// attachments are still open.
struct Core<'a> {
    word: &'a [Color],
    /// Index into the sorted `c_divs` for each white, left to right.
    whites: &'a [usize],
    /// `(source, target)` positions for each gray, left to right.
    pairs: &'a [(usize, usize)],
}

fn for_each_word(counts: [usize; 3], f: &mut dyn FnMut(&[Color]) -> Result<()>) -> Result<()> {
    fn go(
        counts: &mut [usize; 3],
        cur: &mut Vec<Color>,
        seen_black: bool,
        f: &mut dyn FnMut(&[Color]) -> Result<()>,
    ) -> Result<()> {
        if counts.iter().all(|&c| c == 0) {
            let last_black = cur.iter().rposition(|&c| c == Color::Black);
            let last_gray = cur.iter().rposition(|&c| c == Color::Gray);
            if last_gray.is_none_or(|g| last_black.is_some_and(|b| b > g)) {
                return f(cur);
            }
            return Ok(());
        }
        for (i, color) in [Color::Black, Color::Gray, Color::White].into_iter().enumerate() {
            if counts[i] == 0 || (color == Color::Gray && !seen_black) {
                continue;
            }
            counts[i] -= 1;
            cur.push(color);
            go(counts, cur, seen_black || color == Color::Black, f)?;
            cur.pop();
            counts[i] += 1;
        }
        Ok(())
    }
    let mut counts = counts;
    go(&mut counts, &mut Vec::new(), false, f)
}

/// Distinct arrangements of a sorted multiset given by group ids: index
/// sequences where equal values appear in increasing index order.
fn for_each_arrangement(groups: &[usize], f: &mut dyn FnMut(&[usize]) -> Result<()>) -> Result<()> {
    // group id -> indices, in order
    let mut members: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &g) in groups.iter().enumerate() {
        members.entry(g).or_default().push(i);
    }
    let members: Vec<Vec<usize>> = members.into_values().collect();
    let mut used = vec![0usize; members.len()];
    let mut cur = Vec::with_capacity(groups.len());
    fn go(
        members: &[Vec<usize>],
        used: &mut [usize],
        cur: &mut Vec<usize>,
        n: usize,
        f: &mut dyn FnMut(&[usize]) -> Result<()>,
    ) -> Result<()> {
        if cur.len() == n {
            return f(cur);
        }
        for gi in 0..members.len() {
            if used[gi] < members[gi].len() {
                cur.push(members[gi][used[gi]]);
                used[gi] += 1;
                go(members, used, cur, n, f)?;
                used[gi] -= 1;
                cur.pop();
            }
        }
        Ok(())
    }
    go(&members, &mut used, &mut cur, groups.len(), f)
}

fn group_ids(sorted: &[i64]) -> Vec<usize> {
    let mut ids = Vec::with_capacity(sorted.len());
    let mut g = 0;
    for (i, v) in sorted.iter().enumerate() {
        if i > 0 && *v != sorted[i - 1] {
            g += 1;
        }
        ids.push(g);
    }
    ids
}

/// Visits connected cores in canonical order. `signs[i]` is the sign of
/// white value `i`; a white must have a black on its attaching side.
fn for_each_core(
    a: usize,
    n_grays: usize,
    groups: &[usize],
    signs: &[bool],
    caps: &[i64],
    fixed: Option<&[usize]>,
    f: &mut dyn FnMut(&Core) -> Result<()>,
) -> Result<()> {
    let n_w = groups.len();
    let mut arrangements: Vec<Vec<usize>> = Vec::new();
    match fixed {
        Some(order) => arrangements.push(order.to_vec()),
        None => for_each_arrangement(groups, &mut |arr| {
            arrangements.push(arr.to_vec());
            Ok(())
        })?,
    }
    for_each_word([a, n_grays, n_w], &mut |word| {
        let blacks: Vec<usize> = (0..word.len()).filter(|&p| word[p] == Color::Black).collect();
        let grays: Vec<usize> = (0..word.len()).filter(|&p| word[p] == Color::Gray).collect();
        let white_pos: Vec<usize> = (0..word.len()).filter(|&p| word[p] == Color::White).collect();
        let ord: HashMap<usize, usize> = blacks.iter().enumerate().map(|(i, &p)| (p, i)).collect();
        for arr in &arrangements {
            let ok = arr.iter().zip(&white_pos).all(|(&idx, &p)| {
                if signs[idx] {
                    blacks.iter().any(|&b| b > p)
                } else {
                    blacks.iter().any(|&b| b < p)
                }
            });
            if !ok {
                continue;
            }
            let choices: Vec<Vec<(usize, usize)>> = grays
                .iter()
                .map(|&p| {
                    let mut c = Vec::new();
                    for &s in blacks.iter().filter(|&&b| b < p) {
                        for &t in blacks.iter().filter(|&&b| b > p) {
                            c.push((s, t));
                        }
                    }
                    c
                })
                .collect();
            let mut pick = vec![0usize; grays.len()];
            loop {
                let pairs: Vec<(usize, usize)> = pick.iter().enumerate().map(|(i, &c)| choices[i][c]).collect();
                if within_caps(&pairs, &ord, caps) && blacks_connected(a, &pairs, &ord) {
                    f(&Core { word, whites: arr, pairs: &pairs })?;
                }
                if !odometer(&mut pick, &choices.iter().map(Vec::len).collect::<Vec<_>>()) {
                    break;
                }
            }
        }
        Ok(())
    })
}

fn odometer(pick: &mut [usize], sizes: &[usize]) -> bool {
    for i in (0..pick.len()).rev() {
        if pick[i] + 1 < sizes[i] {
            pick[i] += 1;
            return true;
        }
        pick[i] = 0;
    }
    false
}

fn within_caps(pairs: &[(usize, usize)], ord: &HashMap<usize, usize>, caps: &[i64]) -> bool {
    caps.iter().enumerate().all(|(j, &cap)| {
        let spanning = pairs.iter().filter(|(s, t)| ord[s] <= j && ord[t] > j).count() as i64;
        spanning <= cap
    })
}

fn blacks_connected(a: usize, pairs: &[(usize, usize)], ord: &HashMap<usize, usize>) -> bool {
    let mut parent: Vec<usize> = (0..a).collect();
    fn find(p: &mut [usize], mut v: usize) -> usize {
        while p[v] != v {
            p[v] = p[p[v]];
            v = p[v];
        }
        v
    }
    let mut comps = a;
    for &(s, t) in pairs {
        let (x, y) = (find(&mut parent, ord[&s]), find(&mut parent, ord[&t]));
        if x != y {
            parent[x] = y;
            comps -= 1;
        }
    }
    comps == 1
}

fn template_candidates(
    q: &EnumerationQuery,
    fixed_y: Option<&[i64]>,
    f: &mut dyn FnMut(Template) -> Result<()>,
) -> Result<()> {
    let groups = group_ids(&q.c_divs);
    let signs: Vec<bool> = q.c_divs.iter().map(|&v| v < 0).collect();
    let fixed = match fixed_y {
        None => None,
        Some(order) => Some(fixed_indices(&q.c_divs, order)?),
    };
    let l_n = q.l_divs().len();
    let r_n = q.r_divs().len();
    for_each_core(q.a as usize, q.num_grays(), &groups, &signs, &q.gap_caps(), fixed.as_deref(), &mut |core| {
        let blacks: Vec<usize> = (0..core.word.len()).filter(|&p| core.word[p] == Color::Black).collect();
        let white_pos: Vec<usize> = (0..core.word.len()).filter(|&p| core.word[p] == Color::White).collect();
        let mut options: Vec<Vec<usize>> = core
            .whites
            .iter()
            .zip(&white_pos)
            .map(|(&idx, &p)| {
                if q.c_divs[idx] < 0 {
                    blacks.iter().copied().filter(|&b| b > p).collect()
                } else {
                    blacks.iter().copied().filter(|&b| b < p).collect()
                }
            })
            .collect();
        options.extend(std::iter::repeat(blacks.clone()).take(l_n + r_n));
        let sizes: Vec<usize> = options.iter().map(Vec::len).collect();
        let mut pick = vec![0usize; options.len()];
        loop {
            let mut nodes = Vec::with_capacity(core.word.len());
            let (mut wi, mut gi) = (0, 0);
            for (p, &c) in core.word.iter().enumerate() {
                nodes.push(match c {
                    Color::Black => Node::Black,
                    Color::Gray => {
                        let (source, target) = core.pairs[gi];
                        gi += 1;
                        Node::Gray { source, target }
                    }
                    Color::White => {
                        let n = Node::White { div: q.c_divs[core.whites[wi]], black: options[wi][pick[wi]] };
                        wi += 1;
                        let _ = p;
                        n
                    }
                });
            }
            let n_w = core.whites.len();
            let l_attach: Vec<usize> = (0..l_n).map(|i| options[n_w + i][pick[n_w + i]]).collect();
            let r_attach: Vec<usize> = (0..r_n).map(|i| options[n_w + l_n + i][pick[n_w + l_n + i]]).collect();
            f(Template::new(nodes, l_attach, r_attach)?)?;
            if !odometer(&mut pick, &sizes) {
                break;
            }
        }
        Ok(())
    })
}

fn fixed_indices(c_divs: &[i64], order: &[i64]) -> Result<Vec<usize>> {
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    if sorted != c_divs {
        return Err(Error::InvalidQuery("fixed white order is not an arrangement of c_divs".into()));
    }
    let mut next: HashMap<i64, usize> = HashMap::new();
    Ok(order
        .iter()
        .map(|v| {
            let first = c_divs.iter().position(|c| c == v).expect("value present");
            let used = next.entry(*v).or_insert(0);
            *used += 1;
            first + *used - 1
        })
        .collect())
}

fn positive_points(t: &Template, q: &EnumerationQuery) -> Result<(FlowProblem, Vec<Vec<u64>>)> {
    let p = FlowProblem::from_template(t, &q.l_divs(), &q.r_divs(), q.k as i64)?;
    let pts = p.lattice_points(true)?;
    Ok((p, pts))
}

/// Visits every template admitting a positive weighting, in canonical
/// order; returns how many were visited.
pub fn for_each_template(q: &EnumerationQuery, budget: &EnumerationBudget, f: &mut dyn FnMut(Template)) -> Result<u64> {
    for_each_template_fixed(q, None, budget, f)
}

fn for_each_template_fixed(
    q: &EnumerationQuery,
    fixed_y: Option<&[i64]>,
    budget: &EnumerationBudget,
    f: &mut dyn FnMut(Template),
) -> Result<u64> {
    let mut count = 0u64;
    template_candidates(q, fixed_y, &mut |t| {
        if t.check().is_err() {
            return Ok(());
        }
        let p = FlowProblem::from_template(&t, &q.l_divs(), &q.r_divs(), q.k as i64)?;
        let mut feasible = false;
        p.for_each_point(true, |_| feasible = true)?;
        if feasible {
            count += 1;
            if count > budget.max_templates {
                return Err(Error::BudgetExceeded { kind: BudgetKind::Templates, limit: budget.max_templates, reached: count });
            }
            f(t);
        }
        Ok(())
    })?;
    Ok(count)
}

pub fn enumerate_templates(q: &EnumerationQuery, budget: &EnumerationBudget) -> Result<Vec<Template>> {
    let mut out = Vec::new();
    for_each_template(q, budget, &mut |t| out.push(t))?;
    Ok(out)
}

fn weights_from_point(t: &Template, w: &[u64]) -> Weights {
    let mut weights = Weights {
        l: vec![0; t.l_attach().len()],
        r: vec![0; t.r_attach().len()],
        white: vec![0; t.num_whites_c()],
        gray: vec![[0, 0]; t.num_grays()],
    };
    for (e, &v) in t.edges().iter().zip(w) {
        match e.slot {
            EdgeSlot::L(i) => weights.l[i] = v,
            EdgeSlot::R(i) => weights.r[i] = v,
            EdgeSlot::White(i) => weights.white[i] = v,
            EdgeSlot::Gray(i, out) => weights.gray[i][out as usize] = v,
        }
    }
    weights
}

/// All positive weightings of `t` meeting the divergence conditions.
pub fn complete_weights(t: &Template, q: &EnumerationQuery, budget: &EnumerationBudget) -> Result<Vec<FloorDiagram>> {
    let (_, pts) = positive_points(t, q)?;
    if pts.len() as u64 > budget.max_lattice_points {
        return Err(Error::BudgetExceeded {
            kind: BudgetKind::LatticePoints,
            limit: budget.max_lattice_points,
            reached: pts.len() as u64,
        });
    }
    pts.iter().map(|w| FloorDiagram::new(t.clone(), weights_from_point(t, w))).collect()
}

/// Every diagram contributing to the query, with its multiplicity, in
/// canonical order (templates in order, weightings lexicographic).
pub fn enumerate_diagrams(q: &EnumerationQuery, budget: &EnumerationBudget) -> Result<Vec<(FloorDiagram, u128)>> {
    enumerate_diagrams_fixed(q, None, budget)
}

/// Like [`enumerate_diagrams`], restricted to templates whose whites in `C`
/// carry exactly the divergence sequence `y_order`.
pub fn enumerate_diagrams_with_order(
    q: &EnumerationQuery,
    y_order: &[i64],
    budget: &EnumerationBudget,
) -> Result<Vec<(FloorDiagram, u128)>> {
    enumerate_diagrams_fixed(q, Some(y_order), budget)
}

fn enumerate_diagrams_fixed(
    q: &EnumerationQuery,
    fixed_y: Option<&[i64]>,
    budget: &EnumerationBudget,
) -> Result<Vec<(FloorDiagram, u128)>> {
    let mut templates = Vec::new();
    for_each_template_fixed(q, fixed_y, budget, &mut |t| templates.push(t))?;
    let used = AtomicU64::new(0);
    let per: Vec<Result<Vec<(FloorDiagram, u128)>>> = templates
        .par_iter()
        .map(|t| {
            let ds = complete_weights(t, q, budget)?;
            let total = used.fetch_add(ds.len() as u64, Ordering::Relaxed) + ds.len() as u64;
            if total > budget.max_lattice_points {
                return Err(Error::BudgetExceeded {
                    kind: BudgetKind::LatticePoints,
                    limit: budget.max_lattice_points,
                    reached: total,
                });
            }
            ds.into_iter().map(|d| Ok((d.multiplicity()?, d))).map(|r| r.map(|(m, d)| (d, m))).collect()
        })
        .collect();
    let mut out = Vec::new();
    for r in per {
        out.extend(r?);
    }
    Ok(out)
}

/// Per white in the canonical arrangement: value index and number of
/// blacks before it.
type WhiteShape = Vec<(usize, usize)>;

struct CoreTable {
    /// Whites shape → (compiled gray graph id, number of cores).
    groups: Vec<(WhiteShape, Vec<(usize, u64)>)>,
    flows: Vec<CompiledFlow>,
    cores: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct TableKey {
    a: u64,
    g: u64,
    /// Per sorted white value: (negative, equality group).
    pattern: Vec<(bool, usize)>,
    caps: Vec<i64>,
}

/// Aggregated evaluator of `Σ μ(D)`.
///
/// White and label attachments only change the supply each black receives
/// from its white neighbours, and the gray weighting depends only on the
/// gray graph and those supplies. Cores are tabulated once per sign and
/// equality pattern of the white values and reused across queries.
#[derive(Default)]
pub struct Evaluator {
    tables: Mutex<HashMap<TableKey, Arc<CoreTable>>>,
}

impl Evaluator {
    pub fn new() -> Self {
        Evaluator::default()
    }

    fn table(&self, q: &EnumerationQuery, budget: &EnumerationBudget) -> Result<Arc<CoreTable>> {
        let groups = group_ids(&q.c_divs);
        let signs: Vec<bool> = q.c_divs.iter().map(|&v| v < 0).collect();
        let key = TableKey {
            a: q.a,
            g: q.g,
            pattern: signs.iter().copied().zip(groups.iter().copied()).collect(),
            caps: q.gap_caps(),
        };
        if let Some(t) = self.tables.lock().expect("table cache poisoned").get(&key) {
            if t.cores > budget.max_templates {
                return Err(Error::BudgetExceeded { kind: BudgetKind::Templates, limit: budget.max_templates, reached: t.cores });
            }
            return Ok(t.clone());
        }
        let a = q.a as usize;
        let mut shapes: BTreeMap<WhiteShape, BTreeMap<Vec<(usize, usize)>, u64>> = BTreeMap::new();
        let mut cores = 0u64;
        for_each_core(a, q.num_grays(), &groups, &signs, &key.caps, None, &mut |core| {
            cores += 1;
            if cores > budget.max_templates {
                return Err(Error::BudgetExceeded { kind: BudgetKind::Templates, limit: budget.max_templates, reached: cores });
            }
            let mut ord = vec![usize::MAX; core.word.len()];
            let mut before = vec![0usize; core.word.len()];
            let mut nb = 0;
            for (p, &c) in core.word.iter().enumerate() {
                before[p] = nb;
                if c == Color::Black {
                    ord[p] = nb;
                    nb += 1;
                }
            }
            let white_pos = (0..core.word.len()).filter(|&p| core.word[p] == Color::White);
            let mut shape: WhiteShape = core.whites.iter().zip(white_pos).map(|(&idx, p)| (idx, before[p])).collect();
            shape.sort_unstable();
            let mut grays: Vec<(usize, usize)> = core.pairs.iter().map(|&(s, t)| (ord[s], ord[t])).collect();
            grays.sort_unstable();
            *shapes.entry(shape).or_default().entry(grays).or_insert(0) += 1;
            Ok(())
        })?;
        let mut flow_ids: BTreeMap<Vec<(usize, usize)>, usize> = BTreeMap::new();
        let mut flows = Vec::new();
        let mut out_groups = Vec::with_capacity(shapes.len());
        for (shape, by_gray) in shapes {
            let mut list = Vec::with_capacity(by_gray.len());
            for (grays, count) in by_gray {
                let id = match flow_ids.get(&grays) {
                    Some(&id) => id,
                    None => {
                        flows.push(CompiledFlow::new(a, grays.clone())?);
                        flow_ids.insert(grays, flows.len() - 1);
                        flows.len() - 1
                    }
                };
                list.push((id, count));
            }
            out_groups.push((shape, list));
        }
        let table = Arc::new(CoreTable { groups: out_groups, flows, cores });
        self.tables.lock().expect("table cache poisoned").insert(key, table.clone());
        Ok(table)
    }

    /// `Σ μ(D)` over all diagrams of the query.
    pub fn weighted_count(&self, q: &EnumerationQuery, budget: &EnumerationBudget) -> Result<u128> {
        let table = self.table(q, budget)?;
        let a = q.a as usize;
        let k = q.k as i64;
        // supply each black receives from labels
        let mut labels: HashMap<Vec<i64>, u128> = HashMap::new();
        labels.insert(vec![0; a], 1);
        for &x in &q.x {
            labels = spread(&labels, 0..a, -x)?;
        }
        let mut memo: HashMap<(usize, Vec<i64>), u128> = HashMap::new();
        let mut visited = 0u64;
        let mut total: u128 = 0;
        for (shape, grays) in &table.groups {
            let mut dist = labels.clone();
            for &(idx, gap) in shape {
                let v = q.c_divs[idx];
                dist = if v < 0 { spread(&dist, gap..a, -v)? } else { spread(&dist, 0..gap, -v)? };
            }
            for (s, cnt) in &dist {
                let h: Vec<i64> = s.iter().map(|si| k - si).collect();
                for &(fid, ncores) in grays {
                    let key = (fid, h.clone());
                    let gsum = match memo.get(&key) {
                        Some(&v) => v,
                        None => {
                            let v = gray_sum(&table.flows[fid], &h, &mut visited)?;
                            if visited > budget.max_lattice_points {
                                return Err(Error::BudgetExceeded {
                                    kind: BudgetKind::LatticePoints,
                                    limit: budget.max_lattice_points,
                                    reached: visited,
                                });
                            }
                            memo.insert(key, v);
                            v
                        }
                    };
                    if gsum == 0 {
                        continue;
                    }
                    let term = (ncores as u128)
                        .checked_mul(*cnt)
                        .and_then(|v| v.checked_mul(gsum))
                        .ok_or(Error::Overflow)?;
                    total = total.checked_add(term).ok_or(Error::Overflow)?;
                }
            }
        }
        let ys: u128 = q.c_divs.iter().map(|v| v.unsigned_abs() as u128).product();
        total.checked_mul(ys).ok_or(Error::Overflow)
    }

    /// Number of cores (connected color words with white values and gray
    /// endpoints) behind the query.
    pub fn core_count(&self, q: &EnumerationQuery, budget: &EnumerationBudget) -> Result<u64> {
        Ok(self.table(q, budget)?.cores)
    }
}

fn spread(
    dist: &HashMap<Vec<i64>, u128>,
    blacks: std::ops::Range<usize>,
    amount: i64,
) -> Result<HashMap<Vec<i64>, u128>> {
    let mut out: HashMap<Vec<i64>, u128> = HashMap::with_capacity(dist.len() * blacks.len());
    for (s, &c) in dist {
        for b in blacks.clone() {
            let mut t = s.clone();
            t[b] += amount;
            let e = out.entry(t).or_insert(0);
            *e = e.checked_add(c).ok_or(Error::Overflow)?;
        }
    }
    Ok(out)
}

/// `Σ Π w²` over positive gray weightings with black excess `h`.
fn gray_sum(flow: &CompiledFlow, h: &[i64], visited: &mut u64) -> Result<u128> {
    let mut acc: u128 = 0;
    let mut overflow = false;
    flow.for_each_point(h, true, |w| {
        *visited += 1;
        let prod = w.iter().try_fold(1u128, |p, &x| p.checked_mul((x as u128) * (x as u128)));
        match prod.and_then(|p| acc.checked_add(p)) {
            Some(v) => acc = v,
            None => overflow = true,
        }
    });
    if overflow {
        return Err(Error::Overflow);
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn budget() -> EnumerationBudget {
        EnumerationBudget::default()
    }

    #[test]
    fn figure2b_single_template() {
        let q = EnumerationQuery::new(2, 0, 1, vec![-2], vec![]).unwrap();
        let ts = enumerate_templates(&q, &budget()).unwrap();
        assert_eq!(ts, vec![fixtures::figure2b().template().clone()]);
        let ds = complete_weights(&ts[0], &q, &budget()).unwrap();
        assert_eq!(ds, vec![fixtures::figure2b()]);
    }

    #[test]
    fn figure2a_single_template() {
        let q = EnumerationQuery::new(2, 0, 1, vec![], vec![-2]).unwrap();
        let ts = enumerate_templates(&q, &budget()).unwrap();
        assert_eq!(ts, vec![fixtures::figure2a().template().clone()]);
        let ds = complete_weights(&ts[0], &q, &budget()).unwrap();
        assert_eq!(ds.len(), 1);
        assert_eq!(ds[0].weights().white, vec![2]);
        assert_eq!(ds[0].weights().gray, vec![[1, 1]]);
    }

    #[test]
    fn genus_one_single_floor_has_no_template() {
        let q = EnumerationQuery::new(1, 1, 0, vec![-1, 1], vec![]).unwrap();
        assert!(enumerate_templates(&q, &budget()).unwrap().is_empty());
    }

    #[test]
    fn figure2c_single_diagram() {
        let q = EnumerationQuery::new(2, 0, 0, vec![-2], vec![2]).unwrap();
        let ds = enumerate_diagrams(&q, &budget()).unwrap();
        assert_eq!(ds, vec![(fixtures::figure2c(), 8)]);
    }

    #[test]
    fn figure3_five_diagrams() {
        let q = EnumerationQuery::new(2, 0, 1, vec![-2, 1], vec![-1]).unwrap();
        let ds = enumerate_diagrams(&q, &budget()).unwrap();
        let mut mults: Vec<u128> = ds.iter().map(|(_, m)| *m).collect();
        mults.sort_unstable();
        assert_eq!(mults, vec![1, 1, 1, 1, 4]);
        assert_eq!(Evaluator::new().weighted_count(&q, &budget()).unwrap(), 8);
    }

    #[test]
    fn genus_zero_templates_have_at_most_one_weighting() {
        let q = EnumerationQuery::new(3, 0, 1, vec![-2, 1], vec![-1, -1]).unwrap();
        for t in enumerate_templates(&q, &budget()).unwrap() {
            assert_eq!(complete_weights(&t, &q, &budget()).unwrap().len(), 1);
        }
    }

    #[test]
    fn every_diagram_validates_and_matches_aggregate() {
        let ev = Evaluator::new();
        for (a, g, k, x, y) in [
            (2u64, 1u64, 1u64, vec![-3i64, 2], vec![-1i64]),
            (3, 0, 1, vec![-2], vec![-1, 1, -1]),
            (3, 1, 0, vec![-1, 2], vec![-1]),
            (2, 0, 2, vec![-1, 3], vec![-6]),
        ] {
            let q = EnumerationQuery::new(a, g, k, x, y).unwrap();
            let ds = enumerate_diagrams(&q, &budget()).unwrap();
            let mut sum = 0u128;
            for (d, m) in &ds {
                assert_eq!(d.validate(k), Ok(()));
                assert_eq!(d.genus(), g as i64);
                sum += m;
            }
            assert_eq!(ev.weighted_count(&q, &budget()).unwrap(), sum);
        }
    }

    #[test]
    fn fixed_order_sum_reassembles_total() {
        // Σ over ordered arrangements, divided by the symmetry factor
        let q = EnumerationQuery::new(3, 0, 1, vec![-2], vec![-1, -1, 1]).unwrap();
        let total: u128 = enumerate_diagrams(&q, &budget()).unwrap().iter().map(|(_, m)| m).sum();
        let vals = [-1i64, -1, 1];
        let mut ordered = 0u128;
        for perm in [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
            let order: Vec<i64> = perm.iter().map(|&i| vals[i]).collect();
            ordered += enumerate_diagrams_with_order(&q, &order, &budget()).unwrap().iter().map(|(_, m)| m).sum::<u128>();
        }
        assert_eq!(ordered, 2 * total);
    }

    #[test]
    fn budget_is_enforced() {
        let q = EnumerationQuery::new(3, 0, 1, vec![-2], vec![-1, 1, -1]).unwrap();
        let tight = EnumerationBudget::new(1, 10).unwrap();
        assert!(matches!(
            enumerate_templates(&q, &tight),
            Err(Error::BudgetExceeded { kind: BudgetKind::Templates, .. })
        ));
        assert!(matches!(Evaluator::new().weighted_count(&q, &tight), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn query_validation() {
        assert_eq!(EnumerationQuery::new(0, 0, 1, vec![], vec![]), Err(Error::ZeroA));
        assert!(matches!(EnumerationQuery::new(1, 0, 1, vec![0, -1], vec![]), Err(Error::NotInLattice(_))));
        assert!(matches!(EnumerationQuery::new(1, 0, 1, vec![-2], vec![]), Err(Error::NotInLattice(_))));
    }
}
