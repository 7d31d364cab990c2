//! Verification suites with machine-readable reports.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::chambers::build_arrangement;
use crate::diagram::MultiplicityVector;
use crate::enumerate::{enumerate_diagrams, enumerate_templates, EnumerationBudget, EnumerationQuery, Evaluator};
use crate::error::{Error, Result};
use crate::fixtures;
use crate::flow::{
    inclusion_exclusion_check, random_flow_problem, random_pointed_config, reciprocity_check, unimodularity_check, FlowProblem,
    WeightFunctional,
};
use crate::invariants::{adjunction_bound, compute_f, compute_n, gamma, gamma_polynomial, InvariantQuery};
use crate::oracle::naive_diagrams;
use crate::pieces::{chamber_polynomial, degree_parity_report, verify_table1, FitOptions, PieceShape, TABLE1};
use crate::poly::{rat, Parity};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Suite {
    FigureValues,
    Figure1,
    Table1,
    DegreeParity,
    JointParity,
    Reciprocity,
    InclusionExclusion,
    Oracle,
    Gamma,
    Symmetry,
}

impl Suite {
    pub const ALL: [Suite; 10] = [
        Suite::FigureValues,
        Suite::Figure1,
        Suite::Table1,
        Suite::DegreeParity,
        Suite::JointParity,
        Suite::Reciprocity,
        Suite::InclusionExclusion,
        Suite::Oracle,
        Suite::Gamma,
        Suite::Symmetry,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::FigureValues => "paper-values",
            Suite::Figure1 => "figure1",
            Suite::Table1 => "table1",
            Suite::DegreeParity => "degree-parity",
            Suite::JointParity => "joint-parity",
            Suite::Reciprocity => "reciprocity",
            Suite::InclusionExclusion => "inclusion-exclusion",
            Suite::Oracle => "oracle",
            Suite::Gamma => "gamma",
            Suite::Symmetry => "symmetry",
        }
    }

    pub fn parse(s: &str) -> Result<Suite> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidQuery(format!("unknown suite {s:?}")))
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: Value,
}

fn check(name: impl Into<String>, pass: bool, detail: Value) -> Check {
    Check { name: name.into(), pass, detail }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn pass(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "suite": self.suite.name(),
            "pass": self.pass(),
            "checks": self.checks.iter().map(|c| json!({"name": c.name, "pass": c.pass, "detail": c.detail})).collect::<Vec<_>>(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Overrides the suite's default number of random trials.
    pub trials: Option<usize>,
    /// Restricts `table1` to these values.
    pub ks: Option<Vec<u64>>,
    pub gs: Option<Vec<u64>>,
    pub budget: EnumerationBudget,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { seed: 7, trials: None, ks: None, gs: None, budget: EnumerationBudget::default() }
    }
}

impl VerifyOptions {
    fn fit(&self) -> FitOptions {
        FitOptions { seed: self.seed, budget: self.budget, ..FitOptions::default() }
    }
}

pub fn run_suite(suite: Suite, opts: &VerifyOptions) -> Result<SuiteReport> {
    let checks = match suite {
        Suite::FigureValues => figure_values(opts)?,
        Suite::Figure1 => figure1()?,
        Suite::Table1 => table1(opts)?,
        Suite::DegreeParity => degree_parity(opts)?,
        Suite::JointParity => joint_parity(opts)?,
        Suite::Reciprocity => reciprocity(opts)?,
        Suite::InclusionExclusion => inclusion_exclusion(opts)?,
        Suite::Oracle => oracle(opts)?,
        Suite::Gamma => gamma_checks()?,
        Suite::Symmetry => symmetry(opts)?,
    };
    Ok(SuiteReport { suite, checks })
}

/// `(compact vector, a, b, k, expected N)` for the values read off the
/// figures. The last one is the consistent bidegree-(2,1) reading of the
/// five-diagram example.
pub const FIGURE_VALUES: [(&str, u64, u64, u64, u128); 4] = [
    ("0,01,0,0", 2, 0, 1, 2),
    ("01,0,0,0", 2, 0, 1, 1),
    ("01,0,0,01", 2, 2, 0, 8),
    ("01,1,1,0", 2, 1, 1, 8),
];

fn figure_values(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for (text, a, b, k, want) in FIGURE_VALUES {
        let q = InvariantQuery::new(a, b, k, 0, MultiplicityVector::from_compact(text)?)?;
        let got = compute_n(&q, &opts.budget)?;
        out.push(check(
            format!("N_0^{{{text}}}({a},{b},{k})"),
            got == want,
            json!({"expected": want.to_string(), "got": got.to_string()}),
        ));
    }
    let q = InvariantQuery::new(2, 1, 1, 0, MultiplicityVector::from_compact("01,1,1,0")?)?;
    let ds = enumerate_diagrams(&q.enumeration_query()?, &opts.budget)?;
    let mut mults: Vec<u128> = ds.iter().map(|(_, m)| *m).collect();
    mults.sort_unstable();
    out.push(check(
        "five diagrams with multiplicities 1,1,1,1,4",
        mults == [1, 1, 1, 1, 4],
        json!({"multiplicities": mults.iter().map(|m| m.to_string()).collect::<Vec<_>>()}),
    ));
    for text in ["01,1,0,1", "01,1,1,0"] {
        let res = InvariantQuery::new(3, 1, 1, 0, MultiplicityVector::from_compact(text)?);
        out.push(check(
            format!("N_0^{{{text}}}(3,1,1) rejected as inconsistent"),
            matches!(res, Err(Error::Inconsistent(_))),
            json!({"result": match &res { Ok(_) => "accepted".to_string(), Err(e) => e.to_string() }}),
        ));
    }
    Ok(out)
}

fn figure1() -> Result<Vec<Check>> {
    let d = fixtures::figure1();
    let derived = d.derived();
    Ok(vec![
        check("validates with k = 2", d.validate(2).is_ok(), json!({})),
        check("x", derived.x == [-2, -2, -1, 1], json!({"x": derived.x})),
        check("y", derived.y == [-1, 2, -3, 1, -1], json!({"y": derived.y})),
        check(
            "multiplicity vector",
            derived.multiplicities.to_string() == "12,201,1,11",
            json!({"vector": derived.multiplicities.to_string()}),
        ),
        check("bidegree", (derived.a, derived.b) == (3, 4), json!({"a": derived.a, "b": derived.b})),
        check("genus", derived.genus == 1, json!({"genus": derived.genus})),
        check("multiplicity", d.multiplicity()? == 6, json!({"mu": d.multiplicity()?.to_string()})),
    ])
}

fn table1(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let ks = opts.ks.clone().unwrap_or_else(|| vec![1, 2]);
    let gs = opts.gs.clone().unwrap_or_else(|| vec![0, 1]);
    let mut out = Vec::new();
    for &k in &ks {
        for &g in &gs {
            for (label, _) in TABLE1 {
                let rep = verify_table1(k, g, label, 20, &opts.fit())?;
                out.push(check(format!("row {label}, k = {k}, g = {g}"), rep.pass(), rep.to_json()));
            }
        }
    }
    Ok(out)
}

/// The `(a, g, n1, n2, k)` cells of the degree grid.
pub fn degree_grid() -> Vec<(u64, u64, usize, usize, u64)> {
    let mut cells = Vec::new();
    for a in 1..=3 {
        for g in 0..=1 {
            for (n1, n2) in [(2, 1), (1, 2), (2, 2)] {
                for k in 0..=2 {
                    cells.push((a, g, n1, n2, k));
                }
            }
        }
    }
    cells
}

/// Search box for chambers of a grid cell.
fn discovery_box(a: u64, k: u64) -> u64 {
    a * k + 6
}

fn degree_parity(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for (a, g, n1, n2, k) in degree_grid() {
        let shape = PieceShape { a, g, n1, n2 };
        let arr = build_arrangement(n1, n2, a, k)?;
        let (mut nonzero, mut zero, mut failed) = (0usize, 0usize, Vec::new());
        let (mut degree_failures, mut parity_failures) = (0usize, 0usize);
        for c in arr.chambers_in_box(discovery_box(a, k)) {
            let piece = chamber_polynomial(shape, k, &c.signature, &opts.fit())?;
            if piece.polynomial.is_zero() {
                zero += 1;
                continue;
            }
            nonzero += 1;
            let rep = degree_parity_report(&piece);
            degree_failures += !rep.degree_ok as usize;
            parity_failures += (rep.fixed_k_parity == Some(false)) as usize;
            if !rep.degree_ok || rep.fixed_k_parity == Some(false) {
                failed.push(json!({"signature": c.signature.to_string(), "report": rep.to_json()}));
            }
        }
        out.push(check(
            format!("a = {a}, g = {g}, (n1, n2) = ({n1}, {n2}), k = {k}"),
            failed.is_empty(),
            json!({
                "expected_degree": shape.degree(),
                "nonzero_pieces": nonzero,
                "zero_pieces": zero,
                "degree_failures": degree_failures,
                "parity_failures": parity_failures,
                "failures": failed,
            }),
        ));
    }
    Ok(out)
}

fn joint_parity(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let evaluator = Evaluator::new();
    for g in 0..=1u64 {
        let shape = PieceShape { a: 2, g, n1: 2, n2: 1 };
        let wide = build_arrangement(2, 1, 2, 3)?;
        for c in wide.chambers_in_box(15) {
            let piece = chamber_polynomial(shape, 1, &c.signature, &opts.fit())?;
            let joint = piece.joint.clone().expect("k ≥ 1 pieces are joint");
            let d = shape.degree();
            let want = if d % 2 == 0 { Parity::Even } else { Parity::Odd };
            let parity_ok = joint.is_zero() || joint.parity() == want;
            // the joint piece against F at k = 0..5
            let mut evaluated = 0usize;
            let mut mismatches = Vec::new();
            for k in 0..=5i64 {
                let arr_k = build_arrangement(2, 1, 2, k.max(1) as u64)?;
                let mut pts: Vec<Vec<i64>> = Vec::new();
                for x1 in -12..=12i64 {
                    for y1 in -12..=12i64 {
                        if arr_k.in_chamber(&c.signature, &[x1, y1], k) {
                            pts.push(vec![x1, y1]);
                        }
                    }
                }
                for v in pts.iter().take(4) {
                    let p = arr_k.embed(v, k);
                    let q = EnumerationQuery::new(2, g, k as u64, p[..2].to_vec(), p[2..].to_vec())?;
                    let f = evaluator.weighted_count(&q, &opts.budget)?;
                    evaluated += 1;
                    let fit = joint.eval_i64(&[v[0], v[1], k]);
                    if fit != BigRational::from_integer(BigInt::from(f)) {
                        mismatches.push(json!({"point": p, "k": k, "value": f.to_string(), "fitted": fit.to_string()}));
                    }
                }
            }
            out.push(check(
                format!("g = {g}, chamber {}", piece.label.clone().unwrap_or_else(|| c.signature.to_string())),
                parity_ok && mismatches.is_empty(),
                json!({
                    "expected_parity": if d % 2 == 0 { "even" } else { "odd" },
                    "joint": joint.to_text(),
                    "parity_ok": parity_ok,
                    "points_checked": evaluated,
                    "mismatches": mismatches,
                }),
            ));
        }
    }
    Ok(out)
}

fn internal_edges(p: &FlowProblem, t: &crate::diagram::Template) -> Result<WeightFunctional> {
    let y: Vec<usize> = t.edges().iter().enumerate().filter(|(_, e)| e.is_internal()).map(|(i, _)| i).collect();
    WeightFunctional::new(y, p.edges().len())
}

fn reciprocity(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for (text, a, b, k, _) in FIGURE_VALUES {
        let q = InvariantQuery::new(a, b, k, 0, MultiplicityVector::from_compact(text)?)?.enumeration_query()?;
        for t in enumerate_templates(&q, &opts.budget)? {
            let p = FlowProblem::from_template(&t, &q.l_divs(), &q.r_divs(), k as i64)?;
            let y = internal_edges(&p, &t)?;
            let key = format!("{:?}{:?}{:?}", p.edges(), p.d(), y.indices());
            if !seen.insert(key) {
                continue;
            }
            let rep = reciprocity_check(&p, &y, 3)?;
            let unimodular = unimodularity_check(&incidence_columns(&p));
            let mut detail = reciprocity_json(&rep);
            detail["unimodular"] = json!(unimodular);
            out.push(check(format!("template of N_0^{{{text}}}({a},{b},{k})"), rep.holds() && unimodular, detail));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for i in 0..opts.trials.unwrap_or(20) {
        let p = random_flow_problem(&mut rng, 2);
        let m = p.edges().len();
        let mut y: Vec<usize> = (0..m).filter(|_| rng.gen_bool(0.5)).collect();
        y.truncate(3);
        let y = WeightFunctional::new(y, m)?;
        let rep = reciprocity_check(&p, &y, 3)?;
        let mut detail = reciprocity_json(&rep);
        detail["edges"] = json!(p.edges());
        detail["d"] = json!(p.d());
        out.push(check(format!("random flow problem {i}"), rep.holds(), detail));
    }
    Ok(out)
}

fn incidence_columns(p: &FlowProblem) -> Vec<Vec<i64>> {
    p.edges()
        .iter()
        .map(|&(s, t)| {
            let mut col = vec![0; p.n_vertices()];
            col[s] = 1;
            col[t] = -1;
            col
        })
        .collect()
}

fn reciprocity_json(rep: &crate::flow::ReciprocityReport) -> Value {
    json!({
        "dim": rep.dim,
        "degree": rep.degree,
        "closed_polynomial": rep.closed_polynomial.to_text(),
        "checks": rep.checks.iter().map(|(t, a, b)| json!({"t": t, "fitted_at_minus_t": a.to_string(), "signed_interior": b.to_string()})).collect::<Vec<_>>(),
    })
}

fn inclusion_exclusion(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut out = Vec::new();
    for i in 0..opts.trials.unwrap_or(100) {
        let (x, y, c) = random_pointed_config(&mut rng);
        let ie = inclusion_exclusion_check(&x, &y, &c)?;
        out.push(check(
            format!("configuration {i}"),
            ie.holds(),
            json!({
                "vectors": x.vectors(),
                "weighted": y.indices(),
                "c": c,
                "lhs": ie.weighted.to_string(),
                "rhs": ie.alternating.to_string(),
            }),
        ));
    }
    Ok(out)
}

/// Rough size of the brute-force search for a query.
fn naive_size(a: u64, g: u64, n1: usize, n2: usize) -> u64 {
    let n_g = g + a - 1;
    let n = a + n_g + n2 as u64;
    let fact = |m: u64| (1..=m).product::<u64>();
    let words = fact(n) / (fact(a) * fact(n_g) * fact(n2 as u64));
    words * a.pow((2 * n_g) as u32 + (n1 + 2 * n2) as u32) * fact(n2 as u64)
}

/// A random consistent query with `a ≤ 3`, `g ≤ 1`, `k ≤ 2` and entries of
/// absolute value at most 4, small enough for the brute-force oracle.
pub fn random_oracle_query<R: Rng>(rng: &mut R) -> EnumerationQuery {
    loop {
        let a = rng.gen_range(1..=3u64);
        let g = rng.gen_range(0..=1u64);
        let k = rng.gen_range(0..=2u64);
        let n1 = rng.gen_range(0..=2usize);
        let n2 = rng.gen_range(0..=2usize);
        if n1 + n2 == 0 || naive_size(a, g, n1, n2) > 2_000_000 {
            continue;
        }
        let mut entries: Vec<i64> = (0..n1 + n2 - 1)
            .map(|_| loop {
                let v = rng.gen_range(-4..=4);
                if v != 0 {
                    break v;
                }
            })
            .collect();
        let last = -((a * k) as i64) - entries.iter().sum::<i64>();
        if last == 0 || last.abs() > 4 {
            continue;
        }
        entries.push(last);
        let y = entries.split_off(n1);
        if let Ok(q) = EnumerationQuery::new(a, g, k, entries, y) {
            return q;
        }
    }
}

fn oracle(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut out = Vec::new();
    for i in 0..opts.trials.unwrap_or(50) {
        let q = random_oracle_query(&mut rng);
        let ds = enumerate_diagrams(&q, &opts.budget)?;
        let explicit: Vec<String> = ds.iter().map(|(d, _)| d.to_json()).collect();
        let explicit_set: BTreeSet<String> = explicit.iter().cloned().collect();
        let naive = naive_diagrams(&q)?;
        let sum: u128 = ds.iter().map(|(_, m)| m).sum();
        let agg = Evaluator::new().weighted_count(&q, &opts.budget)?;
        let pass = explicit_set.len() == explicit.len() && explicit_set == naive.diagrams && sum == naive.weighted && agg == sum;
        out.push(check(
            format!("query {i}"),
            pass,
            json!({
                "a": q.a(), "g": q.g(), "k": q.k(), "x": q.x(), "y": q.c_divs(),
                "diagrams": explicit.len(),
                "oracle_diagrams": naive.diagrams.len(),
                "sum": sum.to_string(),
                "oracle_sum": naive.weighted.to_string(),
                "aggregated_sum": agg.to_string(),
            }),
        ));
    }
    Ok(out)
}

fn gamma_checks() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let g0 = (1..=20u64).all(|w| gamma(0, w) == (w * w) as u128);
    out.push(check("gamma(0, w) = w² for w = 1..20", g0, json!({})));
    let g1 = (1..=20u64).all(|w| gamma(1, w) == ((w - 1) * w * (w + 1) * (w * w + 1) / 30) as u128);
    out.push(check("gamma(1, w) = (w−1)w(w+1)(w²+1)/30 for w = 1..20", g1, json!({})));
    for g in 0..=2u64 {
        let p = gamma_polynomial(g)?;
        let want = if g % 2 == 0 { Parity::Even } else { Parity::Odd };
        let vanish = (0..=g as i64).all(|w| p.eval_i64(&[w]) == rat(0));
        out.push(check(
            format!("Γ_{g} has degree {} and the parity of g", 3 * g + 2),
            p.total_degree() == Some((3 * g + 2) as u32) && p.parity() == want && vanish,
            json!({"polynomial": p.to_text(), "degree": p.total_degree()}),
        ));
    }
    Ok(out)
}

fn symmetry(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let queries: [(u64, u64, u64, Vec<i64>, Vec<i64>); 4] = [
        (2, 0, 2, vec![-1, 3], vec![-6]),
        (2, 1, 1, vec![-2, -1, 2], vec![-3, 1, 1]),
        (3, 0, 1, vec![-2, 1], vec![-1, -2, 1]),
        (3, 1, 2, vec![-2, -2, -1, 1], vec![-3, -1, -1, 1, 2]),
    ];
    for (a, g, k, x, y) in queries {
        let base = compute_f(a, k, g, &x, &y, &opts.budget)?;
        let evaluator = Evaluator::new();
        let mut bad = Vec::new();
        for _ in 0..20 {
            let (mut px, mut py) = (x.clone(), y.clone());
            px.shuffle(&mut rng);
            py.shuffle(&mut rng);
            let v = evaluator.weighted_count(&EnumerationQuery::new(a, g, k, px.clone(), py.clone())?, &opts.budget)?;
            if v != base {
                bad.push(json!({"x": px, "y": py, "value": v.to_string()}));
            }
        }
        out.push(check(
            format!("F_{{{a},{k},{g}}}({x:?}, {y:?}) under 20 permutations"),
            bad.is_empty(),
            json!({"value": base.to_string(), "mismatches": bad}),
        ));
    }
    let mut nonzero = Vec::new();
    for a in 1..=3u64 {
        for b in 0..=2u64 {
            for k in 0..=2u64 {
                let g = (adjunction_bound(a, b, k) + 1).max(0) as u64;
                let mv = vanishing_vector(a, b, k)?;
                let text = mv.to_string();
                let n = compute_n(&InvariantQuery::new(a, b, k, g, mv)?, &opts.budget)?;
                if n != 0 {
                    nonzero.push(json!({"a": a, "b": b, "k": k, "g": g, "vector": text, "value": n.to_string()}));
                }
            }
        }
    }
    out.push(check("N = 0 above the adjunction bound, (a, b, k) ∈ [1,3]×[0,2]×[0,2]", nonzero.is_empty(), json!({"nonzero": nonzero})));
    Ok(out)
}

/// One left point of order `ak + b` and one right point of order `b`.
pub fn vanishing_vector(a: u64, b: u64, k: u64) -> Result<MultiplicityVector> {
    let seq = |i: u64| if i == 0 { "0".to_string() } else { "0".repeat(i as usize - 1) + "1" };
    MultiplicityVector::from_compact(&format!("{},0,{},0", seq(a * k + b), seq(b)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(Suite::parse(s.name()).unwrap(), s);
        }
        assert!(Suite::parse("nope").is_err());
    }

    #[test]
    fn quick_suites_pass() {
        let opts = VerifyOptions::default();
        for s in [Suite::FigureValues, Suite::Figure1, Suite::Gamma] {
            let rep = run_suite(s, &opts).unwrap();
            assert!(rep.pass(), "{}", rep.to_json());
        }
    }

    #[test]
    fn small_random_suites_pass() {
        let opts = VerifyOptions { trials: Some(5), ..VerifyOptions::default() };
        for s in [Suite::Reciprocity, Suite::InclusionExclusion, Suite::Oracle] {
            let rep = run_suite(s, &opts).unwrap();
            assert!(rep.pass(), "{}", rep.to_json());
        }
    }

    #[test]
    fn vanishing_vectors_are_consistent() {
        for a in 1..=3 {
            for b in 0..=2 {
                for k in 0..=2 {
                    let mv = vanishing_vector(a, b, k).unwrap();
                    assert!(InvariantQuery::new(a, b, k, 0, mv).is_ok());
                }
            }
        }
    }
}
