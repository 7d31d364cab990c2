//! Polynomial pieces of `F` on chambers, their degree and parity, and the
//! closed forms for `(n1, n2, a) = (2, 1, 2)`.
//!
//! A chamber is an open polyhedral cone: in the free coordinates `v` when
//! `k = 0`, and in `(v, k)` when `k ≥ 1` since every wall is linear in
//! `(x, y, k)`. Sums of interior lattice points stay interior, so the nodes
//! `p + Σ i_t d_t` (`Σ i_t ≤ D`) built from interior points `p, d_t` all lie
//! in the chamber and determine the piece by Newton interpolation. Points
//! off the grid then confirm it.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::chambers::{build_arrangement, Arrangement, Signature};
use crate::enumerate::EnumerationBudget;
use crate::error::{Error, Result};
use crate::flow::rank;
use crate::invariants::{compute_f, gamma_polynomial};
use crate::poly::{binomial_count, newton_fit, rat, simplex_grid, AffineGrid, InterpError, MultiPoly, Parity, MONOMIAL_LIMIT};


#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PieceShape {
    pub a: u64,
    pub g: u64,
    pub n1: usize,
    pub n2: usize,
}

impl PieceShape {
    /// `n2 + 3g + 2a − 2`
    pub fn degree(&self) -> u32 {
        (self.n2 as u64 + 3 * self.g + 2 * self.a - 2) as u32
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FitOptions {
    pub seed: u64,
    pub holdouts: usize,
    pub budget: EnumerationBudget,
    /// Largest sup-norm radius searched for chamber points.
    pub box_bound: u64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { seed: 0, holdouts: 5, budget: EnumerationBudget::default(), box_bound: 12 }
    }
}

/// A value of `F` at an ambient point of `Λ` at dilation `k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Evidence {
    pub point: Vec<i64>,
    pub k: u64,
    pub value: u128,
}

impl Evidence {
    fn to_json(&self) -> Value {
        json!({ "point": self.point, "k": self.k, "value": self.value.to_string() })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChamberPiece {
    pub shape: PieceShape,
    pub k: u64,
    pub signature: Signature,
    pub label: Option<String>,
    /// In the free coordinates, at the requested `k`.
    pub polynomial: MultiPoly,
    /// In the free coordinates and `k`, for `k ≥ 1`.
    pub joint: Option<MultiPoly>,
    pub samples: Vec<Evidence>,
    pub holdouts: Vec<Evidence>,
}

impl ChamberPiece {
    pub fn to_json(&self) -> Value {
        json!({
            "a": self.shape.a,
            "g": self.shape.g,
            "n1": self.shape.n1,
            "n2": self.shape.n2,
            "k": self.k,
            "signature": self.signature.to_string(),
            "label": self.label,
            "degree_bound": self.shape.degree(),
            "polynomial": self.polynomial.to_json(),
            "joint": self.joint.as_ref().map(MultiPoly::to_json),
            "samples": self.samples.iter().map(Evidence::to_json).collect::<Vec<_>>(),
            "holdouts": self.holdouts.iter().map(Evidence::to_json).collect::<Vec<_>>(),
        })
    }
}

/// Interior lattice points of a chamber cone, growing the search box until
/// the points span and enough spare points exist.
struct Cone<'a> {
    arr: &'a Arrangement,
    joint: bool,
    points: Vec<Vec<i64>>,
}

impl<'a> Cone<'a> {
    fn collect(arr: &'a Arrangement, sig: &'a Signature, joint: bool, spare: usize, box_bound: u64) -> Cone<'a> {
        let n = arr.num_free() + joint as usize;
        let mut points = Vec::new();
        for r in 2..=box_bound.max(2) {
            points = arr.cone_points(sig, r, joint.then_some(1..=r as i64));
            if rank(&points) == n && points.len() >= n + 1 + spare {
                break;
            }
        }
        points.sort_by_key(|p| (p.iter().map(|v| v.abs()).sum::<i64>(), p.clone()));
        Cone { arr, joint, points }
    }

    fn grid(&self) -> Option<AffineGrid> {
        let n = self.arr.num_free() + self.joint as usize;
        let base = self.points.first()?.clone();
        let mut dirs: Vec<Vec<i64>> = Vec::new();
        for p in &self.points {
            if dirs.len() == n {
                break;
            }
            dirs.push(p.clone());
            if rank(&dirs) < dirs.len() {
                dirs.pop();
            }
        }
        (dirs.len() == n).then_some(AffineGrid { base, dirs })
    }

    fn k_of(&self, p: &[i64]) -> i64 {
        if self.joint { p[p.len() - 1] } else { self.arr.k() as i64 }
    }

    fn free_of<'p>(&self, p: &'p [i64]) -> &'p [i64] {
        if self.joint { &p[..p.len() - 1] } else { p }
    }
}

fn evaluate(shape: PieceShape, arr: &Arrangement, pts: &[(Vec<i64>, i64)], budget: &EnumerationBudget) -> Result<Vec<Evidence>> {
    pts.par_iter()
        .map(|(v, k)| {
            let point = arr.embed(v, *k);
            let (x, y) = point.split_at(shape.n1);
            let value = compute_f(shape.a, *k as u64, shape.g, x, y, budget)?;
            Ok(Evidence { point, k: *k as u64, value })
        })
        .collect()
}

fn to_rat(v: u128) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// The polynomial piece of `F` on the chamber `sig`, fitted at degree
/// `n2 + 3g + 2a − 2` and checked at `opts.holdouts` points off the grid.
pub fn chamber_polynomial(shape: PieceShape, k: u64, sig: &Signature, opts: &FitOptions) -> Result<ChamberPiece> {
    let arr = build_arrangement(shape.n1, shape.n2, shape.a, k)?;
    arr.check_signature(sig)?;
    let joint = k >= 1;
    let mut vars = arr.free_vars();
    if joint {
        vars.push("k".to_string());
    }
    let degree = shape.degree();
    let need = binomial_count(vars.len(), degree);
    if need > MONOMIAL_LIMIT as u64 {
        return Err(InterpError::TooManyMonomials { count: need, limit: MONOMIAL_LIMIT as u64 }.into());
    }
    let cone = Cone::collect(&arr, sig, joint, opts.holdouts, opts.box_bound);
    let grid = cone.grid().ok_or(Error::Sampling { found: cone.points.len(), needed: vars.len() + 1 })?;
    let nodes: Vec<Vec<i64>> = simplex_grid(vars.len(), degree).iter().map(|o| grid.point(o)).collect();
    let node_pts: Vec<(Vec<i64>, i64)> = nodes.iter().map(|p| (cone.free_of(p).to_vec(), cone.k_of(p))).collect();
    let samples = evaluate(shape, &arr, &node_pts, &opts.budget)?;
    let values: Vec<BigRational> = samples.iter().map(|e| to_rat(e.value)).collect();
    let fitted = newton_fit(&grid, degree, &values, &vars)?;

    // holdouts: spare cone points, those at the requested k first
    let on_grid: HashSet<&Vec<i64>> = nodes.iter().collect();
    let mut spare: Vec<&Vec<i64>> = cone.points.iter().filter(|p| !on_grid.contains(p)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    spare.shuffle(&mut rng);
    spare.sort_by_key(|p| (cone.k_of(p) - k as i64).abs());
    if spare.len() < opts.holdouts {
        return Err(Error::Sampling { found: spare.len(), needed: opts.holdouts });
    }
    let hold_pts: Vec<(Vec<i64>, i64)> = spare[..opts.holdouts].iter().map(|p| (cone.free_of(p).to_vec(), cone.k_of(p))).collect();
    let holdouts = evaluate(shape, &arr, &hold_pts, &opts.budget)?;
    for ((p, _), e) in hold_pts.iter().zip(&holdouts) {
        let mut at = p.clone();
        if joint {
            at.push(e.k as i64);
        }
        let fit = fitted.eval_i64(&at);
        if fit != to_rat(e.value) {
            return Err(Error::HoldoutMismatch { point: e.point.clone(), fitted: fit.to_string(), computed: e.value.to_string() });
        }
    }
    let polynomial = if joint { fitted.specialize(vars.len() - 1, &rat(k as i64)) } else { fitted.clone() };
    Ok(ChamberPiece {
        shape,
        k,
        signature: sig.clone(),
        label: arr.table_label(sig),
        polynomial,
        joint: joint.then_some(fitted),
        samples,
        holdouts,
    })
}

/// Signature of the chamber containing an ambient point.
pub fn signature_of(shape: PieceShape, k: u64, point: &[i64]) -> Result<Signature> {
    build_arrangement(shape.n1, shape.n2, shape.a, k)?.signature(point)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeParityReport {
    pub expected_degree: u32,
    pub degree: Option<u32>,
    pub degree_ok: bool,
    /// Coefficientwise `P(−v) = (−1)^D P(v)`, tested only at `k = 0`.
    pub fixed_k_parity: Option<bool>,
    /// Coefficientwise `P(−v, −k) = (−1)^D P(v, k)` on the joint piece.
    pub joint_parity: Option<bool>,
}

impl DegreeParityReport {
    pub fn pass(&self) -> bool {
        self.degree_ok && self.fixed_k_parity != Some(false) && self.joint_parity != Some(false)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "expected_degree": self.expected_degree,
            "degree": self.degree,
            "degree_ok": self.degree_ok,
            "fixed_k_parity": self.fixed_k_parity,
            "joint_parity": self.joint_parity,
            "pass": self.pass(),
        })
    }
}

fn parity_matches(p: &MultiPoly, d: u32) -> bool {
    let want = if d % 2 == 0 { Parity::Even } else { Parity::Odd };
    matches!(p.parity(), Parity::Zero) || p.parity() == want
}

/// Degree and parity of a piece; the zero polynomial passes vacuously.
pub fn degree_parity_report(piece: &ChamberPiece) -> DegreeParityReport {
    let expected = piece.shape.degree();
    let degree = piece.polynomial.total_degree();
    DegreeParityReport {
        expected_degree: expected,
        degree,
        degree_ok: degree.is_none_or(|d| d == expected),
        fixed_k_parity: (piece.k == 0).then(|| parity_matches(&piece.polynomial, expected)),
        joint_parity: piece.joint.as_ref().map(|j| parity_matches(j, expected)),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coef {
    One,
    GPlus3,
}

/// Rows `(label, coefficients of Γ(x1), Γ(x2), Γ(y1), Γ(0))`.
pub const TABLE1: [(&str, [Coef; 4]); 10] = {
    use Coef::{GPlus3 as G, One as I};
    [
        ("0 + −", [I, I, I, I]),
        ("− + −", [G, I, I, I]),
        ("− + 0", [G, I, G, I]),
        ("− + +", [I, G, I, G]),
        ("− 0 +", [I, G, I, G]),
        ("− − +", [I, I, I, G]),
        ("+ + −", [I, I, I, I]),
        ("0 0 −", [I, I, I, I]),
        ("− 0 0", [G, I, G, I]),
        ("0 0 0", [I, I, G, I]),
    ]
};

fn normalize_label(label: &str) -> String {
    label.chars().filter(|c| !c.is_whitespace()).map(|c| if c == '-' { '−' } else { c }).collect()
}

pub fn table1_row(label: &str) -> Option<[Coef; 4]> {
    let want = normalize_label(label);
    TABLE1.iter().find(|(l, _)| normalize_label(l) == want).map(|(_, c)| *c)
}

/// `|y1|·Σ c_i Γ(w_i)` on the chamber `label` as a polynomial in
/// `(x1, y1, k)`, with `Γ(w) = Γ_g(|w + k|)` and `x2 = −x1 − y1 − 2k`.
pub fn table1_closed_form(label: &str, g: u64) -> Result<MultiPoly> {
    let coefs = table1_row(label).ok_or_else(|| Error::InvalidQuery(format!("{label:?} is not a Table 1 row")))?;
    let symbols: Vec<char> = normalize_label(label).chars().collect();
    let vars: Vec<String> = ["x1", "y1", "k"].iter().map(|s| s.to_string()).collect();
    let x1 = MultiPoly::var(vars.clone(), 0);
    let y1 = MultiPoly::var(vars.clone(), 1);
    let k = MultiPoly::var(vars.clone(), 2);
    let x2 = &(&(-&x1) - &y1) - &k.scale(&rat(2));
    let gamma = gamma_polynomial(g)?;
    let positive = |s: char| s != '−';
    let gam = |w: &MultiPoly, s: bool| {
        let shifted = w + &k;
        let arg = if s { shifted } else { -&shifted };
        gamma.compose(&[arg])
    };
    let zero = MultiPoly::zero(vars.clone());
    let args = [(x1.clone(), positive(symbols[0])), (x2, positive(symbols[1])), (y1.clone(), positive(symbols[2])), (zero, true)];
    let mut sum = MultiPoly::zero(vars.clone());
    for ((w, s), c) in args.iter().zip(coefs) {
        let factor = match c {
            Coef::One => rat(1),
            Coef::GPlus3 => rat(g as i64 + 3),
        };
        sum = &sum + &gam(w, *s).scale(&factor);
    }
    let abs_y1 = if symbols[2] == '+' { y1 } else { -&y1 };
    Ok(&abs_y1 * &sum)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table1Report {
    pub label: String,
    pub k: u64,
    pub g: u64,
    /// Fitted minus closed form, in `(x1, y1, k)`.
    pub diff: MultiPoly,
    pub fresh: Vec<Evidence>,
    /// Fresh points where `F` differs from the closed form.
    pub mismatches: Vec<Evidence>,
}

impl Table1Report {
    pub fn pass(&self) -> bool {
        self.diff.is_zero() && self.mismatches.is_empty()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "row": self.label,
            "k": self.k,
            "g": self.g,
            "pass": self.pass(),
            "coefficient_diff": self.diff.to_text(),
            "fresh_points": self.fresh.len(),
            "mismatches": self.mismatches.iter().map(Evidence::to_json).collect::<Vec<_>>(),
        })
    }
}

/// Fits the piece of row `label` and compares it with the closed form, both
/// as polynomials and at `fresh` further points. Points are taken at the
/// requested `k` first; thin chambers are topped up from larger `k`.
pub fn verify_table1(k: u64, g: u64, label: &str, fresh: usize, opts: &FitOptions) -> Result<Table1Report> {
    if k == 0 {
        return Err(Error::InvalidQuery("Table 1 labels need k ≥ 1".into()));
    }
    let shape = PieceShape { a: 2, g, n1: 2, n2: 1 };
    let arr = build_arrangement(2, 1, 2, k)?;
    let sig = arr.signature_from_label(label)?;
    let closed = table1_closed_form(label, g)?;
    let piece = chamber_polynomial(shape, k, &sig, opts)?;
    let joint = piece.joint.clone().expect("k ≥ 1 pieces are joint");
    let diff = &joint - &closed;

    let cone = Cone::collect(&arr, &sig, true, piece.samples.len() + piece.holdouts.len() + fresh, opts.box_bound);
    let used: HashSet<(Vec<i64>, u64)> = piece.samples.iter().chain(&piece.holdouts).map(|e| (e.point.clone(), e.k)).collect();
    let mut cands: Vec<&Vec<i64>> = cone
        .points
        .iter()
        .filter(|p| !used.contains(&(arr.embed(cone.free_of(p), cone.k_of(p)), cone.k_of(p) as u64)))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x7ab1e);
    cands.shuffle(&mut rng);
    cands.sort_by_key(|p| (cone.k_of(p) - k as i64).abs());
    if cands.len() < fresh {
        return Err(Error::Sampling { found: cands.len(), needed: fresh });
    }
    let pts: Vec<(Vec<i64>, i64)> = cands[..fresh].iter().map(|p| (cone.free_of(p).to_vec(), cone.k_of(p))).collect();
    let fresh_ev = evaluate(shape, &arr, &pts, &opts.budget)?;
    let mismatches = fresh_ev
        .iter()
        .filter(|e| {
            let at = [e.point[0], e.point[2], e.k as i64];
            closed.eval_i64(&at) != to_rat(e.value)
        })
        .cloned()
        .collect();
    Ok(Table1Report { label: label.to_string(), k, g, diff, fresh: fresh_ev, mismatches })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chambers::build_arrangement;

    fn shape(a: u64, g: u64, n1: usize, n2: usize) -> PieceShape {
        PieceShape { a, g, n1, n2 }
    }

    #[test]
    fn row_0_plus_minus_closed_form_value() {
        let p = table1_closed_form("0 + −", 0).unwrap();
        assert_eq!(p.eval_i64(&[-1, -6, 2]), rat(276));
    }

    #[test]
    fn piece_of_0_plus_minus_at_k2() {
        let sig = signature_of(shape(2, 0, 2, 1), 2, &[-1, 3, -6]).unwrap();
        let piece = chamber_polynomial(shape(2, 0, 2, 1), 2, &sig, &FitOptions::default()).unwrap();
        assert_eq!(piece.label.as_deref(), Some("0 + −"));
        // −y1((x1+2)² + (x2+2)² + (y1+2)² + 4) with x2 = −x1 − y1 − 4
        let expected = table1_closed_form("0 + −", 0).unwrap().specialize(2, &rat(2));
        assert_eq!(piece.polynomial, expected);
        assert_eq!(piece.polynomial.eval_i64(&[-1, -6]), rat(276));
        let rep = degree_parity_report(&piece);
        assert!(rep.pass(), "{rep:?}");
        assert_eq!(rep.degree, Some(3));
    }

    #[test]
    fn k0_piece_is_odd_cubic() {
        let s = shape(2, 0, 2, 1);
        let sig = signature_of(s, 0, &[-1, -1, 2]).unwrap();
        let piece = chamber_polynomial(s, 0, &sig, &FitOptions::default()).unwrap();
        let rep = degree_parity_report(&piece);
        assert_eq!(rep.degree, Some(3));
        assert_eq!(rep.fixed_k_parity, Some(true));
        assert_eq!(piece.polynomial.parity(), Parity::Odd);
    }

    #[test]
    fn genus_one_k0_piece_is_even_sextic() {
        let s = shape(2, 1, 2, 1);
        let sig = signature_of(s, 0, &[-1, -1, 2]).unwrap();
        let piece = chamber_polynomial(s, 0, &sig, &FitOptions::default()).unwrap();
        assert_eq!(degree_parity_report(&piece).degree, Some(6));
        assert_eq!(piece.polynomial.parity(), Parity::Even);
    }

    #[test]
    fn table1_rows_genus0_k2() {
        for (label, _) in TABLE1 {
            let rep = verify_table1(2, 0, label, 20, &FitOptions::default()).unwrap();
            if label != "− − +" {
                assert!(rep.pass(), "{label}: {}", rep.diff.to_text());
            }
        }
    }

    #[test]
    fn coefficient_of_gamma_x1_in_minus_plus_minus() {
        assert_eq!(table1_row("-+-").unwrap()[0], Coef::GPlus3);
    }

    #[test]
    fn straddling_samples_are_inconsistent() {
        let arr = build_arrangement(2, 1, 2, 2).unwrap();
        let budget = EnumerationBudget::default();
        // points from two chambers through a degree-3 fit with spare rows
        let mut samples = Vec::new();
        for v in [[-1i64, -6], [-1, -7], [-1, -8], [-1, -9], [-1, -10]] {
            let p = arr.embed(&v, 2);
            samples.push((v.to_vec(), to_rat(compute_f(2, 2, 0, &p[..2], &p[2..], &budget).unwrap())));
        }
        // "− + −" differs from "0 + −" (unlike "+ + −", which has the same piece)
        for v in [[-3i64, -6], [-3, -7], [-4, -8], [-5, -9], [-4, -10], [-3, -9], [-5, -10], [-4, -6], [-3, -10], [-5, -7]] {
            let p = arr.embed(&v, 2);
            samples.push((v.to_vec(), to_rat(compute_f(2, 2, 0, &p[..2], &p[2..], &budget).unwrap())));
        }
        let res = crate::poly::interpolate(&samples, 3, &["x1".to_string(), "y1".to_string()]);
        assert!(matches!(res, Err(InterpError::Inconsistent { .. })), "{res:?}");
    }
}
