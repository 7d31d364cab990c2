//! Exact multivariate polynomials over the rationals.

mod interp;

pub use interp::{binomial_count, interpolate, monomials, newton_fit, simplex_grid, AffineGrid, InterpError, MONOMIAL_LIMIT};

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

/// Exponent vector ordered graded-lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Mono(Vec<u32>);

impl Mono {
    fn degree(&self) -> u32 {
        self.0.iter().sum()
    }
}

impl Ord for Mono {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Zero,
    Even,
    Odd,
    Mixed,
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Zero => "zero",
            Parity::Even => "even",
            Parity::Odd => "odd",
            Parity::Mixed => "mixed",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiPoly {
    vars: Vec<String>,
    terms: BTreeMap<Mono, BigRational>,
}

pub fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl MultiPoly {
    pub fn zero(vars: Vec<String>) -> Self {
        MultiPoly { vars, terms: BTreeMap::new() }
    }

    pub fn constant(vars: Vec<String>, c: BigRational) -> Self {
        let n = vars.len();
        Self::from_terms(vars, [(vec![0; n], c)])
    }

    /// The coordinate function of variable `i`.
    pub fn var(vars: Vec<String>, i: usize) -> Self {
        let mut e = vec![0; vars.len()];
        e[i] = 1;
        Self::from_terms(vars, [(e, BigRational::one())])
    }

    /// Sums coefficients of repeated exponents and drops zeros.
    pub fn from_terms<I: IntoIterator<Item = (Vec<u32>, BigRational)>>(vars: Vec<String>, terms: I) -> Self {
        let mut p = MultiPoly::zero(vars);
        for (e, c) in terms {
            assert_eq!(e.len(), p.vars.len(), "exponent length must match variable count");
            p.add_term(Mono(e), c);
        }
        p
    }

    /// Affine form `c0 + Σ c_i v_i`.
    pub fn linear(vars: Vec<String>, coeffs: &[BigRational], c0: BigRational) -> Self {
        let n = vars.len();
        let mut terms = vec![(vec![0; n], c0)];
        for (i, c) in coeffs.iter().enumerate() {
            let mut e = vec![0; n];
            e[i] = 1;
            terms.push((e, c.clone()));
        }
        Self::from_terms(vars, terms)
    }

    fn add_term(&mut self, m: Mono, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in ascending graded-lexicographic order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&[u32], &BigRational)> {
        self.terms.iter().map(|(m, c)| (m.0.as_slice(), c))
    }

    pub fn coefficient(&self, exp: &[u32]) -> BigRational {
        self.terms.get(&Mono(exp.to_vec())).cloned().unwrap_or_else(BigRational::zero)
    }

    /// `None` for the zero polynomial.
    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().next_back().map(Mono::degree)
    }

    /// Highest exponent of variable `i`.
    pub fn degree_in(&self, i: usize) -> u32 {
        self.terms.keys().map(|m| m.0[i]).max().unwrap_or(0)
    }

    /// Parity of the total degrees of the terms, i.e. whether
    /// `P(-v) = ±P(v)` holds coefficientwise.
    pub fn parity(&self) -> Parity {
        let mut seen = [false, false];
        for m in self.terms.keys() {
            seen[(m.degree() % 2) as usize] = true;
        }
        match seen {
            [false, false] => Parity::Zero,
            [true, false] => Parity::Even,
            [false, true] => Parity::Odd,
            [true, true] => Parity::Mixed,
        }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return MultiPoly::zero(self.vars.clone());
        }
        MultiPoly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    pub fn eval(&self, point: &[BigRational]) -> BigRational {
        assert_eq!(point.len(), self.vars.len());
        let mut powers: Vec<Vec<BigRational>> = Vec::with_capacity(point.len());
        for (i, v) in point.iter().enumerate() {
            let d = self.degree_in(i) as usize;
            let mut row = Vec::with_capacity(d + 1);
            row.push(BigRational::one());
            for j in 0..d {
                let next = &row[j] * v;
                row.push(next);
            }
            powers.push(row);
        }
        let mut acc = BigRational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    t *= &powers[i][e as usize];
                }
            }
            acc += t;
        }
        acc
    }

    pub fn eval_i64(&self, point: &[i64]) -> BigRational {
        let p: Vec<BigRational> = point.iter().map(|&v| rat(v)).collect();
        self.eval(&p)
    }

    /// Simultaneous substitution `v_i ↦ subs[i]`; all substitutes share one
    /// variable list, which becomes the variable list of the result.
    pub fn compose(&self, subs: &[MultiPoly]) -> MultiPoly {
        assert_eq!(subs.len(), self.vars.len());
        let target = subs.first().map(|s| s.vars.clone()).unwrap_or_default();
        let terms: Vec<(Vec<u32>, BigRational)> = self.terms.iter().map(|(m, c)| (m.0.clone(), c.clone())).collect();
        compose_rec(terms, 0, subs, &target)
    }

    /// Replaces variable `i` by the polynomial `p` (over the same variables).
    pub fn substitute(&self, i: usize, p: &MultiPoly) -> MultiPoly {
        let subs: Vec<MultiPoly> = (0..self.nvars())
            .map(|j| if j == i { p.clone() } else { MultiPoly::var(self.vars.clone(), j) })
            .collect();
        self.compose(&subs)
    }

    /// Fixes variable `i` to `value` and drops it from the variable list.
    pub fn specialize(&self, i: usize, value: &BigRational) -> MultiPoly {
        let mut vars = self.vars.clone();
        vars.remove(i);
        let mut out = MultiPoly::zero(vars);
        for (m, c) in &self.terms {
            let mut e = m.0.clone();
            let power = e.remove(i);
            let mut coef = c.clone();
            for _ in 0..power {
                coef *= value;
            }
            out.add_term(Mono(e), coef);
        }
        out
    }

    /// Same terms under new variable names.
    pub fn rename(&self, vars: Vec<String>) -> MultiPoly {
        assert_eq!(vars.len(), self.vars.len());
        MultiPoly { vars, terms: self.terms.clone() }
    }

    /// Terms of total degree exactly `d`.
    pub fn homogeneous_part(&self, d: u32) -> MultiPoly {
        MultiPoly {
            vars: self.vars.clone(),
            terms: self.terms.iter().filter(|(m, _)| m.degree() == d).map(|(m, c)| (m.clone(), c.clone())).collect(),
        }
    }

    pub fn to_text(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (idx, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if idx == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mono: Vec<String> = m
                .0
                .iter()
                .zip(&self.vars)
                .filter(|(e, _)| **e > 0)
                .map(|(e, v)| if *e == 1 { v.clone() } else { format!("{v}^{e}") })
                .collect();
            if mono.is_empty() {
                out.push_str(&abs.to_string());
            } else if abs.is_one() {
                out.push_str(&mono.join("*"));
            } else {
                out.push_str(&format!("{}*{}", abs, mono.join("*")));
            }
        }
        out
    }

    pub fn to_latex(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let var_tex = |v: &str| -> String {
            let split = v.find(|c: char| c.is_ascii_digit());
            match split {
                Some(pos) if pos > 0 => format!("{}_{{{}}}", &v[..pos], &v[pos..]),
                _ => v.to_string(),
            }
        };
        let mut out = String::new();
        for (idx, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if idx == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mono: Vec<String> = m
                .0
                .iter()
                .zip(&self.vars)
                .filter(|(e, _)| **e > 0)
                .map(|(e, v)| if *e == 1 { var_tex(v) } else { format!("{}^{{{}}}", var_tex(v), e) })
                .collect();
            let coef = if abs.is_integer() {
                abs.numer().to_string()
            } else {
                format!("\\frac{{{}}}{{{}}}", abs.numer(), abs.denom())
            };
            if mono.is_empty() {
                out.push_str(&coef);
            } else if abs.is_one() {
                out.push_str(&mono.join(" "));
            } else {
                out.push_str(&format!("{} {}", coef, mono.join(" ")));
            }
        }
        out
    }

    /// `{"vars":[..],"terms":[{"exp":[..],"num":"..","den":".."}]}`, terms
    /// in descending graded-lexicographic order.
    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .terms
            .iter()
            .rev()
            .map(|(m, c)| json!({"exp": m.0, "num": c.numer().to_string(), "den": c.denom().to_string()}))
            .collect();
        json!({"vars": self.vars, "terms": terms})
    }

    pub fn from_json(v: &Value) -> Option<MultiPoly> {
        let vars: Vec<String> = serde_json::from_value(v.get("vars")?.clone()).ok()?;
        let mut terms = Vec::new();
        for t in v.get("terms")?.as_array()? {
            let exp: Vec<u32> = serde_json::from_value(t.get("exp")?.clone()).ok()?;
            let num: BigInt = t.get("num")?.as_str()?.parse().ok()?;
            let den: BigInt = t.get("den")?.as_str()?.parse().ok()?;
            if den.is_zero() || exp.len() != vars.len() {
                return None;
            }
            terms.push((exp, BigRational::new(num, den)));
        }
        Some(MultiPoly::from_terms(vars, terms))
    }
}

fn compose_rec(terms: Vec<(Vec<u32>, BigRational)>, level: usize, subs: &[MultiPoly], target: &[String]) -> MultiPoly {
    if terms.is_empty() {
        return MultiPoly::zero(target.to_vec());
    }
    if level == subs.len() {
        let c = terms.into_iter().fold(BigRational::zero(), |acc, (_, c)| acc + c);
        return MultiPoly::constant(target.to_vec(), c);
    }
    let max_e = terms.iter().map(|(e, _)| e[level]).max().unwrap_or(0) as usize;
    let mut groups: Vec<Vec<(Vec<u32>, BigRational)>> = vec![Vec::new(); max_e + 1];
    for t in terms {
        let e = t.0[level] as usize;
        groups[e].push(t);
    }
    let mut acc = MultiPoly::zero(target.to_vec());
    for g in groups.into_iter().rev() {
        acc = &acc * &subs[level];
        acc = &acc + &compose_rec(g, level + 1, subs, target);
    }
    acc
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl Add for &MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: &MultiPoly) -> MultiPoly {
        assert_eq!(self.vars.len(), rhs.vars.len());
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: &MultiPoly) -> MultiPoly {
        assert_eq!(self.vars.len(), rhs.vars.len());
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        self.scale(&-BigRational::one())
    }
}

impl Mul for &MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: &MultiPoly) -> MultiPoly {
        assert_eq!(self.vars.len(), rhs.vars.len());
        let mut out = MultiPoly::zero(self.vars.clone());
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                let e: Vec<u32> = ma.0.iter().zip(&mb.0).map(|(a, b)| a + b).collect();
                out.add_term(Mono(e), ca * cb);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn vars(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    fn sample_poly() -> MultiPoly {
        // -x1^2*y1 + 3/2*x1 - 4
        MultiPoly::from_terms(
            vars(&["x1", "y1"]),
            [
                (vec![2, 1], rat(-1)),
                (vec![1, 0], BigRational::new(3.into(), 2.into())),
                (vec![0, 0], rat(-4)),
            ],
        )
    }

    #[test]
    fn text_and_latex() {
        let p = sample_poly();
        assert_eq!(p.to_text(), "-x1^2*y1 + 3/2*x1 - 4");
        assert_eq!(p.to_latex(), "-x_{1}^{2} y_{1} + \\frac{3}{2} x_{1} - 4");
        assert_eq!(MultiPoly::zero(vars(&["v"])).to_text(), "0");
    }

    #[test]
    fn json_round_trip() {
        let p = sample_poly();
        let j = p.to_json();
        assert_eq!(
            j.to_string(),
            r#"{"vars":["x1","y1"],"terms":[{"exp":[2,1],"num":"-1","den":"1"},{"exp":[1,0],"num":"3","den":"2"},{"exp":[0,0],"num":"-4","den":"1"}]}"#
        );
        assert_eq!(MultiPoly::from_json(&j), Some(p));
    }

    #[test]
    fn degree_and_parity() {
        let p = sample_poly();
        assert_eq!(p.total_degree(), Some(3));
        assert_eq!(p.parity(), Parity::Mixed);
        assert_eq!(p.homogeneous_part(3).parity(), Parity::Odd);
        assert_eq!(MultiPoly::zero(vars(&["v"])).parity(), Parity::Zero);
    }

    #[test]
    fn substitute_and_specialize() {
        // x1 -> x1 + 1 in x1^2 gives x1^2 + 2 x1 + 1
        let v = vars(&["x1"]);
        let sq = MultiPoly::from_terms(v.clone(), [(vec![2], rat(1))]);
        let shift = MultiPoly::linear(v.clone(), &[rat(1)], rat(1));
        let out = sq.substitute(0, &shift);
        assert_eq!(out.to_text(), "x1^2 + 2*x1 + 1");
        let s = sample_poly().specialize(1, &rat(2));
        assert_eq!(s.to_text(), "-2*x1^2 + 3/2*x1 - 4");
        assert_eq!(s.vars(), &["x1".to_string()]);
    }

    #[test]
    fn product_matches_evaluation() {
        let p = sample_poly();
        let q = &p * &p;
        for pt in [[1i64, 2], [-3, 5], [0, 0]] {
            let a = p.eval_i64(&pt);
            assert_eq!(q.eval_i64(&pt), &a * &a);
        }
    }

    proptest! {
        #[test]
        fn compose_commutes_with_eval(
            coeffs in proptest::collection::vec(-5i64..5, 6),
            a in -3i64..3, b in -3i64..3, c in -3i64..3,
            u in -4i64..4, w in -4i64..4,
        ) {
            let v = vars(&["u", "w"]);
            let exps = [[0u32, 0], [1, 0], [0, 1], [2, 0], [1, 1], [0, 2]];
            let p = MultiPoly::from_terms(v.clone(), exps.iter().zip(&coeffs).map(|(e, &c)| (e.to_vec(), rat(c))));
            let s0 = MultiPoly::linear(v.clone(), &[rat(a), rat(b)], rat(c));
            let s1 = MultiPoly::linear(v.clone(), &[rat(b), rat(1)], rat(a));
            let composed = p.compose(&[s0.clone(), s1.clone()]);
            let inner = [s0.eval_i64(&[u, w]), s1.eval_i64(&[u, w])];
            prop_assert_eq!(composed.eval_i64(&[u, w]), p.eval(&inner));
        }
    }
}
