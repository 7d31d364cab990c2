//! The wall arrangement on `Λ = {(x, y) : Σx + Σy + a·k = 0}`, chamber
//! signatures and lattice sampling inside chambers.
//!
//! Points of `Λ` are handled in two coordinate systems: ambient
//! `(x_1..x_{n1}, y_1..y_{n2})`, and free coordinates obtained by dropping
//! `x_{n1}` (or `y_{n2}` when `n1 = 0`).

use std::collections::BTreeMap;
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};

/// `Σ x_coeffs·x + Σ y_coeffs·y + const_times_k·k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LinearForm {
    pub x_coeffs: Vec<i64>,
    pub y_coeffs: Vec<i64>,
    pub const_times_k: i64,
}

impl LinearForm {
    pub fn eval(&self, point: &[i64], k: i64) -> i64 {
        let coeffs = self.x_coeffs.iter().chain(&self.y_coeffs);
        coeffs.zip(point).map(|(c, v)| c * v).sum::<i64>() + self.const_times_k * k
    }

    fn support(&self) -> usize {
        self.x_coeffs.iter().chain(&self.y_coeffs).filter(|&&c| c != 0).count() + (self.const_times_k != 0) as usize
    }

    fn first_var(&self) -> usize {
        self.x_coeffs.iter().chain(&self.y_coeffs).position(|&c| c != 0).unwrap_or(usize::MAX)
    }

    fn negated(&self) -> LinearForm {
        LinearForm {
            x_coeffs: self.x_coeffs.iter().map(|c| -c).collect(),
            y_coeffs: self.y_coeffs.iter().map(|c| -c).collect(),
            const_times_k: -self.const_times_k,
        }
    }
}

impl fmt::Display for LinearForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms: Vec<(i64, String)> = Vec::new();
        for (i, &c) in self.x_coeffs.iter().enumerate() {
            terms.push((c, format!("x{}", i + 1)));
        }
        for (j, &c) in self.y_coeffs.iter().enumerate() {
            terms.push((c, format!("y{}", j + 1)));
        }
        terms.push((self.const_times_k, "k".to_string()));
        let mut out = String::new();
        for (c, name) in terms.into_iter().filter(|(c, _)| *c != 0) {
            let sign = if c < 0 { "-" } else { "+" };
            if out.is_empty() {
                if c < 0 {
                    out.push('-');
                }
            } else {
                out.push_str(&format!(" {sign} "));
            }
            if c.abs() != 1 {
                out.push_str(&c.abs().to_string());
            }
            out.push_str(&name);
        }
        if out.is_empty() {
            out.push('0');
        }
        f.write_str(&out)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Arrangement {
    n1: usize,
    n2: usize,
    a: u64,
    k: u64,
    forms: Vec<LinearForm>,
    /// Each form restricted to `Λ`: coefficients on the free coordinates
    /// and on `k`.
    reduced: Vec<(Vec<i64>, i64)>,
}

/// The walls that separate regions of polynomiality of `F`: cut forms
/// `Σ_{S} x + Σ_{T} y + r·k` where both sides of the cut could be
/// connected in a floor diagram, together with `y_i − y_j`.
pub fn build_arrangement(n1: usize, n2: usize, a: u64, k: u64) -> Result<Arrangement> {
    Arrangement::new(n1, n2, a, k, true)
}

impl Arrangement {
    /// Every cut form `(S, T, r)` with `0 ≤ r ≤ a`, without the
    /// connectivity filter.
    pub fn full(n1: usize, n2: usize, a: u64, k: u64) -> Result<Arrangement> {
        Arrangement::new(n1, n2, a, k, false)
    }

    fn new(n1: usize, n2: usize, a: u64, k: u64, connected: bool) -> Result<Arrangement> {
        let n = n1 + n2;
        if n == 0 {
            return Err(Error::InvalidQuery("n1 + n2 must be positive".into()));
        }
        if a == 0 {
            return Err(Error::ZeroA);
        }
        if n > 16 {
            return Err(Error::InvalidQuery("at most 16 coordinates".into()));
        }
        let mut candidates = Vec::new();
        for mask in 1u32..(1 << n) {
            let n_w = mask.count_ones() as usize;
            let comp = n - n_w;
            for r in 0..=a {
                if connected && (comp == 0 || (r == 0 && n_w != 1) || (r == a && comp != 1)) {
                    continue;
                }
                let coeffs: Vec<i64> = (0..n).map(|i| (mask >> i & 1) as i64).collect();
                candidates.push(LinearForm {
                    x_coeffs: coeffs[..n1].to_vec(),
                    y_coeffs: coeffs[n1..].to_vec(),
                    const_times_k: r as i64,
                });
            }
        }
        for i in 0..n2 {
            for j in i + 1..n2 {
                let mut y = vec![0; n2];
                y[i] = 1;
                y[j] = -1;
                candidates.push(LinearForm { x_coeffs: vec![0; n1], y_coeffs: y, const_times_k: 0 });
            }
        }
        let mut arr = Arrangement { n1, n2, a, k, forms: Vec::new(), reduced: Vec::new() };
        // reduced key (numeric in k) -> best display form
        let mut groups: BTreeMap<(Vec<i64>, i64), LinearForm> = BTreeMap::new();
        for f in candidates {
            let (c, kc) = arr.reduce(&f);
            if c.iter().all(|&v| v == 0) {
                continue;
            }
            let mut key = (c, kc * k as i64);
            let neg = (key.0.iter().map(|v| -v).collect::<Vec<_>>(), -key.1);
            if neg < key {
                key = neg;
            }
            let better = match groups.get(&key) {
                None => true,
                Some(old) => f.support() < old.support(),
            };
            if better {
                groups.insert(key, f);
            }
        }
        let mut forms: Vec<LinearForm> = groups
            .into_values()
            .map(|f| {
                let lead = f.x_coeffs.iter().chain(&f.y_coeffs).find(|&&c| c != 0).copied().unwrap_or(0);
                if lead < 0 { f.negated() } else { f }
            })
            .collect();
        forms.sort_by(|p, q| {
            (p.first_var(), p.support(), q.x_coeffs.clone(), q.y_coeffs.clone(), p.const_times_k).cmp(&(
                q.first_var(),
                q.support(),
                p.x_coeffs.clone(),
                p.y_coeffs.clone(),
                q.const_times_k,
            ))
        });
        arr.reduced = forms.iter().map(|f| arr.reduce(f)).collect();
        arr.forms = forms;
        Ok(arr)
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    pub fn a(&self) -> u64 {
        self.a
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn forms(&self) -> &[LinearForm] {
        &self.forms
    }

    fn dependent(&self) -> usize {
        if self.n1 > 0 { self.n1 - 1 } else { self.n2 - 1 }
    }

    pub fn num_free(&self) -> usize {
        self.n1 + self.n2 - 1
    }

    pub fn free_vars(&self) -> Vec<String> {
        let dep = self.dependent();
        (0..self.n1)
            .map(|i| format!("x{}", i + 1))
            .chain((0..self.n2).map(|j| format!("y{}", j + 1)))
            .enumerate()
            .filter(|(i, _)| *i != dep)
            .map(|(_, v)| v)
            .collect()
    }

    /// Restriction of `f` to `Λ`: coefficients on the free coordinates and
    /// on `k`.
    pub fn reduce(&self, f: &LinearForm) -> (Vec<i64>, i64) {
        let dep = self.dependent();
        let all: Vec<i64> = f.x_coeffs.iter().chain(&f.y_coeffs).copied().collect();
        let e = all[dep];
        let coeffs = all.iter().enumerate().filter(|(i, _)| *i != dep).map(|(_, c)| c - e).collect();
        (coeffs, f.const_times_k - e * self.a as i64)
    }

    /// The point of `Λ` with the given free coordinates at dilation `k`.
    pub fn embed(&self, free: &[i64], k: i64) -> Vec<i64> {
        let dep = self.dependent();
        let rest: i64 = free.iter().sum::<i64>() + self.a as i64 * k;
        let mut out = free.to_vec();
        out.insert(dep, -rest);
        out
    }

    pub fn project(&self, point: &[i64]) -> Vec<i64> {
        let dep = self.dependent();
        point.iter().enumerate().filter(|(i, _)| *i != dep).map(|(_, &v)| v).collect()
    }

    pub fn in_lattice(&self, point: &[i64]) -> bool {
        point.len() == self.n1 + self.n2 && point.iter().sum::<i64>() + (self.a * self.k) as i64 == 0
    }

    pub fn signature(&self, point: &[i64]) -> Result<Signature> {
        if !self.in_lattice(point) {
            return Err(Error::NotInLattice(format!(
                "point {point:?} does not satisfy Σx + Σy + {}·{} = 0 with n1 = {}, n2 = {}",
                self.a, self.k, self.n1, self.n2
            )));
        }
        let mut signs = Vec::with_capacity(self.forms.len());
        for f in &self.forms {
            let v = f.eval(point, self.k as i64);
            if v == 0 {
                return Err(Error::OnWall(f.to_string()));
            }
            signs.push(v > 0);
        }
        Ok(Signature(signs))
    }

    /// Signature of the free point `v` at dilation `k`, or `None` on a wall.
    pub fn signature_free(&self, v: &[i64], k: i64) -> Option<Signature> {
        let mut signs = Vec::with_capacity(self.reduced.len());
        for (c, kc) in &self.reduced {
            let val = c.iter().zip(v).map(|(a, b)| a * b).sum::<i64>() + kc * k;
            if val == 0 {
                return None;
            }
            signs.push(val > 0);
        }
        Some(Signature(signs))
    }

    /// Whether `v` at dilation `k` lies strictly inside the chamber `sig`.
    pub fn in_chamber(&self, sig: &Signature, v: &[i64], k: i64) -> bool {
        self.reduced.iter().zip(&sig.0).all(|((c, kc), &s)| {
            let val = c.iter().zip(v).map(|(a, b)| a * b).sum::<i64>() + kc * k;
            if s { val > 0 } else { val < 0 }
        })
    }

    pub fn check_signature(&self, sig: &Signature) -> Result<()> {
        if sig.len() != self.forms.len() {
            return Err(Error::InvalidQuery(format!(
                "signature has {} signs, the arrangement has {} walls",
                sig.len(),
                self.forms.len()
            )));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "n1": self.n1,
            "n2": self.n2,
            "a": self.a,
            "k": self.k,
            "forms": self.forms,
        })
    }

    /// Lattice points of `sig` in `Λ ∩ [−B, B]^{n1+n2}`, in a seeded random
    /// order, at most `count` of them.
    pub fn sample_chamber(&self, sig: &Signature, count: usize, box_bound: u64, seed: u64) -> Result<Sample> {
        self.check_signature(sig)?;
        let b = box_bound as i64;
        let k = self.k as i64;
        let mut found = Vec::new();
        for_each_box_point(self.num_free(), b, &mut |v| {
            if self.in_chamber(sig, v, k) {
                let p = self.embed(v, k);
                if p[self.dependent()].abs() <= b {
                    found.push(p);
                }
            }
        });
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        found.shuffle(&mut rng);
        let exhausted = found.len() < count;
        found.truncate(count);
        Ok(Sample { points: found, exhausted })
    }

    /// Every chamber meeting `Λ ∩ [−B, B]^{n1+n2}`, with its number of
    /// lattice points there and the one of smallest norm.
    pub fn chambers_in_box(&self, box_bound: u64) -> Vec<ChamberInfo> {
        let b = box_bound as i64;
        let k = self.k as i64;
        let mut seen: BTreeMap<Signature, ChamberInfo> = BTreeMap::new();
        for_each_box_point(self.num_free(), b, &mut |v| {
            let p = self.embed(v, k);
            if p[self.dependent()].abs() > b {
                return;
            }
            if let Some(sig) = self.signature_free(v, k) {
                let norm: i64 = p.iter().map(|c| c * c).sum();
                let e = seen.entry(sig.clone()).or_insert_with(|| ChamberInfo {
                    signature: sig,
                    points: 0,
                    representative: p.clone(),
                });
                e.points += 1;
                let old: i64 = e.representative.iter().map(|c| c * c).sum();
                if (norm, &p) < (old, &e.representative) {
                    e.representative = p;
                }
            }
        });
        seen.into_values().collect()
    }

    /// Lattice points strictly inside the cone of `sig` in free coordinates
    /// with `|v_i| ≤ box_bound`; with `ks = Some(range)` the cone lives in
    /// `(v, k)` and the last coordinate of each point is `k`.
    pub fn cone_points(&self, sig: &Signature, box_bound: u64, ks: Option<std::ops::RangeInclusive<i64>>) -> Vec<Vec<i64>> {
        let b = box_bound as i64;
        let mut out = Vec::new();
        match ks {
            None => for_each_box_point(self.num_free(), b, &mut |v| {
                if self.in_chamber(sig, v, self.k as i64) {
                    out.push(v.to_vec());
                }
            }),
            Some(range) => {
                for k in range {
                    for_each_box_point(self.num_free(), b, &mut |v| {
                        if self.in_chamber(sig, v, k) {
                            let mut p = v.to_vec();
                            p.push(k);
                            out.push(p);
                        }
                    });
                }
            }
        }
        out
    }

    /// Table-1 labels are defined for `(n1, n2, a) = (2, 1, 2)` with `k ≥ 1`,
    /// where the walls are `x1, x1+k, x2, x2+k, y1, y1+k`.
    fn has_table_labels(&self) -> bool {
        self.n1 == 2 && self.n2 == 1 && self.a == 2 && self.k >= 1 && self.forms.len() == 6
    }

    /// Three-symbol label: per variable `+` if positive, `0` if in `(−k, 0)`
    /// and `−` if below `−k`.
    pub fn table_label(&self, sig: &Signature) -> Option<String> {
        if !self.has_table_labels() || sig.len() != 6 {
            return None;
        }
        let mut symbols = Vec::new();
        for pair in sig.0.chunks(2) {
            symbols.push(match (pair[0], pair[1]) {
                (true, true) => "+",
                (false, true) => "0",
                (false, false) => "−",
                (true, false) => return None,
            });
        }
        Some(symbols.join(" "))
    }

    pub fn signature_from_label(&self, label: &str) -> Result<Signature> {
        if !self.has_table_labels() {
            return Err(Error::InvalidQuery("three-symbol labels need (n1, n2, a) = (2, 1, 2) and k ≥ 1".into()));
        }
        let symbols: Vec<char> = label.chars().filter(|c| !c.is_whitespace()).collect();
        if symbols.len() != 3 {
            return Err(Error::Parse(format!("label {label:?} needs three symbols")));
        }
        let mut signs = Vec::new();
        for c in symbols {
            let pair = match c {
                '+' => [true, true],
                '0' => [false, true],
                '-' | '−' => [false, false],
                _ => return Err(Error::Parse(format!("unknown symbol {c:?} in label"))),
            };
            signs.extend(pair);
        }
        Ok(Signature(signs))
    }
}

fn for_each_box_point(m: usize, b: i64, f: &mut dyn FnMut(&[i64])) {
    let mut v = vec![-b; m];
    loop {
        f(&v);
        let mut i = m;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if v[i] < b {
                v[i] += 1;
                break;
            }
            v[i] = -b;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sample {
    pub points: Vec<Vec<i64>>,
    /// Fewer points than requested were found within the box.
    pub exhausted: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChamberInfo {
    pub signature: Signature,
    pub points: u64,
    pub representative: Vec<i64>,
}

/// Sign of each wall, `true` for positive.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Signature(pub Vec<bool>);

impl Signature {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn parse(s: &str) -> Result<Signature> {
        s.chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                '+' => Ok(true),
                '-' | '−' => Ok(false),
                _ => Err(Error::Parse(format!("unknown sign {c:?} in signature"))),
            })
            .collect::<Result<Vec<bool>>>()
            .map(Signature)
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.0 {
            f.write_str(if s { "+" } else { "−" })?;
        }
        Ok(())
    }
}
