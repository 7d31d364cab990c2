//! Brute-force reference enumeration: every color word, every ordering of
//! the white values, every choice of endpoints and attachments and every
//! gray weight up to the total supply, filtered by [`FloorDiagram::validate`].
//!
//! Meant only for small queries in tests and verification.

use std::collections::BTreeSet;

use rayon::prelude::*;

use crate::diagram::{Color, FloorDiagram, Node, Template, Weights};
use crate::enumerate::EnumerationQuery;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleResult {
    /// JSON forms of the valid diagrams.
    pub diagrams: BTreeSet<String>,
    pub weighted: u128,
}

fn words(counts: [usize; 3]) -> Vec<Vec<Color>> {
    let n: usize = counts.iter().sum();
    let mut out = Vec::new();
    let colors = [Color::Black, Color::Gray, Color::White];
    let mut idx = vec![0usize; n];
    loop {
        let w: Vec<Color> = idx.iter().map(|&i| colors[i]).collect();
        let c = [0, 1, 2].map(|j| idx.iter().filter(|&&i| i == j).count());
        if c == counts {
            out.push(w);
        }
        let mut i = n;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] < 2 {
                idx[i] += 1;
                break;
            }
            idx[i] = 0;
        }
    }
}

fn permutations(v: &[i64]) -> BTreeSet<Vec<i64>> {
    if v.is_empty() {
        return BTreeSet::from([vec![]]);
    }
    let mut out = BTreeSet::new();
    for i in 0..v.len() {
        let mut rest = v.to_vec();
        let head = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, head);
            out.insert(p);
        }
    }
    out
}

/// Calls `f` on every tuple in `0..sizes[0] × 0..sizes[1] × ...`.
fn product(sizes: &[usize], f: &mut dyn FnMut(&[usize]) -> Result<()>) -> Result<()> {
    if sizes.contains(&0) {
        return Ok(());
    }
    let mut idx = vec![0usize; sizes.len()];
    loop {
        f(&idx)?;
        let mut i = sizes.len();
        loop {
            if i == 0 {
                return Ok(());
            }
            i -= 1;
            if idx[i] + 1 < sizes[i] {
                idx[i] += 1;
                break;
            }
            idx[i] = 0;
        }
    }
}

pub fn naive_diagrams(q: &EnumerationQuery) -> Result<OracleResult> {
    let a = q.a() as usize;
    let n_g = q.num_grays();
    let y = q.c_divs();
    let n_w = y.len();
    let l = q.l_divs();
    let r = q.r_divs();
    let w_max: u64 = q.x().iter().chain(y).filter(|&&v| v > 0).map(|&v| v as u64).sum::<u64>() + q.a() * q.k();
    let perms: Vec<Vec<i64>> = permutations(y).into_iter().collect();
    let found: Vec<Result<Vec<(String, u128)>>> = words([a, n_g, n_w])
        .into_par_iter()
        .map(|word| {
            let mut out = Vec::new();
            let blacks: Vec<usize> = (0..word.len()).filter(|&p| word[p] == Color::Black).collect();
            let nb = blacks.len();
            for perm in &perms {
                // grays: source and target; whites; labels
                let sizes: Vec<usize> = std::iter::repeat(nb).take(2 * n_g + n_w + l.len() + r.len()).collect();
                product(&sizes, &mut |pick| {
                    let (mut gi, mut wi) = (0, 0);
                    let nodes: Vec<Node> = word
                        .iter()
                        .map(|c| match c {
                            Color::Black => Node::Black,
                            Color::Gray => {
                                let n = Node::Gray { source: blacks[pick[2 * gi]], target: blacks[pick[2 * gi + 1]] };
                                gi += 1;
                                n
                            }
                            Color::White => {
                                let n = Node::White { div: perm[wi], black: blacks[pick[2 * n_g + wi]] };
                                wi += 1;
                                n
                            }
                        })
                        .collect();
                    let base = 2 * n_g + n_w;
                    let l_attach = (0..l.len()).map(|i| blacks[pick[base + i]]).collect();
                    let r_attach = (0..r.len()).map(|i| blacks[pick[base + l.len() + i]]).collect();
                    let t = Template::new(nodes, l_attach, r_attach)?;
                    if t.check().is_err() {
                        return Ok(());
                    }
                    let gray_sizes = vec![w_max as usize; n_g];
                    product(&gray_sizes, &mut |gw| {
                        let weights = Weights {
                            l: l.iter().map(|v| v.unsigned_abs()).collect(),
                            r: r.iter().map(|v| v.unsigned_abs()).collect(),
                            white: perm.iter().map(|v| v.unsigned_abs()).collect(),
                            gray: gw.iter().map(|&w| [w as u64 + 1; 2]).collect(),
                        };
                        let d = FloorDiagram::new(t.clone(), weights)?;
                        if d.validate(q.k()).is_ok() {
                            let json = d.to_json();
                            out.push((json, d.multiplicity()?));
                        }
                        Ok(())
                    })
                })?;
            }
            Ok(out)
        })
        .collect();
    let mut res = OracleResult { diagrams: BTreeSet::new(), weighted: 0 };
    for batch in found {
        for (json, m) in batch? {
            if res.diagrams.insert(json) {
                res.weighted = res.weighted.checked_add(m).ok_or(Error::Overflow)?;
            }
        }
    }
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::{enumerate_diagrams, EnumerationBudget};

    fn explicit(q: &EnumerationQuery) -> OracleResult {
        let ds = enumerate_diagrams(q, &EnumerationBudget::default()).unwrap();
        OracleResult {
            diagrams: ds.iter().map(|(d, _)| d.to_json()).collect(),
            weighted: ds.iter().map(|(_, m)| m).sum(),
        }
    }

    #[test]
    fn figure3_matches_oracle() {
        let q = EnumerationQuery::new(2, 0, 1, vec![-2, 1], vec![-1]).unwrap();
        let o = naive_diagrams(&q).unwrap();
        assert_eq!(o.weighted, 8);
        assert_eq!(o, explicit(&q));
    }

    #[test]
    fn small_genus_one_matches_oracle() {
        for (a, k, x, y) in [(2u64, 1u64, vec![-3i64, 2], vec![-1i64]), (2, 0, vec![-2], vec![1, 1])] {
            let q = EnumerationQuery::new(a, 1, k, x, y).unwrap();
            assert_eq!(naive_diagrams(&q).unwrap(), explicit(&q));
        }
    }
}
