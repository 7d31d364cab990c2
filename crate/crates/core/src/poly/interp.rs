//! Exact polynomial interpolation: a general fraction-free solve and a
//! Newton forward-difference fit on simplex grids.

use std::collections::{BTreeSet, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use super::{rat, MultiPoly};

pub const MONOMIAL_LIMIT: u64 = 5000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InterpError {
    #[error("samples are not the values of one polynomial of degree <= {degree}")]
    Inconsistent { degree: u32 },
    #[error("degenerate sample set: rank {rank} < {needed} monomials")]
    RankDeficient { rank: usize, needed: usize },
    #[error("{have} samples for {need} monomials")]
    TooFewSamples { have: usize, need: usize },
    #[error("{count} monomials exceeds the limit of {limit}")]
    TooManyMonomials { count: u64, limit: u64 },
    #[error("duplicate sample point {0:?}")]
    DuplicatePoint(Vec<i64>),
    #[error("point has {got} coordinates, expected {expected}")]
    Dimension { got: usize, expected: usize },
}

/// Number of monomials of total degree at most `d` in `n` variables.
pub fn binomial_count(n: usize, d: u32) -> u64 {
    let mut c: u128 = 1;
    for i in 1..=n as u128 {
        c = c * (d as u128 + i) / i;
        if c > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    c as u64
}

/// Exponent vectors of total degree at most `d`, in graded-lexicographic order.
pub fn monomials(n: usize, d: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for deg in 0..=d {
        let mut cur = vec![0u32; n];
        fill(&mut out, &mut cur, 0, deg);
    }
    // within one degree, ascending lexicographic
    out.sort_by(|a, b| {
        let da: u32 = a.iter().sum();
        let db: u32 = b.iter().sum();
        da.cmp(&db).then_with(|| a.cmp(b))
    });
    out
}

fn fill(out: &mut Vec<Vec<u32>>, cur: &mut Vec<u32>, pos: usize, left: u32) {
    if cur.is_empty() {
        if left == 0 {
            out.push(Vec::new());
        }
        return;
    }
    if pos == cur.len() - 1 {
        cur[pos] = left;
        out.push(cur.clone());
        cur[pos] = 0;
        return;
    }
    for e in 0..=left {
        cur[pos] = e;
        fill(out, cur, pos + 1, left - e);
    }
    cur[pos] = 0;
}

/// Offsets `i` with `|i| <= d`; the node set of a Newton fit.
pub fn simplex_grid(n: usize, d: u32) -> Vec<Vec<u32>> {
    monomials(n, d)
}

fn check_limit(n: usize, d: u32) -> Result<u64, InterpError> {
    let count = binomial_count(n, d);
    if count > MONOMIAL_LIMIT {
        return Err(InterpError::TooManyMonomials { count, limit: MONOMIAL_LIMIT });
    }
    Ok(count)
}

/// The unique polynomial of total degree at most `degree` through the
/// samples, by exact fraction-free elimination.
pub fn interpolate(samples: &[(Vec<i64>, BigRational)], degree: u32, vars: &[String]) -> Result<MultiPoly, InterpError> {
    let n = vars.len();
    let need = check_limit(n, degree)? as usize;
    let mut seen = BTreeSet::new();
    for (p, _) in samples {
        if p.len() != n {
            return Err(InterpError::Dimension { got: p.len(), expected: n });
        }
        if !seen.insert(p.clone()) {
            return Err(InterpError::DuplicatePoint(p.clone()));
        }
    }
    if samples.len() < need {
        return Err(InterpError::TooFewSamples { have: samples.len(), need });
    }
    // center the coordinates to keep the minors small
    let center: Vec<i64> = (0..n)
        .map(|t| {
            let lo = samples.iter().map(|(p, _)| p[t]).min().unwrap_or(0);
            let hi = samples.iter().map(|(p, _)| p[t]).max().unwrap_or(0);
            lo + (hi - lo) / 2
        })
        .collect();
    let monos = monomials(n, degree);
    let mut rows: Vec<Vec<BigInt>> = samples
        .iter()
        .map(|(p, v)| {
            let u: Vec<BigInt> = p.iter().zip(&center).map(|(a, c)| BigInt::from(a - c)).collect();
            let den = v.denom().clone();
            let mut row: Vec<BigInt> = monos
                .iter()
                .map(|e| {
                    let mut m = den.clone();
                    for (ut, &et) in u.iter().zip(e) {
                        for _ in 0..et {
                            m *= ut;
                        }
                    }
                    m
                })
                .collect();
            row.push(v.numer().clone());
            row
        })
        .collect();
    let coeffs = bareiss_solve(&mut rows, need, degree)?;
    let shifted = MultiPoly::from_terms(vars.to_vec(), monos.into_iter().zip(coeffs));
    let subs: Vec<MultiPoly> = (0..n)
        .map(|t| {
            let mut c = vec![BigRational::zero(); n];
            c[t] = BigRational::one();
            MultiPoly::linear(vars.to_vec(), &c, rat(-center[t]))
        })
        .collect();
    Ok(if n == 0 { shifted } else { shifted.compose(&subs) })
}

/// Solves the `m × (cols+1)` augmented system in place.
fn bareiss_solve(a: &mut [Vec<BigInt>], cols: usize, degree: u32) -> Result<Vec<BigRational>, InterpError> {
    let m = a.len();
    let mut prev = BigInt::one();
    let mut r = 0;
    for c in 0..cols {
        let Some(piv) = (r..m).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, piv);
        let (top, rest) = a.split_at_mut(r + 1);
        let pivot_row = &top[r];
        for row in rest.iter_mut() {
            let factor = row[c].clone();
            for j in c + 1..=cols {
                let v = &pivot_row[c] * &row[j] - &factor * &pivot_row[j];
                row[j] = v / &prev;
            }
            row[c] = BigInt::zero();
        }
        prev = a[r][c].clone();
        r += 1;
    }
    if r < cols {
        return Err(InterpError::RankDeficient { rank: r, needed: cols });
    }
    if a[r..].iter().any(|row| !row[cols].is_zero()) {
        return Err(InterpError::Inconsistent { degree });
    }
    let mut x = vec![BigRational::zero(); cols];
    for c in (0..cols).rev() {
        let mut acc = BigRational::from_integer(a[c][cols].clone());
        for j in c + 1..cols {
            acc -= BigRational::from_integer(a[c][j].clone()) * &x[j];
        }
        x[c] = acc / BigRational::from_integer(a[c][c].clone());
    }
    Ok(x)
}

/// Lattice points `base + Σ i_t dirs[t]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineGrid {
    pub base: Vec<i64>,
    pub dirs: Vec<Vec<i64>>,
}

impl AffineGrid {
    pub fn point(&self, offset: &[u32]) -> Vec<i64> {
        let mut p = self.base.clone();
        for (d, &i) in self.dirs.iter().zip(offset) {
            for (pt, dt) in p.iter_mut().zip(d) {
                *pt += dt * i as i64;
            }
        }
        p
    }

    fn inverse(&self) -> Option<Vec<Vec<BigRational>>> {
        let n = self.base.len();
        // columns of M are the directions
        let mut m: Vec<Vec<BigRational>> = (0..n)
            .map(|row| {
                let mut r: Vec<BigRational> = (0..n).map(|col| rat(self.dirs[col][row])).collect();
                r.extend((0..n).map(|j| if j == row { BigRational::one() } else { BigRational::zero() }));
                r
            })
            .collect();
        for c in 0..n {
            let piv = (c..n).find(|&i| !m[i][c].is_zero())?;
            m.swap(c, piv);
            let inv = BigRational::one() / &m[c][c];
            for v in m[c].iter_mut() {
                *v *= &inv;
            }
            for i in 0..n {
                if i != c && !m[i][c].is_zero() {
                    let f = m[i][c].clone();
                    for j in 0..2 * n {
                        let d = &f * &m[c][j];
                        m[i][j] -= d;
                    }
                }
            }
        }
        Some(m.into_iter().map(|r| r[n..].to_vec()).collect())
    }
}

/// Fits the polynomial of degree at most `degree` through values on the
/// grid nodes `simplex_grid(n, degree)`, given in that order. The node set
/// is unisolvent, so the fit always succeeds for independent directions;
/// correctness has to be confirmed on points off the grid.
pub fn newton_fit(grid: &AffineGrid, degree: u32, values: &[BigRational], vars: &[String]) -> Result<MultiPoly, InterpError> {
    let n = vars.len();
    if grid.base.len() != n || grid.dirs.len() != n || grid.dirs.iter().any(|d| d.len() != n) {
        return Err(InterpError::Dimension { got: grid.base.len(), expected: n });
    }
    let need = check_limit(n, degree)? as usize;
    let nodes = simplex_grid(n, degree);
    if values.len() != need {
        return Err(InterpError::TooFewSamples { have: values.len(), need });
    }
    let minv = grid.inverse().ok_or(InterpError::RankDeficient { rank: 0, needed: n })?;
    let index: HashMap<&[u32], usize> = nodes.iter().enumerate().map(|(i, e)| (e.as_slice(), i)).collect();
    let mut f = values.to_vec();
    for t in 0..n {
        for r in 1..=degree {
            let mut order: Vec<usize> = (0..nodes.len()).filter(|&i| nodes[i][t] >= r).collect();
            order.sort_by(|&a, &b| nodes[b][t].cmp(&nodes[a][t]));
            for i in order {
                let mut lower = nodes[i].clone();
                lower[t] -= 1;
                let d = f[index[lower.as_slice()]].clone();
                f[i] -= d;
            }
        }
    }
    // i_t as affine functions of the target coordinates
    let lin: Vec<MultiPoly> = (0..n)
        .map(|t| {
            let shift: BigRational = (0..n).map(|s| &minv[t][s] * rat(grid.base[s])).sum();
            MultiPoly::linear(vars.to_vec(), &minv[t], -shift)
        })
        .collect();
    let coeff = |e: &[u32]| f[index[e]].clone();
    let mut prefix = Vec::with_capacity(n);
    Ok(newton_rec(0, degree, &mut prefix, &lin, &coeff, vars))
}

/// `Σ_j c_{prefix,j} Π_{s>=t} C(ℓ_s, j_s)` over `|j| <= r`, in Horner form
/// along each coordinate.
fn newton_rec(
    t: usize,
    r: u32,
    prefix: &mut Vec<u32>,
    lin: &[MultiPoly],
    coeff: &dyn Fn(&[u32]) -> BigRational,
    vars: &[String],
) -> MultiPoly {
    if t == lin.len() {
        return MultiPoly::constant(vars.to_vec(), coeff(prefix));
    }
    let mut acc = MultiPoly::zero(vars.to_vec());
    for j in (0..=r).rev() {
        if j < r {
            // acc ← acc · (ℓ - j)/(j+1)
            let step = (&lin[t] - &MultiPoly::constant(vars.to_vec(), rat(j as i64))).scale(&BigRational::new(
                BigInt::one(),
                BigInt::from(j + 1),
            ));
            acc = &acc * &step;
        }
        prefix.push(j);
        let inner = newton_rec(t + 1, r - j, prefix, lin, coeff, vars);
        prefix.pop();
        acc = &acc + &inner;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("v{}", i + 1)).collect()
    }

    #[test]
    fn monomial_order_and_count() {
        let m = monomials(2, 2);
        assert_eq!(m, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![0, 2], vec![1, 1], vec![2, 0]]);
        for n in 0..5 {
            for d in 0..7 {
                assert_eq!(monomials(n, d).len() as u64, binomial_count(n, d));
            }
        }
    }

    #[test]
    fn square_from_three_points() {
        let samples: Vec<(Vec<i64>, BigRational)> = (0..3).map(|v| (vec![v], rat(v * v))).collect();
        let p = interpolate(&samples, 2, &names(1)).unwrap();
        assert_eq!(p.to_text(), "v1^2");
    }

    #[test]
    fn gamma1_closed_form() {
        // (w-1)w(w+1)(w^2+1)/30 from w = 2..7
        let g1 = |w: i64| BigRational::new(((w - 1) * w * (w + 1) * (w * w + 1)).into(), 30.into());
        let samples: Vec<(Vec<i64>, BigRational)> = (2..8).map(|w| (vec![w], g1(w))).collect();
        let p = interpolate(&samples, 5, &["w".to_string()]).unwrap();
        assert_eq!(p.to_text(), "1/30*w^5 - 1/30*w");
    }

    #[test]
    fn inconsistent_and_degenerate() {
        let samples: Vec<(Vec<i64>, BigRational)> = (0..4).map(|v| (vec![v], rat(v * v * v))).collect();
        assert_eq!(interpolate(&samples, 2, &names(1)), Err(InterpError::Inconsistent { degree: 2 }));
        // all points on a line cannot determine a quadratic in two variables
        let samples: Vec<(Vec<i64>, BigRational)> = (0..8).map(|v| (vec![v, v], rat(v))).collect();
        assert!(matches!(interpolate(&samples, 2, &names(2)), Err(InterpError::RankDeficient { .. })));
        let dup = vec![(vec![1], rat(1)), (vec![1], rat(1))];
        assert!(matches!(interpolate(&dup, 1, &names(1)), Err(InterpError::DuplicatePoint(_))));
        assert!(matches!(interpolate(&[], 1, &names(1)), Err(InterpError::TooFewSamples { .. })));
    }

    #[test]
    fn monomial_guard() {
        assert!(matches!(
            interpolate(&[], 30, &names(4)),
            Err(InterpError::TooManyMonomials { .. })
        ));
    }

    fn random_poly(vars: &[String], degree: u32, coeffs: &[(i64, i64)]) -> MultiPoly {
        let monos = monomials(vars.len(), degree);
        MultiPoly::from_terms(
            vars.to_vec(),
            monos.into_iter().zip(coeffs.iter().cycle()).map(|(e, &(n, d))| (e, BigRational::new(n.into(), d.into()))),
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn eval_interpolate_round_trip(
            n in 1usize..=4,
            degree in 0u32..=6,
            coeffs in proptest::collection::vec((-9i64..9, 1i64..5), 1..40),
        ) {
            prop_assume!(binomial_count(n, degree) <= 84);
            let vars = names(n);
            let p = random_poly(&vars, degree, &coeffs);
            let samples: Vec<(Vec<i64>, BigRational)> = simplex_grid(n, degree)
                .into_iter()
                .map(|e| {
                    let pt: Vec<i64> = e.iter().enumerate().map(|(t, &x)| x as i64 * 2 - t as i64).collect();
                    let v = p.eval_i64(&pt);
                    (pt, v)
                })
                .collect();
            let q = interpolate(&samples, degree, &vars).unwrap();
            prop_assert_eq!(&q, &p);
            // idempotence on the fitted polynomial's own values
            let again: Vec<(Vec<i64>, BigRational)> = samples.iter().map(|(pt, _)| (pt.clone(), q.eval_i64(pt))).collect();
            prop_assert_eq!(interpolate(&again, degree, &vars).unwrap(), q);
        }

        #[test]
        fn newton_fit_recovers_polynomial(
            degree in 0u32..=6,
            coeffs in proptest::collection::vec((-9i64..9, 1i64..5), 1..40),
            base in proptest::collection::vec(-20i64..20, 3),
            skew in -2i64..3,
        ) {
            let vars = names(3);
            let p = random_poly(&vars, degree, &coeffs);
            let grid = AffineGrid { base, dirs: vec![vec![1, skew, 0], vec![0, 1, 0], vec![-1, 2, -3]] };
            let values: Vec<BigRational> = simplex_grid(3, degree).iter().map(|i| p.eval_i64(&grid.point(i))).collect();
            prop_assert_eq!(newton_fit(&grid, degree, &values, &vars).unwrap(), p);
        }
    }

    #[test]
    fn newton_fit_rejects_singular_directions() {
        let grid = AffineGrid { base: vec![0, 0], dirs: vec![vec![1, 1], vec![2, 2]] };
        let values = vec![rat(0); 3];
        assert!(matches!(newton_fit(&grid, 1, &values, &names(2)), Err(InterpError::RankDeficient { .. })));
    }
}
