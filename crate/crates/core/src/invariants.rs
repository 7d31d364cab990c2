//! Double Gromov-Witten invariants `N_g^{α,β,α̃,β̃}(a,b,k)`, the lattice
//! function `F`, and the `Γ_g` building blocks.

use std::sync::OnceLock;

use num_rational::BigRational;
use num_bigint::BigInt;

use crate::diagram::{DivergenceSpec, MultiplicityVector};
use crate::enumerate::{EnumerationBudget, EnumerationQuery, Evaluator};
use crate::error::{Error, Result};
use crate::poly::{interpolate, MultiPoly};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvariantQuery {
    a: u64,
    b: u64,
    k: u64,
    g: u64,
    mv: MultiplicityVector,
}

impl InvariantQuery {
    pub fn new(a: u64, b: u64, k: u64, g: u64, mv: MultiplicityVector) -> Result<Self> {
        if a == 0 {
            return Err(Error::ZeroA);
        }
        if mv.b() != b {
            return Err(Error::Inconsistent(format!("Σ i(α̃_i + β̃_i) = {} but b = {b}", mv.b())));
        }
        if mv.negative_sum() != a * k + b {
            return Err(Error::Inconsistent(format!(
                "Σ i(α_i + β_i) = {} but a·k + b = {}",
                mv.negative_sum(),
                a * k + b
            )));
        }
        Ok(InvariantQuery { a, b, k, g, mv })
    }

    pub fn a(&self) -> u64 {
        self.a
    }

    pub fn b(&self) -> u64 {
        self.b
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn g(&self) -> u64 {
        self.g
    }

    pub fn multiplicities(&self) -> &MultiplicityVector {
        &self.mv
    }

    /// Number of point conditions, `2a + g + Σ(β_i + β̃_i) − 1`.
    pub fn l(&self) -> u64 {
        2 * self.a + self.g + self.mv.beta.total() + self.mv.beta_tilde.total() - 1
    }

    pub fn enumeration_query(&self) -> Result<EnumerationQuery> {
        EnumerationQuery::new(self.a, self.g, self.k, self.mv.canonical_x(), self.mv.c_divs())
    }
}

fn shared_evaluator() -> &'static Evaluator {
    static EV: OnceLock<Evaluator> = OnceLock::new();
    EV.get_or_init(Evaluator::new)
}

/// `Σ μ(D)` over all floor diagrams of the query.
pub fn compute_n(q: &InvariantQuery, budget: &EnumerationBudget) -> Result<u128> {
    shared_evaluator().weighted_count(&q.enumeration_query()?, budget)
}

/// `F(x, y)`: the invariant whose tangency data are read off from the
/// left-right sequence `x` and the free sequence `y`.
pub fn compute_f(a: u64, k: u64, g: u64, x: &[i64], y: &[i64], budget: &EnumerationBudget) -> Result<u128> {
    if a == 0 {
        return Err(Error::ZeroA);
    }
    let spec = DivergenceSpec::new(x.to_vec(), y.to_vec(), k, a)?;
    let mv = spec.multiplicities();
    let q = InvariantQuery::new(a, mv.b(), k, g, mv)?;
    compute_n(&q, budget)
}

/// `Γ_g(w)`: sum over compositions of `w` into `g + 1` positive parts of the
/// product of the squared parts.
pub fn gamma(g: u64, w: u64) -> u128 {
    let w = w as usize;
    // ways[r] after j rounds: sum over compositions of r into j parts
    let mut ways = vec![0u128; w + 1];
    ways[0] = 1;
    for _ in 0..=g {
        let mut next = vec![0u128; w + 1];
        for (r, slot) in next.iter_mut().enumerate() {
            for part in 1..=r {
                *slot += ways[r - part] * (part * part) as u128;
            }
        }
        ways = next;
    }
    ways[w]
}

/// `Γ_g` as a polynomial in `w`, interpolated through `w = g+1 .. 4g+4`.
pub fn gamma_polynomial(g: u64) -> Result<MultiPoly> {
    let samples: Vec<(Vec<i64>, BigRational)> = (g + 1..=4 * g + 4)
        .map(|w| (vec![w as i64], BigRational::from_integer(BigInt::from(gamma(g, w)))))
        .collect();
    Ok(interpolate(&samples, (3 * g + 2) as u32, &["w".to_string()])?)
}

/// `a(a−1)k/2 + ab − a − b + 1`; invariants of larger genus vanish.
pub fn adjunction_bound(a: u64, b: u64, k: u64) -> i64 {
    let (a, b, k) = (a as i64, b as i64, k as i64);
    a * (a - 1) * k / 2 + a * b - a - b + 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::enumerate_diagrams;
    use crate::poly::{rat, Parity};
    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn budget() -> EnumerationBudget {
        EnumerationBudget::default()
    }

    fn n(text: &str, a: u64, b: u64, k: u64, g: u64) -> Result<u128> {
        compute_n(&InvariantQuery::new(a, b, k, g, MultiplicityVector::from_compact(text)?)?, &budget())
    }

    #[test]
    fn figure_values() {
        assert_eq!(n("0,01,0,0", 2, 0, 1, 0).unwrap(), 2);
        assert_eq!(n("01,0,0,0", 2, 0, 1, 0).unwrap(), 1);
        assert_eq!(n("01,0,0,01", 2, 2, 0, 0).unwrap(), 8);
        assert_eq!(n("01,1,1,0", 2, 1, 1, 0).unwrap(), 8);
    }

    #[test]
    fn inconsistent_queries_are_rejected() {
        assert!(matches!(n("01,1,0,1", 3, 1, 1, 0), Err(Error::Inconsistent(_))));
        assert!(matches!(n("01,1,1,0", 3, 1, 1, 0), Err(Error::Inconsistent(_))));
        assert!(matches!(n("0,0,0,0", 0, 0, 1, 0), Err(Error::ZeroA)));
        assert!(matches!(compute_f(0, 1, 0, &[], &[], &budget()), Err(Error::ZeroA)));
        assert!(matches!(compute_f(2, 1, 0, &[-2, 0], &[], &budget()), Err(Error::NotInLattice(_))));
    }

    #[test]
    fn point_condition_count() {
        let q = InvariantQuery::new(3, 4, 2, 1, MultiplicityVector::from_compact("12,201,1,11").unwrap()).unwrap();
        assert_eq!(q.l(), 6 + 1 + 5 - 1);
    }

    #[test]
    fn f_matches_table_value_and_explicit_sum() {
        assert_eq!(compute_f(2, 2, 0, &[-1, 3], &[-6], &budget()).unwrap(), 276);
        let q = EnumerationQuery::new(2, 0, 2, vec![-1, 3], vec![-6]).unwrap();
        let explicit: u128 = enumerate_diagrams(&q, &budget()).unwrap().iter().map(|(_, m)| m).sum();
        assert_eq!(explicit, 276);
    }

    #[test]
    fn f_of_figure1_data_is_the_named_invariant() {
        let x = [-2, -2, -1, 1];
        let y = [-3, -1, -1, 1, 2];
        let mv = DivergenceSpec::new(x.to_vec(), y.to_vec(), 2, 3).unwrap().multiplicities();
        assert_eq!(mv.to_string(), "12,201,1,11");
        let f = compute_f(3, 2, 1, &x, &y, &budget()).unwrap();
        assert_eq!(f, n("12,201,1,11", 3, 4, 2, 1).unwrap());
        assert!(f > 0);
    }

    #[test]
    fn f_is_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (mut x, mut y) = (vec![-2i64, -1, 2], vec![-3i64, 1, 1]);
        let base = compute_f(2, 1, 1, &x, &y, &budget()).unwrap();
        for _ in 0..5 {
            x.shuffle(&mut rng);
            y.shuffle(&mut rng);
            let q = EnumerationQuery::new(2, 1, 1, x.clone(), y.clone()).unwrap();
            assert_eq!(Evaluator::new().weighted_count(&q, &budget()).unwrap(), base);
        }
    }

    #[test]
    fn vanishing_above_adjunction_bound() {
        for (a, b, k) in [(1u64, 2u64, 1u64), (2, 1, 1), (2, 0, 2), (3, 0, 1)] {
            let g = (adjunction_bound(a, b, k) + 1) as u64;
            let mut text = format!("{},0,", "0".repeat((a * k + b - 1) as usize) + "1");
            text += &if b > 0 { "0".repeat(b as usize - 1) + "1" } else { "0".into() };
            text += ",0";
            assert_eq!(n(&text, a, b, k, g).unwrap(), 0, "{text} ({a},{b},{k}) g={g}");
        }
    }

    #[test]
    fn gamma_closed_forms() {
        for w in 1..=20u64 {
            assert_eq!(gamma(0, w), (w * w) as u128);
            assert_eq!(gamma(1, w), ((w - 1) * w * (w + 1) * (w * w + 1) / 30) as u128);
        }
        assert_eq!(gamma(1, 1), 0);
        assert_eq!(gamma(2, 2), 0);
        assert_eq!(gamma(2, 3), 1);
    }

    #[test]
    fn gamma_polynomial_degree_and_parity() {
        for g in 0..=3u64 {
            let p = gamma_polynomial(g).unwrap();
            assert_eq!(p.total_degree(), Some((3 * g + 2) as u32));
            let expected = if g % 2 == 0 { Parity::Even } else { Parity::Odd };
            assert_eq!(p.parity(), expected);
            for w in 0..=g as i64 {
                assert_eq!(p.eval_i64(&[w]), rat(0));
            }
        }
    }

    proptest! {
        #[test]
        fn gamma_polynomial_extrapolates(g in 0u64..3, w in 1u64..60) {
            let p = gamma_polynomial(g).unwrap();
            prop_assert_eq!(p.eval_i64(&[w as i64]), BigRational::from_integer(BigInt::from(gamma(g, w))));
        }
    }
}
