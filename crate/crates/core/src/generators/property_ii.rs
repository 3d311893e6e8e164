//! Recovering `V` from `(CV)^{m_k P_k}` when `C` is an odd cycle.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{invalid, Result};
use crate::field::FieldElement;
use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PropertyII {
    /// `d_u((CV)^{m_k P_k}, V)` for `k = 1..=K`.
    pub distances: Vec<Rational>,
    /// `m_k P_k` for `k = 1..=K`.
    pub exponents: Vec<BigInt>,
    /// First `k` with `2^k ≥` every `V`-orbit and every `C`-orbit dividing `P_k`.
    pub predicted_k: usize,
}

impl PropertyII {
    /// First `k` (1-based) with distance exactly 0.
    pub fn first_zero(&self) -> Option<usize> {
        self.distances.iter().position(Zero::is_zero).map(|i| i + 1)
    }
}

/// `P_k`: product of the `k` smallest distinct nontrivial orbit sizes of `C`.
pub fn orbit_products(c: &FieldElement, k_max: usize) -> Vec<BigInt> {
    let sizes = distinct_sizes(c);
    (1..=k_max)
        .map(|k| sizes.iter().take(k).map(|&s| BigInt::from(s)).product())
        .collect()
}

fn distinct_sizes(f: &FieldElement) -> Vec<usize> {
    let set: BTreeSet<usize> = f
        .perms()
        .iter()
        .flat_map(|p| p.cycle_type())
        .filter(|&s| s > 1)
        .collect();
    set.into_iter().collect()
}

/// Least positive `m` with `m·p ≡ 1 (mod 2^k)`, for odd `p`.
pub fn inverse_mod_pow2(p: &BigInt, k: usize) -> BigInt {
    let modulus = BigInt::one() << k;
    let g = p.extended_gcd(&modulus);
    debug_assert!(g.gcd.is_one());
    let m = g.x.mod_floor(&modulus);
    if m.is_zero() {
        modulus
    } else {
        m
    }
}

pub fn verify_property_ii(v: &FieldElement, c: &FieldElement, k_max: usize) -> Result<PropertyII> {
    v.compose(c)?;
    if !v.support().is_disjoint(&c.support()) {
        return invalid("V and C must have disjoint supports");
    }
    if !c.is_odd_cycle() {
        return invalid("C must have only odd orbits");
    }
    let v_sizes = distinct_sizes(v);
    if v_sizes.iter().any(|s| !s.is_power_of_two()) {
        return invalid("every orbit of V must have a power-of-two size");
    }
    let c_sizes = distinct_sizes(c);
    let max_v = v_sizes.last().copied().unwrap_or(1);
    let cv = c.compose(v)?;
    let mut distances = Vec::with_capacity(k_max);
    let mut exponents = Vec::with_capacity(k_max);
    let mut predicted_k = 0;
    for (i, p) in orbit_products(c, k_max).into_iter().enumerate() {
        let k = i + 1;
        let e = inverse_mod_pow2(&p, k) * &p;
        distances.push(cv.pow_big(&e).d_u(v)?);
        exponents.push(e);
        let covers = c_sizes.iter().all(|&s| (&p % BigInt::from(s)).is_zero());
        if predicted_k == 0 && (1usize << k) >= max_v && covers {
            predicted_k = k;
        }
    }
    Ok(PropertyII {
        distances,
        exponents,
        predicted_k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::BaseSpace;
    use crate::perm::LevelPerm;
    use std::sync::Arc;

    #[test]
    fn inverses() {
        assert_eq!(inverse_mod_pow2(&3.into(), 2), 3.into());
        assert_eq!(inverse_mod_pow2(&15.into(), 2), 3.into());
        assert_eq!(inverse_mod_pow2(&7.into(), 1), 1.into());
        for p in (1..60).step_by(2) {
            for k in 1..10 {
                let m = inverse_mod_pow2(&BigInt::from(p), k);
                assert_eq!((m * p) % (1 << k), BigInt::one() % (1 << k));
            }
        }
    }

    #[test]
    fn three_cycle_and_four_cycle() {
        let base = Arc::new(BaseSpace::single());
        let v = FieldElement::constant(base.clone(), &LevelPerm::from_cycles(4, &[vec![0, 1, 2, 3], vec![4, 5]]).unwrap());
        let c = FieldElement::constant(base.clone(), &LevelPerm::from_cycles(4, &[vec![8, 9, 10]]).unwrap());
        let res = verify_property_ii(&v, &c, 4).unwrap();
        assert_eq!(res.exponents[1], BigInt::from(9));
        assert_eq!(res.predicted_k, 2);
        assert_eq!(res.first_zero(), Some(2));
        assert!(res.distances[2..].iter().all(Zero::is_zero));

        let id = FieldElement::identity(base, 4);
        let res = verify_property_ii(&v, &id, 3).unwrap();
        assert!(res.distances[1..].iter().all(Zero::is_zero));
    }

    #[test]
    fn rejects_bad_inputs() {
        let base = Arc::new(BaseSpace::single());
        let v = FieldElement::constant(base.clone(), &LevelPerm::from_cycles(3, &[vec![0, 1]]).unwrap());
        let overlapping = FieldElement::constant(base.clone(), &LevelPerm::from_cycles(3, &[vec![1, 2, 3]]).unwrap());
        assert!(verify_property_ii(&v, &overlapping, 2).is_err());
        let even = FieldElement::constant(base, &LevelPerm::from_cycles(3, &[vec![4, 5]]).unwrap());
        assert!(verify_property_ii(&v, &even, 2).is_err());
    }
}
