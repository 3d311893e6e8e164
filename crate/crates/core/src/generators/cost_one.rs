//! The perturbation `U′ = U·C·C′` producing a generator close to a given cycle.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{invalid, Error, Result};
use crate::field::FieldElement;
use crate::generators::schedule::{build_U, z_set, Schedule};
use crate::measure::{cylinder, Word};
use crate::perm::LevelPerm;
use crate::rational::{Dyadic, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoprimeCertificate {
    pub order_c: BigUint,
    /// `K` in `ord C = 2^K N`.
    pub two_power: u32,
    /// `N` in `ord C = 2^K N`.
    pub odd_part: BigUint,
    /// Order of `C′`.
    pub m: u64,
    pub gcd: BigUint,
    /// `C`, `C′` and `U` have pairwise disjoint supports.
    pub disjoint: bool,
    /// `e ≡ 0 (mod ord C)`, `e ≡ 1 (mod M)`.
    pub crt_exponent: BigUint,
    /// `(C C′)^e = C′`.
    pub crt_recovers: bool,
}

impl CoprimeCertificate {
    pub fn valid(&self) -> bool {
        self.gcd.is_one() && self.disjoint && self.crt_recovers && self.m % 2 == 1
    }
}

#[derive(Clone, Debug)]
pub struct CostOnePerturbation {
    pub u_prime: FieldElement,
    pub c_prime: FieldElement,
    pub u: FieldElement,
    /// The `k` with `supp C ∩ Y × (N_{0^{k+1}} ∪ N_{1^{k+1}}) = ∅`.
    pub k: u32,
    pub distance: Rational,
    pub delta: Rational,
    pub certificate: CoprimeCertificate,
}

impl CostOnePerturbation {
    pub fn pass(&self) -> bool {
        self.distance < self.delta && self.certificate.valid()
    }
}

/// Least odd `M ≥ 3` coprime to `n`.
pub fn least_coprime_odd(n: &BigUint) -> u64 {
    (3u64..)
        .step_by(2)
        .find(|&m| n.gcd(&BigUint::from(m)).is_one())
        .expect("some odd prime avoids n")
}

pub fn cost_one_perturbation(
    c: &FieldElement,
    delta: &Rational,
    s: &Schedule,
) -> Result<CostOnePerturbation> {
    let depth = c.depth();
    if s.depth() != depth || **s.base() != **c.base() {
        return invalid("cycle and schedule differ in depth or base");
    }
    let atoms = c.atoms();
    let supp_c = c.support();
    // 2^{-k} = μ(Y × (N_{0^{k+1}} ∪ N_{1^{k+1}}))
    let k = (0..depth.saturating_sub(1))
        .find(|&k| {
            Dyadic::pow2_neg(k).to_rational() < *delta
                && z_set(&vec![k as usize; atoms], depth).is_ok_and(|z| z.is_disjoint(&supp_c))
        })
        .ok_or_else(|| Error::Resolution {
            reason: "no k with a small block Y × (N_{0^{k+1}} ∪ N_{1^{k+1}}) avoiding supp C".into(),
            required_depth: depth + 1,
        })?;

    let order_c = c.order();
    let two_power = order_c.trailing_zeros().unwrap_or(0) as u32;
    let odd_part = &order_c >> two_power;
    if two_power as usize >= s.length() {
        return invalid(format!(
            "ord C has 2-part 2^{two_power}; the schedule needs length above {two_power}"
        ));
    }
    let u = build_U(s)?;
    let allowed = z_set(&vec![k as usize + 1; atoms], depth)?;
    if !u.support().is_subset(&allowed) {
        return invalid(format!(
            "supp U must lie in Y × (N_0^{} ∪ N_1^{}); build the schedule with group index {}",
            k + 2,
            k + 2,
            k + 1
        ));
    }

    let m = least_coprime_odd(&odd_part);
    let mut block = Word::constant(false, k as usize + 1);
    block.0.push(true);
    let leaves = cylinder(&block, depth)?;
    let sorted: Vec<u32> = leaves.leaves().iter().copied().collect();
    if (sorted.len() as u64) < m {
        return Err(Error::Resolution {
            reason: format!("block N_0^{}1 has {} leaves, fewer than M = {m}", k + 1, sorted.len()),
            required_depth: depth + (m as f64).log2().ceil() as u32,
        });
    }
    let orbits: Vec<Vec<u32>> = sorted
        .chunks_exact(m as usize)
        .map(<[u32]>::to_vec)
        .collect();
    let c_prime_perm = LevelPerm::from_cycles(depth, &orbits)?;
    let c_prime = FieldElement::constant(c.base().clone(), &c_prime_perm);

    let u_prime = u.compose(c)?.compose(&c_prime)?;
    let distance = u_prime.d_u(c)?;

    let supp_cp = c_prime.support();
    let supp_u = u.support();
    let disjoint = supp_c.is_disjoint(&supp_cp) && supp_c.is_disjoint(&supp_u) && supp_cp.is_disjoint(&supp_u);
    let gcd = odd_part.gcd(&BigUint::from(m));
    let crt_exponent = crt_exponent(&order_c, m);
    let cc = c.compose(&c_prime)?;
    let crt_recovers = cc.pow_big(&BigInt::from(crt_exponent.clone())) == c_prime;
    let certificate = CoprimeCertificate {
        order_c,
        two_power,
        odd_part,
        m,
        gcd,
        disjoint,
        crt_exponent,
        crt_recovers,
    };
    Ok(CostOnePerturbation {
        u_prime,
        c_prime,
        u,
        k,
        distance,
        delta: delta.clone(),
        certificate,
    })
}

/// `e = ord·(ord^{-1} mod M)` when coprime; `0` otherwise.
fn crt_exponent(order: &BigUint, m: u64) -> BigUint {
    let ord = BigInt::from(order.clone());
    let modulus = BigInt::from(m);
    let g = ord.extended_gcd(&modulus);
    if !g.gcd.is_one() {
        return BigUint::zero();
    }
    let inv = g.x.mod_floor(&modulus);
    (ord * inv).to_biguint().expect("nonnegative")
}
