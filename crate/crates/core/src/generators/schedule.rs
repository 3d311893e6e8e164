//! The schedule `(Y_k, ε_k, B_k, n_k)` and the truncated generator `U`.

use std::sync::Arc;

use num_traits::One;

use crate::error::{invalid, Error, Result};
use crate::field::{iota, FieldElement};
use crate::generators::kappa::{kappa, Kappa};
use crate::measure::{check_depth, cylinder, BaseSpace, DyadicSet, ProductSet, Word};
use crate::perm::{odometer_approx, tau};
use crate::rational::{Dyadic, Rational};

/// Largest `n_k` the schedule search will consider.
const MAX_N: u32 = 62;

/// How the sets `B_k ⊆ Y` are enumerated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BasisPlan {
    /// `B_k` is the single atom `(k-1) mod |Y|`.
    CyclicAtoms,
    /// `B_k = Y` for every `k`.
    Whole,
    /// `B_k` is the `k`-th list, cycled if `L` exceeds its length.
    Explicit(Vec<Vec<usize>>),
}

impl BasisPlan {
    fn set(&self, atoms: usize, k: usize) -> Vec<usize> {
        match self {
            BasisPlan::CyclicAtoms => vec![(k - 1) % atoms],
            BasisPlan::Whole => (0..atoms).collect(),
            BasisPlan::Explicit(sets) => sets[(k - 1) % sets.len()].clone(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Schedule {
    base: Arc<BaseSpace>,
    groups: Vec<usize>,
    epsilons: Vec<Rational>,
    basis: Vec<Vec<usize>>,
    ns: Vec<u32>,
    kappas: Vec<Kappa>,
    depth: u32,
}

impl Schedule {
    pub fn base(&self) -> &Arc<BaseSpace> {
        &self.base
    }

    /// Group index `k` of each atom (`y ∈ Y_k`).
    pub fn groups(&self) -> &[usize] {
        &self.groups
    }

    /// `ε_1, …, ε_L`.
    pub fn epsilons(&self) -> &[Rational] {
        &self.epsilons
    }

    /// `B_1, …, B_L` as atom index lists.
    pub fn basis(&self) -> &[Vec<usize>] {
        &self.basis
    }

    /// `n_1 < … < n_L`.
    pub fn ns(&self) -> &[u32] {
        &self.ns
    }

    /// `κ(n_1), …, κ(n_L)`.
    pub fn kappas(&self) -> &[Kappa] {
        &self.kappas
    }

    pub fn length(&self) -> usize {
        self.ns.len()
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// `Z = ⊔_k Y_k × (N_{0^{k+1}} ∪ N_{1^{k+1}})` at the working depth.
    pub fn z_set(&self) -> Result<ProductSet> {
        z_set(&self.groups, self.depth)
    }

    /// `ε_k / κ(n_k)`.
    pub fn a2_bound(&self, k: usize) -> Rational {
        &self.epsilons[k - 1] / Rational::from_integer(self.kappas[k - 1].value.into())
    }

    /// `Σ_{l>k} ν(B_l) 2^{-(n_l-1)}`.
    pub fn residual(&self, k: usize) -> Rational {
        (k..self.length())
            .map(|l| {
                self.base.measure_of(&self.basis[l]) * Dyadic::pow2_neg(self.ns[l] - 1).to_rational()
            })
            .sum()
    }

    /// `ι_{B_l}(U_{n_l}^{1/2^{l-1}})` at the working depth.
    pub fn factor(&self, l: usize) -> Result<FieldElement> {
        let n = self.ns[l - 1];
        let root = tau(n, n)?.iter_sqrt(l as u32 - 1)?.embed(self.depth)?;
        iota(&self.base, &self.basis[l - 1], &root)
    }

    /// `T = id_Y × T_m` with budget `2^{-m}`.
    pub fn t_field(&self) -> Result<FieldElement> {
        let (t, budget) = odometer_approx(self.depth)?;
        Ok(FieldElement::constant(self.base.clone(), &t).with_budget(budget))
    }
}

pub(crate) fn z_set(groups: &[usize], depth: u32) -> Result<ProductSet> {
    let parts = groups
        .iter()
        .map(|&k| {
            let len = k + 1;
            if len as u32 > depth {
                return Ok(DyadicSet::empty(depth));
            }
            cylinder(&Word::constant(false, len), depth)?
                .union(&cylinder(&Word::constant(true, len), depth)?)
        })
        .collect::<Result<Vec<_>>>()?;
    ProductSet::new(parts)
}

/// Chooses each `n_k` minimal subject to the support and growth conditions.
pub fn build_schedule(
    base: Arc<BaseSpace>,
    groups: Vec<usize>,
    epsilons: Vec<Rational>,
    length: usize,
    depth: u32,
    plan: &BasisPlan,
) -> Result<Schedule> {
    if groups.len() != base.len() {
        return invalid(format!(
            "{} atoms but {} group indices",
            base.len(),
            groups.len()
        ));
    }
    if length == 0 {
        return invalid("schedule length must be at least 1");
    }
    if epsilons.len() < length {
        return invalid(format!("need {length} values of ε, got {}", epsilons.len()));
    }
    let zero = Rational::from_integer(0.into());
    if epsilons.iter().any(|e| e <= &zero) || epsilons.windows(2).any(|w| w[1] > w[0]) {
        return invalid("ε must be positive and non-increasing");
    }
    if let BasisPlan::Explicit(sets) = plan {
        if sets.is_empty() || sets.iter().any(|s| s.is_empty() || s.iter().any(|&a| a >= base.len())) {
            return invalid("explicit basis sets must be nonempty lists of valid atoms");
        }
    }
    let basis: Vec<Vec<usize>> = (1..=length).map(|k| plan.set(base.len(), k)).collect();
    let min_n = |k: usize| -> u32 {
        basis[k - 1]
            .iter()
            .map(|&a| groups[a] as u32 + 2)
            .max()
            .unwrap_or(2)
            .max(2)
    };
    let mut ns = vec![min_n(1)];
    let mut kappas = vec![kappa(ns[0])?];
    for k in 1..length {
        let prev = ns[k - 1];
        let kap = Rational::from_integer(kappas[k - 1].value.into());
        let target = &epsilons[k - 1] / kap;
        let mut n = (prev + 1).max(min_n(k + 1));
        while Dyadic::pow2_neg(n - 2).to_rational() >= target {
            n += 1;
            if n > MAX_N {
                return Err(Error::Infeasible(format!(
                    "no n ≤ {MAX_N} meets the growth condition after n = {prev}"
                )));
            }
        }
        ns.push(n);
        kappas.push(kappa(n)?);
    }
    let required = ns[length - 1] + length as u32;
    if depth < required {
        return Err(Error::Resolution {
            reason: format!("schedule n = {ns:?} needs room for {} square roots", length - 1),
            required_depth: required,
        });
    }
    check_depth(depth)?;
    Ok(Schedule {
        base,
        groups,
        epsilons,
        basis,
        ns,
        kappas,
        depth,
    })
}

/// `ε_k = 2^{-k}`, `k = 1..=len`.
pub fn halving_epsilons(len: usize) -> Vec<Rational> {
    (1..=len)
        .map(|k| Dyadic::pow2_neg(k as u32).to_rational())
        .collect()
}

/// `U = Π_l ι_{B_l}(U_{n_l}^{1/2^{l-1}})`, checking disjoint supports inside `Z`.
#[allow(non_snake_case)]
pub fn build_U(s: &Schedule) -> Result<FieldElement> {
    let z = s.z_set()?;
    let mut u = FieldElement::identity(s.base.clone(), s.depth);
    let mut covered = ProductSet::empty(s.base.len(), s.depth);
    for l in 1..=s.length() {
        let f = s.factor(l)?;
        let supp = f.support();
        if !supp.is_disjoint(&covered) {
            return Err(Error::Invariant(format!("factor {l} overlaps an earlier factor")));
        }
        if !supp.is_subset(&z) {
            return Err(Error::Invariant(format!("factor {l} leaves Z")));
        }
        covered = covered.union(&supp)?;
        u = u.compose(&f)?;
    }
    Ok(u)
}

/// Outcome of the `(a″)` check for one `k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct A2Check {
    pub k: usize,
    pub distance: Rational,
    pub residual: Rational,
    pub bound: Rational,
    pub pass: bool,
}

/// `d_u(U^{2^{k-1}}, ι_{B_k}(U_{n_k}))` against the residual and `ε_k/κ(n_k)`.
pub fn verify_a2(u: &FieldElement, s: &Schedule, k: usize) -> Result<A2Check> {
    if k == 0 || k > s.length() {
        return invalid(format!("k must lie in 1..={}", s.length()));
    }
    let power = u.pow_big(&(num_bigint::BigInt::one() << (k - 1)));
    let n = s.ns[k - 1];
    let target = iota(&s.base, &s.basis[k - 1], &tau(n, s.depth)?)?;
    let distance = power.d_u(&target)?;
    let residual = s.residual(k);
    let bound = s.a2_bound(k);
    let pass = distance <= residual && distance <= bound;
    Ok(A2Check {
        k,
        distance,
        residual,
        bound,
        pass,
    })
}
