//! `n + 1` generators for a relation of conditional cost below `n + 1`.
//!
//! The hyperfinite part is modelled at working depth `m` by the fibers of
//! the odometer of level `ℓ < m`: leaves agreeing beyond the first `ℓ`
//! coordinates. The extra graphings `Φ_1, …, Φ_n` join fibers together.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{invalid, Error, Result};
use crate::field::FieldElement;
use crate::generators::schedule::{build_U, Schedule};
use crate::graphing::{full_group_membership, Graphing, PartialMap, Partition};
use crate::measure::CondMeasure;
use crate::perm::odometer_approx;
use crate::rational::{Dyadic, Rational};

#[derive(Clone, Debug)]
pub struct RankConstruction {
    /// `T, U_1, C_2, …, C_n`.
    pub elements: Vec<FieldElement>,
    /// `C_1, …, C_n`.
    pub cycles: Vec<FieldElement>,
    pub u: FieldElement,
    /// `q_i(y)` per graphing and atom.
    pub q: Vec<Vec<u64>>,
    /// Whether `μ_R(supp U) < 1 − (q+2)f/q` on every atom, per graphing.
    pub room: Vec<bool>,
    pub fibers: Partition,
    pub target: Partition,
    pub closure: Partition,
    /// Closure with element `i` removed.
    pub deletion_closures: Vec<Partition>,
}

impl RankConstruction {
    pub fn closure_matches(&self) -> bool {
        self.closure == self.target
    }

    pub fn cycles_odd(&self) -> bool {
        self.cycles.iter().all(FieldElement::is_odd_cycle)
    }

    /// Every deletion gives a strictly finer closure.
    pub fn minimal(&self) -> bool {
        self.deletion_closures
            .iter()
            .all(|p| p.refines(&self.target) && *p != self.target)
    }

    pub fn members_of_target(&self) -> bool {
        self.elements.iter().all(|e| full_group_membership(e, &self.target))
    }
}

/// Minimal odd `q ≥ 1` with `(q + 2) f < q`.
pub fn odd_q(f: &Dyadic) -> Result<u64> {
    let f = f.to_rational();
    let one = Rational::from_integer(1.into());
    if f >= one {
        return Err(Error::Resolution {
            reason: format!("no odd q with (q+2)·{f}/q < 1: the parity constraint needs f < 1"),
            required_depth: 0,
        });
    }
    let mut q = 1u64;
    while Rational::from_integer((q + 2).into()) * &f >= Rational::from_integer(q.into()) {
        q += 2;
    }
    Ok(q)
}

/// Classes of `x ~ y ⇔ x >> ℓ = y >> ℓ` at depth `m`.
pub fn fiber_partition(atoms: usize, level: u32, depth: u32) -> Result<Partition> {
    let per_atom: Vec<Vec<u32>> = (0..1u32 << (depth - level))
        .map(|k| (0..1u32 << level).map(|l| l + (k << level)).collect())
        .collect();
    Partition::from_classes(depth, vec![per_atom; atoms])
}

pub fn rank_generators(s: &Schedule, graphings: &[Graphing]) -> Result<RankConstruction> {
    let base = s.base().clone();
    let level = s.depth();
    let depth = graphings.first().map_or(level, Graphing::depth);
    if depth < level {
        return invalid(format!("graphing depth {depth} is below the fiber level {level}"));
    }
    if graphings.iter().any(|g| g.depth() != depth || g.atoms() != base.len()) {
        return invalid("graphings differ in depth or atom count");
    }
    let (t, budget) = odometer_approx(level)?;
    let t = FieldElement::constant(base.clone(), &t.embed(depth)?).with_budget(budget);
    let u = build_U(s)?.embed(depth)?;
    let fibers = fiber_partition(base.len(), level, depth)?;
    let mut all = Graphing::empty(base.len(), depth);
    for g in graphings {
        all = all.concat(g)?;
    }
    let target = fibers.join(&all.generated_relation())?;

    let supp_u = u.support();
    let mut cycles = Vec::with_capacity(graphings.len());
    let mut qs = Vec::with_capacity(graphings.len());
    let mut room = Vec::with_capacity(graphings.len());
    for g in graphings {
        let f = g.ccost();
        let q = f.values().iter().map(odd_q).collect::<Result<Vec<_>>>()?;
        let joined = fibers.join(&g.generated_relation())?;
        let c = odd_cycle_for(&base, &joined, level, &q, &supp_u)?;
        room.push(room_condition(&u.cond_support(), &f, &q));
        cycles.push(c);
        qs.push(q);
    }

    let mut elements = vec![t];
    match cycles.first() {
        None => elements.push(u.clone()),
        Some(c1) => {
            elements.push(u.compose(c1)?);
            elements.extend(cycles[1..].iter().cloned());
        }
    }
    let closure = Graphing::from_elements(&elements)?.generated_relation();
    let deletion_closures = (0..elements.len())
        .map(|i| {
            let rest: Vec<FieldElement> = elements
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, e)| e.clone())
                .collect();
            if rest.is_empty() {
                Ok(Partition::singletons(base.len(), depth))
            } else {
                Ok(Graphing::from_elements(&rest)?.generated_relation())
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let out = RankConstruction {
        elements,
        cycles,
        u,
        q: qs,
        room,
        fibers,
        target,
        closure,
        deletion_closures,
    };
    if !out.closure_matches() {
        return Err(Error::Invariant("generated closure differs from the target".into()));
    }
    Ok(out)
}

fn room_condition(supp_u: &CondMeasure, f: &CondMeasure, q: &[u64]) -> bool {
    let one = Rational::from_integer(1.into());
    supp_u.values().iter().zip(f.values()).zip(q).all(|((s, f), &q)| {
        let used = Rational::new((q + 2).into(), q.into()) * f.to_rational();
        s.to_rational() < &one - used
    })
}

/// An odd cycle whose orbits, of size `q(y) + 2`, chain together the fibers
/// of each class of `joined`, built as the extension of a pre-cycle.
fn odd_cycle_for(
    base: &std::sync::Arc<crate::measure::BaseSpace>,
    joined: &Partition,
    level: u32,
    q: &[u64],
    avoid: &crate::measure::ProductSet,
) -> Result<FieldElement> {
    let depth = joined.depth();
    let atoms = base.len();
    let mut orbits_by_q: BTreeMap<u64, Vec<Vec<Vec<u32>>>> = BTreeMap::new();
    for a in 0..atoms {
        let size = (q[a] + 2) as usize;
        let mut used: BTreeSet<u32> = BTreeSet::new();
        let mut orbits = Vec::new();
        for class in joined.classes(a) {
            let fibers: Vec<u32> = class
                .iter()
                .map(|&x| x >> level)
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            if fibers.len() < 2 {
                continue;
            }
            let mut start = 0;
            while start + 1 < fibers.len() {
                let end = (start + size).min(fibers.len());
                let window = &fibers[start..end];
                let mut orbit = Vec::with_capacity(size);
                for k in 0..size {
                    let fiber = if k < window.len() { window[k] } else { window[window.len() - 1] };
                    orbit.push(free_leaf(fiber, level, a, avoid, &mut used)?);
                }
                orbits.push(orbit);
                start = end - 1;
            }
        }
        let slot = orbits_by_q.entry(q[a]).or_insert_with(|| vec![Vec::new(); atoms]);
        slot[a] = orbits;
    }
    let mut c = FieldElement::identity(base.clone(), depth);
    for (qv, per_atom) in orbits_by_q {
        let steps = (qv + 1) as usize;
        let maps: Vec<PartialMap> = (0..steps)
            .map(|k| {
                PartialMap::new(
                    depth,
                    per_atom
                        .iter()
                        .map(|orbits| orbits.iter().map(|o| (o[k], o[k + 1])).collect())
                        .collect(),
                )
            })
            .collect::<Result<_>>()?;
        let pre = Graphing::new(atoms, depth, maps)?;
        c = c.compose(&pre.cycle_extend(base)?)?;
    }
    Ok(c)
}

fn free_leaf(
    fiber: u32,
    level: u32,
    atom: usize,
    avoid: &crate::measure::ProductSet,
    used: &mut BTreeSet<u32>,
) -> Result<u32> {
    let lo = fiber << level;
    let leaf = (lo..lo + (1 << level))
        .find(|x| !avoid.part(atom).contains(*x) && !used.contains(x))
        .ok_or_else(|| Error::Resolution {
            reason: format!("fiber {fiber} on atom {atom} has no leaf outside supp U left"),
            required_depth: level + 1,
        })?;
    used.insert(leaf);
    Ok(leaf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::schedule::{build_schedule, halving_epsilons, BasisPlan};
    use crate::measure::BaseSpace;
    use std::sync::Arc;

    #[test]
    fn odd_q_examples() {
        assert_eq!(odd_q(&Dyadic::zero()).unwrap(), 1);
        assert_eq!(odd_q(&Dyadic::new(1, 1)).unwrap(), 3);
        assert_eq!(odd_q(&Dyadic::new(3, 2)).unwrap(), 7);
        assert_eq!(odd_q(&Dyadic::new(1, 3)).unwrap(), 1);
        assert!(odd_q(&Dyadic::one()).is_err());
    }

    fn schedule(atoms: usize) -> Schedule {
        build_schedule(
            Arc::new(BaseSpace::uniform(atoms)),
            vec![0; atoms],
            halving_epsilons(1),
            1,
            4,
            &BasisPlan::Whole,
        )
        .unwrap()
    }

    #[test]
    fn hyperfinite_case_returns_t_and_u() {
        let s = schedule(1);
        let r = rank_generators(&s, &[]).unwrap();
        assert_eq!(r.elements.len(), 2);
        assert_eq!(r.elements[1], build_U(&s).unwrap());
        assert!(r.closure_matches());
    }

    #[test]
    fn one_extra_graphing() {
        let s = schedule(2);
        // fibers at level 4, depth 6: link fiber 0 to fiber 1 and fiber 2 to 3 on atom 0
        let depth = 6;
        let phi = PartialMap::new(
            depth,
            vec![[(0u32, 16u32), (32, 48)].into(), [(5u32, 21u32)].into()],
        )
        .unwrap();
        let g = Graphing::new(2, depth, vec![phi]).unwrap();
        let r = rank_generators(&s, &[g]).unwrap();
        assert_eq!(r.elements.len(), 2);
        assert!(r.cycles_odd());
        assert!(r.minimal());
        assert!(r.members_of_target());
        assert_eq!(r.target.class_count(0), 2);
        assert_eq!(r.target.class_count(1), 3);
    }
}
