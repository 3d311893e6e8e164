//! Reduced words in `t, u`, their evaluation, and finite-depth freeness certificates.
//!
//! A word is written `w = w_n ⋯ w_1` and evaluated right to left: the
//! rightmost letter acts first.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::field::FieldElement;
use crate::measure::{DyadicSet, ProductSet};
use crate::perm::{ErrorBudget, LevelPerm};
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    T,
    TInv,
    U,
    UInv,
}

impl Letter {
    pub const ALL: [Letter; 4] = [Letter::T, Letter::TInv, Letter::U, Letter::UInv];

    pub fn inverse(self) -> Letter {
        match self {
            Letter::T => Letter::TInv,
            Letter::TInv => Letter::T,
            Letter::U => Letter::UInv,
            Letter::UInv => Letter::U,
        }
    }

    pub fn is_t(self) -> bool {
        matches!(self, Letter::T | Letter::TInv)
    }

    pub fn to_char(self) -> char {
        match self {
            Letter::T => 't',
            Letter::TInv => 'T',
            Letter::U => 'u',
            Letter::UInv => 'U',
        }
    }

    pub fn from_char(c: char) -> Option<Letter> {
        match c {
            't' => Some(Letter::T),
            'T' => Some(Letter::TInv),
            'u' => Some(Letter::U),
            'U' => Some(Letter::UInv),
            _ => None,
        }
    }
}

/// A freely reduced word, stored in written order (`letters[0] = w_n`).
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct ReducedWord {
    letters: Vec<Letter>,
}

impl PartialOrd for ReducedWord {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Shortlex on the written string.
impl Ord for ReducedWord {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.to_string().cmp(&other.to_string()))
    }
}

impl ReducedWord {
    pub fn empty() -> Self {
        ReducedWord::default()
    }

    /// Freely reduces any letter sequence.
    pub fn reduce(letters: impl IntoIterator<Item = Letter>) -> Self {
        let mut out: Vec<Letter> = Vec::new();
        for l in letters {
            if out.last() == Some(&l.inverse()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        ReducedWord { letters: out }
    }

    /// Rejects sequences with an adjacent cancelling pair.
    pub fn from_reduced(letters: Vec<Letter>) -> Result<Self> {
        if letters.windows(2).any(|w| w[0] == w[1].inverse()) {
            return invalid("word is not reduced");
        }
        Ok(ReducedWord { letters })
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    /// Letters in the order they act: `w_1, w_2, …, w_n`.
    pub fn applied(&self) -> impl Iterator<Item = Letter> + '_ {
        self.letters.iter().rev().copied()
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn contains_u(&self) -> bool {
        self.letters.iter().any(|l| !l.is_t())
    }

    /// `self · other`, reduced.
    pub fn concat(&self, other: &ReducedWord) -> ReducedWord {
        ReducedWord::reduce(self.letters.iter().chain(&other.letters).copied())
    }

    pub fn inverse(&self) -> ReducedWord {
        ReducedWord {
            letters: self.letters.iter().rev().map(|l| l.inverse()).collect(),
        }
    }

    /// Splits `self = g · c · g⁻¹` with `c` cyclically reduced; returns `(g, c)`.
    pub fn cyclic_reduction(&self) -> (ReducedWord, ReducedWord) {
        let l = &self.letters;
        let mut k = 0;
        while 2 * k + 1 < l.len() && l[k] == l[l.len() - 1 - k].inverse() {
            k += 1;
        }
        (
            ReducedWord {
                letters: l[..k].to_vec(),
            },
            ReducedWord {
                letters: l[k..l.len() - k].to_vec(),
            },
        )
    }

    /// Moves the first `k` written letters to the end.
    pub fn rotate(&self, k: usize) -> ReducedWord {
        let mut letters = self.letters.clone();
        if !letters.is_empty() {
            letters.rotate_left(k % self.letters.len());
        }
        ReducedWord { letters }
    }

    /// Least rotation of the cyclic reduction: one word per conjugacy class.
    pub fn conjugacy_representative(&self) -> ReducedWord {
        let (_, c) = self.cyclic_reduction();
        (0..c.len().max(1))
            .map(|k| c.rotate(k))
            .min()
            .unwrap_or_default()
    }

    /// All nonempty reduced words of length at most `max_len`, in shortlex order.
    pub fn enumerate(max_len: usize) -> Vec<ReducedWord> {
        let mut out = Vec::new();
        let mut layer = vec![ReducedWord::empty()];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for w in &layer {
                for l in Letter::ALL {
                    if w.letters.last() != Some(&l.inverse()) {
                        let mut letters = w.letters.clone();
                        letters.push(l);
                        next.push(ReducedWord { letters });
                    }
                }
            }
            next.sort();
            out.extend(next.iter().cloned());
            layer = next;
        }
        out
    }
}

impl fmt::Display for ReducedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "1");
        }
        for l in &self.letters {
            write!(f, "{}", l.to_char())?;
        }
        Ok(())
    }
}

/// Parses a string over `t,T,u,U` (or `1` for the empty word) and reduces it.
impl FromStr for ReducedWord {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "1" || s.is_empty() {
            return Ok(ReducedWord::empty());
        }
        let letters = s
            .chars()
            .enumerate()
            .map(|(i, c)| {
                Letter::from_char(c).ok_or_else(|| Error::Parse {
                    line: 1,
                    column: i + 1,
                    message: format!("unexpected letter `{c}`"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ReducedWord::reduce(letters))
    }
}

/// Evaluates `w(T, U)`; budgets add one generator budget per letter.
pub fn evaluate_word(w: &ReducedWord, t: &FieldElement, u: &FieldElement) -> Result<FieldElement> {
    evaluate_letters(w.letters(), t, u)
}

/// Evaluates any letter sequence, reduced or not.
pub fn evaluate_letters(letters: &[Letter], t: &FieldElement, u: &FieldElement) -> Result<FieldElement> {
    if t.depth() != u.depth() || **t.base() != **u.base() {
        return invalid("generators differ in depth or base");
    }
    let gens = Generators::new(t, u);
    let mut budget = ErrorBudget::zero();
    for l in letters {
        budget = budget.compose(if l.is_t() { t.budget() } else { u.budget() });
    }
    let n = 1u32 << t.depth();
    let perms = (0..t.atoms())
        .map(|a| {
            let images = (0..n)
                .map(|x| letters.iter().rev().fold(x, |y, &l| gens.apply(l, a, y)))
                .collect();
            LevelPerm::from_images_unchecked(t.depth(), images)
        })
        .collect();
    Ok(FieldElement::new(t.base().clone(), perms)?.with_budget(budget))
}

struct Generators {
    perms: [FieldElement; 4],
}

impl Generators {
    fn new(t: &FieldElement, u: &FieldElement) -> Self {
        Generators {
            perms: [t.clone(), t.inverse(), u.clone(), u.inverse()],
        }
    }

    fn get(&self, l: Letter) -> &FieldElement {
        &self.perms[l as usize]
    }

    fn apply(&self, l: Letter, atom: usize, leaf: u32) -> u32 {
        self.get(l).apply(atom, leaf)
    }
}

/// The lattice path `(i_k, j_k)`: `t^{±1}` steps `(0, ±1)`, `u^{±1}` steps `(1, 0)`.
pub fn grid_path(letters: &[Letter]) -> Result<Vec<(i64, i64)>> {
    let w = ReducedWord::from_reduced(letters.to_vec())?;
    let mut path = vec![(0i64, 0i64)];
    for l in w.applied() {
        let (i, j) = *path.last().expect("nonempty");
        path.push(match l {
            Letter::T => (i, j + 1),
            Letter::TInv => (i, j - 1),
            Letter::U | Letter::UInv => (i + 1, j),
        });
    }
    let distinct: HashSet<_> = path.iter().collect();
    if distinct.len() != path.len() {
        return Err(Error::Invariant(format!("grid path of {w} is not injective")));
    }
    Ok(path)
}

/// Every nonempty reduced word of length `≤ max_len` with `w(T, U) = id` exactly.
pub fn relation_search(t: &FieldElement, u: &FieldElement, max_len: usize) -> Result<Vec<ReducedWord>> {
    t.compose(u)?;
    let gens = Generators::new(t, u);
    let mut found: Vec<ReducedWord> = Letter::ALL
        .par_iter()
        .flat_map_iter(|&first| {
            let mut out = Vec::new();
            if max_len > 0 {
                let mut stack = vec![first];
                search(&gens, gens.get(first).clone(), &mut stack, max_len, &mut out);
            }
            out
        })
        .collect();
    found.sort();
    Ok(found)
}

/// `stack` holds the applied letters `w_1 … w_k`; `cur` is their product.
fn search(
    gens: &Generators,
    cur: FieldElement,
    stack: &mut Vec<Letter>,
    max_len: usize,
    out: &mut Vec<ReducedWord>,
) {
    if cur.is_identity() {
        out.push(ReducedWord {
            letters: stack.iter().rev().copied().collect(),
        });
    }
    if stack.len() == max_len {
        return;
    }
    let last = *stack.last().expect("nonempty");
    for l in Letter::ALL {
        if l == last.inverse() {
            continue;
        }
        let next = gens.get(l).compose_unchecked(&cur);
        stack.push(l);
        search(gens, next, stack, max_len, out);
        stack.pop();
    }
}

/// Options for [`free_perturbation`].
#[derive(Clone, Debug)]
pub struct FreeOptions {
    /// Close all chains on the tower into one cycle instead of one cycle each.
    pub aperiodic: bool,
    /// Leaves, per atom, that the tower must avoid.
    pub avoid: Option<ProductSet>,
}

impl Default for FreeOptions {
    fn default() -> Self {
        FreeOptions {
            aperiodic: false,
            avoid: None,
        }
    }
}

/// Output of [`free_perturbation`] with the data that certifies it.
#[derive(Clone, Debug)]
pub struct FreePerturbation {
    pub u_prime: FieldElement,
    /// The conjugate of the input word that ends in `u^{±1}`, actually certified.
    pub conjugated: ReducedWord,
    pub tower: ProductSet,
    pub path: Vec<(i64, i64)>,
    pub distance: Rational,
    /// A point moved by `w(T, U′)`: `(atom, leaf, image)`.
    pub witness: Option<(usize, u32, u32)>,
}

/// Perturbs `U` so that `w(T, U′) ≠ id`, changing it on a set of measure `< δ`.
pub fn free_perturbation(
    w: &ReducedWord,
    t: &FieldElement,
    u: &FieldElement,
    delta: &Rational,
    options: &FreeOptions,
) -> Result<FreePerturbation> {
    t.compose(u)?;
    if w.is_empty() {
        return invalid("the empty word is always a relation");
    }
    let (_, cyclic) = w.cyclic_reduction();
    if !cyclic.contains_u() {
        // w is conjugate to t^k, a relation only if T has an orbit dividing k everywhere
        let value = evaluate_word(&cyclic, t, u)?;
        return finish(w, cyclic, t, u, u.clone(), ProductSet::empty(t.atoms(), t.depth()), Vec::new(), delta, &value);
    }
    let rot = (0..cyclic.len())
        .find(|&k| !cyclic.rotate(k).letters.last().expect("nonempty").is_t())
        .expect("word contains u");
    let conj = cyclic.rotate(rot);
    let n = conj.len();
    let path = grid_path(conj.letters())?;

    let height = 2 * (n + 1) * (n + 1) + 1;
    let (atom, cells) = find_tower(t, height, options.avoid.as_ref())?;
    let depth = t.depth();
    let tower = ProductSet::new(
        (0..t.atoms())
            .map(|a| {
                let leaves: Vec<u32> = if a == atom { cells.clone() } else { Vec::new() };
                DyadicSet::from_leaves(depth, leaves)
            })
            .collect::<Result<_>>()?,
    )?;
    let tower_measure = tower.measure(t.base())?;
    if &tower_measure * Rational::from_integer(2.into()) >= *delta {
        return Err(Error::Resolution {
            reason: format!(
                "a tower of {height} leaves has measure {tower_measure}, not below δ/2"
            ),
            required_depth: depth + 1,
        });
    }

    let cell = |i: i64, j: i64| cells[(j + n as i64 + 2 * (n as i64 + 1) * i) as usize];
    let mut psi: BTreeMap<u32, u32> = BTreeMap::new();
    for (k, l) in conj.applied().enumerate() {
        let (i0, j0) = path[k];
        let (i1, j1) = path[k + 1];
        match l {
            Letter::U => psi.insert(cell(i0, j0), cell(i1, j1)),
            Letter::UInv => psi.insert(cell(i1, j1), cell(i0, j0)),
            _ => None,
        };
    }

    let on_tower = close_chains(&psi, &cells, options.aperiodic);
    let in_tower: BTreeSet<u32> = cells.iter().copied().collect();
    let mut perms: Vec<LevelPerm> = u.perms().to_vec();
    let old = u.perm(atom);
    let images: Vec<u32> = (0..1u32 << depth)
        .map(|x| {
            if let Some(&y) = on_tower.get(&x) {
                return y;
            }
            let mut y = old.apply(x);
            while in_tower.contains(&y) {
                y = old.apply(y);
            }
            y
        })
        .collect();
    perms[atom] = LevelPerm::new(depth, images)?;
    let u_prime = FieldElement::new(u.base().clone(), perms)?.with_budget(u.budget().clone());
    let value = evaluate_word(&conj, t, &u_prime)?;
    finish(w, conj, t, u, u_prime, tower, path, delta, &value)
}

#[allow(clippy::too_many_arguments)]
fn finish(
    w: &ReducedWord,
    conjugated: ReducedWord,
    t: &FieldElement,
    u: &FieldElement,
    u_prime: FieldElement,
    tower: ProductSet,
    path: Vec<(i64, i64)>,
    delta: &Rational,
    conj_value: &FieldElement,
) -> Result<FreePerturbation> {
    let distance = u.d_u(&u_prime)?;
    if &distance >= delta {
        return Err(Error::Invariant(format!(
            "perturbation moved U by {distance}, not below {delta}"
        )));
    }
    let value = evaluate_word(w, t, &u_prime)?;
    if value.is_identity() || conj_value.is_identity() {
        return Err(Error::Infeasible(format!("{w} is still a relation after perturbation")));
    }
    let witness = (0..conj_value.atoms()).find_map(|a| {
        (0..1u32 << conj_value.depth())
            .find(|&x| conj_value.apply(a, x) != x)
            .map(|x| (a, x, conj_value.apply(a, x)))
    });
    Ok(FreePerturbation {
        u_prime,
        conjugated,
        tower,
        path,
        distance,
        witness,
    })
}

/// A leaf `x` with `x, T x, …, T^{height-1} x` distinct and outside `avoid`,
/// on the lightest atom that has one.
fn find_tower(t: &FieldElement, height: usize, avoid: Option<&ProductSet>) -> Result<(usize, Vec<u32>)> {
    let mut atoms: Vec<usize> = (0..t.atoms()).collect();
    atoms.sort_by(|&a, &b| t.base().weight(a).cmp(t.base().weight(b)).then(a.cmp(&b)));
    for atom in atoms {
        let p = t.perm(atom);
        let blocked = |x: u32| avoid.is_some_and(|s| s.part(atom).contains(x));
        for cycle in p.cycles() {
            if cycle.len() < height {
                continue;
            }
            let len = cycle.len();
            for start in 0..len {
                let run: Vec<u32> = (0..height).map(|j| cycle[(start + j) % len]).collect();
                if run.iter().all(|&x| !blocked(x)) {
                    return Ok((atom, run));
                }
            }
        }
    }
    let longest = t.max_orbit();
    Err(Error::Resolution {
        reason: format!("no free T-orbit segment of length {height} (longest orbit {longest})"),
        required_depth: t.depth() + 1,
    })
}

/// Extends the union of chains `psi` to a permutation of `cells`.
fn close_chains(psi: &BTreeMap<u32, u32>, cells: &[u32], single_cycle: bool) -> BTreeMap<u32, u32> {
    let targets: BTreeSet<u32> = psi.values().copied().collect();
    let mut chains: Vec<Vec<u32>> = Vec::new();
    for &start in cells {
        if psi.contains_key(&start) && !targets.contains(&start) {
            let mut chain = vec![start];
            let mut x = start;
            while let Some(&y) = psi.get(&x) {
                chain.push(y);
                x = y;
            }
            chains.push(chain);
        }
    }
    let mut out = psi.clone();
    if single_cycle {
        let used: BTreeSet<u32> = chains.iter().flatten().copied().collect();
        let mut order: Vec<u32> = chains.into_iter().flatten().collect();
        order.extend(cells.iter().copied().filter(|x| !used.contains(x)));
        for k in 0..order.len() {
            out.entry(order[k]).or_insert(order[(k + 1) % order.len()]);
        }
    } else {
        for chain in chains {
            out.insert(*chain.last().expect("nonempty"), chain[0]);
        }
        for &x in cells {
            out.entry(x).or_insert(x);
        }
    }
    out
}
