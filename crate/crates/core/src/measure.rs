//! The truncated measure algebra of `Y × 2^ℕ`.
//!
//! Leaves at depth `m` are integers in `0..2^m`; the word `(x_1, …, x_m)`
//! is encoded as `Σ x_i 2^{i-1}`, so the first coordinate is the least
//! significant bit and refining a set appends high bits.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{invalid, Error, Result};
use crate::graphing::PartialMap;
use crate::rational::{parse_rational, Dyadic, Rational};
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Deepest level the crate will materialize (`2^MAX_DEPTH` leaves per atom).
pub const MAX_DEPTH: u32 = 26;

/// A finite binary word.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(pub Vec<bool>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    /// `b^n`.
    pub fn constant(bit: bool, n: usize) -> Self {
        Word(vec![bit; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut bits = self.0.clone();
        bits.extend_from_slice(&other.0);
        Word(bits)
    }

    /// Leaf label of this word at depth `len`.
    pub fn leaf(&self) -> u32 {
        self.0
            .iter()
            .enumerate()
            .fold(0u32, |acc, (i, &b)| acc | ((b as u32) << i))
    }

    /// The word of length `depth` encoded by `leaf`.
    pub fn from_leaf(leaf: u32, depth: u32) -> Word {
        Word((0..depth).map(|i| (leaf >> i) & 1 == 1).collect())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl std::str::FromStr for Word {
    type Err = Error;
    fn from_str(s: &str) -> Result<Word> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => invalid(format!("`{c}` is not a binary digit")),
            })
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Atom {
    pub label: String,
    pub weight: Rational,
}

/// A finite atomic probability space `(Y, ν)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BaseSpace {
    atoms: Vec<Atom>,
}

impl BaseSpace {
    pub fn new(atoms: Vec<(String, Rational)>) -> Result<Self> {
        if atoms.is_empty() {
            return invalid("a base space needs at least one atom");
        }
        let mut total = Rational::zero();
        let mut seen = BTreeSet::new();
        for (label, w) in &atoms {
            if !w.is_positive() || w > &Rational::one() {
                return invalid(format!("weight of atom `{label}` must lie in (0,1]"));
            }
            if !seen.insert(label.clone()) {
                return invalid(format!("duplicate atom label `{label}`"));
            }
            total += w;
        }
        if total != Rational::one() {
            return invalid(format!("atom weights sum to {total}, not 1"));
        }
        Ok(BaseSpace {
            atoms: atoms
                .into_iter()
                .map(|(label, weight)| Atom { label, weight })
                .collect(),
        })
    }

    /// `n` atoms of equal weight labelled `y1, …, yn`.
    pub fn uniform(n: usize) -> Self {
        let w = Rational::new(1.into(), (n as i64).into());
        BaseSpace::new((1..=n).map(|i| (format!("y{i}"), w.clone())).collect())
            .expect("uniform weights are valid")
    }

    pub fn single() -> Self {
        BaseSpace::uniform(1)
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn weight(&self, atom: usize) -> &Rational {
        &self.atoms[atom].weight
    }

    pub fn label(&self, atom: usize) -> &str {
        &self.atoms[atom].label
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.atoms
            .iter()
            .position(|a| a.label == label)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown atom `{label}`")))
    }

    /// `ν(A)` for a set of atom indices.
    pub fn measure_of(&self, atoms: &[usize]) -> Rational {
        let set: BTreeSet<usize> = atoms.iter().copied().collect();
        set.into_iter().map(|a| self.weight(a).clone()).sum()
    }

    /// Lines `base atom=<label> weight=<p/q>`.
    pub fn to_lines(&self) -> Vec<String> {
        self.atoms
            .iter()
            .map(|a| {
                format!(
                    "base atom={} weight={}",
                    a.label,
                    crate::rational::fmt_rational(&a.weight)
                )
            })
            .collect()
    }

    pub fn parse_line(line: &str) -> Result<(String, Rational)> {
        let fields = crate::text::fields(line, "base")?;
        let label = crate::text::get(&fields, "atom")?;
        let weight = parse_rational(crate::text::get(&fields, "weight")?)?;
        Ok((label.to_string(), weight))
    }
}

pub(crate) fn check_depth(m: u32) -> Result<()> {
    if m > MAX_DEPTH {
        return Err(Error::Resolution {
            reason: format!("depth {m} exceeds the materialization limit"),
            required_depth: m,
        });
    }
    Ok(())
}

/// A union of depth-`m` cylinders in `2^ℕ`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DyadicSet {
    depth: u32,
    leaves: BTreeSet<u32>,
}

impl DyadicSet {
    pub fn empty(depth: u32) -> Self {
        DyadicSet {
            depth,
            leaves: BTreeSet::new(),
        }
    }

    pub fn full(depth: u32) -> Self {
        DyadicSet {
            depth,
            leaves: (0..1u32 << depth).collect(),
        }
    }

    pub fn from_leaves(depth: u32, leaves: impl IntoIterator<Item = u32>) -> Result<Self> {
        let leaves: BTreeSet<u32> = leaves.into_iter().collect();
        if let Some(&l) = leaves.iter().next_back() {
            if (l as u64) >= 1u64 << depth {
                return invalid(format!("leaf {l} out of range at depth {depth}"));
            }
        }
        Ok(DyadicSet { depth, leaves })
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn leaves(&self) -> &BTreeSet<u32> {
        &self.leaves
    }

    pub fn len(&self) -> usize {
        self.leaves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.leaves.is_empty()
    }

    pub fn contains(&self, leaf: u32) -> bool {
        self.leaves.contains(&leaf)
    }

    pub fn measure(&self) -> Dyadic {
        Dyadic::leaves(self.leaves.len(), self.depth)
    }

    pub fn refine(&self, depth: u32) -> Result<DyadicSet> {
        if depth < self.depth {
            return invalid(format!("cannot refine depth {} to {depth}", self.depth));
        }
        check_depth(depth)?;
        let step = 1u32 << self.depth;
        let copies = 1u32 << (depth - self.depth);
        let leaves = (0..copies)
            .flat_map(|k| self.leaves.iter().map(move |&l| l + k * step))
            .collect();
        Ok(DyadicSet { depth, leaves })
    }

    /// Inverse of [`refine`](Self::refine) for sets that are unions of
    /// depth-`depth` cylinders.
    pub fn coarsen(&self, depth: u32) -> Result<DyadicSet> {
        if depth > self.depth {
            return invalid("coarsen target is deeper than the set");
        }
        let mask = (1u32 << depth) - 1;
        let coarse: BTreeSet<u32> = self.leaves.iter().map(|l| l & mask).collect();
        let candidate = DyadicSet {
            depth,
            leaves: coarse,
        };
        if candidate.refine(self.depth)? != *self {
            return invalid(format!("set is not a union of depth-{depth} cylinders"));
        }
        Ok(candidate)
    }

    fn same_depth(&self, other: &DyadicSet) -> Result<()> {
        if self.depth != other.depth {
            return invalid(format!(
                "depth mismatch {} vs {} (refine explicitly first)",
                self.depth, other.depth
            ));
        }
        Ok(())
    }

    pub fn union(&self, other: &DyadicSet) -> Result<DyadicSet> {
        self.same_depth(other)?;
        Ok(DyadicSet {
            depth: self.depth,
            leaves: self.leaves.union(&other.leaves).copied().collect(),
        })
    }

    pub fn intersection(&self, other: &DyadicSet) -> Result<DyadicSet> {
        self.same_depth(other)?;
        Ok(DyadicSet {
            depth: self.depth,
            leaves: self.leaves.intersection(&other.leaves).copied().collect(),
        })
    }

    pub fn difference(&self, other: &DyadicSet) -> Result<DyadicSet> {
        self.same_depth(other)?;
        Ok(DyadicSet {
            depth: self.depth,
            leaves: self.leaves.difference(&other.leaves).copied().collect(),
        })
    }

    pub fn is_subset(&self, other: &DyadicSet) -> bool {
        self.depth == other.depth && self.leaves.is_subset(&other.leaves)
    }
}

/// `N_s` at depth `m`.
pub fn cylinder(s: &Word, m: u32) -> Result<DyadicSet> {
    if (s.len() as u64) > m as u64 {
        return invalid(format!("word of length {} deeper than {m}", s.len()));
    }
    check_depth(m)?;
    let prefix = s.leaf();
    let shift = s.len() as u32;
    let leaves = (0..1u32 << (m - shift)).map(|k| prefix | (k << shift)).collect();
    Ok(DyadicSet { depth: m, leaves })
}

/// A subset of `Y × 2^ℕ`: one [`DyadicSet`] per atom, all at one depth.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ProductSet {
    depth: u32,
    parts: Vec<DyadicSet>,
}

impl ProductSet {
    pub fn empty(atoms: usize, depth: u32) -> Self {
        ProductSet {
            depth,
            parts: vec![DyadicSet::empty(depth); atoms],
        }
    }

    pub fn full(atoms: usize, depth: u32) -> Self {
        ProductSet {
            depth,
            parts: vec![DyadicSet::full(depth); atoms],
        }
    }

    pub fn new(parts: Vec<DyadicSet>) -> Result<Self> {
        let depth = match parts.first() {
            Some(p) => p.depth,
            None => return invalid("a product set needs at least one atom"),
        };
        if parts.iter().any(|p| p.depth != depth) {
            return invalid("all parts of a product set must share a depth");
        }
        Ok(ProductSet { depth, parts })
    }

    /// The same fibre set on every atom.
    pub fn uniform(atoms: usize, set: &DyadicSet) -> Self {
        ProductSet {
            depth: set.depth,
            parts: vec![set.clone(); atoms],
        }
    }

    /// `set` over the listed atoms, empty elsewhere.
    pub fn over_atoms(atoms: usize, which: &[usize], set: &DyadicSet) -> Result<Self> {
        let mut out = ProductSet::empty(atoms, set.depth);
        for &a in which {
            if a >= atoms {
                return invalid(format!("atom index {a} out of range"));
            }
            out.parts[a] = set.clone();
        }
        Ok(out)
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn atoms(&self) -> usize {
        self.parts.len()
    }

    pub fn part(&self, atom: usize) -> &DyadicSet {
        &self.parts[atom]
    }

    pub fn parts(&self) -> &[DyadicSet] {
        &self.parts
    }

    pub fn is_empty(&self) -> bool {
        self.parts.iter().all(DyadicSet::is_empty)
    }

    /// `Σ_y ν(y) λ(A_y)`.
    pub fn measure(&self, base: &BaseSpace) -> Result<Rational> {
        self.check_base(base)?;
        Ok(self
            .parts
            .iter()
            .enumerate()
            .map(|(a, p)| base.weight(a) * p.measure().to_rational())
            .sum())
    }

    pub(crate) fn check_base(&self, base: &BaseSpace) -> Result<()> {
        if base.len() != self.parts.len() {
            return invalid(format!(
                "set has {} atoms but the base space has {}",
                self.parts.len(),
                base.len()
            ));
        }
        Ok(())
    }

    fn zip_with(
        &self,
        other: &ProductSet,
        f: impl Fn(&DyadicSet, &DyadicSet) -> Result<DyadicSet>,
    ) -> Result<ProductSet> {
        if self.parts.len() != other.parts.len() {
            return invalid("atom count mismatch");
        }
        if self.depth != other.depth {
            return invalid(format!(
                "depth mismatch {} vs {} (refine explicitly first)",
                self.depth, other.depth
            ));
        }
        let parts = self
            .parts
            .iter()
            .zip(&other.parts)
            .map(|(a, b)| f(a, b))
            .collect::<Result<Vec<_>>>()?;
        Ok(ProductSet {
            depth: self.depth,
            parts,
        })
    }

    pub fn union(&self, other: &ProductSet) -> Result<ProductSet> {
        self.zip_with(other, DyadicSet::union)
    }

    pub fn intersection(&self, other: &ProductSet) -> Result<ProductSet> {
        self.zip_with(other, DyadicSet::intersection)
    }

    pub fn difference(&self, other: &ProductSet) -> Result<ProductSet> {
        self.zip_with(other, DyadicSet::difference)
    }

    pub fn refine(&self, depth: u32) -> Result<ProductSet> {
        let parts = self
            .parts
            .iter()
            .map(|p| p.refine(depth))
            .collect::<Result<Vec<_>>>()?;
        Ok(ProductSet { depth, parts })
    }

    pub fn is_subset(&self, other: &ProductSet) -> bool {
        self.depth == other.depth
            && self.parts.len() == other.parts.len()
            && self.parts.iter().zip(&other.parts).all(|(a, b)| a.is_subset(b))
    }

    pub fn is_disjoint(&self, other: &ProductSet) -> bool {
        self.parts
            .iter()
            .zip(&other.parts)
            .all(|(a, b)| a.leaves.is_disjoint(&b.leaves))
    }

    /// One `set depth=<m> atom=<label> leaves=<…>` line per atom.
    pub fn to_lines(&self, base: &BaseSpace) -> Vec<String> {
        self.parts
            .iter()
            .enumerate()
            .map(|(a, p)| {
                format!(
                    "set depth={} atom={} leaves={}",
                    self.depth,
                    base.label(a),
                    crate::text::join_u32(p.leaves.iter().copied())
                )
            })
            .collect()
    }

    pub fn from_lines<'a>(
        base: &BaseSpace,
        lines: impl IntoIterator<Item = &'a str>,
    ) -> Result<ProductSet> {
        let mut parts: Vec<Option<DyadicSet>> = vec![None; base.len()];
        let mut depth = None;
        for line in lines {
            let fields = crate::text::fields(line, "set")?;
            let m: u32 = crate::text::get_parsed(&fields, "depth")?;
            if *depth.get_or_insert(m) != m {
                return invalid("set lines disagree on depth");
            }
            let atom = base.index_of(crate::text::get(&fields, "atom")?)?;
            let leaves = crate::text::parse_u32_list(crate::text::get(&fields, "leaves")?)?;
            parts[atom] = Some(DyadicSet::from_leaves(m, leaves)?);
        }
        let depth = depth.ok_or_else(|| Error::InvalidArgument("no set lines".into()))?;
        ProductSet::new(
            parts
                .into_iter()
                .map(|p| p.unwrap_or_else(|| DyadicSet::empty(depth)))
                .collect(),
        )
    }
}

/// An `R`-invariant function, i.e. one dyadic value per atom.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CondMeasure(pub Vec<Dyadic>);

impl CondMeasure {
    pub fn constant(atoms: usize, value: Dyadic) -> Self {
        CondMeasure(vec![value; atoms])
    }

    pub fn values(&self) -> &[Dyadic] {
        &self.0
    }

    pub fn get(&self, atom: usize) -> &Dyadic {
        &self.0[atom]
    }

    /// `∫ f dν`.
    pub fn integrate(&self, base: &BaseSpace) -> Rational {
        self.0
            .iter()
            .enumerate()
            .map(|(a, v)| base.weight(a) * v.to_rational())
            .sum()
    }

    /// Essential supremum over atoms.
    pub fn sup(&self) -> Dyadic {
        self.0.iter().cloned().max().unwrap_or_else(Dyadic::zero)
    }

    pub fn le(&self, other: &CondMeasure) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn to_fraction_list(&self) -> Vec<String> {
        self.0.iter().map(Dyadic::to_string).collect()
    }
}

/// `μ_R(A)`: the fraction of leaves of `A` on each atom.
pub fn cond_measure(a: &ProductSet) -> CondMeasure {
    CondMeasure(a.parts.iter().map(DyadicSet::measure).collect())
}

/// Picks `B ⊆ A` with `μ_R(B) = f`, taking the lowest leaves of `A` on each atom.
pub fn maharam_split(a: &ProductSet, f: &CondMeasure) -> Result<ProductSet> {
    if f.0.len() != a.atoms() {
        return invalid("conditional measure and set have different atom counts");
    }
    let available = cond_measure(a);
    let mut parts = Vec::with_capacity(a.atoms());
    for (atom, (part, target)) in a.parts.iter().zip(&f.0).enumerate() {
        if target.is_negative() {
            return invalid(format!("negative target on atom {atom}"));
        }
        if target > available.get(atom) {
            return Err(Error::Infeasible(format!(
                "target {target} exceeds conditional measure {} on atom {atom}",
                available.get(atom)
            )));
        }
        let count = target
            .scaled_count(a.depth)
            .ok_or_else(|| Error::Resolution {
                reason: format!("target {target} on atom {atom} is not a union of depth-{} cylinders", a.depth),
                required_depth: target.exponent(),
            })?
            .to_usize()
            .expect("bounded by leaf count");
        let leaves = part.leaves.iter().copied().take(count);
        parts.push(DyadicSet::from_leaves(a.depth, leaves)?);
    }
    ProductSet::new(parts)
}

/// Splits `A` into `pieces` sets of equal conditional measure.
pub fn equal_split(a: &ProductSet, pieces: usize) -> Result<Vec<ProductSet>> {
    if pieces == 0 {
        return invalid("cannot split into zero pieces");
    }
    let mut rest = a.clone();
    let mut out = Vec::with_capacity(pieces);
    let share = CondMeasure(
        cond_measure(a)
            .0
            .iter()
            .map(|v| {
                let count = v.scaled_count(a.depth).expect("leaf counts are integral");
                if (&count % pieces) != 0.into() {
                    return Err(Error::Resolution {
                        reason: format!("cannot split {count} leaves into {pieces} equal pieces"),
                        required_depth: a.depth + 1,
                    });
                }
                Ok(Dyadic::new(count / pieces, a.depth))
            })
            .collect::<Result<Vec<_>>>()?,
    );
    for _ in 0..pieces {
        let b = maharam_split(&rest, &share)?;
        rest = rest.difference(&b)?;
        out.push(b);
    }
    Ok(out)
}

/// A measure-preserving leaf bijection `A → B` inside each atom, pairing sorted leaves.
pub fn match_sets(a: &ProductSet, b: &ProductSet) -> Result<PartialMap> {
    if a.atoms() != b.atoms() || a.depth != b.depth {
        return invalid("match_sets needs a common depth and atom count");
    }
    for (atom, (pa, pb)) in a.parts.iter().zip(&b.parts).enumerate() {
        if pa.len() != pb.len() {
            return Err(Error::Infeasible(format!(
                "conditional measures differ on atom {atom}: {} vs {}",
                pa.measure(),
                pb.measure()
            )));
        }
    }
    let maps = a
        .parts
        .iter()
        .zip(&b.parts)
        .map(|(pa, pb)| pa.leaves.iter().copied().zip(pb.leaves.iter().copied()).collect())
        .collect();
    PartialMap::new(a.depth, maps)
}

/// The marker sequence `A_n = Y × N_{0^n}`, `n = 1..=m`, at depth `m`.
pub fn markers(atoms: usize, m: u32) -> Result<Vec<ProductSet>> {
    if m == 0 {
        return invalid("markers need depth at least 1");
    }
    (1..=m)
        .map(|n| {
            let c = cylinder(&Word::constant(false, n as usize), m)?;
            Ok(ProductSet::uniform(atoms, &c))
        })
        .collect()
}
