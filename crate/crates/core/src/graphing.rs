//! Partial isomorphisms, graphings and the relations they generate.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::field::{parse_error, FieldElement};
use crate::measure::{check_depth, BaseSpace, CondMeasure, DyadicSet, ProductSet};
use crate::perm::LevelPerm;
use crate::rational::Dyadic;

/// An injective partial map of leaves inside each atom.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialMap {
    depth: u32,
    maps: Vec<BTreeMap<u32, u32>>,
}

impl PartialMap {
    pub fn new(depth: u32, maps: Vec<BTreeMap<u32, u32>>) -> Result<Self> {
        check_depth(depth)?;
        let n = 1u32 << depth;
        for (atom, map) in maps.iter().enumerate() {
            let mut targets = BTreeSet::new();
            for (&x, &y) in map {
                if x >= n || y >= n {
                    return invalid(format!("pair {x}:{y} on atom {atom} out of range"));
                }
                if !targets.insert(y) {
                    return invalid(format!("partial map not injective at {y} on atom {atom}"));
                }
            }
        }
        Ok(PartialMap { depth, maps })
    }

    pub fn empty(atoms: usize, depth: u32) -> Self {
        PartialMap {
            depth,
            maps: vec![BTreeMap::new(); atoms],
        }
    }

    /// The graph of a full-group element as a total partial map.
    pub fn from_element(f: &FieldElement) -> Self {
        PartialMap {
            depth: f.depth(),
            maps: f
                .perms()
                .iter()
                .map(|p| p.images().iter().enumerate().map(|(x, &y)| (x as u32, y)).collect())
                .collect(),
        }
    }

    /// `f` restricted to `dom`.
    pub fn restrict(f: &FieldElement, dom: &ProductSet) -> Result<Self> {
        if dom.depth() != f.depth() || dom.atoms() != f.atoms() {
            return invalid("restriction domain does not match the element");
        }
        Ok(PartialMap {
            depth: f.depth(),
            maps: dom
                .parts()
                .iter()
                .enumerate()
                .map(|(a, part)| part.leaves().iter().map(|&x| (x, f.apply(a, x))).collect())
                .collect(),
        })
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn atoms(&self) -> usize {
        self.maps.len()
    }

    pub fn map(&self, atom: usize) -> &BTreeMap<u32, u32> {
        &self.maps[atom]
    }

    pub fn apply(&self, atom: usize, leaf: u32) -> Option<u32> {
        self.maps[atom].get(&leaf).copied()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.iter().all(BTreeMap::is_empty)
    }

    pub fn domain(&self) -> ProductSet {
        self.set_of(|m| m.keys().copied().collect())
    }

    pub fn range(&self) -> ProductSet {
        self.set_of(|m| m.values().copied().collect())
    }

    fn set_of(&self, f: impl Fn(&BTreeMap<u32, u32>) -> Vec<u32>) -> ProductSet {
        ProductSet::new(
            self.maps
                .iter()
                .map(|m| DyadicSet::from_leaves(self.depth, f(m)).expect("leaves in range"))
                .collect(),
        )
        .expect("common depth")
    }

    pub fn inverse(&self) -> PartialMap {
        PartialMap {
            depth: self.depth,
            maps: self
                .maps
                .iter()
                .map(|m| m.iter().map(|(&x, &y)| (y, x)).collect())
                .collect(),
        }
    }

    /// `self ∘ other` on the points where both steps are defined.
    pub fn compose(&self, other: &PartialMap) -> Result<PartialMap> {
        if self.depth != other.depth || self.atoms() != other.atoms() {
            return invalid("partial maps differ in depth or atom count");
        }
        Ok(PartialMap {
            depth: self.depth,
            maps: other
                .maps
                .iter()
                .zip(&self.maps)
                .map(|(first, second)| {
                    first
                        .iter()
                        .filter_map(|(&x, y)| second.get(y).map(|&z| (x, z)))
                        .collect()
                })
                .collect(),
        })
    }

    /// Conditional measure of the domain.
    pub fn cond_measure(&self) -> CondMeasure {
        CondMeasure(
            self.maps
                .iter()
                .map(|m| Dyadic::leaves(m.len(), self.depth))
                .collect(),
        )
    }

    /// One `pmap atom=<label> pairs=src:dst,…` line per atom.
    pub fn to_lines(&self, base: &BaseSpace) -> Vec<String> {
        self.maps
            .iter()
            .enumerate()
            .map(|(a, m)| {
                let pairs: Vec<String> = m.iter().map(|(x, y)| format!("{x}:{y}")).collect();
                format!("pmap atom={} pairs={}", base.label(a), pairs.join(","))
            })
            .collect()
    }

    /// Parses `pmap` lines; atoms without a line get the empty map.
    pub fn from_lines<'a>(
        base: &BaseSpace,
        depth: u32,
        lines: impl IntoIterator<Item = &'a str>,
    ) -> Result<Self> {
        let mut maps = vec![BTreeMap::new(); base.len()];
        for line in lines {
            let fields = crate::text::fields(line.trim(), "pmap")?;
            let atom = base.index_of(crate::text::get(&fields, "atom")?)?;
            let pairs = crate::text::get(&fields, "pairs")?;
            for pair in pairs.split(',').filter(|p| !p.is_empty()) {
                let (x, y) = pair
                    .split_once(':')
                    .ok_or_else(|| Error::InvalidArgument(format!("bad pair `{pair}`")))?;
                let parse = |s: &str| {
                    s.parse::<u32>()
                        .map_err(|_| Error::InvalidArgument(format!("bad leaf `{s}`")))
                };
                if maps[atom].insert(parse(x)?, parse(y)?).is_some() {
                    return invalid(format!("leaf {x} mapped twice"));
                }
            }
        }
        PartialMap::new(depth, maps)
    }
}

/// A per-atom partition of the leaves.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    depth: u32,
    classes: Vec<Vec<Vec<u32>>>,
    labels: Vec<Vec<u32>>,
}

impl Partition {
    pub fn singletons(atoms: usize, depth: u32) -> Self {
        let n = 1u32 << depth;
        Partition {
            depth,
            classes: vec![(0..n).map(|x| vec![x]).collect(); atoms],
            labels: vec![(0..n).collect(); atoms],
        }
    }

    /// Validates that the classes cover each atom exactly once.
    pub fn from_classes(depth: u32, classes: Vec<Vec<Vec<u32>>>) -> Result<Self> {
        check_depth(depth)?;
        let n = 1usize << depth;
        let mut labels = Vec::with_capacity(classes.len());
        for (atom, atom_classes) in classes.iter().enumerate() {
            let mut label = vec![u32::MAX; n];
            for (c, class) in atom_classes.iter().enumerate() {
                for &x in class {
                    let slot = label.get_mut(x as usize).ok_or_else(|| {
                        Error::InvalidArgument(format!("leaf {x} out of range"))
                    })?;
                    if *slot != u32::MAX {
                        return invalid(format!("leaf {x} in two classes on atom {atom}"));
                    }
                    *slot = c as u32;
                }
            }
            if label.contains(&u32::MAX) {
                return invalid(format!("classes do not cover atom {atom}"));
            }
            labels.push(label);
        }
        Ok(Partition::from_labels(depth, labels))
    }

    /// Normalizes: classes sorted internally and ordered by least leaf.
    fn from_labels(depth: u32, raw: Vec<Vec<u32>>) -> Self {
        let mut classes = Vec::with_capacity(raw.len());
        let mut labels = Vec::with_capacity(raw.len());
        for raw_labels in raw {
            let mut renumber: BTreeMap<u32, u32> = BTreeMap::new();
            let mut atom_classes: Vec<Vec<u32>> = Vec::new();
            let mut label = Vec::with_capacity(raw_labels.len());
            for (x, r) in raw_labels.iter().enumerate() {
                let next = atom_classes.len() as u32;
                let c = *renumber.entry(*r).or_insert(next);
                if c == next {
                    atom_classes.push(Vec::new());
                }
                atom_classes[c as usize].push(x as u32);
                label.push(c);
            }
            classes.push(atom_classes);
            labels.push(label);
        }
        Partition {
            depth,
            classes,
            labels,
        }
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn atoms(&self) -> usize {
        self.classes.len()
    }

    pub fn classes(&self, atom: usize) -> &[Vec<u32>] {
        &self.classes[atom]
    }

    pub fn class_of(&self, atom: usize, leaf: u32) -> u32 {
        self.labels[atom][leaf as usize]
    }

    pub fn class_count(&self, atom: usize) -> usize {
        self.classes[atom].len()
    }

    /// True when every class of `self` lies inside a class of `other`.
    pub fn refines(&self, other: &Partition) -> bool {
        self.depth == other.depth
            && self.atoms() == other.atoms()
            && (0..self.atoms()).all(|a| {
                self.classes[a]
                    .iter()
                    .all(|c| c.iter().all(|&x| other.class_of(a, x) == other.class_of(a, c[0])))
            })
    }

    /// The finest partition coarser than both.
    pub fn join(&self, other: &Partition) -> Result<Partition> {
        if self.depth != other.depth || self.atoms() != other.atoms() {
            return invalid("partitions differ in depth or atom count");
        }
        let mut uf = UnionFind::per_atom(self.atoms(), self.depth);
        for p in [self, other] {
            for (a, classes) in p.classes.iter().enumerate() {
                for c in classes {
                    for w in c.windows(2) {
                        uf[a].union(w[0], w[1]);
                    }
                }
            }
        }
        Ok(Partition::from_labels(
            self.depth,
            uf.iter_mut().map(UnionFind::roots).collect(),
        ))
    }

    /// `class atom=<label> leaves=…` lines, classes ordered by least leaf.
    pub fn to_lines(&self, base: &BaseSpace) -> Vec<String> {
        let mut out = Vec::new();
        for (a, classes) in self.classes.iter().enumerate() {
            for c in classes {
                out.push(format!(
                    "class atom={} leaves={}",
                    base.label(a),
                    crate::text::join_u32(c.iter().copied())
                ));
            }
        }
        out
    }
}

/// Union–find over `0..n` whose representatives are least elements.
pub(crate) struct UnionFind {
    parent: Vec<u32>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
        }
    }

    fn per_atom(atoms: usize, depth: u32) -> Vec<UnionFind> {
        (0..atoms).map(|_| UnionFind::new(1 << depth)).collect()
    }

    pub(crate) fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let grand = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = grand;
            x = grand;
        }
        x
    }

    pub(crate) fn union(&mut self, a: u32, b: u32) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi as usize] = lo;
        true
    }

    fn roots(&mut self) -> Vec<u32> {
        (0..self.parent.len() as u32).map(|x| self.find(x)).collect()
    }
}

/// A finite graphing: partial maps sharing a depth and base.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graphing {
    atoms: usize,
    depth: u32,
    maps: Vec<PartialMap>,
}

impl Graphing {
    pub fn new(atoms: usize, depth: u32, maps: Vec<PartialMap>) -> Result<Self> {
        check_depth(depth)?;
        if maps.iter().any(|m| m.depth != depth || m.atoms() != atoms) {
            return invalid("graphing members differ in depth or atom count");
        }
        Ok(Graphing { atoms, depth, maps })
    }

    pub fn empty(atoms: usize, depth: u32) -> Self {
        Graphing {
            atoms,
            depth,
            maps: Vec::new(),
        }
    }

    /// The graphs of a list of elements.
    pub fn from_elements(elements: &[FieldElement]) -> Result<Self> {
        let first = elements
            .first()
            .ok_or_else(|| Error::InvalidArgument("no elements given".into()))?;
        Graphing::new(
            first.atoms(),
            first.depth(),
            elements.iter().map(PartialMap::from_element).collect(),
        )
    }

    pub fn atoms(&self) -> usize {
        self.atoms
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn maps(&self) -> &[PartialMap] {
        &self.maps
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    pub fn push(&mut self, map: PartialMap) -> Result<()> {
        if map.depth != self.depth || map.atoms() != self.atoms {
            return invalid("partial map differs in depth or atom count");
        }
        self.maps.push(map);
        Ok(())
    }

    pub fn concat(&self, other: &Graphing) -> Result<Graphing> {
        let mut maps = self.maps.clone();
        maps.extend(other.maps.iter().cloned());
        Graphing::new(self.atoms, self.depth, maps)
    }

    /// `R_Φ` at depth: the classes joined by every `(x, φ(x))` edge.
    pub fn generated_relation(&self) -> Partition {
        let mut uf = UnionFind::per_atom(self.atoms, self.depth);
        for map in &self.maps {
            for (a, m) in map.maps.iter().enumerate() {
                for (&x, &y) in m {
                    uf[a].union(x, y);
                }
            }
        }
        Partition::from_labels(self.depth, uf.iter_mut().map(UnionFind::roots).collect())
    }

    /// `CCost(Φ) = Σ_i μ_R(dom φ_i)` per atom.
    pub fn ccost(&self) -> CondMeasure {
        let mut total = vec![0usize; self.atoms];
        for map in &self.maps {
            for (a, m) in map.maps.iter().enumerate() {
                total[a] += m.len();
            }
        }
        CondMeasure(total.into_iter().map(|c| Dyadic::leaves(c, self.depth)).collect())
    }

    /// Checks `rng φ_i = dom φ_{i+1}` and disjointness of the levels.
    pub fn is_pre_p_cycle(&self) -> bool {
        for a in 0..self.atoms {
            let mut levels: Vec<BTreeSet<u32>> = Vec::with_capacity(self.maps.len() + 1);
            for (i, map) in self.maps.iter().enumerate() {
                let dom: BTreeSet<u32> = map.maps[a].keys().copied().collect();
                if i > 0 && levels[i] != dom {
                    return false;
                }
                if i == 0 {
                    levels.push(dom);
                }
                levels.push(map.maps[a].values().copied().collect());
            }
            let total: usize = levels.iter().map(BTreeSet::len).sum();
            let union: BTreeSet<u32> = levels.iter().flatten().copied().collect();
            if union.len() != total {
                return false;
            }
        }
        true
    }

    /// `p` for a pre-`p`-cycle.
    pub fn cycle_length(&self) -> usize {
        self.maps.len() + 1
    }

    /// The `p`-cycle `C_Φ` extending a pre-`p`-cycle.
    pub fn cycle_extend(&self, base: &Arc<BaseSpace>) -> Result<FieldElement> {
        if base.len() != self.atoms {
            return invalid("base space does not match the graphing");
        }
        if !self.is_pre_p_cycle() {
            return invalid("graphing is not a pre-p-cycle");
        }
        let n = 1u32 << self.depth;
        let mut perms = Vec::with_capacity(self.atoms);
        for a in 0..self.atoms {
            let mut images: Vec<u32> = (0..n).collect();
            if let Some(first) = self.maps.first() {
                for &start in first.maps[a].keys() {
                    let mut x = start;
                    for map in &self.maps {
                        let y = map.maps[a][&x];
                        images[x as usize] = y;
                        x = y;
                    }
                    images[x as usize] = start;
                }
            }
            perms.push(LevelPerm::new(self.depth, images)?);
        }
        FieldElement::new(base.clone(), perms)
    }

    /// Graphing file text: base lines, a depth line, then blank-line separated `pmap` blocks.
    pub fn to_text(&self, base: &BaseSpace) -> String {
        let mut out = base.to_lines().join("\n");
        out.push_str(&format!("\ndepth={}\n", self.depth));
        for map in &self.maps {
            out.push('\n');
            for line in map.to_lines(base) {
                out.push_str(&line);
                out.push('\n');
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<(BaseSpace, Graphing)> {
        let mut atoms = Vec::new();
        let mut depth = None;
        let mut blocks: Vec<Vec<(usize, &str)>> = vec![Vec::new()];
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let at = |e: Error| parse_error(idx + 1, raw, e);
            if line.starts_with('#') {
                continue;
            }
            if line.is_empty() {
                if !blocks.last().expect("nonempty").is_empty() {
                    blocks.push(Vec::new());
                }
            } else if line.starts_with("base ") {
                atoms.push(BaseSpace::parse_line(line).map_err(at)?);
            } else if let Some(d) = line.strip_prefix("depth=") {
                depth = Some(d.trim().parse::<u32>().map_err(|_| {
                    at(Error::InvalidArgument(format!("bad depth `{d}`")))
                })?);
            } else if line.starts_with("pmap ") {
                blocks.last_mut().expect("nonempty").push((idx + 1, raw));
            } else {
                return Err(at(Error::InvalidArgument(format!("unrecognized line `{line}`"))));
            }
        }
        let base = BaseSpace::new(atoms)?;
        let depth = depth.ok_or_else(|| Error::InvalidArgument("missing depth= line".into()))?;
        let mut maps = Vec::new();
        for block in blocks.into_iter().filter(|b| !b.is_empty()) {
            let first = block[0].0;
            let map = PartialMap::from_lines(&base, depth, block.iter().map(|(_, l)| *l))
                .map_err(|e| parse_error(first, block[0].1, e))?;
            maps.push(map);
        }
        let g = Graphing::new(base.len(), depth, maps)?;
        Ok((base, g))
    }
}

/// `f ∈ [R]`: every leaf stays in its class.
pub fn full_group_membership(f: &FieldElement, p: &Partition) -> bool {
    f.depth() == p.depth()
        && f.atoms() == p.atoms()
        && (0..f.atoms()).all(|a| {
            (0..1u32 << f.depth()).all(|x| p.class_of(a, x) == p.class_of(a, f.apply(a, x)))
        })
}

/// `Σ_j (n_j − 1) / 2^m` per atom: the fewest edges generating the partition.
pub fn forest_bound(p: &Partition) -> CondMeasure {
    CondMeasure(
        (0..p.atoms())
            .map(|a| {
                let edges: usize = p.classes(a).iter().map(|c| c.len() - 1).sum();
                Dyadic::leaves(edges, p.depth())
            })
            .collect(),
    )
}

/// A single partial map chaining each class in leaf order; its cost equals [`forest_bound`].
pub fn spanning_chain(p: &Partition) -> PartialMap {
    PartialMap {
        depth: p.depth(),
        maps: (0..p.atoms())
            .map(|a| {
                p.classes(a)
                    .iter()
                    .flat_map(|c| c.windows(2).map(|w| (w[0], w[1])))
                    .collect()
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::finite_odometer;

    fn pmap(depth: u32, pairs: &[(u32, u32)]) -> PartialMap {
        PartialMap::new(depth, vec![pairs.iter().copied().collect()]).unwrap()
    }

    /// N_00 → N_01 → N_10 at depth 2: leaves 0 → 2 → 1.
    fn chain() -> Graphing {
        Graphing::new(1, 2, vec![pmap(2, &[(0, 2)]), pmap(2, &[(2, 1)])]).unwrap()
    }

    #[test]
    fn generated_relation_examples() {
        let p = Graphing::empty(1, 3).generated_relation();
        assert_eq!(p.class_count(0), 8);

        let base = Arc::new(BaseSpace::uniform(2));
        let odo = FieldElement::constant(base, &finite_odometer(3).unwrap());
        let p = Graphing::from_elements(&[odo]).unwrap().generated_relation();
        assert_eq!(p.classes(0), &[(0..8).collect::<Vec<u32>>()]);
        assert_eq!(p.classes(1).len(), 1);

        let p = chain().generated_relation();
        assert_eq!(p.classes(0), &[vec![0, 1, 2], vec![3]]);
    }

    #[test]
    fn ccost_examples() {
        let base = Arc::new(BaseSpace::single());
        let odo = FieldElement::constant(base, &finite_odometer(2).unwrap());
        let total = Graphing::from_elements(&[odo]).unwrap();
        assert_eq!(total.ccost().0, vec![Dyadic::one()]);
        let quarter = Graphing::new(1, 3, vec![pmap(3, &[(0, 2), (4, 6)]), pmap(3, &[(2, 1), (6, 5)])])
            .unwrap();
        assert!(quarter.is_pre_p_cycle());
        assert_eq!(quarter.ccost().0, vec![Dyadic::new(1, 1)]);
        let both = quarter.concat(&total_at(3)).unwrap();
        assert_eq!(both.ccost().0, vec![Dyadic::new(3, 1)]);
    }

    fn total_at(depth: u32) -> Graphing {
        let base = Arc::new(BaseSpace::single());
        Graphing::from_elements(&[FieldElement::identity(base, depth)]).unwrap()
    }

    #[test]
    fn pre_cycle_examples() {
        assert!(chain().is_pre_p_cycle());
        assert_eq!(chain().cycle_length(), 3);
        assert!(!total_at(2).is_pre_p_cycle());
        assert!(Graphing::empty(1, 2).is_pre_p_cycle());
        let broken = Graphing::new(1, 2, vec![pmap(2, &[(0, 2)]), pmap(2, &[(3, 1)])]).unwrap();
        assert!(!broken.is_pre_p_cycle());
    }

    #[test]
    fn cycle_extend_examples() {
        let base = Arc::new(BaseSpace::single());
        let c = chain().cycle_extend(&base).unwrap();
        assert_eq!(c.perm(0).images(), &[2, 0, 1, 3]);
        assert_eq!(c.perm(0).cycle_type(), vec![3, 1]);
        assert!(Graphing::empty(1, 2).cycle_extend(&base).unwrap().is_identity());
        assert!(total_at(2).cycle_extend(&base).is_err());
    }

    #[test]
    fn membership_examples() {
        let base = Arc::new(BaseSpace::single());
        let partition = Partition::from_classes(2, vec![vec![vec![0, 1], vec![2, 3]]]).unwrap();
        assert!(full_group_membership(&FieldElement::identity(base.clone(), 2), &partition));
        let odo = FieldElement::constant(base.clone(), &finite_odometer(2).unwrap());
        let own = Graphing::from_elements(&[odo.clone()]).unwrap().generated_relation();
        assert!(full_group_membership(&odo, &own));
        let cross = FieldElement::constant(base, &LevelPerm::transposition(2, 1, 2).unwrap());
        assert!(!full_group_membership(&cross, &partition));
    }

    #[test]
    fn forest_bound_matches_chain() {
        let g = chain();
        let p = g.generated_relation();
        assert_eq!(forest_bound(&p).0, vec![Dyadic::new(1, 1)]);
        let tree = Graphing::new(1, 2, vec![spanning_chain(&p)]).unwrap();
        assert_eq!(tree.generated_relation(), p);
        assert_eq!(tree.ccost(), forest_bound(&p));
    }

    #[test]
    fn text_round_trip() {
        let base = BaseSpace::uniform(2);
        let g = Graphing::new(
            2,
            2,
            vec![
                PartialMap::new(2, vec![[(0, 2)].into(), BTreeMap::new()]).unwrap(),
                PartialMap::new(2, vec![[(2, 1)].into(), [(3, 0)].into()]).unwrap(),
            ],
        )
        .unwrap();
        let text = g.to_text(&base);
        let (b2, g2) = Graphing::parse(&text).unwrap();
        assert_eq!(b2, base);
        assert_eq!(g2, g);
        assert!(matches!(
            Graphing::parse("base atom=y1 weight=1/1\ndepth=2\npmap atom=y1 pairs=0:1,1:1\n"),
            Err(Error::Parse { line: 3, .. })
        ));
    }

    #[test]
    fn join_and_refine() {
        let a = Partition::from_classes(2, vec![vec![vec![0, 1], vec![2], vec![3]]]).unwrap();
        let b = Partition::from_classes(2, vec![vec![vec![1, 2], vec![0], vec![3]]]).unwrap();
        let j = a.join(&b).unwrap();
        assert_eq!(j.classes(0), &[vec![0, 1, 2], vec![3]]);
        assert!(a.refines(&j) && b.refines(&j) && !j.refines(&a));
    }
}
