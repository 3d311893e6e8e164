//! Elements of the full group of `Δ_Y × R_0` at finite depth.
//!
//! On each atom of `Y` the element is a dyadic permutation; every metric is
//! computed atom by atom and then averaged (`d_1`) or maximized (`d_C`).

use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::One;

use crate::error::{invalid, Error, Result};
use crate::graphing::Partition;
use crate::measure::{BaseSpace, CondMeasure, ProductSet};
use crate::perm::{ErrorBudget, LevelPerm, Sign};
use crate::rational::{Dyadic, Rational};

#[derive(Clone)]
pub struct FieldElement {
    base: Arc<BaseSpace>,
    perms: Vec<LevelPerm>,
    budget: ErrorBudget,
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldElement")
            .field("perms", &self.perms)
            .field("budget", &self.budget.0.to_string())
            .finish()
    }
}

/// Equality of the underlying maps; budgets are ignored.
impl PartialEq for FieldElement {
    fn eq(&self, other: &Self) -> bool {
        same_base(&self.base, &other.base) && self.perms == other.perms
    }
}

impl Eq for FieldElement {}

fn same_base(a: &Arc<BaseSpace>, b: &Arc<BaseSpace>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl FieldElement {
    pub fn new(base: Arc<BaseSpace>, perms: Vec<LevelPerm>) -> Result<Self> {
        if perms.len() != base.len() {
            return invalid(format!(
                "{} atoms but {} permutations",
                base.len(),
                perms.len()
            ));
        }
        let depth = perms[0].depth();
        if perms.iter().any(|p| p.depth() != depth) {
            return invalid("per-atom permutations must share a depth");
        }
        Ok(FieldElement {
            base,
            perms,
            budget: ErrorBudget::zero(),
        })
    }

    pub fn identity(base: Arc<BaseSpace>, depth: u32) -> Self {
        let perms = vec![LevelPerm::identity(depth); base.len()];
        FieldElement {
            base,
            perms,
            budget: ErrorBudget::zero(),
        }
    }

    /// `id_Y × p`.
    pub fn constant(base: Arc<BaseSpace>, p: &LevelPerm) -> Self {
        let perms = vec![p.clone(); base.len()];
        FieldElement {
            base,
            perms,
            budget: ErrorBudget::zero(),
        }
    }

    pub fn with_budget(mut self, budget: ErrorBudget) -> Self {
        self.budget = budget;
        self
    }

    pub fn base(&self) -> &Arc<BaseSpace> {
        &self.base
    }

    pub fn depth(&self) -> u32 {
        self.perms[0].depth()
    }

    pub fn atoms(&self) -> usize {
        self.perms.len()
    }

    pub fn perm(&self, atom: usize) -> &LevelPerm {
        &self.perms[atom]
    }

    pub fn perms(&self) -> &[LevelPerm] {
        &self.perms
    }

    pub fn budget(&self) -> &ErrorBudget {
        &self.budget
    }

    pub fn apply(&self, atom: usize, leaf: u32) -> u32 {
        self.perms[atom].apply(leaf)
    }

    fn check_compatible(&self, other: &FieldElement) -> Result<()> {
        if !same_base(&self.base, &other.base) {
            return invalid("elements live over different base spaces");
        }
        if self.depth() != other.depth() {
            return invalid(format!(
                "depth mismatch {} vs {} (embed first)",
                self.depth(),
                other.depth()
            ));
        }
        Ok(())
    }

    /// `self ∘ other`; budgets add.
    pub fn compose(&self, other: &FieldElement) -> Result<FieldElement> {
        self.check_compatible(other)?;
        Ok(self.compose_unchecked(other))
    }

    pub(crate) fn compose_unchecked(&self, other: &FieldElement) -> FieldElement {
        FieldElement {
            base: self.base.clone(),
            perms: self
                .perms
                .iter()
                .zip(&other.perms)
                .map(|(a, b)| a.compose_unchecked(b))
                .collect(),
            budget: self.budget.compose(&other.budget),
        }
    }

    pub fn inverse(&self) -> FieldElement {
        FieldElement {
            base: self.base.clone(),
            perms: self.perms.iter().map(LevelPerm::inverse).collect(),
            budget: self.budget.clone(),
        }
    }

    pub fn pow(&self, e: i64) -> FieldElement {
        self.pow_big(&e.into())
    }

    pub fn pow_big(&self, e: &num_bigint::BigInt) -> FieldElement {
        let scale = e.magnitude().clone();
        let budget = if self.budget.0.is_zero() {
            ErrorBudget::zero()
        } else {
            ErrorBudget(&self.budget.0 * &Dyadic::new(num_bigint::BigInt::from(scale), 0))
        };
        FieldElement {
            base: self.base.clone(),
            perms: self.perms.iter().map(|p| p.pow_big(e)).collect(),
            budget,
        }
    }

    pub fn embed(&self, depth: u32) -> Result<FieldElement> {
        Ok(FieldElement {
            base: self.base.clone(),
            perms: self
                .perms
                .iter()
                .map(|p| p.embed(depth))
                .collect::<Result<_>>()?,
            budget: self.budget.clone(),
        })
    }

    pub fn is_identity(&self) -> bool {
        self.perms.iter().all(LevelPerm::is_identity)
    }

    pub fn is_involution(&self) -> bool {
        self.perms.iter().all(|p| p.compose_unchecked(p).is_identity())
    }

    /// Every orbit on every atom has odd size.
    pub fn is_odd_cycle(&self) -> bool {
        self.perms.iter().all(LevelPerm::is_odd_cycle)
    }

    pub fn order(&self) -> BigUint {
        self.perms
            .iter()
            .fold(BigUint::one(), |acc, p| acc.lcm(&p.order()))
    }

    /// Largest orbit over all atoms.
    pub fn max_orbit(&self) -> usize {
        self.perms
            .iter()
            .flat_map(|p| p.cycle_type().into_iter().next())
            .max()
            .unwrap_or(1)
    }

    pub fn support(&self) -> ProductSet {
        ProductSet::new(self.perms.iter().map(LevelPerm::support).collect())
            .expect("per-atom supports share a depth")
    }

    /// `μ_R(supp f)` on each atom.
    pub fn cond_support(&self) -> CondMeasure {
        CondMeasure(self.perms.iter().map(|p| p.support().measure()).collect())
    }

    /// Per-atom `d_u`.
    pub fn atom_distances(&self, other: &FieldElement) -> Result<CondMeasure> {
        self.check_compatible(other)?;
        Ok(CondMeasure(
            self.perms
                .iter()
                .zip(&other.perms)
                .map(|(a, b)| a.d_u(b))
                .collect::<Result<_>>()?,
        ))
    }

    /// `d_1(f,g) = Σ_y ν(y) d_u(f(y), g(y))`, which is `d_u` on `Y × 2^ℕ`.
    pub fn d_1(&self, other: &FieldElement) -> Result<Rational> {
        Ok(self.atom_distances(other)?.integrate(&self.base))
    }

    /// Alias of [`FieldElement::d_1`]: the uniform metric of the product space.
    pub fn d_u(&self, other: &FieldElement) -> Result<Rational> {
        self.d_1(other)
    }

    /// `d_C(f,g) = max_y d_u(f(y), g(y))`.
    pub fn d_c(&self, other: &FieldElement) -> Result<Dyadic> {
        Ok(self.atom_distances(other)?.sup())
    }

    pub fn to_lines(&self) -> Vec<String> {
        let mut lines = self.base.to_lines();
        if !self.budget.0.is_zero() {
            lines.push(format!("budget value={}", self.budget.0));
        }
        for (atom, p) in self.perms.iter().enumerate() {
            lines.push(format!("atom={} {p}", self.base.label(atom)));
        }
        lines
    }

    /// Parses the element file format; the base space is read from its `base` lines.
    pub fn parse(text: &str) -> Result<FieldElement> {
        let mut atoms = Vec::new();
        let mut budget = ErrorBudget::zero();
        let mut perms: Vec<(String, LevelPerm, usize)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let at = |e: Error| parse_error(idx + 1, raw, e);
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if line.starts_with("base ") {
                atoms.push(BaseSpace::parse_line(line).map_err(at)?);
            } else if let Some(rest) = line.strip_prefix("budget ") {
                let value = rest
                    .trim()
                    .strip_prefix("value=")
                    .ok_or_else(|| at(Error::InvalidArgument("expected value=".into())))?;
                budget = ErrorBudget(value.parse().map_err(at)?);
            } else if let Some(rest) = line.strip_prefix("atom=") {
                let (label, perm) = rest
                    .split_once(char::is_whitespace)
                    .ok_or_else(|| at(Error::InvalidArgument("expected `atom=<label> perm …`".into())))?;
                perms.push((label.to_string(), perm.parse().map_err(at)?, idx + 1));
            } else {
                return Err(at(Error::InvalidArgument(format!(
                    "unrecognized line `{line}`"
                ))));
            }
        }
        let base = Arc::new(BaseSpace::new(atoms)?);
        let mut slots: Vec<Option<LevelPerm>> = vec![None; base.len()];
        for (label, perm, line) in perms {
            let atom = base
                .index_of(&label)
                .map_err(|e| Error::Parse { line, column: 1, message: e.to_string() })?;
            if slots[atom].replace(perm).is_some() {
                return Err(Error::Parse {
                    line,
                    column: 1,
                    message: format!("atom `{label}` given twice"),
                });
            }
        }
        let perms = slots
            .into_iter()
            .enumerate()
            .map(|(a, p)| {
                p.ok_or_else(|| {
                    Error::InvalidArgument(format!("no permutation for atom `{}`", base.label(a)))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FieldElement::new(base, perms)?.with_budget(budget))
    }
}

pub(crate) fn parse_error(line: usize, raw: &str, e: Error) -> Error {
    match e {
        Error::Parse { .. } => e,
        other => Error::Parse {
            line,
            column: raw.len() - raw.trim_start().len() + 1,
            message: other.to_string(),
        },
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for line in self.to_lines() {
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

/// `ι_A(p)`: `p` on the atoms of `A`, identity on the others.
pub fn iota(base: &Arc<BaseSpace>, atoms: &[usize], p: &LevelPerm) -> Result<FieldElement> {
    if atoms.is_empty() {
        return invalid("ι_A needs a non-null set of atoms");
    }
    let mut perms = vec![LevelPerm::identity(p.depth()); base.len()];
    for &a in atoms {
        if a >= base.len() {
            return invalid(format!("atom index {a} out of range"));
        }
        perms[a] = p.clone();
    }
    FieldElement::new(base.clone(), perms)
}

/// The path `T_t` from the identity to the involution `f`.
///
/// On each atom `T_t` swaps the first `t·|D|` pairs, where `D` is the sorted
/// set of lower leaves of the 2-cycles of `f`.
pub fn involution_path(f: &FieldElement, t: &Dyadic) -> Result<FieldElement> {
    if !f.is_involution() {
        return invalid("involution_path needs an involution");
    }
    if t.is_negative() || t > &Dyadic::one() {
        return invalid(format!("t = {t} lies outside [0,1]"));
    }
    let depth = f.depth();
    let mut perms = Vec::with_capacity(f.atoms());
    for p in f.perms() {
        let domain: Vec<u32> = p
            .images()
            .iter()
            .enumerate()
            .filter(|(x, &y)| (*x as u32) < y)
            .map(|(x, _)| x as u32)
            .collect();
        let scaled = t * &Dyadic::new(domain.len() as u64, 0);
        let count = scaled.scaled_count(0).ok_or_else(|| {
            let twos = domain.len().trailing_zeros();
            Error::Resolution {
                reason: format!("t = {t} does not split {} pairs evenly", domain.len()),
                required_depth: depth + t.exponent().saturating_sub(twos),
            }
        })?;
        let count: usize = count.try_into().expect("bounded by the pair count");
        let mut images: Vec<u32> = (0..1u32 << depth).collect();
        for &x in &domain[..count] {
            let y = p.apply(x);
            images[x as usize] = y;
            images[y as usize] = x;
        }
        perms.push(LevelPerm::from_images_unchecked(depth, images));
    }
    Ok(FieldElement::new(f.base().clone(), perms)?.with_budget(f.budget().clone()))
}

/// Parity of `f` restricted to one class of a class-preserving partition.
pub fn signature_morphism(
    f: &FieldElement,
    partition: &Partition,
    atom: usize,
    class: usize,
) -> Result<Sign> {
    if partition.depth() != f.depth() || partition.atoms() != f.atoms() {
        return invalid("partition and element differ in depth or atom count");
    }
    for a in 0..f.atoms() {
        for leaf in 0..1u32 << f.depth() {
            if partition.class_of(a, leaf) != partition.class_of(a, f.apply(a, leaf)) {
                return Err(Error::NotInFullGroup(format!(
                    "leaf {leaf} on atom {a} leaves its class"
                )));
            }
        }
    }
    let members = partition
        .classes(atom)
        .get(class)
        .ok_or_else(|| Error::InvalidArgument(format!("no class {class} on atom {atom}")))?;
    if members.len() < 2 {
        return invalid("signature needs a class with at least two points");
    }
    let p = f.perm(atom);
    let mut seen = std::collections::BTreeSet::new();
    let mut transpositions = 0usize;
    for &start in members {
        if !seen.insert(start) {
            continue;
        }
        let mut x = p.apply(start);
        while x != start {
            seen.insert(x);
            transpositions += 1;
            x = p.apply(x);
        }
    }
    Ok(if transpositions % 2 == 0 { Sign::Plus } else { Sign::Minus })
}
