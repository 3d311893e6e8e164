//! Breadth-first coverage of `𝔖_{2^d}` by short words in a generating set.

use std::collections::HashSet;
use std::fmt;

use itertools::Itertools;
use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::field::{iota, FieldElement};
use crate::perm::{ErrorBudget, LevelPerm};
use crate::rational::{Dyadic, Rational};

/// A generator index and direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GenLetter {
    pub generator: usize,
    pub inverse: bool,
}

/// A word over the probe's generators, written left to right, applied right to left.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GenWord(pub Vec<GenLetter>);

impl fmt::Display for GenWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for l in &self.0 {
            match (l.generator, l.inverse) {
                (0, false) => write!(f, "t")?,
                (0, true) => write!(f, "T")?,
                (1, false) => write!(f, "u")?,
                (1, true) => write!(f, "U")?,
                (g, false) => write!(f, "[g{g}]")?,
                (g, true) => write!(f, "[g{g}^-1]")?,
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct ProbeOptions {
    pub target_depth: u32,
    /// Atoms the target permutations act on; `None` means all of them.
    pub atoms: Option<Vec<usize>>,
    pub epsilon: Rational,
    pub max_len: usize,
    /// Bytes of stored permutations allowed before the search stops.
    pub memory_cap: usize,
}

#[derive(Clone, Debug)]
pub struct TargetCoverage {
    pub target: LevelPerm,
    pub best: Rational,
    pub word: Option<GenWord>,
    pub budget: Dyadic,
    pub covered: bool,
}

#[derive(Clone, Debug)]
pub struct CoverageReport {
    pub targets: Vec<TargetCoverage>,
    pub visited: usize,
    pub reached_len: usize,
    /// False when the memory cap stopped the search.
    pub complete: bool,
}

impl CoverageReport {
    pub fn covered(&self) -> usize {
        self.targets.iter().filter(|t| t.covered).count()
    }

    pub fn fraction(&self) -> Rational {
        Rational::new(self.covered().into(), self.targets.len().max(1).into())
    }
}

struct Node {
    element: FieldElement,
    word: GenWord,
}

fn key(f: &FieldElement) -> Vec<u32> {
    f.perms().iter().flat_map(|p| p.images().iter().copied()).collect()
}

/// Probes how well words of length `≤ max_len` approximate every `ι_A(σ)`, `σ ∈ 𝔖_{2^d}`.
pub fn density_probe(gens: &[FieldElement], options: &ProbeOptions) -> Result<CoverageReport> {
    let first = gens
        .first()
        .ok_or_else(|| crate::error::Error::InvalidArgument("no generators".into()))?;
    for g in gens {
        first.compose(g)?;
    }
    let depth = first.depth();
    if options.target_depth > depth || options.target_depth > 4 {
        return invalid(format!(
            "target depth {} must be at most min(4, working depth {depth})",
            options.target_depth
        ));
    }
    let atoms: Vec<usize> = options
        .atoms
        .clone()
        .unwrap_or_else(|| (0..first.atoms()).collect());
    let size = 1u32 << options.target_depth;
    let mut targets = Vec::new();
    let mut target_elems = Vec::new();
    for images in (0..size).permutations(size as usize) {
        let sigma = LevelPerm::new(options.target_depth, images)?;
        target_elems.push(iota(first.base(), &atoms, &sigma.embed(depth)?)?);
        targets.push(TargetCoverage {
            target: sigma,
            best: Rational::from_integer(2.into()),
            word: None,
            budget: Dyadic::zero(),
            covered: false,
        });
    }

    let mut letters: Vec<(GenLetter, FieldElement)> = Vec::new();
    for (i, g) in gens.iter().enumerate() {
        letters.push((GenLetter { generator: i, inverse: false }, g.clone()));
        if !g.is_involution() {
            letters.push((GenLetter { generator: i, inverse: true }, g.inverse()));
        }
    }

    let identity = FieldElement::identity(first.base().clone(), depth);
    let bytes_per = (first.atoms() << depth) * std::mem::size_of::<u32>();
    let mut seen: HashSet<Vec<u32>> = HashSet::new();
    seen.insert(key(&identity));
    let mut frontier = vec![Node {
        element: identity,
        word: GenWord::default(),
    }];
    let mut visited = 1usize;
    let mut reached_len = 0usize;
    let mut complete = true;
    score(&frontier, &target_elems, &mut targets, &options.epsilon)?;

    while reached_len < options.max_len && !targets.iter().all(|t| t.covered) {
        let projected = seen.len() + 2 * frontier.len() * letters.len();
        if projected.saturating_mul(bytes_per) > options.memory_cap {
            complete = false;
            break;
        }
        let candidates: Vec<(usize, usize, FieldElement)> = frontier
            .par_iter()
            .enumerate()
            .flat_map_iter(|(ni, node)| {
                letters.iter().enumerate().map(move |(li, (_, g))| (ni, li, g.compose_unchecked(&node.element)))
            })
            .collect();
        let mut next = Vec::new();
        for (ni, li, element) in candidates {
            if seen.insert(key(&element)) {
                let mut word = vec![letters[li].0];
                word.extend(frontier[ni].word.0.iter().copied());
                next.push(Node {
                    element,
                    word: GenWord(word),
                });
            }
        }
        reached_len += 1;
        visited += next.len();
        score(&next, &target_elems, &mut targets, &options.epsilon)?;
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    Ok(CoverageReport {
        targets,
        visited,
        reached_len,
        complete,
    })
}

/// Updates each target's best approximation from one BFS layer, first hit wins ties.
fn score(
    layer: &[Node],
    target_elems: &[FieldElement],
    targets: &mut [TargetCoverage],
    epsilon: &Rational,
) -> Result<()> {
    let results: Vec<Option<(usize, Rational)>> = target_elems
        .par_iter()
        .zip(targets.par_iter())
        .map(|(te, tc)| {
            if tc.covered {
                return Ok(None);
            }
            let mut best: Option<(usize, Rational)> = None;
            for (i, node) in layer.iter().enumerate() {
                let d = node.element.d_u(te)?;
                if best.as_ref().map_or(true, |(_, b)| &d < b) {
                    best = Some((i, d));
                }
            }
            Ok(best)
        })
        .collect::<Result<_>>()?;
    for (tc, r) in targets.iter_mut().zip(results) {
        if let Some((i, d)) = r {
            if d < tc.best {
                let budget = layer[i].element.budget().clone();
                tc.covered = d <= epsilon + budget.0.to_rational();
                tc.best = d;
                tc.word = Some(layer[i].word.clone());
                tc.budget = budget.0;
            }
        }
    }
    Ok(())
}

/// Budget of a word given per-generator budgets.
pub fn word_budget(word: &GenWord, gens: &[FieldElement]) -> ErrorBudget {
    word.0
        .iter()
        .fold(ErrorBudget::zero(), |b, l| b.compose(gens[l.generator].budget()))
}
