//! Words in `T` and `U_n` for every dyadic permutation of depth `n`.
//!
//! With `a_i = σ_n^{i-1}(0^n)` (leaf `i-1`), the adjacent transposition
//! `V_p = (a_p a_{p+1})` equals `T^j U_n T^{-j}` for `j = p - 2^{n-1}`. A
//! target is sorted by odd–even transposition sort, sweeping positions in
//! alternating directions so that consecutive conjugators stay close.

use std::collections::HashMap;

use itertools::Itertools;

use crate::error::{invalid, Error, Result};
use crate::freeness::{Letter, ReducedWord};
use crate::perm::{finite_odometer, tau, LevelPerm};
use crate::rational::Dyadic;

/// `T^j`, written.
fn t_power(j: i64) -> impl Iterator<Item = Letter> {
    let l = if j >= 0 { Letter::T } else { Letter::TInv };
    std::iter::repeat(l).take(j.unsigned_abs() as usize)
}

fn half(n: u32) -> i64 {
    1i64 << (n - 1)
}

/// The word `t^j u t^{-j}` for `V_p`, `1 ≤ p < 2^n`.
pub fn transposition_word(n: u32, p: u32) -> Result<ReducedWord> {
    if n < 2 || p == 0 || p >= 1 << n {
        return invalid(format!("no transposition V_{p} at n = {n}"));
    }
    let j = p as i64 - half(n);
    Ok(ReducedWord::reduce(
        t_power(j).chain([Letter::U]).chain(t_power(-j)),
    ))
}

/// Swap positions `p` (exchanging `p-1` and `p`) in the order the sort performs them.
fn sort_swaps(images: &[u32]) -> Vec<u32> {
    let n = images.len();
    let mut arr = images.to_vec();
    let mut swaps = Vec::new();
    for round in 0..n {
        if arr.windows(2).all(|w| w[0] < w[1]) {
            break;
        }
        for i in sweep(n, round) {
            if arr[i] > arr[i + 1] {
                arr.swap(i, i + 1);
                swaps.push(i as u32 + 1);
            }
        }
    }
    swaps
}

/// Left indices compared in `round`: alternate parity, alternate direction.
fn sweep(n: usize, round: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (round % 2..n.saturating_sub(1)).step_by(2).collect();
    if round % 2 == 1 {
        idx.reverse();
    }
    idx
}

/// A reduced word `w` with `w(T_n, U_n) = σ` for `σ` of depth `n ≥ 2`.
pub fn synthesize(sigma: &LevelPerm) -> Result<ReducedWord> {
    let n = sigma.depth();
    if n < 2 {
        return invalid("word synthesis needs depth at least 2");
    }
    // σ ∘ s_1 ∘ … ∘ s_k = id, so σ = s_k ∘ … ∘ s_1, written s_k first
    let swaps = sort_swaps(sigma.images());
    let mut letters = Vec::with_capacity(swaps.len() * 3);
    for &p in swaps.iter().rev() {
        let j = p as i64 - half(n);
        letters.extend(t_power(j));
        letters.push(Letter::U);
        letters.extend(t_power(-j));
    }
    Ok(ReducedWord::reduce(letters))
}

/// Upper bound on the synthesized word length over all of `𝔖_{2^n}`:
/// inversions, plus the total variation of the conjugator along a full
/// sort schedule, plus the two end conjugators.
pub fn kappa_bound(n: u32) -> u64 {
    let s = 1u64 << n;
    // even rounds climb by 2 over s/2 slots, odd rounds descend over s/2 - 1, joins cost 1
    let tv = s * s - 2 * s - 1;
    s * (s - 1) / 2 + tv + s
}

/// `κ(n)`: exact maximum for `n ≤ 3`, the certified bound beyond.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Kappa {
    pub n: u32,
    pub value: u64,
    pub exact: bool,
}

pub const EXACT_KAPPA_LIMIT: u32 = 3;

pub fn kappa(n: u32) -> Result<Kappa> {
    if n < 2 {
        return invalid(format!("κ(n) is defined for n ≥ 2, got {n}"));
    }
    if n <= EXACT_KAPPA_LIMIT {
        let table = WordTable::build(n)?;
        return Ok(Kappa {
            n,
            value: table.kappa() as u64,
            exact: true,
        });
    }
    Ok(Kappa {
        n,
        value: kappa_bound(n),
        exact: false,
    })
}

/// One synthesized word per element of `𝔖_{2^n}`.
#[derive(Clone, Debug)]
pub struct WordTable {
    n: u32,
    entries: Vec<(LevelPerm, ReducedWord)>,
    index: HashMap<Vec<u32>, usize>,
    kappa: usize,
}

impl WordTable {
    pub fn build(n: u32) -> Result<Self> {
        if !(2..=EXACT_KAPPA_LIMIT).contains(&n) {
            return invalid(format!(
                "word tables are enumerated for 2 ≤ n ≤ {EXACT_KAPPA_LIMIT}, got {n}"
            ));
        }
        let size = 1u32 << n;
        let mut entries = Vec::new();
        let mut index = HashMap::new();
        for images in (0..size).permutations(size as usize) {
            let sigma = LevelPerm::new(n, images.clone())?;
            let word = synthesize(&sigma)?;
            index.insert(images, entries.len());
            entries.push((sigma, word));
        }
        let kappa = entries.iter().map(|(_, w)| w.len()).max().unwrap_or(0);
        Ok(WordTable {
            n,
            entries,
            index,
            kappa,
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn kappa(&self) -> usize {
        self.kappa
    }

    pub fn entries(&self) -> &[(LevelPerm, ReducedWord)] {
        &self.entries
    }

    pub fn get(&self, sigma: &LevelPerm) -> Option<&ReducedWord> {
        self.index.get(sigma.images()).map(|&i| &self.entries[i].1)
    }
}

/// Exact `d_u(T_m^j U_n T_m^{-j}, V_{2^{n-1}+j})` at depth `m`.
pub fn conjugation_defect(n: u32, m: u32, j: i64) -> Result<Dyadic> {
    if j.abs() >= half(n) {
        return invalid(format!("|j| must be below 2^(n-1), got {j}"));
    }
    let t = finite_odometer(m)?;
    let u = tau(n, m)?;
    let lhs = t.pow(j).compose(&u)?.compose(&t.pow(-j))?;
    let p = (half(n) + j) as u32;
    let v = LevelPerm::transposition(n, p - 1, p)?.embed(m)?;
    lhs.d_u(&v)
}

/// Per entry: exact `d_u` between the evaluated word at depth `m` and its key, and the word length.
pub fn table_defects(table: &WordTable, m: u32) -> Result<Vec<(Dyadic, usize)>> {
    if m < table.n {
        return Err(Error::Resolution {
            reason: format!("depth {m} below n = {}", table.n),
            required_depth: table.n,
        });
    }
    let t = crate::field::FieldElement::constant(
        std::sync::Arc::new(crate::measure::BaseSpace::single()),
        &finite_odometer(m)?,
    );
    let u = crate::field::FieldElement::constant(t.base().clone(), &tau(table.n, m)?);
    table
        .entries
        .iter()
        .map(|(sigma, word)| {
            let value = crate::freeness::evaluate_word(word, &t, &u)?;
            let d = value.perm(0).d_u(&sigma.embed(m)?)?;
            Ok((d, word.len()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    fn walked_bound(n: u32) -> u64 {
        let size = 1usize << n;
        let mut tv = 0u64;
        let mut prev: Option<i64> = None;
        for round in 0..size {
            for i in sweep(size, round) {
                let j = i as i64 + 1 - half(n);
                if let Some(q) = prev {
                    tv += (j - q).unsigned_abs();
                }
                prev = Some(j);
            }
        }
        let s = size as u64;
        s * (s - 1) / 2 + tv + s
    }

    #[test]
    fn closed_bound_matches_walk() {
        for n in 2..=7 {
            assert_eq!(kappa_bound(n), walked_bound(n), "n = {n}");
        }
    }

    use super::*;
    use crate::freeness::evaluate_letters;
    use crate::field::FieldElement;
    use crate::measure::BaseSpace;
    use std::sync::Arc;

    fn eval_at(word: &ReducedWord, n: u32, m: u32) -> LevelPerm {
        let base = Arc::new(BaseSpace::single());
        let t = FieldElement::constant(base.clone(), &finite_odometer(m).unwrap());
        let u = FieldElement::constant(base, &tau(n, m).unwrap());
        evaluate_letters(word.letters(), &t, &u).unwrap().perm(0).clone()
    }

    #[test]
    fn middle_transposition_is_u() {
        for n in 2..=5 {
            assert_eq!(transposition_word(n, 1 << (n - 1)).unwrap().to_string(), "u");
        }
    }

    #[test]
    fn conjugation_is_exact_at_depth() {
        for n in 2..=4 {
            for m in n..=10 {
                for j in -(half(n) - 1)..half(n) {
                    assert!(conjugation_defect(n, m, j).unwrap().is_zero());
                }
            }
        }
    }

    #[test]
    fn tables_reproduce_every_element() {
        let table = WordTable::build(2).unwrap();
        assert_eq!(table.entries().len(), 24);
        assert!(table.kappa() <= 18);
        for (sigma, word) in table.entries() {
            assert_eq!(&eval_at(word, 2, 2), sigma);
        }
        let k = kappa(2).unwrap();
        assert!(k.exact && k.value as usize == table.kappa());
        assert!(k.value <= kappa_bound(2));
        assert!(kappa(3).unwrap().value <= kappa_bound(3));
    }

    #[test]
    fn synthesis_at_larger_n() {
        let sigma = LevelPerm::from_cycles(5, &[vec![0, 31, 7, 12], vec![3, 4]]).unwrap();
        let w = synthesize(&sigma).unwrap();
        assert!(w.len() as u64 <= kappa_bound(5));
        assert_eq!(eval_at(&w, 5, 7), sigma.embed(7).unwrap());
        assert!(!kappa(6).unwrap().exact);
    }
}
