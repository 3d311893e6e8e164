//! Dyadic permutations at a working depth.
//!
//! A [`LevelPerm`] of depth `m` permutes the `2^m` depth-`m` cylinders and
//! acts on `2^ℕ` by rewriting the first `m` coordinates only.

use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::One;

use crate::error::{invalid, Error, Result};
use crate::measure::{check_depth, DyadicSet};
use crate::rational::Dyadic;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LevelPerm {
    depth: u32,
    images: Vec<u32>,
}

impl fmt::Debug for LevelPerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.images.len() <= 64 {
            write!(f, "LevelPerm(depth={}, {:?})", self.depth, self.images)
        } else {
            write!(f, "LevelPerm(depth={}, {} moved)", self.depth, self.moved_count())
        }
    }
}

/// Sign of a permutation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

impl Mul for Sign {
    type Output = Sign;
    fn mul(self, rhs: Sign) -> Sign {
        if self == rhs {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

impl LevelPerm {
    pub fn identity(depth: u32) -> Self {
        LevelPerm {
            depth,
            images: (0..1u32 << depth).collect(),
        }
    }

    /// Checks that `images` is a bijection of `0..2^depth`.
    pub fn new(depth: u32, images: Vec<u32>) -> Result<Self> {
        check_depth(depth)?;
        let n = 1usize << depth;
        if images.len() != n {
            return invalid(format!(
                "depth {depth} needs {n} images, got {}",
                images.len()
            ));
        }
        let mut seen = vec![false; n];
        for &x in &images {
            let slot = seen
                .get_mut(x as usize)
                .ok_or_else(|| Error::InvalidArgument(format!("image {x} out of range")))?;
            if *slot {
                return invalid(format!("image {x} repeated; not a bijection"));
            }
            *slot = true;
        }
        Ok(LevelPerm { depth, images })
    }

    /// Infers the depth from the image count.
    pub fn from_images(images: Vec<u32>) -> Result<Self> {
        let n = images.len();
        if !n.is_power_of_two() {
            return invalid(format!("{n} images is not a power of two"));
        }
        LevelPerm::new(n.trailing_zeros(), images)
    }

    pub(crate) fn from_images_unchecked(depth: u32, images: Vec<u32>) -> Self {
        debug_assert_eq!(images.len(), 1usize << depth);
        LevelPerm { depth, images }
    }

    /// Swaps two leaves.
    pub fn transposition(depth: u32, a: u32, b: u32) -> Result<Self> {
        let mut p = LevelPerm::identity(depth);
        let n = p.images.len() as u32;
        if a >= n || b >= n {
            return invalid("transposition leaf out of range");
        }
        p.images.swap(a as usize, b as usize);
        Ok(p)
    }

    /// The permutation with the given cycles, fixing everything else.
    pub fn from_cycles(depth: u32, cycles: &[Vec<u32>]) -> Result<Self> {
        let mut images: Vec<u32> = (0..1u32 << depth).collect();
        let mut touched = vec![false; images.len()];
        for cycle in cycles {
            for (i, &x) in cycle.iter().enumerate() {
                let slot = touched
                    .get_mut(x as usize)
                    .ok_or_else(|| Error::InvalidArgument(format!("leaf {x} out of range")))?;
                if *slot {
                    return invalid(format!("leaf {x} appears in two cycles"));
                }
                *slot = true;
                images[x as usize] = cycle[(i + 1) % cycle.len()];
            }
        }
        Ok(LevelPerm { depth, images })
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn images(&self) -> &[u32] {
        &self.images
    }

    pub fn apply(&self, leaf: u32) -> u32 {
        self.images[leaf as usize]
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &x)| i as u32 == x)
    }

    fn same_depth(&self, other: &LevelPerm) -> Result<()> {
        if self.depth != other.depth {
            return invalid(format!(
                "depth mismatch {} vs {} (embed first)",
                self.depth, other.depth
            ));
        }
        Ok(())
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &LevelPerm) -> Result<LevelPerm> {
        self.same_depth(other)?;
        Ok(self.compose_unchecked(other))
    }

    pub(crate) fn compose_unchecked(&self, other: &LevelPerm) -> LevelPerm {
        let images = other.images.iter().map(|&x| self.images[x as usize]).collect();
        LevelPerm {
            depth: self.depth,
            images,
        }
    }

    pub fn inverse(&self) -> LevelPerm {
        let mut images = vec![0u32; self.images.len()];
        for (i, &x) in self.images.iter().enumerate() {
            images[x as usize] = i as u32;
        }
        LevelPerm {
            depth: self.depth,
            images,
        }
    }

    /// `self^e` for any integer `e`, computed cycle by cycle.
    pub fn pow(&self, e: i64) -> LevelPerm {
        self.pow_big(&num_bigint::BigInt::from(e))
    }

    pub fn pow_big(&self, e: &num_bigint::BigInt) -> LevelPerm {
        let mut images = vec![0u32; self.images.len()];
        for cycle in self.cycles() {
            let len = num_bigint::BigInt::from(cycle.len());
            let shift: usize = e.mod_floor(&len).try_into().expect("shift below cycle length");
            for (i, &x) in cycle.iter().enumerate() {
                images[x as usize] = cycle[(i + shift) % cycle.len()];
            }
        }
        LevelPerm {
            depth: self.depth,
            images,
        }
    }

    /// All orbits, each starting at its least leaf, ordered by that leaf.
    pub fn cycles(&self) -> Vec<Vec<u32>> {
        let mut seen = vec![false; self.images.len()];
        let mut out = Vec::new();
        for start in 0..self.images.len() {
            if seen[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut x = start as u32;
            while !seen[x as usize] {
                seen[x as usize] = true;
                cycle.push(x);
                x = self.images[x as usize];
            }
            out.push(cycle);
        }
        out
    }

    /// Orbit sizes including fixed points, sorted descending.
    pub fn cycle_type(&self) -> Vec<usize> {
        let mut sizes: Vec<usize> = self.cycles().iter().map(Vec::len).collect();
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        sizes
    }

    pub fn is_odd_cycle(&self) -> bool {
        self.cycles().iter().all(|c| c.len() % 2 == 1)
    }

    pub fn signature(&self) -> Sign {
        let cycles = self.cycles().len();
        if (self.images.len() - cycles) % 2 == 0 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    /// Least common multiple of the orbit sizes.
    pub fn order(&self) -> BigUint {
        self.cycles()
            .iter()
            .fold(BigUint::one(), |acc, c| acc.lcm(&BigUint::from(c.len())))
    }

    pub fn moved_count(&self) -> usize {
        self.images
            .iter()
            .enumerate()
            .filter(|(i, &x)| *i as u32 != x)
            .count()
    }

    pub fn support(&self) -> DyadicSet {
        DyadicSet::from_leaves(
            self.depth,
            self.images
                .iter()
                .enumerate()
                .filter(|(i, &x)| *i as u32 != x)
                .map(|(i, _)| i as u32),
        )
        .expect("leaves are in range")
    }

    /// `α`: act on the first `depth` coordinates, fix the rest.
    pub fn embed(&self, depth: u32) -> Result<LevelPerm> {
        if depth < self.depth {
            return invalid(format!("cannot embed depth {} into {depth}", self.depth));
        }
        check_depth(depth)?;
        let step = self.images.len() as u32;
        let copies = 1u32 << (depth - self.depth);
        let mut images = Vec::with_capacity((step * copies) as usize);
        for k in 0..copies {
            images.extend(self.images.iter().map(|&x| x + k * step));
        }
        Ok(LevelPerm { depth, images })
    }

    /// Uniform distance: fraction of leaves where the images differ.
    pub fn d_u(&self, other: &LevelPerm) -> Result<Dyadic> {
        self.same_depth(other)?;
        let differ = self
            .images
            .iter()
            .zip(&other.images)
            .filter(|(a, b)| a != b)
            .count();
        Ok(Dyadic::leaves(differ, self.depth))
    }

    /// The "twice as slow" square root at depth `depth + 1`: on the support
    /// `s⌢0 ↦ s⌢1` and `s⌢1 ↦ σ(s)⌢0`, identity elsewhere.
    pub fn sqrt(&self) -> LevelPerm {
        let half = self.images.len() as u32;
        let mut images: Vec<u32> = (0..2 * half).collect();
        for (s, &img) in self.images.iter().enumerate() {
            let s = s as u32;
            if img != s {
                images[s as usize] = s + half;
                images[(s + half) as usize] = img;
            }
        }
        LevelPerm {
            depth: self.depth + 1,
            images,
        }
    }

    /// `q`-fold iterated square root.
    pub fn iter_sqrt(&self, q: u32) -> Result<LevelPerm> {
        check_depth(self.depth + q)?;
        Ok((0..q).fold(self.clone(), |p, _| p.sqrt()))
    }
}

impl Mul for &LevelPerm {
    type Output = LevelPerm;
    /// Panics on depth mismatch; use [`LevelPerm::compose`] for a checked product.
    fn mul(self, rhs: &LevelPerm) -> LevelPerm {
        self.compose(rhs).expect("operands share a depth")
    }
}

impl fmt::Display for LevelPerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "perm depth={} images={}",
            self.depth,
            crate::text::join_u32(self.images.iter().copied())
        )
    }
}

impl FromStr for LevelPerm {
    type Err = Error;
    fn from_str(line: &str) -> Result<Self> {
        let fields = crate::text::fields(line.trim(), "perm")?;
        let depth: u32 = crate::text::get_parsed(&fields, "depth")?;
        let images = crate::text::parse_u32_list(crate::text::get(&fields, "images")?)?;
        LevelPerm::new(depth, images)
    }
}

/// Upper bound on `d_u` between a computed element and the ideal element it stands for.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ErrorBudget(pub Dyadic);

impl ErrorBudget {
    pub fn zero() -> Self {
        ErrorBudget(Dyadic::zero())
    }

    pub fn bound(&self) -> &Dyadic {
        &self.0
    }

    /// Budget of a product: bi-invariance makes the errors add.
    pub fn compose(&self, other: &ErrorBudget) -> ErrorBudget {
        ErrorBudget(&self.0 + &other.0)
    }

    pub fn times(&self, k: u64) -> ErrorBudget {
        ErrorBudget(&self.0 * k)
    }
}

/// `σ_m`: add `(1,0,0,…)` with right carry, i.e. `i ↦ i + 1 mod 2^m`.
pub fn finite_odometer(m: u32) -> Result<LevelPerm> {
    if m == 0 {
        return invalid("the finite odometer needs depth at least 1");
    }
    check_depth(m)?;
    let n = 1u32 << m;
    Ok(LevelPerm {
        depth: m,
        images: (0..n).map(|i| (i + 1) & (n - 1)).collect(),
    })
}

/// `T_m` together with its exact distance `λ(N_{1^m}) = 2^{-m}` to the ideal odometer.
pub fn odometer_approx(m: u32) -> Result<(LevelPerm, ErrorBudget)> {
    Ok((finite_odometer(m)?, ErrorBudget(Dyadic::pow2_neg(m))))
}

/// Leaf of `0^{n-1}1`.
pub fn tau_low_leaf(n: u32) -> u32 {
    1 << (n - 1)
}

/// Leaf of `1^{n-1}0`.
pub fn tau_high_leaf(n: u32) -> u32 {
    (1 << (n - 1)) - 1
}

/// `U_n` at depth `m`: exchanges the cylinders `0^{n-1}1` and `1^{n-1}0`.
pub fn tau(n: u32, m: u32) -> Result<LevelPerm> {
    if n < 2 {
        return invalid(format!("tau is defined for n ≥ 2, got {n}"));
    }
    if m < n {
        return invalid(format!("tau({n}) needs depth at least {n}, got {m}"));
    }
    LevelPerm::transposition(n, tau_low_leaf(n), tau_high_leaf(n))?.embed(m)
}
