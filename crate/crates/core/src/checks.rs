//! Named verification checks and the registry that runs them from a scenario.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::field::FieldElement;
use crate::freeness::{evaluate_word, free_perturbation, relation_search, FreeOptions, ReducedWord};
use crate::generators::kappa::{conjugation_defect, table_defects};
use crate::generators::{
    build_U, build_schedule, cost_one_perturbation, density_probe, halving_epsilons, rank_generators,
    verify_a2, verify_property_ii, ProbeOptions, Schedule, WordTable,
};
use crate::measure::{cylinder, ProductSet, Word};
use crate::perm::{finite_odometer, LevelPerm};
use crate::rational::{parse_rational, Dyadic, Rational};
use crate::report::{Record, Report};
use crate::scenario::Scenario;

pub trait Check: Send + Sync {
    fn id(&self) -> &'static str;

    /// Phrase from the source argument that the check certifies.
    fn anchor(&self) -> &'static str;

    fn run(&self, ctx: &mut Context<'_>) -> Result<Vec<Record>>;

    fn record(&self) -> Record {
        Record::new(self.id(), self.anchor())
    }
}

/// Scenario plus cached schedules shared by the checks of one run.
pub struct Context<'a> {
    pub scenario: &'a Scenario,
    schedules: HashMap<(Vec<usize>, usize, u32), (Schedule, FieldElement)>,
    pub partial: bool,
}

impl<'a> Context<'a> {
    pub fn new(scenario: &'a Scenario) -> Self {
        Context {
            scenario,
            schedules: HashMap::new(),
            partial: false,
        }
    }

    /// Schedule and `U` for the given groups, length and depth.
    pub fn schedule(&mut self, groups: Vec<usize>, length: usize, depth: u32) -> Result<(Schedule, FieldElement)> {
        let key = (groups.clone(), length, depth);
        if let Some(hit) = self.schedules.get(&key) {
            return Ok(hit.clone());
        }
        let sc = self.scenario;
        let epsilons = if length <= sc.epsilons.len() {
            sc.epsilons.clone()
        } else {
            halving_epsilons(length)
        };
        let s = build_schedule(Arc::new(sc.base.clone()), groups, epsilons, length, depth, &sc.basis)?;
        let u = build_U(&s)?;
        self.schedules.insert(key, (s.clone(), u.clone()));
        Ok((s, u))
    }

    pub fn main_schedule(&mut self) -> Result<(Schedule, FieldElement)> {
        let sc = self.scenario;
        self.schedule(sc.groups.clone(), sc.length, sc.depth)
    }

    fn prefixed(&self, prefix: &str) -> Result<(usize, u32)> {
        let sc = self.scenario;
        Ok((
            sc.param_or(&format!("{prefix}.length"), sc.length)?,
            sc.param_or(&format!("{prefix}.depth"), sc.depth)?,
        ))
    }
}

fn rational_param(sc: &Scenario, key: &str, default: Rational) -> Result<Rational> {
    sc.param(key).map_or(Ok(default), parse_rational)
}

fn count(n: usize) -> Rational {
    Rational::from_integer(n.into())
}

fn fraction(p: usize, q: usize) -> Rational {
    Rational::new(p.into(), q.into())
}

/// Cycle-length groups such as `3;3,5`.
fn cycle_sets(raw: &str) -> Result<Vec<Vec<usize>>> {
    raw.split(';')
        .map(|set| {
            set.split(',')
                .map(|t| {
                    t.trim()
                        .parse::<usize>()
                        .ok()
                        .filter(|&l| l >= 2)
                        .ok_or_else(|| Error::InvalidArgument(format!("bad cycle length `{t}`")))
                })
                .collect()
        })
        .collect()
}

/// Disjoint cycles of the given lengths on the lowest leaves of `atom` outside `avoid`.
fn cycles_outside(base: &Arc<crate::BaseSpace>, depth: u32, atom: usize, lengths: &[usize], avoid: &ProductSet) -> Result<FieldElement> {
    let needed: usize = lengths.iter().sum();
    let free: Vec<u32> = (0..1u32 << depth)
        .filter(|&x| !avoid.part(atom).contains(x))
        .take(needed)
        .collect();
    if free.len() < needed {
        return Err(Error::Resolution {
            reason: format!("only {} free leaves for cycles of total length {needed}", free.len()),
            required_depth: depth + 1,
        });
    }
    let mut cycles = Vec::new();
    let mut rest = &free[..];
    for &l in lengths {
        let (head, tail) = rest.split_at(l);
        cycles.push(head.to_vec());
        rest = tail;
    }
    let mut perms: Vec<LevelPerm> = (0..base.len()).map(|_| LevelPerm::identity(depth)).collect();
    perms[atom] = LevelPerm::from_cycles(depth, &cycles)?;
    FieldElement::new(base.clone(), perms)
}

pub struct SquareRoot;

impl Check for SquareRoot {
    fn id(&self) -> &'static str {
        "square-root"
    }

    fn anchor(&self) -> &'static str {
        "has same support as $\\sigma$"
    }

    fn run(&self, ctx: &mut Context<'_>) -> Result<Vec<Record>> {
        let sc = ctx.scenario;
        let p_max: u32 = sc.param_or("square-root.p_max", 4)?;
        let exhaustive: u32 = sc.param_or("square-root.exhaustive", 2)?;
        let samples: usize = sc.param_or("square-root.samples", 10_000)?;
        let seed: u64 = sc.param_or("square-root.seed", 0)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::new();
        for p in 1..=p_max {
            let size = 1u32 << p;
            let sigmas: Vec<LevelPerm> = if p <= exhaustive {
                use itertools::Itertools;
                (0..size)
                    .permutations(size as usize)
                    .map(|im| LevelPerm::new(p, im))
                    .collect::<Result<_>>()?
            } else {
                (0..samples)
                    .map(|_| {
                        let mut im: Vec<u32> = (0..size).collect();
                        im.shuffle(&mut rng);
                        LevelPerm::new(p, im)
                    })
                    .collect::<Result<_>>()?
            };
            let mut failures = 0usize;
            for sigma in &sigmas {
                let root = sigma.sqrt();
                let alpha = sigma.embed(p + 1)?;
                if root.compose(&root)? != alpha || root.support() != alpha.support() {
                    failures += 1;
                }
            }
            out.push(
                self.record()
                    .param("p", p)
                    .param("cases", sigmas.len())
                    .value(&count(failures))
                    .bound(&Rational::zero())
                    .pass(failures == 0),
            );
        }
        Ok(out)
    }
}

pub struct Odometer;

impl Check for Odometer {
    fn id(&self) -> &'static str {
        "odometer"
    }

    fn anchor(&self) -> &'static str {
        "adding $(1,0,0,...)$ ... with right carry"
    }

    fn run(&self, ctx: &mut Context<'_>) -> Result<Vec<Record>> {
        let m_max: u32 = ctx.scenario.param_or("odometer.m_max", 16)?;
        let mut bad = 0usize;
        for m in 1..=m_max {
            let t = finite_odometer(m)?;
            let ok = (0..1u32 << m).all(|x| {
                let mut w = Word::from_leaf(x, m);
                for bit in w.0.iter_mut() {
                    *bit = !*bit;
                    if *bit {
                        break;
                    }
                }
                t.apply(x) == w.leaf()
            });
            bad += usize::from(!ok);
        }
        Ok(vec![self
            .record()
            .param("m_max", m_max)
            .value(&count(bad))
            .bound(&Rational::zero())
            .pass(bad == 0)])
    }
}

pub struct WordTables;

impl Check for WordTables {
    fn id(&self) -> &'static str {
        "word-table"
    }

    fn anchor(&self) -> &'static str {
        "word in $T$ and $\\iota_A(U_n)$ of size less than $\\kappa(n)$"
    }

    fn run(&self, ctx: &mut Context<'_>) -> Result<Vec<Record>> {
        let extra: u32 = ctx.scenario.param_or("word-table.extra_depth", 6)?;
        let mut out = Vec::new();
        for n in 2..=3u32 {
            let m = n + extra;
            let table = WordTable::build(n)?;
            let defects = table_defects(&table, m)?;
            let mut worst = Rational::zero();
            let mut ok = true;
            for (d, len) in &defects {
                let allowed = Dyadic::pow2_neg(m).to_rational() * count(*len);
                ok &= d.to_rational() <= allowed;
                worst = worst.max(d.to_rational());
            }
            let half = 1i64 << (n - 1);
            for j in (1 - half)..half {
                let d = conjugation_defect(n, m, j)?.to_rational();
                ok &= d <= Dyadic::pow2_neg(m).to_rational() * count(2 * j.unsigned_abs() as usize);
                worst = worst.max(d);
            }
            out.push(
                self.record()
                    .param("n", n)
                    .param("m", m)
                    .param("kappa", table.kappa())
                    .param("entries", defects.len())
                    .value(&worst)
                    .bound(&Dyadic::pow2_neg(m).to_rational())
                    .pass(ok),
            );
        }
        Ok(out)
    }
}

pub struct ConditionA2;

impl Check for ConditionA2 {
    fn id(&self) -> &'static str {
        "a2"
    }

    fn anchor(&self) -> &'static str {
        "neighborhood of the group generated"
    }

    fn run(&self, ctx: &mut Context<'_>) -> Result<Vec<Record>> {
        let (s, u) = ctx.main_schedule()?;
        (1..=s.length())
            .map(|k| {
                let a = verify_a2(&u, &s, k)?;
                let bound = a.residual.clone().min(a.bound.clone());
                Ok(self
                    .record()
                    .param("k", k)
                    .param("n_k", s.ns()[k - 1])
                    .param("depth", s.depth())
                    .value(&a.distance)
                    .bound(&bound)
                    .pass(a.pass))
            })
            .collect()
    }
}

pub struct PropertyTwo;

impl Check for PropertyTwo {
    fn id(&self) -> &'static str {
        "property-ii"
    }

    fn anchor(&self) -> &'static str {
        "$m_kP_k\\equiv 1 \\mod 2^k$"
    }

    fn run(&self, ctx: &mut Context<'_>) -> Result<Vec<Record>> {
        let sets = cycle_sets(ctx.scenario.param("property-ii.cycles").unwrap_or("3;3,5"))?;
        let powers: Vec<i64> = crate::text::parse_u32_list(ctx.scenario.param("property-ii.powers").unwrap_or("1,2"))?
            .into_iter()
            .map(i64::from)
            .collect();
        let extra: usize = ctx.scenario.param_or("property-ii.extra_k", 1)?;
        let (s, u) = ctx.main_schedule()?;
        let avoid = u.support();
        let mut out = Vec::new();
        for lengths in &sets {
            let c = cycles_outside(s.base(), s.depth(), 0, lengths, &avoid)?;
            for &e in &powers {
                let v = u.pow(e);
                let distinct: BTreeSet<usize> = lengths.iter().copied().collect();
                let orbit_k = (usize::BITS - (v.max_orbit().max(1) - 1).leading_zeros()) as usize;
                let k_max = orbit_k.max(distinct.len()) + extra;
                let res = verify_property_ii(&v, &c, k_max)?;
                let tail_zero = res.predicted_k <= k_max
                    && res.distances[res.predicted_k..].iter().all(Zero::is_zero);
                let at_predicted = res
                    .distances
                    .get(res.predicted_k)
                    .cloned()
                    .unwrap_or_else(|| count(1));
                out.push(
                    self.record()
                        .param("power", e)
                        .param("cycles", crate::text::join_u32(lengths.iter().map(|&l| l as u32)))
                        .param("predicted_k", res.predicted_k)
                        .param("first_zero", res.first_zero().map_or("none".to_string(), |k| k.to_string()))
                        .param("k_max", k_max)
                        .value(&at_predicted)
                        .bound(&Rational::zero())
                        .pass(tail_zero),
                );
            }
        }
        Ok(out)
    }
}

pub struct Density;

impl Check for Density {
    fn id(&self) -> &'static str {
        "density"
    }

    fn anchor(&self) -> &'static str {
        "dyadic permutations is dense"
    }

    fn run(&self, ctx: &mut Context<'_>) -> Result<Vec<Record>> {
        let sc = ctx.scenario;
        let p = sc.probe.clone();
        let (s, u) = ctx.schedule(sc.groups.clone(), p.length.unwrap_or(sc.length), p.depth.unwrap_or(sc.depth))?;
        let t = s.t_field()?;
        let options = ProbeOptions {
            target_depth: p.target_depth,
            atoms: None,
            epsilon: p.epsilon.clone(),
            max_len: p.max_len,
            memory_cap: p.memory_cap,
        };
        let report = density_probe(&[t, u], &options)?;
        ctx.partial |= !report.complete;
        let longest = report
            .targets
            .iter()
            .filter_map(|t| t.word.as_ref().map(|w| w.0.len()))
            .max()
            .unwrap_or(0);
        Ok(vec![self
            .record()
            .param("depth", s.depth())
            .param("epsilon", crate::rational::fmt_rational(&p.epsilon))
            .param("visited", report.visited)
            .param("reached_len", report.reached_len)
            .param("longest_word", longest)
            .param("complete", report.complete)
            .value(&report.fraction())
            .bound(&count(1))
            .pass(report.complete && report.covered() == report.targets.len())])
    }
}

pub struct DensityOdometer;

impl Check for DensityOdometer {
    fn id(&self) -> &'static str {
        "density-t"
    }

    fn anchor(&self) -> &'static str {
        "dyadic permutations is dense"
    }

    fn run(&self, ctx: &mut Context<'_>) -> Result<Vec<Record>> {
        let sc = ctx.scenario;
        let d = sc.probe.target_depth;
        let t = FieldElement::constant(Arc::new(sc.base.clone()), &finite_odometer(d)?);
        let options = ProbeOptions {
            target_depth: d,
            atoms: None,
            epsilon: Rational::zero(),
            max_len: sc.probe.max_len,
            memory_cap: sc.probe.memory_cap,
        };
        let report = density_probe(&[t], &options)?;
        ctx.partial |= !report.complete;
        let size = 1usize << d;
        let total = report.targets.len();
        let expected = fraction(size, total);
        Ok(vec![self
            .record()
            .param("target_depth", d)
            .param("covered", report.covered())
            .value(&report.fraction())
            .bound(&expected)
            .pass(report.fraction() == expected)])
    }
}

pub struct Rank;

impl Check for Rank {
    fn id(&self) -> &'static str {
        "rank"
    }

    fn anchor(&self) -> &'static str {
        "The $(n+1)$ elements $T,U_1,C_2,...,C_n$"
    }

    fn run(&self, ctx: &mut Context<'_>) -> Result<Vec<Record>> {
        let (length, depth) = ctx.prefixed("rank")?;
        let sc = ctx.scenario;
        let graphings: Vec<_> = sc.graphings.iter().map(|(_, g)| g.clone()).collect();
        let (s, _) = ctx.schedule(sc.groups.clone(), length, depth)?;
        let r = rank_generators(&s, &graphings)?;
        let expected = graphings.len() + 1;
        let pass = r.elements.len() == expected
            && r.closure_matches()
            && r.cycles_odd()
            && r.minimal()
            && r.members_of_target();
        Ok(vec![self
            .record()
            .param("graphings", graphings.len())
            .param("closure_matches", r.closure_matches())
            .param("cycles_odd", r.cycles_odd())
            .param("minimal", r.minimal())
            .param("q", format!("{:?}", r.q))
            .value(&count(r.elements.len()))
            .bound(&count(expected))
            .pass(pass)])
    }
}

pub struct CostOne;

impl Check for CostOne {
    fn id(&self) -> &'static str {
        "cost-one"
    }

    fn anchor(&self) -> &'static str {
        "$U'=UCC'$"
    }

    fn run(&self, ctx: &mut Context<'_>) -> Result<Vec<Record>> {
        let sc = ctx.scenario;
        let delta = rational_param(sc, "cost-one.delta", Dyadic::new(1, 3).to_rational())?;
        let lengths = cycle_sets(sc.param("cost-one.cycles").unwrap_or("3"))?
            .into_iter()
            .next()
            .unwrap_or_default();
        let depth: u32 = sc.param_or("cost-one.depth", sc.depth)?;
        let length: usize = sc.param_or("cost-one.length", 1)?;
        if delta <= Rational::zero() {
            return invalid("cost-one.delta must be positive");
        }
        let k = (0..depth)
            .find(|&k| Dyadic::pow2_neg(k).to_rational() < delta)
            .ok_or_else(|| Error::Resolution {
                reason: "δ below the finest block".into(),
                required_depth: depth + 1,
            })?;
        let atoms = sc.base.len();
        let (s, _) = ctx.schedule(vec![k as usize + 1; atoms], length, depth)?;
        let z = crate::generators::schedule::z_set(&vec![k as usize; atoms], depth)?;
        let mut block = Word::constant(false, k as usize + 1);
        block.0.push(true);
        let avoid = z.union(&ProductSet::uniform(atoms, &cylinder(&block, depth)?))?;
        let c = cycles_outside(s.base(), depth, 0, &lengths, &avoid)?;
        let res = cost_one_perturbation(&c, &delta, &s)?;
        Ok(vec![self
            .record()
            .param("k", res.k)
            .param("M", res.certificate.m)
            .param("gcd", &res.certificate.gcd)
            .param("crt_exponent", &res.certificate.crt_exponent)
            .param("certificate_valid", res.certificate.valid())
            .value(&res.distance)
            .bound(&delta)
            .pass(res.pass())])
    }
}

pub struct FreeWords;

impl Check for FreeWords {
    fn id(&self) -> &'static str {
        "free-words"
    }

    fn anchor(&self) -> &'static str {
        "$A_{i,j}=T^{j+n+2(n+1)i}(A)$"
    }

    fn run(&self, ctx: &mut Context<'_>) -> Result<Vec<Record>> {
        let (length, depth) = ctx.prefixed("free-words")?;
        let sc = ctx.scenario;
        let max_len: usize = sc.param_or("free-words.max_len", 4)?;
        let delta = rational_param(sc, "free-words.delta", Dyadic::new(1, 4).to_rational())?;
        let aperiodic: bool = sc.param_or("free-words.aperiodic", false)?;
        let (s, u) = ctx.schedule(sc.groups.clone(), length, depth)?;
        let t = s.t_field()?;
        let words = ReducedWord::enumerate(max_len);
        let classes: BTreeSet<ReducedWord> = words.iter().map(ReducedWord::conjugacy_representative).collect();

        let mut worst = Rational::zero();
        let mut ok = true;
        for w in &words {
            let r = free_perturbation(w, &t, &u, &delta, &FreeOptions { aperiodic, avoid: None })?;
            ok &= r.distance < delta && !evaluate_word(w, &t, &r.u_prime)?.is_identity();
            worst = worst.max(r.distance);
        }
        let per_word = self
            .record()
            .param("words", words.len())
            .param("classes", classes.len())
            .param("max_len", max_len)
            .param("depth", depth)
            .value(&worst)
            .bound(&delta)
            .pass(ok);

        let mut combined = u.clone();
        let mut avoid = ProductSet::empty(t.atoms(), depth);
        for w in &words {
            let options = FreeOptions {
                aperiodic,
                avoid: Some(avoid.clone()),
            };
            let r = free_perturbation(w, &t, &combined, &delta, &options)?;
            avoid = avoid.union(&r.tower)?;
            combined = r.u_prime;
        }
        let relations = relation_search(&t, &combined, max_len)?;
        let mut by_class: BTreeMap<String, usize> = BTreeMap::new();
        for r in &relations {
            *by_class.entry(r.conjugacy_representative().to_string()).or_default() += 1;
        }
        let search = self
            .record()
            .param("search_len", max_len)
            .param("combined_distance", crate::rational::fmt_rational(&u.d_u(&combined)?))
            .param("relations", format!("{by_class:?}"))
            .value(&count(relations.len()))
            .bound(&Rational::zero())
            .pass(relations.is_empty());
        Ok(vec![per_word, search])
    }
}

/// Checks indexed by id.
pub struct Registry {
    checks: BTreeMap<&'static str, Box<dyn Check>>,
}

impl Registry {
    pub fn empty() -> Self {
        Registry {
            checks: BTreeMap::new(),
        }
    }

    pub fn builtin() -> Self {
        let mut r = Registry::empty();
        r.register(Box::new(SquareRoot));
        r.register(Box::new(Odometer));
        r.register(Box::new(WordTables));
        r.register(Box::new(ConditionA2));
        r.register(Box::new(PropertyTwo));
        r.register(Box::new(Density));
        r.register(Box::new(DensityOdometer));
        r.register(Box::new(Rank));
        r.register(Box::new(CostOne));
        r.register(Box::new(FreeWords));
        r
    }

    /// Adds or replaces a check under its id.
    pub fn register(&mut self, check: Box<dyn Check>) {
        self.checks.insert(check.id(), check);
    }

    pub fn get(&self, id: &str) -> Option<&dyn Check> {
        self.checks.get(id).map(|c| c.as_ref())
    }

    pub fn ids(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.checks.keys().copied()
    }

    /// Runs the scenario's checks in declaration order.
    pub fn run(&self, scenario: &Scenario) -> Result<Report> {
        let checks: Vec<&dyn Check> = scenario
            .checks
            .iter()
            .map(|id| {
                self.get(id)
                    .ok_or_else(|| Error::InvalidArgument(format!("unknown check `{id}`")))
            })
            .collect::<Result<_>>()?;
        let mut ctx = Context::new(scenario);
        let mut report = Report::new(&scenario.name);
        for check in checks {
            for record in check.run(&mut ctx)? {
                report.push(record);
            }
        }
        report.partial = ctx.partial;
        report.pass &= !ctx.partial;
        Ok(report)
    }
}

impl Default for Registry {
    fn default() -> Self {
        Registry::builtin()
    }
}
