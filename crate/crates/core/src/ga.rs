// SPDX-License-Identifier: Apache-2.0

//! Genetic-algorithm team selection over a reduced candidate pool, and a
//! binary particle-swarm baseline with the same evaluation budget.
//!
//! A genome is conceptually a bit string with one `|S|`-wide block per pool
//! worker; it is stored compactly as the pool index holding each required
//! skill. Every operator is followed by a repair step, so every genome ever
//! evaluated is feasible.

use std::io::Write;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::cluster::CandidatePool;
use crate::domain::{make_team, team_objective, ObjectiveWeights, Project, RecruiterView, SkillId, Team};
use crate::seed::{self, tag};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct GaConfig {
    pub population: usize,
    pub iterations: usize,
    /// Per-pair crossover probability.
    pub crossover_rate: f64,
    /// Per-individual probability of one swap mutation.
    pub mutation_rate: f64,
    pub stall_generations: usize,
    pub restarts_max: usize,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population: 1000,
            iterations: 500,
            crossover_rate: 0.4,
            mutation_rate: 0.8,
            stall_generations: 50,
            restarts_max: 3,
            seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population < 2 {
            return Err(Error::InvalidArgument("population must be at least 2".into()));
        }
        for r in [self.crossover_rate, self.mutation_rate] {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::InvalidArgument(format!("rate {r} outside [0, 1]")));
            }
        }
        Ok(())
    }

    /// Fitness evaluations of a full run: the initial population, then
    /// `population − 1` new individuals per generation (the elite is kept).
    pub fn budget(&self) -> u64 {
        (self.population + self.iterations * (self.population - 1)) as u64
    }
}

/// `slots[s]` is the pool index holding the `s`-th required skill.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Genome {
    pub slots: Vec<usize>,
}

impl Genome {
    /// The `|pool|·|S|` bit string, worker-major.
    pub fn to_bits(&self, pool_len: usize, num_skills: usize, skills: &[SkillId]) -> Vec<bool> {
        let mut bits = vec![false; pool_len * num_skills];
        for (&w, &k) in self.slots.iter().zip(skills) {
            bits[w * num_skills + k] = true;
        }
        bits
    }

    /// Inverse of [`Genome::to_bits`]; `None` unless every required column
    /// holds exactly one 1, no worker block holds two, and non-required
    /// columns are empty.
    pub fn from_bits(bits: &[bool], num_skills: usize, skills: &[SkillId]) -> Option<Self> {
        let pool_len = bits.len() / num_skills;
        let mut slots = Vec::with_capacity(skills.len());
        for &k in skills {
            let mut holders = (0..pool_len).filter(|&w| bits[w * num_skills + k]);
            let w = holders.next()?;
            if holders.next().is_some() {
                return None;
            }
            slots.push(w);
        }
        let ones = bits.iter().filter(|&&b| b).count();
        let mut distinct = slots.clone();
        distinct.sort_unstable();
        distinct.dedup();
        (ones == skills.len() && distinct.len() == slots.len()).then_some(Genome { slots })
    }
}

/// Everything the search needs: the recruiter's view, the project, the
/// objective weights and the reduced pool (over view positions).
#[derive(Debug, Clone, Copy)]
pub struct GaProblem<'a> {
    pub view: &'a RecruiterView,
    pub project: &'a Project,
    pub weights: &'a ObjectiveWeights,
    pub pool: &'a CandidatePool,
}

impl GaProblem<'_> {
    fn skills(&self) -> Vec<SkillId> {
        self.project.required_skills()
    }

    /// Pool indices allowed to take each required skill.
    fn eligible(&self) -> Vec<Vec<usize>> {
        self.skills()
            .iter()
            .map(|&k| (0..self.pool.len()).filter(|&i| self.pool.eligible(i, k)).collect())
            .collect()
    }

    fn check(&self) -> Result<Vec<Vec<usize>>> {
        if self.pool.is_empty() {
            return Err(Error::EmptyPool);
        }
        if let Some(&m) = self.pool.members.iter().find(|&&m| m >= self.view.len()) {
            return Err(Error::InvalidArgument(format!("pool member {m} outside the view")));
        }
        let eligible = self.eligible();
        let skills = self.skills();
        if let Some(s) = eligible.iter().position(Vec::is_empty) {
            return Err(Error::NoFeasibleGenome(format!("no pool worker may take skill {}", skills[s])));
        }
        if self.pool.len() < skills.len() {
            return Err(Error::NoFeasibleGenome(format!(
                "{} pool workers for {} skills",
                self.pool.len(),
                skills.len()
            )));
        }
        Ok(eligible)
    }

    fn members(&self, g: &Genome) -> Vec<usize> {
        g.slots.iter().map(|&i| self.pool.members[i]).collect()
    }

    /// The team objective of the decoded genome.
    pub fn fitness(&self, g: &Genome) -> f64 {
        team_objective(&self.members(g), self.project, self.view, self.weights)
            .expect("genomes are feasible by construction")
    }

    pub fn decode(&self, g: &Genome) -> Result<Team> {
        make_team(self.members(g), None, self.project, self.view, self.weights)
    }

    pub fn is_feasible(&self, g: &Genome) -> bool {
        let skills = self.skills();
        if g.slots.len() != skills.len() {
            return false;
        }
        let mut seen = vec![false; self.pool.len()];
        g.slots.iter().zip(&skills).all(|(&w, &k)| {
            w < self.pool.len() && !std::mem::replace(&mut seen[w], true) && self.pool.eligible(w, k)
        })
    }

    /// Number of feasible genomes (saturating).
    pub fn feasible_count(&self) -> u128 {
        let eligible = self.eligible();
        if self.pool.tags.is_some() {
            eligible.iter().fold(1u128, |acc, e| acc.saturating_mul(e.len() as u128))
        } else {
            crate::exact::falling_factorial(self.pool.len(), eligible.len())
        }
    }
}

fn random_genome(eligible: &[Vec<usize>], pool_len: usize, tagged: bool, rng: &mut ChaCha8Rng) -> Genome {
    if tagged {
        // Tags partition the pool, so slots are independent.
        Genome {
            slots: eligible.iter().map(|e| e[rng.random_range(0..e.len())]).collect(),
        }
    } else {
        let k = eligible.len();
        let picked = rand::seq::index::sample(rng, pool_len, k).into_vec();
        Genome { slots: picked }
    }
}

/// `cfg.population` genomes drawn uniformly from the feasible set.
pub fn init_population(problem: &GaProblem<'_>, cfg: &GaConfig) -> Result<Vec<Genome>> {
    cfg.validate()?;
    let eligible = problem.check()?;
    let mut rng = seed::rng(cfg.seed, &[tag::GA, 0]);
    let tagged = problem.pool.tags.is_some();
    Ok((0..cfg.population)
        .map(|_| random_genome(&eligible, problem.pool.len(), tagged, &mut rng))
        .collect())
}

/// One row of the convergence trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub generation: usize,
    pub best_fitness: f64,
    pub mean_fitness: f64,
    pub restart_epoch: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub team: Team,
    pub genome: Genome,
    pub evaluations: u64,
    pub restarts: usize,
    pub trace: Vec<TraceRow>,
}

/// Writes `generation,best_fitness,mean_fitness,restart_epoch`.
pub fn write_trace_csv<W: Write>(mut out: W, trace: &[TraceRow]) -> std::io::Result<()> {
    writeln!(out, "generation,best_fitness,mean_fitness,restart_epoch")?;
    for r in trace {
        writeln!(out, "{},{},{},{}", r.generation, r.best_fitness, r.mean_fitness, r.restart_epoch)?;
    }
    Ok(())
}

struct Operators<'a> {
    eligible: &'a [Vec<usize>],
    pool_len: usize,
}

impl Operators<'_> {
    /// Child of a worker-block crossover at block `cut`: workers below the
    /// cut come from `head`, the rest from `tail`; clashes are resolved at
    /// random and empty slots refilled with random unused eligible workers.
    fn cross(&self, head: &Genome, tail: &Genome, cut: usize, rng: &mut ChaCha8Rng) -> Genome {
        let k = head.slots.len();
        let mut used = vec![false; self.pool_len];
        let mut slots = vec![usize::MAX; k];
        for s in 0..k {
            let a = (head.slots[s] < cut).then_some(head.slots[s]);
            let b = (tail.slots[s] >= cut).then_some(tail.slots[s]);
            let pick = match (a, b) {
                (Some(a), Some(b)) => Some(if rng.random::<bool>() { a } else { b }),
                (x, y) => x.or(y),
            };
            if let Some(w) = pick {
                slots[s] = w;
                used[w] = true;
            }
        }
        for s in 0..k {
            if slots[s] == usize::MAX {
                let w = self.random_unused(s, &used, rng).expect("repair always finds a worker");
                slots[s] = w;
                used[w] = true;
            }
        }
        Genome { slots }
    }

    fn random_unused(&self, s: usize, used: &[bool], rng: &mut ChaCha8Rng) -> Option<usize> {
        let free: Vec<usize> = self.eligible[s].iter().copied().filter(|&w| !used[w]).collect();
        (!free.is_empty()).then(|| free[rng.random_range(0..free.len())])
    }

    /// Swaps the worker of one random slot for an unassigned eligible one.
    fn mutate(&self, g: &mut Genome, rng: &mut ChaCha8Rng) {
        let s = rng.random_range(0..g.slots.len());
        let mut used = vec![false; self.pool_len];
        for &w in &g.slots {
            used[w] = true;
        }
        if let Some(w) = self.random_unused(s, &used, rng) {
            g.slots[s] = w;
        }
    }
}

/// Index drawn with probability proportional to `fitness − min`, uniform
/// when all fitness values are equal.
fn roulette(cumulative: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let total = *cumulative.last().unwrap();
    if !(total > 0.0) {
        return rng.random_range(0..cumulative.len());
    }
    let r = rng.random::<f64>() * total;
    cumulative.partition_point(|&c| c <= r).min(cumulative.len() - 1)
}

fn evaluate(problem: &GaProblem<'_>, genomes: &[Genome]) -> Vec<f64> {
    genomes.par_iter().map(|g| problem.fitness(g)).collect()
}

fn argmax(fitness: &[f64]) -> usize {
    let mut best = 0;
    for (i, &f) in fitness.iter().enumerate() {
        if f > fitness[best] {
            best = i;
        }
    }
    best
}

/// Runs the GA from a fresh uniform population.
pub fn evolve(problem: &GaProblem<'_>, cfg: &GaConfig) -> Result<SearchOutcome> {
    let population = init_population(problem, cfg)?;
    evolve_from(problem, population, cfg)
}

/// Runs `cfg.iterations` generations from `population` with roulette
/// selection, block crossover, swap mutation and elitism. After
/// `cfg.stall_generations` generations without improvement the population
/// is reseeded around the global best, at most `cfg.restarts_max` times.
pub fn evolve_from(problem: &GaProblem<'_>, mut population: Vec<Genome>, cfg: &GaConfig) -> Result<SearchOutcome> {
    cfg.validate()?;
    let eligible = problem.check()?;
    if population.len() != cfg.population || !population.iter().all(|g| problem.is_feasible(g)) {
        return Err(Error::InvalidArgument("initial population is not feasible".into()));
    }
    let pool_len = problem.pool.len();
    let ops = Operators {
        eligible: &eligible,
        pool_len,
    };
    let tagged = problem.pool.tags.is_some();

    if problem.feasible_count() == 1 {
        let genome = population.swap_remove(0);
        return Ok(SearchOutcome {
            team: problem.decode(&genome)?,
            genome,
            evaluations: 1,
            restarts: 0,
            trace: Vec::new(),
        });
    }

    let mut rng = seed::rng(cfg.seed, &[tag::GA, 1]);
    let mut fitness = evaluate(problem, &population);
    let mut evaluations = population.len() as u64;
    let first = argmax(&fitness);
    let mut best = (population[first].clone(), fitness[first]);
    let mut stall = 0;
    let mut restarts = 0;
    let mut trace = Vec::with_capacity(cfg.iterations + 1);
    let mean = |f: &[f64]| f.iter().sum::<f64>() / f.len() as f64;
    trace.push(TraceRow {
        generation: 0,
        best_fitness: best.1,
        mean_fitness: mean(&fitness),
        restart_epoch: 0,
    });

    for generation in 1..=cfg.iterations {
        let mut next = Vec::with_capacity(cfg.population);
        let mut next_fitness = Vec::with_capacity(cfg.population);
        if stall >= cfg.stall_generations && restarts < cfg.restarts_max {
            restarts += 1;
            stall = 0;
            next.push(best.0.clone());
            next_fitness.push(best.1);
            while next.len() < cfg.population {
                next.push(random_genome(&eligible, pool_len, tagged, &mut rng));
            }
        } else {
            let elite = argmax(&fitness);
            next.push(population[elite].clone());
            next_fitness.push(fitness[elite]);
            let min = fitness.iter().copied().fold(f64::INFINITY, f64::min);
            let mut cumulative = Vec::with_capacity(fitness.len());
            let mut acc = 0.0;
            for &f in &fitness {
                acc += f - min;
                cumulative.push(acc);
            }
            while next.len() < cfg.population {
                let a = &population[roulette(&cumulative, &mut rng)];
                let b = &population[roulette(&cumulative, &mut rng)];
                let (mut c1, mut c2) = if pool_len > 1 && rng.random::<f64>() < cfg.crossover_rate {
                    let cut = rng.random_range(1..pool_len);
                    (ops.cross(a, b, cut, &mut rng), ops.cross(b, a, cut, &mut rng))
                } else {
                    (a.clone(), b.clone())
                };
                for c in [&mut c1, &mut c2] {
                    if rng.random::<f64>() < cfg.mutation_rate {
                        ops.mutate(c, &mut rng);
                    }
                }
                next.push(c1);
                if next.len() < cfg.population {
                    next.push(c2);
                }
            }
        }
        let fresh = evaluate(problem, &next[1..]);
        evaluations += fresh.len() as u64;
        next_fitness.extend(fresh);
        population = next;
        fitness = next_fitness;
        let top = argmax(&fitness);
        if fitness[top] > best.1 {
            best = (population[top].clone(), fitness[top]);
            stall = 0;
        } else {
            stall += 1;
        }
        trace.push(TraceRow {
            generation,
            best_fitness: best.1,
            mean_fitness: mean(&fitness),
            restart_epoch: restarts,
        });
    }
    Ok(SearchOutcome {
        team: problem.decode(&best.0)?,
        genome: best.0,
        evaluations,
        restarts,
        trace,
    })
}

/// Binary PSO parameters.
const INERTIA: f64 = 0.7;
const COGNITIVE: f64 = 1.5;
const SOCIAL: f64 = 1.5;
const VMAX: f64 = 4.0;

/// Maps particle bits to a feasible genome: each slot keeps, among its set
/// and still-unused eligible bits, the one with the highest velocity, or
/// else the unused eligible worker with the highest velocity. Ties go to
/// the lowest pool index.
fn pso_repair(bits: &[bool], velocity: &[f64], eligible: &[Vec<usize>], pool_len: usize) -> Genome {
    let k = eligible.len();
    let mut used = vec![false; pool_len];
    let mut slots = Vec::with_capacity(k);
    for (s, cands) in eligible.iter().enumerate() {
        let pick = |require_bit: bool| {
            cands
                .iter()
                .copied()
                .filter(|&w| !used[w] && (!require_bit || bits[w * k + s]))
                .fold(None, |acc: Option<usize>, w| match acc {
                    Some(b) if velocity[b * k + s] >= velocity[w * k + s] => Some(b),
                    _ => Some(w),
                })
        };
        let w = pick(true).or_else(|| pick(false)).expect("a free eligible worker exists");
        used[w] = true;
        slots.push(w);
    }
    Genome { slots }
}

/// Binary PSO with sigmoid transfer over the `|pool|·|S_p|` bits, the
/// repair above, and exactly the GA's evaluation budget.
pub fn pso_baseline(problem: &GaProblem<'_>, cfg: &GaConfig) -> Result<SearchOutcome> {
    let start = init_population(problem, cfg)?;
    let eligible = problem.check()?;
    let k = eligible.len();
    let pool_len = problem.pool.len();
    if problem.feasible_count() == 1 {
        let genome = start.into_iter().next().expect("population is non-empty");
        return Ok(SearchOutcome {
            team: problem.decode(&genome)?,
            genome,
            evaluations: 1,
            restarts: 0,
            trace: Vec::new(),
        });
    }
    let budget = cfg.budget();
    let mut rng = seed::rng(cfg.seed, &[tag::PSO]);
    let width = pool_len * k;
    let to_bits = |g: &Genome| {
        let mut b = vec![false; width];
        for (s, &w) in g.slots.iter().enumerate() {
            b[w * k + s] = true;
        }
        b
    };
    let mut positions: Vec<Vec<bool>> = start.iter().map(to_bits).collect();
    let mut velocity: Vec<Vec<f64>> = (0..cfg.population)
        .map(|_| (0..width).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let fitness = evaluate(problem, &start);
    let mut evaluations = fitness.len() as u64;
    let mut personal: Vec<(Vec<bool>, f64)> = positions.iter().cloned().zip(fitness.iter().copied()).collect();
    let top = argmax(&fitness);
    let mut global = (start[top].clone(), fitness[top]);
    let mut trace = vec![TraceRow {
        generation: 0,
        best_fitness: global.1,
        mean_fitness: fitness.iter().sum::<f64>() / fitness.len() as f64,
        restart_epoch: 0,
    }];
    let mut iteration = 0;
    while evaluations < budget {
        iteration += 1;
        let gbits = to_bits(&global.0);
        let mut sum = 0.0;
        let mut count = 0;
        for p in 0..cfg.population {
            if evaluations >= budget {
                break;
            }
            for b in 0..width {
                let x = positions[p][b] as u8 as f64;
                let pb = personal[p].0[b] as u8 as f64;
                let gb = gbits[b] as u8 as f64;
                let v = INERTIA * velocity[p][b]
                    + COGNITIVE * rng.random::<f64>() * (pb - x)
                    + SOCIAL * rng.random::<f64>() * (gb - x);
                velocity[p][b] = v.clamp(-VMAX, VMAX);
                positions[p][b] = rng.random::<f64>() < crate::embed::sigmoid(velocity[p][b]);
            }
            let genome = pso_repair(&positions[p], &velocity[p], &eligible, pool_len);
            positions[p] = to_bits(&genome);
            let f = problem.fitness(&genome);
            evaluations += 1;
            sum += f;
            count += 1;
            if f > personal[p].1 {
                personal[p] = (positions[p].clone(), f);
            }
            if f > global.1 {
                global = (genome, f);
            }
        }
        trace.push(TraceRow {
            generation: iteration,
            best_fitness: global.1,
            mean_fitness: sum / count.max(1) as f64,
            restart_epoch: 0,
        });
    }
    Ok(SearchOutcome {
        team: problem.decode(&global.0)?,
        genome: global.0,
        evaluations,
        restarts: 0,
        trace,
    })
}
