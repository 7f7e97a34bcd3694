// SPDX-License-Identifier: Apache-2.0

//! Exact recruitment.
//!
//! The integer program assigns one distinct worker to every required skill
//! and rewards pairwise relations between hired workers. Because every
//! feasible point is an injective map from skill slots to workers, the
//! program is solved by depth-first search over the slots in catalog order,
//! trying workers in ascending pool position, with an optional admissible
//! upper bound for pruning. The pairwise indicator `v_ww'` is not a search
//! variable: it is derived from the complete assignment (see
//! [`hired_pairs`]).
//!
//! Ties are broken lexicographically: among teams whose objectives agree to
//! within [`TIE_EPS`], the one whose slot-ordered member list is smallest
//! wins; for the leader strategy, the lowest leader position wins first.

use std::io::Write;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::domain::{make_team, team_objective, ObjectiveWeights, Project, RecruiterView, Scorer, Team};
use crate::{Error, Result};

/// Objective differences at or below this are treated as ties.
pub const TIE_EPS: f64 = 1e-12;

/// Assignments the enumeration oracle accepts.
pub const ORACLE_BUDGET: u128 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Platform,
    Leader,
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "platform" => Ok(Strategy::Platform),
            "leader" => Ok(Strategy::Leader),
            other => Err(Error::InvalidArgument(format!("unknown strategy {other:?}"))),
        }
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Strategy::Platform => "platform",
            Strategy::Leader => "leader",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundMode {
    /// Plain enumeration.
    None,
    /// Prune with the optimistic completion bound.
    GreedyUpper,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub strategy: Strategy,
    /// Big-M of the leader capacity constraints. The search enforces their
    /// meaning directly; the value is only checked for validity.
    pub big_m: f64,
    pub time_limit: Option<Duration>,
    pub bound_mode: BoundMode,
}

impl SolverConfig {
    pub fn new(strategy: Strategy) -> Self {
        Self {
            strategy,
            big_m: f64::INFINITY,
            time_limit: None,
            bound_mode: BoundMode::GreedyUpper,
        }
    }

    fn check(&self, pool: usize, project: &Project) -> Result<()> {
        let skills = project.team_size();
        if pool < skills {
            return Err(Error::Infeasible {
                workers: pool,
                skills,
            });
        }
        if self.big_m < (pool * skills) as f64 {
            return Err(Error::InvalidArgument(format!(
                "big-M {} is below |W|·|S_p| = {}",
                self.big_m,
                pool * skills
            )));
        }
        Ok(())
    }
}

/// Raised through [`Error::InvalidArgument`] when the time limit expires.
pub const TIME_LIMIT_MESSAGE: &str = "time limit exceeded";

struct Search<'a> {
    scorer: &'a Scorer,
    bound: bool,
    /// Pool position that must be hired (the leader).
    required: Option<usize>,
    /// `suffix_max[s]`: sum over slots `s..` of the best unary term.
    suffix_max: Vec<f64>,
    max_pair: f64,
    used: Vec<bool>,
    members: Vec<usize>,
    best: Option<(f64, Vec<usize>)>,
    deadline: Option<Instant>,
    nodes: u64,
    timed_out: bool,
}

impl<'a> Search<'a> {
    fn new(scorer: &'a Scorer, cfg: &SolverConfig, required: Option<usize>, deadline: Option<Instant>) -> Self {
        let slots = scorer.slots.len();
        let mut suffix_max = vec![0.0; slots + 1];
        for s in (0..slots).rev() {
            let best = (0..scorer.n)
                .map(|w| scorer.unary(w, s))
                .fold(f64::NEG_INFINITY, f64::max);
            suffix_max[s] = suffix_max[s + 1] + best;
        }
        let max_pair = scorer.pair.iter().copied().fold(0.0, f64::max);
        Self {
            scorer,
            bound: cfg.bound_mode == BoundMode::GreedyUpper,
            required,
            suffix_max,
            max_pair,
            used: vec![false; scorer.n],
            members: Vec::with_capacity(slots),
            best: None,
            deadline,
            nodes: 0,
            timed_out: false,
        }
    }

    /// Upper bound on any completion of the current partial assignment
    /// worth `value`.
    fn upper_bound(&self, value: f64) -> f64 {
        let k = self.scorer.slots.len();
        let a = self.members.len();
        let open_pairs = (k * (k - 1) - a * a.saturating_sub(1)) as f64;
        value + self.suffix_max[a] + self.max_pair * open_pairs
    }

    fn run(&mut self, value: f64) {
        if self.timed_out {
            return;
        }
        self.nodes += 1;
        if self.nodes & 0xFFFF == 0 {
            if let Some(d) = self.deadline {
                if Instant::now() > d {
                    self.timed_out = true;
                    return;
                }
            }
        }
        let slot = self.members.len();
        let k = self.scorer.slots.len();
        if slot == k {
            let better = match &self.best {
                None => true,
                Some((b, _)) => value > b + TIE_EPS,
            };
            if better {
                self.best = Some((value, self.members.clone()));
            }
            return;
        }
        if self.bound {
            if let Some((b, _)) = &self.best {
                if self.upper_bound(value) <= b + TIE_EPS {
                    return;
                }
            }
        }
        let forced = match self.required {
            Some(r) if !self.used[r] && slot + 1 == k => Some(r),
            _ => None,
        };
        for w in 0..self.scorer.n {
            if self.used[w] || forced.is_some_and(|r| r != w) {
                continue;
            }
            let mut delta = self.scorer.unary(w, slot);
            for &v in &self.members {
                delta += self.scorer.pair(w, v) + self.scorer.pair(v, w);
            }
            self.used[w] = true;
            self.members.push(w);
            self.run(value + delta);
            self.members.pop();
            self.used[w] = false;
        }
    }
}

fn search(
    view: &RecruiterView,
    project: &Project,
    weights: &ObjectiveWeights,
    cfg: &SolverConfig,
    required: Option<usize>,
    deadline: Option<Instant>,
) -> Result<Option<Vec<usize>>> {
    let scorer = Scorer::new(view, project, weights);
    let mut s = Search::new(&scorer, cfg, required, deadline);
    s.run(0.0);
    if s.timed_out {
        return Err(Error::InvalidArgument(TIME_LIMIT_MESSAGE.into()));
    }
    Ok(s.best.map(|(_, m)| m))
}

/// Best team recruited by the platform from the whole view.
pub fn solve_platform(
    view: &RecruiterView,
    project: &Project,
    weights: &ObjectiveWeights,
    cfg: &SolverConfig,
) -> Result<Team> {
    cfg.check(view.len(), project)?;
    let deadline = cfg.time_limit.map(|t| Instant::now() + t);
    let members = search(view, project, weights, cfg, None, deadline)?
        .expect("a feasible pool always yields a team");
    make_team(members, None, project, view, weights)
}

/// Best (leader, team) pair: each pool worker in turn recruits under its
/// own view, and must itself hold one of the required skills.
///
/// `view_for(i)` returns the view of the worker at pool position `i`; all
/// views must list the same workers in the same order.
pub fn solve_leader<F>(
    pool_size: usize,
    project: &Project,
    view_for: F,
    weights: &ObjectiveWeights,
    cfg: &SolverConfig,
) -> Result<Team>
where
    F: Fn(usize) -> Result<RecruiterView> + Sync,
{
    cfg.check(pool_size, project)?;
    let deadline = cfg.time_limit.map(|t| Instant::now() + t);
    let per_leader: Vec<Result<Team>> = (0..pool_size)
        .into_par_iter()
        .map(|leader| {
            let view = view_for(leader)?;
            if view.len() != pool_size {
                return Err(Error::DimensionMismatch(format!(
                    "leader view has {} workers, pool has {pool_size}",
                    view.len()
                )));
            }
            let members = search(&view, project, weights, cfg, Some(leader), deadline)?
                .expect("a feasible pool always yields a team");
            make_team(members, Some(view.ids[leader]), project, &view, weights)
        })
        .collect();
    let mut best: Option<Team> = None;
    for team in per_leader {
        let team = team?;
        if best.as_ref().is_none_or(|b| team.objective > b.objective + TIE_EPS) {
            best = Some(team);
        }
    }
    Ok(best.expect("pool is non-empty"))
}

/// `|W| · (|W|-1) ··· (|W|-k+1)`.
pub fn falling_factorial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).map(|i| (n - i) as u128).product()
}

/// Exhaustive enumeration of every injective skill → worker assignment,
/// scored with [`team_objective`]. With `leader`, only assignments that
/// hire the leader are considered.
pub fn enumerate_oracle(
    view: &RecruiterView,
    project: &Project,
    weights: &ObjectiveWeights,
    leader: Option<usize>,
) -> Result<Team> {
    let n = view.len();
    let k = project.team_size();
    if n < k {
        return Err(Error::Infeasible { workers: n, skills: k });
    }
    let count = falling_factorial(n, k);
    if count > ORACLE_BUDGET {
        return Err(Error::BudgetExceeded {
            count,
            budget: ORACLE_BUDGET,
        });
    }
    // Odometer over all k-tuples in lexicographic order; non-injective
    // tuples are skipped.
    let mut tuple = vec![0usize; k];
    let mut best: Option<(f64, Vec<usize>)> = None;
    loop {
        let mut seen = vec![false; n];
        let injective = tuple.iter().all(|&w| !std::mem::replace(&mut seen[w], true));
        if injective && leader.is_none_or(|l| tuple.contains(&l)) {
            let value = team_objective(&tuple, project, view, weights)?;
            if best.as_ref().is_none_or(|(b, _)| value > b + TIE_EPS) {
                best = Some((value, tuple.clone()));
            }
        }
        let mut pos = k;
        loop {
            if pos == 0 {
                let (_, members) = best.expect("n ≥ k admits an assignment");
                return make_team(members, leader.map(|l| view.ids[l]), project, view, weights);
            }
            pos -= 1;
            tuple[pos] += 1;
            if tuple[pos] < n {
                break;
            }
            tuple[pos] = 0;
        }
    }
}

/// Number of assignments [`enumerate_oracle`] would score.
pub fn oracle_assignment_count(pool: usize, skills: usize) -> u128 {
    falling_factorial(pool, skills)
}

/// The pairwise indicator `v_ww'` (row-major over the pool) derived from a
/// team: 1 exactly when both workers are hired and distinct.
pub fn hired_pairs(team: &Team, pool_size: usize) -> Vec<bool> {
    let mut hired = vec![false; pool_size];
    for &m in &team.members {
        hired[m] = true;
    }
    let mut v = vec![false; pool_size * pool_size];
    for a in 0..pool_size {
        for b in 0..pool_size {
            v[a * pool_size + b] = a != b && hired[a] && hired[b];
        }
    }
    v
}

/// Writes the solution dump: one row per assigned skill, then a summary
/// line `strategy,leader,objective,elapsed_ms`. Without `elapsed` the last
/// field is empty, which keeps dumps reproducible byte for byte.
pub fn write_solution_csv<W: Write>(
    mut out: W,
    team: &Team,
    view: &RecruiterView,
    strategy: Strategy,
    elapsed: Option<Duration>,
) -> std::io::Result<()> {
    writeln!(out, "skill,worker_id,perceived_skill,cost,uncertainty")?;
    for (&k, &m) in team.skills.iter().zip(&team.members) {
        writeln!(
            out,
            "{k},{},{},{},{}",
            view.ids[m],
            view.skill(m, k),
            view.cost(m, k),
            view.uncertainty[m]
        )?;
    }
    writeln!(out, "strategy,leader,objective,elapsed_ms")?;
    let leader = team.leader.map(|l| l.to_string()).unwrap_or_default();
    let elapsed = elapsed.map(|e| e.as_millis().to_string()).unwrap_or_default();
    writeln!(out, "{strategy},{leader},{},{elapsed}", team.objective)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{perceive_skills, Normalizers, UncertaintyModel, Worker};
    use crate::graph::{all_pairs_hops, relation_weights, DirectWeight, Recruiter, RelationModel, SocialGraph};
    use crate::seed;
    use proptest::prelude::{any, prop_assert, prop_assert_eq, proptest, ProptestConfig};
    use rand::Rng;

    struct Fixture {
        workers: Vec<Worker>,
        relations: RelationModel,
        model: UncertaintyModel,
        seed: u64,
    }

    impl Fixture {
        fn random(n: usize, num_skills: usize, seed: u64) -> Self {
            let mut rng = seed::rng(seed, &[1234]);
            let mut edges = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    if rng.random::<f64>() < 0.35 {
                        edges.push((i, j));
                    }
                }
            }
            let g = SocialGraph::from_index_edges((0..n as u64).map(|i| 100 + i).collect(), &edges);
            let relations = relation_weights(&g, &all_pairs_hops(&g), DirectWeight::One);
            let workers = (0..n as u64)
                .map(|i| Worker {
                    id: 100 + i,
                    job_category: String::new(),
                    tenure_days: rng.random_range(0..3650),
                    enter: 0,
                    leave: 1,
                    skills: (0..num_skills).map(|_| rng.random()).collect(),
                    costs: (0..num_skills).map(|_| rng.random_range(1.0..20.0)).collect(),
                })
                .collect();
            Self {
                workers,
                relations,
                model: UncertaintyModel::default(),
                seed,
            }
        }

        fn view(&self, recruiter: Recruiter) -> RecruiterView {
            perceive_skills(&self.workers, &self.relations, recruiter, &self.model, self.seed).unwrap()
        }

        fn leader_view(&self, i: usize) -> Result<RecruiterView> {
            perceive_skills(
                &self.workers,
                &self.relations,
                Recruiter::Worker(self.workers[i].id),
                &self.model,
                self.seed,
            )
        }

        fn weights(&self) -> ObjectiveWeights {
            let max_cost = self
                .workers
                .iter()
                .flat_map(|w| w.costs.iter().copied())
                .fold(0.0, f64::max);
            ObjectiveWeights::new(
                [0.25; 4],
                Normalizers {
                    skill: 1.0,
                    uncertainty: self.model.sigma0.powi(2).max(f64::MIN_POSITIVE),
                    cost: max_cost,
                    relation: 1.0,
                },
            )
            .unwrap()
        }
    }

    fn assert_team_feasible(team: &Team, project: &Project) {
        team.validate(project).unwrap();
    }

    #[test]
    fn oracle_counts() {
        assert_eq!(oracle_assignment_count(4, 2), 12);
        assert_eq!(oracle_assignment_count(8, 3), 336);
        assert_eq!(falling_factorial(3, 4), 0);
    }

    #[test]
    fn infeasible_pool_is_reported() {
        let f = Fixture::random(2, 4, 1);
        let view = f.view(Recruiter::Platform);
        let project = Project::requiring(0, 4, &[0, 1, 2]).unwrap();
        let cfg = SolverConfig::new(Strategy::Platform);
        assert!(matches!(
            solve_platform(&view, &project, &f.weights(), &cfg),
            Err(Error::Infeasible { workers: 2, skills: 3 })
        ));
        assert!(matches!(
            solve_leader(2, &project, |i| f.leader_view(i), &f.weights(), &cfg),
            Err(Error::Infeasible { .. })
        ));
    }

    #[test]
    fn small_big_m_is_rejected() {
        let f = Fixture::random(5, 3, 1);
        let project = Project::requiring(0, 3, &[0, 1]).unwrap();
        let cfg = SolverConfig {
            big_m: 3.0,
            ..SolverConfig::new(Strategy::Leader)
        };
        assert!(solve_platform(&f.view(Recruiter::Platform), &project, &f.weights(), &cfg).is_err());
    }

    #[test]
    fn exact_pool_size_searches_skill_permutations() {
        let f = Fixture::random(3, 3, 2);
        let view = f.view(Recruiter::Platform);
        let project = Project::requiring(0, 3, &[0, 1, 2]).unwrap();
        let wt = f.weights();
        let team = solve_platform(&view, &project, &wt, &SolverConfig::new(Strategy::Platform)).unwrap();
        let mut best = f64::NEG_INFINITY;
        for p in [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
            best = best.max(team_objective(&p, &project, &view, &wt).unwrap());
        }
        assert_eq!(team.objective, best);
        let mut sorted = team.members.clone();
        sorted.sort();
        assert_eq!(sorted, vec![0, 1, 2]);
    }

    #[test]
    fn platform_matches_brute_force_seed_42() {
        let f = Fixture::random(8, 5, 42);
        let view = f.view(Recruiter::Platform);
        let project = Project::requiring(0, 5, &[0, 2, 4]).unwrap();
        let wt = f.weights();
        let team = solve_platform(&view, &project, &wt, &SolverConfig::new(Strategy::Platform)).unwrap();
        // Nested loops over all 8·7·6 assignments.
        let mut best = (f64::NEG_INFINITY, vec![]);
        for a in 0..8 {
            for b in 0..8 {
                for c in 0..8 {
                    if a == b || b == c || a == c {
                        continue;
                    }
                    let v = team_objective(&[a, b, c], &project, &view, &wt).unwrap();
                    if v > best.0 + TIE_EPS {
                        best = (v, vec![a, b, c]);
                    }
                }
            }
        }
        assert_eq!(team.members, best.1);
        assert!((team.objective - best.0).abs() < 1e-12);
        assert_team_feasible(&team, &project);
    }

    #[test]
    fn leader_matches_nested_brute_force_seed_42() {
        let f = Fixture::random(8, 5, 42);
        let project = Project::requiring(0, 5, &[1, 3, 4]).unwrap();
        let wt = f.weights();
        let cfg = SolverConfig::new(Strategy::Leader);
        let team = solve_leader(8, &project, |i| f.leader_view(i), &wt, &cfg).unwrap();
        let mut best = (f64::NEG_INFINITY, vec![], 0);
        for leader in 0..8 {
            let view = f.leader_view(leader).unwrap();
            for a in 0..8 {
                for b in 0..8 {
                    for c in 0..8 {
                        let m = [a, b, c];
                        if a == b || b == c || a == c || !m.contains(&leader) {
                            continue;
                        }
                        let v = team_objective(&m, &project, &view, &wt).unwrap();
                        if v > best.0 + TIE_EPS {
                            best = (v, m.to_vec(), leader);
                        }
                    }
                }
            }
        }
        assert_eq!(team.members, best.1);
        assert_eq!(team.leader, Some(f.workers[best.2].id));
        assert!((team.objective - best.0).abs() < 1e-12);
        assert_team_feasible(&team, &project);
    }

    /// Max-weight assignment of skills to distinct workers by dynamic
    /// programming over skill subsets.
    fn assignment_oracle(weight: &[Vec<f64>]) -> f64 {
        let n = weight.len();
        let k = weight[0].len();
        let full = 1usize << k;
        let mut dp = vec![f64::NEG_INFINITY; full];
        dp[0] = 0.0;
        for row in weight.iter().take(n) {
            let prev = dp.clone();
            for mask in 0..full {
                if prev[mask] == f64::NEG_INFINITY {
                    continue;
                }
                for (s, &w) in row.iter().enumerate() {
                    if mask & (1 << s) == 0 {
                        let next = mask | (1 << s);
                        dp[next] = dp[next].max(prev[mask] + w);
                    }
                }
            }
        }
        dp[full - 1]
    }

    #[test]
    fn skill_only_weights_reduce_to_assignment_problem() {
        for seed in 0..20 {
            let f = Fixture::random(9, 5, seed);
            let view = f.view(Recruiter::Platform);
            let project = Project::requiring(0, 5, &[0, 1, 3, 4]).unwrap();
            let mut wt = f.weights();
            wt.eta = [1.0, 0.0, 0.0, 0.0];
            let team = solve_platform(&view, &project, &wt, &SolverConfig::new(Strategy::Platform)).unwrap();
            let weight: Vec<Vec<f64>> = (0..9)
                .map(|w| project.required_skills().iter().map(|&k| view.skill(w, k)).collect())
                .collect();
            assert!((team.objective - assignment_oracle(&weight)).abs() < 1e-12);
        }
    }

    #[test]
    fn single_worker_leader() {
        let f = Fixture::random(1, 2, 3);
        let project = Project::requiring(0, 2, &[1]).unwrap();
        let team = solve_leader(1, &project, |i| f.leader_view(i), &f.weights(), &SolverConfig::new(Strategy::Leader))
            .unwrap();
        assert_eq!(team.leader, Some(f.workers[0].id));
        assert_eq!(team.worker_ids, vec![f.workers[0].id]);
    }

    #[test]
    fn strategies_coincide_without_noise_on_a_clique() {
        let n = 7;
        let pairs: Vec<(u64, u64)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        let g = SocialGraph::from_id_pairs(&pairs);
        let relations = relation_weights(&g, &all_pairs_hops(&g), DirectWeight::One);
        let workers: Vec<Worker> = (0..n)
            .map(|id| Worker {
                id,
                job_category: String::new(),
                tenure_days: 10,
                enter: 0,
                leave: 1,
                skills: vec![0.6, 0.4, 0.9],
                costs: vec![3.0, 2.0, 5.0],
            })
            .collect();
        let f = Fixture {
            workers,
            relations,
            model: UncertaintyModel::noiseless(),
            seed: 0,
        };
        let project = Project::requiring(0, 3, &[0, 2]).unwrap();
        let wt = f.weights();
        let platform = solve_platform(&f.view(Recruiter::Platform), &project, &wt, &SolverConfig::new(Strategy::Platform)).unwrap();
        let leader = solve_leader(n as usize, &project, |i| f.leader_view(i), &wt, &SolverConfig::new(Strategy::Leader)).unwrap();
        assert!((platform.objective - leader.objective).abs() < 1e-9);
    }

    #[test]
    fn pair_indicator_is_logical_and() {
        let f = Fixture::random(8, 4, 9);
        let view = f.view(Recruiter::Platform);
        let project = Project::requiring(0, 4, &[0, 1, 3]).unwrap();
        let team = solve_platform(&view, &project, &f.weights(), &SolverConfig::new(Strategy::Platform)).unwrap();
        let v = hired_pairs(&team, 8);
        for a in 0..8 {
            assert!(!v[a * 8 + a]);
            for b in 0..8 {
                let expected = a != b && team.members.contains(&a) && team.members.contains(&b);
                assert_eq!(v[a * 8 + b], expected);
                assert_eq!(v[a * 8 + b], v[b * 8 + a]);
            }
        }
    }

    #[test]
    fn oracle_budget_is_enforced() {
        let f = Fixture::random(30, 6, 1);
        let view = f.view(Recruiter::Platform);
        let project = Project::requiring(0, 6, &[0, 1, 2, 3, 4, 5]).unwrap();
        assert!(matches!(
            enumerate_oracle(&view, &project, &f.weights(), None),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn time_limit_aborts_search() {
        let f = Fixture::random(40, 8, 1);
        let view = f.view(Recruiter::Platform);
        let project = Project::requiring(0, 8, &[0, 1, 2, 3, 4, 5, 6]).unwrap();
        let cfg = SolverConfig {
            time_limit: Some(Duration::from_millis(20)),
            bound_mode: BoundMode::None,
            ..SolverConfig::new(Strategy::Platform)
        };
        let err = solve_platform(&view, &project, &f.weights(), &cfg).unwrap_err();
        assert!(err.to_string().contains(TIME_LIMIT_MESSAGE));
    }

    #[test]
    fn solution_dump_format() {
        let f = Fixture::random(5, 3, 4);
        let view = f.view(Recruiter::Platform);
        let project = Project::requiring(0, 3, &[0, 2]).unwrap();
        let team = solve_platform(&view, &project, &f.weights(), &SolverConfig::new(Strategy::Platform)).unwrap();
        let mut buf = Vec::new();
        write_solution_csv(&mut buf, &team, &view, Strategy::Platform, Some(Duration::from_millis(7))).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "skill,worker_id,perceived_skill,cost,uncertainty");
        assert_eq!(lines.len(), 5);
        assert!(lines[4].starts_with("platform,,"));
        assert!(lines[4].ends_with(",7"));
        let mut quiet = Vec::new();
        write_solution_csv(&mut quiet, &team, &view, Strategy::Platform, None).unwrap();
        assert!(String::from_utf8(quiet).unwrap().ends_with(",\n"));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(60))]

        #[test]
        fn agrees_with_oracle(n in 3usize..=10, k in 1usize..=3, seed in any::<u64>()) {
            let f = Fixture::random(n, 4, seed);
            let skills: Vec<usize> = (0..k).collect();
            let project = Project::requiring(0, 4, &skills).unwrap();
            let wt = f.weights();
            let view = f.view(Recruiter::Platform);
            let exact = solve_platform(&view, &project, &wt, &SolverConfig::new(Strategy::Platform)).unwrap();
            let oracle = enumerate_oracle(&view, &project, &wt, None).unwrap();
            prop_assert_eq!(&exact.members, &oracle.members);
            prop_assert!((exact.objective - oracle.objective).abs() < 1e-9);
        }

        #[test]
        fn bounding_is_value_safe(n in 3usize..=11, k in 1usize..=4, seed in any::<u64>()) {
            let f = Fixture::random(n.max(k), 5, seed);
            let skills: Vec<usize> = (0..k).collect();
            let project = Project::requiring(0, 5, &skills).unwrap();
            let wt = f.weights();
            let view = f.view(Recruiter::Platform);
            let plain = SolverConfig { bound_mode: BoundMode::None, ..SolverConfig::new(Strategy::Platform) };
            let a = solve_platform(&view, &project, &wt, &plain).unwrap();
            let b = solve_platform(&view, &project, &wt, &SolverConfig::new(Strategy::Platform)).unwrap();
            prop_assert_eq!(a, b);
            let la = solve_leader(view.len(), &project, |i| f.leader_view(i), &wt,
                &SolverConfig { bound_mode: BoundMode::None, ..SolverConfig::new(Strategy::Leader) }).unwrap();
            let lb = solve_leader(view.len(), &project, |i| f.leader_view(i), &wt, &SolverConfig::new(Strategy::Leader)).unwrap();
            prop_assert_eq!(la, lb);
        }

        #[test]
        fn argmax_invariant_to_cost_scaling(seed in any::<u64>(), factor in 0.1f64..50.0) {
            let f = Fixture::random(8, 4, seed);
            let project = Project::requiring(0, 4, &[0, 1, 2]).unwrap();
            let wt = f.weights();
            let view = f.view(Recruiter::Platform);
            let base = solve_platform(&view, &project, &wt, &SolverConfig::new(Strategy::Platform)).unwrap();
            let mut scaled = view.clone();
            scaled.costs.iter_mut().for_each(|c| *c *= factor);
            let mut swt = wt;
            swt.norm.cost *= factor;
            let other = solve_platform(&scaled, &project, &swt, &SolverConfig::new(Strategy::Platform)).unwrap();
            prop_assert_eq!(base.members, other.members);
        }

        #[test]
        fn leader_solution_is_feasible(n in 3usize..=9, seed in any::<u64>()) {
            let f = Fixture::random(n, 4, seed);
            let project = Project::requiring(0, 4, &[0, 3]).unwrap();
            let team = solve_leader(n, &project, |i| f.leader_view(i), &f.weights(), &SolverConfig::new(Strategy::Leader)).unwrap();
            team.validate(&project).unwrap();
            prop_assert!(team.leader.is_some());
            let leader = team.leader.unwrap();
            prop_assert!(team.worker_ids.contains(&leader));
            let li = f.workers.iter().position(|w| w.id == leader).unwrap();
            let oracle = enumerate_oracle(&f.leader_view(li).unwrap(), &project, &f.weights(), Some(li)).unwrap();
            prop_assert!((oracle.objective - team.objective).abs() < 1e-9);
        }
    }
}
