// SPDX-License-Identifier: Apache-2.0

//! Workers, projects, recruiter perception and the recruitment objective.

use std::collections::HashSet;
use std::io::{Read, Write};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::graph::{perceive_relations, PerceivedRelation, Recruiter, RelationModel};
use crate::seed::{self, tag};
use crate::{Error, Result};

pub type SkillId = usize;

/// Ordered skill names; the order fixes the genome layout of a run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkillCatalog {
    names: Vec<String>,
}

impl SkillCatalog {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        let mut seen = HashSet::new();
        for name in &names {
            if !seen.insert(name.as_str()) {
                return Err(Error::InvalidArgument(format!("duplicate skill {name:?}")));
            }
        }
        if names.is_empty() {
            return Err(Error::InvalidArgument("empty skill catalog".into()));
        }
        Ok(Self { names })
    }

    /// Generic catalog `skill_0 .. skill_{n-1}`.
    pub fn numbered(n: usize) -> Self {
        Self {
            names: (0..n).map(|k| format!("skill_{k}")).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn position(&self, name: &str) -> Option<SkillId> {
        self.names.iter().position(|n| n == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Worker {
    pub id: u64,
    pub job_category: String,
    pub tenure_days: u32,
    pub enter: i64,
    pub leave: i64,
    /// True skill levels `S_wk` in `[0, 1]`.
    pub skills: Vec<f64>,
    /// Demanded cost `C_wk ≥ 0` per skill.
    pub costs: Vec<f64>,
}

impl Worker {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(format!("worker {}: {m}", self.id)));
        if self.enter > self.leave {
            return bad("enter time after leave time".into());
        }
        if self.skills.len() != self.costs.len() {
            return bad("skill and cost vectors differ in length".into());
        }
        if let Some(s) = self.skills.iter().find(|s| !(0.0..=1.0).contains(*s)) {
            return bad(format!("skill level {s} outside [0, 1]"));
        }
        if let Some(c) = self.costs.iter().find(|c| !(**c >= 0.0)) {
            return bad(format!("negative cost {c}"));
        }
        Ok(())
    }

    /// Whether the worker's `[enter, leave]` window covers `window`.
    pub fn available_during(&self, window: (i64, i64)) -> bool {
        self.enter <= window.0 && self.leave >= window.1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Project {
    pub id: u64,
    pub title: String,
    pub description: String,
    /// `Q_p(k)` for every catalog skill.
    pub required: Vec<bool>,
    pub window: (i64, i64),
}

impl Project {
    pub fn new(id: u64, required: Vec<bool>) -> Result<Self> {
        if !required.iter().any(|&q| q) {
            return Err(Error::InvalidArgument(format!(
                "project {id} requires no skill"
            )));
        }
        Ok(Self {
            id,
            title: String::new(),
            description: String::new(),
            required,
            window: (0, 0),
        })
    }

    /// Project requiring exactly the listed skills out of `num_skills`.
    pub fn requiring(id: u64, num_skills: usize, skills: &[SkillId]) -> Result<Self> {
        let mut required = vec![false; num_skills];
        for &k in skills {
            *required.get_mut(k).ok_or_else(|| {
                Error::InvalidArgument(format!("skill {k} outside catalog of {num_skills}"))
            })? = true;
        }
        Self::new(id, required)
    }

    /// Required skills `S_p` in catalog order.
    pub fn required_skills(&self) -> Vec<SkillId> {
        self.required
            .iter()
            .enumerate()
            .filter_map(|(k, &q)| q.then_some(k))
            .collect()
    }

    pub fn team_size(&self) -> usize {
        self.required.iter().filter(|&&q| q).count()
    }
}

/// Workers whose availability window covers the project window.
pub fn available_workers<'a>(workers: &'a [Worker], project: &Project) -> Vec<&'a Worker> {
    workers
        .iter()
        .filter(|w| w.available_during(project.window))
        .collect()
}

/// How a recruiter's uncertainty `U^i_w` towards each worker is modelled.
///
/// The noise standard deviation is `σ0 · (1 - tenure_w / max_tenure)` for
/// the platform and `σ0 · (1 - R[i][w])` for a leader `i`; a leader knows
/// itself exactly. `U` is the variance `σ²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UncertaintyModel {
    pub sigma0: f64,
    pub max_tenure_days: f64,
}

impl Default for UncertaintyModel {
    fn default() -> Self {
        Self {
            sigma0: 0.3,
            max_tenure_days: 3650.0,
        }
    }
}

impl UncertaintyModel {
    pub fn noiseless() -> Self {
        Self {
            sigma0: 0.0,
            ..Self::default()
        }
    }

    /// Per-worker noise standard deviations for `recruiter` over `workers`,
    /// which must be listed in the same order as `relations`.
    pub fn sigmas(
        &self,
        workers: &[Worker],
        relations: &RelationModel,
        recruiter: Recruiter,
    ) -> Result<Vec<f64>> {
        match recruiter {
            Recruiter::Platform => Ok(workers
                .iter()
                .map(|w| {
                    let frac = (w.tenure_days as f64 / self.max_tenure_days).clamp(0.0, 1.0);
                    self.sigma0 * (1.0 - frac)
                })
                .collect()),
            Recruiter::Worker(id) => {
                let leader = relations
                    .ids()
                    .iter()
                    .position(|&x| x == id)
                    .ok_or(Error::UnknownRecruiter(id))?;
                Ok((0..workers.len())
                    .map(|w| {
                        if w == leader {
                            0.0
                        } else {
                            self.sigma0 * (1.0 - relations.get(leader, w))
                        }
                    })
                    .collect())
            }
        }
    }
}

/// Everything a recruiter knows about a candidate pool, indexed by pool
/// position.
#[derive(Debug, Clone, PartialEq)]
pub struct RecruiterView {
    pub recruiter: Recruiter,
    pub ids: Vec<u64>,
    pub num_skills: usize,
    /// `Ŝ^i_wk`, row-major `[worker][skill]`.
    pub perceived_skills: Vec<f64>,
    /// `U^i_w` (noise variance).
    pub uncertainty: Vec<f64>,
    /// `C_wk`, row-major `[worker][skill]`.
    pub costs: Vec<f64>,
    pub relations: PerceivedRelation,
}

impl RecruiterView {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    #[inline]
    pub fn skill(&self, w: usize, k: SkillId) -> f64 {
        self.perceived_skills[w * self.num_skills + k]
    }

    #[inline]
    pub fn cost(&self, w: usize, k: SkillId) -> f64 {
        self.costs[w * self.num_skills + k]
    }

    pub fn position(&self, id: u64) -> Option<usize> {
        self.ids.iter().position(|&x| x == id)
    }

    /// Same view with the relation perception replaced (e.g. true `R` for
    /// evaluation).
    pub fn with_relations(mut self, relations: PerceivedRelation) -> Self {
        self.relations = relations;
        self
    }
}

/// One skill-noise draw per (recruiter, worker).
pub fn skill_noise(recruiter: Recruiter, worker_id: u64, sigma: f64, seed: u64) -> f64 {
    if sigma == 0.0 {
        return 0.0;
    }
    let mut rng = seed::rng(seed, &[tag::SKILL_NOISE, recruiter.stream_key(), worker_id]);
    let z: f64 = rng.sample(StandardNormal);
    sigma * z
}

/// Builds `recruiter`'s view of `workers`. `relations` must list the same
/// workers in the same order.
pub fn perceive_skills(
    workers: &[Worker],
    relations: &RelationModel,
    recruiter: Recruiter,
    model: &UncertaintyModel,
    seed: u64,
) -> Result<RecruiterView> {
    if workers.is_empty() {
        return Err(Error::EmptyPool);
    }
    if relations.ids().len() != workers.len()
        || relations.ids().iter().zip(workers).any(|(&r, w)| r != w.id)
    {
        return Err(Error::DimensionMismatch(
            "relation model and worker list disagree".into(),
        ));
    }
    let num_skills = workers[0].skills.len();
    if workers.iter().any(|w| w.skills.len() != num_skills) {
        return Err(Error::DimensionMismatch("ragged skill vectors".into()));
    }
    let sigmas = model.sigmas(workers, relations, recruiter)?;
    let mut perceived_skills = Vec::with_capacity(workers.len() * num_skills);
    let mut costs = Vec::with_capacity(workers.len() * num_skills);
    for (w, &sigma) in workers.iter().zip(&sigmas) {
        let noise = skill_noise(recruiter, w.id, sigma, seed);
        perceived_skills.extend(w.skills.iter().map(|s| (s + noise).clamp(0.0, 1.0)));
        costs.extend_from_slice(&w.costs);
    }
    Ok(RecruiterView {
        recruiter,
        ids: workers.iter().map(|w| w.id).collect(),
        num_skills,
        perceived_skills,
        uncertainty: sigmas.iter().map(|s| s * s).collect(),
        costs,
        relations: perceive_relations(relations, &sigmas, recruiter, seed)?,
    })
}

/// Normalizers `S̄, Ū, C̄, R̄`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalizers {
    pub skill: f64,
    pub uncertainty: f64,
    pub cost: f64,
    pub relation: f64,
}

/// `S̄ = R̄ = 1`; `C̄` and `Ū` are the pool maxima (1 when the maximum is 0).
pub fn default_normalizers(view: &RecruiterView) -> Normalizers {
    let guard = |x: f64| if x > 0.0 { x } else { 1.0 };
    Normalizers {
        skill: 1.0,
        uncertainty: guard(view.uncertainty.iter().copied().fold(0.0, f64::max)),
        cost: guard(view.costs.iter().copied().fold(0.0, f64::max)),
        relation: 1.0,
    }
}

/// Strategy weights `η1..η4` and normalizers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveWeights {
    pub eta: [f64; 4],
    pub norm: Normalizers,
}

impl ObjectiveWeights {
    pub const UNIFORM: [f64; 4] = [0.25; 4];

    pub fn new(eta: [f64; 4], norm: Normalizers) -> Result<Self> {
        if eta.iter().any(|&e| !(e >= 0.0)) {
            return Err(Error::InvalidArgument(format!("negative weight in {eta:?}")));
        }
        if (eta.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!("weights {eta:?} do not sum to 1")));
        }
        let n = norm;
        if [n.skill, n.uncertainty, n.cost, n.relation]
            .iter()
            .any(|&x| !(x > 0.0))
        {
            return Err(Error::InvalidArgument(format!("non-positive normalizer in {n:?}")));
        }
        Ok(Self { eta, norm })
    }

    /// Uniform weights with the pool's default normalizers.
    pub fn uniform_for(view: &RecruiterView) -> Self {
        Self {
            eta: Self::UNIFORM,
            norm: default_normalizers(view),
        }
    }

    /// `η1 Ŝ/S̄ − η2 U/Ū − η3 C/C̄`: the part of a worker's efficiency that
    /// does not depend on the rest of the team.
    #[inline]
    pub fn unary(&self, view: &RecruiterView, w: usize, k: SkillId) -> f64 {
        self.eta[0] * view.skill(w, k) / self.norm.skill
            - self.eta[1] * view.uncertainty[w] / self.norm.uncertainty
            - self.eta[2] * view.cost(w, k) / self.norm.cost
    }
}

/// Efficiency `E^i_{w,k}` of pool worker `w` contributing skill `k` to a
/// team whose members are `team` (pool positions, `w` included).
pub fn efficiency(
    w: usize,
    k: SkillId,
    team: &[usize],
    view: &RecruiterView,
    weights: &ObjectiveWeights,
) -> f64 {
    let unary = weights.unary(view, w, k);
    if team.len() <= 1 {
        return unary;
    }
    let rel: f64 = team
        .iter()
        .filter(|&&o| o != w)
        .map(|&o| view.relations.get(w, o) / weights.norm.relation)
        .sum();
    unary + weights.eta[3] / (team.len() - 1) as f64 * rel
}

/// A recruited team. `members[s]` is the pool position contributing the
/// `s`-th required skill (catalog order).
#[derive(Debug, Clone, PartialEq)]
pub struct Team {
    pub skills: Vec<SkillId>,
    pub members: Vec<usize>,
    pub worker_ids: Vec<u64>,
    pub leader: Option<u64>,
    pub objective: f64,
}

impl Team {
    /// Checks the structural invariants: one distinct worker per required
    /// skill, leader (if any) among the members.
    pub fn validate(&self, project: &Project) -> Result<()> {
        check_assignment(&self.members, project)?;
        if self.skills != project.required_skills() {
            return Err(Error::InfeasibleTeam("skills differ from the project's".into()));
        }
        if let Some(l) = self.leader {
            if !self.worker_ids.contains(&l) {
                return Err(Error::InfeasibleTeam(format!("leader {l} holds no skill")));
            }
        }
        Ok(())
    }
}

fn check_assignment(members: &[usize], project: &Project) -> Result<()> {
    let need = project.team_size();
    if members.len() != need {
        return Err(Error::InfeasibleTeam(format!(
            "{} members for {need} required skills",
            members.len()
        )));
    }
    let mut seen = HashSet::new();
    for &m in members {
        if !seen.insert(m) {
            return Err(Error::InfeasibleTeam(format!("worker {m} holds two skills")));
        }
    }
    Ok(())
}

/// Objective of the recruitment problem for the assignment
/// `members[s] → required_skills[s]`.
///
/// Skill, uncertainty and cost terms are summed over assigned pairs; the
/// relation term is `η4/(|S_p|−1)` times the sum of `R̂/R̄` over ordered
/// pairs of distinct members (both orientations counted), and vanishes for
/// single-skill projects.
pub fn team_objective(
    members: &[usize],
    project: &Project,
    view: &RecruiterView,
    weights: &ObjectiveWeights,
) -> Result<f64> {
    check_assignment(members, project)?;
    if let Some(&m) = members.iter().find(|&&m| m >= view.len()) {
        return Err(Error::InfeasibleTeam(format!("pool position {m} out of range")));
    }
    let skills = project.required_skills();
    let unary: f64 = members
        .iter()
        .zip(&skills)
        .map(|(&w, &k)| weights.unary(view, w, k))
        .sum();
    let n = members.len();
    if n == 1 {
        return Ok(unary);
    }
    let mut pairs = 0.0;
    for &a in members {
        for &b in members {
            if a != b {
                pairs += view.relations.get(a, b) / weights.norm.relation;
            }
        }
    }
    Ok(unary + weights.eta[3] / (n - 1) as f64 * pairs)
}

/// Builds a [`Team`] record, evaluating the objective.
pub fn make_team(
    members: Vec<usize>,
    leader: Option<u64>,
    project: &Project,
    view: &RecruiterView,
    weights: &ObjectiveWeights,
) -> Result<Team> {
    let objective = team_objective(&members, project, view, weights)?;
    Ok(Team {
        skills: project.required_skills(),
        worker_ids: members.iter().map(|&m| view.ids[m]).collect(),
        members,
        leader,
        objective,
    })
}

/// Precomputed per-(worker, slot) unary terms and scaled pair terms, used
/// by the solvers' inner loops.
#[derive(Debug, Clone)]
pub struct Scorer {
    pub n: usize,
    pub slots: Vec<SkillId>,
    /// `unary[w * slots + s]`.
    pub unary: Vec<f64>,
    /// `pair[w * n + v] = η4/(|S_p|−1) · R̂_wv / R̄` (0 on the diagonal and
    /// for single-skill projects).
    pub pair: Vec<f64>,
}

impl Scorer {
    pub fn new(view: &RecruiterView, project: &Project, weights: &ObjectiveWeights) -> Self {
        let slots = project.required_skills();
        let n = view.len();
        let mut unary = Vec::with_capacity(n * slots.len());
        for w in 0..n {
            for &k in &slots {
                unary.push(weights.unary(view, w, k));
            }
        }
        let scale = if slots.len() > 1 {
            weights.eta[3] / ((slots.len() - 1) as f64 * weights.norm.relation)
        } else {
            0.0
        };
        let mut pair = vec![0.0; n * n];
        for a in 0..n {
            for b in 0..n {
                if a != b {
                    pair[a * n + b] = scale * view.relations.get(a, b);
                }
            }
        }
        Self {
            n,
            slots,
            unary,
            pair,
        }
    }

    #[inline]
    pub fn unary(&self, w: usize, slot: usize) -> f64 {
        self.unary[w * self.slots.len() + slot]
    }

    #[inline]
    pub fn pair(&self, a: usize, b: usize) -> f64 {
        self.pair[a * self.n + b]
    }

    /// Objective of a slot-ordered assignment (members assumed distinct).
    pub fn objective(&self, members: &[usize]) -> f64 {
        let mut total = 0.0;
        for (s, &w) in members.iter().enumerate() {
            total += self.unary(w, s);
            for &v in members {
                total += self.pair(w, v);
            }
        }
        total
    }
}

const WORKER_FIXED_COLUMNS: [&str; 5] = ["worker_id", "job_category", "tenure_days", "enter", "leave"];

/// Writes the worker attribute CSV
/// (`worker_id,job_category,tenure_days,enter,leave,skill_*,cost_*`).
pub fn write_workers_csv<W: Write>(out: W, workers: &[Worker], num_skills: usize) -> Result<()> {
    let mut wr = csv::Writer::from_writer(out);
    let mut header: Vec<String> = WORKER_FIXED_COLUMNS.iter().map(|s| s.to_string()).collect();
    header.extend((0..num_skills).map(|k| format!("skill_{k}")));
    header.extend((0..num_skills).map(|k| format!("cost_{k}")));
    let csv_err = |e: csv::Error| Error::InvalidArgument(format!("csv write: {e}"));
    wr.write_record(&header).map_err(csv_err)?;
    for w in workers {
        let mut row = vec![
            w.id.to_string(),
            w.job_category.clone(),
            w.tenure_days.to_string(),
            w.enter.to_string(),
            w.leave.to_string(),
        ];
        row.extend(w.skills.iter().map(|s| s.to_string()));
        row.extend(w.costs.iter().map(|c| c.to_string()));
        wr.write_record(&row).map_err(csv_err)?;
    }
    wr.flush()
        .map_err(|e| Error::io("<worker csv>", e))
}

/// Reads the worker attribute CSV; returns the workers and the number of
/// skill columns.
pub fn read_workers_csv<R: Read>(input: R, source: &std::path::Path) -> Result<(Vec<Worker>, usize)> {
    let mut rd = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
    let parse_err = |line: usize, message: String| Error::Parse {
        path: source.to_path_buf(),
        line,
        message,
    };
    let header = rd.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
    let cols: Vec<&str> = header.iter().collect();
    if cols.len() < 5 || cols[..5] != WORKER_FIXED_COLUMNS {
        return Err(parse_err(1, format!("unexpected header {cols:?}")));
    }
    let num_skills = (cols.len() - 5) / 2;
    if cols.len() != 5 + 2 * num_skills || num_skills == 0 {
        return Err(parse_err(1, "skill and cost columns do not pair up".into()));
    }
    for k in 0..num_skills {
        if cols[5 + k] != format!("skill_{k}") || cols[5 + num_skills + k] != format!("cost_{k}") {
            return Err(parse_err(1, format!("unexpected header {cols:?}")));
        }
    }
    let mut workers = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| parse_err(line, e.to_string()))?;
        let field = |j: usize| rec.get(j).unwrap_or("");
        let num = |j: usize| -> Result<f64> {
            field(j)
                .parse::<f64>()
                .map_err(|_| parse_err(line, format!("bad number {:?} in column {}", field(j), cols[j])))
        };
        let int = |j: usize| -> Result<i64> {
            field(j)
                .parse::<i64>()
                .map_err(|_| parse_err(line, format!("bad integer {:?} in column {}", field(j), cols[j])))
        };
        let worker = Worker {
            id: int(0)? as u64,
            job_category: field(1).to_string(),
            tenure_days: int(2)? as u32,
            enter: int(3)?,
            leave: int(4)?,
            skills: (0..num_skills).map(|k| num(5 + k)).collect::<Result<_>>()?,
            costs: (0..num_skills)
                .map(|k| num(5 + num_skills + k))
                .collect::<Result<_>>()?,
        };
        worker
            .validate()
            .map_err(|e| parse_err(line, e.to_string()))?;
        workers.push(worker);
    }
    Ok((workers, num_skills))
}
