//! Couples the delivery net with each individual's health net.
//!
//! A delivery firing engages individuals through `U[k]` (DOFs x
//! individuals). Transformation DOFs induce health events through the
//! feasibility matrix `Lambda_F` (health events x transformation processes):
//! the induced firing vector `u_l` must satisfy
//! `Lambda_F^T u_l = A_F U e_l`.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::delivery::{cumulative_cost, CostSeries, DeliveryNet, FiringKind, FiringRecord, Marking, NetError};
use crate::health::{HealthError, HealthEventKind, HealthMarking, HealthNet};
use crate::matrix::{BoolMatrix, ShapeError};
use crate::rational::{Money, Time};
use crate::structural::StructuralModel;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CoordinationError {
    #[error("infeasible care action: no enabled health event realizes process `{process}`")]
    Infeasible { process: String },
    #[error("ambiguous care action: process `{process}` could realize {events:?}")]
    Ambiguous { process: String, events: Vec<String> },
    #[error("coupling residual is nonzero: {residual:?}")]
    Residual { residual: Vec<i64> },
    #[error("transition {psi} engages {engaged} individuals, capacity {capacity}")]
    Capacity { psi: usize, engaged: u64, capacity: u64 },
    #[error("health event `{event}` is tagged stochastic but has feasibility links")]
    StochasticLinked { event: String },
    #[error("induced health event `{event}` has no realizing transformation process")]
    Unrealized { event: String },
    #[error("individual is at {found}, transition starts at place {expected}")]
    NotAtOrigin { expected: usize, found: String },
    #[error("no enabled candidate among {candidates:?}")]
    NoCandidate { candidates: Vec<String> },
    #[error("several enabled candidates: {candidates:?}")]
    SeveralCandidates { candidates: Vec<String> },
    #[error("event `{event}` is not stochastic")]
    NotStochastic { event: String },
    #[error("schedule entry {index} is out of time order")]
    Unsorted { index: usize },
    #[error("dimension mismatch: {0}")]
    Dimensions(String),
    #[error(transparent)]
    Shape(#[from] ShapeError),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Health(#[from] HealthError),
}

/// `Lambda_F` for one individual.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityMatrix {
    matrix: BoolMatrix,
}

impl FeasibilityMatrix {
    /// `matrix` is health events x transformation processes.
    pub fn new(matrix: BoolMatrix, net: &HealthNet) -> Result<Self, CoordinationError> {
        if matrix.rows() != net.events().len() {
            return Err(CoordinationError::Dimensions(format!(
                "feasibility has {} rows for {} health events",
                matrix.rows(),
                net.events().len()
            )));
        }
        for (x, e) in net.events().iter().enumerate() {
            let links = matrix.row_ones(x).count();
            match e.kind {
                HealthEventKind::Stochastic if links > 0 => {
                    return Err(CoordinationError::StochasticLinked { event: e.name.clone() })
                }
                HealthEventKind::Induced if links == 0 => {
                    return Err(CoordinationError::Unrealized { event: e.name.clone() })
                }
                _ => {}
            }
        }
        Ok(FeasibilityMatrix { matrix })
    }

    pub fn matrix(&self) -> &BoolMatrix {
        &self.matrix
    }

    /// Health events realizable by transformation process `j` (row of
    /// `P_F`).
    pub fn events_for(&self, j: usize) -> Vec<usize> {
        self.matrix.col_ones(j).collect()
    }
}

/// `A_F`: transformation processes x DOFs.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformSelector {
    matrix: BoolMatrix,
    processes: Vec<usize>,
    names: Vec<String>,
}

impl TransformSelector {
    pub fn from_model(model: &StructuralModel) -> Self {
        let processes = model.transformation_processes();
        let mut matrix = BoolMatrix::zeros(processes.len(), model.dof_count());
        for (psi, d) in model.dofs().iter().enumerate() {
            if let Some(j) = processes.iter().position(|&p| p == d.process) {
                matrix.set(j, psi, true).expect("in range");
            }
        }
        let names = processes.iter().map(|&p| model.processes()[p].name.clone()).collect();
        TransformSelector {
            matrix,
            processes,
            names,
        }
    }

    pub fn matrix(&self) -> &BoolMatrix {
        &self.matrix
    }

    /// Process ids in `P_F` order.
    pub fn processes(&self) -> &[usize] {
        &self.processes
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn position(&self, process: usize) -> Option<usize> {
        self.processes.iter().position(|&p| p == process)
    }
}

/// `U[k]`: DOFs x individuals.
#[derive(Debug, Clone, PartialEq)]
pub struct IndividualFiringMatrix {
    matrix: BoolMatrix,
}

impl IndividualFiringMatrix {
    pub fn zeros(dofs: usize, individuals: usize) -> Self {
        IndividualFiringMatrix {
            matrix: BoolMatrix::zeros(dofs, individuals),
        }
    }

    pub fn engage(&mut self, psi: usize, individual: usize) -> Result<&mut Self, CoordinationError> {
        self.matrix.set(psi, individual, true)?;
        Ok(self)
    }

    pub fn matrix(&self) -> &BoolMatrix {
        &self.matrix
    }
}

/// `U- = U 1`, checked against per-transition capacity.
pub fn system_firing(u: &IndividualFiringMatrix, capacities: &[u64]) -> Result<Vec<u64>, CoordinationError> {
    let m = u.matrix();
    if capacities.len() != m.rows() {
        return Err(CoordinationError::Dimensions("one capacity per DOF".into()));
    }
    (0..m.rows())
        .map(|psi| {
            let engaged = m.row_ones(psi).count() as u64;
            if engaged > capacities[psi] {
                Err(CoordinationError::Capacity {
                    psi,
                    engaged,
                    capacity: capacities[psi],
                })
            } else {
                Ok(engaged)
            }
        })
        .collect()
}

/// An induced health firing and the coupling residual it leaves.
#[derive(Debug, Clone, PartialEq)]
pub struct Induction {
    /// Binary indicator over health events.
    pub firing: Vec<u8>,
    /// `Lambda_F^T u_l - A_F U e_l`, one entry per transformation process.
    pub residual: Vec<i64>,
}

impl Induction {
    pub fn fired(&self) -> Option<usize> {
        self.firing.iter().position(|&b| b == 1)
    }

    pub fn residual_is_zero(&self) -> bool {
        self.residual.iter().all(|&r| r == 0)
    }
}

/// `A_F U e_l`.
pub fn transformation_demand(selector: &TransformSelector, u: &IndividualFiringMatrix, individual: usize) -> Vec<i64> {
    let a = selector.matrix();
    (0..a.rows())
        .map(|j| a.row_ones(j).filter(|&psi| u.matrix().get(psi, individual)).count() as i64)
        .collect()
}

/// `Lambda_F^T u`.
pub fn realized_processes(feasibility: &FeasibilityMatrix, firing: &[u8]) -> Vec<i64> {
    let m = feasibility.matrix();
    (0..m.cols())
        .map(|j| m.col_ones(j).map(|x| i64::from(firing[x])).sum())
        .collect()
}

/// Picks the health-event firing satisfying the coupling equation. When a
/// process realizes several events, the one enabled under `q` is taken.
pub fn induce_health_firing(
    feasibility: &FeasibilityMatrix,
    selector: &TransformSelector,
    u: &IndividualFiringMatrix,
    individual: usize,
    net: &HealthNet,
    q: &HealthMarking,
) -> Result<Induction, CoordinationError> {
    if feasibility.matrix().cols() != selector.matrix().rows() {
        return Err(CoordinationError::Dimensions(
            "feasibility and selector disagree on transformation processes".into(),
        ));
    }
    let demand = transformation_demand(selector, u, individual);
    let mut firing = vec![0u8; net.events().len()];
    for (j, &d) in demand.iter().enumerate() {
        if d == 0 {
            continue;
        }
        let enabled: Vec<usize> = feasibility
            .events_for(j)
            .into_iter()
            .filter(|&x| net.is_enabled(q, x))
            .collect();
        match enabled.as_slice() {
            [] => {
                return Err(CoordinationError::Infeasible {
                    process: selector.names()[j].clone(),
                })
            }
            [x] => firing[*x] = 1,
            many => {
                return Err(CoordinationError::Ambiguous {
                    process: selector.names()[j].clone(),
                    events: many.iter().map(|&x| net.events()[x].name.clone()).collect(),
                })
            }
        }
    }
    let residual = residual_of(feasibility, &firing, &demand);
    Ok(Induction { firing, residual })
}

fn residual_of(feasibility: &FeasibilityMatrix, firing: &[u8], demand: &[i64]) -> Vec<i64> {
    realized_processes(feasibility, firing)
        .iter()
        .zip(demand)
        .map(|(a, b)| a - b)
        .collect()
}

/// One individual in a co-simulation.
#[derive(Debug, Clone)]
pub struct Individual {
    pub id: String,
    pub net: HealthNet,
    pub feasibility: FeasibilityMatrix,
    pub initial: HealthMarking,
    pub initial_place: usize,
}

/// Entries of the merged schedule; only starts are listed, completions
/// follow from durations.
#[derive(Debug, Clone, PartialEq)]
pub enum ScheduleEntry {
    Delivery {
        time: Time,
        psi: usize,
        individual: usize,
        label: Option<String>,
        /// Output state realizing the induced event's branch in replay.
        outcome: Option<usize>,
    },
    Health {
        time: Time,
        individual: usize,
        /// Stochastic events, exactly one of which must be enabled.
        candidates: Vec<usize>,
        outcome: Option<usize>,
    },
}

impl ScheduleEntry {
    pub fn time(&self) -> Time {
        match self {
            ScheduleEntry::Delivery { time, .. } | ScheduleEntry::Health { time, .. } => *time,
        }
    }

    pub fn individual(&self) -> usize {
        match self {
            ScheduleEntry::Delivery { individual, .. } | ScheduleEntry::Health { individual, .. } => *individual,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Branches follow schedule annotations; unannotated events split mass.
    Replay,
    /// Every branching event draws its branch from a seeded generator.
    Sample { seed: u64 },
}

/// A health event firing recorded in the trace.
#[derive(Debug, Clone, PartialEq)]
pub struct HealthStep {
    pub individual: usize,
    pub event: usize,
    pub kind: FiringKind,
    pub mass: f64,
    pub branch: Option<usize>,
    pub induced_by: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyncStep {
    /// Shared event index `k`, starting at 1.
    pub index: usize,
    pub time: Time,
    pub individual: usize,
    pub delivery: Option<FiringRecord>,
    pub label: String,
    pub health: Option<HealthStep>,
    /// Coupling residual for delivery steps that engage an individual.
    pub residual: Option<Vec<i64>>,
    pub delivery_marking: Marking,
    pub health_markings: Vec<HealthMarking>,
    pub cost: Money,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyncTrace {
    pub initial_marking: Marking,
    pub initial_health: Vec<HealthMarking>,
    pub steps: Vec<SyncStep>,
}

impl SyncTrace {
    pub fn delivery_history(&self) -> Vec<FiringRecord> {
        self.steps.iter().filter_map(|s| s.delivery).collect()
    }

    pub fn cost_series(&self, costs: &[Money]) -> CostSeries {
        cumulative_cost(costs, &self.delivery_history())
    }

    pub fn final_marking(&self) -> &Marking {
        self.steps.last().map_or(&self.initial_marking, |s| &s.delivery_marking)
    }

    pub fn final_health(&self) -> &[HealthMarking] {
        self.steps.last().map_or(&self.initial_health, |s| &s.health_markings)
    }

    /// Per-individual outcome at t=0 and after every step.
    pub fn outcome_series(&self, individuals: &[Individual]) -> Vec<(Time, usize, f64)> {
        let mut out = Vec::new();
        let mut push = |time: Time, markings: &[HealthMarking]| {
            for (l, ind) in individuals.iter().enumerate() {
                let h = ind.net.outcome(&markings[l]).expect("validated sizes");
                out.push((time, l, h));
            }
        };
        push(Time::ZERO, &self.initial_health);
        for s in &self.steps {
            push(s.time, &s.health_markings);
        }
        out
    }
}

/// Failure during co-simulation with the offending step's context.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("at t={time}, individual `{individual}`{}{}: {source}",
    .psi.map(|p| format!(", transition {p}")).unwrap_or_default(),
    .event.as_ref().map(|e| format!(", event `{e}`")).unwrap_or_default())]
pub struct CosimError {
    pub time: Time,
    pub individual: String,
    pub psi: Option<usize>,
    pub event: Option<String>,
    pub source: Box<CoordinationError>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Pending {
    Delivery {
        entry: usize,
        psi: usize,
        individual: usize,
        induced: Option<usize>,
        outcome: Option<usize>,
    },
    Health {
        individual: usize,
        event: usize,
        outcome: Option<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Queued {
    Complete(Pending),
    Start(usize),
}

impl Queued {
    /// Completions run before starts at the same instant.
    fn rank(&self) -> u8 {
        match self {
            Queued::Complete(_) => 0,
            Queued::Start(_) => 1,
        }
    }
}

/// Runs the delivery net and every health net on one clock.
pub fn cosimulate(
    net: &DeliveryNet,
    selector: &TransformSelector,
    individuals: &[Individual],
    schedule: &[ScheduleEntry],
    mode: Mode,
) -> Result<SyncTrace, CosimError> {
    Cosim::new(net, selector, individuals, mode).run(schedule)
}

struct Cosim<'a> {
    net: &'a DeliveryNet,
    selector: &'a TransformSelector,
    individuals: &'a [Individual],
    rng: Option<ChaCha8Rng>,
    marking: Marking,
    health: Vec<HealthMarking>,
    location: Vec<Option<usize>>,
    cost: Money,
    steps: Vec<SyncStep>,
}

impl<'a> Cosim<'a> {
    fn new(net: &'a DeliveryNet, selector: &'a TransformSelector, individuals: &'a [Individual], mode: Mode) -> Self {
        let mut places = vec![0u64; net.place_count()];
        for ind in individuals {
            places[ind.initial_place] += 1;
        }
        Cosim {
            net,
            selector,
            individuals,
            rng: match mode {
                Mode::Replay => None,
                Mode::Sample { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
            },
            marking: Marking::at_rest(places, net.transition_count()),
            health: individuals.iter().map(|i| i.initial.clone()).collect(),
            location: individuals.iter().map(|i| Some(i.initial_place)).collect(),
            cost: Money::ZERO,
            steps: Vec::new(),
        }
    }

    fn run(mut self, schedule: &[ScheduleEntry]) -> Result<SyncTrace, CosimError> {
        let initial_marking = self.marking.clone();
        let initial_health = self.health.clone();
        let mut queue = BinaryHeap::new();
        for (seq, entry) in schedule.iter().enumerate() {
            if seq > 0 && entry.time() < schedule[seq - 1].time() || entry.time().is_negative() {
                return Err(CosimError {
                    time: entry.time(),
                    individual: self.id(entry.individual()),
                    psi: None,
                    event: None,
                    source: Box::new(CoordinationError::Unsorted { index: seq }),
                });
            }
            let item = Queued::Start(seq);
            queue.push(Reverse((entry.time(), item.rank(), seq, item)));
        }
        // Completions get sequence numbers after all schedule entries so
        // that equal-time completions keep the order they were started in.
        let mut next_seq = schedule.len();
        while let Some(Reverse((time, _, _, item))) = queue.pop() {
            let follow = match item {
                Queued::Start(i) => self.start(time, i, &schedule[i])?,
                Queued::Complete(p) => {
                    self.complete(time, p, schedule)?;
                    None
                }
            };
            if let Some((due, pending)) = follow {
                let item = Queued::Complete(pending);
                queue.push(Reverse((due, item.rank(), next_seq, item)));
                next_seq += 1;
            }
        }
        Ok(SyncTrace {
            initial_marking,
            initial_health,
            steps: self.steps,
        })
    }

    fn id(&self, l: usize) -> String {
        self.individuals
            .get(l)
            .map_or_else(|| format!("#{l}"), |i| i.id.clone())
    }

    fn context(
        &self,
        time: Time,
        l: usize,
        psi: Option<usize>,
        event: Option<String>,
    ) -> impl Fn(CoordinationError) -> CosimError + '_ {
        move |source| CosimError {
            time,
            individual: self.id(l),
            psi,
            event: event.clone(),
            source: Box::new(source),
        }
    }

    fn check_individual(&self, time: Time, l: usize) -> Result<(), CosimError> {
        if l >= self.individuals.len() {
            return Err(self.context(time, l, None, None)(CoordinationError::Dimensions(
                format!("unknown individual {l}"),
            )));
        }
        Ok(())
    }

    fn branch(&mut self, ind: &Individual, event: usize, outcome: Option<usize>) -> Option<usize> {
        match &mut self.rng {
            None => outcome,
            Some(rng) if ind.net.outputs(event).len() > 1 => Some(ind.net.sample_branch(event, rng)),
            Some(_) => None,
        }
    }

    fn record(
        &mut self,
        time: Time,
        individual: usize,
        delivery: Option<FiringRecord>,
        label: String,
        health: Option<HealthStep>,
        residual: Option<Vec<i64>>,
    ) {
        self.steps.push(SyncStep {
            index: self.steps.len() + 1,
            time,
            individual,
            delivery,
            label,
            health,
            residual,
            delivery_marking: self.marking.clone(),
            health_markings: self.health.clone(),
            cost: self.cost,
        });
    }

    fn start(&mut self, time: Time, seq: usize, entry: &ScheduleEntry) -> Result<Option<(Time, Pending)>, CosimError> {
        let l = entry.individual();
        self.check_individual(time, l)?;
        let individuals = self.individuals;
        let ind = &individuals[l];
        match entry {
            ScheduleEntry::Delivery {
                psi, label, outcome, ..
            } => {
                let psi = *psi;
                let ctx = self.context(time, l, Some(psi), label.clone());
                if psi >= self.net.transition_count() {
                    return Err(ctx(NetError::UnknownTransition {
                        psi,
                        count: self.net.transition_count(),
                    }
                    .into()));
                }
                let origin = self.net.origin(psi);
                if self.location[l] != Some(origin) {
                    let found = match self.location[l] {
                        Some(p) => format!("place {p}"),
                        None => "a transition".into(),
                    };
                    return Err(ctx(CoordinationError::NotAtOrigin {
                        expected: origin,
                        found,
                    }));
                }
                let mut u = IndividualFiringMatrix::zeros(self.net.transition_count(), self.individuals.len());
                u.engage(psi, l).map_err(&ctx)?;
                let u_minus = system_firing(&u, &self.net.params().capacities).map_err(&ctx)?;
                let zero = vec![0u64; u_minus.len()];
                let marking = self
                    .net
                    .step(&self.marking, &u_minus, &zero)
                    .map_err(|e| ctx(e.into()))?;
                if marking.transitions[psi] > self.net.capacity(psi) {
                    return Err(ctx(CoordinationError::Capacity {
                        psi,
                        engaged: marking.transitions[psi],
                        capacity: self.net.capacity(psi),
                    }));
                }
                let induction = induce_health_firing(&ind.feasibility, self.selector, &u, l, &ind.net, &self.health[l])
                    .map_err(&ctx)?;
                if !induction.residual_is_zero() {
                    return Err(ctx(CoordinationError::Residual {
                        residual: induction.residual,
                    }));
                }
                let induced = induction.fired();
                let mut health_step = None;
                let mut health = self.health[l].clone();
                if let Some(x) = induced {
                    let (next, mass) = ind.net.start(&health, x).map_err(|e| ctx(e.into()))?;
                    health = next;
                    health_step = Some(HealthStep {
                        individual: l,
                        event: x,
                        kind: FiringKind::Start,
                        mass,
                        branch: None,
                        induced_by: Some(psi),
                    });
                }
                drop(ctx);
                self.marking = marking;
                self.health[l] = health;
                self.location[l] = None;
                let record = FiringRecord {
                    psi,
                    kind: FiringKind::Start,
                    time,
                };
                let text = label
                    .clone()
                    .unwrap_or_else(|| self.net.transitions()[psi].label.clone());
                self.record(time, l, Some(record), text, health_step, Some(induction.residual));
                Ok(Some((
                    time + self.net.duration(psi),
                    Pending::Delivery {
                        entry: seq,
                        psi,
                        individual: l,
                        induced,
                        outcome: *outcome,
                    },
                )))
            }
            ScheduleEntry::Health {
                candidates, outcome, ..
            } => {
                let names: Vec<String> = candidates
                    .iter()
                    .map(|&x| {
                        ind.net
                            .events()
                            .get(x)
                            .map_or_else(|| format!("#{x}"), |e| e.name.clone())
                    })
                    .collect();
                let ctx = self.context(time, l, None, Some(names.join(" | ")));
                if candidates.iter().any(|&x| x >= ind.net.events().len()) {
                    return Err(ctx(CoordinationError::Dimensions("unknown health event".into())));
                }
                for &x in candidates {
                    if ind.net.events()[x].kind != HealthEventKind::Stochastic {
                        return Err(ctx(CoordinationError::NotStochastic {
                            event: ind.net.events()[x].name.clone(),
                        }));
                    }
                }
                let enabled: Vec<usize> = candidates
                    .iter()
                    .copied()
                    .filter(|&x| ind.net.is_enabled(&self.health[l], x))
                    .collect();
                let x = match enabled.as_slice() {
                    [x] => *x,
                    [] => return Err(ctx(CoordinationError::NoCandidate { candidates: names })),
                    _ => return Err(ctx(CoordinationError::SeveralCandidates { candidates: names })),
                };
                let (next, mass) = ind.net.start(&self.health[l], x).map_err(|e| ctx(e.into()))?;
                drop(ctx);
                self.health[l] = next;
                let step = HealthStep {
                    individual: l,
                    event: x,
                    kind: FiringKind::Start,
                    mass,
                    branch: None,
                    induced_by: None,
                };
                self.record(time, l, None, ind.net.events()[x].name.clone(), Some(step), None);
                Ok(Some((
                    time + ind.net.duration(x),
                    Pending::Health {
                        individual: l,
                        event: x,
                        outcome: *outcome,
                    },
                )))
            }
        }
    }

    fn complete(&mut self, time: Time, pending: Pending, schedule: &[ScheduleEntry]) -> Result<(), CosimError> {
        match pending {
            Pending::Delivery {
                entry,
                psi,
                individual: l,
                induced,
                outcome,
            } => {
                let individuals = self.individuals;
                let ind = &individuals[l];
                let ctx = self.context(time, l, Some(psi), induced.map(|x| ind.net.events()[x].name.clone()));
                let marking = self
                    .net
                    .fire(&self.marking, psi, FiringKind::Complete)
                    .map_err(|e| ctx(e.into()))?;
                // Completion side of the coupling: the same DOF/individual
                // pair must account for the completing health event.
                let mut u = IndividualFiringMatrix::zeros(self.net.transition_count(), self.individuals.len());
                u.engage(psi, l).map_err(&ctx)?;
                let demand = transformation_demand(self.selector, &u, l);
                let mut firing = vec![0u8; ind.net.events().len()];
                if let Some(x) = induced {
                    firing[x] = 1;
                }
                let residual = residual_of(&ind.feasibility, &firing, &demand);
                if residual.iter().any(|&r| r != 0) {
                    return Err(ctx(CoordinationError::Residual { residual }));
                }
                drop(ctx);
                let mut health_step = None;
                if let Some(x) = induced {
                    let branch = self.branch(ind, x, outcome);
                    let mass = self.health[l].events[x];
                    let next = ind.net.complete(&self.health[l], x, branch).map_err(|e| {
                        self.context(time, l, Some(psi), Some(ind.net.events()[x].name.clone()))(e.into())
                    })?;
                    self.health[l] = next;
                    health_step = Some(HealthStep {
                        individual: l,
                        event: x,
                        kind: FiringKind::Complete,
                        mass,
                        branch,
                        induced_by: Some(psi),
                    });
                }
                self.marking = marking;
                self.cost += self.net.costs()[psi];
                self.location[l] = Some(self.net.destination(psi));
                let record = FiringRecord {
                    psi,
                    kind: FiringKind::Complete,
                    time,
                };
                let label = match &schedule[entry] {
                    ScheduleEntry::Delivery { label: Some(text), .. } => text.clone(),
                    _ => self.net.transitions()[psi].label.clone(),
                };
                self.record(time, l, Some(record), label, health_step, Some(residual));
            }
            Pending::Health {
                individual: l,
                event: x,
                outcome,
            } => {
                let individuals = self.individuals;
                let ind = &individuals[l];
                let branch = self.branch(ind, x, outcome);
                let mass = self.health[l].events[x];
                let name = ind.net.events()[x].name.clone();
                let next = ind
                    .net
                    .complete(&self.health[l], x, branch)
                    .map_err(|e| self.context(time, l, None, Some(name.clone()))(e.into()))?;
                self.health[l] = next;
                let step = HealthStep {
                    individual: l,
                    event: x,
                    kind: FiringKind::Complete,
                    mass,
                    branch,
                    induced_by: None,
                };
                self.record(time, l, None, name, Some(step), None);
            }
        }
        Ok(())
    }
}
