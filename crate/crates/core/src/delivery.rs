//! Timed Petri net of the care delivery system.
//!
//! Places are buffers (or aggregates of buffers) and transitions are the
//! structural degrees of freedom. The marking splits into tokens resting at
//! places (`Q_S`) and tokens inside a firing transition (`Q_E`); a start
//! event moves a token into its transition and the matching complete event
//! releases it at the destination `D[psi]` time units later.

use std::fmt;

use crate::matrix::{BoolMatrix, DenseMatrix};
use crate::rational::{Money, Time};
use crate::structural::{AggregationMatrix, Dof, ResourceClass, StructuralModel};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NetError {
    #[error("transition {psi} not enabled: place {place} would go negative")]
    NotEnabled { psi: usize, place: usize },
    #[error("completion without start for transition {psi}")]
    CompletionWithoutStart { psi: usize },
    #[error("transition {psi} exceeds its capacity of {capacity}")]
    CapacityExceeded { psi: usize, capacity: u64 },
    #[error("transition index {psi} out of range ({count} transitions)")]
    UnknownTransition { psi: usize, count: usize },
    #[error("firing vector has length {found}, expected {expected}")]
    VectorLength { expected: usize, found: usize },
    #[error("incidence column {psi} of {which} sums to {sum}, expected 1")]
    ColumnSum { which: &'static str, psi: usize, sum: u64 },
    #[error("net dimensions disagree: {0}")]
    Dimensions(String),
    #[error("schedule is not time-ordered at entry {index}")]
    Unsorted { index: usize },
    #[error("negative time at schedule entry {index}")]
    NegativeTime { index: usize },
    #[error("start of transition {psi} at {time} has no matching completion")]
    Unpaired { psi: usize, time: Time },
    #[error("at t={time}, {kind} of transition {psi}: {source}")]
    Event {
        time: Time,
        psi: usize,
        kind: FiringKind,
        source: Box<NetError>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FiringKind {
    /// Completion (`U+` contribution). Orders before starts at equal times.
    Complete,
    /// Start (`U-` contribution).
    Start,
}

impl FiringKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FiringKind::Start => "start",
            FiringKind::Complete => "complete",
        }
    }
}

impl fmt::Display for FiringKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FiringRecord {
    pub psi: usize,
    pub kind: FiringKind,
    pub time: Time,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionInfo {
    pub dof: Option<Dof>,
    pub label: String,
    pub class: ResourceClass,
}

/// `Q = [Q_S; Q_E]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Marking {
    pub places: Vec<u64>,
    pub transitions: Vec<u64>,
}

impl Marking {
    pub fn new(places: Vec<u64>, transitions: Vec<u64>) -> Self {
        Marking { places, transitions }
    }

    pub fn at_rest(places: Vec<u64>, n_transitions: usize) -> Self {
        Marking {
            places,
            transitions: vec![0; n_transitions],
        }
    }

    pub fn total(&self) -> u64 {
        self.places.iter().sum::<u64>() + self.transitions.iter().sum::<u64>()
    }
}

/// Timing, cost and capacity data attached to each transition.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionParameters {
    pub durations: Vec<Time>,
    pub costs: Vec<Money>,
    pub capacities: Vec<u64>,
}

impl TransitionParameters {
    pub fn uniform(n: usize, duration: Time, cost: Money) -> Self {
        TransitionParameters {
            durations: vec![duration; n],
            costs: vec![cost; n],
            capacities: vec![1; n],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeliveryNet {
    places: Vec<String>,
    transitions: Vec<TransitionInfo>,
    m_minus: DenseMatrix<u64>,
    m_plus: DenseMatrix<u64>,
    params: TransitionParameters,
}

/// `X-_y`: non-transport processes executed at buffer `y`, plus transport
/// processes (on any resource) leaving `y`.
pub fn outgoing_selector(model: &StructuralModel, buffer: usize) -> BoolMatrix {
    selector(model, buffer, |route| route.origin)
}

/// `X+_y`: non-transport processes executed at buffer `y`, plus transport
/// processes (on any resource) arriving at `y`.
pub fn incoming_selector(model: &StructuralModel, buffer: usize) -> BoolMatrix {
    selector(model, buffer, |route| route.destination)
}

fn selector(
    model: &StructuralModel,
    buffer: usize,
    endpoint: impl Fn(crate::structural::Route) -> usize,
) -> BoolMatrix {
    let resource = model.buffers()[buffer];
    let n_resources = model.resources().len();
    let mut x = BoolMatrix::zeros(model.processes().len(), n_resources);
    for p in model.processes() {
        let cells: Vec<(usize, usize)> = match p.route {
            None => vec![(p.id, resource)],
            Some(route) if endpoint(route) == resource => (0..n_resources).map(|v| (p.id, v)).collect(),
            Some(_) => Vec::new(),
        };
        for (w, v) in cells {
            x.set(w, v, true).expect("within knowledge base shape");
        }
    }
    x
}

fn superpose(model: &StructuralModel, select: impl Fn(&StructuralModel, usize) -> BoolMatrix) -> DenseMatrix<u64> {
    let projection = model.projection();
    let mut m = DenseMatrix::filled(model.buffers().len(), model.dof_count(), 0u64);
    for y in 0..model.buffers().len() {
        let row = projection.project(&select(model, y));
        for (psi, &bit) in row.iter().enumerate() {
            m[(y, psi)] += u64::from(bit);
        }
    }
    m
}

/// Incidence-out matrix `M-` over the unaggregated buffers.
pub fn build_incidence_out(model: &StructuralModel) -> DenseMatrix<u64> {
    superpose(model, outgoing_selector)
}

/// Incidence-in matrix `M+` over the unaggregated buffers.
pub fn build_incidence_in(model: &StructuralModel) -> DenseMatrix<u64> {
    superpose(model, incoming_selector)
}

/// Aggregated incidence matrices `A_R * M-` and `A_R * M+`.
pub fn build_incidence_chronic(
    model: &StructuralModel,
    aggregation: &AggregationMatrix,
) -> Result<(DenseMatrix<u64>, DenseMatrix<u64>), NetError> {
    let a_r = aggregation.matrix();
    if a_r.cols() != model.buffers().len() {
        return Err(NetError::Dimensions(format!(
            "aggregation has {} columns for {} buffers",
            a_r.cols(),
            model.buffers().len()
        )));
    }
    let a_r = a_r.to_dense::<u64>();
    Ok((
        a_r.matmul(&build_incidence_out(model)),
        a_r.matmul(&build_incidence_in(model)),
    ))
}

impl DeliveryNet {
    /// Assembles a net from explicit incidence matrices.
    pub fn new(
        places: Vec<String>,
        transitions: Vec<TransitionInfo>,
        m_minus: DenseMatrix<u64>,
        m_plus: DenseMatrix<u64>,
        params: TransitionParameters,
    ) -> Result<Self, NetError> {
        let shape = (places.len(), transitions.len());
        if m_minus.shape() != shape || m_plus.shape() != shape {
            return Err(NetError::Dimensions(format!(
                "incidence shapes {:?}/{:?}, expected {:?}",
                m_minus.shape(),
                m_plus.shape(),
                shape
            )));
        }
        let n = transitions.len();
        if params.durations.len() != n || params.costs.len() != n || params.capacities.len() != n {
            return Err(NetError::Dimensions(
                "durations, costs and capacities need one entry per transition".into(),
            ));
        }
        for (which, m) in [("M-", &m_minus), ("M+", &m_plus)] {
            for psi in 0..n {
                let sum = m.column_sum(psi);
                if sum != 1 {
                    return Err(NetError::ColumnSum { which, psi, sum });
                }
            }
        }
        Ok(DeliveryNet {
            places,
            transitions,
            m_minus,
            m_plus,
            params,
        })
    }

    /// Derives the net from a structural model, using its aggregation when
    /// one is attached.
    pub fn from_model(model: &StructuralModel, params: TransitionParameters) -> Result<Self, NetError> {
        let (m_minus, m_plus) = match model.aggregation() {
            Some(a) => build_incidence_chronic(model, a)?,
            None => (build_incidence_out(model), build_incidence_in(model)),
        };
        let transitions = model
            .dofs()
            .iter()
            .map(|&d| {
                let p = &model.processes()[d.process];
                TransitionInfo {
                    dof: Some(d),
                    label: format!("{} @ {}", p.name, model.resources()[d.resource].name),
                    class: p.class,
                }
            })
            .collect();
        DeliveryNet::new(model.place_names(), transitions, m_minus, m_plus, params)
    }

    pub fn places(&self) -> &[String] {
        &self.places
    }

    pub fn transitions(&self) -> &[TransitionInfo] {
        &self.transitions
    }

    pub fn place_count(&self) -> usize {
        self.places.len()
    }

    pub fn transition_count(&self) -> usize {
        self.transitions.len()
    }

    pub fn m_minus(&self) -> &DenseMatrix<u64> {
        &self.m_minus
    }

    pub fn m_plus(&self) -> &DenseMatrix<u64> {
        &self.m_plus
    }

    pub fn params(&self) -> &TransitionParameters {
        &self.params
    }

    pub fn duration(&self, psi: usize) -> Time {
        self.params.durations[psi]
    }

    pub fn costs(&self) -> &[Money] {
        &self.params.costs
    }

    pub fn capacity(&self, psi: usize) -> u64 {
        self.params.capacities[psi]
    }

    pub fn origin(&self, psi: usize) -> usize {
        self.m_minus.column(psi).position(|x| x == 1).expect("validated column")
    }

    pub fn destination(&self, psi: usize) -> usize {
        self.m_plus.column(psi).position(|x| x == 1).expect("validated column")
    }

    pub fn place_index(&self, name: &str) -> Option<usize> {
        self.places.iter().position(|p| p == name)
    }

    /// One application of the state transition function:
    /// `Q_S' = Q_S + M+ U+ - M- U-` and `Q_E' = Q_E - U+ + U-`.
    pub fn step(&self, q: &Marking, u_minus: &[u64], u_plus: &[u64]) -> Result<Marking, NetError> {
        let n = self.transition_count();
        for v in [u_minus, u_plus] {
            if v.len() != n {
                return Err(NetError::VectorLength {
                    expected: n,
                    found: v.len(),
                });
            }
        }
        if q.places.len() != self.place_count() || q.transitions.len() != n {
            return Err(NetError::Dimensions("marking does not match the net".into()));
        }
        if let Some(psi) = (0..n).find(|&psi| u_plus[psi] > q.transitions[psi]) {
            return Err(NetError::CompletionWithoutStart { psi });
        }
        let consumed = self.m_minus.mul_vec(u_minus);
        for (place, (&have, &need)) in q.places.iter().zip(&consumed).enumerate() {
            if need > have {
                let psi = (0..n)
                    .find(|&psi| u_minus[psi] > 0 && self.m_minus[(place, psi)] > 0)
                    .unwrap_or(0);
                return Err(NetError::NotEnabled { psi, place });
            }
        }
        let produced = self.m_plus.mul_vec(u_plus);
        let places = q
            .places
            .iter()
            .zip(consumed.iter().zip(&produced))
            .map(|(&x, (&c, &p))| x - c + p)
            .collect();
        let transitions = q
            .transitions
            .iter()
            .zip(u_minus.iter().zip(u_plus))
            .map(|(&x, (&um, &up))| x - up + um)
            .collect();
        Ok(Marking { places, transitions })
    }

    /// Fires a single start or completion of `psi`, enforcing the
    /// per-transition capacity on starts.
    pub fn fire(&self, q: &Marking, psi: usize, kind: FiringKind) -> Result<Marking, NetError> {
        let n = self.transition_count();
        if psi >= n {
            return Err(NetError::UnknownTransition { psi, count: n });
        }
        let mut unit = vec![0u64; n];
        unit[psi] = 1;
        let zero = vec![0u64; n];
        let next = match kind {
            FiringKind::Start => self.step(q, &unit, &zero)?,
            FiringKind::Complete => self.step(q, &zero, &unit)?,
        };
        let capacity = self.capacity(psi);
        if next.transitions[psi] > capacity {
            return Err(NetError::CapacityExceeded { psi, capacity });
        }
        Ok(next)
    }
}

/// Time-ordered start/complete records; every start at `t` is paired with a
/// completion at `t + D[psi]`. Equal times put completions first, then keep
/// schedule order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ScheduledEventList {
    events: Vec<FiringRecord>,
}

impl ScheduledEventList {
    /// Expands a time-sorted list of starts with the transition durations.
    pub fn from_starts(starts: &[(Time, usize)], durations: &[Time]) -> Result<Self, NetError> {
        let mut keyed = Vec::with_capacity(starts.len() * 2);
        let mut last = Time::ZERO;
        for (seq, &(time, psi)) in starts.iter().enumerate() {
            if time.is_negative() {
                return Err(NetError::NegativeTime { index: seq });
            }
            if time < last {
                return Err(NetError::Unsorted { index: seq });
            }
            last = time;
            let d = *durations.get(psi).ok_or(NetError::UnknownTransition {
                psi,
                count: durations.len(),
            })?;
            // A zero-duration completion sorts with the starts, right after
            // its own start.
            let rank = if d.is_zero() { 1 } else { 0 };
            keyed.push(((time, 1, seq, 0), FiringKind::Start, psi));
            keyed.push(((time + d, rank, seq, 1), FiringKind::Complete, psi));
        }
        keyed.sort_by_key(|&(key, _, _)| key);
        Ok(ScheduledEventList {
            events: keyed
                .into_iter()
                .map(|((time, ..), kind, psi)| FiringRecord { psi, kind, time })
                .collect(),
        })
    }

    /// Validates an explicit record list: non-decreasing times and a
    /// completion at `t + D[psi]` for every start.
    pub fn new(events: Vec<FiringRecord>, durations: &[Time]) -> Result<Self, NetError> {
        let mut pending: Vec<(usize, Time)> = Vec::new();
        for (index, e) in events.iter().enumerate() {
            if e.time.is_negative() {
                return Err(NetError::NegativeTime { index });
            }
            if index > 0 && e.time < events[index - 1].time {
                return Err(NetError::Unsorted { index });
            }
            let d = *durations.get(e.psi).ok_or(NetError::UnknownTransition {
                psi: e.psi,
                count: durations.len(),
            })?;
            match e.kind {
                FiringKind::Start => pending.push((e.psi, e.time + d)),
                FiringKind::Complete => {
                    let at = pending
                        .iter()
                        .position(|&(psi, due)| psi == e.psi && due == e.time)
                        .ok_or(NetError::CompletionWithoutStart { psi: e.psi })?;
                    pending.swap_remove(at);
                }
            }
        }
        if let Some(&(psi, due)) = pending.first() {
            return Err(NetError::Unpaired {
                psi,
                time: due - durations[psi],
            });
        }
        Ok(ScheduledEventList { events })
    }

    pub fn events(&self) -> &[FiringRecord] {
        &self.events
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryPoint {
    pub time: Time,
    pub event: Option<FiringRecord>,
    pub marking: Marking,
}

/// Marking after each event, preceded by the initial marking at t=0.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub points: Vec<TrajectoryPoint>,
}

impl Trajectory {
    pub fn final_marking(&self) -> &Marking {
        &self
            .points
            .last()
            .expect("trajectory starts with the initial marking")
            .marking
    }

    pub fn history(&self) -> Vec<FiringRecord> {
        self.points.iter().filter_map(|p| p.event).collect()
    }
}

pub fn simulate(net: &DeliveryNet, schedule: &ScheduledEventList, q0: &Marking) -> Result<Trajectory, NetError> {
    let mut points = vec![TrajectoryPoint {
        time: Time::ZERO,
        event: None,
        marking: q0.clone(),
    }];
    let mut q = q0.clone();
    for &e in schedule.events() {
        q = net.fire(&q, e.psi, e.kind).map_err(|source| NetError::Event {
            time: e.time,
            psi: e.psi,
            kind: e.kind,
            source: Box::new(source),
        })?;
        points.push(TrajectoryPoint {
            time: e.time,
            event: Some(e),
            marking: q.clone(),
        });
    }
    Ok(Trajectory { points })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CostPoint {
    pub time: Time,
    pub cost: Money,
}

/// Cumulative operating cost, one point per firing record.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CostSeries {
    pub points: Vec<CostPoint>,
}

impl CostSeries {
    pub fn final_cost(&self) -> Money {
        self.points.last().map_or(Money::ZERO, |p| p.cost)
    }

    pub fn is_non_decreasing(&self) -> bool {
        self.points
            .windows(2)
            .all(|w| w[0].cost <= w[1].cost && w[0].time <= w[1].time)
    }
}

/// Costs accrue when a transition completes: `C[t] = sum_k C^T U+[k]`.
pub fn cumulative_cost(costs: &[Money], history: &[FiringRecord]) -> CostSeries {
    let mut total = Money::ZERO;
    let points = history
        .iter()
        .map(|r| {
            if r.kind == FiringKind::Complete {
                total += costs[r.psi];
            }
            CostPoint {
                time: r.time,
                cost: total,
            }
        })
        .collect();
    CostSeries { points }
}
