//! Per-individual fuzzy timed Petri net over clinical health states.
//!
//! Markings hold probability mass instead of tokens. Arc weights are the
//! health transition probabilities, so every column of `M-` and `M+` sums
//! to one and a firing conserves the individual's total mass.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::matrix::DenseMatrix;
use crate::rational::Time;

/// Slack allowed when checking that a firing leaves no negative mass.
pub const ENABLING_TOLERANCE: f64 = 1e-12;
/// Allowed drift of an individual's total mass from one.
pub const CONSERVATION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HealthError {
    #[error("health event `{event}` not enabled")]
    NotEnabled { event: String },
    #[error("completion of health event `{event}` without start")]
    CompletionWithoutStart { event: String },
    #[error("health event `{event}` is not stochastic")]
    NotStochastic { event: String },
    #[error("state `{state}` is not an output of health event `{event}`")]
    NotAnOutput { event: String, state: String },
    #[error("column `{event}` of {which} sums to {sum}, expected 1")]
    ColumnSum {
        which: &'static str,
        event: String,
        sum: f64,
    },
    #[error("{what} = {value} lies outside [0, 1]")]
    OutOfRange { what: String, value: f64 },
    #[error("marking mass {total} differs from 1")]
    MassNotNormalized { total: f64 },
    #[error("health net dimensions disagree: {0}")]
    Dimensions(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HealthEventKind {
    /// Realized by a transformation process of the delivery system.
    Induced,
    /// Fires spontaneously; no delivery counterpart.
    Stochastic,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HealthEvent {
    pub name: String,
    pub kind: HealthEventKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HealthNet {
    states: Vec<String>,
    events: Vec<HealthEvent>,
    m_minus: DenseMatrix<f64>,
    m_plus: DenseMatrix<f64>,
    durations: Vec<Time>,
    values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HealthMarking {
    pub states: Vec<f64>,
    pub events: Vec<f64>,
}

impl HealthMarking {
    /// All mass on one state.
    pub fn concentrated(n_states: usize, state: usize, n_events: usize) -> Self {
        let mut states = vec![0.0; n_states];
        states[state] = 1.0;
        HealthMarking {
            states,
            events: vec![0.0; n_events],
        }
    }

    pub fn total(&self) -> f64 {
        self.states.iter().sum::<f64>() + self.events.iter().sum::<f64>()
    }

    /// Checks the range and unit-mass invariants.
    pub fn validate(&self) -> Result<(), HealthError> {
        for (i, &x) in self.states.iter().chain(&self.events).enumerate() {
            if !(0.0..=1.0 + CONSERVATION_TOLERANCE).contains(&x) {
                return Err(HealthError::OutOfRange {
                    what: format!("marking entry {i}"),
                    value: x,
                });
            }
        }
        let total = self.total();
        if (total - 1.0).abs() > CONSERVATION_TOLERANCE {
            return Err(HealthError::MassNotNormalized { total });
        }
        Ok(())
    }
}

fn check_unit(what: impl FnOnce() -> String, value: f64) -> Result<(), HealthError> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(HealthError::OutOfRange { what: what(), value })
    }
}

impl HealthNet {
    pub fn new(
        states: Vec<String>,
        events: Vec<HealthEvent>,
        m_minus: DenseMatrix<f64>,
        m_plus: DenseMatrix<f64>,
        durations: Vec<Time>,
        values: Vec<f64>,
    ) -> Result<Self, HealthError> {
        let shape = (states.len(), events.len());
        if m_minus.shape() != shape || m_plus.shape() != shape {
            return Err(HealthError::Dimensions(format!(
                "arc matrices are {:?}/{:?}, expected {:?}",
                m_minus.shape(),
                m_plus.shape(),
                shape
            )));
        }
        if durations.len() != events.len() || values.len() != states.len() {
            return Err(HealthError::Dimensions(
                "need one duration per event and one value per state".into(),
            ));
        }
        for (s, &v) in values.iter().enumerate() {
            check_unit(|| format!("value of `{}`", states[s]), v)?;
        }
        for (which, m) in [("M-", &m_minus), ("M+", &m_plus)] {
            for (x, event) in events.iter().enumerate() {
                for (s, w) in m.column(x).enumerate() {
                    check_unit(|| format!("{which} weight `{}` -> `{}`", states[s], event.name), w)?;
                }
                let sum = m.column_sum(x);
                if (sum - 1.0).abs() > CONSERVATION_TOLERANCE {
                    return Err(HealthError::ColumnSum {
                        which,
                        event: event.name.clone(),
                        sum,
                    });
                }
            }
        }
        Ok(HealthNet {
            states,
            events,
            m_minus,
            m_plus,
            durations,
            values,
        })
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn events(&self) -> &[HealthEvent] {
        &self.events
    }

    pub fn m_minus(&self) -> &DenseMatrix<f64> {
        &self.m_minus
    }

    pub fn m_plus(&self) -> &DenseMatrix<f64> {
        &self.m_plus
    }

    pub fn duration(&self, event: usize) -> Time {
        self.durations[event]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    pub fn event_index(&self, name: &str) -> Option<usize> {
        self.events.iter().position(|e| e.name == name)
    }

    /// States receiving a nonzero share of the event's output.
    pub fn outputs(&self, event: usize) -> Vec<usize> {
        self.m_plus
            .column(event)
            .enumerate()
            .filter(|&(_, w)| w > 0.0)
            .map(|(s, _)| s)
            .collect()
    }

    /// Largest start magnitude the marking supports for `event`.
    pub fn enabled_mass(&self, q: &HealthMarking, event: usize) -> f64 {
        self.m_minus
            .column(event)
            .zip(&q.states)
            .filter(|&(w, _)| w > 0.0)
            .map(|(w, &m)| m / w)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_enabled(&self, q: &HealthMarking, event: usize) -> bool {
        self.enabled_mass(q, event) > ENABLING_TOLERANCE
    }

    fn check_shape(&self, q: &HealthMarking, u_minus: &[f64], u_plus: &[f64]) -> Result<(), HealthError> {
        let n = self.events.len();
        if q.states.len() != self.states.len() || q.events.len() != n || u_minus.len() != n || u_plus.len() != n {
            return Err(HealthError::Dimensions("marking or firing vector size".into()));
        }
        for (x, (&a, &b)) in u_minus.iter().zip(u_plus).enumerate() {
            let name = &self.events[x].name;
            check_unit(|| format!("start magnitude of `{name}`"), a)?;
            check_unit(|| format!("completion magnitude of `{name}`"), b)?;
        }
        Ok(())
    }

    /// `Q_S' = Q_S + M+ U+ - M- U-`, `Q_E' = Q_E - U+ + U-`.
    pub fn fuzzy_step(&self, q: &HealthMarking, u_minus: &[f64], u_plus: &[f64]) -> Result<HealthMarking, HealthError> {
        self.check_shape(q, u_minus, u_plus)?;
        let mut events = Vec::with_capacity(q.events.len());
        for (x, ((&e, &um), &up)) in q.events.iter().zip(u_minus).zip(u_plus).enumerate() {
            if e - up < -ENABLING_TOLERANCE {
                return Err(HealthError::CompletionWithoutStart {
                    event: self.events[x].name.clone(),
                });
            }
            events.push((e - up).max(0.0) + um);
        }
        let consumed = self.m_minus.mul_vec(u_minus);
        let produced = self.m_plus.mul_vec(u_plus);
        let mut states = Vec::with_capacity(q.states.len());
        for (s, &m) in q.states.iter().enumerate() {
            let left = m - consumed[s];
            if left < -ENABLING_TOLERANCE {
                let x = (0..self.events.len())
                    .find(|&x| u_minus[x] > 0.0 && self.m_minus[(s, x)] > 0.0)
                    .unwrap_or(0);
                return Err(HealthError::NotEnabled {
                    event: self.events[x].name.clone(),
                });
            }
            states.push(left.max(0.0) + produced[s]);
        }
        Ok(HealthMarking { states, events })
    }

    /// Starts `event` with all of its enabled mass; returns the new marking
    /// and the mass moved into the event.
    pub fn start(&self, q: &HealthMarking, event: usize) -> Result<(HealthMarking, f64), HealthError> {
        let mass = self.enabled_mass(q, event);
        if mass <= ENABLING_TOLERANCE {
            return Err(HealthError::NotEnabled {
                event: self.events[event].name.clone(),
            });
        }
        let mass = mass.min(1.0);
        let mut u = vec![0.0; self.events.len()];
        u[event] = mass;
        let zero = vec![0.0; self.events.len()];
        Ok((self.fuzzy_step(q, &u, &zero)?, mass))
    }

    /// Completes `event`, releasing all of its in-flight mass. Without a
    /// branch the mass splits by the output weights; with a branch it all
    /// goes to that output state.
    pub fn complete(
        &self,
        q: &HealthMarking,
        event: usize,
        branch: Option<usize>,
    ) -> Result<HealthMarking, HealthError> {
        let mass = q.events[event];
        if mass <= ENABLING_TOLERANCE {
            return Err(HealthError::CompletionWithoutStart {
                event: self.events[event].name.clone(),
            });
        }
        match branch {
            None => {
                let mut u = vec![0.0; self.events.len()];
                u[event] = mass;
                let zero = vec![0.0; self.events.len()];
                self.fuzzy_step(q, &zero, &u)
            }
            Some(state) => {
                if self.m_plus[(state, event)] <= 0.0 {
                    return Err(HealthError::NotAnOutput {
                        event: self.events[event].name.clone(),
                        state: self.states[state].clone(),
                    });
                }
                let mut next = q.clone();
                next.events[event] = 0.0;
                next.states[state] += mass;
                Ok(next)
            }
        }
    }

    /// Draws an output state with probability proportional to the event's
    /// output weights.
    pub fn sample_branch<R: Rng + ?Sized>(&self, event: usize, rng: &mut R) -> usize {
        let outputs = self.outputs(event);
        let mut draw: f64 = rng.random::<f64>() * self.m_plus.column_sum(event);
        for &s in &outputs {
            draw -= self.m_plus[(s, event)];
            if draw < 0.0 {
                return s;
            }
        }
        *outputs.last().expect("validated column has an output")
    }

    /// Fires a stochastic event to completion in one go. With no seed
    /// (replay) the mass splits by the output weights; with a seed one
    /// branch is drawn and receives all of the mass.
    pub fn fire_stochastic(
        &self,
        q: &HealthMarking,
        event: usize,
        seed: Option<u64>,
    ) -> Result<(HealthMarking, HealthFiring), HealthError> {
        if self.events[event].kind != HealthEventKind::Stochastic {
            return Err(HealthError::NotStochastic {
                event: self.events[event].name.clone(),
            });
        }
        let (started, mass) = self.start(q, event)?;
        let branch = seed.map(|s| self.sample_branch(event, &mut ChaCha8Rng::seed_from_u64(s)));
        let done = self.complete(&started, event, branch)?;
        Ok((done, HealthFiring { event, mass, branch }))
    }

    pub fn outcome(&self, q: &HealthMarking) -> Result<f64, HealthError> {
        health_outcome(&self.values, &q.states)
    }
}

/// Summary of one health event firing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HealthFiring {
    pub event: usize,
    pub mass: f64,
    pub branch: Option<usize>,
}

/// `H = V^T Q_S`; in-flight mass contributes nothing.
pub fn health_outcome(values: &[f64], states: &[f64]) -> Result<f64, HealthError> {
    if values.len() != states.len() {
        return Err(HealthError::Dimensions(format!(
            "{} values for {} states",
            values.len(),
            states.len()
        )));
    }
    Ok(values.iter().zip(states).map(|(v, q)| v * q).sum())
}
