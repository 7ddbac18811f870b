//! Serialized form of a scenario. Everything is referenced by name; the
//! compiler resolves names to indices.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::health::HealthEventKind;
use crate::rational::{Money, Time};
use crate::structural::ResourceClass;

pub const SCHEMA_VERSION: u32 = 1;

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDocument {
    pub schema_version: u32,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_unit: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub resources: Vec<ResourceSpec>,
    pub processes: Vec<ProcessSpec>,
    #[serde(default)]
    pub knowledge_base: Vec<Allocation>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub constraints: Vec<Allocation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chronic_abstraction: Option<ChronicSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub aggregation: Vec<AggregateSpec>,
    #[serde(default)]
    pub individuals: Vec<IndividualSpec>,
    #[serde(default)]
    pub schedule: Vec<ScheduleSpec>,
    #[serde(default)]
    pub assumed_values: AssumedValues,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResourceSpec {
    pub name: String,
    pub capabilities: Vec<ResourceClass>,
    /// Optional cross-check of the class derived from `capabilities`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<ResourceClass>,
    #[serde(default, skip_serializing_if = "is_false")]
    pub human: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RouteSpec {
    pub origin: String,
    pub destination: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessSpec {
    pub name: String,
    pub class: ResourceClass,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub route: Option<RouteSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Allocation {
    pub process: String,
    pub resource: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChronicSpec {
    /// Buffers folded into the clinic; defaults to every buffer except
    /// `outside clinic`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clinic_buffers: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AggregateSpec {
    pub name: String,
    pub members: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventSpec {
    pub name: String,
    pub kind: HealthEventKind,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeasibilitySpec {
    pub event: String,
    pub process: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndividualSpec {
    pub id: String,
    pub initial_place: String,
    pub states: Vec<StateSpec>,
    pub events: Vec<EventSpec>,
    pub initial_marking: BTreeMap<String, f64>,
    #[serde(default)]
    pub feasibility: Vec<FeasibilitySpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "net", rename_all = "snake_case")]
pub enum ScheduleSpec {
    /// Start of a delivery DOF for one individual.
    Delivery {
        time: Time,
        process: String,
        resource: String,
        individual: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
        /// Output state realized by the induced health event in replay.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        outcome: Option<String>,
    },
    /// Start of a stochastic health event; exactly one of `events` must be
    /// enabled when it fires.
    Health {
        time: Time,
        individual: String,
        events: Vec<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        outcome: Option<String>,
    },
}

impl ScheduleSpec {
    pub fn time(&self) -> Time {
        match self {
            ScheduleSpec::Delivery { time, .. } | ScheduleSpec::Health { time, .. } => *time,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionValue<T> {
    pub process: String,
    pub resource: String,
    pub value: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArcSide {
    Input,
    Output,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArcWeightSpec {
    pub individual: String,
    pub event: String,
    pub side: ArcSide,
    pub weights: BTreeMap<String, f64>,
}

/// Numbers a scenario needs that have no published source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssumedValues {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(default)]
    pub default_duration: Time,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub durations: Vec<TransitionValue<Time>>,
    #[serde(default)]
    pub default_cost: Money,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub costs: Vec<TransitionValue<Money>>,
    #[serde(default = "one")]
    pub default_capacity: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub capacities: Vec<TransitionValue<u64>>,
    /// Individual -> event -> duration; unlisted events take no time.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub health_durations: BTreeMap<String, BTreeMap<String, Time>>,
    /// Individual -> state -> value in [0, 1].
    #[serde(default)]
    pub values: BTreeMap<String, BTreeMap<String, f64>>,
    /// Replaces the equal split over an event's listed inputs or outputs.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub arc_weights: Vec<ArcWeightSpec>,
}

fn one() -> u64 {
    1
}

impl Default for AssumedValues {
    fn default() -> Self {
        AssumedValues {
            notes: Vec::new(),
            default_duration: Time::ZERO,
            durations: Vec::new(),
            default_cost: Money::ZERO,
            costs: Vec::new(),
            default_capacity: 1,
            capacities: Vec::new(),
            health_durations: BTreeMap::new(),
            values: BTreeMap::new(),
            arc_weights: Vec::new(),
        }
    }
}
