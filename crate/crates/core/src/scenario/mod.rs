//! Loading, validating and compiling scenario documents.

pub mod document;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use crate::coordination::{FeasibilityMatrix, Individual, ScheduleEntry, TransformSelector};
use crate::delivery::{DeliveryNet, TransitionParameters};
use crate::health::{HealthEvent, HealthEventKind, HealthMarking, HealthNet};
use crate::matrix::{BoolMatrix, DenseMatrix};
use crate::rational::Time;
use crate::structural::{
    block_mask_violations, AggregationMatrix, Process, Resource, ResourceClass, Route, StructuralModel, StructureError,
    OUTSIDE_CLINIC,
};

pub use document::*;

/// Checks run by [`validate`], in report order.
pub const CHECKS: [&str; 15] = [
    "schema version",
    "unique names",
    "references resolve",
    "resource classification",
    "process ordering",
    "transport routes",
    "block mask",
    "aggregation",
    "transition parameters",
    "incidence column sums",
    "health values",
    "health arc normalization",
    "initial mass normalized",
    "feasibility tags",
    "schedule order",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail(Vec<String>),
    /// Could not run because an earlier check failed.
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub checks: Vec<(&'static str, CheckStatus)>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|(_, s)| *s == CheckStatus::Pass)
    }

    pub fn status(&self, check: &str) -> Option<&CheckStatus> {
        self.checks.iter().find(|(c, _)| *c == check).map(|(_, s)| s)
    }

    pub fn failures(&self) -> Vec<String> {
        self.checks
            .iter()
            .flat_map(|(c, s)| match s {
                CheckStatus::Fail(msgs) => msgs.iter().map(|m| format!("{c}: {m}")).collect(),
                _ => Vec::new(),
            })
            .collect()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (check, status) in &self.checks {
            match status {
                CheckStatus::Pass => writeln!(f, "PASS {check}")?,
                CheckStatus::Skipped => writeln!(f, "SKIP {check}")?,
                CheckStatus::Fail(msgs) => {
                    writeln!(f, "FAIL {check}")?;
                    for m in msgs {
                        writeln!(f, "     {m}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("scenario is invalid:\n{0}")]
    Invalid(ValidationReport),
}

/// A compiled, fully validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub document: ScenarioDocument,
    pub model: StructuralModel,
    pub net: DeliveryNet,
    pub selector: TransformSelector,
    pub individuals: Vec<Individual>,
    pub schedule: Vec<ScheduleEntry>,
}

pub fn parse_scenario(text: &str) -> Result<ScenarioDocument, ScenarioError> {
    serde_json::from_str(text).map_err(|e| ScenarioError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

pub fn read_document(path: &Path) -> Result<ScenarioDocument, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_scenario(&text)
}

pub fn load_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    compile(read_document(path)?).map_err(ScenarioError::Invalid)
}

pub fn validate(doc: &ScenarioDocument) -> ValidationReport {
    match compile(doc.clone()) {
        Ok(_) => ValidationReport {
            checks: CHECKS.iter().map(|&c| (c, CheckStatus::Pass)).collect(),
        },
        Err(report) => report,
    }
}

#[derive(Default)]
struct Checks {
    failures: BTreeMap<&'static str, Vec<String>>,
    skipped: BTreeSet<&'static str>,
}

impl Checks {
    fn fail(&mut self, check: &'static str, message: impl Into<String>) {
        debug_assert!(CHECKS.contains(&check));
        self.failures.entry(check).or_default().push(message.into());
    }

    fn any_failed(&self) -> bool {
        !self.failures.is_empty()
    }

    fn skip_rest(&mut self, from: &'static str) {
        let start = CHECKS.iter().position(|&c| c == from).expect("known check");
        for &c in &CHECKS[start..] {
            if !self.failures.contains_key(c) {
                self.skipped.insert(c);
            }
        }
    }

    fn report(self) -> ValidationReport {
        let checks = CHECKS
            .iter()
            .map(|&c| {
                let status = match self.failures.get(c) {
                    Some(msgs) => CheckStatus::Fail(msgs.clone()),
                    None if self.skipped.contains(c) => CheckStatus::Skipped,
                    None => CheckStatus::Pass,
                };
                (c, status)
            })
            .collect();
        ValidationReport { checks }
    }
}

fn duplicates<'a>(names: impl IntoIterator<Item = &'a str>) -> Vec<&'a str> {
    let mut seen = BTreeSet::new();
    let mut dup = BTreeSet::new();
    for n in names {
        if !seen.insert(n) {
            dup.insert(n);
        }
    }
    dup.into_iter().collect()
}

fn index_of<'a>(names: impl IntoIterator<Item = &'a str>) -> BTreeMap<&'a str, usize> {
    let mut map = BTreeMap::new();
    for (i, n) in names.into_iter().enumerate() {
        map.entry(n).or_insert(i);
    }
    map
}

fn structure_check(err: &StructureError) -> &'static str {
    match err {
        StructureError::EmptyCapabilities(_) | StructureError::ClassMismatch { .. } => "resource classification",
        StructureError::ProcessOrder(_) => "process ordering",
        StructureError::MissingRoute(_)
        | StructureError::UnexpectedRoute(_)
        | StructureError::RouteEndpointNotBuffer { .. } => "transport routes",
        StructureError::BlockMask { .. } => "block mask",
        StructureError::MissingOutsideClinic
        | StructureError::ClinicBuffers(_)
        | StructureError::NoClinicBoundaryTransport
        | StructureError::AggregationColumn { .. }
        | StructureError::AggregationWidth { .. } => "aggregation",
        StructureError::NonContiguousId { .. } | StructureError::Shape(_) => "references resolve",
    }
}

/// Resolves names, builds every model and checks every invariant. Returns
/// all failures found rather than stopping at the first.
pub fn compile(doc: ScenarioDocument) -> Result<Scenario, ValidationReport> {
    let mut c = Checks::default();
    const REFS: &str = "references resolve";

    if doc.schema_version != SCHEMA_VERSION {
        c.fail(
            "schema version",
            format!("found {}, this build reads {SCHEMA_VERSION}", doc.schema_version),
        );
    }

    // Names
    for (kind, names) in [
        (
            "resource",
            doc.resources.iter().map(|r| r.name.as_str()).collect::<Vec<_>>(),
        ),
        ("process", doc.processes.iter().map(|p| p.name.as_str()).collect()),
        ("individual", doc.individuals.iter().map(|i| i.id.as_str()).collect()),
        ("aggregate", doc.aggregation.iter().map(|a| a.name.as_str()).collect()),
    ] {
        for d in duplicates(names) {
            c.fail("unique names", format!("{kind} `{d}` declared twice"));
        }
    }
    for ind in &doc.individuals {
        for d in duplicates(ind.states.iter().map(|s| s.name.as_str())) {
            c.fail("unique names", format!("state `{d}` of `{}` declared twice", ind.id));
        }
        for d in duplicates(ind.events.iter().map(|e| e.name.as_str())) {
            c.fail("unique names", format!("event `{d}` of `{}` declared twice", ind.id));
        }
    }

    let resource_ix = index_of(doc.resources.iter().map(|r| r.name.as_str()));
    let process_ix = index_of(doc.processes.iter().map(|p| p.name.as_str()));

    // Resources and processes
    let mut resources = Vec::new();
    for (id, r) in doc.resources.iter().enumerate() {
        let caps: BTreeSet<ResourceClass> = r.capabilities.iter().copied().collect();
        match Resource::from_capabilities(id, &r.name, &caps, r.class, r.human) {
            Ok(res) => resources.push(res),
            Err(e) => c.fail("resource classification", e.to_string()),
        }
    }
    let mut processes = Vec::new();
    for (id, p) in doc.processes.iter().enumerate() {
        let route = match &p.route {
            None => None,
            Some(route) => {
                let o = resource_ix.get(route.origin.as_str());
                let d = resource_ix.get(route.destination.as_str());
                for (end, found) in [(&route.origin, o), (&route.destination, d)] {
                    if found.is_none() {
                        c.fail(REFS, format!("route of `{}` names unknown resource `{end}`", p.name));
                    }
                }
                match (o, d) {
                    (Some(&origin), Some(&destination)) => Some(Route { origin, destination }),
                    _ => None,
                }
            }
        };
        processes.push(Process {
            id,
            name: p.name.clone(),
            class: p.class,
            route,
        });
    }
    for pair in processes.windows(2) {
        if pair[1].class < pair[0].class {
            c.fail(
                "process ordering",
                format!(
                    "`{}` ({}) follows `{}` ({}); list transformation, decision, measurement, then transportation processes",
                    pair[1].name, pair[1].class, pair[0].name, pair[0].class
                ),
            );
        }
    }
    for p in &processes {
        match (p.class, p.route) {
            (ResourceClass::Transportation, None) if doc.processes[p.id].route.is_none() => c.fail(
                "transport routes",
                StructureError::MissingRoute(p.name.clone()).to_string(),
            ),
            (ResourceClass::Transportation, Some(route)) => {
                for end in [route.origin, route.destination] {
                    if resources.get(end).is_some_and(|r| !r.is_buffer()) {
                        c.fail(
                            "transport routes",
                            format!("route of `{}` ends at non-buffer `{}`", p.name, doc.resources[end].name),
                        );
                    }
                }
            }
            (class, _) if class != ResourceClass::Transportation && doc.processes[p.id].route.is_some() => c.fail(
                "transport routes",
                StructureError::UnexpectedRoute(p.name.clone()).to_string(),
            ),
            _ => {}
        }
    }

    let resolve_pairs = |c: &mut Checks, list: &[Allocation], what: &str| -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for a in list {
            let w = process_ix.get(a.process.as_str());
            let v = resource_ix.get(a.resource.as_str());
            if w.is_none() {
                c.fail(REFS, format!("{what} names unknown process `{}`", a.process));
            }
            if v.is_none() {
                c.fail(REFS, format!("{what} names unknown resource `{}`", a.resource));
            }
            if let (Some(&w), Some(&v)) = (w, v) {
                out.push((w, v));
            }
        }
        out
    };
    let kb_pairs = resolve_pairs(&mut c, &doc.knowledge_base, "knowledge base entry");
    let ks_pairs = resolve_pairs(&mut c, &doc.constraints, "constraint");

    if resources.len() == doc.resources.len() {
        let shape = (processes.len(), resources.len());
        let kb = BoolMatrix::from_coords(shape.0, shape.1, kb_pairs.iter().copied()).expect("resolved indices");
        for (w, v) in block_mask_violations(&processes, &resources, &kb) {
            c.fail(
                "block mask",
                StructureError::BlockMask {
                    process: processes[w].name.clone(),
                    process_class: processes[w].class,
                    resource: resources[v].name.clone(),
                    resource_class: resources[v].class,
                }
                .to_string(),
            );
        }
    }

    // Individuals need the place list, but their name references can be
    // checked now so that one pass reports everything.
    let individual_ix = index_of(doc.individuals.iter().map(|i| i.id.as_str()));
    check_health_references(&mut c, &doc, &process_ix, &individual_ix);

    if c.any_failed() {
        compile_schedule(&mut c, &doc, None, &process_ix, &resource_ix, &individual_ix);
        c.skip_rest("aggregation");
        return Err(c.report());
    }

    let shape = (processes.len(), resources.len());
    let kb = BoolMatrix::from_coords(shape.0, shape.1, kb_pairs).expect("resolved indices");
    let ks = BoolMatrix::from_coords(shape.0, shape.1, ks_pairs).expect("resolved indices");
    let mut model = match StructuralModel::new(resources, processes, kb, ks) {
        Ok(m) => m,
        Err(e) => {
            c.fail(structure_check(&e), e.to_string());
            c.skip_rest("aggregation");
            return Err(c.report());
        }
    };

    // Aggregation
    let aggregated = match (&doc.chronic_abstraction, doc.aggregation.is_empty()) {
        (Some(_), false) => Err("use either chronic_abstraction or aggregation groups, not both".to_string()),
        (Some(spec), true) => {
            let clinic: Result<Vec<usize>, String> = match &spec.clinic_buffers {
                Some(names) => names
                    .iter()
                    .map(|n| {
                        resource_ix
                            .get(n.as_str())
                            .copied()
                            .ok_or_else(|| format!("clinic buffer `{n}` is not a resource"))
                    })
                    .collect(),
                None => Ok(model
                    .buffers()
                    .iter()
                    .copied()
                    .filter(|&r| !model.resources()[r].name.eq_ignore_ascii_case(OUTSIDE_CLINIC))
                    .collect()),
            };
            clinic.and_then(|clinic| model.apply_chronic_abstraction(&clinic).map_err(|e| e.to_string()))
        }
        (None, false) => group_aggregation(&model, &doc.aggregation)
            .and_then(|a| model.clone().with_aggregation(a).map_err(|e| e.to_string())),
        (None, true) => Ok(model.clone()),
    };
    match aggregated {
        Ok(m) => model = m,
        Err(e) => {
            c.fail("aggregation", e);
            c.skip_rest("transition parameters");
            return Err(c.report());
        }
    }

    // Delivery net
    let params = transition_parameters(&mut c, &doc.assumed_values, &model, &process_ix, &resource_ix);
    let net = match params.map(|p| DeliveryNet::from_model(&model, p)) {
        Some(Ok(net)) => Some(net),
        Some(Err(e)) => {
            c.fail("incidence column sums", e.to_string());
            None
        }
        None => {
            c.skipped.insert("incidence column sums");
            None
        }
    };
    let selector = TransformSelector::from_model(&model);

    // Individuals
    let place_ix: BTreeMap<String, usize> = model
        .place_names()
        .into_iter()
        .enumerate()
        .map(|(i, n)| (n, i))
        .collect();
    let mut individuals = Vec::new();
    for spec in &doc.individuals {
        if let Some(ind) = compile_individual(&mut c, &doc.assumed_values, spec, &model, &selector, &place_ix) {
            individuals.push(ind);
        }
    }

    // Schedule
    let schedule = compile_schedule(&mut c, &doc, Some(&model), &process_ix, &resource_ix, &individual_ix);

    match net {
        Some(net) if !c.any_failed() && individuals.len() == doc.individuals.len() => Ok(Scenario {
            document: doc,
            model,
            net,
            selector,
            individuals,
            schedule,
        }),
        _ => Err(c.report()),
    }
}

fn group_aggregation(model: &StructuralModel, groups: &[AggregateSpec]) -> Result<AggregationMatrix, String> {
    let mut a = BoolMatrix::zeros(groups.len(), model.buffers().len());
    for (g, group) in groups.iter().enumerate() {
        for m in &group.members {
            let buffer = model
                .resource_named(m)
                .and_then(|r| model.buffer_index(r.id))
                .ok_or_else(|| format!("aggregate `{}` lists `{m}`, which is not a buffer", group.name))?;
            a.set(g, buffer, true).map_err(|e| e.to_string())?;
        }
    }
    AggregationMatrix::new(a, groups.iter().map(|g| g.name.clone()).collect()).map_err(|e| e.to_string())
}

fn transition_parameters(
    c: &mut Checks,
    values: &AssumedValues,
    model: &StructuralModel,
    process_ix: &BTreeMap<&str, usize>,
    resource_ix: &BTreeMap<&str, usize>,
) -> Option<TransitionParameters> {
    const CHECK: &str = "transition parameters";
    let n = model.dof_count();
    let mut params = TransitionParameters {
        durations: vec![values.default_duration; n],
        costs: vec![values.default_cost; n],
        capacities: vec![values.default_capacity; n],
    };
    let before = c.failures.get(CHECK).map_or(0, Vec::len);
    let locate = |c: &mut Checks, p: &str, r: &str, what: &str| -> Option<usize> {
        let psi = match (process_ix.get(p), resource_ix.get(r)) {
            (Some(&w), Some(&v)) => model.dof_index(w, v),
            _ => None,
        };
        if psi.is_none() {
            c.fail(
                CHECK,
                format!("{what} given for `{p}` on `{r}`, which is not a degree of freedom"),
            );
        }
        psi
    };
    for d in &values.durations {
        if let Some(psi) = locate(c, &d.process, &d.resource, "duration") {
            params.durations[psi] = d.value;
        }
    }
    for d in &values.costs {
        if let Some(psi) = locate(c, &d.process, &d.resource, "cost") {
            params.costs[psi] = d.value;
        }
    }
    for d in &values.capacities {
        if let Some(psi) = locate(c, &d.process, &d.resource, "capacity") {
            params.capacities[psi] = d.value;
        }
    }
    if params.durations.iter().chain(&params.costs).any(|x| x.is_negative()) {
        c.fail(CHECK, "durations and costs must be nonnegative");
    }
    if params.capacities.contains(&0) {
        c.fail(CHECK, "capacities must be at least 1");
    }
    let after = c.failures.get(CHECK).map_or(0, Vec::len);
    (after == before).then_some(params)
}

fn check_health_references(
    c: &mut Checks,
    doc: &ScenarioDocument,
    process_ix: &BTreeMap<&str, usize>,
    individual_ix: &BTreeMap<&str, usize>,
) {
    const REFS: &str = "references resolve";
    for ind in &doc.individuals {
        let states: BTreeSet<&str> = ind.states.iter().map(|s| s.name.as_str()).collect();
        let events: BTreeSet<&str> = ind.events.iter().map(|e| e.name.as_str()).collect();
        for e in &ind.events {
            for s in e.inputs.iter().chain(&e.outputs) {
                if !states.contains(s.as_str()) {
                    c.fail(
                        REFS,
                        format!("event `{}` of `{}` names unknown state `{s}`", e.name, ind.id),
                    );
                }
            }
            if e.inputs.is_empty() || e.outputs.is_empty() {
                c.fail(
                    "health arc normalization",
                    format!(
                        "event `{}` of `{}` needs at least one input and one output",
                        e.name, ind.id
                    ),
                );
            }
        }
        for s in ind.initial_marking.keys() {
            if !states.contains(s.as_str()) {
                c.fail(
                    REFS,
                    format!("initial marking of `{}` names unknown state `{s}`", ind.id),
                );
            }
        }
        for f in &ind.feasibility {
            if !events.contains(f.event.as_str()) {
                c.fail(
                    REFS,
                    format!("feasibility of `{}` names unknown event `{}`", ind.id, f.event),
                );
            }
            if !process_ix.contains_key(f.process.as_str()) {
                c.fail(
                    REFS,
                    format!("feasibility of `{}` names unknown process `{}`", ind.id, f.process),
                );
            }
        }
    }
    let av = &doc.assumed_values;
    let known_individual = |id: &str| individual_ix.get(id).map(|&l| &doc.individuals[l]);
    for (id, map) in &av.values {
        match known_individual(id) {
            None => c.fail(REFS, format!("values given for unknown individual `{id}`")),
            Some(ind) => {
                for s in map.keys() {
                    if !ind.states.iter().any(|x| &x.name == s) {
                        c.fail(REFS, format!("value given for unknown state `{s}` of `{id}`"));
                    }
                }
            }
        }
    }
    for (id, map) in &av.health_durations {
        match known_individual(id) {
            None => c.fail(REFS, format!("health durations given for unknown individual `{id}`")),
            Some(ind) => {
                for e in map.keys() {
                    if !ind.events.iter().any(|x| &x.name == e) {
                        c.fail(REFS, format!("duration given for unknown event `{e}` of `{id}`"));
                    }
                }
            }
        }
    }
    for w in &av.arc_weights {
        match known_individual(&w.individual) {
            None => c.fail(
                REFS,
                format!("arc weights given for unknown individual `{}`", w.individual),
            ),
            Some(ind) => match ind.events.iter().find(|e| e.name == w.event) {
                None => c.fail(
                    REFS,
                    format!("arc weights given for unknown event `{}` of `{}`", w.event, ind.id),
                ),
                Some(e) => {
                    let listed = match w.side {
                        ArcSide::Input => &e.inputs,
                        ArcSide::Output => &e.outputs,
                    };
                    let listed: BTreeSet<&str> = listed.iter().map(String::as_str).collect();
                    let given: BTreeSet<&str> = w.weights.keys().map(String::as_str).collect();
                    if listed != given {
                        c.fail(
                            REFS,
                            format!(
                                "arc weights of `{}` ({:?} side) must cover exactly the listed states",
                                e.name, w.side
                            ),
                        );
                    }
                }
            },
        }
    }
}

fn compile_individual(
    c: &mut Checks,
    av: &AssumedValues,
    spec: &IndividualSpec,
    model: &StructuralModel,
    selector: &TransformSelector,
    place_ix: &BTreeMap<String, usize>,
) -> Option<Individual> {
    let state_ix = index_of(spec.states.iter().map(|s| s.name.as_str()));
    let n_states = spec.states.len();
    let n_events = spec.events.len();
    let mut ok = true;

    let initial_place = place_ix.get(&spec.initial_place).copied();
    if initial_place.is_none() {
        c.fail(
            "references resolve",
            format!(
                "initial place `{}` of `{}` is not a place of the delivery net",
                spec.initial_place, spec.id
            ),
        );
        ok = false;
    }

    let mut values = vec![f64::NAN; n_states];
    let given = av.values.get(&spec.id);
    for (s, state) in spec.states.iter().enumerate() {
        match given.and_then(|m| m.get(&state.name)) {
            Some(&v) if (0.0..=1.0).contains(&v) => values[s] = v,
            Some(&v) => {
                c.fail(
                    "health values",
                    format!("value {v} of `{}` for `{}` lies outside [0, 1]", state.name, spec.id),
                );
                ok = false;
            }
            None => {
                c.fail(
                    "health values",
                    format!("no value given for state `{}` of `{}`", state.name, spec.id),
                );
                ok = false;
            }
        }
    }

    let mut minus = DenseMatrix::filled(n_states, n_events, 0.0);
    let mut plus = DenseMatrix::filled(n_states, n_events, 0.0);
    for (x, e) in spec.events.iter().enumerate() {
        for (side, list, m) in [
            (ArcSide::Input, &e.inputs, &mut minus),
            (ArcSide::Output, &e.outputs, &mut plus),
        ] {
            let weights = av
                .arc_weights
                .iter()
                .find(|w| w.individual == spec.id && w.event == e.name && w.side == side);
            for s in list {
                let w = match weights {
                    Some(w) => w.weights[s],
                    None => 1.0 / list.len() as f64,
                };
                m[(state_ix[s.as_str()], x)] += w;
            }
        }
    }
    let durations: Vec<Time> = spec
        .events
        .iter()
        .map(|e| {
            av.health_durations
                .get(&spec.id)
                .and_then(|m| m.get(&e.name))
                .copied()
                .unwrap_or(Time::ZERO)
        })
        .collect();
    if durations.iter().any(Time::is_negative) {
        c.fail(
            "transition parameters",
            format!("negative health event duration for `{}`", spec.id),
        );
        ok = false;
    }
    if !ok {
        c.skipped.insert("health arc normalization");
        return None;
    }
    let events = spec
        .events
        .iter()
        .map(|e| HealthEvent {
            name: e.name.clone(),
            kind: e.kind,
        })
        .collect();
    let states = spec.states.iter().map(|s| s.name.clone()).collect();
    let net = match HealthNet::new(states, events, minus, plus, durations, values) {
        Ok(n) => n,
        Err(e) => {
            c.fail("health arc normalization", format!("`{}`: {e}", spec.id));
            return None;
        }
    };

    let mut initial = HealthMarking {
        states: vec![0.0; n_states],
        events: vec![0.0; n_events],
    };
    for (s, &m) in &spec.initial_marking {
        initial.states[state_ix[s.as_str()]] = m;
    }
    if let Err(e) = initial.validate() {
        c.fail("initial mass normalized", format!("`{}`: {e}", spec.id));
        return None;
    }

    let mut lambda = BoolMatrix::zeros(n_events, selector.processes().len());
    let event_ix = index_of(spec.events.iter().map(|e| e.name.as_str()));
    for f in &spec.feasibility {
        let Some(process) = model.process_named(&f.process) else {
            continue;
        };
        match selector.position(process.id) {
            Some(j) => lambda.set(event_ix[f.event.as_str()], j, true).expect("in range"),
            None => c.fail(
                "feasibility tags",
                format!(
                    "`{}` links `{}` to {} process `{}`; only transformation processes with a degree of freedom realize health events",
                    spec.id, f.event, process.class, f.process
                ),
            ),
        }
    }
    let feasibility = match FeasibilityMatrix::new(lambda, &net) {
        Ok(f) => f,
        Err(e) => {
            c.fail("feasibility tags", format!("`{}`: {e}", spec.id));
            return None;
        }
    };
    Some(Individual {
        id: spec.id.clone(),
        net,
        feasibility,
        initial,
        initial_place: initial_place.expect("checked above"),
    })
}

fn compile_schedule(
    c: &mut Checks,
    doc: &ScenarioDocument,
    model: Option<&StructuralModel>,
    process_ix: &BTreeMap<&str, usize>,
    resource_ix: &BTreeMap<&str, usize>,
    individual_ix: &BTreeMap<&str, usize>,
) -> Vec<ScheduleEntry> {
    const REFS: &str = "references resolve";
    let mut out = Vec::new();
    for (i, entry) in doc.schedule.iter().enumerate() {
        if entry.time().is_negative() {
            c.fail("schedule order", format!("entry {i} has negative time"));
        }
        if i > 0 && entry.time() < doc.schedule[i - 1].time() {
            c.fail(
                "schedule order",
                format!("entry {i} at t={} precedes its predecessor", entry.time()),
            );
        }
        let (time, who) = match entry {
            ScheduleSpec::Delivery { time, individual, .. } | ScheduleSpec::Health { time, individual, .. } => {
                (*time, individual)
            }
        };
        let Some(&l) = individual_ix.get(who.as_str()) else {
            c.fail(REFS, format!("schedule entry {i} names unknown individual `{who}`"));
            continue;
        };
        let ind = &doc.individuals[l];
        let state = |c: &mut Checks, name: &Option<String>| -> Option<usize> {
            let name = name.as_ref()?;
            let s = ind.states.iter().position(|s| &s.name == name);
            if s.is_none() {
                c.fail(REFS, format!("schedule entry {i} names unknown outcome state `{name}`"));
            }
            s
        };
        match entry {
            ScheduleSpec::Delivery {
                process,
                resource,
                label,
                outcome,
                ..
            } => {
                let pair = (process_ix.get(process.as_str()), resource_ix.get(resource.as_str()));
                let outcome = state(c, outcome);
                let psi = match (pair, model) {
                    ((Some(&w), Some(&v)), Some(model)) => model.dof_index(w, v),
                    ((Some(_), Some(_)), None) => continue,
                    _ => None,
                };
                match psi {
                    Some(psi) => out.push(ScheduleEntry::Delivery {
                        time,
                        psi,
                        individual: l,
                        label: label.clone(),
                        outcome,
                    }),
                    None => c.fail(
                        REFS,
                        format!("schedule entry {i}: `{process}` on `{resource}` is not a degree of freedom"),
                    ),
                }
            }
            ScheduleSpec::Health { events, outcome, .. } => {
                let outcome = state(c, outcome);
                let mut candidates = Vec::new();
                for name in events {
                    match ind.events.iter().position(|e| &e.name == name) {
                        None => c.fail(REFS, format!("schedule entry {i} names unknown health event `{name}`")),
                        Some(x) if ind.events[x].kind != HealthEventKind::Stochastic => c.fail(
                            "feasibility tags",
                            format!("schedule entry {i}: induced event `{name}` can only fire through care delivery"),
                        ),
                        Some(x) => candidates.push(x),
                    }
                }
                if events.is_empty() {
                    c.fail(REFS, format!("schedule entry {i} lists no health events"));
                }
                out.push(ScheduleEntry::Health {
                    time,
                    individual: l,
                    candidates,
                    outcome,
                });
            }
        }
    }
    out
}
