//! Structural (form / function / concept) model of a care delivery system.
//!
//! Resources and processes are classified into transformation, decision,
//! measurement and transportation. The knowledge base `J_S` allocates
//! processes to resources, the constraint matrix `K_S` removes allocations,
//! and their boolean difference `A_S` enumerates the structural degrees of
//! freedom (one Petri net transition each).
//!
//! All matrices use one vectorization convention: columns are stacked, so
//! the cell `(process w, resource v)` sits at position `v * n_processes + w`
//! and degrees of freedom are numbered in that order.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::matrix::{BoolMatrix, ShapeError};

/// Name of the buffer that stands for "not inside any facility".
pub const OUTSIDE_CLINIC: &str = "outside clinic";
/// Name of the single aggregate place produced by the chronic abstraction.
pub const HEALTHCARE_CLINIC: &str = "healthcare clinic";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StructureError {
    #[error("resource `{0}` declares no capabilities")]
    EmptyCapabilities(String),
    #[error("resource `{resource}` is declared {declared} but its capabilities classify it as {computed}")]
    ClassMismatch {
        resource: String,
        declared: ResourceClass,
        computed: ResourceClass,
    },
    #[error("{kind} ids must be contiguous from 0: expected {expected}, found {found}")]
    NonContiguousId {
        kind: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("process `{0}` breaks the transformation/decision/measurement/transportation ordering")]
    ProcessOrder(String),
    #[error(transparent)]
    Shape(#[from] ShapeError),
    #[error("{process_class} process `{process}` cannot be allocated to {resource_class} resource `{resource}`")]
    BlockMask {
        process: String,
        process_class: ResourceClass,
        resource: String,
        resource_class: ResourceClass,
    },
    #[error("transportation process `{0}` has no origin/destination")]
    MissingRoute(String),
    #[error("non-transportation process `{0}` must not declare a route")]
    UnexpectedRoute(String),
    #[error("route of `{process}` ends at `{resource}`, which is not a buffer")]
    RouteEndpointNotBuffer { process: String, resource: String },
    #[error("model has no `outside clinic` buffer")]
    MissingOutsideClinic,
    #[error("invalid clinic buffer set: {0}")]
    ClinicBuffers(String),
    #[error("no transportation degree of freedom enters or exits the clinic")]
    NoClinicBoundaryTransport,
    #[error("aggregation column {column} has {count} ones; every buffer needs exactly one aggregate")]
    AggregationColumn { column: usize, count: usize },
    #[error("aggregation matrix has {found} columns but there are {expected} buffers")]
    AggregationWidth { expected: usize, found: usize },
}

/// Class shared by resources and processes. Declaration order is the
/// classification precedence: transform > decide > measure > transport.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResourceClass {
    #[serde(alias = "transform")]
    Transformation,
    #[serde(alias = "decide")]
    Decision,
    #[serde(alias = "measure")]
    Measurement,
    #[serde(alias = "transport")]
    Transportation,
}

impl ResourceClass {
    pub const ALL: [ResourceClass; 4] = [
        ResourceClass::Transformation,
        ResourceClass::Decision,
        ResourceClass::Measurement,
        ResourceClass::Transportation,
    ];

    pub fn is_buffer(self) -> bool {
        self != ResourceClass::Transportation
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ResourceClass::Transformation => "transformation",
            ResourceClass::Decision => "decision",
            ResourceClass::Measurement => "measurement",
            ResourceClass::Transportation => "transportation",
        }
    }
}

impl fmt::Display for ResourceClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Classifies a resource by the most significant process class it can
/// perform.
pub fn classify_resource(capabilities: &BTreeSet<ResourceClass>) -> Result<ResourceClass, StructureError> {
    capabilities
        .iter()
        .next()
        .copied()
        .ok_or_else(|| StructureError::EmptyCapabilities(String::new()))
}

/// Block pattern of the knowledge base: a process may run on a resource whose class is at
/// least as significant as the process class.
pub fn allocation_allowed(process: ResourceClass, resource: ResourceClass) -> bool {
    resource <= process
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Resource {
    pub id: usize,
    pub name: String,
    pub class: ResourceClass,
    pub human: bool,
}

impl Resource {
    /// Classifies from capabilities and checks any author-declared class.
    pub fn from_capabilities(
        id: usize,
        name: impl Into<String>,
        capabilities: &BTreeSet<ResourceClass>,
        declared: Option<ResourceClass>,
        human: bool,
    ) -> Result<Self, StructureError> {
        let name = name.into();
        let class = classify_resource(capabilities).map_err(|_| StructureError::EmptyCapabilities(name.clone()))?;
        if let Some(declared) = declared {
            if declared != class {
                return Err(StructureError::ClassMismatch {
                    resource: name,
                    declared,
                    computed: class,
                });
            }
        }
        Ok(Resource { id, name, class, human })
    }

    pub fn is_buffer(&self) -> bool {
        self.class.is_buffer()
    }
}

/// Origin and destination buffers (resource ids) of a transportation
/// process.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Route {
    pub origin: usize,
    pub destination: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Process {
    pub id: usize,
    pub name: String,
    pub class: ResourceClass,
    pub route: Option<Route>,
}

/// One structural degree of freedom: process `process` executed by
/// resource `resource`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Dof {
    pub process: usize,
    pub resource: usize,
}

/// Counts the ones of a concept matrix.
pub fn compute_dof(availability: &BoolMatrix) -> usize {
    availability.count_ones()
}

/// Lists the degrees of freedom in vectorization order; the list index is
/// the transition index.
pub fn enumerate_dof(availability: &BoolMatrix) -> Vec<Dof> {
    availability
        .vectorize()
        .into_iter()
        .map(|p| {
            let (process, resource) = availability.vec_coords(p);
            Dof { process, resource }
        })
        .collect()
}

/// Elementary-row projection from `vec()` space onto the dense DOF index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectionOperator {
    positions: Vec<usize>,
    width: usize,
}

impl ProjectionOperator {
    pub fn rows(&self) -> usize {
        self.positions.len()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Vec-position selected by row `i`.
    pub fn position(&self, i: usize) -> usize {
        self.positions[i]
    }

    /// `P * vec(m)` for a matrix shaped like the knowledge base.
    pub fn project(&self, m: &BoolMatrix) -> Vec<u8> {
        assert_eq!(
            m.rows() * m.cols(),
            self.width,
            "operand must match the knowledge base shape"
        );
        self.positions
            .iter()
            .map(|&p| {
                let (r, c) = m.vec_coords(p);
                u8::from(m.get(r, c))
            })
            .collect()
    }

    pub fn to_matrix(&self) -> BoolMatrix {
        BoolMatrix::from_coords(
            self.positions.len(),
            self.width,
            self.positions.iter().enumerate().map(|(i, &p)| (i, p)),
        )
        .expect("positions are within width")
    }
}

pub fn build_projection(availability: &BoolMatrix) -> ProjectionOperator {
    ProjectionOperator {
        positions: availability.vectorize(),
        width: availability.rows() * availability.cols(),
    }
}

/// `A_S` together with its DOF enumeration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemConcept {
    pub availability: BoolMatrix,
    pub dofs: Vec<Dof>,
}

impl SystemConcept {
    pub fn new(knowledge_base: &BoolMatrix, constraints: &BoolMatrix) -> Result<Self, ShapeError> {
        let availability = knowledge_base.boolean_subtract(constraints)?;
        let dofs = enumerate_dof(&availability);
        Ok(SystemConcept { availability, dofs })
    }

    pub fn dof_count(&self) -> usize {
        self.dofs.len()
    }
}

/// `A_R`: maps each buffer (column) to exactly one aggregate place (row).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AggregationMatrix {
    matrix: BoolMatrix,
    names: Vec<String>,
}

impl AggregationMatrix {
    pub fn new(matrix: BoolMatrix, names: Vec<String>) -> Result<Self, StructureError> {
        if names.len() != matrix.rows() {
            return Err(ShapeError::Mismatch {
                left: matrix.shape(),
                right: (names.len(), matrix.cols()),
            }
            .into());
        }
        check_aggregation_columns(&matrix)?;
        Ok(AggregationMatrix { matrix, names })
    }

    pub fn identity(names: Vec<String>) -> Self {
        let n = names.len();
        AggregationMatrix {
            matrix: BoolMatrix::identity(n),
            names,
        }
    }

    pub fn matrix(&self) -> &BoolMatrix {
        &self.matrix
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Aggregate row owning buffer column `buffer`.
    pub fn aggregate_of(&self, buffer: usize) -> usize {
        self.matrix
            .col_ones(buffer)
            .next()
            .expect("validated: every column has one aggregate")
    }
}

fn check_aggregation_columns(matrix: &BoolMatrix) -> Result<(), StructureError> {
    let mut counts = vec![0usize; matrix.cols()];
    for (_, c) in matrix.iter_ones() {
        counts[c] += 1;
    }
    match counts.iter().position(|&n| n != 1) {
        Some(column) => Err(StructureError::AggregationColumn {
            column,
            count: counts[column],
        }),
        None => Ok(()),
    }
}

/// Groups `buffers` by aggregate: entry `i` lists the buffers `j` with
/// `A_R(i, j) = 1`.
pub fn aggregate_resources<T: Clone>(aggregation: &BoolMatrix, buffers: &[T]) -> Result<Vec<Vec<T>>, StructureError> {
    if aggregation.cols() != buffers.len() {
        return Err(StructureError::AggregationWidth {
            expected: buffers.len(),
            found: aggregation.cols(),
        });
    }
    check_aggregation_columns(aggregation)?;
    Ok((0..aggregation.rows())
        .map(|i| aggregation.row_ones(i).map(|j| buffers[j].clone()).collect())
        .collect())
}

/// A validated, immutable structural model.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuralModel {
    resources: Vec<Resource>,
    processes: Vec<Process>,
    knowledge_base: BoolMatrix,
    constraints: BoolMatrix,
    concept: SystemConcept,
    projection: ProjectionOperator,
    buffers: Vec<usize>,
    buffer_index: Vec<Option<usize>>,
    aggregation: Option<AggregationMatrix>,
}

impl StructuralModel {
    pub fn new(
        resources: Vec<Resource>,
        processes: Vec<Process>,
        knowledge_base: BoolMatrix,
        constraints: BoolMatrix,
    ) -> Result<Self, StructureError> {
        for (i, r) in resources.iter().enumerate() {
            if r.id != i {
                return Err(StructureError::NonContiguousId {
                    kind: "resource",
                    expected: i,
                    found: r.id,
                });
            }
        }
        for (i, p) in processes.iter().enumerate() {
            if p.id != i {
                return Err(StructureError::NonContiguousId {
                    kind: "process",
                    expected: i,
                    found: p.id,
                });
            }
        }
        for pair in processes.windows(2) {
            if pair[1].class < pair[0].class {
                return Err(StructureError::ProcessOrder(pair[1].name.clone()));
            }
        }
        let shape = (processes.len(), resources.len());
        for m in [&knowledge_base, &constraints] {
            if m.shape() != shape {
                return Err(ShapeError::Mismatch {
                    left: m.shape(),
                    right: shape,
                }
                .into());
            }
        }
        for p in &processes {
            match (p.class, p.route) {
                (ResourceClass::Transportation, None) => return Err(StructureError::MissingRoute(p.name.clone())),
                (ResourceClass::Transportation, Some(route)) => {
                    for end in [route.origin, route.destination] {
                        let ok = resources.get(end).is_some_and(Resource::is_buffer);
                        if !ok {
                            let resource = resources.get(end).map_or_else(|| format!("#{end}"), |r| r.name.clone());
                            return Err(StructureError::RouteEndpointNotBuffer {
                                process: p.name.clone(),
                                resource,
                            });
                        }
                    }
                }
                (_, Some(_)) => return Err(StructureError::UnexpectedRoute(p.name.clone())),
                (_, None) => {}
            }
        }
        if let Some((w, v)) = block_mask_violations(&processes, &resources, &knowledge_base)
            .into_iter()
            .next()
        {
            return Err(StructureError::BlockMask {
                process: processes[w].name.clone(),
                process_class: processes[w].class,
                resource: resources[v].name.clone(),
                resource_class: resources[v].class,
            });
        }

        let concept = SystemConcept::new(&knowledge_base, &constraints)?;
        let projection = build_projection(&concept.availability);
        let mut buffers = Vec::new();
        let mut buffer_index = vec![None; resources.len()];
        for r in resources.iter().filter(|r| r.is_buffer()) {
            buffer_index[r.id] = Some(buffers.len());
            buffers.push(r.id);
        }
        Ok(StructuralModel {
            resources,
            processes,
            knowledge_base,
            constraints,
            concept,
            projection,
            buffers,
            buffer_index,
            aggregation: None,
        })
    }

    pub fn resources(&self) -> &[Resource] {
        &self.resources
    }

    pub fn processes(&self) -> &[Process] {
        &self.processes
    }

    pub fn knowledge_base(&self) -> &BoolMatrix {
        &self.knowledge_base
    }

    pub fn constraints(&self) -> &BoolMatrix {
        &self.constraints
    }

    pub fn concept(&self) -> &SystemConcept {
        &self.concept
    }

    pub fn dofs(&self) -> &[Dof] {
        &self.concept.dofs
    }

    pub fn dof_count(&self) -> usize {
        self.concept.dof_count()
    }

    pub fn projection(&self) -> &ProjectionOperator {
        &self.projection
    }

    /// Resource ids of the buffers, in buffer-index order.
    pub fn buffers(&self) -> &[usize] {
        &self.buffers
    }

    pub fn buffer_index(&self, resource: usize) -> Option<usize> {
        self.buffer_index.get(resource).copied().flatten()
    }

    pub fn aggregation(&self) -> Option<&AggregationMatrix> {
        self.aggregation.as_ref()
    }

    pub fn resource_named(&self, name: &str) -> Option<&Resource> {
        self.resources.iter().find(|r| r.name == name)
    }

    pub fn process_named(&self, name: &str) -> Option<&Process> {
        self.processes.iter().find(|p| p.name == name)
    }

    /// Transition index of `(process, resource)` if it is an available DOF.
    pub fn dof_index(&self, process: usize, resource: usize) -> Option<usize> {
        self.concept
            .dofs
            .binary_search_by_key(&(resource, process), |d| (d.resource, d.process))
            .ok()
    }

    /// Transformation processes in process order; their position is the
    /// column index of feasibility matrices.
    pub fn transformation_processes(&self) -> Vec<usize> {
        self.processes
            .iter()
            .filter(|p| p.class == ResourceClass::Transformation)
            .map(|p| p.id)
            .collect()
    }

    /// Names of the Petri net places: aggregates when an aggregation is
    /// attached, buffers otherwise.
    pub fn place_names(&self) -> Vec<String> {
        match &self.aggregation {
            Some(a) => a.names().to_vec(),
            None => self.buffers.iter().map(|&r| self.resources[r].name.clone()).collect(),
        }
    }

    pub fn with_aggregation(mut self, aggregation: AggregationMatrix) -> Result<Self, StructureError> {
        if aggregation.matrix().cols() != self.buffers.len() {
            return Err(StructureError::AggregationWidth {
                expected: self.buffers.len(),
                found: aggregation.matrix().cols(),
            });
        }
        self.aggregation = Some(aggregation);
        Ok(self)
    }

    /// Applies the chronic-care abstraction: intra-clinic transportation
    /// DOFs are constrained away and every clinic buffer is folded into one
    /// `healthcare clinic` place next to `outside clinic`.
    pub fn apply_chronic_abstraction(&self, clinic_buffers: &[usize]) -> Result<Self, StructureError> {
        let outside = self
            .buffers
            .iter()
            .copied()
            .find(|&r| self.resources[r].name.eq_ignore_ascii_case(OUTSIDE_CLINIC))
            .ok_or(StructureError::MissingOutsideClinic)?;
        let clinic: BTreeSet<usize> = clinic_buffers.iter().copied().collect();
        if clinic.contains(&outside) {
            return Err(StructureError::ClinicBuffers(
                "`outside clinic` cannot be a clinic buffer".into(),
            ));
        }
        if let Some(&r) = clinic.iter().find(|&&r| self.buffer_index(r).is_none()) {
            let name = self.resources.get(r).map_or("?", |x| x.name.as_str());
            return Err(StructureError::ClinicBuffers(format!("`{name}` is not a buffer")));
        }
        if let Some(&r) = self.buffers.iter().find(|&&r| r != outside && !clinic.contains(&r)) {
            return Err(StructureError::ClinicBuffers(format!(
                "buffer `{}` is neither outside nor inside the clinic",
                self.resources[r].name
            )));
        }

        let crosses = |route: Route| clinic.contains(&route.origin) != clinic.contains(&route.destination);
        let boundary = self
            .concept
            .dofs
            .iter()
            .any(|d| self.processes[d.process].route.is_some_and(crosses));
        if !boundary {
            return Err(StructureError::NoClinicBoundaryTransport);
        }

        let mut constraints = self.constraints.clone();
        for d in &self.concept.dofs {
            if let Some(route) = self.processes[d.process].route {
                if clinic.contains(&route.origin) && clinic.contains(&route.destination) {
                    constraints.set(d.process, d.resource, true)?;
                }
            }
        }

        let mut abstracted = StructuralModel::new(
            self.resources.clone(),
            self.processes.clone(),
            self.knowledge_base.clone(),
            constraints,
        )?;
        let mut a_r = BoolMatrix::zeros(2, self.buffers.len());
        for (j, &r) in self.buffers.iter().enumerate() {
            let row = usize::from(r != outside);
            a_r.set(row, j, true)?;
        }
        let names = vec![OUTSIDE_CLINIC.to_string(), HEALTHCARE_CLINIC.to_string()];
        abstracted.aggregation = Some(AggregationMatrix::new(a_r, names)?);
        Ok(abstracted)
    }
}

/// Cells of the knowledge base that break the lower-block-triangular
/// class pattern.
pub fn block_mask_violations(
    processes: &[Process],
    resources: &[Resource],
    knowledge_base: &BoolMatrix,
) -> Vec<(usize, usize)> {
    knowledge_base
        .iter_ones()
        .filter(|&(w, v)| match (processes.get(w), resources.get(v)) {
            (Some(p), Some(r)) => !allocation_allowed(p.class, r.class),
            _ => true,
        })
        .collect()
}

/// Incremental construction helper. Processes must be added grouped by
/// class (transformation, decision, measurement, transportation).
#[derive(Debug, Default, Clone)]
pub struct ModelBuilder {
    resources: Vec<Resource>,
    processes: Vec<Process>,
    allocations: Vec<(usize, usize)>,
    constraints: Vec<(usize, usize)>,
}

impl ModelBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn resource(&mut self, name: &str, capabilities: &[ResourceClass]) -> Result<usize, StructureError> {
        let id = self.resources.len();
        let caps: BTreeSet<_> = capabilities.iter().copied().collect();
        self.resources
            .push(Resource::from_capabilities(id, name, &caps, None, false)?);
        Ok(id)
    }

    pub fn push_resource(&mut self, resource: Resource) -> usize {
        let id = self.resources.len();
        self.resources.push(Resource { id, ..resource });
        id
    }

    pub fn process(&mut self, name: &str, class: ResourceClass) -> usize {
        let id = self.processes.len();
        self.processes.push(Process {
            id,
            name: name.to_string(),
            class,
            route: None,
        });
        id
    }

    pub fn transport(&mut self, name: &str, origin: usize, destination: usize) -> usize {
        let id = self.processes.len();
        self.processes.push(Process {
            id,
            name: name.to_string(),
            class: ResourceClass::Transportation,
            route: Some(Route { origin, destination }),
        });
        id
    }

    pub fn allocate(&mut self, process: usize, resource: usize) -> &mut Self {
        self.allocations.push((process, resource));
        self
    }

    pub fn constrain(&mut self, process: usize, resource: usize) -> &mut Self {
        self.constraints.push((process, resource));
        self
    }

    pub fn build(&self) -> Result<StructuralModel, StructureError> {
        let shape = (self.processes.len(), self.resources.len());
        let kb = BoolMatrix::from_coords(shape.0, shape.1, self.allocations.iter().copied())?;
        let ks = BoolMatrix::from_coords(shape.0, shape.1, self.constraints.iter().copied())?;
        StructuralModel::new(self.resources.clone(), self.processes.clone(), kb, ks)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use ResourceClass::*;

    fn caps(c: &[ResourceClass]) -> BTreeSet<ResourceClass> {
        c.iter().copied().collect()
    }

    #[test]
    fn classification_precedence() {
        assert_eq!(
            classify_resource(&caps(&[Transformation, Measurement])),
            Ok(Transformation)
        );
        assert_eq!(classify_resource(&caps(&[Transportation])), Ok(Transportation));
        assert_eq!(
            classify_resource(&caps(&[Decision, Measurement, Transportation])),
            Ok(Decision)
        );
        assert!(classify_resource(&caps(&[])).is_err());
    }

    #[test]
    fn declared_class_must_match() {
        let err = Resource::from_capabilities(0, "imaging", &caps(&[Measurement]), Some(Decision), false).unwrap_err();
        assert!(matches!(err, StructureError::ClassMismatch { .. }));
        let err = Resource::from_capabilities(0, "nobody", &caps(&[]), None, false).unwrap_err();
        assert_eq!(err, StructureError::EmptyCapabilities("nobody".into()));
    }

    #[test]
    fn dof_counting_and_enumeration() {
        assert_eq!(compute_dof(&BoolMatrix::zeros(3, 4)), 0);
        let id = BoolMatrix::identity(2);
        assert_eq!(
            enumerate_dof(&id),
            vec![
                Dof {
                    process: 0,
                    resource: 0
                },
                Dof {
                    process: 1,
                    resource: 1
                }
            ]
        );
        // Column stacking puts (1,0) before (0,1).
        let m = BoolMatrix::from_rows(&[&[0, 1], &[1, 0]]);
        assert_eq!(
            enumerate_dof(&m),
            vec![
                Dof {
                    process: 1,
                    resource: 0
                },
                Dof {
                    process: 0,
                    resource: 1
                }
            ]
        );
    }

    #[test]
    fn projection_single_entry() {
        let mut a = BoolMatrix::zeros(3, 2);
        a.set(1, 1, true).unwrap();
        let p = build_projection(&a);
        assert_eq!(p.rows(), 1);
        assert_eq!(p.position(0), 4);
        let expected = BoolMatrix::from_coords(1, 6, [(0, 4)]).unwrap();
        assert_eq!(p.to_matrix(), expected);
        assert_eq!(p.project(&a), vec![1]);
    }

    #[test]
    fn block_mask_rejects_transform_on_transport_resource() {
        let mut b = ModelBuilder::new();
        let room = b.resource("room", &[Transformation]).unwrap();
        let cart = b.resource("cart", &[Transportation]).unwrap();
        let treat = b.process("treat", Transformation);
        b.allocate(treat, room).allocate(treat, cart);
        assert!(matches!(b.build(), Err(StructureError::BlockMask { .. })));
    }

    #[test]
    fn decision_process_may_run_on_transformation_resource() {
        let mut b = ModelBuilder::new();
        let room = b.resource("room", &[Transformation, Decision]).unwrap();
        let plan = b.process("plan", Decision);
        b.allocate(plan, room);
        assert_eq!(b.build().unwrap().dof_count(), 1);
    }

    #[test]
    fn process_order_enforced() {
        let mut b = ModelBuilder::new();
        b.resource("room", &[Transformation]).unwrap();
        b.process("measure", Measurement);
        b.process("treat", Transformation);
        assert!(matches!(b.build(), Err(StructureError::ProcessOrder(_))));
    }

    #[test]
    fn transport_routes_validated() {
        let mut b = ModelBuilder::new();
        let room = b.resource("room", &[Transformation]).unwrap();
        let cart = b.resource("cart", &[Transportation]).unwrap();
        let mv = b.transport("move", room, cart);
        b.allocate(mv, cart);
        assert!(matches!(b.build(), Err(StructureError::RouteEndpointNotBuffer { .. })));
    }

    #[test]
    fn constraint_outside_knowledge_base_is_ignored() {
        let mut b = ModelBuilder::new();
        let room = b.resource("room", &[Transformation]).unwrap();
        let t = b.process("treat", Transformation);
        let u = b.process("other", Transformation);
        b.allocate(t, room).constrain(u, room);
        assert_eq!(b.build().unwrap().dof_count(), 1);
    }

    /// outside clinic, reception, exam; enter/exit plus two intra-clinic moves.
    fn small_clinic() -> (ModelBuilder, [usize; 3]) {
        let mut b = ModelBuilder::new();
        let outside = b.resource(OUTSIDE_CLINIC, &[Decision]).unwrap();
        let reception = b.resource("reception", &[Decision]).unwrap();
        let exam = b.resource("exam room", &[Measurement]).unwrap();
        let walker = b.resource("escort", &[Transportation]).unwrap();
        let register = b.process("register", Decision);
        let examine = b.process("examine", Measurement);
        let enter = b.transport("enter clinic", outside, reception);
        let exit = b.transport("exit clinic", reception, outside);
        let to_exam = b.transport("reception to exam", reception, exam);
        let back = b.transport("exam to reception", exam, reception);
        b.allocate(register, reception).allocate(examine, exam);
        for p in [enter, exit, to_exam, back] {
            b.allocate(p, walker);
        }
        (b, [outside, reception, exam])
    }

    #[test]
    fn chronic_abstraction_removes_intra_clinic_transport() {
        let (b, [_, reception, exam]) = small_clinic();
        let model = b.build().unwrap();
        assert_eq!(model.dof_count(), 6);
        let chronic = model.apply_chronic_abstraction(&[reception, exam]).unwrap();
        assert_eq!(chronic.dof_count(), 4);
        let names: Vec<_> = chronic
            .dofs()
            .iter()
            .map(|d| chronic.processes()[d.process].name.as_str())
            .collect();
        assert!(names.contains(&"enter clinic") && names.contains(&"exit clinic"));
        assert!(names.contains(&"register") && names.contains(&"examine"));
        assert_eq!(chronic.place_names(), vec![OUTSIDE_CLINIC, HEALTHCARE_CLINIC]);
        let p = chronic.projection();
        assert!(p.project(&chronic.concept().availability).iter().all(|&x| x == 1));
    }

    #[test]
    fn chronic_abstraction_without_intra_transport_is_noop_on_constraints() {
        let mut b = ModelBuilder::new();
        let outside = b.resource(OUTSIDE_CLINIC, &[Decision]).unwrap();
        let clinic = b.resource("clinic", &[Transformation]).unwrap();
        let car = b.resource("car", &[Transportation]).unwrap();
        let t = b.process("treat", Transformation);
        let enter = b.transport("enter", outside, clinic);
        let exit = b.transport("exit", clinic, outside);
        b.allocate(t, clinic).allocate(enter, car).allocate(exit, car);
        let model = b.build().unwrap();
        let chronic = model.apply_chronic_abstraction(&[clinic]).unwrap();
        assert_eq!(chronic.constraints(), model.constraints());
        assert_eq!(chronic.dof_count(), model.dof_count());
    }

    #[test]
    fn chronic_abstraction_errors() {
        let mut b = ModelBuilder::new();
        let clinic = b.resource("clinic", &[Transformation]).unwrap();
        let t = b.process("treat", Transformation);
        b.allocate(t, clinic);
        let model = b.build().unwrap();
        assert_eq!(
            model.apply_chronic_abstraction(&[clinic]),
            Err(StructureError::MissingOutsideClinic)
        );

        let (b, [outside, reception, _exam]) = small_clinic();
        let model = b.build().unwrap();
        assert!(matches!(
            model.apply_chronic_abstraction(&[reception]),
            Err(StructureError::ClinicBuffers(_))
        ));
        assert!(matches!(
            model.apply_chronic_abstraction(&[outside]),
            Err(StructureError::ClinicBuffers(_))
        ));
    }

    #[test]
    fn aggregation_examples() {
        let buffers = vec!["a", "b", "c"];
        let groups = aggregate_resources(&BoolMatrix::identity(3), &buffers).unwrap();
        assert_eq!(groups, vec![vec!["a"], vec!["b"], vec!["c"]]);

        // Surgeon and operating room grouped into a surgical theatre.
        let theatre = BoolMatrix::from_rows(&[&[1, 1, 0], &[0, 0, 1]]);
        let groups = aggregate_resources(&theatre, &["surgeon", "operating room", "ward"]).unwrap();
        assert_eq!(groups[0], vec!["surgeon", "operating room"]);

        let bad = BoolMatrix::from_rows(&[&[1, 1, 0], &[0, 1, 0]]);
        assert_eq!(
            aggregate_resources(&bad, &buffers),
            Err(StructureError::AggregationColumn { column: 1, count: 2 })
        );
    }

    fn arb_matrix() -> impl Strategy<Value = BoolMatrix> {
        (1usize..9, 1usize..9, 0.0f64..0.4).prop_flat_map(|(r, c, density)| {
            proptest::collection::vec(proptest::bool::weighted(density.max(0.01)), r * c).prop_map(move |bits| {
                let coords = bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| (i / c, i % c));
                BoolMatrix::from_coords(r, c, coords).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn dof_count_matches_enumeration(a in arb_matrix()) {
            // brute-force scan over every cell
            let mut scan = 0;
            for w in 0..a.rows() {
                for v in 0..a.cols() {
                    if a.get(w, v) { scan += 1; }
                }
            }
            let list = enumerate_dof(&a);
            prop_assert_eq!(compute_dof(&a), scan);
            prop_assert_eq!(list.len(), scan);
            let unique: BTreeSet<_> = list.iter().collect();
            prop_assert_eq!(unique.len(), list.len());
        }

        #[test]
        fn projection_yields_ones(a in arb_matrix()) {
            let p = build_projection(&a);
            let pm = p.to_matrix();
            // direct multiplication of the projection matrix with vec(A)
            let vec_a: Vec<u8> = (0..a.rows() * a.cols())
                .map(|pos| { let (r, c) = a.vec_coords(pos); u8::from(a.get(r, c)) })
                .collect();
            for i in 0..pm.rows() {
                let row_sum: u8 = pm.row_ones(i).map(|j| vec_a[j]).sum();
                prop_assert_eq!(pm.row_ones(i).count(), 1);
                prop_assert_eq!(row_sum, 1);
            }
            prop_assert_eq!(pm.rows(), compute_dof(&a));
        }
    }
}
