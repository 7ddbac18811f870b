//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero when any criterion fails.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use carenet::cli::{cmd_simulate, run, RunMode};
use carenet::coordination::{Mode, SyncTrace};
use carenet::delivery::{
    build_incidence_in, build_incidence_out, simulate, DeliveryNet, FiringKind, Marking, ScheduledEventList,
    TransitionInfo, TransitionParameters,
};
use carenet::health::{HealthEvent, HealthEventKind, HealthMarking, HealthNet};
use carenet::matrix::DenseMatrix;
use carenet::rational::{Money, Rational, Time};
use carenet::report::{OUTCOMES_FILE, SUMMARY_FILE, TRACE_FILE, TRAJECTORY_FILE};
use carenet::scenario::{compile, load_scenario, read_document, Scenario};
use carenet::structural::{ModelBuilder, ResourceClass, HEALTHCARE_CLINIC, OUTSIDE_CLINIC};

const DOF_TIME_LIMIT: Duration = Duration::from_millis(100);
const ORACLE_TIME_LIMIT: Duration = Duration::from_secs(5);
const SAMPLING_TIME_LIMIT: Duration = Duration::from_secs(10);
const MASS_TOLERANCE: f64 = 1e-9;
const FREQUENCY_TOLERANCE: f64 = 0.01;

const RANDOM_MODELS: usize = 200;
const RANDOM_SCHEDULES: usize = 100;
const RANDOM_HEALTH_NETS: usize = 100;
const RESECTION_SAMPLES: usize = 100_000;

const ACUTE: &str = "acute_acl_repair.json";
const CHRONIC: &str = "chronic_neuro_oncology.json";

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn load(name: &str) -> Result<Scenario, String> {
    load_scenario(&fixture(name)).map_err(|e| format!("{name}: {e}"))
}

fn replay(s: &Scenario) -> Result<SyncTrace, String> {
    run(s, Mode::Replay).map_err(|e| e.to_string())
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn t(n: i64) -> Time {
    Rational::integer(n)
}

fn dof_reproduction() -> Check {
    let mut detail = Vec::new();
    for (name, expected) in [(ACUTE, 36), (CHRONIC, 7)] {
        let started = Instant::now();
        let s = load(name)?;
        let dof = s.model.dof_count();
        let elapsed = started.elapsed();
        ensure(dof == expected, || format!("{name}: DOF {dof}, expected {expected}"))?;
        ensure(elapsed < DOF_TIME_LIMIT, || format!("{name}: took {elapsed:?}"))?;
        detail.push(format!("{name} DOF={dof} in {elapsed:?}"));
    }
    Ok(detail.join("; "))
}

fn chronic_aggregation() -> Check {
    let mut doc = read_document(&fixture(CHRONIC)).map_err(|e| e.to_string())?;
    doc.chronic_abstraction = None;
    let raw = compile(doc).map_err(|r| r.to_string())?.model;
    let clinic: Vec<usize> = raw
        .buffers()
        .iter()
        .copied()
        .filter(|&r| raw.resources()[r].name != OUTSIDE_CLINIC)
        .collect();
    let abstracted = raw.apply_chronic_abstraction(&clinic).map_err(|e| e.to_string())?;
    let places: BTreeSet<String> = abstracted.place_names().into_iter().collect();
    let expected: BTreeSet<String> = [HEALTHCARE_CLINIC, OUTSIDE_CLINIC]
        .iter()
        .map(|s| s.to_string())
        .collect();
    ensure(places == expected, || format!("aggregate places {places:?}"))?;
    Ok(format!("{} buffers fold into {places:?}", raw.buffers().len()))
}

/// A random structural model together with the raw cells it was built from.
struct RandomModel {
    resources: Vec<ResourceClass>,
    /// Class and optional (origin, destination) resource per process.
    processes: Vec<(ResourceClass, Option<(usize, usize)>)>,
    knowledge: BTreeSet<(usize, usize)>,
    constrained: BTreeSet<(usize, usize)>,
}

fn random_model(rng: &mut ChaCha8Rng) -> RandomModel {
    use ResourceClass::*;
    let n_buffers = rng.random_range(1..=4);
    let mut resources = Vec::new();
    for _ in 0..n_buffers {
        let mut c: Vec<ResourceClass> = [Transformation, Decision, Measurement]
            .into_iter()
            .filter(|_| rng.random_bool(0.5))
            .collect();
        if c.is_empty() {
            c.push(Decision);
        }
        // the most significant capability decides the class
        resources.push(c[0]);
    }
    for _ in 0..rng.random_range(0..=2) {
        resources.push(Transportation);
    }
    let mut processes: Vec<(ResourceClass, Option<(usize, usize)>)> = (0..rng.random_range(1..=6))
        .map(|_| {
            let class = ResourceClass::ALL[rng.random_range(0..4)];
            let route =
                (class == Transportation).then(|| (rng.random_range(0..n_buffers), rng.random_range(0..n_buffers)));
            (class, route)
        })
        .collect();
    processes.sort_by_key(|p| p.0);
    let mut knowledge = BTreeSet::new();
    let mut constrained = BTreeSet::new();
    for (w, p) in processes.iter().enumerate() {
        for (v, &r) in resources.iter().enumerate() {
            if r <= p.0 && rng.random_bool(0.6) {
                knowledge.insert((w, v));
                if rng.random_bool(0.2) {
                    constrained.insert((w, v));
                }
            }
        }
    }
    RandomModel {
        resources,
        processes,
        knowledge,
        constrained,
    }
}

fn incidence_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let started = Instant::now();
    let mut dofs_seen = 0;
    for case in 0..RANDOM_MODELS {
        let m = random_model(&mut rng);
        let mut b = ModelBuilder::new();
        for (v, &class) in m.resources.iter().enumerate() {
            b.resource(&format!("r{v}"), &[class]).map_err(|e| e.to_string())?;
        }
        for (w, &(class, route)) in m.processes.iter().enumerate() {
            match route {
                Some((o, d)) => b.transport(&format!("p{w}"), o, d),
                None => b.process(&format!("p{w}"), class),
            };
        }
        for &(w, v) in &m.knowledge {
            b.allocate(w, v);
        }
        for &(w, v) in &m.constrained {
            b.constrain(w, v);
        }
        let model = b.build().map_err(|e| format!("case {case}: {e}"))?;

        // Per-DOF oracle: resource-major enumeration of J and not K; a
        // transport leaves its route origin, anything else stays put.
        let mut expected = Vec::new();
        for v in 0..m.resources.len() {
            for w in 0..m.processes.len() {
                if m.knowledge.contains(&(w, v)) && !m.constrained.contains(&(w, v)) {
                    let (origin, destination) = m.processes[w].1.unwrap_or((v, v));
                    expected.push((w, v, origin, destination));
                }
            }
        }
        let dofs: Vec<(usize, usize)> = model.dofs().iter().map(|d| (d.process, d.resource)).collect();
        let oracle: Vec<(usize, usize)> = expected.iter().map(|&(w, v, ..)| (w, v)).collect();
        ensure(dofs == oracle, || {
            format!("case {case}: DOF order {dofs:?} vs {oracle:?}")
        })?;

        let n_buffers = m.resources.iter().filter(|c| c.is_buffer()).count();
        let out = build_incidence_out(&model);
        let inc = build_incidence_in(&model);
        for (psi, &(_, _, origin, destination)) in expected.iter().enumerate() {
            for y in 0..n_buffers {
                let want_out = u64::from(y == origin);
                let want_in = u64::from(y == destination);
                ensure(out[(y, psi)] == want_out && inc[(y, psi)] == want_in, || {
                    format!(
                        "case {case}: transition {psi} place {y} got ({}, {})",
                        out[(y, psi)],
                        inc[(y, psi)]
                    )
                })?;
            }
        }
        dofs_seen += expected.len();
    }
    let elapsed = started.elapsed();
    ensure(elapsed < ORACLE_TIME_LIMIT, || format!("took {elapsed:?}"))?;
    Ok(format!(
        "{RANDOM_MODELS} models, {dofs_seen} transitions match in {elapsed:?}"
    ))
}

fn check_tokens(trace: &SyncTrace, name: &str) -> Result<usize, String> {
    let total = trace.initial_marking.total();
    for s in &trace.steps {
        ensure(s.delivery_marking.total() == total, || {
            format!(
                "{name}: step {} holds {} tokens, expected {total}",
                s.index,
                s.delivery_marking.total()
            )
        })?;
    }
    Ok(trace.steps.len())
}

/// Random walks of one to three tokens over the acute net with random
/// durations, merged into one schedule.
fn random_schedule_run(s: &Scenario, rng: &mut ChaCha8Rng) -> Result<usize, String> {
    let n = s.net.transition_count();
    let tokens = rng.random_range(1..=3u64);
    let params = TransitionParameters {
        durations: (0..n).map(|_| t(rng.random_range(0..=4))).collect(),
        costs: vec![Money::ZERO; n],
        capacities: vec![tokens; n],
    };
    let net = DeliveryNet::from_model(&s.model, params).map_err(|e| e.to_string())?;
    let mut places = vec![0u64; net.place_count()];
    let mut starts: Vec<(Time, usize)> = Vec::new();
    for _ in 0..tokens {
        let mut p = rng.random_range(0..net.place_count());
        places[p] += 1;
        let mut now = t(rng.random_range(0..=3));
        for _ in 0..rng.random_range(1..=8) {
            let options: Vec<usize> = (0..n).filter(|&psi| net.origin(psi) == p).collect();
            if options.is_empty() {
                break;
            }
            let psi = options[rng.random_range(0..options.len())];
            starts.push((now, psi));
            now += net.duration(psi) + t(rng.random_range(0..=2));
            p = net.destination(psi);
        }
    }
    starts.sort_by_key(|&(time, _)| time);
    let list = ScheduledEventList::from_starts(&starts, &net.params().durations).map_err(|e| e.to_string())?;
    let q0 = Marking::at_rest(places, n);
    let trajectory = simulate(&net, &list, &q0).map_err(|e| e.to_string())?;
    for point in &trajectory.points {
        ensure(point.marking.total() == tokens, || {
            format!(
                "{} tokens at t={}, expected {tokens}",
                point.marking.total(),
                point.time
            )
        })?;
    }
    Ok(trajectory.points.len())
}

fn token_conservation() -> Check {
    let mut steps = 0;
    for name in [ACUTE, CHRONIC] {
        let s = load(name)?;
        steps += check_tokens(&replay(&s)?, name)?;
    }
    let acute = load(ACUTE)?;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut points = 0;
    for case in 0..RANDOM_SCHEDULES {
        points += random_schedule_run(&acute, &mut rng).map_err(|e| format!("schedule {case}: {e}"))?;
    }
    Ok(format!(
        "{steps} replay steps and {points} points over {RANDOM_SCHEDULES} random schedules"
    ))
}

fn normalized(rng: &mut ChaCha8Rng, n: usize, max_support: usize) -> Vec<f64> {
    let k = rng.random_range(1..=max_support.min(n));
    let mut idx: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = rng.random_range(i..n);
        idx.swap(i, j);
    }
    let mut w = vec![0.0; n];
    for &i in &idx[..k] {
        w[i] = rng.random_range(0.05..1.0);
    }
    let sum: f64 = w.iter().sum();
    w.iter().map(|x| x / sum).collect()
}

fn random_health_net(rng: &mut ChaCha8Rng, max_support: usize) -> HealthNet {
    let n_states = rng.random_range(2..=6);
    let n_events = rng.random_range(1..=6);
    let mut m_minus = DenseMatrix::filled(n_states, n_events, 0.0);
    let mut m_plus = DenseMatrix::filled(n_states, n_events, 0.0);
    for x in 0..n_events {
        let input = normalized(rng, n_states, max_support);
        let output = normalized(rng, n_states, max_support);
        for s in 0..n_states {
            m_minus[(s, x)] = input[s];
            m_plus[(s, x)] = output[s];
        }
    }
    HealthNet::new(
        (0..n_states).map(|s| format!("s{s}")).collect(),
        (0..n_events)
            .map(|x| HealthEvent {
                name: format!("e{x}"),
                kind: HealthEventKind::Stochastic,
            })
            .collect(),
        m_minus,
        m_plus,
        vec![Time::ZERO; n_events],
        (0..n_states).map(|_| rng.random_range(0.0..=1.0)).collect(),
    )
    .expect("random net is column stochastic")
}

fn health_mass_conservation() -> Check {
    let chronic = load(CHRONIC)?;
    let mut worst: f64 = 0.0;
    let mut steps = 0;
    let mut traces = vec![replay(&chronic)?];
    for seed in 0..10 {
        traces.push(run(&chronic, Mode::Sample { seed }).map_err(|e| e.to_string())?);
    }
    for trace in &traces {
        for s in &trace.steps {
            for q in &s.health_markings {
                worst = worst.max((q.total() - 1.0).abs());
            }
            steps += 1;
        }
    }
    ensure(worst < MASS_TOLERANCE, || {
        format!("chronic fixture deviates by {worst:e}")
    })?;

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for case in 0..RANDOM_HEALTH_NETS {
        let net = random_health_net(&mut rng, 3);
        let n_states = net.states().len();
        let n_events = net.events().len();
        let mut q = HealthMarking {
            states: normalized(&mut rng, n_states, n_states),
            events: vec![0.0; n_events],
        };
        let mut in_flight: Vec<usize> = Vec::new();
        for _ in 0..40 {
            let startable: Vec<usize> = (0..n_events)
                .filter(|&x| !in_flight.contains(&x) && net.is_enabled(&q, x))
                .collect();
            let complete = !in_flight.is_empty() && (startable.is_empty() || rng.random_bool(0.5));
            if complete {
                let x = in_flight.swap_remove(rng.random_range(0..in_flight.len()));
                let branch = rng.random_bool(0.5).then(|| net.sample_branch(x, &mut rng));
                q = net.complete(&q, x, branch).map_err(|e| format!("net {case}: {e}"))?;
            } else if let Some(&x) = startable.get(rng.random_range(0..startable.len().max(1))) {
                q = net.start(&q, x).map_err(|e| format!("net {case}: {e}"))?.0;
                in_flight.push(x);
            } else {
                break;
            }
            worst = worst.max((q.total() - 1.0).abs());
            ensure(worst < MASS_TOLERANCE, || format!("net {case} deviates by {worst:e}"))?;
            steps += 1;
        }
    }
    Ok(format!("{steps} steps, worst deviation {worst:e}"))
}

fn degenerate_equivalence() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut compared = 0;
    for case in 0..100 {
        let health = random_health_net(&mut rng, 1);
        let n_states = health.states().len();
        let n_events = health.events().len();
        let to_int = |m: &DenseMatrix<f64>| m.map(|w| w as u64);
        let net = DeliveryNet::new(
            health.states().to_vec(),
            health
                .events()
                .iter()
                .map(|e| TransitionInfo {
                    dof: None,
                    label: e.name.clone(),
                    class: ResourceClass::Transformation,
                })
                .collect(),
            to_int(health.m_minus()),
            to_int(health.m_plus()),
            TransitionParameters::uniform(n_events, Time::ZERO, Money::ZERO),
        )
        .map_err(|e| format!("net {case}: {e}"))?;

        let start = rng.random_range(0..n_states);
        let mut fuzzy = HealthMarking::concentrated(n_states, start, n_events);
        let mut integer = Marking::at_rest((0..n_states).map(|s| u64::from(s == start)).collect(), n_events);
        for _ in 0..20 {
            let in_flight = (0..n_events).find(|&x| integer.transitions[x] > 0);
            let (u_minus, u_plus) = match in_flight {
                Some(x) => (vec![0u64; n_events], unit(n_events, x)),
                None => (unit(n_events, rng.random_range(0..n_events)), vec![0u64; n_events]),
            };
            let as_f64 = |u: &[u64]| u.iter().map(|&b| b as f64).collect::<Vec<f64>>();
            let next_int = net.step(&integer, &u_minus, &u_plus);
            let next_fuzzy = health.fuzzy_step(&fuzzy, &as_f64(&u_minus), &as_f64(&u_plus));
            match (next_int, next_fuzzy) {
                (Ok(a), Ok(b)) => {
                    let same = a.places.iter().zip(&b.states).all(|(&i, &f)| i as f64 == f)
                        && a.transitions.iter().zip(&b.events).all(|(&i, &f)| i as f64 == f);
                    ensure(same, || format!("net {case}: {a:?} vs {b:?}"))?;
                    integer = a;
                    fuzzy = b;
                    compared += 1;
                }
                (Err(_), Err(_)) => {}
                (a, b) => return Err(format!("net {case}: integer {a:?} vs fuzzy {b:?}")),
            }
        }
    }
    Ok(format!("{compared} binary firings agree exactly"))
}

fn unit(n: usize, at: usize) -> Vec<u64> {
    (0..n).map(|i| u64::from(i == at)).collect()
}

fn process_of(s: &Scenario, psi: usize) -> &str {
    let dof = s.net.transitions()[psi]
        .dof
        .expect("fixture transitions come from DOFs");
    &s.model.processes()[dof.process].name
}

fn replay_fidelity() -> Check {
    let acute = load(ACUTE)?;
    let trace = replay(&acute)?;
    let q = trace.final_marking();
    let outside = acute.net.place_index(OUTSIDE_CLINIC).ok_or("no outside clinic place")?;
    ensure(q.places[outside] == 1 && q.places.iter().sum::<u64>() == 1, || {
        format!("acute final places {:?}", q.places)
    })?;
    ensure(q.transitions.iter().all(|&x| x == 0), || {
        "acute Q_E is not empty".into()
    })?;
    let outcome = acute.individuals[0]
        .net
        .outcome(&trace.final_health()[0])
        .map_err(|e| e.to_string())?;
    ensure(outcome == 1.0, || format!("acute outcome {outcome}"))?;

    let chronic = load(CHRONIC)?;
    let trace = replay(&chronic)?;
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for r in trace.delivery_history() {
        if r.kind == FiringKind::Complete {
            *counts.entry(process_of(&chronic, r.psi)).or_default() += 1;
        }
    }
    let enter = counts.get("Enter clinic").copied().unwrap_or(0);
    let exit = counts.get("Exit clinic").copied().unwrap_or(0);
    ensure(enter == 6 && exit == 6, || {
        format!("chronic enter {enter}, exit {exit}")
    })?;
    Ok(format!(
        "acute ends at outside clinic with outcome {outcome}; chronic enters {enter} and exits {exit} times"
    ))
}

fn cost_staircase() -> Check {
    let mut detail = Vec::new();
    for name in [ACUTE, CHRONIC] {
        let s = load(name)?;
        let trace = replay(&s)?;
        let series = trace.cost_series(s.net.costs());
        ensure(series.is_non_decreasing(), || format!("{name}: cost decreases"))?;
        let mut completions = vec![0i64; s.net.transition_count()];
        for r in trace.delivery_history() {
            if r.kind == FiringKind::Complete {
                completions[r.psi] += 1;
            }
        }
        let expected = s
            .net
            .costs()
            .iter()
            .zip(&completions)
            .fold(Money::ZERO, |acc, (&c, &n)| acc + c * Rational::integer(n));
        ensure(series.final_cost() == expected, || {
            format!("{name}: final cost {} vs {expected}", series.final_cost())
        })?;
        let last = trace.steps.last().map_or(Money::ZERO, |st| st.cost);
        ensure(last == expected, || format!("{name}: trace ends at cost {last}"))?;

        let mut free = s.document.clone();
        free.assumed_values.default_cost = Money::ZERO;
        free.assumed_values.costs.clear();
        let free = compile(free).map_err(|r| r.to_string())?;
        let trace = replay(&free)?;
        let zero = trace
            .cost_series(free.net.costs())
            .points
            .iter()
            .all(|p| p.cost.is_zero())
            && trace.steps.iter().all(|st| st.cost.is_zero());
        ensure(zero, || format!("{name}: zero costs give a nonzero series"))?;
        detail.push(format!("{name} final {expected}"));
    }
    Ok(detail.join("; "))
}

/// Recomputes `Lambda^T u - A U e_l` for every delivery step from the
/// trace and the feasibility links.
fn coupling_residual() -> Check {
    let mut checked = 0;
    for name in [ACUTE, CHRONIC] {
        let s = load(name)?;
        let trace = replay(&s)?;
        for st in &trace.steps {
            let Some(d) = st.delivery else { continue };
            let ind = &s.individuals[st.individual];
            let lambda = ind.feasibility.matrix();
            let n_f = s.selector.processes().len();
            let mut residual = vec![0i64; n_f];
            let dof = s.net.transitions()[d.psi].dof.ok_or("transition without DOF")?;
            if let Some(j) = s.selector.position(dof.process) {
                residual[j] -= 1;
            }
            if let Some(h) = st.health.as_ref().filter(|h| h.induced_by.is_some()) {
                for (j, r) in residual.iter_mut().enumerate() {
                    *r += i64::from(lambda.get(h.event, j));
                }
            }
            ensure(residual.iter().all(|&r| r == 0), || {
                format!("{name}: step {} residual {residual:?}", st.index)
            })?;
            let reported = st
                .residual
                .as_ref()
                .ok_or_else(|| format!("{name}: step {} unchecked", st.index))?;
            ensure(reported.iter().all(|&r| r == 0), || {
                format!("{name}: step {} reports {reported:?}", st.index)
            })?;
            checked += 1;
        }
    }
    Ok(format!("zero on {checked} delivery steps"))
}

fn resection_calibration() -> Check {
    let chronic = load(CHRONIC)?;
    let net = &chronic.individuals[0].net;
    let event = net.event_index("Surgical resection").ok_or("no resection event")?;
    let outputs = net.outputs(event);
    ensure(outputs.len() == 3, || {
        format!("resection has {} outcomes", outputs.len())
    })?;
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for _ in 0..RESECTION_SAMPLES {
        *counts.entry(net.sample_branch(event, &mut rng)).or_default() += 1;
    }
    let elapsed = started.elapsed();
    let mut detail = Vec::new();
    for &s in &outputs {
        let f = counts.get(&s).copied().unwrap_or(0) as f64 / RESECTION_SAMPLES as f64;
        ensure((f - 1.0 / 3.0).abs() < FREQUENCY_TOLERANCE, || {
            format!("{} drawn with frequency {f}", net.states()[s])
        })?;
        detail.push(format!("{}={f:.4}", net.states()[s]));
    }
    ensure(elapsed < SAMPLING_TIME_LIMIT, || format!("took {elapsed:?}"))?;
    Ok(format!("{} in {elapsed:?}", detail.join(" ")))
}

fn determinism() -> Check {
    let files = [TRAJECTORY_FILE, TRACE_FILE, OUTCOMES_FILE, SUMMARY_FILE];
    let mut compared = 0;
    for name in [ACUTE, CHRONIC] {
        let s = load(name)?;
        for (mode, seed, runs) in [(RunMode::Replay, 0, 1), (RunMode::Sample, 42, 4)] {
            let a = tempfile::tempdir().map_err(|e| e.to_string())?;
            let b = tempfile::tempdir().map_err(|e| e.to_string())?;
            cmd_simulate(&s, mode, seed, a.path(), runs).map_err(|e| e.to_string())?;
            cmd_simulate(&s, mode, seed, b.path(), runs).map_err(|e| e.to_string())?;
            for f in files {
                let x = std::fs::read(a.path().join(f)).map_err(|e| e.to_string())?;
                let y = std::fs::read(b.path().join(f)).map_err(|e| e.to_string())?;
                ensure(x == y, || format!("{name} {} {f} differs", mode.as_str()))?;
                compared += 1;
            }
        }
    }
    Ok(format!("{compared} output files byte-identical"))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("DOF reproduction", dof_reproduction),
        ("chronic aggregation", chronic_aggregation),
        ("incidence oracle equivalence", incidence_oracle),
        ("token conservation", token_conservation),
        ("health mass conservation", health_mass_conservation),
        ("degenerate equivalence", degenerate_equivalence),
        ("replay fidelity", replay_fidelity),
        ("cost staircase", cost_staircase),
        ("coupling residual", coupling_residual),
        ("Monte-Carlo calibration", resection_calibration),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
