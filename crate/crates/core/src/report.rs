//! CSV and text outputs of a co-simulation run.

use std::io::Write;

use crate::coordination::{Individual, SyncTrace};
use crate::delivery::DeliveryNet;
use crate::rational::Money;

pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const TRACE_FILE: &str = "trace.csv";
pub const OUTCOMES_FILE: &str = "outcomes.csv";
pub const SUMMARY_FILE: &str = "summary.txt";

/// `time,event_index,psi,kind,<places...>,cumulative_cost`; the first row
/// is the initial marking.
pub fn write_trajectory<W: Write>(out: W, net: &DeliveryNet, trace: &SyncTrace) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["time".to_string(), "event_index".into(), "psi".into(), "kind".into()];
    header.extend(net.places().iter().cloned());
    header.push("cumulative_cost".into());
    w.write_record(&header)?;

    let row = |time: String, index: String, psi: String, kind: &str, places: &[u64], cost: Money| {
        let mut r = vec![time, index, psi, kind.to_string()];
        r.extend(places.iter().map(u64::to_string));
        r.push(cost.to_string());
        r
    };
    w.write_record(row(
        "0".into(),
        "0".into(),
        String::new(),
        "initial",
        &trace.initial_marking.places,
        Money::ZERO,
    ))?;
    for s in &trace.steps {
        if let Some(d) = s.delivery {
            w.write_record(row(
                s.time.to_string(),
                s.index.to_string(),
                d.psi.to_string(),
                d.kind.as_str(),
                &s.delivery_marking.places,
                s.cost,
            ))?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `time,net,event_label,psi_or_event_index,kind`, delivery firings and the
/// health events they induce side by side.
pub fn write_trace<W: Write>(out: W, individuals: &[Individual], trace: &SyncTrace) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["time", "net", "event_label", "psi_or_event_index", "kind"])?;
    for s in &trace.steps {
        let time = s.time.to_string();
        if let Some(d) = s.delivery {
            w.write_record([time.as_str(), "delivery", &s.label, &d.psi.to_string(), d.kind.as_str()])?;
        }
        if let Some(h) = &s.health {
            let ind = &individuals[h.individual];
            let mut label = ind.net.events()[h.event].name.clone();
            if let Some(b) = h.branch {
                label = format!("{label} -> {}", ind.net.states()[b]);
            }
            w.write_record([
                time.as_str(),
                &format!("health:{}", ind.id),
                &label,
                &h.event.to_string(),
                h.kind.as_str(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `time,individual_id,outcome` for every individual at t=0 and after every
/// step.
pub fn write_outcomes<W: Write>(out: W, individuals: &[Individual], trace: &SyncTrace) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["time", "individual_id", "outcome"])?;
    for (time, l, h) in trace.outcome_series(individuals) {
        w.write_record([time.to_string(), individuals[l].id.clone(), h.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// State holding the most mass; ties go to the earlier state.
pub fn dominant_state(individual: &Individual, states: &[f64]) -> String {
    let mut best = 0;
    for (s, &m) in states.iter().enumerate() {
        if m > states[best] {
            best = s;
        }
    }
    individual.net.states()[best].clone()
}
