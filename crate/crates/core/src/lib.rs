//! Simulation of personalized care pathways as two coupled Petri nets: a
//! timed net of the healthcare delivery system derived from a
//! hetero-functional structural model, and a fuzzy timed net of each
//! individual's health states.

pub mod cli;
pub mod coordination;
pub mod delivery;
pub mod health;
pub mod matrix;
pub mod rational;
pub mod report;
pub mod scenario;
pub mod structural;
