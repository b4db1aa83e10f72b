//! Functional-safety triage of a subsystem's diagnostic specification.
//!
//! The pipeline parses a diagnostic spec and a platform model, classifies the
//! monitors, collects expert answers, filters the monitors through a staged
//! funnel, traces failure propagation over the platform, derives requirements
//! on the automated driving intelligence (ADI) and assembles a report.

pub mod fixtures;
pub mod funnel;
pub mod heuristics;
pub mod project;
pub mod propagation;
pub mod report;
pub mod requirements;
pub mod spec_model;
