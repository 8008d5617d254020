use thiserror::Error;

use super::validate::{structural_violations, Violation};
use super::{
    arrival_during_other_service, capacity_changes, count_changes, network_gap, server_gap,
    TraceIndex,
};
use crate::environments::{Capabilities, EnvironmentId};
use crate::model::Trace;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("trace is structurally invalid ({} violation(s), first: {})", .violations.len(), first(.violations))]
    StructurallyInvalid { violations: Vec<Violation> },
}

fn first(violations: &[Violation]) -> String {
    violations
        .first()
        .map(|v| format!("{} at {}: {}", v.rule, v.location, v.message))
        .unwrap_or_default()
}

/// Dynamics present in a trace, without structural checks.
pub fn observed_capabilities(trace: &Trace, arrival_as_horizontal: bool) -> Capabilities {
    let index = TraceIndex::new(trace);
    Capabilities {
        horizontal: !count_changes(&index).is_empty()
            || (arrival_as_horizontal && arrival_during_other_service(&index)),
        vertical: !capacity_changes(&index).is_empty(),
        server_overbooking: trace.samples.iter().any(server_gap),
        network_overbooking: trace.samples.iter().any(network_gap),
    }
}

/// The smallest environment whose capabilities cover the observed dynamics.
pub fn classify(trace: &Trace, arrival_as_horizontal: bool) -> Result<EnvironmentId, AnalysisError> {
    let violations = structural_violations(trace);
    if !violations.is_empty() {
        return Err(AnalysisError::StructurallyInvalid { violations });
    }
    Ok(EnvironmentId::from_capabilities(observed_capabilities(
        trace,
        arrival_as_horizontal,
    )))
}
