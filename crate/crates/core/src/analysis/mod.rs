//! Validation, environment inference, and aggregate statistics.

mod classify;
mod stats;
mod validate;

use std::collections::BTreeMap;

use crate::model::{Tick, Trace, VmDescriptor, VmId, VmSample};

pub use classify::{classify, observed_capabilities, AnalysisError};
pub use stats::{stats, stats_with_precision, DcTickStats, Ratios, StatsSeries, Totals, DEFAULT_PRECISION};
pub use validate::{
    validate, validate_as, Location, Mode, Rule, ValidationReport, Violation,
};

/// Order-independent lookup tables over a trace's records.
pub(crate) struct TraceIndex<'a> {
    pub descriptors: BTreeMap<VmId, &'a VmDescriptor>,
    /// Keyed by VM, then tick, so a range scan walks one VM in time order.
    pub samples: BTreeMap<(VmId, Tick), &'a VmSample>,
    /// Service id to `[first t_init, last t_end)` over its VMs.
    pub spans: BTreeMap<u32, (Tick, Tick)>,
}

impl<'a> TraceIndex<'a> {
    pub fn new(trace: &'a Trace) -> Self {
        let mut descriptors = BTreeMap::new();
        let mut spans: BTreeMap<u32, (Tick, Tick)> = BTreeMap::new();
        for d in &trace.descriptors {
            descriptors.entry(d.id).or_insert(d);
            spans
                .entry(d.id.service)
                .and_modify(|(s, e)| {
                    *s = (*s).min(d.t_init);
                    *e = (*e).max(d.t_end);
                })
                .or_insert((d.t_init, d.t_end));
        }
        let mut samples = BTreeMap::new();
        for s in &trace.samples {
            samples.entry((s.vm, s.t)).or_insert(s);
        }
        Self {
            descriptors,
            samples,
            spans,
        }
    }

    fn samples_of(&self, id: VmId) -> impl Iterator<Item = &'a VmSample> + '_ {
        self.samples
            .range((id, 0)..=(id, Tick::MAX))
            .map(|(_, s)| *s)
    }
}

/// Ticks `t` where a VM's request differs from its request at `t - 1`.
pub(crate) fn capacity_changes(index: &TraceIndex<'_>) -> Vec<(Tick, VmId)> {
    let mut out = Vec::new();
    for &id in index.descriptors.keys() {
        let mut prev: Option<&VmSample> = None;
        for s in index.samples_of(id) {
            if let Some(p) = prev {
                if p.t + 1 == s.t && p.spec != s.spec {
                    out.push((s.t, id));
                }
            }
            prev = Some(s);
        }
    }
    out
}

/// VMs appearing or disappearing at a tick where their service's VM count
/// differs from the previous tick, strictly inside the service's lifetime.
pub(crate) fn count_changes(index: &TraceIndex<'_>) -> Vec<(Tick, VmId)> {
    let mut by_service: BTreeMap<u32, Vec<&VmDescriptor>> = BTreeMap::new();
    for d in index.descriptors.values() {
        by_service.entry(d.id.service).or_default().push(d);
    }
    let mut out = Vec::new();
    for (service, vms) in by_service {
        let (start, end) = index.spans[&service];
        let count = |t: Tick| vms.iter().filter(|d| d.is_alive(t)).count();
        let mut prev = count(start);
        for t in start + 1..end {
            let now = count(t);
            if now != prev {
                out.extend(
                    vms.iter()
                        .filter(|d| d.t_init == t || d.t_end == t)
                        .map(|d| (t, d.id)),
                );
            }
            prev = now;
        }
    }
    out
}

pub(crate) fn server_gap(s: &VmSample) -> bool {
    s.util.cpu != s.spec.cpu || s.util.ram != s.spec.ram
}

pub(crate) fn network_gap(s: &VmSample) -> bool {
    s.util.net != s.spec.net
}

/// A service arriving after t=0 while another service is alive.
pub(crate) fn arrival_during_other_service(index: &TraceIndex<'_>) -> bool {
    index.spans.iter().any(|(&b, &(start, _))| {
        start > 0
            && index
                .spans
                .iter()
                .any(|(&other, &(s, e))| other != b && s <= start && start < e)
    })
}
