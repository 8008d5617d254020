use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::{capacity_changes, count_changes, network_gap, server_gap, TraceIndex};
use crate::environments::EnvironmentId;
use crate::model::{EventKind, Tick, Trace, TraceEvent, VmId, VmSample};

/// `Strict` enforces utilization ≤ request for overbooked classes. `Paper`
/// accepts the worked-example fixtures verbatim: it drops that bound and
/// tolerates server utilization gaps in vertically elastic environments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Strict,
    Paper,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "strict" => Ok(Mode::Strict),
            "paper" => Ok(Mode::Paper),
            other => Err(format!("unknown mode {other:?}; expected strict or paper")),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Strict => "strict",
            Mode::Paper => "paper",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rule {
    // structural
    Descriptor,
    UniqueVm,
    UniqueSample,
    UnknownVm,
    NonNegative,
    LifetimeContainment,
    DenseSampling,
    EventConsistency,
    CanonicalOrder,
    // environment conformance
    NoVertical,
    NoHorizontal,
    NoServerOb,
    NoNetOb,
    ObBound,
}

impl Rule {
    pub fn as_str(self) -> &'static str {
        match self {
            Rule::Descriptor => "descriptor",
            Rule::UniqueVm => "unique-vm",
            Rule::UniqueSample => "unique-sample",
            Rule::UnknownVm => "unknown-vm",
            Rule::NonNegative => "non-negative",
            Rule::LifetimeContainment => "lifetime-containment",
            Rule::DenseSampling => "dense-sampling",
            Rule::EventConsistency => "event-consistency",
            Rule::CanonicalOrder => "canonical-order",
            Rule::NoVertical => "no-vertical",
            Rule::NoHorizontal => "no-horizontal",
            Rule::NoServerOb => "no-server-ob",
            Rule::NoNetOb => "no-net-ob",
            Rule::ObBound => "ob-bound",
        }
    }

    pub fn is_structural(self) -> bool {
        self < Rule::NoVertical
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for Rule {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "scope", rename_all = "snake_case")]
pub enum Location {
    Trace,
    Sample { t: Tick, service: u32, dc: u32, vm: u32 },
    Vm { service: u32, dc: u32, vm: u32 },
    Service { service: u32 },
    Event { index: usize },
}

impl Location {
    pub fn sample(t: Tick, id: VmId) -> Self {
        Location::Sample {
            t,
            service: id.service,
            dc: id.dc,
            vm: id.vm,
        }
    }

    pub fn vm(id: VmId) -> Self {
        Location::Vm {
            service: id.service,
            dc: id.dc,
            vm: id.vm,
        }
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Location::Trace => f.write_str("trace"),
            Location::Sample { t, service, dc, vm } => write!(f, "t={t} ({service},{dc},{vm})"),
            Location::Vm { service, dc, vm } => write!(f, "({service},{dc},{vm})"),
            Location::Service { service } => write!(f, "service {service}"),
            Location::Event { index } => write!(f, "event #{index}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub rule: Rule,
    #[serde(flatten)]
    pub location: Location,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub mode: Mode,
    pub declared: EnvironmentId,
    pub ok: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn cites(&self, rule: Rule, location: Location) -> bool {
        self.violations
            .iter()
            .any(|v| v.rule == rule && v.location == location)
    }

    pub fn count(&self, rule: Rule) -> usize {
        self.violations.iter().filter(|v| v.rule == rule).count()
    }

    pub fn structural_ok(&self) -> bool {
        self.violations.iter().all(|v| !v.rule.is_structural())
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn render_table(&self) -> String {
        let mut out = format!(
            "mode: {}  declared: {}  result: {}\n",
            self.mode,
            self.declared,
            if self.ok { "ok" } else { "FAILED" }
        );
        if self.violations.is_empty() {
            return out;
        }
        let rows: Vec<(String, String, &str)> = self
            .violations
            .iter()
            .map(|v| (v.rule.to_string(), v.location.to_string(), v.message.as_str()))
            .collect();
        let w_rule = rows.iter().map(|r| r.0.len()).max().unwrap_or(0).max(4);
        let w_loc = rows.iter().map(|r| r.1.len()).max().unwrap_or(0).max(8);
        out.push_str(&format!("{:<w_rule$}  {:<w_loc$}  message\n", "rule", "location"));
        for (rule, loc, msg) in rows {
            out.push_str(&format!("{rule:<w_rule$}  {loc:<w_loc$}  {msg}\n"));
        }
        out.push_str(&format!("{} violation(s)\n", self.violations.len()));
        out
    }
}

struct Findings(Vec<Violation>);

impl Findings {
    fn push(&mut self, rule: Rule, location: Location, message: impl Into<String>) {
        self.0.push(Violation {
            rule,
            location,
            message: message.into(),
        });
    }
}

fn structural(trace: &Trace, index: &TraceIndex<'_>, out: &mut Findings) {
    let h = &trace.header;

    let mut seen_vm = BTreeMap::new();
    for d in &trace.descriptors {
        let loc = Location::vm(d.id);
        if seen_vm.insert(d.id, ()).is_some() {
            out.push(Rule::UniqueVm, loc, "duplicate descriptor");
        }
        if d.id.service == 0 || d.id.dc == 0 || d.id.vm == 0 {
            out.push(Rule::Descriptor, loc, "identifiers start at 1");
        }
        if d.id.dc > h.num_datacenters {
            out.push(
                Rule::Descriptor,
                loc,
                format!("datacenter {} beyond num_datacenters {}", d.id.dc, h.num_datacenters),
            );
        }
        if d.t_init >= d.t_end {
            out.push(
                Rule::Descriptor,
                loc,
                format!("empty lifetime [{}, {})", d.t_init, d.t_end),
            );
        }
        if d.t_end > h.horizon {
            out.push(
                Rule::Descriptor,
                loc,
                format!("t_end {} beyond horizon {}", d.t_end, h.horizon),
            );
        }
        if d.sla < 1 || d.sla > h.max_sla {
            out.push(
                Rule::Descriptor,
                loc,
                format!("sla {} outside 1..={}", d.sla, h.max_sla),
            );
        }
        if d.revenue.is_negative() {
            out.push(Rule::NonNegative, loc, "negative revenue");
        }
    }

    let mut seen_sample = BTreeMap::new();
    for s in &trace.samples {
        let loc = Location::sample(s.t, s.vm);
        if seen_sample.insert((s.t, s.vm), ()).is_some() {
            out.push(Rule::UniqueSample, loc, "duplicate sample");
        }
        match index.descriptors.get(&s.vm) {
            None => out.push(Rule::UnknownVm, loc, "sample has no descriptor"),
            Some(d) if !d.is_alive(s.t) => out.push(
                Rule::LifetimeContainment,
                loc,
                format!("outside lifetime [{}, {})", d.t_init, d.t_end),
            ),
            Some(_) => {}
        }
        if s.t >= h.horizon {
            out.push(
                Rule::LifetimeContainment,
                loc,
                format!("beyond horizon {}", h.horizon),
            );
        }
        let quantities = [s.spec.cpu, s.spec.ram, s.spec.net, s.util.cpu, s.util.ram, s.util.net];
        if quantities.iter().any(|q| q.is_negative()) {
            out.push(Rule::NonNegative, loc, "negative quantity");
        }
    }

    for d in index.descriptors.values() {
        for t in d.t_init..d.t_end.min(h.horizon) {
            if !index.samples.contains_key(&(d.id, t)) {
                out.push(Rule::DenseSampling, Location::sample(t, d.id), "missing sample");
            }
        }
    }

    events(trace, index, out);

    if !is_sorted(trace.events.iter().map(TraceEvent::sort_key))
        || !is_sorted(trace.samples.iter().map(VmSample::sort_key))
        || !is_sorted(trace.descriptors.iter().map(|d| d.id))
    {
        out.push(Rule::CanonicalOrder, Location::Trace, "records are not in canonical order");
    }
}

fn is_sorted<K: PartialOrd>(mut keys: impl Iterator<Item = K>) -> bool {
    let Some(mut prev) = keys.next() else {
        return true;
    };
    for k in keys {
        if k < prev {
            return false;
        }
        prev = k;
    }
    true
}

fn events(trace: &Trace, index: &TraceIndex<'_>, out: &mut Findings) {
    let mut arrivals: BTreeMap<u32, usize> = BTreeMap::new();
    let mut departures: BTreeMap<u32, usize> = BTreeMap::new();
    let mut scale_outs: BTreeMap<VmId, usize> = BTreeMap::new();
    let mut scale_ins: BTreeMap<VmId, usize> = BTreeMap::new();

    for (i, e) in trace.events.iter().enumerate() {
        let loc = Location::Event { index: i };
        if e.t > trace.header.horizon {
            out.push(Rule::EventConsistency, loc, "event beyond horizon");
        }
        let Some(&(start, end)) = index.spans.get(&e.service) else {
            out.push(
                Rule::EventConsistency,
                loc,
                format!("service {} has no VMs", e.service),
            );
            continue;
        };
        match e.kind {
            EventKind::ServiceArrival | EventKind::ServiceDeparture => {
                let (seen, expected, what) = if e.kind == EventKind::ServiceArrival {
                    (&mut arrivals, start, "arrival")
                } else {
                    (&mut departures, end, "departure")
                };
                if seen.insert(e.service, i).is_some() {
                    out.push(Rule::EventConsistency, loc, format!("second {what} of service {}", e.service));
                }
                if e.t != expected {
                    out.push(
                        Rule::EventConsistency,
                        loc,
                        format!("{what} at t={} but the service's VMs span [{start}, {end})", e.t),
                    );
                }
                if e.target.is_some() {
                    out.push(Rule::EventConsistency, loc, "service event names a VM");
                }
            }
            EventKind::VmScaleOut | EventKind::VmScaleIn => {
                let Some(id) = e.vm() else {
                    out.push(Rule::EventConsistency, loc, "scale event without a VM");
                    continue;
                };
                let Some(d) = index.descriptors.get(&id) else {
                    out.push(Rule::EventConsistency, loc, format!("scale event for unknown {id}"));
                    continue;
                };
                let (seen, expected) = if e.kind == EventKind::VmScaleOut {
                    (&mut scale_outs, d.t_init)
                } else {
                    (&mut scale_ins, d.t_end)
                };
                seen.insert(id, i);
                if e.t != expected {
                    out.push(
                        Rule::EventConsistency,
                        loc,
                        format!("scale event at t={} does not match lifetime [{}, {})", e.t, d.t_init, d.t_end),
                    );
                }
                if !(start < e.t && e.t < end) {
                    out.push(
                        Rule::EventConsistency,
                        loc,
                        format!("scale event at t={} not strictly inside service lifetime [{start}, {end})", e.t),
                    );
                }
            }
        }
    }

    for &service in index.spans.keys() {
        let loc = Location::Service { service };
        if !arrivals.contains_key(&service) {
            out.push(Rule::EventConsistency, loc, "no arrival event");
        }
        if !departures.contains_key(&service) {
            out.push(Rule::EventConsistency, loc, "no departure event");
        }
    }
    for d in index.descriptors.values() {
        let (start, end) = index.spans[&d.id.service];
        if d.t_init > start && !scale_outs.contains_key(&d.id) {
            out.push(
                Rule::EventConsistency,
                Location::sample(d.t_init, d.id),
                "VM starts after its service without a scale-out event",
            );
        }
        if d.t_end < end && !scale_ins.contains_key(&d.id) {
            out.push(
                Rule::EventConsistency,
                Location::sample(d.t_end, d.id),
                "VM ends before its service without a scale-in event",
            );
        }
    }
}

fn conformance(trace: &Trace, index: &TraceIndex<'_>, mode: Mode, declared: EnvironmentId, out: &mut Findings) {
    let caps = declared.capabilities();

    if !caps.vertical {
        for (t, id) in capacity_changes(index) {
            out.push(
                Rule::NoVertical,
                Location::sample(t, id),
                "requested capacities change without vertical elasticity",
            );
        }
    }
    if !caps.horizontal {
        for (t, id) in count_changes(index) {
            out.push(
                Rule::NoHorizontal,
                Location::sample(t, id),
                "service VM count changes without horizontal elasticity",
            );
        }
    }
    let relax_server = mode == Mode::Paper && caps.vertical;
    for s in &trace.samples {
        let loc = Location::sample(s.t, s.vm);
        if !caps.server_overbooking && !relax_server && server_gap(s) {
            out.push(
                Rule::NoServerOb,
                loc,
                format!(
                    "cpu/ram utilization ({}, {}) differs from request ({}, {})",
                    s.util.cpu, s.util.ram, s.spec.cpu, s.spec.ram
                ),
            );
        }
        if !caps.network_overbooking && network_gap(s) {
            out.push(
                Rule::NoNetOb,
                loc,
                format!("net utilization {} differs from request {}", s.util.net, s.spec.net),
            );
        }
        if mode == Mode::Strict {
            let server_over = caps.server_overbooking && (s.util.cpu > s.spec.cpu || s.util.ram > s.spec.ram);
            let net_over = caps.network_overbooking && s.util.net > s.spec.net;
            if server_over || net_over {
                out.push(Rule::ObBound, loc, "utilization exceeds request");
            }
        }
    }
}

/// Validates against the environment declared in the trace header.
pub fn validate(trace: &Trace, mode: Mode) -> ValidationReport {
    validate_as(trace, mode, trace.header.environment)
}

/// Validates structure, then conformance to `declared`.
pub fn validate_as(trace: &Trace, mode: Mode, declared: EnvironmentId) -> ValidationReport {
    let index = TraceIndex::new(trace);
    let mut findings = Findings(Vec::new());
    structural(trace, &index, &mut findings);
    conformance(trace, &index, mode, declared, &mut findings);
    let violations = findings.0;
    ValidationReport {
        mode,
        declared,
        ok: violations.is_empty(),
        violations,
    }
}

/// Structural findings only; used to gate classification.
pub(crate) fn structural_violations(trace: &Trace) -> Vec<Violation> {
    let index = TraceIndex::new(trace);
    let mut findings = Findings(Vec::new());
    structural(trace, &index, &mut findings);
    findings.0
}
