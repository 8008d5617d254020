//! Per-tick evolution of capacities, VM counts, and utilization.

use rand::Rng;

use super::config::{HorizontalPolicy, StepRange, UtilizationPolicy, VerticalPolicy};
use crate::model::{ResourceSpec, UtilizationSample};
use crate::quantity::Quantity;

/// Which utilization classes are decoupled from the request.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OverbookingClasses {
    /// cpu and ram.
    pub server: bool,
    pub network: bool,
}

fn step_capacity<R: Rng + ?Sized>(rng: &mut R, value: Quantity, policy: &VerticalPolicy) -> Quantity {
    if !rng.random_bool(policy.step_probability) {
        return value;
    }
    let pct = rng.random_range(policy.step_percent.min..=policy.step_percent.max) as i64;
    let factor = if rng.random_bool(0.5) { 100 + pct } else { 100 - pct };
    value
        .scale(factor, 100, policy.precision)
        .max(Quantity::from(policy.floor))
}

/// One tick of vertical elasticity: each varied component independently
/// stays put or is multiplied by `1 ± pct/100`, then rounded and floored.
/// Network capacity varies only with `vary_net`.
pub fn evolve_vertical<R: Rng + ?Sized>(
    rng: &mut R,
    spec: &ResourceSpec,
    policy: &VerticalPolicy,
) -> ResourceSpec {
    let cpu = step_capacity(rng, spec.cpu, policy);
    let ram = step_capacity(rng, spec.ram, policy);
    let net = if policy.vary_net {
        step_capacity(rng, spec.net, policy)
    } else {
        spec.net
    };
    ResourceSpec { cpu, ram, net }
}

/// VMs alive in one datacenter for one service, by vm index (ascending).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DcMembers {
    pub dc: u32,
    pub alive: Vec<u32>,
}

/// Alive VMs of one service, per datacenter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServiceState {
    pub service: u32,
    pub members: Vec<DcMembers>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScaleAction {
    /// Add one VM to `dc`; the caller allocates its index and sizing.
    Out { dc: u32 },
    /// Remove VM `vm` from `dc`.
    In { dc: u32, vm: u32 },
}

/// One tick of horizontal elasticity for one service.
///
/// With probability `scale_probability` the service performs exactly one
/// action: a direction is drawn uniformly among those admissible in at least
/// one datacenter, then a datacenter uniformly among those admitting it.
/// Scale-in removes the highest alive index. Counts stay within
/// `[min_vms, max_vms]`.
pub fn evolve_horizontal<R: Rng + ?Sized>(
    rng: &mut R,
    state: &ServiceState,
    policy: &HorizontalPolicy,
) -> Vec<ScaleAction> {
    if !rng.random_bool(policy.scale_probability) {
        return Vec::new();
    }
    let can_out: Vec<&DcMembers> = state
        .members
        .iter()
        .filter(|m| (m.alive.len() as u64) < policy.max_vms)
        .collect();
    let can_in: Vec<&DcMembers> = state
        .members
        .iter()
        .filter(|m| (m.alive.len() as u64) > policy.min_vms)
        .collect();
    let scale_out = match (can_out.is_empty(), can_in.is_empty()) {
        (true, true) => return Vec::new(),
        (false, true) => true,
        (true, false) => false,
        (false, false) => rng.random_bool(0.5),
    };
    if scale_out {
        let m = can_out[rng.random_range(0..can_out.len())];
        vec![ScaleAction::Out { dc: m.dc }]
    } else {
        let m = can_in[rng.random_range(0..can_in.len())];
        let vm = *m.alive.iter().max().expect("count above min_vms >= 1");
        vec![ScaleAction::In { dc: m.dc, vm }]
    }
}

fn cap(request: Quantity, policy: &UtilizationPolicy) -> Quantity {
    if policy.allow_exceed_request {
        request + request
    } else {
        request
    }
}

fn walk<R: Rng + ?Sized>(rng: &mut R, prev: Quantity, step: StepRange, hi: Quantity) -> Quantity {
    let delta = rng.random_range(step.min..=step.max);
    let moved = if delta >= 0 {
        prev + Quantity::from(delta)
    } else {
        prev.saturating_sub(Quantity::from(delta.unsigned_abs()))
    };
    moved.clamp_to(Quantity::ZERO, hi)
}

/// One tick of utilization. Enabled classes take a bounded random-walk step
/// from `prev`, clamped to `[0, request]` (or `[0, 2 × request]` with
/// `allow_exceed_request`); disabled classes equal the request.
pub fn evolve_utilization<R: Rng + ?Sized>(
    rng: &mut R,
    prev: &UtilizationSample,
    spec: &ResourceSpec,
    policy: &UtilizationPolicy,
    classes: OverbookingClasses,
) -> UtilizationSample {
    let (cpu, ram) = if classes.server {
        (
            walk(rng, prev.cpu, policy.cpu_step, cap(spec.cpu, policy)),
            walk(rng, prev.ram, policy.ram_step, cap(spec.ram, policy)),
        )
    } else {
        (spec.cpu, spec.ram)
    };
    let net = if classes.network {
        walk(rng, prev.net, policy.net_step, cap(spec.net, policy))
    } else {
        spec.net
    };
    UtilizationSample { cpu, ram, net }
}

/// Utilization at a VM's first tick: a drawn percentage of the request for
/// enabled classes, the request itself otherwise.
pub fn initial_utilization<R: Rng + ?Sized>(
    rng: &mut R,
    spec: &ResourceSpec,
    policy: &UtilizationPolicy,
    classes: OverbookingClasses,
    precision: u32,
) -> UtilizationSample {
    let mut start = |request: Quantity| {
        let pct = rng.random_range(policy.initial_percent.min..=policy.initial_percent.max);
        request
            .scale(pct as i64, 100, precision)
            .clamp_to(Quantity::ZERO, cap(request, policy))
    };
    let (cpu, ram) = if classes.server {
        (start(spec.cpu), start(spec.ram))
    } else {
        (spec.cpu, spec.ram)
    };
    let net = if classes.network { start(spec.net) } else { spec.net };
    UtilizationSample { cpu, ram, net }
}
