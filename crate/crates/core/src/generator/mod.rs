//! Seeded synthetic traces for any environment, plus the worked-example
//! fixtures.
//!
//! Generation runs in four passes:
//!
//! 1. walk the horizon tick by tick, drawing service arrivals and (when the
//!    environment is horizontally elastic) scale actions, which yields every
//!    VM's identity, lifetime, and initial request;
//! 2. inject one scale action if dynamics are guaranteed and none occurred;
//! 3. sample every VM densely from its own random stream, evolving requests
//!    and utilization as the environment allows;
//! 4. inject one capacity change or utilization gap per enabled class that
//!    the draws did not exercise, again only when dynamics are guaranteed.

pub mod config;
pub mod dynamics;
pub mod fixtures;

use std::collections::HashMap;

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::environments::Capabilities;
use crate::model::{
    ResourceSpec, Tick, Trace, TraceEvent, TraceHeader, VmDescriptor, VmId,
    VmSample, FORMAT_VERSION,
};
use crate::quantity::Quantity;
use crate::rng::{self, StreamKind};

pub use config::{
    ArrivalModel, ConfigError, GeneratorConfig, HorizontalPolicy, IntRange, ServiceShape, Sizing,
    StepRange, UtilizationPolicy, VerticalPolicy,
};
pub use dynamics::{
    evolve_horizontal, evolve_utilization, evolve_vertical, initial_utilization, DcMembers,
    OverbookingClasses, ScaleAction, ServiceState,
};
pub use fixtures::{paper_fixture, FixtureId};

/// A VM's identity, lifetime, and request at `t_init`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VmPlan {
    pub descriptor: VmDescriptor,
    pub initial_spec: ResourceSpec,
}

/// A newly arrived service with its initial VMs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServiceTemplate {
    pub service: u32,
    pub t_arrival: Tick,
    pub t_departure: Tick,
    pub vms: Vec<VmPlan>,
}

/// Hands out VM indices per datacenter, consecutively from 1. Indices are
/// never reused within a trace.
#[derive(Debug, Clone)]
pub struct IndexAllocator {
    next: Vec<u32>,
}

impl IndexAllocator {
    pub fn new(num_datacenters: u32) -> Self {
        Self {
            next: vec![1; num_datacenters as usize],
        }
    }

    pub fn allocate(&mut self, dc: u32) -> u32 {
        let slot = &mut self.next[dc as usize - 1];
        let j = *slot;
        *slot += 1;
        j
    }
}

fn draw(rng: &mut impl Rng, r: IntRange) -> u64 {
    rng.random_range(r.min..=r.max)
}

/// Draws a VM's request and economic fields from its own sizing stream.
pub fn sample_vm(config: &GeneratorConfig, id: VmId, t_init: Tick, t_end: Tick) -> VmPlan {
    let mut rng = rng::vm_stream(config.seed, StreamKind::Sizing, id);
    let s = &config.sizing;
    let initial_spec = ResourceSpec::from_units(
        draw(&mut rng, s.cpu),
        draw(&mut rng, s.ram),
        draw(&mut rng, s.net),
    );
    let revenue = Quantity::from(draw(&mut rng, s.revenue));
    let sla = draw(&mut rng, s.sla) as u32;
    VmPlan {
        descriptor: VmDescriptor::new(id, revenue, sla, t_init, t_end)
            .expect("t_init < t_end by construction"),
        initial_spec,
    }
}

/// Draws a service arriving at `t`: a lifetime clipped to the horizon and a
/// VM count per datacenter, with indices taken from `alloc`.
pub fn sample_service<R: Rng + ?Sized>(
    rng: &mut R,
    config: &GeneratorConfig,
    t: Tick,
    service: u32,
    alloc: &mut IndexAllocator,
) -> ServiceTemplate {
    let shape = &config.service_shape;
    let lifetime = rng.random_range(shape.lifetime.min..=shape.lifetime.max);
    let t_departure = t.saturating_add(lifetime).min(config.horizon);
    let horizontal = config.environment.capabilities().horizontal;
    let mut vms = Vec::new();
    for dc in 1..=config.num_datacenters {
        let mut n = rng.random_range(shape.vms_per_dc.min..=shape.vms_per_dc.max);
        if horizontal {
            let h = &config.horizontal_policy;
            n = n.clamp(h.min_vms, h.max_vms);
        }
        for _ in 0..n {
            let id = VmId::new(service, dc, alloc.allocate(dc));
            vms.push(sample_vm(config, id, t, t_departure));
        }
    }
    ServiceTemplate {
        service,
        t_arrival: t,
        t_departure,
        vms,
    }
}

struct ServiceRun {
    service: u32,
    t_arrival: Tick,
    t_departure: Tick,
    state: ServiceState,
    rng: rng::StreamRng,
}

struct Population {
    plans: Vec<VmPlan>,
    by_id: HashMap<VmId, usize>,
    runs: Vec<ServiceRun>,
    events: Vec<TraceEvent>,
    alloc: IndexAllocator,
}

impl Population {
    fn new(config: &GeneratorConfig) -> Self {
        Self {
            plans: Vec::new(),
            by_id: HashMap::new(),
            runs: Vec::new(),
            events: Vec::new(),
            alloc: IndexAllocator::new(config.num_datacenters),
        }
    }

    fn push_plan(&mut self, plan: VmPlan) {
        self.by_id.insert(plan.descriptor.id, self.plans.len());
        self.plans.push(plan);
    }

    fn admit(&mut self, config: &GeneratorConfig, t: Tick) {
        let service = self.runs.len() as u32 + 1;
        let mut shape_rng = rng::service_stream(config.seed, StreamKind::Shape, service);
        let template = sample_service(&mut shape_rng, config, t, service, &mut self.alloc);
        let members = (1..=config.num_datacenters)
            .map(|dc| DcMembers {
                dc,
                alive: template
                    .vms
                    .iter()
                    .filter(|p| p.descriptor.id.dc == dc)
                    .map(|p| p.descriptor.id.vm)
                    .collect(),
            })
            .collect();
        self.events.push(TraceEvent::arrival(t, service));
        self.events.push(TraceEvent::departure(template.t_departure, service));
        self.runs.push(ServiceRun {
            service,
            t_arrival: t,
            t_departure: template.t_departure,
            state: ServiceState { service, members },
            rng: rng::service_stream(config.seed, StreamKind::Horizontal, service),
        });
        for plan in template.vms {
            self.push_plan(plan);
        }
    }

    fn apply(&mut self, config: &GeneratorConfig, run_index: usize, t: Tick, action: ScaleAction) {
        let (service, t_departure) = {
            let run = &self.runs[run_index];
            (run.service, run.t_departure)
        };
        match action {
            ScaleAction::Out { dc } => {
                let id = VmId::new(service, dc, self.alloc.allocate(dc));
                self.push_plan(sample_vm(config, id, t, t_departure));
                self.runs[run_index].state.members[dc as usize - 1].alive.push(id.vm);
                self.events.push(TraceEvent::scale_out(t, id));
            }
            ScaleAction::In { dc, vm } => {
                let id = VmId::new(service, dc, vm);
                let idx = self.by_id[&id];
                self.plans[idx].descriptor.t_end = t;
                self.runs[run_index].state.members[dc as usize - 1]
                    .alive
                    .retain(|&j| j != vm);
                self.events.push(TraceEvent::scale_in(t, id));
            }
        }
    }

    fn has_scale_events(&self) -> bool {
        self.events.iter().any(|e| e.kind.is_scale())
    }
}

fn arrivals_per_tick(config: &GeneratorConfig) -> impl FnMut(Tick) -> u64 {
    let mut rng = rng::stream(config.seed, StreamKind::Arrival, &[]);
    let rate = config.arrival.rate;
    let poisson = (config.arrival.burst && rate > 0.0)
        .then(|| Poisson::new(rate).expect("rate validated positive and finite"));
    let force_initial = config.arrival.force_initial;
    move |t| {
        let n = match &poisson {
            Some(p) => p.sample(&mut rng) as u64,
            None => rng.random_bool(rate.min(1.0)) as u64,
        };
        if t == 0 && force_initial {
            n.max(1)
        } else {
            n
        }
    }
}

fn build_population(config: &GeneratorConfig, caps: Capabilities) -> Result<Population, ConfigError> {
    let mut pop = Population::new(config);
    let mut arrivals = arrivals_per_tick(config);
    for t in 0..config.horizon {
        if caps.horizontal {
            for i in 0..pop.runs.len() {
                let run = &mut pop.runs[i];
                if !(run.t_arrival < t && t < run.t_departure) {
                    continue;
                }
                let actions = evolve_horizontal(&mut run.rng, &run.state, &config.horizontal_policy);
                for action in actions {
                    pop.apply(config, i, t, action);
                }
            }
        }
        for _ in 0..arrivals(t) {
            pop.admit(config, t);
        }
    }

    if caps.horizontal && config.guarantee_dynamics && !pop.has_scale_events() {
        inject_scale_action(config, &mut pop)?;
    }
    Ok(pop)
}

fn inject_scale_action(config: &GeneratorConfig, pop: &mut Population) -> Result<(), ConfigError> {
    let policy = &config.horizontal_policy;
    let candidate = pop
        .runs
        .iter()
        .position(|r| r.t_departure - r.t_arrival >= 2)
        .ok_or_else(|| {
            ConfigError::GuaranteeUnsatisfiable(
                "horizontal",
                "no service lives for two ticks".into(),
            )
        })?;
    let t = pop.runs[candidate].t_arrival + 1;
    let first = &pop.runs[candidate].state.members[0];
    let action = if (first.alive.len() as u64) < policy.max_vms {
        ScaleAction::Out { dc: first.dc }
    } else {
        let vm = *first.alive.iter().max().expect("count at max_vms >= 1");
        ScaleAction::In { dc: first.dc, vm }
    };
    pop.apply(config, candidate, t, action);
    Ok(())
}

fn synthesize(config: &GeneratorConfig, caps: Capabilities, plan: &VmPlan) -> Vec<VmSample> {
    let d = &plan.descriptor;
    let mut rng = rng::vm_stream(config.seed, StreamKind::Dynamics, d.id);
    let classes = OverbookingClasses {
        server: caps.server_overbooking,
        network: caps.network_overbooking,
    };
    let upolicy = &config.utilization_policy;
    let mut spec = plan.initial_spec;
    let mut util = initial_utilization(
        &mut rng,
        &spec,
        upolicy,
        classes,
        config.vertical_policy.precision,
    );
    let mut out = Vec::with_capacity(d.lifetime() as usize);
    for t in d.t_init..d.t_end {
        if t > d.t_init {
            if caps.vertical {
                spec = evolve_vertical(&mut rng, &spec, &config.vertical_policy);
            }
            util = evolve_utilization(&mut rng, &util, &spec, upolicy, classes);
        }
        out.push(VmSample {
            vm: d.id,
            t,
            spec,
            util,
        });
    }
    out
}

type SampleRuns = Vec<Vec<VmSample>>;

fn has_capacity_change(runs: &SampleRuns) -> bool {
    runs.iter()
        .any(|r| r.windows(2).any(|w| w[0].spec != w[1].spec))
}

fn inject_capacity_change(caps: Capabilities, runs: &mut SampleRuns) -> Result<(), ConfigError> {
    let run = runs.iter_mut().find(|r| r.len() >= 2).ok_or_else(|| {
        ConfigError::GuaranteeUnsatisfiable("vertical", "no VM lives for two ticks".into())
    })?;
    for s in run.iter_mut().skip(1) {
        s.spec.cpu = s.spec.cpu + Quantity::ONE;
        if !caps.server_overbooking {
            s.util.cpu = s.spec.cpu;
        }
    }
    Ok(())
}

fn inject_utilization_gap(
    runs: &mut SampleRuns,
    what: &'static str,
    observed: impl Fn(&VmSample) -> bool,
    apply: impl Fn(&mut VmSample),
) -> Result<(), ConfigError> {
    if runs.iter().flatten().any(&observed) {
        return Ok(());
    }
    let sample = runs
        .iter_mut()
        .flatten()
        .next()
        .ok_or_else(|| ConfigError::GuaranteeUnsatisfiable(what, "trace has no VMs".into()))?;
    apply(sample);
    Ok(())
}

/// Generates a canonical trace from `config`. The result is a pure function
/// of the config, seed included.
pub fn generate(config: &GeneratorConfig) -> Result<Trace, ConfigError> {
    config.validate()?;
    let caps = config.environment.capabilities();
    let guarantee = config.guarantee_dynamics;

    let mut pop = build_population(config, caps)?;
    pop.plans.sort_by_key(|p| p.descriptor.id);

    let mut runs: SampleRuns = pop.plans.iter().map(|p| synthesize(config, caps, p)).collect();

    if guarantee && caps.vertical && !has_capacity_change(&runs) {
        inject_capacity_change(caps, &mut runs)?;
    }
    if guarantee && caps.server_overbooking {
        inject_utilization_gap(
            &mut runs,
            "server overbooking",
            |s| s.util.cpu != s.spec.cpu || s.util.ram != s.spec.ram,
            |s| s.util.cpu = s.spec.cpu.saturating_sub(Quantity::ONE),
        )?;
    }
    if guarantee && caps.network_overbooking {
        inject_utilization_gap(
            &mut runs,
            "network overbooking",
            |s| s.util.net != s.spec.net,
            |s| s.util.net = s.spec.net.saturating_sub(Quantity::ONE),
        )?;
    }

    let mut samples: Vec<VmSample> = runs.into_iter().flatten().collect();
    samples.sort_by_key(VmSample::sort_key);
    let descriptors: Vec<VmDescriptor> = pop.plans.into_iter().map(|p| p.descriptor).collect();
    let mut events = pop.events;
    events.sort_by_key(TraceEvent::sort_key);

    let header = TraceHeader {
        environment: config.environment,
        horizon: config.horizon,
        num_datacenters: config.num_datacenters,
        max_sla: config.sizing.sla_levels,
        seed: Some(config.seed),
        config_digest: Some(config.digest()),
        format_version: FORMAT_VERSION,
    };
    Ok(Trace {
        header,
        events,
        samples,
        descriptors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environments::EnvironmentId;
    use crate::model::full_utilization;

    fn env(s: &str) -> EnvironmentId {
        s.parse().unwrap()
    }

    #[test]
    fn allocator_is_per_datacenter() {
        let mut a = IndexAllocator::new(2);
        assert_eq!(a.allocate(1), 1);
        assert_eq!(a.allocate(1), 2);
        assert_eq!(a.allocate(2), 1);
        assert_eq!(a.allocate(1), 3);
    }

    #[test]
    fn service_indices_are_consecutive_per_dc() {
        let mut cfg = GeneratorConfig::new(env("0,0"), 10, 2, 1);
        cfg.service_shape.vms_per_dc = IntRange::fixed(2);
        let mut alloc = IndexAllocator::new(2);
        let mut r = rng::stream(0, StreamKind::Shape, &[]);
        let s = sample_service(&mut r, &cfg, 0, 1, &mut alloc);
        let ids: Vec<_> = s.vms.iter().map(|p| p.descriptor.id).collect();
        assert_eq!(
            ids,
            vec![
                VmId::new(1, 1, 1),
                VmId::new(1, 1, 2),
                VmId::new(1, 2, 1),
                VmId::new(1, 2, 2)
            ]
        );
        // The next service continues each datacenter's numbering.
        cfg.service_shape.vms_per_dc = IntRange::fixed(1);
        let s2 = sample_service(&mut r, &cfg, 2, 2, &mut alloc);
        let ids: Vec<_> = s2.vms.iter().map(|p| p.descriptor.id).collect();
        assert_eq!(ids, vec![VmId::new(2, 1, 3), VmId::new(2, 2, 3)]);
        assert!(s2.vms.iter().all(|p| p.descriptor.t_init == 2));
    }

    #[test]
    fn lifetime_clipped_to_horizon() {
        let mut cfg = GeneratorConfig::new(env("0,0"), 5, 1, 1);
        cfg.service_shape.lifetime = IntRange::fixed(100);
        let mut alloc = IndexAllocator::new(1);
        let mut r = rng::stream(0, StreamKind::Shape, &[]);
        let s = sample_service(&mut r, &cfg, 3, 1, &mut alloc);
        assert_eq!(s.t_departure, 5);
        assert!(s.vms.iter().all(|p| p.descriptor.t_end == 5));
    }

    #[test]
    fn static_environment_has_no_dynamics() {
        let mut cfg = GeneratorConfig::new(env("0,0"), 5, 2, 42);
        cfg.arrival.force_initial = true;
        let trace = generate(&cfg).unwrap();
        assert!(!trace.samples.is_empty());
        for s in &trace.samples {
            assert_eq!(s.util, full_utilization(&s.spec));
        }
        for d in &trace.descriptors {
            let specs: Vec<_> = trace.samples_of(d.id).map(|s| s.spec).collect();
            assert_eq!(specs.len() as u64, d.lifetime());
            assert!(specs.windows(2).all(|w| w[0] == w[1]));
        }
        assert!(trace.events.iter().all(|e| !e.kind.is_scale()));
    }

    #[test]
    fn header_carries_config_identity() {
        let cfg = GeneratorConfig::new(env("1,2"), 12, 3, 99);
        let trace = generate(&cfg).unwrap();
        assert_eq!(trace.header.environment, cfg.environment);
        assert_eq!(trace.header.horizon, 12);
        assert_eq!(trace.header.num_datacenters, 3);
        assert_eq!(trace.header.seed, Some(99));
        assert_eq!(trace.header.config_digest, Some(cfg.digest()));
    }

    #[test]
    fn same_seed_same_trace() {
        let mut cfg = GeneratorConfig::new(env("3,3"), 30, 3, 7);
        cfg.guarantee_dynamics = true;
        assert_eq!(generate(&cfg).unwrap(), generate(&cfg).unwrap());
        let mut other = cfg.clone();
        other.seed = 8;
        assert_ne!(generate(&cfg).unwrap(), generate(&other).unwrap());
    }

    #[test]
    fn config_errors() {
        assert!(generate(&GeneratorConfig::new(env("0,0"), 0, 1, 0)).is_err());
        assert!(generate(&GeneratorConfig::new(env("0,0"), 5, 0, 0)).is_err());
        let mut cfg = GeneratorConfig::new(env("2,0"), 1, 1, 0);
        cfg.guarantee_dynamics = true;
        assert!(matches!(
            generate(&cfg),
            Err(ConfigError::GuaranteeUnsatisfiable(..))
        ));
    }

    #[test]
    fn guarantee_injects_when_draws_are_quiet() {
        // Zero probabilities everywhere: every dynamic must come from injection.
        let mut cfg = GeneratorConfig::new(env("3,3"), 6, 2, 3);
        cfg.guarantee_dynamics = true;
        cfg.arrival.rate = 0.0;
        cfg.service_shape.lifetime = IntRange::fixed(6);
        cfg.vertical_policy.step_probability = 0.0;
        cfg.horizontal_policy.scale_probability = 0.0;
        cfg.utilization_policy.initial_percent = IntRange::fixed(100);
        cfg.utilization_policy.cpu_step = StepRange::new(0, 0);
        cfg.utilization_policy.ram_step = StepRange::new(0, 0);
        cfg.utilization_policy.net_step = StepRange::new(0, 0);
        let trace = generate(&cfg).unwrap();
        assert_eq!(trace.events.iter().filter(|e| e.kind.is_scale()).count(), 1);
        assert!(trace.samples.iter().any(|s| s.util.cpu != s.spec.cpu));
        assert!(trace.samples.iter().any(|s| s.util.net != s.spec.net));
        let changed = trace.descriptors.iter().any(|d| {
            let specs: Vec<_> = trace.samples_of(d.id).map(|s| s.spec).collect();
            specs.windows(2).any(|w| w[0] != w[1])
        });
        assert!(changed);
    }
}
