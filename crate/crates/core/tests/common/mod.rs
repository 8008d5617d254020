#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_pcg::Pcg64;
use rust_decimal::Decimal;
use serde_json::Value;

use vmpt::environments::{enumerate_environments, EnvironmentId};
use vmpt::generator::{GeneratorConfig, IntRange, StepRange};
use vmpt::model::{
    ResourceSpec, Tick, Trace, TraceEvent, TraceHeader, UtilizationSample, VmDescriptor, VmId,
    VmSample,
};
use vmpt::quantity::Quantity;

/// Cells of the worked-example tables, typed in independently of the
/// library's fixture module: (b, c, j, t_init, vcpu, vram, vnet, ucpu, uram, unet).
pub type Column = (u32, u32, u32, u64, [u64; 4], [u64; 4], u64, [u64; 4], [u64; 4], [u64; 4]);

pub fn example_columns(env: &str) -> Vec<Column> {
    const C8: [u64; 4] = [8; 4];
    const R16: [u64; 4] = [16; 4];
    const C5: [u64; 4] = [5; 4];
    const R12: [u64; 4] = [12; 4];
    const C9: [u64; 4] = [9; 4];
    const R18: [u64; 4] = [18; 4];
    match env {
        "0,1" => vec![
            (1, 1, 1, 0, C8, R16, 150, [8, 9, 10, 12], [16, 18, 22, 26], [150; 4]),
            (1, 1, 2, 0, C5, R12, 50, [5, 5, 7, 7], [12, 13, 16, 20], [50; 4]),
            (1, 2, 1, 0, C5, R12, 50, [5, 4, 4, 5], [12, 10, 10, 9], [50; 4]),
            (1, 2, 2, 0, C9, R18, 170, [9, 12, 14, 13], [18, 20, 22, 25], [170; 4]),
        ],
        "0,2" => vec![
            (1, 1, 1, 0, C8, R16, 150, C8, R16, [150, 170, 180, 200]),
            (1, 1, 2, 0, C5, R12, 50, C5, R12, [50, 60, 40, 0]),
            (1, 2, 1, 0, C5, R12, 50, C5, R12, [50, 100, 150, 170]),
            (1, 2, 2, 0, C9, R18, 150, C9, R18, [150, 200, 350, 800]),
        ],
        "1,0" => vec![
            (1, 1, 1, 0, C8, R16, 150, C8, R16, [150; 4]),
            (1, 1, 2, 0, C5, R12, 50, C5, R12, [50; 4]),
            (1, 2, 1, 0, C5, R12, 50, C5, R12, [50; 4]),
            (1, 2, 2, 0, C9, R18, 170, C9, R18, [170; 4]),
        ],
        "2,0" => vec![
            (1, 1, 1, 0, [8, 9, 9, 11], [16, 22, 23, 25], 150, C8, R16, [150; 4]),
            (1, 1, 2, 0, [5, 6, 6, 5], [12, 15, 15, 16], 50, C5, R12, [50; 4]),
            (1, 2, 1, 0, [5, 6, 6, 7], [12, 18, 18, 20], 50, C5, R12, [50; 4]),
            (1, 2, 2, 0, [9, 6, 6, 5], [18, 10, 10, 12], 170, C9, R18, [170; 4]),
        ],
        other => panic!("no example table {other}"),
    }
}

/// The second service of the horizontal example: (c, j, vcpu, vram, vnet), alive t = 2..=4.
pub const EXAMPLE3_S2: [(u32, u32, u64, u64, u64); 2] = [(1, 3, 2, 10, 60), (2, 3, 8, 20, 120)];

/// Raw `sample` lines of a JSONL document keyed by (t, b, c, j).
pub fn sample_lines(doc: &[u8]) -> BTreeMap<(u64, u64, u64, u64), Value> {
    let text = std::str::from_utf8(doc).expect("utf-8 document");
    let mut out = BTreeMap::new();
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let v: Value = serde_json::from_str(line).expect("each line is JSON");
        if v["type"] == "sample" {
            let key = ["t", "service", "dc", "vm"].map(|k| v[k].as_u64().expect("integer key"));
            out.insert((key[0], key[1], key[2], key[3]), v);
        }
    }
    out
}

pub fn dec(v: &Value) -> Decimal {
    Decimal::from_str(&v.to_string()).expect("decimal number")
}

/// Per-(dc, t) sums of the six resource fields plus a VM count, over raw lines.
pub fn brute_force_totals(doc: &[u8]) -> BTreeMap<(u64, u64), ([Decimal; 6], usize)> {
    const FIELDS: [&str; 6] = ["vcpu", "vram", "vnet", "ucpu", "uram", "unet"];
    let mut out: BTreeMap<(u64, u64), ([Decimal; 6], usize)> = BTreeMap::new();
    for ((t, _, dc, _), v) in sample_lines(doc) {
        let e = out.entry((dc, t)).or_insert(([Decimal::ZERO; 6], 0));
        for (i, f) in FIELDS.iter().enumerate() {
            e.0[i] += dec(&v[*f]);
        }
        e.1 += 1;
    }
    out
}

/// Environment bits read straight off the samples: consecutive-tick pairs for
/// elasticity, every sample for overbooking.
pub fn brute_force_classify(trace: &Trace, arrival_as_horizontal: bool) -> EnvironmentId {
    let by_key: BTreeMap<(VmId, Tick), &VmSample> =
        trace.samples.iter().map(|s| ((s.vm, s.t), s)).collect();
    let mut vertical = false;
    for (&(id, t), s) in &by_key {
        if t > 0 {
            if let Some(prev) = by_key.get(&(id, t - 1)) {
                if prev.spec != s.spec {
                    vertical = true;
                }
            }
        }
    }

    let mut alive: BTreeMap<u32, BTreeMap<Tick, BTreeSet<VmId>>> = BTreeMap::new();
    for s in &trace.samples {
        alive.entry(s.vm.service).or_default().entry(s.t).or_default().insert(s.vm);
    }
    let mut horizontal = false;
    for ticks in alive.values() {
        let first = *ticks.keys().next().unwrap();
        let last = *ticks.keys().last().unwrap();
        for t in first + 1..=last {
            let n = |t: Tick| ticks.get(&t).map_or(0, |s| s.len());
            if n(t) != n(t - 1) {
                horizontal = true;
            }
        }
    }
    if arrival_as_horizontal {
        for (b, ticks) in &alive {
            let first = *ticks.keys().next().unwrap();
            if first > 0
                && alive
                    .iter()
                    .any(|(other, ot)| other != b && ot.contains_key(&first))
            {
                horizontal = true;
            }
        }
    }

    let server = trace
        .samples
        .iter()
        .any(|s| s.util.cpu != s.spec.cpu || s.util.ram != s.spec.ram);
    let network = trace.samples.iter().any(|s| s.util.net != s.spec.net);

    let e = horizontal as i64 + 2 * vertical as i64;
    let o = server as i64 + 2 * network as i64;
    EnvironmentId::new(e, o).unwrap()
}

/// Fills in service and scale events implied by the descriptors and sorts
/// everything canonically.
pub fn assemble(header: TraceHeader, mut descriptors: Vec<VmDescriptor>, mut samples: Vec<VmSample>) -> Trace {
    descriptors.sort_by_key(|d| d.id);
    samples.sort_by_key(|s| (s.t, s.vm));
    let mut spans: BTreeMap<u32, (Tick, Tick)> = BTreeMap::new();
    for d in &descriptors {
        let e = spans.entry(d.id.service).or_insert((d.t_init, d.t_end));
        e.0 = e.0.min(d.t_init);
        e.1 = e.1.max(d.t_end);
    }
    let mut events = Vec::new();
    for (&b, &(s, e)) in &spans {
        events.push(TraceEvent::arrival(s, b));
        events.push(TraceEvent::departure(e, b));
    }
    for d in &descriptors {
        let (s, e) = spans[&d.id.service];
        if d.t_init > s {
            events.push(TraceEvent::scale_out(d.t_init, d.id));
        }
        if d.t_end < e {
            events.push(TraceEvent::scale_in(d.t_end, d.id));
        }
    }
    events.sort_by_key(TraceEvent::sort_key);
    Trace {
        header,
        events,
        samples,
        descriptors,
    }
}

/// Adds a VM with constant spec and full utilization over `[t_init, t_end)`.
pub fn with_extra_vm(trace: &Trace, id: VmId, t_init: Tick, t_end: Tick) -> Trace {
    let mut descriptors = trace.descriptors.clone();
    let mut samples = trace.samples.clone();
    descriptors.push(VmDescriptor::new(id, Quantity::ZERO, 1, t_init, t_end).unwrap());
    for t in t_init..t_end {
        samples.push(VmSample {
            vm: id,
            t,
            spec: ResourceSpec::from_units(2, 4, 20),
            util: UtilizationSample::from_units(2, 4, 20),
        });
    }
    assemble(trace.header.clone(), descriptors, samples)
}

pub fn next_vm_index(trace: &Trace, service: u32, dc: u32) -> u32 {
    trace
        .descriptors
        .iter()
        .filter(|d| d.id.service == service && d.id.dc == dc)
        .map(|d| d.id.vm)
        .max()
        .unwrap_or(0)
        + 1
}

fn range(rng: &mut Pcg64, lo: u64, hi: u64, extra: u64) -> IntRange {
    let min = rng.random_range(lo..=hi);
    IntRange::new(min, min + rng.random_range(0..=extra))
}

fn steps(rng: &mut Pcg64, mag: i64) -> StepRange {
    let a = rng.random_range(-mag..=mag);
    let b = rng.random_range(-mag..=mag);
    StepRange::new(a.min(b), a.max(b))
}

/// A valid configuration with every policy knob drawn at random; never sets
/// `allow_exceed_request` or `guarantee_dynamics`.
pub fn random_config(seed: u64) -> GeneratorConfig {
    let mut rng = Pcg64::seed_from_u64(seed);
    let envs = enumerate_environments();
    let env = envs[rng.random_range(0..envs.len())];
    let mut cfg = GeneratorConfig::new(
        env,
        rng.random_range(1..=30),
        rng.random_range(1..=4),
        rng.random(),
    );
    cfg.arrival.burst = rng.random_bool(0.2);
    cfg.arrival.rate = if cfg.arrival.burst {
        rng.random_range(0.0..2.5)
    } else {
        rng.random_range(0.0..=1.0)
    };
    cfg.arrival.force_initial = rng.random_bool(0.8);
    cfg.service_shape.vms_per_dc = range(&mut rng, 1, 3, 2);
    cfg.service_shape.lifetime = range(&mut rng, 1, 6, 15);
    cfg.sizing.cpu = range(&mut rng, 1, 8, 16);
    cfg.sizing.ram = range(&mut rng, 1, 16, 32);
    cfg.sizing.net = range(&mut rng, 1, 100, 300);
    cfg.sizing.revenue = range(&mut rng, 0, 5, 10);
    cfg.sizing.sla_levels = rng.random_range(1..=4);
    let sla_min = rng.random_range(1..=cfg.sizing.sla_levels as u64);
    cfg.sizing.sla = IntRange::new(sla_min, rng.random_range(sla_min..=cfg.sizing.sla_levels as u64));
    cfg.vertical_policy.step_probability = rng.random_range(0.0..=1.0);
    cfg.vertical_policy.step_percent = range(&mut rng, 0, 50, 50);
    cfg.vertical_policy.vary_net = rng.random_bool(0.5);
    cfg.vertical_policy.precision = rng.random_range(0..=2);
    cfg.vertical_policy.floor = rng.random_range(1..=3);
    cfg.horizontal_policy.scale_probability = rng.random_range(0.0..=1.0);
    cfg.horizontal_policy.min_vms = rng.random_range(1..=2);
    cfg.horizontal_policy.max_vms = cfg.horizontal_policy.min_vms + rng.random_range(0..=3);
    cfg.utilization_policy.cpu_step = steps(&mut rng, 4);
    cfg.utilization_policy.ram_step = steps(&mut rng, 6);
    cfg.utilization_policy.net_step = steps(&mut rng, 40);
    cfg.utilization_policy.initial_percent = range(&mut rng, 0, 100, 60);
    if cfg.utilization_policy.initial_percent.max > 100 {
        cfg.utilization_policy.initial_percent.max = 100;
    }
    cfg.validate().expect("random config is valid");
    cfg
}

/// Random small structurally valid trace: up to `max_vms` VMs, horizon `horizon`,
/// values in 1..=3 so that equal neighbours are common.
pub fn random_small_trace(seed: u64, max_vms: usize, horizon: Tick) -> Trace {
    let mut rng = Pcg64::seed_from_u64(seed);
    let header = TraceHeader::new(EnvironmentId::STATIC, horizon, 2, 1).unwrap();
    let n = rng.random_range(1..=max_vms);
    let mut next: BTreeMap<(u32, u32), u32> = BTreeMap::new();
    let mut descriptors = Vec::new();
    let mut samples = Vec::new();
    for _ in 0..n {
        let service = rng.random_range(1..=2);
        let dc = rng.random_range(1..=2);
        let j = next.entry((service, dc)).or_insert(0);
        *j += 1;
        let id = VmId::new(service, dc, *j);
        let a = rng.random_range(0..horizon);
        let b = rng.random_range(a + 1..=horizon);
        descriptors.push(VmDescriptor::new(id, Quantity::ZERO, 1, a, b).unwrap());
        let mut v = || rng.random_range(1..=3u64);
        let spec0 = ResourceSpec::from_units(v(), v(), v());
        for t in a..b {
            let spec = if rng.random_bool(0.3) {
                ResourceSpec::from_units(rng.random_range(1..=3), rng.random_range(1..=3), rng.random_range(1..=3))
            } else {
                spec0
            };
            let util = if rng.random_bool(0.3) {
                UtilizationSample::from_units(rng.random_range(1..=3), rng.random_range(1..=3), rng.random_range(1..=3))
            } else {
                vmpt::model::full_utilization(&spec)
            };
            samples.push(VmSample { vm: id, t, spec, util });
        }
    }
    assemble(header, descriptors, samples)
}

pub fn all_envs() -> Vec<EnvironmentId> {
    enumerate_environments()
}
