//! Domain notation for services, datacenters, and VMs.
//!
//! A VM is identified by `(service, dc, vm)`: VM `vm` hosted in datacenter
//! `dc` on behalf of service `service`. Its requested capacities and its
//! utilization are sampled densely at every tick of its half-open lifetime
//! `[t_init, t_end)`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::environments::EnvironmentId;
use crate::quantity::Quantity;

/// One discrete time step.
pub type Tick = u64;

/// Current trace document version.
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("tick {t} outside horizon 0..{horizon}")]
    TickOutOfRange { t: Tick, horizon: Tick },
    #[error("negative {field}: {value}")]
    NegativeQuantity { field: &'static str, value: Quantity },
    #[error("empty lifetime for {vm}: t_init {t_init} >= t_end {t_end}")]
    EmptyLifetime { vm: VmId, t_init: Tick, t_end: Tick },
    #[error("invalid header: {0}")]
    InvalidHeader(&'static str),
}

/// `(service b, datacenter c, index j)`; ordered lexicographically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VmId {
    pub service: u32,
    pub dc: u32,
    pub vm: u32,
}

impl VmId {
    pub const fn new(service: u32, dc: u32, vm: u32) -> Self {
        Self { service, dc, vm }
    }
}

impl fmt::Display for VmId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "V[{},{},{}]", self.service, self.dc, self.vm)
    }
}

fn check_non_negative(field: &'static str, value: Quantity) -> Result<(), ModelError> {
    if value.is_negative() {
        Err(ModelError::NegativeQuantity { field, value })
    } else {
        Ok(())
    }
}

/// Requested capacities: cpu in ECU, ram in GB, net in Mbps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct ResourceSpec {
    pub cpu: Quantity,
    pub ram: Quantity,
    pub net: Quantity,
}

impl ResourceSpec {
    pub fn new(cpu: Quantity, ram: Quantity, net: Quantity) -> Result<Self, ModelError> {
        check_non_negative("cpu", cpu)?;
        check_non_negative("ram", ram)?;
        check_non_negative("net", net)?;
        Ok(Self { cpu, ram, net })
    }

    pub fn from_units(cpu: u64, ram: u64, net: u64) -> Self {
        Self {
            cpu: cpu.into(),
            ram: ram.into(),
            net: net.into(),
        }
    }
}

/// Utilized amounts, same units as [`ResourceSpec`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct UtilizationSample {
    pub cpu: Quantity,
    pub ram: Quantity,
    pub net: Quantity,
}

impl UtilizationSample {
    pub fn new(cpu: Quantity, ram: Quantity, net: Quantity) -> Result<Self, ModelError> {
        check_non_negative("cpu", cpu)?;
        check_non_negative("ram", ram)?;
        check_non_negative("net", net)?;
        Ok(Self { cpu, ram, net })
    }

    pub fn from_units(cpu: u64, ram: u64, net: u64) -> Self {
        Self {
            cpu: cpu.into(),
            ram: ram.into(),
            net: net.into(),
        }
    }
}

/// Utilization of a resource class that is not overbooked: all of it.
pub fn full_utilization(spec: &ResourceSpec) -> UtilizationSample {
    UtilizationSample {
        cpu: spec.cpu,
        ram: spec.ram,
        net: spec.net,
    }
}

/// A VM request: identity, economic fields, and lifetime `[t_init, t_end)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VmDescriptor {
    pub id: VmId,
    pub revenue: Quantity,
    pub sla: u32,
    pub t_init: Tick,
    pub t_end: Tick,
}

impl VmDescriptor {
    pub fn new(
        id: VmId,
        revenue: Quantity,
        sla: u32,
        t_init: Tick,
        t_end: Tick,
    ) -> Result<Self, ModelError> {
        check_non_negative("revenue", revenue)?;
        if t_init >= t_end {
            return Err(ModelError::EmptyLifetime {
                vm: id,
                t_init,
                t_end,
            });
        }
        Ok(Self {
            id,
            revenue,
            sla,
            t_init,
            t_end,
        })
    }

    pub fn is_alive(&self, t: Tick) -> bool {
        self.t_init <= t && t < self.t_end
    }

    pub fn lifetime(&self) -> Tick {
        self.t_end - self.t_init
    }
}

/// Requested capacities and utilization of one VM at one tick.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VmSample {
    pub vm: VmId,
    pub t: Tick,
    pub spec: ResourceSpec,
    pub util: UtilizationSample,
}

impl VmSample {
    /// Canonical ordering key `(t, b, c, j)`.
    pub fn sort_key(&self) -> (Tick, VmId) {
        (self.t, self.vm)
    }
}

/// Event kinds; the declaration order is the canonical order within a tick.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    ServiceArrival,
    ServiceDeparture,
    VmScaleOut,
    VmScaleIn,
}

impl EventKind {
    pub fn is_scale(self) -> bool {
        matches!(self, EventKind::VmScaleOut | EventKind::VmScaleIn)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TraceEvent {
    pub t: Tick,
    pub kind: EventKind,
    pub service: u32,
    /// `(dc, vm)` for scale events.
    pub target: Option<(u32, u32)>,
}

impl TraceEvent {
    pub fn arrival(t: Tick, service: u32) -> Self {
        Self {
            t,
            kind: EventKind::ServiceArrival,
            service,
            target: None,
        }
    }

    pub fn departure(t: Tick, service: u32) -> Self {
        Self {
            t,
            kind: EventKind::ServiceDeparture,
            service,
            target: None,
        }
    }

    pub fn scale_out(t: Tick, vm: VmId) -> Self {
        Self {
            t,
            kind: EventKind::VmScaleOut,
            service: vm.service,
            target: Some((vm.dc, vm.vm)),
        }
    }

    pub fn scale_in(t: Tick, vm: VmId) -> Self {
        Self {
            t,
            kind: EventKind::VmScaleIn,
            service: vm.service,
            target: Some((vm.dc, vm.vm)),
        }
    }

    pub fn vm(&self) -> Option<VmId> {
        self.target.map(|(dc, vm)| VmId::new(self.service, dc, vm))
    }

    /// Canonical ordering key `(t, kind, b, c, j)`; service events sort
    /// before scale events of the same kind rank.
    pub fn sort_key(&self) -> (Tick, EventKind, u32, Option<(u32, u32)>) {
        (self.t, self.kind, self.service, self.target)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TraceHeader {
    pub environment: EnvironmentId,
    pub horizon: Tick,
    pub num_datacenters: u32,
    /// Highest SLA priority level `s`.
    pub max_sla: u32,
    pub seed: Option<u64>,
    pub config_digest: Option<String>,
    pub format_version: u32,
}

impl TraceHeader {
    pub fn new(
        environment: EnvironmentId,
        horizon: Tick,
        num_datacenters: u32,
        max_sla: u32,
    ) -> Result<Self, ModelError> {
        let header = Self {
            environment,
            horizon,
            num_datacenters,
            max_sla,
            seed: None,
            config_digest: None,
            format_version: FORMAT_VERSION,
        };
        header.check()?;
        Ok(header)
    }

    pub fn check(&self) -> Result<(), ModelError> {
        if self.horizon < 1 {
            return Err(ModelError::InvalidHeader("horizon must be at least 1"));
        }
        if self.num_datacenters < 1 {
            return Err(ModelError::InvalidHeader("num_datacenters must be at least 1"));
        }
        if self.max_sla < 1 {
            return Err(ModelError::InvalidHeader("max_sla must be at least 1"));
        }
        Ok(())
    }
}

/// Header, event timeline, dense per-tick samples, and VM descriptors.
///
/// A canonical trace keeps events sorted by [`TraceEvent::sort_key`],
/// samples by [`VmSample::sort_key`], and descriptors by id. Lookups below
/// assume canonical order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub header: TraceHeader,
    pub events: Vec<TraceEvent>,
    pub samples: Vec<VmSample>,
    pub descriptors: Vec<VmDescriptor>,
}

impl Trace {
    pub fn empty(header: TraceHeader) -> Self {
        Self {
            header,
            events: Vec::new(),
            samples: Vec::new(),
            descriptors: Vec::new(),
        }
    }

    pub fn descriptor(&self, id: VmId) -> Option<&VmDescriptor> {
        self.descriptors
            .binary_search_by(|d| d.id.cmp(&id))
            .ok()
            .map(|i| &self.descriptors[i])
    }

    /// All samples at tick `t`, ordered by VM id.
    pub fn samples_at(&self, t: Tick) -> &[VmSample] {
        let lo = self.samples.partition_point(|s| s.t < t);
        let hi = self.samples.partition_point(|s| s.t <= t);
        &self.samples[lo..hi]
    }

    pub fn sample(&self, t: Tick, id: VmId) -> Option<&VmSample> {
        self.samples
            .binary_search_by(|s| s.sort_key().cmp(&(t, id)))
            .ok()
            .map(|i| &self.samples[i])
    }

    /// Samples of one VM in tick order.
    pub fn samples_of(&self, id: VmId) -> impl Iterator<Item = &VmSample> + '_ {
        let range = self
            .descriptor(id)
            .map(|d| d.t_init..d.t_end)
            .unwrap_or(0..0);
        range.filter_map(move |t| self.sample(t, id))
    }

    pub fn service_ids(&self) -> Vec<u32> {
        let mut ids: Vec<u32> = self.descriptors.iter().map(|d| d.id.service).collect();
        ids.dedup();
        ids
    }

    fn check_tick(&self, t: Tick) -> Result<(), ModelError> {
        if t >= self.header.horizon {
            return Err(ModelError::TickOutOfRange {
                t,
                horizon: self.header.horizon,
            });
        }
        Ok(())
    }
}

/// VMs `(b, j)` alive in datacenter `dc` at tick `t`, in canonical order.
/// The length is the datacenter's VM count at `t`.
pub fn dc_population(trace: &Trace, dc: u32, t: Tick) -> Result<Vec<(u32, u32)>, ModelError> {
    trace.check_tick(t)?;
    Ok(trace
        .samples_at(t)
        .iter()
        .filter(|s| s.vm.dc == dc)
        .map(|s| (s.vm.service, s.vm.vm))
        .collect())
}

/// Number of VMs of `service` alive at `t` across all datacenters.
pub fn service_vm_count(trace: &Trace, service: u32, t: Tick) -> Result<usize, ModelError> {
    trace.check_tick(t)?;
    Ok(trace
        .samples_at(t)
        .iter()
        .filter(|s| s.vm.service == service)
        .count())
}
