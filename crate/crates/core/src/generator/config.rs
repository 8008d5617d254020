use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::environments::EnvironmentId;
use crate::model::Tick;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("cannot guarantee {0} dynamics: {1}")]
    GuaranteeUnsatisfiable(&'static str, String),
    #[error("malformed config document: {0}")]
    Json(#[from] serde_json::Error),
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

/// Inclusive integer range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntRange {
    pub min: u64,
    pub max: u64,
}

impl IntRange {
    pub const fn new(min: u64, max: u64) -> Self {
        Self { min, max }
    }

    pub const fn fixed(v: u64) -> Self {
        Self { min: v, max: v }
    }

    fn check(&self, name: &str) -> Result<(), ConfigError> {
        if self.min > self.max {
            return Err(invalid(format!("{name}: min {} > max {}", self.min, self.max)));
        }
        Ok(())
    }
}

/// Inclusive signed range of random-walk steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRange {
    pub min: i64,
    pub max: i64,
}

impl StepRange {
    pub const fn new(min: i64, max: i64) -> Self {
        Self { min, max }
    }

    fn check(&self, name: &str) -> Result<(), ConfigError> {
        if self.min > self.max {
            return Err(invalid(format!("{name}: min {} > max {}", self.min, self.max)));
        }
        Ok(())
    }
}

fn check_probability(name: &str, p: f64) -> Result<(), ConfigError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(format!("{name} must lie in [0,1], got {p}")));
    }
    Ok(())
}

/// Service arrivals: a Bernoulli draw per tick with probability `rate`, or a
/// Poisson count with mean `rate` when `burst` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArrivalModel {
    pub rate: f64,
    /// Force at least one arrival at t=0.
    pub force_initial: bool,
    pub burst: bool,
}

impl Default for ArrivalModel {
    fn default() -> Self {
        Self {
            rate: 0.2,
            force_initial: true,
            burst: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceShape {
    /// Initial VMs per datacenter for each arriving service.
    pub vms_per_dc: IntRange,
    /// Service lifetime in ticks, clipped to the horizon.
    pub lifetime: IntRange,
}

impl Default for ServiceShape {
    fn default() -> Self {
        Self {
            vms_per_dc: IntRange::new(1, 2),
            lifetime: IntRange::new(4, 16),
        }
    }
}

/// Initial requested capacities and economic fields of new VMs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Sizing {
    /// ECU.
    pub cpu: IntRange,
    /// GB.
    pub ram: IntRange,
    /// Mbps.
    pub net: IntRange,
    pub revenue: IntRange,
    pub sla: IntRange,
    /// Highest SLA priority level; `sla` must lie within `1..=sla_levels`.
    pub sla_levels: u32,
}

impl Default for Sizing {
    fn default() -> Self {
        Self {
            cpu: IntRange::new(1, 16),
            ram: IntRange::new(1, 32),
            net: IntRange::new(10, 200),
            revenue: IntRange::new(0, 10),
            sla: IntRange::new(1, 3),
            sla_levels: 3,
        }
    }
}

/// Multiplicative capacity steps for vertical elasticity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerticalPolicy {
    /// Per-tick, per-component probability of a step.
    pub step_probability: f64,
    /// Step magnitude in percent; the sign is drawn uniformly.
    pub step_percent: IntRange,
    pub vary_net: bool,
    /// Fractional digits kept after a step.
    pub precision: u32,
    /// Lower bound on any stepped capacity.
    pub floor: u64,
}

impl Default for VerticalPolicy {
    fn default() -> Self {
        Self {
            step_probability: 0.2,
            step_percent: IntRange::new(10, 40),
            vary_net: false,
            precision: 0,
            floor: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HorizontalPolicy {
    /// Per-tick probability that a service performs one scale action.
    pub scale_probability: f64,
    /// Bounds on VMs per (service, datacenter).
    pub min_vms: u64,
    pub max_vms: u64,
}

impl Default for HorizontalPolicy {
    fn default() -> Self {
        Self {
            scale_probability: 0.2,
            min_vms: 1,
            max_vms: 4,
        }
    }
}

/// Bounded random walk of utilization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UtilizationPolicy {
    pub cpu_step: StepRange,
    pub ram_step: StepRange,
    pub net_step: StepRange,
    /// Utilization at t_init as a percentage of the request.
    pub initial_percent: IntRange,
    /// Cap utilization at twice the request instead of the request.
    pub allow_exceed_request: bool,
}

impl Default for UtilizationPolicy {
    fn default() -> Self {
        Self {
            cpu_step: StepRange::new(-2, 2),
            ram_step: StepRange::new(-2, 2),
            net_step: StepRange::new(-20, 20),
            initial_percent: IntRange::new(50, 100),
            allow_exceed_request: false,
        }
    }
}

/// Every knob of the stochastic workload model, plus the master seed.
///
/// Deserializes from JSON with lower_snake_case field names; omitted fields
/// take their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorConfig {
    pub environment: EnvironmentId,
    pub horizon: Tick,
    pub num_datacenters: u32,
    pub seed: u64,
    pub arrival: ArrivalModel,
    pub service_shape: ServiceShape,
    pub sizing: Sizing,
    pub vertical_policy: VerticalPolicy,
    pub horizontal_policy: HorizontalPolicy,
    pub utilization_policy: UtilizationPolicy,
    /// Inject one instance of every enabled dynamic when the stochastic
    /// draw produced none.
    pub guarantee_dynamics: bool,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            environment: EnvironmentId::STATIC,
            horizon: 24,
            num_datacenters: 2,
            seed: 0,
            arrival: ArrivalModel::default(),
            service_shape: ServiceShape::default(),
            sizing: Sizing::default(),
            vertical_policy: VerticalPolicy::default(),
            horizontal_policy: HorizontalPolicy::default(),
            utilization_policy: UtilizationPolicy::default(),
            guarantee_dynamics: false,
        }
    }
}

impl GeneratorConfig {
    pub fn new(environment: EnvironmentId, horizon: Tick, num_datacenters: u32, seed: u64) -> Self {
        Self {
            environment,
            horizon,
            num_datacenters,
            seed,
            ..Self::default()
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serialization is infallible")
    }

    /// Lowercase hex SHA-256 of the compact JSON form.
    pub fn digest(&self) -> String {
        let hash = Sha256::digest(self.to_json().as_bytes());
        hash.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.horizon < 1 {
            return Err(invalid("horizon must be at least 1"));
        }
        if self.num_datacenters < 1 {
            return Err(invalid("num_datacenters must be at least 1"));
        }

        let a = &self.arrival;
        if !a.rate.is_finite() || a.rate < 0.0 {
            return Err(invalid(format!("arrival.rate must be finite and >= 0, got {}", a.rate)));
        }
        if !a.burst && a.rate > 1.0 {
            return Err(invalid("arrival.rate above 1 requires arrival.burst"));
        }

        let shape = &self.service_shape;
        shape.vms_per_dc.check("service_shape.vms_per_dc")?;
        shape.lifetime.check("service_shape.lifetime")?;
        if shape.vms_per_dc.min < 1 {
            return Err(invalid("service_shape.vms_per_dc.min must be at least 1"));
        }
        if shape.lifetime.min < 1 {
            return Err(invalid("service_shape.lifetime.min must be at least 1"));
        }

        let s = &self.sizing;
        for (name, r) in [("sizing.cpu", s.cpu), ("sizing.ram", s.ram), ("sizing.net", s.net)] {
            r.check(name)?;
            if r.min < 1 {
                return Err(invalid(format!("{name}.min must be at least 1")));
            }
        }
        s.revenue.check("sizing.revenue")?;
        s.sla.check("sizing.sla")?;
        if s.sla_levels < 1 {
            return Err(invalid("sizing.sla_levels must be at least 1"));
        }
        if s.sla.min < 1 || s.sla.max > s.sla_levels as u64 {
            return Err(invalid(format!(
                "sizing.sla must lie within 1..={}",
                s.sla_levels
            )));
        }

        let v = &self.vertical_policy;
        check_probability("vertical_policy.step_probability", v.step_probability)?;
        v.step_percent.check("vertical_policy.step_percent")?;
        if v.floor < 1 {
            return Err(invalid("vertical_policy.floor must be at least 1"));
        }
        if v.precision > 6 {
            return Err(invalid("vertical_policy.precision must be at most 6"));
        }

        let h = &self.horizontal_policy;
        check_probability("horizontal_policy.scale_probability", h.scale_probability)?;
        if h.min_vms < 1 {
            return Err(invalid("horizontal_policy.min_vms must be at least 1"));
        }
        if h.min_vms > h.max_vms {
            return Err(invalid("horizontal_policy.min_vms exceeds max_vms"));
        }

        let u = &self.utilization_policy;
        u.cpu_step.check("utilization_policy.cpu_step")?;
        u.ram_step.check("utilization_policy.ram_step")?;
        u.net_step.check("utilization_policy.net_step")?;
        u.initial_percent.check("utilization_policy.initial_percent")?;

        if self.guarantee_dynamics {
            self.check_guarantee()?;
        }
        Ok(())
    }

    fn check_guarantee(&self) -> Result<(), ConfigError> {
        let caps = self.environment.capabilities();
        let any = caps.horizontal || caps.vertical || caps.server_overbooking || caps.network_overbooking;
        if !any {
            return Ok(());
        }
        if !self.arrival.force_initial && self.arrival.rate == 0.0 {
            return Err(ConfigError::GuaranteeUnsatisfiable(
                "any",
                "no service can arrive".into(),
            ));
        }
        for (enabled, what) in [(caps.vertical, "vertical"), (caps.horizontal, "horizontal")] {
            if !enabled {
                continue;
            }
            if self.horizon < 2 {
                return Err(ConfigError::GuaranteeUnsatisfiable(
                    what,
                    "horizon shorter than 2 ticks".into(),
                ));
            }
            if self.service_shape.lifetime.max < 2 {
                return Err(ConfigError::GuaranteeUnsatisfiable(
                    what,
                    "service lifetimes shorter than 2 ticks".into(),
                ));
            }
        }
        if caps.horizontal && self.horizontal_policy.min_vms == self.horizontal_policy.max_vms {
            return Err(ConfigError::GuaranteeUnsatisfiable(
                "horizontal",
                "min_vms equals max_vms".into(),
            ));
        }
        Ok(())
    }
}
