//! Hand-encoded traces of the four worked examples.
//!
//! Each fixture spans six ticks in two datacenters with a single SLA level.
//! Fields the example tables do not show are filled with fixed values: revenue 0,
//! SLA 1, and a requested bandwidth equal to the VM's first network
//! utilization value. Every other cell is stored verbatim, including cells
//! that disagree with the environment the example is said to illustrate.

use std::fmt;
use std::str::FromStr;

use crate::environments::EnvironmentId;
use crate::model::{
    ResourceSpec, Tick, Trace, TraceEvent, TraceHeader, UtilizationSample, VmDescriptor, VmId,
    VmSample,
};
use crate::quantity::Quantity;

const FIXTURE_HORIZON: Tick = 6;
const FIXTURE_DATACENTERS: u32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FixtureId {
    /// Server overbooking, no elasticity.
    Example1Env01,
    /// Network overbooking, no elasticity.
    Example2Env02,
    /// A second service joins mid-trace.
    Example3Env10,
    /// Vertical elasticity.
    Example4Env20,
}

impl FixtureId {
    pub const ALL: [FixtureId; 4] = [
        FixtureId::Example1Env01,
        FixtureId::Example2Env02,
        FixtureId::Example3Env10,
        FixtureId::Example4Env20,
    ];

    /// Environment the example illustrates, which is what the fixture header
    /// declares.
    pub fn environment(self) -> EnvironmentId {
        let (e, o) = match self {
            FixtureId::Example1Env01 => (0, 1),
            FixtureId::Example2Env02 => (0, 2),
            FixtureId::Example3Env10 => (1, 0),
            FixtureId::Example4Env20 => (2, 0),
        };
        EnvironmentId::new(e, o).expect("fixture coordinates are in range")
    }
}

impl fmt::Display for FixtureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let env = self.environment();
        write!(f, "{},{}", env.elasticity(), env.overbooking())
    }
}

impl FromStr for FixtureId {
    type Err = String;

    /// Parses the environment coordinates of a fixture, e.g. `0,1` or `(2,0)`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let env: EnvironmentId = s.parse().map_err(|e| format!("{e}"))?;
        FixtureId::ALL
            .into_iter()
            .find(|f| f.environment() == env)
            .ok_or_else(|| format!("no fixture for environment {env}; expected one of 0,1 0,2 1,0 2,0"))
    }
}

/// Per-tick columns of one VM as printed in an example table.
struct VmColumns {
    id: VmId,
    t_init: Tick,
    vcpu: &'static [u64],
    vram: &'static [u64],
    ucpu: &'static [u64],
    uram: &'static [u64],
    unet: &'static [u64],
}

impl VmColumns {
    fn samples(&self) -> impl Iterator<Item = VmSample> + '_ {
        let vnet = self.unet[0];
        (0..self.vcpu.len()).map(move |i| VmSample {
            vm: self.id,
            t: self.t_init + i as Tick,
            spec: ResourceSpec::from_units(self.vcpu[i], self.vram[i], vnet),
            util: UtilizationSample::from_units(self.ucpu[i], self.uram[i], self.unet[i]),
        })
    }

    fn descriptor(&self) -> VmDescriptor {
        VmDescriptor::new(
            self.id,
            Quantity::ZERO,
            1,
            self.t_init,
            self.t_init + self.vcpu.len() as Tick,
        )
        .expect("fixture lifetimes are non-empty")
    }
}

const V111: VmId = VmId::new(1, 1, 1);
const V112: VmId = VmId::new(1, 1, 2);
const V121: VmId = VmId::new(1, 2, 1);
const V122: VmId = VmId::new(1, 2, 2);
const V213: VmId = VmId::new(2, 1, 3);
const V223: VmId = VmId::new(2, 2, 3);

fn example1() -> Vec<VmColumns> {
    vec![
        VmColumns {
            id: V111,
            t_init: 0,
            vcpu: &[8, 8, 8, 8],
            vram: &[16, 16, 16, 16],
            ucpu: &[8, 9, 10, 12],
            uram: &[16, 18, 22, 26],
            unet: &[150, 150, 150, 150],
        },
        VmColumns {
            id: V112,
            t_init: 0,
            vcpu: &[5, 5, 5, 5],
            vram: &[12, 12, 12, 12],
            ucpu: &[5, 5, 7, 7],
            uram: &[12, 13, 16, 20],
            unet: &[50, 50, 50, 50],
        },
        VmColumns {
            id: V121,
            t_init: 0,
            vcpu: &[5, 5, 5, 5],
            vram: &[12, 12, 12, 12],
            ucpu: &[5, 4, 4, 5],
            uram: &[12, 10, 10, 9],
            unet: &[50, 50, 50, 50],
        },
        VmColumns {
            id: V122,
            t_init: 0,
            vcpu: &[9, 9, 9, 9],
            vram: &[18, 18, 18, 18],
            ucpu: &[9, 12, 14, 13],
            uram: &[18, 20, 22, 25],
            unet: &[170, 170, 170, 170],
        },
    ]
}

fn example2() -> Vec<VmColumns> {
    vec![
        VmColumns {
            id: V111,
            t_init: 0,
            vcpu: &[8, 8, 8, 8],
            vram: &[16, 16, 16, 16],
            ucpu: &[8, 8, 8, 8],
            uram: &[16, 16, 16, 16],
            unet: &[150, 170, 180, 200],
        },
        VmColumns {
            id: V112,
            t_init: 0,
            vcpu: &[5, 5, 5, 5],
            vram: &[12, 12, 12, 12],
            ucpu: &[5, 5, 5, 5],
            uram: &[12, 12, 12, 12],
            unet: &[50, 60, 40, 0],
        },
        VmColumns {
            id: V121,
            t_init: 0,
            vcpu: &[5, 5, 5, 5],
            vram: &[12, 12, 12, 12],
            ucpu: &[5, 5, 5, 5],
            uram: &[12, 12, 12, 12],
            unet: &[50, 100, 150, 170],
        },
        VmColumns {
            id: V122,
            t_init: 0,
            vcpu: &[9, 9, 9, 9],
            vram: &[18, 18, 18, 18],
            ucpu: &[9, 9, 9, 9],
            uram: &[18, 18, 18, 18],
            unet: &[150, 200, 350, 800],
        },
    ]
}

fn example3() -> Vec<VmColumns> {
    vec![
        VmColumns {
            id: V111,
            t_init: 0,
            vcpu: &[8, 8, 8, 8],
            vram: &[16, 16, 16, 16],
            ucpu: &[8, 8, 8, 8],
            uram: &[16, 16, 16, 16],
            unet: &[150, 150, 150, 150],
        },
        VmColumns {
            id: V112,
            t_init: 0,
            vcpu: &[5, 5, 5, 5],
            vram: &[12, 12, 12, 12],
            ucpu: &[5, 5, 5, 5],
            uram: &[12, 12, 12, 12],
            unet: &[50, 50, 50, 50],
        },
        VmColumns {
            id: V121,
            t_init: 0,
            vcpu: &[5, 5, 5, 5],
            vram: &[12, 12, 12, 12],
            ucpu: &[5, 5, 5, 5],
            uram: &[12, 12, 12, 12],
            unet: &[50, 50, 50, 50],
        },
        VmColumns {
            id: V122,
            t_init: 0,
            vcpu: &[9, 9, 9, 9],
            vram: &[18, 18, 18, 18],
            ucpu: &[9, 9, 9, 9],
            uram: &[18, 18, 18, 18],
            unet: &[170, 170, 170, 170],
        },
        VmColumns {
            id: V213,
            t_init: 2,
            vcpu: &[2, 2, 2],
            vram: &[10, 10, 10],
            ucpu: &[2, 2, 2],
            uram: &[10, 10, 10],
            unet: &[60, 60, 60],
        },
        VmColumns {
            id: V223,
            t_init: 2,
            vcpu: &[8, 8, 8],
            vram: &[20, 20, 20],
            ucpu: &[8, 8, 8],
            uram: &[20, 20, 20],
            unet: &[120, 120, 120],
        },
    ]
}

fn example4() -> Vec<VmColumns> {
    vec![
        VmColumns {
            id: V111,
            t_init: 0,
            vcpu: &[8, 9, 9, 11],
            vram: &[16, 22, 23, 25],
            ucpu: &[8, 8, 8, 8],
            uram: &[16, 16, 16, 16],
            unet: &[150, 150, 150, 150],
        },
        VmColumns {
            id: V112,
            t_init: 0,
            vcpu: &[5, 6, 6, 5],
            vram: &[12, 15, 15, 16],
            ucpu: &[5, 5, 5, 5],
            uram: &[12, 12, 12, 12],
            unet: &[50, 50, 50, 50],
        },
        VmColumns {
            id: V121,
            t_init: 0,
            vcpu: &[5, 6, 6, 7],
            vram: &[12, 18, 18, 20],
            ucpu: &[5, 5, 5, 5],
            uram: &[12, 12, 12, 12],
            unet: &[50, 50, 50, 50],
        },
        VmColumns {
            id: V122,
            t_init: 0,
            vcpu: &[9, 6, 6, 5],
            vram: &[18, 10, 10, 12],
            ucpu: &[9, 9, 9, 9],
            uram: &[18, 18, 18, 18],
            unet: &[170, 170, 170, 170],
        },
    ]
}

/// Builds the canonical trace of one worked example.
pub fn paper_fixture(id: FixtureId) -> Trace {
    let columns = match id {
        FixtureId::Example1Env01 => example1(),
        FixtureId::Example2Env02 => example2(),
        FixtureId::Example3Env10 => example3(),
        FixtureId::Example4Env20 => example4(),
    };
    let header = TraceHeader::new(id.environment(), FIXTURE_HORIZON, FIXTURE_DATACENTERS, 1)
        .expect("fixture header is valid");

    let mut descriptors: Vec<VmDescriptor> = columns.iter().map(VmColumns::descriptor).collect();
    descriptors.sort_by_key(|d| d.id);

    let mut samples: Vec<VmSample> = columns.iter().flat_map(VmColumns::samples).collect();
    samples.sort_by_key(VmSample::sort_key);

    let mut events = Vec::new();
    for service in descriptors.iter().map(|d| d.id.service).collect::<std::collections::BTreeSet<_>>() {
        let own = descriptors.iter().filter(|d| d.id.service == service);
        let start = own.clone().map(|d| d.t_init).min().expect("service has VMs");
        let end = own.map(|d| d.t_end).max().expect("service has VMs");
        events.push(TraceEvent::arrival(start, service));
        events.push(TraceEvent::departure(end, service));
    }
    events.sort_by_key(TraceEvent::sort_key);

    Trace {
        header,
        events,
        samples,
        descriptors,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::EventKind;

    fn at(trace: &Trace, t: Tick, id: VmId) -> &VmSample {
        trace.sample(t, id).unwrap_or_else(|| panic!("no sample {id} at {t}"))
    }

    fn q(v: u64) -> Quantity {
        Quantity::from(v)
    }

    #[test]
    fn example1_cells() {
        let tr = paper_fixture(FixtureId::Example1Env01);
        let s = at(&tr, 3, V111);
        assert_eq!((s.util.cpu, s.util.ram, s.util.net), (q(12), q(26), q(150)));
        assert_eq!((s.spec.cpu, s.spec.ram), (q(8), q(16)));
        assert_eq!(tr.header.environment.to_string(), "(0,1)");
        assert_eq!(tr.header.horizon, 6);
        assert_eq!(tr.header.max_sla, 1);
        assert!(tr.header.seed.is_none() && tr.header.config_digest.is_none());
    }

    #[test]
    fn example2_cells() {
        let tr = paper_fixture(FixtureId::Example2Env02);
        assert_eq!(at(&tr, 3, V122).util.net, q(800));
        assert_eq!(at(&tr, 3, V122).spec.net, q(150));
    }

    #[test]
    fn example3_second_service() {
        let tr = paper_fixture(FixtureId::Example3Env10);
        for id in [V213, V223] {
            let d = tr.descriptor(id).unwrap();
            assert_eq!((d.t_init, d.t_end), (2, 5));
        }
        assert_eq!(at(&tr, 2, V223).spec.net, q(120));
        assert_eq!(at(&tr, 4, V213).spec.net, q(60));
        let kinds: Vec<_> = tr.events.iter().map(|e| (e.t, e.kind, e.service)).collect();
        assert_eq!(
            kinds,
            vec![
                (0, EventKind::ServiceArrival, 1),
                (2, EventKind::ServiceArrival, 2),
                (4, EventKind::ServiceDeparture, 1),
                (5, EventKind::ServiceDeparture, 2),
            ]
        );
    }

    #[test]
    fn example4_cells() {
        let tr = paper_fixture(FixtureId::Example4Env20);
        let s = at(&tr, 1, V111);
        assert_eq!((s.spec.cpu, s.spec.ram), (q(9), q(22)));
        assert_eq!(s.util.cpu, q(8));
    }

    #[test]
    fn fixture_defaults() {
        for id in FixtureId::ALL {
            let tr = paper_fixture(id);
            assert!(tr.descriptors.iter().all(|d| d.revenue == Quantity::ZERO && d.sla == 1));
        }
    }

    #[test]
    fn fixture_ids_parse_from_coordinates() {
        assert_eq!("0,1".parse::<FixtureId>().unwrap(), FixtureId::Example1Env01);
        assert_eq!("(2,0)".parse::<FixtureId>().unwrap(), FixtureId::Example4Env20);
        assert!("3,3".parse::<FixtureId>().is_err());
        for id in FixtureId::ALL {
            assert_eq!(id.to_string().parse::<FixtureId>().unwrap(), id);
        }
    }
}
