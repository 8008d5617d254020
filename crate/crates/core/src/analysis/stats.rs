use std::collections::BTreeMap;

use serde::Serialize;

use crate::model::{Tick, Trace};
use crate::quantity::Quantity;

pub const DEFAULT_PRECISION: u32 = 4;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Totals {
    pub cpu: Quantity,
    pub ram: Quantity,
    pub net: Quantity,
}

impl std::ops::Add for Totals {
    type Output = Totals;

    fn add(self, rhs: Totals) -> Totals {
        Totals {
            cpu: self.cpu + rhs.cpu,
            ram: self.ram + rhs.ram,
            net: self.net + rhs.net,
        }
    }
}

/// utilized / requested per resource; absent where nothing is requested.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Ratios {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cpu: Option<Quantity>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ram: Option<Quantity>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub net: Option<Quantity>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DcTickStats {
    pub dc: u32,
    pub t: Tick,
    pub vm_count: usize,
    pub requested: Totals,
    pub utilized: Totals,
    pub ratio: Ratios,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StatsSeries {
    pub horizon: Tick,
    pub num_datacenters: u32,
    pub precision: u32,
    /// One point per (dc, t), ordered by dc then t.
    pub points: Vec<DcTickStats>,
}

impl StatsSeries {
    pub fn point(&self, dc: u32, t: Tick) -> Option<&DcTickStats> {
        if dc == 0 || dc > self.num_datacenters || t >= self.horizon {
            return None;
        }
        self.points
            .get((dc as usize - 1) * self.horizon as usize + t as usize)
    }

    /// Whole-trace (requested, utilized, vm_count) at `t`.
    pub fn tick_totals(&self, t: Tick) -> (Totals, Totals, usize) {
        self.points
            .iter()
            .filter(|p| p.t == t)
            .fold((Totals::default(), Totals::default(), 0), |acc, p| {
                (acc.0 + p.requested, acc.1 + p.utilized, acc.2 + p.vm_count)
            })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("stats serialize");
        s.push('\n');
        s
    }

    pub fn render_table(&self) -> String {
        let header = [
            "dc", "t", "vms", "req_cpu", "req_ram", "req_net", "use_cpu", "use_ram", "use_net",
            "r_cpu", "r_ram", "r_net",
        ];
        let opt = |q: Option<Quantity>| q.map_or_else(|| "-".to_string(), |q| q.to_string());
        let rows: Vec<Vec<String>> = self
            .points
            .iter()
            .map(|p| {
                vec![
                    p.dc.to_string(),
                    p.t.to_string(),
                    p.vm_count.to_string(),
                    p.requested.cpu.to_string(),
                    p.requested.ram.to_string(),
                    p.requested.net.to_string(),
                    p.utilized.cpu.to_string(),
                    p.utilized.ram.to_string(),
                    p.utilized.net.to_string(),
                    opt(p.ratio.cpu),
                    opt(p.ratio.ram),
                    opt(p.ratio.net),
                ]
            })
            .collect();
        let widths: Vec<usize> = (0..header.len())
            .map(|i| rows.iter().map(|r| r[i].len()).chain([header[i].len()]).max().unwrap())
            .collect();
        let line = |cells: &mut dyn Iterator<Item = &str>| {
            let mut s = cells
                .zip(&widths)
                .map(|(c, w)| format!("{c:>w$}"))
                .collect::<Vec<_>>()
                .join("  ");
            s.push('\n');
            s
        };
        let mut out = line(&mut header.iter().copied());
        for r in &rows {
            out.push_str(&line(&mut r.iter().map(String::as_str)));
        }
        out
    }
}

pub fn stats(trace: &Trace) -> StatsSeries {
    stats_with_precision(trace, DEFAULT_PRECISION)
}

/// Per-(dc, t) sums over every sample; ratios rounded half-even to `precision` places.
pub fn stats_with_precision(trace: &Trace, precision: u32) -> StatsSeries {
    let h = &trace.header;
    let mut acc: BTreeMap<(u32, Tick), (usize, Totals, Totals)> = BTreeMap::new();
    for s in &trace.samples {
        let e = acc.entry((s.vm.dc, s.t)).or_default();
        e.0 += 1;
        e.1 = e.1 + Totals { cpu: s.spec.cpu, ram: s.spec.ram, net: s.spec.net };
        e.2 = e.2 + Totals { cpu: s.util.cpu, ram: s.util.ram, net: s.util.net };
    }
    let mut points = Vec::with_capacity(h.num_datacenters as usize * h.horizon as usize);
    for dc in 1..=h.num_datacenters {
        for t in 0..h.horizon {
            let (vm_count, requested, utilized) = acc.get(&(dc, t)).copied().unwrap_or_default();
            let ratio = Ratios {
                cpu: utilized.cpu.ratio(requested.cpu, precision),
                ram: utilized.ram.ratio(requested.ram, precision),
                net: utilized.net.ratio(requested.net, precision),
            };
            points.push(DcTickStats { dc, t, vm_count, requested, utilized, ratio });
        }
    }
    StatsSeries {
        horizon: h.horizon,
        num_datacenters: h.num_datacenters,
        precision,
        points,
    }
}
