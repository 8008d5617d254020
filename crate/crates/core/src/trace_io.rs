//! Line-oriented JSON trace documents (`.vmpt.jsonl`).
//!
//! A document is UTF-8 text with one compact JSON object per LF-terminated
//! line. The first line is the header; event lines follow in canonical
//! order, then sample lines in canonical order. Every line carries a
//! `"type"` of `"header"`, `"event"`, or `"sample"`:
//!
//! ```text
//! {"type":"header","format_version":1,"environment":"(0,1)","horizon":6,"num_datacenters":2,"max_sla":1}
//! {"type":"event","t":0,"kind":"service_arrival","service":1}
//! {"type":"event","t":3,"kind":"vm_scale_out","service":1,"dc":2,"vm":4}
//! {"type":"sample","t":0,"service":1,"dc":1,"vm":1,"t_init":0,"t_end":4,"revenue":0,"sla":1,"vcpu":8,"vram":16,"vnet":150,"ucpu":8,"uram":16,"unet":150}
//! ```
//!
//! Header fields `seed` and `config_digest` are omitted for hand-built
//! traces. Sample lines repeat their VM's descriptor fields; readers rebuild
//! descriptors from them and reject inconsistent copies. Quantities are
//! written as shortest exact decimals.

use std::collections::{BTreeMap, HashSet};
use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::environments::EnvironmentId;
use crate::model::{
    EventKind, ResourceSpec, Tick, Trace, TraceEvent, TraceHeader, UtilizationSample,
    VmDescriptor, VmId, VmSample, FORMAT_VERSION,
};
use crate::quantity::Quantity;

/// Conventional file extension.
pub const FILE_EXTENSION: &str = ".vmpt.jsonl";

/// Column order of the CSV export.
pub const CSV_COLUMNS: [&str; 12] = [
    "t", "service", "dc", "vm", "vcpu", "vram", "vnet", "ucpu", "uram", "unet", "revenue", "sla",
];

#[derive(Debug, Error)]
pub enum WriteError {
    #[error("write failed at byte {offset}: {source}")]
    Io {
        offset: u64,
        #[source]
        source: io::Error,
    },
    #[error("sample at t={t} references unknown VM {vm}")]
    UnknownVm { vm: VmId, t: Tick },
}

#[derive(Debug, Error)]
pub enum ReadError {
    #[error("line {line}: read failed: {source}")]
    Io {
        line: usize,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: parse error: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: format error: {message}")]
    Format { line: usize, message: String },
    #[error("line {line}: integrity error: {message}")]
    Integrity { line: usize, message: String },
    #[error("unsupported format_version {found} (this reader handles {FORMAT_VERSION})")]
    UnsupportedVersion { found: u64 },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum Line {
    Header(HeaderRecord),
    Event(EventRecord),
    Sample(SampleRecord),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HeaderRecord {
    format_version: u64,
    environment: EnvironmentId,
    horizon: Tick,
    num_datacenters: u32,
    max_sla: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    config_digest: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EventRecord {
    t: Tick,
    kind: EventKind,
    service: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dc: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    vm: Option<u32>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SampleRecord {
    t: Tick,
    service: u32,
    dc: u32,
    vm: u32,
    t_init: Tick,
    t_end: Tick,
    revenue: Quantity,
    sla: u32,
    vcpu: Quantity,
    vram: Quantity,
    vnet: Quantity,
    ucpu: Quantity,
    uram: Quantity,
    unet: Quantity,
}

impl From<&TraceHeader> for HeaderRecord {
    fn from(h: &TraceHeader) -> Self {
        Self {
            format_version: h.format_version as u64,
            environment: h.environment,
            horizon: h.horizon,
            num_datacenters: h.num_datacenters,
            max_sla: h.max_sla,
            seed: h.seed,
            config_digest: h.config_digest.clone(),
        }
    }
}

impl From<&TraceEvent> for EventRecord {
    fn from(e: &TraceEvent) -> Self {
        Self {
            t: e.t,
            kind: e.kind,
            service: e.service,
            dc: e.target.map(|(dc, _)| dc),
            vm: e.target.map(|(_, vm)| vm),
        }
    }
}

fn sample_record(s: &VmSample, d: &VmDescriptor) -> SampleRecord {
    SampleRecord {
        t: s.t,
        service: s.vm.service,
        dc: s.vm.dc,
        vm: s.vm.vm,
        t_init: d.t_init,
        t_end: d.t_end,
        revenue: d.revenue,
        sla: d.sla,
        vcpu: s.spec.cpu,
        vram: s.spec.ram,
        vnet: s.spec.net,
        ucpu: s.util.cpu,
        uram: s.util.ram,
        unet: s.util.net,
    }
}

/// Sorts events, samples, and descriptors into canonical order. Sorting is
/// stable, so records with equal keys keep their relative order.
pub fn canonicalize(mut trace: Trace) -> Trace {
    trace.events.sort_by_key(TraceEvent::sort_key);
    trace.samples.sort_by_key(VmSample::sort_key);
    trace.descriptors.sort_by_key(|d| d.id);
    trace
}

struct CountingWriter<W> {
    inner: W,
    written: u64,
}

impl<W: Write> CountingWriter<W> {
    fn line(&mut self, value: &impl Serialize) -> Result<(), WriteError> {
        let mut buf = serde_json::to_vec(value).expect("trace records always serialize");
        buf.push(b'\n');
        self.inner.write_all(&buf).map_err(|source| WriteError::Io {
            offset: self.written,
            source,
        })?;
        self.written += buf.len() as u64;
        Ok(())
    }
}

/// Writes the canonical document for `trace` and returns its length in
/// bytes. The same trace always produces the same bytes.
pub fn write_trace<W: Write>(trace: &Trace, sink: W) -> Result<u64, WriteError> {
    let descriptors: BTreeMap<VmId, &VmDescriptor> =
        trace.descriptors.iter().map(|d| (d.id, d)).collect();
    let mut events: Vec<&TraceEvent> = trace.events.iter().collect();
    events.sort_by_key(|e| e.sort_key());
    let mut samples: Vec<&VmSample> = trace.samples.iter().collect();
    samples.sort_by_key(|s| s.sort_key());

    let mut out = CountingWriter {
        inner: sink,
        written: 0,
    };
    out.line(&Line::Header(HeaderRecord::from(&trace.header)))?;
    for e in events {
        out.line(&Line::Event(EventRecord::from(e)))?;
    }
    for s in samples {
        let d = descriptors
            .get(&s.vm)
            .ok_or(WriteError::UnknownVm { vm: s.vm, t: s.t })?;
        out.line(&Line::Sample(sample_record(s, d)))?;
    }
    out.inner.flush().map_err(|source| WriteError::Io {
        offset: out.written,
        source,
    })?;
    Ok(out.written)
}

/// Serializes to an in-memory document.
pub fn to_bytes(trace: &Trace) -> Result<Vec<u8>, WriteError> {
    let mut buf = Vec::new();
    write_trace(trace, &mut buf)?;
    Ok(buf)
}

fn format_err(line: usize, message: impl Into<String>) -> ReadError {
    ReadError::Format {
        line,
        message: message.into(),
    }
}

fn integrity_err(line: usize, message: impl Into<String>) -> ReadError {
    ReadError::Integrity {
        line,
        message: message.into(),
    }
}

fn parse_line(line_no: usize, text: &str) -> Result<Line, ReadError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| ReadError::Parse {
        line: line_no,
        message: e.to_string(),
    })?;
    let kind = value
        .get("type")
        .ok_or_else(|| format_err(line_no, "missing \"type\""))?;
    match kind.as_str() {
        Some("header" | "event" | "sample") => {}
        Some(other) => return Err(format_err(line_no, format!("unknown type {other:?}"))),
        None => return Err(format_err(line_no, "\"type\" is not a string")),
    }
    serde_json::from_value(value).map_err(|e| ReadError::Parse {
        line: line_no,
        message: e.to_string(),
    })
}

fn header_from(line_no: usize, h: HeaderRecord) -> Result<TraceHeader, ReadError> {
    if h.format_version != FORMAT_VERSION as u64 {
        return Err(ReadError::UnsupportedVersion {
            found: h.format_version,
        });
    }
    let header = TraceHeader {
        environment: h.environment,
        horizon: h.horizon,
        num_datacenters: h.num_datacenters,
        max_sla: h.max_sla,
        seed: h.seed,
        config_digest: h.config_digest,
        format_version: FORMAT_VERSION,
    };
    header
        .check()
        .map_err(|e| format_err(line_no, e.to_string()))?;
    Ok(header)
}

fn event_from(line_no: usize, e: EventRecord) -> Result<TraceEvent, ReadError> {
    let target = match (e.kind.is_scale(), e.dc, e.vm) {
        (true, Some(dc), Some(vm)) => Some((dc, vm)),
        (false, None, None) => None,
        (true, _, _) => return Err(format_err(line_no, "scale event needs \"dc\" and \"vm\"")),
        (false, _, _) => {
            return Err(format_err(
                line_no,
                "service event must not carry \"dc\" or \"vm\"",
            ))
        }
    };
    Ok(TraceEvent {
        t: e.t,
        kind: e.kind,
        service: e.service,
        target,
    })
}

/// Parses a document. Event and sample lines may come in any order; the
/// result is canonical. Descriptors are rebuilt from sample lines.
pub fn read_trace<R: BufRead>(source: R) -> Result<Trace, ReadError> {
    let mut header: Option<TraceHeader> = None;
    let mut events = Vec::new();
    let mut samples = Vec::new();
    let mut descriptors: BTreeMap<VmId, VmDescriptor> = BTreeMap::new();
    let mut seen: HashSet<(Tick, VmId)> = HashSet::new();

    for (idx, line) in source.lines().enumerate() {
        let line_no = idx + 1;
        let text = line.map_err(|source| ReadError::Io {
            line: line_no,
            source,
        })?;
        if text.trim().is_empty() {
            continue;
        }
        match parse_line(line_no, &text)? {
            Line::Header(h) => {
                if header.is_some() {
                    return Err(format_err(line_no, "second header line"));
                }
                if !events.is_empty() || !samples.is_empty() {
                    return Err(format_err(line_no, "header must be the first line"));
                }
                header = Some(header_from(line_no, h)?);
            }
            Line::Event(e) => {
                if header.is_none() {
                    return Err(format_err(line_no, "missing header"));
                }
                events.push(event_from(line_no, e)?);
            }
            Line::Sample(s) => {
                if header.is_none() {
                    return Err(format_err(line_no, "missing header"));
                }
                let id = VmId::new(s.service, s.dc, s.vm);
                if !seen.insert((s.t, id)) {
                    return Err(integrity_err(
                        line_no,
                        format!("duplicate sample for {id} at t={}", s.t),
                    ));
                }
                let descriptor = VmDescriptor::new(id, s.revenue, s.sla, s.t_init, s.t_end)
                    .map_err(|e| integrity_err(line_no, e.to_string()))?;
                if !descriptor.is_alive(s.t) {
                    return Err(integrity_err(
                        line_no,
                        format!(
                            "sample for {id} at t={} outside lifetime [{}, {})",
                            s.t, s.t_init, s.t_end
                        ),
                    ));
                }
                match descriptors.get(&id) {
                    Some(existing) if *existing != descriptor => {
                        return Err(integrity_err(
                            line_no,
                            format!("descriptor fields of {id} disagree with an earlier sample"),
                        ));
                    }
                    Some(_) => {}
                    None => {
                        descriptors.insert(id, descriptor);
                    }
                }
                let spec = ResourceSpec::new(s.vcpu, s.vram, s.vnet)
                    .map_err(|e| integrity_err(line_no, e.to_string()))?;
                let util = UtilizationSample::new(s.ucpu, s.uram, s.unet)
                    .map_err(|e| integrity_err(line_no, e.to_string()))?;
                samples.push(VmSample {
                    vm: id,
                    t: s.t,
                    spec,
                    util,
                });
            }
        }
    }

    let header = header.ok_or_else(|| format_err(0, "missing header"))?;
    Ok(canonicalize(Trace {
        header,
        events,
        samples,
        descriptors: descriptors.into_values().collect(),
    }))
}

/// Parses an in-memory document.
pub fn from_bytes(bytes: &[u8]) -> Result<Trace, ReadError> {
    read_trace(bytes)
}

/// Writes one CSV row per sample with the columns in [`CSV_COLUMNS`].
/// Events and header fields are dropped, so the export cannot be read back.
pub fn write_csv<W: Write>(trace: &Trace, sink: W) -> Result<(), WriteError> {
    let descriptors: BTreeMap<VmId, &VmDescriptor> =
        trace.descriptors.iter().map(|d| (d.id, d)).collect();
    let mut samples: Vec<&VmSample> = trace.samples.iter().collect();
    samples.sort_by_key(|s| s.sort_key());

    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(sink);
    let io_err = |e: csv::Error| WriteError::Io {
        offset: e.position().map(|p| p.byte()).unwrap_or(0),
        source: io::Error::other(e.to_string()),
    };
    w.write_record(CSV_COLUMNS).map_err(io_err)?;
    for s in samples {
        let d = descriptors
            .get(&s.vm)
            .ok_or(WriteError::UnknownVm { vm: s.vm, t: s.t })?;
        w.write_record([
            s.t.to_string(),
            s.vm.service.to_string(),
            s.vm.dc.to_string(),
            s.vm.vm.to_string(),
            s.spec.cpu.to_string(),
            s.spec.ram.to_string(),
            s.spec.net.to_string(),
            s.util.cpu.to_string(),
            s.util.ram.to_string(),
            s.util.net.to_string(),
            d.revenue.to_string(),
            d.sla.to_string(),
        ])
        .map_err(io_err)?;
    }
    w.flush().map_err(|source| WriteError::Io { offset: 0, source })?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::{paper_fixture, FixtureId};

    fn doc(trace: &Trace) -> String {
        String::from_utf8(to_bytes(trace).unwrap()).unwrap()
    }

    #[test]
    fn fixture_sample_line() {
        let text = doc(&paper_fixture(FixtureId::Example1Env01));
        let line = text
            .lines()
            .find(|l| l.contains(r#""t":3,"service":1,"dc":1,"vm":1,"#))
            .unwrap();
        assert!(line.contains(r#""ucpu":12"#), "{line}");
        assert!(text.ends_with('\n'));
        assert!(!text.contains('\r'));
        assert!(text.lines().all(|l| !l.ends_with(' ')));
        assert!(text.lines().next().unwrap().starts_with(r#"{"type":"header","format_version":1,"environment":"(0,1)""#));
    }

    #[test]
    fn header_only_document() {
        let header = TraceHeader::new(EnvironmentId::STATIC, 1, 1, 1).unwrap();
        let trace = Trace::empty(header);
        let text = doc(&trace);
        assert_eq!(text.lines().count(), 1);
        assert_eq!(write_trace(&trace, Vec::new()).unwrap(), text.len() as u64);
        assert_eq!(from_bytes(text.as_bytes()).unwrap(), trace);
    }

    #[test]
    fn fixture_round_trip_and_fixed_point() {
        for id in FixtureId::ALL {
            let fx = paper_fixture(id);
            let bytes = to_bytes(&fx).unwrap();
            let back = from_bytes(&bytes).unwrap();
            assert_eq!(back, fx);
            assert_eq!(to_bytes(&back).unwrap(), bytes);
        }
    }

    #[test]
    fn any_line_order_is_accepted() {
        let fx = paper_fixture(FixtureId::Example3Env10);
        let text = doc(&fx);
        let mut lines: Vec<&str> = text.lines().collect();
        lines[1..].reverse();
        let shuffled = lines.join("\n");
        assert_eq!(from_bytes(shuffled.as_bytes()).unwrap(), fx);
    }

    #[test]
    fn two_headers_rejected() {
        let fx = paper_fixture(FixtureId::Example1Env01);
        let text = doc(&fx);
        let header = text.lines().next().unwrap();
        let twice = format!("{header}\n{text}");
        assert!(matches!(
            from_bytes(twice.as_bytes()),
            Err(ReadError::Format { line: 2, .. })
        ));
    }

    #[test]
    fn missing_header_rejected() {
        let fx = paper_fixture(FixtureId::Example1Env01);
        let text = doc(&fx);
        let body: String = text.lines().skip(1).map(|l| format!("{l}\n")).collect();
        assert!(matches!(from_bytes(body.as_bytes()), Err(ReadError::Format { .. })));
        assert!(matches!(from_bytes(b""), Err(ReadError::Format { .. })));
    }

    #[test]
    fn sample_past_lifetime_rejected() {
        let fx = paper_fixture(FixtureId::Example1Env01);
        let text = doc(&fx).replace(
            r#"{"type":"sample","t":3,"service":1,"dc":1,"vm":1,"t_init":0,"t_end":4"#,
            r#"{"type":"sample","t":4,"service":1,"dc":1,"vm":1,"t_init":0,"t_end":4"#,
        );
        assert!(matches!(
            from_bytes(text.as_bytes()),
            Err(ReadError::Integrity { .. })
        ));
    }

    #[test]
    fn duplicate_sample_rejected() {
        let fx = paper_fixture(FixtureId::Example1Env01);
        let text = doc(&fx);
        let last = text.lines().last().unwrap();
        let dup = format!("{text}{last}\n");
        let err = from_bytes(dup.as_bytes()).unwrap_err();
        assert!(matches!(err, ReadError::Integrity { .. }), "{err}");
    }

    #[test]
    fn bad_lines_carry_line_numbers() {
        let fx = paper_fixture(FixtureId::Example1Env01);
        let mut text = doc(&fx);
        text.push_str("{not json\n");
        let n = text.lines().count();
        match from_bytes(text.as_bytes()) {
            Err(ReadError::Parse { line, .. }) => assert_eq!(line, n),
            other => panic!("expected parse error, got {other:?}"),
        }
        let unknown = format!("{}{{\"type\":\"vm\",\"t\":0}}\n", doc(&fx));
        assert!(matches!(
            from_bytes(unknown.as_bytes()),
            Err(ReadError::Format { .. })
        ));
    }

    #[test]
    fn future_versions_rejected() {
        let text = doc(&paper_fixture(FixtureId::Example2Env02))
            .replacen(r#""format_version":1"#, r#""format_version":2"#, 1);
        assert!(matches!(
            from_bytes(text.as_bytes()),
            Err(ReadError::UnsupportedVersion { found: 2 })
        ));
    }

    #[test]
    fn canonicalize_sorts() {
        let fx = paper_fixture(FixtureId::Example3Env10);
        assert_eq!(canonicalize(fx.clone()), fx);
        let mut scrambled = fx.clone();
        scrambled.samples.reverse();
        scrambled.events.reverse();
        assert_eq!(canonicalize(scrambled), fx);

        let mut same_tick = Trace::empty(fx.header.clone());
        same_tick.events = vec![
            TraceEvent::scale_in(2, VmId::new(1, 1, 1)),
            TraceEvent::scale_out(2, VmId::new(1, 1, 2)),
            TraceEvent::departure(2, 1),
            TraceEvent::arrival(2, 2),
        ];
        let kinds: Vec<_> = canonicalize(same_tick).events.iter().map(|e| e.kind).collect();
        assert_eq!(
            kinds,
            vec![
                EventKind::ServiceArrival,
                EventKind::ServiceDeparture,
                EventKind::VmScaleOut,
                EventKind::VmScaleIn
            ]
        );
    }

    #[test]
    fn csv_export() {
        let mut out = Vec::new();
        write_csv(&paper_fixture(FixtureId::Example1Env01), &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "t,service,dc,vm,vcpu,vram,vnet,ucpu,uram,unet,revenue,sla"
        );
        assert_eq!(lines.next().unwrap(), "0,1,1,1,8,16,150,8,16,150,0,1");
        assert_eq!(text.lines().count(), 1 + 16);
    }

    struct FailAfter(usize);

    impl Write for FailAfter {
        fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
            if self.0 < buf.len() {
                return Err(io::Error::other("disk full"));
            }
            self.0 -= buf.len();
            Ok(buf.len())
        }

        fn flush(&mut self) -> io::Result<()> {
            Ok(())
        }
    }

    #[test]
    fn sink_failure_reports_offset() {
        let fx = paper_fixture(FixtureId::Example1Env01);
        let header_len = doc(&fx).lines().next().unwrap().len() as u64 + 1;
        match write_trace(&fx, FailAfter(header_len as usize + 5)) {
            Err(WriteError::Io { offset, .. }) => assert_eq!(offset, header_len),
            other => panic!("expected io error, got {other:?}"),
        }
    }
}
