//! CSV form of a diagnostic specification.
//!
//! ```text
//! #@subsystem EBS
//! #@source supplier export 2016-09-01
//! monitor_id,description,...,detection_phase
//! EBS-PCM00-FL,...
//! #@dtc_section
//! dtc_code,description,snapshot_fields
//! C1000,Pressure control module fault,vehicle_speed;supply_voltage
//! ```
//!
//! Lines starting with `#` are comments. `#@subsystem` is required, `#@source`
//! and the trailing DTC section are optional. Optional monitor columns may be
//! left out of the header; the remaining ones keep their canonical order.

use std::collections::{BTreeMap, HashSet};
use std::str::FromStr;

use super::{
    DetectionPhase, DiagnosticSpec, Dtc, FailureOrigin, LocationTag, Monitor, WarningLamp,
};

pub const SPEC_HEADER: [&str; 14] = [
    "monitor_id",
    "description",
    "trigger_condition",
    "healing_condition",
    "system_reaction",
    "dtc_codes",
    "lamp",
    "affected_functions",
    "part_id",
    "location",
    "failure_origin",
    "trailer_related",
    "affects_tractor",
    "detection_phase",
];

const REQUIRED_COLUMNS: [&str; 7] = [
    "monitor_id",
    "description",
    "trigger_condition",
    "healing_condition",
    "system_reaction",
    "dtc_codes",
    "affected_functions",
];

const DTC_HEADER: [&str; 3] = ["dtc_code", "description", "snapshot_fields"];

const DIRECTIVE_SUBSYSTEM: &str = "#@subsystem";
const DIRECTIVE_SOURCE: &str = "#@source";
const DIRECTIVE_DTC_SECTION: &str = "#@dtc_section";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SpecError {
    #[error("line {line}: malformed row: {reason}")]
    MalformedRow { line: u64, reason: String },
    #[error("line {line}: duplicate monitor id `{id}`")]
    DuplicateMonitorId { id: String, line: u64 },
    #[error("line {line}: unknown lamp value `{value}`")]
    UnknownLampValue { line: u64, value: String },
    #[error("line {line}: invalid location `{value}`")]
    InvalidLocation { line: u64, value: String },
    #[error("missing `#@subsystem <id>` directive")]
    MissingSubsystem,
}

fn malformed(line: u64, reason: impl Into<String>) -> SpecError {
    SpecError::MalformedRow {
        line,
        reason: reason.into(),
    }
}

/// Parses a diagnostic specification from its CSV form.
pub fn parse_spec(text: &str) -> Result<DiagnosticSpec, SpecError> {
    let mut subsystem_id = None;
    let mut source_meta = String::new();
    let mut dtc_section_start = None;

    let mut offset = 0usize;
    for (idx, raw_line) in text.split_inclusive('\n').enumerate() {
        let line = raw_line.trim_end_matches(['\n', '\r']);
        let line_no = idx as u64 + 1;
        if let Some(rest) = directive_arg(line, DIRECTIVE_SUBSYSTEM) {
            if rest.is_empty() {
                return Err(malformed(line_no, "empty subsystem id"));
            }
            subsystem_id = Some(rest.to_owned());
        } else if let Some(rest) = directive_arg(line, DIRECTIVE_SOURCE) {
            source_meta = rest.to_owned();
        } else if line.trim() == DIRECTIVE_DTC_SECTION {
            dtc_section_start = Some((offset, line_no));
            break;
        }
        offset += raw_line.len();
    }

    let subsystem_id = subsystem_id.ok_or(SpecError::MissingSubsystem)?;
    let (monitor_text, dtc_part) = match dtc_section_start {
        Some((at, line_no)) => (&text[..at], Some((&text[at..], line_no - 1))),
        None => (text, None),
    };

    let monitors = parse_monitor_rows(monitor_text)?;

    let mut dtcs: BTreeMap<String, Dtc> = BTreeMap::new();
    if let Some((section, line_offset)) = dtc_part {
        for dtc in parse_dtc_rows(section, line_offset)? {
            dtcs.insert(dtc.code.clone(), dtc);
        }
    }
    for m in &monitors {
        for code in &m.dtc_codes {
            dtcs.entry(code.clone()).or_insert_with(|| Dtc {
                code: code.clone(),
                description: String::new(),
                snapshot_fields: Vec::new(),
            });
        }
    }

    Ok(DiagnosticSpec {
        subsystem_id,
        monitors,
        dtcs: dtcs.into_values().collect(),
        source_meta,
    })
}

fn directive_arg<'a>(line: &'a str, directive: &str) -> Option<&'a str> {
    let rest = line.strip_prefix(directive)?;
    if rest.is_empty() || rest.starts_with([' ', '\t']) {
        Some(rest.trim())
    } else {
        None
    }
}

fn csv_reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .flexible(true)
        .from_reader(text.as_bytes())
}

fn record_line(record: &csv::StringRecord, line_offset: u64) -> u64 {
    record.position().map_or(0, |p| p.line()) + line_offset
}

/// Line of the first non-comment, non-blank row. The csv reader reports the
/// first record at the start of any comments preceding it.
fn first_data_line(text: &str, line_offset: u64) -> u64 {
    let idx = text
        .lines()
        .position(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .unwrap_or(0);
    idx as u64 + 1 + line_offset
}

fn csv_error(err: csv::Error, line_offset: u64) -> SpecError {
    let line = err.position().map_or(0, |p| p.line()) + line_offset;
    malformed(line, err.to_string())
}

/// Column index of each canonical field, `None` when the column is absent.
struct ColumnMap([Option<usize>; 14]);

impl ColumnMap {
    fn from_header(header: &csv::StringRecord, line: u64) -> Result<Self, SpecError> {
        let mut map = [None; 14];
        let mut next_canonical = 0usize;
        for (pos, name) in header.iter().enumerate() {
            let name = name.trim();
            let Some(canon) = SPEC_HEADER.iter().position(|c| *c == name) else {
                return Err(malformed(line, format!("unknown column `{name}`")));
            };
            if canon < next_canonical {
                return Err(malformed(
                    line,
                    format!("column `{name}` duplicated or out of order"),
                ));
            }
            map[canon] = Some(pos);
            next_canonical = canon + 1;
        }
        for required in REQUIRED_COLUMNS {
            let canon = SPEC_HEADER
                .iter()
                .position(|c| *c == required)
                .unwrap_or_default();
            if map[canon].is_none() {
                return Err(malformed(
                    line,
                    format!("missing required column `{required}`"),
                ));
            }
        }
        Ok(Self(map))
    }

    fn width(&self) -> usize {
        self.0.iter().flatten().count()
    }

    fn get<'r>(&self, record: &'r csv::StringRecord, column: &str) -> &'r str {
        let canon = SPEC_HEADER
            .iter()
            .position(|c| *c == column)
            .unwrap_or_default();
        self.0[canon].and_then(|i| record.get(i)).unwrap_or("")
    }
}

fn split_list(s: &str) -> Vec<String> {
    s.split(';')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(str::to_owned)
        .collect()
}

fn parse_bool(s: &str, default: bool, line: u64, column: &str) -> Result<bool, SpecError> {
    match s.trim().to_ascii_lowercase().as_str() {
        "" => Ok(default),
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(malformed(
            line,
            format!("invalid boolean `{other}` in `{column}`"),
        )),
    }
}

fn parse_enum<T: FromStr + Default>(s: &str, line: u64, column: &str) -> Result<T, SpecError> {
    if s.trim().is_empty() {
        return Ok(T::default());
    }
    s.parse()
        .map_err(|_| malformed(line, format!("invalid value `{}` in `{column}`", s.trim())))
}

fn parse_monitor_rows(text: &str) -> Result<Vec<Monitor>, SpecError> {
    let mut reader = csv_reader(text);
    let mut records = reader.records();

    let header = match records.next() {
        Some(rec) => rec.map_err(|e| csv_error(e, 0))?,
        None => return Err(malformed(1, "missing header row")),
    };
    let header_line = first_data_line(text, 0);
    let columns = ColumnMap::from_header(&header, header_line)?;

    let mut seen = HashSet::new();
    let mut monitors = Vec::new();
    for rec in records {
        let rec = rec.map_err(|e| csv_error(e, 0))?;
        let line = record_line(&rec, 0);
        if rec.len() != columns.width() {
            return Err(malformed(
                line,
                format!("expected {} fields, found {}", columns.width(), rec.len()),
            ));
        }
        let monitor = parse_monitor(&columns, &rec, line)?;
        if !seen.insert(monitor.id.clone()) {
            return Err(SpecError::DuplicateMonitorId {
                id: monitor.id,
                line,
            });
        }
        monitors.push(monitor);
    }
    Ok(monitors)
}

fn parse_monitor(
    columns: &ColumnMap,
    rec: &csv::StringRecord,
    line: u64,
) -> Result<Monitor, SpecError> {
    let field = |name: &str| columns.get(rec, name);

    let id = field("monitor_id").trim();
    if id.is_empty() {
        return Err(malformed(line, "empty monitor_id"));
    }

    let lamp_raw = field("lamp");
    let lamp = if lamp_raw.trim().is_empty() {
        WarningLamp::None
    } else {
        lamp_raw.parse().map_err(|_| SpecError::UnknownLampValue {
            line,
            value: lamp_raw.trim().to_owned(),
        })?
    };

    let location_raw = field("location").trim();
    let location = if location_raw.is_empty() {
        None
    } else {
        Some(
            location_raw
                .parse::<LocationTag>()
                .map_err(|_| SpecError::InvalidLocation {
                    line,
                    value: location_raw.to_owned(),
                })?,
        )
    };

    let part_id = Some(field("part_id").trim())
        .filter(|p| !p.is_empty())
        .map(str::to_owned);

    let trailer_related = parse_bool(field("trailer_related"), false, line, "trailer_related")?;
    let affects_tractor = parse_bool(field("affects_tractor"), true, line, "affects_tractor")?;
    if !trailer_related && !affects_tractor {
        return Err(malformed(
            line,
            "affects_tractor may only be false for trailer-related monitors",
        ));
    }

    Ok(Monitor {
        id: id.to_owned(),
        description: field("description").to_owned(),
        trigger_condition: field("trigger_condition").to_owned(),
        healing_condition: field("healing_condition").to_owned(),
        system_reaction: field("system_reaction").to_owned(),
        dtc_codes: split_list(field("dtc_codes")),
        lamp,
        affected_functions: split_list(field("affected_functions")),
        part_id,
        location,
        failure_origin: parse_enum::<FailureOrigin>(
            field("failure_origin"),
            line,
            "failure_origin",
        )?,
        trailer_related,
        affects_tractor,
        detection_phase: parse_enum::<DetectionPhase>(
            field("detection_phase"),
            line,
            "detection_phase",
        )?,
    })
}

fn parse_dtc_rows(text: &str, line_offset: u64) -> Result<Vec<Dtc>, SpecError> {
    let mut reader = csv_reader(text);
    let mut records = reader.records();
    let Some(header) = records.next() else {
        return Ok(Vec::new());
    };
    let header = header.map_err(|e| csv_error(e, line_offset))?;
    let header_line = first_data_line(text, line_offset);
    let names: Vec<&str> = header.iter().map(str::trim).collect();
    if names != DTC_HEADER {
        return Err(malformed(
            header_line,
            format!("dtc section header must be `{}`", DTC_HEADER.join(",")),
        ));
    }

    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for rec in records {
        let rec = rec.map_err(|e| csv_error(e, line_offset))?;
        let line = record_line(&rec, line_offset);
        if rec.len() != DTC_HEADER.len() {
            return Err(malformed(
                line,
                format!("expected 3 fields, found {}", rec.len()),
            ));
        }
        let code = rec[0].trim();
        if code.is_empty() {
            return Err(malformed(line, "empty dtc_code"));
        }
        if !seen.insert(code.to_owned()) {
            return Err(malformed(line, format!("duplicate dtc_code `{code}`")));
        }
        out.push(Dtc {
            code: code.to_owned(),
            description: rec[1].to_owned(),
            snapshot_fields: split_list(&rec[2]),
        });
    }
    Ok(out)
}

/// Writes `spec` back to its CSV form. Reparsing the output yields `spec`.
pub fn write_spec(spec: &DiagnosticSpec) -> String {
    let mut out = String::new();
    out.push_str(&format!("{DIRECTIVE_SUBSYSTEM} {}\n", spec.subsystem_id));
    if !spec.source_meta.is_empty() {
        out.push_str(&format!("{DIRECTIVE_SOURCE} {}\n", spec.source_meta));
    }

    let mut writer = csv::WriterBuilder::new().from_writer(Vec::new());
    let mut write = |fields: &[&str]| {
        // Writing into a Vec cannot fail.
        let _ = writer.write_record(fields);
    };
    write(&SPEC_HEADER);
    for m in &spec.monitors {
        let dtc_codes = m.dtc_codes.join(";");
        let functions = m.affected_functions.join(";");
        write(&[
            &m.id,
            &m.description,
            &m.trigger_condition,
            &m.healing_condition,
            &m.system_reaction,
            &dtc_codes,
            m.lamp.as_str(),
            &functions,
            m.part_id.as_deref().unwrap_or(""),
            m.location.as_ref().map_or("", LocationTag::as_str),
            m.failure_origin.as_str(),
            bool_str(m.trailer_related),
            bool_str(m.affects_tractor),
            m.detection_phase.as_str(),
        ]);
    }
    let _ = writer.flush();
    let bytes = writer.into_inner().unwrap_or_default();
    out.push_str(&String::from_utf8_lossy(&bytes));

    if !spec.dtcs.is_empty() {
        out.push_str(DIRECTIVE_DTC_SECTION);
        out.push('\n');
        let mut writer = csv::WriterBuilder::new().from_writer(Vec::new());
        let _ = writer.write_record(DTC_HEADER);
        for dtc in &spec.dtcs {
            let snapshot = dtc.snapshot_fields.join(";");
            let _ = writer.write_record([&dtc.code, &dtc.description, &snapshot]);
        }
        let _ = writer.flush();
        let bytes = writer.into_inner().unwrap_or_default();
        out.push_str(&String::from_utf8_lossy(&bytes));
    }
    out
}

fn bool_str(b: bool) -> &'static str {
    if b {
        "true"
    } else {
        "false"
    }
}
