//! CSV ingestion and serialization for sensor readings.
//!
//! The on-disk schema is fixed:
//!
//! ```text
//! num_satellites,snr_db,rss_dbm,entrance,distance_m,note
//! ```
//!
//! The `note` column is optional on input. `entrance` is `Yes`/`No`
//! (case-insensitive on input). Input accepts LF and CRLF line endings;
//! output uses LF. Numbers are written with the shortest representation
//! that parses back to the same value, so `parse_csv(write_csv(x)) == x`
//! field for field.

use crate::error::{Error, Result};
use crate::reading::{SensorReading, Violation};

/// Required column order.
pub const CSV_COLUMNS: [&str; 6] = [
    "num_satellites",
    "snr_db",
    "rss_dbm",
    "entrance",
    "distance_m",
    "note",
];

fn row_err(line: u64, column: &'static str, reason: impl Into<String>) -> Error {
    Error::RowParse {
        line,
        column,
        reason: reason.into(),
    }
}

fn parse_f64(text: &str, line: u64, column: &'static str) -> Result<f64> {
    text.parse::<f64>()
        .map_err(|_| row_err(line, column, format!("not a number: `{text}`")))
}

/// Parses a CSV document into validated readings, preserving row order.
pub fn parse_csv(text: &str) -> Result<Vec<SensorReading>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(text.as_bytes());

    let headers = reader
        .headers()
        .map_err(|e| Error::MalformedHeader {
            found: e.to_string(),
        })?
        .clone();
    let fields: Vec<&str> = headers.iter().collect();
    let has_note = match fields.len() {
        6 if fields == CSV_COLUMNS => true,
        5 if fields == CSV_COLUMNS[..5] => false,
        _ => {
            return Err(Error::MalformedHeader {
                found: fields.join(","),
            })
        }
    };

    let mut readings = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e
                .position()
                .map(|p| p.line())
                .unwrap_or(readings.len() as u64 + 2);
            row_err(line, "row", e.to_string())
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);

        let sats_text = &record[0];
        let sats: i64 = sats_text
            .parse()
            .map_err(|_| row_err(line, "num_satellites", format!("not an integer: `{sats_text}`")))?;
        if sats < 0 || sats > u32::MAX as i64 {
            return Err(Error::RangeViolation {
                line,
                field: "num_satellites",
                value: sats as f64,
            });
        }

        let snr = parse_f64(&record[1], line, "snr_db")?;
        let rss = parse_f64(&record[2], line, "rss_dbm")?;

        let entrance_text = &record[3];
        let entrance = if entrance_text.eq_ignore_ascii_case("yes") {
            true
        } else if entrance_text.eq_ignore_ascii_case("no") {
            false
        } else {
            return Err(row_err(
                line,
                "entrance",
                format!("expected Yes or No, got `{entrance_text}`"),
            ));
        };

        let distance = parse_f64(&record[4], line, "distance_m")?;
        let note = if has_note {
            let text = &record[5];
            if text.is_empty() {
                None
            } else {
                Some(text.to_string())
            }
        } else {
            None
        };

        let reading = SensorReading::new(sats as u32, snr, rss, entrance, distance, note)
            .map_err(|violation| match violation {
                Violation::Range { field, value } => Error::RangeViolation { line, field, value },
                Violation::InconsistentNote { note, entrance } => row_err(
                    line,
                    "note",
                    format!(
                        "note `{note}` is inconsistent with entrance={}",
                        if entrance { "Yes" } else { "No" }
                    ),
                ),
            })?;
        readings.push(reading);
    }
    Ok(readings)
}

/// Serializes readings to the canonical CSV document.
pub fn write_csv(readings: &[SensorReading]) -> String {
    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    writer.write_record(CSV_COLUMNS).expect("in-memory write");
    for r in readings {
        writer
            .write_record([
                r.num_satellites.to_string(),
                r.snr_db.to_string(),
                r.rss_dbm.to_string(),
                if r.entrance { "Yes" } else { "No" }.to_string(),
                r.distance_m.to_string(),
                r.note.clone().unwrap_or_default(),
            ])
            .expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("utf8 csv")
}
