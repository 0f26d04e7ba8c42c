//! Sensor readings, labels, and approach-walk traces.
//!
//! A reading bundles the three signals observed while walking toward a
//! building entrance: the number of visible GPS satellites, the mean
//! carrier-to-noise ratio across them, and the Wi-Fi received signal
//! strength. Position along the walk is a signed 1-D distance to the
//! entrance plane: positive outside, zero at the plane, negative inside.

use crate::error::{Error, Result};

/// Physical envelope for Wi-Fi RSS, dBm.
pub const RSS_RANGE_DBM: (f64, f64) = (-120.0, 0.0);
/// Physical envelope for mean GPS SNR, dB.
pub const SNR_RANGE_DB: (f64, f64) = (0.0, 60.0);

/// Where a reading sits relative to the entrance plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Outside,
    Entrance,
    Inside,
}

impl Label {
    /// Labels a signed distance: `Entrance` iff `|d| <= radius`, `Outside`
    /// iff `d > radius`, `Inside` iff `d < -radius`.
    pub fn from_distance(distance_m: f64, radius_m: f64) -> Result<Label> {
        if !(radius_m > 0.0) {
            return Err(Error::NonpositiveRadius { radius: radius_m });
        }
        Ok(if distance_m.abs() <= radius_m {
            Label::Entrance
        } else if distance_m > radius_m {
            Label::Outside
        } else {
            Label::Inside
        })
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Label::Outside => "Outside",
            Label::Entrance => "Entrance",
            Label::Inside => "Inside",
        }
    }

    /// Case-insensitive parse; `None` for anything that is not a label name.
    pub fn parse(text: &str) -> Option<Label> {
        if text.eq_ignore_ascii_case("outside") {
            Some(Label::Outside)
        } else if text.eq_ignore_ascii_case("entrance") {
            Some(Label::Entrance)
        } else if text.eq_ignore_ascii_case("inside") {
            Some(Label::Inside)
        } else {
            None
        }
    }

    pub fn is_entrance(&self) -> bool {
        matches!(self, Label::Entrance)
    }
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A single-field or cross-field violation of the reading envelope.
///
/// Callers with file context (the CSV parser) map these onto errors that
/// carry line numbers.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Range { field: &'static str, value: f64 },
    InconsistentNote { note: String, entrance: bool },
}

/// One sample of an approach walk.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorReading {
    /// Number of visible GPS satellites.
    pub num_satellites: u32,
    /// Mean carrier-to-noise ratio over visible satellites, dB.
    pub snr_db: f64,
    /// Wi-Fi received signal strength, dBm.
    pub rss_dbm: f64,
    /// Supervised target: was this reading taken at the entrance?
    pub entrance: bool,
    /// Signed distance to the entrance plane, meters. Positive = outside.
    pub distance_m: f64,
    /// Optional label text; when it names a [`Label`] it must agree with
    /// the `entrance` flag.
    pub note: Option<String>,
}

impl SensorReading {
    /// Validates the physical envelopes and the note/flag consistency.
    ///
    /// An empty or whitespace-only note is normalized to `None` so that
    /// CSV round-trips are exact.
    pub fn new(
        num_satellites: u32,
        snr_db: f64,
        rss_dbm: f64,
        entrance: bool,
        distance_m: f64,
        note: Option<String>,
    ) -> std::result::Result<Self, Violation> {
        if !snr_db.is_finite() || snr_db < SNR_RANGE_DB.0 || snr_db > SNR_RANGE_DB.1 {
            return Err(Violation::Range {
                field: "snr_db",
                value: snr_db,
            });
        }
        if !rss_dbm.is_finite() || rss_dbm < RSS_RANGE_DBM.0 || rss_dbm > RSS_RANGE_DBM.1 {
            return Err(Violation::Range {
                field: "rss_dbm",
                value: rss_dbm,
            });
        }
        if !distance_m.is_finite() {
            return Err(Violation::Range {
                field: "distance_m",
                value: distance_m,
            });
        }
        let note = note.filter(|n| !n.trim().is_empty());
        if let Some(text) = &note {
            if let Some(label) = Label::parse(text) {
                if label.is_entrance() != entrance {
                    return Err(Violation::InconsistentNote {
                        note: text.clone(),
                        entrance,
                    });
                }
            }
        }
        Ok(SensorReading {
            num_satellites,
            snr_db,
            rss_dbm,
            entrance,
            distance_m,
            note,
        })
    }
}

/// An ordered approach walk: outside, through the entrance, inside.
///
/// Distances are strictly decreasing along the sequence; a walk crosses the
/// entrance plane at most once.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    id: String,
    readings: Vec<SensorReading>,
}

impl Trace {
    pub fn new(id: impl Into<String>, readings: Vec<SensorReading>) -> Result<Trace> {
        if readings.is_empty() {
            return Err(Error::InvalidTrace {
                reason: "trace must contain at least one reading".into(),
            });
        }
        for pair in readings.windows(2) {
            if !(pair[1].distance_m < pair[0].distance_m) {
                return Err(Error::InvalidTrace {
                    reason: format!(
                        "distances must be strictly decreasing, found {} after {}",
                        pair[1].distance_m, pair[0].distance_m
                    ),
                });
            }
        }
        Ok(Trace {
            id: id.into(),
            readings,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn readings(&self) -> &[SensorReading] {
        &self.readings
    }

    pub fn len(&self) -> usize {
        self.readings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.readings.is_empty()
    }
}
