//! Deterministic synthetic approach walks.
//!
//! Mean-signal curves model what a phone sees while walking through a
//! building entrance: GPS quality (mean SNR and satellite count) follows a
//! logistic transition centered on the entrance plane, so the value at the
//! plane is exactly halfway between the outdoor and indoor asymptotes, and
//! Wi-Fi RSS follows log-distance path loss toward a single access point
//! mounted inside. Seeded Gaussian noise is layered on top, so every trace
//! is a pure function of `(params, spec, radius, seed)`.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::features::Dataset;
use crate::reading::{Label, SensorReading, Trace, RSS_RANGE_DBM, SNR_RANGE_DB};

/// Mean-curve and noise parameters for the signal model.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalModelParams {
    /// Wi-Fi RSS at 1 m from the access point, dBm.
    pub rss_p1_dbm: f64,
    /// Path-loss exponent.
    pub rss_exponent: f64,
    /// Signed position of the access point; negative = inside.
    pub ap_distance_m: f64,
    /// Asymptotic outdoor mean SNR, dB.
    pub snr_out_db: f64,
    /// Asymptotic indoor mean SNR, dB.
    pub snr_in_db: f64,
    /// Asymptotic outdoor satellite count.
    pub sats_out: f64,
    /// Asymptotic indoor satellite count.
    pub sats_in: f64,
    /// Width of the logistic indoor/outdoor transition, meters.
    pub transition_w_m: f64,
    /// Gaussian noise std for RSS, dB.
    pub noise_rss_db: f64,
    /// Gaussian noise std for SNR, dB.
    pub noise_snr_db: f64,
    /// Gaussian noise std for the satellite count, applied before rounding.
    pub noise_sats: f64,
}

impl Default for SignalModelParams {
    fn default() -> Self {
        SignalModelParams {
            rss_p1_dbm: -30.0,
            rss_exponent: 2.2,
            ap_distance_m: -6.0,
            snr_out_db: 33.0,
            snr_in_db: 14.0,
            sats_out: 20.0,
            sats_in: 4.0,
            transition_w_m: 2.0,
            noise_rss_db: 3.0,
            noise_snr_db: 3.0,
            noise_sats: 2.0,
        }
    }
}

impl SignalModelParams {
    /// Zero-noise copy, keeping the same mean curves.
    pub fn noise_free(&self) -> SignalModelParams {
        SignalModelParams {
            noise_rss_db: 0.0,
            noise_snr_db: 0.0,
            noise_sats: 0.0,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |reason: &str| {
            Err(Error::InvalidSpec {
                reason: reason.to_string(),
            })
        };
        let all = [
            self.rss_p1_dbm,
            self.rss_exponent,
            self.ap_distance_m,
            self.snr_out_db,
            self.snr_in_db,
            self.sats_out,
            self.sats_in,
            self.transition_w_m,
            self.noise_rss_db,
            self.noise_snr_db,
            self.noise_sats,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return fail("signal model parameters must be finite");
        }
        if !(self.snr_out_db > self.snr_in_db && self.snr_in_db >= 0.0) {
            return fail("require snr_out_db > snr_in_db >= 0");
        }
        if !(self.sats_out > self.sats_in && self.sats_in >= 0.0) {
            return fail("require sats_out > sats_in >= 0");
        }
        if self.rss_exponent <= 0.0 {
            return fail("rss_exponent must be positive");
        }
        if self.transition_w_m <= 0.0 {
            return fail("transition_w_m must be positive");
        }
        if self.noise_rss_db < 0.0 || self.noise_snr_db < 0.0 || self.noise_sats < 0.0 {
            return fail("noise stds must be non-negative");
        }
        if self.ap_distance_m >= 0.0 {
            return fail("ap_distance_m must be negative (inside the building)");
        }
        Ok(())
    }
}

/// Sampling grid of one approach walk: `start, start - step, ..., >= end`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySpec {
    pub start_m: f64,
    pub end_m: f64,
    pub step_m: f64,
}

impl Default for TrajectorySpec {
    fn default() -> Self {
        TrajectorySpec {
            start_m: 10.0,
            end_m: -4.0,
            step_m: 0.5,
        }
    }
}

impl TrajectorySpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.start_m.is_finite() && self.end_m.is_finite() && self.step_m.is_finite()) {
            return Err(Error::InvalidSpec {
                reason: "trajectory bounds must be finite".into(),
            });
        }
        if self.step_m <= 0.0 {
            return Err(Error::InvalidSpec {
                reason: format!("step_m must be positive, got {}", self.step_m),
            });
        }
        if self.start_m <= self.end_m {
            return Err(Error::InvalidSpec {
                reason: format!(
                    "start_m ({}) must be greater than end_m ({})",
                    self.start_m, self.end_m
                ),
            });
        }
        Ok(())
    }

    /// Signed sampling positions, strictly decreasing.
    pub fn positions(&self) -> Vec<f64> {
        let span = (self.start_m - self.end_m) / self.step_m;
        // Tolerate representation error so that e.g. 10 -> -4 by 0.5 lands
        // exactly on -4.
        let steps = (span + 1e-9).floor() as usize;
        (0..=steps)
            .map(|i| self.start_m - i as f64 * self.step_m)
            .collect()
    }
}

/// Standard logistic function.
fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Mean Wi-Fi RSS at signed position `d`: log-distance path loss from the
/// access point with a 1 m near-field clamp.
pub fn expected_rss(params: &SignalModelParams, d: f64) -> f64 {
    let distance = (d - params.ap_distance_m).abs().max(1.0);
    params.rss_p1_dbm - 10.0 * params.rss_exponent * distance.log10()
}

/// Mean GPS SNR at `d`: logistic blend of the indoor and outdoor asymptotes,
/// equal to their midpoint exactly at the entrance plane.
pub fn expected_snr(params: &SignalModelParams, d: f64) -> f64 {
    params.snr_in_db + (params.snr_out_db - params.snr_in_db) * logistic(d / params.transition_w_m)
}

/// Real-valued satellite-count mean at `d`, before rounding.
pub fn expected_sats_mean(params: &SignalModelParams, d: f64) -> f64 {
    params.sats_in + (params.sats_out - params.sats_in) * logistic(d / params.transition_w_m)
}

/// Satellite count at `d`, rounded half away from zero.
pub fn expected_sats(params: &SignalModelParams, d: f64) -> u32 {
    expected_sats_mean(params, d).round() as u32
}

/// Stable per-trace seed stream.
///
/// `trace_seed(seed, i) = splitmix64(seed + (i as u64) * 0x9E3779B97F4A7C15)`
/// (wrapping arithmetic). This mixing rule is part of the output contract:
/// generated datasets are reproducible across releases and platforms.
pub fn trace_seed(dataset_seed: u64, trace_index: usize) -> u64 {
    splitmix64(dataset_seed.wrapping_add((trace_index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn trace_id(seed: u64) -> String {
    format!("trace-{seed:016x}")
}

/// Generates one labeled approach walk.
///
/// Per position, three standard-normal draws are consumed in a fixed order
/// (SNR, RSS, satellites), so the realization is a pure function of the
/// seed even when some noise stds are zero.
pub fn gen_trace(
    params: &SignalModelParams,
    spec: &TrajectorySpec,
    radius_m: f64,
    seed: u64,
) -> Result<Trace> {
    params.validate()?;
    spec.validate()?;
    if !(radius_m > 0.0) {
        return Err(Error::NonpositiveRadius { radius: radius_m });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut readings = Vec::new();
    for d in spec.positions() {
        let z_snr: f64 = rng.sample(StandardNormal);
        let z_rss: f64 = rng.sample(StandardNormal);
        let z_sats: f64 = rng.sample(StandardNormal);
        let snr = (expected_snr(params, d) + params.noise_snr_db * z_snr)
            .clamp(SNR_RANGE_DB.0, SNR_RANGE_DB.1);
        let rss = (expected_rss(params, d) + params.noise_rss_db * z_rss)
            .clamp(RSS_RANGE_DBM.0, RSS_RANGE_DBM.1);
        let sats_real = expected_sats_mean(params, d) + params.noise_sats * z_sats;
        let sats = sats_real.round().max(0.0) as u32;
        let label = Label::from_distance(d, radius_m)?;
        let reading = SensorReading::new(
            sats,
            snr,
            rss,
            label.is_entrance(),
            d,
            Some(label.as_str().to_string()),
        )
        .expect("clamped values stay inside the reading envelope");
        readings.push(reading);
    }
    Trace::new(trace_id(seed), readings)
}

/// Generates `n_traces` walks plus the pooled raw-feature dataset.
///
/// Trace `i` uses [`trace_seed`]`(seed, i)`, so traces are independent and
/// the whole call is deterministic; generation runs in parallel and the
/// output is identical to a sequential loop.
pub fn gen_dataset(
    params: &SignalModelParams,
    spec: &TrajectorySpec,
    radius_m: f64,
    n_traces: usize,
    seed: u64,
) -> Result<(Vec<Trace>, Dataset)> {
    if n_traces == 0 {
        return Err(Error::InvalidSpec {
            reason: "n_traces must be at least 1".into(),
        });
    }
    let traces: Vec<Trace> = (0..n_traces)
        .into_par_iter()
        .map(|i| gen_trace(params, spec, radius_m, trace_seed(seed, i)))
        .collect::<Result<_>>()?;
    let readings: Vec<SensorReading> = traces
        .iter()
        .flat_map(|t| t.readings().iter().cloned())
        .collect();
    let dataset = Dataset::from_readings(&readings)?;
    Ok((traces, dataset))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn defaults() -> (SignalModelParams, TrajectorySpec) {
        (SignalModelParams::default(), TrajectorySpec::default())
    }

    #[test]
    fn rss_curve_matches_closed_form() {
        let (p, _) = defaults();
        // -30 - 22*log10(6)
        assert_relative_eq!(expected_rss(&p, 0.0), -47.12, epsilon = 0.01);
        assert_relative_eq!(
            expected_rss(&p, 0.0),
            -30.0 - 22.0 * 6.0f64.log10(),
            epsilon = 1e-12
        );
        // At the access point the near-field clamp pins the curve to p1.
        assert_eq!(expected_rss(&p, p.ap_distance_m), -30.0);
        // -30 - 22*log10(16)
        assert_relative_eq!(expected_rss(&p, 10.0), -56.49, epsilon = 0.01);
    }

    #[test]
    fn snr_curve_is_anchored_at_the_midpoint() {
        let (p, _) = defaults();
        assert_eq!(expected_snr(&p, 0.0), 23.5);
        assert_relative_eq!(expected_snr(&p, 10.0), 32.87, epsilon = 0.01);
        assert_relative_eq!(expected_snr(&p, -10.0), 14.13, epsilon = 0.01);
    }

    #[test]
    fn sats_curve_rounds_half_away_from_zero() {
        let (p, _) = defaults();
        assert_eq!(expected_sats_mean(&p, 0.0), 12.0);
        assert_eq!(expected_sats(&p, 0.0), 12);
        // 4 + 16*sigma(-5) is about 4.107.
        assert_eq!(expected_sats(&p, -10.0), 4);
        // Saturation far outside.
        assert_eq!(expected_sats(&p, 20.0), 20);
    }

    #[test]
    fn default_grid_has_29_positions_ending_at_minus_4() {
        let spec = TrajectorySpec::default();
        let pos = spec.positions();
        assert_eq!(pos.len(), 29);
        assert_eq!(pos[0], 10.0);
        assert_eq!(pos[28], -4.0);
    }

    #[test]
    fn zero_noise_trace_equals_the_mean_curves() {
        let (p, spec) = defaults();
        let clean = p.noise_free();
        let trace = gen_trace(&clean, &spec, 1.0, 7).unwrap();
        for (r, d) in trace.readings().iter().zip(spec.positions()) {
            assert_eq!(r.distance_m, d);
            assert_eq!(r.snr_db, expected_snr(&clean, d));
            assert_eq!(r.rss_dbm, expected_rss(&clean, d));
            assert_eq!(r.num_satellites, expected_sats(&clean, d));
            assert_eq!(r.entrance, d.abs() <= 1.0);
        }
    }

    #[test]
    fn same_seed_reproduces_the_trace() {
        let (p, spec) = defaults();
        let a = gen_trace(&p, &spec, 1.0, 42).unwrap();
        let b = gen_trace(&p, &spec, 1.0, 42).unwrap();
        assert_eq!(a, b);
        let c = gen_trace(&p, &spec, 1.0, 43).unwrap();
        assert_ne!(a, c);
        // Different seeds keep the same labels.
        for (ra, rc) in a.readings().iter().zip(c.readings()) {
            assert_eq!(ra.entrance, rc.entrance);
            assert_eq!(ra.note, rc.note);
        }
    }

    #[test]
    fn generated_readings_respect_the_envelope() {
        let (mut p, spec) = defaults();
        p.noise_snr_db = 30.0; // force clamping
        p.noise_rss_db = 40.0;
        p.noise_sats = 10.0;
        let trace = gen_trace(&p, &spec, 1.0, 99).unwrap();
        for r in trace.readings() {
            assert!((0.0..=60.0).contains(&r.snr_db));
            assert!((-120.0..=0.0).contains(&r.rss_dbm));
        }
    }

    #[test]
    fn single_trace_dataset_matches_gen_trace() {
        let (p, spec) = defaults();
        let (traces, dataset) = gen_dataset(&p, &spec, 1.0, 1, 42).unwrap();
        assert_eq!(traces.len(), 1);
        assert_eq!(traces[0], gen_trace(&p, &spec, 1.0, trace_seed(42, 0)).unwrap());
        assert_eq!(dataset.n_rows(), 29);
    }

    #[test]
    fn dataset_shape_and_positive_count() {
        let (p, spec) = defaults();
        let (traces, dataset) = gen_dataset(&p, &spec, 1.0, 100, 42).unwrap();
        assert_eq!(traces.len(), 100);
        assert_eq!(dataset.n_rows(), 2900);
        // Five grid positions satisfy |d| <= 1: 1, 0.5, 0, -0.5, -1.
        assert_eq!(dataset.n_positive(), 500);
    }

    #[test]
    fn parallel_generation_matches_a_sequential_loop() {
        let (p, spec) = defaults();
        let (traces, _) = gen_dataset(&p, &spec, 1.0, 16, 7).unwrap();
        let sequential: Vec<Trace> = (0..16)
            .map(|i| gen_trace(&p, &spec, 1.0, trace_seed(7, i)).unwrap())
            .collect();
        assert_eq!(traces, sequential);
    }

    #[test]
    fn noise_free_monotonicity_on_the_default_grid() {
        let (p, spec) = defaults();
        let pos = spec.positions();
        for pair in pos.windows(2) {
            let (hi, lo) = (pair[0], pair[1]);
            assert!(expected_snr(&p, hi) > expected_snr(&p, lo));
            assert!(expected_sats_mean(&p, hi) > expected_sats_mean(&p, lo));
            // RSS decreases as the distance to the access point grows.
            let (near, far) = (
                (lo - p.ap_distance_m).abs(),
                (hi - p.ap_distance_m).abs(),
            );
            assert!(far > near);
            assert!(expected_rss(&p, hi) < expected_rss(&p, lo));
        }
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let (p, spec) = defaults();
        assert!(gen_trace(&p, &spec, 0.0, 1).is_err());
        let bad = TrajectorySpec {
            start_m: -4.0,
            end_m: 10.0,
            step_m: 0.5,
        };
        assert!(matches!(
            gen_trace(&p, &bad, 1.0, 1),
            Err(Error::InvalidSpec { .. })
        ));
        let bad = TrajectorySpec {
            step_m: 0.0,
            ..TrajectorySpec::default()
        };
        assert!(gen_trace(&p, &bad, 1.0, 1).is_err());
        let mut bad_params = p.clone();
        bad_params.ap_distance_m = 2.0;
        assert!(bad_params.validate().is_err());
        let mut bad_params = p.clone();
        bad_params.snr_in_db = 40.0;
        assert!(bad_params.validate().is_err());
        assert!(matches!(
            gen_dataset(&p, &spec, 1.0, 0, 1),
            Err(Error::InvalidSpec { .. })
        ));
    }
}
