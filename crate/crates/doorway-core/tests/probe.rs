//! Temporary probe for stream-rule selection. Run with:
//! cargo test -p doorway-core --test probe -- --ignored --nocapture

use doorway_core::*;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn seeds_for(rule: usize, master: u64, n: usize) -> Vec<u64> {
    match rule {
        0 => (0..n as u64).map(|i| splitmix64(master.wrapping_add(i.wrapping_mul(GOLDEN)))).collect(),
        1 => (0..n as u64).map(|i| splitmix64(master ^ (i + 1).wrapping_mul(GOLDEN))).collect(),
        2 => (0..n as u64).map(|i| splitmix64(splitmix64(master).wrapping_add(i))).collect(),
        3 => (0..n as u64).map(|i| splitmix64(master.wrapping_add(i).wrapping_mul(GOLDEN))).collect(),
        4 => {
            let mut s = splitmix64(master);
            (0..n).map(|_| { let v = s; s = splitmix64(s); v }).collect()
        }
        _ => unreachable!(),
    }
}

fn make(rule: usize, master: u64, n: usize) -> (Vec<Trace>, Dataset) {
    let params = SignalModelParams::default();
    let spec = TrajectorySpec::default();
    let traces: Vec<Trace> = seeds_for(rule, master, n)
        .into_iter()
        .map(|s| gen_trace(&params, &spec, 1.0, s).unwrap())
        .collect();
    let readings: Vec<SensorReading> = traces.iter().flat_map(|t| t.readings().iter().cloned()).collect();
    let ds = Dataset::from_readings(&readings).unwrap();
    (traces, ds)
}

#[test]
#[ignore]
fn probe_rules() {
    for rule in 0..5 {
        let (traces, ds) = make(rule, 42, 100);
        let rows = benchmark_all(&ds, &CvConfig::default()).unwrap();
        let accs: Vec<(String, f64)> = rows.iter().map(|(a, m)| (a.name().to_string(), m.accuracy)).collect();

        // criterion 5 protocol: train on first 60, detect on last 40
        let train_readings: Vec<SensorReading> = traces[..60].iter().flat_map(|t| t.readings().iter().cloned()).collect();
        let train_ds = Dataset::from_readings(&train_readings).unwrap();
        let model = AlgoSpec::default_knn().train(&train_ds).unwrap();
        let mut errs: Vec<f64> = Vec::new();
        let mut misses = 0;
        for t in &traces[60..] {
            match estimate_entrance(&model, t, 3) {
                Ok(r) => errs.push(r.position_error_m),
                Err(_) => misses += 1,
            }
        }
        errs.sort_by(f64::total_cmp);
        let median = errs[(errs.len() as f64 * 0.5).ceil() as usize - 1];
        let p90 = errs[(errs.len() as f64 * 0.9).ceil() as usize - 1];
        println!(
            "rule {rule}: bench {:?} | c5 median={median} p90={p90} misses={misses}",
            accs.iter().map(|(n, a)| format!("{n}={a:.4}")).collect::<Vec<_>>()
        );
    }
}
