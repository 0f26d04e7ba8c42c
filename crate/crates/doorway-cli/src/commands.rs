//! Subcommand implementations.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use doorway_core::{
    benchmark_all, benchmark_to_csv, benchmark_to_json, estimate_entrance, evaluate, gen_dataset,
    parse_csv, write_csv, AlgoSpec, CvConfig, Dataset, Metrics, SensorReading, SignalModelParams,
    Trace, TrainedModel, TrajectorySpec,
};

use crate::{
    AlgoArg, BenchArgs, CliError, Command, DetectArgs, DetectFormat, EvalArgs, GenArgs,
    HyperParams, InspectArgs, RulesArgs, TableFormat, TrainArgs,
};

pub fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Gen(args) => gen(args),
        Command::Train(args) => train(args),
        Command::Eval(args) => eval(args),
        Command::Bench(args) => bench(args),
        Command::Detect(args) => detect(args),
        Command::Rules(args) => rules(args),
        Command::Inspect(args) => inspect(args),
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))
}

fn write_output(out: &Option<PathBuf>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, content)
            .map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(content.as_bytes())
                .map_err(|e| CliError::Data(format!("cannot write to stdout: {e}")))
        }
    }
}

fn load_dataset(path: &Path) -> Result<Dataset, CliError> {
    let readings = parse_csv(&read_file(path)?)?;
    Ok(Dataset::from_readings(&readings)?)
}

/// Validates flag-level preconditions common to train and eval.
fn check_hyper(hyper: &HyperParams) -> Result<(), CliError> {
    if hyper.k == 0 || hyper.k % 2 == 0 {
        return Err(usage(format!("--k must be odd and >= 1, got {}", hyper.k)));
    }
    if hyper.max_depth == 0 {
        return Err(usage("--max-depth must be at least 1"));
    }
    if hyper.min_leaf == 0 {
        return Err(usage("--min-leaf must be at least 1"));
    }
    if !(hyper.lambda > 0.0) || !hyper.lambda.is_finite() {
        return Err(usage(format!(
            "--lambda must be positive and finite, got {}",
            hyper.lambda
        )));
    }
    if hyper.epochs == 0 {
        return Err(usage("--epochs must be at least 1"));
    }
    Ok(())
}

fn algo_spec(algo: AlgoArg, hyper: &HyperParams, seed: u64) -> AlgoSpec {
    match algo {
        AlgoArg::Knn => AlgoSpec::Knn { k: hyper.k },
        AlgoArg::Nb => AlgoSpec::NaiveBayes,
        AlgoArg::Tree => AlgoSpec::Tree {
            max_depth: hyper.max_depth,
            min_samples_leaf: hyper.min_leaf,
        },
        AlgoArg::Svm => AlgoSpec::Svm {
            lambda: hyper.lambda,
            epochs: hyper.epochs,
            seed,
        },
    }
}

fn metrics_table_csv(algo: AlgoSpec, metrics: Metrics) -> String {
    benchmark_to_csv(&[(algo, metrics)])
}

fn metrics_table_json(algo: AlgoSpec, metrics: Metrics) -> String {
    let table = benchmark_to_json(&[(algo, metrics)]);
    // A single-algorithm report is one object, not a one-element array.
    let parsed: serde_json::Value = serde_json::from_str(&table).expect("own json parses");
    serde_json::to_string_pretty(&parsed[0]).expect("object serializes")
}

fn gen(args: GenArgs) -> Result<(), CliError> {
    if args.traces == 0 {
        return Err(usage("--traces must be at least 1"));
    }
    if !(args.step > 0.0) || !args.step.is_finite() {
        return Err(usage(format!("--step must be positive, got {}", args.step)));
    }
    if !args.start.is_finite() || !args.end.is_finite() || args.start <= args.end {
        return Err(usage(format!(
            "--start ({}) must be greater than --end ({})",
            args.start, args.end
        )));
    }
    if !(args.radius > 0.0) || !args.radius.is_finite() {
        return Err(usage(format!(
            "--radius must be positive, got {}",
            args.radius
        )));
    }
    for (name, value) in [
        ("--noise-rss", args.noise_rss),
        ("--noise-snr", args.noise_snr),
        ("--noise-sats", args.noise_sats),
    ] {
        if !(value >= 0.0) || !value.is_finite() {
            return Err(usage(format!("{name} must be non-negative, got {value}")));
        }
    }

    let params = SignalModelParams {
        noise_rss_db: args.noise_rss,
        noise_snr_db: args.noise_snr,
        noise_sats: args.noise_sats,
        ..SignalModelParams::default()
    };
    let spec = TrajectorySpec {
        start_m: args.start,
        end_m: args.end,
        step_m: args.step,
    };
    let (traces, dataset) = gen_dataset(&params, &spec, args.radius, args.traces, args.seed)?;
    let readings: Vec<SensorReading> = traces
        .iter()
        .flat_map(|t| t.readings().iter().cloned())
        .collect();
    write_output(&args.out, &write_csv(&readings))?;
    eprintln!(
        "generated {} traces ({} readings, {} entrance) with seed {}",
        traces.len(),
        dataset.n_rows(),
        dataset.n_positive(),
        args.seed
    );
    Ok(())
}

fn train(args: TrainArgs) -> Result<(), CliError> {
    check_hyper(&args.hyper)?;
    let dataset = load_dataset(&args.data)?;
    let spec = algo_spec(args.algo, &args.hyper, args.seed);
    let model = spec.train(&dataset)?;
    fs::write(&args.model, model.save())
        .map_err(|e| CliError::Data(format!("cannot write {}: {e}", args.model.display())))?;
    eprintln!(
        "trained {} on {} rows -> {}",
        spec.name(),
        dataset.n_rows(),
        args.model.display()
    );
    Ok(())
}

fn eval(args: EvalArgs) -> Result<(), CliError> {
    check_hyper(&args.hyper)?;
    if args.folds < 2 {
        return Err(usage(format!("--folds must be at least 2, got {}", args.folds)));
    }
    let dataset = load_dataset(&args.data)?;
    let spec = algo_spec(args.algo, &args.hyper, args.seed);
    let config = CvConfig {
        folds: args.folds,
        seed: args.seed,
    };
    let metrics = evaluate(&spec, &dataset, &config)?;
    let rendered = match args.format {
        TableFormat::Csv => metrics_table_csv(spec, metrics),
        TableFormat::Json => metrics_table_json(spec, metrics) + "\n",
    };
    write_output(&None, &rendered)
}

fn bench(args: BenchArgs) -> Result<(), CliError> {
    if args.folds < 2 {
        return Err(usage(format!("--folds must be at least 2, got {}", args.folds)));
    }
    let dataset = load_dataset(&args.data)?;
    let config = CvConfig {
        folds: args.folds,
        seed: args.seed,
    };
    let rows = benchmark_all(&dataset, &config)?;
    let rendered = match args.format {
        TableFormat::Csv => benchmark_to_csv(&rows),
        TableFormat::Json => benchmark_to_json(&rows) + "\n",
    };
    write_output(&None, &rendered)
}

fn detect(args: DetectArgs) -> Result<(), CliError> {
    if args.window == 0 || args.window % 2 == 0 {
        return Err(usage(format!(
            "--window must be odd and >= 1, got {}",
            args.window
        )));
    }
    let model = TrainedModel::load(&read_file(&args.model)?)?;
    let readings = parse_csv(&read_file(&args.trace)?)?;
    let id = args
        .trace
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "trace".into());
    let trace = Trace::new(id, readings)?;
    let result = estimate_entrance(&model, &trace, args.window)?;
    let rendered = match args.format {
        DetectFormat::Text => format!("{result}\n"),
        DetectFormat::Json => result.to_json() + "\n",
    };
    write_output(&None, &rendered)
}

fn rules(args: RulesArgs) -> Result<(), CliError> {
    let model = TrainedModel::load(&read_file(&args.model)?)?;
    let tree = model
        .as_tree()
        .ok_or_else(|| CliError::Data(format!("`rules` needs a tree model, got {}", model.algo())))?;
    let rules = tree.extract_rules();
    let mut out = String::new();
    for rule in &rules {
        out.push_str(&rule.to_string());
        out.push('\n');
    }
    write_output(&None, &out)?;
    eprintln!("{} entrance rule(s)", rules.len());
    Ok(())
}

fn inspect(args: InspectArgs) -> Result<(), CliError> {
    let readings = parse_csv(&read_file(&args.data)?)?;
    if readings.is_empty() {
        return Err(CliError::Data("no readings to aggregate".into()));
    }
    // Group by exact distance value, ascending.
    let mut order: Vec<usize> = (0..readings.len()).collect();
    order.sort_by(|&a, &b| readings[a].distance_m.total_cmp(&readings[b].distance_m));

    let mut out = String::from("distance_m,mean_sats,mean_snr,mean_rss,n\n");
    let mut i = 0;
    while i < order.len() {
        let d = readings[order[i]].distance_m;
        let mut sats = 0.0;
        let mut snr = 0.0;
        let mut rss = 0.0;
        let mut n = 0usize;
        while i < order.len() && readings[order[i]].distance_m == d {
            let r = &readings[order[i]];
            sats += r.num_satellites as f64;
            snr += r.snr_db;
            rss += r.rss_dbm;
            n += 1;
            i += 1;
        }
        let count = n as f64;
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            d,
            sats / count,
            snr / count,
            rss / count,
            n
        ));
    }
    write_output(&args.out, &out)
}
