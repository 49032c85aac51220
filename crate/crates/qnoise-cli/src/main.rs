//! Command-line harness: tolerance scans, randomized benchmarking, gate set
//! tomography and memory estimates, with seeded deterministic output.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng;
use serde_json::json;

use qnoise::circuits::CircuitSpec;
use qnoise::error::Error;
use qnoise::gst::{collect_gst_data, lgst, predict_probability, random_sequences, FiducialSet, GateSet};
use qnoise::io::{
    load_circuit, save_circuit, scan_rows_to_csv, tolerable_rows_to_csv, CircuitFile,
};
use qnoise::math::round_sig;
use qnoise::noise::{DensityMatrix, LocationPolicy, PauliFaultModel, QuantumChannel};
use qnoise::rb::{
    fit_rb_data, per_cnot_error, run_interleaved_rb, run_rb, CliffordGroup, NoiseInsertion,
    RbConfig, RbNoise,
};
use qnoise::scan::{run_success_scan, run_tolerable_scan, CriterionChoice, ScanRequest};
use qnoise::sim::Gate;
use qnoise::tolerance::{memory_estimate, bytes_to_petabytes, Representation, ToleranceConfig};

#[derive(Parser)]
#[command(name = "qnoise", version, about = "Noise-aware quantum circuit analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Master seed; a random one is drawn and printed when omitted.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker thread cap (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Output file (stdout when omitted).
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Success-probability or tolerable-rate scan over benchmark families.
    Scan(ScanArgs),
    /// Randomized benchmarking on a simulated noisy Clifford set.
    Rb(RbArgs),
    /// Linear gate set tomography on a simulated noisy gate set.
    Gst(GstArgs),
    /// Memory footprint of exact simulation at a given qubit count.
    EstimateMemory(MemArgs),
    /// Generate a benchmark instance as a circuit file.
    Gen(GenArgs),
    /// Validate a circuit file and echo its canonical form.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct ScanArgs {
    /// Comma-separated families (bv, grover, qft, hlf, adder, ryrz).
    #[arg(long, default_value = "bv,grover,qft,hlf,adder,ryrz")]
    families: String,
    /// Qubit counts: a..b (inclusive) or a comma list.
    #[arg(long, default_value = "3..6")]
    n: String,
    /// Comma-separated Pauli error rates per location.
    #[arg(long, default_value = "0.0015", conflicts_with = "tolerable")]
    p: String,
    /// Search the tolerable rate instead of scanning fixed rates.
    #[arg(long)]
    tolerable: bool,
    #[arg(long, default_value = "auto")]
    criterion: String,
    #[arg(long, default_value_t = qnoise::tolerance::DEFAULT_THRESHOLD)]
    threshold: f64,
    /// Error-location policy: all (every qubit, every layer) or active.
    #[arg(long, default_value = "all")]
    policy: String,
    #[arg(long, default_value_t = 10_000)]
    mc_start: u64,
    #[arg(long, default_value_t = 1_000_000)]
    mc_max: u64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct RbArgs {
    #[arg(long, default_value_t = 2)]
    qubits: usize,
    /// Per-Clifford noise: depolarizing:<p>, dephasing:<p>, pauli:<p>, none.
    #[arg(long, default_value = "none")]
    noise: String,
    /// Exact survival probabilities (no sampling). Default unless --shots.
    #[arg(long, conflicts_with = "shots")]
    exact: bool,
    #[arg(long, default_value_t = 0)]
    shots: u64,
    /// Sequence lengths m.
    #[arg(long, default_value = "1,2,3,5,7,10,15,20,30,50")]
    lengths: String,
    /// Random sequences per length.
    #[arg(long, default_value_t = 5)]
    sequences: usize,
    /// Per-qubit readout bit-flip probability.
    #[arg(long, default_value_t = 0.0)]
    readout_flip: f64,
    /// Insert noise after every elementary gate instead of per Clifford
    /// (requires a single-qubit noise channel).
    #[arg(long)]
    per_gate: bool,
    /// Interleave a fixed Clifford (e.g. h0, s1, cx) to estimate its error.
    #[arg(long)]
    interleave: Option<String>,
    /// Noise carried by the interleaved target itself.
    #[arg(long, default_value = "none")]
    interleave_noise: String,
    /// Clifford-group cache file (loaded when present, else written).
    #[arg(long)]
    group_cache: Option<PathBuf>,
}

#[derive(Args)]
struct GstArgs {
    /// Noise composed after every gate: depolarizing:<p>, dephasing:<p>, none.
    #[arg(long, default_value = "depolarizing:0.05")]
    noise: String,
    /// Shots per circuit (0 = exact probabilities).
    #[arg(long, default_value_t = 0)]
    shots: u64,
    /// Preparation error: rho0 = (1-e)|0><0| + e|1><1|.
    #[arg(long, default_value_t = 0.0)]
    prep_error: f64,
    /// Gate set (must contain h and s for the default fiducials).
    #[arg(long, default_value = "h,s")]
    gates: String,
    /// Random sequences for the prediction-vs-oracle diagnostic.
    #[arg(long, default_value_t = 1000)]
    check_sequences: usize,
    #[arg(long, default_value_t = 10)]
    check_max_len: usize,
}

#[derive(Args)]
struct MemArgs {
    #[arg(long)]
    qubits: usize,
    /// statevector or density.
    #[arg(long, default_value = "statevector")]
    repr: String,
    /// Bytes per amplitude (8 or 16).
    #[arg(long)]
    bytes: u32,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    family: String,
    #[arg(long)]
    n: usize,
}

#[derive(Args)]
struct ValidateArgs {
    file: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        // Worker cap; estimator results do not depend on it.
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
    }
    let seed = cli.seed.unwrap_or_else(|| {
        let s: u64 = rand::rng().random();
        eprintln!("info: no --seed given; using random seed {s}");
        s
    });
    match run(cli, seed) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(error_exit_code(&e))
        }
    }
}

/// 2 for configuration/validation problems, 3 for runtime failures.
fn error_exit_code(e: &Error) -> u8 {
    match e {
        Error::UnknownGate(_)
        | Error::BadParameterCount { .. }
        | Error::ArityMismatch { .. }
        | Error::BadBitString(_)
        | Error::BitStringLength { .. }
        | Error::TargetOutOfRange { .. }
        | Error::DuplicateTarget(_)
        | Error::BadFaultLocation { .. }
        | Error::DuplicateFaultLocation { .. }
        | Error::RateOutOfRange(..)
        | Error::BadPauliWeights(_)
        | Error::QubitLimit { .. }
        | Error::EmptyCircuit
        | Error::ExhaustiveDomain(_)
        | Error::IdealBelowThreshold { .. }
        | Error::NotEnoughLengths(_)
        | Error::GroupTooLarge(_)
        | Error::InvalidConfig(_)
        | Error::Parse(_)
        | Error::Validation(_) => 2,
        _ => 3,
    }
}

fn run(cli: Cli, seed: u64) -> Result<(), Error> {
    match cli.command {
        Command::Scan(args) => cmd_scan(args, seed, cli.output),
        Command::Rb(args) => cmd_rb(args, seed, cli.output),
        Command::Gst(args) => cmd_gst(args, seed, cli.output),
        Command::EstimateMemory(args) => cmd_memory(args, cli.output),
        Command::Gen(args) => cmd_gen(args, seed, cli.output),
        Command::Validate(args) => cmd_validate(args, cli.output),
    }
}

fn emit(output: Option<PathBuf>, text: &str) -> Result<(), Error> {
    match output {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>, Error> {
    s.split(',')
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.trim()
                .parse::<T>()
                .map_err(|_| Error::InvalidConfig(format!("bad {what} entry `{t}`")))
        })
        .collect()
}

/// "a..b" (inclusive) or a comma list.
fn parse_sizes(s: &str) -> Result<Vec<usize>, Error> {
    if let Some((a, b)) = s.split_once("..") {
        let lo: usize = a
            .trim()
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("bad range start `{a}`")))?;
        let hi: usize = b
            .trim()
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("bad range end `{b}`")))?;
        if hi < lo {
            return Err(Error::InvalidConfig(format!("empty range `{s}`")));
        }
        Ok((lo..=hi).collect())
    } else {
        parse_list(s, "qubit count")
    }
}

/// "<kind>:<rate>" noise descriptors shared by the rb and gst commands.
fn parse_channel_noise(s: &str, n_qubits: usize) -> Result<Option<QuantumChannel>, Error> {
    match s {
        "none" => Ok(None),
        _ => {
            let (kind, rate) = s
                .split_once(':')
                .ok_or_else(|| Error::InvalidConfig(format!("bad noise spec `{s}`")))?;
            let rate: f64 = rate
                .parse()
                .map_err(|_| Error::InvalidConfig(format!("bad noise rate in `{s}`")))?;
            let ch = match kind {
                "depolarizing" => QuantumChannel::depolarizing(n_qubits, rate)?,
                "dephasing" => {
                    if n_qubits != 1 {
                        return Err(Error::InvalidConfig(
                            "dephasing noise is single-qubit".into(),
                        ));
                    }
                    QuantumChannel::dephasing(rate)?
                }
                "pauli" => {
                    if n_qubits != 1 {
                        return Err(Error::InvalidConfig("pauli noise is single-qubit".into()));
                    }
                    QuantumChannel::pauli_channel(rate, [1.0 / 3.0; 3])?
                }
                other => {
                    return Err(Error::InvalidConfig(format!("unknown noise kind `{other}`")))
                }
            };
            Ok(Some(ch))
        }
    }
}

fn cmd_scan(args: ScanArgs, seed: u64, output: Option<PathBuf>) -> Result<(), Error> {
    let policy = match args.policy.as_str() {
        "all" => LocationPolicy::AllQubitsEveryLayer,
        "active" => LocationPolicy::ActiveQubitsOnly,
        other => return Err(Error::InvalidConfig(format!("unknown policy `{other}`"))),
    };
    let request = ScanRequest {
        families: parse_list(&args.families, "family")?,
        n_values: parse_sizes(&args.n)?,
        rates: if args.tolerable {
            vec![]
        } else {
            parse_list(&args.p, "rate")?
        },
        criterion: args.criterion.parse::<CriterionChoice>()?,
        threshold: args.threshold,
        policy,
        seed,
        tolerance: ToleranceConfig {
            mc_initial_trials: args.mc_start,
            mc_max_trials: args.mc_max,
            ..ToleranceConfig::default()
        },
    };
    let text = if args.tolerable {
        let rows = run_tolerable_scan(&request)?;
        match args.format {
            Format::Csv => tolerable_rows_to_csv(&rows),
            Format::Json => serde_json::to_string_pretty(&rows)
                .map_err(|e| Error::Parse(e.to_string()))?,
        }
    } else {
        let rows = run_success_scan(&request)?;
        match args.format {
            Format::Csv => scan_rows_to_csv(&rows),
            Format::Json => serde_json::to_string_pretty(&rows)
                .map_err(|e| Error::Parse(e.to_string()))?,
        }
    };
    emit(output, &text)
}

/// Resolve an interleave target like "h0", "s1" or "cx" to a group element.
fn resolve_target(group: &CliffordGroup, name: &str) -> Result<usize, Error> {
    if name == "cx" {
        if group.n_qubits() != 2 {
            return Err(Error::InvalidConfig("cx needs the 2-qubit group".into()));
        }
        return group.find_gate(&Gate::cnot(), &[0, 1]);
    }
    let (gate_name, qubit) = name.split_at(name.len().saturating_sub(1));
    let qubit: usize = qubit
        .parse()
        .map_err(|_| Error::InvalidConfig(format!("bad interleave target `{name}`")))?;
    group.find_gate(&Gate::from_name(gate_name, &[])?, &[qubit])
}

fn cmd_rb(args: RbArgs, seed: u64, output: Option<PathBuf>) -> Result<(), Error> {
    let group = match &args.group_cache {
        Some(path) if path.exists() => CliffordGroup::load_cache(path)?,
        Some(path) => {
            let g = CliffordGroup::build(args.qubits)?;
            g.save_cache(path)?;
            g
        }
        None => CliffordGroup::build(args.qubits)?,
    };
    if group.n_qubits() != args.qubits {
        return Err(Error::DimensionMismatch(group.n_qubits(), args.qubits));
    }

    let channel_dim = if args.per_gate { 1 } else { args.qubits };
    let noise = match args.noise.as_str() {
        s if s.starts_with("pauli:") => {
            let rate: f64 = s[6..]
                .parse()
                .map_err(|_| Error::InvalidConfig(format!("bad noise rate in `{s}`")))?;
            RbNoise::PauliModel(PauliFaultModel::depolarizing(rate)?)
        }
        s => match parse_channel_noise(s, channel_dim)? {
            Some(ch) => RbNoise::Channel(ch),
            None => RbNoise::Noiseless,
        },
    };

    let config = RbConfig {
        n_qubits: args.qubits,
        lengths: parse_list(&args.lengths, "length")?,
        sequences_per_length: args.sequences,
        shots: args.shots,
        noise,
        insertion: if args.per_gate {
            NoiseInsertion::PerElementaryGate
        } else {
            NoiseInsertion::PerClifford
        },
        readout_flip: args.readout_flip,
        seed,
    };

    let data = run_rb(&config, &group)?;
    let fit = fit_rb_data(&data, config.n_qubits)?;
    let per_cnot = (group.n_qubits() == 2)
        .then(|| per_cnot_error(fit.r, data.sampled_mean_cnots))
        .transpose()?;

    let interleaved = match &args.interleave {
        Some(name) => {
            let target = resolve_target(&group, name)?;
            let target_noise = match parse_channel_noise(&args.interleave_noise, args.qubits)? {
                Some(ch) => RbNoise::Channel(ch),
                None => RbNoise::Noiseless,
            };
            Some(run_interleaved_rb(&config, &group, target, &target_noise)?)
        }
        None => None,
    };

    let report = json!({
        "config": {
            "n_qubits": config.n_qubits,
            "lengths": config.lengths,
            "sequences_per_length": config.sequences_per_length,
            "shots": config.shots,
            "noise": config.noise.describe(),
            "readout_flip": config.readout_flip,
            "seed": seed,
        },
        "per_m": data.points,
        "fit": fit,
        "sampled_mean_cnots": data.sampled_mean_cnots,
        "group_mean_cnots": group.mean_cnot_count(),
        "per_cnot_error": per_cnot,
        "interleaved": interleaved,
    });
    emit(
        output,
        &format!(
            "{}\n",
            serde_json::to_string_pretty(&report).map_err(|e| Error::Parse(e.to_string()))?
        ),
    )
}

fn cmd_gst(args: GstArgs, seed: u64, output: Option<PathBuf>) -> Result<(), Error> {
    let names: Vec<String> = parse_list(&args.gates, "gate")?;
    let name_refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let mut gateset = GateSet::ideal(&name_refs)?;
    if let Some(noise) = parse_channel_noise(&args.noise, 1)? {
        gateset = gateset.with_gate_noise(&noise)?;
    }
    if args.prep_error > 0.0 {
        let e = args.prep_error;
        gateset = gateset.with_preparation(DensityMatrix::diagonal_mixture(1, &[1.0 - e, e])?)?;
    }

    let fiducials = FiducialSet::default_set();
    let data = collect_gst_data(&gateset, &fiducials, args.shots, seed)?;
    let estimate = lgst(&data, &fiducials)?;

    // Gauge-invariant diagnostic: predictions against the exact simulation.
    let sequences = random_sequences(
        &gateset.gate_names(),
        args.check_sequences,
        args.check_max_len,
        qnoise::rng::derive_seed(seed, 0x6571),
    );
    let mut max_err = 0.0f64;
    for seq in &sequences {
        let predicted = predict_probability(&estimate, seq)?;
        let oracle = gateset.simulate_probability(seq)?;
        max_err = max_err.max((predicted - oracle).abs());
    }

    let gates_json: serde_json::Map<String, serde_json::Value> = estimate
        .gate_ptms
        .iter()
        .map(|(name, ptm)| {
            let rows: Vec<Vec<f64>> = (0..4)
                .map(|i| (0..4).map(|j| ptm[(i, j)]).collect())
                .collect();
            (name.clone(), json!(rows))
        })
        .collect();
    let report = json!({
        "fiducials": fiducials,
        "gram_condition_number": estimate.gram_condition_number,
        "gates": gates_json,
        "spam": {
            "rho": estimate.rho_vec.as_slice(),
            "effect": estimate.effect_vec.as_slice(),
        },
        "diagnostics": {
            "min_choi_eigenvalue": estimate.min_choi_eigenvalue,
            "prediction_max_abs_error": max_err,
            "checked_sequences": sequences.len(),
            "shots": args.shots,
        },
    });
    emit(
        output,
        &format!(
            "{}\n",
            serde_json::to_string_pretty(&report).map_err(|e| Error::Parse(e.to_string()))?
        ),
    )
}

/// Three-significant-figure rendering, scientific above 1e5.
fn fmt_sig3(x: f64) -> String {
    let r = round_sig(x, 3);
    if r != 0.0 && (r.abs() >= 1e5 || r.abs() < 1e-3) {
        format!("{r:.2e}")
    } else {
        format!("{r}")
    }
}

fn cmd_memory(args: MemArgs, output: Option<PathBuf>) -> Result<(), Error> {
    let repr = match args.repr.as_str() {
        "statevector" => Representation::StateVector,
        "density" | "density_matrix" => Representation::DensityMatrix,
        other => {
            return Err(Error::InvalidConfig(format!(
                "unknown representation `{other}`"
            )))
        }
    };
    let bytes = memory_estimate(args.qubits, repr, args.bytes)?;
    let pb = bytes_to_petabytes(bytes);
    let text = format!(
        "{} qubits, {}, {} bytes/amplitude: {} bytes = {} PB\n",
        args.qubits,
        args.repr,
        args.bytes,
        bytes,
        fmt_sig3(pb)
    );
    emit(output, &text)
}

fn cmd_gen(args: GenArgs, seed: u64, output: Option<PathBuf>) -> Result<(), Error> {
    let spec = CircuitSpec::derive(&args.family, args.n, seed).ok_or_else(|| {
        Error::InvalidConfig(format!(
            "family `{}` cannot realize {} qubit(s)",
            args.family, args.n
        ))
    })?;
    let circuit = spec.build()?;
    match output {
        Some(path) => {
            save_circuit(&circuit, &path)?;
            eprintln!(
                "info: wrote {} ({} qubits, depth {}, area {})",
                spec.id(),
                circuit.n_qubits(),
                circuit.depth(),
                circuit.area()
            );
            Ok(())
        }
        None => emit(None, &CircuitFile::from_circuit(&circuit).to_json()),
    }
}

fn cmd_validate(args: ValidateArgs, output: Option<PathBuf>) -> Result<(), Error> {
    let circuit = load_circuit(&args.file)?;
    let canonical = CircuitFile::from_circuit(&circuit).to_json();
    match output {
        Some(path) => {
            std::fs::write(path, &canonical)?;
        }
        None => {
            println!(
                "valid: {} qubits, depth {}, area {}, {} gates",
                circuit.n_qubits(),
                circuit.depth(),
                circuit.area(),
                circuit.gate_count()
            );
        }
    }
    Ok(())
}
