use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use netqec::circuit::{circuit_from_text, circuit_to_text, Basis, GhzChannel, NoiseModel};
use netqec::codes::BbSpec;
use netqec::decode::{
    count_failures, predictions_to_sample, BpOsdConfig, Decoder, DecoderConfig, LogicalErrorRate,
};
use netqec::harness::{
    build_report, fit_rows, point_circuit, prepare_code, read_points_csv, run_experiment_with,
    sample_shots, write_points_csv, write_rows_csv, Curve, ExperimentConfig, Mode, PartitionConfig,
    RunMetadata, SweepParameter,
};
use netqec::partition::build_combined_tanner;
use netqec::sim::{extract_dem, FrameSample};

#[derive(Parser)]
#[command(
    name = "netqec",
    version,
    about = "Distributed quantum error correction experiments"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Check matrices and logical operators of a code, as JSON.
    BuildCode(CodeArgs),
    /// Balanced bipartition of the combined Tanner graph.
    Partition {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long, default_value_t = 64)]
        restarts: usize,
        /// Allowed data-qubit imbalance between the two nodes.
        #[arg(long, default_value_t = 2)]
        tol: usize,
    },
    /// Memory-experiment circuit (or its detector error model) as text.
    EmitCircuit {
        #[command(flatten)]
        code: CodeArgs,
        #[command(flatten)]
        noise: NoiseArgs,
        /// Emit the detector error model instead of the circuit.
        #[arg(long)]
        dem: bool,
    },
    /// Samples detector events and observable flips into a binary file.
    Sample {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long)]
        shots: usize,
        #[arg(long, default_value_t = 16384)]
        batch_size: usize,
    },
    /// Decodes a sample file; prints the logical error rate as JSON.
    Decode {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long)]
        samples: PathBuf,
        #[arg(long, value_enum)]
        decoder: Option<DecoderKind>,
        #[arg(long, value_enum)]
        basis: Option<BasisArg>,
        #[arg(long, default_value_t = 0)]
        osd_order: usize,
    },
    /// Runs a sweep from a TOML or JSON config and writes the CSV table.
    Run {
        config: PathBuf,
        /// Overrides the shot cap of the config.
        #[arg(long)]
        max_shots: Option<u64>,
        #[arg(long)]
        quiet: bool,
    },
    /// Fits the logical-error ansatz to every curve of a sweep CSV; JSON output.
    Fit {
        input: PathBuf,
        #[arg(long)]
        alpha: Option<u32>,
    },
    /// Plot data with per-cycle rates and the uncoded line; prints crossings.
    Report { input: PathBuf },
}

#[derive(Args)]
struct CodeArgs {
    /// `surface`, `bb72`, `bb90`, `bb144`, or `bb` with `--spec`.
    #[arg(long, default_value = "surface")]
    code: String,
    #[arg(long)]
    distance: Option<usize>,
    /// BB polynomial pair (TOML, or JSON by extension).
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long)]
    rounds: Option<usize>,
    /// Precomputed partition file.
    #[arg(long)]
    partition_file: Option<PathBuf>,
}

#[derive(Args)]
struct NoiseArgs {
    #[arg(long, value_enum, default_value_t = ModeArg::Monolithic)]
    mode: ModeArg,
    #[arg(long, default_value_t = 0.0)]
    p: f64,
    #[arg(long, default_value_t = 0.0)]
    p_ghz: f64,
    #[arg(long, value_enum, default_value_t = GhzChannelArg::PerQubit)]
    ghz_channel: GhzChannelArg,
    #[arg(long, conflicts_with = "bell_fidelity")]
    p_bell: Option<f64>,
    #[arg(long)]
    bell_fidelity: Option<f64>,
    #[arg(long, value_enum, default_value_t = BasisArg::Z)]
    basis: BasisArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Monolithic,
    Networked,
    Partitioned,
}

#[derive(Clone, Copy, ValueEnum)]
enum BasisArg {
    X,
    Z,
}

#[derive(Clone, Copy, ValueEnum)]
enum GhzChannelArg {
    PerQubit,
    Joint,
}

#[derive(Clone, Copy, ValueEnum)]
enum DecoderKind {
    Matching,
    BpOsd,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Monolithic => Mode::Monolithic,
            ModeArg::Networked => Mode::Networked,
            ModeArg::Partitioned => Mode::Partitioned,
        }
    }
}

impl From<BasisArg> for Basis {
    fn from(b: BasisArg) -> Basis {
        match b {
            BasisArg::X => Basis::X,
            BasisArg::Z => Basis::Z,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(w) = cli.common.workers {
        if w == 0 {
            eprintln!("error: --workers must be at least 1");
            return ExitCode::FAILURE;
        }
        // Sizes the global pool used by parallel decoding.
        std::env::set_var("RAYON_NUM_THREADS", w.to_string());
    }
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    let common = cli.common;
    match cli.command {
        Command::BuildCode(code) => build_code(&common, &code),
        Command::Partition {
            code,
            restarts,
            tol,
        } => partition(&common, &code, restarts, tol),
        Command::EmitCircuit { code, noise, dem } => emit_circuit(&common, &code, &noise, dem),
        Command::Sample {
            circuit,
            shots,
            batch_size,
        } => sample(&common, &circuit, shots, batch_size),
        Command::Decode {
            circuit,
            samples,
            decoder,
            basis,
            osd_order,
        } => decode(&common, &circuit, &samples, decoder, basis, osd_order),
        Command::Run {
            config,
            max_shots,
            quiet,
        } => run(&common, &config, max_shots, quiet),
        Command::Fit { input, alpha } => fit(&common, &input, alpha),
        Command::Report { input } => report(&common, &input),
    }
}

fn output(common: &Common) -> Result<Box<dyn Write>> {
    Ok(match &common.out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).with_context(|| format!("creating {}", path.display()))?,
        )),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn write_out(common: &Common, text: &str) -> Result<()> {
    let mut w = output(common)?;
    w.write_all(text.as_bytes())?;
    w.flush()?;
    Ok(())
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// Config carrying only what code, partition and circuit construction need.
fn code_config(
    code: &CodeArgs,
    seed: u64,
    restarts: usize,
    tol: usize,
    curves: Vec<Curve>,
) -> Result<ExperimentConfig> {
    let bb_spec = match &code.spec {
        Some(path) => {
            let text = read_text(path)?;
            Some(if path.extension().is_some_and(|e| e == "json") {
                BbSpec::from_json(&text)?
            } else {
                BbSpec::from_toml(&text)?
            })
        }
        None => None,
    };
    let surface = code.code == "surface";
    if surface && code.distance.is_none() {
        bail!("--distance is required for the surface code");
    }
    if code.code == "bb" && bb_spec.is_none() {
        bail!("--code bb needs --spec");
    }
    Ok(ExperimentConfig {
        name: "cli".into(),
        code: code.code.clone(),
        distances: code.distance.into_iter().collect(),
        bb_spec,
        bb_distance: if surface { None } else { code.distance },
        rounds: code.rounds,
        basis: Basis::Z,
        sweep: SweepParameter::P,
        values: vec![0.001],
        p: 0.0,
        p_ghz: 0.0,
        curves,
        partition: PartitionConfig {
            restarts,
            tol,
            seed,
            file: code.partition_file.clone(),
        },
        decoder: None,
        max_shots: 1,
        max_failures: 1,
        batch_size: 1,
        seed,
        workers: 1,
    })
}

fn monolithic() -> Vec<Curve> {
    vec![Curve {
        mode: Mode::Monolithic,
        p_bell: None,
        bell_fidelity: None,
    }]
}

fn build_code(common: &Common, code: &CodeArgs) -> Result<()> {
    let cfg = code_config(code, 0, 1, 2, monolithic())?;
    let prepared = prepare_code(&cfg, code.distance)?;
    let c = &prepared.code;
    let json = serde_json::json!({
        "name": c.name(),
        "n": c.n,
        "k": c.k,
        "d": c.d,
        "hx": c.hx.to_coordinate_text(),
        "hz": c.hz.to_coordinate_text(),
        "logicals": c.logicals,
    });
    write_out(
        common,
        &format!("{}\n", serde_json::to_string_pretty(&json)?),
    )
}

fn partition(common: &Common, code: &CodeArgs, restarts: usize, tol: usize) -> Result<()> {
    let curves = vec![Curve {
        mode: Mode::Partitioned,
        p_bell: Some(0.0),
        bell_fidelity: None,
    }];
    let cfg = code_config(code, common.seed.unwrap_or(0), restarts, tol, curves)?;
    if cfg.is_surface() {
        bail!("partitioning applies to BB codes");
    }
    let prepared = prepare_code(&cfg, None)?;
    let (part, stats) = prepared.partition.context("no partition produced")?;
    let graph = build_combined_tanner(&prepared.code);
    write_out(common, &part.to_text(&graph))?;
    let summary = serde_json::json!({
        "code": prepared.code.name(),
        "stats": stats,
        "bell_pairs_per_shot": stats.bell_pairs_per_shot(prepared.rounds),
        "rounds": prepared.rounds,
    });
    let text = serde_json::to_string_pretty(&summary)?;
    if common.out.is_some() {
        println!("{text}");
    } else {
        eprintln!("{text}");
    }
    Ok(())
}

fn emit_circuit(common: &Common, code: &CodeArgs, noise: &NoiseArgs, dem: bool) -> Result<()> {
    let mode = Mode::from(noise.mode);
    let curve = Curve {
        mode,
        p_bell: noise
            .p_bell
            .or((mode == Mode::Partitioned && noise.bell_fidelity.is_none()).then_some(0.0)),
        bell_fidelity: noise.bell_fidelity,
    };
    let p_bell = curve.bell_error()?;
    let cfg = code_config(code, common.seed.unwrap_or(0), 64, 2, vec![curve])?;
    let prepared = prepare_code(&cfg, code.distance)?;
    let mut model = NoiseModel::uniform(noise.p);
    if mode == Mode::Networked {
        model = model.with_ghz(noise.p_ghz);
        model.ghz_channel = match noise.ghz_channel {
            GhzChannelArg::PerQubit => GhzChannel::PerQubit,
            GhzChannelArg::Joint => GhzChannel::Joint,
        };
    }
    if mode == Mode::Partitioned {
        model = model.with_bell(p_bell);
    }
    let circuit = point_circuit(&prepared, mode, &model, noise.basis.into())?;
    let text = if dem {
        extract_dem(&circuit)?.to_text()
    } else {
        circuit_to_text(&circuit)
    };
    write_out(common, &text)
}

fn load_circuit(path: &Path) -> Result<netqec::circuit::Circuit> {
    circuit_from_text(&read_text(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn sample(common: &Common, circuit: &Path, shots: usize, batch_size: usize) -> Result<()> {
    let Some(out) = &common.out else {
        bail!("sample writes a binary file; pass --out");
    };
    let c = load_circuit(circuit)?;
    let s = sample_shots(
        &c,
        shots,
        batch_size,
        common.seed.unwrap_or(0),
        0,
        common.workers.unwrap_or(1),
    )?;
    let mut w =
        BufWriter::new(File::create(out).with_context(|| format!("creating {}", out.display()))?);
    s.write_binary(&mut w)?;
    w.flush()?;
    Ok(())
}

fn decode(
    common: &Common,
    circuit: &Path,
    samples: &Path,
    decoder: Option<DecoderKind>,
    basis: Option<BasisArg>,
    osd_order: usize,
) -> Result<()> {
    let c = load_circuit(circuit)?;
    let file = File::open(samples).with_context(|| format!("opening {}", samples.display()))?;
    let sample = FrameSample::read_binary(&mut BufReader::new(file))?;
    let basis = basis.map(Basis::from).or(c.meta.basis).unwrap_or(Basis::Z);
    let (dem, kept) = extract_dem(&c)?.restrict_to_basis(basis);
    let sample = if sample.num_detectors == c.num_detectors {
        sample.select_detectors(&kept)
    } else if sample.num_detectors == kept.len() {
        sample
    } else {
        bail!(
            "sample has {} detectors; circuit has {} ({} in basis {basis:?})",
            sample.num_detectors,
            c.num_detectors,
            kept.len()
        );
    };
    let kind = decoder.unwrap_or(
        if c.meta.bell_pairs_per_round > 0 || c.num_observables > 1 {
            DecoderKind::BpOsd
        } else {
            DecoderKind::Matching
        },
    );
    let cfg = match kind {
        DecoderKind::Matching => DecoderConfig::Matching,
        DecoderKind::BpOsd => DecoderConfig::BpOsd(BpOsdConfig {
            osd_order,
            ..BpOsdConfig::default()
        }),
    };
    let dec = Decoder::new(&dem, &cfg)?;
    let preds = dec.decode_sample(&sample)?;
    let failures = count_failures(&preds, &sample.observable_masks())?;
    let rate = LogicalErrorRate::from_counts(failures, sample.shots as u64);
    if let Some(out) = &common.out {
        let mut w = BufWriter::new(
            File::create(out).with_context(|| format!("creating {}", out.display()))?,
        );
        predictions_to_sample(&preds, sample.num_observables).write_binary(&mut w)?;
        w.flush()?;
    }
    println!("{}", serde_json::to_string(&rate)?);
    Ok(())
}

fn run(common: &Common, config: &Path, max_shots: Option<u64>, quiet: bool) -> Result<()> {
    let mut cfg = ExperimentConfig::from_file(config)
        .with_context(|| format!("loading {}", config.display()))?;
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(w) = common.workers {
        cfg.workers = w;
    }
    if let Some(m) = max_shots {
        cfg.max_shots = m;
    }
    cfg.validate()?;
    let points = run_experiment_with(&cfg, |pt| {
        if quiet {
            return;
        }
        match &pt.error {
            Some(e) => eprintln!(
                "{} {} p={} p_ghz={}: failed: {e}",
                pt.code,
                pt.mode.as_str(),
                pt.p,
                pt.p_ghz
            ),
            None => eprintln!(
                "{} {} p={} p_bell={} p_ghz={}: {}/{} p_L={:.3e} [{:.3e}, {:.3e}] {:.1}s",
                pt.code,
                pt.mode.as_str(),
                pt.p,
                pt.p_bell,
                pt.p_ghz,
                pt.failures,
                pt.shots,
                pt.p_l,
                pt.ci_lo,
                pt.ci_hi,
                pt.wall_time_s
            ),
        }
    })?;
    write_points_csv(&points, output(common)?)?;
    if let Some(out) = &common.out {
        let meta = RunMetadata::new(&cfg, &points)?;
        let path = out.with_extension("json");
        std::fs::write(&path, serde_json::to_string_pretty(&meta)?)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    let failed = points.iter().filter(|p| p.error.is_some()).count();
    if failed > 0 {
        bail!("{failed} of {} points failed", points.len());
    }
    Ok(())
}

fn load_rows(input: &Path) -> Result<Vec<netqec::harness::CsvRow>> {
    let file = File::open(input).with_context(|| format!("opening {}", input.display()))?;
    read_points_csv(BufReader::new(file)).with_context(|| format!("reading {}", input.display()))
}

fn fit(common: &Common, input: &Path, alpha: Option<u32>) -> Result<()> {
    let rows = load_rows(input)?;
    let fits = fit_rows(&rows, alpha).with_context(|| format!("fitting {}", input.display()))?;
    write_out(
        common,
        &format!("{}\n", serde_json::to_string_pretty(&fits)?),
    )
}

fn report(common: &Common, input: &Path) -> Result<()> {
    let rows = load_rows(input)?;
    let r = build_report(&rows);
    write_rows_csv(&r.rows, output(common)?)?;
    let crossings = serde_json::to_string_pretty(&r.crossings)?;
    if common.out.is_some() {
        println!("{crossings}");
    } else {
        eprintln!("{crossings}");
    }
    Ok(())
}
