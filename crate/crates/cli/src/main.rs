use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bistatic_naf::experiments::{detect_map, write_results_csv};
use bistatic_naf::io::{load_map, load_truth, save_map, write_truth_csv, write_values};
use bistatic_naf::{
    acquire, compute_metrics, dft_naf_samples, evaluate_iteration, radian_uniform_samples, reconstruct,
    run_sweep, uniform_naf_grid, CfarConfig, Error, InterpolationMethod, NafPoint, NoiseConfig, SamplingDomain,
    SamplingGrid, ScenarioConfig, Scene, UlaConfig,
};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;

#[derive(Debug, Parser)]
#[command(name = "bistatic-naf", version, about = "Bistatic two-ULA sampling, reconstruction and detection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Domain {
    Naf,
    Rad,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the per-array sampling set, one value per line.
    SampleGrid {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value = "naf")]
        domain: Domain,
        #[arg(long, default_value_t = 0.5)]
        spacing: f64,
    },
    /// Acquire a scene on a sampling grid and save the sampled map.
    Simulate {
        /// JSON scene description.
        #[arg(long)]
        config: PathBuf,
        /// Output map; `.bin` selects the binary format, anything else CSV.
        #[arg(long)]
        out: PathBuf,
        /// Also write the scatterer positions as an `f_tx,f_rx` CSV.
        #[arg(long)]
        truth_out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Upsample a sampled map onto a uniform NAF grid.
    Reconstruct {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_parser = parse_method)]
        method: InterpolationMethod,
        #[arg(long, default_value_t = 220)]
        out_size: usize,
        #[arg(long)]
        out: PathBuf,
        /// Element spacing in wavelengths, used by the RAD spline.
        #[arg(long, default_value_t = 0.5)]
        spacing: f64,
    },
    /// Run a Monte Carlo sweep and write per-method metrics as CSV.
    Scenario {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        iters: Option<usize>,
        #[arg(long, env = "BISTATIC_NAF_THREADS")]
        threads: Option<usize>,
    },
    /// Detect targets on one reconstructed map and score them.
    Metrics {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        /// Label for the CSV `method` column.
        #[arg(long, default_value = "map")]
        label: String,
        /// Element count, which sets the default CFAR window and tolerance.
        #[arg(long, default_value_t = 11)]
        n_elements: usize,
        #[arg(long, default_value_t = 1e-3)]
        pfa: f64,
        #[arg(long)]
        guard: Option<usize>,
        #[arg(long)]
        train: Option<usize>,
        /// Matching tolerance per axis; defaults to `1/n_elements`.
        #[arg(long)]
        tol: Option<f64>,
    },
}

fn parse_method(s: &str) -> Result<InterpolationMethod, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Scene file read by `simulate`.
#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SimulateConfig {
    tx: UlaConfig,
    rx: UlaConfig,
    scene: Scene,
    noise: NoiseConfig,
    /// `naf` for the DFT grid, `radian` for uniform angles.
    domain: SamplingDomain,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            tx: UlaConfig::default(),
            rx: UlaConfig::default(),
            scene: Scene::default(),
            noise: NoiseConfig::noiseless(),
            domain: SamplingDomain::Naf,
        }
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, Error> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

fn run(cmd: Command) -> Result<(), Error> {
    match cmd {
        Command::SampleGrid { n, domain, spacing } => {
            let ula = UlaConfig::with_spacing(n, spacing)?;
            let set = match domain {
                Domain::Naf => dft_naf_samples(&ula),
                Domain::Rad => radian_uniform_samples(&ula)?,
            };
            write_values(set.points(), BufWriter::new(io::stdout().lock()))
        }
        Command::Simulate { config, out, truth_out, seed } => {
            let mut cfg: SimulateConfig = read_json(&config)?;
            if let Some(seed) = seed {
                cfg.noise.seed = seed;
            }
            let grid = match cfg.domain {
                SamplingDomain::Naf => SamplingGrid::optimal(&cfg.tx, &cfg.rx),
                SamplingDomain::Radian => SamplingGrid::radian_uniform(&cfg.tx, &cfg.rx)?,
            };
            let map = acquire(&grid, &cfg.tx, &cfg.rx, &cfg.scene, &cfg.noise)?;
            save_map(&map, &out)?;
            if let Some(path) = truth_out {
                let truths: Vec<NafPoint> = cfg.scene.scatterers.iter().map(|s| s.naf).collect();
                write_truth_csv(&truths, BufWriter::new(fs::File::create(path)?))?;
            }
            Ok(())
        }
        Command::Reconstruct { input, method, out_size, out, spacing } => {
            if out_size == 0 {
                return Err(Error::InvalidGrid("output size must be positive".into()));
            }
            let map = load_map(&input)?;
            let grid = uniform_naf_grid(out_size);
            let up = reconstruct(method, &map, &grid, &grid, spacing, spacing)?;
            save_map(&up, &out)
        }
        Command::Scenario { config, out, seed, iters, threads } => {
            let mut cfg = match config {
                Some(path) => ScenarioConfig::from_json(&fs::read_to_string(path)?)?,
                None => ScenarioConfig::default(),
            };
            if let Some(seed) = seed {
                cfg.noise.seed = seed;
            }
            if let Some(iters) = iters {
                cfg.iterations = iters;
            }
            cfg.validate()?;
            let results = match threads {
                Some(0) => return Err(Error::InvalidConfig("thread count must be positive".into())),
                Some(t) => rayon::ThreadPoolBuilder::new()
                    .num_threads(t)
                    .build()
                    .map_err(|e| Error::InvalidConfig(e.to_string()))?
                    .install(|| run_sweep(&cfg))?,
                None => run_sweep(&cfg)?,
            };
            write_results_csv(&results, BufWriter::new(fs::File::create(out)?))
        }
        Command::Metrics { map, truth, label, n_elements, pfa, guard, train, tol } => {
            let map = load_map(&map)?;
            let truths = load_truth(&truth)?;
            let (rows, cols) = map.dim();
            let auto = CfarConfig::for_upsampling(pfa, rows.min(cols), n_elements)?;
            let cfar = CfarConfig::new(
                pfa,
                guard.unwrap_or(auto.guard_half_width),
                train.unwrap_or(auto.train_half_width),
            )?;
            let tol = tol.unwrap_or(1.0 / n_elements as f64);
            if tol.is_nan() || tol <= 0.0 {
                return Err(Error::InvalidConfig("tolerance must be positive".into()));
            }
            let power = map.power();
            let dets = detect_map(power.view(), map.f_tx_grid(), map.f_rx_grid(), &cfar)?;
            let m = compute_metrics(&[evaluate_iteration(&dets, &truths, tol, tol)])?;
            let mut out = io::stdout().lock();
            writeln!(out, "method,p_md,r_fa,rmse_naf,n_detections")?;
            writeln!(out, "{label},{},{},{},{}", m.p_md, m.r_fa, m.rmse_naf, dets.len())?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
