use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nested_tbcc::bounds::union_bound_pb;
use nested_tbcc::design::{
    design_nested, search_fec, search_vq_extension, CalibrationConfig, FecSearchConfig, NestedDesignConfig, Provenance,
    VqSearchConfig,
};
use nested_tbcc::encoder::TailbitingCode;
use nested_tbcc::error::{Error, Result};
use nested_tbcc::io::{
    bound_csv, dfree_csv, fmt_sig, parse_spectrum_csv, read_bit_file, read_text, spectrum_csv, write_bit_file, write_text, CodeFile,
};
use nested_tbcc::key_agreement::{enroll_with, reconstruct_with};
use nested_tbcc::report::{
    default_fixtures, evaluate, fixture_overlay, overlay_csv, region_csv, region_curve, region_series, uniform_grid,
    EvaluationConfig, EvaluationRow,
};
use nested_tbcc::sim::{simulate_distortion, simulate_end_to_end, simulate_fer_with, FerDecoder, StopRule, TrialReport};
use nested_tbcc::spectrum::{free_distance, weight_enumerator};
use nested_tbcc::wava::WavaConfig;

#[derive(Parser)]
#[command(name = "tbcc", version, about = "Design, analyze and simulate nested tailbiting convolutional codes")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct SimArgs {
    /// WAVA iterations.
    #[arg(long, default_value_t = 4)]
    iterations: usize,
    #[arg(long, default_value_t = 10_000_000)]
    max_trials: u64,
    #[arg(long, default_value_t = 50)]
    target_errors: u64,
}

impl SimArgs {
    fn wava(&self) -> Result<WavaConfig> {
        WavaConfig::with_iterations(self.iterations)
    }

    fn stop(&self) -> StopRule {
        StopRule::new(self.max_trials, self.target_errors)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Random search for a rate-1/n error-correction code.
    DesignFec {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        k_fec: usize,
        #[arg(long)]
        target_pb: f64,
        #[arg(long, default_value_t = 1000)]
        w_max: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Spectrum truncation weight (default min(N, 4mn)).
        #[arg(long)]
        d_max: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Random search for extra quantizer inputs on top of a code.
    DesignVq {
        #[arg(long)]
        code: PathBuf,
        /// Total inputs after extension.
        #[arg(long)]
        k_vq: usize,
        #[arg(long, default_value_t = 1000)]
        w_max: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Skip the injectivity check at the code's length.
        #[arg(long)]
        allow_non_injective: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Full nested design for a noise level and target block error rate.
    DesignNested {
        #[arg(long)]
        p_a: f64,
        #[arg(long)]
        target_pb: f64,
        #[arg(long)]
        k_fec: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 1000)]
        w_max: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        sim: SimArgs,
        /// Bisection steps of the crossover calibration.
        #[arg(long, default_value_t = 12)]
        calibration_steps: usize,
        #[arg(long, default_value_t = 2000)]
        distortion_blocks: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Weight spectrum as CSV `d,A_d`.
    Spectrum {
        #[arg(long, alias = "pair")]
        code: PathBuf,
        /// Largest weight to count (default N).
        #[arg(long)]
        d_max: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Free distance and multiplicity as CSV `d_free,A_free`.
    Dfree {
        #[arg(long, alias = "pair")]
        code: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Union bound `pc,PB_UB` from a spectrum CSV.
    Bound {
        #[arg(long)]
        spectrum: PathBuf,
        #[arg(long)]
        block_length: usize,
        /// Crossover probabilities; default is a 50-point grid on (0, 0.5].
        #[arg(long, value_delimiter = ',')]
        p: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Block error rate over a BSC; CSV `p,fer,halfwidth,trials,errors`.
    SimFer {
        #[arg(long, alias = "pair")]
        code: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        p: Vec<f64>,
        /// Exact minimum-distance decoding instead of WAVA.
        #[arg(long)]
        ml: bool,
        /// Target the run is meant to verify; enables the low-count warning.
        #[arg(long)]
        target_pb: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        sim: SimArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mean quantization distortion; CSV `q_bar,halfwidth,blocks`.
    SimDistortion {
        #[arg(long, alias = "pair")]
        code: PathBuf,
        #[arg(long, default_value_t = 2000)]
        blocks: u64,
        #[arg(long, default_value_t = 4)]
        iterations: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Key mismatch rate of enrollment plus reconstruction; CSV `p_a,pb,halfwidth,trials,errors`.
    SimE2e {
        #[arg(long, alias = "code")]
        pair: PathBuf,
        #[arg(long)]
        p_a: f64,
        #[arg(long)]
        target_pb: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        sim: SimArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Enroll measurements (one per line); writes keys and helper data.
    Enroll {
        #[arg(long, alias = "code")]
        pair: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        key_out: PathBuf,
        #[arg(long)]
        helper_out: PathBuf,
        #[arg(long, default_value_t = 4)]
        iterations: usize,
    },
    /// Reconstruct keys from measurements and helper data (line by line).
    Reconstruct {
        #[arg(long, alias = "code")]
        pair: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        helper: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 4)]
        iterations: usize,
    },
    /// Parameter row for a designed pair.
    Evaluate {
        #[arg(long, alias = "code")]
        pair: PathBuf,
        #[arg(long)]
        p_a: f64,
        #[arg(long)]
        target_pb: f64,
        #[arg(long, default_value = "pair")]
        label: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        sim: SimArgs,
        #[arg(long, default_value_t = 12)]
        calibration_steps: usize,
        #[arg(long, default_value_t = 2000)]
        distortion_blocks: u64,
        /// Also simulate the artificial channel and the full pipeline.
        #[arg(long)]
        check: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Region boundary `q,Rs,Rw`; with `--overlay`, long-format `series,x,y`
    /// including quantizer bounds and fixture data.
    Region {
        #[arg(long, default_value_t = 0.0149)]
        p_a: f64,
        #[arg(long, default_value_t = 101)]
        points: usize,
        #[arg(long)]
        overlay: bool,
        /// Block lengths for the quantizer curves in overlay mode.
        #[arg(long, value_delimiter = ',', default_values_t = [384usize, 512, 1024])]
        block_lengths: Vec<usize>,
        /// Fixture CSVs for overlay mode (default: bundled fixtures).
        #[arg(long)]
        fixture: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_code(path: &Path) -> Result<TailbitingCode> {
    CodeFile::read(path)?.to_code()
}

fn report_line(x: f64, r: &TrialReport) -> String {
    format!("{},{},{},{},{}\n", fmt_sig(x), fmt_sig(r.estimate), fmt_sig(r.halfwidth), r.trials, r.events)
}

fn warn_low_count(r: &TrialReport, target: Option<f64>) {
    if target.is_some_and(|t| t <= 1e-6) && r.events < 20 {
        eprintln!("warning: only {} errors observed; the estimate at this target is unreliable", r.events);
    }
}

fn emit_code(file: &CodeFile, out: Option<&Path>) -> Result<()> {
    write_text(out, &(file.to_json()? + "\n"))
}

fn run(cli: Cli) -> Result<()> {
    if let Some(w) = cli.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build_global()
            .map_err(|e| Error::InvalidInput(format!("worker pool: {e}")))?;
    }
    match cli.command {
        Command::DesignFec { n, m, k_fec, target_pb, w_max, seed, d_max, out } => {
            let r = search_fec(&FecSearchConfig { n, m, k_fec, target_pb, w_max, seed, d_max })?;
            if r.truncation_sensitive {
                eprintln!("warning: crossover moved from {} to {} when doubling d_max", fmt_sig(r.p_c), fmt_sig(r.p_c_recheck));
            }
            eprintln!("candidate {} of {w_max}: p_c = {}", r.index, fmt_sig(r.p_c));
            let mut file = CodeFile::from_code(&r.code(k_fec)?);
            file.provenance = Some(Provenance {
                seed: Some(seed),
                w_max: Some(w_max),
                target_pb: Some(target_pb),
                p_c_union_bound: Some(r.p_c),
                spectrum_head: r.spectrum.head(8),
                ..Provenance::default()
            });
            emit_code(&file, out.as_deref())
        }
        Command::DesignVq { code, k_vq, w_max, seed, allow_non_injective, out } => {
            let parent = load_code(&code)?;
            let ell = parent.sections();
            let r = search_vq_extension(&VqSearchConfig {
                parent: parent.spec().clone(),
                k_vq,
                w_max,
                seed,
                injective_at: (!allow_non_injective).then_some(ell),
            })?;
            eprintln!("candidate {} of {w_max}: d_free = {}, A_free = {}", r.index, r.report.d_free, r.report.a_free);
            let mut file = CodeFile::from_code(&TailbitingCode::unfrozen(r.spec, ell)?);
            file.provenance = Some(Provenance { seed: Some(seed), w_max: Some(w_max), ..Provenance::default() });
            emit_code(&file, out.as_deref())
        }
        Command::DesignNested { p_a, target_pb, k_fec, n, m, w_max, seed, sim, calibration_steps, distortion_blocks, out } => {
            let mut cfg = NestedDesignConfig::new(p_a, target_pb, k_fec, n, m, seed, w_max);
            cfg.wava = sim.wava()?;
            cfg.calibration =
                CalibrationConfig { max_trials: sim.max_trials, target_errors: sim.target_errors, steps: calibration_steps };
            cfg.distortion_blocks = distortion_blocks;
            let d = design_nested(&cfg)?;
            if let Some(r) = &d.calibration.report {
                warn_low_count(r, Some(target_pb));
            }
            eprintln!(
                "p_c (bound) = {}, p_c (simulated) = {}, budget = {}, q = {} +- {}, K_vq = {}, frozen = {}",
                fmt_sig(d.fec.p_c),
                fmt_sig(d.calibration.p_c),
                fmt_sig(d.budget),
                fmt_sig(d.distortion.estimate),
                fmt_sig(d.distortion.halfwidth),
                d.pair.k_vq(),
                d.frozen_times.len()
            );
            emit_code(&CodeFile::from_pair(&d.pair), out.as_deref())
        }
        Command::Spectrum { code, d_max, out } => {
            let code = load_code(&code)?;
            let s = weight_enumerator(&code, d_max.unwrap_or(code.length()))?;
            write_text(out.as_deref(), &spectrum_csv(&s))
        }
        Command::Dfree { code, out } => {
            let r = free_distance(load_code(&code)?.spec());
            if r.degenerate {
                eprintln!("warning: a nonzero input sequence yields the zero output");
            }
            write_text(out.as_deref(), &dfree_csv(&r))
        }
        Command::Bound { spectrum, block_length, p, out } => {
            let s = parse_spectrum_csv(&read_text(&spectrum)?, block_length)?;
            let grid = if p.is_empty() { (1..=50).map(|i| i as f64 / 100.0).collect() } else { p };
            let points = grid.into_iter().map(|p| Ok((p, union_bound_pb(&s, p)?))).collect::<Result<Vec<_>>>()?;
            if points.iter().any(|(_, ub)| ub.truncated) {
                eprintln!("note: spectrum is truncated; the bound omits heavier terms");
            }
            write_text(out.as_deref(), &bound_csv(&points))
        }
        Command::SimFer { code, p, ml, target_pb, seed, sim, out } => {
            let code = load_code(&code)?;
            let decoder = if ml { FerDecoder::MaximumLikelihood } else { FerDecoder::Wava(sim.wava()?) };
            let mut text = String::from("p,fer,halfwidth,trials,errors\n");
            for pc in p {
                let r = simulate_fer_with(&code, pc, decoder, &sim.stop(), seed)?;
                warn_low_count(&r, target_pb);
                text += &report_line(pc, &r);
            }
            write_text(out.as_deref(), &text)
        }
        Command::SimDistortion { code, blocks, iterations, seed, out } => {
            let r = simulate_distortion(&load_code(&code)?, &WavaConfig::with_iterations(iterations)?, blocks, seed)?;
            let text = format!("q_bar,halfwidth,blocks\n{},{},{}\n", fmt_sig(r.estimate), fmt_sig(r.halfwidth), r.blocks);
            write_text(out.as_deref(), &text)
        }
        Command::SimE2e { pair, p_a, target_pb, seed, sim, out } => {
            let pair = CodeFile::read(&pair)?.to_pair()?;
            let r = simulate_end_to_end(&pair, p_a, &sim.wava()?, &sim.stop(), seed)?;
            warn_low_count(&r, target_pb);
            write_text(out.as_deref(), &(String::from("p_a,pb,halfwidth,trials,errors\n") + &report_line(p_a, &r)))
        }
        Command::Enroll { pair, input, key_out, helper_out, iterations } => {
            let pair = CodeFile::read(&pair)?.to_pair()?;
            let cfg = WavaConfig::with_iterations(iterations)?;
            let records = read_bit_file(&input)?.iter().map(|x| enroll_with(&pair, x, &cfg)).collect::<Result<Vec<_>>>()?;
            write_bit_file(&key_out, &records.iter().map(|r| r.secret_key.clone()).collect::<Vec<_>>())?;
            write_bit_file(&helper_out, &records.iter().map(|r| r.helper_data.clone()).collect::<Vec<_>>())
        }
        Command::Reconstruct { pair, input, helper, out, iterations } => {
            let pair = CodeFile::read(&pair)?.to_pair()?;
            let cfg = WavaConfig::with_iterations(iterations)?;
            let ys = read_bit_file(&input)?;
            let ws = read_bit_file(&helper)?;
            if ys.len() != ws.len() {
                return Err(Error::InvalidInput(format!("{} measurements but {} helper lines", ys.len(), ws.len())));
            }
            let keys = ys.iter().zip(&ws).map(|(y, w)| reconstruct_with(&pair, y, w, &cfg)).collect::<Result<Vec<_>>>()?;
            match out {
                Some(path) => write_bit_file(&path, &keys),
                None => write_text(None, &nested_tbcc::io::format_bit_lines(&keys)),
            }
        }
        Command::Evaluate {
            pair,
            p_a,
            target_pb,
            label,
            seed,
            sim,
            calibration_steps,
            distortion_blocks,
            check,
            out,
        } => {
            let pair = CodeFile::read(&pair)?.to_pair()?;
            let cfg = EvaluationConfig {
                p_a,
                target_pb,
                wava: sim.wava()?,
                calibration: CalibrationConfig {
                    max_trials: sim.max_trials,
                    target_errors: sim.target_errors,
                    steps: calibration_steps,
                },
                distortion_blocks,
                check_stop: check.then(|| sim.stop()),
                seed,
            };
            let e = evaluate(&pair, &label, &cfg)?;
            if let Some(r) = &e.calibration.report {
                warn_low_count(r, Some(target_pb));
            }
            if let (Some(a), Some(b)) = (&e.artificial_channel, &e.end_to_end) {
                eprintln!(
                    "artificial channel FER = {} +- {}; end-to-end = {} +- {}",
                    fmt_sig(a.estimate),
                    fmt_sig(a.halfwidth),
                    fmt_sig(b.estimate),
                    fmt_sig(b.halfwidth)
                );
            }
            write_text(out.as_deref(), &format!("{}\n{}\n", EvaluationRow::csv_header(), e.row.csv_line()))
        }
        Command::Region { p_a, points, overlay, block_lengths, fixture, out } => {
            let grid = uniform_grid(points);
            if overlay {
                let mut pts = region_series(p_a, &grid, &block_lengths)?;
                let files = if fixture.is_empty() { default_fixtures() } else { fixture };
                pts.extend(fixture_overlay(&files)?);
                write_text(out.as_deref(), &overlay_csv(&pts))
            } else {
                write_text(out.as_deref(), &region_csv(&region_curve(p_a, &grid)?))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::DesignFailure(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}
