//! `amfm`: AM-FM demodulation, KNN training and head-direction detection over
//! PNM frames.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;

use amfm_core::amfm::{am_image, analytic_image, fm_image, phase_image, Demodulator, Selection};
use amfm_core::bench;
use amfm_core::detect::{train_knn, KnnModel};
use amfm_core::gabor::build_filterbank;
use amfm_core::overlay::save_overlay;
use amfm_core::pipeline::{analyze_frame, FrameReport, PipelineConfig};
use amfm_core::pnm::{load_pnm, save_pgm};
use amfm_core::Error;

const EXIT_USAGE: u8 = 1;
const EXIT_IO: u8 = 2;
const EXIT_MODEL: u8 = 3;
const EXIT_ABSTAIN: u8 = 4;
const EXIT_CHECK_FAILED: u8 = 5;

#[derive(Parser, Debug)]
#[command(
    name = "amfm",
    version,
    about = "AM-FM demodulation and head-direction detection"
)]
struct Cli {
    #[command(flatten)]
    opts: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

/// Pipeline options; each overrides the same key from `--config`.
#[derive(Args, Debug, Default)]
struct GlobalOpts {
    /// File of key=value lines applied before the flags below
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Side of the square KNN blocks [default: 60]
    #[arg(long, global = true)]
    block_size: Option<usize>,
    /// Step between KNN blocks [default: 30]
    #[arg(long, global = true)]
    stride: Option<usize>,
    /// Side of the back-of-head density window [default: 200]
    #[arg(long, global = true)]
    head_window: Option<usize>,
    /// Stripe columns kept before the density scan [default: 60]
    #[arg(long, global = true)]
    top_columns: Option<usize>,
    #[arg(long, global = true)]
    canny_sigma: Option<f64>,
    #[arg(long, global = true)]
    canny_lo: Option<f64>,
    #[arg(long, global = true)]
    canny_hi: Option<f64>,
    /// Minimum skin fraction of a face block [default: 0.25]
    #[arg(long, global = true)]
    skin_frac: Option<f64>,
    /// Smallest skin region considered for head association [default: 100]
    #[arg(long, global = true)]
    min_skin_area: Option<usize>,
    /// Face direction rule: majority or fig412 [default: majority]
    #[arg(long, global = true)]
    classifier: Option<String>,
    /// Worker threads; 0 picks one per core
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the AM and FM images of a frame
    Demod {
        input: PathBuf,
        #[arg(long)]
        out_am: Option<PathBuf>,
        #[arg(long)]
        out_fm: Option<PathBuf>,
        /// Scale group (0-3) or `all`
        #[arg(long, default_value = "all")]
        scale: String,
        /// Also write every channel's IA and IP as PGMs into this directory
        #[arg(long, value_name = "DIR")]
        dump_channels: Option<PathBuf>,
    },
    /// Build a KNN model from a manifest of `path,label` lines
    TrainKnn {
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Neighbours consulted per query (odd)
        #[arg(long, default_value_t = 3)]
        k: usize,
    },
    /// Detect faces and backs of heads and classify their direction
    Detect {
        /// A frame or a directory of .ppm/.pgm/.pnm frames
        input: PathBuf,
        #[arg(long)]
        model: PathBuf,
        /// JSON Lines output, one object per frame; `-` for stdout
        #[arg(long)]
        json: PathBuf,
        #[arg(long, value_name = "DIR")]
        overlay_dir: Option<PathBuf>,
    },
    /// Run the synthetic self-checks and print one line per check
    Bench,
}

/// An error with the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

/// Exit code for a core error raised while handling input frames.
fn input_code(e: &Error) -> u8 {
    match e {
        Error::InvalidParameter(_) => EXIT_USAGE,
        Error::Model(_) => EXIT_MODEL,
        Error::Dimensions(_) | Error::Empty(_) | Error::Abstain(_) => EXIT_ABSTAIN,
        _ => EXIT_IO,
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::new(input_code(&e), e.to_string())
    }
}

fn config(opts: &GlobalOpts) -> Result<PipelineConfig, Failure> {
    let mut cfg = PipelineConfig::default();
    if let Some(path) = &opts.config {
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", path.display())))?;
        cfg.apply_text(&text)
            .map_err(|e| Failure::new(EXIT_USAGE, format!("{}: {e}", path.display())))?;
    }
    let c = &mut cfg;
    let overrides: [(&str, Option<String>); 10] = [
        ("block-size", opts.block_size.map(|v| v.to_string())),
        ("stride", opts.stride.map(|v| v.to_string())),
        ("head-window", opts.head_window.map(|v| v.to_string())),
        ("top-columns", opts.top_columns.map(|v| v.to_string())),
        ("canny-sigma", opts.canny_sigma.map(|v| v.to_string())),
        ("canny-lo", opts.canny_lo.map(|v| v.to_string())),
        ("canny-hi", opts.canny_hi.map(|v| v.to_string())),
        ("skin-frac", opts.skin_frac.map(|v| v.to_string())),
        ("min-skin-area", opts.min_skin_area.map(|v| v.to_string())),
        ("classifier", opts.classifier.clone()),
    ];
    for (key, value) in overrides {
        if let Some(v) = value {
            c.set(key, &v)
                .map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?;
        }
    }
    cfg.validate()
        .map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?;
    Ok(cfg)
}

fn parse_scale(s: &str) -> Result<Selection, Failure> {
    if s == "all" {
        return Ok(Selection::All);
    }
    match s.parse::<usize>() {
        Ok(g) if g < 4 => Ok(Selection::ScaleGroup(g)),
        _ => Err(Failure::new(
            EXIT_USAGE,
            format!("--scale expects 0-3 or all, got {s:?}"),
        )),
    }
}

fn create_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", dir.display())))
}

fn demod(
    input: &Path,
    out_am: Option<&Path>,
    out_fm: Option<&Path>,
    scale: &str,
    dump: Option<&Path>,
) -> Result<(), Failure> {
    let selection = parse_scale(scale)?;
    if out_am.is_none() && out_fm.is_none() && dump.is_none() {
        return Err(Failure::new(
            EXIT_USAGE,
            "nothing to write: give --out-am, --out-fm or --dump-channels",
        ));
    }
    let img = load_pnm(input)?.into_gray();
    let bank = build_filterbank();
    let asig = analytic_image(&img)?;
    let dm = Demodulator::new(&asig, &bank)?;
    let field = dm.dominant(selection)?;
    if let Some(p) = out_am {
        save_pgm(&am_image(&field), p)?;
    }
    if let Some(p) = out_fm {
        save_pgm(&fm_image(&field), p)?;
    }
    if let Some(dir) = dump {
        create_dir(dir)?;
        for (i, f) in bank.filters().iter().enumerate() {
            if let Selection::ScaleGroup(g) = selection {
                if f.scale_group != g {
                    continue;
                }
            }
            let ch = dm.channel(i);
            let peak = ch.ia.min_max().1;
            let ia = if peak > 0.0 {
                ch.ia.map(|v| v / peak * 255.0)
            } else {
                ch.ia.clone()
            };
            save_pgm(&ia, dir.join(format!("ch{i:02}_ia.pgm")))?;
            save_pgm(&phase_image(&ch.ip), dir.join(format!("ch{i:02}_ip.pgm")))?;
        }
    }
    Ok(())
}

fn train(manifest: &Path, out: &Path, k: usize, cfg: &PipelineConfig) -> Result<(), Failure> {
    let model = train_knn(manifest, k, cfg.block_size).map_err(|e| match e {
        Error::Io { .. } => Failure::new(EXIT_IO, e.to_string()),
        _ => Failure::new(EXIT_MODEL, e.to_string()),
    })?;
    info!("trained {} samples", model.len());
    model.save(out).map_err(|e| Failure::new(EXIT_IO, e.to_string()))
}

fn is_frame(p: &Path) -> bool {
    matches!(
        p.extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase)
            .as_deref(),
        Some("ppm" | "pgm" | "pnm")
    )
}

/// Frames to analyze, sorted by file name when `input` is a directory.
fn frame_list(input: &Path) -> Result<Vec<PathBuf>, Failure> {
    if !input.is_dir() {
        return Ok(vec![input.to_path_buf()]);
    }
    let io_err = |e: io::Error| Failure::new(EXIT_IO, format!("{}: {e}", input.display()));
    let mut frames = Vec::new();
    for entry in fs::read_dir(input).map_err(io_err)? {
        let p = entry.map_err(io_err)?.path();
        if p.is_file() && is_frame(&p) {
            frames.push(p);
        }
    }
    frames.sort();
    Ok(frames)
}

fn frame_id(p: &Path) -> String {
    p.file_name()
        .unwrap_or(p.as_os_str())
        .to_string_lossy()
        .into_owned()
}

fn detect(
    input: &Path,
    model_path: &Path,
    json: &Path,
    overlay_dir: Option<&Path>,
    cfg: &PipelineConfig,
) -> Result<(), Failure> {
    let model = KnnModel::load(model_path).map_err(|e| Failure::new(EXIT_MODEL, e.to_string()))?;
    if model.block_dims() != (cfg.block_size, cfg.block_size) {
        return Err(Failure::new(
            EXIT_MODEL,
            format!(
                "model blocks are {:?} but --block-size is {}",
                model.block_dims(),
                cfg.block_size
            ),
        ));
    }
    let frames = frame_list(input)?;
    if frames.is_empty() {
        return Err(Failure::new(EXIT_IO, format!("{}: no frames", input.display())));
    }
    if let Some(dir) = overlay_dir {
        create_dir(dir)?;
    }
    let bank = build_filterbank();
    let analyze = |path: &PathBuf| -> Result<FrameReport, Failure> {
        let rgb = load_pnm(path)
            .map_err(|e| Failure::new(EXIT_IO, e.to_string()))?
            .into_rgb();
        let report = analyze_frame(&frame_id(path), &rgb, &model, &bank, cfg)?;
        let t = report.timings;
        info!(
            "{}: demodulation {:.2?}, faces {:.2?}, heads {:.2?}",
            report.frame, t.demodulation, t.faces, t.heads
        );
        if let Some(dir) = overlay_dir {
            let stem = path.file_stem().unwrap_or_default().to_string_lossy();
            save_overlay(&rgb, &report.detections, dir.join(format!("{stem}.ppm")))?;
        }
        Ok(report)
    };
    #[cfg(feature = "parallel")]
    let reports: Vec<_> = {
        use rayon::prelude::*;
        frames.par_iter().map(analyze).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let reports: Vec<_> = frames.iter().map(analyze).collect();

    let mut text = String::new();
    let mut abstained = 0;
    for r in reports {
        let r = r?;
        abstained += r.abstained() as usize;
        text.push_str(&serde_json::to_string(&r).expect("reports serialize"));
        text.push('\n');
    }
    if json == Path::new("-") {
        io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::new(EXIT_IO, format!("stdout: {e}")))?;
    } else {
        fs::write(json, text).map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", json.display())))?;
    }
    if abstained == frames.len() {
        return Err(Failure::new(EXIT_ABSTAIN, "every frame abstained"));
    }
    Ok(())
}

fn run_bench(cfg: &PipelineConfig) -> Result<(), Failure> {
    let results = bench::run_all(cfg);
    for r in &results {
        println!("{r}");
        for d in &r.details {
            println!("    {d}");
        }
    }
    let failed = results.iter().filter(|r| !r.pass).count();
    if failed > 0 {
        return Err(Failure::new(
            EXIT_CHECK_FAILED,
            format!("{failed} check(s) failed"),
        ));
    }
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<(), Failure> {
    let cfg = config(&cli.opts)?;
    match &cli.command {
        Command::Demod {
            input,
            out_am,
            out_fm,
            scale,
            dump_channels,
        } => demod(
            input,
            out_am.as_deref(),
            out_fm.as_deref(),
            scale,
            dump_channels.as_deref(),
        ),
        Command::TrainKnn { manifest, out, k } => train(manifest, out, *k, &cfg),
        Command::Detect {
            input,
            model,
            json,
            overlay_dir,
        } => detect(input, model, json, overlay_dir.as_deref(), &cfg),
        Command::Bench => run_bench(&cfg),
    }
}

#[cfg(feature = "parallel")]
fn with_threads(threads: usize, f: impl FnOnce() -> Result<(), Failure> + Send) -> Result<(), Failure> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Failure::new(EXIT_USAGE, format!("thread pool: {e}")))?;
    pool.install(f)
}

#[cfg(not(feature = "parallel"))]
fn with_threads(threads: usize, f: impl FnOnce() -> Result<(), Failure>) -> Result<(), Failure> {
    if threads > 1 {
        log::warn!("built without the parallel feature; --threads {threads} ignored");
    }
    f()
}

fn run(args: impl IntoIterator<Item = OsString>) -> u8 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    match with_threads(cli.opts.threads, || dispatch(&cli)) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("amfm: {}", f.message);
            f.code
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    ExitCode::from(run(std::env::args_os()))
}
