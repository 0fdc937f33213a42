//! Command-line front end over the library: pattern recovery and
//! synthesis, scene rendering, cloud retargeting, detection scoring, and
//! dataset inspection.
//!
//! Exit codes: 0 on success, 1 when the operating system fails us (missing
//! files, permissions), 2 for anything wrong with inputs (malformed files,
//! invalid values, bad flag combinations).

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{ArgGroup, Args, Parser, Subcommand};

use lidarcs::eval::{evaluate, EvalConfig, EvalError};
use lidarcs::geom::PointCloud;
use lidarcs::io::{self, IoError};
use lidarcs::pattern::{
    self, beam_decompose_cloud, beam_decompose_pattern, extract_pattern, synthesize_pattern,
    PatternError, RayPattern, SensorSpec,
};
use lidarcs::resample::{nnds, uniform_downsample, ResampleError};
use lidarcs::scene::{build_cube_map, query_pattern, query_patterns, SceneError};

#[derive(Parser)]
#[command(
    name = "lidarcs",
    version,
    about = "Cross-sensor lidar simulation and retargeting toolkit"
)]
struct Cli {
    /// Worker threads for rendering and batch queries. Overrides the
    /// LIDARCS_THREADS environment variable; defaults to all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Recover a sensor's ray pattern from recorded cloud files
    ExtractPattern(ExtractPatternArgs),
    /// Generate an idealized ray pattern from a sensor description
    SynthPattern(SynthPatternArgs),
    /// Render a scene once and simulate captures for each pattern
    Render(RenderArgs),
    /// Retarget a recorded cloud to another sensor's scan lines
    Resample(ResampleArgs),
    /// Score detections against ground-truth boxes
    Eval(EvalArgs),
    /// Summarize a dataset manifest
    DatasetStats(DatasetStatsArgs),
    /// Summarize a ray-pattern file
    PatternStats(PatternStatsArgs),
}

#[derive(Args)]
struct ExtractPatternArgs {
    /// Input cloud files, one per frame
    #[arg(required = true)]
    clouds: Vec<PathBuf>,
    /// Angular deduplication tolerance in degrees
    #[arg(long, default_value_t = pattern::DEFAULT_DEDUP_TOLERANCE_DEG)]
    tolerance: f64,
    /// Sensor name to record in the pattern file
    #[arg(long)]
    sensor_name: Option<String>,
    /// Output pattern file
    #[arg(long, short)]
    output: PathBuf,
}

#[derive(Args)]
struct SynthPatternArgs {
    /// Built-in sensor model: vld-16, vld-32, vld-64, vld-128, or once-40
    #[arg(long, conflicts_with_all = ["beams", "elevation_min", "elevation_max"])]
    sensor: Option<String>,
    /// Beam count for a custom sensor
    #[arg(long, requires_all = ["elevation_min", "elevation_max"])]
    beams: Option<usize>,
    /// Lowest beam elevation in degrees (custom sensor)
    #[arg(long, allow_negative_numbers = true)]
    elevation_min: Option<f64>,
    /// Highest beam elevation in degrees (custom sensor)
    #[arg(long, allow_negative_numbers = true)]
    elevation_max: Option<f64>,
    /// Azimuth step in degrees (default 0.2)
    #[arg(long)]
    azimuth_resolution: Option<f64>,
    /// Sensor name to record in the pattern file
    #[arg(long)]
    name: Option<String>,
    /// Output pattern file
    #[arg(long, short)]
    output: PathBuf,
}

#[derive(Args)]
struct RenderArgs {
    /// Scene description file
    #[arg(long)]
    scene: PathBuf,
    /// Pattern file to query; repeat for multiple sensors
    #[arg(long = "pattern", required = true)]
    patterns: Vec<PathBuf>,
    /// Max range in meters; one value for all patterns or one per pattern
    #[arg(long = "max-range")]
    max_ranges: Vec<f64>,
    /// Cube-map face resolution in pixels
    #[arg(long, default_value_t = 2048)]
    face_resolution: usize,
    /// Point splat radius in meters
    #[arg(long, default_value_t = 0.05)]
    splat_radius: f64,
    /// Frame id used for output file names
    #[arg(long, default_value = "000000")]
    frame_id: String,
    /// Directory for the simulated clouds (one subdirectory per sensor)
    #[arg(long)]
    output_dir: PathBuf,
}

#[derive(Args)]
#[command(group = ArgGroup::new("mode").required(true).args(["target_pattern", "uniform_keep_every"]))]
struct ResampleArgs {
    /// Input cloud file
    #[arg(long)]
    input: PathBuf,
    /// Pattern file of the sensor to retarget to
    #[arg(long)]
    target_pattern: Option<PathBuf>,
    /// Keep every k-th scan line from the bottom instead
    #[arg(long)]
    uniform_keep_every: Option<usize>,
    /// Elevation gap that separates scan lines, degrees
    #[arg(long, default_value_t = pattern::DEFAULT_GAP_THRESHOLD_DEG)]
    gap_threshold: f64,
    /// Output cloud file
    #[arg(long, short)]
    output: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    /// Ground-truth annotation file
    #[arg(long)]
    ground_truth: PathBuf,
    /// Detection file (records must carry scores)
    #[arg(long)]
    detections: PathBuf,
    /// Ignore boxes whose centers are beyond this planar range, meters
    #[arg(long, default_value_t = 70.0)]
    max_range: f64,
}

#[derive(Args)]
struct DatasetStatsArgs {
    /// Manifest file
    manifest: PathBuf,
}

#[derive(Args)]
struct PatternStatsArgs {
    /// Pattern file
    pattern: PathBuf,
    /// Elevation gap that separates scan lines, degrees
    #[arg(long, default_value_t = pattern::DEFAULT_GAP_THRESHOLD_DEG)]
    gap_threshold: f64,
}

// ---------------------------------------------------------------------------
// Error plumbing.

enum CliError {
    Io(IoError),
    /// Anything wrong with values or flag combinations.
    Data(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(e) => e.exit_code() as u8,
            CliError::Data(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Io(e) => e.fmt(f),
            CliError::Data(msg) => f.write_str(msg),
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        CliError::Io(e)
    }
}

macro_rules! data_error_from {
    ($($ty:ty),*) => {$(
        impl From<$ty> for CliError {
            fn from(e: $ty) -> Self {
                CliError::Data(e.to_string())
            }
        }
    )*};
}
data_error_from!(PatternError, SceneError, ResampleError, EvalError);

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = configure_threads(cli.threads) {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn configure_threads(flag: Option<usize>) -> Result<(), String> {
    let threads = match flag {
        Some(n) => Some(n),
        None => match std::env::var("LIDARCS_THREADS") {
            Ok(value) => Some(
                value
                    .parse::<usize>()
                    .map_err(|_| format!("LIDARCS_THREADS must be a positive integer, got {value:?}"))?,
            ),
            Err(_) => None,
        },
    };
    if let Some(n) = threads {
        if n == 0 {
            return Err("thread count must be at least 1".into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::ExtractPattern(args) => run_extract_pattern(args),
        Command::SynthPattern(args) => run_synth_pattern(args),
        Command::Render(args) => run_render(args),
        Command::Resample(args) => run_resample(args),
        Command::Eval(args) => run_eval(args),
        Command::DatasetStats(args) => run_dataset_stats(args),
        Command::PatternStats(args) => run_pattern_stats(args),
    }
}

// ---------------------------------------------------------------------------
// Subcommands.

fn run_extract_pattern(args: ExtractPatternArgs) -> Result<(), CliError> {
    let frames: Vec<PointCloud> = args
        .clouds
        .iter()
        .map(|p| io::read_cloud(p))
        .collect::<Result<_, _>>()?;
    let mut extracted = extract_pattern(&frames, args.tolerance)?;
    if let Some(name) = args.sensor_name {
        extracted.sensor_name = name;
    }
    io::write_pattern(&args.output, &extracted)?;
    println!(
        "extracted {}: {} rays from {} frames (tolerance {} deg)",
        extracted.sensor_name,
        extracted.len(),
        frames.len(),
        args.tolerance
    );
    println!("wrote {}", args.output.display());
    Ok(())
}

fn builtin_spec(name: &str) -> Option<SensorSpec> {
    Some(match name.to_ascii_lowercase().as_str() {
        "vld-16" => SensorSpec::vld_16(),
        "vld-32" => SensorSpec::vld_32(),
        "vld-64" => SensorSpec::vld_64(),
        "vld-128" => SensorSpec::vld_128(),
        "once-40" => SensorSpec::once_40(),
        _ => return None,
    })
}

fn run_synth_pattern(args: SynthPatternArgs) -> Result<(), CliError> {
    let mut spec = match (&args.sensor, args.beams) {
        (Some(name), _) => builtin_spec(name).ok_or_else(|| {
            CliError::Data(format!(
                "unknown sensor {name:?} (expected vld-16, vld-32, vld-64, vld-128, or once-40)"
            ))
        })?,
        (None, Some(beams)) => SensorSpec::new(
            "custom",
            beams,
            args.elevation_min.expect("required by clap"),
            args.elevation_max.expect("required by clap"),
        ),
        (None, None) => {
            return Err(CliError::Data(
                "pass --sensor <model> or --beams with --elevation-min/--elevation-max".into(),
            ))
        }
    };
    if let Some(res) = args.azimuth_resolution {
        spec = spec.with_azimuth_resolution(res);
    }
    if let Some(name) = args.name {
        spec.name = name;
    }
    let synthesized = synthesize_pattern(&spec)?;
    io::write_pattern(&args.output, &synthesized)?;
    println!(
        "synthesized {}: {} beams x {} azimuth steps = {} rays",
        synthesized.sensor_name,
        spec.beam_count,
        spec.azimuth_steps(),
        synthesized.len()
    );
    println!("wrote {}", args.output.display());
    Ok(())
}

fn run_render(args: RenderArgs) -> Result<(), CliError> {
    let patterns: Vec<RayPattern> = args
        .patterns
        .iter()
        .map(|p| io::read_pattern(p))
        .collect::<Result<_, _>>()?;
    let max_ranges: Vec<f64> = match args.max_ranges.len() {
        0 => vec![100.0; patterns.len()],
        1 => vec![args.max_ranges[0]; patterns.len()],
        n if n == patterns.len() => args.max_ranges.clone(),
        n => {
            return Err(CliError::Data(format!(
                "{n} --max-range values for {} patterns (pass one, or one per pattern)",
                patterns.len()
            )))
        }
    };
    let names: BTreeSet<&str> = patterns.iter().map(|p| p.sensor_name.as_str()).collect();
    if names.len() != patterns.len() {
        return Err(CliError::Data(
            "patterns must have distinct sensor names (outputs would collide)".into(),
        ));
    }

    let scene = io::read_scene(&args.scene)?;
    let render_start = Instant::now();
    let cube = build_cube_map(&scene, args.face_resolution, args.splat_radius)?;
    let render_ms = render_start.elapsed().as_secs_f64() * 1e3;

    // Time each pattern alone, then the whole batch; sharing the render is
    // the point, so the batch should cost little more than the largest
    // single query.
    let mut largest_single_ms = 0.0f64;
    for (pattern, &max_range) in patterns.iter().zip(&max_ranges) {
        let start = Instant::now();
        let cloud = query_pattern(&cube, pattern, max_range);
        largest_single_ms = largest_single_ms.max(start.elapsed().as_secs_f64() * 1e3);
        drop(cloud);
    }
    let batch_start = Instant::now();
    let clouds = query_patterns(&cube, &patterns, &max_ranges)?;
    let batch_ms = batch_start.elapsed().as_secs_f64() * 1e3;

    std::fs::create_dir_all(&args.output_dir).map_err(IoError::from)?;
    for (pattern, cloud) in patterns.iter().zip(&clouds) {
        let dir = args.output_dir.join(&pattern.sensor_name);
        std::fs::create_dir_all(&dir).map_err(IoError::from)?;
        let path = dir.join(format!("{}.bin", args.frame_id));
        let mut out = cloud.clone();
        out.frame_id = args.frame_id.clone();
        io::write_cloud(&path, &out)?;
        println!(
            "{}: {} returns / {} rays -> {}",
            pattern.sensor_name,
            cloud.len(),
            pattern.len(),
            path.display()
        );
    }
    println!(
        "render {:.1} ms; batch query {:.1} ms; largest single {:.1} ms; ratio {:.2}",
        render_ms,
        batch_ms,
        largest_single_ms,
        batch_ms / largest_single_ms.max(1e-9)
    );
    Ok(())
}

fn run_resample(args: ResampleArgs) -> Result<(), CliError> {
    let source = io::read_cloud(&args.input)?;
    let source_beams = beam_decompose_cloud(&source, args.gap_threshold)?.len();
    let output = match (&args.target_pattern, args.uniform_keep_every) {
        (Some(pattern_path), None) => {
            let target = io::read_pattern(pattern_path)?;
            nnds(&source, &target, args.gap_threshold)?
        }
        (None, Some(keep_every)) => uniform_downsample(&source, keep_every, args.gap_threshold)?,
        // clap's argument group guarantees exactly one mode.
        _ => unreachable!(),
    };
    let kept_beams = if output.is_empty() {
        0
    } else {
        beam_decompose_cloud(&output, args.gap_threshold)?.len()
    };
    io::write_cloud(&args.output, &output)?;
    println!(
        "kept {} of {} points ({} of {} scan lines) -> {}",
        output.len(),
        source.len(),
        kept_beams,
        source_beams,
        args.output.display()
    );
    Ok(())
}

fn run_eval(args: EvalArgs) -> Result<(), CliError> {
    let ground_truth = io::read_ground_truth(&args.ground_truth)?;
    let detections = io::read_detections(&args.detections)?;
    let config = EvalConfig {
        max_eval_range: args.max_range,
        ..EvalConfig::default()
    };
    let report = evaluate(&ground_truth, &detections, &config)?;
    for c in &report.categories {
        let marker = if c.has_gt { "" } else { " (no ground truth)" };
        println!(
            "{} ap={:.4} gt={} det={} tp={} fp={} fn={}{}",
            c.category,
            c.ap,
            c.gt_count,
            c.det_count,
            c.true_positives,
            c.false_positives,
            c.false_negatives,
            marker
        );
    }
    println!("mAP {:.4}", report.map);
    println!("mAP-present {:.4}", report.map_present);
    Ok(())
}

fn run_dataset_stats(args: DatasetStatsArgs) -> Result<(), CliError> {
    let manifest = io::read_manifest(&args.manifest)?;
    let stats = io::dataset_stats(&manifest)?;
    println!("dataset {}", stats.dataset);
    println!("train-frames {}", stats.train_frames);
    println!("test-frames {}", stats.test_frames);
    println!("sensor-groups {}", stats.sensor_groups);
    println!("annotated-frames {}", stats.annotated_frames);
    let boxes = lidarcs::geom::Category::ALL
        .iter()
        .map(|c| format!("{c}={}", stats.category_counts[c.index()]))
        .collect::<Vec<_>>()
        .join(" ");
    println!("boxes {boxes}");
    Ok(())
}

fn run_pattern_stats(args: PatternStatsArgs) -> Result<(), CliError> {
    let loaded = io::read_pattern(&args.pattern)?;
    let beams = beam_decompose_pattern(&loaded, args.gap_threshold)?;
    println!(
        "pattern {}: {} rays, {} scan lines",
        loaded.sensor_name,
        loaded.len(),
        beams.len()
    );
    let lowest = beams.first().expect("at least one beam").elevation.to_degrees();
    let highest = beams.last().expect("at least one beam").elevation.to_degrees();
    println!("elevation {:.6}..{:.6} deg", lowest, highest);
    let (min_rays, max_rays) = beams
        .iter()
        .fold((usize::MAX, 0), |(lo, hi), b| {
            (lo.min(b.members.len()), hi.max(b.members.len()))
        });
    println!("rays-per-line min={min_rays} max={max_rays}");
    Ok(())
}
