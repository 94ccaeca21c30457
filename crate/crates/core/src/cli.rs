//! Command-line front end.
//!
//! Each subcommand reads files, runs one stage (or the whole chain) and
//! writes its outputs atomically. Errors print to standard error and map to
//! the exit codes of [`Error::exit_code`]; a failing self-check exits 1.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::fsutil::write_atomic;
use crate::geometry::{
    back_project, hole_compensate, load_scan, project, BeamCalibration, PointCloud, RangeImage,
    ScanFormat, WindowShape,
};
use crate::metrics::{banded_report, full_report, DEFAULT_VOXEL};
use crate::model::{build, forward, load_weights, ModelWeights, NetworkConfig};
use crate::selfcheck::{self, Fault, SelfCheckOptions};

/// Exit code for a failed self-check.
pub const EXIT_SELFCHECK: i32 = 1;

#[derive(Debug, Parser)]
#[command(
    name = "rangesr",
    version,
    about = "LiDAR range-image super-resolution"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Project a scan into a range image (RIMG, optional PNG preview).
    Project {
        scan: PathBuf,
        #[command(flatten)]
        calib: CalibArg,
        #[arg(short, long)]
        out: PathBuf,
        /// Also write a 16-bit grayscale preview.
        #[arg(long)]
        png: Option<PathBuf>,
        /// Scan format; guessed from the extension when absent.
        #[arg(long)]
        format: Option<String>,
    },
    /// Fill holes in a range image.
    Compensate {
        image: PathBuf,
        #[command(flatten)]
        calib: CalibArg,
        #[arg(long, default_value = "3x1")]
        window: WindowArg,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Upsample a range image with the network.
    Infer {
        image: PathBuf,
        #[command(flatten)]
        calib: CalibArg,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(short, long)]
        out: PathBuf,
        /// Write the calibration matching the upsampled image.
        #[arg(long)]
        calib_out: Option<PathBuf>,
        #[arg(long)]
        png: Option<PathBuf>,
    },
    /// Lift a range image back to a PLY point cloud.
    BackProject {
        image: PathBuf,
        #[command(flatten)]
        calib: CalibArg,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Compare a predicted cloud against ground truth.
    Evaluate {
        pred: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        /// Voxel edge for IoU, meters.
        #[arg(long, default_value_t = DEFAULT_VOXEL)]
        voxel: f64,
        #[arg(long)]
        json_out: Option<PathBuf>,
    },
    /// Project, fill, upsample and lift a scan in one go.
    Pipeline {
        scan: PathBuf,
        #[command(flatten)]
        calib: CalibArg,
        #[arg(long, default_value = "3x1")]
        window: WindowArg,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(short, long)]
        out: PathBuf,
        /// Ground-truth scan; enables the metrics report.
        #[arg(long)]
        gt: Option<PathBuf>,
        #[arg(long, requires = "gt")]
        json_out: Option<PathBuf>,
        /// Preview of the upsampled image.
        #[arg(long)]
        png: Option<PathBuf>,
    },
    /// Write freshly initialized weights for a calibration.
    InitWeights {
        #[command(flatten)]
        calib: CalibArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "4x1")]
        scales: Scales,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Run the built-in oracle checks.
    Selfcheck {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, hide = true)]
        inject_fault: Option<String>,
    },
}

#[derive(Debug, Args)]
pub struct CalibArg {
    /// Beam calibration JSON; a 64-beam default when absent.
    #[arg(long)]
    pub calib: Option<PathBuf>,
}

impl CalibArg {
    fn load(&self) -> Result<BeamCalibration> {
        match &self.calib {
            Some(p) => BeamCalibration::load_json(p),
            None => Ok(BeamCalibration::default()),
        }
    }
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Weight file; random weights from `--seed` when absent.
    #[arg(long)]
    pub weights: Option<PathBuf>,
    #[arg(long, default_value_t = 0, conflicts_with = "weights")]
    pub seed: u64,
    /// Upscaling factors; taken from the weight file when one is given.
    #[arg(long)]
    pub scales: Option<Scales>,
}

/// `SVxSH` upscaling factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Scales(pub usize, pub usize);

impl FromStr for Scales {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let bad = || format!("expected SVxSH such as 4x1, got `{s}`");
        let (v, h) = s.split_once(['x', 'X']).ok_or_else(bad)?;
        let v: usize = v.parse().map_err(|_| bad())?;
        let h: usize = h.parse().map_err(|_| bad())?;
        if v == 0 || h == 0 {
            return Err(bad());
        }
        Ok(Scales(v, h))
    }
}

/// Hole window, or `none` to skip filling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowArg(pub Option<WindowShape>);

impl FromStr for WindowArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "none" => Ok(WindowArg(None)),
            "3x1" | "1x3" => WindowShape::from_str(s)
                .map(|w| WindowArg(Some(w)))
                .map_err(|e| e.to_string()),
            _ => Err(format!("expected 1x3, 3x1 or none, got `{s}`")),
        }
    }
}

fn read_image(path: &Path, calib: BeamCalibration) -> Result<RangeImage> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    RangeImage::from_rimg_bytes(&bytes, calib)
}

fn read_scan(path: &Path, format: Option<&str>) -> Result<PointCloud> {
    let format = match format {
        Some(f) => f.parse()?,
        None => ScanFormat::from_path(path),
    };
    load_scan(path, format)
}

fn model_for(image: &RangeImage, args: &ModelArgs) -> Result<(ModelWeights, NetworkConfig)> {
    match &args.weights {
        Some(path) => {
            let (w, cfg) = load_weights(path)?;
            if let Some(Scales(v, h)) = args.scales {
                if cfg.upscale != (v, h) {
                    return Err(Error::Incompatible(format!(
                        "weights upscale by {}x{}, --scales asks for {v}x{h}",
                        cfg.upscale.0, cfg.upscale.1
                    )));
                }
            }
            if (cfg.height, cfg.width) != (image.height(), image.width()) {
                return Err(Error::Incompatible(format!(
                    "weights expect a {}x{} image, got {}x{}",
                    cfg.height,
                    cfg.width,
                    image.height(),
                    image.width()
                )));
            }
            Ok((w, cfg))
        }
        None => {
            let mut cfg = NetworkConfig::desk(image.height(), image.width());
            if let Some(Scales(v, h)) = args.scales {
                cfg.upscale = (v, h);
            }
            cfg.validate()?;
            let w = build(&cfg, args.seed)?;
            Ok((w, cfg))
        }
    }
}

fn emit_json(json: &str, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => write_atomic(p, json.as_bytes()),
        None => {
            println!("{json}");
            Ok(())
        }
    }
}

/// Parses `args` (program name first) and runs the command, returning the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Runs one parsed command; `Ok` carries the exit code.
pub fn execute(command: Command) -> Result<i32> {
    match command {
        Command::Project {
            scan,
            calib,
            out,
            png,
            format,
        } => {
            let calib = calib.load()?;
            let cloud = read_scan(&scan, format.as_deref())?;
            let img = project(&cloud, &calib)?;
            let rimg = img.to_rimg_bytes()?;
            let png_bytes = png.as_ref().map(|_| img.to_png_bytes()).transpose()?;
            write_atomic(&out, &rimg)?;
            if let (Some(p), Some(b)) = (png, png_bytes) {
                write_atomic(p, &b)?;
            }
            println!(
                "{} points -> {}x{} image, {} valid pixels",
                cloud.len(),
                img.height(),
                img.width(),
                img.valid_count()
            );
        }
        Command::Compensate {
            image,
            calib,
            window,
            out,
        } => {
            let img = read_image(&image, calib.load()?)?;
            let before = img.hole_count();
            let filled = match window.0 {
                Some(w) => hole_compensate(&img, w)?,
                None => img,
            };
            write_atomic(&out, &filled.to_rimg_bytes()?)?;
            println!("holes: {before} -> {}", filled.hole_count());
        }
        Command::Infer {
            image,
            calib,
            model,
            out,
            calib_out,
            png,
        } => {
            let img = read_image(&image, calib.load()?)?;
            let (w, cfg) = model_for(&img, &model)?;
            let hr = forward(&img, &w, &cfg)?;
            let rimg = hr.to_rimg_bytes()?;
            let png_bytes = png.as_ref().map(|_| hr.to_png_bytes()).transpose()?;
            write_atomic(&out, &rimg)?;
            if let Some(p) = calib_out {
                write_atomic(p, hr.calibration().to_json().as_bytes())?;
            }
            if let (Some(p), Some(b)) = (png, png_bytes) {
                write_atomic(p, &b)?;
            }
            println!(
                "{}x{} -> {}x{}",
                img.height(),
                img.width(),
                hr.height(),
                hr.width()
            );
        }
        Command::BackProject { image, calib, out } => {
            let img = read_image(&image, calib.load()?)?;
            let cloud = back_project(&img);
            write_atomic(&out, cloud.to_ply().as_bytes())?;
            println!("{} points", cloud.len());
        }
        Command::Evaluate {
            pred,
            gt,
            voxel,
            json_out,
        } => {
            if !(voxel > 0.0 && voxel.is_finite()) {
                return Err(Error::Config(format!(
                    "voxel size must be positive, got {voxel}"
                )));
            }
            let p = read_scan(&pred, None)?;
            let g = read_scan(&gt, None)?;
            let report = crate::metrics::banded_report_with(
                &p,
                &g,
                &crate::metrics::DEFAULT_BAND_EDGES,
                voxel,
            )?;
            emit_json(&report.to_json(), json_out.as_deref())?;
        }
        Command::Pipeline {
            scan,
            calib,
            window,
            model,
            out,
            gt,
            json_out,
            png,
        } => {
            let calib = calib.load()?;
            let cloud = read_scan(&scan, None)?;
            let gt_cloud = gt.as_deref().map(|p| read_scan(p, None)).transpose()?;
            let img = project(&cloud, &calib)?;
            let img = match window.0 {
                Some(w) => hole_compensate(&img, w)?,
                None => img,
            };
            let (w, cfg) = model_for(&img, &model)?;
            let hr = forward(&img, &w, &cfg)?;
            let dense = back_project(&hr);
            let report = match &gt_cloud {
                Some(g) => {
                    let gt_img = project(g, hr.calibration())?;
                    Some(if gt_img.valid_count() > 0 {
                        full_report(&dense, g, &hr, &gt_img)?
                    } else {
                        banded_report(&dense, g)?
                    })
                }
                None => None,
            };
            let png_bytes = png.as_ref().map(|_| hr.to_png_bytes()).transpose()?;
            write_atomic(&out, dense.to_ply().as_bytes())?;
            if let (Some(p), Some(b)) = (png, png_bytes) {
                write_atomic(p, &b)?;
            }
            if let Some(r) = report {
                emit_json(&r.to_json(), json_out.as_deref())?;
            }
            eprintln!(
                "{} points -> {}x{} image -> {} points",
                cloud.len(),
                hr.height(),
                hr.width(),
                dense.len()
            );
        }
        Command::InitWeights {
            calib,
            seed,
            scales,
            out,
        } => {
            let calib = calib.load()?;
            let mut cfg = NetworkConfig::desk(calib.height(), calib.width());
            cfg.upscale = (scales.0, scales.1);
            cfg.validate()?;
            let w = build(&cfg, seed)?;
            crate::model::save_weights(&w, &cfg, &out)?;
            println!("{} parameters, checksum {}", w.param_count(), w.checksum());
        }
        Command::Selfcheck { seed, inject_fault } => {
            let fault = match inject_fault.as_deref() {
                None => None,
                Some("zoh-taylor") => Some(Fault::ZohTaylorLimitDisabled),
                Some(other) => return Err(Error::Config(format!("unknown fault `{other}`"))),
            };
            let outcomes = selfcheck::run(&SelfCheckOptions { seed, fault });
            let mut stdout = std::io::stdout().lock();
            let mut failed = Vec::new();
            for o in &outcomes {
                let status = if o.passed { "ok" } else { "FAILED" };
                let _ = writeln!(
                    stdout,
                    "{:<26} {:<6} {:>9.3} ms  {}",
                    o.name,
                    status,
                    o.elapsed.as_secs_f64() * 1e3,
                    o.detail
                );
                if !o.passed {
                    failed.push(o.name);
                }
            }
            if !failed.is_empty() {
                eprintln!("selfcheck failed: {}", failed.join(", "));
                return Ok(EXIT_SELFCHECK);
            }
        }
    }
    Ok(0)
}
