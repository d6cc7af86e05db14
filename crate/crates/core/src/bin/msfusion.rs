use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use msfusion::config::{Config, RegistrarKind};
use msfusion::error::{Error, Result};
use msfusion::eval::{load_dataset, oracle_registrar, pipeline_registrar, run_benchmark};
use msfusion::fusion::{fuse_hplp_scales, restore_color};
use msfusion::raster::{read_image, warp_affine, write_gray, write_image, AnyImage, BitDepth, ColorImage, GrayImage};
use msfusion::registration::{read_transform, register, write_transform_json, write_transform_text, TransformRecord};

#[derive(Parser)]
#[command(name = "msfusion", version, about = "Register and fuse visible / infrared image pairs")]
#[command(after_help = config_help())]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Config file of `key = value` lines.
    #[arg(long, short = 'c')]
    config: Option<PathBuf>,
    /// Override one config key; repeatable, wins over the file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the visible-to-IR transform and write it as JSON (or 2x3 text for .txt).
    #[command(after_help = config_help())]
    Register {
        visible: PathBuf,
        ir: PathBuf,
        #[arg(long, short = 'o')]
        output: PathBuf,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Resample an image through a transform file; pixels without support are 0.
    Warp {
        input: PathBuf,
        transform: PathBuf,
        #[arg(long, short = 'o')]
        output: PathBuf,
        /// Output width; defaults to the input width.
        #[arg(long)]
        width: Option<usize>,
        /// Output height; defaults to the input height.
        #[arg(long)]
        height: Option<usize>,
        #[arg(long, default_value_t = 8, value_parser = parse_depth)]
        depth: u8,
    },
    /// Fuse an aligned visible / IR pair into gray and colour outputs.
    #[command(after_help = config_help())]
    Fuse {
        visible: PathBuf,
        ir: PathBuf,
        #[arg(long)]
        gray: PathBuf,
        #[arg(long)]
        color: PathBuf,
        /// Also write each per-scale fused image into this directory.
        #[arg(long, value_name = "DIR")]
        dump_scales: Option<PathBuf>,
        #[arg(long, default_value_t = 8, value_parser = parse_depth)]
        depth: u8,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Run the synthetic accuracy benchmark over a directory of base images.
    #[command(after_help = config_help())]
    Eval {
        dataset: PathBuf,
        #[arg(long, short = 'o')]
        output: PathBuf,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
}

fn config_help() -> String {
    format!("Config keys (for --config files and --set):\n{}", Config::reference())
}

fn parse_depth(s: &str) -> std::result::Result<u8, String> {
    match s {
        "8" => Ok(8),
        "16" => Ok(16),
        _ => Err(format!("bit depth must be 8 or 16, got {s}")),
    }
}

fn depth(d: u8) -> BitDepth {
    if d == 16 {
        BitDepth::Sixteen
    } else {
        BitDepth::Eight
    }
}

fn load_config(args: &ConfigArgs) -> Result<Config> {
    let mut cfg = match &args.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    for o in &args.overrides {
        cfg.apply_override(o)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_register(visible: &Path, ir: &Path, output: &Path, args: &ConfigArgs) -> Result<()> {
    let cfg = load_config(args)?;
    let v = read_image(visible)?.to_gray();
    let i = read_image(ir)?.to_gray();
    let result = register(&v, &i, &cfg.registration)?;
    for (n, it) in result.per_iteration.iter().enumerate() {
        println!(
            "iteration {}: matches {} support {} tx {:.3} ty {:.3}",
            n + 1,
            it.match_count,
            it.support,
            it.transform.tx(),
            it.transform.ty()
        );
    }
    println!(
        "support {} of {} round-1 matches ({:.1}%)",
        result.support,
        result.per_iteration[0].match_count,
        100.0 * result.inlier_ratio()
    );
    if result.is_low_confidence() {
        eprintln!("warning: low-confidence registration");
    }
    let is_text = output.extension().is_some_and(|e| e.eq_ignore_ascii_case("txt"));
    if is_text {
        write_transform_text(output, &result.t3)
    } else {
        write_transform_json(output, &TransformRecord::from_result(&result))
    }
}

fn cmd_warp(input: &Path, transform: &Path, output: &Path, size: (Option<usize>, Option<usize>), d: u8) -> Result<()> {
    let t = read_transform(transform)?;
    let img = read_image(input)?;
    let (w0, h0) = img.dimensions();
    let (w, h) = (size.0.unwrap_or(w0), size.1.unwrap_or(h0));
    let warp = |p: &GrayImage| warp_affine(p, &t, w, h, 0.0);
    let out = match img {
        AnyImage::Gray(g) => AnyImage::Gray(warp(&g)?),
        AnyImage::Color(c) => {
            let [r, g, b] = c.planes();
            AnyImage::Color(ColorImage::from_planes(warp(r)?, warp(g)?, warp(b)?)?)
        }
    };
    write_image(output, &out, depth(d))
}

fn cmd_fuse(
    visible: &Path,
    ir: &Path,
    gray: &Path,
    color: &Path,
    dump: Option<&Path>,
    d: u8,
    args: &ConfigArgs,
) -> Result<()> {
    let cfg = load_config(args)?;
    let v = read_image(visible)?.to_color();
    let i = read_image(ir)?.to_gray();
    if v.dimensions() != i.dimensions() {
        let ((vw, vh), (iw, ih)) = (v.dimensions(), i.dimensions());
        return Err(Error::Parameter(format!(
            "dimension mismatch: visible is {vw}x{vh}, ir is {iw}x{ih}; warp one onto the other first"
        )));
    }
    let (f, scales) = fuse_hplp_scales(&v.to_luminance(), &i, &cfg.fusion)?;
    let fc = restore_color(&f, &v, cfg.fusion.color_eps)?;
    if let Some(dir) = dump {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io {
            path: dir.to_path_buf(),
            source: e,
        })?;
        for (sigma, plane) in cfg.fusion.sigmas.iter().zip(&scales) {
            let img = plane.map(|x| x.clamp(0.0, 1.0) as f32);
            write_gray(dir.join(format!("fused_sigma{sigma}.png")), &img, depth(d))?;
        }
    }
    write_gray(gray, &f, depth(d))?;
    write_image(color, &AnyImage::Color(fc), depth(d))
}

fn cmd_eval(dataset: &Path, output: &Path, args: &ConfigArgs) -> Result<()> {
    let cfg = load_config(args)?;
    let bases = load_dataset(dataset)?;
    let report = match cfg.registrar {
        RegistrarKind::Pipeline => run_benchmark(&bases, &cfg.sim, pipeline_registrar(cfg.registration))?,
        RegistrarKind::Oracle => run_benchmark(&bases, &cfg.sim, oracle_registrar)?,
    };
    report.write_csv(output)?;
    for s in &report.per_scale {
        println!(
            "scale {:.4}: trials {} failures {} mean {:.4} px median {:.4} px max {:.4} px",
            s.scale, s.trials, s.failures, s.mean_error, s.median_error, s.max_error
        );
    }
    println!("mean error {:.4} px over {} trials, {} failures", report.mean, report.rows.len(), report.failures);
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Register { visible, ir, output, cfg } => cmd_register(&visible, &ir, &output, &cfg),
        Command::Warp {
            input,
            transform,
            output,
            width,
            height,
            depth,
        } => cmd_warp(&input, &transform, &output, (width, height), depth),
        Command::Fuse {
            visible,
            ir,
            gray,
            color,
            dump_scales,
            depth,
            cfg,
        } => cmd_fuse(&visible, &ir, &gray, &color, dump_scales.as_deref(), depth, &cfg),
        Command::Eval { dataset, output, cfg } => cmd_eval(&dataset, &output, &cfg),
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
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_algorithmic() { 2 } else { 1 })
        }
    }
}
