use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use surfwl::analysis::{
    compare_methods, reduction_csv, reduction_table, render_text, sizing_csv, sizing_table,
    DEFAULT_SIZES,
};
use surfwl::surf::output::{write_points_csv, write_points_txt};
use surfwl::surf::run_detector;
use surfwl::{read_pnm_as_gray, GrayImage, Method, ReductionConfig};

use crate::args::{CompareArgs, DetectArgs, FetchArgs, PointFormat, TablesArgs};
use crate::dataset::{self, FetchOutcome};
use crate::error::{summarize, CliError};

fn stdout_err(e: std::io::Error) -> CliError {
    CliError::io("<stdout>", e)
}

pub fn load_image(path: &Path) -> Result<GrayImage, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    read_pnm_as_gray(&bytes).map_err(|source| CliError::Parse {
        path: path.to_path_buf(),
        source,
    })
}

fn image_id(path: &Path) -> String {
    path.file_stem().map_or_else(
        || path.display().to_string(),
        |s| s.to_string_lossy().into_owned(),
    )
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

pub fn cmd_detect(args: &DetectArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = ReductionConfig::with_shift(args.method, args.shift);
    if !args.method.uses_shift() && args.shift != 0 {
        return Err(CliError::Config(format!(
            "--shift is not used by method {}",
            args.method
        )));
    }
    if args.method.uses_shift() && args.shift == 0 {
        return Err(CliError::Config(format!(
            "--shift is required for method {}",
            args.method
        )));
    }
    create_dir(&args.out)?;
    let opts = args.detector.options();

    let mut errors = Vec::new();
    for input in &args.inputs {
        match detect_one(input, &cfg, &opts, args, out) {
            Ok(()) => {}
            Err(e) => {
                eprintln!("error: {e}");
                errors.push(e);
            }
        }
    }
    summarize(errors, args.inputs.len())
}

fn detect_one(
    input: &Path,
    cfg: &ReductionConfig,
    opts: &surfwl::DetectOptions,
    args: &DetectArgs,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let img = load_image(input)?;
    let det = run_detector::<f64>(&img, cfg, opts)
        .map_err(|e| CliError::Config(format!("{}: {e}", input.display())))?;
    if det.below_bound {
        log::warn!(
            "--bits {} is below the {} bound for {}; box sums may wrap",
            det.plan.bits,
            cfg.method,
            input.display()
        );
    }
    let stem = image_id(input);
    let mut written: Vec<PathBuf> = Vec::new();
    if matches!(args.format, PointFormat::Txt | PointFormat::Both) {
        let path = args.out.join(format!("{stem}.points"));
        let mut buf = Vec::new();
        write_points_txt(&det.points, &mut buf).map_err(|e| CliError::io(&path, e))?;
        write_file(&path, &buf)?;
        written.push(path);
    }
    if matches!(args.format, PointFormat::Csv | PointFormat::Both) {
        let path = args.out.join(format!("{stem}.csv"));
        let mut buf = Vec::new();
        write_points_csv(&det.points, &mut buf).map_err(|e| CliError::io(&path, e))?;
        write_file(&path, &buf)?;
        written.push(path);
    }
    writeln!(
        out,
        "{}: method {} L_ii = {} bits, {} points",
        input.display(),
        cfg.label(),
        det.plan.bits,
        det.points.len()
    )
    .map_err(stdout_err)?;
    for path in written {
        log::info!("wrote {}", path.display());
    }
    Ok(())
}

pub fn cmd_compare(args: &CompareArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let configs = args.configs();
    if configs.len() < 2 {
        return Err(CliError::Config(
            "--methods needs at least two runs to compare".into(),
        ));
    }
    let mut failed: Vec<String> = Vec::new();
    let mut images = Vec::new();
    for input in &args.inputs {
        match load_image(input) {
            Ok(img) => images.push((image_id(input), img)),
            Err(e) => {
                eprintln!("error: {e}");
                if args.inputs.len() == 1 {
                    return Err(e);
                }
                failed.push(input.display().to_string());
            }
        }
    }
    if images.is_empty() {
        return Err(CliError::Partial {
            failed: failed.len(),
            total: args.inputs.len(),
        });
    }

    let report = compare_methods(&images, &configs, &args.detector.options());
    for (i, id) in report.image_ids.iter().enumerate() {
        for (c, cfg) in report.configs.iter().enumerate() {
            if let Err(msg) = report.cell(i, c) {
                eprintln!("error: {id} under {}: {msg}", cfg.label());
                if !failed.contains(id) {
                    failed.push(id.clone());
                }
            }
        }
    }

    let counts = report.counts_csv();
    let baseline = report.baseline_csv();
    if let Some(dir) = &args.out {
        create_dir(dir)?;
        write_file(&dir.join("counts.csv"), counts.as_bytes())?;
        write_file(&dir.join("baseline.csv"), baseline.as_bytes())?;
        write_file(&dir.join("timings.csv"), report.timings_csv().as_bytes())?;
    }
    write!(out, "{}\n{}", render_text(&counts), render_text(&baseline)).map_err(stdout_err)?;

    match failed.len() {
        0 => Ok(()),
        n => Err(CliError::Partial {
            failed: n,
            total: args.inputs.len(),
        }),
    }
}

pub fn cmd_tables(args: &TablesArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let sizes: Vec<(u64, u64)> = if args.sizes.is_empty() {
        DEFAULT_SIZES.to_vec()
    } else {
        args.sizes.iter().map(|s| (s.0, s.1)).collect()
    };
    if args.shift == 0 || args.shift >= args.pixel_bits {
        return Err(CliError::Config(format!(
            "--shift must lie in 1..{} for {}-bit pixels",
            args.pixel_bits, args.pixel_bits
        )));
    }
    create_dir(&args.out)?;
    let sizing = sizing_csv(&sizing_table(&sizes, args.pixel_bits));
    write_file(&args.out.join("sizing.csv"), sizing.as_bytes())?;

    let tables = [
        ("reduction_exact.csv", Method::Exact, 0),
        ("reduction_modified_exact.csv", Method::ModifiedExact, 0),
        ("reduction_even.csv", Method::EvenImage, args.shift),
    ];
    let mut text = render_text(&sizing);
    for (name, method, shift) in tables {
        let rows =
            reduction_table(&sizes, method, shift).map_err(|e| CliError::Config(e.to_string()))?;
        let csv = reduction_csv(&rows);
        write_file(&args.out.join(name), csv.as_bytes())?;
        text.push('\n');
        text.push_str(&format!(
            "{method}{}\n",
            if shift > 0 {
                format!(" p={shift}")
            } else {
                String::new()
            }
        ));
        text.push_str(&render_text(&csv));
    }
    out.write_all(text.as_bytes()).map_err(stdout_err)
}

pub fn cmd_fetch(args: &FetchArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let cache = args
        .cache
        .clone()
        .unwrap_or_else(dataset::default_cache_dir);
    match dataset::fetch(args.scene, &args.base_url, &cache, args.force)? {
        FetchOutcome::CacheHit { dir } => {
            writeln!(
                out,
                "cache hit: {} already in {}",
                args.scene.name(),
                dir.display()
            )
        }
        FetchOutcome::Downloaded { dir, images, bytes } => writeln!(
            out,
            "fetched {}: {} bytes, {} images into {}",
            args.scene.name(),
            bytes,
            images.len(),
            dir.display()
        ),
    }
    .map_err(stdout_err)
}
