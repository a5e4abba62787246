use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use surfwl::surf::{DEFAULT_OCTAVES, DEFAULT_THRESHOLD};
use surfwl::{DetectOptions, Method, ReductionConfig};

use crate::dataset::{Scene, DEFAULT_BASE_URL};

#[derive(Debug, Parser)]
#[command(
    name = "surfwl",
    version,
    about = "SURF interest points over reduced word-length integral images"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Detect interest points and write one point file per image.
    Detect(DetectArgs),
    /// Run several methods over the same images and report point counts.
    Compare(CompareArgs),
    /// Write word-length and memory tables as CSV.
    Tables(TablesArgs),
    /// Download an affine benchmark scene into the local cache.
    FetchDataset(FetchArgs),
}

#[derive(Debug, Clone, Args)]
pub struct DetectorFlags {
    /// Hessian response threshold applied before interpolation.
    #[arg(long, default_value_t = DEFAULT_THRESHOLD, value_parser = parse_threshold, allow_negative_numbers = true)]
    pub threshold: f64,
    #[arg(long, default_value_t = DEFAULT_OCTAVES, value_parser = clap::value_parser!(u32).range(1..=4))]
    pub octaves: u32,
    /// Integral-image word length override; values below the method's bound
    /// are accepted with a warning.
    #[arg(long)]
    pub bits: Option<u32>,
}

impl DetectorFlags {
    pub fn options(&self) -> DetectOptions {
        DetectOptions {
            threshold: self.threshold,
            octaves: self.octaves,
            bits_override: self.bits,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PointFormat {
    Txt,
    Csv,
    Both,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long, default_value = "exact")]
    pub method: Method,
    /// Bits shifted out of each pixel (approximate and even methods).
    #[arg(long, default_value_t = 0)]
    pub shift: u32,
    #[command(flatten)]
    pub detector: DetectorFlags,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = PointFormat::Txt)]
    pub format: PointFormat,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Comma-separated methods, the first being the baseline. A shift is
    /// given as `even:2`; `even:1..4` expands to four runs.
    #[arg(long, value_delimiter = ',', default_value = "full,exact")]
    pub methods: Vec<MethodSpec>,
    #[command(flatten)]
    pub detector: DetectorFlags,
    /// Directory for counts.csv, baseline.csv and timings.csv.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl CompareArgs {
    pub fn configs(&self) -> Vec<ReductionConfig> {
        self.methods
            .iter()
            .flat_map(|m| m.0.iter().copied())
            .collect()
    }
}

#[derive(Debug, Args)]
pub struct TablesArgs {
    /// Comma-separated `WxH` sizes.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Vec<Size>,
    /// Shift for the even-image reduction table.
    #[arg(long, default_value_t = 2)]
    pub shift: u32,
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u32).range(2..=16))]
    pub pixel_bits: u32,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FetchArgs {
    #[arg(value_enum)]
    pub scene: Scene,
    #[arg(long, default_value = DEFAULT_BASE_URL)]
    pub base_url: String,
    /// Cache root; scenes land in `<cache>/<scene>/`.
    #[arg(long, env = "SURFWL_CACHE")]
    pub cache: Option<PathBuf>,
    /// Download again even when the scene is cached.
    #[arg(long)]
    pub force: bool,
}

/// Image size in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Size(pub u64, pub u64);

impl FromStr for Size {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("`{s}` is not of the form WxH");
        let (w, h) = s.trim().split_once(['x', 'X']).ok_or_else(bad)?;
        let w: u64 = w.parse().map_err(|_| bad())?;
        let h: u64 = h.parse().map_err(|_| bad())?;
        if w == 0 || h == 0 {
            return Err(format!("`{s}` has a zero dimension"));
        }
        Ok(Size(w, h))
    }
}

/// One `--methods` item, possibly expanding to several shifts.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodSpec(pub Vec<ReductionConfig>);

impl FromStr for MethodSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (name, shifts) = match s.split_once(':') {
            Some((n, p)) => (n, Some(p)),
            None => (s, None),
        };
        let method: Method = name
            .trim()
            .parse()
            .map_err(|e: surfwl::wordlen::UnknownMethod| e.to_string())?;
        let shifts: Vec<u32> = match shifts {
            None => vec![0],
            Some(p) => parse_shifts(p).ok_or_else(|| format!("bad shift `{p}` in `{s}`"))?,
        };
        if method.uses_shift() && shifts.contains(&0) {
            return Err(format!("method {method} needs a shift, e.g. {method}:2"));
        }
        if !method.uses_shift() && shifts != [0] {
            return Err(format!("method {method} takes no shift"));
        }
        Ok(MethodSpec(
            shifts
                .into_iter()
                .map(|p| ReductionConfig::with_shift(method, p))
                .collect(),
        ))
    }
}

fn parse_shifts(p: &str) -> Option<Vec<u32>> {
    match p.split_once("..") {
        Some((a, b)) => {
            let (a, b): (u32, u32) = (a.parse().ok()?, b.parse().ok()?);
            (a <= b).then(|| (a..=b).collect())
        }
        None => Some(vec![p.parse().ok()?]),
    }
}

fn parse_threshold(s: &str) -> Result<f64, String> {
    let t: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if t.is_finite() && t >= 0.0 {
        Ok(t)
    } else {
        Err("threshold must be finite and non-negative".into())
    }
}
