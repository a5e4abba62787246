//! Sizing tables and method-comparison reports.
//!
//! CSV output uses `,` separators, a header row, `.` decimals and LF line
//! endings. Percentages carry two decimals. Nothing time-dependent is written
//! to the CSVs, so identical inputs give byte-identical files; wall-clock
//! timings are available separately through [`ComparisonReport::timings_csv`].

use std::time::{Duration, Instant};

use num_rational::Ratio;
use rayon::prelude::*;

use crate::pixel::GrayImage;
use crate::reduction::{planned_bits, ReductionConfig, ReductionError};
use crate::surf::{run_detector, DetectOptions, InterestPoint};
use crate::wordlen::{
    bits_for_value, container_bits, memory_bytes, worst_case_integral_value, Method,
};

/// Image sizes used when none are given.
pub const DEFAULT_SIZES: [(u64, u64); 5] = [
    (320, 240),
    (640, 480),
    (800, 640),
    (1024, 768),
    (1280, 1024),
];

/// One row of the storage-requirement table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SizingRow {
    pub width: u64,
    pub height: u64,
    pub pixel_bits: u32,
    /// Full word length of the integral image.
    pub integral_bits: u32,
    pub image_bytes: Ratio<u128>,
    pub integral_bytes: Ratio<u128>,
    /// Word size of the in-core container actually used per entry.
    pub container_bits: u32,
    /// `(integral - image) / image * 100`.
    pub increase_pct: Ratio<u128>,
}

/// Word length and footprint of the full integral image for each size.
pub fn sizing_table(sizes: &[(u64, u64)], pixel_bits: u32) -> Vec<SizingRow> {
    sizes
        .iter()
        .map(|&(w, h)| {
            let bits = bits_for_value(&worst_case_integral_value(w, h, pixel_bits));
            let image_bytes = memory_bytes(w, h, pixel_bits);
            let integral_bytes = memory_bytes(w, h, bits);
            SizingRow {
                width: w,
                height: h,
                pixel_bits,
                integral_bits: bits,
                image_bytes,
                integral_bytes,
                container_bits: container_bits(bits),
                increase_pct: (integral_bytes - image_bytes) / image_bytes
                    * Ratio::from_integer(100),
            }
        })
        .collect()
}

/// One row of a storage-reduction table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionRow {
    pub width: u64,
    pub height: u64,
    pub full_bits: u32,
    pub reduced_bits: u32,
    pub full_bytes: Ratio<u128>,
    pub reduced_bytes: Ratio<u128>,
    /// `(full - reduced) / full * 100`, equal for bits and bytes.
    pub reduction_pct: Ratio<u128>,
    pub memory_reduction_pct: Ratio<u128>,
}

/// Storage saved by `method` relative to the full word length, for 8-bit images.
pub fn reduction_table(
    sizes: &[(u64, u64)],
    method: Method,
    shift: u32,
) -> Result<Vec<ReductionRow>, ReductionError> {
    let cfg = ReductionConfig::with_shift(method, shift);
    let pixel_bits = 8;
    cfg.validate(pixel_bits)?;
    Ok(sizes
        .iter()
        .map(|&(w, h)| {
            let full = planned_bits(&ReductionConfig::full(), w, h, pixel_bits);
            let reduced = planned_bits(&cfg, w, h, pixel_bits);
            let full_bytes = memory_bytes(w, h, full);
            let reduced_bytes = memory_bytes(w, h, reduced);
            let pct = |a: Ratio<u128>, b: Ratio<u128>| {
                if b >= a {
                    Ratio::from_integer(0)
                } else {
                    (a - b) / a * Ratio::from_integer(100)
                }
            };
            ReductionRow {
                width: w,
                height: h,
                full_bits: full,
                reduced_bits: reduced,
                full_bytes,
                reduced_bytes,
                reduction_pct: pct(
                    Ratio::from_integer(full.into()),
                    Ratio::from_integer(reduced.into()),
                ),
                memory_reduction_pct: pct(full_bytes, reduced_bytes),
            }
        })
        .collect())
}

/// Rounds half away from zero to `places` decimals, exactly.
pub fn format_ratio(r: Ratio<u128>, places: u32) -> String {
    let scale = 10u128.pow(places);
    let scaled = r * Ratio::from_integer(scale);
    let rounded = (scaled + Ratio::new(1, 2)).floor().to_integer();
    let (int, frac) = (rounded / scale, rounded % scale);
    if places == 0 {
        int.to_string()
    } else {
        format!("{int}.{frac:0width$}", width = places as usize)
    }
}

fn csv_string(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

pub fn sizing_csv(rows: &[SizingRow]) -> String {
    csv_string(
        &[
            "width",
            "height",
            "pixel_bits",
            "integral_bits",
            "image_bytes",
            "integral_bytes",
            "integral_kib",
            "container_bits",
            "increase_pct",
        ],
        rows.iter().map(|r| {
            vec![
                r.width.to_string(),
                r.height.to_string(),
                r.pixel_bits.to_string(),
                r.integral_bits.to_string(),
                format_ratio(r.image_bytes, 3),
                format_ratio(r.integral_bytes, 3),
                format_ratio(r.integral_bytes / 1024, 3),
                r.container_bits.to_string(),
                format_ratio(r.increase_pct, 2),
            ]
        }),
    )
}

pub fn reduction_csv(rows: &[ReductionRow]) -> String {
    csv_string(
        &[
            "width",
            "height",
            "full_bits",
            "reduced_bits",
            "full_kib",
            "reduced_kib",
            "reduction_pct",
        ],
        rows.iter().map(|r| {
            vec![
                r.width.to_string(),
                r.height.to_string(),
                r.full_bits.to_string(),
                r.reduced_bits.to_string(),
                format_ratio(r.full_bytes / 1024, 3),
                format_ratio(r.reduced_bytes / 1024, 3),
                format_ratio(r.reduction_pct, 2),
            ]
        }),
    )
}

/// Outcome of one detector run in a comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub bits: u32,
    pub shift: u32,
    pub points: Vec<InterestPoint<f64>>,
    pub runtime: Duration,
}

impl RunResult {
    pub fn count(&self) -> usize {
        self.points.len()
    }
}

/// Detector results for every (image, config) pair; the first config is
/// the baseline.
#[derive(Debug, Clone)]
pub struct ComparisonReport {
    pub image_ids: Vec<String>,
    pub configs: Vec<ReductionConfig>,
    /// `cells[image][config]`; errors are kept as messages.
    pub cells: Vec<Vec<Result<RunResult, String>>>,
}

/// Runs the detector for every image under every config. A failing cell is
/// recorded and the remaining cells still run.
pub fn compare_methods(
    images: &[(String, GrayImage)],
    configs: &[ReductionConfig],
    opts: &DetectOptions,
) -> ComparisonReport {
    let cells = images
        .par_iter()
        .map(|(_, img)| {
            configs
                .par_iter()
                .map(|cfg| {
                    let start = Instant::now();
                    run_detector::<f64>(img, cfg, opts)
                        .map(|d| RunResult {
                            bits: d.plan.bits,
                            shift: d.plan.pre_shift,
                            points: d.points,
                            runtime: start.elapsed(),
                        })
                        .map_err(|e| e.to_string())
                })
                .collect()
        })
        .collect();
    ComparisonReport {
        image_ids: images.iter().map(|(id, _)| id.clone()).collect(),
        configs: configs.to_vec(),
        cells,
    }
}

impl ComparisonReport {
    pub fn cell(&self, image: usize, config: usize) -> &Result<RunResult, String> {
        &self.cells[image][config]
    }

    /// Word length(s) a config used across images, `/`-joined when they differ.
    fn bits_label(&self, config: usize) -> String {
        let mut bits: Vec<u32> = self
            .cells
            .iter()
            .filter_map(|row| row[config].as_ref().ok())
            .map(|r| r.bits)
            .collect();
        bits.sort_unstable();
        bits.dedup();
        bits.iter()
            .map(u32::to_string)
            .collect::<Vec<_>>()
            .join("/")
    }

    pub fn has_errors(&self) -> bool {
        self.cells.iter().flatten().any(Result::is_err)
    }

    /// Counts with one row per config and one column per image.
    pub fn counts_csv(&self) -> String {
        let mut header = vec!["method", "p", "l_ii"];
        header.extend(self.image_ids.iter().map(String::as_str));
        let rows = self.configs.iter().enumerate().map(|(c, cfg)| {
            let mut row = vec![
                cfg.method.to_string(),
                cfg.shift.to_string(),
                self.bits_label(c),
            ];
            row.extend(self.cells.iter().map(|cells| match &cells[c] {
                Ok(r) => r.count().to_string(),
                Err(e) => format!("error: {e}"),
            }));
            row
        });
        csv_string(&header, rows)
    }

    /// Each non-baseline config against the baseline, per image.
    pub fn baseline_csv(&self) -> String {
        let header = [
            "image",
            "baseline",
            "baseline_count",
            "method",
            "p",
            "l_ii",
            "count",
            "diff",
            "identical_points",
        ];
        let mut rows = Vec::new();
        let Some(base_cfg) = self.configs.first() else {
            return csv_string(&header, rows);
        };
        for (i, id) in self.image_ids.iter().enumerate() {
            let base = &self.cells[i][0];
            for (c, cfg) in self.configs.iter().enumerate().skip(1) {
                let cell = &self.cells[i][c];
                let base_count = base
                    .as_ref()
                    .map(|r| r.count().to_string())
                    .unwrap_or_else(|e| format!("error: {e}"));
                let (bits, count) = match cell {
                    Ok(r) => (r.bits.to_string(), r.count().to_string()),
                    Err(e) => (String::new(), format!("error: {e}")),
                };
                let (diff, same) = match (base, cell) {
                    (Ok(b), Ok(r)) => (
                        (r.count() as i64 - b.count() as i64).to_string(),
                        (r.points == b.points).to_string(),
                    ),
                    _ => (String::new(), String::new()),
                };
                rows.push(vec![
                    id.clone(),
                    base_cfg.label(),
                    base_count,
                    cfg.method.to_string(),
                    cfg.shift.to_string(),
                    bits,
                    count,
                    diff,
                    same,
                ]);
            }
        }
        csv_string(&header, rows)
    }

    /// Wall-clock seconds per cell.
    pub fn timings_csv(&self) -> String {
        let rows = self.image_ids.iter().enumerate().flat_map(|(i, id)| {
            self.configs.iter().enumerate().map(move |(c, cfg)| {
                let secs = match &self.cells[i][c] {
                    Ok(r) => format!("{:.6}", r.runtime.as_secs_f64()),
                    Err(_) => String::new(),
                };
                vec![id.clone(), cfg.label(), secs]
            })
        });
        csv_string(&["image", "config", "seconds"], rows.collect::<Vec<_>>())
    }
}

/// Left-aligned plain-text rendering of a CSV produced by this module.
pub fn render_text(csv_text: &str) -> String {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(csv_text.as_bytes());
    let rows: Vec<Vec<String>> = reader
        .records()
        .filter_map(Result::ok)
        .map(|r| r.iter().map(str::to_string).collect())
        .collect();
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| {
            rows.iter()
                .filter_map(|r| r.get(c))
                .map(|s| s.chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for row in &rows {
        let line: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(c, s)| format!("{s:<w$}", w = widths[c]))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizing_800x640() {
        let rows = sizing_table(&[(800, 640), (320, 240), (1, 1)], 8);
        assert_eq!(rows[0].integral_bits, 27);
        assert_eq!(format_ratio(rows[0].integral_bytes / 1024, 1), "1687.5");
        assert_eq!(format_ratio(rows[0].increase_pct, 2), "237.50");
        assert_eq!(rows[0].container_bits, 32);
        assert_eq!(rows[1].integral_bits, 25);
        assert_eq!(
            (rows[2].integral_bits, format_ratio(rows[2].increase_pct, 2)),
            (8, "0.00".to_string())
        );
    }

    #[test]
    fn reduction_percentages() {
        let pct = |m, p| {
            format_ratio(
                reduction_table(&[(800, 640)], m, p).unwrap()[0].reduction_pct,
                2,
            )
        };
        assert_eq!(pct(Method::Exact, 0), "18.52");
        assert_eq!(pct(Method::ModifiedExact, 0), "22.22");
        assert_eq!(pct(Method::EvenImage, 2), "29.63");
        assert!(reduction_table(&[(800, 640)], Method::EvenImage, 0).is_err());
    }

    #[test]
    fn box_bound_is_clipped_to_small_images() {
        let r = &reduction_table(&[(1, 1)], Method::Exact, 0).unwrap()[0];
        assert_eq!((r.full_bits, r.reduced_bits), (8, 8));
        assert_eq!(format_ratio(r.reduction_pct, 2), "0.00");
        let r = &reduction_table(&[(100, 50)], Method::Exact, 0).unwrap()[0];
        assert_eq!(r.reduced_bits, r.full_bits);
    }

    #[test]
    fn memory_and_bit_percentages_agree() {
        for m in [Method::Exact, Method::ModifiedExact] {
            for r in reduction_table(&DEFAULT_SIZES, m, 0).unwrap() {
                assert_eq!(r.reduction_pct, r.memory_reduction_pct);
            }
        }
        for p in 1..=4 {
            for r in reduction_table(&DEFAULT_SIZES, Method::EvenImage, p).unwrap() {
                assert_eq!(r.reduction_pct, r.memory_reduction_pct);
                assert_eq!(r.reduced_bits, 21 - p);
            }
        }
    }

    #[test]
    fn ratio_formatting() {
        assert_eq!(
            format_ratio(Ratio::new(5, 27) * Ratio::from_integer(100), 2),
            "18.52"
        );
        assert_eq!(format_ratio(Ratio::new(1, 8), 2), "0.13");
        assert_eq!(format_ratio(Ratio::new(3, 2), 0), "2");
        assert_eq!(format_ratio(Ratio::from_integer(7), 3), "7.000");
    }

    #[test]
    fn csv_shape() {
        let text = sizing_csv(&sizing_table(&[(800, 640)], 8));
        assert_eq!(
            text,
            "width,height,pixel_bits,integral_bits,image_bytes,integral_bytes,integral_kib,container_bits,increase_pct\n\
             800,640,8,27,512000.000,1728000.000,1687.500,32,237.50\n"
        );
        let text = reduction_csv(&reduction_table(&[(800, 640)], Method::Exact, 0).unwrap());
        assert_eq!(
            text.lines().nth(1),
            Some("800,640,27,22,1687.500,1375.000,18.52")
        );
        assert!(!text.contains('\r'));
    }

    #[test]
    fn zero_image_comparison() {
        let img = GrayImage::filled(64, 64, 0).unwrap();
        let rep = compare_methods(
            &[("zero".into(), img)],
            &[ReductionConfig::full(), ReductionConfig::exact()],
            &DetectOptions::default(),
        );
        assert_eq!(rep.cell(0, 0).as_ref().unwrap().count(), 0);
        assert_eq!(rep.cell(0, 1).as_ref().unwrap().count(), 0);
        let base = rep.baseline_csv();
        assert_eq!(base.lines().nth(1), Some("zero,full,0,exact,0,20,0,0,true"));
        assert_eq!(
            rep.counts_csv(),
            "method,p,l_ii,zero\nfull,0,20,0\nexact,0,20,0\n"
        );
    }

    #[test]
    fn failing_cells_are_isolated() {
        let small = GrayImage::filled(16, 16, 3).unwrap();
        let ok = GrayImage::filled(64, 64, 3).unwrap();
        let rep = compare_methods(
            &[("small".into(), small), ("ok".into(), ok)],
            &[ReductionConfig::full(), ReductionConfig::even(2)],
            &DetectOptions::default(),
        );
        assert!(rep.has_errors());
        assert!(rep.cell(0, 0).is_err());
        assert!(rep.cell(1, 1).is_ok());
        assert!(rep.counts_csv().contains("error: "));
    }

    #[test]
    fn text_rendering_aligns_columns() {
        let txt = render_text("a,bbb\ncc,d\n");
        assert_eq!(txt, "a   bbb\ncc  d\n");
    }
}
