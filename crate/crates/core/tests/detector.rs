use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use surfwl::integral::ReducedIntegralImage;
use surfwl::surf::detect::{detect_prepared, pre_threshold_candidates};
use surfwl::surf::nms::{neighborhood, nms_3d};
use surfwl::surf::{detect, filter_schedule_by_octave, interpolate, response_map, ScaleEntry};
use surfwl::{plan, read_pgm, GrayImage, ReductionConfig, ResponseMap};

fn random_image(seed: u64, w: usize, h: usize) -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let px: Vec<u8> = (0..w * h).map(|_| rng.gen()).collect();
    GrayImage::from_u8(w, h, &px).unwrap()
}

/// Smooth random field: a few random Gaussian blobs on a gradient.
fn blobby_image(seed: u64, w: usize, h: usize) -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let blobs: Vec<(f64, f64, f64, f64)> = (0..40)
        .map(|_| {
            (
                rng.gen_range(0.0..w as f64),
                rng.gen_range(0.0..h as f64),
                rng.gen_range(2.0..12.0),
                rng.gen_range(-120.0..120.0),
            )
        })
        .collect();
    GrayImage::from_fn(w, h, 8, |x, y| {
        let mut v = 128.0 + 0.1 * x as f64 - 0.05 * y as f64;
        for &(bx, by, s, a) in &blobs {
            let d2 = (x as f64 - bx).powi(2) + (y as f64 - by).powi(2);
            v += a * (-d2 / (2.0 * s * s)).exp();
        }
        v.round().clamp(0.0, 255.0) as u16
    })
    .unwrap()
}

fn natural(name: &str) -> GrayImage {
    let path = format!("{}/tests/data/{name}.pgm", env!("CARGO_MANIFEST_DIR"));
    read_pgm(&std::fs::read(path).unwrap()).unwrap()
}

/// Mask weights written directly from the lobe geometry, one pixel at a time.
fn mask_weights(size: usize, dx: isize, dy: isize) -> (i64, i64, i64) {
    let l = (size / 3) as isize;
    let lobe_x = |dx: isize, dy: isize| -> i64 {
        if dy.abs() > l - 1 {
            0
        } else if dx.abs() <= (l - 1) / 2 {
            -2
        } else if dx.abs() <= (3 * l - 1) / 2 {
            1
        } else {
            0
        }
    };
    let xy = if (1..=l).contains(&dx.abs()) && (1..=l).contains(&dy.abs()) {
        (dx.signum() * dy.signum()) as i64
    } else {
        0
    };
    (lobe_x(dx, dy), lobe_x(dy, dx), xy)
}

/// Determinant by direct convolution with the masks.
fn direct_response(img: &GrayImage, size: usize, cx: usize, cy: usize) -> f64 {
    let half = (size as isize - 1) / 2;
    let (mut dxx, mut dyy, mut dxy) = (0i64, 0i64, 0i64);
    for dy in -half..=half {
        for dx in -half..=half {
            let v = i64::from(img.get((cx as isize + dx) as usize, (cy as isize + dy) as usize));
            let (a, b, c) = mask_weights(size, dx, dy);
            dxx += a * v;
            dyy += b * v;
            dxy += c * v;
        }
    }
    let n = (9.0 / size as f64).powi(2);
    let (dxx, dyy, dxy) = (dxx as f64 * n, dyy as f64 * n, dxy as f64 * n);
    dxx * dyy - (0.9 * dxy).powi(2)
}

fn full_maps(img: &GrayImage, sizes: &[usize]) -> Vec<ResponseMap> {
    let (p, prepared) = plan(img, &ReductionConfig::full()).unwrap();
    let ii = ReducedIntegralImage::build(&prepared, p.bits).unwrap();
    sizes
        .iter()
        .map(|&s| response_map(&ii, &p, &ScaleEntry::new(1, s).unwrap()).unwrap())
        .collect()
}

#[test]
fn response_map_matches_direct_convolution() {
    for (seed, img) in [(1, random_image(1, 64, 64)), (2, blobby_image(2, 64, 64))] {
        for (map, size) in full_maps(&img, &[9, 15]).iter().zip([9, 15]) {
            assert_eq!(map.cols, 64 - 2 * map.margin);
            for row in 0..map.rows {
                for col in 0..map.cols {
                    let (x, y) = map.position(col, row);
                    let want = direct_response(&img, size, x, y);
                    let got = map.at(col, row);
                    let tol = 1e-9 * want.abs().max(1.0);
                    assert!(
                        (got - want).abs() <= tol,
                        "seed {seed} size {size} at ({x},{y}): {got} vs {want}"
                    );
                }
            }
        }
    }
}

#[test]
fn dark_disc_peaks_at_its_center() {
    let img = GrayImage::from_fn(64, 64, 8, |x, y| {
        let d2 = (x as i64 - 32).pow(2) + (y as i64 - 32).pow(2);
        if d2 <= 9 {
            0
        } else {
            255
        }
    })
    .unwrap();
    let maps = full_maps(&img, &[9, 15]);
    let mut best = (f64::MIN, 0, 0);
    for m in &maps {
        for row in 0..m.rows {
            for col in 0..m.cols {
                let (x, y) = m.position(col, row);
                if m.at(col, row) > best.0 {
                    best = (m.at(col, row), x, y);
                }
                assert_eq!(
                    m.at(col, row),
                    direct_response(&img, m.entry.filter_size, x, y)
                );
            }
        }
    }
    assert_eq!((best.1, best.2), (32, 32));
    assert!(best.0 > 0.0);
}

#[test]
fn constant_images_have_zero_response() {
    for v in [0u8, 1, 128, 255] {
        let img = GrayImage::filled(256, 256, v).unwrap();
        let (p, prepared) = plan(&img, &ReductionConfig::exact()).unwrap();
        let ii = ReducedIntegralImage::build(&prepared, p.bits).unwrap();
        for layers in filter_schedule_by_octave(4, 256, 256).unwrap() {
            for e in layers {
                let m: ResponseMap = response_map(&ii, &p, &e).unwrap();
                assert!(
                    m.values().iter().all(|&r| r == 0.0),
                    "value {v} size {}",
                    e.filter_size
                );
            }
        }
        assert!(detect(&img, &ReductionConfig::exact(), 50_000.0f64, 4)
            .unwrap()
            .is_empty());
    }
}

#[test]
fn plan_mismatch_is_rejected() {
    let img = GrayImage::filled(64, 64, 3).unwrap();
    let (p, _) = plan(&img, &ReductionConfig::exact()).unwrap();
    let ii = ReducedIntegralImage::build(&img, 24).unwrap();
    let r: Result<ResponseMap, _> = response_map(&ii, &p, &ScaleEntry::new(1, 9).unwrap());
    assert!(r.is_err());
}

#[test]
fn exact_equals_full_bitwise() {
    for seed in 0..3 {
        let img = blobby_image(100 + seed, 256, 256);
        let full = detect(&img, &ReductionConfig::full(), 50_000.0f64, 4).unwrap();
        let exact = detect(&img, &ReductionConfig::exact(), 50_000.0f64, 4).unwrap();
        assert!(!full.is_empty());
        assert_eq!(full.len(), exact.len());
        for (a, b) in full.iter().zip(&exact) {
            assert_eq!(a.x.to_bits(), b.x.to_bits());
            assert_eq!(a.y.to_bits(), b.y.to_bits());
            assert_eq!(a.scale.to_bits(), b.scale.to_bits());
            assert_eq!(a.response.to_bits(), b.response.to_bits());
        }
    }
}

#[test]
fn output_is_sorted_and_in_bounds() {
    let img = natural("coins");
    let pts = detect(&img, &ReductionConfig::full(), 50_000.0f64, 4).unwrap();
    assert!(pts.len() > 50);
    for w in pts.windows(2) {
        assert!(surfwl::surf::detect::point_order(&w[0], &w[1]).is_le());
    }
    for p in &pts {
        assert!(p.response > 50_000.0);
        assert!(p.x >= 0.0 && p.x < img.width() as f64);
        assert!(p.y >= 0.0 && p.y < img.height() as f64);
    }
}

#[test]
fn interpolation_stays_within_half_a_sample() {
    let img = natural("camera");
    let (p, prepared) = plan(&img, &ReductionConfig::full()).unwrap();
    let ii = ReducedIntegralImage::build(&prepared, p.bits).unwrap();
    let mut accepted = 0;
    for layers in filter_schedule_by_octave(4, img.width(), img.height()).unwrap() {
        let maps: Vec<ResponseMap> = layers
            .iter()
            .map(|e| response_map(&ii, &p, e).unwrap())
            .collect();
        for triple in maps.windows(3) {
            let triple: &[ResponseMap; 3] = triple.try_into().unwrap();
            let entries = [triple[0].entry, triple[1].entry, triple[2].entry];
            let stride = entries[1].stride as f64;
            let (s0, s1, s2) = (
                entries[0].sigma::<f64>(),
                entries[1].sigma::<f64>(),
                entries[2].sigma::<f64>(),
            );
            for c in nms_3d(triple, 50_000.0).unwrap() {
                let n = neighborhood(triple, c.x, c.y).unwrap();
                if let Ok(pt) = interpolate(&c, &n, &entries) {
                    accepted += 1;
                    assert!((pt.x - c.x as f64).abs() <= 0.5 * stride + 1e-9);
                    assert!((pt.y - c.y as f64).abs() <= 0.5 * stride + 1e-9);
                    assert!(pt.scale >= s1 - 0.5 * (s1 - s0) - 1e-9);
                    assert!(pt.scale <= s1 + 0.5 * (s2 - s1) + 1e-9);
                }
            }
        }
    }
    assert!(accepted > 100);
}

#[test]
fn no_26_adjacent_detections() {
    let img = natural("coffee");
    let (p, prepared) = plan(&img, &ReductionConfig::full()).unwrap();
    let ii = ReducedIntegralImage::build(&prepared, p.bits).unwrap();
    for layers in filter_schedule_by_octave(4, img.width(), img.height()).unwrap() {
        let maps: Vec<ResponseMap> = layers
            .iter()
            .map(|e| response_map(&ii, &p, e).unwrap())
            .collect();
        let per_layer: Vec<Vec<(usize, usize)>> = maps
            .windows(3)
            .map(|t| {
                nms_3d(t, 50_000.0)
                    .unwrap()
                    .into_iter()
                    .map(|c| (c.x, c.y))
                    .collect()
            })
            .collect();
        let s = layers[0].stride;
        for (i, a_layer) in per_layer.iter().enumerate() {
            for b_layer in per_layer.iter().skip(i).take(2) {
                for &(ax, ay) in a_layer {
                    for &(bx, by) in b_layer {
                        if std::ptr::eq(a_layer, b_layer) && (ax, ay) == (bx, by) {
                            continue;
                        }
                        assert!(
                            ax.abs_diff(bx) > s || ay.abs_diff(by) > s,
                            "adjacent ({ax},{ay}) ({bx},{by})"
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn negative_image_has_identical_candidates() {
    for img in [natural("coins"), blobby_image(7, 200, 220)] {
        let a = pre_threshold_candidates::<f64>(&img, &ReductionConfig::full(), 4).unwrap();
        let b =
            pre_threshold_candidates::<f64>(&img.inverted(), &ReductionConfig::full(), 4).unwrap();
        assert!(!a.is_empty());
        assert_eq!(a, b);
    }
}

#[test]
fn single_precision_path_runs() {
    let img = natural("coins");
    let (p, prepared) = plan(&img, &ReductionConfig::exact()).unwrap();
    let d32 = detect_prepared::<f32>(&prepared, &p, 50_000.0, 4).unwrap();
    let d64 = detect_prepared::<f64>(&prepared, &p, 50_000.0, 4).unwrap();
    let (n32, n64) = (d32.points.len() as f64, d64.points.len() as f64);
    assert!((n32 - n64).abs() <= 0.02 * n64, "{n32} vs {n64}");
}

#[test]
fn degenerate_inputs() {
    let zero = GrayImage::filled(256, 256, 0).unwrap();
    assert!(detect(&zero, &ReductionConfig::exact(), 50_000.0f64, 4)
        .unwrap()
        .is_empty());
    let small = GrayImage::filled(20, 20, 9).unwrap();
    assert!(detect(&small, &ReductionConfig::exact(), 50_000.0f64, 4).is_err());
    let img = blobby_image(3, 64, 64);
    assert!(detect(&img, &ReductionConfig::exact(), -1.0f64, 4).is_err());
    assert!(detect(&img, &ReductionConfig::exact(), 1.0f64, 5).is_err());
}
