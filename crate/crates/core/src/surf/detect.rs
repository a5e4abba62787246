use std::cmp::Ordering;

use rayon::prelude::*;

use crate::integral::ReducedIntegralImage;
use crate::pixel::GrayImage;
use crate::reduction::{override_bits, plan, ReductionConfig};
use crate::scalar::Scalar;
use crate::surf::interp::{interpolate, InterestPoint, Reject};
use crate::surf::nms::{local_maxima, neighborhood, nms_3d};
use crate::surf::response::{response_map, ResponseMap};
use crate::surf::schedule::{filter_schedule_by_octave, ScaleEntry};
use crate::surf::{DetectError, DEFAULT_OCTAVES, DEFAULT_THRESHOLD};
use crate::wordlen::WordLengthPlan;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectOptions {
    pub threshold: f64,
    pub octaves: u32,
    /// Replaces the planned word length, possibly below the method's bound.
    pub bits_override: Option<u32>,
}

impl Default for DetectOptions {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_THRESHOLD,
            octaves: DEFAULT_OCTAVES,
            bits_override: None,
        }
    }
}

/// Everything a detector run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection<T> {
    pub plan: WordLengthPlan,
    /// The word length was overridden below the method's computed bound.
    pub below_bound: bool,
    pub points: Vec<InterestPoint<T>>,
    /// Suppression survivors before interpolation.
    pub candidates: usize,
    pub rejected_singular: usize,
    pub rejected_offset: usize,
}

/// Descending response, then `(y, x, scale)` ascending.
pub fn point_order<T: Scalar>(a: &InterestPoint<T>, b: &InterestPoint<T>) -> Ordering {
    let cmp = |p: T, q: T| p.partial_cmp(&q).unwrap_or(Ordering::Equal);
    cmp(b.response, a.response)
        .then_with(|| cmp(a.y, b.y))
        .then_with(|| cmp(a.x, b.x))
        .then_with(|| cmp(a.scale, b.scale))
}

fn octave_maps<T: Scalar>(
    ii: &ReducedIntegralImage,
    plan: &WordLengthPlan,
    octaves: &[Vec<ScaleEntry>],
) -> Result<Vec<Vec<ResponseMap<T>>>, DetectError> {
    octaves
        .iter()
        .map(|layers| {
            layers
                .par_iter()
                .map(|e| response_map(ii, plan, e))
                .collect()
        })
        .collect()
}

/// Runs the pipeline on an already prepared image under `plan`.
pub fn detect_prepared<T: Scalar>(
    prepared: &GrayImage,
    plan: &WordLengthPlan,
    threshold: T,
    octaves: u32,
) -> Result<Detection<T>, DetectError> {
    if !threshold.is_finite() || threshold < T::zero() {
        return Err(DetectError::InvalidThreshold(threshold.to_string()));
    }
    let schedule = filter_schedule_by_octave(octaves, prepared.width(), prepared.height())?;
    let ii = ReducedIntegralImage::build(prepared, plan.bits)?;
    let maps = octave_maps::<T>(&ii, plan, &schedule)?;

    let mut det = Detection {
        plan: *plan,
        below_bound: false,
        points: Vec::new(),
        candidates: 0,
        rejected_singular: 0,
        rejected_offset: 0,
    };
    for layers in &maps {
        for triple in layers.windows(3) {
            let triple: &[ResponseMap<T>; 3] = triple.try_into().expect("window of 3");
            let entries = [triple[0].entry, triple[1].entry, triple[2].entry];
            for c in nms_3d(triple, threshold)? {
                det.candidates += 1;
                let n = neighborhood(triple, c.x, c.y).expect("candidate has a full neighborhood");
                match interpolate(&c, &n, &entries) {
                    Ok(p) => det.points.push(p),
                    Err(Reject::Singular) => det.rejected_singular += 1,
                    Err(Reject::OffsetTooLarge) => det.rejected_offset += 1,
                }
            }
        }
    }
    det.points.sort_by(point_order);
    Ok(det)
}

/// Plans, preprocesses and detects.
pub fn run_detector<T: Scalar>(
    img: &GrayImage,
    cfg: &ReductionConfig,
    opts: &DetectOptions,
) -> Result<Detection<T>, DetectError> {
    let (mut word_plan, prepared) = plan(img, cfg)?;
    let mut below = false;
    if let Some(bits) = opts.bits_override {
        (word_plan, below) = override_bits(&word_plan, bits)?;
    }
    let mut det = detect_prepared(&prepared, &word_plan, T::lit(opts.threshold), opts.octaves)?;
    det.below_bound = below;
    Ok(det)
}

/// Interest points of `img` under `cfg`, strongest first.
pub fn detect<T: Scalar>(
    img: &GrayImage,
    cfg: &ReductionConfig,
    threshold: T,
    octaves: u32,
) -> Result<Vec<InterestPoint<T>>, DetectError> {
    let (word_plan, prepared) = plan(img, cfg)?;
    Ok(detect_prepared(&prepared, &word_plan, threshold, octaves)?.points)
}

/// A strict 3x3x3 maximum before thresholding: octave, middle filter size
/// and sample position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CandidateKey {
    pub octave: u32,
    pub filter_size: usize,
    pub x: usize,
    pub y: usize,
}

/// Every strict local maximum of every suppression triple, irrespective of
/// the threshold, sorted.
pub fn pre_threshold_candidates<T: Scalar>(
    img: &GrayImage,
    cfg: &ReductionConfig,
    octaves: u32,
) -> Result<Vec<CandidateKey>, DetectError> {
    let (word_plan, prepared) = plan(img, cfg)?;
    let schedule = filter_schedule_by_octave(octaves, prepared.width(), prepared.height())?;
    let ii = ReducedIntegralImage::build(&prepared, word_plan.bits)?;
    let maps = octave_maps::<T>(&ii, &word_plan, &schedule)?;
    let mut keys = Vec::new();
    for layers in &maps {
        for triple in layers.windows(3) {
            let e = triple[1].entry;
            keys.extend(local_maxima(triple)?.into_iter().map(|c| CandidateKey {
                octave: e.octave,
                filter_size: e.filter_size,
                x: c.x,
                y: c.y,
            }));
        }
    }
    keys.sort_unstable();
    Ok(keys)
}
