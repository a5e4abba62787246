//! Hessian-determinant response maps evaluated through the reduced integral image.

use rayon::prelude::*;

use crate::integral::ReducedIntegralImage;
use crate::reduction::recover_box_value;
use crate::scalar::Scalar;
use crate::surf::layout::{hessian_layout, HessianLayout, WeightedRect};
use crate::surf::schedule::{ScaleEntry, BASE_FILTER};
use crate::surf::DetectError;
use crate::wordlen::WordLengthPlan;

/// Responses of one scale, sampled on the lattice `k * stride` of its octave.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseMap<T> {
    pub entry: ScaleEntry,
    /// Border band (pixels) where the filter would overhang the image.
    pub margin: usize,
    /// Pixel coordinate of the first sample column / row.
    pub origin_x: usize,
    pub origin_y: usize,
    pub cols: usize,
    pub rows: usize,
    data: Vec<T>,
}

impl<T: Scalar> ResponseMap<T> {
    /// Map with explicit contents, for building synthetic volumes.
    pub fn from_parts(
        entry: ScaleEntry,
        image_width: usize,
        image_height: usize,
        data: Vec<T>,
    ) -> Result<Self, DetectError> {
        let mut map = Self::empty(entry, image_width, image_height);
        if data.len() != map.cols * map.rows {
            return Err(DetectError::Validation(format!(
                "response grid is {}x{} but {} values were given",
                map.cols,
                map.rows,
                data.len()
            )));
        }
        map.data = data;
        Ok(map)
    }

    fn empty(entry: ScaleEntry, width: usize, height: usize) -> Self {
        let margin = entry.margin();
        let stride = entry.stride;
        let span = |n: usize| n.saturating_sub(2 * margin) / stride;
        let origin = margin.div_ceil(stride) * stride;
        let (cols, rows) = (span(width), span(height));
        Self {
            entry,
            margin,
            origin_x: origin,
            origin_y: origin,
            cols,
            rows,
            data: Vec::new(),
        }
    }

    /// Response at grid index `(col, row)`.
    #[inline]
    pub fn at(&self, col: usize, row: usize) -> T {
        self.data[row * self.cols + col]
    }

    pub fn values(&self) -> &[T] {
        &self.data
    }

    /// Pixel position of grid index `(col, row)`.
    #[inline]
    pub fn position(&self, col: usize, row: usize) -> (usize, usize) {
        (
            self.origin_x + col * self.entry.stride,
            self.origin_y + row * self.entry.stride,
        )
    }

    /// Response at pixel `(x, y)`, if that pixel is a sample of this map.
    #[inline]
    pub fn get(&self, x: isize, y: isize) -> Option<T> {
        let s = self.entry.stride as isize;
        let (dx, dy) = (x - self.origin_x as isize, y - self.origin_y as isize);
        if dx < 0 || dy < 0 || dx % s != 0 || dy % s != 0 {
            return None;
        }
        let (c, r) = ((dx / s) as usize, (dy / s) as usize);
        (c < self.cols && r < self.rows).then(|| self.at(c, r))
    }
}

/// Factor applied to each of `Dxx`, `Dyy`, `Dxy`: `(9 / size)^2`, so the
/// 9x9 base filter keeps raw box units and larger filters are scaled to it.
///
/// The approximate method is not compensated: its box sums stay at the
/// reduced scale of the requantized pixels.
pub fn normalization<T: Scalar>(entry: &ScaleEntry, _plan: &WordLengthPlan) -> T {
    let ratio = BASE_FILTER as f64 / entry.filter_size as f64;
    T::lit(ratio * ratio)
}

#[inline]
fn weighted_sum(
    ii: &ReducedIntegralImage,
    plan: &WordLengthPlan,
    rects: &[WeightedRect],
    cx: usize,
    cy: usize,
) -> i128 {
    rects
        .iter()
        .map(|w| {
            let raw = ii.box_sum_unchecked(w.rect.at(cx, cy));
            i128::from(w.weight) * i128::from(recover_box_value(raw, plan))
        })
        .sum()
}

/// Unnormalized `(Dxx, Dyy, Dxy)` at pixel `(cx, cy)`, in recovered units.
pub fn hessian_sums(
    ii: &ReducedIntegralImage,
    plan: &WordLengthPlan,
    layout: &HessianLayout,
    cx: usize,
    cy: usize,
) -> (i128, i128, i128) {
    (
        weighted_sum(ii, plan, &layout.dxx, cx, cy),
        weighted_sum(ii, plan, &layout.dyy, cx, cy),
        weighted_sum(ii, plan, &layout.dxy, cx, cy),
    )
}

/// `Dxx * Dyy - (0.9 * Dxy)^2` from normalized derivative responses.
#[inline]
pub fn determinant<T: Scalar>(dxx: T, dyy: T, dxy: T) -> T {
    let m = T::dxy_weight() * dxy;
    dxx * dyy - m * m
}

/// Evaluates the determinant response of `entry` at every lattice sample
/// where the filter fits inside the image.
pub fn response_map<T: Scalar>(
    ii: &ReducedIntegralImage,
    plan: &WordLengthPlan,
    entry: &ScaleEntry,
) -> Result<ResponseMap<T>, DetectError> {
    if ii.bits() != plan.bits {
        return Err(DetectError::Validation(format!(
            "integral image has {} bits but the plan expects {}",
            ii.bits(),
            plan.bits
        )));
    }
    if plan.bits + plan.post_shift > 64 {
        return Err(DetectError::Validation(
            "recovered box sums exceed 64 bits".into(),
        ));
    }
    let layout = hessian_layout(entry.filter_size)?;
    let mut map = ResponseMap::empty(*entry, ii.width(), ii.height());
    let norm: T = normalization(entry, plan);
    let (cols, stride, ox, oy) = (map.cols, entry.stride, map.origin_x, map.origin_y);
    let mut data = vec![T::zero(); map.cols * map.rows];
    if cols > 0 {
        data.par_chunks_mut(cols)
            .enumerate()
            .for_each(|(row, out)| {
                let cy = oy + row * stride;
                for (col, slot) in out.iter_mut().enumerate() {
                    let cx = ox + col * stride;
                    let (dxx, dyy, dxy) = hessian_sums(ii, plan, &layout, cx, cy);
                    let to_t = |v: i128| T::from_i128(v).expect("finite") * norm;
                    *slot = determinant(to_t(dxx), to_t(dyy), to_t(dxy));
                }
            });
    }
    map.data = data;
    Ok(map)
}
