//! 3x3x3 non-maximum suppression over consecutive response maps.

use crate::scalar::Scalar;
use crate::surf::response::ResponseMap;
use crate::surf::DetectError;

/// A strict local maximum of the middle map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate<T> {
    /// Pixel position of the sample.
    pub x: usize,
    pub y: usize,
    pub response: T,
}

/// Responses around a candidate, indexed `[scale][dy][dx]` with the
/// candidate at `[1][1][1]`.
pub type Neighborhood<T> = [[[T; 3]; 3]; 3];

/// Gathers the 3x3x3 block centered on pixel `(x, y)` of the middle map, or
/// `None` when any neighbor is missing from one of the maps.
pub fn neighborhood<T: Scalar>(
    maps: &[ResponseMap<T>; 3],
    x: usize,
    y: usize,
) -> Option<Neighborhood<T>> {
    let s = maps[1].entry.stride as isize;
    let mut out = [[[T::zero(); 3]; 3]; 3];
    for (plane, map) in out.iter_mut().zip(maps) {
        for (dy, row) in (-1isize..=1).zip(plane.iter_mut()) {
            for (dx, v) in (-1isize..=1).zip(row.iter_mut()) {
                *v = map.get(x as isize + dx * s, y as isize + dy * s)?;
            }
        }
    }
    Some(out)
}

fn as_triple<T>(maps: &[ResponseMap<T>]) -> Result<&[ResponseMap<T>; 3], DetectError> {
    let triple: &[ResponseMap<T>; 3] = maps
        .try_into()
        .map_err(|_| DetectError::Arity(maps.len()))?;
    let s = triple[1].entry.stride;
    if triple.iter().any(|m| m.entry.stride != s) {
        return Err(DetectError::Validation(
            "maps in one suppression triple must share a stride".into(),
        ));
    }
    Ok(triple)
}

/// Samples of the middle map whose response exceeds `threshold` and is
/// strictly greater than all 26 neighbors. Ties suppress each other.
pub fn nms_3d<T: Scalar>(
    maps: &[ResponseMap<T>],
    threshold: T,
) -> Result<Vec<Candidate<T>>, DetectError> {
    let triple = as_triple(maps)?;
    let mid = &triple[1];
    let mut out = Vec::new();
    for row in 0..mid.rows {
        for col in 0..mid.cols {
            let v = mid.at(col, row);
            if v.is_nan() || v <= threshold {
                continue;
            }
            let (x, y) = mid.position(col, row);
            let Some(n) = neighborhood(triple, x, y) else {
                continue;
            };
            let is_max = (0..27)
                .filter(|&i| i != 13)
                .all(|i| v > n[i / 9][(i / 3) % 3][i % 3]);
            if is_max {
                out.push(Candidate { x, y, response: v });
            }
        }
    }
    Ok(out)
}

/// All strict 3x3x3 maxima of the middle map regardless of magnitude.
pub fn local_maxima<T: Scalar>(maps: &[ResponseMap<T>]) -> Result<Vec<Candidate<T>>, DetectError> {
    nms_3d(maps, T::neg_infinity())
}
