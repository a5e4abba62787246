//! Filter-size ladder for the box-filter scale space.

use crate::scalar::Scalar;
use crate::surf::DetectError;

/// Maximum number of octaves.
pub const MAX_OCTAVES: u32 = 4;
/// Filter sizes per octave.
pub const SIZES_PER_OCTAVE: usize = 4;
/// Smallest filter side.
pub const BASE_FILTER: usize = 9;
/// Samples kept clear for one suppression step beyond the filter.
pub const NMS_MARGIN: usize = 3;
/// Smallest image side that admits any filter.
pub const MIN_IMAGE_SIDE: usize = BASE_FILTER + NMS_MARGIN;

/// One layer of the scale space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ScaleEntry {
    /// 1-based octave index.
    pub octave: u32,
    /// Side of the square filter, always `3 (mod 6)`.
    pub filter_size: usize,
    /// Sampling step of the response map, `2^(octave - 1)`.
    pub stride: usize,
}

impl ScaleEntry {
    pub fn new(octave: u32, filter_size: usize) -> Result<Self, DetectError> {
        if filter_size % 6 != 3 || octave == 0 || octave > 31 {
            return Err(DetectError::InvalidFilter(filter_size));
        }
        Ok(Self {
            octave,
            filter_size,
            stride: 1 << (octave - 1),
        })
    }

    /// Gaussian scale equivalent to this filter, `1.2 * size / 9`.
    pub fn sigma<T: Scalar>(&self) -> T {
        T::from_f64(1.2 * self.filter_size as f64 / 9.0).expect("finite")
    }

    /// Lobe length `l = size / 3`.
    #[inline]
    pub fn lobe(&self) -> usize {
        self.filter_size / 3
    }

    /// Samples closer than this to the border are not evaluated.
    #[inline]
    pub fn margin(&self) -> usize {
        self.filter_size.div_ceil(2)
    }
}

/// Filter size for `octave` (1-based) and `level` (0-based):
/// `3 * (2^octave * (level + 1) + 1)`.
pub fn filter_size(octave: u32, level: usize) -> usize {
    3 * ((1usize << octave) * (level + 1) + 1)
}

/// Scale ladder for a `width x height` image, grouped by octave.
///
/// Sizes larger than `min(width, height) - 3` are dropped, and an octave with
/// fewer than three surviving sizes is dropped whole.
pub fn filter_schedule_by_octave(
    octaves: u32,
    width: usize,
    height: usize,
) -> Result<Vec<Vec<ScaleEntry>>, DetectError> {
    if octaves == 0 || octaves > MAX_OCTAVES {
        return Err(DetectError::InvalidOctaves(octaves));
    }
    let limit = width.min(height).saturating_sub(NMS_MARGIN);
    let mut out = Vec::new();
    for o in 1..=octaves {
        let layers: Vec<ScaleEntry> = (0..SIZES_PER_OCTAVE)
            .map(|i| filter_size(o, i))
            .filter(|&s| s <= limit)
            .map(|s| ScaleEntry::new(o, s).expect("ladder sizes are valid"))
            .collect();
        if layers.len() >= 3 {
            out.push(layers);
        }
    }
    if out.is_empty() {
        return Err(DetectError::EmptySchedule { width, height });
    }
    Ok(out)
}

/// Flattened [`filter_schedule_by_octave`].
pub fn filter_schedule(
    octaves: u32,
    width: usize,
    height: usize,
) -> Result<Vec<ScaleEntry>, DetectError> {
    Ok(filter_schedule_by_octave(octaves, width, height)?
        .into_iter()
        .flatten()
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sizes(octaves: u32, w: usize, h: usize) -> Vec<Vec<usize>> {
        filter_schedule_by_octave(octaves, w, h)
            .unwrap()
            .into_iter()
            .map(|o| o.into_iter().map(|e| e.filter_size).collect())
            .collect()
    }

    #[test]
    fn full_ladder() {
        let s = filter_schedule(4, 800, 640).unwrap();
        assert_eq!(s.len(), 16);
        assert_eq!(s.iter().map(|e| e.filter_size).max(), Some(195));
        assert_eq!(
            sizes(4, 800, 640),
            vec![
                vec![9, 15, 21, 27],
                vec![15, 27, 39, 51],
                vec![27, 51, 75, 99],
                vec![51, 99, 147, 195]
            ]
        );
        let strides: Vec<usize> = s.iter().map(|e| e.stride).collect();
        assert_eq!(strides, [[1; 4], [2; 4], [4; 4], [8; 4]].concat());
    }

    #[test]
    fn single_octave() {
        let s = filter_schedule(1, 640, 480).unwrap();
        assert_eq!(
            s.iter().map(|e| e.filter_size).collect::<Vec<_>>(),
            vec![9, 15, 21, 27]
        );
        assert!(s.iter().all(|e| e.stride == 1));
    }

    #[test]
    fn small_image_trims_ladder() {
        // limit 97: octave 3 keeps 27, 51, 75 and octave 4 keeps only 51.
        assert_eq!(
            sizes(4, 100, 100),
            vec![vec![9, 15, 21, 27], vec![15, 27, 39, 51], vec![27, 51, 75]]
        );
        // limit 61: octave 3 keeps 27, 51 only, so it is dropped.
        assert_eq!(
            sizes(4, 64, 80),
            vec![vec![9, 15, 21, 27], vec![15, 27, 39, 51]]
        );
    }

    #[test]
    fn schedule_errors() {
        assert_eq!(
            filter_schedule(4, 11, 100),
            Err(DetectError::EmptySchedule {
                width: 11,
                height: 100
            })
        );
        // 9 and 15 fit a 20-pixel side but 21 does not.
        assert_eq!(
            filter_schedule(1, 20, 20),
            Err(DetectError::EmptySchedule {
                width: 20,
                height: 20
            })
        );
        assert_eq!(
            filter_schedule(5, 800, 640),
            Err(DetectError::InvalidOctaves(5))
        );
        assert_eq!(
            filter_schedule(0, 800, 640),
            Err(DetectError::InvalidOctaves(0))
        );
    }

    #[test]
    fn entry_invariants() {
        for e in filter_schedule(4, 800, 640).unwrap() {
            assert_eq!(e.filter_size % 6, 3);
            assert!(e.sigma::<f64>() > 0.0);
        }
        let e = ScaleEntry::new(1, 9).unwrap();
        assert_eq!((e.lobe(), e.margin()), (3, 5));
        assert!((e.sigma::<f64>() - 1.2).abs() < 1e-12);
        assert!(ScaleEntry::new(1, 10).is_err());
    }
}
