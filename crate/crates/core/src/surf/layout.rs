//! Box layouts approximating the second-order Gaussian derivatives.

use crate::pixel::Rect;
use crate::surf::DetectError;

/// Rectangle given by inclusive offsets from the filter center.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OffsetRect {
    pub dx0: isize,
    pub dy0: isize,
    pub dx1: isize,
    pub dy1: isize,
}

impl OffsetRect {
    #[inline]
    pub fn width(&self) -> usize {
        (self.dx1 - self.dx0 + 1) as usize
    }

    #[inline]
    pub fn height(&self) -> usize {
        (self.dy1 - self.dy0 + 1) as usize
    }

    #[inline]
    pub fn area(&self) -> usize {
        self.width() * self.height()
    }

    /// Absolute rect for a filter centered at `(cx, cy)`. The caller
    /// guarantees the result is inside the image.
    #[inline]
    pub fn at(&self, cx: usize, cy: usize) -> Rect {
        Rect {
            x0: (cx as isize + self.dx0) as usize,
            y0: (cy as isize + self.dy0) as usize,
            x1: (cx as isize + self.dx1) as usize,
            y1: (cy as isize + self.dy1) as usize,
        }
    }

    fn transposed(&self) -> Self {
        Self {
            dx0: self.dy0,
            dy0: self.dx0,
            dx1: self.dy1,
            dy1: self.dx1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WeightedRect {
    pub rect: OffsetRect,
    pub weight: i64,
}

/// The three box filters of one scale.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HessianLayout {
    pub dxx: Vec<WeightedRect>,
    pub dyy: Vec<WeightedRect>,
    pub dxy: Vec<WeightedRect>,
}

/// Lays out the `Dxx`, `Dyy` and `Dxy` boxes for a filter of side `size`.
///
/// With lobe `l = size / 3`: `Dxx` is three adjacent `l x (2l - 1)` lobes
/// weighted `+1, -2, +1`; `Dyy` is its transpose; `Dxy` is four `l x l`
/// quadrants around a one-pixel cross, weighted `+1, -1, -1, +1`.
pub fn hessian_layout(size: usize) -> Result<HessianLayout, DetectError> {
    if size % 6 != 3 {
        return Err(DetectError::InvalidFilter(size));
    }
    let l = (size / 3) as isize;
    let half = (size as isize - 1) / 2;
    let inner = (l - 1) / 2;
    let tall = l - 1;

    let lobe = |dx0, dx1| OffsetRect {
        dx0,
        dy0: -tall,
        dx1,
        dy1: tall,
    };
    let dxx = vec![
        WeightedRect {
            rect: lobe(-half, -inner - 1),
            weight: 1,
        },
        WeightedRect {
            rect: lobe(-inner, inner),
            weight: -2,
        },
        WeightedRect {
            rect: lobe(inner + 1, half),
            weight: 1,
        },
    ];
    let dyy = dxx
        .iter()
        .map(|w| WeightedRect {
            rect: w.rect.transposed(),
            weight: w.weight,
        })
        .collect();
    let quad = |dx0, dy0| OffsetRect {
        dx0,
        dy0,
        dx1: dx0 + l - 1,
        dy1: dy0 + l - 1,
    };
    let dxy = vec![
        WeightedRect {
            rect: quad(-l, -l),
            weight: 1,
        },
        WeightedRect {
            rect: quad(1, -l),
            weight: -1,
        },
        WeightedRect {
            rect: quad(-l, 1),
            weight: -1,
        },
        WeightedRect {
            rect: quad(1, 1),
            weight: 1,
        },
    ];
    Ok(HessianLayout { dxx, dyy, dxy })
}
