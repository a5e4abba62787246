//! Sub-pixel, sub-scale localization by fitting a 3-D quadratic.

use crate::scalar::Scalar;
use crate::surf::nms::{Candidate, Neighborhood};
use crate::surf::schedule::ScaleEntry;

/// Largest accepted offset from the candidate sample, per axis.
pub const MAX_OFFSET: f64 = 0.5;
/// Hessians with smaller absolute determinant are treated as singular.
pub const SINGULAR_DET: f64 = 1e-12;

/// A detected blob.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterestPoint<T> {
    /// Pixel coordinates, sub-pixel.
    pub x: T,
    pub y: T,
    /// Interpolated Gaussian scale.
    pub scale: T,
    /// Determinant response of the candidate sample.
    pub response: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reject {
    Singular,
    OffsetTooLarge,
}

/// Offset `-H^-1 g` (in sample units along x, y, scale) of the quadratic
/// fitted with central differences, plus the determinant of `H`.
pub fn quadratic_offset<T: Scalar>(n: &Neighborhood<T>) -> Result<[T; 3], Reject> {
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    let v = n[1][1][1];
    let g = [
        (n[1][1][2] - n[1][1][0]) / two,
        (n[1][2][1] - n[1][0][1]) / two,
        (n[2][1][1] - n[0][1][1]) / two,
    ];
    let hxx = n[1][1][2] + n[1][1][0] - two * v;
    let hyy = n[1][2][1] + n[1][0][1] - two * v;
    let hss = n[2][1][1] + n[0][1][1] - two * v;
    let hxy = (n[1][2][2] - n[1][2][0] - n[1][0][2] + n[1][0][0]) / four;
    let hxs = (n[2][1][2] - n[2][1][0] - n[0][1][2] + n[0][1][0]) / four;
    let hys = (n[2][2][1] - n[2][0][1] - n[0][2][1] + n[0][0][1]) / four;
    let h = [[hxx, hxy, hxs], [hxy, hyy, hys], [hxs, hys, hss]];

    let cof =
        |r0: usize, r1: usize, c0: usize, c1: usize| h[r0][c0] * h[r1][c1] - h[r0][c1] * h[r1][c0];
    let adj = [
        [cof(1, 2, 1, 2), -cof(0, 2, 1, 2), cof(0, 1, 1, 2)],
        [-cof(1, 2, 0, 2), cof(0, 2, 0, 2), -cof(0, 1, 0, 2)],
        [cof(1, 2, 0, 1), -cof(0, 2, 0, 1), cof(0, 1, 0, 1)],
    ];
    let det = h[0][0] * adj[0][0] + h[0][1] * adj[1][0] + h[0][2] * adj[2][0];
    if det.is_nan() || det.abs() < T::lit(SINGULAR_DET) {
        return Err(Reject::Singular);
    }
    let mut off = [T::zero(); 3];
    for (i, o) in off.iter_mut().enumerate() {
        *o = -(adj[i][0] * g[0] + adj[i][1] * g[1] + adj[i][2] * g[2]) / det;
    }
    Ok(off)
}

/// Refines a candidate of the middle entry of `entries`.
pub fn interpolate<T: Scalar>(
    candidate: &Candidate<T>,
    n: &Neighborhood<T>,
    entries: &[ScaleEntry; 3],
) -> Result<InterestPoint<T>, Reject> {
    let off = quadratic_offset(n)?;
    let limit = T::lit(MAX_OFFSET);
    if off.iter().any(|o| o.is_nan() || o.abs() > limit) {
        return Err(Reject::OffsetTooLarge);
    }
    let stride = T::lit(entries[1].stride as f64);
    let sigma_mid: T = entries[1].sigma();
    let step = if off[2] >= T::zero() {
        entries[2].sigma::<T>() - sigma_mid
    } else {
        sigma_mid - entries[0].sigma::<T>()
    };
    Ok(InterestPoint {
        x: T::lit(candidate.x as f64) + off[0] * stride,
        y: T::lit(candidate.y as f64) + off[1] * stride,
        scale: sigma_mid + off[2] * step,
        response: candidate.response,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn separable(fx: [f64; 3], fy: [f64; 3], fs: [f64; 3]) -> Neighborhood<f64> {
        let mut n = [[[0.0; 3]; 3]; 3];
        for s in 0..3 {
            for y in 0..3 {
                for x in 0..3 {
                    n[s][y][x] = fx[x] + fy[y] + fs[s];
                }
            }
        }
        n
    }

    /// Vertex of the parabola through `(-1, a), (0, b), (1, c)`.
    fn vertex(a: f64, b: f64, c: f64) -> f64 {
        (a - c) / (2.0 * (a - 2.0 * b + c))
    }

    fn entries() -> [ScaleEntry; 3] {
        [
            ScaleEntry::new(2, 15).unwrap(),
            ScaleEntry::new(2, 27).unwrap(),
            ScaleEntry::new(2, 39).unwrap(),
        ]
    }

    fn cand() -> Candidate<f64> {
        Candidate {
            x: 40,
            y: 30,
            response: 1e5,
        }
    }

    #[test]
    fn symmetric_peak_stays_put() {
        let n = separable([6.0, 10.0, 6.0], [3.0, 5.0, 3.0], [1.0, 4.0, 1.0]);
        let p = interpolate(&cand(), &n, &entries()).unwrap();
        assert_eq!((p.x, p.y), (40.0, 30.0));
        assert_abs_diff_eq!(p.scale, entries()[1].sigma::<f64>());
    }

    #[test]
    fn asymmetric_parabola_offset() {
        let n = separable([6.0, 10.0, 8.0], [3.0, 5.0, 3.0], [1.0, 4.0, 1.0]);
        let off = quadratic_offset(&n).unwrap();
        let expected = vertex(6.0, 10.0, 8.0);
        assert_abs_diff_eq!(expected, 1.0 / 6.0, epsilon = 1e-15);
        assert_abs_diff_eq!(off[0], expected, epsilon = 1e-12);
        assert_abs_diff_eq!(off[1], 0.0);
        // stride 2 in octave 2
        let p = interpolate(&cand(), &n, &entries()).unwrap();
        assert_abs_diff_eq!(p.x, 40.0 + 2.0 * expected, epsilon = 1e-12);
    }

    #[test]
    fn scale_offset_interpolates_sigma() {
        let n = separable([1.0, 5.0, 1.0], [1.0, 5.0, 1.0], [6.0, 10.0, 8.0]);
        let p = interpolate(&cand(), &n, &entries()).unwrap();
        let e = entries();
        let step = e[2].sigma::<f64>() - e[1].sigma::<f64>();
        assert_abs_diff_eq!(p.scale, e[1].sigma::<f64>() + step / 6.0, epsilon = 1e-12);
    }

    #[test]
    fn large_offset_rejected() {
        // a - c = 0.7 * 2 * (a - 2b + c) solved for c.
        let (a, b) = (0.0, 5.0);
        let c = (2.8 * b - 0.4 * a) / 2.4;
        assert_abs_diff_eq!(vertex(a, b, c), 0.7, epsilon = 1e-12);
        let n = separable([a, b, c], [1.0, 5.0, 1.0], [1.0, 5.0, 1.0]);
        assert_eq!(
            interpolate(&cand(), &n, &entries()),
            Err(Reject::OffsetTooLarge)
        );
        let n = separable([1.0, 5.0, 1.0], [1.0, 5.0, 1.0], [a, b, c]);
        assert_eq!(
            interpolate(&cand(), &n, &entries()),
            Err(Reject::OffsetTooLarge)
        );
    }

    #[test]
    fn flat_axis_is_singular() {
        let n = separable([6.0, 10.0, 8.0], [0.0; 3], [0.0; 3]);
        assert_eq!(quadratic_offset(&n), Err(Reject::Singular));
    }
}
