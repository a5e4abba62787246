//! Interest-point file formats.

use std::io::{self, Write};

use crate::scalar::Scalar;
use crate::surf::InterestPoint;

/// One point per line, `x y scale response`, six decimals.
pub fn write_points_txt<T: Scalar, W: Write>(
    points: &[InterestPoint<T>],
    mut out: W,
) -> io::Result<()> {
    for p in points {
        writeln!(
            out,
            "{:.6} {:.6} {:.6} {:.6}",
            p.x, p.y, p.scale, p.response
        )?;
    }
    Ok(())
}

/// CSV with header `x,y,scale,response`, six decimals.
pub fn write_points_csv<T: Scalar, W: Write>(
    points: &[InterestPoint<T>],
    out: W,
) -> io::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(["x", "y", "scale", "response"])?;
    for p in points {
        w.write_record([
            format!("{:.6}", p.x),
            format!("{:.6}", p.y),
            format!("{:.6}", p.scale),
            format!("{:.6}", p.response),
        ])?;
    }
    w.flush()
}
