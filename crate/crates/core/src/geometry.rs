//! Closed polylines: arc-length resampling, distances and winding.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::kappa::cross;
use crate::Vec2;

/// Length of the closed polyline, including the segment from last to first.
pub fn perimeter(points: &[Vec2]) -> f64 {
    let n = points.len();
    (0..n).map(|i| (points[(i + 1) % n] - points[i]).norm()).sum()
}

/// Arc-length stations of `n` equally spaced samples along a closed
/// polyline, as `(segment index, fraction along the segment)`, starting at
/// `points[0]`.
pub fn arc_length_stations(points: &[Vec2], n: usize) -> Result<Vec<(usize, f64)>> {
    if points.len() < 3 {
        return Err(Error::Shape(format!(
            "closed curve needs at least 3 points, got {}",
            points.len()
        )));
    }
    if n == 0 {
        return Err(Error::Shape("cannot resample to 0 points".into()));
    }
    let m = points.len();
    let mut cumulative = Vec::with_capacity(m + 1);
    cumulative.push(0.0);
    for i in 0..m {
        let seg = (points[(i + 1) % m] - points[i]).norm();
        cumulative.push(cumulative[i] + seg);
    }
    let total = cumulative[m];
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::Shape(format!("degenerate closed curve of length {total}")));
    }

    let mut out = Vec::with_capacity(n);
    let mut seg = 0;
    for i in 0..n {
        let s = total * i as f64 / n as f64;
        while seg + 1 < m && cumulative[seg + 1] <= s {
            seg += 1;
        }
        let len = cumulative[seg + 1] - cumulative[seg];
        let t = if len == 0.0 { 0.0 } else { (s - cumulative[seg]) / len };
        out.push((seg, t));
    }
    Ok(out)
}

/// Linear interpolation of per-vertex values of a closed polyline at a
/// station returned by [`arc_length_stations`].
pub fn interpolate_closed<T>(values: &[T], station: (usize, f64)) -> T
where
    T: Copy + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T>,
{
    let (i, t) = station;
    let a = values[i];
    let b = values[(i + 1) % values.len()];
    a * (1.0 - t) + b * t
}

/// Resamples a closed polyline to `n` points equally spaced in arc length,
/// starting at `points[0]` and keeping the orientation.
pub fn resample_closed_curve(points: &[Vec2], n: usize) -> Result<Vec<Vec2>> {
    let stations = arc_length_stations(points, n)?;
    Ok(stations
        .into_iter()
        .map(|(i, t)| {
            let a = points[i];
            let b = points[(i + 1) % points.len()];
            a + (b - a) * t
        })
        .collect())
}

/// Shoelace area: positive for counterclockwise curves.
pub fn signed_area(points: &[Vec2]) -> f64 {
    let n = points.len();
    0.5 * (0..n).map(|i| cross(points[i], points[(i + 1) % n])).sum::<f64>()
}

/// Turning number of the closed polyline around `center`.
pub fn winding_number(points: &[Vec2], center: Vec2) -> i32 {
    (total_angle(points, center) / (2.0 * PI)).round() as i32
}

fn total_angle(points: &[Vec2], center: Vec2) -> f64 {
    let n = points.len();
    (0..n)
        .map(|i| {
            let a = points[i] - center;
            let b = points[(i + 1) % n] - center;
            cross(a, b).atan2(a.dot(&b))
        })
        .sum()
}

/// True if `q` is enclosed by the closed polyline (non-zero winding).
pub fn contains(points: &[Vec2], q: Vec2) -> bool {
    winding_number(points, q) != 0
}

/// Distance from `q` to the segment `[a, b]`.
pub fn point_segment_distance(q: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return (q - a).norm();
    }
    let t = ((q - a).dot(&ab) / len2).clamp(0.0, 1.0);
    (q - (a + ab * t)).norm()
}

/// Distance from `q` to the closed polyline.
pub fn point_curve_distance(q: Vec2, curve: &[Vec2]) -> f64 {
    let n = curve.len();
    match n {
        0 => f64::INFINITY,
        1 => (q - curve[0]).norm(),
        _ => (0..n)
            .map(|i| point_segment_distance(q, curve[i], curve[(i + 1) % n]))
            .fold(f64::INFINITY, f64::min),
    }
}

/// Symmetric Hausdorff distance between two closed polylines, measured from
/// the vertices of each to the segments of the other.
pub fn hausdorff(a: &[Vec2], b: &[Vec2]) -> f64 {
    let directed = |from: &[Vec2], to: &[Vec2]| {
        from.iter()
            .map(|&q| point_curve_distance(q, to))
            .fold(0.0, f64::max)
    };
    directed(a, b).max(directed(b, a))
}

/// Largest distance between any two points.
pub fn diameter(points: &[Vec2]) -> f64 {
    let mut best = 0.0f64;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            best = best.max((a - b).norm_squared());
        }
    }
    best.sqrt()
}

/// Index of the point nearest to `q`.
pub fn nearest_index(points: &[Vec2], q: Vec2) -> usize {
    let mut best = (0, f64::INFINITY);
    for (i, p) in points.iter().enumerate() {
        let d = (p - q).norm_squared();
        if d < best.1 {
            best = (i, d);
        }
    }
    best.0
}

/// Outward unit normal at vertex `i` of a closed polyline with the given
/// orientation (+1 counterclockwise), from the central-difference tangent.
pub fn outward_normal(points: &[Vec2], i: usize, orientation: i32) -> Vec2 {
    let n = points.len();
    let t = points[(i + 1) % n] - points[(i + n - 1) % n];
    let normal = Vec2::new(t.y, -t.x) * orientation as f64;
    normal / normal.norm()
}

/// Sample mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}
