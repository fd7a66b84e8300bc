//! Binary-image contour extraction: largest connected component selection and
//! Moore-neighbour boundary tracing.

use crate::error::{Error, Result};
use crate::smoothing::DiscreteCurve;

/// Row-major binary raster; `true` marks foreground.
#[derive(Debug, Clone)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    pixels: Vec<bool>,
}

impl BinaryImage {
    pub fn new(width: usize, height: usize, pixels: Vec<bool>) -> Result<Self> {
        if pixels.len() != width * height {
            return Err(Error::DimensionMismatch {
                expected: width * height,
                got: pixels.len(),
            });
        }
        Ok(BinaryImage { width, height, pixels })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        x < self.width && y < self.height && self.pixels[y * self.width + x]
    }
}

/// How to pick the trace starting pixel within the selected component.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StartPolicy {
    /// Topmost row, then leftmost column (raster order).
    TopLeft,
    /// Pixel closest to the raster origin in Euclidean distance; raster
    /// order breaks ties.
    MinOriginDistance,
}

/// Label the largest 8-connected foreground component; returns its pixel
/// mask, or None when the image has no foreground.
fn largest_component(img: &BinaryImage) -> Option<Vec<bool>> {
    let (w, h) = (img.width, img.height);
    let mut best: Option<Vec<bool>> = None;
    let mut best_size = 0usize;
    let mut seen = vec![false; w * h];
    let mut stack = Vec::new();
    for start in 0..w * h {
        if seen[start] || !img.pixels[start] {
            continue;
        }
        let mut mask = vec![false; w * h];
        let mut size = 0usize;
        stack.push(start);
        seen[start] = true;
        while let Some(idx) = stack.pop() {
            mask[idx] = true;
            size += 1;
            let (x, y) = ((idx % w) as i64, (idx / w) as i64);
            for dy in -1..=1i64 {
                for dx in -1..=1i64 {
                    if dx == 0 && dy == 0 {
                        continue;
                    }
                    let (nx, ny) = (x + dx, y + dy);
                    if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                        continue;
                    }
                    let nidx = ny as usize * w + nx as usize;
                    if !seen[nidx] && img.pixels[nidx] {
                        seen[nidx] = true;
                        stack.push(nidx);
                    }
                }
            }
        }
        if size > best_size {
            best_size = size;
            best = Some(mask);
        }
    }
    best
}

/// Moore neighbourhood in clockwise raster order starting from west.
const MOORE: [(i64, i64); 8] = [
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
];

/// Trace the outer boundary of the largest foreground component.
///
/// Moore-neighbour tracing with Jacob's stopping criterion: the walk ends
/// when the start pixel is re-entered from the same direction as the first
/// entry. Pixel centres are emitted with the y axis flipped (so the curve
/// lives in ordinary mathematical coordinates) and the vertex order is
/// counter-clockwise in those coordinates. Parameters are uniform on [0,1)
/// over the boundary pixels.
pub fn trace_contour(img: &BinaryImage, policy: StartPolicy) -> Result<DiscreteCurve> {
    let mask = largest_component(img).ok_or(Error::NoContour)?;
    let w = img.width;
    let on = |x: i64, y: i64| -> bool {
        x >= 0
            && y >= 0
            && (x as usize) < w
            && (y as usize) < img.height
            && mask[y as usize * w + x as usize]
    };

    let mut candidates: Vec<(usize, usize)> = Vec::new();
    for (idx, &m) in mask.iter().enumerate() {
        if m {
            candidates.push((idx % w, idx / w));
        }
    }
    let start = match policy {
        StartPolicy::TopLeft => *candidates
            .iter()
            .min_by_key(|&&(x, y)| (y, x))
            .expect("component is nonempty"),
        StartPolicy::MinOriginDistance => *candidates
            .iter()
            .min_by_key(|&&(x, y)| (x * x + y * y, y, x))
            .expect("component is nonempty"),
    };

    if candidates.len() < 3 {
        return Err(Error::DegenerateContour);
    }

    // The scan reaches the start pixel coming from the west (TopLeft) or,
    // in general, from outside; use the west neighbour as the initial
    // backtrack, which is background for a topmost-leftmost start. For the
    // origin-distance policy fall back to any background Moore neighbour.
    let (sx, sy) = (start.0 as i64, start.1 as i64);
    let mut back_dir = MOORE
        .iter()
        .position(|&(dx, dy)| !on(sx + dx, sy + dy))
        .ok_or(Error::DegenerateContour)?; // start is interior: no boundary

    let mut boundary: Vec<(i64, i64)> = Vec::new();
    let (mut cx, mut cy) = (sx, sy);
    let mut first_exit_dir: Option<usize> = None;
    let budget = 4 * mask.iter().filter(|&&m| m).count() + 8;
    for _ in 0..budget {
        boundary.push((cx, cy));
        // Scan clockwise from just past the backtrack direction.
        let mut moved = false;
        for step in 1..=8usize {
            let dir = (back_dir + step) % 8;
            let (dx, dy) = MOORE[dir];
            let (nx, ny) = (cx + dx, cy + dy);
            if on(nx, ny) {
                if (cx, cy) == (sx, sy) {
                    match first_exit_dir {
                        None => first_exit_dir = Some(dir),
                        Some(first) if first == dir => {
                            // The walk is re-exiting the start pixel the same
                            // way it did initially: the boundary has closed.
                            boundary.pop();
                            return finish_trace(img, boundary);
                        }
                        Some(_) => {}
                    }
                }
                // New backtrack: the direction pointing from the next pixel
                // back toward the previously scanned background pixel.
                let prev = (back_dir + step - 1) % 8;
                let (px, py) = (cx + MOORE[prev].0, cy + MOORE[prev].1);
                back_dir = MOORE
                    .iter()
                    .position(|&(ddx, ddy)| (nx + ddx, ny + ddy) == (px, py))
                    .unwrap_or((dir + 4) % 8);
                cx = nx;
                cy = ny;
                moved = true;
                break;
            }
        }
        if !moved {
            // Isolated pixel: a single-point boundary is not a curve.
            return Err(Error::DegenerateContour);
        }
    }
    Err(Error::DegenerateContour)
}

/// Convert traced pixel positions into a closed discrete curve: flip y so the
/// image's top row has the largest ordinate, orient counter-clockwise, and
/// parametrize uniformly.
fn finish_trace(img: &BinaryImage, mut boundary: Vec<(i64, i64)>) -> Result<DiscreteCurve> {
    // Drop the duplicated start pixel if the walk closed exactly.
    while boundary.len() > 1 && boundary.last() == boundary.first() {
        boundary.pop();
    }
    if boundary.len() < 3 {
        return Err(Error::DegenerateContour);
    }
    let h = img.height as f64;
    let mut points: Vec<[f64; 2]> = boundary
        .iter()
        .map(|&(x, y)| [x as f64, h - 1.0 - y as f64])
        .collect();
    // Shoelace signed area; positive means counter-clockwise.
    let n = points.len();
    let mut area2 = 0.0;
    for i in 0..n {
        let j = (i + 1) % n;
        area2 += points[i][0] * points[j][1] - points[j][0] * points[i][1];
    }
    if area2 < 0.0 {
        points[1..].reverse();
    }
    let params: Vec<f64> = (0..n).map(|i| i as f64 / n as f64).collect();
    DiscreteCurve::new(params, points)
}
