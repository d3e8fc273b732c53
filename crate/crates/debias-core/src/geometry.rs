//! Set-valued estimation support: level-set extraction (1-d roots by
//! bisection, 2-d contours by marching squares), the exact Hausdorff
//! distance, and dilation membership.
//!
//! Level sets are represented as finite point clouds on the estimated
//! curves; 2-d contour segments are densified so consecutive vertices are at
//! most one grid spacing apart, which bounds the discretization gap of the
//! cloud against the underlying contour.

use crate::error::{Error, Result};
use crate::grid::EvalGrid;

/// A finite set of 1-d or 2-d points (1-d points carry a zero second
/// coordinate). Construction sorts and removes duplicates within 1e-12.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    dim: usize,
    pts: Vec<[f64; 2]>,
}

impl PointSet {
    pub fn new_1d(xs: Vec<f64>) -> Result<Self> {
        Self::build(1, xs.into_iter().map(|x| [x, 0.0]).collect())
    }

    pub fn new_2d(pts: Vec<[f64; 2]>) -> Result<Self> {
        Self::build(2, pts)
    }

    fn build(dim: usize, mut pts: Vec<[f64; 2]>) -> Result<Self> {
        if pts.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("non-finite point coordinates".into()));
        }
        pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
        pts.dedup_by(|a, b| (a[0] - b[0]).abs() <= 1e-12 && (a[1] - b[1]).abs() <= 1e-12);
        Ok(Self { dim, pts })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.pts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pts.is_empty()
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.pts
    }

    /// Coordinates of the 1-d members.
    pub fn coords_1d(&self) -> Vec<f64> {
        self.pts.iter().map(|p| p[0]).collect()
    }
}

#[inline]
fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    (dx * dx + dy * dy).sqrt()
}

fn min_dist_to(set: &PointSet, q: [f64; 2]) -> f64 {
    set.pts
        .iter()
        .map(|&p| dist(p, q))
        .fold(f64::INFINITY, f64::min)
}

/// Roots of `values(x) = level` on a 1-d grid.
///
/// Each sign change of the piecewise-linear interpolant is refined by
/// bisection until `|f - level| < 1e-10 * max|values|`; exact grid hits are
/// kept as-is. Segments with non-finite endpoints are skipped.
pub fn extract_level_set_1d(values: &[f64], grid: &EvalGrid, level: f64) -> Result<PointSet> {
    if grid.dim() != 1 {
        return Err(Error::DimensionMismatch("expected a 1-d grid".into()));
    }
    let xs = grid.xs();
    if values.len() != xs.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} values on a {}-point grid",
            values.len(),
            xs.len()
        )));
    }
    let vmax = values
        .iter()
        .filter(|v| v.is_finite())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-10 * vmax.max(f64::MIN_POSITIVE);

    let mut roots = Vec::new();
    for i in 0..xs.len() {
        if values[i] == level {
            roots.push(xs[i]);
        }
        if i + 1 == xs.len() {
            break;
        }
        let (f0, f1) = (values[i] - level, values[i + 1] - level);
        if !(f0.is_finite() && f1.is_finite()) || !(f0 * f1 < 0.0) {
            continue;
        }
        // bisection on the linear interpolant between the two grid points
        let (x0, mut a, mut b) = (xs[i], xs[i], xs[i + 1]);
        let (va, vb) = (values[i], values[i + 1]);
        let slope = (vb - va) / (b - a);
        let interp = move |x: f64| va + (x - x0) * slope - level;
        let (mut fa, mut mid) = (interp(a), 0.5 * (a + b));
        for _ in 0..200 {
            mid = 0.5 * (a + b);
            let fm = interp(mid);
            if fm.abs() < tol {
                break;
            }
            if (fa < 0.0) == (fm < 0.0) {
                a = mid;
                fa = fm;
            } else {
                b = mid;
            }
        }
        roots.push(mid);
    }
    PointSet::new_1d(roots)
}

/// Marching-squares contour of `values(x, y) = level` on a tensor grid;
/// returns the densified vertex cloud.
///
/// Saddle cells (two opposite corners above the level) are disambiguated by
/// the cell-center average of the corner values.
pub fn extract_level_set_2d(values: &[f64], grid: &EvalGrid, level: f64) -> Result<PointSet> {
    let (xs, ys) = match grid {
        EvalGrid::Two { xs, ys } => (xs.as_slice(), ys.as_slice()),
        _ => return Err(Error::DimensionMismatch("expected a 2-d grid".into())),
    };
    let (nx, ny) = (xs.len(), ys.len());
    if values.len() != nx * ny {
        return Err(Error::DimensionMismatch(format!(
            "{} values on a {}x{} grid",
            values.len(),
            nx,
            ny
        )));
    }

    let mut pts: Vec<[f64; 2]> = Vec::new();
    let mut push_segment = |p: [f64; 2], q: [f64; 2], spacing: f64| {
        let steps = (dist(p, q) / spacing).ceil().max(1.0) as usize;
        for s in 0..=steps {
            let t = s as f64 / steps as f64;
            pts.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
        }
    };

    for ix in 0..nx - 1 {
        for iy in 0..ny - 1 {
            // corners counterclockwise from bottom-left
            let v = [
                values[ix * ny + iy],
                values[(ix + 1) * ny + iy],
                values[(ix + 1) * ny + iy + 1],
                values[ix * ny + iy + 1],
            ];
            if v.iter().any(|c| !c.is_finite()) {
                continue;
            }
            let corner = [
                [xs[ix], ys[iy]],
                [xs[ix + 1], ys[iy]],
                [xs[ix + 1], ys[iy + 1]],
                [xs[ix], ys[iy + 1]],
            ];
            let mut case = 0usize;
            for (bit, &cv) in v.iter().enumerate() {
                if cv >= level {
                    case |= 1 << bit;
                }
            }
            if case == 0 || case == 15 {
                continue;
            }
            // crossing point on the edge from corner a to corner b
            let cross = |a: usize, b: usize| -> [f64; 2] {
                let t = (level - v[a]) / (v[b] - v[a]);
                [
                    corner[a][0] + t * (corner[b][0] - corner[a][0]),
                    corner[a][1] + t * (corner[b][1] - corner[a][1]),
                ]
            };
            // edges: 0 bottom (0-1), 1 right (1-2), 2 top (2-3), 3 left (3-0)
            let edge = |e: usize| -> [f64; 2] {
                match e {
                    0 => cross(0, 1),
                    1 => cross(1, 2),
                    2 => cross(2, 3),
                    _ => cross(3, 0),
                }
            };
            let spacing = (xs[ix + 1] - xs[ix]).min(ys[iy + 1] - ys[iy]);
            let mut seg = |e1: usize, e2: usize| {
                push_segment(edge(e1), edge(e2), spacing);
            };
            match case {
                1 => seg(3, 0),
                2 => seg(0, 1),
                3 => seg(3, 1),
                4 => seg(1, 2),
                5 => {
                    let center = 0.25 * (v[0] + v[1] + v[2] + v[3]);
                    if center >= level {
                        seg(0, 1);
                        seg(2, 3);
                    } else {
                        seg(3, 0);
                        seg(1, 2);
                    }
                }
                6 => seg(0, 2),
                7 => seg(3, 2),
                8 => seg(2, 3),
                9 => seg(0, 2),
                10 => {
                    let center = 0.25 * (v[0] + v[1] + v[2] + v[3]);
                    if center >= level {
                        seg(3, 0);
                        seg(1, 2);
                    } else {
                        seg(0, 1);
                        seg(2, 3);
                    }
                }
                11 => seg(1, 2),
                12 => seg(3, 1),
                13 => seg(0, 1),
                _ => seg(3, 0),
            }
        }
    }
    PointSet::new_2d(pts)
}

/// One-sided sup of point-to-set distances `sup_{p in from} d(p, to)`;
/// `dilation_covers(to, r, from)` holds exactly when this is `<= r`.
pub fn directed_hausdorff(from: &PointSet, to: &PointSet) -> Result<f64> {
    if from.is_empty() || to.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    if from.dim() != to.dim() {
        return Err(Error::DimensionMismatch(
            "directed distance between sets of different dimension".into(),
        ));
    }
    Ok(from
        .pts
        .iter()
        .map(|&p| min_dist_to(to, p))
        .fold(0.0f64, f64::max))
}

/// Exact Hausdorff distance between two non-empty point sets (O(|a| |b|)).
pub fn hausdorff(a: &PointSet, b: &PointSet) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(
            "hausdorff between sets of different dimension".into(),
        ));
    }
    let one_sided = |from: &PointSet, to: &PointSet| {
        from.pts
            .iter()
            .map(|&p| min_dist_to(to, p))
            .fold(0.0f64, f64::max)
    };
    Ok(one_sided(a, b).max(one_sided(b, a)))
}

/// Whether every query point lies within `radius` of some center point
/// (i.e. `query` is a subset of the dilation `center (+) radius`).
pub fn dilation_covers(center: &PointSet, radius: f64, query: &PointSet) -> Result<bool> {
    if center.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    if radius < 0.0 {
        return Err(Error::InvalidConfig(format!(
            "dilation radius must be nonnegative, got {radius}"
        )));
    }
    if query.is_empty() {
        return Ok(true);
    }
    if center.dim() != query.dim() {
        return Err(Error::DimensionMismatch(
            "dilation between sets of different dimension".into(),
        ));
    }
    Ok(query
        .pts
        .iter()
        .all(|&q| min_dist_to(center, q) <= radius))
}
