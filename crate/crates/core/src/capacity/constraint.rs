//! Sets of admissible state laws and searches over them.

use crate::error::{Error, Result};
use crate::prob::{binomial, enumerate_type_counts, Pmf};

/// Membership slack for box constraints.
const MEMBERSHIP_TOLERANCE: f64 = 1e-12;
/// Cap on the number of grid points scanned by an inner search.
pub const INNER_GRID_POINTS: usize = 5000;

/// A closed convex set of state laws.
#[derive(Debug, Clone, PartialEq)]
pub enum ConstraintSet {
    Singleton(Pmf),
    /// `{P : |P(s) - center(s)| <= delta * center(s) for all s}`.
    Box { center: Pmf, delta: f64 },
    /// Convex hull of the given vertices.
    Polytope(Vec<Pmf>),
}

impl ConstraintSet {
    pub fn singleton(p: Pmf) -> Self {
        Self::Singleton(p)
    }

    pub fn boxed(center: Pmf, delta: f64) -> Result<Self> {
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(Error::InvalidArgument(format!("box radius {delta} must be finite and >= 0")));
        }
        Ok(Self::Box { center, delta })
    }

    pub fn polytope(vertices: Vec<Pmf>) -> Result<Self> {
        let Some(first) = vertices.first() else {
            return Err(Error::InvalidArgument("empty constraint set".into()));
        };
        if vertices.iter().any(|v| v.len() != first.len()) {
            return Err(Error::ShapeMismatch("polytope vertices over different alphabets".into()));
        }
        Ok(Self::Polytope(vertices))
    }

    pub fn state_count(&self) -> usize {
        match self {
            Self::Singleton(p) | Self::Box { center: p, .. } => p.len(),
            Self::Polytope(v) => v[0].len(),
        }
    }

    fn bounds(center: &Pmf, delta: f64) -> (Vec<f64>, Vec<f64>) {
        let lo = center.probs().iter().map(|c| (c * (1.0 - delta)).max(0.0)).collect();
        let hi = center.probs().iter().map(|c| (c * (1.0 + delta)).min(1.0)).collect();
        (lo, hi)
    }

    /// Membership test for singleton and box sets. Polytope membership is
    /// not decided here and yields `None`.
    pub fn contains(&self, p: &[f64]) -> Option<bool> {
        match self {
            Self::Singleton(q) => Some(
                p.len() == q.len() && p.iter().zip(q.probs()).all(|(a, b)| (a - b).abs() <= MEMBERSHIP_TOLERANCE),
            ),
            Self::Box { center, delta } => Some(
                p.len() == center.len()
                    && p.iter()
                        .zip(center.probs())
                        .all(|(a, c)| (a - c).abs() <= delta * c + MEMBERSHIP_TOLERANCE),
            ),
            Self::Polytope(_) => None,
        }
    }

    /// Extreme points. For a box these are the vertices of its intersection
    /// with the simplex.
    pub fn vertices(&self) -> Vec<Vec<f64>> {
        match self {
            Self::Singleton(p) => vec![p.probs().to_vec()],
            Self::Polytope(v) => v.iter().map(|p| p.probs().to_vec()).collect(),
            Self::Box { center, delta } => {
                let (lo, hi) = Self::bounds(center, *delta);
                box_vertices(&lo, &hi)
            }
        }
    }

    pub fn center(&self) -> Vec<f64> {
        match self {
            Self::Singleton(p) | Self::Box { center: p, .. } => p.probs().to_vec(),
            Self::Polytope(v) => {
                let k = v[0].len();
                let mut c = vec![0.0; k];
                for p in v {
                    for (a, b) in c.iter_mut().zip(p.probs()) {
                        *a += b / v.len() as f64;
                    }
                }
                c
            }
        }
    }

    /// `max_{P in set} sum_s P(s) c(s)`, attained at a vertex.
    pub fn linear_max(&self, c: &[f64]) -> (f64, Vec<f64>) {
        let mut best = (f64::NEG_INFINITY, Vec::new());
        for v in self.vertices() {
            let val: f64 = v.iter().zip(c).map(|(a, b)| a * b).sum();
            if val > best.0 {
                best = (val, v);
            }
        }
        best
    }

    pub(crate) fn domain(&self, resolution: usize) -> Domain {
        let resolution = resolution.max(1);
        match self {
            Self::Singleton(p) => Domain { kind: Kind::Point, grid: vec![p.probs().to_vec()], resolution },
            Self::Box { center, delta } => {
                let (lo, hi) = Self::bounds(center, *delta);
                let mut grid = box_grid(&lo, &hi, resolution);
                grid.extend(box_vertices(&lo, &hi));
                grid.push(center.probs().to_vec());
                Domain { kind: Kind::Box { lo, hi }, grid, resolution }
            }
            Self::Polytope(v) => {
                let m = v.len();
                let mut r = resolution;
                while r > 1
                    && binomial((r + m - 1) as u64, (m - 1) as u64).is_none_or(|c| c > INNER_GRID_POINTS as u128)
                {
                    r /= 2;
                }
                let mut grid: Vec<Vec<f64>> = enumerate_type_counts(r, m)
                    .map(|cs| cs.into_iter().map(|c| c.into_iter().map(|x| x as f64 / r as f64).collect()).collect())
                    .unwrap_or_default();
                grid.push(vec![1.0 / m as f64; m]);
                let vertices = v.iter().map(|p| p.probs().to_vec()).collect();
                Domain { kind: Kind::Hull { vertices }, grid, resolution: r }
            }
        }
    }
}

fn box_vertices(lo: &[f64], hi: &[f64]) -> Vec<Vec<f64>> {
    let k = lo.len();
    if k == 1 {
        return vec![vec![1.0]];
    }
    let mut out: Vec<Vec<f64>> = Vec::new();
    for free in 0..k {
        for mask in 0u64..(1u64 << (k - 1)) {
            let mut p = vec![0.0; k];
            let mut bit = 0;
            let mut used = 0.0;
            for s in 0..k {
                if s == free {
                    continue;
                }
                p[s] = if mask >> bit & 1 == 1 { hi[s] } else { lo[s] };
                used += p[s];
                bit += 1;
            }
            p[free] = 1.0 - used;
            if p[free] >= lo[free] - MEMBERSHIP_TOLERANCE && p[free] <= hi[free] + MEMBERSHIP_TOLERANCE {
                p[free] = p[free].clamp(lo[free], hi[free]);
                if !out.iter().any(|q| q.iter().zip(&p).all(|(a, b)| (a - b).abs() <= 1e-15)) {
                    out.push(p);
                }
            }
        }
    }
    out
}

/// Product grid over the first `k - 1` coordinates; the last coordinate
/// absorbs the remaining mass and must itself lie within its bounds.
fn box_grid(lo: &[f64], hi: &[f64], resolution: usize) -> Vec<Vec<f64>> {
    let k = lo.len();
    if k == 1 {
        return vec![vec![1.0]];
    }
    let per_axis_cap = (INNER_GRID_POINTS as f64).powf(1.0 / (k - 1) as f64).floor() as usize;
    let m = (resolution + 1).min(per_axis_cap.max(2));
    let mut out = Vec::new();
    let mut idx = vec![0usize; k - 1];
    loop {
        let mut p = vec![0.0; k];
        let mut used = 0.0;
        for s in 0..k - 1 {
            p[s] = lo[s] + (hi[s] - lo[s]) * idx[s] as f64 / (m - 1) as f64;
            used += p[s];
        }
        p[k - 1] = 1.0 - used;
        if p[k - 1] >= lo[k - 1] - MEMBERSHIP_TOLERANCE && p[k - 1] <= hi[k - 1] + MEMBERSHIP_TOLERANCE {
            p[k - 1] = p[k - 1].clamp(lo[k - 1], hi[k - 1]).max(0.0);
            out.push(p);
        }
        let mut s = 0;
        loop {
            if s == k - 1 {
                return out;
            }
            idx[s] += 1;
            if idx[s] < m {
                break;
            }
            idx[s] = 0;
            s += 1;
        }
    }
}

#[derive(Debug, Clone)]
enum Kind {
    Point,
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// Search runs over barycentric weights of the vertices.
    Hull { vertices: Vec<Vec<f64>> },
}

/// Search space of an inner optimization over a constraint set.
#[derive(Debug, Clone)]
pub(crate) struct Domain {
    kind: Kind,
    grid: Vec<Vec<f64>>,
    resolution: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct InnerMin {
    pub value: f64,
    pub argmin: Vec<f64>,
    /// Best value on the grid alone, before local refinement.
    pub grid_value: f64,
}

impl Domain {
    fn to_state(&self, param: &[f64]) -> Vec<f64> {
        match &self.kind {
            Kind::Hull { vertices } => {
                let mut q = vec![0.0; vertices[0].len()];
                for (w, v) in param.iter().zip(vertices) {
                    for (a, b) in q.iter_mut().zip(v) {
                        *a += w * b;
                    }
                }
                q
            }
            _ => param.to_vec(),
        }
    }

    fn feasible(&self, param: &[f64]) -> bool {
        match &self.kind {
            Kind::Point => false,
            Kind::Box { lo, hi } => param
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(p, (l, h))| *p >= l - 1e-15 && *p <= h + 1e-15),
            Kind::Hull { .. } => param.iter().all(|&w| w >= 0.0),
        }
    }

    /// Grid scan followed by pattern search along `e_i - e_j` directions.
    /// Exact for convex `f` up to the final step size.
    pub(crate) fn minimize(&self, f: impl Fn(&[f64]) -> f64) -> InnerMin {
        let mut best_param = self.grid[0].clone();
        let mut best = f(&self.to_state(&best_param));
        for p in &self.grid[1..] {
            let v = f(&self.to_state(p));
            if v < best {
                best = v;
                best_param = p.clone();
            }
        }
        let grid_value = best;
        if matches!(self.kind, Kind::Point) {
            return InnerMin { value: best, argmin: best_param, grid_value };
        }
        let k = best_param.len();
        let mut step = 1.0 / self.resolution as f64;
        let mut x = best_param;
        while step > 1e-12 {
            let mut improved = false;
            for i in 0..k {
                for j in 0..k {
                    if i == j {
                        continue;
                    }
                    let mut y = x.clone();
                    y[i] += step;
                    y[j] -= step;
                    if !self.feasible(&y) {
                        continue;
                    }
                    let v = f(&self.to_state(&y));
                    if v < best {
                        best = v;
                        x = y;
                        improved = true;
                    }
                }
            }
            if !improved {
                step /= 2.0;
            }
        }
        InnerMin { value: best, argmin: self.to_state(&x), grid_value }
    }
}
