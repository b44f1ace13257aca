//! Points, observation windows and finite configurations.

mod index;
pub mod io;

pub use index::CellIndex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A location in `R^d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point(pub Vec<f64>);

impl Point {
    pub fn new(coords: impl Into<Vec<f64>>) -> Self {
        Point(coords.into())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Point(v)
    }
}

/// Squared Euclidean distance; every pair potential takes this as its argument.
#[inline]
pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Axis-aligned box `[lower, upper]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Window {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() {
            return Err(Error::InvalidWindow("dimension must be at least 1".into()));
        }
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch { expected: lower.len(), got: upper.len() });
        }
        for (k, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !lo.is_finite() || !hi.is_finite() || lo >= hi {
                return Err(Error::InvalidWindow(format!(
                    "axis {k}: lower {lo} must be finite and below upper {hi}"
                )));
            }
        }
        Ok(Window { lower, upper })
    }

    /// The cube `[0, side]^d`.
    pub fn cube(dim: usize, side: f64) -> Result<Self> {
        Window::new(vec![0.0; dim], vec![side; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn extent(&self, axis: usize) -> f64 {
        self.upper[axis] - self.lower[axis]
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim()).map(|k| self.extent(k)).product()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter().zip(self.lower.iter().zip(&self.upper)).all(|(v, (lo, hi))| *lo <= *v && *v <= *hi)
    }

    /// Distance from an interior point to the nearest face.
    pub fn distance_to_boundary(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(v, (lo, hi))| (v - lo).min(hi - v))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn translated(&self, shift: &[f64]) -> Self {
        Window {
            lower: self.lower.iter().zip(shift).map(|(a, b)| a + b).collect(),
            upper: self.upper.iter().zip(shift).map(|(a, b)| a + b).collect(),
        }
    }
}

/// Finite point set inside a window; point identity is the list position.
#[derive(Clone, Debug, PartialEq)]
pub struct Configuration {
    window: Window,
    coords: Vec<f64>,
}

impl Configuration {
    pub fn empty(window: Window) -> Self {
        Configuration { window, coords: Vec::new() }
    }

    /// Builds a configuration from points, rejecting points outside the window and exact duplicates.
    pub fn new(window: Window, points: &[Point]) -> Result<Self> {
        let d = window.dim();
        let mut coords = Vec::with_capacity(points.len() * d);
        for p in points {
            if p.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, got: p.dim() });
            }
            coords.extend_from_slice(p.coords());
        }
        Configuration::from_flat(window, coords)
    }

    /// Same as [`Configuration::new`] with coordinates laid out point-major.
    pub fn from_flat(window: Window, coords: Vec<f64>) -> Result<Self> {
        let d = window.dim();
        if !coords.len().is_multiple_of(d) {
            return Err(Error::DimensionMismatch { expected: d, got: coords.len() % d });
        }
        for (i, x) in coords.chunks_exact(d).enumerate() {
            if !window.contains(x) || x.iter().any(|v| !v.is_finite()) {
                return Err(Error::PointOutsideWindow { index: i });
            }
        }
        let config = Configuration { window, coords };
        if let Some((first, second)) = config.find_duplicate() {
            return Err(Error::DuplicatePoint { first, second });
        }
        Ok(config)
    }

    pub(crate) fn from_flat_unchecked(window: Window, coords: Vec<f64>) -> Self {
        debug_assert_eq!(coords.len() % window.dim(), 0);
        Configuration { window, coords }
    }

    fn find_duplicate(&self) -> Option<(usize, usize)> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| {
            self.point(a)
                .iter()
                .zip(self.point(b))
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        order
            .windows(2)
            .find(|w| self.point(w[0]) == self.point(w[1]))
            .map(|w| (w[0].min(w[1]), w[0].max(w[1])))
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn dim(&self) -> usize {
        self.window.dim()
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.coords[i * d..(i + 1) * d]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim())
    }

    pub fn flat_coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn to_points(&self) -> Vec<Point> {
        self.points().map(|p| Point(p.to_vec())).collect()
    }

    /// Translates points and window together.
    pub fn translated(&self, shift: &[f64]) -> Self {
        let d = self.dim();
        let coords = self.coords.iter().enumerate().map(|(j, v)| v + shift[j % d]).collect();
        Configuration { window: self.window.translated(shift), coords }
    }

    /// Point reflection `x -> -x`, applied to points and window.
    pub fn reflected(&self) -> Self {
        let window = Window {
            lower: self.window.upper.iter().map(|v| -v).collect(),
            upper: self.window.lower.iter().map(|v| -v).collect(),
        };
        Configuration { window, coords: self.coords.iter().map(|v| -v).collect() }
    }

    /// Minimum pairwise distance, `None` with fewer than two points.
    pub fn min_pair_distance(&self) -> Option<f64> {
        let n = self.len();
        let mut best: Option<f64> = None;
        for i in 0..n {
            for j in (i + 1)..n {
                let s = squared_distance(self.point(i), self.point(j));
                best = Some(best.map_or(s, |b| b.min(s)));
            }
        }
        best.map(f64::sqrt)
    }
}
