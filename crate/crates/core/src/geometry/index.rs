use crate::error::{Error, Result};

use super::{squared_distance, Configuration, Window};

const MAX_DIM: usize = 8;

/// Uniform cell grid over a window with cell sides at least the build range.
///
/// Queries of radius up to the build range only need the `3^d` block of cells
/// around the query point. Points are stored by id (their position in the
/// owning configuration); the grid supports insertion and swap-removal so the
/// sampler can keep one index in sync with a mutating state.
#[derive(Clone, Debug)]
pub struct CellIndex {
    dim: usize,
    range: f64,
    lower: Vec<f64>,
    side: Vec<f64>,
    shape: Vec<usize>,
    strides: Vec<usize>,
    offsets: Vec<Vec<isize>>,
    cells: Vec<Vec<usize>>,
    cell_of: Vec<usize>,
    coords: Vec<f64>,
}

impl CellIndex {
    pub fn build(config: &Configuration, range: f64) -> Result<Self> {
        let mut index = CellIndex::empty(config.window(), range)?;
        for x in config.points() {
            index.insert(x);
        }
        Ok(index)
    }

    pub fn empty(window: &Window, range: f64) -> Result<Self> {
        if !(range > 0.0) || !range.is_finite() {
            return Err(Error::InvalidRange(range));
        }
        let dim = window.dim();
        if dim > MAX_DIM {
            return Err(Error::InvalidWindow(format!("cell index supports at most {MAX_DIM} dimensions")));
        }
        let shape: Vec<usize> = (0..dim)
            .map(|k| ((window.extent(k) / range).floor() as usize).clamp(1, 1 << 16))
            .collect();
        let side: Vec<f64> = (0..dim).map(|k| window.extent(k) / shape[k] as f64).collect();
        let mut strides = vec![1usize; dim];
        for k in 1..dim {
            strides[k] = strides[k - 1] * shape[k - 1];
        }
        let total: usize = shape.iter().product();

        let mut offsets = vec![Vec::new()];
        for _ in 0..dim {
            offsets = offsets
                .into_iter()
                .flat_map(|o: Vec<isize>| {
                    (-1..=1).map(move |step| {
                        let mut next = o.clone();
                        next.push(step);
                        next
                    })
                })
                .collect();
        }

        Ok(CellIndex {
            dim,
            range,
            lower: window.lower().to_vec(),
            side,
            shape,
            strides,
            offsets,
            cells: vec![Vec::new(); total],
            cell_of: Vec::new(),
            coords: Vec::new(),
        })
    }

    pub fn range(&self) -> f64 {
        self.range
    }

    pub fn len(&self) -> usize {
        self.cell_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cell_of.is_empty()
    }

    pub fn point(&self, id: usize) -> &[f64] {
        &self.coords[id * self.dim..(id + 1) * self.dim]
    }

    pub fn flat_coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn occupied_cells(&self) -> usize {
        self.cells.iter().filter(|c| !c.is_empty()).count()
    }

    fn cell_coord(&self, x: &[f64], axis: usize) -> usize {
        let c = ((x[axis] - self.lower[axis]) / self.side[axis]).floor();
        if c <= 0.0 {
            0
        } else {
            (c as usize).min(self.shape[axis] - 1)
        }
    }

    fn cell_id(&self, x: &[f64]) -> usize {
        (0..self.dim).map(|k| self.cell_coord(x, k) * self.strides[k]).sum()
    }

    /// Appends a point and returns its id.
    pub fn insert(&mut self, x: &[f64]) -> usize {
        debug_assert_eq!(x.len(), self.dim);
        let id = self.cell_of.len();
        let cell = self.cell_id(x);
        self.cells[cell].push(id);
        self.cell_of.push(cell);
        self.coords.extend_from_slice(x);
        id
    }

    /// Removes `id`; the point that held the last id takes its place.
    pub fn swap_remove(&mut self, id: usize) {
        let last = self.cell_of.len() - 1;
        let cell = self.cell_of[id];
        let pos = self.cells[cell].iter().position(|&j| j == id).expect("id present in its cell");
        self.cells[cell].swap_remove(pos);
        if id != last {
            let last_cell = self.cell_of[last];
            let slot = self.cells[last_cell].iter_mut().find(|j| **j == last).expect("last id present");
            *slot = id;
            self.cell_of[id] = last_cell;
            let d = self.dim;
            let (head, tail) = self.coords.split_at_mut(last * d);
            head[id * d..(id + 1) * d].copy_from_slice(&tail[..d]);
        }
        self.cell_of.pop();
        self.coords.truncate(last * self.dim);
    }

    /// Moves `id` to a new location, keeping its id.
    pub fn relocate(&mut self, id: usize, x: &[f64]) {
        let old = self.cell_of[id];
        let new = self.cell_id(x);
        if old != new {
            let pos = self.cells[old].iter().position(|&j| j == id).expect("id present in its cell");
            self.cells[old].swap_remove(pos);
            self.cells[new].push(id);
            self.cell_of[id] = new;
        }
        let d = self.dim;
        self.coords[id * d..(id + 1) * d].copy_from_slice(x);
    }

    /// Calls `visit(id, s)` for each stored point at squared distance `0 < s <= radius²` from `x`,
    /// skipping `skip`. The radius must not exceed the build range.
    #[inline]
    pub fn for_each_neighbor(&self, x: &[f64], radius: f64, skip: Option<usize>, mut visit: impl FnMut(usize, f64)) {
        debug_assert!(radius <= self.range * (1.0 + 1e-12));
        let r2 = radius * radius;
        let d = self.dim;
        let mut base = [0usize; MAX_DIM];
        let base = &mut base[..d];
        for (k, b) in base.iter_mut().enumerate() {
            *b = self.cell_coord(x, k);
        }
        'offsets: for off in &self.offsets {
            let mut cell = 0usize;
            for k in 0..d {
                let c = base[k] as isize + off[k];
                if c < 0 || c >= self.shape[k] as isize {
                    continue 'offsets;
                }
                cell += c as usize * self.strides[k];
            }
            for &j in &self.cells[cell] {
                if Some(j) == skip {
                    continue;
                }
                let s = squared_distance(x, &self.coords[j * d..(j + 1) * d]);
                if s > 0.0 && s <= r2 {
                    visit(j, s);
                }
            }
        }
    }

    /// All stored points `y` with `0 < |x - y| <= radius`, as `(id, squared distance)`.
    pub fn neighbors_within(&self, x: &[f64], radius: f64) -> Result<Vec<(usize, f64)>> {
        if radius > self.range {
            return Err(Error::RadiusExceedsRange { radius, range: self.range });
        }
        let mut out = Vec::new();
        self.for_each_neighbor(x, radius, None, |j, s| out.push((j, s)));
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute(coords: &[f64], d: usize, x: &[f64], r: f64) -> Vec<(usize, f64)> {
        let mut out = Vec::new();
        for (j, y) in coords.chunks_exact(d).enumerate() {
            let s: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
            if s > 0.0 && s <= r * r {
                out.push((j, s));
            }
        }
        out
    }

    fn sorted(mut v: Vec<(usize, f64)>) -> Vec<(usize, f64)> {
        v.sort_by_key(|e| e.0);
        v
    }

    fn uniform_config(n: usize, side: f64, seed: u64) -> Configuration {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts: Vec<Point> = (0..n).map(|_| Point::new([rng.random::<f64>() * side, rng.random::<f64>() * side])).collect();
        Configuration::new(Window::cube(2, side).unwrap(), &pts).unwrap()
    }

    #[test]
    fn empty_configuration_has_no_occupied_cells() {
        let config = Configuration::empty(Window::cube(2, 2.0).unwrap());
        let index = CellIndex::build(&config, 0.25).unwrap();
        assert_eq!(index.occupied_cells(), 0);
        assert!(index.neighbors_within(&[1.0, 1.0], 0.25).unwrap().is_empty());
    }

    #[test]
    fn rejects_bad_range_and_radius() {
        let config = Configuration::empty(Window::cube(2, 2.0).unwrap());
        assert!(matches!(CellIndex::build(&config, 0.0), Err(Error::InvalidRange(_))));
        assert!(CellIndex::build(&config, -1.0).is_err());
        let index = CellIndex::build(&config, 0.25).unwrap();
        assert!(matches!(index.neighbors_within(&[0.0, 0.0], 0.3), Err(Error::RadiusExceedsRange { .. })));
    }

    #[test]
    fn pair_beyond_radius() {
        let w = Window::cube(2, 2.0).unwrap();
        let config = Configuration::new(w, &[Point::new([0.5, 0.5]), Point::new([0.8, 0.5])]).unwrap();
        let index = CellIndex::build(&config, 0.25).unwrap();
        for i in 0..2 {
            assert!(index.neighbors_within(config.point(i), 0.25).unwrap().is_empty());
        }
    }

    #[test]
    fn single_neighbor_distance_and_self_exclusion() {
        let w = Window::cube(2, 2.0).unwrap();
        let config = Configuration::new(w, &[Point::new([1.0, 1.0]), Point::new([1.1, 1.0])]).unwrap();
        let index = CellIndex::build(&config, 0.25).unwrap();
        let n = index.neighbors_within(config.point(0), 0.25).unwrap();
        assert_eq!(n.len(), 1);
        assert_eq!(n[0].0, 1);
        assert!((n[0].1 - 0.01).abs() < 1e-15);
    }

    #[test]
    fn matches_brute_force_on_uniform_pattern() {
        let config = uniform_config(200, 2.0, 7);
        let index = CellIndex::build(&config, 0.25).unwrap();
        for x in config.points() {
            let got = sorted(index.neighbors_within(x, 0.25).unwrap());
            assert_eq!(got, sorted(brute(config.flat_coords(), 2, x, 0.25)));
        }
        // boundary query points
        for x in [[0.0, 0.0], [2.0, 1.3], [0.7, 2.0], [2.0, 2.0]] {
            let got = sorted(index.neighbors_within(&x, 0.2).unwrap());
            assert_eq!(got, sorted(brute(config.flat_coords(), 2, &x, 0.2)));
        }
    }

    #[test]
    fn works_in_one_and_three_dimensions() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in [1usize, 3] {
            let w = Window::cube(d, 1.0).unwrap();
            let coords: Vec<f64> = (0..150 * d).map(|_| rng.random::<f64>()).collect();
            let config = Configuration::from_flat(w, coords).unwrap();
            let index = CellIndex::build(&config, 0.3).unwrap();
            for x in config.points() {
                assert_eq!(sorted(index.neighbors_within(x, 0.3).unwrap()), sorted(brute(config.flat_coords(), d, x, 0.3)));
            }
        }
    }

    #[test]
    fn swap_remove_and_insert_match_fresh_build() {
        let config = uniform_config(120, 2.0, 11);
        let mut index = CellIndex::build(&config, 0.25).unwrap();
        index.swap_remove(17);
        index.swap_remove(0);
        let extra = [1.234, 0.5];
        index.insert(&extra);
        index.relocate(5, &[0.01, 1.99]);
        let rebuilt = Configuration::from_flat(config.window().clone(), index.flat_coords().to_vec()).unwrap();
        let fresh = CellIndex::build(&rebuilt, 0.25).unwrap();
        for x in rebuilt.points() {
            assert_eq!(sorted(index.neighbors_within(x, 0.25).unwrap()), sorted(fresh.neighbors_within(x, 0.25).unwrap()));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]
        #[test]
        fn neighbor_sets_equal_brute_force(
            seed in any::<u64>(),
            n in 0usize..150,
            side in 0.5f64..3.0,
            frac in 0.05f64..1.0,
        ) {
            let config = uniform_config(n, side, seed);
            let range = 0.3;
            let radius = range * frac;
            let index = CellIndex::build(&config, range).unwrap();
            for x in config.points() {
                let got = sorted(index.neighbors_within(x, radius).unwrap());
                let want = sorted(brute(config.flat_coords(), 2, x, radius));
                prop_assert_eq!(got.len(), want.len());
                for (a, b) in got.iter().zip(&want) {
                    prop_assert_eq!(a.0, b.0);
                    prop_assert!((a.1 - b.1).abs() <= 1e-12 * b.1);
                }
            }
        }
    }
}
