//! Relatively-separated index sets, window truncations `χ_y^N` and the
//! cut-off multipliers `Ψ_n^N` built from the tensor ramp `ψ_0`.
//!
//! Sequences over an [`IndexSet`] are plain slices aligned with the point list.

use std::ops::Mul;

use crate::error::{Error, Result};

/// A finite point set in `R^d`, `d ∈ {1, 2}`, with its separation constant `R(Λ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexSet {
    dim: usize,
    coords: Vec<f64>,
    separation: f64,
    lattice: bool,
}

impl IndexSet {
    /// Builds a set from explicit points. Points must be distinct and finite.
    pub fn new(dim: usize, points: &[Vec<f64>]) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::Input(format!("dimension must be 1 or 2, got {dim}")));
        }
        let mut coords = Vec::with_capacity(points.len() * dim);
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::Input(format!(
                    "point {i} has {} coordinates, expected {dim}",
                    p.len()
                )));
            }
            coords.extend_from_slice(p);
        }
        Self::from_flat(dim, coords)
    }

    /// One-dimensional set from a list of reals.
    pub fn line(points: Vec<f64>) -> Result<Self> {
        Self::from_flat(1, points)
    }

    /// The integer window `{lo, …, hi}` in one dimension.
    pub fn integer_window(lo: i64, hi: i64) -> Self {
        let coords: Vec<f64> = (lo..=hi).map(|j| j as f64).collect();
        let separation = if coords.is_empty() { 0.0 } else { 1.0 };
        IndexSet {
            dim: 1,
            coords,
            separation,
            lattice: true,
        }
    }

    fn from_flat(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if let Some(bad) = coords.iter().find(|x| !x.is_finite()) {
            return Err(Error::Input(format!("non-finite coordinate {bad}")));
        }
        let n = coords.len() / dim;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            coords[a * dim..(a + 1) * dim]
                .partial_cmp(&coords[b * dim..(b + 1) * dim])
                .expect("finite coordinates")
        });
        for w in order.windows(2) {
            if coords[w[0] * dim..(w[0] + 1) * dim] == coords[w[1] * dim..(w[1] + 1) * dim] {
                return Err(Error::Input(format!(
                    "duplicate point {:?}",
                    &coords[w[0] * dim..(w[0] + 1) * dim]
                )));
            }
        }
        let separation = separation_flat(&coords, dim);
        let lattice = coords.iter().all(|x| x.fract() == 0.0);
        Ok(IndexSet {
            dim,
            coords,
            separation,
            lattice,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    /// Coordinates of a one-dimensional set.
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// `R(Λ)`.
    pub fn separation(&self) -> f64 {
        self.separation
    }

    /// True when every coordinate is an integer.
    pub fn is_lattice(&self) -> bool {
        self.lattice
    }

    /// Position of an exact point match.
    pub fn position(&self, point: &[f64]) -> Option<usize> {
        self.points().position(|p| p == point)
    }
}

/// `R(Λ) = sup_x #{λ : x ∈ λ + [−1/2, 1/2)^d}`, computed exactly.
///
/// `x ∈ λ + [−1/2,1/2)` iff `λ ∈ (x − 1/2, x + 1/2]`, so the count is maximal
/// for a box whose closed upper faces pass through point coordinates.
pub fn relative_separation(points: &[Vec<f64>], dim: usize) -> Result<f64> {
    if !(1..=2).contains(&dim) {
        return Err(Error::Input(format!("dimension must be 1 or 2, got {dim}")));
    }
    let mut coords = Vec::with_capacity(points.len() * dim);
    for p in points {
        if p.len() != dim {
            return Err(Error::Input("point dimension mismatch".into()));
        }
        if let Some(bad) = p.iter().find(|x| !x.is_finite()) {
            return Err(Error::Input(format!("non-finite coordinate {bad}")));
        }
        coords.extend_from_slice(p);
    }
    Ok(separation_flat(&coords, dim))
}

fn separation_flat(coords: &[f64], dim: usize) -> f64 {
    let n = coords.len() / dim;
    if n == 0 {
        return 0.0;
    }
    // λ ∈ (top − 1, top] componentwise
    let inside = |lam: f64, top: f64| lam <= top && top - lam < 1.0;
    let best = match dim {
        1 => {
            let mut xs = coords.to_vec();
            xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let mut lo = 0;
            let mut best = 0;
            for hi in 0..n {
                while !inside(xs[lo], xs[hi]) {
                    lo += 1;
                }
                best = best.max(hi + 1 - lo);
            }
            best
        }
        _ => {
            let mut best = 0;
            for i in 0..n {
                let top0 = coords[2 * i];
                for j in 0..n {
                    let top1 = coords[2 * j + 1];
                    let count = (0..n)
                        .filter(|&k| inside(coords[2 * k], top0) && inside(coords[2 * k + 1], top1))
                        .count();
                    best = best.max(count);
                }
            }
            best
        }
    };
    best as f64
}

/// `ψ_0(x) = Π_i max(min(2 − 2|x_i|, 1), 0)`.
pub fn cutoff_psi0(x: &[f64]) -> f64 {
    x.iter()
        .map(|&xi| (2.0 - 2.0 * xi.abs()).clamp(0.0, 1.0))
        .product()
}

fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Diagonal truncation `χ_y^N`: keeps `c(λ)` when `‖λ − y‖_∞ < N` (open box).
#[derive(Debug, Clone, PartialEq)]
pub struct WindowOp {
    pub center: Vec<f64>,
    pub half_width: u64,
}

impl WindowOp {
    pub fn new(center: Vec<f64>, half_width: u64) -> Self {
        WindowOp { center, half_width }
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        sup_distance(point, &self.center) < self.half_width as f64
    }

    pub fn apply<T>(&self, set: &IndexSet, c: &[T]) -> Vec<T>
    where
        T: Copy + Default,
    {
        set.points()
            .zip(c)
            .map(|(p, &v)| if self.contains(p) { v } else { T::default() })
            .collect()
    }
}

/// Multiplication operator `Ψ_n^N c(λ) = ψ_0((λ − n)/N) c(λ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CutoffMultiplier {
    pub center: Vec<f64>,
    pub scale: u64,
}

impl CutoffMultiplier {
    pub fn new(center: Vec<f64>, scale: u64) -> Self {
        CutoffMultiplier { center, scale }
    }

    pub fn weight(&self, point: &[f64]) -> f64 {
        let n = self.scale as f64;
        let scaled: Vec<f64> = point
            .iter()
            .zip(&self.center)
            .map(|(x, c)| (x - c) / n)
            .collect();
        cutoff_psi0(&scaled)
    }

    pub fn apply<T>(&self, set: &IndexSet, c: &[T]) -> Vec<T>
    where
        T: Copy + Mul<f64, Output = T>,
    {
        set.points().zip(c).map(|(p, &v)| v * self.weight(p)).collect()
    }
}

/// `χ_y^N c`.
pub fn window_mask<T: Copy + Default>(set: &IndexSet, c: &[T], center: &[f64], n: u64) -> Vec<T> {
    WindowOp::new(center.to_vec(), n).apply(set, c)
}

/// `Ψ_n^N c`.
pub fn psi_multiply<T>(set: &IndexSet, c: &[T], center: &[f64], n: u64) -> Vec<T>
where
    T: Copy + Mul<f64, Output = T>,
{
    CutoffMultiplier::new(center.to_vec(), n).apply(set, c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_separation_1d(points: &[f64]) -> usize {
        // scan x over a fine grid plus every breakpoint λ ± 1/2 (and just beside it)
        let mut xs: Vec<f64> = Vec::new();
        let lo = points.iter().cloned().fold(f64::INFINITY, f64::min) - 1.0;
        let hi = points.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 1.0;
        let steps = 20_000;
        for i in 0..=steps {
            xs.push(lo + (hi - lo) * i as f64 / steps as f64);
        }
        for &p in points {
            for b in [p - 0.5, p + 0.5] {
                xs.extend([b, b - 1e-9, b + 1e-9]);
            }
        }
        xs.iter()
            .map(|&x| points.iter().filter(|&&l| l - 0.5 <= x && x < l + 0.5).count())
            .max()
            .unwrap()
    }

    #[test]
    fn separation_examples() {
        let ints: Vec<Vec<f64>> = (-5..=5).map(|j| vec![j as f64]).collect();
        assert_eq!(relative_separation(&ints, 1).unwrap(), 1.0);
        let tight = vec![vec![0.0], vec![0.25], vec![0.5]];
        assert_eq!(relative_separation(&tight, 1).unwrap(), 3.0);
        assert_eq!(brute_separation_1d(&[0.0, 0.25, 0.5]), 3);
        let sparse = vec![vec![0.0], vec![1.5], vec![3.0]];
        assert_eq!(relative_separation(&sparse, 1).unwrap(), 1.0);
        assert_eq!(IndexSet::integer_window(-3, 3).separation(), 1.0);
    }

    #[test]
    fn separation_half_open_boundary() {
        // 0 and 1 can never share a half-open unit box
        assert_eq!(relative_separation(&[vec![0.0], vec![1.0]], 1).unwrap(), 1.0);
        assert_eq!(
            relative_separation(&[vec![0.0], vec![0.999], vec![1.0]], 1).unwrap(),
            2.0
        );
    }

    #[test]
    fn separation_matches_brute_scan() {
        let sets: [&[f64]; 4] = [
            &[0.0, 0.3, 0.6, 0.9, 1.2],
            &[-2.0, -1.5, -1.0, 0.1, 0.2, 0.7],
            &[0.0, 0.5, 1.0, 1.5, 2.0],
            &[3.3, 3.31, 3.32, 4.5],
        ];
        for s in sets {
            let pts: Vec<Vec<f64>> = s.iter().map(|&x| vec![x]).collect();
            assert_eq!(
                relative_separation(&pts, 1).unwrap() as usize,
                brute_separation_1d(s),
                "{s:?}"
            );
        }
    }

    #[test]
    fn separation_two_dimensional() {
        let grid: Vec<Vec<f64>> = (0..3)
            .flat_map(|i| (0..3).map(move |j| vec![i as f64, j as f64]))
            .collect();
        assert_eq!(relative_separation(&grid, 2).unwrap(), 1.0);
        let clustered = vec![vec![0.0, 0.0], vec![0.4, 0.4], vec![0.4, -0.4], vec![2.0, 2.0]];
        // (0.4, 0.4) and (0.4, −0.4) differ by 0.8 < 1 in the second coordinate
        assert_eq!(relative_separation(&clustered, 2).unwrap(), 3.0);
    }

    #[test]
    fn rejects_bad_points() {
        assert!(relative_separation(&[vec![f64::NAN]], 1).is_err());
        assert!(IndexSet::line(vec![1.0, 1.0]).is_err());
        assert!(IndexSet::new(3, &[vec![0.0, 0.0, 0.0]]).is_err());
    }

    #[test]
    fn psi0_values() {
        assert_eq!(cutoff_psi0(&[0.0]), 1.0);
        assert_eq!(cutoff_psi0(&[1.0]), 0.0);
        assert_eq!(cutoff_psi0(&[0.75]), 0.5);
        assert_eq!(cutoff_psi0(&[0.5, -0.75]), 0.5);
    }

    #[test]
    fn window_mask_examples() {
        let set = IndexSet::integer_window(-2, 2);
        let delta0 = [0.0, 0.0, 1.0, 0.0, 0.0];
        assert_eq!(window_mask(&set, &delta0, &[0.0], 1), delta0.to_vec());
        let delta1 = [0.0, 0.0, 0.0, 1.0, 0.0];
        assert_eq!(window_mask(&set, &delta1, &[0.0], 1), vec![0.0; 5]);
        let ones = [1.0; 5];
        assert_eq!(
            window_mask(&set, &ones, &[0.0], 2),
            vec![0.0, 1.0, 1.0, 1.0, 0.0]
        );
    }

    #[test]
    fn psi_multiply_examples() {
        let set = IndexSet::integer_window(-4, 4);
        let c: Vec<f64> = (0..9).map(|i| i as f64 + 1.0).collect();
        let out = psi_multiply(&set, &c, &[0.0], 1);
        let mut expected = vec![0.0; 9];
        expected[4] = c[4];
        assert_eq!(out, expected);

        let mut d3 = vec![0.0; 9];
        d3[7] = 1.0;
        let out = psi_multiply(&set, &d3, &[0.0], 4);
        assert_eq!(out[7], 0.5);
    }
}
