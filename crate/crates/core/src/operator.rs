//! Finitely-parameterized convolution-dominated matrices.
//!
//! Four kinds are supported: plain Toeplitz `a(j − j')`, twisted Toeplitz
//! `a(j − j') e^{−2πi θ j'(j − j')}` with rational `θ`, Toeplitz modulated by
//! a periodic column weight, and an explicit dense window over arbitrary real
//! points. The first three live on `Z × Z`; a dense window is the whole
//! operator and is zero off its declared sets.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{cutoff_psi0, IndexSet};
use crate::scalar::{Modulus, Scalar};

/// Finite coefficient sequence keyed by diagonal offset.
pub type Coeffs = BTreeMap<i64, Scalar>;

/// Rational number in lowest terms with positive denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rational {
    num: i64,
    den: i64,
}

fn gcd(mut a: i64, mut b: i64) -> i64 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Rational {
    pub fn new(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::Input("zero denominator".into()));
        }
        let g = gcd(num, den).max(1);
        let sign = if den < 0 { -1 } else { 1 };
        Ok(Rational {
            num: sign * num / g,
            den: sign * den / g,
        })
    }

    pub fn num(&self) -> i64 {
        self.num
    }

    pub fn den(&self) -> i64 {
        self.den
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for Rational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Input(format!("expected a rational \"r/q\", got {s:?}"));
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s.trim(), "1"),
        };
        let n: i64 = n.parse().map_err(|_| bad())?;
        let d: i64 = d.parse().map_err(|_| bad())?;
        Rational::new(n, d)
    }
}

/// `e^{−2πi m/q}`, exact at multiples of a quarter turn.
fn unit_root(m: i64, q: i64) -> Complex64 {
    let m = m.rem_euclid(q);
    if (4 * m) % q == 0 {
        return match 4 * m / q {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, -1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, 1.0),
        };
    }
    Complex64::from_polar(1.0, -2.0 * PI * m as f64 / q as f64)
}

/// An explicit finite operator `ℓ^p(Λ') → ℓ^p(Λ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseWindow {
    rows: IndexSet,
    cols: IndexSet,
    entries: BTreeMap<(usize, usize), Scalar>,
}

impl DenseWindow {
    pub fn new(rows: IndexSet, cols: IndexSet, entries: Vec<(usize, usize, Scalar)>) -> Result<Self> {
        if rows.dim() != 1 || cols.dim() != 1 {
            return Err(Error::Input("dense windows are one-dimensional".into()));
        }
        let mut map = BTreeMap::new();
        for (i, j, v) in entries {
            if i >= rows.len() || j >= cols.len() {
                return Err(Error::Input(format!("entry ({i}, {j}) references a missing point")));
            }
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::Input(format!("entry ({i}, {j}) is not finite")));
            }
            if map.insert((i, j), v).is_some() {
                return Err(Error::Input(format!("entry ({i}, {j}) given twice")));
            }
        }
        Ok(DenseWindow {
            rows,
            cols,
            entries: map,
        })
    }

    pub fn rows(&self) -> &IndexSet {
        &self.rows
    }

    pub fn cols(&self) -> &IndexSet {
        &self.cols
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, Scalar)> + '_ {
        self.entries.iter().map(|(&(i, j), &v)| (i, j, v))
    }

    /// `λ − λ'` for a stored entry.
    fn offset(&self, i: usize, j: usize) -> f64 {
        self.rows.coords()[i] - self.cols.coords()[j]
    }

    fn filtered(&self, keep: impl Fn(f64) -> bool) -> DenseWindow {
        DenseWindow {
            rows: self.rows.clone(),
            cols: self.cols.clone(),
            entries: self
                .entries
                .iter()
                .filter(|(&(i, j), _)| keep(self.offset(i, j)))
                .map(|(&k, &v)| (k, v))
                .collect(),
        }
    }
}

/// Bucket of a real offset `x`: the smallest integer `k` with `x ∈ k + [−1/2, 1/2]`.
pub fn offset_bucket(x: f64) -> i64 {
    (x - 0.5).ceil() as i64
}

#[derive(Debug, Clone, PartialEq)]
pub enum OperatorSpec {
    Toeplitz { coeffs: Coeffs },
    Twisted { coeffs: Coeffs, theta: Rational },
    PeriodicModulated { coeffs: Coeffs, weights: Vec<Scalar> },
    DenseWindow(DenseWindow),
}

/// `h(k) = sup |a(λ, λ')|` over the `k`-th diagonal band.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DiagonalProfile {
    values: BTreeMap<i64, f64>,
}

impl DiagonalProfile {
    pub fn get(&self, k: i64) -> f64 {
        self.values.get(&k).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.values.iter().map(|(&k, &v)| (k, v))
    }

    pub fn total(&self) -> f64 {
        self.values.values().sum()
    }

    /// Nonzero support as a map.
    pub fn nonzero(&self) -> BTreeMap<i64, f64> {
        self.values
            .iter()
            .filter(|(_, &v)| v != 0.0)
            .map(|(&k, &v)| (k, v))
            .collect()
    }

    fn raise(&mut self, k: i64, v: f64) {
        let e = self.values.entry(k).or_insert(0.0);
        if v > *e {
            *e = v;
        }
    }
}

/// Result of minimizing `‖A − A_{≤m}‖_C + (d·m/N)‖A‖_C` over `m ∈ {0, …, N}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tradeoff {
    pub value: f64,
    pub argmin: u64,
}

impl OperatorSpec {
    pub fn toeplitz(coeffs: impl IntoIterator<Item = (i64, f64)>) -> Self {
        OperatorSpec::Toeplitz {
            coeffs: coeffs
                .into_iter()
                .map(|(k, v)| (k, Complex64::new(v, 0.0)))
                .collect(),
        }
    }

    pub fn identity() -> Self {
        Self::toeplitz([(0, 1.0)])
    }

    /// `a(0) = 1`, `a(−1) = −1`: the backward difference, whose symbol vanishes at 0.
    pub fn difference() -> Self {
        Self::toeplitz([(0, 1.0), (-1, -1.0)])
    }

    pub fn twisted(coeffs: Coeffs, theta: Rational) -> Self {
        OperatorSpec::Twisted { coeffs, theta }
    }

    pub fn periodic(coeffs: Coeffs, weights: Vec<Scalar>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Input("period must be at least 1".into()));
        }
        Ok(OperatorSpec::PeriodicModulated { coeffs, weights })
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            OperatorSpec::Toeplitz { .. } => "toeplitz",
            OperatorSpec::Twisted { .. } => "twisted",
            OperatorSpec::PeriodicModulated { .. } => "periodic",
            OperatorSpec::DenseWindow(_) => "dense",
        }
    }

    /// Coefficients for the three lattice kinds.
    pub fn coeffs(&self) -> Option<&Coeffs> {
        match self {
            OperatorSpec::Toeplitz { coeffs }
            | OperatorSpec::Twisted { coeffs, .. }
            | OperatorSpec::PeriodicModulated { coeffs, .. } => Some(coeffs),
            OperatorSpec::DenseWindow(_) => None,
        }
    }

    pub fn is_lattice_kind(&self) -> bool {
        !matches!(self, OperatorSpec::DenseWindow(_))
    }

    /// Shift `q` with `a(j + q, j' + q) = a(j, j')`; `None` for dense windows.
    pub fn period(&self) -> Option<i64> {
        match self {
            OperatorSpec::Toeplitz { .. } => Some(1),
            OperatorSpec::Twisted { theta, .. } => Some(theta.den()),
            OperatorSpec::PeriodicModulated { weights, .. } => Some(weights.len() as i64),
            OperatorSpec::DenseWindow(_) => None,
        }
    }

    /// True when every entry the operator can produce is real.
    pub fn is_real(&self) -> bool {
        let real = |v: &Scalar| v.im == 0.0;
        match self {
            OperatorSpec::Toeplitz { coeffs } => coeffs.values().all(real),
            OperatorSpec::Twisted { coeffs, theta } => {
                coeffs.values().all(real)
                    && (theta.den() <= 2
                        || coeffs.iter().all(|(&k, v)| *v == Complex64::new(0.0, 0.0) || k == 0))
            }
            OperatorSpec::PeriodicModulated { coeffs, weights } => {
                coeffs.values().all(real) && weights.iter().all(real)
            }
            OperatorSpec::DenseWindow(w) => w.entries.values().all(real),
        }
    }

    /// Largest `|k|` (or `|λ − λ'|` for dense windows) carrying a nonzero entry.
    pub fn support_radius(&self) -> f64 {
        match self {
            OperatorSpec::DenseWindow(w) => w
                .entries
                .iter()
                .filter(|(_, v)| v.modulus() != 0.0)
                .map(|(&(i, j), _)| w.offset(i, j).abs())
                .fold(0.0, f64::max),
            _ => self
                .coeffs()
                .unwrap()
                .iter()
                .filter(|(_, v)| v.modulus() != 0.0)
                .map(|(k, _)| k.unsigned_abs() as f64)
                .fold(0.0, f64::max),
        }
    }

    /// Smallest and largest nonzero diagonal offsets of a lattice kind.
    pub fn offset_range(&self) -> Option<(i64, i64)> {
        let coeffs = self.coeffs()?;
        let mut it = coeffs.iter().filter(|(_, v)| v.modulus() != 0.0).map(|(&k, _)| k);
        let first = it.next()?;
        Some(it.fold((first, first), |(lo, hi), k| (lo.min(k), hi.max(k))))
    }

    /// Entry rule on `Z × Z` for the lattice kinds; zero for dense windows.
    pub fn lattice_entry(&self, j: i64, jp: i64) -> Scalar {
        let k = j - jp;
        match self {
            OperatorSpec::Toeplitz { coeffs } => coeffs.get(&k).copied().unwrap_or_default(),
            OperatorSpec::Twisted { coeffs, theta } => match coeffs.get(&k) {
                Some(&a) => {
                    let q = theta.den() as i128;
                    let m = (theta.num() as i128 * jp as i128 * k as i128).rem_euclid(q);
                    a * unit_root(m as i64, q as i64)
                }
                None => Scalar::default(),
            },
            OperatorSpec::PeriodicModulated { coeffs, weights } => match coeffs.get(&k) {
                Some(&a) => a * weights[jp.rem_euclid(weights.len() as i64) as usize],
                None => Scalar::default(),
            },
            OperatorSpec::DenseWindow(_) => Scalar::default(),
        }
    }

    /// `a(λ, λ')` for one-dimensional points.
    pub fn entry_at(&self, row: f64, col: f64) -> Result<Scalar> {
        match self {
            OperatorSpec::DenseWindow(w) => {
                let i = w
                    .rows
                    .position(&[row])
                    .ok_or_else(|| Error::Domain(format!("row point {row} is not declared")))?;
                let j = w
                    .cols
                    .position(&[col])
                    .ok_or_else(|| Error::Domain(format!("column point {col} is not declared")))?;
                Ok(w.entries.get(&(i, j)).copied().unwrap_or_default())
            }
            _ => {
                if row.fract() != 0.0 || col.fract() != 0.0 || !row.is_finite() || !col.is_finite() {
                    return Err(Error::Domain(format!(
                        "({row}, {col}) is not a pair of integers"
                    )));
                }
                Ok(self.lattice_entry(row as i64, col as i64))
            }
        }
    }

    pub fn diagonal_profile(&self) -> DiagonalProfile {
        let mut profile = DiagonalProfile::default();
        match self {
            OperatorSpec::Toeplitz { coeffs } | OperatorSpec::Twisted { coeffs, .. } => {
                for (&k, a) in coeffs {
                    profile.raise(k, a.modulus());
                }
            }
            OperatorSpec::PeriodicModulated { coeffs, weights } => {
                let wmax = weights.iter().map(Modulus::modulus).fold(0.0, f64::max);
                for (&k, a) in coeffs {
                    profile.raise(k, a.modulus() * wmax);
                }
            }
            OperatorSpec::DenseWindow(w) => {
                for (&(i, j), v) in &w.entries {
                    profile.raise(offset_bucket(w.offset(i, j)), v.modulus());
                }
            }
        }
        profile
    }

    /// `‖A‖_C = Σ_k sup_{λ−λ' ∈ k+[−1/2,1/2]} |a(λ, λ')|`.
    pub fn c_norm(&self) -> f64 {
        self.diagonal_profile().total()
    }

    /// `‖A‖_{C_γ} = Σ_k (1 + |k|)^γ h(k)`.
    pub fn c_gamma_norm(&self, gamma: f64) -> Result<f64> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::Input(format!("γ must be positive, got {gamma}")));
        }
        Ok(self
            .diagonal_profile()
            .iter()
            .map(|(k, h)| (1.0 + k.unsigned_abs() as f64).powf(gamma) * h)
            .sum())
    }

    fn filter_offsets(&self, keep: impl Fn(f64) -> bool) -> OperatorSpec {
        let clip = |coeffs: &Coeffs| -> Coeffs {
            coeffs
                .iter()
                .filter(|(&k, _)| keep(k as f64))
                .map(|(&k, &v)| (k, v))
                .collect()
        };
        match self {
            OperatorSpec::Toeplitz { coeffs } => OperatorSpec::Toeplitz {
                coeffs: clip(coeffs),
            },
            OperatorSpec::Twisted { coeffs, theta } => OperatorSpec::Twisted {
                coeffs: clip(coeffs),
                theta: *theta,
            },
            OperatorSpec::PeriodicModulated { coeffs, weights } => {
                OperatorSpec::PeriodicModulated {
                    coeffs: clip(coeffs),
                    weights: weights.clone(),
                }
            }
            OperatorSpec::DenseWindow(w) => OperatorSpec::DenseWindow(w.filtered(keep)),
        }
    }

    /// `A_s`: entries with `|λ − λ'| < s`.
    pub fn truncate(&self, s: f64) -> OperatorSpec {
        self.filter_offsets(|x| x.abs() < s)
    }

    /// `A_{≤m}`, the right limit `s → m⁺` of `A_s`.
    pub fn truncate_closed(&self, m: f64) -> OperatorSpec {
        self.filter_offsets(|x| x.abs() <= m)
    }

    /// `A − A_{≤m}`.
    pub fn tail_beyond(&self, m: f64) -> OperatorSpec {
        self.filter_offsets(|x| x.abs() > m)
    }

    /// `min_{0≤m≤N} ‖A − A_{≤m}‖_C + (d·m/N)‖A‖_C`.
    pub fn truncation_tradeoff(&self, n: u64, d: usize) -> Result<Tradeoff> {
        if n == 0 {
            return Err(Error::Input("N must be at least 1".into()));
        }
        let total = self.c_norm();
        let mut best = Tradeoff {
            value: f64::INFINITY,
            argmin: 0,
        };
        for m in 0..=n {
            let g = self.tail_beyond(m as f64).c_norm() + (d as f64 * m as f64 / n as f64) * total;
            if g < best.value {
                best = Tradeoff { value: g, argmin: m };
            }
        }
        Ok(best)
    }

    /// `(Ac)(λ)` for each `λ` in `rows`, with `c` given on `cols`.
    pub fn apply(&self, cols: &IndexSet, c: &[Scalar], rows: &IndexSet) -> Result<Vec<Scalar>> {
        if cols.len() != c.len() {
            return Err(Error::Input("sequence length does not match its index set".into()));
        }
        if let OperatorSpec::DenseWindow(w) = self {
            // map the caller's sets onto declared positions once
            let col_pos: Vec<usize> = cols
                .coords()
                .iter()
                .map(|&x| w.cols.position(&[x]).ok_or_else(|| Error::Domain(format!("column point {x} is not declared"))))
                .collect::<Result<_>>()?;
            let row_pos: Vec<usize> = rows
                .coords()
                .iter()
                .map(|&x| w.rows.position(&[x]).ok_or_else(|| Error::Domain(format!("row point {x} is not declared"))))
                .collect::<Result<_>>()?;
            return Ok(row_pos
                .iter()
                .map(|&i| {
                    col_pos
                        .iter()
                        .zip(c)
                        .map(|(&j, &v)| w.entries.get(&(i, j)).copied().unwrap_or_default() * v)
                        .sum()
                })
                .collect());
        }
        let mut out = Vec::with_capacity(rows.len());
        for &r in rows.coords() {
            let mut acc = Scalar::default();
            for (&col, &v) in cols.coords().iter().zip(c) {
                if v != Scalar::default() {
                    acc += self.entry_at(r, col)? * v;
                }
            }
            out.push(acc);
        }
        Ok(out)
    }

    /// `‖Ψ_n^N A_N − A_N Ψ_n^N‖_C`.
    pub fn commutator_cnorm(&self, center: f64, n: u64) -> Result<f64> {
        if n == 0 {
            return Err(Error::Input("N must be at least 1".into()));
        }
        let scale = n as f64;
        let psi = |x: f64| cutoff_psi0(&[(x - center) / scale]);
        let truncated = self.truncate(scale);
        let mut profile = DiagonalProfile::default();
        match &truncated {
            OperatorSpec::DenseWindow(w) => {
                for (&(i, j), v) in &w.entries {
                    let (r, c) = (w.rows.coords()[i], w.cols.coords()[j]);
                    let weight = (psi(r) - psi(c)).abs();
                    profile.raise(offset_bucket(r - c), weight * v.modulus());
                }
            }
            _ => {
                if center.fract() != 0.0 {
                    return Err(Error::Domain(format!("center {center} is not an integer")));
                }
                let ctr = center as i64;
                let ni = n as i64;
                let offsets: Vec<i64> = truncated.coeffs().unwrap().keys().copied().collect();
                // the commutator vanishes unless one index lies within (n − N, n + N)
                for jp in (ctr - 2 * ni)..=(ctr + 2 * ni) {
                    for &k in &offsets {
                        let j = jp + k;
                        let weight = (psi(j as f64) - psi(jp as f64)).abs();
                        if weight > 0.0 {
                            profile.raise(k, weight * truncated.lattice_entry(j, jp).modulus());
                        }
                    }
                }
            }
        }
        Ok(profile.total())
    }
}
