//! Finite blocks `χ_n^{2N} A χ_n^N` and their exact minimal gains
//! `min_{c≠0} ‖Mc‖_p / ‖c‖_p` for `p ∈ {1, 2, ∞}`.
//!
//! * `p = 2`: smallest eigenvalue of the Gram matrix `MᴴM` by cyclic Jacobi.
//! * `p = ∞`: one LP per column `t`, minimizing `‖Mc‖_∞` over `c_t = 1`, `|c_j| ≤ 1`.
//! * `p = 1`: either one LP per sign pattern of the ℓ¹ sphere's facets, or
//!   enumeration of the extreme rays of the hyperplane arrangement
//!   `{m_i · c = 0}`, whichever is cheaper. The ratio is 1/‖c‖₁ maximized over
//!   the polytope `{‖Mc‖₁ ≤ 1}`, whose vertices lie on those rays.

pub mod jacobi;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::OperatorSpec;
use crate::scalar::{lp_norm, PNorm, Scalar};
use jacobi::symmetric_eigen;
use microlp::{ComparisonOp, LinearExpr, OptimizationDirection, Problem, Variable};

/// Largest column count accepted by the sign-pattern ℓ¹ method (2^{cols−1} LPs).
pub const SIGN_PATTERN_COLUMN_CAP: usize = 20;
/// Largest number of arrangement rays the ℓ¹ vertex method will enumerate.
pub const RAY_CAP: u128 = 5_000_000;

/// A dense rectangular block with the index points it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockMatrix {
    rows: Vec<f64>,
    cols: Vec<f64>,
    data: Vec<Scalar>,
    center: f64,
    half_width: u64,
}

impl BlockMatrix {
    pub fn new(rows: Vec<f64>, cols: Vec<f64>, data: Vec<Scalar>) -> Result<Self> {
        if data.len() != rows.len() * cols.len() {
            return Err(Error::Input(format!(
                "{} entries for a {}×{} block",
                data.len(),
                rows.len(),
                cols.len()
            )));
        }
        Ok(BlockMatrix {
            rows,
            cols,
            data,
            center: 0.0,
            half_width: 0,
        })
    }

    /// Plain row-major real matrix with rows and columns labelled 0, 1, ….
    pub fn from_real(nrows: usize, ncols: usize, data: &[f64]) -> Result<Self> {
        Self::new(
            (0..nrows).map(|i| i as f64).collect(),
            (0..ncols).map(|j| j as f64).collect(),
            data.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        )
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    pub fn row_points(&self) -> &[f64] {
        &self.rows
    }

    pub fn col_points(&self) -> &[f64] {
        &self.cols
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn half_width(&self) -> u64 {
        self.half_width
    }

    pub fn get(&self, i: usize, j: usize) -> Scalar {
        self.data[i * self.cols.len() + j]
    }

    pub fn entries(&self) -> &[Scalar] {
        &self.data
    }

    pub fn is_vacuous(&self) -> bool {
        self.cols.is_empty()
    }

    pub fn is_real(&self) -> bool {
        self.data.iter().all(|v| v.im == 0.0)
    }

    pub fn mul_vec(&self, c: &[Scalar]) -> Vec<Scalar> {
        let n = self.cols.len();
        self.data
            .chunks_exact(n.max(1))
            .take(self.rows.len())
            .map(|row| row.iter().zip(c).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Ratio `‖Mc‖_p / ‖c‖_p`.
    pub fn gain(&self, c: &[Scalar], p: f64) -> f64 {
        lp_norm(&self.mul_vec(c), p) / lp_norm(c, p)
    }

    pub fn scaled(&self, t: Scalar) -> BlockMatrix {
        BlockMatrix {
            data: self.data.iter().map(|v| v * t).collect(),
            ..self.clone()
        }
    }

    /// Appends a row (with a label) at the bottom.
    pub fn with_row(&self, label: f64, row: &[Scalar]) -> BlockMatrix {
        assert_eq!(row.len(), self.ncols());
        let mut out = self.clone();
        out.rows.push(label);
        out.data.extend_from_slice(row);
        out
    }

    /// Drops column `j`.
    pub fn without_col(&self, j: usize) -> BlockMatrix {
        let n = self.ncols();
        let mut out = self.clone();
        out.cols.remove(j);
        out.data = self
            .data
            .iter()
            .enumerate()
            .filter(|(idx, _)| idx % n != j)
            .map(|(_, &v)| v)
            .collect();
        out
    }

    fn real_rows(&self) -> Vec<Vec<f64>> {
        self.data
            .chunks_exact(self.ncols().max(1))
            .take(self.nrows())
            .map(|r| r.iter().map(|v| v.re).collect())
            .collect()
    }

    fn nonzero_real_rows(&self) -> Vec<Vec<f64>> {
        self.real_rows()
            .into_iter()
            .filter(|r| r.iter().any(|&x| x != 0.0))
            .collect()
    }
}

fn lattice_block(spec: &OperatorSpec, rows: std::ops::RangeInclusive<i64>, cols: std::ops::RangeInclusive<i64>) -> (Vec<f64>, Vec<f64>, Vec<Scalar>) {
    let mut data = Vec::new();
    for j in rows.clone() {
        for jp in cols.clone() {
            data.push(spec.lattice_entry(j, jp));
        }
    }
    (
        rows.map(|j| j as f64).collect(),
        cols.map(|j| j as f64).collect(),
        data,
    )
}

/// `χ_n^{2N} A χ_n^N`: rows with `|λ − n| < 2N`, columns with `|λ' − n| < N`.
pub fn block_matrix(spec: &OperatorSpec, center: f64, n: u64) -> Result<BlockMatrix> {
    if n == 0 {
        return Err(Error::Input("N must be at least 1".into()));
    }
    let nf = n as f64;
    let (rows, cols, data) = match spec {
        OperatorSpec::DenseWindow(w) => {
            let rsel: Vec<usize> = (0..w.rows().len())
                .filter(|&i| (w.rows().coords()[i] - center).abs() < 2.0 * nf)
                .collect();
            let csel: Vec<usize> = (0..w.cols().len())
                .filter(|&j| (w.cols().coords()[j] - center).abs() < nf)
                .collect();
            let mut data = vec![Scalar::default(); rsel.len() * csel.len()];
            let rpos: std::collections::HashMap<usize, usize> =
                rsel.iter().enumerate().map(|(a, &i)| (i, a)).collect();
            let cpos: std::collections::HashMap<usize, usize> =
                csel.iter().enumerate().map(|(a, &j)| (j, a)).collect();
            for (i, j, v) in w.entries() {
                if let (Some(&a), Some(&b)) = (rpos.get(&i), cpos.get(&j)) {
                    data[a * csel.len() + b] = v;
                }
            }
            (
                rsel.iter().map(|&i| w.rows().coords()[i]).collect(),
                csel.iter().map(|&j| w.cols().coords()[j]).collect(),
                data,
            )
        }
        _ => {
            if center.fract() != 0.0 {
                return Err(Error::Domain(format!("block center {center} is not an integer")));
            }
            let c = center as i64;
            let ni = n as i64;
            lattice_block(spec, (c - 2 * ni + 1)..=(c + 2 * ni - 1), (c - ni + 1)..=(c + ni - 1))
        }
    };
    let mut m = BlockMatrix::new(rows, cols, data)?;
    m.center = center;
    m.half_width = n;
    Ok(m)
}

/// `A χ_n^N` restricted to every row it can reach: for lattice kinds the rows
/// covering the coefficient support, for dense windows every declared row.
pub fn full_row_block(spec: &OperatorSpec, center: f64, n: u64) -> Result<BlockMatrix> {
    if n == 0 {
        return Err(Error::Input("N must be at least 1".into()));
    }
    let nf = n as f64;
    let (rows, cols, data) = match spec {
        OperatorSpec::DenseWindow(w) => {
            let csel: Vec<usize> = (0..w.cols().len())
                .filter(|&j| (w.cols().coords()[j] - center).abs() < nf)
                .collect();
            let cpos: std::collections::HashMap<usize, usize> =
                csel.iter().enumerate().map(|(a, &j)| (j, a)).collect();
            let mut data = vec![Scalar::default(); w.rows().len() * csel.len()];
            for (i, j, v) in w.entries() {
                if let Some(&b) = cpos.get(&j) {
                    data[i * csel.len() + b] = v;
                }
            }
            (
                w.rows().coords().to_vec(),
                csel.iter().map(|&j| w.cols().coords()[j]).collect(),
                data,
            )
        }
        _ => {
            if center.fract() != 0.0 {
                return Err(Error::Domain(format!("block center {center} is not an integer")));
            }
            let c = center as i64;
            let ni = n as i64;
            let (lo, hi) = spec.offset_range().unwrap_or((0, 0));
            lattice_block(spec, (c - ni + 1 + lo)..=(c + ni - 1 + hi), (c - ni + 1)..=(c + ni - 1))
        }
    };
    let mut m = BlockMatrix::new(rows, cols, data)?;
    m.center = center;
    m.half_width = n;
    Ok(m)
}

/// The section `(a(j − j'))` with `−N − k ≤ j ≤ N + k`, `−N ≤ j' ≤ N`, `k` the support radius.
pub fn closed_section(spec: &OperatorSpec, n: u64) -> Result<BlockMatrix> {
    let OperatorSpec::Toeplitz { .. } = spec else {
        return Err(Error::Unsupported("closed sections are defined for Toeplitz operators".into()));
    };
    let k = spec.support_radius() as i64;
    let ni = n as i64;
    let (rows, cols, data) = lattice_block(spec, (-ni - k)..=(ni + k), -ni..=ni);
    let mut m = BlockMatrix::new(rows, cols, data)?;
    m.half_width = n;
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Svd,
    LpInf,
    LpOne,
    VertexOne,
    Brute,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockBoundReport {
    pub center: f64,
    pub half_width: u64,
    pub p: PNorm,
    pub lower_bound: f64,
    pub method: Method,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<Scalar>>,
}

fn require_real(m: &BlockMatrix, p: PNorm) -> Result<()> {
    if m.is_real() {
        Ok(())
    } else {
        Err(Error::Unsupported(format!(
            "exact p = {p} bounds need a real matrix; use p = 2"
        )))
    }
}

fn report(m: &BlockMatrix, p: PNorm, lower_bound: f64, method: Method, witness: Vec<Scalar>) -> BlockBoundReport {
    BlockBoundReport {
        center: m.center,
        half_width: m.half_width,
        p,
        lower_bound,
        method,
        witness: Some(witness),
    }
}

/// Exact minimal gain of `M` in `ℓ^p`.
pub fn lower_bound_p(m: &BlockMatrix, p: PNorm) -> Result<BlockBoundReport> {
    if m.is_vacuous() {
        return Err(Error::Precondition("block has no columns".into()));
    }
    match p {
        PNorm::Two => Ok(lower_bound_two(m)),
        PNorm::Inf => {
            require_real(m, p)?;
            lower_bound_inf(m)
        }
        PNorm::One => {
            require_real(m, p)?;
            match plan_p1(m)? {
                P1Plan::Rays => lower_bound_one_rays(m),
                P1Plan::Signs => lower_bound_one_signs(m),
            }
        }
    }
}

/// Smallest eigenpair of `MᴴM`; complex Hermitian Grams are diagonalized
/// through their real symmetric embedding `[[Re, −Im], [Im, Re]]`.
fn smallest_gram_pair(m: &BlockMatrix) -> (f64, Vec<Scalar>) {
    let n = m.ncols();
    let mut gram = vec![Scalar::default(); n * n];
    for i in 0..m.nrows() {
        for a in 0..n {
            let x = m.get(i, a).conj();
            if x == Scalar::default() {
                continue;
            }
            for b in 0..n {
                gram[a * n + b] += x * m.get(i, b);
            }
        }
    }
    if m.is_real() {
        let g: Vec<f64> = gram.iter().map(|v| v.re).collect();
        let e = symmetric_eigen(&g, n);
        let v = e.vectors[0].iter().map(|&x| Complex64::new(x, 0.0)).collect();
        (e.values[0], v)
    } else {
        let w = 2 * n;
        let mut g = vec![0.0; w * w];
        for a in 0..n {
            for b in 0..n {
                let v = gram[a * n + b];
                g[a * w + b] = v.re;
                g[(a + n) * w + (b + n)] = v.re;
                g[a * w + b + n] = -v.im;
                g[(a + n) * w + b] = v.im;
            }
        }
        let e = symmetric_eigen(&g, w);
        let vec = &e.vectors[0];
        let v = (0..n).map(|a| Complex64::new(vec[a], vec[a + n])).collect();
        (e.values[0], v)
    }
}

fn lower_bound_two(m: &BlockMatrix) -> BlockBoundReport {
    let (lam, v) = smallest_gram_pair(m);
    // σ_min ≤ ‖Mv‖ for unit v; this is the sharper estimate near rank deficiency
    let sigma = lam.max(0.0).sqrt().min(m.gain(&v, 2.0));
    report(m, PNorm::Two, sigma, Method::Svd, v)
}

fn lower_bound_inf(m: &BlockMatrix) -> Result<BlockBoundReport> {
    let rows = m.nonzero_real_rows();
    let n = m.ncols();
    if rows.is_empty() {
        let mut w = vec![Scalar::default(); n];
        w[0] = Complex64::new(1.0, 0.0);
        return Ok(report(m, PNorm::Inf, 0.0, Method::LpInf, w));
    }
    let results: Vec<Result<(f64, Vec<f64>)>> = (0..n)
        .into_par_iter()
        .map(|t| linf_column_lp(&rows, n, t))
        .collect();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for r in results {
        let (v, c) = r?;
        if best.as_ref().map_or(true, |(b, _)| v < *b) {
            best = Some((v, c));
        }
    }
    let (value, c) = best.expect("at least one column");
    Ok(report(m, PNorm::Inf, value, Method::LpInf, to_scalars(&c)))
}

/// `min ‖Mc‖_∞` subject to `c_t = 1`, `−1 ≤ c_j ≤ 1`.
fn linf_column_lp(rows: &[Vec<f64>], n: usize, t: usize) -> Result<(f64, Vec<f64>)> {
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let s = lp.add_var(1.0, (0.0, f64::INFINITY));
    let c: Vec<Variable> = (0..n)
        .map(|j| lp.add_var(0.0, if j == t { (1.0, 1.0) } else { (-1.0, 1.0) }))
        .collect();
    for row in rows {
        for sign in [1.0, -1.0] {
            let mut e = LinearExpr::empty();
            for (&v, &a) in c.iter().zip(row) {
                if a != 0.0 {
                    e.add(v, sign * a);
                }
            }
            e.add(s, -1.0);
            lp.add_constraint(e, ComparisonOp::Le, 0.0);
        }
    }
    let sol = solve(&lp, "ℓ∞ column LP")?;
    let x: Vec<f64> = c.iter().map(|&v| sol.var_value(v).clamp(-1.0, 1.0)).collect();
    Ok((real_gain(rows, &x, f64::INFINITY), x))
}

fn solve(lp: &Problem, what: &str) -> Result<microlp::Solution> {
    lp.solve()
        .map_err(|e| Error::Internal(format!("{what} failed: {e}")))?
        .into_solution()
        .map_err(|_| Error::Internal(format!("{what} was interrupted")))
}

fn real_gain(rows: &[Vec<f64>], c: &[f64], p: f64) -> f64 {
    let mc: Vec<f64> = rows
        .iter()
        .map(|r| r.iter().zip(c).map(|(a, b)| a * b).sum())
        .collect();
    lp_norm(&mc, p) / lp_norm(c, p)
}

fn to_scalars(c: &[f64]) -> Vec<Scalar> {
    c.iter().map(|&x| Complex64::new(x, 0.0)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum P1Plan {
    Rays,
    Signs,
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
        if acc > RAY_CAP * 1000 {
            return u128::MAX;
        }
    }
    acc
}

fn ray_count(m: &BlockMatrix) -> u128 {
    let rows = m.nonzero_real_rows().len();
    let n = m.ncols();
    if rows < n.saturating_sub(1) {
        1
    } else {
        binomial(rows, n - 1)
    }
}

fn plan_p1(m: &BlockMatrix) -> Result<P1Plan> {
    let n = m.ncols();
    let rays = ray_count(m);
    let signs: u128 = 1u128 << (n - 1).min(100);
    if rays <= signs && rays <= RAY_CAP {
        Ok(P1Plan::Rays)
    } else if n <= SIGN_PATTERN_COLUMN_CAP {
        Ok(P1Plan::Signs)
    } else if rays <= RAY_CAP {
        Ok(P1Plan::Rays)
    } else {
        Err(Error::Resource(format!(
            "exact ℓ¹ bound for {} columns exceeds the caps ({} sign-pattern columns, {} rays)",
            n, SIGN_PATTERN_COLUMN_CAP, RAY_CAP
        )))
    }
}

/// Rough flop count of the exact computation, used to decide whether a
/// cheaper sufficient argument should be tried first. `None` when beyond caps.
pub fn exact_cost_estimate(m: &BlockMatrix, p: PNorm) -> Option<f64> {
    let n = m.ncols() as f64;
    let r = m.nonzero_real_rows().len() as f64;
    match p {
        PNorm::Two => Some(10.0 * n.powi(3) + r * n * n),
        PNorm::Inf => {
            let rows = 2.0 * r + n;
            Some(n * 2.0 * rows * rows * (rows + n))
        }
        PNorm::One => match plan_p1(m).ok()? {
            P1Plan::Rays => Some(ray_count(m) as f64 * n.powi(3)),
            P1Plan::Signs => {
                let rows = 2.0 * r + 1.0;
                Some(2f64.powf(n - 1.0) * 2.0 * rows * rows * (rows + n + r))
            }
        },
    }
}

/// One LP per facet `Σ σ_j c_j = 1`, `σ_j c_j ≥ 0`, with `σ_0 = +1`.
fn lower_bound_one_signs(m: &BlockMatrix) -> Result<BlockBoundReport> {
    let rows = m.nonzero_real_rows();
    let n = m.ncols();
    if n > SIGN_PATTERN_COLUMN_CAP {
        return Err(Error::Resource(format!(
            "sign-pattern enumeration is capped at {SIGN_PATTERN_COLUMN_CAP} columns (got {n})"
        )));
    }
    if rows.is_empty() {
        let mut w = vec![Scalar::default(); n];
        w[0] = Complex64::new(1.0, 0.0);
        return Ok(report(m, PNorm::One, 0.0, Method::LpOne, w));
    }
    let patterns: u64 = 1 << (n - 1);
    let results: Vec<Result<(f64, Vec<f64>)>> = (0..patterns)
        .into_par_iter()
        .map(|bits| {
            let sigma: Vec<f64> = (0..n)
                .map(|j| if j > 0 && (bits >> (j - 1)) & 1 == 1 { -1.0 } else { 1.0 })
                .collect();
            l1_facet_lp(&rows, &sigma)
        })
        .collect();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for r in results {
        let (v, c) = r?;
        if best.as_ref().map_or(true, |(b, _)| v < *b) {
            best = Some((v, c));
        }
    }
    let (value, c) = best.unwrap();
    Ok(report(m, PNorm::One, value, Method::LpOne, to_scalars(&c)))
}

/// `min Σ u_i` s.t. `−u ≤ M Σ y ≤ u`, `Σ y_j = 1`, `y ≥ 0` with `c = Σ y`.
fn l1_facet_lp(rows: &[Vec<f64>], sigma: &[f64]) -> Result<(f64, Vec<f64>)> {
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let y: Vec<Variable> = sigma.iter().map(|_| lp.add_var(0.0, (0.0, f64::INFINITY))).collect();
    for row in rows {
        let u = lp.add_var(1.0, (0.0, f64::INFINITY));
        for sign in [1.0, -1.0] {
            let mut e = LinearExpr::empty();
            for ((&v, &a), &sg) in y.iter().zip(row).zip(sigma) {
                if a != 0.0 {
                    e.add(v, sign * sg * a);
                }
            }
            e.add(u, -1.0);
            lp.add_constraint(e, ComparisonOp::Le, 0.0);
        }
    }
    let mut sum = LinearExpr::empty();
    y.iter().for_each(|&v| sum.add(v, 1.0));
    lp.add_constraint(sum, ComparisonOp::Eq, 1.0);
    let sol = solve(&lp, "ℓ¹ facet LP")?;
    let c: Vec<f64> = y.iter().zip(sigma).map(|(&v, &sg)| sg * sol.var_value(v).max(0.0)).collect();
    Ok((real_gain(rows, &c, 1.0), c))
}

/// A vector spanning (part of) the null space of the given rows.
fn null_vector(rows: &[&[f64]], n: usize) -> Vec<f64> {
    let m = rows.len();
    let mut a: Vec<f64> = rows.iter().flat_map(|r| r.iter().copied()).collect();
    let mut col_of_pivot = Vec::new();
    let mut perm: Vec<usize> = (0..n).collect();
    let scale = a.iter().fold(0.0f64, |s, x| s.max(x.abs())).max(f64::MIN_POSITIVE);
    let mut rank = 0;
    while rank < m.min(n) {
        // full pivoting over the remaining submatrix
        let (mut bi, mut bj, mut bv) = (rank, rank, 0.0);
        for i in rank..m {
            for j in rank..n {
                let v = a[i * n + perm[j]].abs();
                if v > bv {
                    (bi, bj, bv) = (i, j, v);
                }
            }
        }
        if bv <= 1e-13 * scale {
            break;
        }
        for j in 0..n {
            a.swap(rank * n + j, bi * n + j);
        }
        perm.swap(rank, bj);
        let pc = perm[rank];
        let piv = a[rank * n + pc];
        for i in 0..m {
            if i != rank {
                let f = a[i * n + pc] / piv;
                if f != 0.0 {
                    for j in 0..n {
                        a[i * n + j] -= f * a[rank * n + j];
                    }
                }
            }
        }
        col_of_pivot.push(pc);
        rank += 1;
    }
    let free = perm[rank];
    let mut c = vec![0.0; n];
    c[free] = 1.0;
    for (r, &pc) in col_of_pivot.iter().enumerate() {
        c[pc] = -a[r * n + free] / a[r * n + pc];
    }
    c
}

fn for_each_combination(n: usize, k: usize, first: usize, mut f: impl FnMut(&[usize])) {
    // combinations of {0..n} of size k whose smallest element is `first`
    if k == 0 {
        f(&[]);
        return;
    }
    let mut idx: Vec<usize> = (0..k).map(|i| first + i).collect();
    if idx[k - 1] >= n {
        return;
    }
    loop {
        f(&idx);
        let mut i = k;
        loop {
            if i == 1 {
                return;
            }
            i -= 1;
            if idx[i] < n - k + i {
                break;
            }
        }
        idx[i] += 1;
        for j in (i + 1)..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Exact ℓ¹ minimal gain by enumerating kernels of `n − 1` row subsets.
fn lower_bound_one_rays(m: &BlockMatrix) -> Result<BlockBoundReport> {
    let rows = m.nonzero_real_rows();
    let n = m.ncols();
    if ray_count(m) > RAY_CAP {
        return Err(Error::Resource(format!("more than {RAY_CAP} arrangement rays")));
    }
    if n == 1 || rows.len() < n - 1 || rows.is_empty() {
        let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
        let c = if n == 1 { vec![1.0] } else { null_vector(&refs, n) };
        let v = if rows.is_empty() { 0.0 } else { real_gain(&rows, &c, 1.0) };
        return Ok(report(m, PNorm::One, v, Method::VertexOne, to_scalars(&c)));
    }
    let k = n - 1;
    let r = rows.len();
    let best = (0..=(r - k))
        .into_par_iter()
        .map(|first| {
            let mut best: Option<(f64, Vec<f64>)> = None;
            let mut subset: Vec<&[f64]> = Vec::with_capacity(k);
            for_each_combination(r, k, first, |idx| {
                if idx[0] != first {
                    return;
                }
                subset.clear();
                subset.extend(idx.iter().map(|&i| rows[i].as_slice()));
                let c = null_vector(&subset, n);
                let v = real_gain(&rows, &c, 1.0);
                if v.is_finite() && best.as_ref().map_or(true, |(b, _)| v < *b) {
                    best = Some((v, c));
                }
            });
            best
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .fold(None::<(f64, Vec<f64>)>, |acc, cand| match acc {
            Some(a) if a.0 <= cand.0 => Some(a),
            _ => Some(cand),
        })
        .ok_or_else(|| Error::Internal("no arrangement ray produced a finite gain".into()))?;
    Ok(report(m, PNorm::One, best.0, Method::VertexOne, to_scalars(&best.1)))
}

/// Forces one of the ℓ¹ methods, for cross-checking them against each other.
pub fn lower_bound_one_with(m: &BlockMatrix, method: Method) -> Result<BlockBoundReport> {
    require_real(m, PNorm::One)?;
    match method {
        Method::LpOne => lower_bound_one_signs(m),
        Method::VertexOne => lower_bound_one_rays(m),
        other => Err(Error::Input(format!("{other:?} is not an ℓ¹ method"))),
    }
}

/// Cheap upper bound on the minimal gain from a handful of test vectors:
/// the smallest right singular vector, constant and alternating vectors and
/// every coordinate vector.
pub fn gain_upper_bound(m: &BlockMatrix, p: PNorm) -> (f64, Vec<Scalar>) {
    let n = m.ncols();
    let pf = p.as_f64();
    let mut candidates: Vec<Vec<Scalar>> = Vec::with_capacity(n + 3);
    candidates.push(smallest_gram_pair(m).1);
    candidates.push(vec![Complex64::new(1.0, 0.0); n]);
    candidates.push(
        (0..n)
            .map(|j| Complex64::new(if j % 2 == 0 { 1.0 } else { -1.0 }, 0.0))
            .collect(),
    );
    for j in 0..n {
        let mut e = vec![Scalar::default(); n];
        e[j] = Complex64::new(1.0, 0.0);
        candidates.push(e);
    }
    candidates
        .into_iter()
        .map(|c| (m.gain(&c, pf), c))
        .filter(|(g, _)| g.is_finite())
        .fold((f64::INFINITY, Vec::new()), |a, b| if b.0 < a.0 { b } else { a })
}

/// Lower bound of `‖Mc'‖_p/‖c'‖_p` over the box `c' = c ± radius` (face
/// coordinate fixed) for real `M` and `p ∈ {1, ∞}`. The numerator is bounded
/// below by a dual functional `g·Mc'` and the denominator above by an affine
/// function; the ratio of the two is minimized over the box by bisection.
fn linear_fractional_bound(m: &BlockMatrix, p: f64, face: usize, c: &[Scalar], mc: &[Scalar], radius: f64) -> f64 {
    let n = c.len();
    let g: Vec<f64> = if p == 1.0 {
        mc.iter().map(|v| if v.re == 0.0 { 0.0 } else { v.re.signum() }).collect()
    } else {
        let (mut k, mut top) = (0, -1.0);
        for (i, v) in mc.iter().enumerate() {
            if v.re.abs() > top {
                top = v.re.abs();
                k = i;
            }
        }
        (0..mc.len()).map(|i| if i == k { mc[k].re.signum() } else { 0.0 }).collect()
    };
    let num: f64 = g.iter().zip(mc).map(|(a, v)| a * v.re).sum();
    let mut u = Vec::with_capacity(n);
    let mut w = Vec::with_capacity(n);
    let mut den = 0.0;
    for j in 0..n {
        if j == face {
            continue;
        }
        u.push((0..m.nrows()).map(|i| g[i] * m.get(i, j).re).sum::<f64>());
        let y = c[j].re;
        if p == 1.0 {
            if y.abs() > radius {
                w.push(y.signum());
                den += y.abs();
            } else {
                w.push(0.0);
                den += y.abs() + radius;
            }
        } else {
            w.push(0.0);
        }
    }
    den += 1.0;
    let phi = |lambda: f64| {
        num - lambda * den - radius * u.iter().zip(&w).map(|(a, b)| (a - lambda * b).abs()).sum::<f64>()
    };
    if phi(0.0) <= 0.0 {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0, num / den);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if phi(mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Mesh oracle for `min ‖Mc‖_p/‖c‖_p`.
///
/// Every nonzero `c` rescales (by a unimodular factor) onto a face of the unit
/// cube where `c_f = 1` and the other coordinates lie in `[-1, 1]`. Each face
/// is meshed into boxes that are refined best-first; a box is dropped once a
/// Lipschitz lower bound over it exceeds the best value seen. `samples` caps
/// the number of gain evaluations. The result is always attained by some
/// vector, so it is an upper bound on the true minimal gain.
pub fn brute_lower_bound(m: &BlockMatrix, p: f64, samples: usize) -> f64 {
    use std::cmp::Ordering;
    use std::collections::BinaryHeap;

    let n = m.ncols();
    if n == 0 {
        return 0.0;
    }
    let real = m.is_real();
    let per = if real { 1 } else { 2 };
    let free = per * (n - 1);
    let embed = |face: usize, y: &[f64]| -> Vec<Scalar> {
        let mut c = Vec::with_capacity(n);
        let mut k = 0;
        for j in 0..n {
            if j == face {
                c.push(Complex64::new(1.0, 0.0));
            } else if real {
                c.push(Complex64::new(y[k], 0.0));
                k += 1;
            } else {
                c.push(Complex64::new(y[k], y[k + 1]));
                k += 2;
            }
        }
        c
    };
    let f = |face: usize, y: &[f64]| {
        let g = m.gain(&embed(face, y), p);
        if g.is_nan() {
            f64::INFINITY
        } else {
            g
        }
    };
    if free == 0 {
        return f(0, &[]);
    }
    // a coordinate box of half-width r moves each entry of c by at most r·unit
    let unit = if real { 1.0 } else { std::f64::consts::SQRT_2 };
    let row_spread: Vec<Vec<f64>> = (0..n)
        .map(|face| {
            (0..m.nrows())
                .map(|i| unit * (0..n).filter(|&j| j != face).map(|j| m.get(i, j).norm()).sum::<f64>())
                .collect()
        })
        .collect();

    #[derive(PartialEq)]
    struct Cell {
        bound: f64,
        face: usize,
        radius: f64,
        center: Vec<f64>,
    }
    impl Eq for Cell {}
    impl PartialOrd for Cell {
        fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
            Some(self.cmp(other))
        }
    }
    impl Ord for Cell {
        fn cmp(&self, other: &Self) -> Ordering {
            // min-heap on the bound
            other.bound.total_cmp(&self.bound)
        }
    }

    let mut evals = 0usize;
    let mut best = (f64::INFINITY, 0usize, vec![0.0; free]);
    let mut heap = BinaryHeap::new();
    let push = |heap: &mut BinaryHeap<Cell>, best: &mut (f64, usize, Vec<f64>), face: usize, radius: f64, center: Vec<f64>, evals: &mut usize| {
        let c = embed(face, &center);
        let mc = m.mul_vec(&c);
        let value = lp_norm(&mc, p) / lp_norm(&c, p);
        *evals += 1;
        if value < best.0 {
            *best = (value, face, center.clone());
        }
        let low: Vec<f64> = mc
            .iter()
            .zip(&row_spread[face])
            .map(|(v, s)| (v.norm() - radius * s).max(0.0))
            .collect();
        let high: Vec<f64> = c
            .iter()
            .enumerate()
            .map(|(j, v)| if j == face { 1.0 } else { (v.norm() + radius * unit).min(unit) })
            .collect();
        let mut bound = lp_norm(&low, p) / lp_norm(&high, p);
        if real && (p == 1.0 || p.is_infinite()) {
            bound = bound.max(linear_fractional_bound(m, p, face, &c, &mc, radius));
        }
        heap.push(Cell { bound, face, radius, center });
    };
    for face in 0..n {
        push(&mut heap, &mut best, face, 1.0, vec![0.0; free], &mut evals);
    }
    let children = 1usize << free.min(20);
    while let Some(cell) = heap.pop() {
        let gap = 1e-10 * best.0.max(1e-3);
        if cell.bound >= best.0 - gap || evals + children > samples || free > 20 {
            break;
        }
        let r = cell.radius / 2.0;
        for mask in 0..children {
            let center: Vec<f64> = (0..free)
                .map(|i| cell.center[i] + if mask >> i & 1 == 1 { r } else { -r })
                .collect();
            push(&mut heap, &mut best, cell.face, r, center, &mut evals);
        }
    }

    // polish: local grid zoom around the best point, for smooth minima
    let (mut v, face, mut y) = best;
    let mut radius = 1e-2;
    while radius > 1e-13 {
        let mut improved = None;
        for i in 0..free {
            for s in [-1.0, 1.0] {
                let mut t = y.clone();
                t[i] += s * radius;
                let g = f(face, &t);
                if g < improved.as_ref().map_or(v, |(b, _)| *b) {
                    improved = Some((g, t));
                }
            }
        }
        match improved {
            Some((g, t)) => {
                v = g;
                y = t;
            }
            None => radius *= 0.5,
        }
    }
    v
}
