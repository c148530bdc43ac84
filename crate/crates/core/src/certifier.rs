//! Block stability criterion: thresholds, block sweeps and certificates.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::blocks::{
    block_matrix, exact_cost_estimate, full_row_block, gain_upper_bound, lower_bound_p, BlockBoundReport, BlockMatrix,
};
use crate::error::{Error, Result};
use crate::operator::OperatorSpec;
use crate::scalar::{PNorm, Scalar};

/// Added to thresholds and subtracted from alphas before they are compared.
pub const SAFETY_MARGIN: f64 = 1e-12;

/// Exact block computations estimated above this many flops are first tried
/// against a cheap upper bound, which settles `NotCertified` when it is
/// already below the threshold.
pub const EXACT_BUDGET: f64 = 4e9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    CertifiedStable,
    NotCertified,
    CertifiedUnstable,
    Vacuous,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::CertifiedStable => "CertifiedStable",
            Verdict::NotCertified => "NotCertified",
            Verdict::CertifiedUnstable => "CertifiedUnstable",
            Verdict::Vacuous => "Vacuous",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    ConditionIii,
    DiagonalDominance,
    ToeplitzBlock,
}

impl Route {
    pub fn as_str(self) -> &'static str {
        match self {
            Route::ConditionIii => "condition_iii",
            Route::DiagonalDominance => "diagonal_dominance",
            Route::ToeplitzBlock => "toeplitz_block",
        }
    }
}

/// A block whose gain was only bounded from above, which was enough to rule
/// out certification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpperBoundWitness {
    pub center: f64,
    pub half_width: u64,
    pub gain: f64,
    pub witness: Vec<Scalar>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityCertificate {
    pub route: Route,
    pub p: PNorm,
    pub n0: u64,
    pub dim: usize,
    /// Worst block lower bound; an upper bound on it when `alpha_exact` is false.
    pub alpha: f64,
    pub alpha_exact: bool,
    pub kappa: f64,
    pub r_rows: f64,
    pub r_cols: f64,
    pub trunc_inf: f64,
    pub argmin_m: u64,
    pub threshold: f64,
    /// `2^{−d/p}(α − threshold)` after the safety margin; only a stability
    /// constant when the verdict is `CertifiedStable`.
    pub c1_lower: f64,
    pub c2_upper: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    pub verdict: Verdict,
    pub blocks: Vec<BlockBoundReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub upper_bounds: Vec<UpperBoundWitness>,
    pub note: String,
}

/// `2(5 + 2^{1−p})^{d/p}`, with the limit 2 at `p = ∞`.
pub fn kappa_constant(p: f64, d: usize) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::Input(format!("p must be at least 1, got {p}")));
    }
    if p.is_infinite() {
        return Ok(2.0);
    }
    Ok(2.0 * (5.0 + 2f64.powf(1.0 - p)).powf(d as f64 / p))
}

fn kappa(p: PNorm, d: usize) -> f64 {
    match p {
        PNorm::One => 2.0 * 6f64.powi(d as i32),
        PNorm::Two => 2.0 * 5.5f64.sqrt().powi(d as i32),
        PNorm::Inf => 2.0,
    }
}

/// Ingredients of the threshold `κ · R_rows^{1/p} · R_cols^{1−1/p} · trunc_inf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub kappa: f64,
    pub r_rows: f64,
    pub r_cols: f64,
    pub trunc_inf: f64,
    pub argmin_m: u64,
    pub value: f64,
}

fn separations(spec: &OperatorSpec) -> (f64, f64) {
    match spec {
        OperatorSpec::DenseWindow(w) => (w.rows().separation(), w.cols().separation()),
        _ => (1.0, 1.0),
    }
}

fn r_factor(spec: &OperatorSpec, p: PNorm) -> f64 {
    let (rr, rc) = separations(spec);
    let inv = p.reciprocal();
    rr.powf(inv) * rc.powf(1.0 - inv)
}

pub fn stability_threshold(spec: &OperatorSpec, p: PNorm, n0: u64) -> Result<Threshold> {
    let d = 1;
    let t = spec.truncation_tradeoff(n0, d)?;
    let (r_rows, r_cols) = separations(spec);
    let k = kappa(p, d);
    Ok(Threshold {
        kappa: k,
        r_rows,
        r_cols,
        trunc_inf: t.value,
        argmin_m: t.argmin,
        value: k * r_factor(spec, p) * t.value,
    })
}

/// Block centers `n ∈ N0·Z` that represent every distinct block.
pub fn representative_centers(spec: &OperatorSpec, n0: u64) -> Result<Vec<f64>> {
    if n0 == 0 {
        return Err(Error::Input("N0 must be at least 1".into()));
    }
    let n = n0 as i64;
    match spec {
        OperatorSpec::DenseWindow(w) => {
            let xs = w.cols().coords();
            if xs.is_empty() {
                return Ok(Vec::new());
            }
            let lo = xs.iter().copied().fold(f64::INFINITY, f64::min) - n0 as f64;
            let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max) + n0 as f64;
            let first = (lo / n0 as f64).ceil() as i64;
            let last = (hi / n0 as f64).floor() as i64;
            Ok((first..=last).map(|t| (t * n) as f64).collect())
        }
        _ => {
            // blocks at n and n + q coincide, and N0·t mod q takes q / gcd(N0, q) values
            let q = spec.period().unwrap_or(1);
            let count = q / gcd(n, q);
            Ok((0..count).map(|t| (t * n) as f64).collect())
        }
    }
}

fn gcd(mut a: i64, mut b: i64) -> i64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.abs().max(1)
}

enum BlockOutcome {
    Exact(BlockBoundReport),
    Upper(UpperBoundWitness),
}

impl BlockOutcome {
    fn value(&self) -> f64 {
        match self {
            BlockOutcome::Exact(r) => r.lower_bound,
            BlockOutcome::Upper(u) => u.gain,
        }
    }
}

fn evaluate_block(m: &BlockMatrix, p: PNorm, threshold: f64) -> Result<BlockOutcome> {
    let cost = exact_cost_estimate(m, p);
    if cost.is_some_and(|c| c <= EXACT_BUDGET) {
        return lower_bound_p(m, p).map(BlockOutcome::Exact);
    }
    let (gain, witness) = gain_upper_bound(m, p);
    if gain <= threshold + SAFETY_MARGIN {
        return Ok(BlockOutcome::Upper(UpperBoundWitness {
            center: m.center(),
            half_width: m.half_width(),
            gain,
            witness,
        }));
    }
    if cost.is_none() {
        // lower_bound_p reports which cap was exceeded
        lower_bound_p(m, p)?;
    }
    lower_bound_p(m, p).map(BlockOutcome::Exact)
}

fn require_method(spec: &OperatorSpec, p: PNorm) -> Result<()> {
    if p != PNorm::Two && !spec.is_real() {
        return Err(Error::Unsupported(format!(
            "exact p = {p} block bounds need a real operator; use p = 2"
        )));
    }
    Ok(())
}

struct Sweep {
    alpha: f64,
    exact: bool,
    blocks: Vec<BlockBoundReport>,
    upper: Vec<UpperBoundWitness>,
}

fn sweep(blocks: Vec<BlockMatrix>, p: PNorm, threshold: f64) -> Result<Option<Sweep>> {
    let outcomes: Vec<BlockOutcome> = blocks
        .par_iter()
        .filter(|m| !m.is_vacuous())
        .map(|m| evaluate_block(m, p, threshold))
        .collect::<Result<_>>()?;
    if outcomes.is_empty() {
        return Ok(None);
    }
    let alpha = outcomes.iter().map(BlockOutcome::value).fold(f64::INFINITY, f64::min);
    let mut out = Sweep {
        alpha,
        exact: true,
        blocks: Vec::new(),
        upper: Vec::new(),
    };
    for o in outcomes {
        match o {
            BlockOutcome::Exact(r) => out.blocks.push(r),
            BlockOutcome::Upper(u) => {
                out.exact = false;
                out.upper.push(u);
            }
        }
    }
    Ok(Some(out))
}

fn finish(route: Route, spec: &OperatorSpec, p: PNorm, n0: u64, t: Threshold, s: Option<Sweep>, note: String) -> StabilityCertificate {
    let d = 1;
    let c2_upper = r_factor(spec, p) * spec.c_norm();
    let mut cert = StabilityCertificate {
        route,
        p,
        n0,
        dim: d,
        alpha: 0.0,
        alpha_exact: true,
        kappa: t.kappa,
        r_rows: t.r_rows,
        r_cols: t.r_cols,
        trunc_inf: t.trunc_inf,
        argmin_m: t.argmin_m,
        threshold: t.value,
        c1_lower: 0.0,
        c2_upper,
        margin: None,
        verdict: Verdict::Vacuous,
        blocks: Vec::new(),
        upper_bounds: Vec::new(),
        note,
    };
    let Some(s) = s else {
        cert.note.push_str("; every block is vacuous");
        return cert;
    };
    let alpha_down = s.alpha - SAFETY_MARGIN;
    let threshold_up = t.value + SAFETY_MARGIN;
    cert.alpha = s.alpha;
    cert.alpha_exact = s.exact;
    cert.c1_lower = 2f64.powf(-(d as f64) * p.reciprocal()) * (alpha_down - threshold_up);
    cert.verdict = if s.exact && alpha_down > threshold_up {
        Verdict::CertifiedStable
    } else {
        Verdict::NotCertified
    };
    cert.blocks = s.blocks;
    cert.upper_bounds = s.upper;
    cert
}

/// Condition (iii) at a single `N0`, over the given block centers.
pub fn certify_over_centers(spec: &OperatorSpec, p: PNorm, n0: u64, centers: &[f64]) -> Result<StabilityCertificate> {
    require_method(spec, p)?;
    let t = stability_threshold(spec, p, n0)?;
    let blocks: Vec<BlockMatrix> = centers
        .par_iter()
        .map(|&c| block_matrix(spec, c, n0))
        .collect::<Result<_>>()?;
    let s = sweep(blocks, p, t.value)?;
    let note = format!(
        "block criterion at N0 = {n0} over {} block center(s); sufficient for stability, not necessary at fixed N0",
        centers.len()
    );
    Ok(finish(Route::ConditionIii, spec, p, n0, t, s, note))
}

pub fn certify_condition_iii(spec: &OperatorSpec, p: PNorm, n0: u64) -> Result<StabilityCertificate> {
    let centers = representative_centers(spec, n0)?;
    certify_over_centers(spec, p, n0, &centers)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub n: u64,
    pub alpha: f64,
    pub alpha_exact: bool,
    pub threshold: f64,
    pub certified: bool,
}

/// Evidence for condition (ii): a finite scan cannot cover all `N ≥ N0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanTable {
    pub p: PNorm,
    pub rows: Vec<ScanRow>,
    pub first_certified: Option<u64>,
}

pub fn stability_scan(spec: &OperatorSpec, p: PNorm, nmin: u64, nmax: u64) -> Result<ScanTable> {
    if nmin == 0 || nmin > nmax {
        return Err(Error::Input(format!("invalid N range {nmin}..{nmax}")));
    }
    let mut rows = Vec::new();
    for n in nmin..=nmax {
        let c = certify_condition_iii(spec, p, n)?;
        rows.push(ScanRow {
            n,
            alpha: c.alpha,
            alpha_exact: c.alpha_exact,
            threshold: c.threshold,
            certified: c.verdict == Verdict::CertifiedStable,
        });
    }
    let first_certified = rows.iter().find(|r| r.certified).map(|r| r.n);
    Ok(ScanTable { p, rows, first_certified })
}

/// `inf_j |a(j, j)|` over the diagonal of the operator.
fn diagonal_infimum(spec: &OperatorSpec) -> Result<f64> {
    match spec {
        OperatorSpec::Toeplitz { coeffs } | OperatorSpec::Twisted { coeffs, .. } => {
            Ok(coeffs.get(&0).map_or(0.0, |v| v.norm()))
        }
        OperatorSpec::PeriodicModulated { coeffs, weights } => {
            let a0 = coeffs.get(&0).map_or(0.0, |v| v.norm());
            Ok(a0 * weights.iter().map(|w| w.norm()).fold(f64::INFINITY, f64::min))
        }
        OperatorSpec::DenseWindow(w) => {
            if w.rows() != w.cols() || !w.rows().is_lattice() {
                return Err(Error::Unsupported(
                    "diagonal dominance needs a dense window with equal integer row and column sets".into(),
                ));
            }
            let mut diag = vec![0.0; w.rows().len()];
            for (i, j, v) in w.entries() {
                if i == j {
                    diag[i] = v.norm();
                }
            }
            Ok(diag.into_iter().fold(f64::INFINITY, f64::min))
        }
    }
}

/// Strong diagonal dominance, `inf_j |a(j,j)| − 2 Σ_{k≠0} h(k) > 0`, which
/// certifies `ℓ^∞` stability with `‖Ac‖_∞ ≥ margin · ‖c‖_∞`.
pub fn diagonal_dominance_certify(spec: &OperatorSpec) -> Result<StabilityCertificate> {
    let diag = diagonal_infimum(spec)?;
    let off: f64 = spec.diagonal_profile().iter().filter(|(k, _)| *k != 0).map(|(_, v)| v).sum();
    let margin = diag - 2.0 * off;
    let certified = margin - SAFETY_MARGIN > 0.0;
    Ok(StabilityCertificate {
        route: Route::DiagonalDominance,
        p: PNorm::Inf,
        n0: 1,
        dim: 1,
        alpha: diag,
        alpha_exact: true,
        kappa: 2.0,
        r_rows: 1.0,
        r_cols: 1.0,
        trunc_inf: off,
        argmin_m: 0,
        threshold: 2.0 * off,
        c1_lower: margin - SAFETY_MARGIN,
        c2_upper: spec.c_norm(),
        margin: Some(margin),
        verdict: if certified {
            Verdict::CertifiedStable
        } else {
            Verdict::NotCertified
        },
        blocks: Vec::new(),
        upper_bounds: Vec::new(),
        note: format!("diagonal dominance margin {margin}"),
    })
}

/// Single finite section of a band Toeplitz operator against
/// `κ(p,1)·(k/N0)·Σ|a(j)|`, with `k` the support radius.
pub fn toeplitz_block_certify(spec: &OperatorSpec, p: PNorm, n0: u64) -> Result<StabilityCertificate> {
    let OperatorSpec::Toeplitz { .. } = spec else {
        return Err(Error::Precondition("the band Toeplitz route needs a Toeplitz operator".into()));
    };
    require_method(spec, p)?;
    let k = spec.support_radius() as u64;
    if n0 <= k {
        return Err(Error::Precondition(format!("N0 = {n0} must exceed the bandwidth parameter {k}")));
    }
    let kap = kappa(p, 1);
    let total = spec.c_norm();
    let value = kap * (k as f64 / n0 as f64) * total;
    let t = Threshold {
        kappa: kap,
        r_rows: 1.0,
        r_cols: 1.0,
        trunc_inf: k as f64 / n0 as f64 * total,
        argmin_m: k,
        value,
    };
    let m = full_row_block(spec, 0.0, n0)?;
    let s = sweep(vec![m], p, value)?;
    let note = format!("band Toeplitz section at N0 = {n0}, bandwidth parameter {k}");
    Ok(finish(Route::ToeplitzBlock, spec, p, n0, t, s, note))
}

/// Exponents reachable in one step of the `ℓ^p → ℓ^q` transfer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PTransfer {
    /// Open interval of `1/q`, clipped to `[0, 1]`.
    pub recip_lo: f64,
    pub recip_hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
    /// The same set as an interval of `q` (`q_hi` may be infinite).
    pub q_lo: f64,
    pub q_hi: f64,
    /// Fewest steps, starting from `p`, after which every `q ∈ [1, ∞]` is reached.
    pub steps: u64,
}

pub fn p_transfer_step(p: f64, gamma: f64, d: usize) -> Result<PTransfer> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::Input(format!("γ must be positive, got {gamma}")));
    }
    if p.is_nan() || p < 1.0 {
        return Err(Error::Input(format!("p must be at least 1, got {p}")));
    }
    if d == 0 {
        return Err(Error::Input("dimension must be positive".into()));
    }
    let inv = if p.is_infinite() { 0.0 } else { 1.0 / p };
    let r = gamma / (d as f64 * (1.0 + gamma));
    let (lo, hi) = (inv - r, inv + r);
    let (recip_lo, lo_closed) = if lo < 0.0 { (0.0, true) } else { (lo, false) };
    let (recip_hi, hi_closed) = if hi > 1.0 { (1.0, true) } else { (hi, false) };
    let recip_to_q = |x: f64| if x == 0.0 { f64::INFINITY } else { 1.0 / x };
    // each step moves 1/q by strictly less than r, so reaching the far end
    // of [0, 1] at distance D takes floor(D / r) + 1 steps
    let far = inv.max(1.0 - inv);
    let steps = (far / r).floor() as u64 + 1;
    Ok(PTransfer {
        recip_lo,
        recip_hi,
        lo_closed,
        hi_closed,
        q_lo: recip_to_q(recip_hi),
        q_hi: recip_to_q(recip_lo),
        steps,
    })
}

impl PTransfer {
    pub fn contains_recip(&self, x: f64) -> bool {
        let above = if self.lo_closed { x >= self.recip_lo } else { x > self.recip_lo };
        let below = if self.hi_closed { x <= self.recip_hi } else { x < self.recip_hi };
        above && below
    }
}
