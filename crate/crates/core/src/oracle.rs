//! Symbol criterion for Toeplitz operators and a finite-section trend for all kinds.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::blocks::{full_row_block, lower_bound_p};
use crate::error::Result;
use crate::operator::{Coeffs, OperatorSpec};
use crate::scalar::{PNorm, Scalar};

/// Modulus at or below which a grid value counts as a zero of the symbol.
pub const ZERO_TOLERANCE: f64 = 1e-14;
const INITIAL_POINTS: usize = 64;
const REFINEMENT: usize = 4;
const FINEST_POINTS: usize = 1 << 20;

/// `â(ξ) = Σ a(j) e^{−ijξ}`.
pub fn symbol_eval(coeffs: &Coeffs, xi: f64) -> Scalar {
    coeffs
        .iter()
        .map(|(&j, &a)| {
            let t = -(j as f64) * xi;
            a * Complex64::new(t.cos(), t.sin())
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SymbolVerdict {
    CertifiedStable,
    ZeroFound,
    Inconclusive,
}

impl SymbolVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            SymbolVerdict::CertifiedStable => "CertifiedStable",
            SymbolVerdict::ZeroFound => "ZeroFound",
            SymbolVerdict::Inconclusive => "Inconclusive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroWitness {
    pub xi: f64,
    pub modulus: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolAnalysis {
    /// Certified lower bound on `min |â|` (zero unless `CertifiedStable`).
    pub min_modulus_lower_bound: f64,
    /// Smallest modulus seen on the finest grid.
    pub min_observed: f64,
    pub lipschitz: f64,
    /// Grid step of the last round.
    pub resolution: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zero_witness: Option<ZeroWitness>,
    pub verdict: SymbolVerdict,
}

/// Exact `Σ a(j)` and `Σ (−1)^j a(j)` when every coefficient is a Gaussian
/// integer of moderate size.
fn integer_sums(coeffs: &Coeffs) -> Option<[(i128, i128); 2]> {
    let mut sums = [(0i128, 0i128); 2];
    for (&j, a) in coeffs {
        let whole = |x: f64| x.fract() == 0.0 && x.abs() < 2f64.powi(53);
        if !whole(a.re) || !whole(a.im) {
            return None;
        }
        let (re, im) = (a.re as i128, a.im as i128);
        let s = if j.rem_euclid(2) == 0 { 1 } else { -1 };
        sums[0].0 += re;
        sums[0].1 += im;
        sums[1].0 += s * re;
        sums[1].1 += s * im;
    }
    Some(sums)
}

/// Decides whether the symbol vanishes, by grid refinement with the bound
/// `min |â| ≥ min_grid − L·h/2`, `L = Σ |j||a(j)|`.
pub fn certified_symbol_analysis(coeffs: &Coeffs) -> SymbolAnalysis {
    let lipschitz: f64 = coeffs.iter().map(|(&j, a)| j.unsigned_abs() as f64 * a.norm()).sum();
    let mass: f64 = coeffs.values().map(|a| a.norm()).sum();
    // rounding in the evaluation of â, charged against the certified bound
    let eval_error = if lipschitz == 0.0 {
        0.0
    } else {
        8.0 * f64::EPSILON * mass * (coeffs.len() as f64 + 1.0)
    };
    let mut out = SymbolAnalysis {
        min_modulus_lower_bound: 0.0,
        min_observed: f64::INFINITY,
        lipschitz,
        resolution: 2.0 * PI / INITIAL_POINTS as f64,
        zero_witness: None,
        verdict: SymbolVerdict::Inconclusive,
    };
    if let Some(sums) = integer_sums(coeffs) {
        for (xi, (re, im)) in [(0.0, sums[0]), (PI, sums[1])] {
            if re == 0 && im == 0 {
                out.min_observed = 0.0;
                out.zero_witness = Some(ZeroWitness { xi, modulus: 0.0 });
                out.verdict = SymbolVerdict::ZeroFound;
                return out;
            }
        }
    }
    let mut points = INITIAL_POINTS;
    loop {
        let h = 2.0 * PI / points as f64;
        let (idx, min) = (0..points)
            .into_par_iter()
            .map(|k| (k, symbol_eval(coeffs, k as f64 * h).norm()))
            .reduce(|| (0, f64::INFINITY), |a, b| if b.1 < a.1 || (b.1 == a.1 && b.0 < a.0) { b } else { a });
        out.resolution = h;
        out.min_observed = min;
        if min <= ZERO_TOLERANCE {
            out.zero_witness = Some(ZeroWitness {
                xi: idx as f64 * h,
                modulus: min,
            });
            out.verdict = SymbolVerdict::ZeroFound;
            return out;
        }
        let bound = min - lipschitz * h / 2.0 - eval_error;
        if bound > 0.0 {
            out.min_modulus_lower_bound = bound;
            out.verdict = SymbolVerdict::CertifiedStable;
            return out;
        }
        if points >= FINEST_POINTS {
            out.zero_witness = Some(ZeroWitness {
                xi: idx as f64 * h,
                modulus: min,
            });
            return out;
        }
        points = (points * REFINEMENT).min(FINEST_POINTS);
    }
}

/// Lower bound of `A χ_0^N` with every reachable row, for each `N`.
pub fn finite_section_trend(spec: &OperatorSpec, p: PNorm, ns: &[u64]) -> Result<Vec<(u64, f64)>> {
    ns.iter()
        .map(|&n| {
            let m = full_row_block(spec, 0.0, n)?;
            Ok((n, lower_bound_p(&m, p)?.lower_bound))
        })
        .collect()
}
