//! The backward-difference example: its finite sections `Ã_N` have lower
//! bounds of exact order `1/N`, which shows the `N^{−1}` rate of the block
//! criterion cannot be improved.

use serde::{Deserialize, Serialize};

use crate::blocks::{closed_section, lower_bound_p};
use crate::certifier::kappa_constant;
use crate::error::Result;
use crate::operator::OperatorSpec;
use crate::scalar::PNorm;

pub const SECTION_SIZES: [u64; 4] = [4, 8, 16, 32];
pub const LEFT_INVERSE_SIZES: [u64; 3] = [2, 4, 8];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichRow {
    pub n: u64,
    pub p: PNorm,
    pub lower: f64,
    pub measured: f64,
    pub upper: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeftInverseCheck {
    pub n: u64,
    pub identity_exact: bool,
    /// `‖B̃_N‖_∞`, the largest row sum.
    pub max_row_sum: i64,
    /// `‖B̃_N‖_1`, the largest column sum.
    pub max_col_sum: i64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkedExample {
    pub sandwich: Vec<SandwichRow>,
    pub kappa_2_squared: f64,
    pub left_inverse: Vec<LeftInverseCheck>,
    pub all_hold: bool,
}

/// `Ã_N` of the difference operator over the integers: rows `−N−1..=N+1`,
/// columns `−N..=N`, `(Ãx)_r = x_{r−1} − x_r`.
pub fn difference_section(n: u64) -> Vec<Vec<i64>> {
    let cols = 2 * n as usize + 1;
    (0..cols + 2)
        .map(|r| {
            (0..cols)
                .map(|c| {
                    if r == c + 1 {
                        1
                    } else if r == c {
                        -1
                    } else {
                        0
                    }
                })
                .collect()
        })
        .collect()
}

/// The explicit left inverse `B̃_N` of `Ã_N`: summing `Ãx` from either end
/// telescopes to `x`, taking the shorter side for each coordinate.
pub fn difference_left_inverse(n: u64) -> Vec<Vec<i64>> {
    let n = n as usize;
    let cols = 2 * n + 1;
    (0..cols)
        .map(|i| {
            (0..cols + 2)
                .map(|r| {
                    if i <= n {
                        if r <= i {
                            -1
                        } else {
                            0
                        }
                    } else if r > i && r <= cols {
                        1
                    } else {
                        0
                    }
                })
                .collect()
        })
        .collect()
}

fn matmul(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    a.iter()
        .map(|row| {
            (0..b[0].len())
                .map(|j| row.iter().zip(b).map(|(x, brow)| x * brow[j]).sum())
                .collect()
        })
        .collect()
}

pub fn check_left_inverse(n: u64) -> LeftInverseCheck {
    let a = difference_section(n);
    let b = difference_left_inverse(n);
    let prod = matmul(&b, &a);
    let identity_exact = prod
        .iter()
        .enumerate()
        .all(|(i, row)| row.iter().enumerate().all(|(j, &v)| v == i64::from(i == j)));
    let max_row_sum = b.iter().map(|r| r.iter().map(|v| v.abs()).sum()).max().unwrap_or(0);
    let max_col_sum = (0..b[0].len())
        .map(|j| b.iter().map(|r| r[j].abs()).sum())
        .max()
        .unwrap_or(0);
    let bound = n as i64 + 1;
    LeftInverseCheck {
        n,
        identity_exact,
        max_row_sum,
        max_col_sum,
        holds: identity_exact && max_row_sum <= bound && max_col_sum <= bound,
    }
}

pub fn sandwich_row(n: u64, p: PNorm) -> Result<SandwichRow> {
    let m = closed_section(&OperatorSpec::difference(), n)?;
    let measured = lower_bound_p(&m, p)?.lower_bound;
    let lower = 1.0 / (n as f64 + 1.0);
    let upper = kappa_constant(p.as_f64(), 1)? * 2.0 / n as f64;
    Ok(SandwichRow {
        n,
        p,
        lower,
        measured,
        upper,
        holds: measured >= lower - 1e-9 && measured <= upper + 1e-9,
    })
}

pub fn reproduce_worked_examples() -> Result<WorkedExample> {
    let mut sandwich = Vec::new();
    for n in SECTION_SIZES {
        for p in PNorm::ALL {
            sandwich.push(sandwich_row(n, p)?);
        }
    }
    let k = kappa_constant(2.0, 1)?;
    let kappa_2_squared = k * k;
    let left_inverse: Vec<LeftInverseCheck> = LEFT_INVERSE_SIZES.iter().map(|&n| check_left_inverse(n)).collect();
    let all_hold = sandwich.iter().all(|r| r.holds)
        && left_inverse.iter().all(|c| c.holds)
        && (kappa_2_squared - 22.0).abs() < 1e-14;
    Ok(WorkedExample {
        sandwich,
        kappa_2_squared,
        left_inverse,
        all_hold,
    })
}
