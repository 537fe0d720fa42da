//! Analytic drift functions for the triangle count and their roots.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoundsError {
    #[error("all weights are zero")]
    AllZero,
    #[error("{name} = {value} is outside {range}")]
    OutOfRange { name: &'static str, value: String, range: &'static str },
    #[error("no sign change on [{lo}, {hi}]")]
    NoBracket { lo: String, hi: String },
}

/// Lower bound on the expected change in `Δ` for chain II when a fraction
/// `s` of vertices lies in triangles.
pub fn f_lower(s: f64) -> f64 {
    3.0 - 10.0 * s - 10.0 / 3.0 * s * s
}

/// Upper bound on the expected change in `Δ` with `x = Δ/n`.
pub fn g_upper(x: f64) -> f64 {
    8.0 / 3.0 - 3.0 * x - 2.0 * x * x
}

/// Positive root of [`f_lower`].
pub fn s_plus() -> f64 {
    3.0 * (140f64.sqrt() - 10.0) / 20.0
}

/// Positive root of [`g_upper`].
pub fn x_upper() -> f64 {
    (273f64.sqrt() - 9.0) / 12.0
}

/// Root of a continuous `f` on `[lo, hi]` with `f(lo)` and `f(hi)` of
/// opposite sign, to within `tol`.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64, BoundsError> {
    let (flo, fhi) = (f(lo), f(hi));
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(BoundsError::NoBracket { lo: lo.to_string(), hi: hi.to_string() });
    }
    let rising = flo < 0.0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (f(mid) < 0.0) == rising {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn check_p(p: f64) -> Result<(), BoundsError> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(BoundsError::OutOfRange { name: "p", value: p.to_string(), range: "(0, 1)" })
    }
}

/// Long-run lower bound on `Δ/n` for chain I with make probability `p`
/// and break probability `1 − p`.
pub fn chain1_lower(p: f64) -> Result<f64, BoundsError> {
    check_p(p)?;
    Ok(p / (72.0 - 63.0 * p))
}

/// Lower drift quadratic for chain I; negative at `s = 0`.
pub fn chain1_quadratic(p: f64, s: f64) -> f64 {
    10.0 * (1.0 - p) / 3.0 * s * s + (4.0 - 3.5 * p) * s - p / 4.0
}

/// Positive root of [`chain1_quadratic`].
pub fn chain1_root(p: f64) -> Result<f64, BoundsError> {
    check_p(p)?;
    let (a, b, c) = (10.0 * (1.0 - p) / 3.0, 4.0 - 3.5 * p, -p / 4.0);
    Ok((-b + (b * b - 4.0 * a * c).sqrt()) / (2.0 * a))
}

/// The per-vertex fraction `p/(24 − 21p)`, which bounds the root from below.
pub fn chain1_root_lower(p: f64) -> Result<f64, BoundsError> {
    check_p(p)?;
    Ok(p / (24.0 - 21.0 * p))
}

/// Weighted mean `(4i + 3j + 2k)/(i + j + k)`.
pub fn psi(i: u32, j: u32, k: u32) -> Result<f64, BoundsError> {
    let total = i as u64 + j as u64 + k as u64;
    if total == 0 {
        return Err(BoundsError::AllZero);
    }
    Ok((4 * i as u64 + 3 * j as u64 + 2 * k as u64) as f64 / total as f64)
}

/// Weighted mean `(4i + 3j + 2l + m)/(i + j + l + m)`.
pub fn psi_prime(i: u32, j: u32, l: u32, m: u32) -> Result<f64, BoundsError> {
    let total = i as u64 + j as u64 + l as u64 + m as u64;
    if total == 0 {
        return Err(BoundsError::AllZero);
    }
    Ok((4 * i as u64 + 3 * j as u64 + 2 * l as u64 + m as u64) as f64 / total as f64)
}

/// Worst-case drop in the number of vertices lying in triangles after one
/// break, by where the broken triangle sits (rows: tetrahedron, diamond or
/// isolated triangle) and where the edge `yz` sits (columns: in a
/// tetrahedron, in a triangle outside tetrahedra, in no triangle).
pub const BREAK_LOSS_TABLE: [[u32; 3]; 2] = [[0, 4, 0], [4, 8, 4]];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftReport {
    pub s_plus: f64,
    pub x_upper: f64,
    pub alpha: f64,
    pub p: f64,
    pub chain1_bound: f64,
}

impl DriftReport {
    pub fn new(p: f64) -> Result<Self, BoundsError> {
        let s = s_plus();
        Ok(DriftReport { s_plus: s, x_upper: x_upper(), alpha: s / 3.0, p, chain1_bound: chain1_lower(p)? })
    }

    pub const CSV_HEADER: &'static str = "p,s_plus,x_upper,alpha,chain1_lower";

    pub fn csv_row(&self) -> String {
        format!("{},{:.12},{:.12},{:.12},{:.12}", self.p, self.s_plus, self.x_upper, self.alpha, self.chain1_bound)
    }
}
