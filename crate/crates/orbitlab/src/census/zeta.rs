//! Dynamical zeta partial sums: `exp(sum_n P_n z^n / n)` as a truncated
//! formal power series.

use serde::Serialize;

use crate::census::Census;
use crate::error::{Error, Result};
use crate::poly::series::exp_series;

#[derive(Debug, Clone, Serialize)]
pub struct ZetaSeries {
    pub truncation: usize,
    /// Coefficients of z^0 .. z^T; the constant term is 1.
    pub coeffs: Vec<f64>,
}

/// Truncate the zeta series at order `t`; the census must cover
/// `1..=t`.
pub fn zeta_partial(census: &Census, t: usize) -> Result<ZetaSeries> {
    if t as u32 > census.n_max {
        return Err(Error::invalid(format!(
            "truncation {t} beyond census window {}",
            census.n_max
        )));
    }
    let mut log_coeffs = vec![0.0; t + 1];
    for n in 1..=t {
        let p = census.count(n as u32).ok_or_else(|| {
            Error::invalid(format!("census has no count at n = {n}"))
        })?;
        log_coeffs[n] = p as f64 / n as f64;
    }
    let coeffs = exp_series(&log_coeffs);
    Ok(ZetaSeries {
        truncation: t,
        coeffs,
    })
}

impl ZetaSeries {
    /// Compare against the geometric series 1/(1 - f z) coefficient-wise.
    pub fn max_deviation_from_geometric(&self, f: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(n, c)| (c - f.powi(n as i32)).abs())
            .fold(0.0, f64::max)
    }
}
