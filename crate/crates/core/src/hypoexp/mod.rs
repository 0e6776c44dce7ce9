//! The hypoexponential sums `Y_n = W_1 + W_2/2 + ... + W_n/2^(n-1)` of
//! independent standard exponentials and their limit `Y_inf`.
//!
//! `P(Y_inf <= x)` is evaluated as
//! `F_c(x) = N sum_i (-1)^(i+1) e_c(2^i x) / ((2-1)(4-1)...(2^i-1))`
//! with `e_c(y) = e^-y - sum_{k<=c} (-y)^k/k!` and `N = prod_j 2^j/(2^j-1)`.
//! Every `c` gives the same function; `c = 0` is well conditioned for
//! `x >= 0.1`, and for smaller `x` taking `c = floor(c')` with
//! `x = c'/2^c'` keeps the alternating sum from cancelling. Sums are done
//! in log space because the probabilities underflow quickly.
//!
//! Also here: the periodic functions `P(z) = sum_j (-1)^j 2^(-j(j+1)/2)
//! 2^j z/(2^j z+1)` and `Q(z) = 2^(z(z-1)/2) P(2^z)`, the theta function
//! `theta_4`, leading-order asymptotics of the lower tail, and the
//! probability `X(L, p, r)` that a geometric binary expansion stays below `r`.

mod asymp;
mod cdf;
mod chi;
mod periodic;

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

pub use asymp::{asymp_log_cdf, asymp_log_cdf2, c_prime_for, tail_bound};
pub use cdf::{cdf_yinf, cdf_yinf_series, cdf_yn_exact, e_c, log_cdf_yinf, sample_yinf, sf_yinf, CdfPath, MAX_YN_TERMS};
pub use chi::{chi_x, chi_x_dp, chi_x_mc, lemnew_bound, ChiMethod, ChiResult, DP_STATE_CAP};
pub use periodic::{p_func, p_series, q_func, theta4};

/// A probability kept as its natural log; `-inf` is probability zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogProb {
    pub log_value: f64,
}

impl LogProb {
    pub const ZERO: Self = Self { log_value: f64::NEG_INFINITY };
    pub const ONE: Self = Self { log_value: 0.0 };

    pub fn from_log(log_value: f64) -> Self {
        Self { log_value }
    }

    pub fn new(p: f64) -> Self {
        Self { log_value: p.ln() }
    }

    pub fn value(&self) -> f64 {
        self.log_value.exp()
    }
}

/// Constants of `Y_inf`, computed once.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YInfConstants {
    /// `N = prod_{j>=1} 2^j / (2^j - 1)`.
    pub n: f64,
    /// Nome `q = exp(-2 pi^2 / ln 2)`.
    pub q: f64,
    /// `K = Q(0) theta_4(0, q)`.
    pub k: f64,
    /// Factors used in the product for `N`.
    pub product_terms: u32,
}

pub fn constants() -> &'static YInfConstants {
    static CONSTANTS: OnceLock<YInfConstants> = OnceLock::new();
    CONSTANTS.get_or_init(|| {
        let mut n = 1.0f64;
        let mut product_terms = 0;
        for j in 1..=200 {
            let factor = 1.0 / (1.0 - 2f64.powi(-j));
            n *= factor;
            product_terms = j as u32;
            if factor - 1.0 < 1e-16 {
                break;
            }
        }
        let q = (-2.0 * std::f64::consts::PI.powi(2) / std::f64::consts::LN_2).exp();
        let k = p_series(1.0) * theta4(0.0, q).expect("nome below 1");
        YInfConstants { n, q, k, product_terms }
    })
}
