//! Page values and the Marchenko–Pastur entropy integral.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::quadrature::{integrate, QuadratureOptions};

fn check_dims(n: usize, m: usize) -> Result<()> {
    if n == 0 || n > m {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= N <= M for the subsystem dimensions, got N = {n}, M = {m}"
        )));
    }
    Ok(())
}

/// `ln N - N / (2M)`.
pub fn page_bound_asymptotic(n: usize, m: usize) -> Result<f64> {
    check_dims(n, m)?;
    Ok((n as f64).ln() - n as f64 / (2.0 * m as f64))
}

/// Exact average entropy of a random pure state, `sum_{k=M+1}^{NM} 1/k - (N-1)/(2M)`.
pub fn page_exact(n: usize, m: usize) -> Result<f64> {
    check_dims(n, m)?;
    let nm = n
        .checked_mul(m)
        .ok_or_else(|| Error::InvalidArgument("N*M overflows".into()))?;
    // Summed from the small terms up.
    let harmonic: f64 = (m + 1..=nm).rev().map(|k| 1.0 / k as f64).sum();
    Ok(harmonic - (n as f64 - 1.0) / (2.0 * m as f64))
}

/// `gamma = exp(S) / N`, so that `S = ln(gamma N)`.
pub fn gamma_factor(entropy: f64, n: usize) -> f64 {
    entropy.exp() / n as f64
}

/// Marchenko–Pastur parameters of an `N x N` reduced density matrix with environment dimension `M`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MpParams {
    pub n: usize,
    pub m: usize,
    pub q: f64,
    pub eps_min: f64,
    pub eps_max: f64,
}

impl MpParams {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        check_dims(n, m)?;
        let q = m as f64 / n as f64;
        let (eps_min, eps_max) = Self::support(n as f64, q);
        Ok(Self {
            n,
            m,
            q,
            eps_min,
            eps_max,
        })
    }

    /// From `N` and a (not necessarily integer) ratio `Q >= 1`.
    pub fn from_ratio(n: usize, q: f64) -> Result<Self> {
        if n == 0 || !(q >= 1.0) || !q.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "need N >= 1 and Q >= 1, got N = {n}, Q = {q}"
            )));
        }
        let (eps_min, eps_max) = Self::support(n as f64, q);
        Ok(Self {
            n,
            m: (q * n as f64).round() as usize,
            q,
            eps_min,
            eps_max,
        })
    }

    fn support(n: f64, q: f64) -> (f64, f64) {
        let base = 1.0 + 1.0 / q;
        let spread = 2.0 / q.sqrt();
        (((base - spread) / n).max(0.0), (base + spread) / n)
    }

    /// `f(eps) = N^2 Q / (2 pi) * sqrt((eps_max - eps)(eps - eps_min)) / eps`, normalized to `N`.
    pub fn density(&self, eps: f64) -> f64 {
        if eps <= self.eps_min || eps >= self.eps_max {
            return 0.0;
        }
        let nn = self.n as f64;
        nn * nn * self.q / (2.0 * PI) * ((self.eps_max - eps) * (eps - self.eps_min)).sqrt() / eps
    }

    /// `ln N - 1/(2Q)`.
    pub fn closed_form_entropy(&self) -> f64 {
        (self.n as f64).ln() - 1.0 / (2.0 * self.q)
    }

    fn moment(&self, g: impl Fn(f64) -> f64, opts: &QuadratureOptions) -> Result<f64> {
        // eps = a + (b - a)(1 - cos th)/2 removes the square-root endpoints.
        let (a, b) = (self.eps_min, self.eps_max);
        let half = 0.5 * (b - a);
        integrate(
            |th: f64| {
                let eps = a + half * (1.0 - th.cos());
                if eps <= 0.0 {
                    return 0.0;
                }
                self.density(eps) * g(eps) * half * th.sin()
            },
            0.0,
            PI,
            opts,
        )
    }

    /// `int f` (should be `N`).
    pub fn normalization(&self) -> Result<f64> {
        self.moment(|_| 1.0, &QuadratureOptions::default())
    }

    /// `int f eps` (should be 1).
    pub fn first_moment(&self) -> Result<f64> {
        self.moment(|e| e, &QuadratureOptions::default())
    }
}

/// `-int f(eps) eps ln(eps) d eps` by adaptive Gauss–Kronrod quadrature.
pub fn mp_entropy_numeric(params: &MpParams) -> Result<f64> {
    params.moment(|e| -e * e.ln(), &QuadratureOptions::default())
}

/// `I(a, b) = int_a^b sqrt((x - a)(b - x)) ln x dx`, numerically.
pub fn i_integral_numeric(a: f64, b: f64) -> Result<f64> {
    if !(0.0 <= a && a < b) {
        return Err(Error::InvalidArgument(format!(
            "need 0 <= a < b, got a = {a}, b = {b}"
        )));
    }
    let half = 0.5 * (b - a);
    integrate(
        |th: f64| {
            let x = a + half * (1.0 - th.cos());
            if x <= 0.0 {
                return 0.0;
            }
            ((x - a) * (b - x)).sqrt() * x.ln() * half * th.sin()
        },
        0.0,
        PI,
        &QuadratureOptions::default(),
    )
}

/// Closed form of `I(a, b)`.
pub fn i_integral_closed(a: f64, b: f64) -> Result<f64> {
    if !(0.0 <= a && a < b) {
        return Err(Error::InvalidArgument(format!(
            "need 0 <= a < b, got a = {a}, b = {b}"
        )));
    }
    let (sa, sb) = (a.sqrt(), b.sqrt());
    let d2 = (a - b) * (a - b);
    // a^2 sqrt(b/a) = a^{3/2} b^{1/2} and a b sqrt(b/a) = a^{1/2} b^{3/2}, finite at a = 0.
    let val = -4.0 * a * sa * sb + a * a + 6.0 * a * b - 4.0 * sa * b * sb - 4.0 * 2f64.ln() * d2
        + 2.0 * d2 * ((sa + sb) * (sa + sb)).ln()
        + b * b;
    Ok(PI * val / 16.0)
}

/// `-N^2 Q / (2 pi) * I(eps_min, eps_max)`: the entropy integral via the closed form of `I`.
pub fn mp_entropy_via_i(params: &MpParams) -> Result<f64> {
    let nn = params.n as f64;
    Ok(-nn * nn * params.q / (2.0 * PI) * i_integral_closed(params.eps_min, params.eps_max)?)
}
