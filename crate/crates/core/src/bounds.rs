//! Closed-form SMSE bounds, the majority noise-stability exponent, the
//! Gaussian entropy approximation for majority, and majority-versus-dictator
//! crossover points.
//!
//! Entries flagged `asymptotic` drop unspecified `o(1)` or `O(.)` terms and
//! are reference curves; the others hold at every `n`.

use serde::Serialize;
use std::f64::consts::{LN_2, PI};

use crate::boolfn::{SymmetricProfile, TieRule};
use crate::error::{domain, Result};
use crate::exact::{seq_cost_symmetric, ChannelParams, LossKind};
use crate::numerics::{
    binent, binent_clamped, find_root, gaussian_expectation, integrate, q_function, GAUSSIAN_TRUNCATION,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bound {
    pub value: f64,
    /// Leading terms only; not a certified finite-`n` value.
    pub asymptotic: bool,
}

impl Bound {
    fn exact(value: f64) -> Self {
        Self { value, asymptotic: false }
    }

    fn leading(value: f64) -> Self {
        Self { value, asymptotic: true }
    }
}

/// Every bound and reference value at one `(n, alpha)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundSet {
    pub n: u32,
    pub alpha: f64,
    /// `(n - 2 ln 2) / 4`, any function, noiseless.
    pub noiseless_lb: Bound,
    pub maj_noiseless_ub_leading: Bound,
    /// `(n - 1) / 4`.
    pub dic_noiseless: Bound,
    /// `(n - 2 ln 2 (1 - 2a)^2) / 4`, any function.
    pub noisy_lb: Bound,
    /// `(n - 2 ln 2 (1 - 2a)^2 (1 - mu(a))) / 4`.
    pub maj_noisy_ub_leading: Bound,
    /// `(n - (1 - 2a)^2 / (2 pi a (1 - a))) / 4`; absent at `a = 0`.
    pub maj_noisy_lb_leading: Option<Bound>,
    /// `(n - (1 - 2a)^2) / 4`.
    pub dic_noisy: Bound,
    pub mu_alpha: Bound,
    /// Absent at `a = 0`.
    pub h_maj_gaussian: Option<Bound>,
    /// Absent at `a = 0`.
    pub h_maj_quadratic_lb: Option<Bound>,
}

fn check_alpha(alpha: f64) -> Result<()> {
    ChannelParams::new(alpha).map(|_| ())
}

fn check_positive_alpha(alpha: f64) -> Result<()> {
    check_alpha(alpha)?;
    if alpha == 0.0 {
        return domain("crossover probability must be positive");
    }
    Ok(())
}

/// `h(arccos(1 - 2a) / pi)`.
pub fn mu(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    binent((1.0 - 2.0 * alpha).acos() / PI)
}

pub fn bound_set(n: u32, alpha: f64) -> Result<BoundSet> {
    if n == 0 {
        return domain("arity must be positive");
    }
    check_alpha(alpha)?;
    let nf = n as f64;
    let rho2 = (1.0 - 2.0 * alpha).powi(2);
    let mu_alpha = mu(alpha)?;
    let noiseless = (nf - 2.0 * LN_2) / 4.0;
    let positive = alpha > 0.0;
    Ok(BoundSet {
        n,
        alpha,
        noiseless_lb: Bound::exact(noiseless),
        maj_noiseless_ub_leading: Bound::leading(noiseless),
        dic_noiseless: Bound::exact((nf - 1.0) / 4.0),
        noisy_lb: Bound::exact((nf - 2.0 * LN_2 * rho2) / 4.0),
        maj_noisy_ub_leading: Bound::leading((nf - 2.0 * LN_2 * rho2 * (1.0 - mu_alpha)) / 4.0),
        maj_noisy_lb_leading: positive
            .then(|| Bound::leading((nf - rho2 / (2.0 * PI * alpha * (1.0 - alpha))) / 4.0)),
        dic_noisy: Bound::exact((nf - rho2) / 4.0),
        mu_alpha: Bound::exact(mu_alpha),
        h_maj_gaussian: if positive { Some(Bound::leading(gaussian_entropy_approx(alpha)?)) } else { None },
        h_maj_quadratic_lb: if positive { Some(Bound::leading(h_maj_quadratic_lb(alpha)?)) } else { None },
    })
}

/// `E[h(Q(|G| (1 - 2a) / sqrt(4 a (1 - a))))]` for standard Gaussian `G`, the
/// large-`n` limit of `H(maj(X^n) | Y^n)`.
pub fn gaussian_entropy_approx(alpha: f64) -> Result<f64> {
    check_positive_alpha(alpha)?;
    let scale = (1.0 - 2.0 * alpha) / (4.0 * alpha * (1.0 - alpha)).sqrt();
    if scale == 0.0 {
        return gaussian_expectation(|_| 1.0);
    }
    // h(Q(u)) underflows past u = 40, so the mass sits on |g| < 40 / scale,
    // which is narrow for small alpha.
    let upper = (40.0 / scale).min(GAUSSIAN_TRUNCATION);
    let density = |g: f64| (-0.5 * g * g).exp() / (2.0 * PI).sqrt();
    let half = integrate(|g| binent_clamped(q_function(g * scale)) * density(g), 0.0, upper, 5e-14)?;
    Ok(2.0 * half)
}

/// `1 - (1 - 2a)^2 / (4 a (1 - a) pi ln 2)`.
pub fn h_maj_quadratic_lb(alpha: f64) -> Result<f64> {
    check_positive_alpha(alpha)?;
    let ratio = (1.0 - 2.0 * alpha).powi(2) / (4.0 * alpha * (1.0 - alpha));
    Ok(1.0 - ratio / (PI * LN_2))
}

/// Root of `2 ln 2 (1 - mu(a)) = 1`: below it the leading majority upper bound
/// beats the dictator cost.
pub fn crossover_alpha_lower() -> Result<f64> {
    find_root(|a| 2.0 * LN_2 * (1.0 - mu(a).unwrap_or(f64::NAN)) - 1.0, 1e-6, 0.1, 1e-12)
}

/// Exact majority cost minus dictator cost at `(n, alpha)`.
pub fn majority_minus_dictator(n: u32, alpha: f64) -> Result<f64> {
    let maj = SymmetricProfile::majority(n, TieRule::Ones)?;
    let cost = seq_cost_symmetric(&maj, ChannelParams::new(alpha)?, LossKind::Quadratic)?.total;
    Ok(cost - (n as f64 - (1.0 - 2.0 * alpha).powi(2)) / 4.0)
}

/// First `alpha` on the grid, refined by bisection, where exact majority cost
/// crosses the dictator cost; `None` without a sign change.
pub fn crossover_empirical(n: u32, alpha_grid: &[f64]) -> Result<Option<f64>> {
    if n.is_multiple_of(2) || n > 25 {
        return domain(format!("arity {n} must be odd and at most 25"));
    }
    if alpha_grid.iter().any(|&a| !(a > 0.0 && a < 0.5)) {
        return domain("grid points must lie in (0, 1/2)");
    }
    let diffs: Vec<f64> = alpha_grid.iter().map(|&a| majority_minus_dictator(n, a)).collect::<Result<_>>()?;
    for i in 0..diffs.len() {
        if diffs[i] == 0.0 {
            return Ok(Some(alpha_grid[i]));
        }
        if i + 1 < diffs.len() && (diffs[i] < 0.0) != (diffs[i + 1] < 0.0) && diffs[i + 1] != 0.0 {
            let f = |a: f64| majority_minus_dictator(n, a).unwrap_or(f64::NAN);
            return find_root(f, alpha_grid[i], alpha_grid[i + 1], 1e-12).map(Some);
        }
    }
    Ok(None)
}

/// `(n - 2 ln 2 h(q)) / 4`, leading noiseless cost of the unbalanced majority.
pub fn maj_q_noiseless_leading(n: u32, q: f64) -> Result<Bound> {
    Ok(Bound::leading((n as f64 - 2.0 * LN_2 * binent(q)?) / 4.0))
}
