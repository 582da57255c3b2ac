//! Dyadic cutoffs, shell projections and Besov norms.
//!
//! The cutoff is the glued profile
//! `chi(t) = psi(2 - 2t) / (psi(2 - 2t) + psi(2t - 1))` on `(1/2, 1)`, with
//! `psi(x) = exp(-1/x)`, equal to 1 below 1/2 and 0 above 1. Then
//! `phi(t) = chi(t/2) - chi(t)` and `phi_q(k) = phi(|k| / 2^q)`, `phi_{-1} = chi`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lambda;
use crate::spectral::{l2_norm_exact, lp_norm, min_resolution, synthesize, SpectralField, Wavevector};

fn psi(x: f64) -> f64 {
    if x > 0.0 {
        (-1.0 / x).exp()
    } else {
        0.0
    }
}

/// Radial cutoff `chi`.
pub fn chi(t: f64) -> Result<f64> {
    if t < 0.0 || t.is_nan() {
        return Err(Error::NegativeRadius(t));
    }
    Ok(chi_unchecked(t))
}

fn chi_unchecked(t: f64) -> f64 {
    if t <= 0.5 {
        1.0
    } else if t >= 1.0 {
        0.0
    } else {
        let a = psi(2.0 - 2.0 * t);
        let b = psi(2.0 * t - 1.0);
        a / (a + b)
    }
}

/// `phi(t) = chi(t/2) - chi(t)`, supported in `[1/2, 2]`, equal to 1 at `t = 1`.
pub fn phi(t: f64) -> f64 {
    chi_unchecked(0.5 * t) - chi_unchecked(t)
}

/// Radial shell weight at radius `t` for shell `q >= -1`.
pub fn phi_q_radius(t: f64, q: i32) -> f64 {
    if q == -1 {
        chi_unchecked(t)
    } else {
        phi(t / lambda(q))
    }
}

pub fn phi_q(xi: &Wavevector, q: i32) -> Result<f64> {
    check_shell(q)?;
    Ok(phi_q_radius(xi.norm(), q))
}

fn check_shell(q: i32) -> Result<()> {
    if q < -1 {
        Err(Error::InvalidShell(q))
    } else {
        Ok(())
    }
}

/// `u_q`.
pub fn shell_project(u: &SpectralField, q: i32) -> Result<SpectralField> {
    check_shell(q)?;
    Ok(u.apply_symbol(|k| phi_q_radius(k.norm(), q)))
}

/// `u_{<=q} = sum_{p=-1}^{q} u_p`.
pub fn low_pass(u: &SpectralField, q: i32) -> Result<SpectralField> {
    check_shell(q)?;
    Ok(u.apply_symbol(|k| {
        let t = k.norm();
        (-1..=q).map(|p| phi_q_radius(t, p)).sum()
    }))
}

/// `u~_q = u_{q-1} + u_q + u_{q+1}` (with `u_{-2} = 0`).
pub fn window(u: &SpectralField, q: i32) -> Result<SpectralField> {
    check_shell(q)?;
    Ok(u.apply_symbol(|k| window_symbol(k.norm(), q)))
}

pub fn window_symbol(t: f64, q: i32) -> f64 {
    ((q - 1).max(-1)..=q + 1).map(|p| phi_q_radius(t, p)).sum()
}

/// Shells `q >= -1` on which `u` has nonzero projection, ascending.
pub fn active_shells(u: &SpectralField) -> Vec<i32> {
    let mut shells: Vec<i32> = Vec::new();
    for k in u.wavevectors() {
        let t = k.norm();
        for q in shells_of_radius(t) {
            if !shells.contains(&q) {
                shells.push(q);
            }
        }
    }
    shells.sort_unstable();
    shells
}

/// Shells whose cutoff is nonzero at radius `t` (at most two).
pub fn shells_of_radius(t: f64) -> Vec<i32> {
    let top = if t < 1.0 { 1 } else { t.log2().ceil() as i32 + 1 };
    (-1..=top).filter(|&q| phi_q_radius(t, q) != 0.0).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BesovParams {
    pub s: f64,
    pub r: f64,
    pub l: f64,
}

impl BesovParams {
    pub fn new(s: f64, r: f64, l: f64) -> Result<Self> {
        if r.is_nan() || r < 1.0 {
            return Err(Error::InvalidExponent(r));
        }
        if l.is_nan() || l < 1.0 {
            return Err(Error::InvalidExponent(l));
        }
        Ok(Self { s, r, l })
    }

    /// Hoelder conjugate `r' = r / (r - 1)`.
    pub fn conjugate_r(&self) -> f64 {
        conjugate(self.r)
    }
}

pub fn conjugate(r: f64) -> f64 {
    if r == 1.0 {
        f64::INFINITY
    } else if r.is_infinite() {
        1.0
    } else {
        r / (r - 1.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormMethod {
    Parseval,
    Quadrature,
}

impl NormMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            NormMethod::Parseval => "parseval",
            NormMethod::Quadrature => "quadrature",
        }
    }
}

/// How shell norms are evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolutionPolicy {
    /// Largest dense grid (total points) a single shell may use.
    pub max_grid_points: u128,
    /// Initial oversampling factor for sup norms.
    pub sup_oversample: usize,
    /// Sup norms are refined by doubling until the relative change is below this.
    pub sup_tol: f64,
}

impl Default for ResolutionPolicy {
    fn default() -> Self {
        Self { max_grid_points: 1 << 24, sup_oversample: 4, sup_tol: 1e-6 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShellNorm {
    pub q: i32,
    pub lambda_q: f64,
    pub shell_lr_norm: f64,
    pub weighted: f64,
    pub method: NormMethod,
}

fn grid_points(n: usize, dim: usize) -> u128 {
    (n as u128).pow(dim as u32)
}

/// `|u|_r` of a (shell-localized) field, Parseval for `r = 2`, grid quadrature
/// otherwise. `q` only labels errors.
pub fn shell_lr_norm(
    uq: &SpectralField,
    r: f64,
    q: i32,
    policy: &ResolutionPolicy,
) -> Result<(f64, NormMethod)> {
    if r.is_nan() || r < 1.0 {
        return Err(Error::InvalidExponent(r));
    }
    if r == 2.0 {
        return Ok((l2_norm_exact(uq), NormMethod::Parseval));
    }
    if uq.is_empty() {
        return Ok((0.0, NormMethod::Quadrature));
    }
    let dim = uq.dim();
    let n0 = min_resolution(uq.max_abs_k());
    let budget = policy.max_grid_points;
    if grid_points(n0, dim) > budget {
        return Err(Error::InfeasibleShell { q, points: grid_points(n0, dim), budget });
    }
    if r.is_finite() {
        let g = synthesize(uq, n0)?;
        return Ok((lp_norm(&g, r)?, NormMethod::Quadrature));
    }
    // sup: oversample, then refine by doubling while the budget allows
    let mut n = n0;
    while n < n0 * policy.sup_oversample.max(1) && grid_points(2 * n, dim) <= budget {
        n *= 2;
    }
    let mut best = lp_norm(&synthesize(uq, n)?, r)?;
    while grid_points(2 * n, dim) <= budget {
        n *= 2;
        let next = lp_norm(&synthesize(uq, n)?, r)?;
        let change = (next - best).abs() / next.max(f64::MIN_POSITIVE);
        best = best.max(next);
        if change < policy.sup_tol {
            break;
        }
    }
    Ok((best, NormMethod::Quadrature))
}

/// Per-shell entries `lambda_q^s |u_q|_r` over the active shells of `u`.
pub fn besov_shell_norms(
    u: &SpectralField,
    p: &BesovParams,
    policy: &ResolutionPolicy,
) -> Result<Vec<ShellNorm>> {
    let mut out = Vec::new();
    for q in active_shells(u) {
        let uq = shell_project(u, q)?;
        let (norm, method) = shell_lr_norm(&uq, p.r, q, policy)?;
        let lq = lambda(q);
        out.push(ShellNorm { q, lambda_q: lq, shell_lr_norm: norm, weighted: lq.powf(p.s) * norm, method });
    }
    Ok(out)
}

/// `l`-sum of the weighted shell norms (sup for `l = inf`).
pub fn combine(entries: &[ShellNorm], l: f64) -> f64 {
    if l.is_infinite() {
        entries.iter().map(|e| e.weighted).fold(0.0, f64::max)
    } else {
        entries.iter().map(|e| e.weighted.powf(l)).sum::<f64>().powf(1.0 / l)
    }
}

pub fn besov_norm(u: &SpectralField, p: &BesovParams, policy: &ResolutionPolicy) -> Result<f64> {
    Ok(combine(&besov_shell_norms(u, p, policy)?, p.l))
}
