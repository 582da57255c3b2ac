//! Measured forms of the forward-transfer quantities: the transfer coefficient
//! at `xi_q = (2^q, 1)`, the shell L^1 estimate for `u . grad v`, the three-way
//! split of `<U, U, U_{q_j}>`, and the high/low interaction buckets.

use num_complex::Complex64;
use serde::Serialize;

use crate::constructions::{EulerInitParams, NseDatum};
use crate::error::{Error, Result};
use crate::lambda;
use crate::littlewood_paley::{
    besov_norm, phi_q_radius, shell_lr_norm, shell_project, shells_of_radius, BesovParams, ResolutionPolicy,
};
use crate::spectral::{advect, advect_at, leray_project, trilinear, visit_triads, volume, SpectralField, Wavevector};

/// Probe frequency `(2^q, 1)`.
pub fn probe(q: i32) -> Wavevector {
    Wavevector::new2(1 << q, 1)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransferReport {
    pub q: i32,
    /// `p(xi_q) (u0 . grad u0)^(xi_q)`, components 1 and 2.
    pub f: [Complex64; 2],
    /// `|f . e2| / lambda_q^{1-s}`.
    pub leading_magnitude: f64,
    /// `|f - (f . e2) e2|`.
    pub residual: f64,
    /// `residual * lambda_q^s`.
    pub residual_scaled: f64,
}

fn check_probe_range(p: &EulerInitParams, q: i32) -> Result<()> {
    if q < 1 || q > p.q_max - 1 {
        return Err(Error::OutOfRange(format!("probe shell q = {q} (valid 1..={})", p.q_max - 1)));
    }
    Ok(())
}

pub fn transfer_coefficient(u0: &SpectralField, p: &EulerInitParams, q: i32) -> Result<TransferReport> {
    check_probe_range(p, q)?;
    let xi = probe(q);
    let raw = advect_at(u0, u0, &xi)?;
    let f = leray_project(&xi, &raw);
    let lq = lambda(q);
    let residual = f[0].norm();
    Ok(TransferReport {
        q,
        f: [f[0], f[1]],
        leading_magnitude: f[1].norm() / lq.powf(1.0 - p.s),
        residual,
        residual_scaled: residual * lq.powf(p.s),
    })
}

/// First-order Duhamel term of `u_t + u . grad u = -grad p` at `xi_q`:
/// `u_hat(xi_q, t) ~ -t f_q` (the datum vanishes at `xi_q`).
pub fn mild_increment_prediction(u0: &SpectralField, p: &EulerInitParams, q: i32, t: f64) -> Result<[Complex64; 2]> {
    let r = transfer_coefficient(u0, p, q)?;
    Ok([-r.f[0] * t, -r.f[1] * t])
}

/// `|(u . grad v)_q|_1 lambda_q^{s-1} / (|u|_X |v|_X)` with `X = B^s_{r,inf}`.
pub fn shell_advect_l1_ratio(
    u: &SpectralField,
    v: &SpectralField,
    q: i32,
    s: f64,
    r: f64,
    policy: &ResolutionPolicy,
) -> Result<f64> {
    let x = BesovParams::new(s, r, f64::INFINITY)?;
    let nu = besov_norm(u, &x, policy)?;
    let nv = besov_norm(v, &x, policy)?;
    let w = shell_project(&advect(u, v)?, q)?;
    if w.is_empty() {
        return Ok(0.0);
    }
    let (l1, _) = shell_lr_norm(&w, 1.0, q, policy)?;
    Ok(l1 * lambda(q).powf(s - 1.0) / (nu * nv))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TriadReport {
    pub j: usize,
    pub q: i32,
    /// `sum_{k > j} <U~_k, U~_k, U_{q_j}>`
    pub a: f64,
    /// `<U_{q_j - 1}, U_{q_j}, U_{q_j}>`
    pub b: f64,
    /// `-<U_{q_j}, U_{q_j}, U_{<= j-1}>`
    pub c: f64,
    /// `<U, U, U_{q_j}>` computed directly.
    pub total: f64,
    pub b_over_lambda: f64,
    /// `lambda_{q_j}^2 / lambda_{q_{j+1}}` (0 for the last block).
    pub gap_ratio: f64,
    /// `lambda_{q_{j-1}}^2 / lambda_{q_j}` (0 for the first block).
    pub prev_gap_ratio: f64,
}

impl TriadReport {
    pub fn consistency_error(&self) -> f64 {
        let s = self.a + self.b + self.c;
        (s - self.total).abs() / self.total.abs().max(self.a.abs()).max(self.b.abs()).max(self.c.abs()).max(f64::MIN_POSITIVE)
    }
}

/// The split `<U, U, U_{q_j}> = A + B + C`, every term by exact triad sums over
/// the construction blocks.
pub fn triad_energy_terms(datum: &NseDatum, j: usize) -> Result<TriadReport> {
    let block = *datum.block(j)?;
    let jmax = datum.blocks.len();
    let uq = datum.high_part(j)?;
    let mut a = 0.0;
    for k in j + 1..=jmax {
        let pk = datum.pair(k)?;
        a += trilinear(&pk, &pk, &uq)?;
    }
    let b = trilinear(&datum.low_part(j)?, &uq, &uq)?;
    let low = datum.blocks_range(1, j - 1)?;
    let c = if low.is_empty() { 0.0 } else { -trilinear(&uq, &uq, &low)? };
    let total = trilinear(&datum.field()?, &datum.field()?, &uq)?;
    let lq = lambda(block.q);
    let gap_ratio = if j < jmax { lq * lq / lambda(datum.blocks[j].q) } else { 0.0 };
    let prev_gap_ratio = if j > 1 {
        let lp = lambda(datum.blocks[j - 2].q);
        lp * lp / lq
    } else {
        0.0
    };
    Ok(TriadReport { j, q: block.q, a, b, c, total, b_over_lambda: b / lq, gap_ratio, prev_gap_ratio })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct BonySplit {
    /// Both source shells `>= q` and within two of each other.
    pub high_high: f64,
    /// Low-passed first factor against the windowed second factor.
    pub low_high: f64,
    /// Windowed first factor against the low-passed second factor.
    pub high_low: f64,
    /// Interactions in none of the buckets.
    pub remainder: f64,
}

impl BonySplit {
    pub fn total(&self) -> f64 {
        self.high_high + self.low_high + self.high_low + self.remainder
    }
}

/// Splits `<a, b, c_q>` by the shells `(p', p'')` of the first two factors.
/// Each triad is weighted by `phi_{p'}(k1) phi_{p''}(k2)` and every shell pair
/// goes to the first matching bucket in the order high-high, low-high,
/// high-low, so the parts partition the full value.
pub fn bony_split(a: &SpectralField, b: &SpectralField, c: &SpectralField, q: i32) -> Result<BonySplit> {
    if q < 0 {
        return Err(Error::InvalidShell(q));
    }
    let cq = shell_project(c, q)?;
    let mut out = BonySplit::default();
    let vol = volume(a.dim());
    visit_triads(a, b, &cq, |k1, k2, _, t| {
        let (t1, t2) = (k1.norm(), k2.norm());
        for p1 in shells_of_radius(t1) {
            let w1 = phi_q_radius(t1, p1);
            for p2 in shells_of_radius(t2) {
                let v = vol * (t * w1 * phi_q_radius(t2, p2)).re;
                if p1 >= q && p2 >= q && (p1 - p2).abs() <= 2 {
                    out.high_high += v;
                } else if p1 <= q && (p2 - q).abs() <= 1 {
                    out.low_high += v;
                } else if (p1 - q).abs() <= 1 && p2 <= q {
                    out.high_low += v;
                } else {
                    out.remainder += v;
                }
            }
        }
    })?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{euler_u0, NseInitParams};
    use crate::spectral::cvec_real;

    fn euler(s: f64, q_max: i32) -> (SpectralField, EulerInitParams) {
        let p = EulerInitParams::new(s, q_max).unwrap();
        (euler_u0(&p), p)
    }

    /// Hand expansion: only (0, 1) + (2^q, 0) and (2^q, 0) + (0, 1) reach xi_q,
    /// giving (i/4) 2^{-qs} e1 + (i/4) 2^{q(1-s)} e2 before projection.
    fn transfer_oracle(q: i32, s: f64) -> [Complex64; 2] {
        let l = lambda(q);
        let v = [Complex64::new(0.0, 0.25 * l.powf(-s)), Complex64::new(0.0, 0.25 * l.powf(1.0 - s))];
        let dot = v[0] * l + v[1];
        let n2 = l * l + 1.0;
        [v[0] - dot * (l / n2), v[1] - dot / n2]
    }

    #[test]
    fn transfer_matches_hand_expansion() {
        for &s in &[0.5, 1.0, 2.0] {
            let (u0, p) = euler(s, 10);
            for q in 1..10 {
                let r = transfer_coefficient(&u0, &p, q).unwrap();
                let o = transfer_oracle(q, s);
                for i in 0..2 {
                    assert!((r.f[i] - o[i]).norm() <= 1e-14 * o[1].norm().max(1.0));
                }
                assert!(r.f[1].re.abs() <= 1e-12 * r.f[1].norm());
                assert!(r.f[1].im > 0.0);
            }
        }
    }

    #[test]
    fn transfer_range_is_checked() {
        let (u0, p) = euler(1.0, 4);
        assert!(transfer_coefficient(&u0, &p, 4).is_err());
        assert!(transfer_coefficient(&u0, &p, 0).is_err());
        assert!(transfer_coefficient(&u0, &p, 3).is_ok());
    }

    #[test]
    fn transfer_uses_only_four_modes() {
        let (u0, p) = euler(1.0, 8);
        let q = 5;
        let keep = [Wavevector::new2(0, 1), Wavevector::new2(0, -1), Wavevector::new2(32, 0), Wavevector::new2(-32, 0)];
        let reduced = u0.filter(|k| keep.contains(k));
        let a = transfer_coefficient(&u0, &p, q).unwrap();
        let b = transfer_coefficient(&reduced, &p, q).unwrap();
        assert_eq!(a.f, b.f);
    }

    #[test]
    fn mild_prediction_is_linear_in_time() {
        let (u0, p) = euler(1.0, 5);
        let z = mild_increment_prediction(&u0, &p, 2, 0.0).unwrap();
        assert_eq!(z, [Complex64::new(0.0, 0.0); 2]);
        let a = mild_increment_prediction(&u0, &p, 2, 1e-3).unwrap();
        let b = mild_increment_prediction(&u0, &p, 2, 2e-3).unwrap();
        let f = transfer_coefficient(&u0, &p, 2).unwrap().f;
        for i in 0..2 {
            assert!((b[i] - a[i] * 2.0).norm() < 1e-18);
            assert!((a[i] + f[i] * 1e-3).norm() < 1e-18);
        }
        // probe frequency is not a construction mode
        for q in 0..5 {
            assert!(u0.get(&probe(q)).is_none());
        }
    }

    #[test]
    fn l1_ratio_homogeneity_and_constant_v() {
        let (u0, _) = euler(1.0, 4);
        let policy = ResolutionPolicy::default();
        let r1 = shell_advect_l1_ratio(&u0, &u0, 3, 1.0, 2.0, &policy).unwrap();
        let r2 = shell_advect_l1_ratio(&u0.scale(3.0), &u0.scale(3.0), 3, 1.0, 2.0, &policy).unwrap();
        assert!(r1 > 0.0);
        assert!((r1 - r2).abs() <= 1e-12 * r1);
        let mut c = SpectralField::zero(2).unwrap();
        c.set_pair(Wavevector::ZERO, cvec_real([1.0, 0.0, 0.0]));
        c.set_pair(Wavevector::new2(8, 0), cvec_real([0.0, 1e-30, 0.0]));
        // v = constant plus a negligible mode keeps the Besov norm nonzero
        let mut v = SpectralField::zero(2).unwrap();
        v.set_pair(Wavevector::ZERO, cvec_real([1.0, 2.0, 0.0]));
        assert_eq!(shell_advect_l1_ratio(&u0, &v, 3, 1.0, 2.0, &policy).unwrap(), 0.0);
    }

    fn tiny_datum(shells: Vec<i32>) -> NseDatum {
        NseDatum::new(NseInitParams::new(0.2, 0.51, shells).unwrap()).unwrap()
    }

    #[test]
    fn single_block_has_no_a_or_c() {
        let d = tiny_datum(vec![3]);
        let r = triad_energy_terms(&d, 1).unwrap();
        assert_eq!(r.a, 0.0);
        assert_eq!(r.c, 0.0);
        assert!(r.b.abs() > 0.0);
        assert!(r.consistency_error() < 1e-10);
    }

    #[test]
    fn split_is_consistent_for_two_blocks() {
        let d = tiny_datum(vec![1, 3]);
        for j in 1..=2 {
            let r = triad_energy_terms(&d, j).unwrap();
            assert!(r.consistency_error() < 1e-10, "{r:?}");
        }
    }

    #[test]
    fn bony_low_high_captures_low_times_shell() {
        // a far below shell q, b exactly in shell q
        let mut a = SpectralField::zero(2).unwrap();
        a.set_pair(Wavevector::new2(0, 1), cvec_real([1.0, 0.0, 0.0]));
        let mut b = SpectralField::zero(2).unwrap();
        b.set_pair(Wavevector::new2(16, 0), cvec_real([0.0, 1.0, 0.0]));
        b.set_pair(Wavevector::new2(16, 1), cvec_real([1.0, -16.0, 0.0]));
        let split = bony_split(&a, &b, &b, 4).unwrap();
        let full = trilinear(&a, &b, &shell_project(&b, 4).unwrap()).unwrap();
        assert!((split.low_high - full).abs() <= 1e-12 * full.abs().max(1e-300));
        assert_eq!(split.high_high, 0.0);
        assert_eq!(split.high_low, 0.0);
    }
}
