#![allow(dead_code)]

use lpcascade::spectral::{analyze, cvec_real, project_field, synthesize, GridField};
use lpcascade::{SpectralField, Wavevector};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Random real divergence-free field with at most `max_modes` stored modes and `|k_i| <= kmax`.
pub fn random_field(rng: &mut ChaCha8Rng, dim: usize, max_modes: usize, kmax: i64) -> SpectralField {
    let mut u = SpectralField::zero(dim).unwrap();
    let pairs = rng.gen_range(1..=max_modes / 2);
    for _ in 0..pairs {
        let k = loop {
            let k = if dim == 2 {
                Wavevector::new2(rng.gen_range(-kmax..=kmax), rng.gen_range(-kmax..=kmax))
            } else {
                Wavevector::new3(rng.gen_range(-kmax..=kmax), rng.gen_range(-kmax..=kmax), rng.gen_range(-kmax..=kmax))
            };
            if !k.is_zero() {
                break k;
            }
        };
        let mut a = [Complex64::default(); 3];
        for c in a.iter_mut().take(dim) {
            *c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
        u.set_pair(k, a);
    }
    project_field(&u)
}

/// Constant (zero mode) vector field.
pub fn constant(dim: usize, v: [f64; 3]) -> SpectralField {
    let mut u = SpectralField::zero(dim).unwrap();
    u.set_pair(Wavevector::ZERO, cvec_real(v));
    u
}

fn derivative(v: &SpectralField, axis: usize) -> SpectralField {
    let mut out = SpectralField::zero(v.dim()).unwrap();
    for (k, a) in v.iter() {
        let f = Complex64::new(0.0, k.0[axis] as f64);
        out.set(*k, [a[0] * f, a[1] * f, a[2] * f]);
    }
    out
}

/// Grid size whose sample sums integrate triple products of fields with
/// `|k_i| <= kmax` exactly.
pub fn oracle_resolution(kmax: i64) -> usize {
    (4 * kmax as usize + 1).next_power_of_two()
}

/// `u . grad v` by pointwise products on a grid, then analysis.
pub fn dense_advect(u: &SpectralField, v: &SpectralField, n: usize) -> SpectralField {
    let dim = u.dim();
    let gu = synthesize(u, n).unwrap();
    let grads: Vec<GridField> = (0..dim).map(|j| synthesize(&derivative(v, j), n).unwrap()).collect();
    let mut out = gu.clone();
    for (p, val) in out.values.iter_mut().enumerate() {
        let mut r = [0.0; 3];
        for (j, g) in grads.iter().enumerate() {
            for (i, ri) in r.iter_mut().enumerate() {
                *ri += gu.values[p][j] * g.values[p][i];
            }
        }
        *val = r;
    }
    analyze(&out).unwrap()
}

/// `int v_i d_i w_j u_j dx` by the grid rectangle rule.
pub fn dense_trilinear(u: &SpectralField, v: &SpectralField, w: &SpectralField, n: usize) -> f64 {
    let dim = u.dim();
    let gu = synthesize(u, n).unwrap();
    let gv = synthesize(v, n).unwrap();
    let grads: Vec<GridField> = (0..dim).map(|i| synthesize(&derivative(w, i), n).unwrap()).collect();
    let mut s = 0.0;
    for p in 0..gu.values.len() {
        for i in 0..dim {
            for j in 0..3 {
                s += gv.values[p][i] * grads[i].values[p][j] * gu.values[p][j];
            }
        }
    }
    let vol = (2.0 * std::f64::consts::PI).powi(dim as i32);
    vol * s / gu.values.len() as f64
}

/// `vol |u|_A |v|_A |grad w|_A` with `|f|_A = sum |f_hat|`, an upper bound for
/// `|<u, v, w>|`.
pub fn wiener_bound(u: &SpectralField, v: &SpectralField, w: &SpectralField) -> f64 {
    let a = |f: &SpectralField, grad: bool| -> f64 {
        f.iter()
            .map(|(k, x)| {
                let m: f64 = x.iter().map(|z| z.norm()).sum();
                if grad {
                    m * k.norm()
                } else {
                    m
                }
            })
            .sum()
    };
    let vol = (2.0 * std::f64::consts::PI).powi(u.dim() as i32);
    vol * a(u, false) * a(v, false) * a(w, true)
}
