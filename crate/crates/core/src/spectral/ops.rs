use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use super::field::{cvec_norm_sq, CVec, SpectralField, Wavevector, CZERO};
use crate::error::{Error, Result};

/// Relative tolerance for identities that hold exactly in real arithmetic.
pub const EXACT_TOL: f64 = 1e-12;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Leray symbol `v - xi (xi.v)/|xi|^2`; the zero mode passes through.
pub fn leray_project(xi: &Wavevector, v: &CVec) -> CVec {
    let n2 = xi.norm_sq();
    if n2 == 0.0 {
        return *v;
    }
    let x = xi.as_f64();
    let dot = v[0] * x[0] + v[1] * x[1] + v[2] * x[2];
    let f = dot / n2;
    [v[0] - f * x[0], v[1] - f * x[1], v[2] - f * x[2]]
}

/// Leray projection of a real vector `v` at `xi`.
pub fn leray_project_real(xi: &Wavevector, v: [f64; 3]) -> [f64; 3] {
    let n2 = xi.norm_sq();
    if n2 == 0.0 {
        return v;
    }
    let x = xi.as_f64();
    let f = (v[0] * x[0] + v[1] * x[1] + v[2] * x[2]) / n2;
    [v[0] - f * x[0], v[1] - f * x[1], v[2] - f * x[2]]
}

pub fn project_field(u: &SpectralField) -> SpectralField {
    let mut out = SpectralField::zero(u.dim()).expect("dimension already validated");
    for (k, a) in u.iter() {
        out.set(*k, leray_project(k, a));
    }
    out
}

/// `max_k |k . u_hat(k)|`.
pub fn divergence_residual(u: &SpectralField) -> f64 {
    u.iter()
        .map(|(k, a)| {
            let x = k.as_f64();
            (a[0] * x[0] + a[1] * x[1] + a[2] * x[2]).norm()
        })
        .fold(0.0, f64::max)
}

fn require_divergence_free(u: &SpectralField) -> Result<()> {
    let scale = u.max_amplitude() * (u.max_norm_k().max(1.0));
    let res = divergence_residual(u);
    if res > 1e-10 * scale {
        return Err(Error::NotDivergenceFree(res));
    }
    Ok(())
}

/// `i (a . m)` for amplitude `a` and wavevector `m`.
#[inline]
fn i_dot(a: &CVec, m: &Wavevector) -> Complex64 {
    let x = m.as_f64();
    I * (a[0] * x[0] + a[1] * x[1] + a[2] * x[2])
}

/// Exact Fourier coefficients of `u . grad v` by triad convolution over the
/// stored modes. `u` must be divergence-free.
pub fn advect(u: &SpectralField, v: &SpectralField) -> Result<SpectralField> {
    u.same_dim(v)?;
    require_divergence_free(u)?;
    let mut acc: BTreeMap<Wavevector, CVec> = BTreeMap::new();
    for (k, a) in u.iter() {
        for (m, b) in v.iter() {
            let c = i_dot(a, m);
            if c == Complex64::new(0.0, 0.0) {
                continue;
            }
            let e = acc.entry(k.add(*m)).or_insert(CZERO);
            for i in 0..3 {
                e[i] += c * b[i];
            }
        }
    }
    let mut out = SpectralField::zero(u.dim())?;
    for (k, a) in acc {
        out.set(k, a);
    }
    Ok(out)
}

/// Single coefficient `(u . grad v)^(xi)`.
pub fn advect_at(u: &SpectralField, v: &SpectralField, xi: &Wavevector) -> Result<CVec> {
    u.same_dim(v)?;
    let mut out = CZERO;
    for (k, a) in u.iter() {
        let m = xi.sub(*k);
        if let Some(b) = v.get(&m) {
            let c = i_dot(a, &m);
            for i in 0..3 {
                out[i] += c * b[i];
            }
        }
    }
    Ok(out)
}

/// One triad contribution `u_j(k1) v_i(k2) (i k3_i) w_j(k3)` (no volume factor).
#[inline]
pub(crate) fn triad_term(a: &CVec, b: &CVec, k3: &Wavevector, c: &CVec) -> Complex64 {
    let g = i_dot(b, k3);
    g * (a[0] * c[0] + a[1] * c[1] + a[2] * c[2])
}

/// Lookup table for a field's modes over its bounding box.
struct BoxIndex<'a> {
    field: &'a SpectralField,
    lo: [i64; 3],
    hi: [i64; 3],
    dims: [usize; 3],
    slots: Vec<u32>,
    values: Vec<CVec>,
}

const BOX_INDEX_CELLS: u128 = 1 << 25;

impl<'a> BoxIndex<'a> {
    fn new(field: &'a SpectralField) -> Self {
        let mut lo = [i64::MAX; 3];
        let mut hi = [i64::MIN; 3];
        for k in field.wavevectors() {
            for i in 0..3 {
                lo[i] = lo[i].min(k.0[i]);
                hi[i] = hi[i].max(k.0[i]);
            }
        }
        let mut dims = [0usize; 3];
        let mut cells: u128 = 1;
        if !field.is_empty() {
            for i in 0..3 {
                dims[i] = (hi[i] - lo[i] + 1) as usize;
                cells *= dims[i] as u128;
            }
        }
        let mut out = Self { field, lo, hi, dims, slots: Vec::new(), values: Vec::new() };
        if !field.is_empty() && cells <= BOX_INDEX_CELLS {
            out.slots = vec![u32::MAX; cells as usize];
            for (k, a) in field.iter() {
                let c = out.cell(k);
                out.slots[c] = out.values.len() as u32;
                out.values.push(*a);
            }
        }
        out
    }

    #[inline]
    fn cell(&self, k: &Wavevector) -> usize {
        let x = (k.0[0] - self.lo[0]) as usize;
        let y = (k.0[1] - self.lo[1]) as usize;
        let z = (k.0[2] - self.lo[2]) as usize;
        x + self.dims[0] * (y + self.dims[1] * z)
    }

    #[inline]
    fn get(&self, k: &Wavevector) -> Option<&CVec> {
        if self.field.is_empty() || (0..3).any(|i| k.0[i] < self.lo[i] || k.0[i] > self.hi[i]) {
            return None;
        }
        if self.slots.is_empty() {
            return self.field.get(k);
        }
        match self.slots[self.cell(k)] {
            u32::MAX => None,
            s => Some(&self.values[s as usize]),
        }
    }
}

/// Visits every triad `k1 + k2 + k3 = 0` with `k1` in `u`, `k2` in `v`, `k3`
/// in `w`, passing the unscaled contribution. The outer loops run over the two
/// smaller supports.
pub fn visit_triads(
    u: &SpectralField,
    v: &SpectralField,
    w: &SpectralField,
    mut visit: impl FnMut(&Wavevector, &Wavevector, &Wavevector, Complex64),
) -> Result<()> {
    u.same_dim(v)?;
    u.same_dim(w)?;
    let list = |f: &SpectralField| f.iter().map(|(k, a)| (*k, *a)).collect::<Vec<_>>();
    let (lu, lv, lw) = (u.len(), v.len(), w.len());
    if lu >= lv && lu >= lw {
        let idx = BoxIndex::new(u);
        let ws = list(w);
        for (k2, b) in v.iter() {
            for (k3, c) in &ws {
                let k1 = k2.add(*k3).neg();
                if let Some(a) = idx.get(&k1) {
                    visit(&k1, k2, k3, triad_term(a, b, k3, c));
                }
            }
        }
    } else if lv >= lw {
        let idx = BoxIndex::new(v);
        let ws = list(w);
        for (k1, a) in u.iter() {
            for (k3, c) in &ws {
                let k2 = k1.add(*k3).neg();
                if let Some(b) = idx.get(&k2) {
                    visit(k1, &k2, k3, triad_term(a, b, k3, c));
                }
            }
        }
    } else {
        let idx = BoxIndex::new(w);
        let vs = list(v);
        for (k1, a) in u.iter() {
            for (k2, b) in &vs {
                let k3 = k1.add(*k2).neg();
                if let Some(c) = idx.get(&k3) {
                    visit(k1, k2, &k3, triad_term(a, b, &k3, c));
                }
            }
        }
    }
    Ok(())
}

pub fn volume(dim: usize) -> f64 {
    (2.0 * PI).powi(dim as i32)
}

/// `int v_i d_i w_j u_j dx` over the torus, exact via Parseval.
pub fn trilinear(u: &SpectralField, v: &SpectralField, w: &SpectralField) -> Result<f64> {
    let mut sum = Complex64::new(0.0, 0.0);
    let mut mag = 0.0;
    visit_triads(u, v, w, |_, _, _, t| {
        sum += t;
        mag += t.norm();
    })?;
    let vol = volume(u.dim());
    debug_assert!(
        sum.im.abs() <= 1e-10 * mag.max(f64::MIN_POSITIVE),
        "trilinear imaginary residual {:e} vs {:e}",
        sum.im,
        mag
    );
    Ok(vol * sum.re)
}

/// `|u|_2` via Parseval.
pub fn l2_norm_exact(u: &SpectralField) -> f64 {
    let s: f64 = u.iter().map(|(_, a)| cvec_norm_sq(a)).sum();
    (volume(u.dim()) * s).sqrt()
}

/// `int u . v dx`.
pub fn inner(u: &SpectralField, v: &SpectralField) -> f64 {
    let mut s = 0.0;
    for (k, a) in u.iter() {
        if let Some(b) = v.get(k) {
            s += (0..3).map(|i| (a[i] * b[i].conj()).re).sum::<f64>();
        }
    }
    volume(u.dim()) * s
}

/// `int grad u : grad v dx`.
pub fn grad_inner(u: &SpectralField, v: &SpectralField) -> f64 {
    let mut s = 0.0;
    for (k, a) in u.iter() {
        if let Some(b) = v.get(k) {
            s += k.norm_sq() * (0..3).map(|i| (a[i] * b[i].conj()).re).sum::<f64>();
        }
    }
    volume(u.dim()) * s
}
