use std::f64::consts::PI;

use num_complex::Complex64;

use super::field::{SpectralField, Wavevector, CZERO};
use crate::error::{Error, Result};
use crate::fft::FftNd;

/// Real vector samples on the uniform grid `x_j = 2 pi j / N` of `[0, 2pi)^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridField {
    pub dim: usize,
    pub n: usize,
    pub values: Vec<[f64; 3]>,
}

/// Smallest alias-free resolution for a field with `max |k|_inf = kmax`.
pub fn min_resolution(kmax: i64) -> usize {
    (2 * (1 + kmax.max(0)) as usize).next_power_of_two()
}

fn check_resolution(u: &SpectralField, n: usize) -> Result<()> {
    if !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    let required = 2 * (1 + u.max_abs_k()) as usize;
    if n < required {
        return Err(Error::ResolutionTooSmall { n, required });
    }
    Ok(())
}

/// Evaluates `u(x) = sum u_hat(k) e^{ik.x}` at every grid point.
pub fn synthesize(u: &SpectralField, n: usize) -> Result<GridField> {
    check_resolution(u, n)?;
    let fft = FftNd::new(n, u.dim())?;
    let mut comps = vec![vec![Complex64::default(); fft.len()]; u.dim()];
    for (k, a) in u.iter() {
        let idx = fft.flat_index(&k.0);
        for (c, comp) in comps.iter_mut().enumerate() {
            comp[idx] += a[c];
        }
    }
    let scale = u.max_amplitude() * u.len().max(1) as f64;
    let mut values = vec![[0.0; 3]; fft.len()];
    for (c, comp) in comps.iter_mut().enumerate() {
        fft.inverse(comp);
        for (v, z) in values.iter_mut().zip(comp.iter()) {
            assert!(
                z.im.abs() <= 1e-10 * scale.max(1.0),
                "synthesized field has imaginary part {:e}",
                z.im
            );
            v[c] = z.re;
        }
    }
    Ok(GridField { dim: u.dim(), n, values })
}

/// Discrete Fourier analysis of grid samples back to a sparse field. Modes
/// below `1e-13` of the largest amplitude are dropped.
pub fn analyze(g: &GridField) -> Result<SpectralField> {
    let fft = FftNd::new(g.n, g.dim)?;
    let norm = 1.0 / fft.len() as f64;
    let mut amps = vec![CZERO; fft.len()];
    for c in 0..g.dim {
        let mut comp: Vec<Complex64> = g.values.iter().map(|v| Complex64::new(v[c], 0.0)).collect();
        fft.forward(&mut comp);
        for (a, z) in amps.iter_mut().zip(comp) {
            a[c] = z * norm;
        }
    }
    let half = (g.n / 2) as i64;
    let modes = amps.into_iter().enumerate().filter_map(|(idx, a)| {
        let k = fft.wavevector_at(idx);
        // Nyquist planes are ambiguous; alias-free sampling keeps them empty.
        if k.iter().any(|&c| c == -half) {
            return None;
        }
        Some((Wavevector(k), a))
    });
    let mut f = SpectralField::zero(g.dim)?;
    for (k, a) in modes {
        f.set(k, a);
    }
    Ok(f.pruned(1e-13))
}

/// `(int |g|^r dx)^{1/r}` by uniform-grid quadrature; `r = inf` gives the
/// maximum over samples.
pub fn lp_norm(g: &GridField, r: f64) -> Result<f64> {
    if r.is_nan() || r < 1.0 {
        return Err(Error::InvalidExponent(r));
    }
    let mags = g.values.iter().map(|v| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt());
    if r.is_infinite() {
        return Ok(mags.fold(0.0, f64::max));
    }
    let cell = (2.0 * PI / g.n as f64).powi(g.dim as i32);
    let s: f64 = if r == 2.0 {
        mags.map(|m| m * m).sum()
    } else if r == 1.0 {
        mags.sum()
    } else {
        mags.map(|m| m.powf(r)).sum()
    };
    Ok((cell * s).powf(1.0 / r))
}

/// Maximum of `|u|` over the planes `x_3 = z` (3D) sampled at resolution `n`
/// in the first two coordinates. A lower bound for `|u|_inf` that avoids the
/// full 3D grid.
pub fn slice_sup(u: &SpectralField, n: usize, planes: &[f64]) -> Result<f64> {
    if u.dim() != 3 {
        return Err(Error::UnsupportedDimension(u.dim()));
    }
    let kmax = u.iter().map(|(k, _)| k.0[0].abs().max(k.0[1].abs())).max().unwrap_or(0);
    let required = 2 * (1 + kmax) as usize;
    if !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    if n < required {
        return Err(Error::ResolutionTooSmall { n, required });
    }
    let fft = FftNd::new(n, 2)?;
    let mut best: f64 = 0.0;
    for &z in planes {
        let mut comps = vec![vec![Complex64::default(); fft.len()]; 3];
        for (k, a) in u.iter() {
            let phase = Complex64::from_polar(1.0, k.0[2] as f64 * z);
            let idx = fft.flat_index(&[k.0[0], k.0[1], 0]);
            for c in 0..3 {
                comps[c][idx] += a[c] * phase;
            }
        }
        for comp in comps.iter_mut() {
            fft.inverse(comp);
        }
        for i in 0..fft.len() {
            let m: f64 = (0..3).map(|c| comps[c][i].re * comps[c][i].re).sum::<f64>();
            best = best.max(m.sqrt());
        }
    }
    Ok(best)
}

/// Point evaluation of `u` at `x` by direct summation.
pub fn evaluate(u: &SpectralField, x: [f64; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (k, a) in u.iter() {
        let kx = k.as_f64();
        let ph = Complex64::from_polar(1.0, kx[0] * x[0] + kx[1] * x[1] + kx[2] * x[2]);
        for c in 0..3 {
            out[c] += (a[c] * ph).re;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::field::cvec_real;

    fn shear() -> SpectralField {
        let mut u = SpectralField::zero(2).unwrap();
        u.set_pair(Wavevector::new2(1, 0), cvec_real([0.0, 0.5, 0.0]));
        u
    }

    #[test]
    fn synthesize_shear() {
        let g = synthesize(&shear(), 8).unwrap();
        for iy in 0..8 {
            for ix in 0..8 {
                let x = 2.0 * PI * ix as f64 / 8.0;
                let v = g.values[ix + 8 * iy];
                assert!((v[1] - x.cos()).abs() < 1e-14);
                assert!(v[0].abs() < 1e-15);
            }
        }
        assert!((lp_norm(&g, f64::INFINITY).unwrap() - 1.0).abs() < 1e-14);
        assert!((lp_norm(&g, 2.0).unwrap() - (2.0 * PI * PI).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn zero_field_norms() {
        let z = SpectralField::zero(3).unwrap();
        let g = synthesize(&z, 4).unwrap();
        assert!(g.values.iter().all(|v| *v == [0.0; 3]));
        for r in [1.0, 1.5, 2.0, f64::INFINITY] {
            assert_eq!(lp_norm(&g, r).unwrap(), 0.0);
        }
        assert!(matches!(lp_norm(&g, 0.5), Err(Error::InvalidExponent(_))));
    }

    #[test]
    fn resolution_guard() {
        assert!(matches!(synthesize(&shear(), 2), Err(Error::ResolutionTooSmall { .. })));
        assert!(matches!(synthesize(&shear(), 6), Err(Error::NotPowerOfTwo(6))));
        assert_eq!(min_resolution(1), 4);
        assert_eq!(min_resolution(5), 16);
    }

    #[test]
    fn round_trip() {
        let mut u = SpectralField::zero(3).unwrap();
        u.set_pair(Wavevector::new3(1, -2, 3), [Complex64::new(0.3, -0.1), Complex64::new(0.0, 0.2), Complex64::new(1.0, 0.0)]);
        u.set_pair(Wavevector::new3(0, 0, 1), cvec_real([0.5, 0.25, 0.0]));
        let back = analyze(&synthesize(&u, 8).unwrap()).unwrap();
        assert!(back.max_diff(&u) < 1e-12);
        assert_eq!(back.len(), u.len());
    }

    #[test]
    fn slices_bound_sup() {
        let mut u = SpectralField::zero(3).unwrap();
        u.set_pair(Wavevector::new3(1, 0, 2), cvec_real([0.0, 0.5, 0.0]));
        let s = slice_sup(&u, 4, &[0.0]).unwrap();
        assert!((s - 1.0).abs() < 1e-14);
        let p = evaluate(&u, [0.0, 0.0, 0.0]);
        assert!((p[1] - 1.0).abs() < 1e-15);
    }
}
