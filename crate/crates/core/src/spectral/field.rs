use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Complex amplitude vector. In 2D the third component is always zero.
pub type CVec = [Complex64; 3];

pub const CZERO: CVec = [Complex64::new(0.0, 0.0); 3];

/// Integer lattice frequency. 2D wavevectors keep a zero third component.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct Wavevector(pub [i64; 3]);

impl Wavevector {
    pub const ZERO: Wavevector = Wavevector([0, 0, 0]);

    pub fn new2(a: i64, b: i64) -> Self {
        Wavevector([a, b, 0])
    }

    pub fn new3(a: i64, b: i64, c: i64) -> Self {
        Wavevector([a, b, c])
    }

    pub fn neg(self) -> Self {
        Wavevector([-self.0[0], -self.0[1], -self.0[2]])
    }

    pub fn add(self, o: Self) -> Self {
        Wavevector([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }

    pub fn sub(self, o: Self) -> Self {
        self.add(o.neg())
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|&c| (c as f64) * (c as f64)).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn max_abs(&self) -> i64 {
        self.0.iter().map(|c| c.abs()).max().unwrap_or(0)
    }

    pub fn as_f64(&self) -> [f64; 3] {
        [self.0[0] as f64, self.0[1] as f64, self.0[2] as f64]
    }

    pub fn is_zero(&self) -> bool {
        self.0 == [0, 0, 0]
    }

    /// True for exactly one of `k`, `-k` (and for zero): the first nonzero
    /// component is positive.
    pub fn is_representative(&self) -> bool {
        for &c in &self.0 {
            if c != 0 {
                return c > 0;
            }
        }
        true
    }
}

impl fmt::Debug for Wavevector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.0[0], self.0[1], self.0[2])
    }
}

impl fmt::Display for Wavevector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

pub fn cvec_norm_sq(v: &CVec) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum()
}

pub fn cvec_conj(v: &CVec) -> CVec {
    [v[0].conj(), v[1].conj(), v[2].conj()]
}

pub fn cvec_scale(v: &CVec, s: Complex64) -> CVec {
    [v[0] * s, v[1] * s, v[2] * s]
}

pub fn cvec_add(a: &CVec, b: &CVec) -> CVec {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn cvec_real(v: [f64; 3]) -> CVec {
    [
        Complex64::new(v[0], 0.0),
        Complex64::new(v[1], 0.0),
        Complex64::new(v[2], 0.0),
    ]
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 2 || dim == 3 {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(dim))
    }
}

/// A real vector field on the torus as a finite Fourier series.
///
/// Amplitudes are stored for both `k` and `-k`; zero amplitudes are never
/// stored. Iteration order is the lexicographic order of wavevectors, which
/// keeps every triad sum reproducible bit for bit.
#[derive(Clone, PartialEq)]
pub struct SpectralField {
    dim: usize,
    modes: BTreeMap<Wavevector, CVec>,
}

impl fmt::Debug for SpectralField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralField")
            .field("dim", &self.dim)
            .field("modes", &self.modes.len())
            .finish()
    }
}

impl SpectralField {
    pub fn zero(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self { dim, modes: BTreeMap::new() })
    }

    /// Builds a field from raw modes and verifies reality to `tol` relative
    /// to the largest amplitude.
    pub fn from_modes(
        dim: usize,
        modes: impl IntoIterator<Item = (Wavevector, CVec)>,
        tol: f64,
    ) -> Result<Self> {
        let mut f = Self::zero(dim)?;
        for (k, a) in modes {
            if dim == 2 && k.0[2] != 0 {
                return Err(Error::DimensionMismatch { left: 2, right: 3 });
            }
            f.set(k, a);
        }
        f.check_reality(tol)?;
        Ok(f)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn get(&self, k: &Wavevector) -> Option<&CVec> {
        self.modes.get(k)
    }

    pub fn amplitude(&self, k: &Wavevector) -> CVec {
        self.modes.get(k).copied().unwrap_or(CZERO)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Wavevector, &CVec)> {
        self.modes.iter()
    }

    pub fn wavevectors(&self) -> impl Iterator<Item = &Wavevector> {
        self.modes.keys()
    }

    /// Sets one mode without touching its conjugate. Zero amplitudes remove
    /// the mode. In 2D the third amplitude component is forced to zero.
    pub fn set(&mut self, k: Wavevector, mut a: CVec) {
        if self.dim == 2 {
            a[2] = Complex64::new(0.0, 0.0);
        }
        if cvec_norm_sq(&a) == 0.0 {
            self.modes.remove(&k);
        } else {
            self.modes.insert(k, a);
        }
    }

    /// Sets `k` to `a` and `-k` to `conj(a)`. At `k = 0` only the real part
    /// is kept.
    pub fn set_pair(&mut self, k: Wavevector, a: CVec) {
        if k.is_zero() {
            let re = [
                Complex64::new(a[0].re, 0.0),
                Complex64::new(a[1].re, 0.0),
                Complex64::new(a[2].re, 0.0),
            ];
            self.set(k, re);
        } else {
            self.set(k, a);
            self.set(k.neg(), cvec_conj(&a));
        }
    }

    /// Adds `a` at `k` (and `conj(a)` at `-k`).
    pub fn add_pair(&mut self, k: Wavevector, a: CVec) {
        let cur = self.amplitude(&k);
        self.set_pair(k, cvec_add(&cur, &a));
    }

    pub fn max_amplitude(&self) -> f64 {
        self.modes.values().map(|a| cvec_norm_sq(a).sqrt()).fold(0.0, f64::max)
    }

    pub fn max_abs_k(&self) -> i64 {
        self.modes.keys().map(|k| k.max_abs()).max().unwrap_or(0)
    }

    pub fn max_norm_k(&self) -> f64 {
        self.modes.keys().map(|k| k.norm()).fold(0.0, f64::max)
    }

    pub fn check_reality(&self, tol: f64) -> Result<()> {
        let scale = self.max_amplitude().max(f64::MIN_POSITIVE);
        for (k, a) in &self.modes {
            let c = self.amplitude(&k.neg());
            let d: f64 = (0..3).map(|i| (c[i] - a[i].conj()).norm_sqr()).sum::<f64>().sqrt();
            if d > tol * scale {
                return Err(Error::Reality(*k));
            }
        }
        Ok(())
    }

    pub fn same_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            Err(Error::DimensionMismatch { left: self.dim, right: other.dim })
        } else {
            Ok(())
        }
    }

    /// Multiplies every amplitude by a real symbol `m(k)`.
    pub fn apply_symbol(&self, m: impl Fn(&Wavevector) -> f64) -> Self {
        let mut out = Self { dim: self.dim, modes: BTreeMap::new() };
        for (k, a) in &self.modes {
            let w = m(k);
            if w != 0.0 {
                out.set(*k, cvec_scale(a, Complex64::new(w, 0.0)));
            }
        }
        out
    }

    /// Keeps the modes selected by `keep`.
    pub fn filter(&self, keep: impl Fn(&Wavevector) -> bool) -> Self {
        Self {
            dim: self.dim,
            modes: self.modes.iter().filter(|(k, _)| keep(k)).map(|(k, a)| (*k, *a)).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        self.apply_symbol(|_| s)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_dim(other)?;
        let mut out = self.clone();
        for (k, a) in &other.modes {
            let cur = out.amplitude(k);
            out.set(*k, cvec_add(&cur, a));
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    /// Drops modes whose amplitude is at most `tol` times the largest one.
    pub fn pruned(&self, tol: f64) -> Self {
        let cut = tol * self.max_amplitude();
        self.filter_amp(|a| cvec_norm_sq(a).sqrt() > cut)
    }

    fn filter_amp(&self, keep: impl Fn(&CVec) -> bool) -> Self {
        Self {
            dim: self.dim,
            modes: self.modes.iter().filter(|(_, a)| keep(a)).map(|(k, a)| (*k, *a)).collect(),
        }
    }

    /// Largest modewise difference between two fields.
    pub fn max_diff(&self, other: &Self) -> f64 {
        let mut d: f64 = 0.0;
        for (k, a) in &self.modes {
            let b = other.amplitude(k);
            d = d.max((0..3).map(|i| (a[i] - b[i]).norm_sqr()).sum::<f64>().sqrt());
        }
        for (k, b) in &other.modes {
            if !self.modes.contains_key(k) {
                d = d.max(cvec_norm_sq(b).sqrt());
            }
        }
        d
    }
}

#[derive(Serialize, Deserialize)]
struct ModeRecord {
    k: Vec<i64>,
    re: Vec<f64>,
    im: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct FieldRecord {
    dim: usize,
    modes: Vec<ModeRecord>,
}

impl SpectralField {
    /// JSON form `{ "dim": n, "modes": [ { "k": [..], "re": [..], "im": [..] } ] }`.
    /// Only one wavevector of each conjugate pair is written.
    pub fn to_json(&self) -> Result<String> {
        let d = self.dim;
        let modes = self
            .modes
            .iter()
            .filter(|(k, _)| k.is_representative())
            .map(|(k, a)| ModeRecord {
                k: k.0[..d].to_vec(),
                re: a[..d].iter().map(|c| c.re).collect(),
                im: a[..d].iter().map(|c| c.im).collect(),
            })
            .collect();
        Ok(serde_json::to_string_pretty(&FieldRecord { dim: d, modes })?)
    }

    /// Inverse of `to_json`; conjugate modes are reconstructed.
    pub fn from_json(s: &str) -> Result<Self> {
        let rec: FieldRecord = serde_json::from_str(s)?;
        let mut f = Self::zero(rec.dim)?;
        for m in rec.modes {
            let d = rec.dim;
            if m.k.len() != d || m.re.len() != d || m.im.len() != d {
                return Err(Error::DimensionMismatch { left: d, right: m.k.len() });
            }
            let mut k = [0i64; 3];
            let mut a = CZERO;
            for i in 0..d {
                k[i] = m.k[i];
                a[i] = Complex64::new(m.re[i], m.im[i]);
            }
            f.set_pair(Wavevector(k), a);
        }
        Ok(f)
    }
}
