//! The two explicit initial data: the 2D shear-plus-cosines Euler datum and
//! the 3D lattice-block Navier-Stokes datum.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::FftNd;
use crate::lambda;
use crate::lattice_sum::box_sum;
use crate::spectral::{cvec_real, leray_project_real, SpectralField, Wavevector, CVec};

/// Euler datum `u0 = e1 cos y + e2 sum_{q=0}^{Q} 2^{-qs} cos(2^q x)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EulerInitParams {
    pub s: f64,
    /// Truncation index `Q` of the cosine series.
    pub q_max: i32,
}

impl EulerInitParams {
    pub fn new(s: f64, q_max: i32) -> Result<Self> {
        if q_max < 1 {
            return Err(Error::InvalidParams(format!("Q must be >= 1, got {q_max}")));
        }
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::InvalidParams(format!("s must be positive, got {s}")));
        }
        Ok(Self { s, q_max })
    }

    /// Whether `B^s_{r,inf}` is in the range where the inflation argument
    /// applies: `s > 0` for `r > 2`, `s > 2(2/r - 1)` for `1 <= r <= 2`.
    pub fn admissible_for(&self, r: f64) -> bool {
        if r > 2.0 {
            self.s > 0.0
        } else {
            r >= 1.0 && self.s > 2.0 * (2.0 / r - 1.0)
        }
    }
}

pub fn euler_u0(p: &EulerInitParams) -> SpectralField {
    let mut u = SpectralField::zero(2).expect("2D");
    u.set_pair(Wavevector::new2(0, 1), cvec_real([0.5, 0.0, 0.0]));
    for q in 0..=p.q_max {
        let lq = 1i64 << q;
        u.set_pair(Wavevector::new2(lq, 0), cvec_real([0.0, 0.5 * lambda(q).powf(-p.s), 0.0]));
    }
    u
}

/// Inclusive integer box `lo..=hi` per axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntBox {
    pub lo: [i64; 3],
    pub hi: [i64; 3],
}

impl IntBox {
    pub fn is_empty(&self) -> bool {
        (0..3).any(|i| self.hi[i] < self.lo[i])
    }

    pub fn count(&self) -> u128 {
        if self.is_empty() {
            return 0;
        }
        (0..3).map(|i| (self.hi[i] - self.lo[i] + 1) as u128).product()
    }

    pub fn contains(&self, k: &Wavevector) -> bool {
        (0..3).all(|i| self.lo[i] <= k.0[i] && k.0[i] <= self.hi[i])
    }

    pub fn neg(&self) -> Self {
        Self {
            lo: [-self.hi[0], -self.hi[1], -self.hi[2]],
            hi: [-self.lo[0], -self.lo[1], -self.lo[2]],
        }
    }

    /// Minkowski sum; for integer boxes it is again a box.
    pub fn minkowski(&self, o: &Self) -> Self {
        Self {
            lo: [self.lo[0] + o.lo[0], self.lo[1] + o.lo[1], self.lo[2] + o.lo[2]],
            hi: [self.hi[0] + o.hi[0], self.hi[1] + o.hi[1], self.hi[2] + o.hi[2]],
        }
    }

    pub fn intersects(&self, o: &Self) -> bool {
        (0..3).all(|i| self.lo[i] <= o.hi[i] && o.lo[i] <= self.hi[i])
    }

    pub fn points(&self) -> impl Iterator<Item = Wavevector> + '_ {
        let b = *self;
        let empty = self.is_empty();
        (b.lo[0]..=b.hi[0])
            .flat_map(move |x| (b.lo[1]..=b.hi[1]).flat_map(move |y| (b.lo[2]..=b.hi[2]).map(move |z| Wavevector([x, y, z]))))
            .filter(move |_| !empty)
    }

    /// Smallest and largest Euclidean norm over the box.
    pub fn norm_range(&self) -> (f64, f64) {
        let mut lo2 = 0.0;
        let mut hi2 = 0.0;
        for i in 0..3 {
            let (a, b) = (self.lo[i] as f64, self.hi[i] as f64);
            let near = if a <= 0.0 && b >= 0.0 { 0.0 } else { a.abs().min(b.abs()) };
            let far = a.abs().max(b.abs());
            lo2 += near * near;
            hi2 += far * far;
        }
        (lo2.sqrt(), hi2.sqrt())
    }

    pub fn ranges(&self) -> [(i64, i64); 3] {
        [(self.lo[0], self.hi[0]), (self.lo[1], self.hi[1]), (self.lo[2], self.hi[2])]
    }
}

/// Normalization of the lower-shell blocks `B_j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LowBlockScale {
    /// Unit amplitude `p(xi) e1` on `B_j`.
    Unit,
    /// Same `2^{-2 q_j}` prefactor as the upper blocks, which keeps `|U|_2`
    /// finite and the transfer term of order `2^{q_j}`.
    Matched,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NseInitParams {
    pub c: f64,
    pub epsilon: f64,
    pub shells: Vec<i32>,
    pub low_scale: LowBlockScale,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapPair {
    pub q_i: i32,
    pub q_next: i32,
    pub ratio: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapReport {
    pub epsilon: f64,
    pub pairs: Vec<GapPair>,
    pub pass: bool,
}

/// `lambda_{q_i}^2 / lambda_{q_{i+1}}` against `epsilon` for each consecutive pair.
pub fn validate_gaps(p: &NseInitParams) -> GapReport {
    let pairs: Vec<GapPair> = p
        .shells
        .windows(2)
        .map(|w| {
            let ratio = lambda(w[0]).powi(2) / lambda(w[1]);
            GapPair { q_i: w[0], q_next: w[1], ratio, pass: ratio < p.epsilon }
        })
        .collect();
    let pass = pairs.iter().all(|g| g.pass);
    GapReport { epsilon: p.epsilon, pairs, pass }
}

impl NseInitParams {
    pub fn new(c: f64, epsilon: f64, shells: Vec<i32>) -> Result<Self> {
        let p = Self { c, epsilon, shells, low_scale: LowBlockScale::Matched };
        p.validate()?;
        Ok(p)
    }

    pub fn with_low_scale(mut self, s: LowBlockScale) -> Self {
        self.low_scale = s;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c < 1.0) {
            return Err(Error::InvalidParams(format!("c must lie in (0, 1), got {}", self.c)));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidParams(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if self.shells.is_empty() {
            return Err(Error::InvalidParams("shell sequence is empty".into()));
        }
        if self.shells[0] < 1 || self.shells.iter().any(|&q| q > 40) {
            return Err(Error::InvalidParams("shells must lie in 1..=40".into()));
        }
        if self.shells.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParams("shells must be strictly increasing".into()));
        }
        let gaps = validate_gaps(self);
        if let Some(g) = gaps.pairs.iter().find(|g| !g.pass) {
            return Err(Error::InvalidParams(format!(
                "gap condition fails for ({}, {}): ratio {} is not < epsilon {}",
                g.q_i, g.q_next, g.ratio, self.epsilon
            )));
        }
        Ok(())
    }

    pub fn num_blocks(&self) -> usize {
        self.shells.len()
    }

    pub fn shell(&self, j: usize) -> Result<i32> {
        if j == 0 || j > self.shells.len() {
            return Err(Error::OutOfRange(format!("block index {j} (J = {})", self.shells.len())));
        }
        Ok(self.shells[j - 1])
    }
}

/// The six boxes of block `j`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BlockSet {
    pub j: usize,
    pub q: i32,
    pub a: IntBox,
    pub b: IntBox,
    pub c: IntBox,
    pub a_star: IntBox,
    pub b_star: IntBox,
    pub c_star: IntBox,
}

impl BlockSet {
    pub fn named(&self) -> [(&'static str, IntBox); 6] {
        [
            ("A", self.a),
            ("A*", self.a_star),
            ("B", self.b),
            ("B*", self.b_star),
            ("C", self.c),
            ("C*", self.c_star),
        ]
    }

    /// Modes contributed to `U` by this block.
    pub fn mode_count(&self) -> u128 {
        2 * (self.a.count() + self.b.count() + self.c.count())
    }
}

fn interval(lo: f64, hi: f64) -> (i64, i64) {
    (lo.ceil() as i64, hi.floor() as i64)
}

/// Enumerates `A_j, B_j, C_j = A_j + B_j` and their negatives.
pub fn make_blocks(j: usize, p: &NseInitParams) -> Result<BlockSet> {
    let q = p.shell(j)?;
    let c = p.c;
    let l = lambda(q);
    let lm = lambda(q - 1);
    let (ax0, ax1) = interval((1.0 - c) * l, (1.0 + c) * l);
    let (ay0, ay1) = interval(-c * l, c * l);
    let a = IntBox { lo: [ax0, ay0, ay0], hi: [ax1, ay1, ay1] };
    let (bx0, bx1) = interval(-c * lm, c * lm);
    let (bz0, bz1) = interval((1.0 - c) * lm, (1.0 + c) * lm);
    let b = IntBox { lo: [bx0, bx0, bz0], hi: [bx1, bx1, bz1] };
    if a.is_empty() {
        return Err(Error::EmptyBlock(format!("A_{j} (q = {q}, c = {c})")));
    }
    if b.is_empty() {
        return Err(Error::EmptyBlock(format!("B_{j} (q = {q}, c = {c})")));
    }
    let cbox = a.minkowski(&b);
    Ok(BlockSet { j, q, a, b, c: cbox, a_star: a.neg(), b_star: b.neg(), c_star: cbox.neg() })
}

fn basis(i: usize) -> [f64; 3] {
    let mut v = [0.0; 3];
    v[i] = 1.0;
    v
}

fn lerayed(xi: [f64; 3], v: [f64; 3]) -> [f64; 3] {
    let n2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
    let f = (xi[0] * v[0] + xi[1] * v[1] + xi[2] * v[2]) / n2;
    [v[0] - f * xi[0], v[1] - f * xi[1], v[2] - f * xi[2]]
}

fn norm_sq(v: [f64; 3]) -> f64 {
    v[0] * v[0] + v[1] * v[1] + v[2] * v[2]
}

/// The 3D lattice-block datum with validated geometry.
#[derive(Clone, Debug)]
pub struct NseDatum {
    pub params: NseInitParams,
    pub blocks: Vec<BlockSet>,
    /// Largest number of modes a single materialized field may hold.
    pub mode_budget: u128,
}

pub const DEFAULT_MODE_BUDGET: u128 = 4_000_000;

impl NseDatum {
    pub fn new(params: NseInitParams) -> Result<Self> {
        params.validate()?;
        let blocks = (1..=params.num_blocks()).map(|j| make_blocks(j, &params)).collect::<Result<Vec<_>>>()?;
        let datum = Self { params, blocks, mode_budget: DEFAULT_MODE_BUDGET };
        datum.check_geometry()?;
        Ok(datum)
    }

    pub fn with_budget(mut self, budget: u128) -> Self {
        self.mode_budget = budget;
        self
    }

    fn check_geometry(&self) -> Result<()> {
        let all: Vec<(String, IntBox)> = self
            .blocks
            .iter()
            .flat_map(|b| b.named().into_iter().map(move |(n, bx)| (format!("{n}_{}", b.j), bx)))
            .collect();
        for (i, (n1, b1)) in all.iter().enumerate() {
            for (n2, b2) in &all[i + 1..] {
                if b1.intersects(b2) {
                    return Err(Error::BlockOverlap(format!("{n1} and {n2}")));
                }
            }
        }
        for b in &self.blocks {
            let (lo, hi) = (lambda(b.q - 1), lambda(b.q + 1));
            for (name, bx) in [("A", b.a), ("C", b.c)] {
                let (nlo, nhi) = bx.norm_range();
                if !(nlo > lo && nhi < hi) {
                    return Err(Error::InvalidParams(format!(
                        "{name}_{} leaves shell {}: |k| in [{nlo}, {nhi}]",
                        b.j, b.q
                    )));
                }
            }
            let (nlo, nhi) = b.b.norm_range();
            if !(nlo > lambda(b.q - 2) && nhi < lambda(b.q)) {
                return Err(Error::InvalidParams(format!("B_{} leaves shell {}", b.j, b.q - 1)));
            }
            // Leray directions must stay well away from degenerate
            for xi in [b.a.lo, b.a.hi, b.c.lo, b.c.hi] {
                let x = [xi[0] as f64, xi[1] as f64, xi[2] as f64];
                if norm_sq(lerayed(x, basis(1))) < 0.25 {
                    return Err(Error::InvalidParams(format!("degenerate e2 projection at block {}", b.j)));
                }
            }
            for xi in [b.b.lo, b.b.hi] {
                let x = [xi[0] as f64, xi[1] as f64, xi[2] as f64];
                if norm_sq(lerayed(x, basis(0))) < 0.25 {
                    return Err(Error::InvalidParams(format!("degenerate e1 projection at block {}", b.j)));
                }
            }
        }
        Ok(())
    }

    pub fn block(&self, j: usize) -> Result<&BlockSet> {
        self.params.shell(j)?;
        Ok(&self.blocks[j - 1])
    }

    pub fn high_prefactor(&self, j: usize) -> f64 {
        lambda(self.blocks[j - 1].q).powi(-2)
    }

    pub fn low_prefactor(&self, j: usize) -> f64 {
        match self.params.low_scale {
            LowBlockScale::Unit => 1.0,
            LowBlockScale::Matched => self.high_prefactor(j),
        }
    }

    fn guard(&self, name: String, points: u128) -> Result<()> {
        if points > self.mode_budget {
            Err(Error::InfeasibleBlock { name, points, budget: self.mode_budget })
        } else {
            Ok(())
        }
    }

    /// `U_{q_j}`: the upper-shell part of block `j`.
    pub fn high_part(&self, j: usize) -> Result<SpectralField> {
        let b = *self.block(j)?;
        self.guard(format!("U_{{q_{j}}}"), 2 * (b.a.count() + b.c.count()))?;
        let pre = self.high_prefactor(j);
        let mut u = SpectralField::zero(3)?;
        for k in b.a.points() {
            let v = leray_project_real(&k, basis(1));
            u.set_pair(k, cvec_real([pre * v[0], pre * v[1], pre * v[2]]));
        }
        let d = [-1.0, 1.0, 0.0];
        for k in b.c.points() {
            let v = leray_project_real(&k, d);
            let amp: CVec = [
                Complex64::new(0.0, pre * v[0]),
                Complex64::new(0.0, pre * v[1]),
                Complex64::new(0.0, pre * v[2]),
            ];
            // C* receives -i (e2(xi) - e1(xi)), the conjugate
            u.set_pair(k, amp);
        }
        Ok(u)
    }

    /// `U_{q_j - 1}`: the lower-shell part of block `j`.
    pub fn low_part(&self, j: usize) -> Result<SpectralField> {
        let b = *self.block(j)?;
        self.guard(format!("U_{{q_{j}-1}}"), 2 * b.b.count())?;
        let pre = self.low_prefactor(j);
        let mut u = SpectralField::zero(3)?;
        for k in b.b.points() {
            let v = leray_project_real(&k, basis(0));
            u.set_pair(k, cvec_real([pre * v[0], pre * v[1], pre * v[2]]));
        }
        Ok(u)
    }

    /// `U~_{q_j} = U_{q_j - 1} + U_{q_j}`.
    pub fn pair(&self, j: usize) -> Result<SpectralField> {
        let b = self.block(j)?;
        self.guard(format!("block {j}"), b.mode_count())?;
        self.high_part(j)?.add(&self.low_part(j)?)
    }

    /// Sum of blocks `first..=last` (empty range gives the zero field).
    pub fn blocks_range(&self, first: usize, last: usize) -> Result<SpectralField> {
        let total: u128 = (first..=last).filter(|&j| j >= 1 && j <= self.blocks.len()).map(|j| self.blocks[j - 1].mode_count()).sum();
        self.guard(format!("blocks {first}..={last}"), total)?;
        let mut u = SpectralField::zero(3)?;
        for j in first..=last {
            if j >= 1 && j <= self.blocks.len() {
                u = u.add(&self.pair(j)?)?;
            }
        }
        Ok(u)
    }

    /// The full datum `U`.
    pub fn field(&self) -> Result<SpectralField> {
        self.blocks_range(1, self.blocks.len())
    }

    /// `|U_{q_j}|_2^2` by Parseval, with large boxes summed by the Gregory rule.
    pub fn high_energy(&self, j: usize) -> Result<f64> {
        let b = *self.block(j)?;
        let pre = self.high_prefactor(j);
        let e2 = basis(1);
        let d = [-1.0, 1.0, 0.0];
        let sa = box_sum(b.a.ranges(), 0.5 * b.a.norm_range().0, |x| norm_sq(lerayed(x, e2)));
        let sc = box_sum(b.c.ranges(), 0.5 * b.c.norm_range().0, |x| norm_sq(lerayed(x, d)));
        Ok((2.0 * PI).powi(3) * pre * pre * 2.0 * (sa + sc))
    }

    /// `U_{q_j}(0)`; only the real A-blocks contribute at the origin.
    pub fn high_origin_value(&self, j: usize) -> Result<[f64; 3]> {
        let b = *self.block(j)?;
        let pre = self.high_prefactor(j);
        let scale = 0.5 * b.a.norm_range().0;
        let mut out = [0.0; 3];
        for (i, o) in out.iter_mut().enumerate() {
            *o = 2.0 * pre * box_sum(b.a.ranges(), scale, |x| lerayed(x, basis(1))[i]);
        }
        Ok(out)
    }

    /// `sum_k |U_hat_{q_j}(k)|`, an upper bound for the sup norm.
    pub fn high_abs_sum(&self, j: usize) -> Result<f64> {
        let b = *self.block(j)?;
        let pre = self.high_prefactor(j);
        let d = [-1.0, 1.0, 0.0];
        let sa = box_sum(b.a.ranges(), 0.5 * b.a.norm_range().0, |x| norm_sq(lerayed(x, basis(1))).sqrt());
        let sc = box_sum(b.c.ranges(), 0.5 * b.c.norm_range().0, |x| norm_sq(lerayed(x, d)).sqrt());
        Ok(2.0 * pre * (sa + sc))
    }

    /// `max |U_{q_j}|` over an `n x n` sample grid of the plane `x3 = 0`.
    /// Modes are streamed from the blocks, so no sparse field is built.
    pub fn high_plane_sup(&self, j: usize, n: usize) -> Result<f64> {
        let b = *self.block(j)?;
        let fft = FftNd::new(n, 2)?;
        let reach = [b.a, b.c].iter().map(|bx| bx.lo[0].abs().max(bx.hi[0].abs()).max(bx.lo[1].abs()).max(bx.hi[1].abs())).max().unwrap_or(0);
        let required = 2 * (1 + reach) as usize;
        if n < required {
            return Err(Error::ResolutionTooSmall { n, required });
        }
        let pre = self.high_prefactor(j);
        let mut comps = vec![vec![Complex64::default(); fft.len()]; 3];
        let d = [-1.0, 1.0, 0.0];
        let mut put = |k: &Wavevector, a: [Complex64; 3]| {
            let idx = fft.flat_index(&[k.0[0], k.0[1], 0]);
            for c in 0..3 {
                comps[c][idx] += a[c];
            }
        };
        for k in b.a.points() {
            let v = lerayed(k.as_f64(), basis(1));
            let a = v.map(|x| Complex64::new(pre * x, 0.0));
            put(&k, a);
            put(&k.neg(), a);
        }
        for k in b.c.points() {
            let v = lerayed(k.as_f64(), d);
            let a = v.map(|x| Complex64::new(0.0, pre * x));
            put(&k, a);
            put(&k.neg(), a.map(|z| z.conj()));
        }
        let mut sup_sq = vec![0.0; fft.len()];
        for comp in comps.iter_mut() {
            fft.inverse(comp);
            for (s, z) in sup_sq.iter_mut().zip(comp.iter()) {
                *s += z.re * z.re;
            }
        }
        Ok(sup_sq.into_iter().fold(0.0, f64::max).sqrt())
    }

    /// `|U_{q_j - 1}|_2^2` by Parseval.
    pub fn low_energy(&self, j: usize) -> Result<f64> {
        let b = *self.block(j)?;
        let pre = self.low_prefactor(j);
        let sb = box_sum(b.b.ranges(), 0.5 * b.b.norm_range().0, |x| norm_sq(lerayed(x, basis(0))));
        Ok((2.0 * PI).powi(3) * pre * pre * 2.0 * sb)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{divergence_residual, l2_norm_exact};

    #[test]
    fn euler_datum_modes() {
        let u = euler_u0(&EulerInitParams::new(1.0, 1).unwrap());
        assert_eq!(u.len(), 6);
        let amp = |k: Wavevector| u.amplitude(&k).map(|c| c.re);
        assert_eq!(amp(Wavevector::new2(0, 1))[..2], [0.5, 0.0]);
        assert_eq!(amp(Wavevector::new2(0, -1))[..2], [0.5, 0.0]);
        assert_eq!(amp(Wavevector::new2(1, 0))[..2], [0.0, 0.5]);
        assert_eq!(amp(Wavevector::new2(-2, 0))[..2], [0.0, 0.25]);
        assert_eq!(divergence_residual(&u), 0.0);
        let big = euler_u0(&EulerInitParams::new(1.0, 6).unwrap());
        assert_eq!(big.len(), 16);
    }

    #[test]
    fn euler_truncation_only_adds_top_shell() {
        let p = EulerInitParams::new(0.7, 4).unwrap();
        let a = euler_u0(&p);
        let b = euler_u0(&EulerInitParams { q_max: 5, ..p });
        let diff = b.sub(&a).unwrap();
        assert!(diff.wavevectors().all(|k| k.0[0].abs() == 32));
        for (k, v) in a.iter() {
            assert_eq!(b.amplitude(k), *v);
        }
    }

    #[test]
    fn euler_params_validation() {
        assert!(EulerInitParams::new(1.0, 0).is_err());
        assert!(EulerInitParams::new(-1.0, 3).is_err());
        let p = EulerInitParams::new(0.5, 3).unwrap();
        assert!(p.admissible_for(3.0));
        assert!(!p.admissible_for(1.0));
        assert!(p.admissible_for(2.0));
    }

    #[test]
    fn block_a_count_example() {
        let p = NseInitParams::new(0.25, 1.0, vec![3]).unwrap();
        let b = make_blocks(1, &p).unwrap();
        assert_eq!(b.a, IntBox { lo: [6, -2, -2], hi: [10, 2, 2] });
        assert_eq!(b.a.count(), 125);
        assert_eq!(b.a_star.count(), 125);
        assert!(b.a.points().all(|k| b.a_star.contains(&k.neg())));
        for k in b.a.points().chain(b.c.points()) {
            assert!(k.norm() > 4.0 && k.norm() < 16.0);
        }
    }

    #[test]
    fn minkowski_matches_pointwise_sums() {
        let p = NseInitParams::new(0.25, 1.0, vec![3]).unwrap();
        let b = make_blocks(1, &p).unwrap();
        let mut sums: Vec<Wavevector> = b.a.points().flat_map(|x| b.b.points().map(move |y| x.add(y))).collect();
        sums.sort();
        sums.dedup();
        let boxed: Vec<Wavevector> = b.c.points().collect();
        assert_eq!(sums, boxed);
    }

    #[test]
    fn gap_reports() {
        let base = |shells: Vec<i32>| NseInitParams { c: 0.2, epsilon: 0.5, shells, low_scale: LowBlockScale::Matched };
        let r = validate_gaps(&base(vec![3, 7]));
        assert_eq!(r.pairs[0].ratio, 0.5);
        assert!(!r.pass);
        let r = validate_gaps(&base(vec![3, 8]));
        assert_eq!(r.pairs[0].ratio, 0.25);
        assert!(r.pass);
        assert!(validate_gaps(&base(vec![3])).pass);
        assert!(NseInitParams::new(0.2, 0.5, vec![3, 7]).is_err());
        assert!(NseInitParams::new(0.2, 0.51, vec![3, 7]).is_ok());
        assert!(NseInitParams::new(0.0, 0.5, vec![3]).is_err());
        assert!(NseInitParams::new(0.2, 0.5, vec![]).is_err());
    }

    #[test]
    fn tiny_c_keeps_block_centers() {
        // the centers (2^q, 0, 0) and (0, 0, 2^{q-1}) are lattice points
        let p = NseInitParams::new(0.01, 1.0, vec![2]).unwrap();
        let b = make_blocks(1, &p).unwrap();
        assert_eq!(b.a.count(), 1);
        assert_eq!(b.b.count(), 1);
        assert_eq!(b.c, IntBox { lo: [4, 0, 2], hi: [4, 0, 2] });
        assert!(matches!(make_blocks(2, &p), Err(Error::OutOfRange(_))));
        assert!(matches!(make_blocks(0, &p), Err(Error::OutOfRange(_))));
    }

    fn small_datum() -> NseDatum {
        NseDatum::new(NseInitParams::new(0.2, 0.51, vec![3, 7]).unwrap()).unwrap()
    }

    #[test]
    fn nse_datum_is_real_and_solenoidal() {
        let d = small_datum();
        let u = d.field().unwrap();
        u.check_reality(0.0).unwrap();
        assert!(divergence_residual(&u) <= 1e-12 * u.max_amplitude());
        let expect: u128 = d.blocks.iter().map(|b| b.mode_count()).sum();
        assert_eq!(u.len() as u128, expect);
    }

    #[test]
    fn nse_parseval_matches_enumeration() {
        let d = small_datum();
        for j in 1..=2 {
            let hi = l2_norm_exact(&d.high_part(j).unwrap()).powi(2);
            let lo = l2_norm_exact(&d.low_part(j).unwrap()).powi(2);
            assert!((d.high_energy(j).unwrap() - hi).abs() <= 1e-12 * hi);
            assert!((d.low_energy(j).unwrap() - lo).abs() <= 1e-12 * lo);
        }
        let total = l2_norm_exact(&d.field().unwrap()).powi(2);
        let parts: f64 = (1..=2).map(|j| d.high_energy(j).unwrap() + d.low_energy(j).unwrap()).sum();
        assert!((total - parts).abs() <= 1e-12 * total);
    }

    #[test]
    fn budget_refuses_huge_blocks() {
        let d = NseDatum::new(NseInitParams::new(0.2, 0.51, vec![3, 8, 17]).unwrap()).unwrap();
        assert!(matches!(d.high_part(3), Err(Error::InfeasibleBlock { .. })));
        // Parseval still available
        assert!(d.high_energy(3).unwrap().is_finite());
    }

    #[test]
    fn sup_helpers_match_enumeration() {
        let d = small_datum();
        for j in 1..=d.blocks.len() {
            let u = d.high_part(j).unwrap();
            let at0 = crate::spectral::evaluate(&u, [0.0; 3]);
            let fast = d.high_origin_value(j).unwrap();
            for i in 0..3 {
                assert!((at0[i] - fast[i]).abs() <= 1e-12 * fast[1].abs());
            }
            let abs: f64 = u.iter().map(|(_, a)| crate::spectral::cvec_norm_sq(a).sqrt()).sum();
            assert!((abs - d.high_abs_sum(j).unwrap()).abs() <= 1e-12 * abs);
            let n = 4 * crate::spectral::min_resolution(u.max_abs_k());
            let plane = d.high_plane_sup(j, n).unwrap();
            let sliced = crate::spectral::slice_sup(&u, n, &[0.0]).unwrap();
            assert!((plane - sliced).abs() <= 1e-12 * sliced);
            let o = (fast[0] * fast[0] + fast[1] * fast[1] + fast[2] * fast[2]).sqrt();
            assert!(o <= plane * (1.0 + 1e-12) && plane <= abs * (1.0 + 1e-12));
        }
    }
}
