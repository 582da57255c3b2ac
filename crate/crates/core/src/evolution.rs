//! Dealiased pseudo-spectral integration of the Galerkin-truncated Euler and
//! Navier-Stokes systems on the periodic box, with the diagnostics used by the
//! cascade experiments.
//!
//! The solver advances the truncated system, not a weak solution: every
//! retained mode satisfies `du/dt = -P(u . grad u) - nu |k|^2 u` with the
//! quadratic term computed exactly inside the 2/3-rule band.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constructions::NseDatum;
use crate::error::{Error, Result};
use crate::fft::FftNd;
use crate::littlewood_paley::{besov_norm, phi_q_radius, window_symbol, BesovParams, ResolutionPolicy};
use crate::spectral::{leray_project, volume, SpectralField, Wavevector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Euler,
    Nse,
}

impl Model {
    pub fn as_str(&self) -> &'static str {
        match self {
            Model::Euler => "euler",
            Model::Nse => "nse",
        }
    }
}

impl std::str::FromStr for Model {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euler" => Ok(Model::Euler),
            "nse" => Ok(Model::Nse),
            other => Err(Error::InvalidParams(format!("unknown model '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub model: Model,
    /// Kinematic viscosity.
    pub nu: f64,
    /// Grid points per dimension.
    pub n: usize,
    pub dt: f64,
    /// Final time.
    pub t_final: f64,
    /// Retained fraction of the Nyquist range; modes with `|k_i| > dealias N / 2` are zeroed.
    pub dealias: f64,
    pub probes: Vec<Wavevector>,
    pub shell_probes: Vec<i32>,
    /// Steps between diagnostic samples.
    pub record_every: usize,
    /// `(s, r)` pairs for `|u(t) - u(0)|` in `B^s_{r,inf}`.
    pub besov: Vec<(f64, f64)>,
    /// Test hook: `false` drops the quadratic term.
    pub nonlinear: bool,
}

impl SolverConfig {
    pub fn euler(n: usize, dt: f64, t_final: f64) -> Self {
        Self::base(Model::Euler, 0.0, n, dt, t_final)
    }

    pub fn nse(nu: f64, n: usize, dt: f64, t_final: f64) -> Self {
        Self::base(Model::Nse, nu, n, dt, t_final)
    }

    fn base(model: Model, nu: f64, n: usize, dt: f64, t_final: f64) -> Self {
        Self {
            model,
            nu,
            n,
            dt,
            t_final,
            dealias: 2.0 / 3.0,
            probes: Vec::new(),
            shell_probes: Vec::new(),
            record_every: 1,
            besov: Vec::new(),
            nonlinear: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return bad(format!("T must be nonnegative, got {}", self.t_final));
        }
        if !self.n.is_power_of_two() || self.n < 4 {
            return Err(Error::NotPowerOfTwo(self.n));
        }
        if !(self.dealias > 0.0 && self.dealias <= 2.0 / 3.0 + 1e-12) {
            return bad(format!("dealias must lie in (0, 2/3], got {}", self.dealias));
        }
        match self.model {
            Model::Euler if self.nu != 0.0 => return bad(format!("euler requires nu = 0, got {}", self.nu)),
            Model::Nse if !(self.nu > 0.0 && self.nu.is_finite()) => {
                return bad(format!("nse requires nu > 0, got {}", self.nu))
            }
            _ => {}
        }
        if self.record_every == 0 {
            return bad("record_every must be at least 1".into());
        }
        for &q in &self.shell_probes {
            if q < 0 {
                return Err(Error::InvalidShell(q));
            }
        }
        for &(s, r) in &self.besov {
            BesovParams::new(s, r, f64::INFINITY)?;
        }
        Ok(())
    }

    /// Largest retained `|k_i|`.
    pub fn band(&self) -> i64 {
        (self.dealias * self.n as f64 / 2.0 + 1e-9).floor() as i64
    }

    /// Number of steps; the last one is shortened if `T` is not a multiple of `dt`.
    pub fn num_steps(&self) -> usize {
        (self.t_final / self.dt - 1e-9).ceil().max(0.0) as usize
    }

    /// Advisory `0.2 / (N max|u|)`.
    pub fn cfl_dt(&self, u: &SpectralField) -> f64 {
        let umax: f64 = u.iter().map(|(_, a)| a.iter().map(|c| c.norm()).sum::<f64>()).sum();
        0.2 / (self.n as f64 * umax.max(f64::MIN_POSITIVE))
    }
}

/// Spectral coefficients on the full grid lattice, one array per component.
#[derive(Clone, Debug, PartialEq)]
pub struct State {
    comps: Vec<Vec<Complex64>>,
}

impl State {
    pub fn comps(&self) -> &[Vec<Complex64>] {
        &self.comps
    }

    fn axpy(&self, a: f64, other: &State) -> State {
        let comps = self
            .comps
            .iter()
            .zip(&other.comps)
            .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p + q * a).collect())
            .collect();
        State { comps }
    }
}

/// Owns the transforms and lattice tables for one configuration and dimension.
#[derive(Debug)]
pub struct Solver {
    cfg: SolverConfig,
    dim: usize,
    fft: FftNd,
    kvec: Vec<[i64; 3]>,
    in_band: Vec<bool>,
}

impl Solver {
    pub fn new(cfg: SolverConfig, dim: usize) -> Result<Self> {
        cfg.validate()?;
        let fft = FftNd::new(cfg.n, dim)?;
        let kvec: Vec<[i64; 3]> = (0..fft.len()).map(|i| fft.wavevector_at(i)).collect();
        let band = cfg.band();
        let in_band = kvec.iter().map(|k| k.iter().all(|c| c.abs() <= band)).collect();
        Ok(Self { cfg, dim, fft, kvec, in_band })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn zero_state(&self) -> State {
        State { comps: vec![vec![Complex64::default(); self.fft.len()]; self.dim] }
    }

    /// Places a sparse field on the lattice, refusing modes outside the band.
    pub fn state_from_field(&self, u: &SpectralField) -> Result<State> {
        if u.dim() != self.dim {
            return Err(Error::DimensionMismatch { left: u.dim(), right: self.dim });
        }
        let band = self.cfg.band();
        let offending: Vec<Wavevector> = u.wavevectors().filter(|k| k.max_abs() > band).copied().collect();
        if !offending.is_empty() {
            return Err(Error::DealiasBand(offending));
        }
        let mut st = self.zero_state();
        for (k, a) in u.iter() {
            let idx = self.fft.flat_index(&k.0);
            for (c, comp) in st.comps.iter_mut().enumerate() {
                comp[idx] = a[c];
            }
        }
        Ok(st)
    }

    /// Sparse view of the retained modes (exact zeros dropped).
    pub fn field_from_state(&self, st: &State) -> SpectralField {
        let mut out = SpectralField::zero(self.dim).expect("validated dimension");
        for (idx, k) in self.kvec.iter().enumerate() {
            if !self.in_band[idx] {
                continue;
            }
            let mut a = [Complex64::default(); 3];
            for (c, comp) in st.comps.iter().enumerate() {
                a[c] = comp[idx];
            }
            if a.iter().any(|z| *z != Complex64::default()) {
                out.set(Wavevector(*k), a);
            }
        }
        out
    }

    pub fn mode(&self, st: &State, k: &Wavevector) -> Result<[Complex64; 3]> {
        if k.max_abs() > self.cfg.band() {
            return Err(Error::DealiasBand(vec![*k]));
        }
        let idx = self.fft.flat_index(&k.0);
        let mut a = [Complex64::default(); 3];
        for (c, comp) in st.comps.iter().enumerate() {
            a[c] = comp[idx];
        }
        Ok(a)
    }

    /// `(u . grad u)^` restricted to the band, computed as `div(u (x) u)`.
    pub fn advection(&self, st: &State) -> Vec<Vec<Complex64>> {
        let d = self.dim;
        let len = self.fft.len();
        let scale = 1.0 / len as f64;
        let phys: Vec<Vec<f64>> = st
            .comps
            .iter()
            .map(|c| {
                let mut buf = c.clone();
                self.fft.inverse(&mut buf);
                buf.into_iter().map(|z| z.re).collect()
            })
            .collect();
        let mut out = vec![vec![Complex64::default(); len]; d];
        let mut buf = vec![Complex64::default(); len];
        for i in 0..d {
            for j in i..d {
                for (b, (x, y)) in buf.iter_mut().zip(phys[i].iter().zip(&phys[j])) {
                    *b = Complex64::new(x * y * scale, 0.0);
                }
                self.fft.forward(&mut buf);
                // out_i += i k_j (u_i u_j)^, out_j += i k_i (u_i u_j)^
                for idx in 0..len {
                    if !self.in_band[idx] {
                        continue;
                    }
                    let k = &self.kvec[idx];
                    let p = buf[idx] * Complex64::i();
                    out[i][idx] += p * k[j] as f64;
                    if j != i {
                        out[j][idx] += p * k[i] as f64;
                    }
                }
            }
        }
        out
    }

    pub fn rhs(&self, st: &State) -> State {
        let mut out = self.zero_state();
        let adv = if self.cfg.nonlinear { Some(self.advection(st)) } else { None };
        let nu = self.cfg.nu;
        for idx in 0..self.fft.len() {
            if !self.in_band[idx] {
                continue;
            }
            let k = Wavevector(self.kvec[idx]);
            let k2 = k.norm_sq();
            let mut v = [Complex64::default(); 3];
            if let Some(adv) = &adv {
                for c in 0..self.dim {
                    v[c] = -adv[c][idx];
                }
                v = leray_project(&k, &v);
            }
            for c in 0..self.dim {
                out.comps[c][idx] = v[c] - st.comps[c][idx] * (nu * k2);
            }
        }
        out
    }

    pub fn step_rk4(&self, st: &State, dt: f64) -> State {
        let k1 = self.rhs(st);
        let k2 = self.rhs(&st.axpy(0.5 * dt, &k1));
        let k3 = self.rhs(&st.axpy(0.5 * dt, &k2));
        let k4 = self.rhs(&st.axpy(dt, &k3));
        let mut out = st.clone();
        for c in 0..self.dim {
            for idx in 0..self.fft.len() {
                out.comps[c][idx] +=
                    (k1.comps[c][idx] + (k2.comps[c][idx] + k3.comps[c][idx]) * 2.0 + k4.comps[c][idx]) * (dt / 6.0);
            }
        }
        out
    }

    fn weighted_sum(&self, st: &State, w: impl Fn(&[i64; 3]) -> f64) -> f64 {
        let mut s = Compensated::default();
        for (idx, k) in self.kvec.iter().enumerate() {
            let m: f64 = st.comps.iter().map(|c| c[idx].norm_sqr()).sum();
            if m != 0.0 {
                s.add(w(k) * m);
            }
        }
        volume(self.dim) * s.value()
    }

    /// `|u|_2^2`
    pub fn energy(&self, st: &State) -> f64 {
        self.weighted_sum(st, |_| 1.0)
    }

    /// `|grad u|_2^2`
    pub fn enstrophy(&self, st: &State) -> f64 {
        self.weighted_sum(st, |k| norm_sq(k))
    }

    /// `|u~_q|_2^2` with the window symbol.
    pub fn shell_energy(&self, st: &State, q: i32) -> f64 {
        self.weighted_sum(st, |k| window_symbol(norm_sq(k).sqrt(), q).powi(2))
    }

    /// `int u~_q . u_q`, which equals `int phi_q |u|^2`.
    pub fn shell_pairing(&self, st: &State, q: i32) -> f64 {
        self.weighted_sum(st, |k| phi_q_radius(norm_sq(k).sqrt(), q))
    }

    /// `int grad u~_q : grad u_q`
    pub fn shell_gradient_pairing(&self, st: &State, q: i32) -> f64 {
        self.weighted_sum(st, |k| {
            let k2 = norm_sq(k);
            k2 * phi_q_radius(k2.sqrt(), q)
        })
    }

    /// `<u, u, u_q> = -int (u . grad u) . u_q` from a precomputed advection term.
    pub fn shell_transfer(&self, st: &State, adv: &[Vec<Complex64>], q: i32) -> f64 {
        let mut s = Compensated::default();
        for (idx, k) in self.kvec.iter().enumerate() {
            if !self.in_band[idx] {
                continue;
            }
            let w = phi_q_radius(norm_sq(k).sqrt(), q);
            if w == 0.0 {
                continue;
            }
            for c in 0..self.dim {
                s.add(w * (st.comps[c][idx].conj() * adv[c][idx]).re);
            }
        }
        -volume(self.dim) * s.value()
    }

    /// Largest `|k . u_hat(k)|`, relative to the largest amplitude.
    pub fn divergence_residual(&self, st: &State) -> f64 {
        let mut worst: f64 = 0.0;
        let mut amp: f64 = 0.0;
        for (idx, k) in self.kvec.iter().enumerate() {
            let mut d = Complex64::default();
            for c in 0..self.dim {
                d += st.comps[c][idx] * k[c] as f64;
                amp = amp.max(st.comps[c][idx].norm());
            }
            worst = worst.max(d.norm());
        }
        if amp == 0.0 {
            0.0
        } else {
            worst / amp
        }
    }

    /// Largest `|u_hat(-k) - conj(u_hat(k))|`, relative to the largest amplitude.
    pub fn reality_residual(&self, st: &State) -> f64 {
        let mut worst: f64 = 0.0;
        let mut amp: f64 = 0.0;
        for (idx, k) in self.kvec.iter().enumerate() {
            let neg = self.fft.flat_index(&[-k[0], -k[1], -k[2]]);
            for c in 0..self.dim {
                amp = amp.max(st.comps[c][idx].norm());
                worst = worst.max((st.comps[c][neg] - st.comps[c][idx].conj()).norm());
            }
        }
        if amp == 0.0 {
            0.0
        } else {
            worst / amp
        }
    }
}

/// Neumaier summation; the shell diagnostics are differenced in time, so
/// rounding in million-term sums must stay at the level of one ulp.
#[derive(Default)]
struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

fn norm_sq(k: &[i64; 3]) -> f64 {
    k.iter().map(|&c| (c * c) as f64).sum()
}

/// Per-shell flux terms at one sample.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShellSample {
    pub q: i32,
    /// `|u~_q|_2^2`
    pub energy: f64,
    /// `int u~_q . u_q`
    pub pairing: f64,
    /// `nu int grad u~_q : grad u_q`
    pub viscous: f64,
    /// `<u, u, u_q>`
    pub transfer: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiagnosticsSeries {
    pub config: SolverConfig,
    pub dim: usize,
    pub times: Vec<f64>,
    /// `mode_values[i][p]` is `u_hat(probes[p], times[i])`.
    pub mode_values: Vec<Vec<[Complex64; 3]>>,
    /// `shells[i][p]` belongs to `shell_probes[p]`.
    pub shells: Vec<Vec<ShellSample>>,
    pub energy: Vec<f64>,
    /// `int_0^t |grad u|_2^2 ds`, trapezoid rule over every step.
    pub dissipation_integral: Vec<f64>,
    /// `besov_distance[i][m]` for `config.besov[m]`.
    pub besov_distance: Vec<Vec<f64>>,
    /// Largest divergence and reality residuals seen at samples.
    pub max_divergence_residual: f64,
    pub max_reality_residual: f64,
}

impl DiagnosticsSeries {
    pub fn shell_energies(&self, p: usize) -> Vec<f64> {
        self.shells.iter().map(|row| row[p].energy).collect()
    }

    /// `|energy(t) + 2 nu E(t) - energy(0)| / energy(0)`, worst over samples.
    pub fn energy_defect(&self) -> f64 {
        let e0 = self.energy[0];
        self.energy
            .iter()
            .zip(&self.dissipation_integral)
            .map(|(e, d)| (e + 2.0 * self.config.nu * d - e0).abs())
            .fold(0.0, f64::max)
            / e0.max(f64::MIN_POSITIVE)
    }
}

fn besov_distance_internal(
    solver: &Solver,
    st: &State,
    reference: &SpectralField,
    metrics: &[(f64, f64)],
    policy: &ResolutionPolicy,
) -> Result<Vec<f64>> {
    if metrics.is_empty() {
        return Ok(Vec::new());
    }
    let cur = solver.field_from_state(st);
    metrics.iter().map(|&(s, r)| besov_distance(&cur, reference, s, r, policy)).collect()
}

/// `|state - reference|` in `B^s_{r,inf}`.
pub fn besov_distance(
    state: &SpectralField,
    reference: &SpectralField,
    s: f64,
    r: f64,
    policy: &ResolutionPolicy,
) -> Result<f64> {
    let p = BesovParams::new(s, r, f64::INFINITY)?;
    let diff = state.sub(reference)?;
    if diff.is_empty() {
        return Ok(0.0);
    }
    besov_norm(&diff, &p, policy)
}

fn sample(
    solver: &Solver,
    st: &State,
    t: f64,
    u_init: &SpectralField,
    policy: &ResolutionPolicy,
    series: &mut DiagnosticsSeries,
) -> Result<()> {
    let cfg = solver.config();
    series.times.push(t);
    series.energy.push(solver.energy(st));
    let modes = cfg.probes.iter().map(|k| solver.mode(st, k)).collect::<Result<Vec<_>>>()?;
    series.mode_values.push(modes);
    if !cfg.shell_probes.is_empty() {
        let adv = solver.advection(st);
        let row = cfg
            .shell_probes
            .iter()
            .map(|&q| ShellSample {
                q,
                energy: solver.shell_energy(st, q),
                pairing: solver.shell_pairing(st, q),
                viscous: cfg.nu * solver.shell_gradient_pairing(st, q),
                transfer: solver.shell_transfer(st, &adv, q),
            })
            .collect();
        series.shells.push(row);
    }
    series.besov_distance.push(besov_distance_internal(solver, st, u_init, &cfg.besov, policy)?);
    series.max_divergence_residual = series.max_divergence_residual.max(solver.divergence_residual(st));
    series.max_reality_residual = series.max_reality_residual.max(solver.reality_residual(st));
    Ok(())
}

/// Integrates from `u_init` to `T` and samples diagnostics every
/// `record_every` steps and at the final time.
pub fn run(u_init: &SpectralField, cfg: &SolverConfig) -> Result<DiagnosticsSeries> {
    let solver = Solver::new(cfg.clone(), u_init.dim())?;
    for k in &cfg.probes {
        if k.max_abs() > cfg.band() {
            return Err(Error::InvalidParams(format!("probe {:?} lies outside the retained band", k.0)));
        }
    }
    let mut st = solver.state_from_field(u_init)?;
    let policy = ResolutionPolicy::default();
    let mut series = DiagnosticsSeries {
        config: cfg.clone(),
        dim: u_init.dim(),
        times: Vec::new(),
        mode_values: Vec::new(),
        shells: Vec::new(),
        energy: Vec::new(),
        dissipation_integral: Vec::new(),
        besov_distance: Vec::new(),
        max_divergence_residual: 0.0,
        max_reality_residual: 0.0,
    };
    sample(&solver, &st, 0.0, u_init, &policy, &mut series)?;
    series.dissipation_integral.push(0.0);
    let steps = cfg.num_steps();
    let mut t = 0.0;
    let mut diss = 0.0;
    let mut ens = solver.enstrophy(&st);
    for step in 1..=steps {
        let h = if step == steps { cfg.t_final - t } else { cfg.dt };
        st = solver.step_rk4(&st, h);
        t = if step == steps { cfg.t_final } else { step as f64 * cfg.dt };
        let e = solver.enstrophy(&st);
        if !e.is_finite() {
            return Err(Error::Numerical { step, time: t, what: "non-finite enstrophy".into() });
        }
        diss += 0.5 * h * (ens + e);
        ens = e;
        if step % cfg.record_every == 0 || step == steps {
            sample(&solver, &st, t, u_init, &policy, &mut series)?;
            series.dissipation_integral.push(diss);
            if !series.energy.last().copied().unwrap_or(0.0).is_finite() {
                return Err(Error::Numerical { step, time: t, what: "non-finite energy".into() });
            }
        }
    }
    Ok(series)
}

/// `U` restricted to the block pairs that fit the band of `cfg`; returns the
/// field and the kept block indices.
pub fn nse_initial_field(datum: &NseDatum, cfg: &SolverConfig) -> Result<(SpectralField, Vec<usize>)> {
    let band = cfg.band();
    let mut out = SpectralField::zero(3)?;
    let mut kept = Vec::new();
    for (i, b) in datum.blocks.iter().enumerate() {
        let fits = [b.a, b.b, b.c, b.a_star, b.b_star, b.c_star]
            .iter()
            .all(|bx| bx.lo.iter().chain(bx.hi.iter()).all(|c| c.abs() <= band));
        if fits {
            out = out.add(&datum.pair(i + 1)?)?;
            kept.push(i + 1);
        }
    }
    if kept.is_empty() {
        return Err(Error::InvalidParams(format!("no block pair fits the band |k_i| <= {band}")));
    }
    Ok((out, kept))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BalanceReport {
    pub q: i32,
    /// Interior sample times.
    pub times: Vec<f64>,
    /// `(1/2) d/dt int u~_q . u_q + nu int grad u~_q : grad u_q - <u, u, u_q>`
    pub residual: Vec<f64>,
    pub max_abs: f64,
    /// Largest magnitude among the three terms.
    pub scale: f64,
}

/// Residual of the shell energy identity along a recorded run; the time
/// derivative is a three-point centered difference.
pub fn shell_energy_balance(series: &DiagnosticsSeries, q: i32) -> Result<BalanceReport> {
    let p = series
        .config
        .shell_probes
        .iter()
        .position(|&x| x == q)
        .ok_or_else(|| Error::ProbeNotRecorded(format!("shell {q}")))?;
    if series.shells.len() < 3 {
        return Err(Error::ProbeNotRecorded(format!("shell {q}: fewer than three samples")));
    }
    let t = &series.times;
    let mut times = Vec::new();
    let mut residual = Vec::new();
    let mut scale: f64 = 0.0;
    for i in 1..t.len() - 1 {
        let (hm, hp) = (t[i] - t[i - 1], t[i + 1] - t[i]);
        let (fm, f0, fp) = (series.shells[i - 1][p].pairing, series.shells[i][p].pairing, series.shells[i + 1][p].pairing);
        let deriv = (hm * hm * fp - hp * hp * fm + (hp * hp - hm * hm) * f0) / (hm * hp * (hm + hp));
        let s = &series.shells[i][p];
        let r = 0.5 * deriv + s.viscous - s.transfer;
        scale = scale.max((0.5 * deriv).abs()).max(s.viscous.abs()).max(s.transfer.abs());
        times.push(t[i]);
        residual.push(r);
    }
    let max_abs = residual.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    Ok(BalanceReport { q, times, residual, max_abs, scale })
}
