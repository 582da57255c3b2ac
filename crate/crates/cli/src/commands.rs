use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use lpcascade::cascade::{bony_split, probe, transfer_coefficient, triad_energy_terms};
use lpcascade::constructions::{euler_u0, validate_gaps, EulerInitParams, LowBlockScale, NseDatum, NseInitParams};
use lpcascade::evolution::{nse_initial_field, run, DiagnosticsSeries, Model, SolverConfig};
use lpcascade::littlewood_paley::{besov_shell_norms, combine, BesovParams, ResolutionPolicy};
use lpcascade::spectral::trilinear;
use lpcascade::SpectralField;
use serde::Serialize;

use crate::config::{ConfigError, KvConfig};

/// Failure classes mapped to exit codes 2 and 3.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Runtime(m) => write!(f, "runtime error: {m}"),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.0)
    }
}

impl From<lpcascade::Error> for CliError {
    fn from(e: lpcascade::Error) -> Self {
        use lpcascade::Error as E;
        match e {
            E::Numerical { .. } | E::InfeasibleShell { .. } | E::InfeasibleBlock { .. } | E::Json(_) => {
                CliError::Runtime(e.to_string())
            }
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub enum Datum {
    Euler(EulerInitParams),
    Nse(NseDatum),
}

impl Datum {
    fn kind(&self) -> &'static str {
        match self {
            Datum::Euler(_) => "euler",
            Datum::Nse(_) => "nse",
        }
    }
}

pub fn read_datum(cfg: &KvConfig) -> CliResult<Datum> {
    match cfg.str_req("kind")?.as_str() {
        "euler" => Ok(Datum::Euler(EulerInitParams::new(cfg.req("s")?, cfg.req("Q")?)?)),
        "nse" => {
            let low = match cfg.str_opt("low_scale").as_deref() {
                None | Some("matched") => LowBlockScale::Matched,
                Some("unit") => LowBlockScale::Unit,
                Some(o) => return Err(CliError::Config(format!("low_scale must be matched or unit, got '{o}'"))),
            };
            let shells: Vec<i32> = cfg.list("shells")?;
            if shells.is_empty() {
                return Err(CliError::Config("missing required key 'shells'".into()));
            }
            let p = NseInitParams::new(cfg.req("c")?, cfg.req("eps")?, shells)?.with_low_scale(low);
            let mut d = NseDatum::new(p)?;
            if let Some(b) = cfg.opt::<u128>("mode_budget")? {
                d = d.with_budget(b);
            }
            Ok(Datum::Nse(d))
        }
        other => Err(CliError::Config(format!("kind must be euler or nse, got '{other}'"))),
    }
}

fn field_of(cfg: &KvConfig, datum: Option<&Datum>) -> CliResult<SpectralField> {
    if let Some(path) = cfg.str_opt("field") {
        let text = fs::read_to_string(&path).map_err(|e| CliError::Config(format!("field '{path}': {e}")))?;
        return Ok(SpectralField::from_json(&text).map_err(|e| CliError::Config(format!("field '{path}': {e}")))?);
    }
    match datum {
        Some(Datum::Euler(p)) => Ok(euler_u0(p)),
        Some(Datum::Nse(d)) => Ok(d.field()?),
        None => Err(CliError::Config("need either 'field' or a construction ('kind')".into())),
    }
}

pub struct Output {
    dir: PathBuf,
}

impl Output {
    pub fn create(dir: &Path) -> CliResult<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf() })
    }

    fn csv(&self, name: &str, header: &[String], rows: &[Vec<String>]) -> CliResult<()> {
        let mut w = csv::Writer::from_path(self.dir.join(name))?;
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }

    fn json<T: Serialize>(&self, name: &str, value: &T) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        fs::write(self.dir.join(name), text)?;
        Ok(())
    }

    fn text(&self, name: &str, text: &str) -> CliResult<()> {
        fs::write(self.dir.join(name), text)?;
        Ok(())
    }

    /// `manifest.json` plus a `config.txt` that re-runs the command.
    fn manifest<T: Serialize>(&self, command: &str, cfg: &KvConfig, extra: T) -> CliResult<()> {
        #[derive(Serialize)]
        struct Manifest<'a, T> {
            tool: &'a str,
            version: &'a str,
            command: &'a str,
            config: BTreeMap<String, String>,
            details: T,
        }
        let config = cfg.resolved();
        self.json(
            "manifest.json",
            &Manifest { tool: "lpcascade", version: env!("CARGO_PKG_VERSION"), command, config: config.clone(), details: extra },
        )?;
        let mut text = format!("# lpcascade {command}\n");
        for (k, v) in &config {
            text.push_str(&format!("{k} = {v}\n"));
        }
        self.text("config.txt", &text)
    }
}

fn num(x: f64) -> String {
    format!("{x}")
}

pub fn construct(cfg: &KvConfig, out: &Path) -> CliResult<()> {
    let datum = read_datum(cfg)?;
    cfg.finish()?;
    let o = Output::create(out)?;
    #[derive(Serialize)]
    struct Report {
        kind: &'static str,
        stored_modes: Option<usize>,
        field_written: bool,
        note: Option<String>,
        gaps: Option<lpcascade::constructions::GapReport>,
    }
    match &datum {
        Datum::Euler(p) => {
            let u = euler_u0(p);
            o.text("field.json", &u.to_json()?)?;
            let rep = Report { kind: "euler", stored_modes: Some(u.len()), field_written: true, note: None, gaps: None };
            o.json("construction.json", &rep)?;
            o.manifest("construct", cfg, p)?;
        }
        Datum::Nse(d) => {
            let header: Vec<String> =
                ["j", "q", "block", "lo_x", "lo_y", "lo_z", "hi_x", "hi_y", "hi_z", "points", "norm_min", "norm_max"]
                    .iter()
                    .map(|s| s.to_string())
                    .collect();
            let mut rows = Vec::new();
            for b in &d.blocks {
                for (name, bx) in b.named() {
                    let (nlo, nhi) = bx.norm_range();
                    let mut r = vec![b.j.to_string(), b.q.to_string(), name.to_string()];
                    r.extend(bx.lo.iter().chain(bx.hi.iter()).map(|c| c.to_string()));
                    r.extend([bx.count().to_string(), num(nlo), num(nhi)]);
                    rows.push(r);
                }
            }
            o.csv("blocks.csv", &header, &rows)?;
            let (stored, written, note) = match d.field() {
                Ok(u) => {
                    o.text("field.json", &u.to_json()?)?;
                    (Some(u.len()), true, None)
                }
                Err(e @ lpcascade::Error::InfeasibleBlock { .. }) => (None, false, Some(e.to_string())),
                Err(e) => return Err(e.into()),
            };
            let rep = Report { kind: "nse", stored_modes: stored, field_written: written, note, gaps: Some(validate_gaps(&d.params)) };
            o.json("construction.json", &rep)?;
            o.manifest("construct", cfg, &d.params)?;
        }
    }
    Ok(())
}

pub fn analyze_transfer(cfg: &KvConfig, out: &Path) -> CliResult<()> {
    let Datum::Euler(p) = read_datum(cfg)? else {
        return Err(CliError::Config("transfer needs kind = euler".into()));
    };
    let q_from: i32 = cfg.or("q_from", 1)?;
    let q_to: i32 = cfg.or("q_to", p.q_max - 1)?;
    cfg.finish()?;
    let u0 = euler_u0(&p);
    let mut rows = Vec::new();
    for q in q_from..=q_to {
        let r = transfer_coefficient(&u0, &p, q)?;
        rows.push(vec![
            q.to_string(),
            num(r.f[0].re),
            num(r.f[0].im),
            num(r.f[1].re),
            num(r.f[1].im),
            num(r.leading_magnitude),
            num(r.residual_scaled),
        ]);
    }
    let o = Output::create(out)?;
    let header = ["q", "re_f1", "im_f1", "re_f2", "im_f2", "leading_magnitude", "residual_scaled"].map(String::from);
    o.csv("transfer.csv", &header, &rows)?;
    o.manifest("analyze transfer", cfg, p)
}

pub fn analyze_triads(cfg: &KvConfig, out: &Path) -> CliResult<()> {
    let Datum::Nse(d) = read_datum(cfg)? else {
        return Err(CliError::Config("triads needs kind = nse".into()));
    };
    let mut js: Vec<usize> = cfg.list("j")?;
    if js.is_empty() {
        js = (1..=d.blocks.len()).collect();
    }
    cfg.finish()?;
    let mut rows = Vec::new();
    for j in js {
        let r = triad_energy_terms(&d, j)?;
        rows.push(vec![
            j.to_string(),
            num(r.a),
            num(r.b),
            num(r.c),
            num(r.b_over_lambda),
            num(r.gap_ratio),
            num(r.total),
            num(r.consistency_error()),
        ]);
    }
    let o = Output::create(out)?;
    let header = ["j", "A", "B", "C", "B_over_lambda", "gap_ratio", "total", "consistency_error"].map(String::from);
    o.csv("triads.csv", &header, &rows)?;
    o.manifest("analyze triads", cfg, &d.params)
}

fn policy_of(cfg: &KvConfig) -> CliResult<ResolutionPolicy> {
    let mut p = ResolutionPolicy::default();
    if let Some(b) = cfg.opt::<u128>("max_grid_points")? {
        p.max_grid_points = b;
    }
    Ok(p)
}

pub fn analyze_besov(cfg: &KvConfig, out: &Path) -> CliResult<()> {
    let datum = if cfg.has("kind") { Some(read_datum(cfg)?) } else { None };
    let u = field_of(cfg, datum.as_ref())?;
    let p = BesovParams::new(cfg.req("besov_s")?, cfg.req("besov_r")?, cfg.or("besov_l", f64::INFINITY)?)?;
    let policy = policy_of(cfg)?;
    cfg.finish()?;
    let entries = besov_shell_norms(&u, &p, &policy)?;
    let rows: Vec<Vec<String>> = entries
        .iter()
        .map(|e| vec![e.q.to_string(), num(e.lambda_q), num(e.shell_lr_norm), num(e.weighted), e.method.as_str().to_string()])
        .collect();
    let o = Output::create(out)?;
    let header = ["q", "lambda_q", "shell_lr_norm", "weighted", "method"].map(String::from);
    o.csv("besov.csv", &header, &rows)?;
    #[derive(Serialize)]
    struct Details {
        norm: f64,
        s: f64,
        r: f64,
        l: f64,
    }
    o.manifest("analyze besov", cfg, Details { norm: combine(&entries, p.l), s: p.s, r: p.r, l: p.l })
}

pub fn analyze_bony(cfg: &KvConfig, out: &Path) -> CliResult<()> {
    let datum = if cfg.has("kind") { Some(read_datum(cfg)?) } else { None };
    let u = field_of(cfg, datum.as_ref())?;
    let mut qs: Vec<i32> = cfg.list("q")?;
    if qs.is_empty() {
        return Err(CliError::Config("missing required key 'q'".into()));
    }
    qs.sort_unstable();
    cfg.finish()?;
    let mut rows = Vec::new();
    for q in qs {
        let s = bony_split(&u, &u, &u, q)?;
        let direct = trilinear(&u, &u, &lpcascade::littlewood_paley::shell_project(&u, q)?)?;
        rows.push(vec![
            q.to_string(),
            num(s.high_high),
            num(s.low_high),
            num(s.high_low),
            num(s.remainder),
            num(s.total()),
            num(direct),
        ]);
    }
    let o = Output::create(out)?;
    let header = ["q", "high_high", "low_high", "high_low", "remainder", "sum", "trilinear"].map(String::from);
    o.csv("bony.csv", &header, &rows)?;
    o.manifest("analyze bony", cfg, ())
}

fn solver_config(cfg: &KvConfig, datum: Option<&Datum>, dim: usize) -> CliResult<SolverConfig> {
    let default_model = match datum.map(Datum::kind) {
        Some("nse") => Some(Model::Nse),
        Some(_) => Some(Model::Euler),
        None => None,
    };
    let model: Model = match cfg.str_opt("model") {
        Some(m) => m.parse()?,
        None => default_model.ok_or_else(|| CliError::Config("missing required key 'model'".into()))?,
    };
    let n: usize = cfg.req("N")?;
    let dt: f64 = cfg.req("dt")?;
    let t: f64 = cfg.req("T")?;
    let mut sc = match model {
        Model::Euler => SolverConfig::euler(n, dt, t),
        Model::Nse => SolverConfig::nse(cfg.req("nu")?, n, dt, t),
    };
    if model == Model::Euler {
        if let Some(nu) = cfg.opt::<f64>("nu")? {
            sc.nu = nu;
        }
    }
    sc.dealias = cfg.or("dealias", sc.dealias)?;
    sc.record_every = cfg.or("record_every", 1)?;
    sc.probes = cfg.wavevectors("probes", dim)?;
    for q in cfg.list::<i32>("probe_shells")? {
        if dim != 2 || !(0..=40).contains(&q) {
            return Err(CliError::Config(format!("probe_shells needs a 2D field and 0 <= q <= 40, got {q}")));
        }
        sc.probes.push(probe(q));
    }
    sc.shell_probes = cfg.list("shell_probes")?;
    sc.besov = cfg.pairs("besov")?;
    sc.validate()?;
    Ok(sc)
}

pub fn evolve(cfg: &KvConfig, out: &Path) -> CliResult<()> {
    let datum = if cfg.has("kind") { Some(read_datum(cfg)?) } else { None };
    let explicit = cfg.has("field");
    let dim = match (&datum, explicit) {
        (_, true) => None,
        (Some(Datum::Euler(_)), _) => Some(2),
        (Some(Datum::Nse(_)), _) => Some(3),
        (None, false) => return Err(CliError::Config("need either 'field' or a construction ('kind')".into())),
    };
    let (u, kept, sc) = match (dim, &datum) {
        (Some(3), Some(Datum::Nse(d))) if !explicit => {
            let sc = solver_config(cfg, datum.as_ref(), 3)?;
            let (u, kept) = nse_initial_field(d, &sc)?;
            (u, kept, sc)
        }
        _ => {
            let u = field_of(cfg, datum.as_ref())?;
            let sc = solver_config(cfg, datum.as_ref(), u.dim())?;
            (u, Vec::new(), sc)
        }
    };
    cfg.finish()?;
    let series = run(&u, &sc)?;
    let o = Output::create(out)?;
    write_diagnostics(&o, &series)?;
    #[derive(Serialize)]
    struct Details<'a> {
        solver: &'a SolverConfig,
        dim: usize,
        kept_blocks: Vec<usize>,
        initial_modes: usize,
        max_divergence_residual: f64,
        max_reality_residual: f64,
    }
    o.manifest(
        "evolve",
        cfg,
        Details {
            solver: &sc,
            dim: series.dim,
            kept_blocks: kept,
            initial_modes: u.len(),
            max_divergence_residual: series.max_divergence_residual,
            max_reality_residual: series.max_reality_residual,
        },
    )
}

fn wavevector_label(k: &lpcascade::Wavevector, dim: usize) -> String {
    let c = &k.0[..dim];
    c.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("_")
}

fn write_diagnostics(o: &Output, s: &DiagnosticsSeries) -> CliResult<()> {
    let cfg = &s.config;
    let mut header: Vec<String> = ["t", "E_kin", "E_diss_integral"].map(String::from).to_vec();
    for k in &cfg.probes {
        let l = wavevector_label(k, s.dim);
        for c in 1..=s.dim {
            header.push(format!("probe_{l}_u{c}_re"));
            header.push(format!("probe_{l}_u{c}_im"));
        }
    }
    for q in &cfg.shell_probes {
        for part in ["energy", "pairing", "viscous", "transfer"] {
            header.push(format!("shell_{q}_{part}"));
        }
    }
    for (sv, r) in &cfg.besov {
        header.push(format!("besov_s{sv}_r{r}"));
    }
    let mut rows = Vec::new();
    for i in 0..s.times.len() {
        let mut r = vec![num(s.times[i]), num(s.energy[i]), num(s.dissipation_integral[i])];
        for m in &s.mode_values[i] {
            for z in m.iter().take(s.dim) {
                r.push(num(z.re));
                r.push(num(z.im));
            }
        }
        if !cfg.shell_probes.is_empty() {
            for sh in &s.shells[i] {
                r.extend([num(sh.energy), num(sh.pairing), num(sh.viscous), num(sh.transfer)]);
            }
        }
        r.extend(s.besov_distance[i].iter().map(|x| num(*x)));
        rows.push(r);
    }
    o.csv("diagnostics.csv", &header, &rows)
}

/// Concatenates every CSV under the input directories, each preceded by a
/// provenance comment naming its source and the command that produced it.
pub fn report(inputs: &[PathBuf], out: &Path) -> CliResult<()> {
    let mut text = String::new();
    for dir in inputs {
        let command = fs::read_to_string(dir.join("manifest.json"))
            .ok()
            .and_then(|m| serde_json::from_str::<serde_json::Value>(&m).ok())
            .and_then(|v| v.get("command").and_then(|c| c.as_str()).map(str::to_string))
            .unwrap_or_else(|| "unknown".into());
        let mut files: Vec<PathBuf> = fs::read_dir(dir)
            .map_err(|e| CliError::Config(format!("{}: {e}", dir.display())))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "csv"))
            .collect();
        files.sort();
        for f in files {
            text.push_str(&format!("# source: {} (command: {command})\n", f.display()));
            text.push_str(&fs::read_to_string(&f)?);
        }
    }
    let o = Output::create(out)?;
    o.text("report.csv", &text)
}
