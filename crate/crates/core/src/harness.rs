//! Experiment configuration, on-disk cache, and the check runner behind the CLI.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{de::DeserializeOwned, Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::asymptotics::{evaluate, overshoot_sup_distance, Formula, Options};
use crate::error::{Error, Result};
use crate::exit::{exit_row, exit_upward, hit_before, mc_exit, Estimand};
use crate::green::{
    green_halfline_solve, green_halfline_spitzer, green_interval, potential_kernel, symmetry_residual, GreenTable, KernelMethod,
};
use crate::ladder::{compute_ladder, LadderData};
use crate::stepdist::{DistSpec, StepDistribution};
use crate::trend::{decade_points, geometric_grid, Verdict};

pub const SCHEMA: u32 = 1;
pub const CACHE_ENV: &str = "FLUCTLAB_CACHE";
pub const THREADS_ENV: &str = "FLUCTLAB_THREADS";

fn schema() -> u32 {
    SCHEMA
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GreenMode {
    Interval,
    Halfline,
    Potential,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum Op {
    Ladder {
        window: usize,
    },
    Green {
        mode: GreenMode,
        #[serde(default)]
        r: Option<usize>,
        #[serde(default)]
        window: Option<usize>,
        #[serde(default)]
        tol: Option<f64>,
        #[serde(default)]
        xs: Vec<i64>,
    },
    Exit {
        r: usize,
        #[serde(default)]
        x: usize,
    },
    Verify {
        formula: String,
        grid: String,
        #[serde(default)]
        x_frac: Option<f64>,
        #[serde(default)]
        y_mult: Option<f64>,
        #[serde(default)]
        ladder_window: Option<usize>,
    },
    Mc {
        r: usize,
        #[serde(default)]
        x: usize,
        paths: u64,
        #[serde(default)]
        quantiles: Vec<f64>,
    },
    /// sup_y |P[Z(R) <= y | Lambda_R] - y/(R+y)| must decrease along `rs`
    Overshoot {
        rs: Vec<usize>,
        #[serde(default)]
        x: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default = "schema")]
    pub schema: u32,
    pub name: String,
    pub dist: DistSpec,
    pub ops: Vec<Op>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub cache_dir: Option<PathBuf>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA {
            return Err(Error::Config(format!("schema {} not supported", self.schema)));
        }
        self.dist.build()?;
        for op in &self.ops {
            match op {
                Op::Verify { formula, grid, .. } => {
                    formula.parse::<Formula>()?;
                    parse_grid(grid)?;
                }
                Op::Mc { paths, quantiles, .. } => {
                    if *paths == 0 || quantiles.iter().any(|q| !(*q > 0.0 && *q < 1.0)) {
                        return Err(Error::Config("mc needs paths > 0 and quantiles in (0,1)".into()));
                    }
                }
                Op::Green { mode, r, window, .. } => {
                    let ok = match mode {
                        GreenMode::Interval => r.is_some(),
                        GreenMode::Halfline => window.is_some(),
                        GreenMode::Potential => true,
                    };
                    if !ok {
                        return Err(Error::Config(format!("green {mode:?}: missing r/window")));
                    }
                }
                Op::Overshoot { rs, .. } if rs.len() < 2 => return Err(Error::Config("overshoot needs two or more R".into())),
                _ => {}
            }
        }
        Ok(())
    }

    /// Hash of the fields that determine results (threads and paths excluded).
    pub fn hash(&self) -> String {
        let c = Self { threads: None, cache_dir: None, out_dir: None, ..self.clone() };
        hex::encode(Sha256::digest(serde_json::to_vec(&c).expect("config serializes")))
    }
}

/// `lo:hi:geometric[:per_decade]`, `lo:hi:decades`, or a comma list.
pub fn parse_grid(s: &str) -> Result<Vec<i64>> {
    let bad = || Error::Config(format!("bad grid `{s}`"));
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
    let parts: Vec<&str> = s.split(':').collect();
    let g = match parts.as_slice() {
        [lo, hi, kind, rest @ ..] => {
            let (lo, hi) = (num(lo)?, num(hi)?);
            if !(lo >= 1.0 && hi >= lo) {
                return Err(bad());
            }
            match (*kind, rest) {
                ("geometric", []) => geometric_grid(lo, hi, 4),
                ("geometric", [k]) => geometric_grid(lo, hi, k.parse().map_err(|_| bad())?),
                ("decades", []) => decade_points(lo as i64, hi as i64),
                _ => return Err(bad()),
            }
        }
        [one] => one.split(',').map(|t| num(t).map(|v| v as i64)).collect::<Result<_>>()?,
        _ => return Err(bad()),
    };
    if g.is_empty() || g.iter().any(|&x| x < 1) {
        return Err(bad());
    }
    Ok(g)
}

/// Binary cache of ladder arrays and Green tables keyed by distribution hash, size and tolerance.
#[derive(Clone, Debug, Default)]
pub struct Cache {
    pub dir: Option<PathBuf>,
}

impl Cache {
    pub fn new(dir: Option<PathBuf>) -> Self {
        Self { dir: dir.or_else(|| std::env::var_os(CACHE_ENV).map(PathBuf::from)) }
    }

    pub fn key(kind: &str, d: &StepDistribution, size: usize, tol: f64) -> String {
        format!("{kind}-{}-{size}-{tol:e}", &d.hash()[..16])
    }

    fn get_or<T: Serialize + DeserializeOwned>(&self, key: &str, f: impl FnOnce() -> Result<T>) -> Result<(T, bool)> {
        let Some(dir) = &self.dir else {
            return Ok((f()?, false));
        };
        let path = dir.join(format!("{key}.bin"));
        if let Ok(bytes) = fs::read(&path) {
            if let Ok(v) = bincode::deserialize(&bytes) {
                return Ok((v, true));
            }
        }
        let v = f()?;
        fs::create_dir_all(dir)?;
        let tmp = dir.join(format!("{key}.tmp{}", std::process::id()));
        fs::write(&tmp, bincode::serialize(&v).map_err(|e| Error::Numerical(e.to_string()))?)?;
        fs::rename(&tmp, &path)?;
        Ok((v, false))
    }

    pub fn ladder(&self, d: &StepDistribution, n: usize) -> Result<(LadderData, bool)> {
        self.get_or(&Self::key("ladder", d, n, 0.0), || compute_ladder(d, n, None))
    }

    pub fn interval(&self, d: &StepDistribution, r: usize) -> Result<(GreenTable, bool)> {
        self.get_or(&Self::key("interval", d, r, 1e-10), || green_interval(d, r))
    }

    pub fn halfline(&self, d: &StepDistribution, w: usize, tol: f64) -> Result<(GreenTable, bool)> {
        self.get_or(&Self::key("halfline", d, w, tol), || green_halfline_solve(d, w, tol, 1 << 22))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub detail: String,
    /// method, tolerance and cache key behind the numbers
    pub provenance: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub schema: u32,
    pub name: String,
    pub config_hash: String,
    pub checks: Vec<Check>,
    /// file name -> sha256 of its bytes
    pub outputs: BTreeMap<String, String>,
    pub summary_hash: String,
}

impl Summary {
    pub fn hard_failure(&self) -> bool {
        self.checks.iter().any(|c| c.status == Status::Fail)
    }
}

/// Everything a run produced, in memory; `write` puts it on disk.
#[derive(Clone, Debug)]
pub struct Bundle {
    pub summary: Summary,
    pub files: BTreeMap<String, Vec<u8>>,
}

impl Bundle {
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        for (name, bytes) in &self.files {
            fs::write(dir.join(name), bytes)?;
        }
        fs::write(dir.join("summary.json"), serde_json::to_vec_pretty(&self.summary)?)?;
        Ok(())
    }
}

struct Runner<'a> {
    cfg: &'a ExperimentConfig,
    d: StepDistribution,
    cache: Cache,
    ladders: BTreeMap<usize, LadderData>,
    checks: Vec<Check>,
    files: BTreeMap<String, Vec<u8>>,
}

fn prov(items: &[(&str, String)]) -> BTreeMap<String, String> {
    items.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn status(ok: bool) -> Status {
    if ok {
        Status::Pass
    } else {
        Status::Fail
    }
}

impl Runner<'_> {
    fn ladder(&mut self, n: usize) -> Result<&LadderData> {
        let n = n.max(64);
        if let Some(&have) = self.ladders.keys().find(|&&k| k >= n) {
            return Ok(&self.ladders[&have]);
        }
        let (ld, _) = self.cache.ladder(&self.d, n)?;
        self.ladders.insert(n, ld);
        Ok(&self.ladders[&n])
    }

    fn check(&mut self, name: String, st: Status, detail: String, p: BTreeMap<String, String>) {
        self.checks.push(Check { name, status: st, detail, provenance: p });
    }

    fn op(&mut self, i: usize, op: &Op) -> Result<()> {
        let d = self.d.clone();
        match op {
            Op::Ladder { window } => {
                let key = Cache::key("ladder", &d, (*window).max(64), 0.0);
                let ld = self.ladder(*window)?.clone();
                let mut csv = String::from("x,u_a,v_d,U_a,V_d\n");
                for x in 0..=*window {
                    csv.push_str(&format!("{x},{:.17e},{:.17e},{:.17e},{:.17e}\n", ld.u_a(x), ld.v_d(x), ld.U_a(x), ld.V_d(x)));
                }
                self.files.insert(format!("{i:02}_ladder.csv"), csv.into_bytes());
                self.check(
                    format!("ladder n={window}"),
                    status(ld.psi_err.is_finite()),
                    format!("v0={:.12} mass_defect={:.3e} psi_err={:.3e}", ld.v0, ld.mass_defect, ld.psi_err),
                    prov(&[("method", ld.method.clone()), ("cache_key", key)]),
                );
            }
            Op::Green { mode, r, window, tol, xs } => match mode {
                GreenMode::Interval => {
                    let r = r.unwrap();
                    let key = Cache::key("interval", &d, r, 1e-10);
                    let (g, _) = self.cache.interval(&d, r)?;
                    let sym = symmetry_residual(&g);
                    self.files.insert(format!("{i:02}_green_interval.json"), serde_json::to_vec(&g)?);
                    self.check(
                        format!("interval symmetry R={r}"),
                        status(sym < 1e-10 && g.residual <= 1e-10),
                        format!("symmetry {sym:.3e} residual {:.3e}", g.residual),
                        prov(&[("method", format!("{:?}", g.method)), ("tol", "1e-10".into()), ("cache_key", key)]),
                    );
                }
                GreenMode::Halfline => {
                    let w = window.unwrap();
                    let tol = tol.unwrap_or(0.05);
                    let key = Cache::key("halfline", &d, w, tol);
                    let (b, _) = self.cache.halfline(&d, w, tol)?;
                    let ld = self.ladder(b.n_window.unwrap_or(w).max(4 * w))?;
                    let sp = green_halfline_spitzer(ld, w, w)?;
                    let mut worst: f64 = 0.0;
                    for x in 0..=w {
                        for y in 0..=w {
                            let v = sp.get(x, y);
                            let e = sp.upper(x, y) - v;
                            let out = (b.lower(x, y) - v - e).max(v - e - b.upper(x, y)).max(0.0);
                            worst = worst.max(out);
                        }
                    }
                    self.files.insert(format!("{i:02}_green_halfline.json"), serde_json::to_vec(&sp)?);
                    self.check(
                        format!("spitzer inside half-line bracket w={w}"),
                        status(worst <= 1e-10),
                        format!("max excursion outside bracket {worst:.3e}, N = {:?}", b.n_window),
                        prov(&[("method", "spitzer vs linear-solve".into()), ("tol", format!("{tol}")), ("cache_key", key)]),
                    );
                }
                GreenMode::Potential => {
                    let xs = if xs.is_empty() { vec![1, 10, 100, 1000, -1, -10, -100, -1000] } else { xs.clone() };
                    let q = potential_kernel(&d, &xs, KernelMethod::Quadrature)?;
                    let small: Vec<i64> = xs.iter().copied().filter(|x| x.abs() <= 1000).collect();
                    let s = potential_kernel(&d, &small, KernelMethod::Series)?;
                    let mut worst: f64 = 0.0;
                    for v in &s {
                        let w = q.iter().find(|k| k.x == v.x).unwrap();
                        worst = worst.max((w.value - v.value).abs());
                    }
                    self.files.insert(format!("{i:02}_potential.json"), serde_json::to_vec(&(q, s))?);
                    self.check(
                        "potential kernel quadrature vs series".into(),
                        status(worst <= 1e-6),
                        format!("max |difference| {worst:.3e} on |x| <= 1e3"),
                        prov(&[("method", "quadrature, series".into()), ("tol", "1e-6".into())]),
                    );
                }
            },
            Op::Exit { r, x } => {
                let e = exit_upward(&d, *r)?;
                let row = exit_row(&d, *r, *x)?;
                let law = row.overshoot_law(&d, 1 << 16);
                let ld = self.ladder(*r)?;
                let mut upp: f64 = 0.0;
                for (z, p) in e.p_up.iter().enumerate() {
                    upp = upp.max(p - ld.V_d(z) / ld.V_d(*r));
                }
                let body = serde_json::json!({
                    "r": r, "x": x, "p_up": e.p_up[*x], "residual": e.residual,
                    "exit_position": row.exit_position(&d), "overshoot": law,
                });
                self.files.insert(format!("{i:02}_exit.json"), serde_json::to_vec(&body)?);
                self.check(
                    format!("exit R={r}"),
                    status(e.residual <= 1e-10 && upp <= 1e-9),
                    format!("P_{x}(Lambda) = {:.12e}, residual {:.3e}, max P_x(Lambda) - V_d(x)/V_d(R) = {upp:.3e}", e.p_up[*x], e.residual),
                    prov(&[("method", e.method.into()), ("tol", "1e-10".into())]),
                );
            }
            Op::Verify { formula, grid, x_frac, y_mult, ladder_window } => {
                let f: Formula = formula.parse()?;
                let g = parse_grid(grid)?;
                let top = *g.iter().max().unwrap() as usize;
                let n = ladder_window.unwrap_or(top);
                let ld = self.ladder(n)?.clone();
                let opts = Options { x_frac: *x_frac, y_mult: *y_mult };
                let rep = evaluate(f, &d, &ld, &g, &opts)
                    .map_err(|e| e.context("asymptotics", "evaluate", format!("{f} on {} grid {grid}", d.meta.family)))?;
                let st = match rep.verdict {
                    Verdict::Converging | Verdict::Flat => Status::Pass,
                    Verdict::Inconclusive => Status::Inconclusive,
                    Verdict::Diverging => Status::Fail,
                };
                let tag = f.id().replace('/', "_");
                self.files.insert(format!("{i:02}_verify_{tag}.csv"), rep.to_csv().into_bytes());
                self.files.insert(format!("{i:02}_verify_{tag}.json"), serde_json::to_vec_pretty(&rep)?);
                self.check(
                    format!("verify {f}"),
                    st,
                    format!("verdict {} last ratio {:.6} slope {:.3} {}", rep.verdict, rep.last_ratio(), rep.trend_slope, rep.notes.join("; ")),
                    prov(&[("method", f.inputs().join("+")), ("ladder_window", ld.n.to_string())]),
                );
            }
            Op::Mc { r, x, paths, quantiles } => {
                let row = exit_row(&d, *r, *x)?;
                let p_up = row.p_up;
                let ld = self.ladder(*r)?;
                let h = hit_before(ld, *x, *r)?;
                let mut what = vec![Estimand::PUp, Estimand::PHit];
                let mut exact = vec![(p_up, row.residual), (h.value, h.err)];
                for &q in quantiles {
                    let z = overshoot_quantile(&d, &row, q);
                    what.push(Estimand::OvershootCdf(z));
                    exact.push((row.overshoot_cdf(&d, z), row.residual));
                }
                let est = mc_exit(&d, *r, *x, *paths, self.cfg.seed, &what)?;
                let mut csv = String::from("estimand,exact,estimate,std_err,z_score\n");
                for (m, (ex, eb)) in est.iter().zip(&exact) {
                    let zsc = (m.estimate - ex).abs() / m.std_err.max(1e-300);
                    csv.push_str(&format!("{:?},{ex:.17e},{:.17e},{:.17e},{zsc:.6}\n", m.estimand, m.estimate, m.std_err));
                    self.check(
                        format!("mc {:?} R={r} x={x}", m.estimand),
                        status((m.estimate - ex).abs() <= 3.0 * m.std_err + eb && !m.flagged),
                        format!("exact {ex:.6e} mc {:.6e} se {:.2e} z {zsc:.2}", m.estimate, m.std_err),
                        prov(&[("method", "chacha8 streams".into()), ("seed", self.cfg.seed.to_string()), ("paths", paths.to_string())]),
                    );
                }
                self.files.insert(format!("{i:02}_mc.csv"), csv.into_bytes());
            }
            Op::Overshoot { rs, x } => {
                let mut csv = String::from("R,sup_distance,beyond_scan\n");
                let mut sups = Vec::new();
                for &r in rs {
                    let (s, b) = overshoot_sup_distance(&d, r, *x)?;
                    csv.push_str(&format!("{r},{s:.17e},{b:.17e}\n"));
                    sups.push((s, b));
                }
                let ok = sups.windows(2).all(|w| w[1].0 < w[0].0) && sups.iter().all(|(s, b)| b <= s);
                self.files.insert(format!("{i:02}_overshoot.csv"), csv.into_bytes());
                self.check(
                    format!("overshoot sup-distance decreasing over {rs:?}"),
                    status(ok),
                    format!("{:?}", sups.iter().map(|s| s.0).collect::<Vec<_>>()),
                    prov(&[("method", "exit row".into())]),
                );
            }
        }
        Ok(())
    }
}

/// Smallest z >= 0 with P_x[Z(R) <= z | Lambda_R] >= q.
pub fn overshoot_quantile(d: &StepDistribution, row: &crate::exit::ExitRow, q: f64) -> i64 {
    let (mut lo, mut hi) = (0i64, 1i64);
    while row.overshoot_cdf(d, hi) < q && hi < 1 << 50 {
        hi *= 2;
    }
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if row.overshoot_cdf(d, mid) >= q {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    lo
}

fn run_inner(cfg: &ExperimentConfig) -> Result<Bundle> {
    cfg.validate()?;
    let d = cfg.dist.build()?;
    let mut run = Runner {
        cfg,
        d,
        cache: Cache::new(cfg.cache_dir.clone()),
        ladders: BTreeMap::new(),
        checks: Vec::new(),
        files: BTreeMap::new(),
    };
    for (i, op) in cfg.ops.iter().enumerate() {
        if let Err(e) = run.op(i, op) {
            let e = match e {
                Error::Context { .. } => e,
                e => e.context("harness", "run", format!("{op:?}")),
            };
            run.check(format!("op {i}"), Status::Fail, e.to_string(), BTreeMap::new());
        }
    }
    let outputs: BTreeMap<String, String> =
        run.files.iter().map(|(k, v)| (k.clone(), hex::encode(Sha256::digest(v)))).collect();
    let mut summary = Summary {
        schema: SCHEMA,
        name: cfg.name.clone(),
        config_hash: cfg.hash(),
        checks: run.checks,
        outputs,
        summary_hash: String::new(),
    };
    summary.summary_hash = hex::encode(Sha256::digest(serde_json::to_vec(&summary)?));
    Ok(Bundle { summary, files: run.files })
}

/// Run every op of the config; module errors become failed checks carrying their context.
pub fn run(cfg: &ExperimentConfig) -> Result<Bundle> {
    let threads = cfg
        .threads
        .or_else(|| std::env::var(THREADS_ENV).ok().and_then(|s| s.parse().ok()));
    let bundle = match threads {
        Some(n) if n > 0 => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?
            .install(|| run_inner(cfg))?,
        _ => run_inner(cfg)?,
    };
    if let Some(dir) = &cfg.out_dir {
        bundle.write(&dir.join(&cfg.name))?;
    }
    Ok(bundle)
}

fn dist(text: &str) -> DistSpec {
    DistSpec::parse(text).expect("built-in spec")
}

/// The cross-validation matrix. `quick` shrinks windows and path counts.
pub fn suite(quick: bool) -> Vec<ExperimentConfig> {
    let s = |full: usize, small: usize| if quick { small } else { full };
    let grid = |hi: &str, lo: &str| if quick { lo.to_string() } else { hi.to_string() };
    let cfg = |name: &str, d: &str, ops: Vec<Op>| ExperimentConfig {
        schema: SCHEMA,
        name: name.into(),
        dist: dist(d),
        ops,
        seed: 20_240_601,
        threads: None,
        cache_dir: None,
        out_dir: None,
    };
    let hl = |w: usize| Op::Green { mode: GreenMode::Halfline, r: None, window: Some(w), tol: Some(0.05), xs: vec![] };
    let verify = |f: &str, g: String, xf: Option<f64>| Op::Verify { formula: f.into(), grid: g, x_frac: xf, y_mult: None, ladder_window: None };
    vec![
        cfg(
            "srw",
            "family=srw",
            vec![
                Op::Exit { r: 100, x: 50 },
                Op::Green { mode: GreenMode::Interval, r: Some(s(2000, 200)), window: None, tol: None, xs: vec![] },
                hl(s(100, 30)),
                Op::Green { mode: GreenMode::Potential, r: None, window: None, tol: None, xs: vec![1, 7, 50, -50] },
                verify("U/Z", grid("1e1:1e4:decades", "1e1:1e3:decades"), None),
            ],
        ),
        cfg("lazy_srw", "family=lazy_srw,hold=0.2", vec![hl(s(100, 30)), Op::Exit { r: 64, x: 10 }]),
        cfg(
            "finite",
            "family=finite,table=-2:0.3;-1:0.2;0:0.1;1:0.2;3:0.2",
            vec![hl(s(100, 30)), Op::Green { mode: GreenMode::Interval, r: Some(s(1000, 100)), window: None, tol: None, xs: vec![] }],
        ),
        cfg(
            "zipf_nrs",
            "family=zipf_pair,p=0.3,q=0.7",
            vec![
                hl(s(100, 30)),
                verify("T2-1", grid("1e2:1e5:geometric", "1e1:1e3:geometric"), None),
                verify("T2-30", grid("1e2:1e4:geometric", "1e1:1e3:geometric"), None),
                verify("gR", grid("1e2:1e4:geometric", "1e1:1e3:geometric"), None),
                Op::Overshoot { rs: if quick { vec![50, 100, 200] } else { vec![250, 500, 1000, 2000] }, x: 0 },
                Op::Mc { r: s(500, 50), x: 0, paths: s(1_000_000, 20_000) as u64, quantiles: vec![0.2, 0.4, 0.6, 0.8] },
                Op::Mc { r: s(500, 50), x: s(250, 25), paths: s(1_000_000, 20_000) as u64, quantiles: vec![0.2, 0.4, 0.6, 0.8] },
            ],
        ),
        cfg(
            "stable",
            "family=stable_like,alpha=1.5,p=0.5,q=0.5",
            vec![
                hl(s(100, 30)),
                verify("6.1a", grid("1e2:1e5:geometric", "1e1:1e3:geometric"), None),
                verify("6.1b", grid("1e2:1e5:geometric", "1e1:1e3:geometric"), None),
                verify("asymp_g", grid("1e2:1e4:geometric", "1e1:1e3:geometric"), None),
                verify("U/Z", grid("1e2:1e4:geometric", "1e1:1e3:geometric"), None),
            ],
        ),
        cfg(
            "log_prs",
            "family=log_regular,p=0.3,q=0.7",
            vec![
                verify("Thm1", grid("1e2:1e4:geometric", "1e1:1e3:geometric"), None),
                verify("Thm1-vd", grid("1e2:1e4:geometric", "1e1:1e3:geometric"), None),
                verify("P_a", grid("1e2:1e4:geometric", "1e1:1e3:geometric"), None),
            ],
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_specs() {
        assert_eq!(parse_grid("1e2:1e4:geometric:2").unwrap(), vec![100, 316, 1000, 3162, 10_000]);
        assert_eq!(parse_grid("10:1000:decades").unwrap(), vec![10, 100, 1000]);
        assert_eq!(parse_grid("5,7,9").unwrap(), vec![5, 7, 9]);
        assert!(parse_grid("1e4:1e2:geometric").is_err());
        assert!(parse_grid("x").is_err());
    }

    #[test]
    fn config_validation() {
        let mut c = suite(true).remove(0);
        c.ops.push(Op::Verify { formula: "T9-9".into(), grid: "1:10:decades".into(), x_frac: None, y_mult: None, ladder_window: None });
        let j = serde_json::to_string(&c).unwrap();
        assert!(matches!(ExperimentConfig::from_json(&j), Err(Error::Config(_))));
        c.ops.pop();
        let back = ExperimentConfig::from_json(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn inapplicable_formula_fails_with_context() {
        let c = ExperimentConfig {
            schema: SCHEMA,
            name: "t".into(),
            dist: DistSpec::parse("family=srw").unwrap(),
            ops: vec![Op::Verify { formula: "T2-1".into(), grid: "10:1000:decades".into(), x_frac: None, y_mult: None, ladder_window: None }],
            seed: 1,
            threads: Some(1),
            cache_dir: None,
            out_dir: None,
        };
        let b = run(&c).unwrap();
        assert!(b.summary.hard_failure());
        assert!(b.summary.checks[0].detail.contains("asymptotics::evaluate"));
    }
}
