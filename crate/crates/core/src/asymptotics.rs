//! Closed-form asymptotic predictions compared with exact values on a grid.
//!
//! Every formula is evaluated as a ratio exact/predicted whose limit is known, so
//! unknown slowly varying factors cancel. Applicability is checked against the
//! builder's tags before anything is computed.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::charfn::gl;
use crate::error::{Error, Result};
use crate::exit::{exit_row, exit_upward, hit_before};
use crate::green::{green_kernel_transient, potential_kernel, spitzer_entry, KernelMethod};
use crate::ladder::LadderData;
use crate::stepdist::{StepDistribution, Tag};
use crate::trend::ConvergenceReport;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Formula {
    /// u_a(x) ~ U_a(x) P[X > x] / |A(x)|
    #[serde(rename = "T2-1")]
    RenewalDensity,
    /// P(Lambda_R)/v0 ~ U_a(R) P[X > R]
    #[serde(rename = "T2-1b")]
    ExitProb,
    /// P(Lambda_R) >= v0 U_a(R) P[X > R] (1 + o(1))
    #[serde(rename = "LaP1")]
    LowerBound,
    /// P_x(Lambda_R) ~ V_d(x) U_a(R)/(x+1) * sum of P[X > t] over the last x+1 sites
    #[serde(rename = "eC1.1")]
    ExitProbX,
    /// g_Omega(x, y) ~ V_d(x) U_a(y) / (|A(y)| (x+1)) * same sum
    #[serde(rename = "T2-2")]
    GreenNrs,
    /// P_x[sigma_y < T] / P_x(Lambda_y) against kernel differences
    #[serde(rename = "T2-3")]
    HitRatio,
    /// overshoot law given exit upward
    #[serde(rename = "Prop1.3")]
    Overshoot,
    /// g_Omega(x, y) ~ a(x) - a(x - y), x >= y/2
    #[serde(rename = "Thm1")]
    GreenPrs,
    /// g_Omega(x, y) ~ V_d(x)/V_d(y) (a(y) - a(-y)), x <= delta y
    #[serde(rename = "g/V/a")]
    GreenPrsRatio,
    /// v_d(y) U_a(y) / a(y) -> 0
    #[serde(rename = "Thm1-vd")]
    DescendingDensity,
    /// a(x) - a(-x) ~ 1/A(x)
    #[serde(rename = "P_a")]
    KernelAsym,
    /// G(-x) - G(x) ~ -1/A(x)
    #[serde(rename = "Gpm")]
    GreenAsym,
    /// g_Omega(y, y) -> G(0)
    #[serde(rename = "gR")]
    GreenDiag,
    /// x u_a(x) / U_a(x) -> alpha rho
    #[serde(rename = "6.1a")]
    StableUa,
    /// x v_d(x) / V_d(x) -> alpha rho-hat
    #[serde(rename = "6.1b")]
    StableVd,
    /// P_x[sigma_R < T] V_d(R)/V_d(x) -> (alpha-1)/(alpha rho-hat) as x/R -> 0
    #[serde(rename = "eqL31")]
    HitStableEnd,
    /// P_x[sigma_R < T] through h_lambda, 1 <= x <= R
    #[serde(rename = "eqL3")]
    HitStable,
    /// g_Omega(x, y) through h_lambda, x <= y
    #[serde(rename = "asymp_g")]
    GreenStable,
    /// V_d(x)/x * sum_{t<x} P[-Zhat > t] -> 1/(Gamma(1+a)Gamma(2-a)), a = alpha rho-hat
    #[serde(rename = "U/Z")]
    LadderConst,
    /// P[sigma_R < T] / P(Lambda_R), reported for the constant c
    #[serde(rename = "Prop1.1")]
    HitVsExit,
}

impl Formula {
    pub const ALL: [Formula; 20] = [
        Formula::RenewalDensity,
        Formula::ExitProb,
        Formula::LowerBound,
        Formula::ExitProbX,
        Formula::GreenNrs,
        Formula::HitRatio,
        Formula::Overshoot,
        Formula::GreenPrs,
        Formula::GreenPrsRatio,
        Formula::DescendingDensity,
        Formula::KernelAsym,
        Formula::GreenAsym,
        Formula::GreenDiag,
        Formula::StableUa,
        Formula::StableVd,
        Formula::HitStableEnd,
        Formula::HitStable,
        Formula::GreenStable,
        Formula::LadderConst,
        Formula::HitVsExit,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Formula::RenewalDensity => "T2-1",
            Formula::ExitProb => "T2-1b",
            Formula::LowerBound => "LaP1",
            Formula::ExitProbX => "eC1.1",
            Formula::GreenNrs => "T2-2",
            Formula::HitRatio => "T2-3",
            Formula::Overshoot => "Prop1.3",
            Formula::GreenPrs => "Thm1",
            Formula::GreenPrsRatio => "g/V/a",
            Formula::DescendingDensity => "Thm1-vd",
            Formula::KernelAsym => "P_a",
            Formula::GreenAsym => "Gpm",
            Formula::GreenDiag => "gR",
            Formula::StableUa => "6.1a",
            Formula::StableVd => "6.1b",
            Formula::HitStableEnd => "eqL31",
            Formula::HitStable => "eqL3",
            Formula::GreenStable => "asymp_g",
            Formula::LadderConst => "U/Z",
            Formula::HitVsExit => "Prop1.1",
        }
    }

    /// Which exact inputs the evaluator consumes besides the step distribution.
    pub fn inputs(self) -> &'static [&'static str] {
        use Formula::*;
        match self {
            RenewalDensity | StableUa | StableVd | LadderConst | DescendingDensity => &["ladder"],
            ExitProb | LowerBound | ExitProbX => &["ladder", "exit"],
            GreenNrs | GreenStable => &["ladder", "spitzer"],
            HitRatio => &["ladder", "exit", "kernel"],
            Overshoot => &["exit"],
            GreenPrs | GreenPrsRatio => &["ladder", "spitzer", "kernel"],
            KernelAsym | GreenAsym => &["kernel"],
            GreenDiag => &["ladder", "spitzer", "kernel"],
            HitStableEnd | HitStable => &["ladder", "spitzer"],
            HitVsExit => &["ladder", "spitzer", "exit"],
        }
    }

    /// Limit of exact/predicted.
    pub fn target(self) -> f64 {
        match self {
            Formula::DescendingDensity => 0.0,
            _ => 1.0,
        }
    }

    /// Default position of the second variable relative to the grid variable.
    pub fn default_x_frac(self) -> f64 {
        match self {
            Formula::GreenNrs => 0.25,
            Formula::GreenPrs => 1.0,
            Formula::GreenPrsRatio | Formula::GreenStable => 0.5,
            Formula::HitStableEnd => 1e-3,
            Formula::HitStable => 0.1,
            _ => 0.0,
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Formula {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "T2-30" {
            return Ok(Formula::HitRatio);
        }
        Formula::ALL
            .iter()
            .copied()
            .find(|f| f.id() == s)
            .ok_or_else(|| Error::Config(format!("unknown formula id `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Options {
    /// second variable as a fraction of the grid variable (x = frac * y or x = frac * R)
    pub x_frac: Option<f64>,
    /// overshoot level y as a multiple of R
    pub y_mult: Option<f64>,
}

fn nrs_theorem_tags(d: &StepDistribution, miss: &mut Vec<String>) {
    for t in [Tag::Nrs, Tag::Unbalanced, Tag::DominatedVariation] {
        if !d.meta.has(t) {
            miss.push(format!("missing tag {t:?}"));
        }
    }
    let mean_zero = d.meta.has(Tag::MeanZero) && d.meta.has(Tag::TailContinuity);
    let infinite = d.meta.has(Tag::InfiniteMean) && d.meta.has(Tag::DensityBound);
    if !(mean_zero || infinite) {
        miss.push("needs MeanZero+TailContinuity or InfiniteMean+DensityBound".into());
    }
}

fn stable_ok(d: &StepDistribution) -> bool {
    let a = d.meta.alpha;
    (d.meta.has(Tag::Stable) && a > 1.0 && a < 2.0) || (d.is_bounded() && d.meta.has(Tag::MeanZero))
}

/// Hypotheses of `f` that the builder metadata does not claim.
pub fn unmet(f: Formula, d: &StepDistribution) -> Vec<String> {
    use Formula::*;
    let mut miss = Vec::new();
    let need = |t: Tag, miss: &mut Vec<String>| {
        if !d.meta.has(t) {
            miss.push(format!("missing tag {t:?}"));
        }
    };
    match f {
        RenewalDensity | ExitProb | ExitProbX | GreenNrs | HitRatio | Overshoot => nrs_theorem_tags(d, &mut miss),
        LowerBound => need(Tag::Nrs, &mut miss),
        HitVsExit => {
            for t in [Tag::Nrs, Tag::Unbalanced, Tag::DominatedVariation, Tag::MeanZero] {
                need(t, &mut miss);
            }
        }
        GreenPrs | GreenPrsRatio | DescendingDensity | KernelAsym => {
            need(Tag::Prs, &mut miss);
            need(Tag::Recurrent, &mut miss);
        }
        GreenAsym => {
            need(Tag::Nrs, &mut miss);
            need(Tag::Transient, &mut miss);
        }
        GreenDiag => need(Tag::Transient, &mut miss),
        StableUa | StableVd | HitStableEnd | HitStable | GreenStable | LadderConst => {
            if !stable_ok(d) {
                miss.push(format!("needs a stable tag with 1 < alpha < 2 or a bounded mean-zero walk (alpha = {})", d.meta.alpha));
            }
        }
    }
    miss
}

pub fn check_applicable(f: Formula, d: &StepDistribution) -> Result<()> {
    let m = unmet(f, d);
    if m.is_empty() {
        Ok(())
    } else {
        Err(Error::Applicability(m))
    }
}

/// (alpha rho, alpha rho-hat, estimated?) for a walk passing `stable_ok`.
/// Without symmetry alpha rho is the log-log slope of U_a over the last decade of the window.
pub fn alpha_rho(d: &StepDistribution, ld: &LadderData) -> (f64, f64, bool) {
    let a = if d.is_bounded() { 2.0 } else { d.meta.alpha };
    if d.meta.has(Tag::Symmetric) || d.is_bounded() {
        return (a / 2.0, a / 2.0, false);
    }
    let n = ld.n;
    let ar = (ld.U_a(n) / ld.U_a(n / 10)).ln() / 10f64.ln();
    (ar, a - ar, true)
}

/// h_lambda(xi) = lambda * int_0^1 t^(lambda-1) (xi - 1 + t)^(alpha-lambda-1) dt,
/// 0 < lambda <= 1, xi >= 1, 1 < alpha <= 2.
pub fn h_lambda(xi: f64, lambda: f64, alpha: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda <= 1.0 && xi >= 1.0 && xi.is_finite() && alpha > 1.0 && alpha <= 2.0) {
        return Err(Error::invalid(format!("h_lambda domain: xi={xi}, lambda={lambda}, alpha={alpha}")));
    }
    let b = alpha - lambda - 1.0;
    // t = s^(1/lambda), then s = w^k; at xi = 1 the integrand becomes the constant k
    let e = b / lambda;
    let k = if e < 0.0 { 1.0 / (1.0 + e) } else { 1.0 };
    let c = xi - 1.0;
    let f = |w: f64| {
        let lw = w.ln();
        let p = k / lambda * lw;
        let inner = if c > 0.0 { (c + p.exp()).ln() } else { p };
        k * ((k - 1.0) * lw + b * inner).exp()
    };
    let mut sum = 0.0;
    let mut hi = 1.0f64;
    for _ in 0..90 {
        let lo = 0.5 * hi;
        sum += gl(lo, hi, f);
        hi = lo;
    }
    Ok(sum)
}

/// sup over y >= 1 of |P_x[Z(R) <= y | Lambda_R] - y/(R+y)|, scanned on 1..=64R;
/// the second value bounds the distance beyond the scan.
pub fn overshoot_sup_distance(d: &StepDistribution, r: usize, x: usize) -> Result<(f64, f64)> {
    let row = exit_row(d, r, x)?;
    let top = 64 * r.max(1) as i64;
    let mut sup: f64 = 0.0;
    for y in 1..=top {
        let c = row.overshoot_cdf(d, y);
        sup = sup.max((c - y as f64 / (r as f64 + y as f64)).abs());
    }
    let beyond = (1.0 - row.overshoot_cdf(d, top)).max(r as f64 / (r as f64 + top as f64));
    Ok((sup, beyond))
}

/// 1 - log[1 - (x+1)/(R+y)] / log[1 - (x+1)/R].
pub fn overshoot_prediction(r: f64, x: f64, y: f64) -> f64 {
    1.0 - (-(x + 1.0) / (r + y)).ln_1p() / (-(x + 1.0) / r).ln_1p()
}

fn need_window(ld: &LadderData, n: i64) -> Result<()> {
    if n < 0 || n as usize > ld.n {
        return Err(Error::Window(format!("grid reaches {n}, ladder window is {}", ld.n)));
    }
    Ok(())
}

fn frac_point(frac: f64, v: i64) -> usize {
    (frac * v as f64).round().max(0.0) as usize
}

/// sum_{t=R-x}^{R} P[X > t]
fn last_sites(d: &StepDistribution, r: usize, x: usize) -> f64 {
    (r - x..=r).map(|t| d.tail_plus(t as i64)).sum()
}

fn kernel(d: &StepDistribution, xs: &[i64], transient: bool) -> Result<Vec<(f64, f64)>> {
    let v = if transient {
        green_kernel_transient(d, xs)?
    } else {
        potential_kernel(d, xs, KernelMethod::Quadrature)?
    };
    Ok(v.into_iter().map(|k| (k.value, k.err)).collect())
}

/// Evaluate `f` on `grid` against exact values from `d` and `ld`.
pub fn evaluate(f: Formula, d: &StepDistribution, ld: &LadderData, grid: &[i64], opts: &Options) -> Result<ConvergenceReport> {
    check_applicable(f, d)?;
    if grid.is_empty() || grid.iter().any(|&g| g < 1) {
        return Err(Error::invalid("grid must be nonempty with points >= 1"));
    }
    let frac = opts.x_frac.unwrap_or(f.default_x_frac());
    let n = grid.len();
    let mut exact = Vec::with_capacity(n);
    let mut pred = Vec::with_capacity(n);
    let mut bound = Vec::with_capacity(n);
    let mut notes = Vec::new();
    let at = d.a_table(*grid.iter().max().unwrap() as usize + 1);
    let transient = d.meta.has(Tag::Transient);
    use Formula::*;
    match f {
        RenewalDensity => {
            for &x in grid {
                need_window(ld, x)?;
                let u = x as usize;
                exact.push(ld.u_a(u));
                pred.push(ld.U_a(u) * d.tail_plus(x) / at[u].abs());
                bound.push(ld.u_err(u));
            }
        }
        ExitProb | LowerBound => {
            let mut worst: f64 = f64::INFINITY;
            for &r in grid {
                need_window(ld, r)?;
                let e = exit_upward(d, r as usize)?;
                let p = ld.U_a(r as usize) * d.tail_plus(r);
                if f == ExitProb {
                    exact.push(e.p_up[0] / ld.v0);
                    pred.push(p);
                } else {
                    exact.push(e.p_up[0]);
                    pred.push(ld.v0 * p);
                    worst = worst.min(e.p_up[0] / (ld.v0 * p));
                }
                bound.push(e.residual);
            }
            if f == LowerBound {
                notes.push(format!("min ratio {worst:.6}"));
                if worst < 1.0 - 1e-9 {
                    notes.push("lower bound violated at finite R".into());
                }
            }
        }
        ExitProbX => {
            for &r in grid {
                need_window(ld, r)?;
                let ru = r as usize;
                let x = frac_point(frac, r).min(ru);
                let e = exit_upward(d, ru)?;
                exact.push(e.p_up[x]);
                pred.push(ld.V_d(x) * ld.U_a(ru) / (x as f64 + 1.0) * last_sites(d, ru, x));
                bound.push(e.residual);
            }
        }
        GreenNrs => {
            for &y in grid {
                need_window(ld, y)?;
                let yu = y as usize;
                let x = frac_point(frac, y).min(yu);
                let (g, ge) = spitzer_entry(ld, x, yu)?;
                exact.push(g);
                pred.push(ld.V_d(x) * ld.U_a(yu) / (at[yu].abs() * (x as f64 + 1.0)) * last_sites(d, yu, x));
                bound.push(ge);
            }
        }
        HitRatio => {
            let mut xs = vec![0i64];
            for &y in grid {
                xs.extend([y, -y]);
            }
            let k = kernel(d, &xs, transient)?;
            notes.push(if transient { "(G(-y)-G(y))/G(0)".into() } else { "(a(-y)-a(y))/a(-y)".to_string() });
            for (i, &y) in grid.iter().enumerate() {
                need_window(ld, y)?;
                let yu = y as usize;
                let x = frac_point(frac, y).min(yu.saturating_sub(1));
                let h = hit_before(ld, x, yu)?;
                let e = exit_upward(d, yu)?;
                let (gp, gpe) = k[1 + 2 * i];
                let (gm, gme) = k[2 + 2 * i];
                let den = if transient { k[0].0 } else { gm };
                exact.push(h.value / e.p_up[x]);
                pred.push((gm - gp) / den);
                bound.push(h.err / e.p_up[x] + (gpe + gme) / den.abs());
            }
        }
        Overshoot => {
            let mult = opts.y_mult.unwrap_or(1.0);
            for &r in grid {
                let ru = r as usize;
                let x = frac_point(frac, r).min(ru.saturating_sub(1));
                let y = (mult * r as f64).round().max(1.0) as i64;
                let row = exit_row(d, ru, x)?;
                exact.push(row.overshoot_cdf(d, y));
                pred.push(overshoot_prediction(r as f64, x as f64, y as f64));
                bound.push(row.residual);
            }
        }
        GreenPrs | GreenPrsRatio | DescendingDensity => {
            let mut xs = Vec::new();
            let pts: Vec<usize> = grid.iter().map(|&y| frac_point(frac, y)).collect();
            for (&y, &x) in grid.iter().zip(&pts) {
                xs.extend([y, -y, x as i64, x as i64 - y]);
            }
            let k = kernel(d, &xs, false)?;
            for (i, (&y, &x)) in grid.iter().zip(&pts).enumerate() {
                let yu = y as usize;
                need_window(ld, y.max(x as i64))?;
                let (ay, aye) = k[4 * i];
                let (amy, amye) = k[4 * i + 1];
                let (ax, axe) = k[4 * i + 2];
                let (axy, axye) = k[4 * i + 3];
                match f {
                    GreenPrs => {
                        let (g, ge) = spitzer_entry(ld, x, yu)?;
                        exact.push(g);
                        pred.push(ax - axy);
                        bound.push(ge + axe + axye);
                    }
                    GreenPrsRatio => {
                        let (g, ge) = spitzer_entry(ld, x, yu)?;
                        exact.push(g);
                        pred.push(ld.V_d(x) / ld.V_d(yu) * (ay - amy));
                        bound.push(ge + aye + amye);
                    }
                    _ => {
                        exact.push(ld.v_d(yu) * ld.U_a(yu));
                        pred.push(ay);
                        bound.push(ld.v_err(yu) * ld.U_a(yu) + aye);
                    }
                }
            }
        }
        KernelAsym | GreenAsym => {
            let mut xs = Vec::new();
            for &x in grid {
                xs.extend([x, -x]);
            }
            let k = kernel(d, &xs, f == GreenAsym)?;
            for (i, &x) in grid.iter().enumerate() {
                let (p, pe) = k[2 * i];
                let (m, me) = k[2 * i + 1];
                let a = at[x as usize];
                if f == KernelAsym {
                    exact.push(p - m);
                    pred.push(1.0 / a);
                } else {
                    exact.push(m - p);
                    pred.push(-1.0 / a);
                }
                bound.push(pe + me);
            }
        }
        GreenDiag => {
            let g0 = kernel(d, &[0], true)?[0];
            notes.push(format!("G(0) = {:.12}", g0.0));
            for &y in grid {
                need_window(ld, y)?;
                let (g, ge) = spitzer_entry(ld, y as usize, y as usize)?;
                exact.push(g);
                pred.push(g0.0);
                bound.push(ge + g0.1);
            }
        }
        StableUa | StableVd | HitStableEnd | HitStable | GreenStable | LadderConst => {
            let (ar, arh, est) = alpha_rho(d, ld);
            let alpha = ar + arh;
            if est {
                notes.push(format!("empirical rho: alpha rho = {ar:.6} from the slope of U_a"));
            }
            if alpha >= 2.0 {
                notes.push("alpha = 2 edge".into());
            }
            for &x in grid {
                need_window(ld, x)?;
                let u = x as usize;
                let xf = x as f64;
                match f {
                    StableUa => {
                        exact.push(xf * ld.u_a(u) / ld.U_a(u));
                        pred.push(ar);
                        bound.push(xf * ld.u_err(u) / ld.U_a(u));
                    }
                    StableVd => {
                        exact.push(xf * ld.v_d(u) / ld.V_d(u));
                        pred.push(arh);
                        bound.push(xf * ld.v_err(u) / ld.V_d(u));
                    }
                    HitStableEnd | HitStable => {
                        let xp = frac_point(frac, x).clamp(1, u);
                        let h = hit_before(ld, xp, u)?;
                        if f == HitStableEnd {
                            let s = ld.V_d(u) / ld.V_d(xp);
                            exact.push(h.value * s);
                            pred.push((alpha - 1.0) / arh);
                            bound.push(h.err * s);
                        } else {
                            let xi = xf / xp as f64;
                            let hl = h_lambda(xi, arh, alpha)? / h_lambda(1.0, arh, alpha)?;
                            exact.push(h.value);
                            pred.push(xi.powf(1.0 - ar) * hl * ld.V_d(xp) / ld.V_d(u));
                            bound.push(h.err);
                        }
                    }
                    GreenStable => {
                        let xp = frac_point(frac, x).clamp(1, u);
                        let (g, ge) = spitzer_entry(ld, xp, u)?;
                        let xpf = xp as f64;
                        exact.push(g);
                        pred.push(ar * ld.V_d(xp) * ld.U_a(u) * xf.powf(-ar) * xpf.powf(ar - 1.0) * h_lambda(xf / xpf, arh, alpha)?);
                        bound.push(ge);
                    }
                    _ => {
                        if ld.zhat_tail[ld.n] > 1e-6 {
                            return Err(Error::Applicability(vec!["descending ladder height is defective in the window".into()]));
                        }
                        let s: f64 = ld.zhat_tail[..u].iter().sum();
                        exact.push(ld.V_d(u) * s / xf);
                        pred.push(1.0 / (gamma(1.0 + arh) * gamma(2.0 - arh)));
                        bound.push(ld.v_err(u) * s / xf);
                    }
                }
            }
        }
        HitVsExit => {
            let mut worst: f64 = f64::INFINITY;
            for &r in grid {
                need_window(ld, r)?;
                let h = hit_before(ld, 0, r as usize)?;
                let e = exit_upward(d, r as usize)?;
                exact.push(h.value);
                pred.push(e.p_up[0]);
                bound.push(h.err);
                worst = worst.min(h.value / e.p_up[0]);
            }
            notes.push(format!("empirical c = {worst:.6}"));
        }
    }
    let mut rep = ConvergenceReport::new(f.id(), grid.to_vec(), exact, pred, bound, f.target());
    rep.notes.extend(notes);
    Ok(rep)
}
