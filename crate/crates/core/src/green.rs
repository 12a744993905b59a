//! Killed Green functions on intervals and half-lines, the potential kernel a(x)
//! and the transient Green kernel G(x).

use serde::{Deserialize, Serialize};

use crate::charfn::{self, KernelValue};
use crate::error::{Error, Result};
use crate::ladder::LadderData;
use crate::linalg::{Lu, Toeplitz};
use crate::stepdist::{StepDistribution, Tag};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Killing {
    /// Z minus [0, r]
    Interval { r: usize },
    /// (-inf, top]; Omega is top = -1
    HalfLine { top: i64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GreenMethod {
    LinearSolve,
    Spitzer,
    PotentialKernel,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreenTable {
    pub killing: Killing,
    /// x in 0..nx, y in 0..ny, row major
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<f64>,
    pub bracket: Option<Bracket>,
    pub method: GreenMethod,
    /// sup over the table of the error bound on `values`
    pub truncation_error: f64,
    /// sampled inf-norm residual of the linear solve, 0 if none
    pub residual: f64,
    /// truncation level of a half-line solve
    pub n_window: Option<usize>,
}

impl GreenTable {
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[x * self.ny + y]
    }
    pub fn lower(&self, x: usize, y: usize) -> f64 {
        self.bracket.as_ref().map_or(self.get(x, y), |b| b.lower[x * self.ny + y])
    }
    pub fn upper(&self, x: usize, y: usize) -> f64 {
        self.bracket.as_ref().map_or(self.get(x, y), |b| b.upper[x * self.ny + y])
    }
    pub fn row(&self, x: usize) -> &[f64] {
        &self.values[x * self.ny..(x + 1) * self.ny]
    }
}

fn killed(d: &StepDistribution, n: usize) -> Toeplitz {
    Toeplitz::killed(n, |k| d.pmf(k))
}

/// g_B(x, y) on [0, r]^2 for B = Z minus [0, r].
pub fn green_interval(d: &StepDistribution, r: usize) -> Result<GreenTable> {
    if r > 10_000 {
        return Err(Error::invalid(format!("R = {r} exceeds the dense budget 1e4")));
    }
    let n = r + 1;
    let t = killed(d, n);
    let mut g = t.inverse()?;
    let mut res = t.inverse_residual(&g, 48);
    if !(res <= 1e-10) {
        if n > 4000 {
            return Err(Error::Numerical(format!("Trench residual {res:.2e} and LU fallback too large")));
        }
        let dense = t.dense();
        let lu = Lu::factor(&dense)?;
        g = lu.inverse();
        res = t.inverse_residual(&g, n);
        if res > 1e-10 {
            for j in 0..n {
                let mut e = vec![0.0; n];
                e[j] = 1.0;
                let (c, _) = lu.solve_refined(&dense, &e, 2);
                for i in 0..n {
                    g.a[i * n + j] = c[i];
                }
            }
            res = t.inverse_residual(&g, n);
        }
        if !(res <= 1e-10) {
            return Err(Error::Numerical(format!("interval Green residual {res:.2e}")));
        }
    }
    Ok(GreenTable {
        killing: Killing::Interval { r },
        nx: n,
        ny: n,
        values: g.a,
        bracket: None,
        method: GreenMethod::LinearSolve,
        truncation_error: 0.0,
        residual: res,
        n_window: None,
    })
}

/// max |g(x, r-y) - g(y, r-x)| over the interval table.
pub fn symmetry_residual(g: &GreenTable) -> f64 {
    let r = g.nx - 1;
    let mut worst = 0.0f64;
    for x in 0..=r {
        for y in 0..=r {
            worst = worst.max((g.get(x, r - y) - g.get(y, r - x)).abs());
        }
    }
    worst
}

/// g_Omega(x, y) = sum_k v_d(x-k) u_a(y-k) with its propagated error.
pub fn spitzer_entry(ld: &LadderData, x: usize, y: usize) -> Result<(f64, f64)> {
    if x.max(y) > ld.n {
        return Err(Error::Window(format!("({x}, {y}) outside ladder window {}", ld.n)));
    }
    let (mut v, mut e) = (0.0, 0.0);
    for k in 0..=x.min(y) {
        v += ld.v_d[x - k] * ld.u_a[y - k];
        e += ld.v_err(x - k) * ld.u_a[y - k] + ld.v_d[x - k] * ld.u_err(y - k);
    }
    Ok((v, e + 1e-15 * v))
}

/// g_Omega on [0, x_max] x [0, y_max] from the ladder arrays.
pub fn green_halfline_spitzer(ld: &LadderData, x_max: usize, y_max: usize) -> Result<GreenTable> {
    if x_max.max(y_max) > ld.n {
        return Err(Error::Window(format!("table {x_max} x {y_max} outside ladder window {}", ld.n)));
    }
    let (nx, ny) = (x_max + 1, y_max + 1);
    let mut vals = vec![0.0; nx * ny];
    let mut errs = vec![0.0; nx * ny];
    for x in 0..nx {
        for y in 0..ny {
            let (pv, pe) = if x > 0 && y > 0 { (vals[(x - 1) * ny + y - 1], errs[(x - 1) * ny + y - 1]) } else { (0.0, 0.0) };
            vals[x * ny + y] = ld.v_d[x] * ld.u_a[y] + pv;
            errs[x * ny + y] = ld.v_err(x) * ld.u_a[y] + ld.v_d[x] * ld.u_err(y) + pe;
        }
    }
    for (e, v) in errs.iter_mut().zip(&vals) {
        *e += 1e-15 * v;
    }
    let sup = errs.iter().cloned().fold(0.0, f64::max);
    Ok(GreenTable {
        killing: Killing::HalfLine { top: -1 },
        nx,
        ny,
        bracket: Some(Bracket {
            lower: vals.iter().zip(&errs).map(|(v, e)| v - e).collect(),
            upper: vals.iter().zip(&errs).map(|(v, e)| v + e).collect(),
        }),
        values: vals,
        method: GreenMethod::Spitzer,
        truncation_error: sup,
        residual: 0.0,
        n_window: None,
    })
}

/// Bracket for g_Omega on [0, w]^2 from the chain killed outside [0, n].
/// lower: the truncated chain; upper adds P_x(exit above n) g(y,y) / (1 - P_y(exit above n)).
pub fn halfline_bracket(d: &StepDistribution, w: usize, n: usize) -> Result<GreenTable> {
    if w > n {
        return Err(Error::Window(format!("sub-window {w} exceeds truncation {n}")));
    }
    let t = killed(d, n + 1);
    let blk = t.inverse_block(w)?;
    let rhs: Vec<f64> = (0..=n).map(|x| d.tail_plus((n - x) as i64)).collect();
    let (up, res) = t.solve(&rhs)?;
    let k = w + 1;
    let lower = blk.a.clone();
    let mut upper = lower.clone();
    for x in 0..k {
        for y in 0..k {
            let esc = up[y].clamp(0.0, 1.0);
            upper[x * k + y] += up[x].max(0.0) * lower[y * k + y] / (1.0 - esc);
        }
    }
    let values: Vec<f64> = lower.iter().zip(&upper).map(|(a, b)| 0.5 * (a + b)).collect();
    let sup = lower.iter().zip(&upper).map(|(a, b)| 0.5 * (b - a)).fold(0.0, f64::max);
    Ok(GreenTable {
        killing: Killing::HalfLine { top: -1 },
        nx: k,
        ny: k,
        values,
        bracket: Some(Bracket { lower, upper }),
        method: GreenMethod::LinearSolve,
        truncation_error: sup,
        residual: res,
        n_window: Some(n),
    })
}

/// Largest relative bracket width (upper - lower)/upper.
pub fn relative_width(g: &GreenTable) -> f64 {
    match &g.bracket {
        None => 0.0,
        Some(b) => b.lower.iter().zip(&b.upper).map(|(l, u)| if *u > 0.0 { (u - l) / u } else { 0.0 }).fold(0.0, f64::max),
    }
}

/// Truncated-solve bracket for g_Omega on [0, w]^2, doubling the truncation until the
/// relative width is at most `tol` or `n_max` is passed.
pub fn green_halfline_solve(d: &StepDistribution, w: usize, tol: f64, n_max: usize) -> Result<GreenTable> {
    let mut n = (8 * (w + 1)).max(512).next_power_of_two() - 1;
    let mut width = f64::INFINITY;
    let mut prev: Option<Vec<f64>> = None;
    while n <= n_max {
        let mut g = halfline_bracket(d, w, n)?;
        if let (Some(p), Some(b)) = (&prev, g.bracket.as_mut()) {
            for (u, q) in b.upper.iter_mut().zip(p) {
                *u = u.min(*q);
            }
            for ((v, l), u) in g.values.iter_mut().zip(&b.lower).zip(&b.upper) {
                *v = 0.5 * (l + u);
            }
            g.truncation_error = b.lower.iter().zip(&b.upper).map(|(l, u)| 0.5 * (u - l)).fold(0.0, f64::max);
        }
        prev = g.bracket.as_ref().map(|b| b.upper.clone());
        width = relative_width(&g);
        if width <= tol {
            return Ok(g);
        }
        n = 2 * n + 1;
    }
    Err(Error::Truncation { what: format!("half-line bracket on [0,{w}] at N <= {n_max}"), achieved: width })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelMethod {
    Series,
    Quadrature,
}

/// a(x) = sum_n (P[S_n = 0] - P[S_n = -x]) for a recurrent walk.
pub fn potential_kernel(d: &StepDistribution, xs: &[i64], method: KernelMethod) -> Result<Vec<KernelValue>> {
    if d.meta.has(Tag::Transient) || d.mean().map_or(false, |m| m.abs() > 1e-12) {
        return Err(Error::Applicability(vec!["1/(1 - phi) is not integrable at 0: transient walk".into()]));
    }
    let x_max = xs.iter().map(|x| x.unsigned_abs()).max().unwrap_or(0);
    match method {
        KernelMethod::Quadrature => {
            if x_max > 100_000 {
                return Err(Error::invalid("quadrature limited to |x| <= 1e5"));
            }
            Ok(charfn::potential_kernel_quad(d, xs))
        }
        KernelMethod::Series => {
            if x_max > 1000 {
                return Err(Error::invalid("series limited to |x| <= 1e3"));
            }
            let l_max = if d.is_bounded() { 1 << 16 } else { 1 << 23 };
            Ok(charfn::potential_kernel_series(d, xs, l_max))
        }
    }
}

/// G(x) = sum_n P[S_n = x] for a transient walk.
pub fn green_kernel_transient(d: &StepDistribution, xs: &[i64]) -> Result<Vec<KernelValue>> {
    if d.meta.has(Tag::Recurrent) {
        return Err(Error::Applicability(vec!["sum_n P[S_n = x] diverges: recurrent walk".into()]));
    }
    let g = charfn::green_kernel_quad(d, xs)?;
    if g.iter().any(|v| !(v.value > -v.err)) {
        return Err(Error::Numerical("negative Green kernel value".into()));
    }
    Ok(g)
}

/// Hitting law of (-inf, 0] from x >= 1 for a bounded walk:
/// P_x[S_sigma = z] = sum_{w=1}^{m} g_Omega(x-1, w-1) p(z - w), z in (-m, 0].
fn entrance_law(d: &StepDistribution, ld: &LadderData, x: usize) -> Result<Vec<(i64, f64, f64)>> {
    let m = -d.support_min().ok_or_else(|| Error::invalid("needs bounded support"))?;
    let mut out = Vec::new();
    for z in (1 - m.max(1))..=0 {
        let (mut p, mut e) = (0.0, 0.0);
        for w in 1..=m.max(1) {
            let q = d.pmf(z - w);
            if q > 0.0 {
                let (g, ge) = spitzer_entry(ld, x - 1, (w - 1) as usize)?;
                p += g * q;
                e += ge * q;
            }
        }
        out.push((z, p, e));
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct LaddRow {
    pub x: i64,
    /// E_x[a(S at entrance to (-inf, 0])]
    pub lhs: f64,
    /// a(x) - V_d(x-1)/(2 EZ), V_d the weak descending renewal function (v_d(0) = v_0)
    pub rhs: f64,
    /// the literal a(x) - V_d(x-1)/EZ; agrees with `rhs` only when V_d has slope 2 (srw)
    pub rhs_literal: f64,
    pub residual: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GgRow {
    pub x: i64,
    pub y: i64,
    /// g(x,y) - E_x[g(S, y)] with g(x,y) = a(x) + a(-y) - a(x-y)
    pub lhs: f64,
    /// g_{(-inf,0]}(x, y) = g_Omega(x-1, y-1)
    pub rhs: f64,
    pub residual: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LaddReport {
    pub ez: f64,
    pub ladd: Vec<LaddRow>,
    pub gg: Vec<GgRow>,
    /// both identities are stated for killing on (-inf, 0]
    pub convention: &'static str,
}

/// Residuals of E_x[a(S_sigma)] = a(x) - V(x-1)/EZ and of the (g/g) identity, with
/// sigma the entrance time of (-inf, 0], on x_grid (and y in x_grid for (g/g)).
pub fn check_ladd_identity(d: &StepDistribution, ld: &LadderData, x_grid: &[i64]) -> Result<LaddReport> {
    let mut why = Vec::new();
    if !d.is_bounded() {
        why.push("hitting law is exact only for bounded support".to_string());
    }
    if !d.meta.has(Tag::Recurrent) {
        why.push("a(x) needs a recurrent walk".to_string());
    }
    if x_grid.iter().any(|&x| x < 1 || x as usize > ld.n) {
        why.push(format!("grid must lie in [1, {}]", ld.n));
    }
    if !why.is_empty() {
        return Err(Error::Applicability(why));
    }
    let ez = ld.ez(1e-12).ok_or_else(|| Error::Applicability(vec!["EZ numerically infinite; (ladd) skipped".into()]))?;
    let m = -d.support_min().unwrap();
    let mut pts: Vec<i64> = Vec::new();
    for &x in x_grid {
        pts.push(x);
        for &y in x_grid {
            pts.extend([-y, x - y]);
            for z in (1 - m.max(1))..=0 {
                pts.push(z - y);
            }
        }
    }
    pts.extend((1 - m.max(1))..=0);
    pts.sort_unstable();
    pts.dedup();
    let av = potential_kernel(d, &pts, KernelMethod::Quadrature)?;
    let a = |x: i64| {
        let i = pts.binary_search(&x).unwrap();
        (av[i].value, av[i].err)
    };
    let mut ladd = Vec::new();
    let mut gg = Vec::new();
    for &x in x_grid {
        let law = entrance_law(d, ld, x as usize)?;
        let (mut lhs, mut bound) = (0.0, 0.0);
        for &(z, p, e) in &law {
            let (az, aze) = a(z);
            lhs += p * az;
            bound += e * az.abs() + p * aze;
        }
        let (ax, axe) = a(x);
        let xu = (x - 1) as usize;
        let rhs = ax - 0.5 * ld.V_d(xu) / ez;
        let rhs_literal = ax - ld.V_d(xu) / ez;
        bound += axe + (ld.v_err(xu) * (xu + 1) as f64 + ld.V_d(xu) * ld.psi_err) / ez + 1e-12 * ax.abs().max(1.0);
        ladd.push(LaddRow { x, lhs, rhs, rhs_literal, residual: lhs - rhs, bound });
        for &y in x_grid {
            let g = |u: i64| {
                let (a1, e1) = a(u);
                let (a2, e2) = a(-y);
                let (a3, e3) = a(u - y);
                (a1 + a2 - a3, e1 + e2 + e3)
            };
            let (gx, gxe) = g(x);
            let (mut lhs, mut bound) = (gx, gxe);
            for &(z, p, e) in &law {
                let (gz, gze) = g(z);
                lhs -= p * gz;
                bound += e * gz.abs() + p * gze;
            }
            let (rhs, re) = spitzer_entry(ld, xu, (y - 1) as usize)?;
            bound += re + 1e-12 * rhs.abs().max(1.0);
            gg.push(GgRow { x, y, lhs, rhs, residual: lhs - rhs, bound });
        }
    }
    Ok(LaddReport { ez, ladd, gg, convention: "(-inf,0]" })
}

#[derive(Clone, Debug, Serialize)]
pub struct DefectReport {
    pub r: usize,
    pub ys: Vec<usize>,
    /// max over x < r and y in ys of |g_B + E_x[g_Omega(S, y); Lambda] - g_Omega|
    pub max_residual: f64,
    /// max over the same set of the combined bound (ladder error, overshoot truncation, solve residual)
    pub max_bound: f64,
    /// max of residual / bound
    pub worst_ratio: f64,
    pub overshoot_cutoff: usize,
}

/// Checks g_{B(r)}(x,y) + E_x[g_Omega(S_{sigma(r,inf)}, y); Lambda_r] = g_Omega(x,y) for
/// 0 <= x < r and y in ys, with the overshoot summed up to the ladder window.
pub fn check_defect_identity(d: &StepDistribution, ld: &LadderData, gb: &GreenTable, ys: &[usize]) -> Result<DefectReport> {
    let Killing::Interval { r } = gb.killing else {
        return Err(Error::invalid("needs an interval table"));
    };
    if ys.iter().any(|&y| y >= r) || ld.n <= r {
        return Err(Error::Window(format!("need y < r = {r} < ladder window {}", ld.n)));
    }
    let zmax = ld.n - r;
    let mut max_residual = 0.0f64;
    let mut max_bound = 0.0f64;
    let mut worst_ratio = 0.0f64;
    let pm: Vec<f64> = (0..=(r + zmax) as i64).map(|k| d.pmf(k)).collect();
    for &y in ys {
        let (gyy, gyy_e) = spitzer_entry(ld, y, y)?;
        // g_Omega(r + z, y) for z = 1..=zmax
        let gz: Vec<(f64, f64)> = (1..=zmax).map(|z| spitzer_entry(ld, r + z, y)).collect::<Result<_>>()?;
        // K(w) = sum_z p(r + z - w) g_Omega(r + z, y), remainder bounded by tail_plus * g(y,y)
        let mut k = vec![0.0; r + 1];
        let mut ke = vec![0.0; r + 1];
        for w in 0..=r {
            let (mut s, mut e) = (0.0, 0.0);
            for (i, &(g, ge)) in gz.iter().enumerate() {
                let q = pm[r + i + 1 - w];
                s += q * g;
                e += q * ge;
            }
            k[w] = s;
            ke[w] = e + d.tail_plus((r + zmax - w) as i64) * (gyy + gyy_e);
        }
        for x in 0..r {
            let row = gb.row(x);
            let (mut lhs, mut bound) = (row[y], 0.0);
            for w in 0..=r {
                lhs += row[w] * k[w];
                bound += row[w] * ke[w];
            }
            let (rhs, re) = spitzer_entry(ld, x, y)?;
            bound += re + gb.residual * row.iter().sum::<f64>() * (1.0 + k.iter().cloned().fold(0.0, f64::max)) + 1e-12 * rhs;
            let res = (lhs - rhs).abs();
            max_residual = max_residual.max(res);
            max_bound = max_bound.max(bound);
            worst_ratio = worst_ratio.max(res / bound);
        }
    }
    Ok(DefectReport { r, ys: ys.to_vec(), max_residual, max_bound, worst_ratio, overshoot_cutoff: zmax })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ladder::compute_ladder;
    use crate::stepdist::{finite, lazy_srw, srw, zipf_pair};

    #[test]
    fn srw_interval_small() {
        let g = green_interval(&srw(), 1).unwrap();
        let want = [4.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0, 4.0 / 3.0];
        for (a, b) in g.values.iter().zip(want) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    // depth-limited enumeration of visits to 50 from 50 before leaving [0, 100]
    #[test]
    fn srw_interval_against_enumeration() {
        let g = green_interval(&srw(), 100).unwrap();
        let mut dist = vec![0.0; 101];
        dist[50] = 1.0;
        let mut visits = 1.0;
        let mut alive = 1.0;
        let mut steps = 0;
        while alive > 1e-15 {
            let mut next = vec![0.0; 101];
            for x in 0..=100usize {
                if x > 0 {
                    next[x - 1] += 0.5 * dist[x];
                }
                if x < 100 {
                    next[x + 1] += 0.5 * dist[x];
                }
            }
            dist = next;
            visits += dist[50];
            alive = dist.iter().sum();
            steps += 1;
        }
        // geometric tail: alive mass decays at least like cos(pi/102)^n
        let rate = (std::f64::consts::PI / 102.0).cos();
        let tail = alive / (1.0 - rate);
        assert!(steps > 1000);
        assert!((g.get(50, 50) - visits).abs() <= tail + 1e-10, "{} {visits}", g.get(50, 50));
        assert!((g.get(50, 50) - 51.0 * 51.0 * 2.0 / 102.0).abs() < 1e-9);
    }

    #[test]
    fn interval_symmetry() {
        let d = finite(&[(-2, 0.3), (-1, 0.1), (0, 0.1), (1, 0.2), (3, 0.3)]).unwrap();
        let g = green_interval(&d, 300).unwrap();
        assert!(g.residual < 1e-10);
        assert!(symmetry_residual(&g) < 1e-10);
        assert!(g.values.iter().all(|&v| v > -1e-14));
    }

    #[test]
    fn srw_spitzer_closed_form() {
        let ld = compute_ladder(&srw(), 64, None).unwrap();
        let g = green_halfline_spitzer(&ld, 40, 40).unwrap();
        for x in 0..=40 {
            for y in 0..=40 {
                assert!((g.get(x, y) - 2.0 * (x.min(y) + 1) as f64).abs() < 1e-9);
            }
        }
        assert!((g.get(3, 3) - 8.0).abs() < 1e-12);
    }

    #[test]
    fn brackets_nest_and_contain_spitzer() {
        let d = lazy_srw(0.2).unwrap();
        let ld = compute_ladder(&d, 64, None).unwrap();
        let s = green_halfline_spitzer(&ld, 20, 20).unwrap();
        let a = halfline_bracket(&d, 20, 255).unwrap();
        let b = halfline_bracket(&d, 20, 1023).unwrap();
        for x in 0..=20 {
            for y in 0..=20 {
                assert!(a.lower(x, y) <= b.lower(x, y) + 1e-12);
                assert!(b.lower(x, y) - 1e-9 <= s.get(x, y) && s.get(x, y) <= b.upper(x, y) + 1e-9);
            }
        }
        let g = green_halfline_solve(&srw(), 3, 0.01, 1 << 14).unwrap();
        assert!(g.n_window.unwrap() > 255);
        assert!(g.lower(3, 3) <= 8.0 && 8.0 <= g.upper(3, 3));
    }

    #[test]
    fn srw_kernel() {
        let xs: Vec<i64> = (-50..=50).collect();
        for m in [KernelMethod::Series, KernelMethod::Quadrature] {
            let a = potential_kernel(&srw(), &xs, m).unwrap();
            assert!(a.iter().all(|v| (v.value - v.x.abs() as f64).abs() < 1e-8));
        }
        assert!(potential_kernel(&zipf_pair(0.3, 0.7).unwrap(), &[1], KernelMethod::Quadrature).is_err());
        assert!(green_kernel_transient(&srw(), &[0]).is_err());
    }

    #[test]
    fn ladd_on_bounded_walks() {
        let grid = [1i64, 2, 5, 17, 60];
        for d in [srw(), finite(&[(-2, 0.3), (-1, 0.2), (0, 0.1), (1, 0.2), (3, 0.2)]).unwrap()] {
            let ld = compute_ladder(&d, 128, None).unwrap();
            let rep = check_ladd_identity(&d, &ld, &grid).unwrap();
            for r in &rep.ladd {
                assert!(r.residual.abs() < 1e-8 && r.residual.abs() <= r.bound, "{} {r:?}", d.meta.family);
            }
            for r in &rep.gg {
                assert!(r.residual.abs() < 1e-8 && r.residual.abs() <= r.bound, "{} {r:?}", d.meta.family);
            }
        }
    }
}
