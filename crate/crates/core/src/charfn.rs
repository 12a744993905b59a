//! 1 - phi(theta) at arbitrary theta, accurate near theta = 0, and the quadratures
//! built on it (potential kernel a(x), transient Green kernel G(x)).
//!
//! Tails are handled by summation by parts: with S(k) = P[X > k] for k >= h,
//!   sum_{x>h} p(x)(1 - e^{i t x}) = S(h)(1 - e^{i t(h+1)}) - (e^{i t} - 1) sum_{k>h} S(k) e^{i t k},
//! and the oscillatory sum is evaluated by Abel-Plana plus a rotated contour.

use std::f64::consts::PI;
use std::sync::OnceLock;

use gauss_quad::{GaussLaguerre, GaussLegendre};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fourier;
use crate::stepdist::{StepDistribution, Tag, Tail, TailShape};

type C = Complex64;
const E: f64 = std::f64::consts::E;

fn legendre() -> &'static [(f64, f64)] {
    static R: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    R.get_or_init(|| GaussLegendre::new(20).expect("degree").into_node_weight_pairs())
}

fn laguerre() -> &'static [(f64, f64)] {
    static R: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    R.get_or_init(|| GaussLaguerre::new(48, 0.0).expect("degree").into_node_weight_pairs())
}

/// 20-point Gauss-Legendre on [a, b].
pub fn gl<T>(a: f64, b: f64, mut f: impl FnMut(f64) -> T) -> T
where
    T: std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T> + Default,
{
    let h = 0.5 * (b - a);
    let m = 0.5 * (a + b);
    let mut acc = T::default();
    for &(x, w) in legendre() {
        acc = acc + f(m + h * x) * (w * h);
    }
    acc
}

/// 1 - e^{ia} without cancellation.
#[inline]
fn one_minus_cis(a: f64) -> C {
    let s = (0.5 * a).sin();
    C::new(2.0 * s * s, -a.sin())
}

/// sum_{k>=k0} f(k) e^{i t k} for f analytic and decaying in Re z > 0, 0 < t <= pi.
pub fn osc_sum(f: &dyn Fn(C) -> C, k0: i64, t: f64) -> C {
    let k1 = k0.max(32);
    let mut acc = C::new(0.0, 0.0);
    for k in k0..k1 {
        acc += f(C::new(k as f64, 0.0)) * C::from_polar(1.0, t * k as f64);
    }
    let a = k1 as f64;
    let g = |z: C| f(z) * (C::i() * t * z).exp();
    // Abel-Plana: sum_{k>=a} g(k) = int_a^inf g + g(a)/2 + i int_0^inf [g(a+iy) - g(a-iy)]/(e^{2 pi y} - 1) dy
    acc += g(C::new(a, 0.0)) * 0.5;
    let ap = |y: f64| {
        let d = g(C::new(a, y)) - g(C::new(a, -y));
        d * C::i() / (2.0 * PI * y).exp_m1()
    };
    let mut lo = 0.0;
    for hi in [0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 14.0] {
        acc += gl(lo, hi, ap);
        lo = hi;
    }
    // int_a^inf f(x) e^{itx} dx: real axis up to X ~ 16/t, then rotate upward
    let x_top = (16.0 / t).max(a);
    let mut p = a;
    while p < x_top {
        let q = (2.0 * p).min(p + 2.0 / t).min(x_top);
        acc += gl(p.ln(), q.ln(), |u| {
            let x = u.exp();
            g(C::new(x, 0.0)) * x
        });
        p = q;
    }
    let phase = C::from_polar(1.0, t * x_top);
    let mut rot = C::new(0.0, 0.0);
    for &(u, w) in laguerre() {
        rot += f(C::new(x_top, u / t)) * w;
    }
    acc + C::i() * phase * rot / t
}

/// sum_{k>h} S(k) e^{i t k} for the tail, S(k) = weight * s(k)/s(h).
fn tail_transform(tl: &Tail, t: f64) -> C {
    let h = tl.start;
    let norm = tl.weight / tl.shape.s(h as f64);
    match tl.shape {
        TailShape::Zipf => {
            // sum_{k>h} e^{itk}/(k+1) = e^{-it} [-log(1-e^{it}) - sum_{m=1}^{h+1} e^{itm}/m]
            let neg_log = C::new(-(2.0 * (0.5 * t).sin()).ln(), -(t - PI) / 2.0);
            let mut fin = C::new(0.0, 0.0);
            for m in 1..=h + 1 {
                fin += C::from_polar(1.0 / m as f64, t * m as f64);
            }
            norm * C::from_polar(1.0, -t) * (neg_log - fin)
        }
        TailShape::Power { alpha } => {
            let f = move |z: C| (z.ln() * (1.0 - alpha)).exp();
            norm * telescoped(&f, h + 1, t)
        }
        TailShape::Log => {
            let f = |z: C| (z + E).ln().inv();
            norm * telescoped(&f, h + 1, t)
        }
    }
}

/// sum_{k>=k0} (f(k) - f(k+1)) e^{itk} = f(k0) e^{i t k0} + (1 - e^{-it}) sum_{k>k0} f(k) e^{itk}.
fn telescoped(f: &dyn Fn(C) -> C, k0: i64, t: f64) -> C {
    f(C::new(k0 as f64, 0.0)) * C::from_polar(1.0, t * k0 as f64) + one_minus_cis(-t) * osc_sum(f, k0 + 1, t)
}

/// sum_{x>h} p(x)(1 - e^{itx}) for a tail on the positive side, 0 < t <= pi.
fn tail_part(tl: &Tail, t: f64) -> C {
    if tl.weight == 0.0 {
        return C::new(0.0, 0.0);
    }
    // e^{it} - 1 = -(1 - e^{it})
    tl.weight * one_minus_cis(t * (tl.start + 1) as f64) + one_minus_cis(t) * tail_transform(tl, t)
}

/// 1 - e^{ia} + ia without cancellation.
#[inline]
fn centered_cis(a: f64) -> C {
    let s = (0.5 * a).sin();
    let odd = if a.abs() < 1e-2 {
        let a3 = a * a * a;
        a3 / 6.0 * (1.0 - a * a / 20.0 * (1.0 - a * a / 42.0))
    } else {
        a - a.sin()
    };
    C::new(2.0 * s * s, odd)
}

/// 1 - phi(t) = E[1 - e^{itX}]. With a finite mean the walk is centred first,
/// 1 - phi = E[1 - e^{itX} + itX] - itEX, and EX is taken as exactly 0 for mean-zero builders.
pub fn one_minus_phi(d: &StepDistribution, t: f64) -> C {
    let mut t = t;
    if t.abs() > PI {
        t = (t + PI).rem_euclid(2.0 * PI) - PI;
        if t <= -PI {
            t += 2.0 * PI;
        }
    }
    if t == 0.0 {
        return C::new(0.0, 0.0);
    }
    if t < 0.0 {
        return one_minus_phi(d, -t).conj();
    }
    let lo = d.core_lo();
    let mean = d.mean();
    let mut acc = C::new(0.0, 0.0);
    for (i, &p) in d.core().iter().enumerate() {
        if p != 0.0 {
            let a = t * (lo + i as i64) as f64;
            acc += p * if mean.is_some() { centered_cis(a) } else { one_minus_cis(a) };
        }
    }
    let moment = |tl: &Tail| {
        if mean.is_some() && tl.weight > 0.0 {
            (tl.start + 1) as f64 * tl.weight + tl.surv_sum(tl.start + 1, None)
        } else {
            0.0
        }
    };
    if let Some(tl) = d.plus_tail() {
        acc += tail_part(tl, t) + C::new(0.0, t * moment(tl));
    }
    if let Some(tl) = d.minus_tail() {
        acc += (tail_part(tl, t) + C::new(0.0, t * moment(tl))).conj();
    }
    if let Some(m) = mean {
        if !d.meta.has(Tag::MeanZero) {
            acc -= C::new(0.0, t * m);
        }
    }
    acc
}

/// A kernel value with an absolute error estimate.
#[derive(Clone, Debug, Serialize)]
pub struct KernelValue {
    pub x: i64,
    pub value: f64,
    pub err: f64,
    pub method: &'static str,
}

/// Gauss nodes on the dyadic level [pi 2^-(j+1), pi 2^-j], fine enough for phase x_max * theta.
fn level_nodes(j: i32, x_max: f64) -> Vec<(f64, f64)> {
    let hi = PI * 2f64.powi(-j);
    let lo = 0.5 * hi;
    let m = ((hi - lo) * x_max / 2.0).ceil().max(1.0) as usize;
    let w = (hi - lo) / m as f64;
    let mut out = Vec::with_capacity(20 * m);
    for i in 0..m {
        let a = lo + w * i as f64;
        for &(u, wt) in legendre() {
            out.push((a + 0.5 * w * (u + 1.0), 0.5 * w * wt));
        }
    }
    out
}

/// (1/pi) int_0^pi f(x, t, 1 - phi(t)) dt for each x, level by level toward 0.
/// Stops once a level adds less than `rel` of the running total (or at `t_min`);
/// returns totals, the size of the last level (remainder proxy) and the last lower edge.
fn dyadic_quad(
    d: &StepDistribution,
    xs: &[i64],
    f: impl Fn(i64, f64, C) -> f64 + Sync,
    rel: f64,
    t_min: f64,
) -> (Vec<f64>, Vec<f64>, f64) {
    let x_max = xs.iter().map(|x| x.unsigned_abs()).max().unwrap_or(0).max(1) as f64;
    let mut tot = vec![0.0; xs.len()];
    let mut last = vec![0.0; xs.len()];
    let mut quiet = 0;
    let mut j = 0;
    loop {
        let nodes = level_nodes(j, x_max);
        let dv: Vec<C> = nodes.par_iter().map(|&(t, _)| one_minus_phi(d, t)).collect();
        let mut small = true;
        for (i, &x) in xs.iter().enumerate() {
            let mut c = 0.0;
            for (&(t, w), &dd) in nodes.iter().zip(&dv) {
                c += w * f(x, t, dd);
            }
            c /= PI;
            tot[i] += c;
            last[i] = c;
            if c.abs() > rel * tot[i].abs() {
                small = false;
            }
        }
        let edge = PI * 2f64.powi(-j - 1);
        quiet = if small { quiet + 1 } else { 0 };
        if quiet >= 3 || edge < t_min {
            return (tot, last, edge);
        }
        j += 1;
    }
}

/// Re[(1 - e^{ixt}) / D].
#[inline]
fn pk_integrand(x: i64, t: f64, d: C) -> f64 {
    let n = one_minus_cis(x as f64 * t);
    let r = d.norm();
    (n.re * (d.re / r) + n.im * (d.im / r)) / r
}

/// a(x) = (1/pi) int_0^pi Re[(1 - e^{ixt})/(1 - phi(t))] dt.
pub fn potential_kernel_quad(d: &StepDistribution, xs: &[i64]) -> Vec<KernelValue> {
    let (tot, last, _) = dyadic_quad(d, xs, pk_integrand, 1e-17, 1e-100);
    xs.iter()
        .zip(tot.iter().zip(&last))
        .map(|(&x, (&v, &l))| KernelValue {
            x,
            value: if x == 0 { 0.0 } else { v },
            err: if x == 0 { 0.0 } else { l.abs() + 1e-14 * v.abs() },
            method: "quadrature",
        })
        .collect()
}

/// 1 - phi on the cycle of length l, k = 0..l.
fn cycle_defect(d: &StepDistribution, l: usize) -> Vec<C> {
    if d.is_bounded() {
        let li = l as i64;
        return (0..li)
            .map(|k| {
                let ks = if 2 * k > li { k - li } else { k };
                one_minus_phi(d, 2.0 * PI * ks as f64 / l as f64)
            })
            .collect();
    }
    let p = fourier::folded_pmf(d, l);
    let mut buf: Vec<C> = p.iter().map(|&v| C::new(v, 0.0)).collect();
    FftPlanner::<f64>::new().plan_fft_inverse(l).process(&mut buf);
    buf.iter().map(|v| C::new(1.0, 0.0) - v).collect()
}

/// a_L(x) = sum_n [P(S_n = 0) - P(S_n = -x)] for the walk folded onto Z/LZ,
/// i.e. the trapezoid sum of the Fourier integral; `f0` is the integrand limit at 0.
pub fn potential_kernel_cycle(d: &StepDistribution, xs: &[i64], l: usize) -> Vec<f64> {
    let dv = cycle_defect(d, l);
    let mut w: Vec<C> = dv.iter().map(|&z| if z.norm_sqr() > 0.0 { z.inv() } else { C::new(0.0, 0.0) }).collect();
    w[0] = C::new(0.0, 0.0);
    let sum_re: f64 = w.iter().map(|z| z.re).sum();
    FftPlanner::<f64>::new().plan_fft_forward(l).process(&mut w);
    // forward transform gives sum_k w_k e^{-2 pi i k m / L}; e^{ixt} needs m = -x
    let moments = d.is_bounded().then(|| central_moments(d));
    xs.iter()
        .map(|&x| {
            let m = (-x).rem_euclid(l as i64) as usize;
            let f0 = match moments {
                Some((s2, m3)) if s2 > 0.0 => {
                    let xf = x as f64;
                    xf * xf / s2 - 2.0 * xf * m3 / (3.0 * s2 * s2)
                }
                _ => 0.0,
            };
            (sum_re - w[m].re + f0) / l as f64
        })
        .collect()
}

fn central_moments(d: &StepDistribution) -> (f64, f64) {
    let lo = d.core_lo();
    let mut m = [0.0; 4];
    for (i, &p) in d.core().iter().enumerate() {
        let x = (lo + i as i64) as f64;
        m[1] += p * x;
        m[2] += p * x * x;
        m[3] += p * x * x * x;
    }
    let mu = m[1];
    (m[2] - mu * mu, m[3] - 3.0 * mu * m[2] + 2.0 * mu.powi(3))
}

/// a(x) from the cycle sums at doubling L. Bounded walks converge geometrically (the
/// integrand is analytic); heavy tails are extrapolated assuming an error c1 h log h + c2 h,
/// and the extrapolants are Aitken-accelerated.
pub fn potential_kernel_series(d: &StepDistribution, xs: &[i64], l_max: usize) -> Vec<KernelValue> {
    let x_max = xs.iter().map(|x| x.unsigned_abs()).max().unwrap_or(1) as usize;
    let l0 = (8 * x_max).next_power_of_two().max(1 << 10);
    if d.is_bounded() {
        // geometric convergence until roundoff (growing like L) takes over
        let mut l = l0;
        let mut prev = potential_kernel_cycle(d, xs, l);
        let mut best: Option<(Vec<f64>, f64)> = None;
        while l < l_max {
            l *= 2;
            let cur = potential_kernel_cycle(d, xs, l);
            let diff = cur.iter().zip(&prev).map(|(a, b)| (a - b).abs() / a.abs().max(1.0)).fold(0.0, f64::max);
            if best.as_ref().map_or(false, |(_, e)| diff >= *e) {
                break;
            }
            best = Some((prev, diff));
            prev = cur;
        }
        let (vals, e) = best.unwrap_or((prev, f64::INFINITY));
        return xs
            .iter()
            .zip(&vals)
            .map(|(&x, &v)| KernelValue { x, value: v, err: e * v.abs().max(1.0) + 1e-14 * v.abs(), method: "series" })
            .collect();
    }
    let ls: Vec<usize> = (0..6).rev().map(|k| l_max >> k).collect();
    let vals: Vec<Vec<f64>> = ls.iter().map(|&l| potential_kernel_cycle(d, xs, l)).collect();
    let basis = |l: usize| {
        let h = 2.0 * PI / l as f64;
        [1.0, h * h.ln(), h]
    };
    let fit = |k: usize, i: usize| {
        let rows: Vec<[f64; 3]> = (k..k + 3).map(|j| basis(ls[j])).collect();
        let rhs: Vec<f64> = (k..k + 3).map(|j| vals[j][i]).collect();
        solve3(&rows, &rhs)
    };
    // the fitted values still converge geometrically in log L; Aitken removes that
    let aitken = |a: f64, b: f64, c: f64| {
        let den = (c - b) - (b - a);
        if den.abs() > 1e-300 && ((c - b) / (b - a)).abs() < 1.0 {
            c - (c - b) * (c - b) / den
        } else {
            c
        }
    };
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let e: Vec<f64> = (0..4).map(|k| fit(k, i)).collect();
            let fine = aitken(e[1], e[2], e[3]);
            let coarse = aitken(e[0], e[1], e[2]);
            KernelValue { x, value: fine, err: (fine - coarse).abs().max((fine - e[3]).abs() * 0.1), method: "series" }
        })
        .collect()
}

/// First component of the solution of a 3x3 system (Cramer).
fn solve3(a: &[[f64; 3]], b: &[f64]) -> f64 {
    let det = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let m = [a[0], a[1], a[2]];
    let mut m0 = m;
    for r in 0..3 {
        m0[r][0] = b[r];
    }
    det(m0) / det(m)
}

/// G(x) = (1/pi) int_0^pi Re[e^{-ixt}/(1 - phi(t))] dt for a transient walk with zipf tails.
/// Below t_m the defect is modelled as t (A + i(B log(1/t) + C)) and integrated in closed form.
pub fn green_kernel_quad(d: &StepDistribution, xs: &[i64]) -> Result<Vec<KernelValue>> {
    let zipf = |t: Option<&Tail>| t.map_or(false, |t| t.shape == TailShape::Zipf && t.weight > 0.0);
    if !(zipf(d.plus_tail()) || zipf(d.minus_tail())) {
        return Err(Error::Applicability(vec!["G(x) quadrature needs a zipf tail (log-squared integrand tail)".into()]));
    }
    let x_max = xs.iter().map(|x| x.unsigned_abs()).max().unwrap_or(0).max(1) as f64;
    let t_m = 1e-9 / x_max;
    let integrand = |x: i64, t: f64, dd: C| {
        let z = C::from_polar(1.0, -(x as f64) * t) / dd;
        z.re
    };
    let (tot, _, edge) = dyadic_quad(d, xs, integrand, 0.0, t_m);
    let model = |t: f64| one_minus_phi(d, t) / t;
    let (m1, m2) = (model(edge), model(edge * 1e-3));
    let (s1, s2) = ((1.0 / edge).ln(), (1.0 / (edge * 1e-3)).ln());
    let a = m1.re;
    let b = (m1.im - m2.im) / (s1 - s2);
    let c = m1.im - b * s1;
    if b == 0.0 || a <= 0.0 {
        return Err(Error::Numerical("degenerate small-angle model".into()));
    }
    // int_0^edge A/(t (A^2 + (B s + C)^2)) dt, s = log(1/t)
    let tail = (0.5 * PI - b.signum() * ((b * s1 + c) / a).atan()) / b.abs() / PI;
    // model misfit: relative drift of A between the two fit points
    let drift = ((m2.re - a) / a).abs();
    Ok(xs
        .iter()
        .zip(&tot)
        .map(|(&x, &v)| {
            let xe = x as f64 * edge;
            let err = tail * (drift + xe * xe) + 1e-13 * v.abs();
            KernelValue { x, value: v + tail, err, method: "quadrature" }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::folded_pmf;
    use crate::stepdist::{finite, lazy_srw, log_regular, srw, stable_like, zipf_pair};

    fn fft_defect(d: &StepDistribution, l: usize) -> Vec<C> {
        let p = folded_pmf(d, l);
        let mut buf: Vec<C> = p.iter().map(|&v| C::new(v, 0.0)).collect();
        // phi(2 pi k / L) = sum_x p(x) e^{2 pi i k x/L}: inverse transform without scaling
        FftPlanner::<f64>::new().plan_fft_inverse(l).process(&mut buf);
        buf.iter().map(|v| C::new(1.0, 0.0) - v).collect()
    }

    #[test]
    fn bounded_against_fft() {
        let l = 1 << 14;
        let d = finite(&[(-1, 0.5), (0, 0.1), (1, 0.3), (2, 0.1)]).unwrap();
        let f = fft_defect(&d, l);
        for k in [1usize, 3, 17, 400, 4097, 8000, 8192, 12000] {
            let t = 2.0 * PI * k as f64 / l as f64;
            assert!((one_minus_phi(&d, t) - f[k]).norm() < 1e-15);
        }
    }

    // references: Lerch transcendent for power tails, Levin summation for log tails
    #[test]
    fn heavy_tails_against_reference() {
        let st15 = stable_like(1.5, 0.5, 0.5).unwrap();
        let st13 = stable_like(1.3, 0.2, 0.8).unwrap();
        let lg = log_regular(0.3, 0.7).unwrap();
        let cases: [(&StepDistribution, f64, f64, f64, f64); 12] = [
            (&st15, 2.0 * PI * 3.0 / 16384.0, 8.1983351565722804e-5, 0.0, 1e-12),
            (&st15, 0.3, 0.24732707790674532, 0.0, 1e-14),
            (&st15, 2.5, 1.3106018890736533, 0.0, 1e-14),
            (&st15, 1e-7, 6.7646834781106378e-11, 0.0, 1e-8),
            (&st13, 1e-7, 4.6789642885376066e-10, -5.5097794207982697e-10, 1e-8),
            (&st13, 1e-3, 7.4252047504807761e-5, -8.7324023979157315e-5, 1e-12),
            (&st13, 0.3, 0.13081293905144704, -0.14157115328257858, 1e-14),
            (&st13, 2.5, 1.6201207547960107, -0.46670791214741381, 1e-14),
            // direct partial sum to 1e7, remainder below 1e-9
            (&lg, 0.05, 0.017263203108603412, -0.014027143222515012, 1e-7),
            (&lg, 0.3, 0.17078564211664677, -0.14421779120541313, 1e-14),
            (&lg, 1.0, 0.66178899639025883, -0.54502522814411129, 1e-14),
            (&lg, 2.5, 1.592195643265708, -0.42636955340277693, 1e-14),
        ];
        for (d, t, re, im, rel) in cases {
            let got = one_minus_phi(d, t);
            let want = C::new(re, im);
            assert!((got - want).norm() <= rel * want.norm(), "{} t={t} {got} {want}", d.meta.family);
        }
    }

    #[test]
    fn zipf_closed_form_matches_generic_sum() {
        let f = |z: C| (z + 1.0).inv();
        for t in [1e-9, 1e-5, 0.01, 0.7, 3.0] {
            let tl = Tail { shape: TailShape::Zipf, start: 0, weight: 0.3 };
            let closed = tail_transform(&tl, t);
            let generic = 0.3 * osc_sum(&f, 1, t);
            assert!((closed - generic).norm() < 1e-12 * closed.norm(), "t={t} {closed} {generic}");
        }
    }

    #[test]
    fn small_angle_scaling() {
        // symmetric stable_like(1.5): 1 - phi(t) is real and ~ c t^1.5
        let d = stable_like(1.5, 0.5, 0.5).unwrap();
        let a = one_minus_phi(&d, 1e-6);
        let b = one_minus_phi(&d, 1e-8);
        assert!(a.im.abs() < 1e-12 * a.re);
        let slope = (a.re / b.re).ln() / 100f64.ln();
        assert!((slope - 1.5).abs() < 1e-3, "{slope}");
    }

    #[test]
    fn srw_kernel_is_abs() {
        let xs: Vec<i64> = vec![-300, -7, -1, 0, 1, 2, 50, 999];
        for v in potential_kernel_quad(&srw(), &xs).iter().chain(&potential_kernel_series(&srw(), &xs, 1 << 16)) {
            assert!((v.value - v.x.abs() as f64).abs() < 1e-8, "{v:?}");
        }
    }

    #[test]
    fn bounded_methods_agree() {
        let xs: Vec<i64> = vec![-1000, -10, -1, 1, 3, 10, 100, 1000];
        let walks = [lazy_srw(0.3).unwrap(), finite(&[(-1, 0.5), (0, 0.1), (1, 0.3), (2, 0.1)]).unwrap()];
        for d in &walks {
            let q = potential_kernel_quad(d, &xs);
            let s = potential_kernel_series(d, &xs, 1 << 16);
            for (a, b) in q.iter().zip(&s) {
                assert!((a.value - b.value).abs() < 1e-9, "{} {a:?} {b:?}", d.meta.family);
            }
        }
        // a(x) ~ |x| / sigma^2 for the lazy walk, exactly
        let q = potential_kernel_quad(&walks[0], &xs);
        for v in q {
            assert!((v.value - v.x.abs() as f64 / 0.7).abs() < 1e-10 * v.value.max(1.0));
        }
    }

    #[test]
    fn log_regular_methods_agree() {
        let d = log_regular(0.3, 0.7).unwrap();
        let xs: Vec<i64> = vec![-1000, -20, 1, 20, 1000];
        let q = potential_kernel_quad(&d, &xs);
        let s = potential_kernel_series(&d, &xs, 1 << 20);
        for (a, b) in q.iter().zip(&s) {
            assert!((a.value - b.value).abs() < 3.0 * (a.err + b.err) + 1e-6 * a.value, "{a:?} {b:?}");
            assert!(a.value > 0.0);
        }
    }

    #[test]
    fn transient_kernel_decays() {
        let d = zipf_pair(0.3, 0.7).unwrap();
        let g = green_kernel_quad(&d, &[0, 100, 1000, -100, -1000]).unwrap();
        assert!(g.iter().all(|v| v.err < 1e-8 * v.value));
        assert!(g[0].value > g[3].value && g[3].value > g[1].value && g[1].value > g[2].value && g[2].value > 0.0);
        assert!(g[3].value > g[4].value && g[4].value > g[2].value);
        assert!(green_kernel_quad(&srw(), &[0]).is_err());
    }
}
