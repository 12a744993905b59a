//! Spitzer coefficients psi_j = sum_n P[S_n = j]/n from the Fourier coefficients
//! of -log(1 - phi) on a cycle, with aliasing removed by extrapolation in the cycle length.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::stepdist::StepDistribution;

/// pmf folded onto Z/LZ. Tail mass beyond 8.5 periods is spread by a midpoint rule.
pub fn folded_pmf(d: &StepDistribution, l: usize) -> Vec<f64> {
    let li = l as i64;
    let half = li / 2;
    let mut out = vec![0.0; l];
    let idx = |x: i64| x.rem_euclid(li) as usize;
    let top = li - half; // first x not covered directly on the positive side
    for x in -half..top {
        out[idx(x)] += d.pmf(x);
    }
    for (tail, sign, first) in [(d.plus_tail(), 1i64, top), (d.minus_tail(), -1i64, half + 1)] {
        let Some(t) = tail else { continue };
        if t.weight == 0.0 {
            continue;
        }
        // magnitudes k >= first, summed periodwise
        let mut prev = t.surv((first - 1).max(t.start));
        for k in first..first + 8 * li {
            let s = t.surv(k);
            if k > t.start {
                out[idx(sign * k)] += prev - s;
            }
            prev = s;
        }
        // midpoint rule for the rest, rescaled so the folded mass is exact
        let base = first + 8 * li;
        let rest: Vec<f64> = (base..base + li).map(|k| t.surv(k - half - 1) / li as f64).collect();
        let scale = t.surv(base - 1) / rest.iter().sum::<f64>();
        for (k, r) in (base..base + li).zip(rest) {
            out[idx(sign * k)] += r * scale;
        }
    }
    out
}

/// psi_j for j in (-L/2, L/2], indexed mod L, on a single cycle of length L.
/// `kappa` is the weight of the subtracted srw log-singularity (alpha/2).
pub fn psi_on_cycle(d: &StepDistribution, l: usize, kappa: f64) -> Vec<f64> {
    let p = folded_pmf(d, l);
    let mut buf: Vec<Complex64> = p.iter().map(|&v| Complex64::new(-v, 0.0)).collect();
    buf[0] += 1.0;
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_forward(l).process(&mut buf);
    if d.is_bounded() {
        // near theta = 0 the FFT only has absolute accuracy; sum the support directly
        let lo = d.core_lo();
        let core = d.core();
        let kk = 2048.min(l / 2);
        for k in (1..kk).chain(l - kk + 1..l) {
            let th = 2.0 * std::f64::consts::PI * k as f64 / l as f64;
            let mut z = Complex64::new(0.0, 0.0);
            for (i, &pm) in core.iter().enumerate() {
                if pm == 0.0 {
                    continue;
                }
                let a = th * (lo + i as i64) as f64;
                let h = (0.5 * a).sin();
                // 1 - e^{-ia}
                z += pm * Complex64::new(2.0 * h * h, a.sin());
            }
            buf[k] = z;
        }
    }
    for k in 1..l {
        let th = 2.0 * std::f64::consts::PI * k as f64 / l as f64;
        // 1 - cos th without cancellation
        let s = (0.5 * th).sin();
        let one_minus_cos = 2.0 * s * s;
        buf[k] = -buf[k].ln() + kappa * one_minus_cos.ln();
    }
    buf[0] = Complex64::new(0.5 * (buf[1].re + buf[l - 1].re), 0.0);
    planner.plan_fft_inverse(l).process(&mut buf);
    let inv = 1.0 / l as f64;
    (0..l)
        .map(|i| {
            let j = if i <= l / 2 { i } else { l - i };
            let srw = if j == 0 { std::f64::consts::LN_2 } else { 1.0 / j as f64 };
            buf[i].re * inv + kappa * srw
        })
        .collect()
}

/// psi_j on [-n, n] together with an error estimate.
#[derive(Clone, Debug, Serialize)]
pub struct Psi {
    pub n: usize,
    /// psi[n + j] = psi_j
    pub values: Vec<f64>,
    pub cycle: usize,
    /// constant and slope removed by the extrapolation
    pub shift: f64,
    pub slope: f64,
    /// max deviation between extrapolations from two nested grid triples
    pub err: f64,
}

impl Psi {
    pub fn at(&self, j: i64) -> f64 {
        self.values[(self.n as i64 + j) as usize]
    }
}

fn window(psi: &[f64], n: usize) -> Vec<f64> {
    let l = psi.len() as i64;
    (-(n as i64)..=n as i64).map(|j| psi[j.rem_euclid(l) as usize]).collect()
}

fn fit_line(d: &[f64], n: usize) -> (f64, f64, f64) {
    // least squares on the symmetric grid j = -n..n
    let m = d.len() as f64;
    let c0 = d.iter().sum::<f64>() / m;
    let mut sjd = 0.0;
    let mut sjj = 0.0;
    for (i, v) in d.iter().enumerate() {
        let j = i as f64 - n as f64;
        sjd += j * v;
        sjj += j * j;
    }
    let c1 = if sjj > 0.0 { sjd / sjj } else { 0.0 };
    let res = d
        .iter()
        .enumerate()
        .map(|(i, v)| (v - c0 - c1 * (i as f64 - n as f64)).abs())
        .fold(0.0, f64::max);
    (c0, c1, res)
}

/// Extrapolate three windows taken at cycle lengths L, 2L, 4L.
/// The aliasing error is modelled as a geometric constant plus a slope decaying like L^-2.
fn extrapolate(w: [&[f64]; 3], n: usize) -> (Vec<f64>, f64, f64, f64) {
    let d1: Vec<f64> = w[0].iter().zip(w[1]).map(|(a, b)| a - b).collect();
    let d2: Vec<f64> = w[1].iter().zip(w[2]).map(|(a, b)| a - b).collect();
    let (a0, _, _) = fit_line(&d1, n);
    let (b0, b1, res) = fit_line(&d2, n);
    let r = if a0 != 0.0 { b0 / a0 } else { 0.0 };
    let shift = if r > 0.0 && r < 0.9 && b0.abs() > 1e-15 { b0 * r / (1.0 - r) } else { 0.0 };
    let slope = if b1.abs() > 1e-18 { b1 / 3.0 } else { 0.0 };
    let out = w[2]
        .iter()
        .enumerate()
        .map(|(i, v)| v - shift - slope * (i as f64 - n as f64))
        .collect();
    (out, shift, slope, res)
}

/// psi on [-n, n] from cycles L/8 .. L, extrapolated in L.
pub fn psi(d: &StepDistribution, n: usize, l: usize) -> Psi {
    assert!(l.is_power_of_two() && l >= 64 && n < l / 16, "cycle too short for window");
    let kappa = singularity_weight(d);
    let ws: Vec<Vec<f64>> = [l / 8, l / 4, l / 2, l]
        .iter()
        .map(|&m| window(&psi_on_cycle(d, m, kappa), n))
        .collect();
    let (fine, shift, slope, res) = extrapolate([&ws[1], &ws[2], &ws[3]], n);
    let (coarse, _, _, _) = extrapolate([&ws[0], &ws[1], &ws[2]], n);
    let diff = fine.iter().zip(&coarse).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Psi { n, values: fine, cycle: l, shift, slope, err: diff + res }
}

/// 1 - phi(theta) ~ |theta|^gamma near zero; returns gamma/2.
pub fn singularity_weight(d: &StepDistribution) -> f64 {
    match d.mean() {
        Some(m) if m.abs() > 1e-12 => 0.5,
        _ => d.alpha() / 2.0,
    }
}

/// Default cycle length for a window of n.
pub fn default_cycle(n: usize) -> usize {
    (32 * n.max(512)).next_power_of_two().min(1 << 23)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stepdist::{finite, srw, zipf_pair};

    #[test]
    fn srw_coefficients() {
        let p = psi(&srw(), 200, 1 << 12);
        assert!((p.at(0) - std::f64::consts::LN_2).abs() < 1e-13);
        for j in 1..=200i64 {
            assert!((p.at(j) - 1.0 / j as f64).abs() < 1e-13);
            assert!((p.at(-j) - 1.0 / j as f64).abs() < 1e-13);
        }
    }

    #[test]
    fn folded_mass_is_one() {
        let d = zipf_pair(0.3, 0.7).unwrap();
        let f = folded_pmf(&d, 1 << 12);
        assert!((f.iter().sum::<f64>() - 1.0).abs() < 1e-13);
        assert!(f.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn bounded_against_path_counts() {
        // psi_j = sum_n P[S_n = j]/n by direct convolution powers
        let d = finite(&[(-1, 0.5), (1, 0.2), (2, 0.3)]).unwrap();
        let p = psi(&d, 10, 1 << 16);
        let steps = 4000;
        let off = 2 * steps + 2;
        let mut dist = vec![0.0; 2 * off + 1];
        dist[off] = 1.0;
        let mut acc = vec![0.0; 21];
        for n in 1..=steps {
            let mut next = vec![0.0; dist.len()];
            for (i, &m) in dist.iter().enumerate() {
                if m < 1e-300 {
                    continue;
                }
                for (x, q) in [(-1i64, 0.5), (1, 0.2), (2, 0.3)] {
                    next[(i as i64 + x) as usize] += m * q;
                }
            }
            dist = next;
            for j in -10i64..=10 {
                acc[(j + 10) as usize] += dist[(off as i64 + j) as usize] / n as f64;
            }
        }
        // drift is 0.3 per step, so terms beyond `steps` are exponentially small
        for j in -10i64..=10 {
            assert!((acc[(j + 10) as usize] - p.at(j)).abs() < 1e-12, "j={j} {} {}", acc[(j + 10) as usize], p.at(j));
        }
    }
}
