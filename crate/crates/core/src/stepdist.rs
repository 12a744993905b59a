//! Integer step distributions: explicit core table plus optional parametric tails.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::trend::decade_points;

const E: f64 = std::f64::consts::E;

/// Survival shape of a tail. `s(x)` is decreasing with a closed-form partial sum,
/// so tail mass and first moment come out exact.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum TailShape {
    /// s(x) = 1/(x+1)
    Zipf,
    /// s(x) = x^(1-a) - (x+1)^(1-a), 1 < a < 2
    Power { alpha: f64 },
    /// s(x) = 1/ln(x+e) - 1/ln(x+1+e)
    Log,
}

impl TailShape {
    pub fn s(&self, x: f64) -> f64 {
        match *self {
            TailShape::Zipf => 1.0 / (x + 1.0),
            TailShape::Power { alpha } => {
                let b = 1.0 - alpha;
                -x.powf(b) * (b * (1.0 / x).ln_1p()).exp_m1()
            }
            TailShape::Log => {
                (1.0 / (x + E)).ln_1p() / ((x + E).ln() * (x + 1.0 + E).ln())
            }
        }
    }

    /// Sum of s(k) over a <= k < b; `b = None` means to infinity.
    pub fn sum(&self, a: i64, b: Option<i64>) -> f64 {
        match *self {
            TailShape::Zipf => match b {
                Some(b) => harmonic_diff(a + 1, b + 1),
                None => f64::INFINITY,
            },
            TailShape::Power { alpha } => {
                let f = |k: i64| (k as f64).powf(1.0 - alpha);
                f(a) - b.map_or(0.0, f)
            }
            TailShape::Log => {
                let f = |k: i64| 1.0 / (k as f64 + E).ln();
                f(a) - b.map_or(0.0, f)
            }
        }
    }

    /// Tail index of the survival function.
    pub fn index(&self) -> f64 {
        match *self {
            TailShape::Zipf | TailShape::Log => 1.0,
            TailShape::Power { alpha } => alpha,
        }
    }

    fn rough_inverse(&self, t: f64) -> f64 {
        match *self {
            TailShape::Zipf => 1.0 / t - 1.0,
            TailShape::Power { alpha } => ((alpha - 1.0) / t).powf(1.0 / alpha),
            TailShape::Log => {
                let mut x: f64 = 1.0 / t;
                for _ in 0..4 {
                    let l = (x + E).ln();
                    x = 1.0 / (t * l * l);
                }
                x
            }
        }
    }
}

/// sum_{n=a}^{b-1} 1/n for 1 <= a <= b.
pub fn harmonic_diff(a: i64, b: i64) -> f64 {
    if b <= a {
        return 0.0;
    }
    if b - a <= 256 || a < 16 {
        let stop = if a < 16 { b.min(16) } else { b };
        let mut s = 0.0;
        let mut n = stop - 1;
        while n >= a {
            s += 1.0 / n as f64;
            n -= 1;
        }
        if stop == b {
            return s;
        }
        return s + harmonic_diff(16, b);
    }
    // digamma asymptotics, differenced to keep the log term accurate
    let corr = |n: f64| {
        let r = 1.0 / (n * n);
        -1.0 / (2.0 * n) - r * (1.0 / 12.0 - r * (1.0 / 120.0 - r * (1.0 / 252.0 - r / 240.0)))
    };
    let (fa, fb) = (a as f64, b as f64);
    ((fb - fa) / fa).ln_1p() + corr(fb) - corr(fa)
}

/// One side of a parametric tail: P[side > k] = weight * s(k)/s(start) for k >= start.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tail {
    pub shape: TailShape,
    pub start: i64,
    pub weight: f64,
}

impl Tail {
    pub fn surv(&self, k: i64) -> f64 {
        debug_assert!(k >= self.start);
        self.weight * self.shape.s(k as f64) / self.shape.s(self.start as f64)
    }

    /// Point mass at k > start.
    pub fn mass(&self, k: i64) -> f64 {
        match self.shape {
            TailShape::Zipf => {
                let kf = k as f64;
                self.weight * (self.start as f64 + 1.0) / (kf * (kf + 1.0))
            }
            _ => self.surv(k - 1) - self.surv(k),
        }
    }

    /// sum of surv(k) over a <= k < b, a >= start.
    pub fn surv_sum(&self, a: i64, b: Option<i64>) -> f64 {
        self.weight * self.shape.sum(a, b) / self.shape.s(self.start as f64)
    }

    /// Smallest k > start with surv(k) < v * weight; inverse-CDF draw for v in (0,1].
    pub fn invert(&self, v: f64) -> i64 {
        const KMAX: i64 = 1 << 62;
        let s0 = self.shape.s(self.start as f64);
        let target = v * s0;
        let below = |k: i64| self.shape.s(k as f64) < target;
        let lo0 = self.start + 1;
        if below(lo0) {
            return lo0;
        }
        let guess = self.shape.rough_inverse(target);
        let mut hi = if guess.is_finite() && guess < KMAX as f64 {
            (guess as i64).max(lo0 + 1)
        } else {
            KMAX
        };
        let mut lo = lo0;
        if !below(hi) {
            lo = hi;
            let mut step = hi.max(1);
            loop {
                let next = hi.saturating_add(step).min(KMAX);
                if below(next) || next == KMAX {
                    hi = next;
                    break;
                }
                lo = next;
                hi = next;
                step = step.saturating_mul(2);
            }
        } else {
            let mut step = ((hi - lo0) / 2).max(1);
            while hi - step > lo0 && below(hi - step) {
                hi -= step;
                step = step.saturating_mul(2).min((hi - lo0) / 2).max(1);
            }
            lo = lo.max(hi - 2 * step).max(lo0);
        }
        // invariant: !below(lo), below(hi)
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if below(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }
}

/// Hypothesis tags carried by builder output.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Tag {
    Bounded,
    Symmetric,
    MeanZero,
    InfiniteMean,
    Nrs,
    Prs,
    Recurrent,
    Transient,
    /// unbalanced tails, (e1.7)
    Unbalanced,
    /// dominated variation of the positive tail, (e5.3)
    DominatedVariation,
    /// continuity of the positive tail, (ctn)
    TailContinuity,
    /// p(x) <= C (1-F(x))/x, (TRNS)
    DensityBound,
    /// stable domain of attraction with known alpha
    Stable,
}

/// What a builder claims about its output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub family: String,
    pub params: BTreeMap<String, f64>,
    pub alpha: f64,
    pub tags: Vec<Tag>,
}

impl Meta {
    pub fn has(&self, t: Tag) -> bool {
        self.tags.contains(&t)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StepDistribution {
    lo: i64,
    core: Vec<f64>,
    plus: Option<Tail>,
    minus: Option<Tail>,
    pub meta: Meta,
    #[serde(skip)]
    suffix: Vec<f64>,
    #[serde(skip)]
    cdf: Vec<f64>,
}

impl PartialEq for StepDistribution {
    fn eq(&self, o: &Self) -> bool {
        self.lo == o.lo && self.core == o.core && self.plus == o.plus && self.minus == o.minus
    }
}

impl StepDistribution {
    /// Assemble from a core table starting at `lo` and optional tails.
    /// The plus tail covers x > plus.start, the minus tail x < -minus.start.
    pub fn new(lo: i64, core: Vec<f64>, plus: Option<Tail>, minus: Option<Tail>, meta: Meta) -> Result<Self> {
        if core.is_empty() {
            return Err(Error::invalid("empty core table"));
        }
        if core.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::invalid("core masses must be finite and nonnegative"));
        }
        let hi = lo + core.len() as i64 - 1;
        for (t, edge, name) in [(plus, hi, "plus"), (minus, -lo, "minus")] {
            if let Some(t) = t {
                if t.start < edge || t.weight < 0.0 || !t.weight.is_finite() {
                    return Err(Error::invalid(format!("{name} tail overlaps the core or has bad weight")));
                }
                if matches!(t.shape, TailShape::Power { .. }) && t.start < 1 {
                    return Err(Error::invalid("power tail needs start >= 1"));
                }
                if let TailShape::Power { alpha } = t.shape {
                    if !(alpha > 1.0 && alpha < 2.0) {
                        return Err(Error::invalid("power tail needs 1 < alpha < 2"));
                    }
                }
            }
        }
        let total: f64 = core.iter().sum::<f64>()
            + plus.map_or(0.0, |t| t.weight)
            + minus.map_or(0.0, |t| t.weight);
        if (total - 1.0).abs() > 1e-14 {
            return Err(Error::invalid(format!("total mass {total} differs from 1")));
        }
        let mut suffix = vec![0.0; core.len() + 1];
        for i in (0..core.len()).rev() {
            suffix[i] = suffix[i + 1] + core[i];
        }
        let mut cdf = Vec::with_capacity(core.len());
        let mut acc = 0.0;
        for p in &core {
            acc += p;
            cdf.push(acc);
        }
        Ok(Self { lo, core, plus, minus, meta, suffix, cdf })
    }

    pub fn core_lo(&self) -> i64 {
        self.lo
    }
    pub fn core_hi(&self) -> i64 {
        self.lo + self.core.len() as i64 - 1
    }
    pub fn core(&self) -> &[f64] {
        &self.core
    }
    pub fn plus_tail(&self) -> Option<&Tail> {
        self.plus.as_ref()
    }
    pub fn minus_tail(&self) -> Option<&Tail> {
        self.minus.as_ref()
    }
    pub fn is_bounded(&self) -> bool {
        self.plus.map_or(true, |t| t.weight == 0.0) && self.minus.map_or(true, |t| t.weight == 0.0)
    }
    pub fn alpha(&self) -> f64 {
        self.meta.alpha
    }

    /// Largest and smallest support points, `None` when unbounded.
    pub fn support_max(&self) -> Option<i64> {
        if self.plus.map_or(false, |t| t.weight > 0.0) {
            return None;
        }
        let i = self.core.iter().rposition(|&p| p > 0.0)?;
        Some(self.lo + i as i64)
    }
    pub fn support_min(&self) -> Option<i64> {
        if self.minus.map_or(false, |t| t.weight > 0.0) {
            return None;
        }
        let i = self.core.iter().position(|&p| p > 0.0)?;
        Some(self.lo + i as i64)
    }

    pub fn pmf(&self, x: i64) -> f64 {
        let hi = self.core_hi();
        if x >= self.lo && x <= hi {
            return self.core[(x - self.lo) as usize];
        }
        if x > hi {
            match self.plus {
                Some(t) if x > t.start => t.mass(x),
                _ => 0.0,
            }
        } else {
            match self.minus {
                Some(t) if -x > t.start => t.mass(-x),
                _ => 0.0,
            }
        }
    }

    /// P[X > x] for any integer x.
    pub fn surv_plus(&self, x: i64) -> f64 {
        if let Some(t) = self.plus {
            if x >= t.start {
                return t.surv(x);
            }
        }
        let w = self.plus.map_or(0.0, |t| t.weight);
        let i = (x + 1 - self.lo).clamp(0, self.core.len() as i64) as usize;
        w + self.suffix[i]
    }

    /// P[-X > x] for any integer x.
    pub fn surv_minus(&self, x: i64) -> f64 {
        if let Some(t) = self.minus {
            if x >= t.start {
                return t.surv(x);
            }
        }
        let w = self.minus.map_or(0.0, |t| t.weight);
        // core points k with k < -x
        let n = (-x - self.lo).clamp(0, self.core.len() as i64) as usize;
        w + (self.suffix[0] - self.suffix[n])
    }

    /// P[X > x].
    pub fn tail_plus(&self, x: i64) -> f64 {
        self.surv_plus(x)
    }

    /// P[X <= -x].
    pub fn tail_minus(&self, x: i64) -> f64 {
        self.surv_minus(x - 1)
    }

    /// H(x) = P[|X| > x].
    pub fn h(&self, x: i64) -> f64 {
        self.surv_plus(x) + self.surv_minus(x)
    }

    /// sum_{k=a}^{b-1} P[X > k]; `b = None` sums to infinity (finite only without a zipf tail).
    pub fn surv_plus_sum(&self, a: i64, b: Option<i64>) -> f64 {
        side_sum(a, b, self.plus.as_ref(), self.core_hi(), |k| self.surv_plus(k))
    }
    /// sum_{k=a}^{b-1} P[-X > k].
    pub fn surv_minus_sum(&self, a: i64, b: Option<i64>) -> f64 {
        side_sum(a, b, self.minus.as_ref(), -self.lo, |k| self.surv_minus(k))
    }

    /// A(x) = sum_{k<x} (P[X>k] - P[X<-k]), the lattice integral of 1-F(t)-F(-t).
    pub fn truncated_mean_a(&self, x: i64) -> f64 {
        assert!(x >= 0);
        match self.mean() {
            // complement form keeps relative accuracy when A(x) is small
            Some(m) if x > 64 => m - (self.surv_plus_sum(x, None) - self.surv_minus_sum(x, None)),
            _ => self.surv_plus_sum(0, Some(x)) - self.surv_minus_sum(0, Some(x)),
        }
    }

    /// A(0..=x_max) by incremental summation.
    pub fn a_table(&self, x_max: usize) -> Vec<f64> {
        let mut out = vec![0.0; x_max + 1];
        let mut acc = 0.0;
        for k in 0..x_max {
            acc += self.surv_plus(k as i64) - self.surv_minus(k as i64);
            out[k + 1] = acc;
        }
        out
    }

    /// EX when E|X| < infinity.
    pub fn mean(&self) -> Option<f64> {
        let mut m = 0.0;
        for (i, p) in self.core.iter().enumerate() {
            m += (self.lo + i as i64) as f64 * p;
        }
        for (t, sign) in [(self.plus, 1.0), (self.minus, -1.0)] {
            if let Some(t) = t {
                if t.weight == 0.0 {
                    continue;
                }
                if t.shape == TailShape::Zipf {
                    return None;
                }
                m += sign * ((t.start + 1) as f64 * t.weight + t.surv_sum(t.start + 1, None));
            }
        }
        Some(m)
    }

    pub fn second_moment_finite(&self) -> bool {
        self.is_bounded()
    }

    /// Irreducible on Z (support generates Z, both signs present).
    pub fn irreducible(&self) -> bool {
        if !self.is_bounded() {
            return true;
        }
        let pts = self.support_points();
        let g = pts.iter().fold(0i64, |g, &x| gcd(g, x.abs()));
        g == 1 && pts.iter().any(|&x| x > 0) && pts.iter().any(|&x| x < 0)
    }

    /// gcd of support differences is 1.
    pub fn aperiodic(&self) -> bool {
        if !self.is_bounded() {
            return true;
        }
        let pts = self.support_points();
        let g = pts.windows(2).fold(0i64, |g, w| gcd(g, w[1] - w[0]));
        g == 1
    }

    fn support_points(&self) -> Vec<i64> {
        self.core
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(i, _)| self.lo + i as i64)
            .collect()
    }

    /// Reflected distribution, X -> -X.
    pub fn mirror(&self) -> Self {
        let mut core = self.core.clone();
        core.reverse();
        let mut meta = self.meta.clone();
        meta.family = format!("mirror({})", meta.family);
        meta.tags = meta
            .tags
            .iter()
            .map(|t| match t {
                Tag::Nrs => Tag::Prs,
                Tag::Prs => Tag::Nrs,
                t => *t,
            })
            .filter(|t| !matches!(t, Tag::Unbalanced | Tag::DominatedVariation | Tag::TailContinuity | Tag::DensityBound))
            .collect();
        Self::new(-self.core_hi(), core, self.minus, self.plus, meta).expect("mirror of a valid distribution")
    }

    /// Stable hash of the distribution for cache keys.
    pub fn hash(&self) -> String {
        let s = serde_json::to_string(&(self.lo, &self.core, &self.plus, &self.minus, &self.meta.family))
            .expect("serializable");
        hex::encode(Sha256::digest(s.as_bytes()))
    }

    /// Draw one step by inverse CDF.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> i64 {
        let wp = self.plus.map_or(0.0, |t| t.weight);
        let wm = self.minus.map_or(0.0, |t| t.weight);
        let u: f64 = rng.gen();
        if u < wp {
            return self.plus.unwrap().invert(open_unit(rng));
        }
        if u < wp + wm {
            return -self.minus.unwrap().invert(open_unit(rng));
        }
        let target = u - wp - wm;
        let i = self.cdf.partition_point(|&c| c <= target).min(self.core.len() - 1);
        // skip zero atoms produced by rounding at the top
        let mut i = i;
        while self.core[i] == 0.0 && i > 0 {
            i -= 1;
        }
        self.lo + i as i64
    }

    pub fn rs_diagnostic(&self, grid: &[i64]) -> Result<RsReport> {
        let mut rows = Vec::with_capacity(grid.len());
        for &x in grid {
            if x < 1 {
                return Err(Error::invalid("rs grid points must be >= 1"));
            }
            let h = self.h(x);
            if h == 0.0 {
                return Err(Error::Degenerate(
                    "bounded support: relative-stability diagnostic degenerate".into(),
                ));
            }
            rows.push((x, self.truncated_mean_a(x) / (x as f64 * h)));
        }
        let tail: Vec<f64> = last_decades(&rows).iter().map(|r| r.1).collect();
        let verdict = if tail.len() >= 3 && tail.windows(2).all(|w| w[1].abs() > w[0].abs()) {
            if tail.iter().all(|&r| r < 0.0) {
                RsVerdict::NrsTrend
            } else if tail.iter().all(|&r| r > 0.0) {
                RsVerdict::PrsTrend
            } else {
                RsVerdict::Inconclusive
            }
        } else {
            RsVerdict::Inconclusive
        };
        Ok(RsReport { rows, verdict })
    }

    /// Heuristic recurrence classification. Finite mean: Chung-Fuchs / drift.
    /// Otherwise partial sums of H/A^2 over decades and the decay of their increments.
    pub fn recurrence_diagnostic(&self, x_max: i64) -> Result<RecurrenceReport> {
        if x_max < 1000 {
            return Err(Error::invalid("x_max must be at least 1000"));
        }
        if let Some(m) = self.mean() {
            let verdict = if m.abs() < 1e-12 { RecVerdict::RecurrentTrend } else { RecVerdict::TransientTrend };
            return Ok(RecurrenceReport { partial: vec![], tail_estimate: None, verdict, note: "finite mean".into() });
        }
        let pts = decade_points(10, x_max);
        let mut partial = Vec::new();
        let mut acc = 0.0;
        let mut a = self.truncated_mean_a(10);
        let mut k = 10i64;
        for &x in &pts {
            while k < x {
                let h = self.h(k);
                acc += if h == 0.0 { 0.0 } else { h / (a * a) };
                a += self.surv_plus(k) - self.surv_minus(k);
                k += 1;
            }
            partial.push((x, acc));
        }
        if !acc.is_finite() {
            return Ok(RecurrenceReport { partial, tail_estimate: None, verdict: RecVerdict::RecurrentTrend, note: "A vanishes".into() });
        }
        let inc: Vec<f64> = partial.windows(2).map(|w| w[1].1 - w[0].1).collect();
        if inc.len() < 3 || inc.iter().any(|&d| d <= 0.0) {
            return Ok(RecurrenceReport { partial, tail_estimate: None, verdict: RecVerdict::Inconclusive, note: String::new() });
        }
        // increments over decade k behave like C k^-s
        let n = inc.len();
        let ks: Vec<f64> = (n - 3..n).map(|i| ((i + 2) as f64).ln()).collect();
        let ls: Vec<f64> = inc[n - 3..].iter().map(|d| d.ln()).collect();
        let s = -crate::trend::slope(&ks, &ls);
        let verdict = if s > 1.2 {
            RecVerdict::TransientTrend
        } else if s < 0.8 {
            RecVerdict::RecurrentTrend
        } else {
            RecVerdict::Inconclusive
        };
        let tail_estimate = if s > 1.0 {
            let last = inc[n - 1];
            let k0 = (n + 1) as f64;
            // sum_{j > k0} last (j/k0)^-s ~ last k0 / (s-1)
            Some(acc + last * k0 / (s - 1.0))
        } else {
            None
        };
        Ok(RecurrenceReport { partial, tail_estimate, verdict, note: format!("decade increment exponent {s:.3}") })
    }
}

fn side_sum(a: i64, b: Option<i64>, tail: Option<&Tail>, edge: i64, f: impl Fn(i64) -> f64) -> f64 {
    // without a tail the summand vanishes from `edge` on
    let stop = match (tail, b) {
        (Some(_), Some(b)) => b,
        (Some(_), None) => i64::MAX,
        (None, Some(b)) => b.min(edge.max(a)),
        (None, None) => edge.max(a),
    };
    if stop <= a {
        return 0.0;
    }
    let split = match tail {
        Some(t) => t.start.clamp(a, stop),
        None => stop,
    };
    let mut s = 0.0;
    for k in a..split {
        s += f(k);
    }
    if let Some(t) = tail {
        if split < stop {
            s += t.surv_sum(split, b);
        }
    }
    s
}

fn last_decades<T: Copy>(rows: &[(i64, T)]) -> Vec<(i64, T)> {
    if rows.is_empty() {
        return vec![];
    }
    let top = rows.last().unwrap().0 as f64;
    rows.iter().copied().filter(|r| r.0 as f64 >= top / 1000.0 * 0.999).collect()
}

fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // (0, 1] with 53 random bits
    ((rng.gen::<u64>() >> 11) + 1) as f64 / (1u64 << 53) as f64
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RsVerdict {
    PrsTrend,
    NrsTrend,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct RsReport {
    pub rows: Vec<(i64, f64)>,
    pub verdict: RsVerdict,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RecVerdict {
    TransientTrend,
    RecurrentTrend,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct RecurrenceReport {
    pub partial: Vec<(i64, f64)>,
    pub tail_estimate: Option<f64>,
    pub verdict: RecVerdict,
    pub note: String,
}

impl fmt::Display for StepDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.meta.family)?;
        if !self.meta.params.is_empty() {
            let ps: Vec<String> = self.meta.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
            write!(f, "({})", ps.join(","))?;
        }
        Ok(())
    }
}

fn meta(family: &str, params: &[(&str, f64)], alpha: f64, tags: Vec<Tag>) -> Meta {
    Meta {
        family: family.into(),
        params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        alpha,
        tags,
    }
}

/// Simple random walk.
pub fn srw() -> StepDistribution {
    let m = meta("srw", &[], 2.0, vec![Tag::Bounded, Tag::Symmetric, Tag::MeanZero, Tag::Recurrent]);
    StepDistribution::new(-1, vec![0.5, 0.0, 0.5], None, None, m).unwrap()
}

/// Holds with probability `hold`, otherwise a fair unit step.
pub fn lazy_srw(hold: f64) -> Result<StepDistribution> {
    if !(0.0..1.0).contains(&hold) {
        return Err(Error::invalid("hold probability must be in [0,1)"));
    }
    let s = 0.5 * (1.0 - hold);
    let m = meta("lazy_srw", &[("hold", hold)], 2.0, vec![Tag::Bounded, Tag::Symmetric, Tag::MeanZero, Tag::Recurrent]);
    StepDistribution::new(-1, vec![s, hold, s], None, None, m)
}

/// Bounded distribution from (point, mass) pairs.
pub fn finite(table: &[(i64, f64)]) -> Result<StepDistribution> {
    if table.is_empty() {
        return Err(Error::invalid("empty table"));
    }
    let lo = table.iter().map(|e| e.0).min().unwrap();
    let hi = table.iter().map(|e| e.0).max().unwrap();
    if hi - lo > 1 << 24 {
        return Err(Error::invalid("finite support too wide"));
    }
    let mut core = vec![0.0; (hi - lo + 1) as usize];
    for &(x, p) in table {
        core[(x - lo) as usize] += p;
    }
    let total: f64 = core.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::invalid(format!("masses sum to {total}")));
    }
    // absorb rounding into the largest atom so the table is proper to 1e-14
    let imax = (0..core.len()).max_by(|&a, &b| core[a].total_cmp(&core[b])).unwrap();
    core[imax] += 1.0 - total;
    let mut params = BTreeMap::new();
    for &(x, p) in table {
        params.insert(format!("p{x}"), p);
    }
    let mut tags = vec![Tag::Bounded];
    let mut d = StepDistribution::new(lo, core, None, None, Meta { family: "finite".into(), params, alpha: 2.0, tags: vec![] })?;
    let m = d.mean().unwrap();
    if m.abs() < 1e-14 {
        tags.push(Tag::MeanZero);
        tags.push(Tag::Recurrent);
    } else {
        tags.push(Tag::Transient);
    }
    if (0..d.core.len()).all(|i| d.core[i] == d.core[d.core.len() - 1 - i]) && d.lo == -d.core_hi() {
        tags.push(Tag::Symmetric);
    }
    d.meta.tags = tags;
    Ok(d)
}

/// P[X > x] = p/(x+1), P[X <= -x] = q/x, atom 1-p-q at zero.
pub fn zipf_pair(p: f64, q: f64) -> Result<StepDistribution> {
    if !(p >= 0.0 && q >= 0.0 && p + q <= 1.0 && p + q > 0.0) {
        return Err(Error::invalid("zipf_pair needs p, q >= 0, 0 < p+q <= 1"));
    }
    let mut tags = vec![Tag::InfiniteMean, Tag::DominatedVariation, Tag::TailContinuity, Tag::DensityBound, Tag::Stable];
    if p < q {
        tags.extend([Tag::Nrs, Tag::Transient, Tag::Unbalanced]);
    } else if p > q {
        tags.extend([Tag::Prs, Tag::Transient]);
    } else {
        tags.extend([Tag::Symmetric, Tag::Recurrent]);
    }
    let m = meta("zipf_pair", &[("p", p), ("q", q)], 1.0, tags);
    StepDistribution::new(
        0,
        vec![1.0 - p - q],
        Some(Tail { shape: TailShape::Zipf, start: 0, weight: p }),
        Some(Tail { shape: TailShape::Zipf, start: 0, weight: q }),
        m,
    )
}

fn mean_zero_family(shape: TailShape, p: f64, q: f64) -> Result<(Vec<f64>, Tail, Tail)> {
    if !(p >= 0.0 && q >= 0.0 && p + q > 0.0) {
        return Err(Error::invalid("side weights must be nonnegative, not both zero"));
    }
    let t2 = shape.sum(2, None);
    let kappa = 2.0 + t2 / shape.s(1.0);
    let c = (0.9 / ((q - p).abs() * kappa + p + q)).min(0.5);
    let r = 1.0 - c * (p + q);
    let d = c * (q - p) * kappa;
    let core = vec![(r - d) / 2.0, 0.0, (r + d) / 2.0];
    Ok((
        core,
        Tail { shape, start: 1, weight: c * p },
        Tail { shape, start: 1, weight: c * q },
    ))
}

/// Power tails P[X > x] ~ c p x^-alpha, P[X < -x] ~ c q x^-alpha, 1 < alpha < 2, EX = 0.
pub fn stable_like(alpha: f64, p: f64, q: f64) -> Result<StepDistribution> {
    if !(alpha > 1.0 && alpha < 2.0) {
        return Err(Error::invalid("stable_like needs 1 < alpha < 2"));
    }
    let (core, tp, tm) = mean_zero_family(TailShape::Power { alpha }, p, q)?;
    let mut tags = vec![Tag::MeanZero, Tag::Recurrent, Tag::Stable];
    if p == q {
        tags.push(Tag::Symmetric);
    }
    let m = meta("stable_like", &[("alpha", alpha), ("p", p), ("q", q)], alpha, tags);
    StepDistribution::new(-1, core, Some(tp), Some(tm), m)
}

/// Tails ~ c/(x log^2 x) weighted p (positive) and q (negative), EX = 0.
/// A(x) ~ c (q-p)/log x: p > q is n.r.s., p < q is p.r.s.
pub fn log_regular(p: f64, q: f64) -> Result<StepDistribution> {
    let (core, tp, tm) = mean_zero_family(TailShape::Log, p, q)?;
    let mut tags = vec![Tag::MeanZero, Tag::Recurrent, Tag::DominatedVariation, Tag::TailContinuity, Tag::DensityBound];
    if p > q {
        tags.extend([Tag::Nrs, Tag::Unbalanced]);
    } else if p < q {
        tags.push(Tag::Prs);
    } else {
        tags.push(Tag::Symmetric);
    }
    let m = meta("log_regular", &[("p", p), ("q", q)], 1.0, tags);
    StepDistribution::new(-1, core, Some(tp), Some(tm), m)
}

/// Distribution spec as read from `key = value` text or `k=v,k=v` inline form.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DistSpec {
    pub family: String,
    pub params: BTreeMap<String, String>,
}

impl DistSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let mut spec = DistSpec::default();
        let items: Vec<&str> = if text.contains('\n') || !text.contains(',') {
            text.lines().collect()
        } else {
            text.split(',').collect()
        };
        for raw in items {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() || line.starts_with('[') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("expected key = value, got `{line}`")))?;
            let v = v.trim();
            let v = v.strip_prefix('"').and_then(|v| v.strip_suffix('"')).unwrap_or(v);
            let (k, v) = (k.trim().to_string(), v.to_string());
            if k == "family" {
                spec.family = v;
            } else {
                spec.params.insert(k, v);
            }
        }
        if spec.family.is_empty() {
            return Err(Error::Config("missing family".into()));
        }
        Ok(spec)
    }

    fn num(&self, k: &str) -> Result<f64> {
        let v = self.params.get(k).ok_or_else(|| Error::Config(format!("{}: missing `{k}`", self.family)))?;
        v.parse().map_err(|_| Error::Config(format!("{}: `{k}` is not a number", self.family)))
    }

    pub fn build(&self) -> Result<StepDistribution> {
        let d = match self.family.as_str() {
            "srw" => Ok(srw()),
            "lazy_srw" => lazy_srw(self.num("hold")?),
            "zipf_pair" => zipf_pair(self.num("p")?, self.num("q")?),
            "stable_like" => stable_like(self.num("alpha")?, self.num("p")?, self.num("q")?),
            "log_regular" => log_regular(self.num("p")?, self.num("q")?),
            "finite" => {
                let t = self.params.get("table").ok_or_else(|| Error::Config("finite: missing `table`".into()))?;
                let mut table = Vec::new();
                for e in t.split(|c| c == ';' || c == ' ').filter(|s| !s.is_empty()) {
                    let (x, p) = e.split_once(':').ok_or_else(|| Error::Config(format!("bad table entry `{e}`")))?;
                    let x: i64 = x.trim().parse().map_err(|_| Error::Config(format!("bad point `{x}`")))?;
                    let p: f64 = p.trim().parse().map_err(|_| Error::Config(format!("bad mass `{p}`")))?;
                    table.push((x, p));
                }
                finite(&table)
            }
            f => Err(Error::Config(format!("unknown family `{f}`"))),
        }?;
        match self.params.get("mirror").map(String::as_str) {
            Some("true") | Some("1") => Ok(d.mirror()),
            _ => Ok(d),
        }
    }
}
