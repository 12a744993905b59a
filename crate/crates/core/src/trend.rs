//! Geometric grids and trend verdicts for ratio sequences.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Converging,
    Flat,
    Diverging,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Verdict::Converging => "converging",
            Verdict::Flat => "flat",
            Verdict::Diverging => "diverging",
            Verdict::Inconclusive => "inconclusive",
        };
        f.write_str(s)
    }
}

/// Powers of ten from `lo` up to `hi` (both included when they are powers of ten).
pub fn decade_points(lo: i64, hi: i64) -> Vec<i64> {
    let mut v = Vec::new();
    let mut x = 1i64;
    while x <= hi {
        if x >= lo {
            v.push(x);
        }
        x = match x.checked_mul(10) {
            Some(y) => y,
            None => break,
        };
    }
    v
}

/// `per_decade` geometric points per decade on [lo, hi], deduplicated integers.
pub fn geometric_grid(lo: f64, hi: f64, per_decade: usize) -> Vec<i64> {
    assert!(lo >= 1.0 && hi >= lo && per_decade >= 1);
    let n = ((hi / lo).log10() * per_decade as f64).round() as usize;
    let mut v: Vec<i64> = (0..=n)
        .map(|i| (lo * 10f64.powf(i as f64 / per_decade as f64)).round() as i64)
        .collect();
    v.dedup();
    v
}

/// Least-squares slope of ys on xs.
pub fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}

/// Points of the grid at (or nearest below) the last three decade marks.
pub fn decade_marks(grid: &[i64]) -> Vec<usize> {
    if grid.is_empty() {
        return vec![];
    }
    let top = *grid.last().unwrap() as f64;
    let mut idx = Vec::new();
    for k in 0..3 {
        let target = top / 10f64.powi(k);
        // nearest grid point in log scale
        let (i, d) = grid
            .iter()
            .enumerate()
            .map(|(i, &x)| (i, ((x as f64) / target).ln().abs()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if d < 0.35 && !idx.contains(&i) {
            idx.push(i);
        }
    }
    idx.reverse();
    idx
}

/// Verdict on |ratio - target| over the last three decades of the grid and the
/// log-log slope of |ratio - target| against x there.
pub fn trend_verdict(grid: &[i64], ratios: &[f64], target: f64) -> (Verdict, f64) {
    let marks = decade_marks(grid);
    if marks.len() < 3 || ratios.iter().any(|r| !r.is_finite()) {
        return (Verdict::Inconclusive, f64::NAN);
    }
    let errs: Vec<f64> = marks.iter().map(|&i| (ratios[i] - target).abs()).collect();
    let xs: Vec<f64> = marks.iter().map(|&i| (grid[i] as f64).ln()).collect();
    let ls: Vec<f64> = errs.iter().map(|e| e.max(1e-300).ln()).collect();
    let s = slope(&xs, &ls);
    let verdict = if errs.windows(2).all(|w| w[1] < w[0]) {
        Verdict::Converging
    } else if errs.windows(2).all(|w| w[1] > w[0]) {
        Verdict::Diverging
    } else if errs.iter().all(|&e| e < 1e-3) {
        Verdict::Flat
    } else {
        Verdict::Inconclusive
    };
    (verdict, s)
}

/// Exact-vs-predicted table for one asymptotic claim.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub formula: String,
    pub grid: Vec<i64>,
    pub exact: Vec<f64>,
    pub predicted: Vec<f64>,
    pub ratio: Vec<f64>,
    pub bound: Vec<f64>,
    pub target: f64,
    pub trend_slope: f64,
    pub verdict: Verdict,
    pub inapplicable: bool,
    pub notes: Vec<String>,
}

impl ConvergenceReport {
    pub fn new(formula: &str, grid: Vec<i64>, exact: Vec<f64>, predicted: Vec<f64>, bound: Vec<f64>, target: f64) -> Self {
        let ratio: Vec<f64> = exact.iter().zip(&predicted).map(|(e, p)| e / p).collect();
        let (verdict, trend_slope) = trend_verdict(&grid, &ratio, target);
        Self {
            formula: formula.into(),
            grid,
            exact,
            predicted,
            ratio,
            bound,
            target,
            trend_slope,
            verdict,
            inapplicable: false,
            notes: vec![],
        }
    }

    pub fn mark_inapplicable(&mut self) {
        self.inapplicable = true;
        self.verdict = Verdict::Inconclusive;
    }

    /// Ratio at the largest grid point.
    pub fn last_ratio(&self) -> f64 {
        *self.ratio.last().unwrap_or(&f64::NAN)
    }

    /// CSV with columns x, exact, predicted, ratio, bound.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,exact,predicted,ratio,bound\n");
        for i in 0..self.grid.len() {
            s.push_str(&format!(
                "{},{:.17e},{:.17e},{:.17e},{:.17e}\n",
                self.grid[i], self.exact[i], self.predicted[i], self.ratio[i], self.bound[i]
            ));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(decade_points(10, 100_000), vec![10, 100, 1000, 10_000, 100_000]);
        let g = geometric_grid(100.0, 10_000.0, 2);
        assert_eq!(g, vec![100, 316, 1000, 3162, 10_000]);
        assert_eq!(decade_marks(&g), vec![0, 2, 4]);
    }

    #[test]
    fn verdicts() {
        let g = [100, 1000, 10_000];
        assert_eq!(trend_verdict(&g, &[1.3, 1.1, 1.01], 1.0).0, Verdict::Converging);
        assert_eq!(trend_verdict(&g, &[1.01, 1.1, 1.3], 1.0).0, Verdict::Diverging);
        assert_eq!(trend_verdict(&g[..2], &[1.01, 1.1], 1.0).0, Verdict::Inconclusive);
        let (_, s) = trend_verdict(&g, &[1.1, 1.01, 1.001], 1.0);
        assert!((s + 1.0).abs() < 1e-9);
    }
}
