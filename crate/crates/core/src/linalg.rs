//! Dense LU and Toeplitz solvers for killed-chain systems (I - Q) x = b.

use crate::error::{Error, Result};

/// Row-major square matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    pub n: usize,
    pub a: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, a: vec![0.0; n * n] }
    }
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut a = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                a.push(f(i, j));
            }
        }
        Self { n, a }
    }
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }
    pub fn row(&self, i: usize) -> &[f64] {
        &self.a[i * self.n..(i + 1) * self.n]
    }
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }
}

/// LU with partial pivoting.
#[derive(Clone, Debug)]
pub struct Lu {
    n: usize,
    lu: Vec<f64>,
    piv: Vec<usize>,
}

impl Lu {
    pub fn factor(m: &Matrix) -> Result<Self> {
        let n = m.n;
        let mut a = m.a.clone();
        let mut piv: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, best) = (k..n)
                .map(|i| (i, a[i * n + k].abs()))
                .max_by(|x, y| x.1.total_cmp(&y.1))
                .unwrap();
            if best == 0.0 {
                return Err(Error::Numerical("singular matrix".into()));
            }
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                piv.swap(k, p);
            }
            let d = a[k * n + k];
            let (top, rest) = a.split_at_mut((k + 1) * n);
            let rowk = &top[k * n..];
            for i in 0..n - k - 1 {
                let r = &mut rest[i * n..(i + 1) * n];
                let f = r[k] / d;
                r[k] = f;
                if f != 0.0 {
                    for j in k + 1..n {
                        r[j] -= f * rowk[j];
                    }
                }
            }
        }
        Ok(Self { n, lu: a, piv })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x: Vec<f64> = self.piv.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s / self.lu[i * n + i];
        }
        x
    }

    /// Solve with up to `steps` rounds of iterative refinement; returns (x, residual inf-norm).
    pub fn solve_refined(&self, m: &Matrix, b: &[f64], steps: usize) -> (Vec<f64>, f64) {
        let mut x = self.solve(b);
        let mut res = residual(m, &x, b);
        for _ in 0..steps {
            if res.1 <= 1e-15 {
                break;
            }
            let dx = self.solve(&res.0);
            let cand: Vec<f64> = x.iter().zip(&dx).map(|(a, b)| a + b).collect();
            let r2 = residual(m, &cand, b);
            if r2.1 >= res.1 {
                break;
            }
            x = cand;
            res = r2;
        }
        (x, res.1)
    }

    /// Full inverse, row-major.
    pub fn inverse(&self) -> Matrix {
        let n = self.n;
        let mut inv = Matrix::zeros(n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            let c = self.solve(&e);
            e[j] = 0.0;
            for i in 0..n {
                inv.a[i * n + j] = c[i];
            }
        }
        inv
    }
}

fn residual(m: &Matrix, x: &[f64], b: &[f64]) -> (Vec<f64>, f64) {
    let ax = m.matvec(x);
    let r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let nrm = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    (r, nrm)
}

/// n x n Toeplitz matrix with entries T[i][j] = t(i - j).
#[derive(Clone, Debug)]
pub struct Toeplitz {
    n: usize,
    /// t[k + n - 1] = t(k), k in (-n, n)
    t: Vec<f64>,
}

impl Toeplitz {
    pub fn new(n: usize, t: impl Fn(i64) -> f64) -> Self {
        let ni = n as i64;
        Self { n, t: (-(ni - 1)..ni).map(t).collect() }
    }

    /// I - Q on [0, n) for a walk with point masses p: T[i][j] = delta_ij - p(j - i).
    pub fn killed(n: usize, p: impl Fn(i64) -> f64) -> Self {
        Self::new(n, |k| if k == 0 { 1.0 - p(0) } else { -p(-k) })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn t(&self, k: i64) -> f64 {
        self.t[(k + self.n as i64 - 1) as usize]
    }

    pub fn transpose(&self) -> Self {
        let mut t = self.t.clone();
        t.reverse();
        Self { n: self.n, t }
    }

    pub fn dense(&self) -> Matrix {
        Matrix::from_fn(self.n, |i, j| self.t(i as i64 - j as i64))
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n as i64;
        (0..n)
            .map(|i| (0..n).map(|j| self.t(i - j) * x[j as usize]).sum())
            .collect()
    }

    /// Levinson recursion. Returns (first column of T^-1, last column of T^-1, T^-1 b).
    pub fn levinson(&self, b: Option<&[f64]>) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        let n = self.n;
        let t0 = self.t(0);
        if t0 == 0.0 {
            return Err(Error::Numerical("zero diagonal".into()));
        }
        let mut f = vec![1.0 / t0];
        let mut g = vec![1.0 / t0];
        let mut x = b.map(|b| vec![b[0] / t0]).unwrap_or_default();
        let mut nf = Vec::with_capacity(n);
        let mut ng = Vec::with_capacity(n);
        for m in 1..n {
            let mi = m as i64;
            let mut ef = 0.0;
            let mut eg = 0.0;
            for j in 0..m {
                ef += self.t(mi - j as i64) * f[j];
                eg += self.t(-(j as i64) - 1) * g[j];
            }
            let den = 1.0 - ef * eg;
            if den.abs() < 1e-300 || !den.is_finite() {
                return Err(Error::Numerical("Levinson breakdown".into()));
            }
            nf.clear();
            ng.clear();
            for j in 0..=m {
                let fj = if j < m { f[j] } else { 0.0 };
                let gj = if j > 0 { g[j - 1] } else { 0.0 };
                nf.push((fj - ef * gj) / den);
                ng.push((gj - eg * fj) / den);
            }
            std::mem::swap(&mut f, &mut nf);
            std::mem::swap(&mut g, &mut ng);
            if let Some(b) = b {
                let mut ex = 0.0;
                for j in 0..m {
                    ex += self.t(mi - j as i64) * x[j];
                }
                let c = b[m] - ex;
                x.push(0.0);
                for j in 0..=m {
                    x[j] += c * g[j];
                }
            }
        }
        Ok((f, g, x))
    }

    /// T^-1 b with one refinement step; returns (x, residual inf-norm).
    pub fn solve(&self, b: &[f64]) -> Result<(Vec<f64>, f64)> {
        let (_, _, mut x) = self.levinson(Some(b))?;
        let r: Vec<f64> = b.iter().zip(self.matvec(&x)).map(|(b, a)| b - a).collect();
        let mut res = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if res > 1e-13 {
            let (_, _, dx) = self.levinson(Some(&r))?;
            let cand: Vec<f64> = x.iter().zip(&dx).map(|(a, b)| a + b).collect();
            let r2 = b.iter().zip(self.matvec(&cand)).map(|(b, a)| (b - a).abs()).fold(0.0, f64::max);
            if r2 < res {
                x = cand;
                res = r2;
            }
        }
        Ok((x, res))
    }

    /// Full inverse in O(n^2) from its first/last rows and columns (Trench recurrence).
    pub fn inverse(&self) -> Result<Matrix> {
        let n = self.n;
        let (x, y, _) = self.levinson(None)?;
        let (v, w, _) = self.transpose().levinson(None)?;
        let mut b = Matrix::zeros(n);
        for j in 0..n {
            b.a[j] = v[j];
        }
        for i in 0..n {
            b.a[i * n] = x[i];
        }
        let x0 = x[0];
        for i in 0..n - 1 {
            for j in 0..n - 1 {
                b.a[(i + 1) * n + j + 1] = b.a[i * n + j] + (x[i + 1] * v[j + 1] - y[i] * w[j]) / x0;
            }
        }
        Ok(b)
    }

    /// Top-left (m+1) x (m+1) block of T^-1 without forming the rest.
    pub fn inverse_block(&self, m: usize) -> Result<Matrix> {
        let n = self.n;
        let k = (m + 1).min(n);
        let (x, y, _) = self.levinson(None)?;
        let (v, w, _) = self.transpose().levinson(None)?;
        let mut b = Matrix::zeros(k);
        b.a[..k].copy_from_slice(&v[..k]);
        for i in 0..k {
            b.a[i * k] = x[i];
        }
        let x0 = x[0];
        for i in 0..k - 1 {
            for j in 0..k - 1 {
                b.a[(i + 1) * k + j + 1] = b.a[i * k + j] + (x[i + 1] * v[j + 1] - y[i] * w[j]) / x0;
            }
        }
        Ok(b)
    }

    /// max |(T B - I)_{ij}| over a subset of columns of B.
    pub fn inverse_residual(&self, b: &Matrix, max_cols: usize) -> f64 {
        let n = self.n;
        let step = (n / max_cols.max(1)).max(1);
        let mut worst = 0.0f64;
        let mut cols: Vec<usize> = (0..n).step_by(step).collect();
        if *cols.last().unwrap() != n - 1 {
            cols.push(n - 1);
        }
        for j in cols {
            let col: Vec<f64> = (0..n).map(|i| b.get(i, j)).collect();
            let tc = self.matvec(&col);
            for (i, v) in tc.iter().enumerate() {
                let e = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((v - e).abs());
            }
        }
        worst
    }
}
