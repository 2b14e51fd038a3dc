//! Independent reference computations. Nothing here calls into the solver
#![allow(clippy::needless_range_loop)]
//! code under test.
#![allow(dead_code)]

/// Row-major `n x d` design.
pub struct Design {
    pub n: usize,
    pub d: usize,
    pub a: Vec<f64>,
}

impl Design {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.d + j]
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.at(i, j)).collect()
    }
}

/// Gaussian elimination with partial pivoting. `None` if singular.
pub fn solve(mut m: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let k = b.len();
    for c in 0..k {
        let p = (c..k).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs()))?;
        if m[p][c].abs() < 1e-13 {
            return None;
        }
        m.swap(c, p);
        b.swap(c, p);
        for r in c + 1..k {
            let f = m[r][c] / m[c][c];
            for q in c..k {
                m[r][q] -= f * m[c][q];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; k];
    for c in (0..k).rev() {
        let s: f64 = (c + 1..k).map(|q| m[c][q] * x[q]).sum();
        x[c] = (b[c] - s) / m[c][c];
    }
    Some(x)
}

/// `(1/(2n)) ||y - X b||^2 + lambda ||b||_1`.
pub fn objective(x: &Design, y: &[f64], b: &[f64], lambda: f64) -> f64 {
    let mut rss = 0.0;
    for i in 0..x.n {
        let fit: f64 = (0..x.d).map(|j| x.at(i, j) * b[j]).sum();
        rss += (y[i] - fit).powi(2);
    }
    rss / (2.0 * x.n as f64) + lambda * b.iter().map(|v| v.abs()).sum::<f64>()
}

/// Exact Lasso minimizer by enumerating every support and sign pattern.
///
/// For signs `s` on support `S` the stationarity condition reads
/// `X_S'X_S b = X_S'y - n lambda s`; a solution whose signs agree with `s` is
/// a candidate, and the minimum-objective candidate is the global minimizer
/// when the design has full column rank.
pub fn brute_force_lasso(x: &Design, y: &[f64], lambda: f64) -> Vec<f64> {
    let (n, d) = (x.n, x.d);
    let cols: Vec<Vec<f64>> = (0..d).map(|j| x.col(j)).collect();
    let ip = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
    let mut best = vec![0.0; d];
    let mut best_obj = objective(x, y, &best, lambda);
    let total = 3usize.pow(d as u32);
    for code in 0..total {
        let mut signs = vec![0i8; d];
        let mut c = code;
        for s in signs.iter_mut() {
            *s = (c % 3) as i8 - 1;
            c /= 3;
        }
        let sup: Vec<usize> = (0..d).filter(|&j| signs[j] != 0).collect();
        if sup.is_empty() {
            continue;
        }
        let g: Vec<Vec<f64>> = sup
            .iter()
            .map(|&i| sup.iter().map(|&j| ip(&cols[i], &cols[j])).collect())
            .collect();
        let rhs: Vec<f64> = sup
            .iter()
            .map(|&j| ip(&cols[j], y) - n as f64 * lambda * f64::from(signs[j]))
            .collect();
        let Some(sol) = solve(g, rhs) else { continue };
        if sup
            .iter()
            .zip(&sol)
            .any(|(&j, &v)| v * f64::from(signs[j]) <= 0.0)
        {
            continue;
        }
        let mut b = vec![0.0; d];
        for (&j, &v) in sup.iter().zip(&sol) {
            b[j] = v;
        }
        let obj = objective(x, y, &b, lambda);
        if obj < best_obj {
            best_obj = obj;
            best = b;
        }
    }
    best
}

/// Orthonormal columns by modified Gram-Schmidt, row-major `n x d`.
pub fn orthonormalize(x: &Design) -> Design {
    let mut cols: Vec<Vec<f64>> = (0..x.d).map(|j| x.col(j)).collect();
    for j in 0..x.d {
        for k in 0..j {
            let p: f64 = cols[j].iter().zip(&cols[k]).map(|(a, b)| a * b).sum();
            let ck = cols[k].clone();
            for (a, b) in cols[j].iter_mut().zip(&ck) {
                *a -= p * b;
            }
        }
        let norm = cols[j].iter().map(|v| v * v).sum::<f64>().sqrt();
        for v in cols[j].iter_mut() {
            *v /= norm;
        }
    }
    let mut a = vec![0.0; x.n * x.d];
    for i in 0..x.n {
        for j in 0..x.d {
            a[i * x.d + j] = cols[j][i];
        }
    }
    Design { n: x.n, d: x.d, a }
}

pub fn soft(z: f64, t: f64) -> f64 {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

/// CDF of the radial density `(4/r) sin^2(2 pi tau / r)` on `[r/2, r]`.
pub fn radial_cdf(tau: f64, r: f64) -> f64 {
    let u = tau.clamp(r / 2.0, r);
    (2.0 * u / r - 1.0) - (4.0 * std::f64::consts::PI * u / r).sin() / (2.0 * std::f64::consts::PI)
}

/// Upper 0.999 quantile of chi-square with `k` degrees of freedom by the
/// Wilson-Hilferty cube approximation.
pub fn chi2_q999(k: usize) -> f64 {
    let z = 3.090_232_306_167_813; // standard normal 0.999 quantile
    let k = k as f64;
    let h = 2.0 / (9.0 * k);
    k * (1.0 - h + z * h.sqrt()).powi(3)
}

/// Small deterministic generator for test inputs (SplitMix64).
pub struct Mix(pub u64);

impl Mix {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.uniform() * n as f64) as usize % n
    }

    pub fn design(&mut self, n: usize, d: usize) -> Design {
        Design {
            n,
            d,
            a: (0..n * d).map(|_| self.normal()).collect(),
        }
    }
}
