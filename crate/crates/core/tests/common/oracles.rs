//! Independent reference computations. Nothing here calls into the library's
//! numeric paths; inputs and outputs are plain `Vec`s.

#![allow(dead_code, clippy::needless_range_loop)]

/// Row-major dense matrix.
#[derive(Debug, Clone)]
pub struct Dense {
    pub rows: usize,
    pub cols: usize,
    pub a: Vec<f64>,
}

impl Dense {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, a: vec![0.0; rows * cols] }
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * self.cols + j] = v;
    }

    pub fn transpose_mul_self(&self) -> Dense {
        let mut g = Dense::zeros(self.cols, self.cols);
        for i in 0..self.cols {
            for j in 0..self.cols {
                let mut s = 0.0;
                for k in 0..self.rows {
                    s += self.at(k, i) * self.at(k, j);
                }
                g.set(i, j, s);
            }
        }
        g
    }

    pub fn mul(&self, other: &Dense) -> Dense {
        assert_eq!(self.cols, other.rows);
        let mut out = Dense::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut s = 0.0;
                for k in 0..self.cols {
                    s += self.at(i, k) * other.at(k, j);
                }
                out.set(i, j, s);
            }
        }
        out
    }
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
/// Returns `(eigenvalues, eigenvectors as columns)`.
pub fn jacobi_eigen(sym: &Dense) -> (Vec<f64>, Dense) {
    let n = sym.rows;
    let mut a = sym.clone();
    let mut v = Dense::zeros(n, n);
    for i in 0..n {
        v.set(i, i, 1.0);
    }
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a.at(i, j) * a.at(i, j))
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a.at(p, q);
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a.at(q, q) - a.at(p, p)) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a.at(k, p);
                    let akq = a.at(k, q);
                    a.set(k, p, c * akp - s * akq);
                    a.set(k, q, s * akp + c * akq);
                }
                for k in 0..n {
                    let apk = a.at(p, k);
                    let aqk = a.at(q, k);
                    a.set(p, k, c * apk - s * aqk);
                    a.set(q, k, s * apk + c * aqk);
                }
                for k in 0..n {
                    let vkp = v.at(k, p);
                    let vkq = v.at(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }
    ((0..n).map(|i| a.at(i, i)).collect(), v)
}

/// Singular values of `a` (descending) via the eigenvalues of `a^T a`.
pub fn singular_values(a: &Dense) -> Vec<f64> {
    let (vals, _) = jacobi_eigen(&a.transpose_mul_self());
    let mut s: Vec<f64> = vals.into_iter().map(|l| l.max(0.0).sqrt()).collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s.truncate(a.rows.min(a.cols));
    s
}

/// `U max(S - tau, 0) V^T` computed as `A V diag(g) V^T` with
/// `g = max(s - tau, 0) / s`, using the Jacobi eigenvectors of `A^T A`.
pub fn svt(a: &Dense, tau: f64) -> Dense {
    let (vals, v) = jacobi_eigen(&a.transpose_mul_self());
    let n = a.cols;
    let mut gain = Dense::zeros(n, n);
    for k in 0..n {
        let s = vals[k].max(0.0).sqrt();
        let g = if s > tau && s > 0.0 { (s - tau) / s } else { 0.0 };
        gain.set(k, k, g);
    }
    let mut vt = Dense::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            vt.set(i, j, v.at(j, i));
        }
    }
    a.mul(&v).mul(&gain).mul(&vt)
}

/// Nuclear norm from the eigenvalues of `a^T a`.
pub fn nuclear_norm(a: &Dense) -> f64 {
    singular_values(a).iter().sum()
}

/// Gaussian elimination with partial pivoting on `m x = b`.
pub fn gauss_solve(m: &Dense, b: &[f64]) -> Vec<f64> {
    let n = m.rows;
    let mut aug: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row: Vec<f64> = (0..n).map(|j| m.at(i, j)).collect();
            row.push(b[i]);
            row
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).max_by(|&x, &y| aug[x][col].abs().total_cmp(&aug[y][col].abs())).unwrap();
        aug.swap(col, pivot);
        for r in col + 1..n {
            let f = aug[r][col] / aug[col][col];
            for k in col..=n {
                aug[r][k] -= f * aug[col][k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = aug[i][n];
        for k in i + 1..n {
            s -= aug[i][k] * x[k];
        }
        x[i] = s / aug[i][i];
    }
    x
}

/// Ridge solution `(S^T S + alpha^2 I)^{-1} S^T x` by Gaussian elimination.
pub fn ridge(s: &Dense, x: &[f64], alpha: f64) -> Vec<f64> {
    let mut g = s.transpose_mul_self();
    for i in 0..g.rows {
        let d = g.at(i, i);
        g.set(i, i, d + alpha * alpha);
    }
    let rhs: Vec<f64> = (0..s.cols).map(|j| (0..s.rows).map(|k| s.at(k, j) * x[k]).sum()).collect();
    gauss_solve(&g, &rhs)
}

/// Squared Frobenius distance.
pub fn dist2(a: &Dense, b: &Dense) -> f64 {
    a.a.iter().zip(&b.a).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// `||M - Y1||^2 + mu (||M - Y2||^2 + ||M||_*)`
pub fn fused_objective(m: &Dense, y1: &Dense, y2: &Dense, mu: f64) -> f64 {
    dist2(m, y1) + mu * (dist2(m, y2) + nuclear_norm(m))
}

/// Proximal gradient on the fused objective with half the Lipschitz step,
/// using the eigen-based SVT above as the prox.
pub fn fused_minimizer(y1: &Dense, y2: &Dense, mu: f64, iters: usize) -> Dense {
    let lipschitz = 2.0 * (1.0 + mu);
    let step = 0.5 / lipschitz;
    let mut m = y2.clone();
    for _ in 0..iters {
        let mut z = m.clone();
        for i in 0..m.a.len() {
            let grad = 2.0 * (m.a[i] - y1.a[i]) + 2.0 * mu * (m.a[i] - y2.a[i]);
            z.a[i] = m.a[i] - step * grad;
        }
        m = svt(&z, step * mu);
    }
    m
}

/// 8-bit-scale PSNR by a scalar loop.
pub fn psnr(a: &[f64], b: &[f64]) -> f64 {
    let mut sse = 0.0;
    for i in 0..a.len() {
        let d = a[i] * 255.0 - b[i] * 255.0;
        sse += d * d;
    }
    let mse = sse / a.len() as f64;
    10.0 * (65025.0 / mse).log10()
}

/// Mean SSIM of one plane from the direct windowed formula with an explicit
/// 11x11 Gaussian weight table.
pub fn ssim_plane(x: &[f64], y: &[f64], w: usize, h: usize) -> f64 {
    let k = 11;
    let mut g = [[0.0f64; 11]; 11];
    let mut total = 0.0;
    for (i, row) in g.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            let (di, dj) = (i as f64 - 5.0, j as f64 - 5.0);
            *v = (-(di * di + dj * dj) / (2.0 * 1.5 * 1.5)).exp();
            total += *v;
        }
    }
    let (c1, c2) = (0.01f64.powi(2), 0.03f64.powi(2));
    let mut acc = 0.0;
    let mut count = 0;
    for r in 0..=h - k {
        for c in 0..=w - k {
            let (mut mx, mut my) = (0.0, 0.0);
            for i in 0..k {
                for j in 0..k {
                    let wgt = g[i][j] / total;
                    mx += wgt * x[(r + i) * w + c + j];
                    my += wgt * y[(r + i) * w + c + j];
                }
            }
            let (mut vx, mut vy, mut cov) = (0.0, 0.0, 0.0);
            for i in 0..k {
                for j in 0..k {
                    let wgt = g[i][j] / total;
                    let dx = x[(r + i) * w + c + j] - mx;
                    let dy = y[(r + i) * w + c + j] - my;
                    vx += wgt * dx * dx;
                    vy += wgt * dy * dy;
                    cov += wgt * dx * dy;
                }
            }
            acc += ((2.0 * mx * my + c1) * (2.0 * cov + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
            count += 1;
        }
    }
    acc / count as f64
}

/// Block matching by exhaustive scan: every position in the window, full
/// sort, reference forced first.
#[allow(clippy::too_many_arguments)]
pub fn brute_force_match(
    img: &[f64],
    w: usize,
    h: usize,
    ch: usize,
    n: usize,
    reference: (usize, usize),
    radius: usize,
    count: usize,
) -> Vec<(usize, usize)> {
    let mut all = Vec::new();
    for r in 0..=h - n {
        for c in 0..=w - n {
            let dr = (r as isize - reference.0 as isize).unsigned_abs();
            let dc = (c as isize - reference.1 as isize).unsigned_abs();
            if dr.max(dc) > radius || (r, c) == reference {
                continue;
            }
            let mut cost = 0.0;
            for i in 0..n {
                for j in 0..n {
                    for z in 0..ch {
                        let a = img[((reference.0 + i) * w + reference.1 + j) * ch + z];
                        let b = img[((r + i) * w + c + j) * ch + z];
                        cost += (a - b) * (a - b);
                    }
                }
            }
            all.push((cost, r, c));
        }
    }
    all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then((a.1, a.2).cmp(&(b.1, b.2))));
    let mut out = vec![reference];
    out.extend(all.into_iter().take(count - 1).map(|(_, r, c)| (r, c)));
    out
}

/// Support matrix by direct gather, row-major `(rows x offsets)`.
pub fn gather_support(
    img: &[f64],
    w: usize,
    h: usize,
    coords: &[(usize, usize)],
    n: usize,
    offsets: &[(isize, isize, isize)],
) -> Dense {
    let planes = coords.len();
    let mut out = Dense::zeros(n * n * planes, offsets.len());
    for l in 0..planes {
        for j in 0..n {
            for k in 0..n {
                let row = l * n * n + j * n + k;
                for (o, &(m, p, q)) in offsets.iter().enumerate() {
                    let mut plane = l as isize + m;
                    while plane < 0 {
                        plane += planes as isize;
                    }
                    let plane = plane as usize % planes;
                    let mut r = coords[plane].0 as isize + j as isize + p;
                    let mut c = coords[plane].1 as isize + k as isize + q;
                    r = r.max(0).min(h as isize - 1);
                    c = c.max(0).min(w as isize - 1);
                    out.set(row, o, img[r as usize * w + c as usize]);
                }
            }
        }
    }
    out
}
