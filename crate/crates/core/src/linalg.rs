//! Tiny dense helpers on slices. Matrices are row-major `rows × cols`.

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// `out = A x` for `A` of shape `rows × cols`.
pub fn matvec(a: &[f64], rows: usize, cols: usize, x: &[f64], out: &mut [f64]) {
    for r in 0..rows {
        out[r] = dot(&a[r * cols..(r + 1) * cols], &x[..cols]);
    }
}

/// `out = Aᵀ x` for `A` of shape `rows × cols`.
pub fn matvec_t(a: &[f64], rows: usize, cols: usize, x: &[f64], out: &mut [f64]) {
    out[..cols].iter_mut().for_each(|v| *v = 0.0);
    for r in 0..rows {
        for c in 0..cols {
            out[c] += a[r * cols + c] * x[r];
        }
    }
}

/// `C = A B`, `A: n × k`, `B: k × m`.
pub fn matmul(a: &[f64], b: &[f64], n: usize, k: usize, m: usize) -> Vec<f64> {
    let mut c = vec![0.0; n * m];
    for i in 0..n {
        for l in 0..k {
            let ail = a[i * k + l];
            if ail != 0.0 {
                for j in 0..m {
                    c[i * m + j] += ail * b[l * m + j];
                }
            }
        }
    }
    c
}

pub fn identity(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = 1.0;
    }
    m
}

/// Frobenius norm of `A - B`.
pub fn frob_dist(a: &[f64], b: &[f64]) -> f64 {
    dist(a, b)
}

/// Modified Gram–Schmidt on the columns of a `rows × cols` matrix.
pub fn orthonormalize_columns(a: &mut [f64], rows: usize, cols: usize) {
    for j in 0..cols {
        for k in 0..j {
            let mut p = 0.0;
            for r in 0..rows {
                p += a[r * cols + j] * a[r * cols + k];
            }
            for r in 0..rows {
                a[r * cols + j] -= p * a[r * cols + k];
            }
        }
        let mut n = 0.0;
        for r in 0..rows {
            n += a[r * cols + j] * a[r * cols + j];
        }
        let n = n.sqrt();
        if n > 0.0 {
            for r in 0..rows {
                a[r * cols + j] /= n;
            }
        }
    }
}

/// Largest singular value: closed form up to 2 columns, power iteration beyond.
pub fn spectral_norm(a: &[f64], rows: usize, cols: usize) -> f64 {
    let gram = |i: usize, j: usize| -> f64 { (0..rows).map(|r| a[r * cols + i] * a[r * cols + j]).sum() };
    match cols {
        0 => 0.0,
        1 => gram(0, 0).sqrt(),
        2 => {
            let (p, q, r) = (gram(0, 0), gram(1, 1), gram(0, 1));
            let tr = p + q;
            let disc = ((p - q) * (p - q) + 4.0 * r * r).sqrt();
            (0.5 * (tr + disc)).sqrt()
        }
        _ => {
            let mut ata = vec![0.0; cols * cols];
            for i in 0..cols {
                for j in 0..cols {
                    ata[i * cols + j] = gram(i, j);
                }
            }
            let mut v = vec![1.0; cols];
            let mut lambda = 0.0;
            for _ in 0..500 {
                let mut w = vec![0.0; cols];
                matvec(&ata, cols, cols, &v, &mut w);
                let n = norm(&w);
                if n == 0.0 {
                    return 0.0;
                }
                lambda = n / norm(&v);
                v.iter_mut().zip(&w).for_each(|(vi, wi)| *vi = wi / n);
            }
            lambda.sqrt()
        }
    }
}
