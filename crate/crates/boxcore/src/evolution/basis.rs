//! Closed-form matrix elements in the orthonormal sine basis of (0,1).
//!
//! All matrices are returned dense, row-major, with index i ↔ quantum number
//! m = i+1.

/// M_{m,n} = 2∫₀¹ y² sin(mπy) sin(nπy) dy.
///
/// Diagonal: 1/3 − 1/(2π²m²). Off-diagonal:
/// (2(−1)^{m+n}/π²)·(1/(m−n)² − 1/(m+n)²).
pub fn quadratic_moment_matrix(n: usize) -> Vec<f64> {
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        let m = (i + 1) as f64;
        out[i * n + i] = 1.0 / 3.0 - 1.0 / (2.0 * pi2 * m * m);
        for j in (i + 1)..n {
            let k = (j + 1) as f64;
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            let v = 2.0 * sign / pi2 * (1.0 / ((m - k) * (m - k)) - 1.0 / ((m + k) * (m + k)));
            out[i * n + j] = v;
            out[j * n + i] = v;
        }
    }
    out
}

/// P_{m,n} = 2∫₀¹ y sin(mπy) sin(nπy) dy.
///
/// Diagonal: 1/2. Off-diagonal:
/// (((−1)^{m+n} − 1)/π²)·(1/(m−n)² − 1/(m+n)²), zero for m+n even.
pub fn linear_moment_matrix(n: usize) -> Vec<f64> {
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        out[i * n + i] = 0.5;
        let m = (i + 1) as f64;
        for j in (i + 1)..n {
            let k = (j + 1) as f64;
            if (i + j) % 2 == 0 {
                continue; // m+n odd in 1-based terms ⇔ i+j odd in 0-based
            }
            let v = -2.0 / pi2 * (1.0 / ((m - k) * (m - k)) - 1.0 / ((m + k) * (m + k)));
            out[i * n + j] = v;
            out[j * n + i] = v;
        }
    }
    out
}

/// C(p)_{m,n} = 2∫₀¹ sin(mπy) sin(nπy) cos(pπy) dy
///            = δ_{m,n} for p = 0, else (1/2)(δ_{|m−n|,p} − δ_{m+n,p}).
pub fn cos_coupling(n: usize, p: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let (m, k) = (i + 1, j + 1);
            out[i * n + j] = cos_coupling_entry(m, k, p);
        }
    }
    out
}

/// Single entry of [`cos_coupling`], in quantum numbers.
pub fn cos_coupling_entry(m: usize, k: usize, p: usize) -> f64 {
    if p == 0 {
        return if m == k { 1.0 } else { 0.0 };
    }
    let mut v = 0.0;
    if m.abs_diff(k) == p {
        v += 0.5;
    }
    if m + k == p {
        v -= 0.5;
    }
    v
}
