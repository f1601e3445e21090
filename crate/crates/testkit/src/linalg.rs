//! Small dense symmetric-matrix helpers for test assertions.

/// Whether the symmetric matrix is positive definite, via Cholesky.
fn is_positive_definite(m: &[Vec<f64>]) -> bool {
    let n = m.len();
    let mut l = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = m[i][j];
            for k in 0..j {
                sum -= l[i][k] * l[j][k];
            }
            if i == j {
                if sum <= 0.0 {
                    return false;
                }
                l[i][j] = sum.sqrt();
            } else {
                l[i][j] = sum / l[j][j];
            }
        }
    }
    true
}

/// Smallest eigenvalue of a symmetric matrix by bisection on the shift that
/// keeps `M - shift*I` positive definite.
pub fn min_symmetric_eigenvalue(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    assert!(n > 0 && m.iter().all(|row| row.len() == n));
    // Gershgorin bounds.
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let radius: f64 = (0..n).filter(|&j| j != i).map(|j| m[i][j].abs()).sum();
        lo = lo.min(m[i][i] - radius);
        hi = hi.max(m[i][i] + radius);
    }
    let shifted_pd = |shift: f64| {
        let shifted: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { m[i][j] - shift } else { m[i][j] })
                    .collect()
            })
            .collect();
        is_positive_definite(&shifted)
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if shifted_pd(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
