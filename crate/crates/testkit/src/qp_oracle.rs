//! Brute-force maximizer for the box-and-equality constrained quadratic
//!
//! ```text
//! maximize   sum(a) - 1/2 a' Q a
//! subject to 0 <= a_i <= c,  y' a = 0
//! ```
//!
//! Two independent routes are combined and the better value returned:
//! exhaustive enumeration of active sets (each variable at 0, at c, or free,
//! solving the equality-constrained system on the free block), and projected
//! gradient ascent with a bisection projection onto the feasible set.

pub fn objective(q: &[Vec<f64>], a: &[f64]) -> f64 {
    let n = a.len();
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            quad += a[i] * a[j] * q[i][j];
        }
    }
    a.iter().sum::<f64>() - 0.5 * quad
}

/// Gaussian elimination with partial pivoting; `None` when a pivot collapses.
fn solve_dense(mut m: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let n = rhs.len();
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&a, &b| m[a][col].abs().partial_cmp(&m[b][col].abs()).unwrap())?;
        if m[pivot_row][col].abs() < 1e-10 {
            return None;
        }
        m.swap(col, pivot_row);
        rhs.swap(col, pivot_row);
        for row in col + 1..n {
            let factor = m[row][col] / m[col][col];
            for k in col..n {
                m[row][k] -= factor * m[col][k];
            }
            rhs[row] -= factor * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = rhs[row];
        for k in row + 1..n {
            acc -= m[row][k] * x[k];
        }
        x[row] = acc / m[row][row];
    }
    Some(x)
}

/// Projection of `v` onto `{0 <= a <= c, y'a = 0}` by bisection on the
/// multiplier of the equality constraint.
fn project(v: &[f64], y: &[f64], c: f64) -> Vec<f64> {
    let clipped = |lambda: f64| -> Vec<f64> {
        v.iter()
            .zip(y)
            .map(|(vi, yi)| (vi - lambda * yi).clamp(0.0, c))
            .collect()
    };
    let residual = |lambda: f64| -> f64 {
        clipped(lambda)
            .iter()
            .zip(y)
            .map(|(ai, yi)| ai * yi)
            .sum()
    };
    let bound = v.iter().fold(0.0f64, |m, vi| m.max(vi.abs())) + c + 1.0;
    let (mut lo, mut hi) = (-bound, bound);
    for _ in 0..90 {
        let mid = 0.5 * (lo + hi);
        if residual(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    clipped(0.5 * (lo + hi))
}

fn projected_gradient(q: &[Vec<f64>], y: &[f64], c: f64, start: &[f64], iters: usize) -> f64 {
    let n = y.len();
    // Gershgorin bound on the largest eigenvalue gives a safe step size.
    let lip = q
        .iter()
        .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
        .fold(1.0f64, f64::max);
    let step = 1.0 / lip;
    let mut a = project(start, y, c);
    let mut best = objective(q, &a);
    for _ in 0..iters {
        let mut grad = vec![1.0f64; n];
        for i in 0..n {
            for j in 0..n {
                grad[i] -= q[i][j] * a[j];
            }
        }
        let moved: Vec<f64> = a.iter().zip(&grad).map(|(ai, gi)| ai + step * gi).collect();
        a = project(&moved, y, c);
        best = best.max(objective(q, &a));
    }
    best
}

fn active_set_enumeration(q: &[Vec<f64>], y: &[f64], c: f64) -> (f64, Option<Vec<f64>>) {
    let n = y.len();
    let mut best = f64::NEG_INFINITY;
    let mut best_a = None;
    let combos = 3usize.pow(n as u32);
    for combo in 0..combos {
        let mut state = Vec::with_capacity(n);
        let mut rest = combo;
        for _ in 0..n {
            state.push(rest % 3); // 0 -> at 0, 1 -> at c, 2 -> free
            rest /= 3;
        }
        let free: Vec<usize> = (0..n).filter(|&i| state[i] == 2).collect();
        let mut a = vec![0.0f64; n];
        for i in 0..n {
            if state[i] == 1 {
                a[i] = c;
            }
        }

        if free.is_empty() {
            let eq: f64 = a.iter().zip(y).map(|(ai, yi)| ai * yi).sum();
            if eq.abs() <= 1e-9 {
                let val = objective(q, &a);
                if val > best {
                    best = val;
                    best_a = Some(a.clone());
                }
            }
            continue;
        }

        // KKT system on the free block with a multiplier for y'a = 0.
        let k = free.len();
        let mut m = vec![vec![0.0f64; k + 1]; k + 1];
        let mut rhs = vec![0.0f64; k + 1];
        for (r, &i) in free.iter().enumerate() {
            for (s, &j) in free.iter().enumerate() {
                m[r][s] = q[i][j];
            }
            m[r][k] = y[i];
            m[k][r] = y[i];
            let bound_term: f64 = (0..n)
                .filter(|&j| state[j] == 1)
                .map(|j| q[i][j] * c)
                .sum();
            rhs[r] = 1.0 - bound_term;
        }
        rhs[k] = -(0..n)
            .filter(|&j| state[j] == 1)
            .map(|j| y[j] * c)
            .sum::<f64>();

        let Some(sol) = solve_dense(m, rhs) else {
            continue;
        };
        let mut feasible = true;
        for (r, &i) in free.iter().enumerate() {
            if sol[r] < -1e-9 || sol[r] > c + 1e-9 {
                feasible = false;
                break;
            }
            a[i] = sol[r].clamp(0.0, c);
        }
        if !feasible {
            continue;
        }
        let eq: f64 = a.iter().zip(y).map(|(ai, yi)| ai * yi).sum();
        if eq.abs() <= 1e-8 {
            let val = objective(q, &a);
            if val > best {
                best = val;
                best_a = Some(a.clone());
            }
        }
    }
    (best, best_a)
}

/// Best dual objective value found over the feasible set.
pub fn max_dual_objective(q: &[Vec<f64>], y: &[f64], c: f64) -> f64 {
    assert!(q.len() == y.len());
    let n = y.len();
    let (enumerated, enumerated_a) = active_set_enumeration(q, y, c);
    let mut best = enumerated.max(projected_gradient(q, y, c, &vec![0.0; n], 20_000));
    // Polish from the enumerated winner; faces the elimination skipped as
    // singular get covered by ascent from a nearby point.
    if let Some(start) = enumerated_a {
        best = best.max(projected_gradient(q, y, c, &start, 5_000));
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_problem_maximum() {
        // K = [[0,0],[0,4]], y = (+1,-1): objective 2a - 2a^2, max 0.5 at a=0.5.
        let q = vec![vec![0.0, 0.0], vec![0.0, 4.0]];
        let y = vec![1.0, -1.0];
        let best = max_dual_objective(&q, &y, 10.0);
        assert!((best - 0.5).abs() < 1e-9, "{best}");
    }

    #[test]
    fn projection_lands_on_the_constraint() {
        let v = vec![3.0, -2.0, 0.5];
        let y = vec![1.0, -1.0, 1.0];
        let a = project(&v, &y, 2.0);
        let eq: f64 = a.iter().zip(&y).map(|(ai, yi)| ai * yi).sum();
        assert!(eq.abs() < 1e-9);
        assert!(a.iter().all(|ai| (0.0..=2.0).contains(ai)));
    }
}
