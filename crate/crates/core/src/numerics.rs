//! Small shared numerical kernels: tridiagonal solves, quadrature,
//! root bracketing, extrapolation, and line fits.

use crate::error::{Error, Result};

/// Solve a tridiagonal system `A x = d` in place by the Thomas algorithm.
///
/// - `lower`: sub-diagonal, `lower[0]` unused
/// - `diag`: main diagonal
/// - `upper`: super-diagonal, `upper[n-1]` unused
///
/// Returns the solution vector. The caller is responsible for supplying a
/// system with nonvanishing pivots (all uses in this crate are strictly
/// diagonally dominant M-matrices).
pub fn thomas_solve(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = rhs.len();
    assert!(n >= 2);
    assert_eq!(lower.len(), n);
    assert_eq!(diag.len(), n);
    assert_eq!(upper.len(), n);

    let mut c_prime = vec![0.0; n];
    let mut d_prime = vec![0.0; n];

    c_prime[0] = upper[0] / diag[0];
    d_prime[0] = rhs[0] / diag[0];
    for i in 1..n {
        let den = diag[i] - lower[i] * c_prime[i - 1];
        debug_assert!(den != 0.0, "tridiagonal pivot vanished at row {i}");
        if i < n - 1 {
            c_prime[i] = upper[i] / den;
        }
        d_prime[i] = (rhs[i] - lower[i] * d_prime[i - 1]) / den;
    }

    let mut x = vec![0.0; n];
    x[n - 1] = d_prime[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d_prime[i] - c_prime[i] * x[i + 1];
    }
    x
}

/// Composite Simpson rule for a callable on `[a, b]` with `panels` panels
/// (each panel is one parabolic segment; `panels` is rounded up to even
/// internally via doubling the sample count).
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    assert!(panels >= 1);
    let n = 2 * panels; // always even number of subintervals
    let h = (b - a) / n as f64;
    let mut sum = f(a) + f(b);
    for i in 1..n {
        let x = a + i as f64 * h;
        sum += if i % 2 == 1 { 4.0 * f(x) } else { 2.0 * f(x) };
    }
    sum * h / 3.0
}

/// Trapezoid rule over sampled values on arbitrary increasing nodes.
pub fn trapezoid(nodes: &[f64], values: &[f64]) -> f64 {
    assert_eq!(nodes.len(), values.len());
    let mut sum = 0.0;
    for i in 1..nodes.len() {
        sum += 0.5 * (values[i] + values[i - 1]) * (nodes[i] - nodes[i - 1]);
    }
    sum
}

/// Bisection for a sign change of `f` on `[lo, hi]`, to relative tolerance
/// `rel_tol` on the bracket width. `f(lo)` and `f(hi)` must differ in sign.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, rel_tol: f64) -> Result<f64> {
    let flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::Bracket(format!(
            "no sign change on [{lo:.3e}, {hi:.3e}]: f(lo)={flo:.3e}, f(hi)={fhi:.3e}"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (hi - lo).abs() <= rel_tol * mid.abs().max(f64::MIN_POSITIVE) {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Aitken Δ² extrapolation from three successive values of a (hopefully
/// geometrically converging) sequence. Returns `None` when the update is
/// ill-conditioned (vanishing second difference) or non-monotone.
pub fn aitken(g0: f64, g1: f64, g2: f64) -> Option<f64> {
    let d1 = g1 - g0;
    let d2 = g2 - g1;
    let dd = d2 - d1;
    if dd.abs() <= 1e-14 * (g0.abs() + g1.abs() + g2.abs()) {
        // already converged to rounding; latest value is the limit
        return Some(g2);
    }
    if d1 * d2 < 0.0 {
        return None; // oscillating: Δ² estimate unreliable
    }
    Some(g2 - d2 * d2 / dd)
}

/// Least-squares line fit `y ≈ slope·x + intercept`.
/// Returns `(slope, intercept)`.
pub fn line_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let den = n * sxx - sx * sx;
    let slope = (n * sxy - sx * sy) / den;
    let intercept = (sy - slope * sx) / n;
    (slope, intercept)
}

/// Linear interpolation of tabulated `(nodes, values)` at `x`; nodes must be
/// strictly increasing and `x` inside `[nodes[0], nodes[last]]`.
pub fn lerp_table(nodes: &[f64], values: &[f64], x: f64) -> f64 {
    debug_assert_eq!(nodes.len(), values.len());
    let n = nodes.len();
    debug_assert!(x >= nodes[0] - 1e-12 && x <= nodes[n - 1] + 1e-12);
    // binary search for the bracketing cell
    let mut lo = 0usize;
    let mut hi = n - 1;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if nodes[mid] <= x {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = ((x - nodes[lo]) / (nodes[hi] - nodes[lo])).clamp(0.0, 1.0);
    values[lo] + t * (values[hi] - values[lo])
}

/// Surface area of the unit sphere S^{N−1} in R^N.
pub fn unit_sphere_area(dim: u32) -> f64 {
    // ω_{N−1} = 2 π^{N/2} / Γ(N/2); Γ at integer/half-integer arguments.
    let n = dim as f64;
    2.0 * std::f64::consts::PI.powf(n / 2.0) / gamma_half_integer(dim)
}

/// Γ(N/2) for positive integer N.
fn gamma_half_integer(dim: u32) -> f64 {
    assert!(dim >= 1);
    // Γ(1/2) = √π, Γ(1) = 1, Γ(x+1) = x Γ(x)
    let mut x = if dim % 2 == 1 {
        0.5
    } else {
        1.0
    };
    let mut g = if dim % 2 == 1 {
        std::f64::consts::PI.sqrt()
    } else {
        1.0
    };
    while 2.0 * x < dim as f64 {
        g *= x;
        x += 1.0;
    }
    g
}

/// Maximum relative difference between two equally indexed slices, scaled by
/// the largest magnitude in `reference` (a sup-norm relative distance).
pub fn max_rel_diff(a: &[f64], reference: &[f64]) -> f64 {
    assert_eq!(a.len(), reference.len());
    let scale = reference
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    a.iter()
        .zip(reference)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
        / scale
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thomas_recovers_known_solution() {
        // 1D Laplacian system with known answer
        let n = 6;
        let lower = vec![-1.0; n];
        let diag = vec![2.0; n];
        let upper = vec![-1.0; n];
        let x_true: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).sin() + 1.0).collect();
        let mut rhs = vec![0.0; n];
        for i in 0..n {
            rhs[i] = 2.0 * x_true[i];
            if i > 0 {
                rhs[i] -= x_true[i - 1];
            }
            if i < n - 1 {
                rhs[i] -= x_true[i + 1];
            }
        }
        let x = thomas_solve(&lower, &diag, &upper, &rhs);
        for (a, b) in x.iter().zip(&x_true) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn simpson_exact_on_cubics() {
        let v = simpson(|x| x * x * x - 2.0 * x + 1.0, 0.0, 2.0, 3);
        assert!((v - (4.0 - 4.0 + 2.0)).abs() < 1e-13);
    }

    #[test]
    fn bisect_finds_sqrt2() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - 2.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn aitken_accelerates_geometric() {
        // g_k = 1 + 0.5^k
        let g = aitken(1.5, 1.25, 1.125).unwrap();
        assert!((g - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sphere_areas_match_closed_forms() {
        assert!((unit_sphere_area(1) - 2.0).abs() < 1e-14);
        assert!((unit_sphere_area(2) - 2.0 * std::f64::consts::PI).abs() < 1e-14);
        assert!((unit_sphere_area(3) - 4.0 * std::f64::consts::PI).abs() < 1e-13);
    }

    #[test]
    fn line_fit_recovers_line() {
        let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v - 1.5).collect();
        let (s, b) = line_fit(&x, &y);
        assert!((s - 3.0).abs() < 1e-12 && (b + 1.5).abs() < 1e-12);
    }
}
