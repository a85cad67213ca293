//! The 1-D barrier profile `W`.
//!
//! `W'' + (r/2)W' + λW − W^q = 0` on `(0, ∞)`, `W(0+) = ∞`,
//! `r^{2/(q−1)} W → 0` at infinity. The singular end is realized as a limit
//! of capped two-point problems: the domain is truncated at `r_min`, with
//! Dirichlet data taken from the local model `c* r^{−2/(q−1)}`, and `r_min`
//! shrinks (cap grows) until the profile stops moving on a fixed probe set.

use crate::error::{Error, Result};
use crate::model::AbsorptionParams;
use crate::numerics::{lerp_table, thomas_solve};
use crate::profiles::{
    fit_asymptotics, Discretization, FitResult, Profile, ProfileKind, SolverMeta,
};

/// Origin constant `c* = [2(q+1)/(q−1)²]^{1/(q−1)}` of the local model
/// `W(r) = c* r^{−2/(q−1)} (1 + o(1))`; the exponent `1/(q−1)` is required
/// for the model to solve the leading balance `w'' = w^q`.
pub fn singular_prefactor(q: f64) -> f64 {
    (2.0 * (q + 1.0) / ((q - 1.0) * (q - 1.0))).powf(1.0 / (q - 1.0))
}

#[derive(Debug, Clone)]
pub struct WSolveOptions {
    pub r_max: f64,
    pub n_nodes: usize,
    /// First truncation radius of the cap continuation.
    pub r_min_start: f64,
    /// Final truncation radius (the continuation stops here at the latest).
    pub r_min_final: f64,
    /// Relative probe-set tolerance that ends the continuation early.
    pub probe_tol: f64,
    pub newton_tol: f64,
    pub max_newton_iters: usize,
}

impl Default for WSolveOptions {
    fn default() -> Self {
        Self {
            r_max: 12.0,
            n_nodes: 1601,
            r_min_start: 0.064,
            r_min_final: 1e-3,
            probe_tol: 1e-6,
            newton_tol: 1e-12,
            max_newton_iters: 80,
        }
    }
}

/// Solve the barrier profile with default continuation controls.
pub fn solve_w(params: &AbsorptionParams, r_max: f64, n_nodes: usize) -> Result<Profile> {
    solve_w_with(params, &WSolveOptions { r_max, n_nodes, ..Default::default() })
}

pub fn solve_w_with(params: &AbsorptionParams, opts: &WSolveOptions) -> Result<Profile> {
    if opts.r_max < 6.0 {
        return Err(Error::Domain(format!(
            "r_max = {} too small for the Gaussian tail to die out (need >= 6)",
            opts.r_max
        )));
    }
    if opts.n_nodes < 64 {
        return Err(Error::Domain("n_nodes must be at least 64".into()));
    }
    let q = params.q();
    let c_star = singular_prefactor(q);
    let probes = [0.25, 0.5, 1.0, 2.0];

    let mut r_min = opts.r_min_start;
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut prev_probe: Option<Vec<f64>> = None;
    let mut total_iters = 0usize;

    let (residual, cap) = loop {
        let nodes = w_grid(r_min, opts.r_max, opts.n_nodes);
        let cap = c_star * r_min.powf(-2.0 / (q - 1.0));

        // seed: previous stage interpolated (local model below its grid),
        // or the local model damped by the Gaussian factor
        let seed: Vec<f64> = match &prev {
            Some((pn, pv)) => nodes
                .iter()
                .map(|&r| {
                    if r < pn[0] {
                        c_star * r.powf(-2.0 / (q - 1.0))
                    } else {
                        lerp_table(pn, pv, r)
                    }
                })
                .collect(),
            None => nodes
                .iter()
                .map(|&r| c_star * r.powf(-2.0 / (q - 1.0)) * (-r * r / 4.0).exp())
                .collect(),
        };

        let mut values = seed;
        values[0] = cap;
        let n = values.len();
        values[n - 1] = 0.0;

        let (iters, res) = newton_w(params, &nodes, &mut values, opts)?;
        total_iters += iters;

        let probe_vals: Vec<f64> =
            probes.iter().map(|&r| lerp_table(&nodes, &values, r)).collect();
        let converged = prev_probe
            .as_ref()
            .map(|old: &Vec<f64>| {
                old.iter()
                    .zip(&probe_vals)
                    .all(|(a, b)| (a - b).abs() <= opts.probe_tol * b.abs().max(1e-300))
            })
            .unwrap_or(false);
        prev_probe = Some(probe_vals);
        prev = Some((nodes, values));

        if converged || r_min <= opts.r_min_final {
            break (res, cap);
        }
        r_min = (r_min / 4.0).max(opts.r_min_final);
    };

    let (nodes, values) = prev.unwrap();
    let mut profile = Profile {
        params: *params,
        kind: ProfileKind::W,
        nodes,
        values,
        solver_meta: SolverMeta {
            method: "capped-bvp-newton".into(),
            iterations: total_iters,
            residual,
            cap_or_shoot: cap,
            discretization: Discretization::ThreePoint,
        },
        tail_fit: None,
    };
    profile.tail_fit = Some(default_tail_fit(&profile)?);
    profile.validate()?;
    Ok(profile)
}

/// Geometric spacing on `[r_min, 1]` glued to uniform spacing on
/// `[1, r_max]`: the singular end needs resolution proportional to `r`.
fn w_grid(r_min: f64, r_max: f64, n_nodes: usize) -> Vec<f64> {
    let n_geo = n_nodes / 2;
    let n_uni = n_nodes - n_geo;
    let mut nodes = Vec::with_capacity(n_nodes);
    let ratio = (1.0 / r_min).powf(1.0 / n_geo as f64);
    for i in 0..n_geo {
        nodes.push(r_min * ratio.powi(i as i32));
    }
    let h = (r_max - 1.0) / (n_uni as f64 - 1.0);
    for i in 0..n_uni {
        nodes.push(1.0 + h * i as f64);
    }
    nodes
}

/// Damped Newton on the finite-difference system; `values` holds boundary
/// data in its first and last entries and is updated in place.
/// Returns (iterations, scaled residual).
fn newton_w(
    params: &AbsorptionParams,
    nodes: &[f64],
    values: &mut [f64],
    opts: &WSolveOptions,
) -> Result<(usize, f64)> {
    let q = params.q();
    let lambda = params.decay_exponent();
    let n = nodes.len();
    let m = n - 2; // interior unknowns

    // precompute stencil coefficients: F_i = a_i W_{i-1} + b_i W_i + c_i W_{i+1}
    //                                        + λ W_i − |W_i|^{q−1} W_i
    let mut a = vec![0.0; m];
    let mut b = vec![0.0; m];
    let mut c = vec![0.0; m];
    for k in 0..m {
        let i = k + 1;
        let hm = nodes[i] - nodes[i - 1];
        let hp = nodes[i + 1] - nodes[i];
        let denom = hm * hp * (hm + hp);
        let r = nodes[i];
        a[k] = (2.0 * hp - (r / 2.0) * hp * hp) / denom;
        c[k] = (2.0 * hm + (r / 2.0) * hm * hm) / denom;
        b[k] = (-2.0 * (hm + hp) + (r / 2.0) * (hp * hp - hm * hm)) / denom;
    }

    let power = |w: f64| w.abs().powf(q - 1.0) * w;
    let dpower = |w: f64| q * w.abs().powf(q - 1.0);

    let scaled_residual = |w: &[f64]| -> f64 {
        let mut worst = 0.0f64;
        for k in 0..m {
            let i = k + 1;
            let f = a[k] * w[i - 1] + (b[k] + lambda) * w[i] + c[k] * w[i + 1] - power(w[i]);
            let scale = (a[k] * w[i - 1]).abs()
                + ((b[k] + lambda) * w[i]).abs()
                + (c[k] * w[i + 1]).abs()
                + power(w[i]).abs()
                + 1e-300;
            worst = worst.max(f.abs() / scale);
        }
        worst
    };

    let mut norm = scaled_residual(values);
    for iter in 0..opts.max_newton_iters {
        if norm <= opts.newton_tol {
            return Ok((iter, norm));
        }
        // assemble J δ = −F
        let mut diag = vec![0.0; m];
        let mut rhs = vec![0.0; m];
        let mut lower = vec![0.0; m];
        let mut upper = vec![0.0; m];
        for k in 0..m {
            let i = k + 1;
            let f = a[k] * values[i - 1] + (b[k] + lambda) * values[i] + c[k] * values[i + 1]
                - power(values[i]);
            rhs[k] = -f;
            diag[k] = b[k] + lambda - dpower(values[i]);
            if k > 0 {
                lower[k] = a[k];
            }
            if k < m - 1 {
                upper[k] = c[k];
            }
        }
        let delta = thomas_solve(&lower, &diag, &upper, &rhs);

        // backtracking line search on the scaled residual norm
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..45 {
            let mut trial: Vec<f64> = values.to_vec();
            for k in 0..m {
                trial[k + 1] += step * delta[k];
            }
            let trial_norm = scaled_residual(&trial);
            if trial_norm < norm * (1.0 - 0.25 * step) || trial_norm < opts.newton_tol {
                values.copy_from_slice(&trial);
                norm = trial_norm;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            return Err(Error::Solver {
                method: "newton-w",
                message: "line search stalled".into(),
                iterations: iter,
                residual: norm,
            });
        }
    }
    if norm <= opts.newton_tol {
        return Ok((opts.max_newton_iters, norm));
    }
    Err(Error::Solver {
        method: "newton-w",
        message: "no convergence within iteration budget".into(),
        iterations: opts.max_newton_iters,
        residual: norm,
    })
}

/// Fit window for the Gaussian tail model, placed adaptively where the
/// profile has decayed but is still well above rounding.
pub(crate) fn default_tail_fit(profile: &Profile) -> Result<FitResult> {
    let v1 = profile.value_at(1.0)?;
    let mut r_hi = *profile.nodes.last().unwrap();
    for (r, v) in profile.nodes.iter().zip(&profile.values).rev() {
        if *v >= 1e-11 * v1 {
            r_hi = *r;
            break;
        }
    }
    let mut r_lo = 0.72 * r_hi;
    // keep the window in the tail proper
    for (r, v) in profile.nodes.iter().zip(&profile.values) {
        if *v < 0.1 * v1 {
            r_lo = r_lo.max(*r);
            break;
        }
    }
    fit_asymptotics(profile, (r_lo, r_hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::singular_origin_constant;

    #[test]
    fn prefactor_examples() {
        assert!((singular_prefactor(2.0) - 6.0).abs() < 1e-14);
        assert!((singular_prefactor(3.0) - 2.0f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn w_profile_basic_shape() {
        let params = AbsorptionParams::new(0.0, 2.0, 1).unwrap();
        let w = solve_w(&params, 12.0, 1201).unwrap();
        // decreasing
        assert!(w.value_at(1.0).unwrap() > w.value_at(2.0).unwrap());
        // Gaussian tail: r^{2/(q−1)} W small at r_max
        let r_end = 11.5f64;
        let tail = r_end.powf(2.0) * w.value_at(r_end).unwrap();
        assert!(tail < 1e-6, "tail weight {tail}");
        // discretized residual
        assert!(w.ode_residual() < 1e-6, "residual {}", w.ode_residual());
    }

    #[test]
    fn w_origin_constant_q2() {
        let params = AbsorptionParams::new(0.0, 2.0, 1).unwrap();
        let w = solve_w(&params, 12.0, 1201).unwrap();
        let oc = singular_origin_constant(&w).unwrap();
        assert!((oc.value - 6.0).abs() < 0.12, "origin constant {}", oc.value);
    }

    #[test]
    fn w_rejects_tiny_domain() {
        let params = AbsorptionParams::new(0.0, 2.0, 1).unwrap();
        assert!(solve_w(&params, 3.0, 801).is_err());
    }
}
