//! The radial very-singular profile `V` for `1 < q < q_crit`:
//!
//! ```text
//! V'' + ((N−1)/r + r/2) V' + λ V − V^q = 0,   V'(0) = 0,
//! r^{2λ} V(r) → 0  as r → ∞                   (λ = (1+α)/(q−1)),
//! ```
//!
//! solved by two independent routes that cross-validate each other:
//!
//! * shooting: bisection on `V(0)`. Seeds below the critical value follow
//!   the linearized equation, which oscillates through zero for `λ > N/2`
//!   (Sturm comparison with the `λ = N/2` Gaussian mode); seeds above it
//!   stay positive on the slowly decaying branch or blow up. The admissible
//!   profile sits exactly on the separatrix and decays like the Gaussian
//!   branch `r^{2λ−N} e^{−r²/4}`.
//! * variational: minimize
//!   `J(ω) = ½∫(ω'² − λω² + 2|ω|^{q+1}/(q+1)) e^{r²/4} r^{N−1} dr`
//!   over nonnegative grid functions vanishing at `r_max`, by projected
//!   (Jacobi-preconditioned) gradient descent with backtracking, then a
//!   damped Newton polish on the discrete Euler–Lagrange system.

use crate::error::{Error, Result};
use crate::model::AbsorptionParams;
use crate::numerics::thomas_solve;
use crate::profiles::{
    fit_asymptotics, Discretization, Profile, ProfileKind, SolverMeta,
};

fn require_subcritical(params: &AbsorptionParams) -> Result<()> {
    if !params.is_subcritical() {
        return Err(Error::Regime(format!(
            "very singular profile requires 1 < q < q_crit; got q = {} with q_crit = {:.6}",
            params.q(),
            params.q_crit()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Shot {
    /// trajectory crossed zero (seed below the separatrix)
    Crossed,
    /// positive all the way to r_max (slow branch; seed above)
    Survived,
    /// ran away upward (far above the separatrix)
    BlewUp,
}

/// Bisection on `V(0)` with the paper bracket `[1e−6, 1e6]`.
pub fn solve_v_shooting(
    params: &AbsorptionParams,
    r_max: f64,
    n_nodes: usize,
) -> Result<Profile> {
    require_subcritical(params)?;
    if r_max < 8.0 {
        return Err(Error::Domain(format!("r_max = {r_max} too small; need >= 8")));
    }
    if n_nodes < 128 {
        return Err(Error::Domain("n_nodes must be at least 128".into()));
    }

    let mut lo = 1e-6;
    let mut hi = 1e6;
    let coarse = 8 * (n_nodes - 1);
    match classify(params, lo, r_max, coarse) {
        Shot::Crossed => {}
        _ => {
            return Err(Error::Bracket(
                "shooting bracket not found in [1e-6, 1e6]: low seed did not cross".into(),
            ))
        }
    }
    match classify(params, hi, r_max, coarse) {
        Shot::Crossed => {
            return Err(Error::Bracket(
                "shooting bracket not found in [1e-6, 1e6]: high seed crossed".into(),
            ))
        }
        _ => {}
    }

    let mut iterations = 0usize;
    while (hi - lo) > 1e-12 * hi {
        let mid = 0.5 * (lo + hi);
        iterations += 1;
        match classify(params, mid, r_max, coarse) {
            Shot::Crossed => lo = mid,
            _ => hi = mid,
        }
        if iterations > 200 {
            break;
        }
    }
    let shoot = hi; // positive side of the separatrix

    // final fine trajectory on the storage grid
    let h = r_max / (n_nodes - 1) as f64;
    let sub = 16usize;
    let traj = integrate(params, shoot, r_max, sub * (n_nodes - 1), sub);
    let mut values = traj.samples;
    let nodes: Vec<f64> = (0..n_nodes).map(|i| i as f64 * h).collect();

    // trust radius: where the stored trajectory leaves the Gaussian branch
    // (log(V e^{r²/4}) − (2λ−N) log r stops being flat)
    let lambda = params.decay_exponent();
    let dim = params.dim() as f64;
    let sigma = 2.0 * lambda - dim;
    let g = |r: f64, v: f64| -> f64 {
        if v <= 0.0 {
            f64::INFINITY
        } else {
            v.ln() + r * r / 4.0 - sigma * r.ln()
        }
    };
    let mid_lo = (n_nodes as f64 * 0.45) as usize;
    let mid_hi = (n_nodes as f64 * 0.6) as usize;
    let mut g_ref = 0.0;
    let mut count = 0usize;
    for i in mid_lo..mid_hi {
        let gi = g(nodes[i], values[i]);
        if gi.is_finite() {
            g_ref += gi;
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::Solver {
            method: "v-shooting",
            message: "profile vanished before mid-domain; r_max too large?".into(),
            iterations,
            residual: f64::NAN,
        });
    }
    g_ref /= count as f64;
    let mut trust = n_nodes - 1;
    for i in mid_hi..n_nodes {
        let gi = g(nodes[i], values[i]);
        if !gi.is_finite() || (gi - g_ref).abs() > 0.5 {
            trust = i;
            break;
        }
    }

    // fit the Gaussian tail model on a window safely inside the trusted part
    let r_trust = nodes[trust.min(n_nodes - 1)];
    let window = (0.55 * r_trust, 0.92 * r_trust);
    let mut profile = Profile {
        params: *params,
        kind: ProfileKind::V,
        nodes,
        values: values.clone(),
        solver_meta: SolverMeta {
            method: "shooting-bisection".into(),
            iterations,
            residual: 0.0,
            cap_or_shoot: shoot,
            discretization: Discretization::FivePoint,
        },
        tail_fit: None,
    };
    let fit = fit_asymptotics(&profile, window)?;
    if fit.residual > 0.2 {
        return Err(Error::Solver {
            method: "v-shooting",
            message: format!(
                "trajectory not on the Gaussian branch: tail fit residual {:.3e}",
                fit.residual
            ),
            iterations,
            residual: fit.residual,
        });
    }
    // replace untrusted tail samples by the fitted model
    for i in trust..profile.nodes.len() {
        values[i] = fit.eval(profile.nodes[i]);
    }
    profile.values = values;
    profile.tail_fit = Some(fit);
    profile.solver_meta.residual = profile.ode_residual();
    profile.validate()?;
    Ok(profile)
}

struct Trajectory {
    /// samples at every `sub`-th integration point (the storage nodes)
    samples: Vec<f64>,
}

/// RK4 on the first-order system from `r0 ≈ 0` (series start) to `r_max`,
/// storing every `sub`-th point. Integration state is clamped: once the
/// value leaves `(0, blow_cap)` the remaining samples repeat the exit state.
fn integrate(params: &AbsorptionParams, seed: f64, r_max: f64, steps: usize, sub: usize) -> Trajectory {
    let lambda = params.decay_exponent();
    let q = params.q();
    let n = params.dim() as f64;
    let h = r_max / steps as f64;

    let power = |v: f64| v.abs().powf(q - 1.0) * v;
    // V'' = −((N−1)/r + r/2) V' − λV + |V|^{q−1}V
    let accel = |r: f64, v: f64, dv: f64| -> f64 {
        -((n - 1.0) / r + r / 2.0) * dv - lambda * v + power(v)
    };

    // series start: V = s + a2 r² + a4 r⁴
    let a2 = (power(seed) - lambda * seed) / (2.0 * n);
    let a4 = -a2 * (1.0 + lambda - q * seed.abs().powf(q - 1.0)) / (4.0 * n + 8.0);
    let r0 = h.min(1e-4);
    let mut r = r0;
    let mut v = seed + a2 * r0 * r0 + a4 * r0.powi(4);
    let mut dv = 2.0 * a2 * r0 + 4.0 * a4 * r0.powi(3);

    let mut samples = Vec::with_capacity(steps / sub + 1);
    samples.push(seed);

    let mut idx = 0usize;
    let blow_cap = 1e12 * seed.max(1.0);
    let mut frozen: Option<f64> = None;
    while idx < steps {
        if let Some(f) = frozen {
            idx += 1;
            if idx % sub == 0 {
                samples.push(f);
            }
            continue;
        }
        // one RK4 step from r to r + h' where h' aligns the first step
        let target = (idx + 1) as f64 * h;
        let hh = target - r;
        let k1v = dv;
        let k1a = accel(r, v, dv);
        let k2v = dv + 0.5 * hh * k1a;
        let k2a = accel(r + 0.5 * hh, v + 0.5 * hh * k1v, dv + 0.5 * hh * k1a);
        let k3v = dv + 0.5 * hh * k2a;
        let k3a = accel(r + 0.5 * hh, v + 0.5 * hh * k2v, dv + 0.5 * hh * k2a);
        let k4v = dv + hh * k3a;
        let k4a = accel(r + hh, v + hh * k3v, dv + hh * k3a);
        v += hh / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        dv += hh / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a);
        r = target;
        idx += 1;
        if v <= 0.0 || v > blow_cap || !v.is_finite() {
            frozen = Some(v.clamp(-1.0, blow_cap));
        }
        if idx % sub == 0 {
            samples.push(frozen.unwrap_or(v));
        }
    }
    Trajectory { samples }
}

fn classify(params: &AbsorptionParams, seed: f64, r_max: f64, steps: usize) -> Shot {
    let traj = integrate(params, seed, r_max, steps, steps);
    let last = *traj.samples.last().unwrap();
    if last <= 0.0 || !last.is_finite() {
        Shot::Crossed
    } else if last > 1e11 * seed.max(1.0) {
        Shot::BlewUp
    } else {
        Shot::Survived
    }
}

/// Discrete energy of the radial functional on a uniform grid (weight
/// `ρ = r^{N−1} e^{r²/4}`, midpoint coefficients, trapezoid-type masses).
pub fn variational_energy(params: &AbsorptionParams, nodes: &[f64], values: &[f64]) -> f64 {
    let lambda = params.decay_exponent();
    let q = params.q();
    let dim = params.dim() as f64;
    let h = nodes[1] - nodes[0];
    let rho = |r: f64| -> f64 { r.powf(dim - 1.0) * (r * r / 4.0).exp() };
    let n = nodes.len();
    let mut j = 0.0;
    for c in 0..n - 1 {
        let rm = nodes[c] + 0.5 * h;
        let slope = (values[c + 1] - values[c]) / h;
        j += 0.5 * rho(rm) * slope * slope * h;
    }
    for i in 0..n {
        let w = mass_weight(&rho, nodes, h, i);
        let v: f64 = values[i];
        j += w * (-lambda * v * v / 2.0 + v.abs().powf(q + 1.0) / (q + 1.0));
    }
    j
}

fn mass_weight(rho: &impl Fn(f64) -> f64, nodes: &[f64], h: f64, i: usize) -> f64 {
    let n = nodes.len();
    if i == 0 {
        0.5 * h * rho(nodes[0] + 0.5 * h)
    } else if i == n - 1 {
        0.5 * h * rho(nodes[n - 1] - 0.5 * h)
    } else {
        0.5 * h * (rho(nodes[i] - 0.5 * h) + rho(nodes[i] + 0.5 * h))
    }
}

/// Minimize the discrete functional; returns the positive minimizer.
pub fn solve_v_variational(
    params: &AbsorptionParams,
    r_max: f64,
    n_nodes: usize,
) -> Result<Profile> {
    require_subcritical(params)?;
    if r_max < 8.0 {
        return Err(Error::Domain(format!("r_max = {r_max} too small; need >= 8")));
    }
    if r_max * r_max / 4.0 > 600.0 {
        return Err(Error::Domain(format!(
            "r_max = {r_max} overflows the e^{{r²/4}} weight; keep r_max <= 48"
        )));
    }
    if n_nodes < 128 {
        return Err(Error::Domain("n_nodes must be at least 128".into()));
    }
    let lambda = params.decay_exponent();
    let q = params.q();
    let dim = params.dim() as f64;
    let h = r_max / (n_nodes - 1) as f64;
    let nodes: Vec<f64> = (0..n_nodes).map(|i| i as f64 * h).collect();
    let rho = |r: f64| -> f64 { r.powf(dim - 1.0) * (r * r / 4.0).exp() };
    let n = n_nodes;

    // cell stiffness and node masses
    let k_mid: Vec<f64> = (0..n - 1).map(|c| rho(nodes[c] + 0.5 * h) / h).collect();
    let w: Vec<f64> = (0..n).map(|i| mass_weight(&rho, &nodes, h, i)).collect();

    let power = |v: f64| v.abs().powf(q - 1.0) * v;
    let dpower = |v: f64| q * v.abs().powf(q - 1.0);

    // gradient of J w.r.t. nodes 0..n−2 (node n−1 pinned to 0)
    let grad = |vals: &[f64], out: &mut [f64]| {
        for i in 0..n - 1 {
            let mut g = 0.0;
            if i > 0 {
                g += k_mid[i - 1] * (vals[i] - vals[i - 1]);
            }
            g += k_mid[i] * (vals[i] - vals[i + 1]);
            g += w[i] * (-lambda * vals[i] + power(vals[i]));
            out[i] = g;
        }
    };

    // 1-D search over scaled Gaussian bumps for the seed (this is also the
    // certificate that the functional takes negative values)
    let bump: Vec<f64> = nodes
        .iter()
        .map(|&r| (-r * r / 4.0).exp() - (-r_max * r_max / 4.0).exp())
        .collect();
    let energy_of_scale = |c: f64| -> f64 {
        let scaled: Vec<f64> = bump.iter().map(|b| c * b).collect();
        variational_energy(params, &nodes, &scaled)
    };
    let mut best_c = 1.0;
    let mut best_j = energy_of_scale(1.0);
    for k in -30..=30 {
        let c = 10f64.powf(k as f64 / 10.0);
        let j = energy_of_scale(c);
        if j < best_j {
            best_j = j;
            best_c = c;
        }
    }

    let mut attempt_seed = best_c;
    let mut last_err: Option<Error> = None;
    for _attempt in 0..2 {
        let mut vals: Vec<f64> = bump.iter().map(|b| attempt_seed * b).collect();
        vals[n - 1] = 0.0;

        // projected preconditioned descent with backtracking
        let mut g = vec![0.0; n - 1];
        let mut j_cur = variational_energy(params, &nodes, &vals);
        let mut pgd_iters = 0usize;
        for _ in 0..400 {
            pgd_iters += 1;
            grad(&vals, &mut g);
            let mut eta = 1.0;
            let mut improved = false;
            while eta > 1e-12 {
                let mut trial = vals.clone();
                for i in 0..n - 1 {
                    let precond = (if i > 0 { k_mid[i - 1] } else { 0.0 })
                        + k_mid[i]
                        + w[i] * (lambda + dpower(vals[i]).abs());
                    trial[i] = (vals[i] - eta * g[i] / precond).max(0.0);
                }
                let j_trial = variational_energy(params, &nodes, &trial);
                if j_trial < j_cur - 1e-16 * j_cur.abs() {
                    vals = trial;
                    j_cur = j_trial;
                    improved = true;
                    break;
                }
                eta *= 0.5;
            }
            if !improved {
                break;
            }
        }

        // Newton polish on the Euler–Lagrange system
        let el_norm = |vals: &[f64], g: &mut [f64]| -> f64 {
            grad(vals, g);
            let mut worst = 0.0f64;
            for i in 0..n - 1 {
                let scale = (if i > 0 { k_mid[i - 1] * (vals[i] - vals[i - 1]).abs() } else { 0.0 })
                    + k_mid[i] * (vals[i] - vals[i + 1]).abs()
                    + w[i] * (lambda * vals[i].abs() + power(vals[i]).abs())
                    + 1e-300;
                worst = worst.max(g[i].abs() / scale);
            }
            worst
        };
        let mut norm = el_norm(&vals, &mut g);
        let mut newton_iters = 0usize;
        let mut converged = norm <= 1e-12;
        while newton_iters < 60 && !converged {
            newton_iters += 1;
            grad(&vals, &mut g);
            let m = n - 1;
            let mut lower = vec![0.0; m];
            let mut diag = vec![0.0; m];
            let mut upper = vec![0.0; m];
            let mut rhs = vec![0.0; m];
            for i in 0..m {
                let mut d = k_mid[i];
                if i > 0 {
                    d += k_mid[i - 1];
                    lower[i] = -k_mid[i - 1];
                }
                if i < m - 1 {
                    upper[i] = -k_mid[i];
                }
                d += w[i] * (-lambda + dpower(vals[i]));
                diag[i] = d;
                rhs[i] = -g[i];
            }
            let delta = thomas_solve(&lower, &diag, &upper, &rhs);
            let mut step = 1.0;
            let mut accepted = false;
            for _ in 0..40 {
                let mut trial = vals.clone();
                for i in 0..m {
                    trial[i] += step * delta[i];
                }
                let mut gt = vec![0.0; m];
                let trial_norm = el_norm(&trial, &mut gt);
                if trial_norm < norm * (1.0 - 0.25 * step) || trial_norm <= 1e-12 {
                    vals = trial;
                    norm = trial_norm;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if !accepted {
                break;
            }
            converged = norm <= 1e-12;
        }

        let peak = vals.iter().fold(0.0f64, |m, v| m.max(*v));
        if peak < 1e-8 {
            // collapsed onto the trivial minimizer: restart from a larger seed
            attempt_seed *= 4.0;
            last_err = Some(Error::Regime(
                "variational descent collapsed onto the trivial minimizer twice; \
                 no nontrivial minimizer found"
                    .into(),
            ));
            continue;
        }
        if !converged {
            return Err(Error::Solver {
                method: "v-variational",
                message: "Newton polish on the Euler-Lagrange system stalled".into(),
                iterations: newton_iters,
                residual: norm,
            });
        }

        // clip roundoff negatives
        for v in vals.iter_mut() {
            if *v < 0.0 && *v > -1e-14 {
                *v = 0.0;
            }
        }

        let mut profile = Profile {
            params: *params,
            kind: ProfileKind::V,
            nodes: nodes.clone(),
            values: vals,
            solver_meta: SolverMeta {
                method: "variational-pgd-newton".into(),
                iterations: pgd_iters + newton_iters,
                residual: norm,
                cap_or_shoot: attempt_seed,
                discretization: Discretization::DivergenceForm,
            },
            tail_fit: None,
        };
        // tail fit window: inside the region where the discrete minimizer
        // still resolves the Gaussian decay (well before the pinned end)
        let v0 = profile.values[0];
        let mut r_hi = 0.85 * r_max;
        for (r, v) in profile.nodes.iter().zip(&profile.values) {
            if *v < 1e-11 * v0 {
                r_hi = r_hi.min(*r);
                break;
            }
        }
        let window = (0.55 * r_hi, 0.95 * r_hi);
        profile.tail_fit = Some(fit_asymptotics(&profile, window)?);
        profile.validate()?;
        return Ok(profile);
    }
    Err(last_err.unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::max_rel_diff;

    #[test]
    fn regime_error_above_critical() {
        // N = 3, α = 0: q_crit = 5/3 < 2
        let params = AbsorptionParams::new(0.0, 2.0, 3).unwrap();
        assert!(matches!(solve_v_shooting(&params, 12.0, 801), Err(Error::Regime(_))));
        assert!(matches!(solve_v_variational(&params, 12.0, 801), Err(Error::Regime(_))));
    }

    #[test]
    fn shooting_profile_shape() {
        let params = AbsorptionParams::new(0.0, 2.0, 1).unwrap();
        let v = solve_v_shooting(&params, 12.0, 1201).unwrap();
        assert!(v.values[0] > 0.0);
        assert!(v.values.iter().all(|&x| x >= 0.0));
        // admissible decay: r^{2λ} V → 0
        let r = 11.0f64;
        assert!(r.powf(2.0) * v.value_at(r).unwrap() < 1e-6);
        assert!(v.ode_residual() < 1e-6, "residual {}", v.ode_residual());
    }

    #[test]
    fn cross_validation_shooting_vs_variational() {
        let params = AbsorptionParams::new(0.0, 2.0, 1).unwrap();
        let a = solve_v_shooting(&params, 12.0, 1601).unwrap();
        let b = solve_v_variational(&params, 12.0, 1601).unwrap();
        let d = max_rel_diff(&a.values, &b.values);
        assert!(d <= 1e-3, "cross-method disagreement {d:.3e}");
    }

    #[test]
    fn minimizer_energy_is_negative() {
        let params = AbsorptionParams::new(0.0, 2.0, 1).unwrap();
        let v = solve_v_variational(&params, 12.0, 1201).unwrap();
        let j = variational_energy(&params, &v.nodes, &v.values);
        assert!(j < 0.0, "J = {j}");
    }
}
