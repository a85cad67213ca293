//! General-absorption utilities: the Keller–Osserman condition
//! `∫^∞ ds/√H(s) < ∞`, `H(s) = ∫_0^s h`, the ψ time barrier by inversion of
//! `∫_ψ^∞ ds/h(s) = b t`, and the elliptic boundary blow-up solution
//! `−ΔΦ + b Φ^q = 0` on a ball with `Φ → ∞` at the boundary.
//!
//! The barrier-nonexistence counterexample with weight `b(t) = e^{−1/t}` is
//! intentionally not mechanized: nonexistence is not numerically
//! certifiable; these utilities only ever report what finite computations
//! can see (hence the first-class `Inconclusive` verdict).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::AbsorptionParams;
use crate::numerics::{bisect, line_fit, simpson, thomas_solve};
use crate::profiles::{Discretization, Profile, ProfileKind, SolverMeta};

/// A nondecreasing absorption nonlinearity `h`, given as the power `s^q`
/// or as a sampled table, with the lower integration anchor `a ≥ 0`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AbsorptionProfile {
    pub form: HForm,
    pub anchor: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum HForm {
    Power { q: f64 },
    /// Strictly increasing abscissae with nondecreasing values; extended
    /// beyond the last sample by power-law extrapolation of the last decade
    /// (the condition is a tail condition), flagged in outputs.
    Table { s: Vec<f64>, h: Vec<f64> },
}

impl AbsorptionProfile {
    pub fn power(q: f64, anchor: f64) -> Result<Self> {
        if !(q > 0.0) {
            return Err(Error::InvalidParams(format!("power form needs q > 0, got {q}")));
        }
        Self::validated(HForm::Power { q }, anchor)
    }

    pub fn table(s: Vec<f64>, h: Vec<f64>, anchor: f64) -> Result<Self> {
        Self::validated(HForm::Table { s, h }, anchor)
    }

    fn validated(form: HForm, anchor: f64) -> Result<Self> {
        if anchor < 0.0 {
            return Err(Error::InvalidParams("anchor must be >= 0".into()));
        }
        if let HForm::Table { s, h } = &form {
            if s.len() != h.len() || s.len() < 4 {
                return Err(Error::InvalidParams("table needs >= 4 matched samples".into()));
            }
            if s.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::InvalidParams("table abscissae must be increasing".into()));
            }
            if h[0] < 0.0 || h.windows(2).any(|w| w[1] < w[0]) {
                return Err(Error::InvalidParams(
                    "table values must be nonnegative and nondecreasing".into(),
                ));
            }
        }
        Ok(Self { form, anchor })
    }

    /// Evaluate `h(s)`, using the tail extrapolation beyond the table.
    pub fn eval(&self, s: f64) -> f64 {
        match &self.form {
            HForm::Power { q } => s.max(0.0).powf(*q),
            HForm::Table { s: xs, h: hs } => {
                if s <= xs[0] {
                    return hs[0];
                }
                let last = *xs.last().unwrap();
                if s > last {
                    let (p, c) = self.tail_power();
                    return c * s.powf(p);
                }
                crate::numerics::lerp_table(xs, hs, s)
            }
        }
    }

    /// Power-law fit `h ≈ c s^p` over the last decade of the table
    /// (or the exact values for the power form).
    pub fn tail_power(&self) -> (f64, f64) {
        match &self.form {
            HForm::Power { q } => (*q, 1.0),
            HForm::Table { s, h } => {
                let last = *s.last().unwrap();
                let lo = last / 10.0;
                let mut xs = Vec::new();
                let mut ys = Vec::new();
                for (a, b) in s.iter().zip(h) {
                    if *a >= lo && *b > 0.0 {
                        xs.push(a.ln());
                        ys.push(b.ln());
                    }
                }
                if xs.len() < 2 {
                    return (0.0, *h.last().unwrap());
                }
                let (p, intercept) = line_fit(&xs, &ys);
                (p, intercept.exp())
            }
        }
    }

    /// `H(s) = ∫_0^s h(τ) dτ` by quadrature (closed form for powers).
    pub fn primitive(&self, s: f64) -> f64 {
        match &self.form {
            HForm::Power { q } => s.max(0.0).powf(q + 1.0) / (q + 1.0),
            HForm::Table { .. } => {
                if s <= 0.0 {
                    0.0
                } else {
                    simpson(|x| self.eval(x), 0.0, s, 200)
                }
            }
        }
    }

    /// Spot-check of super-additivity `h(a+b) ≥ h(a) + h(b)` on sample
    /// pairs. A diagnostic only: the hypothesis is assumed, not certified.
    pub fn superadditivity_spot_check(&self, pairs: &[(f64, f64)]) -> SuperAdditivityCheck {
        let mut worst: f64 = 0.0;
        let mut failures = 0usize;
        for &(a, b) in pairs {
            let lhs = self.eval(a + b);
            let rhs = self.eval(a) + self.eval(b);
            if lhs + 1e-12 * rhs.abs() < rhs {
                failures += 1;
                worst = worst.max((rhs - lhs) / rhs.abs().max(1e-300));
            }
        }
        SuperAdditivityCheck { pairs_checked: pairs.len(), failures, worst_relative_gap: worst }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuperAdditivityCheck {
    pub pairs_checked: usize,
    pub failures: usize,
    pub worst_relative_gap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KoVerdict {
    Holds,
    Fails,
    Inconclusive,
}

/// Outcome of the Keller–Osserman probe. `verdict` is closed-form for power
/// nonlinearities (holds ⇔ q > 1) and the numeric trend verdict otherwise;
/// the numeric side is always reported alongside.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KoReport {
    pub verdict: KoVerdict,
    pub numeric_verdict: KoVerdict,
    pub closed_form: Option<KoVerdict>,
    /// Integral `∫_a^{s_max} ds/√H` at the largest probed `s_max`.
    pub tail_estimate: f64,
    /// Increments added by each doubling of `s_max`.
    pub increments: Vec<f64>,
    /// Whether table evaluation used the power-law tail extrapolation.
    pub used_tail_extrapolation: bool,
}

/// Probe `∫_a^∞ ds/√H(s)` by doubling `s_max`: geometrically decaying
/// increments mean convergence, non-decaying increments mean divergence,
/// anything in between is inconclusive (slowly divergent integrals cannot
/// be decided by finite sampling).
pub fn keller_osserman(
    profile: &AbsorptionProfile,
    s_max: f64,
    refinement_levels: usize,
) -> Result<KoReport> {
    if !(s_max > profile.anchor) {
        return Err(Error::Domain(format!(
            "s_max = {s_max} must exceed the anchor {}",
            profile.anchor
        )));
    }
    if profile.primitive(profile.anchor.max(s_max * 1e-9)) <= 0.0 && profile.anchor == 0.0 {
        // H vanishes identically near 0 only if h does; the integrand is
        // then infinite on an interval
        if profile.eval(profile.anchor) == 0.0 && profile.primitive(profile.anchor) <= 0.0 {
            // allow power forms (integrable endpoint for q < 1 .. q > 1
            // handled by quadrature from anchor > 0 below); reject tables
            // that are flat zero at the anchor
            if let HForm::Table { h, .. } = &profile.form {
                if h[0] == 0.0 && h[1] == 0.0 {
                    return Err(Error::Anchor(
                        "H vanishes on an interval at the anchor; integrand infinite".into(),
                    ));
                }
            }
        }
    }
    let levels = refinement_levels.max(3);
    // ∫ ds/√H on [lo, hi], integrated in log s to tame wide ranges
    let segment = |lo: f64, hi: f64| -> f64 {
        simpson(
            |x: f64| {
                let s = x.exp();
                let h = profile.primitive(s);
                if h <= 0.0 {
                    0.0
                } else {
                    s / h.sqrt()
                }
            },
            lo.ln(),
            hi.ln(),
            160,
        )
    };
    // guard the anchor: H(a) = 0 means an integrable or non-integrable
    // endpoint; start slightly above zero anchors
    let start = if profile.anchor > 0.0 { profile.anchor } else { s_max * 1e-6 };
    if profile.primitive(start) <= 0.0 {
        return Err(Error::Anchor(format!(
            "H({start:.3e}) = 0 on the integration range; anchor must sit where H > 0"
        )));
    }

    let mut increments = Vec::with_capacity(levels);
    let mut hi = s_max;
    let mut total = segment(start, s_max);
    for _ in 0..levels {
        let next = 2.0 * hi;
        let inc = segment(hi, next);
        increments.push(inc);
        total += inc;
        hi = next;
    }
    let k = increments.len();
    let r1 = increments[k - 1] / increments[k - 2].max(1e-300);
    let r2 = increments[k - 2] / increments[k - 3].max(1e-300);
    let numeric_verdict = if r1 <= 0.9 && r2 <= 0.9 {
        KoVerdict::Holds
    } else if r1 >= 0.95 && r2 >= 0.95 {
        KoVerdict::Fails
    } else {
        KoVerdict::Inconclusive
    };
    let closed_form = match &profile.form {
        HForm::Power { q } => Some(if *q > 1.0 { KoVerdict::Holds } else { KoVerdict::Fails }),
        HForm::Table { .. } => None,
    };
    let used_tail_extrapolation = matches!(&profile.form, HForm::Table { s, .. } if hi > *s.last().unwrap());
    Ok(KoReport {
        verdict: closed_form.unwrap_or(numeric_verdict),
        numeric_verdict,
        closed_form,
        tail_estimate: total,
        increments,
        used_tail_extrapolation,
    })
}

/// Invert `∫_ψ^∞ ds/h(s) = b t` for `ψ(t)`; requires a convergent tail
/// integral (superlinear `h`). Closed form for powers:
/// `ψ = ((q−1) b t)^{−1/(q−1)}`.
pub fn psi_inverse(profile: &AbsorptionProfile, b: f64, t: f64) -> Result<f64> {
    if !(b > 0.0) || !(t > 0.0) {
        return Err(Error::Domain(format!("need b > 0 and t > 0, got b = {b}, t = {t}")));
    }
    let (p, c) = profile.tail_power();
    if p <= 1.0 {
        return Err(Error::Condition(format!(
            "tail integral of 1/h diverges (tail power {p:.3} <= 1); no time barrier"
        )));
    }
    if let HForm::Power { q } = &profile.form {
        return Ok(((q - 1.0) * b * t).powf(-1.0 / (q - 1.0)));
    }
    // tail integral T(ψ) = ∫_ψ^{s_last} ds/h + closed-form extension
    let HForm::Table { s, .. } = &profile.form else { unreachable!() };
    let s_last = *s.last().unwrap();
    let target = b * t;
    let tail_beyond = |x: f64| -> f64 { x.powf(1.0 - p) / (c * (p - 1.0)) };
    let integral_from = |psi: f64| -> f64 {
        if psi >= s_last {
            tail_beyond(psi)
        } else {
            simpson(
                |x: f64| {
                    let v = profile.eval(x);
                    if v <= 0.0 {
                        0.0
                    } else {
                        1.0 / v
                    }
                },
                psi,
                s_last,
                400,
            ) + tail_beyond(s_last)
        }
    };
    // bracket: T is decreasing in ψ
    let mut lo = s[0].max(1e-12);
    while integral_from(lo) < target {
        lo /= 4.0;
        if lo < 1e-280 {
            return Err(Error::Condition(
                "tail identity unreachable: ∫ ds/h too small near 0".into(),
            ));
        }
    }
    let mut hi = s_last.max(lo * 2.0);
    while integral_from(hi) > target {
        hi *= 4.0;
        if hi > 1e280 {
            return Err(Error::Condition("tail identity unreachable for large ψ".into()));
        }
    }
    bisect(|psi| integral_from(psi) - target, lo, hi, 1e-12)
}

/// Radial boundary blow-up problem `−ΔΦ + b Φ^q = 0` in `B_R`,
/// `Φ(∂B_R) = ∞`, approximated by Dirichlet caps with doubling; the
/// large-cap limit follows the boundary layer `Φ ~ (6/b)^{1/ ...}` of the
/// local model `w'' = b w^q`.
pub fn elliptic_large_solution(
    q: f64,
    weight: f64,
    ball_radius: f64,
    dim: u32,
    n_nodes: usize,
) -> Result<Profile> {
    if !(q > 1.0) {
        return Err(Error::InvalidParams(format!("elliptic large solution needs q > 1, got {q}")));
    }
    if !(weight > 0.0) || !(ball_radius > 0.0) {
        return Err(Error::InvalidParams("weight and radius must be > 0".into()));
    }
    if n_nodes < 64 {
        return Err(Error::InvalidParams("n_nodes must be at least 64".into()));
    }
    let h = ball_radius / (n_nodes - 1) as f64;
    let nodes: Vec<f64> = (0..n_nodes).map(|i| i as f64 * h).collect();
    let nf = dim as f64;

    // conservative radial Laplacian row coefficients (flux form)
    let mut lower = vec![0.0; n_nodes];
    let mut upper = vec![0.0; n_nodes];
    for i in 0..n_nodes - 1 {
        let face = (nodes[i] + 0.5 * h).powf(nf - 1.0) / h;
        let w_i = cell_mass(&nodes, h, i, nf, ball_radius);
        let w_ip = cell_mass(&nodes, h, i + 1, nf, ball_radius);
        upper[i] = face / w_i;
        lower[i + 1] = face / w_ip;
    }

    let power = |v: f64| v.abs().powf(q - 1.0) * v;
    let dpower = |v: f64| q * v.abs().powf(q - 1.0);

    // cap continuation: solve with Φ(R) = cap, doubling until the interior
    // stops moving
    let probes: Vec<usize> =
        [0.0, 0.25, 0.5, 0.7].iter().map(|f| ((n_nodes - 1) as f64 * f) as usize).collect();
    let mut cap = 16.0 * weight.max(1.0);
    let mut vals = vec![0.0; n_nodes];
    // seed: boundary-layer model (6/b)·dist^{−2}-type, clipped at the cap
    let c_star = (2.0 * (q + 1.0) / ((q - 1.0) * (q - 1.0)) / weight).powf(1.0 / (q - 1.0));
    for i in 0..n_nodes {
        let d = (ball_radius - nodes[i]).max(h * 0.5);
        vals[i] = (c_star * d.powf(-2.0 / (q - 1.0))).min(cap);
    }
    let mut prev_probe: Option<Vec<f64>> = None;
    let mut total_iters = 0usize;
    let mut residual = f64::NAN;
    for _stage in 0..24 {
        vals[n_nodes - 1] = cap;
        let (iters, res) =
            newton_elliptic(&lower, &upper, weight, &power, &dpower, &mut vals)?;
        total_iters += iters;
        residual = res;
        let probe_vals: Vec<f64> = probes.iter().map(|&i| vals[i]).collect();
        let converged = prev_probe
            .as_ref()
            .map(|old: &Vec<f64>| {
                old.iter()
                    .zip(&probe_vals)
                    .all(|(a, b)| (a - b).abs() <= 1e-3 * b.abs().max(1e-300))
            })
            .unwrap_or(false);
        prev_probe = Some(probe_vals);
        if converged && cap >= 1e8 {
            break;
        }
        cap *= 2.0;
        for v in vals.iter_mut() {
            *v = v.min(cap);
        }
        if cap > 1e14 {
            break;
        }
    }

    let profile = Profile {
        params: AbsorptionParams::new(0.0, q, dim)?,
        kind: ProfileKind::EllipticLarge,
        nodes,
        values: vals,
        solver_meta: SolverMeta {
            method: "elliptic-cap-newton".into(),
            iterations: total_iters,
            residual,
            cap_or_shoot: cap,
            discretization: Discretization::ThreePoint,
        },
        tail_fit: None,
    };
    profile.validate()?;
    Ok(profile)
}

fn cell_mass(nodes: &[f64], h: f64, i: usize, nf: f64, r_max: f64) -> f64 {
    let r = nodes[i];
    let lo = (r - 0.5 * h).max(0.0);
    let hi = (r + 0.5 * h).min(r_max);
    (hi.powf(nf) - lo.powf(nf)) / nf
}

/// Damped Newton for `L Φ = b |Φ|^{q−1}Φ` with the boundary value already
/// written into the last entry. Interior unknowns only.
fn newton_elliptic(
    lower: &[f64],
    upper: &[f64],
    weight: f64,
    power: &impl Fn(f64) -> f64,
    dpower: &impl Fn(f64) -> f64,
    vals: &mut [f64],
) -> Result<(usize, f64)> {
    let n = vals.len();
    let m = n - 1;
    let norm = |v: &[f64]| -> f64 {
        let mut worst = 0.0f64;
        for i in 0..m {
            let lap = if i == 0 {
                upper[0] * (v[1] - v[0])
            } else {
                lower[i] * (v[i - 1] - v[i]) + upper[i] * (v[i + 1] - v[i])
            };
            let f = lap - weight * power(v[i]);
            let scale = lap.abs() + weight * power(v[i]).abs() + 1e-300;
            worst = worst.max(f.abs() / scale);
        }
        worst
    };
    let mut res = norm(vals);
    for iter in 0..120 {
        if res <= 1e-12 {
            return Ok((iter, res));
        }
        let mut lo = vec![0.0; m];
        let mut di = vec![0.0; m];
        let mut up = vec![0.0; m];
        let mut rhs = vec![0.0; m];
        for i in 0..m {
            let lap;
            if i == 0 {
                lap = upper[0] * (vals[1] - vals[0]);
                di[0] = -upper[0] - weight * dpower(vals[0]);
                up[0] = upper[0];
            } else {
                lap = lower[i] * (vals[i - 1] - vals[i]) + upper[i] * (vals[i + 1] - vals[i]);
                di[i] = -(lower[i] + upper[i]) - weight * dpower(vals[i]);
                lo[i] = lower[i];
                if i < m - 1 {
                    up[i] = upper[i];
                }
            }
            rhs[i] = -(lap - weight * power(vals[i]));
        }
        let delta = thomas_solve(&lo, &di, &up, &rhs);
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..45 {
            let mut trial = vals.to_vec();
            for i in 0..m {
                trial[i] += step * delta[i];
            }
            let t_res = norm(&trial);
            if t_res < res * (1.0 - 0.25 * step) || t_res <= 1e-12 {
                vals.copy_from_slice(&trial);
                res = t_res;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            return Err(Error::Solver {
                method: "newton-elliptic",
                message: "line search stalled".into(),
                iterations: iter,
                residual: res,
            });
        }
    }
    if res <= 1e-12 {
        Ok((120, res))
    } else {
        Err(Error::Solver {
            method: "newton-elliptic",
            message: "no convergence".into(),
            iterations: 120,
            residual: res,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::aitken;

    #[test]
    fn ko_power_examples() {
        // h = s² holds, h = s fails
        let holds = keller_osserman(&AbsorptionProfile::power(2.0, 1.0).unwrap(), 8.0, 10).unwrap();
        assert_eq!(holds.verdict, KoVerdict::Holds);
        assert_eq!(holds.numeric_verdict, KoVerdict::Holds);
        let fails = keller_osserman(&AbsorptionProfile::power(1.0, 1.0).unwrap(), 8.0, 10).unwrap();
        assert_eq!(fails.verdict, KoVerdict::Fails);
        assert_eq!(fails.numeric_verdict, KoVerdict::Fails);
    }

    #[test]
    fn ko_numeric_matches_closed_form_across_powers() {
        for &q in &[0.5, 1.0, 1.5, 2.0, 4.0] {
            let profile = AbsorptionProfile::power(q, 1.0).unwrap();
            let report = keller_osserman(&profile, 8.0, 12).unwrap();
            let expect = if q > 1.0 { KoVerdict::Holds } else { KoVerdict::Fails };
            assert_eq!(report.numeric_verdict, expect, "q = {q}");
            assert_eq!(report.closed_form, Some(expect));
        }
    }

    #[test]
    fn ko_slowly_divergent_table() {
        // h(s) = s·log(1+s): H ~ s² log s / 2, ∫ ds/√H ~ 2√log s → ∞
        let s: Vec<f64> = (0..400).map(|i| 0.05 * (i + 1) as f64).collect();
        let h: Vec<f64> = s.iter().map(|x| x * (1.0 + x).ln()).collect();
        let profile = AbsorptionProfile::table(s, h, 1.0).unwrap();
        let report = keller_osserman(&profile, 8.0, 18).unwrap();
        assert_eq!(report.verdict, KoVerdict::Fails, "increments {:?}", report.increments);
        assert!(report.used_tail_extrapolation);
    }

    #[test]
    fn psi_inverse_examples() {
        // h = s², b = 1: tail integral 1/ψ = t ⇒ ψ = 1/t
        let p2 = AbsorptionProfile::power(2.0, 0.0).unwrap();
        let psi = psi_inverse(&p2, 1.0, 0.5).unwrap();
        assert!((psi - 2.0).abs() < 1e-12);
        // linear h: divergent tail
        let p1 = AbsorptionProfile::power(1.0, 0.0).unwrap();
        assert!(matches!(psi_inverse(&p1, 1.0, 1.0), Err(Error::Condition(_))));
    }

    #[test]
    fn psi_inverse_table_matches_power_closed_form() {
        let q = 2.5;
        let s: Vec<f64> = (0..600).map(|i| 0.02 * (i + 1) as f64).collect();
        let h: Vec<f64> = s.iter().map(|x| x.powf(q)).collect();
        let table = AbsorptionProfile::table(s, h, 0.0).unwrap();
        for &(b, t) in &[(1.0, 0.7), (2.0, 0.3), (0.5, 2.0)] {
            let psi = psi_inverse(&table, b, t).unwrap();
            let exact = ((q - 1.0) * b * t).powf(-1.0 / (q - 1.0));
            assert!(
                (psi - exact).abs() < 2e-3 * exact,
                "b={b},t={t}: {psi} vs {exact}"
            );
            // defining identity to quadrature accuracy
            let tail = psi.powf(1.0 - q) / (q - 1.0);
            assert!((tail - b * t).abs() < 1e-8 + 2e-3 * b * t);
        }
    }

    #[test]
    fn elliptic_boundary_layer_constant() {
        // N=1, q=2, unit weight: (1−|x|)² Φ → 6
        let phi = elliptic_large_solution(2.0, 1.0, 1.0, 1, 4001).unwrap();
        let g = |d: f64| -> f64 {
            let r = 1.0 - d;
            d * d * phi.value_at(r).unwrap()
        };
        let est = aitken(g(0.2), g(0.1), g(0.05)).unwrap_or(g(0.05));
        assert!((est - 6.0).abs() < 0.12, "boundary constant {est}");
    }

    #[test]
    fn elliptic_scaling_law() {
        let q = 2.0;
        let phi1 = elliptic_large_solution(q, 1.0, 1.0, 1, 2001).unwrap();
        let phi2 = elliptic_large_solution(q, 1.0, 2.0, 1, 4001).unwrap();
        // Φ_R(x) = R^{−2/(q−1)} Φ_1(x/R)
        let scale = 2.0f64.powf(-2.0 / (q - 1.0));
        for &x in &[0.0, 0.6, 1.2, 1.6] {
            let got = phi2.value_at(x).unwrap();
            let want = scale * phi1.value_at(x / 2.0).unwrap();
            assert!(
                (got - want).abs() <= 0.01 * want.max(1e-9),
                "x={x}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn elliptic_decays_with_radius() {
        let q = 3.0;
        let mut prev = f64::INFINITY;
        for &radius in &[1.0, 2.0, 4.0, 8.0] {
            let phi = elliptic_large_solution(q, 1.0, radius, 2, 1001).unwrap();
            let v = phi.value_at(0.5).unwrap();
            assert!(v < prev, "value at 0.5 not decreasing: {v} vs {prev}");
            prev = v;
        }
    }

    #[test]
    fn superadditivity_spot_check_reports() {
        let p = AbsorptionProfile::power(2.0, 0.0).unwrap();
        let check = p.superadditivity_spot_check(&[(0.5, 1.5), (1.0, 2.0), (0.1, 0.1)]);
        assert_eq!(check.failures, 0);
        // concave h fails super-additivity
        let s: Vec<f64> = (0..100).map(|i| 0.1 * (i + 1) as f64).collect();
        let h: Vec<f64> = s.iter().map(|x| x.sqrt()).collect();
        let c = AbsorptionProfile::table(s, h, 0.0).unwrap();
        let check = c.superadditivity_spot_check(&[(1.0, 4.0)]);
        assert_eq!(check.failures, 1);
    }
}
