//! Machine-checkable invariant suite for a full run of one problem.
//!
//! Backs the `check` CLI command: marches the problem while auditing the
//! structural properties of the scheme (mass, monotonicity, total
//! variation, range, dual-route agreement, cell entropy inequality, step
//! size) and reports one verdict per invariant.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::diagnostics::{cell_entropy_residual, entropy_tolerance, mass, total_variation};
use crate::error::Result;
use crate::grid::{inverse_primitive, primitive, GridSpec, SolverState};
use crate::model::ProblemSpec;
use crate::scheme::{u_step_dt, v_step_dt, validate_cfl, CflPolicy};

/// Verdict for one invariant.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckReport {
    fn new(name: &'static str, passed: bool, detail: String) -> CheckReport {
        CheckReport {
            name,
            passed,
            detail,
        }
    }
}

/// Parameters of a check run.
#[derive(Debug, Clone)]
pub struct CheckConfig {
    pub dx: f64,
    pub t_end: f64,
    pub seed: u64,
    pub mu: f64,
    pub epsilon: f64,
}

/// Point-in-time invariants of a (u, v) pair: nonnegativity, range,
/// monotonicity, total variation, mass, and transform consistency.
pub fn state_checks(u: &[f64], v: &[f64], c0: f64, grid: &GridSpec) -> Vec<CheckReport> {
    let mut out = Vec::new();

    let min_du = v
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    out.push(CheckReport::new(
        "monotonicity",
        min_du >= -1e-13 * c0,
        format!("min forward difference of v: {min_du:.3e}"),
    ));

    let (v_lo, v_hi) = v
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
    out.push(CheckReport::new(
        "range",
        v_lo >= -1e-12 * c0 && v_hi <= c0 * (1.0 + 1e-12),
        format!("v spans [{v_lo:.6e}, {v_hi:.6e}], mass {c0:.6e}"),
    ));

    let tv = total_variation(v);
    out.push(CheckReport::new(
        "tv-identity",
        (tv - c0).abs() <= 1e-10 * c0.max(1.0),
        format!("TV(v) = {tv:.12e}, expected {c0:.12e}"),
    ));

    let m = mass(u, grid);
    out.push(CheckReport::new(
        "mass",
        (m - c0).abs() <= 1e-10 * c0,
        format!("mass {m:.12e}, expected {c0:.12e}"),
    ));

    let u_min = u.iter().copied().fold(f64::INFINITY, f64::min);
    out.push(CheckReport::new(
        "nonnegativity",
        u_min >= -1e-12,
        format!("min u = {u_min:.3e}"),
    ));

    let max_mismatch = u
        .iter()
        .enumerate()
        .map(|(j, &uj)| ((v[j + 1] - v[j]) / grid.dx() - uj).abs())
        .fold(0.0f64, f64::max);
    out.push(CheckReport::new(
        "transform-consistency",
        max_mismatch <= 1e-12 * (1.0 + c0 / grid.dx()),
        format!("max |divided difference − u| = {max_mismatch:.3e}"),
    ));

    out
}

/// Runs the full invariant suite on one problem.
pub fn run_check_suite(spec: &ProblemSpec, cfg: &CheckConfig) -> Result<Vec<CheckReport>> {
    let grid = GridSpec::auto(spec, cfg.dx, cfg.mu, cfg.t_end)?;
    let policy = CflPolicy::with_epsilon(spec, cfg.epsilon);
    let accepted = validate_cfl(&grid, &policy);
    let c0 = spec.total_mass();
    let mut rng = StdRng::seed_from_u64(cfg.seed);
    let mut reports = Vec::new();

    reports.push(CheckReport::new(
        "cfl-audit",
        accepted.lhs <= 1.0 - cfg.epsilon + 1e-12,
        format!(
            "2λ·max|Φ'| + 4μ·max a = {:.6e} at dt = {:.6e} (budget {})",
            accepted.lhs,
            accepted.dt,
            1.0 - cfg.epsilon
        ),
    ));

    // Splitting identity and monotonicity of the split parts on random
    // arguments.
    let mut split_bad = 0usize;
    let mut prev = (0.0, 0.0, 0.0);
    let mut mono_bad = 0usize;
    let mut samples: Vec<f64> = (0..1000).map(|_| rng.random::<f64>() * c0).collect();
    samples.sort_by(f64::total_cmp);
    for (i, &vv) in samples.iter().enumerate() {
        let (p, m) = spec.flux.split(vv);
        let phi = spec.flux.phi(vv);
        if (p + m - (phi - spec.flux.phi_zero())).abs() > 1e-12 * (1.0 + phi.abs()) {
            split_bad += 1;
        }
        if i > 0 && (p < prev.0 - 1e-13 || m > prev.1 + 1e-13) {
            mono_bad += 1;
        }
        prev = (p, m, vv);
    }
    reports.push(CheckReport::new(
        "flux-splitting",
        split_bad == 0 && mono_bad == 0,
        format!("{split_bad} identity / {mono_bad} monotonicity violations in 1000 samples"),
    ));

    // March manually so that per-step state checks and sampled dual-route /
    // entropy audits see every intermediate state.
    let state = SolverState::init(spec, &grid)?;
    let mut v = state.v;
    let n_steps = (cfg.t_end / accepted.dt).ceil().max(1.0) as usize;
    let audit_steps: Vec<usize> = (0..20.min(n_steps))
        .map(|_| rng.random_range(0..n_steps))
        .collect();

    let mut worst = StateWorst::default();
    let mut prev_l1: Option<f64> = None;
    let mut l1_bad = 0usize;
    let mut equiv_worst = 0.0f64;
    let mut entropy_worst = f64::NEG_INFINITY;
    let mut entropy_tol = 0.0f64;
    let mut t = 0.0;

    for n in 0..n_steps {
        let dt = accepted.dt.min(cfg.t_end - t).max(0.0);
        if dt == 0.0 {
            break;
        }
        let next = v_step_dt(&v, &grid, spec, dt)?;

        if audit_steps.contains(&n) {
            let u_now = inverse_primitive(&v, &grid);
            let u_next = u_step_dt(&u_now, &primitive(&u_now, &grid), &grid, spec, dt)?;
            let via_v = inverse_primitive(&next, &grid);
            let u_max = u_now.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
            for (a, b) in u_next.iter().zip(&via_v) {
                equiv_worst = equiv_worst.max((a - b).abs() / u_max.max(1.0));
            }

            let k_top = 1.5 * u_max;
            let ks: Vec<f64> = (0..16).map(|i| k_top * i as f64 / 15.0).collect();
            let r = cell_entropy_residual(&u_now, &via_v, &v, spec, &grid, dt, &ks);
            entropy_worst = entropy_worst.max(r);
            entropy_tol = entropy_tolerance(k_top, u_max);
        }

        let l1: f64 = v.iter().zip(&next).map(|(a, b)| (b - a).abs()).sum();
        if let Some(p) = prev_l1 {
            if l1 > p + 1e-12 {
                l1_bad += 1;
            }
        }
        prev_l1 = Some(l1);

        v = next;
        t += dt;
        let u_now = inverse_primitive(&v, &grid);
        worst.update(&u_now, &v, c0, &grid);
    }

    reports.extend(worst.reports(c0));
    reports.push(CheckReport::new(
        "l1-time-decay",
        l1_bad == 0,
        format!("{l1_bad} steps increased Σ|Δv| (slack 1e-12)"),
    ));
    reports.push(CheckReport::new(
        "scheme-equivalence",
        equiv_worst <= 1e-12,
        format!("max relative one-step deviation between routes: {equiv_worst:.3e}"),
    ));
    let entropy_pass = entropy_worst == f64::NEG_INFINITY || entropy_worst <= entropy_tol;
    reports.push(CheckReport::new(
        "entropy-residual",
        entropy_pass,
        format!("max residual {entropy_worst:.3e} (tolerance {entropy_tol:.3e})"),
    ));

    Ok(reports)
}

/// Worst-case per-step state quantities accumulated over a march.
#[derive(Default)]
struct StateWorst {
    min_forward_dv: f64,
    v_low: f64,
    v_high_excess: f64,
    tv_err: f64,
    mass_err: f64,
    u_min: f64,
    seen: bool,
}

impl StateWorst {
    fn update(&mut self, u: &[f64], v: &[f64], c0: f64, grid: &GridSpec) {
        let min_dv = v
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min);
        let v_lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let v_hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let tv = total_variation(v);
        let m = mass(u, grid);
        let u_min = u.iter().copied().fold(f64::INFINITY, f64::min);
        if !self.seen {
            *self = StateWorst {
                min_forward_dv: min_dv,
                v_low: v_lo,
                v_high_excess: v_hi - c0,
                tv_err: (tv - c0).abs(),
                mass_err: (m - c0).abs(),
                u_min,
                seen: true,
            };
        } else {
            self.min_forward_dv = self.min_forward_dv.min(min_dv);
            self.v_low = self.v_low.min(v_lo);
            self.v_high_excess = self.v_high_excess.max(v_hi - c0);
            self.tv_err = self.tv_err.max((tv - c0).abs());
            self.mass_err = self.mass_err.max((m - c0).abs());
            self.u_min = self.u_min.min(u_min);
        }
    }

    fn reports(&self, c0: f64) -> Vec<CheckReport> {
        vec![
            CheckReport::new(
                "monotonicity",
                self.min_forward_dv >= -1e-13 * c0,
                format!("min forward difference of v: {:.3e}", self.min_forward_dv),
            ),
            CheckReport::new(
                "range",
                self.v_low >= -1e-12 * c0 && self.v_high_excess <= 1e-12 * c0,
                format!(
                    "v below 0 by {:.3e}, above mass by {:.3e}",
                    self.v_low.min(0.0),
                    self.v_high_excess.max(0.0)
                ),
            ),
            CheckReport::new(
                "tv-identity",
                self.tv_err <= 1e-10 * c0.max(1.0),
                format!("worst |TV(v) − mass| = {:.3e}", self.tv_err),
            ),
            CheckReport::new(
                "mass",
                self.mass_err <= 1e-10 * c0,
                format!("worst mass drift = {:.3e}", self.mass_err),
            ),
            CheckReport::new(
                "nonnegativity",
                self.u_min >= -1e-12,
                format!("min u over run = {:.3e}", self.u_min),
            ),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::discretize_initial;
    use crate::model::{preset, Preset};

    #[test]
    fn healthy_run_passes_everything() {
        let spec = preset(Preset::Ex1);
        let cfg = CheckConfig {
            dx: 0.02,
            t_end: 0.02,
            seed: 7,
            mu: 0.1,
            epsilon: 0.05,
        };
        let reports = run_check_suite(&spec, &cfg).unwrap();
        assert!(!reports.is_empty());
        for r in &reports {
            assert!(r.passed, "{} failed: {}", r.name, r.detail);
        }
    }

    #[test]
    fn injected_negative_density_fails_monotonicity() {
        let spec = preset(Preset::Ex1);
        let grid = GridSpec::auto(&spec, 0.02, 0.1, 0.0).unwrap();
        let mut u = discretize_initial(&spec, &grid).unwrap();
        u[5] = -2.0; // corrupt
        let v = primitive(&u, &grid);
        let reports = state_checks(&u, &v, spec.total_mass(), &grid);
        let mono = reports.iter().find(|r| r.name == "monotonicity").unwrap();
        let nonneg = reports.iter().find(|r| r.name == "nonnegativity").unwrap();
        assert!(!mono.passed);
        assert!(!nonneg.passed);
        assert!(reports.iter().any(|r| r.name == "mass" && !r.passed));
    }
}
