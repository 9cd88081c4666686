//! Invariant monitors, error norms, convergence tables, the discrete cell
//! entropy residual, and the jump-admissibility check.
//!
//! All diagnostics are read-only; the convergence study may run its
//! per-resolution solves in parallel (capped by `AGGLO_WORKERS`).

use std::sync::Mutex;

use crate::error::{Result, SolverError};
use crate::grid::{GridSpec, SolverState};
use crate::model::ProblemSpec;
use crate::scheme::{advance, u_step_dt, validate_cfl, CflPolicy, NoHooks};

/// Δx·Σ u, the discrete total mass.
pub fn mass(u: &[f64], grid: &GridSpec) -> f64 {
    grid.dx() * u.iter().sum::<f64>()
}

/// Σ |Δ₊w|.
pub fn total_variation(w: &[f64]) -> f64 {
    w.windows(2).map(|p| (p[1] - p[0]).abs()).sum()
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Largest cell entropy residual over all cells and the given k values.
///
/// For every cell the left side of the discrete cell entropy inequality
///
///   |u' − k| − |u − k| + λ Δ₊G̃ + sgn(u' − k) λ k [Δ₊Φ₊'(α) + Δ₊Φ₋'(β)] ≤ 0
///
/// is evaluated, where Φ₊'(α) and Φ₋'(β) are interval means of the split
/// derivatives over consecutive node values (guarded reciprocal on empty
/// intervals) and G̃ is the numerical entropy flux
///
///   G̃ = |u_left − k| Φ₊'(α) + |u_right − k| Φ₋'(β)
///       − (|A(u_right) − A(k)| − |A(u_left) − A(k)|)/Δx.
///
/// A nonpositive result up to round-off is a structural property of the
/// march; a positive residual beyond [`entropy_tolerance`] indicates a bug.
pub(crate) fn cell_entropy_residual(
    u: &[f64],
    u_next: &[f64],
    v: &[f64],
    spec: &ProblemSpec,
    grid: &GridSpec,
    dt: f64,
    ks: &[f64],
) -> f64 {
    let cells = u.len();
    let dx = grid.dx();
    let lambda = dt / dx;

    // Interval means of the split derivatives; entry i covers [v_{i-1}, v_i]
    // with constant ghost extension at both ends (empty intervals there).
    let mut mean_plus = vec![0.0; cells + 2];
    let mut mean_minus = vec![0.0; cells + 2];
    for i in 1..=cells {
        mean_plus[i] = spec.flux.mean_plus_slope(v[i - 1], v[i]);
        mean_minus[i] = spec.flux.mean_minus_slope(v[i - 1], v[i]);
    }

    let au: Vec<f64> = u.iter().map(|&x| spec.diffusion.integrated(x)).collect();
    let cell_u = |i: isize| -> f64 {
        if i < 0 || i as usize >= cells {
            0.0
        } else {
            u[i as usize]
        }
    };
    let cell_au = |i: isize| -> f64 {
        if i < 0 || i as usize >= cells {
            0.0
        } else {
            au[i as usize]
        }
    };

    let mut worst = f64::NEG_INFINITY;
    for &k in ks {
        let ak = spec.diffusion.integrated(k);
        // Entropy flux at node i (between cells i-1 and i).
        let flux_at = |i: usize| -> f64 {
            let r = cell_u(i as isize - 1);
            let s = cell_u(i as isize);
            let ar = cell_au(i as isize - 1);
            let a_s = cell_au(i as isize);
            (r - k).abs() * mean_plus[i] + (s - k).abs() * mean_minus[i + 1]
                - ((a_s - ak).abs() - (ar - ak).abs()) / dx
        };
        let mut g_left = flux_at(0);
        for j in 0..cells {
            let g_right = flux_at(j + 1);
            let split_drift =
                (mean_plus[j + 1] - mean_plus[j]) + (mean_minus[j + 2] - mean_minus[j + 1]);
            let residual = (u_next[j] - k).abs() - (u[j] - k).abs()
                + lambda * (g_right - g_left)
                + sign(u_next[j] - k) * lambda * k * split_drift;
            worst = worst.max(residual);
            g_left = g_right;
        }
    }
    worst
}

/// Round-off allowance for the cell entropy residual.
pub fn entropy_tolerance(k_max: f64, u_max: f64) -> f64 {
    1e-12 + 1e-12 * (1.0 + k_max.abs() + u_max.abs())
}

/// Audited cell entropy residual: recomputes the step and refuses pairs of
/// states that are not one policy step apart.
pub fn entropy_residual(
    u: &[f64],
    u_next: &[f64],
    v: &[f64],
    spec: &ProblemSpec,
    grid: &GridSpec,
    policy: &CflPolicy,
    ks: &[f64],
) -> Result<f64> {
    entropy_residual_dt(u, u_next, v, spec, grid, validate_cfl(grid, policy).dt, ks)
}

/// As [`entropy_residual`] with an explicit step size (shortened steps).
pub fn entropy_residual_dt(
    u: &[f64],
    u_next: &[f64],
    v: &[f64],
    spec: &ProblemSpec,
    grid: &GridSpec,
    dt: f64,
    ks: &[f64],
) -> Result<f64> {
    let recomputed = u_step_dt(u, v, grid, spec, dt)?;
    let u_max = u.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
    let tol = 1e-12 * (1.0 + u_max);
    let consistent = recomputed
        .iter()
        .zip(u_next)
        .all(|(a, b)| (a - b).abs() <= tol);
    if !consistent {
        return Err(SolverError::Misuse(
            "entropy residual: the two states are not one marching step apart".into(),
        ));
    }
    Ok(cell_entropy_residual(u, u_next, v, spec, grid, dt, ks))
}

/// A detected discontinuity with its admissibility verdict.
#[derive(Debug, Clone)]
pub struct JumpRecord {
    /// Node coordinate of the interface.
    pub x: f64,
    /// Cell value left of the interface.
    pub u_left: f64,
    /// Cell value right of the interface.
    pub u_right: f64,
    /// True when a ≡ 0 on the open interval between the one-sided values.
    pub a_flat: bool,
    /// A jump is admissible when A is flat across it.
    pub admissible: bool,
}

/// Flags interfaces where the cell values differ by more than
/// `threshold · max(1, max|u|)` and reports whether the diffusion density
/// vanishes between the one-sided values (21 interior samples).
pub fn detect_jumps(
    u: &[f64],
    grid: &GridSpec,
    spec: &ProblemSpec,
    threshold: f64,
) -> Vec<JumpRecord> {
    let u_max = u.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
    let cut = threshold * u_max.max(1.0);
    let mut out = Vec::new();
    for j in 0..u.len().saturating_sub(1) {
        let (lo, hi) = (u[j].min(u[j + 1]), u[j].max(u[j + 1]));
        if hi - lo <= cut {
            continue;
        }
        let flat = (1..=21).all(|i| {
            let s = lo + (hi - lo) * i as f64 / 22.0;
            spec.diffusion.density(s) <= 1e-12
        });
        out.push(JumpRecord {
            x: grid.node_x(j + 1),
            u_left: u[j],
            u_right: u[j + 1],
            a_flat: flat,
            admissible: flat,
        });
    }
    out
}

fn nesting_ratio(coarse: &GridSpec, fine: &GridSpec) -> Result<usize> {
    let r = coarse.dx() / fine.dx();
    let m = r.round();
    if m < 1.0 || (r - m).abs() > 1e-9 * r {
        return Err(SolverError::Config(format!(
            "grids are not nested: dx = {} vs reference dx = {}",
            coarse.dx(),
            fine.dx()
        )));
    }
    if (coarse.x_min() - fine.x_min()).abs() > 1e-9 * fine.dx() {
        return Err(SolverError::Config(
            "grids are not aligned: windows start at different points".into(),
        ));
    }
    Ok(m as usize)
}

/// L¹ distance between a coarse density and a reference, the reference
/// restricted by averaging the fine cells inside each coarse cell.
pub fn l1_error_u(
    u_coarse: &[f64],
    grid_coarse: &GridSpec,
    u_ref: &[f64],
    grid_ref: &GridSpec,
) -> Result<f64> {
    let m = nesting_ratio(grid_coarse, grid_ref)?;
    let mut err = 0.0;
    for (c, &uc) in u_coarse.iter().enumerate() {
        let mut acc = 0.0;
        for i in 0..m {
            acc += u_ref.get(c * m + i).copied().unwrap_or(0.0);
        }
        err += (uc - acc / m as f64).abs();
    }
    Ok(grid_coarse.dx() * err)
}

/// L∞ distance between a coarse primitive and a reference sampled at the
/// coincident nodes.
pub fn linf_error_v(
    v_coarse: &[f64],
    grid_coarse: &GridSpec,
    v_ref: &[f64],
    grid_ref: &GridSpec,
) -> Result<f64> {
    let m = nesting_ratio(grid_coarse, grid_ref)?;
    let last = *v_ref.last().unwrap_or(&0.0);
    let mut err = 0.0f64;
    for (j, &vc) in v_coarse.iter().enumerate() {
        let vr = v_ref.get(j * m).copied().unwrap_or(last);
        err = err.max((vc - vr).abs());
    }
    Ok(err)
}

/// Observed convergence rate between two rows of an error table, absent
/// when either error vanishes or the resolutions coincide.
pub fn observed_rate(e_coarse: f64, e_fine: f64, dx_coarse: f64, dx_fine: f64) -> Option<f64> {
    if e_coarse <= 0.0 || e_fine <= 0.0 || dx_coarse == dx_fine {
        return None;
    }
    Some((e_coarse / e_fine).ln() / (dx_coarse / dx_fine).ln())
}

/// One resolution of an error table.
#[derive(Debug, Clone)]
pub struct ErrorRow {
    pub dx: f64,
    /// L∞ error of the primitive at each requested time.
    pub e_v: Vec<f64>,
    /// L¹ error of the density at each requested time.
    pub e_u: Vec<f64>,
    pub rate_v: Vec<Option<f64>>,
    pub rate_u: Vec<Option<f64>>,
}

/// Per-resolution error norms with observed rates between adjacent rows.
#[derive(Debug, Clone)]
pub struct ErrorTable {
    pub times: Vec<f64>,
    pub rows: Vec<ErrorRow>,
}

fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

impl ErrorTable {
    /// CSV with one row per resolution:
    /// `dx,e_v_t1,rate_v_t1,...,e_u_t1,rate_u_t1,...`, rates blank where
    /// undefined.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("dx");
        for i in 1..=self.times.len() {
            s.push_str(&format!(",e_v_t{i},rate_v_t{i}"));
        }
        for i in 1..=self.times.len() {
            s.push_str(&format!(",e_u_t{i},rate_u_t{i}"));
        }
        s.push('\n');
        for row in &self.rows {
            s.push_str(&fmt17(row.dx));
            for (e, r) in row.e_v.iter().zip(&row.rate_v) {
                s.push(',');
                s.push_str(&fmt17(*e));
                s.push(',');
                if let Some(r) = r {
                    s.push_str(&fmt17(*r));
                }
            }
            for (e, r) in row.e_u.iter().zip(&row.rate_u) {
                s.push(',');
                s.push_str(&fmt17(*e));
                s.push(',');
                if let Some(r) = r {
                    s.push_str(&fmt17(*r));
                }
            }
            s.push('\n');
        }
        s
    }
}

/// Density and primitive captured at one output time.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub t: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

/// Marches one problem through a strictly increasing list of output times.
pub fn solve_at_times(
    spec: &ProblemSpec,
    grid: &GridSpec,
    policy: &CflPolicy,
    times: &[f64],
) -> Result<Vec<Snapshot>> {
    if times.is_empty() {
        return Err(SolverError::Usage("no output times given".into()));
    }
    if times[0] < 0.0 || times.windows(2).any(|w| w[0] >= w[1]) {
        return Err(SolverError::Usage(
            "output times must be nonnegative and strictly increasing".into(),
        ));
    }
    let mut state = SolverState::init(spec, grid)?;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        advance(&mut state, t, grid, spec, policy, &mut NoHooks)?;
        out.push(Snapshot {
            t,
            u: state.u.clone(),
            v: state.v.clone(),
        });
    }
    Ok(out)
}

fn worker_cap() -> usize {
    std::env::var("AGGLO_WORKERS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
}

/// Runs the solver at every listed resolution plus the reference, then
/// fills both error norms at each requested time and the observed rates
/// between adjacent resolutions. Solves run in parallel, one state per
/// worker.
pub fn convergence_table(
    spec: &ProblemSpec,
    dx_list: &[f64],
    ref_dx: f64,
    times: &[f64],
    mu: f64,
    epsilon: f64,
) -> Result<ErrorTable> {
    if times.is_empty() || times.windows(2).any(|w| w[0] >= w[1]) {
        return Err(SolverError::Usage(
            "requested times must be strictly increasing".into(),
        ));
    }
    let t_end = *times.last().unwrap();
    let (grids, ref_grid) = GridSpec::nested_family(spec, dx_list, ref_dx, mu, t_end)?;
    let policy = CflPolicy::with_epsilon(spec, epsilon);

    // Job list: one solve per resolution, the reference last.
    let mut jobs: Vec<&GridSpec> = grids.iter().collect();
    jobs.push(&ref_grid);
    let results: Vec<Mutex<Option<Result<Vec<Snapshot>>>>> =
        jobs.iter().map(|_| Mutex::new(None)).collect();
    let cursor = Mutex::new(0usize);
    let workers = worker_cap().min(jobs.len());

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = {
                    let mut c = cursor.lock().unwrap();
                    let i = *c;
                    *c += 1;
                    i
                };
                if i >= jobs.len() {
                    break;
                }
                let solved = solve_at_times(spec, jobs[i], &policy, times);
                *results[i].lock().unwrap() = Some(solved);
            });
        }
    });

    let mut solved: Vec<Vec<Snapshot>> = Vec::with_capacity(jobs.len());
    for cell in results {
        solved.push(cell.into_inner().unwrap().expect("worker ran")?);
    }
    let ref_snaps = solved.pop().unwrap();

    let mut rows: Vec<ErrorRow> = Vec::with_capacity(dx_list.len());
    for (g, snaps) in grids.iter().zip(&solved) {
        let mut e_v = Vec::with_capacity(times.len());
        let mut e_u = Vec::with_capacity(times.len());
        for (s, r) in snaps.iter().zip(&ref_snaps) {
            e_v.push(linf_error_v(&s.v, g, &r.v, &ref_grid)?);
            e_u.push(l1_error_u(&s.u, g, &r.u, &ref_grid)?);
        }
        let (rate_v, rate_u) = match rows.last() {
            Some(prev) => (
                (0..times.len())
                    .map(|i| observed_rate(prev.e_v[i], e_v[i], prev.dx, g.dx()))
                    .collect(),
                (0..times.len())
                    .map(|i| observed_rate(prev.e_u[i], e_u[i], prev.dx, g.dx()))
                    .collect(),
            ),
            None => (vec![None; times.len()], vec![None; times.len()]),
        };
        rows.push(ErrorRow {
            dx: g.dx(),
            e_v,
            e_u,
            rate_v,
            rate_u,
        });
    }
    Ok(ErrorTable {
        times: times.to_vec(),
        rows,
    })
}

/// Formats a float with 17 significant digits for reproducible CSV output.
pub fn csv_float(x: f64) -> String {
    fmt17(x)
}
