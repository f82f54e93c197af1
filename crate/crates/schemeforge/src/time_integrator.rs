//! Time integrators over plain `f(y, t) -> dy` callbacks.
//!
//! Two methods cover the solver kit: the three-stage strong-stability-
//! preserving Runge-Kutta scheme for hyperbolic problems, and a two-stage
//! singly diagonally implicit scheme (gamma = 1 - 1/sqrt(2), stiffly
//! accurate, A-stable) for the stiff reaction-diffusion problems. The
//! implicit stages are solved by Newton iteration with a matrix-free
//! finite-difference Jacobian action and an unpreconditioned conjugate
//! gradient inner loop, so systems never have to expose a Jacobian.

use std::f64::consts::SQRT_2;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum IntegrateError {
    #[error("state became non-finite at step {step}")]
    NonFiniteState { step: usize },
    #[error("implicit stage failed to converge at step {step} (residual {residual:.3e})")]
    NewtonDivergence { step: usize, residual: f64 },
}

#[derive(Debug, Clone, Copy, Default)]
pub struct StepperStats {
    pub steps: usize,
    pub rhs_evals: usize,
    pub newton_iters: usize,
    pub linear_iters: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct DirkOptions {
    /// Absolute stage-residual tolerance in the max norm.
    pub newton_tol: f64,
    pub newton_max: usize,
    pub linear_max: usize,
}

impl Default for DirkOptions {
    fn default() -> Self {
        DirkOptions { newton_tol: 1e-10, newton_max: 25, linear_max: 200 }
    }
}

/// Smallest step count whose uniform step does not exceed `dt_max`, and the
/// resulting step, so that n * dt lands on `t_end` exactly.
pub fn step_count_for(t_end: f64, dt_max: f64) -> (usize, f64) {
    assert!(t_end > 0.0 && dt_max > 0.0);
    let n = (t_end / dt_max - 1e-9).ceil().max(1.0) as usize;
    (n, t_end / n as f64)
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Shu-Osher form of the three-stage, third-order SSP Runge-Kutta method.
/// Exactly three right-hand-side evaluations per step.
pub fn integrate_ssprk3_observed<F, O>(
    mut rhs: F,
    y: &mut [f64],
    t0: f64,
    t_end: f64,
    n_steps: usize,
    mut observer: O,
) -> Result<StepperStats, IntegrateError>
where
    F: FnMut(&[f64], f64, &mut [f64]),
    O: FnMut(usize, f64, &[f64]),
{
    assert!(n_steps >= 1 && t_end > t0);
    let m = y.len();
    let dt = (t_end - t0) / n_steps as f64;
    let mut k = vec![0.0; m];
    let mut u1 = vec![0.0; m];
    let mut u2 = vec![0.0; m];
    let mut stats = StepperStats::default();
    observer(0, t0, y);
    for step in 1..=n_steps {
        let t = t0 + (step - 1) as f64 * dt;
        rhs(y, t, &mut k);
        for i in 0..m {
            u1[i] = y[i] + dt * k[i];
        }
        rhs(&u1, t + dt, &mut k);
        for i in 0..m {
            u2[i] = 0.75 * y[i] + 0.25 * (u1[i] + dt * k[i]);
        }
        rhs(&u2, t + 0.5 * dt, &mut k);
        for i in 0..m {
            y[i] = (y[i] + 2.0 * (u2[i] + dt * k[i])) / 3.0;
        }
        stats.rhs_evals += 3;
        stats.steps += 1;
        if !all_finite(y) {
            return Err(IntegrateError::NonFiniteState { step });
        }
        observer(step, t0 + step as f64 * dt, y);
    }
    Ok(stats)
}

pub fn integrate_ssprk3<F>(
    rhs: F,
    y: &mut [f64],
    t0: f64,
    t_end: f64,
    n_steps: usize,
) -> Result<StepperStats, IntegrateError>
where
    F: FnMut(&[f64], f64, &mut [f64]),
{
    integrate_ssprk3_observed(rhs, y, t0, t_end, n_steps, |_, _, _| {})
}

struct DirkWorkspace {
    fy: Vec<f64>,
    g: Vec<f64>,
    d: Vec<f64>,
    ytmp: Vec<f64>,
    jp: Vec<f64>,
    r: Vec<f64>,
    p: Vec<f64>,
    q: Vec<f64>,
    base: Vec<f64>,
    k1: Vec<f64>,
}

impl DirkWorkspace {
    fn new(m: usize) -> Self {
        DirkWorkspace {
            fy: vec![0.0; m],
            g: vec![0.0; m],
            d: vec![0.0; m],
            ytmp: vec![0.0; m],
            jp: vec![0.0; m],
            r: vec![0.0; m],
            p: vec![0.0; m],
            q: vec![0.0; m],
            base: vec![0.0; m],
            k1: vec![0.0; m],
        }
    }
}

/// Solves the stage equation Y = base + gdt * f(Y, t) in place. `y` enters
/// holding the initial guess and leaves holding the stage value.
fn solve_stage<F>(
    rhs: &mut F,
    base: &[f64],
    t: f64,
    gdt: f64,
    y: &mut [f64],
    ws_fy: &mut [f64],
    ws_g: &mut [f64],
    ws_d: &mut [f64],
    ws_ytmp: &mut [f64],
    ws_jp: &mut [f64],
    ws_r: &mut [f64],
    ws_p: &mut [f64],
    ws_q: &mut [f64],
    opts: &DirkOptions,
    stats: &mut StepperStats,
    step: usize,
) -> Result<(), IntegrateError>
where
    F: FnMut(&[f64], f64, &mut [f64]),
{
    let m = y.len();
    rhs(y, t, ws_fy);
    stats.rhs_evals += 1;
    let mut best_res = f64::INFINITY;
    for it in 0..=opts.newton_max {
        for i in 0..m {
            ws_g[i] = y[i] - base[i] - gdt * ws_fy[i];
        }
        let res = inf_norm(ws_g);
        if !res.is_finite() {
            return Err(IntegrateError::NewtonDivergence { step, residual: res });
        }
        if res <= opts.newton_tol {
            return Ok(());
        }
        if it == opts.newton_max || res > 4.0 * best_res {
            return Err(IntegrateError::NewtonDivergence { step, residual: res });
        }
        best_res = best_res.min(res);

        // conjugate gradients on J d = g with J v approximated by
        // v - gdt * (f(y + eps v) - f(y)) / eps
        let lin_tol = (0.1 * res).max(1e-14);
        let tol2 = lin_tol * lin_tol;
        ws_d.fill(0.0);
        ws_r.copy_from_slice(ws_g);
        ws_p.copy_from_slice(ws_g);
        let mut rs = dot(ws_r, ws_r);
        let mut stall = 0;
        for _ in 0..opts.linear_max {
            if rs <= tol2 {
                break;
            }
            let pn = inf_norm(ws_p);
            if pn == 0.0 {
                break;
            }
            let eps = f64::EPSILON.sqrt() * (1.0 + inf_norm(y)) / pn;
            for i in 0..m {
                ws_ytmp[i] = y[i] + eps * ws_p[i];
            }
            rhs(ws_ytmp, t, ws_jp);
            stats.rhs_evals += 1;
            for i in 0..m {
                ws_q[i] = ws_p[i] - gdt * (ws_jp[i] - ws_fy[i]) / eps;
            }
            let pq = dot(ws_p, ws_q);
            if !pq.is_finite() || pq <= 0.0 {
                break;
            }
            let alpha = rs / pq;
            for i in 0..m {
                ws_d[i] += alpha * ws_p[i];
                ws_r[i] -= alpha * ws_q[i];
            }
            let rs_new = dot(ws_r, ws_r);
            stats.linear_iters += 1;
            if rs_new >= 0.9999 * rs {
                stall += 1;
                if stall >= 3 {
                    break;
                }
            } else {
                stall = 0;
            }
            let beta = rs_new / rs;
            rs = rs_new;
            for i in 0..m {
                ws_p[i] = ws_r[i] + beta * ws_p[i];
            }
        }

        for i in 0..m {
            y[i] -= ws_d[i];
        }
        rhs(y, t, ws_fy);
        stats.rhs_evals += 1;
        stats.newton_iters += 1;
    }
    unreachable!("newton loop exits by return");
}

/// Two-stage SDIRK method with gamma = 1 - 1/sqrt(2): L-stable, second
/// order, stiffly accurate, so the second stage value is the new state.
pub fn integrate_dirk2_observed<F, O>(
    mut rhs: F,
    y: &mut [f64],
    t0: f64,
    t_end: f64,
    n_steps: usize,
    opts: &DirkOptions,
    mut observer: O,
) -> Result<StepperStats, IntegrateError>
where
    F: FnMut(&[f64], f64, &mut [f64]),
    O: FnMut(usize, f64, &[f64]),
{
    assert!(n_steps >= 1 && t_end > t0);
    let m = y.len();
    let dt = (t_end - t0) / n_steps as f64;
    let gamma = 1.0 - 1.0 / SQRT_2;
    let gdt = gamma * dt;
    let mut ws = DirkWorkspace::new(m);
    let mut stage = vec![0.0; m];
    let mut stats = StepperStats::default();
    observer(0, t0, y);
    for step in 1..=n_steps {
        let t = t0 + (step - 1) as f64 * dt;

        ws.base.copy_from_slice(y);
        stage.copy_from_slice(y);
        solve_stage(
            &mut rhs, &ws.base, t + gdt, gdt, &mut stage, &mut ws.fy, &mut ws.g, &mut ws.d,
            &mut ws.ytmp, &mut ws.jp, &mut ws.r, &mut ws.p, &mut ws.q, opts, &mut stats, step,
        )?;
        for i in 0..m {
            ws.k1[i] = (stage[i] - y[i]) / gdt;
        }

        for i in 0..m {
            ws.base[i] = y[i] + (1.0 - gamma) * dt * ws.k1[i];
            stage[i] = ws.base[i] + gdt * ws.k1[i];
        }
        solve_stage(
            &mut rhs, &ws.base, t + dt, gdt, &mut stage, &mut ws.fy, &mut ws.g, &mut ws.d,
            &mut ws.ytmp, &mut ws.jp, &mut ws.r, &mut ws.p, &mut ws.q, opts, &mut stats, step,
        )?;
        y.copy_from_slice(&stage);

        stats.steps += 1;
        if !all_finite(y) {
            return Err(IntegrateError::NonFiniteState { step });
        }
        observer(step, t0 + step as f64 * dt, y);
    }
    Ok(stats)
}

pub fn integrate_dirk2<F>(
    rhs: F,
    y: &mut [f64],
    t0: f64,
    t_end: f64,
    n_steps: usize,
    opts: &DirkOptions,
) -> Result<StepperStats, IntegrateError>
where
    F: FnMut(&[f64], f64, &mut [f64]),
{
    integrate_dirk2_observed(rhs, y, t0, t_end, n_steps, opts, |_, _, _| {})
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decay(u: &[f64], _t: f64, du: &mut [f64]) {
        for i in 0..u.len() {
            du[i] = -u[i];
        }
    }

    #[test]
    fn ssprk3_is_third_order_on_exponential_decay() {
        let exact = (-1.0_f64).exp();
        let mut errs = Vec::new();
        for n in [20, 40] {
            let mut y = vec![1.0];
            let stats = integrate_ssprk3(decay, &mut y, 0.0, 1.0, n).unwrap();
            assert_eq!(stats.rhs_evals, 3 * n);
            errs.push((y[0] - exact).abs());
        }
        let ratio = errs[0] / errs[1];
        assert!((7.0..9.0).contains(&ratio), "halving dt gave ratio {ratio}");
    }

    #[test]
    fn dirk2_is_second_order_on_exponential_decay() {
        let exact = (-1.0_f64).exp();
        let opts = DirkOptions::default();
        let mut errs = Vec::new();
        for n in [20, 40] {
            let mut y = vec![1.0];
            integrate_dirk2(decay, &mut y, 0.0, 1.0, n, &opts).unwrap();
            errs.push((y[0] - exact).abs());
        }
        let ratio = errs[0] / errs[1];
        assert!((3.6..4.4).contains(&ratio), "halving dt gave ratio {ratio}");
    }

    #[test]
    fn dirk2_damps_a_step_far_beyond_the_explicit_limit() {
        let gamma = 1.0 - 1.0 / SQRT_2;
        let z = -10.0;
        let growth = (1.0 + (1.0 - 2.0 * gamma) * z) / (1.0 - gamma * z).powi(2);
        let mut y = vec![1.0];
        integrate_dirk2(decay, &mut y, 0.0, 10.0, 1, &DirkOptions::default()).unwrap();
        assert!((y[0] - growth).abs() < 1e-8, "one step gave {} vs {growth}", y[0]);
        assert!(growth.abs() < 0.21);

        let mut y = vec![1.0];
        integrate_dirk2(decay, &mut y, 0.0, 100.0, 10, &DirkOptions::default()).unwrap();
        assert!(y[0].abs() <= 1.0);
    }

    #[test]
    fn dirk2_tracks_a_nonlinear_logistic_solution() {
        let rhs = |u: &[f64], _t: f64, du: &mut [f64]| {
            du[0] = u[0] * (1.0 - u[0]);
        };
        let mut y = vec![0.5];
        let stats = integrate_dirk2(rhs, &mut y, 0.0, 4.0, 100, &DirkOptions::default()).unwrap();
        let exact = 1.0 / (1.0 + (-4.0_f64).exp());
        assert!((y[0] - exact).abs() < 1e-4, "got {} want {exact}", y[0]);
        assert!(stats.newton_iters >= stats.steps);
    }

    #[test]
    fn step_count_lands_on_the_horizon_exactly() {
        let (n, dt) = step_count_for(100.0, 0.1);
        assert_eq!(n, 1000);
        assert!((dt - 0.1).abs() < 1e-15);
        let (n, dt) = step_count_for(5.0, 0.3);
        assert_eq!(n, 17);
        assert!((n as f64 * dt - 5.0).abs() < 1e-12);
        assert!(dt <= 0.3 + 1e-12);
        assert_eq!(step_count_for(1.0, 10.0).0, 1);
    }

    #[test]
    fn overflow_is_reported_with_the_failing_step() {
        let rhs = |u: &[f64], _t: f64, du: &mut [f64]| {
            du[0] = u[0] * u[0];
        };
        let mut y = vec![1e200];
        let err = integrate_ssprk3(rhs, &mut y, 0.0, 1.0, 10).unwrap_err();
        assert_eq!(err, IntegrateError::NonFiniteState { step: 1 });
    }

    #[test]
    fn observer_sees_the_initial_state_and_every_step() {
        let mut seen = Vec::new();
        let mut y = vec![1.0, 2.0];
        integrate_ssprk3_observed(decay, &mut y, 0.0, 1.0, 4, |s, t, _| seen.push((s, t))).unwrap();
        assert_eq!(seen.len(), 5);
        assert_eq!(seen[0], (0, 0.0));
        assert_eq!(seen[4].0, 4);
        assert!((seen[4].1 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn dirk2_gives_up_cleanly_when_newton_cannot_converge() {
        // discontinuous rhs: no Newton step can settle on a root
        let rhs = |u: &[f64], _t: f64, du: &mut [f64]| {
            du[0] = if u[0] > 0.0 { -1e12 } else { 1e12 };
        };
        let mut y = vec![1.0];
        let opts = DirkOptions { newton_max: 8, ..Default::default() };
        let err = integrate_dirk2(rhs, &mut y, 0.0, 1.0, 1, &opts).unwrap_err();
        assert!(matches!(err, IntegrateError::NewtonDivergence { step: 1, .. }));
    }
}
