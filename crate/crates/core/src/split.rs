//! Lie–Trotter splitting: an exact relaxation substep for the membrane and
//! gap potentials followed by one implicit diffusion step.

use crate::error::{EmiError, Result};

/// Uniform time grid `t_n = t0 + n Δt`, `n = 0..=n_f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t0: f64,
    t_end: f64,
    n_f: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, t_end: f64, n_f: usize) -> Result<Self> {
        if !(t0.is_finite() && t_end.is_finite() && t0 < t_end) {
            return Err(EmiError::Config(format!("time window needs t0 < t_end, got [{t0}, {t_end}]")));
        }
        if n_f == 0 {
            return Err(EmiError::Config("n_f must be >= 1".into()));
        }
        Ok(Self { t0, t_end, n_f })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn n_f(&self) -> usize {
        self.n_f
    }

    pub fn dt(&self) -> f64 {
        (self.t_end - self.t0) / self.n_f as f64
    }

    /// `t_n`, with `t_{n_f}` returned as `t_end` exactly.
    pub fn time(&self, n: usize) -> f64 {
        if n == self.n_f {
            self.t_end
        } else {
            self.t0 + n as f64 * self.dt()
        }
    }
}

/// A passive RC channel `C x' = −G (x − rest) + g`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RcChannel {
    pub capacitance: f64,
    /// `1/R`; zero gives a pure integrator.
    pub conductance: f64,
    pub rest: f64,
}

impl RcChannel {
    pub fn new(capacitance: f64, resistance: f64, rest: f64) -> Self {
        Self {
            capacitance,
            conductance: 1.0 / resistance,
            rest,
        }
    }
}

/// `(1 − e^{−x}) / x`, accurate near zero.
fn phi(x: f64) -> f64 {
    if x.abs() < 1e-5 {
        1.0 - x / 2.0 + x * x / 6.0
    } else {
        -(-x).exp_m1() / x
    }
}

/// Exact solution after `dt` of `C x' = −G (x − rest) + g` with `g` constant.
pub fn rc_relax(x: f64, ch: &RcChannel, g: f64, dt: f64) -> f64 {
    let rate = ch.conductance * dt / ch.capacitance;
    x * (-rate).exp() + (ch.rest * ch.conductance + g) * (dt / ch.capacitance) * phi(rate)
}

/// Relaxes every entry of `values` in place; `channel(i)` and `forcing(i)`
/// give the channel and the forcing (already evaluated at the substep
/// midpoint) of entry `i`.
pub fn relaxation_substep(
    values: &mut [f64],
    channel: impl Fn(usize) -> RcChannel,
    forcing: impl Fn(usize) -> f64,
    dt: f64,
) {
    for (i, x) in values.iter_mut().enumerate() {
        *x = rc_relax(*x, &channel(i), forcing(i), dt);
    }
}

/// A semi-discrete problem split into a relaxation part acting on the
/// interface potentials and a diffusion part solved implicitly.
pub trait SplitProblem {
    type State: Clone;

    /// Exact relaxation over `[t, t + dt]` with forcing frozen at `t + dt/2`.
    fn relax(&self, state: &mut Self::State, t: f64, dt: f64);

    /// One implicit Euler step of the potential equations to `t + dt`.
    fn diffuse(&mut self, state: &mut Self::State, t: f64, dt: f64) -> Result<()>;
}

/// Relaxation, then diffusion, over `[t, t + dt]`.
pub fn lie_trotter_step<P: SplitProblem>(problem: &mut P, state: &mut P::State, t: f64, dt: f64) -> Result<()> {
    problem.relax(state, t, dt);
    problem.diffuse(state, t, dt)
}

/// A failed integration with everything computed before the failure.
#[derive(Debug)]
pub struct IntegrationFailure<S> {
    /// 1-based index of the step that failed.
    pub step: usize,
    pub error: EmiError,
    /// States at `t_0 .. t_{step-1}`.
    pub trajectory: Vec<S>,
}

impl<S> IntegrationFailure<S> {
    pub fn into_error(self, grid: &TimeGrid) -> EmiError {
        EmiError::Step {
            step: self.step,
            time: grid.time(self.step - 1),
            source: Box::new(self.error),
        }
    }
}

/// Runs every step and keeps all states, the initial one included.
pub fn integrate<P: SplitProblem>(
    problem: &mut P,
    initial: P::State,
    grid: &TimeGrid,
) -> std::result::Result<Vec<P::State>, IntegrationFailure<P::State>> {
    let mut trajectory = Vec::with_capacity(grid.n_f() + 1);
    let mut state = initial;
    trajectory.push(state.clone());
    for n in 0..grid.n_f() {
        let t = grid.time(n);
        let dt = grid.time(n + 1) - t;
        if let Err(error) = lie_trotter_step(problem, &mut state, t, dt) {
            return Err(IntegrationFailure {
                step: n + 1,
                error,
                trajectory,
            });
        }
        trajectory.push(state.clone());
    }
    Ok(trajectory)
}

/// Runs every step keeping only the current state; `observer` sees each
/// state after its step as `(step, time, state)`.
pub fn integrate_final<P: SplitProblem>(
    problem: &mut P,
    initial: P::State,
    grid: &TimeGrid,
    mut observer: impl FnMut(usize, f64, &P::State),
) -> Result<P::State> {
    let mut state = initial;
    for n in 0..grid.n_f() {
        let t = grid.time(n);
        let dt = grid.time(n + 1) - t;
        lie_trotter_step(problem, &mut state, t, dt).map_err(|e| EmiError::Step {
            step: n + 1,
            time: t,
            source: Box::new(e),
        })?;
        observer(n + 1, grid.time(n + 1), &state);
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rc_examples() {
        let ch = RcChannel::new(1.0, 1.0, 0.0);
        assert!((rc_relax(2.0, &ch, 0.0, 2f64.ln()) - 1.0).abs() < 1e-15);
        let ch = RcChannel::new(1.0, 1.0, 5.0);
        assert_eq!(rc_relax(5.0, &ch, 0.0, 0.3), 5.0);
        let v = rc_relax(20.0, &ch, 0.0, 0.1);
        assert!((v - (5.0 + 15.0 * (-0.1f64).exp())).abs() < 1e-13);
        assert!((v - 18.5726).abs() < 1e-4);
    }

    #[test]
    fn zero_conductance_integrates_forcing() {
        let ch = RcChannel {
            capacitance: 2.0,
            conductance: 0.0,
            rest: 3.0,
        };
        assert_eq!(rc_relax(1.0, &ch, 4.0, 0.5), 2.0);
    }

    #[test]
    fn time_grid_checks() {
        assert!(TimeGrid::new(1.0, 1.0, 3).is_err());
        assert!(TimeGrid::new(0.0, 1.0, 0).is_err());
        let g = TimeGrid::new(0.25, 7.0, 7).unwrap();
        assert_eq!(g.time(7), 7.0);
        assert!((g.dt() - 6.75 / 7.0).abs() < 1e-15);
    }

    struct Decay {
        channel: RcChannel,
        fail_at: Option<f64>,
    }

    impl SplitProblem for Decay {
        type State = f64;
        fn relax(&self, s: &mut f64, _t: f64, dt: f64) {
            *s = rc_relax(*s, &self.channel, 0.0, dt);
        }
        fn diffuse(&mut self, _s: &mut f64, t: f64, _dt: f64) -> Result<()> {
            match self.fail_at {
                Some(tf) if t >= tf => Err(EmiError::LinearSolve {
                    residual: 1.0,
                    iterations: 0,
                }),
                _ => Ok(()),
            }
        }
    }

    #[test]
    fn relaxation_only_problem_is_exact() {
        let mut p = Decay {
            channel: RcChannel::new(1.0, 2.0, 0.0),
            fail_at: None,
        };
        let g = TimeGrid::new(0.0, 3.0, 300).unwrap();
        let traj = integrate(&mut p, 1.0, &g).unwrap();
        assert_eq!(traj.len(), 301);
        assert!((traj[300] - (-1.5f64).exp()).abs() < 1e-13);
    }

    #[test]
    fn failure_keeps_partial_trajectory() {
        let mut p = Decay {
            channel: RcChannel::new(1.0, 1.0, 0.0),
            fail_at: Some(0.45),
        };
        let g = TimeGrid::new(0.0, 1.0, 10).unwrap();
        let f = integrate(&mut p, 1.0, &g).unwrap_err();
        assert_eq!(f.step, 6);
        assert_eq!(f.trajectory.len(), 6);
        let e = f.into_error(&g);
        assert!(matches!(e, EmiError::Step { step: 6, .. }));
    }
}
