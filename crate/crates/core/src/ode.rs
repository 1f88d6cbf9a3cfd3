//! Adaptive Dormand–Prince 5(4) integration of complex linear and driven
//! systems `dy/dt = f(t, y)`.

use crate::C64;

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    /// Relative per-step error tolerance.
    pub rtol: f64,
    /// Absolute per-step error floor.
    pub atol: f64,
    /// Steps below `min_step_rel * max(1, |t|)` abort the integration.
    pub min_step_rel: f64,
    /// Accepted plus rejected step budget.
    pub max_steps: usize,
    /// Upper bound on the step length, if any.
    pub max_step: Option<f64>,
}

impl OdeOptions {
    /// Same relative and absolute tolerance.
    pub fn with_tol(tol: f64) -> Self {
        OdeOptions { rtol: tol, atol: tol, ..Default::default() }
    }
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { rtol: 1e-9, atol: 1e-9, min_step_rel: 1e-13, max_steps: 5_000_000, max_step: None }
    }
}

/// What an observer wants after an accepted step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

#[derive(Debug, Clone)]
pub struct OdeOutcome {
    pub y: Vec<C64>,
    pub t: f64,
    /// True when the observer ended the integration before `t1`.
    pub stopped: bool,
    pub accepted_steps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum OdeError {
    StepUnderflow { t: f64, h: f64 },
    StepBudget { t: f64, h: f64, steps: usize },
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// Difference between the fifth- and embedded fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn max_abs(v: &[C64]) -> f64 {
    v.iter().fold(0.0, |m, z| m.max(z.norm()))
}

/// Integrates from `t0` to `t1` (`t1 >= t0`). After every accepted step the
/// observer sees `(t, y, dy/dt)` and may stop the run early.
pub fn integrate<F, O>(
    mut rhs: F,
    t0: f64,
    t1: f64,
    y0: &[C64],
    opts: &OdeOptions,
    mut observer: O,
) -> Result<OdeOutcome, OdeError>
where
    F: FnMut(f64, &[C64], &mut [C64]),
    O: FnMut(f64, &[C64], &[C64]) -> Control,
{
    let n = y0.len();
    let mut y = y0.to_vec();
    let mut t = t0;
    if t1 <= t0 {
        return Ok(OdeOutcome { y, t, stopped: false, accepted_steps: 0 });
    }

    let zero = C64::new(0.0, 0.0);
    let mut k1 = vec![zero; n];
    let mut k2 = vec![zero; n];
    let mut k3 = vec![zero; n];
    let mut k4 = vec![zero; n];
    let mut k5 = vec![zero; n];
    let mut k6 = vec![zero; n];
    let mut k7 = vec![zero; n];
    let mut stage = vec![zero; n];
    let mut y_new = vec![zero; n];

    rhs(t, &y, &mut k1);
    let span = t1 - t0;
    let mut h = {
        let d0 = max_abs(&y);
        let d1 = max_abs(&k1);
        let guess = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        guess.min(span)
    };
    if let Some(cap) = opts.max_step {
        h = h.min(cap);
    }

    let mut steps = 0usize;
    let mut accepted = 0usize;
    let mut last_rejected = false;

    while t < t1 {
        if steps >= opts.max_steps {
            return Err(OdeError::StepBudget { t, h, steps });
        }
        steps += 1;
        if h < opts.min_step_rel * t.abs().max(1.0) {
            return Err(OdeError::StepUnderflow { t, h });
        }
        let last = t + h >= t1;
        if last {
            h = t1 - t;
        }

        for i in 0..n {
            stage[i] = y[i] + k1[i] * (h * A21);
        }
        rhs(t + C2 * h, &stage, &mut k2);
        for i in 0..n {
            stage[i] = y[i] + (k1[i] * A31 + k2[i] * A32) * h;
        }
        rhs(t + C3 * h, &stage, &mut k3);
        for i in 0..n {
            stage[i] = y[i] + (k1[i] * A41 + k2[i] * A42 + k3[i] * A43) * h;
        }
        rhs(t + C4 * h, &stage, &mut k4);
        for i in 0..n {
            stage[i] = y[i] + (k1[i] * A51 + k2[i] * A52 + k3[i] * A53 + k4[i] * A54) * h;
        }
        rhs(t + C5 * h, &stage, &mut k5);
        for i in 0..n {
            stage[i] = y[i] + (k1[i] * A61 + k2[i] * A62 + k3[i] * A63 + k4[i] * A64 + k5[i] * A65) * h;
        }
        rhs(t + h, &stage, &mut k6);
        for i in 0..n {
            y_new[i] = y[i] + (k1[i] * A71 + k3[i] * A73 + k4[i] * A74 + k5[i] * A75 + k6[i] * A76) * h;
        }
        rhs(t + h, &y_new, &mut k7);

        let mut err = 0.0_f64;
        for i in 0..n {
            let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * h;
            let scale = opts.atol + opts.rtol * y[i].norm().max(y_new[i].norm());
            err = err.max(e.norm() / scale);
        }

        if err <= 1.0 {
            t = if last { t1 } else { t + h };
            std::mem::swap(&mut y, &mut y_new);
            std::mem::swap(&mut k1, &mut k7);
            accepted += 1;
            if observer(t, &y, &k1) == Control::Stop {
                return Ok(OdeOutcome { y, t, stopped: true, accepted_steps: accepted });
            }
            let mut factor = if err == 0.0 { 5.0 } else { 0.9 * err.powf(-0.2) };
            factor = factor.clamp(0.2, 5.0);
            if last_rejected {
                factor = factor.min(1.0);
            }
            h *= factor;
            last_rejected = false;
        } else {
            h *= (0.9 * err.powf(-0.2)).max(0.2);
            last_rejected = true;
        }
        if let Some(cap) = opts.max_step {
            h = h.min(cap);
        }
    }
    Ok(OdeOutcome { y, t, stopped: false, accepted_steps: accepted })
}
