//! Adaptive Dormand–Prince 5(4) integrator with a blow-up guard.
//!
//! Painlevé transcendents have movable poles, so any state component
//! exceeding `blowup` in magnitude stops the integration with an error
//! naming the time reached.

#[derive(Clone, Copy, Debug)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    pub blowup: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { rtol: 1e-10, atol: 1e-10, max_steps: 200_000, blowup: 1e6 }
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum OdeError {
    #[error("solution blew up near t = {t} (|y| = {value:e})")]
    BlowUp { t: f64, value: f64 },
    #[error("step size underflow at t = {t}")]
    StepSize { t: f64 },
    #[error("step limit reached at t = {t}")]
    MaxSteps { t: f64 },
}

impl OdeError {
    pub fn time(&self) -> f64 {
        match self {
            OdeError::BlowUp { t, .. } | OdeError::StepSize { t } | OdeError::MaxSteps { t } => *t,
        }
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] =
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrate `y' = f(t, y)` from `t0` and return the state at each time in
/// `outputs` (which must be monotone in the direction of integration).
/// Steps are clipped to land exactly on every output time.
pub fn solve_at(
    mut f: impl FnMut(f64, &[f64], &mut [f64]),
    t0: f64,
    y0: &[f64],
    outputs: &[f64],
    opts: &OdeOptions,
) -> Result<Vec<Vec<f64>>, OdeError> {
    let n = y0.len();
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut out = Vec::with_capacity(outputs.len());
    let mut k = vec![vec![0.0; n]; 7];
    let mut tmp = vec![0.0; n];
    let mut y5 = vec![0.0; n];
    let mut steps = 0usize;
    let span = outputs.last().map_or(0.0, |e| (e - t0).abs()).max(1e-3);
    let mut h = 1e-3 * span;
    for &target in outputs {
        let dir = if target >= t { 1.0 } else { -1.0 };
        while (target - t).abs() > 1e-14 * (1.0 + t.abs()) {
            steps += 1;
            if steps > opts.max_steps {
                return Err(OdeError::MaxSteps { t });
            }
            let remaining = (target - t).abs();
            let hh = h.abs().min(remaining) * dir;
            if hh.abs() < 1e-14 * (1.0 + t.abs()) {
                return Err(OdeError::StepSize { t });
            }
            f(t, &y, &mut k[0]);
            for s in 1..7 {
                for i in 0..n {
                    let mut acc = y[i];
                    for j in 0..s {
                        acc += hh * A[s][j] * k[j][i];
                    }
                    tmp[i] = acc;
                }
                f(t + C[s] * hh, &tmp, &mut k[s]);
            }
            let mut err = 0.0f64;
            for i in 0..n {
                let mut s5 = y[i];
                let mut s4 = y[i];
                for s in 0..7 {
                    s5 += hh * B5[s] * k[s][i];
                    s4 += hh * B4[s] * k[s][i];
                }
                y5[i] = s5;
                let sc = opts.atol + opts.rtol * y[i].abs().max(s5.abs());
                err = err.max(((s5 - s4) / sc).abs());
            }
            if !err.is_finite() {
                h = hh.abs() * 0.2;
                continue;
            }
            if err <= 1.0 {
                t += hh;
                std::mem::swap(&mut y, &mut y5);
                let big = y.iter().fold(0.0f64, |a, v| a.max(v.abs()));
                if !big.is_finite() || big > opts.blowup {
                    return Err(OdeError::BlowUp { t, value: big });
                }
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h = hh.abs() * factor;
        }
        out.push(y.clone());
    }
    Ok(out)
}

/// State at `t1`.
pub fn integrate(
    f: impl FnMut(f64, &[f64], &mut [f64]),
    t0: f64,
    y0: &[f64],
    t1: f64,
    opts: &OdeOptions,
) -> Result<Vec<f64>, OdeError> {
    Ok(solve_at(f, t0, y0, &[t1], opts)?.pop().expect("one output"))
}

/// `count + 1` equally spaced times from `t0` to `t1`.
pub fn grid(t0: f64, t1: f64, count: usize) -> Vec<f64> {
    (0..=count).map(|i| t0 + (t1 - t0) * i as f64 / count as f64).collect()
}
