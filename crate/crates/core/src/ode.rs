//! Adaptive Dormand–Prince 5(4) integrator with fourth-order dense output,
//! specialised to the four-component real state used by the mean-field flow.

use crate::error::{Error, Result};

pub type State = [f64; 4];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    /// Hard cap on accepted plus rejected steps.
    pub max_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rtol: 1e-9,
            atol: 1e-12,
            max_steps: 500_000_000,
        }
    }
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

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[inline]
fn lin(y: &State, terms: &[(f64, &State)]) -> State {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..4 {
            out[i] += c * k[i];
        }
    }
    out
}

/// Continuous extension on one accepted step.
struct Dense {
    t0: f64,
    h: f64,
    r: [State; 5],
}

impl Dense {
    fn eval(&self, t: f64) -> State {
        let th = (t - self.t0) / self.h;
        let th1 = 1.0 - th;
        let mut out = [0.0; 4];
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.r[0][i]
                + th * (self.r[1][i]
                    + th1 * (self.r[2][i] + th * (self.r[3][i] + th1 * self.r[4][i])));
        }
        out
    }
}

/// Integrates `y' = f(t, y)` from `t0` to `t_end` and hands the interpolated
/// state at every `t = t0 + k * dt_out` to `observe`.
pub fn integrate_dense<F, O>(
    f: F,
    t0: f64,
    y0: State,
    t_end: f64,
    dt_out: f64,
    tol: Tolerances,
    mut observe: O,
) -> Result<State>
where
    F: Fn(f64, &State) -> State,
    O: FnMut(f64, &State),
{
    if !(t_end > t0) || !(dt_out > 0.0) {
        return Err(Error::InvalidInput(
            "integration needs t_end > t0 and dt_out > 0".into(),
        ));
    }
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    let mut h = initial_step(&f, t, &y, &k1, tol);
    let mut next_out = 0usize;
    let out_time = |k: usize| t0 + k as f64 * dt_out;
    observe(t0, &y);
    next_out += 1;

    let mut steps = 0usize;
    let mut err_old: f64 = 1e-4;
    let mut rejected_last = false;
    while t < t_end {
        steps += 1;
        if steps > tol.max_steps {
            return Err(Error::TooManySteps {
                t,
                max_steps: tol.max_steps,
            });
        }
        if t + h > t_end {
            h = t_end - t;
        }
        if h <= 1e-14 * t.abs().max(1e-300) {
            return Err(Error::StepSizeUnderflow { t });
        }
        let k2 = f(t + C2 * h, &lin(&y, &[(h * A21, &k1)]));
        let k3 = f(t + C3 * h, &lin(&y, &[(h * A31, &k1), (h * A32, &k2)]));
        let k4 = f(
            t + C4 * h,
            &lin(&y, &[(h * A41, &k1), (h * A42, &k2), (h * A43, &k3)]),
        );
        let k5 = f(
            t + C5 * h,
            &lin(
                &y,
                &[
                    (h * A51, &k1),
                    (h * A52, &k2),
                    (h * A53, &k3),
                    (h * A54, &k4),
                ],
            ),
        );
        let k6 = f(
            t + h,
            &lin(
                &y,
                &[
                    (h * A61, &k1),
                    (h * A62, &k2),
                    (h * A63, &k3),
                    (h * A64, &k4),
                    (h * A65, &k5),
                ],
            ),
        );
        let y1 = lin(
            &y,
            &[
                (h * A71, &k1),
                (h * A73, &k3),
                (h * A74, &k4),
                (h * A75, &k5),
                (h * A76, &k6),
            ],
        );
        let k7 = f(t + h, &y1);

        let mut err = 0.0;
        for i in 0..4 {
            let e =
                h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = tol.atol + tol.rtol * y[i].abs().max(y1[i].abs());
            err += (e / sc).powi(2);
        }
        let err = (err / 4.0).sqrt();

        if err <= 1.0 {
            let mut r = [[0.0; 4]; 5];
            for i in 0..4 {
                let ydiff = y1[i] - y[i];
                let bspl = h * k1[i] - ydiff;
                r[0][i] = y[i];
                r[1][i] = ydiff;
                r[2][i] = bspl;
                r[3][i] = ydiff - h * k7[i] - bspl;
                r[4][i] = h
                    * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
            }
            let dense = Dense { t0: t, h, r };
            let t_new = t + h;
            let t_stop = t_new.min(t_end) * (1.0 + 1e-15);
            while out_time(next_out) <= t_stop {
                let to = out_time(next_out);
                observe(to, &dense.eval(to));
                next_out += 1;
            }
            t = t_new;
            y = y1;
            k1 = k7;
            // PI step-size control (Hairer's beta = 0.04).
            let fac = if err == 0.0 {
                10.0
            } else {
                (0.9 * err.powf(-0.2 + 0.04 * 0.75) * err_old.powf(0.04)).clamp(0.2, 10.0)
            };
            let fac = if rejected_last { fac.min(1.0) } else { fac };
            err_old = err.max(1e-4);
            h *= fac;
            rejected_last = false;
        } else {
            h *= (0.9 * err.powf(-0.2)).max(0.2);
            rejected_last = true;
        }
    }
    Ok(y)
}

fn initial_step<F>(f: &F, t: f64, y: &State, k1: &State, tol: Tolerances) -> f64
where
    F: Fn(f64, &State) -> State,
{
    let sc = |i: usize| tol.atol + tol.rtol * y[i].abs();
    let d0 = (0..4).map(|i| (y[i] / sc(i)).powi(2)).sum::<f64>().sqrt() / 2.0;
    let d1 = (0..4).map(|i| (k1[i] / sc(i)).powi(2)).sum::<f64>().sqrt() / 2.0;
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let y1 = lin(y, &[(h0, k1)]);
    let k2 = f(t + h0, &y1);
    let d2 = (0..4)
        .map(|i| ((k2[i] - k1[i]) / sc(i)).powi(2))
        .sum::<f64>()
        .sqrt()
        / 2.0
        / h0;
    let m = d1.max(d2);
    let h1 = if m <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / m).powf(0.2)
    };
    (100.0 * h0).min(h1)
}
