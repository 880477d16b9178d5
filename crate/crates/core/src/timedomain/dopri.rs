//! Dormand–Prince 5(4) with the standard 4th-order dense output.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::Vec8;

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
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

#[derive(Clone, Copy, Debug)]
pub struct Options {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Options {
    pub fn with_tolerance(tol: f64) -> Self {
        Self {
            rtol: tol,
            atol: tol * 1e-4,
            max_steps: 50_000_000,
        }
    }
}

/// One accepted step with its continuous extension.
pub struct Step {
    pub t0: f64,
    pub h: f64,
    pub y1: Vec8,
    cont: [Vec8; 5],
}

impl Step {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    /// Interpolated state for `t` in `[t0, t0 + h]`.
    pub fn eval(&self, t: f64) -> Vec8 {
        let s = (t - self.t0) / self.h;
        let s1 = 1.0 - s;
        let c = &self.cont;
        c[0] + (c[1] + (c[2] + (c[3] + c[4] * re(s1)) * re(s)) * re(s1)) * re(s)
    }
}

fn error_norm(err: &Vec8, y0: &Vec8, y1: &Vec8, opts: &Options) -> f64 {
    let sum: f64 = (0..8)
        .map(|i| {
            let sc = opts.atol + opts.rtol * y0[i].norm().max(y1[i].norm());
            (err[i].norm() / sc).powi(2)
        })
        .sum();
    (sum / 8.0).sqrt()
}

/// Integrate `y' = f(t, y)` from `t0` to `t_end`, calling `on_step` after
/// every accepted step. Returns the final state and the number of accepted
/// steps.
pub fn integrate<F, S>(f: F, t0: f64, y0: Vec8, t_end: f64, opts: &Options, mut on_step: S) -> Result<(Vec8, usize)>
where
    F: Fn(f64, &Vec8) -> Vec8,
    S: FnMut(&Step),
{
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    let span = t_end - t0;
    if span <= 0.0 {
        return Ok((y, 0));
    }

    let scale = |v: &Vec8, y: &Vec8| -> f64 {
        let s: f64 = (0..8).map(|i| (v[i].norm() / (opts.atol + opts.rtol * y[i].norm())).powi(2)).sum();
        (s / 8.0).sqrt()
    };
    let d0 = scale(&y, &y);
    let d1 = scale(&k1, &y);
    let mut h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h = h.min(span);

    let mut accepted = 0;
    let mut last_rejected = false;
    for _ in 0..opts.max_steps {
        if t >= t_end {
            return Ok((y, accepted));
        }
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }
        if h <= 1e-14 * t.abs().max(1.0) {
            return Err(Error::StepFailure { t, h });
        }

        let k2 = f(t + C2 * h, &(y + k1 * re(h * A21)));
        let k3 = f(t + C3 * h, &(y + (k1 * re(A31) + k2 * re(A32)) * re(h)));
        let k4 = f(t + C4 * h, &(y + (k1 * re(A41) + k2 * re(A42) + k3 * re(A43)) * re(h)));
        let k5 = f(
            t + C5 * h,
            &(y + (k1 * re(A51) + k2 * re(A52) + k3 * re(A53) + k4 * re(A54)) * re(h)),
        );
        let k6 = f(
            t + h,
            &(y + (k1 * re(A61) + k2 * re(A62) + k3 * re(A63) + k4 * re(A64) + k5 * re(A65)) * re(h)),
        );
        let y1 = y + (k1 * re(A71) + k3 * re(A73) + k4 * re(A74) + k5 * re(A75) + k6 * re(A76)) * re(h);
        let k7 = f(t + h, &y1);
        let err = (k1 * re(E1) + k3 * re(E3) + k4 * re(E4) + k5 * re(E5) + k6 * re(E6) + k7 * re(E7)) * re(h);
        let e = error_norm(&err, &y, &y1, opts);

        if e <= 1.0 {
            let ydiff = y1 - y;
            let bspl = k1 * re(h) - ydiff;
            let step = Step {
                t0: t,
                h,
                y1,
                cont: [
                    y,
                    ydiff,
                    bspl,
                    ydiff - k7 * re(h) - bspl,
                    (k1 * re(D1) + k3 * re(D3) + k4 * re(D4) + k5 * re(D5) + k6 * re(D6) + k7 * re(D7)) * re(h),
                ],
            };
            on_step(&step);
            accepted += 1;
            t = if last { t_end } else { t + h };
            y = y1;
            k1 = k7;
            let mut fac = if e == 0.0 { 10.0 } else { 0.9 * e.powf(-0.2) };
            fac = fac.clamp(0.2, 10.0);
            if last_rejected {
                fac = fac.min(1.0);
            }
            h *= fac;
            last_rejected = false;
        } else {
            h *= (0.9 * e.powf(-0.2)).max(0.2);
            last_rejected = true;
        }
    }
    Err(Error::StepFailure { t, h })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotating_exponential() {
        let lambda = C64::new(-0.3, 2.0);
        let y0 = Vec8::from_element(C64::new(1.0, 0.0));
        let mut worst: f64 = 0.0;
        let (y, steps) = integrate(
            |_, y| y * lambda,
            0.0,
            y0,
            10.0,
            &Options::with_tolerance(1e-10),
            |s| {
                let tm = s.t0 + 0.37 * s.h;
                let exact = (lambda * tm).exp();
                worst = worst.max((s.eval(tm)[0] - exact).norm());
                assert!((s.eval(s.t1())[0] - s.y1[0]).norm() < 1e-14);
            },
        )
        .unwrap();
        assert!((y[0] - (lambda * 10.0).exp()).norm() < 1e-9);
        assert!(worst < 1e-8, "dense output error {worst}");
        assert!(steps > 10);
    }

    #[test]
    fn time_dependent_forcing() {
        // y' = i cos t has y = i sin t.
        let y0 = Vec8::zeros();
        let (y, _) = integrate(
            |t, _| Vec8::from_element(C64::new(0.0, t.cos())),
            0.0,
            y0,
            5.0,
            &Options::with_tolerance(1e-11),
            |_| {},
        )
        .unwrap();
        assert!((y[3] - C64::new(0.0, 5f64.sin())).norm() < 1e-10);
    }
}
