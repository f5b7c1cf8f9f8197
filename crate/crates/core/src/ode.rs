//! Adaptive Dormand-Prince 5(4) integration with continuous output, and
//! Picard expansion of ODE solutions into jets.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::jet::Jet;

#[derive(Clone, Copy, Debug)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; `0` picks one automatically.
    pub h0: f64,
    pub max_steps: usize,
    /// State magnitude treated as blow-up.
    pub blowup: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { rtol: 1e-12, atol: 1e-14, h0: 0.0, max_steps: 200_000, blowup: 1e12 }
    }
}

#[derive(Clone, Debug)]
struct Segment {
    t0: f64,
    h: f64,
    r: [Vec<f64>; 5],
}

/// Accepted steps plus per-step interpolants.
#[derive(Clone, Debug)]
pub struct Solution {
    pub ts: Vec<f64>,
    pub ys: Vec<Vec<f64>>,
    segments: Vec<Segment>,
}

impl Solution {
    pub fn t_start(&self) -> f64 {
        self.ts[0]
    }

    pub fn t_end(&self) -> f64 {
        *self.ts.last().unwrap()
    }

    pub fn final_state(&self) -> &[f64] {
        self.ys.last().unwrap()
    }

    /// Dense evaluation at any `t` inside the integrated interval.
    pub fn eval(&self, t: f64) -> Result<Vec<f64>> {
        let (lo, hi) = if self.t_start() <= self.t_end() {
            (self.t_start(), self.t_end())
        } else {
            (self.t_end(), self.t_start())
        };
        let slack = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
        if t < lo - slack || t > hi + slack {
            return Err(Error::DomainExit { at: t });
        }
        if self.segments.is_empty() {
            return Ok(self.ys[0].clone());
        }
        let forward = self.t_end() >= self.t_start();
        let idx = self
            .segments
            .partition_point(|s| if forward { s.t0 + s.h < t } else { s.t0 + s.h > t })
            .min(self.segments.len() - 1);
        let s = &self.segments[idx];
        let th = ((t - s.t0) / s.h).clamp(0.0, 1.0);
        let th1 = 1.0 - th;
        Ok((0..s.r[0].len())
            .map(|i| s.r[0][i] + th * (s.r[1][i] + th1 * (s.r[2][i] + th * (s.r[3][i] + th1 * s.r[4][i]))))
            .collect())
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

fn axpy(y: &[f64], h: f64, terms: &[(f64, &[f64])]) -> Vec<f64> {
    let mut out = y.to_vec();
    for (c, k) in terms {
        if *c != 0.0 {
            for i in 0..out.len() {
                out[i] += h * c * k[i];
            }
        }
    }
    out
}

/// Integrate `y' = f(t, y)` from `t0` to `t1` (either direction).
///
/// Errors from `f` are reported as [`Error::DomainExit`] at the failing time;
/// states exceeding `opts.blowup` as [`Error::SingularityReached`].
pub fn integrate<F>(mut f: F, t0: f64, y0: &[f64], t1: f64, opts: &OdeOptions) -> Result<Solution>
where
    F: FnMut(f64, &[f64]) -> Result<Vec<f64>>,
{
    let mut call = |t: f64, y: &[f64]| -> Result<Vec<f64>> {
        let k = f(t, y).map_err(|e| match e {
            Error::SingularPoint(_) | Error::DomainExit { .. } => Error::DomainExit { at: t },
            other => other,
        })?;
        if k.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularityReached { at: t });
        }
        Ok(k)
    };
    let n = y0.len();
    let dir = if t1 >= t0 { 1.0 } else { -1.0 };
    let span = (t1 - t0).abs();
    let mut sol = Solution { ts: vec![t0], ys: vec![y0.to_vec()], segments: Vec::new() };
    if span == 0.0 {
        return Ok(sol);
    }
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k1 = call(t, &y)?;
    let err_norm = |e: &[f64], ya: &[f64], yb: &[f64]| -> f64 {
        let s: f64 = (0..n)
            .map(|i| {
                let sc = opts.atol + opts.rtol * ya[i].abs().max(yb[i].abs());
                (e[i] / sc) * (e[i] / sc)
            })
            .sum();
        libm::sqrt(s / n.max(1) as f64)
    };
    let mut h = if opts.h0 > 0.0 {
        opts.h0.min(span)
    } else {
        let d0 = err_norm(&y, &y, &y).max(1e-5);
        let d1 = err_norm(&k1, &y, &y).max(1e-5);
        (0.01 * d0 / d1).min(span).max(1e-6 * span)
    };
    let mut steps = 0;
    let mut last_fail = false;
    while (t1 - t) * dir > 0.0 {
        steps += 1;
        if steps > opts.max_steps {
            return Err(Error::StepSizeUnderflow { at: t });
        }
        let floor = 1e-14 * (1.0 + t.abs());
        if h < floor && (t1 - t) * dir > floor {
            return Err(Error::StepSizeUnderflow { at: t });
        }
        let last = h >= (t1 - t) * dir;
        let hs = if last { t1 - t } else { h * dir };
        let k2 = call(t + C2 * hs, &axpy(&y, hs, &[(A21, &k1)]))?;
        let k3 = call(t + C3 * hs, &axpy(&y, hs, &[(A31, &k1), (A32, &k2)]))?;
        let k4 = call(t + C4 * hs, &axpy(&y, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]))?;
        let k5 = call(t + C5 * hs, &axpy(&y, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]))?;
        let k6 = call(t + hs, &axpy(&y, hs, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]))?;
        let ynew = axpy(&y, hs, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let k7 = call(t + hs, &ynew)?;
        let e = axpy(&vec![0.0; n], hs, &[(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)]);
        let err = err_norm(&e, &y, &ynew);
        if err <= 1.0 {
            let ydiff: Vec<f64> = (0..n).map(|i| ynew[i] - y[i]).collect();
            let bspl: Vec<f64> = (0..n).map(|i| hs * k1[i] - ydiff[i]).collect();
            let r4: Vec<f64> = (0..n).map(|i| ydiff[i] - hs * k7[i] - bspl[i]).collect();
            let r5 = axpy(&vec![0.0; n], hs, &[(D1, &k1), (D3, &k3), (D4, &k4), (D5, &k5), (D6, &k6), (D7, &k7)]);
            sol.segments.push(Segment { t0: t, h: hs, r: [y.clone(), ydiff, bspl, r4, r5] });
            t = if last { t1 } else { t + hs };
            y = ynew;
            k1 = k7;
            sol.ts.push(t);
            sol.ys.push(y.clone());
            if y.iter().any(|v| v.abs() > opts.blowup) {
                return Err(Error::SingularityReached { at: t });
            }
            let fac = if err == 0.0 { 5.0 } else { (0.9 * libm::pow(err, -0.2)).clamp(0.2, 5.0) };
            h = if last_fail { h.min(h * fac) } else { h * fac };
            last_fail = false;
        } else {
            h *= (0.9 * libm::pow(err, -0.2)).clamp(0.1, 0.9);
            last_fail = true;
        }
    }
    Ok(sol)
}

/// Expand the solution of `u' = rhs(u)` along `axis` into jets by Picard
/// iteration. `initial` holds the state restricted to `axis = base` (its
/// coefficients along `axis` are ignored); each sweep fixes one more order.
pub fn picard_expand<F>(initial: &[Jet], axis: usize, mut rhs: F) -> Result<Vec<Jet>>
where
    F: FnMut(&[Jet]) -> Result<Vec<Jet>>,
{
    let order = initial[0].order();
    let slice: Vec<Jet> = initial.iter().map(|j| restrict(j, axis)).collect();
    let mut u = slice.clone();
    for _ in 0..=order {
        let du = rhs(&u)?;
        u = slice.iter().zip(&du).map(|(s, d)| s + &d.integrate(axis)).collect();
    }
    Ok(u)
}

/// Drop every term that depends on `axis`.
fn restrict(j: &Jet, axis: usize) -> Jet {
    let coeffs = j.terms().map(|(m, c)| if m.0[axis] == 0 { c } else { 0.0 }).collect();
    Jet::from_coeffs(j.nvars(), j.order(), coeffs)
}
