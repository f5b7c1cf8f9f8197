//! Truncated multivariate Taylor jets.
//!
//! A [`Jet`] stores the Taylor coefficients (`derivative / multi-index
//! factorial`) of a function of up to four variables around an implicit base
//! point, for every multi-index of total degree `<= order`. Arithmetic is exact
//! up to truncation, so polynomial fields of degree `<= order` are represented
//! to machine precision.
//!
//! Coefficients are stored densely in graded-lexicographic order. Layouts and
//! the multiplication tables that go with them are built once per
//! `(nvars, order)` and shared.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use once_cell::race::OnceBox;

use crate::error::{Error, Result};

pub const MAX_VARS: usize = 4;
pub const MAX_ORDER: usize = 8;
/// Jet order used for key functions: two derivative levels for curvature on
/// top of the second derivatives of `W` in the metric, plus one spare.
pub const DEFAULT_ORDER: usize = 5;
/// Relative threshold below which a divisor counts as zero.
pub const SINGULAR_TOL: f64 = 1e-12;

/// Derivative orders in `(q, p, x, y)` (or whatever the chart calls them).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct MultiIndex(pub [u8; 4]);

impl MultiIndex {
    pub const fn new(q: u8, p: u8, x: u8, y: u8) -> Self {
        MultiIndex([q, p, x, y])
    }

    pub fn axis(axis: usize, n: u8) -> Self {
        let mut e = [0u8; 4];
        e[axis] = n;
        MultiIndex(e)
    }

    pub fn degree(&self) -> usize {
        self.0.iter().map(|&e| e as usize).sum()
    }

    /// Product of the factorials of the exponents.
    pub fn factorial(&self) -> f64 {
        self.0.iter().map(|&e| factorial(e as usize)).product()
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        let mut e = self.0;
        for i in 0..4 {
            e[i] += other.0[i];
        }
        MultiIndex(e)
    }

    /// All multi-indices over `nvars` variables with total degree `<= order`.
    pub fn all(nvars: usize, order: usize) -> impl Iterator<Item = MultiIndex> {
        layout(nvars, order).exps.iter().map(|&e| MultiIndex(e))
    }
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

pub struct Layout {
    nvars: usize,
    order: usize,
    exps: Vec<[u8; 4]>,
    degrees: Vec<u8>,
    lookup: Vec<u16>,
    mul: Vec<(u16, u16, u16)>,
}

impl Layout {
    fn build(nvars: usize, order: usize) -> Layout {
        let mut exps = Vec::new();
        for d in 0..=order {
            push_degree(nvars, d, &mut exps);
        }
        let side = order + 1;
        let mut lookup = vec![u16::MAX; side.pow(nvars as u32)];
        for (i, e) in exps.iter().enumerate() {
            lookup[dense_index(e, nvars, side)] = i as u16;
        }
        let degrees: Vec<u8> = exps.iter().map(|e| e.iter().sum()).collect();
        let mut mul = Vec::new();
        for (i, a) in exps.iter().enumerate() {
            for (j, b) in exps.iter().enumerate() {
                if degrees[i] as usize + degrees[j] as usize > order {
                    continue;
                }
                let mut c = [0u8; 4];
                for v in 0..4 {
                    c[v] = a[v] + b[v];
                }
                let k = lookup[dense_index(&c, nvars, side)];
                mul.push((i as u16, j as u16, k));
            }
        }
        Layout { nvars, order, exps, degrees, lookup, mul }
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn index_of(&self, m: &MultiIndex) -> Option<usize> {
        if m.degree() > self.order || m.0[self.nvars..].iter().any(|&e| e != 0) {
            return None;
        }
        let k = self.lookup[dense_index(&m.0, self.nvars, self.order + 1)];
        (k != u16::MAX).then_some(k as usize)
    }
}

fn dense_index(e: &[u8; 4], nvars: usize, side: usize) -> usize {
    let mut idx = 0;
    for v in 0..nvars {
        idx = idx * side + e[v] as usize;
    }
    idx
}

/// Exponent vectors of exact total degree `d`, lexicographically descending.
fn push_degree(nvars: usize, d: usize, out: &mut Vec<[u8; 4]>) {
    fn rec(v: usize, nvars: usize, left: usize, cur: &mut [u8; 4], out: &mut Vec<[u8; 4]>) {
        if v == nvars - 1 {
            cur[v] = left as u8;
            out.push(*cur);
            cur[v] = 0;
            return;
        }
        for k in (0..=left).rev() {
            cur[v] = k as u8;
            rec(v + 1, nvars, left - k, cur, out);
        }
        cur[v] = 0;
    }
    let mut cur = [0u8; 4];
    rec(0, nvars, d, &mut cur, out);
}

static LAYOUTS: [[OnceBox<Layout>; MAX_ORDER + 1]; MAX_VARS] =
    [const { [const { OnceBox::new() }; MAX_ORDER + 1] }; MAX_VARS];

pub fn layout(nvars: usize, order: usize) -> &'static Layout {
    assert!((1..=MAX_VARS).contains(&nvars), "jets support 1..=4 variables");
    assert!(order <= MAX_ORDER, "jet order above {MAX_ORDER}");
    LAYOUTS[nvars - 1][order].get_or_init(|| Box::new(Layout::build(nvars, order)))
}

#[derive(Clone)]
pub struct Jet {
    layout: &'static Layout,
    coeffs: Vec<f64>,
}

impl PartialEq for Jet {
    fn eq(&self, other: &Self) -> bool {
        core::ptr::eq(self.layout, other.layout) && self.coeffs == other.coeffs
    }
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = f.debug_map();
        for (e, c) in self.layout.exps.iter().zip(&self.coeffs) {
            if *c != 0.0 {
                s.entry(&&e[..self.layout.nvars], c);
            }
        }
        s.finish()
    }
}

impl Jet {
    pub fn zero(nvars: usize, order: usize) -> Jet {
        let layout = layout(nvars, order);
        Jet { layout, coeffs: vec![0.0; layout.len()] }
    }

    pub fn constant(nvars: usize, order: usize, value: f64) -> Jet {
        let mut j = Jet::zero(nvars, order);
        j.coeffs[0] = value;
        j
    }

    /// The coordinate function of `axis`, with value `value`.
    pub fn variable(nvars: usize, order: usize, axis: usize, value: f64) -> Jet {
        assert!(axis < nvars);
        let mut j = Jet::constant(nvars, order, value);
        if order >= 1 {
            let k = j.layout.index_of(&MultiIndex::axis(axis, 1)).unwrap();
            j.coeffs[k] = 1.0;
        }
        j
    }

    /// A constant with the same layout as `self`.
    pub fn lift(&self, value: f64) -> Jet {
        Jet::constant(self.nvars(), self.order(), value)
    }

    pub fn from_coeffs(nvars: usize, order: usize, coeffs: Vec<f64>) -> Jet {
        let layout = layout(nvars, order);
        assert_eq!(coeffs.len(), layout.len());
        Jet { layout, coeffs }
    }

    pub fn nvars(&self) -> usize {
        self.layout.nvars
    }

    pub fn order(&self) -> usize {
        self.layout.order
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    /// Taylor coefficient; zero beyond the truncation order.
    pub fn coeff(&self, m: &MultiIndex) -> f64 {
        self.layout.index_of(m).map_or(0.0, |k| self.coeffs[k])
    }

    /// Partial derivative `∂^m f` at the base point.
    pub fn derivative(&self, m: &MultiIndex) -> f64 {
        self.coeff(m) * m.factorial()
    }

    pub fn terms(&self) -> impl Iterator<Item = (MultiIndex, f64)> + '_ {
        self.layout.exps.iter().zip(&self.coeffs).map(|(e, c)| (MultiIndex(*e), *c))
    }

    /// `∂f/∂axis` as a jet of one order less.
    pub fn diff(&self, axis: usize) -> Jet {
        assert!(self.order() >= 1, "cannot differentiate an order-0 jet");
        let mut out = Jet::zero(self.nvars(), self.order() - 1);
        for (k, e) in out.layout.exps.iter().enumerate() {
            let mut up = MultiIndex(*e);
            up.0[axis] += 1;
            out.coeffs[k] = (e[axis] as f64 + 1.0) * self.coeff(&up);
        }
        out
    }

    /// Repeated differentiation.
    pub fn diff_n(&self, m: &MultiIndex) -> Jet {
        let mut out = self.clone();
        for axis in 0..4 {
            for _ in 0..m.0[axis] {
                out = out.diff(axis);
            }
        }
        out
    }

    /// Antiderivative along `axis` vanishing on `axis = base`, same order.
    /// The top-degree terms of the result are lost to truncation.
    pub fn integrate(&self, axis: usize) -> Jet {
        let mut out = Jet::zero(self.nvars(), self.order());
        for (k, e) in self.layout.exps.iter().enumerate() {
            if self.layout.degrees[k] as usize == self.order() {
                continue;
            }
            let mut up = MultiIndex(*e);
            up.0[axis] += 1;
            let t = self.layout.index_of(&up).unwrap();
            out.coeffs[t] = self.coeffs[k] / (e[axis] as f64 + 1.0);
        }
        out
    }

    /// Change truncation order (extending pads with zeros).
    pub fn with_order(&self, order: usize) -> Jet {
        let mut out = Jet::zero(self.nvars(), order);
        for (k, e) in out.layout.exps.iter().enumerate() {
            out.coeffs[k] = self.coeff(&MultiIndex(*e));
        }
        out
    }

    /// Embed a jet in more variables; variable `i` of `self` becomes
    /// variable `axes[i]` of the result.
    pub fn embed(&self, nvars: usize, axes: &[usize]) -> Jet {
        assert_eq!(axes.len(), self.nvars());
        let mut out = Jet::zero(nvars, self.order());
        for (e, c) in self.terms() {
            let mut t = MultiIndex::default();
            for (i, &a) in axes.iter().enumerate() {
                t.0[a] = e.0[i];
            }
            let k = out.layout.index_of(&t).unwrap();
            out.coeffs[k] = c;
        }
        out
    }

    fn check_layout(&self, other: &Jet) {
        assert!(
            core::ptr::eq(self.layout, other.layout),
            "jet layout mismatch: ({}, {}) vs ({}, {})",
            self.nvars(),
            self.order(),
            other.nvars(),
            other.order()
        );
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet { layout: self.layout, coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }

    pub fn add_scalar(&self, s: f64) -> Jet {
        let mut out = self.clone();
        out.coeffs[0] += s;
        out
    }

    fn mul_into(&self, other: &Jet, out: &mut [f64]) {
        for &(i, j, k) in &self.layout.mul {
            out[k as usize] += self.coeffs[i as usize] * other.coeffs[j as usize];
        }
    }

    /// `self` minus its value: the nilpotent part.
    fn nilpotent(&self) -> Jet {
        let mut h = self.clone();
        h.coeffs[0] = 0.0;
        h
    }

    /// `sum_k series[k] * (self - value)^k` (Horner in the nilpotent part).
    pub fn compose_series(&self, series: &[f64]) -> Jet {
        let h = self.nilpotent();
        let n = series.len().min(self.order() + 1);
        if n == 0 {
            return self.lift(0.0);
        }
        let mut acc = self.lift(series[n - 1]);
        for k in (0..n - 1).rev() {
            acc = &acc * &h;
            acc.coeffs[0] += series[k];
        }
        acc
    }

    pub fn recip(&self) -> Result<Jet> {
        let a = self.value();
        if a.abs() <= SINGULAR_TOL {
            return Err(Error::SingularPoint("division by a vanishing jet"));
        }
        let n = self.order();
        let mut series = Vec::with_capacity(n + 1);
        let mut t = 1.0 / a;
        for _ in 0..=n {
            series.push(t);
            t *= -1.0 / a;
        }
        Ok(self.compose_series(&series))
    }

    pub fn checked_div(&self, other: &Jet) -> Result<Jet> {
        self.check_layout(other);
        let b = other.value();
        if b.abs() <= SINGULAR_TOL * (1.0 + self.value().abs()) {
            return Err(Error::SingularPoint("division by a vanishing jet"));
        }
        Ok(self * &other.recip()?)
    }

    pub fn exp(&self) -> Jet {
        let e = libm::exp(self.value());
        let series: Vec<f64> = (0..=self.order()).map(|k| e / factorial(k)).collect();
        self.compose_series(&series)
    }

    pub fn ln(&self) -> Result<Jet> {
        let a = self.value();
        if a <= SINGULAR_TOL {
            return Err(Error::SingularPoint("logarithm of a non-positive value"));
        }
        let mut series = vec![libm::log(a)];
        let mut p = 1.0;
        for k in 1..=self.order() {
            p /= a;
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            series.push(sign * p / k as f64);
        }
        Ok(self.compose_series(&series))
    }

    /// Real power with non-integer exponent; needs a positive base.
    pub fn powf(&self, r: f64) -> Result<Jet> {
        if r == libm::round(r) && r.abs() <= 64.0 {
            return self.powi(r as i32);
        }
        let a = self.value();
        if a <= SINGULAR_TOL {
            return Err(Error::SingularPoint("fractional power of a non-positive value"));
        }
        let mut series = Vec::with_capacity(self.order() + 1);
        let mut binom = 1.0;
        for k in 0..=self.order() {
            series.push(binom * libm::pow(a, r - k as f64));
            binom *= (r - k as f64) / (k as f64 + 1.0);
        }
        Ok(self.compose_series(&series))
    }

    pub fn sqrt(&self) -> Result<Jet> {
        self.powf(0.5)
    }

    pub fn powi(&self, n: i32) -> Result<Jet> {
        if n < 0 {
            return self.recip()?.powi(-n);
        }
        let mut acc = self.lift(1.0);
        let mut base = self.clone();
        let mut k = n as u32;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        Ok(acc)
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = (libm::sin(self.value()), libm::cos(self.value()));
        let cyc = [s, c, -s, -c];
        let series: Vec<f64> = (0..=self.order()).map(|k| cyc[k % 4] / factorial(k)).collect();
        self.compose_series(&series)
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = (libm::sin(self.value()), libm::cos(self.value()));
        let cyc = [c, -s, -c, s];
        let series: Vec<f64> = (0..=self.order()).map(|k| cyc[k % 4] / factorial(k)).collect();
        self.compose_series(&series)
    }

    /// Substitute jets for the variables of `self`: returns the jet of
    /// `f(args)` where `f` is the Taylor polynomial of `self`. The values of
    /// `args` must coincide with the base point of `self`.
    pub fn compose(&self, args: &[Jet]) -> Jet {
        assert_eq!(args.len(), self.nvars());
        let proto = &args[0];
        let order = proto.order().min(self.order());
        let mut powers: Vec<Vec<Jet>> = Vec::with_capacity(args.len());
        for a in args {
            proto.check_layout(a);
            let h = a.nilpotent();
            let mut ps = vec![proto.lift(1.0)];
            for k in 1..=order {
                let next = &ps[k - 1] * &h;
                ps.push(next);
            }
            powers.push(ps);
        }
        let mut out = proto.lift(0.0);
        for (e, c) in self.terms() {
            if c == 0.0 || e.degree() > order {
                continue;
            }
            let mut term = proto.lift(c);
            for v in 0..self.nvars() {
                if e.0[v] > 0 {
                    term = &term * &powers[v][e.0[v] as usize];
                }
            }
            out += &term;
        }
        out
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        self.check_layout(rhs);
        Jet {
            layout: self.layout,
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        self.check_layout(rhs);
        Jet {
            layout: self.layout,
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.check_layout(rhs);
        let mut coeffs = vec![0.0; self.layout.len()];
        self.mul_into(rhs, &mut coeffs);
        Jet { layout: self.layout, coeffs }
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Add<f64> for &Jet {
    type Output = Jet;
    fn add(self, rhs: f64) -> Jet {
        self.add_scalar(rhs)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Jet> for Jet {
            type Output = Jet;
            fn $m(self, rhs: &Jet) -> Jet {
                (&self).$m(rhs)
            }
        }
        impl $tr<Jet> for &Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                self.$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(self, rhs: f64) -> Jet {
        self.add_scalar(rhs)
    }
}

impl AddAssign<&Jet> for Jet {
    fn add_assign(&mut self, rhs: &Jet) {
        self.check_layout(rhs);
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a += b;
        }
    }
}

impl SubAssign<&Jet> for Jet {
    fn sub_assign(&mut self, rhs: &Jet) {
        self.check_layout(rhs);
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a -= b;
        }
    }
}

/// The coordinate function of `axis` as a 4-variable jet at `point`.
pub fn jet_variable(point: [f64; 4], axis: usize, order: usize) -> Jet {
    Jet::variable(4, order, axis, point[axis])
}

/// All four coordinate functions at `point`.
pub fn coordinates(point: [f64; 4], order: usize) -> [Jet; 4] {
    core::array::from_fn(|axis| jet_variable(point, axis, order))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
    /// `a^b`, with `b` taken as a constant exponent when it is one.
    Pow,
    Exp,
    Ln,
    Sqrt,
}

/// Binary/unary jet arithmetic by tag. Unary operations ignore `b`.
pub fn jet_arith(a: &Jet, b: &Jet, op: ArithOp) -> Result<Jet> {
    match op {
        ArithOp::Add => Ok(a + b),
        ArithOp::Sub => Ok(a - b),
        ArithOp::Mul => Ok(a * b),
        ArithOp::Div => a.checked_div(b),
        ArithOp::Pow => {
            if b.coeffs.iter().skip(1).all(|&c| c == 0.0) {
                a.powf(b.value())
            } else {
                Ok((b * &a.ln()?).exp())
            }
        }
        ArithOp::Exp => Ok(a.exp()),
        ArithOp::Ln => a.ln(),
        ArithOp::Sqrt => a.sqrt(),
    }
}

/// Central finite-difference estimate of `∂^m f` with one level of
/// Richardson extrapolation. `step` is the base step per unit coordinate
/// scale; pass `None` for [`default_fd_step`].
pub fn fd_oracle<F>(f: F, point: [f64; 4], m: &MultiIndex, step: Option<f64>) -> f64
where
    F: Fn([f64; 4]) -> f64,
{
    let k = m.degree();
    assert!(k <= 4, "oracle supports total degree <= 4");
    let base = step.unwrap_or_else(|| default_fd_step(k));
    let h: [f64; 4] = core::array::from_fn(|i| base * point[i].abs().max(1.0));
    let coarse = central_difference(&f, point, m, &h);
    let half: [f64; 4] = core::array::from_fn(|i| h[i] * 0.5);
    let fine = central_difference(&f, point, m, &half);
    (4.0 * fine - coarse) / 3.0
}

/// Step balancing the `O(h^4)` Richardson truncation error against the
/// `eps / h^k` round-off of a degree-`k` stencil.
pub fn default_fd_step(degree: usize) -> f64 {
    match degree {
        0 => 0.0,
        _ => 2.0 * libm::pow(f64::EPSILON, 1.0 / (degree as f64 + 4.0)),
    }
}

fn central_difference<F>(f: &F, point: [f64; 4], m: &MultiIndex, h: &[f64; 4]) -> f64
where
    F: Fn([f64; 4]) -> f64,
{
    // Tensor product of 1-D central stencils: offsets (n/2 - j) h, weights
    // (-1)^j C(n, j), divided by h^n. Odd n uses half-steps on a 2h grid.
    let mut stencils: Vec<Vec<(f64, f64)>> = Vec::with_capacity(4);
    for axis in 0..4 {
        let n = m.0[axis] as usize;
        let mut s = Vec::with_capacity(n + 1);
        if n == 0 {
            s.push((0.0, 1.0));
        } else if n % 2 == 0 {
            for j in 0..=n {
                let w = binomial(n, j) * if j % 2 == 0 { 1.0 } else { -1.0 };
                s.push(((n as f64 / 2.0 - j as f64) * h[axis], w / libm::pow(h[axis], n as f64)));
            }
        } else {
            // step 2h so the offsets n/2 - j land on integer multiples of h
            let hh = 2.0 * h[axis];
            for j in 0..=n {
                let w = binomial(n, j) * if j % 2 == 0 { 1.0 } else { -1.0 };
                s.push(((n as f64 / 2.0 - j as f64) * hh, w / libm::pow(hh, n as f64)));
            }
        }
        stencils.push(s);
    }
    let mut total = 0.0;
    for a in &stencils[0] {
        for b in &stencils[1] {
            for c in &stencils[2] {
                for d in &stencils[3] {
                    let p = [point[0] + a.0, point[1] + b.0, point[2] + c.0, point[3] + d.0];
                    total += a.1 * b.1 * c.1 * d.1 * f(p);
                }
            }
        }
    }
    total
}

fn binomial(n: usize, k: usize) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn layout_sizes() {
        assert_eq!(layout(4, 5).len(), 126);
        assert_eq!(layout(4, 2).len(), 15);
        assert_eq!(layout(1, 5).len(), 6);
        // pairs (a, b) with |a| + |b| <= 5 over 4 variables: C(13, 8)
        assert_eq!(layout(4, 5).mul.len(), 1287);
    }

    #[test]
    fn variable_identity_case() {
        let x = jet_variable([1.0, 2.0, 3.0, 4.0], 2, 2);
        assert_eq!(x.value(), 3.0);
        assert_eq!(x.derivative(&MultiIndex::new(0, 0, 1, 0)), 1.0);
        for m in MultiIndex::all(4, 2).filter(|m| m.degree() == 2) {
            assert_eq!(x.coeff(&m), 0.0);
        }
        let cube = x.powi(3).unwrap();
        assert_eq!(cube.coeff(&MultiIndex::new(0, 0, 2, 0)), 9.0);
        assert_eq!(cube.derivative(&MultiIndex::new(0, 0, 2, 0)), 18.0);
        let y = jet_variable([1.0, 2.0, 3.0, 4.0], 3, 2);
        assert_eq!((&x * &y).derivative(&MultiIndex::new(0, 0, 1, 1)), 1.0);
    }

    #[test]
    fn reciprocal_is_geometric_series() {
        let x = Jet::variable(1, 3, 0, 2.0);
        let r = x.recip().unwrap();
        assert_eq!(r.coeffs(), &[0.5, -0.25, 0.125, -0.0625]);
    }

    #[test]
    fn sqrt_value_and_slope() {
        let w = Jet::variable(1, 1, 0, 4.0);
        let s = w.sqrt().unwrap();
        assert_eq!(s.value(), 2.0);
        assert!(close(s.coeffs()[1], 0.25, 1e-15));
    }

    #[test]
    fn exp_ln_round_trip() {
        let x = Jet::variable(4, 4, 0, 1.7);
        let back = x.ln().unwrap().exp();
        for (a, b) in back.coeffs().iter().zip(x.coeffs()) {
            assert!((a - b).abs() < 1e-14, "{a} vs {b}");
        }
    }

    #[test]
    fn domain_errors() {
        let z = Jet::variable(2, 3, 0, 0.0);
        assert!(matches!(z.recip(), Err(Error::SingularPoint(_))));
        assert!(matches!(z.ln(), Err(Error::SingularPoint(_))));
        let neg = Jet::variable(2, 3, 1, -1.0);
        assert!(neg.sqrt().is_err());
        assert!(neg.powi(3).is_ok());
        let one = Jet::constant(2, 3, 1.0);
        assert!(one.checked_div(&Jet::constant(2, 3, 1e-13)).is_err());
    }

    #[test]
    fn diff_and_integrate_are_inverse_on_low_degrees() {
        let p = [0.3, -0.2, 1.1, 0.7];
        let [q, _, x, y] = coordinates(p, 5);
        let f = (&(&x * &y).exp() + &q.sin()) * &y;
        let g = f.diff(3).with_order(5).integrate(3);
        // recover f - f|_{y = base}
        for (m, c) in g.terms() {
            if m.degree() < 5 && m.0[3] > 0 {
                assert!((c - f.coeff(&m)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn compose_matches_direct_evaluation() {
        let p = [0.4, 0.0, 1.3, -0.5];
        let [q, pp, x, y] = coordinates(p, 4);
        let f = &(&x * &x) * &y + &q.exp();
        // substitute x -> x + (q - q0)(y - y0), keeping the base point
        let xs = &x + &(&(&q - &q.lift(p[0])) * &(&y - &y.lift(p[3])));
        let direct = &(&xs * &xs) * &y + &q.exp();
        let composed = f.compose(&[q, pp, xs, y]);
        for (a, b) in composed.coeffs().iter().zip(direct.coeffs()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn oracle_on_simple_fields() {
        let f = |p: [f64; 4]| p[2] * p[2] * p[2];
        let d2 = fd_oracle(f, [0.0, 0.0, 2.0, 0.0], &MultiIndex::new(0, 0, 2, 0), None);
        assert!((d2 - 12.0).abs() < 1e-6, "{d2}");
        // W = b0 y^2 x: d_y d_x W = 2 b0 y
        let b0 = 1.7;
        let w = move |p: [f64; 4]| b0 * p[3] * p[3] * p[2];
        let dxy = fd_oracle(w, [0.1, 0.0, 1.2, 0.9], &MultiIndex::new(0, 0, 1, 1), None);
        assert!((dxy - 2.0 * b0 * 0.9).abs() < 1e-6, "{dxy}");
    }
}
