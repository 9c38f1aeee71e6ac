//! Second-order jets: forward-mode values carrying two derivatives.
//!
//! A [`Jet2`] is a triple `(v, d1, d2)` representing a function value and its
//! first two derivatives with respect to a single scalar variable.  All
//! curvature formulas in this crate are rational expressions in the profile
//! jets, so propagating `(v, d1, d2)` through ordinary arithmetic gives exact
//! analytic derivatives for closed-form metrics — no finite differencing in
//! the production path.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Value and first two derivatives with respect to the evaluation variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet2 {
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet2 {
    /// The identity function evaluated at `r`: value `r`, slope 1, curvature 0.
    pub fn var(r: f64) -> Self {
        Jet2 { v: r, d1: 1.0, d2: 0.0 }
    }

    /// A constant.
    pub fn cst(c: f64) -> Self {
        Jet2 { v: c, d1: 0.0, d2: 0.0 }
    }

    pub fn zero() -> Self {
        Jet2::cst(0.0)
    }

    /// Chain rule through a scalar function with known first two derivatives.
    ///
    /// If `self` represents `u(r)` and (`f`, `fp`, `fpp`) are `f(u), f′(u),
    /// f″(u)` at `u = self.v`, the result represents `f(u(r))`.
    pub fn compose(self, f: f64, fp: f64, fpp: f64) -> Self {
        Jet2 {
            v: f,
            d1: fp * self.d1,
            d2: fpp * self.d1 * self.d1 + fp * self.d2,
        }
    }

    pub fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        self.compose(s, 0.5 / s, -0.25 / (s * self.v))
    }

    pub fn recip(self) -> Self {
        let iv = 1.0 / self.v;
        self.compose(iv, -iv * iv, 2.0 * iv * iv * iv)
    }

    pub fn exp(self) -> Self {
        let e = self.v.exp();
        self.compose(e, e, e)
    }

    pub fn ln(self) -> Self {
        let iv = 1.0 / self.v;
        self.compose(self.v.ln(), iv, -iv * iv)
    }

    pub fn powi(self, p: i32) -> Self {
        let f = self.v.powi(p);
        let fp = f64::from(p) * self.v.powi(p - 1);
        let fpp = f64::from(p) * f64::from(p - 1) * self.v.powi(p - 2);
        self.compose(f, fp, fpp)
    }

    pub fn powf(self, p: f64) -> Self {
        let f = self.v.powf(p);
        let fp = p * self.v.powf(p - 1.0);
        let fpp = p * (p - 1.0) * self.v.powf(p - 2.0);
        self.compose(f, fp, fpp)
    }

    pub fn scale(self, c: f64) -> Self {
        Jet2 { v: c * self.v, d1: c * self.d1, d2: c * self.d2 }
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(self, o: Jet2) -> Jet2 {
        Jet2 { v: self.v + o.v, d1: self.d1 + o.d1, d2: self.d2 + o.d2 }
    }
}

/// First-order jet: a value and one derivative.  Used where an expression
/// built from `Jet2` inputs must itself be differentiated once more (e.g. the
/// divergence of a flux that already consumed two derivatives of the metric).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet1 {
    pub v: f64,
    pub d1: f64,
}

impl Jet1 {
    pub fn cst(c: f64) -> Self {
        Jet1 { v: c, d1: 0.0 }
    }

    /// Value/first-derivative slots of a `Jet2`.
    pub fn of(j: Jet2) -> Self {
        Jet1 { v: j.v, d1: j.d1 }
    }

    /// The derivative of a `Jet2`, itself carrying one derivative.
    pub fn of_derivative(j: Jet2) -> Self {
        Jet1 { v: j.d1, d1: j.d2 }
    }

    pub fn recip(self) -> Self {
        let iv = 1.0 / self.v;
        Jet1 { v: iv, d1: -self.d1 * iv * iv }
    }

    pub fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        Jet1 { v: s, d1: 0.5 * self.d1 / s }
    }

    pub fn powf(self, p: f64) -> Self {
        Jet1 { v: self.v.powf(p), d1: p * self.v.powf(p - 1.0) * self.d1 }
    }
}

impl Add for Jet1 {
    type Output = Jet1;
    fn add(self, o: Jet1) -> Jet1 {
        Jet1 { v: self.v + o.v, d1: self.d1 + o.d1 }
    }
}

impl Sub for Jet1 {
    type Output = Jet1;
    fn sub(self, o: Jet1) -> Jet1 {
        Jet1 { v: self.v - o.v, d1: self.d1 - o.d1 }
    }
}

impl Mul for Jet1 {
    type Output = Jet1;
    fn mul(self, o: Jet1) -> Jet1 {
        Jet1 { v: self.v * o.v, d1: self.d1 * o.v + self.v * o.d1 }
    }
}

impl Div for Jet1 {
    type Output = Jet1;
    fn div(self, o: Jet1) -> Jet1 {
        self * o.recip()
    }
}

impl Neg for Jet1 {
    type Output = Jet1;
    fn neg(self) -> Jet1 {
        Jet1 { v: -self.v, d1: -self.d1 }
    }
}

impl Mul<f64> for Jet1 {
    type Output = Jet1;
    fn mul(self, c: f64) -> Jet1 {
        Jet1 { v: self.v * c, d1: self.d1 * c }
    }
}

impl Div<f64> for Jet1 {
    type Output = Jet1;
    fn div(self, c: f64) -> Jet1 {
        Jet1 { v: self.v / c, d1: self.d1 / c }
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, o: Jet2) -> Jet2 {
        Jet2 { v: self.v - o.v, d1: self.d1 - o.d1, d2: self.d2 - o.d2 }
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, o: Jet2) -> Jet2 {
        Jet2 {
            v: self.v * o.v,
            d1: self.d1 * o.v + self.v * o.d1,
            d2: self.d2 * o.v + 2.0 * self.d1 * o.d1 + self.v * o.d2,
        }
    }
}

impl Div for Jet2 {
    type Output = Jet2;
    fn div(self, o: Jet2) -> Jet2 {
        self * o.recip()
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        Jet2 { v: -self.v, d1: -self.d1, d2: -self.d2 }
    }
}

impl Add<f64> for Jet2 {
    type Output = Jet2;
    fn add(self, c: f64) -> Jet2 {
        Jet2 { v: self.v + c, ..self }
    }
}

impl Sub<f64> for Jet2 {
    type Output = Jet2;
    fn sub(self, c: f64) -> Jet2 {
        Jet2 { v: self.v - c, ..self }
    }
}

impl Mul<f64> for Jet2 {
    type Output = Jet2;
    fn mul(self, c: f64) -> Jet2 {
        self.scale(c)
    }
}

impl Div<f64> for Jet2 {
    type Output = Jet2;
    fn div(self, c: f64) -> Jet2 {
        self.scale(1.0 / c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Oracle: central finite differences of a plain closure.
    fn fd2(f: impl Fn(f64) -> f64, r: f64, h: f64) -> (f64, f64) {
        let d1 = (f(r + h) - f(r - h)) / (2.0 * h);
        let d2 = (f(r + h) - 2.0 * f(r) + f(r - h)) / (h * h);
        (d1, d2)
    }

    #[test]
    fn jets_match_finite_differences_on_a_composite_expression() {
        // f(r) = sqrt(r² + 1) / (1 + exp(-r)) + ln(r) * r³
        let jet = |r: f64| {
            let x = Jet2::var(r);
            (x * x + 1.0).sqrt() / ((-x).exp() + 1.0) + x.ln() * x.powi(3)
        };
        let plain = |r: f64| {
            (r * r + 1.0).sqrt() / (1.0 + (-r).exp()) + r.ln() * r.powi(3)
        };
        for &r in &[0.7, 1.3, 2.9, 8.0] {
            let j = jet(r);
            let (d1, d2) = fd2(plain, r, 1e-5);
            assert!((j.v - plain(r)).abs() < 1e-14);
            assert!((j.d1 - d1).abs() < 1e-7 * (1.0 + d1.abs()), "d1 at r={r}");
            assert!((j.d2 - d2).abs() < 1e-4 * (1.0 + d2.abs()), "d2 at r={r}");
        }
    }

    #[test]
    fn powf_and_powi_agree() {
        let x = Jet2::var(1.7);
        let a = x.powi(5);
        let b = x.powf(5.0);
        assert!((a.v - b.v).abs() < 1e-12);
        assert!((a.d1 - b.d1).abs() < 1e-11);
        assert!((a.d2 - b.d2).abs() < 1e-10);
    }
}
