//! Radial profiles: scalar functions of `r` that can report two derivatives.
//!
//! Three representations share one interface:
//!
//! * **closed form** — an arbitrary jet-valued closure (exact derivatives);
//! * **value-sampled** — not-a-knot cubic spline through values on a
//!   log-spaced grid (derivatives from the interpolant);
//! * **jet-sampled** — quintic Hermite data `(v, v_x, v_xx)` per node in the
//!   log variable `x = ln r`.  Solvers emit this kind with the second
//!   derivative taken from their own differential equation, so the nodal
//!   residual of the interpolant is zero by construction.
//!
//! Sampled profiles may carry an explicit power-law tail model
//! `limit + coeff · r^(−rate)` used beyond the last node; otherwise the last
//! polynomial segment continues smoothly.  Domain enforcement (where a metric
//! is allowed to be evaluated) lives with the metric, not the profile.

use crate::jet::Jet2;
use std::fmt;
use std::sync::Arc;

/// Decay metadata attached to a profile (how fast it falls off toward the
/// asymptotic end, in the sense of the weighted norms).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Decay {
    /// `|u| = O(r^(−rate))`.
    Rate(f64),
    /// Identically zero outside `[lo, hi]`.
    Compact { lo: f64, hi: f64 },
    /// Nothing declared (e.g. a raw metric coefficient).
    Unspecified,
}

impl Decay {
    /// Metadata for a sum of two profiles.
    pub fn sum(self, other: Decay) -> Decay {
        use Decay::*;
        match (self, other) {
            (Compact { lo: a, hi: b }, Compact { lo: c, hi: d }) => {
                Compact { lo: a.min(c), hi: b.max(d) }
            }
            (Rate(p), Rate(q)) => Rate(p.min(q)),
            (Rate(p), Compact { .. }) | (Compact { .. }, Rate(p)) => Rate(p),
            _ => Unspecified,
        }
    }
}

/// Explicit asymptotic model used past the last sample node.
#[derive(Debug, Clone, Copy)]
pub struct TailModel {
    pub limit: f64,
    pub coeff: f64,
    pub rate: f64,
}

impl TailModel {
    fn eval(&self, r: f64) -> Jet2 {
        Jet2::var(r).powf(-self.rate) * self.coeff + self.limit
    }
}

/// Not-a-knot cubic spline data in `x = ln r`.
struct Spline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// Second derivatives in `x` at the nodes.
    m: Vec<f64>,
}

impl Spline {
    /// Solve the not-a-knot system with the two corner unknowns eliminated
    /// into their neighbouring rows, then a Thomas sweep.
    fn build(xs: Vec<f64>, ys: Vec<f64>) -> Spline {
        let n = xs.len();
        assert!(n >= 2, "spline needs at least two nodes");
        if n == 2 {
            return Spline { xs, ys, m: vec![0.0; 2] };
        }
        if n == 3 {
            // Single interior equation with natural ends.
            let h0 = xs[1] - xs[0];
            let h1 = xs[2] - xs[1];
            let rhs = (ys[2] - ys[1]) / h1 - (ys[1] - ys[0]) / h0;
            let m1 = rhs / ((h0 + h1) / 3.0);
            return Spline { xs, ys, m: vec![0.0, m1, 0.0] };
        }
        let h: Vec<f64> = xs.windows(2).map(|p| p[1] - p[0]).collect();
        let divd =
            |i: usize| (ys[i + 1] - ys[i]) / h[i] - (ys[i] - ys[i - 1]) / h[i - 1];
        // Unknowns M[1..=n-2]; not-a-knot expresses
        //   M0 = (1 + h0/h1) M1 − (h0/h1) M2,
        //   M_{n-1} = (1 + h_{n-2}/h_{n-3}) M_{n-2} − (h_{n-2}/h_{n-3}) M_{n-3}.
        let k = n - 2;
        let mut sub = vec![0.0; k];
        let mut diag = vec![0.0; k];
        let mut sup = vec![0.0; k];
        let mut rhs = vec![0.0; k];
        for (j, i) in (1..=n - 2).enumerate() {
            sub[j] = h[i - 1] / 6.0;
            diag[j] = (h[i - 1] + h[i]) / 3.0;
            sup[j] = h[i] / 6.0;
            rhs[j] = divd(i);
        }
        // Fold the M0 elimination into the first row (i = 1).
        let r0 = h[0] / h[1];
        diag[0] += sub[0] * (1.0 + r0);
        sup[0] -= sub[0] * r0;
        sub[0] = 0.0;
        // Fold the M_{n-1} elimination into the last row (i = n-2).
        let r1 = h[n - 2] / h[n - 3];
        diag[k - 1] += sup[k - 1] * (1.0 + r1);
        sub[k - 1] -= sup[k - 1] * r1;
        sup[k - 1] = 0.0;
        // Thomas sweep.
        for j in 1..k {
            let w = sub[j] / diag[j - 1];
            diag[j] -= w * sup[j - 1];
            rhs[j] -= w * rhs[j - 1];
        }
        let mut mm = vec![0.0; k];
        mm[k - 1] = rhs[k - 1] / diag[k - 1];
        for j in (0..k - 1).rev() {
            mm[j] = (rhs[j] - sup[j] * mm[j + 1]) / diag[j];
        }
        let mut m = vec![0.0; n];
        m[1..=n - 2].copy_from_slice(&mm);
        m[0] = (1.0 + r0) * m[1] - r0 * m[2];
        m[n - 1] = (1.0 + r1) * m[n - 2] - r1 * m[n - 3];
        Spline { xs, ys, m }
    }

    /// Value and two derivatives with respect to `x` at `x` (segment `i`).
    fn eval_x(&self, i: usize, x: f64) -> (f64, f64, f64) {
        let h = self.xs[i + 1] - self.xs[i];
        let t = x - self.xs[i];
        let dm = (self.m[i + 1] - self.m[i]) / h;
        let b = (self.ys[i + 1] - self.ys[i]) / h - h * (2.0 * self.m[i] + self.m[i + 1]) / 6.0;
        let v = self.ys[i] + t * (b + t * (self.m[i] / 2.0 + t * dm / 6.0));
        let d1 = b + t * (self.m[i] + t * dm / 2.0);
        let d2 = self.m[i] + t * dm;
        (v, d1, d2)
    }
}

/// Quintic Hermite data in `x = ln r`: per-node `(v, v_x, v_xx)`.
struct Hermite {
    xs: Vec<f64>,
    v: Vec<f64>,
    vx: Vec<f64>,
    vxx: Vec<f64>,
}

impl Hermite {
    fn eval_x(&self, i: usize, x: f64) -> (f64, f64, f64) {
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let (t4, t5) = (t3 * t, t3 * t * t);
        // Quintic Hermite basis and its t-derivatives.
        let b = [
            1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5,
            t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5,
            0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5),
            10.0 * t3 - 15.0 * t4 + 6.0 * t5,
            -4.0 * t3 + 7.0 * t4 - 3.0 * t5,
            0.5 * (t3 - 2.0 * t4 + t5),
        ];
        let db = [
            -30.0 * t2 + 60.0 * t3 - 30.0 * t4,
            1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4,
            0.5 * (2.0 * t - 9.0 * t2 + 12.0 * t3 - 5.0 * t4),
            30.0 * t2 - 60.0 * t3 + 30.0 * t4,
            -12.0 * t2 + 28.0 * t3 - 15.0 * t4,
            0.5 * (3.0 * t2 - 8.0 * t3 + 5.0 * t4),
        ];
        let ddb = [
            -60.0 * t + 180.0 * t2 - 120.0 * t3,
            -36.0 * t + 96.0 * t2 - 60.0 * t3,
            0.5 * (2.0 - 18.0 * t + 36.0 * t2 - 20.0 * t3),
            60.0 * t - 180.0 * t2 + 120.0 * t3,
            -24.0 * t + 84.0 * t2 - 60.0 * t3,
            0.5 * (6.0 * t - 24.0 * t2 + 20.0 * t3),
        ];
        let data = [
            self.v[i],
            self.vx[i] * h,
            self.vxx[i] * h * h,
            self.v[i + 1],
            self.vx[i + 1] * h,
            self.vxx[i + 1] * h * h,
        ];
        let mut val = 0.0;
        let mut d1 = 0.0;
        let mut d2 = 0.0;
        for j in 0..6 {
            val += data[j] * b[j];
            d1 += data[j] * db[j];
            d2 += data[j] * ddb[j];
        }
        (val, d1 / h, d2 / (h * h))
    }
}

enum Repr {
    Closed(Arc<dyn Fn(f64) -> Jet2 + Send + Sync>),
    Spline(Arc<Spline>, Option<TailModel>),
    Hermite(Arc<Hermite>, Option<TailModel>),
}

impl Clone for Repr {
    fn clone(&self) -> Self {
        match self {
            Repr::Closed(f) => Repr::Closed(f.clone()),
            Repr::Spline(s, t) => Repr::Spline(s.clone(), *t),
            Repr::Hermite(h, t) => Repr::Hermite(h.clone(), *t),
        }
    }
}

/// A radial scalar function with two derivatives and decay metadata.
#[derive(Clone)]
pub struct RadialProfile {
    repr: Repr,
    pub decay: Decay,
}

impl fmt::Debug for RadialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.repr {
            Repr::Closed(_) => "closed-form",
            Repr::Spline(s, _) => return write!(f, "RadialProfile(spline, {} nodes, {:?})", s.xs.len(), self.decay),
            Repr::Hermite(h, _) => return write!(f, "RadialProfile(hermite, {} nodes, {:?})", h.xs.len(), self.decay),
        };
        write!(f, "RadialProfile({kind}, {:?})", self.decay)
    }
}

/// Locate the segment index for `x` in a sorted node list.
fn segment(xs: &[f64], x: f64) -> usize {
    let n = xs.len();
    let i = xs.partition_point(|&t| t <= x);
    i.clamp(1, n - 1) - 1
}

impl RadialProfile {
    pub fn closed_form(
        f: impl Fn(f64) -> Jet2 + Send + Sync + 'static,
        decay: Decay,
    ) -> Self {
        RadialProfile { repr: Repr::Closed(Arc::new(f)), decay }
    }

    pub fn constant(c: f64) -> Self {
        RadialProfile::closed_form(move |_| Jet2::cst(c), Decay::Unspecified)
    }

    pub fn zero() -> Self {
        let mut p = RadialProfile::constant(0.0);
        p.decay = Decay::Compact { lo: 0.0, hi: 0.0 };
        p
    }

    /// Cubic-spline profile through `(radii, values)`; interpolation happens
    /// in `x = ln r`.
    pub fn sampled_values(radii: &[f64], values: &[f64], decay: Decay) -> Self {
        assert_eq!(radii.len(), values.len());
        assert!(radii.windows(2).all(|p| p[1] > p[0] && p[0] > 0.0));
        let xs: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
        let spline = Spline::build(xs, values.to_vec());
        RadialProfile { repr: Repr::Spline(Arc::new(spline), None), decay }
    }

    /// Quintic-Hermite profile from per-node jets in the `r` variable.
    pub fn sampled_jets(radii: &[f64], jets: &[Jet2], decay: Decay) -> Self {
        assert_eq!(radii.len(), jets.len());
        assert!(radii.windows(2).all(|p| p[1] > p[0] && p[0] > 0.0));
        let xs: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
        // d/dx = r d/dr, d²/dx² = r d/dr + r² d²/dr².
        let v = jets.iter().map(|j| j.v).collect();
        let vx = jets.iter().zip(radii).map(|(j, &r)| r * j.d1).collect();
        let vxx = jets
            .iter()
            .zip(radii)
            .map(|(j, &r)| r * j.d1 + r * r * j.d2)
            .collect();
        let h = Hermite { xs, v, vx, vxx };
        RadialProfile { repr: Repr::Hermite(Arc::new(h), None), decay }
    }

    /// Attach an explicit asymptotic model used beyond the last node.
    pub fn with_tail(mut self, tail: TailModel) -> Self {
        match &mut self.repr {
            Repr::Spline(_, t) | Repr::Hermite(_, t) => *t = Some(tail),
            Repr::Closed(_) => {}
        }
        self
    }

    /// Value and first two derivatives with respect to `r`.
    pub fn eval(&self, r: f64) -> Jet2 {
        match &self.repr {
            Repr::Closed(f) => f(r),
            Repr::Spline(s, tail) => {
                if let Some(t) = tail {
                    if r.ln() > *s.xs.last().unwrap() {
                        return t.eval(r);
                    }
                }
                let x = r.ln();
                let (v, d1x, d2x) = s.eval_x(segment(&s.xs, x), x);
                from_log_jets(r, v, d1x, d2x)
            }
            Repr::Hermite(hm, tail) => {
                if let Some(t) = tail {
                    if r.ln() > *hm.xs.last().unwrap() {
                        return t.eval(r);
                    }
                }
                let x = r.ln();
                let (v, d1x, d2x) = hm.eval_x(segment(&hm.xs, x), x);
                from_log_jets(r, v, d1x, d2x)
            }
        }
    }

    pub fn value(&self, r: f64) -> f64 {
        self.eval(r).v
    }

    /// Pointwise linear combination `a·self + b·other`.
    pub fn lin_comb(&self, a: f64, other: &RadialProfile, b: f64) -> RadialProfile {
        let p = self.clone();
        let q = other.clone();
        let decay = p.decay.sum(q.decay);
        RadialProfile::closed_form(move |r| p.eval(r) * a + q.eval(r) * b, decay)
    }

    /// Pointwise product.
    pub fn product(&self, other: &RadialProfile) -> RadialProfile {
        let p = self.clone();
        let q = other.clone();
        let decay = match (p.decay, q.decay) {
            (Decay::Compact { lo, hi }, _) | (_, Decay::Compact { lo, hi }) => {
                Decay::Compact { lo, hi }
            }
            (Decay::Rate(a), Decay::Rate(b)) => Decay::Rate(a + b),
            _ => Decay::Unspecified,
        };
        RadialProfile::closed_form(move |r| p.eval(r) * q.eval(r), decay)
    }

    /// Pointwise shift by a constant.
    pub fn plus_constant(&self, c: f64) -> RadialProfile {
        let p = self.clone();
        RadialProfile::closed_form(move |r| p.eval(r) + c, Decay::Unspecified)
    }
}

fn from_log_jets(r: f64, v: f64, d1x: f64, d2x: f64) -> Jet2 {
    // x = ln r: f_r = f_x / r, f_rr = (f_xx − f_x) / r².
    Jet2 { v, d1: d1x / r, d2: (d2x - d1x) / (r * r) }
}
