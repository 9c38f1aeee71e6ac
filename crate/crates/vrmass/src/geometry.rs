//! Rotationally symmetric geometry on `M = (r_edge, ∞) × N`.
//!
//! The cross-section `(N, h)` is a closed Einstein manifold normalised so
//! that `Ric_h = k (n−2) h` with `k ∈ {−1, 0, +1}` (unit sphere, flat torus,
//! or compact hyperbolic space).  Metrics under study are warped products
//!
//! ```text
//!     g = q(r) dr² + w(r) h ,
//! ```
//!
//! and the reference metric is `q̂ = 1/(r² + k)`, `ŵ = r²`, which has
//! constant scalar curvature `−n(n−1)` and is the model of an asymptotically
//! hyperbolic end.  For `k ∈ {0, 1}` the radial coordinate starts at `0`,
//! for `k = −1` at `1` (where the reference degenerates).
//!
//! All curvature quantities reduce to ordinary derivatives of `q` and `w`;
//! the formulas below are the standard warped-product reductions, and the
//! unit tests verify them against an independent arc-length parametrisation
//! `g = ds² + φ(s)² h`.

use crate::error::{Result, VrError};
use crate::jet::Jet2;
use crate::profile::{Decay, RadialProfile};
use serde::Serialize;

/// Volume of the model cross-section: unit round sphere for `k = 1`, unit
/// flat torus for `k = 0`, a genus-two hyperbolic surface (area `4π`) for
/// `k = −1` in dimension three and a unit-volume quotient otherwise.
pub fn default_cross_section_volume(n: usize, k: i32) -> f64 {
    match k {
        1 => {
            // Vol(S^{n-1}) = 2 π^{n/2} / Γ(n/2).
            let g = gamma_half_integer(n);
            2.0 * std::f64::consts::PI.powf(n as f64 / 2.0) / g
        }
        0 => 1.0,
        -1 => {
            if n == 3 {
                4.0 * std::f64::consts::PI
            } else {
                1.0
            }
        }
        _ => f64::NAN,
    }
}

/// Γ(n/2) for integer `n ≥ 1`.
fn gamma_half_integer(n: usize) -> f64 {
    if n % 2 == 0 {
        // Γ(m) = (m−1)!
        let m = n / 2;
        (1..m).map(|i| i as f64).product()
    } else {
        // Γ(m + 1/2) = (2m)! √π / (4^m m!)
        let m = n / 2;
        let mut v = std::f64::consts::PI.sqrt();
        for i in 0..m {
            v *= 0.5 + i as f64;
        }
        v
    }
}

/// The ambient data: dimension, cross-section type, cross-section volume,
/// and an optional inner boundary radius.
#[derive(Debug, Clone, Serialize)]
pub struct RadialManifold {
    /// Dimension `n ≥ 3` of `M`.
    pub n: usize,
    /// Cross-section Einstein constant sign: `Ric_h = k (n−2) h`.
    pub k: i32,
    /// Total volume of `(N, h)`.
    pub vol_n: f64,
    /// Inner boundary radius `r₀` (compact boundary case), if any.
    pub inner_radius: Option<f64>,
}

impl RadialManifold {
    pub fn new(n: usize, k: i32, inner_radius: Option<f64>) -> Result<Self> {
        if n < 3 {
            return Err(VrError::InvalidConfig(format!(
                "dimension must be at least 3, got {n}"
            )));
        }
        if !matches!(k, -1 | 0 | 1) {
            return Err(VrError::InvalidConfig(format!(
                "cross-section sign k must be -1, 0 or 1, got {k}"
            )));
        }
        let man = RadialManifold {
            n,
            k,
            vol_n: default_cross_section_volume(n, k),
            inner_radius,
        };
        if let Some(r0) = inner_radius {
            if r0 <= man.r_edge() {
                return Err(VrError::InvalidConfig(format!(
                    "inner radius {r0} must exceed the coordinate edge {}",
                    man.r_edge()
                )));
            }
        }
        Ok(man)
    }

    pub fn with_cross_section_volume(mut self, vol: f64) -> Self {
        self.vol_n = vol;
        self
    }

    /// Coordinate edge of the reference chart: `0` for `k ∈ {0, 1}`, `1` for
    /// `k = −1` (where `r² + k` vanishes).
    pub fn r_edge(&self) -> f64 {
        if self.k == -1 {
            1.0
        } else {
            0.0
        }
    }

    /// Lowest admissible radius: the inner boundary if present, else the
    /// (open) coordinate edge.
    pub fn domain_lo(&self) -> f64 {
        self.inner_radius.unwrap_or_else(|| self.r_edge())
    }

    /// Validate an evaluation radius.
    pub fn check_radius(&self, r: f64) -> Result<()> {
        let lo = self.domain_lo();
        let ok = match self.inner_radius {
            Some(r0) => r >= r0 * (1.0 - 1e-12),
            None => r > self.r_edge(),
        };
        if ok && r.is_finite() {
            Ok(())
        } else {
            Err(VrError::OutOfDomain { r, lo, hi: f64::INFINITY })
        }
    }
}

/// A rotationally symmetric metric `g = q dr² + w h`.
#[derive(Clone, Debug)]
pub struct RadialMetric {
    pub q: RadialProfile,
    pub w: RadialProfile,
}

impl RadialMetric {
    pub fn new(q: RadialProfile, w: RadialProfile) -> Self {
        RadialMetric { q, w }
    }

    /// Coefficient jets `(q, w)` at `r`.
    pub fn eval(&self, r: f64) -> (Jet2, Jet2) {
        (self.q.eval(r), self.w.eval(r))
    }

    /// The metric `g + t·h` along a linear perturbation curve.
    pub fn perturbed(&self, h: &SymmetricPerturbation, t: f64) -> RadialMetric {
        RadialMetric {
            q: self.q.lin_comb(1.0, &h.h_rr, t),
            w: self.w.lin_comb(1.0, &h.h_tan, t),
        }
    }
}

/// The reference metric `ĝ = dr²/(r²+k) + r² h`.
pub fn reference_metric(man: &RadialManifold) -> RadialMetric {
    let k = man.k as f64;
    RadialMetric {
        q: RadialProfile::closed_form(
            move |r| (Jet2::var(r).powi(2) + k).recip(),
            Decay::Unspecified,
        ),
        w: RadialProfile::closed_form(|r| Jet2::var(r).powi(2), Decay::Unspecified),
    }
}

/// A rotationally symmetric symmetric 2-tensor `T = T_rr dr² + T_tan h`.
#[derive(Clone, Debug)]
pub struct SymmetricPerturbation {
    pub h_rr: RadialProfile,
    pub h_tan: RadialProfile,
}

impl SymmetricPerturbation {
    pub fn new(h_rr: RadialProfile, h_tan: RadialProfile) -> Self {
        SymmetricPerturbation { h_rr, h_tan }
    }

    pub fn zero() -> Self {
        SymmetricPerturbation { h_rr: RadialProfile::zero(), h_tan: RadialProfile::zero() }
    }

    pub fn eval(&self, r: f64) -> (Jet2, Jet2) {
        (self.h_rr.eval(r), self.h_tan.eval(r))
    }

    pub fn lin_comb(&self, a: f64, other: &SymmetricPerturbation, b: f64) -> Self {
        SymmetricPerturbation {
            h_rr: self.h_rr.lin_comb(a, &other.h_rr, b),
            h_tan: self.h_tan.lin_comb(a, &other.h_tan, b),
        }
    }

    /// `g`-trace `tr_g T = T_rr/q + (n−1) T_tan/w` at `r`.
    pub fn trace(&self, man: &RadialManifold, metric: &RadialMetric, r: f64) -> f64 {
        let (q, w) = metric.eval(r);
        let (a, b) = self.eval(r);
        a.v / q.v + (man.n as f64 - 1.0) * b.v / w.v
    }

    /// `g`-inner product `⟨T, S⟩ = T_rr S_rr/q² + (n−1) T_tan S_tan/w²`.
    pub fn inner(
        &self,
        other: &SymmetricPerturbation,
        man: &RadialManifold,
        metric: &RadialMetric,
        r: f64,
    ) -> f64 {
        let (q, w) = metric.eval(r);
        let (a1, b1) = self.eval(r);
        let (a2, b2) = other.eval(r);
        a1.v * a2.v / (q.v * q.v) + (man.n as f64 - 1.0) * b1.v * b2.v / (w.v * w.v)
    }

    /// Norm in the *reference* frame: `|T|_ĝ² = ((r²+k) T_rr)² + (n−1)(T_tan/r²)²`.
    pub fn hat_frame_norm(&self, man: &RadialManifold, r: f64) -> f64 {
        let (a, b) = self.eval(r);
        let k = man.k as f64;
        let s = (r * r + k) * a.v;
        let t = b.v / (r * r);
        (s * s + (man.n as f64 - 1.0) * t * t).sqrt()
    }
}

/// Pointwise curvature of a rotationally symmetric metric.  `ric_rr` and
/// `ric_tan` are the coefficients in `Ric = ric_rr dr² + ric_tan h`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CurvatureFields {
    pub ric_rr: f64,
    pub ric_tan: f64,
    pub scal: f64,
}

/// Curvature of `g = q dr² + w h` at radius `r`.
pub fn curvature_fields(
    man: &RadialManifold,
    metric: &RadialMetric,
    r: f64,
) -> Result<CurvatureFields> {
    man.check_radius(r)?;
    let (q, w) = metric.eval(r);
    if !(q.v > 0.0) || !(w.v > 0.0) {
        return Err(VrError::InvalidConfig(format!(
            "metric coefficients must be positive at r = {r} (q = {}, w = {})",
            q.v, w.v
        )));
    }
    Ok(curvature_from_jets(man, q, w))
}

pub(crate) fn curvature_from_jets(man: &RadialManifold, q: Jet2, w: Jet2) -> CurvatureFields {
    let n = man.n as f64;
    let k = man.k as f64;
    let ric_rr = -(n - 1.0)
        * (w.d2 / (2.0 * w.v) - w.d1 * w.d1 / (4.0 * w.v * w.v)
            - q.d1 * w.d1 / (4.0 * q.v * w.v));
    let ric_tan = k * (n - 2.0) - w.d2 / (2.0 * q.v)
        + w.d1 * w.d1 / (4.0 * q.v * w.v)
        + q.d1 * w.d1 / (4.0 * q.v * q.v)
        - (n - 2.0) * w.d1 * w.d1 / (4.0 * q.v * w.v);
    let scal = ric_rr / q.v + (n - 1.0) * ric_tan / w.v;
    CurvatureFields { ric_rr, ric_tan, scal }
}

/// Extrinsic data of the coordinate sphere `{r} × N` with respect to the
/// outward normal (pointing toward the asymptotic end): mean curvature `H`,
/// the principal curvature `κ` of the tangential directions, and the induced
/// area.  At a horizon (`q → ∞`) the mean curvature vanishes.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MeanCurvatureData {
    pub mean_curvature: f64,
    pub tangential_principal: f64,
    pub area: f64,
}

pub fn mean_curvature_data(
    man: &RadialManifold,
    metric: &RadialMetric,
    r: f64,
) -> Result<MeanCurvatureData> {
    man.check_radius(r)?;
    let (q, w) = metric.eval(r);
    if !(w.v > 0.0) {
        return Err(VrError::InvalidConfig(format!(
            "tangential coefficient must be positive at r = {r}, got {}",
            w.v
        )));
    }
    // Work with 1/√q: at a horizon q blows up and the shear vanishes.
    let mut inv_q = 1.0 / q.v;
    if !inv_q.is_finite() || inv_q.abs() < 1e-14 {
        inv_q = 0.0;
    }
    if inv_q < 0.0 {
        return Err(VrError::InvalidConfig(format!(
            "radial coefficient must be positive at r = {r}, got q = {}",
            q.v
        )));
    }
    let n = man.n as f64;
    let kappa = w.d1 * inv_q.sqrt() / (2.0 * w.v);
    Ok(MeanCurvatureData {
        mean_curvature: (n - 1.0) * kappa,
        tangential_principal: kappa,
        area: man.vol_n * w.v.powf((n - 1.0) / 2.0),
    })
}

/// Radial volume density `√(q w^{n−1})` (per unit cross-section volume).
pub fn volume_density(man: &RadialManifold, metric: &RadialMetric, r: f64) -> f64 {
    let (q, w) = metric.eval(r);
    (q.v * w.v.powi(man.n as i32 - 1)).sqrt()
}

/// Ratio of the volume element of `g` to that of the reference metric.
pub fn volume_element_ratio(man: &RadialManifold, metric: &RadialMetric, r: f64) -> f64 {
    let hat = reference_metric(man);
    volume_density(man, metric, r) / volume_density(man, &hat, r)
}

/// Scale-free deviation of `g` from the reference in the reference frame:
/// `e(r)² = ((q−q̂)/q̂)² + (n−1)((w−r²)/r²)²`.
pub fn frame_deviation(man: &RadialManifold, metric: &RadialMetric, r: f64) -> f64 {
    let (q, w) = metric.eval(r);
    let k = man.k as f64;
    let qhat = 1.0 / (r * r + k);
    let a = (q.v - qhat) / qhat;
    let b = (w.v - r * r) / (r * r);
    (a * a + (man.n as f64 - 1.0) * b * b).sqrt()
}
