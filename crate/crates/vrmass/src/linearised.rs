//! Linearisation of curvature along rotationally symmetric perturbations.
//!
//! For `g = q dr² + w h` and a symmetric direction `T = a dr² + b h` the
//! linearised scalar curvature is
//!
//! ```text
//!     DS[T] = −Δ_g (tr_g T) + div_g div_g T − ⟨T, Ric_g⟩ ,
//! ```
//!
//! and its formal adjoint acting on a function `f` is
//!
//! ```text
//!     DS*[f] = −(Δ_g f) g + Hess_g f − f · Ric_g .
//! ```
//!
//! Integration by parts produces the flux one-form
//!
//! ```text
//!     𝔅 = f (div T − d tr T) − ι_{∇f} T + (tr T) df ,
//! ```
//!
//! whose divergence identity `(f·DS[T] − ⟨T, DS*[f]⟩) dV = d(flux)` is used
//! both as a correctness oracle and to localise Hamiltonian variations on the
//! boundary.  Everything reduces to explicit rational expressions in the
//! jets of `q, w, a, b, f`; second derivatives come from the jets, the one
//! extra derivative needed by the double divergence is propagated with
//! first-order jets.

use crate::analysis::integrate_radial;
use crate::error::Result;
use crate::geometry::{
    curvature_fields, volume_density, RadialManifold, RadialMetric, SymmetricPerturbation,
};
use crate::jet::{Jet1, Jet2};
use crate::profile::RadialProfile;
use serde::Serialize;

/// `Δ_g f` for a radial function: `f″/q − q′f′/(2q²) + (n−1) w′f′/(2qw)`.
pub fn scalar_laplacian(
    man: &RadialManifold,
    metric: &RadialMetric,
    f: &RadialProfile,
    r: f64,
) -> f64 {
    let (q, w) = metric.eval(r);
    let fj = f.eval(r);
    laplacian_from_jets(man.n as f64, q, w, fj)
}

fn laplacian_from_jets(n: f64, q: Jet2, w: Jet2, f: Jet2) -> f64 {
    f.d2 / q.v - q.d1 * f.d1 / (2.0 * q.v * q.v) + (n - 1.0) * w.d1 * f.d1 / (2.0 * q.v * w.v)
}

/// Radial component of `div_g T` (as a one-form), carrying one derivative so
/// it can be differentiated once more.
fn radial_divergence_jet(n: f64, q: Jet2, w: Jet2, a: Jet2, b: Jet2) -> Jet1 {
    let qa = Jet1::of(q);
    let qd = Jet1::of_derivative(q);
    let wa = Jet1::of(w);
    let wd = Jet1::of_derivative(w);
    let aa = Jet1::of(a);
    let ad = Jet1::of_derivative(a);
    let ba = Jet1::of(b);
    (ad - qd * aa / qa) / qa + (wd / wa) * (aa / (qa * 2.0) - ba / (wa * 2.0)) * (n - 1.0)
}

/// Radial component of `div_g T` at `r`.
pub fn radial_divergence(
    man: &RadialManifold,
    metric: &RadialMetric,
    t: &SymmetricPerturbation,
    r: f64,
) -> f64 {
    let (q, w) = metric.eval(r);
    let (a, b) = t.eval(r);
    radial_divergence_jet(man.n as f64, q, w, a, b).v
}

/// `g`-trace of `T` as a jet in `r`.
fn trace_jet(n: f64, q: Jet2, w: Jet2, a: Jet2, b: Jet2) -> Jet2 {
    a / q + b / w * (n - 1.0)
}

/// Linearised scalar curvature `DS_g[T]` at radius `r`.
pub fn linearised_scalar(
    man: &RadialManifold,
    metric: &RadialMetric,
    t: &SymmetricPerturbation,
    r: f64,
) -> Result<f64> {
    man.check_radius(r)?;
    let n = man.n as f64;
    let (q, w) = metric.eval(r);
    let (a, b) = t.eval(r);
    let tau = trace_jet(n, q, w, a, b);
    let lap_tau = tau.d2 / q.v - q.d1 * tau.d1 / (2.0 * q.v * q.v)
        + (n - 1.0) * w.d1 * tau.d1 / (2.0 * q.v * w.v);
    let o = radial_divergence_jet(n, q, w, a, b);
    // div of the one-form O dr.
    let divdiv = (o.d1 - q.d1 * o.v / (2.0 * q.v)) / q.v
        + (n - 1.0) * w.d1 * o.v / (2.0 * q.v * w.v);
    let ric = curvature_fields(man, metric, r)?;
    let t_dot_ric =
        a.v * ric.ric_rr / (q.v * q.v) + (n - 1.0) * b.v * ric.ric_tan / (w.v * w.v);
    Ok(-lap_tau + divdiv - t_dot_ric)
}

/// Components `(rr, tan)` of the adjoint `DS*_g[f] = −(Δf) g + Hess f − f Ric`
/// at radius `r`.
pub fn adjoint_linearised_scalar(
    man: &RadialManifold,
    metric: &RadialMetric,
    f: &RadialProfile,
    r: f64,
) -> Result<(f64, f64)> {
    man.check_radius(r)?;
    let n = man.n as f64;
    let (q, w) = metric.eval(r);
    let fj = f.eval(r);
    let lap = laplacian_from_jets(n, q, w, fj);
    let ric = curvature_fields(man, metric, r)?;
    let hess_rr = fj.d2 - q.d1 * fj.d1 / (2.0 * q.v);
    let hess_tan = w.d1 * fj.d1 / (2.0 * q.v);
    let rr = -lap * q.v + hess_rr - fj.v * ric.ric_rr;
    let tan = -lap * w.v + hess_tan - fj.v * ric.ric_tan;
    Ok((rr, tan))
}

/// The adjoint as a perturbation-valued object (component profiles close over
/// the metric and the multiplier).
pub fn adjoint_as_perturbation(
    man: &RadialManifold,
    metric: &RadialMetric,
    f: &RadialProfile,
) -> SymmetricPerturbation {
    let (m1, g1, f1) = (man.clone(), metric.clone(), f.clone());
    let (m2, g2, f2) = (man.clone(), metric.clone(), f.clone());
    SymmetricPerturbation::new(
        RadialProfile::closed_form(
            move |r| {
                let (rr, _) = adjoint_linearised_scalar(&m1, &g1, &f1, r)
                    .expect("adjoint evaluated outside the metric domain");
                // Only the value is trusted downstream; derivative slots are
                // not propagated through this wrapper.
                Jet2::cst(rr)
            },
            crate::profile::Decay::Unspecified,
        ),
        RadialProfile::closed_form(
            move |r| {
                let (_, tan) = adjoint_linearised_scalar(&m2, &g2, &f2, r)
                    .expect("adjoint evaluated outside the metric domain");
                Jet2::cst(tan)
            },
            crate::profile::Decay::Unspecified,
        ),
    )
}

/// Scalar-curvature constraint density `(scal_g + n(n−1)) dV_g`, reported as
/// its radial density (cross-section volume included).
pub fn constraint_density(man: &RadialManifold, metric: &RadialMetric, r: f64) -> Result<f64> {
    let c = curvature_fields(man, metric, r)?;
    let n = man.n as f64;
    Ok((c.scal + n * (n - 1.0)) * man.vol_n * volume_density(man, metric, r))
}

/// Linearisation of the constraint density:
/// `D[(scal+n(n−1)) dV][T] = (DS[T] + ½ tr_g T · (scal + n(n−1))) dV`.
pub fn linearised_constraint_density(
    man: &RadialManifold,
    metric: &RadialMetric,
    t: &SymmetricPerturbation,
    r: f64,
) -> Result<f64> {
    let n = man.n as f64;
    let ds = linearised_scalar(man, metric, t, r)?;
    let c = curvature_fields(man, metric, r)?;
    let tr = t.trace(man, metric, r);
    Ok((ds + 0.5 * tr * (c.scal + n * (n - 1.0))) * man.vol_n * volume_density(man, metric, r))
}

/// Flux of the integration-by-parts one-form through the coordinate sphere
/// at `r`, with the normal pointing toward the asymptotic end.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FluxTerm {
    pub radius: f64,
    /// `∮ 𝔅(ν) dS` over the sphere.
    pub flux: f64,
    /// The same quantity assembled from boundary geometry alone:
    /// `∮ [−2f·DH[T] − f⟨K,T⟩_Σ + tr_Σ(T) ∂_ν f] dS`.
    pub reduced: f64,
}

pub fn flux_term(
    man: &RadialManifold,
    metric: &RadialMetric,
    t: &SymmetricPerturbation,
    f: &RadialProfile,
    r: f64,
) -> Result<FluxTerm> {
    man.check_radius(r)?;
    let n = man.n as f64;
    let (q, w) = metric.eval(r);
    let (a, b) = t.eval(r);
    let fj = f.eval(r);
    let tau = trace_jet(n, q, w, a, b);
    let div_r = radial_divergence_jet(n, q, w, a, b).v;
    let flux_r = fj.v * (div_r - tau.d1) - a.v * fj.d1 / q.v + tau.v * fj.d1;
    let area = man.vol_n * w.v.powf((n - 1.0) / 2.0);
    let flux = area * flux_r / q.v.sqrt();

    // Boundary-geometry form of the same flux.
    let dh = linearised_mean_curvature(man, metric, t, r)?;
    let k_dot_t = (n - 1.0) * w.d1 * b.v / (2.0 * q.v.sqrt() * w.v * w.v);
    let tr_sigma = (n - 1.0) * b.v / w.v;
    let reduced =
        area * (-2.0 * fj.v * dh - fj.v * k_dot_t + tr_sigma * fj.d1 / q.v.sqrt());
    Ok(FluxTerm { radius: r, flux, reduced })
}

/// Linearised mean curvature of the coordinate sphere at `r` in the
/// direction `T` (normal toward the asymptotic end).
pub fn linearised_mean_curvature(
    man: &RadialManifold,
    metric: &RadialMetric,
    t: &SymmetricPerturbation,
    r: f64,
) -> Result<f64> {
    man.check_radius(r)?;
    let n = man.n as f64;
    let (q, w) = metric.eval(r);
    let (a, b) = t.eval(r);
    let sq = q.v.sqrt();
    Ok((n - 1.0)
        * (b.d1 / (2.0 * w.v * sq)
            - w.d1 * b.v / (2.0 * w.v * w.v * sq)
            - w.d1 * a.v / (4.0 * w.v * q.v * sq)))
}

/// Defect of the integration-by-parts identity over `[r1, r2]`:
///
/// ```text
///     ∫ (f·DS[T] − ⟨T, DS*[f]⟩) dV  −  [flux]_{r1}^{r2} .
/// ```
///
/// Vanishes identically in exact arithmetic; the returned number is a pure
/// discretisation/quadrature diagnostic.
pub fn adjoint_identity_defect(
    man: &RadialManifold,
    metric: &RadialMetric,
    f: &RadialProfile,
    t: &SymmetricPerturbation,
    r1: f64,
    r2: f64,
    tol: f64,
) -> Result<f64> {
    let n = man.n as f64;
    let integrand = |r: f64| {
        let ds = linearised_scalar(man, metric, t, r).unwrap_or(f64::NAN);
        let (arr, atan) = adjoint_linearised_scalar(man, metric, f, r)
            .unwrap_or((f64::NAN, f64::NAN));
        let (q, w) = metric.eval(r);
        let (a, b) = t.eval(r);
        let fj = f.eval(r);
        let pairing = a.v * arr / (q.v * q.v) + (n - 1.0) * b.v * atan / (w.v * w.v);
        (fj.v * ds - pairing) * man.vol_n * volume_density(man, metric, r)
    };
    let bulk = integrate_radial(&integrand, r1, r2, tol)?;
    let f1 = flux_term(man, metric, t, f, r1)?;
    let f2 = flux_term(man, metric, t, f, r2)?;
    Ok(bulk - (f2.flux - f1.flux))
}

/// First variation of the volume-renormalised Hamiltonian at `(g, f)` along
/// `T`: a bulk integral against `(n−1) g − L(f)` with
/// `L(f) = DS*[f] + ½ f (scal + n(n−1)) g`, plus (when the manifold has an
/// inner boundary) the flux through it, normal toward infinity.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct HamiltonianVariation {
    pub bulk: f64,
    pub boundary: f64,
    pub total: f64,
}

pub fn hamiltonian_variation(
    man: &RadialManifold,
    metric: &RadialMetric,
    f: &RadialProfile,
    t: &SymmetricPerturbation,
    tol: f64,
) -> Result<HamiltonianVariation> {
    hamiltonian_variation_at(man, metric, f, t, man.domain_lo(), tol)
}

/// [`hamiltonian_variation`] on the truncated cover `r ≥ r_inner`: the bulk
/// integral starts at `r_inner` and the boundary flux (present only when the
/// manifold has an inner boundary) is taken through the sphere at `r_inner`.
/// Degenerate boundaries — horizons, where multiplier and direction carry
/// `√(r−r₀)` branches — are handled by evaluating on a ladder of inner radii
/// `r₀ + η` and extrapolating `η → 0`.
pub fn hamiltonian_variation_at(
    man: &RadialManifold,
    metric: &RadialMetric,
    f: &RadialProfile,
    t: &SymmetricPerturbation,
    r_inner: f64,
    tol: f64,
) -> Result<HamiltonianVariation> {
    let n = man.n as f64;
    let integrand = |r: f64| {
        let (q, w) = metric.eval(r);
        let (a, b) = t.eval(r);
        let fj = f.eval(r);
        let (arr, atan) = match adjoint_linearised_scalar(man, metric, f, r) {
            Ok(x) => x,
            Err(_) => return f64::NAN,
        };
        let c = match curvature_fields(man, metric, r) {
            Ok(c) => c,
            Err(_) => return f64::NAN,
        };
        let defect = 0.5 * fj.v * (c.scal + n * (n - 1.0));
        let l_rr = arr + defect * q.v;
        let l_tan = atan + defect * w.v;
        let tr = a.v / q.v + (n - 1.0) * b.v / w.v;
        let pairing = a.v * l_rr / (q.v * q.v) + (n - 1.0) * b.v * l_tan / (w.v * w.v);
        ((n - 1.0) * tr - pairing) * man.vol_n * volume_density(man, metric, r)
    };
    let lo = man.domain_lo().max(r_inner);
    let bulk = integrate_radial(&integrand, lo, f64::INFINITY, tol)?;
    let boundary = match man.inner_radius {
        Some(_) => flux_term(man, metric, t, f, lo)?.flux,
        None => 0.0,
    };
    Ok(HamiltonianVariation { bulk, boundary, total: bulk + boundary })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::reference_metric;
    use crate::profile::Decay;

    fn wobbly_metric(k: i32) -> RadialMetric {
        let kf = k as f64;
        RadialMetric::new(
            RadialProfile::closed_form(
                move |r| {
                    let x = Jet2::var(r);
                    ((x * 0.7).exp().recip() * 0.2 + 1.0) / (x * x + kf)
                },
                Decay::Unspecified,
            ),
            RadialProfile::closed_form(
                |r| {
                    let x = Jet2::var(r);
                    x * x * ((x * x * x).recip() * 0.5 + 1.0)
                },
                Decay::Unspecified,
            ),
        )
    }

    fn bump(centre: f64, width: f64, amp: f64) -> RadialProfile {
        RadialProfile::closed_form(
            move |r| {
                let z = (Jet2::var(r).ln() - centre.ln()) / width;
                if z.v.abs() >= 1.0 {
                    return Jet2::zero();
                }
                let u = z * z;
                ((-(Jet2::cst(1.0) - u).recip() + 1.0).exp()) * amp
            },
            Decay::Compact { lo: centre * (-width).exp(), hi: centre * width.exp() },
        )
    }

    fn generic_perturbation() -> SymmetricPerturbation {
        SymmetricPerturbation::new(
            RadialProfile::closed_form(
                |r| {
                    let x = Jet2::var(r);
                    (x * x + 1.0).recip() * (x * 0.3).exp().recip()
                },
                Decay::Unspecified,
            ),
            RadialProfile::closed_form(
                |r| {
                    let x = Jet2::var(r);
                    x * (x * x * 0.1 + 1.0).recip()
                },
                Decay::Unspecified,
            ),
        )
    }

    #[test]
    fn derivative_of_scal_in_the_metric_direction_is_minus_scal() {
        for k in [-1, 0, 1] {
            let man = RadialManifold::new(4, k, None).unwrap();
            let g = wobbly_metric(k);
            let h = SymmetricPerturbation::new(g.q.clone(), g.w.clone());
            for &r in &[1.6, 3.0, 8.0] {
                let ds = linearised_scalar(&man, &g, &h, r).unwrap();
                let c = curvature_fields(&man, &g, r).unwrap();
                assert!(
                    (ds + c.scal).abs() < 1e-9 * (1.0 + c.scal.abs()),
                    "k={k} r={r}: {ds} vs {}",
                    -c.scal
                );
            }
        }
    }

    #[test]
    fn pure_trace_directions_reduce_to_a_schroedinger_operator() {
        // At the reference metric, T = φ ĝ gives
        // DS[φĝ] = (1−n)(Δ̂φ − nφ).
        let man = RadialManifold::new(3, 1, None).unwrap();
        let hat = reference_metric(&man);
        let phi = bump(3.0, 0.8, 1.0);
        let h = SymmetricPerturbation::new(
            hat.q.product(&phi),
            hat.w.product(&phi),
        );
        let n = man.n as f64;
        for &r in &[2.2, 3.0, 4.1] {
            let ds = linearised_scalar(&man, &hat, &h, r).unwrap();
            let lap = scalar_laplacian(&man, &hat, &phi, r);
            let expected = (1.0 - n) * (lap - n * phi.value(r));
            assert!(
                (ds - expected).abs() < 1e-9 * (1.0 + expected.abs()),
                "r={r}: {ds} vs {expected}"
            );
        }
    }

    #[test]
    fn linearised_scalar_matches_finite_differences_at_second_order() {
        let man = RadialManifold::new(3, 1, None).unwrap();
        let g = wobbly_metric(1);
        let h = generic_perturbation();
        for &r in &[1.8, 4.5] {
            let exact = linearised_scalar(&man, &g, &h, r).unwrap();
            let scal_at = |t: f64| {
                curvature_fields(&man, &g.perturbed(&h, t), r).unwrap().scal
            };
            let fd = |t: f64| (scal_at(t) - scal_at(-t)) / (2.0 * t);
            let e1 = (fd(1e-3) - exact).abs();
            let e2 = (fd(5e-4) - exact).abs();
            let order = (e1 / e2).log2();
            assert!(
                order > 1.9,
                "r={r}: convergence order {order} (errors {e1:.3e}, {e2:.3e})"
            );
        }
    }

    #[test]
    fn linearised_mean_curvature_matches_finite_differences() {
        let man = RadialManifold::new(4, 1, None).unwrap();
        let g = wobbly_metric(1);
        let h = generic_perturbation();
        for &r in &[2.0, 5.5] {
            let exact = linearised_mean_curvature(&man, &g, &h, r).unwrap();
            let h_at = |t: f64| {
                crate::geometry::mean_curvature_data(&man, &g.perturbed(&h, t), r)
                    .unwrap()
                    .mean_curvature
            };
            let fd = |t: f64| (h_at(t) - h_at(-t)) / (2.0 * t);
            let e1 = (fd(1e-3) - exact).abs();
            let e2 = (fd(5e-4) - exact).abs();
            assert!((e1 / e2).log2() > 1.9, "order {}", (e1 / e2).log2());
        }
    }

    #[test]
    fn adjoint_trace_identity_with_constraint_defect() {
        // tr_g(DS*[f]) = (1−n)(Δf − nf) − f(scal + n(n−1)).
        let man = RadialManifold::new(5, -1, None).unwrap();
        let g = wobbly_metric(-1);
        let f = RadialProfile::closed_form(
            |r| {
                let x = Jet2::var(r);
                (x * 0.4).exp().recip() + 0.7
            },
            Decay::Unspecified,
        );
        let n = man.n as f64;
        for &r in &[1.5, 2.8, 6.0] {
            let (rr, tan) = adjoint_linearised_scalar(&man, &g, &f, r).unwrap();
            let (q, w) = g.eval(r);
            let tr = rr / q.v + (n - 1.0) * tan / w.v;
            let lap = scalar_laplacian(&man, &g, &f, r);
            let c = curvature_fields(&man, &g, r).unwrap();
            let fv = f.value(r);
            let expected =
                (1.0 - n) * (lap - n * fv) - fv * (c.scal + n * (n - 1.0));
            assert!(
                (tr - expected).abs() < 1e-10 * (1.0 + expected.abs()),
                "r={r}: {tr} vs {expected}"
            );
        }
    }

    #[test]
    fn integration_by_parts_closes_to_quadrature_accuracy() {
        let man = RadialManifold::new(3, 1, None).unwrap();
        let g = wobbly_metric(1);
        let f = RadialProfile::closed_form(
            |r| {
                let x = Jet2::var(r);
                (x * x * 0.05 + 1.0).recip() + 0.3
            },
            Decay::Unspecified,
        );
        let h = generic_perturbation();
        let defect = adjoint_identity_defect(&man, &g, &f, &h, 1.5, 6.0, 1e-12).unwrap();
        assert!(defect.abs() < 1e-8, "defect {defect}");
    }

    #[test]
    fn flux_equals_its_boundary_geometry_form() {
        let man = RadialManifold::new(4, -1, None).unwrap();
        let g = wobbly_metric(-1);
        let f = RadialProfile::closed_form(
            |r| {
                let x = Jet2::var(r);
                x * 0.2 + (x * 0.5).exp().recip()
            },
            Decay::Unspecified,
        );
        let h = generic_perturbation();
        for &r in &[1.4, 2.9, 7.0] {
            let ft = flux_term(&man, &g, &h, &f, r).unwrap();
            assert!(
                (ft.flux - ft.reduced).abs() < 1e-9 * (1.0 + ft.flux.abs()),
                "r={r}: {} vs {}",
                ft.flux,
                ft.reduced
            );
        }
    }

    #[test]
    fn reference_metric_is_a_critical_point_with_unit_multiplier() {
        // At ĝ with f ≡ 1: DS*[1] = −Ric = (n−1)ĝ and the constraint
        // vanishes, so the bulk integrand of the Hamiltonian variation is
        // identically zero for every direction.
        for (n, k) in [(3usize, 1i32), (4, 0), (5, -1)] {
            let man = RadialManifold::new(n, k, None).unwrap();
            let hat = reference_metric(&man);
            let one = RadialProfile::constant(1.0);
            let h = SymmetricPerturbation::new(bump(3.0, 0.7, 0.4), bump(2.5, 0.9, -0.8));
            let var = hamiltonian_variation(&man, &hat, &one, &h, 1e-11).unwrap();
            assert!(
                var.total.abs() < 1e-9,
                "n={n} k={k}: variation {}",
                var.total
            );
        }
    }

    #[test]
    fn inner_boundary_contributes_exactly_the_flux() {
        let man = RadialManifold::new(3, 1, Some(1.2)).unwrap();
        let hat = reference_metric(&man);
        let one = RadialProfile::constant(1.0);
        // Support touches the boundary.
        let h = SymmetricPerturbation::new(bump(1.5, 0.9, 0.3), bump(1.4, 0.8, 0.5));
        let var = hamiltonian_variation(&man, &hat, &one, &h, 1e-11).unwrap();
        let flux = flux_term(&man, &hat, &h, &one, 1.2).unwrap().flux;
        assert!((var.boundary - flux).abs() < 1e-13);
        assert!((var.total - (var.bulk + var.boundary)).abs() < 1e-13);
        // Bulk still vanishes pointwise at the reference with f ≡ 1.
        assert!(var.bulk.abs() < 1e-9, "bulk {}", var.bulk);
    }
}
