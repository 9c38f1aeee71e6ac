//! Structured perturbation families used by the criticality and comparison
//! experiments.
//!
//! A perturbation direction is a symmetric 2-tensor `h = h_rr dr² + h_tan h`.
//! The generators here produce two kinds:
//!
//! * **compactly supported bumps** — each component is a relative bump
//!   `ψ(r)·q` or `ψ(r)·w` with `ψ(r) = A exp(1 − 1/(1−z²))`,
//!   `z = ln(r/centre)/σ`, so `g + t·h` stays a positive metric for
//!   `|t·A| < 1` and all curvature integrals see an unchanged far field;
//! * **power tails** — components decaying like `r^(−rate)` with a smooth
//!   cubic switch that vanishes to second order at a matching radius, used
//!   as slowly decaying competitors in mass-comparison experiments.
//!
//! Families are drawn from a counter-based generator: member `i` of a family
//! with seed `s` uses stream `i` of a ChaCha8 generator seeded with `s`, so
//! the family is reproducible bit-for-bit from `(s, i)` alone and independent
//! of evaluation order or thread count.
//!
//! For manifolds with an inner boundary the experiments must distinguish
//! directions that preserve the boundary data (induced metric and mean
//! curvature, to first order) from those that do not;
//! [`check_boundary_preservation`] measures both quantities and rejects
//! violating directions with a diagnostic.

use crate::error::{Result, VrError};
use crate::geometry::{RadialManifold, RadialMetric, SymmetricPerturbation};
use crate::jet::Jet2;
use crate::linearised::linearised_mean_curvature;
use crate::profile::{Decay, RadialProfile};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Jet of the logarithmic bump `exp(1 − 1/(1−z²))`, `z = ln(r/centre)/σ`.
/// Identically zero for `|z| ≥ 1`; the value at `z = ±(1 − 10⁻⁶)` is already
/// below `10⁻²⁰⁰⁰⁰⁰`, so snapping the guard region to zero is exact in
/// floating point.
fn bump_jet(r: f64, centre: f64, sigma: f64) -> Jet2 {
    let z = (Jet2::var(r).ln() - centre.ln()) * (1.0 / sigma);
    if z.v.abs() >= 0.999_999 {
        return Jet2::cst(0.0);
    }
    let one_minus = -z * z + 1.0;
    (-one_minus.recip() + 1.0).exp()
}

/// Smooth compactly supported bump of height `amp`: zero outside
/// `[centre·e^{−σ}, centre·e^{σ}]` and equal to `amp` at `r = centre`.
pub fn bump_profile(centre: f64, sigma: f64, amp: f64) -> RadialProfile {
    assert!(centre > 0.0 && sigma > 0.0, "bump needs centre > 0 and σ > 0");
    RadialProfile::closed_form(
        move |r| bump_jet(r, centre, sigma) * amp,
        Decay::Compact { lo: centre * (-sigma).exp(), hi: centre * sigma.exp() },
    )
}

/// Power tail `amp · s(r)³ · (c/r)^{rate}` with `c = lo + 1` and the cubic
/// switch `s = (r−lo)/(r−lo+1)`.  The profile vanishes to third order at
/// `r = lo` (so tangential boundary data and its first derivative are
/// untouched when `lo` is the boundary radius) and decays exactly like
/// `r^{−rate}` at infinity.
pub fn power_tail_profile(lo: f64, rate: f64, amp: f64) -> RadialProfile {
    assert!(lo >= 0.0 && rate > 0.0, "tail needs lo ≥ 0 and rate > 0");
    let scale = lo + 1.0;
    RadialProfile::closed_form(
        move |r| {
            if r <= lo {
                return Jet2::cst(0.0);
            }
            let x = Jet2::var(r);
            let s = (x - lo) * (x + (1.0 - lo)).recip();
            let tail = (x * (1.0 / scale)).powf(-rate);
            s * s * s * tail * amp
        },
        Decay::Rate(rate),
    )
}

/// Product `ψ·c` that stays zero wherever `ψ` vanishes identically, even if
/// the coefficient profile has a pole there (a horizon metric has
/// `q = 1/V → ∞` at the boundary, and `0·∞` must not poison the jets).
fn guarded_product(rel: &RadialProfile, coeff: &RadialProfile) -> RadialProfile {
    let decay = rel.decay;
    let (rel, coeff) = (rel.clone(), coeff.clone());
    RadialProfile::closed_form(
        move |r| {
            let p = rel.eval(r);
            if p.v == 0.0 && p.d1 == 0.0 && p.d2 == 0.0 {
                return Jet2::cst(0.0);
            }
            p * coeff.eval(r)
        },
        decay,
    )
}

/// Perturbation whose components are *relative* to the metric:
/// `h_rr = ψ_rr · q`, `h_tan = ψ_tan · w`.  With `sup|ψ| < 1` the whole curve
/// `g + t·h`, `|t| ≤ 1`, consists of positive metrics.
pub fn relative_perturbation(
    g: &RadialMetric,
    rel_rr: &RadialProfile,
    rel_tan: &RadialProfile,
) -> SymmetricPerturbation {
    SymmetricPerturbation::new(guarded_product(rel_rr, &g.q), guarded_product(rel_tan, &g.w))
}

/// Options for a seeded family of compactly supported perturbations.
#[derive(Debug, Clone)]
pub struct FamilyOptions {
    /// Number of members.
    pub count: usize,
    /// Open interval containing every bump support.
    pub support: (f64, f64),
    /// Largest relative amplitude of either component.
    pub amplitude: f64,
    /// Bounds for the log-radial half-width of individual bumps.
    pub sigma: (f64, f64),
}

impl Default for FamilyOptions {
    fn default() -> Self {
        FamilyOptions {
            count: 20,
            support: (0.5, 64.0),
            amplitude: 0.2,
            sigma: (0.35, 0.9),
        }
    }
}

impl FamilyOptions {
    /// Shrink the support so that every member vanishes identically near an
    /// inner boundary at `r0` (and therefore preserves its boundary data).
    pub fn away_from_boundary(mut self, r0: f64) -> Self {
        self.support.0 = self.support.0.max(r0 * 1.05);
        self
    }
}

fn draw_bump(rng: &mut ChaCha8Rng, opts: &FamilyOptions) -> RadialProfile {
    let sigma = rng.random_range(opts.sigma.0..opts.sigma.1);
    let (lo, hi) = (opts.support.0.ln() + sigma, opts.support.1.ln() - sigma);
    assert!(lo < hi, "support too narrow for the requested bump widths");
    let centre = rng.random_range(lo..hi).exp();
    let amp = rng.random_range(-opts.amplitude..opts.amplitude);
    bump_profile(centre, sigma, amp)
}

/// Seeded family of compactly supported perturbation directions relative to
/// `g`.  Member `i` is drawn from stream `i` of a ChaCha8 generator seeded
/// with `seed`, so the family is reproducible and order-independent.
pub fn seeded_compact_family(
    g: &RadialMetric,
    seed: u64,
    opts: &FamilyOptions,
) -> Vec<SymmetricPerturbation> {
    (0..opts.count)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let rel_rr = draw_bump(&mut rng, opts);
            let rel_tan = draw_bump(&mut rng, opts);
            relative_perturbation(g, &rel_rr, &rel_tan)
        })
        .collect()
}

/// Options for a seeded family of power-tail competitors.
#[derive(Debug, Clone)]
pub struct TailFamilyOptions {
    /// Number of members.
    pub count: usize,
    /// Decay rates are drawn uniformly from this interval.
    pub rate_range: (f64, f64),
    /// Largest relative amplitude of either component.
    pub amplitude: f64,
    /// Radius where the tails switch on (vanishing to third order there).
    pub switch_on: f64,
}

impl Default for TailFamilyOptions {
    fn default() -> Self {
        TailFamilyOptions {
            count: 10,
            rate_range: (2.1, 2.9),
            amplitude: 0.05,
            switch_on: 1.0,
        }
    }
}

/// Seeded family of slowly decaying perturbation directions relative to `g`.
/// Both components share one decay rate per member; amplitudes are drawn
/// independently.  Stream separation is as in [`seeded_compact_family`].
pub fn seeded_tail_family(
    g: &RadialMetric,
    seed: u64,
    opts: &TailFamilyOptions,
) -> Vec<SymmetricPerturbation> {
    (0..opts.count)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let rate = rng.random_range(opts.rate_range.0..opts.rate_range.1);
            let amp_rr = rng.random_range(-opts.amplitude..opts.amplitude);
            let amp_tan = rng.random_range(-opts.amplitude..opts.amplitude);
            let rel_rr = power_tail_profile(opts.switch_on, rate, amp_rr);
            let rel_tan = power_tail_profile(opts.switch_on, rate, amp_tan);
            relative_perturbation(g, &rel_rr, &rel_tan)
        })
        .collect()
}

/// Tangential half-bump touching the boundary: `h_tan(r0) = amp·w(r0) ≠ 0`,
/// so the induced boundary metric moves at first order.  Used as an explicit
/// boundary-data-violating direction.
pub fn boundary_tangential_bump(g: &RadialMetric, r0: f64, width: f64, amp: f64) -> SymmetricPerturbation {
    relative_perturbation(g, &RadialProfile::zero(), &bump_profile(r0, width, amp))
}

/// Radial half-bump touching the boundary: `h_tan ≡ 0` (induced metric
/// fixed) but `h_rr(r0) = amp·q(r0) ≠ 0`, which moves the mean curvature of
/// a boundary with `H ≠ 0`.  At an exact horizon (`1/q(r0) = 0`) the mean
/// curvature of every bounded direction is frozen and this direction is
/// boundary-preserving.
pub fn boundary_normal_bump(g: &RadialMetric, r0: f64, width: f64, amp: f64) -> SymmetricPerturbation {
    relative_perturbation(g, &bump_profile(r0, width, amp), &RadialProfile::zero())
}

/// Measured boundary response of a perturbation direction at the inner
/// boundary: relative change of the induced metric and first-order mean
/// curvature rate.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryCheck {
    /// `|h_tan(r0)| / w(r0)` — relative first-order motion of the induced
    /// boundary metric.
    pub relative_tangential: f64,
    /// Linearised mean curvature `DH[h](r0)`.
    pub mean_curvature_rate: f64,
}

/// Verify that `h` preserves the boundary data of `(M, g)` to first order:
/// the induced metric on `r = r0` must be fixed (`h_tan(r0) = 0`) and the
/// mean curvature must not move (`DH[h](r0) = 0`), both within `tol`.
/// Violations are rejected with a diagnostic naming the offending quantity.
pub fn check_boundary_preservation(
    man: &RadialManifold,
    g: &RadialMetric,
    h: &SymmetricPerturbation,
    tol: f64,
) -> Result<BoundaryCheck> {
    let r0 = man.inner_radius.ok_or_else(|| {
        VrError::InvalidConfig("boundary preservation check needs an inner boundary".into())
    })?;
    let (q, w) = g.eval(r0);
    let (_, b) = h.eval(r0);
    // At an exact horizon (`1/q = 0`, minimal boundary) the linearised mean
    // curvature of every relatively bounded direction vanishes like `√(1/q)`,
    // so the condition holds identically; evaluating the formula there would
    // divide `0·∞`.
    let dh = if 1.0 / q.v < 1e-14 {
        0.0
    } else {
        linearised_mean_curvature(man, g, h, r0)?
    };
    let check = BoundaryCheck {
        relative_tangential: (b.v / w.v).abs(),
        mean_curvature_rate: dh,
    };
    if check.relative_tangential > tol {
        return Err(VrError::BartnikViolation(format!(
            "induced boundary metric moves at first order: |h_tan/w|(r0={r0}) = {:.3e} > {tol:.1e}",
            check.relative_tangential
        )));
    }
    if check.mean_curvature_rate.abs() > tol {
        return Err(VrError::BartnikViolation(format!(
            "boundary mean curvature moves at first order: |DH[h]|(r0={r0}) = {:.3e} > {tol:.1e}",
            check.mean_curvature_rate.abs()
        )));
    }
    Ok(check)
}

/// Sup of the reference-frame norm `|h|_ĝ` over a log grid — the size used
/// to normalise criticality tolerances.
pub fn sup_frame_norm(
    man: &RadialManifold,
    h: &SymmetricPerturbation,
    r_lo: f64,
    r_hi: f64,
    samples: usize,
) -> f64 {
    let (a, b) = (r_lo.ln(), r_hi.ln());
    (0..=samples)
        .map(|i| {
            let r = (a + (b - a) * i as f64 / samples as f64).exp();
            h.hat_frame_norm(man, r)
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::estimate_decay_rate;
    use crate::geometry::reference_metric;
    use crate::grid::LogGrid;
    use crate::vstatic::schwarzschild_ads_exterior;

    #[test]
    fn bump_profile_is_supported_and_smooth() {
        let psi = bump_profile(3.0, 0.5, 0.7);
        assert_eq!(psi.value(3.0), 0.7);
        assert_eq!(psi.value(3.0 * (-0.51f64).exp()), 0.0);
        assert_eq!(psi.value(3.0 * (0.51f64).exp()), 0.0);
        // Values just inside the support edge are astronomically small, so
        // the guard snap keeps the profile numerically smooth.
        assert!(psi.value(3.0 * (-0.499f64).exp()).abs() < 1e-100);

        // Exact jets against central differences of the value.
        for &r in &[2.2, 3.0, 3.9] {
            let jet = psi.eval(r);
            let h = 1e-5 * r;
            let d1 = (psi.value(r + h) - psi.value(r - h)) / (2.0 * h);
            let d2 = (psi.value(r + h) - 2.0 * psi.value(r) + psi.value(r - h)) / (h * h);
            assert!((jet.d1 - d1).abs() < 1e-6 * (1.0 + d1.abs()), "d1 at r={r}");
            assert!((jet.d2 - d2).abs() < 1e-4 * (1.0 + d2.abs()), "d2 at r={r}");
        }
    }

    #[test]
    fn seeded_family_is_reproducible_and_stream_separated() {
        let g = reference_metric(&RadialManifold::new(3, 1, None).unwrap());
        let opts = FamilyOptions::default();
        let fam1 = seeded_compact_family(&g, 42, &opts);
        let fam2 = seeded_compact_family(&g, 42, &opts);
        let fam3 = seeded_compact_family(&g, 43, &opts);
        assert_eq!(fam1.len(), 20);
        let radii: Vec<f64> = (0..40).map(|i| 0.6 * 1.13f64.powi(i)).collect();
        for (h1, h2) in fam1.iter().zip(&fam2) {
            for &r in &radii {
                assert_eq!(h1.h_rr.value(r), h2.h_rr.value(r));
                assert_eq!(h1.h_tan.value(r), h2.h_tan.value(r));
            }
        }
        // Different streams and different seeds give different members.
        let differs = |a: &SymmetricPerturbation, b: &SymmetricPerturbation| {
            radii.iter().any(|&r| a.h_rr.value(r) != b.h_rr.value(r))
        };
        assert!(differs(&fam1[0], &fam1[1]));
        assert!(differs(&fam1[0], &fam3[0]));
    }

    #[test]
    fn compact_family_respects_support_and_keeps_metric_positive() {
        let man = RadialManifold::new(4, 0, None).unwrap();
        let g = reference_metric(&man);
        let opts = FamilyOptions { support: (0.8, 32.0), ..Default::default() };
        for h in seeded_compact_family(&g, 7, &opts) {
            assert_eq!(h.h_rr.value(0.79), 0.0);
            assert_eq!(h.h_tan.value(0.79), 0.0);
            assert_eq!(h.h_rr.value(32.1), 0.0);
            assert_eq!(h.h_tan.value(32.1), 0.0);
            let curve = g.perturbed(&h, 1.0);
            for i in 0..200 {
                let r = 0.5 * 1.03f64.powi(i);
                let (q, w) = curve.eval(r);
                assert!(q.v > 0.0 && w.v > 0.0, "positivity lost at r={r}");
            }
        }
    }

    #[test]
    fn boundary_preservation_accepts_interior_bumps_and_rejects_touching_ones() {
        let (man, g, r_h) = schwarzschild_ads_exterior(3, 1, 1.0).unwrap();
        let opts = FamilyOptions {
            support: (2.0, 32.0),
            ..Default::default()
        }
        .away_from_boundary(r_h);
        for h in seeded_compact_family(&g, 11, &opts) {
            let check = check_boundary_preservation(&man, &g, &h, 1e-10).unwrap();
            assert!(check.relative_tangential == 0.0);
            assert!(check.mean_curvature_rate.abs() < 1e-7);
        }

        let touching = boundary_tangential_bump(&g, r_h, 0.4, 0.1);
        let err = check_boundary_preservation(&man, &g, &touching, 1e-10).unwrap_err();
        assert!(matches!(err, VrError::BartnikViolation(_)), "got {err}");
        assert!(err.to_string().contains("induced boundary metric"));

        // At an artificial (non-minimal) boundary a radial half-bump moves
        // the mean curvature even though the induced metric is fixed.
        let man2 = RadialManifold::new(3, 1, Some(2.0)).unwrap();
        let g2 = reference_metric(&man2);
        let normal = boundary_normal_bump(&g2, 2.0, 0.4, 0.1);
        let err2 = check_boundary_preservation(&man2, &g2, &normal, 1e-10).unwrap_err();
        assert!(err2.to_string().contains("mean curvature"), "got {err2}");

        // The same radial direction at the exact horizon is preserving: the
        // minimal boundary freezes the mean curvature of bounded directions.
        let frozen = boundary_normal_bump(&g, r_h, 0.4, 0.1);
        let check = check_boundary_preservation(&man, &g, &frozen, 1e-6).unwrap();
        assert!(check.mean_curvature_rate.abs() < 1e-6);
    }

    #[test]
    fn tail_family_decays_at_the_requested_rates() {
        let man = RadialManifold::new(3, 1, None).unwrap();
        let g = reference_metric(&man);
        let opts = TailFamilyOptions { count: 4, ..Default::default() };
        let fam = seeded_tail_family(&g, 5, &opts);
        let grid = LogGrid::new(20.0, 2000.0, 24).unwrap();
        for (i, h) in fam.iter().enumerate() {
            // Recover the drawn rate the same way the generator drew it.
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            rng.set_stream(i as u64);
            let rate = rng.random_range(opts.rate_range.0..opts.rate_range.1);

            let dev = {
                let man = man.clone();
                let h = h.clone();
                move |r: f64| h.hat_frame_norm(&man, r)
            };
            let fit = estimate_decay_rate(&dev, &grid, (50.0, 1500.0)).unwrap();
            assert!(
                (fit.rate - rate).abs() < 0.1,
                "member {i}: fitted {} vs drawn {rate}",
                fit.rate
            );
            // Third-order vanishing at the switch-on radius.
            assert_eq!(h.h_tan.value(1.0), 0.0);
            assert!(h.h_tan.value(1.001).abs() < 1e-7);
        }
    }
}
