//! Desk-scale criticality experiments for the renormalised mass.
//!
//! The central object is the map `t ↦ m_VR(Π(g + t·h))` where `Π` is the
//! constant-scalar-curvature projection of [`crate::yamabe`] and `h` a
//! perturbation direction.  Its derivative at `t = 0` is measured with
//! Richardson-extrapolated central differences; the first-order prediction of
//! the Hamiltonian identity,
//!
//! ```text
//!     d/dt m_VR = ∫ ((n−1) tr h̃ − ⟨h̃, L(f)⟩) dV + Flux(r₀, f, h̃) ,
//! ```
//!
//! is evaluated on the *projected* curve tangent `h̃ = h + δ` (the raw
//! direction plus the first-order conformal response of the projection,
//! itself recovered by differencing the projection's conformal factors).
//! At a metric admitting a static-type potential `f` with `L(f) = (n−1) g`
//! the bulk term vanishes and criticality reduces to the boundary flux; on
//! boundaryless model metrics both sides vanish, which is exactly the
//! critical-point statement the experiments probe.
//!
//! With an inner boundary one genuine subtlety enters.  The projection's
//! Dirichlet condition preserves the induced boundary metric but *not* the
//! mean curvature: the conformal factor's normal derivative at the boundary
//! does not vanish, so the projected curve drifts out of the Bartnik class
//! at first order even when the raw direction preserves the boundary data
//! exactly.  (At a horizon the effect survives the degeneracy: the factor
//! carries a `√(r−r₀)` branch and the mean-curvature drift has a finite
//! nonzero limit.)  That drift carries mass — precisely the boundary flux of
//! the identity above — so the criticality verdict is applied to the
//! measured derivative *after removing the flux of the measured drift*:
//! `|raw − flux| ≤ tol·(1 + |h|)`.  Both the drift and its flux are
//! reported, never hidden.  On horizons, where multiplier and tangent carry
//! `√(r−r₀)` branches, the identity is evaluated on truncated covers
//! `r ≥ r₀ + η` and extrapolated to `η = 0`.
//!
//! Three further experiments build on this:
//!
//! * **boundary criticality** — families preserving the boundary data of an
//!   inner boundary (induced metric and mean curvature, to first order) are
//!   tested for criticality; violating members are rejected with a
//!   diagnostic, and deliberately violating directions are compared against
//!   the reduced boundary expression `∮ (−2f·DH[h̃] − f⟨K,h̃⟩ + tr_Σ h̃ ∂_ν f)`;
//! * **multiplier recovery** — a least-squares fit of a potential `f`
//!   (asymptote `1`) minimising the frame norm of `(n−1)g − L(f)`; a tiny
//!   residual certifies the static-type structure, a large one refutes it;
//! * **mass comparison** — boundary-matched competitors are ranked against a
//!   model exterior; competitors below the model mass are recorded as
//!   findings, not failures.
//!
//! All randomness enters through the seeded families of [`crate::perturb`];
//! family members are evaluated in parallel but aggregated in index order,
//! so every report is reproducible bit for bit regardless of thread count.

use crate::error::{Result, VrError};
use crate::geometry::{
    curvature_fields, mean_curvature_data, RadialManifold, RadialMetric, SymmetricPerturbation,
};
use crate::grid::LogGrid;
use crate::jet::Jet2;
use crate::linearised::{
    adjoint_linearised_scalar, flux_term, hamiltonian_variation, hamiltonian_variation_at,
    linearised_mean_curvature, HamiltonianVariation,
};
use crate::mass::{mass_vr, MassOptions};
use crate::perturb::{check_boundary_preservation, relative_perturbation, sup_frame_norm};
use crate::profile::{Decay, RadialProfile};
use crate::yamabe::yamabe_project_with_report;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

/// Options shared by the criticality experiments.
#[derive(Debug, Clone)]
pub struct CriticalityOptions {
    /// Base step of the central differences (Richardson combines `step` and
    /// `step/2`).
    pub step: f64,
    /// A member is critical when `|raw − flux| ≤ tolerance · (1 + |h|_sup)`,
    /// with `flux` the boundary term of the identity (zero without a
    /// boundary).
    pub tolerance: f64,
    /// Tolerance of the boundary-preservation precondition.
    pub boundary_tol: f64,
    /// Mass-evaluation options used inside the derivative.
    pub mass: MassOptions,
}

impl Default for CriticalityOptions {
    fn default() -> Self {
        CriticalityOptions {
            step: 0.05,
            tolerance: 1e-4,
            boundary_tol: 1e-9,
            mass: MassOptions { tol: 1e-9, ..Default::default() },
        }
    }
}

/// Measured derivative of the projected mass along one direction.
#[derive(Debug, Clone)]
pub struct ProjectedDerivative {
    /// Richardson combination `(4·fine − coarse)/3`.
    pub value: f64,
    /// Central difference with step `step`.
    pub coarse: f64,
    /// Central difference with step `step/2`.
    pub fine: f64,
    pub step: f64,
    /// First-order conformal response `δφ` of the projection, recovered by
    /// differencing `u_t^{4/(n−2)}`; the projected curve tangent is
    /// `h + δφ·g`.
    pub conformal_response: RadialProfile,
    /// Worst constant-curvature residual among the four projected states.
    pub sup_csc_residual: f64,
    /// Most Newton iterations any of the four projections needed.
    pub iterations: usize,
}

/// Derivative of `t ↦ m_VR(Π(g + t·h))` at `t = 0` by Richardson-combined
/// central differences over `±step` and `±step/2`.  The extrapolation
/// exponent of the mass ladder is pinned (default `n+1`, the conformal-tail
/// rate) so that all four mass evaluations share one ladder model.
pub fn projected_mass_derivative(
    man: &RadialManifold,
    g: &RadialMetric,
    h: &SymmetricPerturbation,
    step: f64,
    mass_opts: &MassOptions,
) -> Result<ProjectedDerivative> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(VrError::InvalidConfig(format!(
            "derivative step must be positive and finite, got {step}"
        )));
    }
    let n = man.n as f64;
    // The extrapolation ladder must live beyond the compact support of the
    // perturbation: rungs inside the support carry an O(t) non-power-law
    // contribution that the two-term fit cannot remove, and the central
    // difference reads the leftover as a spurious mass response.
    let support_hi = [&h.h_rr.decay, &h.h_tan.decay]
        .iter()
        .filter_map(|d| match d {
            Decay::Compact { hi, .. } => Some(*hi),
            _ => None,
        })
        .fold(0.0, f64::max);
    let base_start = mass_opts
        .r_start
        .unwrap_or_else(|| 4f64.max(2.0 * (man.domain_lo() + 1.0)));
    let opts = MassOptions {
        r_start: Some(base_start.max(1.3 * support_hi)),
        rate_hint: Some(mass_opts.rate_hint.unwrap_or(n + 1.0)),
        ..mass_opts.clone()
    };
    let conf_exp = 4.0 / (n - 2.0);

    let mut states = Vec::with_capacity(4);
    for t in [step, -step, 0.5 * step, -0.5 * step] {
        let (projected, report) = yamabe_project_with_report(man, &g.perturbed(h, t))?;
        let mass = mass_vr(man, &projected, &opts)?.mass;
        states.push((mass, report));
    }
    let coarse = (states[0].0 - states[1].0) / (2.0 * step);
    let fine = (states[2].0 - states[3].0) / step;

    let factors: Vec<RadialProfile> =
        states.iter().map(|(_, rep)| rep.conformal_factor.clone()).collect();
    let conformal_response = RadialProfile::closed_form(
        move |r| {
            let u = |i: usize| factors[i].eval(r).powf(conf_exp);
            let full = (u(0) - u(1)) * (1.0 / (2.0 * step));
            let half = (u(2) - u(3)) * (1.0 / step);
            (half * 4.0 - full) * (1.0 / 3.0)
        },
        Decay::Unspecified,
    );

    Ok(ProjectedDerivative {
        value: (4.0 * fine - coarse) / 3.0,
        coarse,
        fine,
        step,
        conformal_response,
        sup_csc_residual: states.iter().map(|(_, r)| r.sup_csc_residual).fold(0.0, f64::max),
        iterations: states.iter().map(|(_, r)| r.iterations).max().unwrap_or(0),
    })
}

/// Verdict for one family member.
#[derive(Debug, Clone, Serialize)]
pub enum MemberVerdict {
    Critical,
    NonCritical,
    Rejected { reason: String },
}

/// First-order boundary-data drift along the projected curve, per unit `t`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundaryDrift {
    /// Relative motion of the induced boundary metric.
    pub induced_metric_rate: f64,
    /// Motion of the boundary mean curvature.
    pub mean_curvature_rate: f64,
}

/// One row of a criticality report.
#[derive(Debug, Clone, Serialize)]
pub struct CriticalityRecord {
    pub index: usize,
    /// Measured derivative of the projected mass (absent for rejected
    /// members).
    pub raw: Option<f64>,
    /// Hamiltonian-identity prediction on the projected tangent
    /// (bulk plus boundary flux).
    pub predicted: Option<f64>,
    /// Boundary-flux part of the prediction: the first-order mass response
    /// of the projection's boundary-data drift (zero without a boundary).
    pub boundary_flux: f64,
    /// Worst constant-curvature residual among the projected states of the
    /// difference stencil.
    pub constraint_drift: f64,
    /// Sup of `|h|_ĝ` used to normalise the tolerance.
    pub perturbation_size: f64,
    /// Boundary drift along the projected curve (boundary experiments only).
    pub boundary_drift: Option<BoundaryDrift>,
    pub verdict: MemberVerdict,
}

/// Outcome of a criticality experiment over a perturbation family.
#[derive(Debug, Clone, Serialize)]
pub struct CriticalityReport {
    pub records: Vec<CriticalityRecord>,
    pub tolerance: f64,
    pub step: f64,
    /// Largest measured `|raw|` among accepted members.
    pub max_abs_raw: f64,
    /// Largest `|raw − boundary_flux|` among accepted members: the quantity
    /// the verdict thresholds, after the drift's mass response is removed.
    pub max_abs_corrected: f64,
    /// Largest `|raw − predicted|` among accepted members.
    pub max_abs_defect: f64,
    /// True when every accepted member is critical.
    pub all_critical: bool,
}

/// Inner radii `r₀ + η` used when extrapolating boundary quantities with
/// `√(r−r₀)` branches to the boundary itself.
const ETA_LADDER: [f64; 3] = [1e-3, 2.5e-4, 6.25e-5];

/// Two-stage Richardson combination of `p(η), p(η/4), p(η/16)` removing the
/// `√η` and `η` terms of a boundary-truncation error.
fn eta_extrapolate(p: [f64; 3]) -> f64 {
    let g1 = 2.0 * p[1] - p[0];
    let g2 = 2.0 * p[2] - p[1];
    (4.0 * g2 - g1) / 3.0
}

/// A boundary placed exactly at a root of `1/q` (a minimal horizon), where
/// multiplier potentials and projected tangents carry `√(r−r₀)` branches.
fn boundary_is_horizon(g: &RadialMetric, r0: f64) -> bool {
    let (q, _) = g.eval(r0);
    !(1.0 / q.v > 1e-12)
}

/// Variational-identity prediction for a tangent direction.  At a regular
/// inner boundary the identity is evaluated directly at `r₀`; at a horizon
/// it is evaluated on truncated covers `r ≥ r₀ + η` and extrapolated.
fn identity_prediction(
    man: &RadialManifold,
    g: &RadialMetric,
    f: &RadialProfile,
    tangent: &SymmetricPerturbation,
    tol: f64,
) -> Result<HamiltonianVariation> {
    match man.inner_radius {
        Some(r0) if boundary_is_horizon(g, r0) => {
            let mut bulk = [0.0; 3];
            let mut boundary = [0.0; 3];
            for (i, eta) in ETA_LADDER.iter().enumerate() {
                let p = hamiltonian_variation_at(man, g, f, tangent, r0 + eta, tol)?;
                bulk[i] = p.bulk;
                boundary[i] = p.boundary;
            }
            let (bulk, boundary) = (eta_extrapolate(bulk), eta_extrapolate(boundary));
            Ok(HamiltonianVariation { bulk, boundary, total: bulk + boundary })
        }
        _ => hamiltonian_variation(man, g, f, tangent, tol),
    }
}

/// First-order boundary-data drift of a tangent direction: relative motion
/// of the induced metric and motion of the mean curvature, the latter
/// extrapolated to the boundary when it is a horizon.
fn measure_boundary_drift(
    man: &RadialManifold,
    g: &RadialMetric,
    tangent: &SymmetricPerturbation,
    r0: f64,
) -> Result<BoundaryDrift> {
    let (_, w0) = g.eval(r0);
    let (_, b) = tangent.eval(r0);
    let mean_curvature_rate = if boundary_is_horizon(g, r0) {
        let mut p = [0.0; 3];
        for (i, eta) in ETA_LADDER.iter().enumerate() {
            p[i] = linearised_mean_curvature(man, g, tangent, r0 + eta)?;
        }
        eta_extrapolate(p)
    } else {
        linearised_mean_curvature(man, g, tangent, r0)?
    };
    Ok(BoundaryDrift {
        induced_metric_rate: b.v / w0.v,
        mean_curvature_rate,
    })
}

fn norm_window(man: &RadialManifold) -> (f64, f64) {
    let lo = match man.inner_radius {
        Some(r0) => r0 * 1.0001,
        None => man.r_edge() + 0.1,
    };
    (lo, 1024.0)
}

fn summarise(records: Vec<CriticalityRecord>, opts: &CriticalityOptions) -> CriticalityReport {
    let mut max_abs_raw: f64 = 0.0;
    let mut max_abs_corrected: f64 = 0.0;
    let mut max_abs_defect: f64 = 0.0;
    let mut all_critical = true;
    for rec in &records {
        match rec.verdict {
            MemberVerdict::Rejected { .. } => {}
            _ => {
                let raw = rec.raw.unwrap_or(f64::NAN);
                max_abs_raw = max_abs_raw.max(raw.abs());
                max_abs_corrected = max_abs_corrected.max((raw - rec.boundary_flux).abs());
                if let Some(p) = rec.predicted {
                    max_abs_defect = max_abs_defect.max((raw - p).abs());
                }
                if !matches!(rec.verdict, MemberVerdict::Critical) {
                    all_critical = false;
                }
            }
        }
    }
    CriticalityReport {
        records,
        tolerance: opts.tolerance,
        step: opts.step,
        max_abs_raw,
        max_abs_corrected,
        max_abs_defect,
        all_critical,
    }
}

fn evaluate_member(
    man: &RadialManifold,
    g: &RadialMetric,
    multiplier: &RadialProfile,
    h: &SymmetricPerturbation,
    opts: &CriticalityOptions,
    index: usize,
) -> Result<CriticalityRecord> {
    let wrap = |e: VrError| VrError::Experiment { index, source: Box::new(e) };
    let der = projected_mass_derivative(man, g, h, opts.step, &opts.mass).map_err(wrap)?;
    let tangent = h.lin_comb(
        1.0,
        &relative_perturbation(g, &der.conformal_response, &der.conformal_response),
        1.0,
    );
    let hv = identity_prediction(man, g, multiplier, &tangent, opts.mass.tol).map_err(wrap)?;
    let boundary_drift = match man.inner_radius {
        Some(r0) => Some(measure_boundary_drift(man, g, &tangent, r0).map_err(wrap)?),
        None => None,
    };
    let (lo, hi) = norm_window(man);
    let size = sup_frame_norm(man, h, lo, hi, 240);
    // The drift of the boundary data carries exactly the boundary flux as
    // its first-order mass response; criticality is judged after removing
    // it (for a boundaryless manifold the flux is zero and this is the
    // plain |raw| test).
    let corrected = der.value - hv.boundary;
    let verdict = if corrected.abs() <= opts.tolerance * (1.0 + size) {
        MemberVerdict::Critical
    } else {
        MemberVerdict::NonCritical
    };
    Ok(CriticalityRecord {
        index,
        raw: Some(der.value),
        predicted: Some(hv.total),
        boundary_flux: hv.boundary,
        constraint_drift: der.sup_csc_residual,
        perturbation_size: size,
        boundary_drift,
        verdict,
    })
}

/// Criticality experiment on a boundaryless manifold: measure the projected
/// mass derivative along every family member and compare with the
/// Hamiltonian-identity prediction under the supplied potential.
pub fn test_critical_no_boundary(
    man: &RadialManifold,
    g: &RadialMetric,
    multiplier: &RadialProfile,
    family: &[SymmetricPerturbation],
    opts: &CriticalityOptions,
) -> Result<CriticalityReport> {
    if man.inner_radius.is_some() {
        return Err(VrError::InvalidConfig(
            "manifold has an inner boundary; use the boundary-aware criticality experiment".into(),
        ));
    }
    let records: Vec<Result<CriticalityRecord>> = family
        .par_iter()
        .enumerate()
        .map(|(i, h)| evaluate_member(man, g, multiplier, h, opts, i))
        .collect();
    let records = records.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(summarise(records, opts))
}

/// Criticality experiment on a manifold with inner boundary.  Members that
/// move the boundary data at first order are rejected with a diagnostic (the
/// experiment proceeds without them); accepted members additionally record
/// the boundary drift of the projected curve.
pub fn test_critical_with_boundary(
    man: &RadialManifold,
    g: &RadialMetric,
    multiplier: &RadialProfile,
    family: &[SymmetricPerturbation],
    opts: &CriticalityOptions,
) -> Result<CriticalityReport> {
    if man.inner_radius.is_none() {
        return Err(VrError::InvalidConfig(
            "boundary criticality experiment needs a manifold with inner boundary".into(),
        ));
    }
    let records: Vec<Result<CriticalityRecord>> = family
        .par_iter()
        .enumerate()
        .map(|(i, h)| -> Result<CriticalityRecord> {
            match check_boundary_preservation(man, g, h, opts.boundary_tol) {
                Err(VrError::BartnikViolation(reason)) => {
                    let (lo, hi) = norm_window(man);
                    return Ok(CriticalityRecord {
                        index: i,
                        raw: None,
                        predicted: None,
                        boundary_flux: 0.0,
                        constraint_drift: 0.0,
                        perturbation_size: sup_frame_norm(man, h, lo, hi, 240),
                        boundary_drift: None,
                        verdict: MemberVerdict::Rejected { reason },
                    });
                }
                Err(e) => return Err(VrError::Experiment { index: i, source: Box::new(e) }),
                Ok(_) => {}
            }
            evaluate_member(man, g, multiplier, h, opts, i)
        })
        .collect();
    let records = records.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(summarise(records, opts))
}

/// Comparison of a measured mass derivative against the boundary-geometry
/// form of the flux for a direction that moves the boundary data.
#[derive(Debug, Clone, Serialize)]
pub struct BoundaryFluxComparison {
    /// Measured derivative of the projected mass.
    pub raw: f64,
    /// Reduced boundary expression `∮(−2f·DH − f⟨K,h̃⟩ + tr_Σ h̃ ∂_ν f)` on the
    /// projected tangent.
    pub reduced: f64,
    /// The same boundary term assembled from the integration-by-parts flux.
    pub flux: f64,
    /// Bulk part of the Hamiltonian identity on the projected tangent
    /// (vanishes when the multiplier is static-type for `g`).
    pub bulk: f64,
    /// Contribution of the conformal response alone to the reduced form.
    pub conformal_part: f64,
}

/// Measure the projected mass derivative along a (typically
/// boundary-violating) direction and compare it with the reduced boundary
/// expression of the Hamiltonian identity, evaluated on the projected
/// tangent `h + δφ·g`.
pub fn boundary_flux_comparison(
    man: &RadialManifold,
    g: &RadialMetric,
    multiplier: &RadialProfile,
    h: &SymmetricPerturbation,
    opts: &CriticalityOptions,
) -> Result<BoundaryFluxComparison> {
    let r0 = man.inner_radius.ok_or_else(|| {
        VrError::InvalidConfig("flux comparison needs a manifold with inner boundary".into())
    })?;
    let der = projected_mass_derivative(man, g, h, opts.step, &opts.mass)?;
    let delta = relative_perturbation(g, &der.conformal_response, &der.conformal_response);
    let tangent = h.lin_comb(1.0, &delta, 1.0);
    let reduced_at = |t: &SymmetricPerturbation| -> Result<f64> {
        if boundary_is_horizon(g, r0) {
            let mut p = [0.0; 3];
            for (i, eta) in ETA_LADDER.iter().enumerate() {
                p[i] = flux_term(man, g, t, multiplier, r0 + eta)?.reduced;
            }
            Ok(eta_extrapolate(p))
        } else {
            Ok(flux_term(man, g, t, multiplier, r0)?.reduced)
        }
    };
    let hv = identity_prediction(man, g, multiplier, &tangent, opts.mass.tol)?;
    Ok(BoundaryFluxComparison {
        raw: der.value,
        reduced: reduced_at(&tangent)?,
        flux: hv.boundary,
        bulk: hv.bulk,
        conformal_part: reduced_at(&delta)?,
    })
}

/// Result of the least-squares recovery of a static-type potential.
#[derive(Debug, Clone, Serialize)]
pub struct MultiplierRecovery {
    /// Best-fit potential (asymptote `1`).
    #[serde(skip_serializing)]
    pub potential: RadialProfile,
    /// Coefficients of the bump/tail basis.
    pub coefficients: Vec<f64>,
    /// Sup over the fit window of the frame norm of `(n−1)g − L(f)`.
    pub residual_sup: f64,
    /// Same residual for the trivial potential `f ≡ 1`, for scale.
    pub residual_at_unit: f64,
    /// The constant normalisation of the recovered pair: `λ = n − 1`
    /// corresponds to asymptote `f → 1`.
    pub multiplier_constant: f64,
    /// Fit window in radius.
    pub window: (f64, f64),
}

/// Frame-weighted components of `(n−1)g − L(f)` at `r`, where
/// `L(f) = DS*[f] + ½ f (scal + n(n−1)) g` is the de-densitised adjoint of
/// the constraint linearisation.
fn multiplier_residual_rows(
    man: &RadialManifold,
    g: &RadialMetric,
    f: &RadialProfile,
    r: f64,
) -> Result<(f64, f64)> {
    let n = man.n as f64;
    let k = man.k as f64;
    let (q, w) = g.eval(r);
    let (arr, atan) = adjoint_linearised_scalar(man, g, f, r)?;
    let c = curvature_fields(man, g, r)?;
    let defect = 0.5 * f.value(r) * (c.scal + n * (n - 1.0));
    let t_rr = (n - 1.0) * q.v - (arr + defect * q.v);
    let t_tan = (n - 1.0) * w.v - (atan + defect * w.v);
    Ok(((r * r + k) * t_rr, t_tan / (r * r)))
}

/// Least-squares recovery of a static-type potential: fit
/// `f = 1 + Σ cᵢ Bᵢ` (compact bumps plus two decaying tails) minimising the
/// reference-frame norm of `(n−1)g − L(f)` over a log grid.  A residual at
/// roundoff scale certifies the static-type structure of `(M, g)`; a
/// residual far above it refutes the existence of a bounded potential with
/// asymptote `1`.
pub fn lagrange_multiplier_recovery(
    man: &RadialManifold,
    g: &RadialMetric,
) -> Result<MultiplierRecovery> {
    let n = man.n as f64;
    let lo = match man.inner_radius {
        Some(r0) => r0 + 0.5,
        None => man.r_edge() + 0.3,
    };
    let hi: f64 = 48.0;

    // Basis: log-spaced bumps covering the window, plus two smooth tails
    // that can represent slowly decaying corrections.
    let mut basis: Vec<RadialProfile> = Vec::new();
    let bumps = 16usize;
    let (c_lo, c_hi) = ((lo * 1.4).ln(), (hi * 0.7).ln());
    let spacing = (c_hi - c_lo) / (bumps as f64 - 1.0);
    for i in 0..bumps {
        let centre = (c_lo + spacing * i as f64).exp();
        basis.push(crate::perturb::bump_profile(centre, 1.4 * spacing, 1.0));
    }
    for alpha in [0.5 * n, 0.5 * (n + 2.0)] {
        basis.push(RadialProfile::closed_form(
            move |r| (Jet2::var(r).powi(2) + 1.0).powf(-alpha),
            Decay::Rate(2.0 * alpha),
        ));
    }
    if let Some(r0) = man.inner_radius {
        // Near a degenerate boundary bounded potentials carry a √(r−r₀)
        // branch (the indicial pair of the trace equation is {0, ½}), which
        // no smooth element can represent; span it with decaying √-profiles
        // of several widths.
        for s in [0.5, 1.0, 2.0, 4.0] {
            basis.push(RadialProfile::closed_form(
                move |r| {
                    let x = Jet2::var(r) - r0;
                    x.sqrt() * (x * (-1.0 / s)).exp()
                },
                Decay::Rate(n + 1.0),
            ));
        }
    }

    let grid = LogGrid::new(lo, hi, 16)?;
    let nodes: Vec<f64> = grid.nodes().to_vec();
    let rows = 2 * nodes.len();
    let unit = RadialProfile::constant(1.0);

    let mut a = DMatrix::<f64>::zeros(rows, basis.len());
    let mut b = DVector::<f64>::zeros(rows);
    for (j, r) in nodes.iter().enumerate() {
        let (rr, tan) = multiplier_residual_rows(man, g, &unit, *r)?;
        b[2 * j] = rr;
        b[2 * j + 1] = tan;
        for (i, base) in basis.iter().enumerate() {
            // L is linear in f, so the column is L(Bᵢ) in frame weights:
            // residual(1 + c·Bᵢ) = residual(1) − c·frame(L(Bᵢ)).
            let (rr1, tan1) = multiplier_residual_rows(man, g, base, *r)?;
            let (rr0, tan0) = {
                let zero = RadialProfile::zero();
                multiplier_residual_rows(man, g, &zero, *r)?
            };
            a[(2 * j, i)] = rr0 - rr1;
            a[(2 * j + 1, i)] = tan0 - tan1;
        }
    }

    let svd = a.clone().svd(true, true);
    let coeffs = svd
        .solve(&b, 1e-12)
        .map_err(|e| VrError::LinearSolve(format!("multiplier least squares: {e}")))?;

    let mut potential = unit.clone();
    for (i, base) in basis.iter().enumerate() {
        potential = potential.lin_comb(1.0, base, coeffs[i]);
    }

    let fine = LogGrid::new(lo, hi, 32)?;
    let frame_norm = |f: &RadialProfile| -> Result<f64> {
        let mut sup: f64 = 0.0;
        for &r in fine.nodes() {
            let (rr, tan) = multiplier_residual_rows(man, g, f, r)?;
            sup = sup.max((rr * rr + (n - 1.0) * tan * tan).sqrt());
        }
        Ok(sup)
    };

    Ok(MultiplierRecovery {
        residual_sup: frame_norm(&potential)?,
        residual_at_unit: frame_norm(&unit)?,
        potential,
        coefficients: coeffs.iter().copied().collect(),
        multiplier_constant: n - 1.0,
        window: (lo, hi),
    })
}

/// Options of the mass-comparison experiment.
#[derive(Debug, Clone)]
pub struct ComparisonOptions {
    /// Competitors below `reference_mass − tolerance` become findings.
    pub tolerance: f64,
    /// Boundary matching: relative induced-metric and mean-curvature
    /// mismatch beyond this excludes a competitor.
    pub boundary_match_tol: f64,
    pub mass: MassOptions,
}

impl Default for ComparisonOptions {
    fn default() -> Self {
        ComparisonOptions {
            tolerance: 1e-4,
            boundary_match_tol: 1e-8,
            mass: MassOptions { tol: 1e-9, ..Default::default() },
        }
    }
}

/// Outcome for one competitor metric.
#[derive(Debug, Clone, Serialize)]
pub enum CompetitorOutcome {
    Included {
        mass: f64,
        /// `mass − reference_mass`.
        gap: f64,
        /// Fitted decay rate of the frame deviation.
        decay_rate: f64,
    },
    Excluded {
        reason: String,
    },
}

/// One row of the comparison table.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonRow {
    pub index: usize,
    pub outcome: CompetitorOutcome,
}

/// Mass-comparison table against a model exterior.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonTable {
    pub reference_mass: f64,
    pub rows: Vec<ComparisonRow>,
    pub tolerance: f64,
    /// Competitors whose mass undercuts the reference beyond tolerance.
    pub findings: Vec<String>,
    /// True when no included competitor undercuts the reference.
    pub all_above: bool,
}

/// Rank boundary-matched competitor metrics against a model exterior.
/// Mismatched boundary data (induced metric or mean curvature at `r₀`)
/// excludes a competitor with a diagnostic; included competitors report
/// their mass gap, and masses below `reference − tolerance` are recorded as
/// findings rather than errors.
pub fn mass_comparison(
    man: &RadialManifold,
    reference: &RadialMetric,
    competitors: &[RadialMetric],
    opts: &ComparisonOptions,
) -> Result<ComparisonTable> {
    let r0 = man.inner_radius.ok_or_else(|| {
        VrError::InvalidConfig("mass comparison needs a manifold with inner boundary".into())
    })?;
    let ref_mass = mass_vr(man, reference, &opts.mass)?.mass;
    let ref_boundary = mean_curvature_data(man, reference, r0)?;
    let (_, w_ref) = reference.eval(r0);

    let rows: Vec<Result<ComparisonRow>> = competitors
        .par_iter()
        .enumerate()
        .map(|(i, cand)| -> Result<ComparisonRow> {
            let (_, w_c) = cand.eval(r0);
            let metric_mismatch = (w_c.v / w_ref.v - 1.0).abs();
            if metric_mismatch > opts.boundary_match_tol {
                return Ok(ComparisonRow {
                    index: i,
                    outcome: CompetitorOutcome::Excluded {
                        reason: format!(
                            "induced boundary metric mismatch: |w/w_ref − 1|(r0={r0}) = {metric_mismatch:.3e}"
                        ),
                    },
                });
            }
            let cand_boundary = mean_curvature_data(man, cand, r0)
                .map_err(|e| VrError::Experiment { index: i, source: Box::new(e) })?;
            let h_mismatch = (cand_boundary.mean_curvature - ref_boundary.mean_curvature).abs();
            if h_mismatch > opts.boundary_match_tol.max(1e-10) {
                return Ok(ComparisonRow {
                    index: i,
                    outcome: CompetitorOutcome::Excluded {
                        reason: format!(
                            "boundary mean curvature mismatch: |H − H_ref|(r0={r0}) = {h_mismatch:.3e}"
                        ),
                    },
                });
            }
            let report = mass_vr(man, cand, &opts.mass)
                .map_err(|e| VrError::Experiment { index: i, source: Box::new(e) })?;
            Ok(ComparisonRow {
                index: i,
                outcome: CompetitorOutcome::Included {
                    mass: report.mass,
                    gap: report.mass - ref_mass,
                    decay_rate: report.deviation_decay.rate,
                },
            })
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;

    let mut findings = Vec::new();
    for row in &rows {
        if let CompetitorOutcome::Included { mass, gap, .. } = row.outcome {
            if gap < -opts.tolerance {
                findings.push(format!(
                    "competitor {} has mass {mass:.10} below the reference {ref_mass:.10} by {:.3e}",
                    row.index, -gap
                ));
            }
        }
    }
    Ok(ComparisonTable {
        reference_mass: ref_mass,
        all_above: findings.is_empty(),
        rows,
        tolerance: opts.tolerance,
        findings,
    })
}

/// Seeded boundary-matched competitors: slowly decaying perturbations of the
/// model exterior (rates between `(n+1)/2` and `n`, switched on at the
/// boundary with third-order vanishing), made constant-scalar-curvature by
/// the conformal projection.  The projection's inner Dirichlet condition
/// keeps the induced boundary metric, and a minimal boundary stays minimal.
pub fn seeded_competitors(
    man: &RadialManifold,
    reference: &RadialMetric,
    seed: u64,
    count: usize,
) -> Result<Vec<RadialMetric>> {
    let r0 = man.inner_radius.ok_or_else(|| {
        VrError::InvalidConfig("competitor construction needs a manifold with inner boundary".into())
    })?;
    let n = man.n as f64;
    let opts = crate::perturb::TailFamilyOptions {
        count,
        rate_range: (0.5 * (n + 1.0) + 0.1, n - 0.1),
        amplitude: 0.05,
        switch_on: r0,
    };
    let family = crate::perturb::seeded_tail_family(reference, seed, &opts);
    let metrics: Vec<Result<RadialMetric>> = family
        .par_iter()
        .enumerate()
        .map(|(i, h)| {
            crate::yamabe::yamabe_project(man, &reference.perturbed(h, 1.0))
                .map_err(|e| VrError::Experiment { index: i, source: Box::new(e) })
        })
        .collect();
    metrics.into_iter().collect()
}
