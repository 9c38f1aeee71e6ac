//! Scratch probe: is the projected bump metric secretly the reference in
//! disguise?  Measures the Einstein deficit and the areal-gauge profile.

use vrmass::geometry::{curvature_fields, reference_metric, RadialManifold};
use vrmass::perturb::{bump_profile, relative_perturbation};
use vrmass::profile::RadialProfile;
use vrmass::yamabe::yamabe_project;

fn main() -> anyhow::Result<()> {
    let man = RadialManifold::new(3, 1, None)?;
    let g0 = reference_metric(&man);
    let bumped = g0.perturbed(
        &relative_perturbation(&g0, &bump_profile(3.0, 0.6, 0.15), &RadialProfile::zero()),
        1.0,
    );
    let g = yamabe_project(&man, &bumped)?;

    let deficit = |metric: &vrmass::geometry::RadialMetric, r: f64| -> anyhow::Result<f64> {
        let c = curvature_fields(&man, metric, r)?;
        let (q, w) = metric.eval(r);
        let t_rr = c.ric_rr + 2.0 * q.v;
        let t_tan = c.ric_tan + 2.0 * w.v;
        Ok((((r * r + 1.0) * t_rr).powi(2) + 2.0 * (t_tan / (r * r)).powi(2)).sqrt())
    };

    println!("{:>8} {:>14} {:>14} {:>14}", "r", "deficit(bump)", "deficit(proj)", "scal(proj)+6");
    for r in [1.0f64, 1.8, 2.4, 3.0, 3.6, 4.5, 6.0, 8.0, 12.0] {
        let cp = curvature_fields(&man, &g, r)?;
        println!(
            "{:8.3} {:14.4e} {:14.4e} {:14.4e}",
            r,
            deficit(&bumped, r)?,
            deficit(&g, r)?,
            cp.scal + 6.0
        );
    }

    // Areal-gauge check: V_areal(rho) = rho^2 + 1 - 2m/rho with m ~ 0?
    println!("\n{:>8} {:>12} {:>16} {:>16}", "r", "rho", "V_areal-(1+rho^2)", "implied m");
    for r in [1.0f64, 2.0, 3.0, 4.0, 6.0, 10.0] {
        let (q, w) = g.eval(r);
        let rho = w.v.sqrt();
        let rho_p = w.d1 / (2.0 * rho);
        let v_areal = rho_p * rho_p / q.v;
        let diff = v_areal - (1.0 + rho * rho);
        println!("{:8.3} {:12.6} {:16.6e} {:16.6e}", r, rho, diff, -0.5 * rho * diff);
    }

    // Multiplier recovery on the projected bump: where does the residual live?
    let rec = vrmass::experiments::lagrange_multiplier_recovery(&man, &g)?;
    println!(
        "\nprojected bump: residual_sup {:.3e}  residual_at_unit {:.3e}  window {:?}",
        rec.residual_sup, rec.residual_at_unit, rec.window
    );
    println!("coefficients: {:?}", rec.coefficients);

    let (man_h, g_h, _) = vrmass::vstatic::schwarzschild_ads_exterior(3, 1, 1.0)?;
    let rec_h = vrmass::experiments::lagrange_multiplier_recovery(&man_h, &g_h)?;
    println!(
        "horizon:        residual_sup {:.3e}  residual_at_unit {:.3e}  window {:?}",
        rec_h.residual_sup, rec_h.residual_at_unit, rec_h.window
    );

    // Where does the horizon residual live, and how close is the fit to f*?
    let fstar = vrmass::vstatic::bounded_multiplier(&man_h, 1.0, 1e-12)?;
    let resid = |f: &vrmass::profile::RadialProfile, r: f64| -> anyhow::Result<f64> {
        let (arr, atan) = vrmass::linearised::adjoint_linearised_scalar(&man_h, &g_h, f, r)?;
        let c = curvature_fields(&man_h, &g_h, r)?;
        let (q, w) = g_h.eval(r);
        let defect = 0.5 * f.value(r) * (c.scal + 6.0);
        let t_rr = 2.0 * q.v - (arr + defect * q.v);
        let t_tan = 2.0 * w.v - (atan + defect * w.v);
        let frr = (r * r + 1.0) * t_rr;
        let ftan = t_tan / (r * r);
        Ok((frr * frr + 2.0 * ftan * ftan).sqrt())
    };
    println!("\n{:>9} {:>13} {:>13} {:>13}", "r", "fit resid", "f* resid", "fit-f*");
    for r in [1.05f64, 1.1, 1.2, 1.4, 1.8, 2.5, 3.5, 5.0, 8.0, 16.0, 32.0, 47.0] {
        println!(
            "{:9.3} {:13.4e} {:13.4e} {:13.4e}",
            r,
            resid(&rec_h.potential, r)?,
            resid(&fstar, r)?,
            rec_h.potential.value(r) - fstar.value(r)
        );
    }
    Ok(())
}
