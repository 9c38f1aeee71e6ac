//! Numerical laboratory for radially symmetric asymptotically hyperbolic
//! manifolds.
//!
//! The objects of study are metrics of the form
//!
//! ```text
//!     g = q(r) dr² + w(r) h      on  (r₀, ∞) × N,
//! ```
//!
//! where `(N, h)` is a closed Einstein cross-section with `Ric_h = k(n−2)h`,
//! `k ∈ {−1, 0, +1}`, and `g` approaches the reference metric
//! `ĝ = dr²/(r²+k) + r²h` (scalar curvature `−n(n−1)`) at a weighted rate
//! `τ ∈ ((n−1)/2, n)`.  Everything reduces to radial profiles and integrals
//! against the cross-section volume, so desk-scale experiments run in
//! milliseconds while still exercising the full variational structure:
//!
//! * the volume-renormalised mass `m_VR` (ADM-like flux plus `2(n−1)` times
//!   the renormalised volume), computed both from its defining cutoff limit
//!   and from a regularised Hamiltonian single integral ([`mass`]);
//! * the linearised scalar curvature, its formal adjoint, the flux term that
//!   connects them, and the first variation of the Hamiltonian
//!   ([`linearised`]);
//! * the V-static equation `Dscal*_g(f) = λ g`, exact model solutions on
//!   AdS–Schwarzschild, a radial initial-value solver, and the trace-equation
//!   two-point solver ([`vstatic`]);
//! * conformal projection onto the constant-scalar-curvature constraint set
//!   ([`yamabe`]);
//! * critical-point experiments for `m_VR` on the constraint set, with and
//!   without an inner (Bartnik) boundary, Lagrange-multiplier recovery, and
//!   an exploratory mass-comparison table ([`experiments`]);
//! * the polynomial sign analysis behind the weighted coercivity estimate
//!   ([`coercivity`]).
//!
//! The `examples/` directory is the front door: each example is a runnable
//! reproduction of one capability.  A thin `vrmass` binary drives the same
//! pipelines from a TOML config for batch use.

pub mod analysis;
pub mod coercivity;
pub mod config;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod grid;
pub mod jet;
pub mod linearised;
pub mod mass;
pub mod perturb;
pub mod profile;
pub mod report;
pub mod runner;
pub mod vstatic;
pub mod yamabe;

pub use error::{Result, VrError};
pub use geometry::{RadialManifold, RadialMetric, SymmetricPerturbation};
pub use profile::RadialProfile;
