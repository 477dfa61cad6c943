//! Frequency localisers: the radial profile `Ψ₀`, the directional family
//! `φ_ω`, the cutoff `ρ`, packets `ψ_{ω,σ} = Ψ(σ·)φ_ω` and cap systems.

mod caps;
mod family;
mod profile;

use std::sync::Arc;

pub use caps::{build_caps, planar_cap_count, CapSystem};
pub use family::{
    build_directional_family, eval_rho, fibonacci_sphere, minimum_count, DirectionalFamily,
    DEFAULT_BAND,
};
pub(crate) use family::rho_radial;
pub use profile::{
    build_radial_profile, eta, plateau, smooth_step, taper, AngularProfile, RadialProfile,
};

use crate::aniso::{aniso_norm, Direction};
use crate::error::{invalid, Result};
use crate::grid::{norm, SupportHint, Symbol};

/// `ψ_{ω,σ}(ξ) = Ψ₀(σ|ξ|) φ_ω(ξ)`.
pub fn packet_symbol(
    fam: &Arc<DirectionalFamily>,
    prof: RadialProfile,
    omega: Direction,
    sigma: f64,
) -> Result<Symbol> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return invalid("scale must be positive");
    }
    if omega.dim() != fam.dim() {
        return invalid("direction and family dimensions differ");
    }
    let fam = Arc::clone(fam);
    Ok(Symbol::real(move |xi| {
        let a = prof.psi0(sigma * norm(xi));
        if a == 0.0 {
            0.0
        } else {
            a * fam.phi(&omega, xi)
        }
    })
    .with_support(SupportHint::Annulus {
        inner: 0.5 / sigma,
        outer: 2.0 / sigma,
    }))
}

/// `Ψ_ω(A_{ω,σ}ξ) = Ψ₀(σ|ξ|_ω)`.
pub fn parabolic_profile_symbol(prof: RadialProfile, omega: Direction, sigma: f64) -> Result<Symbol> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return invalid("scale must be positive");
    }
    Ok(Symbol::real(move |xi| prof.psi0(sigma * aniso_norm(&omega, xi))))
}
