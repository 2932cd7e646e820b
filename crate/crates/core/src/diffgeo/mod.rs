//! Induced geometry of a sampled embedding and the identities it satisfies.

mod audit;
mod bundle;
mod covariant;
mod stencil;

pub use audit::{
    audit_identities, audit_identities_with_halo, identity_fields, IdentityReport,
    IdentityResidual, DEFAULT_HALO, IDENTITIES,
};
pub(crate) use audit::norms;
pub use bundle::{contract, GeometryBundle, Orientation, DEGENERACY_RATIO};
pub(crate) use bundle::inverse;
pub use covariant::{
    cov_div_sym2, cov_div_vector, cov_grad_scalar, div_world, laplace_beltrami, lower, raise,
};
pub use stencil::{gradient, partial, FieldValue};
