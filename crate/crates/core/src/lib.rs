//! Wagner lift of a Riemannian surface metric to its orthonormal frame
//! bundle, with geodesic integrators and surface-of-revolution tools.

pub mod catalog;
pub mod expr;
pub mod geom;
pub mod jet;
pub mod lift;
pub mod numdiff;
pub mod ode;
pub mod oracle;
pub mod quad;
pub mod revolution;
pub mod roots;
