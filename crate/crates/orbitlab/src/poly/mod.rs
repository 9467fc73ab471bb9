//! Polynomial machinery shared by the dynamics modules.
//!
//! Floating-point polynomials carry the map evaluations and Newton
//! systems; exact integer/rational polynomials back the certified root
//! counts and iterate compositions.

pub mod bivar;
pub mod dense;
pub mod dyadic;
pub mod exact;
pub mod roots;
pub mod series;

pub use bivar::BiPoly;
pub use dense::Poly;
pub use dyadic::Dyadic;
pub use exact::{IntPoly, RatPoly};
pub use series::Taylor;
