//! Exact nonarchimedean stationary phase.
//!
//! Arithmetic in `Q_p` and `F_p((t))` (odd `p`), truncated power series over
//! the valuation ring, exact cyclotomic values, Schwartz–Bruhat step
//! functions and their Fourier transforms, brute-force evaluation of
//! oscillatory integrals `∫ φ(x) Ψ(λ f(x)) dx`, Morse normal forms, and the
//! closed stationary-phase formula together with certificates checking it.

pub mod charfun;
pub mod cyclotomic;
pub mod error;
pub mod integrate;
pub mod linalg;
pub mod localfield;
pub mod expr;
pub mod morse;
pub mod motivic;
pub mod poly;
pub mod series;
pub mod stationary;

pub use cyclotomic::CycloNum;
pub use error::{Error, Result};
pub use localfield::{FieldConfig, FieldKind, LocalNum};
