//! Relative modular operators and overlap inequalities for finite-dimensional
//! von Neumann algebras `M = ⊕_k M_{n_k}(C)`.
//!
//! The standard form is realized on Hilbert-Schmidt space: `M` acts by left
//! multiplication, `J ξ = ξ*`, the positive cone is the PSD blocks and a
//! normal functional with density `D` has cone vector `D^{1/2}`. The
//! relative modular operator of `(φ, ψ)` acts as `ξ ↦ D_φ ξ D_ψ^{-1}` on
//! supports, so the central quantity
//!
//! ```text
//! F_s(η, φ) = ‖Δ_{η,φ}^{s/2} ξ_φ‖² = Tr D_η^s D_φ^{1-s}
//! ```
//!
//! is computable both as a superoperator action and as a trace. On top of
//! that the crate verifies
//!
//! * `η(1) - (η-φ)_+(1) <= F_s(η, φ)` and its equality condition,
//! * `φ(1) + η(1) - |φ-η|(1) <= 2 F_s(η, φ)` (Powers-Størmer at `s = 1/2`),
//! * the monotonicity, symmetry, cocycle and continuity properties the
//!   proof relies on,
//!
//! and applies the bound to symmetric quantum hypothesis testing.

pub mod algebra;
pub mod batch;
pub mod chernoff;
pub mod error;
pub mod inequalities;
pub mod numerics;
pub mod oracle;
pub mod rng;
pub mod standard_form;

pub use algebra::{Algebra, BlockOperator, HermitianFunctional, JordanDecomposition, NormalFunctional};
pub use error::{Error, Result};
pub use numerics::{CMatrix, HermitianMatrix, TolerancePolicy};
pub use standard_form::{overlap_f, StandardVector};
