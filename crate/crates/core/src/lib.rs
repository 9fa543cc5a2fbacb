//! Numerical toolkit for the elliptic supersymmetric face model at `gl(1|1)`.
//!
//! - [`elliptic`]: theta function `H`, brackets `[u] = H(λu)`, elliptic-polynomial checks
//! - [`face`]: state vectors, face weights, the Yang-Baxter relation
//! - [`partition`]: boundary data and exact evaluation of `W_{M,N}`
//! - [`closed_form`]: the elliptic Schur-type function `E_{M,N}` and `G_{M,N}`
//! - [`verify`]: genericity sampling and the verification campaign

pub mod closed_form;
pub mod elliptic;
pub mod error;
pub mod face;
pub mod linalg;
pub mod partition;
pub mod verify;

pub use closed_form::{e_determinant, e_perm_sum, f_x, g_closed_form, prefactor_xm, EForm};
pub use elliptic::{relative_residual, BracketEval, Character, EllipticContext};
pub use error::{Error, Result};
pub use face::{a_jk, check_yang_baxter, face_weight, FaceLabel, Hexagon, ModelConstants, StateVector};
pub use partition::{
    decompose_check, evaluate_w_bruteforce, evaluate_w_dp, one_column_w, row_weight, BoundarySpec, LineState,
    ModelParams,
};
