//! The linear Oseen solution operator, per xi2 mode, and its spectral oracle.

pub mod eigen;
pub mod expint;
pub mod kernels;
pub mod oracle;

pub use eigen::{eigen_frequencies, EigenPair};
pub use expint::QuadratureRule;
pub use kernels::{
    apply_d0, apply_d1, apply_tilde_d0, apply_tilde_d0_d3, apply_tilde_d1, apply_tilde_d1_d2,
    assemble_d, assemble_d_hat, assemble_d_unfused, exp_convolution, OseenConfig,
};
pub use oracle::{
    divergence_defect, helmholtz_project_div, interior_relative_error, ode_residual,
    oseen_oracle, pde_residual, pdiv_form_discrepancy, KernelKind,
};
