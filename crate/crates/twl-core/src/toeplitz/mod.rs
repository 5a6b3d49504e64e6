//! First-order Toeplitz operators `T = Π f^{1/2} D f^{1/2} Π` with
//! `D = (1/i)∂_θ`. On `H(X)_k` these act as `k·P_k M_f P_k`.

mod assembly;
mod symbol;

pub use assembly::{
    assemble_block, exact_monomial_integral, multiplication_matrix, Backend, ToeplitzBlock,
    QUADRATURE_TOLERANCE,
};
pub use symbol::{
    expression_bounds, parse_fiber_expr, parse_symbol, Bidegree, Expr, Polynomial,
    SymbolFunction, Var, BOUND_SAMPLES,
};
