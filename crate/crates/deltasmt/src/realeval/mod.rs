//! Computable-analysis kernel: dyadic interval arithmetic with rigorous
//! transcendental enclosures, names of reals, oracle-machine emulation and
//! moduli of continuity.

pub mod functions;
pub mod interval;
pub mod machine;
pub mod modulus;
pub mod names;

pub use interval::{DomainErr, DyadicInterval};
pub use machine::{eval_machine, eval_term_box, eval_term_interval, EvalError, EvalResult};
pub use modulus::{derivative, p_of_delta, uniform_modulus, DeltaError, Modulus, ModulusError};
pub use names::{approx, cauchy_to_xi, xi_name_of, Name, XiName};
