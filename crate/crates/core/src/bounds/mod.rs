//! Analytic gadgets: the polynomial `g_L`, Markov-brothers checks and a
//! compactly supported bump with fast Fourier decay.

mod bump;
mod gfun;
mod markov;

pub use bump::{bump_fourier, bump_table, BumpProfile, BumpRow, FourierValue, PeriodizedRecord};
pub use gfun::{g_derivative_bound_check, g_eval, g_inverse_eval, GBoundRecord, INVERSE_CONSTANT};
pub use markov::{
    epsilon_net_check, markov_bound_factor, markov_check, poly_derivative, poly_eval, sup_abs, EpsilonNetRecord,
    MarkovRecord,
};
