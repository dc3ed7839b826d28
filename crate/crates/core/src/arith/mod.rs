//! Farey arcs, quadratic exponential sums, and counting.

pub mod count;
pub mod expsum;
pub mod farey;
pub mod oscillatory;

pub use count::{count_representations, divisor_count, factorize, is_prime};
pub use expsum::{gauss_sum, kloosterman, salie, IntegralQuadraticForm};
pub use farey::{farey_dissection, farey_subarcs, FareyArc};
