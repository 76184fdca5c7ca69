//! Named functions as exact [`QZSeries`](crate::series::QZSeries) values.

pub mod appell;
pub mod partial_theta;
pub mod partitions;
pub mod tails;
pub mod theta;

pub use appell::{appell_f_jet, AppellDerivative, AppellJet, AppellTerm};
pub use partial_theta::{partial_theta, partial_theta_derivative_at_zero};
pub use partitions::{crank_rank, CrankOrRank};
pub use tails::{chi12, kontsevich_at_root, sum_of_tails_sides, KontsevichValue, SumOfTailsFit, TailGrading};
pub use theta::{eta_and_d, theta_series, theta_shifted_half, theta_sum_form, theta_vv};
