//! Subshifts, words, cylinders, the ball/cylinder dictionary and block potentials.
//!
//! The metric is d(x, y) = 2^{-min{i : x_i != y_i}}. Under it the Bowen ball
//! B_n(x, 2^-m) is the cylinder of the first n+m symbols of x and the closed
//! ball is the cylinder of the first n+m-1 symbols.

mod balls;
mod potential;
mod set;
mod subshift;
mod word;

pub use balls::{
    closed_ball_cylinder, closed_ball_len, open_ball_cylinder, open_ball_len, separated_set_size, words_of_length,
};
pub use potential::{birkhoff_sum, f_variation, BlockPotential};
pub(crate) use potential::block_of;
pub use set::{Membership, Piece, SetDescription, SymbolicSet, MAX_PIECES};
pub use subshift::{Resolution, Subshift};
pub(crate) use subshift::strongly_connected as subshift_strongly_connected;
pub use word::{Word, MAX_ALPHABET};
