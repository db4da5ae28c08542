//! The model-versus-distribution game: loss matrices, the exact minimax
//! solver and the repeated randomized (purified) game.

mod dtb;
mod loss;
mod simplex;

pub use dtb::{
    aggregate_strategies, fit_dtb, play_game, run_dtb, split_for, DtbConfig, DtbFit, DtbResult,
    GameConfig, RoundRecord, SupportSpec,
};
pub use loss::{compute_loss_matrix, ErrorFn, LossMatrix};
pub use simplex::{solve_zero_sum, GameSolution, OPTIMALITY_TOL};
