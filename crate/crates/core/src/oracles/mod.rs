//! Independent exact references: optimum Steiner trees, LP values for the cut
//! relaxations, brute-force drops, LP export, random laminar duals.

pub mod brute;
pub mod dw;
pub mod lp;
pub mod maxflow;
pub mod simplex;

pub use brute::{brute_drop, random_laminar_dual};
pub use dw::{dreyfus_wagner, dreyfus_wagner_capped, SteinerTable};
pub use lp::{export_lp, lp_value, solve_lp_text, LpSpec, LpStats, Method, Relaxation};
