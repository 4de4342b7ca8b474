//! Curve pullback for rational maps with four marked points: exact Farey
//! arithmetic, the modular lambda cover, the analytic pullback engine and a
//! topological cross-check.

pub mod exact_farey;
pub mod cli;
pub mod cover;
pub mod oracle_topo;
pub mod pullback;
pub mod ratmap;

/// Float rendered with 17 significant digits, the format used in all reports.
pub fn fmt17(x: f64) -> String {
    if x == 0.0 {
        return "0.0000000000000000e0".to_string();
    }
    format!("{:.16e}", x)
}
