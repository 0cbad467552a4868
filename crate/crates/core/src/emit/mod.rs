//! Deterministic exports. Equal inputs always produce byte-identical text.

mod csv;
mod dot;
mod svg;

pub use self::csv::{export_matrix_csv, export_report_csv, parse_sums_csv, Ranks, SumsCsvError};
pub use self::dot::export_dot;
pub use self::svg::{render_scatter_svg, PlotLayout};
