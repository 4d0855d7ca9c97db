// SPDX-License-Identifier: Apache-2.0
//! Shared text formatting for emitted tables.

/// Twelve significant digits in scientific notation.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.11e}")
}

/// One CSV line from already-formatted cells.
pub fn csv_row(cells: &[String]) -> String {
    cells.join(",")
}
