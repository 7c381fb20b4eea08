use std::fmt::Write as _;

use limtraj::scenarios::CurveTable;

/// Renders a curve table; values carry 17 significant digits so every
/// `f64` reads back exactly.
pub fn render(table: &CurveTable) -> String {
    let mut out = String::new();
    let names: Vec<&str> = table.columns.iter().map(|(n, _)| n.as_str()).collect();
    out.push_str(&names.join(","));
    out.push('\n');
    for row in 0..table.times().len() {
        for (k, (_, values)) in table.columns.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            write!(out, "{:.16e}", values[row]).unwrap();
        }
        out.push('\n');
    }
    out
}
