//! Convergence tables as CSV and as aligned text.

use std::fmt::Write as _;

use nsfrac_core::verify::ConvergenceRow;

pub const CSV_HEADER: &str = "h_or_dt,err_u,k_u,err_p,k_p";

fn opt(v: Option<f64>) -> String {
    v.map(|k| k.to_string()).unwrap_or_default()
}

/// Full-precision decimals; orders are empty on the first row.
pub fn to_csv(rows: &[ConvergenceRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(out, "{},{},{},{},{}", r.resolution, r.err_u, opt(r.order_u), r.err_p, opt(r.order_p)).unwrap();
    }
    out
}

/// Aligned text table with orders to two decimals.
pub fn to_text(rows: &[ConvergenceRow], resolution_label: &str) -> String {
    let mut out = format!("{resolution_label:>10} {:>10} {:>6} {:>10} {:>6}\n", "E(u)", "k_u", "E(p)", "k_p");
    let k = |v: Option<f64>| v.map(|k| format!("{k:.2}")).unwrap_or_else(|| "-".into());
    for r in rows {
        writeln!(
            out,
            "{:>10.3e} {:>10.2e} {:>6} {:>10.2e} {:>6}",
            r.resolution,
            r.err_u,
            k(r.order_u),
            r.err_p,
            k(r.order_p)
        )
        .unwrap();
    }
    out
}
