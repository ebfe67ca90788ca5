//! CSV bodies for pressure, spectrum, oracle and comparison tables.
//!
//! Reals use 17 significant digits; missing values are empty cells.
//! Manifest comment lines are prepended by the caller.

use std::fmt::Write as _;

use crate::pressure::PressureEstimate;
use crate::spectrum::{CompareRow, OracleCount, SpectrumPoint};

pub fn real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

pub fn opt(x: Option<f64>) -> String {
    x.map(real).unwrap_or_default()
}

fn names(prefix: &str, d: usize) -> Vec<String> {
    (1..=d).map(|i| format!("{prefix}_{i}")).collect()
}

fn reals(xs: &[f64]) -> Vec<String> {
    xs.iter().copied().map(real).collect()
}

fn push_row(out: &mut String, cells: Vec<String>) {
    let _ = writeln!(out, "{}", cells.join(","));
}

/// Columns `q_1..q_d, n, P_n, lower, upper, cauchy_diag`.
pub fn pressure_csv(d: usize, rows: &[PressureEstimate]) -> String {
    let mut out = String::new();
    let mut head = names("q", d);
    head.extend(["n", "P_n", "lower", "upper", "cauchy_diag"].map(String::from));
    push_row(&mut out, head);
    for r in rows {
        let mut cells = reals(&r.q);
        cells.extend([r.n.to_string(), real(r.value), opt(r.lower), opt(r.upper), opt(r.cauchy)]);
        push_row(&mut out, cells);
    }
    out
}

/// Columns `alpha_1..alpha_d, h, q_1..q_d, status, band`.
pub fn spectrum_csv(d: usize, rows: &[SpectrumPoint]) -> String {
    let mut out = String::new();
    let mut head = names("alpha", d);
    head.push("h".into());
    head.extend(names("q", d));
    head.extend(["status", "band"].map(String::from));
    push_row(&mut out, head);
    for p in rows {
        let mut cells = reals(&p.alpha);
        cells.push(opt(p.h));
        if p.q_star.len() == d {
            cells.extend(reals(&p.q_star));
        } else {
            cells.extend(std::iter::repeat_n(String::new(), d));
        }
        cells.extend([p.status.as_str().to_string(), opt(p.band)]);
        push_row(&mut out, cells);
    }
    out
}

/// Columns `alpha_1..alpha_d, epsilon, n, count, h_count`.
pub fn oracle_csv(d: usize, rows: &[OracleCount]) -> String {
    let mut out = String::new();
    let mut head = names("alpha", d);
    head.extend(["epsilon", "n", "count", "h_count"].map(String::from));
    push_row(&mut out, head);
    for r in rows {
        let mut cells = reals(&r.alpha);
        cells.extend([real(r.epsilon), r.n.to_string(), r.count.to_string(), real(r.h_count)]);
        push_row(&mut out, cells);
    }
    out
}

/// The oracle columns joined with the Legendre side and both verdict
/// inputs.
pub fn compare_csv(d: usize, rows: &[CompareRow]) -> String {
    let mut out = String::new();
    let mut head = names("alpha", d);
    head.extend(
        ["epsilon", "n", "count", "h_count", "h_legendre", "status", "gap", "slack", "verdict_a"].map(String::from),
    );
    push_row(&mut out, head);
    for r in rows {
        let mut cells = reals(&r.alpha);
        cells.extend([
            real(r.epsilon),
            r.n.to_string(),
            r.count.to_string(),
            real(r.h_count),
            opt(r.h_legendre),
            r.status.as_str().to_string(),
            opt(r.gap),
            real(r.slack),
            if r.verdict_a { "pass" } else { "fail" }.to_string(),
        ]);
        push_row(&mut out, cells);
    }
    out
}
