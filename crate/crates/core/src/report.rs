//! Side-by-side comparison of every strategy that applies to a code.

use serde::Serialize;

use crate::codes::Code;
use crate::spectral::{self, Method};
use crate::strategy::{self, StrategyKind, VerificationStrategy};
use crate::{Limits, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow {
    pub strategy: String,
    pub settings: usize,
    /// Gap from the spectral engine.
    pub nu: f64,
    /// Gap predicted in closed form for this family.
    pub nu_closed_form: f64,
    pub method: Method,
    pub n_copies: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub code: String,
    pub n: usize,
    pub k: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub rows: Vec<ReportRow>,
}

/// `ν` each family is proven to reach on its own measurement set.
pub fn closed_form_gap(kind: StrategyKind, s: &VerificationStrategy) -> f64 {
    let r = s.code().r() as i32;
    match kind {
        StrategyKind::I => 2f64.powi(r - 1) / (2f64.powi(r) - 1.0),
        StrategyKind::II => 1.0 / r as f64,
        StrategyKind::Coloring => 1.0 / s.settings_count() as f64,
        StrategyKind::CssXz => 0.5,
        StrategyKind::DcXyz => 2.0 / 3.0,
        StrategyKind::Global => 1.0,
    }
}

pub fn build_report(code: &Code, epsilon: f64, delta: f64, limits: &Limits) -> Result<Report> {
    // Validates ε and δ even when no strategy applies.
    spectral::sample_complexity(1.0, epsilon, delta)?;
    let mut rows = Vec::new();
    for kind in strategy::applicable(code, limits) {
        let s = strategy::build(kind, code, limits)?;
        let gap = spectral::spectral_gap(&s, limits)?;
        rows.push(ReportRow {
            strategy: kind.name().into(),
            settings: s.settings_count(),
            nu: gap.gap,
            nu_closed_form: closed_form_gap(kind, &s),
            method: gap.method,
            n_copies: spectral::sample_complexity(gap.gap, epsilon, delta)?.n_copies,
        });
    }
    Ok(Report { code: code.label(), n: code.n(), k: code.k(), epsilon, delta, rows })
}

impl Report {
    /// Aligned plain-text table.
    pub fn to_text(&self) -> String {
        let header = ["strategy", "settings", "nu", "nu_closed_form", "method", "n_copies"];
        let cells: Vec<[String; 6]> = self
            .rows
            .iter()
            .map(|r| {
                [
                    r.strategy.clone(),
                    r.settings.to_string(),
                    format!("{:.6}", r.nu),
                    format!("{:.6}", r.nu_closed_form),
                    r.method.to_string(),
                    r.n_copies.to_string(),
                ]
            })
            .collect();
        let mut widths = header.map(str::len);
        for row in &cells {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.len());
            }
        }
        let line = |row: &[String]| {
            let parts: Vec<String> = row
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(i, (c, w))| if i == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
                .collect();
            parts.join("  ").trim_end().to_string()
        };
        let mut out = format!(
            "code {} (n = {}, k = {}), epsilon = {}, delta = {}\n",
            self.code, self.n, self.k, self.epsilon, self.delta
        );
        out += &line(&header.map(String::from));
        out.push('\n');
        for row in &cells {
            out += &line(row);
            out.push('\n');
        }
        out
    }
}
