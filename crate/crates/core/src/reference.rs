//! Reference Cobb-Douglas results and comparisons against solved output.
//!
//! Three printed tables: the ten-period effort policy on the 0.1 wage grid,
//! the always-evaluated path from `w0 = 0.4`, and the bracketed wage
//! distribution for ten periods.

use serde::Serialize;

use crate::cobb_douglas::PathStep;
use crate::distribution::{bracketize, Bracket, WageDistribution};
use crate::error::Result;

/// Printed optimal effort, rows = previous wage `0, 0.1, …, 1`, columns = periods 1–10.
pub const POLICY_TABLE: [[f64; 10]; 11] = [
    [1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.9, 0.9, 0.6],
    [0.9, 0.9, 0.8, 0.8, 0.8, 0.8, 0.8, 0.7, 0.5, 0.0],
    [0.8, 0.7, 0.7, 0.7, 0.7, 0.7, 0.6, 0.5, 0.3, 0.0],
    [0.7, 0.6, 0.6, 0.6, 0.6, 0.6, 0.5, 0.4, 0.2, 0.0],
    [0.6, 0.6, 0.6, 0.5, 0.5, 0.5, 0.4, 0.3, 0.1, 0.0],
    [0.5, 0.5, 0.5, 0.5, 0.4, 0.4, 0.3, 0.2, 0.1, 0.0],
    [0.4, 0.4, 0.4, 0.4, 0.4, 0.3, 0.3, 0.2, 0.1, 0.0],
    [0.3, 0.3, 0.3, 0.3, 0.3, 0.3, 0.2, 0.2, 0.1, 0.0],
    [0.3, 0.3, 0.3, 0.3, 0.2, 0.2, 0.2, 0.1, 0.1, 0.0],
    [0.2, 0.2, 0.2, 0.2, 0.2, 0.2, 0.1, 0.1, 0.1, 0.0],
    [0.1, 0.2, 0.2, 0.2, 0.2, 0.1, 0.1, 0.1, 0.1, 0.0],
];

/// The cell quoted in the accompanying text: period 5, previous wage 0.4.
pub const QUOTED_CELL: (usize, f64, f64) = (5, 0.4, 0.5);

pub const PATH_EFFORT: [f64; 10] = [0.6, 0.4, 0.6, 0.4, 0.5, 0.4, 0.4, 0.3, 0.2, 0.0];
pub const PATH_WAGE: [f64; 10] = PATH_EFFORT;
/// Printed bonus row; the last period is blank.
pub const PATH_BONUS: [Option<f64>; 10] = [
    Some(0.02),
    Some(0.02),
    Some(-0.02),
    Some(0.02),
    Some(0.01),
    Some(-0.01),
    Some(0.0),
    Some(-0.01),
    Some(-0.01),
    None,
];
pub const PATH_TOTAL: [f64; 10] = [0.62, 0.42, 0.58, 0.42, 0.51, 0.39, 0.4, 0.29, 0.19, 0.0];

/// Printed bracket masses: `(low, high, masses for periods 1–10)`, blank = 0.
pub const BRACKET_TABLE: [(f64, f64, [f64; 10]); 6] = [
    (0.0, 0.1, [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.15]),
    (0.1, 0.2, [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.03, 0.07]),
    (0.2, 0.3, [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.05, 0.09, 0.22, 0.18]),
    (0.3, 0.4, [0.0, 0.0, 0.04, 0.10, 0.16, 0.19, 0.20, 0.30, 0.26, 0.21]),
    (0.4, 0.5, [1.00, 0.80, 0.64, 0.51, 0.51, 0.54, 0.54, 0.44, 0.35, 0.28]),
    (0.5, 0.6, [0.0, 0.20, 0.32, 0.39, 0.33, 0.27, 0.21, 0.17, 0.14, 0.11]),
];

/// Width of the printed wage brackets.
pub const BRACKET_WIDTH: f64 = 0.1;

const CELL_TOL: f64 = 1e-9;

/// One mismatching cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CellDiff {
    pub row: f64,
    pub period: usize,
    pub printed: f64,
    pub computed: f64,
}

/// Cell-by-cell agreement of a solved policy table with the printed one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolicyComparison {
    pub cells: usize,
    pub exact: usize,
    pub within_one_step: usize,
    pub mismatches: Vec<CellDiff>,
    pub quoted_cell: CellDiff,
}

impl PolicyComparison {
    pub fn exact_share(&self) -> f64 {
        self.exact as f64 / self.cells as f64
    }

    pub fn all_within_one_step(&self) -> bool {
        self.exact + self.within_one_step == self.cells
    }

    pub fn quoted_cell_matches(&self) -> bool {
        (self.quoted_cell.printed - self.quoted_cell.computed).abs() < CELL_TOL
    }
}

/// Compares `table[row][t-1]` (rows on the 0.1 wage grid) with the printed policy.
pub fn compare_policy(table: &[Vec<f64>], effort_step: f64) -> PolicyComparison {
    let mut exact = 0;
    let mut within = 0;
    let mut mismatches = Vec::new();
    let mut cells = 0;
    for (r, printed_row) in POLICY_TABLE.iter().enumerate() {
        for (t, &printed) in printed_row.iter().enumerate() {
            let computed = table.get(r).and_then(|row| row.get(t)).copied().unwrap_or(f64::NAN);
            cells += 1;
            let gap = (computed - printed).abs();
            if gap < CELL_TOL {
                exact += 1;
                continue;
            }
            if gap <= effort_step + CELL_TOL {
                within += 1;
            }
            mismatches.push(CellDiff {
                row: r as f64 / 10.0,
                period: t + 1,
                printed,
                computed,
            });
        }
    }
    let (qt, qw, qe) = QUOTED_CELL;
    let qr = (qw * 10.0).round() as usize;
    let quoted_cell = CellDiff {
        row: qw,
        period: qt,
        printed: qe,
        computed: table.get(qr).and_then(|row| row.get(qt - 1)).copied().unwrap_or(f64::NAN),
    };
    PolicyComparison {
        cells,
        exact,
        within_one_step: within,
        mismatches,
        quoted_cell,
    }
}

/// Agreement of an always-evaluated path with the printed one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathComparison {
    pub effort_matches: bool,
    pub wage_matches: bool,
    /// Per period: `|bonus|` equals the printed magnitude (blank printed cells skipped).
    pub bonus_magnitude_matches: Vec<bool>,
    /// Periods where the printed bonus sign differs from `α·(e_t − w_{t−1})`.
    pub bonus_sign_mismatches: Vec<usize>,
    pub computed_effort: Vec<f64>,
    pub computed_bonus: Vec<f64>,
}

impl PathComparison {
    pub fn bonus_magnitudes_match(&self) -> bool {
        self.bonus_magnitude_matches.iter().all(|&b| b)
    }
}

fn same(a: f64, b: f64) -> bool {
    (a - b).abs() < CELL_TOL
}

pub fn compare_path(path: &[PathStep]) -> PathComparison {
    let effort: Vec<f64> = path.iter().map(|s| s.effort).collect();
    let wage: Vec<f64> = path.iter().map(|s| s.wage).collect();
    let bonus: Vec<f64> = path.iter().map(|s| s.bonus).collect();
    let matches = |a: &[f64], b: &[f64]| a.len() == b.len() && a.iter().zip(b).all(|(x, y)| same(*x, *y));
    let mut magnitude = Vec::new();
    let mut signs = Vec::new();
    for (t, printed) in PATH_BONUS.iter().enumerate() {
        let Some(printed) = printed else { continue };
        let computed = bonus.get(t).copied().unwrap_or(f64::NAN);
        magnitude.push(same(printed.abs(), computed.abs()));
        if printed.abs() > CELL_TOL && computed.abs() > CELL_TOL && printed.signum() != computed.signum() {
            signs.push(t + 1);
        }
    }
    PathComparison {
        effort_matches: matches(&effort, &PATH_EFFORT),
        wage_matches: matches(&wage, &PATH_WAGE),
        bonus_magnitude_matches: magnitude,
        bonus_sign_mismatches: signs,
        computed_effort: effort,
        computed_bonus: bonus,
    }
}

/// Computed masses in the printed brackets, `(low, high]` with the zero wage
/// folded into the lowest row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BracketComparison {
    /// `computed[row][t-1]`, rows as in [`BRACKET_TABLE`].
    pub computed: Vec<[f64; 10]>,
    /// Mass outside the printed rows, per period.
    pub unlisted: [f64; 10],
    pub deviations: Vec<CellDiff>,
}

impl BracketComparison {
    /// Every cell of `period` equals the printed value to two decimals.
    pub fn period_exact(&self, period: usize) -> bool {
        !self
            .deviations
            .iter()
            .any(|d| d.period == period && (d.printed - d.computed).abs() > 0.005)
            && self.unlisted[period - 1] < 0.005
    }

    /// Every cell of `period` within `tol` of the printed value.
    pub fn period_within(&self, period: usize, tol: f64) -> bool {
        !self
            .deviations
            .iter()
            .any(|d| d.period == period && (d.printed - d.computed).abs() > tol)
            && self.unlisted[period - 1] <= tol
    }
}

/// Compares the wage distributions at the start of periods 1–10 (`dists[0..10]`)
/// with the printed bracket table.
pub fn compare_brackets(dists: &[WageDistribution]) -> Result<BracketComparison> {
    let mut computed = vec![[0.0; 10]; BRACKET_TABLE.len()];
    let mut unlisted = [0.0; 10];
    for t in 0..10 {
        let hist = bracketize(&dists[t], BRACKET_WIDTH)?;
        for (&bracket, &mass) in &hist.masses {
            let row = match bracket {
                Bracket::Zero => Some(0),
                Bracket::Interval(j) => Some(j as usize).filter(|&j| j < BRACKET_TABLE.len()),
            };
            match row {
                Some(r) => computed[r][t] += mass,
                None => unlisted[t] += mass,
            }
        }
    }
    let mut deviations = Vec::new();
    for (r, (low, _, printed)) in BRACKET_TABLE.iter().enumerate() {
        for t in 0..10 {
            let c = computed[r][t];
            if (c - printed[t]).abs() > CELL_TOL {
                deviations.push(CellDiff {
                    row: *low,
                    period: t + 1,
                    printed: printed[t],
                    computed: c,
                });
            }
        }
    }
    Ok(BracketComparison {
        computed,
        unlisted,
        deviations,
    })
}
