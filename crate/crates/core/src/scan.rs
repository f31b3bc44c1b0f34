//! Grid scans of the τ_min family over (x₀, x₁, x₂).

use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bell::facet4_closed_max;
use crate::entdetect::{cond_max_persistency, cond_persist_e, cond_persist_ge, s_values};
use crate::error::{Error, Result};
use crate::families::TauMinCoords;
use crate::steering::appendix_b_conditions;

pub const CSV_HEADER: &str = "x0,x1,x2,x3,cond1,cond2,s1,s2,s3,pge_max,pe_max,ps_max,facet4_min";
pub const DEFAULT_POINTS: usize = 101;
const RADICAND_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub x: [f64; 4],
    pub cond1: bool,
    pub cond2: bool,
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
    pub pge_max: bool,
    pub pe_max: bool,
    pub ps_max: bool,
    pub facet4_min: f64,
}

impl ScanRow {
    pub fn evaluate(x: [f64; 4]) -> Result<Self> {
        let c = TauMinCoords::normalized(x)?;
        let s = s_values(&c);
        let mp = cond_max_persistency(&c);
        let (b1, b2, b3) = appendix_b_conditions(&c);
        let mut facet4_min = f64::INFINITY;
        for which in 1..=4 {
            facet4_min = facet4_min.min(facet4_closed_max(&c, which)?);
        }
        Ok(Self {
            x,
            cond1: cond_persist_ge(&c),
            cond2: cond_persist_e(&c),
            s1: s.s1,
            s2: s.s2,
            s3: s.s3,
            pge_max: mp.pge_max,
            pe_max: mp.pe_max,
            ps_max: b1 > 0.0 && b2 > 0.0 && b3 > 0.0,
            facet4_min,
        })
    }

    pub fn to_csv(&self) -> String {
        let b = |v: bool| if v { "1" } else { "0" };
        let r = sig9;
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r(self.x[0]),
            r(self.x[1]),
            r(self.x[2]),
            r(self.x[3]),
            b(self.cond1),
            b(self.cond2),
            r(self.s1),
            r(self.s2),
            r(self.s3),
            b(self.pge_max),
            b(self.pe_max),
            b(self.ps_max),
            r(self.facet4_min)
        )
    }
}

/// Nine significant digits, trailing zeros trimmed, negative zero printed as 0.
pub fn sig9(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.8e}");
    let (mant, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: String| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    };
    let out = if (-5..9).contains(&exp) {
        trim(format!("{:.*}", (8 - exp).max(0) as usize, x))
    } else {
        format!("{}e{exp}", trim(mant.to_string()))
    };
    if out.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        "0".to_string()
    } else {
        out
    }
}

/// Evaluates every grid point with a real x₃ = +√(1 − x₀² − x₁² − x₂²), plus the x₃ < 0
/// sheet when `both_signs` is set. Rows come out in lexicographic grid order.
pub fn scan_tau_min(points: usize, range: (f64, f64), both_signs: bool) -> Result<Vec<ScanRow>> {
    let (lo, hi) = range;
    if points < 2 {
        return Err(Error::OutOfRange(format!("need at least 2 grid points per axis, got {points}")));
    }
    if !(lo.is_finite() && hi.is_finite() && -1.0 <= lo && lo <= hi && hi <= 1.0) {
        return Err(Error::OutOfRange(format!("range [{lo}, {hi}] must lie within [-1, 1]")));
    }
    let grid: Vec<f64> = (0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect();
    let rows: Vec<Vec<ScanRow>> = grid
        .par_iter()
        .map(|&x0| -> Result<Vec<ScanRow>> {
            let mut out = Vec::new();
            for &x1 in &grid {
                for &x2 in &grid {
                    let rad = 1.0 - x0 * x0 - x1 * x1 - x2 * x2;
                    if rad < -RADICAND_TOL {
                        continue;
                    }
                    let x3 = rad.max(0.0).sqrt();
                    out.push(ScanRow::evaluate([x0, x1, x2, x3])?);
                    if both_signs && x3 > 0.0 {
                        out.push(ScanRow::evaluate([x0, x1, x2, -x3])?);
                    }
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let rows: Vec<ScanRow> = rows.into_iter().flatten().collect();
    if rows.is_empty() {
        return Err(Error::EmptyRegion);
    }
    Ok(rows)
}

pub fn write_csv<W: Write>(rows: &[ScanRow], mut w: W) -> io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(w, "{}", r.to_csv())?;
    }
    w.flush()
}
