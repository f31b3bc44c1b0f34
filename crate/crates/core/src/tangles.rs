//! Pure-state tangles for four qubits.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::PureState;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangleSummary {
    pub tau1: f64,
    pub tau2: f64,
    pub tau4: f64,
    pub per_cut: BTreeMap<String, f64>,
}

/// 2(1 − tr ρ²) for the reduction onto `cut` (1-based labels).
pub fn bipartite_tangle(psi: &PureState, cut: &[usize]) -> Result<f64> {
    let n = psi.n_qubits();
    if cut.is_empty() || cut.len() >= n {
        return Err(Error::InvalidSubset(format!("{cut:?} is not a proper cut of {n} qubits")));
    }
    let rho = psi.reduced(cut)?;
    Ok((2.0 * (1.0 - rho.purity())).max(0.0))
}

fn letters(qs: &[usize]) -> String {
    qs.iter().map(|&q| (b'A' + (q - 1) as u8) as char).collect()
}

fn cut_label(side: &[usize], n: usize) -> String {
    let rest: Vec<usize> = (1..=n).filter(|q| !side.contains(q)).collect();
    format!("{}|{}", letters(side), letters(&rest))
}

pub fn tau_aggregates(psi: &PureState) -> Result<TangleSummary> {
    if psi.n_qubits() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, found: psi.n_qubits() });
    }
    let mut per_cut = BTreeMap::new();
    let mut t1 = 0.0;
    for q in 1..=4 {
        let t = bipartite_tangle(psi, &[q])?;
        per_cut.insert(cut_label(&[q], 4), t);
        t1 += t / 4.0;
    }
    let mut t2 = 0.0;
    for pair in [[1, 2], [1, 3], [1, 4]] {
        let t = bipartite_tangle(psi, &pair)?;
        per_cut.insert(cut_label(&pair, 4), t);
        t2 += t / 3.0;
    }
    Ok(TangleSummary { tau1: t1, tau2: t2, tau4: four_tangle(psi)?, per_cut })
}

/// |⟨ψ|σ_y⊗⁴|ψ*⟩|²
pub fn four_tangle(psi: &PureState) -> Result<f64> {
    if psi.n_qubits() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, found: psi.n_qubits() });
    }
    let a = psi.amplitudes();
    let mut acc = Complex64::new(0.0, 0.0);
    for (j, aj) in a.iter().enumerate() {
        // σ_y|0⟩ = i|1⟩, σ_y|1⟩ = −i|0⟩
        let ones = j.count_ones();
        let phase = Complex64::new(0.0, 1.0).powu(4 - ones) * Complex64::new(0.0, -1.0).powu(ones);
        acc += a[j ^ 0b1111].conj() * aj.conj() * phase;
    }
    Ok(acc.norm_sqr())
}
