//! Entanglement and genuine-entanglement detection.
//!
//! Detection uses sufficient criteria only; absence is claimed only from an explicit
//! decomposition (block-diagonal splittings, with the Peres–Horodecki theorem at
//! two-qubit leaves).

use std::fmt;

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::TauMinCoords;
use crate::optim::nelder_mead;
use crate::qstate::{bipartitions, partial_trace, ppt_check, DensityMatrix, Ppt};

/// Margin a witness must exceed before it counts as a detection.
pub const WITNESS_TOL: f64 = 1e-10;
/// Largest off-diagonal block entry tolerated by the separability certifiers.
pub const BLOCK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Detected,
    Undetected,
    CertifiedAbsent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionOutcome {
    pub verdict: Verdict,
    pub evidence: String,
}

impl DetectionOutcome {
    pub fn detected(evidence: impl Into<String>) -> Self {
        Self { verdict: Verdict::Detected, evidence: evidence.into() }
    }

    pub fn undetected(evidence: impl Into<String>) -> Self {
        Self { verdict: Verdict::Undetected, evidence: evidence.into() }
    }

    pub fn absent(evidence: impl Into<String>) -> Self {
        Self { verdict: Verdict::CertifiedAbsent, evidence: evidence.into() }
    }

    pub fn is_detected(&self) -> bool {
        self.verdict == Verdict::Detected
    }
}

impl fmt::Display for DetectionOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} ({})", self.verdict, self.evidence)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SValues {
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
}

impl SValues {
    pub fn all_positive(&self) -> bool {
        self.s1 > 0.0 && self.s2 > 0.0 && self.s3 > 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaxPersistency {
    pub pge_max: bool,
    pub pe_max: bool,
}

fn min_max(x: [f64; 4]) -> f64 {
    x[0].abs().min(x[1].abs()) * x[2].abs().max(x[3].abs())
}

/// Sufficient condition for genuine entanglement surviving one loss.
pub fn cond_persist_ge(c: &TauMinCoords) -> bool {
    let x = c.x();
    let [x0, x1, x2, x3] = x;
    let lhs = 2.0 * (x2 * x2 - x3 * x3).abs();
    let rhs = 2.0 * (x2 * x2 + x3 * x3) + (x0 + x1).powi(2) + 2.0 * (x0 * x0 - x1 * x1) - 8.0 * min_max(x);
    lhs > rhs
}

/// Sufficient condition for entanglement surviving one loss. sgn(0) counts as +1.
pub fn cond_persist_e(c: &TauMinCoords) -> bool {
    let x = c.x();
    let [x0, x1, x2, x3] = x;
    let lhs = (x2 * x2 - x3 * x3).abs();
    let sign = if x0 * x1 < 0.0 { -1.0 } else { 1.0 };
    lhs > (x0 * x0 - x1 * x1) + sign * 4.0 * min_max(x)
}

/// Sᵢ > 0 exactly when the two-qubit reduction onto qubits (1, 5−i) is NPT.
pub fn s_values(c: &TauMinCoords) -> SValues {
    let [x0, x1, x2, x3] = c.x();
    let (p01, m01, p23, m23) = (x0 + x1, x0 - x1, x2 + x3, x2 - x3);
    let q = |a: f64, b: f64| 0.25 * (a * a + b * b);
    let s1 = 2.0 * f64::max((-0.5 * p01 * (-x2 + x3)).abs() - q(m01, p23), (0.5 * m01 * p23).abs() - q(p01, m23));
    let s2 = 2.0 * f64::max((0.5 * p01 * p23).abs() - q(m01, m23), (-0.5 * m01 * (-x2 + x3)).abs() - q(p01, p23));
    let s3 = 2.0 * f64::max((0.5 * p23 * m23).abs() - q(m01, p01), (0.5 * p01 * m01).abs() - q(p23, m23));
    SValues { s1, s2, s3 }
}

pub fn cond_max_persistency(c: &TauMinCoords) -> MaxPersistency {
    let s = s_values(c).all_positive();
    MaxPersistency { pge_max: cond_persist_ge(c) && s, pe_max: s }
}

fn sqrt0(v: f64) -> f64 {
    v.max(0.0).sqrt()
}

/// |ρ₁₈| − Σ √(ρⱼⱼρ₉₋ⱼ,₉₋ⱼ); positive means genuinely tripartite entangled.
pub fn ghz_criterion(rho: &DensityMatrix) -> f64 {
    let d = |i: usize| rho.get(i, i).re;
    rho.get(0, 7).norm() - (sqrt0(d(1) * d(6)) + sqrt0(d(2) * d(5)) + sqrt0(d(3) * d(4)))
}

/// Off-diagonal weight in the one-excitation sector against its biseparable bound.
pub fn w_criterion(rho: &DensityMatrix) -> f64 {
    let d = |i: usize| rho.get(i, i).re;
    let lhs = rho.get(1, 2).norm() + rho.get(1, 4).norm() + rho.get(2, 4).norm();
    let rhs = sqrt0(d(0) * d(3)) + sqrt0(d(0) * d(5)) + sqrt0(d(0) * d(6)) + 0.5 * (d(1) + d(2) + d(4));
    lhs - rhs
}

fn criteria_margin(rho: &DensityMatrix) -> (f64, &'static str) {
    let g = ghz_criterion(rho);
    let w = w_criterion(rho);
    if g >= w { (g, "ghz") } else { (w, "w") }
}

fn kron3(u: &[Matrix2<Complex64>; 3]) -> DMatrix<Complex64> {
    let to_d = |m: &Matrix2<Complex64>| DMatrix::from_fn(2, 2, |i, j| m[(i, j)]);
    to_d(&u[0]).kronecker(&to_d(&u[1])).kronecker(&to_d(&u[2]))
}

fn hadamard() -> Matrix2<Complex64> {
    let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    Matrix2::new(s, s, s, -s)
}

fn pauli_x() -> Matrix2<Complex64> {
    let (o, l) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
    Matrix2::new(o, l, l, o)
}

/// Best criterion margin over bit-flip patterns in the computational and Hadamard bases.
pub fn ge_witness_margin(rho: &DensityMatrix) -> (f64, String) {
    let mut best = (f64::NEG_INFINITY, String::new());
    for h in [false, true] {
        for flips in 0..8usize {
            let u: [Matrix2<Complex64>; 3] = std::array::from_fn(|q| {
                let x = if flips & (4 >> q) != 0 { pauli_x() } else { Matrix2::identity() };
                if h { hadamard() * x } else { x }
            });
            let (m, name) = criteria_margin(&rho.conjugate_by(&kron3(&u)));
            if m > best.0 {
                let basis = if h { "hadamard" } else { "computational" };
                best = (m, format!("{name} criterion, flips {flips:03b}, {basis} basis, margin {m:.3e}"));
            }
        }
    }
    best
}

fn su2(p: &[f64]) -> Matrix2<Complex64> {
    let (a, b, c) = (p[0], p[1], p[2]);
    Matrix2::new(
        Complex64::from_polar(a.cos(), b),
        Complex64::from_polar(a.sin(), c),
        -Complex64::from_polar(a.sin(), -c),
        Complex64::from_polar(a.cos(), -b),
    )
}

/// Maximizes the criteria over local unitaries with a seeded Nelder–Mead search.
pub fn ge_witness_lu(rho: &DensityMatrix, restarts: usize, seed: u64) -> (f64, String) {
    let objective = |p: &[f64]| {
        let u = [su2(&p[0..3]), su2(&p[3..6]), su2(&p[6..9])];
        -criteria_margin(&rho.conjugate_by(&kron3(&u))).0
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = f64::NEG_INFINITY;
    for r in 0..restarts {
        let x0: Vec<f64> = if r == 0 {
            vec![0.0; 9]
        } else {
            (0..9).map(|_| rng.random::<f64>() * std::f64::consts::TAU).collect()
        };
        let m = nelder_mead(objective, &x0, 0.4, 1e-13, 3000);
        best = best.max(-m.value);
        if best > WITNESS_TOL {
            break;
        }
    }
    (best, format!("criteria under optimized local unitaries, margin {best:.3e}"))
}

fn rotate_qubit(rho: &DensityMatrix, q: usize, u: &Matrix2<Complex64>) -> DensityMatrix {
    let n = rho.n_qubits();
    let mut full = DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
    for k in 0..n {
        let m = if k == q { u.adjoint() } else { Matrix2::identity() };
        full = full.kronecker(&DMatrix::from_fn(2, 2, |i, j| m[(i, j)]));
    }
    rho.conjugate_by(&full)
}

/// If ρ is block-diagonal with respect to qubit `q` in the computational basis, returns
/// the normalized blocks with their weights.
fn split_on(rho: &DensityMatrix, q: usize) -> Option<Vec<(f64, DensityMatrix)>> {
    let n = rho.n_qubits();
    let b = 1usize << (n - 1 - q);
    let d = rho.dim();
    for i in 0..d {
        for j in 0..d {
            if (i & b) != (j & b) && rho.get(i, j).norm() > BLOCK_TOL {
                return None;
            }
        }
    }
    let rest: Vec<usize> = (0..d).filter(|i| i & b == 0).collect();
    let mut out = Vec::new();
    for bit in [0, b] {
        let m = DMatrix::from_fn(rest.len(), rest.len(), |i, j| rho.get(rest[i] | bit, rest[j] | bit));
        let w: f64 = (0..rest.len()).map(|i| m[(i, i)].re).sum();
        if w > 1e-14 {
            out.push((w, DensityMatrix::from_matrix_unchecked(n - 1, m / Complex64::new(w, 0.0))));
        }
    }
    Some(out)
}

/// Eigenbasis of the qubit's marginal (when nondegenerate) followed by the Pauli bases.
fn candidate_bases(rho: &DensityMatrix, q: usize) -> Vec<(Matrix2<Complex64>, String)> {
    let n = rho.n_qubits();
    let mut out = Vec::new();
    let lost: Vec<usize> = (1..=n).filter(|&k| k != q + 1).collect();
    if let Ok(r) = partial_trace(rho, &lost) {
        let m = r.matrix();
        let m2 = Matrix2::new(m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
        let eig = m2.symmetric_eigen();
        if (eig.eigenvalues[0] - eig.eigenvalues[1]).abs() > 1e-8 {
            out.push((eig.eigenvectors, "marginal eigenbasis".to_string()));
        }
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let c = |re: f64, im: f64| Complex64::new(re, im);
    out.push((Matrix2::identity(), "Z basis".into()));
    out.push((Matrix2::new(c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0)), "X basis".into()));
    out.push((Matrix2::new(c(s, 0.0), c(s, 0.0), c(0.0, s), c(0.0, -s)), "Y basis".into()));
    out
}

fn splittings(rho: &DensityMatrix) -> impl Iterator<Item = (usize, String, Vec<(f64, DensityMatrix)>)> + '_ {
    (0..rho.n_qubits()).flat_map(move |q| {
        candidate_bases(rho, q).into_iter().filter_map(move |(u, name)| {
            split_on(&rotate_qubit(rho, q, &u), q).map(|blocks| (q, name, blocks))
        })
    })
}

/// Explicit fully separable decomposition, if one is found.
pub fn certify_fully_separable(rho: &DensityMatrix) -> Option<String> {
    match rho.n_qubits() {
        1 => return Some("single qubit".into()),
        2 => {
            if let Ok(r) = ppt_check(rho, &[1]) {
                if r.verdict == Ppt::Ppt {
                    return Some("two-qubit PPT (Peres–Horodecki)".into());
                }
            }
            return None;
        }
        _ => {}
    }
    if rho.is_diagonal(BLOCK_TOL) {
        return Some("diagonal in the computational basis".into());
    }
    for (q, name, blocks) in splittings(rho) {
        let inner: Option<Vec<String>> = blocks.iter().map(|(_, b)| certify_fully_separable(b)).collect();
        if let Some(parts) = inner {
            return Some(format!("block-diagonal on qubit {} in {name}; blocks: {}", q + 1, parts.join(" / ")));
        }
    }
    None
}

/// Explicit biseparable decomposition of a three-qubit state, if one is found.
pub fn certify_biseparable_3q(rho: &DensityMatrix) -> Option<String> {
    if rho.n_qubits() != 3 {
        return None;
    }
    if rho.is_diagonal(BLOCK_TOL) {
        return Some("diagonal in the computational basis".into());
    }
    splittings(rho).next().map(|(q, name, _)| format!("qubit {} splits off classically in {name}", q + 1))
}

/// NPT across some cut gives Detected; an explicit product decomposition gives CertifiedAbsent.
pub fn detect_entanglement(rho: &DensityMatrix) -> DetectionOutcome {
    let n = rho.n_qubits();
    if n == 1 {
        return DetectionOutcome::absent("single qubit");
    }
    for cut in bipartitions(n) {
        if let Ok(r) = ppt_check(rho, &cut) {
            if r.verdict == Ppt::Npt {
                return DetectionOutcome::detected(format!(
                    "NPT across {cut:?}, min eigenvalue {:.3e}",
                    r.min_eigenvalue
                ));
            }
        }
    }
    match certify_fully_separable(rho) {
        Some(e) => DetectionOutcome::absent(e),
        None => DetectionOutcome::undetected("PPT across every cut, no decomposition found"),
    }
}

pub fn detect_entanglement_3q(rho: &DensityMatrix) -> Result<DetectionOutcome> {
    if rho.n_qubits() != 3 {
        return Err(Error::DimensionMismatch { expected: 3, found: rho.n_qubits() });
    }
    Ok(detect_entanglement(rho))
}

const LU_RESTARTS: usize = 6;
const LU_SEED: u64 = 0x5eed_3b17;

pub fn detect_ge_3q(rho: &DensityMatrix) -> Result<DetectionOutcome> {
    if rho.n_qubits() != 3 {
        return Err(Error::DimensionMismatch { expected: 3, found: rho.n_qubits() });
    }
    let (m, evidence) = ge_witness_margin(rho);
    if m > WITNESS_TOL {
        return Ok(DetectionOutcome::detected(evidence));
    }
    if let Some(cert) = certify_biseparable_3q(rho) {
        return Ok(DetectionOutcome::absent(cert));
    }
    let (m, evidence) = ge_witness_lu(rho, LU_RESTARTS, LU_SEED);
    if m > WITNESS_TOL {
        return Ok(DetectionOutcome::detected(evidence));
    }
    Ok(DetectionOutcome::undetected(format!("criteria not violated, best margin {m:.3e}")))
}

/// Genuine entanglement for two or three qubits; for two qubits it coincides with entanglement.
pub fn detect_ge(rho: &DensityMatrix) -> Result<DetectionOutcome> {
    match rho.n_qubits() {
        2 => Ok(detect_entanglement(rho)),
        3 => detect_ge_3q(rho),
        n => Err(Error::NoDetector { kind: "GE".into(), arity: n }),
    }
}
