//! Dense pure and mixed states on a handful of qubits.
//!
//! Basis index `i` is read big-endian: qubit 1 is the most significant bit.
//! Public functions take 1-based qubit labels.

use nalgebra::{DMatrix, Matrix2, Matrix3, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::behavior::{Behavior, Scenario};
use crate::error::{Error, Result};

pub const STATE_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-9;
pub const NPT_TOL: f64 = 1e-10;
pub const MAX_QUBITS: usize = 6;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn check_arity(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::DimensionMismatch { expected: 1, found: 0 });
    }
    if n > MAX_QUBITS {
        return Err(Error::TooManyQubits(n));
    }
    Ok(())
}

/// Validates a list of 1-based qubit labels and returns them 0-based.
pub(crate) fn zero_based(labels: &[usize], n: usize) -> Result<Vec<usize>> {
    let mut out = Vec::with_capacity(labels.len());
    for &q in labels {
        if q == 0 || q > n {
            return Err(Error::QubitIndex { index: q, n });
        }
        if out.contains(&(q - 1)) {
            return Err(Error::DuplicateQubit(q));
        }
        out.push(q - 1);
    }
    Ok(out)
}

#[inline]
fn bit(n: usize, q: usize) -> usize {
    1 << (n - 1 - q)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl PureState {
    pub fn new(n_qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        check_arity(n_qubits)?;
        let dim = 1 << n_qubits;
        if amplitudes.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: amplitudes.len() });
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { n_qubits, amplitudes })
    }

    /// Rescales to unit norm first. Fails only on the zero vector.
    pub fn normalized(n_qubits: usize, mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-300 || !norm.is_finite() {
            return Err(Error::NotNormalized(norm));
        }
        for a in &mut amplitudes {
            *a /= norm;
        }
        Self::new(n_qubits, amplitudes)
    }

    pub fn from_real(n_qubits: usize, amplitudes: &[f64]) -> Result<Self> {
        Self::new(n_qubits, amplitudes.iter().map(|&a| Complex64::new(a, 0.0)).collect())
    }

    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        check_arity(n_qubits)?;
        let dim = 1 << n_qubits;
        if index >= dim {
            return Err(Error::OutOfRange(format!("basis index {index} >= {dim}")));
        }
        let mut amps = vec![ZERO; dim];
        amps[index] = ONE;
        Ok(Self { n_qubits, amplitudes: amps })
    }

    /// Tensor product of single-qubit kets, given as `(alpha, beta)` pairs.
    pub fn product(kets: &[[Complex64; 2]]) -> Result<Self> {
        check_arity(kets.len())?;
        let mut amps = vec![ONE];
        for k in kets {
            let mut next = Vec::with_capacity(amps.len() * 2);
            for a in &amps {
                next.push(a * k[0]);
                next.push(a * k[1]);
            }
            amps = next;
        }
        Self::normalized(kets.len(), amps)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Complex conjugate in the computational basis.
    pub fn conj(&self) -> Self {
        Self {
            n_qubits: self.n_qubits,
            amplitudes: self.amplitudes.iter().map(|a| a.conj()).collect(),
        }
    }

    /// ⟨self|other⟩
    pub fn inner(&self, other: &PureState) -> Result<Complex64> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::DimensionMismatch { expected: self.n_qubits, found: other.n_qubits });
        }
        Ok(self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn density(&self) -> DensityMatrix {
        let d = self.amplitudes.len();
        let m = DMatrix::from_fn(d, d, |i, j| self.amplitudes[i] * self.amplitudes[j].conj());
        DensityMatrix { n_qubits: self.n_qubits, entries: m }
    }

    /// Reduced state on `keep` (1-based labels, any order), returned in ascending qubit order.
    pub fn reduced(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let keep0 = zero_based(keep, self.n_qubits)?;
        let lost: Vec<usize> =
            (1..=self.n_qubits).filter(|q| !keep0.contains(&(q - 1))).collect();
        if lost.is_empty() {
            return Ok(self.density());
        }
        partial_trace_pure(self, &lost)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    entries: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn new(n_qubits: usize, entries: DMatrix<Complex64>) -> Result<Self> {
        check_arity(n_qubits)?;
        let dim = 1 << n_qubits;
        if entries.nrows() != dim || entries.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: entries.nrows() });
        }
        let mut herm = 0.0f64;
        for i in 0..dim {
            for j in i..dim {
                herm = herm.max((entries[(i, j)] - entries[(j, i)].conj()).norm());
            }
        }
        if herm > STATE_TOL {
            return Err(Error::NotHermitian(herm));
        }
        let tr: f64 = (0..dim).map(|i| entries[(i, i)].re).sum();
        if (tr - 1.0).abs() > STATE_TOL {
            return Err(Error::NotNormalized(tr));
        }
        let rho = Self { n_qubits, entries };
        let min = rho.min_eigenvalue();
        if min < -PSD_TOL {
            return Err(Error::NotPositive(min));
        }
        Ok(rho)
    }

    pub(crate) fn from_matrix_unchecked(n_qubits: usize, entries: DMatrix<Complex64>) -> Self {
        Self { n_qubits, entries }
    }

    pub fn from_pure(psi: &PureState) -> Self {
        psi.density()
    }

    pub fn maximally_mixed(n_qubits: usize) -> Result<Self> {
        check_arity(n_qubits)?;
        let d = 1 << n_qubits;
        Ok(Self {
            n_qubits,
            entries: DMatrix::identity(d, d) * Complex64::new(1.0 / d as f64, 0.0),
        })
    }

    /// Diagonal state with the given basis weights.
    pub fn diagonal(n_qubits: usize, weights: &[f64]) -> Result<Self> {
        check_arity(n_qubits)?;
        let d = 1 << n_qubits;
        if weights.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: weights.len() });
        }
        let m = DMatrix::from_fn(d, d, |i, j| if i == j { Complex64::new(weights[i], 0.0) } else { ZERO });
        Self::new(n_qubits, m)
    }

    /// Convex combination Σ wᵢ ρᵢ. Weights must be nonnegative and sum to 1.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let first = parts.first().ok_or_else(|| Error::Constraint("empty mixture".into()))?;
        let n = first.1.n_qubits;
        let d = 1 << n;
        let mut m = DMatrix::zeros(d, d);
        for (w, r) in parts {
            if r.n_qubits != n {
                return Err(Error::DimensionMismatch { expected: n, found: r.n_qubits });
            }
            if *w < 0.0 {
                return Err(Error::Constraint(format!("negative weight {w}")));
            }
            m += &r.entries * Complex64::new(*w, 0.0);
        }
        Self::new(n, m)
    }

    /// ρ₁ ⊗ ρ₂ ⊗ …
    pub fn tensor(parts: &[&DensityMatrix]) -> Result<Self> {
        let n: usize = parts.iter().map(|r| r.n_qubits).sum();
        check_arity(n)?;
        let mut m = DMatrix::from_element(1, 1, ONE);
        for r in parts {
            m = m.kronecker(&r.entries);
        }
        Ok(Self { n_qubits: n, entries: m })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.entries[(i, i)].re).sum()
    }

    /// tr ρ², as the squared Frobenius norm.
    pub fn purity(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.entries.clone().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        if self.dim() != other.dim() {
            return f64::INFINITY;
        }
        self.entries.iter().zip(other.entries.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        let d = self.dim();
        (0..d).all(|i| (0..d).all(|j| i == j || self.entries[(i, j)].norm() <= tol))
    }

    /// Reorders tensor factors: qubit at new position `k` is old qubit `order[k]` (1-based).
    pub fn permute(&self, order: &[usize]) -> Result<Self> {
        let n = self.n_qubits;
        if order.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: order.len() });
        }
        let ord = zero_based(order, n)?;
        let d = self.dim();
        let map: Vec<usize> = (0..d)
            .map(|new| {
                let mut old = 0;
                for (k, &q) in ord.iter().enumerate() {
                    if new & bit(n, k) != 0 {
                        old |= bit(n, q);
                    }
                }
                old
            })
            .collect();
        let m = DMatrix::from_fn(d, d, |i, j| self.entries[(map[i], map[j])]);
        Ok(Self { n_qubits: n, entries: m })
    }

    /// True when every transposition of two qubits leaves ρ unchanged within `tol`.
    pub fn is_permutation_symmetric(&self, tol: f64) -> bool {
        let n = self.n_qubits;
        (1..n).all(|k| {
            let mut order: Vec<usize> = (1..=n).collect();
            order.swap(0, k);
            self.permute(&order).map(|p| p.max_abs_diff(self) <= tol).unwrap_or(false)
        })
    }

    /// U ρ U† without revalidation.
    pub(crate) fn conjugate_by(&self, u: &DMatrix<Complex64>) -> Self {
        Self { n_qubits: self.n_qubits, entries: u * &self.entries * u.adjoint() }
    }
}

fn index_maps(n: usize, keep: &[usize], lost: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let spread = |qs: &[usize]| -> Vec<usize> {
        let k = qs.len();
        (0..1usize << k)
            .map(|i| {
                let mut full = 0;
                for (pos, &q) in qs.iter().enumerate() {
                    if i & (1 << (k - 1 - pos)) != 0 {
                        full |= bit(n, q);
                    }
                }
                full
            })
            .collect()
    };
    (spread(keep), spread(lost))
}

fn loss_split(n: usize, lost: &[usize]) -> Result<(Vec<usize>, Vec<usize>)> {
    let lost0 = zero_based(lost, n)?;
    if lost0.len() >= n {
        return Err(Error::AllQubitsLost(n));
    }
    let keep0: Vec<usize> = (0..n).filter(|q| !lost0.contains(q)).collect();
    Ok((keep0, lost0))
}

/// Traces out the qubits in `lost` (1-based). Retained qubits keep their relative order.
pub fn partial_trace(rho: &DensityMatrix, lost: &[usize]) -> Result<DensityMatrix> {
    let n = rho.n_qubits;
    let (keep0, lost0) = loss_split(n, lost)?;
    let (kmap, lmap) = index_maps(n, &keep0, &lost0);
    let m = DMatrix::from_fn(kmap.len(), kmap.len(), |i, j| {
        lmap.iter().map(|&l| rho.entries[(kmap[i] | l, kmap[j] | l)]).sum()
    });
    Ok(DensityMatrix { n_qubits: keep0.len(), entries: m })
}

fn partial_trace_pure(psi: &PureState, lost: &[usize]) -> Result<DensityMatrix> {
    let n = psi.n_qubits;
    let (keep0, lost0) = loss_split(n, lost)?;
    let (kmap, lmap) = index_maps(n, &keep0, &lost0);
    let a = &psi.amplitudes;
    let m = DMatrix::from_fn(kmap.len(), kmap.len(), |i, j| {
        lmap.iter().map(|&l| a[kmap[i] | l] * a[kmap[j] | l].conj()).sum()
    });
    Ok(DensityMatrix { n_qubits: keep0.len(), entries: m })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct QubitObservable {
    bloch: [f64; 3],
}

impl TryFrom<[f64; 3]> for QubitObservable {
    type Error = Error;
    fn try_from(v: [f64; 3]) -> Result<Self> {
        Self::new(v)
    }
}

impl From<QubitObservable> for [f64; 3] {
    fn from(o: QubitObservable) -> Self {
        o.bloch
    }
}

impl QubitObservable {
    pub fn new(bloch: [f64; 3]) -> Result<Self> {
        let norm = (bloch[0] * bloch[0] + bloch[1] * bloch[1] + bloch[2] * bloch[2]).sqrt();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::NotUnitVector(norm));
        }
        Ok(Self { bloch })
    }

    /// Normalizes `v`; fails on the zero vector.
    pub fn along(v: [f64; 3]) -> Result<Self> {
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if norm < 1e-300 || !norm.is_finite() {
            return Err(Error::NotUnitVector(norm));
        }
        Ok(Self { bloch: [v[0] / norm, v[1] / norm, v[2] / norm] })
    }

    pub fn from_vector(v: &Vector3<f64>) -> Result<Self> {
        Self::along([v[0], v[1], v[2]])
    }

    pub fn x() -> Self {
        Self { bloch: [1.0, 0.0, 0.0] }
    }

    pub fn y() -> Self {
        Self { bloch: [0.0, 1.0, 0.0] }
    }

    pub fn z() -> Self {
        Self { bloch: [0.0, 0.0, 1.0] }
    }

    pub fn bloch(&self) -> [f64; 3] {
        self.bloch
    }

    pub fn vector(&self) -> Vector3<f64> {
        Vector3::new(self.bloch[0], self.bloch[1], self.bloch[2])
    }

    pub fn neg(&self) -> Self {
        Self { bloch: [-self.bloch[0], -self.bloch[1], -self.bloch[2]] }
    }

    pub fn matrix(&self) -> Matrix2<Complex64> {
        let [x, y, z] = self.bloch;
        Matrix2::new(
            Complex64::new(z, 0.0),
            Complex64::new(x, -y),
            Complex64::new(x, y),
            Complex64::new(-z, 0.0),
        )
    }

    /// Contraction weights against the Pauli index (I, X, Y, Z).
    pub(crate) fn weights(&self, outcome_sign: f64, with_identity: bool) -> [f64; 4] {
        let [x, y, z] = self.bloch;
        let s = outcome_sign;
        [if with_identity { 1.0 } else { 0.0 }, s * x, s * y, s * z]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementBattery {
    parties: Vec<Vec<QubitObservable>>,
}

impl MeasurementBattery {
    pub fn new(parties: Vec<Vec<QubitObservable>>) -> Result<Self> {
        if parties.is_empty() {
            return Err(Error::InvalidBehavior("battery has no parties".into()));
        }
        if let Some(p) = parties.iter().position(|s| s.is_empty()) {
            return Err(Error::InvalidBehavior(format!("party {} has no settings", p + 1)));
        }
        Ok(Self { parties })
    }

    pub fn n_parties(&self) -> usize {
        self.parties.len()
    }

    pub fn settings(&self, party: usize) -> &[QubitObservable] {
        &self.parties[party]
    }

    pub fn parties(&self) -> &[Vec<QubitObservable>] {
        &self.parties
    }

    /// Common number of settings, if every party has the same count.
    pub fn uniform_settings(&self) -> Option<usize> {
        let s = self.parties[0].len();
        self.parties.iter().all(|p| p.len() == s).then_some(s)
    }

    /// Same battery with parties reordered: new party `k` is old party `order[k]` (0-based).
    pub fn reorder(&self, order: &[usize]) -> Self {
        Self { parties: order.iter().map(|&k| self.parties[k].clone()).collect() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalFilter {
    ops: Vec<Matrix2<Complex64>>,
}

/// Largest singular value of a 2×2 complex matrix.
pub(crate) fn spectral_norm2(m: &Matrix2<Complex64>) -> f64 {
    let h = m.adjoint() * m;
    let tr = h[(0, 0)].re + h[(1, 1)].re;
    let det = (h[(0, 0)] * h[(1, 1)] - h[(0, 1)] * h[(1, 0)]).re;
    let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
    ((tr + disc) / 2.0).max(0.0).sqrt()
}

impl LocalFilter {
    pub fn new(ops: Vec<Matrix2<Complex64>>) -> Result<Self> {
        check_arity(ops.len())?;
        for op in &ops {
            let s = spectral_norm2(op);
            if !s.is_finite() || s > 1.0 + 1e-12 {
                return Err(Error::FilterTooLarge(s));
            }
        }
        Ok(Self { ops })
    }

    /// diag(ε, 1) on every party.
    pub fn uniform_diag(n: usize, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(Error::OutOfRange(format!("filter epsilon {eps} not in (0,1]")));
        }
        let op = Matrix2::new(Complex64::new(eps, 0.0), ZERO, ZERO, ONE);
        Self::new(vec![op; n])
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::new(vec![Matrix2::identity(); n])
    }

    pub fn ops(&self) -> &[Matrix2<Complex64>] {
        &self.ops
    }

    fn full(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::from_element(1, 1, ONE);
        for op in &self.ops {
            let d = DMatrix::from_fn(2, 2, |i, j| op[(i, j)]);
            m = m.kronecker(&d);
        }
        m
    }
}

/// Returns the normalized filtered state and the success probability tr(FρF†).
pub fn apply_filter(rho: &DensityMatrix, f: &LocalFilter) -> Result<(DensityMatrix, f64)> {
    if f.ops.len() != rho.n_qubits {
        return Err(Error::DimensionMismatch { expected: rho.n_qubits, found: f.ops.len() });
    }
    let out = rho.conjugate_by(&f.full());
    let tr = out.trace();
    if tr < 1e-14 {
        return Err(Error::FilterAnnihilates);
    }
    let m = out.entries / Complex64::new(tr, 0.0);
    Ok((DensityMatrix { n_qubits: rho.n_qubits, entries: m }, tr))
}

/// All Pauli expectation values tr(ρ σ_{μ₁}⊗…⊗σ_{μₙ}), μ ∈ {I,X,Y,Z} = {0,1,2,3}.
///
/// Flat index is Σ μₖ 4^{n-1-k}.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationTensor {
    n: usize,
    data: Vec<f64>,
}

impl CorrelationTensor {
    pub fn new(rho: &DensityMatrix) -> Self {
        let n = rho.n_qubits;
        let d = rho.dim();
        let mut data = vec![0.0; 1 << (2 * n)];
        for (mu, slot) in data.iter_mut().enumerate() {
            let mut flip = 0usize;
            for k in 0..n {
                let p = (mu >> (2 * (n - 1 - k))) & 3;
                if p == 1 || p == 2 {
                    flip |= bit(n, k);
                }
            }
            let mut acc = ZERO;
            for j in 0..d {
                let mut c = ONE;
                for k in 0..n {
                    let p = (mu >> (2 * (n - 1 - k))) & 3;
                    let b = j & bit(n, k) != 0;
                    match (p, b) {
                        (2, false) => c *= Complex64::new(0.0, 1.0),
                        (2, true) => c *= Complex64::new(0.0, -1.0),
                        (3, true) => c = -c,
                        _ => {}
                    }
                }
                acc += rho.entries[(j, j ^ flip)] * c;
            }
            *slot = acc.re;
        }
        Self { n, data }
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn get(&self, mu: &[usize]) -> f64 {
        let idx = mu.iter().fold(0, |acc, &m| acc * 4 + m);
        self.data[idx]
    }

    /// Σ_μ T[μ] Πₖ w[k][μₖ], contracting the last party first.
    pub fn contract(&self, w: &[[f64; 4]]) -> f64 {
        debug_assert_eq!(w.len(), self.n);
        let mut cur = self.data.clone();
        for k in (0..self.n).rev() {
            let wk = &w[k];
            cur = cur.chunks_exact(4).map(|c| c[0] * wk[0] + c[1] * wk[1] + c[2] * wk[2] + c[3] * wk[3]).collect();
        }
        cur[0]
    }

    /// Contracts every party except `skip`, leaving a 4-vector.
    pub fn contract_except(&self, w: &[[f64; 4]], skip: usize) -> [f64; 4] {
        let mut out = [0.0; 4];
        for (m, slot) in out.iter_mut().enumerate() {
            let mut e = [0.0; 4];
            e[m] = 1.0;
            let mut ww = w.to_vec();
            ww[skip] = e;
            *slot = self.contract(&ww);
        }
        out
    }

    /// ⟨O₁⊗…⊗Oₙ⟩ with `None` meaning identity.
    pub fn correlator(&self, obs: &[Option<QubitObservable>]) -> f64 {
        let w: Vec<[f64; 4]> = obs
            .iter()
            .map(|o| match o {
                Some(o) => o.weights(1.0, false),
                None => [1.0, 0.0, 0.0, 0.0],
            })
            .collect();
        self.contract(&w)
    }
}

/// tr(ρ O₁⊗…⊗Oₙ); `None` slots are identities.
pub fn correlator(rho: &DensityMatrix, obs: &[Option<QubitObservable>]) -> Result<f64> {
    if obs.len() != rho.n_qubits {
        return Err(Error::DimensionMismatch { expected: rho.n_qubits, found: obs.len() });
    }
    Ok(CorrelationTensor::new(rho).correlator(obs))
}

/// Full outcome table for a uniform battery.
pub fn behavior(rho: &DensityMatrix, battery: &MeasurementBattery) -> Result<Behavior> {
    behavior_from_tensor(&CorrelationTensor::new(rho), battery)
}

pub(crate) fn behavior_from_tensor(t: &CorrelationTensor, battery: &MeasurementBattery) -> Result<Behavior> {
    let n = t.n;
    if battery.n_parties() != n {
        return Err(Error::DimensionMismatch { expected: n, found: battery.n_parties() });
    }
    let s = battery.uniform_settings().ok_or_else(|| {
        Error::ScenarioMismatch("behavior tables need the same number of settings per party".into())
    })?;
    let scenario = Scenario::new(n, s, 2)?;
    let norm = 1.0 / (1u64 << n) as f64;
    let mut table = Vec::with_capacity(scenario.table_len());
    for x in 0..scenario.n_settings_tuples() {
        let xs = scenario.settings_tuple(x);
        for a in 0..scenario.n_outcome_tuples() {
            let w: Vec<[f64; 4]> = (0..n)
                .map(|k| {
                    let sign = if a & (1 << (n - 1 - k)) != 0 { -1.0 } else { 1.0 };
                    battery.parties[k][xs[k]].weights(sign, true)
                })
                .collect();
            table.push((t.contract(&w) * norm).max(0.0));
        }
    }
    Behavior::new(scenario, table)
}

/// Local Bloch vectors and correlation matrix of a two-qubit state.
pub fn bloch_and_t(rho: &DensityMatrix) -> Result<(Vector3<f64>, Vector3<f64>, Matrix3<f64>)> {
    if rho.n_qubits != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: rho.n_qubits });
    }
    let t = CorrelationTensor::new(rho);
    let a = Vector3::from_fn(|i, _| t.get(&[i + 1, 0]));
    let b = Vector3::from_fn(|i, _| t.get(&[0, i + 1]));
    let m = Matrix3::from_fn(|i, j| t.get(&[i + 1, j + 1]));
    Ok((a, b, m))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Ppt {
    Npt,
    Ppt,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PptReport {
    pub verdict: Ppt,
    pub min_eigenvalue: f64,
}

/// Partial transpose on the qubits in `subset` (1-based).
pub fn partial_transpose(rho: &DensityMatrix, subset: &[usize]) -> Result<DensityMatrix> {
    let n = rho.n_qubits;
    let s0 = zero_based(subset, n)?;
    let mask: usize = s0.iter().map(|&q| bit(n, q)).sum();
    let d = rho.dim();
    let m = DMatrix::from_fn(d, d, |i, j| {
        let swap = (i ^ j) & mask;
        rho.entries[(i ^ swap, j ^ swap)]
    });
    Ok(DensityMatrix { n_qubits: n, entries: m })
}

pub fn ppt_check(rho: &DensityMatrix, subset: &[usize]) -> Result<PptReport> {
    let n = rho.n_qubits;
    if subset.is_empty() || subset.len() >= n {
        return Err(Error::InvalidSubset(format!("{subset:?} is not a proper nonempty subset of 1..={n}")));
    }
    let min = partial_transpose(rho, subset)?.min_eigenvalue();
    let verdict = if min < -NPT_TOL { Ppt::Npt } else { Ppt::Ppt };
    Ok(PptReport { verdict, min_eigenvalue: min })
}

/// One side of every bipartition of 1..=n: the side containing qubit 1.
pub fn bipartitions(n: usize) -> Vec<Vec<usize>> {
    (0..(1usize << (n - 1)) - 1)
        .map(|m| std::iter::once(1).chain((2..=n).filter(|q| m & (1 << (q - 2)) != 0)).collect())
        .collect()
}
