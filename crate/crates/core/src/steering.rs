//! Two-qubit steering criteria and a three-setting genuine tripartite steering inequality.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix3, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entdetect::Verdict;
use crate::error::{Error, Result};
use crate::families::TauMinCoords;
use crate::qstate::{bloch_and_t, ppt_check, CorrelationTensor, DensityMatrix, Ppt, QubitObservable};

/// Bound of the genuine steering inequality.
pub const GENUINE_BOUND: f64 = 3.0;
const ORTHO_TOL: f64 = 1e-9;
const SEESAW_TOL: f64 = 1e-10;
const SEESAW_MAX_SWEEPS: usize = 2000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteeringVerdict {
    pub verdict: Verdict,
    pub criterion: String,
    pub value: f64,
}

impl SteeringVerdict {
    fn from_margin(criterion: &str, value: f64) -> Self {
        let verdict = if value > 0.0 { Verdict::Detected } else { Verdict::Undetected };
        Self { verdict, criterion: criterion.to_string(), value }
    }

    pub fn is_detected(&self) -> bool {
        self.verdict == Verdict::Detected
    }
}

impl fmt::Display for SteeringVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} by {} (margin {:.6})", self.verdict, self.criterion, self.value)
    }
}

fn tdiag_margin(t: [f64; 3]) -> f64 {
    let root = |x: f64| (1.0 - x * x).max(0.0).sqrt();
    [(0, 1, 2), (0, 2, 1), (1, 2, 0)]
        .iter()
        .map(|&(i, j, k)| t[i].abs() + t[j].abs() - 4.0 / std::f64::consts::PI * root(t[k]))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// max over pairings of |tᵢ| + |tⱼ| − (4/π)√(1 − t_k²), for a diagonal correlation matrix.
pub fn t_diag_criterion(t: [f64; 3]) -> Result<SteeringVerdict> {
    if let Some(x) = t.iter().find(|x| !x.is_finite() || x.abs() > 1.0 + 1e-9) {
        return Err(Error::OutOfRange(format!("correlation {x} outside [-1,1]")));
    }
    Ok(SteeringVerdict::from_margin(SteeringCriterion::TDiag.name(), tdiag_margin(t)))
}

/// Singular values of the correlation matrix, largest first.
fn t_singular_values(rho: &DensityMatrix) -> Result<[f64; 3]> {
    let (_, _, t) = bloch_and_t(rho)?;
    let mut s: Vec<f64> = t.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok([s[0], s[1], s[2]])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SteeringCriterion {
    /// The diagonal-correlation criterion, applied to the singular values of T.
    TDiag,
    /// (s₁ + s₂)/√2 > 1 with two orthogonal settings per side.
    Linear2,
    /// (s₁ + s₂ + s₃)/√3 > 1 with three orthogonal settings per side.
    Linear3,
}

impl SteeringCriterion {
    pub const ALL: [SteeringCriterion; 3] = [Self::TDiag, Self::Linear2, Self::Linear3];

    pub fn name(&self) -> &'static str {
        match self {
            Self::TDiag => "t-diag",
            Self::Linear2 => "linear2",
            Self::Linear3 => "linear3",
        }
    }

    pub fn evaluate(&self, rho: &DensityMatrix) -> Result<SteeringVerdict> {
        let s = t_singular_values(rho)?;
        let margin = match self {
            Self::TDiag => tdiag_margin(s.map(|x| x.min(1.0))),
            Self::Linear2 => (s[0] + s[1]) / 2f64.sqrt() - 1.0,
            Self::Linear3 => (s[0] + s[1] + s[2]) / 3f64.sqrt() - 1.0,
        };
        Ok(SteeringVerdict::from_margin(self.name(), margin))
    }
}

impl FromStr for SteeringCriterion {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| Error::UnknownCriterion(s.to_string()))
    }
}

/// Runs the registered criteria in order; the first detection wins. PPT states cannot
/// steer, so they are reported as certified absent.
pub fn detect_steering_2q(rho: &DensityMatrix) -> Result<SteeringVerdict> {
    if rho.n_qubits() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: rho.n_qubits() });
    }
    let ppt = ppt_check(rho, &[1])?;
    if ppt.verdict == Ppt::Ppt {
        return Ok(SteeringVerdict { verdict: Verdict::CertifiedAbsent, criterion: "ppt".into(), value: ppt.min_eigenvalue });
    }
    let mut best: Option<SteeringVerdict> = None;
    for c in SteeringCriterion::ALL {
        let v = c.evaluate(rho)?;
        if v.is_detected() {
            return Ok(v);
        }
        if best.as_ref().is_none_or(|b| v.value > b.value) {
            best = Some(v);
        }
    }
    Ok(best.expect("registry is not empty"))
}

/// Diagonal correlations of the three two-loss reductions, in pair order (1,2), (1,3), (1,4).
fn reduction_t_diagonals(c: &TauMinCoords) -> [[f64; 3]; 3] {
    let [x0, x1, x2, x3] = c.x();
    let (s0, s1, s2) = (x0 * x0, x1 * x1, x2 * x2);
    [
        [-1.0 + 2.0 * s0 + 2.0 * s2, -1.0 + 2.0 * s1 + 2.0 * s2, -1.0 + 2.0 * s0 + 2.0 * s1],
        [2.0 * (x0 * x2 + x1 * x3), -2.0 * (x1 * x2 + x0 * x3), 2.0 * (x0 * x1 + x2 * x3)],
        [2.0 * x0 * x2 - 2.0 * x1 * x3, -2.0 * x1 * x2 + 2.0 * x0 * x3, 2.0 * x0 * x1 - 2.0 * x2 * x3],
    ]
}

/// Steering margins S(ρ₁²), S(ρ₂²), S(ρ₃²) of the reductions keeping qubits (1,2), (1,3)
/// and (1,4). All three positive means every two-loss reduction steers.
pub fn appendix_b_conditions(c: &TauMinCoords) -> (f64, f64, f64) {
    let [a, b, d] = reduction_t_diagonals(c).map(tdiag_margin);
    (a, b, d)
}

/// Three orthonormal measurement directions (reflections allowed).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[QubitObservable; 3]", into = "[QubitObservable; 3]")]
pub struct Triad([QubitObservable; 3]);

impl TryFrom<[QubitObservable; 3]> for Triad {
    type Error = Error;
    fn try_from(v: [QubitObservable; 3]) -> Result<Self> {
        Self::new(v)
    }
}

impl From<Triad> for [QubitObservable; 3] {
    fn from(t: Triad) -> Self {
        t.0
    }
}

impl Triad {
    pub fn new(obs: [QubitObservable; 3]) -> Result<Self> {
        for i in 0..3 {
            for j in i + 1..3 {
                if obs[i].vector().dot(&obs[j].vector()).abs() > ORTHO_TOL {
                    return Err(Error::NotOrthonormal);
                }
            }
        }
        Ok(Self(obs))
    }

    /// (σx, σy, σz)
    pub fn pauli() -> Self {
        Self([QubitObservable::x(), QubitObservable::y(), QubitObservable::z()])
    }

    /// Rows of an orthogonal matrix.
    pub fn from_rows(m: &Matrix3<f64>) -> Result<Self> {
        let row = |i: usize| QubitObservable::from_vector(&m.row(i).transpose());
        Self::new([row(0)?, row(1)?, row(2)?])
    }

    pub fn observables(&self) -> &[QubitObservable; 3] {
        &self.0
    }

    fn rows(&self) -> Matrix3<f64> {
        Matrix3::from_rows(&[self.0[0].vector().transpose(), self.0[1].vector().transpose(), self.0[2].vector().transpose()])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenuineSteeringSettings {
    pub a: Triad,
    pub b: Triad,
    pub c: [QubitObservable; 3],
}

/// (A index, B index, sign) of the three products in each Dᵢ.
const D_TERMS: [[(usize, usize, f64); 3]; 3] = [
    [(0, 0, 1.0), (1, 1, 1.0), (2, 2, 1.0)],
    [(0, 2, 1.0), (1, 0, -1.0), (2, 1, 1.0)],
    [(0, 1, 1.0), (1, 2, -1.0), (2, 0, 1.0)],
];

/// D₀, D₁, D₂ for a two-party correlation matrix and arbitrary unit settings.
pub fn d_values(t: &Matrix3<f64>, a: &[Vector3<f64>; 3], b: &[Vector3<f64>; 3]) -> [f64; 3] {
    D_TERMS.map(|terms| terms.iter().map(|&(i, j, s)| s * a[i].dot(&(t * b[j]))).sum())
}

/// Full correlations T_{jkl} = ⟨σ_j⊗σ_k⊗σ_l⟩ of a three-qubit state.
fn t3(rho: &DensityMatrix) -> [[[f64; 3]; 3]; 3] {
    let ct = CorrelationTensor::new(rho);
    let mut t = [[[0.0; 3]; 3]; 3];
    for (j, tj) in t.iter_mut().enumerate() {
        for (k, tjk) in tj.iter_mut().enumerate() {
            for (l, v) in tjk.iter_mut().enumerate() {
                *v = ct.get(&[j + 1, k + 1, l + 1]);
            }
        }
    }
    t
}

/// T contracted with Charlie's direction, leaving an A×B matrix.
fn slice_c(t: &[[[f64; 3]; 3]; 3], c: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::from_fn(|j, k| (0..3).map(|l| t[j][k][l] * c[l]).sum())
}

struct Frame {
    a: Matrix3<f64>,
    b: Matrix3<f64>,
    c: [Vector3<f64>; 3],
}

fn signed_value(t: &[[[f64; 3]; 3]; 3], f: &Frame) -> f64 {
    (0..3)
        .map(|i| {
            let m = slice_c(t, &f.c[i]);
            D_TERMS[i].iter().map(|&(x, y, s)| s * (f.a.row(x) * m * f.b.row(y).transpose())[0]).sum::<f64>()
        })
        .sum()
}

fn frame_of(s: &GenuineSteeringSettings) -> Frame {
    Frame { a: s.a.rows(), b: s.b.rows(), c: s.c.map(|o| o.vector()) }
}

/// |⟨D₀C₀⟩ + ⟨D₁C₁⟩ + ⟨D₂C₂⟩| on a three-qubit state.
pub fn genuine_steering_value(rho: &DensityMatrix, s: &GenuineSteeringSettings) -> Result<f64> {
    if rho.n_qubits() != 3 {
        return Err(Error::DimensionMismatch { expected: 3, found: rho.n_qubits() });
    }
    Ok(signed_value(&t3(rho), &frame_of(s)).abs())
}

/// Orthogonal matrix closest to `m`.
fn polar(m: &Matrix3<f64>) -> Matrix3<f64> {
    let svd = m.svd(true, true);
    svd.u.expect("requested") * svd.v_t.expect("requested")
}

fn random_frame(rng: &mut ChaCha8Rng) -> Frame {
    let mut gauss = || -> f64 { StandardNormal.sample(&mut *rng) };
    let a = polar(&Matrix3::from_fn(|_, _| gauss()));
    let b = polar(&Matrix3::from_fn(|_, _| gauss()));
    let c = [0; 3].map(|_| {
        let v = Vector3::new(gauss(), gauss(), gauss());
        v / v.norm().max(1e-12)
    });
    Frame { a, b, c }
}

fn seesaw(t: &[[[f64; 3]; 3]; 3], mut f: Frame) -> (f64, Frame) {
    let mut value = signed_value(t, &f);
    for _ in 0..SEESAW_MAX_SWEEPS {
        for i in 0..3 {
            let g: Vector3<f64> = Vector3::from_fn(|l, _| {
                D_TERMS[i]
                    .iter()
                    .map(|&(x, y, s)| {
                        let mut acc = 0.0;
                        for j in 0..3 {
                            for k in 0..3 {
                                acc += t[j][k][l] * f.a[(x, j)] * f.b[(y, k)];
                            }
                        }
                        s * acc
                    })
                    .sum::<f64>()
            });
            if g.norm() > 1e-14 {
                f.c[i] = g / g.norm();
            }
        }
        let slices: Vec<Matrix3<f64>> = f.c.iter().map(|c| slice_c(t, c)).collect();
        let mut ga = Matrix3::zeros();
        for i in 0..3 {
            for &(x, y, s) in &D_TERMS[i] {
                let row = (slices[i] * f.b.row(y).transpose()).transpose() * s;
                ga.set_row(x, &(ga.row(x) + row));
            }
        }
        f.a = polar(&ga);
        let mut gb = Matrix3::zeros();
        for i in 0..3 {
            for &(x, y, s) in &D_TERMS[i] {
                let row = f.a.row(x) * slices[i] * s;
                gb.set_row(y, &(gb.row(y) + row));
            }
        }
        f.b = polar(&gb);
        let next = signed_value(t, &f);
        let gain = next - value;
        value = next;
        if gain < SEESAW_TOL {
            break;
        }
    }
    (value, f)
}

/// See-saw over orthonormal triads for Alice and Bob and free directions for Charlie.
/// Deterministic given `seed`; ties go to the earliest restart.
pub fn maximize_genuine_steering(rho: &DensityMatrix, restarts: usize, seed: u64) -> Result<(f64, GenuineSteeringSettings)> {
    if rho.n_qubits() != 3 {
        return Err(Error::DimensionMismatch { expected: 3, found: rho.n_qubits() });
    }
    if restarts == 0 {
        return Err(Error::OutOfRange("at least one restart is needed".into()));
    }
    let t = t3(rho);
    let runs: Vec<(f64, Frame)> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            seesaw(&t, random_frame(&mut rng))
        })
        .collect();
    let mut best = &runs[0];
    for run in &runs[1..] {
        if run.0 > best.0 {
            best = run;
        }
    }
    let f = &best.1;
    let c = [
        QubitObservable::from_vector(&f.c[0])?,
        QubitObservable::from_vector(&f.c[1])?,
        QubitObservable::from_vector(&f.c[2])?,
    ];
    let settings = GenuineSteeringSettings { a: Triad::from_rows(&f.a)?, b: Triad::from_rows(&f.b)?, c };
    Ok((best.0.abs(), settings))
}

/// S₃ = ⟨A₀B₀ + A₁B₁ + A₂B₂⟩ on a two-qubit state.
pub fn product_s3_value(a: &Triad, b: &Triad, rho: &DensityMatrix) -> Result<f64> {
    let (_, _, t) = bloch_and_t(rho)?;
    let av = a.0.map(|o| o.vector());
    let bv = b.0.map(|o| o.vector());
    Ok(d_values(&t, &av, &bv)[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{ghz, tau_min_reduced, w, w_loss_mixture};
    use crate::qstate::PureState;
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn phi_plus() -> DensityMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        PureState::from_real(2, &[s, 0.0, 0.0, s]).unwrap().density()
    }

    fn flipped_y() -> Triad {
        Triad::new([QubitObservable::x(), QubitObservable::y().neg(), QubitObservable::z()]).unwrap()
    }

    #[test]
    fn tdiag_examples() {
        let v = t_diag_criterion([1.0, 1.0, -1.0]).unwrap();
        assert!(v.is_detected() && (v.value - 2.0).abs() < 1e-12);
        let v = t_diag_criterion([0.0; 3]).unwrap();
        assert!(!v.is_detected() && (v.value + 4.0 / std::f64::consts::PI).abs() < 1e-12);
        let v = t_diag_criterion([0.0, 0.0, 1.0]).unwrap();
        assert_eq!(v.verdict, Verdict::Undetected);
        assert!(v.value.abs() < 1e-12);
        assert!(t_diag_criterion([1.1, 0.0, 0.0]).is_err());
    }

    #[test]
    fn linear_criteria_miss_half_diagonal() {
        // T = diag(½,½,0): the W two-loss reduction.
        let rho = w(4).unwrap().reduced(&[1, 2]).unwrap();
        let (_, _, t) = bloch_and_t(&rho).unwrap();
        assert!((t[(0, 0)] - 0.5).abs() < 1e-12 && (t[(1, 1)] - 0.5).abs() < 1e-12 && t[(2, 2)].abs() < 1e-12);
        for c in SteeringCriterion::ALL {
            assert!(!c.evaluate(&rho).unwrap().is_detected(), "{}", c.name());
        }
        assert_eq!(detect_steering_2q(&rho).unwrap().verdict, Verdict::Undetected);
    }

    #[test]
    fn registry() {
        assert_eq!("linear3".parse::<SteeringCriterion>().unwrap(), SteeringCriterion::Linear3);
        assert!(matches!("nonexistent".parse::<SteeringCriterion>(), Err(Error::UnknownCriterion(_))));
        let v = detect_steering_2q(&phi_plus()).unwrap();
        assert!(v.is_detected());
        assert_eq!(detect_steering_2q(&DensityMatrix::maximally_mixed(2).unwrap()).unwrap().verdict, Verdict::CertifiedAbsent);
        assert!(detect_steering_2q(&DensityMatrix::maximally_mixed(3).unwrap()).is_err());
    }

    #[test]
    fn pair_margin_examples() {
        // Every two-qubit reduction of GHZ₄ is the same classically correlated state.
        let (a, b, c) = appendix_b_conditions(&TauMinCoords::ghz());
        assert!(a.abs() < 1e-12 && b.abs() < 1e-12 && c.abs() < 1e-12);
        let (a, b, c) = appendix_b_conditions(&TauMinCoords::new([1.0, 0.0, 0.0, 0.0]).unwrap());
        assert!(!(a > 0.0 && b > 0.0 && c > 0.0));
    }

    #[test]
    fn region_with_all_three_positive_exists() {
        let n = 41;
        let grid: Vec<f64> = (0..n).map(|i| -1.0 + 2.0 * i as f64 / (n - 1) as f64).collect();
        let mut found = false;
        'outer: for &x0 in &grid {
            for &x1 in &grid {
                for &x2 in &grid {
                    let r = 1.0 - x0 * x0 - x1 * x1 - x2 * x2;
                    if r >= 0.0 {
                        let (a, b, c) = appendix_b_conditions(&TauMinCoords::normalized([x0, x1, x2, r.sqrt()]).unwrap());
                        if a > 0.0 && b > 0.0 && c > 0.0 {
                            found = true;
                            break 'outer;
                        }
                    }
                }
            }
        }
        assert!(found);
    }

    #[test]
    fn genuine_value_examples() {
        let zero = PureState::basis(1, 0).unwrap().density();
        let rho = DensityMatrix::tensor(&[&phi_plus(), &zero]).unwrap();
        let s = GenuineSteeringSettings { a: Triad::pauli(), b: flipped_y(), c: [QubitObservable::z(); 3] };
        assert!((genuine_steering_value(&rho, &s).unwrap() - 3.0).abs() < 1e-12);
        assert!(genuine_steering_value(&phi_plus(), &s).is_err());
    }

    #[test]
    fn genuine_maximization() {
        let rho = w_loss_mixture(0.75).unwrap();
        let (v, s) = maximize_genuine_steering(&rho, 16, 5).unwrap();
        assert!(v > 3.02, "{v}");
        assert!((genuine_steering_value(&rho, &s).unwrap() - v).abs() < 1e-9);
        let diag = DensityMatrix::diagonal(3, &[0.5, 0., 0., 0., 0., 0., 0., 0.5]).unwrap();
        let (v, _) = maximize_genuine_steering(&diag, 16, 5).unwrap();
        assert!(v <= 3.0 + 1e-9, "{v}");
        let (v, _) = maximize_genuine_steering(&ghz(3).unwrap().density(), 16, 5).unwrap();
        assert!(v > 3.0, "{v}");
        let a = maximize_genuine_steering(&rho, 4, 9).unwrap();
        let b = maximize_genuine_steering(&rho, 4, 9).unwrap();
        assert_eq!(a.0.to_bits(), b.0.to_bits());
    }

    #[test]
    fn product_s3_examples() {
        let zz = PureState::basis(2, 0).unwrap().density();
        assert!((product_s3_value(&Triad::pauli(), &Triad::pauli(), &zz).unwrap() - 1.0).abs() < 1e-12);
        let mm = DensityMatrix::maximally_mixed(2).unwrap();
        assert!(product_s3_value(&Triad::pauli(), &Triad::pauli(), &mm).unwrap().abs() < 1e-12);
        assert!((product_s3_value(&Triad::pauli(), &flipped_y(), &phi_plus()).unwrap() - 3.0).abs() < 1e-12);
        assert!(product_s3_value(&Triad::pauli(), &Triad::pauli(), &DensityMatrix::maximally_mixed(3).unwrap()).is_err());
        let skew = [QubitObservable::x(), QubitObservable::along([1.0, 1.0, 0.0]).unwrap(), QubitObservable::z()];
        assert!(matches!(Triad::new(skew), Err(Error::NotOrthonormal)));
    }

    fn unit() -> impl Strategy<Value = Vector3<f64>> {
        (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0)
            .prop_filter("nonzero", |(a, b, c)| a * a + b * b + c * c > 1e-4)
            .prop_map(|(a, b, c)| Vector3::new(a, b, c).normalize())
    }

    fn triad() -> impl Strategy<Value = Triad> {
        proptest::collection::vec(-1.0f64..1.0, 9)
            .prop_filter("regular", |v| Matrix3::from_row_slice(v).determinant().abs() > 1e-3)
            .prop_map(|v| Triad::from_rows(&polar(&Matrix3::from_row_slice(&v))).unwrap())
    }

    fn qubit() -> impl Strategy<Value = DensityMatrix> {
        (unit(), 0.0f64..1.0).prop_map(|(r, len)| {
            let r = r * len;
            let m = nalgebra::DMatrix::from_row_slice(
                2,
                2,
                &[
                    Complex64::new((1.0 + r[2]) / 2.0, 0.0),
                    Complex64::new(r[0] / 2.0, -r[1] / 2.0),
                    Complex64::new(r[0] / 2.0, r[1] / 2.0),
                    Complex64::new((1.0 - r[2]) / 2.0, 0.0),
                ],
            );
            DensityMatrix::new(1, m).unwrap()
        })
    }

    proptest! {
        #[test]
        fn lemma_on_products(ra in qubit(), rb in qubit(), a in triad(), b in triad()) {
            let rho = DensityMatrix::tensor(&[&ra, &rb]).unwrap();
            prop_assert!(product_s3_value(&a, &b, &rho).unwrap().abs() <= 1.0 + 1e-9);
        }

        #[test]
        fn relabelings_generate_d1_d2(a in proptest::array::uniform3(unit()), b in proptest::array::uniform3(unit()), m in proptest::collection::vec(-1.0f64..1.0, 9)) {
            let t = Matrix3::from_row_slice(&m);
            let d = d_values(&t, &a, &b);
            let a2 = [a[0], -a[1], a[2]];
            let d1 = d_values(&t, &a2, &[b[2], b[0], b[1]])[0];
            let d2 = d_values(&t, &a2, &[b[1], b[2], b[0]])[0];
            prop_assert!((d1 - d[1]).abs() < 1e-12);
            prop_assert!((d2 - d[2]).abs() < 1e-12);
        }

        #[test]
        fn pair_margins_match_reductions(seed in any::<u64>()) {
            let c = TauMinCoords::random(&mut ChaCha8Rng::seed_from_u64(seed));
            let (s1, s2, s3) = appendix_b_conditions(&c);
            for (which, s) in [(1, s1), (2, s2), (3, s3)] {
                let rho = tau_min_reduced(&c, 2, which).unwrap();
                let (_, _, t) = bloch_and_t(&rho).unwrap();
                let off = (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).filter(|(i, j)| i != j).map(|(i, j)| t[(i, j)].abs()).fold(0.0, f64::max);
                prop_assert!(off < 1e-10);
                let v = t_diag_criterion([t[(0, 0)], t[(1, 1)], t[(2, 2)]]).unwrap();
                prop_assert!((v.value - s).abs() < 1e-10, "which {} {} vs {}", which, v.value, s);
            }
        }

        #[test]
        fn detected_implies_npt(v in proptest::collection::vec(-1.0f64..1.0, 32), k in 1usize..4) {
            let amps: Vec<Complex64> = v.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect();
            let mut rho = PureState::normalized(4, amps).unwrap().density();
            rho = crate::qstate::partial_trace(&rho, &[k.min(3), 4]).unwrap();
            for c in SteeringCriterion::ALL {
                if c.evaluate(&rho).unwrap().is_detected() {
                    prop_assert_eq!(ppt_check(&rho, &[1]).unwrap().verdict, Ppt::Npt);
                }
            }
        }
    }
}
