//! Named states and the four-qubit generic class in Bell-pair coordinates.
//!
//! With u₀ = |φ⁺⟩|φ⁺⟩, u₁ = |φ⁻⟩|φ⁻⟩, u₂ = |ψ⁺⟩|ψ⁺⟩, u₃ = |ψ⁻⟩|ψ⁻⟩ the state Σ zⱼuⱼ has
//! amplitude (z₀+z₁)/2 on 0000 and 1111, (z₀−z₁)/2 on 0011 and 1100,
//! (z₂+z₃)/2 on 0101 and 1010, (z₂−z₃)/2 on 0110 and 1001.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::{apply_filter, DensityMatrix, LocalFilter, PureState, STATE_TOL};

/// Tolerance on |Σ pⱼ e^{2iθⱼ}| when constructing maximally entangled coordinates.
pub const M_CLASS_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenericACoords {
    z: [Complex64; 4],
}

impl GenericACoords {
    pub fn new(z: [Complex64; 4]) -> Result<Self> {
        let norm: f64 = z.iter().map(|c| c.norm_sqr()).sum();
        if !norm.is_finite() || (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { z })
    }

    pub fn z(&self) -> [Complex64; 4] {
        self.z
    }

    /// Gaussian real and imaginary parts, normalized.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let z: [Complex64; 4] = std::array::from_fn(|_| {
                Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
            });
            let norm = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            if norm > 1e-6 {
                return Self { z: z.map(|c| c / norm) };
            }
        }
    }

    /// Σ zⱼ²; its squared modulus is the 4-tangle.
    pub fn square_sum(&self) -> Complex64 {
        self.z.iter().map(|c| c * c).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TauMinCoords {
    x: [f64; 4],
}

impl TauMinCoords {
    pub fn new(x: [f64; 4]) -> Result<Self> {
        let norm: f64 = x.iter().map(|v| v * v).sum();
        if !norm.is_finite() || (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidCoords(format!("Σx² = {norm}, expected 1")));
        }
        Ok(Self { x })
    }

    /// Rescales onto the unit sphere; fails on the zero vector.
    pub fn normalized(x: [f64; 4]) -> Result<Self> {
        let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(n > 1e-300) || !n.is_finite() {
            return Err(Error::InvalidCoords("zero vector".into()));
        }
        Self::new(x.map(|v| v / n))
    }

    pub fn x(&self) -> [f64; 4] {
        self.x
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let x: [f64; 4] = std::array::from_fn(|_| StandardNormal.sample(rng));
            if let Ok(c) = Self::normalized(x) {
                return c;
            }
        }
    }

    pub fn ghz() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self { x: [s, s, 0.0, 0.0] }
    }

    pub fn dicke() -> Self {
        let s = 1.0 / 6f64.sqrt();
        Self { x: [s, -s, 2.0 * s, 0.0] }
    }

    pub fn neg(&self) -> Self {
        Self { x: self.x.map(|v| -v) }
    }

    /// (a, b, c, d) = ((x₀+x₁)/2, (x₀−x₁)/2, (x₂+x₃)/2, (x₂−x₃)/2)
    pub(crate) fn half_sums(&self) -> (f64, f64, f64, f64) {
        let [x0, x1, x2, x3] = self.x;
        ((x0 + x1) / 2.0, (x0 - x1) / 2.0, (x2 + x3) / 2.0, (x2 - x3) / 2.0)
    }

    pub fn as_generic(&self) -> GenericACoords {
        GenericACoords { z: self.x.map(|v| Complex64::new(v, 0.0)) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MClassCoords {
    p: [f64; 4],
    theta: [f64; 4],
}

impl MClassCoords {
    pub fn new(p: [f64; 4], theta: [f64; 4]) -> Result<Self> {
        if p.iter().any(|v| !v.is_finite() || *v < -1e-12) {
            return Err(Error::InvalidCoords(format!("weights {p:?} must be nonnegative")));
        }
        if theta.iter().any(|t| !t.is_finite() || *t < -1e-12 || *t > TAU + 1e-12) {
            return Err(Error::InvalidCoords(format!("phases {theta:?} must lie in [0, 2π]")));
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidCoords(format!("Σp = {sum}, expected 1")));
        }
        let c: Complex64 = p.iter().zip(&theta).map(|(p, t)| Complex64::from_polar(*p, 2.0 * t)).sum();
        if c.norm() > M_CLASS_TOL {
            return Err(Error::Constraint(format!("|Σ p e^(2iθ)| = {:e}", c.norm())));
        }
        Ok(Self { p, theta })
    }

    pub fn p(&self) -> [f64; 4] {
        self.p
    }

    pub fn theta(&self) -> [f64; 4] {
        self.theta
    }

    pub fn as_generic(&self) -> GenericACoords {
        let z: [Complex64; 4] =
            std::array::from_fn(|j| Complex64::from_polar(self.p[j].max(0.0).sqrt(), self.theta[j]));
        let n = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        GenericACoords { z: z.map(|c| c / n) }
    }

    /// Flat-simplex weights; the four phasors pⱼe^{iφⱼ} are closed into a quadrilateral
    /// with φ₀ = 0, random φ₁, and φ₂, φ₃ solved from the remaining triangle. θ = φ/2.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let e: [f64; 4] = std::array::from_fn(|_| Exp1.sample(rng));
            let s: f64 = e.iter().sum();
            let p = e.map(|v| v / s);
            if p.iter().any(|&v| v > 0.5) {
                continue;
            }
            for _ in 0..100 {
                let phi1 = rng.random::<f64>() * TAU;
                if let Some(phi) = close_quadrilateral(p, phi1) {
                    let theta = phi.map(|f| f.rem_euclid(TAU) / 2.0);
                    if let Ok(c) = Self::new(p, theta) {
                        let r: Complex64 =
                            p.iter().zip(&theta).map(|(p, t)| Complex64::from_polar(*p, 2.0 * t)).sum();
                        if r.norm() < 1e-10 {
                            return c;
                        }
                    }
                }
            }
        }
    }
}

fn close_quadrilateral(p: [f64; 4], phi1: f64) -> Option<[f64; 4]> {
    let v = Complex64::new(p[0], 0.0) + Complex64::from_polar(p[1], phi1);
    let w = -v;
    let r = w.norm();
    if p[2] < 1e-15 || r < 1e-15 {
        return None;
    }
    let cos_a = (p[2] * p[2] + r * r - p[3] * p[3]) / (2.0 * p[2] * r);
    if !(-1.0..=1.0).contains(&cos_a) {
        return None;
    }
    let phi2 = w.arg() + cos_a.acos();
    let rest = w - Complex64::from_polar(p[2], phi2);
    let phi3 = if p[3] < 1e-15 { 0.0 } else { rest.arg() };
    Some([0.0, phi1, phi2, phi3])
}

fn bell_pair_amplitudes(z: [Complex64; 4]) -> Vec<Complex64> {
    let h = 0.5;
    let zero = Complex64::new(0.0, 0.0);
    let mut a = vec![zero; 16];
    let (s01, d01, s23, d23) = ((z[0] + z[1]) * h, (z[0] - z[1]) * h, (z[2] + z[3]) * h, (z[2] - z[3]) * h);
    a[0b0000] = s01;
    a[0b1111] = s01;
    a[0b0011] = d01;
    a[0b1100] = d01;
    a[0b0101] = s23;
    a[0b1010] = s23;
    a[0b0110] = d23;
    a[0b1001] = d23;
    a
}

pub fn generic_a_state(c: &GenericACoords) -> PureState {
    PureState::normalized(4, bell_pair_amplitudes(c.z)).expect("Bell-pair basis is orthonormal")
}

pub fn tau_min_state(c: &TauMinCoords) -> PureState {
    generic_a_state(&c.as_generic())
}

pub fn m_class_state(c: &MClassCoords) -> PureState {
    generic_a_state(&c.as_generic())
}

pub fn ghz(n: usize) -> Result<PureState> {
    if n < 2 {
        return Err(Error::OutOfRange(format!("GHZ needs n ≥ 2, got {n}")));
    }
    if n > crate::qstate::MAX_QUBITS {
        return Err(Error::TooManyQubits(n));
    }
    let mut a = vec![Complex64::new(0.0, 0.0); 1 << n];
    a[0] = Complex64::new(1.0, 0.0);
    a[(1 << n) - 1] = Complex64::new(1.0, 0.0);
    PureState::normalized(n, a)
}

/// Uniform superposition of all weight-k kets.
pub fn dicke(n: usize, k: usize) -> Result<PureState> {
    if n > crate::qstate::MAX_QUBITS {
        return Err(Error::TooManyQubits(n));
    }
    if k > n || n == 0 {
        return Err(Error::OutOfRange(format!("Dicke({n},{k})")));
    }
    let a = (0..1usize << n)
        .map(|i| Complex64::new(if i.count_ones() as usize == k { 1.0 } else { 0.0 }, 0.0))
        .collect();
    PureState::normalized(n, a)
}

pub fn w(n: usize) -> Result<PureState> {
    if n < 2 {
        return Err(Error::OutOfRange(format!("W needs n ≥ 2, got {n}")));
    }
    dicke(n, 1)
}

/// ½[|0000⟩ + |0011⟩ + |1100⟩ − |1111⟩]
pub fn cluster4() -> PureState {
    PureState::from_real(4, &{
        let mut a = [0.0; 16];
        a[0b0000] = 0.5;
        a[0b0011] = 0.5;
        a[0b1100] = 0.5;
        a[0b1111] = -0.5;
        a
    })
    .expect("normalized")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NamedState {
    Ghz,
    W,
    Cluster4,
    Dicke4,
}

impl std::str::FromStr for NamedState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ghz" => Ok(Self::Ghz),
            "w" => Ok(Self::W),
            "cluster4" | "cluster" => Ok(Self::Cluster4),
            "dicke4" | "dicke" => Ok(Self::Dicke4),
            _ => Err(Error::UnknownState(s.to_string())),
        }
    }
}

pub fn named_state(name: NamedState, n: usize) -> Result<PureState> {
    match name {
        NamedState::Ghz => ghz(n),
        NamedState::W => w(n),
        NamedState::Cluster4 | NamedState::Dicke4 if n != 4 => {
            Err(Error::OutOfRange(format!("{name:?} is a 4-qubit state, got n = {n}")))
        }
        NamedState::Cluster4 => Ok(cluster4()),
        NamedState::Dicke4 => dicke(4, 2),
    }
}

/// p|W³⟩⟨W³| + (1−p)|000⟩⟨000|
pub fn w_loss_mixture(p: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::OutOfRange(format!("mixing weight {p} not in [0,1]")));
    }
    let w3 = w(3)?.density();
    let zero = PureState::basis(3, 0)?.density();
    DensityMatrix::mixture(&[(p, &w3), (1.0 - p, &zero)])
}

/// The mixture after diag(ε,1) on every party, with its success probability.
pub fn w_loss_filtered(p: f64, eps: f64) -> Result<(DensityMatrix, f64)> {
    apply_filter(&w_loss_mixture(p)?, &LocalFilter::uniform_diag(3, eps)?)
}

/// Lost qubits (1-based) for a closed-form reduction of a τ_min state.
pub fn loss_set(lost: usize, which: usize) -> Result<Vec<usize>> {
    match (lost, which) {
        (1, 1..=4) => Ok(vec![which]),
        (2, 1) => Ok(vec![3, 4]),
        (2, 2) => Ok(vec![2, 4]),
        (2, 3) => Ok(vec![2, 3]),
        (1, _) | (2, _) => Err(Error::OutOfRange(format!("index {which} for {lost}-particle loss"))),
        _ => Err(Error::OutOfRange(format!("closed forms exist for 1 or 2 lost particles, not {lost}"))),
    }
}

fn rank_one_pair(n: usize, v: &[f64]) -> nalgebra::DMatrix<Complex64> {
    // |v⟩⟨v| + X^{⊗n}|v⟩⟨v|X^{⊗n}; flipping every qubit maps index i to its complement.
    let d = 1 << n;
    let mask = d - 1;
    nalgebra::DMatrix::from_fn(d, d, |i, j| {
        Complex64::new(v[i] * v[j] + v[i ^ mask] * v[j ^ mask], 0.0)
    })
}

/// Closed-form reductions of τ_min states.
///
/// One loss, `which = i`: qubit i is traced out; ρᵢ³ = |ψᵢ⟩⟨ψᵢ| + |φᵢ⟩⟨φᵢ| with
/// ψᵢ = W̃ᵢ + a|111⟩ and φᵢ = X⊗³ψᵢ.
/// Two losses: `which` 1, 2, 3 keep qubit pairs (1,2), (1,3), (1,4);
/// ρᵢ² = Σ over ηᵢ, ξᵢ and their X⊗² flips.
pub fn tau_min_reduced(c: &TauMinCoords, lost: usize, which: usize) -> Result<DensityMatrix> {
    loss_set(lost, which)?;
    let (a, b, cc, d) = c.half_sums();
    let m = if lost == 1 {
        // W̃ᵢ coefficients on |001⟩, |010⟩, |100⟩.
        let w = match which {
            1 => [d, cc, b],
            2 => [cc, d, b],
            3 => [b, d, cc],
            _ => [b, cc, d],
        };
        let mut psi = [0.0; 8];
        psi[0b001] = w[0];
        psi[0b010] = w[1];
        psi[0b100] = w[2];
        psi[0b111] = a;
        rank_one_pair(3, &psi)
    } else {
        let (eta00, xi01, xi10) = match which {
            1 => (b, d, cc),
            2 => (cc, d, b),
            _ => (d, cc, b),
        };
        let eta = [eta00, 0.0, 0.0, a];
        let xi = [0.0, xi01, xi10, 0.0];
        rank_one_pair(2, &eta) + rank_one_pair(2, &xi)
    };
    DensityMatrix::new(4 - lost, m)
}

/// A generic-class state is in the τ_min family when its coordinates are real up to a global phase.
pub fn as_tau_min(c: &GenericACoords) -> Option<TauMinCoords> {
    let z = c.z;
    let lead = z.iter().max_by(|a, b| a.norm().total_cmp(&b.norm()))?;
    let phase = lead.conj() / lead.norm();
    let rot = z.map(|v| v * phase);
    if rot.iter().all(|v| v.im.abs() < 1e-12) {
        TauMinCoords::normalized(rot.map(|v| v.re)).ok()
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::partial_trace;
    use std::f64::consts::{FRAC_PI_2 as HALF_PI, PI};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn amps_close(psi: &PureState, expect: &[(usize, f64)]) -> bool {
        let mut full = [0.0; 16];
        for &(i, v) in expect {
            full[i] = v;
        }
        psi.amplitudes().iter().zip(full).all(|(a, e)| (a.re - e).abs() < 1e-14 && a.im.abs() < 1e-14)
    }

    #[test]
    fn ghz_coords_give_ghz() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let psi = tau_min_state(&TauMinCoords::ghz());
        assert!(amps_close(&psi, &[(0, s), (15, s)]));
        let g = GenericACoords::new([Complex64::new(s, 0.0), Complex64::new(s, 0.0), 0.0.into(), 0.0.into()]).unwrap();
        assert_eq!(generic_a_state(&g), psi);
    }

    #[test]
    fn dicke_coords_give_dicke() {
        let psi = tau_min_state(&TauMinCoords::dicke());
        let d = dicke(4, 2).unwrap();
        assert!(psi.inner(&d).unwrap().norm() > 1.0 - 1e-14);
        let s = 1.0 / 6f64.sqrt();
        let six: Vec<(usize, f64)> = [3, 5, 6, 9, 10, 12].iter().map(|&i| (i, s)).collect();
        assert!(amps_close(&psi, &six));
    }

    #[test]
    fn first_coordinate_is_two_bell_pairs() {
        let psi = tau_min_state(&TauMinCoords::new([1.0, 0.0, 0.0, 0.0]).unwrap());
        assert!(amps_close(&psi, &[(0, 0.5), (3, 0.5), (12, 0.5), (15, 0.5)]));
    }

    #[test]
    fn m_class_examples() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let c = MClassCoords::new([0.5, 0.5, 0.0, 0.0], [0.0, HALF_PI, 0.0, 0.0]).unwrap();
        let expect = GenericACoords::new([Complex64::new(s, 0.0), Complex64::new(0.0, s), 0.0.into(), 0.0.into()]).unwrap();
        assert!(generic_a_state(&expect).inner(&m_class_state(&c)).unwrap().norm() > 1.0 - 1e-14);
        assert!(c.as_generic().square_sum().norm() < 1e-15);
        MClassCoords::new([0.25; 4], [0.0, PI / 4.0, PI / 2.0, 3.0 * PI / 4.0]).unwrap();
        assert!(matches!(MClassCoords::new([1.0, 0.0, 0.0, 0.0], [0.3; 4]), Err(Error::Constraint(_))));
    }

    #[test]
    fn named_states() {
        let w3 = named_state(NamedState::W, 3).unwrap();
        let r = 1.0 / 3f64.sqrt();
        assert!(w3.amplitudes().iter().enumerate().all(|(i, a)| {
            let e = if [1, 2, 4].contains(&i) { r } else { 0.0 };
            (a.re - e).abs() < 1e-15
        }));
        let c = named_state(NamedState::Cluster4, 4).unwrap();
        assert!(amps_close(&c, &[(0, 0.5), (3, 0.5), (12, 0.5), (15, -0.5)]));
        let g = named_state(NamedState::Ghz, 4).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!(amps_close(&g, &[(0, s), (15, s)]));
        assert!(named_state(NamedState::Cluster4, 5).is_err());
        assert!(named_state(NamedState::W, 1).is_err());
        assert!("foo".parse::<NamedState>().is_err());
    }

    #[test]
    fn w_mixture_matches_w_reductions() {
        assert!(w_loss_mixture(1.0).unwrap().max_abs_diff(&w(3).unwrap().density()) < 1e-15);
        for n in 4..=6 {
            let wn = w(n).unwrap().density();
            let mix = w_loss_mixture(3.0 / n as f64).unwrap();
            let lost: Vec<usize> = (4..=n).collect();
            assert!(partial_trace(&wn, &lost).unwrap().max_abs_diff(&mix) < 1e-12);
            let lost: Vec<usize> = (1..=n - 3).collect();
            assert!(partial_trace(&wn, &lost).unwrap().max_abs_diff(&mix) < 1e-12);
        }
        assert!(w_loss_mixture(1.5).is_err());
    }

    #[test]
    fn filtered_mixture_weights() {
        let (p, eps) = (0.75f64, 0.1f64);
        let (rho, _) = w_loss_filtered(p, eps).unwrap();
        let q = p * eps.powi(4) / (p * eps.powi(4) + (1.0 - p) * eps.powi(6));
        let w3 = w(3).unwrap().density();
        let zero = PureState::basis(3, 0).unwrap().density();
        let expect = DensityMatrix::mixture(&[(q, &w3), (1.0 - q, &zero)]).unwrap();
        assert!(rho.max_abs_diff(&expect) < 1e-12);
        assert!((q - 0.99668).abs() < 1e-5);
    }

    #[test]
    fn ghz_closed_forms() {
        let c = TauMinCoords::ghz();
        let r = tau_min_reduced(&c, 1, 1).unwrap();
        assert!(r.max_abs_diff(&DensityMatrix::diagonal(3, &[0.5, 0., 0., 0., 0., 0., 0., 0.5]).unwrap()) < 1e-14);
        let r = tau_min_reduced(&c, 2, 1).unwrap();
        assert!(r.max_abs_diff(&DensityMatrix::diagonal(2, &[0.5, 0., 0., 0.5]).unwrap()) < 1e-14);
        assert!(tau_min_reduced(&c, 1, 5).is_err());
        assert!(tau_min_reduced(&c, 2, 4).is_err());
        assert!(tau_min_reduced(&c, 3, 1).is_err());
    }

    #[test]
    fn dicke_closed_forms() {
        let c = TauMinCoords::dicke();
        let psi = tau_min_state(&c).density();
        for which in 1..=4 {
            let direct = partial_trace(&psi, &[which]).unwrap();
            assert!(tau_min_reduced(&c, 1, which).unwrap().max_abs_diff(&direct) < 1e-12);
        }
    }

    #[test]
    fn printed_second_xi_disagrees() {
        // The coefficient pair ((x₂+x₃)/2, (x₀−x₁)/2) on |01⟩, |10⟩ does not reproduce the (1,3) marginal.
        let c = TauMinCoords::normalized([0.3, -0.5, 0.7, 0.2]).unwrap();
        let (a, b, cc, _) = c.half_sums();
        let eta = [cc, 0.0, 0.0, a];
        let xi = [0.0, cc, b, 0.0];
        let printed = DensityMatrix::from_matrix_unchecked(2, rank_one_pair(2, &eta) + rank_one_pair(2, &xi));
        let direct = partial_trace(&tau_min_state(&c).density(), &loss_set(2, 2).unwrap()).unwrap();
        assert!(printed.max_abs_diff(&direct) > 1e-3);
    }

    #[test]
    fn random_m_class_is_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let c = MClassCoords::random(&mut rng);
            assert!(c.as_generic().square_sum().norm() < 1e-10);
            assert!(c.theta().iter().all(|t| (0.0..=TAU).contains(t)));
        }
    }

    #[test]
    fn tau_min_detection_from_generic() {
        let c = TauMinCoords::dicke();
        let g = GenericACoords::new(c.as_generic().z().map(|v| v * Complex64::from_polar(1.0, 0.7))).unwrap();
        let back = as_tau_min(&g).unwrap();
        let same = back.x().iter().zip(c.x()).all(|(a, b)| (a - b).abs() < 1e-12)
            || back.x().iter().zip(c.x()).all(|(a, b)| (a + b).abs() < 1e-12);
        assert!(same);
        let m = MClassCoords::new([0.5, 0.5, 0.0, 0.0], [0.0, HALF_PI, 0.0, 0.0]).unwrap();
        assert!(as_tau_min(&m.as_generic()).is_none());
    }

    fn arb_coords() -> impl Strategy<Value = TauMinCoords> {
        proptest::array::uniform4(-1.0f64..1.0)
            .prop_filter("nonzero", |x| x.iter().map(|v| v * v).sum::<f64>() > 1e-4)
            .prop_map(|x| TauMinCoords::normalized(x).unwrap())
    }

    proptest! {
        #[test]
        fn closed_forms_match_partial_traces(c in arb_coords()) {
            let psi = tau_min_state(&c).density();
            for lost in 1..=2 {
                for which in 1..=(if lost == 1 { 4 } else { 3 }) {
                    let closed = tau_min_reduced(&c, lost, which).unwrap();
                    let direct = partial_trace(&psi, &loss_set(lost, which).unwrap()).unwrap();
                    prop_assert!(closed.max_abs_diff(&direct) < 1e-10, "lost {} which {}", lost, which);
                }
            }
        }

        #[test]
        fn generic_states_normalized(re in proptest::array::uniform4(-1.0f64..1.0), im in proptest::array::uniform4(-1.0f64..1.0)) {
            let z: [Complex64; 4] = std::array::from_fn(|j| Complex64::new(re[j], im[j]));
            let n = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            prop_assume!(n > 1e-3);
            let c = GenericACoords::new(z.map(|v| v / n)).unwrap();
            let norm: f64 = generic_a_state(&c).amplitudes().iter().map(|a| a.norm_sqr()).sum();
            prop_assert!((norm - 1.0).abs() < 1e-12);
        }
    }
}
