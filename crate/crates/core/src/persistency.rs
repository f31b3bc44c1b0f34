//! Persistency bounds: how many particles can be lost before a correlation property
//! disappears from some reduced state.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::Matrix2;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::behavior::{Behavior, Scenario};
use crate::bell::{local_membership, maximize_bell, ns2_membership, BellInequality, Membership};
use crate::entdetect::{
    certify_biseparable_3q, certify_fully_separable, detect_entanglement, detect_ge, detect_ge_3q, DetectionOutcome,
    Verdict,
};
use crate::error::{Error, Result};
use crate::optim::golden_max;
use crate::qstate::{apply_filter, behavior, partial_trace, DensityMatrix, LocalFilter, MeasurementBattery, QubitObservable};
use crate::steering::{detect_steering_2q, maximize_genuine_steering, GENUINE_BOUND};

const SYMMETRY_TOL: f64 = 1e-12;
const EPS_MIN: f64 = 1e-4;
const EPS_RESOLUTION: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PropertyKind {
    E,
    GE,
    S,
    GS,
    NL,
    GNL,
    HNL,
    HGNL,
}

impl PropertyKind {
    pub const ALL: [PropertyKind; 8] = [Self::E, Self::GE, Self::S, Self::GS, Self::NL, Self::GNL, Self::HNL, Self::HGNL];

    pub fn name(&self) -> &'static str {
        match self {
            Self::E => "E",
            Self::GE => "GE",
            Self::S => "S",
            Self::GS => "GS",
            Self::NL => "NL",
            Self::GNL => "GNL",
            Self::HNL => "HNL",
            Self::HGNL => "HGNL",
        }
    }

    /// Reduced-state sizes with a detector.
    pub fn supports(&self, arity: usize) -> bool {
        match self {
            Self::E | Self::S => arity >= 2,
            _ => arity == 2 || arity == 3,
        }
    }
}

impl fmt::Display for PropertyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PropertyKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Parse(format!("unknown property {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PersistencyOptions {
    /// Random two-setting batteries tried per reduction by the nonlocality detectors.
    pub batteries: usize,
    /// See-saw restarts per optimization.
    pub restarts: usize,
    pub seed: u64,
    /// Evaluate one subset per size when the state is permutation symmetric.
    pub use_symmetry: bool,
    /// Single-site filter applied to every party for the hidden kinds, replacing the
    /// diag(ε,1) search.
    pub filter: Option<Matrix2<Complex64>>,
}

impl Default for PersistencyOptions {
    fn default() -> Self {
        Self { batteries: 32, restarts: 16, seed: 0, use_symmetry: true, filter: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum UpperBound {
    Certified(usize),
    /// Some reduction at this loss count was neither detected nor certified absent.
    Uncertified { at_k: usize },
}

impl UpperBound {
    pub fn certified(&self) -> Option<usize> {
        match self {
            Self::Certified(u) => Some(*u),
            Self::Uncertified { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetOutcome {
    /// Lost qubits, 1-based.
    pub lost: Vec<usize>,
    pub outcome: DetectionOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersistencyReport {
    pub kind: PropertyKind,
    pub n_qubits: usize,
    pub state_id: String,
    pub lower: usize,
    pub upper: UpperBound,
    pub witness_per_k: BTreeMap<usize, SubsetOutcome>,
    pub evaluations: BTreeMap<usize, Vec<SubsetOutcome>>,
}

/// FNV-1a over the matrix entries rounded to 1e-9.
pub fn state_id(rho: &DensityMatrix) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |x: i64| {
        for b in x.to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    };
    eat(rho.n_qubits() as i64);
    for z in rho.matrix().iter() {
        eat((z.re * 1e9).round() as i64);
        eat((z.im * 1e9).round() as i64);
    }
    format!("{h:016x}")
}

/// k-subsets of 1..=n in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for q in start..=n {
            cur.push(q);
            rec(q + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(1, n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

fn mix_seed(seed: u64, a: usize, b: usize) -> u64 {
    seed.wrapping_add(((a as u64) << 32) | b as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ seed
}

fn chsh_on(parties: usize, p: usize, q: usize) -> BellInequality {
    let l = |k: usize| (b'A' + k as u8) as char;
    let labels = [(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, -1.0)].map(|(x, y, c)| (format!("{}{x}{}{y}", l(p), l(q)), c));
    let scenario = Scenario::new(parties, 2, 2).expect("small scenario");
    BellInequality::new(scenario, labels.iter().map(|(s, c)| (s.as_str(), *c)), 2.0).expect("valid labels")
}

const PERMS3: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

fn b16_family() -> Vec<BellInequality> {
    let b = BellInequality::b16();
    PERMS3.iter().map(|p| b.permuted(p).expect("permutation")).collect()
}

/// Inequalities whose see-saw batteries seed the nonlocality searches.
fn probe_inequalities(arity: usize, genuine: bool) -> Vec<BellInequality> {
    match (arity, genuine) {
        (2, _) => vec![BellInequality::chsh()],
        (_, true) => b16_family(),
        _ => {
            let mut v = vec![chsh_on(3, 0, 1), chsh_on(3, 0, 2), chsh_on(3, 1, 2)];
            v.extend(b16_family());
            v
        }
    }
}

fn random_battery(rng: &mut ChaCha8Rng, parties: usize) -> Result<MeasurementBattery> {
    let mut unit = || -> Result<QubitObservable> {
        let v: [f64; 3] = [0; 3].map(|_| StandardNormal.sample(&mut *rng));
        QubitObservable::along(v)
    };
    let mut ps = Vec::with_capacity(parties);
    for _ in 0..parties {
        ps.push(vec![unit()?, unit()?]);
    }
    MeasurementBattery::new(ps)
}

/// Searches for a behavior outside the model polytope: see-saw batteries first, then
/// random ones.
fn nonlocal_behavior(rho: &DensityMatrix, genuine: bool, opts: &PersistencyOptions, seed: u64) -> Result<Option<String>> {
    let m = rho.n_qubits();
    let member = |b: &Behavior| -> Result<Membership> {
        if genuine && m == 3 { ns2_membership(b) } else { local_membership(b) }
    };
    let polytope = if genuine && m == 3 { "NS₂" } else { "local" };
    for (i, ineq) in probe_inequalities(m, genuine).iter().enumerate() {
        let (v, bat) = maximize_bell(ineq, rho, opts.restarts.max(1), mix_seed(seed, 1, i))?;
        if member(&behavior(rho, &bat)?)? == Membership::Outside {
            return Ok(Some(format!("see-saw battery (inequality value {v:.6}) lies outside the {polytope} polytope")));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, 2, 0));
    for j in 0..opts.batteries {
        let bat = random_battery(&mut rng, m)?;
        if member(&behavior(rho, &bat)?)? == Membership::Outside {
            return Ok(Some(format!("random battery {j} lies outside the {polytope} polytope")));
        }
    }
    Ok(None)
}

fn absence_certificate(rho: &DensityMatrix, genuine: bool) -> Option<String> {
    if genuine && rho.n_qubits() == 3 {
        certify_biseparable_3q(rho).map(|c| format!("biseparable: {c}"))
    } else {
        certify_fully_separable(rho).map(|c| format!("separable: {c}"))
    }
}

fn detect_nonlocality(rho: &DensityMatrix, genuine: bool, opts: &PersistencyOptions, seed: u64) -> Result<DetectionOutcome> {
    if let Some(c) = absence_certificate(rho, genuine) {
        return Ok(DetectionOutcome::absent(c));
    }
    Ok(match nonlocal_behavior(rho, genuine, opts, seed)? {
        Some(e) => DetectionOutcome::detected(e),
        None => DetectionOutcome::undetected(format!(
            "{} see-saw and {} random batteries all inside the polytope",
            probe_inequalities(rho.n_qubits(), genuine).len(),
            opts.batteries
        )),
    })
}

/// Largest see-saw violation margin over the probe inequalities.
fn probe_margin(rho: &DensityMatrix, genuine: bool, restarts: usize, seed: u64) -> f64 {
    probe_inequalities(rho.n_qubits(), genuine)
        .iter()
        .enumerate()
        .filter_map(|(i, ineq)| maximize_bell(ineq, rho, restarts, mix_seed(seed, 3, i)).ok().map(|(v, _)| v - ineq.bound()))
        .fold(f64::NEG_INFINITY, f64::max)
}

fn detect_hidden(rho: &DensityMatrix, genuine: bool, opts: &PersistencyOptions, seed: u64) -> Result<DetectionOutcome> {
    if let Some(c) = absence_certificate(rho, genuine) {
        return Ok(DetectionOutcome::absent(format!("{c}; preserved by local filters")));
    }
    let m = rho.n_qubits();
    let (filtered, label) = match &opts.filter {
        Some(op) => {
            let f = LocalFilter::new(vec![*op; m])?;
            (apply_filter(rho, &f)?.0, "custom filter".to_string())
        }
        None => {
            let restarts = opts.restarts.clamp(1, 8);
            let objective = |eps: f64| match LocalFilter::uniform_diag(m, eps).and_then(|f| apply_filter(rho, &f)) {
                Ok((r, _)) => probe_margin(&r, genuine, restarts, seed),
                Err(_) => f64::NEG_INFINITY,
            };
            let (eps, _) = golden_max(objective, EPS_MIN, 1.0, EPS_RESOLUTION);
            (apply_filter(rho, &LocalFilter::uniform_diag(m, eps)?)?.0, format!("diag({eps:.4e},1) filter"))
        }
    };
    let out = detect_nonlocality(&filtered, genuine, opts, seed)?;
    Ok(match out.verdict {
        Verdict::Detected => DetectionOutcome::detected(format!("after {label}: {}", out.evidence)),
        _ => DetectionOutcome::undetected(format!("after {label}: {}", out.evidence)),
    })
}

fn detect_steering(rho: &DensityMatrix, opts: &PersistencyOptions, seed: u64) -> Result<DetectionOutcome> {
    let m = rho.n_qubits();
    if m == 2 {
        let v = detect_steering_2q(rho)?;
        let e = v.to_string();
        return Ok(match v.verdict {
            Verdict::Detected => DetectionOutcome::detected(e),
            Verdict::CertifiedAbsent => DetectionOutcome::absent(e),
            Verdict::Undetected => DetectionOutcome::undetected(e),
        });
    }
    if let Some(c) = certify_fully_separable(rho) {
        return Ok(DetectionOutcome::absent(format!("separable: {c}")));
    }
    let mut best: Option<f64> = None;
    for pair in subsets(m, 2) {
        let lost: Vec<usize> = (1..=m).filter(|q| !pair.contains(q)).collect();
        let v = detect_steering_2q(&partial_trace(rho, &lost)?)?;
        if v.is_detected() {
            return Ok(DetectionOutcome::detected(format!("marginal on qubits {pair:?}: {v}")));
        }
        if v.verdict == Verdict::Undetected {
            best = Some(best.map_or(v.value, |b: f64| b.max(v.value)));
        }
    }
    if m == 3 {
        let gs = detect_genuine_steering(rho, opts, seed)?;
        if gs.is_detected() {
            return Ok(DetectionOutcome::detected(format!("genuine steering detected: {}", gs.evidence)));
        }
    }
    Ok(DetectionOutcome::undetected(match best {
        Some(b) => format!("no two-qubit marginal detected, best margin {b:.6}"),
        None => "every two-qubit marginal is PPT".to_string(),
    }))
}

fn detect_genuine_steering(rho: &DensityMatrix, opts: &PersistencyOptions, seed: u64) -> Result<DetectionOutcome> {
    if rho.n_qubits() == 2 {
        return detect_steering(rho, opts, seed);
    }
    let ge = detect_ge_3q(rho)?;
    if ge.verdict == Verdict::CertifiedAbsent {
        return Ok(DetectionOutcome::absent(format!("biseparable: {}", ge.evidence)));
    }
    let (v, _) = maximize_genuine_steering(rho, opts.restarts.max(1), mix_seed(seed, 4, 0))?;
    Ok(if v > GENUINE_BOUND && ge.is_detected() {
        DetectionOutcome::detected(format!("steering value {v:.6} > 3 and genuinely entangled ({})", ge.evidence))
    } else {
        DetectionOutcome::undetected(format!("steering value {v:.6}; genuine entanglement: {:?}", ge.verdict))
    })
}

/// Runs the detector for `kind` on one reduced state.
pub fn detect_property(rho: &DensityMatrix, kind: PropertyKind, opts: &PersistencyOptions, seed: u64) -> Result<DetectionOutcome> {
    let m = rho.n_qubits();
    if !kind.supports(m) {
        return Err(Error::NoDetector { kind: kind.name().into(), arity: m });
    }
    match kind {
        PropertyKind::E => Ok(detect_entanglement(rho)),
        PropertyKind::GE => detect_ge(rho),
        PropertyKind::S => detect_steering(rho, opts, seed),
        PropertyKind::GS => detect_genuine_steering(rho, opts, seed),
        PropertyKind::NL => detect_nonlocality(rho, false, opts, seed),
        PropertyKind::GNL => detect_nonlocality(rho, true, opts, seed),
        PropertyKind::HNL => detect_hidden(rho, false, opts, seed),
        PropertyKind::HGNL => detect_hidden(rho, true, opts, seed),
    }
}

/// Certified bounds on the persistency of `kind`.
///
/// Loss counts k = 1, 2, … are scanned: a level where every reduction is detected raises
/// the lower bound to k+1; a reduction certified absent fixes the upper bound at k; an
/// undecided reduction leaves the upper bound uncertified.
pub fn persistency_bounds(rho: &DensityMatrix, kind: PropertyKind, opts: &PersistencyOptions) -> Result<PersistencyReport> {
    let n = rho.n_qubits();
    if n < 2 {
        return Err(Error::OutOfRange(format!("persistency needs at least 2 qubits, got {n}")));
    }
    let symmetric = opts.use_symmetry && rho.is_permutation_symmetric(SYMMETRY_TOL);
    let mut report = PersistencyReport {
        kind,
        n_qubits: n,
        state_id: state_id(rho),
        lower: 1,
        upper: UpperBound::Certified(n - 1),
        witness_per_k: BTreeMap::new(),
        evaluations: BTreeMap::new(),
    };
    for k in 1..n - 1 {
        if !kind.supports(n - k) {
            return Err(Error::NoDetector { kind: kind.name().into(), arity: n - k });
        }
        let subs = subsets(n, k);
        let eval = |i: usize, lost: &Vec<usize>| -> Result<SubsetOutcome> {
            let reduced = partial_trace(rho, lost)?;
            let outcome = detect_property(&reduced, kind, opts, mix_seed(opts.seed, k, i))?;
            Ok(SubsetOutcome { lost: lost.clone(), outcome })
        };
        let outcomes: Vec<SubsetOutcome> = if symmetric {
            let first = eval(0, &subs[0])?;
            let mut v = vec![first.clone()];
            for lost in &subs[1..] {
                let mut o = first.outcome.clone();
                o.evidence = format!("by permutation symmetry with {:?}: {}", first.lost, o.evidence);
                v.push(SubsetOutcome { lost: lost.clone(), outcome: o });
            }
            v
        } else {
            subs.par_iter().enumerate().map(|(i, s)| eval(i, s)).collect::<Result<_>>()?
        };
        let absent = outcomes.iter().find(|o| o.outcome.verdict == Verdict::CertifiedAbsent).cloned();
        let undecided = outcomes.iter().find(|o| o.outcome.verdict == Verdict::Undetected).cloned();
        let first = outcomes[0].clone();
        report.evaluations.insert(k, outcomes);
        if let Some(w) = absent {
            report.upper = UpperBound::Certified(k);
            report.witness_per_k.insert(k, w);
            return Ok(report);
        }
        if let Some(w) = undecided {
            report.upper = UpperBound::Uncertified { at_k: k };
            report.witness_per_k.insert(k, w);
            return Ok(report);
        }
        report.lower = k + 1;
        report.witness_per_k.insert(k, first);
    }
    Ok(report)
}

/// Ordered pairs (X, Y) with P_X ≥ P_Y for every state.
pub const HIERARCHY: [(PropertyKind, PropertyKind); 14] = {
    use PropertyKind::*;
    [
        (E, GE),
        (E, S),
        (E, HNL),
        (HNL, NL),
        (S, NL),
        (E, NL),
        (GE, GS),
        (GE, HGNL),
        (HGNL, GNL),
        (GS, GNL),
        (GE, GNL),
        (S, GS),
        (NL, GNL),
        (HNL, HGNL),
    ]
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HierarchyViolation {
    pub stronger: PropertyKind,
    pub weaker: PropertyKind,
    pub upper: usize,
    pub lower: usize,
}

impl fmt::Display for HierarchyViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "P_{} ≤ {} contradicts P_{} ≥ {}",
            self.stronger, self.upper, self.weaker, self.lower
        )
    }
}

/// Pairs where a certified upper bound of the larger persistency is below a lower bound of
/// the smaller one. Uncertified upper bounds are never compared.
pub fn hierarchy_validate(reports: &[PersistencyReport]) -> Result<Vec<HierarchyViolation>> {
    if let Some(first) = reports.first() {
        if reports.iter().any(|r| r.state_id != first.state_id || r.n_qubits != first.n_qubits) {
            return Err(Error::MixedStates);
        }
    }
    let mut out = Vec::new();
    for (strong, weak) in HIERARCHY {
        for s in reports.iter().filter(|r| r.kind == strong) {
            let Some(upper) = s.upper.certified() else { continue };
            for w in reports.iter().filter(|r| r.kind == weak) {
                if upper < w.lower {
                    out.push(HierarchyViolation { stronger: strong, weaker: weak, upper, lower: w.lower });
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{dicke, ghz, w};

    fn fast() -> PersistencyOptions {
        PersistencyOptions { batteries: 8, restarts: 8, seed: 3, ..Default::default() }
    }

    #[test]
    fn subset_enumeration() {
        assert_eq!(subsets(4, 2), vec![vec![1, 2], vec![1, 3], vec![1, 4], vec![2, 3], vec![2, 4], vec![3, 4]]);
        assert_eq!(subsets(3, 0), vec![Vec::<usize>::new()]);
        assert_eq!(subsets(5, 3).len(), 10);
    }

    #[test]
    fn kind_names() {
        for k in PropertyKind::ALL {
            assert_eq!(k.name().parse::<PropertyKind>().unwrap(), k);
        }
        assert_eq!("hgnl".parse::<PropertyKind>().unwrap(), PropertyKind::HGNL);
        assert!("X".parse::<PropertyKind>().is_err());
    }

    #[test]
    fn ghz4_entanglement() {
        let rho = ghz(4).unwrap().density();
        for kind in [PropertyKind::E, PropertyKind::GE] {
            let r = persistency_bounds(&rho, kind, &fast()).unwrap();
            assert_eq!((r.lower, r.upper), (1, UpperBound::Certified(1)), "{kind}");
            assert_eq!(r.witness_per_k[&1].outcome.verdict, Verdict::CertifiedAbsent);
        }
    }

    #[test]
    fn dicke_ge_is_maximal() {
        let r = persistency_bounds(&dicke(4, 2).unwrap().density(), PropertyKind::GE, &fast()).unwrap();
        assert_eq!((r.lower, r.upper), (3, UpperBound::Certified(3)));
        for k in 1..3 {
            assert!(r.evaluations[&k].iter().all(|o| o.outcome.is_detected()));
            assert_eq!(r.evaluations[&k].len(), subsets(4, k).len());
        }
    }

    #[test]
    fn symmetry_shortcut_agrees() {
        let rho = w(4).unwrap().density();
        let a = persistency_bounds(&rho, PropertyKind::E, &fast()).unwrap();
        let b = persistency_bounds(&rho, PropertyKind::E, &PersistencyOptions { use_symmetry: false, ..fast() }).unwrap();
        assert_eq!((a.lower, a.upper), (b.lower, b.upper));
        assert_eq!((a.lower, a.upper), (3, UpperBound::Certified(3)));
        for (k, outs) in &b.evaluations {
            for (x, y) in outs.iter().zip(&a.evaluations[k]) {
                assert_eq!(x.outcome.verdict, y.outcome.verdict);
            }
        }
    }

    #[test]
    fn w4_genuine_steering_is_interval() {
        let r = persistency_bounds(&w(4).unwrap().density(), PropertyKind::GS, &fast()).unwrap();
        assert_eq!(r.lower, 2);
        assert_eq!(r.upper, UpperBound::Uncertified { at_k: 2 });
    }

    #[test]
    fn w4_steering_follows_genuine_steering() {
        let r = persistency_bounds(&w(4).unwrap().density(), PropertyKind::S, &fast()).unwrap();
        assert_eq!((r.lower, r.upper), (2, UpperBound::Uncertified { at_k: 2 }));
    }

    #[test]
    fn missing_detector() {
        let rho = ghz(5).unwrap().density();
        assert!(matches!(
            persistency_bounds(&rho, PropertyKind::GE, &fast()),
            Err(Error::NoDetector { arity: 4, .. })
        ));
        assert!(persistency_bounds(&DensityMatrix::maximally_mixed(1).unwrap(), PropertyKind::E, &fast()).is_err());
        let r = persistency_bounds(&rho, PropertyKind::E, &fast()).unwrap();
        assert_eq!((r.lower, r.upper), (1, UpperBound::Certified(1)));
    }

    #[test]
    fn two_qubit_states() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let phi = crate::qstate::PureState::from_real(2, &[s, 0.0, 0.0, s]).unwrap().density();
        let r = persistency_bounds(&phi, PropertyKind::NL, &fast()).unwrap();
        assert_eq!((r.lower, r.upper), (1, UpperBound::Certified(1)));
        let out = detect_property(&phi, PropertyKind::NL, &fast(), 0).unwrap();
        assert!(out.is_detected(), "{out}");
        let out = detect_property(&DensityMatrix::maximally_mixed(2).unwrap(), PropertyKind::HNL, &fast(), 0).unwrap();
        assert_eq!(out.verdict, Verdict::CertifiedAbsent);
    }

    #[test]
    fn determinism() {
        let rho = crate::families::w_loss_mixture(0.75).unwrap();
        let a = detect_property(&rho, PropertyKind::GNL, &fast(), 5).unwrap();
        let b = detect_property(&rho, PropertyKind::GNL, &fast(), 5).unwrap();
        assert_eq!(a, b);
    }

    fn report(kind: PropertyKind, lower: usize, upper: UpperBound) -> PersistencyReport {
        PersistencyReport {
            kind,
            n_qubits: 4,
            state_id: "s".into(),
            lower,
            upper,
            witness_per_k: BTreeMap::new(),
            evaluations: BTreeMap::new(),
        }
    }

    #[test]
    fn hierarchy_checks() {
        use PropertyKind::*;
        let ok = [report(E, 1, UpperBound::Certified(1)), report(S, 1, UpperBound::Certified(1))];
        assert!(hierarchy_validate(&ok).unwrap().is_empty());
        let bad = [report(E, 1, UpperBound::Certified(1)), report(S, 2, UpperBound::Uncertified { at_k: 2 })];
        let v = hierarchy_validate(&bad).unwrap();
        assert_eq!(v, vec![HierarchyViolation { stronger: E, weaker: S, upper: 1, lower: 2 }]);
        let exempt = [report(GE, 3, UpperBound::Uncertified { at_k: 3 }), report(GS, 2, UpperBound::Uncertified { at_k: 2 })];
        assert!(hierarchy_validate(&exempt).unwrap().is_empty());
        let mut other = report(E, 1, UpperBound::Certified(1));
        other.state_id = "t".into();
        assert!(matches!(hierarchy_validate(&[ok[0].clone(), other]), Err(Error::MixedStates)));
    }

    #[test]
    fn ghz4_batch_is_consistent() {
        let rho = ghz(4).unwrap().density();
        let reports: Vec<_> = [PropertyKind::E, PropertyKind::S]
            .iter()
            .map(|&k| persistency_bounds(&rho, k, &fast()).unwrap())
            .collect();
        assert!(hierarchy_validate(&reports).unwrap().is_empty());
    }
}
