//! Correlator Bell inequalities: evaluation, see-saw maximization, closed forms and
//! LP membership for the local and NS₂ polytopes.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::Vector3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::behavior::{Behavior, Scenario};
use crate::error::{Error, Result};
use crate::families::TauMinCoords;
use crate::lp::{feasible, Feasibility};
use crate::qstate::{CorrelationTensor, DensityMatrix, MeasurementBattery, QubitObservable};

/// Best B₁₆ value reached by |W³⟩.
pub const W3_B16_MAX: f64 = 4.72678;
pub const DEFAULT_RESTARTS: usize = 64;
const SEESAW_TOL: f64 = 1e-10;
const SEESAW_MAX_SWEEPS: usize = 1000;

/// One correlator: the setting used by each party, `None` for absent parties.
pub type Term = Vec<Option<usize>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawInequality", into = "RawInequality")]
pub struct BellInequality {
    scenario: Scenario,
    terms: Vec<(Term, f64)>,
    bound: f64,
}

#[derive(Serialize, Deserialize)]
struct RawInequality {
    scenario: Scenario,
    coefficients: BTreeMap<String, f64>,
    bound: f64,
}

impl TryFrom<RawInequality> for BellInequality {
    type Error = Error;
    fn try_from(r: RawInequality) -> Result<Self> {
        Self::new(r.scenario, r.coefficients.iter().map(|(k, v)| (k.as_str(), *v)), r.bound)
    }
}

impl From<BellInequality> for RawInequality {
    fn from(b: BellInequality) -> Self {
        Self { scenario: b.scenario, coefficients: b.coefficients().into_iter().collect(), bound: b.bound }
    }
}

fn party_letter(k: usize) -> char {
    (b'A' + k as u8) as char
}

/// Parses `A1B0C1`-style labels into per-party settings.
pub fn parse_label(label: &str, scenario: &Scenario) -> Result<Term> {
    let mut term = vec![None; scenario.parties];
    let chars: Vec<char> = label.chars().collect();
    let mut i = 0;
    if chars.is_empty() {
        return Err(Error::Parse("empty correlator label".into()));
    }
    while i < chars.len() {
        let c = chars[i];
        if !c.is_ascii_uppercase() {
            return Err(Error::Parse(format!("bad party letter {c:?} in {label:?}")));
        }
        let k = (c as u8 - b'A') as usize;
        if k >= scenario.parties {
            return Err(Error::Parse(format!("party {c} outside a {}-party scenario", scenario.parties)));
        }
        i += 1;
        let start = i;
        while i < chars.len() && chars[i].is_ascii_digit() {
            i += 1;
        }
        if start == i {
            return Err(Error::Parse(format!("party {c} has no setting in {label:?}")));
        }
        let s: usize = chars[start..i].iter().collect::<String>().parse().map_err(|_| Error::Parse(label.into()))?;
        if s >= scenario.settings {
            return Err(Error::Parse(format!("setting {s} of party {c} outside 0..{}", scenario.settings)));
        }
        if term[k].replace(s).is_some() {
            return Err(Error::Parse(format!("party {c} repeated in {label:?}")));
        }
    }
    Ok(term)
}

pub fn term_label(term: &[Option<usize>]) -> String {
    term.iter()
        .enumerate()
        .filter_map(|(k, s)| s.map(|s| format!("{}{s}", party_letter(k))))
        .collect()
}

impl BellInequality {
    pub fn new<'a, I>(scenario: Scenario, coefficients: I, bound: f64) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, f64)>,
    {
        if scenario.outcomes != 2 {
            return Err(Error::ScenarioMismatch("correlator inequalities need two outcomes".into()));
        }
        if !bound.is_finite() {
            return Err(Error::Parse(format!("bound {bound} is not finite")));
        }
        let mut terms: Vec<(Term, f64)> = Vec::new();
        for (label, c) in coefficients {
            if !c.is_finite() {
                return Err(Error::Parse(format!("coefficient of {label} is not finite")));
            }
            let t = parse_label(label, &scenario)?;
            if terms.iter().any(|(u, _)| *u == t) {
                return Err(Error::Parse(format!("correlator {label} listed twice")));
            }
            terms.push((t, c));
        }
        terms.sort_by_key(|(t, _)| correlator_index(t, scenario.settings));
        Ok(Self { scenario, terms, bound })
    }

    /// Reads the text format: `scenario P S O`, `bound r`, then `coef LABEL r` lines.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty());
        let nums = |l: Option<&str>, key: &str, count: usize| -> Result<Vec<String>> {
            let l = l.ok_or_else(|| Error::Parse(format!("missing `{key}` line")))?;
            let mut it = l.split_whitespace();
            if it.next() != Some(key) {
                return Err(Error::Parse(format!("expected `{key}`, found {l:?}")));
            }
            let v: Vec<String> = it.map(String::from).collect();
            if v.len() != count {
                return Err(Error::Parse(format!("`{key}` takes {count} values: {l:?}")));
            }
            Ok(v)
        };
        let sc = nums(lines.next(), "scenario", 3)?;
        let sc: Vec<usize> = sc
            .iter()
            .map(|s| s.parse().map_err(|_| Error::Parse(format!("bad scenario value {s:?}"))))
            .collect::<Result<_>>()?;
        let scenario = Scenario::new(sc[0], sc[1], sc[2])?;
        let b = nums(lines.next(), "bound", 1)?;
        let bound: f64 = b[0].parse().map_err(|_| Error::Parse(format!("bad bound {:?}", b[0])))?;
        let mut coefs = Vec::new();
        for l in lines {
            let v = nums(Some(l), "coef", 2)?;
            let c: f64 = v[1].parse().map_err(|_| Error::Parse(format!("bad coefficient {:?}", v[1])))?;
            coefs.push((v[0].clone(), c));
        }
        Self::new(scenario, coefs.iter().map(|(l, c)| (l.as_str(), *c)), bound)
    }

    pub fn to_text(&self) -> String {
        let s = &self.scenario;
        let mut out = format!("scenario {} {} {}\nbound {}\n", s.parties, s.settings, s.outcomes, self.bound);
        for (t, c) in &self.terms {
            out.push_str(&format!("coef {} {}\n", term_label(t), c));
        }
        out
    }

    pub fn chsh() -> Self {
        Self::from_text(include_str!("../data/chsh.ineq")).expect("shipped inequality")
    }

    /// B0C0 + B0C1 + B1C0 − B1C1 ≤ 2 in the three-party scenario.
    pub fn facet4() -> Self {
        Self::from_text(include_str!("../data/facet4.ineq")).expect("shipped inequality")
    }

    /// The NS₂ facet B₁₆ ≤ 4.
    pub fn b16() -> Self {
        Self::from_text(include_str!("../data/b16.ineq")).expect("shipped inequality")
    }

    /// B₁₆ with +A0B1 and no A0B1C0 term. Not a valid NS₂ inequality: its local
    /// maximum is 7. Kept for reference.
    pub fn b16_printed() -> Self {
        Self::from_text(include_str!("../data/b16_printed.ineq")).expect("shipped inequality")
    }

    /// Built-in inequality by name: `chsh`, `facet4` or `b16`.
    pub fn builtin(name: &str) -> Result<Self> {
        match name {
            "chsh" => Ok(Self::chsh()),
            "facet4" => Ok(Self::facet4()),
            "b16" => Ok(Self::b16()),
            _ => Err(Error::Parse(format!("unknown inequality {name:?}"))),
        }
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn terms(&self) -> &[(Term, f64)] {
        &self.terms
    }

    pub fn coefficients(&self) -> Vec<(String, f64)> {
        self.terms.iter().map(|(t, c)| (term_label(t), *c)).collect()
    }

    /// Same inequality with old party `k` played by party `order[k]` (0-based).
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        let n = self.scenario.parties;
        let mut seen = vec![false; n];
        if order.len() != n || order.iter().any(|&k| k >= n || std::mem::replace(&mut seen[k], true)) {
            return Err(Error::InvalidSubset(format!("{order:?} is not a permutation of {n} parties")));
        }
        let mut terms: Vec<(Term, f64)> = self
            .terms
            .iter()
            .map(|(t, c)| {
                let mut u = vec![None; n];
                for (k, s) in t.iter().enumerate() {
                    u[order[k]] = *s;
                }
                (u, *c)
            })
            .collect();
        terms.sort_by_key(|(t, _)| correlator_index(t, self.scenario.settings));
        Ok(Self { scenario: self.scenario, terms, bound: self.bound })
    }

    /// Σ |coefficient|, the largest value any behavior can give.
    pub fn algebraic_max(&self) -> f64 {
        self.terms.iter().map(|(_, c)| c.abs()).sum()
    }

    /// Value on a vector of correlators indexed as in [`correlator_terms`].
    pub fn value_on_correlators(&self, corr: &[f64]) -> f64 {
        self.terms.iter().map(|(t, c)| c * corr[correlator_index(t, self.scenario.settings)]).sum()
    }
}

impl fmt::Display for BellInequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

pub fn evaluate_bell(ineq: &BellInequality, b: &Behavior) -> Result<f64> {
    if ineq.scenario != b.scenario() {
        return Err(Error::ScenarioMismatch(format!("inequality {:?} vs behavior {:?}", ineq.scenario, b.scenario())));
    }
    Ok(ineq.terms.iter().map(|(t, c)| c * b.correlator(t)).sum())
}

fn term_weights(term: &[Option<usize>], settings: &[Vec<Vector3<f64>>]) -> Vec<[f64; 4]> {
    term.iter()
        .enumerate()
        .map(|(k, s)| match s {
            Some(s) => {
                let v = settings[k][*s];
                [0.0, v[0], v[1], v[2]]
            }
            None => [1.0, 0.0, 0.0, 0.0],
        })
        .collect()
}

fn value_with(ineq: &BellInequality, t: &CorrelationTensor, settings: &[Vec<Vector3<f64>>]) -> f64 {
    ineq.terms.iter().map(|(term, c)| c * t.contract(&term_weights(term, settings))).sum()
}

fn check_parties(ineq: &BellInequality, rho: &DensityMatrix) -> Result<()> {
    if ineq.scenario.parties != rho.n_qubits() {
        return Err(Error::ScenarioMismatch(format!(
            "{}-party inequality on a {}-qubit state",
            ineq.scenario.parties,
            rho.n_qubits()
        )));
    }
    Ok(())
}

/// Inequality value of ρ measured with `battery`, computed from the correlation tensor.
pub fn bell_value(ineq: &BellInequality, rho: &DensityMatrix, battery: &MeasurementBattery) -> Result<f64> {
    check_parties(ineq, rho)?;
    if battery.n_parties() != ineq.scenario.parties
        || battery.parties().iter().any(|p| p.len() != ineq.scenario.settings)
    {
        return Err(Error::ScenarioMismatch("battery shape does not match the inequality".into()));
    }
    let settings: Vec<Vec<Vector3<f64>>> =
        battery.parties().iter().map(|p| p.iter().map(|o| o.vector()).collect()).collect();
    Ok(value_with(ineq, &CorrelationTensor::new(rho), &settings))
}

fn random_unit(rng: &mut ChaCha8Rng) -> Vector3<f64> {
    loop {
        let v = Vector3::from_fn(|_, _| StandardNormal.sample(rng));
        let n: f64 = v.norm();
        if n > 1e-8 {
            return v / n;
        }
    }
}

fn seesaw_from(ineq: &BellInequality, t: &CorrelationTensor, mut settings: Vec<Vec<Vector3<f64>>>) -> (f64, Vec<Vec<Vector3<f64>>>) {
    let n = ineq.scenario.parties;
    let mut value = value_with(ineq, t, &settings);
    for _ in 0..SEESAW_MAX_SWEEPS {
        for k in 0..n {
            for s in 0..ineq.scenario.settings {
                let mut g = Vector3::zeros();
                for (term, c) in &ineq.terms {
                    if term[k] == Some(s) {
                        let r = t.contract_except(&term_weights(term, &settings), k);
                        g += *c * Vector3::new(r[1], r[2], r[3]);
                    }
                }
                let norm = g.norm();
                if norm > 1e-14 {
                    settings[k][s] = g / norm;
                }
            }
        }
        let next = value_with(ineq, t, &settings);
        let gain = next - value;
        value = next;
        if gain < SEESAW_TOL {
            break;
        }
    }
    (value, settings)
}

/// Seed of restart `r`, derived from the master seed.
fn restart_rng(seed: u64, r: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(r as u64);
    rng
}

/// See-saw ascent from `restarts` random starts. Restarts run in parallel and the best
/// value wins, ties going to the earliest restart, so the result depends only on `seed`.
pub fn maximize_bell(
    ineq: &BellInequality,
    rho: &DensityMatrix,
    restarts: usize,
    seed: u64,
) -> Result<(f64, MeasurementBattery)> {
    check_parties(ineq, rho)?;
    if restarts == 0 {
        return Err(Error::OutOfRange("at least one restart is needed".into()));
    }
    let t = CorrelationTensor::new(rho);
    let (n, ns) = (ineq.scenario.parties, ineq.scenario.settings);
    let runs: Vec<(f64, Vec<Vec<Vector3<f64>>>)> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = restart_rng(seed, r);
            let start = (0..n).map(|_| (0..ns).map(|_| random_unit(&mut rng)).collect()).collect();
            seesaw_from(ineq, &t, start)
        })
        .collect();
    let mut best = &runs[0];
    for run in &runs[1..] {
        if run.0 > best.0 {
            best = run;
        }
    }
    let parties = best
        .1
        .iter()
        .map(|p| p.iter().map(QubitObservable::from_vector).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    Ok((best.0, MeasurementBattery::new(parties)?))
}

fn sqrt_max(pairs: [(f64, f64); 3], scale: f64) -> f64 {
    pairs.iter().map(|(u, v)| scale * (u * u + v * v).sqrt()).fold(f64::NEG_INFINITY, f64::max)
}

fn closed_a2(x: [f64; 4]) -> f64 {
    let [x0, x1, x2, _] = x;
    let (s0, s1, s2) = (x0 * x0, x1 * x1, x2 * x2);
    sqrt_max(
        [
            (1.0 - 2.0 * s0 - 2.0 * s2, 1.0 - 2.0 * s1 - 2.0 * s2),
            (1.0 - 2.0 * s1 - 2.0 * s0, 1.0 - 2.0 * s2 - 2.0 * s0),
            (1.0 - 2.0 * s0 - 2.0 * s1, 1.0 - 2.0 * s2 - 2.0 * s1),
        ],
        2.0,
    )
}

fn closed_a3(x: [f64; 4]) -> f64 {
    let [x0, x1, x2, x3] = x;
    sqrt_max(
        [
            (x0 * x2 + x1 * x3, x1 * x2 + x0 * x3),
            (x0 * x1 + x2 * x3, x1 * x2 + x0 * x3),
            (x0 * x2 + x1 * x3, x1 * x0 + x2 * x3),
        ],
        4.0,
    )
}

fn closed_a4(x: [f64; 4]) -> f64 {
    let [x0, x1, x2, x3] = x;
    sqrt_max(
        [
            (x0 * x1 - x2 * x3, x0 * x2 - x1 * x3),
            (x0 * x2 - x1 * x3, x1 * x2 - x0 * x3),
            (x1 * x2 - x0 * x3, x1 * x0 - x2 * x3),
        ],
        4.0,
    )
}

/// Largest facet-4 value reachable by the three-qubit reduction with qubit `which` lost.
///
/// Losing qubit 1 or 2 leaves the facet acting on qubits (3,4), so both use the same
/// expression.
pub fn facet4_closed_max(c: &TauMinCoords, which: usize) -> Result<f64> {
    let x = c.x();
    match which {
        1 | 2 => Ok(closed_a2(x)),
        3 => Ok(closed_a3(x)),
        4 => Ok(closed_a4(x)),
        _ => Err(Error::OutOfRange(format!("which must be 1..=4, got {which}"))),
    }
}

/// Alternative closed form for the reduction with qubit 1 lost. It does not match the
/// see-saw maxima; kept for comparison with [`facet4_closed_max`].
pub fn facet4_printed_a1(c: &TauMinCoords) -> f64 {
    let [x0, x1, _, _] = c.x();
    let (s0, s1) = (x0 * x0, x1 * x1);
    sqrt_max(
        [
            (-1.0 + 2.0 * s1, -1.0 + 2.0 * s0),
            (-1.0 + 2.0 * s0 + 2.0 * s1, 1.0 - 2.0 * s0),
            (-1.0 + 2.0 * s0 + 2.0 * s1, -1.0 + 2.0 * s1),
        ],
        2.0,
    )
}

/// B₁₆ of the filtered W mixture, (p·4.72678 + 2ε²(p−1)) / (ε²(1−p) + p).
pub fn b16_filtered_formula(p: f64, eps: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::OutOfRange(format!("p must lie in (0,1], got {p}")));
    }
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::OutOfRange(format!("eps must lie in (0,1], got {eps}")));
    }
    let e2 = eps * eps;
    Ok((p * W3_B16_MAX + 2.0 * e2 * (p - 1.0)) / (e2 * (1.0 - p) + p))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Membership {
    Inside,
    Outside,
}

/// All nonempty correlators of a scenario, in a fixed order.
pub fn correlator_terms(scenario: &Scenario) -> Vec<Term> {
    let (p, s) = (scenario.parties, scenario.settings);
    let total = (s + 1).pow(p as u32);
    (1..total)
        .map(|mut idx| {
            let mut t = vec![None; p];
            for k in (0..p).rev() {
                let d = idx % (s + 1);
                idx /= s + 1;
                t[k] = d.checked_sub(1);
            }
            t
        })
        .collect()
}

fn correlator_index(term: &[Option<usize>], settings: usize) -> usize {
    term.iter().fold(0, |acc, s| acc * (settings + 1) + s.map_or(0, |s| s + 1)) - 1
}

pub fn correlator_vector(b: &Behavior) -> Vec<f64> {
    correlator_terms(&b.scenario()).iter().map(|t| b.correlator(t)).collect()
}

fn check_small(s: &Scenario) -> Result<()> {
    if s.parties > 3 || s.settings > 2 || s.outcomes != 2 {
        return Err(Error::ScenarioTooLarge(format!("({},{},{})", s.parties, s.settings, s.outcomes)));
    }
    Ok(())
}

/// Correlator vectors of the deterministic local strategies.
pub fn local_vertices(scenario: &Scenario) -> Result<Vec<Vec<f64>>> {
    check_small(scenario)?;
    let (p, s) = (scenario.parties, scenario.settings);
    let terms = correlator_terms(scenario);
    Ok((0..1usize << (p * s))
        .map(|bits| {
            let out = |k: usize, x: usize| if bits >> (k * s + x) & 1 == 1 { -1.0 } else { 1.0 };
            terms
                .iter()
                .map(|t| t.iter().enumerate().filter_map(|(k, x)| x.map(|x| out(k, x))).product())
                .collect()
        })
        .collect())
}

/// A two-party box with binary inputs and outputs, stored as marginals and correlators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BipartiteBox {
    pub a: [f64; 2],
    pub b: [f64; 2],
    pub ab: [[f64; 2]; 2],
}

/// The 24 extremal non-signalling boxes: 16 deterministic and 8 PR-type boxes with
/// E(x,y) = (−1)^{xy ⊕ αx ⊕ βy ⊕ γ} and vanishing marginals.
pub fn bipartite_ns_vertices() -> Vec<BipartiteBox> {
    let sign = |b: usize| if b & 1 == 1 { -1.0 } else { 1.0 };
    let mut out = Vec::with_capacity(24);
    for bits in 0..16usize {
        let a = [sign(bits), sign(bits >> 1)];
        let b = [sign(bits >> 2), sign(bits >> 3)];
        let ab = [[a[0] * b[0], a[0] * b[1]], [a[1] * b[0], a[1] * b[1]]];
        out.push(BipartiteBox { a, b, ab });
    }
    for bits in 0..8usize {
        let (al, be, ga) = (bits & 1, bits >> 1 & 1, bits >> 2 & 1);
        let e = |x: usize, y: usize| sign((x * y) ^ (al * x) ^ (be * y) ^ ga);
        out.push(BipartiteBox { a: [0.0; 2], b: [0.0; 2], ab: [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]] });
    }
    out
}

/// Correlator vectors of the NS₂ vertices in the (3,2,2) scenario: for each choice of
/// lone party, a bipartite NS vertex on the other two times a deterministic lone party.
pub fn ns2_vertices() -> Vec<Vec<f64>> {
    let scenario = Scenario { parties: 3, settings: 2, outcomes: 2 };
    let terms = correlator_terms(&scenario);
    let boxes = bipartite_ns_vertices();
    let mut out = Vec::with_capacity(288);
    for lone in 0..3 {
        let pair: Vec<usize> = (0..3).filter(|&k| k != lone).collect();
        for bx in &boxes {
            for det in 0..4usize {
                let single = [if det & 1 == 1 { -1.0 } else { 1.0 }, if det & 2 == 2 { -1.0 } else { 1.0 }];
                let v = terms
                    .iter()
                    .map(|t| {
                        let lone_part = t[lone].map_or(1.0, |x| single[x]);
                        let pair_part = match (t[pair[0]], t[pair[1]]) {
                            (None, None) => 1.0,
                            (Some(x), None) => bx.a[x],
                            (None, Some(y)) => bx.b[y],
                            (Some(x), Some(y)) => bx.ab[x][y],
                        };
                        lone_part * pair_part
                    })
                    .collect();
                out.push(v);
            }
        }
    }
    out
}

/// Largest inequality value over a vertex set.
pub fn vertex_max(ineq: &BellInequality, vertices: &[Vec<f64>]) -> f64 {
    vertices.iter().map(|v| ineq.value_on_correlators(v)).fold(f64::NEG_INFINITY, f64::max)
}

pub fn in_hull(point: &[f64], vertices: &[Vec<f64>]) -> bool {
    let mut rows: Vec<Vec<f64>> = (0..point.len()).map(|i| vertices.iter().map(|v| v[i]).collect()).collect();
    rows.push(vec![1.0; vertices.len()]);
    let mut rhs = point.to_vec();
    rhs.push(1.0);
    matches!(feasible(&rows, &rhs), Feasibility::Feasible(_))
}

fn membership(inside: bool) -> Membership {
    if inside { Membership::Inside } else { Membership::Outside }
}

/// Whether `b` admits a local hidden-variable model (scenarios up to (3,2,2)).
pub fn local_membership(b: &Behavior) -> Result<Membership> {
    let v = local_vertices(&b.scenario())?;
    Ok(membership(in_hull(&correlator_vector(b), &v)))
}

/// Whether `b` decomposes into bipartite non-signalling × single-party terms.
pub fn ns2_membership(b: &Behavior) -> Result<Membership> {
    let s = b.scenario();
    if (s.parties, s.settings, s.outcomes) != (3, 2, 2) {
        return Err(Error::ScenarioMismatch(format!("NS₂ membership needs (3,2,2), got ({},{},{})", s.parties, s.settings, s.outcomes)));
    }
    Ok(membership(in_hull(&correlator_vector(b), &ns2_vertices())))
}
