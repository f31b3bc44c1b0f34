//! Conditional outcome tables p(a⃗|x⃗).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const NORM_TOL: f64 = 1e-10;
const NS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Scenario {
    pub parties: usize,
    pub settings: usize,
    pub outcomes: usize,
}

impl Scenario {
    pub fn new(parties: usize, settings: usize, outcomes: usize) -> Result<Self> {
        if parties == 0 || settings == 0 || outcomes < 2 {
            return Err(Error::ScenarioMismatch(format!("degenerate scenario ({parties},{settings},{outcomes})")));
        }
        let s = Self { parties, settings, outcomes };
        if s.n_settings_tuples().checked_mul(s.n_outcome_tuples()).is_none_or(|n| n > 1 << 24) {
            return Err(Error::ScenarioTooLarge(format!("({parties},{settings},{outcomes})")));
        }
        Ok(s)
    }

    pub fn n_settings_tuples(&self) -> usize {
        self.settings.pow(self.parties as u32)
    }

    pub fn n_outcome_tuples(&self) -> usize {
        self.outcomes.pow(self.parties as u32)
    }

    pub fn table_len(&self) -> usize {
        self.n_settings_tuples() * self.n_outcome_tuples()
    }

    /// Digits of `index` in base `radix`, party 1 first.
    fn digits(&self, mut index: usize, radix: usize) -> Vec<usize> {
        let mut out = vec![0; self.parties];
        for k in (0..self.parties).rev() {
            out[k] = index % radix;
            index /= radix;
        }
        out
    }

    pub fn settings_tuple(&self, x: usize) -> Vec<usize> {
        self.digits(x, self.settings)
    }

    pub fn outcome_tuple(&self, a: usize) -> Vec<usize> {
        self.digits(a, self.outcomes)
    }

    pub fn settings_index(&self, xs: &[usize]) -> usize {
        xs.iter().fold(0, |acc, &x| acc * self.settings + x)
    }

    pub fn outcome_index(&self, a: &[usize]) -> usize {
        a.iter().fold(0, |acc, &x| acc * self.outcomes + x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBehavior")]
pub struct Behavior {
    scenario: Scenario,
    table: Vec<f64>,
}

#[derive(Deserialize)]
struct RawBehavior {
    scenario: Scenario,
    table: Vec<f64>,
}

impl TryFrom<RawBehavior> for Behavior {
    type Error = Error;

    fn try_from(raw: RawBehavior) -> Result<Self> {
        Behavior::new(raw.scenario, raw.table)
    }
}

impl Behavior {
    /// Table layout: settings tuple major, outcome tuple minor, party 1 most significant.
    pub fn new(scenario: Scenario, table: Vec<f64>) -> Result<Self> {
        if table.len() != scenario.table_len() {
            return Err(Error::DimensionMismatch { expected: scenario.table_len(), found: table.len() });
        }
        if let Some(p) = table.iter().find(|p| !p.is_finite() || **p < -NORM_TOL) {
            return Err(Error::InvalidBehavior(format!("entry {p} is not a probability")));
        }
        let block = scenario.n_outcome_tuples();
        for (x, chunk) in table.chunks_exact(block).enumerate() {
            let s: f64 = chunk.iter().sum();
            if (s - 1.0).abs() > NORM_TOL {
                return Err(Error::InvalidBehavior(format!("settings tuple {x} sums to {s}")));
            }
        }
        let b = Self { scenario, table };
        let sig = b.signalling();
        if sig > NS_TOL {
            return Err(Error::InvalidBehavior(format!("signalling by {sig:e}")));
        }
        Ok(b)
    }

    /// Deterministic local strategy: `outputs[party][setting]` is the outcome label.
    pub fn deterministic(scenario: Scenario, outputs: &[Vec<usize>]) -> Result<Self> {
        let mut table = vec![0.0; scenario.table_len()];
        for x in 0..scenario.n_settings_tuples() {
            let xs = scenario.settings_tuple(x);
            let a: Vec<usize> = xs.iter().enumerate().map(|(k, &s)| outputs[k][s]).collect();
            table[x * scenario.n_outcome_tuples() + scenario.outcome_index(&a)] = 1.0;
        }
        Self::new(scenario, table)
    }

    pub fn uniform(scenario: Scenario) -> Self {
        let p = 1.0 / scenario.n_outcome_tuples() as f64;
        Self { scenario, table: vec![p; scenario.table_len()] }
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn prob(&self, a: &[usize], x: &[usize]) -> f64 {
        let s = &self.scenario;
        self.table[s.settings_index(x) * s.n_outcome_tuples() + s.outcome_index(a)]
    }

    /// ⟨Π_{k present} A_k⟩ with outcome 0 ↦ +1 and 1 ↦ −1; absent parties are marginalized.
    pub fn correlator(&self, settings: &[Option<usize>]) -> f64 {
        let s = &self.scenario;
        let xs: Vec<usize> = settings.iter().map(|x| x.unwrap_or(0)).collect();
        let base = s.settings_index(&xs) * s.n_outcome_tuples();
        let mut acc = 0.0;
        for a in 0..s.n_outcome_tuples() {
            let outs = s.outcome_tuple(a);
            let parity = settings
                .iter()
                .zip(&outs)
                .filter(|(x, &o)| x.is_some() && o % 2 == 1)
                .count();
            let sign = if parity % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * self.table[base + a];
        }
        acc
    }

    /// Largest dependence of any (N−1)-party marginal on the remaining party's setting.
    pub fn signalling(&self) -> f64 {
        let s = &self.scenario;
        let n = s.parties;
        let block = s.n_outcome_tuples();
        let mut worst = 0.0f64;
        for p in 0..n {
            for x in 0..s.n_settings_tuples() {
                let xs = s.settings_tuple(x);
                if xs[p] != 0 {
                    continue;
                }
                let reference = self.marginal_without(p, x * block);
                for alt in 1..s.settings {
                    let mut ys = xs.clone();
                    ys[p] = alt;
                    let other = self.marginal_without(p, s.settings_index(&ys) * block);
                    for (u, v) in reference.iter().zip(&other) {
                        worst = worst.max((u - v).abs());
                    }
                }
            }
        }
        worst
    }

    fn marginal_without(&self, p: usize, base: usize) -> Vec<f64> {
        let s = &self.scenario;
        let mut out = vec![0.0; s.n_outcome_tuples() / s.outcomes];
        for a in 0..s.n_outcome_tuples() {
            let outs = s.outcome_tuple(a);
            let idx = outs
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != p)
                .fold(0, |acc, (_, &o)| acc * s.outcomes + o);
            out[idx] += self.table[base + a];
        }
        out
    }

    /// Relabels parties: new party `k` is old party `order[k]` (0-based).
    pub fn permute_parties(&self, order: &[usize]) -> Self {
        let s = self.scenario;
        let mut table = vec![0.0; self.table.len()];
        for x in 0..s.n_settings_tuples() {
            let xs = s.settings_tuple(x);
            let old_x: Vec<usize> = {
                let mut v = vec![0; s.parties];
                for (k, &o) in order.iter().enumerate() {
                    v[o] = xs[k];
                }
                v
            };
            for a in 0..s.n_outcome_tuples() {
                let outs = s.outcome_tuple(a);
                let mut old_a = vec![0; s.parties];
                for (k, &o) in order.iter().enumerate() {
                    old_a[o] = outs[k];
                }
                table[x * s.n_outcome_tuples() + a] = self.prob(&old_a, &old_x);
            }
        }
        Self { scenario: s, table }
    }
}
