//! Each theorem as a reproducible experiment: an empirical statistic over
//! F_q[x], the asymptotic prediction, and a verdict when the parameters lie
//! in the theorem's range.

mod classes;
mod correlations;
mod counting;
mod variance;

use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::Poly;

pub use classes::{class_values, ClassValues};
pub use correlations::{exp_chowla, exp_divisor_corr, exp_joint_cycles, exp_twin};
pub use counting::{exp_ap_primes, exp_cycle_census, exp_interval_cycles, exp_interval_primes, exp_prime_count, PrimeCountRoute};
pub use variance::{
    exp_var_divisor, exp_var_g, exp_var_lambda2, exp_var_mobius, exp_var_psi, mobius_character_decomposition, printed_cubic_prediction,
    CharacterDecomposition,
};

/// Smallest q at which the variance theorems' q → ∞ asymptotics are judged.
pub const MIN_ASYMPTOTIC_Q: u32 = 11;

/// How interval classes (or polynomials) are visited.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Exhaustive,
    /// `samples` classes drawn uniformly with replacement.
    Sampled { samples: usize, seed: u64 },
}

impl Mode {
    pub fn label(&self) -> &'static str {
        match self {
            Mode::Exhaustive => "exhaustive",
            Mode::Sampled { .. } => "sampled",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    /// Parameters outside the theorem's range; measured, not judged.
    Informational,
}

/// Experiment parameters; absent ones are omitted from JSON.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Params {
    pub q: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub modulus: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residue: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shifts: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exponents: Option<Vec<u8>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub partitions: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl Params {
    pub fn new(q: u32) -> Self {
        Params { q, ..Default::default() }
    }

    pub(crate) fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = Some(mode.label().into());
        if let Mode::Sampled { samples, seed } = mode {
            self.samples = Some(samples);
            self.seed = Some(seed);
        }
        self
    }
}

/// The quantity a verdict compares against its limit.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub quantity: String,
    pub value: f64,
    pub limit: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub params: Params,
    pub empirical: f64,
    pub predicted: f64,
    pub abs_error: f64,
    /// `abs_error` over the theorem's error scale, when it has one.
    pub normalized_error: Option<f64>,
    pub error_scale: Option<f64>,
    pub verdict: Verdict,
    pub checks: Vec<Check>,
    /// Theorem the prediction comes from.
    pub provenance: String,
    pub details: BTreeMap<String, f64>,
    pub series: BTreeMap<String, Vec<f64>>,
    /// Labels for the entries of each series, when they are not positional.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub labels: Vec<String>,
    pub notes: Vec<String>,
    pub millis: u64,
}

impl ExperimentReport {
    pub(crate) fn new(experiment: &str, params: Params, empirical: f64, predicted: f64, provenance: &str) -> Self {
        ExperimentReport {
            experiment: experiment.into(),
            params,
            empirical,
            predicted,
            abs_error: (empirical - predicted).abs(),
            normalized_error: None,
            error_scale: None,
            verdict: Verdict::Informational,
            checks: Vec::new(),
            provenance: provenance.into(),
            details: BTreeMap::new(),
            series: BTreeMap::new(),
            labels: Vec::new(),
            notes: Vec::new(),
            millis: 0,
        }
    }

    pub(crate) fn scale(mut self, scale: f64) -> Self {
        self.error_scale = Some(scale);
        self.normalized_error = Some(self.abs_error / scale);
        self
    }

    pub(crate) fn detail(mut self, key: &str, value: f64) -> Self {
        self.details.insert(key.into(), value);
        self
    }

    pub(crate) fn series(mut self, key: &str, values: Vec<f64>) -> Self {
        self.series.insert(key.into(), values);
        self
    }

    pub(crate) fn note(mut self, text: impl Into<String>) -> Self {
        self.notes.push(text.into());
        self
    }

    /// Adds a check; the verdict passes only if every check does. With
    /// `judged` false the check is recorded but the verdict stays
    /// informational.
    pub(crate) fn check(mut self, quantity: &str, value: f64, limit: f64, judged: bool) -> Self {
        self.checks.push(Check { quantity: quantity.into(), value, limit });
        if judged {
            let ok = value <= limit;
            self.verdict = match (self.verdict, ok) {
                (Verdict::Fail, _) | (_, false) => Verdict::Fail,
                _ => Verdict::Pass,
            };
        }
        self
    }

    pub(crate) fn timed(mut self, start: Instant) -> Self {
        self.millis = start.elapsed().as_millis() as u64;
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict != Verdict::Fail
    }
}

/// Shifts α_1..α_r of degree < n, with exponents ε_i ∈ {1, 2}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShiftTuple {
    shifts: Vec<Poly>,
    exponents: Vec<u8>,
}

impl ShiftTuple {
    pub fn new(shifts: Vec<Poly>, exponents: Vec<u8>, n: usize) -> Result<Self> {
        if shifts.is_empty() {
            return Err(Error::InvalidShiftTuple("need at least one shift".into()));
        }
        if exponents.len() != shifts.len() {
            return Err(Error::InvalidShiftTuple(format!("{} shifts but {} exponents", shifts.len(), exponents.len())));
        }
        if exponents.iter().any(|&e| e != 1 && e != 2) {
            return Err(Error::InvalidShiftTuple("exponents must be 1 or 2".into()));
        }
        if exponents.iter().all(|&e| e == 2) {
            return Err(Error::InvalidShiftTuple("exponents must not all be even".into()));
        }
        if let Some(a) = shifts.iter().find(|a| a.degree().is_some_and(|d| d >= n)) {
            return Err(Error::InvalidShiftTuple(format!("shift {} has degree >= n = {n}", a.to_text())));
        }
        for (i, a) in shifts.iter().enumerate() {
            if shifts[..i].contains(a) {
                return Err(Error::DuplicateShifts);
            }
        }
        Ok(ShiftTuple { shifts, exponents })
    }

    /// All exponents 1.
    pub fn plain(shifts: Vec<Poly>, n: usize) -> Result<Self> {
        let e = vec![1; shifts.len()];
        Self::new(shifts, e, n)
    }

    pub fn shifts(&self) -> &[Poly] {
        &self.shifts
    }

    pub fn exponents(&self) -> &[u8] {
        &self.exponents
    }

    pub fn len(&self) -> usize {
        self.shifts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shifts.is_empty()
    }

    pub(crate) fn texts(&self) -> Vec<String> {
        self.shifts.iter().map(|a| a.to_text()).collect()
    }
}

/// Index of f + α in M_n from the index of f, for deg α < n.
pub(crate) struct IndexShift {
    q: u64,
    digits: Vec<u64>,
}

impl IndexShift {
    pub(crate) fn new(alpha: &Poly, n: usize) -> Self {
        let q = alpha.ctx().p() as u64;
        IndexShift { q, digits: (0..n).map(|i| alpha.coeff(i) as u64).collect() }
    }

    pub(crate) fn apply(&self, mut idx: u64) -> u64 {
        let mut out = 0;
        let mut place = 1;
        for &a in &self.digits {
            out += ((idx % self.q + a) % self.q) * place;
            idx /= self.q;
            place *= self.q;
        }
        out
    }
}

pub(crate) fn require_odd(q: u32) -> Result<()> {
    if q.is_multiple_of(2) {
        Err(Error::EvenCharacteristic)
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldCtx;

    #[test]
    fn shift_tuple_validation() {
        let f5 = FieldCtx::new(5).unwrap();
        let p = |s: &str| Poly::parse(&f5, s).unwrap();
        assert!(ShiftTuple::new(vec![p("0"), p("1")], vec![1, 2], 2).is_ok());
        assert!(matches!(ShiftTuple::new(vec![p("0"), p("1")], vec![2, 2], 2), Err(Error::InvalidShiftTuple(_))));
        assert_eq!(ShiftTuple::plain(vec![p("1"), p("1")], 2).unwrap_err(), Error::DuplicateShifts);
        assert!(matches!(ShiftTuple::plain(vec![p("0"), p("0,0,1")], 2), Err(Error::InvalidShiftTuple(_))));
    }

    #[test]
    fn index_shift_matches_polynomial_addition() {
        let f5 = FieldCtx::new(5).unwrap();
        let alpha = Poly::parse(&f5, "3,4").unwrap();
        let s = IndexShift::new(&alpha, 3);
        for idx in 0..125 {
            let f = crate::ensembles::monic_from_index(&f5, 3, idx);
            assert_eq!(crate::ensembles::index_of_monic(&f.add(&alpha)).unwrap(), s.apply(idx));
        }
    }
}
