//! Human-readable rules mined from retrieved exemplars.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::library::ExemplarLibrary;
use super::similarity::Match;
use super::tsk::Prediction;
use crate::error::{Error, Result};
use crate::fuzzy::{Feature, Label, SlotRef};

/// Antecedent terms kept per rule.
pub const MAX_ANTECEDENTS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Antecedent {
    /// Cycle offset in the window, 0 oldest.
    pub cycle_offset: usize,
    pub feature: Feature,
    pub label: Label,
    pub degree: f64,
}

impl Antecedent {
    /// `HI_t`, `dHI_{t-3}` and so on.
    pub fn variable(&self) -> String {
        let lag = SlotRef {
            cycle_offset: self.cycle_offset,
            feature: self.feature,
            label: self.label,
        }
        .lag();
        if lag == 0 {
            format!("{}_t", self.feature)
        } else {
            format!("{}_{{t-{lag}}}", self.feature)
        }
    }
}

/// One retrieved exemplar rendered as `IF ... THEN RUL = r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinedRule {
    /// Sorted by degree, descending.
    pub antecedents: Vec<Antecedent>,
    pub consequent_rul: u32,
    pub firing_strength: f64,
    pub exemplar: usize,
    pub source_run: usize,
    pub source_cycle: usize,
}

/// Positions of the `n` largest degrees, largest first; equal degrees are
/// ordered by position.
pub fn dominant_positions(values: &[f64], n: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    let order = |a: &usize, b: &usize| values[*b].total_cmp(&values[*a]).then(a.cmp(b));
    let n = n.min(idx.len());
    if n == 0 {
        return Vec::new();
    }
    if n < idx.len() {
        idx.select_nth_unstable_by(n - 1, order);
        idx.truncate(n);
    }
    idx.sort_unstable_by(order);
    idx
}

pub fn mine_rule(m: &Match, library: &ExemplarLibrary) -> Result<MinedRule> {
    if m.exemplar >= library.len() {
        return Err(Error::Precondition(format!(
            "match references exemplar {} of {}",
            m.exemplar,
            library.len()
        )));
    }
    let row = library.row(m.exemplar);
    let antecedents = dominant_positions(row, MAX_ANTECEDENTS)
        .into_iter()
        .map(|p| {
            let slot = SlotRef::decode(p);
            Antecedent {
                cycle_offset: slot.cycle_offset,
                feature: slot.feature,
                label: slot.label,
                degree: row[p],
            }
        })
        .collect();
    let (source_run, source_cycle) = library.provenance(m.exemplar);
    Ok(MinedRule {
        antecedents,
        consequent_rul: library.rul(m.exemplar),
        firing_strength: m.similarity,
        exemplar: m.exemplar,
        source_run,
        source_cycle,
    })
}

/// `IF HI_t is High (1.00) AND ... THEN RUL = 11 cycles.`
pub fn render_rule(rule: &MinedRule) -> String {
    let terms: Vec<String> = rule
        .antecedents
        .iter()
        .map(|a| format!("{} is {} ({:.2})", a.variable(), a.label, a.degree))
        .collect();
    format!(
        "IF {}, THEN RUL = {} cycles.",
        terms.join(" AND "),
        rule.consequent_rul
    )
}

/// Plain-text explanation: the aggregated estimate and interval, then one
/// block per rule ordered by similarity.
pub fn explain(prediction: &Prediction) -> String {
    assert!(
        !prediction.rules.is_empty(),
        "a prediction always carries at least one rule"
    );
    let mut out = String::new();
    let q = &prediction.query;
    match (q.run_id, q.cycle) {
        (Some(run), Some(cycle)) => {
            let _ = writeln!(out, "Query: run {run}, cycle {cycle}");
        }
        _ => {
            let _ = writeln!(out, "Query: unlabeled signature");
        }
    }
    let iv = &prediction.interval;
    let _ = writeln!(
        out,
        "Predicted RUL = {:.2} cycles ({:.0}% interval: {:.2} to {:.2})",
        prediction.rul_estimate,
        iv.level * 100.0,
        iv.lo,
        iv.hi
    );
    let _ = writeln!(out, "Active rules: {}", prediction.rules.len());

    let mut rules: Vec<&MinedRule> = prediction.rules.iter().collect();
    rules.sort_by(|a, b| {
        b.firing_strength
            .total_cmp(&a.firing_strength)
            .then(a.exemplar.cmp(&b.exemplar))
    });
    for (i, rule) in rules.iter().enumerate() {
        let _ = writeln!(out);
        let _ = writeln!(out, "Rule {} (Similarity = {:.3}):", i + 1, rule.firing_strength);
        let _ = writeln!(out, "  {}", render_rule(rule));
        let _ = writeln!(
            out,
            "  source: exemplar {} from run {}, cycle {}",
            rule.exemplar, rule.source_run, rule.source_cycle
        );
    }
    out
}
