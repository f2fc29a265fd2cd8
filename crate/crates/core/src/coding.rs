//! Human observation coding: behavior items, per-movement-type scores,
//! the child's total score, interpretation bands and cohort aggregates.
//!
//! For each movement type `m` with `k_m` non-repetition items,
//! `S_cm = (s_pos + s_neg) / k_m`, where `s_pos` / `s_neg` are the sums of
//! the positive / negative item scores. The child total `HOC_c` is the mean
//! of `S_cm` over movement types that have at least one counted item.

use std::collections::BTreeMap;
use std::fmt;
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::engine::{GameEvent, GameEventKind};
use crate::error::{Error, Result};

pub const NORMAL_LOW: f64 = 0.4;
pub const NORMAL_HIGH: f64 = 0.7;

/// Identifier of a movement type, e.g. `hand_hit`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MovementId(pub String);

impl MovementId {
    pub fn hand_hit() -> Self {
        MovementId("hand_hit".into())
    }

    pub fn foot_step() -> Self {
        MovementId("foot_step".into())
    }
}

impl Default for MovementId {
    fn default() -> Self {
        MovementId::hand_hit()
    }
}

impl fmt::Display for MovementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for MovementId {
    fn from(s: &str) -> Self {
        MovementId(s.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MovementType {
    pub id: MovementId,
    pub label: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ItemCode {
    Completed,
    NotCompleted,
    /// Zero-valued negative item. Never changes a score but is kept so coded
    /// datasets using it load unchanged.
    NotPerformedReverseOrOverRepeated,
    ReverseSidePerformed,
    CorrectButOverRepeated,
}

impl ItemCode {
    pub const ALL: [ItemCode; 5] = [
        ItemCode::Completed,
        ItemCode::NotCompleted,
        ItemCode::NotPerformedReverseOrOverRepeated,
        ItemCode::ReverseSidePerformed,
        ItemCode::CorrectButOverRepeated,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarity {
    Positive,
    Negative,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BehaviorItem {
    pub movement_type: MovementId,
    pub code: ItemCode,
    #[serde(default)]
    pub is_repetition: bool,
}

impl BehaviorItem {
    pub fn new(movement_type: MovementId, code: ItemCode) -> Self {
        BehaviorItem {
            movement_type,
            code,
            is_repetition: false,
        }
    }

    pub fn repetition(mut self) -> Self {
        self.is_repetition = true;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ItemValue {
    pub polarity: Polarity,
    pub score: f64,
}

/// Coding configuration: movement types, per-code values and how
/// over-repetition is flagged by the automatic coder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CodingScheme {
    pub movement_types: Vec<MovementType>,
    pub values: BTreeMap<ItemCode, ItemValue>,
    /// Whether auto-coded over-repetition items are marked `is_repetition`
    /// (and so left out of `k`).
    pub over_repeat_is_repetition: bool,
}

impl Default for CodingScheme {
    fn default() -> Self {
        use ItemCode::*;
        use Polarity::*;
        let values = [
            (Completed, Positive, 1.0),
            (NotCompleted, Positive, 0.0),
            (NotPerformedReverseOrOverRepeated, Negative, 0.0),
            (ReverseSidePerformed, Negative, -0.5),
            (CorrectButOverRepeated, Negative, -1.0),
        ]
        .into_iter()
        .map(|(code, polarity, score)| (code, ItemValue { polarity, score }))
        .collect();
        CodingScheme {
            movement_types: vec![
                MovementType {
                    id: MovementId::hand_hit(),
                    label: "hand hit".into(),
                },
                MovementType {
                    id: MovementId::foot_step(),
                    label: "foot step".into(),
                },
            ],
            values,
            over_repeat_is_repetition: false,
        }
    }
}

impl CodingScheme {
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        if !value.is_object() {
            return Err(Error::InvalidConfig("scheme must be a JSON object".into()));
        }
        let scheme: CodingScheme = serde_json::from_value(value)?;
        scheme.validate()?;
        Ok(scheme)
    }

    pub fn validate(&self) -> Result<()> {
        for code in ItemCode::ALL {
            let Some(v) = self.values.get(&code) else {
                return Err(Error::InvalidConfig(format!("scheme has no value for {code:?}")));
            };
            let ok = match v.polarity {
                Polarity::Positive => v.score >= 0.0,
                Polarity::Negative => v.score <= 0.0,
            };
            if !ok || !v.score.is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "{code:?}: score {} does not match {:?} polarity",
                    v.score, v.polarity
                )));
            }
        }
        if self.movement_types.is_empty() {
            return Err(Error::InvalidConfig("scheme defines no movement types".into()));
        }
        Ok(())
    }

    pub fn value(&self, code: ItemCode) -> ItemValue {
        self.values
            .get(&code)
            .copied()
            .unwrap_or_else(|| CodingScheme::default().values[&code])
    }

    pub fn label(&self, id: &MovementId) -> Option<&str> {
        self.movement_types
            .iter()
            .find(|m| &m.id == id)
            .map(|m| m.label.as_str())
    }

    pub fn movement_type_score(&self, items: &[BehaviorItem]) -> Result<MovementTypeScore> {
        let Some(first) = items.first() else {
            return Err(Error::Empty("movement type item list"));
        };
        let movement_type = first.movement_type.clone();
        if let Some(other) = items.iter().find(|i| i.movement_type != movement_type) {
            return Err(Error::Malformed(format!(
                "mixed movement types `{movement_type}` and `{}`",
                other.movement_type
            )));
        }
        let (mut s_pos, mut s_neg) = (0.0, 0.0);
        for item in items {
            let v = self.value(item.code);
            match v.polarity {
                Polarity::Positive => s_pos += v.score,
                Polarity::Negative => s_neg += v.score,
            }
        }
        let k = items.iter().filter(|i| !i.is_repetition).count() as u32;
        if k == 0 {
            return Err(Error::UndefinedDenominator(movement_type.0));
        }
        Ok(MovementTypeScore {
            movement_type,
            s_pos,
            s_neg,
            k,
            s_cm: (s_pos + s_neg) / k as f64,
        })
    }

    /// Score one child's items across all movement types.
    pub fn report(&self, items: &[BehaviorItem]) -> Result<HocReport> {
        if items.is_empty() {
            return Err(Error::UndefinedDenominator("(no items)".into()));
        }
        let mut groups: Vec<(MovementId, Vec<BehaviorItem>)> = Vec::new();
        for item in items {
            match groups.iter_mut().find(|(id, _)| *id == item.movement_type) {
                Some((_, g)) => g.push(item.clone()),
                None => groups.push((item.movement_type.clone(), vec![item.clone()])),
            }
        }
        // Scheme order first, then first appearance.
        let rank = |id: &MovementId| {
            self.movement_types
                .iter()
                .position(|m| &m.id == id)
                .unwrap_or(usize::MAX)
        };
        groups.sort_by_key(|(id, _)| rank(id));

        let mut per_type = Vec::new();
        let mut last_err = None;
        for (_, group) in &groups {
            match self.movement_type_score(group) {
                Ok(score) => per_type.push(score),
                Err(e @ Error::UndefinedDenominator(_)) => last_err = Some(e),
                Err(e) => return Err(e),
            }
        }
        if per_type.is_empty() {
            return Err(last_err.expect("at least one group"));
        }
        let hoc_c = hoc_total(&per_type)?;
        Ok(HocReport {
            child_id: None,
            per_type,
            hoc_c: Some(hoc_c),
            band: Some(classify(hoc_c)),
            completion_degree: None,
        })
    }
}

/// Polarity and value of an item under the default scheme.
pub fn item_score(item: &BehaviorItem) -> (Polarity, f64) {
    let v = CodingScheme::default().value(item.code);
    (v.polarity, v.score)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MovementTypeScore {
    pub movement_type: MovementId,
    pub s_pos: f64,
    pub s_neg: f64,
    pub k: u32,
    pub s_cm: f64,
}

/// `S_cm` for one movement type under the default scheme.
pub fn movement_type_score(items: &[BehaviorItem]) -> Result<MovementTypeScore> {
    CodingScheme::default().movement_type_score(items)
}

/// Mean of the per-type `S_cm` values.
pub fn hoc_total(scores: &[MovementTypeScore]) -> Result<f64> {
    if scores.is_empty() {
        return Err(Error::Empty("movement type scores"));
    }
    Ok(scores.iter().map(|s| s.s_cm).sum::<f64>() / scores.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Band {
    Poorer,
    Normal,
    Better,
}

impl fmt::Display for Band {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Band::Poorer => "poorer",
            Band::Normal => "normal",
            Band::Better => "better",
        })
    }
}

/// Normal band is inclusive at both ends.
pub fn classify(hoc_c: f64) -> Band {
    if hoc_c < NORMAL_LOW {
        Band::Poorer
    } else if hoc_c <= NORMAL_HIGH {
        Band::Normal
    } else {
        Band::Better
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HocReport {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub child_id: Option<String>,
    pub per_type: Vec<MovementTypeScore>,
    pub hoc_c: Option<f64>,
    pub band: Option<Band>,
    pub completion_degree: Option<u32>,
}

impl HocReport {
    pub fn completion_only(completion_degree: u32) -> Self {
        HocReport {
            child_id: None,
            per_type: Vec::new(),
            hoc_c: None,
            band: None,
            completion_degree: Some(completion_degree),
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        if let Some(id) = &self.child_id {
            out.push_str(&format!("child {id}\n"));
        }
        for t in &self.per_type {
            out.push_str(&format!(
                "  {}: s_pos {:.2}  s_neg {:.2}  k {}  S_cm {:.2}\n",
                t.movement_type, t.s_pos, t.s_neg, t.k, t.s_cm
            ));
        }
        if let (Some(h), Some(b)) = (self.hoc_c, self.band) {
            out.push_str(&format!("  HOC_c {h:.2} ({b})\n"));
        }
        if let Some(c) = self.completion_degree {
            out.push_str(&format!("  completion degree {c}\n"));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortAggregate {
    pub reports: usize,
    pub mean_hoc_c: Option<f64>,
    pub mean_completion_degree: Option<f64>,
}

impl CohortAggregate {
    pub fn render(&self) -> String {
        let show = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.2}"));
        format!(
            "cohort of {}: mean HOC_c {}  mean completion degree {}",
            self.reports,
            show(self.mean_hoc_c),
            show(self.mean_completion_degree)
        )
    }
}

/// Arithmetic means over the reports that carry each metric.
pub fn cohort_report(reports: &[HocReport]) -> Result<CohortAggregate> {
    if reports.is_empty() {
        return Err(Error::Empty("cohort reports"));
    }
    fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
        let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
        (n > 0).then(|| sum / n as f64)
    }
    Ok(CohortAggregate {
        reports: reports.len(),
        mean_hoc_c: mean(reports.iter().filter_map(|r| r.hoc_c)),
        mean_completion_degree: mean(reports.iter().filter_map(|r| r.completion_degree.map(f64::from))),
    })
}

#[derive(Debug, Default)]
struct RoundObservation {
    demo_presses: u32,
    completed: bool,
    child_presses: u32,
    reversed: bool,
}

/// Derive one behavior item per demonstrated round from an imitation
/// session's event log.
///
/// A completed round is `Completed`, or `CorrectButOverRepeated` when the
/// child pressed the target more times than the parent demonstrated. A round
/// that was demonstrated but never imitated is `ReverseSidePerformed` if the
/// child pressed the laterally reversed tile, otherwise `NotCompleted`.
/// Rounds never demonstrated produce no item.
pub fn auto_code(
    log: &[GameEvent],
    movement_type: &MovementId,
    scheme: &CodingScheme,
) -> Result<Vec<BehaviorItem>> {
    let mut rounds: BTreeMap<u32, RoundObservation> = BTreeMap::new();
    for ev in log {
        match &ev.kind {
            GameEventKind::TileExtinguished { .. } | GameEventKind::RoundCompleted { .. } => {
                return Err(Error::WrongMode("collaboration log cannot be auto-coded".into()));
            }
            GameEventKind::RoundStarted { lit, .. } if lit.len() > 1 => {
                return Err(Error::WrongMode("collaboration log cannot be auto-coded".into()));
            }
            GameEventKind::DemoPressed {
                round,
                demo_presses,
                ..
            } => {
                let r = rounds.entry(*round).or_default();
                r.demo_presses = r.demo_presses.max(*demo_presses);
            }
            GameEventKind::ImitationWrongTile {
                round,
                tile,
                expected,
            } => {
                let r = rounds.entry(*round).or_default();
                if *tile == expected.lateral_reversal() {
                    r.reversed = true;
                }
            }
            GameEventKind::ImitationCompleted {
                round,
                demo_presses,
                child_presses,
                ..
            } => {
                let r = rounds.entry(*round).or_default();
                r.completed = true;
                r.demo_presses = r.demo_presses.max(*demo_presses);
                r.child_presses = r.child_presses.max(*child_presses);
            }
            GameEventKind::ExtraPress {
                repeat_of: Some(round),
                child_presses: Some(n),
                ..
            } => {
                let r = rounds.entry(*round).or_default();
                r.child_presses = r.child_presses.max(*n);
            }
            _ => {}
        }
    }

    Ok(rounds
        .into_values()
        .filter(|r| r.demo_presses > 0)
        .map(|r| {
            let (code, is_repetition) = if r.completed {
                if r.child_presses > r.demo_presses {
                    (ItemCode::CorrectButOverRepeated, scheme.over_repeat_is_repetition)
                } else {
                    (ItemCode::Completed, false)
                }
            } else if r.reversed {
                (ItemCode::ReverseSidePerformed, false)
            } else {
                (ItemCode::NotCompleted, false)
            };
            BehaviorItem {
                movement_type: movement_type.clone(),
                code,
                is_repetition,
            }
        })
        .collect())
}

/// One line of a coded-item file: either a behavior item or a completion
/// degree for a child.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodedRecord {
    pub child_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub movement_type: Option<MovementId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub code: Option<ItemCode>,
    #[serde(default)]
    pub is_repetition: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub completion_degree: Option<u32>,
}

impl CodedRecord {
    pub fn item(child_id: &str, item: &BehaviorItem) -> Self {
        CodedRecord {
            child_id: child_id.to_string(),
            movement_type: Some(item.movement_type.clone()),
            code: Some(item.code),
            is_repetition: item.is_repetition,
            completion_degree: None,
        }
    }

    pub fn completion(child_id: &str, completion_degree: u32) -> Self {
        CodedRecord {
            child_id: child_id.to_string(),
            movement_type: None,
            code: None,
            is_repetition: false,
            completion_degree: Some(completion_degree),
        }
    }
}

/// Parse newline-delimited coded records. Blank lines are skipped; errors
/// carry 1-based line numbers.
pub fn read_coded_records<R: BufRead>(reader: R) -> Result<Vec<CodedRecord>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let corrupt = |msg: String| Error::Corrupt { line: i + 1, msg };
        let rec: CodedRecord = serde_json::from_str(&line).map_err(|e| corrupt(e.to_string()))?;
        match (&rec.code, &rec.movement_type, rec.completion_degree) {
            (Some(_), Some(_), _) | (None, None, Some(_)) => out.push(rec),
            (Some(_), None, _) => return Err(corrupt("item without movement_type".into())),
            _ => return Err(corrupt("record has neither code nor completion_degree".into())),
        }
    }
    Ok(out)
}

/// Group coded records per child (first-appearance order) and score each.
pub fn reports_by_child(records: &[CodedRecord], scheme: &CodingScheme) -> Result<Vec<HocReport>> {
    let mut children: Vec<(String, Vec<BehaviorItem>, Option<u32>)> = Vec::new();
    for rec in records {
        let idx = match children.iter().position(|(id, _, _)| *id == rec.child_id) {
            Some(i) => i,
            None => {
                children.push((rec.child_id.clone(), Vec::new(), None));
                children.len() - 1
            }
        };
        let entry = &mut children[idx];
        if let (Some(code), Some(movement_type)) = (rec.code, &rec.movement_type) {
            entry.1.push(BehaviorItem {
                movement_type: movement_type.clone(),
                code,
                is_repetition: rec.is_repetition,
            });
        }
        if let Some(c) = rec.completion_degree {
            entry.2 = Some(c);
        }
    }
    children
        .into_iter()
        .map(|(id, items, completion)| {
            let mut report = if items.is_empty() {
                HocReport::completion_only(completion.unwrap_or(0))
            } else {
                scheme.report(&items)?
            };
            report.child_id = Some(id);
            report.completion_degree = completion.or(report.completion_degree);
            Ok(report)
        })
        .collect()
}
