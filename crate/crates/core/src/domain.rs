//! Annotated argumentative messages and the line-delimited dataset format.
//!
//! A message is an ordered list of argument components: one or more
//! premises followed by exactly one conclusion. Every component carries a
//! ClaimBuster checkworthiness label and, for hateful messages, a
//! component-level hatefulness annotation.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// ClaimBuster checkworthiness label. Declaration order is the canonical
/// one-hot order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CheckworthinessLabel {
    /// Non-factual statement.
    #[serde(rename = "NFS")]
    Nfs,
    /// Unimportant factual statement.
    #[serde(rename = "UFS")]
    Ufs,
    /// Checkworthy factual statement.
    #[serde(rename = "CFS")]
    Cfs,
}

impl CheckworthinessLabel {
    pub const ALL: [CheckworthinessLabel; 3] = [Self::Nfs, Self::Ufs, Self::Cfs];

    /// Position of this label inside a `(NFS, UFS, CFS)` one-hot triple.
    pub fn one_hot_index(self) -> usize {
        match self {
            Self::Nfs => 0,
            Self::Ufs => 1,
            Self::Cfs => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Nfs => "NFS",
            Self::Ufs => "UFS",
            Self::Cfs => "CFS",
        }
    }
}

impl fmt::Display for CheckworthinessLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Hatefulness of a single component judged in isolation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ComponentHatefulness {
    Hateful,
    NonHateful,
    Unannotated,
}

impl ComponentHatefulness {
    pub const ALL: [ComponentHatefulness; 3] = [Self::NonHateful, Self::Hateful, Self::Unannotated];

    pub fn is_hateful(self) -> bool {
        self == Self::Hateful
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Hateful => "hate",
            Self::NonHateful => "nohate",
            Self::Unannotated => "null",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Premise,
    Conclusion,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Premise => "premise",
            Self::Conclusion => "conclusion",
        }
    }
}

/// Gold message-level label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MessageLabel {
    #[serde(rename = "hate")]
    Hateful,
    #[serde(rename = "nohate")]
    NonHateful,
}

impl MessageLabel {
    pub fn is_hateful(self) -> bool {
        self == Self::Hateful
    }

    pub fn from_hateful(hateful: bool) -> Self {
        if hateful {
            Self::Hateful
        } else {
            Self::NonHateful
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Hateful => "hate",
            Self::NonHateful => "nohate",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArgComponent {
    pub role: Role,
    /// 0-based index within the enclosing message.
    pub position: usize,
    pub cw: CheckworthinessLabel,
    pub hate: ComponentHatefulness,
    /// Carried through I/O only. Nothing reads it.
    pub text: Option<String>,
}

impl ArgComponent {
    pub fn premise(position: usize, cw: CheckworthinessLabel, hate: ComponentHatefulness) -> Self {
        ArgComponent {
            role: Role::Premise,
            position,
            cw,
            hate,
            text: None,
        }
    }

    pub fn conclusion(position: usize, cw: CheckworthinessLabel, hate: ComponentHatefulness) -> Self {
        ArgComponent {
            role: Role::Conclusion,
            position,
            cw,
            hate,
            text: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Message {
    pub id: String,
    pub components: Vec<ArgComponent>,
    pub label: MessageLabel,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidationError {
    #[error("message {id}: no premise")]
    NoPremise { id: String },
    #[error("message {id}: no conclusion")]
    NoConclusion { id: String },
    #[error("message {id}: {count} conclusions, expected exactly one")]
    MultipleConclusions { id: String, count: usize },
    #[error("message {id}: conclusion is not the final component")]
    ConclusionNotLast { id: String },
    #[error("message {id}: component positions are not 0..{len} in order")]
    NonContiguousPositions { id: String, len: usize },
}

/// Non-fatal annotation oddities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValidationWarning {
    /// A hateful message has components without a hatefulness annotation.
    UnannotatedInHateful { id: String, count: usize },
}

impl fmt::Display for ValidationWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::UnannotatedInHateful { id, count } => write!(
                f,
                "message {id}: {count} unannotated component(s) in a hateful message, encoded as non-hateful"
            ),
        }
    }
}

impl Message {
    pub fn premise_count(&self) -> usize {
        self.components.iter().filter(|c| c.role == Role::Premise).count()
    }

    pub fn premises(&self) -> impl Iterator<Item = &ArgComponent> {
        self.components.iter().filter(|c| c.role == Role::Premise)
    }

    /// The conclusion of a validated message.
    pub fn conclusion(&self) -> Option<&ArgComponent> {
        self.components.iter().find(|c| c.role == Role::Conclusion)
    }

    pub fn warnings(&self) -> Vec<ValidationWarning> {
        let unannotated = self
            .components
            .iter()
            .filter(|c| c.hate == ComponentHatefulness::Unannotated)
            .count();
        if self.label.is_hateful() && unannotated > 0 {
            vec![ValidationWarning::UnannotatedInHateful {
                id: self.id.clone(),
                count: unannotated,
            }]
        } else {
            Vec::new()
        }
    }
}

/// Checks the structural invariants of a message.
pub fn validate_message(m: &Message) -> Result<(), ValidationError> {
    let id = || m.id.clone();
    if m.components.iter().enumerate().any(|(i, c)| c.position != i) {
        return Err(ValidationError::NonContiguousPositions {
            id: id(),
            len: m.components.len(),
        });
    }
    let conclusions = m.components.iter().filter(|c| c.role == Role::Conclusion).count();
    if m.premise_count() == 0 {
        return Err(ValidationError::NoPremise { id: id() });
    }
    match conclusions {
        0 => return Err(ValidationError::NoConclusion { id: id() }),
        1 => {}
        count => return Err(ValidationError::MultipleConclusions { id: id(), count }),
    }
    if m.components.last().map(|c| c.role) != Some(Role::Conclusion) {
        return Err(ValidationError::ConclusionNotLast { id: id() });
    }
    Ok(())
}

/// A validated collection of messages.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    messages: Vec<Message>,
    premise_capacity: usize,
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("line {line}: malformed record: {reason}")]
    MalformedRecord { line: usize, reason: String },
    #[error("line {line}: {source}")]
    Invalid {
        line: usize,
        #[source]
        source: ValidationError,
    },
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error("dataset contains no valid messages")]
    EmptyDataset,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Dataset {
    pub fn new(messages: Vec<Message>) -> Result<Self, DatasetError> {
        if messages.is_empty() {
            return Err(DatasetError::EmptyDataset);
        }
        for m in &messages {
            validate_message(m)?;
        }
        let premise_capacity = messages.iter().map(Message::premise_count).max().unwrap_or(1);
        Ok(Dataset {
            messages,
            premise_capacity,
        })
    }

    pub fn messages(&self) -> &[Message] {
        &self.messages
    }

    pub fn len(&self) -> usize {
        self.messages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.messages.is_empty()
    }

    /// Largest premise count over all messages (the slot capacity `L`).
    pub fn premise_capacity(&self) -> usize {
        self.premise_capacity
    }

    /// Gold labels, `true` for hateful.
    pub fn labels(&self) -> Vec<bool> {
        self.messages.iter().map(|m| m.label.is_hateful()).collect()
    }

    pub fn class_counts(&self) -> (usize, usize) {
        let hateful = self.messages.iter().filter(|m| m.label.is_hateful()).count();
        (hateful, self.messages.len() - hateful)
    }

    pub fn component_count(&self) -> usize {
        self.messages.iter().map(|m| m.components.len()).sum()
    }

    pub fn warnings(&self) -> Vec<ValidationWarning> {
        self.messages.iter().flat_map(Message::warnings).collect()
    }
}

// Wire representation of one line.

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RecordComponent {
    role: Role,
    cw: CheckworthinessLabel,
    hate: Option<WireHate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    text: Option<String>,
}

#[derive(Serialize, Deserialize, Clone, Copy)]
enum WireHate {
    #[serde(rename = "hate")]
    Hate,
    #[serde(rename = "nohate")]
    NoHate,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Record {
    id: String,
    label: MessageLabel,
    components: Vec<RecordComponent>,
}

impl From<Record> for Message {
    fn from(r: Record) -> Self {
        let components = r
            .components
            .into_iter()
            .enumerate()
            .map(|(position, c)| ArgComponent {
                role: c.role,
                position,
                cw: c.cw,
                hate: match c.hate {
                    Some(WireHate::Hate) => ComponentHatefulness::Hateful,
                    Some(WireHate::NoHate) => ComponentHatefulness::NonHateful,
                    None => ComponentHatefulness::Unannotated,
                },
                text: c.text,
            })
            .collect();
        Message {
            id: r.id,
            components,
            label: r.label,
        }
    }
}

impl From<&Message> for Record {
    fn from(m: &Message) -> Self {
        Record {
            id: m.id.clone(),
            label: m.label,
            components: m
                .components
                .iter()
                .map(|c| RecordComponent {
                    role: c.role,
                    cw: c.cw,
                    hate: match c.hate {
                        ComponentHatefulness::Hateful => Some(WireHate::Hate),
                        ComponentHatefulness::NonHateful => Some(WireHate::NoHate),
                        ComponentHatefulness::Unannotated => None,
                    },
                    text: c.text.clone(),
                })
                .collect(),
        }
    }
}

/// Outcome of a lenient or strict parse.
#[derive(Debug)]
pub struct ParsedDataset {
    pub dataset: Dataset,
    /// `(line, reason)` for every record dropped in lenient mode.
    pub skipped: Vec<(usize, String)>,
    pub warnings: Vec<ValidationWarning>,
}

/// Reads the line-delimited dataset format. Blank lines are ignored.
/// Line numbers in errors are 1-based.
pub fn parse_dataset<R: BufRead>(input: R, strict: bool) -> Result<ParsedDataset, DatasetError> {
    let mut messages = Vec::new();
    let mut skipped = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: Record = match serde_json::from_str(&line) {
            Ok(r) => r,
            Err(e) if strict => {
                return Err(DatasetError::MalformedRecord {
                    line: line_no,
                    reason: e.to_string(),
                })
            }
            Err(e) => {
                skipped.push((line_no, format!("malformed record: {e}")));
                continue;
            }
        };
        let message = Message::from(record);
        match validate_message(&message) {
            Ok(()) => messages.push(message),
            Err(source) if strict => return Err(DatasetError::Invalid { line: line_no, source }),
            Err(e) => skipped.push((line_no, e.to_string())),
        }
    }
    let dataset = Dataset::new(messages)?;
    let warnings = dataset.warnings();
    Ok(ParsedDataset {
        dataset,
        skipped,
        warnings,
    })
}

pub fn write_message<W: Write>(out: &mut W, m: &Message) -> std::io::Result<()> {
    serde_json::to_writer(&mut *out, &Record::from(m))?;
    out.write_all(b"\n")
}

pub fn write_dataset<W: Write>(out: &mut W, d: &Dataset) -> std::io::Result<()> {
    for m in d.messages() {
        write_message(out, m)?;
    }
    Ok(())
}

/// One cell of the (message label, role, checkworthiness, component hatefulness)
/// contingency table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellKey {
    pub label: MessageLabel,
    pub role: Role,
    pub cw: CheckworthinessLabel,
    pub hate: ComponentHatefulness,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    /// Population statistics. Empty input gives zeros.
    pub fn population(values: &[f64]) -> Self {
        if values.is_empty() {
            return MeanStd { mean: 0.0, std: 0.0 };
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        MeanStd { mean, std: var.sqrt() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StatsReport {
    pub premise_capacity: usize,
    pub hateful: usize,
    pub non_hateful: usize,
    pub total_components: usize,
    pub hateful_premises: MeanStd,
    pub non_hateful_premises: MeanStd,
    pub cells: BTreeMap<CellKey, usize>,
}

impl StatsReport {
    pub fn cell(&self, key: CellKey) -> usize {
        self.cells.get(&key).copied().unwrap_or(0)
    }

    /// Total components carrying the given checkworthiness label.
    pub fn cw_total(&self, cw: CheckworthinessLabel) -> usize {
        self.cells.iter().filter(|(k, _)| k.cw == cw).map(|(_, n)| n).sum()
    }

    pub fn cell_total(&self) -> usize {
        self.cells.values().sum()
    }

    /// Renders a Table-1 style breakdown: rows are checkworthiness labels,
    /// columns split by message label, role and component hatefulness.
    pub fn render_text(&self) -> String {
        let mut columns: Vec<(MessageLabel, Role, ComponentHatefulness)> = Vec::new();
        for label in [MessageLabel::Hateful, MessageLabel::NonHateful] {
            for role in [Role::Premise, Role::Conclusion] {
                for hate in ComponentHatefulness::ALL {
                    let any = self
                        .cells
                        .iter()
                        .any(|(k, n)| *n > 0 && k.label == label && k.role == role && k.hate == hate);
                    if any {
                        columns.push((label, role, hate));
                    }
                }
            }
        }
        let mut out = String::new();
        out.push_str(&format!("messages: {} (hate {}, nohate {})\n", self.hateful + self.non_hateful, self.hateful, self.non_hateful));
        out.push_str(&format!("premise capacity L: {}\n", self.premise_capacity));
        out.push_str(&format!(
            "premises per hateful message: {:.3} ± {:.3}\n",
            self.hateful_premises.mean, self.hateful_premises.std
        ));
        out.push_str(&format!(
            "premises per non-hateful message: {:.3} ± {:.3}\n",
            self.non_hateful_premises.mean, self.non_hateful_premises.std
        ));
        out.push_str(&format!("components: {}\n\n", self.total_components));
        let header: Vec<String> = columns
            .iter()
            .map(|(l, r, h)| format!("{}/{}/{}", l.as_str(), r.as_str(), h.as_str()))
            .collect();
        out.push_str(&format!("cw | {} | ALL\n", header.join(" | ")));
        out.push_str(&format!("---|{}---\n", "---|".repeat(columns.len())));
        for cw in CheckworthinessLabel::ALL {
            let counts: Vec<String> = columns
                .iter()
                .map(|&(label, role, hate)| self.cell(CellKey { label, role, cw, hate }).to_string())
                .collect();
            out.push_str(&format!("{} | {} | {}\n", cw, counts.join(" | "), self.cw_total(cw)));
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let cells: Vec<serde_json::Value> = self
            .cells
            .iter()
            .map(|(k, n)| {
                serde_json::json!({
                    "label": k.label.as_str(),
                    "role": k.role.as_str(),
                    "cw": k.cw.as_str(),
                    "hate": k.hate.as_str(),
                    "count": n,
                })
            })
            .collect();
        serde_json::json!({
            "premise_capacity": self.premise_capacity,
            "hateful": self.hateful,
            "non_hateful": self.non_hateful,
            "total_components": self.total_components,
            "hateful_premises": self.hateful_premises,
            "non_hateful_premises": self.non_hateful_premises,
            "cells": cells,
        })
    }
}

pub fn dataset_stats(d: &Dataset) -> StatsReport {
    let mut cells = BTreeMap::new();
    let mut hateful_counts = Vec::new();
    let mut other_counts = Vec::new();
    for m in d.messages() {
        let premises = m.premise_count() as f64;
        if m.label.is_hateful() {
            hateful_counts.push(premises);
        } else {
            other_counts.push(premises);
        }
        for c in &m.components {
            let key = CellKey {
                label: m.label,
                role: c.role,
                cw: c.cw,
                hate: c.hate,
            };
            *cells.entry(key).or_insert(0) += 1;
        }
    }
    let (hateful, non_hateful) = d.class_counts();
    StatsReport {
        premise_capacity: d.premise_capacity(),
        hateful,
        non_hateful,
        total_components: d.component_count(),
        hateful_premises: MeanStd::population(&hateful_counts),
        non_hateful_premises: MeanStd::population(&other_counts),
        cells,
    }
}

/// The gay-marriage message used throughout the documentation: two
/// non-hateful checkworthy premises supporting a hateful checkworthy
/// conclusion.
pub fn worked_example() -> Message {
    use CheckworthinessLabel::Cfs;
    use ComponentHatefulness::*;
    let mut components = vec![
        ArgComponent::premise(0, Cfs, NonHateful),
        ArgComponent::premise(1, Cfs, NonHateful),
        ArgComponent::conclusion(2, Cfs, Hateful),
    ];
    components[0].text = Some("gays want gay marriage".into());
    components[1].text = Some("not because they desire some sort of government paperwork".into());
    components[2].text = Some("they are seeking the right to adopt defenseless children".into());
    Message {
        id: "worked-example".into(),
        components,
        label: MessageLabel::Hateful,
    }
}
