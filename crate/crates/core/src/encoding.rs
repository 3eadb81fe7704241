//! Fixed-length feature vectors built from argument structure and
//! component annotations.
//!
//! Every vector is a concatenation of up to three blocks, always in the
//! order structure, checkworthiness, hatefulness. Inside each block the
//! slots run `p0 .. p{L-1}` followed by the conclusion slot. Premises fill
//! slots from the left; unused premise slots are zero.

use std::fmt;
use std::ops::Deref;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{ArgComponent, CheckworthinessLabel, Message};

/// The eight encoding families, in report order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EncodingFamily {
    #[serde(rename = "arg-str")]
    ArgStr,
    #[serde(rename = "arg-str-p")]
    ArgStrP,
    #[serde(rename = "arg-str-c-given-p")]
    ArgStrCGivenP,
    #[serde(rename = "arg-str-cw")]
    ArgStrCw,
    #[serde(rename = "arg-str-p-cw")]
    ArgStrPCw,
    #[serde(rename = "arg-str-c-given-p-cw")]
    ArgStrCGivenPCw,
    #[serde(rename = "arg-str-hs")]
    ArgStrHs,
    #[serde(rename = "arg-str-cw-hs")]
    ArgStrCwHs,
}

impl EncodingFamily {
    pub const ALL: [EncodingFamily; 8] = [
        Self::ArgStr,
        Self::ArgStrP,
        Self::ArgStrCGivenP,
        Self::ArgStrCw,
        Self::ArgStrPCw,
        Self::ArgStrCGivenPCw,
        Self::ArgStrHs,
        Self::ArgStrCwHs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::ArgStr => "arg-str",
            Self::ArgStrP => "arg-str-p",
            Self::ArgStrCGivenP => "arg-str-c-given-p",
            Self::ArgStrCw => "arg-str-cw",
            Self::ArgStrPCw => "arg-str-p-cw",
            Self::ArgStrCGivenPCw => "arg-str-c-given-p-cw",
            Self::ArgStrHs => "arg-str-hs",
            Self::ArgStrCwHs => "arg-str-cw-hs",
        }
    }

    pub fn is_two_stage(self) -> bool {
        matches!(self, Self::ArgStrCGivenP | Self::ArgStrCGivenPCw)
    }

    /// Premise-only family the first stage of a two-stage family trains on.
    pub fn stage_one_family(self) -> Option<EncodingFamily> {
        match self {
            Self::ArgStrCGivenP => Some(Self::ArgStrP),
            Self::ArgStrCGivenPCw => Some(Self::ArgStrPCw),
            _ => None,
        }
    }

    fn has_cw(self) -> bool {
        matches!(
            self,
            Self::ArgStrCw | Self::ArgStrPCw | Self::ArgStrCGivenPCw | Self::ArgStrCwHs
        )
    }

    fn has_hs(self) -> bool {
        matches!(self, Self::ArgStrHs | Self::ArgStrCwHs)
    }

    fn includes_conclusion(self) -> bool {
        !matches!(self, Self::ArgStrP | Self::ArgStrPCw)
    }
}

impl fmt::Display for EncodingFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown encoding family `{0}`")]
pub struct UnknownEncoding(pub String);

impl FromStr for EncodingFamily {
    type Err = UnknownEncoding;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| UnknownEncoding(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EncodingSpec {
    pub family: EncodingFamily,
    /// Premise slot capacity `L`, at least 1.
    pub capacity: usize,
}

impl EncodingSpec {
    pub fn new(family: EncodingFamily, capacity: usize) -> Self {
        assert!(capacity >= 1, "premise capacity must be at least 1");
        EncodingSpec { family, capacity }
    }
}

/// Dense feature row.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FeatureVector(pub Vec<f64>);

impl FeatureVector {
    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for FeatureVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for FeatureVector {
    fn from(v: Vec<f64>) -> Self {
        FeatureVector(v)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodingError {
    #[error("message {id} has {premises} premises but capacity is {capacity}")]
    PremiseOverflow { id: String, premises: usize, capacity: usize },
    #[error("{0} needs a stage-one score")]
    MissingStageOneScore(EncodingFamily),
    #[error("{0} takes no stage-one score")]
    UnexpectedStageOneScore(EncodingFamily),
}

/// What to do with messages holding more premises than there are slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OverflowPolicy {
    #[default]
    Error,
    /// Keep the first `L` premises.
    Truncate,
}

pub fn encoding_length(spec: EncodingSpec) -> usize {
    let l = spec.capacity;
    match spec.family {
        EncodingFamily::ArgStr => l + 1,
        EncodingFamily::ArgStrP => l,
        EncodingFamily::ArgStrCGivenP => 2,
        EncodingFamily::ArgStrCw => 4 * (l + 1),
        EncodingFamily::ArgStrPCw => 4 * l,
        EncodingFamily::ArgStrCGivenPCw => 5,
        EncodingFamily::ArgStrHs => 2 * (l + 1),
        EncodingFamily::ArgStrCwHs => 5 * (l + 1),
    }
}

/// Column names matching the layout of [`encode`].
pub fn feature_names(spec: EncodingSpec) -> Vec<String> {
    let family = spec.family;
    if family.is_two_stage() {
        let mut names = vec!["stage1_score".to_string(), "concl".to_string()];
        if family.has_cw() {
            names.extend(CheckworthinessLabel::ALL.iter().map(|cw| format!("concl_{cw}")));
        }
        return names;
    }
    let slots: Vec<String> = (0..spec.capacity)
        .map(|i| format!("p{i}"))
        .chain(family.includes_conclusion().then(|| "concl".to_string()))
        .collect();
    let mut names = slots.clone();
    if family.has_cw() {
        for slot in &slots {
            names.extend(CheckworthinessLabel::ALL.iter().map(|cw| format!("{slot}_{cw}")));
        }
    }
    if family.has_hs() {
        names.extend(slots.iter().map(|slot| format!("{slot}_hs")));
    }
    names
}

/// Premises placed into their slots, `None` for unused slots.
fn premise_slots(
    m: &Message,
    capacity: usize,
    overflow: OverflowPolicy,
) -> Result<Vec<Option<&ArgComponent>>, EncodingError> {
    let premises: Vec<&ArgComponent> = m.premises().collect();
    if premises.len() > capacity && overflow == OverflowPolicy::Error {
        return Err(EncodingError::PremiseOverflow {
            id: m.id.clone(),
            premises: premises.len(),
            capacity,
        });
    }
    let mut slots: Vec<Option<&ArgComponent>> = premises.into_iter().take(capacity).map(Some).collect();
    slots.resize(capacity, None);
    Ok(slots)
}

fn slots(
    m: &Message,
    capacity: usize,
    include_conclusion: bool,
    overflow: OverflowPolicy,
) -> Result<Vec<Option<&ArgComponent>>, EncodingError> {
    let mut slots = premise_slots(m, capacity, overflow)?;
    if include_conclusion {
        slots.push(m.conclusion());
    }
    Ok(slots)
}

fn cw_one_hot(out: &mut Vec<f64>, c: Option<&ArgComponent>) {
    let mut triple = [0.0; 3];
    if let Some(c) = c {
        triple[c.cw.one_hot_index()] = 1.0;
    }
    out.extend_from_slice(&triple);
}

pub fn structure_vector(m: &Message, capacity: usize, include_conclusion: bool) -> Result<FeatureVector, EncodingError> {
    structure_vector_with(m, capacity, include_conclusion, OverflowPolicy::Error)
}

pub fn structure_vector_with(
    m: &Message,
    capacity: usize,
    include_conclusion: bool,
    overflow: OverflowPolicy,
) -> Result<FeatureVector, EncodingError> {
    let slots = slots(m, capacity, include_conclusion, overflow)?;
    Ok(slots.iter().map(|s| if s.is_some() { 1.0 } else { 0.0 }).collect::<Vec<_>>().into())
}

pub fn cw_block(m: &Message, capacity: usize, include_conclusion: bool) -> Result<FeatureVector, EncodingError> {
    cw_block_with(m, capacity, include_conclusion, OverflowPolicy::Error)
}

pub fn cw_block_with(
    m: &Message,
    capacity: usize,
    include_conclusion: bool,
    overflow: OverflowPolicy,
) -> Result<FeatureVector, EncodingError> {
    let slots = slots(m, capacity, include_conclusion, overflow)?;
    let mut out = Vec::with_capacity(3 * slots.len());
    for slot in slots {
        cw_one_hot(&mut out, slot);
    }
    Ok(out.into())
}

/// One entry per slot, conclusion included; 1 only for components
/// annotated hateful.
pub fn hs_block(m: &Message, capacity: usize) -> Result<FeatureVector, EncodingError> {
    hs_block_with(m, capacity, OverflowPolicy::Error)
}

pub fn hs_block_with(m: &Message, capacity: usize, overflow: OverflowPolicy) -> Result<FeatureVector, EncodingError> {
    let slots = slots(m, capacity, true, overflow)?;
    Ok(slots
        .iter()
        .map(|s| match s {
            Some(c) if c.hate.is_hateful() => 1.0,
            _ => 0.0,
        })
        .collect::<Vec<_>>()
        .into())
}

/// Encodes a message. `stage1_score` must be given exactly for the
/// two-stage families.
pub fn encode(m: &Message, spec: EncodingSpec, stage1_score: Option<f64>) -> Result<FeatureVector, EncodingError> {
    encode_with(m, spec, stage1_score, OverflowPolicy::Error)
}

pub fn encode_with(
    m: &Message,
    spec: EncodingSpec,
    stage1_score: Option<f64>,
    overflow: OverflowPolicy,
) -> Result<FeatureVector, EncodingError> {
    let family = spec.family;
    let l = spec.capacity;
    if family.is_two_stage() {
        let score = stage1_score.ok_or(EncodingError::MissingStageOneScore(family))?;
        // Overflow is still reported for two-stage families.
        premise_slots(m, l, overflow)?;
        let mut out = vec![score, 1.0];
        if family.has_cw() {
            cw_one_hot(&mut out, m.conclusion());
        }
        return Ok(out.into());
    }
    if stage1_score.is_some() {
        return Err(EncodingError::UnexpectedStageOneScore(family));
    }
    let concl = family.includes_conclusion();
    let mut out = structure_vector_with(m, l, concl, overflow)?.into_inner();
    if family.has_cw() {
        out.extend(cw_block_with(m, l, concl, overflow)?.iter());
    }
    if family.has_hs() {
        out.extend(hs_block_with(m, l, overflow)?.iter());
    }
    debug_assert_eq!(out.len(), encoding_length(spec));
    Ok(out.into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{worked_example, ComponentHatefulness::*, MessageLabel};
    use CheckworthinessLabel::*;

    fn message(premises: &[(CheckworthinessLabel, crate::domain::ComponentHatefulness)], concl: (CheckworthinessLabel, crate::domain::ComponentHatefulness), label: MessageLabel) -> Message {
        let mut components: Vec<ArgComponent> = premises
            .iter()
            .enumerate()
            .map(|(i, &(cw, h))| ArgComponent::premise(i, cw, h))
            .collect();
        components.push(ArgComponent::conclusion(premises.len(), concl.0, concl.1));
        Message {
            id: "t".into(),
            components,
            label,
        }
    }

    fn n_premises(n: usize) -> Message {
        message(&vec![(Nfs, Unannotated); n], (Nfs, Unannotated), MessageLabel::NonHateful)
    }

    #[test]
    fn lengths() {
        assert_eq!(encoding_length(EncodingSpec::new(EncodingFamily::ArgStr, 4)), 5);
        assert_eq!(encoding_length(EncodingSpec::new(EncodingFamily::ArgStrCwHs, 2)), 15);
        for l in 1..6 {
            assert_eq!(encoding_length(EncodingSpec::new(EncodingFamily::ArgStrCGivenP, l)), 2);
            assert_eq!(encoding_length(EncodingSpec::new(EncodingFamily::ArgStrCGivenPCw, l)), 5);
            assert_eq!(encoding_length(EncodingSpec::new(EncodingFamily::ArgStrCw, l)), (l + 1) + 3 * (l + 1));
            assert_eq!(encoding_length(EncodingSpec::new(EncodingFamily::ArgStrPCw, l)), l + 3 * l);
            assert_eq!(encoding_length(EncodingSpec::new(EncodingFamily::ArgStrHs, l)), 2 * (l + 1));
        }
    }

    #[test]
    fn structure() {
        let m = n_premises(2);
        assert_eq!(structure_vector(&m, 4, true).unwrap().0, vec![1.0, 1.0, 0.0, 0.0, 1.0]);
        assert_eq!(structure_vector(&m, 4, false).unwrap().0, vec![1.0, 1.0, 0.0, 0.0]);
        assert!(matches!(
            structure_vector(&n_premises(5), 4, true),
            Err(EncodingError::PremiseOverflow { premises: 5, capacity: 4, .. })
        ));
    }

    #[test]
    fn truncation_keeps_leading_premises() {
        let m = message(&[(Cfs, Unannotated), (Ufs, Unannotated), (Nfs, Unannotated)], (Nfs, Unannotated), MessageLabel::NonHateful);
        let v = cw_block_with(&m, 2, false, OverflowPolicy::Truncate).unwrap();
        assert_eq!(v.0, vec![0.0, 0.0, 1.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn cw_blocks() {
        let m = message(&[(Cfs, Unannotated)], (Nfs, Unannotated), MessageLabel::NonHateful);
        assert_eq!(
            cw_block(&m, 2, true).unwrap().0,
            vec![0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0]
        );
        assert_eq!(
            cw_block(&worked_example(), 2, true).unwrap().0,
            vec![0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0]
        );
    }

    #[test]
    fn hs_blocks() {
        assert_eq!(hs_block(&worked_example(), 2).unwrap().0, vec![0.0, 0.0, 1.0]);
        assert_eq!(hs_block(&n_premises(2), 2).unwrap().0, vec![0.0, 0.0, 0.0]);
        let m = message(&[(Ufs, NonHateful)], (Cfs, NonHateful), MessageLabel::Hateful);
        assert_eq!(hs_block(&m, 1).unwrap().0, vec![0.0, 0.0]);
    }

    #[test]
    fn worked_example_full_encoding() {
        let v = encode(&worked_example(), EncodingSpec::new(EncodingFamily::ArgStrCwHs, 2), None).unwrap();
        let expected = [
            1.0, 1.0, 1.0, //
            0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, //
            0.0, 0.0, 1.0,
        ];
        assert_eq!(v.0, expected);
    }

    #[test]
    fn two_stage_encodings() {
        let m = worked_example();
        let spec = EncodingSpec::new(EncodingFamily::ArgStrCGivenP, 3);
        assert_eq!(encode(&m, spec, Some(0.5)).unwrap().0, vec![0.5, 1.0]);
        assert_eq!(encode(&m, spec, None), Err(EncodingError::MissingStageOneScore(EncodingFamily::ArgStrCGivenP)));
        let spec = EncodingSpec::new(EncodingFamily::ArgStrCGivenPCw, 3);
        assert_eq!(encode(&m, spec, Some(0.25)).unwrap().0, vec![0.25, 1.0, 0.0, 0.0, 1.0]);
        assert_eq!(
            encode(&m, EncodingSpec::new(EncodingFamily::ArgStr, 2), Some(0.5)),
            Err(EncodingError::UnexpectedStageOneScore(EncodingFamily::ArgStr))
        );
    }

    #[test]
    fn names_match_lengths() {
        for family in EncodingFamily::ALL {
            for l in 1..5 {
                let spec = EncodingSpec::new(family, l);
                assert_eq!(feature_names(spec).len(), encoding_length(spec), "{family}");
            }
        }
        let names = feature_names(EncodingSpec::new(EncodingFamily::ArgStrCwHs, 1));
        assert_eq!(
            names,
            ["p0", "concl", "p0_NFS", "p0_UFS", "p0_CFS", "concl_NFS", "concl_UFS", "concl_CFS", "p0_hs", "concl_hs"]
        );
    }

    #[test]
    fn family_names_round_trip() {
        for family in EncodingFamily::ALL {
            assert_eq!(family.name().parse::<EncodingFamily>().unwrap(), family);
        }
        assert!("arg-str-x".parse::<EncodingFamily>().is_err());
    }
}
