//! Synthetic annotated corpora.
//!
//! `table1` mode reproduces the corpus label distribution: premise counts
//! come from a rounded, clamped Gaussian per message class, and every
//! component's (checkworthiness, hatefulness) pair is drawn independently
//! from the corpus cell counts for its (message label, role). Non-hateful
//! messages carry no component hatefulness annotation.
//!
//! `separable` mode plants a rule: a message is hateful iff one of its
//! components is annotated hateful. Hateful messages always have a hateful
//! conclusion, so a single threshold on the conclusion's hatefulness bit
//! recovers every label.
//!
//! Message `i` draws from its own ChaCha stream, keyed by `(seed, i)`.

use std::str::FromStr;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{
    ArgComponent, CheckworthinessLabel, ComponentHatefulness, Dataset, Message, MessageLabel, Role,
};

use CheckworthinessLabel::{Cfs, Nfs, Ufs};
use ComponentHatefulness::{Hateful, NonHateful, Unannotated};

/// Corpus cell counts as `(message label, role, cw, component hatefulness, count)`.
pub const TABLE1_CELLS: [(MessageLabel, Role, CheckworthinessLabel, ComponentHatefulness, u32); 18] = [
    (MessageLabel::Hateful, Role::Premise, Nfs, NonHateful, 29),
    (MessageLabel::Hateful, Role::Premise, Nfs, Hateful, 45),
    (MessageLabel::Hateful, Role::Premise, Ufs, NonHateful, 70),
    (MessageLabel::Hateful, Role::Premise, Ufs, Hateful, 29),
    (MessageLabel::Hateful, Role::Premise, Cfs, NonHateful, 110),
    (MessageLabel::Hateful, Role::Premise, Cfs, Hateful, 123),
    (MessageLabel::Hateful, Role::Conclusion, Nfs, NonHateful, 30),
    (MessageLabel::Hateful, Role::Conclusion, Nfs, Hateful, 98),
    (MessageLabel::Hateful, Role::Conclusion, Ufs, NonHateful, 7),
    (MessageLabel::Hateful, Role::Conclusion, Ufs, Hateful, 11),
    (MessageLabel::Hateful, Role::Conclusion, Cfs, NonHateful, 21),
    (MessageLabel::Hateful, Role::Conclusion, Cfs, Hateful, 60),
    (MessageLabel::NonHateful, Role::Premise, Nfs, Unannotated, 107),
    (MessageLabel::NonHateful, Role::Premise, Ufs, Unannotated, 160),
    (MessageLabel::NonHateful, Role::Premise, Cfs, Unannotated, 94),
    (MessageLabel::NonHateful, Role::Conclusion, Nfs, Unannotated, 105),
    (MessageLabel::NonHateful, Role::Conclusion, Ufs, Unannotated, 13),
    (MessageLabel::NonHateful, Role::Conclusion, Cfs, Unannotated, 18),
];

/// Corpus class sizes.
pub const CORPUS_HATEFUL: usize = 227;
pub const CORPUS_NON_HATEFUL: usize = 136;

/// Corpus premise-count mean and standard deviation per message class.
pub const HATEFUL_PREMISES: (f64, f64) = (1.789, 0.644);
pub const NON_HATEFUL_PREMISES: (f64, f64) = (2.654, 1.157);

/// The cells for one (message label, role) group.
pub fn table1_group(
    label: MessageLabel,
    role: Role,
) -> Vec<(CheckworthinessLabel, ComponentHatefulness, u32)> {
    TABLE1_CELLS
        .iter()
        .filter(|c| c.0 == label && c.1 == role)
        .map(|c| (c.2, c.3, c.4))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorMode {
    Table1,
    Separable,
}

impl FromStr for GeneratorMode {
    type Err = GeneratorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "table1" => Ok(Self::Table1),
            "separable" => Ok(Self::Separable),
            other => Err(GeneratorError::InvalidConfig(format!("unknown mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub mode: GeneratorMode,
    pub n_hateful: usize,
    pub n_non_hateful: usize,
    pub seed: u64,
    /// `(mean, std)` of the premise count for hateful messages.
    pub hateful_premises: (f64, f64),
    pub non_hateful_premises: (f64, f64),
    /// Upper clamp on premise counts.
    pub max_premises: usize,
    /// Force at least one hateful component into every hateful message.
    pub guarantee_hateful_component: bool,
}

impl GeneratorConfig {
    pub fn new(mode: GeneratorMode, n_hateful: usize, n_non_hateful: usize, seed: u64) -> Self {
        GeneratorConfig {
            mode,
            n_hateful,
            n_non_hateful,
            seed,
            hateful_premises: HATEFUL_PREMISES,
            non_hateful_premises: NON_HATEFUL_PREMISES,
            max_premises: 6,
            guarantee_hateful_component: false,
        }
    }

    pub fn validate(&self) -> Result<(), GeneratorError> {
        let bad = |m: &str| Err(GeneratorError::InvalidConfig(m.to_string()));
        if self.n_hateful < 1 || self.n_non_hateful < 1 {
            return bad("both class counts must be at least 1");
        }
        for (mean, std) in [self.hateful_premises, self.non_hateful_premises] {
            if !mean.is_finite() || !std.is_finite() || std < 0.0 {
                return bad("premise-count mean must be finite and std non-negative");
            }
        }
        if self.max_premises < 1 {
            return bad("max_premises must be at least 1");
        }
        Ok(())
    }
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self::new(GeneratorMode::Table1, CORPUS_HATEFUL, CORPUS_NON_HATEFUL, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeneratorError {
    #[error("invalid generator config: {0}")]
    InvalidConfig(String),
}

struct GroupSampler {
    cells: Vec<(CheckworthinessLabel, ComponentHatefulness)>,
    dist: WeightedIndex<u32>,
}

impl GroupSampler {
    fn new(label: MessageLabel, role: Role) -> Self {
        let group = table1_group(label, role);
        let dist = WeightedIndex::new(group.iter().map(|c| c.2)).expect("table weights are positive");
        GroupSampler {
            cells: group.iter().map(|c| (c.0, c.1)).collect(),
            dist,
        }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> (CheckworthinessLabel, ComponentHatefulness) {
        self.cells[self.dist.sample(rng)]
    }
}

struct Samplers {
    hateful_premise: GroupSampler,
    hateful_conclusion: GroupSampler,
    other_premise: GroupSampler,
    other_conclusion: GroupSampler,
}

impl Samplers {
    fn new() -> Self {
        Samplers {
            hateful_premise: GroupSampler::new(MessageLabel::Hateful, Role::Premise),
            hateful_conclusion: GroupSampler::new(MessageLabel::Hateful, Role::Conclusion),
            other_premise: GroupSampler::new(MessageLabel::NonHateful, Role::Premise),
            other_conclusion: GroupSampler::new(MessageLabel::NonHateful, Role::Conclusion),
        }
    }

    fn for_label(&self, label: MessageLabel) -> (&GroupSampler, &GroupSampler) {
        match label {
            MessageLabel::Hateful => (&self.hateful_premise, &self.hateful_conclusion),
            MessageLabel::NonHateful => (&self.other_premise, &self.other_conclusion),
        }
    }
}

fn premise_count<R: Rng>(rng: &mut R, (mean, std): (f64, f64), max: usize) -> usize {
    let draw = Normal::new(mean, std).expect("validated std").sample(rng);
    (draw.round().max(1.0) as usize).min(max)
}

const MAX_REDRAWS: usize = 64;

fn table1_components<R: Rng>(
    rng: &mut R,
    samplers: &Samplers,
    label: MessageLabel,
    premises: usize,
    guarantee: bool,
) -> Vec<(CheckworthinessLabel, ComponentHatefulness)> {
    let (p, c) = samplers.for_label(label);
    let draw = |rng: &mut R| -> Vec<_> {
        let mut v: Vec<_> = (0..premises).map(|_| p.sample(rng)).collect();
        v.push(c.sample(rng));
        v
    };
    let mut labels = draw(rng);
    if guarantee && label.is_hateful() {
        for _ in 0..MAX_REDRAWS {
            if labels.iter().any(|l| l.1.is_hateful()) {
                return labels;
            }
            labels = draw(rng);
        }
        if let Some(last) = labels.last_mut() {
            last.1 = Hateful;
        }
    }
    labels
}

fn separable_components<R: Rng>(
    rng: &mut R,
    samplers: &Samplers,
    label: MessageLabel,
    premises: usize,
) -> Vec<(CheckworthinessLabel, ComponentHatefulness)> {
    let (p, c) = samplers.for_label(label);
    let hateful = label.is_hateful();
    let mut out: Vec<_> = (0..premises)
        .map(|_| {
            let cw = p.sample(rng).0;
            let hate = match hateful {
                true if rng.random_bool(0.5) => Hateful,
                true => NonHateful,
                false => Unannotated,
            };
            (cw, hate)
        })
        .collect();
    let cw = c.sample(rng).0;
    out.push((cw, if hateful { Hateful } else { Unannotated }));
    out
}

fn message(cfg: &GeneratorConfig, samplers: &Samplers, index: usize) -> Message {
    let label = MessageLabel::from_hateful(index < cfg.n_hateful);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index as u64);
    let shape = match label {
        MessageLabel::Hateful => cfg.hateful_premises,
        MessageLabel::NonHateful => cfg.non_hateful_premises,
    };
    let premises = premise_count(&mut rng, shape, cfg.max_premises);
    let labels = match cfg.mode {
        GeneratorMode::Table1 => {
            table1_components(&mut rng, samplers, label, premises, cfg.guarantee_hateful_component)
        }
        GeneratorMode::Separable => separable_components(&mut rng, samplers, label, premises),
    };
    let components = labels
        .into_iter()
        .enumerate()
        .map(|(position, (cw, hate))| {
            if position < premises {
                ArgComponent::premise(position, cw, hate)
            } else {
                ArgComponent::conclusion(position, cw, hate)
            }
        })
        .collect();
    Message {
        id: format!("synth-{index:06}"),
        components,
        label,
    }
}

/// Hateful messages come first, then non-hateful ones.
pub fn generate(cfg: &GeneratorConfig) -> Result<Dataset, GeneratorError> {
    cfg.validate()?;
    let samplers = Samplers::new();
    let messages = (0..cfg.n_hateful + cfg.n_non_hateful)
        .map(|i| message(cfg, &samplers, i))
        .collect();
    Ok(Dataset::new(messages).expect("generated messages are structurally valid"))
}
