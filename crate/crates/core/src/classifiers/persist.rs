//! Model files: a single JSON document
//!
//! ```text
//! {"format": "argstruct-model", "version": 1, "family": "<lgr|svm|rforest|gbt>",
//!  "dimension": <n>, "model": {"kind": "linear"|"forest"|"boosted", ...}}
//! ```
//!
//! Floats are written in shortest round-trip form and load back bit-exact.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{ModelFamily, TrainedModel};

pub const FORMAT_TAG: &str = "argstruct-model";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Envelope {
    format: String,
    version: u32,
    family: ModelFamily,
    dimension: usize,
    model: TrainedModel,
}

#[derive(Debug, Error)]
pub enum PersistError {
    #[error("not a model file (format tag `{0}`)")]
    WrongFormat(String),
    #[error("unsupported model file version {0}")]
    UnsupportedVersion(u32),
    #[error("model header disagrees with its parameters")]
    HeaderMismatch,
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub fn save_model<W: Write>(out: W, model: &TrainedModel) -> Result<(), PersistError> {
    let env = Envelope {
        format: FORMAT_TAG.to_string(),
        version: FORMAT_VERSION,
        family: model.family(),
        dimension: model.dimension(),
        model: model.clone(),
    };
    serde_json::to_writer(out, &env)?;
    Ok(())
}

pub fn load_model<R: Read>(input: R) -> Result<TrainedModel, PersistError> {
    let env: Envelope = serde_json::from_reader(input)?;
    if env.format != FORMAT_TAG {
        return Err(PersistError::WrongFormat(env.format));
    }
    if env.version != FORMAT_VERSION {
        return Err(PersistError::UnsupportedVersion(env.version));
    }
    if env.family != env.model.family() || env.dimension != env.model.dimension() {
        return Err(PersistError::HeaderMismatch);
    }
    Ok(env.model)
}
