//! Model file: one JSON document with a versioned header, the classifier
//! (vocabulary, intent index, weights, biases, config snapshot) and the
//! canonical domain files it was trained against. Floats are written with
//! shortest round-trip formatting, so save/load/save is byte-identical.

use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::ClassifierModel;
use crate::domain::DocumentSet;

pub const MODEL_FORMAT: &str = "vehicle-assistant-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum PersistError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("malformed model file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("not a model file (format `{0}`)")]
    Format(String),
    #[error("unsupported model version {0} (expected {MODEL_VERSION})")]
    Version(u32),
    #[error("invalid model: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format: String,
    pub version: u32,
    pub classifier: ClassifierModel,
    pub domain: DocumentSet,
}

impl ModelFile {
    pub fn new(classifier: ClassifierModel, domain: DocumentSet) -> Self {
        ModelFile {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_VERSION,
            classifier,
            domain,
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        serde_json::to_vec(self).expect("model serializes")
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, PersistError> {
        #[derive(Deserialize)]
        struct Header {
            format: String,
            version: u32,
        }
        let header: Header = serde_json::from_slice(bytes)?;
        if header.format != MODEL_FORMAT {
            return Err(PersistError::Format(header.format));
        }
        if header.version != MODEL_VERSION {
            return Err(PersistError::Version(header.version));
        }
        let file: ModelFile = serde_json::from_slice(bytes)?;
        file.classifier.check().map_err(PersistError::Invalid)?;
        Ok(file)
    }

    pub fn save(&self, path: &Path) -> Result<(), PersistError> {
        fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, PersistError> {
        Self::from_bytes(&fs::read(path)?)
    }

    /// Hex SHA-256 of the serialized file.
    pub fn fingerprint(&self) -> String {
        let digest = Sha256::digest(self.to_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
