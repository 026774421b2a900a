// SPDX-License-Identifier: Apache-2.0

//! Dataset class-id mappings.
//!
//! A mapping file is TOML with two integer arrays:
//!
//! ```toml
//! ground = [40, 44, 48, 49, 60, 72]
//! ignore = [0, 1, 70]
//! ```
//!
//! Classes in neither list count as non-ground.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LabelMapping {
    ground: BTreeSet<u32>,
    ignore: BTreeSet<u32>,
}

/// What a truth class means for evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TruthClass {
    Ground,
    NonGround,
    Ignored,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MappingDoc {
    ground: Vec<u32>,
    #[serde(default)]
    ignore: Vec<u32>,
}

impl LabelMapping {
    pub fn new(ground: impl IntoIterator<Item = u32>, ignore: impl IntoIterator<Item = u32>) -> Result<Self> {
        let ground: BTreeSet<u32> = ground.into_iter().collect();
        let ignore: BTreeSet<u32> = ignore.into_iter().collect();
        if let Some(c) = ground.intersection(&ignore).next() {
            return Err(Error::config(format!("class {c} is both ground and ignored")));
        }
        Ok(Self { ground, ignore })
    }

    /// SemanticKITTI: road, parking, sidewalk, other-ground, lane-marking
    /// and terrain are ground; unlabeled, outlier and vegetation are
    /// excluded.
    pub fn semantic_kitti() -> Self {
        Self::new([40, 44, 48, 49, 60, 72], [0, 1, 70]).expect("disjoint sets")
    }

    pub fn parse(text: &str) -> Result<Self> {
        let doc: MappingDoc = toml::from_str(text).map_err(|e| Error::Parse {
            path: Default::default(),
            message: e.message().to_string(),
        })?;
        Self::new(doc.ground, doc.ignore)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Parse { message, .. } | Error::Config(message) => Error::Parse {
                path: path.to_path_buf(),
                message,
            },
            other => other,
        })
    }

    pub fn ground_classes(&self) -> &BTreeSet<u32> {
        &self.ground
    }

    pub fn ignore_classes(&self) -> &BTreeSet<u32> {
        &self.ignore
    }

    #[inline]
    pub fn classify(&self, class: u32) -> TruthClass {
        if self.ignore.contains(&class) {
            TruthClass::Ignored
        } else if self.ground.contains(&class) {
            TruthClass::Ground
        } else {
            TruthClass::NonGround
        }
    }
}
