use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Placement point: crops are centered on `(cx, cy)` and shrunk to fit
/// `max_w × max_h`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Anchor {
    pub cx: u32,
    pub cy: u32,
    pub max_w: u32,
    pub max_h: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnchorLayout {
    pub background_id: String,
    pub anchors: Vec<Anchor>,
}

impl AnchorLayout {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::json(path, e))
    }

    pub fn validate(&self, width: u32, height: u32) -> Result<()> {
        if self.background_id.is_empty() {
            return Err(Error::Config("layout has an empty background_id".into()));
        }
        if self.anchors.is_empty() {
            return Err(Error::Config(format!("layout {} has no anchors", self.background_id)));
        }
        for (i, a) in self.anchors.iter().enumerate() {
            if a.cx >= width || a.cy >= height {
                return Err(Error::Config(format!(
                    "layout {} anchor {i} center ({}, {}) lies outside the {width}x{height} background",
                    self.background_id, a.cx, a.cy
                )));
            }
            if a.max_w == 0 || a.max_h == 0 {
                return Err(Error::Config(format!(
                    "layout {} anchor {i} has a zero size cap",
                    self.background_id
                )));
            }
        }
        Ok(())
    }
}
