//! Class manifest: one `class_id<TAB>class_name` per line.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassEntry {
    pub id: u32,
    pub name: String,
}

/// Classes sorted by id. Ids are contiguous from 0 so they can index
/// darknet's `obj.names` directly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassManifest {
    classes: Vec<ClassEntry>,
}

impl ClassManifest {
    pub fn new(mut classes: Vec<ClassEntry>) -> Result<Self> {
        classes.sort_by_key(|c| c.id);
        if classes.is_empty() {
            return Err(Error::Config("class manifest is empty".into()));
        }
        for (i, c) in classes.iter().enumerate() {
            if c.id as usize != i {
                return Err(Error::Config(format!(
                    "class ids must be contiguous from 0; expected {i}, found {} ({})",
                    c.id, c.name
                )));
            }
            if c.name.is_empty() || c.name.contains(['/', '\\', '\n', '\t']) {
                return Err(Error::Config(format!("invalid class name {:?}", c.name)));
            }
            if classes[..i].iter().any(|o| o.name == c.name) {
                return Err(Error::Config(format!("duplicate class name {:?}", c.name)));
            }
        }
        Ok(Self { classes })
    }

    /// Blank lines and lines starting with `#` are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut classes = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (id, name) = line
                .split_once('\t')
                .ok_or_else(|| Error::Config(format!("manifest line {}: expected `id<TAB>name`", lineno + 1)))?;
            let id = id
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("manifest line {}: bad class id {id:?}", lineno + 1)))?;
            classes.push(ClassEntry {
                id,
                name: name.trim().to_string(),
            });
        }
        Self::new(classes)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn to_text(&self) -> String {
        self.classes.iter().map(|c| format!("{}\t{}\n", c.id, c.name)).collect()
    }

    pub fn classes(&self) -> &[ClassEntry] {
        &self.classes
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn get(&self, id: u32) -> Option<&ClassEntry> {
        self.classes.get(id as usize)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_sorts() {
        let m = ClassManifest::parse("# classes\n1\tbox\n0\tcup\n\n").unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m.get(0).unwrap().name, "cup");
        assert_eq!(m.to_text(), "0\tcup\n1\tbox\n");
    }

    #[test]
    fn rejects_gaps_duplicates_and_garbage() {
        assert!(ClassManifest::parse("0\tcup\n2\tbox\n").is_err());
        assert!(ClassManifest::parse("0\tcup\n1\tcup\n").is_err());
        assert!(ClassManifest::parse("0 cup\n").is_err());
        assert!(ClassManifest::parse("x\tcup\n").is_err());
        assert!(ClassManifest::parse("").is_err());
    }
}
