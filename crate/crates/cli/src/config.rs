//! Pipeline configuration: one JSON file describing a dataset build.
//!
//! ```json
//! {
//!   "captures": "captures",
//!   "classes": "classes.tsv",
//!   "backgrounds": "backgrounds",
//!   "layouts": "layouts",
//!   "output": "out",
//!   "expected_views_per_camera": 200,
//!   "ace": { "slope": 10, "samples": 500, "seed": 0 },
//!   "key": { "hue_min": 64, "hue_max": 106 },
//!   "generation": { "seed": 42, "rounds": 10 }
//! }
//! ```
//!
//! Relative paths are resolved against the config file's directory.

use std::path::{Path, PathBuf};

use chromaforge::ace::AceParams;
use chromaforge::chromakey::{ClassManifest, IngestOptions, KeyParams};
use chromaforge::datasetgen::{pair_backgrounds, AnchorLayout, Background, GenConfig, INCOMPLETE_MARKER};
use chromaforge::imaging::read_png;
use serde::{Deserialize, Serialize};

use crate::{CliResult, Failure, EXIT_IO};

fn default_views() -> usize {
    200
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub captures: PathBuf,
    pub classes: PathBuf,
    /// Directory of background PNGs; the file stem is the background id.
    pub backgrounds: PathBuf,
    /// Directory of anchor layout JSON files.
    pub layouts: PathBuf,
    pub output: PathBuf,
    #[serde(default = "default_views")]
    pub expected_views_per_camera: usize,
    #[serde(default)]
    pub ace: AceParams,
    #[serde(default)]
    pub key: KeyParams,
    pub generation: GenConfig,
}

/// Everything a build needs, loaded and cross-checked.
pub struct Prepared {
    pub manifest: ClassManifest,
    /// Raw (not yet equalized) backgrounds paired with their layouts.
    pub backgrounds: Vec<Background>,
}

impl PipelineConfig {
    /// Reads and parses `path`, resolving relative paths. A missing file is
    /// an I/O failure; anything unparsable is a configuration failure.
    pub fn load(path: impl AsRef<Path>) -> CliResult<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Failure {
            code: EXIT_IO,
            message: format!("cannot read config {}: {e}", path.display()),
        })?;
        let mut config: Self = serde_json::from_str(&text)
            .map_err(|e| Failure::usage(format!("invalid config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [
            &mut config.captures,
            &mut config.classes,
            &mut config.backgrounds,
            &mut config.layouts,
            &mut config.output,
        ] {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(config)
    }

    pub fn ingest_options(&self) -> IngestOptions {
        IngestOptions {
            expected_views_per_camera: self.expected_views_per_camera,
            ace: self.ace,
            key: self.key,
        }
    }

    /// Checks parameters and paths without writing anything. With `force`
    /// an existing dataset tree at the output root is acceptable.
    pub fn validate(&self, force: bool) -> CliResult {
        self.ace.validate()?;
        self.key.validate()?;
        self.generation.validate()?;
        let need = |p: &Path, dir: bool| {
            let ok = if dir { p.is_dir() } else { p.is_file() };
            if ok {
                Ok(())
            } else {
                let kind = if dir { "directory" } else { "file" };
                Err(Failure::usage(format!("{kind} {} does not exist", p.display())))
            }
        };
        need(&self.captures, true)?;
        need(&self.classes, false)?;
        need(&self.backgrounds, true)?;
        need(&self.layouts, true)?;
        check_output_root(&self.output, force)
    }

    /// Loads the class manifest, backgrounds and layouts and pairs them.
    pub fn prepare(&self) -> CliResult<Prepared> {
        let manifest = ClassManifest::load(&self.classes)?;
        let mut images = Vec::new();
        for path in files_with_extension(&self.backgrounds, "png")? {
            let id = stem(&path);
            images.push((id, read_png(&path)?.to_rgb()?));
        }
        if images.is_empty() {
            return Err(Failure::usage(format!("no background PNGs in {}", self.backgrounds.display())));
        }
        let mut layouts = Vec::new();
        for path in files_with_extension(&self.layouts, "json")? {
            layouts.push(AnchorLayout::load(&path).map_err(|e| Failure::usage(e.to_string()))?);
        }
        Ok(Prepared {
            manifest,
            backgrounds: pair_backgrounds(images, layouts)?,
        })
    }
}

/// The output root must be missing or empty; with `force` it may also hold
/// a previous dataset tree.
pub fn check_output_root(root: &Path, force: bool) -> CliResult {
    let Ok(mut entries) = std::fs::read_dir(root) else {
        if root.exists() {
            return Err(Failure::usage(format!("output root {} is not a directory", root.display())));
        }
        return Ok(());
    };
    if entries.next().is_none() {
        return Ok(());
    }
    if !force {
        return Err(Failure::usage(format!(
            "output root {} is not empty (pass --force to replace a previous dataset)",
            root.display()
        )));
    }
    if is_dataset_tree(root) {
        Ok(())
    } else {
        Err(Failure::usage(format!(
            "refusing to replace {}: it does not look like a dataset tree",
            root.display()
        )))
    }
}

pub fn is_dataset_tree(root: &Path) -> bool {
    root.join("obj.data").is_file() || root.join(INCOMPLETE_MARKER).is_file()
}

pub fn files_with_extension(dir: &Path, ext: &str) -> CliResult<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Failure {
        code: EXIT_IO,
        message: format!("cannot list {}: {e}", dir.display()),
    })?;
    let mut out: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().and_then(|e| e.to_str()) == Some(ext))
        .collect();
    out.sort();
    Ok(out)
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}
