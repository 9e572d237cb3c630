//! Bulk ingestion of a capture directory laid out as
//! `<class_name>/<camera>/<frame>.png`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{matte, segment, Camera, ClassEntry, ClassManifest, KeyParams, ObjectCrop, Provenance};
use crate::ace::{ace, AceParams};
use crate::imaging::read_png;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IngestOptions {
    pub expected_views_per_camera: usize,
    pub ace: AceParams,
    pub key: KeyParams,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self {
            expected_views_per_camera: 200,
            ace: AceParams::default(),
            key: KeyParams::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureKind {
    Unreadable,
    NoObject,
    BadName,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameFailure {
    pub class_name: String,
    pub camera: Camera,
    pub frame: Option<u32>,
    pub path: PathBuf,
    pub kind: FailureKind,
    pub message: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CameraCount {
    pub frames: usize,
    pub crops: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassReport {
    pub class_id: u32,
    pub class_name: String,
    pub cameras: BTreeMap<Camera, CameraCount>,
    pub crops: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub expected_views_per_camera: usize,
    pub classes: Vec<ClassReport>,
    pub total_crops: usize,
    pub failures: Vec<FrameFailure>,
    pub warnings: Vec<String>,
}

impl IngestReport {
    pub fn is_clean(&self) -> bool {
        self.failures.is_empty() && self.warnings.is_empty()
    }
}

struct Frame {
    class: ClassEntry,
    camera: Camera,
    index: u32,
    path: PathBuf,
}

enum Listing {
    Frame(Frame),
    Bad(FrameFailure),
}

/// Keys, equalizes and mattes every frame.
///
/// The key mask is computed on the raw frame and the crop colors come from
/// its ACE-equalized version. Unreadable or empty frames are reported, not
/// fatal; a class left without any crop is. Output order is
/// (class id, camera, frame index) regardless of scheduling.
pub fn ingest_capture_set(
    root: impl AsRef<Path>,
    manifest: &ClassManifest,
    options: &IngestOptions,
) -> Result<(Vec<ObjectCrop>, IngestReport)> {
    let root = root.as_ref();
    options.ace.validate()?;
    options.key.validate()?;

    let mut listing = Vec::new();
    for class in manifest.classes() {
        for camera in Camera::ALL {
            list_frames(root, class, camera, &mut listing)?;
        }
    }

    let results: Vec<(Option<&Frame>, Result<ObjectCrop, FrameFailure>)> = listing
        .par_iter()
        .map(|item| match item {
            Listing::Frame(frame) => (Some(frame), process_frame(frame, options)),
            Listing::Bad(failure) => (None, Err(failure.clone())),
        })
        .collect();

    let mut report = IngestReport {
        expected_views_per_camera: options.expected_views_per_camera,
        ..IngestReport::default()
    };
    let mut per_class: BTreeMap<u32, ClassReport> = manifest
        .classes()
        .iter()
        .map(|c| {
            let cameras = Camera::ALL.iter().map(|&cam| (cam, CameraCount::default())).collect();
            (
                c.id,
                ClassReport {
                    class_id: c.id,
                    class_name: c.name.clone(),
                    cameras,
                    crops: 0,
                },
            )
        })
        .collect();

    let mut crops = Vec::new();
    for (frame, result) in results {
        if let Some(frame) = frame {
            let entry = per_class.get_mut(&frame.class.id).expect("listed class");
            entry.cameras.get_mut(&frame.camera).expect("listed camera").frames += 1;
        }
        match result {
            Ok(crop) => {
                let entry = per_class.get_mut(&crop.class_id).expect("listed class");
                entry.cameras.get_mut(&crop.source_camera).expect("listed camera").crops += 1;
                entry.crops += 1;
                crops.push(crop);
            }
            Err(failure) => report.failures.push(failure),
        }
    }

    for class in per_class.values() {
        for (camera, count) in &class.cameras {
            if count.frames != options.expected_views_per_camera {
                report.warnings.push(format!(
                    "class {} camera {}: expected {}, found {}",
                    class.class_name, camera, options.expected_views_per_camera, count.frames
                ));
            }
        }
    }
    report.total_crops = crops.len();
    report.classes = per_class.into_values().collect();

    if let Some(empty) = report.classes.iter().find(|c| c.crops == 0) {
        return Err(Error::EmptyClass {
            class_id: empty.class_id,
            class_name: empty.class_name.clone(),
        });
    }
    Ok((crops, report))
}

fn list_frames(root: &Path, class: &ClassEntry, camera: Camera, out: &mut Vec<Listing>) -> Result<()> {
    let dir = root.join(&class.name).join(camera.as_str());
    let entries = match std::fs::read_dir(&dir) {
        Ok(entries) => entries,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(()),
        Err(e) => return Err(Error::io(&dir, e)),
    };
    let mut frames = Vec::new();
    let mut bad = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(&dir, e))?.path();
        if path.extension().and_then(|e| e.to_str()) != Some("png") {
            continue;
        }
        match path.file_stem().and_then(|s| s.to_str()).and_then(|s| s.parse::<u32>().ok()) {
            Some(index) => frames.push(Frame {
                class: class.clone(),
                camera,
                index,
                path,
            }),
            None => bad.push(FrameFailure {
                class_name: class.name.clone(),
                camera,
                frame: None,
                message: "frame file name is not an integer index".into(),
                path,
                kind: FailureKind::BadName,
            }),
        }
    }
    frames.sort_by_key(|f| f.index);
    bad.sort_by(|a, b| a.path.cmp(&b.path));
    out.extend(frames.into_iter().map(Listing::Frame));
    out.extend(bad.into_iter().map(Listing::Bad));
    Ok(())
}

fn process_frame(frame: &Frame, options: &IngestOptions) -> Result<ObjectCrop, FrameFailure> {
    let fail = |kind, message: String| FrameFailure {
        class_name: frame.class.name.clone(),
        camera: frame.camera,
        frame: Some(frame.index),
        path: frame.path.clone(),
        kind,
        message,
    };
    let raw = read_png(&frame.path)
        .and_then(|img| img.to_rgb())
        .map_err(|e| fail(FailureKind::Unreadable, e.to_string()))?;
    let mask = segment(&raw, &options.key).map_err(|e| fail(FailureKind::Unreadable, e.to_string()))?;
    if mask.is_empty() {
        return Err(fail(FailureKind::NoObject, Error::NoObject.to_string()));
    }
    let equalized = ace(&raw, &options.ace).map_err(|e| fail(FailureKind::Unreadable, e.to_string()))?;
    let provenance = Provenance {
        view: frame.index,
        camera: frame.camera,
    };
    matte(&equalized, &mask, &frame.class, provenance, options.key.despill).map_err(|e| match e {
        Error::NoObject => fail(FailureKind::NoObject, e.to_string()),
        other => fail(FailureKind::Unreadable, other.to_string()),
    })
}
