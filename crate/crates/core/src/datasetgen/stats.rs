use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::darknet::{parse_label_file, train_entry_id};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelProblem {
    pub path: PathBuf,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub images: usize,
    pub total_boxes: usize,
    pub class_names: Vec<String>,
    pub per_class: BTreeMap<u32, usize>,
    /// boxes in an image → number of images with that many boxes
    pub boxes_per_image: BTreeMap<usize, usize>,
    /// Mean normalized box area (width × height).
    pub mean_box_area: f64,
    /// Classes whose count is below `balance_threshold` × the mean class count.
    pub underrepresented: Vec<u32>,
    pub balance_threshold: f64,
    pub problems: Vec<LabelProblem>,
    pub warnings: Vec<String>,
}

/// Summarizes an emitted darknet tree. Unreadable label files are listed in
/// `problems`; only a missing `train.txt` is an error.
pub fn dataset_stats(root: impl AsRef<Path>, balance_threshold: f64) -> Result<DatasetStats> {
    let root = root.as_ref();
    let train_path = root.join("train.txt");
    let train = std::fs::read_to_string(&train_path).map_err(|e| Error::io(&train_path, e))?;
    let class_names: Vec<String> = std::fs::read_to_string(root.join("obj.names"))
        .map(|t| t.lines().map(str::to_string).collect())
        .unwrap_or_default();

    let mut stats = DatasetStats {
        images: 0,
        total_boxes: 0,
        per_class: (0..class_names.len() as u32).map(|c| (c, 0)).collect(),
        class_names,
        boxes_per_image: BTreeMap::new(),
        mean_box_area: 0.0,
        underrepresented: Vec::new(),
        balance_threshold,
        problems: Vec::new(),
        warnings: Vec::new(),
    };
    let mut area_sum = 0.0;

    for line in train.lines().filter(|l| !l.trim().is_empty()) {
        stats.images += 1;
        let Some(id) = train_entry_id(line) else {
            stats.problems.push(LabelProblem {
                path: PathBuf::from(line),
                message: "train.txt entry is not images/<id>.png".into(),
            });
            continue;
        };
        let path = root.join("labels").join(format!("{id}.txt"));
        let labels = std::fs::read_to_string(&path)
            .map_err(|e| e.to_string())
            .and_then(|t| parse_label_file(&t).map_err(|e| e.to_string()));
        match labels {
            Ok(labels) => {
                *stats.boxes_per_image.entry(labels.len()).or_default() += 1;
                for l in &labels {
                    *stats.per_class.entry(l.class_id).or_default() += 1;
                    area_sum += l.width * l.height;
                }
                stats.total_boxes += labels.len();
            }
            Err(message) => stats.problems.push(LabelProblem { path, message }),
        }
    }

    if stats.images == 0 {
        stats.warnings.push("train.txt lists no images".into());
    }
    if stats.total_boxes > 0 {
        stats.mean_box_area = area_sum / stats.total_boxes as f64;
        let mean = stats.total_boxes as f64 / stats.per_class.len() as f64;
        stats.underrepresented = stats
            .per_class
            .iter()
            .filter(|(_, &n)| (n as f64) < balance_threshold * mean)
            .map(|(&c, _)| c)
            .collect();
    }
    Ok(stats)
}
