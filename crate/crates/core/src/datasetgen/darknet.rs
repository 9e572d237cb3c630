//! Darknet/YOLO dataset tree:
//!
//! ```text
//! <root>/images/<id>.png
//! <root>/labels/<id>.txt   class_id x_center y_center width height (6 decimals)
//! <root>/obj.names         one class name per line, id order
//! <root>/obj.data          classes / train / names / backup
//! <root>/train.txt         images/<id>.png, one per line
//! <root>/manifest.json     generation provenance
//! ```

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::{DatasetManifest, Generator, Label, LabeledSample};
use crate::imaging::{read_png, write_png_fast};
use crate::{Error, Result};

/// Present in an output root until emission completes.
pub const INCOMPLETE_MARKER: &str = "INCOMPLETE";

pub fn format_label_line(label: &Label) -> String {
    format!(
        "{} {:.6} {:.6} {:.6} {:.6}\n",
        label.class_id, label.x_center, label.y_center, label.width, label.height
    )
}

pub fn parse_label_line(line: &str) -> Result<Label> {
    let bad = || Error::InvalidParam(format!("malformed label line {line:?}"));
    let mut fields = line.split_whitespace();
    let class_id = fields.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
    let mut v = [0.0f64; 4];
    for slot in &mut v {
        *slot = fields.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        if !slot.is_finite() {
            return Err(bad());
        }
    }
    if fields.next().is_some() {
        return Err(bad());
    }
    Ok(Label {
        class_id,
        x_center: v[0],
        y_center: v[1],
        width: v[2],
        height: v[3],
    })
}

pub fn parse_label_file(text: &str) -> Result<Vec<Label>> {
    text.lines().filter(|l| !l.trim().is_empty()).map(parse_label_line).collect()
}

fn label_file(labels: &[Label]) -> String {
    labels.iter().map(format_label_line).collect()
}

fn obj_data(classes: usize) -> String {
    format!("classes = {classes}\ntrain = train.txt\nnames = obj.names\nbackup = backup/\n")
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Writes samples into an empty output root. Thread-safe per sample.
pub struct DarknetWriter {
    root: PathBuf,
}

impl DarknetWriter {
    /// Fails if `root` exists and is not empty.
    pub fn create(root: impl AsRef<Path>) -> Result<Self> {
        let root = root.as_ref().to_path_buf();
        if let Ok(mut entries) = std::fs::read_dir(&root) {
            if entries.next().is_some() {
                return Err(Error::Config(format!("output root {} is not empty", root.display())));
            }
        }
        for dir in [root.clone(), root.join("images"), root.join("labels")] {
            std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        }
        write(&root.join(INCOMPLETE_MARKER), "emission in progress\n")?;
        Ok(Self { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write_sample(&self, sample: &LabeledSample) -> Result<()> {
        write_png_fast(&sample.image, self.root.join("images").join(format!("{}.png", sample.id)))?;
        self.write_labels(&sample.id, &sample.labels)
    }

    pub fn write_labels(&self, id: &str, labels: &[Label]) -> Result<()> {
        write(&self.root.join("labels").join(format!("{id}.txt")), label_file(labels))
    }

    /// Writes the index files and clears the in-progress marker.
    pub fn finish(self, classes: &[String], ids: &[String], manifest: Option<&DatasetManifest>) -> Result<()> {
        let names: String = classes.iter().map(|c| format!("{c}\n")).collect();
        write(&self.root.join("obj.names"), names)?;
        write(&self.root.join("obj.data"), obj_data(classes.len()))?;
        let mut train = String::new();
        for id in ids {
            let _ = writeln!(train, "images/{id}.png");
        }
        write(&self.root.join("train.txt"), train)?;
        if let Some(m) = manifest {
            let mut json = serde_json::to_string_pretty(m).expect("manifest serializes");
            json.push('\n');
            write(&self.root.join("manifest.json"), json)?;
        }
        let marker = self.root.join(INCOMPLETE_MARKER);
        std::fs::remove_file(&marker).map_err(|e| Error::io(&marker, e))
    }

    fn abort(&self, err: &Error) {
        let _ = std::fs::write(self.root.join(INCOMPLETE_MARKER), format!("emission failed: {err}\n"));
    }
}

/// Renders and writes every planned sample (in parallel), then the index
/// files. Returns the dataset manifest that was written.
pub fn emit_darknet(generator: &Generator<'_>, root: impl AsRef<Path>) -> Result<DatasetManifest> {
    let writer = DarknetWriter::create(root)?;
    let records = (0..generator.len())
        .into_par_iter()
        .map(|i| {
            let sample = generator.render(i);
            writer.write_sample(&sample)?;
            Ok(sample.record)
        })
        .collect::<Result<Vec<_>>>();
    let records = match records {
        Ok(r) => r,
        Err(e) => {
            writer.abort(&e);
            return Err(e);
        }
    };
    let ids: Vec<String> = records.iter().map(|r| r.id.clone()).collect();
    let manifest = generator.manifest(records);
    let classes = generator.store().class_names().to_vec();
    writer.finish_checked(&classes, &ids, Some(&manifest))?;
    Ok(manifest)
}

/// Writes already-rendered samples.
pub fn emit_samples(samples: &[LabeledSample], root: impl AsRef<Path>, classes: &[String]) -> Result<()> {
    let writer = DarknetWriter::create(root)?;
    if let Err(e) = samples.par_iter().try_for_each(|s| writer.write_sample(s)) {
        writer.abort(&e);
        return Err(e);
    }
    let ids: Vec<String> = samples.iter().map(|s| s.id.clone()).collect();
    writer.finish_checked(classes, &ids, None)
}

impl DarknetWriter {
    fn finish_checked(self, classes: &[String], ids: &[String], manifest: Option<&DatasetManifest>) -> Result<()> {
        let root = self.root.clone();
        self.finish(classes, ids, manifest).inspect_err(|e| {
            let _ = std::fs::write(root.join(INCOMPLETE_MARKER), format!("emission failed: {e}\n"));
        })
    }
}

/// Parsed contents of an emitted tree (labels only; images stay on disk).
#[derive(Debug, Clone, PartialEq)]
pub struct DarknetTree {
    pub classes: Vec<String>,
    pub ids: Vec<String>,
    pub labels: Vec<Vec<Label>>,
}

impl DarknetTree {
    /// Re-emits this tree into `dst`, re-encoding the images found under
    /// `src` and copying `manifest.json` if present.
    pub fn emit(&self, src: impl AsRef<Path>, dst: impl AsRef<Path>) -> Result<()> {
        let src = src.as_ref();
        let writer = DarknetWriter::create(dst)?;
        let result = self.ids.par_iter().zip(&self.labels).try_for_each(|(id, labels)| {
            let img = read_png(src.join("images").join(format!("{id}.png")))?;
            write_png_fast(&img, writer.root().join("images").join(format!("{id}.png")))?;
            writer.write_labels(id, labels)
        });
        if let Err(e) = result {
            writer.abort(&e);
            return Err(e);
        }
        let manifest_src = src.join("manifest.json");
        if manifest_src.exists() {
            let dst = writer.root().join("manifest.json");
            std::fs::copy(&manifest_src, &dst).map_err(|e| Error::io(&dst, e))?;
        }
        writer.finish_checked(&self.classes, &self.ids, None)
    }
}

fn image_id(line: &str) -> Option<&str> {
    line.strip_prefix("images/")?.strip_suffix(".png")
}

/// Reads `obj.names`, `train.txt` and every referenced label file.
pub fn read_darknet(root: impl AsRef<Path>) -> Result<DarknetTree> {
    let root = root.as_ref();
    let read = |p: PathBuf| std::fs::read_to_string(&p).map_err(|e| Error::io(&p, e));
    let classes = read(root.join("obj.names"))?.lines().map(str::to_string).collect();
    let mut ids = Vec::new();
    let mut labels = Vec::new();
    for line in read(root.join("train.txt"))?.lines().filter(|l| !l.is_empty()) {
        let id = image_id(line).ok_or_else(|| Error::InvalidParam(format!("bad train.txt entry {line:?}")))?;
        labels.push(parse_label_file(&read(root.join("labels").join(format!("{id}.txt")))?)?);
        ids.push(id.to_string());
    }
    Ok(DarknetTree { classes, ids, labels })
}

pub(super) fn train_entry_id(line: &str) -> Option<&str> {
    image_id(line)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_format() {
        let l = Label {
            class_id: 2,
            x_center: 0.25,
            y_center: 0.2,
            width: 0.3,
            height: 0.2,
        };
        assert_eq!(format_label_line(&l), "2 0.250000 0.200000 0.300000 0.200000\n");
        let one = Label {
            class_id: 0,
            x_center: 0.5,
            y_center: 0.5,
            width: 1.0,
            height: 1.0,
        };
        assert_eq!(format_label_line(&one), "0 0.500000 0.500000 1.000000 1.000000\n");
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(parse_label_line("1 0.5 0.5 0.1").is_err());
        assert!(parse_label_line("1 0.5 0.5 0.1 0.1 0.2").is_err());
        assert!(parse_label_line("a 0.5 0.5 0.1 0.1").is_err());
        assert!(parse_label_line("1 0.5 nan 0.1 0.1").is_err());
        assert_eq!(parse_label_line("4 0.1 0.2 0.3 0.4").unwrap().class_id, 4);
    }

    #[test]
    fn quantized_round_trip() {
        let l = Label {
            class_id: 1,
            x_center: 0.123_456_789,
            y_center: 0.987_654_321,
            width: 1.0 / 3.0,
            height: 2.0 / 7.0,
        };
        let back = parse_label_line(&format_label_line(&l)).unwrap();
        for (a, b) in [
            (l.x_center, back.x_center),
            (l.y_center, back.y_center),
            (l.width, back.width),
            (l.height, back.height),
        ] {
            assert!((a - b).abs() <= 5e-7);
        }
        assert_eq!(format_label_line(&back), format_label_line(&l));
    }

    #[test]
    fn obj_data_contents() {
        assert_eq!(
            obj_data(3),
            "classes = 3\ntrain = train.txt\nnames = obj.names\nbackup = backup/\n"
        );
    }

    #[test]
    fn writer_refuses_non_empty_root() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("x"), "").unwrap();
        assert!(matches!(DarknetWriter::create(dir.path()), Err(Error::Config(_))));
    }
}
