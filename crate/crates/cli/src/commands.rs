use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use chromaforge::ace::{ace as equalize, AceParams};
use chromaforge::amygdala::{two_situation_schedule, run_protocol, AmygdalaConfig, AmygdalaModel, Schedule, SomParams};
use chromaforge::chromakey::{
    ingest_capture_set, matte, segment as key_out, Camera, ClassEntry, ClassManifest, IngestOptions, KeyParams,
    Provenance,
};
use chromaforge::datasetgen::{dataset_stats, emit_darknet, Background, CropStore, Generator};
use chromaforge::imaging::{read_png, write_png, ColorSpace, ImageBuffer};
use log::info;
use rayon::prelude::*;

use crate::config::{check_output_root, PipelineConfig};
use crate::{AceArgs, AceFlags, AmygdalaArgs, CliResult, Failure, GenerateArgs, IngestArgs, KeyFlags, SegmentArgs,
    StatsArgs, EXIT_IO, EXIT_PROCESSING};

impl AceFlags {
    fn params(&self) -> CliResult<AceParams> {
        let p = AceParams {
            slope: self.slope,
            samples: self.samples,
            seed: self.ace_seed,
            degenerate_value: self.degenerate,
        };
        p.validate()?;
        Ok(p)
    }
}

impl KeyFlags {
    fn params(&self) -> CliResult<KeyParams> {
        let p = KeyParams {
            hue_min: self.hue_min,
            hue_max: self.hue_max,
            sat_min: self.sat_min,
            val_min: self.val_min,
            open_radius: self.open_radius,
            close_radius: self.close_radius,
            despill: !self.no_despill,
        };
        p.validate()?;
        Ok(p)
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure {
        code: EXIT_IO,
        message: format!("{}: {e}", path.display()),
    }
}

/// Equalizes the color channels; alpha, if any, passes through.
fn equalize_any(img: &ImageBuffer, params: &AceParams) -> CliResult<ImageBuffer> {
    let rgb = equalize(&img.to_rgb()?, params)?;
    if img.colorspace() != ColorSpace::Rgba {
        return Ok(rgb);
    }
    let data = rgb
        .data()
        .chunks_exact(3)
        .zip(img.data().chunks_exact(4))
        .flat_map(|(c, src)| [c[0], c[1], c[2], src[3]])
        .collect();
    Ok(ImageBuffer::from_raw(img.width(), img.height(), ColorSpace::Rgba, data)?)
}

pub fn ace(args: AceArgs) -> CliResult {
    let params = args.ace.params()?;
    let img = read_png(&args.input)?;
    let start = Instant::now();
    let out = equalize_any(&img, &params)?;
    info!("equalized {}x{} in {:.2?}", img.width(), img.height(), start.elapsed());
    write_png(&out, &args.output)?;
    Ok(())
}

pub fn segment(args: SegmentArgs) -> CliResult {
    let key = args.key.params()?;
    let ace_params = args.ace_flags.params()?;
    let frame = read_png(&args.input)?.to_rgb()?;
    let mask = key_out(&frame, &key)?;
    if mask.is_empty() {
        return Err(chromaforge::Error::NoObject.into());
    }
    if let Some(path) = &args.cutout {
        let colors = if args.ace { equalize(&frame, &ace_params)? } else { frame.clone() };
        let class = ClassEntry {
            id: 0,
            name: "object".into(),
        };
        let provenance = Provenance {
            view: 0,
            camera: Camera::High,
        };
        let crop = matte(&colors, &mask, &class, provenance, key.despill)?;
        write_png(&mask.to_image(), &args.mask)?;
        write_png(&crop.rgba, path)?;
        println!("bbox {} {} {} {}", crop.source_box.x, crop.source_box.y, crop.source_box.w, crop.source_box.h);
    } else {
        write_png(&mask.to_image(), &args.mask)?;
        let b = mask.bounding_box().expect("mask is not empty");
        println!("bbox {} {} {} {}", b.x, b.y, b.w, b.h);
    }
    Ok(())
}

pub fn ingest(args: IngestArgs) -> CliResult {
    let options = IngestOptions {
        expected_views_per_camera: args.views,
        ace: args.ace.params()?,
        key: args.key.params()?,
    };
    if !args.captures.is_dir() {
        return Err(Failure::usage(format!("capture root {} is not a directory", args.captures.display())));
    }
    check_output_root(&args.out, false)?;
    let manifest = ClassManifest::load(&args.classes)?;
    let (crops, report) = ingest_capture_set(&args.captures, &manifest, &options)?;
    for w in &report.warnings {
        log::warn!("{w}");
    }
    for f in &report.failures {
        log::warn!("{}: {}", f.path.display(), f.message);
    }

    let out = &args.out;
    for class in manifest.classes() {
        for camera in Camera::ALL {
            let dir = out.join(&class.name).join(camera.as_str());
            std::fs::create_dir_all(&dir).map_err(|e| io_failure(&dir, e))?;
        }
    }
    crops.par_iter().try_for_each(|c| {
        let path = out
            .join(&c.class_name)
            .join(c.source_camera.as_str())
            .join(format!("{:04}.png", c.source_view));
        write_png(&c.rgba, path)
    })?;
    let report_path = out.join("report.json");
    let json = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    std::fs::write(&report_path, json).map_err(|e| io_failure(&report_path, e))?;
    println!(
        "{} crops from {} classes, {} failed frames, {} warnings",
        report.total_crops,
        report.classes.len(),
        report.failures.len(),
        report.warnings.len()
    );
    Ok(())
}

/// Crops and equalized backgrounds, ready for a [`Generator`].
pub struct Pipeline {
    pub store: CropStore,
    pub backgrounds: Vec<Background>,
}

/// Ingests the captures and equalizes the backgrounds named by `config`.
/// Writes nothing.
pub fn load_pipeline(config: &PipelineConfig) -> CliResult<Pipeline> {
    let prepared = config.prepare()?;

    let start = Instant::now();
    let (crops, report) = ingest_capture_set(&config.captures, &prepared.manifest, &config.ingest_options())?;
    for w in &report.warnings {
        log::warn!("{w}");
    }
    for f in &report.failures {
        log::warn!("{}: {}", f.path.display(), f.message);
    }
    info!("ingested {} crops in {:.2?}", crops.len(), start.elapsed());

    let start = Instant::now();
    let backgrounds = prepared
        .backgrounds
        .into_par_iter()
        .map(|bg| {
            Ok(Background {
                image: equalize(&bg.image, &config.ace)?,
                ..bg
            })
        })
        .collect::<chromaforge::Result<Vec<_>>>()?;
    info!("equalized {} backgrounds in {:.2?}", backgrounds.len(), start.elapsed());

    Ok(Pipeline {
        store: CropStore::new(crops, &prepared.manifest)?,
        backgrounds,
    })
}

/// Validates `config`, then ingests, generates and emits the dataset.
/// Returns the sample count.
pub fn build(config: &PipelineConfig, force: bool) -> CliResult<usize> {
    config.validate(force)?;
    let pipeline = load_pipeline(config)?;
    let generator = Generator::new(&pipeline.store, &pipeline.backgrounds, config.generation.clone())?;

    if force && config.output.exists() {
        std::fs::remove_dir_all(&config.output).map_err(|e| io_failure(&config.output, e))?;
    }
    let start = Instant::now();
    let manifest = emit_darknet(&generator, &config.output)?;
    info!("emitted {} samples in {:.2?}", manifest.sample_count, start.elapsed());
    Ok(manifest.sample_count)
}

pub fn generate(args: GenerateArgs) -> CliResult {
    let mut config = PipelineConfig::load(&args.config)?;
    if let Some(out) = args.output {
        config.output = out;
    }
    if let Some(seed) = args.seed {
        config.generation.seed = seed;
    }
    if let Some(rounds) = args.rounds {
        config.generation.rounds = rounds;
    }
    let count = build(&config, args.force)?;
    println!("samples: {count}");
    println!("manifest: {}", config.output.join("manifest.json").display());
    Ok(())
}

pub fn stats(args: StatsArgs) -> CliResult {
    if args.balance_threshold.is_nan() || args.balance_threshold < 0.0 {
        return Err(Failure::usage("--balance-threshold must be ≥ 0"));
    }
    let s = dataset_stats(&args.root, args.balance_threshold)?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&s).expect("stats serialize"));
    } else {
        let mut out = String::new();
        let _ = writeln!(out, "images: {}", s.images);
        let _ = writeln!(out, "boxes: {}", s.total_boxes);
        let _ = writeln!(out, "mean box area: {:.6}", s.mean_box_area);
        for (id, n) in &s.per_class {
            let name = s.class_names.get(*id as usize).map_or("?", String::as_str);
            let flag = if s.underrepresented.contains(id) { "  (underrepresented)" } else { "" };
            let _ = writeln!(out, "class {id} {name}: {n}{flag}");
        }
        for (k, n) in &s.boxes_per_image {
            let _ = writeln!(out, "images with {k} boxes: {n}");
        }
        print!("{out}");
    }
    for w in &s.warnings {
        eprintln!("warning: {w}");
    }
    if s.problems.is_empty() {
        return Ok(());
    }
    for p in &s.problems {
        eprintln!("{}: {}", p.path.display(), p.message);
    }
    Err(Failure {
        code: EXIT_PROCESSING,
        message: format!("{} unreadable label files", s.problems.len()),
    })
}

pub fn amygdala(args: AmygdalaArgs) -> CliResult {
    let schedule = match &args.schedule {
        Some(path) => Schedule::load(path).map_err(|e| match e {
            e if matches!(e, chromaforge::Error::Json { .. }) => Failure::usage(e.to_string()),
            e => e.into(),
        })?,
        None => two_situation_schedule(args.face_dim),
    };
    schedule.validate()?;
    let mut model = match &args.resume {
        Some(path) => {
            let m = AmygdalaModel::load(path)?;
            if m.object_names() != schedule.objects.as_slice() {
                return Err(Failure::usage(format!(
                    "checkpoint objects {:?} differ from the schedule's {:?}",
                    m.object_names(),
                    schedule.objects
                )));
            }
            m
        }
        None => {
            let config = AmygdalaConfig {
                rows: args.rows,
                cols: args.cols,
                som: SomParams {
                    sigma0: SomParams::default().sigma0.min(args.rows.max(args.cols) as f64),
                    ..SomParams::default()
                },
                lr: args.lr,
                face_dim: schedule.face_dim(),
                seed: args.seed,
            };
            AmygdalaModel::new(config, schedule.objects.clone())?
        }
    };
    let trajectory = run_protocol(&mut model, &schedule.steps)?;
    std::fs::write(&args.out, trajectory.to_csv()).map_err(|e| io_failure(&args.out, e))?;
    if let Some(path) = &args.checkpoint {
        model.save(path)?;
    }
    let summary: Vec<String> = schedule
        .objects
        .iter()
        .zip(&trajectory.final_estimate)
        .map(|(name, p)| format!("{name} {p:.3}"))
        .collect();
    println!("final estimate: {}", summary.join(", "));
    Ok(())
}
