use std::collections::{BTreeMap, BTreeSet};

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{place, AnchorLayout, ClassBalance, FillPolicy, GenConfig, LabeledSample, SampleProvenance};
use crate::chromakey::{Camera, ClassManifest, ObjectCrop};
use crate::imaging::{ColorSpace, ImageBuffer, PixelBox};
use crate::seed::{fnv1a, mix64};
use crate::{Error, Result};

/// Crops indexed by class.
#[derive(Debug, Clone)]
pub struct CropStore {
    crops: Vec<ObjectCrop>,
    by_class: BTreeMap<u32, Vec<usize>>,
    class_names: Vec<String>,
}

impl CropStore {
    /// Every manifest class needs at least one crop, and every crop a
    /// manifest class.
    pub fn new(crops: Vec<ObjectCrop>, manifest: &ClassManifest) -> Result<Self> {
        if crops.is_empty() {
            return Err(Error::Config("crop store is empty".into()));
        }
        let mut by_class: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for (i, c) in crops.iter().enumerate() {
            if manifest.get(c.class_id).is_none() {
                return Err(Error::Config(format!(
                    "crop of class id {} ({}) is not in the class manifest",
                    c.class_id, c.class_name
                )));
            }
            by_class.entry(c.class_id).or_default().push(i);
        }
        if let Some(missing) = manifest.classes().iter().find(|c| !by_class.contains_key(&c.id)) {
            return Err(Error::Config(format!("class {} (id {}) has no crops", missing.name, missing.id)));
        }
        Ok(Self {
            crops,
            by_class,
            class_names: manifest.classes().iter().map(|c| c.name.clone()).collect(),
        })
    }

    pub fn crops(&self) -> &[ObjectCrop] {
        &self.crops
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn len(&self) -> usize {
        self.crops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.crops.is_empty()
    }

    fn choose(&self, balance: ClassBalance, rng: &mut impl Rng) -> usize {
        match balance {
            ClassBalance::UniformByCrop => rng.gen_range(0..self.crops.len()),
            ClassBalance::UniformByClass => {
                let k = rng.gen_range(0..self.by_class.len());
                let members = self.by_class.values().nth(k).expect("k < class count");
                members[rng.gen_range(0..members.len())]
            }
        }
    }
}

/// An equalized background with its anchor layout.
#[derive(Debug, Clone)]
pub struct Background {
    pub id: String,
    pub image: ImageBuffer,
    pub layout: AnchorLayout,
}

/// Joins background images with their layouts by id, sorted by id.
pub fn pair_backgrounds(images: Vec<(String, ImageBuffer)>, layouts: Vec<AnchorLayout>) -> Result<Vec<Background>> {
    let mut by_id: BTreeMap<String, ImageBuffer> = BTreeMap::new();
    for (id, img) in images {
        if id.is_empty() || !id.chars().all(|c| c.is_ascii_alphanumeric() || "._-".contains(c)) {
            return Err(Error::Config(format!("background id {id:?} must match [A-Za-z0-9._-]+")));
        }
        img.ensure(ColorSpace::Rgb)?;
        if by_id.insert(id.clone(), img).is_some() {
            return Err(Error::Config(format!("duplicate background {id}")));
        }
    }
    let mut layout_ids = BTreeSet::new();
    for l in &layouts {
        if !by_id.contains_key(&l.background_id) {
            return Err(Error::Config(format!(
                "layout references missing background {}",
                l.background_id
            )));
        }
        if !layout_ids.insert(l.background_id.clone()) {
            return Err(Error::Config(format!("duplicate layout for background {}", l.background_id)));
        }
    }
    if let Some(id) = by_id.keys().find(|id| !layout_ids.contains(*id)) {
        return Err(Error::Config(format!("background {id} has no layout")));
    }
    let mut layouts: BTreeMap<String, AnchorLayout> =
        layouts.into_iter().map(|l| (l.background_id.clone(), l)).collect();
    by_id
        .into_iter()
        .map(|(id, image)| {
            let layout = layouts.remove(&id).expect("checked above");
            layout.validate(image.width(), image.height())?;
            Ok(Background { id, image, layout })
        })
        .collect()
}

/// One planned paste.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pick {
    pub anchor: usize,
    pub crop: usize,
    pub scale: f64,
}

/// Every random decision for one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSpec {
    pub index: usize,
    pub background: usize,
    pub round: u32,
    pub seed: u64,
    /// In anchor index order, which is also paste order.
    pub picks: Vec<Pick>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CropRef {
    pub index: usize,
    pub class_name: String,
    pub camera: Camera,
    pub view: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacementRecord {
    pub anchor: usize,
    pub class_id: u32,
    pub crop: CropRef,
    pub scale: f64,
    pub bbox: PixelBox,
    /// Fraction of the pasted object hidden by later pastes; set only when
    /// an occlusion limit is configured.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub occluded: Option<f64>,
    pub labeled: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkipRecord {
    pub anchor: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub id: String,
    pub background_id: String,
    pub round: u32,
    pub seed: u64,
    pub placements: Vec<PlacementRecord>,
    pub skipped: Vec<SkipRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub config: GenConfig,
    pub seed: u64,
    pub classes: Vec<String>,
    pub backgrounds: Vec<String>,
    pub sample_count: usize,
    pub samples: Vec<SampleRecord>,
}

pub struct Generator<'a> {
    store: &'a CropStore,
    backgrounds: &'a [Background],
    config: GenConfig,
    plan: Vec<SampleSpec>,
}

impl<'a> Generator<'a> {
    pub fn new(store: &'a CropStore, backgrounds: &'a [Background], config: GenConfig) -> Result<Self> {
        config.validate()?;
        if store.is_empty() {
            return Err(Error::Config("crop store is empty".into()));
        }
        if backgrounds.is_empty() {
            return Err(Error::Config("no backgrounds".into()));
        }
        for bg in backgrounds {
            if bg.layout.background_id != bg.id {
                return Err(Error::Config(format!("missing layout for background {}", bg.id)));
            }
            bg.layout.validate(bg.image.width(), bg.image.height())?;
        }
        let plan = backgrounds
            .iter()
            .enumerate()
            .flat_map(|(b, bg)| (0..config.rounds).map(move |round| (b, bg, round)))
            .enumerate()
            .map(|(i, (b, bg, round))| plan_sample(store, bg, &config, i, b, round))
            .collect();
        Ok(Self {
            store,
            backgrounds,
            config,
            plan,
        })
    }

    pub fn config(&self) -> &GenConfig {
        &self.config
    }

    pub fn store(&self) -> &CropStore {
        self.store
    }

    pub fn backgrounds(&self) -> &[Background] {
        self.backgrounds
    }

    pub fn plan(&self) -> &[SampleSpec] {
        &self.plan
    }

    pub fn len(&self) -> usize {
        self.plan.len()
    }

    pub fn is_empty(&self) -> bool {
        self.plan.is_empty()
    }

    pub fn sample_id(&self, spec: &SampleSpec) -> String {
        format!("{}_{:05}", self.backgrounds[spec.background].id, spec.round)
    }

    /// Renders sample `i` of the plan.
    pub fn render(&self, i: usize) -> LabeledSample {
        let spec = &self.plan[i];
        let bg = &self.backgrounds[spec.background];
        let mut image = bg.image.clone();
        let lo = self.config.scale_jitter[0];
        let mut placed = Vec::new();
        let mut skipped = Vec::new();

        for pick in &spec.picks {
            let crop = &self.store.crops[pick.crop];
            let anchor = &bg.layout.anchors[pick.anchor];
            let mut attempt = place(&mut image, crop, anchor, pick.scale);
            if attempt.is_err() && pick.scale > lo {
                attempt = place(&mut image, crop, anchor, lo);
            }
            match attempt {
                Ok(p) => placed.push((pick, p)),
                Err(e) => {
                    log::warn!("{} anchor {}: {e}", self.sample_id(spec), pick.anchor);
                    skipped.push(SkipRecord {
                        anchor: pick.anchor,
                        reason: e.to_string(),
                    });
                }
            }
        }

        let occlusion = self.config.max_occlusion.map(|_| {
            let w = image.width() as usize;
            let mut owner = vec![usize::MAX; image.pixel_count()];
            for (k, (_, p)) in placed.iter().enumerate() {
                for_each_set(&p.mask, |x, y| owner[(p.origin.1 + y) as usize * w + (p.origin.0 + x) as usize] = k);
            }
            placed
                .iter()
                .enumerate()
                .map(|(k, (_, p))| {
                    let visible = owner.iter().filter(|&&o| o == k).count();
                    1.0 - visible as f64 / p.mask.count() as f64
                })
                .collect::<Vec<f64>>()
        });

        let mut labels = Vec::new();
        let mut placements = Vec::new();
        for (k, (pick, p)) in placed.iter().enumerate() {
            let occluded = occlusion.as_ref().map(|o| o[k]);
            let labeled = match (occluded, self.config.max_occlusion) {
                (Some(o), Some(max)) => o <= max,
                _ => true,
            };
            if labeled {
                labels.push(p.label);
            }
            let crop = &self.store.crops[pick.crop];
            placements.push(PlacementRecord {
                anchor: pick.anchor,
                class_id: crop.class_id,
                crop: CropRef {
                    index: pick.crop,
                    class_name: crop.class_name.clone(),
                    camera: crop.source_camera,
                    view: crop.source_view,
                },
                scale: p.effective_scale,
                bbox: p.bbox,
                occluded,
                labeled,
            });
        }

        let id = self.sample_id(spec);
        LabeledSample {
            id: id.clone(),
            image,
            labels,
            provenance: SampleProvenance {
                background_id: bg.id.clone(),
                round: spec.round,
                seed: spec.seed,
            },
            record: SampleRecord {
                id,
                background_id: bg.id.clone(),
                round: spec.round,
                seed: spec.seed,
                placements,
                skipped,
            },
        }
    }

    /// Samples in plan order.
    pub fn iter(&self) -> impl Iterator<Item = LabeledSample> + '_ {
        (0..self.plan.len()).map(move |i| self.render(i))
    }

    /// Renders all samples in parallel; the result is in plan order.
    pub fn render_all(&self) -> Vec<LabeledSample> {
        (0..self.plan.len()).into_par_iter().map(|i| self.render(i)).collect()
    }

    pub fn manifest(&self, samples: Vec<SampleRecord>) -> DatasetManifest {
        DatasetManifest {
            config: self.config.clone(),
            seed: self.config.seed,
            classes: self.store.class_names.clone(),
            backgrounds: self.backgrounds.iter().map(|b| b.id.clone()).collect(),
            sample_count: samples.len(),
            samples,
        }
    }
}

fn for_each_set(mask: &crate::imaging::BinaryMask, mut f: impl FnMut(u32, u32)) {
    for y in 0..mask.height() {
        for x in 0..mask.width() {
            if mask.get(x, y) {
                f(x, y);
            }
        }
    }
}

/// Seed of the substream for one (background, round) pair.
fn sample_seed(global: u64, background_id: &str, round: u32) -> u64 {
    mix64(mix64(global ^ fnv1a(background_id.as_bytes())).wrapping_add(u64::from(round)))
}

fn plan_sample(
    store: &CropStore,
    bg: &Background,
    config: &GenConfig,
    index: usize,
    background: usize,
    round: u32,
) -> SampleSpec {
    let seed = sample_seed(config.seed, &bg.id, round);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = bg.layout.anchors.len();
    let anchors: Vec<usize> = match config.fill_policy {
        FillPolicy::AllAnchors => (0..n).collect(),
        FillPolicy::RandomSubset => {
            let k = rng.gen_range(1..=n);
            let mut chosen = index::sample(&mut rng, n, k).into_vec();
            chosen.sort_unstable();
            chosen
        }
    };
    let [lo, hi] = config.scale_jitter;
    let picks = anchors
        .into_iter()
        .map(|anchor| {
            let crop = store.choose(config.class_balance, &mut rng);
            let scale = if hi > lo { rng.gen_range(lo..=hi) } else { lo };
            Pick { anchor, crop, scale }
        })
        .collect();
    SampleSpec {
        index,
        background,
        round,
        seed,
        picks,
    }
}
