//! Regenerates `fixtures/toy`: two classes shot by two cameras against a
//! green backdrop, two 640×480 backgrounds with five anchors each, and a
//! pipeline config.
//!
//! cargo run -p chromaforge-cli --example make_fixture [-- <dir>]

use std::path::{Path, PathBuf};

use chromaforge::chromakey::{Camera, KeyParams};
use chromaforge::datasetgen::{Anchor, AnchorLayout};
use chromaforge::imaging::{write_png, ColorSpace, ImageBuffer};
use chromaforge::synth::green_backdrop;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FRAMES: u32 = 6;
const FRAME: u32 = 64;

fn main() {
    let root = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/toy"));
    if root.exists() {
        std::fs::remove_dir_all(&root).unwrap();
    }
    let key = KeyParams::default();
    let classes = [("block", [200u8, 60, 30]), ("ball", [40, 70, 210])];

    let mut tsv = String::new();
    for (id, (name, color)) in classes.iter().enumerate() {
        tsv += &format!("{id}\t{name}\n");
        for camera in Camera::ALL {
            let dir = root.join("captures").join(name).join(camera.as_str());
            std::fs::create_dir_all(&dir).unwrap();
            for f in 0..FRAMES {
                let mut rng = ChaCha8Rng::seed_from_u64((id as u64) << 20 | (camera as u64) << 10 | u64::from(f));
                let frame = capture(&key, id == 1, *color, &mut rng);
                write_png(&frame, dir.join(format!("{f:04}.png"))).unwrap();
            }
        }
    }
    std::fs::write(root.join("classes.tsv"), tsv).unwrap();

    std::fs::create_dir_all(root.join("backgrounds")).unwrap();
    std::fs::create_dir_all(root.join("layouts")).unwrap();
    let spots = [(110, 110), (320, 110), (530, 110), (215, 340), (425, 340)];
    for (i, id) in ["hall", "room"].iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + i as u64);
        write_png(&room(&mut rng), root.join("backgrounds").join(format!("{id}.png"))).unwrap();
        let layout = AnchorLayout {
            background_id: id.to_string(),
            anchors: spots
                .iter()
                .map(|&(cx, cy)| Anchor {
                    cx,
                    cy,
                    max_w: 120,
                    max_h: 120,
                })
                .collect(),
        };
        let json = serde_json::to_string_pretty(&layout).unwrap() + "\n";
        std::fs::write(root.join("layouts").join(format!("{id}.json")), json).unwrap();
    }

    let config = serde_json::json!({
        "captures": "captures",
        "classes": "classes.tsv",
        "backgrounds": "backgrounds",
        "layouts": "layouts",
        "output": "out",
        "expected_views_per_camera": FRAMES,
        "generation": {
            "seed": 42,
            "rounds": 10,
            "scale_jitter": [0.9, 1.6],
            "fill_policy": "all_anchors",
            "class_balance": "uniform_by_class"
        }
    });
    std::fs::write(root.join("config.json"), serde_json::to_string_pretty(&config).unwrap() + "\n").unwrap();
    println!("wrote {}", root.display());
}

/// A block or a ball with a darker lower half, somewhere in the frame.
fn capture(key: &KeyParams, round: bool, color: [u8; 3], rng: &mut impl Rng) -> ImageBuffer {
    let mut img = green_backdrop(FRAME, FRAME, key, rng);
    let w = rng.gen_range(22..40);
    let h = rng.gen_range(22..40);
    let x0 = rng.gen_range(4..FRAME - w - 4);
    let y0 = rng.gen_range(4..FRAME - h - 4);
    let (cx, cy) = (x0 as f64 + w as f64 / 2.0, y0 as f64 + h as f64 / 2.0);
    for y in y0..y0 + h {
        for x in x0..x0 + w {
            let dx = (x as f64 + 0.5 - cx) / (w as f64 / 2.0);
            let dy = (y as f64 + 0.5 - cy) / (h as f64 / 2.0);
            if round && dx * dx + dy * dy > 1.0 {
                continue;
            }
            let shade = if y > y0 + h / 2 { 0.75 } else { 1.0 };
            img.pixel_mut(x, y).copy_from_slice(&color.map(|c| (c as f64 * shade) as u8));
        }
    }
    img
}

/// Wall and floor gradients with a few flat pieces of furniture.
fn room(rng: &mut impl Rng) -> ImageBuffer {
    let (w, h) = (640u32, 480u32);
    let wall: [u8; 3] = [rng.gen_range(150..220), rng.gen_range(140..200), rng.gen_range(120..180)];
    let floor: [u8; 3] = [rng.gen_range(80..130), rng.gen_range(60..100), rng.gen_range(40..80)];
    let mut img = ImageBuffer::new(w, h, ColorSpace::Rgb);
    for y in 0..h {
        let base = if y < h * 3 / 5 { wall } else { floor };
        let t = y as f64 / h as f64;
        for x in 0..w {
            let s = 0.8 + 0.2 * (x as f64 / w as f64) - 0.1 * t;
            img.pixel_mut(x, y).copy_from_slice(&base.map(|c| (c as f64 * s).min(255.0) as u8));
        }
    }
    for _ in 0..4 {
        let (fw, fh) = (rng.gen_range(40..160), rng.gen_range(30..120));
        let (fx, fy) = (rng.gen_range(0..w - fw), rng.gen_range(0..h - fh));
        let c: [u8; 3] = [rng.gen(), rng.gen(), rng.gen()];
        for y in fy..fy + fh {
            for x in fx..fx + fw {
                img.pixel_mut(x, y).copy_from_slice(&c);
            }
        }
    }
    img
}
