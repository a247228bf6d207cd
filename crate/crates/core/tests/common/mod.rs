#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tractvar::ingest::{write_pellet_csv, write_trace_csv};
use tractvar::{Circle, Pellet, PelletFrame, PelletTrajectory, Point2D, Polyline};

pub const ARC_CENTER: Point2D = Point2D { x: -30.0, y: -5.0 };
pub const ARC_RADIUS: f64 = 35.0;
pub const ARC_POINTS: usize = 41;
/// Angular spacing of the arc palate samples.
pub const ARC_STEP: f64 = 2.0 / (ARC_POINTS - 1) as f64;

/// Palate sampled on the circle of radius 35 about (-30, -5), from +1 rad
/// (anterior) to -1 rad (posterior).
pub fn arc_palate() -> Polyline {
    let arc = Circle::new(ARC_CENTER, ARC_RADIUS).unwrap();
    Polyline::new(
        (0..ARC_POINTS)
            .map(|k| arc.point_at(1.0 - k as f64 * ARC_STEP))
            .collect(),
    )
    .unwrap()
}

/// Angle of the midpoint of palate chord `k` about the arc center.
pub fn chord_mid_angle(k: usize) -> f64 {
    1.0 - (k as f64 + 0.5) * ARC_STEP
}

pub fn vertical_wall(x: f64) -> Polyline {
    Polyline::new((0..=16).map(|k| Point2D::new(x, 40.0 - 5.0 * k as f64)).collect()).unwrap()
}

pub fn unit(theta: f64) -> Point2D {
    Point2D::new(theta.sin(), theta.cos())
}

pub fn write_trace(path: &Path, trace: &Polyline) {
    let mut buf = Vec::new();
    write_trace_csv(trace, &mut buf).unwrap();
    fs::write(path, buf).unwrap();
}

pub fn write_pellets(path: &Path, frames: Vec<PelletFrame>) {
    let traj = PelletTrajectory {
        speaker_id: String::new(),
        utterance_id: String::new(),
        native_rate: 145.0,
        frames,
    };
    let mut buf = Vec::new();
    write_pellet_csv(&traj, &mut buf).unwrap();
    fs::write(path, buf).unwrap();
}

/// A plausible resting pellet configuration under the arc palate.
pub fn rest_positions() -> [Point2D; 8] {
    let mut p = [Point2D::new(0.0, 0.0); 8];
    p[Pellet::UL.index()] = Point2D::new(8.0, 6.0);
    p[Pellet::LL.index()] = Point2D::new(7.0, -8.0);
    p[Pellet::T1.index()] = Point2D::new(-10.0, 2.0);
    p[Pellet::T2.index()] = Point2D::new(-22.0, 4.0);
    p[Pellet::T3.index()] = Point2D::new(-34.0, 3.0);
    p[Pellet::T4.index()] = Point2D::new(-45.0, -3.0);
    p[Pellet::MNI.index()] = Point2D::new(2.0, -20.0);
    p[Pellet::MNM.index()] = Point2D::new(-30.0, -35.0);
    p
}

/// Random-walk pellet frames around the rest configuration, with the odd
/// mistracked sample.
pub fn random_utterance(seed: u64, n: usize, rate: f64) -> Vec<PelletFrame> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pos = rest_positions();
    let rest = rest_positions();
    (0..n)
        .map(|k| {
            for (p, r) in pos.iter_mut().zip(&rest) {
                p.x += rng.gen_range(-0.3..0.3) + 0.05 * (r.x - p.x);
                p.y += rng.gen_range(-0.3..0.3) + 0.05 * (r.y - p.y);
            }
            let mut frame = PelletFrame::new(k as f64 / rate, pos);
            if rng.gen_bool(0.01) {
                frame.invalidate(Pellet::ALL[rng.gen_range(0..8)]);
            }
            frame
        })
        .collect()
}

pub struct SpeakerFiles {
    pub id: String,
    pub sex: &'static str,
    pub palate: PathBuf,
    pub wall: PathBuf,
    pub utterances: Vec<PathBuf>,
}

pub fn write_manifest(path: &Path, speakers: &[SpeakerFiles]) {
    let base = path.parent().unwrap();
    let rel = |p: &Path| p.strip_prefix(base).unwrap_or(p).display().to_string();
    let entries: Vec<_> = speakers
        .iter()
        .map(|s| {
            serde_json::json!({
                "speaker_id": s.id,
                "sex": s.sex,
                "palate": rel(&s.palate),
                "posterior_wall": rel(&s.wall),
                "utterances": s.utterances.iter().map(|u| rel(u)).collect::<Vec<_>>(),
            })
        })
        .collect();
    fs::write(path, serde_json::to_string_pretty(&serde_json::json!({ "speakers": entries })).unwrap())
        .unwrap();
}

/// Arc-palate speaker with `n_utts` random utterances written under `dir`.
pub fn synthetic_speaker(dir: &Path, id: &str, n_utts: usize, frames: usize, seed: u64) -> SpeakerFiles {
    let palate = dir.join(format!("{id}_palate.csv"));
    let wall = dir.join(format!("{id}_wall.csv"));
    write_trace(&palate, &arc_palate());
    write_trace(&wall, &vertical_wall(-80.0));
    let utterances = (0..n_utts)
        .map(|u| {
            let path = dir.join(format!("{id}_utt{u:02}.csv"));
            write_pellets(&path, random_utterance(seed + u as u64, frames, 145.0));
            path
        })
        .collect();
    SpeakerFiles {
        id: id.to_owned(),
        sex: "F",
        palate,
        wall,
        utterances,
    }
}

pub fn tractvar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tractvar"))
        .args(args)
        .output()
        .expect("binary runs")
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}
