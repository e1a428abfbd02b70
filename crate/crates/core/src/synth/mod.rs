//! Synthetic scene generation: scripted geometry and movers rendered by
//! an exact ray caster into a complete on-disk dataset (images, LiDAR
//! sweeps, boxes, masks, manifest).
//!
//! The ray caster is the independent ground-truth oracle; it shares no
//! rendering code with the splatting rasterizer.

pub mod geometry;
pub mod presets;
pub mod texture;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{Mat3, Rigid, Vec3};
use crate::scene::manifest::{
    Manifest, ManifestCamera, ManifestFrame, ManifestLidar, ManifestObject, ManifestObjectFrame,
    ManifestPose, ManifestSplit, SplitPolicy,
};
use crate::scene::ply::{write_ply, PlyCloud};
use crate::scene::{ImageBuf, Mask};

use geometry::PrimitiveSpec;
use texture::TextureSpec;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SceneSpec {
    pub name: String,
    pub timesteps: usize,
    pub ego: EgoSpec,
    pub cameras: Vec<CameraSpec>,
    pub geometry: Vec<PrimitiveSpec>,
    #[serde(default)]
    pub movers: Vec<MoverSpec>,
    #[serde(default)]
    pub lidar: Option<LidarSpec>,
    pub sky: [f64; 3],
    #[serde(default = "default_split")]
    pub split: SplitPolicy,
}

fn default_split() -> SplitPolicy {
    SplitPolicy::Every5th
}

/// Straight-line ego path; heading follows the direction of travel.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EgoSpec {
    pub start: [f64; 3],
    pub end: [f64; 3],
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CameraSpec {
    pub id: String,
    /// Mount yaw relative to the direction of travel (degrees, left
    /// positive).
    pub yaw_deg: f64,
    /// Downward pitch (degrees).
    #[serde(default)]
    pub pitch_deg: f64,
    pub width: u32,
    pub height: u32,
    pub hfov_deg: f64,
    /// Mount position in the ego frame (x forward, y left, z up).
    pub mount: [f64; 3],
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MoverSpec {
    pub id: String,
    pub half_extents: [f64; 3],
    pub texture: TextureSpec,
    pub start: [f64; 3],
    pub end: [f64; 3],
    /// Fixed yaw in radians; when absent the box faces its direction of
    /// travel.
    #[serde(default)]
    pub yaw: Option<f64>,
    #[serde(default = "default_true")]
    pub emit_masks: bool,
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LidarSpec {
    pub elev_deg: (f64, f64),
    pub elev_count: usize,
    pub azim_deg: (f64, f64),
    pub azim_count: usize,
    pub max_range: f64,
    #[serde(default)]
    pub noise_sigma: f64,
    #[serde(default)]
    pub outlier_fraction: f64,
    #[serde(default)]
    pub outlier_sigma: f64,
    /// Sensor mount in the ego frame.
    pub mount: [f64; 3],
}

impl EgoSpec {
    fn direction(&self) -> Vec3<f64> {
        (Vec3::from_array(self.end) - Vec3::from_array(self.start)).normalized()
    }

    /// Ego-to-world pose at a timestep.
    pub fn pose(&self, t: usize, timesteps: usize) -> Rigid<f64> {
        let s = if timesteps > 1 {
            t as f64 / (timesteps - 1) as f64
        } else {
            0.0
        };
        let start = Vec3::from_array(self.start);
        let end = Vec3::from_array(self.end);
        let pos = start + (end - start) * s;
        let d = self.direction();
        let yaw = d.y.atan2(d.x);
        let (sy, cy) = yaw.sin_cos();
        // x forward, y left, z up
        let rot = Mat3::new(cy, -sy, 0.0, sy, cy, 0.0, 0.0, 0.0, 1.0);
        Rigid::new(rot, pos)
    }
}

impl CameraSpec {
    pub fn intrinsics(&self) -> [f64; 9] {
        let fx = self.width as f64 / 2.0 / (self.hfov_deg.to_radians() / 2.0).tan();
        [
            fx,
            0.0,
            self.width as f64 / 2.0,
            0.0,
            fx,
            self.height as f64 / 2.0,
            0.0,
            0.0,
            1.0,
        ]
    }

    /// Ego-to-camera rotation: camera z forward, x right, y down, yawed
    /// left by `yaw_deg` and pitched down by `pitch_deg`.
    pub fn rig_rotation(&self) -> Mat3<f64> {
        let th = self.yaw_deg.to_radians();
        let (s, c) = th.sin_cos();
        // rows: camera x (right), y (down), z (forward) in the ego frame
        let base = Mat3::new(s, -c, 0.0, 0.0, 0.0, -1.0, c, s, 0.0);
        let ph = self.pitch_deg.to_radians();
        let (sp, cp) = ph.sin_cos();
        let pitch = Mat3::new(1.0, 0.0, 0.0, 0.0, cp, -sp, 0.0, sp, cp);
        pitch * base
    }

    pub fn rig_translation(&self) -> Vec3<f64> {
        -(self.rig_rotation().mul_vec(Vec3::from_array(self.mount)))
    }
}

impl MoverSpec {
    pub fn center(&self, t: usize, timesteps: usize) -> Vec3<f64> {
        let s = if timesteps > 1 {
            t as f64 / (timesteps - 1) as f64
        } else {
            0.0
        };
        let start = Vec3::from_array(self.start);
        Vec3::from_array(self.start) + (Vec3::from_array(self.end) - start) * s
    }

    pub fn yaw_at(&self) -> f64 {
        match self.yaw {
            Some(y) => y,
            None => {
                let d = Vec3::from_array(self.end) - Vec3::from_array(self.start);
                if d.norm() < 1e-12 {
                    0.0
                } else {
                    d.y.atan2(d.x)
                }
            }
        }
    }

    fn as_primitive(&self, t: usize, timesteps: usize) -> PrimitiveSpec {
        PrimitiveSpec::Box {
            center: self.center(t, timesteps).to_array(),
            half_extents: self.half_extents,
            yaw: self.yaw_at(),
            texture: self.texture.clone(),
        }
    }
}

/// What a ray hit: a static primitive or a mover.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HitKind {
    Static(usize),
    Mover(usize),
}

/// Nearest hit across the static geometry and the movers posed at one
/// timestep.
pub fn cast_scene(
    origin: Vec3<f64>,
    dir: Vec3<f64>,
    geometry: &[PrimitiveSpec],
    movers: &[PrimitiveSpec],
) -> Option<(geometry::Hit, HitKind)> {
    let mut best: Option<(geometry::Hit, HitKind)> = None;
    for (i, prim) in geometry.iter().enumerate() {
        if let Some(hit) = prim.cast(origin, dir) {
            if best.map_or(true, |(b, _)| hit.t < b.t) {
                best = Some((hit, HitKind::Static(i)));
            }
        }
    }
    for (i, prim) in movers.iter().enumerate() {
        if let Some(hit) = prim.cast(origin, dir) {
            if best.map_or(true, |(b, _)| hit.t < b.t) {
                best = Some((hit, HitKind::Mover(i)));
            }
        }
    }
    best
}

/// Ray-cast ground-truth render of one camera; also returns one mask per
/// mover marking its pixels.
fn render_ground_truth(
    spec: &SceneSpec,
    cam_world_rot: Mat3<f64>,
    cam_center: Vec3<f64>,
    cam_spec: &CameraSpec,
    movers_now: &[PrimitiveSpec],
    seed: u64,
) -> (ImageBuf<f64>, Vec<Mask>) {
    let w = cam_spec.width as usize;
    let h = cam_spec.height as usize;
    let k = cam_spec.intrinsics();
    let (fx, fy, cx, cy) = (k[0], k[4], k[2], k[5]);
    let rot_t = cam_world_rot.transpose();

    let rows: Vec<(Vec<Vec3<f64>>, Vec<Option<usize>>)> = (0..h)
        .into_par_iter()
        .map(|y| {
            let mut colors = Vec::with_capacity(w);
            let mut hits = Vec::with_capacity(w);
            for x in 0..w {
                let dir_cam = Vec3::new(
                    (x as f64 + 0.5 - cx) / fx,
                    (y as f64 + 0.5 - cy) / fy,
                    1.0,
                )
                .normalized();
                let dir = rot_t.mul_vec(dir_cam);
                match cast_scene(cam_center, dir, &spec.geometry, movers_now) {
                    Some((hit, kind)) => {
                        let tex = match kind {
                            HitKind::Static(i) => spec.geometry[i].texture(),
                            HitKind::Mover(i) => movers_now[i].texture(),
                        };
                        let tex_seed = match kind {
                            HitKind::Static(i) => seed.wrapping_add(i as u64),
                            HitKind::Mover(i) => seed.wrapping_add(0x4000 + i as u64),
                        };
                        colors.push(tex.sample(hit.u, hit.v, tex_seed));
                        hits.push(match kind {
                            HitKind::Mover(i) => Some(i),
                            HitKind::Static(_) => None,
                        });
                    }
                    None => {
                        colors.push(Vec3::from_array(spec.sky));
                        hits.push(None);
                    }
                }
            }
            (colors, hits)
        })
        .collect();

    let mut img = ImageBuf::new(w, h);
    let mut masks = vec![Mask::new(w, h, false); spec.movers.len()];
    for (y, (colors, hits)) in rows.into_iter().enumerate() {
        for x in 0..w {
            img.set(x, y, colors[x]);
            if let Some(mi) = hits[x] {
                masks[mi].set(x, y, true);
            }
        }
    }
    (img, masks)
}

/// LiDAR sweep at one timestep: a spherical scan pattern in the ego frame
/// cast against the scene, points returned in the sensor frame.
fn cast_lidar(
    spec: &SceneSpec,
    lidar: &LidarSpec,
    ego: &Rigid<f64>,
    movers_now: &[PrimitiveSpec],
    rng: &mut ChaCha12Rng,
) -> Vec<Vec3<f64>> {
    let sensor_pos = ego.apply(Vec3::from_array(lidar.mount));
    let mut points = Vec::new();
    for ei in 0..lidar.elev_count {
        let et = if lidar.elev_count > 1 {
            ei as f64 / (lidar.elev_count - 1) as f64
        } else {
            0.5
        };
        let elev = (lidar.elev_deg.0 + (lidar.elev_deg.1 - lidar.elev_deg.0) * et).to_radians();
        for ai in 0..lidar.azim_count {
            let at = ai as f64 / lidar.azim_count as f64;
            let azim = (lidar.azim_deg.0 + (lidar.azim_deg.1 - lidar.azim_deg.0) * at).to_radians();
            // ego frame: x forward, y left, z up
            let dir_ego = Vec3::new(
                elev.cos() * azim.cos(),
                elev.cos() * azim.sin(),
                elev.sin(),
            );
            let dir = ego.rotation.mul_vec(dir_ego);
            if let Some((hit, _)) = cast_scene(sensor_pos, dir, &spec.geometry, movers_now) {
                if hit.t > lidar.max_range {
                    continue;
                }
                let mut range = hit.t;
                if lidar.noise_sigma > 0.0 {
                    range += sample_normal(rng) * lidar.noise_sigma;
                }
                if lidar.outlier_fraction > 0.0 && rng.gen::<f64>() < lidar.outlier_fraction {
                    range += sample_normal(rng) * lidar.outlier_sigma;
                }
                let world = sensor_pos + dir * range;
                // sensor frame shares the ego orientation
                points.push(ego.rotation.transpose().mul_vec(world - sensor_pos));
            }
        }
    }
    points
}

fn sample_normal(rng: &mut ChaCha12Rng) -> f64 {
    let u1: f64 = rng.gen_range(1e-12..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn mat_to_array(m: &Mat3<f64>) -> [f64; 9] {
    m.to_row_major()
}

/// Generates the full dataset directory for a scene spec.
pub fn generate_synthetic_scene(spec: &SceneSpec, seed: u64, out: &Path) -> Result<()> {
    if spec.timesteps == 0 {
        return Err(Error::parameter("timesteps", "must be positive"));
    }
    if spec.cameras.is_empty() {
        return Err(Error::parameter("cameras", "need at least one camera"));
    }

    fs::create_dir_all(out.join("images")).map_err(|e| Error::io(out, e))?;
    fs::create_dir_all(out.join("lidar")).map_err(|e| Error::io(out, e))?;
    if spec.movers.iter().any(|m| m.emit_masks) {
        fs::create_dir_all(out.join("masks")).map_err(|e| Error::io(out, e))?;
    }

    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut frames = Vec::new();
    let mut lidar_entries = Vec::new();
    let mut object_frames: BTreeMap<String, Vec<ManifestObjectFrame>> = BTreeMap::new();

    for t in 0..spec.timesteps {
        let ego = spec.ego.pose(t, spec.timesteps);
        let movers_now: Vec<PrimitiveSpec> = spec
            .movers
            .iter()
            .map(|m| m.as_primitive(t, spec.timesteps))
            .collect();

        // degenerate spec: a camera center inside solid geometry
        for cam in &spec.cameras {
            let center = ego.apply(Vec3::from_array(cam.mount));
            let inside = spec
                .geometry
                .iter()
                .chain(movers_now.iter())
                .any(|p| p.contains(center));
            if inside {
                return Err(Error::parameter(
                    "cameras",
                    format!("camera {} is inside scene geometry at t={t}", cam.id),
                ));
            }
        }

        let mut images = BTreeMap::new();
        let mut frame_masks: Vec<(usize, String, Mask)> = Vec::new();
        for cam in &spec.cameras {
            let rig_rot = cam.rig_rotation();
            let world_rot = rig_rot * ego.rotation.transpose();
            let center = ego.apply(Vec3::from_array(cam.mount));
            let (img, masks) =
                render_ground_truth(spec, world_rot, center, cam, &movers_now, seed);
            let rel = format!("images/{}_{t:04}.png", cam.id);
            img.save_png(&out.join(&rel))?;
            images.insert(cam.id.clone(), rel);
            for (mi, mask) in masks.into_iter().enumerate() {
                if spec.movers[mi].emit_masks && mask.count() > 0 {
                    frame_masks.push((mi, cam.id.clone(), mask));
                }
            }
        }

        frames.push(ManifestFrame {
            timestep: t as i64,
            images,
            pose: Some(ManifestPose {
                r: mat_to_array(&ego.rotation),
                t: ego.translation.to_array(),
            }),
        });

        if let Some(lidar) = &spec.lidar {
            let points = cast_lidar(spec, lidar, &ego, &movers_now, &mut rng);
            let rel = format!("lidar/sweep_{t:04}.ply");
            write_ply(
                &out.join(&rel),
                &PlyCloud::<f64> { positions: points, colors: None },
            )?;
            let sensor_pos = ego.apply(Vec3::from_array(lidar.mount));
            lidar_entries.push(ManifestLidar {
                timestep: t as i64,
                path: rel,
                pose: ManifestPose {
                    r: mat_to_array(&ego.rotation),
                    t: sensor_pos.to_array(),
                },
            });
        }

        for (mi, mover) in spec.movers.iter().enumerate() {
            let mut masks = BTreeMap::new();
            for (fmi, cam_id, mask) in &frame_masks {
                if *fmi == mi {
                    let rel = format!("masks/{}_{}_{t:04}.png", mover.id, cam_id);
                    mask.save_png(&out.join(&rel))?;
                    masks.insert(cam_id.clone(), rel);
                }
            }
            object_frames.entry(mover.id.clone()).or_default().push(ManifestObjectFrame {
                timestep: t as i64,
                center: mover.center(t, spec.timesteps).to_array(),
                half_extents: mover.half_extents,
                yaw: mover.yaw_at(),
                pitch: 0.0,
                masks: (!masks.is_empty()).then_some(masks),
            });
        }
    }

    let manifest = Manifest {
        cameras: spec
            .cameras
            .iter()
            .map(|c| ManifestCamera {
                id: c.id.clone(),
                k: c.intrinsics(),
                r: mat_to_array(&c.rig_rotation()),
                t: c.rig_translation().to_array(),
                width: c.width,
                height: c.height,
                fusion_weight: 1.0,
            })
            .collect(),
        frames,
        lidar: lidar_entries,
        objects: object_frames
            .into_iter()
            .map(|(id, frames)| ManifestObject { id, frames })
            .collect(),
        split: ManifestSplit { policy: spec.split },
    };
    manifest.save(&out.join("manifest.json"))
}

impl SceneSpec {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::load(path, e.to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}
