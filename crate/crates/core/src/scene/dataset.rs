use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::math::{Mat3, Rigid, Vec3};
use crate::scalar::{sc, Scalar};

use super::camera::CameraView;
use super::image::{ImageBuf, Mask};
use super::manifest::{Manifest, SplitPolicy};
use super::objects::{LidarSweep, ObjectBox};
use super::ply;

/// One (camera, timestep) view: calibrated camera plus its image.
#[derive(Clone, Debug)]
pub struct SceneView<T> {
    pub camera: CameraView<T>,
    pub image: ImageBuf<T>,
    pub is_test: bool,
    pub image_path: String,
}

/// Calibrated multi-camera sequences, LiDAR sweeps, object boxes and ego
/// poses, timestep-indexed. Immutable after load; shareable across
/// threads.
#[derive(Clone, Debug)]
pub struct SceneDataset<T> {
    pub views: Vec<SceneView<T>>,
    pub sweeps: Vec<LidarSweep<T>>,
    pub boxes: Vec<ObjectBox<T>>,
    pub split_policy: SplitPolicy,
    /// Ego-to-world pose per timestep.
    pub ego_poses: Vec<(i64, Rigid<T>)>,
    /// The manifest as loaded; re-saved canonically by [`save_scene`].
    pub manifest: Manifest,
    pub root: PathBuf,
}

fn mat3_from<T: Scalar>(a: &[f64; 9]) -> Mat3<T> {
    let mut m = [T::zero(); 9];
    for (o, v) in m.iter_mut().zip(a.iter()) {
        *o = sc(*v);
    }
    Mat3::from_row_major(&m)
}

fn vec3_from<T: Scalar>(a: &[f64; 3]) -> Vec3<T> {
    Vec3::new(sc(a[0]), sc(a[1]), sc(a[2]))
}

/// Loads and validates a dataset directory containing `manifest.json`.
pub fn load_scene<T: Scalar>(root: &Path) -> Result<SceneDataset<T>> {
    let manifest_path = root.join("manifest.json");
    let manifest = Manifest::load(&manifest_path)?;

    let rig: HashMap<&str, &super::manifest::ManifestCamera> =
        manifest.cameras.iter().map(|c| (c.id.as_str(), c)).collect();
    if rig.len() != manifest.cameras.len() {
        return Err(Error::validation("cameras", "duplicate camera id"));
    }

    // lidar poses double as ego poses for frames without an explicit pose
    let lidar_pose: HashMap<i64, Rigid<T>> = manifest
        .lidar
        .iter()
        .map(|l| {
            (
                l.timestep,
                Rigid::new(mat3_from(&l.pose.r), vec3_from(&l.pose.t)),
            )
        })
        .collect();

    let mut frames = manifest.frames.clone();
    frames.sort_by_key(|f| f.timestep);

    let mut ego_poses = Vec::with_capacity(frames.len());
    let mut views: Vec<SceneView<T>> = Vec::new();
    // per-camera stream order, for the split
    let mut stream_index: BTreeMap<String, usize> = BTreeMap::new();
    let stride = manifest.split.policy.stride();

    for frame in &frames {
        let ego = frame
            .pose
            .as_ref()
            .map(|p| Rigid::new(mat3_from(&p.r), vec3_from(&p.t)))
            .or_else(|| lidar_pose.get(&frame.timestep).copied())
            .unwrap_or_else(Rigid::identity);
        ego_poses.push((frame.timestep, ego));
        let ego_inv = ego.inverse();

        for (cam_id, rel_path) in &frame.images {
            let cam = rig.get(cam_id.as_str()).ok_or_else(|| {
                Error::validation(
                    format!("frames[t={}].images", frame.timestep),
                    format!("unknown camera id {cam_id}"),
                )
            })?;
            let rig_rot: Mat3<T> = mat3_from(&cam.r);
            let rig_trans: Vec3<T> = vec3_from(&cam.t);
            let rotation = rig_rot * ego_inv.rotation;
            let translation = rig_rot.mul_vec(ego_inv.translation) + rig_trans;
            let camera = CameraView {
                intrinsics: mat3_from(&cam.k),
                rotation,
                translation,
                width: cam.width,
                height: cam.height,
                camera_id: cam.id.clone(),
                timestep: frame.timestep,
                fusion_weight: sc(cam.fusion_weight),
            };
            camera.validate()?;

            let img_path = root.join(rel_path);
            let image = ImageBuf::load_png(&img_path)?;
            if image.width != cam.width as usize || image.height != cam.height as usize {
                return Err(Error::validation(
                    format!("images[{cam_id}][t={}]", frame.timestep),
                    format!(
                        "resolution {}x{} does not match camera {}x{}",
                        image.width, image.height, cam.width, cam.height
                    ),
                ));
            }

            let idx = stream_index.entry(cam_id.clone()).or_insert(0);
            *idx += 1;
            let is_test = *idx % stride == 0;

            views.push(SceneView {
                camera,
                image,
                is_test,
                image_path: rel_path.clone(),
            });
        }
    }

    let mut sweeps = Vec::with_capacity(manifest.lidar.len());
    for l in &manifest.lidar {
        let cloud = ply::read_ply::<T>(&root.join(&l.path))?;
        let sweep = LidarSweep {
            points: cloud.positions,
            timestep: l.timestep,
            sensor_pose: Rigid::new(mat3_from(&l.pose.r), vec3_from(&l.pose.t)),
        };
        sweep.validate()?;
        sweeps.push(sweep);
    }

    let mut boxes = Vec::new();
    for obj in &manifest.objects {
        let mut last_t = i64::MIN;
        for of in &obj.frames {
            if of.timestep <= last_t {
                return Err(Error::validation(
                    format!("objects[{}].frames", obj.id),
                    "timesteps must be strictly increasing",
                ));
            }
            last_t = of.timestep;
            let mut masks = HashMap::new();
            if let Some(mask_paths) = &of.masks {
                for (cam_id, mp) in mask_paths {
                    masks.insert(cam_id.clone(), Mask::load_png(&root.join(mp))?);
                }
            }
            let b = ObjectBox {
                object_id: obj.id.clone(),
                timestep: of.timestep,
                center: vec3_from(&of.center),
                half_extents: vec3_from(&of.half_extents),
                yaw: sc(of.yaw),
                pitch: sc(of.pitch),
                masks,
            };
            b.validate()?;
            boxes.push(b);
        }
    }

    Ok(SceneDataset {
        views,
        sweeps,
        boxes,
        split_policy: manifest.split.policy,
        ego_poses,
        manifest,
        root: root.to_path_buf(),
    })
}

/// Writes the canonical manifest back to `root/manifest.json`.
pub fn save_scene<T: Scalar>(dataset: &SceneDataset<T>, root: &Path) -> Result<()> {
    dataset.manifest.save(&root.join("manifest.json"))
}

impl<T: Scalar> SceneDataset<T> {
    pub fn timesteps(&self) -> Vec<i64> {
        self.ego_poses.iter().map(|(t, _)| *t).collect()
    }

    pub fn views_at(&self, timestep: i64) -> Vec<&SceneView<T>> {
        self.views.iter().filter(|v| v.camera.timestep == timestep).collect()
    }

    pub fn train_views(&self) -> Vec<&SceneView<T>> {
        self.views.iter().filter(|v| !v.is_test).collect()
    }

    pub fn test_views(&self) -> Vec<&SceneView<T>> {
        self.views.iter().filter(|v| v.is_test).collect()
    }

    /// Ego position per timestep: explicit pose translation, else the mean
    /// camera center of that timestep.
    pub fn ego_positions(&self) -> Vec<(i64, Vec3<T>)> {
        self.ego_poses
            .iter()
            .map(|(t, pose)| {
                let explicit = pose.translation;
                if explicit != Vec3::zero() || pose.rotation != Mat3::identity() {
                    return (*t, explicit);
                }
                let views = self.views_at(*t);
                if views.is_empty() {
                    (*t, explicit)
                } else {
                    let mut acc = Vec3::zero();
                    for v in &views {
                        acc += v.camera.center();
                    }
                    (*t, acc / T::from_usize(views.len()).unwrap())
                }
            })
            .collect()
    }

    pub fn object_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = Vec::new();
        for b in &self.boxes {
            if !ids.contains(&b.object_id) {
                ids.push(b.object_id.clone());
            }
        }
        ids
    }

    /// Boxes for one object ordered by timestep.
    pub fn boxes_for(&self, object_id: &str) -> Vec<&ObjectBox<T>> {
        let mut out: Vec<&ObjectBox<T>> =
            self.boxes.iter().filter(|b| b.object_id == object_id).collect();
        out.sort_by_key(|b| b.timestep);
        out
    }

    /// Boxes active at one timestep.
    pub fn boxes_at(&self, timestep: i64) -> Vec<&ObjectBox<T>> {
        self.boxes.iter().filter(|b| b.timestep == timestep).collect()
    }

    /// Training-camera extent: 1.1x the max distance of camera centers
    /// from their centroid (used to scale learning rates and pruning).
    pub fn camera_extent(&self) -> T {
        let centers: Vec<Vec3<T>> = self.views.iter().map(|v| v.camera.center()).collect();
        if centers.is_empty() {
            return T::one();
        }
        let mut centroid = Vec3::zero();
        for c in &centers {
            centroid += *c;
        }
        centroid = centroid / T::from_usize(centers.len()).unwrap();
        let mut max_d = T::zero();
        for c in &centers {
            max_d = max_d.max(c.distance(centroid));
        }
        let extent = max_d * sc::<T>(1.1);
        if extent > T::zero() {
            extent
        } else {
            T::one()
        }
    }
}
