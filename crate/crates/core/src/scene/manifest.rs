//! On-disk dataset manifest (`manifest.json`).
//!
//! Serialization is canonical: struct field order, sorted map keys, pretty
//! two-space indentation, trailing newline. Loading and re-saving a
//! manifest produced by this writer is byte-identical.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub cameras: Vec<ManifestCamera>,
    pub frames: Vec<ManifestFrame>,
    #[serde(default)]
    pub lidar: Vec<ManifestLidar>,
    #[serde(default)]
    pub objects: Vec<ManifestObject>,
    pub split: ManifestSplit,
}

/// Camera rig entry. `R`/`T` map the ego (rig) frame into the camera
/// frame; world extrinsics per timestep come from composing with the
/// frame's ego pose.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ManifestCamera {
    pub id: String,
    #[serde(rename = "K")]
    pub k: [f64; 9],
    #[serde(rename = "R")]
    pub r: [f64; 9],
    #[serde(rename = "T")]
    pub t: [f64; 3],
    pub width: u32,
    pub height: u32,
    #[serde(default = "default_weight")]
    pub fusion_weight: f64,
}

fn default_weight() -> f64 {
    1.0
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ManifestFrame {
    pub timestep: i64,
    /// Image path per camera id, relative to the dataset root.
    pub images: BTreeMap<String, String>,
    /// Ego-to-world pose; defaults to the LiDAR pose at this timestep,
    /// then to identity.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pose: Option<ManifestPose>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ManifestPose {
    pub r: [f64; 9],
    pub t: [f64; 3],
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ManifestLidar {
    pub timestep: i64,
    pub path: String,
    pub pose: ManifestPose,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ManifestObject {
    pub id: String,
    pub frames: Vec<ManifestObjectFrame>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ManifestObjectFrame {
    pub timestep: i64,
    pub center: [f64; 3],
    pub half_extents: [f64; 3],
    pub yaw: f64,
    pub pitch: f64,
    /// Optional mask path per camera id.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub masks: Option<BTreeMap<String, String>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ManifestSplit {
    pub policy: SplitPolicy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SplitPolicy {
    /// Every 5th image per camera stream is a test image.
    #[serde(rename = "every_5th")]
    Every5th,
    /// Every 10th image per camera stream is a test image.
    #[serde(rename = "every_10th")]
    Every10th,
}

impl SplitPolicy {
    pub fn stride(self) -> usize {
        match self {
            Self::Every5th => 5,
            Self::Every10th => 10,
        }
    }
}

impl Manifest {
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

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Manifest {
        Manifest {
            cameras: vec![ManifestCamera {
                id: "front".into(),
                k: [100.0, 0.0, 48.0, 0.0, 100.0, 32.0, 0.0, 0.0, 1.0],
                r: [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
                t: [0.0; 3],
                width: 96,
                height: 64,
                fusion_weight: 1.0,
            }],
            frames: vec![ManifestFrame {
                timestep: 0,
                images: [("front".to_string(), "images/front_0000.png".to_string())]
                    .into_iter()
                    .collect(),
                pose: Some(ManifestPose {
                    r: [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
                    t: [0.0, 0.0, 0.0],
                }),
            }],
            lidar: vec![],
            objects: vec![],
            split: ManifestSplit { policy: SplitPolicy::Every5th },
        }
    }

    #[test]
    fn canonical_roundtrip_is_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("manifest.json");
        sample().save(&path).unwrap();
        let first = std::fs::read(&path).unwrap();
        let loaded = Manifest::load(&path).unwrap();
        loaded.save(&path).unwrap();
        let second = std::fs::read(&path).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn split_policy_names() {
        let json = serde_json::to_string(&SplitPolicy::Every5th).unwrap();
        assert_eq!(json, "\"every_5th\"");
    }
}
