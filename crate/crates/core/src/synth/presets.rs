//! Built-in scene specs used by the acceptance runs and the CLI
//! `--preset` flag.

use crate::scene::manifest::SplitPolicy;

use super::geometry::PrimitiveSpec;
use super::texture::TextureSpec;
use super::{CameraSpec, EgoSpec, LidarSpec, MoverSpec, SceneSpec};

fn camera(id: &str, yaw_deg: f64, width: u32, height: u32) -> CameraSpec {
    CameraSpec {
        id: id.into(),
        yaw_deg,
        pitch_deg: 8.0,
        width,
        height,
        hfov_deg: 70.0,
        mount: [1.5, 0.0, 1.6],
    }
}

fn floor(x0: f64, x1: f64, half_width: f64, scale: f64) -> PrimitiveSpec {
    PrimitiveSpec::Quad {
        origin: [x0, -half_width, 0.0],
        u: [x1 - x0, 0.0, 0.0],
        v: [0.0, 2.0 * half_width, 0.0],
        texture: TextureSpec::Checker {
            scale,
            color_a: [0.42, 0.42, 0.45],
            color_b: [0.25, 0.25, 0.28],
            noise: 0.18,
        },
    }
}

fn wall(x0: f64, x1: f64, y: f64, height: f64, tex: TextureSpec) -> PrimitiveSpec {
    PrimitiveSpec::Quad {
        origin: [x0, y, 0.0],
        u: [x1 - x0, 0.0, 0.0],
        v: [0.0, 0.0, height],
        texture: tex,
    }
}

/// Three-camera corridor drive: textured floor, side walls, an end wall
/// and a few parked boxes. 10 timesteps over 20 m.
pub fn corridor() -> SceneSpec {
    SceneSpec {
        name: "corridor".into(),
        timesteps: 10,
        ego: EgoSpec { start: [0.0, 0.0, 0.0], end: [20.0, 0.0, 0.0] },
        cameras: vec![
            camera("front", 0.0, 96, 64),
            camera("front_left", 35.0, 96, 64),
            camera("front_right", -35.0, 96, 64),
        ],
        geometry: vec![
            floor(-5.0, 42.0, 6.0, 2.0),
            wall(
                -5.0,
                42.0,
                6.0,
                5.0,
                TextureSpec::Checker {
                    scale: 1.6,
                    color_a: [0.72, 0.5, 0.34],
                    color_b: [0.5, 0.3, 0.2],
                    noise: 0.2,
                },
            ),
            wall(
                -5.0,
                42.0,
                -6.0,
                5.0,
                TextureSpec::Checker {
                    scale: 1.2,
                    color_a: [0.35, 0.45, 0.7],
                    color_b: [0.2, 0.28, 0.5],
                    noise: 0.2,
                },
            ),
            PrimitiveSpec::Quad {
                origin: [42.0, -6.0, 0.0],
                u: [0.0, 12.0, 0.0],
                v: [0.0, 0.0, 5.0],
                texture: TextureSpec::Checker {
                    scale: 1.0,
                    color_a: [0.4, 0.65, 0.4],
                    color_b: [0.22, 0.4, 0.25],
                    noise: 0.15,
                },
            },
            PrimitiveSpec::Box {
                center: [12.0, 4.2, 0.7],
                half_extents: [1.0, 0.7, 0.7],
                yaw: 0.35,
                texture: TextureSpec::Checker {
                    scale: 0.5,
                    color_a: [0.75, 0.7, 0.3],
                    color_b: [0.45, 0.4, 0.15],
                    noise: 0.1,
                },
            },
            PrimitiveSpec::Box {
                center: [24.0, -4.0, 0.6],
                half_extents: [0.8, 0.8, 0.6],
                yaw: -0.2,
                texture: TextureSpec::Noise {
                    scale: 0.4,
                    base: [0.6, 0.35, 0.55],
                    amp: 0.5,
                },
            },
        ],
        movers: vec![],
        lidar: Some(LidarSpec {
            elev_deg: (-22.0, 6.0),
            elev_count: 20,
            azim_deg: (-100.0, 100.0),
            azim_count: 160,
            max_range: 60.0,
            noise_sigma: 0.02,
            outlier_fraction: 0.015,
            outlier_sigma: 4.0,
            mount: [0.0, 0.0, 1.8],
        }),
        sky: [0.72, 0.8, 0.92],
        split: SplitPolicy::Every5th,
    }
}

/// Street drive with one crossing box mover; long enough for two bins.
pub fn moving_cube() -> SceneSpec {
    SceneSpec {
        name: "moving_cube".into(),
        timesteps: 14,
        ego: EgoSpec { start: [0.0, 0.0, 0.0], end: [130.0, 0.0, 0.0] },
        cameras: vec![camera("front", 0.0, 80, 56), camera("front_left", 30.0, 80, 56)],
        geometry: vec![
            floor(-5.0, 165.0, 8.0, 2.5),
            wall(
                -5.0,
                165.0,
                8.0,
                6.0,
                TextureSpec::Checker {
                    scale: 2.0,
                    color_a: [0.7, 0.52, 0.36],
                    color_b: [0.46, 0.3, 0.2],
                    noise: 0.22,
                },
            ),
            wall(
                -5.0,
                165.0,
                -8.0,
                6.0,
                TextureSpec::Checker {
                    scale: 1.5,
                    color_a: [0.38, 0.48, 0.72],
                    color_b: [0.22, 0.3, 0.52],
                    noise: 0.22,
                },
            ),
            PrimitiveSpec::Quad {
                origin: [165.0, -8.0, 0.0],
                u: [0.0, 16.0, 0.0],
                v: [0.0, 0.0, 6.0],
                texture: TextureSpec::Checker {
                    scale: 1.2,
                    color_a: [0.45, 0.62, 0.42],
                    color_b: [0.25, 0.4, 0.26],
                    noise: 0.18,
                },
            },
        ],
        movers: vec![MoverSpec {
            id: "cube".into(),
            half_extents: [1.1, 0.9, 0.8],
            texture: TextureSpec::Checker {
                scale: 0.45,
                color_a: [0.85, 0.25, 0.2],
                color_b: [0.95, 0.8, 0.25],
                noise: 0.08,
            },
            start: [26.0, -5.5, 0.8],
            end: [92.0, 5.5, 0.8],
            yaw: None,
            emit_masks: true,
        }],
        lidar: Some(LidarSpec {
            elev_deg: (-22.0, 6.0),
            elev_count: 18,
            azim_deg: (-100.0, 100.0),
            azim_count: 150,
            max_range: 80.0,
            noise_sigma: 0.02,
            outlier_fraction: 0.01,
            outlier_sigma: 4.0,
            mount: [0.0, 0.0, 1.8],
        }),
        sky: [0.72, 0.8, 0.92],
        split: SplitPolicy::Every5th,
    }
}

/// 400 m straight strip at desk resolution for the bin-density study.
/// Wall textures change every 80 m so each region carries distinct
/// detail.
pub fn strip400() -> SceneSpec {
    let mut geometry = vec![floor(-5.0, 440.0, 7.0, 3.0)];
    let palettes = [
        ([0.7, 0.45, 0.3], [0.45, 0.26, 0.18], 1.8),
        ([0.4, 0.55, 0.75], [0.24, 0.33, 0.5], 1.3),
        ([0.62, 0.62, 0.3], [0.4, 0.4, 0.18], 2.2),
        ([0.65, 0.4, 0.6], [0.42, 0.22, 0.4], 1.5),
        ([0.4, 0.65, 0.5], [0.22, 0.42, 0.3], 1.9),
        ([0.7, 0.55, 0.25], [0.48, 0.35, 0.15], 1.1),
    ];
    for (i, (a, b, scale)) in palettes.iter().enumerate() {
        let x0 = -5.0 + i as f64 * 74.0;
        let x1 = x0 + 74.0 + 1.0;
        geometry.push(wall(
            x0,
            x1,
            7.0,
            5.5,
            TextureSpec::Checker { scale: *scale, color_a: *a, color_b: *b, noise: 0.2 },
        ));
        geometry.push(wall(
            x0,
            x1,
            -7.0,
            5.5,
            TextureSpec::Checker {
                scale: scale * 0.8,
                color_a: [b[0], a[1], b[2]],
                color_b: [a[0] * 0.5, b[1] * 0.5, a[2] * 0.5],
                noise: 0.2,
            },
        ));
    }
    geometry.push(PrimitiveSpec::Quad {
        origin: [440.0, -7.0, 0.0],
        u: [0.0, 14.0, 0.0],
        v: [0.0, 0.0, 5.5],
        texture: TextureSpec::Checker {
            scale: 1.0,
            color_a: [0.5, 0.5, 0.55],
            color_b: [0.3, 0.3, 0.34],
            noise: 0.15,
        },
    });

    SceneSpec {
        name: "strip400".into(),
        timesteps: 18,
        ego: EgoSpec { start: [0.0, 0.0, 0.0], end: [400.0, 0.0, 0.0] },
        cameras: vec![camera("front", 0.0, 80, 48), camera("front_right", -32.0, 80, 48)],
        geometry,
        movers: vec![],
        lidar: Some(LidarSpec {
            elev_deg: (-20.0, 5.0),
            elev_count: 16,
            azim_deg: (-100.0, 100.0),
            azim_count: 130,
            max_range: 90.0,
            noise_sigma: 0.02,
            outlier_fraction: 0.008,
            outlier_sigma: 4.0,
            mount: [0.0, 0.0, 1.8],
        }),
        sky: [0.72, 0.8, 0.92],
        split: SplitPolicy::Every5th,
    }
}

/// Preset lookup by name.
pub fn by_name(name: &str) -> Option<SceneSpec> {
    match name {
        "corridor" => Some(corridor()),
        "moving_cube" => Some(moving_cube()),
        "strip400" => Some(strip400()),
        _ => None,
    }
}
