//! End-to-end checks of the synthetic generator and dataset ingestion.

use composite_splat::math::Vec3;
use composite_splat::prior::{self, PriorSettings};
use composite_splat::scene::{load_scene, save_scene};
use composite_splat::synth::{self, presets};

#[test]
fn corridor_generates_expected_counts_and_split() {
    let dir = tempfile::tempdir().unwrap();
    let spec = presets::corridor();
    synth::generate_synthetic_scene(&spec, 7, dir.path()).unwrap();

    let ds = load_scene::<f64>(dir.path()).unwrap();
    assert_eq!(ds.views.len(), 30, "3 cameras x 10 timesteps");
    assert_eq!(ds.sweeps.len(), 10);
    // every-5th split: 2 test frames per camera stream
    assert_eq!(ds.test_views().len(), 6);
    assert_eq!(ds.train_views().len(), 24);
    for v in &ds.views {
        assert_eq!(v.image.width, 96);
        assert_eq!(v.image.height, 64);
    }
    assert!(ds.camera_extent() > 5.0);
}

#[test]
fn manifest_roundtrip_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let spec = presets::corridor();
    synth::generate_synthetic_scene(&spec, 3, dir.path()).unwrap();
    let original = std::fs::read(dir.path().join("manifest.json")).unwrap();
    let ds = load_scene::<f64>(dir.path()).unwrap();
    save_scene(&ds, dir.path()).unwrap();
    let rewritten = std::fs::read(dir.path().join("manifest.json")).unwrap();
    assert_eq!(original, rewritten);
}

#[test]
fn noiseless_lidar_lies_on_geometry() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = presets::corridor();
    {
        let lidar = spec.lidar.as_mut().unwrap();
        lidar.noise_sigma = 0.0;
        lidar.outlier_fraction = 0.0;
    }
    synth::generate_synthetic_scene(&spec, 5, dir.path()).unwrap();
    let ds = load_scene::<f64>(dir.path()).unwrap();

    // re-cast each stored point's ray; the hit distance must equal the
    // stored range exactly (no noise)
    let mut checked = 0;
    for sweep in &ds.sweeps {
        for p in sweep.points.iter().step_by(37) {
            let world = sweep.sensor_pose.apply(*p);
            let origin = sweep.sensor_pose.translation;
            let dir = (world - origin).normalized();
            let (hit, _) = synth::cast_scene(origin, dir, &spec.geometry, &[])
                .expect("stored point must re-hit geometry");
            assert!(
                (hit.t - (world - origin).norm()).abs() < 1e-9,
                "ray residual {}",
                (hit.t - (world - origin).norm()).abs()
            );
            checked += 1;
        }
    }
    assert!(checked > 50);
}

#[test]
fn moving_cube_boxes_follow_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = presets::moving_cube();
    spec.timesteps = 6;
    // shrink for speed
    for cam in &mut spec.cameras {
        cam.width = 40;
        cam.height = 28;
    }
    synth::generate_synthetic_scene(&spec, 11, dir.path()).unwrap();
    let ds = load_scene::<f64>(dir.path()).unwrap();
    let boxes = ds.boxes_for("cube");
    assert_eq!(boxes.len(), 6);
    let mover = &spec.movers[0];
    for (i, b) in boxes.iter().enumerate() {
        let expect = mover.center(i, spec.timesteps);
        assert!(b.center.distance(expect) < 1e-12, "exact scripted center");
    }
    // at least one frame carries a mask for the cube
    assert!(boxes.iter().any(|b| !b.masks.is_empty()));
}

#[test]
fn camera_inside_geometry_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = presets::corridor();
    spec.geometry.push(composite_splat::synth::geometry::PrimitiveSpec::Box {
        center: [1.5, 0.0, 1.6],
        half_extents: [2.0, 2.0, 2.0],
        yaw: 0.0,
        texture: composite_splat::synth::texture::TextureSpec::Solid { color: [1.0; 3] },
    });
    let err = synth::generate_synthetic_scene(&spec, 0, dir.path()).unwrap_err();
    assert!(err.to_string().contains("inside scene geometry"));
}

#[test]
fn prior_pipeline_produces_colored_filtered_cloud() {
    let dir = tempfile::tempdir().unwrap();
    let spec = presets::corridor();
    synth::generate_synthetic_scene(&spec, 13, dir.path()).unwrap();
    let ds = load_scene::<f64>(dir.path()).unwrap();

    let raw = prior::aggregate_sweeps(&ds.sweeps).unwrap();
    let raw_count = raw.len();
    assert!(raw_count > 10_000, "raw aggregate has {raw_count} points");

    let cloud = prior::build_prior(&ds, &PriorSettings::default()).unwrap();
    assert!(cloud.len() > 2_000, "filtered cloud has {} points", cloud.len());
    assert!(cloud.len() < raw_count);
    assert!(cloud.points.iter().all(|p| p.color.is_some()));

    let gaussians = prior::init_gaussians(&cloud).unwrap();
    assert_eq!(gaussians.len(), cloud.len());
    // colors sampled from the scene stay in range and vary
    let mut mean = Vec3::zero();
    for g in &gaussians {
        let c = g.color(Vec3::new(0.0, 0.0, 1.0));
        assert!(c.x >= 0.0 && c.x <= 1.0);
        mean += c;
    }
    mean = mean / gaussians.len() as f64;
    assert!(mean.x > 0.05 && mean.x < 0.95);
}
