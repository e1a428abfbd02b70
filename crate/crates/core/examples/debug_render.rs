//! Scratch: inspect initial renders vs ground truth.
use composite_splat::eval::psnr;
use composite_splat::prior::{build_prior, init_gaussians, PriorSettings};
use composite_splat::raster::{render, RenderSettings};
use composite_splat::scene::load_scene;
use composite_splat::synth::{generate_synthetic_scene, presets};

fn main() {
    let dir = std::env::temp_dir().join("corridor_dbg");
    generate_synthetic_scene(&presets::corridor(), 42, &dir).unwrap();
    let ds = load_scene::<f64>(&dir).unwrap();
    let cloud = build_prior(&ds, &PriorSettings::default()).unwrap();
    println!("prior: {} points, depth range {:?}", cloud.len(), cloud.depth_range);
    let gaussians = init_gaussians(&cloud).unwrap();
    let mut settings = RenderSettings::<f64>::default();
    settings.background = composite_splat::math::Vec3::new(0.72, 0.8, 0.92);
    let out_dir = std::path::Path::new("/tmp/dbg");
    std::fs::create_dir_all(out_dir).unwrap();
    for v in ds.views.iter().take(3) {
        let out = render(&gaussians, &v.camera, &settings);
        let p = psnr(&out.image, &v.image).unwrap();
        println!("view {} t{}: init PSNR {:.2}", v.camera.camera_id, v.camera.timestep, p);
        out.image.save_png(&out_dir.join(format!("init_{}_{}.png", v.camera.camera_id, v.camera.timestep))).unwrap();
        v.image.save_png(&out_dir.join(format!("gt_{}_{}.png", v.camera.camera_id, v.camera.timestep))).unwrap();
        // how much is covered?
        let covered = out.final_transmittance.iter().filter(|&&t| t < 0.5).count();
        println!("  covered(T<0.5): {}/{}", covered, out.final_transmittance.len());
    }
    // opacity boost test: set opacity 0.9
    let mut boosted = gaussians.clone();
    for g in &mut boosted { g.opacity_logit = composite_splat::scalar::logit(0.9); }
    for v in ds.views.iter().take(1) {
        let out = render(&boosted, &v.camera, &settings);
        let p = psnr(&out.image, &v.image).unwrap();
        println!("boosted opacity init PSNR {:.2}", p);
        out.image.save_png(&out_dir.join("boosted.png")).unwrap();
    }
}
