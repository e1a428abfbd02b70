//! Scratch experiment: corridor static training convergence.
use composite_splat::eval::ablate::{run_pipeline, InitKind, PipelineOptions};
use composite_splat::eval::{evaluate_views, psnr};
use composite_splat::losses::LossConfig;
use composite_splat::optim::TrainConfig;
use composite_splat::raster::{render, RenderSettings};
use composite_splat::scene::load_scene;
use composite_splat::synth::{generate_synthetic_scene, presets};
use std::time::Instant;

fn main() {

    let iters: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(3000);
    let dir = std::env::temp_dir().join("corridor_exp");
    let t0 = Instant::now();
    let spec = presets::corridor();
    generate_synthetic_scene(&spec, 42, &dir).unwrap();
    println!("generate: {:.1}s", t0.elapsed().as_secs_f64());

    let ds = load_scene::<f64>(&dir).unwrap();
    let cfg = TrainConfig::default();
    let loss_cfg = LossConfig::<f64>::default();
    let mut settings = RenderSettings::<f64>::default();
    settings.background = composite_splat::math::Vec3::new(0.72, 0.8, 0.92);

    let opts = PipelineOptions {
        iters,
        init: InitKind::LidarAdaptive,
        train_dynamic: false,
        seed: 42,
        eval_every: 500,
        ..Default::default()
    };
    let t1 = Instant::now();
    let test_views: Vec<_> = ds.test_views();
    let scene = run_pipeline(&ds, &cfg, &loss_cfg, &settings, &opts, |iter, gaussians| {
        let mut psnrs = vec![];
        for v in &test_views {
            let out = render(gaussians, &v.camera, &settings);
            psnrs.push(psnr(&out.image, &v.image).unwrap());
        }
        let mean = psnrs.iter().sum::<f64>() / psnrs.len() as f64;
        println!("  iter {iter}: {} gaussians, test PSNR {mean:.2} dB, {:.1}s", gaussians.len(), t1.elapsed().as_secs_f64());
    }).unwrap();
    println!("train: {:.1}s", t1.elapsed().as_secs_f64());

    let all: Vec<_> = ds.views.iter().collect();
    let rows = evaluate_views(&all, |cam| scene.render_image(cam, &settings)).unwrap();
    let report = composite_splat::eval::MetricsReport::from_rows(rows, composite_splat::eval::RunMetadata {
        seed: 42, config_hash: "x".into(), deterministic: true, wall_time_s: None,
    });
    println!("test PSNR {:?} SSIM {:?} | train PSNR {:?}", report.mean_psnr_test, report.mean_ssim_test, report.mean_psnr_train);
}
