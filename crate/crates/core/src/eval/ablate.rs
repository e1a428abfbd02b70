//! Full pipeline driver and the ablation harness: trains configuration
//! variants with a shared seed and reports comparative metrics.

use serde::{Deserialize, Serialize};

use crate::dynamic::{compose, train_node, DynamicGraph};
use crate::error::{Error, Result};
use crate::losses::LossConfig;
use crate::math::Vec3;
use crate::optim::TrainConfig;
use crate::prior::{
    aggregate_sweeps, build_prior, colorize, remove_dynamic_points, voxel_filter, PriorPoint,
    PriorPointCloud, PriorSettings,
};
use crate::raster::{render, RenderOutput, RenderSettings};
use crate::scalar::{sc, Scalar};
use crate::scene::{CameraView, Gaussian, ImageBuf, ObjectBox, SceneDataset};
use crate::train::{partition_bins, train_static, BinCount, StaticOptions};

use super::{evaluate_views, MetricsReport, MetricsRow, RunMetadata};

/// Initialization source for the static field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitKind {
    Random,
    LidarRaw,
    LidarVoxel,
    LidarAdaptive,
}

/// One ablation variant, mirroring the initialization, module and
/// bin-density studies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Full,
    /// Single-bin joint training with every view supervising from the
    /// first iteration.
    NoIs3g,
    /// No dynamic nodes; movers are not masked out of static training.
    NoCdgg,
    NoTssim,
    NoRobust,
    NoLidar,
    InitRandom,
    InitLidarRaw,
    InitLidarVoxel,
    InitLidarAdaptive,
    Bins(usize),
}

impl Variant {
    pub fn name(&self) -> String {
        match self {
            Variant::Bins(n) => format!("bins-{n}"),
            v => serde_json::to_string(v).unwrap().trim_matches('"').to_string(),
        }
    }

    pub fn parse(s: &str) -> Option<Variant> {
        if let Some(n) = s.strip_prefix("bins-") {
            return n.parse().ok().map(Variant::Bins);
        }
        serde_json::from_str(&format!("\"{s}\"")).ok()
    }
}

/// Options for one full training run.
#[derive(Clone, Debug)]
pub struct PipelineOptions {
    /// Static iterations (0 = `TrainConfig::total_iters`).
    pub iters: usize,
    /// Per-node iterations (0 = `TrainConfig::dynamic_iters`).
    pub node_iters: usize,
    pub bins: BinCount,
    pub overlap_frac: f64,
    pub seed: u64,
    pub eval_every: usize,
    pub init: InitKind,
    pub train_dynamic: bool,
    pub mask_dynamic: bool,
    /// Coarse voxel size for the `LidarVoxel` init (meters).
    pub voxel_coarse: f64,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self {
            iters: 0,
            node_iters: 0,
            bins: BinCount::Auto,
            overlap_frac: crate::train::DEFAULT_OVERLAP_FRAC,
            seed: 0,
            eval_every: 0,
            init: InitKind::LidarAdaptive,
            train_dynamic: true,
            mask_dynamic: true,
            voxel_coarse: 0.3,
        }
    }
}

/// A trained composite scene: the static field plus the dynamic graph.
#[derive(Clone, Debug)]
pub struct TrainedScene<T> {
    pub static_field: Vec<Gaussian<T>>,
    pub graph: DynamicGraph<T>,
}

impl<T: Scalar> TrainedScene<T> {
    /// Global rendering at the camera's timestep: compose (with distance-
    /// based node opacity for this camera), then splat.
    pub fn render(&self, cam: &CameraView<T>, settings: &RenderSettings<T>) -> RenderOutput<T> {
        let composed = compose(&self.static_field, &self.graph, cam.timestep, Some(cam));
        render(&composed, cam, settings)
    }

    pub fn render_image(&self, cam: &CameraView<T>, settings: &RenderSettings<T>) -> ImageBuf<T> {
        self.render(cam, settings).image
    }
}

/// Builds the prior (or random) initialization cloud for a given init
/// kind. Returns the cloud and whether the LiDAR position loss applies.
pub fn build_init_cloud<T: Scalar>(
    dataset: &SceneDataset<T>,
    init: InitKind,
    voxel_coarse: f64,
    seed: u64,
) -> Result<(PriorPointCloud<T>, bool)> {
    match init {
        InitKind::LidarAdaptive => {
            let cloud = build_prior(dataset, &PriorSettings::default())?;
            Ok((cloud, true))
        }
        InitKind::LidarVoxel => {
            let settings = PriorSettings {
                voxel_size: Some(sc(voxel_coarse)),
                adaptive: None,
                ..PriorSettings::default()
            };
            Ok((build_prior(dataset, &settings)?, true))
        }
        InitKind::LidarRaw => {
            let settings = PriorSettings {
                voxel_size: None,
                adaptive: None,
                ..PriorSettings::default()
            };
            Ok((build_prior(dataset, &settings)?, true))
        }
        InitKind::Random => {
            // match the spatial support and count of the default prior,
            // but scatter uniformly with random colors and no position
            // supervision
            let reference = build_prior(dataset, &PriorSettings::default())?;
            let (mut lo, mut hi) = (Vec3::splat(T::infinity()), Vec3::splat(T::neg_infinity()));
            for p in &reference.points {
                for a in 0..3 {
                    lo[a] = lo[a].min(p.position[a]);
                    hi[a] = hi[a].max(p.position[a]);
                }
            }
            use rand::Rng;
            use rand_chacha::rand_core::SeedableRng;
            let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed ^ 0x7a11);
            let points = (0..reference.len())
                .map(|_| PriorPoint {
                    position: Vec3::new(
                        lo.x + (hi.x - lo.x) * sc(rng.gen::<f64>()),
                        lo.y + (hi.y - lo.y) * sc(rng.gen::<f64>()),
                        lo.z + (hi.z - lo.z) * sc(rng.gen::<f64>()),
                    ),
                    color: Some(Vec3::new(
                        sc(rng.gen::<f64>()),
                        sc(rng.gen::<f64>()),
                        sc(rng.gen::<f64>()),
                    )),
                    source_camera: None,
                    timestep: 0,
                })
                .collect();
            Ok((
                PriorPointCloud { points, depth_range: reference.depth_range },
                false,
            ))
        }
    }
}

/// Raw-count prior stages for inspection (CLI `prior` subcommand).
pub fn prior_stage_counts<T: Scalar>(
    dataset: &SceneDataset<T>,
    settings: &PriorSettings<T>,
) -> Result<Vec<(String, usize)>> {
    let mut out = Vec::new();
    let cloud = aggregate_sweeps(&dataset.sweeps)?;
    out.push(("aggregate".into(), cloud.len()));
    let boxes: Vec<&ObjectBox<T>> = dataset.boxes.iter().collect();
    let cloud = remove_dynamic_points(cloud, &boxes, settings.box_margin);
    out.push(("remove_dynamic".into(), cloud.len()));
    let views: Vec<(&CameraView<T>, &ImageBuf<T>)> = dataset
        .train_views()
        .into_iter()
        .map(|v| (&v.camera, &v.image))
        .collect();
    let mut cloud = colorize(cloud, &views);
    if settings.drop_uncolored {
        cloud = cloud.drop_uncolored();
    }
    out.push(("colorize".into(), cloud.len()));
    if let Some(size) = settings.voxel_size {
        cloud = voxel_filter(cloud, size)?;
        out.push(("voxel".into(), cloud.len()));
    }
    if let Some((k, sigma)) = settings.adaptive {
        if k < cloud.len() {
            let cams: Vec<&CameraView<T>> = dataset.views.iter().map(|v| &v.camera).collect();
            cloud = crate::prior::adaptive_depth_filter(cloud, &cams, k, sigma)?;
            out.push(("adaptive".into(), cloud.len()));
        }
    }
    Ok(out)
}

/// Trains the full composite pipeline on a dataset.
pub fn run_pipeline<T: Scalar>(
    dataset: &SceneDataset<T>,
    cfg: &TrainConfig,
    loss_cfg: &LossConfig<T>,
    settings: &RenderSettings<T>,
    opts: &PipelineOptions,
    mut on_eval: impl FnMut(usize, &[Gaussian<T>]),
) -> Result<TrainedScene<T>> {
    let (cloud, lidar_loss) = build_init_cloud(dataset, opts.init, opts.voxel_coarse, opts.seed)?;
    let schedule = partition_bins(dataset, &cloud, opts.bins, opts.overlap_frac)?;

    let static_opts = StaticOptions {
        iters: opts.iters,
        frozen_prev: false,
        multicam_fusion: true,
        seed: opts.seed,
        eval_every: opts.eval_every,
        use_lidar_loss: lidar_loss,
        mask_dynamic: opts.mask_dynamic,
    };
    let outcome = train_static(
        dataset,
        &cloud,
        &schedule,
        cfg.clone(),
        loss_cfg.clone(),
        settings.clone(),
        &static_opts,
        |_, _| {},
        &mut on_eval,
    )?;

    let mut graph = DynamicGraph::new();
    if opts.train_dynamic {
        let node_iters = if opts.node_iters > 0 { opts.node_iters } else { cfg.dynamic_iters };
        for id in dataset.object_ids() {
            match train_node(dataset, &id, cfg, loss_cfg, settings, node_iters, opts.seed) {
                Ok(node) => graph.insert(node)?,
                Err(Error::InsufficientObjectViews { got, need }) => {
                    log::warn!("object {id}: only {got} views (need {need}), skipping");
                }
                Err(e) => return Err(e),
            }
        }
    }

    Ok(TrainedScene { static_field: outcome.fitter.gaussians, graph })
}

/// One row of an ablation table.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AblationRow {
    pub variant: String,
    pub mean_psnr_test: Option<f64>,
    pub mean_ssim_test: Option<f64>,
    pub mean_psnr_train: Option<f64>,
    pub gaussians: usize,
    pub nodes: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AblationReport {
    pub note: String,
    pub rows: Vec<AblationRow>,
    pub metadata: RunMetadata,
}

impl AblationReport {
    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

/// Applies one variant's deltas to a base configuration.
pub fn apply_variant<T: Scalar>(
    variant: Variant,
    loss_cfg: &mut LossConfig<T>,
    opts: &mut PipelineOptions,
) {
    match variant {
        Variant::Full => {}
        Variant::NoIs3g => opts.bins = BinCount::Fixed(1),
        Variant::NoCdgg => {
            opts.train_dynamic = false;
            opts.mask_dynamic = false;
        }
        Variant::NoTssim => loss_cfg.lambda_tssim = T::zero(),
        Variant::NoRobust => loss_cfg.lambda_robust = T::zero(),
        Variant::NoLidar => loss_cfg.lambda_lidar = T::zero(),
        Variant::InitRandom => opts.init = InitKind::Random,
        Variant::InitLidarRaw => opts.init = InitKind::LidarRaw,
        Variant::InitLidarVoxel => opts.init = InitKind::LidarVoxel,
        Variant::InitLidarAdaptive => opts.init = InitKind::LidarAdaptive,
        Variant::Bins(n) => opts.bins = BinCount::Fixed(n),
    }
}

/// Trains each variant with a shared seed and evaluates the test split.
pub fn run_ablation<T: Scalar>(
    dataset: &SceneDataset<T>,
    variants: &[Variant],
    base_cfg: &TrainConfig,
    base_loss: &LossConfig<T>,
    settings: &RenderSettings<T>,
    base_opts: &PipelineOptions,
) -> Result<(AblationReport, Vec<MetricsReport>)> {
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    for &variant in variants {
        let mut loss_cfg = base_loss.clone();
        let mut opts = base_opts.clone();
        apply_variant(variant, &mut loss_cfg, &mut opts);
        let scene = run_pipeline(dataset, base_cfg, &loss_cfg, settings, &opts, |_, _| {})?;

        let all_views: Vec<&crate::scene::SceneView<T>> = dataset.views.iter().collect();
        let metric_rows: Vec<MetricsRow> = evaluate_views(&all_views, |cam| {
            scene.render_image(cam, settings)
        })?;
        let metadata = RunMetadata {
            seed: opts.seed,
            config_hash: config_hash(base_cfg, &loss_cfg),
            deterministic: true,
            wall_time_s: None,
        };
        let report = MetricsReport::from_rows(metric_rows, metadata.clone());
        rows.push(AblationRow {
            variant: variant.name(),
            mean_psnr_test: report.mean_psnr_test,
            mean_ssim_test: report.mean_ssim_test,
            mean_psnr_train: report.mean_psnr_train,
            gaussians: scene.static_field.len(),
            nodes: scene.graph.nodes.len(),
        });
        reports.push(report);
    }
    let metadata = RunMetadata {
        seed: base_opts.seed,
        config_hash: config_hash(base_cfg, base_loss),
        deterministic: true,
        wall_time_s: None,
    };
    Ok((
        AblationReport {
            note: "metrics: PSNR/SSIM only (no learned perceptual metric)".into(),
            rows,
            metadata,
        },
        reports,
    ))
}

/// Stable hash of the resolved configuration.
pub fn config_hash<T: Scalar>(cfg: &TrainConfig, loss_cfg: &LossConfig<T>) -> String {
    use sha2::{Digest, Sha256};
    let mut hasher = Sha256::new();
    hasher.update(serde_json::to_string(cfg).unwrap_or_default());
    hasher.update(format!(
        "tssim_tile={} kappa={} l=({},{},{})",
        loss_cfg.tssim_tile,
        loss_cfg.kappa,
        loss_cfg.lambda_tssim,
        loss_cfg.lambda_robust,
        loss_cfg.lambda_lidar
    ));
    let out = hasher.finalize();
    out.iter().take(8).map(|b| format!("{b:02x}")).collect()
}
