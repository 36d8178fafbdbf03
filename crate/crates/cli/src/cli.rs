//! Command-line pipeline: preprocess, train, reassign, edit, render, eval,
//! serve and synth.

use std::collections::BTreeMap;
use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use splatseg_core::edit::{EditKind, EditOp};
use splatseg_core::mask::{self, load_mask, load_mask_dir, save_mask, CleanConfig, Connectivity};
use splatseg_core::metrics::{image_report, Image, ImageReport, SegCounts, SegReport};
use splatseg_core::raster::{render, Channels};
use splatseg_core::reassign::{DEFAULT_GAMMA_P, DEFAULT_K};
use splatseg_core::scene::{load_cameras, load_scene, save_cameras, save_scene};
use splatseg_core::session::{render_frame, RenderMode, Session, SessionConfig};
use splatseg_core::synthetic::{SyntheticConfig, SyntheticScene};
use splatseg_core::train::{
    load_checkpoint, save_checkpoint, train, Checkpoint, LinearClassifier, TrainConfig,
};

#[derive(Debug, Parser)]
#[command(
    name = "splatseg",
    version,
    about = "Gaussian-splatting segmentation pipeline"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Clean every mask in a directory (closing, then small-component relabeling).
    Preprocess(PreprocessArgs),
    /// Train per-Gaussian object features and the classifier.
    Train(TrainArgs),
    /// Reassign Gaussian labels by prior-guided multiview voting.
    Reassign(ReassignArgs),
    /// Remove, extract or recolor one object.
    Edit(EditArgs),
    /// Render every camera of a scene to PNG.
    Render(RenderArgs),
    /// Score predicted masks or images against ground truth.
    Eval(EvalArgs),
    /// Start the HTTP editing service.
    Serve(ServeArgs),
    /// Write the bundled synthetic scene, cameras and ground-truth masks.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct PreprocessArgs {
    #[arg(long)]
    pub masks: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 3)]
    pub kernel: usize,
    #[arg(long, default_value_t = 500)]
    pub area_threshold: usize,
    /// Pixel connectivity, 4 or 8.
    #[arg(long, default_value = "8", value_parser = parse_connectivity)]
    pub connectivity: Connectivity,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub scene: PathBuf,
    #[arg(long)]
    pub cameras: PathBuf,
    #[arg(long)]
    pub masks: PathBuf,
    /// Output PLY with trained object features.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub ckpt: PathBuf,
    #[arg(long, default_value_t = 30_000)]
    pub iters: u64,
    #[arg(long, default_value_t = 0.005)]
    pub lr_feat: f64,
    #[arg(long, default_value_t = 0.0005)]
    pub lr_linear: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct ReassignArgs {
    #[arg(long)]
    pub scene: PathBuf,
    #[arg(long)]
    pub ckpt: PathBuf,
    #[arg(long)]
    pub cameras: PathBuf,
    #[arg(long)]
    pub masks: PathBuf,
    #[arg(long, default_value_t = DEFAULT_GAMMA_P)]
    pub gamma_p: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EditArgs {
    #[arg(long)]
    pub scene: PathBuf,
    #[arg(long, value_parser = parse_edit_kind)]
    pub op: EditKind,
    #[arg(long)]
    pub object: u8,
    /// Target color as `r,g,b` in [0, 1]; recolor only.
    #[arg(long, value_parser = parse_color)]
    pub color: Option<[f64; 3]>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    #[arg(long)]
    pub scene: PathBuf,
    #[arg(long)]
    pub cameras: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// `label` writes raw object-id masks; `rgb` and `heat` write color images.
    #[arg(long, value_enum, default_value_t = RenderKind::Label)]
    pub mode: RenderKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RenderKind {
    Rgb,
    Label,
    Heat,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long)]
    pub gt: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = EvalKind::Seg)]
    pub kind: EvalKind,
    /// Also average labels that appear only in the prediction.
    #[arg(long)]
    pub all_labels: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EvalKind {
    Seg,
    Rgb,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub scene: PathBuf,
    #[arg(long)]
    pub ckpt: PathBuf,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: std::net::IpAddr,
    /// Training cameras; with `--masks`, enables reassignment.
    #[arg(long, requires = "masks")]
    pub cameras: Option<PathBuf>,
    #[arg(long, requires = "cameras")]
    pub masks: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_GAMMA_P)]
    pub gamma_p: f64,
    #[arg(long, default_value_t = DEFAULT_K)]
    pub k: usize,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub per_cluster: usize,
    #[arg(long, default_value_t = 8)]
    pub views: usize,
    #[arg(long, default_value_t = 48)]
    pub size: u32,
}

fn parse_edit_kind(s: &str) -> std::result::Result<EditKind, String> {
    s.parse().map_err(|e: splatseg_core::Error| e.to_string())
}

fn parse_connectivity(s: &str) -> std::result::Result<Connectivity, String> {
    let n: u8 = s.parse().map_err(|e| format!("{e}"))?;
    Connectivity::try_from(n).map_err(|e| e.to_string())
}

fn parse_color(s: &str) -> std::result::Result<[f64; 3], String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    let rgb: [f64; 3] = parts
        .try_into()
        .map_err(|v: Vec<f64>| format!("expected 3 components, got {}", v.len()))?;
    if rgb.iter().any(|c| !(0.0..=1.0).contains(c)) {
        return Err(format!("components of {s} must lie in [0, 1]"));
    }
    Ok(rgb)
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Preprocess(a) => preprocess(&a),
        Command::Train(a) => train_cmd(&a),
        Command::Reassign(a) => reassign(&a),
        Command::Edit(a) => edit(&a),
        Command::Render(a) => render_cmd(&a),
        Command::Eval(a) => eval(&a),
        Command::Serve(a) => serve(&a),
        Command::Synth(a) => synth(&a),
    }
}

/// PNG files directly inside `dir`, sorted by name.
fn png_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).with_context(|| format!("reading {}", dir.display()))? {
        let path = entry?.path();
        let is_png = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("png"));
        if is_png && path.is_file() {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

fn preprocess(a: &PreprocessArgs) -> Result<()> {
    let cfg = CleanConfig {
        kernel_size: a.kernel,
        area_threshold: a.area_threshold,
        connectivity: a.connectivity,
    };
    cfg.validate()?;
    let files = png_files(&a.masks)?;
    if files.is_empty() {
        bail!("no PNG masks in {}", a.masks.display());
    }
    create_dir(&a.out)?;
    for path in &files {
        let map = load_mask(path)?;
        save_mask(&mask::preprocess(&map, &cfg), a.out.join(file_name(path)))?;
    }
    println!("cleaned {} masks into {}", files.len(), a.out.display());
    Ok(())
}

fn train_cmd(a: &TrainArgs) -> Result<()> {
    let scene = load_scene(&a.scene)?;
    let cameras = load_cameras(&a.cameras)?;
    let masks = load_mask_dir(&a.masks, &cameras)?;
    let config = TrainConfig {
        lr_features: a.lr_feat,
        lr_linear: a.lr_linear,
        iterations: a.iters,
        seed: a.seed,
        ..TrainConfig::default()
    };
    config.validate()?;
    let out = train(&scene, LinearClassifier::seeded(a.seed), &cameras, &masks, config)?;
    save_scene(&out.scene, &a.out)?;
    save_checkpoint(
        &Checkpoint {
            classifier: out.classifier,
            config,
        },
        &a.ckpt,
    )?;
    let tail = &out.loss_history[out.loss_history.len().saturating_sub(100)..];
    let mean = tail.iter().sum::<f64>() / tail.len().max(1) as f64;
    println!(
        "trained {} Gaussians over {} views for {} iterations; final loss {mean:.4}",
        scene.len(),
        cameras.len(),
        a.iters
    );
    Ok(())
}

fn reassign(a: &ReassignArgs) -> Result<()> {
    let scene = load_scene(&a.scene)?;
    let ckpt = load_checkpoint(&a.ckpt)?;
    let cameras = load_cameras(&a.cameras)?;
    let masks = load_mask_dir(&a.masks, &cameras)?;
    let config = SessionConfig {
        gamma_p: a.gamma_p,
        ..SessionConfig::default()
    };
    let mut session = Session::new(scene, ckpt.classifier, config).with_views(cameras, masks)?;
    session.reassign(a.gamma_p)?;
    write_bytes(&a.out, &session.export())?;
    print_objects(&session);
    Ok(())
}

fn edit(a: &EditArgs) -> Result<()> {
    let op = EditOp {
        kind: a.op,
        target: a.object,
        color: a.color,
    };
    let scene = load_scene(&a.scene)?;
    let mut session = Session::new(scene, LinearClassifier::zeros(), SessionConfig::default());
    session.edit(op)?;
    write_bytes(&a.out, &session.export())?;
    print_objects(&session);
    Ok(())
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn print_objects(session: &Session) {
    let info = session.info();
    let objects: Vec<String> = info
        .objects
        .iter()
        .map(|(label, n)| format!("{label}:{n}"))
        .collect();
    println!("{} Gaussians; objects {}", info.gaussians, objects.join(" "));
}

fn render_cmd(a: &RenderArgs) -> Result<()> {
    let scene = load_scene(&a.scene)?;
    let cameras = load_cameras(&a.cameras)?;
    create_dir(&a.out)?;
    for cam in &cameras {
        let path = a.out.join(format!("{}.png", cam.id));
        match a.mode {
            RenderKind::Label => {
                let labels = render(&scene, cam, Channels::LABEL)
                    .labels
                    .context("label channel missing")?;
                save_mask(&labels, &path)?;
            }
            RenderKind::Rgb => write_bytes(&path, &render_frame(&scene, cam, RenderMode::Rgb).to_png())?,
            RenderKind::Heat => write_bytes(&path, &render_frame(&scene, cam, RenderMode::Heat).to_png())?,
        }
    }
    println!("rendered {} views into {}", cameras.len(), a.out.display());
    Ok(())
}

#[derive(Debug, Serialize)]
struct SegEval {
    images: usize,
    overall: SegReport,
    per_image: BTreeMap<String, SegReport>,
}

#[derive(Debug, Serialize)]
struct RgbEval {
    overall: ImageReport,
    per_image: BTreeMap<String, ImageReport>,
}

/// Ground-truth files paired with the prediction of the same name.
fn paired_files(a: &EvalArgs) -> Result<Vec<(String, PathBuf, PathBuf)>> {
    let gt = png_files(&a.gt)?;
    if gt.is_empty() {
        bail!("no PNG files in {}", a.gt.display());
    }
    gt.into_iter()
        .map(|g| {
            let name = file_name(&g);
            let p = a.pred.join(&name);
            if !p.is_file() {
                bail!("missing prediction {}", p.display());
            }
            Ok((name, p, g))
        })
        .collect()
}

fn eval(a: &EvalArgs) -> Result<()> {
    let pairs = paired_files(a)?;
    match a.kind {
        EvalKind::Seg => {
            let mut total = SegCounts::default();
            let mut per_image = BTreeMap::new();
            for (name, p, g) in &pairs {
                let (pred, gt) = (load_mask(p)?, load_mask(g)?);
                let mut counts = SegCounts::default();
                counts
                    .add(&pred, &gt)
                    .with_context(|| format!("comparing {name}"))?;
                total.add(&pred, &gt)?;
                per_image.insert(name.clone(), counts.report(!a.all_labels));
            }
            let report = SegEval {
                images: pairs.len(),
                overall: total.report(!a.all_labels),
                per_image,
            };
            write_json(&a.out, &report)?;
            println!(
                "mIoU {:.4} mAcc {:.4} over {} images",
                report.overall.miou, report.overall.macc, report.images
            );
        }
        EvalKind::Rgb => {
            let mut images = Vec::with_capacity(pairs.len());
            let mut per_image = BTreeMap::new();
            for (name, p, g) in &pairs {
                let pair = (Image::load(p)?, Image::load(g)?);
                let one =
                    image_report(std::slice::from_ref(&pair)).with_context(|| format!("comparing {name}"))?;
                per_image.insert(name.clone(), one);
                images.push(pair);
            }
            let report = RgbEval {
                overall: image_report(&images)?,
                per_image,
            };
            write_json(&a.out, &report)?;
            println!(
                "PSNR {:.3} dB SSIM {:.4} over {} images",
                report.overall.psnr, report.overall.ssim, report.overall.images
            );
        }
    }
    Ok(())
}

fn serve(a: &ServeArgs) -> Result<()> {
    let scene = load_scene(&a.scene)?;
    let ckpt = load_checkpoint(&a.ckpt)?;
    let config = SessionConfig {
        gamma_p: a.gamma_p,
        k: a.k,
    };
    let mut session = Session::new(scene, ckpt.classifier, config);
    session.set_k(a.k)?;
    if let (Some(cams), Some(masks)) = (&a.cameras, &a.masks) {
        let cameras = load_cameras(cams)?;
        let masks = load_mask_dir(masks, &cameras)?;
        session = session.with_views(cameras, masks)?;
    }
    let addr = SocketAddr::new(a.host, a.port);
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .with_context(|| format!("binding {addr}"))?;
        println!("serving on http://{}", listener.local_addr()?);
        axum::serve(listener, crate::service::router(session))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await?;
        Ok(())
    })
}

fn synth(a: &SynthArgs) -> Result<()> {
    let cfg = SyntheticConfig {
        seed: a.seed,
        per_cluster: a.per_cluster,
        views: a.views,
        image_size: a.size,
        ..SyntheticConfig::default()
    };
    let syn = SyntheticScene::generate(&cfg);
    create_dir(&a.out)?;
    save_scene(&syn.unlabeled_scene(), a.out.join("scene.ply"))?;
    save_scene(&syn.scene, a.out.join("gt_scene.ply"))?;
    save_cameras(&syn.cameras, a.out.join("cameras.json"))?;
    save_cameras(std::slice::from_ref(&syn.holdout), a.out.join("holdout.json"))?;
    for (dir, cams) in [
        ("masks", syn.cameras.as_slice()),
        ("holdout_masks", std::slice::from_ref(&syn.holdout)),
    ] {
        let dir = a.out.join(dir);
        create_dir(&dir)?;
        for cam in cams {
            save_mask(&syn.label_map(cam), dir.join(format!("{}.png", cam.id)))?;
        }
    }
    println!(
        "wrote {} Gaussians and {} views into {}",
        syn.scene.len(),
        syn.cameras.len(),
        a.out.display()
    );
    Ok(())
}
