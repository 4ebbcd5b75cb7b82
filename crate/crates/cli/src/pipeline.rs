use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use gasf_eeg::encode::{augment_image, render_rgb, resize_image, AugmentParams, GafMatrix, RasterImage};
use gasf_eeg::eval::{roc_curve, MetricsReport};
use gasf_eeg::ingest::{build_manifest, read_record_with_rate, split_epochs, DatasetManifest, Epoch};
use gasf_eeg::nn::{
    build_custom_cnn, build_dense_ann, evaluate, train_with_augmentation, Augmenter, Checkpoint, Dataset,
};
use gasf_eeg::select::{pso_select, SelectionReport};
use gasf_eeg::texture::{
    assemble_feature_vector, read_feature_csv, write_feature_csv, FeatureVector, FEATURE_COUNT, FEATURE_NAMES,
};
use gasf_eeg::tfr::{spectrum_to_image, TransformKind};
use gasf_eeg::{Class, Error};

use crate::manifest::{sha256_file, InputDigest, RunManifest, Seeds, StageTiming};
use crate::{CliError, RunConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Pipeline {
    /// ingest → GASF images → CNN → metrics
    GasfCnn,
    /// ingest → spectra → texture features → swarm selection → ANN → metrics
    FeatureAnn,
    /// ingest → GASF PNGs
    EncodeOnly,
    /// ingest → feature CSVs
    FeaturesOnly,
    /// ingest → inputs for a stored checkpoint → metrics
    EvalOnly,
    /// ingest → spectrum dumps and images
    Spectra,
}

/// What a finished run produced.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub manifest: RunManifest,
    pub manifest_path: PathBuf,
    pub metrics: Option<MetricsReport>,
}

struct Run<'a> {
    config: &'a RunConfig,
    seeds: Seeds,
    out: PathBuf,
    stages: Vec<StageTiming>,
    artifacts: BTreeMap<String, PathBuf>,
    inputs: Vec<InputDigest>,
}

impl<'a> Run<'a> {
    fn stage<T>(&mut self, name: &'static str, f: impl FnOnce(&mut Self) -> Result<T, Error>) -> Result<T, CliError> {
        let started_unix_ms = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_millis())
            .unwrap_or(0);
        let clock = Instant::now();
        let out = f(self).map_err(|source| CliError::Stage { stage: name, source })?;
        self.stages.push(StageTiming {
            name: name.to_string(),
            started_unix_ms,
            seconds: clock.elapsed().as_secs_f64(),
        });
        Ok(out)
    }

    fn artifact(&mut self, name: impl Into<String>, path: &Path) {
        self.artifacts.insert(name.into(), path.to_path_buf());
    }

    fn write(&mut self, name: &str, file: &str, contents: impl AsRef<[u8]>) -> Result<PathBuf, Error> {
        let path = self.out.join(file);
        std::fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
        self.artifact(name, &path);
        Ok(path)
    }
}

fn io_dir(path: &Path) -> Result<(), Error> {
    std::fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

/// Recording files of each class, sorted by name.
pub fn discover_records(root: &Path) -> Result<Vec<(Class, PathBuf)>, Error> {
    let list = |dir: &Path| -> Result<Vec<PathBuf>, Error> {
        let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
            .map_err(|e| Error::io(dir, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file())
            .collect();
        files.sort();
        Ok(files)
    };
    let mut out = Vec::new();
    if root.join("normal").is_dir() && root.join("focal").is_dir() {
        for class in Class::ALL {
            out.extend(list(&root.join(class.name()))?.into_iter().map(|p| (class, p)));
        }
    } else {
        let files = list(root)?;
        for (class, prefix) in [(Class::Normal, "Data_N_"), (Class::Focal, "Data_F_")] {
            out.extend(
                files
                    .iter()
                    .filter(|p| p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.starts_with(prefix)))
                    .map(|p| (class, p.clone())),
            );
        }
    }
    Ok(out)
}

struct Corpus {
    epochs: Vec<Epoch>,
    manifest: DatasetManifest,
}

impl Corpus {
    fn split(&self) -> Result<(Vec<&Epoch>, Vec<&Epoch>), Error> {
        self.manifest.partition(&self.epochs)
    }
}

fn ingest(run: &mut Run) -> Result<Corpus, CliError> {
    let root = run.config.data.resolved_root();
    if !root.is_dir() {
        return Err(CliError::config(
            "data.root",
            format!("{} is not a directory", root.display()),
        ));
    }
    run.stage("ingest", |run| {
        let d = &run.config.data;
        let records = discover_records(&root)?;
        let mut per_class: [Vec<Epoch>; 2] = [Vec::new(), Vec::new()];
        for (class, path) in &records {
            let signal = read_record_with_rate(path, d.delimiter, d.channel, d.sampling_rate_hz)?;
            per_class[class.index()].extend(split_epochs(&signal, d.epoch_len, *class)?);
            run.inputs.push(InputDigest {
                path: path.clone(),
                class: *class,
                sha256: sha256_file(path)?,
            });
        }
        if let Some(cap) = d.max_epochs_per_class {
            per_class.iter_mut().for_each(|v| v.truncate(cap));
        }
        let [normal, focal] = per_class;
        let manifest = build_manifest(&normal, &focal, d.split_fraction, run.seeds.split)?;
        run.write("dataset_manifest", "manifest.json", manifest.to_json()?)?;
        let epochs = normal.into_iter().chain(focal).collect();
        Ok(Corpus { epochs, manifest })
    })
}

/// Pseudocolor GASF image of one epoch at full resolution.
pub fn gasf_image(epoch: &[f64], config: &RunConfig) -> Result<RasterImage, Error> {
    let m = GafMatrix::from_samples(epoch, config.encode.scaling)?;
    render_rgb(&m, &config.encode.colormap)
}

/// Network input for one epoch: the GASF image resized to `image_size` and
/// scaled to `[0, 1]`.
pub fn cnn_input(epoch: &[f64], config: &RunConfig) -> Result<Vec<f64>, Error> {
    let s = config.encode.image_size;
    Ok(resize_image(&gasf_image(epoch, config)?, s, s)?.to_unit_f64())
}

fn encode_pngs(run: &mut Run, epochs: &[Epoch]) -> Result<(), CliError> {
    run.stage("encode", |run| {
        let dir = run.out.join("images");
        io_dir(&dir)?;
        let config = run.config;
        epochs.par_iter().try_for_each(|e| {
            gasf_image(&e.samples, config)?.save_png(dir.join(format!("{}.png", e.artifact_stem())))
        })?;
        run.artifact("images", &dir);
        Ok(())
    })
}

fn image_dataset(epochs: &[&Epoch], config: &RunConfig) -> Result<Dataset, Error> {
    let inputs: Vec<Vec<f64>> = epochs
        .par_iter()
        .map(|e| cnn_input(&e.samples, config))
        .collect::<Result<_, _>>()?;
    let s = config.encode.image_size;
    Dataset::new(
        vec![s, s, 3],
        inputs.concat(),
        epochs.iter().map(|e| e.label.index()).collect(),
    )
}

fn labels_of(data: &Dataset) -> Vec<Class> {
    data.labels.iter().map(|&l| Class::from_index(l).expect("binary labels")).collect()
}

fn write_metrics(run: &mut Run, scores: &[f64], labels: &[Class]) -> Result<MetricsReport, Error> {
    let report = MetricsReport::from_scores(scores, labels)?;
    run.write("metrics_json", "metrics.json", serde_json::to_string_pretty(&report)?)?;
    run.write("metrics_csv", "metrics.csv", report.to_csv())?;
    run.write("roc_csv", "roc.csv", roc_curve(scores, labels, Class::Focal)?.to_csv())?;
    Ok(report)
}

fn save_checkpoint(run: &mut Run, ckpt: &Checkpoint) -> Result<(), Error> {
    let path = run.out.join("checkpoint.bin");
    ckpt.save(&path)?;
    run.artifact("checkpoint", &path);
    Ok(())
}

fn gasf_cnn(run: &mut Run, corpus: &Corpus) -> Result<MetricsReport, CliError> {
    if run.config.encode.write_png {
        encode_pngs(run, &corpus.epochs)?;
    }
    let (train_set, val_set) = run.stage("prepare", |run| {
        let (train, val) = corpus.split()?;
        Ok((image_dataset(&train, run.config)?, image_dataset(&val, run.config)?))
    })?;
    let ckpt = run.stage("train", |run| {
        let config = run.config;
        let s = config.encode.image_size;
        let net = build_custom_cnn((s, s, 3), config.cnn.scale, run.seeds.cnn_init)?;
        let mut train_config = config.cnn.train.clone();
        train_config.seed = run.seeds.cnn_train;
        let ranges = config.cnn.augment;
        let augment: Augmenter = &move |sample, rng| {
            let params = AugmentParams {
                rotation_deg: rng.random_range(-ranges.rotation_deg..=ranges.rotation_deg),
                shift_px: (
                    rng.random_range(-ranges.shift_px..=ranges.shift_px),
                    rng.random_range(-ranges.shift_px..=ranges.shift_px),
                ),
                shear: rng.random_range(-ranges.shear..=ranges.shear),
            };
            if let Ok(img) = RasterImage::from_unit_f64(s, s, 3, sample) {
                if let Ok(out) = augment_image(&img, &params) {
                    sample.copy_from_slice(&out.to_unit_f64());
                }
            }
        };
        let mut ckpt = train_with_augmentation(net, &train_set, &val_set, &train_config, Some(augment))?;
        ckpt.metadata = serde_json::json!({
            "pipeline": "gasf-cnn",
            "image_size": s,
            "colormap": config.encode.colormap,
            "scaling": config.encode.scaling,
        });
        save_checkpoint(run, &ckpt)?;
        run.write("history", "history.json", serde_json::to_string_pretty(&ckpt.history)?)?;
        Ok(ckpt)
    })?;
    run.stage("eval", |run| {
        let (_, _, scores) = evaluate(&ckpt.network, &val_set)?;
        write_metrics(run, &scores, &labels_of(&val_set))
    })
}

fn feature_rows(epochs: &[&Epoch], config: &RunConfig) -> Result<Vec<(FeatureVector, Class)>, Error> {
    epochs
        .par_iter()
        .map(|e| assemble_feature_vector(&e.samples, &config.features).map(|f| (f, e.label)))
        .collect()
}

fn compute_features(
    run: &mut Run,
    corpus: &Corpus,
) -> Result<(Vec<(FeatureVector, Class)>, Vec<(FeatureVector, Class)>), CliError> {
    run.stage("features", |run| {
        let (train, val) = corpus.split()?;
        let train_rows = feature_rows(&train, run.config)?;
        let val_rows = feature_rows(&val, run.config)?;
        for (name, file, rows) in [
            ("features_train", "features_train.csv", &train_rows),
            ("features_validation", "features_validation.csv", &val_rows),
        ] {
            let path = run.out.join(file);
            write_feature_csv(&path, rows)?;
            run.artifact(name, &path);
        }
        Ok((train_rows, val_rows))
    })
}

/// Column means and standard deviations (zero spread maps to 1).
fn column_stats(rows: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let n = rows.len() as f64;
    let width = rows[0].len();
    let mean: Vec<f64> = (0..width).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n).collect();
    let std = (0..width)
        .map(|j| {
            let sd = (rows.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / n).sqrt();
            if sd > 0.0 {
                sd
            } else {
                1.0
            }
        })
        .collect();
    (mean, std)
}

fn ann_dataset(rows: &[(FeatureVector, Class)], mask: &[bool], mean: &[f64], std: &[f64]) -> Result<Dataset, Error> {
    let mut inputs = Vec::new();
    for (f, _) in rows {
        let selected = f.to_array().into_iter().zip(mask).filter(|(_, &b)| b).map(|(v, _)| v);
        inputs.extend(selected.zip(mean.iter().zip(std)).map(|(v, (m, s))| (v - m) / s));
    }
    Dataset::new(vec![mean.len()], inputs, rows.iter().map(|(_, c)| c.index()).collect())
}

fn masked(rows: &[(FeatureVector, Class)], mask: &[bool]) -> Vec<Vec<f64>> {
    rows.iter()
        .map(|(f, _)| f.to_array().into_iter().zip(mask).filter(|(_, &b)| b).map(|(v, _)| v).collect())
        .collect()
}

/// Swarm selection over a feature table.
pub fn select_features(rows: &[(FeatureVector, Class)], config: &RunConfig) -> Result<SelectionReport, Error> {
    let x: Vec<Vec<f64>> = rows.iter().map(|(f, _)| f.to_array().to_vec()).collect();
    let y: Vec<Class> = rows.iter().map(|(_, c)| *c).collect();
    let mut swarm = config.swarm.clone();
    swarm.seed = Seeds::derive(config.seed).swarm;
    let mut report = pso_select(&x, &y, &swarm)?;
    report.feature_names = FEATURE_NAMES.iter().map(|s| s.to_string()).collect();
    Ok(report)
}

fn feature_ann(run: &mut Run, corpus: &Corpus) -> Result<MetricsReport, CliError> {
    let (train_rows, val_rows) = compute_features(run, corpus)?;
    let mask = run.stage("select", |run| {
        let report = select_features(&train_rows, run.config)?;
        run.write("selection", "selection.json", report.to_json()?)?;
        Ok(if run.config.ann.use_selection {
            report.mask.bits
        } else {
            vec![true; FEATURE_COUNT]
        })
    })?;
    let (ckpt, val_set) = run.stage("train", |run| {
        let (mean, std) = column_stats(&masked(&train_rows, &mask));
        let train_set = ann_dataset(&train_rows, &mask, &mean, &std)?;
        let val_set = ann_dataset(&val_rows, &mask, &mean, &std)?;
        let net = build_dense_ann(mean.len(), &run.config.ann.hidden, run.seeds.ann_init)?;
        let mut train_config = run.config.ann.train.clone();
        train_config.seed = run.seeds.ann_train;
        let mut ckpt = train_with_augmentation(net, &train_set, &val_set, &train_config, None)?;
        ckpt.metadata = serde_json::json!({
            "pipeline": "feature-ann",
            "mask": mask,
            "mean": mean,
            "std": std,
        });
        save_checkpoint(run, &ckpt)?;
        run.write("history", "history.json", serde_json::to_string_pretty(&ckpt.history)?)?;
        Ok((ckpt, val_set))
    })?;
    run.stage("eval", |run| {
        let (_, _, scores) = evaluate(&ckpt.network, &val_set)?;
        write_metrics(run, &scores, &labels_of(&val_set))
    })
}

fn metadata_vec<T: serde::de::DeserializeOwned>(ckpt: &Checkpoint, key: &str) -> Result<T, Error> {
    serde_json::from_value(ckpt.metadata.get(key).cloned().unwrap_or_default())
        .map_err(|e| Error::Checkpoint(format!("metadata `{key}`: {e}")))
}

fn eval_only(run: &mut Run, corpus: &Corpus) -> Result<MetricsReport, CliError> {
    let path = run
        .config
        .eval
        .checkpoint
        .clone()
        .ok_or_else(|| CliError::config("eval.checkpoint", "required by the eval-only pipeline"))?;
    let ckpt = run.stage("load", |_| Checkpoint::load(&path))?;
    let pipeline = ckpt.metadata.get("pipeline").and_then(|v| v.as_str()).unwrap_or("gasf-cnn").to_string();
    run.stage("eval", |run| {
        let (_, val) = corpus.split()?;
        let val_set = if pipeline == "feature-ann" {
            let rows = feature_rows(&val, run.config)?;
            let mask: Vec<bool> = metadata_vec(&ckpt, "mask")?;
            let mean: Vec<f64> = metadata_vec(&ckpt, "mean")?;
            let std: Vec<f64> = metadata_vec(&ckpt, "std")?;
            ann_dataset(&rows, &mask, &mean, &std)?
        } else {
            image_dataset(&val, run.config)?
        };
        let (_, _, scores) = evaluate(&ckpt.network, &val_set)?;
        write_metrics(run, &scores, &labels_of(&val_set))
    })
}

fn export_spectra(run: &mut Run, corpus: &Corpus) -> Result<(), CliError> {
    run.stage("spectra", |run| {
        let dir = run.out.join("spectra");
        io_dir(&dir)?;
        let settings = &run.config.features;
        corpus.epochs.par_iter().try_for_each(|e| {
            for kind in TransformKind::ALL {
                let s = settings.tfr.compute(kind, &e.samples)?;
                let stem = format!("{}_{}", e.artifact_stem(), kind.short_name());
                s.write_dump(dir.join(format!("{stem}.bin")))?;
                let img = spectrum_to_image(&s, settings.tfr.log_compress, 256)?;
                img.save_png(dir.join(format!("{stem}.png")))?;
            }
            Ok::<_, Error>(())
        })?;
        run.artifact("spectra", &dir);
        Ok(())
    })
}

/// Runs one pipeline end to end, writing artifacts and `run_manifest.json`
/// into `config.out_dir`.
pub fn run_pipeline(config: &RunConfig, pipeline: Pipeline) -> Result<RunReport, CliError> {
    config.validate()?;
    if config.threads > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.threads)
            .build()
            .map_err(|e| CliError::config("threads", e.to_string()))?;
        pool.install(|| run_inner(config, pipeline))
    } else {
        run_inner(config, pipeline)
    }
}

fn run_inner(config: &RunConfig, pipeline: Pipeline) -> Result<RunReport, CliError> {
    io_dir(&config.out_dir).map_err(|e| CliError::config("out_dir", e.to_string()))?;
    let mut run = Run {
        config,
        seeds: Seeds::derive(config.seed),
        out: config.out_dir.clone(),
        stages: Vec::new(),
        artifacts: BTreeMap::new(),
        inputs: Vec::new(),
    };
    let corpus = ingest(&mut run)?;
    let metrics = match pipeline {
        Pipeline::GasfCnn => Some(gasf_cnn(&mut run, &corpus)?),
        Pipeline::FeatureAnn => Some(feature_ann(&mut run, &corpus)?),
        Pipeline::EncodeOnly => {
            encode_pngs(&mut run, &corpus.epochs)?;
            None
        }
        Pipeline::FeaturesOnly => {
            compute_features(&mut run, &corpus)?;
            None
        }
        Pipeline::EvalOnly => Some(eval_only(&mut run, &corpus)?),
        Pipeline::Spectra => {
            export_spectra(&mut run, &corpus)?;
            None
        }
    };
    let manifest_path = run.out.join("run_manifest.json");
    run.artifacts.insert("run_manifest".into(), manifest_path.clone());
    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        pipeline,
        config: config.clone(),
        seeds: run.seeds,
        inputs: run.inputs,
        artifacts: run.artifacts,
        stages: run.stages,
    };
    std::fs::write(&manifest_path, manifest.to_json())
        .map_err(|e| CliError::Stage {
            stage: "manifest",
            source: Error::io(&manifest_path, e),
        })?;
    Ok(RunReport {
        manifest,
        manifest_path,
        metrics,
    })
}

/// Swarm selection over a feature CSV, written next to it as JSON.
pub fn select_from_csv(config: &RunConfig, csv: &Path, out: &Path) -> Result<SelectionReport, CliError> {
    config.validate()?;
    let rows = read_feature_csv(csv).map_err(|source| CliError::Stage { stage: "select", source })?;
    let report = select_features(&rows, config).map_err(|source| CliError::Stage { stage: "select", source })?;
    let json = report.to_json().map_err(|source| CliError::Stage { stage: "select", source })?;
    std::fs::write(out, json).map_err(|e| CliError::Stage {
        stage: "select",
        source: Error::io(out, e),
    })?;
    Ok(report)
}
