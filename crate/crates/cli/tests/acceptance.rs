//! Acceptance suite. Runs every criterion in sequence, prints one PASS/FAIL
//! line per criterion and exits non-zero if any fails.
//!
//! Criterion 10 needs the Bern-Barcelona recordings; point `GASF_EEG_BERN`
//! at a directory of `Data_N_*` / `Data_F_*` files (or `normal/` and
//! `focal/` subdirectories) to enable it.

use std::f64::consts::PI;
use std::path::PathBuf;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use gasf_eeg::encode::{gasf_matrix, rescale, ScalingMode};
use gasf_eeg::eval::{macro_average, prf, roc_curve, ClassMetrics, ConfusionCounts, UndefinedFlags};
use gasf_eeg::ingest::{DatasetManifest, Split};
use gasf_eeg::nn::{build_custom_cnn, build_dense_ann, gradient_check, LayerSpec, Network, Precision, Tensor};
use gasf_eeg::select::{pso_select, wrapper_fitness, SwarmConfig};
use gasf_eeg::synth::{write_dataset, SynthConfig};
use gasf_eeg::tfr::{self, Window};
use gasf_eeg::Class;
use gasf_eeg_cli::{run_pipeline, Pipeline, RunConfig};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_signal(r: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| r.random_range(-3.0..3.0)).collect()
}

fn gasf_oracle() -> Outcome {
    let clock = Instant::now();
    let mut r = rng(1);
    let (mut worst, mut worst_sym, mut worst_diag) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..1000 {
        let x = random_signal(&mut r, 64);
        let (lo, hi) = x.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        let s: Vec<f64> = x.iter().map(|v| ((v - hi) + (v - lo)) / (hi - lo)).collect();
        let m = gasf_matrix(&rescale(&x, ScalingMode::UnitSigned).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        for i in 0..64 {
            for j in 0..64 {
                let algebraic = s[i] * s[j] - (1.0 - s[i] * s[i]).max(0.0).sqrt() * (1.0 - s[j] * s[j]).max(0.0).sqrt();
                worst = worst.max((m.get(i, j) - algebraic).abs());
                worst_sym = worst_sym.max((m.get(i, j) - m.get(j, i)).abs());
            }
            worst_diag = worst_diag.max((m.get(i, i) - (2.0 * s[i] * s[i] - 1.0)).abs());
        }
    }
    let secs = clock.elapsed().as_secs_f64();
    check(
        worst < 1e-9 && worst_sym <= 1e-12 && worst_diag <= 1e-12 && secs < 10.0,
        format!("max |trig - algebraic| {worst:.2e}, asymmetry {worst_sym:.2e}, diagonal {worst_diag:.2e}, {secs:.2}s"),
    )
}

fn metrics(precision: f64, recall: f64, f1: f64) -> ClassMetrics {
    ClassMetrics {
        precision,
        recall,
        f1,
        support: 0,
        undefined: UndefinedFlags::default(),
    }
}

fn table_arithmetic() -> Outcome {
    let counts = ConfusionCounts { tp: 372, fp: 93, tn: 0, fn_: 28 };
    let focal = prf(&counts);
    let custom = macro_average(&[metrics(0.80, 0.93, 0.86), metrics(0.97, 0.91, 0.94)]).map_err(|e| e.to_string())?;
    let alexnet = macro_average(&[metrics(0.7314, 0.0, 0.0), metrics(0.7586, 0.0, 0.0)]).map_err(|e| e.to_string())?;
    let exact = |v: f64, printed: f64| (v - printed).abs() < 1e-9;
    check(
        (focal.precision - 0.80).abs() < 1e-12
            && (focal.recall - 0.93).abs() < 1e-12
            && (focal.f1 - 0.86).abs() <= 0.005
            && exact(custom.precision, 0.885)
            && exact(custom.recall, 0.92)
            && exact(custom.f1, 0.90)
            && (alexnet.precision - 0.745).abs() <= 0.001,
        format!(
            "focal P {:.4} R {:.4} F1 {:.4}; custom avg {:.4}/{:.4}/{:.4}; alexnet avg P {:.4}",
            focal.precision, focal.recall, focal.f1, custom.precision, custom.recall, custom.f1, alexnet.precision
        ),
    )
}

fn table_shape_chain() -> Outcome {
    let net = build_custom_cnn((224, 224, 3), 1.0, 0).map_err(|e| e.to_string())?;
    let expected: [(&str, usize, &[usize]); 8] = [
        ("conv2d", 0, &[222, 222, 32]),
        ("conv2d", 2, &[110, 110, 64]),
        ("conv2d", 4, &[54, 54, 64]),
        ("batch_norm", 6, &[54, 54, 64]),
        ("max_pool", 7, &[27, 27, 64]),
        ("flatten", 8, &[46656]),
        ("dense", 9, &[1024]),
        ("dense", 11, &[512]),
    ];
    let mut ok = net.output_shape() == [2] && matches!(net.specs().last(), Some(LayerSpec::Softmax));
    for (kind, i, shape) in expected {
        ok &= net.specs()[i].name() == kind && net.shapes()[i] == shape;
    }
    ok &= matches!(net.specs()[10], LayerSpec::Sigmoid) && matches!(net.specs()[12], LayerSpec::Sigmoid);
    ok &= matches!(net.specs()[13], LayerSpec::Dense { units: 2 });
    check(ok, format!("flatten {:?}, output {:?}", net.shapes()[8], net.output_shape()))
}

fn batch(r: &mut ChaCha8Rng, shape: Vec<usize>) -> Tensor {
    let n = shape.iter().product();
    Tensor::new(shape, (0..n).map(|_| r.random_range(-1.0..1.0)).collect()).unwrap()
}

fn gradient_checks() -> Outcome {
    let clock = Instant::now();
    let mut r = rng(4);
    let mut dense = build_dense_ann(6, &[5], 1).map_err(|e| e.to_string())?;
    dense.set_precision(Precision::F64);
    let dense_err = gradient_check(&dense, &batch(&mut r, vec![8, 6]), &[0, 1, 0, 1, 1, 0, 1, 0], 1e-5)
        .map_err(|e| e.to_string())?;
    let cnn = Network::with_precision(
        vec![
            LayerSpec::Conv2d { kernel: (3, 3), filters: 2, stride: 1 },
            LayerSpec::Relu,
            LayerSpec::batch_norm(),
            LayerSpec::MaxPool { size: 2, stride: 2 },
            LayerSpec::Flatten,
            LayerSpec::Dense { units: 3 },
            LayerSpec::Sigmoid,
            LayerSpec::Dense { units: 2 },
            LayerSpec::Softmax,
        ],
        vec![8, 8, 3],
        2,
        Precision::F64,
    )
    .map_err(|e| e.to_string())?;
    let cnn_err = gradient_check(&cnn, &batch(&mut r, vec![4, 8, 8, 3]), &[0, 1, 1, 0], 1e-5).map_err(|e| e.to_string())?;
    let secs = clock.elapsed().as_secs_f64();
    check(
        dense_err < 1e-4 && cnn_err < 1e-4 && secs < 60.0,
        format!("dense {dense_err:.2e}, cnn (all layer kinds) {cnn_err:.2e}, {secs:.2}s"),
    )
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("gasf-eeg-acceptance-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

fn synth_config(data: PathBuf, out: PathBuf) -> Result<RunConfig, String> {
    let synth = SynthConfig::default();
    write_dataset(&data, &synth).map_err(|e| e.to_string())?;
    let mut config = RunConfig::default();
    config.seed = 20240;
    config.data.root = Some(data);
    config.out_dir = out;
    config.encode.image_size = 64;
    config.encode.write_png = false;
    config.cnn.scale = 0.25;
    config.cnn.train.epochs = 30;
    Ok(config)
}

fn split_counts(path: &std::path::Path) -> Result<[usize; 4], String> {
    let m = DatasetManifest::from_json(&std::fs::read_to_string(path).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    Ok([
        m.count(Class::Normal, Split::Train),
        m.count(Class::Focal, Split::Train),
        m.count(Class::Normal, Split::Validation),
        m.count(Class::Focal, Split::Validation),
    ])
}

fn cnn_end_to_end() -> Outcome {
    let root = scratch("cnn");
    let config = synth_config(root.join("data"), root.join("out"))?;
    let clock = Instant::now();
    let report = run_pipeline(&config, Pipeline::GasfCnn).map_err(|e| e.to_string())?;
    let secs = clock.elapsed().as_secs_f64();
    let counts = split_counts(&report.manifest.artifacts["dataset_manifest"])?;
    let m = report.metrics.ok_or("no metrics")?;
    let _ = std::fs::remove_dir_all(&root);
    check(
        counts == [200, 200, 50, 50] && m.average.f1 >= 0.90 && m.auc >= 0.95 && secs < 600.0,
        format!("split {counts:?}, val F1 {:.4}, AUC {:.4}, {secs:.1}s", m.average.f1, m.auc),
    )
}

/// Column `planted` carries the label exactly; the others are uniform noise.
fn planted(seed: u64, planted: usize) -> (Vec<Vec<f64>>, Vec<Class>) {
    let mut r = rng(seed);
    let labels: Vec<Class> = (0..80).map(|i| if i % 2 == 0 { Class::Normal } else { Class::Focal }).collect();
    let rows = labels
        .iter()
        .map(|c| (0..10).map(|j| if j == planted { c.index() as f64 } else { r.random::<f64>() }).collect())
        .collect();
    (rows, labels)
}

fn feature_path() -> Outcome {
    let root = scratch("ann");
    let config = synth_config(root.join("data"), root.join("out"))?;
    let report = run_pipeline(&config, Pipeline::FeatureAnn).map_err(|e| e.to_string())?;
    let m = report.metrics.ok_or("no metrics")?;
    let _ = std::fs::remove_dir_all(&root);

    let mut recovered = 0;
    let mut optimal = 0;
    for seed in 0..10u64 {
        let target = (seed as usize * 3) % 10;
        let (x, y) = planted(100 + seed, target);
        let swarm = SwarmConfig { seed, ..SwarmConfig::default() };
        let found = pso_select(&x, &y, &swarm).map_err(|e| e.to_string())?;
        recovered += found.mask.bits[target] as usize;
        let mut single = vec![false; 10];
        single[target] = true;
        let single_fitness = wrapper_fitness(&single, &x, &y, swarm.folds, swarm.seed).map_err(|e| e.to_string())?;
        let mut best = f64::NEG_INFINITY;
        for code in 1u32..1024 {
            let mask: Vec<bool> = (0..10).map(|b| code >> b & 1 == 1).collect();
            best = best.max(wrapper_fitness(&mask, &x, &y, swarm.folds, swarm.seed).map_err(|e| e.to_string())?);
        }
        optimal += (single_fitness >= best) as usize;
    }
    check(
        m.average.f1 >= 0.85 && recovered >= 9 && optimal == 10,
        format!("val F1 {:.4}, planted feature recovered {recovered}/10, singleton optimal {optimal}/10", m.average.f1),
    )
}

fn dft_frame(values: &[f64]) -> Vec<Complex64> {
    let n = values.len();
    (0..n)
        .map(|k| {
            values
                .iter()
                .enumerate()
                .map(|(t, &v)| v * Complex64::from_polar(1.0, -2.0 * PI * (k * t) as f64 / n as f64))
                .sum::<Complex64>()
                / n as f64
        })
        .collect()
}

fn hann(len: usize) -> Vec<f64> {
    (0..len).map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / (len - 1) as f64).cos()).collect()
}

fn gaussian(len: usize) -> (Vec<f64>, Vec<f64>) {
    let c = (len as f64 - 1.0) / 2.0;
    let sigma = len as f64 / 8.0;
    let g: Vec<f64> = (0..len).map(|i| (-0.5 * ((i as f64 - c) / sigma).powi(2)).exp()).collect();
    let dg = g.iter().enumerate().map(|(i, &v)| -(i as f64 - c) / (sigma * sigma) * v).collect();
    (g, dg)
}

fn stft_oracle(x: &[f64], w: &[f64], hop: usize) -> Vec<Vec<Complex64>> {
    let frames = (x.len() - w.len()) / hop + 1;
    (0..frames)
        .map(|f| dft_frame(&w.iter().enumerate().map(|(t, &c)| c * x[f * hop + t]).collect::<Vec<_>>()))
        .collect()
}

fn stockwell_oracle(x: &[f64]) -> Vec<Vec<Complex64>> {
    let n = x.len();
    let nf = n as f64;
    let mean = x.iter().sum::<f64>() / nf;
    (0..=n / 2)
        .map(|k| {
            (0..n)
                .map(|tau| {
                    if k == 0 {
                        return Complex64::new(mean, 0.0);
                    }
                    let kf = k as f64;
                    (0..n)
                        .map(|t| {
                            let u = t as f64 - tau as f64;
                            let g: f64 = (-12..=12)
                                .map(|p| {
                                    let d = u + p as f64 * nf;
                                    kf / (nf * (2.0 * PI).sqrt()) * (-kf * kf * d * d / (2.0 * nf * nf)).exp()
                                })
                                .sum();
                            x[t] * g * Complex64::from_polar(1.0, -2.0 * PI * kf * t as f64 / nf)
                        })
                        .sum()
                })
                .collect()
        })
        .collect()
}

fn analytic_oracle(x: &[f64]) -> Vec<Complex64> {
    let n = x.len();
    let spectrum: Vec<Complex64> = dft_frame(x).into_iter().map(|v| v * n as f64).collect();
    let weighted: Vec<Complex64> = spectrum
        .iter()
        .enumerate()
        .map(|(m, &v)| {
            let h = if m == 0 || m == n / 2 { 1.0 } else if m < n / 2 { 2.0 } else { 0.0 };
            v * h
        })
        .collect();
    (0..n)
        .map(|t| {
            weighted
                .iter()
                .enumerate()
                .map(|(m, &v)| v * Complex64::from_polar(1.0, 2.0 * PI * (m * t) as f64 / n as f64))
                .sum::<Complex64>()
                / n as f64
        })
        .collect()
}

fn wvd_oracle(x: &[f64], w: &[f64]) -> Vec<Vec<Complex64>> {
    let n = x.len() as isize;
    let z = analytic_oracle(x);
    let half = (w.len() / 2) as isize;
    let bins = w.len().next_power_of_two();
    (0..bins)
        .map(|k| {
            (0..n)
                .map(|t| {
                    let reach = half.min(t).min(n - 1 - t);
                    (-reach..=reach)
                        .map(|m| {
                            z[(t + m) as usize]
                                * z[(t - m) as usize].conj()
                                * w[(m + half) as usize]
                                * Complex64::from_polar(1.0, -2.0 * PI * (k as isize * m) as f64 / bins as f64)
                        })
                        .sum()
                })
                .collect()
        })
        .collect()
}

fn set_oracle(x: &[f64], len: usize, hop: usize, delta: f64) -> Vec<Vec<Complex64>> {
    let (g, dg) = gaussian(len);
    let xg = stft_oracle(x, &g, hop);
    let xdg = stft_oracle(x, &dg, hop);
    let peak = xg
        .iter()
        .flat_map(|f| f[..=len / 2].iter())
        .map(|v| v.norm())
        .fold(0.0, f64::max);
    xg.iter()
        .zip(&xdg)
        .map(|(fg, fdg)| {
            (0..=len / 2)
                .map(|k| {
                    let a = fg[k];
                    if a.norm() == 0.0 || a.norm() <= 1e-10 * peak {
                        return Complex64::default();
                    }
                    let inst = k as f64 - len as f64 / (2.0 * PI) * (fdg[k] / a).im;
                    if (inst - k as f64).abs() < delta {
                        a
                    } else {
                        Complex64::default()
                    }
                })
                .collect()
        })
        .collect()
}

fn transform_oracles() -> Outcome {
    let mut r = rng(7);
    let (mut e_stft, mut e_st, mut e_wvd, mut e_set, mut residue) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut energy_ok = true;
    for _ in 0..20 {
        let x = random_signal(&mut r, 32);
        let s = tfr::stft(&x, Window::Hann, 8, 4).map_err(|e| e.to_string())?;
        let got = s.complex_values().unwrap();
        for (f, frame) in stft_oracle(&x, &hann(8), 4).iter().enumerate() {
            for k in 0..s.rows {
                e_stft = e_stft.max((got[k * s.cols + f] - frame[k]).norm());
            }
        }
        let s = tfr::stockwell(&x).map_err(|e| e.to_string())?;
        let got = s.complex_values().unwrap();
        for (k, row) in stockwell_oracle(&x).iter().enumerate() {
            for (t, v) in row.iter().enumerate() {
                e_st = e_st.max((got[k * s.cols + t] - v).norm());
            }
        }
        let w = hann(15);
        let raw = tfr::wigner_ville_complex(&x, Window::Hann, 15).map_err(|e| e.to_string())?;
        for (k, row) in wvd_oracle(&x, &w).iter().enumerate() {
            for (t, v) in row.iter().enumerate() {
                e_wvd = e_wvd.max((raw[k * 32 + t] - v).norm());
                residue = residue.max(raw[k * 32 + t].im.abs());
            }
        }
        let s = tfr::synchro_extract(&x, 16, 4, 1.0).map_err(|e| e.to_string())?;
        let got = s.complex_values().unwrap();
        for (f, frame) in set_oracle(&x, 16, 4, 1.0).iter().enumerate() {
            for (k, v) in frame.iter().enumerate() {
                e_set = e_set.max((got[k * s.cols + f] - v).norm());
            }
        }
        let plain = tfr::stft(&x, Window::Gaussian, 16, 4).map_err(|e| e.to_string())?;
        energy_ok &= s.energy() <= plain.energy();
    }
    check(
        e_stft < 1e-8 && e_st < 1e-8 && e_wvd < 1e-8 && e_set < 1e-8 && energy_ok && residue < 1e-9,
        format!(
            "max error stft {e_stft:.1e}, stockwell {e_st:.1e}, wvd {e_wvd:.1e}, set {e_set:.1e}; \
             set energy <= stft: {energy_ok}; wvd imaginary residue {residue:.1e}"
        ),
    )
}

fn metric_oracles() -> Outcome {
    let mut r = rng(8);
    let (mut worst, mut worst_mono) = (0.0f64, 0.0f64);
    for _ in 0..500 {
        let n = r.random_range(2..60);
        let mut labels: Vec<Class> = (0..n).map(|_| if r.random::<bool>() { Class::Focal } else { Class::Normal }).collect();
        labels[0] = Class::Focal;
        labels[1] = Class::Normal;
        let scores: Vec<f64> = (0..n).map(|_| (r.random_range(0..8) as f64) / 7.0).collect();
        let auc = roc_curve(&scores, &labels, Class::Focal).map_err(|e| e.to_string())?.auc;
        let (mut num, mut pairs) = (0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                if labels[i] == Class::Focal && labels[j] == Class::Normal {
                    pairs += 1.0;
                    num += if scores[i] > scores[j] { 1.0 } else if scores[i] == scores[j] { 0.5 } else { 0.0 };
                }
            }
        }
        worst = worst.max((auc - num / pairs).abs());
        let warped: Vec<f64> = scores.iter().map(|s| (3.0 * s).exp() - 7.0).collect();
        let auc2 = roc_curve(&warped, &labels, Class::Focal).map_err(|e| e.to_string())?.auc;
        worst_mono = worst_mono.max((auc - auc2).abs());
    }
    check(
        worst <= 1e-12 && worst_mono <= 1e-12,
        format!("max |trapezoid - pair count| {worst:.1e}, monotone transform drift {worst_mono:.1e}"),
    )
}

fn determinism() -> Outcome {
    let root = scratch("det");
    let data = root.join("data");
    write_dataset(&data, &SynthConfig { records_per_class: 4, record_len: 1024, ..SynthConfig::default() })
        .map_err(|e| e.to_string())?;
    let mut identical = Vec::new();
    for pipeline in [Pipeline::GasfCnn, Pipeline::FeatureAnn] {
        let mut outputs = Vec::new();
        for run in 0..2 {
            let mut config = RunConfig::default();
            config.seed = 5;
            config.threads = 1;
            config.data.root = Some(data.clone());
            config.out_dir = root.join(format!("{pipeline:?}-{run}"));
            config.encode.image_size = 32;
            config.cnn.train.epochs = 4;
            config.cnn.train.monitor_epochs = 4;
            config.ann.train.epochs = 30;
            config.swarm.iterations = 5;
            config.swarm.folds = 3;
            let report = run_pipeline(&config, pipeline).map_err(|e| e.to_string())?;
            let read = |name: &str| std::fs::read(&report.manifest.artifacts[name]).map_err(|e| e.to_string());
            outputs.push((read("checkpoint")?, read("metrics_json")?));
        }
        identical.push(outputs[0] == outputs[1]);
    }
    let _ = std::fs::remove_dir_all(&root);
    check(
        identical.iter().all(|&b| b),
        format!("gasf-cnn identical: {}, feature-ann identical: {}", identical[0], identical[1]),
    )
}

enum Gated {
    Ran(Outcome),
    Skipped(String),
}

fn bern_counts() -> Gated {
    let Some(root) = std::env::var_os("GASF_EEG_BERN").map(PathBuf::from).filter(|p| p.is_dir()) else {
        return Gated::Skipped("GASF_EEG_BERN not set; recordings absent".into());
    };
    let out = scratch("bern");
    let mut config = RunConfig::default();
    config.data.root = Some(root);
    config.data.max_epochs_per_class = Some(390);
    config.out_dir = out.clone();
    let run = || -> Outcome {
        let report = run_pipeline(&config, Pipeline::EncodeOnly).map_err(|e| e.to_string())?;
        let counts = split_counts(&report.manifest.artifacts["dataset_manifest"])?;
        let images = std::fs::read_dir(&report.manifest.artifacts["images"]).map_err(|e| e.to_string())?.count();
        check(
            counts == [312, 312, 78, 78] && images == 780,
            format!("split {counts:?}, {images} images"),
        )
    };
    let outcome = run();
    let _ = std::fs::remove_dir_all(&out);
    Gated::Ran(outcome)
}

fn main() {
    if std::env::args().any(|a| a == "--list") {
        for i in 1..=10 {
            println!("criterion_{i}: test");
        }
        return;
    }
    let criteria: Vec<(&str, fn() -> Outcome)> = vec![
        ("GASF trig/algebraic oracle", gasf_oracle),
        ("table arithmetic", table_arithmetic),
        ("full-size CNN shape chain", table_shape_chain),
        ("gradient checks", gradient_checks),
        ("GASF -> CNN on synthetic data", cnn_end_to_end),
        ("texture features -> PSO -> ANN", feature_path),
        ("transform oracles", transform_oracles),
        ("metric oracles", metric_oracles),
        ("single-threaded determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.into_iter().enumerate() {
        let clock = Instant::now();
        let outcome = f();
        let secs = clock.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{secs:.1}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail} [{secs:.1}s]", i + 1);
            }
        }
    }
    match bern_counts() {
        Gated::Ran(Ok(detail)) => println!("criterion 10 PASS  dataset-gated ingest counts: {detail}"),
        Gated::Ran(Err(detail)) => {
            failed += 1;
            println!("criterion 10 FAIL  dataset-gated ingest counts: {detail}");
        }
        Gated::Skipped(why) => println!("criterion 10 SKIP  dataset-gated ingest counts: {why}"),
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
