use gasf_eeg::encode::{render_rgb, GafMatrix, ScalingMode};
use gasf_eeg::eval::MetricsReport;
use gasf_eeg::ingest::{build_manifest, split_epochs, Epoch};
use gasf_eeg::nn::{build_custom_cnn, build_dense_ann, evaluate, train, Checkpoint, Dataset, TrainConfig};
use gasf_eeg::select::{pso_select, SwarmConfig};
use gasf_eeg::synth::{synth_dataset, SynthConfig};
use gasf_eeg::texture::{assemble_feature_vector, FeatureSettings};
use gasf_eeg::Class;

fn epochs(records: usize, len: usize) -> Vec<Epoch> {
    let config = SynthConfig {
        records_per_class: records,
        record_len: len,
        ..SynthConfig::default()
    };
    synth_dataset(&config)
        .unwrap()
        .iter()
        .flat_map(|(class, signal)| split_epochs(signal, 256, *class).unwrap())
        .collect()
}

fn split(all: &[Epoch]) -> (Vec<&Epoch>, Vec<&Epoch>) {
    let normal: Vec<Epoch> = all.iter().filter(|e| e.label == Class::Normal).cloned().collect();
    let focal: Vec<Epoch> = all.iter().filter(|e| e.label == Class::Focal).cloned().collect();
    let manifest = build_manifest(&normal, &focal, 0.8, 3).unwrap();
    manifest.partition(all).unwrap()
}

#[test]
fn features_selection_and_dense_network() {
    let all = epochs(4, 1280);
    let (train_set, val_set) = split(&all);
    let settings = FeatureSettings::default();
    let rows = |set: &[&Epoch]| -> (Vec<Vec<f64>>, Vec<Class>) {
        set.iter()
            .map(|e| (assemble_feature_vector(&e.samples, &settings).unwrap().to_array().to_vec(), e.label))
            .unzip()
    };
    let (x_train, y_train) = rows(&train_set);
    let (x_val, y_val) = rows(&val_set);

    let swarm = SwarmConfig { particles: 8, iterations: 10, folds: 3, seed: 1, ..SwarmConfig::default() };
    let report = pso_select(&x_train, &y_train, &swarm).unwrap();
    assert!(report.mask.count() >= 1);
    assert_eq!(report.trace.len(), swarm.iterations);
    assert!(report.trace.windows(2).all(|w| w[1] >= w[0]));

    let cols = report.mask.selected();
    let (mean, std): (Vec<f64>, Vec<f64>) = cols
        .iter()
        .map(|&c| {
            let v: Vec<f64> = x_train.iter().map(|r| r[c]).collect();
            let m = v.iter().sum::<f64>() / v.len() as f64;
            let s = (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64).sqrt();
            (m, if s > 0.0 { s } else { 1.0 })
        })
        .unzip();
    let dataset = |x: &[Vec<f64>], y: &[Class]| {
        let inputs = x
            .iter()
            .flat_map(|r| cols.iter().enumerate().map(|(i, &c)| (r[c] - mean[i]) / std[i]).collect::<Vec<_>>())
            .collect();
        Dataset::new(vec![cols.len()], inputs, y.iter().map(|c| c.index()).collect()).unwrap()
    };
    let (train_data, val_data) = (dataset(&x_train, &y_train), dataset(&x_val, &y_val));
    let config = TrainConfig { epochs: 80, batch_size: 8, learning_rate: 1e-2, monitor_epochs: 10, seed: 2, ..TrainConfig::default() };
    let ckpt = train(build_dense_ann(cols.len(), &[8], 4).unwrap(), &train_data, &val_data, &config).unwrap();
    let (_, accuracy, positive) = evaluate(&ckpt.network, &val_data).unwrap();
    assert!(accuracy >= 0.9, "validation accuracy {accuracy}");
    let metrics = MetricsReport::from_scores(&positive, &y_val).unwrap();
    assert!((metrics.accuracy - accuracy).abs() < 1e-12);

    let restored = Checkpoint::from_bytes(&ckpt.to_bytes().unwrap()).unwrap();
    assert_eq!(evaluate(&restored.network, &val_data).unwrap().2, positive);
}

#[test]
fn gasf_images_feed_the_cnn() {
    let all = epochs(2, 512);
    let (train_set, val_set) = split(&all);
    let size = 32;
    let to_data = |set: &[&Epoch]| {
        let mut inputs = Vec::new();
        for e in set {
            let m = GafMatrix::from_samples(&e.samples, ScalingMode::UnitSigned).unwrap();
            let img = render_rgb(&m, "jet").unwrap();
            let img = gasf_eeg::encode::resize_image(&img, size, size).unwrap();
            inputs.extend(img.to_unit_f64());
        }
        Dataset::new(vec![size, size, 3], inputs, set.iter().map(|e| e.label.index()).collect()).unwrap()
    };
    let (train_data, val_data) = (to_data(&train_set), to_data(&val_set));
    let config = TrainConfig { epochs: 3, batch_size: 4, monitor_epochs: 3, seed: 9, ..TrainConfig::default() };
    let ckpt = train(build_custom_cnn((size, size, 3), 0.25, 5).unwrap(), &train_data, &val_data, &config).unwrap();
    assert_eq!(ckpt.history.len(), 3);
    let (loss, _, positive) = evaluate(&ckpt.network, &val_data).unwrap();
    assert!(loss.is_finite());
    assert_eq!(positive.len(), val_data.len());
    assert!(positive.iter().all(|p| (0.0..=1.0).contains(p)));
}
