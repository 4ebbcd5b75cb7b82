//! Delimited EEG recordings, fixed-length epochs and train/validation manifests.

use std::collections::HashSet;
use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::util::seeded_rng;
use crate::{Class, Error, Result};

/// Default epoch length in samples.
pub const EPOCH_LEN: usize = 256;

/// One channel of a recording.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    pub samples: Vec<f64>,
    pub sampling_rate_hz: f64,
    pub source_id: String,
    pub channel_index: usize,
}

impl Signal {
    pub fn new(samples: Vec<f64>, sampling_rate_hz: f64, source_id: impl Into<String>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::DegenerateInput("signal has no samples".into()));
        }
        if !(sampling_rate_hz > 0.0 && sampling_rate_hz.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "sampling rate must be positive, got {sampling_rate_hz}"
            )));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::DegenerateInput(format!("sample {i} is not finite")));
        }
        Ok(Signal {
            samples,
            sampling_rate_hz,
            source_id: source_id.into(),
            channel_index: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// A labelled, fixed-length slice of a [`Signal`].
#[derive(Debug, Clone, PartialEq)]
pub struct Epoch {
    pub samples: Vec<f64>,
    pub label: Class,
    pub parent_id: String,
    pub start_index: usize,
}

impl Epoch {
    /// `<source_id>_<start_index>_<label>`, the stem used for every per-epoch artifact.
    pub fn artifact_stem(&self) -> String {
        format!("{}_{}_{}", self.parent_id, self.start_index, self.label)
    }

    pub fn key(&self) -> EpochKey {
        EpochKey {
            source: self.parent_id.clone(),
            start_index: self.start_index,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EpochKey {
    pub source: String,
    pub start_index: usize,
}

/// Reads column `channel_index` of a delimited text recording.
///
/// Rows must all have the same number of columns. Scientific notation is
/// accepted; `NaN`/`inf` tokens are rejected. Row and column numbers in
/// errors are 1-based.
pub fn read_record(path: impl AsRef<Path>, delimiter: char, channel_index: usize) -> Result<Signal> {
    read_record_with_rate(path, delimiter, channel_index, 1.0)
}

pub fn read_record_with_rate(
    path: impl AsRef<Path>,
    delimiter: char,
    channel_index: usize,
    sampling_rate_hz: f64,
) -> Result<Signal> {
    let path = path.as_ref();
    if !delimiter.is_ascii() {
        return Err(Error::InvalidParameter(format!(
            "delimiter must be a single ASCII character, got `{delimiter}`"
        )));
    }
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .delimiter(delimiter as u8)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(BufReader::new(file));

    let mut samples = Vec::new();
    let mut expected_columns = None;
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record?;
        let columns = record.len();
        match expected_columns {
            None => {
                if channel_index >= columns {
                    return Err(Error::ChannelOutOfRange {
                        channel: channel_index,
                        columns,
                    });
                }
                expected_columns = Some(columns);
            }
            Some(expected) if expected != columns => {
                return Err(Error::RaggedRow {
                    row,
                    expected,
                    got: columns,
                });
            }
            Some(_) => {}
        }
        for (c, token) in record.iter().enumerate() {
            let value = parse_finite(token).ok_or_else(|| Error::Parse {
                row,
                column: c + 1,
                token: token.to_string(),
            })?;
            if c == channel_index {
                samples.push(value);
            }
        }
    }
    if samples.is_empty() {
        return Err(Error::NoSamples { path: path.into() });
    }

    let source_id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    let mut signal = Signal::new(samples, sampling_rate_hz, source_id)?;
    signal.channel_index = channel_index;
    Ok(signal)
}

fn parse_finite(token: &str) -> Option<f64> {
    token.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Writes one sample per row using the shortest representation that reads
/// back bit-identically.
pub fn write_record(path: impl AsRef<Path>, samples: &[f64]) -> Result<()> {
    use std::io::Write;
    let path = path.as_ref();
    let mut out = String::with_capacity(samples.len() * 12);
    for v in samples {
        out.push_str(&format!("{v:?}\n"));
    }
    let mut file = File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
}

/// Splits a signal into `floor(len / epoch_len)` consecutive, non-overlapping
/// epochs. The trailing remainder is discarded.
pub fn split_epochs(signal: &Signal, epoch_len: usize, label: Class) -> Result<Vec<Epoch>> {
    if epoch_len < 2 {
        return Err(Error::InvalidParameter(format!(
            "epoch length must be at least 2, got {epoch_len}"
        )));
    }
    if signal.len() < epoch_len {
        return Err(Error::SignalTooShort {
            len: signal.len(),
            epoch_len,
        });
    }
    Ok(signal
        .samples
        .chunks_exact(epoch_len)
        .enumerate()
        .map(|(i, chunk)| Epoch {
            samples: chunk.to_vec(),
            label,
            parent_id: signal.source_id.clone(),
            start_index: i * epoch_len,
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Validation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub source: String,
    pub start_index: usize,
    pub label: Class,
    pub split: Split,
}

impl ManifestEntry {
    pub fn key(&self) -> EpochKey {
        EpochKey {
            source: self.source.clone(),
            start_index: self.start_index,
        }
    }
}

/// Train/validation assignment of every epoch, serialized as JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub epoch_len: usize,
    pub seed: u64,
    pub split_fraction: f64,
    pub entries: Vec<ManifestEntry>,
}

/// Stratified random split. Each class is shuffled independently with a
/// stream derived from `seed`; the first `round(split_fraction * n)` shuffled
/// epochs of the class go to training. Entries keep input order.
pub fn build_manifest(normal: &[Epoch], focal: &[Epoch], split_fraction: f64, seed: u64) -> Result<DatasetManifest> {
    if !(split_fraction > 0.0 && split_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "split fraction must lie in (0, 1), got {split_fraction}"
        )));
    }
    let mut entries = Vec::with_capacity(normal.len() + focal.len());
    let mut epoch_len = None;
    for (class, epochs) in [(Class::Normal, normal), (Class::Focal, focal)] {
        if epochs.len() < 2 {
            return Err(Error::InsufficientClass {
                class,
                count: epochs.len(),
                required: 2,
            });
        }
        let mut order: Vec<usize> = (0..epochs.len()).collect();
        order.shuffle(&mut seeded_rng(seed, class.index() as u64));
        let n_train = (split_fraction * epochs.len() as f64).round() as usize;
        let mut split = vec![Split::Validation; epochs.len()];
        for &i in &order[..n_train] {
            split[i] = Split::Train;
        }
        for (epoch, split) in epochs.iter().zip(split) {
            if *epoch_len.get_or_insert(epoch.samples.len()) != epoch.samples.len() {
                return Err(Error::InvalidParameter("epochs of differing lengths".into()));
            }
            entries.push(ManifestEntry {
                source: epoch.parent_id.clone(),
                start_index: epoch.start_index,
                label: class,
                split,
            });
        }
    }
    let mut seen = HashSet::new();
    if let Some(dup) = entries.iter().find(|e| !seen.insert(e.key())) {
        return Err(Error::InvalidParameter(format!(
            "epoch {}@{} listed twice",
            dup.source, dup.start_index
        )));
    }
    Ok(DatasetManifest {
        epoch_len: epoch_len.unwrap_or(0),
        seed,
        split_fraction,
        entries,
    })
}

impl DatasetManifest {
    pub fn count(&self, class: Class, split: Split) -> usize {
        self.entries
            .iter()
            .filter(|e| e.label == class && e.split == split)
            .count()
    }

    pub fn split_of(&self, key: &EpochKey) -> Option<Split> {
        self.entries.iter().find(|e| &e.key() == key).map(|e| e.split)
    }

    /// Resolves manifest entries against loaded epochs, preserving manifest
    /// order. Epochs not listed are ignored; listed epochs that are missing
    /// are an error.
    pub fn partition<'a>(&self, epochs: &'a [Epoch]) -> Result<(Vec<&'a Epoch>, Vec<&'a Epoch>)> {
        let index: std::collections::HashMap<EpochKey, &Epoch> =
            epochs.iter().map(|e| (e.key(), e)).collect();
        let mut train = Vec::new();
        let mut validation = Vec::new();
        for entry in &self.entries {
            let epoch = *index.get(&entry.key()).ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "manifest entry {}@{} has no matching epoch",
                    entry.source, entry.start_index
                ))
            })?;
            match entry.split {
                Split::Train => train.push(epoch),
                Split::Validation => validation.push(epoch),
            }
        }
        Ok((train, validation))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    fn signal(n: usize) -> Signal {
        Signal::new((0..n).map(|i| i as f64).collect(), 512.0, "s").unwrap()
    }

    #[test]
    fn selects_column() {
        let f = write_tmp("1.0,2.0\n3.0,4.0\n5.0,6.0");
        let s = read_record(f.path(), ',', 1).unwrap();
        assert_eq!(s.samples, vec![2.0, 4.0, 6.0]);
        assert_eq!(s.channel_index, 1);
    }

    #[test]
    fn empty_file_has_no_samples() {
        let f = write_tmp("");
        let err = read_record(f.path(), ',', 0).unwrap_err();
        assert!(err.to_string().contains("no samples"), "{err}");
    }

    #[test]
    fn parse_error_names_row_and_column() {
        let f = write_tmp("1.0,abc\n");
        match read_record(f.path(), ',', 0).unwrap_err() {
            Error::Parse { row, column, token } => {
                assert_eq!((row, column), (1, 2));
                assert_eq!(token, "abc");
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn rejects_nan_and_inf_tokens() {
        for bad in ["NaN", "inf", "-Infinity"] {
            let f = write_tmp(&format!("1.0\n{bad}\n"));
            assert!(matches!(read_record(f.path(), ',', 0), Err(Error::Parse { row: 2, .. })));
        }
    }

    #[test]
    fn accepts_scientific_notation_and_other_delimiters() {
        let f = write_tmp("1e-3;2.5E2\n-4.0e1;7\n");
        let s = read_record(f.path(), ';', 0).unwrap();
        assert_eq!(s.samples, vec![1e-3, -40.0]);
    }

    #[test]
    fn ragged_and_out_of_range() {
        let f = write_tmp("1,2\n3\n");
        assert!(matches!(
            read_record(f.path(), ',', 0),
            Err(Error::RaggedRow { row: 2, expected: 2, got: 1 })
        ));
        let f = write_tmp("1,2\n3,4\n");
        assert!(matches!(
            read_record(f.path(), ',', 2),
            Err(Error::ChannelOutOfRange { channel: 2, columns: 2 })
        ));
    }

    #[test]
    fn missing_file() {
        assert!(matches!(
            read_record("/nonexistent/record.txt", ',', 0),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn epoch_counts() {
        assert_eq!(split_epochs(&signal(10240), 256, Class::Normal).unwrap().len(), 40);
        let one = split_epochs(&signal(256), 256, Class::Focal).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].start_index, 0);
        let partial = split_epochs(&signal(511), 256, Class::Focal).unwrap();
        assert_eq!(partial.len(), 1);
        assert_eq!(partial[0].samples.last(), Some(&255.0));
        assert!(matches!(
            split_epochs(&signal(100), 256, Class::Normal),
            Err(Error::SignalTooShort { len: 100, epoch_len: 256 })
        ));
        assert!(split_epochs(&signal(100), 1, Class::Normal).is_err());
    }

    fn epochs(class: Class, n: usize) -> Vec<Epoch> {
        let s = Signal::new(vec![0.0; n * 4], 1.0, format!("{class}")).unwrap();
        split_epochs(&s, 4, class).unwrap()
    }

    #[test]
    fn bern_sized_split_counts() {
        let m = build_manifest(&epochs(Class::Normal, 390), &epochs(Class::Focal, 390), 0.8, 1).unwrap();
        assert_eq!(m.count(Class::Normal, Split::Train), 312);
        assert_eq!(m.count(Class::Focal, Split::Train), 312);
        assert_eq!(m.count(Class::Normal, Split::Validation), 78);
        assert_eq!(m.count(Class::Focal, Split::Validation), 78);
        assert_eq!(m.entries.len(), 780);
    }

    #[test]
    fn split_rounding_and_determinism() {
        let (n, f) = (epochs(Class::Normal, 10), epochs(Class::Focal, 10));
        let m = build_manifest(&n, &f, 0.7, 3).unwrap();
        assert_eq!(m.count(Class::Normal, Split::Train), 7);
        assert_eq!(m.count(Class::Focal, Split::Validation), 3);
        assert_eq!(build_manifest(&n, &f, 0.5, 9).unwrap(), build_manifest(&n, &f, 0.5, 9).unwrap());
        assert_ne!(build_manifest(&n, &f, 0.5, 9).unwrap(), build_manifest(&n, &f, 0.5, 10).unwrap());
    }

    #[test]
    fn manifest_errors() {
        let n = epochs(Class::Normal, 10);
        assert!(matches!(
            build_manifest(&n, &epochs(Class::Focal, 1), 0.5, 0),
            Err(Error::InsufficientClass { class: Class::Focal, count: 1, .. })
        ));
        assert!(build_manifest(&n, &n, 1.0, 0).is_err());
    }

    #[test]
    fn manifest_json_round_trip() {
        let m = build_manifest(&epochs(Class::Normal, 5), &epochs(Class::Focal, 6), 0.6, 11).unwrap();
        let back = DatasetManifest::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(m, back);
    }
}
