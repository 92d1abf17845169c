//! Labeled embedding datasets and their on-disk formats.
//!
//! Two formats are supported. `EMB1` is the canonical little-endian binary
//! interchange format:
//!
//! ```text
//! 0..4        magic "EMB1"
//! 4..8        u32 header length H
//! 8..8+H      UTF-8 JSON header {"n","d","dtype":"f32","meta":{..}}
//! next n*d*4  row-major f32 embeddings
//! next n      labels, 0x00 harmless / 0x01 harmful
//! ```
//!
//! CSV (`label,dim_0,...,dim_{d-1}`) exists for inspection and tiny fixtures;
//! it carries no metadata, so the caller supplies it.

use std::fmt;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const EMB1_MAGIC: &[u8; 4] = b"EMB1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassLabel {
    Harmless = 0,
    Harmful = 1,
}

impl ClassLabel {
    pub fn from_byte(b: u8) -> Option<Self> {
        match b {
            0 => Some(ClassLabel::Harmless),
            1 => Some(ClassLabel::Harmful),
            _ => None,
        }
    }

    pub fn as_byte(self) -> u8 {
        self as u8
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    /// Checkpoint before preference tuning.
    Reference,
    /// Checkpoint after preference tuning.
    Aligned,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Reference => "reference",
            Stage::Aligned => "aligned",
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Stage::Reference => Stage::Aligned,
            Stage::Aligned => Stage::Reference,
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pooling {
    LastToken,
    Mean,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub model_id: String,
    pub language: String,
    pub stage: Stage,
    pub layer: i64,
    pub pooling: Pooling,
    pub corpus_id: String,
}

impl DatasetMeta {
    pub fn validate(&self) -> Result<()> {
        let lang = self.language.as_bytes();
        if lang.len() != 2 || !lang.iter().all(u8::is_ascii_lowercase) {
            return Err(Error::Validation(format!(
                "language must be a lowercase 2-letter code, got {:?}",
                self.language
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BalanceSummary {
    pub n_harmful: usize,
    pub n_harmless: usize,
    pub balanced: bool,
}

/// An n×d matrix of prompt embeddings with one harmfulness label per row.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingDataset {
    n: usize,
    d: usize,
    /// Row-major, length n*d.
    embeddings: Vec<f32>,
    labels: Vec<ClassLabel>,
    meta: DatasetMeta,
}

impl EmbeddingDataset {
    /// Builds a dataset, enforcing every structural invariant.
    pub fn new(
        d: usize,
        embeddings: Vec<f32>,
        labels: Vec<ClassLabel>,
        meta: DatasetMeta,
    ) -> Result<Self> {
        let n = labels.len();
        if d < 2 {
            return Err(Error::Validation(format!("d must be at least 2, got {d}")));
        }
        let expected = n
            .checked_mul(d)
            .ok_or_else(|| Error::Validation("n*d overflows".into()))?;
        if embeddings.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                actual: embeddings.len(),
            });
        }
        if n < 4 {
            return Err(Error::Validation(format!("n must be at least 4, got {n}")));
        }
        if let Some(pos) = embeddings.iter().position(|v| !v.is_finite()) {
            return Err(Error::Validation(format!(
                "non-finite value at row {}, column {}",
                pos / d,
                pos % d
            )));
        }
        meta.validate()?;
        let ds = EmbeddingDataset {
            n,
            d,
            embeddings,
            labels,
            meta,
        };
        let bal = ds.balance();
        if bal.n_harmful < 2 || bal.n_harmless < 2 {
            return Err(Error::Validation(format!(
                "each class needs at least 2 members (harmful {}, harmless {})",
                bal.n_harmful, bal.n_harmless
            )));
        }
        Ok(ds)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn embeddings(&self) -> &[f32] {
        &self.embeddings
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.embeddings[i * self.d..(i + 1) * self.d]
    }

    pub fn labels(&self) -> &[ClassLabel] {
        &self.labels
    }

    pub fn meta(&self) -> &DatasetMeta {
        &self.meta
    }

    pub fn meta_mut(&mut self) -> &mut DatasetMeta {
        &mut self.meta
    }

    pub fn balance(&self) -> BalanceSummary {
        validate_balance(&self.labels)
    }

    /// Upcasts to an n×d f64 matrix, optionally scaling each row to unit L2 norm.
    pub fn to_f64_matrix(&self, normalize: bool) -> DMatrix<f64> {
        let mut m = DMatrix::from_fn(self.n, self.d, |i, j| f64::from(self.embeddings[i * self.d + j]));
        if normalize {
            for mut row in m.row_iter_mut() {
                let norm = row.norm();
                if norm > 0.0 {
                    row /= norm;
                }
            }
        }
        m
    }
}

/// Counts the members of each class.
pub fn validate_balance(labels: &[ClassLabel]) -> BalanceSummary {
    let n_harmful = labels.iter().filter(|&&l| l == ClassLabel::Harmful).count();
    let n_harmless = labels.len() - n_harmful;
    BalanceSummary {
        n_harmful,
        n_harmless,
        balanced: n_harmful == n_harmless,
    }
}

/// Which on-disk format to read. CSV carries no metadata of its own.
#[derive(Debug, Clone)]
pub enum DatasetFormat {
    Emb1,
    Csv(DatasetMeta),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileFormat {
    Emb1,
    Csv,
}

impl FileFormat {
    /// Guesses the format from a file extension; anything but `.csv` is EMB1.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => FileFormat::Csv,
            _ => FileFormat::Emb1,
        }
    }
}

pub fn load_dataset(path: &Path, format: DatasetFormat) -> Result<EmbeddingDataset> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    match format {
        DatasetFormat::Emb1 => decode_emb1(&bytes),
        DatasetFormat::Csv(meta) => decode_csv(&bytes, meta),
    }
}

pub fn save_dataset(ds: &EmbeddingDataset, path: &Path, format: FileFormat) -> Result<()> {
    let bytes = match format {
        FileFormat::Emb1 => encode_emb1(ds)?,
        FileFormat::Csv => encode_csv(ds),
    };
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Emb1Header {
    n: usize,
    d: usize,
    dtype: String,
    meta: DatasetMeta,
}

pub fn encode_emb1(ds: &EmbeddingDataset) -> Result<Vec<u8>> {
    let header = serde_json::to_vec(&Emb1Header {
        n: ds.n,
        d: ds.d,
        dtype: "f32".into(),
        meta: ds.meta.clone(),
    })?;
    let header_len = u32::try_from(header.len())
        .map_err(|_| Error::Format("header longer than u32::MAX bytes".into()))?;
    let mut out = Vec::with_capacity(8 + header.len() + ds.embeddings.len() * 4 + ds.n);
    out.extend_from_slice(EMB1_MAGIC);
    out.extend_from_slice(&header_len.to_le_bytes());
    out.extend_from_slice(&header);
    for v in &ds.embeddings {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend(ds.labels.iter().map(|l| l.as_byte()));
    Ok(out)
}

pub fn decode_emb1(bytes: &[u8]) -> Result<EmbeddingDataset> {
    if bytes.len() < 8 {
        return Err(Error::Format(format!(
            "file is {} bytes, shorter than the 8-byte preamble",
            bytes.len()
        )));
    }
    if &bytes[0..4] != EMB1_MAGIC {
        return Err(Error::Format(format!("bad magic {:02x?}", &bytes[0..4])));
    }
    let header_len = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let body = &bytes[8..];
    if header_len > body.len() {
        return Err(Error::Format(format!(
            "header length {header_len} exceeds remaining {} bytes",
            body.len()
        )));
    }
    let header: Emb1Header = serde_json::from_slice(&body[..header_len])
        .map_err(|e| Error::Format(format!("header json: {e}")))?;
    if header.dtype != "f32" {
        return Err(Error::Format(format!("unsupported dtype {:?}", header.dtype)));
    }
    let payload = &body[header_len..];
    let n_values = header
        .n
        .checked_mul(header.d)
        .ok_or_else(|| Error::Format("n*d overflows".into()))?;
    let expected = n_values
        .checked_mul(4)
        .and_then(|b| b.checked_add(header.n))
        .ok_or_else(|| Error::Format("payload size overflows".into()))?;
    if payload.len() != expected {
        return Err(Error::Format(format!(
            "payload is {} bytes, header n={} d={} implies {expected}",
            payload.len(),
            header.n,
            header.d
        )));
    }
    let (values, label_bytes) = payload.split_at(n_values * 4);
    let embeddings: Vec<f32> = values
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let labels = label_bytes
        .iter()
        .enumerate()
        .map(|(i, &b)| {
            ClassLabel::from_byte(b)
                .ok_or_else(|| Error::Format(format!("unknown label byte 0x{b:02x} at row {i}")))
        })
        .collect::<Result<Vec<_>>>()?;
    EmbeddingDataset::new(header.d, embeddings, labels, header.meta)
}

fn encode_csv(ds: &EmbeddingDataset) -> Vec<u8> {
    let mut out = String::from("label");
    for j in 0..ds.d {
        out.push_str(&format!(",dim_{j}"));
    }
    out.push('\n');
    for i in 0..ds.n {
        out.push_str(&ds.labels[i].as_byte().to_string());
        for v in ds.row(i) {
            // f32 Display is the shortest string that parses back to the same value.
            out.push(',');
            out.push_str(&v.to_string());
        }
        out.push('\n');
    }
    out.into_bytes()
}

pub fn decode_csv(bytes: &[u8], meta: DatasetMeta) -> Result<EmbeddingDataset> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(bytes);
    let headers = reader
        .headers()
        .map_err(|e| Error::Format(format!("csv header: {e}")))?
        .clone();
    if headers.get(0) != Some("label") {
        return Err(Error::Format("first csv column must be `label`".into()));
    }
    let d = headers.len() - 1;
    for (j, name) in headers.iter().skip(1).enumerate() {
        if name != format!("dim_{j}") {
            return Err(Error::Format(format!("expected column dim_{j}, found {name:?}")));
        }
    }
    let mut embeddings = Vec::new();
    let mut labels = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Format(format!("csv row {i}: {e}")))?;
        if record.len() != d + 1 {
            return Err(Error::DimensionMismatch {
                expected: d + 1,
                actual: record.len(),
            });
        }
        let label = match record[0].trim() {
            "0" => ClassLabel::Harmless,
            "1" => ClassLabel::Harmful,
            other => return Err(Error::Format(format!("row {i}: unknown label {other:?}"))),
        };
        labels.push(label);
        for field in record.iter().skip(1) {
            let v: f32 = field
                .trim()
                .parse()
                .map_err(|_| Error::Format(format!("row {i}: bad number {field:?}")))?;
            embeddings.push(v);
        }
    }
    EmbeddingDataset::new(d, embeddings, labels, meta)
}

#[cfg(test)]
pub(crate) fn test_meta() -> DatasetMeta {
    DatasetMeta {
        model_id: "test/model".into(),
        language: "en".into(),
        stage: Stage::Reference,
        layer: -1,
        pooling: Pooling::LastToken,
        corpus_id: "toy".into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn labels(bits: &[u8]) -> Vec<ClassLabel> {
        bits.iter().map(|&b| ClassLabel::from_byte(b).unwrap()).collect()
    }

    fn minimal() -> EmbeddingDataset {
        EmbeddingDataset::new(
            2,
            vec![0.0, 0.0, 0.0, 1.0, 5.0, 0.0, 5.0, 1.0],
            labels(&[0, 0, 1, 1]),
            test_meta(),
        )
        .unwrap()
    }

    #[test]
    fn minimal_emb1_file_loads() {
        let bytes = encode_emb1(&minimal()).unwrap();
        assert_eq!(&bytes[..4], &[0x45, 0x4D, 0x42, 0x31]);
        let ds = decode_emb1(&bytes).unwrap();
        assert_eq!((ds.n(), ds.d()), (4, 2));
        assert!(ds.balance().balanced);
        assert_eq!(ds.row(2), &[5.0, 0.0]);
    }

    #[test]
    fn header_matches_documented_layout() {
        let bytes = encode_emb1(&minimal()).unwrap();
        let h = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
        let header = std::str::from_utf8(&bytes[8..8 + h]).unwrap();
        assert_eq!(
            header,
            r#"{"n":4,"d":2,"dtype":"f32","meta":{"model_id":"test/model","language":"en","stage":"reference","layer":-1,"pooling":"last_token","corpus_id":"toy"}}"#
        );
        assert_eq!(bytes.len(), 8 + h + 4 * 2 * 4 + 4);
        assert_eq!(&bytes[bytes.len() - 4..], &[0, 0, 1, 1]);
    }

    #[test]
    fn csv_six_rows() {
        let text = "label,dim_0,dim_1\n0,0,0\n0,1,0.5\n0,2,1\n1,9,9\n1,8,7.25\n1,-1e-3,3\n";
        let ds = decode_csv(text.as_bytes(), test_meta()).unwrap();
        assert_eq!((ds.n(), ds.d()), (6, 2));
        assert_eq!(ds.row(5), &[-1e-3, 3.0]);
        let again = decode_csv(&encode_csv(&ds), test_meta()).unwrap();
        assert_eq!(again, ds);
    }

    #[test]
    fn corpus_sized_file() {
        let n = 5000;
        let d = 16;
        let embeddings: Vec<f32> = (0..n * d).map(|i| (i % 97) as f32 * 0.25).collect();
        let lab: Vec<ClassLabel> = (0..n)
            .map(|i| if i < 2500 { ClassLabel::Harmful } else { ClassLabel::Harmless })
            .collect();
        let ds = EmbeddingDataset::new(d, embeddings, lab, test_meta()).unwrap();
        let back = decode_emb1(&encode_emb1(&ds).unwrap()).unwrap();
        assert_eq!(back.n(), 5000);
        assert_eq!(
            back.balance(),
            BalanceSummary { n_harmful: 2500, n_harmless: 2500, balanced: true }
        );
    }

    #[test]
    fn balance_examples() {
        assert_eq!(
            validate_balance(&labels(&[0, 0, 1, 1])),
            BalanceSummary { n_harmful: 2, n_harmless: 2, balanced: true }
        );
        assert_eq!(
            validate_balance(&labels(&[0, 1, 1])),
            BalanceSummary { n_harmful: 2, n_harmless: 1, balanced: false }
        );
    }

    #[test]
    fn rejects_bad_inputs() {
        let good = encode_emb1(&minimal()).unwrap();

        let mut bad_label = good.clone();
        *bad_label.last_mut().unwrap() = 7;
        assert!(matches!(decode_emb1(&bad_label), Err(Error::Format(m)) if m.contains("label byte")));

        let mut nan = good.clone();
        let h = u32::from_le_bytes(good[4..8].try_into().unwrap()) as usize;
        nan[8 + h..8 + h + 4].copy_from_slice(&f32::NAN.to_le_bytes());
        assert!(matches!(decode_emb1(&nan), Err(Error::Validation(m)) if m.contains("non-finite")));

        let short = &good[..good.len() - 1];
        assert!(matches!(decode_emb1(short), Err(Error::Format(m)) if m.contains("payload")));

        assert!(decode_emb1(b"EMB2\0\0\0\0").is_err());
        assert!(decode_emb1(b"EMB1").is_err());

        // a class with a single member
        let one = EmbeddingDataset::new(2, vec![0.0; 8], labels(&[0, 0, 0, 1]), test_meta());
        assert!(matches!(one, Err(Error::Validation(m)) if m.contains("at least 2 members")));

        let mut meta = test_meta();
        meta.language = "EN".into();
        assert!(EmbeddingDataset::new(2, vec![0.0; 8], labels(&[0, 0, 1, 1]), meta).is_err());

        assert!(decode_csv(b"label,dim_0,dim_1\n0,1\n", test_meta()).is_err());
        assert!(decode_csv(b"label,dim_0,dim_1\n2,1,1\n", test_meta()).is_err());
    }

    #[test]
    fn unwritable_path_is_io_error() {
        let err = save_dataset(&minimal(), Path::new("/nonexistent-dir/x.emb1"), FileFormat::Emb1)
            .unwrap_err();
        assert!(err.is_io());
    }

    fn arb_dataset() -> impl Strategy<Value = EmbeddingDataset> {
        (2usize..6, 4usize..20).prop_flat_map(|(d, n)| {
            (
                proptest::collection::vec(any::<f32>().prop_filter("finite", |v| v.is_finite()), n * d),
                proptest::collection::vec(0u8..2, n - 4),
            )
                .prop_map(move |(emb, rest)| {
                    let mut bits = vec![0, 0, 1, 1];
                    bits.extend(rest);
                    EmbeddingDataset::new(d, emb, labels(&bits), test_meta()).unwrap()
                })
        })
    }

    proptest! {
        #[test]
        fn emb1_round_trip_is_bit_exact(ds in arb_dataset()) {
            let bytes = encode_emb1(&ds).unwrap();
            let back = decode_emb1(&bytes).unwrap();
            prop_assert_eq!(encode_emb1(&back).unwrap(), bytes);
            let b = back.balance();
            prop_assert_eq!(b.n_harmful + b.n_harmless, back.n());
        }

        #[test]
        fn csv_round_trip_is_value_exact(ds in arb_dataset()) {
            let back = decode_csv(&encode_csv(&ds), ds.meta().clone()).unwrap();
            let same_bits = back.embeddings().iter().zip(ds.embeddings())
                .all(|(a, b)| a.to_bits() == b.to_bits() || (*a == 0.0 && *b == 0.0));
            prop_assert!(same_bits);
        }

        #[test]
        fn truncated_or_padded_payload_is_rejected(ds in arb_dataset(), cut in 1usize..16, pad in proptest::bool::ANY) {
            let mut bytes = encode_emb1(&ds).unwrap();
            if pad {
                bytes.extend(std::iter::repeat_n(0u8, cut));
            } else {
                bytes.truncate(bytes.len().saturating_sub(cut));
            }
            prop_assert!(decode_emb1(&bytes).is_err());
        }
    }
}
