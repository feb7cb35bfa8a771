//! Single-file model persistence: a magic header, a little-endian u32
//! format version, then tagged fields (u8 tag, u64 LE length, payload).
//! All numbers are explicit little-endian so files round-trip across
//! platforms; a version mismatch is a hard error.

use std::fs;
use std::path::Path;

use crate::bof::Codebook;
use crate::density::DensityKernel;
use crate::error::{Error, Result};
use crate::fusion::FusionWeights;
use crate::pipeline::{PipelineConfig, TrainedModel, MODEL_FORMAT_VERSION};
use crate::svm::{LabelTable, LinearModel};

const MAGIC: &[u8; 4] = b"KGMF";

const TAG_CONFIG: u8 = 0x01;
const TAG_LABELS: u8 = 0x02;
const TAG_CODEBOOK: u8 = 0x03;
const TAG_FUSION: u8 = 0x04;
const TAG_CLASSIFIER: u8 = 0x05;

struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn new() -> Self {
        Self { buf: Vec::new() }
    }

    fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }

    fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    fn f64(&mut self, v: f64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    fn str(&mut self, s: &str) {
        self.u64(s.len() as u64);
        self.buf.extend_from_slice(s.as_bytes());
    }

    fn field(&mut self, tag: u8, payload: Vec<u8>) {
        self.u8(tag);
        self.u64(payload.len() as u64);
        self.buf.extend_from_slice(&payload);
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(buf: &'a [u8]) -> Self {
        Self { buf, pos: 0 }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.buf.len() {
            return Err(Error::ModelFormat(format!("truncated: wanted {n} bytes at offset {}", self.pos)));
        }
        let slice = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn usize(&mut self) -> Result<usize> {
        let v = self.u64()?;
        usize::try_from(v).map_err(|_| Error::ModelFormat(format!("count {v} does not fit")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn str(&mut self) -> Result<String> {
        let len = self.usize()?;
        let bytes = self.take(len)?;
        String::from_utf8(bytes.to_vec()).map_err(|_| Error::ModelFormat("invalid UTF-8 string".into()))
    }

    fn done(&self) -> bool {
        self.pos == self.buf.len()
    }
}

fn encode_config(cfg: &PipelineConfig) -> Vec<u8> {
    let mut w = Writer::new();
    w.u64(cfg.n_keyframes as u64);
    w.u64(cfg.dictionary_size as u64);
    w.u8(match cfg.kernel {
        DensityKernel::Cutoff => 0,
        DensityKernel::Gaussian => 1,
    });
    w.u64(cfg.stride as u64);
    w.f64(cfg.svm_c);
    w.u64(cfg.svm_epochs as u64);
    w.u64(cfg.seed);
    w.u64(cfg.splits as u64);
    w.f64(cfg.train_frac);
    w.f64(cfg.val_frac);
    w.f64(cfg.test_frac);
    match cfg.d_c {
        Some(v) => {
            w.u8(1);
            w.f64(v);
        }
        None => {
            w.u8(0);
            w.f64(0.0);
        }
    }
    w.u8(cfg.measure_timings as u8);
    w.buf
}

fn decode_config(r: &mut Reader) -> Result<PipelineConfig> {
    let n_keyframes = r.usize()?;
    let dictionary_size = r.usize()?;
    let kernel = match r.u8()? {
        0 => DensityKernel::Cutoff,
        1 => DensityKernel::Gaussian,
        k => return Err(Error::ModelFormat(format!("unknown kernel code {k}"))),
    };
    let stride = r.usize()?;
    let svm_c = r.f64()?;
    let svm_epochs = r.usize()?;
    let seed = r.u64()?;
    let splits = r.usize()?;
    let train_frac = r.f64()?;
    let val_frac = r.f64()?;
    let test_frac = r.f64()?;
    let has_dc = r.u8()? != 0;
    let dc_value = r.f64()?;
    let measure_timings = r.u8()? != 0;
    Ok(PipelineConfig {
        n_keyframes,
        dictionary_size,
        kernel,
        stride,
        svm_c,
        svm_epochs,
        seed,
        splits,
        train_frac,
        val_frac,
        test_frac,
        d_c: has_dc.then_some(dc_value),
        measure_timings,
    })
}

/// Serialize a model to its on-disk byte representation.
pub fn model_to_bytes(model: &TrainedModel) -> Vec<u8> {
    let mut out = Writer::new();
    out.buf.extend_from_slice(MAGIC);
    out.u32(model.format_version);

    out.field(TAG_CONFIG, encode_config(&model.config));

    let mut labels = Writer::new();
    labels.u64(model.classifier.labels().num_classes() as u64);
    for name in model.classifier.labels().names() {
        labels.str(name);
    }
    out.field(TAG_LABELS, labels.buf);

    let mut codebook = Writer::new();
    codebook.u64(model.codebook.len() as u64);
    codebook.u64(model.codebook.dim() as u64);
    codebook.u64(model.codebook.seed());
    for centroid in model.codebook.centroids() {
        for &v in centroid {
            codebook.f64(v);
        }
    }
    out.field(TAG_CODEBOOK, codebook.buf);

    let mut fusion = Writer::new();
    fusion.u64(model.fusion.len() as u64);
    for &w in model.fusion.weights() {
        fusion.u32(w);
    }
    out.field(TAG_FUSION, fusion.buf);

    let mut clf = Writer::new();
    clf.u64(model.classifier.num_classes() as u64);
    clf.u64(model.classifier.dim() as u64);
    for w in model.classifier.weights() {
        for &v in w {
            clf.f64(v);
        }
    }
    for &b in model.classifier.biases() {
        clf.f64(b);
    }
    out.field(TAG_CLASSIFIER, clf.buf);

    out.buf
}

/// Parse a model from bytes, verifying magic, version, and completeness.
pub fn model_from_bytes(bytes: &[u8]) -> Result<TrainedModel> {
    let mut r = Reader::new(bytes);
    if r.take(4)? != MAGIC {
        return Err(Error::ModelFormat("bad magic; not a model file".into()));
    }
    let version = r.u32()?;
    if version != MODEL_FORMAT_VERSION {
        return Err(Error::ModelVersionMismatch { found: version, expected: MODEL_FORMAT_VERSION });
    }

    let mut config = None;
    let mut labels: Option<LabelTable> = None;
    let mut codebook = None;
    let mut fusion = None;
    let mut classifier_raw: Option<(Vec<Vec<f64>>, Vec<f64>, usize)> = None;

    while !r.done() {
        let tag = r.u8()?;
        let len = r.usize()?;
        let payload = r.take(len)?;
        let mut field = Reader::new(payload);
        match tag {
            TAG_CONFIG => config = Some(decode_config(&mut field)?),
            TAG_LABELS => {
                let count = field.usize()?;
                let mut names = Vec::with_capacity(count);
                for _ in 0..count {
                    names.push(field.str()?);
                }
                labels = Some(LabelTable::new(names)?);
            }
            TAG_CODEBOOK => {
                let d = field.usize()?;
                let dim = field.usize()?;
                let seed = field.u64()?;
                let mut centroids = Vec::with_capacity(d);
                for _ in 0..d {
                    let mut c = Vec::with_capacity(dim);
                    for _ in 0..dim {
                        c.push(field.f64()?);
                    }
                    centroids.push(c);
                }
                codebook = Some(Codebook::from_parts(centroids, dim, seed));
            }
            TAG_FUSION => {
                let count = field.usize()?;
                let mut weights = Vec::with_capacity(count);
                for _ in 0..count {
                    weights.push(field.u32()?);
                }
                fusion = Some(FusionWeights::from_weights(weights));
            }
            TAG_CLASSIFIER => {
                let classes = field.usize()?;
                let dim = field.usize()?;
                let mut weights = Vec::with_capacity(classes);
                for _ in 0..classes {
                    let mut w = Vec::with_capacity(dim);
                    for _ in 0..dim {
                        w.push(field.f64()?);
                    }
                    weights.push(w);
                }
                let mut biases = Vec::with_capacity(classes);
                for _ in 0..classes {
                    biases.push(field.f64()?);
                }
                classifier_raw = Some((weights, biases, dim));
            }
            other => return Err(Error::ModelFormat(format!("unknown field tag {other:#04x}"))),
        }
        if !field.done() {
            return Err(Error::ModelFormat(format!("field {tag:#04x} has trailing bytes")));
        }
    }

    let config = config.ok_or_else(|| Error::ModelFormat("missing config field".into()))?;
    let labels = labels.ok_or_else(|| Error::ModelFormat("missing labels field".into()))?;
    let codebook = codebook.ok_or_else(|| Error::ModelFormat("missing codebook field".into()))?;
    let fusion = fusion.ok_or_else(|| Error::ModelFormat("missing fusion field".into()))?;
    let (weights, biases, dim) =
        classifier_raw.ok_or_else(|| Error::ModelFormat("missing classifier field".into()))?;
    if weights.len() != labels.num_classes() || biases.len() != labels.num_classes() {
        return Err(Error::ModelFormat("classifier class count disagrees with label table".into()));
    }

    let model = TrainedModel {
        format_version: version,
        config,
        codebook,
        fusion,
        classifier: LinearModel::from_parts(weights, biases, dim, labels),
    };
    model.validate()?;
    Ok(model)
}

pub fn save_model(model: &TrainedModel, path: &Path) -> Result<()> {
    fs::write(path, model_to_bytes(model))?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<TrainedModel> {
    let bytes = fs::read(path)?;
    model_from_bytes(&bytes)
}
