//! Loading, validation, and normalization of gesture videos stored as
//! directories of image frames.
//!
//! Frame files are binary PGM (P5) or PNG; temporal order is the
//! lexicographic order of the file names. All pixel data is 8-bit
//! grayscale, converted from color with BT.601 luma weights.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// Minimum frame side and minimum sequence length (LBP neighborhoods and
/// interior extrema both need 3).
pub const MIN_FRAME_SIDE: usize = 3;
pub const MIN_SEQUENCE_LEN: usize = 3;

/// A single 8-bit grayscale frame, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl Frame {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width < MIN_FRAME_SIDE || height < MIN_FRAME_SIDE {
            return Err(Error::FrameTooSmall { width, height, min: MIN_FRAME_SIDE });
        }
        if pixels.len() != width * height {
            return Err(Error::BadPixelBuffer { expected: width * height, found: pixels.len() });
        }
        Ok(Self { width, height, pixels })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    /// Pixel at (x, y), 0-based.
    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    /// Pixel at clamped coordinates; replicates the border outside the frame.
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> u8 {
        let cx = x.clamp(0, self.width as isize - 1) as usize;
        let cy = y.clamp(0, self.height as isize - 1) as usize;
        self.get(cx, cy)
    }

    /// Bilinear resize to the target dimensions. Same-size targets return
    /// the frame unchanged.
    pub fn resize(&self, target_w: usize, target_h: usize) -> Result<Frame> {
        if target_w == self.width && target_h == self.height {
            return Ok(self.clone());
        }
        if target_w < MIN_FRAME_SIDE || target_h < MIN_FRAME_SIDE {
            return Err(Error::FrameTooSmall { width: target_w, height: target_h, min: MIN_FRAME_SIDE });
        }
        let sx = self.width as f64 / target_w as f64;
        let sy = self.height as f64 / target_h as f64;
        let mut out = Vec::with_capacity(target_w * target_h);
        for ty in 0..target_h {
            // Center-aligned sample positions.
            let fy = ((ty as f64 + 0.5) * sy - 0.5).max(0.0);
            let y0 = fy.floor() as usize;
            let y1 = (y0 + 1).min(self.height - 1);
            let wy = fy - y0 as f64;
            for tx in 0..target_w {
                let fx = ((tx as f64 + 0.5) * sx - 0.5).max(0.0);
                let x0 = fx.floor() as usize;
                let x1 = (x0 + 1).min(self.width - 1);
                let wx = fx - x0 as f64;
                let top = self.get(x0, y0) as f64 * (1.0 - wx) + self.get(x1, y0) as f64 * wx;
                let bot = self.get(x0, y1) as f64 * (1.0 - wx) + self.get(x1, y1) as f64 * wx;
                let v = top * (1.0 - wy) + bot * wy;
                out.push((v + 0.5).floor().clamp(0.0, 255.0) as u8);
            }
        }
        Frame::new(target_w, target_h, out)
    }
}

/// BT.601 luma, rounded half-up.
#[inline]
pub fn luma(r: u8, g: u8, b: u8) -> u8 {
    let v = 0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64;
    (v + 0.5).floor().clamp(0.0, 255.0) as u8
}

/// An ordered, dimension-consistent grayscale frame sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameSequence {
    frames: Vec<Frame>,
    source_id: String,
    label: Option<String>,
}

impl FrameSequence {
    pub fn new(frames: Vec<Frame>, source_id: impl Into<String>, label: Option<String>) -> Result<Self> {
        if frames.len() < MIN_SEQUENCE_LEN {
            return Err(Error::SequenceTooShort { found: frames.len(), min: MIN_SEQUENCE_LEN });
        }
        let (w, h) = (frames[0].width(), frames[0].height());
        for f in &frames[1..] {
            if f.width() != w || f.height() != h {
                return Err(Error::InconsistentDimensions {
                    path: PathBuf::new(),
                    expected_w: w as u32,
                    expected_h: h as u32,
                    found_w: f.width() as u32,
                    found_h: f.height() as u32,
                });
            }
        }
        Ok(Self { frames, source_id: source_id.into(), label })
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn width(&self) -> usize {
        self.frames[0].width()
    }

    pub fn height(&self) -> usize {
        self.frames[0].height()
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }

    /// Class name, when known. For datasets on disk this is the directory
    /// name one level above the sequence directory.
    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn set_label(&mut self, label: Option<String>) {
        self.label = label;
    }
}

/// Contiguous 3-D intensity volume with axes (x, y, t), stored frame-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Volume {
    width: usize,
    height: usize,
    depth: usize,
    data: Vec<u8>,
}

impl Volume {
    pub fn new(width: usize, height: usize, depth: usize, data: Vec<u8>) -> Result<Self> {
        if data.len() != width * height * depth {
            return Err(Error::BadPixelBuffer { expected: width * height * depth, found: data.len() });
        }
        Ok(Self { width, height, depth, data })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Temporal extent.
    pub fn depth(&self) -> usize {
        self.depth
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, t: usize) -> u8 {
        self.data[(t * self.height + y) * self.width + x]
    }
}

/// Stack a sequence into an (x, y, t) volume; `volume[x][y][t]` equals
/// frame t at (x, y).
pub fn to_grayscale_stack(seq: &FrameSequence) -> Volume {
    let (w, h, n) = (seq.width(), seq.height(), seq.len());
    let mut data = Vec::with_capacity(w * h * n);
    for f in seq.frames() {
        data.extend_from_slice(f.pixels());
    }
    Volume { width: w, height: h, depth: n, data }
}

/// Rebuild the frame sequence a volume was stacked from.
pub fn from_grayscale_stack(vol: &Volume, source_id: impl Into<String>, label: Option<String>) -> Result<FrameSequence> {
    let plane = vol.width * vol.height;
    let frames = (0..vol.depth)
        .map(|t| Frame::new(vol.width, vol.height, vol.data[t * plane..(t + 1) * plane].to_vec()))
        .collect::<Result<Vec<_>>>()?;
    FrameSequence::new(frames, source_id, label)
}

fn is_frame_file(path: &Path) -> bool {
    matches!(
        path.extension().and_then(|e| e.to_str()).map(|e| e.to_ascii_lowercase()).as_deref(),
        Some("png") | Some("pgm")
    )
}

fn decode_frame(path: &Path) -> Result<Frame> {
    let bytes = fs::read(path).map_err(|e| Error::UndecodableFrame { path: path.to_path_buf(), reason: e.to_string() })?;
    let ext = path.extension().and_then(|e| e.to_str()).map(|e| e.to_ascii_lowercase());
    match ext.as_deref() {
        Some("pgm") => decode_pgm(&bytes).map_err(|reason| Error::UndecodableFrame { path: path.to_path_buf(), reason }),
        Some("png") => decode_png(&bytes).map_err(|reason| Error::UndecodableFrame { path: path.to_path_buf(), reason }),
        _ => Err(Error::UndecodableFrame { path: path.to_path_buf(), reason: "unsupported extension".into() }),
    }
}

fn decode_png(bytes: &[u8]) -> std::result::Result<Frame, String> {
    let img = image::load_from_memory_with_format(bytes, image::ImageFormat::Png).map_err(|e| e.to_string())?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let pixels = match img {
        // Gray data is taken as-is; anything else goes through BT.601.
        image::DynamicImage::ImageLuma8(g) => g.into_raw(),
        other => other.to_rgb8().pixels().map(|p| luma(p[0], p[1], p[2])).collect(),
    };
    Frame::new(w, h, pixels).map_err(|e| e.to_string())
}

/// Binary PGM (P5) decoder. Accepts `#` comments in the header and
/// maxval up to 255.
pub fn decode_pgm(bytes: &[u8]) -> std::result::Result<Frame, String> {
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err("not a binary PGM (missing P5 magic)".into());
    }
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in fields.iter_mut() {
        // Skip whitespace and comment lines.
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                break;
            }
        }
        let start = pos;
        while pos < bytes.len() && bytes[pos].is_ascii_digit() {
            pos += 1;
        }
        if start == pos {
            return Err("truncated PGM header".into());
        }
        let text = std::str::from_utf8(&bytes[start..pos]).map_err(|_| "bad header".to_string())?;
        *field = text.parse::<usize>().map_err(|_| "bad header number".to_string())?;
    }
    let [width, height, maxval] = fields;
    if maxval == 0 || maxval > 255 {
        return Err(format!("unsupported maxval {maxval}"));
    }
    // Exactly one whitespace byte separates the header from the raster.
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err("missing raster separator".into());
    }
    pos += 1;
    let need = width * height;
    if bytes.len() < pos + need {
        return Err(format!("raster truncated: need {need} bytes, have {}", bytes.len() - pos));
    }
    Frame::new(width, height, bytes[pos..pos + need].to_vec()).map_err(|e| e.to_string())
}

/// Encode a frame as binary PGM (P5), the canonical lossless interchange.
pub fn encode_pgm(frame: &Frame) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", frame.width(), frame.height()).into_bytes();
    out.extend_from_slice(frame.pixels());
    out
}

/// Load one gesture sequence from a directory of frames.
///
/// Lexicographic file-name order defines temporal order. When
/// `target_size` is given every frame is resized to it; otherwise all
/// frames must already share one size.
pub fn load_sequence(dir: &Path, target_size: Option<(usize, usize)>) -> Result<FrameSequence> {
    if !dir.is_dir() {
        return Err(Error::MissingDirectory(dir.to_path_buf()));
    }
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|_| Error::MissingDirectory(dir.to_path_buf()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && is_frame_file(p))
        .collect();
    paths.sort();
    if paths.len() < MIN_SEQUENCE_LEN {
        return Err(Error::SequenceTooShort { found: paths.len(), min: MIN_SEQUENCE_LEN });
    }

    let mut frames = Vec::with_capacity(paths.len());
    let mut dims: Option<(usize, usize)> = None;
    for path in &paths {
        let mut frame = decode_frame(path)?;
        if let Some((tw, th)) = target_size {
            frame = frame.resize(tw, th)?;
        } else {
            match dims {
                None => dims = Some((frame.width(), frame.height())),
                Some((w, h)) if (frame.width(), frame.height()) != (w, h) => {
                    return Err(Error::InconsistentDimensions {
                        path: path.clone(),
                        expected_w: w as u32,
                        expected_h: h as u32,
                        found_w: frame.width() as u32,
                        found_h: frame.height() as u32,
                    });
                }
                _ => {}
            }
        }
        frames.push(frame);
    }

    let source_id = dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| dir.display().to_string());
    FrameSequence::new(frames, source_id, None)
}

/// Write a sequence as numbered PGM frames under `dir`.
pub fn save_sequence_pgm(seq: &FrameSequence, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    for (i, frame) in seq.frames().iter().enumerate() {
        let path = dir.join(format!("frame_{i:05}.pgm"));
        fs::write(path, encode_pgm(frame))?;
    }
    Ok(())
}

/// Load a labeled dataset laid out as `<root>/<class_name>/<sequence_id>/frames...`.
///
/// Class and sequence directories are visited in sorted order so the
/// result is deterministic; `class_name` becomes the label.
pub fn load_dataset(root: &Path, target_size: Option<(usize, usize)>) -> Result<Vec<FrameSequence>> {
    if !root.is_dir() {
        return Err(Error::MissingDirectory(root.to_path_buf()));
    }
    let mut class_dirs: Vec<PathBuf> = fs::read_dir(root)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    class_dirs.sort();
    let mut sequences = Vec::new();
    for class_dir in class_dirs {
        let class_name = class_dir.file_name().unwrap().to_string_lossy().into_owned();
        let mut seq_dirs: Vec<PathBuf> = fs::read_dir(&class_dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_dir())
            .collect();
        seq_dirs.sort();
        for seq_dir in seq_dirs {
            let mut seq = load_sequence(&seq_dir, target_size)?;
            let seq_name = seq_dir.file_name().unwrap().to_string_lossy().into_owned();
            seq = FrameSequence::new(seq.frames().to_vec(), format!("{class_name}/{seq_name}"), Some(class_name.clone()))?;
            sequences.push(seq);
        }
    }
    Ok(sequences)
}
