//! Appearance and motion descriptors.
//!
//! Appearance: dense 64-D patch-gradient descriptors (4x4 cells of
//! gradient statistics over 16x16 patches, L2-normalized). Motion:
//! LBP-TOP, the concatenation of uniform-LBP(8,1) histograms over the XY,
//! XT, and YT planes of a video volume, 3 x 59 = 177 bins.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::sequence::{Frame, Volume};

pub const PATCH_SIZE: usize = 16;
pub const PATCH_CELLS: usize = 4;
pub const PATCH_DESC_LEN: usize = 64;
/// 58 uniform patterns plus one catch-all bin.
pub const UNIFORM_BINS: usize = 59;
pub const LBP_TOP_LEN: usize = 3 * UNIFORM_BINS;

/// One dense appearance descriptor with its origin.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchDescriptor {
    /// 64 components: 4x4 cells x (sum dx, sum |dx|, sum dy, sum |dy|).
    pub vector: Vec<f64>,
    /// 1-based frame index of the key frame the patch came from; 0 when
    /// the descriptor is not tied to a sequence position.
    pub frame_index: usize,
    /// Top-left corner of the patch.
    pub x: usize,
    pub y: usize,
}

#[inline]
fn grad_x(frame: &Frame, x: usize, y: usize) -> f64 {
    let right = frame.get_clamped(x as isize + 1, y as isize) as f64;
    let left = frame.get_clamped(x as isize - 1, y as isize) as f64;
    (right - left) / 2.0
}

#[inline]
fn grad_y(frame: &Frame, x: usize, y: usize) -> f64 {
    let below = frame.get_clamped(x as isize, y as isize + 1) as f64;
    let above = frame.get_clamped(x as isize, y as isize - 1) as f64;
    (below - above) / 2.0
}

/// Descriptor of the 16x16 patch whose top-left corner is (x0, y0).
/// Gradients are central differences with frame borders replicated.
/// The vector is L2-normalized; a perfectly flat patch stays all-zero.
pub fn patch_descriptor(frame: &Frame, x0: usize, y0: usize) -> Result<PatchDescriptor> {
    if x0 + PATCH_SIZE > frame.width() || y0 + PATCH_SIZE > frame.height() {
        return Err(Error::FrameSmallerThanPatch {
            width: frame.width(),
            height: frame.height(),
            patch: PATCH_SIZE,
        });
    }
    let cell_px = PATCH_SIZE / PATCH_CELLS;
    let mut vector = vec![0.0; PATCH_DESC_LEN];
    for py in 0..PATCH_SIZE {
        for px in 0..PATCH_SIZE {
            let gx = grad_x(frame, x0 + px, y0 + py);
            let gy = grad_y(frame, x0 + px, y0 + py);
            let cell = (py / cell_px) * PATCH_CELLS + px / cell_px;
            let base = cell * 4;
            vector[base] += gx;
            vector[base + 1] += gx.abs();
            vector[base + 2] += gy;
            vector[base + 3] += gy.abs();
        }
    }
    let norm = vector.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        for v in &mut vector {
            *v /= norm;
        }
    }
    Ok(PatchDescriptor { vector, frame_index: 0, x: x0, y: y0 })
}

/// All patch descriptors on the stride grid. Only full patches count:
/// a W x H frame yields floor((W-16)/stride)+1 columns of them.
pub fn dense_patch_descriptors(frame: &Frame, stride: usize) -> Result<Vec<PatchDescriptor>> {
    if stride == 0 {
        return Err(Error::InvalidStride);
    }
    if frame.width() < PATCH_SIZE || frame.height() < PATCH_SIZE {
        return Err(Error::FrameSmallerThanPatch {
            width: frame.width(),
            height: frame.height(),
            patch: PATCH_SIZE,
        });
    }
    let mut out = Vec::new();
    let mut y0 = 0;
    while y0 + PATCH_SIZE <= frame.height() {
        let mut x0 = 0;
        while x0 + PATCH_SIZE <= frame.width() {
            out.push(patch_descriptor(frame, x0, y0)?);
            x0 += stride;
        }
        y0 += stride;
    }
    Ok(out)
}

/// Neighbor offsets clockwise from east; bit b of an LBP code corresponds
/// to offset b.
const LBP_OFFSETS: [(isize, isize); 8] =
    [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)];

#[inline]
fn lbp_code_at(sample: impl Fn(isize, isize) -> u8, x: isize, y: isize) -> u8 {
    let center = sample(x, y);
    let mut code = 0u8;
    for (b, (dx, dy)) in LBP_OFFSETS.iter().enumerate() {
        if sample(x + dx, y + dy) >= center {
            code |= 1 << b;
        }
    }
    code
}

/// 8-neighbor radius-1 LBP code of an interior pixel. Bit b is set when
/// the neighbor is >= the center (ties count), neighbors ordered
/// clockwise from east.
pub fn lbp_code(frame: &Frame, x: usize, y: usize) -> Result<u8> {
    if x == 0 || y == 0 || x + 1 >= frame.width() || y + 1 >= frame.height() {
        return Err(Error::BorderPixel { x, y });
    }
    Ok(lbp_code_at(|a, b| frame.get(a as usize, b as usize), x as isize, y as isize))
}

fn circular_transitions(code: u8) -> u32 {
    (code ^ code.rotate_left(1)).count_ones()
}

/// Map each 8-bit code to its uniform-pattern bin: the 58 codes with at
/// most two circular transitions get bins 0..=57 in ascending code order,
/// everything else shares bin 58.
pub fn uniform_bin(code: u8) -> usize {
    static TABLE: OnceLock<[u8; 256]> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = [UNIFORM_BINS as u8 - 1; 256];
        let mut next = 0u8;
        for code in 0..=255u8 {
            if circular_transitions(code) <= 2 {
                t[code as usize] = next;
                next += 1;
            }
        }
        debug_assert_eq!(next as usize, UNIFORM_BINS - 1);
        t
    });
    table[code as usize] as usize
}

/// Concatenated uniform-LBP histograms over the three orthogonal plane
/// sets of a volume. Entries are raw site counts.
#[derive(Debug, Clone, PartialEq)]
pub struct LbpTopHistogram {
    bins: Vec<f64>,
}

impl LbpTopHistogram {
    pub fn bins(&self) -> &[f64] {
        &self.bins
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    /// The 59-bin block of one plane set, in XY, XT, YT order.
    pub fn block(&self, plane: usize) -> &[f64] {
        &self.bins[plane * UNIFORM_BINS..(plane + 1) * UNIFORM_BINS]
    }
}

/// LBP-TOP of a volume: XY planes over every t, XT planes over every y,
/// YT planes over every x, each coded at interior sites only.
pub fn lbp_top(vol: &Volume) -> Result<LbpTopHistogram> {
    let (w, h, t) = (vol.width(), vol.height(), vol.depth());
    for (axis, extent) in [("x", w), ("y", h), ("t", t)] {
        if extent < 3 {
            return Err(Error::VolumeTooSmall { axis, extent });
        }
    }
    let mut bins = vec![0.0; LBP_TOP_LEN];

    // XY planes: one per time slice.
    for ti in 0..t {
        let sample = |a: isize, b: isize| vol.get(a as usize, b as usize, ti);
        for y in 1..h - 1 {
            for x in 1..w - 1 {
                bins[uniform_bin(lbp_code_at(sample, x as isize, y as isize))] += 1.0;
            }
        }
    }
    // XT planes: one per row, axes (x, t).
    for yi in 0..h {
        let sample = |a: isize, b: isize| vol.get(a as usize, yi, b as usize);
        for ti in 1..t - 1 {
            for x in 1..w - 1 {
                bins[UNIFORM_BINS + uniform_bin(lbp_code_at(sample, x as isize, ti as isize))] += 1.0;
            }
        }
    }
    // YT planes: one per column, axes (y, t).
    for xi in 0..w {
        let sample = |a: isize, b: isize| vol.get(xi, a as usize, b as usize);
        for ti in 1..t - 1 {
            for y in 1..h - 1 {
                bins[2 * UNIFORM_BINS + uniform_bin(lbp_code_at(sample, y as isize, ti as isize))] += 1.0;
            }
        }
    }
    Ok(LbpTopHistogram { bins })
}

/// Interior-site counts per plane set for a (w, h, t) volume, the
/// expected block sums of [`lbp_top`].
pub fn lbp_top_block_sums(w: usize, h: usize, t: usize) -> [f64; 3] {
    [
        (t * (w - 2) * (h - 2)) as f64,
        (h * (w - 2) * (t - 2)) as f64,
        (w * (h - 2) * (t - 2)) as f64,
    ]
}
