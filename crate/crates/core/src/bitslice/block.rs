use std::io::{self, Read, Write};

use super::RtError;

/// Register widths evaluated for the runtime.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LaneWidth {
    W32 = 32,
    W64 = 64,
    W128 = 128,
    W256 = 256,
    W512 = 512,
}

impl LaneWidth {
    pub const ALL: [LaneWidth; 5] = [LaneWidth::W32, LaneWidth::W64, LaneWidth::W128, LaneWidth::W256, LaneWidth::W512];

    pub fn lanes(self) -> usize {
        self as usize
    }

    /// Native 64-bit words per plane.
    pub fn words(self) -> usize {
        words_for(self.lanes())
    }

    pub fn from_lanes(lanes: usize) -> Option<LaneWidth> {
        LaneWidth::ALL.into_iter().find(|w| w.lanes() == lanes)
    }
}

pub(crate) fn words_for(lanes: usize) -> usize {
    lanes.div_ceil(64).max(1)
}

fn lane_mask(lanes: usize, word: usize) -> u64 {
    let used = lanes.saturating_sub(word * 64).min(64);
    if used == 64 {
        !0
    } else {
        (1u64 << used) - 1
    }
}

/// `nbits` bit planes over `lanes` lanes. Plane `j` occupies words
/// `j * words .. (j + 1) * words`; lane `l` is bit `l % 64` of word `l / 64`.
/// Bits above the last lane are always zero.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BitsliceBlock {
    nbits: u32,
    lanes: usize,
    planes: Vec<u64>,
}

impl BitsliceBlock {
    pub fn zeros(nbits: u32, lanes: usize) -> BitsliceBlock {
        BitsliceBlock { nbits, lanes, planes: vec![0; nbits as usize * words_for(lanes)] }
    }

    /// Takes plane-major words; stray bits above the last lane are an error.
    pub fn from_planes(nbits: u32, lanes: usize, planes: Vec<u64>) -> Result<BitsliceBlock, RtError> {
        let words = words_for(lanes);
        if lanes == 0 {
            return Err(RtError::NoLanes);
        }
        if planes.len() != nbits as usize * words {
            return Err(RtError::Length { expected: nbits as usize * words, got: planes.len() });
        }
        for (i, w) in planes.iter().enumerate() {
            if w & !lane_mask(lanes, i % words) != 0 {
                return Err(RtError::StrayBits { word: i });
            }
        }
        Ok(BitsliceBlock { nbits, lanes, planes })
    }

    pub fn nbits(&self) -> u32 {
        self.nbits
    }

    pub fn lanes(&self) -> usize {
        self.lanes
    }

    pub fn words_per_plane(&self) -> usize {
        words_for(self.lanes)
    }

    pub fn plane(&self, j: usize) -> &[u64] {
        let w = self.words_per_plane();
        &self.planes[j * w..(j + 1) * w]
    }

    pub fn plane_mut(&mut self, j: usize) -> &mut [u64] {
        let w = self.words_per_plane();
        &mut self.planes[j * w..(j + 1) * w]
    }

    pub fn planes(&self) -> &[u64] {
        &self.planes
    }

    pub fn into_planes(self) -> Vec<u64> {
        self.planes
    }

    pub fn lane(&self, l: usize) -> u64 {
        let w = self.words_per_plane();
        let (word, bit) = (l / 64, l % 64);
        (0..self.nbits as usize).fold(0, |acc, j| acc | (((self.planes[j * w + word] >> bit) & 1) << j))
    }

    /// Lanes `start..start + len` as a new block.
    pub fn slice_lanes(&self, start: usize, len: usize) -> Result<BitsliceBlock, RtError> {
        if len == 0 || start + len > self.lanes {
            return Err(RtError::LaneRange { start, len, lanes: self.lanes });
        }
        let values: Vec<u64> = (start..start + len).map(|l| self.lane(l)).collect();
        to_bitslice(&values, self.nbits, len)
    }

    /// Dumps as `nbits: u32`, `lanes: u32`, then the plane-major words, all
    /// little-endian.
    pub fn write_to(&self, mut w: impl Write) -> io::Result<()> {
        w.write_all(&self.nbits.to_le_bytes())?;
        w.write_all(&(self.lanes as u32).to_le_bytes())?;
        for word in &self.planes {
            w.write_all(&word.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from(mut r: impl Read) -> Result<BitsliceBlock, RtError> {
        let mut u32buf = [0u8; 4];
        r.read_exact(&mut u32buf)?;
        let nbits = u32::from_le_bytes(u32buf);
        r.read_exact(&mut u32buf)?;
        let lanes = u32::from_le_bytes(u32buf) as usize;
        if nbits > 64 {
            return Err(RtError::TooManyBits(nbits));
        }
        let mut planes = vec![0u64; nbits as usize * words_for(lanes)];
        let mut buf = [0u8; 8];
        for w in planes.iter_mut() {
            r.read_exact(&mut buf)?;
            *w = u64::from_le_bytes(buf);
        }
        BitsliceBlock::from_planes(nbits, lanes, planes)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut v = Vec::with_capacity(8 + 8 * self.planes.len());
        self.write_to(&mut v).expect("writing to a Vec");
        v
    }
}

/// Transposes `lanes` values of `nbits` bits into bit planes.
pub fn to_bitslice(values: &[u64], nbits: u32, lanes: usize) -> Result<BitsliceBlock, RtError> {
    if nbits > 64 {
        return Err(RtError::TooManyBits(nbits));
    }
    if lanes == 0 {
        return Err(RtError::NoLanes);
    }
    if values.len() != lanes {
        return Err(RtError::Length { expected: lanes, got: values.len() });
    }
    let mut b = BitsliceBlock::zeros(nbits, lanes);
    let w = b.words_per_plane();
    for (l, &v) in values.iter().enumerate() {
        if nbits < 64 && v >> nbits != 0 {
            return Err(RtError::ValueOutOfRange { lane: l, value: v, nbits });
        }
        let (word, bit) = (l / 64, l % 64);
        let mut rest = v;
        while rest != 0 {
            let j = rest.trailing_zeros() as usize;
            b.planes[j * w + word] |= 1 << bit;
            rest &= rest - 1;
        }
    }
    Ok(b)
}

/// Inverse of [`to_bitslice`].
pub fn from_bitslice(b: &BitsliceBlock) -> Vec<u64> {
    let w = b.words_per_plane();
    let mut out = vec![0u64; b.lanes];
    for j in 0..b.nbits as usize {
        for word in 0..w {
            let mut bits = b.planes[j * w + word];
            while bits != 0 {
                let t = bits.trailing_zeros() as usize;
                out[word * 64 + t] |= 1 << j;
                bits &= bits - 1;
            }
        }
    }
    out
}

/// Every lane holds `value`.
pub fn broadcast(value: u64, nbits: u32, lanes: usize) -> Result<BitsliceBlock, RtError> {
    if nbits > 64 {
        return Err(RtError::TooManyBits(nbits));
    }
    if lanes == 0 {
        return Err(RtError::NoLanes);
    }
    if nbits < 64 && value >> nbits != 0 {
        return Err(RtError::ValueOutOfRange { lane: 0, value, nbits });
    }
    let mut b = BitsliceBlock::zeros(nbits, lanes);
    let w = b.words_per_plane();
    for j in 0..nbits as usize {
        if (value >> j) & 1 == 1 {
            for word in 0..w {
                b.planes[j * w + word] = lane_mask(lanes, word);
            }
        }
    }
    Ok(b)
}
