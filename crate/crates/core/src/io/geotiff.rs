//! Single-band GeoTIFF subset.
//!
//! Reads classic (non-Big) TIFF, either byte order, striped or tiled,
//! uncompressed or Deflate, with uint8 / int16 / uint16 / float32 / float64
//! samples. Georeferencing comes from ModelPixelScale + ModelTiepoint and
//! nodata from the GDAL_NODATA ASCII tag. GeoKeys are ignored; the caller
//! declares the CRS.
//!
//! Writes little-endian files with a tiepoint anchored at raster position
//! (0.5, 0.5), i.e. the first pixel center, so geotransforms round-trip
//! bit-exactly.

use std::io::{Read, Write};
use std::path::Path;

use flate2::read::ZlibDecoder;
use flate2::write::ZlibEncoder;

use crate::error::{Error, Result};
use crate::raster::{Crs, GeoTransform, Raster, MAX_PIXELS};

const TAG_IMAGE_WIDTH: u16 = 256;
const TAG_IMAGE_LENGTH: u16 = 257;
const TAG_BITS_PER_SAMPLE: u16 = 258;
const TAG_COMPRESSION: u16 = 259;
const TAG_PHOTOMETRIC: u16 = 262;
const TAG_STRIP_OFFSETS: u16 = 273;
const TAG_SAMPLES_PER_PIXEL: u16 = 277;
const TAG_ROWS_PER_STRIP: u16 = 278;
const TAG_STRIP_BYTE_COUNTS: u16 = 279;
const TAG_PLANAR_CONFIG: u16 = 284;
const TAG_PREDICTOR: u16 = 317;
const TAG_TILE_WIDTH: u16 = 322;
const TAG_TILE_LENGTH: u16 = 323;
const TAG_TILE_OFFSETS: u16 = 324;
const TAG_TILE_BYTE_COUNTS: u16 = 325;
const TAG_SAMPLE_FORMAT: u16 = 339;
const TAG_MODEL_PIXEL_SCALE: u16 = 33550;
const TAG_MODEL_TIEPOINT: u16 = 33922;
const TAG_GEO_KEY_DIRECTORY: u16 = 34735;
const TAG_GDAL_NODATA: u16 = 42113;

const TYPE_ASCII: u16 = 2;
const TYPE_SHORT: u16 = 3;
const TYPE_LONG: u16 = 4;
const TYPE_DOUBLE: u16 = 12;

/// Deflate cannot expand data by more than roughly this factor.
const MAX_DEFLATE_RATIO: usize = 1100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BitDepth {
    U8,
    I16,
    U16,
    F32,
    F64,
}

impl BitDepth {
    pub fn bytes(self) -> usize {
        match self {
            BitDepth::U8 => 1,
            BitDepth::I16 | BitDepth::U16 => 2,
            BitDepth::F32 => 4,
            BitDepth::F64 => 8,
        }
    }

    fn format_code(self) -> u16 {
        match self {
            BitDepth::U8 | BitDepth::U16 => 1,
            BitDepth::I16 => 2,
            BitDepth::F32 | BitDepth::F64 => 3,
        }
    }

    fn from_tags(bits: u64, format: u64) -> Option<Self> {
        match (bits, format) {
            (8, 1) => Some(BitDepth::U8),
            (16, 1) => Some(BitDepth::U16),
            (16, 2) => Some(BitDepth::I16),
            (32, 3) => Some(BitDepth::F32),
            (64, 3) => Some(BitDepth::F64),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Compression {
    #[default]
    None,
    Deflate,
}

// ---------------------------------------------------------------------------
// reading

#[derive(Clone, Copy)]
enum ByteOrder {
    Little,
    Big,
}

struct Cursor<'a> {
    buf: &'a [u8],
    order: ByteOrder,
}

impl<'a> Cursor<'a> {
    fn bytes(&self, offset: usize, len: usize, tag: &str) -> Result<&'a [u8]> {
        offset
            .checked_add(len)
            .and_then(|end| self.buf.get(offset..end))
            .ok_or_else(|| Error::format(tag, format!("{len} bytes at offset {offset} run past end of file")))
    }

    fn u16_at(&self, offset: usize, tag: &str) -> Result<u16> {
        let b: [u8; 2] = self.bytes(offset, 2, tag)?.try_into().unwrap();
        Ok(match self.order {
            ByteOrder::Little => u16::from_le_bytes(b),
            ByteOrder::Big => u16::from_be_bytes(b),
        })
    }

    fn u32_at(&self, offset: usize, tag: &str) -> Result<u32> {
        let b: [u8; 4] = self.bytes(offset, 4, tag)?.try_into().unwrap();
        Ok(match self.order {
            ByteOrder::Little => u32::from_le_bytes(b),
            ByteOrder::Big => u32::from_be_bytes(b),
        })
    }

    fn u64_from(&self, b: &[u8]) -> u64 {
        let b: [u8; 8] = b.try_into().unwrap();
        match self.order {
            ByteOrder::Little => u64::from_le_bytes(b),
            ByteOrder::Big => u64::from_be_bytes(b),
        }
    }
}

struct Entry<'a> {
    tag: u16,
    typ: u16,
    count: usize,
    data: &'a [u8],
}

fn type_size(typ: u16) -> Option<usize> {
    match typ {
        1 | 2 | 6 | 7 => Some(1),
        3 | 8 => Some(2),
        4 | 9 | 11 => Some(4),
        5 | 10 | 12 => Some(8),
        _ => None,
    }
}

fn tag_name(tag: u16) -> String {
    match tag {
        TAG_IMAGE_WIDTH => "ImageWidth".into(),
        TAG_IMAGE_LENGTH => "ImageLength".into(),
        TAG_BITS_PER_SAMPLE => "BitsPerSample".into(),
        TAG_COMPRESSION => "Compression".into(),
        TAG_STRIP_OFFSETS => "StripOffsets".into(),
        TAG_SAMPLES_PER_PIXEL => "SamplesPerPixel".into(),
        TAG_ROWS_PER_STRIP => "RowsPerStrip".into(),
        TAG_STRIP_BYTE_COUNTS => "StripByteCounts".into(),
        TAG_PLANAR_CONFIG => "PlanarConfiguration".into(),
        TAG_PREDICTOR => "Predictor".into(),
        TAG_TILE_WIDTH => "TileWidth".into(),
        TAG_TILE_LENGTH => "TileLength".into(),
        TAG_TILE_OFFSETS => "TileOffsets".into(),
        TAG_TILE_BYTE_COUNTS => "TileByteCounts".into(),
        TAG_SAMPLE_FORMAT => "SampleFormat".into(),
        TAG_MODEL_PIXEL_SCALE => "ModelPixelScaleTag".into(),
        TAG_MODEL_TIEPOINT => "ModelTiepointTag".into(),
        TAG_GDAL_NODATA => "GDAL_NODATA".into(),
        other => format!("tag {other}"),
    }
}

impl<'a> Entry<'a> {
    fn uints(&self, c: &Cursor) -> Result<Vec<u64>> {
        let name = tag_name(self.tag);
        let size = type_size(self.typ).unwrap();
        (0..self.count)
            .map(|i| {
                let b = &self.data[i * size..(i + 1) * size];
                match self.typ {
                    1 => Ok(u64::from(b[0])),
                    3 => Ok(u64::from(match c.order {
                        ByteOrder::Little => u16::from_le_bytes([b[0], b[1]]),
                        ByteOrder::Big => u16::from_be_bytes([b[0], b[1]]),
                    })),
                    4 => Ok(u64::from(match c.order {
                        ByteOrder::Little => u32::from_le_bytes([b[0], b[1], b[2], b[3]]),
                        ByteOrder::Big => u32::from_be_bytes([b[0], b[1], b[2], b[3]]),
                    })),
                    _ => Err(Error::format(&name, format!("expected an unsigned integer type, found type {}", self.typ))),
                }
            })
            .collect()
    }

    fn uint(&self, c: &Cursor) -> Result<u64> {
        let v = self.uints(c)?;
        if v.len() != 1 {
            return Err(Error::format(tag_name(self.tag), format!("expected 1 value, found {}", v.len())));
        }
        Ok(v[0])
    }

    fn doubles(&self, c: &Cursor) -> Result<Vec<f64>> {
        if self.typ != TYPE_DOUBLE {
            return Err(Error::format(tag_name(self.tag), format!("expected DOUBLE values, found type {}", self.typ)));
        }
        Ok(self.data.chunks_exact(8).map(|b| f64::from_bits(c.u64_from(b))).collect())
    }

    fn ascii(&self) -> Result<String> {
        if self.typ != TYPE_ASCII {
            return Err(Error::format(tag_name(self.tag), "expected ASCII"));
        }
        let s = String::from_utf8_lossy(self.data);
        Ok(s.trim_end_matches('\0').trim().to_string())
    }
}

fn parse_ifd<'a>(c: &Cursor<'a>, offset: usize) -> Result<Vec<Entry<'a>>> {
    let n = c.u16_at(offset, "IFD")? as usize;
    let mut entries = Vec::with_capacity(n);
    for i in 0..n {
        let base = offset + 2 + i * 12;
        let tag = c.u16_at(base, "IFD")?;
        let typ = c.u16_at(base + 2, "IFD")?;
        let count = c.u32_at(base + 4, "IFD")? as usize;
        let Some(size) = type_size(typ) else {
            // readers must skip unknown field types (TIFF 6.0)
            continue;
        };
        let len = count
            .checked_mul(size)
            .ok_or_else(|| Error::format(tag_name(tag), "value count overflows"))?;
        let data = if len <= 4 {
            c.bytes(base + 8, len, &tag_name(tag))?
        } else {
            let off = c.u32_at(base + 8, "IFD")? as usize;
            c.bytes(off, len, &tag_name(tag))?
        };
        entries.push(Entry { tag, typ, count, data });
    }
    Ok(entries)
}

/// Decode a GeoTIFF held in memory.
pub fn decode_geotiff(buf: &[u8]) -> Result<Raster> {
    let order = match buf.get(0..2) {
        Some(b"II") => ByteOrder::Little,
        Some(b"MM") => ByteOrder::Big,
        _ => return Err(Error::format("header", "missing II/MM byte-order mark")),
    };
    let c = Cursor { buf, order };
    match c.u16_at(2, "header")? {
        42 => {}
        43 => return Err(Error::format("header", "BigTIFF is not supported")),
        v => return Err(Error::format("header", format!("bad magic number {v}"))),
    }
    let ifd = c.u32_at(4, "header")? as usize;
    let entries = parse_ifd(&c, ifd)?;
    let find = |tag: u16| entries.iter().find(|e| e.tag == tag);
    let require = |tag: u16| find(tag).ok_or_else(|| Error::format(tag_name(tag), "required tag missing"));

    let width = require(TAG_IMAGE_WIDTH)?.uint(&c)? as usize;
    let height = require(TAG_IMAGE_LENGTH)?.uint(&c)? as usize;
    if width == 0 || height == 0 {
        return Err(Error::format("ImageWidth", format!("empty image {width}x{height}")));
    }
    let pixels = width
        .checked_mul(height)
        .filter(|&p| p <= MAX_PIXELS)
        .ok_or_else(|| Error::format("ImageWidth", format!("image {width}x{height} is too large")))?;

    let spp = find(TAG_SAMPLES_PER_PIXEL).map(|e| e.uint(&c)).transpose()?.unwrap_or(1);
    if spp != 1 {
        return Err(Error::format("SamplesPerPixel", format!("{spp} bands; only single-band files are supported")));
    }
    let bits = find(TAG_BITS_PER_SAMPLE).map(|e| e.uints(&c)).transpose()?.unwrap_or_else(|| vec![1]);
    let format = find(TAG_SAMPLE_FORMAT).map(|e| e.uints(&c)).transpose()?.unwrap_or_else(|| vec![1]);
    let (Some(&bits), Some(&format)) = (bits.first(), format.first()) else {
        return Err(Error::format("BitsPerSample", "empty value"));
    };
    let sample = BitDepth::from_tags(bits, format).ok_or_else(|| {
        Error::format(
            "BitsPerSample",
            format!("unsupported sample layout: {bits} bits with SampleFormat {format}"),
        )
    })?;
    let compression = match find(TAG_COMPRESSION).map(|e| e.uint(&c)).transpose()?.unwrap_or(1) {
        1 => Compression::None,
        8 | 32946 => Compression::Deflate,
        other => {
            return Err(Error::format("Compression", format!("compression scheme {other} is not supported")));
        }
    };
    if let Some(p) = find(TAG_PREDICTOR) {
        let p = p.uint(&c)?;
        if p != 1 {
            return Err(Error::format("Predictor", format!("predictor {p} is not supported")));
        }
    }
    if find(TAG_GEO_KEY_DIRECTORY).is_some() {
        log::warn!("GeoKeyDirectory present but ignored; the CRS must be declared by the caller");
    }

    // chunk grid: strips are tiles spanning the full width
    let (chunk_w, chunk_h, offsets_tag, counts_tag) = if let Some(tw) = find(TAG_TILE_WIDTH) {
        let tw = tw.uint(&c)? as usize;
        let th = require(TAG_TILE_LENGTH)?.uint(&c)? as usize;
        if tw == 0 || th == 0 {
            return Err(Error::format("TileWidth", "zero tile dimension"));
        }
        (tw, th, TAG_TILE_OFFSETS, TAG_TILE_BYTE_COUNTS)
    } else {
        let rps = find(TAG_ROWS_PER_STRIP).map(|e| e.uint(&c)).transpose()?.unwrap_or(height as u64);
        if rps == 0 {
            return Err(Error::format("RowsPerStrip", "zero rows per strip"));
        }
        (width, (rps as usize).min(height), TAG_STRIP_OFFSETS, TAG_STRIP_BYTE_COUNTS)
    };
    let across = width.div_ceil(chunk_w);
    let down = height.div_ceil(chunk_h);
    let offsets = require(offsets_tag)?.uints(&c)?;
    let counts = require(counts_tag)?.uints(&c)?;
    if offsets.len() != across * down {
        return Err(Error::format(
            tag_name(offsets_tag),
            format!("expected {} chunks, found {}", across * down, offsets.len()),
        ));
    }
    if counts.len() != offsets.len() {
        return Err(Error::format(
            tag_name(counts_tag),
            format!("{} byte counts for {} chunks", counts.len(), offsets.len()),
        ));
    }

    let bps = sample.bytes();
    chunk_w
        .checked_mul(chunk_h)
        .and_then(|n| n.checked_mul(bps))
        .ok_or_else(|| Error::format(tag_name(offsets_tag), "chunk size overflows"))?;
    // bytes needed to cover the in-image part of chunk `i`; edge chunks may be short
    let extent = |i: usize| {
        let (cx, cy) = ((i % across) * chunk_w, (i / across) * chunk_h);
        let (rows, cols) = (chunk_h.min(height - cy), chunk_w.min(width - cx));
        (cx, cy, rows, cols, ((rows - 1) * chunk_w + cols) * bps)
    };
    // every chunk must be backed by file bytes before anything is allocated
    let mut raw_chunks = Vec::with_capacity(offsets.len());
    for (i, (&off, &len)) in offsets.iter().zip(&counts).enumerate() {
        let data = c.bytes(off as usize, len as usize, &tag_name(offsets_tag))?;
        let needed = extent(i).4;
        let limit = match compression {
            Compression::None => data.len(),
            Compression::Deflate => data.len().saturating_mul(MAX_DEFLATE_RATIO).saturating_add(4096),
        };
        if needed > limit {
            return Err(Error::format(
                tag_name(counts_tag),
                format!("chunk {i} holds {} bytes, {needed} needed", data.len()),
            ));
        }
        raw_chunks.push(data);
    }

    let mut out = vec![0.0f64; pixels];
    let mut scratch = Vec::new();
    for (i, raw) in raw_chunks.into_iter().enumerate() {
        let (cx, cy, rows, cols, needed) = extent(i);
        let bytes: &[u8] = match compression {
            Compression::None => raw,
            Compression::Deflate => {
                scratch.clear();
                ZlibDecoder::new(raw)
                    .take(needed as u64)
                    .read_to_end(&mut scratch)
                    .map_err(|e| Error::format("Compression", format!("chunk {i}: deflate stream corrupt: {e}")))?;
                if scratch.len() < needed {
                    return Err(Error::format(
                        "Compression",
                        format!("chunk {i} inflates to {} bytes, {needed} needed", scratch.len()),
                    ));
                }
                &scratch
            }
        };
        for r in 0..rows {
            for col in 0..cols {
                let at = (r * chunk_w + col) * bps;
                let b = &bytes[at..at + bps];
                out[(cy + r) * width + cx + col] = decode_sample(sample, b, order);
            }
        }
    }

    let geotransform = match (find(TAG_MODEL_PIXEL_SCALE), find(TAG_MODEL_TIEPOINT)) {
        (Some(scale), Some(tie)) => {
            let s = scale.doubles(&c)?;
            let t = tie.doubles(&c)?;
            if s.len() < 2 {
                return Err(Error::format("ModelPixelScaleTag", "expected 3 values"));
            }
            if t.len() < 6 {
                return Err(Error::format("ModelTiepointTag", "expected 6 values"));
            }
            let (sx, sy) = (s[0], s[1]);
            let (i, j, x, y) = (t[0], t[1], t[3], t[4]);
            let origin_x = if i == 0.5 { x } else { x + (0.5 - i) * sx };
            let origin_y = if j == 0.5 { y } else { y - (0.5 - j) * sy };
            GeoTransform::new(origin_x, origin_y, sx, -sy)
        }
        _ => GeoTransform::IDENTITY,
    };
    let nodata = match find(TAG_GDAL_NODATA) {
        Some(e) => {
            let s = e.ascii()?;
            Some(s.parse::<f64>().map_err(|_| Error::format("GDAL_NODATA", format!("not a number: {s:?}")))?)
        }
        None => None,
    };
    Raster::new(width, height, out, geotransform, nodata, Crs::PixelOnly)
        .map_err(|e| Error::format("ModelPixelScaleTag", e.to_string()))
}

#[inline]
fn decode_sample(sample: BitDepth, b: &[u8], order: ByteOrder) -> f64 {
    macro_rules! num {
        ($t:ty) => {{
            let arr = b.try_into().unwrap();
            match order {
                ByteOrder::Little => <$t>::from_le_bytes(arr),
                ByteOrder::Big => <$t>::from_be_bytes(arr),
            }
        }};
    }
    match sample {
        BitDepth::U8 => f64::from(b[0]),
        BitDepth::U16 => f64::from(num!(u16)),
        BitDepth::I16 => f64::from(num!(i16)),
        BitDepth::F32 => f64::from(num!(f32)),
        BitDepth::F64 => num!(f64),
    }
}

pub fn read_geotiff(path: impl AsRef<Path>) -> Result<Raster> {
    let path = path.as_ref();
    let buf = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_geotiff(&buf).map_err(|e| match e {
        Error::Format { tag, msg } => Error::Format {
            tag,
            msg: format!("{}: {msg}", path.display()),
        },
        other => other,
    })
}

// ---------------------------------------------------------------------------
// writing

/// Encoder settings for [`write_geotiff`]; striped and uncompressed unless
/// configured otherwise.
#[derive(Debug, Clone, Copy)]
pub struct GeoTiffWriter {
    sample: BitDepth,
    compression: Compression,
    tile: Option<(usize, usize)>,
}

struct IfdEntry {
    tag: u16,
    typ: u16,
    count: u32,
    payload: Vec<u8>,
}

impl IfdEntry {
    fn shorts(tag: u16, v: &[u16]) -> Self {
        IfdEntry {
            tag,
            typ: TYPE_SHORT,
            count: v.len() as u32,
            payload: v.iter().flat_map(|x| x.to_le_bytes()).collect(),
        }
    }

    fn longs(tag: u16, v: &[u32]) -> Self {
        IfdEntry {
            tag,
            typ: TYPE_LONG,
            count: v.len() as u32,
            payload: v.iter().flat_map(|x| x.to_le_bytes()).collect(),
        }
    }

    fn doubles(tag: u16, v: &[f64]) -> Self {
        IfdEntry {
            tag,
            typ: TYPE_DOUBLE,
            count: v.len() as u32,
            payload: v.iter().flat_map(|x| x.to_le_bytes()).collect(),
        }
    }

    fn ascii(tag: u16, s: &str) -> Self {
        let mut payload = s.as_bytes().to_vec();
        payload.push(0);
        IfdEntry {
            tag,
            typ: TYPE_ASCII,
            count: payload.len() as u32,
            payload,
        }
    }
}

impl GeoTiffWriter {
    pub fn new(sample: BitDepth) -> Self {
        GeoTiffWriter {
            sample,
            compression: Compression::None,
            tile: None,
        }
    }

    pub fn compression(mut self, compression: Compression) -> Self {
        self.compression = compression;
        self
    }

    /// Write square-ish tiles instead of strips. Tile sides must be multiples of 16.
    pub fn tiled(mut self, tile_width: usize, tile_height: usize) -> Self {
        self.tile = Some((tile_width, tile_height));
        self
    }

    fn encode_value(&self, v: f64, out: &mut Vec<u8>) -> Result<()> {
        let integral = |lo: f64, hi: f64| -> Result<f64> {
            if v.fract() != 0.0 || !(lo..=hi).contains(&v) {
                return Err(Error::Argument(format!("value {v} not representable as {:?}", self.sample)));
            }
            Ok(v)
        };
        match self.sample {
            BitDepth::U8 => out.push(integral(0.0, 255.0)? as u8),
            BitDepth::U16 => out.extend((integral(0.0, 65535.0)? as u16).to_le_bytes()),
            BitDepth::I16 => out.extend((integral(-32768.0, 32767.0)? as i16).to_le_bytes()),
            BitDepth::F32 => out.extend((v as f32).to_le_bytes()),
            BitDepth::F64 => out.extend(v.to_le_bytes()),
        }
        Ok(())
    }

    /// Encode `raster` into an in-memory TIFF.
    pub fn encode(&self, raster: &Raster) -> Result<Vec<u8>> {
        let (w, h) = raster.dims();
        let bps = self.sample.bytes();
        if let Some(nd) = raster.nodata {
            self.encode_value(nd, &mut Vec::new())?;
        }
        let (chunk_w, chunk_h) = match self.tile {
            Some((tw, th)) => {
                if tw == 0 || th == 0 || tw % 16 != 0 || th % 16 != 0 {
                    return Err(Error::Argument(format!("tile size {tw}x{th} must be positive multiples of 16")));
                }
                (tw, th)
            }
            None => (w, (65536 / (w * bps)).clamp(1, h)),
        };
        let across = w.div_ceil(chunk_w);
        let down = h.div_ceil(chunk_h);

        let mut file = b"II\x2a\x00\0\0\0\0".to_vec();
        let mut offsets = Vec::with_capacity(across * down);
        let mut counts = Vec::with_capacity(across * down);
        let mut chunk = Vec::with_capacity(chunk_w * chunk_h * bps);
        for cy in 0..down {
            for cx in 0..across {
                chunk.clear();
                let rows = if self.tile.is_some() { chunk_h } else { chunk_h.min(h - cy * chunk_h) };
                for r in 0..rows {
                    for c in 0..chunk_w {
                        let (col, row) = (cx * chunk_w + c, cy * chunk_h + r);
                        // tiles are padded with zeros past the image edge
                        let v = if col < w && row < h { raster.get(col, row) } else { 0.0 };
                        self.encode_value(v, &mut chunk)?;
                    }
                }
                let payload = match self.compression {
                    Compression::None => chunk.clone(),
                    Compression::Deflate => {
                        let mut enc = ZlibEncoder::new(Vec::new(), flate2::Compression::default());
                        enc.write_all(&chunk).and_then(|_| enc.finish()).map_err(|e| Error::io("<deflate>", e))?
                    }
                };
                if file.len() % 2 == 1 {
                    file.push(0);
                }
                offsets.push(u32::try_from(file.len()).map_err(|_| Error::Argument("GeoTIFF exceeds 4 GiB".into()))?);
                counts.push(payload.len() as u32);
                file.extend_from_slice(&payload);
            }
        }

        let gt = raster.geotransform;
        let mut entries = vec![
            IfdEntry::longs(TAG_IMAGE_WIDTH, &[w as u32]),
            IfdEntry::longs(TAG_IMAGE_LENGTH, &[h as u32]),
            IfdEntry::shorts(TAG_BITS_PER_SAMPLE, &[(bps * 8) as u16]),
            IfdEntry::shorts(
                TAG_COMPRESSION,
                &[match self.compression {
                    Compression::None => 1,
                    Compression::Deflate => 8,
                }],
            ),
            IfdEntry::shorts(TAG_PHOTOMETRIC, &[1]),
            IfdEntry::shorts(TAG_SAMPLES_PER_PIXEL, &[1]),
            IfdEntry::shorts(TAG_PLANAR_CONFIG, &[1]),
            IfdEntry::shorts(TAG_SAMPLE_FORMAT, &[self.sample.format_code()]),
            IfdEntry::doubles(TAG_MODEL_PIXEL_SCALE, &[gt.pixel_size_x, -gt.pixel_size_y, 0.0]),
            IfdEntry::doubles(TAG_MODEL_TIEPOINT, &[0.5, 0.5, 0.0, gt.origin_x, gt.origin_y, 0.0]),
        ];
        if self.tile.is_some() {
            entries.push(IfdEntry::longs(TAG_TILE_WIDTH, &[chunk_w as u32]));
            entries.push(IfdEntry::longs(TAG_TILE_LENGTH, &[chunk_h as u32]));
            entries.push(IfdEntry::longs(TAG_TILE_OFFSETS, &offsets));
            entries.push(IfdEntry::longs(TAG_TILE_BYTE_COUNTS, &counts));
        } else {
            entries.push(IfdEntry::longs(TAG_STRIP_OFFSETS, &offsets));
            entries.push(IfdEntry::longs(TAG_ROWS_PER_STRIP, &[chunk_h as u32]));
            entries.push(IfdEntry::longs(TAG_STRIP_BYTE_COUNTS, &counts));
        }
        if let Some(nd) = raster.nodata {
            entries.push(IfdEntry::ascii(TAG_GDAL_NODATA, &format!("{nd}")));
        }
        entries.sort_by_key(|e| e.tag);

        if file.len() % 2 == 1 {
            file.push(0);
        }
        let ifd_offset = file.len();
        let ifd_len = 2 + entries.len() * 12 + 4;
        let mut extra_offset = ifd_offset + ifd_len;
        let mut extra = Vec::new();
        file.extend((entries.len() as u16).to_le_bytes());
        for e in &entries {
            file.extend(e.tag.to_le_bytes());
            file.extend(e.typ.to_le_bytes());
            file.extend(e.count.to_le_bytes());
            if e.payload.len() <= 4 {
                let mut inline = e.payload.clone();
                inline.resize(4, 0);
                file.extend(inline);
            } else {
                file.extend((extra_offset as u32).to_le_bytes());
                extra.extend_from_slice(&e.payload);
                if extra.len() % 2 == 1 {
                    extra.push(0);
                }
                extra_offset = ifd_offset + ifd_len + extra.len();
            }
        }
        file.extend(0u32.to_le_bytes());
        file.extend(extra);
        file[4..8].copy_from_slice(&(ifd_offset as u32).to_le_bytes());
        if file.len() > u32::MAX as usize {
            return Err(Error::Argument("GeoTIFF exceeds 4 GiB".into()));
        }
        Ok(file)
    }

    pub fn write(&self, raster: &Raster, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let bytes = self.encode(raster)?;
        std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
    }
}

/// Write a striped, uncompressed single-band GeoTIFF.
pub fn write_geotiff(raster: &Raster, path: impl AsRef<Path>, sample: BitDepth) -> Result<()> {
    GeoTiffWriter::new(sample).write(raster, path)
}
