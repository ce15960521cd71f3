//! Point-set CSV and PNM/PFM image input and output.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geom::WeightedPointSet;
use crate::image::ImageGrid;

/// Parses CSV text with a header naming `x`, `y`, `z` coordinate columns
/// (in that order, as a prefix) and an optional weight column `w`.
pub fn parse_csv(text: &str) -> Result<WeightedPointSet> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| Error::parse("line 1", "missing header"))?;
    let names: Vec<String> = header.split(',').map(|s| s.trim().to_ascii_lowercase()).collect();
    let mut coord_cols = Vec::new();
    let mut weight_col = None;
    for (c, name) in names.iter().enumerate() {
        match name.as_str() {
            "x" | "y" | "z" => coord_cols.push((name.clone(), c)),
            "w" if weight_col.is_none() => weight_col = Some(c),
            other => return Err(Error::parse("line 1", format!("unexpected column `{other}`"))),
        }
    }
    let order: Vec<&str> = coord_cols.iter().map(|(n, _)| n.as_str()).collect();
    if order.is_empty() || order != ["x", "y", "z"][..order.len()] {
        return Err(Error::parse("line 1", "coordinate columns must be x, x,y or x,y,z"));
    }
    let dim = coord_cols.len();
    let mut coords = Vec::new();
    let mut weights = Vec::new();
    for (lineno, line) in lines {
        let loc = format!("line {}", lineno + 1);
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != names.len() {
            return Err(Error::parse(loc, format!("expected {} fields, found {}", names.len(), fields.len())));
        }
        let num = |s: &str| -> Result<f64> {
            let v: f64 = s.parse().map_err(|_| Error::parse(loc.clone(), format!("invalid number `{s}`")))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::parse(loc.clone(), "non-finite value"))
            }
        };
        for (_, c) in &coord_cols {
            coords.push(num(fields[*c])?);
        }
        let w = match weight_col {
            Some(c) => num(fields[c])?,
            None => 1.0,
        };
        if w <= 0.0 {
            return Err(Error::parse(loc, "weights must be positive"));
        }
        weights.push(w);
    }
    WeightedPointSet::new(dim, coords, weights)
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<WeightedPointSet> {
    parse_csv(&fs::read_to_string(path)?)
}

/// CSV text for `set`; the weight column is written only when weights differ from one.
pub fn format_csv(set: &WeightedPointSet) -> String {
    let names = ["x", "y", "z"];
    let dim = set.dim();
    let with_w = set.weights().iter().any(|&w| w != 1.0);
    let mut header: Vec<String> = (0..dim).map(|k| names.get(k).map_or(format!("x{k}"), |s| s.to_string())).collect();
    if with_w {
        header.push("w".into());
    }
    let mut out = header.join(",");
    out.push('\n');
    for (p, w) in set.iter() {
        let mut row: Vec<String> = p.iter().map(|v| format!("{v:?}")).collect();
        if with_w {
            row.push(format!("{w:?}"));
        }
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn write_csv(path: impl AsRef<Path>, set: &WeightedPointSet) -> Result<()> {
    if set.dim() > 3 {
        return Err(Error::DimUnsupported(set.dim()));
    }
    fs::write(path, format_csv(set))?;
    Ok(())
}

/// A decoded PGM/PPM image and its maximal sample value.
#[derive(Debug, Clone, PartialEq)]
pub struct PnmImage {
    pub image: ImageGrid,
    pub maxval: u16,
}

fn header_tokens(bytes: &[u8], count: usize) -> Result<(Vec<String>, usize)> {
    let mut tokens = Vec::new();
    let mut pos = 0;
    while tokens.len() < count {
        while pos < bytes.len() && (bytes[pos].is_ascii_whitespace() || bytes[pos] == b'#') {
            if bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                pos += 1;
            }
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::parse(format!("byte {pos}"), "truncated header"));
        }
        tokens.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    if pos >= bytes.len() {
        return Err(Error::parse(format!("byte {pos}"), "missing raster data"));
    }
    Ok((tokens, pos + 1))
}

fn header_number(tok: &str, what: &str) -> Result<usize> {
    tok.parse::<usize>()
        .ok()
        .filter(|v| *v > 0)
        .ok_or_else(|| Error::parse("header", format!("invalid {what} `{tok}`")))
}

/// Decodes binary PGM (`P5`) or PPM (`P6`) data.
pub fn decode_pnm(bytes: &[u8]) -> Result<PnmImage> {
    let (tok, offset) = header_tokens(bytes, 4)?;
    let channels = match tok[0].as_str() {
        "P5" => 1,
        "P6" => 3,
        m => return Err(Error::parse("byte 0", format!("unsupported magic `{m}`"))),
    };
    let width = header_number(&tok[1], "width")?;
    let height = header_number(&tok[2], "height")?;
    let maxval = header_number(&tok[3], "maxval")?;
    if maxval > 65535 {
        return Err(Error::parse("header", "maxval exceeds 65535"));
    }
    let bps = if maxval < 256 { 1 } else { 2 };
    let n = width * height * channels;
    let raster = &bytes[offset..];
    if raster.len() < n * bps {
        return Err(Error::parse(format!("byte {}", bytes.len()), "truncated raster"));
    }
    let data =
        (0..n)
            .map(|k| {
                if bps == 1 {
                    raster[k] as f64
                } else {
                    u16::from_be_bytes([raster[2 * k], raster[2 * k + 1]]) as f64
                }
            })
            .collect();
    Ok(PnmImage { image: ImageGrid::new(vec![height, width], channels, data)?, maxval: maxval as u16 })
}

/// Encodes a 1- or 3-channel planar image, rounding half to even and clamping to `[0, maxval]`.
pub fn encode_pnm(image: &ImageGrid, maxval: u16) -> Result<Vec<u8>> {
    if image.ndim() != 2 {
        return Err(Error::DimUnsupported(image.ndim()));
    }
    let magic = match image.channels() {
        1 => "P5",
        3 => "P6",
        c => return Err(Error::InvalidInput(format!("PNM needs 1 or 3 channels, got {c}"))),
    };
    if maxval == 0 {
        return Err(Error::InvalidInput("maxval must be positive".into()));
    }
    let mut out = format!("{magic}\n{} {}\n{maxval}\n", image.cols(), image.rows()).into_bytes();
    for &v in image.data() {
        let q = v.round_ties_even().clamp(0.0, maxval as f64) as u16;
        if maxval < 256 {
            out.push(q as u8);
        } else {
            out.extend_from_slice(&q.to_be_bytes());
        }
    }
    Ok(out)
}

pub fn read_pnm(path: impl AsRef<Path>) -> Result<PnmImage> {
    decode_pnm(&fs::read(path)?)
}

pub fn write_pnm(path: impl AsRef<Path>, image: &ImageGrid, maxval: u16) -> Result<()> {
    fs::write(path, encode_pnm(image, maxval)?)?;
    Ok(())
}

/// Decodes a PFM file (`Pf` grey or `PF` colour). Rows are stored bottom to top.
pub fn decode_pfm(bytes: &[u8]) -> Result<ImageGrid> {
    let (tok, offset) = header_tokens(bytes, 4)?;
    let channels = match tok[0].as_str() {
        "Pf" => 1,
        "PF" => 3,
        m => return Err(Error::parse("byte 0", format!("unsupported magic `{m}`"))),
    };
    let width = header_number(&tok[1], "width")?;
    let height = header_number(&tok[2], "height")?;
    let scale: f64 = tok[3].parse().map_err(|_| Error::parse("header", "invalid scale"))?;
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::parse("header", "invalid scale"));
    }
    let little = scale < 0.0;
    let row_len = width * channels;
    let raster = &bytes[offset..];
    if raster.len() < 4 * row_len * height {
        return Err(Error::parse(format!("byte {}", bytes.len()), "truncated raster"));
    }
    let mut data = vec![0.0; row_len * height];
    for r in 0..height {
        let dst = height - 1 - r;
        for k in 0..row_len {
            let b = &raster[4 * (r * row_len + k)..4 * (r * row_len + k) + 4];
            let arr = [b[0], b[1], b[2], b[3]];
            let v = if little { f32::from_le_bytes(arr) } else { f32::from_be_bytes(arr) };
            data[dst * row_len + k] = v as f64;
        }
    }
    ImageGrid::new(vec![height, width], channels, data)
}

/// Encodes a planar image as little-endian PFM. Two-channel images get a zero third channel.
pub fn encode_pfm(image: &ImageGrid) -> Result<Vec<u8>> {
    if image.ndim() != 2 {
        return Err(Error::DimUnsupported(image.ndim()));
    }
    let c = image.channels();
    let (magic, out_c) = match c {
        1 => ("Pf", 1),
        2 | 3 => ("PF", 3),
        _ => return Err(Error::InvalidInput(format!("PFM needs 1 to 3 channels, got {c}"))),
    };
    let (h, w) = (image.rows(), image.cols());
    let mut out = format!("{magic}\n{w} {h}\n-1.0\n").into_bytes();
    for r in (0..h).rev() {
        for j in 0..w {
            let px = image.pixel(r, j);
            for k in 0..out_c {
                let v = px.get(k).copied().unwrap_or(0.0) as f32;
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    Ok(out)
}

pub fn read_pfm(path: impl AsRef<Path>) -> Result<ImageGrid> {
    decode_pfm(&fs::read(path)?)
}

pub fn write_pfm(path: impl AsRef<Path>, image: &ImageGrid) -> Result<()> {
    fs::write(path, encode_pfm(image)?)?;
    Ok(())
}
