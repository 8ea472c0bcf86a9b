//! Images as lateral-slice tensors, and static plots.
//!
//! An `h x w` image becomes an `h x c x w` tensor with one lateral slice per
//! channel (`c = 1` grayscale, `c = 3` RGB). Row `i`, column `k` of channel
//! `j` is entry `(i, j, k)`. 8-bit intensities are scaled to `[0, 1]` on
//! import and clamped back on export.

use std::fmt::Write as _;
use std::path::Path;

use image::{DynamicImage, GrayImage, ImageBuffer, Luma, Rgb, RgbImage};

use crate::error::{Error, Result};
use crate::tensor::Tensor3;

fn to_byte(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

pub fn image_to_tensor(img: &DynamicImage, force_gray: bool) -> Tensor3 {
    let (w, h) = (img.width() as usize, img.height() as usize);
    let is_gray = force_gray || matches!(img.color().channel_count(), 1 | 2);
    if is_gray {
        let g = img.to_luma8();
        Tensor3::from_fn(h, 1, w, |i, _, k| g.get_pixel(k as u32, i as u32)[0] as f64 / 255.0)
    } else {
        let c = img.to_rgb8();
        Tensor3::from_fn(h, 3, w, |i, j, k| c.get_pixel(k as u32, i as u32)[j] as f64 / 255.0)
    }
}

pub fn tensor_to_image(t: &Tensor3) -> Result<DynamicImage> {
    let (h, c, w) = t.shape();
    match c {
        1 => Ok(DynamicImage::ImageLuma8(GrayImage::from_fn(w as u32, h as u32, |x, y| {
            Luma([to_byte(t.get(y as usize, 0, x as usize))])
        }))),
        3 => Ok(DynamicImage::ImageRgb8(RgbImage::from_fn(w as u32, h as u32, |x, y| {
            let p = |j| to_byte(t.get(y as usize, j, x as usize));
            Rgb([p(0), p(1), p(2)])
        }))),
        _ => Err(Error::DimensionMismatch(format!("{c} lateral slices cannot be shown as an image (need 1 or 3)"))),
    }
}

pub fn load_image(path: impl AsRef<Path>, force_gray: bool) -> Result<Tensor3> {
    Ok(image_to_tensor(&image::open(path)?, force_gray))
}

pub fn save_image(path: impl AsRef<Path>, t: &Tensor3) -> Result<()> {
    tensor_to_image(t)?.save(path)?;
    Ok(())
}

/// Places equally sized image tensors side by side with a white gap.
pub fn save_panel(path: impl AsRef<Path>, parts: &[&Tensor3]) -> Result<()> {
    const GAP: u32 = 6;
    let first = parts.first().ok_or_else(|| Error::InvalidParameter("empty panel".into()))?;
    let (h, c, w) = first.shape();
    if parts.iter().any(|p| p.shape() != (h, c, w)) {
        return Err(Error::DimensionMismatch("panel images differ in shape".into()));
    }
    let (w, h) = (w as u32, h as u32);
    let total = parts.len() as u32 * w + (parts.len() as u32 - 1) * GAP;
    let mut canvas: ImageBuffer<Rgb<u8>, Vec<u8>> = ImageBuffer::from_pixel(total, h, Rgb([255, 255, 255]));
    for (n, part) in parts.iter().enumerate() {
        let rgb = tensor_to_image(part)?.to_rgb8();
        image::imageops::replace(&mut canvas, &rgb, (n as u32 * (w + GAP)) as i64, 0);
    }
    canvas.save(path)?;
    Ok(())
}

/// Log-log SVG plot of relative error against `μ`, marking the minimum.
pub fn sweep_svg(points: &[(f64, f64)]) -> Result<String> {
    let pts: Vec<(f64, f64)> = points.iter().filter(|(m, e)| *m > 0.0 && *e > 0.0).cloned().collect();
    if pts.is_empty() {
        return Err(Error::InvalidParameter("no positive points to plot".into()));
    }
    let (w, h, pad) = (640.0, 420.0, 60.0);
    let lx: Vec<f64> = pts.iter().map(|p| p.0.log10()).collect();
    let ly: Vec<f64> = pts.iter().map(|p| p.1.log10()).collect();
    let span = |v: &[f64]| {
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if hi - lo < 1e-12 {
            (lo - 0.5, hi + 0.5)
        } else {
            (lo, hi)
        }
    };
    let (x0, x1) = span(&lx);
    let (y0, y1) = span(&ly);
    let sx = |x: f64| pad + (x - x0) / (x1 - x0) * (w - 2.0 * pad);
    let sy = |y: f64| h - pad - (y - y0) / (y1 - y0) * (h - 2.0 * pad);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{pad}" y="{pad}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        w - 2.0 * pad,
        h - 2.0 * pad
    );
    for d in (x0.ceil() as i32)..=(x1.floor() as i32) {
        let x = sx(d as f64);
        let _ = writeln!(s, r##"<line x1="{x:.1}" y1="{}" x2="{x:.1}" y2="{pad}" stroke="#ddd"/>"##, h - pad);
        let _ = writeln!(s, r#"<text x="{x:.1}" y="{}" font-size="12" text-anchor="middle">1e{d}</text>"#, h - pad + 18.0);
    }
    let _ = writeln!(s, r#"<text x="{:.1}" y="{}" font-size="14" text-anchor="middle">μ</text>"#, w / 2.0, h - 12.0);
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.1}" font-size="14" transform="rotate(-90 16 {:.1})" text-anchor="middle">relative error</text>"#,
        h / 2.0,
        h / 2.0
    );
    let _ = writeln!(s, r#"<text x="{}" y="{:.1}" font-size="12" text-anchor="end">{:.3e}</text>"#, pad - 4.0, sy(y1) + 4.0, 10f64.powf(y1));
    let _ = writeln!(s, r#"<text x="{}" y="{:.1}" font-size="12" text-anchor="end">{:.3e}</text>"#, pad - 4.0, sy(y0) + 4.0, 10f64.powf(y0));
    let path: Vec<String> = lx.iter().zip(&ly).map(|(x, y)| format!("{:.2},{:.2}", sx(*x), sy(*y))).collect();
    let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="2"/>"#, path.join(" "));
    let best = ly.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).map(|(i, _)| i).unwrap_or(0);
    let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="5" fill="crimson"/>"#, sx(lx[best]), sy(ly[best]));
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-size="12" fill="crimson">μ = {:.3e}, E = {:.4}</text>"#,
        sx(lx[best]) + 8.0,
        sy(ly[best]) - 8.0,
        pts[best].0,
        pts[best].1
    );
    s.push_str("</svg>\n");
    Ok(s)
}
