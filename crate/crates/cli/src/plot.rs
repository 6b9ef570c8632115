//! Minimal PNG renderers for inspection plots.

use std::path::Path;

use image::{Rgb, RgbImage};

const WHITE: Rgb<u8> = Rgb([255, 255, 255]);
const AXIS: Rgb<u8> = Rgb([120, 120, 120]);
pub const BLUE: Rgb<u8> = Rgb([31, 119, 180]);
pub const ORANGE: Rgb<u8> = Rgb([255, 127, 14]);

/// A plot to be rendered once the output directory exists.
#[derive(Debug, Clone, PartialEq)]
pub enum Plot {
    Spacetime(Vec<Vec<f64>>),
    Lines(Vec<(Vec<(f64, f64)>, Rgb<u8>)>),
    Histogram(Vec<f64>, usize),
}

impl Plot {
    pub fn render(&self, path: &Path) -> image::ImageResult<()> {
        match self {
            Self::Spacetime(rows) => spacetime(rows, path),
            Self::Lines(series) => {
                let borrowed: Vec<(&[(f64, f64)], Rgb<u8>)> = series.iter().map(|(s, c)| (s.as_slice(), *c)).collect();
                lines(&borrowed, path)
            }
            Self::Histogram(values, bins) => histogram(values, *bins, path),
        }
    }
}

fn finite_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo < 1e-300 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

/// Diverging blue-white-red map on `s ∈ [0, 1]`.
fn diverging(s: f64) -> Rgb<u8> {
    let s = s.clamp(0.0, 1.0);
    let (r, g, b) = if s < 0.5 {
        let w = s / 0.5;
        (w, w, 1.0)
    } else {
        let w = (1.0 - s) / 0.5;
        (1.0, w, w)
    };
    Rgb([(r * 255.0) as u8, (g * 255.0) as u8, (b * 255.0) as u8])
}

/// Rows are times (top to bottom), columns are grid nodes.
pub fn spacetime(rows: &[Vec<f64>], path: &Path) -> image::ImageResult<()> {
    let height = rows.len().max(1) as u32;
    let width = rows.first().map_or(1, Vec::len).max(1) as u32;
    let (lo, hi) = finite_range(rows.iter().flatten().copied());
    let m = lo.abs().max(hi.abs()).max(1e-300);
    let mut img = RgbImage::new(width, height);
    for (y, row) in rows.iter().enumerate() {
        for (x, v) in row.iter().enumerate() {
            img.put_pixel(x as u32, y as u32, diverging(0.5 + 0.5 * v / m));
        }
    }
    let scale = (512 / width).max(1).min((512 / height).max(1));
    let img = image::imageops::resize(&img, width * scale, height * scale, image::imageops::FilterType::Nearest);
    img.save(path)
}

fn draw_axes(img: &mut RgbImage, margin: u32) {
    let (w, h) = img.dimensions();
    for x in margin..w - margin {
        img.put_pixel(x, h - margin, AXIS);
    }
    for y in margin..=h - margin {
        img.put_pixel(margin, y, AXIS);
    }
}

fn plot_line(img: &mut RgbImage, pts: &[(f64, f64)], xr: (f64, f64), yr: (f64, f64), margin: u32, color: Rgb<u8>) {
    let (w, h) = img.dimensions();
    let (pw, ph) = ((w - 2 * margin) as f64, (h - 2 * margin) as f64);
    let to_px = |(x, y): (f64, f64)| {
        (
            margin as f64 + (x - xr.0) / (xr.1 - xr.0) * pw,
            (h - margin) as f64 - (y - yr.0) / (yr.1 - yr.0) * ph,
        )
    };
    for seg in pts.windows(2) {
        let (a, b) = (to_px(seg[0]), to_px(seg[1]));
        let steps = ((b.0 - a.0).abs().max((b.1 - a.1).abs()).ceil() as usize).max(1);
        for i in 0..=steps {
            let s = i as f64 / steps as f64;
            let (x, y) = (a.0 + s * (b.0 - a.0), a.1 + s * (b.1 - a.1));
            if x >= 0.0 && y >= 0.0 && (x as u32) < w && (y as u32) < h {
                img.put_pixel(x as u32, y as u32, color);
            }
        }
    }
}

/// Overlaid line plots sharing axes.
pub fn lines(series: &[(&[(f64, f64)], Rgb<u8>)], path: &Path) -> image::ImageResult<()> {
    let margin = 20;
    let mut img = RgbImage::from_pixel(640, 400, WHITE);
    draw_axes(&mut img, margin);
    let xr = finite_range(series.iter().flat_map(|(s, _)| s.iter().map(|p| p.0)));
    let yr = finite_range(series.iter().flat_map(|(s, _)| s.iter().map(|p| p.1)));
    for (pts, color) in series {
        plot_line(&mut img, pts, xr, yr, margin, *color);
    }
    img.save(path)
}

/// Histogram of values in `[0, 1)`.
pub fn histogram(values: &[f64], bins: usize, path: &Path) -> image::ImageResult<()> {
    let margin = 20;
    let nb = bins.max(1);
    let mut counts = vec![0usize; nb];
    for v in values {
        let b = (v.rem_euclid(1.0) * nb as f64) as usize;
        counts[b.min(nb - 1)] += 1;
    }
    let peak = counts.iter().copied().max().unwrap_or(1).max(1) as f64;
    let mut img = RgbImage::from_pixel(640, 400, WHITE);
    draw_axes(&mut img, margin);
    let (w, h) = img.dimensions();
    let bar = (w - 2 * margin) as f64 / counts.len() as f64;
    for (i, c) in counts.iter().enumerate() {
        let top = (h - margin) as f64 - *c as f64 / peak * (h - 2 * margin) as f64;
        let x0 = margin as f64 + i as f64 * bar;
        for x in x0 as u32..((x0 + bar) as u32).min(w - margin) {
            for y in top as u32..h - margin {
                img.put_pixel(x, y, BLUE);
            }
        }
    }
    img.save(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn colormap_endpoints() {
        assert_eq!(diverging(0.0), Rgb([0, 0, 255]));
        assert_eq!(diverging(0.5), Rgb([255, 255, 255]));
        assert_eq!(diverging(1.0), Rgb([255, 0, 0]));
    }

    #[test]
    fn renders_png_files() {
        let dir = tempfile::tempdir().unwrap();
        spacetime(&[vec![0.0, 1.0], vec![-1.0, 0.5]], &dir.path().join("a.png")).unwrap();
        lines(&[(&[(0.0, 0.0), (1.0, 1.0)], BLUE)], &dir.path().join("b.png")).unwrap();
        histogram(&[0.1, 0.2, 0.25], 10, &dir.path().join("c.png")).unwrap();
        for f in ["a.png", "b.png", "c.png"] {
            assert!(dir.path().join(f).metadata().unwrap().len() > 0);
        }
    }
}
