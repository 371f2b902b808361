//! Structural similarity index between two rasters.
//!
//! Grayscale conversion, 11x11 Gaussian window (sigma 1.5), stabilizers
//! C1 = (0.01 * 255)^2 and C2 = (0.03 * 255)^2, mean over all fully interior
//! windows. Computed with separable convolutions over the five moment planes.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fmath;
use crate::raster::{luma_plane, RgbRaster};

pub const WINDOW: usize = 11;
pub const SIGMA: f64 = 1.5;
const C1: f64 = (0.01 * 255.0) * (0.01 * 255.0);
const C2: f64 = (0.03 * 255.0) * (0.03 * 255.0);

fn gaussian_kernel() -> [f64; WINDOW] {
    let mut k = [0.0; WINDOW];
    let c = (WINDOW / 2) as f64;
    let mut sum = 0.0;
    for (i, v) in k.iter_mut().enumerate() {
        *v = fmath::exp(-((i as f64 - c) * (i as f64 - c)) / (2.0 * SIGMA * SIGMA));
        sum += *v;
    }
    for v in &mut k {
        *v /= sum;
    }
    k
}

/// Valid-mode separable convolution with the 1D Gaussian in both directions.
/// Input w x h, output (w - 10) x (h - 10).
fn filter_valid(plane: &[f64], w: usize, h: usize, kernel: &[f64; WINDOW]) -> Vec<f64> {
    let ow = w - WINDOW + 1;
    let oh = h - WINDOW + 1;
    // Horizontal pass.
    let mut horiz = vec![0.0; ow * h];
    for y in 0..h {
        for x in 0..ow {
            let mut acc = 0.0;
            for (k, coeff) in kernel.iter().enumerate() {
                acc += coeff * plane[y * w + x + k];
            }
            horiz[y * ow + x] = acc;
        }
    }
    // Vertical pass.
    let mut out = vec![0.0; ow * oh];
    for y in 0..oh {
        for x in 0..ow {
            let mut acc = 0.0;
            for (k, coeff) in kernel.iter().enumerate() {
                acc += coeff * horiz[(y + k) * ow + x];
            }
            out[y * ow + x] = acc;
        }
    }
    out
}

/// Mean SSIM between two equal-sized images (at least 11x11).
pub fn ssim(a: &RgbRaster, b: &RgbRaster) -> Result<f64> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(Error::DimensionMismatch {
            a_w: a.width(),
            a_h: a.height(),
            b_w: b.width(),
            b_h: b.height(),
        });
    }
    if a.width() < WINDOW || a.height() < WINDOW {
        return Err(Error::DimensionMismatch {
            a_w: a.width(),
            a_h: a.height(),
            b_w: WINDOW,
            b_h: WINDOW,
        });
    }
    let (w, h) = (a.width(), a.height());
    let xa = luma_plane(a);
    let xb = luma_plane(b);
    let kernel = gaussian_kernel();

    let xa2: Vec<f64> = xa.iter().map(|v| v * v).collect();
    let xb2: Vec<f64> = xb.iter().map(|v| v * v).collect();
    let xab: Vec<f64> = xa.iter().zip(&xb).map(|(p, q)| p * q).collect();

    let mu_a = filter_valid(&xa, w, h, &kernel);
    let mu_b = filter_valid(&xb, w, h, &kernel);
    let e_a2 = filter_valid(&xa2, w, h, &kernel);
    let e_b2 = filter_valid(&xb2, w, h, &kernel);
    let e_ab = filter_valid(&xab, w, h, &kernel);

    let mut total = 0.0;
    for i in 0..mu_a.len() {
        let (ma, mb) = (mu_a[i], mu_b[i]);
        let var_a = e_a2[i] - ma * ma;
        let var_b = e_b2[i] - mb * mb;
        let cov = e_ab[i] - ma * mb;
        let score = ((2.0 * ma * mb + C1) * (2.0 * cov + C2))
            / ((ma * ma + mb * mb + C1) * (var_a + var_b + C2));
        total += score;
    }
    Ok(total / mu_a.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::Rgb;

    /// Independent oracle: direct per-window double loop, no separable
    /// shortcuts shared with the implementation.
    fn ssim_naive(a: &RgbRaster, b: &RgbRaster) -> f64 {
        let (w, h) = (a.width(), a.height());
        let kernel = gaussian_kernel();
        let la = luma_plane(a);
        let lb = luma_plane(b);
        let mut total = 0.0;
        let mut count = 0usize;
        for wy in 0..=(h - WINDOW) {
            for wx in 0..=(w - WINDOW) {
                let (mut ma, mut mb) = (0.0, 0.0);
                for ky in 0..WINDOW {
                    for kx in 0..WINDOW {
                        let wgt = kernel[ky] * kernel[kx];
                        ma += wgt * la[(wy + ky) * w + wx + kx];
                        mb += wgt * lb[(wy + ky) * w + wx + kx];
                    }
                }
                let (mut va, mut vb, mut cov) = (0.0, 0.0, 0.0);
                for ky in 0..WINDOW {
                    for kx in 0..WINDOW {
                        let wgt = kernel[ky] * kernel[kx];
                        let da = la[(wy + ky) * w + wx + kx] - ma;
                        let db = lb[(wy + ky) * w + wx + kx] - mb;
                        va += wgt * da * da;
                        vb += wgt * db * db;
                        cov += wgt * da * db;
                    }
                }
                total += ((2.0 * ma * mb + C1) * (2.0 * cov + C2))
                    / ((ma * ma + mb * mb + C1) * (va + vb + C2));
                count += 1;
            }
        }
        total / count as f64
    }

    fn checkerboard(w: usize, h: usize, cell: usize) -> RgbRaster {
        let mut img = RgbRaster::filled(w, h, Rgb::WHITE);
        for y in 0..h {
            for x in 0..w {
                if (x / cell + y / cell) % 2 == 0 {
                    img.set(x, y, Rgb::BLACK);
                }
            }
        }
        img
    }

    fn negative(img: &RgbRaster) -> RgbRaster {
        let data = img
            .data()
            .iter()
            .map(|p| Rgb::new(255 - p.r, 255 - p.g, 255 - p.b))
            .collect();
        RgbRaster::from_data(img.width(), img.height(), data)
    }

    #[test]
    fn identical_images_score_one() {
        let img = checkerboard(40, 32, 4);
        let s = ssim(&img, &img).unwrap();
        assert!((s - 1.0).abs() < 1e-12, "{s}");
    }

    #[test]
    fn negative_image_scores_strongly_below_half() {
        let img = checkerboard(48, 48, 6);
        let neg = negative(&img);
        let s = ssim(&img, &neg).unwrap();
        let oracle = ssim_naive(&img, &neg);
        assert!((s - oracle).abs() < 1e-9, "impl {s} vs oracle {oracle}");
        assert!(s < 0.0, "negative structure should score below zero, got {s}");
    }

    #[test]
    fn single_black_pixel_barely_dents_white() {
        let white = RgbRaster::filled(200, 200, Rgb::WHITE);
        let mut dented = white.clone();
        dented.set(100, 100, Rgb::BLACK);
        let s = ssim(&white, &dented).unwrap();
        let oracle = ssim_naive(&white, &dented);
        assert!((s - oracle).abs() < 1e-9);
        assert!(s >= 0.99, "{s}");
    }

    #[test]
    fn matches_naive_oracle_on_textured_pair() {
        let mut a = checkerboard(50, 41, 5);
        let mut b = checkerboard(50, 41, 5);
        for i in 0..50usize {
            let x = (i * 7) % 50;
            let y = (i * 11) % 41;
            a.set(x, y, Rgb::new((i * 13 % 256) as u8, 100, 50));
            b.set((x + 3) % 50, y, Rgb::new(30, (i * 29 % 256) as u8, 200));
        }
        let s = ssim(&a, &b).unwrap();
        let oracle = ssim_naive(&a, &b);
        assert!((s - oracle).abs() < 1e-9, "impl {s} vs oracle {oracle}");
    }

    #[test]
    fn symmetric_in_its_arguments() {
        let a = checkerboard(36, 36, 3);
        let mut b = checkerboard(36, 36, 4);
        b.set(10, 10, Rgb::new(200, 10, 10));
        assert_eq!(ssim(&a, &b).unwrap(), ssim(&b, &a).unwrap());
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let a = RgbRaster::filled(32, 32, Rgb::WHITE);
        let b = RgbRaster::filled(33, 32, Rgb::WHITE);
        assert!(matches!(ssim(&a, &b), Err(Error::DimensionMismatch { .. })));
        let tiny = RgbRaster::filled(8, 8, Rgb::WHITE);
        assert!(ssim(&tiny, &tiny).is_err());
    }
}
