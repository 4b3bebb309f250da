use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use image::codecs::jpeg::JpegEncoder;
use image::codecs::png::PngEncoder;
use image::imageops::{self, FilterType};
use image::{ImageEncoder, RgbImage};
use thiserror::Error;

use super::{AffineParams, PseudoVideoSpec};
use crate::corpus::Corpus;

pub const JPEG_QUALITY: u8 = 90;

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("sample {sample_id}: cannot decode {path}: {source}")]
    Decode {
        sample_id: String,
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
    #[error("sample {0} is not in the corpus")]
    UnknownSample(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot encode {path}: {source}")]
    Encode {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
}

/// On-disk encoding of rendered frames.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FrameFormat {
    #[default]
    Jpeg,
    /// PNG, for pixel-exact comparisons.
    Lossless,
}

impl FrameFormat {
    pub fn extension(self) -> &'static str {
        match self {
            FrameFormat::Jpeg => "jpg",
            FrameFormat::Lossless => "png",
        }
    }
}

/// `videos/{video_id}/frame_{index:05}.{ext}`, relative to the output root.
pub fn frame_path(video_id: &str, index: usize, format: FrameFormat) -> String {
    format!("videos/{video_id}/frame_{index:05}.{}", format.extension())
}

/// Resize so the shorter side equals `side`, then centre-crop to a square.
fn fit_square(img: &RgbImage, side: u32) -> RgbImage {
    let (w, h) = img.dimensions();
    let (nw, nh) = if w <= h {
        (
            side,
            ((h as u64 * side as u64 + w as u64 / 2) / w as u64).max(side as u64) as u32,
        )
    } else {
        (
            ((w as u64 * side as u64 + h as u64 / 2) / h as u64).max(side as u64) as u32,
            side,
        )
    };
    let resized = if (nw, nh) == (w, h) {
        img.clone()
    } else {
        imageops::resize(img, nw, nh, FilterType::Triangle)
    };
    let x0 = (nw - side) / 2;
    let y0 = (nh - side) / 2;
    imageops::crop_imm(&resized, x0, y0, side, side).to_image()
}

/// Applies `params` about the image centre with bilinear sampling; source
/// coordinates outside the image take the nearest edge pixel.
pub fn warp(src: &RgbImage, params: &AffineParams) -> RgbImage {
    if params.is_identity() {
        return src.clone();
    }
    let (w, h) = src.dimensions();
    let (cx, cy) = (w as f64 / 2.0, h as f64 / 2.0);
    let (sin, cos) = params.rotation_deg.to_radians().sin_cos();
    let tx = params.translate_x_frac * w as f64;
    let ty = params.translate_y_frac * h as f64;
    let inv_s = 1.0 / params.scale;
    let max_x = (w - 1) as f64;
    let max_y = (h - 1) as f64;
    let raw = src.as_raw();
    let stride = w as usize * 3;

    let mut out = RgbImage::new(w, h);
    for (x, y, px) in out.enumerate_pixels_mut() {
        let dx = x as f64 + 0.5 - cx - tx;
        let dy = y as f64 + 0.5 - cy - ty;
        // inverse rotation, then inverse scale
        let sx = (cos * dx + sin * dy) * inv_s + cx - 0.5;
        let sy = (-sin * dx + cos * dy) * inv_s + cy - 0.5;
        let sx = sx.clamp(0.0, max_x);
        let sy = sy.clamp(0.0, max_y);
        let x0 = sx.floor() as usize;
        let y0 = sy.floor() as usize;
        let x1 = (x0 + 1).min(w as usize - 1);
        let y1 = (y0 + 1).min(h as usize - 1);
        let fx = sx - x0 as f64;
        let fy = sy - y0 as f64;
        for c in 0..3 {
            let p00 = raw[y0 * stride + x0 * 3 + c] as f64;
            let p10 = raw[y0 * stride + x1 * 3 + c] as f64;
            let p01 = raw[y1 * stride + x0 * 3 + c] as f64;
            let p11 = raw[y1 * stride + x1 * 3 + c] as f64;
            let top = p00 + (p10 - p00) * fx;
            let bottom = p01 + (p11 - p01) * fx;
            px.0[c] = (top + (bottom - top) * fy).round().clamp(0.0, 255.0) as u8;
        }
    }
    out
}

fn write_frame(img: &RgbImage, path: &Path, format: FrameFormat) -> Result<(), RenderError> {
    let file = File::create(path).map_err(|source| RenderError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut writer = BufWriter::new(file);
    let (w, h) = img.dimensions();
    let result = match format {
        FrameFormat::Jpeg => JpegEncoder::new_with_quality(&mut writer, JPEG_QUALITY).write_image(
            img.as_raw(),
            w,
            h,
            image::ExtendedColorType::Rgb8,
        ),
        FrameFormat::Lossless => {
            PngEncoder::new(&mut writer).write_image(img.as_raw(), w, h, image::ExtendedColorType::Rgb8)
        }
    };
    result.map_err(|source| RenderError::Encode {
        path: path.to_path_buf(),
        source,
    })
}

/// Renders every frame of `spec` under `out_dir` and returns the frame paths
/// relative to `out_dir`, in temporal order.
pub fn render_frames(
    spec: &PseudoVideoSpec,
    corpus: &Corpus,
    out_dir: &Path,
    resolution: u32,
    format: FrameFormat,
) -> Result<Vec<String>, RenderError> {
    let video_dir = out_dir.join("videos").join(&spec.video_id);
    fs::create_dir_all(&video_dir).map_err(|source| RenderError::Io {
        path: video_dir.clone(),
        source,
    })?;

    let mut frames = Vec::with_capacity(spec.total_frames);
    for scene in &spec.scenes {
        let sample = corpus
            .get(&scene.sample_id)
            .ok_or_else(|| RenderError::UnknownSample(scene.sample_id.clone()))?;
        let path = corpus.resolve_image(sample);
        let decoded = image::open(&path).map_err(|source| RenderError::Decode {
            sample_id: scene.sample_id.clone(),
            path: path.clone(),
            source,
        })?;
        let base = fit_square(&decoded.to_rgb8(), resolution);
        for params in &scene.affine_track {
            let rel = frame_path(&spec.video_id, frames.len(), format);
            write_frame(&warp(&base, params), &out_dir.join(&rel), format)?;
            frames.push(rel);
        }
    }
    Ok(frames)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::CaptionedSample;
    use crate::pseudo_video::{AffineBounds, SceneSpec};
    use image::Rgb;

    fn gradient(w: u32, h: u32, tint: u8) -> RgbImage {
        RgbImage::from_fn(w, h, |x, y| Rgb([(x * 255 / w) as u8, (y * 255 / h) as u8, tint]))
    }

    fn setup(dir: &Path) -> Corpus {
        gradient(80, 60, 10).save(dir.join("a.png")).unwrap();
        gradient(50, 90, 200).save(dir.join("b.png")).unwrap();
        Corpus::new(
            vec![
                CaptionedSample::new("a", "a.png", "first"),
                CaptionedSample::new("b", "b.png", "second"),
            ],
            dir,
        )
        .unwrap()
    }

    fn scene(id: &str, track: Vec<AffineParams>) -> SceneSpec {
        SceneSpec {
            scene_index: 0,
            sample_id: id.into(),
            caption: id.into(),
            duration_frames: track.len(),
            affine_track: track,
        }
    }

    #[test]
    fn fit_square_dimensions() {
        assert_eq!(fit_square(&gradient(80, 60, 0), 32).dimensions(), (32, 32));
        assert_eq!(fit_square(&gradient(30, 90, 0), 32).dimensions(), (32, 32));
    }

    #[test]
    fn warp_identity_and_pure_translation() {
        let img = gradient(40, 40, 7);
        assert_eq!(warp(&img, &AffineParams::IDENTITY), img);
        let shifted = warp(
            &img,
            &AffineParams {
                translate_x_frac: 0.1,
                ..AffineParams::IDENTITY
            },
        );
        // a 4-pixel shift right: output x reads source x-4, edge replicated on the left
        assert_eq!(shifted.get_pixel(20, 5), img.get_pixel(16, 5));
        assert_eq!(shifted.get_pixel(0, 5), img.get_pixel(0, 5));
    }

    #[test]
    fn renders_sum_of_durations_in_order() {
        let dir = tempfile::tempdir().unwrap();
        let corpus = setup(dir.path());
        let mut rng = crate::seed::stream_rng(0, crate::seed::Stream::Structure);
        let b = AffineBounds::default();
        let spec = PseudoVideoSpec::from_scenes(
            "v",
            vec![
                scene("a", crate::pseudo_video::sample_affine_walk(2, &b, &mut rng)),
                scene("b", crate::pseudo_video::sample_affine_walk(3, &b, &mut rng)),
            ],
            0,
            2,
        );
        let out = dir.path().join("out");
        let frames = render_frames(&spec, &corpus, &out, 48, FrameFormat::Jpeg).unwrap();
        let expected: Vec<_> = (0..5).map(|i| format!("videos/v/frame_{i:05}.jpg")).collect();
        assert_eq!(frames, expected);
        let first: Vec<Vec<u8>> = frames.iter().map(|f| fs::read(out.join(f)).unwrap()).collect();
        let again = render_frames(&spec, &corpus, &out, 48, FrameFormat::Jpeg).unwrap();
        let second: Vec<Vec<u8>> = again.iter().map(|f| fs::read(out.join(f)).unwrap()).collect();
        assert_eq!(first, second);
        let decoded = image::open(out.join(&frames[0])).unwrap();
        assert_eq!((decoded.width(), decoded.height()), (48, 48));
    }

    #[test]
    fn identity_track_gives_identical_frames() {
        let dir = tempfile::tempdir().unwrap();
        let corpus = setup(dir.path());
        let spec = PseudoVideoSpec::from_scenes("v", vec![scene("a", vec![AffineParams::IDENTITY; 4])], 0, 1);
        let out = dir.path().join("out");
        let frames = render_frames(&spec, &corpus, &out, 32, FrameFormat::Lossless).unwrap();
        let imgs: Vec<_> = frames
            .iter()
            .map(|f| image::open(out.join(f)).unwrap().to_rgb8())
            .collect();
        assert!(imgs.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn undecodable_image_names_sample() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("bad.jpg"), b"not an image").unwrap();
        let corpus = Corpus::new(vec![CaptionedSample::new("bad", "bad.jpg", "x")], dir.path()).unwrap();
        let spec = PseudoVideoSpec::from_scenes("v", vec![scene("bad", vec![AffineParams::IDENTITY])], 0, 1);
        let err = render_frames(&spec, &corpus, &dir.path().join("out"), 16, FrameFormat::Jpeg).unwrap_err();
        assert!(matches!(err, RenderError::Decode { ref sample_id, .. } if sample_id == "bad"));
    }
}
