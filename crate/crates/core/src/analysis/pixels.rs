//! Latent pixel images, median masks and PGM export.

use std::fs;
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::factor::FactorModel;
use crate::interchange::DatasetBundle;

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelImage {
    pub name: String,
    /// `height x width`.
    pub values: Array2<f64>,
}

/// Column `factor` of every `P_i`, reshaped to its channel's image shape.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentPixelImage {
    pub factor_index: usize,
    pub channels: Vec<ChannelImage>,
}

/// Binary mask, one `height x width` plane per channel, entries 0 or 1.
pub type Mask = Vec<Array2<u8>>;

fn reshape(values: Vec<f64>, height: usize, width: usize, what: &str) -> Result<Array2<f64>> {
    let len = values.len();
    Array2::from_shape_vec((height, width), values)
        .map_err(|_| Error::shape(what, format!("{height}x{width}"), format!("{len} values")))
}

pub fn latent_pixel_image(
    model: &FactorModel,
    bundle: &DatasetBundle,
    factor: usize,
) -> Result<LatentPixelImage> {
    if model.pixel.is_empty() || bundle.is_activations_only() {
        return Err(Error::NoPixelFactors);
    }
    model.check_compatible(bundle)?;
    if factor >= model.rank() {
        return Err(Error::IndexOutOfRange {
            what: "factor",
            index: factor,
            limit: model.rank(),
        });
    }
    let channels = model
        .pixel
        .iter()
        .zip(bundle.channels())
        .map(|(p, c)| {
            Ok(ChannelImage {
                name: c.spec.name.clone(),
                values: reshape(
                    p.column(factor).to_vec(),
                    c.spec.height,
                    c.spec.width,
                    &c.spec.name,
                )?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LatentPixelImage {
        factor_index: factor,
        channels,
    })
}

/// Example `k` of the bundle as one image per channel.
pub fn example_image(bundle: &DatasetBundle, k: usize) -> Result<Vec<ChannelImage>> {
    if k >= bundle.num_examples() {
        return Err(Error::IndexOutOfRange {
            what: "example",
            index: k,
            limit: bundle.num_examples(),
        });
    }
    bundle
        .channels()
        .iter()
        .map(|c| {
            Ok(ChannelImage {
                name: c.spec.name.clone(),
                values: reshape(
                    c.data.column(k).to_vec(),
                    c.spec.height,
                    c.spec.width,
                    &c.spec.name,
                )?,
            })
        })
        .collect()
}

/// Median of `values`; an even count takes the midpoint of the two middle
/// order statistics.
pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "median of an empty set");
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// 1 where the value is strictly above the plane's median, else 0.
pub fn median_mask_plane(values: &Array2<f64>) -> Array2<u8> {
    let flat: Vec<f64> = values.iter().copied().collect();
    let m = median(&flat);
    values.mapv(|v| u8::from(v > m))
}

pub fn median_mask(img: &LatentPixelImage, channel: usize) -> Result<Array2<u8>> {
    let c = img.channels.get(channel).ok_or(Error::IndexOutOfRange {
        what: "channel",
        index: channel,
        limit: img.channels.len(),
    })?;
    Ok(median_mask_plane(&c.values))
}

/// Per-channel median masks of a latent image.
pub fn median_masks(img: &LatentPixelImage) -> Mask {
    img.channels
        .iter()
        .map(|c| median_mask_plane(&c.values))
        .collect()
}

/// Multiplies each channel of `image` by the matching mask plane.
pub fn apply_mask(mask: &[Array2<u8>], image: &[ChannelImage]) -> Result<Vec<ChannelImage>> {
    if mask.len() != image.len() {
        return Err(Error::shape(
            "mask",
            format!("{} channels", image.len()),
            format!("{} channels", mask.len()),
        ));
    }
    mask.iter()
        .zip(image)
        .map(|(m, c)| {
            if m.dim() != c.values.dim() {
                return Err(Error::shape(
                    format!("mask for `{}`", c.name),
                    format!("{:?}", c.values.dim()),
                    format!("{:?}", m.dim()),
                ));
            }
            let mut values = c.values.clone();
            values.zip_mut_with(m, |v, &b| *v *= f64::from(b));
            Ok(ChannelImage {
                name: c.name.clone(),
                values,
            })
        })
        .collect()
}

/// Binary PGM (P5, maxval 255). Values are rescaled so the plane's minimum
/// maps to 0 and its maximum to 255; a constant plane is all 0.
pub fn pgm_bytes(values: &Array2<f64>) -> Vec<u8> {
    let (h, w) = values.dim();
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
    out.extend(values.iter().map(|&v| {
        if span > 0.0 {
            ((v - lo) / span * 255.0).round().clamp(0.0, 255.0) as u8
        } else {
            0
        }
    }));
    out
}

pub fn write_pgm(values: &Array2<f64>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, pgm_bytes(values)).map_err(|e| Error::io(path, e))
}
