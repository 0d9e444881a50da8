//! 8-bit raster images with one (grey) or three (RGB) channels.

use alloc::vec::Vec;
use core::fmt;

#[derive(Clone, PartialEq, Eq)]
pub struct Image {
    width: u32,
    height: u32,
    channels: u8,
    data: Vec<u8>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ImageError {
    /// Only 1 and 3 channels are supported.
    Channels(u8),
    ZeroSize,
    /// `data` length does not match `width * height * channels`.
    Length { expected: usize, found: usize },
}

impl fmt::Display for ImageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ImageError::Channels(c) => write!(f, "unsupported channel count {c}"),
            ImageError::ZeroSize => f.write_str("image has a zero dimension"),
            ImageError::Length { expected, found } => {
                write!(f, "expected {expected} samples, found {found}")
            }
        }
    }
}

impl core::error::Error for ImageError {}

impl fmt::Debug for Image {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Image")
            .field("width", &self.width)
            .field("height", &self.height)
            .field("channels", &self.channels)
            .finish_non_exhaustive()
    }
}

impl Image {
    /// Interleaved samples, row-major.
    pub fn new(width: u32, height: u32, channels: u8, data: Vec<u8>) -> Result<Self, ImageError> {
        if channels != 1 && channels != 3 {
            return Err(ImageError::Channels(channels));
        }
        if width == 0 || height == 0 {
            return Err(ImageError::ZeroSize);
        }
        let expected = width as usize * height as usize * channels as usize;
        if data.len() != expected {
            return Err(ImageError::Length {
                expected,
                found: data.len(),
            });
        }
        Ok(Image {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn grey(width: u32, height: u32, data: Vec<u8>) -> Result<Self, ImageError> {
        Image::new(width, height, 1, data)
    }

    /// Grey image from a function of `(x, y)`.
    pub fn from_fn(width: u32, height: u32, f: impl Fn(u32, u32) -> u8) -> Result<Self, ImageError> {
        let mut data = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Image::grey(width, height, data)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn channels(&self) -> u8 {
        self.channels
    }

    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    /// Samples of the pixel with row-major index `i`.
    pub fn pixel(&self, i: usize) -> &[u8] {
        let c = self.channels as usize;
        &self.data[i * c..(i + 1) * c]
    }

    pub fn at(&self, x: u32, y: u32) -> &[u8] {
        self.pixel(y as usize * self.width as usize + x as usize)
    }

    /// Squared Euclidean distance between two pixels' colors.
    pub fn distance2(&self, i: usize, j: usize) -> u32 {
        self.pixel(i)
            .iter()
            .zip(self.pixel(j))
            .map(|(&a, &b)| {
                let d = a as i32 - b as i32;
                (d * d) as u32
            })
            .sum()
    }
}
