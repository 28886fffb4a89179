//! Bottleneck tensor quantization for transmission.
//!
//! Three payload precisions are supported:
//!
//! - 32-bit: identity passthrough (big-endian IEEE-754 singles on the wire)
//! - 16-bit: IEEE-754 half precision, round-to-nearest-even, lossless in
//!   exponent-compatible ranges
//! - 8-bit: per-tensor affine min-max mapping to unsigned codes, so the
//!   round-trip error per element is bounded by (max - min) / 510
//!
//! The scale/zero-point pair travels in the wire frame's per-tensor header;
//! payload bytes are exactly `element_count * bits / 8`.

use half::f16;
use thiserror::Error;

use crate::profiles::QuantBits;

#[derive(Debug, Error, PartialEq)]
pub enum QuantError {
    #[error("tensor value at index {index} is not finite")]
    NonFinite { index: usize },
    #[error("tensor has {got} values but dims {dims:?} require {expected}")]
    ElementCount {
        dims: (u16, u16, u16),
        expected: usize,
        got: usize,
    },
    #[error("code payload is {got} B but dims and precision require {expected} B")]
    CodeLength { expected: usize, got: usize },
}

/// Tensor shape: channels, height, width.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TensorDims {
    pub channels: u16,
    pub height: u16,
    pub width: u16,
}

impl TensorDims {
    pub fn new(channels: u16, height: u16, width: u16) -> Self {
        Self {
            channels,
            height,
            width,
        }
    }

    pub fn element_count(&self) -> usize {
        self.channels as usize * self.height as usize * self.width as usize
    }
}

/// Full-precision bottleneck output for one camera.
#[derive(Debug, Clone, PartialEq)]
pub struct BottleneckTensor {
    pub dims: TensorDims,
    pub camera_index: u8,
    pub values: Vec<f32>,
}

impl BottleneckTensor {
    pub fn new(dims: TensorDims, camera_index: u8, values: Vec<f32>) -> Result<Self, QuantError> {
        if values.len() != dims.element_count() {
            return Err(QuantError::ElementCount {
                dims: (dims.channels, dims.height, dims.width),
                expected: dims.element_count(),
                got: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(QuantError::NonFinite { index });
        }
        Ok(Self {
            dims,
            camera_index,
            values,
        })
    }
}

/// Quantized payload plus the metadata needed to invert it.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedTensor {
    pub dims: TensorDims,
    pub bits: QuantBits,
    pub scale: f32,
    pub zero_point: f32,
    /// Packed big-endian codes, `element_count * bits / 8` bytes.
    pub codes: Vec<u8>,
}

impl QuantizedTensor {
    pub fn payload_bytes(&self) -> usize {
        self.codes.len()
    }

    fn expected_code_len(&self) -> usize {
        self.dims.element_count() * self.bits.bytes_per_element() as usize
    }
}

/// Quantizes a tensor to the requested precision.
pub fn quantize(t: &BottleneckTensor, bits: QuantBits) -> Result<QuantizedTensor, QuantError> {
    if let Some(index) = t.values.iter().position(|v| !v.is_finite()) {
        return Err(QuantError::NonFinite { index });
    }
    let n = t.values.len();
    let (scale, zero_point, codes) = match bits {
        QuantBits::B32 => {
            let mut codes = Vec::with_capacity(n * 4);
            for v in &t.values {
                codes.extend_from_slice(&v.to_be_bytes());
            }
            (1.0f32, 0.0f32, codes)
        }
        QuantBits::B16 => {
            let mut codes = Vec::with_capacity(n * 2);
            for v in &t.values {
                codes.extend_from_slice(&f16::from_f32(*v).to_be_bytes());
            }
            (1.0f32, 0.0f32, codes)
        }
        QuantBits::B8 => {
            let mut min = f32::INFINITY;
            let mut max = f32::NEG_INFINITY;
            for v in &t.values {
                min = min.min(*v);
                max = max.max(*v);
            }
            if n == 0 {
                min = 0.0;
                max = 0.0;
            }
            // Degenerate range: every value maps to code 0.
            let scale = if max > min { (max - min) / 255.0 } else { 1.0 };
            let zero_point = min;
            let mut codes = Vec::with_capacity(n);
            for v in &t.values {
                let q = ((*v as f64 - zero_point as f64) / scale as f64).round();
                codes.push(q.clamp(0.0, 255.0) as u8);
            }
            (scale, zero_point, codes)
        }
    };
    Ok(QuantizedTensor {
        dims: t.dims,
        bits,
        scale,
        zero_point,
        codes,
    })
}

/// Inverts [`quantize`]. The reconstructed tensor carries `camera_index` 0;
/// callers that track multiple cameras assign it from frame order.
pub fn dequantize(q: &QuantizedTensor) -> Result<BottleneckTensor, QuantError> {
    let expected = q.expected_code_len();
    if q.codes.len() != expected {
        return Err(QuantError::CodeLength {
            expected,
            got: q.codes.len(),
        });
    }
    let n = q.dims.element_count();
    let mut values = Vec::with_capacity(n);
    match q.bits {
        QuantBits::B32 => {
            for chunk in q.codes.chunks_exact(4) {
                values.push(f32::from_be_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]));
            }
        }
        QuantBits::B16 => {
            for chunk in q.codes.chunks_exact(2) {
                values.push(f16::from_be_bytes([chunk[0], chunk[1]]).to_f32());
            }
        }
        QuantBits::B8 => {
            for &code in &q.codes {
                values.push((code as f64 * q.scale as f64 + q.zero_point as f64) as f32);
            }
        }
    }
    Ok(BottleneckTensor {
        dims: q.dims,
        camera_index: 0,
        values,
    })
}
