//! Binary wire protocol.
//!
//! All multi-byte integers and floats are big-endian. Frame layouts:
//!
//! ```text
//! request  (type 1): magic[4] version[1] type[1] timestep[8] model_id[2]
//!                    command[1] speed[4] quant_bits[1] tensor_count[1]
//!                    then per tensor: channels[2] height[2] width[2]
//!                    scale[4] zero_point[4] payload_len[4] payload[...]
//! response (type 2): magic[4] version[1] type[1] timestep[8]
//!                    steer[4] accelerator[4] brake[4]        (26 B total)
//! ping     (type 3): magic[4] version[1] type[1] timestep[8] (14 B total)
//! pong     (type 4): same layout as ping
//! ```
//!
//! The total length of any frame is derivable while scanning its header, so
//! a stream reader can frame messages without a length prefix. Per-tensor
//! `payload_len` must equal `channels * height * width * bits / 8`.

use thiserror::Error;

use crate::profiles::QuantBits;
use crate::quant::{QuantizedTensor, TensorDims};
use crate::runtime::ControlOutput;

pub const MAGIC: [u8; 4] = [0x53, 0x41, 0x47, 0x45];
pub const VERSION: u8 = 1;

pub const MSG_REQUEST: u8 = 1;
pub const MSG_RESPONSE: u8 = 2;
pub const MSG_PING: u8 = 3;
pub const MSG_PONG: u8 = 4;

/// Fixed request header bytes before the tensor list.
pub const REQUEST_HEADER_LEN: usize = 23;
/// Per-tensor header bytes before the payload.
pub const TENSOR_HEADER_LEN: usize = 18;
/// Response frames are fixed-size.
pub const RESPONSE_LEN: usize = 26;
/// Ping and pong frames are fixed-size.
pub const PING_LEN: usize = 14;

/// Upper bound on a single tensor payload; larger claims are rejected
/// before any allocation happens.
pub const MAX_PAYLOAD_LEN: u32 = 1 << 28;

#[derive(Debug, Error)]
pub enum FrameError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("truncated frame: needed {needed} bytes, got {got}")]
    Truncated { needed: usize, got: usize },
    #[error("{0} trailing bytes after frame")]
    TrailingBytes(usize),
    #[error("bad magic {0:02x?}")]
    BadMagic([u8; 4]),
    #[error("unsupported protocol version {0}")]
    UnsupportedVersion(u8),
    #[error("unknown message type {0}")]
    UnknownMsgType(u8),
    #[error("invalid quant bits {0}")]
    BadQuantBits(u8),
    #[error("tensor payload length {got} does not match dims/precision ({expected})")]
    PayloadLength { expected: u64, got: u64 },
    #[error("tensor payload length {0} exceeds the {MAX_PAYLOAD_LEN} B cap")]
    Oversized(u32),
}

/// Offload request: the quantized bottleneck tensors plus the scalar inputs
/// the tail needs.
#[derive(Debug, Clone, PartialEq)]
pub struct RequestFrame {
    pub timestep: u64,
    pub model_id: u16,
    pub command: u8,
    pub speed: f32,
    pub quant_bits: QuantBits,
    pub tensors: Vec<QuantizedTensor>,
}

impl RequestFrame {
    /// Encoded size in bytes.
    pub fn wire_len(&self) -> usize {
        REQUEST_HEADER_LEN
            + self
                .tensors
                .iter()
                .map(|t| TENSOR_HEADER_LEN + t.codes.len())
                .sum::<usize>()
    }
}

/// Control outputs echoing the request's timestep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResponseFrame {
    pub timestep: u64,
    pub control: ControlOutput,
}

/// Any decoded frame.
#[derive(Debug, Clone, PartialEq)]
pub enum Frame {
    Request(RequestFrame),
    Response(ResponseFrame),
    Ping { timestep: u64 },
    Pong { timestep: u64 },
}

pub fn encode_request(frame: &RequestFrame) -> Vec<u8> {
    let mut out = Vec::with_capacity(frame.wire_len());
    out.extend_from_slice(&MAGIC);
    out.push(VERSION);
    out.push(MSG_REQUEST);
    out.extend_from_slice(&frame.timestep.to_be_bytes());
    out.extend_from_slice(&frame.model_id.to_be_bytes());
    out.push(frame.command);
    out.extend_from_slice(&frame.speed.to_be_bytes());
    out.push(frame.quant_bits.bits() as u8);
    out.push(frame.tensors.len() as u8);
    for t in &frame.tensors {
        out.extend_from_slice(&t.dims.channels.to_be_bytes());
        out.extend_from_slice(&t.dims.height.to_be_bytes());
        out.extend_from_slice(&t.dims.width.to_be_bytes());
        out.extend_from_slice(&t.scale.to_be_bytes());
        out.extend_from_slice(&t.zero_point.to_be_bytes());
        out.extend_from_slice(&(t.codes.len() as u32).to_be_bytes());
        out.extend_from_slice(&t.codes);
    }
    out
}

pub fn encode_response(frame: &ResponseFrame) -> Vec<u8> {
    let mut out = Vec::with_capacity(RESPONSE_LEN);
    out.extend_from_slice(&MAGIC);
    out.push(VERSION);
    out.push(MSG_RESPONSE);
    out.extend_from_slice(&frame.timestep.to_be_bytes());
    out.extend_from_slice(&frame.control.steer.to_be_bytes());
    out.extend_from_slice(&frame.control.accelerator.to_be_bytes());
    out.extend_from_slice(&frame.control.brake.to_be_bytes());
    out
}

pub fn encode_ping(timestep: u64) -> Vec<u8> {
    encode_signal(MSG_PING, timestep)
}

pub fn encode_pong(timestep: u64) -> Vec<u8> {
    encode_signal(MSG_PONG, timestep)
}

fn encode_signal(msg_type: u8, timestep: u64) -> Vec<u8> {
    let mut out = Vec::with_capacity(PING_LEN);
    out.extend_from_slice(&MAGIC);
    out.push(VERSION);
    out.push(msg_type);
    out.extend_from_slice(&timestep.to_be_bytes());
    out
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], FrameError> {
        if self.buf.len() - self.pos < n {
            return Err(FrameError::Truncated {
                needed: self.pos + n,
                got: self.buf.len(),
            });
        }
        let slice = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    fn u8(&mut self) -> Result<u8, FrameError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, FrameError> {
        let b = self.take(2)?;
        Ok(u16::from_be_bytes([b[0], b[1]]))
    }

    fn u32(&mut self) -> Result<u32, FrameError> {
        let b = self.take(4)?;
        Ok(u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn u64(&mut self) -> Result<u64, FrameError> {
        let b = self.take(8)?;
        Ok(u64::from_be_bytes(b.try_into().unwrap()))
    }

    fn f32(&mut self) -> Result<f32, FrameError> {
        let b = self.take(4)?;
        Ok(f32::from_be_bytes([b[0], b[1], b[2], b[3]]))
    }
}

fn check_prologue(cur: &mut Cursor) -> Result<u8, FrameError> {
    let magic = cur.take(4)?;
    if magic != MAGIC {
        return Err(FrameError::BadMagic([magic[0], magic[1], magic[2], magic[3]]));
    }
    let version = cur.u8()?;
    if version != VERSION {
        return Err(FrameError::UnsupportedVersion(version));
    }
    cur.u8()
}

/// Decodes exactly one frame occupying the whole buffer.
pub fn decode_frame(buf: &[u8]) -> Result<Frame, FrameError> {
    let mut cur = Cursor { buf, pos: 0 };
    let msg_type = check_prologue(&mut cur)?;
    let frame = match msg_type {
        MSG_REQUEST => Frame::Request(decode_request_body(&mut cur)?),
        MSG_RESPONSE => Frame::Response(ResponseFrame {
            timestep: cur.u64()?,
            control: ControlOutput {
                steer: cur.f32()?,
                accelerator: cur.f32()?,
                brake: cur.f32()?,
            },
        }),
        MSG_PING => Frame::Ping {
            timestep: cur.u64()?,
        },
        MSG_PONG => Frame::Pong {
            timestep: cur.u64()?,
        },
        other => return Err(FrameError::UnknownMsgType(other)),
    };
    if cur.pos != buf.len() {
        return Err(FrameError::TrailingBytes(buf.len() - cur.pos));
    }
    Ok(frame)
}

/// Decodes a complete request frame.
pub fn decode_request(buf: &[u8]) -> Result<RequestFrame, FrameError> {
    match decode_frame(buf)? {
        Frame::Request(req) => Ok(req),
        other => Err(FrameError::UnknownMsgType(frame_type(&other))),
    }
}

/// Decodes a complete response frame.
pub fn decode_response(buf: &[u8]) -> Result<ResponseFrame, FrameError> {
    match decode_frame(buf)? {
        Frame::Response(resp) => Ok(resp),
        other => Err(FrameError::UnknownMsgType(frame_type(&other))),
    }
}

fn frame_type(frame: &Frame) -> u8 {
    match frame {
        Frame::Request(_) => MSG_REQUEST,
        Frame::Response(_) => MSG_RESPONSE,
        Frame::Ping { .. } => MSG_PING,
        Frame::Pong { .. } => MSG_PONG,
    }
}

fn decode_request_body(cur: &mut Cursor) -> Result<RequestFrame, FrameError> {
    let timestep = cur.u64()?;
    let model_id = cur.u16()?;
    let command = cur.u8()?;
    let speed = cur.f32()?;
    let bits_raw = cur.u8()?;
    let quant_bits = QuantBits::from_bits(bits_raw).ok_or(FrameError::BadQuantBits(bits_raw))?;
    let tensor_count = cur.u8()?;
    let mut tensors = Vec::with_capacity(tensor_count as usize);
    for _ in 0..tensor_count {
        let dims = TensorDims::new(cur.u16()?, cur.u16()?, cur.u16()?);
        let scale = cur.f32()?;
        let zero_point = cur.f32()?;
        let payload_len = cur.u32()?;
        if payload_len > MAX_PAYLOAD_LEN {
            return Err(FrameError::Oversized(payload_len));
        }
        let expected = dims.element_count() as u64 * quant_bits.bytes_per_element();
        if payload_len as u64 != expected {
            return Err(FrameError::PayloadLength {
                expected,
                got: payload_len as u64,
            });
        }
        let codes = cur.take(payload_len as usize)?.to_vec();
        tensors.push(QuantizedTensor {
            dims,
            bits: quant_bits,
            scale,
            zero_point,
            codes,
        });
    }
    Ok(RequestFrame {
        timestep,
        model_id,
        command,
        speed,
        quant_bits,
        tensors,
    })
}

/// Incremental stream framer. Bytes accumulate across reads, so a timeout
/// mid-frame never desynchronizes the stream.
#[derive(Debug, Default)]
pub struct FrameReader {
    buf: Vec<u8>,
}

impl FrameReader {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, bytes: &[u8]) {
        self.buf.extend_from_slice(bytes);
    }

    /// Length of the frame at the head of the buffer, if it can be
    /// determined yet.
    fn pending_len(&self) -> Result<Option<usize>, FrameError> {
        if self.buf.len() < 6 {
            return Ok(None);
        }
        if self.buf[..4] != MAGIC {
            return Err(FrameError::BadMagic([
                self.buf[0],
                self.buf[1],
                self.buf[2],
                self.buf[3],
            ]));
        }
        if self.buf[4] != VERSION {
            return Err(FrameError::UnsupportedVersion(self.buf[4]));
        }
        match self.buf[5] {
            MSG_RESPONSE => Ok(Some(RESPONSE_LEN)),
            MSG_PING | MSG_PONG => Ok(Some(PING_LEN)),
            MSG_REQUEST => {
                if self.buf.len() < REQUEST_HEADER_LEN {
                    return Ok(None);
                }
                let tensor_count = self.buf[22] as usize;
                let mut offset = REQUEST_HEADER_LEN;
                for _ in 0..tensor_count {
                    if self.buf.len() < offset + TENSOR_HEADER_LEN {
                        return Ok(None);
                    }
                    let len_at = offset + 14;
                    let payload_len = u32::from_be_bytes([
                        self.buf[len_at],
                        self.buf[len_at + 1],
                        self.buf[len_at + 2],
                        self.buf[len_at + 3],
                    ]);
                    if payload_len > MAX_PAYLOAD_LEN {
                        return Err(FrameError::Oversized(payload_len));
                    }
                    offset += TENSOR_HEADER_LEN + payload_len as usize;
                }
                Ok(Some(offset))
            }
            other => Err(FrameError::UnknownMsgType(other)),
        }
    }

    /// Parses and removes one complete frame from the buffer, or returns
    /// `None` when more bytes are needed.
    pub fn try_frame(&mut self) -> Result<Option<Frame>, FrameError> {
        let Some(len) = self.pending_len()? else {
            return Ok(None);
        };
        if self.buf.len() < len {
            return Ok(None);
        }
        let frame = decode_frame(&self.buf[..len])?;
        self.buf.drain(..len);
        Ok(Some(frame))
    }
}
