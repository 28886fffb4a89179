//! Edge-side socket client.
//!
//! The client keeps the single-outstanding-request discipline of the runtime
//! loop: one request per timestep, answered either by a matching response or
//! by the caller's absolute deadline. Responses whose timestep does not match
//! the pending request are stale leftovers from a timed-out step and are
//! discarded.

use std::io::{Read, Write};
use std::net::{TcpStream, ToSocketAddrs};
use std::time::{Duration, Instant};

use super::frame::{
    encode_ping, encode_request, Frame, FrameError, FrameReader, RequestFrame,
};
use crate::runtime::ControlOutput;

/// Outcome of a deadline-bounded offload attempt.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClientReply {
    Control(ControlOutput),
    Timeout,
}

/// Connects with Nagle disabled (every frame should go out immediately).
pub fn connect(addr: impl ToSocketAddrs) -> std::io::Result<TcpStream> {
    let stream = TcpStream::connect(addr)?;
    stream.set_nodelay(true)?;
    Ok(stream)
}

/// Writes a request frame to the stream.
pub fn send_request(stream: &mut TcpStream, frame: &RequestFrame) -> Result<(), FrameError> {
    stream.write_all(&encode_request(frame))?;
    Ok(())
}

fn is_loss(kind: std::io::ErrorKind) -> bool {
    matches!(
        kind,
        std::io::ErrorKind::UnexpectedEof
            | std::io::ErrorKind::ConnectionReset
            | std::io::ErrorKind::ConnectionAborted
            | std::io::ErrorKind::BrokenPipe
            | std::io::ErrorKind::NotConnected
    )
}

/// Reads frames until a response matching `timestep` arrives or `deadline`
/// passes. Never blocks past the deadline; connection loss maps to
/// [`ClientReply::Timeout`].
pub fn recv_control(
    stream: &mut TcpStream,
    reader: &mut FrameReader,
    timestep: u64,
    deadline: Instant,
) -> Result<ClientReply, FrameError> {
    let mut chunk = [0u8; 16 * 1024];
    loop {
        match reader.try_frame() {
            Ok(Some(Frame::Response(resp))) => {
                if resp.timestep == timestep {
                    return Ok(ClientReply::Control(resp.control));
                }
                // Stale response from an earlier timed-out step.
                continue;
            }
            Ok(Some(_)) => continue,
            Ok(None) => {}
            Err(e) => return Err(e),
        }
        let now = Instant::now();
        if now >= deadline {
            return Ok(ClientReply::Timeout);
        }
        let remaining = (deadline - now).min(Duration::from_millis(50));
        stream.set_read_timeout(Some(remaining.max(Duration::from_micros(100))))?;
        match stream.read(&mut chunk) {
            Ok(0) => return Ok(ClientReply::Timeout),
            Ok(n) => reader.push(&chunk[..n]),
            Err(e) if matches!(e.kind(), std::io::ErrorKind::WouldBlock | std::io::ErrorKind::TimedOut) => {}
            Err(e) if is_loss(e.kind()) => return Ok(ClientReply::Timeout),
            Err(e) => return Err(e.into()),
        }
    }
}

/// Sends one request and waits for its response with an absolute deadline.
///
/// Returns immediately with [`ClientReply::Timeout`] when the deadline has
/// already passed at call time.
pub fn client_offload(
    stream: &mut TcpStream,
    frame: &RequestFrame,
    deadline: Instant,
) -> Result<ClientReply, FrameError> {
    if Instant::now() >= deadline {
        return Ok(ClientReply::Timeout);
    }
    match send_request(stream, frame) {
        Ok(()) => {}
        Err(FrameError::Io(e)) if is_loss(e.kind()) => return Ok(ClientReply::Timeout),
        Err(e) => return Err(e),
    }
    let mut reader = FrameReader::new();
    recv_control(stream, &mut reader, frame.timestep, deadline)
}

/// Measures round-trip time as the mean over `count` ping/pong exchanges.
pub fn measure_rtt(stream: &mut TcpStream, count: usize) -> Result<f64, FrameError> {
    let mut reader = FrameReader::new();
    let mut chunk = [0u8; 256];
    let mut total = 0.0;
    for i in 0..count.max(1) {
        let sent = Instant::now();
        stream.write_all(&encode_ping(i as u64))?;
        loop {
            if let Some(Frame::Pong { timestep }) = reader.try_frame()? {
                if timestep == i as u64 {
                    total += sent.elapsed().as_secs_f64();
                    break;
                }
                continue;
            }
            stream.set_read_timeout(Some(Duration::from_secs(2)))?;
            let n = stream.read(&mut chunk)?;
            if n == 0 {
                return Err(FrameError::Truncated { needed: 1, got: 0 });
            }
            reader.push(&chunk[..n]);
        }
    }
    Ok(total / count.max(1) as f64)
}
