//! Cloud-side server.
//!
//! For each request the server dequantizes the bottleneck tensors, sleeps
//! the profiled cloud tail latency for the model, evaluates the tail stub,
//! and replies with the control outputs. Connections are handled on
//! independent threads with sequential per-connection processing; malformed
//! frames close the connection. Fault injection (dropping responses or
//! delaying them) exercises the client's fail-safe path.

use std::io::{Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::{self, JoinHandle};
use std::time::Duration;

use super::frame::{encode_pong, encode_response, Frame, FrameReader, RequestFrame, ResponseFrame};
use crate::quant::dequantize;
use crate::runtime::stub_tail;

/// One model the server can execute.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ServedModel {
    pub model_id: u16,
    /// Simulated cloud tail compute time per request, seconds.
    pub tail_latency_s: f64,
    /// Seed for the tail stub weights; must match the edge's seed for
    /// path-equivalent outputs.
    pub stub_seed: u64,
}

/// Optional fault injection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FaultMode {
    None,
    /// Process requests but never respond.
    Drop,
    /// Respond after an extra delay on top of the tail latency.
    Delay { extra_s: f64 },
}

#[derive(Debug, Clone)]
pub struct ServeConfig {
    pub models: Vec<ServedModel>,
    pub fault: FaultMode,
}

/// Running server; dropping it (or calling [`ServerHandle::shutdown`]) stops
/// the accept loop.
pub struct ServerHandle {
    local_addr: SocketAddr,
    stop: Arc<AtomicBool>,
    accept_thread: Option<JoinHandle<()>>,
}

impl ServerHandle {
    pub fn local_addr(&self) -> SocketAddr {
        self.local_addr
    }

    pub fn shutdown(mut self) {
        self.stop.store(true, Ordering::SeqCst);
        if let Some(t) = self.accept_thread.take() {
            let _ = t.join();
        }
    }
}

impl Drop for ServerHandle {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        if let Some(t) = self.accept_thread.take() {
            let _ = t.join();
        }
    }
}

/// Binds `addr` and serves until the handle is shut down.
pub fn serve(addr: impl ToSocketAddrs, cfg: ServeConfig) -> std::io::Result<ServerHandle> {
    let listener = TcpListener::bind(addr)?;
    listener.set_nonblocking(true)?;
    let local_addr = listener.local_addr()?;
    let stop = Arc::new(AtomicBool::new(false));
    let stop_accept = Arc::clone(&stop);
    let accept_thread = thread::spawn(move || {
        while !stop_accept.load(Ordering::SeqCst) {
            match listener.accept() {
                Ok((stream, _peer)) => {
                    let cfg = cfg.clone();
                    let stop = Arc::clone(&stop_accept);
                    thread::spawn(move || {
                        let _ = handle_connection(stream, &cfg, &stop);
                    });
                }
                Err(e) if e.kind() == std::io::ErrorKind::WouldBlock => {
                    thread::sleep(Duration::from_millis(2));
                }
                Err(_) => thread::sleep(Duration::from_millis(2)),
            }
        }
    });
    Ok(ServerHandle {
        local_addr,
        stop,
        accept_thread: Some(accept_thread),
    })
}

fn handle_connection(
    mut stream: TcpStream,
    cfg: &ServeConfig,
    stop: &AtomicBool,
) -> std::io::Result<()> {
    stream.set_nodelay(true)?;
    stream.set_read_timeout(Some(Duration::from_millis(200)))?;
    let mut reader = FrameReader::new();
    let mut chunk = [0u8; 64 * 1024];
    loop {
        if stop.load(Ordering::SeqCst) {
            return Ok(());
        }
        match reader.try_frame() {
            Ok(Some(Frame::Ping { timestep })) => {
                stream.write_all(&encode_pong(timestep))?;
                continue;
            }
            Ok(Some(Frame::Request(req))) => {
                if !answer_request(&mut stream, cfg, &req)? {
                    return Ok(());
                }
                continue;
            }
            // Responses and pongs are not valid client-to-server traffic.
            Ok(Some(_)) => return Ok(()),
            Ok(None) => {}
            // Malformed frame: close the connection, answering nothing.
            Err(_) => return Ok(()),
        }
        match stream.read(&mut chunk) {
            Ok(0) => return Ok(()),
            Ok(n) => reader.push(&chunk[..n]),
            Err(e)
                if matches!(
                    e.kind(),
                    std::io::ErrorKind::WouldBlock | std::io::ErrorKind::TimedOut
                ) => {}
            Err(_) => return Ok(()),
        }
    }
}

/// Returns false when the connection should close (unknown model, bad
/// tensors, or drop-mode refusal to answer is still `true`: the connection
/// stays up, only the response is suppressed).
fn answer_request(
    stream: &mut TcpStream,
    cfg: &ServeConfig,
    req: &RequestFrame,
) -> std::io::Result<bool> {
    let Some(model) = cfg.models.iter().find(|m| m.model_id == req.model_id) else {
        return Ok(false);
    };
    let mut tensors = Vec::with_capacity(req.tensors.len());
    for (i, q) in req.tensors.iter().enumerate() {
        match dequantize(q) {
            Ok(mut t) => {
                t.camera_index = i as u8;
                tensors.push(t);
            }
            Err(_) => return Ok(false),
        }
    }

    let mut service_s = model.tail_latency_s;
    if let FaultMode::Delay { extra_s } = cfg.fault {
        service_s += extra_s;
    }
    if service_s > 0.0 {
        thread::sleep(Duration::from_secs_f64(service_s));
    }

    let Ok(control) = stub_tail(&tensors, req.speed, req.command, model.stub_seed) else {
        return Ok(false);
    };
    if matches!(cfg.fault, FaultMode::Drop) {
        return Ok(true);
    }
    stream.write_all(&encode_response(&ResponseFrame {
        timestep: req.timestep,
        control,
    }))?;
    Ok(true)
}
