//! Wire protocol, edge client, and cloud server.

mod client;
mod frame;
mod server;

pub use client::{client_offload, connect, measure_rtt, recv_control, send_request, ClientReply};
pub use frame::{
    decode_frame, decode_request, decode_response, encode_ping, encode_pong, encode_request,
    encode_response, Frame, FrameError, FrameReader, RequestFrame, ResponseFrame, MAGIC,
    MAX_PAYLOAD_LEN, MSG_PING, MSG_PONG, MSG_REQUEST, MSG_RESPONSE, PING_LEN, REQUEST_HEADER_LEN,
    RESPONSE_LEN, TENSOR_HEADER_LEN, VERSION,
};
pub use server::{serve, FaultMode, ServeConfig, ServedModel, ServerHandle};
