mod common;

use std::net::TcpStream;

use tapemouse_core::{Frame, PipelineConfig, Resolution};
use tapemouse_harness::protocol::{encode_frame, Reply};
use tapemouse_harness::Server;
use tungstenite::stream::MaybeTlsStream;
use tungstenite::{Message, WebSocket};

use common::*;

type Client = WebSocket<MaybeTlsStream<TcpStream>>;

fn small_config() -> PipelineConfig {
    PipelineConfig {
        camera: Resolution::new(160, 120),
        screen: Resolution::new(640, 480),
        ..PipelineConfig::default()
    }
}

fn connect(cfg: &PipelineConfig) -> Client {
    let server = Server::bind("127.0.0.1:0", cfg.clone()).unwrap();
    let addr = server.local_addr().unwrap();
    server.spawn();
    tungstenite::connect(format!("ws://{addr}")).unwrap().0
}

fn text(ws: &mut Client, s: &str) {
    ws.send(Message::Text(s.into())).unwrap();
}

fn frame(ws: &mut Client, f: &Frame) {
    ws.send(Message::Binary(encode_frame(f).unwrap())).unwrap();
}

/// Next text reply, or `None` once the server has closed.
fn reply(ws: &mut Client) -> Option<Reply> {
    loop {
        match ws.read() {
            Ok(Message::Text(t)) => return Some(t.parse().unwrap()),
            Ok(Message::Close(_)) | Err(_) => return None,
            Ok(_) => {}
        }
    }
}

fn tapes(cfg: &PipelineConfig, d: f64, t: u64) -> Frame {
    tape_frame(cfg, Some(((60.0, 20.0), (60.0, 20.0 + d))), t)
}

#[test]
fn calibrate_and_stream() {
    let cfg = small_config();
    let mut ws = connect(&cfg);
    text(&mut ws, "CALIBRATE_OPEN_BEGIN");
    for i in 0..10 {
        frame(&mut ws, &tapes(&cfg, 80.0, i));
    }
    text(&mut ws, "CALIBRATE_OPEN_END");
    assert_eq!(reply(&mut ws), Some(Reply::CalOpen(80.0)));
    text(&mut ws, "CALIBRATE_PINCH_BEGIN");
    for i in 0..10 {
        frame(&mut ws, &tapes(&cfg, 30.0, i));
    }
    text(&mut ws, "CALIBRATE_PINCH_END");
    assert_eq!(reply(&mut ws), Some(Reply::CalPinch(30.0)));

    text(&mut ws, "STREAM_BEGIN");
    for t in [0, 33] {
        frame(&mut ws, &tape_frame(&cfg, None, t));
        assert_eq!(reply(&mut ws).unwrap().to_string(), "STATE UNDEFINED - -");
    }
    frame(&mut ws, &tapes(&cfg, 60.0, 66));
    assert_eq!(reply(&mut ws).unwrap().to_string(), "EVT 66 MOVE 240 80");
    assert_eq!(reply(&mut ws).unwrap().to_string(), "STATE MID 60.00 7000");
    frame(&mut ws, &tapes(&cfg, 28.0, 100));
    assert_eq!(reply(&mut ws).unwrap().to_string(), "EVT 100 LEFT_CLICK 240 80");
    assert_eq!(reply(&mut ws).unwrap().to_string(), "STATE PINCH 28.00 7000");
    text(&mut ws, "STREAM_END");
    ws.close(None).unwrap();
}

#[test]
fn malformed_frame_gets_bad_frame_and_close() {
    let cfg = small_config();
    let mut ws = connect(&cfg);
    ws.send(Message::Binary(vec![0x01, 0, 2, 0, 2, 0, 0, 0, 0, 0, 0, 0, 0, 1, 2, 3])).unwrap();
    match reply(&mut ws) {
        Some(Reply::Error { code, .. }) => assert_eq!(code, "BAD_FRAME"),
        other => panic!("unexpected {other:?}"),
    }
    assert_eq!(reply(&mut ws), None);
}

#[test]
fn stream_without_calibration_is_refused() {
    let mut ws = connect(&small_config());
    text(&mut ws, "STREAM_BEGIN");
    match reply(&mut ws) {
        Some(Reply::Error { code, .. }) => assert_eq!(code, "NOT_CALIBRATED"),
        other => panic!("unexpected {other:?}"),
    }
    assert_eq!(reply(&mut ws), None);
}

#[test]
fn sessions_are_isolated() {
    let cfg = small_config();
    let server = Server::bind("127.0.0.1:0", cfg.clone()).unwrap();
    let addr = server.local_addr().unwrap();
    server.spawn();
    let mut a: Client = tungstenite::connect(format!("ws://{addr}")).unwrap().0;
    let mut b: Client = tungstenite::connect(format!("ws://{addr}")).unwrap().0;
    text(&mut a, "CALIBRATE_OPEN_BEGIN");
    for i in 0..10 {
        frame(&mut a, &tapes(&cfg, 70.0, i));
    }
    text(&mut a, "CALIBRATE_OPEN_END");
    assert_eq!(reply(&mut a), Some(Reply::CalOpen(70.0)));
    // b has not calibrated, so its pinch step is refused.
    text(&mut b, "CALIBRATE_PINCH_BEGIN");
    assert!(matches!(reply(&mut b), Some(Reply::Error { code, .. }) if code == "NOT_CALIBRATED"));
    text(&mut a, "CALIBRATE_PINCH_BEGIN");
    for i in 0..10 {
        frame(&mut a, &tapes(&cfg, 25.0, i));
    }
    text(&mut a, "CALIBRATE_PINCH_END");
    assert_eq!(reply(&mut a), Some(Reply::CalPinch(25.0)));
}
