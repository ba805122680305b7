//! WebSocket transport for [`Session`]: one thread per connection.

use std::net::{SocketAddr, TcpListener, TcpStream};
use std::thread;

use log::{debug, info, warn};
use tapemouse_core::PipelineConfig;
use tungstenite::{accept, Message, WebSocket};

use crate::session::Session;

pub struct Server {
    listener: TcpListener,
    config: PipelineConfig,
}

impl Server {
    /// Binds `addr`; port 0 picks a free port.
    ///
    /// # Errors
    ///
    /// Fails when the address cannot be bound.
    pub fn bind(addr: impl std::net::ToSocketAddrs, config: PipelineConfig) -> std::io::Result<Self> {
        Ok(Self {
            listener: TcpListener::bind(addr)?,
            config,
        })
    }

    pub fn local_addr(&self) -> std::io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    /// Accepts connections until the listener fails.
    pub fn run(self) -> std::io::Result<()> {
        for stream in self.listener.incoming() {
            let stream = stream?;
            let config = self.config.clone();
            thread::spawn(move || {
                let peer = stream.peer_addr().ok();
                if let Err(e) = serve_connection(stream, config) {
                    warn!("connection {peer:?}: {e}");
                }
            });
        }
        Ok(())
    }

    /// Runs the accept loop on a background thread.
    pub fn spawn(self) -> thread::JoinHandle<std::io::Result<()>> {
        thread::spawn(move || self.run())
    }
}

type BoxError = Box<dyn std::error::Error + Send + Sync>;

fn serve_connection(stream: TcpStream, config: PipelineConfig) -> Result<(), BoxError> {
    let peer = stream.peer_addr()?;
    let mut ws = accept(stream)?;
    info!("client {peer} connected");
    let mut session = Session::new(config)?;
    loop {
        let outcome = match ws.read() {
            Ok(Message::Text(text)) => session.handle_text(&text),
            Ok(Message::Binary(bytes)) => session.handle_binary(&bytes),
            Ok(Message::Close(_)) | Err(tungstenite::Error::ConnectionClosed) => break,
            Ok(_) => continue,
            Err(e) => return Err(e.into()),
        };
        for reply in &outcome.replies {
            ws.write(Message::Text(reply.to_string()))?;
        }
        ws.flush()?;
        if outcome.close {
            debug!("closing {peer} after error");
            close(&mut ws);
            break;
        }
    }
    info!("client {peer} disconnected");
    Ok(())
}

fn close(ws: &mut WebSocket<TcpStream>) {
    if ws.close(None).is_ok() {
        // Drain until the peer acknowledges.
        while ws.read().is_ok() {}
    }
}
