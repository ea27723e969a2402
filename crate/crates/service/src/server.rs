use std::io;
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::Arc;
use std::thread::{self, JoinHandle};

use crate::session::{handle_connection, LiveSet, ServiceConfig, SessionError, SessionSummary};

/// Accepts connections and runs each session on its own thread.
pub struct Server {
    listener: TcpListener,
    config: Arc<ServiceConfig>,
    live: LiveSet,
}

impl Server {
    /// Port 0 asks the OS for a free port; see [`Server::local_addr`].
    pub fn bind(addr: impl ToSocketAddrs, config: ServiceConfig) -> io::Result<Self> {
        Ok(Self {
            listener: TcpListener::bind(addr)?,
            config: Arc::new(config),
            live: LiveSet::default(),
        })
    }

    pub fn local_addr(&self) -> io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    /// Spawns the session thread for one accepted connection.
    pub fn spawn(&self, stream: TcpStream) -> JoinHandle<Result<SessionSummary, SessionError>> {
        let config = Arc::clone(&self.config);
        let live = Arc::clone(&self.live);
        thread::spawn(move || {
            stream.set_nodelay(true).ok();
            handle_connection(stream, &config, &live)
        })
    }

    /// Accepts exactly one connection and waits for its session to end.
    pub fn serve_one(&self) -> io::Result<Result<SessionSummary, SessionError>> {
        let (stream, _) = self.listener.accept()?;
        Ok(self.spawn(stream).join().expect("session thread panicked"))
    }

    /// Serves until the listener fails. `on_end` sees every finished session.
    pub fn serve(&self, on_end: impl Fn(Result<SessionSummary, SessionError>) + Send + Sync + 'static) -> io::Result<()> {
        let on_end = Arc::new(on_end);
        for stream in self.listener.incoming() {
            let stream = stream?;
            let handle = self.spawn(stream);
            let on_end = Arc::clone(&on_end);
            thread::spawn(move || on_end(handle.join().expect("session thread panicked")));
        }
        Ok(())
    }
}
