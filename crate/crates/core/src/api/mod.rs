//! Local HTTP/JSON service over the risk model, inventory and reports.
//!
//! Every endpoint deserialises a module input, calls the module, and
//! returns its result serialised unchanged. Mutations go through
//! [`Store::transact`], so the store file is written before the response
//! and a failed request leaves it untouched.

mod error;
mod routes;

use std::net::{IpAddr, Ipv4Addr, SocketAddr};
use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use tokio::sync::oneshot;

use crate::inventory::{InventoryError, NewRisk, Store};
use crate::risk::AssessmentInput;

pub use error::ApiError;
pub use routes::router;

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error("port {0} is already in use")]
    PortInUse(u16),
    #[error("cannot read store: {0}")]
    StoreUnreadable(#[source] InventoryError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

/// Body of `POST /api/whatif`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WhatIfRequest {
    pub input: AssessmentInput,
    pub toggles: Vec<String>,
}

/// Body of `POST /api/review/{id}/confirm`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfirmReviewRequest {
    pub confirmed_on: NaiveDate,
}

/// Body of `POST /api/risk`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkRiskRequest {
    pub euca_id: String,
    pub description: String,
    pub inherent_likelihood: u8,
    pub inherent_severity: u8,
    pub residual_likelihood: u8,
    pub residual_severity: u8,
    pub opened: NaiveDate,
}

impl LinkRiskRequest {
    pub fn into_parts(self) -> (String, NewRisk) {
        (
            self.euca_id,
            NewRisk {
                description: self.description,
                inherent_likelihood: self.inherent_likelihood,
                inherent_severity: self.inherent_severity,
                residual_likelihood: self.residual_likelihood,
                residual_severity: self.residual_severity,
                opened: self.opened,
            },
        )
    }
}

/// Body of `POST /api/risk/{id}/close`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CloseRiskRequest {
    pub closed_on: NaiveDate,
}

#[derive(Debug, Clone)]
pub struct ServeOptions {
    pub store_path: PathBuf,
    pub host: IpAddr,
    /// 0 picks a free port.
    pub port: u16,
    /// Directory of built UI assets served at `/`.
    pub static_dir: Option<PathBuf>,
}

impl ServeOptions {
    pub fn new(store_path: impl Into<PathBuf>, port: u16) -> Self {
        ServeOptions {
            store_path: store_path.into(),
            host: IpAddr::V4(Ipv4Addr::LOCALHOST),
            port,
            static_dir: None,
        }
    }
}

/// A running service. Dropping the handle stops it.
pub struct ServerHandle {
    addr: SocketAddr,
    shutdown: Option<oneshot::Sender<()>>,
    thread: Option<JoinHandle<std::io::Result<()>>>,
}

impl ServerHandle {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn url(&self, path: &str) -> String {
        format!("http://{}{path}", self.addr)
    }

    /// Blocks until the service stops.
    pub fn wait(mut self) -> std::io::Result<()> {
        match self.thread.take() {
            Some(t) => t
                .join()
                .unwrap_or_else(|_| Err(std::io::Error::other("server thread panicked"))),
            None => Ok(()),
        }
    }

    pub fn shutdown(mut self) -> std::io::Result<()> {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        self.wait()
    }
}

impl Drop for ServerHandle {
    fn drop(&mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

pub fn serve(store_path: impl Into<PathBuf>, port: u16) -> Result<ServerHandle, ServeError> {
    serve_with(ServeOptions::new(store_path, port))
}

/// Opens the store, binds the port and starts serving on a background
/// thread. Returns once the socket is listening.
pub fn serve_with(options: ServeOptions) -> Result<ServerHandle, ServeError> {
    let store = Store::open(&options.store_path).map_err(ServeError::StoreUnreadable)?;
    let listener = std::net::TcpListener::bind((options.host, options.port)).map_err(|e| {
        if e.kind() == std::io::ErrorKind::AddrInUse {
            ServeError::PortInUse(options.port)
        } else {
            ServeError::Io(e)
        }
    })?;
    listener.set_nonblocking(true)?;
    let addr = listener.local_addr()?;
    let app = router(Arc::new(Mutex::new(store)), options.static_dir);
    let (tx, rx) = oneshot::channel::<()>();
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .worker_threads(2)
        .enable_all()
        .build()?;
    let thread = std::thread::spawn(move || {
        runtime.block_on(async move {
            let listener = tokio::net::TcpListener::from_std(listener)?;
            axum::serve(listener, app)
                .with_graceful_shutdown(async {
                    let _ = rx.await;
                })
                .await
        })
    });
    Ok(ServerHandle {
        addr,
        shutdown: Some(tx),
        thread: Some(thread),
    })
}
