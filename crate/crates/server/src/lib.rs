//! HTTP interface over the isostream pipeline: per-dataset sessions holding
//! isosurfaces and candidate streamlines, reselected per camera.

mod error;
mod routes;
mod session;

use std::collections::HashMap;
use std::future::Future;
use std::sync::Arc;

use tokio::net::TcpListener;
use tokio::sync::RwLock;

pub use error::ApiError;
pub use routes::router;
pub use session::{CandidateSummary, MeshSummary, Session};

pub const DEFAULT_PORT: u16 = 7870;
/// Request body cap; base64 datasets inflate by a third.
pub const BODY_LIMIT: usize = 512 << 20;

type SessionMap = HashMap<String, Arc<RwLock<Session>>>;

/// Shared server state: the session table.
#[derive(Clone, Default)]
pub struct AppState {
    sessions: Arc<std::sync::RwLock<SessionMap>>,
}

impl AppState {
    pub fn get(&self, id: &str) -> Result<Arc<RwLock<Session>>, ApiError> {
        self.sessions
            .read()
            .unwrap_or_else(|p| p.into_inner())
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found(id))
    }

    fn insert(&self, session: Session) -> String {
        let id = session.id.clone();
        self.sessions
            .write()
            .unwrap_or_else(|p| p.into_inner())
            .insert(id.clone(), Arc::new(RwLock::new(session)));
        id
    }

    fn remove(&self, id: &str) -> bool {
        self.sessions.write().unwrap_or_else(|p| p.into_inner()).remove(id).is_some()
    }

    pub fn len(&self) -> usize {
        self.sessions.read().unwrap_or_else(|p| p.into_inner()).len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Serves until `shutdown` resolves, then drains in-flight requests.
pub async fn serve(listener: TcpListener, shutdown: impl Future<Output = ()> + Send + 'static) -> std::io::Result<()> {
    if let Ok(addr) = listener.local_addr() {
        log::info!("listening on http://{addr}");
    }
    axum::serve(listener, router(AppState::default())).with_graceful_shutdown(shutdown).await
}
