//! HTTP/JSON interface over erpsel projects.
//!
//! | method | path | |
//! |---|---|---|
//! | GET, POST | `/projects` | list, create |
//! | GET, PUT | `/projects/{id}` | read, replace (`{version, project}`) |
//! | GET | `/projects/{id}/matrices/{mid}` | matrix, consistency, scale |
//! | PUT | `/projects/{id}/matrices/{mid}/judgments` | replace judgments |
//! | POST | `/projects/{id}/candidates/{cid}/optimize` | adaptation plan |
//! | GET | `/projects/{id}/ranking?budget=` | ranking |
//! | GET | `/projects/{id}/weights`, `/screening`, `/gap` | derived views |
//! | POST | `/validate` | check a project without storing it |

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::routing::{get, post, put};
use axum::Router;

pub mod error;
pub mod routes;
pub mod store;

pub use error::ApiError;
pub use store::ProjectStore;

pub fn app(store: Arc<ProjectStore>) -> Router {
    use routes::*;
    Router::new()
        .route("/projects", get(list_projects).post(create_project))
        .route("/projects/{id}", get(get_project).put(put_project))
        .route("/projects/{id}/matrices/{mid}", get(get_matrix))
        .route("/projects/{id}/matrices/{mid}/judgments", put(put_judgments))
        .route("/projects/{id}/candidates/{cid}/optimize", post(optimize))
        .route("/projects/{id}/ranking", get(get_ranking))
        .route("/projects/{id}/weights", get(get_weights))
        .route("/projects/{id}/screening", get(get_screening))
        .route("/projects/{id}/gap", get(get_gap))
        .route("/validate", post(validate))
        .fallback(fallback)
        .with_state(store)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub listen: SocketAddr,
    pub data_dir: PathBuf,
}

pub const DEFAULT_LISTEN: &str = "127.0.0.1:8080";
pub const DEFAULT_DATA_DIR: &str = "erpsel-data";

impl Config {
    /// Reads `ERPSEL_LISTEN` and `ERPSEL_DATA_DIR`.
    pub fn from_env() -> Result<Self, String> {
        Self::from_vars(|k| std::env::var(k).ok())
    }

    pub fn from_vars(var: impl Fn(&str) -> Option<String>) -> Result<Self, String> {
        let listen = var("ERPSEL_LISTEN").unwrap_or_else(|| DEFAULT_LISTEN.into());
        let listen = listen.parse().map_err(|e| format!("ERPSEL_LISTEN=`{listen}`: {e}"))?;
        let data_dir = var("ERPSEL_DATA_DIR").unwrap_or_else(|| DEFAULT_DATA_DIR.into()).into();
        Ok(Self { listen, data_dir })
    }
}
