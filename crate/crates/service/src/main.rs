use std::process::ExitCode;
use std::sync::Arc;

use erpsel_service::{app, Config, ProjectStore};

#[tokio::main]
async fn main() -> ExitCode {
    let config = match Config::from_env() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("erpsel-server: {e}");
            return ExitCode::FAILURE;
        }
    };
    let store = match ProjectStore::open(&config.data_dir) {
        Ok(s) => Arc::new(s),
        Err(e) => {
            eprintln!("erpsel-server: {e}");
            return ExitCode::FAILURE;
        }
    };
    let listener = match tokio::net::TcpListener::bind(config.listen).await {
        Ok(l) => l,
        Err(e) => {
            eprintln!("erpsel-server: cannot listen on {}: {e}", config.listen);
            return ExitCode::FAILURE;
        }
    };
    eprintln!("erpsel-server listening on {} (data in {})", config.listen, config.data_dir.display());
    let shutdown = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    if let Err(e) = axum::serve(listener, app(store)).with_graceful_shutdown(shutdown).await {
        eprintln!("erpsel-server: {e}");
        return ExitCode::FAILURE;
    }
    ExitCode::SUCCESS
}
