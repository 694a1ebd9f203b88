//! HTTP front end for a [`Repository`]: `GET /?verb=...`.

use std::sync::Arc;

use axum::extract::{Query, State};
use axum::http::header;
use axum::response::IntoResponse;
use axum::routing::get;
use axum::Router;
use tokio::net::TcpListener;

use super::Repository;

pub fn provider_router(repo: Arc<Repository>) -> Router {
    Router::new().route("/", get(answer)).with_state(repo)
}

async fn answer(State(repo): State<Arc<Repository>>, Query(params): Query<Vec<(String, String)>>) -> impl IntoResponse {
    let body = repo.handle(&params);
    let line: Vec<String> = params.iter().map(|(k, v)| format!("{k}={v}")).collect();
    tracing::info!(archive = %repo.config().archive_id, "GET /?{}", line.join("&"));
    ([(header::CONTENT_TYPE, "text/xml; charset=utf-8")], body)
}

/// Serves `repo` on `listener` until the task is dropped.
pub async fn serve_provider(repo: Arc<Repository>, listener: TcpListener) -> std::io::Result<()> {
    axum::serve(listener, provider_router(repo)).await
}
