//! JSON search API over a [`Catalog`].
//!
//! | route | answer |
//! |---|---|
//! | `GET /api/search?clause=E:K:V&...[&display=L]` | `[SearchSummary]` |
//! | `GET /api/entry/{id}?selected=L&display=L&suppress=L,L` | [`RenderedEntry`](super::RenderedEntry) |
//! | `GET /api/facets/{element}?display=L` | `{code: FacetValue}` |
//! | `GET /api/join?left=C&left=C&right=C&on=E` | `[JoinPair]` |
//! | `GET /api/providers` | `[HarvestState]` |
//!
//! Failures answer 400 or 404 with an [`ApiError`] body.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::{Path, Query as QueryParams, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tokio::net::TcpListener;
use tower_http::services::ServeDir;

use super::{Catalog, CatalogEntry, CatalogError, Query, SearchHit};
use crate::harvest::HarvestState;
use crate::model::{ElementName, ModelError};
use crate::vocab::{VocabError, VocabId};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LanguageLabel {
    pub code: String,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchSummary {
    pub identifier: String,
    pub provider: String,
    pub title: Option<String>,
    pub matched_codes: Vec<String>,
    /// Subject languages of the resource.
    pub languages: Vec<LanguageLabel>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FacetValue {
    pub count: usize,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JoinPair {
    pub left: SearchSummary,
    pub right: SearchSummary,
    pub shared_codes: Vec<String>,
}

/// Error body: a stable machine-readable `kind` and a message.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApiError {
    pub kind: String,
    pub error: String,
}

fn error_kind(e: &CatalogError) -> (StatusCode, &'static str) {
    match e {
        CatalogError::NotFound(_) => (StatusCode::NOT_FOUND, "not_found"),
        CatalogError::EmptyQuery => (StatusCode::BAD_REQUEST, "empty_query"),
        CatalogError::BadClause(_) => (StatusCode::BAD_REQUEST, "bad_clause"),
        CatalogError::UnknownElement(_) => (StatusCode::BAD_REQUEST, "unknown_element"),
        CatalogError::NotCoded(_) => (StatusCode::BAD_REQUEST, "not_coded"),
        CatalogError::Vocabulary(VocabError::CodeAmbiguous { .. }) => (StatusCode::BAD_REQUEST, "code_ambiguous"),
        CatalogError::Vocabulary(VocabError::CodeUnknown { .. }) => (StatusCode::BAD_REQUEST, "code_unknown"),
        CatalogError::Vocabulary(_) => (StatusCode::BAD_REQUEST, "vocabulary"),
        CatalogError::Model(ModelError::SelectedNotAlternative { .. }) => {
            (StatusCode::BAD_REQUEST, "selected_not_alternative")
        }
        CatalogError::Model(_) => (StatusCode::BAD_REQUEST, "model"),
        CatalogError::InvalidRecord { .. } | CatalogError::IdentifierMismatch { .. } => {
            (StatusCode::BAD_REQUEST, "invalid_record")
        }
        CatalogError::Corrupt { .. } | CatalogError::Io { .. } => (StatusCode::INTERNAL_SERVER_ERROR, "internal"),
    }
}

struct Failure(CatalogError);

impl From<CatalogError> for Failure {
    fn from(e: CatalogError) -> Self {
        Failure(e)
    }
}

impl IntoResponse for Failure {
    fn into_response(self) -> Response {
        let (status, kind) = error_kind(&self.0);
        let body = ApiError {
            kind: kind.to_string(),
            error: self.0.to_string(),
        };
        (status, Json(body)).into_response()
    }
}

type Params = QueryParams<Vec<(String, String)>>;

fn param<'a>(params: &'a [(String, String)], key: &str) -> Option<&'a str> {
    params.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
}

fn all<'a>(params: &'a [(String, String)], key: &'a str) -> impl Iterator<Item = &'a str> {
    params.iter().filter(move |(k, _)| k == key).map(|(_, v)| v.as_str())
}

fn parse_element(name: &str) -> Result<ElementName, CatalogError> {
    name.parse().map_err(|_| CatalogError::UnknownElement(name.to_string()))
}

/// Summary of one entry as listed in search and join results.
pub fn summarize(catalog: &Catalog, entry: &CatalogEntry, matched_codes: Vec<String>, display: &str) -> SearchSummary {
    let registry = catalog.registry();
    let languages = entry
        .record
        .elements_named(ElementName::SubjectLanguage)
        .filter_map(|e| e.code())
        .map(|code| LanguageLabel {
            code: code.to_string(),
            label: registry
                .label(VocabId::OlacLanguage, code, display)
                .unwrap_or_else(|_| code.to_string()),
        })
        .collect();
    SearchSummary {
        identifier: entry.identifier.clone(),
        provider: entry.provider_id.clone(),
        title: entry.record.title().map(str::to_string),
        matched_codes,
        languages,
    }
}

async fn search(
    State(cat): State<Arc<Catalog>>,
    QueryParams(params): Params,
) -> Result<Json<Vec<SearchSummary>>, Failure> {
    let clauses: Vec<&str> = all(&params, "clause").collect();
    let query = Query::parse(&clauses)?;
    let display = param(&params, "display").unwrap_or("en");
    let hits = cat.search_hits(&query)?;
    Ok(Json(
        hits.into_iter()
            .map(|SearchHit { entry, matched_codes }| summarize(&cat, &entry, matched_codes, display))
            .collect(),
    ))
}

async fn entry(
    State(cat): State<Arc<Catalog>>,
    Path(identifier): Path<String>,
    QueryParams(params): Params,
) -> Result<Json<super::RenderedEntry>, Failure> {
    let suppressed: Vec<&str> = param(&params, "suppress")
        .map(|s| s.split(',').map(str::trim).filter(|s| !s.is_empty()).collect())
        .unwrap_or_default();
    let view = cat.render_entry(
        &identifier,
        param(&params, "selected").filter(|s| !s.is_empty()),
        param(&params, "display").unwrap_or("en"),
        &suppressed,
    )?;
    Ok(Json(view))
}

async fn facets(
    State(cat): State<Arc<Catalog>>,
    Path(element): Path<String>,
    QueryParams(params): Params,
) -> Result<Json<BTreeMap<String, FacetValue>>, Failure> {
    let element = parse_element(&element)?;
    let display = param(&params, "display").unwrap_or("en");
    let counts = cat.facet_counts(element)?;
    Ok(Json(
        counts
            .into_iter()
            .map(|(code, count)| {
                let label = cat.code_label(element, &code, display).unwrap_or_else(|| code.clone());
                (code, FacetValue { count, label })
            })
            .collect(),
    ))
}

async fn join(State(cat): State<Arc<Catalog>>, QueryParams(params): Params) -> Result<Json<Vec<JoinPair>>, Failure> {
    let left = Query::parse(&all(&params, "left").collect::<Vec<_>>())?;
    let right = Query::parse(&all(&params, "right").collect::<Vec<_>>())?;
    let on = parse_element(param(&params, "on").unwrap_or_default())?;
    let display = param(&params, "display").unwrap_or("en");
    let pairs = cat.join_query(&left, &right, on)?;
    Ok(Json(
        pairs
            .iter()
            .map(|(l, r)| {
                let rcodes = cat.codes_on(r, on);
                let shared: Vec<String> = l
                    .record
                    .elements_named(on)
                    .filter_map(|e| e.code())
                    .filter(|c| {
                        on.descriptor()
                            .code_vocabulary
                            .and_then(|v| super::query::index_key(cat.registry(), v, c))
                            .is_some_and(|k| rcodes.contains(&k))
                    })
                    .map(str::to_string)
                    .collect();
                JoinPair {
                    left: summarize(&cat, l, Vec::new(), display),
                    right: summarize(&cat, r, Vec::new(), display),
                    shared_codes: shared,
                }
            })
            .collect(),
    ))
}

async fn providers(State(cat): State<Arc<Catalog>>) -> Json<Vec<HarvestState>> {
    Json(cat.provider_states())
}

async fn unknown_api() -> Failure {
    Failure(CatalogError::NotFound("no such API route".into()))
}

/// The API routes, plus the static UI bundle under `/` when `ui_dir` is
/// given.
pub fn catalog_router(catalog: Arc<Catalog>, ui_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/api/search", get(search))
        .route("/api/entry/{*identifier}", get(entry))
        .route("/api/facets/{element}", get(facets))
        .route("/api/join", get(join))
        .route("/api/providers", get(providers))
        .route("/api/{*rest}", get(unknown_api))
        .with_state(catalog);
    match ui_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

pub async fn serve_catalog(
    catalog: Arc<Catalog>,
    listener: TcpListener,
    ui_dir: Option<PathBuf>,
) -> std::io::Result<()> {
    axum::serve(listener, catalog_router(catalog, ui_dir)).await
}
