use serde::{Deserialize, Serialize};

use super::{Catalog, CatalogError};
use crate::model::{render_view, RefineRule};

/// One displayed element. Codes keep their raw value next to the label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderedRow {
    pub element: String,
    pub refine: Option<String>,
    pub refine_label: Option<String>,
    pub code: Option<String>,
    pub code_label: Option<String>,
    pub content: String,
    pub lang: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderedEntry {
    pub identifier: String,
    pub provider: String,
    pub alternatives: Vec<String>,
    pub selected: String,
    pub display: String,
    pub rows: Vec<RenderedRow>,
}

impl Catalog {
    /// The entry as a reader sees it: the elements kept by
    /// [`render_view`], with codes and roles labelled in `display_lang`.
    /// `selected` defaults to the record's first alternative.
    pub fn render_entry(
        &self,
        identifier: &str,
        selected: Option<&str>,
        display_lang: &str,
        suppressed: &[&str],
    ) -> Result<RenderedEntry, CatalogError> {
        let entry = self.get(identifier)?;
        let record = &entry.record;
        let selected = selected.unwrap_or(&record.alternatives()[0]).to_string();
        let registry = self.registry();
        let rows = render_view(record, &selected, suppressed)?
            .into_iter()
            .map(|e| {
                let desc = e.descriptor();
                let refine_label = e.refine().map(|r| match desc.refine {
                    RefineRule::Vocabulary(v) => registry.label(v, r, display_lang).unwrap_or_else(|_| r.to_string()),
                    _ => r.to_string(),
                });
                let code_label = match (e.code(), desc.code_vocabulary) {
                    (Some(code), Some(v)) => registry.label(v, code, display_lang).ok(),
                    _ => None,
                };
                RenderedRow {
                    element: e.name().as_str().to_string(),
                    refine: e.refine().map(str::to_string),
                    refine_label,
                    code: e.code().map(str::to_string),
                    code_label,
                    content: e.content().to_string(),
                    lang: e.effective_lang().to_string(),
                }
            })
            .collect();
        Ok(RenderedEntry {
            identifier: entry.identifier.clone(),
            provider: entry.provider_id.clone(),
            alternatives: record.alternatives().to_vec(),
            selected,
            display: display_lang.to_string(),
            rows,
        })
    }
}
