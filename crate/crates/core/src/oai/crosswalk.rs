//! Qualified record -> unqualified Dublin Core.

use thiserror::Error;

use crate::model::{has_errors, validate_record, Diagnostic, ElementName, MetadataElement, MetadataRecord};
use crate::vocab::{VocabError, VocabId, VocabularyRegistry};

#[derive(Debug, Error)]
pub enum CrosswalkError {
    #[error("record is not valid ({} error(s))", .0.iter().filter(|d| d.is_error()).count())]
    InvalidRecord(Vec<Diagnostic>),
    #[error(transparent)]
    Vocabulary(#[from] VocabError),
}

/// Maps a valid record onto the fifteen Dublin Core elements, one output
/// element per input element, in order.
///
/// Qualified names collapse to their base element. Codes are replaced by
/// their English labels, with any free text kept after `"; "`. Creator and
/// Contributor roles are appended in parentheses. All attributes are
/// dropped.
pub fn dc_crosswalk(record: &MetadataRecord, registry: &VocabularyRegistry) -> Result<MetadataRecord, CrosswalkError> {
    let diagnostics = validate_record(record, registry);
    if has_errors(&diagnostics) {
        return Err(CrosswalkError::InvalidRecord(diagnostics));
    }
    let elements = record
        .elements()
        .iter()
        .map(|e| crosswalk_element(e, registry))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(MetadataRecord::from_elements(elements))
}

fn crosswalk_element(element: &MetadataElement, registry: &VocabularyRegistry) -> Result<MetadataElement, VocabError> {
    let desc = element.descriptor();
    let mut content = match (element.code(), desc.code_vocabulary) {
        (Some(code), Some(vocab)) => {
            let label = registry.label(vocab, code, "en")?;
            if element.content().is_empty() {
                label
            } else {
                format!("{label}; {}", element.content())
            }
        }
        _ => element.content().to_string(),
    };
    if matches!(element.name(), ElementName::Creator | ElementName::Contributor) {
        if let Some(role) = element.refine() {
            let role = registry.label(VocabId::OlacRole, role, "en")?;
            if content.is_empty() {
                content = format!("({role})");
            } else {
                content = format!("{content} ({role})");
            }
        }
    }
    Ok(MetadataElement::new(element.name().dublin_core_base(), content))
}
