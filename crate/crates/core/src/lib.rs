//! Discovery infrastructure for language resources.
//!
//! The crate covers the whole metadata path from a data provider to an end
//! user:
//!
//! - [`model`]: qualified metadata records, the element descriptor table and
//!   validation, multilingual display rules.
//! - [`vocab`]: controlled vocabularies, language codes and their Ethnologue
//!   extensions.
//! - [`xml`]: the record interchange format.
//! - [`oai`]: the data-provider side: an HTTP repository answering
//!   harvesting requests in OLAC and Dublin Core formats.
//! - [`harvest`]: the service-provider ingestion side.
//! - [`catalog`]: the union catalog with code-indexed search, cross-archive
//!   joins, facets and a JSON API.

pub mod catalog;
pub mod clock;
pub mod fixtures;
pub mod harvest;
pub mod model;
pub mod oai;
pub mod vocab;
pub mod xml;

pub use catalog::{Catalog, CatalogEntry, CatalogError, Clause, Query, UpsertOutcome};
pub use harvest::{HarvestMode, HarvestOutcome, HarvestReport, HarvestState, Harvester, HarvesterConfig};
pub use model::{
    descriptor_for, effective_lang, render_view, validate_record, Diagnostic, ElementDescriptor, ElementName,
    MetadataElement, MetadataRecord, Rule, Severity,
};
pub use oai::{dc_crosswalk, ArchiveItem, Repository, RepositoryInfo};
pub use vocab::{build_extension_code, VocabId, VocabTerm, Vocabulary, VocabularyRegistry};
pub use xml::{parse_record, serialize_record, ParseOutcome};
