//! Metadata records, the element descriptor table and record validation.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::vocab::{VocabError, VocabId, VocabularyRegistry};

/// Language assumed for element content without an explicit `lang`.
pub const DEFAULT_LANG: &str = "en";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("unknown element {0:?}")]
    UnknownElement(String),
    #[error("{selected:?} is not one of the record's alternatives {alternatives:?}")]
    SelectedNotAlternative {
        selected: String,
        alternatives: Vec<String>,
    },
}

/// The closed set of metadata element names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ElementName {
    Contributor,
    Coverage,
    Creator,
    Date,
    Description,
    Format,
    FormatCpu,
    FormatEncoding,
    FormatMarkup,
    FormatOs,
    FormatSourcecode,
    Identifier,
    Language,
    Publisher,
    Relation,
    Rights,
    RightsSoftware,
    Source,
    Subject,
    SubjectLanguage,
    Title,
    Type,
    TypeData,
    TypeFunctionality,
}

impl ElementName {
    pub const ALL: [ElementName; 24] = [
        ElementName::Contributor,
        ElementName::Coverage,
        ElementName::Creator,
        ElementName::Date,
        ElementName::Description,
        ElementName::Format,
        ElementName::FormatCpu,
        ElementName::FormatEncoding,
        ElementName::FormatMarkup,
        ElementName::FormatOs,
        ElementName::FormatSourcecode,
        ElementName::Identifier,
        ElementName::Language,
        ElementName::Publisher,
        ElementName::Relation,
        ElementName::Rights,
        ElementName::RightsSoftware,
        ElementName::Source,
        ElementName::Subject,
        ElementName::SubjectLanguage,
        ElementName::Title,
        ElementName::Type,
        ElementName::TypeData,
        ElementName::TypeFunctionality,
    ];

    /// The fifteen unqualified Dublin Core elements.
    pub const DUBLIN_CORE: [ElementName; 15] = [
        ElementName::Title,
        ElementName::Creator,
        ElementName::Subject,
        ElementName::Description,
        ElementName::Publisher,
        ElementName::Contributor,
        ElementName::Date,
        ElementName::Type,
        ElementName::Format,
        ElementName::Identifier,
        ElementName::Source,
        ElementName::Language,
        ElementName::Relation,
        ElementName::Coverage,
        ElementName::Rights,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ElementName::Contributor => "Contributor",
            ElementName::Coverage => "Coverage",
            ElementName::Creator => "Creator",
            ElementName::Date => "Date",
            ElementName::Description => "Description",
            ElementName::Format => "Format",
            ElementName::FormatCpu => "Format.cpu",
            ElementName::FormatEncoding => "Format.encoding",
            ElementName::FormatMarkup => "Format.markup",
            ElementName::FormatOs => "Format.os",
            ElementName::FormatSourcecode => "Format.sourcecode",
            ElementName::Identifier => "Identifier",
            ElementName::Language => "Language",
            ElementName::Publisher => "Publisher",
            ElementName::Relation => "Relation",
            ElementName::Rights => "Rights",
            ElementName::RightsSoftware => "Rights.software",
            ElementName::Source => "Source",
            ElementName::Subject => "Subject",
            ElementName::SubjectLanguage => "Subject.language",
            ElementName::Title => "Title",
            ElementName::Type => "Type",
            ElementName::TypeData => "Type.data",
            ElementName::TypeFunctionality => "Type.functionality",
        }
    }

    /// The unqualified Dublin Core element this one refines (`Format.os` is
    /// a `Format`).
    pub fn dublin_core_base(self) -> ElementName {
        match self {
            ElementName::FormatCpu
            | ElementName::FormatEncoding
            | ElementName::FormatMarkup
            | ElementName::FormatOs
            | ElementName::FormatSourcecode => ElementName::Format,
            ElementName::RightsSoftware => ElementName::Rights,
            ElementName::SubjectLanguage => ElementName::Subject,
            ElementName::TypeData | ElementName::TypeFunctionality => ElementName::Type,
            other => other,
        }
    }

    pub fn is_dublin_core(self) -> bool {
        self.dublin_core_base() == self
    }

    pub fn descriptor(self) -> ElementDescriptor {
        descriptor_table(self)
    }
}

impl fmt::Display for ElementName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ElementName {
    type Err = ModelError;

    /// Case-insensitive; `"subject.LANGUAGE"` is accepted.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ElementName::ALL
            .into_iter()
            .find(|n| n.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| ModelError::UnknownElement(s.to_string()))
    }
}

impl TryFrom<String> for ElementName {
    type Error = ModelError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<ElementName> for String {
    fn from(n: ElementName) -> String {
        n.as_str().to_string()
    }
}

/// What an element accepts in its `refine` attribute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RefineRule {
    None,
    Vocabulary(VocabId),
    /// A single fixed token documenting the encoding scheme in use.
    Fixed(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ElementDescriptor {
    pub name: ElementName,
    pub refine: RefineRule,
    pub code_vocabulary: Option<VocabId>,
    pub definition: &'static str,
}

impl ElementDescriptor {
    pub fn refine_vocabulary(&self) -> Option<VocabId> {
        match self.refine {
            RefineRule::Vocabulary(id) => Some(id),
            _ => None,
        }
    }

    pub fn is_coded(&self) -> bool {
        self.code_vocabulary.is_some()
    }
}

/// Descriptor lookup by name; the table is total over [`ElementName::ALL`].
pub fn descriptor_for(name: &str) -> Result<ElementDescriptor, ModelError> {
    Ok(descriptor_table(name.parse()?))
}

fn descriptor_table(name: ElementName) -> ElementDescriptor {
    use ElementName as E;
    use VocabId as V;
    let (refine, code_vocabulary, definition) = match name {
        E::Contributor => (
            RefineRule::Vocabulary(V::OlacRole),
            None,
            "A person, organization or service that contributed to the resource's content.",
        ),
        E::Coverage => (
            RefineRule::None,
            None,
            "The spatial or temporal extent of the resource's content.",
        ),
        E::Creator => (
            RefineRule::Vocabulary(V::OlacRole),
            None,
            "The entity mainly responsible for the resource's content.",
        ),
        E::Date => (
            RefineRule::Vocabulary(V::DcqDate),
            None,
            "A date tied to an event in the resource's life cycle.",
        ),
        E::Description => (RefineRule::None, None, "An account of the resource's content."),
        E::Format => (
            RefineRule::None,
            Some(V::OlacFormat),
            "The physical or digital manifestation of the resource.",
        ),
        E::FormatCpu => (
            RefineRule::None,
            Some(V::OlacCpu),
            "The processor a software resource requires.",
        ),
        E::FormatEncoding => (
            RefineRule::None,
            Some(V::OlacEncoding),
            "A character encoding the resource uses, renders, reads or writes.",
        ),
        E::FormatMarkup => (
            RefineRule::None,
            Some(V::OlacMarkup),
            "OAI identifier of the definition of a markup format.",
        ),
        E::FormatOs => (
            RefineRule::None,
            Some(V::OlacOs),
            "The operating system a software resource requires.",
        ),
        E::FormatSourcecode => (
            RefineRule::None,
            Some(V::OlacSourcecode),
            "Programming language of software distributed as source.",
        ),
        E::Identifier => (
            RefineRule::None,
            None,
            "A reference that identifies the resource within some context.",
        ),
        E::Language => (
            RefineRule::Fixed("OLAC"),
            Some(V::OlacLanguage),
            "A language the resource's content is in.",
        ),
        E::Publisher => (RefineRule::None, None, "The entity that makes the resource available."),
        E::Relation => (
            RefineRule::Vocabulary(V::DcqRelation),
            None,
            "A reference to a related resource.",
        ),
        E::Rights => (
            RefineRule::None,
            Some(V::OlacRights),
            "Rights held in and over the resource.",
        ),
        E::RightsSoftware => (
            RefineRule::None,
            Some(V::OlacSoftwareRights),
            "Rights held in and over a software resource.",
        ),
        E::Source => (RefineRule::None, None, "A resource the present one is derived from."),
        E::Subject => (RefineRule::None, None, "The topic of the resource's content."),
        E::SubjectLanguage => (
            RefineRule::Fixed("OLAC"),
            Some(V::OlacLanguage),
            "A language the resource describes or discusses.",
        ),
        E::Title => (RefineRule::None, None, "A name given to the resource."),
        E::Type => (
            RefineRule::None,
            Some(V::DcType),
            "The nature or genre of the resource's content.",
        ),
        E::TypeData => (
            RefineRule::None,
            Some(V::OlacData),
            "The linguistic type of the resource's content.",
        ),
        E::TypeFunctionality => (
            RefineRule::None,
            Some(V::OlacFunctionality),
            "What a software resource does.",
        ),
    };
    ElementDescriptor {
        name,
        refine,
        code_vocabulary,
        definition,
    }
}

/// One qualified element instance.
///
/// Construction canonicalises the value: an explicit `lang="en"` is stored
/// as the default, empty attributes are stored as absent and content is
/// trimmed with internal whitespace runs collapsed to one space.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MetadataElement {
    name: ElementName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    refine: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    code: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lang: Option<String>,
    #[serde(default)]
    content: String,
}

impl MetadataElement {
    pub fn new(name: ElementName, content: impl AsRef<str>) -> Self {
        MetadataElement {
            name,
            refine: None,
            code: None,
            lang: None,
            content: normalize_whitespace(content.as_ref()),
        }
    }

    pub fn coded(name: ElementName, code: impl Into<String>) -> Self {
        Self::new(name, "").with_code(code)
    }

    pub fn with_refine(mut self, refine: impl Into<String>) -> Self {
        self.refine = non_empty(refine.into());
        self
    }

    pub fn with_code(mut self, code: impl Into<String>) -> Self {
        self.code = non_empty(code.into());
        self
    }

    pub fn with_lang(mut self, lang: impl Into<String>) -> Self {
        self.lang = non_empty(lang.into()).filter(|l| l != DEFAULT_LANG);
        self
    }

    pub fn name(&self) -> ElementName {
        self.name
    }

    pub fn refine(&self) -> Option<&str> {
        self.refine.as_deref()
    }

    pub fn code(&self) -> Option<&str> {
        self.code.as_deref()
    }

    /// The explicit `lang` attribute, if any.
    pub fn lang(&self) -> Option<&str> {
        self.lang.as_deref()
    }

    pub fn content(&self) -> &str {
        &self.content
    }

    pub fn effective_lang(&self) -> &str {
        effective_lang(self)
    }

    pub fn descriptor(&self) -> ElementDescriptor {
        self.name.descriptor()
    }
}

pub fn effective_lang(element: &MetadataElement) -> &str {
    element.lang.as_deref().unwrap_or(DEFAULT_LANG)
}

fn non_empty(s: String) -> Option<String> {
    (!s.is_empty()).then_some(s)
}

pub(crate) fn normalize_whitespace(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for word in s.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

/// A metadata record: the reader-language alternatives plus its elements in
/// stored order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MetadataRecord {
    alternatives: Vec<String>,
    elements: Vec<MetadataElement>,
}

impl MetadataRecord {
    /// An empty alternatives list means the default, `["en"]`.
    pub fn new(alternatives: Vec<String>, elements: Vec<MetadataElement>) -> Self {
        let alternatives = if alternatives.is_empty() {
            vec![DEFAULT_LANG.to_string()]
        } else {
            alternatives
        };
        MetadataRecord { alternatives, elements }
    }

    pub fn from_elements(elements: Vec<MetadataElement>) -> Self {
        Self::new(Vec::new(), elements)
    }

    pub fn alternatives(&self) -> &[String] {
        &self.alternatives
    }

    pub fn elements(&self) -> &[MetadataElement] {
        &self.elements
    }

    pub fn has_default_alternatives(&self) -> bool {
        self.alternatives.len() == 1 && self.alternatives[0] == DEFAULT_LANG
    }

    pub fn elements_named(&self, name: ElementName) -> impl Iterator<Item = &MetadataElement> {
        self.elements.iter().filter(move |e| e.name == name)
    }

    /// First title, preferring one in the default language.
    pub fn title(&self) -> Option<&str> {
        let mut titles = self.elements_named(ElementName::Title);
        let first = titles.next()?;
        if first.lang.is_none() {
            return Some(first.content());
        }
        Some(
            self.elements_named(ElementName::Title)
                .find(|t| t.lang.is_none())
                .unwrap_or(first)
                .content(),
        )
    }
}

impl Default for MetadataRecord {
    fn default() -> Self {
        Self::new(Vec::new(), Vec::new())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
    Error,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Warning => "warning",
            Severity::Error => "error",
        })
    }
}

/// Stable machine-readable diagnostic identifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Rule {
    UnknownElement,
    RefineNotAllowed,
    RefineUnknown,
    CodeNotAllowed,
    CodeUnknown,
    CodeAmbiguous,
    CodeUnlisted,
    EmptyElement,
    NoCode,
    LangUnknown,
    InvalidCharacter,
    AlternativeInvalid,
    AlternativeDuplicate,
    // structural findings from the XML reader
    MalformedDocument,
    WrongRootOrNamespace,
    UnknownAttribute,
    ElementNameCase,
    CloseTagCase,
    NestedElement,
    StrayText,
}

impl Rule {
    pub fn as_str(self) -> &'static str {
        match self {
            Rule::UnknownElement => "UNKNOWN_ELEMENT",
            Rule::RefineNotAllowed => "REFINE_NOT_ALLOWED",
            Rule::RefineUnknown => "REFINE_UNKNOWN",
            Rule::CodeNotAllowed => "CODE_NOT_ALLOWED",
            Rule::CodeUnknown => "CODE_UNKNOWN",
            Rule::CodeAmbiguous => "CODE_AMBIGUOUS",
            Rule::CodeUnlisted => "CODE_UNLISTED",
            Rule::EmptyElement => "EMPTY_ELEMENT",
            Rule::NoCode => "NO_CODE",
            Rule::LangUnknown => "LANG_UNKNOWN",
            Rule::InvalidCharacter => "INVALID_CHARACTER",
            Rule::AlternativeInvalid => "ALTERNATIVE_INVALID",
            Rule::AlternativeDuplicate => "ALTERNATIVE_DUPLICATE",
            Rule::MalformedDocument => "MALFORMED_DOCUMENT",
            Rule::WrongRootOrNamespace => "WRONG_ROOT_OR_NAMESPACE",
            Rule::UnknownAttribute => "UNKNOWN_ATTRIBUTE",
            Rule::ElementNameCase => "ELEMENT_NAME_CASE",
            Rule::CloseTagCase => "CLOSE_TAG_CASE",
            Rule::NestedElement => "NESTED_ELEMENT",
            Rule::StrayText => "STRAY_TEXT",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Where a diagnostic applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "index")]
pub enum Location {
    Record,
    Element(usize),
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Record => f.write_str("record"),
            Location::Element(i) => write!(f, "element[{i}]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub location: Location,
    pub rule: Rule,
    pub message: String,
}

impl Diagnostic {
    pub fn error(location: Location, rule: Rule, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            location,
            rule,
            message: message.into(),
        }
    }

    pub fn warning(location: Location, rule: Rule, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            location,
            rule,
            message: message.into(),
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}: {}", self.severity, self.rule, self.location, self.message)
    }
}

pub fn has_errors(diagnostics: &[Diagnostic]) -> bool {
    diagnostics.iter().any(Diagnostic::is_error)
}

/// Checks a record against the descriptor table and the vocabularies.
/// Every finding is returned; a record is valid iff none is an error.
pub fn validate_record(record: &MetadataRecord, registry: &VocabularyRegistry) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut seen: Vec<String> = Vec::new();
    for alt in &record.alternatives {
        if let Err(e) = registry.resolve(VocabId::OlacLanguage, alt) {
            out.push(Diagnostic::error(
                Location::Record,
                Rule::AlternativeInvalid,
                format!("alternative language {alt:?}: {e}"),
            ));
        }
        let key = alt.to_ascii_lowercase();
        if seen.contains(&key) {
            out.push(Diagnostic::error(
                Location::Record,
                Rule::AlternativeDuplicate,
                format!("alternative language {alt:?} listed more than once"),
            ));
        } else {
            seen.push(key);
        }
    }
    for (i, element) in record.elements.iter().enumerate() {
        validate_element(element, Location::Element(i), registry, &mut out);
    }
    out
}

fn validate_element(element: &MetadataElement, at: Location, registry: &VocabularyRegistry, out: &mut Vec<Diagnostic>) {
    let desc = element.descriptor();
    let name = element.name;

    for (what, value) in [
        ("content", Some(element.content.as_str())),
        ("refine", element.refine()),
        ("code", element.code()),
        ("lang", element.lang()),
    ] {
        if value.is_some_and(|v| v.chars().any(is_forbidden_char)) {
            out.push(Diagnostic::error(
                at,
                Rule::InvalidCharacter,
                format!("{name} {what} contains a character not allowed in XML"),
            ));
        }
    }

    if let Some(refine) = element.refine() {
        match desc.refine {
            RefineRule::None => out.push(Diagnostic::error(
                at,
                Rule::RefineNotAllowed,
                format!("{name} does not take a refine attribute (found {refine:?})"),
            )),
            RefineRule::Fixed(fixed) => {
                if !refine.eq_ignore_ascii_case(fixed) {
                    out.push(Diagnostic::error(
                        at,
                        Rule::RefineUnknown,
                        format!("{name} refine must be {fixed:?}, found {refine:?}"),
                    ));
                }
            }
            RefineRule::Vocabulary(vocab) => {
                if let Err(e) = registry.resolve(vocab, refine) {
                    out.push(Diagnostic::error(
                        at,
                        Rule::RefineUnknown,
                        format!("{name} refine: {e}"),
                    ));
                }
            }
        }
    }

    match (element.code(), desc.code_vocabulary) {
        (Some(code), None) => out.push(Diagnostic::error(
            at,
            Rule::CodeNotAllowed,
            format!("{name} does not take a code attribute (found {code:?})"),
        )),
        (Some(code), Some(vocab)) => match registry.resolve(vocab, code) {
            Ok(resolved) if resolved.is_unlisted() => out.push(Diagnostic::warning(
                at,
                Rule::CodeUnlisted,
                format!("{name} code {code:?} is not enumerated in open vocabulary {vocab}"),
            )),
            Ok(_) => {}
            Err(e @ VocabError::CodeAmbiguous { .. }) => {
                out.push(Diagnostic::error(at, Rule::CodeAmbiguous, format!("{name}: {e}")))
            }
            Err(e) => out.push(Diagnostic::error(at, Rule::CodeUnknown, format!("{name}: {e}"))),
        },
        (None, Some(vocab)) if !element.content.is_empty() => {
            // free text is the documented way to describe functionality
            // until its vocabulary settles
            if name != ElementName::TypeFunctionality {
                out.push(Diagnostic::warning(
                    at,
                    Rule::NoCode,
                    format!("{name} has free text but no code from {vocab}"),
                ));
            }
        }
        (None, _) => {}
    }

    if element.code().is_none() && element.content.is_empty() {
        out.push(Diagnostic::warning(
            at,
            Rule::EmptyElement,
            format!("{name} carries neither a code nor content"),
        ));
    }

    if let Some(lang) = element.lang() {
        if let Err(e) = registry.resolve(VocabId::OlacLanguage, lang) {
            out.push(Diagnostic::error(at, Rule::LangUnknown, format!("{name} lang: {e}")));
        }
    }
}

fn is_forbidden_char(c: char) -> bool {
    matches!(c, '\u{0}'..='\u{8}' | '\u{B}' | '\u{C}' | '\u{E}'..='\u{1F}' | '\u{FFFE}' | '\u{FFFF}')
}

fn lang_eq(a: &str, b: &str) -> bool {
    a.eq_ignore_ascii_case(b)
}

/// Elements to display for a reader.
///
/// With a single alternative every element is shown unless its language is
/// in `suppressed`. With several alternatives the reader picks `selected`;
/// elements in the other alternatives are hidden, while elements in a
/// language outside the alternatives list are always shown. Stored order is
/// kept.
pub fn render_view<'r>(
    record: &'r MetadataRecord,
    selected: &str,
    suppressed: &[&str],
) -> Result<Vec<&'r MetadataElement>, ModelError> {
    let alternatives = &record.alternatives;
    if alternatives.len() <= 1 {
        return Ok(record
            .elements
            .iter()
            .filter(|e| !suppressed.iter().any(|s| lang_eq(s, e.effective_lang())))
            .collect());
    }
    if !alternatives.iter().any(|a| lang_eq(a, selected)) {
        return Err(ModelError::SelectedNotAlternative {
            selected: selected.to_string(),
            alternatives: alternatives.clone(),
        });
    }
    Ok(record
        .elements
        .iter()
        .filter(|e| {
            let lang = e.effective_lang();
            lang_eq(lang, selected) || !alternatives.iter().any(|a| lang_eq(a, lang))
        })
        .collect())
}
