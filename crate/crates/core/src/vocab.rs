//! Controlled vocabularies.
//!
//! A [`VocabularyRegistry`] holds the fifteen enumerated code lists used by
//! the `code` and `refine` attributes of metadata elements. Vocabularies are
//! loaded from small line-oriented data files so they can be revised without
//! touching code; the registry shipped with the crate is embedded at build
//! time and available through [`VocabularyRegistry::builtin`].
//!
//! File format (UTF-8):
//!
//! ```text
//! vocabulary: OLAC-CPU open: false
//! x86<TAB>Intel x86
//! 680x0<TAB>Motorola 680x0<TAB>label.fr=...<TAB>note=...
//! ```
//!
//! Blank lines and lines starting with `#` are ignored. Term keys are
//! `ambiguous=true`, `label.<lang>=<text>` and `note=<text>`.
//!
//! The language mapping file (`language-map.tsv`) pairs ISO 639-1 codes with
//! three-letter Ethnologue codes, one `iso<TAB>ethnologue` pair per line.

use std::borrow::Cow;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Identifier of one of the registered controlled vocabularies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum VocabId {
    OlacLanguage,
    OlacData,
    OlacRole,
    OlacCpu,
    OlacEncoding,
    OlacFormat,
    OlacFunctionality,
    OlacMarkup,
    OlacOs,
    OlacRights,
    OlacSoftwareRights,
    OlacSourcecode,
    DcType,
    DcqDate,
    DcqRelation,
}

impl VocabId {
    pub const ALL: [VocabId; 15] = [
        VocabId::OlacLanguage,
        VocabId::OlacData,
        VocabId::OlacRole,
        VocabId::OlacCpu,
        VocabId::OlacEncoding,
        VocabId::OlacFormat,
        VocabId::OlacFunctionality,
        VocabId::OlacMarkup,
        VocabId::OlacOs,
        VocabId::OlacRights,
        VocabId::OlacSoftwareRights,
        VocabId::OlacSourcecode,
        VocabId::DcType,
        VocabId::DcqDate,
        VocabId::DcqRelation,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            VocabId::OlacLanguage => "OLAC-Language",
            VocabId::OlacData => "OLAC-Data",
            VocabId::OlacRole => "OLAC-Role",
            VocabId::OlacCpu => "OLAC-CPU",
            VocabId::OlacEncoding => "OLAC-Encoding",
            VocabId::OlacFormat => "OLAC-Format",
            VocabId::OlacFunctionality => "OLAC-Functionality",
            VocabId::OlacMarkup => "OLAC-Markup",
            VocabId::OlacOs => "OLAC-OS",
            VocabId::OlacRights => "OLAC-Rights",
            VocabId::OlacSoftwareRights => "OLAC-Software-Rights",
            VocabId::OlacSourcecode => "OLAC-Sourcecode",
            VocabId::DcType => "DC-Type",
            VocabId::DcqDate => "DCQ-Date",
            VocabId::DcqRelation => "DCQ-Relation",
        }
    }

    /// Vocabularies whose hierarchical parents ("families", top-level types)
    /// must themselves be listed terms.
    pub fn requires_listed_parents(self) -> bool {
        matches!(self, VocabId::OlacOs | VocabId::OlacData)
    }
}

impl fmt::Display for VocabId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for VocabId {
    type Err = VocabError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        VocabId::ALL
            .into_iter()
            .find(|id| id.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| VocabError::UnknownVocabulary(s.to_string()))
    }
}

impl TryFrom<String> for VocabId {
    type Error = VocabError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<VocabId> for String {
    fn from(id: VocabId) -> String {
        id.as_str().to_string()
    }
}

#[derive(Debug, Error)]
pub enum VocabError {
    #[error("unknown vocabulary {0:?}")]
    UnknownVocabulary(String),
    #[error("code {code:?} is not in {vocab}")]
    CodeUnknown { vocab: VocabId, code: String },
    #[error("code {code:?} in {vocab} is ambiguous ({label}); an Ethnologue x-sil- code is required")]
    CodeAmbiguous {
        vocab: VocabId,
        code: String,
        label: String,
    },
    #[error("malformed Ethnologue code {0:?}: expected exactly three ASCII letters")]
    MalformedEthnologueCode(String),
    #[error("duplicate code {code:?} in {vocab}")]
    DuplicateCode { vocab: VocabId, code: String },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid registry: {0}")]
    InvalidRegistry(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// One enumerated value of a vocabulary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VocabTerm {
    code: String,
    labels: BTreeMap<String, String>,
    ambiguous: bool,
    note: Option<String>,
}

impl VocabTerm {
    pub fn new(code: impl Into<String>, en_label: impl Into<String>) -> Self {
        let mut labels = BTreeMap::new();
        labels.insert("en".to_string(), en_label.into());
        VocabTerm {
            code: code.into(),
            labels,
            ambiguous: false,
            note: None,
        }
    }

    pub fn with_label(mut self, lang: impl Into<String>, label: impl Into<String>) -> Self {
        self.labels.insert(lang.into(), label.into());
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn ambiguous(mut self, ambiguous: bool) -> Self {
        self.ambiguous = ambiguous;
        self
    }

    pub fn code(&self) -> &str {
        &self.code
    }

    /// Label in `display_lang`, falling back to English.
    pub fn label(&self, display_lang: &str) -> &str {
        self.labels
            .iter()
            .find(|(lang, _)| lang.eq_ignore_ascii_case(display_lang))
            .map(|(_, label)| label.as_str())
            .unwrap_or_else(|| self.en_label())
    }

    pub fn en_label(&self) -> &str {
        self.labels.get("en").map(String::as_str).unwrap_or(&self.code)
    }

    pub fn labels(&self) -> &BTreeMap<String, String> {
        &self.labels
    }

    pub fn is_ambiguous(&self) -> bool {
        self.ambiguous
    }

    pub fn note(&self) -> Option<&str> {
        self.note.as_deref()
    }

    /// `"Unix"` for `"Unix/Solaris"`, `None` for a top-level code.
    pub fn parent_code(&self) -> Option<&str> {
        self.code.rsplit_once('/').map(|(parent, _)| parent)
    }
}

/// How a code was resolved against a vocabulary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResolvedKind {
    /// An enumerated term.
    Listed,
    /// A family prefix of enumerated terms that is not itself listed.
    Family,
    /// Accepted by an open vocabulary without being enumerated; callers
    /// should surface a warning.
    Unlisted,
}

#[derive(Debug, Clone)]
pub struct Resolved<'a> {
    term: Cow<'a, VocabTerm>,
    kind: ResolvedKind,
}

impl<'a> Resolved<'a> {
    pub fn term(&self) -> &VocabTerm {
        &self.term
    }

    pub fn into_term(self) -> VocabTerm {
        self.term.into_owned()
    }

    pub fn kind(&self) -> ResolvedKind {
        self.kind
    }

    pub fn is_unlisted(&self) -> bool {
        self.kind == ResolvedKind::Unlisted
    }

    pub fn code(&self) -> &str {
        self.term.code()
    }
}

/// An enumerated code list.
#[derive(Debug, Clone)]
pub struct Vocabulary {
    id: VocabId,
    open: bool,
    terms: Vec<VocabTerm>,
    by_key: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn new(id: VocabId, open: bool, terms: Vec<VocabTerm>) -> Result<Self, VocabError> {
        let mut by_key = HashMap::with_capacity(terms.len());
        for (i, term) in terms.iter().enumerate() {
            if by_key.insert(term.code.to_ascii_lowercase(), i).is_some() {
                return Err(VocabError::DuplicateCode {
                    vocab: id,
                    code: term.code.clone(),
                });
            }
        }
        let vocab = Vocabulary {
            id,
            open,
            terms,
            by_key,
        };
        if id.requires_listed_parents() {
            for term in &vocab.terms {
                if let Some(parent) = term.parent_code() {
                    if vocab.get(parent).is_none() {
                        return Err(VocabError::InvalidRegistry(format!(
                            "{id}: parent {parent:?} of {:?} is not a listed term",
                            term.code
                        )));
                    }
                }
            }
        }
        Ok(vocab)
    }

    pub fn id(&self) -> VocabId {
        self.id
    }

    pub fn is_open(&self) -> bool {
        self.open
    }

    pub fn terms(&self) -> &[VocabTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Case-insensitive exact lookup; ambiguity is not checked.
    pub fn get(&self, code: &str) -> Option<&VocabTerm> {
        self.by_key.get(&code.to_ascii_lowercase()).map(|&i| &self.terms[i])
    }

    /// Resolves `code` to a term in its canonical (stored) form.
    pub fn resolve(&self, code: &str) -> Result<Resolved<'_>, VocabError> {
        if let Some(term) = self.get(code) {
            if term.ambiguous {
                return Err(VocabError::CodeAmbiguous {
                    vocab: self.id,
                    code: term.code.clone(),
                    label: term.en_label().to_string(),
                });
            }
            return Ok(Resolved {
                term: Cow::Borrowed(term),
                kind: ResolvedKind::Listed,
            });
        }
        if let Some(family) = self.family_of(code) {
            return Ok(Resolved {
                term: Cow::Owned(VocabTerm::new(family.clone(), family)),
                kind: ResolvedKind::Family,
            });
        }
        if self.open && self.accepts_unlisted(code) {
            return Ok(Resolved {
                term: Cow::Owned(VocabTerm::new(code, code)),
                kind: ResolvedKind::Unlisted,
            });
        }
        Err(VocabError::CodeUnknown {
            vocab: self.id,
            code: code.to_string(),
        })
    }

    // Canonical spelling of `code` when it is a strict prefix (at a `/`
    // boundary) of some listed code.
    fn family_of(&self, code: &str) -> Option<String> {
        if code.is_empty() || code.ends_with('/') {
            return None;
        }
        let wanted = code.len();
        self.terms.iter().find_map(|term| {
            let c = &term.code;
            (c.len() > wanted && c.as_bytes()[wanted] == b'/' && c[..wanted].eq_ignore_ascii_case(code))
                .then(|| c[..wanted].to_string())
        })
    }

    fn accepts_unlisted(&self, code: &str) -> bool {
        if code.is_empty() || code.chars().any(char::is_whitespace) {
            return false;
        }
        match self.id {
            VocabId::OlacMarkup => is_oai_identifier(code),
            _ => true,
        }
    }
}

/// `oai:<archive>:<local>` with non-empty segments.
pub fn is_oai_identifier(s: &str) -> bool {
    let mut parts = s.splitn(3, ':');
    matches!(
        (parts.next(), parts.next(), parts.next()),
        (Some("oai"), Some(archive), Some(local)) if !archive.is_empty() && !local.is_empty()
    ) && !s.chars().any(char::is_whitespace)
}

/// Builds the RFC-3066 extension identifier for a three-letter Ethnologue
/// code, e.g. `"ban"` becomes `"x-sil-BAN"`.
pub fn build_extension_code(ethnologue_code: &str) -> Result<String, VocabError> {
    if ethnologue_code.len() != 3 || !ethnologue_code.bytes().all(|b| b.is_ascii_alphabetic()) {
        return Err(VocabError::MalformedEthnologueCode(ethnologue_code.to_string()));
    }
    Ok(format!("x-sil-{}", ethnologue_code.to_ascii_uppercase()))
}

fn is_extension_code(code: &str) -> bool {
    code.strip_prefix("x-sil-")
        .is_some_and(|rest| rest.len() == 3 && rest.bytes().all(|b| b.is_ascii_uppercase()))
}

/// Parses one vocabulary file.
pub fn parse_vocabulary(text: &str) -> Result<Vocabulary, VocabError> {
    let mut header: Option<(VocabId, bool)> = None;
    let mut terms = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let parse_err = |message: String| VocabError::Parse { line: line_no, message };
        let Some((id, _)) = header else {
            header = Some(parse_header(line).map_err(parse_err)?);
            continue;
        };
        let mut fields = line.split('\t');
        let code = fields.next().unwrap_or_default().trim();
        let label = fields.next().map(str::trim).unwrap_or_default();
        if code.is_empty() || label.is_empty() {
            return Err(parse_err("term line must be code<TAB>en-label".to_string()));
        }
        let mut term = VocabTerm::new(code, label);
        for field in fields {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| parse_err(format!("expected key=value, found {field:?}")))?;
            match key.trim() {
                "ambiguous" => {
                    term.ambiguous = value
                        .trim()
                        .parse()
                        .map_err(|_| parse_err(format!("ambiguous must be true or false, found {value:?}")))?;
                }
                "note" => term.note = Some(value.trim().to_string()),
                k if k.starts_with("label.") && k.len() > "label.".len() => {
                    term.labels
                        .insert(k["label.".len()..].to_string(), value.trim().to_string());
                }
                other => return Err(parse_err(format!("unknown term key {other:?}"))),
            }
        }
        if id == VocabId::OlacLanguage && code.starts_with("x-") && !is_extension_code(code) {
            return Err(parse_err(format!(
                "extension code {code:?} must have the form x-sil-XXX"
            )));
        }
        terms.push(term);
    }
    let (id, open) = header.ok_or(VocabError::Parse {
        line: text.lines().count().max(1),
        message: "missing `vocabulary: <id> open: <bool>` header".to_string(),
    })?;
    Vocabulary::new(id, open, terms)
}

fn parse_header(line: &str) -> Result<(VocabId, bool), String> {
    let mut words = line.split_whitespace();
    match (words.next(), words.next(), words.next(), words.next(), words.next()) {
        (Some("vocabulary:"), Some(id), Some("open:"), Some(open), None) => {
            let id = id.parse::<VocabId>().map_err(|e| e.to_string())?;
            let open = open
                .parse::<bool>()
                .map_err(|_| format!("open must be true or false, found {open:?}"))?;
            Ok((id, open))
        }
        _ => Err(format!(
            "expected `vocabulary: <id> open: <true|false>`, found {line:?}"
        )),
    }
}

pub fn load_vocabulary_file(path: impl AsRef<Path>) -> Result<Vocabulary, VocabError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| VocabError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_vocabulary(&text)
}

const BUILTIN_VOCABULARIES: [&str; 15] = [
    include_str!("../data/vocab/olac-language.vocab"),
    include_str!("../data/vocab/olac-data.vocab"),
    include_str!("../data/vocab/olac-role.vocab"),
    include_str!("../data/vocab/olac-cpu.vocab"),
    include_str!("../data/vocab/olac-encoding.vocab"),
    include_str!("../data/vocab/olac-format.vocab"),
    include_str!("../data/vocab/olac-functionality.vocab"),
    include_str!("../data/vocab/olac-markup.vocab"),
    include_str!("../data/vocab/olac-os.vocab"),
    include_str!("../data/vocab/olac-rights.vocab"),
    include_str!("../data/vocab/olac-software-rights.vocab"),
    include_str!("../data/vocab/olac-sourcecode.vocab"),
    include_str!("../data/vocab/dc-type.vocab"),
    include_str!("../data/vocab/dcq-date.vocab"),
    include_str!("../data/vocab/dcq-relation.vocab"),
];

const BUILTIN_LANGUAGE_MAP: &str = include_str!("../data/vocab/language-map.tsv");

/// File name of the ISO/Ethnologue mapping inside a vocabulary directory.
pub const LANGUAGE_MAP_FILE: &str = "language-map.tsv";

/// The full set of vocabularies plus the ISO/Ethnologue dual-code table.
///
/// Built once and read-only afterwards.
#[derive(Debug, Clone)]
pub struct VocabularyRegistry {
    vocabs: BTreeMap<VocabId, Vocabulary>,
    // lowercase ISO code -> canonical x-sil code, and the reverse
    iso_to_ext: BTreeMap<String, String>,
    ext_to_iso: BTreeMap<String, String>,
}

impl VocabularyRegistry {
    /// The sample registry embedded in the crate.
    pub fn builtin() -> Self {
        let vocabs = BUILTIN_VOCABULARIES
            .iter()
            .map(|text| parse_vocabulary(text).expect("embedded vocabulary is valid"))
            .collect();
        Self::from_parts(vocabs, BUILTIN_LANGUAGE_MAP).expect("embedded registry is valid")
    }

    /// Loads every `*.vocab` file plus `language-map.tsv` (optional) from `dir`.
    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Self, VocabError> {
        let dir = dir.as_ref();
        let io_err = |source| VocabError::Io {
            path: dir.to_path_buf(),
            source,
        };
        let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
            .map_err(io_err)?
            .filter_map(|entry| entry.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|ext| ext == "vocab"))
            .collect();
        paths.sort();
        let mut vocabs = Vec::with_capacity(paths.len());
        for path in &paths {
            let vocab = load_vocabulary_file(path).map_err(|e| match e {
                VocabError::Parse { line, message } => VocabError::Parse {
                    line,
                    message: format!("{}: {message}", path.display()),
                },
                other => other,
            })?;
            vocabs.push(vocab);
        }
        let map_path = dir.join(LANGUAGE_MAP_FILE);
        let mapping = if map_path.exists() {
            std::fs::read_to_string(&map_path).map_err(|source| VocabError::Io {
                path: map_path.clone(),
                source,
            })?
        } else {
            String::new()
        };
        Self::from_parts(vocabs, &mapping)
    }

    pub fn from_parts(vocabularies: Vec<Vocabulary>, language_map: &str) -> Result<Self, VocabError> {
        let mut vocabs = BTreeMap::new();
        for vocab in vocabularies {
            let id = vocab.id;
            if vocabs.insert(id, vocab).is_some() {
                return Err(VocabError::InvalidRegistry(format!("{id} defined twice")));
            }
        }
        if let Some(missing) = VocabId::ALL.iter().find(|id| !vocabs.contains_key(id)) {
            return Err(VocabError::InvalidRegistry(format!("{missing} is missing")));
        }
        let mut registry = VocabularyRegistry {
            vocabs,
            iso_to_ext: BTreeMap::new(),
            ext_to_iso: BTreeMap::new(),
        };
        registry.load_language_map(language_map)?;
        Ok(registry)
    }

    fn load_language_map(&mut self, text: &str) -> Result<(), VocabError> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |message: String| VocabError::Parse {
                line: n + 1,
                message: format!("{LANGUAGE_MAP_FILE}: {message}"),
            };
            let (iso, eth) = line
                .split_once('\t')
                .ok_or_else(|| parse_err("expected iso<TAB>ethnologue".to_string()))?;
            let ext = build_extension_code(eth.trim()).map_err(|e| parse_err(e.to_string()))?;
            let languages = self.vocabulary(VocabId::OlacLanguage);
            let iso_term = languages
                .resolve(iso.trim())
                .map_err(|e| parse_err(e.to_string()))?
                .into_term();
            if iso_term.code().len() != 2 {
                return Err(parse_err(format!("{iso:?} is not a two-letter ISO code")));
            }
            let ext_term = languages
                .get(&ext)
                .ok_or_else(|| parse_err(format!("{ext} is not registered in OLAC-Language")))?;
            if ext_term.en_label() != iso_term.en_label() {
                return Err(parse_err(format!(
                    "labels differ: {} is {:?} but {ext} is {:?}",
                    iso_term.code(),
                    iso_term.en_label(),
                    ext_term.en_label()
                )));
            }
            let iso_key = iso_term.code().to_ascii_lowercase();
            if self.iso_to_ext.contains_key(&iso_key) || self.ext_to_iso.contains_key(&ext) {
                return Err(parse_err(format!("duplicate mapping for {iso_key} or {ext}")));
            }
            self.iso_to_ext.insert(iso_key, ext.clone());
            self.ext_to_iso.insert(ext, iso_term.code().to_string());
        }
        Ok(())
    }

    pub fn vocabulary(&self, id: VocabId) -> &Vocabulary {
        // from_parts guarantees totality over VocabId::ALL
        &self.vocabs[&id]
    }

    pub fn vocabularies(&self) -> impl Iterator<Item = &Vocabulary> {
        self.vocabs.values()
    }

    pub fn resolve(&self, id: VocabId, code: &str) -> Result<Resolved<'_>, VocabError> {
        self.vocabulary(id).resolve(code)
    }

    /// Label for `code` in `display_lang`, falling back to English.
    pub fn label(&self, id: VocabId, code: &str, display_lang: &str) -> Result<String, VocabError> {
        Ok(self.resolve(id, code)?.term().label(display_lang).to_string())
    }

    /// Both spellings of a language with a registered ISO/Ethnologue pair,
    /// or just the ISO code when no pair exists.
    pub fn dual_codes(&self, iso_code: &str) -> Result<BTreeSet<String>, VocabError> {
        let resolved = self.resolve(VocabId::OlacLanguage, iso_code)?;
        let code = resolved.code().to_string();
        let mut codes = BTreeSet::from([code.clone()]);
        if let Some(ext) = self.iso_to_ext.get(&code.to_ascii_lowercase()) {
            codes.insert(ext.clone());
        }
        Ok(codes)
    }

    /// Canonical form of a resolvable code: the stored spelling, with
    /// Ethnologue codes that have an ISO twin folded onto the ISO code.
    pub fn canonical_code(&self, id: VocabId, code: &str) -> Result<String, VocabError> {
        let resolved = self.resolve(id, code)?;
        let canonical = resolved.code();
        if id == VocabId::OlacLanguage {
            if let Some(iso) = self.ext_to_iso.get(canonical) {
                return Ok(iso.clone());
            }
        }
        Ok(canonical.to_string())
    }

    pub fn languages(&self) -> LanguageRegistry<'_> {
        LanguageRegistry { registry: self }
    }
}

impl Default for VocabularyRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

/// Read-only view of OLAC-Language split by code family.
#[derive(Debug, Clone, Copy)]
pub struct LanguageRegistry<'a> {
    registry: &'a VocabularyRegistry,
}

impl<'a> LanguageRegistry<'a> {
    fn terms(&self) -> impl Iterator<Item = &'a VocabTerm> {
        self.registry.vocabulary(VocabId::OlacLanguage).terms().iter()
    }

    pub fn iso_terms(&self) -> impl Iterator<Item = &'a VocabTerm> {
        self.terms()
            .filter(|t| !t.is_ambiguous() && !is_extension_code(t.code()))
    }

    pub fn extension_terms(&self) -> impl Iterator<Item = &'a VocabTerm> {
        self.terms().filter(|t| is_extension_code(t.code()))
    }

    pub fn ambiguous_terms(&self) -> impl Iterator<Item = &'a VocabTerm> {
        self.terms().filter(|t| t.is_ambiguous())
    }

    /// Registered (iso, x-sil) pairs.
    pub fn dual_pairs(&self) -> impl Iterator<Item = (&'a str, &'a str)> {
        self.registry
            .ext_to_iso
            .iter()
            .map(|(ext, iso)| (iso.as_str(), ext.as_str()))
    }
}
