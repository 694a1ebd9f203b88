//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Run with `cargo test -p olac-core --test acceptance`.

mod common;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use olac::clock::{parse_datestamp, DayBound, ManualClock};
use olac::harvest::{HttpTransport, LocalTransport, Transport, TransportError};
use olac::model::{render_view, validate_record, ElementName, MetadataElement, MetadataRecord, ModelError};
use olac::oai::envelope::{parse_envelope, Body};
use olac::oai::server::serve_provider;
use olac::oai::{OaiErrorCode, Repository, RepositoryConfig};
use olac::{
    dc_crosswalk, fixtures, parse_record, serialize_record, Catalog, CatalogEntry, Clause, HarvestMode, Harvester,
    HarvesterConfig, Query, VocabId, VocabularyRegistry,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 8] = [
        ("federation scenario over HTTP", federation_scenario),
        ("KPML round-trip", kpml_round_trip),
        ("ambiguity gate", ambiguity_gate),
        ("multilingual view rules", multilingual_view),
        ("search/join oracle equivalence", search_join_oracle),
        ("harvest convergence", harvest_convergence),
        ("crosswalk totality", crosswalk_totality),
        ("paging completeness", paging_completeness),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let started = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let ms = started.elapsed().as_millis();
        match outcome {
            Ok(detail) => println!("PASS {name} ({detail}; {ms} ms)"),
            Err(reason) => {
                failed += 1;
                println!("FAIL {name}: {reason}");
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn runtime() -> tokio::runtime::Runtime {
    tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .unwrap()
}

fn ids(entries: &[CatalogEntry]) -> Vec<String> {
    entries.iter().map(|e| e.identifier.clone()).collect()
}

// ---- federation ------------------------------------------------------------

fn federation_scenario() -> Outcome {
    let started = Instant::now();
    let reg = common::registry();
    runtime().block_on(async move {
        let mut urls = Vec::new();
        for (archive, name, id, xml) in fixtures::FEDERATION {
            let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
            let url = format!("http://{}/", listener.local_addr().unwrap());
            let repo = Repository::new(RepositoryConfig::new(archive, name).with_base_url(&url), reg.clone())
                .map_err(|e| e.to_string())?;
            repo.put(id, parse_record(xml.as_bytes()).unwrap().record)
                .map_err(|e| e.to_string())?;
            tokio::spawn(serve_provider(Arc::new(repo), listener));
            urls.push(url);
        }
        let catalog = Arc::new(Catalog::new(reg));
        let harvester = Harvester::new(catalog.clone(), HttpTransport::default(), HarvesterConfig::default());
        for url in &urls {
            harvester.register_provider(url).await.map_err(|e| e.to_string())?;
        }
        let reports = harvester
            .harvest_all(HarvestMode::Full)
            .await
            .map_err(|e| e.to_string())?;
        ensure(reports.iter().all(|r| r.is_complete()), || format!("{reports:?}"))?;
        let hits = catalog
            .search(&"Subject.language:code:bg".parse().unwrap())
            .map_err(|e| e.to_string())?;
        let got: BTreeSet<String> = ids(&hits).into_iter().collect();
        let want: BTreeSet<String> = [fixtures::LDC94T5_ID, fixtures::ELRA_L0030_ID, fixtures::KPML_ID]
            .map(String::from)
            .into();
        ensure(got == want, || format!("bg returned {got:?}"))?;
        let elapsed = started.elapsed();
        ensure(elapsed < Duration::from_secs(5), || format!("took {elapsed:?}"))?;
        Ok(format!("3 providers, bg -> {} entries", got.len()))
    })
}

// ---- round-trip ------------------------------------------------------------

fn kpml_round_trip() -> Outcome {
    let reg = VocabularyRegistry::builtin();
    let first = parse_record(fixtures::KPML_XML.as_bytes()).map_err(|e| e.to_string())?;
    let errors: Vec<_> = validate_record(&first.record, &reg)
        .into_iter()
        .filter(|d| d.is_error())
        .collect();
    ensure(errors.is_empty(), || format!("validation errors: {errors:?}"))?;
    let xml = serialize_record(&first.record, &reg).map_err(|e| e.to_string())?;
    let second = parse_record(xml.as_bytes()).map_err(|e| e.to_string())?;
    ensure(second.record == first.record, || "re-parsed record differs".into())?;
    Ok(format!("{} elements", first.record.elements().len()))
}

// ---- ambiguity -------------------------------------------------------------

fn ambiguity_gate() -> Outcome {
    const PHRASE: &str = "other Mon Khmer languages";
    let reg = common::registry();

    let parsed = parse_record(fixtures::AMBIGUOUS_MHK_XML.as_bytes()).map_err(|e| e.to_string())?;
    let diags = validate_record(&parsed.record, &reg);
    ensure(
        diags
            .iter()
            .any(|d| d.is_error() && d.rule.as_str() == "CODE_AMBIGUOUS" && d.message.contains(PHRASE)),
        || format!("validation gave {diags:?}"),
    )?;
    let built = MetadataRecord::from_elements(vec![MetadataElement::coded(ElementName::SubjectLanguage, "mhk")]);
    let diags = validate_record(&built, &reg);
    ensure(diags.len() == 1 && diags[0].rule.as_str() == "CODE_AMBIGUOUS", || {
        format!("single mhk element gave {diags:?}")
    })?;

    let catalog = Catalog::new(reg.clone());
    catalog
        .upsert(CatalogEntry::new(
            fixtures::KPML_ID,
            olac::oai::epoch_sentinel(),
            fixtures::kpml(),
        ))
        .map_err(|e| e.to_string())?;
    for q in ["Subject.language:code:mhk", "any:code:mhk", "any:any:mhk"] {
        match catalog.search(&q.parse().unwrap()) {
            Err(e) if e.to_string().contains(PHRASE) => {}
            other => return Err(format!("{q} gave {other:?}")),
        }
    }

    let label = reg
        .label(VocabId::OlacLanguage, "x-sil-BAN", "en")
        .map_err(|e| e.to_string())?;
    ensure(label == "Foreke Dschang", || format!("x-sil-BAN label {label:?}"))?;
    Ok("mhk rejected at validation and query".into())
}

// ---- multilingual view -----------------------------------------------------

const VIEW_LANGS: [&str; 9] = ["en", "fr", "de", "cs", "x-sil-BAN", "hu", "EN", "Fr", "ru"];

#[derive(Debug, Clone)]
struct ViewCase {
    record: MetadataRecord,
    selected: String,
    suppressed: Vec<String>,
}

fn view_case() -> impl Strategy<Value = ViewCase> {
    let element = (
        proptest::sample::select(vec![ElementName::Title, ElementName::Description, ElementName::Subject]),
        proptest::option::of(proptest::sample::select(VIEW_LANGS.to_vec())),
        "[a-z]{0,6}",
    )
        .prop_map(|(name, lang, text)| {
            let e = MetadataElement::new(name, text);
            match lang {
                Some(l) => e.with_lang(l),
                None => e,
            }
        });
    (
        common::alternatives(),
        proptest::collection::vec(element, 0..10),
        proptest::bool::weighted(0.9),
        proptest::sample::select(VIEW_LANGS.to_vec()),
        proptest::sample::subsequence(VIEW_LANGS.to_vec(), 0..4),
        any::<prop::sample::Index>(),
    )
        .prop_map(|(alts, elements, pick_alt, other, suppressed, index)| {
            let selected = if pick_alt {
                index.get(&alts).clone()
            } else {
                other.to_string()
            };
            ViewCase {
                record: MetadataRecord::new(alts, elements),
                selected,
                suppressed: suppressed.into_iter().map(String::from).collect(),
            }
        })
}

fn lang_in(lang: &str, set: &[String]) -> bool {
    set.iter().any(|s| s.eq_ignore_ascii_case(lang))
}

/// The display rules written out directly: positions of the elements to show,
/// or `None` when `selected` must be refused.
fn expected_view(case: &ViewCase) -> Option<Vec<usize>> {
    let alts = case.record.alternatives();
    let effective = |e: &MetadataElement| e.lang().unwrap_or("en").to_string();
    let mut out = Vec::new();
    if alts.len() == 1 {
        for (i, e) in case.record.elements().iter().enumerate() {
            if !lang_in(&effective(e), &case.suppressed) {
                out.push(i);
            }
        }
        return Some(out);
    }
    if !lang_in(&case.selected, alts) {
        return None;
    }
    for (i, e) in case.record.elements().iter().enumerate() {
        let lang = effective(e);
        let is_selected = lang.eq_ignore_ascii_case(&case.selected);
        let is_other_alternative = lang_in(&lang, alts) && !is_selected;
        if !is_other_alternative {
            out.push(i);
        }
    }
    Some(out)
}

fn multilingual_view() -> Outcome {
    // the worked example first
    let record = MetadataRecord::new(
        vec!["en".into(), "fr".into()],
        vec![
            MetadataElement::new(ElementName::Title, "Title").with_lang("en"),
            MetadataElement::new(ElementName::Title, "Titre").with_lang("fr"),
            MetadataElement::new(ElementName::Title, "Vernacular").with_lang("x-sil-BAN"),
        ],
    );
    let contents = |sel: &str| -> Vec<String> {
        render_view(&record, sel, &[])
            .unwrap()
            .into_iter()
            .map(|e| e.content().to_string())
            .collect()
    };
    ensure(contents("en") == ["Title", "Vernacular"], || {
        format!("en: {:?}", contents("en"))
    })?;
    ensure(contents("fr") == ["Titre", "Vernacular"], || {
        format!("fr: {:?}", contents("fr"))
    })?;

    const CASES: u32 = 1000;
    let mut runner = TestRunner::new(Config {
        cases: CASES,
        failure_persistence: None,
        ..Config::default()
    });
    runner
        .run(&view_case(), |case| {
            let suppressed: Vec<&str> = case.suppressed.iter().map(String::as_str).collect();
            let got = render_view(&case.record, &case.selected, &suppressed);
            match (expected_view(&case), got) {
                (None, Err(ModelError::SelectedNotAlternative { .. })) => Ok(()),
                (Some(want), Ok(view)) => {
                    let positions: Vec<usize> = view
                        .iter()
                        .map(|v| {
                            case.record
                                .elements()
                                .iter()
                                .position(|e| std::ptr::eq(e, *v))
                                .expect("output element comes from the record")
                        })
                        .collect();
                    prop_assert_eq!(positions, want);
                    Ok(())
                }
                (want, got) => Err(TestCaseError::fail(format!("expected {want:?}, got {got:?}"))),
            }
        })
        .map_err(|e| e.to_string())?;
    Ok(format!("{CASES} generated cases"))
}

// ---- search / join oracle --------------------------------------------------

const QUERY_ELEMENTS: [Option<ElementName>; 8] = [
    Some(ElementName::SubjectLanguage),
    Some(ElementName::Language),
    Some(ElementName::FormatOs),
    Some(ElementName::FormatMarkup),
    Some(ElementName::TypeFunctionality),
    Some(ElementName::Title),
    Some(ElementName::Description),
    None,
];

const LANGUAGE_CODES: [&str; 7] = ["bg", "x-sil-BUL", "en", "hu", "x-sil-HNG", "fr", "x-sil-BAN"];
const OS_CODES: [&str; 6] = [
    "Unix",
    "Unix/Linux",
    "Unix/Solaris",
    "MSWindows",
    "MSWindows/winNT",
    "MacOS",
];
const MARKUP_CODES: [&str; 3] = ["oai:ex:sf", "oai:ex:other", "oai:ex:tei"];
const WORDS: [&str; 6] = ["bulgarian", "lexicon", "corpus", "unix tools", "Hungarian", "speech"];

fn oracle_element() -> impl Strategy<Value = MetadataElement> {
    let lang = proptest::sample::select(LANGUAGE_CODES.to_vec());
    let os = proptest::sample::select(OS_CODES.to_vec());
    let markup = proptest::sample::select(MARKUP_CODES.to_vec());
    let word = proptest::sample::select(WORDS.to_vec());
    prop_oneof![
        (lang.clone(), proptest::option::of(word.clone())).prop_map(|(c, w)| MetadataElement::new(
            ElementName::SubjectLanguage,
            w.unwrap_or_default()
        )
        .with_code(c)),
        lang.prop_map(|c| MetadataElement::coded(ElementName::Language, c)),
        os.prop_map(|c| MetadataElement::coded(ElementName::FormatOs, c)),
        markup.prop_map(|c| MetadataElement::coded(ElementName::FormatMarkup, c)),
        word.clone()
            .prop_map(|w| MetadataElement::new(ElementName::TypeFunctionality, w)),
        word.clone().prop_map(|w| MetadataElement::new(ElementName::Title, w)),
        word.prop_map(|w| MetadataElement::new(ElementName::Description, w)),
    ]
}

fn oracle_clause() -> impl Strategy<Value = Clause> {
    let mut values: Vec<&str> = Vec::new();
    values.extend(LANGUAGE_CODES);
    values.extend(OS_CODES);
    values.extend(MARKUP_CODES);
    values.extend(["unix", "BG", "bul", "lex", "", "mhk", "zz-zz", "Hungarian"]);
    (
        proptest::sample::select(QUERY_ELEMENTS.to_vec()),
        proptest::sample::select(vec!["code", "text", "any"]),
        proptest::sample::select(values),
    )
        .prop_map(|(element, kind, value)| {
            let element = element.map_or("any", ElementName::as_str);
            format!("{element}:{kind}:{value}").parse().unwrap()
        })
}

fn oracle_query() -> impl Strategy<Value = Query> {
    proptest::collection::vec(oracle_clause(), 1..=3).prop_map(|c| Query::new(c).unwrap())
}

#[derive(Debug, Clone)]
struct OracleCase {
    records: Vec<MetadataRecord>,
    search: Query,
    left: Query,
    right: Query,
    join_on: ElementName,
}

fn oracle_case() -> impl Strategy<Value = OracleCase> {
    (
        proptest::collection::vec(
            proptest::collection::vec(oracle_element(), 0..6).prop_map(MetadataRecord::from_elements),
            0..=50,
        ),
        oracle_query(),
        oracle_query(),
        oracle_query(),
        proptest::sample::select(vec![
            ElementName::SubjectLanguage,
            ElementName::Language,
            ElementName::FormatOs,
            ElementName::FormatMarkup,
            ElementName::Title,
        ]),
    )
        .prop_map(|(records, search, left, right, join_on)| OracleCase {
            records,
            search,
            left,
            right,
            join_on,
        })
}

/// Codes a clause value stands for, per vocabulary, lowercased canonical.
/// `Err` when the clause must be refused.
fn clause_codes(reg: &VocabularyRegistry, clause: &Clause) -> Result<Vec<(VocabId, String)>, String> {
    use olac::catalog::{ElementSelector, MatchKind};
    if clause.kind == MatchKind::Text {
        return Ok(Vec::new());
    }
    let vocabs: BTreeSet<VocabId> = match clause.element {
        ElementSelector::Named(n) => n.descriptor().code_vocabulary.into_iter().collect(),
        ElementSelector::Any => ElementName::ALL
            .iter()
            .filter_map(|n| n.descriptor().code_vocabulary)
            .collect(),
    };
    if vocabs.is_empty() && clause.kind == MatchKind::Code {
        return Err("not coded".into());
    }
    let mut out = Vec::new();
    for v in vocabs {
        match reg.canonical_code(v, &clause.value) {
            Ok(c) => out.push((v, c.to_lowercase())),
            Err(e) if e.to_string().contains("ambiguous") => return Err(e.to_string()),
            Err(_) => {}
        }
    }
    if out.is_empty() && clause.kind == MatchKind::Code {
        return Err("unknown code".into());
    }
    Ok(out)
}

fn element_code(reg: &VocabularyRegistry, e: &MetadataElement) -> Option<(VocabId, String)> {
    let v = e.descriptor().code_vocabulary?;
    let c = reg.canonical_code(v, e.code()?).ok()?;
    Some((v, c.to_lowercase()))
}

fn brute_matches(reg: &VocabularyRegistry, query: &Query, record: &MetadataRecord) -> Result<bool, String> {
    use olac::catalog::{ElementSelector, MatchKind};
    let mut all = true;
    for clause in query.clauses() {
        let codes = clause_codes(reg, clause)?;
        let needle = clause.value.to_lowercase();
        let hit = record.elements().iter().any(|e| {
            let selected = match clause.element {
                ElementSelector::Any => true,
                ElementSelector::Named(n) => n == e.name(),
            };
            if !selected {
                return false;
            }
            let by_code = clause.kind != MatchKind::Text
                && element_code(reg, e).is_some_and(|(v, have)| {
                    codes
                        .iter()
                        .any(|(qv, q)| *qv == v && (have == *q || have.starts_with(&format!("{q}/"))))
                });
            let by_text = clause.kind != MatchKind::Code && e.content().to_lowercase().contains(&needle);
            by_code || by_text
        });
        all &= hit;
    }
    Ok(all)
}

fn brute_search(reg: &VocabularyRegistry, query: &Query, entries: &[CatalogEntry]) -> Result<Vec<String>, String> {
    for clause in query.clauses() {
        clause_codes(reg, clause)?;
    }
    let mut out = Vec::new();
    for e in entries {
        if brute_matches(reg, query, &e.record)? {
            out.push(e.identifier.clone());
        }
    }
    out.sort();
    Ok(out)
}

fn brute_join(
    reg: &VocabularyRegistry,
    case: &OracleCase,
    entries: &[CatalogEntry],
) -> Result<Vec<(String, String)>, String> {
    if case.join_on.descriptor().code_vocabulary.is_none() {
        return Err("not coded".into());
    }
    let codes = |r: &MetadataRecord| -> BTreeSet<String> {
        r.elements_named(case.join_on)
            .filter_map(|e| element_code(reg, e))
            .map(|(_, c)| c)
            .collect()
    };
    let lefts = brute_search(reg, &case.left, entries)?;
    let rights = brute_search(reg, &case.right, entries)?;
    let by_id: BTreeMap<&str, &CatalogEntry> = entries.iter().map(|e| (e.identifier.as_str(), e)).collect();
    let mut out = Vec::new();
    for l in &lefts {
        for r in &rights {
            if l != r && !codes(&by_id[l.as_str()].record).is_disjoint(&codes(&by_id[r.as_str()].record)) {
                out.push((l.clone(), r.clone()));
            }
        }
    }
    out.sort();
    Ok(out)
}

fn search_join_oracle() -> Outcome {
    const CASES: u32 = 200;
    let reg = common::registry();
    let mut runner = TestRunner::new(Config {
        cases: CASES,
        failure_persistence: None,
        ..Config::default()
    });
    let stamp = olac::oai::epoch_sentinel();
    let total = Mutex::new((0usize, 0usize));
    runner
        .run(&oracle_case(), |case| {
            let catalog = Catalog::new(reg.clone());
            let mut entries = Vec::new();
            for (i, record) in case.records.iter().enumerate() {
                let entry = CatalogEntry::new(format!("oai:p{}:r{i:02}", i % 3), stamp, record.clone());
                catalog
                    .upsert(entry.clone())
                    .map_err(|e| TestCaseError::fail(format!("generated record refused: {e}")))?;
                entries.push(entry);
            }

            let want = brute_search(&reg, &case.search, &entries);
            let got = catalog.search(&case.search).map(|hits| ids(&hits));
            match (&want, &got) {
                (Ok(w), Ok(g)) => prop_assert_eq!(w, g, "query {}", case.search),
                (Err(_), Err(_)) => {}
                _ => prop_assert!(false, "query {}: oracle {:?}, index {:?}", case.search, want, got),
            }

            let want = brute_join(&reg, &case, &entries);
            let got = catalog.join_query(&case.left, &case.right, case.join_on).map(|pairs| {
                pairs
                    .into_iter()
                    .map(|(l, r)| (l.identifier, r.identifier))
                    .collect::<Vec<_>>()
            });
            match (&want, &got) {
                (Ok(w), Ok(g)) => prop_assert_eq!(w, g, "join {} x {} on {}", case.left, case.right, case.join_on),
                (Err(_), Err(_)) => {}
                _ => prop_assert!(false, "join: oracle {:?}, index {:?}", want, got),
            }
            let mut t = total.lock().unwrap();
            t.0 += 1;
            t.1 += entries.len();
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    let (cases, entries) = *total.lock().unwrap();
    Ok(format!(
        "{cases} catalogs ({entries} entries), {cases} searches and {cases} joins"
    ))
}

// ---- harvest convergence ---------------------------------------------------

/// Applies random provider mutations between page requests.
struct ChaosTransport {
    inner: LocalTransport,
    world: Arc<ChaosWorld>,
}

struct ChaosWorld {
    rng: Mutex<StdRng>,
    repos: Vec<Arc<Repository>>,
    clock: Arc<ManualClock>,
    records: Vec<MetadataRecord>,
    enabled: Mutex<bool>,
    log: Mutex<VecDeque<String>>,
}

impl ChaosWorld {
    fn mutate(&self) {
        let mut rng = self.rng.lock().unwrap();
        let repo = &self.repos[rng.gen_range(0..self.repos.len())];
        let archive = repo.config().archive_id.clone();
        match rng.gen_range(0..10) {
            0..=5 => {
                let id = format!("oai:{archive}:item{}", rng.gen_range(0..6));
                let record = self.records[rng.gen_range(0..self.records.len())].clone();
                repo.put(&id, record).unwrap();
                self.log.lock().unwrap().push_back(format!("put {id}"));
            }
            6..=7 => {
                let live: Vec<String> = repo
                    .items()
                    .into_iter()
                    .filter(|i| !i.is_deleted())
                    .map(|i| i.identifier)
                    .collect();
                if !live.is_empty() {
                    let id = &live[rng.gen_range(0..live.len())];
                    repo.delete(id).unwrap();
                    self.log.lock().unwrap().push_back(format!("delete {id}"));
                }
            }
            _ => {
                let s = rng.gen_range(0..3);
                self.clock.advance(s);
                self.log.lock().unwrap().push_back(format!("tick {s}"));
            }
        }
    }
}

impl Transport for ChaosTransport {
    async fn fetch(&self, base_url: &str, params: &[(&str, &str)]) -> Result<Vec<u8>, TransportError> {
        let chaos = *self.world.enabled.lock().unwrap() && self.world.rng.lock().unwrap().gen_bool(0.3);
        if chaos {
            self.world.mutate();
        }
        self.inner.fetch(base_url, params).await
    }
}

fn record_pool(reg: &Arc<VocabularyRegistry>) -> Vec<MetadataRecord> {
    let mut runner = TestRunner::deterministic();
    let strategy = common::valid_record(reg.clone());
    let mut pool = vec![fixtures::kpml(), fixtures::ldc94t5()];
    while pool.len() < 12 {
        let r = strategy.new_tree(&mut runner).unwrap().current();
        if !validate_record(&r, reg).iter().any(|d| d.is_error()) {
            pool.push(r);
        }
    }
    pool
}

/// Returns (live items at the end, harvests cut short by a mutation).
fn convergence_trial(
    seed: u64,
    reg: &Arc<VocabularyRegistry>,
    pool: &[MetadataRecord],
) -> Result<(usize, usize), String> {
    let start = parse_datestamp("2002-05-01T00:00:00Z", DayBound::Start).unwrap();
    let clock = Arc::new(ManualClock::new(start));
    let mut rng = StdRng::seed_from_u64(seed);
    let inner = LocalTransport::new();
    let mut repos = Vec::new();
    for archive in ["alpha", "beta"] {
        let url = format!("local://{archive}/");
        let repo = Repository::new(
            RepositoryConfig::new(archive, archive)
                .with_base_url(&url)
                .with_page_size(rng.gen_range(1..=3)),
            reg.clone(),
        )
        .unwrap()
        .with_clock(clock.clone());
        let repo = Arc::new(repo);
        inner.mount(&url, repo.clone());
        repos.push(repo);
    }
    let world = Arc::new(ChaosWorld {
        rng: Mutex::new(StdRng::seed_from_u64(seed ^ 0x5eed)),
        repos: repos.clone(),
        clock: clock.clone(),
        records: pool.to_vec(),
        enabled: Mutex::new(false),
        log: Mutex::new(VecDeque::new()),
    });
    let transport = ChaosTransport {
        inner: inner.clone(),
        world: world.clone(),
    };
    let config = HarvesterConfig {
        retry_backoff: Duration::ZERO,
        ..HarvesterConfig::default()
    };
    let catalog = Arc::new(Catalog::new(reg.clone()));
    let harvester = Harvester::new(catalog.clone(), transport, config.clone()).with_clock(clock.clone());

    let rt = tokio::runtime::Builder::new_current_thread()
        .enable_all()
        .build()
        .unwrap();
    rt.block_on(async {
        for archive in ["alpha", "beta"] {
            harvester
                .register_provider(&format!("local://{archive}/"))
                .await
                .unwrap();
        }
        *world.enabled.lock().unwrap() = true;
        let steps = rng.gen_range(5..30);
        let mut interrupted = 0;
        for _ in 0..steps {
            match rng.gen_range(0..3) {
                0 => world.mutate(),
                1 => {
                    let id = if rng.gen_bool(0.5) { "alpha" } else { "beta" };
                    let report = harvester.harvest(id, HarvestMode::Incremental).await.unwrap();
                    interrupted += usize::from(!report.is_complete());
                }
                _ => {
                    let reports = harvester.harvest_all(HarvestMode::Incremental).await.unwrap();
                    interrupted += reports.iter().filter(|r| !r.is_complete()).count();
                }
            }
        }
        *world.enabled.lock().unwrap() = false;
        let reports = harvester.harvest_all(HarvestMode::Incremental).await.unwrap();
        if let Some(r) = reports.iter().find(|r| !r.is_complete()) {
            return Err(format!("final harvest failed: {r:?}"));
        }

        // provider content, read straight from the repositories
        let mut want: BTreeMap<String, MetadataRecord> = BTreeMap::new();
        for repo in &repos {
            for item in repo.items() {
                if let Some(record) = item.record {
                    want.insert(item.identifier, record);
                }
            }
        }
        let got: BTreeMap<String, MetadataRecord> = catalog
            .entries()
            .into_iter()
            .map(|e| (e.identifier, e.record))
            .collect();
        if got != want {
            let log: Vec<String> = world.log.lock().unwrap().iter().cloned().collect();
            return Err(format!(
                "seed {seed}: catalog {:?} != providers {:?} after {log:?}",
                got.keys().collect::<Vec<_>>(),
                want.keys().collect::<Vec<_>>()
            ));
        }

        // and a fresh full harvest lands on the same bytes
        let fresh = Arc::new(Catalog::new(reg.clone()));
        let oracle = Harvester::new(fresh.clone(), inner, config).with_clock(clock.clone());
        for archive in ["alpha", "beta"] {
            oracle.register_provider(&format!("local://{archive}/")).await.unwrap();
        }
        oracle.harvest_all(HarvestMode::Full).await.unwrap();
        if fresh.export_snapshot() != catalog.export_snapshot() {
            return Err(format!(
                "seed {seed}: incremental catalog differs from full-harvest oracle"
            ));
        }
        Ok((want.len(), interrupted))
    })
}

fn harvest_convergence() -> Outcome {
    const TRIALS: u64 = 150;
    let reg = common::registry();
    let pool = record_pool(&reg);
    let (mut items, mut interrupted) = (0, 0);
    for seed in 0..TRIALS {
        let (i, n) = convergence_trial(seed, &reg, &pool)?;
        items += i;
        interrupted += n;
    }
    ensure(interrupted > 0, || "no harvest was ever interrupted".into())?;
    Ok(format!(
        "{TRIALS} trials, {interrupted} interrupted harvests, {items} live items compared"
    ))
}

// ---- crosswalk -------------------------------------------------------------

fn crosswalk_totality() -> Outcome {
    const GENERATED: u32 = 500;
    let reg = common::registry();
    let dc: BTreeSet<ElementName> = ElementName::DUBLIN_CORE.into_iter().collect();
    let check = |record: &MetadataRecord| -> Result<(), String> {
        let out = dc_crosswalk(record, &reg).map_err(|e| e.to_string())?;
        ensure(out.elements().len() == record.elements().len(), || {
            format!("{} elements in, {} out", record.elements().len(), out.elements().len())
        })?;
        if let Some(e) = out.elements().iter().find(|e| !dc.contains(&e.name())) {
            return Err(format!("emitted {}", e.name().as_str()));
        }
        ensure(
            out.elements()
                .iter()
                .all(|e| e.refine().is_none() && e.code().is_none() && e.lang().is_none()),
            || "attributes survived".into(),
        )
    };
    for xml in [fixtures::KPML_XML, fixtures::LDC94T5_XML, fixtures::ELRA_L0030_XML] {
        check(&parse_record(xml.as_bytes()).unwrap().record)?;
    }
    let mut runner = TestRunner::new(Config {
        cases: GENERATED,
        failure_persistence: None,
        ..Config::default()
    });
    runner
        .run(&common::valid_record(reg.clone()), |record| {
            check(&record).map_err(TestCaseError::fail)
        })
        .map_err(|e| e.to_string())?;
    Ok(format!("3 fixtures and {GENERATED} generated records"))
}

// ---- paging ----------------------------------------------------------------

fn list_all(repo: &Repository, verb: &str) -> Result<Vec<String>, String> {
    let mut out = Vec::new();
    let mut params = vec![
        ("verb".to_string(), verb.to_string()),
        ("metadataPrefix".into(), "olac".into()),
    ];
    for _ in 0..10_000 {
        let xml = repo.handle(&params);
        let env = parse_envelope(xml.as_bytes()).map_err(|e| e.to_string())?;
        let resumption = match env.body {
            Body::ListRecords { records, resumption } => {
                out.extend(records.into_iter().map(|r| r.header.identifier));
                resumption
            }
            Body::ListIdentifiers { headers, resumption } => {
                out.extend(headers.into_iter().map(|h| h.identifier));
                resumption
            }
            Body::Error {
                code: OaiErrorCode::NoRecordsMatch,
                ..
            } if out.is_empty() => return Ok(out),
            other => return Err(format!("unexpected response {other:?}")),
        };
        match resumption.token {
            Some(token) => {
                params = vec![("verb".into(), verb.to_string()), ("resumptionToken".into(), token)];
            }
            None => return Ok(out),
        }
    }
    Err("listing never ended".into())
}

fn paging_completeness() -> Outcome {
    let reg = common::registry();
    let pool = record_pool(&reg);
    let mut checked = 0;
    for n in [0usize, 1, 2, 3, 7, 12] {
        let mut want: Vec<String> = Vec::new();
        let mut listings: Vec<Vec<String>> = Vec::new();
        for page_size in [1, 2, 3, 100] {
            let repo = Repository::new(
                RepositoryConfig::new("fixed", "Fixed").with_page_size(page_size),
                reg.clone(),
            )
            .map_err(|e| e.to_string())?;
            for i in 0..n {
                repo.put(&format!("oai:fixed:r{i:02}"), pool[i % pool.len()].clone())
                    .map_err(|e| e.to_string())?;
            }
            if n > 2 {
                repo.delete("oai:fixed:r01").map_err(|e| e.to_string())?;
            }
            want = repo.items().into_iter().map(|i| i.identifier).collect();
            for verb in ["ListRecords", "ListIdentifiers"] {
                listings.push(list_all(&repo, verb)?);
            }
        }
        want.sort();
        for mut listing in listings {
            listing.sort();
            ensure(listing == want, || {
                format!("{n} items: listed {listing:?}, held {want:?}")
            })?;
            checked += 1;
        }
    }
    Ok(format!("{checked} listings over page sizes 1, 2, 3, 100"))
}
