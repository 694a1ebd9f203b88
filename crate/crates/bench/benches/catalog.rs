use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use olac::model::ElementName;
use olac::Query;
use olac_bench::synthetic_catalog;

fn search(c: &mut Criterion) {
    let mut group = c.benchmark_group("search");
    for n in [100, 1000, 10_000] {
        let catalog = synthetic_catalog(n);
        let code: Query = "Subject.language:code:bg".parse().unwrap();
        let text: Query = "Title:text:number 7".parse().unwrap();
        group.bench_with_input(BenchmarkId::new("code", n), &catalog, |b, cat| {
            b.iter(|| cat.search(black_box(&code)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("text", n), &catalog, |b, cat| {
            b.iter(|| cat.search(black_box(&text)).unwrap())
        });
    }
    group.finish();

    let catalog = synthetic_catalog(1000);
    let left: Query = "Subject.language:code:bg".parse().unwrap();
    let right: Query = "Subject.language:code:hu".parse().unwrap();
    c.bench_function("join 1000", |b| {
        b.iter(|| catalog.join_query(&left, &right, ElementName::SubjectLanguage).unwrap())
    });
    c.bench_function("facets 1000", |b| {
        b.iter(|| catalog.facet_counts(ElementName::SubjectLanguage).unwrap())
    });
}

criterion_group!(benches, search);
criterion_main!(benches);
