use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use gostcite::docingest::{linearize, load_document, segment_references, SegmentConfig};
use gostcite::intext::{extract_intext_refs, InTextConfig};
use gostcite::labeler::{train, TrainConfig};
use gostcite::ref_parser::parse_reference;
use gostcite::serialize::DocumentId;
use gostcite::training_data::strip_tags;
use gostcite::{Collection, Config, FeatureContext, Lexicons, Pipeline};
use gostcite_bench::{annotations_path, collection_path, fixture_model, large_document_path, training_examples};

fn labeler(c: &mut Criterion) {
    let lex = Lexicons::bundled();
    let examples = training_examples(&lex);
    c.bench_function("train 5 epochs", |b| {
        b.iter(|| train(black_box(&examples), TrainConfig { epochs: 5, seed: 1 }).unwrap())
    });

    let model = fixture_model(&lex);
    let ctx = FeatureContext::new(&lex, Config::default().year_range());
    let text = std::fs::read_to_string(annotations_path()).unwrap();
    let lines: Vec<String> = text.lines().filter(|l| !l.is_empty()).map(|l| strip_tags(l).unwrap()).collect();
    c.bench_function("parse 240 references", |b| {
        b.iter(|| {
            for l in &lines {
                black_box(parse_reference(l, &model, &ctx));
            }
        })
    });
}

fn document(c: &mut Criterion) {
    let lex = Lexicons::bundled();
    let items = load_document(&large_document_path()).unwrap();
    c.bench_function("linearize 20 pages", |b| b.iter(|| linearize(black_box(&items))));

    let doc = linearize(&items);
    let seg = SegmentConfig::default();
    c.bench_function("segment 20 pages", |b| {
        b.iter(|| segment_references(black_box(&doc), &seg, &lex.homoglyphs).unwrap())
    });

    let section = segment_references(&doc, &seg, &lex.homoglyphs).unwrap();
    let max = section.entries.last().map_or(0, |e| e.num);
    c.bench_function("in-text refs 20 pages", |b| {
        b.iter(|| extract_intext_refs(black_box(&doc), section.interval.start, max, &InTextConfig::default()))
    });

    let model = fixture_model(&lex);
    let collection = Collection::load(&collection_path(), &lex.homoglyphs).unwrap();
    let config = Config::default();
    let pipeline = Pipeline { model: &model, lexicons: &lex, collection: &collection, config: &config };
    let path = large_document_path();
    c.bench_function("analyze 20 pages", |b| {
        b.iter(|| pipeline.analyze(&path, DocumentId::new("large", "report20")).unwrap())
    });
}

criterion_group!(benches, labeler, document);
criterion_main!(benches);
