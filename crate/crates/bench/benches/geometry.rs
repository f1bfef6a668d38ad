use criterion::{black_box, criterion_group, criterion_main, Criterion};
use gapmeet_bench::gap;
use gapmeet_core::geometry::{lens_at, lens_intersection_area, regions_intersect, Region};

fn lenses(c: &mut Criterion) {
    let a = gap(0.6);
    let mut b = gap(0.3);
    b.start_anchor.y += 2000.0;
    b.end_anchor.y -= 1500.0;
    let t = 700.0;
    let (la, lb) = (lens_at(&a, t).unwrap().unwrap(), lens_at(&b, t).unwrap().unwrap());

    c.bench_function("lens_at", |bn| bn.iter(|| lens_at(black_box(&a), black_box(t))));
    c.bench_function("lens_area", |bn| bn.iter(|| black_box(&la).area()));
    c.bench_function("lens_intersection_area", |bn| {
        bn.iter(|| lens_intersection_area(black_box(&la), black_box(&lb)))
    });
    let (ea, eb) = (Region::Ellipse(a.ellipse()), Region::Ellipse(b.ellipse()));
    c.bench_function("ellipse_intersection_128", |bn| {
        bn.iter(|| regions_intersect(black_box(&ea), black_box(&eb), 128))
    });
}

criterion_group!(benches, lenses);
criterion_main!(benches);
