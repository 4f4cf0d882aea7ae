use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use naphase::charfun::Region;
use naphase::expr::parse_phase;
use naphase::integrate::{oscillatory_brute_with, BruteOptions, Exec};
use naphase::stationary::lambda_from;
use naphase::FieldConfig;

fn brute(c: &mut Criterion) {
    let field = FieldConfig::padic(5, 24).unwrap();
    let mut group = c.benchmark_group("oscillatory_brute");
    group.sample_size(10);
    for (name, src, ord) in [("x^3-3x", "x1^3 - 3*x1", -6), ("x^2+xy+y^2", "x1^2 + x1*x2 + x2^2", -3)] {
        let f = parse_phase(src, None).unwrap().to_series(&field, 12).unwrap();
        let omega = Region::whole(&field, f.nvars());
        let phi = omega.indicator();
        let lambda = lambda_from(&field, ord, 2);
        for (label, exec) in [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)] {
            let opts = BruteOptions { exec, ..Default::default() };
            group.bench_with_input(BenchmarkId::new(label, name), &opts, |b, opts| {
                b.iter(|| oscillatory_brute_with(&f, &phi, &lambda, &omega, opts).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, brute);
criterion_main!(benches);
