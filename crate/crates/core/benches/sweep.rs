use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use geoshadow::projection::project_shadows_with;
use geoshadow::shadowcast::cast_shadows_with;
use geoshadow::{Crs, Execution, GeoTransform, Hemisphere, Raster, RpcModel, SunGeometry};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn city(n: usize) -> Raster {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut z: Vec<f64> = (0..n * n).map(|_| 10.0 + rng.gen_range(0.0..0.3)).collect();
    for _ in 0..n / 8 {
        let (bw, bh) = (rng.gen_range(4..24), rng.gen_range(4..24));
        let (c0, r0) = (rng.gen_range(0..n - bw), rng.gen_range(0..n - bh));
        let top = rng.gen_range(5.0..40.0);
        for r in r0..r0 + bh {
            for c in c0..c0 + bw {
                z[r * n + c] = 10.0 + top;
            }
        }
    }
    let gt = GeoTransform::new(500_000.5, 4_983_000.5, 1.0, -1.0);
    Raster::new(n, n, z, gt, None, UTM).unwrap()
}

const UTM: Crs = Crs::Utm {
    zone: 31,
    hemisphere: Hemisphere::North,
};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn bench_cast(c: &mut Criterion) {
    let dsm = city(512);
    let sun = SunGeometry::new(137.0, 35.0).unwrap();
    let mut g = c.benchmark_group("cast_512_x4");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| cast_shadows_with(&dsm, &sun, 4, exec).unwrap())
        });
    }
    g.finish();
}

fn bench_project(c: &mut Criterion) {
    let dsm = city(512);
    let sun = SunGeometry::new(137.0, 35.0).unwrap();
    let cast = cast_shadows_with(&dsm, &sun, 2, Execution::default()).unwrap();
    // near-nadir camera over the block centre, ~0.5 m pixels
    let (lon, lat) = geoshadow::utm::utm_to_geographic(500_256.0, 4_982_744.0, 31, Hemisphere::North).unwrap();
    let mut rpc = RpcModel::identity_like();
    rpc.lon_off = lon;
    rpc.lat_off = lat;
    rpc.lon_scale = 0.0033;
    rpc.lat_scale = 0.0023;
    rpc.height_off = 20.0;
    rpc.height_scale = 40.0;
    rpc.samp_off = 512.0;
    rpc.line_off = 512.0;
    rpc.samp_scale = 512.0;
    rpc.line_scale = 512.0;
    rpc.line_num[2] = -1.0;
    rpc.samp_num[3] = 0.02;
    let mut g = c.benchmark_group("project_1024");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| project_shadows_with(&cast.dsm, &cast.shadow, &rpc, 1024, 1024, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, bench_cast, bench_project);
criterion_main!(benches);
