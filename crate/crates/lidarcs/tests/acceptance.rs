//! Acceptance suite: nine end-to-end checks of the toolkit's promises, each
//! verified against an independent route (closed-form geometry, brute-force
//! search, Monte-Carlo integration, or exhaustive enumeration) rather than
//! against the implementation under test. Each test prints one summary line,
//! `acceptance N/9 <name>: PASS (...)`, visible with `--nocapture` or in the
//! captured output of a failure.

use std::collections::BTreeMap;
use std::time::Instant;

use lidarcs::eval::{evaluate, iou3d, EvalConfig};
use lidarcs::geom::{
    normalize_to_sphere, range_of, ray_of, spherical_of, Category, Detection, ObjectAnnotation,
    Point3, PointCloud,
};
use lidarcs::io;
use lidarcs::pattern::{
    extract_pattern, synthesize_pattern, RayPattern, SensorSpec, DEFAULT_DEDUP_TOLERANCE_DEG,
    DEFAULT_GAP_THRESHOLD_DEG,
};
use lidarcs::resample::nnds;
use lidarcs::scene::{
    build_cube_map, query_pattern, query_patterns, shapes, PlacedObject, RenderConfig, Scene,
    simulate_frame,
};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

fn point_bits(p: &Point3) -> [u64; 4] {
    [p.x.to_bits(), p.y.to_bits(), p.z.to_bits(), p.intensity.to_bits()]
}

fn clouds_bit_identical(a: &PointCloud, b: &PointCloud) -> bool {
    a.frame_id == b.frame_id
        && a.sensor_id == b.sensor_id
        && a.len() == b.len()
        && a.points.iter().zip(&b.points).all(|(p, q)| point_bits(p) == point_bits(q))
}

fn car(x: f64, y: f64, yaw: f64) -> ObjectAnnotation {
    ObjectAnnotation::new(Category::Car, x, y, -1.0, 1.9, 4.5, 1.6, yaw).unwrap()
}

// ---------------------------------------------------------------------------

/// A densely splatted sphere of radius 10 m must return range 10 on every
/// ray, for every sensor, within the splat radius — and fast.
#[test]
fn c1_sphere_range_oracle() {
    const RADIUS: f64 = 10.0;
    const SPLAT: f64 = 0.05;
    let scene = Scene::new(shapes::fibonacci_sphere_cloud(RADIUS, 2_000_000, "sphere"));
    let render_start = Instant::now();
    let cube = build_cube_map(&scene, 2048, SPLAT).unwrap();
    let render_s = render_start.elapsed().as_secs_f64();

    let mut worst_err: f64 = 0.0;
    let mut slowest_s: f64 = 0.0;
    let mut total_returns = 0usize;
    for spec in [SensorSpec::vld_16(), SensorSpec::vld_32(), SensorSpec::vld_64()] {
        let pattern = synthesize_pattern(&spec).unwrap();
        let query_start = Instant::now();
        let cloud = query_pattern(&cube, &pattern, spec.max_range);
        // Charge each sensor for the full pipeline as if it rendered alone.
        let pattern_s = render_s + query_start.elapsed().as_secs_f64();
        slowest_s = slowest_s.max(pattern_s);
        assert_eq!(
            cloud.len(),
            pattern.len(),
            "{}: every ray must return from inside a closed sphere",
            spec.name
        );
        for p in &cloud.points {
            worst_err = worst_err.max((range_of(p) - RADIUS).abs());
        }
        total_returns += cloud.len();
        assert!(pattern_s <= 60.0, "{}: {pattern_s:.1} s exceeds 60 s", spec.name);
    }
    assert!(worst_err <= SPLAT, "worst range error {worst_err} exceeds {SPLAT}");
    println!(
        "acceptance 1/9 sphere range oracle: PASS ({total_returns} returns on 3 sensors, \
         max |range - 10| = {worst_err:.2e} m <= {SPLAT}, slowest sensor {slowest_s:.1} s)"
    );
}

/// Grazing rays over a flat ground plane 2 m below the sensor must return
/// the closed-form range 2/sin(-elevation) within 1% out to 60 m, and rays
/// at or above the horizon must return nothing.
#[test]
fn c2_ground_plane_grazing_oracle() {
    const DROP: f64 = 2.0;
    let (ground, normals) = shapes::ground_plane_grid(DROP, 0.12, 70.0, "plane");
    let scene = Scene::new(ground).with_normals(normals);
    // Grazing incidence amplifies angular quantization: at -2 degrees the
    // range changes by ~1.6 m per milliradian, so the 1% budget needs the
    // half-pixel error of a 4096-wide face (~0.24 mrad), not 2048.
    let cube = build_cube_map(&scene, 4096, 0.22).unwrap();

    // Integer-degree beams from -30 to +5, dense in azimuth.
    let spec = SensorSpec::new("plane-probe", 36, -30.0, 5.0).with_azimuth_resolution(0.5);
    let pattern = synthesize_pattern(&spec).unwrap();

    let mut checked_rays = 0usize;
    let mut horizon_rays = 0usize;
    let mut worst_rel: f64 = 0.0;
    for s in pattern.rays() {
        let depth = cube.sample(&ray_of(s)) as f64;
        let elevation = s.elevation;
        if elevation >= 0.0 {
            assert!(
                !depth.is_finite(),
                "ray at {:.1} deg above horizon returned {depth}",
                elevation.to_degrees()
            );
            horizon_rays += 1;
            continue;
        }
        let expected = DROP / (-elevation).sin();
        if expected <= 60.0 {
            assert!(depth.is_finite(), "no return at {:.1} deg", elevation.to_degrees());
            let rel = (depth - expected).abs() / expected;
            assert!(
                rel <= 0.01,
                "{:.1} deg: got {depth:.3}, expected {expected:.3} ({:.2}% off)",
                elevation.to_degrees(),
                rel * 100.0
            );
            worst_rel = worst_rel.max(rel);
            checked_rays += 1;
        }
    }
    assert_eq!(checked_rays, 29 * 720, "expected every downward beam ray to be checked");
    assert_eq!(horizon_rays, 6 * 720);
    println!(
        "acceptance 2/9 ground-plane grazing oracle: PASS ({checked_rays} rays within 1% of \
         2/sin(-elev) out to 60 m, worst {:.3}%; {horizon_rays} horizon rays empty)",
        worst_rel * 100.0
    );
}

/// Synthesize -> render -> extract must recover each sensor's scan pattern:
/// exact beam count, per-beam elevations within 0.05 degrees; and merging
/// two half-dropout frames must recover the full pattern exactly.
#[test]
fn c3_pattern_round_trip() {
    let scene = Scene::new(shapes::fibonacci_sphere_cloud(10.0, 500_000, "sphere"));
    let cube = build_cube_map(&scene, 1024, 0.1).unwrap();

    let mut recovered_rays = 0usize;
    for spec in [SensorSpec::vld_16(), SensorSpec::vld_32(), SensorSpec::vld_64()] {
        let pattern = synthesize_pattern(&spec).unwrap();
        let cloud = query_pattern(&cube, &pattern, spec.max_range);
        assert_eq!(cloud.len(), pattern.len(), "{}: sphere capture must be complete", spec.name);

        let extracted = extract_pattern(
            std::slice::from_ref(&cloud),
            DEFAULT_DEDUP_TOLERANCE_DEG,
        )
        .unwrap();
        assert_eq!(extracted.len(), pattern.len(), "{}: ray count", spec.name);

        let beams =
            lidarcs::pattern::beam_decompose_pattern(&extracted, DEFAULT_GAP_THRESHOLD_DEG)
                .unwrap();
        assert_eq!(beams.len(), spec.beam_count, "{}: beam count", spec.name);
        let step = (spec.elevation_max_deg - spec.elevation_min_deg)
            / (spec.beam_count - 1) as f64;
        for (i, beam) in beams.iter().enumerate() {
            let expected = spec.elevation_min_deg + step * i as f64;
            let err = (beam.elevation.to_degrees() - expected).abs();
            assert!(err <= 0.05, "{} beam {i}: off by {err:.4} deg", spec.name);
        }
        recovered_rays += extracted.len();
    }

    // Two complementary half-dropout captures merge back to the full pattern.
    let full = synthesize_pattern(&SensorSpec::vld_32()).unwrap();
    let mut halves = [Vec::new(), Vec::new()];
    for (i, s) in full.rays().iter().enumerate() {
        let d = ray_of(s);
        halves[i % 2].push(Point3::new(d.dx() * 25.0, d.dy() * 25.0, d.dz() * 25.0));
    }
    let frames: Vec<PointCloud> = halves
        .into_iter()
        .enumerate()
        .map(|(i, pts)| PointCloud::from_points(format!("{i}"), pts))
        .collect();
    let merged = extract_pattern(&frames, DEFAULT_DEDUP_TOLERANCE_DEG).unwrap();
    assert_eq!(merged.len(), full.len(), "half-dropout frames must merge losslessly");
    println!(
        "acceptance 3/9 pattern round trip: PASS (3 sensors re-extracted, {recovered_rays} rays, \
         beam elevations within 0.05 deg; 2-frame dropout merge exact at {} rays)",
        merged.len()
    );
}

/// Querying six sensors against one render must give bit-identical clouds to
/// six separate queries, and the batched wall-clock must stay within 2x the
/// cost of the single largest sensor.
#[test]
fn c4_batched_queries_equivalence_and_cost() {
    let scene = Scene::new(shapes::fibonacci_sphere_cloud(30.0, 300_000, "sphere"));
    let cube = build_cube_map(&scene, 1024, 0.2).unwrap();

    // One flagship sensor in its fine azimuth mode plus five assorted
    // lighter ones.
    let specs = [
        SensorSpec::vld_128().with_azimuth_resolution(0.1),
        SensorSpec::vld_16().with_azimuth_resolution(0.4),
        SensorSpec::vld_32().with_azimuth_resolution(0.4),
        SensorSpec::vld_64().with_azimuth_resolution(0.4),
        SensorSpec::once_40().with_azimuth_resolution(0.4),
        SensorSpec::vld_16().with_azimuth_resolution(0.5),
    ];
    let patterns: Vec<RayPattern> =
        specs.iter().map(synthesize_pattern).collect::<Result<_, _>>().unwrap();
    let ranges: Vec<f64> = specs.iter().map(|s| s.max_range).collect();
    let largest = patterns.iter().map(RayPattern::len).max().unwrap();
    assert_eq!(largest, patterns[0].len(), "first pattern is the largest");

    // Warm-up, then best-of-3 timings (clouds dropped outside the timed
    // region) to keep the ratio noise-free.
    let singles: Vec<PointCloud> = patterns
        .iter()
        .zip(&ranges)
        .map(|(p, &r)| query_pattern(&cube, p, r))
        .collect();
    let mut single_largest_s = f64::INFINITY;
    for _ in 0..3 {
        let start = Instant::now();
        let cloud = query_pattern(&cube, &patterns[0], ranges[0]);
        single_largest_s = single_largest_s.min(start.elapsed().as_secs_f64());
        drop(cloud);
    }
    let mut batched = Vec::new();
    let mut batch_s = f64::INFINITY;
    for _ in 0..3 {
        let start = Instant::now();
        let result = query_patterns(&cube, &patterns, &ranges).unwrap();
        batch_s = batch_s.min(start.elapsed().as_secs_f64());
        batched = result;
    }

    for (one, many) in singles.iter().zip(&batched) {
        assert!(clouds_bit_identical(one, many), "batched result diverged for {:?}", one.sensor_id);
    }
    let ratio = batch_s / single_largest_s;
    assert!(
        ratio <= 2.0,
        "6-sensor batch took {batch_s:.3} s vs largest single {single_largest_s:.3} s \
         (ratio {ratio:.2} > 2.0)"
    );
    println!(
        "acceptance 4/9 batched query equivalence: PASS (6 sensors bit-identical; batch \
         {:.1} ms = {ratio:.2}x the largest single sensor {:.1} ms)",
        batch_s * 1e3,
        single_largest_s * 1e3
    );
}

/// Retargeting a 64-beam capture to a 16-beam sensor must keep exactly the
/// 16 nearest-in-elevation source scan lines, agree point-for-point with a
/// brute-force matcher, pass identity retargets through untouched, and be
/// idempotent.
#[test]
fn c5_scan_line_retargeting_matches_brute_force() {
    let scene = Scene::new(shapes::fibonacci_sphere_cloud(10.0, 500_000, "sphere"));
    let cube = build_cube_map(&scene, 1024, 0.1).unwrap();
    let source_spec = SensorSpec::vld_64();
    let source_pattern = synthesize_pattern(&source_spec).unwrap();
    let source = query_pattern(&cube, &source_pattern, source_spec.max_range);
    assert_eq!(source.len(), source_pattern.len());

    // A 16-beam target inside the source's elevation span, so the nearest
    // source lines are all distinct.
    let target_spec = SensorSpec::new("target-16", 16, -20.0, 1.0);
    let target = synthesize_pattern(&target_spec).unwrap();
    let retargeted = nnds(&source, &target, DEFAULT_GAP_THRESHOLD_DEG).unwrap();

    // Brute force, straight from the definition: each point's elevation is
    // binned exactly, each target beam picks the nearest bin, points whose
    // bin was picked survive in order.
    let mut bins: Vec<f64> = Vec::new();
    let elevation_of = |p: &Point3| spherical_of(&normalize_to_sphere(p).unwrap()).elevation;
    for p in &source.points {
        let e = elevation_of(p);
        if !bins.iter().any(|b| (b - e).abs() < 1e-9) {
            bins.push(e);
        }
    }
    bins.sort_by(f64::total_cmp);
    assert_eq!(bins.len(), 64);
    let step = (target_spec.elevation_max_deg - target_spec.elevation_min_deg) / 15.0;
    let mut picked = vec![false; bins.len()];
    for i in 0..16 {
        let t = (target_spec.elevation_min_deg + step * i as f64).to_radians();
        let nearest = (0..bins.len())
            .min_by(|&a, &b| (bins[a] - t).abs().total_cmp(&(bins[b] - t).abs()))
            .unwrap();
        picked[nearest] = true;
    }
    assert_eq!(picked.iter().filter(|&&p| p).count(), 16, "16 distinct source lines");
    let expected: Vec<Point3> = source
        .points
        .iter()
        .filter(|p| {
            let e = elevation_of(p);
            let bin = (0..bins.len())
                .min_by(|&a, &b| (bins[a] - e).abs().total_cmp(&(bins[b] - e).abs()))
                .unwrap();
            picked[bin]
        })
        .copied()
        .collect();
    assert_eq!(retargeted.len(), expected.len());
    assert!(
        retargeted.points.iter().zip(&expected).all(|(a, b)| point_bits(a) == point_bits(b)),
        "retargeted cloud diverged from the brute-force selection"
    );

    // Identity: retargeting onto the source's own pattern keeps everything.
    let identity = nnds(&source, &source_pattern, DEFAULT_GAP_THRESHOLD_DEG).unwrap();
    assert_eq!(identity.len(), source.len());
    assert!(identity.points.iter().zip(&source.points).all(|(a, b)| point_bits(a) == point_bits(b)));

    // Idempotence: a second identical retarget changes nothing.
    let twice = nnds(&retargeted, &target, DEFAULT_GAP_THRESHOLD_DEG).unwrap();
    assert!(clouds_bit_identical(&twice, &retargeted));
    println!(
        "acceptance 5/9 scan-line retargeting: PASS (16 of 64 lines = {} of {} points match \
         brute force exactly; identity and idempotence hold)",
        retargeted.len(),
        source.len()
    );
}

/// Rotated-box volume IoU must agree with a Monte-Carlo estimate on random
/// pairs, and hit the closed-form 1/3 on the axis-aligned half-offset case.
#[test]
fn c6_rotated_iou_matches_monte_carlo() {
    // Two 2x2x2 cubes offset by half a side: intersection 4, union 12.
    let a = ObjectAnnotation::new(Category::Car, 0.0, 0.0, 0.0, 2.0, 2.0, 2.0, 0.0).unwrap();
    let b = ObjectAnnotation::new(Category::Car, 1.0, 0.0, 0.0, 2.0, 2.0, 2.0, 0.0).unwrap();
    assert_eq!(iou3d(&a, &b), 1.0 / 3.0, "half-offset cubes must give exactly 1/3");

    let inside = |o: &ObjectAnnotation, p: [f64; 3]| {
        let (sin, cos) = o.yaw.sin_cos();
        let dx = p[0] - o.x;
        let dy = p[1] - o.y;
        let along = cos * dx + sin * dy;
        let across = -sin * dx + cos * dy;
        along.abs() <= o.length / 2.0
            && across.abs() <= o.width / 2.0
            && (p[2] - o.z).abs() <= o.height / 2.0
    };
    let random_box = |rng: &mut ChaCha8Rng| {
        ObjectAnnotation::new(
            Category::Car,
            rng.gen_range(-1.5..1.5),
            rng.gen_range(-1.5..1.5),
            rng.gen_range(-0.5..0.5),
            rng.gen_range(1.0..4.0),
            rng.gen_range(1.0..4.0),
            rng.gen_range(1.0..4.0),
            rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI),
        )
        .unwrap()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    let mut worst_gap: f64 = 0.0;
    for pair in 0..20 {
        let a = random_box(&mut rng);
        let b = random_box(&mut rng);
        // Shared axis-aligned bounding box of both rotated boxes.
        let bound = |o: &ObjectAnnotation| {
            let r = (o.length / 2.0).hypot(o.width / 2.0);
            ([o.x - r, o.y - r, o.z - o.height / 2.0], [o.x + r, o.y + r, o.z + o.height / 2.0])
        };
        let (alo, ahi) = bound(&a);
        let (blo, bhi) = bound(&b);
        let lo = [alo[0].min(blo[0]), alo[1].min(blo[1]), alo[2].min(blo[2])];
        let hi = [ahi[0].max(bhi[0]), ahi[1].max(bhi[1]), ahi[2].max(bhi[2])];
        let (mut both, mut either) = (0u32, 0u32);
        for _ in 0..1_000_000 {
            let p = [
                rng.gen_range(lo[0]..hi[0]),
                rng.gen_range(lo[1]..hi[1]),
                rng.gen_range(lo[2]..hi[2]),
            ];
            let in_a = inside(&a, p);
            let in_b = inside(&b, p);
            both += (in_a && in_b) as u32;
            either += (in_a || in_b) as u32;
        }
        let sampled = if either == 0 { 0.0 } else { both as f64 / either as f64 };
        let gap = (iou3d(&a, &b) - sampled).abs();
        assert!(gap <= 0.01, "pair {pair}: analytic {} vs sampled {sampled} ", iou3d(&a, &b));
        worst_gap = worst_gap.max(gap);
    }
    println!(
        "acceptance 6/9 rotated IoU vs Monte-Carlo: PASS (20 random pairs at 1e6 samples, \
         worst |analytic - sampled| = {worst_gap:.4}; half-offset case exactly 1/3)"
    );
}

/// The detection metric's clauses, each on a purpose-built fixture: perfect
/// detections score a mean AP of 1; flipped headings zero out their
/// category; boxes beyond 70 m are ignored; and AP equals an exhaustive
/// score-cutoff enumeration.
#[test]
fn c7_detection_metric_clauses() {
    let config = EvalConfig::default();
    let dims: [[f64; 3]; 5] =
        [[1.9, 4.5, 1.6], [2.6, 8.5, 3.2], [0.6, 0.6, 1.8], [0.6, 1.8, 1.7], [0.8, 2.2, 1.6]];

    // (a) Perfect detector over all five categories: mean AP exactly 1.
    let mut gts: BTreeMap<String, Vec<ObjectAnnotation>> = BTreeMap::new();
    for f in 0..3 {
        let boxes = Category::ALL
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let [w, l, h] = dims[i];
                ObjectAnnotation::new(c, 8.0 + 7.0 * i as f64, f as f64 * 3.0, -1.0, w, l, h, 0.4)
                    .unwrap()
            })
            .collect();
        gts.insert(format!("{f:06}"), boxes);
    }
    let perfect: BTreeMap<String, Vec<Detection>> = gts
        .iter()
        .map(|(f, boxes)| {
            (f.clone(), boxes.iter().map(|&b| Detection::new(b, 0.8).unwrap()).collect())
        })
        .collect();
    let report = evaluate(&gts, &perfect, &config).unwrap();
    assert_eq!(report.map, 1.0, "perfect detections must give mean AP 1.0");
    assert_eq!(report.map_present, 1.0);

    // (b) Flipping one category's headings by 180 degrees zeroes its AP.
    let flipped: BTreeMap<String, Vec<Detection>> = gts
        .iter()
        .map(|(f, boxes)| {
            let dets = boxes
                .iter()
                .map(|&b| {
                    let mut ann = b;
                    if ann.category == Category::Car {
                        ann = ObjectAnnotation::new(
                            ann.category,
                            ann.x,
                            ann.y,
                            ann.z,
                            ann.width,
                            ann.length,
                            ann.height,
                            ann.yaw + std::f64::consts::PI,
                        )
                        .unwrap();
                    }
                    Detection::new(ann, 0.8).unwrap()
                })
                .collect();
            (f.clone(), dets)
        })
        .collect();
    let report = evaluate(&gts, &flipped, &config).unwrap();
    let car_report = &report.categories[Category::Car.index()];
    assert_eq!(car_report.ap, 0.0, "flipped headings must zero the category");
    assert_eq!(car_report.true_positives, 0);
    assert_eq!(car_report.false_positives, 3);
    assert_eq!(report.categories[Category::Truck.index()].ap, 1.0);

    // (c) A matched pair at planar range 75 m is outside the 70 m gate and
    // must not appear anywhere in the counts.
    let near = car(20.0, 0.0, 0.1);
    let far = car(75.0, 0.0, 0.1);
    let gts_far: BTreeMap<String, Vec<ObjectAnnotation>> =
        [("000000".to_string(), vec![near, far])].into();
    let dets_far: BTreeMap<String, Vec<Detection>> = [(
        "000000".to_string(),
        vec![Detection::new(near, 0.9).unwrap(), Detection::new(far, 0.8).unwrap()],
    )]
    .into();
    let report = evaluate(&gts_far, &dets_far, &config).unwrap();
    let car_report = &report.categories[Category::Car.index()];
    assert_eq!((car_report.gt_count, car_report.det_count), (1, 1));
    assert_eq!((car_report.true_positives, car_report.false_positives), (1, 0));

    // (d) AP on a mixed 10-object fixture equals exhaustive re-matching at
    // every score cutoff.
    let gt_frames: Vec<Vec<ObjectAnnotation>> = vec![
        (0..4).map(|i| car(6.0 + 5.0 * i as f64, 0.0, 0.2)).collect(),
        (0..3).map(|i| car(6.0 + 5.0 * i as f64, 8.0, -0.4)).collect(),
        (0..3).map(|i| car(6.0 + 5.0 * i as f64, -8.0, 1.0)).collect(),
    ];
    // Detections: true copies, misses, far offsets, one duplicate, and one
    // heading flip, with strictly decreasing scores so ordering is unique.
    let mut det_frames: Vec<Vec<Detection>> = vec![Vec::new(), Vec::new(), Vec::new()];
    let mut score = 0.95;
    let mut push = |frames: &mut Vec<Vec<Detection>>, f: usize, ann: ObjectAnnotation| {
        frames[f].push(Detection::new(ann, score).unwrap());
        score -= 0.05;
    };
    push(&mut det_frames, 0, gt_frames[0][0]);
    push(&mut det_frames, 1, gt_frames[1][2]);
    push(&mut det_frames, 0, car(40.0, 20.0, 0.0)); // far from any truth
    push(&mut det_frames, 2, gt_frames[2][1]);
    push(&mut det_frames, 0, gt_frames[0][1]);
    push(&mut det_frames, 0, gt_frames[0][1]); // duplicate of a matched box
    push(&mut det_frames, 1, gt_frames[1][0]);
    push(&mut det_frames, 2, car(30.0, -20.0, 0.0)); // far from any truth
    let flip = gt_frames[2][2];
    push(
        &mut det_frames,
        2,
        ObjectAnnotation::new(
            flip.category, flip.x, flip.y, flip.z, flip.width, flip.length, flip.height,
            flip.yaw + std::f64::consts::PI,
        )
        .unwrap(),
    );
    push(&mut det_frames, 0, gt_frames[0][3]);

    let gts_small: BTreeMap<String, Vec<ObjectAnnotation>> = gt_frames
        .iter()
        .enumerate()
        .map(|(f, v)| (format!("{f:06}"), v.clone()))
        .collect();
    let dets_small: BTreeMap<String, Vec<Detection>> = det_frames
        .iter()
        .enumerate()
        .map(|(f, v)| (format!("{f:06}"), v.clone()))
        .collect();
    let report = evaluate(&gts_small, &dets_small, &config).unwrap();
    let implementation_ap = report.categories[Category::Car.index()].ap;
    let oracle = cutoff_enumeration_ap(&gt_frames, &det_frames, 0.7, 50);
    let gap = (implementation_ap - oracle).abs();
    assert!(gap <= 1e-9, "AP {implementation_ap} vs cutoff-enumeration oracle {oracle}");
    println!(
        "acceptance 7/9 detection metric clauses: PASS (perfect mAP 1.0; flipped-heading AP 0; \
         75 m pair ignored; AP matches cutoff enumeration within {gap:.1e})"
    );
}

/// Independent AP route for one category: for every score cutoff, re-match
/// the retained detections from scratch, then average the interpolated
/// precision over the recall grid.
fn cutoff_enumeration_ap(
    gt_frames: &[Vec<ObjectAnnotation>],
    det_frames: &[Vec<Detection>],
    iou_threshold: f64,
    recall_points: usize,
) -> f64 {
    let gt_total: usize = gt_frames.iter().map(Vec::len).sum();
    let mut order: Vec<(usize, usize)> = det_frames
        .iter()
        .enumerate()
        .flat_map(|(f, dets)| (0..dets.len()).map(move |i| (f, i)))
        .collect();
    order.sort_by(|&(fa, ia), &(fb, ib)| {
        det_frames[fb][ib]
            .score
            .total_cmp(&det_frames[fa][ia].score)
            .then(fa.cmp(&fb))
            .then(ia.cmp(&ib))
    });

    let mut curve: Vec<(f64, f64)> = Vec::new(); // (recall, precision) per cutoff
    for cutoff in 1..=order.len() {
        let mut taken: Vec<Vec<bool>> = gt_frames.iter().map(|g| vec![false; g.len()]).collect();
        let mut tp = 0usize;
        for &(f, i) in &order[..cutoff] {
            let det = &det_frames[f][i];
            let mut best: Option<(usize, f64)> = None;
            for (g, gt) in gt_frames[f].iter().enumerate() {
                if taken[f][g] {
                    continue;
                }
                let iou = iou3d(&det.annotation, gt);
                if iou >= iou_threshold && best.is_none_or(|(_, b)| iou > b) {
                    best = Some((g, iou));
                }
            }
            if let Some((g, _)) = best {
                let delta = (det.annotation.yaw - gt_frames[f][g].yaw).rem_euclid(std::f64::consts::TAU);
                let delta = if delta > std::f64::consts::PI { delta - std::f64::consts::TAU } else { delta };
                if delta.abs() <= std::f64::consts::FRAC_PI_2 {
                    taken[f][g] = true;
                    tp += 1;
                }
            }
        }
        curve.push((tp as f64 / gt_total as f64, tp as f64 / cutoff as f64));
    }

    (0..recall_points)
        .map(|j| {
            let want = j as f64 / (recall_points - 1) as f64;
            curve
                .iter()
                .filter(|&&(recall, _)| recall >= want)
                .map(|&(_, precision)| precision)
                .fold(0.0, f64::max)
        })
        .sum::<f64>()
        / recall_points as f64
}

/// Reruns are bit-identical, binary clouds round-trip bit-exactly, text
/// formats round-trip within their printed precision, and malformed files
/// come back as typed errors instead of crashes.
#[test]
fn c8_determinism_and_file_formats() {
    let dir = tempfile::tempdir().unwrap();

    // Bit-identical pipeline rerun: render + query, twice.
    let (ground, normals) = shapes::ground_plane_grid(2.0, 0.2, 30.0, "frame");
    let objects = vec![PlacedObject::new(
        shapes::box_mesh(1.9, 4.5, 1.6),
        [12.0, 2.0, -2.0],
        0.7,
        Category::Car,
        [1.9, 4.5, 1.6],
    )
    .unwrap()];
    let scene = Scene::new(ground).with_normals(normals).with_objects(objects);
    let pattern = synthesize_pattern(&SensorSpec::vld_32()).unwrap();
    let run = || {
        let cube = build_cube_map(&scene, 512, 0.25).unwrap();
        let cloud = query_pattern(&cube, &pattern, 100.0);
        (cube, cloud)
    };
    let (cube_a, cloud_a) = run();
    let (cube_b, cloud_b) = run();
    for face in 0..6 {
        let same = cube_a
            .face(face)
            .iter()
            .zip(cube_b.face(face))
            .all(|(x, y)| x.to_bits() == y.to_bits());
        assert!(same, "face {face} differs between reruns");
    }
    assert!(clouds_bit_identical(&cloud_a, &cloud_b));
    assert!(!cloud_a.is_empty());

    // Binary cloud round trip is bit-exact (values survive the f32 disk
    // format unchanged because they were f32-sized to begin with).
    let cloud_path = dir.path().join("cloud.bin");
    io::write_cloud(&cloud_path, &cloud_a).unwrap();
    let reread = io::read_cloud(&cloud_path).unwrap();
    assert_eq!(reread.len(), cloud_a.len());
    let bit_exact = reread
        .points
        .iter()
        .zip(&cloud_a.points)
        .all(|(a, b)| {
            [a.x, a.y, a.z, a.intensity]
                .iter()
                .zip([b.x, b.y, b.z, b.intensity])
                .all(|(&r, w)| (r as f32).to_bits() == (w as f32).to_bits())
        });
    assert!(bit_exact, "binary cloud round trip must preserve every sample bit");

    // Text round trips stay within their printed precision.
    let pattern_path = dir.path().join("pattern.txt");
    io::write_pattern(&pattern_path, &pattern).unwrap();
    let pattern_back = io::read_pattern(&pattern_path).unwrap();
    assert_eq!(pattern_back.len(), pattern.len());
    let worst = pattern
        .rays()
        .iter()
        .zip(pattern_back.rays())
        .map(|(a, b)| (a.azimuth - b.azimuth).abs().max((a.elevation - b.elevation).abs()))
        .fold(0.0, f64::max);
    assert!(worst <= 2e-8, "pattern round trip drifted {worst} rad");

    let gts: BTreeMap<String, Vec<ObjectAnnotation>> =
        [("000000".to_string(), vec![car(12.3456789, -4.2, 1.234567)])].into();
    let gt_path = dir.path().join("gt.txt");
    io::write_ground_truth(&gt_path, &gts).unwrap();
    let gt_back = io::read_ground_truth(&gt_path).unwrap();
    let (a, b) = (&gts["000000"][0], &gt_back["000000"][0]);
    for (x, y) in [(a.x, b.x), (a.y, b.y), (a.z, b.z), (a.yaw, b.yaw), (a.width, b.width)] {
        assert!((x - y).abs() <= 1e-6, "annotation round trip drifted: {x} vs {y}");
    }

    // Malformed files: typed errors, never panics.
    let write = |name: &str, bytes: &[u8]| {
        let path = dir.path().join(name);
        std::fs::write(&path, bytes).unwrap();
        path
    };
    use lidarcs::io::IoError;
    let truncated = write("short.bin", &[0u8; 20]);
    assert!(matches!(io::read_cloud(&truncated), Err(IoError::TruncatedFile { .. })));
    let bad_header = write("bad_header.txt", b"sensor X rays=1\n0 0\n");
    assert!(matches!(io::read_pattern(&bad_header), Err(IoError::MalformedHeader { .. })));
    let wrong_count = write("count.txt", b"# sensor=X rays=3\n0.0 0.0\n1.0 1.0\n");
    assert!(matches!(io::read_pattern(&wrong_count), Err(IoError::MalformedHeader { .. })));
    let bad_float = write("bad_float.txt", b"000000 Car 1 2 3 1.5 4 2 abc\n");
    assert!(matches!(
        io::read_ground_truth(&bad_float),
        Err(IoError::MalformedLine { line: 1, .. })
    ));
    let bad_category = write("bad_cat.txt", b"000000 Van 1 2 3 1.5 4 2 0.0\n");
    assert!(matches!(
        io::read_ground_truth(&bad_category),
        Err(IoError::UnknownCategory { line: 1, .. })
    ));
    let scoreless = write("scoreless.txt", b"000000 Car 1 2 3 1.5 4 2 0.0\n");
    assert!(matches!(io::read_detections(&scoreless), Err(IoError::MissingScore { line: 1, .. })));
    let bad_mesh = write("dangling.obj", b"v 0 0 0\nf 1 2 3\n");
    assert!(matches!(io::read_mesh(&bad_mesh), Err(IoError::MalformedMesh { .. })));
    let no_background = write("empty_scene.txt", b"# nothing here\n");
    assert!(matches!(io::read_scene(&no_background), Err(IoError::MalformedRecord { .. })));
    let bad_manifest = write("manifest.txt", b"annotations gt.txt\n");
    assert!(matches!(io::read_manifest(&bad_manifest), Err(IoError::MalformedHeader { .. })));

    println!(
        "acceptance 8/9 determinism and file formats: PASS (rerun bit-identical on 6 faces and \
         {} returns; binary round trip bit-exact; text drift <= 2e-8 rad / 1e-6 m; 9 malformed \
         fixtures -> typed errors)",
        cloud_a.len()
    );
}

/// End to end: build a 20-frame dataset captured by three sensors that share
/// per-frame annotations, score an oracle detector at exactly mean AP 1.0,
/// and score a half-flipped detector strictly lower — all inside ten
/// minutes.
#[test]
fn c9_mini_dataset_end_to_end() {
    let started = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();

    let specs = [SensorSpec::vld_16(), SensorSpec::vld_32(), SensorSpec::vld_64()];
    let patterns: Vec<RayPattern> =
        specs.iter().map(synthesize_pattern).collect::<Result<_, _>>().unwrap();
    let ranges: Vec<f64> = specs.iter().map(|s| s.max_range).collect();
    for spec in &specs {
        std::fs::create_dir_all(root.join("clouds").join(spec.name.to_lowercase())).unwrap();
    }

    let dims: [[f64; 3]; 5] =
        [[1.9, 4.5, 1.6], [2.6, 8.5, 3.2], [0.6, 0.6, 1.8], [0.6, 1.8, 1.7], [0.8, 2.2, 1.6]];
    let config = RenderConfig { face_resolution: 1024, splat_radius: 0.25 };
    let mut ground_truth: BTreeMap<String, Vec<ObjectAnnotation>> = BTreeMap::new();
    let mut frame_ids = Vec::new();
    for f in 0..20 {
        let frame_id = format!("{f:06}");
        let room = shapes::fibonacci_sphere_cloud(60.0, 500_000, &frame_id);
        let normals = shapes::radial_normals(&room);
        // One object per category, deterministically swept around the sensor.
        let objects: Vec<PlacedObject> = Category::ALL
            .iter()
            .enumerate()
            .map(|(i, &category)| {
                let [w, l, h] = dims[i];
                let angle = 0.31 * f as f64 + 1.2 * i as f64;
                let radius = 5.0 + 40.0 * ((f + 7 * i) % 20) as f64 / 19.0;
                PlacedObject::new(
                    shapes::box_mesh(w, l, h),
                    [radius * angle.cos(), radius * angle.sin(), -2.0],
                    angle / 2.0,
                    category,
                    [w, l, h],
                )
                .unwrap()
            })
            .collect();
        let scene = Scene::new(room).with_normals(normals).with_objects(objects);
        let frame = simulate_frame(&scene, &patterns, &ranges, &config).unwrap();
        assert_eq!(frame.annotations.len(), 5);
        for (spec, mut cloud) in specs.iter().zip(frame.clouds) {
            assert!(!cloud.is_empty());
            cloud.frame_id = frame_id.clone();
            let path = root
                .join("clouds")
                .join(spec.name.to_lowercase())
                .join(format!("{frame_id}.bin"));
            io::write_cloud(&path, &cloud).unwrap();
        }
        // One annotation set per frame, shared by all three sensors.
        ground_truth.insert(frame_id.clone(), frame.annotations);
        frame_ids.push(frame_id);
    }

    io::write_ground_truth(&root.join("annotations.txt"), &ground_truth).unwrap();
    let mut manifest = io::Manifest::new("mini-acceptance");
    manifest.annotations = Some("annotations.txt".into());
    manifest.train = frame_ids[..15].to_vec();
    manifest.test = frame_ids[15..].to_vec();
    manifest.groups = specs
        .iter()
        .map(|s| io::ManifestGroup {
            sensor: s.name.clone(),
            dir: std::path::PathBuf::from("clouds").join(s.name.to_lowercase()),
        })
        .collect();
    io::write_manifest(&root.join("dataset.txt"), &manifest).unwrap();

    // Read the dataset back the way a consumer would.
    let manifest = io::read_manifest(&root.join("dataset.txt")).unwrap();
    let stats = io::dataset_stats(&manifest).unwrap();
    assert_eq!(stats.train_frames + stats.test_frames, 20);
    assert_eq!(stats.sensor_groups, 3);
    assert_eq!(stats.annotated_frames, 20);
    assert!(stats.category_counts.iter().all(|&n| n == 20));
    let gts = io::read_ground_truth(&root.join("annotations.txt")).unwrap();
    for group in &manifest.groups {
        for frame_id in &frame_ids {
            let cloud =
                io::read_cloud(&root.join(&group.dir).join(format!("{frame_id}.bin"))).unwrap();
            assert!(!cloud.is_empty(), "{}/{frame_id} is empty", group.sensor);
        }
    }

    // Oracle detector: the ground truth replayed scores a perfect mean AP.
    let oracle: BTreeMap<String, Vec<Detection>> = gts
        .iter()
        .map(|(f, boxes)| {
            (f.clone(), boxes.iter().map(|&b| Detection::new(b, 1.0).unwrap()).collect())
        })
        .collect();
    let perfect = evaluate(&gts, &oracle, &EvalConfig::default()).unwrap();
    assert_eq!(perfect.map, 1.0, "oracle detector must score exactly 1.0");

    // Heading-flipping half the detections must strictly hurt.
    let degraded: BTreeMap<String, Vec<Detection>> = gts
        .iter()
        .enumerate()
        .map(|(f, (frame, boxes))| {
            let dets = boxes
                .iter()
                .map(|&b| {
                    let yaw =
                        if f % 2 == 0 { b.yaw + std::f64::consts::PI } else { b.yaw };
                    let ann = ObjectAnnotation::new(
                        b.category, b.x, b.y, b.z, b.width, b.length, b.height, yaw,
                    )
                    .unwrap();
                    Detection::new(ann, 1.0).unwrap()
                })
                .collect();
            (frame.clone(), dets)
        })
        .collect();
    let worse = evaluate(&gts, &degraded, &EvalConfig::default()).unwrap();
    assert!(
        worse.map < perfect.map,
        "flipping half the headings must lower the score ({} vs {})",
        worse.map,
        perfect.map
    );

    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed <= 600.0, "mini dataset run took {elapsed:.0} s");
    println!(
        "acceptance 9/9 mini dataset end to end: PASS (20 frames x 3 sensors, shared \
         annotations; oracle mAP 1.0, half-flipped mAP {:.3}; {elapsed:.0} s total)",
        worse.map
    );
}
