//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

mod common;

use std::collections::BTreeSet;
use std::time::Instant;

use cacut::augment::{apply_masks, horizontal_flip, make_label_tensor};
use cacut::config::AugmentConfig;
use cacut::dataset::{split_by_sequence, KeypointAnnotation, Keypoints};
use cacut::eval::{evaluate_run, keypoint_error, Prediction};
use cacut::geometry::{clamp_center, line_point, MaskSize, RowLine, Side};
use cacut::presets::PRESETS;
use cacut::sampler::{image_seed, image_stream, plan_masks, sampling_diagnostics, MaskOrigin, MaskSpec};
use cacut::viz::dilate;
use cacut::{augment_image, Grid, ImageDims, Point};
use common::*;
use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, var.sqrt())
}

/// Crop-aligned offsets on an image large enough that clamping never fires.
fn gaussian_conformance() -> Outcome {
    let start = Instant::now();
    let big = dims(1_000_000, 1_000_000);
    let kp = Keypoints {
        vanishing: Point::new(500_000, 400_000),
        left: Point::new(499_000, 401_000),
        right: Point::new(501_000, 401_000),
    };
    let cfg = AugmentConfig {
        n: 10,
        k: 10,
        sigma: 100.0,
        mask: MaskSize::square(60),
        net_dims: big,
        ..AugmentConfig::default()
    };
    let mut samples = Vec::with_capacity(100_000);
    for i in 0..10_000u64 {
        let plan = plan_masks(&kp, big, &cfg, &mut image_stream(image_seed(7, i))).map_err(|e| e.to_string())?;
        samples.extend(plan.samples);
    }
    let elapsed = start.elapsed().as_secs_f64();
    check(samples.iter().all(|s| s.center == s.raw_center), || "clamping fired".into())?;
    // independent recomputation of the offsets
    let dx: Vec<f64> = samples.iter().map(|s| f64::from(s.raw_center.x - s.on_line.x)).collect();
    let dy: Vec<f64> = samples.iter().map(|s| f64::from(s.raw_center.y - s.on_line.y)).collect();
    let (mx, sx) = mean_std(&dx);
    let (my, sy) = mean_std(&dy);
    let report = sampling_diagnostics(&samples, &[]).map_err(|e| e.to_string())?;
    check((report.empirical_sigma_x - sx).abs() < 1e-9 && (report.empirical_sigma_y - sy).abs() < 1e-9, || {
        "diagnostics disagree with recomputation".into()
    })?;
    check((97.0..=103.0).contains(&sx) && (97.0..=103.0).contains(&sy), || format!("std ({sx:.3}, {sy:.3})"))?;
    check((0.0..=2.0).contains(&mx) && (0.0..=2.0).contains(&my), || format!("mean offset ({mx:.3}, {my:.3})"))?;
    check(elapsed < 5.0, || format!("took {elapsed:.2}s"))?;
    Ok(format!(
        "n={} std=({sx:.2},{sy:.2}) mean=({mx:.3},{my:.3}) alpha_mean={:.4} left={:.4} {elapsed:.2}s",
        samples.len(),
        report.alpha_mean,
        report.side_ratio
    ))
}

fn uniform_conformance() -> Outcome {
    let net = dims(320, 240);
    let cfg = AugmentConfig {
        n: 10,
        k: 0,
        net_dims: net,
        ..AugmentConfig::default()
    };
    let kp = random_keypoints(&mut rng(1), net);
    let mut centers = Vec::with_capacity(100_000);
    for i in 0..10_000u64 {
        let plan = plan_masks(&kp, net, &cfg, &mut image_stream(image_seed(11, i))).map_err(|e| e.to_string())?;
        centers.extend(plan.masks.iter().map(|m| m.center));
    }
    check(
        centers.iter().all(|c| (30..=290).contains(&c.x) && (30..=210).contains(&c.y)),
        || "center outside [30,290]x[30,210]".into(),
    )?;
    let n = centers.len() as f64;
    let mx = centers.iter().map(|c| f64::from(c.x)).sum::<f64>() / n;
    let my = centers.iter().map(|c| f64::from(c.y)).sum::<f64>() / n;
    check((mx - 160.0).abs() <= 1.6 && (my - 120.0).abs() <= 1.2, || format!("mean ({mx:.3}, {my:.3})"))?;

    // chi-square over a 16x12 grid; expected cell mass from the exact
    // discrete uniform on 261 x 181 integer centers
    let (nx, ny) = (16usize, 12usize);
    let bin_x = |x: i32| ((x - 30) as usize * nx) / 261;
    let bin_y = |y: i32| ((y - 30) as usize * ny) / 181;
    let mut px = vec![0f64; nx];
    let mut py = vec![0f64; ny];
    (30..=290).for_each(|x| px[bin_x(x)] += 1.0 / 261.0);
    (30..=210).for_each(|y| py[bin_y(y)] += 1.0 / 181.0);
    let mut observed = vec![0f64; nx * ny];
    for c in &centers {
        observed[bin_y(c.y) * nx + bin_x(c.x)] += 1.0;
    }
    let mut chi2 = 0.0;
    for j in 0..ny {
        for i in 0..nx {
            let e = n * px[i] * py[j];
            let o = observed[j * nx + i];
            chi2 += (o - e) * (o - e) / e;
        }
    }
    let dof = (nx * ny - 1) as f64;
    let p = 1.0 - ChiSquared::new(dof).unwrap().cdf(chi2);
    check(p > 0.01, || format!("chi2={chi2:.1} p={p:.4}"))?;
    Ok(format!("mean=({mx:.2},{my:.2}) chi2={chi2:.1} dof={dof} p={p:.3}"))
}

fn k_of_n_exactness() -> Outcome {
    let net = dims(320, 240);
    let mut r = rng(3);
    let kps: Vec<Keypoints> = (0..1000).map(|_| random_keypoints(&mut r, net)).collect();
    let mut plans = 0;
    for (name, cfg) in PRESETS {
        for (i, kp) in kps.iter().enumerate() {
            let plan = plan_masks(kp, net, cfg, &mut image_stream(image_seed(cfg.master_seed, i as u64)))
                .map_err(|e| format!("{name}: {e}"))?;
            let ca = plan.masks.iter().filter(|m| m.origin == MaskOrigin::CropAligned).count();
            let un = plan.masks.iter().filter(|m| m.origin == MaskOrigin::Uniform).count();
            check(ca == cfg.k as usize && un == (cfg.n - cfg.k) as usize, || {
                format!("{name} image {i}: {ca} crop-aligned / {un} uniform")
            })?;
            plans += 1;
        }
    }
    Ok(format!("{} presets x 1000 images = {plans} plans exact", PRESETS.len()))
}

/// Every center reachable by clamp(line_point(line, alpha)) for alpha in [0, 1],
/// by enumerating the breakpoints of the two ceilings.
fn reachable_centers(line: &RowLine, d: ImageDims, mask: MaskSize) -> BTreeSet<(i32, i32)> {
    let dx = (line.intercept().x - line.vanishing().x).unsigned_abs().max(1);
    let dy = (line.intercept().y - line.vanishing().y).unsigned_abs().max(1);
    let mut alphas: Vec<f64> = (0..=dx).map(|j| f64::from(j) / f64::from(dx)).collect();
    alphas.extend((0..=dy).map(|j| f64::from(j) / f64::from(dy)));
    alphas.sort_by(f64::total_cmp);
    let mids: Vec<f64> = alphas.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    alphas.extend(mids);
    alphas
        .into_iter()
        .map(|a| {
            let c = clamp_center(line_point(line, a), d, mask).unwrap();
            (c.x, c.y)
        })
        .collect()
}

fn zero_sigma_alignment() -> Outcome {
    let native = dims(640, 360);
    let cfg = AugmentConfig {
        n: 10,
        k: 10,
        sigma: 0.0,
        flip_prob: 0.5,
        ..AugmentConfig::default()
    };
    let mut r = rng(5);
    let (mut checked, mut flipped) = (0, 0);
    for i in 0..200u64 {
        let ann = random_annotation(&mut r, native, "s", i);
        let img = cacut::ImageBuffer::filled(native, 0.5);
        let out = augment_image(&img, &ann, &cfg, image_seed(99, i)).map_err(|e| e.to_string())?;
        flipped += usize::from(out.record.flipped);
        let kp = out.keypoints;
        let left = RowLine::new(kp.vanishing, kp.left, Side::Left).unwrap();
        let right = RowLine::new(kp.vanishing, kp.right, Side::Right).unwrap();
        let mut ok: BTreeSet<(i32, i32)> = reachable_centers(&left, cfg.net_dims, cfg.mask);
        ok.extend(reachable_centers(&right, cfg.net_dims, cfg.mask));
        for m in &out.record.masks {
            check(ok.contains(&(m.center.x, m.center.y)), || {
                format!("frame {i}: center {:?} off both segments (flipped={})", m.center, out.record.flipped)
            })?;
            checked += 1;
        }
    }
    check(flipped > 0 && flipped < 200, || "flip never varied".into())?;
    Ok(format!("{checked} centers on segment, {flipped}/200 frames flipped"))
}

fn masking_exactness() -> Outcome {
    let d = dims(320, 240);
    let mut r = rng(8);
    for trial in 0..20 {
        let img = random_image(&mut r, d);
        let center = Point::new(r.random_range(30..=290), r.random_range(30..=210));
        let mask = MaskSpec {
            center,
            width: 60,
            height: 60,
            origin: MaskOrigin::Uniform,
        };
        let out = apply_masks(&img, &[mask]).map_err(|e| e.to_string())?;
        let mut zeros = [0usize; 3];
        for (i, (a, b)) in img.as_slice().iter().zip(out.as_slice()).enumerate() {
            if *b == 0.0 {
                zeros[i % 3] += 1;
            } else {
                check(a.to_bits() == b.to_bits(), || format!("trial {trial}: unmasked value changed at {i}"))?;
            }
        }
        check(zeros == [3600; 3], || format!("trial {trial}: zeroed {zeros:?}"))?;
    }
    Ok("20 random 60x60 masks: 3600 zeros/channel, rest bit-identical".into())
}

fn label_tensor_sums() -> Outcome {
    let native = dims(640, 360);
    let mut r = rng(12);
    let mut count = 0;
    for (name, cfg) in PRESETS.iter().take(6) {
        for i in 0..20u64 {
            let ann = random_annotation(&mut r, native, "s", i);
            let img = random_image(&mut r, native);
            let out = augment_image(&img, &ann, cfg, image_seed(1, i)).map_err(|e| format!("{name}: {e}"))?;
            check(out.labels.channel_sums() == [1, 1, 1], || format!("{name} frame {i}: {:?}", out.labels.channel_sums()))?;
            count += 1;
        }
    }
    let d = dims(320, 240);
    for x in [0, 319] {
        for y in [0, 239] {
            let p = Point::new(x, y);
            let t = make_label_tensor(&Keypoints { vanishing: p, left: p, right: p }, d).map_err(|e| e.to_string())?;
            check(t.channel_sums() == [1, 1, 1], || format!("corner ({x},{y})"))?;
            count += 1;
        }
    }
    Ok(format!("{count} tensors with channel sums (1,1,1)"))
}

fn flip_involution() -> Outcome {
    let mut r = rng(21);
    for i in 0..100u64 {
        let d = dims(r.random_range(8..200), r.random_range(8..150));
        let ann = random_annotation(&mut r, d, "s", i);
        let img = random_image(&mut r, d);
        let (f, fa) = horizontal_flip(&img, &ann).map_err(|e| e.to_string())?;
        let (b, ba) = horizontal_flip(&f, &fa).map_err(|e| e.to_string())?;
        let bits = |x: &cacut::ImageBuffer| x.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        check(bits(&b) == bits(&img) && ba == ann, || format!("frame {i} not restored"))?;
    }
    Ok("100 random frames restored bit-exactly".into())
}

fn metric_oracle() -> Outcome {
    let net = dims(320, 240);
    let native = dims(1280, 720);
    let e = keypoint_error(Point::new(80, 60), Point::new(79, 56), net, native).map_err(|e| e.to_string())?;
    check((e - 12.6491).abs() <= 1e-3, || format!("error {e}"))?;

    // ground truth on the (4, 3) lattice maps exactly onto net pixels
    let mut r = rng(31);
    let mut gts = Vec::new();
    let mut preds = Vec::new();
    for i in 0..50u64 {
        let kp = random_keypoints(&mut r, net);
        let gt = KeypointAnnotation {
            image: format!("f{i}"),
            sequence: format!("s{}", i % 5),
            dims: native,
            frame: i,
            keypoints: kp.map(|p| Point::new(p.x * 4, p.y * 3)),
        };
        preds.push(Prediction { image: gt.image.clone(), keypoints: kp });
        gts.push(gt);
    }
    let s = evaluate_run(&gts, &preds, net, 80.0).map_err(|e| e.to_string())?;
    let all_zero = s.frames.iter().all(|f| f.per_keypoint() == [0.0; 3]) && s.overall == 0.0;
    check(all_zero && s.outlier_count == 0, || format!("overall {} outliers {}", s.overall, s.outlier_count))?;
    Ok(format!("error={e:.4}; preds=gts over {} frames -> 0.0, 0 outliers", gts.len()))
}

fn split_rule() -> Outcome {
    let d = dims(1280, 720);
    let mut r = rng(41);
    let mut layouts: Vec<Vec<(String, usize)>> = [5usize, 100, 1030].iter().map(|&n| vec![("solo".to_string(), n)]).collect();
    layouts.push(
        [("a", 301), ("b", 254), ("c", 199), ("d", 176), ("e", 100)]
            .iter()
            .map(|(s, n)| (s.to_string(), *n))
            .collect(),
    );
    let mut summary = Vec::new();
    for layout in &layouts {
        let mut anns = Vec::new();
        for (seq, n) in layout {
            // frames shuffled in file order
            let mut frames: Vec<u64> = (0..*n as u64).collect();
            for i in (1..frames.len()).rev() {
                frames.swap(i, r.random_range(0..=i));
            }
            anns.extend(frames.into_iter().map(|f| random_annotation(&mut r, d, seq, f)));
        }
        let split = split_by_sequence(&anns, 0.8).map_err(|e| e.to_string())?;
        for (seq, n) in layout {
            let train: Vec<u64> = split.train.iter().filter(|a| &a.sequence == seq).map(|a| a.frame).collect();
            let val: Vec<u64> = split.val.iter().filter(|a| &a.sequence == seq).map(|a| a.frame).collect();
            let want = (*n * 4) / 5;
            check(train == (0..want as u64).collect::<Vec<_>>(), || format!("{seq}/{n}: train {}", train.len()))?;
            check(val == (want as u64..*n as u64).collect::<Vec<_>>(), || format!("{seq}/{n}: val {}", val.len()))?;
        }
        let total: usize = layout.iter().map(|(_, n)| n).sum();
        summary.push(format!("{total}->{}/{}", split.train.len(), split.val.len()));
    }
    Ok(summary.join(" "))
}

fn cli_determinism() -> Outcome {
    let data = tempfile::tempdir().map_err(|e| e.to_string())?;
    let manifest = write_dataset(data.path(), dims(1280, 720), &[("s1", 4), ("s2", 4)], 77);
    let mut trees = Vec::new();
    for (run, workers) in [(0, "1"), (1, "8"), (2, "1"), (3, "8")] {
        let out = data.path().join(format!("out{run}"));
        let args = [
            "cacut", "augment", "--manifest", manifest.to_str().unwrap(), "--out", out.to_str().unwrap(),
            "--preset", "ca-cut-k5", "--seed", "42", "--workers", workers,
        ];
        let code = cacut::cli::run(args);
        check(code == 0, || format!("run {run} exited {code}"))?;
        trees.push(read_tree(&out));
    }
    check(trees[0].len() == 8 * 2 + 1, || format!("{} files", trees[0].len()))?;
    for (i, t) in trees.iter().enumerate().skip(1) {
        check(t == &trees[0], || format!("tree {i} differs"))?;
    }
    Ok(format!("{} files identical across 4 runs (1 and 8 workers)", trees[0].len()))
}

fn dilation_oracle() -> Outcome {
    let mut g = Grid::zeros(100, 100);
    g.set(50, 50, 1.0);
    let d = dilate(&g, 5, 2).map_err(|e| e.to_string())?;
    for y in 0..100 {
        for x in 0..100 {
            let want = if (46..=54).contains(&x) && (46..=54).contains(&y) { 1.0 } else { 0.0 };
            check(d.get(x, y) == want, || format!("({x},{y}) = {}", d.get(x, y)))?;
        }
    }
    let brute = |g: &Grid, k: usize| {
        let r = (k / 2) as i64;
        let mut out = Grid::zeros(g.width(), g.height());
        for y in 0..g.height() as i64 {
            for x in 0..g.width() as i64 {
                let mut m = f32::NEG_INFINITY;
                for yy in (y - r).max(0)..=(y + r).min(g.height() as i64 - 1) {
                    for xx in (x - r).max(0)..=(x + r).min(g.width() as i64 - 1) {
                        m = m.max(g.get(xx as usize, yy as usize));
                    }
                }
                out.set(x as usize, y as usize, m);
            }
        }
        out
    };
    let mut r = rng(51);
    for trial in 0..20 {
        let (w, h) = (r.random_range(1..60), r.random_range(1..45));
        let data = (0..w * h).map(|_| r.random::<f32>()).collect();
        let g = Grid::new(w, h, data).unwrap();
        let mut want = brute(&g, 5);
        want = brute(&want, 5);
        check(dilate(&g, 5, 2).map_err(|e| e.to_string())? == want, || format!("grid {trial} ({w}x{h}) differs"))?;
    }
    Ok("9x9 block exact; 20 random grids match brute-force max filter".into())
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("crop-aligned placement (Gaussian offsets along rows)", gaussian_conformance),
        ("uniform placement (mean and chi-square)", uniform_conformance),
        ("k-of-n exactness", k_of_n_exactness),
        ("sigma=0 alignment", zero_sigma_alignment),
        ("masking exactness", masking_exactness),
        ("label tensor channel sums", label_tensor_sums),
        ("flip involution", flip_involution),
        ("metric oracle", metric_oracle),
        ("split rule", split_rule),
        ("determinism across workers", cli_determinism),
        ("dilation oracle", dilation_oracle),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        match f() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    println!("{} of {} acceptance criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
