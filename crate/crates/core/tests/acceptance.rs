//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p bpinr --test acceptance`. Pass criterion numbers
//! as arguments (`-- 3 8`) to run a subset.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use rand::Rng;

use bpinr::applications::{
    dense_equivalent, expand_bit_depth, fit_audio_fp32, fit_ternary, hypothesis_sweep, BiasProfile, TernarySpec,
};
use bpinr::bounds::{
    build_l1_net, build_max_net, build_maxconv_net, covering_radius, format_sig3, relative_factor, upper_bound, BoundQuery,
};
use bpinr::io::{decode_model, encode_model, ModelFile, ModelMeta, SavedModel};
use bpinr::metrics::{ber, psnr, rmse, ssim};
use bpinr::network::{rng_from_seed, ActivationKind, Mlp, NetSpec};
use bpinr::signal::{fp32_decompose, fp32_recompose};
use bpinr::training::{fit, BitMapping, LossKind, TrainConfig};
use bpinr::{decompose, recompose, DigitalSignal, MetricReport};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn desk_net() -> NetSpec {
    NetSpec::new(128, 3, ActivationKind::sine())
}

fn desk_config(loss: LossKind, lr: f64, max_iterations: usize, check_interval: usize, seed: u64) -> TrainConfig {
    TrainConfig {
        loss,
        learning_rate: lr,
        max_iterations,
        check_interval,
        seed,
        ..TrainConfig::default()
    }
}

fn within_runtime(elapsed: Duration, limit_secs: f64) -> bool {
    elapsed.as_secs_f64() < limit_secs
}

// 1

fn decomposition_roundtrip() -> Outcome {
    const SIGNALS: usize = 1000;
    let start = Instant::now();
    let mut rng = rng_from_seed(101);
    let mut failures = 0;
    for i in 0..SIGNALS {
        let n = [1u32, 2, 4, 8, 16][i % 5];
        let divisors: Vec<u32> = (1..=n).filter(|k| n.is_multiple_of(*k)).collect();
        let k = divisors[(i / 5) % divisors.len()];
        let ndim = rng.gen_range(1..=3);
        let shape: Vec<usize> = (0..ndim).map(|_| rng.gen_range(1..=9)).collect();
        let channels = if rng.gen_bool(0.5) { 1 } else { 3 };
        let len = shape.iter().product::<usize>() * channels;
        let samples: Vec<u32> = (0..len).map(|_| rng.gen_range(0..(1u64 << n)) as u32).collect();
        let signal = DigitalSignal::new(shape, channels, n, samples.clone()).unwrap();
        let stack = decompose(&signal, k).unwrap();
        let mask = (1u32 << k) - 1;
        let planes_ok = stack.plane_count() == (n / k) as usize
            && stack.planes().iter().enumerate().all(|(p, plane)| {
                plane.iter().zip(&samples).all(|(&q, &v)| q == (v >> (p as u32 * k)) & mask)
            });
        let back = recompose(&stack).unwrap();
        if !planes_ok || back != signal {
            failures += 1;
        }
    }
    let elapsed = start.elapsed();
    outcome(
        failures == 0 && within_runtime(elapsed, 5.0),
        format!("{failures} of {SIGNALS} signals differ; {:.2} s (limit 5 s)", elapsed.as_secs_f64()),
    )
}

// 2

fn bound_reproduction() -> Outcome {
    let oracle = |d: u32, n: u32| BigUint::from((1u64 << (n + 1)) - 2).pow(2 * d);
    let expected = [(2, 1, "16"), (2, 2, "1.30K"), (2, 4, "810K"), (2, 8, "67.7G"), (3, 1, "64")];
    let mut notes = Vec::new();
    let mut pass = true;
    for (d, n, printed) in expected {
        let exact = relative_factor(d, n);
        let shown = format_sig3(&exact);
        let ub = upper_bound(&BoundQuery::new(d, n, 1.0, -1.0, 1.0).unwrap()).unwrap();
        let ok = exact == oracle(d, n) && shown == printed && ub.relative == exact;
        pass &= ok;
        notes.push(format!("d={d} n={n} -> {shown}"));
    }
    pass &= relative_factor(2, 8) == BigUint::from(67_652_010_000u64) && relative_factor(2, 8) == BigUint::from(510u32).pow(4);
    let u5 = relative_factor(5, 8);
    let u5_shown = format_sig3(&u5);
    pass &= u5 == oracle(5, 8) && u5_shown == "1.19e27";
    let printed = 1.23e27;
    let deviation = (u5.to_string().parse::<f64>().unwrap() - printed) / printed;
    notes.push(format!(
        "d=5 n=8 -> {u5_shown} ({u5} exactly; {:+.1}% against the published 1.23e27, flagged)",
        100.0 * deviation
    ));
    outcome(pass, notes.join(", "))
}

// 3

fn lossless_fit() -> Outcome {
    const SEEDS: u64 = 5;
    const NEEDED: usize = 4;
    let start = Instant::now();
    let signal = common::crop8();
    let mut runs = Vec::new();
    for seed in 0..SEEDS {
        let net: Mlp<f32> = desk_net().build(3, 1, seed).unwrap();
        let cfg = desk_config(LossKind::Bce, 1e-4, 20_000, 50, seed);
        let (_, report) = fit(&signal, 1, net, &cfg).unwrap();
        runs.push(report.iteration_at_lossless);
    }
    let elapsed = start.elapsed();
    let hits = runs.iter().flatten().count();
    outcome(
        hits >= NEEDED && within_runtime(elapsed, 900.0),
        format!(
            "{hits}/{SEEDS} seeds lossless (need {NEEDED}), iterations {:?}; {:.0} s (limit 900 s)",
            runs,
            elapsed.as_secs_f64()
        ),
    )
}

// 4

fn hypothesis_ordering() -> Outcome {
    let signal = common::crop8();
    let seeds = [0, 1, 2];
    let mse = hypothesis_sweep(&signal, &[1, 2, 4], &desk_net(), &desk_config(LossKind::Mse, 1e-4, 20_000, 50, 0), &seeds)
        .unwrap();
    let bce = hypothesis_sweep(&signal, &[1], &desk_net(), &desk_config(LossKind::Bce, 1e-4, 20_000, 50, 0), &seeds).unwrap();
    let medians: Vec<f64> = mse.records.iter().map(|r| r.median).collect();
    let nondecreasing = medians.windows(2).all(|w| w[0] <= w[1]);
    let bce_median = bce.records[0].median;
    let loss_order = bce_median <= medians[0];
    outcome(
        nondecreasing && loss_order,
        format!(
            "MSE medians k=1,2,4: {medians:?} ({} params each); BCE k=1 median {bce_median}",
            mse.param_count
        ),
    )
}

// 5

fn bit_bias() -> Outcome {
    let signal = common::crop8();
    let net: Mlp<f32> = desk_net().build(2, 1, 0).unwrap();
    let cfg = desk_config(LossKind::Mse, 1e-4, 20_000, 50, 0);
    let (_, report) = fit(&signal, 8, net, &cfg).unwrap();
    let budget = report.iteration_at_lossless.unwrap_or(cfg.max_iterations);
    let profile: BiasProfile = bpinr::applications::bias_profile(&report).unwrap();
    let target = budget / 4;
    let Some(i) = profile.nearest(target) else {
        return outcome(false, "no checkpoints");
    };
    let rho = profile.lsb_correlation[i];
    outcome(
        rho.is_some_and(|r| r > 0.0),
        format!(
            "budget {budget}, checkpoint {} (target {target}): Spearman(LSB index, BER) = {rho:?}, per-plane BER LSB-first {:?}",
            profile.iterations[i], profile.ber[i]
        ),
    )
}

// 6

fn gradient_check() -> Outcome {
    const PROBES: usize = 100;
    const TOLERANCE: f64 = 1e-5;
    // Finite differences of a sum of O(1) outputs carry about 1e-10 of
    // rounding noise at this step, so tiny gradients are compared against
    // this floor instead of their own magnitude.
    const FLOOR: f64 = 1e-3;
    const STEP: f64 = 1e-6;
    let start = Instant::now();
    let kinds = [
        ActivationKind::sine(),
        ActivationKind::ReluPosEnc { num_frequencies: 3 },
        ActivationKind::Gauss {
            scale: ActivationKind::DEFAULT_GAUSS_SCALE,
        },
        ActivationKind::Gelu,
        ActivationKind::Tanh,
        ActivationKind::Relu,
    ];
    let mut worst = 0.0f64;
    let mut notes = Vec::new();
    for (s, kind) in kinds.into_iter().enumerate() {
        let mut rng = rng_from_seed(600 + s as u64);
        let mut net: Mlp<f64> = NetSpec::new(16, 2, kind).build(3, 2, s as u64).unwrap();
        let rows = 5;
        let coords: Vec<f64> = (0..rows * 3).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let upstream: Vec<f64> = (0..rows * 2).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let objective = |net: &Mlp<f64>| -> f64 {
            net.forward(&coords).unwrap().iter().zip(&upstream).map(|(o, u)| o * u).sum()
        };
        let analytic = net.backward(&coords, &upstream).unwrap();
        let sizes: Vec<usize> = analytic.blocks.iter().map(Vec::len).collect();
        let mut kind_worst = 0.0f64;
        for _ in 0..PROBES {
            let b = rng.gen_range(0..sizes.len());
            let j = rng.gen_range(0..sizes[b]);
            let original = net.params()[b][j];
            net.params_mut()[b][j] = original + STEP;
            let plus = objective(&net);
            net.params_mut()[b][j] = original - STEP;
            let minus = objective(&net);
            net.params_mut()[b][j] = original;
            let numeric = (plus - minus) / (2.0 * STEP);
            let a = analytic.blocks[b][j];
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(FLOOR);
            kind_worst = kind_worst.max(rel);
        }
        worst = worst.max(kind_worst);
        notes.push(format!("{kind:?} {kind_worst:.1e}"));
    }
    let elapsed = start.elapsed();
    outcome(
        worst < TOLERANCE && within_runtime(elapsed, 60.0),
        format!(
            "{PROBES} probes per activation, worst relative error {worst:.2e} (limit {TOLERANCE:.0e}): {}; {:.2} s",
            notes.join(", "),
            elapsed.as_secs_f64()
        ),
    )
}

// 7

fn ulps_apart(a: f64, b: f64) -> u64 {
    if a == b {
        return 0;
    }
    let key = |v: f64| {
        let bits = v.to_bits() as i64;
        if bits < 0 {
            i64::MIN - bits
        } else {
            bits
        }
    };
    key(a).abs_diff(key(b))
}

/// Spacing of doubles at `|v|`.
fn ulp(v: f64) -> f64 {
    let m = v.abs();
    f64::from_bits(m.to_bits() + 1) - m
}

/// `max_k (y_k - L |x - x_k|_1)` approximating `f` from samples on a grid,
/// returning (sup error over probes, 2 L r).
fn maxconv_error(f: &dyn Fn(&[f64]) -> f64, lipschitz: f64, d: usize, per_axis: usize, probes: usize) -> (f64, f64) {
    let (a, b) = (-1.0, 1.0);
    let at = |i: usize, n: usize| a + (b - a) * i as f64 / (n - 1) as f64;
    let lattice = |n: usize| -> Vec<Vec<f64>> {
        (0..n.pow(d as u32))
            .map(|mut idx| {
                (0..d)
                    .map(|_| {
                        let v = at(idx % n, n);
                        idx /= n;
                        v
                    })
                    .collect()
            })
            .collect()
    };
    let points = lattice(per_axis);
    let samples: Vec<(Vec<f64>, f64)> = points.iter().map(|p| (p.clone(), f(p))).collect();
    let net = build_maxconv_net(&samples, lipschitz).unwrap();
    let r = covering_radius(&points, a, b, probes).unwrap();
    let sup = lattice(probes)
        .iter()
        .map(|x| (net.eval(x).unwrap()[0] - f(x)).abs())
        .fold(0.0, f64::max);
    (sup, 2.0 * lipschitz * r)
}

fn constructions() -> Outcome {
    const VECTORS: usize = 1000;
    let start = Instant::now();
    let mut rng = rng_from_seed(700);
    let mut worst_l1 = 0;
    let mut worst_max = 0.0f64;
    let mut worst_max_result_ulps = 0;
    for _ in 0..VECTORS {
        let d = rng.gen_range(2..=9);
        let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let l1 = build_l1_net(d).unwrap().eval(&x).unwrap()[0];
        let mx = build_max_net(d).unwrap().eval(&x).unwrap()[0];
        worst_l1 = worst_l1.max(ulps_apart(l1, x.iter().map(|v| v.abs()).sum()));
        // max(a, b) is formed as relu(a - b) + relu(b) - relu(-b), whose
        // intermediates live at the scale of the inputs, not of the result;
        // the error is counted in ulps of the largest input magnitude.
        let truth = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        worst_max = worst_max.max((mx - truth).abs() / ulp(scale));
        worst_max_result_ulps = worst_max_result_ulps.max(ulps_apart(mx, truth));
    }
    let abs = |x: &[f64]| x[0].abs();
    // Piecewise-linear with slopes in [-L, L] between random knots.
    let mut pwl = |l: f64| {
        let knots: Vec<f64> = {
            let mut k: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
            k.sort_by(f64::total_cmp);
            k
        };
        let slopes: Vec<f64> = (0..=knots.len()).map(|_| rng.gen_range(-l..l)).collect();
        move |x: &[f64]| {
            let t = x[0];
            let mut v = 0.0;
            let mut prev = -1.0;
            for (i, &kn) in knots.iter().chain(std::iter::once(&1.0)).enumerate() {
                let seg_end = kn.min(t);
                if seg_end > prev {
                    v += slopes[i] * (seg_end - prev);
                }
                prev = prev.max(kn);
            }
            v
        }
    };
    let f1 = pwl(1.5);
    // Max of affine pieces whose gradients lie in [-L, L]^2 is L-Lipschitz in L1.
    let pieces: Vec<(f64, f64, f64)> = (0..5)
        .map(|_| (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let f2 = move |x: &[f64]| pieces.iter().map(|(g0, g1, c)| g0 * x[0] + g1 * x[1] + c).fold(f64::NEG_INFINITY, f64::max);
    let cases = [
        ("|x|", maxconv_error(&abs, 1.0, 1, 9, 2001)),
        ("random 1-D", maxconv_error(&f1, 1.5, 1, 13, 2001)),
        ("random 2-D", maxconv_error(&f2, 2.0, 2, 7, 81)),
    ];
    let maxconv_ok = cases.iter().all(|(_, (sup, limit))| sup <= &(limit * (1.0 + 1e-12)));
    let elapsed = start.elapsed();
    let cases_text: Vec<String> = cases
        .iter()
        .map(|(name, (sup, limit))| format!("{name} sup {sup:.4} <= {limit:.4}"))
        .collect();
    outcome(
        worst_l1 <= 4 && worst_max <= 4.0 && maxconv_ok && within_runtime(elapsed, 60.0),
        format!(
            "L1 worst {worst_l1} ulp, max worst {worst_max} ulp of input scale ({worst_max_result_ulps} ulp of the result) over {VECTORS} vectors each; {}; {:.2} s",
            cases_text.join(", "),
            elapsed.as_secs_f64()
        ),
    )
}

// 8

fn fp32_audio() -> Outcome {
    let mut rng = rng_from_seed(800);
    let mut patterns: Vec<u32> = (0..10_000).map(|_| rng.gen()).collect();
    let specials = [0x0000_0000, 0x8000_0000, 0x7fc0_0000, 0xffc0_0001, 0x7f80_0001, 0x7f80_0000, 0xff80_0000, 0x0000_0001];
    patterns[..specials.len()].copy_from_slice(&specials);
    let floats: Vec<f32> = patterns.iter().map(|&b| f32::from_bits(b)).collect();
    let stack = fp32_decompose(&floats);
    let planes_ok = stack
        .planes()
        .iter()
        .enumerate()
        .all(|(i, plane)| plane.iter().zip(&patterns).all(|(&bit, &p)| bit as u32 == (p >> i) & 1));
    let roundtrip_ok = fp32_recompose(&stack).iter().map(|v| v.to_bits()).eq(patterns.iter().copied());

    let clip = common::tone(512);
    let mut runs = Vec::new();
    let mut exact = false;
    for seed in 0..3 {
        let cfg = desk_config(LossKind::Bce, 1e-3, 50_000, 100, seed);
        let fit = fit_audio_fp32(&clip, &desk_net(), &cfg).unwrap();
        let bits_equal = fit.reconstructed.iter().map(|v| v.to_bits()).eq(clip.iter().map(|v| v.to_bits()));
        runs.push(fit.report.iteration_at_lossless);
        if fit.exact && bits_equal {
            exact = true;
            break;
        }
    }
    outcome(
        planes_ok && roundtrip_ok && exact,
        format!(
            "10^4 patterns: planes {}, roundtrip {}; 512-sample clip exact bit patterns: {exact} (iterations per seed tried {runs:?})",
            if planes_ok { "exact" } else { "WRONG" },
            if roundtrip_ok { "exact" } else { "WRONG" }
        ),
    )
}

// 9

fn ternary() -> Outcome {
    let plane = common::structured_plane();
    let spec = TernarySpec {
        hidden_dim: 128,
        depth: 2,
        encoding: 4,
    };
    let mut runs = Vec::new();
    let mut best = None;
    for seed in 0..3 {
        let fit = fit_ternary(&plane, &spec, &desk_config(LossKind::Bce, 1e-3, 5_000, 50, seed)).unwrap();
        runs.push(fit.report.iteration_at_lossless);
        if fit.report.is_lossless() {
            best = Some(fit);
            break;
        }
        best = Some(fit);
    }
    let fit = best.expect("at least one run");
    let meta = ModelMeta {
        loss: LossKind::Bce,
        plane_bits: 1,
        bit_depth: 1,
        mapping: BitMapping::contiguous(1),
        planes: 1,
        shape: vec![16, 16],
        channels: 1,
    };
    let file = ModelFile {
        meta: meta.clone(),
        model: SavedModel::Ternary32(fit.net.clone()),
    };
    let bytes = encode_model(&file);
    let weights_ok = match decode_model(&bytes).unwrap().model {
        SavedModel::Ternary32(net) => net
            .layers()
            .iter()
            .all(|l| l.quantized.iter().all(|q| (-1..=1).contains(q))),
        _ => false,
    };
    let dense_bytes = encode_model(&ModelFile {
        meta,
        model: SavedModel::Dense32(dense_equivalent(&fit.net).unwrap()),
    })
    .len();
    let lossless = fit.report.is_lossless();
    outcome(
        weights_ok && lossless && bytes.len() < dense_bytes,
        format!(
            "weights in {{-1,0,1}}: {weights_ok}; lossless within 5000 iterations: {lossless} (seeds tried {runs:?}); file {} B vs Binary32 {dense_bytes} B",
            bytes.len()
        ),
    )
}

// 10

fn bit_depth_expansion() -> Outcome {
    let signal = common::crop16();
    let cfg = desk_config(LossKind::Bce, 1e-3, 3_000, 50, 0);
    let (_, r) = expand_bit_depth(&signal, 8, &desk_net(), &cfg).unwrap();
    let lossless = r.report.is_lossless();
    let msb_ok = !lossless || r.msb_exact;
    outcome(
        r.metrics.psnr >= r.zero_padding.psnr && msb_ok,
        format!(
            "PSNR expansion {:.2} dB vs zero padding {:.2} dB (bit replication {:.2} dB); MSB fit lossless {lossless}, MSB planes exact {}",
            r.metrics.psnr, r.zero_padding.psnr, r.bit_replication.psnr, r.msb_exact
        ),
    )
}

// 11

fn naive_ber(a: &[u32], b: &[u32], n: u32) -> f64 {
    let mut diff = 0u64;
    for (x, y) in a.iter().zip(b) {
        for bit in 0..n {
            if (x >> bit) & 1 != (y >> bit) & 1 {
                diff += 1;
            }
        }
    }
    diff as f64 / (a.len() as f64 * n as f64)
}

fn naive_rmse(a: &[u32], b: &[u32]) -> f64 {
    let mut sum = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = *x as f64 - *y as f64;
        sum += d * d;
    }
    (sum / a.len() as f64).sqrt()
}

fn metrics_oracle() -> Outcome {
    const PAIRS: usize = 200;
    const TOLERANCE: f64 = 1e-12;
    let mut rng = rng_from_seed(1100);
    let mut worst = 0.0f64;
    let close = |x: f64, y: f64| (x - y).abs() / y.abs().max(1.0);
    for i in 0..PAIRS {
        let n = [1u32, 4, 8, 12, 16][i % 5];
        let (h, w) = (rng.gen_range(1..24), rng.gen_range(1..24));
        let top = 1u64 << n;
        let a: Vec<u32> = (0..h * w).map(|_| rng.gen_range(0..top) as u32).collect();
        let b: Vec<u32> = a
            .iter()
            .map(|&v| if rng.gen_bool(0.3) { rng.gen_range(0..top) as u32 } else { v })
            .collect();
        let sa = DigitalSignal::mono(vec![h, w], n, a.clone()).unwrap();
        let sb = DigitalSignal::mono(vec![h, w], n, b.clone()).unwrap();
        let peak = (top - 1) as f64;
        let r = naive_rmse(&a, &b);
        worst = worst.max(close(ber(&sa, &sb).unwrap(), naive_ber(&a, &b, n)));
        worst = worst.max(close(rmse(&sa, &sb).unwrap(), r));
        if r > 0.0 {
            worst = worst.max(close(psnr(&sa, &sb).unwrap(), 20.0 * (peak / r).log10()));
        }
    }
    let img = common::crop8();
    let self_ssim = ssim(&img, &img).unwrap();
    let same = MetricReport::compute(&img, &img).unwrap();
    let identical_ok = same.psnr == f64::INFINITY && same.ber == 0.0;
    outcome(
        worst <= TOLERANCE && (self_ssim - 1.0).abs() <= TOLERANCE && identical_ok,
        format!(
            "{PAIRS} random pairs, worst deviation {worst:.1e} (limit {TOLERANCE:.0e}); ssim(a,a) = {self_ssim}; identical inputs: PSNR {}, BER {}",
            same.psnr, same.ber
        ),
    )
}

type Criterion = (u32, &'static str, fn() -> Outcome);

const CRITERIA: [Criterion; 11] = [
    (1, "decomposition roundtrip", decomposition_roundtrip),
    (2, "bound reproduction", bound_reproduction),
    (3, "lossless fit", lossless_fit),
    (4, "hypothesis ordering", hypothesis_ordering),
    (5, "bit bias", bit_bias),
    (6, "gradient correctness", gradient_check),
    (7, "ReLU constructions", constructions),
    (8, "FP32 audio", fp32_audio),
    (9, "ternary", ternary),
    (10, "bit-depth expansion", bit_depth_expansion),
    (11, "metrics oracle", metrics_oracle),
];

fn main() {
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (id, name, run) in CRITERIA {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        failed += usize::from(!result.pass);
        println!(
            "[{}] {id:>2} {name}: {} ({:.1} s)",
            if result.pass { "PASS" } else { "FAIL" },
            result.detail,
            start.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
