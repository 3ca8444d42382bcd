#![allow(dead_code)]

use bpinr::network::rng_from_seed;
use bpinr::DigitalSignal;
use rand::Rng;

fn render(h: usize, w: usize, bits: u32, seed: u64, f: impl Fn(f64, f64) -> f64, noise: f64) -> DigitalSignal {
    let mut rng = rng_from_seed(seed);
    let top = ((1u64 << bits) - 1) as f64;
    let samples = (0..h * w)
        .map(|i| {
            let (y, x) = ((i / w) as f64 / h as f64, (i % w) as f64 / w as f64);
            let v = f(x, y) + rng.gen_range(-noise..noise);
            (v * top).round().clamp(0.0, top) as u32
        })
        .collect();
    DigitalSignal::mono(vec![h, w], bits, samples).unwrap()
}

fn disk(x: f64, y: f64) -> bool {
    (x - 0.6).powi(2) + (y - 0.4).powi(2) < 0.06
}

/// 32x32 8-bit crop: ramp, ripples, a raised disk and +-3 levels of noise.
pub fn crop8() -> DigitalSignal {
    render(
        32,
        32,
        8,
        1,
        |x, y| {
            let v = 90.0 + 60.0 * x + 30.0 * (6.0 * y + 1.0).sin() + 20.0 * (9.0 * x * y).cos();
            (v + if disk(x, y) { 50.0 } else { 0.0 }) / 255.0
        },
        3.0 / 255.0,
    )
}

/// 64x64 16-bit crop of the same kind of scene.
pub fn crop16() -> DigitalSignal {
    render(
        64,
        64,
        16,
        3,
        |x, y| {
            let v = 0.35 + 0.25 * x + 0.12 * (6.0 * y + 1.0).sin() + 0.08 * (9.0 * x * y).cos();
            v + if disk(x, y) { 0.2 } else { 0.0 }
        },
        0.002,
    )
}

/// A disk XOR diagonal stripes on a 16x16 grid.
pub fn structured_plane() -> DigitalSignal {
    let s = (0..256)
        .map(|i| {
            let (r, c) = ((i / 16) as f64 - 7.5, (i % 16) as f64 - 7.5);
            let disk = r * r + c * c < 30.0;
            let stripe = ((r + c) as i32).rem_euclid(6) < 2;
            (disk ^ stripe) as u32
        })
        .collect();
    DigitalSignal::mono(vec![16, 16], 1, s).unwrap()
}

/// A 440 Hz tone at 16 kHz, amplitude 0.5.
pub fn tone(len: usize) -> Vec<f32> {
    (0..len)
        .map(|i| (0.5 * (2.0 * std::f64::consts::PI * 440.0 * i as f64 / 16_000.0).sin()) as f32)
        .collect()
}
