use num_bigint::BigUint;
use proptest::collection::vec;
use proptest::prelude::*;

use bpinr::bounds::{build_l1_net, format_sig3, relative_factor};
use bpinr::io::{decode_model, encode_model, encode_netpbm, encode_wav, parse_netpbm, parse_wav, ModelFile, ModelMeta, SavedModel};
use bpinr::io::{WavAudio, WavSamples};
use bpinr::metrics::{ber, per_plane_ber, psnr};
use bpinr::network::ternary::TernaryMlp;
use bpinr::network::{ActivationKind, Mlp, NetSpec};
use bpinr::signal::{dequantize, epsilon, fp32_decompose, fp32_recompose, quantize};
use bpinr::training::{BitMapping, LossKind};
use bpinr::{decompose, recompose, DigitalSignal};

fn signal_strategy() -> impl Strategy<Value = (DigitalSignal, u32)> {
    (prop::sample::select(vec![1u32, 2, 3, 4, 6, 8, 12, 16, 24, 32]), vec(1usize..6, 1..4), prop::bool::ANY)
        .prop_flat_map(|(n, shape, rgb)| {
            let channels = if rgb { 3 } else { 1 };
            let len = shape.iter().product::<usize>() * channels;
            let top = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
            let ks: Vec<u32> = (1..=n).filter(|k| n % k == 0).collect();
            (vec(0..=top, len), prop::sample::select(ks)).prop_map(move |(samples, k)| {
                (DigitalSignal::new(shape.clone(), channels, n, samples).unwrap(), k)
            })
        })
}

fn image_strategy(bits: u32) -> impl Strategy<Value = DigitalSignal> {
    (1usize..12, 1usize..12, prop::bool::ANY).prop_flat_map(move |(h, w, rgb)| {
        let channels = if rgb { 3 } else { 1 };
        vec(0..=((1u32 << bits) - 1), h * w * channels)
            .prop_map(move |s| DigitalSignal::new(vec![h, w], channels, bits, s).unwrap())
    })
}

/// Rounds a positive integer to 3 significant figures with SI suffixes,
/// working on the decimal expansion of an `f64`-free string.
fn sig3_oracle(v: u128) -> String {
    if v < 1000 {
        return v.to_string();
    }
    let digits = v.to_string();
    let mut exp = digits.len() as u32 - 1;
    let lead: u128 = digits[..3].parse().unwrap();
    let round_up = digits.as_bytes()[3] >= b'5';
    let mut lead = lead + round_up as u128;
    if lead == 1000 {
        lead = 100;
        exp += 1;
    }
    let (suffix, group) = match exp {
        3..=5 => ("K", 3),
        6..=8 => ("M", 6),
        9..=11 => ("G", 9),
        12..=14 => ("T", 12),
        _ => ("", 0),
    };
    let text = lead.to_string();
    if group == 0 {
        return format!("{}.{}e{exp}", &text[..1], &text[1..]);
    }
    let int = (exp - group + 1) as usize;
    if int == 3 {
        format!("{text}{suffix}")
    } else {
        format!("{}.{}{suffix}", &text[..int], &text[int..])
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn recompose_inverts_decompose((signal, k) in signal_strategy()) {
        let stack = decompose(&signal, k).unwrap();
        prop_assert_eq!(stack.plane_count() as u32, signal.bit_depth() / k);
        prop_assert!(stack.planes().iter().flatten().all(|&q| q < (1u64 << k) as u32 || k == 32));
        prop_assert_eq!(recompose(&stack).unwrap(), signal);
    }

    #[test]
    fn quantize_lands_within_epsilon(v in 0.0f64..=1.0, n in 1u32..=16) {
        let q = quantize(v, n).unwrap();
        prop_assert!(q < (1u32 << n));
        prop_assert!((dequantize(q, n) - v).abs() <= epsilon(n).unwrap() * (1.0 + 1e-12));
        prop_assert_eq!(quantize(dequantize(q, n), n).unwrap(), q);
    }

    #[test]
    fn fp32_planes_roundtrip(bits in vec(any::<u32>(), 0..64)) {
        let floats: Vec<f32> = bits.iter().map(|&b| f32::from_bits(b)).collect();
        let back: Vec<u32> = fp32_recompose(&fp32_decompose(&floats)).iter().map(|v| v.to_bits()).collect();
        prop_assert_eq!(back, bits);
    }

    #[test]
    fn sig3_matches_string_rounding(v in 1u128..10u128.pow(20)) {
        prop_assert_eq!(format_sig3(&BigUint::from(v)), sig3_oracle(v));
    }

    #[test]
    fn relative_factor_grows_with_bits(d in 1u32..5, n in 1u32..16) {
        prop_assert!(relative_factor(d, n + 1) > relative_factor(d, n));
        prop_assert!(relative_factor(d + 1, n) > relative_factor(d, n));
    }

    #[test]
    fn l1_net_is_exact(x in vec(-1e6f64..1e6, 1..10)) {
        let got = build_l1_net(x.len()).unwrap().eval(&x).unwrap()[0];
        prop_assert_eq!(got, x.iter().map(|v| v.abs()).sum::<f64>());
    }

    #[test]
    fn ber_is_symmetric_and_bounded(a in image_strategy(8), seed in any::<u64>()) {
        let b_samples: Vec<u32> = a.samples().iter().enumerate()
            .map(|(i, &v)| v ^ ((seed.rotate_left(i as u32 % 64) as u32) & 0xff))
            .collect();
        let b = DigitalSignal::new(a.shape().to_vec(), a.channels(), 8, b_samples).unwrap();
        let x = ber(&a, &b).unwrap();
        prop_assert_eq!(x, ber(&b, &a).unwrap());
        prop_assert!((0.0..=1.0).contains(&x));
        let planes = per_plane_ber(&a, &b).unwrap();
        prop_assert!((planes.iter().sum::<f64>() / 8.0 - x).abs() < 1e-12);
        prop_assert_eq!(x == 0.0, psnr(&a, &b).unwrap() == f64::INFINITY);
    }

    #[test]
    fn netpbm_roundtrip(img in prop_oneof![image_strategy(8), image_strategy(16)]) {
        prop_assert_eq!(parse_netpbm(&encode_netpbm(&img).unwrap()).unwrap(), img);
    }

    #[test]
    fn wav_roundtrip(pcm in vec(any::<i16>(), 0..50), floats in vec(any::<u32>(), 0..50), rate in 1u32..200_000) {
        let a = WavAudio { sample_rate: rate, samples: WavSamples::Pcm16(pcm) };
        prop_assert_eq!(parse_wav(&encode_wav(&a)).unwrap(), a);
        let f = WavAudio { sample_rate: rate, samples: WavSamples::Float32(floats.iter().map(|&b| f32::from_bits(b)).collect()) };
        match parse_wav(&encode_wav(&f)).unwrap().samples {
            WavSamples::Float32(v) => prop_assert_eq!(v.iter().map(|x| x.to_bits()).collect::<Vec<_>>(), floats),
            other => prop_assert!(false, "wrong kind {:?}", other),
        }
    }
}

fn meta(shape: Vec<usize>) -> ModelMeta {
    ModelMeta {
        loss: LossKind::Bce,
        plane_bits: 1,
        bit_depth: 8,
        mapping: BitMapping::contiguous(8),
        planes: 8,
        shape,
        channels: 1,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn dense_models_roundtrip(width in 1usize..12, depth in 1usize..4, seed in any::<u64>(), act in 0usize..6) {
        let kind = [
            ActivationKind::sine(),
            ActivationKind::ReluPosEnc { num_frequencies: 2 },
            ActivationKind::Gauss { scale: 3.5 },
            ActivationKind::Gelu,
            ActivationKind::Tanh,
            ActivationKind::Relu,
        ][act];
        let spec = NetSpec::new(width, depth, kind);
        let m32: Mlp<f32> = spec.build(3, 2, seed).unwrap();
        let m64: Mlp<f64> = spec.build(3, 2, seed).unwrap();
        for model in [SavedModel::Dense32(m32), SavedModel::Dense64(m64)] {
            let file = ModelFile { meta: meta(vec![4, 5]), model };
            prop_assert_eq!(decode_model(&encode_model(&file)).unwrap(), file);
        }
    }

    #[test]
    fn ternary_models_roundtrip(width in 1usize..20, depth in 1usize..4, encoding in 0usize..4, seed in any::<u64>()) {
        let net: TernaryMlp<f32> = TernaryMlp::init(2, encoding, width, depth, 1, seed).unwrap();
        let file = ModelFile { meta: meta(vec![3, 3]), model: SavedModel::Ternary32(net.clone()) };
        let back = decode_model(&encode_model(&file)).unwrap();
        match back.model {
            SavedModel::Ternary32(got) => {
                for (a, b) in got.layers().iter().zip(net.layers()) {
                    prop_assert_eq!(&a.quantized, &b.quantized);
                    prop_assert!(a.quantized.iter().all(|q| (-1..=1).contains(q)));
                    prop_assert_eq!(a.beta, b.beta);
                }
            }
            _ => prop_assert!(false, "decoded a different model kind"),
        }
    }
}
