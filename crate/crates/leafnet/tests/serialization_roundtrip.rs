//! Round-trip property over randomly sampled small architectures.

use proptest::prelude::*;

use leafnet::model_io::{decode_model, encode_model};
use leafnet::nn::{classifier_layers, Activation, LayerSpec, Mode, Model};
use leafnet::{Rng, Shape, Tensor};

#[derive(Debug, Clone)]
struct ArchChoice {
    h: usize,
    w: usize,
    c: usize,
    rescale: bool,
    blocks: Vec<(usize, bool)>, // (filters, pool after)
    dense: Option<(usize, bool)>, // (units, relu?)
    classes: usize,
}

fn arch_strategy() -> impl Strategy<Value = ArchChoice> {
    (
        4usize..=10,
        4usize..=10,
        1usize..=3,
        any::<bool>(),
        prop::collection::vec((1usize..=4, any::<bool>()), 0..=2),
        prop::option::of((1usize..=8, any::<bool>())),
        2usize..=5,
    )
        .prop_map(|(h, w, c, rescale, blocks, dense, classes)| ArchChoice {
            h,
            w,
            c,
            rescale,
            blocks,
            dense,
            classes,
        })
}

fn build_layers(arch: &ArchChoice) -> Vec<LayerSpec> {
    let mut layers = Vec::new();
    if arch.rescale {
        layers.push(LayerSpec::Rescale {
            factor: 1.0 / 255.0,
        });
    }
    let (mut h, mut w) = (arch.h, arch.w);
    for &(filters, pool) in &arch.blocks {
        layers.push(LayerSpec::Conv2D { filters });
        if pool && h >= 2 && w >= 2 {
            layers.push(LayerSpec::MaxPool);
            h /= 2;
            w /= 2;
        }
    }
    layers.push(LayerSpec::Flatten);
    if let Some((units, relu)) = arch.dense {
        layers.push(LayerSpec::Dense {
            units,
            activation: if relu {
                Activation::Relu
            } else {
                Activation::Linear
            },
        });
    }
    layers.push(LayerSpec::SoftmaxOutput {
        classes: arch.classes,
    });
    layers
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn round_trip_predictions_are_bitwise_identical(arch in arch_strategy(), seed in 0u64..1000) {
        let layers = build_layers(&arch);
        let input_shape = Shape::new(&[arch.h, arch.w, arch.c]).unwrap();
        let mut rng = Rng::seeded(seed);
        let model: Model<f32> = Model::init(input_shape, layers, &mut rng).unwrap();
        let class_names: Vec<String> = (0..arch.classes).map(|i| format!("c{i}")).collect();

        let bytes = encode_model(&model, &class_names).unwrap();
        let loaded = decode_model(&bytes).unwrap();
        prop_assert_eq!(&loaded.class_names, &class_names);

        for trial in 0..10u64 {
            let mut batch = Tensor::<f32>::zeros(&[1, arch.h, arch.w, arch.c]).unwrap();
            let mut input_rng = Rng::new(seed ^ 0xbeef, trial);
            for v in batch.data_mut() {
                *v = input_rng.next_uniform(0.0f32, 255.0).unwrap();
            }
            let a = model.forward(&batch, Mode::Eval).unwrap();
            let b = loaded.model.forward(&batch, Mode::Eval).unwrap();
            prop_assert_eq!(a.probabilities().data(), b.probabilities().data());
            prop_assert_eq!(a.penultimate().data(), b.penultimate().data());
        }
    }
}

#[test]
fn full_size_classifier_container_is_about_16_megabytes() {
    // 3,989,672 parameters at 4 bytes each, plus a small header.
    let model =
        Model::<f32>::zeros(Shape::new(&[180, 180, 3]).unwrap(), classifier_layers(8)).unwrap();
    let names: Vec<String> = (0..8).map(|i| format!("class_{i}")).collect();
    let bytes = encode_model(&model, &names).unwrap();
    assert_eq!(model.param_count(), 3_989_672);
    let payload = 3_989_672 * 4; // 15,958,688
    assert!(bytes.len() > payload && bytes.len() < payload + 512, "{}", bytes.len());
}
