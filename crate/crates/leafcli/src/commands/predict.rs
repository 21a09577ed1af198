use serde::Serialize;

use leafnet::data::{batch_to_tensor, decode_file, resize_bilinear};
use leafnet::model_io::load_model;
use leafnet::nn::Mode;
use leafnet::treatment::{load_treatments, recommend, AgentType};
use leafnet::Result;

use crate::PredictArgs;

#[derive(Serialize)]
struct TopEntry {
    class: String,
    p: f64,
}

#[derive(Serialize)]
struct TreatmentOut {
    agent_type: AgentType,
    treatment: String,
    notes: Option<String>,
}

/// The single JSON object printed on stdout.
#[derive(Serialize)]
struct PredictionReport {
    class: String,
    confidence: f64,
    top_k: Vec<TopEntry>,
    treatment: Option<TreatmentOut>,
    model_id: String,
}

pub fn run(args: PredictArgs) -> Result<()> {
    let loaded = load_model(&args.model)?;
    let image = decode_file(&args.image)?;
    let dims = loaded.model.input_shape().dims();
    let resized = resize_bilinear(&image, dims[0], dims[1])?;
    let batch = batch_to_tensor::<f32>(&[resized])?;
    let trace = loaded.model.forward(&batch, Mode::Eval)?;
    let probs = trace.probabilities().data();

    // Probabilities sorted descending; equal values keep class order.
    let mut ranked: Vec<(usize, f32)> = probs.iter().copied().enumerate().collect();
    ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    let k = args.top_k.min(ranked.len()).max(1);
    let top_k: Vec<TopEntry> = ranked[..k]
        .iter()
        .map(|&(class, p)| TopEntry {
            class: loaded.class_names[class].clone(),
            p: p as f64,
        })
        .collect();

    let class = top_k[0].class.clone();
    let treatment = match &args.treatments {
        Some(path) => {
            let rules = load_treatments(path)?;
            recommend(&class, &rules).map(|rule| TreatmentOut {
                agent_type: rule.agent_type,
                treatment: rule.treatment.clone(),
                notes: rule.notes.clone(),
            })
        }
        None => None,
    };

    let report = PredictionReport {
        class,
        confidence: top_k[0].p,
        top_k,
        treatment,
        model_id: format!("{:08x}", loaded.checksum),
    };
    println!(
        "{}",
        serde_json::to_string(&report).expect("report serializes")
    );
    Ok(())
}
