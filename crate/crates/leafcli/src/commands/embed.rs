use leafnet::data::scan_directory;
use leafnet::eval::{extract_features, perplexity_affinities, tsne_embed, write_embeddings_csv, TsneConfig};
use leafnet::model_io::load_model;
use leafnet::{Error, Result, Tensor64};

use crate::EmbedArgs;

const EMBED_BATCH: usize = 32;

pub fn run(args: EmbedArgs) -> Result<()> {
    let loaded = load_model(&args.model)?;
    let scan = scan_directory(&args.data)?;
    let n = scan.files.len();
    let max_perplexity = (n as f64 - 1.0) / 3.0;
    if args.perplexity > max_perplexity {
        return Err(Error::Argument(format!(
            "perplexity {} needs more than {n} samples; lower it to at most {max_perplexity:.1}",
            args.perplexity
        )));
    }

    let image_size = loaded.model.input_shape().dims()[0];
    let (features, labels) = extract_features(&loaded.model, &scan.files, image_size, EMBED_BATCH)?;
    // The optimization runs in f64 regardless of the model's precision.
    let features: Tensor64 = features.cast();

    let config = TsneConfig {
        perplexity: args.perplexity,
        iterations: args.iters,
        seed: args.seed,
        ..TsneConfig::default()
    };
    let affinities = perplexity_affinities(&features, config.effective_perplexity(n))?;
    let projection = tsne_embed(&affinities, &labels, &config)?;
    write_embeddings_csv(&projection, &scan.class_names, &args.out)?;
    eprintln!("wrote {n} embedding rows to {}", args.out.display());
    Ok(())
}
