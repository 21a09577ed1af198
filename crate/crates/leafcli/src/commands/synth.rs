use leafnet::data::gen_synthetic;
use leafnet::Result;

use crate::SynthArgs;

pub fn run(args: SynthArgs) -> Result<()> {
    let written = gen_synthetic(&args.out, args.per_class, args.size, args.seed)?;
    eprintln!("wrote {written} images under {}", args.out.display());
    Ok(())
}
