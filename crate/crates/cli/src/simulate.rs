use tulik_core::io::DatasetFile;
use tulik_core::model::QUADRATURE_ORDER;
use tulik_core::simulate::simulate_dataset_redrawn;

use crate::error::CliResult;
use crate::files::{read_params, write_dataset};
use crate::SimulateArgs;

pub fn run(args: &SimulateArgs) -> CliResult<()> {
    let (params, edges, source) = match (&args.preset, &args.params) {
        (Some(preset), _) => {
            let truth = preset.truth(args.truth_seed)?;
            (truth.params, truth.edges, preset.name().to_string())
        }
        (None, Some(path)) => (read_params(path)?, Vec::new(), path.display().to_string()),
        (None, None) => unreachable!("clap requires --preset or --params"),
    };
    let (trajectories, redraws) = simulate_dataset_redrawn(&params, args.num, args.seed, args.max_redraws)?;
    let mut file = DatasetFile::new(*params.grid(), params.nodes(), trajectories)?.with_truth(params)?;
    file.edges = edges;
    let notes = [
        ("source", source),
        ("seed", args.seed.to_string()),
        ("redraws", redraws.to_string()),
        ("quadrature_order", QUADRATURE_ORDER.to_string()),
    ];
    file.notes.extend(notes.into_iter().map(|(k, v)| (k.to_string(), v)));
    if args.preset.is_some() {
        file.notes.insert("truth_seed".into(), args.truth_seed.to_string());
    }
    write_dataset(&args.out, &file)
}
