//! Competitor searches over the same oracle as the SPSA optimizer.

mod ga;
mod sequential;

pub use ga::{
    crossover_xor, mutate_bits, random_population, run_bga, run_bga_from, tournament_select, Chromosome, GaConfig,
};
pub use sequential::{run_sequential, AcceptedMove, Direction, Move, SequentialConfig, SequentialResult};
