//! Communication model: nominal graphs, random link failures and the mixing
//! matrices built from each step's surviving links.

mod graph;
mod mixing;
mod schedule;
pub mod topology;

pub(crate) use graph::{column_of, parse_field};
pub use graph::{is_connected, Mode, NominalGraph};
pub use mixing::{
    augmented_entry_floor, augmented_push_matrix, metropolis_weights, push_matrix, SparseMatrix, VirtualIndexMap,
};
pub use schedule::{ActiveLinks, GraphSchedule, SCHEDULE_PRNG};
