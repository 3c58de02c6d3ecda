//! File formats: the HPC1 pattern container, binary PGM/PBM images and CSV
//! tables.

mod hpc1;
mod pnm;
mod tables;

pub use hpc1::{read_patterns, write_patterns, HEADER_LEN, MAGIC, VERSION};
pub use pnm::{read_pgm, write_object_pgm, write_pbm, write_pgm, write_reconstruction_pgm, AffineMap};
pub use tables::{
    read_permutation_csv, write_affine_csv, write_bench_csv, write_metrics_csv, write_permutation_csv, write_values_csv,
    MetricsRow,
};
