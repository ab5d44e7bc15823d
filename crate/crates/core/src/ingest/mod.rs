//! Station lists and distance matrices: CSV input, the matrix file format,
//! block stitching and the cached routing-API client.

mod fetch;
mod matrix_io;
mod stations;
mod stitch;

#[cfg(feature = "http")]
pub use fetch::HttpTransport;
pub use fetch::{
    cache_key, fetch_block, plan_batches, ApiConfig, BlockCache, FetchError, MatrixTransport,
    API_KEY_ENV, DEFAULT_ENDPOINT, DEFAULT_ROUTING_PROFILE, MAX_BATCH,
};
pub use matrix_io::{load_matrix, read_matrix, save_matrix, write_matrix};
pub use stations::{load_stations, read_stations, write_stations};
pub use stitch::{
    load_block, load_blocks_dir, save_block, stitch, stitch_with_report, MatrixBlock, StitchReport,
    MAX_BLOCK_DIM,
};

use thiserror::Error;

use crate::model::ModelError;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed matrix file: {0}")]
    MalformedMatrix(String),
    #[error("matrix header says n={header} but {found}")]
    DimensionHeader { header: usize, found: String },
    #[error("malformed station file: {0}")]
    MalformedStations(String),
    #[error("malformed block: {0}")]
    MalformedBlock(String),
    #[error("no block covers cell ({0}, {1})")]
    CoverageGap(usize, usize),
    #[error("block references station {id} but the network has {n}")]
    DimensionMismatch { id: usize, n: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl IngestError {
    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        IngestError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}
