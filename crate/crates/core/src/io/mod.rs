//! File formats, manifests and the command layer behind the CLI.

mod commands;
mod ingest;
mod manifest;
mod table;

pub use commands::{
    parse_times, run_command, Command, RunReport, PROFILES_HEADER, Q_CURVE_HEADER, RETENTION_HEADER,
    SENSITIVITY_HEADER, TRACE_HEADER,
};
pub use ingest::{
    capillary_coefficient, ingest_imbibition, read_imbibition, read_mip, read_raw_imbibition, render_imbibition,
    RawImbibitionRecords,
};
pub use manifest::{apply_bounds, sha256_hex, LoadedManifest, Overrides, RunManifest, SetupSpec, Source};
pub use table::{fmt_num, parse_table, read_table, render_table, Table};
