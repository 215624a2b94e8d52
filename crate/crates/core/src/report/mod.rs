//! Tables, graph exports, run configuration and the staged pipeline.

mod config;
mod graph;
mod pipeline;
mod stages;
mod tables;

pub use config::{ProviderMode, RunConfig, SearchMode};
pub use graph::{campaign_graph, edge_endpoints, to_dot, to_graphml, CampaignGraph, GraphEdge, GraphNode};
pub use pipeline::{
    cluster_config, digest_path, run_pipeline, table_options, PipelineRun, PipelineState, StageDigest, StageRecord,
    STAGES,
};
pub use stages::{
    classify, cluster, extract, fetch_tx, filter, ingest, load_artifacts, load_btc_addresses, read_cluster_report,
    read_corpus, report, trace, ClusterOutputs, ClusterPaths, Layout, TraceOutputs,
};
pub use tables::*;
