//! Evaluation reports as flat JSON objects and TSV rows.

use netinfer_core::eval::{
    community_report, edge_metrics, structure_metrics, InferredCommunities,
};
use netinfer_core::graph::{CommunityPartition, Graph};
use netinfer_core::inference::{Directedness, InferredGraph};
use serde::Serialize;

use crate::error::{Error, Result};

/// All metrics for one inferred graph. Community fields are `None` when no
/// ground-truth partition was available.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub config_hash: String,
    pub detector_seed: Option<u64>,
    pub k: usize,
    pub mode: &'static str,
    pub saturated: bool,
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
    pub true_edges: usize,
    pub inferred_edges: usize,
    pub hits: usize,
    pub node_recovery: f64,
    pub degree_rel_err: f64,
    pub clustering_rel_err: f64,
    pub nmi: Option<f64>,
    pub nmi_degenerate: Option<bool>,
    pub pwf: Option<f64>,
    pub density_gap: Option<f64>,
    pub conductance_gap: Option<f64>,
    pub nc: Option<f64>,
    pub truth_communities: Option<usize>,
    pub inferred_communities: Option<usize>,
}

pub fn mode_str(d: Directedness) -> &'static str {
    match d {
        Directedness::Directed => "directed",
        Directedness::Undirected => "undirected",
    }
}

/// Scores `inferred` against `truth`. With a partition, label propagation
/// seeded by `detector_seed` extracts the inferred network's communities.
pub fn evaluate(
    truth: &Graph,
    partition: Option<&CommunityPartition>,
    inferred: &InferredGraph,
    detector_seed: u64,
    config_hash: String,
) -> Result<EvalReport> {
    let n = truth.node_count().max(inferred.dimension);
    let truth = truth.clone().with_node_count(n);
    let inferred_graph =
        Graph::from_inferred(inferred, n).map_err(|e| Error::stage("evaluate", e))?;
    let edges = edge_metrics(&truth, inferred);
    let structure = structure_metrics(&truth, &inferred_graph);
    let community = partition
        .map(|p| {
            community_report(
                &truth,
                p,
                &inferred_graph,
                InferredCommunities::Detect {
                    seed: detector_seed,
                },
            )
            .map_err(|e| Error::stage("evaluate", e))
        })
        .transpose()?;
    Ok(EvalReport {
        config_hash,
        detector_seed: community.and_then(|c| c.detector_seed),
        k: inferred.requested_k,
        mode: mode_str(inferred.directedness),
        saturated: inferred.saturated,
        precision: edges.precision,
        recall: edges.recall,
        f_measure: edges.f_measure,
        true_edges: edges.true_edge_count,
        inferred_edges: edges.inferred_edge_count,
        hits: edges.hit_count,
        node_recovery: structure.node_recovery,
        degree_rel_err: structure.degree_rel_err,
        clustering_rel_err: structure.clustering_rel_err,
        nmi: community.map(|c| c.nmi),
        nmi_degenerate: community.map(|c| c.nmi_degenerate),
        pwf: community.map(|c| c.pwf),
        density_gap: community.map(|c| c.density_gap),
        conductance_gap: community.map(|c| c.conductance_gap),
        nc: community.map(|c| c.nc),
        truth_communities: community.map(|c| c.truth_communities),
        inferred_communities: community.map(|c| c.inferred_communities),
    })
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises") + "\n"
    }

    fn fields(&self) -> Vec<(String, String)> {
        let value = serde_json::to_value(self).expect("report serialises");
        let serde_json::Value::Object(map) = value else {
            unreachable!()
        };
        map.into_iter()
            .map(|(k, v)| {
                let cell = match v {
                    serde_json::Value::Null => "NA".to_string(),
                    serde_json::Value::String(s) => s,
                    other => other.to_string(),
                };
                (k, cell)
            })
            .collect()
    }

    /// Tab-separated header and value lines.
    pub fn to_tsv(&self) -> String {
        let (keys, values): (Vec<String>, Vec<String>) = self.fields().into_iter().unzip();
        format!("{}\n{}\n", keys.join("\t"), values.join("\t"))
    }
}
