use std::path::PathBuf;

use clap::Args;
use epimu::models::{k_concurrency_model, protocol_model_iis, task_model_sak, TaskLabeling};
use epimu::subdivision::SubdividedFacet;
use epimu::SimplicialModel;
use serde_json::json;

use crate::fail::Failure;

/// Flags shared by every verb that needs a model.
#[derive(Args, Debug)]
pub struct ModelArgs {
    /// input | sak | sak-fc | iis | rk | @file.json
    #[arg(long)]
    pub model: String,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    /// concurrency bound for the rk protocol
    #[arg(long)]
    pub k_conc: Option<usize>,
    /// refuse to build models with more states than this
    #[arg(long, default_value_t = 1_000_000)]
    pub limit: usize,
}

impl ModelArgs {
    pub fn describe(&self) -> String {
        let mut s = format!("model={}", self.model);
        if let Some(n) = self.n {
            s.push_str(&format!(" n={n}"));
        }
        if let Some(k) = self.k {
            s.push_str(&format!(" k={k}"));
        }
        if let Some(m) = self.m {
            s.push_str(&format!(" m={m}"));
        }
        if let Some(c) = self.k_conc {
            s.push_str(&format!(" k-conc={c}"));
        }
        s.push_str(&format!(" limit={}", self.limit));
        s
    }
}

/// A resolved model plus the metadata that travels with it into exports.
/// `facets` is present when the states came from subdivided facets, so the
/// symbolic (base, history) names can be serialized instead of view trees.
pub struct Built {
    pub meta: serde_json::Value,
    pub model: SimplicialModel,
    pub facets: Option<Vec<SubdividedFacet>>,
}

impl Built {
    pub fn n(&self) -> usize {
        self.model.n()
    }
}

fn need(value: Option<usize>, flag: &str, kind: &str) -> Result<usize, Failure> {
    value.ok_or_else(|| Failure::input(format!("model {kind} requires --{flag}")))
}

fn meta(kind: &str, n: usize, k: Option<usize>, m: Option<usize>) -> serde_json::Value {
    json!({
        "kind": kind,
        "n": n,
        "k": k,
        "m": m,
        "version": env!("CARGO_PKG_VERSION"),
    })
}

pub fn resolve(args: &ModelArgs) -> Result<Built, Failure> {
    if let Some(path) = args.model.strip_prefix('@') {
        return crate::json::import(&PathBuf::from(path));
    }
    match args.model.as_str() {
        "input" => {
            let n = need(args.n, "n", "input")?;
            let p = protocol_model_iis(n, 0, args.limit)?;
            Ok(Built {
                meta: meta("input", n, None, None),
                model: p.model().clone(),
                facets: Some(p.facets().to_vec()),
            })
        }
        "sak" | "sak-fc" => {
            let n = need(args.n, "n", &args.model)?;
            let k = need(args.k, "k", &args.model)?;
            let labeling = if args.model == "sak" {
                TaskLabeling::Inputs
            } else {
                TaskLabeling::InputsAndDecisions
            };
            Ok(Built {
                meta: meta(&args.model, n, Some(k), None),
                model: task_model_sak(n, k, labeling)?,
                facets: None,
            })
        }
        "iis" => {
            let n = need(args.n, "n", "iis")?;
            let m = need(args.m, "m", "iis")?;
            let p = protocol_model_iis(n, m, args.limit)?;
            Ok(Built {
                meta: meta("iis", n, None, Some(m)),
                model: p.model().clone(),
                facets: Some(p.facets().to_vec()),
            })
        }
        "rk" => {
            let n = need(args.n, "n", "rk")?;
            let k = need(args.k_conc, "k-conc", "rk")?;
            let p = k_concurrency_model(n, k, args.limit)?;
            Ok(Built {
                meta: meta("rk", n, Some(k), Some(p.rounds())),
                model: p.model().clone(),
                facets: Some(p.facets().to_vec()),
            })
        }
        other => Err(Failure::input(format!(
            "unknown model kind {other}; expected input, sak, sak-fc, iis, rk, or @file.json"
        ))),
    }
}
