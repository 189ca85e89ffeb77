//! Command implementations. Every command resolves its seed, does its
//! work, writes its outputs atomically, and drops a manifest next to the
//! primary output.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use cochain::complex::{Cochain, SimplicialComplex};
use cochain::dec::{self, LaplacianSign};
use cochain::error::Error;
use cochain::io;
use cochain::optim::TrainConfig;
use cochain::persistence::{compute_persistence, vietoris_rips};
use cochain::structloss::{
    distance_matrix, embed, AffinityKernel, EmbedMethod, MdsKernel, Metric, PointCloud,
};
use cochain::topnet::{build_expression, train_expression, Activation, ExpressionNode};

use crate::expr;
use crate::manifest::{write_atomic, ManifestArgs, RunManifest};

/// A command failure carrying its process exit code.
pub struct CmdError {
    pub code: i32,
    pub message: String,
}

impl CmdError {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl From<Error> for CmdError {
    fn from(err: Error) -> Self {
        let code = match err {
            Error::Degree(_) | Error::UnsupportedDimension(_) => 3,
            Error::Divergence(_) => 4,
            Error::ChainDegree(_) => 5,
            _ => 2,
        };
        CmdError::new(code, err.to_string())
    }
}

type CmdResult = Result<(), CmdError>;

fn read_file(path: &Path) -> Result<String, CmdError> {
    std::fs::read_to_string(path)
        .map_err(|e| CmdError::new(2, format!("cannot read {}: {e}", path.display())))
}

fn write_output(path: &Path, text: &str) -> CmdResult {
    write_atomic(path, text.as_bytes())
        .map_err(|e| CmdError::new(2, format!("cannot write {}: {e}", path.display())))
}

/// Loads a complex from JSON, or from OFF when the file starts with the
/// OFF header.
fn load_complex(path: &Path) -> Result<SimplicialComplex, CmdError> {
    let text = read_file(path)?;
    let is_off = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .is_some_and(|l| l == "OFF");
    if is_off {
        Ok(io::complex_from_off(&text)?.0)
    } else {
        Ok(io::complex_from_json(&text)?)
    }
}

fn load_points(path: &Path) -> Result<PointCloud<f64>, CmdError> {
    let text = read_file(path)?;
    Ok(PointCloud::new(io::points_from_csv(&text)?)?)
}

fn load_config(path: Option<&Path>) -> Result<TrainConfig, CmdError> {
    let mut config = match path {
        Some(p) => serde_json::from_str(&read_file(p)?)
            .map_err(|e| CmdError::new(2, format!("config {}: {e}", p.display())))?,
        None => {
            let mut c = TrainConfig::new(1e-3, 1000);
            c.momentum = 0.9;
            c
        }
    };
    if let Ok(seed) = std::env::var("COCHAIN_SEED") {
        config.seed = seed
            .parse()
            .map_err(|e| CmdError::new(2, format!("COCHAIN_SEED: {e}")))?;
    }
    config.validate()?;
    Ok(config)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecOp {
    Boundary,
    Coboundary,
    Hodge,
    GraphLaplacian,
}

/// Emit a discrete operator of a complex in coordinate text format.
#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct DecArgs {
    /// Complex file (JSON, or OFF triangle mesh)
    #[arg(long)]
    pub input: PathBuf,
    /// Operator to assemble
    #[arg(long, value_enum)]
    pub op: DecOp,
    /// Degree k (ignored by graph-laplacian)
    #[arg(long, default_value_t = 0)]
    pub k: usize,
    /// Use the A - D sign convention for the graph Laplacian
    #[arg(long, default_value_t = false)]
    pub paper_sign: bool,
    /// Output operator file
    #[arg(long)]
    pub output: PathBuf,
}

pub fn cmd_dec(args: &DecArgs) -> CmdResult {
    let complex = load_complex(&args.input)?;
    let operator = match args.op {
        DecOp::Boundary => dec::boundary_matrix::<f64>(&complex, args.k)?,
        DecOp::Coboundary => dec::coboundary_matrix::<f64>(&complex, args.k)?,
        DecOp::Hodge => dec::hodge_laplacian::<f64>(&complex, args.k)?,
        DecOp::GraphLaplacian => {
            let sign = if args.paper_sign {
                LaplacianSign::AdjacencyMinusDegree
            } else {
                LaplacianSign::DegreeMinusAdjacency
            };
            dec::graph_laplacian::<f64>(&complex, sign)?
        }
    };
    write_output(&args.output, &io::operator_to_text(&operator))?;
    let manifest = RunManifest::new(
        ManifestArgs::Dec(args.clone()),
        0,
        vec![args.output.clone()],
    );
    manifest
        .write(&args.output)
        .map_err(|e| CmdError::new(2, format!("manifest: {e}")))?;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodArg {
    Mds,
    Tsne,
    Ph,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MdsKernelArg {
    Squared,
    Absolute,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AffinityKernelArg {
    StudentT,
    Gaussian,
}

/// Embed a point cloud by minimizing a structure-preserving loss.
#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct EmbedArgs {
    /// Point cloud CSV (headerless, one point per row)
    #[arg(long)]
    pub input: PathBuf,
    /// Structure to preserve
    #[arg(long, value_enum)]
    pub method: MethodArg,
    /// Target dimension
    #[arg(long)]
    pub dim: usize,
    /// Training configuration JSON; defaults to lr 1e-3, momentum 0.9,
    /// 1000 iterations
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Pointwise penalty for mds
    #[arg(long, value_enum, default_value = "squared")]
    pub mds_kernel: MdsKernelArg,
    /// Perplexity for tsne
    #[arg(long, default_value_t = 5.0)]
    pub perplexity: f64,
    /// Low-dimensional kernel for tsne
    #[arg(long, value_enum, default_value = "student-t")]
    pub tsne_kernel: AffinityKernelArg,
    /// Homology degrees for ph, comma separated
    #[arg(long, default_value = "0,1", value_delimiter = ',')]
    pub ph_dims: Vec<usize>,
    /// Output embedding CSV; the loss history and metadata go next to it
    #[arg(long)]
    pub output: PathBuf,
    /// Fully resolved configuration (config file plus any COCHAIN_SEED
    /// override), recorded so a rerun replays it exactly
    #[arg(skip)]
    #[serde(default)]
    pub resolved_config: Option<TrainConfig>,
}

#[derive(Serialize)]
struct EmbedMeta<'a> {
    method: &'static str,
    seed: u64,
    final_loss: f64,
    config: &'a TrainConfig,
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path
        .file_stem()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "output".into());
    name.push_str(suffix);
    path.with_file_name(name)
}

pub fn cmd_embed(args: &EmbedArgs) -> CmdResult {
    if args.dim == 0 {
        return Err(CmdError::new(2, "--dim must be at least 1"));
    }
    let cloud = load_points(&args.input)?;
    let config = match &args.resolved_config {
        Some(c) => c.clone(),
        None => load_config(args.config.as_deref())?,
    };
    let method = match args.method {
        MethodArg::Mds => EmbedMethod::Mds {
            kernel: match args.mds_kernel {
                MdsKernelArg::Squared => MdsKernel::Squared,
                MdsKernelArg::Absolute => MdsKernel::Absolute,
            },
        },
        MethodArg::Tsne => EmbedMethod::Tsne {
            perplexity: args.perplexity,
            kernel: match args.tsne_kernel {
                AffinityKernelArg::StudentT => AffinityKernel::StudentT,
                AffinityKernelArg::Gaussian => AffinityKernel::Gaussian,
            },
        },
        MethodArg::Ph => EmbedMethod::Ph {
            dims: args.ph_dims.clone(),
        },
    };
    let result = embed(&cloud, &method, args.dim, &config)?;

    let loss_path = sibling(&args.output, ".loss.csv");
    let meta_path = sibling(&args.output, ".meta.json");
    write_output(&args.output, &io::points_to_csv(&result.embedding))?;
    write_output(&loss_path, &io::loss_history_to_csv(&result.loss_history))?;
    let meta = EmbedMeta {
        method: result.method,
        seed: config.seed,
        final_loss: *result.loss_history.last().expect("non-empty history"),
        config: &config,
    };
    let mut meta_text = serde_json::to_string_pretty(&meta).expect("serializable");
    meta_text.push('\n');
    write_output(&meta_path, &meta_text)?;

    let mut recorded = args.clone();
    recorded.resolved_config = Some(config.clone());
    let manifest = RunManifest::new(
        ManifestArgs::Embed(recorded),
        config.seed,
        vec![args.output.clone(), loss_path, meta_path],
    );
    manifest
        .write(&args.output)
        .map_err(|e| CmdError::new(2, format!("manifest: {e}")))?;
    Ok(())
}

/// Compute the Vietoris-Rips persistence diagram of a point cloud.
#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct PhArgs {
    /// Point cloud CSV (headerless, one point per row)
    #[arg(long)]
    pub input: PathBuf,
    /// Largest simplex dimension in the filtration (at most 2)
    #[arg(long, default_value_t = 2)]
    pub max_dim: usize,
    /// Radius cutoff; "inf" for no cutoff
    #[arg(long, default_value_t = f64::INFINITY)]
    #[serde(with = "radius_serde")]
    pub max_radius: f64,
    /// Output diagram CSV
    #[arg(long)]
    pub output: PathBuf,
}

/// JSON has no Infinity literal, so the radius travels as a string.
mod radius_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &f64, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&value.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<f64, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

pub fn cmd_ph(args: &PhArgs) -> CmdResult {
    let cloud = load_points(&args.input)?;
    let distances = distance_matrix(&cloud, Metric::Euclidean);
    let filtration = vietoris_rips(distances.values(), args.max_dim, args.max_radius)?;
    let structure = compute_persistence(&filtration);
    write_output(&args.output, &io::diagram_to_csv(&structure.diagram))?;
    let manifest = RunManifest::new(ManifestArgs::Ph(args.clone()), 0, vec![args.output.clone()]);
    manifest
        .write(&args.output)
        .map_err(|e| CmdError::new(2, format!("manifest: {e}")))?;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhiArg {
    Identity,
    Relu,
    Tanh,
    Sigmoid,
}

impl From<PhiArg> for Activation {
    fn from(phi: PhiArg) -> Self {
        match phi {
            PhiArg::Identity => Activation::Identity,
            PhiArg::Relu => Activation::Relu,
            PhiArg::Tanh => Activation::Tanh,
            PhiArg::Sigmoid => Activation::Sigmoid,
        }
    }
}

/// Train the layers of an expression on a complex.
#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct TrainArgs {
    /// Complex file (JSON, or OFF triangle mesh)
    #[arg(long)]
    pub complex: PathBuf,
    /// Cochain bindings `name=file.json`, repeatable
    #[arg(long = "cochain", value_name = "NAME=FILE")]
    pub cochains: Vec<String>,
    /// Expression to train, e.g. "d1(TN[d0](x)) = L2(g)"
    #[arg(long)]
    pub expr: String,
    /// Non-linearity applied by every TN layer
    #[arg(long, value_enum, default_value = "identity")]
    pub phi: PhiArg,
    /// Output channel count of every TN layer (defaults to the input
    /// channel count)
    #[arg(long)]
    pub out_channels: Option<usize>,
    /// Training configuration JSON
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output weights JSON; the loss history goes next to it
    #[arg(long)]
    pub output: PathBuf,
    /// Fully resolved configuration recorded so a rerun replays it exactly
    #[arg(skip)]
    #[serde(default)]
    pub resolved_config: Option<TrainConfig>,
}

#[derive(Serialize)]
struct WeightsFile {
    weights: Vec<Vec<Vec<f64>>>,
    final_loss: f64,
}

pub fn cmd_train(args: &TrainArgs) -> CmdResult {
    let complex = load_complex(&args.complex)?;
    let mut inputs: HashMap<String, Cochain<f64>> = HashMap::new();
    for binding in &args.cochains {
        let (name, path) = binding
            .split_once('=')
            .ok_or_else(|| CmdError::new(2, format!("--cochain needs NAME=FILE, got '{binding}'")))?;
        let cochain = io::cochain_from_json(&read_file(Path::new(path))?, &complex)?;
        inputs.insert(name.to_string(), cochain);
    }
    let config = match &args.resolved_config {
        Some(c) => c.clone(),
        None => load_config(args.config.as_deref())?,
    };

    // expression problems, from the grammar to a mismatched degree chain,
    // all exit with code 5
    let as_expr_error = |message: String| CmdError::new(5, message);
    let parsed = expr::parse_expression(&args.expr).map_err(as_expr_error)?;
    let lhs = expr::resolve_lhs(
        &parsed.lhs,
        &complex,
        &inputs,
        args.phi.into(),
        args.out_channels,
    )
    .map_err(as_expr_error)?;
    let tree = match &parsed.rhs {
        Some(rhs) => {
            let target = expr::evaluate_rhs(rhs, &complex, &inputs).map_err(as_expr_error)?;
            ExpressionNode::residual(target, lhs)
        }
        None => lhs,
    };
    let expression = build_expression(tree).map_err(|e| match e {
        Error::ChainDegree(msg) => CmdError::new(5, format!("expression degree mismatch: {msg}")),
        other => CmdError::from(other),
    })?;

    let result = train_expression(&expression, &inputs, &config)?;

    let weights: Vec<Vec<Vec<f64>>> = result
        .weights
        .iter()
        .map(|w| w.rows().into_iter().map(|r| r.to_vec()).collect())
        .collect();
    let file = WeightsFile {
        weights,
        final_loss: *result.loss_history.last().expect("non-empty history"),
    };
    let mut text = serde_json::to_string_pretty(&file).expect("serializable");
    text.push('\n');
    write_output(&args.output, &text)?;
    let loss_path = sibling(&args.output, ".loss.csv");
    write_output(&loss_path, &io::loss_history_to_csv(&result.loss_history))?;

    let mut recorded = args.clone();
    recorded.resolved_config = Some(config.clone());
    let manifest = RunManifest::new(
        ManifestArgs::Train(recorded),
        config.seed,
        vec![args.output.clone(), loss_path],
    );
    manifest
        .write(&args.output)
        .map_err(|e| CmdError::new(2, format!("manifest: {e}")))?;
    Ok(())
}

/// Re-run a command exactly as recorded in a manifest.
#[derive(Clone, Debug, Args)]
pub struct RerunArgs {
    /// Manifest file written by a previous run
    pub manifest: PathBuf,
}

pub fn cmd_rerun(args: &RerunArgs) -> CmdResult {
    let manifest = RunManifest::read(&args.manifest).map_err(|m| CmdError::new(2, m))?;
    match &manifest.args {
        ManifestArgs::Dec(a) => cmd_dec(a),
        ManifestArgs::Embed(a) => cmd_embed(a),
        ManifestArgs::Ph(a) => cmd_ph(a),
        ManifestArgs::Train(a) => cmd_train(a),
    }
}
