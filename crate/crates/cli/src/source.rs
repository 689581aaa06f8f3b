//! Turning command-line model sources into finite models.

use std::fs;
use std::path::Path;

use depord::dist_core::{from_samples, read_samples_csv, DiscreteMarginal, GridDocument, DEFAULT_MAX_ATOMS};
use depord::models::{
    bernoulli_to_model, error_shape, gaussian_discretize, BernoulliParams, ErrorShape, GaussianSpec, MonteCarlo,
};
use depord::ConditionalModel;
use serde::Deserialize;

use crate::CliError;

/// Discretisation settings shared by every source.
#[derive(Debug, Clone, Copy)]
pub struct Discretization {
    pub cells: Option<usize>,
    pub levels: Option<usize>,
    pub mc_samples: Option<usize>,
    pub seed: u64,
}

const GAUSSIAN_DEFAULT: usize = 50;
const SAMPLE_CELLS_DEFAULT: usize = 10;

fn numbers(s: &str, what: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Input(format!("{what}: cannot read '{t}' as a number")))
        })
        .collect()
}

fn read(path: &str) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {path}: {e}")))
}

/// `P,Q,ALPHA,BETA` or `P,ALPHA,BETA`.
pub fn parse_bernoulli(s: &str) -> Result<BernoulliParams, CliError> {
    let v = numbers(s, "bernoulli")?;
    Ok(match v[..] {
        [p, q, alpha, beta] => BernoulliParams::new(p, q, alpha, beta)?,
        [p, alpha, beta] => BernoulliParams::from_conditionals(p, alpha, beta)?,
        _ => {
            return Err(CliError::Input(
                "bernoulli expects P,Q,ALPHA,BETA or P,ALPHA,BETA".into(),
            ))
        }
    })
}

/// Gaussian families: `bivariate:RHO`, `equicorrelated:P,RHO`,
/// `independent:P,RHO`, `gaussian:FILE` or a bare JSON file.
pub fn parse_gaussian(s: &str) -> Result<GaussianSpec, CliError> {
    let (kind, rest) = s.split_once(':').unwrap_or(("gaussian", s));
    let spec = match kind {
        "bivariate" => match numbers(rest, kind)?[..] {
            [rho] => GaussianSpec::bivariate(rho)?,
            _ => return Err(CliError::Input("bivariate expects RHO".into())),
        },
        "equicorrelated" | "independent" => match numbers(rest, kind)?[..] {
            [p, rho] if p >= 1.0 && p.fract() == 0.0 => {
                if kind == "equicorrelated" {
                    GaussianSpec::equicorrelated(p as usize, rho)?
                } else {
                    GaussianSpec::independent_predictors(p as usize, rho)?
                }
            }
            _ => return Err(CliError::Input(format!("{kind} expects P,RHO with integer P >= 1"))),
        },
        "gaussian" => {
            let spec: GaussianSpec = serde_json::from_str(&read(rest)?)
                .map_err(|e| CliError::Input(format!("{rest}: not a Gaussian spec: {e}")))?;
            spec.validate()?;
            spec
        }
        _ => return Err(CliError::Input(format!("unknown Gaussian source '{s}'"))),
    };
    Ok(spec)
}

/// A model from any supported source.
pub fn load_model(s: &str, d: &Discretization) -> Result<ConditionalModel, CliError> {
    if let Some(rest) = s.strip_prefix("bernoulli:") {
        return Ok(bernoulli_to_model(&parse_bernoulli(rest)?)?);
    }
    let family = s.split_once(':').map(|(k, _)| k);
    if matches!(
        family,
        Some("bivariate" | "equicorrelated" | "independent" | "gaussian")
    ) {
        let spec = parse_gaussian(s)?;
        let mc = d.mc_samples.map(|samples| MonteCarlo { samples, seed: d.seed });
        let cells = d.cells.unwrap_or(GAUSSIAN_DEFAULT);
        return Ok(gaussian_discretize(
            &spec,
            cells,
            d.levels.unwrap_or(GAUSSIAN_DEFAULT),
            mc,
        )?);
    }
    let ext = Path::new(s).extension().and_then(|e| e.to_str()).unwrap_or("");
    match ext {
        "json" => {
            let doc: GridDocument = serde_json::from_str(&read(s)?)
                .map_err(|e| CliError::Input(format!("{s}: not a grid document: {e}")))?;
            Ok(ConditionalModel::from_document(&doc)?)
        }
        "csv" => {
            let file = fs::File::open(s).map_err(|e| CliError::Input(format!("cannot read {s}: {e}")))?;
            let rows = read_samples_csv(file)?;
            let cells = d.cells.unwrap_or(SAMPLE_CELLS_DEFAULT);
            Ok(from_samples(&rows, cells, d.levels.unwrap_or(DEFAULT_MAX_ATOMS))?)
        }
        _ => Err(CliError::Input(format!(
            "cannot tell what '{s}' is: use a .json grid, a .csv sample or a family such as bernoulli:P,Q,A,B"
        ))),
    }
}

#[derive(Deserialize)]
struct MarginalDocument {
    atoms: Vec<f64>,
    probs: Vec<f64>,
}

/// `normal[:N]`, `uniform[:N]`, `exp[:N]` or a JSON file `{atoms, probs}`.
pub fn load_marginal(s: &str, default_atoms: usize) -> Result<DiscreteMarginal, CliError> {
    let (kind, n) = match s.split_once(':') {
        Some((k, n)) => (
            k,
            n.parse::<usize>()
                .map_err(|_| CliError::Input(format!("bad atom count in '{s}'")))?,
        ),
        None => (s, default_atoms),
    };
    let shape = match kind {
        "normal" => ErrorShape::Normal,
        "uniform" => ErrorShape::Uniform,
        "exp" | "exponential" => ErrorShape::ShiftedExponential,
        _ if s.ends_with(".json") => {
            let doc: MarginalDocument =
                serde_json::from_str(&read(s)?).map_err(|e| CliError::Input(format!("{s}: not a law: {e}")))?;
            return Ok(DiscreteMarginal::new(doc.atoms, doc.probs)?);
        }
        _ => return Err(CliError::Input(format!("unknown law '{s}'"))),
    };
    Ok(error_shape(shape, n)?)
}
