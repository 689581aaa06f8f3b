//! Subcommand implementations. Each returns the full text written to stdout.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use depord::ccx::Criterion;
use depord::dist_core::{uniformize, GridDocument};
use depord::measures::{
    all_measures, chatterjee_xi, integrated_r2_nu, lambda_phi, rearranged_measure, xi_phi, ConcordanceKind, PhiSpec,
};
use depord::models::{
    additive_error_verify, bernoulli_ccx, bernoulli_classify, bernoulli_to_model, gaussian_ccx, gaussian_discretize,
    gaussian_r2, BernoulliClass, BernoulliParams, GaussianSpec, MonteCarlo,
};
use depord::oracle::ccx_bruteforce;
use depord::rearrange::RearrangementCurve;
use depord::reduce::{ccx_via_concordance, reduce_to_si, verify_si};
use depord::{ccx_compare, ComparisonResult, ConditionalModel, DiscreteMarginal, Verdict, Witness};
use serde::Serialize;

use crate::source::{load_marginal, load_model, parse_bernoulli, parse_gaussian, Discretization};
use crate::{CliError, Command, Common, Engine, Format, MeasureName};

const ADDITIVE_LEVELS: usize = 60;

pub fn run(cmd: Command) -> Result<String, CliError> {
    match cmd {
        Command::Compare { a, b, engine, common } => compare(&a, &b, engine, &common),
        Command::Measure {
            model,
            measure,
            phi,
            uniformize,
            common,
        } => measure_cmd(&model, measure, &phi, uniformize, &common),
        Command::Reduce { model, common } => reduce(&model, &common),
        Command::Bernoulli { a, b, common } => bernoulli(&a, b.as_deref(), &common),
        Command::Gaussian {
            a,
            b,
            discretize,
            common,
        } => gaussian(&a, &b, discretize, &common),
        Command::SimulateAdditive { f, eps, sigmas, common } => simulate_additive(&f, &eps, &sigmas, &common),
        Command::Plotdata { model, common } => plotdata(&model, &common),
    }
}

fn discretization(c: &Common) -> Discretization {
    Discretization {
        cells: c.grid,
        levels: c.levels,
        mc_samples: c.mc_samples,
        seed: c.seed,
    }
}

fn check_tol(c: &Common) -> Result<(), CliError> {
    if c.tol.is_finite() && c.tol >= 0.0 {
        Ok(())
    } else {
        Err(CliError::Input(format!(
            "--tol {} must be finite and nonnegative",
            c.tol
        )))
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialise");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct Input {
    source: String,
    model: GridDocument,
}

impl Input {
    fn new(source: &str, m: &ConditionalModel) -> Self {
        Self {
            source: source.to_string(),
            model: m.to_document(),
        }
    }
}

#[derive(Serialize)]
struct LevelRow {
    v: f64,
    schur_verdict: Verdict,
    max_excess: f64,
    max_deficit: f64,
    /// The larger one-sided gap between the integrated rearrangements.
    max_violation: f64,
}

#[derive(Serialize)]
struct CompareReport {
    verdict: Verdict,
    tol: f64,
    criterion: Criterion,
    witness: Option<Witness>,
    counter_witness: Option<Witness>,
    reason: Option<String>,
    per_level: Vec<LevelRow>,
    engines: BTreeMap<&'static str, Verdict>,
    engines_agree: bool,
    inputs: BTreeMap<&'static str, Input>,
}

fn level_rows(r: &ComparisonResult) -> Vec<LevelRow> {
    r.per_level
        .iter()
        .map(|l| LevelRow {
            v: l.level,
            schur_verdict: l.verdict,
            max_excess: l.max_excess,
            max_deficit: l.max_deficit,
            max_violation: l.max_excess.max(l.max_deficit),
        })
        .collect()
}

fn comparison_csv(r: &ComparisonResult) -> String {
    let mut out = String::from("v,verdict,max_excess,max_deficit\n");
    for l in &r.per_level {
        writeln!(out, "{},{},{},{}", l.level, l.verdict, l.max_excess, l.max_deficit).unwrap();
    }
    writeln!(out, "all,{},,", r.verdict).unwrap();
    out
}

fn compare(a: &str, b: &str, engine: Engine, c: &Common) -> Result<String, CliError> {
    check_tol(c)?;
    let d = discretization(c);
    let (ma, mb) = (load_model(a, &d)?, load_model(b, &d)?);
    let mut runs: Vec<(&'static str, ComparisonResult)> = Vec::new();
    if matches!(engine, Engine::Schur | Engine::All) {
        runs.push(("schur", ccx_compare(&ma, &mb, c.tol)));
    }
    if matches!(engine, Engine::Concordance | Engine::All) {
        runs.push(("concordance", ccx_via_concordance(&ma, &mb, c.tol)));
    }
    if matches!(engine, Engine::Brute | Engine::All) {
        runs.push(("bruteforce", ccx_bruteforce(&ma, &mb, c.tol)));
    }
    let primary = runs[0].1.clone();
    if c.format == Some(Format::Csv) {
        return Ok(comparison_csv(&primary));
    }
    let engines: BTreeMap<_, _> = runs.iter().map(|(k, r)| (*k, r.verdict)).collect();
    let report = CompareReport {
        verdict: primary.verdict,
        tol: c.tol,
        criterion: primary.criterion,
        witness: primary.witness,
        counter_witness: primary.counter_witness,
        reason: primary.reason.clone(),
        per_level: level_rows(&primary),
        engines_agree: runs.iter().all(|(_, r)| r.verdict == primary.verdict),
        engines,
        inputs: BTreeMap::from([("a", Input::new(a, &ma)), ("b", Input::new(b, &mb))]),
    };
    Ok(to_json(&report))
}

fn measure_cmd(
    source: &str,
    which: MeasureName,
    phi: &str,
    spread: Option<usize>,
    c: &Common,
) -> Result<String, CliError> {
    let phi: PhiSpec = phi.parse()?;
    let mut m = load_model(source, &discretization(c))?;
    if let Some(n) = spread {
        m = uniformize(&m, n)?;
    }
    let values: Vec<(&str, f64)> = match which {
        MeasureName::All => all_measures(&m, &phi)?,
        MeasureName::Xi => vec![("xi", chatterjee_xi(&m)?)],
        MeasureName::XiPhi => vec![("xi_phi", xi_phi(&m, &phi)?)],
        MeasureName::LambdaPhi => vec![("lambda_phi", lambda_phi(&m, &phi)?)],
        MeasureName::Nu => vec![("nu", integrated_r2_nu(&m)?)],
        MeasureName::RhoRearranged => vec![("rho_rearranged", rearranged_measure(&m, ConcordanceKind::SpearmanRho)?)],
        MeasureName::TauRearranged => vec![("tau_rearranged", rearranged_measure(&m, ConcordanceKind::KendallTau)?)],
        MeasureName::GammaRearranged => {
            vec![("gamma_rearranged", rearranged_measure(&m, ConcordanceKind::GiniGamma)?)]
        }
    };
    if c.format == Some(Format::Csv) {
        let mut out = String::from("measure,value\n");
        for (k, v) in &values {
            writeln!(out, "{k},{v}").unwrap();
        }
        return Ok(out);
    }
    #[derive(Serialize)]
    struct Report<'a> {
        phi: String,
        measures: BTreeMap<&'a str, f64>,
        input: Input,
    }
    Ok(to_json(&Report {
        phi: phi.to_string(),
        measures: values.into_iter().collect(),
        input: Input::new(source, &m),
    }))
}

fn reduce(source: &str, c: &Common) -> Result<String, CliError> {
    let m = load_model(source, &discretization(c))?;
    let grid = reduce_to_si(&m);
    let mass = grid.mass_matrix();
    if c.format == Some(Format::Csv) {
        let mut out = String::from("y");
        for u in &grid.u_breaks()[1..] {
            write!(out, ",{u}").unwrap();
        }
        out.push('\n');
        for (y, row) in grid.y().atoms().iter().zip(&mass) {
            write!(out, "{y}").unwrap();
            for v in row {
                write!(out, ",{v}").unwrap();
            }
            out.push('\n');
        }
        return Ok(out);
    }
    #[derive(Serialize)]
    struct Report<'a> {
        y_atoms: &'a [f64],
        u_breaks: &'a [f64],
        g: &'a [Vec<f64>],
        mass_matrix: Vec<Vec<f64>>,
        is_si: bool,
        input: Input,
    }
    Ok(to_json(&Report {
        y_atoms: grid.y().atoms(),
        u_breaks: grid.u_breaks(),
        g: grid.g(),
        mass_matrix: mass.clone(),
        is_si: verify_si(&grid, c.tol),
        input: Input::new(source, &m),
    }))
}

fn bernoulli(a: &str, b: Option<&str>, c: &Common) -> Result<String, CliError> {
    check_tol(c)?;
    #[derive(Serialize)]
    struct Side {
        params: BernoulliParams,
        classes: Vec<BernoulliClass>,
    }
    #[derive(Serialize)]
    struct Report {
        a: Side,
        b: Option<Side>,
        closed_form: Option<ComparisonResult>,
        engine_verdict: Option<Verdict>,
    }
    let side = |p: BernoulliParams| Side {
        params: p,
        classes: bernoulli_classify(&p, c.tol),
    };
    let pa = parse_bernoulli(a)?;
    let pb = b.map(parse_bernoulli).transpose()?;
    let (closed, engine) = match pb {
        Some(pb) => {
            let closed = bernoulli_ccx(&pa, &pb, c.tol)?;
            let engine = ccx_compare(&bernoulli_to_model(&pa)?, &bernoulli_to_model(&pb)?, c.tol).verdict;
            (Some(closed), Some(engine))
        }
        None => (None, None),
    };
    if c.format == Some(Format::Csv) {
        return match &closed {
            Some(r) => Ok(comparison_csv(r)),
            None => Err(CliError::Input("csv output needs two parameter sets".into())),
        };
    }
    Ok(to_json(&Report {
        a: side(pa),
        b: pb.map(side),
        closed_form: closed,
        engine_verdict: engine,
    }))
}

fn gaussian(a: &str, b: &str, discretize: bool, c: &Common) -> Result<String, CliError> {
    check_tol(c)?;
    let (sa, sb) = (parse_gaussian(a)?, parse_gaussian(b)?);
    let closed = gaussian_ccx(&sa, &sb, c.tol)?;
    #[derive(Serialize)]
    struct Discretized {
        cells: usize,
        levels: usize,
        verdict: Verdict,
        xi_a: f64,
        xi_b: f64,
    }
    let discretized = if discretize {
        let (cells, levels) = (c.grid.unwrap_or(50), c.levels.unwrap_or(50));
        let mc = c.mc_samples.map(|samples| MonteCarlo { samples, seed: c.seed });
        let ma = gaussian_discretize(&sa, cells, levels, mc)?;
        let mb = gaussian_discretize(&sb, cells, levels, mc)?;
        Some(Discretized {
            cells,
            levels,
            verdict: ccx_compare(&ma, &mb, c.tol).verdict,
            xi_a: chatterjee_xi(&ma)?,
            xi_b: chatterjee_xi(&mb)?,
        })
    } else {
        None
    };
    if c.format == Some(Format::Csv) {
        return Ok(comparison_csv(&closed));
    }
    #[derive(Serialize)]
    struct Report {
        a: GaussianSpec,
        b: GaussianSpec,
        r2_a: f64,
        r2_b: f64,
        closed_form: ComparisonResult,
        discretized: Option<Discretized>,
    }
    Ok(to_json(&Report {
        r2_a: gaussian_r2(&sa)?,
        r2_b: gaussian_r2(&sb)?,
        a: sa,
        b: sb,
        closed_form: closed,
        discretized,
    }))
}

fn simulate_additive(f: &str, eps: &str, sigmas: &[f64], c: &Common) -> Result<String, CliError> {
    check_tol(c)?;
    let lf = load_marginal(f, 41)?;
    let le = load_marginal(eps, 41)?;
    let n_levels = c.levels.unwrap_or(ADDITIVE_LEVELS);
    let steps = additive_error_verify(&lf, &le, sigmas, n_levels, c.tol)?;
    if c.format == Some(Format::Csv) {
        let mut out = String::from("sigma,sigma_next,verdict\n");
        for s in &steps {
            writeln!(out, "{},{},{}", s.sigma, s.sigma_next, s.result.verdict).unwrap();
        }
        return Ok(out);
    }
    #[derive(Serialize)]
    struct Report<'a> {
        f: &'a DiscreteMarginal,
        eps: &'a DiscreteMarginal,
        n_levels: usize,
        all_less_eq: bool,
        steps: &'a [depord::models::AdditiveStep],
    }
    Ok(to_json(&Report {
        f: &lf,
        eps: &le,
        n_levels,
        all_less_eq: steps.iter().all(|s| s.result.verdict.is_le()),
        steps: &steps,
    }))
}

fn plotdata(source: &str, c: &Common) -> Result<String, CliError> {
    let m = load_model(source, &discretization(c))?;
    let levels = &m.y().cdf_values()[..m.n_levels() - 1];
    let curves: Vec<(f64, RearrangementCurve)> = levels
        .iter()
        .enumerate()
        .map(|(j, &v)| (v, RearrangementCurve::new(&m.eta(j))))
        .collect();
    if c.format == Some(Format::Json) {
        #[derive(Serialize)]
        struct Curve<'a> {
            level: f64,
            x: &'a [f64],
            integral: &'a [f64],
        }
        #[derive(Serialize)]
        struct Report<'a> {
            curves: Vec<Curve<'a>>,
            input: Input,
        }
        return Ok(to_json(&Report {
            curves: curves
                .iter()
                .map(|(v, cv)| Curve {
                    level: *v,
                    x: cv.knots(),
                    integral: cv.values(),
                })
                .collect(),
            input: Input::new(source, &m),
        }));
    }
    let mut out = String::from("level,x,integral\n");
    for (v, cv) in &curves {
        for (x, y) in cv.knots().iter().zip(cv.values()) {
            writeln!(out, "{v},{x},{y}").unwrap();
        }
    }
    Ok(out)
}
