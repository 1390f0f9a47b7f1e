//! Subcommand dispatch.

use std::path::PathBuf;

use annealed_ising::graph_models::{self, build_weights, DegreeSequence, WeightKind, WeightSequence};
use annealed_ising::samplers::{self, ChainConfig, SampleBatch};
use annealed_ising::stats::{self, VarianceEstimate};
use annealed_ising::verify::{self, Suite};
use annealed_ising::{cm12, cm2, exact, grg, Error};
use rayon::prelude::*;

use crate::output::{emit, json_object, Cell, Table};
use crate::{ChainArgs, Cli, CliError, Command, ModelArgs, ModelKind, SuiteArg};

const DEFAULT_GRG_N: usize = 1000;

/// Maps a library error onto an exit code, naming the operation and inputs.
fn fail(operation: &str, inputs: &str, err: Error) -> CliError {
    let message = format!("{operation} ({inputs}): {err}");
    match err {
        Error::InvalidParameter(_) | Error::Parse { .. } | Error::CapExceeded { .. } | Error::Io(_) => {
            CliError::usage(message)
        }
        Error::NoConvergence { .. } | Error::InsufficientEss { .. } => CliError::numeric(message),
    }
}

impl ModelArgs {
    fn model(&self) -> Result<ModelKind, CliError> {
        self.model.ok_or_else(|| CliError::usage("--model is required"))
    }

    fn inputs(&self, beta: f64, b: f64) -> String {
        let mut s = format!("beta={beta}, B={b}");
        if let Some(p) = self.p {
            s.push_str(&format!(", p={p}"));
        }
        if let Some(n) = self.n {
            s.push_str(&format!(", N={n}"));
        }
        s
    }

    fn n(&self) -> Result<usize, CliError> {
        match self.n {
            Some(0) => Err(CliError::usage("--N must be positive")),
            Some(n) => Ok(n),
            None => Err(CliError::usage("--N is required")),
        }
    }

    fn p(&self) -> Result<f64, CliError> {
        let p = self.p.ok_or_else(|| CliError::usage("--p is required for cm12"))?;
        if !(p > 0.0 && p < 1.0) {
            return Err(CliError::usage(format!("--p {p} must lie in (0,1)")));
        }
        Ok(p)
    }

    fn weight_kind(&self) -> Result<WeightKind, CliError> {
        match (&self.weights_file, self.tau, self.w) {
            (Some(path), None, None) => Ok(WeightKind::FromFile(path.clone())),
            (None, Some(tau), None) => Ok(WeightKind::PowerLaw { tau, w_min: self.w_min }),
            (None, None, Some(w)) => Ok(WeightKind::Constant { w }),
            (None, None, None) => Err(CliError::usage("GRG weights need one of --w, --tau, --weights-file")),
            _ => Err(CliError::usage("give only one of --w, --tau, --weights-file")),
        }
    }

    fn weights_with_default(&self, default_n: Option<usize>) -> Result<WeightSequence, CliError> {
        let kind = self.weight_kind()?;
        let n = match (&kind, self.n, default_n) {
            (WeightKind::FromFile(_), _, _) => 0,
            (_, Some(n), _) => n,
            (_, None, Some(d)) => d,
            (_, None, None) => return Err(CliError::usage("--N is required")),
        };
        build_weights(&kind, n).map_err(|e| fail("weights", &format!("N={n}"), e))
    }

    fn weights(&self) -> Result<WeightSequence, CliError> {
        self.weights_with_default(None)
    }

    fn degrees(&self, model: ModelKind) -> Result<DegreeSequence, CliError> {
        let n = self.n()?;
        let result = match model {
            ModelKind::Cm2 => DegreeSequence::two_regular(n),
            ModelKind::Cm12 => DegreeSequence::cm12(self.p()?, n),
            ModelKind::Grg => unreachable!("GRG has no degree sequence"),
        };
        result.map_err(|e| fail("degree sequence", &format!("N={n}"), e))
    }

    fn check_point(beta: f64, b: f64) -> Result<(), CliError> {
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(CliError::usage(format!("--beta {beta} must be finite and non-negative")));
        }
        if !b.is_finite() {
            return Err(CliError::usage(format!("--B {b} must be finite")));
        }
        Ok(())
    }
}

impl ChainArgs {
    fn config(&self, seed: u64) -> Result<ChainConfig, CliError> {
        if self.steps == 0 || self.thin == 0 {
            return Err(CliError::usage("--steps and --thin must be positive"));
        }
        let mut cfg = ChainConfig::new(seed, self.steps)
            .with_burn_in(self.burn_in)
            .with_thin(self.thin);
        if let Some(s) = self.switches {
            cfg = cfg.with_switches(s);
        }
        Ok(cfg)
    }
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let seed = cli.seed;
    let table = match &cli.command {
        Command::Weights(args) => weights_table(args)?,
        Command::Generate(args) => generate_table(args, seed)?,
        Command::Exact(args) => exact_table(args)?,
        Command::Thermo { model, args } => {
            if args.model.is_some_and(|m| m != *model) {
                return Err(CliError::usage("--model disagrees with the thermo model"));
            }
            ModelArgs::check_point(args.beta, args.b)?;
            let mut table = Table::new(thermo_columns(*model));
            table.push(thermo_row(*model, args, args.beta, args.b)?);
            table
        }
        Command::Sample { args, chain } => sample_table(args, chain, seed, cli.out.as_ref())?,
        Command::Clt { args, chain } => clt_table(args, chain, seed)?,
        Command::Sweep { args, grid } => sweep_table(args, grid)?,
        Command::Verify { suite } => return verify_suite(*suite, cli),
    };
    write_table(&table, cli)
}

fn write_table(table: &Table, cli: &Cli) -> Result<(), CliError> {
    emit(&table.render(cli.format, cli.seed), cli.out.as_deref())
        .map_err(|e| CliError::numeric(format!("writing output: {e}")))
}

fn weights_table(args: &ModelArgs) -> Result<Table, CliError> {
    let w = args.weights()?;
    let mut table = Table::new(vec!["index", "weight"]);
    for (i, &x) in w.weights().iter().enumerate() {
        table.push(vec![i.into(), x.into()]);
    }
    Ok(table)
}

fn generate_table(args: &ModelArgs, seed: u64) -> Result<Table, CliError> {
    let model = args.model()?;
    if model == ModelKind::Grg {
        let g = graph_models::sample_grg_seeded(&args.weights()?, seed);
        let mut table = Table::new(vec!["i", "j"]);
        for &(i, j) in &g.edges {
            table.push(vec![i.into(), j.into()]);
        }
        return Ok(table);
    }
    let degrees = args.degrees(model)?;
    let d = graph_models::sample_cm_seeded(&degrees, seed)
        .map_err(|e| fail("sample_cm", &format!("N={}", degrees.len()), e))?;
    let mut table = Table::new(vec!["kind", "length"]);
    for &l in &d.lines {
        table.push(vec!["line".into(), l.into()]);
    }
    for &t in &d.tori {
        table.push(vec!["torus".into(), t.into()]);
    }
    Ok(table)
}

fn exact_table(args: &ModelArgs) -> Result<Table, CliError> {
    let model = args.model()?;
    let (beta, b) = (args.beta, args.b);
    ModelArgs::check_point(beta, b)?;
    let inputs = args.inputs(beta, b);
    let mut table = Table::new(vec!["model", "N", "beta", "B", "ln_z", "pressure", "formula_pressure"]);
    match model {
        ModelKind::Grg => {
            let w = args.weights()?;
            let ln_z = exact::exact_annealed_z_grg(&w, beta, b)
                .map_err(|e| fail("exact_annealed_z_grg", &inputs, e))?
                .ln();
            let n = w.len() as f64;
            table.push(vec![
                "grg".into(),
                w.len().into(),
                beta.into(),
                b.into(),
                ln_z.into(),
                (ln_z / n).into(),
                Cell::Text(String::new()),
            ]);
        }
        ModelKind::Cm2 | ModelKind::Cm12 => {
            let degrees = args.degrees(model)?;
            let n = degrees.len();
            let ln_z = exact::exact_annealed_z_cm(&degrees, beta, b)
                .map_err(|e| fail("exact_annealed_z_cm", &inputs, e))?
                .ln();
            let formula = match model {
                ModelKind::Cm2 => cm2::pressure_cm2_finite(n, beta, b),
                _ => cm12::pressure_cm12_finite_counts(degrees.n1(), degrees.n2(), beta, b),
            }
            .map_err(|e| fail("finite pressure", &inputs, e))?;
            let name = if model == ModelKind::Cm2 { "cm2" } else { "cm12" };
            table.push(vec![
                name.into(),
                n.into(),
                beta.into(),
                b.into(),
                ln_z.into(),
                (ln_z / n as f64).into(),
                formula.into(),
            ]);
        }
    }
    Ok(table)
}

fn thermo_columns(model: ModelKind) -> Vec<&'static str> {
    match model {
        ModelKind::Grg => vec![
            "beta", "B", "N", "z_star", "pressure", "magnetization", "susceptibility", "non_unique",
        ],
        ModelKind::Cm2 => vec!["beta", "B", "pressure", "magnetization", "susceptibility"],
        ModelKind::Cm12 => vec!["beta", "B", "p", "pressure", "magnetization", "sigma2"],
    }
}

fn thermo_row(model: ModelKind, args: &ModelArgs, beta: f64, b: f64) -> Result<Vec<Cell>, CliError> {
    let inputs = args.inputs(beta, b);
    match model {
        ModelKind::Grg => {
            let w = args.weights_with_default(Some(DEFAULT_GRG_N))?;
            let m = grg::AnnealedGrgModel::new(w, beta, b).map_err(|e| fail("annealed GRG model", &inputs, e))?;
            let t = grg::thermo_point(&m).map_err(|e| fail("thermo_point", &inputs, e))?;
            Ok(vec![
                beta.into(),
                b.into(),
                t.n.into(),
                t.z_star.into(),
                t.pressure.into(),
                t.magnetization.into(),
                t.susceptibility.into(),
                t.non_unique.into(),
            ])
        }
        ModelKind::Cm2 => {
            let psi = cm2::pressure_cm2(beta, b).map_err(|e| fail("pressure_cm2", &inputs, e))?;
            let m = cm2::magnetization_cm2(beta, b).map_err(|e| fail("magnetization_cm2", &inputs, e))?;
            let chi = cm2::susceptibility_cm2(beta, b).map_err(|e| fail("susceptibility_cm2", &inputs, e))?;
            Ok(vec![beta.into(), b.into(), psi.into(), m.into(), chi.into()])
        }
        ModelKind::Cm12 => {
            let p = args.p()?;
            let psi = cm12::pressure_cm12(beta, b, p).map_err(|e| fail("pressure_cm12", &inputs, e))?;
            let m = cm12::magnetization_cm12(beta, b, p).map_err(|e| fail("magnetization_cm12", &inputs, e))?;
            let s2 = cm12::sigma2_variance(beta, b, p).map_err(|e| fail("sigma2_variance", &inputs, e))?;
            Ok(vec![beta.into(), b.into(), p.into(), psi.into(), m.into(), s2.into()])
        }
    }
}

fn run_chain(args: &ModelArgs, chain: &ChainArgs, seed: u64) -> Result<(ModelKind, SampleBatch), CliError> {
    let model = args.model()?;
    let (beta, b) = (args.beta, args.b);
    ModelArgs::check_point(beta, b)?;
    let cfg = chain.config(seed)?;
    let inputs = args.inputs(beta, b);
    let batch = match model {
        ModelKind::Grg => samplers::glauber_annealed_grg(&args.weights()?, beta, b, &cfg)
            .map_err(|e| fail("glauber_annealed_grg", &inputs, e))?,
        _ => samplers::joint_mcmc_cm(&args.degrees(model)?, beta, b, &cfg)
            .map_err(|e| fail("joint_mcmc_cm", &inputs, e))?,
    };
    Ok((model, batch))
}

fn model_name(model: ModelKind) -> &'static str {
    match model {
        ModelKind::Grg => "grg",
        ModelKind::Cm2 => "cm2",
        ModelKind::Cm12 => "cm12",
    }
}

fn sidecar_path(out: &std::path::Path) -> PathBuf {
    let mut s = out.as_os_str().to_os_string();
    s.push(".meta.json");
    PathBuf::from(s)
}

fn sample_table(args: &ModelArgs, chain: &ChainArgs, seed: u64, out: Option<&PathBuf>) -> Result<Table, CliError> {
    let (model, batch) = run_chain(args, chain, seed)?;
    let mut table = Table::new(vec!["step", "S_N"]);
    for (i, &s) in batch.values.iter().enumerate() {
        table.push(vec![i.into(), (s as i64).into()]);
    }
    if let Some(out) = out {
        let est = stats::estimate_moments(&batch).ok();
        let num = |f: fn(&VarianceEstimate) -> f64| est.as_ref().map_or(Cell::Num(f64::NAN), |e| Cell::Num(f(e)));
        let meta = json_object(&[
            ("model", model_name(model).into()),
            ("N", batch.n.into()),
            ("beta", args.beta.into()),
            ("B", args.b.into()),
            ("seed", Cell::Int(seed as i64)),
            ("samples", batch.len().into()),
            ("burn_in", chain.burn_in.into()),
            ("thin", chain.thin.into()),
            ("mean_m", num(|e| e.mean)),
            ("variance", num(|e| e.variance)),
            ("variance_se", num(|e| e.variance_se)),
            ("ess", num(|e| e.ess)),
            ("switch_acceptance", Cell::Num(batch.switch_acceptance.unwrap_or(f64::NAN))),
            ("approximate_couplings", batch.approximate.into()),
            ("version", env!("CARGO_PKG_VERSION").into()),
        ]);
        emit(&meta, Some(&sidecar_path(out))).map_err(|e| CliError::numeric(format!("writing sidecar: {e}")))?;
    }
    Ok(table)
}

fn predicted_variance(model: ModelKind, args: &ModelArgs, n: usize) -> Result<f64, CliError> {
    let (beta, b) = (args.beta, args.b);
    let inputs = args.inputs(beta, b);
    match model {
        ModelKind::Grg => {
            let w = args.weights_with_default(Some(n))?;
            let m = grg::AnnealedGrgModel::new(w, beta, b).map_err(|e| fail("annealed GRG model", &inputs, e))?;
            grg::annealed_susceptibility(&m).map_err(|e| fail("annealed_susceptibility", &inputs, e))
        }
        ModelKind::Cm2 => cm2::susceptibility_cm2(beta, b).map_err(|e| fail("susceptibility_cm2", &inputs, e)),
        ModelKind::Cm12 => cm12::sigma2_variance(beta, b, args.p()?).map_err(|e| fail("sigma2_variance", &inputs, e)),
    }
}

fn clt_table(args: &ModelArgs, chain: &ChainArgs, seed: u64) -> Result<Table, CliError> {
    let (model, batch) = run_chain(args, chain, seed)?;
    let inputs = args.inputs(args.beta, args.b);
    let predicted = predicted_variance(model, args, batch.n)?;
    let est = stats::estimate_moments(&batch).map_err(|e| fail("estimate_moments", &inputs, e))?;
    let rep = stats::clt_diagnostics(&batch.values, batch.n, Some(predicted), Some(2.0))
        .map_err(|e| fail("clt_diagnostics", &inputs, e))?;
    let mut table = Table::new(vec![
        "model",
        "N",
        "beta",
        "B",
        "predicted_variance",
        "sample_variance",
        "variance_se",
        "ess",
        "skewness",
        "skewness_se",
        "excess_kurtosis",
        "kurtosis_se",
        "ks_distance",
        "ks_critical",
        "passed",
    ]);
    table.push(vec![
        model_name(model).into(),
        batch.n.into(),
        args.beta.into(),
        args.b.into(),
        predicted.into(),
        est.variance.into(),
        est.variance_se.into(),
        est.ess.into(),
        rep.skewness.into(),
        rep.skewness_se.into(),
        rep.excess_kurtosis.into(),
        rep.kurtosis_se.into(),
        rep.ks_distance.into(),
        rep.ks_critical.into(),
        rep.passed().into(),
    ]);
    Ok(table)
}

/// Inclusive linear spacing `a:b:n`.
fn parse_range(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::usage(format!("grid range `{spec}` must look like a:b:n"));
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let a: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let b: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if n == 0 || !a.is_finite() || !b.is_finite() {
        return Err(bad());
    }
    if n == 1 {
        return Ok(vec![a]);
    }
    Ok((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect())
}

/// `beta=a:b:n,B=a:b:n`; a missing axis is held at the `--beta`/`--B` value.
pub fn parse_grid(grid: &str, beta: f64, b: f64) -> Result<Vec<(f64, f64)>, CliError> {
    let mut betas = vec![beta];
    let mut fields = vec![b];
    for part in grid.split(',').filter(|s| !s.trim().is_empty()) {
        let (key, range) = part
            .split_once('=')
            .ok_or_else(|| CliError::usage(format!("grid entry `{part}` needs key=a:b:n")))?;
        match key.trim() {
            "beta" => betas = parse_range(range)?,
            "B" => fields = parse_range(range)?,
            other => return Err(CliError::usage(format!("unknown grid axis `{other}`"))),
        }
    }
    Ok(betas.iter().flat_map(|&x| fields.iter().map(move |&y| (x, y))).collect())
}

fn sweep_table(args: &ModelArgs, grid: &str) -> Result<Table, CliError> {
    let model = args.model()?;
    let points = parse_grid(grid, args.beta, args.b)?;
    for &(beta, b) in &points {
        ModelArgs::check_point(beta, b)?;
    }
    let rows: Vec<Vec<Cell>> = points
        .par_iter()
        .map(|&(beta, b)| thermo_row(model, args, beta, b))
        .collect::<Result<_, _>>()?;
    let mut table = Table::new(thermo_columns(model));
    for row in rows {
        table.push(row);
    }
    Ok(table)
}

fn verify_suite(suite: SuiteArg, cli: &Cli) -> Result<(), CliError> {
    let suite = match suite {
        SuiteArg::Small => Suite::Small,
        SuiteArg::Full => Suite::Full,
    };
    let outcomes = verify::run_suite(suite);
    let mut table = Table::new(vec!["check", "passed", "detail"]);
    for o in &outcomes {
        eprintln!("{} {} ({:.2} s): {}", if o.passed { "PASS" } else { "FAIL" }, o.name, o.seconds, o.detail);
        table.push(vec![o.name.into(), o.passed.into(), o.detail.clone().into()]);
    }
    write_table(&table, cli)?;
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    if failed > 0 {
        return Err(CliError::numeric(format!("{failed} verification check(s) failed")));
    }
    Ok(())
}
