use std::fs;
use std::path::{Path, PathBuf};

use phonodist::analysis::{
    compensation_row, grouped_loglog_regression, loglog_regression, CompensationReport,
    LanguageInput, LanguageRow, RegressionFit,
};
use phonodist::dirichlet::{
    order_statistic_summary, reconstruct_from_inventory, AlphaScalingLaw,
    DirichletSpec, InventorySize, OrderStatSummary,
};
use phonodist::entropy::{
    cwj_entropy, plugin_entropy, relative_entropy, relative_entropy_value, CountVector,
};
use phonodist::features::{build_feature_table, BuildOptions, FeatureTable};
use phonodist::formats::{
    fmt_num, parse_feature_table, parse_fits, parse_frequency_table, parse_grouped_fits,
    parse_incidence, parse_lexicon, write_feature_table,
};
use phonodist::maxent::{solve, MaxEntSolution, SolveOptions};
use phonodist::Error;
use rayon::prelude::*;
use serde_json::Value;

use crate::output::{cell, document, named_numbers, num, object, opt_num, tsv_preamble};
use crate::{
    CliError, EntropyArgs, FeaturesArgs, FitAlphaArgs, Format, LawArgs, MaxentArgs, PredictArgs,
    ReconstructArgs, RegressArgs, ReportArgs, SolverArgs,
};

type CliResult<T> = Result<T, CliError>;

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn in_file<T>(path: &Path, r: phonodist::Result<T>) -> CliResult<T> {
    r.map_err(|e| CliError::lib(path.display(), e))
}

fn path_value(p: &Path) -> Value {
    Value::from(p.display().to_string())
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn inventory(n: u64) -> CliResult<InventorySize> {
    let n = usize::try_from(n).map_err(|_| CliError::Usage(format!("inventory size {n} is too large")))?;
    Ok(InventorySize::new(n)?)
}

fn law(args: &LawArgs) -> CliResult<AlphaScalingLaw> {
    Ok(AlphaScalingLaw::new(args.coeff_a, args.exponent_b)?)
}

fn law_config(args: &LawArgs) -> Value {
    object([("coeff_a", num(args.coeff_a)), ("exponent_b", num(args.exponent_b))])
}

fn solver_options(args: &SolverArgs) -> SolveOptions {
    SolveOptions {
        tolerance: args.tolerance,
        max_iterations: args.max_iterations,
    }
}

fn solver_config(args: &SolverArgs) -> Value {
    object([
        ("max_iterations", Value::from(args.max_iterations)),
        ("tolerance", num(args.tolerance)),
    ])
}

/// Observed rank probabilities padded with zeros to `n` ranks.
fn observed_ranks(counts: &CountVector, n: usize) -> Vec<f64> {
    let mut p = counts.ranked_probabilities();
    p.resize(n.max(p.len()), 0.0);
    p
}

fn rank_rows(summary: &OrderStatSummary, observed: Option<&[f64]>) -> Value {
    Value::Array(
        summary
            .ranks
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let (lo, hi) = r.ci.unzip();
                let mut fields = vec![
                    ("rank", Value::from(r.rank)),
                    ("mean", num(r.mean)),
                    ("sd", num(r.sd)),
                    ("ci_low", opt_num(lo)),
                    ("ci_high", opt_num(hi)),
                ];
                if let Some(obs) = observed {
                    fields.push(("observed", opt_num(obs.get(i).copied())));
                }
                object(fields)
            })
            .collect(),
    )
}

fn fit_value(fit: &RegressionFit) -> Value {
    let law = fit.scaling_law().ok();
    object([
        ("slope", num(fit.slope)),
        ("intercept", num(fit.intercept)),
        ("se_slope", num(fit.se_slope)),
        ("se_intercept", num(fit.se_intercept)),
        ("t_slope", num(fit.t_slope)),
        ("p_slope", num(fit.p_slope)),
        ("n_points", Value::from(fit.n_points)),
        ("residual_sd", num(fit.residual_sd)),
        ("r_squared", num(fit.r_squared)),
        (
            "law",
            law.map_or(Value::Null, |l| {
                object([
                    ("coeff_a", num(l.coeff_a)),
                    ("exponent_b", num(l.exponent_b)),
                    ("se_a", opt_num(l.se_a)),
                    ("se_b", opt_num(l.se_b)),
                ])
            }),
        ),
    ])
}

fn row_fields(row: &LanguageRow) -> Vec<(&'static str, Value)> {
    vec![
        ("language", Value::from(row.name.clone())),
        ("n", Value::from(row.n)),
        ("H_plugin", num(row.h_plugin)),
        ("H_cwj", num(row.h_cwj)),
        ("H_max", num(row.h_max)),
        ("alpha_hat", opt_num(row.alpha_hat)),
        ("relative_entropy", num(row.relative_entropy)),
        ("relative_entropy_clamped", Value::from(row.clamped)),
    ]
}

pub fn fit_alpha(args: &FitAlphaArgs) -> CliResult<String> {
    let counts = in_file(&args.table, parse_frequency_table(&read(&args.table)?))?;
    let language = args.language.clone().unwrap_or_else(|| stem(&args.table));
    let input = LanguageInput {
        name: language.clone(),
        n: args.n.map(inventory).transpose()?,
        counts,
    };
    let row = in_file(&args.table, compensation_row(&input, None))?;
    let alpha = row.alpha_hat.ok_or_else(|| {
        CliError::lib(
            &language,
            Error::Infeasible(format!(
                "coverage-adjusted entropy {} is not below ln n = {} for n = {}",
                fmt_num(row.h_cwj),
                fmt_num(row.h_max),
                row.n
            )),
        )
    })?;
    let spec = DirichletSpec::from_raw(row.n, alpha)?;
    let summary = order_statistic_summary(&spec, args.level)?;
    let observed = observed_ranks(&input.counts, row.n);
    let config = object([
        ("input", path_value(&args.table)),
        ("level", num(args.level)),
        ("n", args.n.map_or(Value::Null, Value::from)),
    ]);
    let mut body = row_fields(&row);
    body.extend([
        ("support_size", Value::from(input.counts.observed_support())),
        ("total", Value::from(input.counts.total())),
        ("expected_entropy", num(spec.expected_entropy())),
        ("band_coverage", opt_num(summary.band_coverage(&observed))),
        ("ranks", rank_rows(&summary, Some(&observed))),
    ]);
    Ok(document("fit-alpha", config, body))
}

pub fn predict_alpha(args: &PredictArgs) -> CliResult<String> {
    let n = inventory(args.n)?;
    let alpha = predict_alpha_checked(n, &args.law)?;
    let spec = DirichletSpec::new(n, alpha);
    let config = object([("law", law_config(&args.law)), ("n", Value::from(args.n))]);
    Ok(document(
        "predict-alpha",
        config,
        vec![
            ("n", Value::from(args.n)),
            ("alpha", num(alpha.get())),
            ("expected_entropy", num(spec.expected_entropy())),
            ("relative_expected_entropy", num(spec.relative_expected_entropy())),
        ],
    ))
}

fn predict_alpha_checked(
    n: InventorySize,
    args: &LawArgs,
) -> CliResult<phonodist::dirichlet::Concentration> {
    Ok(phonodist::dirichlet::predict_alpha(n, &law(args)?)?)
}

pub fn reconstruct(args: &ReconstructArgs) -> CliResult<String> {
    let n = inventory(args.n)?;
    let alpha = predict_alpha_checked(n, &args.law)?;
    let summary = reconstruct_from_inventory(n, &law(&args.law)?, args.level)?;
    match args.format {
        Format::Json => {
            let config = object([
                ("law", law_config(&args.law)),
                ("level", num(args.level)),
                ("n", Value::from(args.n)),
            ]);
            Ok(document(
                "reconstruct",
                config,
                vec![("alpha", num(alpha.get())), ("ranks", rank_rows(&summary, None))],
            ))
        }
        Format::Tsv => {
            let mut out = tsv_preamble(
                "reconstruct",
                &[
                    ("n", args.n.to_string()),
                    ("coeff_a", fmt_num(args.law.coeff_a)),
                    ("exponent_b", fmt_num(args.law.exponent_b)),
                    ("alpha", fmt_num(alpha.get())),
                    ("level", fmt_num(args.level)),
                ],
            );
            out.push_str("rank\tmean\tsd\tci_low\tci_high\n");
            for r in &summary.ranks {
                let (lo, hi) = r.ci.unzip();
                out.push_str(&format!(
                    "{}\t{}\t{}\t{}\t{}\n",
                    r.rank,
                    fmt_num(r.mean),
                    fmt_num(r.sd),
                    cell(lo),
                    cell(hi)
                ));
            }
            Ok(out)
        }
    }
}

pub fn estimate_entropy(args: &EntropyArgs) -> CliResult<String> {
    let counts = in_file(&args.table, parse_frequency_table(&read(&args.table)?))?;
    let support = counts.observed_support();
    let n = match args.n {
        Some(n) => inventory(n)?,
        None => InventorySize::new(support)?,
    };
    if n.get() < support {
        return Err(CliError::lib(
            args.table.display(),
            Error::Domain(format!(
                "declared inventory {n} is smaller than the {support} observed phonemes"
            )),
        ));
    }
    let plugin = plugin_entropy(&counts);
    let cwj = cwj_entropy(&counts);
    let rel_plugin = relative_entropy(&plugin, n);
    let rel_cwj = relative_entropy(&cwj, n);
    let config = object([
        ("input", path_value(&args.table)),
        ("n", args.n.map_or(Value::Null, Value::from)),
    ]);
    let ln2 = std::f64::consts::LN_2;
    Ok(document(
        "estimate-entropy",
        config,
        vec![
            ("language", Value::from(args.language.clone().unwrap_or_else(|| stem(&args.table)))),
            ("n", Value::from(n.get())),
            ("support_size", Value::from(support)),
            ("total", Value::from(counts.total())),
            ("H_plugin", num(plugin.value)),
            ("H_cwj", num(cwj.value)),
            ("H_plugin_bits", num(plugin.value / ln2)),
            ("H_cwj_bits", num(cwj.value / ln2)),
            ("H_max", num(n.max_entropy())),
            ("relative_entropy_plugin", num(rel_plugin.value)),
            ("relative_entropy_plugin_clamped", Value::from(rel_plugin.clamped)),
            ("relative_entropy_cwj", num(rel_cwj.value)),
            ("relative_entropy_cwj_clamped", Value::from(rel_cwj.clamped)),
        ],
    ))
}

pub fn features(args: &FeaturesArgs) -> CliResult<String> {
    let lex = in_file(&args.lexicon, parse_lexicon(&read(&args.lexicon)?))?;
    let incidence = in_file(&args.incidence, parse_incidence(&read(&args.incidence)?))?;
    let opts = BuildOptions {
        coverage_floor: args.coverage_floor,
    };
    let table = build_feature_table(&lex, &incidence, &opts)?;
    if !table.excluded.is_empty() {
        eprintln!("excluded phonemes:");
        for e in &table.excluded {
            eprintln!("  {}\t{}", e.phoneme, e.reason.name());
        }
    }
    let mut out = tsv_preamble(
        "features",
        &[
            ("lexicon", args.lexicon.display().to_string()),
            ("incidence", args.incidence.display().to_string()),
            ("coverage_floor", fmt_num(args.coverage_floor)),
        ],
    );
    out.push_str(&write_feature_table(&table));
    Ok(out)
}

fn plugin_of(probs: &[f64]) -> f64 {
    -probs.iter().filter(|&&p| p > 0.0).map(|&p| p * p.ln()).sum::<f64>()
}

fn solve_table(path: &Path, table: &FeatureTable, opts: &SolveOptions) -> CliResult<MaxEntSolution> {
    let problem = in_file(path, table.to_problem())?;
    in_file(path, solve(&problem, opts))
}

fn maxent_fields(table: &FeatureTable, sol: &MaxEntSolution, n: InventorySize) -> Vec<(&'static str, Value)> {
    let h_obs = plugin_of(table.observed());
    let constraints = phonodist::features::constraint_expectations(table);
    vec![
        ("lambda0", num(sol.lambda0)),
        ("lambdas", named_numbers(table.feature_names(), &sol.lambdas)),
        ("probs", named_numbers(&sol.support, &sol.probs)),
        ("observed", named_numbers(table.phonemes(), table.observed())),
        ("constraints", named_numbers(&constraints.names, &constraints.values)),
        ("residuals", named_numbers(table.feature_names(), &sol.residuals)),
        ("entropy_guessed", num(sol.entropy)),
        ("entropy_observed", num(h_obs)),
        ("relative_entropy_guessed", num(relative_entropy_value(sol.entropy, n).value)),
        ("relative_entropy_observed", num(relative_entropy_value(h_obs, n).value)),
        ("dual_value", num(sol.dual_value)),
        ("iterations", Value::from(sol.iterations)),
        ("rank", Value::from(sol.rank)),
        ("warnings", Value::from(sol.warnings.clone())),
    ]
}

pub fn maxent(args: &MaxentArgs) -> CliResult<String> {
    let table = in_file(&args.table, parse_feature_table(&read(&args.table)?))?;
    let sol = solve_table(&args.table, &table, &solver_options(&args.solver))?;
    let n = match args.n {
        Some(n) => inventory(n)?,
        None => InventorySize::new(table.len())?,
    };
    if n.get() < table.len() {
        return Err(CliError::Usage(format!(
            "--n {n} is smaller than the {} phonemes in the table",
            table.len()
        )));
    }
    let config = object([
        ("input", path_value(&args.table)),
        ("n", args.n.map_or(Value::Null, Value::from)),
        ("solver", solver_config(&args.solver)),
    ]);
    let mut body = vec![("n", Value::from(n.get()))];
    body.extend(maxent_fields(&table, &sol, n));
    Ok(document("maxent", config, body))
}

pub fn regress(args: &RegressArgs) -> CliResult<String> {
    let text = read(&args.fits)?;
    let points = in_file(&args.fits, parse_fits(&text))?;
    let fit = in_file(&args.fits, loglog_regression(&points))?;
    let config = object([
        ("group_column", args.group_column.clone().map_or(Value::Null, Value::from)),
        ("input", path_value(&args.fits)),
    ]);
    let mut body = vec![("fit", fit_value(&fit))];
    if let Some(col) = &args.group_column {
        let grouped = in_file(&args.fits, parse_grouped_fits(&text, col))?;
        let g = in_file(&args.fits, grouped_loglog_regression(&grouped))?;
        let coefficients = g
            .fit
            .coefficients
            .iter()
            .map(|c| {
                object([
                    ("name", Value::from(c.name.clone())),
                    ("estimate", num(c.estimate)),
                    ("se", num(c.se)),
                    ("t", num(c.t)),
                    ("p", num(c.p)),
                ])
            })
            .collect();
        body.push((
            "grouped",
            object([
                ("groups", Value::from(g.groups.clone())),
                ("coefficients", Value::Array(coefficients)),
                ("df", Value::from(g.fit.df)),
                ("n_points", Value::from(g.fit.n_points)),
                ("residual_sd", num(g.fit.residual_sd)),
                ("r_squared", num(g.fit.r_squared)),
            ]),
        ));
    }
    Ok(document("regress", config, body))
}

struct LanguageResult {
    row: LanguageRow,
    detail: Vec<(&'static str, Value)>,
}

fn report_language(
    table_path: &Path,
    features_path: Option<&PathBuf>,
    args: &ReportArgs,
) -> CliResult<LanguageResult> {
    let counts = in_file(table_path, parse_frequency_table(&read(table_path)?))?;
    let input = LanguageInput {
        name: stem(table_path),
        counts,
        n: None,
    };
    let guessed = match features_path {
        Some(p) => {
            let table = in_file(p, parse_feature_table(&read(p)?))?;
            let sol = solve_table(p, &table, &solver_options(&args.solver))?;
            Some((table, sol))
        }
        None => None,
    };
    let row = in_file(table_path, compensation_row(&input, guessed.as_ref().map(|g| &g.1)))?;
    let mut detail = Vec::new();
    if args.format == Format::Json {
        let n = InventorySize::new(row.n)?;
        let observed = observed_ranks(&input.counts, row.n);
        let fitted = match row.alpha_hat {
            Some(a) => Some(order_statistic_summary(&DirichletSpec::from_raw(row.n, a)?, args.level)?),
            None => None,
        };
        let reconstructed = reconstruct_from_inventory(n, &law(&args.law)?, args.level)?;
        detail.push(("observed_ranks", Value::from(observed.iter().map(|&p| num(p)).collect::<Vec<_>>())));
        detail.push((
            "fitted",
            fitted.as_ref().map_or(Value::Null, |s| {
                object([
                    ("band_coverage", opt_num(s.band_coverage(&observed))),
                    ("ranks", rank_rows(s, None)),
                ])
            }),
        ));
        detail.push((
            "reconstructed",
            object([
                ("band_coverage", opt_num(reconstructed.band_coverage(&observed))),
                ("ranks", rank_rows(&reconstructed, None)),
            ]),
        ));
        detail.push((
            "maxent",
            guessed.as_ref().map_or(Value::Null, |(t, s)| object(maxent_fields(t, s, n))),
        ));
    }
    Ok(LanguageResult { row, detail })
}

pub fn report(args: &ReportArgs) -> CliResult<String> {
    if !args.features.is_empty() && args.features.len() != args.tables.len() {
        return Err(CliError::Usage(format!(
            "{} feature tables given for {} frequency tables",
            args.features.len(),
            args.tables.len()
        )));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {} worker threads: {e}", args.jobs)))?;
    let results: Vec<CliResult<LanguageResult>> = pool.install(|| {
        args.tables
            .par_iter()
            .enumerate()
            .map(|(i, t)| report_language(t, args.features.get(i), args))
            .collect()
    });
    let results = results.into_iter().collect::<CliResult<Vec<_>>>()?;
    let (rows, details): (Vec<_>, Vec<_>) = results.into_iter().map(|r| (r.row, r.detail)).unzip();
    let report = CompensationReport::from_rows(rows);

    match args.format {
        Format::Json => {
            let languages = report
                .rows
                .iter()
                .zip(details)
                .map(|(row, detail)| {
                    let mut fields = row_fields(row);
                    fields.push(("guessed_entropy", opt_num(row.guessed_entropy)));
                    fields.push(("guessed_relative_entropy", opt_num(row.guessed_relative_entropy)));
                    fields.extend(detail);
                    object(fields)
                })
                .collect();
            let config = object([
                ("features", Value::from(args.features.iter().map(|p| path_value(p)).collect::<Vec<_>>())),
                ("inputs", Value::from(args.tables.iter().map(|p| path_value(p)).collect::<Vec<_>>())),
                ("law", law_config(&args.law)),
                ("level", num(args.level)),
                ("solver", solver_config(&args.solver)),
            ]);
            Ok(document(
                "report",
                config,
                vec![
                    ("languages", Value::Array(languages)),
                    ("regression", report.regression.as_ref().map_or(Value::Null, fit_value)),
                ],
            ))
        }
        Format::Tsv => {
            let mut out = tsv_preamble(
                "report",
                &[
                    ("level", fmt_num(args.level)),
                    ("coeff_a", fmt_num(args.law.coeff_a)),
                    ("exponent_b", fmt_num(args.law.exponent_b)),
                ],
            );
            out.push_str(
                "language\tn\tH_plugin\tH_cwj\tH_max\talpha_hat\trelative_entropy\tclamped\tguessed_entropy\tguessed_relative_entropy\n",
            );
            for r in &report.rows {
                out.push_str(&format!(
                    "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                    r.name,
                    r.n,
                    fmt_num(r.h_plugin),
                    fmt_num(r.h_cwj),
                    fmt_num(r.h_max),
                    cell(r.alpha_hat),
                    fmt_num(r.relative_entropy),
                    r.clamped,
                    cell(r.guessed_entropy),
                    cell(r.guessed_relative_entropy),
                ));
            }
            if let Some(fit) = &report.regression {
                out.push_str(&format!("# slope\t{}\n# intercept\t{}\n", fmt_num(fit.slope), fmt_num(fit.intercept)));
            }
            Ok(out)
        }
    }
}
