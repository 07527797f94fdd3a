use arborlab::analytic::{
    c_alpha_with_tol, classify_alpha, leading_constant, leading_constant_with_tol, log_amplitude, log_case_constant,
    AlphaCase, DEFAULT_QUAD_TOL,
};
use arborlab::counting::{partition_function, stream_partition_functions, ValueMode, DEFAULT_SCALED_CAP};
use arborlab::local_limit::{brute_force_report, empirical_ball_mass, exact_ball_mass};
use arborlab::sampler::sample_mu;
use arborlab::{CountTable, Mode, RngStream, Tree};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{config_error, load_table, CliError, Format, MethodArg, NRange, RunConfig};
use crate::output::{big_uint, config_line, float_cell, rational, value_cell, with_config, Csv};

fn table_for(config: &RunConfig, n_max: usize) -> Result<CountTable, CliError> {
    load_table(n_max, config.mode, config.cache.as_deref())
}

pub fn count(config: &RunConfig) -> Result<String, CliError> {
    let sizes = config.sizes();
    let table = table_for(config, *sizes.last().expect("sizes resolved"))?;
    let rows: Vec<(usize, Vec<Value>, Vec<Value>)> = sizes
        .iter()
        .map(|&n| match table.as_exact() {
            Some(tri) => (n, tri.l_row(n).iter().map(big_uint).collect(), tri.e_row(n).iter().map(big_uint).collect()),
            None => (
                n,
                (1..=n).map(|h| json!(table.l_scaled(n, h))).collect(),
                (1..=n).map(|h| json!(table.e_scaled(n, h))).collect(),
            ),
        })
        .collect();
    let scaled = config.mode == Mode::Scaled;
    match config.format {
        Format::Json => {
            let rows: Vec<Value> = rows
                .into_iter()
                .map(|(n, l, e)| json!({ "N": n, "L": l, "E": e }))
                .collect();
            Ok(with_config(config, json!({ "scaled_by_4_pow_minus_N": scaled, "rows": rows })))
        }
        Format::Csv => {
            let mut csv = Csv::new(config, &["N", "h", "L", "E"]);
            for (n, l, e) in rows {
                for h in 0..n {
                    csv.row(&[n.to_string(), (h + 1).to_string(), value_cell(&l[h]), value_cell(&e[h])]);
                }
            }
            Ok(csv.finish())
        }
    }
}

pub fn zn(config: &RunConfig) -> Result<String, CliError> {
    let sizes = config.sizes();
    let n_max = *sizes.last().expect("sizes resolved");
    let exact_values = config.mode == Mode::Exact && config.integer_alpha().is_some();
    let (z, z_scaled): (Vec<Value>, Vec<f64>) = if n_max > crate::config::CLI_MATERIALIZE_CAP {
        if config.mode == Mode::Exact {
            return Err(config_error("exact mode is limited to the exact table cap"));
        }
        let pv = stream_partition_functions(n_max, &[config.alpha], DEFAULT_SCALED_CAP)?.remove(0);
        sizes.iter().map(|&n| (json!(pv.value(n)), pv.scaled(n))).unzip()
    } else {
        let table = table_for(config, n_max)?;
        let mode = if exact_values { ValueMode::ExactRational } else { ValueMode::Float };
        let pv = partition_function(n_max, config.alpha, &table, mode)?;
        sizes
            .iter()
            .map(|&n| match pv.exact(n) {
                Some(q) => (rational(q), pv.scaled(n)),
                None => (json!(pv.value(n)), pv.scaled(n)),
            })
            .unzip()
    };
    match config.format {
        Format::Json => Ok(with_config(
            config,
            json!({ "alpha": config.alpha, "N": sizes, "Z": z, "Z_scaled": z_scaled, "exact": exact_values }),
        )),
        Format::Csv => {
            let mut csv = Csv::new(config, &["N", "Z", "Z_scaled"]);
            for ((n, z), s) in sizes.iter().zip(&z).zip(&z_scaled) {
                csv.row(&[n.to_string(), value_cell(z), float_cell(*s)]);
            }
            Ok(csv.finish())
        }
    }
}

pub fn constants(config: &RunConfig) -> Result<String, CliError> {
    let alpha = config.alpha;
    let tol = config.tol.unwrap_or(DEFAULT_QUAD_TOL);
    let body = match classify_alpha(alpha)? {
        AlphaCase::LogCase { n } => {
            let d = log_amplitude(n);
            let (big_c, big_c_exact, note) = if n == 0 {
                let formula = log_case_constant(0);
                (
                    Value::Null,
                    Value::Null,
                    json!(format!(
                        "alpha = 1 has no leading-constant formula; the log-case expression at n = 0 gives {}",
                        formula.exact.unwrap_or_default()
                    )),
                )
            } else {
                let c = log_case_constant(n);
                (json!(c.value), json!(c.exact), Value::Null)
            };
            json!({
                "alpha": alpha,
                "branch": "logcase",
                "n": n,
                "c_alpha": Value::Null,
                "d_n": d.value,
                "d_n_exact": d.exact,
                "C_alpha": big_c,
                "C_alpha_exact": big_c_exact,
                "error_estimate": 0.0,
                "provenance": "formula",
                "note": note,
            })
        }
        AlphaCase::Convergent | AlphaCase::Subtracted { .. } => {
            let c = c_alpha_with_tol(alpha, tol)?;
            let big_c = leading_constant_with_tol(alpha, tol)?;
            json!({
                "alpha": alpha,
                "branch": "generic",
                "c_alpha": c.value,
                "C_alpha": big_c.value,
                "error_estimate": big_c.error_estimate,
                "c_alpha_error_estimate": c.error_estimate,
                "provenance": c.provenance,
            })
        }
    };
    match config.format {
        Format::Json => Ok(with_config(config, body)),
        Format::Csv => {
            let keys = ["alpha", "branch", "c_alpha", "C_alpha", "error_estimate"];
            let mut csv = Csv::new(config, &keys);
            csv.row(&keys.map(|k| value_cell(&body[k])));
            Ok(csv.finish())
        }
    }
}

pub fn sample(config: &RunConfig, count: usize) -> Result<String, CliError> {
    let sizes = match (config.n, config.n_range) {
        (Some(n), _) => vec![n],
        (None, Some(r)) => r.values(),
        (None, None) => unreachable!("resolve requires a size"),
    };
    let table = table_for(config, *sizes.iter().max().expect("sizes resolved"))?;
    let mut rng = RngStream::new(config.seed, config.stream).rng();
    let mut lines = Vec::new();
    let mut csv = Csv::new(config, &["N", "index", "height", "code"]);
    for &n in &sizes {
        for index in 0..count {
            let tree = sample_mu(n, config.alpha, &table, &mut rng)?;
            match config.format {
                Format::Json => lines.push(
                    json!({
                        "N": n,
                        "alpha": config.alpha,
                        "seed": config.seed,
                        "stream": config.stream,
                        "index": index,
                        "height": tree.height(),
                        "code": tree.code(),
                    })
                    .to_string(),
                ),
                Format::Csv => {
                    let code: Vec<String> = tree.code().iter().map(u32::to_string).collect();
                    csv.row(&[n.to_string(), index.to_string(), tree.height().to_string(), code.join(" ")]);
                }
            }
        }
    }
    Ok(match config.format {
        Format::Json => {
            lines.insert(0, config_line(config));
            lines.join("\n")
        }
        Format::Csv => csv.finish(),
    })
}

pub fn parse_tree(text: &str) -> Result<Tree, CliError> {
    let code = text
        .split(',')
        .map(|s| s.trim().parse::<u32>().map_err(|_| config_error(format!("bad tree code entry {s:?}"))))
        .collect::<Result<Vec<u32>, CliError>>()?;
    Tree::decode(&code).map_err(|e| config_error(format!("tree code {text:?}: {e}")))
}

pub fn ball(
    config: &RunConfig,
    t0: &str,
    sweep: Option<&str>,
    method: MethodArg,
    draws: u64,
) -> Result<String, CliError> {
    let t0 = parse_tree(t0)?;
    if let Some(sweep) = sweep {
        return ball_sweep(config, &t0, NRange::parse(sweep)?, method);
    }
    let n = config.n.expect("resolve requires --n");
    if n < t0.size() {
        return Err(config_error(format!("N = {n} is smaller than |T0| = {}", t0.size())));
    }
    let report = match method {
        MethodArg::Dp => exact_ball_mass(&t0, n, config.alpha, &table_for(config, n)?)?,
        MethodArg::Bruteforce => {
            let k = config
                .integer_alpha()
                .ok_or_else(|| config_error("bruteforce needs an integer alpha"))?;
            brute_force_report(&t0, n, k)?
        }
        MethodArg::Empirical => {
            let table = table_for(config, n)?;
            let mut rng = RngStream::new(config.seed, config.stream).rng();
            empirical_ball_mass(&t0, n, config.alpha, draws, &table, &mut rng)?
        }
    };
    match config.format {
        Format::Json => Ok(with_config(config, &report)),
        Format::Csv => {
            let mut csv = Csv::new(config, &["N", "exact_mass", "lambda", "gap"]);
            csv.row(&[
                n.to_string(),
                float_cell(report.exact_mass),
                float_cell(report.lambda_value),
                float_cell(report.gap),
            ]);
            Ok(csv.finish())
        }
    }
}

fn ball_sweep(config: &RunConfig, t0: &Tree, range: NRange, method: MethodArg) -> Result<String, CliError> {
    if method != MethodArg::Dp {
        return Err(config_error("--sweep supports the dp method only"));
    }
    if range.start < t0.size() {
        return Err(config_error(format!(
            "sweep starts at N = {} below |T0| = {}",
            range.start,
            t0.size()
        )));
    }
    let table = table_for(config, range.end)?;
    let reports = range
        .values()
        .par_iter()
        .map(|&n| exact_ball_mass(t0, n, config.alpha, &table))
        .collect::<Result<Vec<_>, _>>()?;
    let mut csv = Csv::new(config, &["N", "exact_mass", "lambda", "gap"]);
    for r in &reports {
        csv.row(&[
            r.n.to_string(),
            float_cell(r.exact_mass),
            float_cell(r.lambda_value),
            float_cell(r.gap),
        ]);
    }
    Ok(csv.finish())
}

pub fn asymptotics(config: &RunConfig) -> Result<String, CliError> {
    let sizes = match (config.n, config.n_range) {
        (_, Some(r)) => r.values(),
        (Some(n), None) => {
            let mut v: Vec<usize> = std::iter::successors(Some(16usize), |k| Some(k * 2)).take_while(|&k| k < n).collect();
            v.push(n);
            v
        }
        (None, None) => unreachable!("resolve supplies a default size"),
    };
    let n_max = *sizes.last().expect("non-empty");
    let pv = stream_partition_functions(n_max, &[config.alpha], DEFAULT_SCALED_CAP)?.remove(0);
    let constant = leading_constant(config.alpha).ok().map(|c| c.value);
    let power = (3.0 - config.alpha) / 2.0;
    let rows: Vec<(usize, f64, Option<f64>)> = sizes
        .iter()
        .map(|&n| {
            let normalized = pv.scaled(n) * (n as f64).powf(power);
            (n, normalized, constant.map(|c| normalized / c))
        })
        .collect();
    match config.format {
        Format::Json => {
            let rows: Vec<Value> = rows
                .iter()
                .map(|(n, v, r)| json!({ "N": n, "normalized": v, "ratio": r }))
                .collect();
            Ok(with_config(
                config,
                json!({ "alpha": config.alpha, "C_alpha": constant, "rows": rows }),
            ))
        }
        Format::Csv => {
            let mut csv = Csv::new(config, &["N", "normalized", "C_alpha", "ratio"]);
            for (n, v, r) in rows {
                csv.row(&[
                    n.to_string(),
                    float_cell(v),
                    constant.map(float_cell).unwrap_or_default(),
                    r.map(float_cell).unwrap_or_default(),
                ]);
            }
            Ok(csv.finish())
        }
    }
}
