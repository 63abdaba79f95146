use std::fs;
use std::io::{self, BufWriter};
use std::path::{Path, PathBuf};

use rand::Rng;
use seedfolio_core::digest::sha256_hex;
use seedfolio_core::harness::report::{
    cross_eval_csv, generalization_csv, json_bytes, online_csv, Manifest, ReportWriter,
};
use seedfolio_core::harness::{
    build_matrix as harness_build, cross_evaluate, generalization_experiment, online_experiment,
    simulate_cross_evaluation, with_jobs, ExperimentConfig, GeneralizationReport, Population,
};
use seedfolio_core::matrix_game::io::{
    load_matrix, matrix_digest, matrix_to_csv_string, EquilibriumDoc,
};
use seedfolio_core::matrix_game::{solve_approx_with, solve_exact, ApproxConfig};
use seedfolio_core::portfolio::build_bundle;
use seedfolio_core::{GameEngine, GppSpec, PayoffMatrix, PolicyKind};

use crate::error::CliError;
use crate::{BuildMatrixArgs, EngineArgs, ExperimentArgs, SolveArgs, SolveMethod, Suite};

fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(CliError::io(format!("creating {}", dir.display())))?;
    }
    fs::write(path, bytes).map_err(CliError::io(format!("writing {}", path.display())))
}

/// `out.csv` -> `out.manifest.json`, next to the output it describes.
fn manifest_path(out: &Path) -> PathBuf {
    out.with_extension("manifest.json")
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

pub fn build_matrix(a: BuildMatrixArgs, jobs: Option<usize>) -> Result<(), CliError> {
    let engine: GameEngine = a.game.parse()?;
    let population = |range: seedfolio_core::harness::SeedRange| match &a.agent_cmd {
        None => Ok(Population::Seeds {
            seeds: range.seeds(),
            simulations: a.sims,
        }),
        Some(cmd) => {
            let argv: Vec<String> = cmd.split_whitespace().map(String::from).collect();
            if argv.is_empty() {
                return Err(CliError::Config("--agent-cmd is empty".into()));
            }
            Ok(Population::Specs(
                range
                    .seeds()
                    .into_iter()
                    .map(|s| {
                        let spec =
                            GppSpec::external(s, argv.clone()).with_timeout_ms(a.move_timeout_ms);
                        (format!("seed{s}"), spec)
                    })
                    .collect(),
            ))
        }
    };
    let black = population(a.seeds_black)?;
    let white = population(a.seeds_white)?;
    let build = with_jobs(jobs, || {
        harness_build(&engine, &black, &white, a.repeats, a.seed)
    })?;
    for w in &build.warnings {
        eprintln!("warning: {w}");
    }
    let csv = matrix_to_csv_string(&build.matrix);
    write(&a.out, csv.as_bytes())?;

    let mut manifest = Manifest::new("build-matrix", a.seed)
        .param("game", engine.name())
        .param("seeds_black", a.seeds_black)
        .param("seeds_white", a.seeds_white)
        .param("sims", a.sims)
        .param("repeats", build.repeats);
    if let Some(cmd) = &a.agent_cmd {
        manifest = manifest.param("agent_cmd", cmd);
    }
    manifest.matrix_digest = Some(matrix_digest(&build.matrix));
    manifest
        .outputs
        .insert(file_name(&a.out), sha256_hex(csv.as_bytes()));
    write(&manifest_path(&a.out), &json_bytes(&manifest)?)?;
    println!(
        "{}x{} matrix of {} games on {} -> {}",
        build.matrix.rows(),
        build.matrix.cols(),
        build.games,
        engine,
        a.out.display()
    );
    Ok(())
}

pub fn solve(a: SolveArgs) -> Result<(), CliError> {
    let m = load_matrix(&a.matrix)?;
    let eq = match a.method {
        SolveMethod::Lp => solve_exact(&m)?,
        SolveMethod::Exp3 => solve_approx_with(
            &m,
            &ApproxConfig {
                iterations: a.iterations,
                seed: a.seed,
                ..Default::default()
            },
        )?,
    };
    let bundle = build_bundle(&m, &eq)?;
    let bytes = json_bytes(&bundle)?;
    write(&a.out, &bytes)?;

    let mut manifest = Manifest::new("solve", a.seed).param(
        "method",
        match a.method {
            SolveMethod::Lp => "lp",
            SolveMethod::Exp3 => "exp3",
        },
    );
    if a.method == SolveMethod::Exp3 {
        manifest = manifest.param("iterations", a.iterations);
    }
    manifest.matrix_digest = Some(bundle.matrix_digest.clone());
    manifest
        .outputs
        .insert(file_name(&a.out), sha256_hex(&bytes));
    if let Some(path) = &a.equilibrium {
        let eq_bytes = json_bytes(&EquilibriumDoc::new(&m, &eq))?;
        write(path, &eq_bytes)?;
        manifest
            .outputs
            .insert(file_name(path), sha256_hex(&eq_bytes));
    }
    write(&manifest_path(&a.out), &json_bytes(&manifest)?)?;
    println!(
        "value {:.6} residual {:.3e} ({}x{}) -> {}",
        bundle.value,
        bundle.residual,
        m.rows(),
        m.cols(),
        a.out.display()
    );
    Ok(())
}

fn load_config(a: &ExperimentArgs) -> Result<ExperimentConfig, CliError> {
    if !a.config.is_file() {
        return Err(CliError::Config(format!(
            "config file {} not found",
            a.config.display()
        )));
    }
    let mut cfg = ExperimentConfig::load(&a.config)?;
    if let Some(o) = &a.opponent {
        cfg.opponent = o.clone();
    }
    if let Some(s) = a.seed {
        cfg.master_seed = s;
    }
    if let Some(o) = &a.out {
        cfg.output_dir = o.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

/// The config's matrix, building it from games when none is given.
fn obtain_matrix(cfg: &ExperimentConfig, out: &mut ReportWriter) -> Result<PayoffMatrix, CliError> {
    if let Some(path) = &cfg.matrix {
        return Ok(load_matrix(path)?);
    }
    let build = harness_build(
        &cfg.engine()?,
        &cfg.black_population(),
        &cfg.white_population(),
        cfg.repeats,
        cfg.master_seed,
    )?;
    for w in &build.warnings {
        eprintln!("warning: {w}");
    }
    out.write("matrix.csv", matrix_to_csv_string(&build.matrix).as_bytes())?;
    Ok(build.matrix)
}

fn suite_name(s: Suite) -> &'static str {
    match s {
        Suite::Generalization => "generalization",
        Suite::Online => "online",
        Suite::CrossEval => "cross-eval",
    }
}

fn policy_line(
    r: &GeneralizationReport,
    k: usize,
    field: fn(&seedfolio_core::harness::GeneralizationRow) -> f64,
) -> String {
    [
        PolicyKind::Nash,
        PolicyKind::BestArm,
        PolicyKind::BestHalf,
        PolicyKind::Uniform,
    ]
    .iter()
    .filter_map(|&p| {
        r.get(k, p)
            .map(|row| format!("{}={:.4}", p.name(), field(row)))
    })
    .collect::<Vec<_>>()
    .join(" ")
}

pub fn experiment(a: ExperimentArgs, jobs: Option<usize>) -> Result<(), CliError> {
    let cfg = load_config(&a)?;
    let suite = suite_name(a.suite);
    let mut manifest =
        Manifest::new(format!("experiment --suite {suite}"), cfg.master_seed).param("suite", suite);
    manifest.config_digest = Some(cfg.digest());
    let dir = cfg.output_dir.join(suite);
    let mut out = ReportWriter::create(&dir, manifest)?;
    out.write("config.json", &json_bytes(&cfg)?)?;

    with_jobs(jobs, || -> Result<(), CliError> {
        let m = obtain_matrix(&cfg, &mut out)?;
        out.manifest.matrix_digest = Some(matrix_digest(&m));
        match a.suite {
            Suite::Generalization => {
                let r =
                    generalization_experiment(&m, &cfg.k_grid, cfg.replications, cfg.master_seed)?;
                out.write("generalization.csv", &generalization_csv(&r)?)?;
                out.write("generalization.json", &json_bytes(&r)?)?;
                let lines = cfg.k_grid.iter().map(|&k| {
                    (
                        format!("K={k}: {}", policy_line(&r, k, |row| row.win_vs_uniform)),
                        format!("K={k}: {}", policy_line(&r, k, |row| row.exploiter_loss)),
                    )
                });
                let (win, expl): (Vec<_>, Vec<_>) = lines.unzip();
                println!("win rate vs held-out uniform | {}", win.join(" | "));
                println!("loss rate vs exploiter | {}", expl.join(" | "));
            }
            Suite::Online => {
                let opponent = cfg.opponent_kind()?;
                let r = online_experiment(
                    &m,
                    opponent,
                    cfg.online_role,
                    cfg.online_iterations,
                    cfg.online_replications,
                    cfg.master_seed,
                )?;
                out.write("online.csv", &online_csv(&r)?)?;
                out.write("online.json", &json_bytes(&r)?)?;
                println!(
                    "UCBT as {} vs {}: losing rate {:.4} after {} games (best arm wins {:.4}), {} replications",
                    r.role.name(),
                    opponent,
                    r.terminal_losing_rate,
                    r.iterations,
                    r.best_arm_rate,
                    r.replications
                );
            }
            Suite::CrossEval => {
                let mut r = cross_evaluate(&m)?;
                if cfg.monte_carlo_games > 0 {
                    simulate_cross_evaluation(
                        &m,
                        &mut r,
                        cfg.monte_carlo_games,
                        cfg.master_seed,
                        |i, j, rng| {
                            Ok(if rng.random::<f64>() < m.get(i, j) {
                                1.0
                            } else {
                                0.0
                            })
                        },
                    )?;
                }
                out.write("cross_eval.csv", &cross_eval_csv(&r)?)?;
                out.write("cross_eval.json", &json_bytes(&r)?)?;
                let worst = r
                    .entries
                    .iter()
                    .filter_map(|e| match (e.simulated, e.simulated_se) {
                        (Some(s), Some(se)) if se > 0.0 => Some((s - e.analytic).abs() / se),
                        _ => None,
                    })
                    .fold(0.0, f64::max);
                println!(
                    "value {:.4}, supports {}/{}, {} matchups, worst simulated deviation {:.2} SE",
                    r.value,
                    r.black_support,
                    r.white_support,
                    r.entries.len(),
                    worst
                );
            }
        }
        Ok(())
    })?;
    let written = out.finish()?;
    log::info!("wrote {} files to {}", written.len(), dir.display());
    Ok(())
}

pub fn engine(a: EngineArgs) -> Result<(), CliError> {
    let stdin = io::stdin().lock();
    let stdout = BufWriter::new(io::stdout().lock());
    seedfolio_core::gpp::serve(stdin, stdout, a.sims)?;
    Ok(())
}
