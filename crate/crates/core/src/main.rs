use std::fs::File;
use std::io::{self, Write};
use std::path::{Path as FsPath, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use anarchy::equilibria::{poa_bound, EquilibriumReport, SpgGame, DEFAULT_PROFILE_CAP};
use anarchy::gwtf::{CompetitiveCheck, GoWithTheFlow};
use anarchy::harness::{
    braess_negative_test, multicast_rows, run_multicast_campaign, run_spg_campaign, spg_rows, write_csv,
    InstanceFile, MulticastCampaign, MulticastSpec, SpgCampaign, SpgSpec, BRAESS_PATHS,
};
use anarchy::mechanism::{weights_for, Priority};
use anarchy::multicast::{best_error, game_opt};
use anarchy::rational;
use anarchy::spg::{Network, Path};

#[derive(Parser)]
#[command(name = "anarchy", version, about = "Cost-sharing mechanisms with predictions: equilibria and bounds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check an instance file against every constraint.
    Validate { file: PathBuf },
    /// Optimal cost and loads for every player count up to the horizon.
    Opt { file: PathBuf },
    /// Trace the online allocation for `n` arrivals.
    Gwtf {
        file: PathBuf,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Equilibria of the mechanism for the file's `n` and `n_hat`.
    Equilibrium {
        file: PathBuf,
        /// Enumerate every equilibrium instead of the sequential one.
        #[arg(long)]
        exhaustive: bool,
    },
    /// Worst equilibrium against the optimum and the bound.
    Poa { file: PathBuf },
    /// Greedy equilibrium, optimum and prediction-error bounds.
    Multicast {
        file: PathBuf,
        /// Also print the assignment minimizing the error objective.
        #[arg(long)]
        best_error: bool,
    },
    /// Run a seeded campaign and write its rows as CSV.
    Experiment {
        kind: Kind,
        #[arg(long, default_value_t = 20)]
        seeds: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Search all online algorithms on the Braess network.
    Braess {
        #[arg(long, default_value_t = 100)]
        k: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Spg,
    Multicast,
}

/// Outcome of a command that ran to completion.
enum Verdict {
    Pass,
    BoundViolated,
}

type CmdResult = Result<Verdict, String>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let result = match cli.command {
        Command::Validate { file } => validate(&file, &mut out),
        Command::Opt { file } => opt(&file, &mut out),
        Command::Gwtf { file, n } => gwtf(&file, n, &mut out),
        Command::Equilibrium { file, exhaustive } => equilibrium(&file, exhaustive, &mut out),
        Command::Poa { file } => poa(&file, &mut out),
        Command::Multicast { file, best_error } => multicast(&file, best_error, &mut out),
        Command::Experiment { kind, seeds, out: path } => experiment(kind, seeds, &path, &mut out),
        Command::Braess { k } => braess(k, &mut out),
    };
    match result {
        Ok(Verdict::Pass) => ExitCode::SUCCESS,
        Ok(Verdict::BoundViolated) => ExitCode::from(2),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}

fn io_err(e: io::Error) -> String {
    format!("write failed: {e}")
}

fn load(file: &FsPath) -> Result<(InstanceFile, String), String> {
    let origin = file.display().to_string();
    let inst = InstanceFile::load(file).map_err(|e| e.to_string())?;
    inst.validate(&origin).map_err(|e| e.to_string())?;
    Ok((inst, origin))
}

fn load_spg(file: &FsPath) -> Result<(SpgSpec, Network, String), String> {
    match load(file)? {
        (InstanceFile::Spg(spec), origin) => {
            let net = spec.network(&origin).map_err(|e| e.to_string())?;
            Ok((spec, net, origin))
        }
        (InstanceFile::Multicast(_), origin) => Err(format!("{origin}: kind: expected an spg instance")),
    }
}

fn load_multicast(file: &FsPath) -> Result<(MulticastSpec, String), String> {
    match load(file)? {
        (InstanceFile::Multicast(spec), origin) => Ok((spec, origin)),
        (InstanceFile::Spg(_), origin) => Err(format!("{origin}: kind: expected a multicast instance")),
    }
}

fn path_name(net: &Network, path: &Path) -> String {
    let names: Vec<&str> = path.edges().iter().map(|&e| net.tree().edge_name(e)).collect();
    names.join("+")
}

fn validate(file: &FsPath, out: &mut impl Write) -> CmdResult {
    let (inst, origin) = load(file)?;
    let summary = match &inst {
        InstanceFile::Spg(spec) => {
            let net = spec.network(&origin).map_err(|e| e.to_string())?;
            format!(
                "spg: {} edges, {} paths, horizon {}",
                net.tree().num_edges(),
                net.tree().count_paths(),
                net.horizon()
            )
        }
        InstanceFile::Multicast(spec) => {
            let (m, _) = spec.instance(&origin).map_err(|e| e.to_string())?;
            format!(
                "multicast: {} vertices, {} edges, {} terminals, {} predictions",
                m.num_vertices(),
                m.edges().len(),
                m.terminals().len(),
                m.predictions().len()
            )
        }
    };
    writeln!(out, "{origin}: ok ({summary})").map_err(io_err)?;
    Ok(Verdict::Pass)
}

fn opt(file: &FsPath, out: &mut impl Write) -> CmdResult {
    let (_, net, _) = load_spg(file)?;
    let profile = anarchy::opt::solve(&net, net.horizon()).map_err(|e| e.to_string())?;
    let mut header = vec!["q".to_string(), "opt".to_string()];
    header.extend(net.tree().edge_names().iter().cloned());
    writeln!(out, "{}", header.join(",")).map_err(io_err)?;
    for q in 0..=profile.q_max() {
        let mut row = vec![q.to_string(), profile.cost[q].to_string()];
        row.extend(profile.loads[q].as_slice().iter().map(|l| l.to_string()));
        writeln!(out, "{}", row.join(",")).map_err(io_err)?;
    }
    Ok(Verdict::Pass)
}

fn gwtf(file: &FsPath, n: Option<usize>, out: &mut impl Write) -> CmdResult {
    let (spec, net, _) = load_spg(file)?;
    let n = n.unwrap_or(spec.n);
    let alg = GoWithTheFlow::new(&net).map_err(|e| e.to_string())?;
    let state = alg.run(n).map_err(|e| e.to_string())?;
    writeln!(out, "q,k_q,path").map_err(io_err)?;
    for (i, path) in state.paths.iter().enumerate() {
        writeln!(out, "{},{},{}", i + 1, state.k_history[i], path_name(&net, path)).map_err(io_err)?;
    }
    writeln!(out).map_err(io_err)?;
    writeln!(out, "edge,load").map_err(io_err)?;
    for (e, name) in net.tree().edge_names().iter().enumerate() {
        writeln!(out, "{name},{}", state.loads.get(e)).map_err(io_err)?;
    }
    let check = alg.competitive_check(n).map_err(|e| e.to_string())?;
    if let CompetitiveCheck::Ratio { alg_cost, opt_cost, ratio, .. } = &check {
        writeln!(out).map_err(io_err)?;
        writeln!(out, "alg_cost,opt_cost,ratio,bound,bound_satisfied").map_err(io_err)?;
        writeln!(out, "{alg_cost},{},{ratio},4,{}", rational::format(opt_cost), check.ok()).map_err(io_err)?;
    }
    Ok(if check.ok() { Verdict::Pass } else { Verdict::BoundViolated })
}

fn equilibrium(file: &FsPath, exhaustive: bool, out: &mut impl Write) -> CmdResult {
    let (spec, net, _) = load_spg(file)?;
    let (_, weights) = weights_for(&net, spec.n_hat).map_err(|e| e.to_string())?;
    let game = SpgGame::new(&net, weights);
    let priority = Priority::identity(spec.n);
    let reports: Vec<EquilibriumReport> = if exhaustive {
        game.enumerate_pne(spec.n, &priority, DEFAULT_PROFILE_CAP).map_err(|e| e.to_string())?
    } else {
        vec![game.sequential_pne(spec.n, &priority).map_err(|e| e.to_string())?]
    };
    let opt = anarchy::opt::solve(&net, spec.n).map_err(|e| e.to_string())?.cost[spec.n].clone();
    let bound = rational::int(poa_bound(spec.n, spec.n_hat) as i64);
    let mut violated = false;
    writeln!(out, "paths,charges,modified_cost,original_cost,opt,ratio,bound,bound_satisfied").map_err(io_err)?;
    for r in &reports {
        let paths: Vec<String> = r.profile.0.iter().map(|&p| path_name(&net, &game.paths()[p])).collect();
        let charges: Vec<String> = r.charges.iter().map(|c| c.to_string()).collect();
        let (ratio, ok) = ratio_text(r.social_cost_modified.finite_part(), &opt, &bound);
        violated |= !ok;
        writeln!(
            out,
            "{},\"{}\",{},{},{},{},{},{}",
            paths.join(" "),
            charges.join("; "),
            r.social_cost_modified,
            r.social_cost_original,
            opt,
            ratio,
            rational::format(&bound),
            ok
        )
        .map_err(io_err)?;
    }
    Ok(if violated { Verdict::BoundViolated } else { Verdict::Pass })
}

fn ratio_text(
    cost: &anarchy::CostValue,
    opt: &anarchy::CostValue,
    bound: &anarchy::Rational,
) -> (String, bool) {
    use anarchy::CostValue::Finite;
    match (cost, opt) {
        (Finite(c), Finite(o)) if *o != rational::zero() => {
            let r = c / o;
            (rational::format(&r), &r <= bound)
        }
        (Finite(c), Finite(_)) => ("undefined".into(), *c == rational::zero()),
        _ => ("inf".into(), false),
    }
}

fn poa(file: &FsPath, out: &mut impl Write) -> CmdResult {
    let (spec, _, origin) = load_spg(file)?;
    let campaign = SpgCampaign {
        n_range: spec.n..=spec.n,
        n_hat_range: spec.n_hat..=spec.n_hat,
        max_delta: usize::MAX,
        ..SpgCampaign::default()
    };
    let rows = spg_rows(&origin, &InstanceFile::Spg(spec), &campaign);
    write_csv(&rows, &mut *out).map_err(|e| e.to_string())?;
    Ok(verdict(&rows))
}

fn verdict(rows: &[anarchy::harness::ExperimentRow]) -> Verdict {
    if rows.iter().all(|r| r.bound_satisfied) {
        Verdict::Pass
    } else {
        Verdict::BoundViolated
    }
}

fn multicast(file: &FsPath, show_best: bool, out: &mut impl Write) -> CmdResult {
    let (spec, origin) = load_multicast(file)?;
    if show_best {
        let (inst, _) = spec.instance(&origin).map_err(|e| e.to_string())?;
        let opt = game_opt(&inst);
        let best = best_error(&inst, opt.value());
        let pairs: Vec<String> = best
            .assignment
            .0
            .iter()
            .map(|(&t, &h)| format!("{}->{}", inst.name(t), inst.name(h)))
            .collect();
        writeln!(out, "distance,unmatched_terminals,unmatched_predictions,objective,exact,assignment").map_err(io_err)?;
        writeln!(
            out,
            "{},{},{},{},{},{}",
            rational::format(&best.error.distance),
            best.error.unmatched_terminals,
            best.error.unmatched_predictions,
            rational::format(&best.objective),
            best.exact,
            pairs.join(" ")
        )
        .map_err(io_err)?;
        writeln!(out).map_err(io_err)?;
    }
    let rows = multicast_rows(&origin, &InstanceFile::Multicast(spec), 8);
    write_csv(&rows, &mut *out).map_err(|e| e.to_string())?;
    Ok(verdict(&rows))
}

fn experiment(kind: Kind, seeds: u64, path: &FsPath, out: &mut impl Write) -> CmdResult {
    let rows = match kind {
        Kind::Spg => run_spg_campaign(&SpgCampaign {
            seeds: (0..seeds).collect(),
            ..SpgCampaign::default()
        }),
        Kind::Multicast => run_multicast_campaign(&MulticastCampaign {
            seeds: (0..seeds).collect(),
            ..MulticastCampaign::default()
        }),
    };
    let file = File::create(path).map_err(|e| format!("{}: {e}", path.display()))?;
    write_csv(&rows, file).map_err(|e| format!("{}: {e}", path.display()))?;
    let failed = rows.iter().filter(|r| !r.bound_satisfied).count();
    writeln!(out, "{} rows written to {}, {failed} bound violations", rows.len(), path.display()).map_err(io_err)?;
    Ok(verdict(&rows))
}

fn braess(k: u64, out: &mut impl Write) -> CmdResult {
    if k == 0 {
        return Err("--k must be positive".into());
    }
    let r = braess_negative_test(k);
    writeln!(out, "k,algorithms,opt_one,opt_two,best_ratio,best_ratio_approx,closed_form,best_first,best_reply,beats_four")
        .map_err(io_err)?;
    writeln!(
        out,
        "{},{},{},{},{},{:.4},{},{},{},{}",
        r.k,
        r.algorithms,
        rational::format(&r.opt_one),
        rational::format(&r.opt_two),
        rational::format(&r.best_ratio),
        rational::to_f64(&r.best_ratio),
        rational::format(&r.closed_form),
        BRAESS_PATHS[r.best_first].0,
        BRAESS_PATHS[r.best_reply].0,
        r.beats_four()
    )
    .map_err(io_err)?;
    Ok(if r.best_ratio == r.closed_form { Verdict::Pass } else { Verdict::BoundViolated })
}
