use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use ltlpn::buchi::{parse_automaton, BuchiAutomaton};
use ltlpn::environment::{build_rmpn, parse_environment, Environment};
use ltlpn::milp::{export_lp, Enabledness, DEFAULT_NODE_LIMIT};
use ltlpn::planner::{plan_detailed, verify_plan, Plan, PlanOutcome, PlannerConfig, Prepared};
use ltlpn::render::render_svg;

const EXIT_INFEASIBLE: u8 = 2;

#[derive(Parser)]
#[command(name = "ltlpn", version, about = "Plan multi-robot missions given as Büchi automata")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a plan and print a summary of the constructed nets and models.
    Plan(PlanArgs),
    /// Check a saved plan against the environment and automaton.
    Verify {
        #[command(flatten)]
        inputs: Inputs,
        /// Plan document to check.
        #[arg(long)]
        plan: PathBuf,
    },
    /// Write one of the planning MILPs as an LP file.
    ExportLp {
        #[command(flatten)]
        solve: SolveArgs,
        #[arg(long, value_enum)]
        stage: Stage,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw the environment, and a plan when one is given, as SVG.
    Render {
        #[arg(long)]
        env: PathBuf,
        #[arg(long)]
        plan: Option<PathBuf>,
        /// Output file; stdout when omitted.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Inputs {
    /// Environment file (grid or cell list).
    #[arg(long)]
    env: PathBuf,
    /// Büchi automaton file.
    #[arg(long)]
    automaton: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    inputs: Inputs,
    #[arg(long, default_value_t = 4)]
    k_init: usize,
    /// Branch-and-bound node budget per MILP.
    #[arg(long, default_value_t = DEFAULT_NODE_LIMIT)]
    node_limit: usize,
    /// Try every final state and keep the cheapest plan.
    #[arg(long)]
    explore_all_finals: bool,
    /// Enabledness rows on the marking before each move (default).
    #[arg(long, conflicts_with = "literal_enabledness")]
    strict_enabledness: bool,
    /// Enabledness rows on the marking after each move.
    #[arg(long)]
    literal_enabledness: bool,
}

#[derive(Args)]
struct PlanArgs {
    #[command(flatten)]
    solve: SolveArgs,
    /// Plan document output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// SVG rendering of the plan.
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Leave timings out of the plan document.
    #[arg(long)]
    normalize_timings: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Stage {
    Prefix,
    Suffix,
    Projection,
}

struct Loaded {
    env: Environment,
    buchi: BuchiAutomaton,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_env(path: &Path) -> Result<Environment> {
    parse_environment(&read(path)?).with_context(|| format!("in {}", path.display()))
}

fn load(inputs: &Inputs) -> Result<Loaded> {
    let env = load_env(&inputs.env)?;
    let buchi = parse_automaton(&read(&inputs.automaton)?).with_context(|| format!("in {}", inputs.automaton.display()))?;
    Ok(Loaded { env, buchi })
}

fn load_plan(path: &Path) -> Result<Plan> {
    Plan::from_json(&read(path)?).with_context(|| format!("in {}", path.display()))
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

impl SolveArgs {
    fn config(&self) -> PlannerConfig {
        PlannerConfig {
            k_init: self.k_init,
            node_limit: self.node_limit,
            explore_all_finals: self.explore_all_finals,
            enabledness: if self.literal_enabledness { Enabledness::Literal } else { Enabledness::Strict },
        }
    }
}

fn summary(p: &Plan) -> String {
    let c = &p.counts;
    let net = |name: &str, n: &ltlpn::planner::NetCounts| format!("{name:<10} {} places, {} transitions\n", n.places, n.transitions);
    let mut s = String::new();
    s += &net("RMPN", &c.rmpn);
    s += &net("quotient", &c.quotient);
    s += &net("Büchi PN", &c.buchi);
    s += &net("composed", &c.composed);
    s += &format!("k          {}\n", c.k);
    s += &format!("prefix     {} variables, objective {}\n", c.prefix_variables, p.objectives.prefix);
    match (c.suffix_variables, c.lasso_variables, p.objectives.suffix) {
        (_, Some(n), Some(o)) => s += &format!("suffix     {n} variables (joint model), objective {o}\n"),
        (Some(n), _, Some(o)) => s += &format!("suffix     {n} variables, objective {o}\n"),
        _ => s += "suffix     self-loop on the final state\n",
    }
    s += &format!("projection {} variables, objective {}\n", c.projection_variables, p.objectives.projection);
    s += &format!("robots     {}, {} ticks, loop at tick {}, {} moves\n", p.robots, p.timeline().len(), p.loop_tick, p.move_count());
    s += &format!("run        {} -> {} (final)\n", p.buchi_run.prefix_states.join(" "), p.buchi_run.final_state);
    s += &format!("solver     {} nodes\n", c.solver_nodes);
    if let Some(t) = &p.timings {
        s += &format!(
            "timings    build {:.1} ms, prefix {:.1} ms, suffix {:.1} ms, projection {:.1} ms, total {:.1} ms\n",
            t.build_ms, t.prefix_ms, t.suffix_ms, t.projection_ms, t.total_ms
        );
    }
    s
}

fn cmd_plan(args: &PlanArgs) -> Result<ExitCode> {
    let l = load(&args.solve.inputs)?;
    let rmpn = build_rmpn(&l.env);
    let (outcome, _) = plan_detailed(&rmpn, &l.env.robot_cells, &l.buchi, &args.solve.config())?;
    let p = match outcome {
        PlanOutcome::Plan(p) => *p,
        PlanOutcome::Infeasible(r) => {
            eprintln!("infeasible: {}", r.message);
            eprintln!("k tried: {:?}, solver nodes: {}", r.k_tried, r.solver_nodes);
            return Ok(ExitCode::from(EXIT_INFEASIBLE));
        }
    };
    print!("{}", summary(&p));
    let doc = if args.normalize_timings { p.normalized() } else { p.clone() };
    if let Some(out) = &args.out {
        fs::write(out, doc.to_json()).with_context(|| format!("cannot write {}", out.display()))?;
    }
    if let Some(svg) = &args.svg {
        fs::write(svg, render_svg(&l.env, Some(&p))?).with_context(|| format!("cannot write {}", svg.display()))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(inputs: &Inputs, plan: &Path) -> Result<ExitCode> {
    let l = load(inputs)?;
    let p = load_plan(plan)?;
    let v = verify_plan(&p, &build_rmpn(&l.env), &l.buchi);
    if v.accepted() {
        println!("plan accepted");
        Ok(ExitCode::SUCCESS)
    } else {
        for f in &v.failures {
            eprintln!("{f}");
        }
        bail!("plan rejected with {} failure(s)", v.failures.len())
    }
}

fn cmd_export_lp(args: &SolveArgs, stage: Stage, out: Option<&Path>) -> Result<ExitCode> {
    let l = load(&args.inputs)?;
    let rmpn = build_rmpn(&l.env);
    let cfg = args.config();
    let (outcome, art) = plan_detailed(&rmpn, &l.env.robot_cells, &l.buchi, &cfg)?;
    let model = match (stage, art) {
        (Stage::Prefix, Some(a)) => a.prefix,
        (Stage::Prefix, None) => {
            // no plan: export the first prefix model that was tried
            let prep = Prepared::new(&rmpn, &l.env.robot_cells, &l.buchi, cfg.enabledness)?;
            let Some(&f) = l.buchi.finals.first() else { bail!("the automaton has no final state") };
            prep.prefix_model(cfg.k_init.max(1), f, l.buchi.initial[0])?.model
        }
        (Stage::Suffix, Some(a)) => match (a.suffix, a.lasso) {
            (_, Some(m)) | (Some(m), None) => m,
            (None, None) => bail!("the suffix is a self-loop on the final state; there is no suffix model"),
        },
        (Stage::Projection, Some(a)) => a.projection,
        (_, None) => {
            let msg = match outcome {
                PlanOutcome::Infeasible(r) => r.message,
                PlanOutcome::Plan(_) => "no models were recorded".into(),
            };
            bail!("stage not reached: {msg}")
        }
    };
    write_out(out, &export_lp(&model))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_render(env: &Path, plan: Option<&Path>, svg: Option<&Path>) -> Result<ExitCode> {
    let env = load_env(env)?;
    let plan = plan.map(load_plan).transpose()?;
    write_out(svg, &render_svg(&env, plan.as_ref())?)?;
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::Plan(args) => cmd_plan(args),
        Command::Verify { inputs, plan } => cmd_verify(inputs, plan),
        Command::ExportLp { solve, stage, out } => cmd_export_lp(solve, *stage, out.as_deref()),
        Command::Render { env, plan, svg } => cmd_render(env, plan.as_deref(), svg.as_deref()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
