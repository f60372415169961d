//! Scenario runner: structure files in, reports, traces and SVG out.
//!
//! Exit codes: 0 success (and oracle agreement when --check is set),
//! 1 oracle mismatch, 2 usage or runtime error.

mod svg;

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use amoebot_core::gen::{hexagon_ring, random_blob};
use amoebot_core::grid::{Direction, GridCoord, Sign};
use amoebot_core::oracle::{
    oracle_boundaries, oracle_maxima, oracle_skeleton, oracle_spanning_check, oracle_stripe,
    oracle_symmetry, OracleView,
};
use amoebot_core::pasc::{ceil_log2, pasc_run, ChainRef};
use amoebot_core::skeleton::{canonical_skeleton, skeleton_path, spanning_tree};
use amoebot_core::spatial::{global_maxima, stripe_algorithm};
use amoebot_core::symmetry::detect_symmetries;
use amoebot_core::AmoebotWorld;

#[derive(Parser)]
#[command(name = "amoebot", about = "Amoebot circuit-model scenario runner")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one scenario on a structure file.
    Run(RunArgs),
    /// Round-count sweeps over generated structures for scaling fits.
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Scenario {
    Stripe,
    Maxima,
    Skeleton,
    SpanningTree,
    Symmetry,
    PascDemo,
}

impl Scenario {
    fn default_pins(self) -> usize {
        match self {
            Scenario::Stripe => 2,
            Scenario::Maxima => 2,
            _ => 4,
        }
    }
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(value_enum)]
    scenario: Scenario,
    /// Structure file: one `q r` pair per line, `#` comments.
    #[arg(long)]
    input: PathBuf,
    /// Cardinal direction (N, NNW, WNW, W, WSW, SSW, S, SSE, ESE, E, ENE, NNE).
    #[arg(long, default_value = "N")]
    dir: String,
    /// Skeleton handedness.
    #[arg(long, default_value = "+")]
    sign: String,
    /// Reference amoebot "q,r" (defaults to the first structure line).
    #[arg(long = "ref", value_name = "q,r")]
    reference: Option<String>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Pins per bond (defaults to the scenario's requirement).
    #[arg(long)]
    pins: Option<usize>,
    #[arg(long, default_value_t = 1_000_000)]
    max_rounds: u64,
    /// Subset selector for maxima: "all" or "random:<p>".
    #[arg(long, default_value = "all")]
    subset: String,
    /// Repetition constant for symmetry detection.
    #[arg(short = 'c', long, default_value_t = 2)]
    confidence: u32,
    /// Compare against the full-knowledge oracle.
    #[arg(long)]
    check: bool,
    /// Write the engine trace to this file.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write an SVG rendering to this file.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(clap::Args)]
struct SweepArgs {
    /// Sizes as "lo..hi" (log-spaced samples) or comma list.
    #[arg(long, default_value = "16..1024")]
    sizes: String,
    #[arg(long, default_value = "random")]
    shape: String,
    #[arg(long, default_value_t = 3)]
    trials: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(value_enum, default_value = "stripe")]
    scenario: Scenario,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Run(args) => match run(args) {
            Ok(agree) => {
                if agree {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(1)
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        },
        Cmd::Sweep(args) => match sweep(args) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        },
    }
}

/// Parse a structure file: one `q r` integer pair per line, `#` comments.
pub fn parse_structure(text: &str) -> Result<Vec<GridCoord>, String> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let (q, r) = (it.next(), it.next());
        let parse = |v: Option<&str>| -> Result<i32, String> {
            v.ok_or_else(|| format!("line {}: expected `q r`", lineno + 1))?
                .parse()
                .map_err(|e| format!("line {}: {e}", lineno + 1))
        };
        let coord = GridCoord::new(parse(q)?, parse(r)?);
        if it.next().is_some() {
            return Err(format!("line {}: trailing tokens", lineno + 1));
        }
        out.push(coord);
    }
    if out.is_empty() {
        return Err("structure file has no coordinates".into());
    }
    Ok(out)
}

fn parse_dir(s: &str) -> Result<Direction, String> {
    Direction::from_name(s).ok_or_else(|| format!("unknown direction {s:?}"))
}

fn parse_sign(s: &str) -> Result<Sign, String> {
    match s {
        "+" | "plus" => Ok(Sign::Plus),
        "-" | "minus" => Ok(Sign::Minus),
        _ => Err(format!("sign must be + or -, got {s:?}")),
    }
}

fn parse_ref(s: &str) -> Result<GridCoord, String> {
    let (q, r) = s
        .split_once(',')
        .ok_or_else(|| format!("reference must be \"q,r\", got {s:?}"))?;
    Ok(GridCoord::new(
        q.trim().parse().map_err(|e| format!("reference: {e}"))?,
        r.trim().parse().map_err(|e| format!("reference: {e}"))?,
    ))
}

fn phase_budget(n: usize) -> u32 {
    4 * ceil_log2(n.max(2)) as u32
}

fn run(args: RunArgs) -> Result<bool, String> {
    let text = std::fs::read_to_string(&args.input)
        .map_err(|e| format!("{}: {e}", args.input.display()))?;
    let coords = parse_structure(&text)?;
    let first = coords[0];
    let d = parse_dir(&args.dir)?;
    let s = parse_sign(&args.sign)?;
    let reference = match &args.reference {
        Some(t) => parse_ref(t)?,
        None => first,
    };
    let pins = args.pins.unwrap_or(args.scenario.default_pins());
    let mut world =
        AmoebotWorld::load(coords.clone(), pins, args.seed).map_err(|e| e.to_string())?;
    if args.trace.is_some() {
        world.enable_trace(true);
    }
    let view = OracleView::new(&coords);
    let n = world.st.len();
    let budget = phase_budget(n);
    let mut report = String::new();
    let mut svg_doc = svg::SvgDoc::new();
    let mut agree = true;

    match args.scenario {
        Scenario::Stripe => {
            let (flags, rounds) =
                stripe_algorithm(&mut world, reference, d).map_err(|e| e.to_string())?;
            let _ = writeln!(
                report,
                "scenario=stripe dir={d} ref={reference} rounds={rounds}"
            );
            let members: Vec<String> = (0..n)
                .filter(|&i| flags[i])
                .map(|i| world.st.coord(i).to_string())
                .collect();
            let _ = writeln!(report, "members={}", members.join(" "));
            if args.check {
                let want = oracle_stripe(&view, reference, d);
                agree = want
                    .iter()
                    .enumerate()
                    .all(|(i, &w)| w == flags[world.st.index_of(view.coords[i]).unwrap()]);
            }
            if args.svg.is_some() {
                let by_flag: Vec<bool> = flags.clone();
                svg_doc.cells(&world, |i| if by_flag[i] { "#ffd54f" } else { "#e8e8e8" });
            }
        }
        Scenario::Maxima => {
            let in_r = subset_flags(&world, &args.subset, args.seed)?;
            let out = global_maxima(&mut world, &in_r, d, budget).map_err(|e| e.to_string())?;
            let _ = writeln!(report, "scenario=maxima dir={d} rounds={}", out.rounds);
            let members: Vec<String> = (0..n)
                .filter(|&i| out.maxima[i])
                .map(|i| world.st.coord(i).to_string())
                .collect();
            let _ = writeln!(report, "maxima={}", members.join(" "));
            if args.check {
                let want = oracle_maxima(&view, &in_r, d);
                agree = (0..n)
                    .all(|i| want[i] == out.maxima[world.st.index_of(view.coords[i]).unwrap()]);
            }
            if args.svg.is_some() {
                let flags = out.maxima.clone();
                let rset = in_r.clone();
                svg_doc.cells(&world, move |i| {
                    if flags[i] {
                        "#ef5350"
                    } else if rset[i] {
                        "#90caf9"
                    } else {
                        "#e8e8e8"
                    }
                });
            }
        }
        Scenario::Skeleton => {
            let sk = canonical_skeleton(&mut world, d, s, budget).map_err(|e| e.to_string())?;
            let path = skeleton_path(&world, &sk);
            let _ = writeln!(
                report,
                "scenario=skeleton dir={d} sign={s} rounds={} visits={} split={}",
                sk.rounds,
                sk.visit_count(),
                world.st.coord(sk.split.0),
            );
            if args.check {
                let want = oracle_skeleton(&view, d, s);
                agree = want.visits == sk.visits && want.split == sk.split;
            }
            if args.svg.is_some() {
                svg_doc.cells(&world, |_| "#eceff1");
                svg_doc.skeleton(&world, &sk);
            }
            let _ = writeln!(report, "path_len={}", path.len());
        }
        Scenario::SpanningTree => {
            let sk = canonical_skeleton(&mut world, d, s, budget).map_err(|e| e.to_string())?;
            let tree = spanning_tree(&mut world, &sk).map_err(|e| e.to_string())?;
            let _ = writeln!(
                report,
                "scenario=spanning-tree rounds={} edges={} root={}",
                tree.rounds,
                tree.edges.len(),
                world.st.coord(tree.root as usize),
            );
            for &(a, b) in &tree.edges {
                let _ = writeln!(
                    report,
                    "edge {} {}",
                    world.st.coord(a as usize),
                    world.st.coord(b as usize)
                );
            }
            if args.check {
                agree = oracle_spanning_check(n, &tree.edges);
            }
            if args.svg.is_some() {
                svg_doc.cells(&world, |_| "#eceff1");
                svg_doc.edges(&world, &tree.edges);
            }
        }
        Scenario::Symmetry => {
            let rep = detect_symmetries(&mut world, args.confidence, budget)
                .map_err(|e| e.to_string())?;
            let _ = writeln!(
                report,
                "scenario=symmetry rounds={} rot2={} rot3={} rot6={}",
                rep.rounds, rep.rot2, rep.rot3, rep.rot6
            );
            let bits: String = rep
                .reflect
                .iter()
                .map(|&b| if b { '1' } else { '0' })
                .collect();
            let _ = writeln!(report, "reflect={bits}");
            let axes: Vec<String> = (0..12)
                .filter(|&i| rep.reflect[i])
                .map(|i| Direction::from_ring(i as u8).to_string())
                .collect();
            let _ = writeln!(report, "reflection_axes={}", axes.join(" "));
            if args.check {
                let want = oracle_symmetry(&view);
                agree = want.rot2 == rep.rot2
                    && want.rot3 == rep.rot3
                    && want.rot6 == rep.rot6
                    && want.reflect == rep.reflect;
            }
            if args.svg.is_some() {
                svg_doc.cells(&world, |_| "#eceff1");
            }
        }
        Scenario::PascDemo => {
            // Identifiers along the outer boundary cycle, cut at its
            // smallest occurrence.
            let bs = oracle_boundaries(&view);
            let outer = bs.iter().find(|b| b.outer).unwrap();
            let positions: Vec<(GridCoord, u8)> =
                outer.steps.iter().map(|&(c, o, _)| (c, o)).collect();
            let banks = positions
                .windows(2)
                .map(|w| {
                    let dd = amoebot_core::pasc::direction_between(w[0].0, w[1].0).unwrap();
                    amoebot_core::pasc::bank_for_direction(dd)
                })
                .collect();
            let chain = ChainRef {
                positions,
                ref_index: 0,
                banks,
            };
            let out = pasc_run(&mut world, &chain).map_err(|e| e.to_string())?;
            let _ = writeln!(
                report,
                "scenario=pasc-demo m={} iterations={} rounds={}",
                chain.len(),
                out.iterations,
                out.rounds
            );
            for (pos, v) in out.values.iter().enumerate() {
                let _ = writeln!(report, "id {} {}", chain.positions[pos].0, v);
            }
            if args.check {
                agree = out.values.iter().enumerate().all(|(i, &v)| v == i as i64);
            }
            if args.svg.is_some() {
                svg_doc.cells(&world, |_| "#eceff1");
            }
        }
    }

    if world.round > args.max_rounds {
        return Err(format!(
            "round budget of {} rounds exhausted ({} used)",
            args.max_rounds, world.round
        ));
    }
    print!("{report}");
    println!(
        "check={}",
        if !args.check {
            "off"
        } else if agree {
            "agree"
        } else {
            "MISMATCH"
        }
    );
    if let Some(path) = &args.trace {
        let text = world.trace_text().unwrap_or("");
        std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    if let Some(path) = &args.svg {
        std::fs::write(path, svg_doc.finish()).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    Ok(!args.check || agree)
}

fn subset_flags(world: &AmoebotWorld, spec: &str, seed: u64) -> Result<Vec<bool>, String> {
    let n = world.st.len();
    if spec == "all" {
        return Ok(vec![true; n]);
    }
    if let Some(p) = spec.strip_prefix("random:") {
        let p: f64 = p.parse().map_err(|e| format!("subset: {e}"))?;
        // Simple deterministic per-amoebot draw.
        let flags: Vec<bool> = (0..n)
            .map(|i| {
                let c = world.st.coord(i);
                let mut h = seed ^ 0x9e37_79b9_7f4a_7c15;
                for v in [c.q as u64, c.r as u64] {
                    h ^= v.wrapping_mul(0xff51_afd7_ed55_8ccd);
                    h = h.rotate_left(31).wrapping_mul(0xc4ce_b9fe_1a85_ec53);
                }
                (h >> 11) as f64 / (1u64 << 53) as f64 * 2.0 < p * 2.0
            })
            .collect();
        if flags.iter().any(|&b| b) {
            return Ok(flags);
        }
        let mut flags = vec![false; n];
        flags[0] = true;
        return Ok(flags);
    }
    Err(format!(
        "subset must be `all` or `random:<p>`, got {spec:?}"
    ))
}

fn sweep(args: SweepArgs) -> Result<(), String> {
    let sizes = parse_sizes(&args.sizes)?;
    println!("# scenario shape n trial rounds");
    let rows: Vec<String> = sizes
        .par_iter()
        .flat_map(|&n| {
            (0..args.trials)
                .into_par_iter()
                .map(move |trial| (n, trial))
                .collect::<Vec<_>>()
        })
        .map(|(n, trial)| {
            let seed = args.seed.wrapping_mul(1000) + trial;
            let coords = match args.shape.as_str() {
                "ring" => hexagon_ring(((n / 6).max(1)) as i32),
                "blob" => random_blob(n, 0.0, seed),
                _ => random_blob(n, 0.12, seed),
            };
            let pins = args.scenario.default_pins().max(4);
            let mut world = AmoebotWorld::load(coords.clone(), pins, seed).unwrap();
            let budget = phase_budget(world.st.len());
            let rounds = match args.scenario {
                Scenario::Stripe => stripe_algorithm(&mut world, coords[0], amoebot_core::grid::N)
                    .map(|(_, r)| r)
                    .unwrap_or(0),
                Scenario::Maxima => {
                    let in_r = vec![true; world.st.len()];
                    global_maxima(&mut world, &in_r, amoebot_core::grid::N, budget)
                        .map(|o| o.rounds)
                        .unwrap_or(0)
                }
                Scenario::Skeleton => {
                    canonical_skeleton(&mut world, amoebot_core::grid::N, Sign::Plus, budget)
                        .map(|sk| sk.rounds)
                        .unwrap_or(0)
                }
                Scenario::SpanningTree => {
                    canonical_skeleton(&mut world, amoebot_core::grid::N, Sign::Plus, budget)
                        .and_then(|sk| spanning_tree(&mut world, &sk))
                        .map(|t| t.rounds)
                        .unwrap_or(0)
                }
                Scenario::Symmetry => detect_symmetries(&mut world, 2, budget)
                    .map(|r| r.rounds)
                    .unwrap_or(0),
                Scenario::PascDemo => 0,
            };
            format!(
                "{} {} {} {} {}",
                scenario_name(args.scenario),
                args.shape,
                world.st.len(),
                trial,
                rounds
            )
        })
        .collect();
    for row in rows {
        println!("{row}");
    }
    Ok(())
}

fn scenario_name(s: Scenario) -> &'static str {
    match s {
        Scenario::Stripe => "stripe",
        Scenario::Maxima => "maxima",
        Scenario::Skeleton => "skeleton",
        Scenario::SpanningTree => "spanning-tree",
        Scenario::Symmetry => "symmetry",
        Scenario::PascDemo => "pasc-demo",
    }
}

fn parse_sizes(s: &str) -> Result<Vec<usize>, String> {
    if let Some((lo, hi)) = s.split_once("..") {
        let lo: usize = lo.parse().map_err(|e| format!("sizes: {e}"))?;
        let hi: usize = hi.parse().map_err(|e| format!("sizes: {e}"))?;
        if lo < 1 || hi < lo {
            return Err("sizes range must be 1 <= lo <= hi".into());
        }
        // Log-spaced doubling samples.
        let mut out = vec![lo];
        let mut v = lo;
        while v * 2 <= hi {
            v *= 2;
            out.push(v);
        }
        if *out.last().unwrap() != hi {
            out.push(hi);
        }
        Ok(out)
    } else {
        s.split(',')
            .map(|t| t.trim().parse().map_err(|e| format!("sizes: {e}")))
            .collect()
    }
}
