use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

use bidb::compact::{simplify_with, RankStrategy};
use bidb::extsort::{clean_spill, ledger_csv_row, ooc_biconstruct, ExtConfig, LEDGER_CSV_HEADER, SPILL_DIR_ENV};
use bidb::io::{gfa_string, read_gfa, read_graph, read_sequences, write_graph, GraphStats, GRAPH_MAGIC};
use bidb::parsim::{comparison_csv, compare_ja, par_biconstruct, ComparisonRow};
use bidb::{biconstruct, BiGraph};

/// Bi-directed de Bruijn graph construction and compaction.
#[derive(Parser)]
#[command(name = "bidb", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a graph from FASTA/FASTQ reads and write it as GFA.
    Build(BuildArgs),
    /// Compact the chains of a native graph file and write GFA.
    Simplify(SimplifyArgs),
    /// Print counts and histograms of a native or GFA graph.
    Stats { graph: PathBuf },
    /// Compare message counts of the partitioned build and candidate flooding.
    CompareJa(CompareArgs),
    /// Remove leftover spill files.
    CleanSpill {
        #[arg(long, env = SPILL_DIR_ENV)]
        spill_dir: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Memory,
    Parallel,
    External,
}

fn odd_k(s: &str) -> std::result::Result<usize, String> {
    let k: usize = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if k % 2 == 0 || !(3..=31).contains(&k) {
        return Err(format!("k must be odd and within 3..=31, got {k}"));
    }
    Ok(k)
}

/// Byte sizes with an optional K, M or G (binary) suffix.
fn byte_size(s: &str) -> std::result::Result<usize, String> {
    let t = s.trim().to_ascii_uppercase();
    let t = t.strip_suffix("IB").or_else(|| t.strip_suffix('B')).unwrap_or(&t);
    let (num, mul) = match t.chars().last() {
        Some('K') => (&t[..t.len() - 1], 1 << 10),
        Some('M') => (&t[..t.len() - 1], 1 << 20),
        Some('G') => (&t[..t.len() - 1], 1 << 30),
        _ => (t, 1),
    };
    num.parse::<usize>()
        .map(|n| n * mul)
        .map_err(|_| format!("{s:?} is not a byte size"))
}

#[derive(Args)]
struct ExtArgs {
    /// Worker count for parallel modes.
    #[arg(short = 'p', default_value_t = 4)]
    p: usize,
    /// Memory budget for external mode.
    #[arg(long, value_parser = byte_size, default_value = "64M")]
    mem: usize,
    /// Block size for external mode.
    #[arg(long, value_parser = byte_size, default_value = "64K")]
    block: usize,
    /// Merge fan-in; defaults to mem/block - 1.
    #[arg(long)]
    fanin: Option<usize>,
    #[arg(long, env = SPILL_DIR_ENV)]
    spill_dir: Option<PathBuf>,
}

impl ExtArgs {
    fn config(&self) -> ExtConfig {
        let mut c = ExtConfig::new(self.mem, self.block);
        if let Some(r) = self.fanin {
            c = c.with_fan_in(r);
        }
        if let Some(d) = &self.spill_dir {
            c = c.with_spill_dir(d);
        }
        c
    }
}

#[derive(Args)]
struct BuildArgs {
    #[arg(short = 'k', value_parser = odd_k)]
    k: usize,
    #[arg(long, value_enum, default_value = "memory")]
    mode: Mode,
    #[command(flatten)]
    ext: ExtArgs,
    #[arg(short = 'o', long)]
    output: PathBuf,
    /// Ledger CSV for the chosen mode.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Also write the native graph file, for `simplify`.
    #[arg(long)]
    graph_out: Option<PathBuf>,
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
}

#[derive(Args)]
struct SimplifyArgs {
    /// Chain ranking engine.
    #[arg(long, value_enum, default_value = "memory")]
    mode: Mode,
    #[command(flatten)]
    ext: ExtArgs,
    #[arg(short = 'o', long)]
    output: PathBuf,
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    graph_out: Option<PathBuf>,
    graph: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(short = 'k', value_parser = odd_k)]
    k: usize,
    #[arg(short = 'p', default_value_t = 4)]
    p: usize,
    /// CSV destination; standard output when absent.
    #[arg(short = 'o', long)]
    output: Option<PathBuf>,
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
}

/// Everything a build needs, validated.
struct RunConfig {
    k: usize,
    mode: Mode,
    p: usize,
    ext: ExtConfig,
    inputs: Vec<PathBuf>,
    output: PathBuf,
    report: Option<PathBuf>,
    graph_out: Option<PathBuf>,
}

fn usage_error(msg: String) -> ! {
    Cli::command().error(ErrorKind::ArgumentConflict, msg).exit()
}

fn distinct_paths(inputs: &[PathBuf], outputs: &[&PathBuf]) {
    for (i, o) in outputs.iter().enumerate() {
        if inputs.contains(o) || outputs[..i].contains(o) {
            usage_error(format!("path {} is used twice", o.display()));
        }
    }
}

impl RunConfig {
    fn from_args(a: BuildArgs) -> RunConfig {
        if a.ext.p == 0 {
            usage_error("-p must be at least 1".into());
        }
        let outs: Vec<&PathBuf> = [Some(&a.output), a.report.as_ref(), a.graph_out.as_ref()]
            .into_iter()
            .flatten()
            .collect();
        distinct_paths(&a.inputs, &outs);
        RunConfig {
            k: a.k,
            mode: a.mode,
            p: a.ext.p,
            ext: a.ext.config(),
            inputs: a.inputs,
            output: a.output,
            report: a.report,
            graph_out: a.graph_out,
        }
    }
}

fn write(path: &Path, data: &str) -> Result<()> {
    fs::write(path, data).with_context(|| format!("writing {}", path.display()))
}

fn build(cfg: RunConfig) -> Result<()> {
    let (reads, _) = read_sequences(&cfg.inputs)?;
    let (g, report) = match cfg.mode {
        Mode::Memory => {
            let (g, r) = biconstruct(&reads, cfg.k)?;
            let w = r.work;
            let csv = format!(
                "metric,value\nn_symbols,{}\nn_k1mers,{}\nunique_edges,{}\nvertices,{}\nrecord_touches,{}\nsort_passes,{}\n",
                reads.n_symbols(),
                r.enumeration.k1mers,
                r.dedup.output,
                g.node_count(),
                w.total_touches(),
                w.total_passes()
            );
            (g, csv)
        }
        Mode::Parallel => {
            let (g, l) = par_biconstruct(&reads, cfg.k, cfg.p)?;
            let row = ComparisonRow {
                mode: "par",
                p: cfg.p,
                n_symbols: l.n_symbols,
                n_k1mers: l.n_k1mers,
                messages_sent: l.total_messages,
                // every edge comes from an adjacent pair in some read
                spurious_edges: 0,
            };
            (g, comparison_csv(&[row]))
        }
        Mode::External => {
            let (g, r) = ooc_biconstruct(&reads, cfg.k, &cfg.ext)?;
            let csv = format!(
                "{LEDGER_CSV_HEADER}\n{}\n{}\n{}\n",
                ledger_csv_row("edge_sort", &r.edge_sort, &cfg.ext),
                ledger_csv_row("vertex_sort", &r.vertex_sort, &cfg.ext),
                ledger_csv_row("total", &r.total(), &cfg.ext)
            );
            (g, csv)
        }
    };
    write(&cfg.output, &gfa_string(&g))?;
    if let Some(p) = &cfg.report {
        write(p, &report)?;
    }
    if let Some(p) = &cfg.graph_out {
        write_graph(&g, p)?;
    }
    Ok(())
}

fn simplify(a: SimplifyArgs) -> Result<()> {
    let outs: Vec<&PathBuf> = [Some(&a.output), a.report.as_ref(), a.graph_out.as_ref()]
        .into_iter()
        .flatten()
        .collect();
    distinct_paths(std::slice::from_ref(&a.graph), &outs);
    let g = read_graph(&a.graph)?;
    let strategy = match a.mode {
        Mode::Memory => RankStrategy::Sequential,
        Mode::Parallel => RankStrategy::Parallel { workers: a.ext.p },
        Mode::External => RankStrategy::OutOfCore(a.ext.config()),
    };
    let (s, r) = simplify_with(&g, &strategy)?;
    write(&a.output, &gfa_string(&s))?;
    if let Some(p) = &a.report {
        let csv = format!(
            "metric,value\nnodes_before,{}\nnodes_after,{}\nedges_before,{}\nedges_after,{}\nchains,{}\ninconsistent_edges,{}\nnode_reduction_pct,{:.2}\n",
            r.nodes_before,
            r.nodes_after,
            r.edges_before,
            r.edges_after,
            r.chains,
            r.inconsistent_edges,
            r.node_reduction()
        );
        write(p, &csv)?;
    }
    if let Some(p) = &a.graph_out {
        write_graph(&s, p)?;
    }
    Ok(())
}

fn load_any(path: &Path) -> Result<BiGraph> {
    let mut magic = [0u8; 4];
    let n = fs::File::open(path)
        .and_then(|mut f| f.read(&mut magic))
        .with_context(|| format!("reading {}", path.display()))?;
    if n == 4 && magic == GRAPH_MAGIC {
        Ok(read_graph(path)?)
    } else {
        Ok(read_gfa(path)?)
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Build(a) => build(RunConfig::from_args(a)),
        Cmd::Simplify(a) => simplify(a),
        Cmd::Stats { graph } => {
            print!("{}", GraphStats::of(&load_any(&graph)?).render());
            Ok(())
        }
        Cmd::CompareJa(a) => {
            if a.p == 0 {
                usage_error("-p must be at least 1".into());
            }
            let (reads, _) = read_sequences(&a.inputs)?;
            let csv = comparison_csv(&compare_ja(&reads, a.k, a.p)?);
            match a.output {
                Some(p) => write(&p, &csv),
                None => {
                    print!("{csv}");
                    Ok(())
                }
            }
        }
        Cmd::CleanSpill { spill_dir } => {
            let dir = spill_dir.unwrap_or_else(std::env::temp_dir);
            let n = clean_spill(&dir)?;
            println!("removed {n} spill files from {}", dir.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
