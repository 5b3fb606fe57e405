//! Command-line front end.
//!
//! Subcommands decompose a distribution loaded from a file (`run`), a
//! built-in gate (`gate`) or a seeded random draw from the simplex
//! (`random`). The decomposition is printed as a JSON object on stdout;
//! diagnostics go to stderr at the chosen verbosity level. Exit codes:
//! 0 on success (including an `Inaccurate` verdict), 1 on input errors,
//! 2 when the solver cannot certify a solution.

use std::io::Read;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::dist::{gate, random_simplex, Gate, JointDistribution};
use crate::finer::{fine_decompose, FineAtoms};
use crate::pipeline::{pid, run_modes, PidResult};
use crate::solver::Tolerances;
use crate::{Error, Result};

#[derive(Parser)]
#[command(
    name = "pid-maxent",
    version,
    about = "Maximum-entropy partial information decomposition for three discrete sources"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decompose a distribution read from a file (or stdin with '-').
    Run {
        /// Path to the distribution; lines of `t x y z p` or a JSON
        /// object mapping "t,x,y,z" to probabilities.
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Auto)]
        format: Format,
        #[command(flatten)]
        common: Common,
    },
    /// Decompose a built-in gate distribution.
    Gate {
        /// One of: xor-duplicate, xor-loses, xor-multicoal,
        /// and-duplicate, copy.
        name: String,
        /// Alphabet sizes for the copy gate.
        #[arg(long, num_args = 3, value_names = ["L", "M", "N"])]
        sizes: Option<Vec<usize>>,
        #[command(flatten)]
        common: Common,
    },
    /// Decompose a uniform draw from the simplex over a product space.
    Random {
        /// Alphabet sizes `T X Y Z`.
        #[arg(long, num_args = 4, value_names = ["T", "X", "Y", "Z"], required = true)]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Print the sampled distribution instead of decomposing it.
        #[arg(long)]
        dump: bool,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Auto,
    Tsv,
    Json,
}

#[derive(Args)]
struct Common {
    /// Primal/dual feasibility tolerance for an Optimal verdict.
    #[arg(long, default_value_t = 1e-7)]
    feastol: f64,
    /// Absolute duality-gap tolerance.
    #[arg(long, default_value_t = 1e-6)]
    abstol: f64,
    /// Relative duality-gap tolerance.
    #[arg(long, default_value_t = 1e-6)]
    reltol: f64,
    /// Relaxed feasibility tolerance for an Inaccurate verdict.
    #[arg(long = "feastol_inacc", default_value_t = 1e-3)]
    feastol_inacc: f64,
    #[arg(long = "abstol_inacc", default_value_t = 1e-4)]
    abstol_inacc: f64,
    #[arg(long = "reltol_inacc", default_value_t = 1e-4)]
    reltol_inacc: f64,
    #[arg(long = "max_iter", default_value_t = 100)]
    max_iter: u32,
    /// Also compute the eighteen fine lattice atoms.
    #[arg(long)]
    fine: bool,
    /// Solve the independent subproblems on a thread pool.
    #[arg(long)]
    parallel: bool,
    /// Diagnostics verbosity on stderr (0 silent .. 3 certificates).
    #[arg(long, default_value_t = 0)]
    level: u8,
}

impl Common {
    fn tolerances(&self) -> Tolerances {
        Tolerances {
            feastol: self.feastol,
            abstol: self.abstol,
            reltol: self.reltol,
            feastol_inacc: self.feastol_inacc,
            abstol_inacc: self.abstol_inacc,
            reltol_inacc: self.reltol_inacc,
            max_iter: self.max_iter,
        }
    }
}

/// Entry point used by the binary; returns the process exit code.
pub fn main() -> i32 {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::SolverFailed(_) => 2,
                _ => 1,
            }
        }
    }
}

fn execute(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Run { input, format, common } => {
            let d = load(&input, format)?;
            decompose_and_print(&d, &common)
        }
        Command::Gate { name, sizes, common } => {
            let sizes = sizes.map(|s| (s[0], s[1], s[2]));
            let d = gate(Gate::parse(&name, sizes)?)?;
            decompose_and_print(&d, &common)
        }
        Command::Random { sizes, seed, dump, common } => {
            let d = random_simplex(&sizes, seed)?;
            if dump {
                print!("{}", d.to_tsv());
                return Ok(0);
            }
            decompose_and_print(&d, &common)
        }
    }
}

fn load(path: &PathBuf, format: Format) -> Result<JointDistribution> {
    let (text, is_json_name) = if path.as_os_str() == "-" {
        let mut buf = String::new();
        std::io::stdin().read_to_string(&mut buf)?;
        (buf, false)
    } else {
        let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        (std::fs::read_to_string(path)?, is_json)
    };
    let json = match format {
        Format::Json => true,
        Format::Tsv => false,
        Format::Auto => is_json_name || text.trim_start().starts_with('{'),
    };
    if json {
        JointDistribution::parse_json(&text)
    } else {
        JointDistribution::parse_tsv(&text)
    }
}

fn decompose_and_print(d: &JointDistribution, common: &Common) -> Result<i32> {
    if common.level > 3 {
        return Err(Error::BadLevel(common.level));
    }
    let tols = common.tolerances();
    let res = pid(d, &tols, common.parallel)?;
    if common.level >= 1 {
        run_modes(&res, common.level, &mut std::io::stderr())?;
    }
    if res.status == crate::solver::SolveStatus::Failed {
        // report the salvaged (repaired) values but flag the run
        println!("{}", result_json(&res, None));
        let worst = res.reports.iter().map(|r| r.gap).fold(0.0, f64::max);
        eprintln!("error: SolverFailed: certificates exceed relaxed tolerances (worst gap {worst:.3e})");
        return Ok(2);
    }
    let fine = if common.fine {
        Some(fine_decompose(d, &res, &tols, common.parallel)?)
    } else {
        None
    };
    println!("{}", result_json(&res, fine.as_ref()));
    Ok(0)
}

/// Serialize a decomposition (and optional fine atoms) for stdout.
pub fn result_json(res: &PidResult, fine: Option<&FineAtoms>) -> serde_json::Value {
    let err = |k: usize| {
        let e = res.num_err(k);
        serde_json::json!([e[0], e[1], e[2]])
    };
    let mut obj = serde_json::json!({
        "CI": res.ci,
        "UIX": res.ui_x,
        "UIY": res.ui_y,
        "UIZ": res.ui_z,
        "UIXY": res.ui_xy,
        "UIXZ": res.ui_xz,
        "UIYZ": res.ui_yz,
        "SI": res.si,
        "Num_Err_I": err(0),
        "Num_Err_12": err(1),
        "Num_Err_13": err(2),
        "Num_Err_23": err(3),
    });
    if let Some(fine) = fine {
        let atoms: serde_json::Map<String, serde_json::Value> = fine
            .iter()
            .map(|(c, v)| (c.to_string(), serde_json::json!(v)))
            .collect();
        obj["atoms"] = serde_json::Value::Object(atoms);
    }
    obj
}
