//! Command-line front end for the energy-constrained prepare-and-measure
//! toolkit: per-figure sweeps, single-point queries, machine-readable output.

use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rayon::prelude::*;

use ecpm::analytic;
use ecpm::discrimination;
use ecpm::linalg::{ComplexMatrix, SubsystemShape};
use ecpm::quantum::{Channel, EnergyConstraint};
use ecpm::scenario;
use ecpm::seesaw::{self, SeesawSettings};
use ecpm::Error;

#[derive(Parser)]
#[command(name = "ecpm-cli", version, about = "Energy-constrained prepare-and-measure bounds")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Comma-separated energy bounds; default: 50 uniform points in [0.01, 0.49]
    #[arg(long, global = true, value_delimiter = ',')]
    omega_grid: Option<Vec<f64>>,
    /// Output file; default: stdout
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Seed for the seesaw restarts; identical seeds give byte-identical output
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker pool size; default: available parallelism
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Seesaw random restarts per point
    #[arg(long, global = true)]
    restarts: Option<usize>,
    /// Write every solved conic subproblem to this directory
    #[arg(long, global = true)]
    dump_sdp: Option<PathBuf>,
}

#[derive(Copy, Clone, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// Separable correlation bound 4 sqrt(omega (1 - omega)) per grid point
    ClassicalBound,
    /// Seesaw maximization of the correlation witness
    SeesawIcorr {
        /// Factor dimensions d_S,d_M of the shared state
        #[arg(long, value_delimiter = ',', default_values_t = [2usize, 2])]
        dims: Vec<usize>,
    },
    /// Closed-form family point at one energy bound, including the Kraus dump
    Analytic {
        #[arg(long)]
        omega: f64,
    },
    /// Adversarial guessing-probability lower bound
    GuessProb {
        /// Observed witness value: "sep-max" for the separable bound, or a number
        #[arg(long, default_value = "sep-max")]
        iexp: String,
        /// Input whose outcome the adversary guesses
        #[arg(long, default_value_t = 0)]
        xstar: u8,
        /// Factor dimensions d_S,d_M of the adversarial strategy
        #[arg(long, value_delimiter = ',', default_values_t = [2usize, 3])]
        dims: Vec<usize>,
    },
    /// Minimal deterministic-region correlator reachable with entanglement
    DetViolation,
    /// Entanglement-advantage bounds for channel discrimination
    Padv {
        /// Moment-relaxation order for the constrained-norm upper bound
        #[arg(long, default_value_t = 2)]
        order: usize,
    },
    /// Discrimination norms of one channel against the identity
    Norms {
        /// "family:<omega>" or "kraus:<file.json>"
        #[arg(long)]
        channel: String,
        /// Energy bound for the constrained variants of a Kraus-file channel
        #[arg(long)]
        omega: Option<f64>,
        /// Also constrain the energy of the channel output (default: true)
        #[arg(long, default_value_t = true)]
        ec_output_constraint: bool,
    },
}

#[derive(Clone, serde::Serialize)]
#[serde(untagged)]
enum Value {
    Num(f64),
    Text(String),
    Null,
}

struct Table {
    command: String,
    columns: Vec<&'static str>,
    rows: Vec<Vec<Value>>,
}

/// Format with 12 significant digits, plain decimal, trailing zeros trimmed.
fn fmt_sig(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let mag = x.abs().log10().floor() as i32;
    let decimals = (11 - mag).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl Table {
    fn write(&self, w: &mut dyn std::io::Write, format: Format) -> std::io::Result<()> {
        match format {
            Format::Csv => {
                writeln!(w, "{}", self.columns.join(","))?;
                for row in &self.rows {
                    let cells: Vec<String> = row
                        .iter()
                        .map(|v| match v {
                            Value::Num(x) => fmt_sig(*x),
                            Value::Text(s) => csv_escape(s),
                            Value::Null => String::new(),
                        })
                        .collect();
                    writeln!(w, "{}", cells.join(","))?;
                }
            }
            Format::Json => {
                let doc = serde_json::json!({
                    "command": self.command,
                    "columns": self.columns,
                    "rows": self.rows,
                });
                writeln!(w, "{}", serde_json::to_string_pretty(&doc)?)?;
            }
        }
        Ok(())
    }
}

fn default_grid() -> Vec<f64> {
    (0..50).map(|i| 0.01 + 0.48 * i as f64 / 49.0).collect()
}

fn settings(cli: &Cli, dims: &[usize]) -> Result<SeesawSettings, Error> {
    let mut s = SeesawSettings {
        seed: cli.seed,
        dims: SubsystemShape::new(dims.to_vec())?,
        ..SeesawSettings::default()
    };
    if let Some(r) = cli.restarts {
        s.restarts = r;
    }
    Ok(s)
}

/// Evaluate one grid point; `Err(Infeasible)` becomes a marked row, anything
/// else aborts the sweep.
fn sweep<F>(grid: &[f64], n_cols: usize, f: F) -> Result<Vec<Vec<Value>>, Error>
where
    F: Fn(f64) -> Result<Vec<Value>, Error> + Sync,
{
    grid.par_iter()
        .map(|&omega| {
            let mut row = vec![Value::Num(omega)];
            match f(omega) {
                Ok(mut vals) => {
                    row.append(&mut vals);
                    row.push(Value::Text("ok".into()));
                    Ok(row)
                }
                Err(Error::Infeasible(_)) => {
                    row.extend(std::iter::repeat_with(|| Value::Null).take(n_cols));
                    row.push(Value::Text("infeasible".into()));
                    Ok(row)
                }
                Err(e) => Err(e),
            }
        })
        .collect()
}

fn kraus_json(ch: &Channel) -> serde_json::Value {
    let kraus: Vec<Vec<Vec<[f64; 2]>>> = ch
        .kraus()
        .iter()
        .map(|k| {
            (0..k.rows())
                .map(|i| (0..k.cols()).map(|j| [k[(i, j)].re, k[(i, j)].im]).collect())
                .collect()
        })
        .collect();
    serde_json::json!({ "d_in": ch.d_in(), "d_out": ch.d_out(), "kraus": kraus })
}

fn load_kraus(path: &str) -> Result<Channel, Error> {
    #[derive(serde::Deserialize)]
    struct KrausFile {
        d_in: usize,
        d_out: usize,
        kraus: Vec<Vec<Vec<[f64; 2]>>>,
    }
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Domain(format!("reading {path}: {e}")))?;
    let file: KrausFile = serde_json::from_str(&text)
        .map_err(|e| Error::Domain(format!("parsing {path}: {e}")))?;
    let ops = file
        .kraus
        .iter()
        .map(|m| {
            if m.len() != file.d_out || m.iter().any(|r| r.len() != file.d_in) {
                return Err(Error::Dimension(format!(
                    "kraus operator shape does not match d_out={} x d_in={}",
                    file.d_out, file.d_in
                )));
            }
            Ok(ComplexMatrix::from_fn(file.d_out, file.d_in, |i, j| {
                Complex64::new(m[i][j][0], m[i][j][1])
            }))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Channel::from_kraus(ops)
}

fn run(cli: &Cli) -> Result<Table, Error> {
    let grid = cli.omega_grid.clone().unwrap_or_else(default_grid);
    for &omega in &grid {
        if !(0.0..0.5).contains(&omega) {
            return Err(Error::Domain(format!("omega {omega} outside [0, 0.5)")));
        }
    }
    match &cli.cmd {
        Cmd::ClassicalBound => Ok(Table {
            command: "classical-bound".into(),
            columns: vec!["omega", "classical_bound", "status"],
            rows: sweep(&grid, 1, |omega| {
                Ok(vec![Value::Num(scenario::classical_bound(omega)?)])
            })?,
        }),
        Cmd::SeesawIcorr { dims } => {
            let s = settings(cli, dims)?;
            Ok(Table {
                command: "seesaw-icorr".into(),
                columns: vec!["omega", "seesaw_icorr", "classical_bound", "family_icorr", "status"],
                rows: sweep(&grid, 3, |omega| {
                    let res = seesaw::maximize_icorr(omega, &s)?;
                    let (family, _) = analytic::icorr_family(omega)?;
                    Ok(vec![
                        Value::Num(res.value),
                        Value::Num(scenario::classical_bound(omega)?),
                        Value::Num(family),
                    ])
                })?,
            })
        }
        Cmd::Analytic { omega } => {
            let (icorr, p_star) = analytic::icorr_family(*omega)?;
            let fp = analytic::make_family_point(*omega, p_star)?;
            let (a, b, q) = fp.abq();
            let ch = analytic::channel_from_family(&fp)?;
            Ok(Table {
                command: "analytic".into(),
                columns: vec!["omega", "p_star", "a", "b", "q", "icorr", "kraus", "status"],
                rows: vec![vec![
                    Value::Num(*omega),
                    Value::Num(p_star),
                    Value::Num(a),
                    Value::Num(b),
                    Value::Num(q),
                    Value::Num(icorr),
                    Value::Text(kraus_json(&ch).to_string()),
                    Value::Text("ok".into()),
                ]],
            })
        }
        Cmd::GuessProb { iexp, xstar, dims } => {
            let s = settings(cli, dims)?;
            let fixed = match iexp.as_str() {
                "sep-max" => None,
                v => Some(v.parse::<f64>().map_err(|_| {
                    Error::Domain(format!("--iexp expects 'sep-max' or a number, got '{v}'"))
                })?),
            };
            let xstar = *xstar;
            Ok(Table {
                command: "guess-prob".into(),
                columns: vec!["omega", "iexp", "pguess_lower", "hmin_upper", "status"],
                rows: sweep(&grid, 3, |omega| {
                    let iexp = match fixed {
                        Some(v) => v,
                        None => scenario::classical_bound(omega)?,
                    };
                    let res = seesaw::guessing_probability_lower(omega, iexp, xstar, &s)?;
                    Ok(vec![
                        Value::Num(iexp),
                        Value::Num(res.value),
                        Value::Num(-res.value.log2()),
                    ])
                })?,
            })
        }
        Cmd::DetViolation => {
            let s = settings(cli, &[2, 2])?;
            Ok(Table {
                command: "det-violation".into(),
                columns: vec!["omega", "min_e1", "idet_bound", "status"],
                rows: sweep(&grid, 2, |omega| {
                    let res = seesaw::minimize_e1_deterministic(omega, &s)?;
                    Ok(vec![Value::Num(res.value), Value::Num(scenario::idet_bound(omega)?)])
                })?,
            })
        }
        Cmd::Padv { order } => {
            let s = settings(cli, &[2, 2])?;
            let order = *order;
            Ok(Table {
                command: "padv".into(),
                columns: vec!["omega", "p", "padv_upper", "padv_ec_lower", "cap", "status"],
                rows: sweep(&grid, 4, |omega| {
                    let pt = discrimination::padv_point(omega, order, &s)?;
                    Ok(vec![
                        Value::Num(pt.p),
                        Value::Num(pt.upper),
                        Value::Num(pt.ec_lower),
                        Value::Num(discrimination::PADV_CAP),
                    ])
                })?,
            })
        }
        Cmd::Norms { channel, omega, ec_output_constraint } => {
            let s = settings(cli, &[2, 2])?;
            let (ch, fp, ec_omega) = match channel.split_once(':') {
                Some(("family", w)) => {
                    let w: f64 = w
                        .parse()
                        .map_err(|_| Error::Domain(format!("bad family omega '{w}'")))?;
                    let (_, p_star) = analytic::icorr_family(w)?;
                    let fp = analytic::make_family_point(w, p_star)?;
                    let ch = analytic::channel_from_family(&fp)?;
                    (ch, Some(fp), Some(w))
                }
                Some(("kraus", path)) => (load_kraus(path)?, None, *omega),
                _ => {
                    return Err(Error::Domain(format!(
                        "--channel expects 'family:<omega>' or 'kraus:<file>', got '{channel}'"
                    )))
                }
            };
            let dia = discrimination::diamond_norm_vs_identity(&ch)?;
            let itn = seesaw::induced_trace_norm_lower(&ch, None, &s)?.value;
            let (dia_ec, itn_ec, lasserre_ec) = match ec_omega {
                Some(w) if ch.d_in() == 2 && ch.d_out() == 2 => {
                    let ec = EnergyConstraint::ground_zero(2, w)?;
                    let itn_ec = seesaw::induced_trace_norm_lower(&ch, Some(&ec), &s)?.value;
                    let up = discrimination::lasserre_itn_upper(&ch, &ec, 2, *ec_output_constraint)?;
                    let dia_ec = match &fp {
                        Some(fp) => Value::Num(discrimination::diamond_norm_ec_lower(fp)?),
                        None => Value::Null,
                    };
                    (dia_ec, Value::Num(itn_ec), Value::Num(up))
                }
                _ => (Value::Null, Value::Null, Value::Null),
            };
            Ok(Table {
                command: "norms".into(),
                columns: vec![
                    "channel",
                    "diamond",
                    "itn_lower",
                    "diamond_ec_lower",
                    "itn_ec_lower",
                    "itn_ec_upper",
                    "status",
                ],
                rows: vec![vec![
                    Value::Text(channel.clone()),
                    Value::Num(dia),
                    Value::Num(itn),
                    dia_ec,
                    itn_ec,
                    lasserre_ec,
                    Value::Text("ok".into()),
                ]],
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    if let Some(jobs) = cli.jobs {
        if rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global().is_err() {
            eprintln!("warning: worker pool already initialized; --jobs ignored");
        }
    }
    if let Some(dir) = &cli.dump_sdp {
        if let Err(e) = std::fs::create_dir_all(dir) {
            eprintln!("error: cannot create dump directory {}: {e}", dir.display());
            return ExitCode::from(1);
        }
        ecpm::sdp::set_dump_dir(Some(dir.clone()));
    }
    let table = match run(&cli) {
        Ok(t) => t,
        Err(Error::Domain(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(1);
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let result = match &cli.output {
        Some(path) => std::fs::File::create(path)
            .and_then(|mut f| table.write(&mut f, cli.format)),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            let r = table.write(&mut lock, cli.format);
            let _ = lock.flush();
            r
        }
    };
    if let Err(e) = result {
        eprintln!("error: writing output: {e}");
        return ExitCode::from(2);
    }
    ExitCode::SUCCESS
}
