use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use squeezon::io::{self, Metadata};
use squeezon::oracle::{oracle_p1_scan, solve_steady_state, Frame, OracleOptions, SpectroscopyOptions};
use squeezon::params::{load_scenario_file, parse_quantity, reduced_detuning, Range, Scenario};
use squeezon::reduced::{evaluate_point, spectrum_scan, ModelOptions, ScanOptions, SpectrumScan};
use squeezon::semiclassical::{classical_response, drive_at, BranchHint};
use squeezon::spectroscopy::{fit_scan, heating_report, InitPolicy};
use squeezon::{Error, Result};

#[derive(Parser)]
#[command(name = "squeezon", version, about = "Quantum heating of a qubit by a squeezed, driven Kerr resonator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum BranchArg {
    Auto,
    L,
    H,
}

impl From<BranchArg> for BranchHint {
    fn from(b: BranchArg) -> Self {
        match b {
            BranchArg::Auto => BranchHint::Auto,
            BranchArg::L => BranchHint::L,
            BranchArg::H => BranchHint::H,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Observable {
    #[value(name = "P1", alias = "p1")]
    P1,
    Moments,
}

#[derive(Clone, Copy, ValueEnum)]
enum FrameArg {
    /// Frame rotating at the pump frequency, rotating-wave coupling.
    Rotating,
    /// Lab frame with the full Rabi coupling.
    Lab,
}

#[derive(Subcommand)]
enum Command {
    /// Check a scenario file and print the resolved parameters and their hash.
    Validate { config: PathBuf },
    /// Bare Duffing response (every root) versus reduced detuning Ω at the
    /// scenario's pump amplitude.
    Response {
        config: PathBuf,
        /// Ω range, plain numbers `start:stop:count`.
        #[arg(long, default_value = "0:4:81")]
        omega_range: String,
        /// Pump amplitude; defaults to the scenario pump.
        #[arg(long)]
        amplitude: Option<String>,
        #[arg(long, default_value = "response.csv")]
        out: PathBuf,
    },
    /// Stability diagram over (Ω, ε_d): the stable roots of every cell.
    Stability {
        config: PathBuf,
        #[arg(long, default_value = "0:4:81")]
        omega_range: String,
        /// Pump amplitude range with units, e.g. `0 MHz:10 MHz:81`.
        #[arg(long)]
        amp_range: String,
        #[arg(long, default_value = "stability.csv")]
        out: PathBuf,
    },
    /// Stark coefficients and field-dependent dispersive quantities at the
    /// scenario drives.
    Dispersive {
        config: PathBuf,
        #[arg(long, value_enum, default_value = "auto")]
        branch: BranchArg,
        #[arg(long, default_value = "dispersive.csv")]
        out: PathBuf,
    },
    /// Squeezing parameters versus pump frequency.
    Squeezing {
        config: PathBuf,
        /// Pump frequency range with units, e.g. `6.43 GHz:6.45 GHz:201`.
        #[arg(long)]
        omega_p_sweep: String,
        #[arg(long, value_enum, default_value = "auto")]
        branch: BranchArg,
        #[arg(long, default_value = "squeezing.csv")]
        out: PathBuf,
    },
    /// Analytical P(|1⟩) over spectroscopy frequency and pump amplitude.
    Spectrum {
        config: PathBuf,
        #[arg(long)]
        ws_range: String,
        /// Pump amplitudes with units; defaults to the scenario pump alone.
        #[arg(long)]
        pump_range: Option<String>,
        #[arg(long, value_enum, default_value = "auto")]
        branch: BranchArg,
        #[arg(long, default_value = "spectrum.csv")]
        out: PathBuf,
    },
    /// Brute-force master-equation results.
    Oracle {
        config: PathBuf,
        #[arg(long, value_enum)]
        observable: Observable,
        /// Spectroscopy frequencies for P1.
        #[arg(long)]
        ws_range: Option<String>,
        #[arg(long, default_value_t = 30)]
        n_fock: usize,
        /// Frame for the moments steady state.
        #[arg(long, value_enum, default_value = "rotating")]
        frame: FrameArg,
        /// Settling time before averaging for P1, in seconds.
        #[arg(long)]
        settle: Option<f64>,
        /// Also write the diagonal Fock distribution of the pump-only steady state.
        #[arg(long)]
        fock_out: Option<PathBuf>,
        #[arg(long, default_value = "oracle.csv")]
        out: PathBuf,
    },
    /// Three-Lorentzian fits and the heating report for a spectrum CSV.
    Analyze {
        spectrum: PathBuf,
        /// `fits.csv,heating.csv`
        #[arg(long, default_value = "fits.csv,heating.csv")]
        out: String,
        /// Pump frequency for the effective temperature; defaults to the
        /// scenario recorded in the spectrum sidecar.
        #[arg(long)]
        pump_frequency: Option<String>,
    },
    /// Spectrum scan, fits and heating report in one run.
    Pipeline {
        config: PathBuf,
        #[arg(long)]
        ws_range: String,
        #[arg(long)]
        pump_range: Option<String>,
        #[arg(long, value_enum, default_value = "auto")]
        branch: BranchArg,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        // the reader of stdout went away, e.g. `validate | head`
        Err(Error::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Validate { config } => validate(&config),
        Command::Response {
            config,
            omega_range,
            amplitude,
            out,
        } => response(&config, &omega_range, amplitude.as_deref(), &out),
        Command::Stability {
            config,
            omega_range,
            amp_range,
            out,
        } => stability(&config, &omega_range, &amp_range, &out),
        Command::Dispersive { config, branch, out } => dispersive(&config, branch.into(), &out),
        Command::Squeezing {
            config,
            omega_p_sweep,
            branch,
            out,
        } => squeezing(&config, &omega_p_sweep, branch.into(), &out),
        Command::Spectrum {
            config,
            ws_range,
            pump_range,
            branch,
            out,
        } => {
            let scenario = load_scenario_file(&config)?;
            spectrum(&scenario, &ws_range, pump_range.as_deref(), branch.into(), &out).map(|_| ())
        }
        Command::Oracle {
            config,
            observable,
            ws_range,
            n_fock,
            frame,
            settle,
            fock_out,
            out,
        } => oracle(&config, observable, ws_range.as_deref(), n_fock, frame, settle, fock_out.as_deref(), &out),
        Command::Analyze {
            spectrum,
            out,
            pump_frequency,
        } => {
            let (fits, heating) = split_outputs(&out)?;
            let pump_frequency = pump_frequency.as_deref().map(parse_quantity).transpose()?;
            analyze(&spectrum, pump_frequency, &fits, &heating)
        }
        Command::Pipeline {
            config,
            ws_range,
            pump_range,
            branch,
            out_dir,
        } => {
            let scenario = load_scenario_file(&config)?;
            let spectrum_csv = out_dir.join("spectrum.csv");
            spectrum(&scenario, &ws_range, pump_range.as_deref(), branch.into(), &spectrum_csv)?;
            analyze(
                &spectrum_csv,
                Some(scenario.pump().frequency),
                &out_dir.join("fits.csv"),
                &out_dir.join("heating.csv"),
            )
        }
    }
}

fn split_outputs(out: &str) -> Result<(PathBuf, PathBuf)> {
    match out.split(',').collect::<Vec<_>>().as_slice() {
        [fits, heating] => Ok((PathBuf::from(fits.trim()), PathBuf::from(heating.trim()))),
        _ => Err(Error::Config(format!("--out expects fits.csv,heating.csv, got '{out}'"))),
    }
}

fn wrote(path: &Path, rows: usize) {
    println!("wrote {} ({rows} rows)", path.display());
}

fn validate(config: &Path) -> Result<()> {
    let scenario = load_scenario_file(config)?;
    let mut out = std::io::stdout().lock();
    writeln!(out, "scenario_hash {}", scenario.hash())?;
    writeln!(out, "params_hash {}", scenario.params.hash())?;
    writeln!(out, "{}", serde_json::to_string_pretty(&scenario)?)?;
    Ok(())
}

fn response(config: &Path, omega_range: &str, amplitude: Option<&str>, out: &Path) -> Result<()> {
    let scenario = load_scenario_file(config)?;
    let params = &scenario.params;
    let amp = match amplitude {
        Some(a) => parse_quantity(a)?,
        None => scenario.pump().amplitude.norm(),
    };
    let omegas = Range::parse_plain(omega_range)?.values();
    let rows: Vec<io::ResponseRow> = omegas
        .iter()
        .flat_map(|&w| io::response_rows(w, amp, &classical_response(params, &drive_at(params, w, amp)), false))
        .collect();
    let meta = Metadata::new("response", Some(&scenario))
        .with_setting("omega_range", omega_range)
        .with_setting("amplitude", amp);
    io::write_table(out, &rows, &meta)?;
    wrote(out, rows.len());
    Ok(())
}

fn stability(config: &Path, omega_range: &str, amp_range: &str, out: &Path) -> Result<()> {
    let scenario = load_scenario_file(config)?;
    let params = &scenario.params;
    let omegas = Range::parse_plain(omega_range)?.values();
    let amps = amp_range.parse::<Range>()?.values();
    let rows: Vec<io::ResponseRow> = omegas
        .par_iter()
        .flat_map_iter(|&w| {
            amps.iter()
                .flat_map(move |&a| io::response_rows(w, a, &classical_response(params, &drive_at(params, w, a)), true))
        })
        .collect();
    let meta = Metadata::new("stability", Some(&scenario))
        .with_setting("omega_range", omega_range)
        .with_setting("amp_range", amp_range);
    io::write_table(out, &rows, &meta)?;
    wrote(out, rows.len());
    Ok(())
}

fn dispersive(config: &Path, branch: BranchHint, out: &Path) -> Result<()> {
    let scenario = load_scenario_file(config)?;
    let options = ModelOptions::default();
    let point = evaluate_point(&scenario.params, scenario.pump(), scenario.spectroscopy(), branch, &options)?;
    let rows = io::dispersive_rows(&point);
    let meta = Metadata::new("dispersive", Some(&scenario))
        .with_tolerances(options)
        .with_setting("branch", point.pointer.branch)
        .with_setting("pointer_residual", point.pointer.residual);
    io::write_table(out, &rows, &meta)?;
    wrote(out, rows.len());
    Ok(())
}

fn squeezing(config: &Path, sweep: &str, branch: BranchHint, out: &Path) -> Result<()> {
    let scenario = load_scenario_file(config)?;
    let options = ModelOptions::default();
    let quiet = scenario.spectroscopy().with_amplitude(0.0);
    let rows: Vec<io::SqueezingRow> = sweep
        .parse::<Range>()?
        .values()
        .par_iter()
        .map(|&wp| {
            let pump = scenario.pump().with_frequency(wp);
            io::SqueezingRow::from_point(wp, &evaluate_point(&scenario.params, &pump, &quiet, branch, &options))
        })
        .collect();
    let meta = Metadata::new("squeezing", Some(&scenario))
        .with_tolerances(options)
        .with_setting("omega_p_sweep", sweep);
    io::write_table(out, &rows, &meta)?;
    wrote(out, rows.len());
    Ok(())
}

fn pump_amplitudes(scenario: &Scenario, pump_range: Option<&str>) -> Result<Vec<f64>> {
    match pump_range {
        Some(r) => Ok(r.parse::<Range>()?.values()),
        None => Ok(vec![scenario.pump().amplitude.norm()]),
    }
}

fn spectrum(
    scenario: &Scenario,
    ws_range: &str,
    pump_range: Option<&str>,
    branch: BranchHint,
    out: &Path,
) -> Result<SpectrumScan> {
    let ws = ws_range.parse::<Range>()?.values();
    let amps = pump_amplitudes(scenario, pump_range)?;
    let options = ScanOptions {
        branch,
        ..ScanOptions::default()
    };
    let scan = spectrum_scan(&scenario.params, scenario.pump(), scenario.spectroscopy(), &ws, &amps, &options);
    let rows = io::spectrum_rows(&scan);
    let failures: usize = scan.columns.iter().map(|c| c.failures).sum();
    let meta = Metadata::new("spectrum", Some(scenario))
        .with_tolerances(options)
        .with_setting("ws_range", ws_range)
        .with_setting("pump_range", pump_range)
        .with_setting("reduced_detuning", reduced_detuning(&scenario.params, scenario.pump()))
        .with_setting("failed_points", failures);
    io::write_table(out, &rows, &meta)?;
    wrote(out, rows.len());
    if failures > 0 {
        eprintln!("{failures} points failed; see the error column");
    }
    Ok(scan)
}

#[allow(clippy::too_many_arguments)]
fn oracle(
    config: &Path,
    observable: Observable,
    ws_range: Option<&str>,
    n_fock: usize,
    frame: FrameArg,
    settle: Option<f64>,
    fock_out: Option<&Path>,
    out: &Path,
) -> Result<()> {
    let scenario = load_scenario_file(config)?;
    let params = &scenario.params;
    let pump = scenario.pump();
    let options = OracleOptions {
        n_fock,
        ..OracleOptions::default()
    };
    let meta = Metadata::new("oracle", Some(&scenario)).with_tolerances(options);
    let pump_state = match observable {
        Observable::P1 => {
            let ws_range = ws_range.ok_or_else(|| Error::Config("--observable P1 needs --ws-range".into()))?;
            let ws = ws_range.parse::<Range>()?.values();
            let spec_options = SpectroscopyOptions {
                settle,
                oracle: options,
                ..SpectroscopyOptions::default()
            };
            let spectrum = oracle_p1_scan(params, pump, scenario.spectroscopy(), &ws, &spec_options)?;
            let rows = io::oracle_p1_rows(pump.amplitude.norm(), &spectrum);
            let meta = meta
                .with_setting("observable", "P1")
                .with_setting("frame", Frame::Rotating(pump.frequency))
                .with_setting("rwa", spectrum.rwa)
                .with_setting("n_fock", spectrum.space.n_fock)
                .with_setting("settle", settle)
                .with_setting("samples", spec_options.samples)
                .with_setting("ws_range", ws_range);
            io::write_table(out, &rows, &meta)?;
            wrote(out, rows.len());
            spectrum.pump_state
        }
        Observable::Moments => {
            let frame = match frame {
                FrameArg::Rotating => Frame::Rotating(pump.frequency),
                FrameArg::Lab => Frame::Lab,
            };
            let state = solve_steady_state(params, std::slice::from_ref(pump), frame, &options)?;
            let rows = io::moment_rows(&state);
            let meta = meta
                .with_setting("observable", "moments")
                .with_setting("drives", "pump only")
                .with_setting("frame", frame)
                .with_setting("rwa", state.rwa)
                .with_setting("bimodal", state.bimodal)
                .with_setting("escalations", &state.escalations);
            io::write_table(out, &rows, &meta)?;
            wrote(out, rows.len());
            state
        }
    };
    if let Some(path) = fock_out {
        let rows = io::fock_rows(&pump_state.fock);
        let meta = Metadata::new("oracle-fock", Some(&scenario))
            .with_tolerances(options)
            .with_setting("frame", pump_state.frame)
            .with_setting("bimodal", pump_state.bimodal);
        io::write_table(path, &rows, &meta)?;
        wrote(path, rows.len());
    }
    Ok(())
}

fn analyze(spectrum_csv: &Path, pump_frequency: Option<f64>, fits_csv: &Path, heating_csv: &Path) -> Result<()> {
    let rows: Vec<io::SpectrumRow> = io::read_csv(spectrum_csv)?;
    let scan = io::scan_from_rows(&rows)?;
    let source = io::read_metadata(spectrum_csv).ok();
    let scenario = source.as_ref().and_then(|m| m.scenario.clone());
    let pump_frequency = pump_frequency
        .or_else(|| scenario.as_ref().map(|s| s.pump().frequency))
        .ok_or_else(|| {
            Error::Config("no pump frequency: pass --pump-frequency or keep the spectrum sidecar".into())
        })?;

    let fits = fit_scan(&scan, &InitPolicy::default());
    let meta = Metadata::new("analyze", scenario.as_ref())
        .with_setting("source", spectrum_csv.display().to_string())
        .with_setting("source_hash", source.as_ref().and_then(|m| m.scenario_hash.clone()))
        .with_setting("flag_relative_error", squeezon::spectroscopy::FLAG_RELATIVE_ERROR)
        .with_setting("pump_frequency", pump_frequency);
    let fit_rows = io::fit_rows(&fits);
    io::write_table(fits_csv, &fit_rows, &meta)?;
    wrote(fits_csv, fit_rows.len());

    let report = heating_report(&fits, pump_frequency)?;
    let heating = io::heating_rows(&report);
    io::write_table(heating_csv, &heating, &meta)?;
    wrote(heating_csv, heating.len());
    for row in &report.rows {
        println!(
            "pump {:.6e}  ratio {:.4} ± {:.4}  r {:.4}  T_eff {:.4e} K{}",
            row.pump_amplitude,
            row.ratio,
            row.ratio_sigma,
            row.r_inferred,
            row.t_eff,
            if row.flagged { "  [flagged]" } else { "" }
        );
    }
    Ok(())
}
