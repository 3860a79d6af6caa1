//! `solarpump` command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 configuration or file error,
//! 3 numeric failure.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use solarpump::config::{gain_list, parse_config_file, parse_gain_range, Config};
use solarpump::csv_out::{self, num, AngleRow, Table};
use solarpump::geometry::{
    declination, optimal_orientation, solar_azimuth, zenith_and_elevation, SunPosition,
    TrackerOrientation,
};
use solarpump::lti::{
    default_grid, error_constants, frequency_response, log_grid, root_locus, routh_table,
    ss_error_vs_gain, stability_margins, step_metrics, step_response, step_response_auto,
    suggest_t_end, Complex64, ErrorKind, StepTrace, TransferFunction,
};
use solarpump::mppt::{mppt_run, Algorithm, MpptState, PoVariant};
use solarpump::plants::Preset;
use solarpump::pv::{find_mpp, iv_curve, voltage_grid};
use solarpump::report::{render_text, report_table, run_validation_report, REGISTRY_IDS};
use solarpump::sim::run_scenario;
use solarpump::tracking::{tracking_sim, TrackerSetup};
use solarpump::Error;

#[derive(Parser, Debug)]
#[command(
    name = "solarpump",
    version,
    about = "Solar-tracked PV water pumping: simulation and control analysis"
)]
struct Cli {
    /// Configuration file with [scenario], [pv] and [analysis] sections.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for CSV output; CSV goes to standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// I-V and P-V curve of the PV array (`v,i,p`).
    PvCurve(PvArgs),
    /// Sun and tracker angles over a day (`n,ST,delta,...`).
    SolarAngles(AngleArgs),
    /// LDR tracking along the scenario sun path.
    TrackSim(TrackArgs),
    /// MPPT trajectory against the PV array (`iter,v_ref,i,p`).
    MpptRun(MpptArgs),
    /// Transfer-function analyses.
    #[command(after_help = preset_help())]
    Tf {
        #[command(subcommand)]
        action: TfAction,
    },
    /// Whole-system scenario.
    Scenario {
        #[command(subcommand)]
        action: ScenarioAction,
    },
    /// Recompute every registered published figure and compare.
    #[command(after_long_help = registry_help())]
    Validate,
}

#[derive(Args, Debug)]
struct PvArgs {
    /// Irradiance, W/m²; overrides the config.
    #[arg(long)]
    irradiance: Option<f64>,
    /// Cell temperature, K; overrides the config.
    #[arg(long)]
    temp: Option<f64>,
    /// Grid points from 0 to the open-circuit voltage.
    #[arg(long, default_value_t = 200)]
    points: usize,
}

#[derive(Args, Debug)]
struct AngleArgs {
    /// Latitude, degrees.
    #[arg(long, default_value_t = 35.0, allow_negative_numbers = true)]
    latitude: f64,
    /// Day of the year.
    #[arg(long, default_value_t = 172)]
    day: u32,
    /// First hour angle, degrees.
    #[arg(long, default_value_t = -90.0, allow_negative_numbers = true)]
    st_from: f64,
    /// Last hour angle, degrees.
    #[arg(long, default_value_t = 90.0, allow_negative_numbers = true)]
    st_to: f64,
    #[arg(long, default_value_t = 15.0)]
    st_step: f64,
    /// Fixed tracker elevation; with --ta replaces the solved orientation.
    #[arg(long, requires = "ta", allow_negative_numbers = true)]
    te: Option<f64>,
    #[arg(long, requires = "te", allow_negative_numbers = true)]
    ta: Option<f64>,
    /// Target incidence angle for the solved orientation.
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    /// Target incidence direction for the solved orientation.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    beta: f64,
}

#[derive(Args, Debug)]
struct TrackArgs {
    /// Sampling interval along the sun path, s; defaults to the tracker period.
    #[arg(long)]
    interval: Option<f64>,
    /// Starting tracker elevation and azimuth, degrees.
    #[arg(long, num_args = 2, value_names = ["TE", "TA"])]
    start: Option<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum AlgoArg {
    Po,
    PoPrinted,
    Ic,
}

#[derive(Args, Debug)]
struct MpptArgs {
    #[arg(long, value_enum, default_value_t = AlgoArg::Po)]
    algo: AlgoArg,
    #[arg(long, default_value_t = 200)]
    steps: usize,
    /// Perturbation step, V.
    #[arg(long, default_value_t = 0.5)]
    dv: f64,
    /// Initial reference voltage, V.
    #[arg(long, default_value_t = 20.0)]
    v_init: f64,
    #[arg(long)]
    irradiance: Option<f64>,
    #[arg(long)]
    temp: Option<f64>,
}

#[derive(Args, Debug, Clone)]
struct SystemArgs {
    /// Named system.
    #[arg(long, value_parser = parse_preset)]
    preset: Option<Preset>,
    /// Explicit system, `num: c_n ... c_0 / den: d_m ... d_0`.
    #[arg(long, value_parser = parse_tf, conflicts_with = "preset")]
    tf: Option<TransferFunction>,
    /// Loop gain applied to the system.
    #[arg(long, allow_negative_numbers = true)]
    gain: Option<f64>,
    /// Analyse the unity-feedback closed loop.
    #[arg(long)]
    closed: bool,
    /// Integration step, s.
    #[arg(long)]
    dt: Option<f64>,
    /// Simulated time, s.
    #[arg(long)]
    t_end: Option<f64>,
    /// Gain sweep `start:stop:count`, log-spaced.
    #[arg(long, value_parser = parse_gain_range)]
    gains: Option<(f64, f64, usize)>,
}

#[derive(Subcommand, Debug)]
enum TfAction {
    /// Poles, zeros, DC gain, stability, step metrics and margins.
    Analyze(SystemArgs),
    /// Unit-step response (`t,y`).
    Step(SystemArgs),
    /// Frequency response (`omega,mag_db,phase_deg`) of the open loop.
    Bode(SystemArgs),
    /// Closed-loop poles across the gain sweep.
    Rlocus(SystemArgs),
    /// Routh table of the characteristic polynomial.
    Routh(SystemArgs),
    /// Error constants and the gains meeting e = 0.1 and e = 0.01.
    Errors(SystemArgs),
}

#[derive(Subcommand, Debug)]
enum ScenarioAction {
    /// Run the configured scenario.
    Run,
}

fn parse_preset(s: &str) -> Result<Preset, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_tf(s: &str) -> Result<TransferFunction, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn preset_help() -> String {
    let mut s = String::from("Presets (--preset):\n");
    for p in Preset::ALL {
        let _ = writeln!(s, "  {:<16} {}", p.id(), p.description());
    }
    s
}

fn registry_help() -> String {
    let mut s = String::from("Registry entries:\n");
    for id in REGISTRY_IDS {
        let _ = writeln!(s, "  {id}");
    }
    s
}

enum Failure {
    Usage(String),
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

type CliResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numeric() { 3 } else { 2 })
        }
    }
}

struct Ctx {
    config: Config,
    out: Option<PathBuf>,
}

impl Ctx {
    /// Writes a table to `<out>/<name>` or to standard output.
    fn emit(&self, table: &Table, name: &str) -> Result<(), Error> {
        match &self.out {
            Some(dir) => {
                std::fs::create_dir_all(dir).map_err(|source| Error::Io {
                    path: dir.clone(),
                    source,
                })?;
                table.emit(&dir.join(name))
            }
            None => table.emit(Path::new("-")),
        }
    }
}

fn run(cli: Cli) -> CliResult {
    let config = match &cli.config {
        Some(p) => parse_config_file(p)?,
        None => Config::default(),
    };
    let ctx = Ctx {
        config,
        out: cli.out,
    };
    match cli.command {
        Command::PvCurve(a) => pv_curve(&ctx, &a),
        Command::SolarAngles(a) => solar_angles(&ctx, &a),
        Command::TrackSim(a) => track_sim(&ctx, &a),
        Command::MpptRun(a) => mppt(&ctx, &a),
        Command::Tf { action } => tf(&ctx, action),
        Command::Scenario {
            action: ScenarioAction::Run,
        } => scenario(&ctx),
        Command::Validate => validate(&ctx),
    }
}

fn pv_settings(
    ctx: &Ctx,
    irradiance: Option<f64>,
    temp: Option<f64>,
) -> solarpump::config::PvSettings {
    let mut s = ctx.config.pv;
    if let Some(g) = irradiance {
        s.irradiance = g;
    }
    if let Some(t) = temp {
        s.cell_temp_k = t;
    }
    s
}

fn pv_curve(ctx: &Ctx, a: &PvArgs) -> CliResult {
    let ap = pv_settings(ctx, a.irradiance, a.temp).array();
    ap.validate()?;
    let curve = iv_curve(&ap, &voltage_grid(&ap, a.points)?)?;
    for (v, why) in &curve.failures {
        eprintln!("warning: skipped V = {v}: {why}");
    }
    ctx.emit(&csv_out::iv_table(&curve), "iv_curve.csv")?;
    let mpp = find_mpp(&ap)?;
    eprintln!(
        "MPP: V = {} V, I = {} A, P = {} W",
        num(mpp.v),
        num(mpp.i),
        num(mpp.p)
    );
    Ok(())
}

fn solar_angles(ctx: &Ctx, a: &AngleArgs) -> CliResult {
    if a.st_step.is_nan() || a.st_step <= 0.0 || a.st_to < a.st_from {
        return Err(Failure::Usage(
            "hour-angle range needs st_step > 0 and st_from ≤ st_to".into(),
        ));
    }
    if !(1..=366).contains(&a.day) {
        return Err(Failure::Usage(format!(
            "day must lie in 1..=366, got {}",
            a.day
        )));
    }
    let delta = declination(a.day);
    let n_rows = ((a.st_to - a.st_from) / a.st_step + 1e-9).floor() as usize + 1;
    let mut rows = Vec::with_capacity(n_rows);
    for k in 0..n_rows {
        let st = a.st_from + k as f64 * a.st_step;
        let (theta_z, theta_e) = zenith_and_elevation(a.latitude, delta, st)?;
        let sun = SunPosition::new(theta_e, solar_azimuth(a.latitude, delta, st))?;
        let tracker = match (a.te, a.ta) {
            (Some(te), Some(ta)) => TrackerOrientation::new(te, ta),
            _ => optimal_orientation(&sun, a.alpha, a.beta)?.orientation,
        };
        rows.push(AngleRow {
            n: a.day,
            st,
            delta,
            theta_e,
            theta_z,
            sun,
            tracker,
        });
    }
    ctx.emit(&csv_out::angle_table(&rows), "solar_angles.csv")?;
    Ok(())
}

fn track_sim(ctx: &Ctx, a: &TrackArgs) -> CliResult {
    let sc = &ctx.config.scenario;
    let interval = a.interval.unwrap_or(sc.tracker_period_s);
    if interval.is_nan() || interval <= 0.0 {
        return Err(Failure::Usage("interval must be positive".into()));
    }
    let n = (sc.duration_s / interval).floor() as usize + 1;
    let path: Vec<_> = (0..n)
        .map(|k| {
            let t = k as f64 * interval;
            (sc.sun_at(t), sc.irradiance_at(t))
        })
        .collect();
    let mut setup = TrackerSetup {
        motor_step_deg: sc.tracker_step_deg,
        ..Default::default()
    };
    if let Some(s) = &a.start {
        setup.start = TrackerOrientation::new(s[0], s[1]);
    }
    let samples = tracking_sim(&path, &setup)?;
    ctx.emit(&csv_out::track_table(&samples), "track.csv")?;
    Ok(())
}

fn mppt(ctx: &Ctx, a: &MpptArgs) -> CliResult {
    let ap = pv_settings(ctx, a.irradiance, a.temp).array();
    ap.validate()?;
    let algo = match a.algo {
        AlgoArg::Po => Algorithm::PerturbObserve(PoVariant::Standard),
        AlgoArg::PoPrinted => Algorithm::PerturbObserve(PoVariant::Printed),
        AlgoArg::Ic => Algorithm::IncrementalConductance,
    };
    let run = mppt_run(&ap, algo, MpptState::new(a.v_init, a.dv)?, a.steps)?;
    ctx.emit(&csv_out::mppt_table(&run), "mppt.csv")?;
    if let Some(e) = run.error {
        return Err(e.into());
    }
    let mpp = find_mpp(&ap)?;
    if let Some(last) = run.trajectory.last() {
        eprintln!("final P = {} W; MPP P = {} W", num(last.p), num(mpp.p));
    }
    Ok(())
}

/// Open loop `gain·G` and the system the action operates on.
struct Selected {
    open: TransferFunction,
    target: TransferFunction,
    t_end: Option<f64>,
    dt: Option<f64>,
    gains: Option<(f64, f64, usize)>,
}

fn select(ctx: &Ctx, a: &SystemArgs) -> Result<Selected, Failure> {
    let from_cfg = ctx.config.analysis.as_ref();
    let base = match (&a.preset, &a.tf, from_cfg) {
        (Some(p), _, _) => p.transfer_function(),
        (None, Some(t), _) => t.clone(),
        (None, None, Some(req)) => req.system.clone(),
        (None, None, None) => {
            return Err(Failure::Usage(
                "choose a system with --preset, --tf or an [analysis] config".into(),
            ))
        }
    };
    let gain = a.gain.or(from_cfg.map(|r| r.gain)).unwrap_or(1.0);
    let closed = a.closed || from_cfg.is_some_and(|r| r.closed);
    let open = base.scale(gain);
    let target = if closed {
        open.unity_feedback()?
    } else {
        open.clone()
    };
    Ok(Selected {
        open,
        target,
        t_end: a.t_end.or(from_cfg.and_then(|r| r.t_end)),
        dt: a.dt.or(from_cfg.and_then(|r| r.dt)),
        gains: a.gains.or(from_cfg.and_then(|r| r.gains)),
    })
}

fn fmt_roots(r: &[Complex64]) -> String {
    r.iter()
        .map(|z| {
            if z.im == 0.0 {
                num(z.re)
            } else {
                format!(
                    "{}{}{}i",
                    num(z.re),
                    if z.im < 0.0 { "-" } else { "+" },
                    num(z.im.abs())
                )
            }
        })
        .collect::<Vec<_>>()
        .join(", ")
}

fn trace(sel: &Selected) -> Result<StepTrace, Error> {
    let t_end = match sel.t_end {
        Some(t) => t,
        None => suggest_t_end(&sel.target)?,
    };
    match sel.dt {
        Some(dt) => step_response(&sel.target, t_end, dt),
        None => step_response_auto(&sel.target, t_end),
    }
}

fn tf(ctx: &Ctx, action: TfAction) -> CliResult {
    match action {
        TfAction::Analyze(a) => {
            let sel = select(ctx, &a)?;
            let mut s = String::new();
            let g = &sel.target;
            let _ = writeln!(s, "system: {g}");
            let _ = writeln!(s, "poles: {}", fmt_roots(&g.poles()?));
            let _ = writeln!(s, "zeros: {}", fmt_roots(&g.zeros()?));
            let _ = writeln!(s, "dc_gain: {}", num(g.dc_gain()));
            let routh = routh_table(g.den())?;
            let _ = writeln!(
                s,
                "routh: {} ({} sign changes)",
                routh.verdict, routh.sign_changes
            );
            if g.is_proper() {
                match trace(&sel).and_then(|t| step_metrics(&t)) {
                    Ok(m) => {
                        let _ = writeln!(
                            s,
                            "step: rise {} s, settling {} s, overshoot {} %, peak {} at {} s, final {}",
                            num(m.rise_time_s),
                            num(m.settling_time_s),
                            num(m.overshoot_pct),
                            num(m.peak),
                            num(m.peak_time_s),
                            num(m.steady_state_value)
                        );
                    }
                    Err(e) => {
                        let _ = writeln!(s, "step: {e}");
                    }
                }
            }
            let m = stability_margins(&frequency_response(&sel.open, &default_grid())?);
            let opt = |v: Option<f64>, f: Option<f64>, unit: &str| match (v, f) {
                (Some(v), Some(f)) => format!("{} {unit} at {} rad/s", num(v), num(f)),
                _ => "none".into(),
            };
            let _ = writeln!(
                s,
                "gain margin: {}",
                opt(m.gain_margin_db, m.gm_freq_rad_s, "dB")
            );
            let _ = writeln!(
                s,
                "phase margin: {}",
                opt(m.phase_margin_deg, m.pm_freq_rad_s, "deg")
            );
            print!("{s}");
        }
        TfAction::Step(a) => {
            let sel = select(ctx, &a)?;
            let tr = trace(&sel)?;
            ctx.emit(&csv_out::step_table(&tr), "step.csv")?;
            if tr.diverged {
                eprintln!("warning: response diverges");
            }
        }
        TfAction::Bode(a) => {
            let sel = select(ctx, &a)?;
            let grid = match sel.gains {
                Some((lo, hi, n)) => log_grid(lo, hi, n),
                None => default_grid(),
            };
            let fr = frequency_response(&sel.target, &grid)?;
            ctx.emit(&csv_out::bode_table(&fr), "bode.csv")?;
        }
        TfAction::Rlocus(a) => {
            let sel = select(ctx, &a)?;
            let gains = gain_list(sel.gains.unwrap_or((0.1, 1000.0, 50)));
            let locus = root_locus(&sel.open, &gains)?;
            ctx.emit(&csv_out::locus_table(&locus), "rlocus.csv")?;
        }
        TfAction::Routh(a) => {
            let sel = select(ctx, &a)?;
            let r = routh_table(sel.target.den())?;
            let mut s = String::new();
            for (k, row) in r.table.iter().enumerate() {
                let deg = r.table.len() - 1 - k;
                let cells: Vec<String> = row.iter().map(|c| num(*c)).collect();
                let _ = writeln!(s, "s^{deg:<3} {}", cells.join("  "));
            }
            let _ = writeln!(s, "sign changes: {}", r.sign_changes);
            let _ = writeln!(s, "verdict: {}", r.verdict);
            print!("{s}");
        }
        TfAction::Errors(a) => {
            let sel = select(ctx, &a)?;
            let ec = error_constants(&sel.open);
            println!("type: {}", ec.system_type);
            println!(
                "Kp: {}  Kv: {}  Ka: {}",
                num(ec.kp_pos),
                num(ec.kv_vel),
                num(ec.ka_acc)
            );
            println!(
                "e_step: {}  e_ramp: {}  e_parabola: {}",
                num(ec.e_step),
                num(ec.e_ramp),
                num(ec.e_parabola)
            );
            let gains = gain_list(sel.gains.unwrap_or((1e-3, 1e8, 221)));
            let sweep = ss_error_vs_gain(&sel.open, &gains, ErrorKind::Step)?;
            for target in [0.1, 0.01] {
                match sweep.gain_for(target) {
                    Some(k) => println!("gain for e = {target}: {}", num(k)),
                    None => println!("gain for e = {target}: not reached on the sweep"),
                }
            }
            if ctx.out.is_some() {
                let mut t = Table::new(&["gain", "e_step"]);
                for (k, c) in &sweep.points {
                    t.push_nums(&[*k, c.e_step]);
                }
                ctx.emit(&t, "errors.csv")?;
            }
        }
    }
    Ok(())
}

fn scenario(ctx: &Ctx) -> CliResult {
    let cfg = &ctx.config.scenario;
    cfg.validate()?;
    let trace = run_scenario(cfg)?;
    ctx.emit(&csv_out::sim_table(&trace), "scenario.csv")?;
    let s = trace.summary();
    let text = format!(
        "final SOC        {} %\npump 1 starts    {}\npump 2 starts    {}\npump 1 on        {} s\npump 2 on        {} s\nwater delivered  {} L\nPV energy        {} Wh\n",
        num(s.final_soc_pct),
        s.pump1_starts,
        s.pump2_starts,
        num(s.pump1_on_s),
        num(s.pump2_on_s),
        num(s.water_delivered_l),
        num(s.pv_energy_wh)
    );
    if ctx.out.is_some() {
        print!("{text}");
    } else {
        eprint!("{text}");
    }
    Ok(())
}

fn validate(ctx: &Ctx) -> CliResult {
    let rows = run_validation_report()?;
    if ctx.out.is_some() {
        ctx.emit(&report_table(&rows), "validation.csv")?;
    }
    print!("{}", render_text(&rows));
    Ok(())
}
