//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Built without the libtest harness so the lines always
//! show up in the test log.

use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use solarpump::geometry::{grid_orientation, optimal_orientation, SunPosition, TrackerOrientation};
use solarpump::lti::{
    routh_table, step_metrics, step_response_auto, Polynomial, TransferFunction, Verdict,
};
use solarpump::mppt::{mppt_run, Algorithm, MpptRun, MpptState, PoVariant};
use solarpump::plants::{
    cascade_plant, closed_loop_char_poly, pump_tf, tank_second_order, tank_tf, TankParams,
};
use solarpump::pv::{array_residual_at, default_array, find_mpp, iv_curve, voltage_grid};
use solarpump::report::{run_validation_report, Status};
use solarpump::sim::{run_scenario, ScenarioConfig};

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

fn timed(budget: Option<Duration>, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut out = f();
    let took = start.elapsed();
    out.detail = format!("{} [{:.2} s]", out.detail, took.as_secs_f64());
    if let Some(b) = budget {
        if took > b {
            out.pass = false;
            out.detail
                .push_str(&format!(" over budget {:.0} s", b.as_secs_f64()));
        }
    }
    out
}

fn c1_poles() -> Outcome {
    let poles = tank_second_order(1.0).poles().expect("roots");
    let want = [(-0.0112, 2.236), (-0.0112, -2.236)];
    let ok = poles.len() == 2
        && want.iter().all(|&(re, im)| {
            poles
                .iter()
                .any(|p| (p.re - re).abs() <= 1e-3 && (p.im - im).abs() <= 1e-3)
        });
    Outcome::new(
        ok,
        format!(
            "poles {:.5}{:+.5}i, {:.5}{:+.5}i",
            poles[0].re, poles[0].im, poles[1].re, poles[1].im
        ),
    )
}

fn c2_cascade_identity() -> Outcome {
    let pump = pump_tf(5.0, 0.1).expect("pump");
    let tank = tank_tf(&TankParams {
        area: 100.0,
        outflow_r: 0.01,
    })
    .expect("tank");
    let g = pump.series(&tank);
    // 0.05/(0.1s²+1.1s+1) normalised by the leading denominator coefficient
    let (want_num, want_den) = ([0.5], [1.0, 11.0, 10.0]);
    let lead = g.den().leading();
    let num: Vec<f64> = g.num().coeffs().iter().map(|c| c / lead).collect();
    let den: Vec<f64> = g.den().coeffs().iter().map(|c| c / lead).collect();
    let close = |a: &[f64], b: &[f64]| {
        a.len() == b.len()
            && a.iter()
                .zip(b)
                .all(|(x, y)| (x - y).abs() <= 1e-12 * y.abs().max(1.0))
    };
    let ok = close(&num, &want_num) && close(&den, &want_den) && g == cascade_plant();
    Outcome::new(ok, format!("num {num:?} den {den:?}"))
}

fn c3_cascade_all_k() -> Outcome {
    let plant = cascade_plant();
    let mut notes = Vec::new();
    let mut ok = true;
    for k in [0.1, 1.0, 10.0, 100.0, 1000.0, 1e6] {
        let p = closed_loop_char_poly(&TransferFunction::gain(k), &plant).expect("char poly");
        let verdict = routh_table(&p).expect("routh").verdict;
        let roots_stable = p.roots().expect("roots").iter().all(|r| r.re < 0.0);
        ok &= verdict == Verdict::Stable && roots_stable;
        notes.push(format!("K={k}:{verdict}"));
    }
    Outcome::new(ok, notes.join(" "))
}

/// Polynomial with the given roots; complex entries stand for conjugate
/// pairs.
fn poly_from_roots(lead: f64, real: &[f64], pairs: &[(f64, f64)]) -> Polynomial {
    let mut c = vec![lead];
    let mul = |c: &[f64], f: &[f64]| {
        let mut out = vec![0.0; c.len() + f.len() - 1];
        for (i, a) in c.iter().enumerate() {
            for (j, b) in f.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        out
    };
    for &r in real {
        c = mul(&c, &[1.0, -r]);
    }
    for &(re, im) in pairs {
        c = mul(&c, &[1.0, -2.0 * re, re * re + im * im]);
    }
    Polynomial::from_coeffs(&c)
}

fn c4_random_routh() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0004);
    let mut agree = 0;
    let mut stable_cases = 0;
    let mut worst = String::new();
    for _ in 0..100 {
        let degree = rng.gen_range(2..=6usize);
        let all_left = rng.gen_bool(0.5);
        let part = |rng: &mut ChaCha8Rng| {
            let mag = 10f64.powf(rng.gen_range(-3.0..0.7));
            if all_left || rng.gen_bool(0.5) {
                -mag
            } else {
                mag
            }
        };
        let (mut real, mut pairs) = (Vec::new(), Vec::new());
        while real.len() + 2 * pairs.len() < degree {
            if degree - real.len() - 2 * pairs.len() >= 2 && rng.gen_bool(0.5) {
                let re = part(&mut rng);
                pairs.push((re, rng.gen_range(0.1..8.0)));
            } else {
                real.push(part(&mut rng));
            }
        }
        let lead = rng.gen_range(0.5..4.0) * if rng.gen_bool(0.3) { -1.0 } else { 1.0 };
        let p = poly_from_roots(lead, &real, &pairs);
        let expected_stable = real
            .iter()
            .chain(pairs.iter().map(|(re, _)| re))
            .all(|&r| r < 0.0);
        stable_cases += usize::from(expected_stable);
        let verdict = routh_table(&p).map(|r| r.verdict);
        if matches!(verdict, Ok(Verdict::Stable)) == expected_stable
            && !matches!(verdict, Ok(Verdict::Marginal) | Err(_))
        {
            agree += 1;
        } else if worst.is_empty() {
            worst = format!(" first miss {:?} -> {verdict:?}", p.coeffs());
        }
    }
    Outcome::new(
        agree == 100,
        format!("{agree}/100 agree ({stable_cases} stable){worst}"),
    )
}

fn c5_first_order() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for tau in [0.1, 1.0, 475.0] {
        let tf = TransferFunction::from_coeffs(&[2.0], &[tau, 1.0]).expect("tf");
        let m = step_metrics(&step_response_auto(&tf, 10.0 * tau).expect("step")).expect("metrics");
        let rise = tau * 9f64.ln();
        let settle = tau * 50f64.ln();
        let er = (m.rise_time_s - rise).abs() / rise;
        let es = (m.settling_time_s - settle).abs() / settle;
        ok &= er <= 0.01 && es <= 0.01;
        notes.push(format!(
            "tau={tau}: rise {:.3}%, settling {:.3}%",
            100.0 * er,
            100.0 * es
        ));
    }
    Outcome::new(ok, notes.join("; "))
}

fn c6_cross_check() -> Outcome {
    let rows = run_validation_report().expect("report");
    let ids = [
        "pid2.rise",
        "pid2.overshoot",
        "pid2.peak",
        "pid2.settling",
        "cascade.pid2.rise",
        "cascade.pid2.settling",
        "cascade.pid2.overshoot",
        "cascade.pid2.peak",
        "cascade.pid2.gm",
        "cascade.pid2.gm_freq",
        "cascade.pid2.pm",
        "cascade.pid2.pm_freq",
    ];
    let mut ok = true;
    let (mut matched, mut documented) = (0, 0);
    for id in ids {
        match rows.iter().find(|r| r.id == id) {
            Some(r) if r.status == Status::Match => matched += 1,
            Some(r) if r.status == Status::Deviates && !r.derivation.trim().is_empty() => {
                documented += 1
            }
            _ => ok = false,
        }
    }
    let all_documented = rows
        .iter()
        .all(|r| r.status != Status::Deviates || !r.derivation.trim().is_empty());
    Outcome::new(
        ok && all_documented,
        format!(
            "{matched} MATCH, {documented} documented DEVIATES of {}; report has {} rows",
            ids.len(),
            rows.len()
        ),
    )
}

fn dotv(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Achieved `(alpha, beta)` rebuilt from rotations: the panel starts facing
/// north, tilts up by TE about the east axis, then turns clockwise by TA.
fn achieved(sp: &SunPosition, to: &TrackerOrientation) -> (f64, f64) {
    let (se, sa) = (sp.theta_se.to_radians(), sp.theta_sa.to_radians());
    let (te, ta) = (to.theta_te.to_radians(), to.theta_ta.to_radians());
    let s = [sa.sin() * se.cos(), sa.cos() * se.cos(), se.sin()];
    let rot = |v: [f64; 3]| {
        // tilt about east, then clockwise turn about up
        let t = [
            v[0],
            v[1] * te.cos() - v[2] * te.sin(),
            v[1] * te.sin() + v[2] * te.cos(),
        ];
        [
            t[0] * ta.cos() + t[1] * ta.sin(),
            -t[0] * ta.sin() + t[1] * ta.cos(),
            t[2],
        ]
    };
    let (x, n, z) = (
        rot([1.0, 0.0, 0.0]),
        rot([0.0, 1.0, 0.0]),
        rot([0.0, 0.0, 1.0]),
    );
    let alpha = dotv(s, n).clamp(-1.0, 1.0).acos().to_degrees();
    let beta = dotv(s, x).atan2(dotv(s, z)).to_degrees();
    (alpha, beta)
}

fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(360.0);
    d.min(360.0 - d)
}

/// Targets are reachable only where the brute-force grid reaches them: with
/// a horizontal elevation axis and the sun near the zenith, the in-plane
/// direction is pinned close to 0° or 180°, so some (α, β) pairs have no
/// orientation at all. Those cases count as infeasible, not as misses.
fn c7_orientation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0007);
    let targets = [
        (0.0, 0.0),
        (10.0, 0.0),
        (15.0, 20.0),
        (30.0, 45.0),
        (5.0, -30.0),
        (45.0, 10.0),
    ];
    let (mut cases, mut feasible, mut within, mut misses, mut no_worse) = (0, 0, 0, 0, 0);
    let mut worst = 0.0f64;
    let err_of = |sp: &SunPosition, to: &TrackerOrientation, alpha: f64, beta: f64| {
        let (a, b) = achieved(sp, to);
        if alpha == 0.0 {
            (a - alpha).abs()
        } else {
            (a - alpha).abs().max(angle_gap(b, beta))
        }
    };
    for _ in 0..50 {
        let sp =
            SunPosition::new(rng.gen_range(5.0..85.0), rng.gen_range(0.0..360.0)).expect("sun");
        for (alpha, beta) in targets {
            cases += 1;
            let sol = optimal_orientation(&sp, alpha, beta).expect("solution");
            misses += usize::from(sol.analytic_miss);
            let err = err_of(&sp, &sol.orientation, alpha, beta);
            let gerr = err_of(
                &sp,
                &grid_orientation(&sp, alpha, beta).orientation,
                alpha,
                beta,
            );
            no_worse += usize::from(err <= gerr + 0.1);
            if gerr <= 0.5 {
                feasible += 1;
                worst = worst.max(err);
                within += usize::from(err <= 0.5);
            }
        }
    }
    let miss_rate = misses as f64 / cases as f64;
    Outcome::new(
        within == feasible && no_worse == cases && miss_rate < 0.05,
        format!(
            "{within}/{feasible} grid-reachable targets within 0.5 deg (worst {worst:.3}), \
             {} unreachable, no worse than grid {no_worse}/{cases}, fallback {:.1}%",
            cases - feasible,
            100.0 * miss_rate
        ),
    )
}

fn tail_ok(run: &MpptRun, pred: impl Fn(f64, f64) -> bool) -> bool {
    run.error.is_none()
        && run.trajectory.len() == 200
        && run.trajectory[run.trajectory.len() - 20..]
            .iter()
            .all(|s| pred(s.v_ref, s.p))
}

fn c8_mppt() -> Outcome {
    let array = default_array(1000.0, 298.0);
    let mpp = find_mpp(&array).expect("mpp");
    let parabola = |v: f64| (100.0 - (v - 17.0).powi(2)) / v;
    let algos = [
        ("P&O", Algorithm::PerturbObserve(PoVariant::Standard)),
        ("IC", Algorithm::IncrementalConductance),
    ];
    let mut ok = true;
    let mut notes = Vec::new();
    for (name, algo) in algos {
        let dv = 0.5;
        let run =
            mppt_run(&array, algo, MpptState::new(20.0, dv).expect("state"), 200).expect("run");
        let pv_ok = tail_ok(&run, |_, p| p >= 0.98 * mpp.p);
        let run_p = mppt_run(
            &parabola,
            algo,
            MpptState::new(10.0, dv).expect("state"),
            200,
        )
        .expect("run");
        let par_ok = tail_ok(&run_p, |v, _| (v - 17.0).abs() <= dv + 1e-9);
        ok &= pv_ok && par_ok;
        let last = run.trajectory.last().expect("samples");
        notes.push(format!(
            "{name}: P {:.2}/{:.2} W, parabola V {:.2}",
            last.p, mpp.p, run_p.final_state.v_ref
        ));
    }
    Outcome::new(ok, notes.join("; "))
}

fn c9_pv() -> Outcome {
    let array = default_array(1000.0, 298.0);
    let curve = iv_curve(&array, &voltage_grid(&array, 200).expect("grid")).expect("curve");
    let residual = curve
        .voltages
        .iter()
        .zip(&curve.currents)
        .map(|(&v, &i)| array_residual_at(&array, v, i))
        .fold(0.0, f64::max);
    let p35: Vec<f64> = [288.0, 298.0, 313.0, 328.0]
        .iter()
        .map(|&t| {
            35.0 * solarpump::pv::array_current(&default_array(1000.0, t), 35.0).expect("current")
        })
        .collect();
    let temp_ok = p35.windows(2).all(|w| w[1] < w[0]);
    let mpps: Vec<f64> = [200.0, 400.0, 600.0, 800.0, 1000.0]
        .iter()
        .map(|&g| find_mpp(&default_array(g, 298.0)).expect("mpp").p)
        .collect();
    let irr_ok = mpps.windows(2).all(|w| w[1] > w[0]);
    Outcome::new(
        residual < 1e-9 && temp_ok && irr_ok,
        format!("max residual {residual:.2e} A, P(35 V) over T {p35:.2?}, MPP over G {mpps:.2?}"),
    )
}

fn c10_scenario() -> Outcome {
    let cfg = ScenarioConfig::default();
    let tr = run_scenario(&cfg).expect("scenario");
    let r = &tr.records;
    let total0 = r[0].tank1_l + r[0].tank2_l + r[0].delivered_l;
    let drift = r
        .iter()
        .map(|x| (x.tank1_l + x.tank2_l + x.delivered_l - total0).abs())
        .fold(0.0, f64::max);
    let mut hysteresis_ok = true;
    for w in r.windows(2) {
        if !w[0].pump1_on && w[1].pump1_on {
            hysteresis_ok &= w[1].tank2_level_pct < cfg.tank_low_pct;
        }
        if w[0].pump1_on && !w[1].pump1_on {
            hysteresis_ok &= w[1].tank2_level_pct >= cfg.tank_full_pct;
        }
    }
    let soc_ok = r.iter().all(|x| (0.0..=100.0).contains(&x.soc_pct));

    let first_on = |f: fn(&solarpump::sim::SimRecord) -> bool| r.iter().position(f);
    let dips_after = |k: usize| {
        let window = (300.0 / cfg.dt_s) as usize;
        r[k..(k + window).min(r.len())]
            .iter()
            .any(|x| x.soc_pct < r[k].soc_pct)
    };
    let events = match (first_on(|x| x.pump1_on), first_on(|x| x.pump2_on)) {
        (Some(k1), Some(k2)) => {
            let rise = r[k1].soc_pct > r[0].soc_pct;
            let ordered = k1 < k2;
            let ok = rise && ordered && dips_after(k1) && dips_after(k2);
            (
                ok,
                format!("pump1 at {:.0} s, pump2 at {:.0} s", r[k1].t, r[k2].t),
            )
        }
        _ => (false, "a pump never started".to_string()),
    };
    Outcome::new(
        drift <= 1e-6 && hysteresis_ok && soc_ok && events.0,
        format!(
            "water drift {drift:.1e} L, hysteresis {hysteresis_ok}, SOC bounded {soc_ok}, events {} ({})",
            events.0, events.1
        ),
    )
}

fn run_cli(args: &[&str], out: &Path) -> (bool, Vec<u8>) {
    let o = Command::new(env!("CARGO_BIN_EXE_solarpump"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("spawn solarpump");
    (o.status.success(), o.stdout)
}

fn c11_determinism() -> Outcome {
    let dirs: Vec<_> = (0..2)
        .map(|_| tempfile::tempdir().expect("tempdir"))
        .collect();
    let mut ok = true;
    let mut notes = Vec::new();
    for (cmd, file) in [
        (&["validate"][..], "validation.csv"),
        (&["scenario", "run"][..], "scenario.csv"),
    ] {
        let runs: Vec<_> = dirs.iter().map(|d| run_cli(cmd, d.path())).collect();
        let files: Vec<_> = dirs
            .iter()
            .map(|d| std::fs::read(d.path().join(file)).unwrap_or_default())
            .collect();
        let same = runs.iter().all(|r| r.0)
            && runs[0].1 == runs[1].1
            && !files[0].is_empty()
            && files[0] == files[1];
        ok &= same;
        notes.push(format!(
            "{}: {} bytes {}",
            cmd.join(" "),
            files[0].len(),
            if same { "identical" } else { "differ" }
        ));
    }
    Outcome::new(ok, notes.join("; "))
}

fn main() -> ExitCode {
    let secs = |s| Some(Duration::from_secs(s));
    type Criterion = (&'static str, Option<Duration>, fn() -> Outcome);
    let criteria: [Criterion; 11] = [
        ("pole reproduction", secs(1), c1_poles),
        ("cascade plant identity", None, c2_cascade_identity),
        ("stability for all K", None, c3_cascade_all_k),
        ("Routh/oracle equivalence", secs(5), c4_random_routh),
        ("first-order metrics", None, c5_first_order),
        ("cross-check suite", None, c6_cross_check),
        ("optimal orientation", secs(30), c7_orientation),
        ("MPPT convergence", None, c8_mppt),
        ("PV solver", None, c9_pv),
        ("system scenario", secs(20), c10_scenario),
        ("determinism", None, c11_determinism),
    ];
    let mut failed = 0;
    for (n, (name, budget, f)) in criteria.into_iter().enumerate() {
        let out = timed(budget, f);
        failed += usize::from(!out.pass);
        println!(
            "{} criterion {}: {name}: {}",
            if out.pass { "PASS" } else { "FAIL" },
            n + 1,
            out.detail
        );
    }
    println!("acceptance: {} passed, {failed} failed", 11 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
