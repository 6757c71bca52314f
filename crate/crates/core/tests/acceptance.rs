//! End-to-end acceptance checks. Runs as a plain binary so that every
//! criterion prints one PASS or FAIL line regardless of outcome; the process
//! exits non-zero when any criterion fails.
//!
//! The Monte-Carlo criterion runs every point to at least 100 expected bit
//! errors with no symbol cap, which takes tens of minutes on one core.

use std::collections::BTreeMap;
use std::f64::consts::{PI, SQRT_2};
use std::io::Write;
use std::process::{Command, ExitCode};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cprlab::analytics::{
    bwa_symbol_variance, coding_rate, complexity, floor_bwa, floor_nlms, floor_vv, spectral_efficiency,
};
use cprlab::channel::Snr;
use cprlab::cli;
use cprlab::cpr::{default_mu_grid, optimize_mu, CprConfig, Estimator, MuProbe};
use cprlab::experiments::{
    measure_eepn, measure_floor, Decoding, EepnInjection, McSettings, PhaseNoise, Scenario, PRESETS,
};
use cprlab::noise::{crossover_distance, LinkParams};
use cprlab::AlgorithmKind;

/// 8cT_S²/(λ²D) at 32 GBd, 1550 nm, 17 ps/nm/km, from a units-aware
/// evaluation (pint) cross-checked at 40 digits (mpmath).
const L0_METERS: f64 = 57345.37744077860;

/// Floors at the Monte-Carlo points, N = 11, evaluated at 40 digits with
/// mpmath: (n, σ², NLMS, BWA, VV).
const ORACLE_FLOORS: [(usize, f64, f64, f64, f64); 3] = [
    (
        4,
        0.02,
        1.3991978395851703e-8,
        1.9795851116293312e-4,
        2.8613008208808571e-9,
    ),
    (
        8,
        0.01,
        2.867175462867726e-5,
        2.5304801599201549e-3,
        1.2702581313480866e-5,
    ),
    (
        16,
        0.005,
        1.3724159299739467e-3,
        1.1189710549491551e-2,
        8.9684608672416899e-4,
    ),
];

const MC_BLOCK: usize = 11;
const MC_RATIO_BAND: (f64, f64) = (0.5, 2.0);
const EEPN_DISTANCES_KM: [f64; 4] = [250.0, 500.0, 1000.0, 2000.0];
const EEPN_TOLERANCE: f64 = 0.25;
const EEPN_MIN_R2: f64 = 0.99;

struct Report {
    failures: Vec<String>,
}

impl Report {
    fn line(&mut self, id: &str, ok: bool, detail: String) {
        let verdict = if ok { "PASS" } else { "FAIL" };
        println!("{verdict} [{id}] {detail}");
        let _ = std::io::stdout().flush();
        if !ok {
            self.failures.push(id.to_string());
        }
    }
}

fn info(detail: String) {
    println!("INFO {detail}");
    let _ = std::io::stdout().flush();
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        ((a - b) / b).abs()
    }
}

fn formula_fidelity(report: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let s2: f64 = rng.random_range(1e-4..0.3);
        let reference = 0.5 * libm::erfc(PI / (4.0 * SQRT_2 * s2.sqrt()));
        worst = worst.max(rel(floor_nlms(4, s2).unwrap(), reference));
    }
    report.line(
        "1a",
        worst <= 1e-14,
        format!(
            "QPSK NLMS floor vs 1/2 erfc form, 100 random variances: worst relative error {worst:.3e} (limit 1e-14)"
        ),
    );

    let mut asymmetric = 0usize;
    let mut checked = 0usize;
    for n_blk in 1..=64 {
        for p in 1..=n_blk {
            for s2 in [1e-3, 0.02, 0.3] {
                let a = bwa_symbol_variance(p, n_blk, s2).unwrap();
                let b = bwa_symbol_variance(n_blk + 1 - p, n_blk, s2).unwrap();
                checked += 1;
                if a != b {
                    asymmetric += 1;
                }
            }
        }
    }
    report.line(
        "1b",
        asymmetric == 0,
        format!("BWA per-symbol variance p <-> N+1-p symmetry, N <= 64: {asymmetric} of {checked} pairs differ"),
    );

    let mut nonzero = Vec::new();
    for n in [4, 8, 16, 32] {
        for s2 in [1e-4, 0.01, 0.3] {
            let b = floor_bwa(n, s2, 1).unwrap();
            let v = floor_vv(n, s2, 1).unwrap();
            if b != 0.0 || v != 0.0 {
                nonzero.push(format!("n={n} s2={s2}: bwa={b:e} vv={v:e}"));
            }
        }
    }
    report.line(
        "1c",
        nonzero.is_empty(),
        format!(
            "unit-length BWA and VV floors are zero: {} nonzero {:?}",
            nonzero.len(),
            nonzero
        ),
    );

    let mut worst: f64 = 0.0;
    for (n, s2, nl, bw, vv) in ORACLE_FLOORS {
        worst = worst
            .max(rel(floor_nlms(n, s2).unwrap(), nl))
            .max(rel(floor_bwa(n, s2, MC_BLOCK).unwrap(), bw))
            .max(rel(floor_vv(n, s2, MC_BLOCK).unwrap(), vv));
    }
    report.line(
        "1d",
        worst <= 1e-12,
        format!(
            "floors at the Monte-Carlo points vs 40-digit references: worst relative error {worst:.3e} (limit 1e-12)"
        ),
    );
}

fn run_cli(args: &[&str]) -> Result<String, String> {
    let mut buf = Vec::new();
    let argv = std::iter::once("cprlab").chain(args.iter().copied());
    cli::run(argv, &mut buf).map_err(|e| e.to_string())?;
    String::from_utf8(buf).map_err(|e| e.to_string())
}

fn worked_example(report: &mut Report) {
    let link = LinkParams::ssmf_32gbd();
    let l0 = crossover_distance(&link).unwrap();
    let err = rel(l0, L0_METERS);
    report.line(
        "2a",
        err <= 1e-12,
        format!(
            "crossover distance {:.9} km vs units-aware reference {:.9} km: relative error {err:.3e} (limit 1e-12)",
            l0 / 1e3,
            L0_METERS / 1e3
        ),
    );

    let text = run_cli(&[
        "link",
        "--baud",
        "32e9",
        "--wavelength",
        "1550",
        "--dispersion",
        "17",
        "--tx-linewidth",
        "1e6",
        "--lo-linewidth",
        "1e6",
        "--distance",
        "0",
    ]);
    let (ok, detail) = match text {
        Ok(text) => {
            let reported = text
                .lines()
                .find(|l| l.starts_with("crossover_distance_l0"))
                .and_then(|l| l.split_whitespace().nth(1))
                .and_then(|v| v.parse::<f64>().ok());
            let note = text.lines().any(|l| l.starts_with("# note:") && l.contains("60.69"));
            let matches = reported.is_some_and(|km| rel(km * 1e3, L0_METERS) <= 1e-12);
            (
                matches && note,
                format!("link report gives L0 = {reported:?} km and documents the quoted 60.69 km: {note}"),
            )
        }
        Err(e) => (false, format!("link report failed: {e}")),
    };
    report.line("2b", ok, detail);
}

/// One parsed series of a floor CSV, keyed by (algorithm, n, block length).
type Series = BTreeMap<(String, usize, String), Vec<(f64, f64)>>;

/// (n, points) for each order sharing an algorithm and block length.
type Curves<'a> = Vec<(usize, &'a Vec<(f64, f64)>)>;

fn floor_series(preset: &str) -> Result<Series, String> {
    let text = run_cli(&["floor", "--preset", preset])?;
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut series = Series::new();
    for record in reader.records() {
        let r = record.map_err(|e| e.to_string())?;
        let parse = |i: usize| r[i].parse::<f64>().map_err(|e| format!("{preset}: {e}"));
        let key = (r[0].to_string(), parse(1)? as usize, r[3].to_string());
        series.entry(key).or_default().push((parse(2)?, parse(4)?));
    }
    if series.is_empty() {
        return Err(format!("{preset}: no rows"));
    }
    Ok(series)
}

/// Non-decreasing, and strictly increasing wherever the lower value is
/// representable (floors below ~1e-308 underflow to zero).
fn increasing(lo: f64, hi: f64) -> bool {
    if lo > 0.0 {
        hi > lo
    } else {
        hi >= lo
    }
}

fn figure_reproduction(report: &mut Report) {
    let start = Instant::now();
    let mut all = BTreeMap::new();
    let mut load_errors = Vec::new();
    for (name, _) in PRESETS {
        match floor_series(name) {
            Ok(s) => {
                all.insert(name, s);
            }
            Err(e) => load_errors.push(e),
        }
    }

    let mut x_violations = Vec::new();
    let mut rows = 0usize;
    for (name, series) in &all {
        for (key, pts) in series {
            rows += pts.len();
            for w in pts.windows(2) {
                if !(w[1].0 > w[0].0) || !increasing(w[0].1, w[1].1) {
                    x_violations.push(format!("{name} {key:?} at sigma2 {:e}", w[1].0));
                }
            }
        }
    }
    report.line(
        "3a",
        load_errors.is_empty() && x_violations.is_empty(),
        format!(
            "{} presets, {rows} rows; floors increase along variance, linewidth and distance: {} violations {:?}; load errors {:?}",
            all.len(),
            x_violations.len(),
            x_violations.iter().take(5).collect::<Vec<_>>(),
            load_errors
        ),
    );

    let mut order_violations = Vec::new();
    let mut first_violation: BTreeMap<String, f64> = BTreeMap::new();
    for (name, series) in &all {
        let mut by_alg: BTreeMap<(String, String), Curves> = BTreeMap::new();
        for ((alg, n, blk), pts) in series {
            by_alg.entry((alg.clone(), blk.clone())).or_default().push((*n, pts));
        }
        for ((alg, blk), mut curves) in by_alg {
            if curves.len() < 2 {
                continue;
            }
            curves.sort_by_key(|c| c.0);
            for pair in curves.windows(2) {
                let (n_lo, lo) = pair[0];
                let (n_hi, hi) = pair[1];
                for (a, b) in lo.iter().zip(hi.iter()) {
                    if !increasing(a.1, b.1) {
                        order_violations.push(format!("{name} {alg} N={blk} n={n_lo}->{n_hi} sigma2={:e}", a.0));
                        let tag = format!("{alg}/N={blk}/n={n_lo}->{n_hi}");
                        first_violation
                            .entry(tag)
                            .and_modify(|v| *v = v.min(a.0))
                            .or_insert(a.0);
                    }
                }
            }
        }
    }
    report.line(
        "3b",
        order_violations.is_empty(),
        format!(
            "floors increase with modulation order at every abscissa: {} violations; lowest failing sigma2 per curve pair {:?}",
            order_violations.len(),
            first_violation
        ),
    );

    let mut crossover_detail = Vec::new();
    let mut crossover_ok = true;
    for name in ["fig14a", "fig14b", "fig14c"] {
        let Some(series) = all.get(name) else {
            crossover_ok = false;
            crossover_detail.push(format!("{name}: missing"));
            continue;
        };
        let pick = |alg: &str| series.iter().find(|(k, _)| k.0 == alg).map(|(_, v)| v);
        let (Some(nlms), Some(vv)) = (pick("nlms"), pick("vv")) else {
            crossover_ok = false;
            crossover_detail.push(format!("{name}: nlms or vv series missing"));
            continue;
        };
        let diffs: Vec<(f64, f64)> = nlms.iter().zip(vv).map(|(a, b)| (a.0, b.1 - a.1)).collect();
        let vv_wins_low = diffs.first().is_some_and(|d| d.1 < 0.0);
        let nlms_wins_high = diffs.last().is_some_and(|d| d.1 > 0.0);
        let change = diffs.windows(2).find(|w| w[0].1 < 0.0 && w[1].1 > 0.0).map(|w| w[1].0);
        let min_ratio = nlms
            .iter()
            .zip(vv)
            .map(|(a, b)| a.1 / b.1)
            .fold(f64::INFINITY, f64::min);
        crossover_ok &= vv_wins_low && nlms_wins_high && change.is_some();
        crossover_detail.push(format!(
            "{name}: VV below NLMS at smallest variance {vv_wins_low}, NLMS below VV at largest {nlms_wins_high}, sign change at {change:?}, min NLMS/VV ratio {min_ratio:.3}"
        ));
    }
    report.line(
        "3c",
        crossover_ok,
        format!("VV vs NLMS crossover in fig14 series: {crossover_detail:?}"),
    );
    info(format!("figure sweeps took {:.2} s", start.elapsed().as_secs_f64()));
}

fn monte_carlo(report: &mut Report) {
    let points = [(4usize, 0.02f64), (8, 0.01), (16, 0.005)];
    let algorithms = [AlgorithmKind::Nlms, AlgorithmKind::Bwa, AlgorithmKind::Vv];
    let mut results = Vec::new();
    let mut seed = 1000u64;
    for &(n, s2) in &points {
        for kind in algorithms {
            seed += 1;
            let start = Instant::now();
            let (cfg, decoding, mu) = match kind {
                AlgorithmKind::Nlms => {
                    let probe = MuProbe {
                        symbols: 100_000,
                        seed,
                        snr: Snr::Noiseless,
                    };
                    let mu = optimize_mu(n, s2, &default_mu_grid(), &probe).unwrap();
                    (CprConfig::nlms(mu).unwrap(), Decoding::Differential, Some(mu))
                }
                _ => {
                    let cfg = CprConfig::for_kind(kind, 1.0, MC_BLOCK)
                        .unwrap()
                        .with_estimator(Estimator::PhaseAverage);
                    (cfg, Decoding::GenieReferenced, None)
                }
            };
            let scenario = Scenario {
                order: n,
                cpr: cfg,
                noise: PhaseNoise::Variance(s2),
            };
            let settings = McSettings {
                max_symbols: u64::MAX,
                base_seed: seed,
                decoding,
                snr: Snr::Noiseless,
                eepn: EepnInjection::VarianceEquivalent,
                ..McSettings::default()
            };
            let outcome = measure_floor(&scenario, &settings);
            let (ok, detail) = match outcome {
                Ok(r) => match r.measured {
                    Some(m) => {
                        let expected = r.analytic_floor * m.counts.bits as f64;
                        let ratio = r.ratio();
                        let ok =
                            expected >= 100.0 && ratio.is_some_and(|q| q >= MC_RATIO_BAND.0 && q <= MC_RATIO_BAND.1);
                        (
                            ok,
                            format!(
                                "{kind} n={n} sigma2={s2} mu={mu:?} decoding={decoding}: analytic {:.4e}, measured {:?} [{:.3e}, {:.3e}], ratio {ratio:?}, {} bit errors in {} bits ({expected:.0} expected), {:.0} s",
                                r.analytic_floor,
                                m.ber,
                                m.ci_low,
                                m.ci_high,
                                m.counts.bit_errors,
                                m.counts.bits,
                                start.elapsed().as_secs_f64()
                            ),
                        )
                    }
                    None => (false, format!("{kind} n={n} sigma2={s2}: no measurement")),
                },
                Err(e) => (false, format!("{kind} n={n} sigma2={s2}: {e}")),
            };
            info(format!("monte-carlo point {detail}"));
            results.push((ok, detail));
        }
    }
    let failed: Vec<&String> = results.iter().filter(|r| !r.0).map(|r| &r.1).collect();
    report.line(
        "4",
        failed.is_empty(),
        format!(
            "{} of 9 Monte-Carlo floors within x{} of analytic with >= 100 expected errors; failing: {failed:?}",
            results.len() - failed.len(),
            MC_RATIO_BAND.1
        ),
    );

    for &(n, s2) in &points {
        for kind in [AlgorithmKind::Bwa, AlgorithmKind::Vv] {
            let cfg = CprConfig::for_kind(kind, 1.0, MC_BLOCK).unwrap();
            let scenario = Scenario {
                order: n,
                cpr: cfg,
                noise: PhaseNoise::Variance(s2),
            };
            let settings = McSettings {
                symbols: Some(1_000_000),
                base_seed: 77,
                decoding: Decoding::GenieReferenced,
                ..McSettings::default()
            };
            match measure_floor(&scenario, &settings) {
                Ok(r) => info(format!(
                    "phasor estimator {kind} n={n} sigma2={s2}: analytic {:.4e}, measured {:?}, ratio {:?}",
                    r.analytic_floor,
                    r.measured.and_then(|m| m.ber),
                    r.ratio()
                )),
                Err(e) => info(format!("phasor estimator {kind} n={n} sigma2={s2}: {e}")),
            }
        }
    }
}

fn eepn_physics(report: &mut Report) {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut at_1000 = None;
    for (i, &km) in EEPN_DISTANCES_KM.iter().enumerate() {
        let link = LinkParams::from_engineering(0.0, 1e6, 32e9, 1550.0, 17.0, km).unwrap();
        let m = measure_eepn(&link, 32, 1 << 16, 500 + i as u64).unwrap();
        info(format!(
            "eepn L={km} km: phase variance {:.4e}, noise power {:.4e}, closed form {:.4e}, phase/closed {:.3}, power/closed {:.3}, {} symbols",
            m.phase_variance,
            m.noise_power,
            m.predicted,
            m.phase_variance / m.predicted,
            m.noise_power / m.predicted,
            m.symbols
        ));
        xs.push(km);
        ys.push(m.phase_variance);
        if km == 1000.0 {
            at_1000 = Some(m);
        }
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let r2 = sxy * sxy / (sxx * syy);
    report.line(
        "5a",
        r2 > EEPN_MIN_R2,
        format!("EEPN phase-error variance linear in distance over {EEPN_DISTANCES_KM:?} km: R^2 = {r2:.6} (limit {EEPN_MIN_R2})"),
    );
    let m = at_1000.expect("1000 km is on the distance list");
    let dev = rel(m.phase_variance, m.predicted);
    report.line(
        "5b",
        dev <= EEPN_TOLERANCE,
        format!(
            "EEPN phase-error variance at 1000 km {:.4e} vs closed form {:.4e}: deviation {:.1}% (limit {:.0}%)",
            m.phase_variance,
            m.predicted,
            100.0 * dev,
            100.0 * EEPN_TOLERANCE
        ),
    );
    info(format!(
        "eepn at 1000 km: total noise power deviates {:.1}% from the closed form; phase share {:.3} of the total",
        100.0 * rel(m.noise_power, m.predicted),
        m.phase_variance / m.noise_power
    ));
}

fn information_formulas(report: &mut Report) {
    let r0 = coding_rate(0.0).unwrap();
    let r_half = coding_rate(0.5).unwrap();
    let se = spectral_efficiency(0.0, 16, 2).unwrap();
    let mut table_ok = true;
    let mut table = Vec::new();
    for n in [4, 8, 16, 32] {
        let row = (
            complexity(AlgorithmKind::Nlms, n),
            complexity(AlgorithmKind::Bwa, n),
            complexity(AlgorithmKind::Vv, n),
        );
        table_ok &= row == (5, n, n);
        table.push((n, row));
    }
    report.line(
        "6",
        r0 == 1.0 && r_half == 0.0 && se == 8.0 && table_ok,
        format!("coding_rate(0) = {r0}, coding_rate(0.5) = {r_half}, spectral_efficiency(0, 16, 2) = {se}, complexity (NLMS, BWA, VV) per order {table:?}"),
    );
}

fn determinism(report: &mut Report) {
    let args = [
        "simulate",
        "--algorithm",
        "nlms,bwa,vv",
        "--order",
        "8",
        "--block-length",
        "11",
        "--sigma2",
        "0.01,0.02",
        "--mode",
        "both",
        "--mu",
        "0.8",
        "--symbols",
        "200000",
        "--seed",
        "31337",
    ];
    let run = || Command::new(env!("CARGO_BIN_EXE_cprlab")).args(args).output();
    let (ok, detail) = match (run(), run()) {
        (Ok(a), Ok(b)) => {
            let success = a.status.success() && b.status.success();
            let identical = a.stdout == b.stdout;
            (
                success && identical && !a.stdout.is_empty(),
                format!(
                    "simulate run twice with seed 31337: exit {:?}/{:?}, {} bytes, byte-identical {identical}",
                    a.status.code(),
                    b.status.code(),
                    a.stdout.len()
                ),
            )
        }
        (a, b) => (false, format!("could not run cprlab: {:?} {:?}", a.err(), b.err())),
    };
    report.line("7", ok, detail);
}

fn main() -> ExitCode {
    let mut report = Report { failures: Vec::new() };
    let start = Instant::now();
    formula_fidelity(&mut report);
    worked_example(&mut report);
    figure_reproduction(&mut report);
    information_formulas(&mut report);
    determinism(&mut report);
    eepn_physics(&mut report);
    monte_carlo(&mut report);
    info(format!("acceptance finished in {:.0} s", start.elapsed().as_secs_f64()));
    if report.failures.is_empty() {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed {:?}", report.failures);
        ExitCode::FAILURE
    }
}
