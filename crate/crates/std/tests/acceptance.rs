//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero if any fail.

use std::process::Command;
use std::time::{Duration, Instant};

use nrcsim_core::analytic::{
    degradation_alpha, evaluate, interference_breakdown, k_opt_search, max_tolerable_nrc,
    saturation_spectral_efficiency, sinr, sinr_ratio_zf_mrt,
};
use nrcsim_core::montecarlo::{
    derive_seed, sample_channel, sample_nrc, substream, McJob, McOptions,
};
use nrcsim_core::units::{db_to_linear, linear_to_db};
use nrcsim_core::{CouplingRule, NrcStats, PrecoderKind, SystemConfig};
use nrcsim_std::driver::{resolve_threads, Driver};
use nrcsim_std::experiments::reference_nrc;
use rand::Rng;

use PrecoderKind::{Mrt, Zf};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn secs(d: Duration) -> String {
    format!("{:.2} s", d.as_secs_f64())
}

/// Random valid configuration with mixed UE antenna counts.
fn random_config(rng: &mut impl Rng) -> SystemConfig {
    let k = rng.random_range(1..=12);
    let ues: Vec<usize> = (0..k).map(|_| rng.random_range(1..=3)).collect();
    let m: usize = ues.iter().sum();
    let n = m + rng.random_range(1..=300);
    let tau = m + rng.random_range(0..=5);
    let t = tau + rng.random_range(0..=200);
    SystemConfig::new(
        n,
        ues,
        tau,
        db_to_linear(rng.random_range(-10.0..20.0)),
        db_to_linear(rng.random_range(-10.0..40.0)),
        t,
    )
    .unwrap()
}

fn random_nrc(rng: &mut impl Rng) -> NrcStats {
    let mut db = || db_to_linear(rng.random_range(-50.0..-10.0));
    let (a_d, a_od, c_d, c_od) = (db(), db(), db(), db());
    let frac: f64 = rng.random_range(0.0..=1.0);
    NrcStats::new(a_d, a_od, c_d, frac * c_d, c_od).unwrap()
}

fn c1_reciprocal_reduction() -> Verdict {
    let start = Instant::now();
    let mut rng = substream(0xC1, 0);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let cfg = random_config(&mut rng);
        let (n, m) = (cfg.n_bs() as f64, cfg.m_tot() as f64);
        let x = cfg.pilot_gain();
        let rd = cfg.rho_d();
        let zf = (n - m) / m * x * rd / (rd + x + 1.0);
        let mrt = n / m * x * rd / ((rd + 1.0) * (x + 1.0));
        for (kind, expected) in [(Zf, zf), (Mrt, mrt)] {
            for s in evaluate(&cfg, &NrcStats::ZERO, kind).sinr {
                worst = worst.max(rel(s, expected));
            }
        }
    }
    let elapsed = start.elapsed();
    verdict(
        worst <= 1e-12 && elapsed < Duration::from_secs(1),
        format!(
            "max rel err {worst:.2e} over 100 configs, {}",
            secs(elapsed)
        ),
    )
}

fn c2_mc_agreement(driver: &Driver) -> Verdict {
    let start = Instant::now();
    let base = SystemConfig::baseline();
    let nrc = reference_nrc();
    let mut worst = 0.0f64;
    let mut points = 0;
    for (i, rho_db) in [-10.0, 0.0, 10.0, 20.0, 30.0].into_iter().enumerate() {
        let cfg = base.with_rho_d(db_to_linear(rho_db)).unwrap();
        for kind in PrecoderKind::ALL {
            let job = McJob::new(
                &cfg,
                &nrc,
                kind,
                derive_seed(2024, i as u64),
                McOptions::default(),
            )
            .unwrap();
            let est = driver.estimate(&job, 1000).unwrap();
            for (m, s) in est.sinr.iter().enumerate() {
                let exact = sinr(&cfg, &nrc, m, kind);
                worst = worst.max((linear_to_db(*s) - linear_to_db(exact)).abs());
                points += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    verdict(
        worst <= 0.2 && elapsed < Duration::from_secs(300),
        format!(
            "max |dSINR| {worst:.4} dB over {points} antenna points (n = 1000), {}",
            secs(elapsed)
        ),
    )
}

fn c3_se_loss() -> Verdict {
    let cfg = SystemConfig::baseline()
        .with_rho_d(db_to_linear(15.0))
        .unwrap();
    let loss = |kind| {
        evaluate(&cfg, &NrcStats::ZERO, kind).spectral_efficiency
            - evaluate(&cfg, &reference_nrc(), kind).spectral_efficiency
    };
    let (zf, mrt) = (loss(Zf), loss(Mrt));
    verdict(
        (zf - 27.0).abs() <= 2.0 && (mrt - 3.0).abs() <= 1.0,
        format!("SE loss ZF {zf:.2}, MRT {mrt:.2} bits/s/Hz (targets 27 ± 2, 3 ± 1)"),
    )
}

fn c4_alpha() -> Verdict {
    let cfg = SystemConfig::baseline();
    let nrc = NrcStats::new(0.0, 0.0, 0.0, 0.0, db_to_linear(-25.0)).unwrap();
    let zf = degradation_alpha(&cfg, &nrc, 0, Zf);
    let mrt = degradation_alpha(&cfg, &nrc, 0, Mrt);
    verdict(
        (zf - 0.85).abs() <= 0.03 && (mrt - 0.25).abs() <= 0.03,
        format!("alpha ZF {zf:.4}, MRT {mrt:.4} (targets 0.85 ± 0.03, 0.25 ± 0.03)"),
    )
}

fn c5_saturation() -> Verdict {
    let start = Instant::now();
    let nrc = reference_nrc();
    let cfg = SystemConfig::baseline().with_n_bs(10_000).unwrap();
    let limit = saturation_spectral_efficiency(&cfg, &nrc).finite().unwrap();
    let zf = evaluate(&cfg, &nrc, Zf).spectral_efficiency;
    let mrt = evaluate(&cfg, &nrc, Mrt).spectral_efficiency;
    let gap_zf = rel(zf, limit);
    let gap_mrt = rel(mrt, limit);
    let between = (zf - mrt).abs() / zf.max(mrt);
    let elapsed = start.elapsed();
    verdict(
        gap_zf < 0.02
            && gap_mrt < 0.02
            && between < 0.01
            && elapsed < Duration::from_secs(1),
        format!(
            "N = 1e4: SE ZF {zf:.3}, MRT {mrt:.3}, limit {limit:.3}; gaps to limit {:.2}% / {:.2}% (< 2%), ZF-MRT gap {:.2}% (< 1%), {}",
            100.0 * gap_zf,
            100.0 * gap_mrt,
            100.0 * between,
            secs(elapsed)
        ),
    )
}

fn c6_identities() -> Verdict {
    let mut rng = substream(0xC6, 0);
    let mut ratio_worst = 0.0f64;
    let mut terms_worst = 0.0f64;
    for _ in 0..1000 {
        let cfg = random_config(&mut rng);
        let nrc = random_nrc(&mut rng);
        let m = rng.random_range(0..cfg.m_tot());
        let direct = sinr(&cfg, &nrc, m, Zf) / sinr(&cfg, &nrc, m, Mrt);
        ratio_worst = ratio_worst.max(rel(sinr_ratio_zf_mrt(&cfg, &nrc, m), direct));
        for kind in PrecoderKind::ALL {
            let b = interference_breakdown(&cfg, &nrc, m, kind);
            terms_worst = terms_worst.max(rel(b.sinr(), sinr(&cfg, &nrc, m, kind)));
        }
    }
    verdict(
        ratio_worst <= 1e-10 && terms_worst <= 1e-10,
        format!(
            "ZF/MRT ratio identity max rel err {ratio_worst:.2e}, term reassembly {terms_worst:.2e} (1000 inputs)"
        ),
    )
}

fn c7_max_nrc() -> Verdict {
    let cfg = SystemConfig::baseline();
    let coupling = CouplingRule::default();
    let target = db_to_linear(15.0);
    let level = max_tolerable_nrc(&cfg, target, Zf, &coupling).unwrap();
    let level_db = linear_to_db(level);
    let achieved = sinr(&cfg, &coupling.stats(level).unwrap(), 0, Zf);
    let err = rel(achieved, target);
    verdict(
        (level_db + 20.0).abs() <= 1.0 && err <= 1e-5,
        format!(
            "level {level_db:.2} dB (target -20 ± 1 dB), re-evaluated SINR rel err {err:.1e} (≤ 1e-5)"
        ),
    )
}

fn c8_kopt() -> Verdict {
    let cfg = SystemConfig::baseline();
    let coupling = CouplingRule::default();
    let rho_d = db_to_linear(20.0);
    let k = |nrc: &NrcStats, kind| k_opt_search(&cfg, nrc, kind, rho_d).unwrap().k;
    let grid: Vec<f64> = (0..=30).map(|i| -40.0 + i as f64).collect();
    let mut monotone = true;
    let mut traces = Vec::new();
    for kind in PrecoderKind::ALL {
        let ks: Vec<usize> = grid
            .iter()
            .map(|&db| k(&coupling.stats(db_to_linear(db)).unwrap(), kind))
            .collect();
        monotone &= ks.windows(2).all(|w| w[1] <= w[0]);
        traces.push(format!("{kind} {}→{}", ks[0], ks[ks.len() - 1]));
    }
    let moderate = coupling.stats(db_to_linear(-25.0)).unwrap();
    let (zf_mod, mrt_mod) = (k(&moderate, Zf), k(&moderate, Mrt));
    let (zf_0, mrt_0) = (k(&NrcStats::ZERO, Zf), k(&NrcStats::ZERO, Mrt));
    verdict(
        monotone && mrt_mod >= zf_mod && zf_0 >= mrt_0,
        format!(
            "non-increasing over -40..-10 dB: {monotone} ({}); at -25 dB MRT {mrt_mod} ≥ ZF {zf_mod}; reciprocal ZF {zf_0} ≥ MRT {mrt_0}",
            traces.join(", ")
        ),
    )
}

fn c9_determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str| {
        let out = dir.path().join(format!("compare_{threads}.csv"));
        let status = Command::new(env!("CARGO_BIN_EXE_nrcsim"))
            .args([
                "compare",
                "--config",
                "baseline",
                "--seed",
                "42",
                "--threads",
                threads,
            ])
            .arg("--out")
            .arg(&out)
            .output()
            .unwrap();
        (
            status.status.success(),
            std::fs::read(out).unwrap_or_default(),
        )
    };
    let (ok1, a) = run("1");
    let (ok3, b) = run("3");
    verdict(
        ok1 && ok3 && !a.is_empty() && a == b,
        format!(
            "compare --seed 42 with 1 and 3 threads: {} bytes vs {} bytes, identical: {}",
            a.len(),
            b.len(),
            a == b
        ),
    )
}

/// Mean and standard error of `xs`.
fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn c10_distributions() -> Verdict {
    const SAMPLES: u64 = 100_000;
    // Two-antenna UE so that A′ has off-diagonal entries.
    let cfg = SystemConfig::new(3, vec![2], 2, db_to_linear(13.0), 1.0, 10).unwrap();
    let nrc = NrcStats::new(0.02, 0.005, 1e-2, 1e-3, 0.003).unwrap();
    let x = cfg.pilot_gain();
    let mut cols: [Vec<f64>; 7] = Default::default();
    for i in 0..SAMPLES {
        let mut rng = substream(0xC10, i);
        let ch = sample_channel(&cfg, &mut rng);
        let r = sample_nrc(&cfg, &nrc, &mut rng);
        let c_diag = |j: usize| r.c[(j, j)] - 1.0;
        cols[0].push(ch.g_hat[(0, 0)].norm_sqr());
        cols[1].push(ch.eps[(0, 0)].norm_sqr());
        cols[2].push((r.a[(0, 0)] - 1.0).norm_sqr());
        cols[3].push(r.a[(0, 1)].norm_sqr());
        cols[4].push(c_diag(0).norm_sqr());
        cols[5].push(r.c[(0, 1)].norm_sqr());
        cols[6].push((c_diag(0) * c_diag(1).conj()).re);
    }
    let targets = [
        ("Ĝ", x / (x + 1.0)),
        ("ε", 1.0 / (x + 1.0)),
        ("A′ diag", 0.02),
        ("A′ off", 0.005),
        ("C′ diag", 1e-2),
        ("C′ off", 0.003),
        ("C′ diag xcorr", 1e-3),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (col, (name, target)) in cols.iter().zip(targets) {
        let (mean, se) = mean_se(col);
        let z = (mean - target) / se;
        pass &= z.abs() <= 3.0;
        parts.push(format!("{name} z={z:+.2}"));
    }
    verdict(pass, format!("{} samples: {}", SAMPLES, parts.join(", ")))
}

type Check<'a> = Box<dyn Fn() -> Verdict + 'a>;

fn main() {
    let driver = Driver::new(resolve_threads(None)).unwrap();
    let criteria: [(&str, Check); 10] = [
        ("reciprocal reduction", Box::new(c1_reciprocal_reduction)),
        (
            "MC vs analytic within 0.2 dB",
            Box::new(|| c2_mc_agreement(&driver)),
        ),
        ("SE loss at 15 dB", Box::new(c3_se_loss)),
        ("alpha for off-diagonal BS coupling", Box::new(c4_alpha)),
        ("large-N saturation", Box::new(c5_saturation)),
        ("identity suites", Box::new(c6_identities)),
        ("max tolerable NRC inversion", Box::new(c7_max_nrc)),
        ("K_opt behavior", Box::new(c8_kopt)),
        ("determinism across thread counts", Box::new(c9_determinism)),
        ("distributional sanity", Box::new(c10_distributions)),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let v = check();
        let status = if v.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {status}  {name}: {}", i + 1, v.detail);
        if !v.pass {
            failed.push(i + 1);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 10 criteria pass");
    } else {
        println!("acceptance: failing criteria {failed:?}");
        std::process::exit(1);
    }
}
