//! End-to-end acceptance criteria. Each criterion prints one `[PASS]` or
//! `[FAIL]` line; the process exits nonzero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use crm_core::credibility::{
    blp_oracle, coefficients, components, premium_freq, premium_freq_count, Variant,
};
use crm_core::crm::{zeta, BaseParams, CUnits, ClaimHistory, ModelParams, Period};
use crm_core::momentkit::{ig_mgf, ig_mgf_d1, ig_mgf_d2, IgSpec};
use crm_core::risk_mse::{
    hmse_agg_expanded, hmse_agg_simplified, hmse_freq_expanded, hmse_freq_limit, mse_row, Method,
};
use crm_core::simlab::{
    average_severity_equivalence_test, average_severity_test_with_dispersion, empirical_premium_mse_curves,
    moment_oracle, EquivalenceCase, RngStream,
};
use crmctl::published::{compare, read_published};
use rand_core::RngCore;

const BETA0: [f64; 3] = [0.0, -0.05, -0.1];
const B1: [f64; 3] = [0.5, 1.5, 3.0];
const B2: [f64; 3] = [0.01, 0.2, 0.4];

// tolerances
const MGF_AT_ZERO: f64 = 1e-12;
const MGF_FD: f64 = 1e-5;
const MOMENT_Z: f64 = 4.0;
const MOMENT_DRAWS: usize = 10_000_000;
const BLP_REL: f64 = 1e-9;
const FORM_REL: f64 = 1e-9;
const EMPIRICAL_REL: f64 = 0.03;
const EMPIRICAL_N: usize = 1_000_000;
const EMPIRICAL_MIN_SCENARIOS: usize = 9;
const DECAY_RATIO: f64 = 1e-2;
const LIMIT_REL: f64 = 1e-3;
const LIMIT_FORMULA_REL: f64 = 1e-9;
const IDENTITY_REL: f64 = 1e-13;
const IDENTITY_HISTORIES: usize = 1000;
const KS_SAMPLES: usize = 100_000;

/// Uniform on [0, 1).
fn uniform(rng: &mut RngStream) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn scenario(beta0: f64, b1: f64, b2: f64) -> ModelParams {
    BaseParams { lambda1: (-1.9f64).exp(), lambda2: 8.4f64.exp(), beta0, b1, b2 }
        .calibrated(2.008, CUnits::PerLambda2Squared)
        .unwrap()
}

fn grid() -> Vec<ModelParams> {
    let mut out = Vec::new();
    for beta0 in BETA0 {
        for b2 in B2 {
            for b1 in B1 {
                out.push(scenario(beta0, b1, b2));
            }
        }
    }
    out
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs()
    }
}

fn label(p: &ModelParams) -> String {
    format!("beta0={} b1={} b2={}", p.beta0(), p.b1(), p.b2())
}

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

/// Five-point central difference.
fn derivative(f: impl Fn(f64) -> f64, z: f64, h: f64) -> f64 {
    (-f(z + 2.0 * h) + 8.0 * f(z + h) - 8.0 * f(z - h) + f(z - 2.0 * h)) / (12.0 * h)
}

fn criterion_1() -> Verdict {
    let mut worst_zero: f64 = 0.0;
    let mut worst_fd: f64 = 0.0;
    for b in [0.01, 0.5, 1.5, 3.0] {
        let spec = IgSpec::unit_mean(b).unwrap();
        worst_zero = worst_zero
            .max((ig_mgf(0.0, &spec).unwrap() - 1.0).abs())
            .max((ig_mgf_d1(0.0, &spec).unwrap() - 1.0).abs())
            .max((ig_mgf_d2(0.0, &spec).unwrap() - (1.0 + b)).abs());
        let hi = 0.9 / (2.0 * b);
        let gap = spec.branch_point() - hi;
        for k in 0..=200 {
            let z = -1.0 + (hi + 1.0) * k as f64 / 200.0;
            let h = 1e-3 * gap.min(1.0);
            let m = |x: f64| ig_mgf(x, &spec).unwrap();
            let m1 = |x: f64| ig_mgf_d1(x, &spec).unwrap();
            worst_fd = worst_fd
                .max(rel(derivative(m, z, h), ig_mgf_d1(z, &spec).unwrap()))
                .max(rel(derivative(m1, z, h), ig_mgf_d2(z, &spec).unwrap()));
        }
    }
    verdict(
        worst_zero <= MGF_AT_ZERO && worst_fd <= MGF_FD,
        format!("max |error at 0| = {worst_zero:.2e} (tol {MGF_AT_ZERO:.0e}), max FD rel = {worst_fd:.2e} (tol {MGF_FD:.0e})"),
    )
}

fn criterion_2() -> Verdict {
    let mut sets = Vec::new();
    for beta0 in BETA0 {
        for (b1, b2) in [(0.5, 0.01), (1.5, 0.2), (3.0, 0.4), (3.0, 0.01)] {
            sets.push(scenario(beta0, b1, b2));
        }
    }
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for (k, p) in sets.iter().enumerate() {
        let checks = moment_oracle(p, MOMENT_DRAWS, &RngStream::new(0xacc2, k as u64)).unwrap();
        assert_eq!(checks.len(), 9);
        for c in &checks {
            let z = c.z_score();
            worst = worst.max(z.abs());
            if z.is_nan() || z.abs() >= MOMENT_Z {
                failures.push(format!("{} {}: z={z:.2}", label(p), c.name));
            }
        }
    }
    let mut detail = format!("{} sets x 9 moments at {MOMENT_DRAWS} draws, max |z| = {worst:.2} (tol {MOMENT_Z})", sets.len());
    for f in &failures {
        detail.push_str(&format!("\n       {f}"));
    }
    verdict(failures.is_empty(), detail)
}

fn criterion_3() -> Verdict {
    let mut worst: f64 = 0.0;
    for p in grid() {
        for variant in [Variant::AggregateSeverity, Variant::Frequency] {
            for t in 1..=10 {
                let oracle = blp_oracle(&p, t, variant).unwrap();
                let (a0, a) = coefficients(&components(&p, t, variant).unwrap()).unwrap();
                worst = worst.max(rel(oracle[0], a0));
                for &ak in &oracle[1..] {
                    worst = worst.max(rel(ak, a));
                }
            }
        }
    }
    verdict(worst <= BLP_REL, format!("27 cells x t=1..10 x 2 premiums, max rel = {worst:.2e} (tol {BLP_REL:.0e})"))
}

fn criterion_4() -> Verdict {
    let mut worst_form: f64 = 0.0;
    let mut worst_affine: f64 = 0.0;
    for p in grid() {
        for t in 1..=10 {
            worst_form = worst_form.max(rel(hmse_agg_expanded(&p, t).unwrap(), hmse_agg_simplified(&p, t).unwrap()));
        }
        let inv = |t: u32| 1.0 / hmse_agg_expanded(&p, t).unwrap();
        for (t1, t2, t3) in [(1, 2, 3), (1, 5, 10), (2, 7, 40)] {
            let s12 = (inv(t2) - inv(t1)) / f64::from(t2 - t1);
            let s23 = (inv(t3) - inv(t2)) / f64::from(t3 - t2);
            worst_affine = worst_affine.max(rel(s23, s12));
        }
    }
    verdict(
        worst_form <= FORM_REL && worst_affine <= FORM_REL,
        format!("expanded vs simplified max rel = {worst_form:.2e}, slope mismatch of 1/HMSE1 = {worst_affine:.2e} (tol {FORM_REL:.0e})"),
    )
}

fn criterion_5() -> Verdict {
    let horizons = [1, 5, 10];
    let variants = [Variant::AggregateSeverity, Variant::Frequency];
    let mut passing = 0;
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    let cells = grid();
    for (k, p) in cells.iter().enumerate() {
        let curves = empirical_premium_mse_curves(p, &horizons, EMPIRICAL_N, &variants, &RngStream::new(0xacc5, k as u64)).unwrap();
        let mut ok = true;
        for r in &curves {
            let closed = match r.variant {
                Variant::AggregateSeverity => hmse_agg_expanded(p, r.t).unwrap(),
                _ => hmse_freq_expanded(p, r.t).unwrap(),
            };
            let d = rel(r.mse.value, closed);
            worst = worst.max(d);
            if d > EMPIRICAL_REL {
                ok = false;
                failures.push(format!("{} {:?} t={}: rel {d:.3}", label(p), r.variant, r.t));
            }
        }
        passing += usize::from(ok);
    }
    let mut detail = format!(
        "{passing}/{} scenarios within {EMPIRICAL_REL} at t=1,5,10 with {EMPIRICAL_N} policyholders (need {EMPIRICAL_MIN_SCENARIOS}), max rel = {worst:.4}",
        cells.len()
    );
    for f in &failures {
        detail.push_str(&format!("\n       {f}"));
    }
    verdict(passing >= EMPIRICAL_MIN_SCENARIOS, detail)
}

fn criterion_6() -> Verdict {
    let mut decay_ok = true;
    let mut worst_limit: f64 = 0.0;
    let mut worst_cell = String::new();
    let mut formula_worst: f64 = 0.0;
    for p in grid() {
        let h1_far = hmse_agg_expanded(&p, 10_000).unwrap();
        decay_ok &= h1_far < DECAY_RATIO * hmse_agg_expanded(&p, 1).unwrap();
        let limit = hmse_freq_limit(&p).unwrap();
        let d = rel(hmse_freq_expanded(&p, 10_000).unwrap(), limit);
        if d > worst_limit {
            worst_limit = d;
            worst_cell = label(&p);
        }
        let (z1, _) = zeta(&p);
        let formula = p.b2()
            * (2.0 * p.beta0()).exp()
            * (p.lambda1() * p.lambda2()).powi(2)
            * ig_mgf_d2(2.0 * z1, &IgSpec::unit_mean(p.b1()).unwrap()).unwrap();
        formula_worst = formula_worst.max(rel(limit, formula));
    }
    let reference = hmse_freq_limit(&scenario(0.0, 0.5, 0.4)).unwrap();
    let reference_rel = rel(reference, 0.6 * 13f64.exp());
    verdict(
        decay_ok && worst_limit <= LIMIT_REL && formula_worst <= LIMIT_FORMULA_REL && reference_rel <= LIMIT_FORMULA_REL,
        format!(
            "HMSE1(1e4) < {DECAY_RATIO}*HMSE1(1) on all cells: {decay_ok}; max rel |HMSE2(1e4) - limit| = {worst_limit:.3e} at {worst_cell} (tol {LIMIT_REL:.0e}); \
             limit formula max rel = {formula_worst:.1e}; limit(0,0.5,0.4) = {reference:.4} vs 0.6e^13, rel {reference_rel:.1e} (tol {LIMIT_FORMULA_REL:.0e})"
        ),
    )
}

fn criterion_7() -> Verdict {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/published_hmse.csv");
    let published = read_published(std::fs::File::open(&path).unwrap()).unwrap();
    let mut rows = Vec::new();
    for p in grid() {
        for t in [1, 5, 10] {
            rows.push(mse_row(&p, t).unwrap());
        }
    }
    let comparison = compare(&published, &rows);
    let matched = comparison.iter().filter(|c| c.order_match).count();
    let named = |b1: f64, b2: f64, want: Method| {
        grid()
            .iter()
            .filter(|p| p.b1() == b1 && p.b2() == b2)
            .all(|p| [1, 5, 10].iter().all(|&t| mse_row(p, t).unwrap().recommended == want))
    };
    let freq_wins = named(3.0, 0.01, Method::Frequency);
    let agg_wins = named(0.5, 0.4, Method::AggregateSeverity);
    let mut detail = format!(
        "{matched}/{} published orderings reproduced; (b1=3,b2=0.01) Frequency everywhere: {freq_wins}; (b1=0.5,b2=0.4) AggregateSeverity everywhere: {agg_wins}",
        comparison.len()
    );
    for c in comparison.iter().filter(|c| !c.order_match) {
        detail.push_str(&format!(
            "\n       beta0={} b1={} b2={} t={}: published {} ({}, {}), computed {} ({:.4}, {:.4})",
            c.beta0,
            c.b1,
            c.b2,
            c.t,
            c.published_order,
            c.published_hmse1,
            c.published_hmse2,
            c.computed_order,
            c.computed_hmse1,
            c.computed_hmse2
        ));
    }
    verdict(matched == comparison.len() && comparison.len() == 81 && freq_wins && agg_wins, detail)
}

fn criterion_8() -> Verdict {
    let mut rng = RngStream::new(0xacc8, 0);
    let mut worst: f64 = 0.0;
    for k in 0..IDENTITY_HISTORIES {
        let b1 = 0.05 + 3.0 * uniform(&mut rng);
        let b2 = 0.5 * uniform(&mut rng);
        let lambda1 = 0.02 + 0.5 * uniform(&mut rng);
        let lambda2 = 100.0 + 1e4 * uniform(&mut rng);
        let p = ModelParams::new(lambda1, lambda2, 0.0, 0.2 + 2.0 * uniform(&mut rng), b1, b2).unwrap();
        let len = k % 16;
        let periods = (0..len)
            .map(|_| {
                let n = (uniform(&mut rng) * 5.0) as u32;
                let s = if n == 0 { 0.0 } else { n as f64 * lambda2 * (0.05 + 3.0 * uniform(&mut rng)) };
                Period::new(n, s).unwrap()
            })
            .collect();
        let h = ClaimHistory::new(periods).unwrap();
        let freq = premium_freq(&h, &p).unwrap().premium;
        let count = premium_freq_count(&h, &p).unwrap().premium;
        worst = worst.max(rel(freq, lambda2 * count));
    }
    verdict(worst <= IDENTITY_REL, format!("{IDENTITY_HISTORIES} random histories, max rel = {worst:.2e} (tol {IDENTITY_REL:.0e})"))
}

fn criterion_9() -> Verdict {
    let p = scenario(-0.05, 1.5, 0.2);
    let mut ok = true;
    let mut parts = Vec::new();
    for n0 in [1, 2, 5] {
        let case = EquivalenceCase::from_params(&p, n0, 1.0);
        let rng = RngStream::new(0xacc9, u64::from(n0));
        let law = average_severity_equivalence_test(&case, KS_SAMPLES, &rng).unwrap();
        ok &= law.pass;
        parts.push(format!("n0={n0}: D={:.4} < {:.4}", law.statistic, law.critical));
        if n0 > 1 {
            let control = average_severity_test_with_dispersion(&case, case.dispersion, KS_SAMPLES, &rng).unwrap();
            ok &= !control.pass;
            parts.push(format!("control n0={n0}: D={:.4} rejects: {}", control.statistic, !control.pass));
        }
    }
    verdict(ok, format!("{KS_SAMPLES} samples at 1%: {}", parts.join("; ")))
}

fn run_scenario(config: &Path, out: &Path, jobs: usize) {
    let status = Command::new(env!("CARGO_BIN_EXE_crmctl"))
        .args(["scenario", "--config"])
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(["--jobs", &jobs.to_string()])
        .arg("--published")
        .arg(Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/published_hmse.csv"))
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

fn criterion_10() -> Verdict {
    let tmp = tempfile::tempdir().unwrap();
    let default = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/default_grid.json")).unwrap();
    let mut doc: serde_json::Value = serde_json::from_str(&default).unwrap();
    doc["mc"] = serde_json::json!({"n": 20000, "t": [1, 5, 10]});
    let config = tmp.path().join("grid.json");
    std::fs::write(&config, serde_json::to_string_pretty(&doc).unwrap()).unwrap();

    let runs: Vec<_> = [("a", 1), ("b", 1), ("c", 8), ("d", 8)]
        .iter()
        .map(|(name, jobs)| {
            let out = tmp.path().join(name);
            run_scenario(&config, &out, *jobs);
            snapshot(&out)
        })
        .collect();
    let identical = runs.windows(2).all(|w| w[0] == w[1]);
    let files = runs[0].len();
    let bytes: usize = runs[0].iter().map(|(_, b)| b.len()).sum();
    verdict(identical && files >= 7, format!("4 runs (jobs 1,1,8,8) with simulation enabled: {files} files, {bytes} bytes, identical: {identical}"))
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 10] = [
        ("MGF layer exactness", criterion_1),
        ("moment oracle equivalence", criterion_2),
        ("BLP equivalence", criterion_3),
        ("MSE formula consistency", criterion_4),
        ("empirical MSE", criterion_5),
        ("asymptotics", criterion_6),
        ("qualitative reference-table orderings", criterion_7),
        ("frequency/count premium identity at beta0=0", criterion_8),
        ("average-severity distributional equivalence", criterion_9),
        ("CLI determinism", criterion_10),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            verdict(false, format!("panicked: {msg}"))
        });
        failed += usize::from(!v.pass);
        println!(
            "[{}] {:>2}. {name} ({:.1}s): {}",
            if v.pass { "PASS" } else { "FAIL" },
            k + 1,
            start.elapsed().as_secs_f64(),
            v.detail
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
