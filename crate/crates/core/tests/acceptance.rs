//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any fails.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use ionmzi::cli::report::{build_report, sweep_rows};
use ionmzi::cli::{ConfigFile, RunConfig, Scenario};
use ionmzi::efficiency::{cavity_decay_rate, published};
use ionmzi::elements::{beam_splitter, BeamSplitterId};
use ionmzi::protocol::{
    enclosed_pass, evolve_pass, input_mode, rho_ul, run_mixed, run_product, single_pass, Entry,
    IonPairState,
};
use ionmzi::qcore::{
    ion_fidelity, normalize, BasisState, Direction, IonId, IonLevel, PhotonMode, Polarization,
    Port, PureState,
};
use ionmzi::recycler::{iterate_analytic, iterate_numeric, monte_carlo, pool, RecycleConfig};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn close(name: &str, got: f64, want: f64, tol: f64) -> Result<(), String> {
    ensure((got - want).abs() <= tol, || {
        format!("{name}: got {got}, want {want} (tol {tol})")
    })
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn random_qubit(rng: &mut ChaCha8Rng) -> (Complex64, Complex64) {
    loop {
        let x = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let y = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let n = (x.norm_sqr() + y.norm_sqr()).sqrt();
        if n > 1e-3 {
            return (x / n, y / n);
        }
    }
}

fn random_pair(rng: &mut ChaCha8Rng) -> IonPairState {
    loop {
        let v: Vec<Complex64> = (0..4)
            .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if n > 1e-3 {
            return IonPairState::new(v[0] / n, v[1] / n, v[2] / n, v[3] / n).unwrap();
        }
    }
}

fn product_amps(a2: f64) -> [Complex64; 4] {
    let (a, b) = (a2.sqrt(), (1.0 - a2).sqrt());
    [c(a, 0.0), c(b, 0.0), c(a, 0.0), c(b, 0.0)]
}

fn cfg(raw: ConfigFile) -> RunConfig {
    RunConfig::from_file(&raw).expect("valid config")
}

fn empty_mzi() -> Check {
    let start = Instant::now();
    let lower_left =
        PhotonMode::propagating(Port::Lower, Direction::Forward, Polarization::SigmaPlus);
    let photon = PureState::basis(BasisState::new(lower_left, IonLevel::G, IonLevel::G));
    let out = beam_splitter(
        &beam_splitter(&photon, BeamSplitterId::Bs1),
        BeamSplitterId::Bs2,
    );
    let elapsed = start.elapsed();
    let upper = PhotonMode::propagating(Port::Upper, Direction::Forward, Polarization::SigmaPlus);
    let p_upper: f64 = out
        .iter()
        .filter(|(b, _)| b.photon == upper)
        .map(|(_, a)| a.norm_sqr())
        .sum();
    close("p(upper)", p_upper, 1.0, 1e-12)?;
    ensure(elapsed < Duration::from_millis(1), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!("p(upper) = {p_upper}, {elapsed:?}"))
}

/// Amplitudes written out term by term for a sigma+ photon entering the lower arm.
fn closed_form(
    cmp: Complex64,
    cpm: Complex64,
    cmm: Complex64,
    cpp: Complex64,
) -> Vec<(BasisState, Complex64)> {
    use IonLevel::{MMinus as M, MPlus as P, G};
    let fwd = |port| PhotonMode::propagating(port, Direction::Forward, Polarization::SigmaPlus);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let i = Complex64::i();
    vec![
        (BasisState::new(fwd(Port::Upper), M, P), i * 0.5 * cmp),
        (BasisState::new(fwd(Port::Upper), P, M), i * 0.5 * cpm),
        (BasisState::new(fwd(Port::Upper), M, M), i * cmm),
        (BasisState::new(fwd(Port::Lower), M, P), 0.5 * cmp),
        (BasisState::new(fwd(Port::Lower), P, M), -0.5 * cpm),
        (
            BasisState::new(PhotonMode::Scattered(IonId::U), G, P),
            s * cpp,
        ),
        (
            BasisState::new(PhotonMode::Scattered(IonId::U), G, M),
            s * cpm,
        ),
        (
            BasisState::new(PhotonMode::Scattered(IonId::L), P, G),
            i * s * cpp,
        ),
        (
            BasisState::new(PhotonMode::Scattered(IonId::L), M, G),
            i * s * cmp,
        ),
    ]
}

fn closed_form_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let start = Instant::now();
    let mut worst = 0.0_f64;
    for _ in 0..1000 {
        let (alpha, beta) = random_qubit(&mut rng);
        let (a, b) = random_qubit(&mut rng);
        let ions = IonPairState::product(alpha, beta, a, b).map_err(|e| e.to_string())?;
        let input = ions.to_pure(input_mode(Polarization::SigmaPlus, Entry::M1_SIDE));
        let out = evolve_pass(&input, Entry::M1_SIDE).map_err(|e| e.to_string())?;
        let expected = closed_form(beta * a, alpha * b, beta * b, alpha * a);
        let mut keys: BTreeSet<BasisState> = out.iter().map(|(k, _)| *k).collect();
        keys.extend(expected.iter().map(|(k, _)| *k));
        for k in keys {
            let want = expected
                .iter()
                .filter(|(b, _)| *b == k)
                .fold(c(0.0, 0.0), |acc, (_, v)| acc + v);
            worst = worst.max((out.amplitude(&k) - want).norm());
        }
    }
    let elapsed = start.elapsed();
    ensure(worst <= 1e-12, || {
        format!("max coefficient error {worst:e}")
    })?;
    ensure(elapsed < Duration::from_secs(1), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "1000 inputs, max coefficient error {worst:.1e}, {elapsed:?}"
    ))
}

fn single_pass_law() -> Check {
    let sweep = |alpha2: Option<f64>| {
        let c = cfg(ConfigFile {
            scenario: Some(Scenario::Sweep),
            sweep_scenario: Some(Scenario::SinglePass),
            axis: Some(ionmzi::cli::config::Axis::A2),
            alpha2,
            from: Some(0.0),
            to: Some(1.0),
            points: Some(11),
            ..ConfigFile::default()
        });
        sweep_rows(&c, &c.sweep.unwrap()).map_err(|e| e.to_string())
    };
    let matched = sweep(None)?;
    ensure(matched.len() == 11, || format!("{} rows", matched.len()))?;
    for row in &matched {
        let a2 = row["a2"].as_f64().unwrap();
        let p = row["p_detect_lower"].as_f64().unwrap();
        close(
            &format!("p_lower(a2={a2})"),
            p,
            0.5 * a2 * (1.0 - a2),
            1e-12,
        )?;
        if let Some(f) = row["fidelity_psi_minus"].as_f64() {
            close(&format!("F(psi-) at a2={a2}"), f, 1.0, 1e-12)?;
        } else {
            ensure(p.abs() < 1e-12, || format!("missing post state at a2={a2}"))?;
        }
    }
    for alpha2 in [0.2, 0.65] {
        for row in sweep(Some(alpha2))? {
            let a2 = row["a2"].as_f64().unwrap();
            let want = 0.25 * ((1.0 - alpha2) * a2 + alpha2 * (1.0 - a2));
            close(
                &format!("p_lower(alpha2={alpha2}, a2={a2})"),
                row["p_detect_lower"].as_f64().unwrap(),
                want,
                1e-12,
            )?;
        }
    }
    Ok("11-point sweeps at alpha=a and two unmatched alphas".into())
}

fn iterated_totals() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let cfg30 = RecycleConfig::with_max_passes(30);
    for _ in 0..200 {
        let (alpha, beta) = random_qubit(&mut rng);
        let (a, b) = random_qubit(&mut rng);
        let ions = IonPairState::product(alpha, beta, a, b).map_err(|e| e.to_string())?;
        let r = iterate_analytic(&ions).map_err(|e| e.to_string())?;
        let (al2, a2) = (alpha.norm_sqr(), a.norm_sqr());
        let q = (alpha * b).norm_sqr() + (beta * a).norm_sqr();
        close("p_entangled", r.p_entangled, q / 3.0, 1e-12)?;
        close(
            "p_scattered",
            r.p_scattered,
            0.5 * (al2 + a2) + q / 6.0,
            1e-12,
        )?;
        close("p_stuck", r.p_stuck, (beta * b).norm_sqr(), 1e-12)?;
        let n = iterate_numeric(&ions, &cfg30).map_err(|e| e.to_string())?;
        close("numeric p_entangled", n.p_entangled, r.p_entangled, 1e-10)?;
        close("numeric p_scattered", n.p_scattered, r.p_scattered, 1e-10)?;
        close(
            "numeric p_stuck+truncated",
            n.p_stuck + n.p_truncated,
            r.p_stuck,
            1e-10,
        )?;
    }
    let [alpha, beta, a, b] = product_amps(0.7);
    let ions = IonPairState::product(alpha, beta, a, b).unwrap();
    let r = iterate_analytic(&ions).unwrap();
    close("p_entangled(0.7)", r.p_entangled, 0.14, 1e-12)?;
    close("2/3 a2 (1-a2)", r.p_entangled, 2.0 / 3.0 * 0.7 * 0.3, 1e-12)?;
    Ok(format!(
        "200 random inputs; |a|^2=0.7 gives {:.15}",
        r.p_entangled
    ))
}

fn mixed_case() -> Check {
    for f in [0.0, 0.25, 0.5, 0.7, 1.0] {
        let m = run_mixed(f).map_err(|e| e.to_string())?;
        close(
            &format!("single p_lower(F={f})"),
            m.p_detect_lower,
            f / 4.0,
            1e-12,
        )?;
        let it = pool(&rho_ul(f).unwrap(), iterate_analytic).map_err(|e| e.to_string())?;
        close(
            &format!("iterated p_lower(F={f})"),
            it.p_entangled,
            f / 3.0,
            1e-12,
        )?;
        let psi_minus = IonPairState::psi_minus().to_pure(PhotonMode::Vacuum);
        let psi_plus = IonPairState::psi_plus().to_pure(PhotonMode::Vacuum);
        if let Some(lower) = &m.post_detect_lower {
            ensure(lower.components().len() == 1, || {
                format!("D_l state mixed at F={f}")
            })?;
            close(
                &format!("D_l fidelity(F={f})"),
                ion_fidelity(lower, &psi_minus).unwrap(),
                1.0,
                1e-12,
            )?;
        } else {
            ensure(f == 0.0, || format!("no D_l branch at F={f}"))?;
        }
        let upper = m.post_detect_upper.as_ref().ok_or("no D_u branch")?;
        let fu = ion_fidelity(upper, &psi_plus).unwrap();
        close(&format!("D_u fidelity(F={f})"), fu, f / (2.0 - f), 1e-12)?;
        if f > 0.0 && f < 1.0 {
            ensure(fu < f, || format!("D_u fidelity {fu} not below F={f}"))?;
        }
    }
    Ok("F in {0, 0.25, 0.5, 0.7, 1}".into())
}

fn crossover() -> Check {
    for k in 0..=100 {
        let f = k as f64 / 100.0;
        let mixed = pool(&rho_ul(f).unwrap(), iterate_analytic)
            .unwrap()
            .p_entangled;
        let [alpha, beta, a, b] = product_amps(f);
        let product = iterate_analytic(&IonPairState::product(alpha, beta, a, b).unwrap())
            .unwrap()
            .p_entangled;
        let beats = mixed - product > 1e-12;
        ensure(beats == (f > 0.5), || {
            format!("F={f}: mixed {mixed} vs product {product}")
        })?;
    }
    Ok("mixed wins exactly for F > 1/2 on 101 points".into())
}

fn monte_carlo_consistency() -> Check {
    let [alpha, beta, a, b] = product_amps(0.7);
    let ions = IonPairState::product(alpha, beta, a, b).unwrap();
    let rc = RecycleConfig::default();
    let one_thread = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .map_err(|e| e.to_string())?;
    let p = 0.14;
    let start = Instant::now();
    let (big, passed) = one_thread.install(|| {
        let big = monte_carlo(&ions, 1_000_000, 2024, &rc);
        let passed = (1..=20u64)
            .filter(|&seed| {
                let r = monte_carlo(&ions, 100_000, seed, &rc).unwrap();
                let sigma = (p * (1.0 - p) / 1e5_f64).sqrt();
                (r.estimate.p_entangled - p).abs() <= 2.0 * sigma
            })
            .count();
        (big, passed)
    });
    let elapsed = start.elapsed();
    let big = big.map_err(|e| e.to_string())?;
    let sigma = (p * (1.0 - p) / 1e6_f64).sqrt();
    let dev = (big.estimate.p_entangled - p).abs();
    ensure(dev <= 3.0 * sigma, || {
        format!(
            "10^6 trials: {} is {:.2} sigma off",
            big.estimate.p_entangled,
            dev / sigma
        )
    })?;
    ensure(passed >= 18, || {
        format!("only {passed}/20 seeds within 2 sigma")
    })?;
    ensure(elapsed < Duration::from_secs(60), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "10^6 trials: {:.5} ({:.2} sigma); {passed}/20 seeds within 2 sigma; {elapsed:.1?} on one thread",
        big.estimate.p_entangled,
        dev / sigma
    ))
}

fn preset_report(preset: ionmzi::cli::Preset) -> Result<serde_json::Value, String> {
    build_report(&cfg(ConfigFile {
        scenario: Some(Scenario::Throughput),
        preset: Some(preset),
        ..ConfigFile::default()
    }))
    .map_err(|e| e.to_string())
}

fn throughput_reproduction() -> Check {
    use ionmzi::cli::Preset;
    let mut got = Vec::new();
    for (preset, want) in [(Preset::PaperMixed, 8.17), (Preset::PaperProduct, 4.90)] {
        let r = preset_report(preset)?;
        let res = &r["result"];
        let pps = res["throughput"]["pairs_per_second"]
            .as_f64()
            .ok_or("no pairs_per_second")?;
        close(preset.name(), pps, want, 0.01)?;
        let claim = &res["claimed_pairs_per_second"];
        ensure(
            claim["note"].as_str().is_some_and(|s| s.contains("round")),
            || format!("{}: rounding note missing", preset.name()),
        )?;
        ensure(claim["consistent_after_rounding"] == true, || {
            "rounded claim mismatch".into()
        })?;
        ensure(r["preset"]["source"].is_string(), || {
            "preset source missing".into()
        })?;
        got.push(format!(
            "{} {pps:.4}/s (claimed {})",
            preset.name(),
            claim["value"]
        ));
    }
    Ok(got.join(", "))
}

fn decay_rate_discrepancy() -> Check {
    let gamma = cavity_decay_rate(published::FINESSE, published::CAVITY_LENGTH)
        .map_err(|e| e.to_string())?;
    close("gamma / 6.61e7", gamma / 6.61e7, 1.0, 1e-3)?;
    let r = preset_report(ionmzi::cli::Preset::PaperCavity)?;
    let cav = &r["result"]["cavity"];
    let formula = cav["decay_rate_formula"]
        .as_f64()
        .ok_or("formula value missing")?;
    close("reported formula", formula, gamma, 0.0)?;
    ensure(cav["decay_rate_formula_expr"].is_string(), || {
        "formula not labeled".into()
    })?;
    let quoted = &cav["decay_rate_quoted"];
    close(
        "reported quoted",
        quoted["value"].as_f64().ok_or("quoted value missing")?,
        9.9e6,
        0.0,
    )?;
    ensure(
        quoted["label"]
            .as_str()
            .is_some_and(|s| s.contains("cited")),
        || "quoted value not labeled as cited".into(),
    )?;
    Ok(format!(
        "formula {formula:.4e}/s vs cited {:.1e}/s (ratio {:.2})",
        9.9e6,
        quoted["formula_over_quoted"].as_f64().unwrap_or(f64::NAN)
    ))
}

fn random_general_state(rng: &mut ChaCha8Rng) -> PureState {
    let levels = [IonLevel::MPlus, IonLevel::MMinus, IonLevel::G];
    let n = rng.random_range(1..8);
    let terms: Vec<(BasisState, Complex64)> = (0..n)
        .map(|_| {
            let port = if rng.random() {
                Port::Upper
            } else {
                Port::Lower
            };
            let dir = if rng.random() {
                Direction::Forward
            } else {
                Direction::Backward
            };
            let pol = if rng.random() {
                Polarization::SigmaPlus
            } else {
                Polarization::SigmaMinus
            };
            let photon = match rng.random_range(0..4) {
                0 => PhotonMode::Vacuum,
                1 => PhotonMode::Scattered(IonId::U),
                _ => PhotonMode::propagating(port, dir, pol),
            };
            let b = BasisState::new(
                photon,
                levels[rng.random_range(0..3)],
                levels[rng.random_range(0..3)],
            );
            (
                b,
                c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
            )
        })
        .collect();
    match normalize(&PureState::from_terms(terms)) {
        Ok((_, s)) => s,
        Err(_) => random_general_state(rng),
    }
}

fn conservation_suite() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let entries = [Entry::M1_SIDE, Entry::M2_SIDE];
    let pols = [Polarization::SigmaPlus, Polarization::SigmaMinus];
    for k in 0..10_000 {
        let s = random_general_state(&mut rng);
        let out = beam_splitter(&s, BeamSplitterId::Bs1);
        close(&format!("BS norm #{k}"), out.norm_sqr(), 1.0, 1e-12)?;

        let ions = random_pair(&mut rng);
        let (pol, entry) = (pols[k % 2], entries[(k / 2) % 2]);
        let open = single_pass(&ions, pol, entry).map_err(|e| e.to_string())?;
        close(&format!("open completeness #{k}"), open.total(), 1.0, 1e-12)?;
        let closed = enclosed_pass(&ions, pol, entry).map_err(|e| e.to_string())?;
        close(
            &format!("enclosed completeness #{k}"),
            closed.total(),
            1.0,
            1e-12,
        )?;

        let phase = Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
        let rotated = single_pass(&ions.scale(phase), pol, entry).map_err(|e| e.to_string())?;
        for (name, x, y) in [
            ("scatter_u", open.p_scatter_u, rotated.p_scatter_u),
            ("scatter_l", open.p_scatter_l, rotated.p_scatter_l),
            ("upper", open.p_detect_upper, rotated.p_detect_upper),
            ("lower", open.p_detect_lower, rotated.p_detect_lower),
        ] {
            close(&format!("phase invariance {name} #{k}"), y, x, 1e-12)?;
        }
    }
    // the product path too, since reports go through it
    let [alpha, beta, a, b] = product_amps(0.3);
    let run = run_product(alpha, beta, a, b).map_err(|e| e.to_string())?;
    close("product completeness", run.pass.total(), 1.0, 1e-12)?;
    Ok("10^4 random states: norm, completeness, phase invariance".into())
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("empty interferometer calibration", empty_mzi),
        ("single-pass closed form oracle", closed_form_oracle),
        ("single-pass success law sweep", single_pass_law),
        ("iterated totals", iterated_totals),
        ("mixed-state input", mixed_case),
        ("mixed vs product crossover", crossover),
        ("Monte Carlo consistency", monte_carlo_consistency),
        ("throughput presets", throughput_reproduction),
        ("decay rate discrepancy surfaced", decay_rate_discrepancy),
        ("unitarity and conservation", conservation_suite),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
