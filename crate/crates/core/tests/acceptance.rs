//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the process exits non-zero if any of them fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;

use haarwords::bounds::{g_derivative_bound_check, markov_check};
use haarwords::montecarlo::experiments::{mc_expect, oracle_suite, strong_convergence_experiment, StrongConvConfig};
use haarwords::montecarlo::norm::{NormMethod, NormOptions};
use haarwords::montecarlo::projector::check_q;
use haarwords::montecarlo::weyl::{dim_bounds_check, weights_up_to};
use haarwords::rng::substream;
use haarwords::rwalk::{fit_log_slope, proper_power_stats, return_probability, spectral_radius, SpectralOptions};
use haarwords::symgroup::{all_perms, koike_validation_sweep};
use haarwords::weingarten::wg;
use haarwords::wordint::{decay_check_word, expect_stable_character, interpolate_phi, Dimension};
use haarwords::{Group, Partition, Perm, Poly, RationalFunction, UnitaryTuple, WalkMeasure, Word, WordPoly};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn p(text: &str) -> Partition {
    Partition::parse(text).unwrap()
}

fn commutator() -> Word {
    Word::parse("abAB", 2).unwrap()
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

fn weingarten_closed_forms() -> Outcome {
    let id = RationalFunction::new(Poly::from_i64(&[1]), Poly::from_i64(&[-1, 0, 1])).unwrap();
    let tr = RationalFunction::new(Poly::from_i64(&[-1]), Poly::from_i64(&[0, -1, 0, 1])).unwrap();
    let got_id = wg(2, &Perm::identity(2)).map_err(|e| e.to_string())?;
    let got_tr = wg(2, &Perm::transposition(2, 0, 1)).map_err(|e| e.to_string())?;
    ensure(got_id == id, || format!("Wg(2, id) = {got_id}"))?;
    ensure(got_tr == tr, || format!("Wg(2, (12)) = {got_tr}"))?;
    let mut checked = 0;
    for l in 1..=4 {
        let perms = all_perms(l);
        for n in l..=l + 2 {
            let nr = rat(n as i64);
            let w: Vec<BigRational> =
                perms.iter().map(|q| wg(l, q).unwrap().eval(&nr).expect("no pole for n >= L")).collect();
            let index = |q: &Perm| q.rank();
            for s in &perms {
                for pi in &perms {
                    let mut acc = BigRational::zero();
                    for t in &perms {
                        let cycles = s.inverse().compose(t).num_cycles();
                        acc += nr.pow(cycles as i32) * &w[index(&t.inverse().compose(pi))];
                    }
                    let expect = if s == pi { BigRational::one() } else { BigRational::zero() };
                    ensure(acc == expect, || format!("Gram inversion fails at L = {l}, n = {n}"))?;
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("closed forms exact, {checked} Gram entries exact"))
}

fn commutator_integral() -> Outcome {
    let w = commutator();
    for n in 2..=10 {
        let m = expect_stable_character(&p("1"), &p(""), &w, Dimension::Numeric(n)).map_err(|e| e.to_string())?;
        let v = m.value.as_numeric().cloned().unwrap_or_else(BigRational::zero);
        ensure(v == BigRational::new(1.into(), (n as i64).into()), || format!("n = {n}: {v}"))?;
    }
    let est = mc_expect(&p("1"), &p(""), &w, 5, 100_000, Group::Unitary, 2).map_err(|e| e.to_string())?;
    let z = (est.mean_re - 0.2).abs() / est.std_error;
    ensure(est.within(0.2, 4.0), || format!("mean {} se {} z {z:.2}", est.mean_re, est.std_error))?;
    Ok(format!("1/n exact for n = 2..10; MC mean {:.5} (z = {z:.2})", est.mean_re))
}

fn interpolation_structure() -> Outcome {
    let r = interpolate_phi(&p("2"), &p(""), &commutator(), None).map_err(|e| e.to_string())?;
    let bound = (24.0 * (1.0 + 8f64.ln())).ceil() as usize;
    ensure(r.held_out_residuals.len() == 5, || format!("{} held-out points", r.held_out_residuals.len()))?;
    ensure(r.held_out_residuals.iter().all(Zero::is_zero), || "non-zero held-out residual".into())?;
    let degree = r.fitted_degree.unwrap_or(0);
    ensure(degree <= bound, || format!("fitted degree {degree} > {bound}"))?;
    Ok(format!("5 zero residuals, fitted degree {degree} <= {bound}"))
}

fn decay_orders() -> Outcome {
    let mut notes = Vec::new();
    for lambda in ["2", "1,1"] {
        let (_, v) = decay_check_word(&p(lambda), &p(""), &commutator()).map_err(|e| e.to_string())?;
        let ok = v.observed_order.is_none_or(|o| o >= 2);
        ensure(ok, || format!("λ = ({lambda}): order {:?}", v.observed_order))?;
        notes.push(format!("({lambda}): {:?}", v.observed_order));
    }
    let w = commutator();
    let (_, v) = decay_check_word(&p("1"), &p("1"), &w).map_err(|e| e.to_string())?;
    ensure(v.observed_order.is_none_or(|o| o >= 1), || format!("(1),(1): order {:?}", v.observed_order))?;
    notes.push(format!("(1),(1) on abAB: {:?}", v.observed_order));
    Ok(format!("orders {}", notes.join(", ")))
}

fn strong_convergence() -> Outcome {
    let target = 2.0 * 3f64.sqrt();
    let mut notes = Vec::new();
    for (n, k, l, tol) in [(300, 1, 0, 0.15), (80, 1, 1, 0.25)] {
        let start = Instant::now();
        let cfg = StrongConvConfig {
            r: 2,
            n,
            k,
            l,
            poly: WordPoly::kesten(2).unwrap(),
            samples: 1,
            seed: 11,
            reference: None,
            norm: NormOptions { method: NormMethod::Lanczos, seed: 11, ..NormOptions::default() },
        };
        let rep = strong_convergence_experiment(&cfg).map_err(|e| e.to_string())?;
        let dev = (rep.norm_estimate - target).abs();
        ensure(dev < tol, || format!("k={k}, l={l}, n={n}: {:.4} (deviation {dev:.4})", rep.norm_estimate))?;
        ensure(start.elapsed() < Duration::from_secs(120), || format!("n={n} took {:?}", start.elapsed()))?;
        notes.push(format!("(k,l)=({k},{l}) n={n}: {:.4}", rep.norm_estimate));
    }
    Ok(notes.join("; "))
}

fn projector_checks() -> Outcome {
    let tuple = UnitaryTuple::sample(4, 4, Group::Unitary, 5, 0).map_err(|e| e.to_string())?;
    let r = check_q(&p("1"), &p("1"), 4, &tuple.matrices).map_err(|e| e.to_string())?;
    ensure(r.idempotence < 1e-10, || format!("‖q²−q‖ = {:e}", r.idempotence))?;
    ensure(r.self_adjointness < 1e-10, || format!("‖q−q*‖ = {:e}", r.self_adjointness))?;
    ensure((r.trace - 15.0).abs() < 1e-10, || format!("Tr q = {}", r.trace))?;
    ensure(r.commutator < 1e-10, || format!("commutator {:e}", r.commutator))?;
    ensure(r.contraction < 1e-12, || format!("contraction {:e}", r.contraction))?;
    Ok(format!(
        "idempotence {:.1e}, adjoint {:.1e}, trace {:.12}, commutator {:.1e}, contraction {:.1e}",
        r.idempotence, r.self_adjointness, r.trace, r.commutator, r.contraction
    ))
}

fn dimension_bounds() -> Outcome {
    let mut count = 0;
    for n in 4..=40 {
        for w in weights_up_to(n, 8).map_err(|e| e.to_string())? {
            dim_bounds_check(&w).map_err(|e| e.to_string())?;
            count += 1;
        }
    }
    Ok(format!("{count} weights checked"))
}

fn random_walk() -> Outcome {
    let mu = WalkMeasure::uniform_generators(2).map_err(|e| e.to_string())?;
    let r4 = return_probability(&mu, 4).map_err(|e| e.to_string())?;
    ensure(r4.exact == BigRational::new(7.into(), 64.into()), || format!("P(g_4 = e) = {}", r4.exact))?;
    let rho = 3f64.sqrt() / 2.0;
    let b = spectral_radius(&mu, &SpectralOptions::default()).map_err(|e| e.to_string())?;
    ensure(b.width() < 0.05 && b.contains(rho), || format!("bracket [{}, {}]", b.lower, b.upper))?;
    let table = proper_power_stats(&mu, 30, 100_000, 7).map_err(|e| e.to_string())?;
    let slope = fit_log_slope(&table, 10, 30).ok_or("no slope")?;
    let gap = (slope - rho.ln()).abs();
    ensure(gap < 0.05, || format!("slope {slope:.4} vs log ρ {:.4}", rho.ln()))?;
    Ok(format!(
        "P4 = 7/64, bracket [{:.4}, {:.4}], slope {slope:.4} vs {:.4}",
        b.lower,
        b.upper,
        rho.ln()
    ))
}

fn chebyshev(d: usize) -> Vec<f64> {
    let (mut prev, mut cur) = (vec![1.0], vec![0.0, 1.0]);
    for _ in 1..d {
        let mut next = vec![0.0; cur.len() + 1];
        for (i, c) in cur.iter().enumerate() {
            next[i + 1] += 2.0 * c;
        }
        for (i, c) in prev.iter().enumerate() {
            next[i] -= c;
        }
        prev = std::mem::replace(&mut cur, next);
    }
    cur
}

fn analytic_gadgets() -> Outcome {
    for l in 1..=20 {
        for i in 0..=12 {
            g_derivative_bound_check(l, i, 25).map_err(|e| e.to_string())?;
        }
    }
    let mut rng = substream(29, "acceptance-markov", 0);
    let mut worst: f64 = 0.0;
    for _ in 0..500 {
        let d = rng.random_range(1..=10usize);
        let k = rng.random_range(1..=d.min(3));
        let coeffs: Vec<f64> = (0..=d).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        let a = rng.random::<f64>() - 0.5;
        let r = markov_check(&coeffs, k, a, a + 0.1 + rng.random::<f64>(), None).map_err(|e| e.to_string())?;
        worst = worst.max(r.ratio);
    }
    ensure(worst <= 1.0 + 1e-9, || format!("worst Markov ratio {worst}"))?;
    for d in [4, 8] {
        for k in 1..=4.min(d) {
            let r = markov_check(&chebyshev(d), k, -1.0, 1.0, None).map_err(|e| e.to_string())?;
            ensure((r.ratio - 1.0).abs() < 1e-9, || format!("T{d}, k={k}: ratio {}", r.ratio))?;
        }
    }
    Ok(format!("g suite L <= 20 passes; worst random Markov ratio {worst:.6}; Chebyshev equality"))
}

fn special_unitary() -> Outcome {
    let est = mc_expect(&p("1"), &p(""), &commutator(), 5, 100_000, Group::SpecialUnitary, 3)
        .map_err(|e| e.to_string())?;
    let z = (est.mean_re - 0.2).abs() / est.std_error;
    ensure(est.within(0.2, 4.0), || format!("mean {} se {} z {z:.2}", est.mean_re, est.std_error))?;
    Ok(format!("SU(5) mean {:.5} (z = {z:.2})", est.mean_re))
}

fn oracle_agreement() -> Outcome {
    let cases = oracle_suite(20_000, 1).map_err(|e| e.to_string())?;
    let failed: Vec<String> =
        cases.iter().filter(|c| !c.passed).map(|c| format!("{} n={} z={:.2}", c.monomial, c.n, c.z_score)).collect();
    ensure(failed.is_empty(), || failed.join("; "))?;
    let worst_z = cases.iter().map(|c| c.z_score).fold(0.0, f64::max);
    let err = koike_validation_sweep().map_err(|e| e.to_string())?;
    ensure(err < 1e-9, || format!("expansion error {err:e}"))?;
    Ok(format!("{} monomials within 4 SE (worst z {worst_z:.2}); expansion error {err:.1e}", cases.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("Weingarten closed forms and Gram inversion", weingarten_closed_forms),
        ("commutator integral", commutator_integral),
        ("interpolation structure", interpolation_structure),
        ("decay orders", decay_orders),
        ("norm convergence at desk scale", strong_convergence),
        ("invariant projector", projector_checks),
        ("dimension bounds", dimension_bounds),
        ("free-group random walk", random_walk),
        ("g_L and Markov gadgets", analytic_gadgets),
        ("SU(n) commutator integral", special_unitary),
        ("oracle agreement and expansion sweep", oracle_agreement),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{secs:.1}s]", i + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL {:>2} {name}: {detail} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
