//! Acceptance criteria, one PASS/FAIL line each.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use zeta_saddle::cnum::{wrap_angle, ComplexVal};
use zeta_saddle::direct::{a_direct, zeta_series};
use zeta_saddle::phase::{psi, psi_derivatives, singularity_distance};
use zeta_saddle::saddles::{
    contributory_range, heuristic_m, refine_saddle, RangeMethod, DEFAULT_MAX_ITER, DEFAULT_TOL,
};
use zeta_saddle::sdexp::{assemble, assemble_traced, omega, EvaluationReport};
use zeta_saddle::tables::{
    as_printed, digits_match, table_setup, value_table, ValueRow, ASYMPTOTIC_UNITS, DIRECT_UNITS, SADDLE_COLUMNS,
};
use zeta_saddle::tracer::{classify, detect_stokes};
use zeta_saddle::SeriesPoint;

type Outcome = (bool, String);
type Check = fn() -> Result<(), String>;

fn pt(n: u32, a: f64) -> SeriesPoint {
    SeriesPoint::new(n, a, 0.5).unwrap()
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn within(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

fn rounds_to(x: f64, printed: &str) -> bool {
    let r = as_printed(x, printed);
    r == printed
        || (r.trim_start_matches('-') == printed.trim_start_matches('-')
            && r.trim_start_matches(['-', '0', '.']).is_empty())
}

fn traced_report(p: &SeriesPoint) -> EvaluationReport {
    let c = classify(p, heuristic_m(p) + 4).unwrap();
    assemble_traced(p, &c, 2).unwrap()
}

fn saddle_table() -> Outcome {
    let flagged = (40u32, 1.0f64, 6usize);
    let ((misses, labelled_misses, flagged_ok), elapsed) = timed(|| {
        let mut misses = Vec::new();
        let mut labelled_misses = 0;
        for (ci, (n, a, cells)) in SADDLE_COLUMNS.iter().enumerate() {
            let p = pt(*n, *a);
            // the printed headings are exchanged, so the digits belong to the other column's (n, a)
            let (on, oa, _) = SADDLE_COLUMNS[1 - ci];
            let q = pt(on, oa);
            for (i, (re, im)) in cells.iter().enumerate() {
                let k = i + 1;
                let as_labelled = refine_saddle(k, &p, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap().w;
                if !(rounds_to(as_labelled.re, re) && rounds_to(as_labelled.im, im)) {
                    labelled_misses += 1;
                }
                if (*n, *a, k) == flagged {
                    continue;
                }
                let w = refine_saddle(k, &q, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap().w;
                if !(rounds_to(w.re, re) && rounds_to(w.im, im)) {
                    misses.push(format!(
                        "n={on} a={oa} k={k}: printed {re}{}{im}i, got {:.6}{:+.6}i",
                        if im.starts_with('-') { "" } else { "+" },
                        w.re,
                        w.im
                    ));
                }
            }
        }
        // certify k = 6 under both readings of the headings
        let flagged_ok = SADDLE_COLUMNS.iter().all(|(n, a, _)| {
            let s = refine_saddle(flagged.2, &pt(*n, *a), DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
            s.residual <= 1e-12 && s.w.im > 10.0 * PI && s.w.im < 12.0 * PI
        });
        (misses, labelled_misses, flagged_ok)
    });
    let ok = misses.is_empty() && flagged_ok && elapsed < Duration::from_secs(1);
    let detail = format!(
        "13 unflagged cells, headings exchanged: {} mismatched [{}]; as labelled: {labelled_misses}/14 mismatched; \
         flagged cell certified in (10pi, 12pi): {flagged_ok}; {:.3}s",
        misses.len(),
        misses.join("; "),
        elapsed.as_secs_f64()
    );
    (ok, detail)
}

fn row_misses(rows: &[ValueRow], id: u8, oracle_row: Option<f64>) -> Vec<String> {
    let (_, printed, _) = table_setup(id).unwrap();
    let mut misses = Vec::new();
    for (r, pr) in rows.iter().zip(printed) {
        let direct_ok = digits_match(r.direct.re, pr.direct.0, DIRECT_UNITS)
            && digits_match(r.direct.im, pr.direct.1, DIRECT_UNITS);
        if !direct_ok {
            misses.push(format!(
                "param {}: direct printed {}, got {:.10}{:+.10}i",
                r.param, r.printed_direct, r.direct.re, r.direct.im
            ));
        }
        if Some(r.param) == oracle_row {
            if r.rel_err > 5e-4 {
                misses.push(format!("param {}: relative error {:.2e} > 5e-4", r.param, r.rel_err));
            }
            continue;
        }
        let asym_ok = digits_match(r.asymptotic.re, pr.asymptotic.0, ASYMPTOTIC_UNITS)
            && digits_match(r.asymptotic.im, pr.asymptotic.1, ASYMPTOTIC_UNITS);
        if !asym_ok {
            misses.push(format!(
                "param {}: asymptotic printed {}, got {}{:+}i",
                r.param,
                r.printed_asymptotic,
                as_printed(r.asymptotic.re, pr.asymptotic.0),
                as_printed(r.asymptotic.im, pr.asymptotic.1).parse::<f64>().unwrap()
            ));
        }
    }
    misses
}

fn table_two() -> Outcome {
    let (rows, elapsed) = timed(|| value_table(2).unwrap());
    let misses = row_misses(&rows, 2, Some(1.0));
    let ok = misses.is_empty() && elapsed < Duration::from_secs(5);
    (
        ok,
        format!(
            "{} mismatches [{}]; {:.3}s",
            misses.len(),
            misses.join("; "),
            elapsed.as_secs_f64()
        ),
    )
}

fn table_three() -> Outcome {
    let rows = value_table(3).unwrap();
    let misses = row_misses(&rows, 3, None);
    let ms: Vec<usize> = rows.iter().map(|r| r.m).collect();
    let ok = misses.is_empty() && ms == [7, 9, 13, 17, 33, 41];
    (
        ok,
        format!("{} mismatches [{}]; traced m {ms:?}", misses.len(), misses.join("; ")),
    )
}

fn table_four() -> Outcome {
    let (rows, elapsed) = timed(|| value_table(4).unwrap());
    let misses = row_misses(&rows, 4, None);
    let ms: Vec<usize> = rows.iter().map(|r| r.m).collect();
    let ks: Vec<usize> = rows.iter().map(|r| r.k_star).collect();
    let want_k: Vec<usize> = rows.iter().map(|r| (r.param as usize).div_ceil(2)).collect();
    let ok = misses.is_empty() && ms == [16, 31, 46, 61, 76] && ks == want_k && elapsed < Duration::from_secs(30);
    (
        ok,
        format!(
            "{} mismatches [{}]; k* {ks:?} (want {want_k:?}); m {ms:?}; {:.3}s",
            misses.len(),
            misses.join("; "),
            elapsed.as_secs_f64()
        ),
    )
}

fn scalar_checks() -> Outcome {
    let i_hat = |r: &EvaluationReport, k: usize| r.per_saddle.iter().find(|t| t.k == k).unwrap().i_hat;
    let p = pt(50, 5.0);
    let i2 = i_hat(&traced_report(&p), 2);
    let a50 = a_direct(&p, None).unwrap().norm();
    let p = pt(20, 6.0 * PI);
    let i6 = i_hat(&traced_report(&p), 6);
    let a20 = a_direct(&p, None).unwrap().norm();
    let p = pt(50, PI);
    let s = refine_saddle(2, &p, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
    let w2 = omega(&s, &p, true).unwrap();
    let w2_limit = omega(&s, &p, false).unwrap();
    let ok = within(i2, 0.019205, 2e-5)
        && within(a50, 0.018924, 2e-5)
        && within(i6, 0.01634, 5e-4)
        && within(a20, 0.03653, 5e-4)
        && within(w2, 0.02235, 5e-5)
        && within(w2_limit, 0.01773, 5e-5);
    (
        ok,
        format!("I2 {i2:.6}, |A| {a50:.6}; I6 {i6:.5}, |A| {a20:.5}; omega2 {w2:.5}, limit {w2_limit:.5}"),
    )
}

fn stokes() -> Outcome {
    match detect_stokes(&pt(5, 6.0), 5.5, 6.5) {
        Ok(Some(a)) => {
            let ok = within(a, 6.032, 5e-3) && within(5.0 * a, 30.160, 0.03);
            (ok, format!("a* {a:.4}, t* {:.3}", 5.0 * a))
        }
        other => (false, format!("no transition found: {other:?}")),
    }
}

fn series_sanity() -> Outcome {
    let z = zeta_series(ComplexVal::new(2.0, 0.0), 80).unwrap();
    let err = (z - PI * PI / 6.0).norm();
    (err <= 1e-13, format!("|sum - pi^2/6| = {err:.2e}"))
}

fn finite_difference_grid() -> Result<(), String> {
    let h = 1e-3;
    for n in [10u32, 20, 50] {
        for a in [0.5, 1.0, 2.0, 5.0] {
            let p = pt(n, a);
            for x in [-1.0, 0.5, 2.0, 4.0] {
                for y in [2.0, 8.0, 20.0, 35.0] {
                    let w = ComplexVal::new(x, y);
                    if singularity_distance(w) <= 0.5 {
                        continue;
                    }
                    let d = psi_derivatives(w, &p, 6).map_err(|e| e.to_string())?;
                    for j in 1..=6 {
                        let at = |dx: f64| -> ComplexVal {
                            let v = w + ComplexVal::new(dx, 0.0);
                            if j == 1 {
                                let diff = psi(v, &p).unwrap() - psi(w, &p).unwrap();
                                ComplexVal::new(diff.re, wrap_angle(diff.im))
                            } else {
                                psi_derivatives(v, &p, j - 1).unwrap().get(j - 1)
                            }
                        };
                        let fd = (at(-2.0 * h) - at(-h) * 8.0 + at(h) * 8.0 - at(2.0 * h)) / (12.0 * h);
                        let rel = (fd - d.get(j)).norm() / d.get(j).norm();
                        if rel > 1e-6 {
                            return Err(format!("n={n} a={a} w={w} j={j}: {rel:.1e}"));
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

fn path_invariants() -> Result<(), String> {
    for (n, a) in [(20, 0.5), (20, 1.0), (50, 1.0), (20, 5.0), (30, 2.0 * PI)] {
        let p = pt(n, a);
        let c = classify(&p, heuristic_m(&p) + 4).map_err(|e| e.to_string())?;
        for path in c.paths.values().flatten() {
            if path.im_psi_drift() > 1e-6 {
                return Err(format!("n={n} a={a} k={}: drift {:.1e}", path.k, path.im_psi_drift()));
            }
            if path.points.windows(2).any(|q| q[1].re_psi > q[0].re_psi + 1e-9) {
                return Err(format!("n={n} a={a} k={}: Re psi rose", path.k));
            }
        }
    }
    Ok(())
}

fn table_configurations() -> Vec<SeriesPoint> {
    let mut out = Vec::new();
    for id in [2u8, 3, 4] {
        let (n, rows, to_a) = table_setup(id).unwrap();
        out.extend(rows.iter().map(|r| pt(n, to_a(r.param))));
    }
    out
}

fn omega_positive() -> Result<(), String> {
    for p in table_configurations() {
        let r = traced_report(&p);
        if let Some(t) = r.per_saddle.iter().find(|t| !(t.omega > 0.0)) {
            return Err(format!("n={} a={} k={}: omega {}", p.n, p.a, t.k, t.omega));
        }
    }
    Ok(())
}

fn peak_index() -> Result<(), String> {
    let top = |p: &SeriesPoint| {
        let r = traced_report(p);
        r.per_saddle
            .iter()
            .max_by(|x, y| x.i_hat.total_cmp(&y.i_hat))
            .unwrap()
            .k
    };
    for big_n in 2..=5usize {
        let k = top(&pt(30, PI * big_n as f64));
        if k != big_n {
            return Err(format!("a={big_n}pi n=30: peak at k={k}"));
        }
    }
    for n in [20, 50] {
        for a in [0.5, 1.0, 2.0] {
            let k = top(&pt(n, a));
            if k != 1 {
                return Err(format!("a={a} n={n}: peak at k={k}"));
            }
        }
    }
    Ok(())
}

fn error_falls_with_n() -> Result<(), String> {
    let rel = |n: u32| {
        let p = pt(n, 1.0);
        let r = assemble(&p, &contributory_range(&p, RangeMethod::Traced).unwrap(), 2).unwrap();
        r.rel_err.unwrap()
    };
    let (r50, r20) = (rel(50), rel(20));
    if r50 < r20 {
        Ok(())
    } else {
        Err(format!("n=50 {r50:.2e} vs n=20 {r20:.2e}"))
    }
}

fn properties() -> Outcome {
    let checks: [(&str, Check); 5] = [
        ("finite differences", finite_difference_grid),
        ("path invariants", path_invariants),
        ("omega > 0", omega_positive),
        ("peak index", peak_index),
        ("error falls with n", error_falls_with_n),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, f) in checks {
        match f() {
            Ok(()) => parts.push(format!("{name} ok")),
            Err(e) => {
                ok = false;
                parts.push(format!("{name} FAILED ({e})"));
            }
        }
    }
    (ok, parts.join("; "))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("saddle table", saddle_table),
        ("value table n=20", table_two),
        ("value table n=50", table_three),
        ("value table a=pi*N", table_four),
        ("scalar magnitudes", scalar_checks),
        ("stokes location", stokes),
        ("series sanity", series_sanity),
        ("property suites", properties),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let (ok, detail) = f();
        failed += usize::from(!ok);
        println!("{} {}. {name}: {detail}", if ok { "PASS" } else { "FAIL" }, i + 1);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
