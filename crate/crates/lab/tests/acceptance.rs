//! Acceptance suite: one PASS/FAIL line per criterion, run through the
//! presets. Criteria this implementation does not meet are listed in
//! `KNOWN_FAILING`; the test asserts every status matches, so a change in
//! either direction is caught. Runs without the test harness so the report
//! is always printed.

use std::time::Instant;

use shockstab::experiment::{
    base_flow, density_face_weights, run_all, Agreement, PointOutcome, UNSTABLE_THRESHOLD,
};
use shockstab::presets;
use shockstab::ExperimentConfig;
use shockstab_core::marching::{march, rhs, RunConfig};
use shockstab_core::stability::{assemble, eigensolve, AssemblyOptions};
use shockstab_core::{
    gas::prim_to_cons, GasModel, MeanField, Order, Primitive, Scheme, SolverKind,
};

/// Criteria that fail here, with the reason recorded in the README.
const KNOWN_FAILING: &[u32] = &[1, 2, 4, 7, 9];

struct Outcome {
    id: u32,
    pass: bool,
    detail: String,
}

fn preset(name: &str, sets: &[(&str, &str)]) -> Vec<PointOutcome> {
    let mut cfg = presets::load(name).unwrap();
    for (k, v) in sets {
        cfg.set(k, v).unwrap();
    }
    let out = run_all(&cfg);
    for o in &out {
        assert!(o.summary.error.is_none(), "{name}: {:?}", o.summary.error);
    }
    out
}

fn max_real(o: &PointOutcome) -> f64 {
    o.summary.analysis.as_ref().unwrap().max_real
}

fn single(sets: &[(&str, &str)]) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    for (k, v) in sets {
        cfg.set(k, v).unwrap();
    }
    cfg
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let pts = preset(
        "validation-sweep",
        &[(
            "sweep.problem.epsilon",
            "0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9",
        )],
    );
    let mut pass = true;
    let mut parts = Vec::new();
    for o in &pts {
        let v = o.summary.validation.unwrap();
        let shown = v
            .gap
            .map(|g| format!("{g:.3}"))
            .unwrap_or_else(|| "-".into());
        parts.push(format!("{}:{}", o.summary.epsilon, shown));
        let r2_ok = o
            .summary
            .march
            .as_ref()
            .and_then(|m| m.fit_r2)
            .is_some_and(|r2| r2 >= 0.99);
        if r2_ok && v.agreement == Agreement::Disagree {
            pass = false;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    pass &= secs < 300.0;
    Outcome {
        id: 1,
        pass,
        detail: format!("gaps {} ({secs:.0} s)", parts.join(" ")),
    }
}

fn criterion_2_and_3() -> (Outcome, Outcome) {
    let pts = preset("solver-grid", &[]);
    let mut pass = true;
    let mut parts = Vec::new();
    let mut roe = [0.0; 3];
    for o in &pts {
        let (solver, order) = (&o.summary.axes[0].value, &o.summary.axes[1].value);
        let m = max_real(o);
        let expect_unstable = matches!(solver.as_str(), "roe" | "hllc") || order == "5";
        let unstable = m > UNSTABLE_THRESHOLD;
        if unstable != expect_unstable {
            pass = false;
            parts.push(format!(
                "{solver}-{order}={m:.3e} (expected {})",
                if expect_unstable {
                    "unstable"
                } else {
                    "stable"
                }
            ));
        }
        if solver == "roe" {
            roe[["1", "2", "5"].iter().position(|x| x == order).unwrap()] = m;
        }
    }
    let detail2 = if parts.is_empty() {
        "all 12 signs match".to_string()
    } else {
        parts.join(", ")
    };
    let pass3 = roe[1] > roe[2] && roe[2] > roe[0] && roe[0] > 0.0;
    (
        Outcome {
            id: 2,
            pass,
            detail: detail2,
        },
        Outcome {
            id: 3,
            pass: pass3,
            detail: format!(
                "roe-2 {:.3} > roe-5 {:.3} > roe-1 {:.3}",
                roe[1], roe[2], roe[0]
            ),
        },
    )
}

fn criterion_4() -> Outcome {
    let pts = preset("near-shock-cap", &[]);
    let by = |cap: &str| max_real(pts.iter().find(|o| o.summary.axes[0].value == cap).unwrap());
    let (first, second, third) = (by("first"), by("second"), by("smoothest-third"));
    let pass =
        first <= UNSTABLE_THRESHOLD && second <= UNSTABLE_THRESHOLD && third > UNSTABLE_THRESHOLD;
    Outcome {
        id: 4,
        pass,
        detail: format!("hll-5 caps: none {:.3}, first {first:.3}, second {second:.3}, smoothest-third {third:.3}", by("none")),
    }
}

fn criterion_5() -> Outcome {
    let pts = preset("hybrid", &[]);
    let (a, b) = (max_real(&pts[0]), max_real(&pts[1]));
    Outcome {
        id: 5,
        pass: a > UNSTABLE_THRESHOLD && b > UNSTABLE_THRESHOLD,
        detail: format!("hybrid1 {a:.4}, hybrid2 {b:.4}"),
    }
}

fn criteria_6_and_7() -> (Outcome, Outcome) {
    let pts = preset("entropy-eps", &[]);
    let (main, last) = pts.split_at(pts.len() - 1);
    let lam: Vec<f64> = main.iter().map(max_real).collect();
    let sinc: Vec<f64> = main
        .iter()
        .map(|o| o.summary.analysis.as_ref().unwrap().entropy_increase)
        .collect();
    let range =
        lam.iter().cloned().fold(f64::MIN, f64::max) - lam.iter().cloned().fold(f64::MAX, f64::min);
    // rises below the verdict threshold are eigensolver noise, not increases
    let rises: Vec<f64> = lam
        .windows(2)
        .map(|w| w[1] - w[0])
        .filter(|d| *d > UNSTABLE_THRESHOLD)
        .collect();
    let at_99 = max_real(&last[0]);
    let pass6 = (rises.is_empty() || (rises.len() == 1 && rises[0] < 0.05 * range))
        && at_99 <= UNSTABLE_THRESHOLD;
    let fmt = |v: &[f64]| {
        v.iter()
            .map(|x| format!("{x:.4}"))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let pass7 = sinc.windows(2).all(|w| w[1] > w[0]);
    (
        Outcome {
            id: 6,
            pass: pass6,
            detail: format!("max Re λ {} | ε=0.99 {at_99:.2e}", fmt(&lam)),
        },
        Outcome {
            id: 7,
            pass: pass7,
            detail: format!("entropy increase {}", fmt(&sinc)),
        },
    )
}

fn criterion_8() -> Outcome {
    let pts = preset("localization", &[]);
    let roe = pts
        .iter()
        .find(|o| o.summary.axes[0].value == "roe")
        .unwrap();
    let a = roe.summary.analysis.as_ref().unwrap();
    let soft = (a.normalized_max_real - 0.67356).abs() / 0.67356;
    Outcome {
        id: 8,
        pass: a.argmax_column == 6,
        detail: format!(
            "argmax column {}; max Re λ h/u_L = {:.4} ({:+.1}% of 0.67356, soft target {})",
            a.argmax_column,
            a.normalized_max_real,
            100.0 * (a.normalized_max_real / 0.67356 - 1.0),
            if soft <= 0.25 { "met" } else { "missed" }
        ),
    }
}

fn criterion_9() -> Outcome {
    let pts = preset("char-vs-prim", &[]);
    let mut pass = true;
    let mut parts = Vec::new();
    for mach in ["5", "10", "15", "20"] {
        let get = |space: &str| {
            max_real(
                pts.iter()
                    .find(|o| o.summary.axes[0].value == mach && o.summary.axes[1].value == space)
                    .unwrap(),
            )
        };
        let (p, c) = (get("primitive"), get("characteristic"));
        pass &= p > c && c > 0.0;
        parts.push(format!("M{mach}: prim {p:.3} char {c:.3}"));
    }
    Outcome {
        id: 9,
        pass,
        detail: parts.join(", "),
    }
}

fn criterion_10() -> Outcome {
    let cfg = single(&[("scheme.solver", "hll")]);
    let base = base_flow(&cfg).unwrap();
    let fw = density_face_weights(&base.field, &base.scheme, 6);
    let target = [0.21135, 0.62458, 0.16407];
    let quantitative = fw
        .weights
        .iter()
        .zip(target)
        .all(|(w, t)| (w - t).abs() <= 0.05);
    Outcome {
        id: 10,
        pass: fw.weights.iter().all(|&w| w > 0.05),
        detail: format!(
            "ρ weights at face 6+1/2 ({:.4}, {:.4}, {:.4}), β ({:.3}, {:.3}, {:.3}); ±0.05 match {}",
            fw.weights[0],
            fw.weights[1],
            fw.weights[2],
            fw.beta[0],
            fw.beta[1],
            fw.beta[2],
            if quantitative { "met" } else { "missed" }
        ),
    }
}

/// Small always-runnable properties; the full suites live in the crates'
/// unit tests.
fn criterion_11() -> Outcome {
    let gas = GasModel::air();
    let mut failures = Vec::new();
    let w = Primitive {
        rho: 1.4,
        u: 3.0,
        v: 0.5,
        p: 1.0,
    };
    let uniform = MeanField::uniform(11, 11, 1.0, prim_to_cons(&w, &gas));

    // uniform field: zero residual, constants in the kernel of S
    let bc = shockstab_core::BoundarySpec {
        left: shockstab_core::BoundaryKind::Inflow(prim_to_cons(&w, &gas)),
        right: shockstab_core::BoundaryKind::Inflow(prim_to_cons(&w, &gas)),
    };
    let mut field = uniform.clone();
    field.apply_boundaries(&bc, &gas).unwrap();
    for order in [Order::First, Order::Second, Order::Fifth] {
        let scheme = Scheme::new(SolverKind::Roe, order);
        let r = rhs(&field, &scheme, &gas).unwrap();
        if r.du.iter().any(|d| d.amax() > 1e-12) {
            failures.push(format!("uniform residual order {}", order.as_number()));
        }
        let s = assemble(&field, &scheme, &bc, &gas, &AssemblyOptions::default()).unwrap();
        let expect = [5, 9, 13][[Order::First, Order::Second, Order::Fifth]
            .iter()
            .position(|o| *o == order)
            .unwrap()];
        let centre = s.nx * 5 + 5;
        if s.block_count(centre) != expect {
            failures.push(format!(
                "block count {} at order {}",
                s.block_count(centre),
                order.as_number()
            ));
        }
    }

    // eigensolver against a matrix with known spectrum
    let d = nalgebra::DMatrix::from_fn(6, 6, |i, j| {
        if i == j {
            i as f64 - 2.0
        } else if j == i + 1 {
            0.5
        } else {
            0.0
        }
    });
    let spec = eigensolve(&d).unwrap();
    if (spec.max_real - 3.0).abs() > 1e-12 {
        failures.push(format!("triangular spectrum max {}", spec.max_real));
    }

    // S against finite differences of the residual on a first-order shock
    let cfg = single(&[
        ("scheme.solver", "vanleer"),
        ("scheme.order", "1"),
        ("scheme.space", "conservative"),
    ]);
    let base = base_flow(&cfg).unwrap();
    let s = assemble(
        &base.field,
        &base.scheme,
        &base.problem.boundaries(),
        &gas,
        &AssemblyOptions::default(),
    )
    .unwrap();
    let dense = s.to_dense();
    let n = dense.nrows();
    let dir = nalgebra::DVector::from_fn(n, |k, _| ((k * 7919) % 101) as f64 / 101.0 - 0.5);
    let h = 1e-6;
    let shifted = |sign: f64| {
        let mut f = base.field.clone();
        let mut states = f.interior_states();
        for (k, u) in states.iter_mut().enumerate() {
            u.rho += sign * h * dir[4 * k];
            u.rho_u += sign * h * dir[4 * k + 1];
            u.rho_v += sign * h * dir[4 * k + 2];
            u.rho_e += sign * h * dir[4 * k + 3];
        }
        f.set_interior_states(&states);
        f.apply_boundaries(&base.problem.boundaries(), &gas)
            .unwrap();
        rhs(&f, &base.scheme, &gas).unwrap().du
    };
    let (p, m) = (shifted(1.0), shifted(-1.0));
    let sv = &dense * &dir;
    let mut err = 0.0f64;
    let mut scale = 0.0f64;
    for k in 0..n / 4 {
        for a in 0..4 {
            let fd = (p[k][a] - m[k][a]) / (2.0 * h);
            err = err.max((fd - sv[4 * k + a]).abs());
            scale = scale.max(sv[4 * k + a].abs());
        }
    }
    if err > 1e-6 * scale.max(1.0) {
        failures.push(format!(
            "S·v vs finite differences: {err:.2e} of {scale:.2e}"
        ));
    }

    // seeded marches are bit-identical
    let run = RunConfig {
        end_time: 0.5,
        ..RunConfig::default()
    };
    let bc = base.problem.boundaries();
    let a = march(&base.field, &base.scheme, &bc, &gas, &run).unwrap();
    let b = march(&base.field, &base.scheme, &bc, &gas, &run).unwrap();
    if a.series != b.series || a.field != b.field {
        failures.push("seeded marches differ".to_string());
    }

    let pass = failures.is_empty();
    let detail = if pass {
        "uniform kernel, block counts 5/9/13, eigensolver oracle, S vs FD, determinism".to_string()
    } else {
        failures.join("; ")
    };
    Outcome {
        id: 11,
        pass,
        detail,
    }
}

fn main() {
    let (c2, c3) = criterion_2_and_3();
    let (c6, c7) = criteria_6_and_7();
    let mut all = vec![
        criterion_1(),
        c2,
        c3,
        criterion_4(),
        criterion_5(),
        c6,
        c7,
        criterion_8(),
        criterion_9(),
        criterion_10(),
        criterion_11(),
    ];
    all.sort_by_key(|o| o.id);
    let mut mismatched = Vec::new();
    for o in &all {
        let known = KNOWN_FAILING.contains(&o.id);
        let tag = if o.pass {
            "PASS"
        } else if known {
            "FAIL (known)"
        } else {
            "FAIL"
        };
        println!("criterion {:>2}: {tag:<12} {}", o.id, o.detail);
        if o.pass == known {
            mismatched.push(o.id);
        }
    }
    assert!(
        mismatched.is_empty(),
        "criteria with unexpected status: {mismatched:?}"
    );
}
