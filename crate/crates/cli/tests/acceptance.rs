//! Acceptance criteria 1-11 plus the Gaussian closed form. Each criterion
//! prints one PASS/FAIL line; the test fails if any criterion fails.

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use perfpriv_core::correlation::{
    bsc_analysis, slope_lower_bound, spectral_report, v_star, SearchOptions,
};
use perfpriv_core::numerics::DEFAULT_RANK_TOL;
use perfpriv_core::polytope::{build_polytope, DEFAULT_MAX_Y};
use perfpriv_core::privacy::{
    classify_dx_bound, full_data_perturbation, g0, gaussian_full_data_bound,
    min_error_perfect_privacy, mmse_perfect_privacy, non_private_information,
    perfect_privacy_feasible, EqualityClass, Mechanism, PrivacyOptions,
};
use perfpriv_core::probability::{conditional_channel, mutual_information};
use perfpriv_core::{JointPmf, Matrix};
use rand::Rng;

type Outcome = Result<String, String>;

/// Accumulates sub-checks of one criterion.
#[derive(Default)]
struct Checks {
    failed: Vec<String>,
    passed: Vec<String>,
}

impl Checks {
    fn near(&mut self, what: &str, got: f64, want: f64, tol: f64) {
        let line = format!("{what} = {got:.6} (want {want} ± {tol:e})");
        if (got - want).abs() <= tol {
            self.passed.push(line);
        } else {
            self.failed.push(line);
        }
    }

    fn that(&mut self, what: impl Into<String>, ok: bool) {
        if ok {
            self.passed.push(what.into());
        } else {
            self.failed.push(what.into());
        }
    }

    fn finish(self) -> Outcome {
        if self.failed.is_empty() {
            Ok(self.passed.join("; "))
        } else {
            Err(format!(
                "failed: {} | passed: {}",
                self.failed.join("; "),
                self.passed.join("; ")
            ))
        }
    }
}

fn joint_2x4() -> JointPmf {
    JointPmf::from_rows(&[[0.15, 0.2, 0.0625, 0.05], [0.35, 0.05, 0.0625, 0.075]]).unwrap()
}

fn joint_2x3() -> JointPmf {
    JointPmf::from_rows(&[[0.1, 0.15, 0.18], [0.1, 0.35, 0.12]]).unwrap()
}

fn opts() -> PrivacyOptions {
    PrivacyOptions::default()
}

fn criterion_1() -> Outcome {
    let mut c = Checks::default();
    let j = joint_2x4();
    let start = Instant::now();
    let r = g0(&j, &opts()).unwrap();
    let elapsed = start.elapsed();
    c.near("g0 bits", r.value, 0.9063, 1e-3);
    c.near("LP objective", r.solution.lp.objective, 0.8437, 1e-3);

    let printed = [
        vec![0.675, 0.325, 0.0, 0.0],
        vec![0.1875, 0.0, 0.8125, 0.0],
        vec![0.0, 0.1563, 0.0, 0.8437],
        vec![0.0, 0.0, 0.625, 0.375],
    ];
    let verts: Vec<Vec<f64>> = r
        .solution
        .polytope
        .points()
        .iter()
        .map(|p| p.to_vec())
        .collect();
    c.that(
        "extreme points match set-wise within 1e-3",
        support::same_point_sets(&verts, &printed, 1e-3),
    );

    let printed_mech = [
        [0.9423, 0.9074, 0.0, 0.0],
        [0.0577, 0.0, 1.0, 0.0],
        [0.0, 0.0926, 0.0, 1.0],
    ];
    let m = r.mechanism();
    let got = &m.channel_u_given_y;
    let entrywise = got.rows() == 3
        && (0..3).all(|u| (0..4).all(|y| (got[(u, y)] - printed_mech[u][y]).abs() <= 1e-2));
    if entrywise {
        c.that("P*_{U|Y} matches within 1e-2 entrywise", true);
    } else {
        // an alternate optimum must reach the same objective and stay private
        let ch = conditional_channel(&j);
        let alt =
            m.independence_residual(&ch, j.p_x()) <= 1e-7 && m.marginal_error(j.p_y()) <= 1e-8;
        c.that(
            "P*_{U|Y} is an alternate optimum satisfying the mechanism invariants",
            alt,
        );
    }
    c.that(
        format!("runtime {elapsed:?} < 1 s"),
        elapsed < Duration::from_secs(1),
    );
    c.finish()
}

fn criterion_2() -> Outcome {
    let mut c = Checks::default();
    let r = mmse_perfect_privacy(&joint_2x4(), &[1.0, 2.0, 3.0, 4.0], &opts()).unwrap();
    c.near("MMSE", r.mmse, 0.2406, 1e-3);
    let real = r.mechanism().realizations.clone().unwrap();
    let want = [1.325, 3.6874, 3.375];
    c.that(
        format!("realizations {real:?}"),
        real.len() == 3 && real.iter().zip(want).all(|(a, b)| (a - b).abs() <= 1e-3),
    );
    c.near("Var[Y]", r.variance_y, 1.1094, 1e-3);
    c.that("MMSE <= Var[Y]", r.mmse <= r.variance_y);
    c.finish()
}

fn criterion_3() -> Outcome {
    let mut c = Checks::default();
    let r = min_error_perfect_privacy(&joint_2x4(), &opts()).unwrap();
    c.near("p_err", r.p_err, 0.2789, 1e-3);
    let mut real = r.mechanism().realizations.clone().unwrap();
    real.sort_by(f64::total_cmp);
    c.that(
        format!("realizations {real:?} = {{1,3,4}}"),
        real == [1.0, 3.0, 4.0],
    );
    c.that("p_err <= 1/2", r.p_err <= 0.5);
    c.finish()
}

fn criterion_4() -> Outcome {
    let mut c = Checks::default();
    let j = joint_2x3();
    let start = Instant::now();
    let r = slope_lower_bound(&j, &opts(), &SearchOptions::default()).unwrap();
    let elapsed = start.elapsed();
    c.near("H(Y)", r.h_y, 1.4855, 1e-3);
    c.near("I(X;Y)", r.mutual_information, 0.0539, 1e-3);
    c.near("g0", r.g0, 0.5147, 1e-3);
    let psi: Vec<f64> = r.psi_values.iter().map(|p| p.result.value).collect();
    if psi.len() == 2 {
        c.near("psi(u1)", psi[0], 43.52, 0.05);
        c.near("psi(u2)", psi[1], 15.86, 0.05);
    } else {
        c.that(format!("two psi values, got {psi:?}"), false);
    }
    c.near("lower bound", r.lower_bound.to_f64(), 43.52, 0.05);
    c.that(
        format!("runtime {elapsed:?} < 5 s"),
        elapsed < Duration::from_secs(5),
    );
    c.finish()
}

fn criterion_5() -> Outcome {
    let mut c = Checks::default();
    let b = bsc_analysis(0.6, 0.45).unwrap();
    c.near("1/rho_m^2", 1.0 / b.rho_m_sq, 104.12, 0.5);
    c.near("slope upper bound", b.slope_upper, 0.0099, 5e-4);
    c.that("bound_violated", b.bound_violated);

    let mut rng = support::rng(0x5EED);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let px: f64 = rng.gen_range(0.01..0.99);
        let alpha: f64 = rng.gen_range(0.01..0.49);
        let r = bsc_analysis(px, alpha).unwrap();
        let p = px.min(1.0 - px);
        let j = JointPmf::from_rows(&[
            [(1.0 - p) * (1.0 - alpha), (1.0 - p) * alpha],
            [p * alpha, p * (1.0 - alpha)],
        ])
        .unwrap();
        let s = spectral_report(&j).unwrap();
        worst = worst.max((r.rho_m_sq - s.rho_m * s.rho_m).abs());
    }
    c.that(
        format!("closed-form rho^2 vs sigma_2^2 over 100 pairs, worst {worst:e} <= 1e-9"),
        worst <= 1e-9,
    );
    c.finish()
}

fn criterion_6() -> Outcome {
    let mut rng = support::rng(6);
    let (mut worst_s1, mut worst_rc) = (0.0f64, 0.0f64);
    for _ in 0..500 {
        let (nx, ny) = (rng.gen_range(1..=8), rng.gen_range(1..=8));
        let j = support::random_joint(&mut rng, nx, ny);
        let s = spectral_report(&j).unwrap();
        worst_s1 = worst_s1.max((s.singular_values[0] - 1.0).abs());
        let q = &s.q_matrix;
        let rc = q.transpose().mul_vec(&q.mul_vec(&s.c_vector));
        worst_rc = worst_rc.max(support::linf(&rc, &s.c_vector));
    }
    let mut c = Checks::default();
    c.that(
        format!("|sigma_1 - 1| worst {worst_s1:e} <= 1e-8"),
        worst_s1 <= 1e-8,
    );
    c.that(
        format!("|Rc - c| worst {worst_rc:e} <= 1e-8"),
        worst_rc <= 1e-8,
    );
    c.finish()
}

fn criterion_7() -> Outcome {
    let mut rng = support::rng(7);
    let mut c = Checks::default();
    let (mut eq, mut strict, mut infeasible) = (0, 0, 0);
    let (mut bad_bound, mut bad_eq, mut bad_strict) = (0, 0, 0);
    for i in 0..500 {
        let (nx, ny) = (rng.gen_range(2..=4), rng.gen_range(2..=6));
        let j = if i % 2 == 0 {
            support::random_joint_with_duplicates(&mut rng, nx, ny)
        } else {
            support::random_joint(&mut rng, nx, ny)
        };
        let v = g0(&j, &opts()).unwrap().value;
        let dx = non_private_information(&j, opts().col_tol).d_x;
        if v < dx - 1e-8 {
            bad_bound += 1;
        }
        match classify_dx_bound(&j, &opts()).unwrap().class {
            EqualityClass::Equality => {
                eq += 1;
                if (v - dx).abs() > 1e-7 {
                    bad_eq += 1;
                }
            }
            EqualityClass::Strict => {
                strict += 1;
                if v - dx <= 1e-6 {
                    bad_strict += 1;
                }
            }
            EqualityClass::NotFeasible => infeasible += 1,
        }
    }
    c.that(
        format!("g0 >= D_X - 1e-8 (violations {bad_bound})"),
        bad_bound == 0,
    );
    c.that(
        format!("equality instances |g0 - D_X| <= 1e-7 ({eq} instances, violations {bad_eq})"),
        bad_eq == 0,
    );
    c.that(
        format!("strict instances g0 - D_X > 1e-6 ({strict} instances, violations {bad_strict})"),
        bad_strict == 0,
    );
    c.that(
        format!("coverage: {eq} equality, {strict} strict, {infeasible} infeasible"),
        eq > 0 && strict > 0,
    );
    c.finish()
}

fn criterion_8() -> Outcome {
    let mut rng = support::rng(8);
    let y = [1.0, 2.0, 3.0];
    let (mut wg, mut wm, mut we) = (0.0f64, 0.0f64, 0.0f64);
    let mut n = 0;
    while n < 100 {
        let j = support::random_joint(&mut rng, 2, 3);
        let poly = build_polytope(
            &conditional_channel(&j),
            j.p_y(),
            DEFAULT_RANK_TOL,
            DEFAULT_MAX_Y,
        )
        .unwrap();
        if poly.null_dim != 1 {
            continue;
        }
        n += 1;
        let seg = support::segment_2x3(&j);
        let g = g0(&j, &opts()).unwrap().value;
        wg = wg.max(
            (g - (support::h(j.p_y()) - support::grid_min_mixture(&seg, 1e-3, support::h))).abs(),
        );
        let var = |q: &[f64]| {
            let m: f64 = q.iter().zip(&y).map(|(a, b)| a * b).sum();
            q.iter()
                .zip(&y)
                .map(|(a, b)| a * (b - m) * (b - m))
                .sum::<f64>()
        };
        let mm = mmse_perfect_privacy(&j, &y, &opts()).unwrap().mmse;
        wm = wm.max((mm - support::grid_min_mixture(&seg, 1e-3, var)).abs());
        let err = |q: &[f64]| 1.0 - q.iter().copied().fold(0.0, f64::max);
        let pe = min_error_perfect_privacy(&j, &opts()).unwrap().p_err;
        we = we.max((pe - support::grid_min_mixture(&seg, 1e-3, err)).abs());
    }
    let mut wv = 0.0f64;
    let mut k = 0;
    while k < 50 {
        let j = support::random_joint(&mut rng, 3, 2);
        if g0(&j, &opts()).unwrap().value > 1e-12 {
            continue;
        }
        k += 1;
        let v = v_star(&j, &SearchOptions::default(), DEFAULT_RANK_TOL)
            .unwrap()
            .value
            .finite()
            .unwrap();
        let oracle = support::grid_vstar_binary(&j, 1e-4);
        wv = wv.max((v - oracle).abs() / oracle);
    }
    let mut c = Checks::default();
    c.that(format!("g0 vs grid worst {wg:e} <= 1e-4"), wg <= 1e-4);
    c.that(format!("MMSE vs grid worst {wm:e} <= 1e-4"), wm <= 1e-4);
    c.that(format!("p_err vs grid worst {we:e} <= 1e-4"), we <= 1e-4);
    c.that(
        format!("V* vs grid worst relative {wv:e} <= 1e-3"),
        wv <= 1e-3,
    );
    c.finish()
}

/// I(X;U) computed from `p(x, u) = Σ_y p(x|y) p(y, u)`.
fn leakage(j: &JointPmf, m: &Mechanism) -> f64 {
    let ch = conditional_channel(j);
    let yu = m.joint_table();
    let mut xu = Matrix::zeros(j.x_len(), m.support_size());
    for x in 0..j.x_len() {
        for u in 0..m.support_size() {
            xu[(x, u)] = (0..j.y_len())
                .map(|y| ch.matrix()[(x, y)] * yu[(u, y)])
                .sum();
        }
    }
    mutual_information(&JointPmf::new(xu).unwrap())
}

fn criterion_9() -> Outcome {
    let mut rng = support::rng(9);
    let (mut res, mut marg, mut leak) = (0.0f64, 0.0f64, 0.0f64);
    let mut support_ok = true;
    let mut n = 0;
    while n < 500 {
        let nx = rng.gen_range(2..=4);
        let ny = rng.gen_range(2..=6);
        let j = if rng.gen_bool(0.5) {
            support::random_joint_with_duplicates(&mut rng, nx, ny)
        } else {
            support::random_joint(&mut rng, nx, ny)
        };
        if !perfect_privacy_feasible(&conditional_channel(&j), DEFAULT_RANK_TOL).unwrap() {
            continue;
        }
        n += 1;
        let y: Vec<f64> = (1..=ny).map(|v| v as f64).collect();
        let mechs = [
            g0(&j, &opts()).unwrap().solution.mechanism,
            mmse_perfect_privacy(&j, &y, &opts())
                .unwrap()
                .solution
                .mechanism,
            min_error_perfect_privacy(&j, &opts())
                .unwrap()
                .solution
                .mechanism,
        ];
        let ch = conditional_channel(&j);
        for m in &mechs {
            res = res.max(m.independence_residual(&ch, j.p_x()));
            marg = marg.max(m.marginal_error(j.p_y()));
            support_ok &= m.support_size() <= ny;
            leak = leak.max(leakage(&j, m));
        }
    }
    let mut c = Checks::default();
    c.that(
        format!("independence residual worst {res:e} <= 1e-7"),
        res <= 1e-7,
    );
    c.that(
        format!("marginal error worst {marg:e} <= 1e-8"),
        marg <= 1e-8,
    );
    c.that("support <= |Y|", support_ok);
    c.that(format!("I(X;U) worst {leak:e} <= 1e-6"), leak <= 1e-6);
    c.finish()
}

fn criterion_10() -> Outcome {
    let mut rng = support::rng(10);
    let (mut marg, mut indep) = (0.0f64, 0.0f64);
    let mut min_shift = f64::INFINITY;
    for _ in 0..200 {
        let (nx, ny) = (rng.gen_range(1..=5), rng.gen_range(2..=6));
        let j = support::random_joint(&mut rng, nx, ny);
        let probe = full_data_perturbation(&j, 0.0).unwrap();
        let f = full_data_perturbation(&j, 0.5 * probe.eps_max).unwrap();
        let t = &f.joint;
        let p_u: Vec<f64> = (0..2)
            .map(|u| {
                (0..nx)
                    .flat_map(|x| (0..ny).map(move |y| (x, y)))
                    .map(|(x, y)| t.get(x, y, u))
                    .sum()
            })
            .collect();
        for x in 0..nx {
            for y in 0..ny {
                let s = t.get(x, y, 0) + t.get(x, y, 1);
                marg = marg.max((s - j.table()[(x, y)]).abs());
            }
            for u in 0..2 {
                let pxu: f64 = (0..ny).map(|y| t.get(x, y, u)).sum::<f64>() / p_u[u];
                indep = indep.max((pxu - j.p_x()[x]).abs());
            }
        }
        let y1 = f.cols.0;
        let py1_u1: f64 = (0..nx).map(|x| t.get(x, y1, 0)).sum::<f64>() / p_u[0];
        min_shift = min_shift.min((py1_u1 - j.p_y()[y1]).abs());
    }
    let mut c = Checks::default();
    c.that(
        format!("(X,Y) marginal preserved, worst {marg:e} <= 1e-12"),
        marg <= 1e-12,
    );
    c.that(
        format!("p_X|U = p_X, worst {indep:e} <= 1e-12"),
        indep <= 1e-12,
    );
    c.that(
        format!("p_Y|U(y1|u1) != p_Y(y1), smallest gap {min_shift:e}"),
        min_shift > 1e-12,
    );
    c.finish()
}

fn criterion_11() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_perfpriv");
    let fixtures = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures");
    let mut c = Checks::default();
    for name in [
        "joint_2x4.json",
        "joint_2x3.json",
        "joint_2x4.csv",
        "joint_2x3.csv",
    ] {
        let path = format!("{fixtures}/{name}");
        let runs: Vec<Vec<u8>> = (0..2)
            .map(|_| {
                let out = Command::new(bin)
                    .args(["analyze", &path])
                    .env_remove("PERFPRIV_SEED")
                    .env_remove("TOOL_SEED")
                    .output()
                    .unwrap();
                assert!(
                    out.status.success(),
                    "{}",
                    String::from_utf8_lossy(&out.stderr)
                );
                out.stdout
            })
            .collect();
        c.that(
            format!("{name} byte-identical ({} bytes)", runs[0].len()),
            runs[0] == runs[1],
        );
    }
    c.finish()
}

fn gaussian() -> Outcome {
    let mut c = Checks::default();
    c.that(
        "-log2 0.5 = 1 exactly",
        gaussian_full_data_bound(0.5).unwrap() == 1.0,
    );
    c.that(
        "-log2 0.25 = 2",
        gaussian_full_data_bound(0.25).unwrap() == 2.0,
    );
    c.that(
        "rho = 1 gives 0",
        gaussian_full_data_bound(1.0).unwrap() == 0.0,
    );
    c.that(
        "rho = 0 is rejected",
        gaussian_full_data_bound(0.0).is_err(),
    );
    c.finish()
}

type Criterion = (&'static str, fn() -> Outcome);

#[test]
fn acceptance() {
    let criteria: [Criterion; 12] = [
        ("1 2x4 end to end", criterion_1),
        ("2 2x4 MMSE", criterion_2),
        ("3 2x4 min-error", criterion_3),
        ("4 2x3 slope bound", criterion_4),
        ("5 BSC counterexample", criterion_5),
        ("6 spectral invariants", criterion_6),
        ("7 non-private information suite", criterion_7),
        ("8 grid oracle equivalence", criterion_8),
        ("9 mechanism invariants", criterion_9),
        ("10 full-data perturbation", criterion_10),
        ("11 determinism", criterion_11),
        ("G gaussian closed form", gaussian),
    ];
    let mut failed = Vec::new();
    for (name, f) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("criterion {name}: PASS ({detail})"),
            Err(detail) => {
                println!("criterion {name}: FAIL ({detail})");
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
