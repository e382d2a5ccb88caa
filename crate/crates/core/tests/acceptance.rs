//! Acceptance run: one PASS/FAIL line per criterion, with the measured
//! quantities underneath. Every expected value is produced here, from
//! formulas or quadratures that do not go through the code under test.
//!
//! Two criteria are known to be unattainable (see README, "Known
//! deviations"); they are reported as FAIL and do not abort the run. Any
//! other failure exits non-zero.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64;
use num_rational::BigRational;
use onelevel::analysis::{
    infimum, naive_bound, phi_from_g, phi_hat_from_g, sample_points, sweep, Method,
};
use onelevel::closedform::{band15_g, band2_g, closed_form_g, orthogonal_g, PiecewiseTrig};
use onelevel::fredholm::{nystrom_matrix, nystrom_solve, Grid};
use onelevel::reduction::{dimension, interval_systems, outside_odes, OdeSpec};
use onelevel::SymmetryGroup::{self, *};

const CERT_GRID: [f64; 10] = [0.6, 0.75, 0.9, 1.0, 1.1, 1.2, 1.35, 1.6, 1.7, 1.85];
const NON_O: [SymmetryGroup; 3] = [SoEven, SoOdd, Sp];

/// Criteria whose stated target contradicts the exact solutions; reported
/// honestly but not allowed to abort the run.
const KNOWN_UNATTAINABLE: [u32; 2] = [2, 5];

struct Outcome {
    passed: bool,
    details: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Outcome {
            passed: true,
            details: Vec::new(),
        }
    }

    /// Records `measured ≤ tolerance` as one line of evidence.
    fn bound(&mut self, label: impl Into<String>, measured: f64, tolerance: f64) {
        let ok = measured.is_finite() && measured <= tolerance;
        self.passed &= ok;
        self.details.push(format!(
            "{} {}: {measured:.3e} (tol {tolerance:.0e})",
            if ok { "ok " } else { "BAD" },
            label.into()
        ));
    }

    fn holds(&mut self, label: impl Into<String>, ok: bool) {
        self.passed &= ok;
        self.details.push(format!(
            "{} {}",
            if ok { "ok " } else { "BAD" },
            label.into()
        ));
    }

    fn info(&mut self, line: impl Into<String>) {
        self.details.push(format!("    {}", line.into()));
    }
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    if b <= a {
        return 0.0;
    }
    let n = 2 * panels;
    let h = (b - a) / n as f64;
    // nudge the endpoints so a jump at a cut is read from this piece's side
    let e = 1e-13 * (b - a);
    let mut s = f(a + e) + f(b - e);
    for i in 1..n {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// `∫_a^b g` by Simpson's rule, split wherever `g` may fail to be smooth.
fn integral_by_quadrature(g: &PiecewiseTrig, a: f64, b: f64) -> f64 {
    let sigma = g.sigma();
    let (a, b) = (a.max(-sigma), b.min(sigma));
    let mut cuts = vec![a, b, 0.0];
    for p in g.breakpoints() {
        cuts.extend([p, -p]);
    }
    cuts.retain(|&c| c >= a && c <= b);
    cuts.sort_by(f64::total_cmp);
    cuts.windows(2)
        .map(|w| simpson(|x| g.eval(x), w[0], w[1], 64))
        .sum()
}

fn operator_by_quadrature(group: SymmetryGroup, g: &PiecewiseTrig, x: f64) -> f64 {
    let (alpha, beta) = match group {
        O => (0.5, 0.0),
        SoEven => (0.0, 0.5),
        SoOdd => (1.0, -0.5),
        Sp => (0.0, -0.5),
    };
    let sigma = g.sigma();
    g.eval(x)
        + alpha * integral_by_quadrature(g, -sigma, sigma)
        + beta * integral_by_quadrature(g, x - 1.0, x + 1.0)
}

fn sup_node_distance(g: &PiecewiseTrig, n: usize) -> (f64, f64) {
    let sol = nystrom_solve(g.group(), g.sigma(), n).expect("nystrom solve");
    let d = sol
        .grid()
        .nodes()
        .iter()
        .zip(sol.values())
        .map(|(&x, v)| (g.eval(x) - v).abs())
        .fold(0.0, f64::max);
    (d, sol.max_abs())
}

fn criterion_1() -> Outcome {
    let mut out = Outcome::new();
    let sigmas = [0.25, 0.5, 1.0, 1.7, 3.0, 7.3];
    let mut closed = 0.0f64;
    let mut nys = 0.0f64;
    for s in sigmas {
        let exact = 1.0 / (2.0 * s) + 0.5;
        closed = closed.max((infimum(O, s, Method::ClosedForm).unwrap().value - exact).abs());
        nys = nys.max((infimum(O, s, Method::Nystrom(2000)).unwrap().value - exact).abs());
    }
    out.bound("closed form vs 1/(2σ) + 1/2", closed, 1e-12);
    out.bound("Nyström n=2000 vs 1/(2σ) + 1/2", nys, 1e-6);
    out
}

fn criterion_2() -> Outcome {
    let mut out = Outcome::new();
    // exact ⟨1, g⟩ of cos(t/2 + c)/N on [−1, 1] is 4(sin(1/2 + c) − sin c)/N
    let q = (PI + 1.0) / 4.0;
    let r = (PI - 1.0) / 4.0;
    let antiderivative = |c: f64, norm: f64| norm / (4.0 * ((0.5 + c).sin() - c.sin()));
    let cases = [
        (
            SoEven,
            0.75,
            antiderivative(-q, 2f64.sqrt() * 0.25f64.sin() + q.sin()),
        ),
        (Sp, 0.25, antiderivative(r, 2.0 * r.sin() - r.cos())),
        (
            SoOdd,
            1.25,
            antiderivative(r, 3.0 * q.sin() - 2.0 * r.sin()),
        ),
    ];
    for (group, target, exact) in cases {
        let v = infimum(group, 1.0, Method::ClosedForm).unwrap().value;
        out.bound(
            format!("{group}: |inf − {target}|"),
            (v - target).abs(),
            1e-9,
        );
        out.info(format!(
            "{group}: closed inf = {v:.12}, antiderivative oracle = {exact:.12}, naive pair = {:.12}",
            naive_bound(group, 1.0)
        ));
    }
    out
}

fn criterion_3() -> Outcome {
    let mut out = Outcome::new();
    let mut worst = 0.0f64;
    let mut odd = 0.0f64;
    for s in [0.1, 0.3, 0.5] {
        for (group, v) in [
            (O, (1.0 + s) / (2.0 * s)),
            (SoEven, (1.0 + s) / (2.0 * s)),
            (Sp, (1.0 - s) / (2.0 * s)),
        ] {
            let got = infimum(group, s, Method::ClosedForm).unwrap().value;
            worst = worst.max((got - v).abs());
        }
        let closed = infimum(SoOdd, s, Method::ClosedForm).unwrap().value;
        let oracle = infimum(SoOdd, s, Method::Nystrom(2000)).unwrap().value;
        odd = odd.max((closed - oracle).abs());
    }
    out.bound("O/SO(even)/Sp constants", worst, 1e-12);
    out.bound("SO(odd) vs Nyström n=2000", odd, 2e-3);
    out
}

fn criterion_4() -> Outcome {
    let mut out = Outcome::new();
    for group in NON_O {
        let mut worst = 0.0f64;
        let mut worst_at_185 = 0.0f64;
        let mut quad = 0.0f64;
        for s in CERT_GRID {
            let g = closed_form_g(group, s).unwrap();
            let r = g.sup_residual(101);
            if s == 1.85 {
                worst_at_185 = r;
            } else {
                worst = worst.max(r);
            }
            for i in 0..=10 {
                let x = -s + 2.0 * s * i as f64 / 10.0;
                quad = quad.max((operator_by_quadrature(group, &g, x) - 1.0).abs());
            }
        }
        out.bound(format!("{group}: exact residual, σ ≠ 1.85"), worst, 1e-8);
        out.bound(
            format!("{group}: exact residual, σ = 1.85"),
            worst_at_185,
            1e-6,
        );
        out.bound(format!("{group}: Simpson-operator residual"), quad, 1e-8);
    }
    out
}

fn criterion_5() -> Outcome {
    let mut out = Outcome::new();
    for group in NON_O {
        let mut worst = (0.0f64, 0.0);
        let mut rel = 0.0f64;
        for s in CERT_GRID {
            let g = closed_form_g(group, s).unwrap();
            let (d, scale) = sup_node_distance(&g, 2000);
            if d > worst.0 {
                worst = (d, s);
            }
            rel = rel.max(d / scale);
        }
        out.bound(
            format!(
                "{group}: sup-node distance at n=2000 (worst σ = {})",
                worst.1
            ),
            worst.0,
            5e-3,
        );
        out.info(format!("{group}: relative to max|g|: {rel:.3e}"));
    }
    // The trapezoid error is first order with a constant that depends on
    // where the kernel jump |x − y| = 1 falls between nodes. The spot σ are
    // those where that offset is symmetric between n and 2n, so the study
    // isolates the h-dependence.
    for s in [0.75, 1.2, 1.6] {
        for group in NON_O {
            let g = closed_form_g(group, s).unwrap();
            let ratio = sup_node_distance(&g, 2000).0 / sup_node_distance(&g, 4000).0;
            let ok = (1.4..=2.6).contains(&ratio);
            out.holds(
                format!("{group} σ={s}: d(2000)/d(4000) = {ratio:.3} in [1.4, 2.6]"),
                ok,
            );
        }
    }
    let g = closed_form_g(SoEven, 1.7).unwrap();
    let ratio = sup_node_distance(&g, 2000).0 / sup_node_distance(&g, 4000).0;
    out.info(format!(
        "off-spot SO(even) σ=1.7: d(2000)/d(4000) = {ratio:.3}"
    ));
    out
}

fn criterion_6() -> Outcome {
    let mut out = Outcome::new();
    let mut closed = 0.0f64;
    for s in CERT_GRID {
        let odd = infimum(SoOdd, s, Method::ClosedForm).unwrap().value;
        let sp = infimum(Sp, s, Method::ClosedForm).unwrap().value;
        closed = closed.max((odd - sp - 1.0).abs());
    }
    out.bound("closed form", closed, 1e-8);
    let mut nys = 0.0f64;
    for s in [2.5, 3.0, 4.0] {
        let odd = infimum(SoOdd, s, Method::Nystrom(2000)).unwrap().value;
        let sp = infimum(Sp, s, Method::Nystrom(2000)).unwrap().value;
        nys = nys.max((odd - sp - 1.0).abs());
    }
    out.bound("Nyström n=2000 at σ ∈ {2.5, 3, 4}", nys, 2e-3);
    out
}

fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(num.into(), den.into())
}

fn exact_matches(ode: Option<&OdeSpec>, want: &[BigRational]) -> bool {
    ode.is_some_and(|o| o.exact_coeffs() == want)
}

fn criterion_7() -> Outcome {
    let mut out = Outcome::new();
    let zero = rational(0, 1);
    let one = rational(1, 1);
    let third_order = [zero.clone(), rational(1, 2), zero.clone(), one.clone()];
    let odes = outside_odes(1.2, SoEven).unwrap();
    out.holds(
        "σ=1.2: g‴ + ½g′ = 0",
        exact_matches(odes.first.as_ref(), &third_order),
    );
    out.holds(
        "σ=1.2: g″ + ¼g = 0",
        exact_matches(
            odes.second.as_ref(),
            &[rational(1, 4), zero.clone(), one.clone()],
        ),
    );
    let odes = outside_odes(1.7, SoEven).unwrap();
    out.holds(
        "σ=1.7: g‴ + ½g′ = 0",
        exact_matches(odes.first.as_ref(), &third_order),
    );
    let fourth = [rational(1, 16), zero.clone(), rational(3, 4), zero, one];
    out.holds(
        "σ=1.7: g⁗ + ¾g″ + (1/16)g = 0",
        exact_matches(odes.second.as_ref(), &fourth),
    );
    for (s, d) in [(1.2, 5), (1.7, 7), (2.0, 4)] {
        let got = dimension(s).unwrap();
        out.holds(format!("dimension({s}) = {got}, want {d}"), got == d);
    }
    let a1 = (5f64.sqrt() + 1.0) / 4.0;
    let a2 = (5f64.sqrt() - 1.0) / 4.0;
    let roots = odes
        .second
        .as_ref()
        .unwrap()
        .characteristic_roots()
        .unwrap();
    let want = [-a1, -a2, a2, a1];
    let mut worst = 0.0f64;
    for w in want {
        let nearest = roots
            .iter()
            .map(|z| (z - Complex64::new(0.0, w)).norm())
            .fold(f64::INFINITY, f64::min);
        worst = worst.max(nearest);
    }
    out.bound("J₀′ roots vs ±iα₁, ±iα₂", worst, 1e-12);
    out
}

fn criterion_8() -> Outcome {
    let mut out = Outcome::new();
    let mut worst = 0.0f64;
    let mut terms = 0usize;
    for group in NON_O {
        for s in [1.05, 1.2, 1.35, 1.45, 1.55, 1.6, 1.7, 1.85, 1.95] {
            let g = if s < 1.5 {
                band15_g(group, s).unwrap()
            } else {
                band2_g(group, s).unwrap()
            };
            let systems = interval_systems(s).unwrap();
            let odes = outside_odes(s, group).unwrap();
            for seg in g.segments() {
                let which = systems.classify(0.5 * (seg.lo + seg.hi)).unwrap();
                let coeffs = &odes.get(which).unwrap().coeffs;
                for t in &seg.terms {
                    // Σ c_j (iω)^j, evaluated independently of the library
                    let z = Complex64::new(0.0, t.omega);
                    let p: Complex64 = coeffs
                        .iter()
                        .enumerate()
                        .map(|(j, c)| c * z.powu(j as u32))
                        .sum();
                    worst = worst.max(p.norm());
                    terms += 1;
                }
            }
        }
    }
    out.bound(format!("max |P(iω)| over {terms} terms"), worst, 1e-10);
    out
}

fn criterion_9() -> Outcome {
    let mut out = Outcome::new();
    for group in SymmetryGroup::ALL {
        let sw = sweep(group, 0.6, 3.0, 0.05, Method::Nystrom(1500)).unwrap();
        let max_step = sw
            .rows
            .windows(2)
            .map(|w| w[1].optimal_inf - w[0].optimal_inf)
            .fold(f64::NEG_INFINITY, f64::max);
        let min_improvement = sw
            .rows
            .iter()
            .map(|r| naive_bound(group, r.sigma) - r.optimal_inf)
            .fold(f64::INFINITY, f64::min);
        out.holds(
            format!("{group}: {} σ values", sw.rows.len()),
            sw.rows.len() == 49,
        );
        out.bound(
            format!("{group}: largest step inf(σᵢ₊₁) − inf(σᵢ)"),
            max_step,
            1e-3,
        );
        out.bound(format!("{group}: −min improvement"), -min_improvement, 1e-6);
        if group == SoEven {
            let row = sw
                .rows
                .iter()
                .find(|r| (r.sigma - 1.3).abs() < 1e-9)
                .unwrap();
            let imp = naive_bound(SoEven, 1.3) - row.optimal_inf;
            out.holds(
                format!("SO(even) σ=1.3: improvement {imp:.5} ≥ 0.005"),
                imp >= 0.005,
            );
        }
    }
    out
}

fn criterion_10() -> Outcome {
    let mut out = Outcome::new();
    let g = orthogonal_g(1.2).unwrap();
    let xs: Vec<f64> = (0..50).map(|i| -4.9 + 0.2 * i as f64 + 0.013).collect();
    let worst = phi_from_g(&g, &xs)
        .unwrap()
        .iter()
        .map(|&(x, v)| (v - ((2.4 * PI * x).sin() / (2.2 * PI * x)).powi(2)).abs())
        .fold(0.0, f64::max);
    out.bound("orthogonal φ vs (sin(2.4πx)/(2.2πx))²", worst, 1e-10);
    let mut most_negative = 0.0f64;
    let mut outside = 0.0f64;
    let mut edge = 0.0f64;
    for group in SymmetryGroup::ALL {
        let g = closed_form_g(group, 1.2).unwrap();
        for (_, v) in phi_from_g(&g, &sample_points(2001, 10.0)).unwrap() {
            most_negative = most_negative.max(-v);
        }
        let beyond: Vec<f64> = [2.4, 2.5, 3.0, 5.0, 50.0]
            .iter()
            .flat_map(|&y| [y, -y])
            .collect();
        for (_, v) in phi_hat_from_g(&g, &beyond) {
            outside = outside.max(v.abs());
        }
        // φ̂ is continuous, so it must vanish as |y| → 2σ from inside
        let at0 = phi_hat_from_g(&g, &[0.0])[0].1;
        let near = phi_hat_from_g(&g, &[2.4 - 1e-7])[0].1;
        edge = edge.max(near.abs() / at0);
    }
    out.bound("−min φ over samples, all groups", most_negative, 1e-12);
    out.bound("|φ̂| beyond |y| = 2σ", outside, 0.0);
    out.bound("|φ̂(2σ − 1e-7)| / φ̂(0)", edge, 1e-6);
    out
}

fn criterion_11() -> Outcome {
    let mut out = Outcome::new();
    // endpoint weight σ/n = 1/4, interior 2σ/n = 1/2, kernel 1/2 when the
    // node separation is at most 1
    let expected = [
        [1.125, 0.25, 0.25, 0.0, 0.0],
        [0.125, 1.25, 0.25, 0.25, 0.0],
        [0.125, 0.25, 1.25, 0.25, 0.125],
        [0.0, 0.25, 0.25, 1.25, 0.125],
        [0.0, 0.0, 0.25, 0.25, 1.125],
    ];
    let m = nystrom_matrix(SoEven, &Grid::new(1.0, 4).unwrap());
    let shape_ok = m.nrows() == 5 && m.ncols() == 5;
    out.holds("5×5 shape", shape_ok);
    if shape_ok {
        let mismatches = (0..5)
            .flat_map(|i| (0..5).map(move |j| (i, j)))
            .filter(|&(i, j)| m[(i, j)] != expected[i][j])
            .count();
        out.holds(format!("{mismatches} entries differ"), mismatches == 0);
    }
    out
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, fn() -> Outcome); 11] = [
        (1, "exact orthogonal law", criterion_1),
        (2, "sigma = 1 anchor values", criterion_2),
        (3, "small-support constants", criterion_3),
        (4, "residual certification", criterion_4),
        (5, "closed form vs Nyström agreement", criterion_5),
        (6, "Sp to SO(odd) transfer", criterion_6),
        (7, "reduction anchors", criterion_7),
        (8, "ODE/family consistency", criterion_8),
        (9, "monotonicity sweep", criterion_9),
        (10, "phi reconstruction", criterion_10),
        (11, "Nyström matrix weight rule", criterion_11),
    ];
    let mut unexpected = Vec::new();
    for (id, name, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let known = KNOWN_UNATTAINABLE.contains(&id);
        println!(
            "{} criterion {id:>2}: {name} ({:.1} s){}",
            if outcome.passed { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            if !outcome.passed && known {
                " [known deviation]"
            } else {
                ""
            }
        );
        for line in &outcome.details {
            println!("        {line}");
        }
        if !outcome.passed && !known {
            unexpected.push(id);
        }
    }
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected failures: {unexpected:?}");
        ExitCode::FAILURE
    }
}
