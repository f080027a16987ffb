//! Acceptance criteria 1–8, each at its pinned tolerance. Prints one
//! PASS/FAIL line per criterion and exits non-zero if any fails.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dirac_fock::cli::run_scenario;
use dirac_fock::config::{bundled, ScenarioConfig, Suite};
use dirac_fock::dirac_dynamics::{action_value, current, current_value, divergence, evolve, EvolveOptions, Region};
use dirac_fock::fock::{antisymmetrize, car_report, product_inner_with, FockSpace, FockVector, Ladder, OccupationState};
use dirac_fock::geometry::{build_background, concordance_residuals, Background, MetricChart};
use dirac_fock::pairing::{flux, Slice};
use dirac_fock::spin_algebra::{check_dirac_form_identities, clifford_residual, BasicField};
use dirac_fock::{canonical_gamma_set, Grid, PhysicalConstants, SpinorField};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

const fn z(re: f64, im: f64) -> C64 {
    C64 { re, im }
}

fn real4(rows: [[f64; 4]; 4]) -> [[C64; 4]; 4] {
    rows.map(|r| r.map(|x| z(x, 0.0)))
}

fn flat(n: usize, length: f64) -> (Grid, Background) {
    let grid = Grid::periodic_box([n, 1, 1], [length, 1.0, 1.0], 0.0).unwrap();
    let bg = build_background(&MetricChart::minkowski(grid.clone()).unwrap(), &canonical_gamma_set()).unwrap();
    (grid, bg)
}

/// Plane wave along x¹ in natural units with κ = 1: frequency and unit
/// amplitude, from the left-handed seed (1, 0) and uR = (ω − k σ¹) uL / κ.
fn plane_wave(k1: f64) -> (f64, [C64; 4]) {
    let omega = (1.0 + k1 * k1).sqrt();
    let u = [z(1.0, 0.0), z(0.0, 0.0), z(omega, 0.0), z(-k1, 0.0)];
    let n = u.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    (omega, u.map(|a| a / n))
}

fn plane_wave_field(grid: &Grid, k1: f64, scale: f64) -> SpinorField {
    let (omega, u) = plane_wave(k1);
    SpinorField::from_fn(grid.clone(), |x| {
        let e = C64::from_polar(scale, -(omega * x[0] - k1 * x[1]));
        u.map(|a| a * e)
    })
}

fn criterion_1() -> Outcome {
    let gs = canonical_gamma_set();
    let i = 1.0;
    let gamma = [
        real4([[0., 0., 1., 0.], [0., 0., 0., 1.], [1., 0., 0., 0.], [0., 1., 0., 0.]]),
        real4([[0., 0., 0., -1.], [0., 0., -1., 0.], [0., 1., 0., 0.], [1., 0., 0., 0.]]),
        [
            [z(0., 0.), z(0., 0.), z(0., 0.), z(0., i)],
            [z(0., 0.), z(0., 0.), z(0., -i), z(0., 0.)],
            [z(0., 0.), z(0., -i), z(0., 0.), z(0., 0.)],
            [z(0., i), z(0., 0.), z(0., 0.), z(0., 0.)],
        ],
        real4([[0., 0., -1., 0.], [0., 0., 0., 1.], [1., 0., 0., 0.], [0., -1., 0., 0.]]),
    ];
    let h = real4([[1., 0., 0., 0.], [0., 1., 0., 0.], [0., 0., -1., 0.], [0., 0., 0., -1.]]);
    let d = real4([[0., 0., 1., 0.], [0., 0., 0., 1.], [1., 0., 0., 0.], [0., 1., 0., 0.]]);
    let g = [[1., 0., 0., 0.], [0., -1., 0., 0.], [0., 0., -1., 0.], [0., 0., 0., -1.]];
    let dd = real4([[0., 1., 0., 0.], [-1., 0., 0., 0.], [0., 0., 0., -1.], [0., 0., 1., 0.]]);
    ensure(gs.gamma == gamma, || "gamma matrices differ from the literal tables".into())?;
    ensure(gs.chirality == h, || "chirality operator differs".into())?;
    ensure(gs.dirac_form == d, || "Dirac form differs".into())?;
    ensure(gs.metric == g, || "frame metric differs".into())?;
    ensure(gs.spin_metric == dd, || "spin metric differs".into())?;

    let r = check_dirac_form_identities(&gs);
    ensure(r.hermiticity == 0.0 && r.gamma_compatibility == 0.0, || format!("Dirac-form identities {r:?}"))?;
    ensure(clifford_residual(&gs) == 0.0, || "Clifford relation residual non-zero".into())?;
    let mut h2 = [[z(0., 0.); 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            h2[a][b] = (0..4).map(|s| h[a][s] * h[s][b]).sum();
        }
    }
    ensure(h2 == real4(g.map(|r| r.map(f64::abs))), || "H² ≠ I".into())?;
    for f in [BasicField::Metric, BasicField::DiracForm] {
        let x = gs.field_tensor(f);
        ensure(x.tau() == x, || format!("{f:?} is not τ-fixed"))?;
    }
    Ok("matrices bit-exact; Hermiticity, compatibility, Clifford, H² = I, τ(g) = g, τ(D) = D all exactly 0".into())
}

fn criterion_2() -> Outcome {
    let gs = canonical_gamma_set();
    let residuals = |n: usize| {
        let grid = Grid::periodic_box([n, 1, 1], [2.0 * PI, 1.0, 1.0], 0.0).unwrap();
        let bg = build_background(&MetricChart::sine_lapse(grid, 0.01, 1.0).unwrap(), &gs).unwrap();
        (concordance_residuals(&bg, &gs), bg.torsion_residual())
    };
    let (coarse, t1) = residuals(64);
    let (fine, t2) = residuals(128);
    ensure(t1 == 0.0 && t2 == 0.0, || format!("torsion {t1:e}, {t2:e}"))?;
    let mut summary = Vec::new();
    for ((name, a), (_, b)) in coarse.as_array().into_iter().zip(fine.as_array()) {
        if a == 0.0 && b == 0.0 {
            summary.push(format!("{name} ≡ 0"));
            continue;
        }
        let ratio = a / b;
        ensure((12.0..=20.0).contains(&ratio), || format!("{name}: {a:e} -> {b:e}, ratio {ratio:.2}"))?;
        summary.push(format!("{name} ×{ratio:.1}"));
    }
    Ok(format!("h halved: {}; torsion exactly 0", summary.join(", ")))
}

/// g(J, J) from the closed form in the spinor components, with c = 1.
fn closed_form(p: &[C64; 4]) -> C64 {
    let [p1, p2, p3, p4] = *p;
    (p1 * p1.conj() * p3 * p3.conj()
        + p2 * p2.conj() * p4 * p4.conj()
        + p1 * p2.conj() * p4 * p3.conj()
        + p2 * p1.conj() * p3 * p4.conj())
        * 4.0
}

fn criterion_3() -> Outcome {
    let gs = canonical_gamma_set();
    let k = PhysicalConstants::natural(1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let eta = [1.0, -1.0, -1.0, -1.0];
    let (mut min_norm, mut min_j0, mut worst) = (f64::INFINITY, f64::INFINITY, 0.0f64);
    for _ in 0..100_000 {
        let psi: [C64; 4] = std::array::from_fn(|_| z(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let j = current_value(&gs, &k, &psi);
        let direct: C64 = (0..4).map(|q| j[q] * j[q] * eta[q]).sum();
        let scale = (j[0].re * j[0].re).max(direct.norm());
        min_norm = min_norm.min(direct.re);
        min_j0 = min_j0.min(j[0].re);
        worst = worst.max((closed_form(&psi) - direct).norm() / scale);
    }
    ensure(min_norm >= -1e-12, || format!("min g(J,J) = {min_norm:e}"))?;
    ensure(min_j0 >= 0.0, || format!("min J⁰ = {min_j0:e}"))?;
    ensure(worst <= 1e-12, || format!("closed form relative difference {worst:e}"))?;
    Ok(format!("1e5 spinors: min g(J,J) = {min_norm:.1e}, min J⁰ = {min_j0:.1e}, closed form rel. diff {worst:.1e}"))
}

struct WaveRun {
    error: f64,
    ratio: f64,
    drift: f64,
    div: f64,
}

fn wave_run(n: usize, length: f64, k1: f64, dt: f64, steps: usize) -> WaveRun {
    let gs = canonical_gamma_set();
    let k = PhysicalConstants::natural(1.0).unwrap();
    let (grid, bg) = flat(n, length);
    let (omega, u) = plane_wave(k1);
    // The amplitude solves (ω γ⁰ − k γ¹ − κ) u = 0 with the literal gammas.
    for a in 0..4 {
        let v: C64 = (0..4).map(|b| (gs.gamma[0][a][b] * omega - gs.gamma[1][a][b] * k1) * u[b]).sum::<C64>() - u[a];
        assert!(v.norm() < 1e-15, "amplitude is not a solution");
    }
    let scale = 1.0 / length.sqrt();
    let psi0 = plane_wave_field(&grid, k1, scale);
    let run = |dt: f64, steps: usize, every: usize| {
        let opts = EvolveOptions {
            dt,
            steps,
            snapshot_every: every,
            ..EvolveOptions::default()
        };
        let traj = evolve(&psi0, &bg, &k, &opts).unwrap();
        let exact = plane_wave_field(traj.grid(), k1, scale);
        (traj.max_abs_diff(&exact), traj)
    };
    let (e1, traj) = run(dt, steps, 1);
    let (e2, _) = run(dt / 2.0, steps * 2, 2);
    let j = current(&traj, &gs, &k);
    let f0 = flux(&j, &Slice::at_time(0.0), &bg).unwrap().re;
    let drift = (0..traj.grid().n[0])
        .map(|it| {
            let f = flux(&j, &Slice::at_time(traj.grid().coordinate(0, it)), &bg).unwrap().re;
            (f / f0 - 1.0).abs()
        })
        .fold(0.0, f64::max);
    let div = divergence(&j, &bg).unwrap().iter().map(|v| v.norm()).fold(0.0, f64::max);
    WaveRun {
        error: e1,
        ratio: e1 / e2,
        drift,
        div,
    }
}

fn criterion_4() -> Outcome {
    let mut lines = Vec::new();
    for (label, run) in [
        ("rest", wave_run(16, 1.0, 0.0, 0.01, 1000)),
        ("boosted", wave_run(512, 4.0 * PI, 0.5, 0.032, 125)),
    ] {
        ensure(run.error <= 1e-6, || format!("{label}: oracle error {:e}", run.error))?;
        ensure((12.0..=20.0).contains(&run.ratio), || format!("{label}: dt ratio {:.2}", run.ratio))?;
        ensure(run.drift <= 1e-8, || format!("{label}: norm drift {:e}", run.drift))?;
        ensure(run.div <= 1e-6, || format!("{label}: max |div J| {:e}", run.div))?;
        lines.push(format!(
            "{label}: error {:.1e}, ratio {:.1}, drift {:.1e}, |div J| {:.1e}",
            run.error, run.ratio, run.drift, run.div
        ));
    }
    Ok(lines.join("; "))
}

fn scenario(name: &str) -> ScenarioConfig {
    ScenarioConfig::from_toml(bundled(name).unwrap().text).unwrap()
}

fn criterion_5() -> Outcome {
    let report = run_scenario(&scenario("flat_pairing"), Some(&[Suite::Pairing]), None);
    ensure(report.abort.is_none(), || format!("aborted: {:?}", report.abort))?;
    let value = |name: &str| report.find(Suite::Pairing, name).map(|c| c.value).ok_or(format!("missing check {name}"));
    let herm = value("inner.hermiticity")?;
    let pos = value("inner.positivity")?;
    let later = value("flux.later_slice_relative")?;
    let tilted = value("flux.tilted_slice_relative")?;
    let gram = value("gram_matrix.final_slice")?;
    ensure(herm <= 1e-12, || format!("Hermiticity {herm:e}"))?;
    ensure(pos > 0.0, || format!("smallest norm {pos:e}"))?;
    ensure(later <= 1e-6 && tilted <= 1e-6, || format!("slice dependence {later:e}, {tilted:e}"))?;
    ensure(gram <= 1e-8, || format!("Gram drift {gram:e}"))?;
    Ok(format!(
        "Hermiticity {herm:.1e}, min norm {pos:.2}, t = T {later:.1e}, tilted {tilted:.1e}, 4-mode Gram {gram:.1e}"
    ))
}

fn criterion_6() -> Outcome {
    let k = PhysicalConstants::natural(1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let spinor = |rng: &mut ChaCha8Rng| -> [C64; 4] {
        std::array::from_fn(|_| z(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    };

    let (space, bg) = flat(16, 1.0);
    let window = space.with_time_axis(8, 0.0, 0.01).unwrap();
    let mut worst_im = 0.0f64;
    for _ in 0..50 {
        let data = (0..window.len()).map(|_| spinor(&mut rng)).collect();
        let f = SpinorField::from_data(window.clone(), data).unwrap();
        let s = action_value(&f, &bg, &k, &Region::all(&window)).unwrap();
        ensure(s.im.abs() <= 1e-10 * s.re.abs(), || format!("S = {s}"))?;
        worst_im = worst_im.max(s.im.abs() / s.re.abs());
    }

    let (space, bg) = flat(256, 4.0 * PI);
    let grid = space.with_time_axis(41, 0.0, 0.01).unwrap();
    let psi = plane_wave_field(&grid, 0.5, 1.0);
    let region = Region::all(&grid);
    let ns = grid.spatial_len();
    let mut worst_var = 0.0f64;
    for _ in 0..20 {
        let lo = rng.random_range(5..36);
        let hi = rng.random_range(lo + 1..=36);
        let mut delta = vec![[z(0., 0.); 4]; grid.len()];
        let mut norm2 = 0.0;
        for (idx, d) in delta.iter_mut().enumerate().take(hi * ns).skip(lo * ns) {
            *d = spinor(&mut rng).map(|a| a * 1e-3);
            norm2 += grid.weight(idx) * d.iter().map(|a| a.norm_sqr()).sum::<f64>();
        }
        let delta = SpinorField::from_data(grid.clone(), delta).unwrap();
        let s_plus = action_value(&psi.combine(z(1., 0.), &delta, z(1., 0.)).unwrap(), &bg, &k, &region).unwrap();
        let s_minus = action_value(&psi.combine(z(1., 0.), &delta, z(-1., 0.)).unwrap(), &bg, &k, &region).unwrap();
        let var = ((s_plus - s_minus) * 0.5).norm() / norm2.sqrt();
        worst_var = worst_var.max(var);
    }
    ensure(worst_var <= 1e-6, || format!("variational residual {worst_var:e}"))?;
    Ok(format!("max |Im S|/|Re S| {worst_im:.1e} over 50 fields; max |δS|/‖δψ‖ {worst_var:.1e} over 20 perturbations"))
}

fn criterion_7() -> Outcome {
    let m = 6;
    let space = FockSpace::new(m).unwrap();
    let basis: Vec<OccupationState> = (0u64..1 << m).map(OccupationState::from_bits).collect();
    let vac = FockVector::vacuum();
    let psi = |s: &[usize]| FockVector::sorted(s).unwrap();
    let mut verbatim = 0;
    for i in 0..m {
        ensure(space.create(i, &vac).unwrap() == psi(&[i]), || format!("a⁺_{i} Φ₀"))?;
        ensure(space.create(i, &psi(&[i])).unwrap().is_zero(), || format!("a⁺_{i} ψ_[{i}]"))?;
        ensure(space.annihilate(i, &psi(&[i])).unwrap() == vac, || format!("a_{i} ψ_[{i}]"))?;
        ensure(space.annihilate(i, &vac).unwrap().is_zero(), || format!("a_{i} Φ₀"))?;
        for &s in &basis {
            let idx = s.indices();
            let below = idx.iter().filter(|&&j| j < i).count();
            let sign = if below % 2 == 0 { 1.0 } else { -1.0 };
            let v = FockVector::basis(s);
            let up = space.create(i, &v).unwrap();
            let down = space.annihilate(i, &v).unwrap();
            if s.contains(i) {
                let rest: Vec<usize> = idx.iter().copied().filter(|&j| j != i).collect();
                ensure(up.is_zero(), || format!("a⁺_{i} on occupied {s}"))?;
                ensure(down == psi(&rest).scaled(z(sign, 0.)), || format!("a_{i} {s}"))?;
            } else {
                let mut with: Vec<usize> = idx.clone();
                with.push(i);
                with.sort_unstable();
                ensure(down.is_zero(), || format!("a_{i} on empty slot {s}"))?;
                ensure(up == psi(&with).scaled(z(sign, 0.)), || format!("a⁺_{i} {s}"))?;
            }
            if below % 2 == 0 {
                verbatim += 2;
            }
        }
    }

    for modes in 0..=m {
        let r = car_report(modes).unwrap();
        ensure(r.max() == 0.0, || format!("CAR report for M = {modes}: {r:?}"))?;
        // Dense integer brute force, independent of the report.
        let space = FockSpace::new(modes).unwrap();
        let states: Vec<OccupationState> = (0u64..1 << modes).map(OccupationState::from_bits).collect();
        let dim = states.len();
        let pos = |s: OccupationState| states.iter().position(|t| *t == s).unwrap();
        let matrix = |op: Ladder, i: usize| {
            let mut a = vec![vec![0i64; dim]; dim];
            for (col, &s) in states.iter().enumerate() {
                for (t, v) in space.apply(op, i, &FockVector::basis(s)).unwrap().iter() {
                    assert_eq!(v.im, 0.0);
                    a[pos(t)][col] = v.re as i64;
                }
            }
            a
        };
        let mul = |a: &Vec<Vec<i64>>, b: &Vec<Vec<i64>>| -> Vec<Vec<i64>> {
            (0..dim).map(|r| (0..dim).map(|c| (0..dim).map(|s| a[r][s] * b[s][c]).sum()).collect()).collect()
        };
        let ann: Vec<_> = (0..modes).map(|i| matrix(Ladder::Annihilate, i)).collect();
        let cre: Vec<_> = (0..modes).map(|i| matrix(Ladder::Create, i)).collect();
        for i in 0..modes {
            for r in 0..dim {
                for c in 0..dim {
                    ensure(ann[i][r][c] == cre[i][c][r], || format!("a_{i} ≠ (a⁺_{i})ᵀ"))?;
                }
            }
            for j in 0..modes {
                let (aa, ab) = (mul(&ann[i], &ann[j]), mul(&ann[j], &ann[i]));
                let (cc, cd) = (mul(&cre[i], &cre[j]), mul(&cre[j], &cre[i]));
                let (ac, ca) = (mul(&ann[i], &cre[j]), mul(&cre[j], &ann[i]));
                for r in 0..dim {
                    for c in 0..dim {
                        let delta = i64::from(i == j && r == c);
                        ensure(aa[r][c] + ab[r][c] == 0, || format!("{{a_{i}, a_{j}}} ≠ 0 (M = {modes})"))?;
                        ensure(cc[r][c] + cd[r][c] == 0, || format!("{{a⁺_{i}, a⁺_{j}}} ≠ 0 (M = {modes})"))?;
                        ensure(ac[r][c] + ca[r][c] == delta, || format!("{{a_{i}, a⁺_{j}}} ≠ δ (M = {modes})"))?;
                    }
                }
            }
        }
    }

    // Orthonormality with the identity Gram and the determinant formula for
    // an integer Gram, both exact.
    let subsets: Vec<Vec<usize>> = basis.iter().filter(|s| s.count() <= 4).map(|s| s.indices()).collect();
    let identity: Vec<Vec<C64>> = (0..m).map(|i| (0..m).map(|j| z(f64::from(u8::from(i == j)), 0.)).collect()).collect();
    let ints: Vec<Vec<i64>> = (0..m).map(|i| (0..m).map(|j| ((3 * i + 5 * j + i * j) % 7) as i64 - 3).collect()).collect();
    let int_gram: Vec<Vec<C64>> = ints.iter().map(|r| r.iter().map(|&x| z(x as f64, 0.)).collect()).collect();
    let expansions: Vec<_> = subsets.iter().map(|s| antisymmetrize(s).unwrap()).collect();
    for (a, sa) in expansions.iter().zip(&subsets) {
        for (b, sb) in expansions.iter().zip(&subsets) {
            let want = if sa == sb { 1.0 } else { 0.0 };
            ensure(product_inner_with(&identity, &a.product, &b.product) == z(want, 0.), || {
                format!("⟨ψ{sa:?}|ψ{sb:?}⟩ ≠ {want}")
            })?;
            if sa.len() == sb.len() {
                let det = leibniz(&ints, sa, sb);
                ensure(product_inner_with(&int_gram, &a.product, &b.product) == z(det as f64, 0.), || {
                    format!("integer Gram pairing {sa:?} {sb:?} ≠ {det}")
                })?;
            }
        }
    }
    for rep in [vec![1, 1], vec![1, 2, 1], vec![0, 4, 0, 2]] {
        let a = antisymmetrize(&rep).unwrap();
        ensure(a.product.is_zero() && a.fock.is_zero(), || format!("antisymmetrization of {rep:?} is not 0"))?;
    }
    Ok(format!(
        "{verbatim} sorted-slot ladder cases verbatim; CAR and adjointness exact for M ≤ 6; \
         orthonormality and integer-Gram determinants exact on {} states; repeated indices vanish",
        subsets.len()
    ))
}

/// det of the Gram submatrix by the Leibniz formula in integers.
fn leibniz(g: &[Vec<i64>], rows: &[usize], cols: &[usize]) -> i64 {
    fn perms(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in perms(n - 1) {
            for pos in 0..=p.len() {
                let mut q = p.clone();
                q.insert(pos, n - 1);
                out.push(q);
            }
        }
        out
    }
    perms(rows.len())
        .into_iter()
        .map(|p| {
            let inversions = (0..p.len()).flat_map(|i| (i + 1..p.len()).map(move |j| (i, j))).filter(|&(i, j)| p[i] > p[j]).count();
            let sign = if inversions % 2 == 0 { 1 } else { -1 };
            sign * p.iter().enumerate().map(|(r, &c)| g[rows[r]][cols[c]]).product::<i64>()
        })
        .sum()
}

fn criterion_8() -> Outcome {
    let cfg = scenario("flat_rest_wave");
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        run_scenario(&cfg, None, Some(42)).write_to(d.path()).unwrap();
    }
    for file in ["report.txt", "report.jsonl", "timeseries.csv"] {
        let a = std::fs::read(dirs[0].path().join(file)).unwrap();
        let b = std::fs::read(dirs[1].path().join(file)).unwrap();
        ensure(a == b, || format!("{file} differs between runs"))?;
    }
    Ok("report.txt, report.jsonl and timeseries.csv byte-identical across two seeded runs".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("constant matrices and identities", criterion_1),
        ("connection concordance and torsion", criterion_2),
        ("future time-like current", criterion_3),
        ("plane-wave evolution", criterion_4),
        ("pairing", criterion_5),
        ("action", criterion_6),
        ("Fock space", criterion_7),
        ("determinism", criterion_8),
    ];
    let mut failed = 0;
    for (n, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {} ({name}): {detail} [{secs:.2}s]", n + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {} ({name}): {why} [{secs:.2}s]", n + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
