//! Property tests for the invariants of each layer.

use std::collections::HashMap;

use faer::Mat;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spectral_schwarz::coarse::{build_coarse, local_eigenbases, CoarseOptions, CoarseVariant, ColumnSolver};
use spectral_schwarz::decomposition::Decomposition;
use spectral_schwarz::elliptic::{CoefficientField, CoefficientModel, EllipticProblem, EllipticSpec};
use spectral_schwarz::harness::{
    preconditioned_matrix, read_rows, run, write_csv, ExperimentConfig, ResultRow, CSV_SCHEMA,
};
use spectral_schwarz::mesh::{build_pwls_mesh, build_structured_mesh, MeshConvention};
use spectral_schwarz::numerics::{
    apply_lowrank_woodbury, dense_generalized_eig, factorize, general_eigenvalues, inner_solve, CsrMatrix,
    FactorKind,
};
use spectral_schwarz::pcg::pcg_solve;
use spectral_schwarz::pou::PartitionOfUnity;
use spectral_schwarz::pwls::{Multipliers, PwlsProblem, PwlsSpec, WaveSpeedModel};
use spectral_schwarz::scalar::{norm2, Scalar};
use spectral_schwarz::schwarz::{Preconditioner, SchwarzPreconditioner};

fn cases(n: u32) -> ProptestConfig {
    ProptestConfig::with_cases(n)
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect()
}

fn random_cvec(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n).map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect()
}

fn model_of(i: u8) -> CoefficientModel {
    match i % 4 {
        0 => CoefficientModel::Model1,
        1 => CoefficientModel::Model2,
        2 => CoefficientModel::Model3,
        _ => CoefficientModel::Model4,
    }
}

fn elliptic(dim: usize, n: usize, m: usize, model: CoefficientModel, mu: f64, seed: u64) -> EllipticProblem {
    EllipticProblem::build(&EllipticSpec {
        dim,
        n,
        m,
        overlap: 1,
        max_oversample: 0,
        model,
        mu,
        seed,
    })
    .unwrap()
}

fn pwls(n: usize, m: usize, p: usize, multipliers: Multipliers) -> PwlsProblem {
    PwlsProblem::build(&PwlsSpec {
        model: WaveSpeedModel::Model41,
        n,
        m,
        p,
        omega: 40.0,
        overlap: 1,
        max_oversample: 0,
        seed: 0,
        multipliers,
    })
    .unwrap()
}

/// Random sparse Hermitian positive definite matrix (strict diagonal
/// dominance), real or complex.
fn random_hpd<T: Scalar>(n: usize, seed: u64, complex: bool) -> CsrMatrix<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Vec::new();
    let mut rowsum = vec![0.0; n];
    for i in 0..n {
        for _ in 0..3 {
            let j = rng.random_range(0..n);
            if j == i {
                continue;
            }
            let re = rng.random::<f64>() - 0.5;
            let im = if complex { rng.random::<f64>() - 0.5 } else { 0.0 };
            let v = T::from_c64(Complex64::new(re, im)).unwrap();
            t.push((i, j, v));
            t.push((j, i, v.conjugate()));
            rowsum[i] += v.modulus();
            rowsum[j] += v.modulus();
        }
    }
    for (i, s) in rowsum.iter().enumerate() {
        t.push((i, i, T::from_re(s + 1.0 + rng.random::<f64>())));
    }
    CsrMatrix::from_triplets(n, n, t)
}

fn rel_diff<T: Scalar>(x: &[T], y: &[T]) -> f64 {
    let d: Vec<T> = x.iter().zip(y).map(|(a, b)| *a - *b).collect();
    norm2(&d) / norm2(y).max(1e-300)
}

// ------------------------------------------------------------ meshes

proptest! {
    #![proptest_config(cases(12))]

    #[test]
    fn pou_sums_to_one(dim in 2usize..=3, n in 1usize..=3, m in 1usize..=3, l in 1usize..=2) {
        let mesh = build_structured_mesh(dim, n, m.max(l), MeshConvention::Elliptic).unwrap();
        let decomp = Decomposition::build(&mesh, l, 0).unwrap();
        let pou = PartitionOfUnity::build(&mesh, &decomp);
        prop_assert!(pou.max_sum_defect() <= 1e-12);
        for v in 0..pou.num_nodes() {
            for &(_, t) in pou.node(v) {
                prop_assert!((0.0..=1.0).contains(&t));
            }
        }
    }

    #[test]
    fn dual_pou_sums_to_one(n in 1usize..=3, m in 1usize..=3, l in 1usize..=2, x in 0.0f64..2.0, y in 0.0f64..1.0) {
        let mesh = build_pwls_mesh([2.0, 1.0], [2 * n, n], m).unwrap();
        let decomp = Decomposition::build(&mesh, l, 0).unwrap();
        let pou = PartitionOfUnity::build(&mesh, &decomp);
        prop_assert!(pou.max_sum_defect() <= 1e-12);
        let vals = pou.dual_eval([x, y]);
        let sum: f64 = vals.iter().map(|(_, t, _)| t).sum();
        prop_assert!((sum - 1.0).abs() <= 1e-12);
        let grad: [f64; 2] = vals.iter().fold([0.0, 0.0], |g, (_, _, d)| [g[0] + d[0], g[1] + d[1]]);
        prop_assert!(grad[0].abs() <= 1e-9 && grad[1].abs() <= 1e-9);
    }

    #[test]
    fn neighbours_are_overlapping_subdomains(dim in 2usize..=3, n in 1usize..=4, l in 1usize..=2) {
        let m = if dim == 3 { 2 } else { 3 };
        let mesh = build_structured_mesh(dim, n, m, MeshConvention::Elliptic).unwrap();
        let d = Decomposition::build(&mesh, l, 0).unwrap();
        for i in 0..d.num_subdomains {
            for j in 0..d.num_subdomains {
                let meet = d.omega_prime[i].iter().any(|e| d.omega_prime[j].binary_search(e).is_ok());
                prop_assert_eq!(d.neighbors[i].contains(&j), meet, "i={} j={}", i, j);
            }
            prop_assert!(d.neighbors[i].len() <= d.max_neighbors);
        }
    }

    #[test]
    fn oversampling_grows_to_the_domain(n in 1usize..=4, i_seed in 0usize..64) {
        let mesh = build_structured_mesh(2, n, 2, MeshConvention::Elliptic).unwrap();
        let d = Decomposition::build(&mesh, 1, n + 1).unwrap();
        let i = i_seed % d.num_subdomains;
        let mut prev = d.oversampled_elements(i, 1).unwrap();
        for k in 2..=n + 1 {
            let cur = d.oversampled_elements(i, k).unwrap();
            prop_assert!(prev.iter().all(|e| cur.binary_search(e).is_ok()));
            prev = cur;
        }
        prop_assert_eq!(prev.len(), mesh.num_elements());
    }

    #[test]
    fn simplicial_meshes_are_conforming(dim in 2usize..=3, n in 1usize..=2, m in 1usize..=3) {
        let mesh = build_structured_mesh(dim, n, m, MeshConvention::Elliptic).unwrap();
        let mut facets: HashMap<Vec<usize>, usize> = HashMap::new();
        for e in 0..mesh.num_elements() {
            let verts = mesh.element(e);
            for skip in 0..verts.len() {
                let mut f: Vec<usize> = verts.iter().enumerate().filter(|(k, _)| *k != skip).map(|(_, &v)| v).collect();
                f.sort_unstable();
                *facets.entry(f).or_default() += 1;
            }
        }
        for (f, count) in facets {
            prop_assert!(count == 1 || count == 2);
            if count == 1 {
                prop_assert!(f.iter().all(|&v| mesh.is_boundary_vertex(v)));
            }
        }
    }

    #[test]
    fn quad_meshes_are_conforming(n in 1usize..=3, m in 1usize..=3) {
        let mesh = build_pwls_mesh([2.0, 1.0], [2 * n, n], m).unwrap();
        let mut per_element = vec![0usize; mesh.num_elements()];
        let mut seen = std::collections::HashSet::new();
        for f in &mesh.interior_faces {
            let r = f.right.expect("interior face has two elements");
            prop_assert!(f.left != r);
            prop_assert!(seen.insert((f.left.min(r), f.left.max(r))));
            per_element[f.left] += 1;
            per_element[r] += 1;
        }
        for f in &mesh.boundary_faces {
            prop_assert!(f.right.is_none());
            per_element[f.left] += 1;
        }
        prop_assert!(per_element.iter().all(|&c| c == 4));
    }
}

// ------------------------------------------------------------ numerics

proptest! {
    #![proptest_config(cases(10))]

    #[test]
    fn sparse_factor_solve_residual(n in 1usize..=500, seed in any::<u64>(), complex in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        if complex {
            let a = random_hpd::<Complex64>(n, seed, true);
            let b = random_cvec(&mut rng, n);
            let x = factorize(&a, FactorKind::Cholesky).unwrap().solve(&b);
            prop_assert!(rel_diff(&a.matvec(&x), &b) <= 1e-12);
        } else {
            let a = random_hpd::<f64>(n, seed, false);
            let b = random_vec(&mut rng, n);
            let x = factorize(&a, FactorKind::Cholesky).unwrap().solve(&b);
            prop_assert!(rel_diff(&a.matvec(&x), &b) <= 1e-12);
        }
    }

    #[test]
    fn generalized_eigenvectors_are_b_orthonormal(n in 1usize..=40, seed in any::<u64>()) {
        let a = random_hpd::<Complex64>(n, seed, true).to_dense();
        let b = random_hpd::<Complex64>(n, seed.wrapping_add(7), true).to_dense();
        let eig = dense_generalized_eig(&a, &b).unwrap();
        let gram = eig.vectors.adjoint() * &b * &eig.vectors;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                prop_assert!((gram[(i, j)] - Complex64::new(target, 0.0)).norm() <= 1e-8);
            }
        }
        prop_assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn inner_iterations_shrink_as_tolerance_loosens(seed in any::<u64>()) {
        let p = elliptic(2, 2, 6, CoefficientModel::Model2, 3.0, 0);
        let a = p.system.a.matrix();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = random_vec(&mut rng, a.nrows());
        let mut last = usize::MAX;
        for tol in [1e-10, 1e-6, 1e-3, 1e-1, 0.5] {
            let s = inner_solve(a, &b, tol, 10_000).unwrap();
            prop_assert!(s.relres <= tol);
            prop_assert!(s.iterations <= last);
            last = s.iterations;
        }
    }

    #[test]
    fn woodbury_matches_dense_solve(n in 2usize..=50, r in 0usize..=6, seed in any::<u64>()) {
        let a = random_hpd::<Complex64>(n, seed, true);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 3);
        let g = Mat::<Complex64>::from_fn(n, r, |_, _| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let b = random_cvec(&mut rng, n);
        let f = factorize(&a, FactorKind::Cholesky).unwrap();
        let x = apply_lowrank_woodbury(&f, &g, &b).unwrap();
        let shifted = a.to_dense() + &g * g.adjoint();
        let ax = &shifted * Mat::<Complex64>::from_fn(n, 1, |i, _| x[i]);
        let ax: Vec<Complex64> = (0..n).map(|i| ax[(i, 0)]).collect();
        prop_assert!(rel_diff(&ax, &b) <= 1e-8);
    }
}

// ------------------------------------------------------------ discretizations

proptest! {
    #![proptest_config(cases(8))]

    #[test]
    fn local_forms_add_up_to_the_global_form(dim in 2usize..=3, model in 0u8..4, mu in 0.0f64..4.0, seed in any::<u64>()) {
        let p = elliptic(dim, 2, 2, model_of(model), mu, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_vec(&mut rng, p.system.num_dofs());
        let total: f64 = (0..p.system.num_subdomains()).map(|i| p.system.local_a_energy(i, &u)).sum();
        let global = p.system.a.matrix().quad_form(&u);
        prop_assert!((total - global).abs() <= 1e-10 * global.abs());
    }

    #[test]
    fn product_rule_constant_two(model in 0u8..4, mu in 0.0f64..6.0, seed in any::<u64>()) {
        let p = elliptic(2, 3, 3, model_of(model), mu, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..20 {
            let u = random_vec(&mut rng, p.system.num_dofs());
            for i in 0..p.system.num_subdomains() {
                let bound = 2.0 * (p.system.local_a_energy(i, &u) + p.system.local_s_energy(i, &u));
                for &j in &p.decomp.neighbors[i] {
                    prop_assert!(p.local_product_energy(i, j, &u) <= bound * (1.0 + 1e-8));
                }
            }
        }
    }

    #[test]
    fn random_coefficients_follow_the_seed(mu in 0.5f64..6.0, seed in any::<u64>()) {
        let mesh = build_structured_mesh(2, 2, 4, MeshConvention::Elliptic).unwrap();
        let a = CoefficientField::model(&mesh, CoefficientModel::Model4, mu, seed);
        let b = CoefficientField::model(&mesh, CoefficientModel::Model4, mu, seed);
        let c = CoefficientField::model(&mesh, CoefficientModel::Model4, mu, seed.wrapping_add(1));
        prop_assert_eq!(&a.values, &b.values);
        prop_assert_ne!(&a.values, &c.values);
        let lo = 10f64.powf(-mu / 2.0);
        let hi = 10f64.powf(mu / 2.0);
        prop_assert!(a.values.iter().all(|&v| v >= lo * (1.0 - 1e-12) && v <= hi * (1.0 + 1e-12)));
    }

    #[test]
    fn pwls_matrix_is_hermitian_and_product_rule_holds(m in 1usize..=3, p in 3usize..=7, seed in any::<u64>()) {
        let prob = pwls(1, m, p, Multipliers::default());
        let a = prob.system.a.matrix();
        prop_assert!(a.hermitian_defect() <= 1e-12 * a.max_abs());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..10 {
            let u = random_cvec(&mut rng, prob.num_dofs());
            for i in 0..prob.system.num_subdomains() {
                let bound = 4.0 * (prob.system.local_a_energy(i, &u) + prob.system.local_s_energy(i, &u));
                prop_assert!(prob.local_product_energy(i, &u) <= bound * (1.0 + 1e-6));
            }
        }
    }
}

#[test]
fn doubling_multipliers_doubles_the_matrix() {
    let base = pwls(1, 2, 5, Multipliers::default());
    let doubled = pwls(1, 2, 5, Multipliers { alpha: 2.0, beta: 2.0, nu: 2.0 });
    let (a, b) = (base.system.a.matrix(), doubled.system.a.matrix());
    let diff = b.add_scaled(Complex64::new(-2.0, 0.0), a).unwrap();
    assert!(diff.max_abs() <= 1e-13 * b.max_abs());
    let its = |prob: &PwlsProblem| {
        let pre = SchwarzPreconditioner::build(&prob.system, None).unwrap();
        pcg_solve(prob.system.a.matrix(), &pre, &prob.system.rhs, 1e-8, 500).unwrap().1.iterations
    };
    assert_eq!(its(&base), its(&doubled));
}

// ------------------------------------------------------------ coarse spaces

proptest! {
    #![proptest_config(cases(6))]

    #[test]
    fn coarse_complement_is_s_orthogonal(model in 0u8..4, mu in 0.0f64..4.0, seed in any::<u64>()) {
        let p = elliptic(2, 3, 3, model_of(model), mu, seed);
        let sys = &p.system;
        let bases = local_eigenbases(sys, p.default_threshold(), false).unwrap();
        let direct = CoarseOptions { column_solver: ColumnSolver::Direct, ..CoarseOptions::default() };
        let psi = build_coarse(sys, &p.decomp, &bases, CoarseVariant::PsiGlobal, None, &direct).unwrap();
        let psibar = build_coarse(sys, &p.decomp, &bases, CoarseVariant::PsibarGlobal, None, &direct).unwrap();
        for basis in [&psi, &psibar] {
            let a0 = &basis.a0;
            let scale = (0..a0.nrows()).map(|i| a0[(i, i)].abs()).fold(0.0f64, f64::max);
            prop_assert!(basis.a0_hermitian_defect() <= 1e-10 * scale);
        }
        let a = sys.a.matrix();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..5 {
            let u = random_vec(&mut rng, sys.num_dofs());
            let u0 = psi.a_projection(a, &u).unwrap();
            let u0bar = psibar.a_projection(a, &u).unwrap();
            prop_assert!(rel_diff(&u0bar, &u0) <= 1e-6);
            let w: Vec<f64> = u.iter().zip(&u0).map(|(x, y)| x - y).collect();
            for b in &bases {
                let wi = sys.restrict(b.subdomain, &w);
                for j in 0..b.selected {
                    let c = sys.local_s[b.subdomain].bilinear(&wi, &b.phi(j));
                    prop_assert!(c.abs() <= 1e-6 * norm2(&u));
                }
            }
        }
    }

    #[test]
    fn economical_columns_stay_in_their_region(k in 1usize..=2, seed in any::<u64>()) {
        let p = EllipticProblem::build(&EllipticSpec {
            dim: 2, n: 4, m: 2, overlap: 1, max_oversample: k, model: CoefficientModel::Model2, mu: 2.0, seed,
        }).unwrap();
        let bases = local_eigenbases(&p.system, p.default_threshold(), false).unwrap();
        let basis = build_coarse(&p.system, &p.decomp, &bases, CoarseVariant::PsiEcon, Some(k), &CoarseOptions::default()).unwrap();
        for col in &basis.columns {
            let region = p.decomp.oversampled_elements(col.subdomain, k).unwrap();
            let allowed = p.system.incidence.interior_dofs(&region);
            let dense = col.to_dense(p.system.num_dofs());
            for (g, v) in dense.iter().enumerate() {
                if *v != 0.0 {
                    prop_assert!(allowed.binary_search(&g).is_ok());
                }
            }
        }
    }
}

// ------------------------------------------------------------ preconditioner and PCG

proptest! {
    #![proptest_config(cases(6))]

    #[test]
    fn schwarz_is_linear_and_positive(model in 0u8..4, two_level in any::<bool>(), seed in any::<u64>()) {
        let p = elliptic(2, 3, 3, model_of(model), 3.0, seed);
        let sys = &p.system;
        let coarse = if two_level {
            let bases = local_eigenbases(sys, p.default_threshold(), false).unwrap();
            Some(build_coarse(sys, &p.decomp, &bases, CoarseVariant::PsibarGlobal, None, &CoarseOptions::default()).unwrap())
        } else {
            None
        };
        let pre = SchwarzPreconditioner::build(sys, coarse).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = sys.num_dofs();
        let (r1, r2) = (random_vec(&mut rng, n), random_vec(&mut rng, n));
        let sum: Vec<f64> = r1.iter().zip(&r2).map(|(a, b)| a + b).collect();
        let lhs = pre.apply(&sum);
        let rhs: Vec<f64> = pre.apply(&r1).iter().zip(pre.apply(&r2)).map(|(a, b)| a + b).collect();
        prop_assert!(rel_diff(&lhs, &rhs) <= 1e-12);
        let z = pre.apply(&r1);
        prop_assert!(r1.iter().zip(&z).map(|(a, b)| a * b).sum::<f64>() > 0.0);
        // cross term symmetric
        let z2 = pre.apply(&r2);
        let x12: f64 = r1.iter().zip(&z2).map(|(a, b)| a * b).sum();
        let x21: f64 = r2.iter().zip(&z).map(|(a, b)| a * b).sum();
        prop_assert!((x12 - x21).abs() <= 1e-10 * x12.abs().max(1.0));
    }

    #[test]
    fn pcg_error_decreases_and_estimates_stay_in_the_spectrum(model in 0u8..4, seed in any::<u64>()) {
        let p = elliptic(2, 2, 4, model_of(model), 2.0, seed);
        let a = p.system.a.matrix();
        let pre = SchwarzPreconditioner::build(&p.system, None).unwrap();
        let exact = factorize(a, FactorKind::Cholesky).unwrap().solve(&p.system.rhs);
        let tol = 1e-8;
        let mut last = f64::INFINITY;
        for it in 1..60 {
            let (x, rep) = pcg_solve(a, &pre, &p.system.rhs, tol, it).unwrap();
            let e: Vec<f64> = x.iter().zip(&exact).map(|(u, v)| u - v).collect();
            let energy = a.quad_form(&e).sqrt();
            prop_assert!(energy <= last * (1.0 + 1e-10) + 1e-14);
            last = energy;
            prop_assert!(rep.relres_history.iter().all(|r| r.is_finite()));
            if rep.converged {
                prop_assert!(rep.final_relres() <= tol);
                let ev = general_eigenvalues(&preconditioned_matrix(a, &pre)).unwrap();
                let lo = ev.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
                let hi = ev.iter().map(|z| z.re).fold(0.0f64, f64::max);
                prop_assert!(rep.lambda_min_est.unwrap() >= lo * (1.0 - 1e-8));
                prop_assert!(rep.lambda_max_est.unwrap() <= hi * (1.0 + 1e-8));
                break;
            }
        }
    }
}

// ------------------------------------------------------------ harness

#[test]
fn runs_are_deterministic() {
    let cfg = ExperimentConfig::from_json(
        r#"{"problem":"elliptic2d","model":"model4","n":3,"m":3,"mu":3,"seed":11,"variant":"psi_econ","k":1}"#,
    )
    .unwrap();
    let mut a = run(&cfg).unwrap();
    let mut b = run(&cfg).unwrap();
    for r in [&mut a, &mut b] {
        r.setup_seconds = 0.0;
        r.solve_seconds = 0.0;
    }
    assert_eq!(a, b);
    assert_eq!(a.cond_est.map(f64::to_bits), b.cond_est.map(f64::to_bits));
    assert_eq!(a.relres.to_bits(), b.relres.to_bits());
}

fn row_strategy() -> impl Strategy<Value = ResultRow> {
    let finite = -1e6f64..1e6;
    (
        (1usize..4, 1usize..20, 1usize..20, proptest::option::of(1usize..9), proptest::option::of(finite.clone())),
        (finite.clone(), any::<u64>(), 0usize..500, any::<bool>(), proptest::option::of(1.0f64..1e9)),
        (0usize..5000, proptest::option::of(0.0f64..1.0), "[a-z_0-9]{1,12}"),
    )
        .prop_map(|((dim, n, m, k, omega), (lambda, seed, iterations, converged, cond_est), (coarse_dim, err, variant))| {
            ResultRow {
                problem: "elliptic2d".into(),
                model: "model1".into(),
                dim,
                n,
                m,
                l: 1,
                k,
                p: k,
                omega,
                mu1: omega,
                mu2: None,
                lambda,
                variant,
                tol: 1e-8,
                tol_a: 1e-10,
                seed,
                iterations,
                converged,
                relres: lambda.abs() * 1e-9,
                cond_est,
                coarse_dim,
                max_neighbors: 9,
                sum_li: coarse_dim,
                rel_error: err,
                setup_seconds: 0.125,
                solve_seconds: lambda.abs(),
            }
        })
}

proptest! {
    #![proptest_config(cases(32))]

    #[test]
    fn csv_rows_round_trip(rows in proptest::collection::vec(row_strategy(), 0..6)) {
        let mut buf = Vec::new();
        write_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        prop_assert!(text.starts_with(CSV_SCHEMA));
        let back = read_rows(buf.as_slice()).unwrap();
        prop_assert_eq!(back, rows);
    }
}
