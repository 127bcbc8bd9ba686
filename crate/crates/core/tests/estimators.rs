use std::f64::consts::PI;

use approx::assert_relative_eq;

use penreflect::estimators::{
    bismut_gradient_mc, image_kernel_oracle, martingale_check, neumann_heat_mc, one_form_mc, profile,
    weak_derivative_check, ImageKernelSolution, KernelKind, LineCurve, McSettings, OneForm, ScalarField,
};
use penreflect::geometry::ManifoldModel;

// E|x + B_t| and P(x + B_s > 0, s ≤ t) at x = 1/2, t = 1, from 30-digit
// evaluations of the folded-normal mean and of erf(x/√(2t))
const FOLDED_MEAN: f64 = 0.89559311480261206;
const SURVIVAL: f64 = 0.38292492254802621;

#[test]
fn image_kernels_match_closed_forms() {
    let n = image_kernel_oracle(KernelKind::Neumann, 1.0, 0.5, &|y| y).unwrap();
    assert_relative_eq!(n, FOLDED_MEAN, max_relative = 1e-10);
    let d = image_kernel_oracle(KernelKind::Dirichlet, 1.0, 0.5, &|_| 1.0).unwrap();
    assert_relative_eq!(d, SURVIVAL, max_relative = 1e-10);
    // gauss profile: even extension gives a Gaussian convolution
    for (t, x) in [(1.0, 0.5), (0.25, 0.0), (2.0, 1.3)] {
        let s: f64 = 1.0 + 2.0 * t;
        let want = (-x * x / s).exp() / s.sqrt();
        let got = image_kernel_oracle(KernelKind::Neumann, t, x, &|y| (-y * y).exp()).unwrap();
        assert_relative_eq!(got, want, max_relative = 1e-10);
        let sol = ImageKernelSolution { profile: profile("gauss").unwrap(), horizon: t };
        let dwant = -2.0 * x * (-x * x / s).exp() / s.powf(1.5);
        assert!((sol.normal_derivative(0.0, x).unwrap() - dwant).abs() <= 1e-10);
    }
    assert!(image_kernel_oracle(KernelKind::Neumann, 0.0, 0.5, &|y| y).is_err());
    assert!(image_kernel_oracle(KernelKind::Neumann, 1.0, -0.5, &|y| y).is_err());
}

fn settings(n: usize, seed: u64) -> McSettings {
    McSettings::new(0.5, 1e-3, n, seed).unwrap()
}

#[test]
fn heat_estimate_matches_cosine_mode() {
    // cos(πy) satisfies the Neumann condition; Q_t cos(π·)(x) = cos(πx) e^{−π²t/2}
    let m = ManifoldModel::half_line();
    let f = ScalarField::named(&m, "cos-neumann").unwrap();
    let s = settings(4000, 3);
    let est = neumann_heat_mc(&m, &f, &s, &[0.3]).unwrap();
    let want = (0.3 * PI).cos() * (-PI * PI * 0.25).exp();
    assert!(est.z_score(want) < 4.0, "{} ± {} vs {want}", est.mean[0], est.stderr[0]);
}

#[test]
fn heat_estimate_is_deterministic_and_bounded() {
    for m in [ManifoldModel::half_space(2).unwrap(), ManifoldModel::spherical_cap(1.0).unwrap()] {
        let f = ScalarField::named(&m, "gauss").unwrap();
        let x = if m.ambient_dim() == 3 { ManifoldModel::point_from_polar(0.8, 0.0) } else { vec![0.0, 0.2] };
        let a = neumann_heat_mc(&m, &f, &settings(200, 5), &x).unwrap();
        let b = neumann_heat_mc(&m, &f, &settings(200, 5), &x).unwrap();
        assert_eq!(a.mean[0].to_bits(), b.mean[0].to_bits());
        assert_eq!(a.config_digest, b.config_digest);
        assert!(a.mean[0] > 0.0 && a.mean[0] <= 1.0);
        let c = neumann_heat_mc(&m, &f, &settings(200, 6), &x).unwrap();
        assert_ne!(a.config_digest, c.config_digest);
        let one = neumann_heat_mc(&m, &ScalarField::constant(&m, 2.5), &settings(50, 1), &x).unwrap();
        assert_eq!(one.mean[0], 2.5);
    }
}

#[test]
fn gradient_estimators_are_linear_in_v() {
    let m = ManifoldModel::half_space(2).unwrap();
    let f = ScalarField::named(&m, "gauss").unwrap();
    let phi = OneForm::exact(&f);
    let s = settings(300, 7);
    let x = [0.1, 0.3];
    let (e1, e2, mix) = ([1.0, 0.0], [0.0, 1.0], [2.0, -3.0]);
    for bismut in [false, true] {
        let est = |v: &[f64]| {
            let r = if bismut { bismut_gradient_mc(&m, &f, &s, &x, v) } else { one_form_mc(&m, &phi, &s, &x, v) };
            r.unwrap().mean[0]
        };
        let combo = 2.0 * est(&e1) - 3.0 * est(&e2);
        assert!((est(&mix) - combo).abs() <= 1e-12 * (1.0 + combo.abs()), "bismut={bismut}");
    }
    // the tangential derivative of a normal profile is zero path by path
    assert_eq!(one_form_mc(&m, &phi, &s, &x, &e1).unwrap().mean[0], 0.0);
}

#[test]
fn gradient_estimators_agree_with_the_oracle() {
    let m = ManifoldModel::half_space(1).unwrap();
    let f = ScalarField::named(&m, "gauss").unwrap();
    let s = McSettings::new(0.5, 1e-3, 3000, 9).unwrap();
    let sol = ImageKernelSolution { profile: profile("gauss").unwrap(), horizon: 0.5 };
    let want = sol.normal_derivative(0.0, 0.4).unwrap();
    let a = one_form_mc(&m, &OneForm::exact(&f), &s, &[0.4], &[1.0]).unwrap();
    let b = bismut_gradient_mc(&m, &f, &s, &[0.4], &[1.0]).unwrap();
    let c = martingale_check(&m, &sol, &s, &[0.4], &[1.0]).unwrap();
    let curve = LineCurve { base: vec![0.4], direction: vec![1.0] };
    let d = weak_derivative_check(&m, &f, &curve, 0.0, 0.2, &McSettings::new(0.5, 1e-3, 500, 9).unwrap()).unwrap();
    for (name, est, target) in [("one-form", &a, want), ("bismut", &b, want), ("martingale", &c, 0.0), ("weak", &d, 0.0)] {
        assert!(est.z_score(target) < 4.0, "{name}: {} ± {} vs {target}", est.mean[0], est.stderr[0]);
    }
}

#[test]
fn incompatible_inputs_are_rejected() {
    let m = ManifoldModel::half_space(2).unwrap();
    let s = settings(10, 1);
    // ⟨∇f, ν⟩ = 1 on the boundary
    let bad = ScalarField::new("y", |x| x[1], |_, out| {
        out[0] = 0.0;
        out[1] = 1.0;
    });
    assert!(bismut_gradient_mc(&m, &bad, &s, &[0.0, 0.5], &[0.0, 1.0]).is_err());
    assert!(one_form_mc(&m, &OneForm::exact(&bad), &s, &[0.0, 0.5], &[0.0, 1.0]).is_err());
    let good = ScalarField::named(&m, "gauss").unwrap();
    assert!(bismut_gradient_mc(&m, &good, &s, &[0.0, 0.5], &[1.0]).is_err());
    assert!(neumann_heat_mc(&m, &good, &s, &[0.0, -0.5]).is_err());
    let cap = ManifoldModel::spherical_cap(1.0).unwrap();
    let sol = ImageKernelSolution { profile: profile("gauss").unwrap(), horizon: 0.5 };
    let x = ManifoldModel::point_from_polar(0.5, 0.0);
    assert!(martingale_check(&cap, &sol, &s, &x, &[1.0, 0.0]).is_err());
    assert!(McSettings::new(1.0, 0.0, 10, 1).is_err());
    assert!(McSettings::new(1.0, 0.1, 1, 1).is_err());
    assert!(ScalarField::named(&m, "nope").is_err());
}
