use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::noise::Transport;
use crate::operators::{Equation, EquationSpec, Variant};
use crate::spaces::Collocation;

/// Point and direction at which the worst margin is attained.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParabolicityWitness {
    pub point: Vec<f64>,
    pub direction: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParabolicityReport {
    pub variant: Variant,
    /// What `value` measures.
    pub quantity: String,
    /// Worst value of the scanned quantity over the collocation points.
    pub value: Option<f64>,
    /// Distance to the admissible bound; positive is safe.
    pub margin: Option<f64>,
    pub passed: bool,
    pub witness: Option<ParabolicityWitness>,
    pub points_scanned: usize,
}

/// `σ(x) = Σ_n b_n(x) b_n(x)ᵀ` at every point of the padded grid.
fn noise_matrices(spec: &EquationSpec) -> (Collocation, Vec<DMatrix<f64>>) {
    let d = spec.dimension();
    let coll = Collocation::padded(spec.grid());
    let mut constant = DMatrix::<f64>::zeros(d, d);
    let mut fields: Vec<Vec<Vec<f64>>> = Vec::new();
    for b in &spec.noise().transport {
        match b {
            Transport::None => {}
            Transport::Constant(v) => {
                let v = nalgebra::DVector::from_column_slice(v);
                constant += &v * v.transpose();
            }
            Transport::Field(f) => fields.push(coll.synthesize_field(f)),
        }
    }
    let mats = if fields.is_empty() {
        vec![constant]
    } else {
        (0..coll.len())
            .map(|p| {
                let mut m = constant.clone();
                for f in &fields {
                    let v = nalgebra::DVector::from_iterator(d, (0..d).map(|j| f[j][p]));
                    m += &v * v.transpose();
                }
                m
            })
            .collect()
    };
    (coll, mats)
}

/// Smallest (or largest) eigenpair over all points.
fn extreme(mats: &[DMatrix<f64>], largest: bool) -> (f64, usize, Vec<f64>) {
    let mut best = (if largest { f64::NEG_INFINITY } else { f64::INFINITY }, 0, Vec::new());
    for (p, m) in mats.iter().enumerate() {
        let eig = SymmetricEigen::new(m.clone());
        for (i, &l) in eig.eigenvalues.iter().enumerate() {
            if (largest && l > best.0) || (!largest && l < best.0) {
                best = (l, p, eig.eigenvectors.column(i).iter().cloned().collect());
            }
        }
    }
    best
}

fn point_of(coll: &Collocation, mats: &[DMatrix<f64>], p: usize) -> Vec<f64> {
    if mats.len() == 1 {
        coll.point(0)
    } else {
        coll.point(p)
    }
}

/// Scans the stochastic parabolicity condition of the variant pointwise.
///
/// * second order: `λ_min(a − σ/2) > 0`
/// * tamed NS: `1 − λ_max(σ) ≥ 0`
/// * Allen–Cahn: `ν = λ_max(σ) < 2`
/// * quasi-linear: `inf a − σ/2 > 0`
///
/// Fourth-order variants have no second-order part to dominate.
pub fn check_parabolicity(spec: &EquationSpec) -> ParabolicityReport {
    let variant = spec.variant();
    let d = spec.dimension();
    let mut report = ParabolicityReport {
        variant,
        quantity: String::new(),
        value: None,
        margin: None,
        passed: true,
        witness: None,
        points_scanned: 0,
    };
    if matches!(variant, Variant::CahnHilliard | Variant::SwiftHohenberg) {
        report.quantity = "not applicable: transport noise is lower order".into();
        return report;
    }
    let (coll, mut mats) = noise_matrices(spec);
    report.points_scanned = if mats.len() == 1 { 1 } else { coll.len() };
    let (value, margin, p, dir) = match spec.equation() {
        Equation::SecondOrder { a, .. } => {
            let a = DMatrix::from_row_slice(d, d, a);
            for m in mats.iter_mut() {
                *m = &a - &*m * 0.5;
            }
            let (l, p, v) = extreme(&mats, false);
            report.quantity = "lambda_min(a - sigma/2)".into();
            (l, l, p, v)
        }
        Equation::TamedNs { .. } => {
            let (l, p, v) = extreme(&mats, true);
            report.quantity = "lambda_max(sigma)".into();
            (l, 1.0 - l, p, v)
        }
        Equation::AllenCahn { .. } => {
            let (l, p, v) = extreme(&mats, true);
            report.quantity = "nu = lambda_max(sigma)".into();
            (l, 2.0 - l, p, v)
        }
        Equation::QuasiLinear1d { a, .. } => {
            let (l, p, v) = extreme(&mats, true);
            let m = a.infimum() - 0.5 * l;
            report.quantity = "inf a - sigma/2".into();
            (m, m, p, v)
        }
        _ => unreachable!("fourth-order variants return early"),
    };
    report.value = Some(value);
    report.margin = Some(margin);
    report.passed = match variant {
        Variant::TamedNs => margin >= 0.0,
        _ => margin > 0.0,
    };
    report.witness = Some(ParabolicityWitness { point: point_of(&coll, &mats, p), direction: dir });
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::NoiseSpec;
    use crate::operators::{helmholtz_project, TamingFunction};
    use crate::spaces::{Polynomial, SpectralField, WaveGrid};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_diffusion_without_noise() {
        let g = WaveGrid::torus(2, 8).unwrap();
        let spec = EquationSpec::new(Equation::heat(2), g, NoiseSpec::silent(1), None).unwrap();
        let r = check_parabolicity(&spec);
        assert_eq!(r.margin, Some(1.0));
        assert!(r.passed);
    }

    #[test]
    fn rank_one_allen_cahn() {
        let g = WaveGrid::torus(2, 8).unwrap();
        let c = [0.6, 0.5, 0.3];
        let mut noise = NoiseSpec::silent(3);
        for (b, &cn) in noise.transport.iter_mut().zip(&c) {
            *b = Transport::Constant(vec![cn, 0.0]);
        }
        let spec = EquationSpec::new(Equation::allen_cahn(), g, noise, None).unwrap();
        let r = check_parabolicity(&spec);
        let nu: f64 = c.iter().map(|x| x * x).sum();
        assert!((r.value.unwrap() - nu).abs() < 1e-15);
        assert!(r.passed);
        let w = r.witness.unwrap();
        assert!((w.direction[0].abs() - 1.0).abs() < 1e-12);
    }

    /// Eigenvalue oracle: `λ_max` of the 3×3 matrix `Σ b bᵀ` computed from
    /// the characteristic polynomial at each point.
    fn cubic_lambda_max(m: [[f64; 3]; 3]) -> f64 {
        let tr = m[0][0] + m[1][1] + m[2][2];
        let q = tr / 3.0;
        let p1 = m[0][1].powi(2) + m[0][2].powi(2) + m[1][2].powi(2);
        let p2 = (m[0][0] - q).powi(2) + (m[1][1] - q).powi(2) + (m[2][2] - q).powi(2) + 2.0 * p1;
        let p = (p2 / 6.0).sqrt();
        if p == 0.0 {
            return q;
        }
        let mut b = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                b[i][j] = (m[i][j] - if i == j { q } else { 0.0 }) / p;
            }
        }
        let det = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1]) - b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0])
            + b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
        let phi = (det / 2.0).clamp(-1.0, 1.0).acos() / 3.0;
        q + 2.0 * p * phi.cos()
    }

    #[test]
    fn tamed_ns_rescaled_transport() {
        let g = WaveGrid::torus(3, 8).unwrap().with_components(3);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let fields: Vec<SpectralField> =
            (0..2).map(|_| helmholtz_project(&SpectralField::random(&g, &mut rng, 2, 1.0)).unwrap()).collect();
        let build = |scale: f64| {
            let mut noise = NoiseSpec::silent(2);
            for (b, f) in noise.transport.iter_mut().zip(&fields) {
                *b = Transport::Field(f.scaled(scale));
            }
            EquationSpec::new(Equation::TamedNs { taming: TamingFunction::new(1.0).unwrap() }, g.clone(), noise, None)
                .unwrap()
        };
        let raw = check_parabolicity(&build(1.0)).value.unwrap();

        let coll = Collocation::padded(&g);
        let vals: Vec<_> = fields.iter().map(|f| coll.synthesize_field(f)).collect();
        let mut oracle = f64::NEG_INFINITY;
        for p in 0..coll.len() {
            let mut m = [[0.0; 3]; 3];
            for v in &vals {
                for i in 0..3 {
                    for j in 0..3 {
                        m[i][j] += v[i][p] * v[j][p];
                    }
                }
            }
            oracle = oracle.max(cubic_lambda_max(m));
        }
        assert!((raw - oracle).abs() < 1e-10 * oracle, "{raw} vs {oracle}");

        let ok = check_parabolicity(&build((0.95 / raw).sqrt()));
        assert!((ok.margin.unwrap() - 0.05).abs() < 1e-12 && ok.passed);
        let bad = check_parabolicity(&build((1.2 / raw).sqrt()));
        assert!(!bad.passed && bad.witness.is_some());
        assert!((bad.value.unwrap() - 1.2).abs() < 1e-12);
    }

    #[test]
    fn second_order_and_quasi_linear() {
        let g = WaveGrid::torus(2, 8).unwrap();
        let mut noise = NoiseSpec::silent(1);
        noise.transport[0] = Transport::Constant(vec![1.0, 1.0]);
        let eq = Equation::SecondOrder {
            a: vec![1.0, 0.0, 0.0, 1.0],
            f: Polynomial::zero(),
            flux_direction: vec![0.0, 0.0],
            flux: Polynomial::zero(),
        };
        let r = check_parabolicity(&EquationSpec::new(eq, g, noise, None).unwrap());
        assert!((r.margin.unwrap() - 0.0).abs() < 1e-15 && !r.passed);

        let g1 = WaveGrid::torus(1, 8).unwrap();
        let mut noise = NoiseSpec::silent(1);
        noise.transport[0] = Transport::Constant(vec![0.8]);
        let eq = Equation::QuasiLinear1d {
            a: crate::operators::Diffusivity { base: 0.5, amplitude: 1.0 },
            f: Polynomial::zero(),
        };
        let r = check_parabolicity(&EquationSpec::new(eq, g1, noise, None).unwrap());
        assert!((r.margin.unwrap() - (0.5 - 0.32)).abs() < 1e-15 && r.passed);
    }
}
