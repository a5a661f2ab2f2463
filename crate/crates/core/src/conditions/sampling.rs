use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::operators::{helmholtz_project, EquationSpec};
use crate::spaces::{SpectralField, WaveGrid};

/// How a sampled shape was built.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ShapeKind {
    Mode { wavevector: Vec<i64>, sine: bool },
    Gaussian { cutoff: usize, decay: f64 },
    Constant,
    PerturbedConstant,
}

/// A sampled direction with `‖w‖_H = 1`.
#[derive(Clone, Debug)]
pub struct Shape {
    pub kind: ShapeKind,
    pub field: SpectralField,
}

fn rng_for(seed: u64, index: usize) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(index as u64 + 1);
    r
}

fn random_direction(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let s = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
    v.into_iter().map(|x| x / s).collect()
}

/// One wavevector per `±k` pair in the retained band. Modes whose squares
/// are still resolved come first; within each group, highest `|k|` first.
fn ranked_modes(grid: &WaveGrid) -> (Vec<usize>, Vec<usize>) {
    let half = grid.cutoff() / 2;
    let (mut low, mut high) = (Vec::new(), Vec::new());
    for flat in 1..grid.len() {
        if !grid.retained(flat) || grid.mirror(flat) < flat {
            continue;
        }
        if grid.wavenumber(flat).iter().all(|k| k.unsigned_abs() as usize <= half) {
            low.push(flat);
        } else {
            high.push(flat);
        }
    }
    let by_k = |a: &usize, b: &usize| grid.k2(*b).total_cmp(&grid.k2(*a)).then(a.cmp(b));
    low.sort_by(by_k);
    high.sort_by(by_k);
    (low, high)
}

/// Evenly spaced subsequence of length `n`, keeping the first entry.
fn spread(v: &[usize], n: usize) -> Vec<usize> {
    if n >= v.len() {
        return v.to_vec();
    }
    (0..n).map(|i| v[i * v.len() / n]).collect()
}

fn finish(spec: &EquationSpec, mut f: SpectralField) -> Option<SpectralField> {
    if spec.projects_noise() {
        f = helmholtz_project(&f).ok()?;
    }
    let h = spec.triple().h_norm(&f);
    (h > 1e-12).then(|| f.scaled(1.0 / h))
}

/// Deterministic list of about `count` unit shapes: pure modes (biased to
/// high frequencies), band-limited Gaussians and constants.
pub fn sample_shapes(spec: &EquationSpec, count: usize, seed: u64) -> Vec<Shape> {
    let grid = spec.grid();
    let comps = grid.components();
    let len = grid.len();
    let cutoff = grid.cutoff().max(1);
    let n_const = (count / 10).clamp(2, 16);
    let n_modes = (count / 2).max(1);
    let (low, high) = ranked_modes(grid);

    let mut flats: Vec<(usize, bool)> = Vec::new();
    for &f in low.iter().take(n_modes / 2) {
        flats.push((f, false));
        flats.push((f, true));
    }
    let rest = n_modes.saturating_sub(flats.len());
    for (i, f) in spread(&high, rest).into_iter().enumerate() {
        flats.push((f, i % 2 == 1));
    }
    flats.truncate(n_modes);

    let mut out = Vec::with_capacity(count);
    for (i, &(flat, sine)) in flats.iter().enumerate() {
        let mut rng = rng_for(seed, i);
        let dir = if comps == 1 { vec![1.0] } else { random_direction(&mut rng, comps) };
        let mut f = SpectralField::zeros(grid);
        let m = grid.mirror(flat);
        let z = if sine { num_complex::Complex64::new(0.0, -0.5) } else { num_complex::Complex64::new(0.5, 0.0) };
        for (c, &a) in dir.iter().enumerate() {
            f.coeffs_mut()[c * len + flat] = z * a;
            f.coeffs_mut()[c * len + m] = z.conj() * a;
        }
        if let Some(field) = finish(spec, f) {
            out.push(Shape { kind: ShapeKind::Mode { wavevector: grid.wavenumber(flat).to_vec(), sine }, field });
        }
    }

    let n_gauss = count.saturating_sub(out.len() + n_const);
    for j in 0..n_gauss {
        let mut rng = rng_for(seed, 100_000 + j);
        let c = 1 + j % cutoff;
        let decay = [0.0, 1.0, 2.0][(j / cutoff) % 3];
        if let Some(field) = finish(spec, SpectralField::random(grid, &mut rng, c, decay)) {
            out.push(Shape { kind: ShapeKind::Gaussian { cutoff: c, decay }, field });
        }
    }

    for j in 0..n_const {
        let mut rng = rng_for(seed, 200_000 + j);
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        let dir: Vec<f64> = if comps == 1 { vec![sign] } else { random_direction(&mut rng, comps) };
        let mut f = SpectralField::constant(grid, &dir).expect("component count matches");
        let kind = if j < 2 {
            ShapeKind::Constant
        } else {
            let p = SpectralField::random(grid, &mut rng, 2.min(cutoff), 1.0);
            let s = 0.2 / spec.triple().h_norm(&p).max(1e-300);
            f.axpy(s, &p).expect("same grid");
            ShapeKind::PerturbedConstant
        };
        if let Some(field) = finish(spec, f) {
            out.push(Shape { kind, field });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::NoiseSpec;
    use crate::operators::Equation;

    #[test]
    fn shapes_are_unit_and_deterministic() {
        let g = WaveGrid::torus(2, 16).unwrap();
        let spec = EquationSpec::new(Equation::allen_cahn(), g, NoiseSpec::silent(1), None).unwrap();
        let a = sample_shapes(&spec, 250, 3);
        let b = sample_shapes(&spec, 250, 3);
        assert_eq!(a.len(), 250);
        for (x, y) in a.iter().zip(&b) {
            assert!((spec.triple().h_norm(&x.field) - 1.0).abs() < 1e-12);
            assert_eq!(x.field.coeffs(), y.field.coeffs());
        }
        assert!(a.iter().any(|s| s.kind == ShapeKind::Mode { wavevector: vec![2, 2], sine: false }));
        assert!(a.iter().any(|s| s.kind == ShapeKind::Constant));
    }
}
