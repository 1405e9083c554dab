//! Prepare-and-measure scenario semantics under an energy bound: behaviors,
//! correlators, the separable bound, and the deterministic-behavior region.

use crate::error::{Error, Result};
use crate::quantum::{DensityMatrix, Povm};

const REGION_SLACK: f64 = 1e-9;

/// Conditional outcome table p(b|x) for binary b, x.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Behavior {
    /// p[b][x]
    p: [[f64; 2]; 2],
}

impl Behavior {
    pub fn new(p: [[f64; 2]; 2]) -> Result<Self> {
        for x in 0..2 {
            let (p0, p1) = (p[0][x], p[1][x]);
            if !(-1e-9..=1.0 + 1e-9).contains(&p0) || !(-1e-9..=1.0 + 1e-9).contains(&p1) {
                return Err(Error::Contract(format!("probability out of range: {p0}, {p1}")));
            }
            if (p0 + p1 - 1.0).abs() > 1e-9 {
                return Err(Error::Contract(format!(
                    "p(0|{x}) + p(1|{x}) = {} != 1",
                    p0 + p1
                )));
            }
        }
        Ok(Self { p })
    }

    pub fn prob(&self, b: usize, x: usize) -> f64 {
        self.p[b][x]
    }

    pub fn correlators(&self) -> Correlators {
        Correlators { e0: self.p[0][0] - self.p[1][0], e1: self.p[0][1] - self.p[1][1] }
    }
}

/// Signed outcome biases E_x = p(0|x) - p(1|x).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correlators {
    pub e0: f64,
    pub e1: f64,
}

/// |E_0 - E_1|, the correlation witness.
pub fn icorr(b: &Behavior) -> f64 {
    let c = b.correlators();
    (c.e0 - c.e1).abs()
}

/// Maximum witness value over separable strategies: 4 sqrt(w (1 - w)).
pub fn classical_bound(omega: f64) -> Result<f64> {
    check_omega(omega)?;
    Ok(4.0 * (omega * (1.0 - omega)).sqrt())
}

/// Separable floor on E_1 for behaviors deterministic on x=0: 2(1-2w)^2 - 1.
pub fn idet_bound(omega: f64) -> Result<f64> {
    check_omega(omega)?;
    let t = 1.0 - 2.0 * omega;
    Ok(2.0 * t * t - 1.0)
}

fn check_omega(omega: f64) -> Result<()> {
    if !(0.0..0.5).contains(&omega) {
        return Err(Error::Domain(format!("omega {omega} outside [0, 1/2)")));
    }
    Ok(())
}

/// Membership in the region of correlator pairs decomposable into separable
/// behaviors deterministic on input `xstar`.
///
/// The boundary arises from splitting the energy budget between the E_{x*} =
/// +1 and E_{x*} = -1 components of the mixture: pushing the whole budget w
/// into one component floors the other correlator at
/// (E_{x*} + 1)(1 - 4w/(1 + E_{x*}))^2 - 1. That allocation only exists while
/// the component budget 2w/(1 + E_{x*}) stays below 1/2, i.e. for
/// E_{x*} > 4w - 1; below that threshold the branch imposes nothing (the
/// favored component can already reach the orthogonal-states extreme). The
/// ceiling branch is its image under global outcome relabeling.
pub fn det_region_contains(c: &Correlators, omega: f64, xstar: u8) -> Result<bool> {
    check_omega(omega)?;
    let (es, eo) = if xstar == 0 { (c.e0, c.e1) } else { (c.e1, c.e0) };

    // floor branch: (E_s + 1)(1 - 4w/(1 + E_s))^2 - E_o <= 1, active for
    // E_s > 4w - 1 (the floor is continuous, equal to -1, at the threshold)
    let floor_ok = if es <= 4.0 * omega - 1.0 {
        true
    } else {
        let t = 1.0 - 4.0 * omega / (1.0 + es);
        (es + 1.0) * t * t - eo <= 1.0 + REGION_SLACK
    };
    // ceiling branch: (E_s - 1)(1 - 4w/(1 - E_s))^2 - E_o >= -1, active for
    // E_s < 1 - 4w
    let ceil_ok = if es >= 1.0 - 4.0 * omega {
        true
    } else {
        let t = 1.0 - 4.0 * omega / (1.0 - es);
        (es - 1.0) * t * t - eo >= -1.0 - REGION_SLACK
    };
    Ok(floor_ok && ceil_ok)
}

/// p(b|x) = Tr[Pi_b rho_x] from a two-state strategy and a binary POVM.
pub fn behavior_from_strategy(
    states: (&DensityMatrix, &DensityMatrix),
    povm: &Povm,
) -> Result<Behavior> {
    if povm.elements().len() != 2 {
        return Err(Error::Dimension("binary POVM expected".into()));
    }
    let (rho0, rho1) = states;
    if rho0.dim() != povm.shape().total() || rho1.dim() != povm.shape().total() {
        return Err(Error::Dimension("state/POVM dimension mismatch".into()));
    }
    let mut p = [[0.0; 2]; 2];
    for (b, pi) in povm.elements().iter().enumerate() {
        p[b][0] = pi.inner_re(rho0.mat());
        p[b][1] = pi.inner_re(rho1.mat());
    }
    // scrub tiny solver noise before validating
    for x in 0..2 {
        let s = p[0][x] + p[1][x];
        p[0][x] /= s;
        p[1][x] /= s;
    }
    Behavior::new(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{ComplexMatrix, SubsystemShape};
    use crate::quantum::helstrom;
    use crate::sampling::{random_binary_povm, random_density, random_unit_vector, random_unitary};
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn icorr_extremal_and_flat() {
        let b = Behavior::new([[1.0, 0.0], [0.0, 1.0]]).unwrap();
        assert_abs_diff_eq!(icorr(&b), 2.0);
        let b = Behavior::new([[0.5, 0.5], [0.5, 0.5]]).unwrap();
        assert_abs_diff_eq!(icorr(&b), 0.0);
    }

    #[test]
    fn classical_bound_values() {
        assert_abs_diff_eq!(classical_bound(0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(classical_bound(0.25).unwrap(), 4.0 * 0.1875f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(classical_bound(0.45).unwrap(), 4.0 * 0.2475f64.sqrt(), epsilon = 1e-12);
        assert!(classical_bound(0.5).is_err());
        assert!(classical_bound(-0.1).is_err());
    }

    #[test]
    fn classical_bound_monotone_on_grid() {
        let mut prev = -1.0;
        for k in 0..100 {
            let w = 0.4999 * k as f64 / 99.0;
            let v = classical_bound(w).unwrap();
            assert!(v >= prev);
            prev = v;
        }
        assert!(prev < 2.0 && prev > 1.999);
    }

    #[test]
    fn idet_bound_values() {
        assert_abs_diff_eq!(idet_bound(0.0).unwrap(), 1.0);
        assert_abs_diff_eq!(idet_bound(0.2).unwrap(), -0.28, epsilon = 1e-12);
        // boundary value approached as omega -> 1/2
        assert_abs_diff_eq!(idet_bound(0.4999999).unwrap(), -1.0, epsilon = 1e-5);
    }

    #[test]
    fn det_region_examples() {
        for omega in [0.0, 0.1, 0.3, 0.45] {
            let c = Correlators { e0: 1.0, e1: 1.0 };
            assert!(det_region_contains(&c, omega, 0).unwrap());
        }
        for omega in [0.1, 0.3] {
            let c = Correlators { e0: 1.0, e1: idet_bound(omega).unwrap() - 0.01 };
            assert!(!det_region_contains(&c, omega, 0).unwrap());
            let c = Correlators { e0: 1.0, e1: idet_bound(omega).unwrap() + 0.01 };
            assert!(det_region_contains(&c, omega, 0).unwrap());
        }
        // omega = 0 forces identical preparations: E0 = E1 on the E0 = 1 slice
        let c = Correlators { e0: 1.0, e1: 1.0 };
        assert!(det_region_contains(&c, 0.0, 0).unwrap());
        let c = Correlators { e0: 1.0, e1: 0.9 };
        assert!(!det_region_contains(&c, 0.0, 0).unwrap());
    }

    #[test]
    fn det_region_boundary_curves() {
        // Points exactly on either boundary branch are inside; points pushed
        // slightly past it are outside (when the other branch permits).
        for omega in [0.05, 0.2, 0.4] {
            for k in 0..50 {
                let es = -0.999 + 1.998 * k as f64 / 49.0;
                let floor = if es > 4.0 * omega - 1.0 {
                    let t = 1.0 - 4.0 * omega / (1.0 + es);
                    (es + 1.0) * t * t - 1.0
                } else {
                    -1.0
                };
                let ceil = if es < 1.0 - 4.0 * omega {
                    let t = 1.0 - 4.0 * omega / (1.0 - es);
                    (es - 1.0) * t * t + 1.0
                } else {
                    1.0
                };
                // the slice always contains the diagonal point (es, es)
                assert!(floor <= es + 1e-12 && es <= ceil + 1e-12);
                for eo in [floor, ceil, 0.5 * (floor + ceil)] {
                    let c = Correlators { e0: es, e1: eo };
                    assert!(det_region_contains(&c, omega, 0).unwrap());
                    // symmetric roles under xstar swap
                    let swapped = Correlators { e0: c.e1, e1: c.e0 };
                    assert!(det_region_contains(&swapped, omega, 1).unwrap());
                }
                if ceil + 1e-6 <= 1.0 {
                    let c = Correlators { e0: es, e1: ceil + 1e-6 };
                    assert!(!det_region_contains(&c, omega, 0).unwrap());
                }
                if floor - 1e-6 >= -1.0 {
                    let c = Correlators { e0: es, e1: floor - 1e-6 };
                    assert!(!det_region_contains(&c, omega, 0).unwrap());
                }
            }
        }
    }

    #[test]
    fn det_region_contains_sampled_deterministic_mixtures() {
        // Mixtures of qubit strategies, each deterministic on x = 0 and each
        // obeying its own ground-overlap budget, with the budgets averaging
        // to at most omega, must land inside the region.
        let mut rng = ChaCha8Rng::seed_from_u64(59);
        for _ in 0..200 {
            let ncomp = 1 + rand::Rng::gen_range(&mut rng, 0..4usize);
            let mut weights: Vec<f64> =
                (0..ncomp).map(|_| rand::Rng::gen::<f64>(&mut rng)).collect();
            let s: f64 = weights.iter().sum();
            weights.iter_mut().for_each(|w| *w /= s);
            let mut omega_avg = 0.0;
            let (mut e0, mut e1) = (0.0, 0.0);
            for &q in &weights {
                let wl = 0.4999 * rand::Rng::gen::<f64>(&mut rng);
                omega_avg += q * wl;
                // |psi> = cos a |0> + sin a |1>, sin^2 a <= wl, measured by
                // a projector aligned with it so the x=0 outcome is fixed
                let a = (wl.sqrt() * rand::Rng::gen::<f64>(&mut rng)).asin();
                let b = (wl.sqrt() * rand::Rng::gen::<f64>(&mut rng)).asin();
                let phase = std::f64::consts::TAU * rand::Rng::gen::<f64>(&mut rng);
                // overlap of psi with phi = cos b |0> + e^{i phase} sin b |1>
                let ov = num_complex::Complex64::new(a.cos() * b.cos(), 0.0)
                    + num_complex::Complex64::from_polar(a.sin() * b.sin(), phase);
                let p_same = ov.norm_sqr();
                let sign = if rand::Rng::gen::<bool>(&mut rng) { 1.0 } else { -1.0 };
                e0 += q * sign;
                e1 += q * sign * (2.0 * p_same - 1.0);
            }
            let omega = omega_avg.min(0.4999);
            let c = Correlators { e0, e1 };
            assert!(
                det_region_contains(&c, omega, 0).unwrap(),
                "mixture left the region: ({e0}, {e1}) at omega {omega}"
            );
        }
    }

    #[test]
    fn behavior_from_strategy_edges() {
        let shape = SubsystemShape::new(vec![2]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let rho = DensityMatrix::new(random_density(&mut rng, 2), shape.clone()).unwrap();
        let trivial = Povm::new(
            vec![ComplexMatrix::identity(2), ComplexMatrix::zeros(2, 2)],
            shape.clone(),
        )
        .unwrap();
        let b = behavior_from_strategy((&rho, &rho), &trivial).unwrap();
        assert_abs_diff_eq!(b.prob(0, 0), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b.prob(0, 1), 1.0, epsilon = 1e-12);

        let (p0, p1) = random_binary_povm(&mut rng, 2, 1);
        let povm = Povm::new(vec![p0, p1], shape).unwrap();
        let b = behavior_from_strategy((&rho, &rho), &povm).unwrap();
        assert_abs_diff_eq!(b.prob(0, 0), b.prob(0, 1), epsilon = 1e-12);
        assert_eq!(icorr(&b), 0.0);
    }

    #[test]
    fn icorr_matches_helstrom_value() {
        let shape = SubsystemShape::new(vec![2, 2]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        let v0 = random_unit_vector(&mut rng, 4);
        let rho0 = DensityMatrix::from_pure(&v0, shape.clone()).unwrap();
        let rho1 = DensityMatrix::new(random_density(&mut rng, 4), shape).unwrap();
        let (value, povm) = helstrom(&rho0, &rho1).unwrap();
        let b = behavior_from_strategy((&rho0, &rho1), &povm).unwrap();
        assert_abs_diff_eq!(icorr(&b), value, epsilon = 1e-10);
    }

    // Theorem-style property: unitary strategies with a common ground overlap
    // never exceed the separable bound.
    #[test]
    fn unitary_strategies_respect_separable_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        let shape = SubsystemShape::new(vec![2, 2]).unwrap();
        let mut done = 0;
        while done < 200 {
            let psi = random_unit_vector(&mut rng, 4);
            let u0 = random_unitary(&mut rng, 2);
            let u1 = random_unitary(&mut rng, 2);
            let id2 = ComplexMatrix::identity(2);
            let psi0 = u0.tensor(&id2).matmul(&psi);
            let psi1 = u1.tensor(&id2).matmul(&psi);
            let g = random_unit_vector(&mut rng, 2);
            let proj = ComplexMatrix::outer(&g, &g).tensor(&id2);
            let o0 = psi0.dagger().matmul(&proj).matmul(&psi0)[(0, 0)].re;
            let o1 = psi1.dagger().matmul(&proj).matmul(&psi1)[(0, 0)].re;
            let omega = 1.0 - o0.min(o1);
            if omega >= 0.5 {
                continue;
            }
            let rho0 = DensityMatrix::from_pure(&psi0, shape.clone()).unwrap();
            let rho1 = DensityMatrix::from_pure(&psi1, shape.clone()).unwrap();
            // the optimal measurement maximizes I_corr for this pair
            let (value, _) = helstrom(&rho0, &rho1).unwrap();
            assert!(
                value <= classical_bound(omega).unwrap() + 1e-8,
                "unitary strategy beat the separable bound: {value} vs omega {omega}"
            );
            done += 1;
        }
    }
}
