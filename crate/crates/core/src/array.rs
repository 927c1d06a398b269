//! Uniform linear array geometry: steering vectors, their derivatives, and
//! the array manifold matrix.
//!
//! The array has half-wavelength sensor spacing, so the phase of sensor `w`
//! for a plane wave from direction `beta` is `-pi * w * cos(beta)` and the
//! wavelength never appears as a parameter. Angles are radians in the open
//! interval (0, pi) everywhere inside the library; degrees exist only at the
//! CLI boundary.

use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex;

use crate::error::{DoaError, Result};
use crate::linalg::{C64, CMatrix, CVector};

/// Arrival angles of the V sources, radians, each strictly inside (0, pi).
#[derive(Debug, Clone, PartialEq)]
pub struct DoaVector {
    angles: DVector<f64>,
}

impl DoaVector {
    pub fn new(angles: Vec<f64>) -> Result<Self> {
        if angles.is_empty() {
            return Err(DoaError::invalid("DoaVector needs at least one angle"));
        }
        for (v, &b) in angles.iter().enumerate() {
            check_angle(b).map_err(|e| DoaError::invalid(format!("angle {v}: {e}")))?;
        }
        Ok(DoaVector {
            angles: DVector::from_vec(angles),
        })
    }

    pub fn from_degrees(deg: &[f64]) -> Result<Self> {
        Self::new(deg.iter().map(|d| d.to_radians()).collect())
    }

    /// Number of sources V.
    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        false // V >= 1 by construction
    }

    pub fn angles(&self) -> &DVector<f64> {
        &self.angles
    }

    pub fn as_slice(&self) -> &[f64] {
        self.angles.as_slice()
    }

    pub fn to_degrees_vec(&self) -> Vec<f64> {
        self.angles.iter().map(|b| b.to_degrees()).collect()
    }

    /// Same angles sorted ascending.
    pub fn sorted(&self) -> DoaVector {
        let mut v: Vec<f64> = self.as_slice().to_vec();
        v.sort_by(|a, b| a.total_cmp(b));
        DoaVector {
            angles: DVector::from_vec(v),
        }
    }
}

fn check_angle(beta: f64) -> std::result::Result<(), String> {
    if !beta.is_finite() || beta <= 0.0 || beta >= PI {
        Err(format!("angle {beta} rad is outside the open interval (0, pi)"))
    } else {
        Ok(())
    }
}

/// Complex array response to a unit plane wave; element 0 is exactly 1 and
/// every element has unit modulus.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringVector {
    elements: CVector,
}

impl SteeringVector {
    pub fn elements(&self) -> &CVector {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

/// a(beta): element w = exp(-j pi w cos(beta)).
pub fn steering_vector(beta: f64, sensors: usize) -> Result<SteeringVector> {
    check_angle(beta).map_err(DoaError::invalid)?;
    if sensors < 1 {
        return Err(DoaError::invalid("sensor count must be at least 1"));
    }
    let phase_step = -PI * beta.cos();
    let elements = CVector::from_fn(sensors, |w, _| Complex::from_polar(1.0, phase_step * w as f64));
    Ok(SteeringVector { elements })
}

/// da(beta)/dbeta: element w = j pi w sin(beta) exp(-j pi w cos(beta)).
///
/// Not a steering vector itself (the elements are not unit modulus); it feeds
/// the likelihood gradient and the Fisher information.
pub fn steering_derivative(beta: f64, sensors: usize) -> Result<CVector> {
    let a = steering_vector(beta, sensors)?;
    let factor = PI * beta.sin();
    Ok(CVector::from_fn(sensors, |w, _| {
        C64::new(0.0, factor * w as f64) * a.elements[w]
    }))
}

/// W x V matrix whose columns are the steering vectors of the angles.
///
/// Rank V whenever the angles are distinct; duplicated angles are allowed to
/// construct and the rank deficiency surfaces downstream.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldMatrix {
    columns: CMatrix,
}

impl ManifoldMatrix {
    pub fn matrix(&self) -> &CMatrix {
        &self.columns
    }

    pub fn sensors(&self) -> usize {
        self.columns.nrows()
    }

    pub fn sources(&self) -> usize {
        self.columns.ncols()
    }
}

pub fn manifold(betas: &DoaVector, sensors: usize) -> Result<ManifoldMatrix> {
    let mut columns = CMatrix::zeros(sensors, betas.len());
    for (v, &beta) in betas.as_slice().iter().enumerate() {
        let a = steering_vector(beta, sensors)?;
        columns.set_column(v, a.elements());
    }
    Ok(ManifoldMatrix { columns })
}

/// Columns of steering derivatives, matching `manifold` column for column.
pub fn manifold_derivative(betas: &DoaVector, sensors: usize) -> Result<CMatrix> {
    let mut columns = CMatrix::zeros(sensors, betas.len());
    for (v, &beta) in betas.as_slice().iter().enumerate() {
        columns.set_column(v, &steering_derivative(beta, sensors)?);
    }
    Ok(columns)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn assert_cvec_eq(actual: &CVector, expected: &[C64], tol: f64) {
        assert_eq!(actual.len(), expected.len());
        for (a, e) in actual.iter().zip(expected) {
            assert_relative_eq!(a.re, e.re, epsilon = tol);
            assert_relative_eq!(a.im, e.im, epsilon = tol);
        }
    }

    #[test]
    fn broadside_steering_is_all_ones() {
        let a = steering_vector(PI / 2.0, 4).unwrap();
        let one = C64::new(1.0, 0.0);
        assert_cvec_eq(a.elements(), &[one, one, one, one], 1e-15);
    }

    #[test]
    fn sixty_degree_steering_cycles_through_quadrants() {
        // cos(pi/3) = 1/2, so a = exp(-j pi/2) = -j and powers cycle 1, -j, -1, j.
        let a = steering_vector(PI / 3.0, 4).unwrap();
        let expected = [
            C64::new(1.0, 0.0),
            C64::new(0.0, -1.0),
            C64::new(-1.0, 0.0),
            C64::new(0.0, 1.0),
        ];
        assert_cvec_eq(a.elements(), &expected, 1e-12);
    }

    #[test]
    fn fifty_degree_element_matches_direct_evaluation() {
        let a = steering_vector(50f64.to_radians(), 6).unwrap();
        let e1 = a.elements()[1];
        // Frozen from a 40-digit evaluation of exp(-j pi cos 50deg):
        // phase -2.019376832409775..., value -0.433686916714650 - 0.901063626094484j.
        assert_relative_eq!(e1.re, -0.433686916714649613, epsilon = 1e-12);
        assert_relative_eq!(e1.im, -0.901063626094484279, epsilon = 1e-12);
    }

    #[test]
    fn rejects_endpoints_and_bad_sensor_count() {
        assert!(steering_vector(0.0, 4).is_err());
        assert!(steering_vector(PI, 4).is_err());
        assert!(steering_vector(-0.3, 4).is_err());
        assert!(steering_vector(1.0, 0).is_err());
        assert!(DoaVector::new(vec![]).is_err());
        assert!(DoaVector::new(vec![0.5, PI]).is_err());
    }

    #[test]
    fn derivative_at_broadside_is_j_pi_w() {
        let d = steering_derivative(PI / 2.0, 4).unwrap();
        let expected = [
            C64::new(0.0, 0.0),
            C64::new(0.0, PI),
            C64::new(0.0, 2.0 * PI),
            C64::new(0.0, 3.0 * PI),
        ];
        assert_cvec_eq(&d, &expected, 1e-12);
    }

    #[test]
    fn derivative_at_sixty_degrees_closed_form() {
        // w=1: j pi sin(pi/3) * (-j) = pi sqrt(3)/2, purely real.
        let d = steering_derivative(PI / 3.0, 2).unwrap();
        let expected = [C64::new(0.0, 0.0), C64::new(PI * 3f64.sqrt() / 2.0, 0.0)];
        assert_cvec_eq(&d, &expected, 1e-12);
    }

    #[test]
    fn manifold_stacks_steering_columns() {
        let betas = DoaVector::new(vec![PI / 3.0, PI / 2.0]).unwrap();
        let m = manifold(&betas, 2).unwrap();
        assert_eq!(m.sensors(), 2);
        assert_eq!(m.sources(), 2);
        assert_relative_eq!(m.matrix()[(0, 0)].re, 1.0, epsilon = 1e-15);
        assert_relative_eq!(m.matrix()[(1, 0)].im, -1.0, epsilon = 1e-12);
        assert_relative_eq!(m.matrix()[(1, 1)].re, 1.0, epsilon = 1e-15);

        let single = manifold(&DoaVector::new(vec![PI / 2.0]).unwrap(), 3).unwrap();
        for w in 0..3 {
            assert_relative_eq!(single.matrix()[(w, 0)].re, 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn duplicated_angles_give_rank_one_manifold() {
        let betas = DoaVector::new(vec![PI / 4.0, PI / 4.0]).unwrap();
        let m = manifold(&betas, 6).unwrap();
        assert_eq!(m.matrix().rank(1e-10), 1);
    }

    fn central_difference(beta: f64, sensors: usize, step: f64) -> CVector {
        let plus = steering_vector(beta + step, sensors).unwrap();
        let minus = steering_vector(beta - step, sensors).unwrap();
        (plus.elements() - minus.elements()).map(|z| z / C64::new(2.0 * step, 0.0))
    }

    proptest! {
        #[test]
        fn unit_modulus_everywhere(beta in 1e-6..(PI - 1e-6), sensors in 1usize..12) {
            let a = steering_vector(beta, sensors).unwrap();
            prop_assert!((a.elements()[0] - C64::new(1.0, 0.0)).norm() < 1e-15);
            for z in a.elements().iter() {
                prop_assert!((z.norm() - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn mirror_angle_conjugates_the_phase(beta in 1e-3..(PI - 1e-3), sensors in 1usize..10) {
            let a = steering_vector(beta, sensors).unwrap();
            let mirrored = steering_vector(PI - beta, sensors).unwrap();
            for (z, m) in a.elements().iter().zip(mirrored.elements().iter()) {
                prop_assert!((m - z.conj()).norm() < 1e-10);
            }
        }

        #[test]
        fn derivative_matches_central_differences(beta in 1e-2..(PI - 1e-2), sensors in 1usize..10) {
            let step = 1e-7;
            let fd = central_difference(beta, sensors, step);
            let analytic = steering_derivative(beta, sensors).unwrap();
            let scale = analytic.norm().max(1.0);
            prop_assert!((analytic - fd).norm() <= 1e-6 * scale);
        }
    }
}
