use crate::error::{Error, Result};
use crate::math::linalg::{SquareMatrix, SymMatrix, Vector};

/// `c(x,y) = σ(x)σ(y) + λ(I − 2ê⊗ê)`, `ê = (x−y)/|x−y|`: the cross block of
/// the pair diffusion's covariance (per unit of `2 dt`).
///
/// Not symmetric unless `σ(x)` and `σ(y)` commute, hence a `SquareMatrix`.
pub fn mirror_coupling_matrix(sigma_x: &SymMatrix, sigma_y: &SymMatrix, lambda: f64, x: &Vector, y: &Vector) -> Result<SquareMatrix> {
    let d = *x - *y;
    let r = d.norm();
    if r == 0.0 {
        return Err(Error::CoincidentPoints);
    }
    let e = d.scale(1.0 / r);
    let n = x.dim();
    let reflection = SquareMatrix::identity(n) - e.outer(&e).scale(2.0);
    Ok(*sigma_x * *sigma_y + reflection.scale(lambda))
}

/// `v − 2(ê·v)ê`.
#[inline]
pub fn reflect(v: &Vector, e: &Vector) -> Vector {
    *v - e.scale(2.0 * e.dot(v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_reflection() {
        let z = SymMatrix::zeros(1);
        let c = mirror_coupling_matrix(&z, &z, 1.0, &Vector::from_slice(&[1.0]), &Vector::from_slice(&[0.0])).unwrap();
        assert_eq!(c.get(0, 0), -1.0);
    }

    #[test]
    fn scalar_sigma_in_two_dimensions() {
        let s = SymMatrix::scalar(2, 1.5);
        let c = mirror_coupling_matrix(&s, &s, 1.0, &Vector::from_slice(&[2.0, 0.0]), &Vector::from_slice(&[0.0, 0.0])).unwrap();
        assert_eq!((c.get(0, 0), c.get(1, 1), c.get(0, 1)), (2.25 - 1.0, 2.25 + 1.0, 0.0));
    }

    #[test]
    fn coordinate_swap_equivariance() {
        let z = SymMatrix::zeros(2);
        let o = Vector::zeros(2);
        let a = mirror_coupling_matrix(&z, &z, 0.7, &Vector::from_slice(&[1.0, 0.0]), &o).unwrap();
        let b = mirror_coupling_matrix(&z, &z, 0.7, &Vector::from_slice(&[0.0, 1.0]), &o).unwrap();
        assert_eq!(a.get(0, 0), b.get(1, 1));
        assert_eq!(a.get(1, 1), b.get(0, 0));
    }

    #[test]
    fn coincident_points() {
        let z = SymMatrix::zeros(1);
        let x = Vector::from_slice(&[0.3]);
        assert_eq!(mirror_coupling_matrix(&z, &z, 1.0, &x, &x), Err(Error::CoincidentPoints));
    }
}
