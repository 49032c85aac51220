//! Quantum gates as explicit unitary matrices.

use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};

const C0: Complex64 = Complex64::new(0.0, 0.0);
const C1: Complex64 = Complex64::new(1.0, 0.0);
const CI: Complex64 = Complex64::new(0.0, 1.0);

/// A gate on one or two qubits, described by its unitary matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    name: String,
    arity: usize,
    matrix: DMatrix<Complex64>,
    params: Vec<f64>,
}

impl Gate {
    /// Build a gate from an explicit matrix, checking unitarity to 1e-10.
    pub fn new(
        name: impl Into<String>,
        matrix: DMatrix<Complex64>,
        params: Vec<f64>,
    ) -> Result<Self> {
        let dim = matrix.nrows();
        if matrix.ncols() != dim || (dim != 2 && dim != 4) {
            return Err(Error::DimensionMismatch(matrix.nrows(), matrix.ncols()));
        }
        let dev = unitarity_deviation(&matrix);
        if dev > 1e-10 {
            return Err(Error::NotUnitary(dev));
        }
        Ok(Self {
            name: name.into(),
            arity: if dim == 2 { 1 } else { 2 },
            matrix,
            params,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    fn fixed(name: &str, entries: [[Complex64; 2]; 2]) -> Self {
        let matrix = DMatrix::from_row_slice(2, 2, &[
            entries[0][0],
            entries[0][1],
            entries[1][0],
            entries[1][1],
        ]);
        Self {
            name: name.to_string(),
            arity: 1,
            matrix,
            params: Vec::new(),
        }
    }

    pub fn h() -> Self {
        let s = Complex64::new(FRAC_1_SQRT_2, 0.0);
        Self::fixed("h", [[s, s], [s, -s]])
    }

    pub fn x() -> Self {
        Self::fixed("x", [[C0, C1], [C1, C0]])
    }

    pub fn y() -> Self {
        Self::fixed("y", [[C0, -CI], [CI, C0]])
    }

    pub fn z() -> Self {
        Self::fixed("z", [[C1, C0], [C0, -C1]])
    }

    pub fn s() -> Self {
        Self::fixed("s", [[C1, C0], [C0, CI]])
    }

    pub fn sdg() -> Self {
        Self::fixed("sdg", [[C1, C0], [C0, -CI]])
    }

    pub fn t() -> Self {
        let p = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
        Self::fixed("t", [[C1, C0], [C0, p]])
    }

    pub fn rx(theta: f64) -> Self {
        let c = Complex64::new((theta / 2.0).cos(), 0.0);
        let s = Complex64::new(0.0, -(theta / 2.0).sin());
        let mut g = Self::fixed("rx", [[c, s], [s, c]]);
        g.params = vec![theta];
        g
    }

    pub fn ry(theta: f64) -> Self {
        let c = Complex64::new((theta / 2.0).cos(), 0.0);
        let s = Complex64::new((theta / 2.0).sin(), 0.0);
        let mut g = Self::fixed("ry", [[c, -s], [s, c]]);
        g.params = vec![theta];
        g
    }

    pub fn rz(theta: f64) -> Self {
        let m = Complex64::from_polar(1.0, -theta / 2.0);
        let p = Complex64::from_polar(1.0, theta / 2.0);
        let mut g = Self::fixed("rz", [[m, C0], [C0, p]]);
        g.params = vec![theta];
        g
    }

    /// Controlled NOT; target list order is (control, target).
    pub fn cnot() -> Self {
        let matrix = DMatrix::from_fn(4, 4, |r, c| {
            let flip = if r < 2 { r } else { r ^ 1 };
            if flip == c {
                C1
            } else {
                C0
            }
        });
        Self {
            name: "cx".to_string(),
            arity: 2,
            matrix,
            params: Vec::new(),
        }
    }

    /// Look up a gate by its serialized name.
    pub fn from_name(name: &str, params: &[f64]) -> Result<Self> {
        let expect = |k: usize| -> Result<()> {
            if params.len() != k {
                Err(Error::BadParameterCount {
                    name: name.to_string(),
                    expected: k,
                    got: params.len(),
                })
            } else {
                Ok(())
            }
        };
        match name {
            "h" => expect(0).map(|_| Self::h()),
            "x" => expect(0).map(|_| Self::x()),
            "y" => expect(0).map(|_| Self::y()),
            "z" => expect(0).map(|_| Self::z()),
            "s" => expect(0).map(|_| Self::s()),
            "sdg" => expect(0).map(|_| Self::sdg()),
            "t" => expect(0).map(|_| Self::t()),
            "rx" => expect(1).map(|_| Self::rx(params[0])),
            "ry" => expect(1).map(|_| Self::ry(params[0])),
            "rz" => expect(1).map(|_| Self::rz(params[0])),
            "cx" => expect(0).map(|_| Self::cnot()),
            other => Err(Error::UnknownGate(other.to_string())),
        }
    }
}

/// Max-entry deviation of U†U from the identity.
pub fn unitarity_deviation(m: &DMatrix<Complex64>) -> f64 {
    let prod = m.adjoint() * m;
    let dim = m.nrows();
    let mut dev: f64 = 0.0;
    for r in 0..dim {
        for c in 0..dim {
            let expect = if r == c { C1 } else { C0 };
            dev = dev.max((prod[(r, c)] - expect).norm());
        }
    }
    dev
}

/// Kronecker product of two unitaries (first factor acts on the more
/// significant qubits).
pub fn tensor_product(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    a.kronecker(b)
}
