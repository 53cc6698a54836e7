//! Problem set shared by the benchmarks.

use fop_core::fixtures::Generator;
use fop_core::{matvec, Matrix, Vector};

/// A named system `A x = b` with `b = A · 1`.
pub struct Problem {
    pub name: String,
    pub a: Matrix,
    pub b: Vector,
}

impl Problem {
    pub fn from_generator(spec: &str) -> Problem {
        let g: Generator = spec.parse().expect("valid generator");
        let a = g.build();
        let b = matvec(&a, &Vector::ones(a.rows())).expect("square generator");
        Problem { name: g.to_string(), a, b }
    }

    pub fn n(&self) -> usize {
        self.a.rows()
    }
}

/// Systems the solver converges on, from small dense to larger sparse.
pub fn convergent_problems() -> Vec<Problem> {
    ["randsdd:12,0", "randsdd:60,1", "tridiag:20", "randsdd:150,2"].into_iter().map(Problem::from_generator).collect()
}
