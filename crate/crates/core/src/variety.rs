//! The singularity variety of a simple linear pentapod and its three parts:
//! a hyperplane, a quadric, and a 2-plane along which the quadric is singular.

use nalgebra::{Matrix6, SMatrix, Vector3};

use crate::geometry::{DesignCase, DesignParams, Pose, Vec6};

/// Zero set of `normal · u + offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyperplane {
    pub normal: Vec6,
    pub offset: f64,
}

impl Hyperplane {
    pub fn eval(&self, u: &Vec6) -> f64 {
        self.normal.dot(u) + self.offset
    }
}

/// Zero set of `½ uᵀ A u + aᵀ u + c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadric {
    pub hessian: Matrix6<f64>,
    pub linear: Vec6,
    pub constant: f64,
}

impl Quadric {
    pub fn eval(&self, u: &Vec6) -> f64 {
        0.5 * u.dot(&(self.hessian * u)) + self.linear.dot(u) + self.constant
    }

    pub fn gradient(&self, u: &Vec6) -> Vec6 {
        self.hessian * u + self.linear
    }
}

/// `base + t1·directions[0] + t2·directions[1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffinePlane {
    pub base: Vec6,
    pub directions: [Vec6; 2],
}

impl AffinePlane {
    pub fn point(&self, t1: f64, t2: f64) -> Vec6 {
        self.base + self.directions[0] * t1 + self.directions[1] * t2
    }
}

/// Singularity locus split into its hyperplane, quadric and singular 2-plane.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaVariety {
    pub case: DesignCase,
    pub alpha: f64,
    pub beta: f64,
    pub hyperplane: Hyperplane,
    pub quadric: Quadric,
    pub plane: AffinePlane,
}

fn unit(k: usize) -> Vec6 {
    let mut e = Vec6::zeros();
    e[k] = 1.0;
    e
}

/// Builds the decomposed variety of a design.
pub fn build_sigma(design: &DesignParams) -> SigmaVariety {
    let (alpha, beta) = (design.alpha(), design.beta());
    let mut hessian = Matrix6::zeros();
    for (i, j, v) in [(0, 5, alpha), (1, 5, beta), (2, 3, -alpha), (2, 4, -beta)] {
        hessian[(i, j)] = v;
        hessian[(j, i)] = v;
    }
    let (hyperplane, linear) = match design.case() {
        DesignCase::OrientationLinear => (unit(5), unit(2)),
        DesignCase::PositionLinear => (unit(2), -unit(5)),
    };
    // the plane is cut out by the line alpha*x + beta*y = c in the orientation
    // block (c = 0 or 1) and in the position block, with u3 = u6 = 0
    let (c_orient, c_pos) = match design.case() {
        DesignCase::OrientationLinear => (0.0, 1.0),
        DesignCase::PositionLinear => (1.0, 0.0),
    };
    let (point_on_line, along): (fn(f64, f64, f64) -> (f64, f64), (f64, f64)) =
        if alpha.abs() >= beta.abs() {
            (|c, a, _| (c / a, 0.0), (-beta / alpha, 1.0))
        } else {
            (|c, _, b| (0.0, c / b), (1.0, -alpha / beta))
        };
    let (ox, oy) = point_on_line(c_orient, alpha, beta);
    let (px, py) = point_on_line(c_pos, alpha, beta);
    let plane = AffinePlane {
        base: Vec6::new(ox, oy, 0.0, px, py, 0.0),
        directions: [
            Vec6::new(along.0, along.1, 0.0, 0.0, 0.0, 0.0),
            Vec6::new(0.0, 0.0, 0.0, along.0, along.1, 0.0),
        ],
    };
    SigmaVariety {
        case: design.case(),
        alpha,
        beta,
        hyperplane: Hyperplane { normal: hyperplane, offset: 0.0 },
        quadric: Quadric { hessian, linear, constant: 0.0 },
        plane,
    }
}

/// Values of the hyperplane and quadric polynomials at a pose.
pub fn evaluate_sigma(v: &SigmaVariety, pose: &Pose) -> (f64, f64) {
    let u = pose.vector();
    (v.hyperplane.eval(u), v.quadric.eval(u))
}

impl SigmaVariety {
    /// Whether the pose lies on the variety within `tol` on both polynomials.
    pub fn contains(&self, pose: &Pose, tol: f64) -> bool {
        let (f1, f2) = evaluate_sigma(self, pose);
        f1.abs() <= tol || f2.abs() <= tol
    }

    /// The four affine equations cutting out the singular 2-plane, as
    /// `(coefficients, constant)` with `coefficients · u + constant = 0`.
    pub fn plane_equations(&self) -> [Hyperplane; 4] {
        let (a, b) = (self.alpha, self.beta);
        let (c_orient, c_pos) = match self.case {
            DesignCase::OrientationLinear => (0.0, -1.0),
            DesignCase::PositionLinear => (-1.0, 0.0),
        };
        [
            Hyperplane { normal: Vec6::new(a, b, 0.0, 0.0, 0.0, 0.0), offset: c_orient },
            Hyperplane { normal: unit(2), offset: 0.0 },
            Hyperplane { normal: Vec6::new(0.0, 0.0, 0.0, a, b, 0.0), offset: c_pos },
            Hyperplane { normal: unit(5), offset: 0.0 },
        ]
    }

    /// The two 4-planes whose union is the intersection of hyperplane and
    /// quadric, each given by its pair of defining equations.
    pub fn intersection_planes(&self) -> [[Hyperplane; 2]; 2] {
        let eqs = self.plane_equations();
        let both_heights = [eqs[1], eqs[3]];
        let line = match self.case {
            DesignCase::OrientationLinear => [eqs[3], eqs[2]],
            DesignCase::PositionLinear => [eqs[1], eqs[0]],
        };
        [both_heights, line]
    }

    /// Point of the 3-dimensional manifold along which the hyperplane is
    /// tangent to the quadric.
    pub fn tangency_point(&self, v: [f64; 3]) -> Vec6 {
        let (a, b) = (self.alpha, self.beta);
        let on_line = |s: f64| {
            if a.abs() >= b.abs() {
                ((1.0 - b * s) / a, s)
            } else {
                (s, (1.0 - a * s) / b)
            }
        };
        match self.case {
            DesignCase::OrientationLinear => {
                let (x, y) = on_line(v[2]);
                Vec6::new(v[0], v[1], 0.0, x, y, 0.0)
            }
            DesignCase::PositionLinear => {
                let (x, y) = on_line(v[0]);
                Vec6::new(x, y, 0.0, v[1], v[2], 0.0)
            }
        }
    }
}

/// Determinant of the 7×7 singularity matrix built directly from the leg
/// geometry. Vanishes exactly on the singularity variety.
pub fn det_s(design: &DesignParams, pose: &Pose) -> f64 {
    let u = pose.vector();
    let mut s = SMatrix::<f64, 7, 7>::zeros();
    s[(0, 0)] = 1.0;
    for k in 0..6 {
        s[(0, k + 1)] = u[k];
    }
    for k in 0..3 {
        s[(1, k + 1)] = u[k + 3];
        s[(2, k + 4)] = u[k];
    }
    for leg in 1..5 {
        let r = design.offsets()[leg];
        let b: Vector3<f64> = design.base()[leg];
        let row = leg + 2;
        s[(row, 0)] = r;
        for k in 0..3 {
            s[(row, k + 1)] = b[k];
            s[(row, k + 4)] = r * b[k];
        }
    }
    s.determinant()
}
