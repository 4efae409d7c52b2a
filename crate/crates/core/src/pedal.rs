//! Pedal points: stationary points of the g-distance from a pose to each
//! part of the singularity variety.

use nalgebra::{Matrix2, Vector2};

use crate::geometry::{DesignCase, MetricTensor, Pose, Vec6};
use crate::tolerances;
use crate::variety::SigmaVariety;

/// Which part of the variety a pedal point lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Component {
    Hyperplane,
    Quadric,
    Plane,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pedal {
    pub point: Pose,
    pub component: Component,
    pub distance: f64,
}

/// All pedal points of a pose, closest first.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PedalSet {
    pedals: Vec<Pedal>,
    degenerate_roots: usize,
}

impl PedalSet {
    /// Sorts by distance (ties by component) and merges near-coincident points.
    pub fn from_pedals(mut pedals: Vec<Pedal>, g: &MetricTensor) -> Self {
        pedals.sort_by(|a, b| a.distance.total_cmp(&b.distance).then(a.component.cmp(&b.component)));
        let mut kept: Vec<Pedal> = Vec::with_capacity(pedals.len());
        for p in pedals {
            if kept.iter().all(|k| g.distance(&k.point, &p.point) >= tolerances::PEDAL_DEDUP) {
                kept.push(p);
            }
        }
        PedalSet { pedals: kept, degenerate_roots: 0 }
    }

    pub fn pedals(&self) -> &[Pedal] {
        &self.pedals
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Pedal> {
        self.pedals.iter()
    }

    pub fn len(&self) -> usize {
        self.pedals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pedals.is_empty()
    }

    pub fn closest(&self) -> Option<&Pedal> {
        self.pedals.first()
    }

    /// Distance to the closest pedal, i.e. the radius of a ball free of singularities.
    pub fn clearance(&self) -> f64 {
        self.closest().map_or(f64::INFINITY, |p| p.distance)
    }

    /// Multiplier roots skipped because the stationarity system was singular there.
    pub fn degenerate_roots(&self) -> usize {
        self.degenerate_roots
    }
}

/// Closest point on the hyperplane part, in closed form.
pub fn pedal_on_hyperplane(p: &Pose, v: &SigmaVariety, g: &MetricTensor) -> Pedal {
    let (r, j) = (g.r(), g.j());
    let mut u = p.to_array();
    let distance = match v.case {
        DesignCase::OrientationLinear => {
            u[2] += j * u[5] / r;
            let d = u[5].abs() * (1.0 - j * j / r).max(0.0).sqrt();
            u[5] = 0.0;
            d
        }
        DesignCase::PositionLinear => {
            u[5] += j * u[2];
            let d = u[2].abs() * g.gap().sqrt();
            u[2] = 0.0;
            d
        }
    };
    Pedal { point: Pose::new(u), component: Component::Hyperplane, distance }
}

/// Coefficients `(c2, c1, c0)` of the quadratic whose roots are the Lagrange
/// multipliers of the stationarity problem on the quadric part.
///
/// With `f` the quadric value at `p`, `s = alpha² + beta²` and `Δ = R − J²`,
/// the polynomial is `−s·f·λ² + c1·λ − 4Δ·f`.
pub fn multiplier_polynomial(p: &Pose, v: &SigmaVariety, g: &MetricTensor) -> [f64; 3] {
    let u = p.vector();
    let (alpha, beta) = (v.alpha, v.beta);
    let s = alpha * alpha + beta * beta;
    let root_s = s.sqrt();
    let along_o = alpha * u[0] + beta * u[1];
    let along_q = alpha * u[3] + beta * u[4];
    let (a, b) = match v.case {
        DesignCase::OrientationLinear => ([along_o, root_s * u[2]], [along_q - 1.0, root_s * u[5]]),
        DesignCase::PositionLinear => ([along_o - 1.0, root_s * u[2]], [along_q, root_s * u[5]]),
    };
    let aa = a[0] * a[0] + a[1] * a[1];
    let ab = a[0] * b[0] + a[1] * b[1];
    let bb = b[0] * b[0] + b[1] * b[1];
    let c1 = 2.0 * (g.r() * aa + 2.0 * g.j() * ab + bb);
    let f = v.quadric.eval(u);
    [-s * f, c1, -4.0 * g.gap() * f]
}

/// Real roots of `c2·x² + c1·x + c0`, a double root reported once.
fn real_roots(c2: f64, c1: f64, c0: f64) -> Vec<f64> {
    if c2 == 0.0 {
        if c1 == 0.0 {
            return Vec::new();
        }
        return vec![-c0 / c1];
    }
    let disc = c1 * c1 - 4.0 * c2 * c0;
    if disc < 0.0 {
        let re = -c1 / (2.0 * c2);
        let im = (-disc).sqrt() / (2.0 * c2.abs());
        return if im <= tolerances::ROOT_IMAGINARY * re.abs().max(1.0) { vec![re] } else { Vec::new() };
    }
    if disc == 0.0 {
        return vec![-c1 / (2.0 * c2)];
    }
    let q = -0.5 * (c1 + c1.signum() * disc.sqrt());
    if q == 0.0 {
        return vec![0.0];
    }
    let (x1, x2) = (q / c2, c0 / q);
    if x1 == x2 {
        vec![x1]
    } else {
        vec![x1, x2]
    }
}

/// Solution of `(2g + λA)·u = 2g·p − λ·a`, or `None` when the matrix is singular.
pub fn stationary_point(p: &Pose, lambda: f64, v: &SigmaVariety, g: &MetricTensor) -> Option<Vec6> {
    // det(2g + λA) = 4Δ(sλ² − 4Δ)²
    let s = v.alpha * v.alpha + v.beta * v.beta;
    let (sl, four_gap) = (s * lambda * lambda, 4.0 * g.gap());
    if (sl - four_gap).abs() <= 1e-10 * (sl + four_gap) {
        return None;
    }
    let m = g.matrix() * 2.0 + v.quadric.hessian * lambda;
    let rhs = g.apply(p.vector()) * 2.0 - v.quadric.linear * lambda;
    m.lu().solve(&rhs)
}

/// Pedal points on the quadric part, and the number of multiplier roots at
/// which the stationarity system was singular.
pub fn pedals_on_quadric(p: &Pose, v: &SigmaVariety, g: &MetricTensor) -> (Vec<Pedal>, usize) {
    let [c2, c1, c0] = multiplier_polynomial(p, v, g);
    let mut pedals = Vec::with_capacity(2);
    let mut degenerate = 0;
    for lambda in real_roots(c2, c1, c0) {
        if lambda == 0.0 {
            pedals.push(Pedal { point: *p, component: Component::Quadric, distance: 0.0 });
            continue;
        }
        match stationary_point(p, lambda, v, g) {
            Some(u) => {
                let point = Pose::from_vector(u);
                pedals.push(Pedal { point, component: Component::Quadric, distance: g.distance(p, &point) });
            }
            None => degenerate += 1,
        }
    }
    (pedals, degenerate)
}

/// Closest point on the singular 2-plane.
pub fn pedal_on_plane(p: &Pose, v: &SigmaVariety, g: &MetricTensor) -> Pedal {
    let [d1, d2] = v.plane.directions;
    let (gd1, gd2) = (g.apply(&d1), g.apply(&d2));
    let gram = Matrix2::new(d1.dot(&gd1), d1.dot(&gd2), d2.dot(&gd1), d2.dot(&gd2));
    let rel = p.vector() - v.plane.base;
    let rhs = Vector2::new(gd1.dot(&rel), gd2.dot(&rel));
    // the directions are independent, so the Gram matrix is positive definite
    let t = gram.cholesky().map(|c| c.solve(&rhs)).unwrap_or_else(Vector2::zeros);
    let point = Pose::from_vector(v.plane.point(t[0], t[1]));
    Pedal { point, component: Component::Plane, distance: g.distance(p, &point) }
}

/// All pedal points of `p`, closest first.
pub fn orthogonal_projection(p: &Pose, v: &SigmaVariety, g: &MetricTensor) -> PedalSet {
    let (mut pedals, degenerate) = pedals_on_quadric(p, v, g);
    pedals.push(pedal_on_hyperplane(p, v, g));
    pedals.push(pedal_on_plane(p, v, g));
    let mut set = PedalSet::from_pedals(pedals, g);
    set.degenerate_roots = degenerate;
    set
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DesignParams;
    use crate::variety::build_sigma;
    use nalgebra::Vector3;

    fn demo() -> (SigmaVariety, MetricTensor) {
        let base = [(0.0, 0.0), (5.0, 0.0), (0.0, 5.0), (8.0, 3.0), (12.0, 12.0)].map(|(x, y)| Vector3::new(x, y, 0.0));
        let d = DesignParams::orientation_linear([0.0, 0.0, 0.0, 5.0, 9.0], base).unwrap();
        (build_sigma(&d), crate::geometry::metric_tensor(&d).unwrap())
    }

    #[test]
    fn roots() {
        assert_eq!(real_roots(1.0, -3.0, 2.0), vec![2.0, 1.0]);
        assert_eq!(real_roots(1.0, -2.0, 1.0), vec![1.0]);
        assert!(real_roots(1.0, 0.0, 1.0).is_empty());
        assert_eq!(real_roots(0.0, 2.0, -4.0), vec![2.0]);
        // tiny negative discriminant folds into a double root
        let r = real_roots(1.0, -2.0, 1.0 + 1e-25);
        assert_eq!(r.len(), 1);
    }

    #[test]
    fn hyperplane_pedal_closed_form() {
        let (v, g) = demo();
        let p = Pose::new([0.0, 0.6, 0.8, 1.0, 2.0, 1.0]);
        let ped = pedal_on_hyperplane(&p, &v, &g);
        assert!((ped.distance.powi(2) - (1.0 - 7.84 / 21.2)).abs() < 1e-14);
        assert!((g.distance(&p, &ped.point) - ped.distance).abs() < 1e-14);
        let on = Pose::new([0.0, 0.6, 0.8, 1.0, 2.0, 0.0]);
        let ped = pedal_on_hyperplane(&on, &v, &g);
        assert_eq!((ped.point, ped.distance), (on, 0.0));
    }

    #[test]
    fn self_pedal_on_quadric() {
        let (v, g) = demo();
        let o = Vector3::new(-v.beta, v.alpha, 0.0).normalize();
        let p = Pose::from_parts(o, Vector3::new(1.0, 2.0, 3.0));
        let (peds, _) = pedals_on_quadric(&p, &v, &g);
        assert!(peds.iter().any(|q| q.distance < 1e-12));
        let exact = Pose::new([0.0, 1.0, 0.0, 1.0, 2.0, 3.0]);
        let v0 = crate::variety::build_sigma(
            &DesignParams::orientation_linear(
                [0.0, 0.0, 0.0, 1.0, 2.0],
                [(0.0, 0.0), (5.0, 1.0), (0.0, 5.0), (1.0, 3.0), (1.0, -2.0)].map(|(x, y)| Vector3::new(x, y, 0.0)),
            )
            .unwrap(),
        );
        assert_eq!(v0.beta, 0.0);
        let (peds, _) = pedals_on_quadric(&exact, &v0, &g);
        assert!(peds.iter().any(|q| q.distance == 0.0 && q.point == exact));
    }

    #[test]
    fn generic_set_has_four() {
        let (v, g) = demo();
        let p = Pose::new([0.48, 0.6, 0.64, 3.0, 4.0, 6.0]);
        let set = orthogonal_projection(&p, &v, &g);
        assert_eq!(set.len(), 4);
        assert!(set.pedals().windows(2).all(|w| w[0].distance <= w[1].distance));
        for q in set.iter() {
            let (f1, f2) = crate::variety::evaluate_sigma(&v, &q.point);
            match q.component {
                Component::Hyperplane => assert!(f1.abs() < 1e-12),
                Component::Quadric => assert!(f2.abs() < 1e-9),
                Component::Plane => assert!(f1.abs() < 1e-12 && f2.abs() < 1e-9),
            }
        }
    }

    #[test]
    fn plane_member_has_zero_clearance() {
        let (v, g) = demo();
        let p = Pose::from_vector(v.plane.point(0.7, -1.2));
        let set = orthogonal_projection(&p, &v, &g);
        assert!(set.clearance() < 1e-12);
        let ped = pedal_on_plane(&p, &v, &g);
        assert!(ped.distance < 1e-12);
    }
}
