//! Independent oracles shared by the integration tests. Nothing here calls
//! into the library's numerics; designs and poses are only converted.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector, Matrix6, Vector3};
use pentapath::{DesignCase, DesignParams, Pose};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rand = ChaCha8Rng;

pub fn rng(seed: u64) -> Rand {
    ChaCha8Rng::seed_from_u64(seed)
}

fn signed(rng: &mut Rand, lo: f64, hi: f64) -> f64 {
    let m = rng.random_range(lo..hi);
    if rng.random::<bool>() {
        m
    } else {
        -m
    }
}

pub fn unit_vector(rng: &mut Rand) -> Vector3<f64> {
    loop {
        let v = Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v / n;
        }
    }
}

pub fn random_pose(rng: &mut Rand, spread: f64) -> Pose {
    let q = Vector3::new(
        rng.random_range(-spread..spread),
        rng.random_range(-spread..spread),
        rng.random_range(-spread..spread),
    );
    Pose::from_parts(unit_vector(rng), q)
}

/// Orientation-linear design: legs 4 and 5 carry the offsets, their base
/// anchors on the line `alpha*x + beta*y = 1`.
pub fn random_lo(rng: &mut Rand) -> DesignParams {
    let alpha = signed(rng, 0.2, 1.5);
    let beta = rng.random_range(-1.5..1.5);
    let s = alpha * alpha + beta * beta;
    let foot = Vector3::new(alpha / s, beta / s, 0.0);
    let along = Vector3::new(-beta, alpha, 0.0) / s.sqrt();
    let t4 = rng.random_range(-10.0..10.0);
    let t5 = t4 + signed(rng, 1.0, 10.0);
    let mut free = || Vector3::new(rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0), 0.0);
    let base = [Vector3::zeros(), free(), free(), foot + along * t4, foot + along * t5];
    let offsets = [0.0, 0.0, 0.0, signed(rng, 1.0, 10.0), signed(rng, 1.0, 10.0)];
    DesignParams::new(DesignCase::OrientationLinear, alpha, beta, offsets, base).expect("valid random LO design")
}

pub fn random_lp(rng: &mut Rand) -> DesignParams {
    let alpha = signed(rng, 0.2, 1.5);
    let beta = rng.random_range(-1.5..1.5);
    let mut base = [Vector3::zeros(); 5];
    for b in base.iter_mut().skip(1) {
        *b = Vector3::new(rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0), 0.0);
    }
    DesignParams::position_linear(alpha, beta, base).expect("valid random LP design")
}

pub fn random_design(rng: &mut Rand, case: DesignCase) -> DesignParams {
    match case {
        DesignCase::OrientationLinear => random_lo(rng),
        DesignCase::PositionLinear => random_lp(rng),
    }
}

/// Hyperplane and quadric polynomials written out by hand.
pub fn sigma_values(d: &DesignParams, u: &[f64; 6]) -> (f64, f64) {
    let (a, b) = (d.alpha(), d.beta());
    let along_o = a * u[0] + b * u[1];
    let along_q = a * u[3] + b * u[4];
    match d.case() {
        DesignCase::OrientationLinear => (u[5], u[5] * along_o - u[2] * (along_q - 1.0)),
        DesignCase::PositionLinear => (u[2], u[5] * (along_o - 1.0) - u[2] * along_q),
    }
}

/// Dense 6×6 metric built from the leg offsets.
pub fn dense_metric(d: &DesignParams) -> Matrix6<f64> {
    let r = d.offsets();
    let second = r.iter().map(|x| x * x).sum::<f64>() / 5.0;
    let first = r.iter().sum::<f64>() / 5.0;
    let mut g = Matrix6::zeros();
    for k in 0..3 {
        g[(k, k)] = second;
        g[(k + 3, k + 3)] = 1.0;
        g[(k, k + 3)] = first;
        g[(k + 3, k)] = first;
    }
    g
}

pub fn dense_distance(g: &Matrix6<f64>, a: &[f64; 6], b: &[f64; 6]) -> f64 {
    let d = nalgebra::Vector6::from_iterator(a.iter().zip(b).map(|(x, y)| x - y));
    (d.transpose() * g * d)[0].max(0.0).sqrt()
}

/// Root mean square displacement of the five platform anchors.
pub fn anchor_distance(d: &DesignParams, a: &Pose, b: &Pose) -> f64 {
    let sum: f64 = d
        .offsets()
        .iter()
        .map(|r| {
            let ma = a.position() + a.orientation() * *r;
            let mb = b.position() + b.orientation() * *r;
            (ma - mb).norm_squared()
        })
        .sum();
    (sum / 5.0).sqrt()
}

/// Minimizer of the metric distance to `{u : normal·u = offset}` from the
/// full KKT system.
pub fn hyperplane_kkt(g: &Matrix6<f64>, p: &[f64; 6], normal: &[f64; 6], offset: f64) -> ([f64; 6], f64) {
    let mut m = DMatrix::zeros(7, 7);
    let mut rhs = DVector::zeros(7);
    for i in 0..6 {
        for j in 0..6 {
            m[(i, j)] = 2.0 * g[(i, j)];
            rhs[i] += 2.0 * g[(i, j)] * p[j];
        }
        m[(i, 6)] = normal[i];
        m[(6, i)] = normal[i];
    }
    rhs[6] = offset;
    let sol = m.lu().solve(&rhs).expect("KKT system is regular");
    let u: [f64; 6] = std::array::from_fn(|i| sol[i]);
    (u, dense_distance(g, p, &u))
}

/// Variables in which the quadric is affine, each giving a graph chart.
pub const CHART_VARIABLES: [usize; 4] = [5, 2, 3, 0];

/// Lifts chart coordinates to a point of the quadric, solving the quadric
/// for the eliminated variable. `None` off the chart's domain.
pub fn chart_lift(d: &DesignParams, k: usize, x: &[f64; 5]) -> Option<[f64; 6]> {
    let mut u = [0.0; 6];
    let mut it = x.iter();
    for (i, slot) in u.iter_mut().enumerate() {
        if i != k {
            *slot = *it.next().unwrap();
        }
    }
    u[k] = 0.0;
    let rest = sigma_values(d, &u).1;
    u[k] = 1.0;
    let slope = sigma_values(d, &u).1 - rest;
    if slope.abs() < 1e-12 {
        return None;
    }
    u[k] = -rest / slope;
    Some(u)
}

fn chart_coords(k: usize, u: &[f64; 6]) -> [f64; 5] {
    let mut x = [0.0; 5];
    let mut j = 0;
    for (i, v) in u.iter().enumerate() {
        if i != k {
            x[j] = *v;
            j += 1;
        }
    }
    x
}

/// Levenberg–Marquardt on the squared metric distance from `p` to the image
/// of `lift`. Returns the distance reached.
pub fn descend(
    lift: impl Fn(&[f64; 5]) -> Option<[f64; 6]>,
    chol_t: &Matrix6<f64>,
    p: &[f64; 6],
    start: [f64; 5],
) -> Option<f64> {
    let residual = |x: &[f64; 5]| -> Option<nalgebra::Vector6<f64>> {
        let u = lift(x)?;
        let diff = nalgebra::Vector6::from_iterator(u.iter().zip(p).map(|(a, b)| a - b));
        Some(chol_t * diff)
    };
    let mut x = start;
    let mut r = residual(&x)?;
    let mut mu = 1e-3;
    for _ in 0..400 {
        let mut jac = nalgebra::Matrix6x5::zeros();
        for c in 0..5 {
            let h = 1e-6 * (1.0 + x[c].abs());
            let (mut xp, mut xm) = (x, x);
            xp[c] += h;
            xm[c] -= h;
            let (rp, rm) = (residual(&xp)?, residual(&xm)?);
            jac.set_column(c, &((rp - rm) / (2.0 * h)));
        }
        let jtj = jac.transpose() * jac;
        let jtr = jac.transpose() * r;
        let mut accepted = false;
        for _ in 0..30 {
            let mut a = jtj;
            for i in 0..5 {
                a[(i, i)] += mu * (1.0 + jtj[(i, i)]);
            }
            let Some(step) = a.lu().solve(&(-jtr)) else {
                mu *= 10.0;
                continue;
            };
            let trial: [f64; 5] = std::array::from_fn(|i| x[i] + step[i]);
            match residual(&trial) {
                Some(rt) if rt.norm_squared() < r.norm_squared() => {
                    let small = step.norm() <= 1e-15 * (1.0 + x.iter().map(|v| v.abs()).fold(0.0, f64::max));
                    x = trial;
                    r = rt;
                    mu = (mu / 3.0).max(1e-15);
                    accepted = true;
                    if small {
                        return Some(r.norm());
                    }
                    break;
                }
                _ => mu *= 10.0,
            }
        }
        if !accepted {
            break;
        }
    }
    Some(r.norm())
}

/// Closest metric distance from `p` to the quadric found by multi-start local
/// search over the four graph charts.
pub fn chart_closest(d: &DesignParams, p: &Pose, rng: &mut Rand) -> f64 {
    let chol_t = chol_t(&dense_metric(d));
    let u = p.to_array();
    let scale = 1.0 + u.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let mut best = f64::INFINITY;
    for k in CHART_VARIABLES {
        let home = chart_coords(k, &u);
        let mut starts = vec![home];
        for spread in [0.1, 0.5, 2.0] {
            for _ in 0..2 {
                starts.push(std::array::from_fn(|i| home[i] + spread * scale * rng.random_range(-1.0..1.0)));
            }
        }
        for s in starts {
            if let Some(v) = descend(|x| chart_lift(d, k, x), &chol_t, &u, s) {
                best = best.min(v);
            }
        }
    }
    best
}

pub fn chol_t(g: &Matrix6<f64>) -> Matrix6<f64> {
    g.cholesky().expect("metric is positive definite").l().transpose()
}

/// Multi-start local search over one parametrized family, starting around
/// `home`.
pub fn param_closest(
    d: &DesignParams,
    p: &Pose,
    lift: impl Fn(&[f64; 5]) -> Option<[f64; 6]>,
    home: [f64; 5],
    rng: &mut Rand,
) -> f64 {
    let ct = chol_t(&dense_metric(d));
    let u = p.to_array();
    let mut best = f64::INFINITY;
    let mut starts = vec![home];
    for spread in [0.05, 0.3, 1.0] {
        for _ in 0..3 {
            starts.push(std::array::from_fn(|i| home[i] + spread * rng.random_range(-1.0..1.0)));
        }
    }
    for s in starts {
        if let Some(v) = descend(&lift, &ct, &u, s) {
            best = best.min(v);
        }
    }
    best
}

fn anchor_rel(d: &DesignParams, leg: usize, p: &Pose) -> Vector3<f64> {
    p.position() + p.orientation() * d.offsets()[leg - 1] - d.base()[leg - 1]
}

/// Poses whose leg has length `rho`: orientation plus spherical angles of the
/// anchor around its base joint. Returns the map and the coordinates of `p`'s
/// radial projection.
pub fn leg_sphere(d: &DesignParams, leg: usize, rho: f64, p: &Pose) -> (impl Fn(&[f64; 5]) -> Option<[f64; 6]>, [f64; 5]) {
    let r = d.offsets()[leg - 1];
    let b = d.base()[leg - 1];
    let lift = move |x: &[f64; 5]| {
        let (st, ct) = x[3].sin_cos();
        let (sp, cp) = x[4].sin_cos();
        let m = b + Vector3::new(st * cp, st * sp, ct) * rho;
        Some([x[0], x[1], x[2], m.x - r * x[0], m.y - r * x[1], m.z - r * x[2]])
    };
    let rel = anchor_rel(d, leg, p);
    let o = p.orientation();
    (lift, [o.x, o.y, o.z, (rel.z / rel.norm()).acos(), rel.y.atan2(rel.x)])
}

/// Poses whose anchor lies on the upper cone of apex angle `theta` at the
/// base joint: orientation, distance from the apex and azimuth.
pub fn upper_cone(d: &DesignParams, leg: usize, theta: f64, p: &Pose) -> (impl Fn(&[f64; 5]) -> Option<[f64; 6]>, [f64; 5]) {
    let r = d.offsets()[leg - 1];
    let b = d.base()[leg - 1];
    let (s, c) = (theta / 2.0).sin_cos();
    let lift = move |x: &[f64; 5]| {
        let (sp, cp) = x[4].sin_cos();
        let m = b + Vector3::new(s * cp, s * sp, c) * x[3];
        Some([x[0], x[1], x[2], m.x - r * x[0], m.y - r * x[1], m.z - r * x[2]])
    };
    let rel = anchor_rel(d, leg, p);
    let o = p.orientation();
    (lift, [o.x, o.y, o.z, rel.norm(), rel.y.atan2(rel.x)])
}

/// Point of the singular 2-plane, parametrized by hand.
pub fn plane_point(d: &DesignParams, v1: f64, v2: f64) -> [f64; 6] {
    let (a, b) = (d.alpha(), d.beta());
    match d.case() {
        DesignCase::OrientationLinear => [-b * v1 / a, v1, 0.0, (1.0 - b * v2) / a, v2, 0.0],
        DesignCase::PositionLinear => [(1.0 - b * v1) / a, v1, 0.0, -b * v2 / a, v2, 0.0],
    }
}

/// Closest distance to the singular 2-plane by a shrinking grid search.
pub fn plane_grid(d: &DesignParams, p: &Pose) -> f64 {
    let g = dense_metric(d);
    let u = p.to_array();
    let f = |v1: f64, v2: f64| dense_distance(&g, &u, &plane_point(d, v1, v2));
    let (mut c1, mut c2) = (u[1], u[4]);
    let mut half = 50.0 * (1.0 + u.iter().map(|v| v.abs()).fold(0.0, f64::max));
    let mut best = f(c1, c2);
    for _ in 0..60 {
        let (mut b1, mut b2) = (c1, c2);
        for i in -20..=20 {
            for j in -20..=20 {
                let (v1, v2) = (c1 + half * i as f64 / 20.0, c2 + half * j as f64 / 20.0);
                let val = f(v1, v2);
                if val < best {
                    best = val;
                    (b1, b2) = (v1, v2);
                }
            }
        }
        (c1, c2) = (b1, b2);
        half /= 4.0;
    }
    best
}

/// Stationary pose of the Lagrangian at multiplier `lambda`, by a dense solve.
pub fn dense_stationary(d: &DesignParams, p: &Pose, lambda: f64) -> Option<[f64; 6]> {
    let g = dense_metric(d);
    let (hess, lin) = quadric_parts(d);
    let m = g * 2.0 + hess * lambda;
    let rhs = g * p.vector() * 2.0 - lin * lambda;
    let sol = m.lu().solve(&rhs)?;
    Some(std::array::from_fn(|i| sol[i]))
}

/// Hessian and linear part of the quadric, recovered numerically from the
/// hand-written polynomial.
pub fn quadric_parts(d: &DesignParams) -> (Matrix6<f64>, nalgebra::Vector6<f64>) {
    let f = |u: [f64; 6]| sigma_values(d, &u).1;
    let e = |i: usize| {
        let mut u = [0.0; 6];
        u[i] = 1.0;
        u
    };
    let mut lin = nalgebra::Vector6::zeros();
    let mut hess = Matrix6::zeros();
    for i in 0..6 {
        let (p, m) = (f(e(i)), f(e(i).map(|x| -x)));
        lin[i] = (p - m) / 2.0;
        hess[(i, i)] = p + m;
    }
    for i in 0..6 {
        for j in 0..6 {
            if i != j {
                let mut u = e(i);
                u[j] = 1.0;
                hess[(i, j)] = f(u) - lin[i] - lin[j] - 0.5 * (hess[(i, i)] + hess[(j, j)]);
            }
        }
    }
    (hess, lin)
}

/// Coefficients, lowest degree first, of the polynomial through the values
/// of `quadric(u(λ)) · det(2g + λA)` at `samples`, in the variable `λ/scale`.
pub fn eliminant_fit(d: &DesignParams, p: &Pose, scale: f64, samples: &[f64]) -> Vec<f64> {
    let g = dense_metric(d);
    let (hess, _) = quadric_parts(d);
    let n = samples.len();
    let mut vander = DMatrix::zeros(n, n);
    let mut vals = DVector::zeros(n);
    for (row, &t) in samples.iter().enumerate() {
        let lambda = t * scale;
        let u = dense_stationary(d, p, lambda).expect("sample away from poles");
        vals[row] = sigma_values(d, &u).1 * (g * 2.0 + hess * lambda).determinant();
        for c in 0..n {
            vander[(row, c)] = t.powi(c as i32);
        }
    }
    let coeffs = vander.lu().solve(&vals).expect("distinct samples");
    coeffs.iter().copied().collect()
}

/// Central-difference gradient.
pub fn fd_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let (mut xp, mut xm) = (x.to_vec(), x.to_vec());
            let step = h * (1.0 + x[i].abs());
            xp[i] += step;
            xm[i] -= step;
            (f(&xp) - f(&xm)) / (2.0 * step)
        })
        .collect()
}

/// Relative difference with an absolute floor of 1.
pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}
