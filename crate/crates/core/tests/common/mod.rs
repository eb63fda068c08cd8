#![allow(dead_code)]

use std::sync::Arc;

use shapeopt::fem::Lame;
use shapeopt::mesh::{BoundaryTag, BoxRegion, RectMesh, Region};
use shapeopt::models::{
    default_initial_guess, radial_bump, Compliance, Heat, HeatCase, InverseElasticity, InverseParams, Load, Logistic, MeasurementPair,
    VectorData, VectorSample,
};
use shapeopt::velocity::BilinearSpec;

pub const LAME: Lame<f64> = Lame { lambda: 1.25, mu: 1.0 };

pub fn strip(x: [f64; 2], y: [f64; 2]) -> Region {
    Region::single(BoxRegion::new(x, y))
}

pub fn cantilever_mesh(nx: usize, ny: usize) -> Arc<RectMesh<f64>> {
    Arc::new(RectMesh::build([0.0, 0.0, 2.0, 1.0], nx, ny).unwrap().tag_boundary(&[
        BoundaryTag::from_region(1, Region::single(BoxRegion { x: Some([0.0, 0.0]), y: None })),
        BoundaryTag::from_region(2, strip([2.0, 2.0], [0.45, 0.55])),
    ]))
}

pub fn compliance(nx: usize, ny: usize) -> Compliance<f64> {
    let loads = [Load { traction: [0.0, -2.0], tag: 2 }];
    Compliance::new(cantilever_mesh(nx, ny), &[1], &loads, 1.0, LAME, BilinearSpec::default()).unwrap()
}

pub fn unit_square(n: usize) -> Arc<RectMesh<f64>> {
    Arc::new(RectMesh::build([0.0, 0.0, 1.0, 1.0], n, n).unwrap())
}

pub fn heat(n: usize) -> Heat<f64> {
    let case = HeatCase { source: radial_bump([0.5, 0.5]), sink_tags: vec![0], weight: 1.0 };
    let b = BilinearSpec { boundary_normal_penalty: 1e4, zero_dirichlet: false, ..Default::default() };
    Heat::new(unit_square(n), vec![case], 0.5, b).unwrap()
}

pub fn logistic(n: usize) -> Logistic<f64> {
    let b = BilinearSpec { boundary_normal_penalty: 1e4, zero_dirichlet: false, ..Default::default() };
    Logistic::new(unit_square(n), 10.0, 0.5, default_initial_guess(), b).unwrap()
}

pub fn inverse_mesh(nx: usize, ny: usize) -> Arc<RectMesh<f64>> {
    Arc::new(RectMesh::build([0.0, 0.0, 2.0, 1.0], nx, ny).unwrap().tag_boundary(&[
        BoundaryTag::from_region(1, Region::single(BoxRegion { x: None, y: Some([0.0, 0.0]) })),
        BoundaryTag::from_region(2, strip([0.0, 0.0], [0.25, 0.75])),
        BoundaryTag::from_region(3, strip([0.75, 1.25], [1.0, 1.0])),
        BoundaryTag::from_region(4, strip([2.0, 2.0], [0.25, 0.75])),
        BoundaryTag::from_region(5, Region::single(BoxRegion { x: None, y: None })),
    ]))
}

pub const INVERSE_FORCES: [([f64; 2], u32); 3] = [([1.0, 0.0], 2), ([0.0, -1.0], 3), ([-1.0, 0.0], 4)];
pub const INVERSE_MEASURED: [u32; 4] = [2, 3, 4, 5];

pub fn inverse_params() -> InverseParams {
    InverseParams { alpha: 1.0, beta: 1.0, kappa: 10.0, lame: LAME }
}

pub fn inverse_bilinear() -> BilinearSpec {
    BilinearSpec { mass_weight: 0.1, ..Default::default() }
}

/// `g = (a sin x cos y, b x y)` with its strain gradients.
pub fn analytic_g(a: f64, b: f64) -> VectorData<f64> {
    VectorData::Analytic(Arc::new(move |p: [f64; 2]| {
        let (x, y) = (p[0], p[1]);
        let exy_grad = [-0.5 * a * x.cos() * y.sin(), 0.5 * (-a * x.sin() * y.cos() + b)];
        VectorSample {
            value: [a * x.sin() * y.cos(), b * x * y],
            jacobian: [[a * x.cos() * y.cos(), -a * x.sin() * y.sin()], [b * y, b * x]],
            strain_grad: [[[-a * x.sin() * y.cos(), -a * x.cos() * y.sin()], exy_grad], [exy_grad, [b, 0.0]]],
        }
    }))
}

pub fn inverse_analytic(nx: usize, ny: usize) -> InverseElasticity<f64> {
    let pairs = INVERSE_FORCES
        .iter()
        .enumerate()
        .map(|(k, &(traction, tag))| MeasurementPair { traction, tag, g: analytic_g(0.05 * (k + 1) as f64, 0.03) })
        .collect();
    InverseElasticity::new(inverse_mesh(nx, ny), &[1], &INVERSE_MEASURED, pairs, inverse_params(), inverse_bilinear()).unwrap()
}

pub fn disk(c: [f64; 2], r: f64) -> impl Fn([f64; 2]) -> f64 {
    move |p| ((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2)).sqrt() - r
}
