//! P1 Galerkin discretization with homogeneous Dirichlet boundary values.
//!
//! Meshes are structured: a uniform partition of an interval, or a
//! rectangle split into `n × n` cells with two right triangles each. Basis
//! gradients are constant per element, and every element carries an
//! order-2 Gauss rule (two points on a segment, three interior barycentric
//! points on a triangle). The union of those rules is the quadrature grid on
//! which all energies, modulars, and norms are evaluated.

use std::io::{self, Write};
use std::ops::Deref;

use rayon::prelude::*;

use crate::error::{check_len, MpsError, Result};
use crate::exponent_fields::{Domain, ExponentSet, ExprField, Point, WeightSet};
use crate::linalg::SpdMatrix;
use crate::musielak::{luxemburg_norm, PowerSum, QuadratureGrid, SampledPhases};
use crate::operator::{euclid, GradSample, KirchhoffModel};
use crate::numeric::pairwise_sum;

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    domain: Domain,
    cells_per_axis: usize,
    nodes: Vec<Point>,
    nodes_per_element: usize,
    elements: Vec<usize>,
    boundary: Vec<bool>,
}

/// Uniform structured mesh with `n` cells per axis.
pub fn build_mesh(domain: &Domain, n: usize) -> Result<Mesh> {
    if n < 2 {
        return Err(MpsError::Config(format!("mesh needs at least 2 cells per axis, got {n}")));
    }
    domain.validate()?;
    let t = |i: usize| i as f64 / n as f64;
    let mesh = match domain.dim() {
        1 => {
            let nodes = (0..=n).map(|i| domain.from_normalized([t(i), 0.0])).collect();
            let elements = (0..n).flat_map(|i| [i, i + 1]).collect();
            let boundary = (0..=n).map(|i| i == 0 || i == n).collect();
            Mesh { domain: *domain, cells_per_axis: n, nodes, nodes_per_element: 2, elements, boundary }
        }
        _ => {
            let idx = |i: usize, j: usize| j * (n + 1) + i;
            let mut nodes = Vec::with_capacity((n + 1) * (n + 1));
            let mut boundary = Vec::with_capacity((n + 1) * (n + 1));
            for j in 0..=n {
                for i in 0..=n {
                    nodes.push(domain.from_normalized([t(i), t(j)]));
                    boundary.push(i == 0 || i == n || j == 0 || j == n);
                }
            }
            let mut elements = Vec::with_capacity(6 * n * n);
            for j in 0..n {
                for i in 0..n {
                    let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
                    elements.extend_from_slice(&[a, b, c, a, c, d]);
                }
            }
            Mesh { domain: *domain, cells_per_axis: n, nodes, nodes_per_element: 3, elements, boundary }
        }
    };
    Ok(mesh)
}

impl Mesh {
    pub fn domain(&self) -> &Domain {
        &self.domain
    }
    pub fn dim(&self) -> usize {
        self.domain.dim()
    }
    pub fn cells_per_axis(&self) -> usize {
        self.cells_per_axis
    }
    /// Uniform mesh width along x.
    pub fn h(&self) -> f64 {
        let (lo, hi) = self.domain.bounds();
        (hi[0] - lo[0]) / self.cells_per_axis as f64
    }
    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }
    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }
    pub fn n_elements(&self) -> usize {
        self.elements.len() / self.nodes_per_element
    }
    pub fn nodes_per_element(&self) -> usize {
        self.nodes_per_element
    }
    pub fn element(&self, e: usize) -> &[usize] {
        &self.elements[e * self.nodes_per_element..(e + 1) * self.nodes_per_element]
    }
    pub fn is_boundary(&self, node: usize) -> bool {
        self.boundary[node]
    }

    /// Signed measure of element `e` (positive for the orientation used here).
    pub fn element_measure(&self, e: usize) -> f64 {
        let v = self.element(e);
        let p = |k: usize| self.nodes[v[k]];
        match self.dim() {
            1 => p(1)[0] - p(0)[0],
            _ => {
                let (a, b, c) = (p(0), p(1), p(2));
                0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
            }
        }
    }

    /// CSV listing `id,x[,y][,value]`; `values` holds one entry per node.
    pub fn write_nodes_csv<W: Write>(&self, mut w: W, values: Option<&[f64]>) -> io::Result<()> {
        let coords = if self.dim() == 1 { "id,x" } else { "id,x,y" };
        match values {
            Some(_) => writeln!(w, "{coords},value")?,
            None => writeln!(w, "{coords}")?,
        }
        for (id, x) in self.nodes.iter().enumerate() {
            write!(w, "{id},{:e}", x[0])?;
            if self.dim() == 2 {
                write!(w, ",{:e}", x[1])?;
            }
            if let Some(v) = values {
                write!(w, ",{:e}", v[id])?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    /// CSV listing `id,v0,v1[,v2]` of element vertex indices.
    pub fn write_elements_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let header: Vec<String> = (0..self.nodes_per_element).map(|k| format!("v{k}")).collect();
        writeln!(w, "id,{}", header.join(","))?;
        for e in 0..self.n_elements() {
            let vs: Vec<String> = self.element(e).iter().map(|v| v.to_string()).collect();
            writeln!(w, "{e},{}", vs.join(","))?;
        }
        Ok(())
    }
}

/// Coefficients of a P1 function at the interior nodes (boundary values
/// are implicitly zero).
#[derive(Debug, Clone, PartialEq)]
pub struct NodalField(Vec<f64>);

impl NodalField {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(MpsError::Numeric(format!("nodal coefficient {i} is not finite")));
        }
        Ok(NodalField(values))
    }

    pub fn zeros(n: usize) -> Self {
        NodalField(vec![0.0; n])
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for NodalField {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// The P1 trial space on a mesh, with element quadrature.
#[derive(Debug, Clone)]
pub struct FemSpace {
    mesh: Mesh,
    dof_of_node: Vec<Option<usize>>,
    interior: Vec<usize>,
    measures: Vec<f64>,
    /// per element, `nodes_per_element × dim` gradient entries
    basis_grads: Vec<f64>,
    /// basis values at the reference quadrature points, `qp × nodes_per_element`
    ref_basis: Vec<f64>,
    qp_per_element: usize,
    grid: QuadratureGrid,
}

impl FemSpace {
    pub fn new(mesh: Mesh) -> Result<Self> {
        let dim = mesh.dim();
        let npe = mesh.nodes_per_element();
        let mut dof_of_node = vec![None; mesh.n_nodes()];
        let mut interior = Vec::new();
        for (node, slot) in dof_of_node.iter_mut().enumerate() {
            if !mesh.is_boundary(node) {
                *slot = Some(interior.len());
                interior.push(node);
            }
        }

        let (ref_points, ref_basis): (Vec<Vec<f64>>, Vec<f64>) = match dim {
            1 => {
                let g = 0.5 / 3f64.sqrt();
                let xi = [0.5 - g, 0.5 + g];
                (xi.iter().map(|&t| vec![1.0 - t, t]).collect(), xi.iter().flat_map(|&t| [1.0 - t, t]).collect())
            }
            _ => {
                let bary = [[2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0], [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0], [1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0]];
                (bary.iter().map(|b| b.to_vec()).collect(), bary.iter().flatten().copied().collect())
            }
        };
        let qp_per_element = ref_points.len();

        let ne = mesh.n_elements();
        let mut measures = Vec::with_capacity(ne);
        let mut basis_grads = Vec::with_capacity(ne * npe * dim);
        let mut points = Vec::with_capacity(ne * qp_per_element);
        let mut weights = Vec::with_capacity(ne * qp_per_element);
        for e in 0..ne {
            let m = mesh.element_measure(e);
            if !(m > 0.0) {
                return Err(MpsError::Domain(format!("element {e} has non-positive measure {m}")));
            }
            measures.push(m);
            let v = mesh.element(e);
            let p = |k: usize| mesh.nodes()[v[k]];
            match dim {
                1 => basis_grads.extend_from_slice(&[-1.0 / m, 1.0 / m]),
                _ => {
                    let (a, b, c) = (p(0), p(1), p(2));
                    let s = 0.5 / m;
                    basis_grads.extend_from_slice(&[
                        (b[1] - c[1]) * s,
                        (c[0] - b[0]) * s,
                        (c[1] - a[1]) * s,
                        (a[0] - c[0]) * s,
                        (a[1] - b[1]) * s,
                        (b[0] - a[0]) * s,
                    ]);
                }
            }
            for lam in &ref_points {
                let mut x = [0.0; 2];
                for (k, l) in lam.iter().enumerate() {
                    x[0] += l * p(k)[0];
                    x[1] += l * p(k)[1];
                }
                points.push(x);
                weights.push(m / qp_per_element as f64);
            }
        }
        let grid = QuadratureGrid::new(*mesh.domain(), points, weights)?;
        Ok(FemSpace { mesh, dof_of_node, interior, measures, basis_grads, ref_basis, qp_per_element, grid })
    }

    /// Mesh plus space in one step.
    pub fn uniform(domain: &Domain, n: usize) -> Result<Self> {
        Self::new(build_mesh(domain, n)?)
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }
    pub fn domain(&self) -> &Domain {
        self.mesh.domain()
    }
    pub fn dim(&self) -> usize {
        self.mesh.dim()
    }
    pub fn grid(&self) -> &QuadratureGrid {
        &self.grid
    }
    pub fn n_dofs(&self) -> usize {
        self.interior.len()
    }
    pub fn n_elements(&self) -> usize {
        self.mesh.n_elements()
    }
    pub fn interior_nodes(&self) -> &[usize] {
        &self.interior
    }
    pub fn dof_of_node(&self, node: usize) -> Option<usize> {
        self.dof_of_node[node]
    }
    pub fn qp_per_element(&self) -> usize {
        self.qp_per_element
    }
    pub fn element_measure(&self, e: usize) -> f64 {
        self.measures[e]
    }

    /// Gradient of the local basis function `k` on element `e`.
    pub fn basis_grad(&self, e: usize, k: usize) -> &[f64] {
        let dim = self.dim();
        let npe = self.mesh.nodes_per_element();
        let start = (e * npe + k) * dim;
        &self.basis_grads[start..start + dim]
    }

    /// Local basis values at the reference quadrature point `q`.
    pub fn basis_values(&self, q: usize) -> &[f64] {
        let npe = self.mesh.nodes_per_element();
        &self.ref_basis[q * npe..(q + 1) * npe]
    }

    fn check_coeffs(&self, u: &[f64]) -> Result<()> {
        check_len(self.n_dofs(), u.len())
    }

    fn local_coeff(&self, u: &[f64], node: usize) -> f64 {
        self.dof_of_node[node].map_or(0.0, |d| u[d])
    }

    /// Interior-node values of `f` (the nodal interpolant).
    pub fn interpolate(&self, f: impl Fn(Point) -> f64) -> NodalField {
        NodalField(self.interior.iter().map(|&n| f(self.mesh.nodes()[n])).collect())
    }

    /// Nodal values on every mesh node, zero on the boundary.
    pub fn full_nodal(&self, u: &[f64]) -> Vec<f64> {
        (0..self.mesh.n_nodes()).map(|n| self.local_coeff(u, n)).collect()
    }

    /// Constant gradient of `u_h` on every element, `n_elements × dim`.
    pub fn element_gradients(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.check_coeffs(u)?;
        let dim = self.dim();
        let mut out = vec![0.0; self.n_elements() * dim];
        for e in 0..self.n_elements() {
            for (k, &node) in self.mesh.element(e).iter().enumerate() {
                let c = self.local_coeff(u, node);
                if c != 0.0 {
                    for (o, g) in out[e * dim..(e + 1) * dim].iter_mut().zip(self.basis_grad(e, k)) {
                        *o += c * g;
                    }
                }
            }
        }
        Ok(out)
    }

    /// `∇u_h` at every quadrature node.
    pub fn gradient_field(&self, u: &[f64]) -> Result<GradSample> {
        let dim = self.dim();
        let eg = self.element_gradients(u)?;
        let data: Vec<f64> = eg
            .chunks(dim)
            .flat_map(|g| std::iter::repeat_n(g, self.qp_per_element).flatten().copied())
            .collect();
        GradSample::new(dim, data)
    }

    /// `u_h` at every quadrature node.
    pub fn values_at_quadrature(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.check_coeffs(u)?;
        let mut out = Vec::with_capacity(self.grid.len());
        for e in 0..self.n_elements() {
            let nodes = self.mesh.element(e);
            for q in 0..self.qp_per_element {
                let phi = self.basis_values(q);
                out.push(nodes.iter().zip(phi).map(|(&n, b)| self.local_coeff(u, n) * b).sum());
            }
        }
        Ok(out)
    }

    /// `Fᵢ = Σ_q f(x_q, u_h(x_q), ∇u_h(x_q)) φᵢ(x_q) w_q`.
    ///
    /// `state` is required when the source depends on `u` or `∇u`.
    pub fn assemble_load(&self, source: &dyn Source, state: Option<&[f64]>) -> Result<Vec<f64>> {
        let dim = self.dim();
        let zero = vec![0.0; self.n_dofs()];
        let u = match (state, source.is_state_dependent()) {
            (Some(u), _) => u,
            (None, false) => &zero,
            (None, true) => {
                return Err(MpsError::Config("state-dependent source needs a state to assemble".into()))
            }
        };
        let values = self.values_at_quadrature(u)?;
        let grads = self.element_gradients(u)?;
        let domain = self.domain();
        let nq = self.qp_per_element;

        let per_element: Vec<Result<Vec<f64>>> = (0..self.n_elements())
            .into_par_iter()
            .map(|e| {
                let g = &grads[e * dim..(e + 1) * dim];
                let mut local = vec![0.0; self.mesh.nodes_per_element()];
                for q in 0..nq {
                    let iq = e * nq + q;
                    let x = self.grid.points()[iq];
                    let f = source.eval(domain, x, values[iq], g);
                    if !f.is_finite() {
                        return Err(MpsError::Numeric(format!(
                            "source is not finite ({f}) at quadrature point {iq} {x:?}"
                        )));
                    }
                    let w = self.grid.weights()[iq];
                    for (l, b) in local.iter_mut().zip(self.basis_values(q)) {
                        *l += f * b * w;
                    }
                }
                Ok(local)
            })
            .collect();

        let mut out = vec![0.0; self.n_dofs()];
        for (e, local) in per_element.into_iter().enumerate() {
            let local = local?;
            for (&node, v) in self.mesh.element(e).iter().zip(local) {
                if let Some(d) = self.dof_of_node[node] {
                    out[d] += v;
                }
            }
        }
        Ok(out)
    }

    /// Stiffness matrix of the unit-coefficient Laplacian on interior dofs.
    pub fn stiffness_matrix(&self) -> Result<SpdMatrix> {
        let coeffs = vec![(1.0, 0.0); self.n_elements()];
        let grads = vec![0.0; self.n_elements() * self.dim()];
        self.weighted_stiffness(&coeffs, &grads, 1.0)
    }

    /// `Σ_e scale·[a_e ∇φ_j·∇φ_k + b_e (ĝ_e·∇φ_j)(ĝ_e·∇φ_k)]` where
    /// `coeffs[e] = (a_e, b_e)` are already integrated over the element and
    /// `ĝ_e` is the unit direction of `dirs[e]` (ignored when zero).
    pub(crate) fn weighted_stiffness(&self, coeffs: &[(f64, f64)], dirs: &[f64], scale: f64) -> Result<SpdMatrix> {
        let dim = self.dim();
        let npe = self.mesh.nodes_per_element();
        let mut triplets = Vec::with_capacity(self.n_elements() * npe * npe);
        for e in 0..self.n_elements() {
            let (a, b) = coeffs[e];
            let g = &dirs[e * dim..(e + 1) * dim];
            let gn = euclid(g);
            let nodes = self.mesh.element(e);
            for j in 0..npe {
                let Some(dj) = self.dof_of_node[nodes[j]] else { continue };
                let gj = self.basis_grad(e, j);
                for k in 0..npe {
                    let Some(dk) = self.dof_of_node[nodes[k]] else { continue };
                    let gk = self.basis_grad(e, k);
                    let iso: f64 = gj.iter().zip(gk).map(|(x, y)| x * y).sum();
                    let aniso = if gn > 0.0 && b != 0.0 {
                        let pj: f64 = gj.iter().zip(g).map(|(x, y)| x * y).sum::<f64>() / gn;
                        let pk: f64 = gk.iter().zip(g).map(|(x, y)| x * y).sum::<f64>() / gn;
                        b * pj * pk
                    } else {
                        0.0
                    };
                    triplets.push((dj, dk, scale * (a * iso + aniso)));
                }
            }
        }
        SpdMatrix::from_triplets(self.n_dofs(), &triplets)
    }
}

/// A right-hand side `f(x, u, ∇u)` evaluated at quadrature points.
pub trait Source: Sync {
    fn eval(&self, domain: &Domain, x: Point, u: f64, grad: &[f64]) -> f64;

    /// Whether the value depends on `u` or `∇u`.
    fn is_state_dependent(&self) -> bool {
        false
    }
}

impl Source for ExprField {
    fn eval(&self, domain: &Domain, x: Point, _u: f64, _grad: &[f64]) -> f64 {
        self.eval_normalized(domain.normalize(x))
    }
}

/// A closure source. `state_dependent` must be set when the closure reads
/// `u` or `∇u`.
pub struct FnSource<F> {
    f: F,
    state_dependent: bool,
}

impl<F> FnSource<F>
where
    F: Fn(Point, f64, &[f64]) -> f64 + Sync,
{
    /// A source depending only on position.
    pub fn spatial(f: F) -> Self {
        FnSource { f, state_dependent: false }
    }

    pub fn state_dependent(f: F) -> Self {
        FnSource { f, state_dependent: true }
    }
}

impl<F> Source for FnSource<F>
where
    F: Fn(Point, f64, &[f64]) -> f64 + Sync,
{
    fn eval(&self, _domain: &Domain, x: Point, u: f64, grad: &[f64]) -> f64 {
        (self.f)(x, u, grad)
    }

    fn is_state_dependent(&self) -> bool {
        self.state_dependent
    }
}

/// `(ϱ_h, M̂(ϱ_h))` for one coefficient vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyEval {
    pub rho: f64,
    pub kirchhoff_energy: f64,
}

/// Linearization of the assembled gradient used as a descent
/// preconditioner: `M(ϱ)·K(u) + β·g gᵀ` with `g = ∇ϱ_h` and `β = M'(ϱ)`.
pub struct Tangent {
    pub matrix: SpdMatrix,
    /// `(β, g)` of the Kirchhoff rank-one term; `None` when `β = 0`.
    pub rank_one: Option<(f64, Vec<f64>)>,
}

/// Relative floor on gradient magnitudes in the tangent.
const TANGENT_GRAD_FLOOR: f64 = 1e-8;
/// Relative floor on the isotropic tangent coefficient.
const TANGENT_COEFF_FLOOR: f64 = 1e-12;

/// The discrete problem: a trial space with sampled exponents, weights,
/// and the Kirchhoff model.
pub struct Discretization<'a> {
    space: &'a FemSpace,
    phases: SampledPhases,
    model: KirchhoffModel,
}

struct ElementEval {
    energy: f64,
    /// `Σ_q w_q · flux_factor_q(|∇u_e|)`
    flux_weight: f64,
}

impl<'a> Discretization<'a> {
    pub fn new(space: &'a FemSpace, exps: &ExponentSet, weights: &WeightSet, model: KirchhoffModel) -> Self {
        let phases = SampledPhases::sample(exps, weights, space.grid());
        Discretization { space, phases, model }
    }

    pub fn space(&self) -> &FemSpace {
        self.space
    }
    pub fn phases(&self) -> &SampledPhases {
        &self.phases
    }
    pub fn model(&self) -> &KirchhoffModel {
        &self.model
    }

    fn element_evals(&self, grads: &[f64]) -> Vec<ElementEval> {
        let dim = self.space.dim();
        let nq = self.space.qp_per_element();
        let w = self.space.grid().weights();
        (0..self.space.n_elements())
            .into_par_iter()
            .map(|e| {
                let t = euclid(&grads[e * dim..(e + 1) * dim]);
                let mut energy = 0.0;
                let mut flux_weight = 0.0;
                for iq in e * nq..(e + 1) * nq {
                    let ph = self.phases.get(iq);
                    energy += w[iq] * ph.energy_density(t);
                    flux_weight += w[iq] * ph.flux_factor(t);
                }
                ElementEval { energy, flux_weight }
            })
            .collect()
    }

    fn total_energy(evals: &[ElementEval]) -> Result<f64> {
        let terms: Vec<f64> = evals.iter().map(|e| e.energy).collect();
        let rho = pairwise_sum(&terms);
        if rho.is_finite() {
            Ok(rho)
        } else {
            Err(MpsError::Numeric(format!("discrete energy overflowed ({rho})")))
        }
    }

    /// `(ϱ_h(u), M̂(ϱ_h(u)))`
    pub fn energy(&self, u: &[f64]) -> Result<EnergyEval> {
        let grads = self.space.element_gradients(u)?;
        let rho = Self::total_energy(&self.element_evals(&grads))?;
        Ok(EnergyEval { rho, kirchhoff_energy: self.model.antiderivative(rho) })
    }

    /// `∇_U ϱ_h`, i.e. `⟨ϱ'(u_h), φᵢ⟩` for every interior basis function.
    fn modular_gradient(&self, grads: &[f64], evals: &[ElementEval]) -> Vec<f64> {
        let dim = self.space.dim();
        let mesh = self.space.mesh();
        let mut out = vec![0.0; self.space.n_dofs()];
        for (e, ev) in evals.iter().enumerate() {
            if ev.flux_weight == 0.0 {
                continue;
            }
            let g = &grads[e * dim..(e + 1) * dim];
            for (k, &node) in mesh.element(e).iter().enumerate() {
                if let Some(d) = self.space.dof_of_node(node) {
                    let gk: f64 = g.iter().zip(self.space.basis_grad(e, k)).map(|(x, y)| x * y).sum();
                    out[d] += ev.flux_weight * gk;
                }
            }
        }
        out
    }

    /// Energy and the assembled residual `G(U)ᵢ = M(ϱ_h)·⟨ϱ'(u_h), φᵢ⟩`,
    /// which is the exact gradient of `M̂(ϱ_h(U))`.
    pub fn energy_and_gradient(&self, u: &[f64]) -> Result<(EnergyEval, Vec<f64>)> {
        let grads = self.space.element_gradients(u)?;
        let evals = self.element_evals(&grads);
        let rho = Self::total_energy(&evals)?;
        let m = self.model.value(rho);
        let mut g = self.modular_gradient(&grads, &evals);
        for v in &mut g {
            *v *= m;
        }
        if let Some(i) = g.iter().position(|v| !v.is_finite()) {
            return Err(MpsError::Numeric(format!("assembled gradient component {i} is not finite")));
        }
        Ok((EnergyEval { rho, kirchhoff_energy: self.model.antiderivative(rho) }, g))
    }

    pub fn gradient(&self, u: &[f64]) -> Result<Vec<f64>> {
        Ok(self.energy_and_gradient(u)?.1)
    }

    /// `⟨ϱ'(u_h), v_h⟩` (no Kirchhoff factor).
    pub fn pairing(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        self.space.check_coeffs(v)?;
        let grads = self.space.element_gradients(u)?;
        let evals = self.element_evals(&grads);
        Ok(crate::numeric::dot(&self.modular_gradient(&grads, &evals), v))
    }

    /// `ρ_T(∇u_h)`, the multi-phase modular of the gradient magnitude.
    pub fn gradient_modular(&self, u: &[f64]) -> Result<f64> {
        Ok(self.gradient_power_sum(u)?.value())
    }

    fn gradient_power_sum(&self, u: &[f64]) -> Result<PowerSum> {
        let mags = self.space.gradient_field(u)?.magnitudes();
        PowerSum::multiphase(&mags, &self.phases, self.space.grid())
    }

    /// Luxemburg norm of `|∇u_h|` under the multi-phase modular.
    pub fn norm(&self, u: &[f64], tol: f64) -> Result<f64> {
        luxemburg_norm(&self.gradient_power_sum(u)?, tol)
    }

    /// Linearized operator at `u` (see [`Tangent`]).
    pub fn tangent(&self, u: &[f64]) -> Result<Tangent> {
        let dim = self.space.dim();
        let nq = self.space.qp_per_element();
        let w = self.space.grid().weights();
        let grads = self.space.element_gradients(u)?;
        let evals = self.element_evals(&grads);
        let rho = Self::total_energy(&evals)?;

        let mags: Vec<f64> = grads.chunks(dim).map(euclid).collect();
        let t_max = mags.iter().copied().fold(0.0, f64::max);
        let floor = if t_max > 0.0 { TANGENT_GRAD_FLOOR * t_max } else { 1.0 };

        let mut coeffs: Vec<(f64, f64)> = (0..self.space.n_elements())
            .into_par_iter()
            .map(|e| {
                let t = mags[e];
                let te = t.max(floor);
                let (mut a, mut b) = (0.0, 0.0);
                for iq in e * nq..(e + 1) * nq {
                    let ph = self.phases.get(iq);
                    a += w[iq] * ph.flux_factor(te);
                    b += w[iq] * ph.flux_factor_log_slope(te);
                }
                if t < floor {
                    // no reliable direction: isotropic with the parallel eigenvalue
                    (a + b, 0.0)
                } else {
                    (a, b)
                }
            })
            .collect();
        let a_max = coeffs.iter().map(|c| c.0).fold(0.0, f64::max);
        for c in &mut coeffs {
            let lo = TANGENT_COEFF_FLOOR * a_max;
            if c.0 < lo {
                c.0 = lo;
            }
        }
        let m = self.model.value(rho);
        let matrix = self.space.weighted_stiffness(&coeffs, &grads, m)?;
        let beta = self.model.derivative(rho);
        let rank_one = if beta > 0.0 && beta.is_finite() {
            Some((beta, self.modular_gradient(&grads, &evals)))
        } else {
            None
        };
        Ok(Tangent { matrix, rank_one })
    }
}

/// `∇u_h` at every quadrature node of `space`.
pub fn gradient_field(u: &NodalField, space: &FemSpace) -> Result<GradSample> {
    space.gradient_field(u)
}

/// `(ϱ_h, M̂(ϱ_h))`
pub fn assemble_energy(
    u: &NodalField,
    space: &FemSpace,
    exps: &ExponentSet,
    weights: &WeightSet,
    model: &KirchhoffModel,
) -> Result<(f64, f64)> {
    let e = Discretization::new(space, exps, weights, *model).energy(u)?;
    Ok((e.rho, e.kirchhoff_energy))
}

pub fn assemble_gradient(
    u: &NodalField,
    space: &FemSpace,
    exps: &ExponentSet,
    weights: &WeightSet,
    model: &KirchhoffModel,
) -> Result<Vec<f64>> {
    Discretization::new(space, exps, weights, *model).gradient(u)
}

pub fn assemble_load(source: &dyn Source, state: Option<&NodalField>, space: &FemSpace) -> Result<Vec<f64>> {
    space.assemble_load(source, state.map(|s| &s[..]))
}

pub fn discrete_norm(u: &NodalField, space: &FemSpace, exps: &ExponentSet, weights: &WeightSet, tol: f64) -> Result<f64> {
    Discretization::new(space, exps, weights, KirchhoffModel::local()).norm(u, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::musielak::DEFAULT_NORM_TOL;
    use std::f64::consts::PI;

    fn unit() -> Domain {
        Domain::unit_interval()
    }

    fn linear_exps(d: &Domain) -> ExponentSet {
        ExponentSet::constants(2.0, 2.5, 3.0, 3.5, 1.5, d)
    }

    #[test]
    fn mesh_counts() {
        let m = build_mesh(&unit(), 4).unwrap();
        assert_eq!((m.n_nodes(), m.n_elements()), (5, 4));
        let s = FemSpace::new(m.clone()).unwrap();
        assert_eq!(s.n_dofs(), 3);
        for e in 0..4 {
            assert!((m.element_measure(e) - 0.25).abs() < 1e-15);
        }
        let m2 = build_mesh(&Domain::unit_square(), 2).unwrap();
        assert_eq!((m2.n_nodes(), m2.n_elements()), (9, 8));
        assert_eq!(FemSpace::new(m2).unwrap().n_dofs(), 1);
        assert!(matches!(build_mesh(&unit(), 1), Err(MpsError::Config(_))));
    }

    #[test]
    fn mesh_invariants_2d() {
        let d = Domain::rectangle(-1.0, 2.0, 0.0, 0.5).unwrap();
        let s = FemSpace::uniform(&d, 7).unwrap();
        let m = s.mesh();
        let total: f64 = (0..m.n_elements()).map(|e| m.element_measure(e)).sum();
        assert!((total - d.measure()).abs() < 1e-12);
        assert!((s.grid().measure() - d.measure()).abs() < 1e-12);
        for e in 0..m.n_elements() {
            assert!(m.element_measure(e) > 0.0);
            for k in 0..2 {
                let sum: f64 = (0..3).map(|j| s.basis_grad(e, j)[k]).sum();
                assert!(sum.abs() < 1e-12);
            }
        }
        // every node on ∂Ω is flagged
        let (lo, hi) = d.bounds();
        for (i, x) in m.nodes().iter().enumerate() {
            let on = (0..2).any(|k| (x[k] - lo[k]).abs() < 1e-12 || (x[k] - hi[k]).abs() < 1e-12);
            assert_eq!(on, m.is_boundary(i));
        }
    }

    #[test]
    fn gradient_field_examples() {
        let s = FemSpace::uniform(&unit(), 8).unwrap();
        let u = s.interpolate(|x| x[0]);
        let g = gradient_field(&u, &s).unwrap();
        // the boundary value at x = 1 is forced to zero, so only the
        // interior elements carry slope 1
        for e in 0..7 {
            assert!((g.get(2 * e)[0] - 1.0).abs() < 1e-12);
        }
        let z = gradient_field(&NodalField::zeros(s.n_dofs()), &s).unwrap();
        assert!(z.magnitudes().iter().all(|v| *v == 0.0));
        let s2 = FemSpace::uniform(&unit(), 2).unwrap();
        let u = s2.interpolate(|x| x[0] * (1.0 - x[0]));
        let eg = s2.element_gradients(&u).unwrap();
        assert_eq!(eg, vec![0.5, -0.5]);
    }

    /// u = x on [0,1] has nonzero trace at x = 1; these checks use the
    /// per-element slope directly through a quadrature-level gradient.
    #[test]
    fn energy_of_unit_slope() {
        let d = unit();
        let g = crate::musielak::QuadratureGrid::uniform_gauss(d, 4);
        let grad = GradSample::constant(&[1.0], g.len());
        let rho = crate::operator::energy(&grad, &linear_exps(&d), &WeightSet::zero(), &g).unwrap();
        assert!((rho - 0.5).abs() < 1e-15);
        let m = KirchhoffModel::new(1.0, 1.0, 2.0).unwrap();
        assert!((m.antiderivative(rho) - 0.625).abs() < 1e-15);
    }

    #[test]
    fn assemble_energy_examples() {
        let d = unit();
        let s = FemSpace::uniform(&d, 4).unwrap();
        let e = linear_exps(&d);
        let w = WeightSet::zero();
        let zero = NodalField::zeros(s.n_dofs());
        assert_eq!(assemble_energy(&zero, &s, &e, &w, &KirchhoffModel::local()).unwrap(), (0.0, 0.0));
        // tent u = 1 - |2x - 1| has |u'| = 2 everywhere: ϱ = 2, M̂ = 2
        let u = s.interpolate(|x| 1.0 - (2.0 * x[0] - 1.0).abs());
        let (rho, j) = assemble_energy(&u, &s, &e, &w, &KirchhoffModel::local()).unwrap();
        assert!((rho - 2.0).abs() < 1e-14 && (j - 2.0).abs() < 1e-14);
        let (rho, j) = assemble_energy(&u, &s, &e, &w, &KirchhoffModel::new(1.0, 1.0, 2.0).unwrap()).unwrap();
        assert!((rho - 2.0).abs() < 1e-14 && (j - 4.0).abs() < 1e-14);
    }

    #[test]
    fn assemble_gradient_hand_stiffness() {
        // n = 2, p ≡ 2, M ≡ 1: G = K U with K = [2/h] = [4], U = [u(1/2)] = [1/4]
        let d = unit();
        let s = FemSpace::uniform(&d, 2).unwrap();
        let u = s.interpolate(|x| x[0] * (1.0 - x[0]));
        let g = assemble_gradient(&u, &s, &linear_exps(&d), &WeightSet::zero(), &KirchhoffModel::local()).unwrap();
        assert_eq!(g.len(), 1);
        assert!((g[0] - 1.0).abs() < 1e-14, "{g:?}");
        let z = assemble_gradient(&NodalField::zeros(1), &s, &linear_exps(&d), &WeightSet::zero(), &KirchhoffModel::local()).unwrap();
        assert_eq!(z, vec![0.0]);
    }

    #[test]
    fn load_examples() {
        let s = FemSpace::uniform(&unit(), 2).unwrap();
        let l = assemble_load(&ExprField::constant(0.0), None, &s).unwrap();
        assert_eq!(l, vec![0.0]);
        let l = assemble_load(&ExprField::constant(1.0), None, &s).unwrap();
        assert!((l[0] - 0.5).abs() < 1e-15);
        let dep = FnSource::state_dependent(|_, u, _| u);
        assert!(matches!(assemble_load(&dep, None, &s), Err(MpsError::Config(_))));
        let bad = FnSource::spatial(|x: Point, _, _: &[f64]| if x[0] > 0.7 { f64::NAN } else { 1.0 });
        let err = assemble_load(&bad, None, &s).unwrap_err().to_string();
        assert!(err.contains("quadrature point"), "{err}");
    }

    #[test]
    fn load_matches_dense_trapezoid() {
        let n = 64;
        let s = FemSpace::uniform(&unit(), n).unwrap();
        let f = ExprField::sinusoidal(0.0, PI * PI, 0.5, 0);
        let l = assemble_load(&f, None, &s).unwrap();
        let h = 1.0 / n as f64;
        // oracle: 10^6-point trapezoid of f·φᵢ on [0,1]
        let m = 1_000_000usize;
        for (i, li) in l.iter().enumerate().step_by(7) {
            let xi = (i + 1) as f64 * h;
            let hat = |x: f64| (1.0 - (x - xi).abs() / h).max(0.0);
            let g = |x: f64| PI * PI * (PI * x).sin() * hat(x);
            let inner: f64 = (1..m).map(|k| g(k as f64 / m as f64)).sum();
            let oracle = (0.5 * (g(0.0) + g(1.0)) + inner) / m as f64;
            assert!((li - oracle).abs() < 1e-6, "dof {i}: {li} vs {oracle}");
        }
    }

    #[test]
    fn discrete_norm_examples() {
        let d = unit();
        let s = FemSpace::uniform(&d, 4).unwrap();
        let e = linear_exps(&d);
        let w = WeightSet::zero();
        assert_eq!(discrete_norm(&NodalField::zeros(3), &s, &e, &w, DEFAULT_NORM_TOL).unwrap(), 0.0);
        // tent with |u'| = 2: ‖∇u‖₂ = 2; doubled tent: 4
        let u = s.interpolate(|x| 1.0 - (2.0 * x[0] - 1.0).abs());
        assert!((discrete_norm(&u, &s, &e, &w, DEFAULT_NORM_TOL).unwrap() - 2.0).abs() < 1e-12);
        let u2 = s.interpolate(|x| 2.0 - 2.0 * (2.0 * x[0] - 1.0).abs());
        assert!((discrete_norm(&u2, &s, &e, &w, DEFAULT_NORM_TOL).unwrap() - 4.0).abs() < 4e-12);
    }

    #[test]
    fn csv_export() {
        let s = FemSpace::uniform(&Domain::unit_square(), 2).unwrap();
        let vals = s.full_nodal(&[1.5]);
        let mut buf = Vec::new();
        s.mesh().write_nodes_csv(&mut buf, Some(&vals)).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("id,x,y,value\n0,0e0,0e0,0e0\n"));
        assert!(text.contains("\n4,5e-1,5e-1,1.5e0\n"));
        let mut buf = Vec::new();
        s.mesh().write_elements_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 9);
        assert!(text.starts_with("id,v0,v1,v2\n0,0,1,4\n"));
    }
}
