//! Filtering normal form of a positive two-qubit operator.
//!
//! Every positive W on C²⊗C² can be written either as
//! `W = (1/N)(A⊗B)[Σ pᵢ|eᵢ⟩⟨eᵢ|](A⊗B)†` with det A = det B = 1 and the Bell
//! weights sorted p₀ ≥ p₁ ≥ p₂ ≥ p₃, or (a measure-zero class) as
//! `(1/N)(A⊗B)σ_c(A⊗B)†`.
//!
//! The filters are found by alternately whitening the two marginals. Once both
//! marginals are I/2, the 3×3 Pauli correlation block T is brought to signed
//! diagonal form by a pair of proper rotations, which lift to local unitaries,
//! and a final signed permutation of the Bell basis sorts the weights.

use num_complex::Complex;
use num_traits::One;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig_with, inner, norm, tilde_local, BipartiteOperator, ComplexMatrix};
use crate::scalar::{c, Real, C};
use crate::states::{bell_basis, sigma_c};
use crate::tolerances::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormalFormClass<T> {
    BellDiagonal,
    /// Filter iteration stalled; parameters read off the filtered matrix.
    SigmaC { a: T, b: T, c: T, d: T },
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalForm<T> {
    /// Local filter on A, det A = 1.
    pub a: ComplexMatrix<T>,
    /// Local filter on B, det B = 1.
    pub b: ComplexMatrix<T>,
    /// Bell weights in the frozen basis order, non-increasing. Zero for the σ_c class.
    pub p: [T; 4],
    /// Normalization N.
    pub n: T,
    pub class: NormalFormClass<T>,
    /// ‖input − reconstruction‖_max.
    pub residual: T,
    /// Filter iterations performed.
    pub iterations: usize,
}

impl<T: Real> NormalForm<T> {
    pub fn is_bell_diagonal(&self) -> bool {
        matches!(self.class, NormalFormClass::BellDiagonal)
    }

    /// A ⊗ B.
    pub fn filter(&self) -> ComplexMatrix<T> {
        self.a.kron(&self.b)
    }

    /// The inner operator: Σ pᵢ|eᵢ⟩⟨eᵢ| or σ_c.
    pub fn core(&self) -> BipartiteOperator<T> {
        match self.class {
            NormalFormClass::BellDiagonal => crate::states::bell_mixture(self.p),
            NormalFormClass::SigmaC { a, b, c, d } => sigma_c(a, b, c, d),
        }
    }

    /// (1/N)(A⊗B)·core·(A⊗B)†.
    pub fn reconstruct(&self) -> BipartiteOperator<T> {
        self.core().congruence(&self.filter()).scale(T::one() / self.n)
    }
}

/// Brings a positive two-qubit operator to filtering normal form.
pub fn filter_normal_form<T: Real>(w: &BipartiteOperator<T>) -> Result<NormalForm<T>> {
    filter_normal_form_with(w, &T::tolerances())
}

pub fn filter_normal_form_with<T: Real>(w: &BipartiteOperator<T>, tol: &Tolerances) -> Result<NormalForm<T>> {
    if w.dims() != (2, 2) {
        return Err(Error::Shape("normal form is defined for two qubits".into()));
    }
    let trace = w.trace();
    if !(trace > T::zero()) {
        return Err(Error::NotNormalizable { trace: trace.as_f64() });
    }
    let min = w.eig_with(tol)?.min();
    if min < -T::lit(tol.psd) * trace {
        return Err(Error::NotPsd { min_eigenvalue: (min / trace).as_f64() });
    }

    let filtered = whiten(w, tol)?;
    match filtered.outcome {
        Outcome::Converged => bell_diagonalize(w, filtered, tol),
        Outcome::Stalled => {
            // Stalled iterates may still admit a Bell-diagonal fit.
            let bound = T::lit(tol.reconstruction) * trace;
            match bell_diagonalize(w, filtered.clone(), tol) {
                Ok(nf) if nf.residual <= bound => Ok(nf),
                _ => fit_sigma_c(w, filtered),
            }
        }
    }
}

#[derive(Clone, Copy)]
enum Outcome {
    Converged,
    Stalled,
}

/// W = scale · (F⊗G) current (F⊗G)†, with `current` of unit trace.
#[derive(Clone)]
struct Filtered<T> {
    current: BipartiteOperator<T>,
    f: ComplexMatrix<T>,
    g: ComplexMatrix<T>,
    scale: T,
    iterations: usize,
    outcome: Outcome,
}

fn marginal_deviation<T: Real>(op: &BipartiteOperator<T>) -> (T, T) {
    let half = ComplexMatrix::identity(2).scale(T::lit(0.5));
    let ra = op.reduced_a();
    let rb = op.reduced_b();
    let dev = ra.max_diff(&half) + rb.max_diff(&half);
    let purity = ra.hs_inner(&ra) + rb.hs_inner(&rb);
    (dev, purity)
}

/// Hermitian square root and inverse square root of a positive-definite 2×2 matrix.
fn sqrt_pair<T: Real>(m: &ComplexMatrix<T>, tol: &Tolerances) -> Option<(ComplexMatrix<T>, ComplexMatrix<T>)> {
    let es = hermitian_eig_with(m, tol).ok()?;
    if !(es.min() > T::epsilon() * es.max()) {
        return None;
    }
    Some((es.apply(|x| x.sqrt()), es.apply(|x| T::one() / x.sqrt())))
}

fn whiten<T: Real>(w: &BipartiteOperator<T>, tol: &Tolerances) -> Result<Filtered<T>> {
    let i2 = ComplexMatrix::<T>::identity(2);
    let trace = w.trace();
    let mut current = w.scale(T::one() / trace);
    let mut scale = trace;
    let mut f = i2.clone();
    let mut g = i2.clone();
    let window = tol.filter_stall_window;
    let mut history: Vec<(T, T)> = Vec::new();

    for it in 0..tol.filter_max_iterations {
        let (dev, purity) = marginal_deviation(&current);
        if dev < T::lit(tol.filter_marginal) {
            return Ok(Filtered { current, f, g, scale, iterations: it, outcome: Outcome::Converged });
        }
        history.push((dev, purity));
        if it >= window && it % window == 0 {
            let (dev_then, purity_then) = history[it - window];
            let purity_stalled = purity_then - purity < T::lit(tol.filter_stall_purity);
            let slow = dev > dev_then * T::lit(tol.filter_stall_ratio);
            if slow && (purity_stalled || it >= tol.filter_stall_min_iterations) {
                return Ok(Filtered { current, f, g, scale, iterations: it, outcome: Outcome::Stalled });
            }
        }

        // A side
        let (root, inv_root) = match sqrt_pair(&current.reduced_a(), tol) {
            Some(pair) => pair,
            None => return Ok(Filtered { current, f, g, scale, iterations: it, outcome: Outcome::Stalled }),
        };
        let next = current.congruence(&inv_root.kron(&i2));
        let t = next.trace();
        current = next.scale(T::one() / t);
        let (next_f, det) = sqrt_det_normalize(&(&f * &root));
        f = next_f;
        scale = scale * t * det;

        // B side
        let (root, inv_root) = match sqrt_pair(&current.reduced_b(), tol) {
            Some(pair) => pair,
            None => return Ok(Filtered { current, f, g, scale, iterations: it, outcome: Outcome::Stalled }),
        };
        let next = current.congruence(&i2.kron(&inv_root));
        let t = next.trace();
        current = next.scale(T::one() / t);
        let (next_g, det) = sqrt_det_normalize(&(&g * &root));
        g = next_g;
        scale = scale * t * det;
    }
    Err(Error::NonConvergent { iterations: tol.filter_max_iterations })
}

type Mat3<T> = [[T; 3]; 3];

/// T_ij = Tr[ρ (σᵢ⊗σⱼ)] for i, j ∈ {x, y, z}.
pub fn correlation_matrix<T: Real>(rho: &BipartiteOperator<T>) -> [[T; 3]; 3] {
    let p = crate::linalg::paulis::<T>();
    let mut out = [[T::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let s = p[i].kron(&p[j]);
            out[i][j] = rho.matrix().hs_inner(&s);
        }
    }
    out
}

fn det3<T: Real>(m: &Mat3<T>) -> T {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn col<T: Real>(m: &Mat3<T>, j: usize) -> [T; 3] {
    [m[0][j], m[1][j], m[2][j]]
}

fn set_col<T: Real>(m: &mut Mat3<T>, j: usize, v: [T; 3]) {
    for i in 0..3 {
        m[i][j] = v[i];
    }
}

fn dot3<T: Real>(a: [T; 3], b: [T; 3]) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross<T: Real>(a: [T; 3], b: [T; 3]) -> [T; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn unit<T: Real>(a: [T; 3]) -> [T; 3] {
    let n = dot3(a, a).sqrt();
    [a[0] / n, a[1] / n, a[2] / n]
}

/// Signed SVD: t = U diag(d) Vᵀ with U, V ∈ SO(3). Singular values are not sorted.
pub(crate) fn signed_svd3<T: Real>(t: &Mat3<T>) -> (Mat3<T>, [T; 3], Mat3<T>) {
    let mut w = *t;
    let mut v = [[T::zero(); 3]; 3];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = T::one();
    }
    let eps = T::epsilon();
    // One-sided Jacobi on the columns of w.
    for _ in 0..60 {
        let mut rotated = false;
        for i in 0..3 {
            for j in i + 1..3 {
                let (ci, cj) = (col(&w, i), col(&w, j));
                let alpha = dot3(ci, ci);
                let beta = dot3(cj, cj);
                let gamma = dot3(ci, cj);
                if gamma.abs() <= eps * (alpha * beta).sqrt() || gamma == T::zero() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (gamma + gamma);
                let tt = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let cs = T::one() / (T::one() + tt * tt).sqrt();
                let sn = cs * tt;
                for m in [&mut w, &mut v] {
                    for row in m.iter_mut() {
                        let (x, y) = (row[i], row[j]);
                        row[i] = cs * x - sn * y;
                        row[j] = sn * x + cs * y;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut d = [T::zero(); 3];
    for (k, dk) in d.iter_mut().enumerate() {
        let ck = col(&w, k);
        *dk = dot3(ck, ck).sqrt();
    }
    let smax = d.iter().fold(T::zero(), |m, x| m.max(*x));
    let small = T::lit(1e3) * eps * smax.max(T::min_positive_value());
    let mut u = [[T::zero(); 3]; 3];
    let mut known: Vec<usize> = Vec::new();
    for k in 0..3 {
        if d[k] > small {
            let ck = col(&w, k);
            set_col(&mut u, k, [ck[0] / d[k], ck[1] / d[k], ck[2] / d[k]]);
            known.push(k);
        }
    }
    let missing: Vec<usize> = (0..3).filter(|k| !known.contains(k)).collect();
    match known.len() {
        3 => {}
        2 => {
            let a = col(&u, known[0]);
            let b = col(&u, known[1]);
            set_col(&mut u, missing[0], unit(cross(a, b)));
        }
        1 => {
            let a = col(&u, known[0]);
            let axis = (0..3)
                .min_by(|&x, &y| a[x].abs().partial_cmp(&a[y].abs()).expect("finite"))
                .expect("three axes");
            let mut e = [T::zero(); 3];
            e[axis] = T::one();
            let proj = dot3(a, e);
            let b = unit([e[0] - proj * a[0], e[1] - proj * a[1], e[2] - proj * a[2]]);
            set_col(&mut u, missing[0], b);
            set_col(&mut u, missing[1], cross(a, b));
        }
        _ => {
            for (i, row) in u.iter_mut().enumerate() {
                row[i] = T::one();
            }
        }
    }
    for k in &missing {
        d[*k] = T::zero();
    }
    // Gram–Schmidt cleanup of U keeps it orthogonal to rounding.
    let u0 = unit(col(&u, 0));
    let u1r = col(&u, 1);
    let p = dot3(u0, u1r);
    let u1 = unit([u1r[0] - p * u0[0], u1r[1] - p * u0[1], u1r[2] - p * u0[2]]);
    let u2 = cross(u0, u1);
    let sign2 = if dot3(u2, col(&u, 2)) < T::zero() { -T::one() } else { T::one() };
    set_col(&mut u, 0, u0);
    set_col(&mut u, 1, u1);
    set_col(&mut u, 2, [u2[0] * sign2, u2[1] * sign2, u2[2] * sign2]);

    if det3(&u) < T::zero() {
        for row in u.iter_mut() {
            row[2] = -row[2];
        }
        d[2] = -d[2];
    }
    if det3(&v) < T::zero() {
        for row in v.iter_mut() {
            row[2] = -row[2];
        }
        d[2] = -d[2];
    }
    (u, d, v)
}

/// SU(2) element U with U σⱼ U† = Σᵢ R_ij σᵢ for a rotation R ∈ SO(3).
pub(crate) fn su2_from_rotation<T: Real>(r: &Mat3<T>) -> ComplexMatrix<T> {
    let one = T::one();
    let quarter = T::lit(0.25);
    let tr = r[0][0] + r[1][1] + r[2][2];
    let (w, x, y, z);
    if tr > T::zero() {
        let s = (tr + one).sqrt() * T::lit(2.0);
        w = quarter * s;
        x = (r[2][1] - r[1][2]) / s;
        y = (r[0][2] - r[2][0]) / s;
        z = (r[1][0] - r[0][1]) / s;
    } else if r[0][0] > r[1][1] && r[0][0] > r[2][2] {
        let s = (one + r[0][0] - r[1][1] - r[2][2]).sqrt() * T::lit(2.0);
        w = (r[2][1] - r[1][2]) / s;
        x = quarter * s;
        y = (r[0][1] + r[1][0]) / s;
        z = (r[0][2] + r[2][0]) / s;
    } else if r[1][1] > r[2][2] {
        let s = (one + r[1][1] - r[0][0] - r[2][2]).sqrt() * T::lit(2.0);
        w = (r[0][2] - r[2][0]) / s;
        x = (r[0][1] + r[1][0]) / s;
        y = quarter * s;
        z = (r[1][2] + r[2][1]) / s;
    } else {
        let s = (one + r[2][2] - r[0][0] - r[1][1]).sqrt() * T::lit(2.0);
        w = (r[1][0] - r[0][1]) / s;
        x = (r[0][2] + r[2][0]) / s;
        y = (r[1][2] + r[2][1]) / s;
        z = quarter * s;
    }
    let n = (w * w + x * x + y * y + z * z).sqrt();
    let (w, x, y, z) = (w / n, x / n, y / n, z / n);
    // U = w·I − i(xσx + yσy + zσz)
    ComplexMatrix::from_2x2(Complex::new(w, -z), Complex::new(-y, -x), Complex::new(y, -x), Complex::new(w, z))
}

/// Vertices of the Bell tetrahedron: ⟨eₖ|σᵢ⊗σᵢ|eₖ⟩.
const BELL_VERTICES: [[i32; 3]; 4] = [[-1, -1, -1], [1, 1, -1], [-1, 1, 1], [1, -1, 1]];

/// Signed permutation S (as `perm`, `signs` with (S d)ᵢ = signsᵢ·d_{permᵢ})
/// such that Sᵀvᵢ = v_{order[i]} for every Bell vertex.
fn bell_reordering(order: [usize; 4]) -> ([usize; 3], [i32; 3]) {
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    const SIGNS: [[i32; 3]; 4] = [[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]];
    for perm in PERMS {
        for signs in SIGNS {
            // (Sᵀv)_{perm[i]} = signs[i]·v_i
            let ok = (0..4).all(|k| {
                let mut stv = [0i32; 3];
                for i in 0..3 {
                    stv[perm[i]] = signs[i] * BELL_VERTICES[k][i];
                }
                stv == BELL_VERTICES[order[k]]
            });
            if ok {
                return (perm, signs);
            }
        }
    }
    unreachable!("the Bell tetrahedron symmetry group realizes every permutation")
}

fn perm_parity(perm: [usize; 3]) -> i32 {
    let mut inv = 0;
    for i in 0..3 {
        for j in i + 1..3 {
            if perm[i] > perm[j] {
                inv += 1;
            }
        }
    }
    if inv % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Rotations (O₁, O₂) with O₁ diag(S d) O₂ᵀ = diag(d).
fn reordering_rotations<T: Real>(perm: [usize; 3], signs: [i32; 3]) -> (Mat3<T>, Mat3<T>) {
    // S = Pm·Ds with (Pm)_{i, perm[i]} = 1.
    let e = T::from_i32(perm_parity(perm)).expect("sign");
    let mut o1 = [[T::zero(); 3]; 3];
    let mut o2 = [[T::zero(); 3]; 3];
    // Pmᵀ has (Pmᵀ)_{perm[i], i} = 1; O₁ = E·Ds·Pmᵀ, O₂ = E·Pmᵀ.
    for i in 0..3 {
        let r = perm[i];
        o1[r][i] = e * T::from_i32(signs[i]).expect("sign");
        o2[r][i] = e;
    }
    (o1, o2)
}

fn sqrt_det_normalize<T: Real>(m: &ComplexMatrix<T>) -> (ComplexMatrix<T>, T) {
    let det = m.det_2x2();
    let root = det.sqrt();
    (m.scale_complex(C::<T>::one() / root), det.norm())
}

fn bell_diagonalize<T: Real>(w: &BipartiteOperator<T>, fl: Filtered<T>, tol: &Tolerances) -> Result<NormalForm<T>> {
    let t = correlation_matrix(&fl.current);
    let (u, _, v) = signed_svd3(&t);
    let ua = su2_from_rotation(&u);
    let ub = su2_from_rotation(&v);

    let basis = bell_basis::<T>();
    let weights = |op: &BipartiteOperator<T>| -> [T; 4] {
        let mut q = [T::zero(); 4];
        for k in 0..4 {
            q[k] = op.matrix().sandwich(&basis[k], &basis[k]).re;
        }
        q
    };
    let diag = fl.current.congruence(&ua.kron(&ub).adjoint());
    let q = weights(&diag);

    let mut order = [0usize, 1, 2, 3];
    order.sort_by(|&i, &j| q[j].partial_cmp(&q[i]).expect("finite weights"));
    let (perm, signs) = bell_reordering(order);
    let (o1, o2) = reordering_rotations::<T>(perm, signs);
    let w1 = su2_from_rotation(&o1);
    let w2 = su2_from_rotation(&o2);

    let a0 = &(&fl.f * &ua) * &w1;
    let b0 = &(&fl.g * &ub) * &w2;
    let (mut a, det_a) = sqrt_det_normalize(&a0);
    let (mut b, det_b) = sqrt_det_normalize(&b0);
    let n = T::one() / (fl.scale * det_a * det_b);

    let inner_op = |a: &ComplexMatrix<T>, b: &ComplexMatrix<T>| -> Result<BipartiteOperator<T>> {
        let kinv = a.inverse_2x2()?.kron(&b.inverse_2x2()?);
        Ok(w.congruence(&kinv).scale(n))
    };

    // σₖ⊗σₖ fixes every Bell projector; pick the representative closest to the identity.
    let mut best: Option<(T, usize)> = None;
    let gauges = [ComplexMatrix::<T>::identity(2)]
        .into_iter()
        .chain(crate::linalg::paulis::<T>().into_iter().map(|s| s.scale_complex(c(0.0, -1.0))))
        .collect::<Vec<_>>();
    for (k, s) in gauges.iter().enumerate() {
        let score = (&a * s).trace().norm() + (&b * s).trace().norm();
        if best.is_none_or(|(b, _)| score > b + T::lit(1e-12)) {
            best = Some((score, k));
        }
    }
    let s = &gauges[best.expect("four gauges").1];
    a = &a * s;
    b = &b * s;
    if a.trace().re < T::zero() {
        a = a.scale(-T::one());
    }
    if b.trace().re < T::zero() {
        b = b.scale(-T::one());
    }

    let mut p = weights(&inner_op(&a, &b)?);
    for x in p.iter_mut() {
        if *x < T::zero() && *x > -T::lit(tol.kernel_p3) {
            *x = T::zero();
        }
    }
    let mut nf = NormalForm {
        a,
        b,
        p,
        n,
        class: NormalFormClass::BellDiagonal,
        residual: T::zero(),
        iterations: fl.iterations,
    };
    nf.residual = nf.reconstruct().max_diff(w);
    Ok(nf)
}

fn fit_sigma_c<T: Real>(w: &BipartiteOperator<T>, fl: Filtered<T>) -> Result<NormalForm<T>> {
    let m = fl.current.matrix();
    let two = T::lit(2.0);
    let (x, y, z) = (two * m[(0, 0)].re, two * m[(2, 2)].re, two * m[(3, 3)].re);
    let a = (x + y + z) / two;
    let c = x - a;
    let b = a - z;
    let d = two * m[(0, 3)].re;
    let (fa, det_f) = sqrt_det_normalize(&fl.f);
    let (gb, det_g) = sqrt_det_normalize(&fl.g);
    let mut nf = NormalForm {
        a: fa,
        b: gb,
        p: [T::zero(); 4],
        n: T::one() / (fl.scale * det_f * det_g),
        class: NormalFormClass::SigmaC { a, b, c, d },
        residual: T::zero(),
        iterations: fl.iterations,
    };
    nf.residual = nf.reconstruct().max_diff(w);
    Ok(nf)
}

/// |ψ⟩ = (Ã⊗B̃)|φ⁺⟩/√M, the kernel of a rank-3 Bell-diagonal normal form.
pub fn kernel_state<T: Real>(nf: &NormalForm<T>) -> Result<(Vec<C<T>>, T)> {
    kernel_state_with(nf, &T::tolerances())
}

pub fn kernel_state_with<T: Real>(nf: &NormalForm<T>, tol: &Tolerances) -> Result<(Vec<C<T>>, T)> {
    if !nf.is_bell_diagonal() {
        return Err(Error::NotBellDiagonal);
    }
    if nf.p[3] > T::lit(tol.kernel_p3) {
        return Err(Error::FullRankInput { p3: nf.p[3].as_f64() });
    }
    let raw = tilde_local(&nf.a).kron(&tilde_local(&nf.b)).mul_vec(&bell_basis::<T>()[3]);
    let m = crate::linalg::norm_sqr(&raw);
    let s = m.sqrt();
    Ok((raw.iter().map(|z| z / s).collect(), m))
}

/// P′ = P + ε Σ|wₖ⟩⟨wₖ| over kernel directions wₖ ⟂ ψ, raising the rank to 3.
pub fn rank3_regularize<T: Real>(p: &BipartiteOperator<T>, psi: &[C<T>]) -> Result<BipartiteOperator<T>> {
    rank3_regularize_with(p, psi, &T::tolerances())
}

pub fn rank3_regularize_with<T: Real>(
    p: &BipartiteOperator<T>,
    psi: &[C<T>],
    tol: &Tolerances,
) -> Result<BipartiteOperator<T>> {
    if p.dims() != (2, 2) || psi.len() != 4 {
        return Err(Error::Shape("rank-3 regularization is defined for two qubits".into()));
    }
    let trace = p.trace();
    if !(trace > T::zero()) {
        return Err(Error::NotNormalizable { trace: trace.as_f64() });
    }
    let scale = p.matrix().max_norm();
    if norm(&p.matrix().mul_vec(psi)) > T::lit(tol.psd) * scale.max(T::one()) {
        return Err(Error::InvalidArgument("ψ is not in the kernel of P".into()));
    }
    let es = p.eig_with(tol)?;
    if es.min() < -T::lit(tol.psd) * trace {
        return Err(Error::NotPsd { min_eigenvalue: es.min().as_f64() });
    }
    let rank = es.rank(tol.rank);
    if rank >= 3 {
        return Err(Error::RankAlready3);
    }
    let thr = T::lit(tol.rank) * es.max();
    let mut added: Vec<Vec<C<T>>> = Vec::new();
    for k in 0..4 {
        if added.len() == 3 - rank {
            break;
        }
        if es.values[k] > thr {
            continue;
        }
        let mut v = es.vector(k);
        for basis in std::iter::once(psi.to_vec()).chain(added.iter().cloned()) {
            let ov = inner(&basis, &v);
            for (x, b) in v.iter_mut().zip(&basis) {
                *x = *x - ov * b;
            }
        }
        let nv = norm(&v);
        if nv > T::lit(1e-6) {
            added.push(v.iter().map(|z| z / nv).collect());
        }
    }
    if added.len() != 3 - rank {
        return Err(Error::InvalidArgument("kernel of P has no room orthogonal to ψ".into()));
    }
    let eps = T::lit(tol.regularize) * trace;
    let mut m = p.matrix().clone();
    for v in &added {
        m = &m + &ComplexMatrix::projector(v).scale(eps);
    }
    Ok(BipartiteOperator::from_parts(2, 2, m.hermitian_part()))
}

/// P^{T_B} = (1/2N) Σ (1 − 2p₃₋ᵢ)(A⊗B*)|eᵢ⟩⟨eᵢ|(A†⊗Bᵀ).
pub fn pt_in_normal_form<T: Real>(nf: &NormalForm<T>) -> Result<BipartiteOperator<T>> {
    if !nf.is_bell_diagonal() {
        return Err(Error::NotBellDiagonal);
    }
    let one = T::one();
    let two = T::lit(2.0);
    let w = [one - two * nf.p[3], one - two * nf.p[2], one - two * nf.p[1], one - two * nf.p[0]];
    let k = nf.a.kron(&nf.b.conj());
    Ok(crate::states::bell_mixture(w).congruence(&k).scale(one / (two * nf.n)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Side;
    use crate::states::{bell_diagonal, werner};

    fn rot_about(axis: usize, angle: f64) -> Mat3<f64> {
        let (s, co) = angle.sin_cos();
        let mut r = [[0.0; 3]; 3];
        let (i, j) = ((axis + 1) % 3, (axis + 2) % 3);
        r[axis][axis] = 1.0;
        r[i][i] = co;
        r[j][j] = co;
        r[i][j] = -s;
        r[j][i] = s;
        r
    }

    fn mul3(a: &Mat3<f64>, b: &Mat3<f64>) -> Mat3<f64> {
        let mut out = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
            }
        }
        out
    }

    fn check_lift(r: &Mat3<f64>) {
        let u = su2_from_rotation(r);
        let p = crate::linalg::paulis::<f64>();
        for j in 0..3 {
            let lhs = &(&u * &p[j]) * &u.adjoint();
            let mut rhs = ComplexMatrix::zeros(2, 2);
            for i in 0..3 {
                rhs = &rhs + &p[i].scale(r[i][j]);
            }
            assert!(lhs.max_diff(&rhs) < 1e-13, "lift mismatch for column {j}");
        }
        assert!((u.det_2x2() - C::one()).norm() < 1e-13);
    }

    #[test]
    fn su2_lift_matches_rotation() {
        check_lift(&rot_about(0, 0.3));
        check_lift(&rot_about(1, 2.9));
        check_lift(&rot_about(2, std::f64::consts::PI));
        check_lift(&mul3(&rot_about(0, 1.1), &mul3(&rot_about(1, -2.0), &rot_about(2, 3.1))));
        check_lift(&[[-1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0]]);
        check_lift(&[[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, -1.0]]);
    }

    #[test]
    fn signed_svd_reconstructs() {
        let cases: Vec<Mat3<f64>> = vec![
            [[0.3, -0.1, 0.2], [0.05, 0.4, -0.3], [0.1, 0.2, -0.5]],
            [[-0.2, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, -0.4]],
            [[0.0; 3]; 3],
            [[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [-1.0, -2.0, -3.0]],
        ];
        for t in cases {
            let (u, d, v) = signed_svd3(&t);
            assert!((det3(&u) - 1.0).abs() < 1e-13 && (det3(&v) - 1.0).abs() < 1e-13);
            for i in 0..3 {
                for j in 0..3 {
                    let r: f64 = (0..3).map(|k| u[i][k] * d[k] * v[j][k]).sum();
                    assert!((r - t[i][j]).abs() < 1e-13, "entry {i},{j}");
                }
            }
        }
    }

    #[test]
    fn every_bell_order_is_reachable() {
        let mut count = 0;
        let idx = [0usize, 1, 2, 3];
        for a in idx {
            for b in idx {
                for c in idx {
                    for d in idx {
                        let order = [a, b, c, d];
                        let mut seen = [false; 4];
                        order.iter().for_each(|&k| seen[k] = true);
                        if seen.iter().all(|s| *s) {
                            let _ = bell_reordering(order);
                            count += 1;
                        }
                    }
                }
            }
        }
        assert_eq!(count, 24);
    }

    #[test]
    fn bell_diagonal_input_is_already_normal() {
        let s = bell_diagonal([0.4f64, 0.3, 0.2, 0.1]).unwrap();
        let nf = filter_normal_form(s.op()).unwrap();
        assert!(nf.is_bell_diagonal());
        for (got, want) in nf.p.iter().zip([0.4, 0.3, 0.2, 0.1]) {
            assert!((got - want).abs() < 1e-12, "{:?}", nf.p);
        }
        assert!((nf.n - 1.0).abs() < 1e-12);
        assert!(nf.a.max_diff(&ComplexMatrix::identity(2)) < 1e-12, "{:?}", nf.a);
        assert!(nf.b.max_diff(&ComplexMatrix::identity(2)) < 1e-12, "{:?}", nf.b);
        assert!(nf.residual < 1e-12);
    }

    #[test]
    fn unsorted_bell_diagonal_is_sorted() {
        let s = bell_diagonal([0.1f64, 0.2, 0.3, 0.4]).unwrap();
        let nf = filter_normal_form(s.op()).unwrap();
        for (got, want) in nf.p.iter().zip([0.4, 0.3, 0.2, 0.1]) {
            assert!((got - want).abs() < 1e-12, "{:?}", nf.p);
        }
        assert!(nf.residual < 1e-12);
        assert!((nf.a.det_2x2() - C::one()).norm() < 1e-12);
    }

    #[test]
    fn singlet_positive_part() {
        let p = (&ComplexMatrix::<f64>::identity(4)
            - &ComplexMatrix::projector(&bell_basis::<f64>()[3]))
            .scale(0.5);
        let p = BipartiteOperator::new(2, 2, p).unwrap();
        let nf = filter_normal_form(&p).unwrap();
        for (got, want) in nf.p.iter().zip([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.0]) {
            assert!((got - want).abs() < 1e-12, "{:?}", nf.p);
        }
        assert!((nf.n - 2.0 / 3.0).abs() < 1e-12);
        let (psi, m) = kernel_state(&nf).unwrap();
        assert!((m - 1.0).abs() < 1e-12);
        assert!((inner(&psi, &bell_basis::<f64>()[3]).norm() - 1.0).abs() < 1e-12);
        let pt = pt_in_normal_form(&nf).unwrap();
        assert!(pt.max_diff(&p.partial_transpose(Side::B)) < 1e-12);
    }

    #[test]
    fn sigma_c_input_is_classified() {
        let w = sigma_c(1.0f64, 0.5, 0.2, 0.3);
        let nf = filter_normal_form(&w).unwrap();
        assert!(matches!(nf.class, NormalFormClass::SigmaC { .. }), "{:?}", nf.class);
        assert!(kernel_state(&nf).is_err());
        assert!(pt_in_normal_form(&nf).is_err());
    }

    #[test]
    fn kernel_state_rejects_full_rank() {
        let nf = filter_normal_form(bell_diagonal([0.4f64, 0.3, 0.2, 0.1]).unwrap().op()).unwrap();
        assert!(matches!(kernel_state(&nf), Err(Error::FullRankInput { .. })));
    }

    #[test]
    fn rank3_regularize_cases() {
        let basis = bell_basis::<f64>();
        let p2 = (&ComplexMatrix::projector(&basis[0]) + &ComplexMatrix::projector(&basis[1])).scale(0.5);
        let p2 = BipartiteOperator::new(2, 2, p2).unwrap();
        let p3 = rank3_regularize(&p2, &basis[3]).unwrap();
        assert_eq!(p3.eig().unwrap().rank(1e-10), 3);
        assert!(norm(&p3.matrix().mul_vec(&basis[3])) < 1e-12);
        assert!(p3.max_diff(&p2) <= 1e-8 + 1e-20);

        assert_eq!(rank3_regularize(&p3, &basis[3]).unwrap_err(), Error::RankAlready3);
        let zero = BipartiteOperator::<f64>::identity(2, 2).scale(0.0);
        assert!(matches!(rank3_regularize(&zero, &basis[3]), Err(Error::NotNormalizable { .. })));
    }

    #[test]
    fn pt_formula_boundary_cases() {
        let nf = filter_normal_form(bell_diagonal([0.5f64, 0.5, 0.0, 0.0]).unwrap().op()).unwrap();
        let min = pt_in_normal_form(&nf).unwrap().min_eigenvalue().unwrap();
        assert!(min.abs() < 1e-12);
        let nf = filter_normal_form(bell_diagonal([0.7f64, 0.2, 0.1, 0.0]).unwrap().op()).unwrap();
        let es = pt_in_normal_form(&nf).unwrap().eig().unwrap();
        assert_eq!(es.values.iter().filter(|v| **v < -1e-12).count(), 1);
    }

    #[test]
    fn werner_positive_part_normal_form() {
        let w = werner(0.6f64).unwrap();
        let d = crate::binegativity::negative_decomposition(&w).unwrap();
        let nf = filter_normal_form(&d.positive).unwrap();
        assert!((nf.n - 4.0 / (3.0 * 1.6)).abs() < 1e-12);
        assert!(nf.residual < 1e-12);
    }
}
