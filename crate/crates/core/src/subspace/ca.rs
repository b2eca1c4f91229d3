//! The preparation circuit C_A and the two implementations of the
//! projective measurement {|A⟩⟨A|, I − |A⟩⟨A|}.
//!
//! C_A exists only for bases with ⟨v_i, v_j⟩ = δ_ij over F₂. Such a basis
//! exists iff the inner product restricted to A is non-degenerate and not
//! alternating; many subspaces fail this.

use nalgebra::DMatrix;
use rand::Rng;

use super::{dot, Subspace};
use crate::error::{Error, Result};
use crate::qsim::{CMatrix, Circuit, Gate, QState, C64};

/// Searches for a basis of `a` that is orthonormal under the F₂ inner
/// product.
pub fn orthonormal_basis(a: &Subspace) -> Option<Vec<u64>> {
    let b = a.basis().to_vec();
    let k = b.len();
    // the Gram matrix must have full rank
    let gram: Vec<u64> = (0..k)
        .map(|i| (0..k).fold(0u64, |acc, j| acc | (dot(b[i], b[j]) as u64) << j))
        .collect();
    if super::rref(&gram).len() != k {
        return None;
    }
    let mut out = Vec::with_capacity(k);
    if peel(b, &mut out) {
        Some(out)
    } else {
        None
    }
}

/// Picks a unit vector whose orthogonal complement stays non-alternating,
/// then recurses on the complement.
fn peel(w: Vec<u64>, out: &mut Vec<u64>) -> bool {
    let k = w.len();
    if k == 0 {
        return true;
    }
    for c in 1..1u64 << k {
        let v = (0..k).filter(|i| c >> i & 1 == 1).fold(0, |acc, i| acc ^ w[i]);
        if !dot(v, v) {
            continue;
        }
        let j = (0..k).find(|&j| dot(v, w[j])).expect("v pairs with itself");
        let rest: Vec<u64> = (0..k)
            .filter(|&i| i != j)
            .map(|i| if dot(v, w[i]) { w[i] ^ w[j] } else { w[i] })
            .collect();
        if !rest.is_empty() && rest.iter().all(|&u| !dot(u, u)) {
            continue;
        }
        out.push(v);
        if peel(rest, out) {
            return true;
        }
        out.pop();
    }
    false
}

fn check_orthonormal(basis: &[u64]) -> Result<()> {
    for (i, &u) in basis.iter().enumerate() {
        for (j, &v) in basis.iter().enumerate() {
            if dot(u, v) != (i == j) {
                return Err(Error::BasisNotOrthonormal(format!(
                    "⟨v{i}, v{j}⟩ = {}",
                    dot(u, v) as u8
                )));
            }
        }
    }
    Ok(())
}

/// C_A on k+n qubits (X = 0..k, Y = k..k+n) for an explicit basis.
pub fn build_ca_from_basis(n: usize, basis: &[u64]) -> Result<Circuit> {
    check_orthonormal(basis)?;
    let k = basis.len();
    let y = |coord: usize| k + coord;
    let mut c = Circuit::new(k + n);
    for i in 0..k {
        c.push(Gate::H(i))?;
    }
    for (i, &v) in basis.iter().enumerate() {
        for coord in 0..n {
            if v >> (n - 1 - coord) & 1 == 1 {
                c.push(Gate::Cnot { control: i, target: y(coord) })?;
            }
        }
    }
    // X_i ⊕= ⟨v_i, y⟩ = b_i clears the control register
    for (i, &v) in basis.iter().enumerate() {
        for coord in 0..n {
            if v >> (n - 1 - coord) & 1 == 1 {
                c.push(Gate::Cnot { control: y(coord), target: i })?;
            }
        }
    }
    Ok(c)
}

/// C_A for `a`, using an orthonormal basis when one exists.
pub fn build_ca(a: &Subspace) -> Result<Circuit> {
    match orthonormal_basis(a) {
        Some(b) => build_ca_from_basis(a.ambient_dim(), &b),
        None => Err(Error::BasisNotOrthonormal(format!(
            "the {}-dimensional subspace admits no orthonormal basis",
            a.dim()
        ))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjectRoute {
    /// Multiply by |A⟩⟨A| directly.
    Direct,
    /// Prepend |0^k⟩, apply C_A†, test all k+n qubits for zero, undo with
    /// C_A and drop X, which is |0^k⟩ in both branches.
    ViaCa,
}

/// Probability and normalised post-state of outcome 0 (in A) and 1.
pub type Branches = [(f64, Option<QState>); 2];

fn finish(p: [f64; 2], states: [QState; 2]) -> Result<Branches> {
    let [s0, s1] = states;
    let norm = |mut s: QState, w: f64| -> Result<Option<QState>> {
        if w <= 1e-14 {
            return Ok(None);
        }
        s.renormalize()?;
        Ok(Some(s))
    };
    Ok([(p[0], norm(s0, p[0])?), (p[1], norm(s1, p[1])?)])
}

fn direct(a: &Subspace, rho: &QState) -> Result<Branches> {
    let psi = a.state_vector();
    match rho {
        QState::Pure { n, amps } => {
            let ov: C64 = psi.iter().zip(amps).map(|(p, x)| p.conj() * x).sum();
            let in_a: Vec<C64> = psi.iter().map(|p| p * ov).collect();
            let out: Vec<C64> = amps.iter().zip(&in_a).map(|(x, y)| x - y).collect();
            let p0 = ov.norm_sqr();
            finish(
                [p0, (1.0 - p0).max(0.0)],
                [QState::Pure { n: *n, amps: in_a }, QState::Pure { n: *n, amps: out }],
            )
        }
        QState::Mixed { .. } => {
            let proj = CMatrix::outer(&psi);
            let comp = CMatrix::identity(psi.len()).sub(&proj);
            let m = rho.density_matrix();
            let r0 = proj.mul(&m).mul(&proj);
            let r1 = comp.mul(&m).mul(&comp);
            let p = [r0.trace().re, r1.trace().re];
            finish(p, [QState::raw_operator(r0)?, QState::raw_operator(r1)?])
        }
    }
}

/// Branch vectors (unnormalised) of the C_A route for a pure input.
fn via_ca_pure(c: &Circuit, k: usize, n: usize, amps: &[C64]) -> Result<[Vec<C64>; 2]> {
    let mut reg = QState::zero(k).tensor(&QState::Pure {
        n,
        amps: amps.to_vec(),
    });
    reg.apply_circuit(&c.dagger())?;
    let mut zero = reg.clone();
    zero.project_where(|i| i == 0);
    reg.project_where(|i| i != 0);
    let mut out = [Vec::new(), Vec::new()];
    for (slot, mut s) in out.iter_mut().zip([zero, reg]) {
        s.apply_circuit(c)?;
        let v = s.amplitudes().expect("pure");
        // X is back in |0^k⟩: the live amplitudes are the first 2^n
        debug_assert!(v[1 << n..].iter().all(|z| z.norm() < 1e-9));
        *slot = v[..1 << n].to_vec();
    }
    Ok(out)
}

fn via_ca(a: &Subspace, rho: &QState) -> Result<Branches> {
    let c = build_ca(a)?;
    let (k, n) = (a.dim(), a.ambient_dim());
    let w = |v: &[C64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>();
    match rho {
        QState::Pure { amps, .. } => {
            let [b0, b1] = via_ca_pure(&c, k, n, amps)?;
            finish(
                [w(&b0), w(&b1)],
                [QState::Pure { n, amps: b0 }, QState::Pure { n, amps: b1 }],
            )
        }
        QState::Mixed { .. } => {
            // spectral decomposition keeps the simulation at k+n qubits
            let m = rho.density_matrix();
            let d = m.dim();
            let h = DMatrix::from_fn(d, d, |i, j| (m.get(i, j) + m.get(j, i).conj()) * 0.5);
            let eig = h.symmetric_eigen();
            let mut acc = [CMatrix::zeros(d), CMatrix::zeros(d)];
            for (idx, &lam) in eig.eigenvalues.iter().enumerate() {
                if lam <= 1e-15 {
                    continue;
                }
                let v: Vec<C64> = eig.eigenvectors.column(idx).iter().copied().collect();
                let br = via_ca_pure(&c, k, n, &v)?;
                for (a, b) in acc.iter_mut().zip(br.iter()) {
                    *a = a.add(&CMatrix::outer(b).scale(C64::new(lam, 0.0)));
                }
            }
            let [r0, r1] = acc;
            let p = [r0.trace().re, r1.trace().re];
            finish(p, [QState::raw_operator(r0)?, QState::raw_operator(r1)?])
        }
    }
}

/// Exact outcome distribution and post-states of the measurement.
pub fn project_a_branches(a: &Subspace, rho: &QState, route: ProjectRoute) -> Result<Branches> {
    if rho.num_qubits() != a.ambient_dim() {
        return Err(Error::Dimension(format!(
            "{}-qubit state for a subspace of F₂^{}",
            rho.num_qubits(),
            a.ambient_dim()
        )));
    }
    match route {
        ProjectRoute::Direct => direct(a, rho),
        ProjectRoute::ViaCa => via_ca(a, rho),
    }
}

fn sample<R: Rng + ?Sized>(br: Branches, rng: &mut R) -> Result<(u8, QState)> {
    let [(p0, s0), (_, s1)] = br;
    let outcome = if rng.gen::<f64>() < p0 { 0 } else { 1 };
    let s = if outcome == 0 { s0.or(s1) } else { s1.or(s0) };
    let o = match (&s, outcome) {
        (Some(_), o) => o,
        _ => return Err(Error::InvalidState("zero input state".into())),
    };
    Ok((o, s.expect("checked")))
}

/// Measures {|A⟩⟨A|, I − |A⟩⟨A|}; outcome 0 means "in A".
pub fn project_a<R: Rng + ?Sized>(a: &Subspace, rho: &QState, rng: &mut R) -> Result<(u8, QState)> {
    sample(project_a_branches(a, rho, ProjectRoute::Direct)?, rng)
}

/// The same measurement through C_A with n+k qubits of memory.
pub fn project_a_via_ca<R: Rng + ?Sized>(
    a: &Subspace,
    rho: &QState,
    rng: &mut R,
) -> Result<(u8, QState)> {
    sample(project_a_branches(a, rho, ProjectRoute::ViaCa)?, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn self_orthogonal_span_has_no_orthonormal_basis() {
        let a = Subspace::from_strings(&["1100", "0011"]).unwrap();
        assert!(orthonormal_basis(&a).is_none());
        assert!(matches!(build_ca(&a), Err(Error::BasisNotOrthonormal(_))));
        assert!(matches!(
            build_ca_from_basis(4, a.basis()),
            Err(Error::BasisNotOrthonormal(_))
        ));
    }

    #[test]
    fn found_bases_span_the_subspace() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut found = 0;
        for _ in 0..200 {
            let a = Subspace::sample(6, 3, &mut rng).unwrap();
            if let Some(b) = orthonormal_basis(&a) {
                check_orthonormal(&b).unwrap();
                assert_eq!(Subspace::span(6, &b).unwrap(), a);
                found += 1;
            }
        }
        assert!(found > 10);
    }

    #[test]
    fn k_zero_circuit_is_identity() {
        let c = build_ca_from_basis(3, &[]).unwrap();
        assert!(c.is_empty());
        assert_eq!(c.arity(), 3);
    }
}
