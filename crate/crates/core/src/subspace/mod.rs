//! Subspace states over F₂ⁿ.
//!
//! A vector x ∈ F₂ⁿ is a `u64` mask equal to its computational basis index:
//! coordinate i is bit n−1−i, so coordinate 0 lives on qubit 0.

pub mod ca;
pub mod clone;
pub mod oracle;

use rand::Rng;

use crate::error::{Error, Result};
use crate::qsim::{QState, C64};

pub use ca::{
    build_ca, build_ca_from_basis, orthonormal_basis, project_a, project_a_branches,
    project_a_via_ca, ProjectRoute,
};
pub use clone::{clone_experiment, CloneReport, CloneStrategy};
pub use oracle::SubspaceOracleHandle;

/// Largest ambient dimension accepted; states are enumerated explicitly.
pub const MAX_AMBIENT: usize = 16;

/// F₂ inner product.
#[inline]
pub fn dot(a: u64, b: u64) -> bool {
    (a & b).count_ones() % 2 == 1
}

/// Reduces a list of vectors to RREF, dropping dependent ones. Pivot of a
/// row is its highest set bit (lowest coordinate).
pub fn rref(rows: &[u64]) -> Vec<u64> {
    let mut basis: Vec<u64> = Vec::new();
    for &v in rows {
        let mut v = v;
        for &b in &basis {
            let p = 63 - b.leading_zeros();
            if v >> p & 1 == 1 {
                v ^= b;
            }
        }
        if v == 0 {
            continue;
        }
        let p = 63 - v.leading_zeros();
        for b in &mut basis {
            if *b >> p & 1 == 1 {
                *b ^= v;
            }
        }
        basis.push(v);
    }
    basis.sort_unstable_by(|a, b| b.cmp(a));
    basis
}

/// A k-dimensional subspace of F₂ⁿ held by its canonical RREF basis.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Subspace {
    n: usize,
    basis: Vec<u64>,
}

impl Subspace {
    pub fn new(n: usize, rows: &[u64]) -> Result<Self> {
        if n > MAX_AMBIENT {
            return Err(Error::Dimension(format!(
                "ambient dimension {n} above {MAX_AMBIENT}"
            )));
        }
        if rows.iter().any(|&r| r >> n != 0) {
            return Err(Error::Dimension(format!("row outside F₂^{n}")));
        }
        let basis = rref(rows);
        if basis.len() != rows.len() {
            return Err(Error::Dimension("rows are linearly dependent".into()));
        }
        Ok(Subspace { n, basis })
    }

    /// Spans arbitrary rows, dependent or not.
    pub fn span(n: usize, rows: &[u64]) -> Result<Self> {
        let b = rref(rows);
        Self::new(n, &b)
    }

    /// Parses rows written as coordinate strings, e.g. "1000".
    pub fn from_strings(rows: &[&str]) -> Result<Self> {
        let n = rows.first().map_or(0, |r| r.len());
        let mut v = Vec::new();
        for r in rows {
            if r.len() != n {
                return Err(Error::Format("rows of unequal length".into()));
            }
            v.push(parse_vector(r)?);
        }
        Self::new(n, &v)
    }

    pub fn zero(n: usize) -> Self {
        Subspace { n, basis: vec![] }
    }

    pub fn full(n: usize) -> Self {
        Self::new(n, &(0..n).map(|i| 1u64 << (n - 1 - i)).collect::<Vec<_>>()).expect("identity")
    }

    /// Uniform over k-dimensional subspaces: random k×n matrices until the
    /// rank is k, then canonicalised.
    pub fn sample<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<Self> {
        if k > n {
            return Err(Error::Dimension(format!("dimension {k} above ambient {n}")));
        }
        if n > MAX_AMBIENT {
            return Err(Error::Dimension(format!(
                "ambient dimension {n} above {MAX_AMBIENT}"
            )));
        }
        let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        loop {
            let rows: Vec<u64> = (0..k).map(|_| rng.gen::<u64>() & mask).collect();
            let b = rref(&rows);
            if b.len() == k {
                return Ok(Subspace { n, basis: b });
            }
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[u64] {
        &self.basis
    }

    pub fn contains(&self, x: u64) -> bool {
        let mut v = x;
        for &b in &self.basis {
            let p = 63 - b.leading_zeros();
            if v >> p & 1 == 1 {
                v ^= b;
            }
        }
        v == 0
    }

    /// All 2^k members in increasing combination order.
    pub fn members(&self) -> Vec<u64> {
        let k = self.dim();
        (0..1u64 << k)
            .map(|c| {
                (0..k)
                    .filter(|i| c >> i & 1 == 1)
                    .fold(0, |acc, i| acc ^ self.basis[i])
            })
            .collect()
    }

    pub fn intersection_dim(&self, other: &Subspace) -> usize {
        // dim(A∩B) = dim A + dim B − dim(A+B)
        let mut rows = self.basis.clone();
        rows.extend_from_slice(&other.basis);
        self.dim() + other.dim() - rref(&rows).len()
    }

    /// Amplitude vector of |A⟩ on n qubits.
    pub fn state_vector(&self) -> Vec<C64> {
        let mut v = vec![C64::new(0.0, 0.0); 1 << self.n];
        let a = C64::new((0.5f64).powf(self.dim() as f64 / 2.0), 0.0);
        for x in self.members() {
            v[x as usize] = a;
        }
        v
    }

    pub fn prepare_state(&self) -> QState {
        QState::Pure {
            n: self.n,
            amps: self.state_vector(),
        }
    }

    pub fn to_sub1(&self) -> Vec<u8> {
        let nb = self.n.div_ceil(8);
        let mut out = b"SUB1".to_vec();
        out.extend_from_slice(&(self.n as u16).to_le_bytes());
        out.extend_from_slice(&(self.dim() as u16).to_le_bytes());
        for &row in &self.basis {
            let mut bytes = vec![0u8; nb];
            for i in 0..self.n {
                if row >> (self.n - 1 - i) & 1 == 1 {
                    bytes[i / 8] |= 1 << (i % 8);
                }
            }
            out.extend_from_slice(&bytes);
        }
        out
    }

    pub fn from_sub1(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 8 || &bytes[..4] != b"SUB1" {
            return Err(Error::Format("missing SUB1 header".into()));
        }
        let n = u16::from_le_bytes([bytes[4], bytes[5]]) as usize;
        let k = u16::from_le_bytes([bytes[6], bytes[7]]) as usize;
        if n > MAX_AMBIENT || k > n {
            return Err(Error::Format(format!("bad SUB1 shape n={n} k={k}")));
        }
        let nb = n.div_ceil(8);
        let body = &bytes[8..];
        if body.len() != k * nb {
            return Err(Error::Format(format!(
                "{} row bytes for k={k}, n={n}",
                body.len()
            )));
        }
        let mut rows = Vec::with_capacity(k);
        for chunk in body.chunks_exact(nb.max(1)).take(k) {
            let mut row = 0u64;
            for i in 0..nb * 8 {
                if chunk[i / 8] >> (i % 8) & 1 == 1 {
                    if i >= n {
                        return Err(Error::Format("padding bits set".into()));
                    }
                    row |= 1 << (n - 1 - i);
                }
            }
            rows.push(row);
        }
        let s = Subspace::new(n, &rows).map_err(|e| Error::Format(e.to_string()))?;
        if s.basis != rows {
            return Err(Error::Format("rows are not in canonical RREF".into()));
        }
        Ok(s)
    }
}

/// Every k-dimensional subspace of F₂ⁿ, enumerated through RREF shapes.
pub fn all_subspaces(n: usize, k: usize) -> Result<Vec<Subspace>> {
    if k > n || n > 10 {
        return Err(Error::Dimension(format!("enumeration of dim {k} in F₂^{n}")));
    }
    let mut out = Vec::new();
    for pivots in 0u64..1 << n {
        if pivots.count_ones() as usize != k {
            continue;
        }
        // coordinate c is bit n−1−c; pivot rows may use free later coordinates
        let pcoords: Vec<usize> = (0..n).filter(|c| pivots >> (n - 1 - c) & 1 == 1).collect();
        let free: Vec<Vec<usize>> = pcoords
            .iter()
            .map(|&p| (p + 1..n).filter(|c| !pcoords.contains(c)).collect())
            .collect();
        let total: usize = free.iter().map(Vec::len).sum();
        for fill in 0u64..1 << total {
            let mut bit = 0;
            let rows: Vec<u64> = pcoords
                .iter()
                .zip(&free)
                .map(|(&p, fs)| {
                    let mut r = 1u64 << (n - 1 - p);
                    for &c in fs {
                        if fill >> bit & 1 == 1 {
                            r |= 1 << (n - 1 - c);
                        }
                        bit += 1;
                    }
                    r
                })
                .collect();
            out.push(Subspace::new(n, &rows)?);
        }
    }
    Ok(out)
}

/// Measures every qubit of a state and returns the basis index.
pub fn measure_prefix_all<R: Rng + ?Sized>(state: QState, rng: &mut R) -> Result<u64> {
    let n = state.num_qubits();
    let (o, _) = crate::qsim::measure_prefix(state, n, rng)?;
    Ok(crate::qsim::state::outcome_index(&o) as u64)
}

/// "1010" → mask with coordinate 0 on the high bit.
pub fn parse_vector(s: &str) -> Result<u64> {
    let n = s.len();
    let mut v = 0u64;
    for (i, ch) in s.chars().enumerate() {
        match ch {
            '0' => {}
            '1' => v |= 1 << (n - 1 - i),
            _ => return Err(Error::Format(format!("not a bit character: {ch:?}"))),
        }
    }
    Ok(v)
}

pub fn sample_subspace<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<Subspace> {
    Subspace::sample(n, k, rng)
}

pub fn prepare_state(a: &Subspace) -> QState {
    a.prepare_state()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rref_is_canonical() {
        let a = Subspace::from_strings(&["1100", "0110"]).unwrap();
        let b = Subspace::from_strings(&["1010", "0110"]).unwrap();
        assert_eq!(a, b);
        assert!(Subspace::from_strings(&["1100", "1100"]).is_err());
    }

    #[test]
    fn sub1_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in [1usize, 7, 8, 10] {
            let s = Subspace::sample(n, n / 2, &mut rng).unwrap();
            assert_eq!(Subspace::from_sub1(&s.to_sub1()).unwrap(), s);
        }
        assert!(Subspace::from_sub1(b"SUB1\x04\x00\x01\x00").is_err());
    }

    #[test]
    fn enumeration_counts_gaussian_binomials() {
        // [4 choose 2]_2 = 35, [6 choose 3]_2 = 1395
        assert_eq!(all_subspaces(4, 2).unwrap().len(), 35);
        assert_eq!(all_subspaces(2, 1).unwrap().len(), 3);
        let six = all_subspaces(6, 3).unwrap();
        assert_eq!(six.len(), 1395);
        let distinct: std::collections::HashSet<_> = six.iter().collect();
        assert_eq!(distinct.len(), 1395);
    }

    #[test]
    fn intersection_dimension() {
        let a = Subspace::from_strings(&["1000", "0100"]).unwrap();
        let b = Subspace::from_strings(&["1000", "0010"]).unwrap();
        assert_eq!(a.intersection_dim(&b), 1);
        assert_eq!(a.intersection_dim(&a), 2);
    }
}
