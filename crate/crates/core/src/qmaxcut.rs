//! Product-state Quantum MAX-CUT on S² via the Bloch correspondence, a
//! small exact tensor oracle and the classical MAX-CUT baseline.
//!
//! All energies sum over ordered pairs: `Σ_{i,j} w_ij (…)` counts every
//! undirected edge twice.

use std::fmt::Write as _;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::measures::{draw_uniform_sphere, SeededStream};
use crate::numeric::{dot3, norm3};

/// Largest `n` accepted by [`tensor_oracle_energy`].
pub const MAX_ORACLE_QUBITS: usize = 12;
/// Largest `n` accepted by [`brute_force_maxcut`].
pub const MAX_BRUTE_FORCE: usize = 20;
/// Allowed deviation of `‖a_i‖` from 1.
pub const BLOCH_TOLERANCE: f64 = 1e-12;
/// Allowed deviation of `‖u_i‖` from 1 in the oracle.
pub const SPINOR_TOLERANCE: f64 = 1e-10;
/// Largest coordinate change treated as a local-search fixed point.
pub const FIXED_POINT_TOLERANCE: f64 = 1e-13;

/// Symmetric nonnegative weights with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    n: usize,
    w: Vec<f64>,
}

impl WeightedGraph {
    pub fn empty(n: usize) -> Self {
        Self { n, w: vec![0.0; n * n] }
    }

    /// Validates symmetry, the zero diagonal and nonnegativity.
    pub fn from_matrix(w: &[Vec<f64>]) -> Result<Self> {
        let n = w.len();
        let mut g = Self::empty(n);
        for (i, row) in w.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Invalid(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::Invalid(format!("w[{i}][{j}] = {v} must be finite and >= 0")));
                }
                if i == j && v != 0.0 {
                    return Err(Error::Invalid(format!("w[{i}][{i}] = {v} must be 0")));
                }
                if w[j][i] != v {
                    return Err(Error::Invalid(format!(
                        "w[{i}][{j}] = {v} but w[{j}][{i}] = {}",
                        w[j][i]
                    )));
                }
                g.w[i * n + j] = v;
            }
        }
        Ok(g)
    }

    /// Adds an undirected edge; self-loops and repeated edges are rejected.
    pub fn add_edge(&mut self, i: usize, j: usize, weight: f64) -> Result<()> {
        if i >= self.n || j >= self.n {
            return Err(Error::Invalid(format!(
                "edge ({i}, {j}) out of range for n = {}",
                self.n
            )));
        }
        if i == j {
            return Err(Error::Invalid(format!("self-loop at vertex {i}")));
        }
        if !(weight.is_finite() && weight >= 0.0) {
            return Err(Error::Invalid(format!("weight {weight} must be finite and >= 0")));
        }
        if self.w[i * self.n + j] != 0.0 {
            return Err(Error::Invalid(format!("duplicate edge ({i}, {j})")));
        }
        self.w[i * self.n + j] = weight;
        self.w[j * self.n + i] = weight;
        Ok(())
    }

    /// Edge-list text: `i j w` per line (0-indexed), optional `n N` line,
    /// `#` comments. Without an `n` line the vertex count is one past the
    /// largest index.
    pub fn parse(text: &str) -> Result<Self> {
        let mut declared = None;
        let mut edges: Vec<(usize, usize, usize, f64)> = Vec::new();
        for (k, raw) in text.lines().enumerate() {
            let line_no = k + 1;
            let perr = |message: String| Error::Parse { line: line_no, message };
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens[0] == "n" {
                if tokens.len() != 2 || declared.is_some() {
                    return Err(perr("expected a single `n N` line".into()));
                }
                declared = Some(
                    tokens[1]
                        .parse::<usize>()
                        .map_err(|e| perr(format!("bad vertex count: {e}")))?,
                );
                continue;
            }
            if tokens.len() != 3 {
                return Err(perr(format!("expected `i j w`, found {} fields", tokens.len())));
            }
            let i = tokens[0]
                .parse::<usize>()
                .map_err(|e| perr(format!("bad vertex `{}`: {e}", tokens[0])))?;
            let j = tokens[1]
                .parse::<usize>()
                .map_err(|e| perr(format!("bad vertex `{}`: {e}", tokens[1])))?;
            let w = tokens[2]
                .parse::<f64>()
                .map_err(|e| perr(format!("bad weight `{}`: {e}", tokens[2])))?;
            edges.push((line_no, i, j, w));
        }
        let inferred = edges.iter().map(|&(_, i, j, _)| i.max(j) + 1).max().unwrap_or(0);
        let n = match declared {
            Some(n) if n < inferred => {
                return Err(Error::Parse {
                    line: 0,
                    message: format!("declared n = {n} but an edge uses vertex {}", inferred - 1),
                })
            }
            Some(n) => n,
            None => inferred,
        };
        let mut g = Self::empty(n);
        let mut seen = vec![false; n * n];
        for (line, i, j, w) in edges {
            if i < n && j < n && i != j && seen[i * n + j] {
                return Err(Error::Parse {
                    line,
                    message: format!("duplicate edge ({i}, {j})"),
                });
            }
            g.add_edge(i, j, w).map_err(|e| Error::Parse {
                line,
                message: e.to_string(),
            })?;
            seen[i * n + j] = true;
            seen[j * n + i] = true;
        }
        Ok(g)
    }

    /// Inverse of [`WeightedGraph::parse`]; nonzero edges with `i < j`.
    pub fn to_edge_list(&self) -> String {
        let mut s = format!("n {}\n", self.n);
        for (i, j, w) in self.edges() {
            let _ = writeln!(s, "{i} {j} {w}");
        }
        s
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.w[i * self.n + j]
    }

    /// Undirected edges `(i, j, w)` with `i < j` and `w > 0`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| {
            (i + 1..self.n).filter_map(move |j| {
                let w = self.weight(i, j);
                (w > 0.0).then_some((i, j, w))
            })
        })
    }

    /// `Σ_{i,j} w_ij` over ordered pairs.
    pub fn total_weight(&self) -> f64 {
        self.w.iter().sum()
    }

    /// Uniform weights in `[0, 1)` on each edge kept with probability `density`.
    pub fn random(n: usize, density: f64, stream: &SeededStream) -> Self {
        use rand::Rng;
        let mut rng = stream.rng();
        let mut g = Self::empty(n);
        for i in 0..n {
            for j in i + 1..n {
                if rng.random::<f64>() < density {
                    let w = rng.random::<f64>();
                    g.w[i * n + j] = w;
                    g.w[j * n + i] = w;
                }
            }
        }
        g
    }
}

impl FromStr for WeightedGraph {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

/// Per-vertex unit vectors in S².
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 3]>", into = "Vec<[f64; 3]>")]
pub struct BlochAssignment(Vec<[f64; 3]>);

impl TryFrom<Vec<[f64; 3]>> for BlochAssignment {
    type Error = Error;

    fn try_from(v: Vec<[f64; 3]>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<BlochAssignment> for Vec<[f64; 3]> {
    fn from(a: BlochAssignment) -> Self {
        a.0
    }
}

impl BlochAssignment {
    pub fn new(vectors: Vec<[f64; 3]>) -> Result<Self> {
        for (i, a) in vectors.iter().enumerate() {
            let n = norm3(a);
            if !((n - 1.0).abs() <= BLOCH_TOLERANCE) {
                return Err(Error::Invalid(format!("Bloch vector {i} has norm {n}")));
            }
        }
        Ok(Self(vectors))
    }

    /// Normalizes each entry; zero vectors are rejected.
    pub fn normalized(vectors: Vec<[f64; 3]>) -> Result<Self> {
        let mut out = Vec::with_capacity(vectors.len());
        for (i, a) in vectors.iter().enumerate() {
            let n = norm3(a);
            if !(n > 0.0 && n.is_finite()) {
                return Err(Error::Invalid(format!(
                    "Bloch vector {i} cannot be normalized (norm {n})"
                )));
            }
            out.push([a[0] / n, a[1] / n, a[2] / n]);
        }
        Ok(Self(out))
    }

    pub fn random(n: usize, stream: &SeededStream) -> Self {
        let mut rng = stream.rng();
        Self((0..n).map(|_| draw_uniform_sphere(&mut rng)).collect())
    }

    /// `z_i e₃`.
    pub fn from_spins(spins: &SpinState) -> Self {
        Self(spins.0.iter().map(|&z| [0.0, 0.0, f64::from(z)]).collect())
    }

    pub fn vectors(&self) -> &[[f64; 3]] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn spinors(&self) -> Vec<Spinor> {
        self.0.iter().map(spinor_from_unit_bloch).collect()
    }
}

/// Per-vertex signs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<i8>", into = "Vec<i8>")]
pub struct SpinState(Vec<i8>);

impl SpinState {
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        if let Some(k) = spins.iter().position(|&z| z != 1 && z != -1) {
            return Err(Error::Invalid(format!("spin {k} = {} is not +1 or -1", spins[k])));
        }
        Ok(Self(spins))
    }

    /// Bit `i` of `mask` set means `z_i = −1`.
    pub fn from_mask(n: usize, mask: u32) -> Self {
        Self((0..n).map(|i| if mask >> i & 1 == 1 { -1 } else { 1 }).collect())
    }

    pub fn spins(&self) -> &[i8] {
        &self.0
    }
}

impl TryFrom<Vec<i8>> for SpinState {
    type Error = Error;

    fn try_from(v: Vec<i8>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<SpinState> for Vec<i8> {
    fn from(s: SpinState) -> Self {
        s.0
    }
}

fn check_len(graph: &WeightedGraph, len: usize) -> Result<()> {
    if graph.n() != len {
        return Err(Error::Invalid(format!(
            "graph has {} vertices, assignment has {len}",
            graph.n()
        )));
    }
    Ok(())
}

/// `Σ_{i,j} w_ij (1 − ⟨a_i, a_j⟩)` over ordered pairs.
pub fn product_state_energy(graph: &WeightedGraph, bloch: &BlochAssignment) -> Result<f64> {
    check_len(graph, bloch.len())?;
    let a = bloch.vectors();
    Ok(graph
        .edges()
        .map(|(i, j, w)| 2.0 * w * (1.0 - dot3(&a[i], &a[j])))
        .sum())
}

/// `Σ_{i,j} w_ij (1 − z_i z_j)` over ordered pairs.
pub fn maxcut_energy(graph: &WeightedGraph, spins: &SpinState) -> Result<f64> {
    check_len(graph, spins.0.len())?;
    let z = &spins.0;
    Ok(graph
        .edges()
        .map(|(i, j, w)| 2.0 * w * (1.0 - f64::from(z[i]) * f64::from(z[j])))
        .sum())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaxCut {
    pub energy: f64,
    pub spins: SpinState,
}

/// Exhaustive search with `z_{n−1} = +1` fixed (global flip symmetry).
pub fn brute_force_maxcut(graph: &WeightedGraph) -> Result<MaxCut> {
    let n = graph.n();
    if n > MAX_BRUTE_FORCE {
        return Err(Error::SizeLimit {
            what: "vertices",
            value: n,
            max: MAX_BRUTE_FORCE,
        });
    }
    if n == 0 {
        return Ok(MaxCut {
            energy: 0.0,
            spins: SpinState(Vec::new()),
        });
    }
    let edges: Vec<(usize, usize, f64)> = graph.edges().collect();
    let masks = 1u32 << (n - 1);
    let (energy, mask) = (0..masks)
        .into_par_iter()
        .map(|mask| {
            let cut: f64 = edges
                .iter()
                .filter(|&&(i, j, _)| (mask >> i ^ mask >> j) & 1 == 1)
                .map(|&(_, _, w)| 4.0 * w)
                .sum();
            (cut, mask)
        })
        .reduce(
            || (f64::NEG_INFINITY, u32::MAX),
            |a, b| {
                if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
                    b
                } else {
                    a
                }
            },
        );
    Ok(MaxCut {
        energy,
        spins: SpinState::from_mask(n, mask),
    })
}

/// Element of C².
pub type Spinor = [Complex64; 2];

/// Spinor with Bloch vector `a / ‖a‖`; zero vectors are rejected.
pub fn spinor_from_bloch(a: &[f64; 3]) -> Result<Spinor> {
    let n = norm3(a);
    if !(n > 0.0 && n.is_finite()) {
        return Err(domain("|a|", n, "finite and > 0"));
    }
    Ok(spinor_from_unit_bloch(&[a[0] / n, a[1] / n, a[2] / n]))
}

fn spinor_from_unit_bloch(a: &[f64; 3]) -> Spinor {
    let (x, y, z) = (a[0], a[1], a[2]);
    if z >= 0.0 {
        let c = ((1.0 + z) / 2.0).sqrt();
        let d = (2.0 * (1.0 + z)).sqrt();
        [Complex64::new(c, 0.0), Complex64::new(x / d, y / d)]
    } else {
        let c = ((1.0 - z) / 2.0).sqrt();
        let d = (2.0 * (1.0 - z)).sqrt();
        [Complex64::new(x / d, -y / d), Complex64::new(c, 0.0)]
    }
}

/// `(⟨X⟩, ⟨Y⟩, ⟨Z⟩) / ‖u‖²`; invariant under a global phase.
pub fn bloch_from_spinor(u: &Spinor) -> Result<[f64; 3]> {
    let n = u[0].norm_sqr() + u[1].norm_sqr();
    if !(n > 0.0 && n.is_finite()) {
        return Err(domain("|u|^2", n, "finite and > 0"));
    }
    let c = u[0].conj() * u[1];
    Ok([2.0 * c.re / n, 2.0 * c.im / n, (u[0].norm_sqr() - u[1].norm_sqr()) / n])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Pauli {
    X,
    Y,
    Z,
}

// Applies a Pauli on qubit `q` (bit `q` of the index) in place.
fn apply_pauli(state: &mut [Complex64], q: usize, p: Pauli) {
    let bit = 1usize << q;
    let i = Complex64::i();
    for k in 0..state.len() {
        if k & bit != 0 {
            continue;
        }
        let (a, b) = (state[k], state[k | bit]);
        match p {
            Pauli::X => {
                state[k] = b;
                state[k | bit] = a;
            }
            Pauli::Y => {
                state[k] = -i * b;
                state[k | bit] = i * a;
            }
            Pauli::Z => state[k | bit] = -b,
        }
    }
}

fn inner(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

/// `(⟨X⊗X⟩, ⟨Y⊗Y⟩, ⟨Z⊗Z⟩)` on `u₁ ⊗ u₂`.
pub fn pauli_pair_expectations(u1: &Spinor, u2: &Spinor) -> [f64; 3] {
    let state: Vec<Complex64> = (0..4).map(|k| u1[k & 1] * u2[k >> 1]).collect();
    [Pauli::X, Pauli::Y, Pauli::Z].map(|p| {
        let mut s = state.clone();
        apply_pauli(&mut s, 0, p);
        apply_pauli(&mut s, 1, p);
        inner(&state, &s).re
    })
}

/// `u* H u` for `u = u₁ ⊗ … ⊗ u_n` and
/// `H = Σ_{i,j} w_ij (I − X_iX_j − Y_iY_j − Z_iZ_j)`, built by applying
/// single-qubit factors to the `2^n` state vector.
pub fn tensor_oracle_energy(graph: &WeightedGraph, spinors: &[Spinor]) -> Result<f64> {
    let n = graph.n();
    if n > MAX_ORACLE_QUBITS {
        return Err(Error::SizeLimit {
            what: "qubits",
            value: n,
            max: MAX_ORACLE_QUBITS,
        });
    }
    check_len(graph, spinors.len())?;
    for (k, u) in spinors.iter().enumerate() {
        let norm = (u[0].norm_sqr() + u[1].norm_sqr()).sqrt();
        if !((norm - 1.0).abs() <= SPINOR_TOLERANCE) {
            return Err(Error::Invalid(format!("spinor {k} has norm {norm}")));
        }
    }
    let mut state = vec![Complex64::new(1.0, 0.0)];
    for u in spinors {
        state = state
            .iter()
            .map(|&s| s * u[0])
            .chain(state.iter().map(|&s| s * u[1]))
            .collect();
    }
    let norm = inner(&state, &state);
    let mut total = Complex64::new(0.0, 0.0);
    let mut scratch = vec![Complex64::new(0.0, 0.0); state.len()];
    for (i, j, w) in graph.edges() {
        let mut term = norm;
        for p in [Pauli::X, Pauli::Y, Pauli::Z] {
            scratch.copy_from_slice(&state);
            apply_pauli(&mut scratch, i, p);
            apply_pauli(&mut scratch, j, p);
            term -= inner(&state, &scratch);
        }
        total += 2.0 * w * term;
    }
    if !(total.im.abs() <= 1e-12 * (1.0 + total.re.abs())) {
        return Err(Error::Evaluation(format!("u*Hu has imaginary part {:e}", total.im)));
    }
    Ok(total.re)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalSearchResult {
    pub assignment: BlochAssignment,
    pub energy: f64,
    /// Energy after each completed sweep, starting with the initial energy.
    pub trace: Vec<f64>,
    pub sweeps: usize,
    pub converged: bool,
    /// Vertices whose neighborhood sum vanished at some update.
    pub flagged: Vec<usize>,
    pub seed: u64,
    pub stream_id: u64,
}

/// Coordinate ascent `a_i ← −Σ_j w_ij a_j / ‖·‖` from a uniform random start.
pub fn local_search(graph: &WeightedGraph, stream: &SeededStream, max_iters: usize) -> Result<LocalSearchResult> {
    local_search_from(graph, BlochAssignment::random(graph.n(), stream), max_iters, stream)
}

/// [`local_search`] from a given start.
pub fn local_search_from(
    graph: &WeightedGraph,
    start: BlochAssignment,
    max_iters: usize,
    stream: &SeededStream,
) -> Result<LocalSearchResult> {
    check_len(graph, start.len())?;
    let n = graph.n();
    let mut a = start.0;
    let mut flagged = vec![false; n];
    let mut trace = vec![product_state_energy(graph, &BlochAssignment(a.clone()))?];
    let mut converged = false;
    let mut sweeps = 0;
    while sweeps < max_iters {
        sweeps += 1;
        let mut change = 0.0f64;
        for i in 0..n {
            let mut s = [0.0; 3];
            for (j, aj) in a.iter().enumerate() {
                let w = graph.weight(i, j);
                if w != 0.0 {
                    for c in 0..3 {
                        s[c] += w * aj[c];
                    }
                }
            }
            let norm = norm3(&s);
            if norm == 0.0 {
                flagged[i] = true;
                continue;
            }
            let next = [-s[0] / norm, -s[1] / norm, -s[2] / norm];
            change = change.max((0..3).map(|c| (next[c] - a[i][c]).abs()).fold(0.0, f64::max));
            a[i] = next;
        }
        trace.push(product_state_energy(graph, &BlochAssignment(a.clone()))?);
        if change <= FIXED_POINT_TOLERANCE {
            converged = true;
            break;
        }
    }
    let energy = *trace.last().expect("trace starts non-empty");
    Ok(LocalSearchResult {
        assignment: BlochAssignment(a),
        energy,
        trace,
        sweeps,
        converged,
        flagged: (0..n).filter(|&i| flagged[i]).collect(),
        seed: stream.seed,
        stream_id: stream.stream_id,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiRestart {
    pub best: LocalSearchResult,
    pub best_restart: usize,
    pub energies: Vec<f64>,
}

/// Restart `k` runs on stream id `stream.stream_id + k`; ties go to the
/// lowest restart.
pub fn multi_restart(
    graph: &WeightedGraph,
    stream: &SeededStream,
    restarts: usize,
    max_iters: usize,
) -> Result<MultiRestart> {
    if restarts == 0 {
        return Err(Error::Invalid("at least one restart is required".into()));
    }
    let runs = (0..restarts)
        .into_par_iter()
        .map(|k| {
            local_search(
                graph,
                &stream.with_stream(stream.stream_id.wrapping_add(k as u64)),
                max_iters,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let energies: Vec<f64> = runs.iter().map(|r| r.energy).collect();
    let best_restart = (0..restarts).fold(0, |b, k| if energies[k] > energies[b] { k } else { b });
    let best = runs.into_iter().nth(best_restart).expect("index in range");
    Ok(MultiRestart {
        best,
        best_restart,
        energies,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edge() -> WeightedGraph {
        WeightedGraph::parse("0 1 1").unwrap()
    }

    fn triangle() -> WeightedGraph {
        WeightedGraph::parse("0 1 1\n1 2 1\n0 2 1\n").unwrap()
    }

    #[test]
    fn parse_format() {
        let g = WeightedGraph::parse("# comment\nn 4\n0 1 0.5 # trailing\n\n2 1 2\n").unwrap();
        assert_eq!(g.n(), 4);
        assert_eq!(g.weight(1, 0), 0.5);
        assert_eq!(g.weight(1, 2), 2.0);
        assert_eq!(WeightedGraph::parse(&g.to_edge_list()).unwrap(), g);
        for (bad, line) in [
            ("0 1 1\n1 0 2", 2),
            ("0 0 1", 1),
            ("0 1", 1),
            ("0 1 -1", 1),
            ("0 x 1", 1),
        ] {
            match WeightedGraph::parse(bad) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{bad}"),
                other => panic!("{bad}: {other:?}"),
            }
        }
        assert!(WeightedGraph::parse("n 2\n0 3 1").is_err());
    }

    #[test]
    fn matrix_validation() {
        assert!(WeightedGraph::from_matrix(&[vec![0.0, 1.0], vec![2.0, 0.0]]).is_err());
        assert!(WeightedGraph::from_matrix(&[vec![1.0, 0.0], vec![0.0, 0.0]]).is_err());
        assert!(WeightedGraph::from_matrix(&[vec![0.0, -1.0], vec![-1.0, 0.0]]).is_err());
        assert_eq!(
            WeightedGraph::from_matrix(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap(),
            edge()
        );
    }

    #[test]
    fn product_energy_examples() {
        let g = edge();
        let anti = BlochAssignment::new(vec![[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]]).unwrap();
        assert_eq!(product_state_energy(&g, &anti).unwrap(), 4.0);
        let same = BlochAssignment::new(vec![[1.0, 0.0, 0.0]; 2]).unwrap();
        assert_eq!(product_state_energy(&g, &same).unwrap(), 0.0);
        assert!(product_state_energy(&triangle(), &same).is_err());
        assert!(BlochAssignment::new(vec![[1.0, 1.0, 0.0]]).is_err());
    }

    #[test]
    fn oracle_matches_bloch_formula() {
        for k in 0..100u64 {
            let n = 1 + (k % 6) as usize;
            let g = WeightedGraph::random(n, 0.7, &SeededStream::new(k, 0));
            let a = BlochAssignment::random(n, &SeededStream::new(k, 1));
            let bloch = product_state_energy(&g, &a).unwrap();
            let oracle = tensor_oracle_energy(&g, &a.spinors()).unwrap();
            assert!((bloch - oracle).abs() <= 1e-10, "k = {k}: {bloch} vs {oracle}");
        }
        let one = WeightedGraph::empty(1);
        assert_eq!(
            tensor_oracle_energy(&one, &[[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]]).unwrap(),
            0.0
        );
    }

    #[test]
    fn oracle_limits() {
        let g = WeightedGraph::empty(13);
        let a = BlochAssignment::random(13, &SeededStream::new(0, 0));
        assert!(matches!(
            tensor_oracle_energy(&g, &a.spinors()),
            Err(Error::SizeLimit { .. })
        ));
        let bad = [[Complex64::new(2.0, 0.0), Complex64::new(0.0, 0.0)]; 2];
        assert!(tensor_oracle_energy(&edge(), &bad).is_err());
    }

    #[test]
    fn spinor_roundtrip_and_phase() {
        let north = spinor_from_bloch(&[0.0, 0.0, 1.0]).unwrap();
        assert_eq!(north, [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
        assert_eq!(bloch_from_spinor(&north).unwrap(), [0.0, 0.0, 1.0]);
        let a = BlochAssignment::random(200, &SeededStream::new(9, 0));
        for (k, v) in a.vectors().iter().enumerate() {
            let u = spinor_from_bloch(v).unwrap();
            let phase = Complex64::from_polar(1.0, 0.37 * k as f64);
            let back = bloch_from_spinor(&[u[0] * phase, u[1] * phase]).unwrap();
            for c in 0..3 {
                assert!((back[c] - v[c]).abs() < 1e-12);
            }
        }
        for pole in [[0.0, 0.0, -1.0], [1.0, 0.0, 0.0], [0.0, -1.0, 0.0]] {
            let back = bloch_from_spinor(&spinor_from_bloch(&pole).unwrap()).unwrap();
            assert!((0..3).all(|c| (back[c] - pole[c]).abs() < 1e-15));
        }
        assert!(spinor_from_bloch(&[0.0; 3]).is_err());
        assert!(bloch_from_spinor(&[Complex64::new(0.0, 0.0); 2]).is_err());
    }

    #[test]
    fn coupling_expectations_sum_to_inner_product() {
        let a = BlochAssignment::random(40, &SeededStream::new(12, 0));
        for pair in a.vectors().chunks(2) {
            let e = pauli_pair_expectations(
                &spinor_from_bloch(&pair[0]).unwrap(),
                &spinor_from_bloch(&pair[1]).unwrap(),
            );
            assert!((e.iter().sum::<f64>() - dot3(&pair[0], &pair[1])).abs() < 1e-12);
        }
    }

    #[test]
    fn maxcut_examples() {
        let g = edge();
        assert_eq!(maxcut_energy(&g, &SpinState::new(vec![1, 1]).unwrap()).unwrap(), 0.0);
        let best = brute_force_maxcut(&g).unwrap();
        assert_eq!(best.energy, 4.0);
        assert_eq!(best.spins.spins(), &[-1, 1]);
        assert_eq!(brute_force_maxcut(&triangle()).unwrap().energy, 8.0);
        assert!(SpinState::new(vec![0]).is_err());
        assert!(brute_force_maxcut(&WeightedGraph::empty(21)).is_err());
    }

    #[test]
    fn spin_embedding_is_exact() {
        for k in 0..20u64 {
            let g = WeightedGraph::random(7, 0.6, &SeededStream::new(k, 3));
            let z = SpinState::from_mask(7, (k * 37 % 128) as u32);
            assert_eq!(
                maxcut_energy(&g, &z).unwrap(),
                product_state_energy(&g, &BlochAssignment::from_spins(&z)).unwrap()
            );
        }
    }

    #[test]
    fn local_search_examples() {
        let s = SeededStream::new(5, 0);
        let e = multi_restart(&edge(), &s, 4, 200).unwrap();
        assert!((e.best.energy - 4.0).abs() < 1e-12);
        let t = multi_restart(&triangle(), &s, 8, 2000).unwrap();
        assert!((t.best.energy - 9.0).abs() < 1e-9, "{}", t.best.energy);
        let a = t.best.assignment.vectors();
        for (i, j) in [(0, 1), (1, 2), (0, 2)] {
            assert!((dot3(&a[i], &a[j]) + 0.5).abs() < 1e-6);
        }
    }

    #[test]
    fn local_search_is_monotone_and_beats_maxcut() {
        for k in 0..50u64 {
            let n = 3 + (k % 8) as usize;
            let g = WeightedGraph::random(n, 0.5, &SeededStream::new(k, 7));
            let r = local_search(&g, &SeededStream::new(k, 8), 500).unwrap();
            assert!(
                r.trace.windows(2).all(|w| w[1] >= w[0] - 1e-12 * (1.0 + w[0])),
                "{:?}",
                r.trace
            );
            if n <= 8 {
                let best = multi_restart(&g, &SeededStream::new(k, 9), 8, 500).unwrap();
                assert!(brute_force_maxcut(&g).unwrap().energy <= best.best.energy + 1e-9);
            }
        }
    }

    #[test]
    fn isolated_vertex_is_flagged() {
        let g = WeightedGraph::parse("n 3\n0 1 1").unwrap();
        let r = local_search(&g, &SeededStream::new(0, 0), 50).unwrap();
        assert_eq!(r.flagged, vec![2]);
        assert!((r.energy - 4.0).abs() < 1e-12);
    }

    #[test]
    fn restarts_are_deterministic() {
        let g = WeightedGraph::random(9, 0.5, &SeededStream::new(1, 1));
        let s = SeededStream::new(77, 3);
        assert_eq!(
            multi_restart(&g, &s, 6, 300).unwrap(),
            multi_restart(&g, &s, 6, 300).unwrap()
        );
    }
}
