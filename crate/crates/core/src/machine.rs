//! A concrete prefix-free constructor machine and its dovetailed enumerator.
//!
//! Programs are self-delimiting bit strings over five constructors:
//!
//! | opcode | instruction | operands |
//! |--------|-------------|----------|
//! | `00`   | `BASIS(i)`  | i ≥ 1 in Elias-gamma code; i ≤ N |
//! | `01`   | `TENSOR`    | divisor selector j (Elias gamma), then a program in dimension d_j and one in N/d_j, where d_j is the j-th nontrivial divisor of N |
//! | `10`   | `WSUM(a,b)` | two literals, then two state programs; output a·v₁ + b·v₂ |
//! | `110`  | `PROJ(k)`   | k in Elias gamma (1 ≤ k ≤ N), then k state programs with independent outputs |
//! | `111`  | `PAD`       | one program, output unchanged |
//!
//! Literals use the complete prefix code `0`→1, `10`→−1, `110`→i,
//! `1110`→−i, `11110`→2, `11111`→1/2.
//!
//! The target dimension N is an input of the machine, not part of the
//! program. Every syntactically complete program is a leaf of a prefix code,
//! so the accepted set is prefix-free and its Kraft sum is at most 1.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dyadic::Dyadic;
use crate::elementary::{basis_state, exact_projector, gram_determinant, rref, ElementaryVector, GaussianRational};
use crate::error::{QaeError, Result};
use crate::linalg::{CVector, HermitianOperator};

/// Default ceiling on program length for enumeration.
pub const DEFAULT_MAX_LEN_CAP: u32 = 24;
/// Largest program length representable by the enumerator's bit packing.
const ABSOLUTE_MAX_LEN: u32 = 62;

/// Bit string program, ordered by (length, lexicographic bits).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Program(String);

impl Program {
    pub fn new(bits: impl Into<String>) -> Result<Self> {
        let bits = bits.into();
        if !bits.chars().all(|c| c == '0' || c == '1') {
            return Err(QaeError::validation(format!("program {bits:?} is not a bit string")));
        }
        Ok(Program(bits))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &str {
        &self.0
    }

    /// 2^{-l(p)}
    pub fn weight(&self) -> Option<Dyadic> {
        Dyadic::pow2_neg(self.len() as u32)
    }

    fn to_bools(&self) -> Vec<bool> {
        self.0.chars().map(|c| c == '1').collect()
    }

    fn from_packed(len: u32, value: u64) -> Self {
        Program(
            (0..len)
                .map(|i| if (value >> (len - 1 - i)) & 1 == 1 { '1' } else { '0' })
                .collect(),
        )
    }
}

impl Ord for Program {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Program {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for Program {
    type Err = QaeError;
    fn from_str(s: &str) -> Result<Self> {
        Program::new(s.trim())
    }
}

/// Weighted-sum literals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Literal {
    One,
    MinusOne,
    I,
    MinusI,
    Two,
    Half,
}

impl Literal {
    fn code(self) -> &'static str {
        match self {
            Literal::One => "0",
            Literal::MinusOne => "10",
            Literal::I => "110",
            Literal::MinusI => "1110",
            Literal::Two => "11110",
            Literal::Half => "11111",
        }
    }

    pub fn value(self) -> GaussianRational {
        match self {
            Literal::One => GaussianRational::from_int(1),
            Literal::MinusOne => GaussianRational::from_int(-1),
            Literal::I => GaussianRational::from_parts(0, 1, 1, 1),
            Literal::MinusI => GaussianRational::from_parts(0, 1, -1, 1),
            Literal::Two => GaussianRational::from_int(2),
            Literal::Half => GaussianRational::from_parts(1, 2, 0, 1),
        }
    }
}

/// Program syntax tree; [`Expr::encode`] assembles it into bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Basis(usize),
    Tensor {
        left_dim: usize,
        left: Box<Expr>,
        right: Box<Expr>,
    },
    WSum {
        a: Literal,
        b: Literal,
        left: Box<Expr>,
        right: Box<Expr>,
    },
    Proj(Vec<Expr>),
    Pad(Box<Expr>),
}

impl Expr {
    pub fn tensor(left_dim: usize, left: Expr, right: Expr) -> Expr {
        Expr::Tensor {
            left_dim,
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    pub fn wsum(a: Literal, b: Literal, left: Expr, right: Expr) -> Expr {
        Expr::WSum {
            a,
            b,
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    pub fn pad(inner: Expr) -> Expr {
        Expr::Pad(Box::new(inner))
    }

    /// Assembles the program for machine dimension `dim`.
    pub fn encode(&self, dim: usize) -> Result<Program> {
        let mut out = String::new();
        self.encode_into(dim, &mut out)?;
        Ok(Program(out))
    }

    fn encode_into(&self, dim: usize, out: &mut String) -> Result<()> {
        match self {
            Expr::Basis(i) => {
                out.push_str("00");
                out.push_str(&elias_gamma(*i as u64)?);
            }
            Expr::Tensor { left_dim, left, right } => {
                let divs = nontrivial_divisors(dim);
                let j = divs.iter().position(|d| d == left_dim).ok_or_else(|| {
                    QaeError::validation(format!("{left_dim} is not a nontrivial divisor of {dim}"))
                })?;
                out.push_str("01");
                out.push_str(&elias_gamma(j as u64 + 1)?);
                left.encode_into(*left_dim, out)?;
                right.encode_into(dim / left_dim, out)?;
            }
            Expr::WSum { a, b, left, right } => {
                out.push_str("10");
                out.push_str(a.code());
                out.push_str(b.code());
                left.encode_into(dim, out)?;
                right.encode_into(dim, out)?;
            }
            Expr::Proj(items) => {
                out.push_str("110");
                out.push_str(&elias_gamma(items.len() as u64)?);
                for it in items {
                    it.encode_into(dim, out)?;
                }
            }
            Expr::Pad(inner) => {
                out.push_str("111");
                inner.encode_into(dim, out)?;
            }
        }
        Ok(())
    }
}

/// Elias-gamma code of n ≥ 1: ⌊log₂ n⌋ zeros followed by n in binary.
pub fn elias_gamma(n: u64) -> Result<String> {
    if n == 0 {
        return Err(QaeError::validation("Elias gamma needs n >= 1"));
    }
    let bits = 64 - n.leading_zeros();
    let mut s = "0".repeat(bits as usize - 1);
    s.push_str(&format!("{n:b}"));
    Ok(s)
}

/// Divisors d of n with 1 < d < n, increasing.
pub fn nontrivial_divisors(n: usize) -> Vec<usize> {
    (2..n).filter(|d| n.is_multiple_of(*d)).collect()
}

/// What a halting program outputs, in canonical form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum MachineOutput {
    /// Canonical representative of the projective class (leading coefficient 1).
    State(ElementaryVector),
    /// Projector onto the span, stored as the reduced row echelon basis.
    Projector(Vec<ElementaryVector>),
}

impl MachineOutput {
    pub fn target_dim(&self) -> usize {
        match self {
            MachineOutput::State(v) => v.dim(),
            MachineOutput::Projector(b) => b[0].dim(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            MachineOutput::State(_) => "state",
            MachineOutput::Projector(_) => "proj",
        }
    }

    /// Canonical text: the vector encoding, or `|`-joined encodings.
    pub fn encoding(&self) -> String {
        match self {
            MachineOutput::State(v) => v.to_string(),
            MachineOutput::Projector(b) => b.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("|"),
        }
    }

    /// `<kind> <encoding>`, the key used to merge equal outputs.
    pub fn key(&self) -> String {
        format!("{} {}", self.kind(), self.encoding())
    }

    pub fn parse(kind: &str, encoding: &str) -> Result<Self> {
        match kind {
            "state" => Ok(MachineOutput::State(encoding.parse()?)),
            "proj" => {
                let basis = encoding
                    .split('|')
                    .map(str::parse)
                    .collect::<Result<Vec<ElementaryVector>>>()?;
                Ok(MachineOutput::Projector(basis))
            }
            other => Err(QaeError::validation(format!("unknown output kind {other:?}"))),
        }
    }

    /// Unit vector for a state output.
    pub fn state_vector(&self) -> Option<CVector> {
        match self {
            MachineOutput::State(v) => Some(v.normalize().expect("machine states are nonzero").into_vec()),
            MachineOutput::Projector(_) => None,
        }
    }

    /// Rank of a projector output (1 for states).
    pub fn rank(&self) -> usize {
        match self {
            MachineOutput::State(_) => 1,
            MachineOutput::Projector(b) => b.len(),
        }
    }

    /// |ψ⟩⟨ψ| for states, the orthogonal projector for projector outputs;
    /// entries are computed exactly and rounded once.
    pub fn projector(&self) -> HermitianOperator {
        let m = match self {
            MachineOutput::State(v) => exact_projector(std::slice::from_ref(v)),
            MachineOutput::Projector(b) => exact_projector(b),
        };
        HermitianOperator::from_hermitian_part(&m)
    }

    /// The output with basis coordinates relabelled by `perm` (0-based),
    /// re-canonicalized.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        Ok(match self {
            MachineOutput::State(v) => MachineOutput::State(v.permuted(perm)?.canonical().expect("nonzero")),
            MachineOutput::Projector(b) => MachineOutput::Projector(rref(
                &b.iter().map(|v| v.permuted(perm)).collect::<Result<Vec<_>>>()?,
            )),
        })
    }
}

/// Why a bit string is not an accepted program.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Reject {
    /// Bits ran out mid-instruction.
    Underflow,
    /// A complete program was followed by trailing bits.
    Overflow,
    IllFormed(String),
    /// More instructions than the step budget allows.
    StepLimit,
}

enum Value {
    State(ElementaryVector),
    Projector(Vec<ElementaryVector>),
}

struct Decoder<'a> {
    bits: &'a [bool],
    pos: usize,
    steps: u64,
    max_steps: u64,
}

impl Decoder<'_> {
    fn bit(&mut self) -> std::result::Result<bool, Reject> {
        let b = *self.bits.get(self.pos).ok_or(Reject::Underflow)?;
        self.pos += 1;
        Ok(b)
    }

    fn gamma(&mut self) -> std::result::Result<u64, Reject> {
        let mut zeros = 0u32;
        while !self.bit()? {
            zeros += 1;
            if zeros > 62 {
                return Err(Reject::IllFormed("gamma code too long".into()));
            }
        }
        let mut n = 1u64;
        for _ in 0..zeros {
            n = (n << 1) | self.bit()? as u64;
        }
        Ok(n)
    }

    fn literal(&mut self) -> std::result::Result<Literal, Reject> {
        let lits = [Literal::One, Literal::MinusOne, Literal::I, Literal::MinusI, Literal::Two];
        for lit in lits {
            if !self.bit()? {
                return Ok(lit);
            }
        }
        Ok(Literal::Half)
    }

    fn tick(&mut self) -> std::result::Result<(), Reject> {
        self.steps += 1;
        if self.steps > self.max_steps {
            return Err(Reject::StepLimit);
        }
        Ok(())
    }

    fn state(&mut self, dim: usize) -> std::result::Result<ElementaryVector, Reject> {
        match self.expr(dim)? {
            Value::State(v) => Ok(v),
            Value::Projector(_) => Err(Reject::IllFormed("projector where a state is required".into())),
        }
    }

    fn expr(&mut self, dim: usize) -> std::result::Result<Value, Reject> {
        self.tick()?;
        let op = (self.bit()?, self.bit()?);
        match op {
            (false, false) => {
                let i = self.gamma()? as usize;
                basis_state(i, dim)
                    .map(Value::State)
                    .map_err(|_| Reject::IllFormed(format!("basis index {i} exceeds dimension {dim}")))
            }
            (false, true) => {
                let j = self.gamma()? as usize;
                let divs = nontrivial_divisors(dim);
                let left_dim = *divs
                    .get(j - 1)
                    .ok_or_else(|| Reject::IllFormed(format!("no divisor #{j} of {dim}")))?;
                let left = self.state(left_dim)?;
                let right = self.state(dim / left_dim)?;
                Ok(Value::State(left.tensor(&right)))
            }
            (true, false) => {
                let a = self.literal()?;
                let b = self.literal()?;
                let left = self.state(dim)?;
                let right = self.state(dim)?;
                let v = left
                    .scale(&a.value())
                    .add(&right.scale(&b.value()))
                    .expect("same dimension");
                if v.is_zero() {
                    return Err(Reject::IllFormed("weighted sum is the zero vector".into()));
                }
                Ok(Value::State(v))
            }
            (true, true) => {
                if !self.bit()? {
                    let k = self.gamma()? as usize;
                    if k > dim {
                        return Err(Reject::IllFormed(format!("projector rank {k} exceeds dimension {dim}")));
                    }
                    let mut basis = Vec::with_capacity(k);
                    for _ in 0..k {
                        basis.push(self.state(dim)?);
                    }
                    if gram_determinant(&basis).is_zero() {
                        return Err(Reject::IllFormed("projector basis is linearly dependent".into()));
                    }
                    Ok(Value::Projector(basis))
                } else {
                    self.expr(dim)
                }
            }
        }
    }
}

/// Runs the machine on `bits` with target dimension `dim` and a step budget.
pub fn decode_with_budget(bits: &[bool], dim: usize, max_steps: u64) -> std::result::Result<MachineOutput, Reject> {
    if dim == 0 {
        return Err(Reject::IllFormed("dimension 0".into()));
    }
    let mut d = Decoder {
        bits,
        pos: 0,
        steps: 0,
        max_steps,
    };
    let value = d.expr(dim)?;
    if d.pos != bits.len() {
        return Err(Reject::Overflow);
    }
    Ok(match value {
        Value::State(v) => MachineOutput::State(v.canonical().expect("nonzero by construction")),
        Value::Projector(b) => MachineOutput::Projector(rref(&b)),
    })
}

/// Runs the machine with no step limit.
pub fn decode(program: &Program, dim: usize) -> std::result::Result<MachineOutput, Reject> {
    decode_with_budget(&program.to_bools(), dim, u64::MAX)
}

/// Enumeration budget: program length L and step count T.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub max_len: u32,
    pub max_steps: u64,
}

impl Budget {
    pub fn new(max_len: u32, max_steps: u64) -> Self {
        Budget { max_len, max_steps }
    }
}

impl fmt::Display for Budget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.max_len, self.max_steps)
    }
}

impl FromStr for Budget {
    type Err = QaeError;
    /// `L,T`
    fn from_str(s: &str) -> Result<Self> {
        let bad = || QaeError::validation(format!("budget must be L,T; got {s:?}"));
        let (l, t) = s.split_once(',').ok_or_else(bad)?;
        Ok(Budget {
            max_len: l.trim().parse().map_err(|_| bad())?,
            max_steps: t.trim().parse().map_err(|_| bad())?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SnapshotEntry {
    pub program: Program,
    pub output: MachineOutput,
    pub weight: Dyadic,
}

/// Halting table of the dovetailer at a fixed budget.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnumerationSnapshot {
    dim: usize,
    budget: Budget,
    entries: Vec<SnapshotEntry>,
    kraft_mass: Dyadic,
}

impl EnumerationSnapshot {
    /// Assembles a snapshot from entries, sorting them by (l(p), p) and
    /// checking the Kraft total.
    pub fn from_entries(dim: usize, budget: Budget, mut entries: Vec<SnapshotEntry>) -> Result<Self> {
        entries.sort_by(|a, b| a.program.cmp(&b.program));
        entries.dedup_by(|a, b| a.program == b.program);
        let mut kraft = Dyadic::ZERO;
        for e in &entries {
            if e.output.target_dim() != dim {
                return Err(QaeError::DimensionMismatch {
                    expected: dim,
                    found: e.output.target_dim(),
                });
            }
            kraft = kraft
                .checked_add(e.weight)
                .ok_or_else(|| QaeError::Integrity("Kraft mass overflow".into()))?;
        }
        if kraft > Dyadic::ONE {
            return Err(QaeError::Integrity(format!("Kraft mass {kraft} exceeds 1")));
        }
        Ok(EnumerationSnapshot {
            dim,
            budget,
            entries,
            kraft_mass: kraft,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn budget(&self) -> Budget {
        self.budget
    }

    pub fn entries(&self) -> &[SnapshotEntry] {
        &self.entries
    }

    pub fn kraft_mass(&self) -> Dyadic {
        self.kraft_mass
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Adds explicitly supplied programs (e.g. long witnesses beyond the
    /// enumeration budget). Each must decode at this dimension. The result is
    /// still a subset of the machine's prefix-free domain, so Kraft holds.
    pub fn with_programs(&self, programs: &[Program]) -> Result<Self> {
        let mut entries = self.entries.clone();
        for p in programs {
            let output = decode(p, self.dim)
                .map_err(|r| QaeError::validation(format!("program {p} rejected: {r:?}")))?;
            let weight = p
                .weight()
                .ok_or_else(|| QaeError::Resource(format!("program {p} too long for dyadic weights")))?;
            entries.push(SnapshotEntry {
                program: p.clone(),
                output,
                weight,
            });
        }
        Self::from_entries(self.dim, self.budget, entries)
    }
}

/// Visits every bit string of length ≤ L in (length, lexicographic) order,
/// runs the machine with step budget T, and keeps the accepted programs.
/// Length blocks are decoded in parallel and merged in order.
pub fn enumerate(dim: usize, budget: Budget, max_len_cap: u32) -> Result<EnumerationSnapshot> {
    if budget.max_len > max_len_cap.min(ABSOLUTE_MAX_LEN) {
        return Err(QaeError::Resource(format!(
            "program length {} exceeds cap {}",
            budget.max_len,
            max_len_cap.min(ABSOLUTE_MAX_LEN)
        )));
    }
    if dim == 0 {
        return Err(QaeError::validation("dimension must be >= 1"));
    }
    let mut entries = Vec::new();
    for len in 1..=budget.max_len {
        let count = 1u64 << len;
        let block: Vec<SnapshotEntry> = (0..count)
            .into_par_iter()
            .filter_map(|value| {
                let bits: Vec<bool> = (0..len).map(|i| (value >> (len - 1 - i)) & 1 == 1).collect();
                decode_with_budget(&bits, dim, budget.max_steps)
                    .ok()
                    .map(|output| SnapshotEntry {
                        program: Program::from_packed(len, value),
                        output,
                        weight: Dyadic::pow2_neg(len).expect("len <= 62"),
                    })
            })
            .collect();
        entries.extend(block);
    }
    EnumerationSnapshot::from_entries(dim, budget, entries)
}

/// One merged output of the semimeasure table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableEntry {
    pub output: MachineOutput,
    /// m_t(o) = Σ 2^{-l(p)} over programs producing o.
    pub mass: Dyadic,
    /// K_t(o) = shortest program length.
    pub shortest: usize,
    pub program_count: usize,
}

/// m_t and K_t over the outputs of a snapshot, in order of first appearance.
#[derive(Debug, Clone)]
pub struct SemimeasureTable {
    dim: usize,
    entries: Vec<TableEntry>,
    index: HashMap<String, usize>,
}

impl SemimeasureTable {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[TableEntry] {
        &self.entries
    }

    pub fn get(&self, output: &MachineOutput) -> Option<&TableEntry> {
        self.index.get(&output.key()).map(|&i| &self.entries[i])
    }

    pub fn total_mass(&self) -> Dyadic {
        self.entries.iter().map(|e| e.mass).sum()
    }

    /// K_t of the output, if any program in the snapshot produces it.
    pub fn complexity(&self, output: &MachineOutput) -> Option<usize> {
        self.get(output).map(|e| e.shortest)
    }

    /// Same masses attached to basis-permuted outputs, order preserved.
    pub fn permute_basis(&self, perm: &[usize]) -> Result<SemimeasureTable> {
        let mut entries = Vec::with_capacity(self.entries.len());
        let mut index = HashMap::new();
        for (i, e) in self.entries.iter().enumerate() {
            let output = e.output.permuted(perm)?;
            index.insert(output.key(), i);
            entries.push(TableEntry { output, ..e.clone() });
        }
        Ok(SemimeasureTable {
            dim: self.dim,
            entries,
            index,
        })
    }
}

/// Merges snapshot entries by canonical output.
pub fn semimeasure(snapshot: &EnumerationSnapshot) -> SemimeasureTable {
    let mut entries: Vec<TableEntry> = Vec::new();
    let mut index = HashMap::new();
    for e in snapshot.entries() {
        let key = e.output.key();
        match index.get(&key) {
            Some(&i) => {
                let t: &mut TableEntry = &mut entries[i];
                t.mass = t.mass + e.weight;
                t.shortest = t.shortest.min(e.program.len());
                t.program_count += 1;
            }
            None => {
                index.insert(key, entries.len());
                entries.push(TableEntry {
                    output: e.output.clone(),
                    mass: e.weight,
                    shortest: e.program.len(),
                    program_count: 1,
                });
            }
        }
    }
    SemimeasureTable {
        dim: snapshot.dim(),
        entries,
        index,
    }
}

/// PROJ over the symmetric spanning set of H_N^{⊗m}: for each occupation
/// pattern, the sum of the basis states it permutes to.
pub fn symmetric_projector_program(n: usize, m: u32) -> Result<Program> {
    let dim = n.pow(m);
    let mut groups: std::collections::BTreeMap<Vec<usize>, Vec<usize>> = Default::default();
    for idx in 0..dim {
        let mut digits = Vec::with_capacity(m as usize);
        let mut x = idx;
        for _ in 0..m {
            digits.push(x % n);
            x /= n;
        }
        digits.sort_unstable();
        groups.entry(digits).or_default().push(idx + 1);
    }
    let items: Vec<Expr> = groups
        .into_values()
        .map(|members| {
            let mut it = members.into_iter().rev();
            let mut acc = Expr::Basis(it.next().expect("nonempty"));
            for b in it {
                acc = Expr::wsum(Literal::One, Literal::One, Expr::Basis(b), acc);
            }
            acc
        })
        .collect();
    Expr::Proj(items).encode(dim)
}

/// Exact sum of weights over a brute-force rescan; independent of
/// [`enumerate`]'s parallel merge.
pub fn rescan_kraft_mass(dim: usize, budget: Budget) -> Dyadic {
    let mut total = Dyadic::ZERO;
    for len in 1..=budget.max_len {
        for value in 0..(1u64 << len) {
            let p = Program::from_packed(len, value);
            if decode_with_budget(&p.to_bools(), dim, budget.max_steps).is_ok() {
                total = total + Dyadic::pow2_neg(len).unwrap();
            }
        }
    }
    total
}
