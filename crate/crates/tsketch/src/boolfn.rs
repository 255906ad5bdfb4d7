//! Boolean functions with dense packed truth tables.
//!
//! Arity is capped at [`crate::MAX_ARITY`] = 24 bits, so a table is at most
//! `2^24` bits (2 MiB). Inputs are `u32` indices `x < 2^n`; bit `i` of `x` is
//! the variable `x_{i+1}`. Functions may carry a *promise mask* marking the
//! inputs on which their value is contractual; outside the mask the stored
//! value is a placeholder and error accounting skips it.

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{Error, Result, MAX_ARITY};

/// A subset of input variables, packed little-endian: bit `i` selects the
/// variable `x_{i+1}`.
///
/// 64 bits wide: truth-table work stays under [`MAX_ARITY`] = 24 variables,
/// but synthesis only manipulates subsets and wire indices, so sketches and
/// compiled circuits go up to 64 inputs.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubsetMask(pub u64);

impl SubsetMask {
    pub const EMPTY: SubsetMask = SubsetMask(0);

    /// Parity `XOR_{i in S} x_i` of input `x` over this subset.
    #[inline]
    pub fn parity(self, x: u32) -> bool {
        (self.0 & u64::from(x)).count_ones() & 1 == 1
    }

    /// Number of variables in the subset.
    pub fn weight(self) -> u32 {
        self.0.count_ones()
    }

    /// Ascending indices of the selected variables.
    pub fn bits(self) -> impl Iterator<Item = u32> {
        let m = self.0;
        (0..64).filter(move |i| m >> i & 1 == 1)
    }

    pub fn to_hex(self) -> String {
        format!("{:#x}", self.0)
    }

    pub fn from_hex(s: &str) -> Result<Self> {
        let digits = s.strip_prefix("0x").unwrap_or(s);
        u64::from_str_radix(digits, 16)
            .map(SubsetMask)
            .map_err(|e| Error::InvalidParameter(format!("bad subset mask {s:?}: {e}")))
    }
}

impl fmt::Display for SubsetMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#x}", self.0)
    }
}

impl Serialize for SubsetMask {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        ser.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for SubsetMask {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(de)?;
        SubsetMask::from_hex(&s).map_err(serde::de::Error::custom)
    }
}

/// Dense bit array of length `2^n`, little-endian within and across words.
#[derive(Clone, PartialEq, Eq)]
struct Packed {
    words: Vec<u64>,
    len: usize,
}

impl Packed {
    fn zeros(len: usize) -> Self {
        Packed { words: vec![0; len.div_ceil(64)], len }
    }

    fn from_fn(len: usize, mut f: impl FnMut(u32) -> bool) -> Self {
        let mut p = Packed::zeros(len);
        for x in 0..len {
            if f(x as u32) {
                p.set(x as u32, true);
            }
        }
        p
    }

    #[inline]
    fn get(&self, x: u32) -> bool {
        self.words[(x >> 6) as usize] >> (x & 63) & 1 == 1
    }

    fn set(&mut self, x: u32, v: bool) {
        let (w, b) = ((x >> 6) as usize, x & 63);
        if v {
            self.words[w] |= 1 << b;
        } else {
            self.words[w] &= !(1 << b);
        }
    }

    fn count_ones(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    /// Bytes of the bit array, little-endian, trimmed to `ceil(len/8)`.
    fn to_bytes(&self) -> Vec<u8> {
        let nbytes = self.len.div_ceil(8);
        let mut out = Vec::with_capacity(nbytes);
        for w in &self.words {
            out.extend_from_slice(&w.to_le_bytes());
        }
        out.truncate(nbytes);
        out
    }

    /// Hex string of the bit array read as one big integer (bit `x` has
    /// weight `2^x`), fixed width `ceil(len/4)` digits, `0x` prefix.
    fn to_hex(&self) -> String {
        let nybbles = self.len.div_ceil(4).max(1);
        let mut s = String::with_capacity(nybbles + 2);
        s.push_str("0x");
        for i in (0..nybbles).rev() {
            let x = (i * 4) as u32;
            let mut nyb = 0u8;
            for b in 0..4 {
                if (x + b) < self.len as u32 && self.get(x + b) {
                    nyb |= 1 << b;
                }
            }
            s.push(char::from_digit(nyb as u32, 16).unwrap());
        }
        s
    }

    fn from_hex(s: &str, len: usize) -> Result<Self> {
        let digits = s.strip_prefix("0x").unwrap_or(s);
        if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_hexdigit()) {
            return Err(Error::InvalidParameter(format!("bad hex table {s:?}")));
        }
        if digits.len() > len.div_ceil(4).max(1) {
            return Err(Error::InvalidParameter(format!(
                "hex table has {} digits but a {len}-bit table holds at most {}",
                digits.len(),
                len.div_ceil(4).max(1)
            )));
        }
        let mut p = Packed::zeros(len);
        for (i, c) in digits.chars().rev().enumerate() {
            let nyb = c.to_digit(16).unwrap() as u64;
            for b in 0..4 {
                let x = i * 4 + b;
                if nyb >> b & 1 == 1 {
                    if x >= len {
                        return Err(Error::InvalidParameter(format!(
                            "hex table {s:?} sets bit {x} beyond table length {len}"
                        )));
                    }
                    p.set(x as u32, true);
                }
            }
        }
        Ok(p)
    }
}

/// A Boolean function `f: {0,1}^n -> {0,1}` with an optional promise mask
/// and an optional family label.
#[derive(Clone, PartialEq, Eq)]
pub struct BooleanFunction {
    n: u32,
    table: Packed,
    promise: Option<Packed>,
    family: Option<String>,
}

fn check_arity(n: u32) -> Result<()> {
    if n == 0 || n > MAX_ARITY {
        return Err(Error::ArityOutOfRange { n, max: MAX_ARITY });
    }
    Ok(())
}

impl BooleanFunction {
    /// Builds a function by evaluating `f` on every input.
    pub fn from_fn(n: u32, f: impl FnMut(u32) -> bool) -> Result<Self> {
        check_arity(n)?;
        Ok(BooleanFunction {
            n,
            table: Packed::from_fn(1 << n, f),
            promise: None,
            family: None,
        })
    }

    /// Builds a named family member; see [`Family`].
    pub fn named(family: &Family) -> Result<Self> {
        family.build()
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Number of inputs, `2^n`.
    pub fn domain_size(&self) -> u32 {
        1 << self.n
    }

    /// Value at `x`; rejects `x >= 2^n`.
    pub fn eval(&self, x: u32) -> Result<bool> {
        if x >= self.domain_size() {
            return Err(Error::InputOutOfRange { x, n: self.n });
        }
        Ok(self.table.get(x))
    }

    /// Value at an in-range `x`. Callers guarantee `x < 2^n`.
    #[inline]
    pub fn get(&self, x: u32) -> bool {
        debug_assert!(x < self.domain_size());
        self.table.get(x)
    }

    /// True when `x` is inside the promise (always true without a mask).
    #[inline]
    pub fn in_promise(&self, x: u32) -> bool {
        self.promise.as_ref().map_or(true, |p| p.get(x))
    }

    pub fn has_promise(&self) -> bool {
        self.promise.is_some()
    }

    /// Restricts the contract to inputs where `mask` holds; stored values
    /// elsewhere become placeholders.
    pub fn with_promise(mut self, mut mask: impl FnMut(u32) -> bool) -> Self {
        self.promise = Some(Packed::from_fn(1 << self.n, &mut mask));
        self
    }

    pub fn family(&self) -> Option<&str> {
        self.family.as_deref()
    }

    pub fn set_family(&mut self, label: impl Into<String>) {
        self.family = Some(label.into());
    }

    /// Number of inputs mapped to 1.
    pub fn support_size(&self) -> u64 {
        self.table.count_ones()
    }

    /// SHA-256 of the arity byte followed by the packed table bytes.
    pub fn table_sha256(&self) -> String {
        let mut h = Sha256::new();
        h.update([self.n as u8]);
        h.update(self.table.to_bytes());
        let digest = h.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn table_hex(&self) -> String {
        self.table.to_hex()
    }

    pub fn promise_hex(&self) -> Option<String> {
        self.promise.as_ref().map(|p| p.to_hex())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&TruthTableFile {
            n: self.n,
            table: self.table.to_hex(),
            family: self.family.clone(),
            promise: self.promise.as_ref().map(|p| p.to_hex()),
        })
        .expect("truth table serialization cannot fail")
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let file: TruthTableFile = serde_json::from_str(json)?;
        check_arity(file.n)?;
        let len = 1usize << file.n;
        Ok(BooleanFunction {
            n: file.n,
            table: Packed::from_hex(&file.table, len)?,
            promise: file.promise.as_deref().map(|p| Packed::from_hex(p, len)).transpose()?,
            family: file.family,
        })
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

impl fmt::Debug for BooleanFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BooleanFunction")
            .field("n", &self.n)
            .field("family", &self.family)
            .field("support", &self.support_size())
            .field("promise", &self.promise.is_some())
            .finish()
    }
}

#[derive(Serialize, Deserialize)]
struct TruthTableFile {
    n: u32,
    table: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    family: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    promise: Option<String>,
}

/// Parity-check matrix over F2: `rows[i]` is a column mask of width `cols`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitMatrix {
    rows: Vec<u32>,
    cols: u32,
}

impl BitMatrix {
    pub fn new(rows: Vec<u32>, cols: u32) -> Result<Self> {
        if cols == 0 || cols > MAX_ARITY {
            return Err(Error::InvalidParameter(format!(
                "matrix width {cols} outside 1..={MAX_ARITY}"
            )));
        }
        if rows.is_empty() {
            return Err(Error::InvalidParameter("matrix has no rows".into()));
        }
        let width_mask = u32::MAX >> (32 - cols);
        if let Some(r) = rows.iter().find(|r| **r & !width_mask != 0) {
            return Err(Error::InvalidParameter(format!(
                "row {r:#x} has bits beyond column {cols}"
            )));
        }
        Ok(BitMatrix { rows, cols })
    }

    pub fn identity(n: u32) -> Result<Self> {
        Self::new((0..n).map(|i| 1 << i).collect(), n)
    }

    pub fn rows(&self) -> &[u32] {
        &self.rows
    }

    pub fn cols(&self) -> u32 {
        self.cols
    }

    /// F2 rank by Gaussian elimination.
    pub fn rank(&self) -> u32 {
        rank_f2(self.rows.iter().copied())
    }

    /// `Hx` over F2 is zero, i.e. every row has even overlap with `x`.
    pub fn annihilates(&self, x: u32) -> bool {
        self.rows.iter().all(|r| (r & x).count_ones() & 1 == 0)
    }
}

/// Rank of a list of F2 row vectors.
pub fn rank_f2(rows: impl IntoIterator<Item = u32>) -> u32 {
    let mut basis: Vec<u32> = Vec::new();
    for mut r in rows {
        for b in &basis {
            r = r.min(r ^ b);
        }
        if r != 0 {
            basis.push(r);
            basis.sort_unstable_by(|a, b| b.cmp(a));
        }
    }
    basis.len() as u32
}

impl Serialize for BitMatrix {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<u8>> = self
            .rows
            .iter()
            .map(|r| (0..self.cols).map(|j| (r >> j & 1) as u8).collect())
            .collect();
        rows.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for BitMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let rows: Vec<Vec<u8>> = Vec::deserialize(de)?;
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(D::Error::custom("ragged bit matrix"));
        }
        let packed: Vec<u32> = rows
            .iter()
            .map(|r| r.iter().enumerate().fold(0u32, |m, (j, &b)| m | (u32::from(b != 0) << j)))
            .collect();
        BitMatrix::new(packed, cols as u32).map_err(D::Error::custom)
    }
}

/// Named function families.
///
/// `label()` is the stable identifier used in files and reports.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Family {
    /// 1 iff some bit is set.
    Or { n: u32 },
    /// 1 iff all bits are set.
    And { n: u32 },
    /// Parity of all bits.
    Xor { n: u32 },
    /// 1 iff the Hamming weight is at most `d`.
    HammingAtMost { n: u32, d: u32 },
    /// Promise family: 1 iff `|x| <= k`, 0 iff `|x| >= 2k`, with the band
    /// `k < |x| < 2k` outside the promise. Requires `2k <= n` and `k >= 1`.
    HammingGap { n: u32, k: u32 },
    /// 1 iff `Hx = 0` over F2 for the given parity-check matrix.
    Codeword { check: BitMatrix },
    /// Input read as a `rows x cols` bit matrix (row-major, entry `(i, j)` at
    /// input bit `i*cols + j`); 1 iff all rows are identical.
    MatrixEq { rows: u32, cols: u32 },
    /// Same matrix packing; 1 iff the F2 rank is exactly 1.
    RankOne { rows: u32, cols: u32 },
    /// 1 iff the Hamming weight strictly exceeds `n/2`.
    Majority { n: u32 },
    /// On `2n` bits packed as `z = x + 2^n * y`; 1 iff `x > y` as integers.
    GreaterThan { half: u32 },
}

impl Family {
    pub fn label(&self) -> String {
        match self {
            Family::Or { n } => format!("OR_{n}"),
            Family::And { n } => format!("AND_{n}"),
            Family::Xor { n } => format!("XOR_{n}"),
            Family::HammingAtMost { n, d } => format!("HW_LE{d}_{n}"),
            Family::HammingGap { n, k } => format!("HW_GAP{k}_{n}"),
            Family::Codeword { check } => format!("CW_{}x{}", check.rows().len(), check.cols()),
            Family::MatrixEq { rows, cols } => format!("MEQ_{rows}x{cols}"),
            Family::RankOne { rows, cols } => format!("RANK1_{rows}x{cols}"),
            Family::Majority { n } => format!("MAJ_{n}"),
            Family::GreaterThan { half } => format!("GT_{half}"),
        }
    }

    /// Function arity (input bit count).
    pub fn arity(&self) -> u32 {
        match self {
            Family::Or { n }
            | Family::And { n }
            | Family::Xor { n }
            | Family::HammingAtMost { n, .. }
            | Family::HammingGap { n, .. }
            | Family::Majority { n } => *n,
            Family::Codeword { check } => check.cols(),
            Family::MatrixEq { rows, cols } | Family::RankOne { rows, cols } => rows * cols,
            Family::GreaterThan { half } => 2 * half,
        }
    }

    pub fn build(&self) -> Result<BooleanFunction> {
        let n = self.arity();
        check_arity(n)?;
        let mut f = match self {
            Family::Or { .. } => BooleanFunction::from_fn(n, |x| x != 0)?,
            Family::And { .. } => {
                let all = (1u32 << n) - 1;
                BooleanFunction::from_fn(n, |x| x == all)?
            }
            Family::Xor { .. } => BooleanFunction::from_fn(n, |x| x.count_ones() & 1 == 1)?,
            Family::HammingAtMost { d, .. } => {
                BooleanFunction::from_fn(n, |x| x.count_ones() <= *d)?
            }
            Family::HammingGap { k, .. } => {
                if *k == 0 {
                    return Err(Error::InvalidParameter("gap family needs k >= 1".into()));
                }
                if 2 * k > n {
                    return Err(Error::InvalidParameter(format!(
                        "gap family needs 2k <= n, got k={k}, n={n}"
                    )));
                }
                let mut f = BooleanFunction::from_fn(n, |x| x.count_ones() <= *k)?;
                f.promise = Some(Packed::from_fn(1 << n, |x| {
                    let w = x.count_ones();
                    w <= *k || w >= 2 * k
                }));
                f
            }
            Family::Codeword { check } => {
                BooleanFunction::from_fn(n, |x| check.annihilates(x))?
            }
            Family::MatrixEq { rows, cols } => {
                if *rows == 0 || *cols == 0 {
                    return Err(Error::InvalidParameter("matrix family needs rows, cols >= 1".into()));
                }
                let (r, c) = (*rows, *cols);
                let col_mask = (1u32 << c) - 1;
                BooleanFunction::from_fn(n, |x| {
                    let first = x & col_mask;
                    (1..r).all(|i| (x >> (i * c)) & col_mask == first)
                })?
            }
            Family::RankOne { rows, cols } => {
                if *rows == 0 || *cols == 0 {
                    return Err(Error::InvalidParameter("matrix family needs rows, cols >= 1".into()));
                }
                let (r, c) = (*rows, *cols);
                let col_mask = (1u32 << c) - 1;
                BooleanFunction::from_fn(n, |x| {
                    rank_f2((0..r).map(|i| (x >> (i * c)) & col_mask)) == 1
                })?
            }
            Family::Majority { .. } => {
                BooleanFunction::from_fn(n, |x| 2 * x.count_ones() > n)?
            }
            Family::GreaterThan { half } => {
                let h = *half;
                let lo = (1u32 << h) - 1;
                BooleanFunction::from_fn(n, |z| (z & lo) > (z >> h))?
            }
        };
        f.family = Some(self.label());
        Ok(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_rejects_out_of_range_inputs() {
        let f = Family::Or { n: 3 }.build().unwrap();
        assert!(f.eval(7).is_ok());
        assert!(matches!(f.eval(8), Err(Error::InputOutOfRange { x: 8, n: 3 })));
    }

    #[test]
    fn arity_bounds_are_enforced() {
        assert!(matches!(
            BooleanFunction::from_fn(0, |_| false),
            Err(Error::ArityOutOfRange { .. })
        ));
        assert!(matches!(
            BooleanFunction::from_fn(MAX_ARITY + 1, |_| false),
            Err(Error::ArityOutOfRange { .. })
        ));
    }

    #[test]
    fn subset_parity_is_popcount_of_intersection() {
        for mask in 0..32u32 {
            for x in 0..32u32 {
                assert_eq!(
                    SubsetMask(u64::from(mask)).parity(x),
                    (mask & x).count_ones() % 2 == 1
                );
            }
        }
    }

    #[test]
    fn table_hex_round_trips() {
        let or2 = Family::Or { n: 2 }.build().unwrap();
        assert_eq!(or2.table_hex(), "0xe");
        let or4 = Family::Or { n: 4 }.build().unwrap();
        assert_eq!(or4.table_hex(), "0xfffe");
        for n in [1u32, 3, 6, 7, 10] {
            let f = Family::Majority { n }.build().unwrap();
            let p = Packed::from_hex(&f.table_hex(), 1 << n).unwrap();
            assert!(p == f.table);
        }
    }

    #[test]
    fn hex_rejects_garbage_and_overflow() {
        assert!(Packed::from_hex("0xzz", 8).is_err());
        assert!(Packed::from_hex("", 8).is_err());
        // 3 digits describe up to 12 bits; too wide for an 8-bit table.
        assert!(Packed::from_hex("0x1ff", 8).is_err());
        // Same digit count but sets a bit beyond the table.
        assert!(Packed::from_hex("0x100", 4).is_err());
    }

    #[test]
    fn and_xor_hamming_families() {
        let and3 = Family::And { n: 3 }.build().unwrap();
        assert_eq!((0..8).filter(|&x| and3.get(x)).collect::<Vec<_>>(), vec![7]);

        let xor3 = Family::Xor { n: 3 }.build().unwrap();
        for x in 0..8 {
            assert_eq!(xor3.get(x), x.count_ones() % 2 == 1);
        }

        let hw = Family::HammingAtMost { n: 5, d: 2 }.build().unwrap();
        for x in 0..32 {
            assert_eq!(hw.get(x), x.count_ones() <= 2);
        }
    }

    #[test]
    fn hamming_gap_promise_band() {
        let f = Family::HammingGap { n: 6, k: 2 }.build().unwrap();
        for x in 0..64u32 {
            let w = x.count_ones();
            assert_eq!(f.in_promise(x), w <= 2 || w >= 4, "x={x:#b}");
            if w <= 2 {
                assert!(f.get(x));
            }
            if w >= 4 {
                assert!(!f.get(x));
            }
        }
        assert!(matches!(
            Family::HammingGap { n: 5, k: 3 }.build(),
            Err(Error::InvalidParameter(_))
        ));
        assert!(Family::HammingGap { n: 5, k: 0 }.build().is_err());
    }

    #[test]
    fn codeword_of_identity_check_is_indicator_of_zero() {
        let check = BitMatrix::identity(4).unwrap();
        let f = Family::Codeword { check }.build().unwrap();
        for x in 0..16 {
            assert_eq!(f.get(x), x == 0);
        }
    }

    #[test]
    fn codeword_respects_check_matrix() {
        // Rows x1+x2 and x3+x4: codewords are {0000, 1100, 0011, 1111}.
        let check = BitMatrix::new(vec![0b0011, 0b1100], 4).unwrap();
        let f = Family::Codeword { check }.build().unwrap();
        let code: Vec<u32> = (0..16).filter(|&x| f.get(x)).collect();
        assert_eq!(code, vec![0b0000, 0b0011, 0b1100, 0b1111]);
    }

    #[test]
    fn matrix_eq_detects_identical_rows() {
        let f = Family::MatrixEq { rows: 2, cols: 3 }.build().unwrap();
        for x in 0..64u32 {
            let (r0, r1) = (x & 0b111, x >> 3);
            assert_eq!(f.get(x), r0 == r1);
        }
    }

    #[test]
    fn rank_one_matches_gaussian_elimination() {
        let f = Family::RankOne { rows: 2, cols: 2 }.build().unwrap();
        assert!(!f.get(0b0000)); // zero matrix has rank 0
        assert!(f.get(0b0001)); // single entry
        assert!(f.get(0b0101)); // equal nonzero rows
        assert!(!f.get(0b0110)); // two independent rows
        let count = (0..16).filter(|&x| f.get(x)).count();
        // Rank-one 2x2 matrices: (2^2-1)^2 / ... enumerate: 9 outer products
        // of nonzero vectors, each distinct: 3*3 = 9.
        assert_eq!(count, 9);
    }

    #[test]
    fn majority_is_strict() {
        let f = Family::Majority { n: 4 }.build().unwrap();
        for x in 0..16u32 {
            assert_eq!(f.get(x), x.count_ones() > 2);
        }
    }

    #[test]
    fn greater_than_compares_packed_halves() {
        let f = Family::GreaterThan { half: 2 }.build().unwrap();
        assert_eq!(f.n(), 4);
        // z = x + 4y
        assert!(f.get(2 + 4 * 1)); // x=2 > y=1
        assert!(!f.get(1 + 4 * 2)); // x=1 < y=2
        assert!(!f.get(3 + 4 * 3)); // equal
        for z in 0..16u32 {
            assert_eq!(f.get(z), (z & 3) > (z >> 2));
        }
    }

    #[test]
    fn json_round_trip_preserves_everything() {
        let f = Family::HammingGap { n: 6, k: 2 }.build().unwrap();
        let back = BooleanFunction::from_json(&f.to_json()).unwrap();
        assert_eq!(back, f);
        assert_eq!(back.family(), Some("HW_GAP2_6"));
        for x in 0..64 {
            assert_eq!(back.in_promise(x), f.in_promise(x));
        }
    }

    #[test]
    fn bit_matrix_serializes_row_major() {
        let m = BitMatrix::new(vec![0b101, 0b010], 3).unwrap();
        let json = serde_json::to_string(&m).unwrap();
        assert_eq!(json, "[[1,0,1],[0,1,0]]");
        let back: BitMatrix = serde_json::from_str(&json).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn rank_f2_spot_checks() {
        assert_eq!(rank_f2([0u32, 0]), 0);
        assert_eq!(rank_f2([0b11u32, 0b11]), 1);
        assert_eq!(rank_f2([0b01u32, 0b10, 0b11]), 2);
        assert_eq!(rank_f2([0b001u32, 0b010, 0b100]), 3);
    }

    #[test]
    fn sha256_distinguishes_tables() {
        let a = Family::Or { n: 4 }.build().unwrap();
        let b = Family::And { n: 4 }.build().unwrap();
        assert_eq!(a.table_sha256(), a.table_sha256());
        assert_ne!(a.table_sha256(), b.table_sha256());
        assert_eq!(a.table_sha256().len(), 64);
    }

    #[test]
    fn family_labels_and_arity() {
        assert_eq!(Family::Or { n: 8 }.label(), "OR_8");
        assert_eq!(Family::HammingAtMost { n: 6, d: 1 }.label(), "HW_LE1_6");
        assert_eq!(Family::MatrixEq { rows: 3, cols: 2 }.label(), "MEQ_3x2");
        assert_eq!(Family::MatrixEq { rows: 3, cols: 2 }.arity(), 6);
        assert_eq!(Family::GreaterThan { half: 5 }.arity(), 10);
    }
}
