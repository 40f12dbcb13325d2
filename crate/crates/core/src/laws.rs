//! Split-point laws.
//!
//! A continuous law describes how a parent interval is cut into `b` children
//! and is summarised by `F(x)`, the expected number of children shorter than
//! `x` times the parent length, and its density `f = F'`. Discrete laws cut an
//! integer mass `s` into a smaller ("black") piece `i ∈ {1, …, ⌊s/2⌋}` and the
//! remaining larger ("white") piece `s - i`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::distributions::Open01;
use rand::Rng;
use rand_distr::{Distribution, Zeta};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quad::{integrate, kronrod_panel, zeta, zeta_tail};

/// Parent sizes below this use the exactly summed normalizer `Z_s`.
pub const DIRECT_NORMALIZER_CUTOFF: u64 = 10_000;

/// Number of cells in the cumulative table of a custom density.
pub const CUSTOM_TABLE_CELLS: usize = 1 << 12;

/// Serializable description of a [`SplitLaw`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum LawDescriptor {
    #[serde(rename = "kakutani")]
    Kakutani,
    #[serde(rename = "buniform")]
    BUniform { b: u32 },
    #[serde(rename = "mary")]
    MAry { m: u32 },
    /// Polynomial density `f(x) = Σ density[k] x^k` with `F(1) = b`.
    #[serde(rename = "custom")]
    Custom { b: u32, density: Vec<f64> },
    #[serde(rename = "heavy_tail")]
    HeavyTail { alpha: f64 },
    #[serde(rename = "catalan")]
    Catalan,
}

/// A polynomial child-length density with a precomputed cumulative table.
#[derive(Debug, Clone)]
pub struct CustomDensity {
    coefficients: Vec<f64>,
    b: u32,
    /// `F` at the table nodes `k / CUSTOM_TABLE_CELLS`.
    table: Arc<Vec<f64>>,
}

impl CustomDensity {
    pub fn new(coefficients: Vec<f64>, b: u32) -> Result<Self> {
        if b < 2 {
            return Err(invalid("b", "a split must produce at least two children"));
        }
        if coefficients.is_empty() {
            return Err(invalid("density", "no polynomial coefficients"));
        }
        let f = |x: f64| horner(&coefficients, x);
        let min = (0..256)
            .map(|i| f(i as f64 / 256.0))
            .fold(f64::INFINITY, f64::min);
        if !(min > 0.0) || f(1.0) < 0.0 {
            return Err(invalid(
                "density",
                format!("density must be positive on [0, 1); minimum sampled value {min}"),
            ));
        }
        let mut ys = Vec::with_capacity(CUSTOM_TABLE_CELLS + 1);
        let mut acc = 0.0;
        ys.push(0.0);
        for k in 0..CUSTOM_TABLE_CELLS {
            let a = k as f64 / CUSTOM_TABLE_CELLS as f64;
            let c = (k + 1) as f64 / CUSTOM_TABLE_CELLS as f64;
            acc += integrate(f, a, c, 1e-13, 1e-16)?.value;
            ys.push(acc);
        }
        if (acc - b as f64).abs() > 1e-9 * b as f64 {
            return Err(invalid(
                "density",
                format!("density integrates to {acc}, expected b = {b}"),
            ));
        }
        let mass = integrate(|x| x * f(x), 0.0, 1.0, 1e-13, 1e-16)?.value;
        if (mass - 1.0).abs() > 1e-9 {
            return Err(invalid(
                "density",
                format!("children carry expected total length {mass}, expected 1"),
            ));
        }
        Ok(Self {
            coefficients,
            b,
            table: Arc::new(ys),
        })
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    fn density(&self, x: f64) -> f64 {
        horner(&self.coefficients, x)
    }

    fn cumulative(&self, x: f64) -> f64 {
        let cells = CUSTOM_TABLE_CELLS as f64;
        let k = ((x * cells).floor() as usize).min(CUSTOM_TABLE_CELLS - 1);
        let node = k as f64 / cells;
        self.table[k] + kronrod_panel(|t| self.density(t), node, x)
    }

    fn is_symmetric(&self) -> bool {
        (0..=64).all(|i| {
            let x = i as f64 / 64.0;
            (self.density(x) - self.density(1.0 - x)).abs() <= 1e-9 * self.density(x).abs()
        })
    }

    /// Solves `F(u) = target` on `[0, 1]`; `F` is strictly increasing.
    fn invert(&self, target: f64) -> f64 {
        let ys = &self.table;
        let k = ys.partition_point(|&v| v < target).clamp(1, ys.len() - 1);
        let cells = CUSTOM_TABLE_CELLS as f64;
        let (mut lo, mut hi) = ((k - 1) as f64 / cells, k as f64 / cells);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if self.cumulative(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * x + a)
}

/// A split-point law.
#[derive(Debug, Clone)]
pub enum SplitLaw {
    /// Binary split at a uniform point: `F(x) = 2x`.
    Kakutani,
    /// `b - 1` independent uniform division points.
    BUniform {
        b: u32,
    },
    /// Child density `m(m-1)(1-x)^{m-2}` (the `m`-ary search tree law).
    MAry {
        m: u32,
    },
    Custom(CustomDensity),
    /// Integer masses; smaller piece `i` with probability `∝ i^{-alpha}`.
    HeavyTail {
        alpha: f64,
    },
    /// Integer masses split by the root of a uniformly random binary tree.
    CatalanFringe,
}

impl PartialEq for SplitLaw {
    fn eq(&self, other: &Self) -> bool {
        self.descriptor() == other.descriptor()
    }
}

impl SplitLaw {
    pub fn b_uniform(b: u32) -> Result<Self> {
        Self::try_from(LawDescriptor::BUniform { b })
    }

    pub fn m_ary(m: u32) -> Result<Self> {
        Self::try_from(LawDescriptor::MAry { m })
    }

    pub fn heavy_tail(alpha: f64) -> Result<Self> {
        Self::try_from(LawDescriptor::HeavyTail { alpha })
    }

    pub fn custom(density: Vec<f64>, b: u32) -> Result<Self> {
        Ok(SplitLaw::Custom(CustomDensity::new(density, b)?))
    }

    pub fn descriptor(&self) -> LawDescriptor {
        match self {
            SplitLaw::Kakutani => LawDescriptor::Kakutani,
            SplitLaw::BUniform { b } => LawDescriptor::BUniform { b: *b },
            SplitLaw::MAry { m } => LawDescriptor::MAry { m: *m },
            SplitLaw::Custom(c) => LawDescriptor::Custom {
                b: c.b,
                density: c.coefficients.clone(),
            },
            SplitLaw::HeavyTail { alpha } => LawDescriptor::HeavyTail { alpha: *alpha },
            SplitLaw::CatalanFringe => LawDescriptor::Catalan,
        }
    }

    pub fn is_continuous(&self) -> bool {
        !matches!(self, SplitLaw::HeavyTail { .. } | SplitLaw::CatalanFringe)
    }

    /// Number of children per split, `b = F(1)`.
    pub fn children(&self) -> u32 {
        match self {
            SplitLaw::Kakutani => 2,
            SplitLaw::BUniform { b } => *b,
            SplitLaw::MAry { m } => *m,
            SplitLaw::Custom(c) => c.b,
            SplitLaw::HeavyTail { .. } | SplitLaw::CatalanFringe => 2,
        }
    }

    fn require_continuous(&self, op: &str) -> Result<()> {
        if self.is_continuous() {
            Ok(())
        } else {
            Err(Error::Unsupported {
                law: self.to_string(),
                reason: format!("{op} needs a continuous law"),
            })
        }
    }

    fn require_discrete(&self, op: &str) -> Result<()> {
        if self.is_continuous() {
            Err(Error::Unsupported {
                law: self.to_string(),
                reason: format!("{op} needs a discrete law"),
            })
        } else {
            Ok(())
        }
    }

    /// Expected number of children shorter than `x` (relative to the parent).
    pub fn expected_count(&self, x: f64) -> Result<f64> {
        self.require_continuous("expected_count")?;
        check_unit(x)?;
        Ok(self.expected_count_unchecked(x))
    }

    /// `F(x)` without argument checks. Only meaningful for continuous laws.
    pub(crate) fn expected_count_unchecked(&self, x: f64) -> f64 {
        match self {
            SplitLaw::Kakutani => 2.0 * x,
            SplitLaw::BUniform { b: k } | SplitLaw::MAry { m: k } => {
                let k = *k as f64;
                k * (1.0 - (1.0 - x).powf(k - 1.0))
            }
            SplitLaw::Custom(c) => c.cumulative(x),
            SplitLaw::HeavyTail { .. } | SplitLaw::CatalanFringe => f64::NAN,
        }
    }

    /// Child-length density `f(x) = F'(x)`.
    pub fn density(&self, x: f64) -> Result<f64> {
        self.require_continuous("density")?;
        check_unit(x)?;
        Ok(self.density_unchecked(x))
    }

    pub(crate) fn density_unchecked(&self, x: f64) -> f64 {
        match self {
            SplitLaw::Kakutani => 2.0,
            SplitLaw::BUniform { b: k } | SplitLaw::MAry { m: k } => {
                let k = *k as f64;
                k * (k - 1.0) * (1.0 - x).powf(k - 2.0)
            }
            SplitLaw::Custom(c) => c.density(x),
            SplitLaw::HeavyTail { .. } | SplitLaw::CatalanFringe => f64::NAN,
        }
    }

    /// Draws the `b - 1` sorted division offsets inside a parent of the given
    /// length. `out` is cleared first.
    pub fn sample_split<R: Rng + ?Sized>(
        &self,
        parent_length: f64,
        rng: &mut R,
        out: &mut Vec<f64>,
    ) -> Result<()> {
        self.require_continuous("sample_split")?;
        if !(parent_length > 0.0) || !parent_length.is_finite() {
            return Err(invalid(
                "parent_length",
                format!("{parent_length} is not positive"),
            ));
        }
        out.clear();
        match self {
            SplitLaw::Kakutani => {
                let u: f64 = rng.sample(Open01);
                out.push(u * parent_length);
            }
            SplitLaw::BUniform { b: k } | SplitLaw::MAry { m: k } => {
                for _ in 1..*k {
                    let u: f64 = rng.sample(Open01);
                    out.push(u * parent_length);
                }
                out.sort_unstable_by(f64::total_cmp);
            }
            SplitLaw::Custom(c) => {
                if c.b != 2 || !c.is_symmetric() {
                    return Err(Error::Unsupported {
                        law: self.to_string(),
                        reason: "sampling a custom density needs b = 2 and f(x) = f(1 - x)".into(),
                    });
                }
                let v: f64 = rng.sample(Open01);
                let u = c
                    .invert(2.0 * v)
                    .clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON);
                out.push(u * parent_length);
            }
            SplitLaw::HeavyTail { .. } | SplitLaw::CatalanFringe => unreachable!(),
        }
        Ok(())
    }

    /// Builds a reusable sampler for the smaller piece of a discrete split.
    pub fn discrete_sampler(&self) -> Result<DiscreteSampler> {
        self.require_discrete("discrete_sampler")?;
        let proposal = match self {
            SplitLaw::HeavyTail { alpha } => *alpha,
            _ => 1.5,
        };
        Ok(DiscreteSampler {
            zeta: Zeta::new(proposal).map_err(|e| invalid("alpha", e.to_string()))?,
            catalan: matches!(self, SplitLaw::CatalanFringe),
        })
    }

    /// `p_i` for the smaller piece `i = 1..=⌊s/2⌋` of a parent of size `s`
    /// (index `i - 1`). Sums to one.
    pub fn smaller_piece_pmf(&self, parent: u64) -> Result<Vec<f64>> {
        self.require_discrete("smaller_piece_pmf")?;
        check_splittable(parent)?;
        let half = parent / 2;
        Ok(match self {
            SplitLaw::HeavyTail { alpha } => {
                let z = heavy_tail_normalizer(*alpha, parent);
                (1..=half).map(|i| (i as f64).powf(-alpha) / z).collect()
            }
            SplitLaw::CatalanFringe => (1..=half)
                .map(|i| catalan_smaller_piece(parent, i))
                .collect(),
            _ => unreachable!(),
        })
    }

    /// Symmetric two-sided split law: probability that a designated piece of a
    /// parent of size `s` has size `i`, for `i = 1..s-1` (index `i - 1`).
    /// Satisfies `p_i = p_{s-i}`.
    pub fn split_pmf(&self, parent: u64) -> Result<Vec<f64>> {
        let smaller = self.smaller_piece_pmf(parent)?;
        Ok((1..parent)
            .map(|i| {
                let j = i.min(parent - i);
                let q = smaller[(j - 1) as usize];
                if 2 * j == parent {
                    q
                } else {
                    0.5 * q
                }
            })
            .collect())
    }
}

/// Normalizer `Z_s = Σ_{i=1}^{⌊s/2⌋} i^{-α}` for a parent of size `s`.
///
/// Summed directly below [`DIRECT_NORMALIZER_CUTOFF`]; above it the constant
/// `ζ(α)` is used with its Euler–Maclaurin tail removed.
pub fn heavy_tail_normalizer(alpha: f64, parent: u64) -> f64 {
    let half = parent / 2;
    if parent < DIRECT_NORMALIZER_CUTOFF {
        (1..=half).map(|i| (i as f64).powf(-alpha)).sum()
    } else {
        zeta(alpha) - zeta_tail(alpha, half + 1)
    }
}

/// `ln C_n` for the Catalan number `C_n = binom(2n, n) / (n + 1)`.
pub fn ln_catalan(n: u64) -> f64 {
    let n = n as f64;
    libm::lgamma(2.0 * n + 1.0) - 2.0 * libm::lgamma(n + 1.0) - (n + 1.0).ln()
}

/// Probability that the smaller piece of a Catalan split of `parent` leaves
/// has size `i` (ties at `2i = parent` counted once).
fn catalan_smaller_piece(parent: u64, i: u64) -> f64 {
    let k = parent - 1;
    let p = (ln_catalan(i - 1) + ln_catalan(k - i) - ln_catalan(k)).exp();
    if 2 * i == parent {
        p
    } else {
        2.0 * p
    }
}

/// Sampler for the smaller piece of an integer split. Heavy-tailed laws use
/// rejection from `Zeta(α)` restricted to `i ≤ ⌊s/2⌋`, which is exact for the
/// truncated law. Catalan splits thin a `Zeta(3/2)` proposal.
#[derive(Debug, Clone)]
pub struct DiscreteSampler {
    zeta: Zeta<f64>,
    catalan: bool,
}

impl DiscreteSampler {
    pub fn sample<R: Rng + ?Sized>(&self, parent: u64, rng: &mut R) -> Result<u64> {
        check_splittable(parent)?;
        let half = parent / 2;
        if half == 1 {
            return Ok(1);
        }
        loop {
            let i = self.truncated(half, rng);
            if !self.catalan {
                return Ok(i);
            }
            // Target ∝ w_i i^{-3/2}; w_i is bounded by `catalan_envelope`.
            let u: f64 = rng.sample(Open01);
            if u.ln() < catalan_log_weight(parent, i) - catalan_envelope(parent) {
                return Ok(i);
            }
        }
    }

    fn truncated<R: Rng + ?Sized>(&self, half: u64, rng: &mut R) -> u64 {
        loop {
            let x: f64 = self.zeta.sample(rng);
            if x <= half as f64 {
                return x as u64;
            }
        }
    }
}

const LN4: f64 = 1.386_294_361_119_890_6;

// ln of q_i i^{3/2} with the 4^{s-2} factor of the Catalan numbers removed.
fn catalan_log_weight(parent: u64, i: u64) -> f64 {
    let j = parent - 1 - i;
    let tie = if 2 * i == parent {
        0.0
    } else {
        std::f64::consts::LN_2
    };
    tie + ln_catalan(i - 1) + 1.5 * (i as f64).ln() - (i - 1) as f64 * LN4 + ln_catalan(j)
        - j as f64 * LN4
}

// C_{i-1} i^{3/2} / 4^{i-1} ≤ 1 and C_j / 4^j decreases in j, so the weight is
// at most 2 C_{j0} / 4^{j0} with j0 the smallest reachable j.
fn catalan_envelope(parent: u64) -> f64 {
    let j0 = parent - 1 - parent / 2;
    std::f64::consts::LN_2 + ln_catalan(j0) - j0 as f64 * LN4
}

fn check_unit(x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::Domain {
            what: "x",
            value: x,
            domain: "[0, 1]",
        })
    }
}

fn check_splittable(parent: u64) -> Result<()> {
    if parent < 2 {
        Err(invalid(
            "parent",
            format!("a mass of size {parent} cannot be split"),
        ))
    } else {
        Ok(())
    }
}

impl TryFrom<LawDescriptor> for SplitLaw {
    type Error = Error;

    fn try_from(d: LawDescriptor) -> Result<Self> {
        Ok(match d {
            LawDescriptor::Kakutani => SplitLaw::Kakutani,
            LawDescriptor::BUniform { b } => {
                if b < 2 {
                    return Err(invalid("b", format!("{b} < 2")));
                }
                SplitLaw::BUniform { b }
            }
            LawDescriptor::MAry { m } => {
                if m < 2 {
                    return Err(invalid("m", format!("{m} < 2")));
                }
                SplitLaw::MAry { m }
            }
            LawDescriptor::Custom { b, density } => SplitLaw::custom(density, b)?,
            LawDescriptor::HeavyTail { alpha } => {
                if !(alpha > 1.0 && alpha < 2.0) {
                    return Err(invalid("alpha", format!("{alpha} is not in (1, 2)")));
                }
                SplitLaw::HeavyTail { alpha }
            }
            LawDescriptor::Catalan => SplitLaw::CatalanFringe,
        })
    }
}

impl Serialize for SplitLaw {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        self.descriptor().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SplitLaw {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let d = LawDescriptor::deserialize(deserializer)?;
        SplitLaw::try_from(d).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for SplitLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SplitLaw::Kakutani => write!(f, "kakutani"),
            SplitLaw::BUniform { b } => write!(f, "buniform{b}"),
            SplitLaw::MAry { m } => write!(f, "mary{m}"),
            SplitLaw::Custom(c) => write!(f, "custom(b={}, {:?})", c.b, c.coefficients),
            SplitLaw::HeavyTail { alpha } => write!(f, "heavy{alpha}"),
            SplitLaw::CatalanFringe => write!(f, "catalan"),
        }
    }
}

/// Parses short names (`kakutani`, `buniform3`, `mary4`, `heavy1.5`,
/// `catalan`) or a JSON descriptor.
impl FromStr for SplitLaw {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.starts_with('{') {
            let d: LawDescriptor = serde_json::from_str(s)
                .map_err(|e| invalid("law", format!("bad descriptor: {e}")))?;
            return SplitLaw::try_from(d);
        }
        let lower = s.to_ascii_lowercase();
        let num = |prefix: &str| {
            lower[prefix.len()..]
                .trim_start_matches([':', '='])
                .to_owned()
        };
        let bad = || invalid("law", format!("unknown law `{s}`"));
        match lower.as_str() {
            "kakutani" | "binary" => Ok(SplitLaw::Kakutani),
            "ternary" => SplitLaw::b_uniform(3),
            "catalan" => Ok(SplitLaw::CatalanFringe),
            _ if lower.starts_with("buniform") => {
                SplitLaw::b_uniform(num("buniform").parse().map_err(|_| bad())?)
            }
            _ if lower.starts_with("mary") => {
                SplitLaw::m_ary(num("mary").parse().map_err(|_| bad())?)
            }
            _ if lower.starts_with("heavy") => {
                let rest = num("heavy");
                let rest = rest
                    .trim_start_matches("_tail")
                    .trim_start_matches([':', '=']);
                SplitLaw::heavy_tail(rest.parse().map_err(|_| bad())?)
            }
            _ => Err(bad()),
        }
    }
}
