//! Geometry of the homogeneous tree seen from a fixed boundary direction.
//!
//! Vertices are addressed by digit words hanging below a truncation apex: the
//! apex sits at `base_level`, and every digit descends one level. Dropping the
//! last digit moves towards the distinguished boundary point, so the
//! predecessor of a vertex is its word minus the final digit.
//!
//! All infinite sums over the tree are organised by sphere strata: the sphere
//! of radius `k` around a vertex `y` splits into `k + 1` strata indexed by how
//! many steps `j` the geodesic climbs before descending. Stratum `(k, j)` lies
//! at level offset `2j - k` from `y`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Branching number `q` and the derived bottom of the combinatorial spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    q: u32,
    b: f64,
    ln_q: f64,
}

impl TreeParams {
    pub const MAX_Q: u32 = 36;

    pub fn new(q: u32) -> Result<Self> {
        if !(2..=Self::MAX_Q).contains(&q) {
            return Err(invalid(format!(
                "branching number q must lie in [2, {}], got {q}",
                Self::MAX_Q
            )));
        }
        let qf = f64::from(q);
        let b = (qf.sqrt() - 1.0).powi(2) / (qf + 1.0);
        Ok(Self {
            q,
            b,
            ln_q: qf.ln(),
        })
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn qf(&self) -> f64 {
        f64::from(self.q)
    }

    /// `(sqrt(q) - 1)^2 / (q + 1)`, the bottom of the spectrum of the
    /// combinatorial Laplacian.
    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn ln_q(&self) -> f64 {
        self.ln_q
    }

    /// `q^e` for a real exponent, through the logarithm.
    pub fn pow(&self, e: f64) -> f64 {
        (e * self.ln_q).exp()
    }
}

/// Position of `x` relative to `y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RelPos {
    Equal,
    /// `x` strictly above `y` (so `y <= x`).
    Ancestor,
    /// `x` strictly below `y` (so `x <= y`).
    Descendant,
    Incomparable,
}

impl RelPos {
    pub const ALL: [RelPos; 4] = [
        RelPos::Equal,
        RelPos::Ancestor,
        RelPos::Descendant,
        RelPos::Incomparable,
    ];

    /// Swap the roles of the two vertices.
    pub fn inverse(self) -> Self {
        match self {
            RelPos::Ancestor => RelPos::Descendant,
            RelPos::Descendant => RelPos::Ancestor,
            other => other,
        }
    }

    /// Relation of a vertex in sphere stratum `(k, j)` around `y`, to `y`.
    pub fn of_stratum(k: u32, j: u32) -> Self {
        if k == 0 {
            RelPos::Equal
        } else if j == k {
            RelPos::Ancestor
        } else if j == 0 {
            RelPos::Descendant
        } else {
            RelPos::Incomparable
        }
    }

    /// `y <= x`: the second vertex lies (weakly) below the first.
    pub fn second_below_first(self) -> bool {
        matches!(self, RelPos::Equal | RelPos::Ancestor)
    }

    /// `x <= y`.
    pub fn first_below_second(self) -> bool {
        matches!(self, RelPos::Equal | RelPos::Descendant)
    }

    /// Smallest distance compatible with the relation.
    pub fn min_distance(self) -> u32 {
        match self {
            RelPos::Equal => 0,
            RelPos::Ancestor | RelPos::Descendant => 1,
            RelPos::Incomparable => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            RelPos::Equal => "equal",
            RelPos::Ancestor => "ancestor",
            RelPos::Descendant => "descendant",
            RelPos::Incomparable => "incomparable",
        }
    }
}

impl fmt::Display for RelPos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RelPos {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "equal" | "eq" => Ok(RelPos::Equal),
            "ancestor" | "anc" => Ok(RelPos::Ancestor),
            "descendant" | "desc" => Ok(RelPos::Descendant),
            "incomparable" | "inc" => Ok(RelPos::Incomparable),
            other => Err(invalid(format!("unknown relation '{other}'"))),
        }
    }
}

/// A vertex of a truncated tree: apex level plus the digits of the descent.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexWord {
    base_level: i64,
    word: Vec<u8>,
}

impl VertexWord {
    pub fn apex(base_level: i64) -> Self {
        Self {
            base_level,
            word: Vec::new(),
        }
    }

    pub fn new(base_level: i64, word: Vec<u8>) -> Self {
        Self { base_level, word }
    }

    /// Build from digits, checking each one against `q`.
    pub fn with_digits(base_level: i64, word: &[u8], p: &TreeParams) -> Result<Self> {
        if let Some(&d) = word.iter().find(|&&d| u32::from(d) >= p.q()) {
            return Err(invalid(format!("digit {d} out of range for q = {}", p.q())));
        }
        Ok(Self::new(base_level, word.to_vec()))
    }

    pub fn base_level(&self) -> i64 {
        self.base_level
    }

    pub fn word(&self) -> &[u8] {
        &self.word
    }

    pub fn depth(&self) -> usize {
        self.word.len()
    }

    pub fn level(&self) -> i64 {
        self.base_level - self.word.len() as i64
    }

    pub fn predecessor(&self) -> Option<Self> {
        if self.word.is_empty() {
            return None;
        }
        let mut word = self.word.clone();
        word.pop();
        Some(Self::new(self.base_level, word))
    }

    /// The `n`-th ancestor, if the truncation holds it.
    pub fn ancestor(&self, n: usize) -> Option<Self> {
        let len = self.word.len().checked_sub(n)?;
        Some(Self::new(self.base_level, self.word[..len].to_vec()))
    }

    pub fn child(&self, digit: u8) -> Self {
        let mut word = self.word.clone();
        word.push(digit);
        Self::new(self.base_level, word)
    }

    pub fn successors(&self, p: &TreeParams) -> impl Iterator<Item = VertexWord> + '_ {
        (0..p.q() as u8).map(move |d| self.child(d))
    }

    /// All neighbours inside the truncation (predecessor first when present).
    pub fn neighbours(&self, p: &TreeParams) -> Vec<VertexWord> {
        let mut out = Vec::with_capacity(p.q() as usize + 1);
        out.extend(self.predecessor());
        out.extend(self.successors(p));
        out
    }

    fn check_apex(&self, other: &Self) -> Result<()> {
        if self.base_level != other.base_level {
            return Err(Error::MismatchedApex(self.base_level, other.base_level));
        }
        Ok(())
    }

    fn common_prefix(&self, other: &Self) -> usize {
        self.word
            .iter()
            .zip(&other.word)
            .take_while(|(a, b)| a == b)
            .count()
    }

    /// The closest common ancestor.
    pub fn meet(&self, other: &Self) -> Result<Self> {
        self.check_apex(other)?;
        let n = self.common_prefix(other);
        Ok(Self::new(self.base_level, self.word[..n].to_vec()))
    }

    pub fn distance(&self, other: &Self) -> Result<u32> {
        self.check_apex(other)?;
        let n = self.common_prefix(other);
        Ok((self.word.len() + other.word.len() - 2 * n) as u32)
    }

    /// Position of `self` relative to `other`.
    pub fn relation(&self, other: &Self) -> Result<RelPos> {
        self.check_apex(other)?;
        let n = self.common_prefix(other);
        let (a, b) = (self.word.len(), other.word.len());
        Ok(if a == b && n == a {
            RelPos::Equal
        } else if n == a {
            RelPos::Ancestor
        } else if n == b {
            RelPos::Descendant
        } else {
            RelPos::Incomparable
        })
    }
}

const DIGITS: &[u8; 36] = b"0123456789abcdefghijklmnopqrstuvwxyz";

impl fmt::Display for VertexWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.base_level)?;
        for &d in &self.word {
            write!(f, "{}", DIGITS[d as usize] as char)?;
        }
        Ok(())
    }
}

impl FromStr for VertexWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (base, digits) = s
            .split_once(':')
            .ok_or_else(|| invalid(format!("vertex '{s}' is not of the form baseLevel:digits")))?;
        let base_level: i64 = base
            .trim()
            .parse()
            .map_err(|_| invalid(format!("bad base level in '{s}'")))?;
        let word = digits
            .trim()
            .chars()
            .map(|c| {
                c.to_digit(36)
                    .map(|d| d as u8)
                    .ok_or_else(|| invalid(format!("bad digit '{c}' in '{s}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(base_level, word))
    }
}

impl Serialize for VertexWord {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for VertexWord {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One sphere stratum with its exact cardinality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SphereStratum {
    pub k: u32,
    pub j: u32,
    pub count: u128,
}

impl SphereStratum {
    pub fn level_offset(&self) -> i64 {
        2 * i64::from(self.j) - i64::from(self.k)
    }
}

fn checked_pow(q: u32, e: u32) -> Result<u128> {
    u128::from(q)
        .checked_pow(e)
        .ok_or_else(|| Error::Overflow(format!("{q}^{e}")))
}

/// `#S_k^{(j)}`: `q^k` for `j = 0`, `1` for `j = k >= 1`, `(q-1) q^{k-j-1}` in between.
pub fn sphere_stratum_count(k: u32, j: u32, p: &TreeParams) -> Result<u128> {
    if j > k {
        return Err(invalid(format!(
            "stratum index j = {j} exceeds radius k = {k}"
        )));
    }
    if j == 0 {
        checked_pow(p.q(), k)
    } else if j == k {
        Ok(1)
    } else {
        let base = checked_pow(p.q(), k - j - 1)?;
        base.checked_mul(u128::from(p.q() - 1))
            .ok_or_else(|| Error::Overflow(format!("stratum ({k}, {j})")))
    }
}

pub fn sphere_strata(k: u32, p: &TreeParams) -> Result<Vec<SphereStratum>> {
    (0..=k)
        .map(|j| {
            Ok(SphereStratum {
                k,
                j,
                count: sphere_stratum_count(k, j, p)?,
            })
        })
        .collect()
}

/// `ln #S_k^{(j)}` without integer overflow.
pub fn ln_stratum_count(k: u32, j: u32, p: &TreeParams) -> f64 {
    debug_assert!(j <= k);
    if j == 0 {
        f64::from(k) * p.ln_q()
    } else if j == k {
        0.0
    } else {
        (p.qf() - 1.0).ln() + f64::from(k - j - 1) * p.ln_q()
    }
}

/// `#S_k^{(j)} q^{j-k}`, the weight stratum `(k, j)` carries in any sum
/// `sum_x F(x, y) mu(x)` once `F` is written as `q^{-(l(x)+l(y)+k)/2}` times a
/// reduced profile. Equals 1 on the two comparable strata and `(q-1)/q` on
/// every incomparable one.
pub fn reduced_stratum_weight(k: u32, j: u32, p: &TreeParams) -> f64 {
    match RelPos::of_stratum(k, j) {
        RelPos::Incomparable => (p.qf() - 1.0) / p.qf(),
        _ => 1.0,
    }
}

/// `sum_{x in S_k(y)} q^{(l(x) - l(y))/2}`.
pub fn weighted_sphere_sum(k: u32, p: &TreeParams) -> f64 {
    let half = 0.5 * p.ln_q();
    (0..=k)
        .map(|j| {
            let off = 2.0 * f64::from(j) - f64::from(k);
            (ln_stratum_count(k, j, p) + off * half).exp()
        })
        .sum()
}

/// Closed form of [`weighted_sphere_sum`].
pub fn weighted_sphere_sum_closed(k: u32, p: &TreeParams) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let qf = p.qf();
    p.pow(0.5 * f64::from(k)) * (2.0 + f64::from(k - 1) * (qf - 1.0) / qf)
}

/// `(sum over the comparable strata j in {0, k}, max over a single stratum)`
/// of the weighted sphere sum.
pub fn restricted_sphere_sums(k: u32, p: &TreeParams) -> (f64, f64) {
    let half = 0.5 * p.ln_q();
    let term = |j: u32| {
        let off = 2.0 * f64::from(j) - f64::from(k);
        (ln_stratum_count(k, j, p) + off * half).exp()
    };
    let comparable = if k == 0 { term(0) } else { term(0) + term(k) };
    let single = (0..=k).map(term).fold(0.0, f64::max);
    (comparable, single)
}

/// Every vertex within distance `r` of `center`, each exactly once.
///
/// The center needs at least `r` digits so that the ball stays inside the
/// truncation; `limit` caps the number of vertices produced.
pub fn enumerate_ball(
    center: &VertexWord,
    r: u32,
    p: &TreeParams,
    limit: usize,
) -> Result<Vec<VertexWord>> {
    let r = r as usize;
    if center.depth() < r {
        return Err(Error::TruncationOverflow {
            vertex: center.to_string(),
            needed: r,
            available: center.depth(),
        });
    }
    let expected = ball_size(r as u32, p);
    if expected > limit as f64 {
        return Err(Error::TooLarge {
            vertices: expected.min(usize::MAX as f64) as usize,
            limit,
        });
    }
    let mut out = Vec::with_capacity(expected as usize);
    push_subtree(center, r, p, &mut out);
    for up in 1..=r {
        let anchor = center.ancestor(up).expect("depth checked above");
        let avoid = center.word()[center.depth() - up];
        out.push(anchor.clone());
        if up < r {
            for d in (0..p.q() as u8).filter(|&d| d != avoid) {
                push_subtree(&anchor.child(d), r - up - 1, p, &mut out);
            }
        }
    }
    Ok(out)
}

fn push_subtree(root: &VertexWord, depth: usize, p: &TreeParams, out: &mut Vec<VertexWord>) {
    out.push(root.clone());
    if depth > 0 {
        for child in root.successors(p) {
            push_subtree(&child, depth - 1, p, out);
        }
    }
}

/// `1 + sum_{k=1}^{r} (q+1) q^{k-1}`.
pub fn ball_size(r: u32, p: &TreeParams) -> f64 {
    let qf = p.qf();
    1.0 + (1..=r)
        .map(|k| (qf + 1.0) * qf.powi(k as i32 - 1))
        .sum::<f64>()
}

/// A class of vertices `x` sharing the same geometry relative to two anchors
/// `y` and `z`: distances, level offset and relations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairClass {
    /// Natural log of the number of vertices in the class.
    pub ln_count: f64,
    /// Distance from `x` to the geodesic `[y, z]`.
    pub r: u32,
    pub d_y: u32,
    pub d_z: u32,
    /// `l(x) - l(y)`.
    pub level_offset: i64,
    /// Position of `x` relative to `y`.
    pub rel_y: RelPos,
    /// Position of `x` relative to `z`.
    pub rel_z: RelPos,
}

/// Partition of all vertices within distance `radius` of the geodesic from `y`
/// to `z` into [`PairClass`]es.
///
/// Each `x` is attached to its closest point `x_i` on the geodesic; the branch
/// hanging off `x_i` is either one of its off-path subtrees (all below `x_i`)
/// or, at the meet of `y` and `z` only, the upward branch. The partition is
/// purely combinatorial, so it does not need the truncation to contain the
/// branches.
pub fn pair_strata(
    y: &VertexWord,
    z: &VertexWord,
    radius: u32,
    p: &TreeParams,
) -> Result<Vec<PairClass>> {
    let meet = y.meet(z)?;
    let up_y = (y.depth() - meet.depth()) as u32;
    let up_z = (z.depth() - meet.depth()) as u32;
    let total = up_y + up_z;
    let ln_q = p.ln_q();
    let q = p.q();

    let rel_path = |i: u32, up: u32| -> RelPos {
        // path vertex at index i measured from the anchor whose climb is `up`
        if i == 0 {
            RelPos::Equal
        } else if i <= up {
            RelPos::Ancestor
        } else if up == 0 {
            RelPos::Descendant
        } else {
            RelPos::Incomparable
        }
    };
    let rel_down = |i: u32, up: u32| -> RelPos {
        if i == 0 || up == 0 {
            RelPos::Descendant
        } else {
            RelPos::Incomparable
        }
    };

    let mut out = Vec::new();
    for i in 0..=total {
        let iz = total - i;
        let level_xi = if i <= up_y {
            i64::from(i)
        } else {
            2 * i64::from(up_y) - i64::from(i)
        };
        out.push(PairClass {
            ln_count: 0.0,
            r: 0,
            d_y: i,
            d_z: iz,
            level_offset: level_xi,
            rel_y: rel_path(i, up_y),
            rel_z: rel_path(iz, up_z),
        });

        let on_path_successors = u32::from(i >= 1 && i <= up_y) + u32::from(i >= up_y && i < total);
        let branches = q - on_path_successors;
        if branches > 0 {
            let rel_y = rel_down(i, up_y);
            let rel_z = rel_down(iz, up_z);
            for r in 1..=radius {
                out.push(PairClass {
                    ln_count: f64::from(branches).ln() + f64::from(r - 1) * ln_q,
                    r,
                    d_y: r + i,
                    d_z: r + iz,
                    level_offset: level_xi - i64::from(r),
                    rel_y,
                    rel_z,
                });
            }
        }

        if i == up_y {
            // upward branch from the meet
            for r in 1..=radius {
                for jp in 1..=r {
                    let (ln_count, rel) = if jp == r {
                        (0.0, RelPos::Ancestor)
                    } else {
                        (
                            (p.qf() - 1.0).ln() + f64::from(r - jp - 1) * ln_q,
                            RelPos::Incomparable,
                        )
                    };
                    out.push(PairClass {
                        ln_count,
                        r,
                        d_y: r + i,
                        d_z: r + iz,
                        level_offset: level_xi + 2 * i64::from(jp) - i64::from(r),
                        rel_y: rel,
                        rel_z: rel,
                    });
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn p(q: u32) -> TreeParams {
        TreeParams::new(q).unwrap()
    }

    fn w(s: &str) -> VertexWord {
        s.parse().unwrap()
    }

    #[test]
    fn params_validate_and_b_in_unit_interval() {
        assert!(TreeParams::new(1).is_err());
        for q in 2..=9 {
            let b = p(q).b();
            assert!(b > 0.0 && b < 1.0);
        }
        let b2 = p(2).b();
        assert!((b2 - (2f64.sqrt() - 1.0).powi(2) / 3.0).abs() < 1e-16);
    }

    #[test]
    fn level_examples() {
        assert_eq!(VertexWord::apex(0).level(), 0);
        assert_eq!(w("0:010").level(), -3);
        assert_eq!(w("5:1").level(), 4);
        let v = w("0:0110");
        assert_eq!(v.predecessor().unwrap().level(), v.level() + 1);
        assert!(VertexWord::apex(3).predecessor().is_none());
    }

    #[test]
    fn distance_examples() {
        assert_eq!(w("0:01").distance(&w("0:01")).unwrap(), 0);
        assert_eq!(w("0:0").distance(&w("0:1")).unwrap(), 2);
        assert_eq!(w("0:1").distance(&w("0:10101")).unwrap(), 4);
        assert!(matches!(
            w("0:1").distance(&w("1:1")),
            Err(Error::MismatchedApex(0, 1))
        ));
    }

    #[test]
    fn relation_examples() {
        assert_eq!(w("0:0").relation(&w("0:01")).unwrap(), RelPos::Ancestor);
        assert_eq!(w("0:01").relation(&w("0:0")).unwrap(), RelPos::Descendant);
        assert_eq!(w("0:0").relation(&w("0:1")).unwrap(), RelPos::Incomparable);
        assert_eq!(w("0:12").relation(&w("0:12")).unwrap(), RelPos::Equal);
    }

    #[test]
    fn word_round_trips_through_text() {
        let v = w("-3:0a21");
        assert_eq!(v.to_string(), "-3:0a21");
        assert_eq!(v.word(), &[0, 10, 2, 1]);
        assert!("7".parse::<VertexWord>().is_err());
        assert!("0:0!".parse::<VertexWord>().is_err());
        assert!(VertexWord::with_digits(0, &[0, 2], &p(2)).is_err());
    }

    #[test]
    fn stratum_count_examples() {
        let p2 = p(2);
        assert_eq!(sphere_stratum_count(1, 0, &p2).unwrap(), 2);
        assert_eq!(sphere_stratum_count(1, 1, &p2).unwrap(), 1);
        assert_eq!(sphere_stratum_count(3, 1, &p2).unwrap(), 2);
        let total: u128 = (0..=4)
            .map(|j| sphere_stratum_count(4, j, &p2).unwrap())
            .sum();
        assert_eq!(total, 24);
        assert_eq!(sphere_stratum_count(0, 0, &p2).unwrap(), 1);
        assert!(sphere_stratum_count(2, 3, &p2).is_err());
        assert!(sphere_stratum_count(200, 0, &p2).is_err());
    }

    #[test]
    fn weighted_sphere_examples() {
        let p2 = p(2);
        assert_eq!(weighted_sphere_sum(0, &p2), 1.0);
        assert!((weighted_sphere_sum(1, &p2) - 2.0 * 2f64.sqrt()).abs() < 1e-14);
        let (comp, single) = restricted_sphere_sums(0, &p2);
        assert_eq!((comp, single), (1.0, 1.0));
        let (comp, _) = restricted_sphere_sums(2, &p2);
        assert!((comp - 4.0).abs() < 1e-14);
    }

    #[test]
    fn weighted_sphere_comparability_sweep() {
        for q in 2..=7 {
            let pq = p(q);
            for k in 0..=60 {
                let scale = pq.pow(0.5 * f64::from(k));
                let s = weighted_sphere_sum(k, &pq);
                let closed = weighted_sphere_sum_closed(k, &pq);
                assert!((s - closed).abs() <= 1e-12 * closed);
                let ratio = s / (scale * f64::from(k + 1));
                assert!((0.25..=1.0 + 1e-12).contains(&ratio), "q={q} k={k} {ratio}");
                let (comp, single) = restricted_sphere_sums(k, &pq);
                for v in [comp / scale, single / scale] {
                    assert!((0.5 - 1e-12..=2.0 + 1e-12).contains(&v));
                }
            }
        }
    }

    fn brute_profile(center: &VertexWord, r: u32, pq: &TreeParams) -> BTreeMap<(u32, u32), u128> {
        let mut prof = BTreeMap::new();
        for x in enumerate_ball(center, r, pq, 1 << 22).unwrap() {
            let k = x.distance(center).unwrap();
            let off = x.level() - center.level();
            let j = ((i64::from(k) + off) / 2) as u32;
            *prof.entry((k, j)).or_insert(0u128) += 1;
        }
        prof
    }

    #[test]
    fn strata_match_enumeration() {
        for q in 2..=4 {
            let pq = p(q);
            let center = VertexWord::new(0, vec![0; 8]);
            let prof = brute_profile(&center, 8, &pq);
            for k in 0..=8 {
                for j in 0..=k {
                    let exact = sphere_stratum_count(k, j, &pq).unwrap();
                    assert_eq!(
                        prof.get(&(k, j)).copied().unwrap_or(0),
                        exact,
                        "q={q} k={k} j={j}"
                    );
                }
            }
        }
    }

    #[test]
    fn stratum_profile_is_base_point_independent() {
        let pq = p(3);
        let a = brute_profile(&VertexWord::new(0, vec![0; 6]), 6, &pq);
        let b = brute_profile(&VertexWord::new(4, vec![2, 1, 0, 2, 2, 1, 0]), 6, &pq);
        assert_eq!(a, b);
    }

    #[test]
    fn ball_examples() {
        let pq = p(2);
        let c = w("0:0101");
        assert_eq!(enumerate_ball(&c, 0, &pq, 10).unwrap(), vec![c.clone()]);
        assert_eq!(enumerate_ball(&c, 1, &pq, 10).unwrap().len(), 4);
        for r in 0..=4 {
            let ball = enumerate_ball(&c, r, &pq, 1000).unwrap();
            assert_eq!(ball.len() as f64, ball_size(r, &pq));
            let mut sorted = ball.clone();
            sorted.sort();
            sorted.dedup();
            assert_eq!(sorted.len(), ball.len());
            assert!(ball.iter().all(|x| x.distance(&c).unwrap() <= r));
        }
        assert!(matches!(
            enumerate_ball(&c, 5, &pq, 1000),
            Err(Error::TruncationOverflow { .. })
        ));
        assert!(matches!(
            enumerate_ball(&VertexWord::new(0, vec![0; 12]), 12, &pq, 100),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn distance_dominates_level_gap() {
        let pq = p(2);
        let center = VertexWord::new(0, vec![1; 5]);
        let ball = enumerate_ball(&center, 5, &pq, 1 << 16).unwrap();
        for u in ball.iter().step_by(7) {
            for v in ball.iter().step_by(5) {
                let d = i64::from(u.distance(v).unwrap());
                let gap = (u.level() - v.level()).abs();
                let comparable = !matches!(u.relation(v).unwrap(), RelPos::Incomparable);
                assert!(d >= gap);
                assert_eq!(d == gap, comparable);
            }
        }
    }

    type PairKey = (u32, u32, i64, RelPos, RelPos);

    fn bucket_pair(classes: &[PairClass]) -> BTreeMap<PairKey, f64> {
        let mut m = BTreeMap::new();
        for c in classes {
            *m.entry((c.d_y, c.d_z, c.level_offset, c.rel_y, c.rel_z))
                .or_insert(0.0) += c.ln_count.exp();
        }
        m
    }

    #[test]
    fn pair_strata_match_enumeration() {
        let pq = p(2);
        let cases = [
            ("0:00000000", "0:00000000"),
            ("0:00000000", "0:0000000"),
            ("0:0000000", "0:00000000"),
            ("0:00000000", "0:00000001"),
            ("0:00000000", "0:0000011"),
            ("0:0000000", "0:000000101"),
            ("0:00000000", "0:00010"),
        ];
        let radius = 3;
        for (ys, zs) in cases {
            let deep = |s: &str| w(&s.replace("0:", "0:000000"));
            let (y, z) = (deep(ys), deep(zs));
            let d = y.distance(&z).unwrap();
            let classes = pair_strata(&y, &z, radius, &pq).unwrap();
            let mut brute: BTreeMap<PairKey, f64> = BTreeMap::new();
            for x in enumerate_ball(&y, radius + d, &pq, 1 << 20).unwrap() {
                let (dy, dz) = (x.distance(&y).unwrap(), x.distance(&z).unwrap());
                if (dy + dz - d) / 2 > radius {
                    continue;
                }
                let key = (
                    dy,
                    dz,
                    x.level() - y.level(),
                    x.relation(&y).unwrap(),
                    x.relation(&z).unwrap(),
                );
                *brute.entry(key).or_insert(0.0) += 1.0;
            }
            let ours = bucket_pair(&classes);
            assert_eq!(ours.len(), brute.len(), "{ys} {zs}");
            for (k, v) in &brute {
                let got = ours.get(k).copied().unwrap_or(0.0);
                assert!((got - v).abs() < 1e-9, "{ys} {zs} {k:?}: {got} vs {v}");
            }
        }
    }
}
