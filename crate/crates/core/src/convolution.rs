//! Zeta/Möbius transforms over closure-difference set families, cover products,
//! and ∨-products over powers of a finite lattice.

use std::fmt::Debug;
use std::ops::{Add, Mul, Sub};

use num_traits::{CheckedAdd, CheckedMul, CheckedSub, One, Zero};
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::error::ConvError;

/// Largest universe a [`SetFamily`] may use.
pub const MAX_UNIVERSE: usize = 28;

/// Commutative ring used by the transforms. Overflow surfaces as an error.
pub trait Ring: Copy + PartialEq + Debug + Send + Sync + Zero + One + CheckedAdd + CheckedSub + CheckedMul {}

impl<T> Ring for T where T: Copy + PartialEq + Debug + Send + Sync + Zero + One + CheckedAdd + CheckedSub + CheckedMul {}

fn radd<R: Ring>(a: R, b: R) -> Result<R, ConvError> {
    a.checked_add(&b).ok_or(ConvError::Overflow)
}

fn rsub<R: Ring>(a: R, b: R) -> Result<R, ConvError> {
    a.checked_sub(&b).ok_or(ConvError::Overflow)
}

fn rmul<R: Ring>(a: R, b: R) -> Result<R, ConvError> {
    a.checked_mul(&b).ok_or(ConvError::Overflow)
}

/// Image of an integer in `R`, by double-and-add on `one`.
pub fn ring_from_i64<R: Ring>(x: i64) -> Result<R, ConvError> {
    let mut acc = R::zero();
    let mut base = R::one();
    let mut m = x.unsigned_abs();
    while m > 0 {
        if m & 1 == 1 {
            acc = radd(acc, base)?;
        }
        m >>= 1;
        if m > 0 {
            base = radd(base, base)?;
        }
    }
    if x < 0 {
        rsub(R::zero(), acc)
    } else {
        Ok(acc)
    }
}

/// The field with two elements.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Gf2(pub bool);

#[allow(clippy::suspicious_arithmetic_impl)]
impl Add for Gf2 {
    type Output = Gf2;
    fn add(self, o: Gf2) -> Gf2 {
        Gf2(self.0 ^ o.0)
    }
}

#[allow(clippy::suspicious_arithmetic_impl)]
impl Sub for Gf2 {
    type Output = Gf2;
    fn sub(self, o: Gf2) -> Gf2 {
        Gf2(self.0 ^ o.0)
    }
}

#[allow(clippy::suspicious_arithmetic_impl)]
impl Mul for Gf2 {
    type Output = Gf2;
    fn mul(self, o: Gf2) -> Gf2 {
        Gf2(self.0 & o.0)
    }
}

impl Zero for Gf2 {
    fn zero() -> Self {
        Gf2(false)
    }
    fn is_zero(&self) -> bool {
        !self.0
    }
}

impl One for Gf2 {
    fn one() -> Self {
        Gf2(true)
    }
}

/// 64 independent copies of GF(2) packed in a word: add is XOR, multiply is AND.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
#[repr(transparent)]
pub struct Gf2x64(pub u64);

#[allow(clippy::suspicious_arithmetic_impl)]
impl Add for Gf2x64 {
    type Output = Gf2x64;
    fn add(self, o: Gf2x64) -> Gf2x64 {
        Gf2x64(self.0 ^ o.0)
    }
}

#[allow(clippy::suspicious_arithmetic_impl)]
impl Sub for Gf2x64 {
    type Output = Gf2x64;
    fn sub(self, o: Gf2x64) -> Gf2x64 {
        Gf2x64(self.0 ^ o.0)
    }
}

#[allow(clippy::suspicious_arithmetic_impl)]
impl Mul for Gf2x64 {
    type Output = Gf2x64;
    fn mul(self, o: Gf2x64) -> Gf2x64 {
        Gf2x64(self.0 & o.0)
    }
}

impl Zero for Gf2x64 {
    fn zero() -> Self {
        Gf2x64(0)
    }
    fn is_zero(&self) -> bool {
        self.0 == 0
    }
}

impl One for Gf2x64 {
    fn one() -> Self {
        Gf2x64(u64::MAX)
    }
}

macro_rules! checked_via_ops {
    ($($t:ty),*) => {$(
        impl CheckedAdd for $t {
            fn checked_add(&self, o: &Self) -> Option<Self> { Some(*self + *o) }
        }
        impl CheckedSub for $t {
            fn checked_sub(&self, o: &Self) -> Option<Self> { Some(*self - *o) }
        }
        impl CheckedMul for $t {
            fn checked_mul(&self, o: &Self) -> Option<Self> { Some(*self * *o) }
        }
    )*};
}
checked_via_ops!(Gf2, Gf2x64);

/// Linear map applied independently along one coordinate of a mixed-radix table.
#[derive(Clone, Debug, PartialEq)]
pub enum AxisKernel<R> {
    /// In-place updates `x[dst] += x[src]`, in order.
    Steps(Vec<(usize, usize)>),
    /// Dense matrix, `y[i] = sum_j m[i][j] x[j]`.
    Matrix(Vec<Vec<R>>),
}

/// Applies `kernel` to every fibre of a table laid out as `outer × radix × inner`.
pub fn apply_axis<R: Ring>(
    data: &mut [R],
    outer: usize,
    radix: usize,
    inner: usize,
    kernel: &AxisKernel<R>,
) -> Result<(), ConvError> {
    if data.len() != outer * radix * inner {
        return Err(ConvError::LengthMismatch { expected: outer * radix * inner, found: data.len() });
    }
    match kernel {
        AxisKernel::Steps(steps) => {
            for o in 0..outer {
                let base = o * radix * inner;
                for &(dst, src) in steps {
                    let (d, s) = (base + dst * inner, base + src * inner);
                    for i in 0..inner {
                        data[d + i] = radd(data[d + i], data[s + i])?;
                    }
                }
            }
        }
        AxisKernel::Matrix(m) => {
            let mut fibre = vec![R::zero(); radix];
            for o in 0..outer {
                let base = o * radix * inner;
                for i in 0..inner {
                    for (r, slot) in fibre.iter_mut().enumerate() {
                        *slot = data[base + r * inner + i];
                    }
                    for (r, row) in m.iter().enumerate() {
                        let mut acc = R::zero();
                        for (x, &coef) in fibre.iter().zip(row) {
                            if !coef.is_zero() {
                                acc = radd(acc, rmul(coef, *x)?)?;
                            }
                        }
                        data[base + r * inner + i] = acc;
                    }
                }
            }
        }
    }
    Ok(())
}

/// Applies the same kernel along every coordinate of a table with `dims` coordinates of
/// radix `radix` (coordinate 0 varies fastest) followed by `inner` contiguous cells.
pub fn apply_all_axes<R: Ring>(
    data: &mut [R],
    dims: usize,
    radix: usize,
    inner: usize,
    kernel: &AxisKernel<R>,
) -> Result<(), ConvError> {
    let total = radix.pow(dims as u32);
    for axis in 0..dims {
        let below = radix.pow(axis as u32);
        let outer = total / (below * radix);
        // layout: outer (higher coords) × radix × (lower coords × inner)
        apply_axis(data, outer, radix, below * inner, kernel)?;
    }
    Ok(())
}

/// A family of subsets of `{0, .., universe-1}`, stored as sorted bitmasks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetFamily {
    universe: usize,
    members: Vec<u64>,
    interval: bool,
}

impl SetFamily {
    pub fn new(universe: usize, mut members: Vec<u64>) -> Result<Self, ConvError> {
        if universe > MAX_UNIVERSE {
            return Err(ConvError::UniverseTooLarge(universe));
        }
        members.retain(|&m| m >> universe == 0);
        members.sort_unstable();
        members.dedup();
        let mut fam = Self { universe, members, interval: false };
        fam.interval = fam.check_interval_property();
        Ok(fam)
    }

    /// All subsets `S` with `lo <= |S| <= hi`.
    pub fn by_size(universe: usize, lo: u32, hi: u32) -> Result<Self, ConvError> {
        if universe > MAX_UNIVERSE {
            return Err(ConvError::UniverseTooLarge(universe));
        }
        let members = (0..1u64 << universe).filter(|s| (lo..=hi).contains(&s.count_ones())).collect();
        Self::new(universe, members)
    }

    /// All subsets containing at least one member of `generators`.
    pub fn upward_closure(universe: usize, generators: &[u64]) -> Result<Self, ConvError> {
        if universe > MAX_UNIVERSE {
            return Err(ConvError::UniverseTooLarge(universe));
        }
        let members = (0..1u64 << universe).filter(|s| generators.iter().any(|g| g & s == *g)).collect();
        Self::new(universe, members)
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn members(&self) -> &[u64] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn index_of(&self, set: u64) -> Option<usize> {
        self.members.binary_search(&set).ok()
    }

    pub fn contains(&self, set: u64) -> bool {
        self.index_of(set).is_some()
    }

    pub fn is_closure_difference(&self) -> bool {
        self.interval
    }

    /// True iff `W ⊆ T ⊆ S` with `W, S` in the family forces `T` into the family.
    /// Exhaustive up to universe 20, sampled above.
    pub fn check_interval_property(&self) -> bool {
        if self.members.is_empty() {
            return true;
        }
        if self.universe <= 20 {
            let size = 1usize << self.universe;
            let mut up = vec![false; size];
            let mut down = vec![false; size];
            for &m in &self.members {
                up[m as usize] = true;
                down[m as usize] = true;
            }
            for j in 0..self.universe {
                let bit = 1usize << j;
                for s in 0..size {
                    if s & bit != 0 {
                        up[s] |= up[s ^ bit];
                    } else {
                        down[s] |= down[s | bit];
                    }
                }
            }
            return (0..size).all(|s| !(up[s] && down[s]) || self.contains(s as u64));
        }
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(0x1f2e3d4c);
        for _ in 0..20_000 {
            let w = self.members[rng.gen_range(0..self.members.len())];
            let s = self.members[rng.gen_range(0..self.members.len())];
            let (w, s) = if w & s == w {
                (w, s)
            } else if w & s == s {
                (s, w)
            } else {
                continue;
            };
            let t = w | (s & !w & rng.gen::<u64>());
            if !self.contains(t) {
                return false;
            }
        }
        true
    }

    /// Update steps of the layered zeta recurrence: `(index of S, index of S \ {j})` for
    /// each element `j` in turn.
    pub fn zeta_steps(&self) -> Vec<(usize, usize)> {
        let mut steps = Vec::new();
        for j in 0..self.universe {
            let bit = 1u64 << j;
            for (idx, &s) in self.members.iter().enumerate() {
                if s & bit != 0 {
                    if let Some(src) = self.index_of(s ^ bit) {
                        steps.push((idx, src));
                    }
                }
            }
        }
        steps
    }

    /// Number of ring additions one zeta transform performs.
    pub fn zeta_op_count(&self) -> usize {
        self.zeta_steps().len()
    }

    fn require_closure_difference(&self) -> Result<(), ConvError> {
        if self.interval {
            Ok(())
        } else {
            Err(ConvError::NotClosureDifference)
        }
    }

    fn signs<R: Ring>(&self, values: &mut [R]) -> Result<(), ConvError> {
        for (v, &s) in values.iter_mut().zip(&self.members) {
            if s.count_ones() % 2 == 1 {
                *v = rsub(R::zero(), *v)?;
            }
        }
        Ok(())
    }

    /// `(ζA)(S) = sum over T ⊆ S in the family of A(T)`.
    pub fn zeta<R: Ring>(&self, values: &[R]) -> Result<Vec<R>, ConvError> {
        self.require_closure_difference()?;
        self.check_len(values.len())?;
        let mut out = values.to_vec();
        apply_axis(&mut out, 1, self.len(), 1, &AxisKernel::Steps(self.zeta_steps()))?;
        Ok(out)
    }

    /// Inverse of [`SetFamily::zeta`], computed as sign · zeta · sign.
    pub fn mobius<R: Ring>(&self, values: &[R]) -> Result<Vec<R>, ConvError> {
        self.require_closure_difference()?;
        self.check_len(values.len())?;
        let mut out = values.to_vec();
        self.signs(&mut out)?;
        let mut out = self.zeta(&out)?;
        self.signs(&mut out)?;
        Ok(out)
    }

    /// `(A ⊗ B)(S) = sum over T1 ∪ T2 = S of A(T1) B(T2)`.
    pub fn cover_product<R: Ring>(&self, a: &[R], b: &[R]) -> Result<Vec<R>, ConvError> {
        let za = self.zeta(a)?;
        let zb = self.zeta(b)?;
        let prod = za.iter().zip(&zb).map(|(&x, &y)| rmul(x, y)).collect::<Result<Vec<R>, _>>()?;
        self.mobius(&prod)
    }

    fn check_len(&self, len: usize) -> Result<(), ConvError> {
        if len == self.len() {
            Ok(())
        } else {
            Err(ConvError::LengthMismatch { expected: self.len(), found: len })
        }
    }

    /// `<bitstring> <value>` lines, bit 0 first.
    pub fn dump<R: Ring>(&self, values: &[R]) -> String {
        let mut out = String::new();
        for (s, v) in self.members.iter().zip(values) {
            let bits: String = (0..self.universe).map(|j| if s >> j & 1 == 1 { '1' } else { '0' }).collect();
            out.push_str(&format!("{bits} {v:?}\n"));
        }
        out
    }
}

/// Table over a set family.
#[derive(Clone, Debug, PartialEq)]
pub struct RingTable<R> {
    pub family: SetFamily,
    pub values: Vec<R>,
}

impl<R: Ring> RingTable<R> {
    pub fn new(family: SetFamily, values: Vec<R>) -> Result<Self, ConvError> {
        family.check_len(values.len())?;
        Ok(Self { family, values })
    }

    pub fn zeta(&self) -> Result<Self, ConvError> {
        Ok(Self { family: self.family.clone(), values: self.family.zeta(&self.values)? })
    }

    pub fn mobius(&self) -> Result<Self, ConvError> {
        Ok(Self { family: self.family.clone(), values: self.family.mobius(&self.values)? })
    }

    pub fn cover_product(&self, other: &Self) -> Result<Self, ConvError> {
        if self.family != other.family {
            return Err(ConvError::FamilyMismatch);
        }
        Ok(Self { family: self.family.clone(), values: self.family.cover_product(&self.values, &other.values)? })
    }
}

/// The family over `k` disjoint copies of the universe whose projection on every copy lies
/// in `family`. Copy `i` occupies bits `i*u .. (i+1)*u`.
pub fn build_kf(family: &SetFamily, k: usize) -> Result<SetFamily, ConvError> {
    let u = family.universe();
    if u * k > MAX_UNIVERSE {
        return Err(ConvError::UniverseTooLarge(u * k));
    }
    let mut members = vec![0u64];
    for i in 0..k {
        members =
            members.iter().flat_map(|&prefix| family.members().iter().map(move |&m| prefix | (m << (i * u)))).collect();
    }
    SetFamily::new(u * k, members)
}

/// Componentwise cover product of tables over `family^k` in mixed-radix order
/// (coordinate 0 varies fastest, digit = position in the family).
pub fn componentwise_cover_product<R: Ring>(
    family: &SetFamily,
    k: usize,
    a: &[R],
    b: &[R],
) -> Result<Vec<R>, ConvError> {
    family.require_closure_difference()?;
    let size = family.len().pow(k as u32);
    for t in [a, b] {
        if t.len() != size {
            return Err(ConvError::LengthMismatch { expected: size, found: t.len() });
        }
    }
    let steps = AxisKernel::Steps(family.zeta_steps());
    let mut za = a.to_vec();
    let mut zb = b.to_vec();
    apply_all_axes(&mut za, k, family.len(), 1, &steps)?;
    apply_all_axes(&mut zb, k, family.len(), 1, &steps)?;
    let mut prod = za.iter().zip(&zb).map(|(&x, &y)| rmul(x, y)).collect::<Result<Vec<R>, _>>()?;
    power_signs(family, k, &mut prod)?;
    apply_all_axes(&mut prod, k, family.len(), 1, &steps)?;
    power_signs(family, k, &mut prod)?;
    Ok(prod)
}

fn power_signs<R: Ring>(family: &SetFamily, k: usize, values: &mut [R]) -> Result<(), ConvError> {
    let radix = family.len();
    for (code, v) in values.iter_mut().enumerate() {
        let mut c = code;
        let mut parity = 0;
        for _ in 0..k {
            parity ^= family.members()[c % radix].count_ones() & 1;
            c /= radix;
        }
        if parity == 1 {
            *v = rsub(R::zero(), *v)?;
        }
    }
    Ok(())
}

/// A finite lattice given by its full join table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lattice {
    join: Vec<Vec<usize>>,
    bottom: usize,
    irreducibles: Vec<usize>,
    zeta: Vec<Vec<i64>>,
    mobius: Vec<Vec<i64>>,
}

impl Lattice {
    /// Validates the join table (idempotent, commutative, associative, with a bottom)
    /// and derives the order, irreducibles and transform matrices.
    pub fn new(join: Vec<Vec<usize>>) -> Result<Self, ConvError> {
        let n = join.len();
        let bad = || ConvError::FamilyMismatch;
        if n == 0 || join.iter().any(|row| row.len() != n || row.iter().any(|&x| x >= n)) {
            return Err(bad());
        }
        for a in 0..n {
            if join[a][a] != a {
                return Err(bad());
            }
            for b in 0..n {
                if join[a][b] != join[b][a] {
                    return Err(bad());
                }
                for c in 0..n {
                    if join[join[a][b]][c] != join[a][join[b][c]] {
                        return Err(bad());
                    }
                }
            }
        }
        let bottom = (0..n).find(|&z| (0..n).all(|a| join[z][a] == a)).ok_or_else(bad)?;
        let irreducibles = (0..n)
            .filter(|&x| x == bottom || !(0..n).any(|y| (0..n).any(|z| y != x && z != x && join[y][z] == x)))
            .collect();
        // zeta[x][y] = 1 iff y ⪯ x
        let zeta: Vec<Vec<i64>> = (0..n).map(|x| (0..n).map(|y| i64::from(join[y][x] == x)).collect()).collect();
        let mobius = invert_unitriangular(&zeta)?;
        Ok(Self { join, bottom, irreducibles, zeta, mobius })
    }

    /// The five-element lattice `∅ < F, L, R < top` with atoms pairwise joining to top.
    pub fn cds() -> Self {
        let mut join = vec![vec![4usize; 5]; 5];
        for a in 0..5 {
            join[0][a] = a;
            join[a][0] = a;
            join[a][a] = a;
        }
        Self::new(join).expect("static lattice is valid")
    }

    pub fn size(&self) -> usize {
        self.join.len()
    }

    pub fn bottom(&self) -> usize {
        self.bottom
    }

    pub fn join(&self, a: usize, b: usize) -> usize {
        self.join[a][b]
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.join[a][b] == b
    }

    /// Join-irreducible elements, including the bottom.
    pub fn irreducibles(&self) -> &[usize] {
        &self.irreducibles
    }

    pub fn zeta_matrix(&self) -> &[Vec<i64>] {
        &self.zeta
    }

    pub fn mobius_matrix(&self) -> &[Vec<i64>] {
        &self.mobius
    }

    pub fn kernel<R: Ring>(matrix: &[Vec<i64>]) -> Result<AxisKernel<R>, ConvError> {
        let m = matrix
            .iter()
            .map(|row| row.iter().map(|&x| ring_from_i64(x)).collect::<Result<Vec<R>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        Ok(AxisKernel::Matrix(m))
    }
}

/// Inverse of a matrix that is unitriangular under some ordering of its indices.
fn invert_unitriangular(m: &[Vec<i64>]) -> Result<Vec<Vec<i64>>, ConvError> {
    let n = m.len();
    // order indices by number of nonzeros per row: under the order, row x has the
    // elements below x, so elements with fewer predecessors come first
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&x| m[x].iter().filter(|&&v| v != 0).count());
    let pos: Vec<usize> = {
        let mut p = vec![0; n];
        for (i, &x) in order.iter().enumerate() {
            p[x] = i;
        }
        p
    };
    for x in 0..n {
        if m[x][x] != 1 || (0..n).any(|y| m[x][y] != 0 && pos[y] > pos[x]) {
            return Err(ConvError::Singular);
        }
    }
    // solve m * inv = I column by column with forward substitution along `order`
    let mut inv = vec![vec![0i64; n]; n];
    for col in 0..n {
        for &x in &order {
            let mut acc = i64::from(x == col);
            for y in 0..n {
                if y != x && m[x][y] != 0 {
                    acc = acc
                        .checked_sub(m[x][y].checked_mul(inv[y][col]).ok_or(ConvError::Overflow)?)
                        .ok_or(ConvError::Overflow)?;
                }
            }
            inv[x][col] = acc;
        }
    }
    Ok(inv)
}

/// Join-irreducible tuples of `L^k`: the all-bottom tuple, then every tuple with a single
/// non-bottom irreducible coordinate.
pub fn join_irreducibles_of_power(lattice: &Lattice, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![lattice.bottom(); k]];
    for i in 0..k {
        for &x in lattice.irreducibles() {
            if x != lattice.bottom() {
                let mut t = vec![lattice.bottom(); k];
                t[i] = x;
                out.push(t);
            }
        }
    }
    out
}

/// Table over `L^k` in mixed-radix order (coordinate 0 varies fastest).
#[derive(Clone, Debug, PartialEq)]
pub struct PowerLatticeTable<R> {
    pub lattice: Lattice,
    pub k: usize,
    pub values: Vec<R>,
}

impl<R: Ring> PowerLatticeTable<R> {
    pub fn new(lattice: Lattice, k: usize, values: Vec<R>) -> Result<Self, ConvError> {
        let expected = lattice.size().pow(k as u32);
        if values.len() != expected {
            return Err(ConvError::LengthMismatch { expected, found: values.len() });
        }
        Ok(Self { lattice, k, values })
    }

    /// `(A ⊗ B)(x) = sum over y ∨ z = x of A(y) B(z)`.
    pub fn vee_product(&self, other: &Self) -> Result<Self, ConvError> {
        if self.lattice != other.lattice || self.k != other.k {
            return Err(ConvError::FamilyMismatch);
        }
        let size = self.lattice.size();
        let zeta = Lattice::kernel::<R>(self.lattice.zeta_matrix())?;
        let mobius = Lattice::kernel::<R>(self.lattice.mobius_matrix())?;
        let mut za = self.values.clone();
        let mut zb = other.values.clone();
        apply_all_axes(&mut za, self.k, size, 1, &zeta)?;
        apply_all_axes(&mut zb, self.k, size, 1, &zeta)?;
        let mut prod = za.iter().zip(&zb).map(|(&x, &y)| rmul(x, y)).collect::<Result<Vec<R>, _>>()?;
        apply_all_axes(&mut prod, self.k, size, 1, &mobius)?;
        Ok(Self { lattice: self.lattice.clone(), k: self.k, values: prod })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn proper_nonempty(u: usize) -> SetFamily {
        SetFamily::by_size(u, 1, u as u32 - 1).unwrap()
    }

    #[test]
    fn interval_property_examples() {
        assert!(proper_nonempty(3).check_interval_property());
        assert!(!SetFamily::new(2, vec![0b00, 0b11]).unwrap().check_interval_property());
        assert!(SetFamily::upward_closure(5, &[0b00011, 0b10100]).unwrap().check_interval_property());
        assert!(matches!(SetFamily::new(29, vec![]), Err(ConvError::UniverseTooLarge(29))));
    }

    #[test]
    fn zeta_of_indicator() {
        let fam = proper_nonempty(3);
        let m = fam.index_of(0b001).unwrap();
        let mut a = vec![0i64; fam.len()];
        a[m] = 1;
        let z = fam.zeta(&a).unwrap();
        for (i, &s) in fam.members().iter().enumerate() {
            assert_eq!(z[i], i64::from(s & 1 == 1));
        }
        assert_eq!(fam.zeta(&vec![0i64; fam.len()]).unwrap(), vec![0; fam.len()]);
    }

    #[test]
    fn hole_rejected_by_zeta() {
        let fam = SetFamily::new(2, vec![0b00, 0b11]).unwrap();
        assert_eq!(fam.zeta(&[1i64, 1]), Err(ConvError::NotClosureDifference));
    }

    #[test]
    fn cover_product_identity_and_deltas() {
        let fam = SetFamily::by_size(1, 0, 1).unwrap();
        let a = vec![3i64, -5];
        assert_eq!(fam.cover_product(&a, &[1, 0]).unwrap(), a);
        let fam = proper_nonempty(3);
        let s = fam.index_of(0b011).unwrap();
        let mut d = vec![Gf2(false); fam.len()];
        d[s] = Gf2(true);
        let p = fam.cover_product(&d, &d).unwrap();
        assert_eq!(p, d);
    }

    #[test]
    fn kf_sizes() {
        let f = proper_nonempty(3);
        assert_eq!(build_kf(&f, 1).unwrap(), f);
        let f2 = build_kf(&f, 2).unwrap();
        assert_eq!(f2.len(), 36);
        assert!(f2.check_interval_property());
    }

    #[test]
    fn gf2x64_ring_laws() {
        let a = Gf2x64(0b1100);
        assert_eq!(a * Gf2x64::one(), a);
        assert_eq!(a + a, Gf2x64::zero());
        assert_eq!(ring_from_i64::<Gf2x64>(3), Ok(Gf2x64::one()));
        assert_eq!(ring_from_i64::<Gf2>(-2), Ok(Gf2(false)));
        assert_eq!(ring_from_i64::<i64>(-7), Ok(-7));
        assert_eq!(i64::MAX.checked_add(1), None);
    }

    #[test]
    fn cds_lattice_structure() {
        let l = Lattice::cds();
        assert_eq!(l.irreducibles(), &[0, 1, 2, 3]);
        assert_eq!(join_irreducibles_of_power(&l, 1).len(), 4);
        assert_eq!(join_irreducibles_of_power(&l, 2).len(), 7);
        // the top has mobius value 2 against the bottom
        assert_eq!(l.mobius_matrix()[4][0], 2);
        let z = l.zeta_matrix();
        let m = l.mobius_matrix();
        for i in 0..5 {
            for j in 0..5 {
                let p: i64 = (0..5).map(|t| z[i][t] * m[t][j]).sum();
                assert_eq!(p, i64::from(i == j));
            }
        }
    }

    #[test]
    fn vee_product_deltas() {
        let l = Lattice::cds();
        let delta = |code: usize| {
            let mut v = vec![0i64; 25];
            v[code] = 1;
            PowerLatticeTable::new(l.clone(), 2, v).unwrap()
        };
        // (F, L) ∨ (L, ∅) = (top, L)
        let p = delta(1 + 5 * 2).vee_product(&delta(2)).unwrap();
        assert_eq!(p.values, delta(4 + 5 * 2).values);
        let a = PowerLatticeTable::new(l.clone(), 2, (0..25).collect()).unwrap();
        assert_eq!(a.vee_product(&delta(0)).unwrap().values, a.values);
        let other = PowerLatticeTable::new(l, 1, vec![0i64; 5]).unwrap();
        assert!(a.vee_product(&other).is_err());
    }

    #[test]
    fn overflow_is_an_error() {
        let fam = SetFamily::by_size(2, 0, 2).unwrap();
        let a = vec![i64::MAX; 4];
        assert_eq!(fam.zeta(&a), Err(ConvError::Overflow));
    }
}
