//! Classification data for the conformal groups of non-Euclidean Jordan
//! algebras: the short/long root multiplicities `(d, e)`, the Bessel order
//! `τ = (d−e−1)/2` and the dual pairs `G_k/H_k` governing tensor powers.

use alloc::format;
use alloc::string::String;
use core::fmt;

use crate::error::{Error, Result};
use crate::rational::{HalfInt, Q};
use crate::report::{CheckOutcome, ExactTally, VerificationReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Family {
    GlReal,
    OSplit,
    E7Split,
    ORank2Real,
    SpComplex,
    GlComplex,
    OComplex,
    E7Complex,
    ORank2Complex,
    SpQuaternionic,
    GlQuaternionic,
}

impl Family {
    pub const ALL: [Family; 11] = [
        Family::GlReal,
        Family::OSplit,
        Family::E7Split,
        Family::ORank2Real,
        Family::SpComplex,
        Family::GlComplex,
        Family::OComplex,
        Family::E7Complex,
        Family::ORank2Complex,
        Family::SpQuaternionic,
        Family::GlQuaternionic,
    ];

    /// Stable identifier used in files and on the command line.
    pub fn tag(self) -> &'static str {
        match self {
            Family::GlReal => "GL_2n(R)",
            Family::OSplit => "O_2n2n",
            Family::E7Split => "E_7(7)",
            Family::ORank2Real => "O_p+2p+2",
            Family::SpComplex => "Sp_n(C)",
            Family::GlComplex => "GL_2n(C)",
            Family::OComplex => "O_4n(C)",
            Family::E7Complex => "E_7(C)",
            Family::ORank2Complex => "O_p+4(C)",
            Family::SpQuaternionic => "Sp_nn",
            Family::GlQuaternionic => "GL_2n(H)",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Family> {
        let t = tag.trim();
        Family::ALL.into_iter().find(|f| f.tag().eq_ignore_ascii_case(t))
    }

    pub fn row(self) -> &'static CatalogRow {
        &TABLE[self as usize]
    }

    pub fn has_matrix_model(self) -> bool {
        matches!(self, Family::GlReal | Family::OSplit)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// A multiplicity that is either a number or the family parameter `p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum MultSpec {
    Fixed(u32),
    P,
}

impl fmt::Display for MultSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MultSpec::Fixed(v) => write!(f, "{v}"),
            MultSpec::P => f.write_str("p"),
        }
    }
}

/// Jordan rank: the free parameter `n` or a fixed value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum RankSpec {
    N,
    Fixed(u32),
}

impl fmt::Display for RankSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RankSpec::N => f.write_str("n"),
            RankSpec::Fixed(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Field {
    R,
    C,
    H,
}

impl Field {
    pub fn real_dim(self) -> u64 {
        match self {
            Field::R => 1,
            Field::C => 2,
            Field::H => 4,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Field::R => "R",
            Field::C => "C",
            Field::H => "H",
        }
    }
}

/// The `G_k/H_k` column as a template in `k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum DualFamily {
    GlOverTorus(Field),
    SpOverSl2(Field),
    OComplexOverO1,
    OStarOverOStar1,
    Spin45OverSpin44,
    So9OverSo8,
}

impl DualFamily {
    pub fn template(self) -> String {
        match self {
            DualFamily::GlOverTorus(f) => {
                let s = f.symbol();
                format!("GL_k({s})/[GL_1({s})]^k")
            }
            DualFamily::SpOverSl2(f) => {
                let s = f.symbol();
                format!("Sp_2k({s})/[SL_2({s})]^k")
            }
            DualFamily::OComplexOverO1 => "O_k(C)/[O_1(C)]^k".into(),
            DualFamily::OStarOverOStar1 => "O*_k/[O*_1]^k".into(),
            DualFamily::Spin45OverSpin44 => "Spin(4,5)/Spin(4,4)".into(),
            DualFamily::So9OverSo8 => "SO_9(C)/SO_8(C)".into(),
        }
    }

    pub fn instantiate(self, k: u32) -> DualPair {
        use GroupName as G;
        let (g, h) = match self {
            DualFamily::GlOverTorus(f) => (G::Gl(f, k), G::Gl1Power(f, k)),
            DualFamily::SpOverSl2(f) => (G::Sp(f, k), G::Sl2Power(f, k)),
            DualFamily::OComplexOverO1 => (G::OComplex(k), G::O1ComplexPower(k)),
            DualFamily::OStarOverOStar1 => (G::OStar(k), G::OStar1Power(k)),
            DualFamily::Spin45OverSpin44 => (G::Spin45, G::Spin44),
            DualFamily::So9OverSo8 => (G::So9Complex, G::So8Complex),
        };
        DualPair { g, h }
    }
}

/// A named group with `k` substituted.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum GroupName {
    /// `GL_k(F)`
    Gl(Field, u32),
    /// `[GL_1(F)]^k`
    Gl1Power(Field, u32),
    /// `Sp_2k(F)`
    Sp(Field, u32),
    /// `[SL_2(F)]^k`
    Sl2Power(Field, u32),
    OComplex(u32),
    O1ComplexPower(u32),
    /// `O*_k`, the group `O*(2k)`.
    OStar(u32),
    OStar1Power(u32),
    Spin45,
    Spin44,
    So9Complex,
    So8Complex,
}

impl GroupName {
    /// Dimension as a real Lie group.
    pub fn real_dim(self) -> u64 {
        match self {
            GroupName::Gl(f, k) => f.real_dim() * (k as u64).pow(2),
            GroupName::Gl1Power(f, k) => f.real_dim() * k as u64,
            GroupName::Sp(f, k) => {
                let k = k as u64;
                (f.real_dim().min(2)) * k * (2 * k + 1)
            }
            GroupName::Sl2Power(f, k) => 3 * f.real_dim().min(2) * k as u64,
            GroupName::OComplex(k) => {
                let k = k as u64;
                k * (k - 1)
            }
            GroupName::O1ComplexPower(_) => 0,
            GroupName::OStar(k) => {
                let k = k as u64;
                k * (2 * k - 1)
            }
            GroupName::OStar1Power(k) => k as u64,
            GroupName::Spin45 => 36,
            GroupName::Spin44 => 28,
            GroupName::So9Complex => 72,
            GroupName::So8Complex => 56,
        }
    }
}

impl fmt::Display for GroupName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            GroupName::Gl(fl, k) => write!(f, "GL_{k}({})", fl.symbol()),
            GroupName::Gl1Power(fl, k) => write!(f, "[GL_1({})]^{k}", fl.symbol()),
            GroupName::Sp(fl, k) => write!(f, "Sp_{}({})", 2 * k, fl.symbol()),
            GroupName::Sl2Power(fl, k) => write!(f, "[SL_2({})]^{k}", fl.symbol()),
            GroupName::OComplex(k) => write!(f, "O_{k}(C)"),
            GroupName::O1ComplexPower(k) => write!(f, "[O_1(C)]^{k}"),
            GroupName::OStar(k) => write!(f, "O*_{k}"),
            GroupName::OStar1Power(k) => write!(f, "[O*_1]^{k}"),
            GroupName::Spin45 => f.write_str("Spin(4,5)"),
            GroupName::Spin44 => f.write_str("Spin(4,4)"),
            GroupName::So9Complex => f.write_str("SO_9(C)"),
            GroupName::So8Complex => f.write_str("SO_8(C)"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct DualPair {
    pub g: GroupName,
    pub h: GroupName,
}

impl fmt::Display for DualPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.g, self.h)
    }
}

/// One row of the classification table, with symbolic parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CatalogRow {
    pub family: Family,
    pub group_label: &'static str,
    pub km_label: &'static str,
    pub d: MultSpec,
    pub e: u32,
    pub rank: RankSpec,
    pub dual: Option<DualFamily>,
}

impl CatalogRow {
    pub fn dual_family(&self) -> String {
        self.dual.map(DualFamily::template).unwrap_or_default()
    }

    /// Fixes the free parameters. `n` is ignored for rows of fixed rank and
    /// `p` is required exactly for the rank-2 orthogonal rows.
    pub fn instantiate(&self, n: u32, p: Option<u32>) -> Result<GroupClass> {
        let n = match self.rank {
            RankSpec::N => {
                if n < 2 {
                    return Err(Error::RankOutOfRange {
                        n: n as usize,
                        min: 2,
                        max: usize::MAX,
                    });
                }
                n
            }
            RankSpec::Fixed(r) => r,
        };
        let d = match (self.d, p) {
            (MultSpec::Fixed(d), _) => d,
            (MultSpec::P, Some(p)) if p >= 1 => p,
            (MultSpec::P, _) => {
                return Err(Error::Parse(format!(
                    "{} needs a parameter p >= 1",
                    self.family
                )))
            }
        };
        Ok(GroupClass {
            family: self.family,
            n,
            p: matches!(self.d, MultSpec::P).then_some(d),
            d,
            e: self.e,
            km_label: self.km_label,
            dual: self.dual,
            model_available: self.family.has_matrix_model(),
        })
    }
}

static TABLE: [CatalogRow; 11] = [
    CatalogRow {
        family: Family::GlReal,
        group_label: "GL_2n(R)",
        km_label: "O_2n/(O_n×O_n)",
        d: MultSpec::Fixed(1),
        e: 0,
        rank: RankSpec::N,
        dual: Some(DualFamily::GlOverTorus(Field::R)),
    },
    CatalogRow {
        family: Family::OSplit,
        group_label: "O_2n,2n",
        km_label: "(O_2n×O_2n)/O_2n",
        d: MultSpec::Fixed(2),
        e: 0,
        rank: RankSpec::N,
        dual: Some(DualFamily::SpOverSl2(Field::R)),
    },
    CatalogRow {
        family: Family::E7Split,
        group_label: "E_7(7)",
        km_label: "SU_8/Sp_4",
        d: MultSpec::Fixed(4),
        e: 0,
        rank: RankSpec::Fixed(3),
        dual: Some(DualFamily::Spin45OverSpin44),
    },
    CatalogRow {
        family: Family::ORank2Real,
        group_label: "O_p+2,p+2",
        km_label: "[O_p+2]^2/[O_1×O_p+1^2]",
        d: MultSpec::P,
        e: 0,
        rank: RankSpec::Fixed(2),
        dual: None,
    },
    CatalogRow {
        family: Family::SpComplex,
        group_label: "Sp_n(C)",
        km_label: "Sp_n/U_n",
        d: MultSpec::Fixed(1),
        e: 1,
        rank: RankSpec::N,
        dual: Some(DualFamily::OComplexOverO1),
    },
    CatalogRow {
        family: Family::GlComplex,
        group_label: "GL_2n(C)",
        km_label: "U_2n/(U_n×U_n)",
        d: MultSpec::Fixed(2),
        e: 1,
        rank: RankSpec::N,
        dual: Some(DualFamily::GlOverTorus(Field::C)),
    },
    CatalogRow {
        family: Family::OComplex,
        group_label: "O_4n(C)",
        km_label: "O_4n/U_2n",
        d: MultSpec::Fixed(4),
        e: 1,
        rank: RankSpec::N,
        dual: Some(DualFamily::SpOverSl2(Field::C)),
    },
    CatalogRow {
        family: Family::E7Complex,
        group_label: "E_7(C)",
        km_label: "E_7/(E_6×U_1)",
        d: MultSpec::Fixed(8),
        e: 1,
        rank: RankSpec::Fixed(3),
        dual: Some(DualFamily::So9OverSo8),
    },
    CatalogRow {
        family: Family::ORank2Complex,
        group_label: "O_p+4(C)",
        km_label: "O_p+4/(O_p+2×U_1)",
        d: MultSpec::P,
        e: 1,
        rank: RankSpec::Fixed(2),
        dual: None,
    },
    CatalogRow {
        family: Family::SpQuaternionic,
        group_label: "Sp_n,n",
        km_label: "(Sp_n×Sp_n)/Sp_n",
        d: MultSpec::Fixed(2),
        e: 2,
        rank: RankSpec::N,
        dual: Some(DualFamily::OStarOverOStar1),
    },
    CatalogRow {
        family: Family::GlQuaternionic,
        group_label: "GL_2n(H)",
        km_label: "Sp_2n/(Sp_n×Sp_n)",
        d: MultSpec::Fixed(4),
        e: 3,
        rank: RankSpec::N,
        dual: Some(DualFamily::GlOverTorus(Field::H)),
    },
];

/// The table rows in their published order.
pub fn list_classes() -> &'static [CatalogRow] {
    &TABLE
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Multiplicities {
    pub d: u32,
    pub e: u32,
}

/// A table row with `n` (and `p` where applicable) fixed.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct GroupClass {
    pub family: Family,
    pub n: u32,
    pub p: Option<u32>,
    pub d: u32,
    pub e: u32,
    pub km_label: &'static str,
    pub dual: Option<DualFamily>,
    pub model_available: bool,
}

impl GroupClass {
    pub fn new(family: Family, n: u32) -> Result<Self> {
        family.row().instantiate(n, None)
    }

    pub fn multiplicities(&self) -> Multiplicities {
        Multiplicities {
            d: self.d,
            e: self.e,
        }
    }

    pub fn tau(&self) -> HalfInt {
        tau(self.multiplicities())
    }

    pub fn dual_family(&self) -> String {
        self.dual.map(DualFamily::template).unwrap_or_default()
    }

    /// `4τ < dn − 1`, the condition for `g_τ` to be square integrable.
    pub fn square_integrable(&self) -> bool {
        let four_tau = 2 * self.tau().twice() as i64;
        four_tau < (self.d * self.n) as i64 - 1
    }
}

pub fn tau(m: Multiplicities) -> HalfInt {
    HalfInt::from_twice(m.d as i32 - m.e as i32 - 1)
}

/// `dim n̄ = d·n(n−1) + (e+1)·n`: the short roots `−ε_i−ε_j` carry `d`
/// dimensions each and the long roots `−2ε_j` carry `e+1`.
pub fn dim_nbar(c: &GroupClass) -> u64 {
    let (d, e, n) = (c.d as u64, c.e as u64, c.n as u64);
    d * n * (n - 1) + (e + 1) * n
}

pub fn radial_exponent(c: &GroupClass) -> u32 {
    c.d * c.n - 1
}

pub fn dual_pair(c: &GroupClass, k: u32) -> Result<DualPair> {
    let dual = c.dual.ok_or_else(|| Error::NoDualPair {
        family: c.family.tag().into(),
    })?;
    if k < 2 || k >= c.n {
        return Err(Error::KOutOfRange {
            k: k as usize,
            min: 2,
            max_exclusive: c.n as usize,
        });
    }
    Ok(dual.instantiate(k))
}

/// Input to the admissibility check: either a table instance or a bare
/// indefinite orthogonal group `O(p,q)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FamilyDescriptor {
    Class(GroupClass),
    Orthogonal { p: u32, q: u32 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Admissibility {
    pub admissible: bool,
    pub diagnostic: String,
    /// The table instance the descriptor resolves to, when admissible.
    pub class: Option<GroupClass>,
}

pub fn validate_admissible(desc: &FamilyDescriptor) -> Admissibility {
    match desc {
        FamilyDescriptor::Class(c) => Admissibility {
            admissible: true,
            diagnostic: format!("{} with n = {} is a table row", c.family, c.n),
            class: Some(c.clone()),
        },
        &FamilyDescriptor::Orthogonal { p, q } if p != q => Admissibility {
            admissible: false,
            diagnostic: format!(
                "O({p},{q}) excluded: rank-2 unequal multiplicities \
                 (N = R^({},{}) is a non-Euclidean Jordan algebra whose \
                 root multiplicities do not fit the (d, e) scheme)",
                p.saturating_sub(1),
                q.saturating_sub(1)
            ),
            class: None,
        },
        &FamilyDescriptor::Orthogonal { p, .. } => {
            if p < 3 {
                return Admissibility {
                    admissible: false,
                    diagnostic: format!("O({p},{p}) has no multiplicity d = p-2 >= 1"),
                    class: None,
                };
            }
            let class = if p % 2 == 0 && p >= 4 {
                GroupClass::new(Family::OSplit, p / 2)
            } else {
                Family::ORank2Real.row().instantiate(2, Some(p - 2))
            };
            Admissibility {
                admissible: true,
                diagnostic: format!("O({p},{p}) is a table row"),
                class: class.ok(),
            }
        }
    }
}

/// Table size, the identity `4(τ+1) = 2(d+1−e)`, the inequality
/// `4τ < dn − 1` at `n = 2` and rejection of `O(p,q)` with `p ≠ q`.
pub fn catalog_suite() -> VerificationReport {
    let mut rep = VerificationReport::new("catalog", "table");
    let mut t = ExactTally::new();
    t.record_bool(TABLE.len() == 11);
    for f in Family::ALL {
        t.record_bool(f.row().family == f);
    }
    rep.push(CheckOutcome::exact("rows", &t, format!("{} rows", TABLE.len())));

    let mut ident = ExactTally::new();
    let mut ineq = ExactTally::new();
    for row in &TABLE {
        let ps: &[Option<u32>] = match row.d {
            MultSpec::P => &[Some(1), Some(2), Some(3), Some(4)],
            MultSpec::Fixed(_) => &[None],
        };
        for &p in ps {
            let c = match row.instantiate(2, p) {
                Ok(c) => c,
                Err(_) => {
                    ineq.record_bool(false);
                    continue;
                }
            };
            let four_tau_plus = Q::from_integer(4.into()) * (c.tau().to_q() + Q::from_integer(1.into()));
            let rhs = Q::from_integer((2 * (c.d as i64 + 1 - c.e as i64)).into());
            ident.record(&(four_tau_plus - rhs));
            ineq.record_bool(c.square_integrable());
        }
    }
    rep.push(CheckOutcome::exact("tau_identity", &ident, "4(τ+1) = 2(d+1−e) on every row"));
    rep.push(CheckOutcome::exact(
        "square_integrable_n2",
        &ineq,
        "4τ < dn − 1 at n = 2 (fixed-rank rows at their rank, p = 1..4)",
    ));

    let mut excl = ExactTally::new();
    let mut sample = String::new();
    for (p, q) in [(3, 5), (2, 4), (4, 6), (5, 3), (1, 7)] {
        let a = validate_admissible(&FamilyDescriptor::Orthogonal { p, q });
        excl.record_bool(!a.admissible && !a.diagnostic.is_empty() && a.class.is_none());
        if sample.is_empty() {
            sample = a.diagnostic;
        }
    }
    let eq = validate_admissible(&FamilyDescriptor::Orthogonal { p: 4, q: 4 });
    excl.record_bool(eq.admissible && eq.class.map(|c| (c.family, c.n)) == Some((Family::OSplit, 2)));
    rep.push(CheckOutcome::exact("unequal_signature_rejected", &excl, sample));
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    #[test]
    fn suite_passes() {
        let r = catalog_suite();
        for c in &r.checks {
            assert!(c.passed(), "{} {}", c.name, c.detail);
        }
    }

    #[test]
    fn tau_values() {
        assert_eq!(tau(Multiplicities { d: 2, e: 0 }), HalfInt::HALF);
        assert_eq!(tau(Multiplicities { d: 2, e: 2 }), -HalfInt::HALF);
        assert_eq!(tau(Multiplicities { d: 1, e: 0 }), HalfInt::ZERO);
        assert_eq!(tau(Multiplicities { d: 8, e: 1 }), HalfInt::from_int(3));
    }

    #[test]
    fn dual_pair_strings() {
        let o = GroupClass::new(Family::OSplit, 3).unwrap();
        assert_eq!(dual_pair(&o, 2).unwrap().to_string(), "Sp_4(R)/[SL_2(R)]^2");
        let e7 = GroupClass::new(Family::E7Split, 99).unwrap();
        assert_eq!(e7.n, 3);
        assert_eq!(dual_pair(&e7, 2).unwrap().to_string(), "Spin(4,5)/Spin(4,4)");
        let glc = GroupClass::new(Family::GlComplex, 5).unwrap();
        assert_eq!(dual_pair(&glc, 3).unwrap().to_string(), "GL_3(C)/[GL_1(C)]^3");
        assert!(dual_pair(&glc, 1).is_err());
        assert!(dual_pair(&glc, 5).is_err());
        let r2 = Family::ORank2Real.row().instantiate(2, Some(3)).unwrap();
        assert!(matches!(dual_pair(&r2, 2), Err(Error::NoDualPair { .. })));
    }

    #[test]
    fn tags_round_trip() {
        for f in Family::ALL {
            assert_eq!(Family::from_tag(f.tag()), Some(f));
            assert_eq!(f.row().family, f);
        }
        assert_eq!(Family::from_tag("o_2n2n"), Some(Family::OSplit));
    }

    #[test]
    fn orthogonal_descriptors() {
        let bad = validate_admissible(&FamilyDescriptor::Orthogonal { p: 5, q: 7 });
        assert!(!bad.admissible);
        assert!(bad.diagnostic.contains("rank-2 unequal multiplicities"));
        let ok = validate_admissible(&FamilyDescriptor::Orthogonal { p: 4, q: 4 });
        assert!(ok.admissible);
        assert_eq!(ok.class.unwrap().family, Family::OSplit);
        let odd = validate_admissible(&FamilyDescriptor::Orthogonal { p: 5, q: 5 });
        let c = odd.class.unwrap();
        assert_eq!((c.family, c.d, c.n), (Family::ORank2Real, 3, 2));
    }

    #[test]
    fn real_dims() {
        assert_eq!(GroupName::Sp(Field::R, 2).real_dim(), 10);
        assert_eq!(GroupName::Sl2Power(Field::R, 2).real_dim(), 6);
        assert_eq!(GroupName::Sp(Field::C, 2).real_dim(), 20);
        assert_eq!(GroupName::Sl2Power(Field::C, 3).real_dim(), 18);
        assert_eq!(GroupName::Gl(Field::H, 2).real_dim(), 16);
        assert_eq!(GroupName::OStar(2).real_dim(), 6);
    }
}
