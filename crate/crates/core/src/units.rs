//! Units of measure, measurements, exact conversion and comparison.

use std::cmp::Ordering;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

use crate::numerics::{self, ExactDecimal, Notation, NumberError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UnitError {
    #[error("unknown unit atom in {0:?}")]
    UnknownAtom(String),
    #[error("unknown unit prefix in {0:?}")]
    UnknownPrefix(String),
    #[error("malformed unit {0:?}")]
    MalformedUnit(String),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(Unit, Unit),
    #[error("negative values are not measurements: {0:?}")]
    NegativeValue(String),
    #[error("unit table line {line}: {message}")]
    Table { line: usize, message: String },
    #[error(transparent)]
    Number(#[from] NumberError),
}

/// SI prefixes that occur in the unit inventory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UnitPrefix {
    Femto,
    Pico,
    Nano,
    Micro,
    Milli,
    Centi,
    Deci,
    None,
}

impl UnitPrefix {
    pub const ALL: [UnitPrefix; 8] = [
        UnitPrefix::Femto,
        UnitPrefix::Pico,
        UnitPrefix::Nano,
        UnitPrefix::Micro,
        UnitPrefix::Milli,
        UnitPrefix::Centi,
        UnitPrefix::Deci,
        UnitPrefix::None,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            UnitPrefix::Femto => "f",
            UnitPrefix::Pico => "p",
            UnitPrefix::Nano => "n",
            UnitPrefix::Micro => "µ",
            UnitPrefix::Milli => "m",
            UnitPrefix::Centi => "c",
            UnitPrefix::Deci => "d",
            UnitPrefix::None => "",
        }
    }

    pub fn factor_exponent(self) -> i64 {
        match self {
            UnitPrefix::Femto => -15,
            UnitPrefix::Pico => -12,
            UnitPrefix::Nano => -9,
            UnitPrefix::Micro => -6,
            UnitPrefix::Milli => -3,
            UnitPrefix::Centi => -2,
            UnitPrefix::Deci => -1,
            UnitPrefix::None => 0,
        }
    }

    /// Accepts both the micro sign (U+00B5) and Greek mu (U+03BC).
    fn from_symbol(s: &str) -> Option<UnitPrefix> {
        Some(match s {
            "f" => UnitPrefix::Femto,
            "p" => UnitPrefix::Pico,
            "n" => UnitPrefix::Nano,
            "µ" | "μ" => UnitPrefix::Micro,
            "m" => UnitPrefix::Milli,
            "c" => UnitPrefix::Centi,
            "d" => UnitPrefix::Deci,
            "" => UnitPrefix::None,
            _ => return None,
        })
    }
}

/// Exactly `10^factor_exponent`.
pub fn prefix_factor(prefix: UnitPrefix) -> ExactDecimal {
    ExactDecimal::power_of_ten(prefix.factor_exponent())
}

/// Spelling of the liter symbol; the two spellings denote the same unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LiterSymbol {
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BaseAtom {
    Meter,
    Ampere,
    Kelvin,
    Molar,
    Equivalent,
    Gram,
    InternationalUnit,
    EnzymeUnit,
    Liter(LiterSymbol),
    Second,
    Hour,
    Minute,
    Count,
    Thousand,
}

/// Identity of a physical dimension; liter spellings collapse to one tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DimensionTag(BaseAtom);

const ATOM_SYMBOLS: &[(&str, BaseAtom)] = &[
    ("IU", BaseAtom::InternationalUnit),
    ("Eq", BaseAtom::Equivalent),
    ("min", BaseAtom::Minute),
    ("hr", BaseAtom::Hour),
    ("m", BaseAtom::Meter),
    ("A", BaseAtom::Ampere),
    ("K", BaseAtom::Kelvin),
    ("M", BaseAtom::Molar),
    ("g", BaseAtom::Gram),
    ("U", BaseAtom::EnzymeUnit),
    ("l", BaseAtom::Liter(LiterSymbol::Lower)),
    ("L", BaseAtom::Liter(LiterSymbol::Upper)),
    ("s", BaseAtom::Second),
    ("#", BaseAtom::Count),
    ("k", BaseAtom::Thousand),
];

impl BaseAtom {
    pub fn symbol(self) -> &'static str {
        match self {
            BaseAtom::Meter => "m",
            BaseAtom::Ampere => "A",
            BaseAtom::Kelvin => "K",
            BaseAtom::Molar => "M",
            BaseAtom::Equivalent => "Eq",
            BaseAtom::Gram => "g",
            BaseAtom::InternationalUnit => "IU",
            BaseAtom::EnzymeUnit => "U",
            BaseAtom::Liter(LiterSymbol::Lower) => "l",
            BaseAtom::Liter(LiterSymbol::Upper) => "L",
            BaseAtom::Second => "s",
            BaseAtom::Hour => "hr",
            BaseAtom::Minute => "min",
            BaseAtom::Count => "#",
            BaseAtom::Thousand => "k",
        }
    }

    pub fn dimension(self) -> DimensionTag {
        match self {
            BaseAtom::Liter(_) => DimensionTag(BaseAtom::Liter(LiterSymbol::Lower)),
            other => DimensionTag(other),
        }
    }

    fn from_symbol(s: &str) -> Option<BaseAtom> {
        ATOM_SYMBOLS.iter().find(|(sym, _)| *sym == s).map(|(_, a)| *a)
    }

    /// Time atoms and the count atoms never carry a prefix.
    pub fn accepts_prefix(self) -> bool {
        !matches!(self, BaseAtom::Hour | BaseAtom::Minute | BaseAtom::Count | BaseAtom::Thousand)
    }

    pub fn denominator_only(self) -> bool {
        matches!(self, BaseAtom::Hour | BaseAtom::Minute)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PrefixedAtom {
    pub prefix: UnitPrefix,
    pub atom: BaseAtom,
}

impl PrefixedAtom {
    pub fn new(prefix: UnitPrefix, atom: BaseAtom) -> Self {
        Self { prefix, atom }
    }

    pub fn bare(atom: BaseAtom) -> Self {
        Self { prefix: UnitPrefix::None, atom }
    }
}

impl fmt::Display for PrefixedAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.prefix.symbol(), self.atom.symbol())
    }
}

/// A prefixed numerator atom over an optional prefixed denominator atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Unit {
    pub numerator: PrefixedAtom,
    pub denominator: Option<PrefixedAtom>,
}

impl Unit {
    pub fn simple(prefix: UnitPrefix, atom: BaseAtom) -> Self {
        Self { numerator: PrefixedAtom::new(prefix, atom), denominator: None }
    }

    pub fn ratio(numerator: PrefixedAtom, denominator: PrefixedAtom) -> Self {
        Self { numerator, denominator: Some(denominator) }
    }

    pub fn dimension(&self) -> (DimensionTag, Option<DimensionTag>) {
        (self.numerator.atom.dimension(), self.denominator.map(|d| d.atom.dimension()))
    }

    pub fn compatible(&self, other: &Unit) -> bool {
        self.dimension() == other.dimension()
    }

    pub fn is_prefix_free(&self) -> bool {
        self.numerator.prefix == UnitPrefix::None
            && self.denominator.map_or(true, |d| d.prefix == UnitPrefix::None)
    }

    /// Same atoms with both prefixes removed.
    pub fn prefix_free(&self) -> Unit {
        Unit {
            numerator: PrefixedAtom::bare(self.numerator.atom),
            denominator: self.denominator.map(|d| PrefixedAtom::bare(d.atom)),
        }
    }

    /// Power of ten that converts a value in this unit to its prefix-free unit.
    pub fn scale_exponent(&self) -> i64 {
        self.numerator.prefix.factor_exponent()
            - self.denominator.map_or(0, |d| d.prefix.factor_exponent())
    }

    /// Base atoms used by the unit, numerator first.
    pub fn atoms(&self) -> impl Iterator<Item = BaseAtom> {
        std::iter::once(self.numerator.atom).chain(self.denominator.map(|d| d.atom))
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.numerator)?;
        if let Some(d) = self.denominator {
            write!(f, "/{d}")?;
        }
        Ok(())
    }
}

impl FromStr for Unit {
    type Err = UnitError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_unit(s)
    }
}

fn parse_prefixed_atom(part: &str, whole: &str) -> Result<PrefixedAtom, UnitError> {
    if part.is_empty() {
        return Err(UnitError::MalformedUnit(whole.to_string()));
    }
    // A whole-atom match wins so that "m", "min" and "M" are never split.
    if let Some(atom) = BaseAtom::from_symbol(part) {
        return Ok(PrefixedAtom::bare(atom));
    }
    // Longest atom suffix first, so the remaining prefix is as short as possible.
    let mut atoms: Vec<&(&str, BaseAtom)> =
        ATOM_SYMBOLS.iter().filter(|(sym, _)| part.ends_with(sym)).collect();
    atoms.sort_by_key(|(sym, _)| std::cmp::Reverse(sym.len()));
    let Some((sym, atom)) = atoms.first() else {
        return Err(UnitError::UnknownAtom(whole.to_string()));
    };
    let head = &part[..part.len() - sym.len()];
    let prefix =
        UnitPrefix::from_symbol(head).ok_or_else(|| UnitError::UnknownPrefix(whole.to_string()))?;
    if !atom.accepts_prefix() {
        return Err(UnitError::MalformedUnit(whole.to_string()));
    }
    Ok(PrefixedAtom::new(prefix, *atom))
}

/// Parses `num` or `num/den`, each a prefix followed by a base atom symbol.
pub fn parse_unit(text: &str) -> Result<Unit, UnitError> {
    if text.is_empty() || text.chars().any(char::is_whitespace) {
        return Err(UnitError::MalformedUnit(text.to_string()));
    }
    let mut parts = text.split('/');
    let num = parts.next().unwrap_or_default();
    let den = parts.next();
    if parts.next().is_some() {
        return Err(UnitError::MalformedUnit(text.to_string()));
    }
    let numerator = parse_prefixed_atom(num, text)?;
    if numerator.atom.denominator_only() {
        return Err(UnitError::MalformedUnit(text.to_string()));
    }
    let denominator = den.map(|d| parse_prefixed_atom(d, text)).transpose()?;
    Ok(Unit { numerator, denominator })
}

/// A non-negative exact value in a unit.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Measurement {
    pub value: ExactDecimal,
    pub unit: Unit,
}

impl Measurement {
    pub fn new(value: ExactDecimal, unit: Unit) -> Self {
        Self { value, unit }
    }

    /// Parses a surface form such as `1.59mg` or `3.26E+01g`.
    pub fn parse(text: &str) -> Result<Self, UnitError> {
        if text.starts_with('-') {
            return Err(UnitError::NegativeValue(text.to_string()));
        }
        let split = number_prefix_len(text)
            .ok_or_else(|| UnitError::Number(NumberError::MalformedNumber(text.to_string())))?;
        let (num, unit) = text.split_at(split);
        Ok(Self { value: numerics::parse_number(num)?, unit: parse_unit(unit)? })
    }

    /// Parses a number literal and unit given separately.
    pub fn from_parts(number: &str, unit: &str) -> Result<Self, UnitError> {
        if number.starts_with('-') {
            return Err(UnitError::NegativeValue(number.to_string()));
        }
        Ok(Self { value: numerics::parse_number(number)?, unit: parse_unit(unit)? })
    }
}

/// Length of the longest leading number literal in `text`.
fn number_prefix_len(text: &str) -> Option<usize> {
    static LEAD: once_cell::sync::Lazy<regex::Regex> = once_cell::sync::Lazy::new(|| {
        regex::Regex::new(&format!("^{}", numerics::NUMBER_PATTERN)).expect("pattern")
    });
    LEAD.find(text).map(|m| m.end())
}

/// Re-expresses `m` with both prefixes removed; the quantity is unchanged.
pub fn canonicalize(m: &Measurement) -> Measurement {
    Measurement {
        value: m.value.scale_by_power_of_ten(m.unit.scale_exponent()),
        unit: m.unit.prefix_free(),
    }
}

/// Exact ordering of two compatible measurements.
pub fn compare_measurements(a: &Measurement, b: &Measurement) -> Result<Ordering, UnitError> {
    if !a.unit.compatible(&b.unit) {
        return Err(UnitError::DimensionMismatch(a.unit, b.unit));
    }
    Ok(canonicalize(a).value.cmp_value(&canonicalize(b).value))
}

/// `true` iff both measurements denote the same quantity.
pub fn quantities_equal(a: &Measurement, b: &Measurement) -> Result<bool, UnitError> {
    compare_measurements(a, b).map(|o| o == Ordering::Equal)
}

/// Number immediately followed by the unit, e.g. `1.59mg`.
pub fn render_measurement(m: &Measurement, notation: Notation) -> Result<String, UnitError> {
    Ok(format!("{}{}", numerics::render(&m.value, notation)?, m.unit))
}

/// One row of the unit inventory: a prefix-free head and the variants that
/// the generator may emit for it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnitFamily {
    pub head: Unit,
    pub variants: Vec<Unit>,
}

impl UnitFamily {
    pub fn name(&self) -> String {
        self.head.to_string()
    }
}

const DEFAULT_TABLE: &str = "\
m: m, cm, mm, µm, nm
A: A, mA, µA, nA
K: K, mK, µK
M: M, mM, µM, nM
Eq/l: Eq/l, mEq/l, µEq/l, mEq/ml, mEq/µl
g/l: g/l, mg/l, µg/l, mg/dl, g/dl, µg/dl, ng/dl, g/ml, mg/ml
IU/l: IU/l, IU/ml, mIU/ml, µIU/ml, mIU/l, µIU/l, IU/µl, mIU/µl
U/l: U/l, U/ml, U/µl
l/min: l/min, dl/min, ml/min, µl/min
#/l: #/dl, #/ml, #/µl
k/l: k/dl, k/ml, k/µl
l: l, dl, ml, µl, nl, pl, fl
g: g, mg, µg, ng, pg, fg
s: s, ms, µs, ns
m/hr: m/hr, cm/hr, mm/hr, µm/hr
l/hr: l/hr, dl/hr, ml/hr, µl/hr
";

/// The unit families available to generation and detection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnitInventory {
    families: Vec<UnitFamily>,
}

impl Default for UnitInventory {
    fn default() -> Self {
        Self::parse_table(DEFAULT_TABLE).expect("built-in unit table")
    }
}

static BUILTIN: once_cell::sync::Lazy<UnitInventory> =
    once_cell::sync::Lazy::new(UnitInventory::default);

impl UnitInventory {
    /// Shared instance of the built-in inventory.
    pub fn builtin() -> &'static UnitInventory {
        &BUILTIN
    }

    /// Parses a plain-text table, one family per line: `head: v1, v2, ...`.
    /// Blank lines are skipped.
    pub fn parse_table(text: &str) -> Result<Self, UnitError> {
        let mut families = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| UnitError::Table { line: line_no, message };
            let (head, rest) =
                line.split_once(':').ok_or_else(|| err("expected `head: variants`".into()))?;
            let head = parse_unit(head.trim()).map_err(|e| err(e.to_string()))?;
            if !head.is_prefix_free() {
                return Err(err(format!("family head {head} carries a prefix")));
            }
            let mut variants = Vec::new();
            for v in rest.split(',').map(str::trim).filter(|v| !v.is_empty()) {
                let unit = parse_unit(v).map_err(|e| err(e.to_string()))?;
                if !unit.compatible(&head) {
                    return Err(err(format!("variant {unit} is not compatible with {head}")));
                }
                variants.push(unit);
            }
            if variants.is_empty() {
                return Err(err(format!("family {head} has no variants")));
            }
            families.push(UnitFamily { head, variants });
        }
        Ok(Self { families })
    }

    pub fn from_file(path: &Path) -> Result<Self, UnitError> {
        let text = std::fs::read_to_string(path).map_err(|e| UnitError::Table {
            line: 0,
            message: format!("{}: {e}", path.display()),
        })?;
        Self::parse_table(&text)
    }

    pub fn families(&self) -> &[UnitFamily] {
        &self.families
    }

    pub fn family(&self, head: &str) -> Option<&UnitFamily> {
        self.families.iter().find(|f| f.name() == head)
    }

    /// Single-atom families whose atom is one of `atoms`.
    pub fn restricted_to(&self, atoms: &[BaseAtom]) -> UnitInventory {
        let allowed = |a: BaseAtom| atoms.iter().any(|b| b.dimension() == a.dimension());
        UnitInventory {
            families: self
                .families
                .iter()
                .filter(|f| f.head.denominator.is_none() && allowed(f.head.numerator.atom))
                .cloned()
                .collect(),
        }
    }

    /// `true` if some family shares the unit's dimension.
    pub fn knows_dimension(&self, unit: &Unit) -> bool {
        self.families.iter().any(|f| f.head.compatible(unit))
    }

    pub fn all_variants(&self) -> impl Iterator<Item = &Unit> {
        self.families.iter().flat_map(|f| f.variants.iter())
    }

    /// Renders the inventory back into the table format.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        for f in &self.families {
            let vs: Vec<String> = f.variants.iter().map(Unit::to_string).collect();
            out.push_str(&format!("{}: {}\n", f.head, vs.join(", ")));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use UnitPrefix as P;

    fn m(s: &str) -> Measurement {
        Measurement::parse(s).unwrap()
    }

    #[test]
    fn parses_ratio_units() {
        let u = parse_unit("mg/dl").unwrap();
        assert_eq!(u.numerator, PrefixedAtom::new(P::Milli, BaseAtom::Gram));
        assert_eq!(u.denominator, Some(PrefixedAtom::new(P::Deci, BaseAtom::Liter(LiterSymbol::Lower))));
        let u = parse_unit("mEq/µl").unwrap();
        assert_eq!(u.numerator, PrefixedAtom::new(P::Milli, BaseAtom::Equivalent));
        assert_eq!(u.denominator, Some(PrefixedAtom::new(P::Micro, BaseAtom::Liter(LiterSymbol::Lower))));
        assert_eq!(parse_unit("g").unwrap(), Unit::simple(P::None, BaseAtom::Gram));
    }

    #[test]
    fn case_sensitive_atoms() {
        assert_eq!(parse_unit("m").unwrap(), Unit::simple(P::None, BaseAtom::Meter));
        assert_eq!(parse_unit("M").unwrap(), Unit::simple(P::None, BaseAtom::Molar));
        assert_eq!(parse_unit("mM").unwrap(), Unit::simple(P::Milli, BaseAtom::Molar));
        assert_eq!(parse_unit("mm").unwrap(), Unit::simple(P::Milli, BaseAtom::Meter));
        assert_eq!(parse_unit("mK").unwrap(), Unit::simple(P::Milli, BaseAtom::Kelvin));
        assert_eq!(parse_unit("ms").unwrap(), Unit::simple(P::Milli, BaseAtom::Second));
        assert!(parse_unit("mg/dL").unwrap().compatible(&parse_unit("g/l").unwrap()));
    }

    #[test]
    fn k_and_hash_are_atoms() {
        let u = parse_unit("k/µl").unwrap();
        assert_eq!(u.numerator, PrefixedAtom::bare(BaseAtom::Thousand));
        let c = parse_unit("#/µl").unwrap();
        assert!(!u.compatible(&c));
        assert_eq!(parse_unit("kg"), Err(UnitError::UnknownPrefix("kg".into())));
    }

    #[test]
    fn time_atoms_only_in_denominator() {
        assert!(parse_unit("l/min").is_ok());
        assert!(parse_unit("µm/hr").is_ok());
        assert!(matches!(parse_unit("min"), Err(UnitError::MalformedUnit(_))));
        assert!(matches!(parse_unit("l/mhr"), Err(UnitError::MalformedUnit(_))));
        assert!(matches!(parse_unit("mk/l"), Err(UnitError::MalformedUnit(_))));
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(parse_unit("g/l/s"), Err(UnitError::MalformedUnit(_))));
        assert!(matches!(parse_unit(""), Err(UnitError::MalformedUnit(_))));
        assert!(matches!(parse_unit("g /l"), Err(UnitError::MalformedUnit(_))));
        assert!(matches!(parse_unit("g/"), Err(UnitError::MalformedUnit(_))));
        assert!(matches!(parse_unit("xyz"), Err(UnitError::UnknownAtom(_))));
        assert!(matches!(parse_unit("Qg"), Err(UnitError::UnknownPrefix(_))));
    }

    #[test]
    fn prefix_factors() {
        assert!(prefix_factor(P::Milli).value_eq(&"0.001".parse().unwrap()));
        assert!(prefix_factor(P::None).value_eq(&"1".parse().unwrap()));
        assert!(prefix_factor(P::Micro).value_eq(&"0.000001".parse().unwrap()));
        assert_eq!(prefix_factor(P::Femto).exponent(), -15);
    }

    #[test]
    fn canonicalize_examples() {
        let c = canonicalize(&m("2.5mg"));
        assert_eq!(render_measurement(&c, Notation::Decimal).unwrap(), "0.0025g");
        assert_eq!(canonicalize(&m("3.8g")), m("3.8g"));
        let c = canonicalize(&m("85mg/dl"));
        assert_eq!(render_measurement(&c, Notation::Decimal).unwrap(), "0.85g/l");
        assert!(c.value.value_eq(&"0.85".parse().unwrap()));
    }

    #[test]
    fn equality_and_order() {
        assert!(quantities_equal(&m("3.5g"), &m("3500mg")).unwrap());
        assert!(quantities_equal(&m("1g"), &m("1g")).unwrap());
        assert!(!quantities_equal(&m("1.59mg"), &m("3.8g")).unwrap());
        assert_eq!(compare_measurements(&m("1.59mg"), &m("3.8g")).unwrap(), Ordering::Less);
        assert_eq!(compare_measurements(&m("2g"), &m("2g")).unwrap(), Ordering::Equal);
        assert_eq!(compare_measurements(&m("3.4g"), &m("2.8mg")).unwrap(), Ordering::Greater);
        assert!(matches!(
            compare_measurements(&m("1g"), &m("1l")),
            Err(UnitError::DimensionMismatch(..))
        ));
        assert!(quantities_equal(&m("1mg/dL"), &m("10mg/l")).unwrap());
    }

    #[test]
    fn renders_surface_forms() {
        assert_eq!(render_measurement(&m("1.59mg"), Notation::Decimal).unwrap(), "1.59mg");
        assert_eq!(render_measurement(&m("32.6g"), Notation::Scientific).unwrap(), "3.26E+01g");
        let zero = Measurement::new(ExactDecimal::zero(), parse_unit("g").unwrap());
        assert_eq!(render_measurement(&zero, Notation::Decimal).unwrap(), "0g");
    }

    #[test]
    fn negative_measurements_rejected() {
        assert!(matches!(Measurement::parse("-3g"), Err(UnitError::NegativeValue(_))));
        assert!(matches!(Measurement::from_parts("-3", "g"), Err(UnitError::NegativeValue(_))));
    }

    #[test]
    fn inventory_round_trips_every_unit() {
        let inv = UnitInventory::default();
        assert_eq!(inv.families().len(), 16);
        let mut n = 0;
        for u in inv.all_variants() {
            assert_eq!(parse_unit(&u.to_string()).unwrap(), *u);
            n += 1;
        }
        assert_eq!(n, 76);
        assert_eq!(UnitInventory::parse_table(&inv.to_table()).unwrap(), inv);
    }

    #[test]
    fn inventory_restriction() {
        let inv = UnitInventory::default().restricted_to(&[
            BaseAtom::Gram,
            BaseAtom::Liter(LiterSymbol::Lower),
            BaseAtom::Meter,
            BaseAtom::Second,
        ]);
        let names: Vec<String> = inv.families().iter().map(UnitFamily::name).collect();
        assert_eq!(names, ["m", "l", "g", "s"]);
    }

    #[test]
    fn inventory_table_errors() {
        assert!(matches!(UnitInventory::parse_table("g g, mg"), Err(UnitError::Table { line: 1, .. })));
        assert!(matches!(UnitInventory::parse_table("\nmg: mg"), Err(UnitError::Table { line: 2, .. })));
        assert!(matches!(UnitInventory::parse_table("g: g, ml"), Err(UnitError::Table { .. })));
    }
}
