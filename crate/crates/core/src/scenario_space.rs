//! The fixed aspect × phase × level scenario space and volumetric cell algebra.

use std::collections::BTreeSet;
use std::fmt;

use crate::diagnostics::{Code, Diagnostic};
use crate::source::SourceSpan;

/// One of the three dimensions of the scenario space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    Aspect,
    Phase,
    Level,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::Aspect => "aspect",
            Axis::Phase => "phase",
            Axis::Level => "level",
        }
    }

    /// Number of values along this axis.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(self) -> usize {
        match self {
            Axis::Aspect => Aspect::ALL.len(),
            Axis::Phase => Phase::ALL.len(),
            Axis::Level => Level::ALL.len(),
        }
    }

    pub fn spellings(self) -> &'static [&'static str] {
        match self {
            Axis::Aspect => &ASPECT_SPELLINGS,
            Axis::Phase => &PHASE_SPELLINGS,
            Axis::Level => &LEVEL_SPELLINGS,
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

const ASPECT_SPELLINGS: [&str; 7] = [
    "as-planned",
    "as-observed",
    "divergence",
    "scheduling",
    "cost",
    "safety",
    "analytics",
];
const PHASE_SPELLINGS: [&str; 5] = ["planning", "construction", "operation", "renovation", "demolition"];
const LEVEL_SPELLINGS: [&str; 7] = [
    "device/person",
    "machine/crew",
    "site-unit",
    "site",
    "site-office",
    "company",
    "network",
];

macro_rules! axis_enum {
    ($(#[$meta:meta])* $name:ident, $axis:expr, $spellings:ident, [$($variant:ident),+ $(,)?]) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn ordinal(self) -> usize {
                self as usize
            }

            pub fn from_ordinal(ordinal: usize) -> Option<Self> {
                Self::ALL.get(ordinal).copied()
            }

            /// The canonical lowercase spelling.
            pub fn as_str(self) -> &'static str {
                $spellings[self as usize]
            }

            pub fn parse(token: &str) -> Result<Self, UnknownAxisValue> {
                $spellings
                    .iter()
                    .position(|s| *s == token)
                    .map(|i| Self::ALL[i])
                    .ok_or_else(|| UnknownAxisValue {
                        axis: $axis,
                        token: token.to_string(),
                    })
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }
    };
}

axis_enum!(
    /// AECO concern a requirement addresses.
    Aspect, Axis::Aspect, ASPECT_SPELLINGS,
    [AsPlanned, AsObserved, Divergence, Scheduling, Cost, Safety, Analytics]
);
axis_enum!(
    /// Stage of the building lifecycle.
    Phase, Axis::Phase, PHASE_SPELLINGS,
    [Planning, Construction, Operation, Renovation, Demolition]
);
axis_enum!(
    /// Hierarchy level, ordered by the height of the viewer.
    Level, Axis::Level, LEVEL_SPELLINGS,
    [DevicePerson, MachineCrew, SiteUnit, Site, SiteOffice, Company, Network]
);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown {axis} value '{token}'")]
pub struct UnknownAxisValue {
    pub axis: Axis,
    pub token: String,
}

/// A parsed value on any axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AxisValue {
    Aspect(Aspect),
    Phase(Phase),
    Level(Level),
}

impl AxisValue {
    pub fn axis(self) -> Axis {
        match self {
            AxisValue::Aspect(_) => Axis::Aspect,
            AxisValue::Phase(_) => Axis::Phase,
            AxisValue::Level(_) => Axis::Level,
        }
    }

    pub fn ordinal(self) -> usize {
        match self {
            AxisValue::Aspect(v) => v.ordinal(),
            AxisValue::Phase(v) => v.ordinal(),
            AxisValue::Level(v) => v.ordinal(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AxisValue::Aspect(v) => v.as_str(),
            AxisValue::Phase(v) => v.as_str(),
            AxisValue::Level(v) => v.as_str(),
        }
    }
}

/// Resolves a canonical spelling on the given axis. Matching is exact and
/// case-sensitive.
pub fn parse_axis_value(axis: Axis, token: &str) -> Result<AxisValue, UnknownAxisValue> {
    match axis {
        Axis::Aspect => Aspect::parse(token).map(AxisValue::Aspect),
        Axis::Phase => Phase::parse(token).map(AxisValue::Phase),
        Axis::Level => Level::parse(token).map(AxisValue::Level),
    }
}

/// A unit cell of the 7×5×7 grid, by ordinals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub aspect: u8,
    pub phase: u8,
    pub level: u8,
}

impl Cell {
    pub const COUNT: usize = 7 * 5 * 7;

    pub fn new(aspect: u8, phase: u8, level: u8) -> Self {
        Cell { aspect, phase, level }
    }

    pub fn in_grid(self) -> bool {
        (self.aspect as usize) < Aspect::ALL.len()
            && (self.phase as usize) < Phase::ALL.len()
            && (self.level as usize) < Level::ALL.len()
    }

    /// Every cell of the grid in (aspect, phase, level) order.
    pub fn all() -> impl Iterator<Item = Cell> {
        (0..7u8).flat_map(|a| (0..5u8).flat_map(move |p| (0..7u8).map(move |l| Cell::new(a, p, l))))
    }
}

/// Inclusive box over the three axes. May be inverted when built from raw
/// input; [`validate_volumetric`] reports that.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Cuboid {
    pub aspect_from: Aspect,
    pub aspect_to: Aspect,
    pub phase_from: Phase,
    pub phase_to: Phase,
    pub level_from: Level,
    pub level_to: Level,
}

impl Cuboid {
    pub fn new(aspects: (Aspect, Aspect), phases: (Phase, Phase), levels: (Level, Level)) -> Self {
        Cuboid {
            aspect_from: aspects.0,
            aspect_to: aspects.1,
            phase_from: phases.0,
            phase_to: phases.1,
            level_from: levels.0,
            level_to: levels.1,
        }
    }

    pub fn full() -> Self {
        Cuboid::new(
            (Aspect::AsPlanned, Aspect::Analytics),
            (Phase::Planning, Phase::Demolition),
            (Level::DevicePerson, Level::Network),
        )
    }

    /// Axes whose range runs backwards.
    pub fn inverted_axes(&self) -> Vec<Axis> {
        let mut axes = Vec::new();
        if self.aspect_from > self.aspect_to {
            axes.push(Axis::Aspect);
        }
        if self.phase_from > self.phase_to {
            axes.push(Axis::Phase);
        }
        if self.level_from > self.level_to {
            axes.push(Axis::Level);
        }
        axes
    }

    pub fn is_valid(&self) -> bool {
        self.inverted_axes().is_empty()
    }

    /// Product of the inclusive range lengths; zero for an inverted cuboid.
    pub fn volume(&self) -> usize {
        fn len(from: usize, to: usize) -> usize {
            (to + 1).saturating_sub(from)
        }
        len(self.aspect_from.ordinal(), self.aspect_to.ordinal())
            * len(self.phase_from.ordinal(), self.phase_to.ordinal())
            * len(self.level_from.ordinal(), self.level_to.ordinal())
    }

    fn cells_iter(&self) -> impl Iterator<Item = Cell> + '_ {
        let aspects = self.aspect_from.ordinal() as u8..=self.aspect_to.ordinal() as u8;
        aspects.flat_map(move |a| {
            let phases = self.phase_from.ordinal() as u8..=self.phase_to.ordinal() as u8;
            phases.flat_map(move |p| {
                let levels = self.level_from.ordinal() as u8..=self.level_to.ordinal() as u8;
                levels.map(move |l| Cell::new(a, p, l))
            })
        })
    }
}

impl fmt::Display for Cuboid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}..{}, {}..{}, {}..{}]",
            self.aspect_from, self.aspect_to, self.phase_from, self.phase_to, self.level_from, self.level_to
        )
    }
}

/// Every cell enclosed by `c`.
pub fn cuboid_cells(c: &Cuboid) -> BTreeSet<Cell> {
    c.cells_iter().collect()
}

/// The region of the scenario space a scenario claims.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Volumetric {
    pub cuboids: Vec<Cuboid>,
}

impl Volumetric {
    pub fn new(cuboids: Vec<Cuboid>) -> Self {
        Volumetric { cuboids }
    }
}

/// Union of the member cuboids' cells.
pub fn volumetric_cells(v: &Volumetric) -> BTreeSet<Cell> {
    v.cuboids.iter().flat_map(|c| c.cells_iter()).collect()
}

/// E004 per inverted cuboid, W103 per overlapping pair, W104 when nothing is
/// covered. All findings are positioned at `span` (the meta header).
pub fn validate_volumetric(v: &Volumetric, span: &SourceSpan) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for (i, c) in v.cuboids.iter().enumerate() {
        for axis in c.inverted_axes() {
            out.push(Diagnostic::at(
                Code::E004,
                format!("volumetric entry {}: inverted {axis} range in {c}", i + 1),
                span,
            ));
        }
    }
    let inverted = !out.is_empty();

    let cell_sets: Vec<(usize, BTreeSet<Cell>)> = v
        .cuboids
        .iter()
        .enumerate()
        .filter(|(_, c)| c.is_valid())
        .map(|(i, c)| (i, cuboid_cells(c)))
        .collect();
    for (x, (i, a)) in cell_sets.iter().enumerate() {
        for (j, b) in &cell_sets[x + 1..] {
            let shared = a.intersection(b).count();
            if shared > 0 {
                out.push(Diagnostic::at(
                    Code::W103,
                    format!("volumetric entries {} and {} overlap in {shared} cell(s)", i + 1, j + 1),
                    span,
                ));
            }
        }
    }

    // An inverted range already explains an empty claim.
    if !inverted && cell_sets.iter().all(|(_, s)| s.is_empty()) {
        out.push(Diagnostic::at(Code::W104, "volumetric covers no cells of the scenario space", span));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::sync::Arc;

    fn span() -> SourceSpan {
        SourceSpan {
            path: Arc::from("s.md"),
            start_line: 1,
            start_col: 15,
            end_line: 1,
            end_col: 20,
        }
    }

    fn codes(d: &[Diagnostic]) -> Vec<Code> {
        d.iter().map(|d| d.code).collect()
    }

    #[test]
    fn axis_values_from_listing_order() {
        assert_eq!(parse_axis_value(Axis::Aspect, "as-planned"), Ok(AxisValue::Aspect(Aspect::AsPlanned)));
        assert_eq!(Aspect::AsPlanned.ordinal(), 0);
        assert_eq!(parse_axis_value(Axis::Phase, "construction").unwrap().ordinal(), 1);
        assert_eq!(
            parse_axis_value(Axis::Level, "helicopter"),
            Err(UnknownAxisValue { axis: Axis::Level, token: "helicopter".into() })
        );
        assert!(parse_axis_value(Axis::Phase, "Construction").is_err());
        assert_eq!((Aspect::ALL.len(), Phase::ALL.len(), Level::ALL.len()), (7, 5, 7));
    }

    #[test]
    fn spellings_round_trip() {
        for axis in [Axis::Aspect, Axis::Phase, Axis::Level] {
            assert_eq!(axis.spellings().len(), axis.len());
            for (i, s) in axis.spellings().iter().enumerate() {
                let v = parse_axis_value(axis, s).unwrap();
                assert_eq!(v.ordinal(), i);
                assert_eq!(v.as_str(), *s);
            }
        }
    }

    #[test]
    fn cuboid_cell_counts() {
        assert_eq!(cuboid_cells(&Cuboid::full()).len(), 245);
        let point = Cuboid::new(
            (Aspect::AsPlanned, Aspect::AsPlanned),
            (Phase::Planning, Phase::Planning),
            (Level::Site, Level::Site),
        );
        assert_eq!(cuboid_cells(&point).len(), 1);
        let c = Cuboid::new(
            (Aspect::AsPlanned, Aspect::Divergence),
            (Phase::Construction, Phase::Construction),
            (Level::MachineCrew, Level::Site),
        );
        assert_eq!(cuboid_cells(&c).len(), 9);
    }

    #[test]
    fn union_examples() {
        assert!(volumetric_cells(&Volumetric::default()).is_empty());
        let c = Cuboid::new(
            (Aspect::AsPlanned, Aspect::Divergence),
            (Phase::Construction, Phase::Construction),
            (Level::MachineCrew, Level::Site),
        );
        assert_eq!(volumetric_cells(&Volumetric::new(vec![c, c])).len(), 9);
        // Shifted by two aspects: shares the divergence column (3 cells).
        let shifted = Cuboid::new(
            (Aspect::Divergence, Aspect::Cost),
            (Phase::Construction, Phase::Construction),
            (Level::MachineCrew, Level::Site),
        );
        let union = volumetric_cells(&Volumetric::new(vec![c, shifted]));
        let brute = Cell::all()
            .filter(|cell| cuboid_cells(&c).contains(cell) || cuboid_cells(&shifted).contains(cell))
            .count();
        assert_eq!(brute, 15);
        assert_eq!(union.len(), 15);
    }

    #[test]
    fn validation_examples() {
        let inverted = Cuboid::new(
            (Aspect::Cost, Aspect::AsPlanned),
            (Phase::Planning, Phase::Planning),
            (Level::Site, Level::Site),
        );
        assert_eq!(codes(&validate_volumetric(&Volumetric::new(vec![inverted]), &span())), vec![Code::E004]);

        let risk = Volumetric::new(vec![
            Cuboid::new(
                (Aspect::AsPlanned, Aspect::Scheduling),
                (Phase::Planning, Phase::Construction),
                (Level::Site, Level::Site),
            ),
            Cuboid::new(
                (Aspect::Safety, Aspect::Analytics),
                (Phase::Planning, Phase::Construction),
                (Level::Site, Level::Site),
            ),
        ]);
        assert!(validate_volumetric(&risk, &span()).is_empty());
        assert_eq!(volumetric_cells(&risk).len(), 12);

        let dup = Volumetric::new(vec![risk.cuboids[0], risk.cuboids[0]]);
        assert_eq!(codes(&validate_volumetric(&dup, &span())), vec![Code::W103]);

        assert_eq!(codes(&validate_volumetric(&Volumetric::default(), &span())), vec![Code::W104]);
    }

    fn arb_cuboid() -> impl Strategy<Value = Cuboid> {
        (0..7usize, 0..7usize, 0..5usize, 0..5usize, 0..7usize, 0..7usize).prop_map(|(a0, a1, p0, p1, l0, l1)| {
            Cuboid::new(
                (Aspect::ALL[a0.min(a1)], Aspect::ALL[a0.max(a1)]),
                (Phase::ALL[p0.min(p1)], Phase::ALL[p0.max(p1)]),
                (Level::ALL[l0.min(l1)], Level::ALL[l0.max(l1)]),
            )
        })
    }

    proptest! {
        #[test]
        fn cell_count_is_range_product(c in arb_cuboid()) {
            let cells = cuboid_cells(&c);
            let brute = Cell::all()
                .filter(|x| {
                    (c.aspect_from.ordinal()..=c.aspect_to.ordinal()).contains(&(x.aspect as usize))
                        && (c.phase_from.ordinal()..=c.phase_to.ordinal()).contains(&(x.phase as usize))
                        && (c.level_from.ordinal()..=c.level_to.ordinal()).contains(&(x.level as usize))
                })
                .collect::<BTreeSet<_>>();
            prop_assert_eq!(cells.len(), c.volume());
            prop_assert_eq!(&cells, &brute);
            prop_assert!(cells.iter().all(|x| x.in_grid()));
        }

        #[test]
        fn union_is_order_and_duplicate_insensitive(
            cs in prop::collection::vec(arb_cuboid(), 0..5),
            rot in 0usize..5,
        ) {
            let base = volumetric_cells(&Volumetric::new(cs.clone()));
            let mut permuted = cs.clone();
            if !permuted.is_empty() {
                let k = rot % permuted.len();
                permuted.rotate_left(k);
                permuted.reverse();
                permuted.push(permuted[0]);
            }
            prop_assert_eq!(volumetric_cells(&Volumetric::new(permuted)), base);
        }
    }
}
