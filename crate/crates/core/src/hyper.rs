//! Two-photon spin-path-OAM hyperentangled Bell-like states.
//!
//! Each photon carries 8 levels, `level = 4*path + 2*spin + oam` with
//! `H, a1/a3, +1 -> 0` and `V, a2/a4, -1 -> 1`. Photon A occupies modes
//! 0..8 and photon B modes 8..16.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{StateVector, Statistics};
use crate::linalg::{CMatrix, ONE};

pub const LEVELS: usize = 8;
pub const MODES: usize = 16;
pub const LABEL_COUNT: usize = 64;

/// Sequence numbers of the fifteen named Bell-like states.
pub const NAMED: [u8; 15] = [1, 2, 3, 4, 17, 18, 19, 20, 33, 34, 37, 38, 49, 50, 58];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dof {
    Spin,
    Path,
    Oam,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Kind {
    Phi,
    Psi,
    Theta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Dof {
    /// The two kinds defined for this degree of freedom: the first pairs equal
    /// levels (`|0 0> +- |1 1>`), the second opposite ones (`|0 1> +- |1 0>`).
    pub fn kinds(self) -> [Kind; 2] {
        match self {
            Dof::Spin => [Kind::Phi, Kind::Theta],
            Dof::Path => [Kind::Theta, Kind::Psi],
            Dof::Oam => [Kind::Psi, Kind::Phi],
        }
    }

    /// Bit position of this DOF inside an 8-level photon index.
    pub fn level_shift(self) -> usize {
        match self {
            Dof::Path => 2,
            Dof::Spin => 1,
            Dof::Oam => 0,
        }
    }
}

/// One DOF Bell state, e.g. `Theta+` on path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DofLabel {
    dof: Dof,
    kind: Kind,
    sign: Sign,
}

impl DofLabel {
    pub fn new(dof: Dof, kind: Kind, sign: Sign) -> Result<Self> {
        if !dof.kinds().contains(&kind) {
            return Err(Error::Label(format!("{kind:?} is not defined for {dof:?}")));
        }
        Ok(DofLabel { dof, kind, sign })
    }

    pub fn parse(dof: Dof, text: &str) -> Result<Self> {
        let (name, sign) = match text.as_bytes().last() {
            Some(b'+') => (&text[..text.len() - 1], Sign::Plus),
            Some(b'-') => (&text[..text.len() - 1], Sign::Minus),
            _ => return Err(Error::Label(format!("missing sign in {text:?}"))),
        };
        let kind = match name {
            "Phi" => Kind::Phi,
            "Psi" => Kind::Psi,
            "Theta" => Kind::Theta,
            _ => return Err(Error::Label(format!("unknown kind {name:?}"))),
        };
        DofLabel::new(dof, kind, sign)
    }

    pub fn dof(self) -> Dof {
        self.dof
    }

    pub fn kind(self) -> Kind {
        self.kind
    }

    pub fn sign(self) -> Sign {
        self.sign
    }

    /// True when the state pairs opposite levels of A and B.
    pub fn is_anti(self) -> bool {
        self.dof.kinds()[1] == self.kind
    }

    pub fn is_minus(self) -> bool {
        self.sign == Sign::Minus
    }

    /// 2x2 amplitude table `[a][b]` of this DOF state.
    pub fn amplitudes(self) -> [[f64; 2]; 2] {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let s = if self.is_minus() { -h } else { h };
        if self.is_anti() {
            [[0.0, h], [s, 0.0]]
        } else {
            [[h, 0.0], [0.0, s]]
        }
    }
}

impl fmt::Display for DofLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.is_minus() { '-' } else { '+' };
        write!(f, "{:?}{sign}", self.kind)
    }
}

/// A spin x path x OAM product Bell-like state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HyperLabel {
    spin: DofLabel,
    path: DofLabel,
    oam: DofLabel,
}

impl HyperLabel {
    pub fn new(spin: DofLabel, path: DofLabel, oam: DofLabel) -> Result<Self> {
        if spin.dof != Dof::Spin || path.dof != Dof::Path || oam.dof != Dof::Oam {
            return Err(Error::Label("DOF labels given in the wrong slots".into()));
        }
        Ok(HyperLabel { spin, path, oam })
    }

    /// Looks a label up by its sequence number `1..=64`.
    pub fn from_sequence(seq: usize) -> Result<Self> {
        if !(1..=LABEL_COUNT).contains(&seq) {
            return Err(Error::Label(format!("sequence number {seq} outside 1..=64")));
        }
        Ok(table()[seq - 1])
    }

    pub fn spin(&self) -> DofLabel {
        self.spin
    }

    pub fn path(&self) -> DofLabel {
        self.path
    }

    pub fn oam(&self) -> DofLabel {
        self.oam
    }

    pub fn sequence_number(&self) -> usize {
        table().iter().position(|l| l == self).expect("table is complete") + 1
    }

    fn dofs(&self) -> [DofLabel; 3] {
        [self.spin, self.path, self.oam]
    }
}

impl fmt::Display for HyperLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Phi_{}", self.sequence_number())
    }
}

impl FromStr for HyperLabel {
    type Err = Error;

    /// Accepts a sequence number (`58`, `Phi_58`) or a triple
    /// `spin/path/oam` such as `Theta+/Psi-/Phi+`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let num = t.strip_prefix("Phi_").unwrap_or(t);
        if let Ok(seq) = num.parse::<usize>() {
            return HyperLabel::from_sequence(seq);
        }
        let parts: Vec<&str> = t.split('/').collect();
        if parts.len() != 3 {
            return Err(Error::Label(format!("cannot parse hyper label {s:?}")));
        }
        HyperLabel::new(
            DofLabel::parse(Dof::Spin, parts[0])?,
            DofLabel::parse(Dof::Path, parts[1])?,
            DofLabel::parse(Dof::Oam, parts[2])?,
        )
    }
}

#[derive(Deserialize)]
struct TableFile {
    schema_version: u32,
    named: Vec<u8>,
    labels: Vec<TableRow>,
}

#[derive(Deserialize)]
struct TableRow {
    seq: usize,
    spin: String,
    path: String,
    oam: String,
}

const TABLE_JSON: &str = include_str!("../data/hyper_labels.json");

fn parse_table(text: &str) -> Result<Vec<HyperLabel>> {
    let file: TableFile =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("hyper label table: {e}")))?;
    if file.schema_version != 1 {
        return Err(Error::Parse(format!(
            "unsupported hyper table schema {}",
            file.schema_version
        )));
    }
    if file.named != NAMED {
        return Err(Error::Parse("named subscripts differ from the built-in list".into()));
    }
    if file.labels.len() != LABEL_COUNT {
        return Err(Error::Parse(format!("expected 64 rows, got {}", file.labels.len())));
    }
    let mut slots: Vec<Option<HyperLabel>> = vec![None; LABEL_COUNT];
    for row in &file.labels {
        let label = HyperLabel::new(
            DofLabel::parse(Dof::Spin, &row.spin)?,
            DofLabel::parse(Dof::Path, &row.path)?,
            DofLabel::parse(Dof::Oam, &row.oam)?,
        )?;
        match slots.get_mut(row.seq.wrapping_sub(1)) {
            Some(slot @ None) => *slot = Some(label),
            _ => return Err(Error::Parse(format!("bad or repeated seq {}", row.seq))),
        }
    }
    let labels: Vec<HyperLabel> = slots.into_iter().map(Option::unwrap).collect();
    let mut sorted = labels.clone();
    sorted.sort();
    sorted.dedup();
    if sorted.len() != LABEL_COUNT {
        return Err(Error::Parse("hyper label table repeats a triple".into()));
    }
    Ok(labels)
}

fn table() -> &'static [HyperLabel] {
    static TABLE: OnceLock<Vec<HyperLabel>> = OnceLock::new();
    TABLE.get_or_init(|| parse_table(TABLE_JSON).expect("bundled hyper label table is valid"))
}

/// All 64 labels in sequence order.
pub fn all_hyper_labels() -> Vec<HyperLabel> {
    table().to_vec()
}

/// The fifteen named labels.
pub fn named_hyper_labels() -> Vec<HyperLabel> {
    NAMED.iter().map(|&s| table()[s as usize - 1]).collect()
}

/// 8x8 amplitude table `chi[level_A][level_B]` of a hyper label.
pub fn hyper_amplitudes(h: &HyperLabel) -> [[f64; LEVELS]; LEVELS] {
    let mut chi = [[0.0; LEVELS]; LEVELS];
    let tables = h.dofs().map(|d| (d.dof.level_shift(), d.amplitudes()));
    for (la, row) in chi.iter_mut().enumerate() {
        for (lb, cell) in row.iter_mut().enumerate() {
            *cell = tables
                .iter()
                .map(|(shift, t)| t[(la >> shift) & 1][(lb >> shift) & 1])
                .product();
        }
    }
    chi
}

/// The two-photon, 16-mode state of `h`.
pub fn hyper_bell_state(h: &HyperLabel) -> Result<StateVector> {
    let chi = hyper_amplitudes(h);
    let terms = (0..LEVELS)
        .flat_map(|la| (0..LEVELS).map(move |lb| (la, lb)))
        .filter(|&(la, lb)| chi[la][lb] != 0.0)
        .map(|(la, lb)| (vec![la, LEVELS + lb], Complex64::new(chi[la][lb], 0.0)));
    StateVector::from_terms(terms, MODES, Statistics::Boson)
}

/// Single-photon operation on photon A taking `Phi_1` to `h`: per DOF,
/// `Z^sign X^anti` on that DOF's qubit.
pub fn preparation_from_phi1(h: &HyperLabel) -> CMatrix {
    let mut m = CMatrix::identity(LEVELS, LEVELS);
    for d in h.dofs() {
        let shift = d.dof.level_shift();
        let mut op = CMatrix::zeros(LEVELS, LEVELS);
        for c in 0..LEVELS {
            let r = if d.is_anti() { c ^ (1 << shift) } else { c };
            let flip = d.is_minus() && (r >> shift) & 1 == 1;
            op[(r, c)] = if flip { -ONE } else { ONE };
        }
        m = op * m;
    }
    m
}
