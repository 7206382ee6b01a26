use bellscope_core::detection::{bell_states, hyper_states, LabeledState};
use bellscope_core::hyper::{all_hyper_labels, named_hyper_labels, HyperLabel};
use bellscope_core::optics::CircuitSpec;
use bellscope_core::{Error, Result};

/// Parsed `--states` argument.
#[derive(Debug, Clone, PartialEq)]
pub enum Selector {
    Bell { n: usize, d: usize },
    Hyper(Vec<HyperLabel>),
}

impl Selector {
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        match text {
            "hyper64" => return Ok(Selector::Hyper(all_hyper_labels())),
            "hyper15" => return Ok(Selector::Hyper(named_hyper_labels())),
            _ => {}
        }
        if let Some(rest) = text.strip_prefix("bell:") {
            let parts: Vec<&str> = rest.split(',').map(str::trim).collect();
            let nums: Vec<usize> = parts.iter().filter_map(|p| p.parse().ok()).collect();
            if parts.len() != 2 || nums.len() != 2 {
                return Err(Error::Parse(format!("bad selector `{text}`: expected bell:n,D")));
            }
            return Ok(Selector::Bell { n: nums[0], d: nums[1] });
        }
        if let Some(rest) = text.strip_prefix("hyper:") {
            let labels = rest
                .split(',')
                .map(|s| s.trim().parse::<HyperLabel>())
                .collect::<Result<Vec<_>>>()?;
            if labels.is_empty() {
                return Err(Error::Parse("empty hyper label list".into()));
            }
            return Ok(Selector::Hyper(labels));
        }
        Err(Error::Parse(format!(
            "bad selector `{text}`: expected bell:n,D | hyper64 | hyper15 | hyper:LABEL,..."
        )))
    }

    /// States for a circuit, checking photon and mode counts against its header.
    pub fn states_for(&self, circuit: &CircuitSpec) -> Result<Vec<LabeledState>> {
        let (n, modes) = match self {
            Selector::Bell { n, d } => (*n, n * d),
            Selector::Hyper(_) => (2, 16),
        };
        if n != circuit.photon_count || modes != circuit.mode_count {
            return Err(Error::Dimension {
                expected: circuit.mode_count,
                got: modes,
            });
        }
        match self {
            Selector::Bell { n, d } => bell_states(*n, *d, circuit.statistics),
            Selector::Hyper(labels) => hyper_states(labels),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_form() {
        assert_eq!(Selector::parse("bell:4,2").unwrap(), Selector::Bell { n: 4, d: 2 });
        assert!(matches!(Selector::parse("hyper64").unwrap(), Selector::Hyper(v) if v.len() == 64));
        assert!(matches!(Selector::parse("hyper15").unwrap(), Selector::Hyper(v) if v.len() == 15));
        let Selector::Hyper(v) = Selector::parse("hyper:1,Phi_49,Theta+/Psi-/Phi+").unwrap() else {
            panic!("expected hyper labels");
        };
        assert_eq!(v.len(), 3);
        assert_eq!(v[1].sequence_number(), 49);
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["bell:4", "bell:a,b", "hyper:", "ghz:3", "hyper:99"] {
            assert!(Selector::parse(bad).is_err(), "{bad}");
        }
    }
}
