//! Built-in experiment configurations for the reference test cases.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Table1a,
    Table1b,
    Table1c,
    Table2,
}

const TABLE1A: &str = r#"mode = "single"

[problem]
p_true = "sine_bump"

[observation]
omega = [[0.0, 0.1], [0.9, 1.0]]
delta0 = 0.01

[iteration]
k = 2e-5
alpha = 1e-7

[output]
dir = "out/table1a"
"#;

const TABLE1B: &str = r#"mode = "single"

[problem]
p_true = "cubic"

[observation]
omega = [[0.0, 0.1], [0.9, 1.0]]
delta0 = 0.01

[iteration]
k = 2e-5
alpha = 1e-7

[output]
dir = "out/table1b"
"#;

const TABLE1C: &str = r#"mode = "single"

[problem]
p_true = "tent_sine"

[observation]
omega = [[0.0, 0.1], [0.9, 1.0]]
delta0 = 0.01

[iteration]
k = 2e-5
alpha = 1e-7

[output]
dir = "out/table1c"
"#;

const TABLE2: &str = r#"mode = "sweep"

[problem]
p_true = "sine_bump"

[output]
dir = "out/table2"

[[case]]
omega = [[0.0, 0.2], [0.8, 1.0]]
delta0 = 0.01
k = 4e-5
alpha = 1e-7

[[case]]
omega = [[0.0, 0.1], [0.9, 1.0]]
delta0 = 0.01
k = 2e-5
alpha = 1e-7

[[case]]
omega = [[0.0, 0.05], [0.95, 1.0]]
delta0 = 0.01
k = 1e-5
alpha = 1e-7

[[case]]
omega = [[0.0, 0.1], [0.9, 1.0]]
delta0 = 0.0
k = 2e-5
alpha = 1e-9

[[case]]
omega = [[0.0, 0.1], [0.9, 1.0]]
delta0 = 0.02
k = 2e-5
alpha = 2e-7

[[case]]
omega = [[0.0, 0.1], [0.9, 1.0]]
delta0 = 0.04
k = 2e-5
alpha = 4e-7

[[case]]
omega = [[0.0, 0.1], [0.9, 1.0]]
delta0 = 0.08
k = 2e-5
alpha = 8e-7
"#;

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::Table1a, Preset::Table1b, Preset::Table1c, Preset::Table2];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Table1a => "table1a",
            Preset::Table1b => "table1b",
            Preset::Table1c => "table1c",
            Preset::Table2 => "table2",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == name)
    }

    /// The preset as config text.
    pub fn text(self) -> &'static str {
        match self {
            Preset::Table1a => TABLE1A,
            Preset::Table1b => TABLE1B,
            Preset::Table1c => TABLE1C,
            Preset::Table2 => TABLE2,
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{parse, Mode};

    #[test]
    fn every_preset_parses() {
        for p in Preset::ALL {
            let c = parse(p.text()).unwrap().config;
            assert_eq!(Preset::from_name(p.name()), Some(p));
            let expected = if p == Preset::Table2 { Mode::Sweep } else { Mode::Single };
            assert_eq!(c.mode, expected);
        }
        assert_eq!(parse(Preset::Table2.text()).unwrap().config.cases.len(), 7);
    }
}
