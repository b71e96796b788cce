//! Scenarios compiled into the binary. Each is also a readable example of
//! the config format under `scenarios/`.

use crate::error::Result;
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy)]
pub struct Builtin {
    pub name: &'static str,
    pub source: &'static str,
}

macro_rules! builtin {
    ($name:literal) => {
        Builtin {
            name: $name,
            source: include_str!(concat!("../scenarios/", $name, ".toml")),
        }
    };
}

pub const BUILTINS: &[Builtin] = &[
    builtin!("rc"),
    builtin!("rlc"),
    builtin!("third-order"),
    builtin!("td-monotonic"),
    builtin!("td-oscillatory"),
    builtin!("td-isotropic"),
    builtin!("td-limit-cycle"),
    builtin!("td-two-equilibria-a"),
    builtin!("td-two-equilibria-b"),
];

impl Builtin {
    pub fn scenario(&self) -> Result<Scenario> {
        Scenario::from_toml(self.source, &format!("builtin `{}`", self.name))
    }
}

pub fn find(name: &str) -> Option<&'static Builtin> {
    BUILTINS.iter().find(|b| b.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_parse_and_round_trip() {
        for b in BUILTINS {
            let s = b.scenario().unwrap();
            assert_eq!(s.name, b.name);
            let back = Scenario::from_toml(&s.to_toml(), b.name).unwrap();
            assert_eq!(back, s, "{}", b.name);
        }
    }
}
