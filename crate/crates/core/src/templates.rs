//! Named sequence templates.
//!
//! Steps count parallel layers: gates on D and A that are adjacent in the
//! slot list run simultaneously.  The single-qubit arrangement inside each
//! template is our own choice; each one was checked to reach zero cost.

use crate::error::{Error, Result};
use crate::gates::Dqd;
use crate::search::{Angle, SequenceTemplate, Slot};

/// Builds slot lists from a compact token string.
///
/// Tokens: `U` (free φ and ψ), `Ug` (free φ, ψ = 0), `XD`, `XA`, `ZD`, `ZA`
/// (free angle).  Appending `=value` to any token fixes its angle
/// (for `U`, `=φ,ψ`).  Free parameters are numbered in order of appearance.
pub fn parse_layout(layout: &str) -> Result<Vec<Slot>> {
    let mut next = 0;
    let mut free = || {
        let a = Angle::Param(next);
        next += 1;
        a
    };
    let bad = |t: &str| Error::InvalidTemplate(format!("bad layout token {t:?}"));
    let mut slots = Vec::new();
    for token in layout.split_whitespace() {
        let (name, fixed) = match token.split_once('=') {
            Some((n, v)) => (n, Some(v)),
            None => (token, None),
        };
        let num = |v: &str| v.trim().parse::<f64>().map_err(|_| bad(token));
        let one = |free: &mut dyn FnMut() -> Angle| -> Result<Angle> {
            match fixed {
                Some(v) => Ok(Angle::Fixed(num(v)?)),
                None => Ok(free()),
            }
        };
        let slot = match name {
            "XD" => Slot::Exchange { dqd: Dqd::D, phi: one(&mut free)? },
            "XA" => Slot::Exchange { dqd: Dqd::A, phi: one(&mut free)? },
            "ZD" => Slot::Phase { dqd: Dqd::D, phi: one(&mut free)? },
            "ZA" => Slot::Phase { dqd: Dqd::A, phi: one(&mut free)? },
            "Ug" => Slot::Entangle { phi: one(&mut free)?, psi: Angle::Fixed(0.0) },
            "U" => match fixed {
                Some(v) => {
                    let (a, b) = v.split_once(',').ok_or_else(|| bad(token))?;
                    Slot::Entangle { phi: Angle::Fixed(num(a)?), psi: Angle::Fixed(num(b)?) }
                }
                None => Slot::Entangle { phi: free(), psi: free() },
            },
            _ => return Err(bad(token)),
        };
        slots.push(slot);
    }
    Ok(slots)
}

struct Entry {
    id: &'static str,
    description: &'static str,
    layout: &'static str,
    gradient_allowed: bool,
}

const LIBRARY: &[Entry] = &[
    Entry {
        id: "sil-5",
        description: "SIL in five steps: three entangling gates with gradient, \
                      simultaneous exchange on D and A between them",
        layout: "U XD XA U XD XA U",
        gradient_allowed: true,
    },
    Entry {
        id: "sil-11",
        description: "gradient-free SIL with four entangling gates: 12 gates in 9 steps, \
                      inside the eleven-step budget",
        layout: "Ug XD ZD XA Ug XD XA Ug XD ZA XA Ug",
        gradient_allowed: false,
    },
    Entry {
        id: "sinl-3",
        description: "SINL in three steps: entangle, simultaneous exchange on D and A, entangle",
        layout: "U XD XA U",
        gradient_allowed: true,
    },
    Entry {
        id: "sinl-9",
        description: "gradient-free SINL in nine steps: a SWAP of the inner spins, \
                      then six free angles (four exchanges on D, two entangling gates) \
                      on fixed exchange/phase scaffolding; the published sets are zeros",
        layout: "Ug=0.5 XD XA=0.25 ZD=0.25 ZA=0.75 XD XA=0.75 Ug XD ZD=0.25 ZA=0.75 XD Ug",
        gradient_allowed: false,
    },
    Entry {
        id: "sil-control",
        description: "negative control: one gradient-free entangling gate between \
                      general single-pair rotations",
        layout: "XD ZD XA ZA XD XA Ug XD ZD XA ZA XD XA",
        gradient_allowed: false,
    },
];

/// Ids of the shipped templates.
pub fn template_ids() -> Vec<&'static str> {
    LIBRARY.iter().map(|e| e.id).collect()
}

/// Looks up a shipped template.
pub fn template(id: &str) -> Result<SequenceTemplate> {
    let e = LIBRARY
        .iter()
        .find(|e| e.id == id)
        .ok_or_else(|| Error::InvalidTemplate(format!("unknown template {id:?}; known: {}", template_ids().join(", "))))?;
    SequenceTemplate::new(e.id, e.description, parse_layout(e.layout)?, e.gradient_allowed)
}

/// All shipped templates.
pub fn library() -> Vec<SequenceTemplate> {
    LIBRARY.iter().map(|e| template(e.id).expect("library templates are valid")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn library_shapes() {
        let t = template("sil-5").unwrap();
        assert_eq!((t.n_steps(), t.n_entangling(), t.n_free()), (5, 3, 10));
        assert!(t.gradient_allowed);
        let t = template("sinl-3").unwrap();
        assert_eq!((t.n_steps(), t.n_entangling()), (3, 2));
        let t = template("sil-11").unwrap();
        assert_eq!((t.n_gates(), t.n_steps(), t.n_entangling()), (12, 9, 4));
        assert!(!t.gradient_allowed);
        let t = template("sinl-9").unwrap();
        assert_eq!((t.n_steps(), t.n_free(), t.n_entangling()), (9, 6, 3));
        let t = template("sil-control").unwrap();
        assert_eq!(t.n_entangling(), 1);
        assert_eq!(library().len(), 5);
    }

    #[test]
    fn unknown_template() {
        assert!(matches!(template("sil-4"), Err(Error::InvalidTemplate(_))));
    }

    #[test]
    fn layout_tokens() {
        let s = parse_layout("U U=0.5,0 Ug XD=0.25").unwrap();
        assert_eq!(s[0], Slot::Entangle { phi: Angle::Param(0), psi: Angle::Param(1) });
        assert_eq!(s[1], Slot::Entangle { phi: Angle::Fixed(0.5), psi: Angle::Fixed(0.0) });
        assert_eq!(s[2], Slot::Entangle { phi: Angle::Param(2), psi: Angle::Fixed(0.0) });
        assert_eq!(s[3], Slot::Exchange { dqd: Dqd::D, phi: Angle::Fixed(0.25) });
        assert!(parse_layout("Q").is_err());
        assert!(parse_layout("XD=x").is_err());
    }
}
