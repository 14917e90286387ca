//! Plain-text restart files.
//!
//! One header line
//!
//! ```text
//! NSFRAC1 t=<float> n=<int> ndofs_v=<int> ndofs_p=<int> nscalars=<int>
//! ```
//!
//! followed by whitespace-separated dof values: the previous velocity (each
//! component), the velocity two levels back (each component), the pressure and
//! every scalar. Values are written as shortest round-trip decimals, so a
//! restored state is bit-identical to the saved one.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nsfrac_core::fracstep::SolutionState;

use crate::IoError;

pub const MAGIC: &str = "NSFRAC1";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Header {
    pub t: f64,
    pub n: usize,
    pub ndofs_v: usize,
    pub ndofs_p: usize,
    pub nscalars: usize,
}

impl Header {
    fn of(state: &SolutionState) -> Self {
        Header {
            t: state.t,
            n: state.n,
            ndofs_v: state.velocity_prev[0].len(),
            ndofs_p: state.pressure.len(),
            nscalars: state.scalars.len(),
        }
    }

    fn parse(line: &str) -> Result<Self, IoError> {
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some(MAGIC) => {}
            Some(other) => return Err(IoError::Format(format!("unsupported checkpoint version `{other}`"))),
            None => return Err(IoError::Format("empty checkpoint".into())),
        }
        let mut fields = [None; 5];
        const KEYS: [&str; 5] = ["t", "n", "ndofs_v", "ndofs_p", "nscalars"];
        for tok in tokens {
            let (key, value) =
                tok.split_once('=').ok_or_else(|| IoError::Format(format!("malformed header token `{tok}`")))?;
            let slot = KEYS
                .iter()
                .position(|k| *k == key)
                .ok_or_else(|| IoError::Format(format!("unknown header key `{key}`")))?;
            fields[slot] = Some(value);
        }
        let get = |i: usize| fields[i].ok_or_else(|| IoError::Format(format!("header lacks `{}`", KEYS[i])));
        let int = |i: usize| -> Result<usize, IoError> {
            get(i)?.parse().map_err(|_| IoError::Format(format!("`{}` is not an integer", KEYS[i])))
        };
        Ok(Header {
            t: get(0)?.parse().map_err(|_| IoError::Format("`t` is not a number".into()))?,
            n: int(1)?,
            ndofs_v: int(2)?,
            ndofs_p: int(3)?,
            nscalars: int(4)?,
        })
    }
}

/// Serializes the restart data of `state`.
pub fn to_string(state: &SolutionState) -> String {
    let h = Header::of(state);
    let mut out = format!(
        "{MAGIC} t={:e} n={} ndofs_v={} ndofs_p={} nscalars={}\n",
        h.t, h.n, h.ndofs_v, h.ndofs_p, h.nscalars
    );
    let arrays = state
        .velocity_prev
        .iter()
        .chain(&state.velocity_prev2)
        .chain([&state.pressure])
        .chain(state.scalars.iter().map(|s| &s.previous));
    for field in arrays {
        for (i, v) in field.dofs.iter().enumerate() {
            let sep = if i + 1 == field.dofs.len() { '\n' } else { ' ' };
            write!(out, "{v:e}{sep}").unwrap();
        }
    }
    out
}

/// Restores into a copy of `template`, which fixes the spaces and scalar
/// names. The velocity and scalar values are set to their previous levels, as
/// they are right after a finished step.
pub fn from_str(text: &str, template: &SolutionState) -> Result<SolutionState, IoError> {
    let (first, body) = text.split_once('\n').unwrap_or((text, ""));
    let h = Header::parse(first)?;
    let expected = Header::of(template);
    if (h.ndofs_v, h.ndofs_p, h.nscalars) != (expected.ndofs_v, expected.ndofs_p, expected.nscalars) {
        return Err(IoError::Shape(format!(
            "checkpoint has {} velocity, {} pressure dofs and {} scalars; the problem has {}, {} and {}",
            h.ndofs_v, h.ndofs_p, h.nscalars, expected.ndofs_v, expected.ndofs_p, expected.nscalars
        )));
    }
    let mut values = body.split_whitespace().map(|tok| {
        tok.parse::<f64>().map_err(|_| IoError::Format(format!("bad value `{tok}`")))
    });
    let mut state = template.clone();
    let mut fill = |dofs: &mut [f64]| -> Result<(), IoError> {
        for d in dofs.iter_mut() {
            *d = values.next().ok_or_else(|| IoError::Format("checkpoint is truncated".into()))??;
        }
        Ok(())
    };
    for k in 0..2 {
        fill(&mut state.velocity_prev[k].dofs)?;
    }
    for k in 0..2 {
        fill(&mut state.velocity_prev2[k].dofs)?;
    }
    fill(&mut state.pressure.dofs)?;
    for s in &mut state.scalars {
        fill(&mut s.previous.dofs)?;
    }
    if values.next().is_some() {
        return Err(IoError::Format("trailing values after the last array".into()));
    }
    for k in 0..2 {
        state.velocity[k].dofs.copy_from_slice(&state.velocity_prev[k].dofs);
    }
    for s in &mut state.scalars {
        s.value.dofs.copy_from_slice(&s.previous.dofs);
    }
    state.correction.dofs.iter_mut().for_each(|v| *v = 0.0);
    state.t = h.t;
    state.n = h.n;
    Ok(state)
}

pub fn save(state: &SolutionState, path: &Path) -> Result<(), IoError> {
    fs::write(path, to_string(state)).map_err(|e| IoError::file(path, e))
}

pub fn restore(path: &Path, template: &SolutionState) -> Result<SolutionState, IoError> {
    let text = fs::read_to_string(path).map_err(|e| IoError::file(path, e))?;
    from_str(&text, template)
}
