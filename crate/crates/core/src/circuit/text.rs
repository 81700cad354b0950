use std::fmt::Write as _;

use super::{Basis, Circuit, CircuitBuilder, Instruction, Pauli};
use crate::error::{Error, Result};

fn args(p: f64) -> String {
    format!("({p})")
}

fn join<T: std::fmt::Display>(items: impl IntoIterator<Item = T>) -> String {
    items
        .into_iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn pairs(ps: &[(usize, usize)]) -> String {
    join(ps.iter().flat_map(|&(a, b)| [a, b]))
}

/// Line-oriented text in the common stabilizer-circuit vocabulary. The joint
/// GHZ channel is written `DEPOLARIZE_N(p)`.
pub fn circuit_to_text(circuit: &Circuit) -> String {
    let mut out = String::new();
    let mut measured = 0usize;
    let rec = |r: usize, measured: usize| format!("rec[-{}]", measured - r);
    for ins in &circuit.instructions {
        let line = match ins {
            Instruction::Reset { basis, targets } => {
                let name = if *basis == Basis::Z { "R" } else { "RX" };
                format!("{name} {}", join(targets))
            }
            Instruction::H { targets } => format!("H {}", join(targets)),
            Instruction::Cx { pairs: ps } => format!("CX {}", pairs(ps)),
            Instruction::Cz { pairs: ps } => format!("CZ {}", pairs(ps)),
            Instruction::Measure {
                basis,
                flip,
                targets,
            } => {
                measured += targets.len();
                let name = if *basis == Basis::Z { "M" } else { "MX" };
                if *flip == 0.0 {
                    format!("{name} {}", join(targets))
                } else {
                    format!("{name}{} {}", args(*flip), join(targets))
                }
            }
            Instruction::Pauli { pauli, targets } => {
                format!("{} {}", pauli.letter(), join(targets))
            }
            Instruction::PauliError { pauli, p, targets } => {
                format!("{}_ERROR{} {}", pauli.letter(), args(*p), join(targets))
            }
            Instruction::Depolarize1 { p, targets } => {
                format!("DEPOLARIZE1{} {}", args(*p), join(targets))
            }
            Instruction::Depolarize2 { p, pairs: ps } => {
                format!("DEPOLARIZE2{} {}", args(*p), pairs(ps))
            }
            Instruction::DepolarizeN { p, targets } => {
                format!("DEPOLARIZE_N{} {}", args(*p), join(targets))
            }
            Instruction::CondPauli {
                pauli,
                record,
                target,
            } => format!("C{} {} {}", pauli.letter(), rec(*record, measured), target),
            Instruction::Detector { coords, records } => {
                let mut s = String::from("DETECTOR");
                if !coords.is_empty() {
                    let c: Vec<String> = coords.iter().map(|x| x.to_string()).collect();
                    let _ = write!(s, "({})", c.join(", "));
                }
                for &r in records {
                    let _ = write!(s, " {}", rec(r, measured));
                }
                s
            }
            Instruction::Observable { index, records } => {
                let mut s = format!("OBSERVABLE_INCLUDE({index})");
                for &r in records {
                    let _ = write!(s, " {}", rec(r, measured));
                }
                s
            }
            Instruction::Tick => "TICK".to_string(),
        };
        out.push_str(&line);
        out.push('\n');
    }
    out
}

enum Target {
    Qubit(usize),
    Rec(usize),
}

struct Line<'a> {
    number: usize,
    name: &'a str,
    args: Vec<f64>,
    targets: Vec<&'a str>,
}

impl<'a> Line<'a> {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            line: self.number,
            message: message.into(),
        }
    }

    fn single_arg(&self) -> Result<f64> {
        match self.args.as_slice() {
            [p] => Ok(*p),
            _ => Err(self.err(format!("{} takes exactly one argument", self.name))),
        }
    }

    fn optional_arg(&self) -> Result<f64> {
        match self.args.as_slice() {
            [] => Ok(0.0),
            [p] => Ok(*p),
            _ => Err(self.err(format!("{} takes at most one argument", self.name))),
        }
    }

    fn no_args(&self) -> Result<()> {
        if self.args.is_empty() {
            Ok(())
        } else {
            Err(self.err(format!("{} takes no arguments", self.name)))
        }
    }

    fn target(&self, token: &str, measured: usize) -> Result<Target> {
        if let Some(inner) = token
            .strip_prefix("rec[-")
            .and_then(|t| t.strip_suffix(']'))
        {
            let k: usize = inner
                .parse()
                .map_err(|_| self.err(format!("bad record target `{token}`")))?;
            if k == 0 || k > measured {
                return Err(self.err(format!(
                    "record `{token}` refers to a measurement that does not exist ({measured} so far)"
                )));
            }
            Ok(Target::Rec(measured - k))
        } else {
            token
                .parse()
                .map(Target::Qubit)
                .map_err(|_| self.err(format!("bad target `{token}`")))
        }
    }

    fn qubits(&self, measured: usize) -> Result<Vec<usize>> {
        self.targets
            .iter()
            .map(|t| match self.target(t, measured)? {
                Target::Qubit(q) => Ok(q),
                Target::Rec(_) => {
                    Err(self.err(format!("{} does not take record targets", self.name)))
                }
            })
            .collect()
    }

    fn records(&self, measured: usize) -> Result<Vec<usize>> {
        self.targets
            .iter()
            .map(|t| match self.target(t, measured)? {
                Target::Rec(r) => Ok(r),
                Target::Qubit(_) => {
                    Err(self.err(format!("{} only takes record targets", self.name)))
                }
            })
            .collect()
    }

    fn pairs(&self, measured: usize) -> Result<Vec<(usize, usize)>> {
        let qs = self.qubits(measured)?;
        if qs.len() % 2 != 0 {
            return Err(self.err(format!("{} needs an even number of targets", self.name)));
        }
        Ok(qs.chunks(2).map(|c| (c[0], c[1])).collect())
    }
}

fn split_line(number: usize, raw: &str) -> Result<Option<Line<'_>>> {
    let text = raw.split('#').next().unwrap_or("").trim();
    if text.is_empty() {
        return Ok(None);
    }
    let err = |m: String| Error::Parse {
        line: number,
        message: m,
    };
    let (head, rest) = match text.find(|c: char| c.is_whitespace() || c == '(') {
        Some(i) => text.split_at(i),
        None => (text, ""),
    };
    let mut rest = rest.trim_start();
    let mut args = Vec::new();
    if let Some(after) = rest.strip_prefix('(') {
        let close = after
            .find(')')
            .ok_or_else(|| err("unclosed argument list".into()))?;
        for a in after[..close].split(',') {
            let a = a.trim();
            if a.is_empty() {
                continue;
            }
            args.push(a.parse().map_err(|_| err(format!("bad argument `{a}`")))?);
        }
        rest = &after[close + 1..];
    }
    Ok(Some(Line {
        number,
        name: head,
        args,
        targets: rest.split_whitespace().collect(),
    }))
}

/// Parses the text form produced by [`circuit_to_text`].
pub fn circuit_from_text(text: &str) -> Result<Circuit> {
    let mut b = CircuitBuilder::new(0);
    for (i, raw) in text.lines().enumerate() {
        let Some(line) = split_line(i + 1, raw)? else {
            continue;
        };
        let measured = b.num_measurements();
        let ins = match line.name {
            "R" | "RX" => {
                line.no_args()?;
                let basis = if line.name == "R" { Basis::Z } else { Basis::X };
                vec![Instruction::Reset {
                    basis,
                    targets: line.qubits(measured)?,
                }]
            }
            "H" => {
                line.no_args()?;
                vec![Instruction::H {
                    targets: line.qubits(measured)?,
                }]
            }
            "M" | "MX" => {
                let basis = if line.name == "M" { Basis::Z } else { Basis::X };
                vec![Instruction::Measure {
                    basis,
                    flip: line.optional_arg()?,
                    targets: line.qubits(measured)?,
                }]
            }
            "X" | "Y" | "Z" => {
                line.no_args()?;
                vec![Instruction::Pauli {
                    pauli: pauli_of(line.name),
                    targets: line.qubits(measured)?,
                }]
            }
            "X_ERROR" | "Y_ERROR" | "Z_ERROR" => vec![Instruction::PauliError {
                pauli: pauli_of(&line.name[..1]),
                p: line.single_arg()?,
                targets: line.qubits(measured)?,
            }],
            "DEPOLARIZE1" => vec![Instruction::Depolarize1 {
                p: line.single_arg()?,
                targets: line.qubits(measured)?,
            }],
            "DEPOLARIZE2" => vec![Instruction::Depolarize2 {
                p: line.single_arg()?,
                pairs: line.pairs(measured)?,
            }],
            "DEPOLARIZE_N" => vec![Instruction::DepolarizeN {
                p: line.single_arg()?,
                targets: line.qubits(measured)?,
            }],
            "CX" | "CY" | "CZ" => {
                line.no_args()?;
                controlled(&line, measured)?
            }
            "DETECTOR" => vec![Instruction::Detector {
                coords: line.args.clone(),
                records: line.records(measured)?,
            }],
            "OBSERVABLE_INCLUDE" => {
                let idx = line.single_arg()?;
                if idx < 0.0 || idx.fract() != 0.0 {
                    return Err(line.err("observable index must be a non-negative integer"));
                }
                vec![Instruction::Observable {
                    index: idx as usize,
                    records: line.records(measured)?,
                }]
            }
            "TICK" => {
                line.no_args()?;
                vec![Instruction::Tick]
            }
            other => return Err(line.err(format!("unknown instruction `{other}`"))),
        };
        for ins in ins {
            b.push(ins);
        }
    }
    let c = b.finish();
    c.validate()?;
    Ok(c)
}

fn pauli_of(letter: &str) -> Pauli {
    match letter {
        "X" => Pauli::X,
        "Y" => Pauli::Y,
        _ => Pauli::Z,
    }
}

/// `CX`/`CY`/`CZ` lines mix qubit pairs and record-controlled Paulis.
fn controlled(line: &Line, measured: usize) -> Result<Vec<Instruction>> {
    if line.targets.len() % 2 != 0 {
        return Err(line.err(format!("{} needs an even number of targets", line.name)));
    }
    let pauli = pauli_of(&line.name[1..]);
    let mut out: Vec<Instruction> = Vec::new();
    let mut gate_pairs = Vec::new();
    let flush = |out: &mut Vec<Instruction>, gp: &mut Vec<(usize, usize)>| {
        if gp.is_empty() {
            return;
        }
        let pairs = std::mem::take(gp);
        out.push(match pauli {
            Pauli::Z => Instruction::Cz { pairs },
            _ => Instruction::Cx { pairs },
        });
    };
    for pair in line.targets.chunks(2) {
        let a = line.target(pair[0], measured)?;
        let b = line.target(pair[1], measured)?;
        match (a, b) {
            (Target::Qubit(c), Target::Qubit(t)) => {
                if pauli == Pauli::Y {
                    return Err(line.err("CY between qubits is not supported"));
                }
                gate_pairs.push((c, t));
            }
            (Target::Rec(r), Target::Qubit(t)) => {
                flush(&mut out, &mut gate_pairs);
                out.push(Instruction::CondPauli {
                    pauli,
                    record: r,
                    target: t,
                });
            }
            (Target::Qubit(t), Target::Rec(r)) if pauli == Pauli::Z => {
                flush(&mut out, &mut gate_pairs);
                out.push(Instruction::CondPauli {
                    pauli,
                    record: r,
                    target: t,
                });
            }
            _ => return Err(line.err("unsupported record placement")),
        }
    }
    flush(&mut out, &mut gate_pairs);
    Ok(out)
}
