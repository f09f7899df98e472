//! Registry of named ensembles from the state-discrimination literature.

use crate::numkernel::{tensor_product, Operator, StateVector, C64};

use super::{Ensemble, EnsembleError, EnsembleMember, PartyStructure};

/// Identifier of a named ensemble, with parameters where applicable.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NamedEnsemble {
    /// The four Bell states on C2 ⊗ C2.
    Bell,
    /// The nine orthogonal product states on C3 ⊗ C3 that are locally
    /// indistinguishable but conclusively locally distinguishable.
    Bennett9,
    /// The double-trine ensemble {|w_k w_k⟩} on C2 ⊗ C2.
    PwTrine,
    /// The four symmetric informationally complete qubit states (one party).
    SicQubit,
    /// Parallel double-SIC ensemble {|s_i s_i⟩}.
    DoubleSicParallel,
    /// Anti-parallel double-SIC ensemble {|s_i s_i^⊥⟩}.
    DoubleSicAntiparallel,
    /// Four product states on C2 ⊗ C2 with no conclusive local discrimination.
    Duan4,
    /// Binary orthogonal mixed ensemble {Φ+_d, (1 - Φ+_d)/(d²-1)} on Cd ⊗ Cd.
    Yu { d: usize },
    /// The five-state tiles unextendible product basis on C3 ⊗ C3.
    UpbTiles,
    /// {normalized UPB-subspace projector, normalized complement projector}
    /// built from the tiles basis.
    XbFromUpb,
    /// The four-qubit Smolin state as a single mixed member.
    Smolin,
}

impl NamedEnsemble {
    /// Parse a CLI-style name; `d` feeds the parameterized families.
    pub fn parse(name: &str, d: Option<usize>) -> Result<Self, EnsembleError> {
        let which = match name {
            "bell" => Self::Bell,
            "bennett9" => Self::Bennett9,
            "pw_trine" => Self::PwTrine,
            "sic_qubit" => Self::SicQubit,
            "double_sic_parallel" => Self::DoubleSicParallel,
            "double_sic_antiparallel" => Self::DoubleSicAntiparallel,
            "duan4" => Self::Duan4,
            "yu" => Self::Yu { d: d.unwrap_or(2) },
            "upb_tiles" => Self::UpbTiles,
            "xb_from_upb" => Self::XbFromUpb,
            "smolin" => Self::Smolin,
            other => return Err(EnsembleError::UnknownName(other.to_string())),
        };
        Ok(which)
    }

    /// All fixed (parameter-free) pure-state registry entries.
    pub fn pure_registry() -> Vec<Self> {
        vec![
            Self::Bell,
            Self::Bennett9,
            Self::PwTrine,
            Self::SicQubit,
            Self::DoubleSicParallel,
            Self::DoubleSicAntiparallel,
            Self::Duan4,
            Self::UpbTiles,
        ]
    }

    pub fn all_names() -> &'static [&'static str] {
        &[
            "bell",
            "bennett9",
            "pw_trine",
            "sic_qubit",
            "double_sic_parallel",
            "double_sic_antiparallel",
            "duan4",
            "yu",
            "upb_tiles",
            "xb_from_upb",
            "smolin",
        ]
    }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn qubit(a: C64, b: C64) -> StateVector {
    StateVector::normalized(vec![2], vec![a, b]).expect("nonzero qubit amplitudes")
}

pub(crate) fn ket0() -> StateVector {
    StateVector::basis(vec![2], 0).expect("valid basis index")
}

pub(crate) fn ket1() -> StateVector {
    StateVector::basis(vec![2], 1).expect("valid basis index")
}

pub(crate) fn ket_plus() -> StateVector {
    qubit(c(1.0, 0.0), c(1.0, 0.0))
}

pub(crate) fn ket_i_plus() -> StateVector {
    qubit(c(1.0, 0.0), c(0.0, 1.0))
}

pub(crate) fn ket_i_minus() -> StateVector {
    qubit(c(1.0, 0.0), c(0.0, -1.0))
}

/// Orthogonal partner of a qubit state, fixed as (-b̄, ā).
pub(crate) fn qubit_perp(s: &StateVector) -> StateVector {
    let a = s.amplitudes()[0];
    let b = s.amplitudes()[1];
    qubit(-b.conj(), a.conj())
}

/// Trine state w_k = cos(kπ/3)|0⟩ + sin(kπ/3)|1⟩.
pub(crate) fn trine_state(k: usize) -> StateVector {
    let th = k as f64 * std::f64::consts::PI / 3.0;
    qubit(c(th.cos(), 0.0), c(th.sin(), 0.0))
}

/// SIC qubit state, 1-based index: s_1 = |0⟩ and
/// s_j = (|0⟩ + √2 e^{2πi(j-2)/3} |1⟩)/√3 for j in {2,3,4}.
pub(crate) fn sic_state(j: usize) -> StateVector {
    assert!((1..=4).contains(&j), "SIC index out of range");
    if j == 1 {
        return ket0();
    }
    let phase = 2.0 * std::f64::consts::PI * (j as f64 - 2.0) / 3.0;
    let amp1 = C64::from_polar(2f64.sqrt(), phase);
    qubit(c(1.0, 0.0), amp1)
}

/// Bell state, 1-based: Φ+, Φ-, Ψ+, Ψ-.
pub(crate) fn bell_state(i: usize) -> StateVector {
    let amps = match i {
        1 => vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
        2 => vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)],
        3 => vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
        4 => vec![c(0.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 0.0)],
        _ => panic!("Bell index out of range"),
    };
    StateVector::normalized(vec![2, 2], amps).expect("valid Bell amplitudes")
}

fn qutrit_sum(indices: &[(usize, f64)]) -> StateVector {
    let mut amps = vec![c(0.0, 0.0); 3];
    for &(k, w) in indices {
        amps[k] = c(w, 0.0);
    }
    StateVector::normalized(vec![3], amps).expect("nonzero qutrit amplitudes")
}

/// The five tiles UPB members as per-party qutrit factors.
pub(crate) fn tiles_factors() -> Vec<(StateVector, StateVector)> {
    let e = |k: usize| qutrit_sum(&[(k, 1.0)]);
    let diff = |p: usize, q: usize| qutrit_sum(&[(p, 1.0), (q, -1.0)]);
    let uniform = qutrit_sum(&[(0, 1.0), (1, 1.0), (2, 1.0)]);
    vec![
        (e(0), diff(0, 1)),
        (e(2), diff(1, 2)),
        (diff(0, 1), e(2)),
        (diff(1, 2), e(0)),
        (uniform.clone(), uniform),
    ]
}

/// Maximally entangled state (1/√d) Σ |ii⟩ on Cd ⊗ Cd.
fn phi_plus_d(d: usize) -> StateVector {
    let mut amps = vec![c(0.0, 0.0); d * d];
    for i in 0..d {
        amps[i * d + i] = c(1.0, 0.0);
    }
    StateVector::normalized(vec![d, d], amps).expect("valid dimensions")
}

fn two_qubit_parties() -> PartyStructure {
    PartyStructure::new(vec![2, 2], vec![0, 1]).expect("valid structure")
}

fn product_member(
    label: &str,
    structure: &PartyStructure,
    a: StateVector,
    b: StateVector,
) -> EnsembleMember {
    EnsembleMember::product(label, structure, vec![a, b]).expect("factor dims match structure")
}

/// Construct a named ensemble exactly as printed in the literature, with
/// per-party product factors populated wherever a product form exists.
pub fn build_named(which: NamedEnsemble) -> Result<Ensemble, EnsembleError> {
    match which {
        NamedEnsemble::Bell => {
            let st = two_qubit_parties();
            let members = (1..=4)
                .map(|i| EnsembleMember::pure(format!("B{i}"), bell_state(i)))
                .collect();
            Ensemble::new("bell", st, members)
        }
        NamedEnsemble::Bennett9 => {
            let st = PartyStructure::new(vec![3, 3], vec![0, 1])?;
            let e = |k: usize| qutrit_sum(&[(k, 1.0)]);
            let sum = |p: usize, q: usize| qutrit_sum(&[(p, 1.0), (q, 1.0)]);
            let diff = |p: usize, q: usize| qutrit_sum(&[(p, 1.0), (q, -1.0)]);
            let pairs = vec![
                (e(1), e(1)),
                (e(0), sum(0, 1)),
                (e(0), diff(0, 1)),
                (e(2), sum(1, 2)),
                (e(2), diff(1, 2)),
                (sum(1, 2), e(0)),
                (diff(1, 2), e(0)),
                (sum(0, 1), e(2)),
                (diff(0, 1), e(2)),
            ];
            let members = pairs
                .into_iter()
                .enumerate()
                .map(|(k, (a, b))| product_member(&format!("psi{}", k + 1), &st, a, b))
                .collect();
            Ensemble::new("bennett9", st, members)
        }
        NamedEnsemble::PwTrine => {
            let st = two_qubit_parties();
            let members = (0..3)
                .map(|k| {
                    product_member(&format!("w{k}w{k}"), &st, trine_state(k), trine_state(k))
                })
                .collect();
            Ensemble::new("pw_trine", st, members)
        }
        NamedEnsemble::SicQubit => {
            let st = PartyStructure::new(vec![2], vec![0])?;
            let members = (1..=4)
                .map(|j| {
                    EnsembleMember::product(format!("s{j}"), &st, vec![sic_state(j)])
                        .expect("single-party product")
                })
                .collect();
            Ensemble::new("sic_qubit", st, members)
        }
        NamedEnsemble::DoubleSicParallel => {
            let st = two_qubit_parties();
            let members = (1..=4)
                .map(|j| product_member(&format!("s{j}s{j}"), &st, sic_state(j), sic_state(j)))
                .collect();
            Ensemble::new("double_sic_parallel", st, members)
        }
        NamedEnsemble::DoubleSicAntiparallel => {
            let st = two_qubit_parties();
            let members = (1..=4)
                .map(|j| {
                    let s = sic_state(j);
                    let sp = qubit_perp(&s);
                    product_member(&format!("gamma{j}"), &st, s, sp)
                })
                .collect();
            Ensemble::new("double_sic_antiparallel", st, members)
        }
        NamedEnsemble::Duan4 => {
            let st = two_qubit_parties();
            let members = vec![
                product_member("D1", &st, ket0(), ket0()),
                product_member("D2", &st, ket1(), ket1()),
                product_member("D3", &st, ket_plus(), ket_plus()),
                product_member("D4", &st, ket_i_plus(), ket_i_minus()),
            ];
            Ensemble::new("duan4", st, members)
        }
        NamedEnsemble::Yu { d } => {
            if d < 2 {
                return Err(EnsembleError::InvalidParameter(format!(
                    "yu requires d >= 2, got {d}"
                )));
            }
            let st = PartyStructure::new(vec![d, d], vec![0, 1])?;
            let rho = Operator::projector(&phi_plus_d(d));
            let identity = Operator::identity(vec![d, d])?;
            let sigma = identity
                .sub(&rho)?
                .scale(c(1.0 / ((d * d - 1) as f64), 0.0));
            let members = vec![
                EnsembleMember::mixed("rho", rho),
                EnsembleMember::mixed("sigma", sigma),
            ];
            Ensemble::new(format!("yu{d}"), st, members)
        }
        NamedEnsemble::UpbTiles => {
            let st = PartyStructure::new(vec![3, 3], vec![0, 1])?;
            let members = tiles_factors()
                .into_iter()
                .enumerate()
                .map(|(k, (a, b))| product_member(&format!("u{}", k + 1), &st, a, b))
                .collect();
            Ensemble::new("upb_tiles", st, members)
        }
        NamedEnsemble::XbFromUpb => {
            let st = PartyStructure::new(vec![3, 3], vec![0, 1])?;
            let mut upb_proj = Operator::new(vec![3, 3], crate::numkernel::CMatrix::zeros(9, 9))?;
            for (a, b) in tiles_factors() {
                let u = tensor_product(&a, &b);
                upb_proj = upb_proj.add(&Operator::projector(&u))?;
            }
            let sigma_upb = upb_proj.scale(c(0.2, 0.0));
            let identity = Operator::identity(vec![3, 3])?;
            let rho_ent = identity.sub(&upb_proj)?.scale(c(0.25, 0.0));
            let members = vec![
                EnsembleMember::mixed("sigma_upb", sigma_upb),
                EnsembleMember::mixed("rho_ent", rho_ent),
            ];
            Ensemble::new("xb_from_upb", st, members)
        }
        NamedEnsemble::Smolin => {
            let st = PartyStructure::new(vec![2, 2, 2, 2], vec![0, 1, 2, 3])?;
            let mut sum = Operator::new(vec![2, 2, 2, 2], crate::numkernel::CMatrix::zeros(16, 16))?;
            for i in 1..=4 {
                let b = Operator::projector(&bell_state(i));
                sum = sum.add(&Operator::tensor(&b, &b))?;
            }
            let smolin = sum.scale(c(0.25, 0.0));
            let members = vec![EnsembleMember::mixed("smolin", smolin)];
            Ensemble::new("smolin", st, members)
        }
    }
}
