//! Membership predicates for the operator classes.
//!
//! Every predicate works on `T/‖T‖`: all defining relations are homogeneous,
//! so normalizing makes the tolerances scale-free and the verdicts invariant
//! under `T -> cT`. The zero matrix is a member of every class.
//!
//! The norm-inequality classes (paranormal, k-paranormal,
//! absolute-k-paranormal, k-quasi-paranormal) are decided twice: once by
//! the Hermitian pencil that characterizes the class ([`pencil`]) and once by
//! minimizing the defining defect over the unit sphere ([`sphere`]). The two
//! results are reconciled in [`Classifier::dual`].

pub mod pencil;
pub mod sphere;

use std::fmt;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::linalg::{psd_defect, psd_power, ComplexMatrix, TolerancePolicy, C64};
use crate::{Error, Result};

pub use pencil::{pencil_check, PencilFamily, PencilSpec, PencilTerm};
pub use sphere::{sphere_check, FnObjective, NormInequality, SphereObjective, SphereOptions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum OperatorClass {
    Normal,
    Quasinormal,
    Hyponormal,
    PHyponormal(f64),
    ClassA,
    Paranormal,
    KParanormal(u32),
    AbsoluteKParanormal(u32),
    KQuasiParanormal(u32),
    Normaloid,
}

impl OperatorClass {
    /// Bare class name without parameters.
    pub fn name(&self) -> &'static str {
        match self {
            Self::Normal => "Normal",
            Self::Quasinormal => "Quasinormal",
            Self::Hyponormal => "Hyponormal",
            Self::PHyponormal(_) => "PHyponormal",
            Self::ClassA => "ClassA",
            Self::Paranormal => "Paranormal",
            Self::KParanormal(_) => "KParanormal",
            Self::AbsoluteKParanormal(_) => "AbsoluteKParanormal",
            Self::KQuasiParanormal(_) => "KQuasiParanormal",
            Self::Normaloid => "Normaloid",
        }
    }

    pub fn params(&self) -> serde_json::Value {
        match self {
            Self::PHyponormal(p) => serde_json::json!({ "p": p }),
            Self::KParanormal(k) | Self::AbsoluteKParanormal(k) | Self::KQuasiParanormal(k) => {
                serde_json::json!({ "k": k })
            }
            _ => serde_json::json!({}),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::PHyponormal(p) if !(p > 0.0 && p <= 1.0) => {
                Err(Error::InvalidSpec(format!("p must lie in (0, 1], got {p}")))
            }
            Self::KParanormal(0) | Self::AbsoluteKParanormal(0) => {
                Err(Error::InvalidSpec("k must be positive".into()))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for OperatorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::PHyponormal(p) => write!(f, "PHyponormal({p})"),
            Self::KParanormal(k) => write!(f, "KParanormal({k})"),
            Self::AbsoluteKParanormal(k) => write!(f, "AbsoluteKParanormal({k})"),
            Self::KQuasiParanormal(k) => write!(f, "KQuasiParanormal({k})"),
            other => f.write_str(other.name()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Status {
    Member,
    NonMember,
    Inconclusive,
}

impl Status {
    pub fn is_definite(self) -> bool {
        self != Status::Inconclusive
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Oracle {
    Pencil,
    Sphere,
    Algebraic,
}

/// Where the worst defect occurs. Vectors are stored as `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Witness {
    Vector { vector: Vec<[f64; 2]> },
    Pencil { lambda: f64, vector: Vec<[f64; 2]> },
}

fn pairs(x: &DVector<C64>) -> Vec<[f64; 2]> {
    x.iter().map(|z| [z.re, z.im]).collect()
}

impl Witness {
    pub fn vector(x: &DVector<C64>) -> Self {
        Self::Vector { vector: pairs(x) }
    }

    pub fn pencil(lambda: f64, x: &DVector<C64>) -> Self {
        Self::Pencil {
            lambda,
            vector: pairs(x),
        }
    }

    pub fn vector_c64(&self) -> DVector<C64> {
        let v = match self {
            Self::Vector { vector } | Self::Pencil { vector, .. } => vector,
        };
        DVector::from_iterator(v.len(), v.iter().map(|p| C64::new(p[0], p[1])))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipVerdict {
    pub status: Status,
    /// Signed; negative means the defining relation is violated.
    pub defect: f64,
    pub witness: Option<Witness>,
    pub oracle: Oracle,
    pub seed: Option<u64>,
}

impl MembershipVerdict {
    fn algebraic(status: Status, defect: f64) -> Self {
        Self {
            status,
            defect,
            witness: None,
            oracle: Oracle::Algebraic,
            seed: None,
        }
    }

    fn trivial_member() -> Self {
        Self::algebraic(Status::Member, 0.0)
    }

    pub fn is_member(&self) -> bool {
        self.status == Status::Member
    }

    pub fn is_non_member(&self) -> bool {
        self.status == Status::NonMember
    }

    /// Serializable record `{class, params, status, defect, witness, oracle, seed}`.
    pub fn record(&self, class: &OperatorClass) -> VerdictRecord {
        VerdictRecord {
            class: class.to_string(),
            params: class.params(),
            status: self.status,
            defect: self.defect,
            witness: self.witness.clone(),
            oracle: self.oracle,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictRecord {
    pub class: String,
    pub params: serde_json::Value,
    pub status: Status,
    pub defect: f64,
    pub witness: Option<Witness>,
    pub oracle: Oracle,
    pub seed: Option<u64>,
}

/// Member at or above `-tol/10`, NonMember at or below `-tol`, Inconclusive between.
pub(crate) fn band_status(defect: f64, tol_decision: f64) -> Status {
    if defect >= -tol_decision / 10.0 {
        Status::Member
    } else if defect <= -tol_decision {
        Status::NonMember
    } else {
        Status::Inconclusive
    }
}

/// Runs the membership predicates under a fixed tolerance policy and seed.
#[derive(Debug, Clone, Copy, Default)]
pub struct Classifier {
    pub tol: TolerancePolicy,
    pub sphere: SphereOptions,
}

/// Both oracle verdicts plus the reconciled one.
#[derive(Debug, Clone)]
pub struct DualVerdict {
    pub pencil: MembershipVerdict,
    pub sphere: MembershipVerdict,
    pub combined: MembershipVerdict,
}

/// `T/‖T‖`, or `None` for the zero matrix.
pub fn normalized(t: &ComplexMatrix) -> Option<ComplexMatrix> {
    let n = t.operator_norm();
    (n > 0.0).then(|| t.scale_real(1.0 / n))
}

impl Classifier {
    pub fn with_seed(seed: u64) -> Self {
        let mut c = Self::default();
        c.sphere.seed = seed;
        c
    }

    pub fn seed(&self) -> u64 {
        self.sphere.seed
    }

    fn residual_verdict(&self, residual: f64) -> MembershipVerdict {
        let status = if residual <= self.tol.tol_eq {
            Status::Member
        } else {
            Status::NonMember
        };
        MembershipVerdict::algebraic(status, -residual)
    }

    fn psd_verdict(&self, m: &ComplexMatrix) -> Result<MembershipVerdict> {
        let least = psd_defect(m, &self.tol)?;
        let status = if self.tol.is_psd(least, m.operator_norm()) {
            Status::Member
        } else {
            Status::NonMember
        };
        Ok(MembershipVerdict::algebraic(status, least))
    }

    /// `T*T = TT*`
    pub fn is_normal(&self, t: &ComplexMatrix) -> MembershipVerdict {
        let Some(t) = normalized(t) else {
            return MembershipVerdict::trivial_member();
        };
        self.residual_verdict(t.self_commutator().frobenius_norm())
    }

    /// Normality of `T^n` measured against `‖T‖^n`, so that a power that is
    /// zero up to rounding counts as normal.
    pub fn is_power_normal(&self, t: &ComplexMatrix, n: u32) -> MembershipVerdict {
        let Some(t) = normalized(t) else {
            return MembershipVerdict::trivial_member();
        };
        self.residual_verdict(t.power(n).self_commutator().frobenius_norm())
    }

    /// `TT*T = T*T²`
    pub fn is_quasinormal(&self, t: &ComplexMatrix) -> MembershipVerdict {
        let Some(t) = normalized(t) else {
            return MembershipVerdict::trivial_member();
        };
        let lhs = &t.cogram() * &t;
        let rhs = &t.gram() * &t;
        self.residual_verdict(lhs.distance(&rhs))
    }

    /// `(T*)^k T^k = (T*T)^k` for `k = 2..=kmax`.
    pub fn quasinormal_embry(&self, t: &ComplexMatrix, kmax: u32) -> MembershipVerdict {
        let Some(t) = normalized(t) else {
            return MembershipVerdict::trivial_member();
        };
        let gram = t.gram();
        let worst = (2..=kmax.max(2))
            .map(|k| t.power(k).gram().distance(&gram.power(k)))
            .fold(0.0f64, f64::max);
        self.residual_verdict(worst)
    }

    /// `TT* ≤ T*T`
    pub fn is_hyponormal(&self, t: &ComplexMatrix) -> MembershipVerdict {
        let Some(t) = normalized(t) else {
            return MembershipVerdict::trivial_member();
        };
        self.psd_verdict(&t.self_commutator())
            .expect("self-commutator is Hermitian")
    }

    /// `(TT*)^p ≤ (T*T)^p`
    pub fn is_p_hyponormal(&self, t: &ComplexMatrix, p: f64) -> Result<MembershipVerdict> {
        OperatorClass::PHyponormal(p).validate()?;
        let Some(t) = normalized(t) else {
            return Ok(MembershipVerdict::trivial_member());
        };
        let lhs = psd_power(&t.gram(), p, &self.tol)?;
        let rhs = psd_power(&t.cogram(), p, &self.tol)?;
        self.psd_verdict(&(&lhs - &rhs))
    }

    /// `T*T ≤ ((T*)²T²)^{1/2}`
    pub fn is_class_a(&self, t: &ComplexMatrix) -> MembershipVerdict {
        let Some(t) = normalized(t) else {
            return MembershipVerdict::trivial_member();
        };
        let root = psd_power(&t.power(2).gram(), 0.5, &self.tol).expect("Gram matrices are PSD");
        self.psd_verdict(&(&root - &t.gram()))
            .expect("difference of Hermitian matrices")
    }

    /// `r(T) = ‖T‖`. The power-norm identity `‖T^n‖ = ‖T‖^n`, n = 2..=6,
    /// is available separately as [`Classifier::normaloid_power_defect`].
    pub fn is_normaloid(&self, t: &ComplexMatrix) -> MembershipVerdict {
        let Some(t) = normalized(t) else {
            return MembershipVerdict::trivial_member();
        };
        let defect = t.spectral_radius() - 1.0;
        let status = if -defect <= self.tol.tol_decision {
            Status::Member
        } else {
            Status::NonMember
        };
        MembershipVerdict::algebraic(status, defect)
    }

    /// `max_n |‖T^n‖ - ‖T‖^n| / ‖T‖^n` over `n = 2..=nmax`.
    pub fn normaloid_power_defect(&self, t: &ComplexMatrix, nmax: u32) -> f64 {
        let Some(t) = normalized(t) else {
            return 0.0;
        };
        (2..=nmax)
            .map(|n| (t.power(n).operator_norm() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Both oracles for one pencil family, reconciled.
    pub fn dual(&self, t: &ComplexMatrix, family: PencilFamily) -> Result<DualVerdict> {
        let Some(t) = normalized(t) else {
            let m = MembershipVerdict::trivial_member();
            return Ok(DualVerdict {
                pencil: m.clone(),
                sphere: m.clone(),
                combined: m,
            });
        };
        let pencil = pencil_check(&PencilSpec::for_family(family, &t, &self.tol)?, &self.tol);
        let objective = match family {
            PencilFamily::KQuasi(k) => NormInequality::k_quasi(&t, k),
            PencilFamily::KParanormal(k) => NormInequality::k_paranormal(&t, k),
            PencilFamily::AbsoluteK(k) => {
                let abs_k = psd_power(&t.gram(), k as f64 / 2.0, &self.tol)?;
                NormInequality::absolute_k(&t, &abs_k, k)
            }
        };
        let mut sphere = sphere_check(&objective, &sphere::warm_starts(&t), &self.sphere, &self.tol);
        // Witnesses are re-evaluated through the defining inequality.
        if sphere.status == Status::NonMember {
            let x = sphere.witness.as_ref().expect("sphere witness").vector_c64();
            if objective.defect_at(&x) > -self.tol.tol_decision {
                sphere.status = Status::Inconclusive;
            }
        }
        let combined = self.reconcile(family, &pencil, &sphere)?;
        Ok(DualVerdict {
            pencil,
            sphere,
            combined,
        })
    }

    fn reconcile(
        &self,
        family: PencilFamily,
        pencil: &MembershipVerdict,
        sphere: &MembershipVerdict,
    ) -> Result<MembershipVerdict> {
        use Status::*;
        let loud = 10.0 * self.tol.tol_decision;
        Ok(match (pencil.status, sphere.status) {
            (a, b) if a == b => pencil.clone(),
            (Member, NonMember) | (NonMember, Member) => {
                if pencil.defect.abs() > loud && sphere.defect.abs() > loud {
                    return Err(Error::OracleDisagreement {
                        class: format!("{family:?}"),
                        pencil: pencil.defect,
                        sphere: sphere.defect,
                    });
                }
                let worse = if pencil.defect <= sphere.defect { pencil } else { sphere };
                MembershipVerdict {
                    status: Inconclusive,
                    ..worse.clone()
                }
            }
            (NonMember, Inconclusive) => pencil.clone(),
            (Inconclusive, NonMember) => sphere.clone(),
            (Inconclusive, _) => pencil.clone(),
            (_, Inconclusive) => MembershipVerdict {
                status: Inconclusive,
                ..sphere.clone()
            },
            _ => unreachable!("all status pairs covered"),
        })
    }

    /// `‖T^{k+1}x‖² ≤ ‖T^{k+2}x‖‖T^k x‖`; `k = 0` is paranormality.
    pub fn is_k_quasi_paranormal(&self, t: &ComplexMatrix, k: u32) -> Result<MembershipVerdict> {
        Ok(self.dual(t, PencilFamily::KQuasi(k))?.combined)
    }

    pub fn is_paranormal(&self, t: &ComplexMatrix) -> Result<MembershipVerdict> {
        self.is_k_quasi_paranormal(t, 0)
    }

    /// `‖Tx‖^{k+1} ≤ ‖T^{k+1}x‖‖x‖^k`
    pub fn is_k_paranormal(&self, t: &ComplexMatrix, k: u32) -> Result<MembershipVerdict> {
        OperatorClass::KParanormal(k).validate()?;
        Ok(self.dual(t, PencilFamily::KParanormal(k))?.combined)
    }

    /// `‖Tx‖^{k+1} ≤ ‖|T|^k Tx‖‖x‖^k`
    pub fn is_absolute_k_paranormal(&self, t: &ComplexMatrix, k: u32) -> Result<MembershipVerdict> {
        OperatorClass::AbsoluteKParanormal(k).validate()?;
        Ok(self.dual(t, PencilFamily::AbsoluteK(k))?.combined)
    }

    pub fn verdict(&self, class: &OperatorClass, t: &ComplexMatrix) -> Result<MembershipVerdict> {
        class.validate()?;
        Ok(match *class {
            OperatorClass::Normal => self.is_normal(t),
            OperatorClass::Quasinormal => self.is_quasinormal(t),
            OperatorClass::Hyponormal => self.is_hyponormal(t),
            OperatorClass::PHyponormal(p) => self.is_p_hyponormal(t, p)?,
            OperatorClass::ClassA => self.is_class_a(t),
            OperatorClass::Paranormal => self.is_paranormal(t)?,
            OperatorClass::KParanormal(k) => self.is_k_paranormal(t, k)?,
            OperatorClass::AbsoluteKParanormal(k) => self.is_absolute_k_paranormal(t, k)?,
            OperatorClass::KQuasiParanormal(k) => self.is_k_quasi_paranormal(t, k)?,
            OperatorClass::Normaloid => self.is_normaloid(t),
        })
    }

    /// Every predicate for the given parameter lists, plus the chain check.
    pub fn classify_all(&self, t: &ComplexMatrix, k_list: &[u32], p_list: &[f64]) -> Classification {
        let classes = class_list(k_list, p_list);
        let mut entries = Vec::with_capacity(classes.len());
        for class in classes {
            let result = self.verdict(&class, t).map_err(|e| e.to_string());
            entries.push((class, result));
        }
        let mut out = Classification { entries, chain_violations: Vec::new() };
        out.chain_violations = out.chain_violations_for(k_list, p_list);
        out
    }
}

/// Default parameters for [`Classifier::classify_all`].
pub const DEFAULT_K_LIST: [u32; 3] = [1, 2, 3];
pub const DEFAULT_P_LIST: [f64; 1] = [0.5];

/// Classes evaluated by `classify_all`, in chain order.
pub fn class_list(k_list: &[u32], p_list: &[f64]) -> Vec<OperatorClass> {
    let mut out = vec![
        OperatorClass::Normal,
        OperatorClass::Quasinormal,
        OperatorClass::Hyponormal,
    ];
    out.extend(p_list.iter().map(|&p| OperatorClass::PHyponormal(p)));
    out.push(OperatorClass::ClassA);
    out.push(OperatorClass::Paranormal);
    for &k in k_list.iter().filter(|&&k| k >= 1) {
        out.push(OperatorClass::KParanormal(k));
    }
    for &k in k_list.iter().filter(|&&k| k >= 1) {
        out.push(OperatorClass::AbsoluteKParanormal(k));
    }
    for &k in k_list {
        out.push(OperatorClass::KQuasiParanormal(k));
    }
    out.push(OperatorClass::Normaloid);
    out
}

#[derive(Debug, Clone)]
pub struct Classification {
    pub entries: Vec<(OperatorClass, Result<MembershipVerdict, String>)>,
    /// Human-readable descriptions of broken inclusions.
    pub chain_violations: Vec<String>,
}

impl Classification {
    pub fn get(&self, class: &OperatorClass) -> Option<&MembershipVerdict> {
        self.entries
            .iter()
            .find(|(c, _)| c == class)
            .and_then(|(_, r)| r.as_ref().ok())
    }

    pub fn status(&self, class: &OperatorClass) -> Option<Status> {
        self.get(class).map(|v| v.status)
    }

    pub fn any_inconclusive(&self) -> bool {
        self.entries
            .iter()
            .any(|(_, r)| matches!(r, Ok(v) if v.status == Status::Inconclusive))
    }

    pub fn any_error(&self) -> bool {
        self.entries.iter().any(|(_, r)| r.is_err())
    }

    /// `sub ⊆ sup` is violated when `sub` is a definite member and `sup` a definite non-member.
    fn violates(&self, sub: &OperatorClass, sup: &OperatorClass) -> bool {
        matches!(
            (self.status(sub), self.status(sup)),
            (Some(Status::Member), Some(Status::NonMember))
        )
    }

    fn chain_violations_for(&self, k_list: &[u32], p_list: &[f64]) -> Vec<String> {
        use OperatorClass::*;
        let mut pairs: Vec<(OperatorClass, OperatorClass)> = Vec::new();
        let mut main = vec![Normal, Quasinormal, Hyponormal];
        // Each p-hyponormal class sits between hyponormal and class A.
        for &p in p_list {
            pairs.push((Hyponormal, PHyponormal(p)));
            pairs.push((PHyponormal(p), ClassA));
        }
        main.extend([ClassA, Paranormal, Normaloid]);
        pairs.extend(main.windows(2).map(|w| (w[0], w[1])));
        pairs.push((Hyponormal, ClassA));
        for &k in k_list.iter().filter(|&&k| k >= 1) {
            pairs.push((Paranormal, KParanormal(k)));
            pairs.push((KParanormal(k), Normaloid));
            pairs.push((Paranormal, AbsoluteKParanormal(k)));
            pairs.push((AbsoluteKParanormal(k), Normaloid));
            pairs.push((Paranormal, KQuasiParanormal(k)));
        }
        let mut ks: Vec<u32> = k_list.to_vec();
        ks.sort_unstable();
        for w in ks.windows(2) {
            if w[0] < w[1] {
                pairs.push((KQuasiParanormal(w[0]), KQuasiParanormal(w[1])));
            }
        }
        pairs
            .into_iter()
            .filter(|(a, b)| self.violates(a, b))
            .map(|(a, b)| format!("{a} member but {b} non-member"))
            .collect()
    }

    pub fn records(&self) -> serde_json::Map<String, serde_json::Value> {
        let mut map = serde_json::Map::new();
        for (class, r) in &self.entries {
            let value = match r {
                Ok(v) => serde_json::to_value(v.record(class)).expect("serializable"),
                Err(e) => serde_json::json!({
                    "class": class.to_string(),
                    "params": class.params(),
                    "error": e,
                }),
            };
            map.insert(class.to_string(), value);
        }
        map
    }
}
