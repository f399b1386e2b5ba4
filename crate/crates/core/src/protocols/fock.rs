use super::{LocalKind, Protocol, Termination};
use crate::error::{Error, Result};
use crate::models::JCParams;
use crate::qmath::pauli_x;

/// Detuning below which the model counts as resonant.
const RESONANCE_TOLERANCE: f64 = 1e-12;

/// Analytic extraction sequence for `|0, n+1>` at resonance: for
/// `k = n, ..., 0` wait `pi / (2 dw_k)` (a full `|0,k+1> -> |1,k>` transfer)
/// and flip the qubit.
pub fn fock_extraction_protocol(p: &JCParams, n_plus_1: usize) -> Result<Protocol> {
    p.validate()?;
    if p.detuning().abs() > RESONANCE_TOLERANCE {
        return Err(Error::DetuningNotZero(p.detuning()));
    }
    if p.coupling <= 0.0 {
        return Err(Error::InvalidParameter("Fock protocol needs a nonzero coupling".into()));
    }
    if n_plus_1 == 0 || n_plus_1 > p.cutoff {
        return Err(Error::OutOfTruncation {
            n: n_plus_1,
            cutoff: p.cutoff,
        });
    }
    let mut proto = Protocol::new();
    for k in (0..n_plus_1).rev() {
        proto.push_free(std::f64::consts::PI / (2.0 * p.half_splitting(k)))?;
        proto.push_local(pauli_x(), LocalKind::BitFlip)?;
    }
    proto.metadata.model = Some(*p);
    proto.metadata.termination = Some(Termination::Analytic);
    Ok(proto)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::ergotropy::{EnergyMode, EnergyModel};
    use crate::models::jc_product_state;
    use crate::protocols::{apply_protocol, Step};
    use crate::qmath::QState;

    #[test]
    fn single_pair_waits_pi_over_coupling() {
        let p = JCParams::new(1.0, 1.0, 0.1, 2);
        let proto = fock_extraction_protocol(&p, 1).unwrap();
        assert_eq!(proto.len(), 2);
        match proto.steps()[0] {
            Step::Free(dt) => assert!((dt - PI / 0.1).abs() < 1e-12),
            _ => panic!("first step must be free evolution"),
        }
    }

    #[test]
    fn empties_the_cavity() {
        let p = JCParams::new(1.0, 1.0, 0.1, 6);
        let model = EnergyModel::jc(&p).unwrap();
        let rho = QState::pure(&jc_product_state(&p, 0, 5).unwrap(), p.dims()).unwrap();
        let proto = fock_extraction_protocol(&p, 5).unwrap();
        let tr = apply_protocol(&rho, &model, &proto, EnergyMode::Full).unwrap();
        assert!((tr.report.work - 5.0).abs() < 1e-9);
        let ground = jc_product_state(&p, 0, 0).unwrap();
        assert!(tr.final_state.fidelity_with_pure(&ground) > 1.0 - 1e-9);
    }

    #[test]
    fn rejects_detuning_and_truncation() {
        let p = JCParams::new(1.1, 1.0, 0.1, 6);
        assert!(matches!(fock_extraction_protocol(&p, 3), Err(Error::DetuningNotZero(_))));
        let p = JCParams::new(1.0, 1.0, 0.1, 3);
        assert!(fock_extraction_protocol(&p, 4).is_err());
    }
}
