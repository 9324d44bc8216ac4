use qobs_core::{
    design_algorithm1, design_algorithm2, design_algorithm3, design_classical, CoherentObserver,
    Mat, Provenance, QuantumLinearSystem, RhoSearch,
};

use crate::error::Result;
use crate::format::{rows_of, ChannelSpec, ProvenanceSpec, SystemFile};
use crate::scenario::Algorithm;

fn hcat(blocks: &[&Mat]) -> Mat {
    let rows = blocks[0].nrows();
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = Mat::zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        out.view_mut((0, at), (rows, b.ncols())).copy_from(b);
        at += b.ncols();
    }
    out
}

fn vacuum(n_inputs: usize) -> Vec<ChannelSpec> {
    vec![ChannelSpec::Vacuum; n_inputs / 2]
}

fn provenance(p: Provenance) -> ProvenanceSpec {
    match p {
        Provenance::Alg1 => ProvenanceSpec::Alg1,
        Provenance::Alg2 { rho } => ProvenanceSpec::Alg2 { rho },
        Provenance::Alg3 { transformed } => ProvenanceSpec::Alg3 { transformed },
    }
}

/// The observer as a system driven by `(y, v1, v2)`:
/// `B = [B̂ B_v1 B_v2]`, output `η = Ĉ ξ + v1`. A transformed observer is
/// written in its transformed coordinates.
pub fn coherent_file(obs: &CoherentObserver) -> SystemFile {
    let (a, b_hat, c, b_v1, t) = match &obs.transform {
        Some(tr) => (
            &tr.a_tilde,
            &tr.b_tilde,
            &tr.c_tilde,
            &tr.b_v1_tilde,
            Some(&tr.t),
        ),
        None => (&obs.a_hat, &obs.b_hat, &obs.c_hat, &obs.b_v1, None),
    };
    let n = a.nrows();
    let n_eta = c.nrows();
    let b = hcat(&[b_hat, b_v1, &obs.b_v2]);
    let mut d = Mat::zeros(n_eta, b.ncols());
    d.view_mut((0, b_hat.ncols()), (n_eta, b_v1.ncols()))
        .copy_from(&Mat::identity(n_eta, b_v1.ncols()));
    SystemFile {
        n_x: n,
        A: rows_of(a),
        B: rows_of(&b),
        C: rows_of(c),
        D: rows_of(&d),
        channels: vacuum(b.ncols()),
        provenance: Some(provenance(obs.provenance)),
        B_hat: Some(rows_of(b_hat)),
        B_v1: Some(rows_of(b_v1)),
        B_v2: Some(rows_of(&obs.b_v2)),
        T: t.map(rows_of),
    }
}

pub fn design(
    plant: &QuantumLinearSystem,
    algorithm: Algorithm,
    rho: &RhoSearch,
) -> Result<SystemFile> {
    let file = match algorithm {
        Algorithm::Alg1 => coherent_file(&design_algorithm1(plant)?),
        Algorithm::Alg2 => coherent_file(&design_algorithm2(plant, rho)?.observer),
        Algorithm::Alg3 => coherent_file(&design_algorithm3(plant)?.observer),
        Algorithm::Classical => {
            let obs = design_classical(plant)?;
            let n = obs.a_hat.nrows();
            let n_y = obs.k.ncols();
            SystemFile {
                n_x: n,
                A: rows_of(&obs.a_hat),
                B: rows_of(&obs.k),
                C: rows_of(&Mat::identity(n, n)),
                D: rows_of(&Mat::zeros(n, n_y)),
                channels: vacuum(n_y),
                provenance: Some(ProvenanceSpec::Classical),
                B_hat: Some(rows_of(&obs.k)),
                B_v1: None,
                B_v2: None,
                T: None,
            }
        }
    };
    Ok(file)
}
