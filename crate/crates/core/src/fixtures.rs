//! Weight-2 cusp form bases shipped with the crate, in `mfcoeffs` format.

pub const S2_GAMMA0_11: &str = include_str!("../fixtures/s2_gamma0_11.mfc");
pub const S2_GAMMA0_23: &str = include_str!("../fixtures/s2_gamma0_23.mfc");
pub const S2_GAMMA0_29: &str = include_str!("../fixtures/s2_gamma0_29.mfc");
pub const S2_GAMMA0_31: &str = include_str!("../fixtures/s2_gamma0_31.mfc");

/// The bundled basis of `S_2(Gamma_0(level))`, if there is one.
pub fn s2_basis(level: u64) -> Option<&'static str> {
    match level {
        11 => Some(S2_GAMMA0_11),
        23 => Some(S2_GAMMA0_23),
        29 => Some(S2_GAMMA0_29),
        31 => Some(S2_GAMMA0_31),
        _ => None,
    }
}
