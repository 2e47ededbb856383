//! Client-side obfuscation: seed derivation, blinding keys, the two-layer
//! cipher and determinant recovery.

mod cipher;
mod export;
mod key;
mod seed;

pub use cipher::{cipher, decipher, element_wise_obfuscate, rotate_select, CipherEnvelope, EnvelopeMeta};
pub use export::KeyExport;
pub use key::{key_gen, BlindingKey, Mode};
pub use seed::{hash_to_psi, seed_gen, SeedBundle, PSI_MAX, PSI_MIN};
