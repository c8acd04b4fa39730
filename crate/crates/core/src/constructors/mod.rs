//! The explicit families: Kronecker–Weyl threshold sets, the coded classical
//! independent family, the parity block transform, the biased-coin extension,
//! the gap family, and greedy atom packing.

pub mod block;
pub mod coded;
pub mod extension;
pub mod gap;
pub mod kw;
pub mod packing;

pub use block::{block_family, block_set, block_transform, first_full_rank_block, BlockLayout};
pub use coded::{coded_from_bits, coded_independent_set};
pub use extension::{random_extension, ExtensionParams, KeyedCoin, RNG_ALGORITHM};
pub use gap::{declared_product, gap_family};
pub use kw::{is_square_free, kw_family, kw_set, KwSeed};
pub use packing::{greedy_atom_pack, greedy_pack_levels, Packing};
