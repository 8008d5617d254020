//! Independent, portable random streams derived from one master seed.
//!
//! Every stream is a PCG XSL RR 128/64 generator (`rand_pcg::Pcg64`). Its
//! 64-bit seed comes from folding the master seed, a stream kind tag, and
//! the stream's identity words through the SplitMix64 finalizer:
//!
//! ```text
//! h = seed
//! for w in [kind, ids...]:
//!     h = splitmix64(h + 0x9e3779b97f4a7c15 + w)      (wrapping)
//! splitmix64(z):
//!     z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9
//!     z = (z ^ (z >> 27)) * 0x94d049bb133111eb
//!     z ^ (z >> 31)
//! ```
//!
//! The folded value is handed to `Pcg64::seed_from_u64`.
//!
//! Per-VM streams are keyed on `(service, dc, vm)`, so a VM's draws do not
//! depend on how many other VMs exist.

use rand::SeedableRng;
use rand_pcg::Pcg64;

use crate::model::VmId;

pub type StreamRng = Pcg64;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum StreamKind {
    Arrival = 1,
    Shape = 2,
    Horizontal = 3,
    Sizing = 4,
    Dynamics = 5,
}

pub fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn mix(seed: u64, kind: StreamKind, ids: &[u64]) -> u64 {
    std::iter::once(kind as u64)
        .chain(ids.iter().copied())
        .fold(seed, |h, w| splitmix64(h.wrapping_add(GOLDEN_GAMMA).wrapping_add(w)))
}

pub fn stream(seed: u64, kind: StreamKind, ids: &[u64]) -> StreamRng {
    Pcg64::seed_from_u64(mix(seed, kind, ids))
}

pub fn service_stream(seed: u64, kind: StreamKind, service: u32) -> StreamRng {
    stream(seed, kind, &[service as u64])
}

pub fn vm_stream(seed: u64, kind: StreamKind, vm: VmId) -> StreamRng {
    stream(seed, kind, &[vm.service as u64, vm.dc as u64, vm.vm as u64])
}
