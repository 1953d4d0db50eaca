#pragma once

#include <cstdint>

namespace vmfexp::detail {

/// ln sum_{i<n} exp(kappa t_i) for n i.i.d. draws t_i of <V, X>, X uniform on S^{d-1}.
/// Eight interleaved xoshiro256++ lanes keyed by `key`; same key, same value.
double log_sum_exp_uniform_radial(int d, double kappa, std::uint64_t n, std::uint64_t key);

}  // namespace vmfexp::detail
