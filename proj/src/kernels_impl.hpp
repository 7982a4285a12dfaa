#pragma once

#include "vortexlab/kernels.hpp"

namespace vortexlab::kernels::detail {

// Defined in the per-ISA translation units; return null when the variant
// was not compiled for this target.
const KernelTable* avx2_table_compiled() noexcept;
const KernelTable* neon_table_compiled() noexcept;

}  // namespace vortexlab::kernels::detail
