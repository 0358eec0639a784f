#pragma once

namespace mvx {

/// Worker count for internal data parallelism: MX_THREADS when set to a
/// positive integer, otherwise the OpenMP default.
int thread_count();

}  // namespace mvx
