#pragma once

#include <cstdint>
#include <functional>

namespace subgauss {

// Static range partition across worker threads. Workers write to disjoint
// output slots determined by the index range alone, so the result is
// identical for any thread count.
void parallel_for(std::int64_t count, int threads,
                  const std::function<void(std::int64_t begin, std::int64_t end)>& body);

}  // namespace subgauss
