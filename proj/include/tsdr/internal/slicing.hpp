#pragma once

#include <span>
#include <vector>

namespace tsdr::internal {

// slice_response without argument checks; h = 1 yields a single slice.
std::vector<int> slice_labels(std::span<const double> y, int h);

}  // namespace tsdr::internal
