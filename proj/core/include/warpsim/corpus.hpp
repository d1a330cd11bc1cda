#pragma once

// Bundled miniature kernels in the program exchange format.

#include <string>
#include <vector>

#include "warpsim/intset.hpp"

namespace warpsim {

class UnknownKernel : public Error {
 public:
  using Error::Error;
};

std::vector<std::string> corpus_list();
std::vector<std::string> corpus_sizes();  // "small", "medium"

/// Program JSON for a bundled kernel. Throws UnknownKernel.
std::string corpus_get(const std::string& name, const std::string& size = "small");

/// B[i-1] = A[i-1] + A[i] for 1 <= i < n, one element per 64-byte line, with
/// both arrays starting at set index 0 for any cache of up to 1024 sets.
std::string stencil1d_program(Value n, Value elem_size = 64);

}  // namespace warpsim
