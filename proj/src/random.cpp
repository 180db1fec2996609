//
// Project LipidLM - Copyright 2026 The LipidLM Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "lipidlm/random.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>
#include <thread>

namespace lipidlm {

int worker_count() {
  const int hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char *env = std::getenv("LIPIDLM_THREADS")) {
    try {
      const int cap = std::stoi(env);
      if (cap >= 1)
        return std::min(cap, hw);
    } catch (...) {
    }
  }
  return hw;
}

}  // namespace lipidlm
