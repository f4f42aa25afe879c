#pragma once

#include <chrono>
#include <cstdio>
#include <string>

namespace zrp::test {

/// Wall-clock seconds since construction.
class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

/// One summary line per acceptance criterion.
inline void report(const std::string& criterion, bool pass, const std::string& detail) {
  std::printf("[%s] %s: %s\n", pass ? "PASS" : "FAIL", criterion.c_str(), detail.c_str());
  std::fflush(stdout);
}

}  // namespace zrp::test
