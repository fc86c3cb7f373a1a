#pragma once

#include <stdexcept>
#include <string>

namespace wentzell {

// Error classes map one-to-one onto process exit codes so the CLI can
// translate failures without string matching.
enum class Errc : int {
  config = 2,       // bad configuration: units, shapes, parameter domains
  geometry = 3,     // domain, grid, or control-region violations
  solver = 4,       // linear-algebra failure, instability, degenerate observation
  convergence = 5,  // iteration budget exhausted
};

class Error : public std::runtime_error {
 public:
  Error(Errc c, const std::string& msg) : std::runtime_error(msg), c_(c) {}
  Errc errc() const noexcept { return c_; }
  int exit_code() const noexcept { return static_cast<int>(c_); }

 private:
  Errc c_;
};

[[noreturn]] inline void fail(Errc c, const std::string& msg) { throw Error(c, msg); }

}  // namespace wentzell
