#pragma once

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <functional>
#include <string>

#include "cftrack/gradcheck.hpp"
#include "cftrack/rng.hpp"
#include "cftrack/tensor.hpp"

namespace testing {

template <typename T>
cftrack::Tensor<T> random_tensor(cftrack::Shape shape, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  cftrack::Tensor<T> t(std::move(shape));
  cftrack::Rng rng(seed);
  for (auto& v : t.data()) v = static_cast<T>(rng.uniform(lo, hi));
  return t;
}

// Parameter set holding the given tensors under names p0, p1, ...
template <typename T>
cftrack::ParameterSet<T> wrap(std::initializer_list<cftrack::Tensor<T>> tensors) {
  cftrack::ParameterSet<T> set;
  int i = 0;
  for (const auto& t : tensors) set.add("p" + std::to_string(i++), t);
  return set;
}

// Finite-difference check in double precision over at least 100 coordinates
// (or every coordinate of smaller tensors).
inline double op_gradient_error(const std::function<cftrack::Tensor<double>()>& loss,
                                cftrack::ParameterSet<double>& params) {
  cftrack::GradCheckOptions<double> o;
  o.h = 1e-5;
  o.samples_per_tensor = 100;
  o.scale_floor = 1e-6;
  const auto report = cftrack::finite_diff_check(loss, params, o);
  CHECK(report.skipped == 0);
  return report.max_relative_error;
}

// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("cftrack_" + tag + "_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing
