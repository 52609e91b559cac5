#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>

#include <Eigen/Core>

namespace geosteer {

/// Seeded random stream. Wraps the engine together with the normal
/// distribution so that the full state (including the cached second normal
/// variate) can be checkpointed and restored bit-exactly.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  /// Independent stream for (seed, stream). Different streams never share a
  /// seed sequence, so e.g. the truth draw and the prior ensemble stay apart.
  static Rng stream(std::uint64_t seed, std::uint64_t stream_id);

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  Eigen::VectorXd normal_vector(Eigen::Index n);

  std::mt19937_64& engine() { return engine_; }

  std::string save() const;
  void load(const std::string& state);

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace geosteer
